//! Simulation toolkit for physical-layer key agreement and block-matrix
//! multimedia encryption.
//!
//! * [`keyexchange`]: modified Diffie-Hellman with common-key and
//!   encryption-key gates.
//! * [`blockcipher`]: 2×2 unimodular block-matrix cipher.
//! * [`channelsim`]: M-PSK over AWGN and BER curves.
//! * [`phykeygen`]: RSS and phase quantization of reciprocal fading channels.
//! * [`metrics`]: scalability factor, empirical CDF, bit rate, monobit test.
//! * [`pipeline`]: the full exchange → gates → encrypt → decrypt run.

pub mod blockcipher;
pub mod channelsim;
pub mod container;
pub mod keyexchange;
pub mod metrics;
pub mod pgm;
pub mod phykeygen;
pub mod pipeline;
pub mod report;
mod rng;

pub use rng::RngSeed;

/// Seed used when none is given, so bare runs are reproducible.
pub const DEFAULT_SEED: u64 = 42;
