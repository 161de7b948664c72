//! Gray-mapped M-PSK over an AWGN channel and Monte-Carlo BER measurement.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
#[cfg(feature = "parallel")]
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::blockcipher::Bit;
use crate::RngSeed;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ChannelError {
    #[error("PSK order must be a power of two >= 2, got {0}")]
    InvalidOrder(u32),
    #[error("symbol stream has order {stream}, demodulator expects {expected}")]
    OrderMismatch { stream: u32, expected: u32 },
    #[error("number of bits must be at least 1")]
    NoBits,
}

/// Modulated symbols plus the number of zero bits appended to fill the last symbol.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolStream {
    pub symbols: Vec<Complex64>,
    pub order: u32,
    pub pad_bits: usize,
}

/// One measured point of a BER curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BerPoint {
    pub ebn0_db: f64,
    pub bits_simulated: u64,
    pub errors: u64,
    pub ber: f64,
}

fn check_order(order: u32) -> Result<u32, ChannelError> {
    if order < 2 || !order.is_power_of_two() {
        return Err(ChannelError::InvalidOrder(order));
    }
    Ok(order.trailing_zeros())
}

pub fn gray(k: u32) -> u32 {
    k ^ (k >> 1)
}

pub fn gray_inverse(mut g: u32) -> u32 {
    let mut k = g;
    while g > 0 {
        g >>= 1;
        k ^= g;
    }
    k
}

/// Constellation point `k` of an M-PSK alphabet. QPSK and above are rotated by `π/M`.
pub fn constellation_point(k: u32, order: u32) -> Complex64 {
    let offset = if order > 2 { PI / order as f64 } else { 0.0 };
    Complex64::from_polar(1.0, 2.0 * PI * k as f64 / order as f64 + offset)
}

/// Maps bits (MSB first within each symbol) to unit-energy PSK symbols.
/// Point `k` carries the Gray label `k ^ (k >> 1)`.
pub fn psk_modulate(bits: &[Bit], order: u32) -> Result<SymbolStream, ChannelError> {
    let bps = check_order(order)? as usize;
    let pad_bits = (bps - bits.len() % bps) % bps;
    let symbols = bits
        .chunks(bps)
        .map(|chunk| {
            let label = (0..bps).fold(0u32, |acc, i| (acc << 1) | chunk.get(i).map_or(0, |&b| (b & 1) as u32));
            constellation_point(gray_inverse(label), order)
        })
        .collect();
    Ok(SymbolStream {
        symbols,
        order,
        pad_bits,
    })
}

/// Per-dimension noise variance for unit-energy symbols at the given Eb/N0.
pub fn noise_variance_per_dim(ebn0_db: f64, order: u32) -> f64 {
    let bps = order.trailing_zeros() as f64;
    1.0 / (2.0 * bps * 10f64.powf(ebn0_db / 10.0))
}

/// Adds circular complex Gaussian noise in place. `ebn0_db = +inf` is noiseless.
pub fn add_awgn<R: Rng + ?Sized>(symbols: &mut [Complex64], order: u32, ebn0_db: f64, rng: &mut R) {
    let sigma = noise_variance_per_dim(ebn0_db, order).sqrt();
    if sigma == 0.0 {
        return;
    }
    for s in symbols.iter_mut() {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        *s += Complex64::new(sigma * re, sigma * im);
    }
}

pub fn awgn(s: &SymbolStream, ebn0_db: f64, seed: RngSeed) -> SymbolStream {
    let mut out = s.clone();
    add_awgn(&mut out.symbols, s.order, ebn0_db, &mut seed.rng());
    out
}

/// Distances closer than this are treated as a tie. The constellation points
/// are only symmetric up to rounding of `sin`/`cos`.
const TIE_EPS: f64 = 1e-12;

/// Index of the nearest constellation point; ties go to the smaller index.
pub fn nearest_point(sym: Complex64, order: u32) -> u32 {
    let mut best = 0;
    let mut best_dist = f64::INFINITY;
    for k in 0..order {
        let d = (sym - constellation_point(k, order)).norm_sqr();
        if d < best_dist - TIE_EPS {
            best = k;
            best_dist = d;
        }
    }
    best
}

fn push_label(out: &mut Vec<Bit>, label: u32, bps: u32) {
    for i in (0..bps).rev() {
        out.push(((label >> i) & 1) as u8);
    }
}

/// Minimum-distance decision followed by the inverse Gray map.
/// Padding bits recorded in the stream are dropped.
pub fn psk_demodulate(s: &SymbolStream, order: u32) -> Result<Vec<Bit>, ChannelError> {
    let bps = check_order(order)?;
    if s.order != order {
        return Err(ChannelError::OrderMismatch {
            stream: s.order,
            expected: order,
        });
    }
    let mut bits = Vec::with_capacity(s.symbols.len() * bps as usize);
    for &sym in &s.symbols {
        // BPSK decision regions are the half-planes; skip the distance search.
        let k = if order == 2 { u32::from(sym.re < 0.0) } else { nearest_point(sym, order) };
        push_label(&mut bits, gray(k), bps);
    }
    bits.truncate(bits.len() - s.pad_bits);
    Ok(bits)
}

/// Analytic BPSK bit error probability `erfc(sqrt(Eb/N0)) / 2`.
pub fn ber_theory_bpsk(ebn0_db: f64) -> f64 {
    if ebn0_db == f64::NEG_INFINITY {
        return 0.5;
    }
    0.5 * libm::erfc(10f64.powf(ebn0_db / 10.0).sqrt())
}

/// Simulates one BER point from its own random stream.
pub fn ber_point(n_bits: u64, ebn0_db: f64, order: u32, seed: RngSeed) -> Result<BerPoint, ChannelError> {
    if n_bits == 0 {
        return Err(ChannelError::NoBits);
    }
    check_order(order)?;
    let mut rng = seed.rng();
    let bits: Vec<Bit> = (0..n_bits).map(|_| rng.random::<bool>() as u8).collect();
    let mut stream = psk_modulate(&bits, order)?;
    add_awgn(&mut stream.symbols, order, ebn0_db, &mut rng);
    let decoded = psk_demodulate(&stream, order)?;
    let errors = bits.iter().zip(&decoded).filter(|(a, b)| a != b).count() as u64;
    Ok(BerPoint {
        ebn0_db,
        bits_simulated: n_bits,
        errors,
        ber: errors as f64 / n_bits as f64,
    })
}

/// One [`BerPoint`] per Eb/N0 value, point `i` drawn from stream `i` of `seed`.
/// The result does not depend on how many threads run it.
pub fn ber_curve(n_bits: u64, ebn0_list: &[f64], order: u32, seed: RngSeed) -> Result<Vec<BerPoint>, ChannelError> {
    check_order(order)?;
    let run = |(i, &e): (usize, &f64)| ber_point(n_bits, e, order, seed.with_stream(i as u64));
    #[cfg(feature = "parallel")]
    let points = ebn0_list.par_iter().enumerate().map(run).collect();
    #[cfg(not(feature = "parallel"))]
    let points = ebn0_list.iter().enumerate().map(run).collect();
    points
}
