//! Scalability factor, empirical CDF, effective bit rate, and the monobit
//! frequency test.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::blockcipher::{Bit, MessageMatrix};
use crate::channelsim::BerPoint;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricsError {
    #[error("plaintext is all zero; scalability factor is undefined")]
    ZeroPlaintext,
    #[error("plaintext is {plain:?} but ciphertext is {cipher:?}")]
    ShapeMismatch { plain: (usize, usize), cipher: (usize, usize) },
    #[error("empirical CDF needs at least one sample")]
    EmptySamples,
    #[error("sample {0} is NaN")]
    NanSample(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalabilityReport {
    pub input_frobenius: f64,
    pub output_frobenius: f64,
    pub block_count: u64,
    pub factor: f64,
}

fn frobenius(m: &MessageMatrix) -> f64 {
    m.padded()
        .data()
        .iter()
        .map(|&v| {
            let v = v as f64;
            v * v
        })
        .sum::<f64>()
        .sqrt()
}

/// `(‖C‖_F / ‖P‖_F) · block_count`, with `block_count = rows · cols / 4` of the
/// padded matrices.
pub fn scalability_factor(plaintext: &MessageMatrix, ciphertext: &MessageMatrix) -> Result<ScalabilityReport, MetricsError> {
    let plain = (plaintext.rows(), plaintext.cols());
    let cipher = (ciphertext.rows(), ciphertext.cols());
    if plain != cipher {
        return Err(MetricsError::ShapeMismatch { plain, cipher });
    }
    let input_frobenius = frobenius(plaintext);
    if input_frobenius == 0.0 {
        return Err(MetricsError::ZeroPlaintext);
    }
    let output_frobenius = frobenius(ciphertext);
    let block_count = (plain.0 * plain.1 / 4) as u64;
    Ok(ScalabilityReport {
        input_frobenius,
        output_frobenius,
        block_count,
        factor: output_frobenius / input_frobenius * block_count as f64,
    })
}

/// Right-continuous step function sampled at each distinct value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CdfSeries {
    pub points: Vec<(f64, f64)>,
}

pub fn empirical_cdf(samples: &[f64]) -> Result<CdfSeries, MetricsError> {
    if samples.is_empty() {
        return Err(MetricsError::EmptySamples);
    }
    if let Some(i) = samples.iter().position(|v| v.is_nan()) {
        return Err(MetricsError::NanSample(i));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let mut points: Vec<(f64, f64)> = Vec::new();
    for (i, &v) in sorted.iter().enumerate() {
        // -0.0 and 0.0 are one value.
        let last_of_run = i + 1 == n || sorted[i + 1] != v;
        if last_of_run {
            points.push((v, (i + 1) as f64 / n as f64));
        }
    }
    Ok(CdfSeries { points })
}

/// Effective throughput `symbol_rate · log2(M) · (1 − BER)` for each point.
pub fn bitrate_samples(points: &[BerPoint], symbol_rate: f64, order: u32) -> Vec<f64> {
    let bps = order.trailing_zeros() as f64;
    points.iter().map(|p| symbol_rate * bps * (1.0 - p.ber)).collect()
}

/// NIST frequency (monobit) test p-value, floored at the smallest positive
/// `f64` so it stays in `(0, 1]`. An empty sequence yields 1.
pub fn monobit_p(bits: &[Bit]) -> f64 {
    if bits.is_empty() {
        return 1.0;
    }
    let n = bits.len() as f64;
    let ones = bits.iter().filter(|&&b| b & 1 == 1).count() as f64;
    let s = (2.0 * ones - n).abs() / n.sqrt();
    libm::erfc(s / std::f64::consts::SQRT_2).max(f64::MIN_POSITIVE)
}
