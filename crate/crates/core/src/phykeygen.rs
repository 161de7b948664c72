//! Channel-reciprocity key generation.
//!
//! Alice and Bob observe the same block-fading Rayleigh coefficient `h`, each
//! through independent additive noise; Eve observes an independent channel.
//! Two quantizer families turn observations into key bits:
//!
//! * RSS: two-threshold censoring of `|obs|²` against per-window mean and
//!   standard deviation, one bit per surviving probe.
//! * Phase: uniform sectors of `arg(obs)`, `log2(sectors)` Gray-coded bits per
//!   coherence block.
//!
//! Reconciliation is limited to publicly intersecting the kept probe indices.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
#[cfg(feature = "parallel")]
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::blockcipher::Bit;
use crate::channelsim::gray;
use crate::metrics::monobit_p;
use crate::RngSeed;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KeyGenError {
    #[error("invalid quantizer config: {0}")]
    InvalidConfig(String),
    #[error("{0} must be at least 1")]
    Zero(&'static str),
    #[error("window {window} exceeds the {len} available observations")]
    WindowTooLarge { window: usize, len: usize },
    #[error("cannot reconcile a {0} key with a {1} key")]
    SchemeMismatch(Scheme, Scheme),
    #[error("key lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("unknown scheme {0:?}")]
    UnknownScheme(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Rss,
    Phase,
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::Rss => "rss",
            Scheme::Phase => "phase",
        })
    }
}

impl FromStr for Scheme {
    type Err = KeyGenError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "rss" => Ok(Scheme::Rss),
            "phase" => Ok(Scheme::Phase),
            other => Err(KeyGenError::UnknownScheme(other.to_string())),
        }
    }
}

/// Parameters of both quantizers. Thresholds are in standard deviations
/// relative to the per-window mean RSS.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantizerConfig {
    pub q_plus: f64,
    pub q_minus: f64,
    pub window: usize,
    pub sectors: u32,
}

impl Default for QuantizerConfig {
    fn default() -> Self {
        Self {
            q_plus: 0.8,
            q_minus: -0.8,
            window: 250,
            sectors: 4,
        }
    }
}

impl QuantizerConfig {
    pub fn validate(&self) -> Result<(), KeyGenError> {
        if self.q_minus.partial_cmp(&self.q_plus) != Some(std::cmp::Ordering::Less) {
            return Err(KeyGenError::InvalidConfig(format!(
                "q_minus ({}) must be below q_plus ({})",
                self.q_minus, self.q_plus
            )));
        }
        if self.window == 0 {
            return Err(KeyGenError::Zero("window"));
        }
        if self.sectors < 2 || !self.sectors.is_power_of_two() {
            return Err(KeyGenError::InvalidConfig(format!(
                "sectors must be a power of two >= 2, got {}",
                self.sectors
            )));
        }
        Ok(())
    }

    pub fn bits_per_kept_probe(&self, scheme: Scheme) -> u32 {
        match scheme {
            Scheme::Rss => 1,
            Scheme::Phase => self.sectors.trailing_zeros(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelProbeSet {
    pub alice: Vec<Complex64>,
    pub bob: Vec<Complex64>,
    pub eve: Vec<Complex64>,
    pub snr_db: f64,
    pub coherence_block: usize,
    pub n_probes: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KeyBitstream {
    pub bits: Vec<Bit>,
    pub kept_indices: Vec<usize>,
    pub scheme: Scheme,
    pub bits_per_kept_probe: u32,
}

impl KeyBitstream {
    fn empty(scheme: Scheme, bits_per_kept_probe: u32) -> Self {
        Self {
            bits: Vec::new(),
            kept_indices: Vec::new(),
            scheme,
            bits_per_kept_probe,
        }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KgMetrics {
    pub kdp: f64,
    pub kgr: f64,
    pub monobit_p: f64,
    /// Set when the reconciled key is empty, in which case `kdp` is the
    /// placeholder 0. For trial averages it is set if any trial was empty.
    pub empty_key: bool,
}

fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, std_per_dim: f64) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(std_per_dim * re, std_per_dim * im)
}

/// Draws one probe set. `snr_db = +inf` gives noiseless observations.
pub fn simulate_probes(
    n_probes: usize,
    snr_db: f64,
    coherence_block: usize,
    seed: RngSeed,
) -> Result<ChannelProbeSet, KeyGenError> {
    if n_probes == 0 {
        return Err(KeyGenError::Zero("n_probes"));
    }
    if coherence_block == 0 {
        return Err(KeyGenError::Zero("coherence_block"));
    }
    let noise_std = (10f64.powf(-snr_db / 10.0) / 2.0).sqrt();
    let mut rng = seed.rng();
    let mut alice = Vec::with_capacity(n_probes);
    let mut bob = Vec::with_capacity(n_probes);
    let mut eve = Vec::with_capacity(n_probes);
    let mut start = 0;
    while start < n_probes {
        let h = complex_gaussian(&mut rng, FRAC_1_SQRT_2);
        let g = complex_gaussian(&mut rng, FRAC_1_SQRT_2);
        for _ in start..(start + coherence_block).min(n_probes) {
            if noise_std == 0.0 {
                alice.push(h);
                bob.push(h);
                eve.push(g);
            } else {
                alice.push(h + complex_gaussian(&mut rng, noise_std));
                bob.push(h + complex_gaussian(&mut rng, noise_std));
                eve.push(g + complex_gaussian(&mut rng, noise_std));
            }
        }
        start += coherence_block;
    }
    Ok(ChannelProbeSet {
        alice,
        bob,
        eve,
        snr_db,
        coherence_block,
        n_probes,
    })
}

/// Two-threshold censoring of RSS values. Windows are consecutive runs of
/// `cfg.window` values; a shorter final window is quantized on its own.
pub fn quantize_rss_values(rss: &[f64], cfg: &QuantizerConfig) -> Result<KeyBitstream, KeyGenError> {
    cfg.validate()?;
    if cfg.window > rss.len() {
        return Err(KeyGenError::WindowTooLarge {
            window: cfg.window,
            len: rss.len(),
        });
    }
    let mut out = KeyBitstream::empty(Scheme::Rss, 1);
    for (w, chunk) in rss.chunks(cfg.window).enumerate() {
        let n = chunk.len() as f64;
        let mean = chunk.iter().sum::<f64>() / n;
        let std = (chunk.iter().map(|r| (r - mean) * (r - mean)).sum::<f64>() / n).sqrt();
        if std == 0.0 {
            continue;
        }
        let upper = mean + cfg.q_plus * std;
        let lower = mean + cfg.q_minus * std;
        for (i, &r) in chunk.iter().enumerate() {
            let bit = if r > upper {
                1
            } else if r < lower {
                0
            } else {
                continue;
            };
            out.bits.push(bit);
            out.kept_indices.push(w * cfg.window + i);
        }
    }
    Ok(out)
}

pub fn rss_quantize(obs: &[Complex64], cfg: &QuantizerConfig) -> Result<KeyBitstream, KeyGenError> {
    let rss: Vec<f64> = obs.iter().map(|z| z.norm_sqr()).collect();
    quantize_rss_values(&rss, cfg)
}

/// Sector of a phase in `[0, 2π)`, clamped so rounding at `2π` stays in range.
pub fn phase_sector(theta: f64, sectors: u32) -> u32 {
    let t = if theta < 0.0 { theta + 2.0 * PI } else { theta };
    ((t * sectors as f64 / (2.0 * PI)).floor() as u32).min(sectors - 1)
}

/// Uniform phase quantizer on the first probe of each coherence block.
/// Zero-magnitude observations have no phase and are dropped.
pub fn phase_quantize(
    obs: &[Complex64],
    cfg: &QuantizerConfig,
    coherence_block: usize,
) -> Result<KeyBitstream, KeyGenError> {
    cfg.validate()?;
    if coherence_block == 0 {
        return Err(KeyGenError::Zero("coherence_block"));
    }
    let bps = cfg.bits_per_kept_probe(Scheme::Phase);
    let mut out = KeyBitstream::empty(Scheme::Phase, bps);
    for idx in (0..obs.len()).step_by(coherence_block) {
        let z = obs[idx];
        if z.norm_sqr() == 0.0 {
            continue;
        }
        let label = gray(phase_sector(z.arg(), cfg.sectors));
        for b in (0..bps).rev() {
            out.bits.push(((label >> b) & 1) as u8);
        }
        out.kept_indices.push(idx);
    }
    Ok(out)
}

pub fn quantize(
    obs: &[Complex64],
    scheme: Scheme,
    cfg: &QuantizerConfig,
    coherence_block: usize,
) -> Result<KeyBitstream, KeyGenError> {
    match scheme {
        Scheme::Rss => rss_quantize(obs, cfg),
        Scheme::Phase => phase_quantize(obs, cfg, coherence_block),
    }
}

/// Restricts both streams to the probe indices both of them kept.
pub fn reconcile_indices(a: &KeyBitstream, b: &KeyBitstream) -> Result<(KeyBitstream, KeyBitstream), KeyGenError> {
    if a.scheme != b.scheme {
        return Err(KeyGenError::SchemeMismatch(a.scheme, b.scheme));
    }
    if a.bits_per_kept_probe != b.bits_per_kept_probe {
        return Err(KeyGenError::InvalidConfig(format!(
            "{} vs {} bits per probe",
            a.bits_per_kept_probe, b.bits_per_kept_probe
        )));
    }
    let bps = a.bits_per_kept_probe as usize;
    let mut ra = KeyBitstream::empty(a.scheme, a.bits_per_kept_probe);
    let mut rb = KeyBitstream::empty(b.scheme, b.bits_per_kept_probe);
    let (mut i, mut j) = (0, 0);
    while i < a.kept_indices.len() && j < b.kept_indices.len() {
        let (x, y) = (a.kept_indices[i], b.kept_indices[j]);
        if x < y {
            i += 1;
        } else if y < x {
            j += 1;
        } else {
            ra.kept_indices.push(x);
            rb.kept_indices.push(y);
            ra.bits.extend_from_slice(&a.bits[i * bps..(i + 1) * bps]);
            rb.bits.extend_from_slice(&b.bits[j * bps..(j + 1) * bps]);
            i += 1;
            j += 1;
        }
    }
    Ok((ra, rb))
}

/// Fraction of differing bits. Two empty keys disagree with probability 0.
pub fn key_disagreement_probability(a: &KeyBitstream, b: &KeyBitstream) -> Result<f64, KeyGenError> {
    if a.len() != b.len() {
        return Err(KeyGenError::LengthMismatch(a.len(), b.len()));
    }
    if a.is_empty() {
        return Ok(0.0);
    }
    let diff = a.bits.iter().zip(&b.bits).filter(|(x, y)| x != y).count();
    Ok(diff as f64 / a.len() as f64)
}

/// Key bits per channel probe.
pub fn key_generation_rate(k: &KeyBitstream, n_probes: usize) -> Result<f64, KeyGenError> {
    if n_probes == 0 {
        return Err(KeyGenError::Zero("n_probes"));
    }
    Ok(k.len() as f64 / n_probes as f64)
}

/// Everything one trial yields for one scheme.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    pub alice: KeyBitstream,
    pub bob: KeyBitstream,
    pub metrics: KgMetrics,
    /// Disagreement between Alice's key and the one Eve extracts from her own
    /// channel, after the same index reconciliation.
    pub eve_kdp: f64,
}

/// Quantizes and reconciles one probe set.
pub fn evaluate_probes(
    probes: &ChannelProbeSet,
    scheme: Scheme,
    cfg: &QuantizerConfig,
) -> Result<TrialOutcome, KeyGenError> {
    let ka = quantize(&probes.alice, scheme, cfg, probes.coherence_block)?;
    let kb = quantize(&probes.bob, scheme, cfg, probes.coherence_block)?;
    let ke = quantize(&probes.eve, scheme, cfg, probes.coherence_block)?;
    let (alice, bob) = reconcile_indices(&ka, &kb)?;
    let (alice_vs_eve, eve) = reconcile_indices(&ka, &ke)?;
    let metrics = KgMetrics {
        kdp: key_disagreement_probability(&alice, &bob)?,
        kgr: key_generation_rate(&alice, probes.n_probes)?,
        monobit_p: monobit_p(&alice.bits),
        empty_key: alice.is_empty(),
    };
    let eve_kdp = key_disagreement_probability(&alice_vs_eve, &eve)?;
    Ok(TrialOutcome {
        alice,
        bob,
        metrics,
        eve_kdp,
    })
}

/// Random stream of trial `trial` at SNR list position `snr_index`.
pub fn trial_seed(seed: u64, snr_index: usize, trial: usize) -> RngSeed {
    RngSeed::new(seed, ((snr_index as u64) << 32) | trial as u64)
}

/// One simulated trial for every requested scheme, all on the same probes.
pub fn run_trial(
    n_probes: usize,
    snr_db: f64,
    coherence_block: usize,
    schemes: &[Scheme],
    cfg: &QuantizerConfig,
    seed: RngSeed,
) -> Result<Vec<TrialOutcome>, KeyGenError> {
    let probes = simulate_probes(n_probes, snr_db, coherence_block, seed)?;
    schemes.iter().map(|&s| evaluate_probes(&probes, s, cfg)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonSetup {
    pub n_probes: usize,
    pub snr_list: Vec<f64>,
    pub schemes: Vec<Scheme>,
    pub config: QuantizerConfig,
    pub coherence_block: usize,
    pub trials: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeRow {
    pub scheme: Scheme,
    pub snr_db: f64,
    pub metrics: KgMetrics,
    pub eve_kdp: f64,
}

/// Trial-averaged metrics for every `(scheme, snr)` cell, ordered by scheme
/// then SNR. Trial `t` at SNR position `i` always uses `trial_seed(seed, i, t)`,
/// so the table does not depend on thread count.
pub fn compare_schemes(setup: &ComparisonSetup) -> Result<Vec<SchemeRow>, KeyGenError> {
    if setup.trials == 0 {
        return Err(KeyGenError::Zero("trials"));
    }
    setup.config.validate()?;
    let jobs: Vec<(usize, usize)> = (0..setup.snr_list.len())
        .flat_map(|i| (0..setup.trials).map(move |t| (i, t)))
        .collect();
    let run = |&(i, t): &(usize, usize)| {
        run_trial(
            setup.n_probes,
            setup.snr_list[i],
            setup.coherence_block,
            &setup.schemes,
            &setup.config,
            trial_seed(setup.seed, i, t),
        )
    };
    #[cfg(feature = "parallel")]
    let outcomes: Vec<Vec<TrialOutcome>> = jobs.par_iter().map(run).collect::<Result<_, _>>()?;
    #[cfg(not(feature = "parallel"))]
    let outcomes: Vec<Vec<TrialOutcome>> = jobs.iter().map(run).collect::<Result<_, _>>()?;

    let trials = setup.trials as f64;
    let mut rows = Vec::with_capacity(setup.schemes.len() * setup.snr_list.len());
    for (s, &scheme) in setup.schemes.iter().enumerate() {
        for (i, &snr_db) in setup.snr_list.iter().enumerate() {
            let cell = &outcomes[i * setup.trials..(i + 1) * setup.trials];
            let mean = |f: &dyn Fn(&TrialOutcome) -> f64| cell.iter().map(|o| f(&o[s])).sum::<f64>() / trials;
            rows.push(SchemeRow {
                scheme,
                snr_db,
                metrics: KgMetrics {
                    kdp: mean(&|o| o.metrics.kdp),
                    kgr: mean(&|o| o.metrics.kgr),
                    monobit_p: mean(&|o| o.metrics.monobit_p),
                    empty_key: cell.iter().any(|o| o[s].metrics.empty_key),
                },
                eve_kdp: mean(&|o| o.eve_kdp),
            });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn stream(scheme: Scheme, bits: &[u8], kept: &[usize]) -> KeyBitstream {
        KeyBitstream {
            bits: bits.to_vec(),
            kept_indices: kept.to_vec(),
            scheme,
            bits_per_kept_probe: 1,
        }
    }

    fn cfg(q_plus: f64, q_minus: f64, window: usize) -> QuantizerConfig {
        QuantizerConfig {
            q_plus,
            q_minus,
            window,
            ..Default::default()
        }
    }

    #[test]
    fn noiseless_probes_are_reciprocal() {
        let p = simulate_probes(500, f64::INFINITY, 3, RngSeed::new(1, 0)).unwrap();
        assert_eq!(p.alice, p.bob);
        assert_ne!(p.alice, p.eve);
        assert_eq!((p.alice.len(), p.bob.len(), p.eve.len()), (500, 500, 500));
    }

    #[test]
    fn single_block_is_constant_up_to_noise() {
        let p = simulate_probes(1000, 30.0, 1000, RngSeed::new(2, 0)).unwrap();
        let h = p.alice.iter().sum::<Complex64>() / 1000.0;
        // Noise std per observation is sqrt(1e-3) ~ 0.032.
        assert!(p.alice.iter().all(|z| (z - h).norm() < 0.2));
        let clean = simulate_probes(1000, f64::INFINITY, 1000, RngSeed::new(2, 0)).unwrap();
        assert!(clean.alice.iter().all(|z| *z == clean.alice[0]));
    }

    #[test]
    fn fading_has_unit_variance() {
        let p = simulate_probes(100_000, f64::INFINITY, 1, RngSeed::new(3, 0)).unwrap();
        let var_re = p.alice.iter().map(|z| z.re * z.re).sum::<f64>() / 1e5;
        assert!((var_re - 0.5).abs() < 0.02, "var = {var_re}");
    }

    #[test]
    fn probes_deterministic_and_validated() {
        let a = simulate_probes(64, 10.0, 4, RngSeed::new(8, 1)).unwrap();
        assert_eq!(a, simulate_probes(64, 10.0, 4, RngSeed::new(8, 1)).unwrap());
        assert!(simulate_probes(0, 10.0, 4, RngSeed::default()).is_err());
        assert!(simulate_probes(10, 10.0, 0, RngSeed::default()).is_err());
    }

    #[test]
    fn rss_threshold_rule() {
        // mean 0.2, population std ~2.2465: bounds ~2.447 and ~-2.047.
        let k = quantize_rss_values(&[3.0, -2.5, 0.1], &cfg(1.0, -1.0, 3)).unwrap();
        assert_eq!(k.bits, vec![1, 0]);
        assert_eq!(k.kept_indices, vec![0, 1]);
        // mean 1, std sqrt(0.5): bounds ~1.707 and ~0.293.
        let k = quantize_rss_values(&[2.0, 0.0, 1.0, 1.0], &cfg(1.0, -1.0, 4)).unwrap();
        assert_eq!((k.bits, k.kept_indices), (vec![1, 0], vec![0, 1]));
    }

    #[test]
    fn rss_flat_window_is_dropped() {
        let k = quantize_rss_values(&[4.0; 10], &cfg(0.8, -0.8, 5)).unwrap();
        assert!(k.is_empty());
        let k = quantize_rss_values(&[4.0, 4.0, 1.0, 9.0], &cfg(0.5, -0.5, 2)).unwrap();
        assert_eq!((k.bits, k.kept_indices), (vec![0, 1], vec![2, 3]));
    }

    #[test]
    fn empty_key_is_flagged() {
        let flat = vec![Complex64::new(1.0, 0.0); 8];
        let probes = ChannelProbeSet {
            alice: flat.clone(),
            bob: flat.clone(),
            eve: flat,
            snr_db: f64::INFINITY,
            coherence_block: 1,
            n_probes: 8,
        };
        let out = evaluate_probes(&probes, Scheme::Rss, &cfg(0.8, -0.8, 4)).unwrap();
        assert!(out.metrics.empty_key);
        assert_eq!(out.metrics.kdp, 0.0);
        let out = evaluate_probes(&probes, Scheme::Phase, &QuantizerConfig::default()).unwrap();
        assert!(!out.metrics.empty_key);
    }

    #[test]
    fn rss_window_too_large() {
        assert!(matches!(
            quantize_rss_values(&[1.0, 2.0], &cfg(0.8, -0.8, 3)),
            Err(KeyGenError::WindowTooLarge { .. })
        ));
    }

    #[test]
    fn rss_noiseless_agrees() {
        let p = simulate_probes(2000, f64::INFINITY, 1, RngSeed::new(4, 0)).unwrap();
        let c = QuantizerConfig::default();
        let ka = rss_quantize(&p.alice, &c).unwrap();
        let kb = rss_quantize(&p.bob, &c).unwrap();
        assert_eq!(ka, kb);
        assert_eq!(key_disagreement_probability(&ka, &kb).unwrap(), 0.0);
    }

    #[test]
    fn phase_sectors() {
        let c2 = QuantizerConfig { sectors: 2, ..Default::default() };
        let k = phase_quantize(&[Complex64::from_polar(1.0, 0.5), Complex64::from_polar(1.0, PI + 0.5)], &c2, 1).unwrap();
        assert_eq!(k.bits, vec![0, 1]);

        let c4 = QuantizerConfig::default();
        let almost = 2.0 * PI - 1e-9;
        assert_eq!(phase_sector(almost, 4), 3);
        let k = phase_quantize(&[Complex64::from_polar(1.0, almost)], &c4, 1).unwrap();
        assert_eq!(k.bits, vec![1, 0]);
        assert_eq!(phase_sector(-1e-300, 4), 3);
    }

    #[test]
    fn phase_drops_zero_and_uses_block_heads() {
        let c = QuantizerConfig::default();
        let obs = [
            Complex64::new(0.0, 0.0),
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 1.0),
            Complex64::new(-1.0, 0.0),
        ];
        let k = phase_quantize(&obs, &c, 2).unwrap();
        assert_eq!(k.kept_indices, vec![2]);
        assert_eq!(k.bits.len(), 2);
        assert!(phase_quantize(&obs, &c, 0).is_err());
    }

    #[test]
    fn phase_rate_is_two_bits_per_probe() {
        let p = simulate_probes(4000, 20.0, 1, RngSeed::new(6, 0)).unwrap();
        let k = phase_quantize(&p.alice, &QuantizerConfig::default(), 1).unwrap();
        assert_eq!(key_generation_rate(&k, 4000).unwrap(), 2.0);
    }

    #[test]
    fn reconcile_examples() {
        let a = stream(Scheme::Rss, &[1, 0, 1], &[0, 1, 3]);
        let b = stream(Scheme::Rss, &[0, 1, 1], &[1, 3, 4]);
        let (ra, rb) = reconcile_indices(&a, &b).unwrap();
        assert_eq!((ra.kept_indices.clone(), ra.bits.clone()), (vec![1, 3], vec![0, 1]));
        assert_eq!((rb.kept_indices.clone(), rb.bits.clone()), (vec![1, 3], vec![0, 1]));

        let (x, y) = reconcile_indices(&a, &a).unwrap();
        assert_eq!((&x, &y), (&a, &a));

        let d = stream(Scheme::Rss, &[1], &[7]);
        let (x, y) = reconcile_indices(&a, &d).unwrap();
        assert!(x.is_empty() && y.is_empty());

        let p = stream(Scheme::Phase, &[1], &[0]);
        assert!(matches!(reconcile_indices(&a, &p), Err(KeyGenError::SchemeMismatch(..))));
    }

    #[test]
    fn kdp_examples() {
        let a = stream(Scheme::Rss, &[1, 0, 1, 0], &[0, 1, 2, 3]);
        let b = stream(Scheme::Rss, &[1, 1, 1, 0], &[0, 1, 2, 3]);
        assert_eq!(key_disagreement_probability(&a, &b).unwrap(), 0.25);
        assert_eq!(key_disagreement_probability(&a, &a).unwrap(), 0.0);
        let e = stream(Scheme::Rss, &[], &[]);
        assert_eq!(key_disagreement_probability(&e, &e).unwrap(), 0.0);
        assert!(matches!(key_disagreement_probability(&a, &e), Err(KeyGenError::LengthMismatch(4, 0))));
    }

    #[test]
    fn kgr_examples() {
        let k = stream(Scheme::Rss, &[1; 8], &[0, 1, 2, 3, 4, 5, 6, 7]);
        assert_eq!(key_generation_rate(&k, 16).unwrap(), 0.5);
        assert_eq!(key_generation_rate(&stream(Scheme::Rss, &[], &[]), 16).unwrap(), 0.0);
        assert!(key_generation_rate(&k, 0).is_err());
    }

    #[test]
    fn config_validation() {
        assert!(QuantizerConfig::default().validate().is_ok());
        assert!(cfg(0.5, 0.5, 10).validate().is_err());
        assert!(cfg(0.5, -0.5, 0).validate().is_err());
        assert!(QuantizerConfig { sectors: 3, ..Default::default() }.validate().is_err());
        assert!("both".parse::<Scheme>().is_err());
        assert_eq!("phase".parse::<Scheme>().unwrap(), Scheme::Phase);
    }

    #[test]
    fn compare_rows_and_noiseless() {
        let setup = ComparisonSetup {
            n_probes: 1000,
            snr_list: vec![f64::INFINITY, 10.0],
            schemes: vec![Scheme::Rss, Scheme::Phase],
            config: QuantizerConfig::default(),
            coherence_block: 1,
            trials: 3,
            seed: 42,
        };
        let rows = compare_schemes(&setup).unwrap();
        assert_eq!(rows.len(), 4);
        assert_eq!((rows[0].scheme, rows[0].snr_db), (Scheme::Rss, f64::INFINITY));
        assert_eq!((rows[3].scheme, rows[3].snr_db), (Scheme::Phase, 10.0));
        assert_eq!(rows[0].metrics.kdp, 0.0);
        assert_eq!(rows[2].metrics.kdp, 0.0);
        assert_eq!(rows, compare_schemes(&setup).unwrap());
        assert!(compare_schemes(&ComparisonSetup { trials: 0, ..setup }).is_err());
    }

    proptest! {
        #[test]
        fn kdp_properties(bits_a in proptest::collection::vec(0u8..=1, 0..200), seed in any::<u64>()) {
            use rand::Rng;
            let mut rng = RngSeed::new(seed, 0).rng();
            let bits_b: Vec<u8> = bits_a.iter().map(|&b| if rng.random_bool(0.3) { 1 - b } else { b }).collect();
            let idx: Vec<usize> = (0..bits_a.len()).collect();
            let a = stream(Scheme::Rss, &bits_a, &idx);
            let b = stream(Scheme::Rss, &bits_b, &idx);
            let d = key_disagreement_probability(&a, &b).unwrap();
            prop_assert!((0.0..=1.0).contains(&d));
            prop_assert_eq!(d, key_disagreement_probability(&b, &a).unwrap());
            prop_assert_eq!(key_disagreement_probability(&a, &a).unwrap(), 0.0);
        }

        #[test]
        fn reconcile_aligns(seed in any::<u64>(), snr in 0.0f64..30.0, scheme_phase in any::<bool>()) {
            let scheme = if scheme_phase { Scheme::Phase } else { Scheme::Rss };
            let c = QuantizerConfig { window: 50, ..Default::default() };
            let p = simulate_probes(300, snr, 2, RngSeed::new(seed, 0)).unwrap();
            let ka = quantize(&p.alice, scheme, &c, 2).unwrap();
            let kb = quantize(&p.bob, scheme, &c, 2).unwrap();
            let bpp = c.bits_per_kept_probe(scheme) as usize;
            prop_assert_eq!(ka.bits.len(), ka.kept_indices.len() * bpp);
            prop_assert!(ka.kept_indices.len() <= p.n_probes);
            let (ra, rb) = reconcile_indices(&ka, &kb).unwrap();
            prop_assert_eq!(ra.len(), rb.len());
            prop_assert_eq!(&ra.kept_indices, &rb.kept_indices);
        }
    }
}
