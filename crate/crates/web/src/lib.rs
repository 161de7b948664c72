//! WebAssembly bindings for the static demo page in `www/`.
//!
//! Every export returns a JSON string; the page parses it and draws on a
//! canvas. Errors surface as thrown JavaScript strings.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use phykey_core::blockcipher::{self, Matrix, MessageMatrix};
use phykey_core::phykeygen::{self, ComparisonSetup, QuantizerConfig, Scheme};
use phykey_core::{channelsim, metrics, RngSeed};

fn js_err(e: impl std::fmt::Display) -> JsValue {
    JsValue::from_str(&e.to_string())
}

fn to_json<T: Serialize>(v: &T) -> Result<String, JsValue> {
    serde_json::to_string(v).map_err(js_err)
}

fn parse_list(s: &str) -> Result<Vec<f64>, JsValue> {
    s.split(',')
        .map(|v| v.trim().parse::<f64>().map_err(|_| js_err(format!("bad number {v:?}"))))
        .collect()
}

#[derive(Serialize)]
struct BerRow {
    ebn0_db: f64,
    ber: f64,
    errors: u64,
    bits: u64,
    /// BPSK reference curve; QPSK with Gray labels has the same per-bit rate.
    theory: f64,
}

/// Monte-Carlo BER at each Eb/N0 in `ebn0_list` (comma separated).
#[wasm_bindgen]
pub fn ber_curve(bits: u32, ebn0_list: &str, order: u32, seed: u32) -> Result<String, JsValue> {
    let list = parse_list(ebn0_list)?;
    let points = channelsim::ber_curve(bits as u64, &list, order, RngSeed::new(seed as u64, 0)).map_err(js_err)?;
    let rows: Vec<BerRow> = points
        .iter()
        .map(|p| BerRow {
            ebn0_db: p.ebn0_db,
            ber: p.ber,
            errors: p.errors,
            bits: p.bits_simulated,
            theory: channelsim::ber_theory_bpsk(p.ebn0_db),
        })
        .collect();
    to_json(&rows)
}

#[derive(Serialize)]
struct SchemeJson {
    scheme: String,
    snr_db: f64,
    kdp: f64,
    kgr: f64,
    monobit_p: f64,
    eve_kdp: f64,
}

/// RSS versus phase key generation over the SNRs in `snr_list`.
#[wasm_bindgen]
pub fn compare_schemes(
    probes: u32,
    snr_list: &str,
    sectors: u32,
    coherence: u32,
    trials: u32,
    seed: u32,
) -> Result<String, JsValue> {
    let setup = ComparisonSetup {
        n_probes: probes as usize,
        snr_list: parse_list(snr_list)?,
        schemes: vec![Scheme::Rss, Scheme::Phase],
        config: QuantizerConfig {
            sectors,
            ..QuantizerConfig::default()
        },
        coherence_block: coherence as usize,
        trials: trials as usize,
        seed: seed as u64,
    };
    let rows = phykeygen::compare_schemes(&setup).map_err(js_err)?;
    to_json(
        &rows
            .iter()
            .map(|r| SchemeJson {
                scheme: r.scheme.to_string(),
                snr_db: r.snr_db,
                kdp: r.metrics.kdp,
                kgr: r.metrics.kgr,
                monobit_p: r.metrics.monobit_p,
                eve_kdp: r.eve_kdp,
            })
            .collect::<Vec<_>>(),
    )
}

#[derive(Serialize)]
struct CipherDemo {
    size: usize,
    plain: Vec<u8>,
    /// Ciphertext entries reduced mod 256 for display.
    cipher: Vec<u8>,
    decrypted_ok: bool,
    scalability_factor: f64,
    cipher_monobit_p: f64,
}

/// Test pattern: a diagonal gradient with a bright disc in the middle.
fn test_pattern(size: usize) -> Vec<i64> {
    let c = size as f64 / 2.0;
    let r2 = (size as f64 / 4.0).powi(2);
    (0..size * size)
        .map(|i| {
            let (y, x) = ((i / size) as f64, (i % size) as f64);
            if (x - c).powi(2) + (y - c).powi(2) < r2 {
                240
            } else {
                ((x + y) * 127.0 / size as f64) as i64
            }
        })
        .collect()
}

/// Encrypts a generated `size`×`size` image with key `k2` and decrypts it again.
#[wasm_bindgen]
pub fn cipher_demo(size: u32, k2: f64) -> Result<String, JsValue> {
    let size = size as usize;
    if k2.fract() != 0.0 || k2 < 1.0 {
        return Err(js_err("k2 must be a positive integer"));
    }
    let key = blockcipher::key_matrix(k2 as i128).map_err(js_err)?;
    let m = Matrix::new(size, size, test_pattern(size)).map_err(js_err)?;
    let plain = MessageMatrix::new(m.clone());
    let cipher = blockcipher::encrypt_matrix(&plain, &key).map_err(js_err)?;
    let back = blockcipher::decrypt_matrix(&cipher, &key).map_err(js_err)?;
    let scal = metrics::scalability_factor(&plain, &cipher).map_err(js_err)?;

    let c = cipher.padded();
    let low: Vec<u8> = (0..size * size).map(|i| c.get(i / size, i % size) as u8).collect();
    to_json(&CipherDemo {
        size,
        plain: m.data().iter().map(|&v| v as u8).collect(),
        cipher_monobit_p: metrics::monobit_p(&blockcipher::binarize(&low)),
        cipher: low,
        decrypted_ok: back.original() == m,
        scalability_factor: scal.factor,
    })
}
