//! End-to-end run: key exchange, the two gates, encryption, decryption and
//! the scalability factor, in that order.

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::blockcipher::{self, CipherError, MessageMatrix, MAX_K2};
use crate::container::{self, ContainerError};
use crate::keyexchange::{self, KeyExchangeError, SecretExponent};
use crate::metrics::{self, MetricsError};
use crate::pgm::{self, PgmError};

/// The `k1` value printed in the reference transcript. Its role is never
/// stated, so it is echoed verbatim and not derived from anything.
pub const UNEXPLAINED_K1: u64 = 21428;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("wrong common key")]
    WrongCommonKey,
    #[error("wrong encryption key")]
    WrongEncryptionKey,
    #[error("encryption key k2 = {0} is unusable (must be in [1, {MAX_K2}]); pass k2 explicitly")]
    UnusableK2(BigUint),
    #[error(transparent)]
    KeyExchange(#[from] KeyExchangeError),
    #[error(transparent)]
    Cipher(#[from] CipherError),
    #[error(transparent)]
    Image(#[from] PgmError),
    #[error(transparent)]
    Container(#[from] ContainerError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
}

impl PipelineError {
    /// 2 and 3 for the gates, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::WrongCommonKey => 2,
            PipelineError::WrongEncryptionKey => 3,
            _ => 1,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub modulus: BigUint,
    pub generator: BigUint,
    pub secret_a: SecretExponent,
    pub secret_b: SecretExponent,
    /// Common secret typed in at the first gate; defaults to Bob's key.
    pub entered_common_key: Option<BigUint>,
    /// Encryption key; defaults to the shared key.
    pub k2: Option<BigUint>,
    /// Encryption key typed in at the second gate; defaults to `k2`.
    pub entered_k2: Option<BigUint>,
    /// Treat the input as raw bytes instead of a PGM image.
    pub raw: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UnexplainedValue {
    pub k1: u64,
}

/// Big integers are decimal strings so JSON consumers never lose precision.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PipelineReport {
    pub n: String,
    pub g: String,
    pub prime_checked: bool,
    pub share_a: String,
    pub share_b: String,
    pub shared_key: String,
    pub common_key_ok: bool,
    pub encryption_key_ok: bool,
    pub k2: u64,
    pub message_bits: u64,
    pub compressed_runs: u64,
    pub block_count: u64,
    pub scalability_factor: f64,
    pub input_sha256: String,
    pub ciphertext_sha256: String,
    pub decrypted_sha256: String,
    /// Decrypted file is byte-identical to the input. Inputs whose PGM header
    /// is not canonical (comments, extra whitespace) come back with the
    /// canonical header, so this is false for them even when the pixels match.
    pub roundtrip_ok: bool,
    pub message_roundtrip_ok: bool,
    pub unexplained_paper_value: UnexplainedValue,
}

#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub report: PipelineReport,
    pub ciphertext: Vec<u8>,
    pub decrypted: Vec<u8>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn read_message(input: &[u8], raw: bool) -> Result<MessageMatrix, PgmError> {
    let m = if raw { pgm::bytes_to_matrix(input)? } else { pgm::parse_pgm(input)? };
    Ok(MessageMatrix::new(m))
}

pub fn write_message(m: &MessageMatrix, raw: bool) -> Result<Vec<u8>, PgmError> {
    let original = m.original();
    if raw {
        pgm::matrix_to_bytes(&original)
    } else {
        pgm::write_pgm(&original)
    }
}

/// Parses a plaintext file and returns its ciphertext container.
pub fn encrypt_file(input: &[u8], raw: bool, k2: i128) -> Result<Vec<u8>, PipelineError> {
    let key = blockcipher::key_matrix(k2)?;
    let plain = read_message(input, raw)?;
    let cipher = blockcipher::encrypt_matrix(&plain, &key)?;
    Ok(container::encode(&cipher)?)
}

/// Decrypts a container, passing the result through the float round-off stage
/// before re-encoding it as PGM or raw bytes.
pub fn decrypt_file(ciphertext: &[u8], raw: bool, k2: i128) -> Result<Vec<u8>, PipelineError> {
    let key = blockcipher::key_matrix(k2)?;
    let cipher = container::decode(ciphertext)?;
    let plain = blockcipher::decrypt_matrix(&cipher, &key)?;
    let floats: Vec<f64> = plain.padded().data().iter().map(|&v| v as f64).collect();
    let rounded = blockcipher::round_off(plain.rows(), plain.cols(), &floats)?;
    let plain = MessageMatrix::from_padded(rounded, plain.pad_rows(), plain.pad_cols())?;
    Ok(write_message(&plain, raw)?)
}

/// Runs every stage in order. Transcript lines are appended to `transcript`
/// as they happen, so a failing run still shows how far it got.
pub fn run_pipeline(
    cfg: &PipelineConfig,
    input: &[u8],
    transcript: &mut Vec<String>,
) -> Result<PipelineOutput, PipelineError> {
    let params = keyexchange::make_params(cfg.modulus.clone(), cfg.generator.clone())?;
    transcript.push(format!("N ={}", params.modulus()));
    transcript.push(format!("alpha1 ={}", cfg.secret_a.value()));
    transcript.push(format!("beta1 ={}", cfg.secret_b.value()));
    transcript.push(format!("k1 ={UNEXPLAINED_K1}"));

    let share_a = keyexchange::public_share(&params, &cfg.secret_a);
    let share_b = keyexchange::public_share(&params, &cfg.secret_b);
    let cmk1 = keyexchange::shared_key(&params, &share_b, &cfg.secret_a)?;
    transcript.push(format!("enter the beta value(beta2):{}", cfg.secret_b.value()));
    transcript.push(format!("beta2 ={}", cfg.secret_b.value()));
    let cmk2 = keyexchange::shared_key(&params, &share_a, &cfg.secret_b)?;
    transcript.push(format!("cmk2 ={}", cmk2.value()));

    let entered = cfg.entered_common_key.clone().unwrap_or_else(|| cmk2.value().clone());
    transcript.push(format!("enter the common secret value:{entered}"));
    transcript.push(format!("cmk3 = {entered}"));
    if !keyexchange::verify_common(&cmk1, &entered) {
        transcript.push("wrong common key".into());
        return Err(PipelineError::WrongCommonKey);
    }
    transcript.push("correct common key".into());

    let k2_big = cfg.k2.clone().unwrap_or_else(|| cmk1.value().clone());
    let k2 = k2_big
        .to_u64()
        .filter(|k| (1..=MAX_K2).contains(k))
        .ok_or_else(|| PipelineError::UnusableK2(k2_big.clone()))?;
    let token = keyexchange::issue_token(&k2_big, &cmk1)?;
    let entered_k2 = cfg.entered_k2.clone().unwrap_or_else(|| k2_big.clone());
    transcript.push(format!("enter encryption key(k2):{entered_k2}"));
    transcript.push(format!("k2 ={entered_k2}"));
    if !keyexchange::verify_encryption_key(&entered_k2, &token, &cmk2) {
        transcript.push("wrong encryption key".into());
        return Err(PipelineError::WrongEncryptionKey);
    }
    transcript.push("Correct encryption key".into());

    let plain = read_message(input, cfg.raw)?;
    let bits = blockcipher::binarize(input);
    let compressed = blockcipher::compress(&bits);
    debug_assert_eq!(blockcipher::decompress(&compressed), bits);

    let ciphertext = encrypt_file(input, cfg.raw, k2 as i128)?;
    let cipher_matrix = container::decode(&ciphertext)?;
    let decrypted = decrypt_file(&ciphertext, cfg.raw, k2 as i128)?;
    let scal = metrics::scalability_factor(&plain, &cipher_matrix)?;
    transcript.push(format!("The scalability factor is {:.4}", scal.factor));

    let report = PipelineReport {
        n: params.modulus().to_string(),
        g: params.generator().to_string(),
        prime_checked: params.prime_checked(),
        share_a: share_a.value().to_string(),
        share_b: share_b.value().to_string(),
        shared_key: cmk1.value().to_string(),
        common_key_ok: true,
        encryption_key_ok: true,
        k2,
        message_bits: compressed.original_bit_count,
        compressed_runs: compressed.runs.len() as u64,
        block_count: scal.block_count,
        scalability_factor: scal.factor,
        input_sha256: sha256_hex(input),
        ciphertext_sha256: sha256_hex(&ciphertext),
        decrypted_sha256: sha256_hex(&decrypted),
        roundtrip_ok: decrypted == input,
        message_roundtrip_ok: read_message(&decrypted, cfg.raw)? == plain,
        unexplained_paper_value: UnexplainedValue { k1: UNEXPLAINED_K1 },
    };
    Ok(PipelineOutput {
        report,
        ciphertext,
        decrypted,
    })
}
