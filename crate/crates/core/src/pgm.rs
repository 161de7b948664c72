//! Binary 8-bit grayscale PGM (P5) and raw-byte message I/O.

use thiserror::Error;

use crate::blockcipher::Matrix;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PgmError {
    #[error("byte {offset}: {message}")]
    Malformed { offset: usize, message: String },
    #[error("byte {offset}: maxval must be 255, got {maxval}")]
    UnsupportedMaxval { offset: usize, maxval: u64 },
    #[error("byte {offset}: expected {expected} pixel bytes, found {found}")]
    Truncated { offset: usize, expected: usize, found: usize },
    #[error("byte {offset}: {extra} unexpected bytes after pixel data")]
    TrailingData { offset: usize, extra: usize },
    #[error("value {value} at index {index} does not fit in a byte")]
    OutOfRange { index: usize, value: i64 },
    #[error("image must have nonzero width and height")]
    Empty,
}

fn malformed(offset: usize, message: impl Into<String>) -> PgmError {
    PgmError::Malformed {
        offset,
        message: message.into(),
    }
}

struct Header<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Header<'_> {
    fn skip_whitespace_and_comments(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b == b'#' {
                while self.bytes.get(self.pos).is_some_and(|&c| c != b'\n' && c != b'\r') {
                    self.pos += 1;
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn number(&mut self, what: &str) -> Result<u64, PgmError> {
        self.skip_whitespace_and_comments();
        let start = self.pos;
        while self.bytes.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(malformed(start, format!("expected {what}")));
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| malformed(start, format!("{what} is too large")))
    }
}

/// Parses a P5 image with maxval 255. Header comments are skipped; data after
/// the last pixel is rejected.
pub fn parse_pgm(bytes: &[u8]) -> Result<Matrix, PgmError> {
    if bytes.len() < 2 || &bytes[..2] != b"P5" {
        return Err(malformed(0, "missing P5 magic"));
    }
    let mut h = Header { bytes, pos: 2 };
    if !h.bytes.get(2).is_some_and(|b| b.is_ascii_whitespace() || *b == b'#') {
        return Err(malformed(2, "expected whitespace after magic"));
    }
    let width = h.number("width")?;
    let height = h.number("height")?;
    let maxval_at = h.pos;
    let maxval = h.number("maxval")?;
    if maxval != 255 {
        return Err(PgmError::UnsupportedMaxval {
            offset: maxval_at,
            maxval,
        });
    }
    match bytes.get(h.pos) {
        Some(b) if b.is_ascii_whitespace() => h.pos += 1,
        _ => return Err(malformed(h.pos, "expected single whitespace after maxval")),
    }
    if width == 0 || height == 0 {
        return Err(PgmError::Empty);
    }
    let expected = usize::try_from(width)
        .ok()
        .zip(usize::try_from(height).ok())
        .and_then(|(w, hgt)| w.checked_mul(hgt))
        .ok_or_else(|| malformed(0, "image dimensions overflow"))?;
    let payload = &bytes[h.pos..];
    if payload.len() < expected {
        return Err(PgmError::Truncated {
            offset: bytes.len(),
            expected,
            found: payload.len(),
        });
    }
    if payload.len() > expected {
        return Err(PgmError::TrailingData {
            offset: h.pos + expected,
            extra: payload.len() - expected,
        });
    }
    let data = payload.iter().map(|&b| b as i64).collect();
    Ok(Matrix::new(height as usize, width as usize, data).expect("dimensions checked"))
}

fn to_bytes(m: &Matrix) -> Result<Vec<u8>, PgmError> {
    m.data()
        .iter()
        .enumerate()
        .map(|(index, &value)| u8::try_from(value).map_err(|_| PgmError::OutOfRange { index, value }))
        .collect()
}

/// Canonical P5 encoding: `P5\n<w> <h>\n255\n` followed by the pixels.
pub fn write_pgm(m: &Matrix) -> Result<Vec<u8>, PgmError> {
    if m.rows() == 0 || m.cols() == 0 {
        return Err(PgmError::Empty);
    }
    let pixels = to_bytes(m)?;
    let mut out = format!("P5\n{} {}\n255\n", m.cols(), m.rows()).into_bytes();
    out.extend_from_slice(&pixels);
    Ok(out)
}

/// Lays raw bytes out as a single-row matrix.
pub fn bytes_to_matrix(bytes: &[u8]) -> Result<Matrix, PgmError> {
    if bytes.is_empty() {
        return Err(PgmError::Empty);
    }
    Ok(Matrix::new(1, bytes.len(), bytes.iter().map(|&b| b as i64).collect()).expect("one row"))
}

pub fn matrix_to_bytes(m: &Matrix) -> Result<Vec<u8>, PgmError> {
    to_bytes(m)
}
