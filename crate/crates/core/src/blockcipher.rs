//! Hill-style block-matrix cipher over 2×2 integer tiles.
//!
//! A message is laid out as an integer matrix, zero-padded to even
//! dimensions, cut into row-major 2×2 tiles, and each tile `P` is encrypted as
//! `P · Mk2` with the unimodular key `Mk2 = [[1, 1], [k2, k2 + 1]]`. Because
//! `det(Mk2) = 1` the inverse `[[k2 + 1, -1], [-k2, 1]]` is integral and
//! decryption `C · Mk2⁻¹` is exact.

#[cfg(feature = "parallel")]
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A single bit, stored as `0` or `1`.
pub type Bit = u8;

/// A 2×2 integer tile, `[row][col]`.
pub type Block = [[i64; 2]; 2];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CipherError {
    #[error("encryption key k2 must be in [1, {max}], got {got}")]
    InvalidKey { got: i128, max: u64 },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("integer overflow while multiplying blocks")]
    Overflow,
    #[error("non-finite value at index {0}")]
    NonFinite(usize),
}

/// Dense row-major integer matrix.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<i64>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<i64>) -> Result<Self, CipherError> {
        if rows.checked_mul(cols) != Some(data.len()) {
            return Err(CipherError::Dimension(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows.saturating_mul(cols),
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn from_rows(rows: &[Vec<i64>]) -> Result<Self, CipherError> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(CipherError::Dimension("ragged rows".into()));
        }
        Self::new(rows.len(), cols, rows.concat())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[i64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<i64> {
        self.data
    }

    pub fn get(&self, row: usize, col: usize) -> i64 {
        self.data[row * self.cols + col]
    }

    fn set(&mut self, row: usize, col: usize, value: i64) {
        self.data[row * self.cols + col] = value;
    }
}

/// A matrix padded to even dimensions, remembering how much padding was added.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MessageMatrix {
    padded: Matrix,
    pad_rows: u8,
    pad_cols: u8,
}

impl MessageMatrix {
    /// Zero-pads `m` by at most one row and one column so both dimensions are even.
    pub fn new(m: Matrix) -> Self {
        let pad_rows = (m.rows % 2) as u8;
        let pad_cols = (m.cols % 2) as u8;
        if pad_rows == 0 && pad_cols == 0 {
            return Self {
                padded: m,
                pad_rows,
                pad_cols,
            };
        }
        let rows = m.rows + pad_rows as usize;
        let cols = m.cols + pad_cols as usize;
        let mut padded = Matrix::zeros(rows, cols);
        for r in 0..m.rows {
            padded.data[r * cols..r * cols + m.cols].copy_from_slice(&m.data[r * m.cols..(r + 1) * m.cols]);
        }
        Self {
            padded,
            pad_rows,
            pad_cols,
        }
    }

    /// Reassembles a matrix that is already padded, e.g. a ciphertext.
    pub fn from_padded(padded: Matrix, pad_rows: u8, pad_cols: u8) -> Result<Self, CipherError> {
        if !padded.rows.is_multiple_of(2) || !padded.cols.is_multiple_of(2) {
            return Err(CipherError::Dimension(format!(
                "padded dimensions {}x{} must be even",
                padded.rows, padded.cols
            )));
        }
        if pad_rows > 1 || pad_cols > 1 {
            return Err(CipherError::Dimension(format!("padding ({pad_rows}, {pad_cols}) exceeds one")));
        }
        if (pad_rows as usize > padded.rows) || (pad_cols as usize > padded.cols) {
            return Err(CipherError::Dimension("padding exceeds matrix".into()));
        }
        Ok(Self {
            padded,
            pad_rows,
            pad_cols,
        })
    }

    pub fn rows(&self) -> usize {
        self.padded.rows
    }

    pub fn cols(&self) -> usize {
        self.padded.cols
    }

    pub fn pad_rows(&self) -> u8 {
        self.pad_rows
    }

    pub fn pad_cols(&self) -> u8 {
        self.pad_cols
    }

    pub fn padded(&self) -> &Matrix {
        &self.padded
    }

    /// The matrix with padding stripped.
    pub fn original(&self) -> Matrix {
        let rows = self.padded.rows - self.pad_rows as usize;
        let cols = self.padded.cols - self.pad_cols as usize;
        if rows == self.padded.rows && cols == self.padded.cols {
            return self.padded.clone();
        }
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            let start = r * self.padded.cols;
            data.extend_from_slice(&self.padded.data[start..start + cols]);
        }
        Matrix { rows, cols, data }
    }
}

/// Row-major plaintext tiles.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockSet {
    pub blocks: Vec<Block>,
}

impl BlockSet {
    pub fn count(&self) -> usize {
        self.blocks.len()
    }
}

/// Row-major ciphertext tiles, same order and count as the plaintext.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CipherBlockSet {
    pub blocks: Vec<Block>,
}

impl CipherBlockSet {
    pub fn count(&self) -> usize {
        self.blocks.len()
    }
}

/// Largest accepted `k2`; keeps `k2 + 1` representable as `i64`.
pub const MAX_K2: u64 = i64::MAX as u64 - 1;

/// `Mk2 = [[1, 1], [k2, k2 + 1]]` and its integer inverse.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CipherKeyMatrix {
    k2: u64,
    entries: Block,
    inverse: Block,
}

impl CipherKeyMatrix {
    pub fn k2(&self) -> u64 {
        self.k2
    }

    pub fn entries(&self) -> Block {
        self.entries
    }

    pub fn inverse_entries(&self) -> Block {
        self.inverse
    }

    pub fn determinant(&self) -> i128 {
        let m = self.entries;
        m[0][0] as i128 * m[1][1] as i128 - m[0][1] as i128 * m[1][0] as i128
    }
}

pub fn key_matrix(k2: i128) -> Result<CipherKeyMatrix, CipherError> {
    if k2 < 1 || k2 > MAX_K2 as i128 {
        return Err(CipherError::InvalidKey { got: k2, max: MAX_K2 });
    }
    let k = k2 as i64;
    Ok(CipherKeyMatrix {
        k2: k2 as u64,
        entries: [[1, 1], [k, k + 1]],
        inverse: [[k + 1, -1], [-k, 1]],
    })
}

/// Exact 2×2 product `a · b`.
pub fn mul_block(a: &Block, b: &Block) -> Result<Block, CipherError> {
    let mut out = [[0i64; 2]; 2];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            let v = a[i][0] as i128 * b[0][j] as i128 + a[i][1] as i128 * b[1][j] as i128;
            *cell = i64::try_from(v).map_err(|_| CipherError::Overflow)?;
        }
    }
    Ok(out)
}

/// Expands each byte to 8 bits, most significant first.
pub fn binarize(bytes: &[u8]) -> Vec<Bit> {
    bytes
        .iter()
        .flat_map(|&b| (0..8).rev().map(move |i| (b >> i) & 1))
        .collect()
}

/// Packs bits MSB-first back into bytes; a trailing partial byte is zero-filled.
pub fn pack_bits(bits: &[Bit]) -> Vec<u8> {
    bits.chunks(8)
        .map(|c| c.iter().enumerate().fold(0u8, |acc, (i, &b)| acc | ((b & 1) << (7 - i))))
        .collect()
}

/// Run-length encoded bit sequence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompressedBits {
    pub runs: Vec<(Bit, u64)>,
    pub original_bit_count: u64,
}

pub fn compress(bits: &[Bit]) -> CompressedBits {
    let mut runs: Vec<(Bit, u64)> = Vec::new();
    for &b in bits {
        let b = b & 1;
        match runs.last_mut() {
            Some((bit, len)) if *bit == b => *len += 1,
            _ => runs.push((b, 1)),
        }
    }
    CompressedBits {
        runs,
        original_bit_count: bits.len() as u64,
    }
}

pub fn decompress(c: &CompressedBits) -> Vec<Bit> {
    let mut out = Vec::with_capacity(c.original_bit_count as usize);
    for &(bit, len) in &c.runs {
        out.extend(std::iter::repeat_n(bit, len as usize));
    }
    out
}

/// Cuts a padded matrix into row-major 2×2 tiles.
pub fn to_block_matrix(m: &MessageMatrix) -> BlockSet {
    let p = &m.padded;
    let mut blocks = Vec::with_capacity(p.rows * p.cols / 4);
    for r in (0..p.rows).step_by(2) {
        for c in (0..p.cols).step_by(2) {
            blocks.push([[p.get(r, c), p.get(r, c + 1)], [p.get(r + 1, c), p.get(r + 1, c + 1)]]);
        }
    }
    BlockSet { blocks }
}

/// Inverse of [`to_block_matrix`]. `rows` and `cols` are the padded dimensions.
pub fn from_block_matrix(
    blocks: &[Block],
    rows: usize,
    cols: usize,
    pad_rows: u8,
    pad_cols: u8,
) -> Result<MessageMatrix, CipherError> {
    if !rows.is_multiple_of(2) || !cols.is_multiple_of(2) {
        return Err(CipherError::Dimension(format!("{rows}x{cols} is not even")));
    }
    let expected = rows * cols / 4;
    if blocks.len() != expected {
        return Err(CipherError::Dimension(format!(
            "{rows}x{cols} needs {expected} blocks, got {}",
            blocks.len()
        )));
    }
    let mut m = Matrix::zeros(rows, cols);
    let tiles_per_row = cols / 2;
    for (z, b) in blocks.iter().enumerate() {
        let r = (z / tiles_per_row) * 2;
        let c = (z % tiles_per_row) * 2;
        m.set(r, c, b[0][0]);
        m.set(r, c + 1, b[0][1]);
        m.set(r + 1, c, b[1][0]);
        m.set(r + 1, c + 1, b[1][1]);
    }
    MessageMatrix::from_padded(m, pad_rows, pad_cols)
}

fn map_blocks(blocks: &[Block], key: &Block) -> Result<Vec<Block>, CipherError> {
    #[cfg(feature = "parallel")]
    let out = blocks.par_iter().map(|b| mul_block(b, key)).collect();
    #[cfg(not(feature = "parallel"))]
    let out = blocks.iter().map(|b| mul_block(b, key)).collect();
    out
}

/// `C_z = P_z · Mk2` for every tile.
pub fn encrypt_blocks(p: &BlockSet, key: &CipherKeyMatrix) -> Result<CipherBlockSet, CipherError> {
    Ok(CipherBlockSet {
        blocks: map_blocks(&p.blocks, &key.entries)?,
    })
}

/// `P_z = C_z · Mk2⁻¹` for every tile.
pub fn decrypt_blocks(c: &CipherBlockSet, key: &CipherKeyMatrix) -> Result<BlockSet, CipherError> {
    Ok(BlockSet {
        blocks: map_blocks(&c.blocks, &key.inverse)?,
    })
}

/// Encrypts a whole padded matrix; the result keeps the plaintext's padding record.
pub fn encrypt_matrix(m: &MessageMatrix, key: &CipherKeyMatrix) -> Result<MessageMatrix, CipherError> {
    let c = encrypt_blocks(&to_block_matrix(m), key)?;
    from_block_matrix(&c.blocks, m.rows(), m.cols(), m.pad_rows, m.pad_cols)
}

pub fn decrypt_matrix(c: &MessageMatrix, key: &CipherKeyMatrix) -> Result<MessageMatrix, CipherError> {
    let blocks = CipherBlockSet {
        blocks: to_block_matrix(c).blocks,
    };
    let p = decrypt_blocks(&blocks, key)?;
    from_block_matrix(&p.blocks, c.rows(), c.cols(), c.pad_rows, c.pad_cols)
}

/// Nearest-integer rounding with ties away from zero.
pub fn round_off(rows: usize, cols: usize, values: &[f64]) -> Result<Matrix, CipherError> {
    let data = values
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let r = v.round();
            if !r.is_finite() || r < i64::MIN as f64 || r >= i64::MAX as f64 {
                Err(CipherError::NonFinite(i))
            } else {
                Ok(r as i64)
            }
        })
        .collect::<Result<Vec<_>, _>>()?;
    Matrix::new(rows, cols, data)
}
