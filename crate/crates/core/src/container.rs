//! Ciphertext container.
//!
//! Layout, all little-endian:
//!
//! | offset | size | field                         |
//! |--------|------|-------------------------------|
//! | 0      | 4    | magic `PHK1`                  |
//! | 4      | 4    | rows (u32, padded, even)      |
//! | 8      | 4    | cols (u32, padded, even)      |
//! | 12     | 1    | pad_rows (0 or 1)             |
//! | 13     | 1    | pad_cols (0 or 1)             |
//! | 14     | 8·n  | row-major i64 entries         |

use thiserror::Error;

use crate::blockcipher::{CipherError, Matrix, MessageMatrix};

pub const MAGIC: &[u8; 4] = b"PHK1";
pub const HEADER_LEN: usize = 14;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ContainerError {
    #[error("byte 0: bad magic, expected PHK1")]
    BadMagic,
    #[error("byte {offset}: container truncated, need {needed} bytes, have {have}")]
    Truncated { offset: usize, needed: usize, have: usize },
    #[error("byte {offset}: {extra} unexpected bytes after entries")]
    TrailingData { offset: usize, extra: usize },
    #[error("matrix dimension {0} does not fit in u32")]
    TooLarge(usize),
    #[error(transparent)]
    Layout(#[from] CipherError),
}

pub fn encode(m: &MessageMatrix) -> Result<Vec<u8>, ContainerError> {
    let rows = u32::try_from(m.rows()).map_err(|_| ContainerError::TooLarge(m.rows()))?;
    let cols = u32::try_from(m.cols()).map_err(|_| ContainerError::TooLarge(m.cols()))?;
    let mut out = Vec::with_capacity(HEADER_LEN + 8 * m.padded().data().len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&rows.to_le_bytes());
    out.extend_from_slice(&cols.to_le_bytes());
    out.push(m.pad_rows());
    out.push(m.pad_cols());
    for v in m.padded().data() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    Ok(out)
}

pub fn decode(bytes: &[u8]) -> Result<MessageMatrix, ContainerError> {
    if bytes.len() < HEADER_LEN {
        if bytes.len() >= 4 && &bytes[..4] != MAGIC {
            return Err(ContainerError::BadMagic);
        }
        return Err(ContainerError::Truncated {
            offset: bytes.len(),
            needed: HEADER_LEN,
            have: bytes.len(),
        });
    }
    if &bytes[..4] != MAGIC {
        return Err(ContainerError::BadMagic);
    }
    let word = |at: usize| u32::from_le_bytes(bytes[at..at + 4].try_into().expect("4 bytes")) as usize;
    let rows = word(4);
    let cols = word(8);
    let (pad_rows, pad_cols) = (bytes[12], bytes[13]);
    let needed = rows
        .checked_mul(cols)
        .and_then(|n| n.checked_mul(8))
        .and_then(|n| n.checked_add(HEADER_LEN))
        .ok_or(ContainerError::TooLarge(rows.max(cols)))?;
    if bytes.len() < needed {
        return Err(ContainerError::Truncated {
            offset: bytes.len(),
            needed,
            have: bytes.len(),
        });
    }
    if bytes.len() > needed {
        return Err(ContainerError::TrailingData {
            offset: needed,
            extra: bytes.len() - needed,
        });
    }
    let data = bytes[HEADER_LEN..]
        .chunks_exact(8)
        .map(|c| i64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    let padded = Matrix::new(rows, cols, data)?;
    Ok(MessageMatrix::from_padded(padded, pad_rows, pad_cols)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn header_layout() {
        let m = MessageMatrix::new(Matrix::new(1, 3, vec![1, -2, 3]).unwrap());
        let b = encode(&m).unwrap();
        assert_eq!(&b[..4], b"PHK1");
        assert_eq!(&b[4..8], &2u32.to_le_bytes());
        assert_eq!(&b[8..12], &4u32.to_le_bytes());
        assert_eq!((b[12], b[13]), (1, 1));
        assert_eq!(b.len(), HEADER_LEN + 8 * 8);
        assert_eq!(&b[22..30], &(-2i64).to_le_bytes());
        assert_eq!(decode(&b).unwrap(), m);
    }

    #[test]
    fn decode_errors() {
        assert_eq!(decode(b"NOPE0000000000"), Err(ContainerError::BadMagic));
        assert!(matches!(decode(b"PHK1"), Err(ContainerError::Truncated { .. })));
        let m = MessageMatrix::new(Matrix::new(2, 2, vec![1, 2, 3, 4]).unwrap());
        let mut b = encode(&m).unwrap();
        b.push(0);
        assert_eq!(decode(&b), Err(ContainerError::TrailingData { offset: 46, extra: 1 }));
        b.truncate(40);
        assert!(matches!(decode(&b), Err(ContainerError::Truncated { needed: 46, have: 40, .. })));
        let mut odd = encode(&m).unwrap();
        odd[4] = 3;
        odd.extend_from_slice(&[0; 16]);
        assert!(matches!(decode(&odd), Err(ContainerError::Layout(_))));
    }

    proptest! {
        #[test]
        fn roundtrip(rows in 1usize..12, cols in 1usize..12, vals in proptest::collection::vec(any::<i64>(), 144)) {
            let m = MessageMatrix::new(Matrix::new(rows, cols, vals[..rows * cols].to_vec()).unwrap());
            prop_assert_eq!(decode(&encode(&m).unwrap()).unwrap(), m);
        }
    }
}
