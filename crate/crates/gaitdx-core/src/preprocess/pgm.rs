//! Binary PGM (P5, maxval 255) encoding for grayscale images.

use std::fs;
use std::io::Write;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PgmError {
    #[error("not a binary PGM: expected magic P5, got {0:?}")]
    BadMagic(String),
    #[error("malformed PGM header: {0}")]
    BadHeader(String),
    #[error("unsupported maxval {0}, only 255 is supported")]
    UnsupportedMaxval(u32),
    #[error("pixel data truncated: expected {expected} bytes, got {got}")]
    Truncated { expected: usize, got: usize },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// Encodes `side x side` (or generally `height x width`) pixels, row-major.
pub fn encode(pixels: &[u8], width: usize, height: usize) -> Vec<u8> {
    assert_eq!(pixels.len(), width * height, "pixel buffer size mismatch");
    let mut out = format!("P5\n{width} {height}\n255\n").into_bytes();
    out.extend_from_slice(pixels);
    out
}

pub fn write_file(
    path: impl AsRef<Path>,
    pixels: &[u8],
    width: usize,
    height: usize,
) -> Result<(), PgmError> {
    let bytes = encode(pixels, width, height);
    let mut file = fs::File::create(path)?;
    file.write_all(&bytes)?;
    Ok(())
}

/// Decodes a binary PGM produced by [`encode`]. Comments are accepted in the
/// header for compatibility with external tools.
pub fn decode(bytes: &[u8]) -> Result<(Vec<u8>, usize, usize), PgmError> {
    if bytes.len() < 2 || &bytes[..2] != b"P5" {
        let found = String::from_utf8_lossy(&bytes[..bytes.len().min(2)]).into_owned();
        return Err(PgmError::BadMagic(found));
    }
    let mut pos = 2;
    let mut fields = Vec::with_capacity(3);
    while fields.len() < 3 {
        // Skip whitespace and `#` comments.
        while pos < bytes.len() {
            if bytes[pos].is_ascii_whitespace() {
                pos += 1;
            } else if bytes[pos] == b'#' {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
            } else {
                break;
            }
        }
        let start = pos;
        while pos < bytes.len() && bytes[pos].is_ascii_digit() {
            pos += 1;
        }
        if start == pos {
            return Err(PgmError::BadHeader("missing numeric field".into()));
        }
        let text = std::str::from_utf8(&bytes[start..pos])
            .map_err(|_| PgmError::BadHeader("non-ascii field".into()))?;
        fields.push(
            text.parse::<u32>()
                .map_err(|_| PgmError::BadHeader(format!("bad number {text:?}")))?,
        );
    }
    let (width, height, maxval) = (fields[0] as usize, fields[1] as usize, fields[2]);
    if maxval != 255 {
        return Err(PgmError::UnsupportedMaxval(maxval));
    }
    // Exactly one whitespace byte separates the header from the raster.
    if pos >= bytes.len() || !bytes[pos].is_ascii_whitespace() {
        return Err(PgmError::BadHeader("missing raster separator".into()));
    }
    pos += 1;
    let expected = width * height;
    let raster = &bytes[pos..];
    if raster.len() < expected {
        return Err(PgmError::Truncated { expected, got: raster.len() });
    }
    Ok((raster[..expected].to_vec(), width, height))
}

pub fn read_file(path: impl AsRef<Path>) -> Result<(Vec<u8>, usize, usize), PgmError> {
    let bytes = fs::read(path)?;
    decode(&bytes)
}
