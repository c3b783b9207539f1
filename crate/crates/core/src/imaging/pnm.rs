//! Binary netpbm I/O: P5 (grayscale) and P6 (RGB), 8-bit samples only.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use thiserror::Error;

use super::{GrayImage, ImagingError, RgbImage};

#[derive(Debug, Error)]
pub enum PnmError {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("unsupported magic number {0:?} (expected P5 or P6)")]
    Magic(String),
    #[error("malformed header: {0}")]
    Header(&'static str),
    #[error("unsupported maxval {0} (only 1..=255)")]
    MaxVal(u32),
    #[error("truncated pixel data: expected {expected} bytes, found {found}")]
    Truncated { expected: usize, found: usize },
    #[error(transparent)]
    Image(#[from] ImagingError),
}

/// Decoded netpbm payload.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Pnm {
    Gray(GrayImage),
    Rgb(RgbImage),
}

impl Pnm {
    /// Any payload as RGB; grayscale is replicated into all three channels.
    pub fn into_rgb(self) -> RgbImage {
        match self {
            Pnm::Rgb(img) => img,
            Pnm::Gray(g) => {
                let (w, h) = (g.width(), g.height());
                let data = g.into_raw().into_iter().flat_map(|v| [v, v, v]).collect();
                RgbImage::new(w, h, data).expect("same dimensions")
            }
        }
    }
}

struct Header<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Header<'a> {
    fn skip_space_and_comments(&mut self) {
        while self.pos < self.bytes.len() {
            let c = self.bytes[self.pos];
            if c == b'#' {
                while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                    self.pos += 1;
                }
            } else if c.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn number(&mut self, what: &'static str) -> Result<u32, PnmError> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(PnmError::Header(what));
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or(PnmError::Header(what))
    }
}

pub fn decode(bytes: &[u8]) -> Result<Pnm, PnmError> {
    if bytes.len() < 2 {
        return Err(PnmError::Header("missing magic number"));
    }
    let magic = &bytes[..2];
    let channels = match magic {
        b"P5" => 1,
        b"P6" => 3,
        _ => return Err(PnmError::Magic(String::from_utf8_lossy(magic).into_owned())),
    };
    let mut hdr = Header { bytes, pos: 2 };
    let width = hdr.number("width")? as usize;
    let height = hdr.number("height")? as usize;
    let maxval = hdr.number("maxval")?;
    if maxval == 0 || maxval > 255 {
        return Err(PnmError::MaxVal(maxval));
    }
    // Exactly one whitespace byte separates the header from the raster.
    match bytes.get(hdr.pos) {
        Some(c) if c.is_ascii_whitespace() => hdr.pos += 1,
        _ => return Err(PnmError::Header("missing separator after maxval")),
    }
    let expected = width * height * channels;
    let raster = &bytes[hdr.pos..];
    if raster.len() < expected {
        return Err(PnmError::Truncated {
            expected,
            found: raster.len(),
        });
    }
    let mut data = raster[..expected].to_vec();
    if maxval != 255 {
        for v in &mut data {
            *v = ((*v as u32 * 255 + maxval / 2) / maxval).min(255) as u8;
        }
    }
    Ok(match channels {
        1 => Pnm::Gray(GrayImage::new(width, height, data)?),
        _ => Pnm::Rgb(RgbImage::new(width, height, data)?),
    })
}

pub fn encode_gray(img: &GrayImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.extend_from_slice(img.data());
    out
}

pub fn encode_rgb(img: &RgbImage) -> Vec<u8> {
    let mut out = format!("P6\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.extend_from_slice(img.data());
    out
}

pub fn read(path: impl AsRef<Path>) -> Result<Pnm, PnmError> {
    decode(&fs::read(path)?)
}

pub fn read_rgb(path: impl AsRef<Path>) -> Result<RgbImage, PnmError> {
    read(path).map(Pnm::into_rgb)
}

pub fn write_rgb(path: impl AsRef<Path>, img: &RgbImage) -> Result<(), PnmError> {
    let mut f = fs::File::create(path)?;
    f.write_all(&encode_rgb(img))?;
    Ok(())
}

pub fn write_gray(path: impl AsRef<Path>, img: &GrayImage) -> Result<(), PnmError> {
    let mut f = fs::File::create(path)?;
    f.write_all(&encode_gray(img))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_header_with_comments() {
        let mut bytes = b"P5\n# made by hand\n3 # width\n2\n255\n".to_vec();
        bytes.extend_from_slice(&[1, 2, 3, 4, 5, 6]);
        match decode(&bytes).unwrap() {
            Pnm::Gray(g) => {
                assert_eq!((g.width(), g.height()), (3, 2));
                assert_eq!(g.data(), &[1, 2, 3, 4, 5, 6]);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_truncated_and_unknown() {
        let mut bytes = b"P6\n2 2\n255\n".to_vec();
        bytes.extend_from_slice(&[0; 11]);
        assert!(matches!(
            decode(&bytes),
            Err(PnmError::Truncated {
                expected: 12,
                found: 11
            })
        ));
        assert!(matches!(decode(b"P3\n1 1\n255\n0 0 0"), Err(PnmError::Magic(_))));
        assert!(matches!(decode(b"P6\n1 1\n65535\n"), Err(PnmError::MaxVal(65535))));
        assert!(matches!(decode(b"P6\n1"), Err(PnmError::Header(_))));
        assert!(decode(b"").is_err());
    }

    #[test]
    fn gray_expands_to_rgb() {
        let g = GrayImage::new(1, 1, vec![9]).unwrap();
        assert_eq!(Pnm::Gray(g).into_rgb().data(), &[9, 9, 9]);
    }

    proptest! {
        #[test]
        fn rgb_roundtrip_is_bit_exact(w in 1usize..9, h in 1usize..9, seed in any::<u64>()) {
            let data: Vec<u8> = (0..w * h * 3)
                .map(|i| (seed.wrapping_add(i as u64).wrapping_mul(6364136223846793005) >> 56) as u8)
                .collect();
            let img = RgbImage::new(w, h, data).unwrap();
            let back = decode(&encode_rgb(&img)).unwrap();
            prop_assert_eq!(back, Pnm::Rgb(img));
        }

        #[test]
        fn gray_roundtrip_is_bit_exact(data in proptest::collection::vec(any::<u8>(), 1..64)) {
            let img = GrayImage::new(data.len(), 1, data).unwrap();
            prop_assert_eq!(decode(&encode_gray(&img)).unwrap(), Pnm::Gray(img));
        }
    }
}
