use std::path::Path as FsPath;

use crate::error::{Error, Result};

/// 8-bit grayscale image, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::ImageTooSmall(width, height));
        }
        if pixels.len() != width * height {
            return Err(Error::DimensionMismatch { expected: width * height, got: pixels.len() });
        }
        Ok(Self { width, height, pixels })
    }

    pub fn from_fn(width: usize, height: usize, f: impl Fn(usize, usize) -> u8) -> Result<Self> {
        let pixels = (0..height).flat_map(|r| (0..width).map(move |c| (r, c))).map(|(r, c)| f(r, c)).collect();
        Self::new(width, height, pixels)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    /// Intensity at zero-based `(row, col)`.
    pub fn get(&self, row: usize, col: usize) -> u8 {
        self.pixels[row * self.width + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: u8) {
        self.pixels[row * self.width + col] = value;
    }

    /// Parse PGM, ASCII (`P2`) or binary (`P5`). Values are rescaled to
    /// `0..=255` when the file's maxval differs.
    pub fn from_pgm(bytes: &[u8]) -> Result<Self> {
        let mut cur = Cursor { bytes, pos: 0 };
        let magic = cur.token()?;
        let binary = match magic.as_str() {
            "P2" => false,
            "P5" => true,
            other => return Err(Error::Parse(format!("unsupported image format {other:?}, expected P2 or P5"))),
        };
        let width = cur.number()?;
        let height = cur.number()?;
        let maxval = cur.number()?;
        if maxval == 0 || maxval > 255 {
            return Err(Error::Parse(format!("maxval {maxval} outside 1..=255")));
        }
        let count = width * height;
        let raw: Vec<usize> = if binary {
            // exactly one whitespace byte separates the header from the data
            let start = cur.pos + 1;
            let data = bytes.get(start..start + count).ok_or_else(|| Error::Parse("truncated P5 pixel data".into()))?;
            data.iter().map(|&b| b as usize).collect()
        } else {
            (0..count).map(|_| cur.number()).collect::<Result<_>>()?
        };
        if let Some(&bad) = raw.iter().find(|&&v| v > maxval) {
            return Err(Error::Parse(format!("pixel value {bad} exceeds maxval {maxval}")));
        }
        let pixels = raw.into_iter().map(|v| ((v * 255 + maxval / 2) / maxval) as u8).collect();
        Self::new(width, height, pixels)
    }

    /// Binary `P5` encoding.
    pub fn to_pgm(&self) -> Vec<u8> {
        let mut out = format!("P5\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend_from_slice(&self.pixels);
        out
    }

    pub fn load(path: impl AsRef<FsPath>) -> Result<Self> {
        let bytes = std::fs::read(path.as_ref()).map_err(|e| Error::Io(format!("{}: {e}", path.as_ref().display())))?;
        Self::from_pgm(&bytes)
    }

    pub fn save(&self, path: impl AsRef<FsPath>) -> Result<()> {
        std::fs::write(path.as_ref(), self.to_pgm()).map_err(|e| Error::Io(format!("{}: {e}", path.as_ref().display())))
    }

    /// Copy with the given zero-based pixels set to 0.
    pub fn overlay(&self, pixels: &[(usize, usize)]) -> Self {
        let mut out = self.clone();
        for &(r, c) in pixels {
            out.set(r, c, 0);
        }
        out
    }
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Cursor<'_> {
    fn token(&mut self) -> Result<String> {
        loop {
            while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
                self.pos += 1;
            }
            if self.pos < self.bytes.len() && self.bytes[self.pos] == b'#' {
                while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                    self.pos += 1;
                }
                continue;
            }
            break;
        }
        let start = self.pos;
        while self.pos < self.bytes.len() && !self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(Error::Parse("unexpected end of PGM data".into()));
        }
        Ok(String::from_utf8_lossy(&self.bytes[start..self.pos]).into_owned())
    }

    fn number(&mut self) -> Result<usize> {
        let tok = self.token()?;
        tok.parse().map_err(|_| Error::Parse(format!("expected a number in PGM data, got {tok:?}")))
    }
}
