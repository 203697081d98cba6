use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// Decoded interleaved 8-bit frame, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrameImage {
    width: u32,
    height: u32,
    channels: u8,
    pixels: Vec<u8>,
}

impl FrameImage {
    pub fn new(width: u32, height: u32, channels: u8, pixels: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 || channels == 0 {
            return Err(Error::invalid("frame dimensions must be positive"));
        }
        let expected = width as usize * height as usize * channels as usize;
        if pixels.len() != expected {
            return Err(Error::invalid(format!(
                "{width}x{height}x{channels} frame needs {expected} bytes, got {}",
                pixels.len()
            )));
        }
        Ok(Self {
            width,
            height,
            channels,
            pixels,
        })
    }

    pub fn filled(width: u32, height: u32, rgb: [u8; 3]) -> Self {
        let pixels = rgb.repeat(width as usize * height as usize);
        Self::new(width, height, 3, pixels).expect("dimensions are consistent")
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn channels(&self) -> u8 {
        self.channels
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub(crate) fn pixels_mut(&mut self) -> &mut [u8] {
        &mut self.pixels
    }

    pub fn index(&self, x: u32, y: u32, c: u8) -> usize {
        (y as usize * self.width as usize + x as usize) * self.channels as usize + c as usize
    }

    pub fn get(&self, x: u32, y: u32, c: u8) -> u8 {
        self.pixels[self.index(x, y, c)]
    }

    pub fn set(&mut self, x: u32, y: u32, c: u8, v: u8) {
        let i = self.index(x, y, c);
        self.pixels[i] = v;
    }

    /// Binary P6 encoding with maxval 255.
    pub fn to_ppm(&self) -> Result<Vec<u8>> {
        if self.channels != 3 {
            return Err(Error::invalid("PPM output needs 3 channels"));
        }
        let mut out = format!("P6\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend_from_slice(&self.pixels);
        Ok(out)
    }

    pub fn write_ppm(&self, mut w: impl Write) -> std::io::Result<()> {
        let bytes = self
            .to_ppm()
            .map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidInput, e.to_string()))?;
        w.write_all(&bytes)
    }

    pub fn from_ppm(bytes: &[u8]) -> Result<Self> {
        read_ppm(BufReader::new(bytes))
    }

    pub fn load_ppm(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        read_ppm(BufReader::new(file)).map_err(|e| match e {
            Error::Parse { message, .. } => Error::parse(path.display().to_string(), message),
            other => other,
        })
    }
}

fn next_token(r: &mut impl BufRead) -> Result<String> {
    let mut token = Vec::new();
    let mut byte = [0u8; 1];
    loop {
        let n = r
            .read(&mut byte)
            .map_err(|e| Error::parse("ppm header", e.to_string()))?;
        if n == 0 {
            break;
        }
        match byte[0] {
            b'#' if token.is_empty() => {
                let mut skip = Vec::new();
                r.read_until(b'\n', &mut skip)
                    .map_err(|e| Error::parse("ppm header", e.to_string()))?;
            }
            b if b.is_ascii_whitespace() => {
                if !token.is_empty() {
                    break;
                }
            }
            b => token.push(b),
        }
    }
    if token.is_empty() {
        return Err(Error::parse("ppm header", "truncated header"));
    }
    String::from_utf8(token).map_err(|_| Error::parse("ppm header", "non-ASCII header"))
}

fn read_ppm(mut r: impl BufRead) -> Result<FrameImage> {
    let magic = next_token(&mut r)?;
    if magic != "P6" {
        return Err(Error::parse("ppm header", format!("expected P6, found {magic}")));
    }
    let mut field = |name: &str| -> Result<u32> {
        let tok = next_token(&mut r)?;
        tok.parse::<u32>()
            .map_err(|_| Error::parse("ppm header", format!("bad {name} `{tok}`")))
    };
    let width = field("width")?;
    let height = field("height")?;
    let maxval = field("maxval")?;
    if maxval == 0 || maxval > 255 {
        return Err(Error::parse("ppm header", format!("unsupported maxval {maxval}")));
    }
    let mut pixels = vec![0u8; width as usize * height as usize * 3];
    r.read_exact(&mut pixels)
        .map_err(|_| Error::parse("ppm body", "truncated pixel data"))?;
    FrameImage::new(width, height, 3, pixels)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ppm_round_trip() {
        let mut img = FrameImage::filled(5, 3, [10, 20, 30]);
        img.set(4, 2, 1, 255);
        let bytes = img.to_ppm().unwrap();
        assert!(bytes.starts_with(b"P6\n5 3\n255\n"));
        assert_eq!(FrameImage::from_ppm(&bytes).unwrap(), img);
    }

    #[test]
    fn ppm_header_comments() {
        let mut bytes = b"P6 # made by hand\n2 1\n# depth\n255\n".to_vec();
        bytes.extend([1, 2, 3, 4, 5, 6]);
        let img = FrameImage::from_ppm(&bytes).unwrap();
        assert_eq!((img.width(), img.height()), (2, 1));
        assert_eq!(img.get(1, 0, 2), 6);
    }

    #[test]
    fn ppm_rejects_bad_input() {
        assert!(FrameImage::from_ppm(b"P5\n1 1\n255\n\0").is_err());
        assert!(FrameImage::from_ppm(b"P6\n2 2\n255\n\0\0\0").is_err());
        assert!(FrameImage::from_ppm(b"P6\n2 2\n65535\n").is_err());
        assert!(FrameImage::from_ppm(b"").is_err());
    }

    #[test]
    fn dimension_mismatch_rejected() {
        assert!(FrameImage::new(2, 2, 3, vec![0; 11]).is_err());
        assert!(FrameImage::new(0, 2, 3, vec![]).is_err());
    }
}
