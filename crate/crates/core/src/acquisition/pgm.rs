//! Grayscale PGM (`P2` ASCII / `P5` binary, maxval ≤ 255).

use std::fs;
use std::path::Path;

use super::image::Image;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PgmEncoding {
    /// `P2`
    Ascii,
    /// `P5`
    #[default]
    Binary,
}

struct Header {
    encoding: PgmEncoding,
    width: usize,
    height: usize,
    maxval: u32,
}

struct Cursor<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn skip_whitespace_and_comments(&mut self) {
        while let Some(&c) = self.data.get(self.pos) {
            if c == b'#' {
                while let Some(&c) = self.data.get(self.pos) {
                    self.pos += 1;
                    if c == b'\n' || c == b'\r' {
                        break;
                    }
                }
            } else if c.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn token(&mut self) -> Option<&'a [u8]> {
        self.skip_whitespace_and_comments();
        let start = self.pos;
        while self
            .data
            .get(self.pos)
            .is_some_and(|c| !c.is_ascii_whitespace() && *c != b'#')
        {
            self.pos += 1;
        }
        (self.pos > start).then(|| &self.data[start..self.pos])
    }

    fn number(&mut self, what: &str) -> Result<u32> {
        let tok = self
            .token()
            .ok_or_else(|| Error::Pgm(format!("missing {what}")))?;
        std::str::from_utf8(tok)
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::Pgm(format!("invalid {what} '{}'", String::from_utf8_lossy(tok))))
    }
}

fn parse_header(cur: &mut Cursor<'_>) -> Result<Header> {
    let encoding = match cur.token() {
        Some(b"P2") => PgmEncoding::Ascii,
        Some(b"P5") => PgmEncoding::Binary,
        Some(b"P3") | Some(b"P6") => {
            return Err(Error::Pgm("color images are not supported".into()))
        }
        _ => return Err(Error::Pgm("missing P2/P5 magic".into())),
    };
    let width = cur.number("width")? as usize;
    let height = cur.number("height")? as usize;
    let maxval = cur.number("maxval")?;
    if width == 0 || height == 0 {
        return Err(Error::Pgm("zero image dimension".into()));
    }
    if maxval == 0 || maxval > 255 {
        return Err(Error::Pgm(format!("unsupported maxval {maxval} (must be 1..=255)")));
    }
    Ok(Header {
        encoding,
        width,
        height,
        maxval,
    })
}

/// Parses PGM bytes into an image scaled by `1 / maxval`.
pub fn decode_pgm(data: &[u8]) -> Result<Image> {
    let mut cur = Cursor { data, pos: 0 };
    let h = parse_header(&mut cur)?;
    let count = h.width * h.height;
    let scale = 1.0 / h.maxval as f64;
    let mut pixels = Vec::with_capacity(count);
    match h.encoding {
        PgmEncoding::Binary => {
            // exactly one whitespace byte separates maxval from the raster
            if !data.get(cur.pos).is_some_and(u8::is_ascii_whitespace) {
                return Err(Error::Pgm("missing whitespace before raster".into()));
            }
            let raster = &data[cur.pos + 1..];
            if raster.len() < count {
                return Err(Error::Pgm(format!(
                    "truncated data: expected {count} bytes, found {}",
                    raster.len()
                )));
            }
            for &v in &raster[..count] {
                if u32::from(v) > h.maxval {
                    return Err(Error::Pgm(format!("sample {v} exceeds maxval {}", h.maxval)));
                }
                pixels.push(f64::from(v) * scale);
            }
        }
        PgmEncoding::Ascii => {
            for k in 0..count {
                let v = cur.number("sample").map_err(|_| {
                    Error::Pgm(format!("truncated data: expected {count} samples, found {k}"))
                })?;
                if v > h.maxval {
                    return Err(Error::Pgm(format!("sample {v} exceeds maxval {}", h.maxval)));
                }
                pixels.push(f64::from(v) * scale);
            }
        }
    }
    Image::new(h.height, h.width, pixels)
}

fn quantize(v: f64) -> u8 {
    (v * 255.0).round().clamp(0.0, 255.0) as u8
}

/// Encodes with maxval 255, rounding to nearest and clamping.
pub fn encode_pgm(image: &Image, encoding: PgmEncoding) -> Vec<u8> {
    let (w, h) = (image.n_col(), image.n_row());
    match encoding {
        PgmEncoding::Binary => {
            let mut out = format!("P5\n{w} {h}\n255\n").into_bytes();
            out.extend(image.pixels().iter().map(|&v| quantize(v)));
            out
        }
        PgmEncoding::Ascii => {
            let mut out = format!("P2\n{w} {h}\n255\n");
            for row in image.rows() {
                let line: Vec<String> = row.iter().map(|&v| quantize(v).to_string()).collect();
                out.push_str(&line.join(" "));
                out.push('\n');
            }
            out.into_bytes()
        }
    }
}

pub fn load_pgm(path: impl AsRef<Path>) -> Result<Image> {
    let path = path.as_ref();
    let data = fs::read(path).map_err(|e| Error::file(path, e))?;
    decode_pgm(&data)
}

/// Writes a binary (`P5`) PGM.
pub fn write_pgm(image: &Image, path: impl AsRef<Path>) -> Result<()> {
    write_pgm_as(image, path, PgmEncoding::Binary)
}

pub fn write_pgm_as(image: &Image, path: impl AsRef<Path>, encoding: PgmEncoding) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_pgm(image, encoding)).map_err(|e| Error::file(path, e))
}
