//! Netpbm bitmaps, plain (`P1`) and raw (`P4`). 1 is foreground.

use std::fs;
use std::path::Path;

use crate::morphology::BinaryImage;

use super::DatasetError;

fn malformed(offset: usize, message: impl Into<String>) -> DatasetError {
    DatasetError::Pbm {
        offset,
        message: message.into(),
        path: None,
    }
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Cursor<'_> {
    fn skip_space(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b == b'#' {
                while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                    self.pos += 1;
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn number(&mut self, what: &str) -> Result<usize, DatasetError> {
        self.skip_space();
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(malformed(start, format!("expected {what}")));
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .expect("ascii digits")
            .parse()
            .map_err(|_| malformed(start, format!("{what} out of range")))
    }
}

pub fn decode_pbm(bytes: &[u8]) -> Result<BinaryImage, DatasetError> {
    let raw = match bytes.get(..2) {
        Some(b"P1") => false,
        Some(b"P4") => true,
        _ => return Err(malformed(0, "expected magic number P1 or P4")),
    };
    let mut c = Cursor { bytes, pos: 2 };
    let width = c.number("width")?;
    let height = c.number("height")?;
    if width == 0 || height == 0 {
        return Err(malformed(c.pos, format!("empty frame {width}×{height}")));
    }
    let mut img = BinaryImage::new(width, height);
    if raw {
        match bytes.get(c.pos) {
            Some(b) if b.is_ascii_whitespace() => c.pos += 1,
            _ => return Err(malformed(c.pos, "expected whitespace before raster")),
        }
        let row_bytes = width.div_ceil(8);
        let need = row_bytes * height;
        let data = &bytes[c.pos..];
        if data.len() < need {
            return Err(malformed(
                bytes.len(),
                format!("raster truncated: {} of {need} bytes", data.len()),
            ));
        }
        for y in 0..height {
            for x in 0..width {
                let byte = data[y * row_bytes + x / 8];
                img.set(x, y, byte & (0x80 >> (x % 8)) != 0);
            }
        }
    } else {
        for y in 0..height {
            for x in 0..width {
                c.skip_space();
                match bytes.get(c.pos) {
                    Some(b'0') => {}
                    Some(b'1') => img.set(x, y, true),
                    Some(&b) => {
                        return Err(malformed(c.pos, format!("unexpected byte 0x{b:02x} in raster")))
                    }
                    None => {
                        return Err(malformed(
                            c.pos,
                            format!("raster truncated at pixel ({x}, {y})"),
                        ))
                    }
                }
                c.pos += 1;
            }
        }
    }
    Ok(img)
}

/// Encode as `P4`, or as `P1` when `plain`.
pub fn encode_pbm(img: &BinaryImage, plain: bool) -> Vec<u8> {
    let (w, h) = (img.width(), img.height());
    let mut out = format!("{}\n{w} {h}\n", if plain { "P1" } else { "P4" }).into_bytes();
    for y in 0..h {
        if plain {
            let row: Vec<&str> = (0..w)
                .map(|x| if img.get(x as i64, y as i64) { "1" } else { "0" })
                .collect();
            out.extend_from_slice(row.join(" ").as_bytes());
            out.push(b'\n');
        } else {
            let mut byte = 0u8;
            for x in 0..w {
                if img.get(x as i64, y as i64) {
                    byte |= 0x80 >> (x % 8);
                }
                if x % 8 == 7 || x + 1 == w {
                    out.push(byte);
                    byte = 0;
                }
            }
        }
    }
    out
}

pub fn read_pbm(path: impl AsRef<Path>) -> Result<BinaryImage, DatasetError> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| DatasetError::io(path, e))?;
    decode_pbm(&bytes).map_err(|e| e.at(path))
}

/// Write as raw `P4`.
pub fn write_pbm(img: &BinaryImage, path: impl AsRef<Path>) -> Result<(), DatasetError> {
    let path = path.as_ref();
    fs::write(path, encode_pbm(img, false)).map_err(|e| DatasetError::io(path, e))
}
