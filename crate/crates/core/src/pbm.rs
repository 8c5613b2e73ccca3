//! Netpbm bitmap (PBM) reading and writing. A set bit (black) is a positive
//! pixel. Reads plain (`P1`) and raw (`P4`) files, writes raw.

use std::path::Path;

use crate::{BinaryImage, Error, Result};

fn fmt_err(offset: usize, message: impl Into<String>) -> Error {
    Error::Format {
        offset,
        message: message.into(),
    }
}

struct Header {
    plain: bool,
    width: usize,
    height: usize,
    /// Offset of the first raster byte.
    data: usize,
}

fn parse_header(bytes: &[u8]) -> Result<Header> {
    let plain = match bytes.get(..2) {
        Some(b"P1") => true,
        Some(b"P4") => false,
        _ => return Err(fmt_err(0, "not a PBM file (expected P1 or P4)")),
    };
    let mut pos = 2;
    let mut dims = [0usize; 2];
    for d in &mut dims {
        pos = skip_space(bytes, pos);
        let start = pos;
        while pos < bytes.len() && bytes[pos].is_ascii_digit() {
            pos += 1;
        }
        let text = std::str::from_utf8(&bytes[start..pos]).unwrap_or("");
        *d = text.parse().map_err(|_| fmt_err(start, "expected image dimension"))?;
    }
    if dims[0] == 0 || dims[1] == 0 {
        return Err(fmt_err(pos, "image dimensions must be positive"));
    }
    // Exactly one whitespace byte separates the header from raw data.
    if !plain {
        if !bytes.get(pos).is_some_and(u8::is_ascii_whitespace) {
            return Err(fmt_err(pos, "missing whitespace after header"));
        }
        pos += 1;
    }
    Ok(Header {
        plain,
        width: dims[0],
        height: dims[1],
        data: pos,
    })
}

fn skip_space(bytes: &[u8], mut pos: usize) -> usize {
    loop {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if bytes.get(pos) == Some(&b'#') {
            while pos < bytes.len() && bytes[pos] != b'\n' {
                pos += 1;
            }
        } else {
            return pos;
        }
    }
}

pub fn decode_pbm(bytes: &[u8]) -> Result<BinaryImage> {
    let h = parse_header(bytes)?;
    let mut img = BinaryImage::new(h.width, h.height);
    if h.plain {
        let mut pos = h.data;
        for v in 0..h.height {
            for u in 0..h.width {
                pos = skip_space(bytes, pos);
                match bytes.get(pos) {
                    Some(b'1') => img.set(u, v, true),
                    Some(b'0') => {}
                    Some(_) => return Err(fmt_err(pos, "expected 0 or 1")),
                    None => return Err(fmt_err(pos, "truncated pixel data")),
                }
                pos += 1;
            }
        }
        Ok(img)
    } else {
        let row = h.width.div_ceil(8);
        let need = row * h.height;
        let data = bytes
            .get(h.data..h.data + need)
            .ok_or_else(|| fmt_err(bytes.len(), format!("truncated pixel data, need {need} bytes")))?;
        BinaryImage::from_packed_rows(h.width, h.height, data).ok_or_else(|| fmt_err(h.data, "bad raster"))
    }
}

pub fn encode_pbm(img: &BinaryImage) -> Vec<u8> {
    let mut out = format!("P4\n{} {}\n", img.width(), img.height()).into_bytes();
    out.extend(img.to_packed_rows());
    out
}

pub fn read_pbm(path: &Path) -> Result<BinaryImage> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_pbm(&bytes)
}

pub fn write_pbm(path: &Path, img: &BinaryImage) -> Result<()> {
    std::fs::write(path, encode_pbm(img)).map_err(|e| Error::io(path, e))
}
