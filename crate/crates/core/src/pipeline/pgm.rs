//! Portable graymap reading and writing, plain (P2) and raw (P5).

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PgmFormat {
    Plain,
    Raw,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PgmImage {
    pub width: usize,
    pub height: usize,
    pub maxval: u16,
    /// Row-major samples.
    pub pixels: Vec<u16>,
    pub format: PgmFormat,
    /// Header comment lines without the leading `#`.
    pub comments: Vec<String>,
}

struct Header<'a> {
    bytes: &'a [u8],
    pos: usize,
    comments: Vec<String>,
}

impl Header<'_> {
    fn skip_space(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b == b'#' {
                let start = self.pos + 1;
                while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                    self.pos += 1;
                }
                let text = String::from_utf8_lossy(&self.bytes[start..self.pos]);
                self.comments.push(text.trim_end_matches('\r').to_string());
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn number(&mut self, what: &str) -> Result<usize> {
        self.skip_space();
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(Error::Pgm(format!("expected {what}")));
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .expect("ascii digits")
            .parse()
            .map_err(|_| Error::Pgm(format!("{what} out of range")))
    }
}

pub fn parse_pgm(bytes: &[u8]) -> Result<PgmImage> {
    let format = match bytes.get(..2) {
        Some(b"P2") => PgmFormat::Plain,
        Some(b"P5") => PgmFormat::Raw,
        _ => return Err(Error::Pgm("bad magic; expected P2 or P5".into())),
    };
    let mut h = Header {
        bytes,
        pos: 2,
        comments: Vec::new(),
    };
    let width = h.number("width")?;
    let height = h.number("height")?;
    let maxval = h.number("maxval")?;
    if width == 0 || height == 0 {
        return Err(Error::Pgm("empty image".into()));
    }
    if maxval == 0 || maxval > 65535 {
        return Err(Error::Pgm(format!("maxval {maxval} outside 1..=65535")));
    }
    let maxval = maxval as u16;
    let count = width
        .checked_mul(height)
        .ok_or_else(|| Error::Pgm("image dimensions overflow".into()))?;
    let mut pixels = Vec::with_capacity(count);
    match format {
        PgmFormat::Plain => {
            for i in 0..count {
                let v = h
                    .number("sample")
                    .map_err(|_| Error::Pgm(format!("truncated payload at sample {i}")))?;
                if v > maxval as usize {
                    return Err(Error::Pgm(format!("sample {v} above maxval {maxval}")));
                }
                pixels.push(v as u16);
            }
        }
        PgmFormat::Raw => {
            // Exactly one whitespace byte separates maxval from the payload.
            match bytes.get(h.pos) {
                Some(b) if b.is_ascii_whitespace() => h.pos += 1,
                _ => return Err(Error::Pgm("missing whitespace before raster".into())),
            }
            let wide = maxval > 255;
            let need = count * if wide { 2 } else { 1 };
            let raster = bytes
                .get(h.pos..h.pos + need)
                .ok_or_else(|| Error::Pgm(format!("truncated payload: need {need} bytes")))?;
            if wide {
                pixels.extend(
                    raster
                        .chunks_exact(2)
                        .map(|c| u16::from_be_bytes([c[0], c[1]])),
                );
            } else {
                pixels.extend(raster.iter().map(|&b| u16::from(b)));
            }
            if let Some(v) = pixels.iter().find(|&&v| v > maxval) {
                return Err(Error::Pgm(format!("sample {v} above maxval {maxval}")));
            }
        }
    }
    Ok(PgmImage {
        width,
        height,
        maxval,
        pixels,
        format,
        comments: h.comments,
    })
}

/// Header is `magic\n[# comment\n...]width height\nmaxval\n`; plain rasters
/// put one row per line.
pub fn write_pgm(img: &PgmImage, keep_comments: bool) -> Vec<u8> {
    let magic = match img.format {
        PgmFormat::Plain => "P2",
        PgmFormat::Raw => "P5",
    };
    let mut out = format!("{magic}\n");
    if keep_comments {
        for c in &img.comments {
            out.push('#');
            out.push_str(c);
            out.push('\n');
        }
    }
    out.push_str(&format!("{} {}\n{}\n", img.width, img.height, img.maxval));
    let mut bytes = out.into_bytes();
    match img.format {
        PgmFormat::Plain => {
            for row in img.pixels.chunks(img.width) {
                let line: Vec<String> = row.iter().map(u16::to_string).collect();
                bytes.extend_from_slice(line.join(" ").as_bytes());
                bytes.push(b'\n');
            }
        }
        PgmFormat::Raw => {
            for &v in &img.pixels {
                if img.maxval > 255 {
                    bytes.extend_from_slice(&v.to_be_bytes());
                } else {
                    bytes.push(v as u8);
                }
            }
        }
    }
    bytes
}

/// `[0, maxval]` to `[-1, 1]`.
pub fn pixels_to_data(img: &PgmImage) -> Vec<f64> {
    let m = f64::from(img.maxval);
    img.pixels
        .iter()
        .map(|&v| 2.0 * f64::from(v) / m - 1.0)
        .collect()
}

/// Inverse of [`pixels_to_data`], rounded and clamped into `[0, maxval]`.
pub fn data_to_pixels(data: &[f64], maxval: u16) -> Vec<u16> {
    let m = f64::from(maxval);
    data.iter()
        .map(|&x| ((x + 1.0) / 2.0 * m).round().clamp(0.0, m) as u16)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn minimal_plain() {
        let img = parse_pgm(b"P2 1 1 255 128").unwrap();
        assert_eq!((img.width, img.height, img.maxval), (1, 1, 255));
        assert_eq!(img.pixels, vec![128]);
    }

    #[test]
    fn comments_are_collected() {
        let img = parse_pgm(b"P2\n# made by hand\n2 1\n# mid\n9\n1 9\n").unwrap();
        assert_eq!(img.comments, vec![" made by hand", " mid"]);
        let kept = write_pgm(&img, true);
        assert_eq!(parse_pgm(&kept).unwrap(), img);
        let stripped = parse_pgm(&write_pgm(&img, false)).unwrap();
        assert!(stripped.comments.is_empty());
        assert_eq!(stripped.pixels, img.pixels);
    }

    #[test]
    fn sixteen_bit_raw() {
        let mut bytes = b"P5\n2 1\n65535\n".to_vec();
        bytes.extend_from_slice(&[0x01, 0x02, 0xff, 0xff]);
        let img = parse_pgm(&bytes).unwrap();
        assert_eq!(img.pixels, vec![0x0102, 0xffff]);
        assert_eq!(write_pgm(&img, true), bytes);
    }

    #[test]
    fn malformed_inputs() {
        for bad in [
            &b"P3 1 1 255 0"[..],
            b"P2 2 2 255 1 2 3",
            b"P5\n2 2\n255\n\x01\x02",
            b"P2 1 1 0 0",
            b"P2 1 1 70000 0",
            b"P2 1 1 10 11",
            b"P2 x 1 10 1",
        ] {
            assert!(
                matches!(parse_pgm(bad), Err(Error::Pgm(_))),
                "{:?}",
                String::from_utf8_lossy(bad)
            );
        }
    }

    #[test]
    fn pixel_mapping_endpoints() {
        let img = PgmImage {
            width: 3,
            height: 1,
            maxval: 200,
            pixels: vec![0, 100, 200],
            format: PgmFormat::Plain,
            comments: vec![],
        };
        assert_eq!(pixels_to_data(&img), vec![-1.0, 0.0, 1.0]);
        assert_eq!(data_to_pixels(&[-1.5, 0.0, 1.2], 200), vec![0, 100, 200]);
    }

    proptest! {
        #[test]
        fn raw_roundtrip_is_byte_identical(
            w in 1usize..6, h in 1usize..6, maxval in 1u16..=u16::MAX,
            raw in prop::collection::vec(any::<u16>(), 25)
        ) {
            let pixels: Vec<u16> = raw[..w * h].iter().map(|&v| (u32::from(v) % (u32::from(maxval) + 1)) as u16).collect();
            let img = PgmImage { width: w, height: h, maxval, pixels, format: PgmFormat::Raw, comments: vec![] };
            let bytes = write_pgm(&img, false);
            let back = parse_pgm(&bytes).unwrap();
            prop_assert_eq!(&back, &img);
            prop_assert_eq!(write_pgm(&back, false), bytes);
            let plain = PgmImage { format: PgmFormat::Plain, ..img.clone() };
            prop_assert_eq!(parse_pgm(&write_pgm(&plain, false)).unwrap().pixels, img.pixels.clone());
            prop_assert_eq!(data_to_pixels(&pixels_to_data(&img), maxval), img.pixels);
        }
    }
}
