//! Image, mask and measurement files.
//!
//! Images are binary PGM (`P5`, 8 or 16 bit) or `HCRS` raw doubles.

use std::fs;
use std::path::Path;

use hcorosa_core::formats::{decode_image, decode_mask, decode_samples, encode_image, encode_mask, encode_samples};
use hcorosa_core::{ComplexSamples, SamplingMask, ScalarImage};

use crate::CliError;

/// Decoded image before any normalization.
#[derive(Debug, Clone, PartialEq)]
pub struct RawImage {
    pub image: ScalarImage,
    /// PGM `maxval`; `None` for raw files.
    pub maxval: Option<u32>,
}

/// An image scaled into `[0, 1]`. `original = image * factor`.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedImage {
    pub image: ScalarImage,
    pub factor: f64,
}

fn read_bytes(path: &Path) -> Result<Vec<u8>, CliError> {
    fs::read(path).map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(|e| CliError::input(format!("cannot write {}: {e}", path.display())))
}

pub fn read_image(path: &Path) -> Result<RawImage, CliError> {
    let bytes = read_bytes(path)?;
    let what = |e: String| CliError::input(format!("{}: {e}", path.display()));
    if bytes.starts_with(b"P5") {
        let (image, maxval) = decode_pgm(&bytes).map_err(what)?;
        Ok(RawImage {
            image,
            maxval: Some(maxval),
        })
    } else if bytes.starts_with(b"HCRS") {
        let image = decode_image(&bytes).map_err(|e| what(e.to_string()))?;
        Ok(RawImage { image, maxval: None })
    } else {
        Err(what("unrecognized image format (expected binary PGM or HCRS)".into()))
    }
}

/// Divides by the peak so the maximum becomes 1. Negative input is refused.
pub fn normalize(image: &ScalarImage) -> Result<NormalizedImage, CliError> {
    if image.min() < 0.0 {
        return Err(CliError::input("image has negative values; cannot normalize to [0, 1]"));
    }
    let peak = image.max();
    if peak == 0.0 {
        return Ok(NormalizedImage {
            image: image.clone(),
            factor: 1.0,
        });
    }
    Ok(NormalizedImage {
        image: image.map(|v| v / peak),
        factor: peak,
    })
}

pub fn read_normalized(path: &Path) -> Result<NormalizedImage, CliError> {
    normalize(&read_image(path)?.image)
}

fn pgm_header_tokens(bytes: &[u8]) -> Result<([usize; 3], usize), String> {
    // magic, width, height, maxval separated by whitespace and comments;
    // exactly one whitespace byte precedes the raster
    let mut pos = 2;
    let mut vals = [0usize; 3];
    for v in vals.iter_mut() {
        loop {
            match bytes.get(pos) {
                Some(b'#') => {
                    while bytes.get(pos).is_some_and(|&b| b != b'\n') {
                        pos += 1;
                    }
                }
                Some(b) if b.is_ascii_whitespace() => pos += 1,
                Some(_) => break,
                None => return Err("truncated PGM header".into()),
            }
        }
        let start = pos;
        while bytes.get(pos).is_some_and(u8::is_ascii_digit) {
            pos += 1;
        }
        let text = std::str::from_utf8(&bytes[start..pos]).unwrap_or("");
        *v = text
            .parse()
            .map_err(|_| format!("bad PGM header field at byte {start}"))?;
    }
    match bytes.get(pos) {
        Some(b) if b.is_ascii_whitespace() => Ok((vals, pos + 1)),
        _ => Err("PGM header must end with a single whitespace byte".into()),
    }
}

pub fn decode_pgm(bytes: &[u8]) -> Result<(ScalarImage, u32), String> {
    if !bytes.starts_with(b"P5") {
        return Err("not a binary PGM (P5)".into());
    }
    let ([cols, rows, maxval], start) = pgm_header_tokens(bytes)?;
    if rows == 0 || cols == 0 {
        return Err("PGM has zero size".into());
    }
    if maxval == 0 || maxval > 65535 {
        return Err(format!("PGM maxval {maxval} outside 1..=65535"));
    }
    let wide = maxval > 255;
    let bpp = if wide { 2 } else { 1 };
    let raster = &bytes[start..];
    if raster.len() != rows * cols * bpp {
        return Err(format!(
            "PGM raster has {} bytes, expected {}",
            raster.len(),
            rows * cols * bpp
        ));
    }
    let data = if wide {
        raster
            .chunks_exact(2)
            .map(|c| u16::from_be_bytes([c[0], c[1]]) as f64)
            .collect()
    } else {
        raster.iter().map(|&b| b as f64).collect()
    };
    let image = ScalarImage::new(rows, cols, data).map_err(|e| e.to_string())?;
    Ok((image, maxval as u32))
}

/// 16-bit PGM of `image` clamped to `[0, 1]`.
pub fn encode_pgm16(image: &ScalarImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n65535\n", image.cols(), image.rows()).into_bytes();
    for v in image.data() {
        let q = (v.clamp(0.0, 1.0) * 65535.0).round() as u16;
        out.extend_from_slice(&q.to_be_bytes());
    }
    out
}

/// 8-bit PGM of `image` clamped to `[0, 1]`.
pub fn encode_pgm8(image: &ScalarImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", image.cols(), image.rows()).into_bytes();
    out.extend(image.data().iter().map(|v| (v.clamp(0.0, 1.0) * 255.0).round() as u8));
    out
}

pub fn write_pgm16(path: &Path, image: &ScalarImage) -> Result<(), CliError> {
    write_bytes(path, &encode_pgm16(image))
}

pub fn write_raw(path: &Path, image: &ScalarImage) -> Result<(), CliError> {
    write_bytes(path, &encode_image(image))
}

pub fn read_mask(path: &Path) -> Result<SamplingMask, CliError> {
    decode_mask(&read_bytes(path)?).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

pub fn write_mask(path: &Path, mask: &SamplingMask) -> Result<(), CliError> {
    write_bytes(path, &encode_mask(mask))
}

pub fn read_samples(path: &Path) -> Result<ComplexSamples, CliError> {
    decode_samples(&read_bytes(path)?).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

pub fn write_samples(path: &Path, m: &ComplexSamples) -> Result<(), CliError> {
    write_bytes(path, &encode_samples(m))
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    write_bytes(path, text.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pgm8_roundtrip_with_comment() {
        let mut bytes = b"P5\n# made by hand\n3 2\n# another\n255\n".to_vec();
        bytes.extend_from_slice(&[0, 51, 255, 10, 20, 30]);
        let (img, maxval) = decode_pgm(&bytes).unwrap();
        assert_eq!(maxval, 255);
        assert_eq!(img.shape(), (2, 3));
        assert_eq!(img.get(0, 2), 255.0);
        assert_eq!(img.get(1, 0), 10.0);
        let back = decode_pgm(&encode_pgm8(&img.map(|v| v / 255.0))).unwrap().0;
        assert_eq!(back, img);
    }

    #[test]
    fn pgm16_roundtrip() {
        let img = ScalarImage::from_fn(4, 5, |r, c| ((r * 5 + c) * 3000) as f64 / 65535.0);
        let (back, maxval) = decode_pgm(&encode_pgm16(&img)).unwrap();
        assert_eq!(maxval, 65535);
        for (a, b) in back.data().iter().zip(img.data()) {
            assert_eq!(*a, (b * 65535.0).round());
        }
        let bytes = encode_pgm16(&img);
        // big-endian samples
        assert_eq!(&bytes[bytes.len() - 2..], &(19u16 * 3000).to_be_bytes());
    }

    #[test]
    fn pgm_rejects_bad_input() {
        assert!(decode_pgm(b"P2\n1 1\n255\n0").is_err());
        assert!(decode_pgm(b"P5\n2 2\n255\n\x01\x02").is_err());
        assert!(decode_pgm(b"P5\n1 1\n70000\n\x01\x02").is_err());
        assert!(decode_pgm(b"P5\n1 1").is_err());
    }

    #[test]
    fn normalization() {
        let n = normalize(&ScalarImage::from_fn(2, 2, |r, c| (r + 2 * c) as f64)).unwrap();
        assert_eq!(n.factor, 3.0);
        assert_eq!(n.image.max(), 1.0);
        assert!(normalize(&ScalarImage::filled(2, 2, -1.0)).is_err());
        assert_eq!(normalize(&ScalarImage::zeros(2, 2)).unwrap().factor, 1.0);
    }
}
