//! Little-endian binary codecs for masks (`HCMK`), measurements (`HCKS`)
//! and raw images (`HCRS`).

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fourier::{ComplexSamples, SamplingMask};
use crate::image::ScalarImage;

pub const FORMAT_VERSION: u32 = 1;

fn header(magic: &[u8; 4], rows: usize, cols: usize) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(magic);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&(rows as u32).to_le_bytes());
    out.extend_from_slice(&(cols as u32).to_le_bytes());
    out
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
    what: &'static str,
}

impl<'a> Reader<'a> {
    fn new(buf: &'a [u8], what: &'static str) -> Self {
        Self { buf, pos: 0, what }
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.buf.len() {
            return Err(Error::Parameter(format!("{} file truncated", self.what)));
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn header(&mut self, magic: &[u8; 4]) -> Result<(usize, usize)> {
        if self.take(4)? != magic {
            return Err(Error::Parameter(format!("not a {} file (bad magic)", self.what)));
        }
        let v = self.u32()?;
        if v != FORMAT_VERSION {
            return Err(Error::Parameter(format!("unsupported {} version {v}", self.what)));
        }
        Ok((self.u32()? as usize, self.u32()? as usize))
    }

    fn finish(&self) -> Result<()> {
        if self.pos != self.buf.len() {
            return Err(Error::Parameter(format!("trailing bytes in {} file", self.what)));
        }
        Ok(())
    }

    fn bits(&mut self, n: usize) -> Result<Vec<bool>> {
        self.take(n)?
            .iter()
            .map(|&b| match b {
                0 => Ok(false),
                1 => Ok(true),
                _ => Err(Error::Parameter(format!("{} mask byte must be 0 or 1", self.what))),
            })
            .collect()
    }
}

pub fn encode_mask(mask: &SamplingMask) -> Vec<u8> {
    let mut out = header(b"HCMK", mask.rows(), mask.cols());
    out.extend(mask.bits().iter().map(|&b| b as u8));
    out
}

pub fn decode_mask(buf: &[u8]) -> Result<SamplingMask> {
    let mut r = Reader::new(buf, "HCMK");
    let (rows, cols) = r.header(b"HCMK")?;
    let bits = r.bits(rows * cols)?;
    r.finish()?;
    SamplingMask::from_bits(rows, cols, bits)
}

pub fn encode_samples(m: &ComplexSamples) -> Vec<u8> {
    let mut out = header(b"HCKS", m.mask.rows(), m.mask.cols());
    out.extend(m.mask.bits().iter().map(|&b| b as u8));
    out.extend_from_slice(&(m.values.len() as u64).to_le_bytes());
    for v in &m.values {
        out.extend_from_slice(&v.re.to_le_bytes());
        out.extend_from_slice(&v.im.to_le_bytes());
    }
    out
}

pub fn decode_samples(buf: &[u8]) -> Result<ComplexSamples> {
    let mut r = Reader::new(buf, "HCKS");
    let (rows, cols) = r.header(b"HCKS")?;
    let mask = SamplingMask::from_bits(rows, cols, r.bits(rows * cols)?)?;
    let count = r.u64()? as usize;
    if count != mask.sample_count() {
        return Err(Error::Parameter(format!(
            "HCKS sample count {count} does not match mask ({})",
            mask.sample_count()
        )));
    }
    let mut values = Vec::with_capacity(count);
    for _ in 0..count {
        let re = r.f64()?;
        let im = r.f64()?;
        values.push(Complex64::new(re, im));
    }
    r.finish()?;
    ComplexSamples::new(mask, values)
}

pub fn encode_image(img: &ScalarImage) -> Vec<u8> {
    let mut out = header(b"HCRS", img.rows(), img.cols());
    for v in img.data() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn decode_image(buf: &[u8]) -> Result<ScalarImage> {
    let mut r = Reader::new(buf, "HCRS");
    let (rows, cols) = r.header(b"HCRS")?;
    let mut data = Vec::with_capacity(rows * cols);
    for _ in 0..rows * cols {
        data.push(r.f64()?);
    }
    r.finish()?;
    ScalarImage::new(rows, cols, data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fourier::apply_forward;
    use crate::sampling::{generate, MaskKind, MaskSpec};

    #[test]
    fn roundtrips() {
        let mask = generate(&MaskSpec::new(MaskKind::Random, 16, 12, 0.3, 4)).unwrap();
        assert_eq!(decode_mask(&encode_mask(&mask)).unwrap(), mask);
        let img = ScalarImage::from_fn(16, 12, |r, c| (r * 13 + c) as f64 / 7.0 - 3.0);
        assert_eq!(decode_image(&encode_image(&img)).unwrap(), img);
        let m = apply_forward(&img, &mask).unwrap();
        let back = decode_samples(&encode_samples(&m)).unwrap();
        assert_eq!(back.mask, m.mask);
        assert_eq!(back.values, m.values);
    }

    #[test]
    fn layout() {
        let mask = SamplingMask::full(2, 3);
        let b = encode_mask(&mask);
        assert_eq!(&b[..4], b"HCMK");
        assert_eq!(b.len(), 16 + 6);
        assert_eq!(&b[8..12], &2u32.to_le_bytes());
        let img = ScalarImage::filled(2, 3, 1.5);
        assert_eq!(encode_image(&img).len(), 16 + 48);
    }

    #[test]
    fn rejects_corruption() {
        let img = ScalarImage::filled(2, 2, 1.0);
        let mut b = encode_image(&img);
        assert!(decode_image(&b[..b.len() - 1]).is_err());
        b[0] = b'X';
        assert!(decode_image(&b).is_err());
        let mut m = encode_mask(&SamplingMask::full(2, 2));
        m[17] = 7;
        assert!(decode_mask(&m).is_err());
    }
}
