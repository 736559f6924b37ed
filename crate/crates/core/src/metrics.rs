//! Image quality scores: SNR, SSIM and PSNR.

use serde::{Deserialize, Serialize};

use crate::error::{check_shape, Error, Result};
use crate::image::ScalarImage;

pub const SSIM_WINDOW: usize = 11;
pub const SSIM_SIGMA: f64 = 1.5;
pub const SSIM_K1: f64 = 0.01;
pub const SSIM_K2: f64 = 0.03;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScorePair {
    pub snr_db: f64,
    pub ssim: f64,
}

pub fn score(reference: &ScalarImage, rec: &ScalarImage) -> Result<ScorePair> {
    Ok(ScorePair {
        snr_db: snr(reference, rec)?,
        ssim: ssim(reference, rec)?,
    })
}

fn error_energy(reference: &ScalarImage, rec: &ScalarImage) -> Result<f64> {
    check_shape(reference.shape(), rec.shape())?;
    Ok(reference
        .data()
        .iter()
        .zip(rec.data())
        .map(|(a, b)| (a - b) * (a - b))
        .sum())
}

/// `10 log10(sum ref^2 / sum (ref - rec)^2)`; `+inf` for an exact match.
pub fn snr(reference: &ScalarImage, rec: &ScalarImage) -> Result<f64> {
    let err = error_energy(reference, rec)?;
    let sig: f64 = reference.data().iter().map(|v| v * v).sum();
    if sig == 0.0 {
        return Err(Error::DegenerateReference("reference image is all zeros"));
    }
    if err == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (sig / err).log10())
}

/// `20 log10(max |ref| / rmse)`; `+inf` for an exact match.
pub fn psnr(reference: &ScalarImage, rec: &ScalarImage) -> Result<f64> {
    let err = error_energy(reference, rec)?;
    let peak = reference.max_abs();
    if peak == 0.0 {
        return Err(Error::DegenerateReference("reference image is all zeros"));
    }
    if err == 0.0 {
        return Ok(f64::INFINITY);
    }
    let rmse = (err / reference.len() as f64).sqrt();
    Ok(20.0 * (peak / rmse).log10())
}

/// Mean SSIM with the dynamic range taken from `reference`.
pub fn ssim(reference: &ScalarImage, rec: &ScalarImage) -> Result<f64> {
    let range = reference.max() - reference.min();
    ssim_with_range(reference, rec, if range > 0.0 { range } else { 1.0 })
}

fn gaussian_kernel() -> [f64; SSIM_WINDOW] {
    let mut k = [0.0; SSIM_WINDOW];
    let half = (SSIM_WINDOW / 2) as f64;
    for (i, v) in k.iter_mut().enumerate() {
        let d = i as f64 - half;
        *v = (-d * d / (2.0 * SSIM_SIGMA * SSIM_SIGMA)).exp();
    }
    let s: f64 = k.iter().sum();
    k.map(|v| v / s)
}

/// Separable "valid" filtering with the SSIM window.
fn filter_valid(data: &[f64], rows: usize, cols: usize, k: &[f64; SSIM_WINDOW]) -> (Vec<f64>, usize, usize) {
    let w = SSIM_WINDOW;
    let oc = cols + 1 - w;
    let or = rows + 1 - w;
    let mut tmp = vec![0.0; rows * oc];
    for r in 0..rows {
        let row = &data[r * cols..(r + 1) * cols];
        for c in 0..oc {
            tmp[r * oc + c] = (0..w).map(|i| k[i] * row[c + i]).sum();
        }
    }
    let mut out = vec![0.0; or * oc];
    for r in 0..or {
        for c in 0..oc {
            out[r * oc + c] = (0..w).map(|i| k[i] * tmp[(r + i) * oc + c]).sum();
        }
    }
    (out, or, oc)
}

/// Mean SSIM over all full windows, for an explicit dynamic range.
pub fn ssim_with_range(a: &ScalarImage, b: &ScalarImage, range: f64) -> Result<f64> {
    check_shape(a.shape(), b.shape())?;
    if !(range > 0.0) {
        return Err(Error::Parameter(format!("dynamic range must be positive, got {range}")));
    }
    let (rows, cols) = a.shape();
    if rows < SSIM_WINDOW || cols < SSIM_WINDOW {
        return Err(Error::Parameter(format!(
            "SSIM needs at least {SSIM_WINDOW}x{SSIM_WINDOW} pixels, got {rows}x{cols}"
        )));
    }
    if a == b {
        return Ok(1.0);
    }
    let k = gaussian_kernel();
    let x = a.data();
    let y = b.data();
    let xx: Vec<f64> = x.iter().map(|v| v * v).collect();
    let yy: Vec<f64> = y.iter().map(|v| v * v).collect();
    let xy: Vec<f64> = x.iter().zip(y).map(|(u, v)| u * v).collect();
    let (mx, _, _) = filter_valid(x, rows, cols, &k);
    let (my, _, _) = filter_valid(y, rows, cols, &k);
    let (sxx, _, _) = filter_valid(&xx, rows, cols, &k);
    let (syy, _, _) = filter_valid(&yy, rows, cols, &k);
    let (sxy, _, _) = filter_valid(&xy, rows, cols, &k);
    let c1 = (SSIM_K1 * range).powi(2);
    let c2 = (SSIM_K2 * range).powi(2);
    let mut acc = 0.0;
    for i in 0..mx.len() {
        let (ux, uy) = (mx[i], my[i]);
        let vx = sxx[i] - ux * ux;
        let vy = syy[i] - uy * uy;
        let cov = sxy[i] - ux * uy;
        acc += ((2.0 * ux * uy + c1) * (2.0 * cov + c2)) / ((ux * ux + uy * uy + c1) * (vx + vy + c2));
    }
    Ok(acc / mx.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Straight-line SSIM: explicit 2-D window sums per output pixel.
    fn ssim_oracle(a: &ScalarImage, b: &ScalarImage, range: f64) -> f64 {
        let w = 11;
        let mut g = vec![vec![0.0; w]; w];
        let mut total = 0.0;
        for i in 0..w {
            for j in 0..w {
                let (di, dj) = (i as f64 - 5.0, j as f64 - 5.0);
                g[i][j] = (-(di * di + dj * dj) / 4.5).exp();
                total += g[i][j];
            }
        }
        let (c1, c2) = ((0.01 * range).powi(2), (0.03 * range).powi(2));
        let (rows, cols) = a.shape();
        let mut acc = 0.0;
        let mut count = 0;
        for r in 0..=rows - w {
            for c in 0..=cols - w {
                let (mut ux, mut uy) = (0.0, 0.0);
                for i in 0..w {
                    for j in 0..w {
                        let wt = g[i][j] / total;
                        ux += wt * a.get(r + i, c + j);
                        uy += wt * b.get(r + i, c + j);
                    }
                }
                let (mut vx, mut vy, mut cv) = (0.0, 0.0, 0.0);
                for i in 0..w {
                    for j in 0..w {
                        let wt = g[i][j] / total;
                        let (dx, dy) = (a.get(r + i, c + j) - ux, b.get(r + i, c + j) - uy);
                        vx += wt * dx * dx;
                        vy += wt * dy * dy;
                        cv += wt * dx * dy;
                    }
                }
                acc += ((2.0 * ux * uy + c1) * (2.0 * cv + c2)) / ((ux * ux + uy * uy + c1) * (vx + vy + c2));
                count += 1;
            }
        }
        acc / count as f64
    }

    #[test]
    fn snr_cases() {
        let one = ScalarImage::filled(2, 2, 1.0);
        assert_eq!(snr(&one, &one).unwrap(), f64::INFINITY);
        assert!((snr(&one, &ScalarImage::filled(2, 2, 0.9)).unwrap() - 20.0).abs() < 1e-9);
        assert!(snr(&ScalarImage::zeros(2, 2), &one).is_err());
        assert_eq!(snr(&one, &ScalarImage::zeros(2, 2)).unwrap(), 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(70);
        let r = ScalarImage::from_fn(16, 16, |_, _| rng.random_range(0.0..1.0));
        let e = ScalarImage::from_fn(16, 16, |_, _| rng.random_range(-0.1..0.1));
        let rec1 = r.zip_map(&e, |a, b| a + b).unwrap();
        let rec2 = r.zip_map(&e, |a, b| a + 0.5 * b).unwrap();
        let gain = snr(&r, &rec2).unwrap() - snr(&r, &rec1).unwrap();
        assert!((gain - 20.0 * 2f64.log10()).abs() < 1e-9);
        let c = 3.7;
        let scaled = snr(&r.map(|v| c * v), &rec1.map(|v| c * v)).unwrap();
        assert!((scaled - snr(&r, &rec1).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn psnr_cases() {
        let r = ScalarImage::from_fn(10, 10, |i, j| if (i + j) % 2 == 0 { 1.0 } else { 0.5 });
        assert_eq!(psnr(&r, &r).unwrap(), f64::INFINITY);
        let rec = r.map(|v| v + 0.1);
        assert!((psnr(&r, &rec).unwrap() - 20.0).abs() < 1e-9);
        let scaled = psnr(&r.map(|v| 4.0 * v), &rec.map(|v| 4.0 * v)).unwrap();
        assert!((scaled - 20.0).abs() < 1e-9);
    }

    #[test]
    fn ssim_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(71);
        let a = ScalarImage::from_fn(24, 20, |_, _| rng.random_range(0.0..1.0));
        assert_eq!(ssim(&a, &a).unwrap(), 1.0);
        let c = ScalarImage::filled(16, 16, 0.3);
        assert_eq!(ssim(&c, &c).unwrap(), 1.0);
        let d = ScalarImage::filled(16, 16, 0.6);
        let v = ssim(&c, &d).unwrap();
        assert!(v.is_finite() && v < 1.0);
        let b = ScalarImage::from_fn(24, 20, |r, cc| a.get(r, cc) * 0.7 + rng.random_range(0.0..0.3));
        let got = ssim(&a, &b).unwrap();
        let range = a.max() - a.min();
        assert!((got - ssim_oracle(&a, &b, range)).abs() < 1e-6);
        assert!((-1.0..=1.0).contains(&got));
        // symmetric once the range is fixed
        let ab = ssim_with_range(&a, &b, 1.0).unwrap();
        let ba = ssim_with_range(&b, &a, 1.0).unwrap();
        assert!((ab - ba).abs() < 1e-12);
        assert!(ssim(&a, &ScalarImage::zeros(3, 3)).is_err());
    }
}
