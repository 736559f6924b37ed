//! Closed-form proximal maps for the ADMM splitting variables.
//!
//! Symmetric-matrix fields are measured in the Frobenius norm, where the
//! off-diagonal entry counts twice. Eigenvalue shrinkage is the exact prox
//! only in that metric.

use serde::{Deserialize, Serialize};

use crate::diffops::{eig2, eig2_angle, eig2_compose};
use crate::error::{check_shape, Error, Result};
use crate::image::{ScalarImage, SymMatImage, VectorImage2};

/// Closed interval for the pixel-value constraint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoxRange {
    pub lo: f64,
    pub hi: f64,
}

impl BoxRange {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo < hi) {
            return Err(Error::Parameter(format!("box needs lo < hi, got [{lo}, {hi}]")));
        }
        Ok(Self { lo, hi })
    }

    /// Effectively no constraint.
    pub fn unbounded() -> Self {
        Self {
            lo: f64::NEG_INFINITY,
            hi: f64::INFINITY,
        }
    }

    /// `[0, 1.05 * max(guide)]`, falling back to `[0, 1.05]` for a non-positive guide.
    pub fn for_guide(guide: &ScalarImage) -> Self {
        let m = guide.max();
        let hi = if m > 0.0 { 1.05 * m } else { 1.05 };
        Self { lo: 0.0, hi }
    }

    #[inline]
    pub fn clamp(&self, v: f64) -> f64 {
        v.max(self.lo).min(self.hi)
    }
}

impl Default for BoxRange {
    fn default() -> Self {
        Self { lo: 0.0, hi: 1.05 }
    }
}

#[inline]
pub fn scalar_soft_threshold(x: f64, t: f64) -> f64 {
    if x > t {
        x - t
    } else if x < -t {
        x + t
    } else {
        0.0
    }
}

/// Block shrinkage of a small vector: `v * max(0, 1 - t/|v|)`.
#[inline]
pub fn block_shrink<const K: usize>(v: [f64; K], t: f64) -> [f64; K] {
    let n = v.iter().map(|a| a * a).sum::<f64>().sqrt();
    if n <= t {
        return [0.0; K];
    }
    let f = 1.0 - t / n;
    v.map(|a| a * f)
}

/// Per-pixel minimizer of `t |y| + 1/2 |ybar - y|^2`.
pub fn prox_y(ybar: &VectorImage2, threshold: &ScalarImage) -> Result<VectorImage2> {
    check_shape(ybar.x.shape(), threshold.shape())?;
    let mut out = ybar.clone();
    for i in 0..threshold.len() {
        let [a, b] = block_shrink([ybar.x.data()[i], ybar.y.data()[i]], threshold.data()[i]);
        out.x.data_mut()[i] = a;
        out.y.data_mut()[i] = b;
    }
    Ok(out)
}

/// Shrunk eigenvalue pair. Separate thresholds can reorder the pair; the
/// ordered minimizer then sits on `mu1 = mu2`, at the mean shrunk by `t/2`.
#[inline]
pub fn shrink_eigenvalues(l1: f64, l2: f64, zeta: f64, t: f64) -> (f64, f64) {
    let m1 = scalar_soft_threshold(l1, t * zeta);
    let m2 = scalar_soft_threshold(l2, t * (1.0 - zeta));
    if m1 >= m2 {
        (m1, m2)
    } else {
        let m = scalar_soft_threshold(0.5 * (l1 + l2), 0.5 * t);
        (m, m)
    }
}

/// Single-pixel eigenvalue shrinkage on packed `(xx, yy, xy)`.
#[inline]
pub fn prox_z_pixel(a: f64, c: f64, b: f64, zeta: f64, t: f64) -> (f64, f64, f64) {
    let (l1, l2) = eig2(a, c, b);
    let theta = eig2_angle(a, c, b);
    let (m1, m2) = shrink_eigenvalues(l1, l2, zeta, t);
    eig2_compose(m1, m2, theta)
}

/// Per-pixel minimizer of `t zeta |L1(z)| + t (1 - zeta) |L2(z)| + 1/2 |zbar - z|_F^2`.
pub fn prox_z(zbar: &SymMatImage, zeta: &ScalarImage, threshold: &ScalarImage) -> Result<SymMatImage> {
    check_shape(zbar.xx.shape(), zeta.shape())?;
    check_shape(zbar.xx.shape(), threshold.shape())?;
    let mut out = zbar.clone();
    for i in 0..zeta.len() {
        let (xx, yy, xy) = prox_z_pixel(
            zbar.xx.data()[i],
            zbar.yy.data()[i],
            zbar.xy.data()[i],
            zeta.data()[i],
            threshold.data()[i],
        );
        out.xx.data_mut()[i] = xx;
        out.yy.data_mut()[i] = yy;
        out.xy.data_mut()[i] = xy;
    }
    Ok(out)
}

/// Single-pixel Frobenius block shrinkage, i.e. shrinkage of `(xx, yy, sqrt2 xy)`.
#[inline]
pub fn prox_frobenius_pixel(a: f64, c: f64, b: f64, t: f64) -> (f64, f64, f64) {
    let n = (a * a + c * c + 2.0 * b * b).sqrt();
    if n <= t {
        return (0.0, 0.0, 0.0);
    }
    let f = 1.0 - t / n;
    (a * f, c * f, b * f)
}

/// Per-pixel minimizer of `t |z|_F + 1/2 |zbar - z|_F^2` (second-order TV).
pub fn prox_z_frobenius(zbar: &SymMatImage, threshold: &ScalarImage) -> Result<SymMatImage> {
    check_shape(zbar.xx.shape(), threshold.shape())?;
    let mut out = zbar.clone();
    for i in 0..threshold.len() {
        let (xx, yy, xy) = prox_frobenius_pixel(
            zbar.xx.data()[i],
            zbar.yy.data()[i],
            zbar.xy.data()[i],
            threshold.data()[i],
        );
        out.xx.data_mut()[i] = xx;
        out.yy.data_mut()[i] = yy;
        out.xy.data_mut()[i] = xy;
    }
    Ok(out)
}

pub fn prox_x(xbar: &ScalarImage, range: &BoxRange) -> ScalarImage {
    xbar.map(|v| range.clamp(v))
}
