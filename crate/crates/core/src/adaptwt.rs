//! Spatially adaptive weights from a guide image.
//!
//! Per pixel the weights minimize `sum_i beta_i Y_i - tau log(beta_1 beta_2 beta_3)`
//! on the simplex, where `Y = (|grad|, |H+|, |H-|)` of the guide. The minimizer
//! is `beta_i = tau / (Y_i + phi)` with the multiplier `phi` fixed by
//! `sum beta_i = 1`; the sum is monotone in `phi`, so `phi` is bracketed in
//! `[tau - Y_min, 3 tau - Y_min]` and bisected.

use crate::diffops::{csd, grad, hess};
use crate::error::{check_shape, Error, Result};
use crate::image::{pointwise_norm, ScalarImage};

pub const BISECTION_TOL: f64 = 1e-12;
pub const BISECTION_MAX_ITERS: usize = 200;

/// Default `tau` as a fraction of the mean guide-derivative magnitude.
pub const DEFAULT_RELATIVE_TAU: f64 = 1.0;

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTriple {
    pub grad_mag: ScalarImage,
    pub h_plus_mag: ScalarImage,
    pub h_minus_mag: ScalarImage,
}

impl FeatureTriple {
    pub fn shape(&self) -> (usize, usize) {
        self.grad_mag.shape()
    }

    /// Mean over pixels of `(Y1 + Y2 + Y3) / 3`.
    pub fn mean_magnitude(&self) -> f64 {
        (self.grad_mag.mean() + self.h_plus_mag.mean() + self.h_minus_mag.mean()) / 3.0
    }

    /// Absolute `tau` from a dimensionless fraction of the mean magnitude.
    /// A flat guide has no scale, so the fraction is used as is.
    pub fn relative_tau(&self, fraction: f64) -> f64 {
        let m = self.mean_magnitude();
        if m > 0.0 {
            fraction * m
        } else {
            fraction
        }
    }

    /// Features for the equal-CSD-weight variant: both second-order features
    /// replaced by their mean, which forces `beta_2 = beta_3`.
    pub fn with_equal_csd(&self) -> Self {
        let avg = self
            .h_plus_mag
            .zip_map(&self.h_minus_mag, |a, b| 0.5 * (a + b))
            .expect("same shape");
        Self {
            grad_mag: self.grad_mag.clone(),
            h_plus_mag: avg.clone(),
            h_minus_mag: avg,
        }
    }
}

/// `Y1 = |grad guide|`, `Y2 = |Lambda1(hess guide)|`, `Y3 = |Lambda2(hess guide)|`.
pub fn compute_features(guide: &ScalarImage) -> FeatureTriple {
    let c = csd(guide);
    FeatureTriple {
        grad_mag: pointwise_norm(&grad(guide)),
        h_plus_mag: c.h_plus.map(f64::abs),
        h_minus_mag: c.h_minus.map(f64::abs),
    }
}

/// Per-pixel simplex weights for gradient, `|H+|` and `|H-|`.
#[derive(Debug, Clone, PartialEq)]
pub struct AdaptiveWeights {
    pub beta1: ScalarImage,
    pub beta2: ScalarImage,
    pub beta3: ScalarImage,
}

impl AdaptiveWeights {
    pub fn constant(rows: usize, cols: usize, b1: f64, b2: f64, b3: f64) -> Self {
        Self {
            beta1: ScalarImage::filled(rows, cols, b1),
            beta2: ScalarImage::filled(rows, cols, b2),
            beta3: ScalarImage::filled(rows, cols, b3),
        }
    }

    pub fn shape(&self) -> (usize, usize) {
        self.beta1.shape()
    }

    /// Largest `|beta1 + beta2 + beta3 - 1|` over pixels.
    pub fn simplex_defect(&self) -> f64 {
        (0..self.beta1.len())
            .map(|i| (self.beta1.data()[i] + self.beta2.data()[i] + self.beta3.data()[i] - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

/// Output of [`solve_weights`] together with the per-pixel multiplier.
#[derive(Debug, Clone)]
pub struct WeightSolution {
    pub weights: AdaptiveWeights,
    pub phi: ScalarImage,
}

/// Solves the single-pixel problem. Returns `(beta, phi)`.
pub fn solve_pixel(y: [f64; 3], tau: f64) -> ([f64; 3], f64) {
    let total = |phi: f64| y.iter().map(|&yi| tau / (yi + phi)).sum::<f64>();
    let y_min = y.iter().copied().fold(f64::INFINITY, f64::min);
    let mut lo = tau - y_min;
    let mut hi = 3.0 * tau - y_min;
    // the bracket is exact in exact arithmetic; widen if rounding disagrees
    while total(hi) > 1.0 {
        hi += hi - lo;
    }
    let mut phi = 0.5 * (lo + hi);
    for _ in 0..BISECTION_MAX_ITERS {
        phi = 0.5 * (lo + hi);
        let s = total(phi);
        if (s - 1.0).abs() <= BISECTION_TOL || phi == lo || phi == hi {
            break;
        }
        if s > 1.0 {
            lo = phi;
        } else {
            hi = phi;
        }
    }
    ([tau / (y[0] + phi), tau / (y[1] + phi), tau / (y[2] + phi)], phi)
}

/// Weights `beta_i = tau / (Y_i + phi)` for every pixel.
pub fn solve_weights(features: &FeatureTriple, tau: f64) -> Result<AdaptiveWeights> {
    solve_weights_with_phi(features, tau).map(|s| s.weights)
}

pub fn solve_weights_with_phi(features: &FeatureTriple, tau: f64) -> Result<WeightSolution> {
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(Error::Parameter(format!("tau must be positive, got {tau}")));
    }
    let (rows, cols) = features.shape();
    let mut w = AdaptiveWeights::constant(rows, cols, 0.0, 0.0, 0.0);
    let mut phi = ScalarImage::zeros(rows, cols);
    for i in 0..rows * cols {
        let y = [
            features.grad_mag.data()[i],
            features.h_plus_mag.data()[i],
            features.h_minus_mag.data()[i],
        ];
        let (b, p) = solve_pixel(y, tau);
        w.beta1.data_mut()[i] = b[0];
        w.beta2.data_mut()[i] = b[1];
        w.beta3.data_mut()[i] = b[2];
        phi.data_mut()[i] = p;
    }
    Ok(WeightSolution { weights: w, phi })
}

/// `(gamma, zeta)` reparametrization: `beta1 = gamma`,
/// `beta2 = (1 - gamma) zeta`, `beta3 = (1 - gamma)(1 - zeta)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransformedWeights {
    pub gamma: ScalarImage,
    pub zeta: ScalarImage,
}

impl TransformedWeights {
    pub fn constant(rows: usize, cols: usize, gamma: f64, zeta: f64) -> Self {
        Self {
            gamma: ScalarImage::filled(rows, cols, gamma),
            zeta: ScalarImage::filled(rows, cols, zeta),
        }
    }

    pub fn shape(&self) -> (usize, usize) {
        self.gamma.shape()
    }

    pub fn inverse(&self) -> AdaptiveWeights {
        let beta2 = self
            .gamma
            .zip_map(&self.zeta, |g, z| (1.0 - g) * z)
            .expect("same shape");
        let beta3 = self
            .gamma
            .zip_map(&self.zeta, |g, z| (1.0 - g) * (1.0 - z))
            .expect("same shape");
        AdaptiveWeights {
            beta1: self.gamma.clone(),
            beta2,
            beta3,
        }
    }
}

/// `zeta` where `beta2 + beta3 = 0` is set to `1/2`.
pub fn transform(w: &AdaptiveWeights) -> TransformedWeights {
    let zeta = w
        .beta2
        .zip_map(&w.beta3, |b2, b3| {
            let s = b2 + b3;
            if s > 0.0 {
                b2 / s
            } else {
                0.5
            }
        })
        .expect("same shape");
    TransformedWeights {
        gamma: w.beta1.clone(),
        zeta,
    }
}

/// `sum_r beta1 |grad s| + beta2 |H+ s| + beta3 |H- s|`.
pub fn eval_adaptive_reg(s: &ScalarImage, w: &AdaptiveWeights) -> Result<f64> {
    check_shape(s.shape(), w.shape())?;
    let g = pointwise_norm(&grad(s));
    let c = csd(s);
    let mut acc = 0.0;
    for i in 0..s.len() {
        acc += w.beta1.data()[i] * g.data()[i]
            + w.beta2.data()[i] * c.h_plus.data()[i].abs()
            + w.beta3.data()[i] * c.h_minus.data()[i].abs();
    }
    Ok(acc)
}

/// `-tau sum_r log(beta1 beta2 beta3)`.
pub fn eval_barrier(w: &AdaptiveWeights, tau: f64) -> Result<f64> {
    let mut acc = 0.0;
    for i in 0..w.beta1.len() {
        let (a, b, c) = (w.beta1.data()[i], w.beta2.data()[i], w.beta3.data()[i]);
        if !(a > 0.0 && b > 0.0 && c > 0.0) {
            return Err(Error::Domain(format!(
                "barrier undefined at pixel {i}: weights ({a}, {b}, {c})"
            )));
        }
        acc += (a * b * c).ln();
    }
    Ok(if tau == 0.0 { 0.0 } else { -tau * acc })
}

/// First-order total variation `sum |grad s|`.
pub fn tv1_value(s: &ScalarImage) -> f64 {
    pointwise_norm(&grad(s)).sum()
}

/// Second-order total variation `sum sqrt(dxx^2 + dyy^2 + 2 dxy^2)`.
pub fn tv2_value(s: &ScalarImage) -> f64 {
    let h = hess(s);
    (0..s.len())
        .map(|i| {
            let (a, b, c) = (h.xx.data()[i], h.yy.data()[i], h.xy.data()[i]);
            (a * a + b * b + 2.0 * c * c).sqrt()
        })
        .sum()
}

/// Hessian-Schatten (nuclear) value `sum |H+| + |H-|`.
pub fn hs_value(s: &ScalarImage) -> f64 {
    let c = csd(s);
    c.h_plus
        .data()
        .iter()
        .zip(c.h_minus.data())
        .map(|(a, b)| a.abs() + b.abs())
        .sum()
}
