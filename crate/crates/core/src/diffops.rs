//! Discrete derivative filters with periodic boundaries, their adjoints, and
//! the per-pixel eigen-decomposition of symmetric 2x2 matrix fields.
//!
//! Coordinates: `x` runs along columns, `y` along rows. Every filter is a
//! circular convolution, so the adjoint is convolution with the flipped
//! stencil and the pair satisfies `<D s, v> = <s, D^T v>` exactly up to
//! rounding.

use crate::image::{ScalarImage, SymMatImage, VectorImage2};

/// A compact filter: `(d * s)(row, col) = sum w * s(row + dr, col + dc)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stencil {
    pub taps: &'static [(isize, isize, f64)],
}

/// The five fixed derivative stencils.
#[derive(Debug, Clone, Copy)]
pub struct DerivativeStencils;

impl DerivativeStencils {
    /// Backward difference along x: `s(x, y) - s(x-1, y)`.
    pub const DX: Stencil = Stencil {
        taps: &[(0, 0, 1.0), (0, -1, -1.0)],
    };
    /// Backward difference along y: `s(x, y) - s(x, y-1)`.
    pub const DY: Stencil = Stencil {
        taps: &[(0, 0, 1.0), (-1, 0, -1.0)],
    };
    /// Centered second difference along x.
    pub const DXX: Stencil = Stencil {
        taps: &[(0, -1, 1.0), (0, 0, -2.0), (0, 1, 1.0)],
    };
    /// Centered second difference along y.
    pub const DYY: Stencil = Stencil {
        taps: &[(-1, 0, 1.0), (0, 0, -2.0), (1, 0, 1.0)],
    };
    /// 2x2 cross stencil `s(x,y) + s(x-1,y-1) - s(x-1,y) - s(x,y-1)`.
    pub const DXY: Stencil = Stencil {
        taps: &[(0, 0, 1.0), (-1, -1, 1.0), (0, -1, -1.0), (-1, 0, -1.0)],
    };

    pub const ALL: [Stencil; 5] = [Self::DX, Self::DY, Self::DXX, Self::DYY, Self::DXY];
}

impl Stencil {
    pub fn coefficient_sum(&self) -> f64 {
        self.taps.iter().map(|t| t.2).sum()
    }

    /// Circular convolution with the stencil.
    pub fn apply(&self, s: &ScalarImage) -> ScalarImage {
        let mut out = ScalarImage::zeros(s.rows(), s.cols());
        self.accumulate(s, &mut out, 1);
        out
    }

    /// Convolution with the flipped stencil (the adjoint of [`Stencil::apply`]).
    pub fn apply_adjoint(&self, v: &ScalarImage) -> ScalarImage {
        let mut out = ScalarImage::zeros(v.rows(), v.cols());
        self.accumulate(v, &mut out, -1);
        out
    }

    /// `out += stencil (*) input`, with offsets multiplied by `sign`.
    pub(crate) fn accumulate(&self, input: &ScalarImage, out: &mut ScalarImage, sign: isize) {
        let (rows, cols) = input.shape();
        let src = input.data();
        let dst = out.data_mut();
        for &(dr, dc, w) in self.taps {
            let dr = (sign * dr).rem_euclid(rows as isize) as usize;
            let dc = (sign * dc).rem_euclid(cols as isize) as usize;
            for r in 0..rows {
                let sr = (r + dr) % rows;
                let src_row = &src[sr * cols..(sr + 1) * cols];
                let dst_row = &mut dst[r * cols..(r + 1) * cols];
                // split at the wrap point so the inner loops stay branch free
                let split = cols - dc;
                for (d, s) in dst_row[..split].iter_mut().zip(&src_row[dc..]) {
                    *d += w * s;
                }
                for (d, s) in dst_row[split..].iter_mut().zip(&src_row[..dc]) {
                    *d += w * s;
                }
            }
        }
    }
}

/// Discrete gradient `(d_x * s, d_y * s)`.
pub fn grad(s: &ScalarImage) -> VectorImage2 {
    VectorImage2 {
        x: DerivativeStencils::DX.apply(s),
        y: DerivativeStencils::DY.apply(s),
    }
}

/// `d_x^T * v.x + d_y^T * v.y`.
pub fn grad_adjoint(v: &VectorImage2) -> ScalarImage {
    let mut out = ScalarImage::zeros(v.x.rows(), v.x.cols());
    DerivativeStencils::DX.accumulate(&v.x, &mut out, -1);
    DerivativeStencils::DY.accumulate(&v.y, &mut out, -1);
    out
}

/// Discrete Hessian packed as `(d_xx * s, d_yy * s, d_xy * s)`.
pub fn hess(s: &ScalarImage) -> SymMatImage {
    SymMatImage {
        xx: DerivativeStencils::DXX.apply(s),
        yy: DerivativeStencils::DYY.apply(s),
        xy: DerivativeStencils::DXY.apply(s),
    }
}

/// Adjoint of [`hess`] under the packed inner product.
pub fn hess_adjoint(h: &SymMatImage) -> ScalarImage {
    let mut out = ScalarImage::zeros(h.xx.rows(), h.xx.cols());
    DerivativeStencils::DXX.accumulate(&h.xx, &mut out, -1);
    DerivativeStencils::DYY.accumulate(&h.yy, &mut out, -1);
    DerivativeStencils::DXY.accumulate(&h.xy, &mut out, -1);
    out
}

/// Eigenvalues `(l1, l2)` of `[[a, b], [b, c]]` with `l1 >= l2`.
#[inline]
pub fn eig2(a: f64, c: f64, b: f64) -> (f64, f64) {
    let mean = 0.5 * (a + c);
    let radius = (0.5 * (a - c)).hypot(b);
    (mean + radius, mean - radius)
}

/// Angle of the leading eigenvector `[cos t, sin t]`, in `(-pi/2, pi/2]`.
/// Isotropic matrices map to `0`.
#[inline]
pub fn eig2_angle(a: f64, c: f64, b: f64) -> f64 {
    let t = 0.5 * (2.0 * b).atan2(a - c);
    // atan2(+0, negative) = pi gives pi/2; atan2(-0, negative) = -pi must too
    if t <= -std::f64::consts::FRAC_PI_2 {
        t + std::f64::consts::PI
    } else {
        t
    }
}

/// Packed `R(t) diag(l1, l2) R(t)^T` as `(xx, yy, xy)`.
#[inline]
pub fn eig2_compose(l1: f64, l2: f64, theta: f64) -> (f64, f64, f64) {
    let (s, c) = theta.sin_cos();
    (l1 * c * c + l2 * s * s, l1 * s * s + l2 * c * c, (l1 - l2) * c * s)
}

/// Per-pixel eigenvalue images `(Lambda1, Lambda2)`, `Lambda1 >= Lambda2`.
pub fn eig_vals(v: &SymMatImage) -> (ScalarImage, ScalarImage) {
    let (rows, cols) = v.xx.shape();
    let mut l1 = ScalarImage::zeros(rows, cols);
    let mut l2 = ScalarImage::zeros(rows, cols);
    for i in 0..rows * cols {
        let (a, b) = eig2(v.xx.data()[i], v.yy.data()[i], v.xy.data()[i]);
        l1.data_mut()[i] = a;
        l2.data_mut()[i] = b;
    }
    (l1, l2)
}

pub fn eig_angle(v: &SymMatImage) -> ScalarImage {
    let (rows, cols) = v.xx.shape();
    let mut out = ScalarImage::zeros(rows, cols);
    for (i, o) in out.data_mut().iter_mut().enumerate() {
        *o = eig2_angle(v.xx.data()[i], v.yy.data()[i], v.xy.data()[i]);
    }
    out
}

pub fn eig_reconstruct(l1: &ScalarImage, l2: &ScalarImage, theta: &ScalarImage) -> SymMatImage {
    assert_eq!(l1.shape(), l2.shape(), "eigenvalue images differ in shape");
    assert_eq!(l1.shape(), theta.shape(), "angle image differs in shape");
    let (rows, cols) = l1.shape();
    let mut out = SymMatImage::zeros(rows, cols);
    for i in 0..rows * cols {
        let (xx, yy, xy) = eig2_compose(l1.data()[i], l2.data()[i], theta.data()[i]);
        out.xx.data_mut()[i] = xx;
        out.yy.data_mut()[i] = yy;
        out.xy.data_mut()[i] = xy;
    }
    out
}

/// Canonical second derivatives with their Laplacian/discriminant parts.
#[derive(Debug, Clone)]
pub struct CanonicalSecondDerivatives {
    pub h_plus: ScalarImage,
    pub h_minus: ScalarImage,
    pub laplacian: ScalarImage,
    pub discriminant: ScalarImage,
}

/// Eigenvalues of the discrete Hessian, `H+ = (L + C)/2`, `H- = (L - C)/2`.
pub fn csd(s: &ScalarImage) -> CanonicalSecondDerivatives {
    let h = hess(s);
    let (h_plus, h_minus) = eig_vals(&h);
    let laplacian = h.xx.zip_map(&h.yy, |a, b| a + b).expect("same shape");
    let (rows, cols) = s.shape();
    let mut discriminant = ScalarImage::zeros(rows, cols);
    for (i, d) in discriminant.data_mut().iter_mut().enumerate() {
        let diff = h.xx.data()[i] - h.yy.data()[i];
        *d = diff.hypot(2.0 * h.xy.data()[i]);
    }
    CanonicalSecondDerivatives {
        h_plus,
        h_minus,
        laplacian,
        discriminant,
    }
}
