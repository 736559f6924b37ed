//! Pixel-grid containers and the pixelwise algebra shared by every operator.
//!
//! Three field kinds are used: scalar images, 2-vector images (gradients) and
//! packed symmetric 2x2 matrix images (Hessians, stored as `xx, yy, xy`).
//! All storage is row-major `f64`.

use serde::{Deserialize, Serialize};

use crate::error::{check_shape, Error, Result};

/// Real-valued `rows x cols` image, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalarImage {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl ScalarImage {
    /// Wraps `data`, checking the length and that every value is finite.
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Parameter(format!(
                "image dimensions must be positive, got {rows}x{cols}"
            )));
        }
        if data.len() != rows * cols {
            return Err(Error::Parameter(format!(
                "data length {} does not match {rows}x{cols}",
                data.len()
            )));
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("non-finite pixel at index {i}")));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::filled(rows, cols, 0.0)
    }

    pub fn filled(rows: usize, cols: usize, value: f64) -> Self {
        assert!(rows > 0 && cols > 0, "image dimensions must be positive");
        Self {
            rows,
            cols,
            data: vec![value; rows * cols],
        }
    }

    /// Builds an image from `f(row, col)`.
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        assert!(rows > 0 && cols > 0, "image dimensions must be positive");
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.cols + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        self.data[row * self.cols + col] = value;
    }

    /// Reads with periodic wrap-around on both axes.
    #[inline]
    pub fn get_wrapped(&self, row: isize, col: isize) -> f64 {
        let r = row.rem_euclid(self.rows as isize) as usize;
        let c = col.rem_euclid(self.cols as isize) as usize;
        self.data[r * self.cols + c]
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Pixelwise combination of two images of identical shape.
    pub fn zip_map(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        check_shape(self.shape(), other.shape())?;
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect(),
        })
    }

    pub fn max(&self) -> f64 {
        self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn sum(&self) -> f64 {
        self.data.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        self.sum() / self.data.len() as f64
    }

    /// Rotates the image by 90 degrees counter-clockwise.
    pub fn rotate90(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self.get(c, self.cols - 1 - r))
    }
}

/// Per-pixel 2-vector field, e.g. a discrete gradient `(d_x * s, d_y * s)`.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorImage2 {
    pub x: ScalarImage,
    pub y: ScalarImage,
}

impl VectorImage2 {
    pub fn new(x: ScalarImage, y: ScalarImage) -> Result<Self> {
        check_shape(x.shape(), y.shape())?;
        Ok(Self { x, y })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            x: ScalarImage::zeros(rows, cols),
            y: ScalarImage::zeros(rows, cols),
        }
    }
}

/// Per-pixel symmetric 2x2 matrix `[[xx, xy], [xy, yy]]` in packed form.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatImage {
    pub xx: ScalarImage,
    pub yy: ScalarImage,
    pub xy: ScalarImage,
}

impl SymMatImage {
    pub fn new(xx: ScalarImage, yy: ScalarImage, xy: ScalarImage) -> Result<Self> {
        check_shape(xx.shape(), yy.shape())?;
        check_shape(xx.shape(), xy.shape())?;
        Ok(Self { xx, yy, xy })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            xx: ScalarImage::zeros(rows, cols),
            yy: ScalarImage::zeros(rows, cols),
            xy: ScalarImage::zeros(rows, cols),
        }
    }

    /// Copy with the off-diagonal slot doubled. Pairing a packed field with
    /// this gives the Frobenius inner product of the underlying matrices.
    pub fn frobenius_dual(&self) -> Self {
        Self {
            xx: self.xx.clone(),
            yy: self.yy.clone(),
            xy: self.xy.map(|v| 2.0 * v),
        }
    }
}

/// Common view over the three field kinds as lists of scalar components.
pub trait Field: Clone {
    fn components(&self) -> Vec<&ScalarImage>;
    fn components_mut(&mut self) -> Vec<&mut ScalarImage>;

    fn shape(&self) -> (usize, usize) {
        self.components()[0].shape()
    }

    /// `self += alpha * other`.
    fn axpy(&mut self, alpha: f64, other: &Self) {
        for (a, b) in self.components_mut().into_iter().zip(other.components()) {
            for (u, v) in a.data_mut().iter_mut().zip(b.data()) {
                *u += alpha * v;
            }
        }
    }

    fn scale(&mut self, alpha: f64) {
        for a in self.components_mut() {
            a.data_mut().iter_mut().for_each(|v| *v *= alpha);
        }
    }

    fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.axpy(-1.0, other);
        out
    }
}

impl Field for ScalarImage {
    fn components(&self) -> Vec<&ScalarImage> {
        vec![self]
    }
    fn components_mut(&mut self) -> Vec<&mut ScalarImage> {
        vec![self]
    }
}

impl Field for VectorImage2 {
    fn components(&self) -> Vec<&ScalarImage> {
        vec![&self.x, &self.y]
    }
    fn components_mut(&mut self) -> Vec<&mut ScalarImage> {
        vec![&mut self.x, &mut self.y]
    }
}

impl Field for SymMatImage {
    fn components(&self) -> Vec<&ScalarImage> {
        vec![&self.xx, &self.yy, &self.xy]
    }
    fn components_mut(&mut self) -> Vec<&mut ScalarImage> {
        vec![&mut self.xx, &mut self.yy, &mut self.xy]
    }
}

/// `sum_r <a(r), b(r)>` over packed components (off-diagonal counted once).
pub fn inner_product<F: Field>(a: &F, b: &F) -> Result<f64> {
    check_shape(a.shape(), b.shape())?;
    Ok(a.components()
        .into_iter()
        .zip(b.components())
        .map(|(u, v)| dot(u.data(), v.data()))
        .sum())
}

pub fn norm2<F: Field>(a: &F) -> f64 {
    a.components()
        .into_iter()
        .map(|u| dot(u.data(), u.data()))
        .sum::<f64>()
        .sqrt()
}

/// Per-pixel Euclidean norm of the packed components.
pub fn pointwise_norm<F: Field>(v: &F) -> ScalarImage {
    let comps = v.components();
    let (rows, cols) = comps[0].shape();
    let mut out = ScalarImage::zeros(rows, cols);
    for (i, o) in out.data_mut().iter_mut().enumerate() {
        *o = comps.iter().map(|c| c.data()[i] * c.data()[i]).sum::<f64>().sqrt();
    }
    out
}

/// Multiplies every component of `v` pixelwise by `z`.
pub fn kron_scale<F: Field>(z: &ScalarImage, v: &F) -> Result<F> {
    check_shape(z.shape(), v.shape())?;
    let mut out = v.clone();
    for comp in out.components_mut() {
        for (u, w) in comp.data_mut().iter_mut().zip(z.data()) {
            *u *= w;
        }
    }
    Ok(out)
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
