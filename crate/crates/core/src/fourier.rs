//! Masked 2-D DFT sampling operator, its adjoint, zero-filled inversion and
//! measurement simulation.
//!
//! Convention: the forward DFT is unnormalized and the inverse carries
//! `1/(rows*cols)`. The exact adjoint of the sampling operator is therefore
//! the *unnormalized* inverse DFT of the zero-filled sample array, i.e.
//! `rows*cols` times the zero-filled inversion.

use std::fmt;
use std::sync::Arc;

pub use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rustfft::{Fft, FftPlanner};

use crate::error::{check_shape, Error, Result};
use crate::image::ScalarImage;

/// Binary k-space mask in DFT layout (DC at `(0, 0)`).
#[derive(Clone, PartialEq)]
pub struct SamplingMask {
    rows: usize,
    cols: usize,
    bits: Vec<bool>,
    indices: Vec<usize>,
}

impl SamplingMask {
    /// Builds a mask from row-major bits. The DC position must be set.
    pub fn from_bits(rows: usize, cols: usize, bits: Vec<bool>) -> Result<Self> {
        if rows == 0 || cols == 0 || bits.len() != rows * cols {
            return Err(Error::Parameter(format!(
                "mask of {} bits cannot be {rows}x{cols}",
                bits.len()
            )));
        }
        if !bits[0] {
            return Err(Error::Parameter("mask must include the DC sample".into()));
        }
        let indices = bits.iter().enumerate().filter_map(|(i, &b)| b.then_some(i)).collect();
        Ok(Self {
            rows,
            cols,
            bits,
            indices,
        })
    }

    pub fn full(rows: usize, cols: usize) -> Self {
        Self::from_bits(rows, cols, vec![true; rows * cols]).expect("valid full mask")
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn sample_count(&self) -> usize {
        self.indices.len()
    }

    pub fn density(&self) -> f64 {
        self.indices.len() as f64 / self.bits.len() as f64
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    /// Raster indices of the set positions.
    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    #[inline]
    pub fn is_set(&self, row: usize, col: usize) -> bool {
        self.bits[row * self.cols + col]
    }

    /// The mask as a 0/1 image.
    pub fn to_image(&self) -> ScalarImage {
        ScalarImage::new(
            self.rows,
            self.cols,
            self.bits.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect(),
        )
        .expect("valid mask image")
    }
}

impl fmt::Debug for SamplingMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SamplingMask")
            .field("rows", &self.rows)
            .field("cols", &self.cols)
            .field("sample_count", &self.sample_count())
            .finish()
    }
}

/// Measured k-space values at the set positions of `mask`, raster order.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexSamples {
    pub mask: SamplingMask,
    pub values: Vec<Complex64>,
}

impl ComplexSamples {
    pub fn new(mask: SamplingMask, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != mask.sample_count() {
            return Err(Error::Parameter(format!(
                "{} values for a mask with {} samples",
                values.len(),
                mask.sample_count()
            )));
        }
        Ok(Self { mask, values })
    }

    pub fn shape(&self) -> (usize, usize) {
        self.mask.shape()
    }
}

/// Planned 2-D complex FFT of a fixed size.
#[derive(Clone)]
pub struct Fft2 {
    rows: usize,
    cols: usize,
    row_fwd: Arc<dyn Fft<f64>>,
    row_inv: Arc<dyn Fft<f64>>,
    col_fwd: Arc<dyn Fft<f64>>,
    col_inv: Arc<dyn Fft<f64>>,
}

impl Fft2 {
    pub fn new(rows: usize, cols: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            rows,
            cols,
            row_fwd: planner.plan_fft_forward(cols),
            row_inv: planner.plan_fft_inverse(cols),
            col_fwd: planner.plan_fft_forward(rows),
            col_inv: planner.plan_fft_inverse(rows),
        }
    }

    /// In-place unnormalized forward transform of a row-major buffer.
    pub fn forward(&self, buf: &mut [Complex64]) {
        self.run(buf, &self.row_fwd, &self.col_fwd);
    }

    /// In-place unnormalized inverse transform (no `1/(rows*cols)` factor).
    pub fn inverse_unnormalized(&self, buf: &mut [Complex64]) {
        self.run(buf, &self.row_inv, &self.col_inv);
    }

    fn run(&self, buf: &mut [Complex64], row: &Arc<dyn Fft<f64>>, col: &Arc<dyn Fft<f64>>) {
        assert_eq!(buf.len(), self.rows * self.cols);
        row.process(buf);
        let mut t = transpose(buf, self.rows, self.cols);
        col.process(&mut t);
        let back = transpose(&t, self.cols, self.rows);
        buf.copy_from_slice(&back);
    }
}

fn transpose(src: &[Complex64], rows: usize, cols: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); rows * cols];
    for r in 0..rows {
        for c in 0..cols {
            out[c * rows + r] = src[r * cols + c];
        }
    }
    out
}

/// The masked sampling operator `T` with cached FFT plans.
#[derive(Clone)]
pub struct SamplingOperator {
    fft: Fft2,
    mask: SamplingMask,
}

impl SamplingOperator {
    pub fn new(mask: SamplingMask) -> Self {
        Self {
            fft: Fft2::new(mask.rows(), mask.cols()),
            mask,
        }
    }

    pub fn mask(&self) -> &SamplingMask {
        &self.mask
    }

    pub fn fft(&self) -> &Fft2 {
        &self.fft
    }

    fn spectrum(&self, s: &ScalarImage) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = s.data().iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.fft.forward(&mut buf);
        buf
    }

    pub fn forward(&self, s: &ScalarImage) -> Result<Vec<Complex64>> {
        check_shape(self.mask.shape(), s.shape())?;
        let spec = self.spectrum(s);
        Ok(self.mask.indices().iter().map(|&i| spec[i]).collect())
    }

    fn zero_filled(&self, values: &[Complex64]) -> Vec<Complex64> {
        let mut buf = vec![Complex64::new(0.0, 0.0); self.mask.rows() * self.mask.cols()];
        for (&i, &v) in self.mask.indices().iter().zip(values) {
            buf[i] = v;
        }
        buf
    }

    /// `Re(T^H m)`.
    pub fn adjoint(&self, values: &[Complex64]) -> ScalarImage {
        let mut buf = self.zero_filled(values);
        self.fft.inverse_unnormalized(&mut buf);
        real_image(self.mask.rows(), self.mask.cols(), &buf, 1.0)
    }

    /// `Re(T^H T s)`, computed as mask multiplication in the Fourier domain.
    pub fn normal(&self, s: &ScalarImage) -> ScalarImage {
        let mut buf = self.spectrum(s);
        for (b, &keep) in buf.iter_mut().zip(self.mask.bits()) {
            if !keep {
                *b = Complex64::new(0.0, 0.0);
            }
        }
        self.fft.inverse_unnormalized(&mut buf);
        real_image(self.mask.rows(), self.mask.cols(), &buf, 1.0)
    }

    pub fn zero_fill_invert(&self, values: &[Complex64]) -> ScalarImage {
        let mut buf = self.zero_filled(values);
        self.fft.inverse_unnormalized(&mut buf);
        let n = (self.mask.rows() * self.mask.cols()) as f64;
        real_image(self.mask.rows(), self.mask.cols(), &buf, 1.0 / n)
    }
}

fn real_image(rows: usize, cols: usize, buf: &[Complex64], scale: f64) -> ScalarImage {
    let mut out = ScalarImage::zeros(rows, cols);
    for (o, v) in out.data_mut().iter_mut().zip(buf) {
        *o = v.re * scale;
    }
    out
}

/// Unnormalized DFT of `s` gathered at the mask positions.
pub fn apply_forward(s: &ScalarImage, mask: &SamplingMask) -> Result<ComplexSamples> {
    let op = SamplingOperator::new(mask.clone());
    let values = op.forward(s)?;
    Ok(ComplexSamples {
        mask: mask.clone(),
        values,
    })
}

/// Real part of the exact adjoint of [`apply_forward`].
pub fn apply_adjoint(m: &ComplexSamples) -> ScalarImage {
    SamplingOperator::new(m.mask.clone()).adjoint(&m.values)
}

/// Real part of the normalized inverse DFT of the zero-filled samples.
pub fn zero_fill_invert(m: &ComplexSamples) -> ScalarImage {
    SamplingOperator::new(m.mask.clone()).zero_fill_invert(&m.values)
}

/// Per-component noise standard deviation such that zero-filled inversion of
/// fully sampled noisy data reaches `target_psnr_db` against `reference`.
///
/// With complex white noise of deviation `sigma` on all `n` samples, the real
/// part of the normalized inverse has per-pixel variance `sigma^2 / n`, so
/// `sigma = peak * sqrt(n) * 10^(-psnr/20)` with `peak = max |reference|`.
pub fn calibrate_noise_sigma(reference: &ScalarImage, target_psnr_db: f64) -> Result<f64> {
    if target_psnr_db.is_nan() || target_psnr_db == f64::NEG_INFINITY {
        return Err(Error::Parameter(format!(
            "target PSNR must be a number, got {target_psnr_db}"
        )));
    }
    let peak = reference.max_abs();
    if peak == 0.0 {
        return Err(Error::DegenerateReference("reference image is all zeros"));
    }
    let n = reference.len() as f64;
    Ok(peak * n.sqrt() * 10f64.powf(-target_psnr_db / 20.0))
}

/// Noise-free samples of `reference` plus i.i.d. complex Gaussian noise with
/// deviation `sigma` per real/imaginary component, drawn from `seed`.
pub fn simulate_measurements(
    reference: &ScalarImage,
    mask: &SamplingMask,
    sigma: f64,
    seed: u64,
) -> Result<ComplexSamples> {
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(Error::Parameter(format!("noise sigma must be >= 0, got {sigma}")));
    }
    let mut m = apply_forward(reference, mask)?;
    if sigma > 0.0 {
        add_complex_noise(&mut m.values, sigma, seed);
    }
    Ok(m)
}

pub(crate) fn add_complex_noise(values: &mut [Complex64], sigma: f64, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, sigma).expect("finite sigma");
    for v in values.iter_mut() {
        let re = normal.sample(&mut rng);
        let im = normal.sample(&mut rng);
        *v += Complex64::new(re, im);
    }
}
