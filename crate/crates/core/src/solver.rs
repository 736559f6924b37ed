//! ADMM reconstruction with transformed adaptive weights.
//!
//! Splitting: `y = gamma . grad s`, `z = (1 - gamma) . hess s`, `x = s`, where
//! `s = E s_bar` lives in the range of the scale-`j` interpolator. The cycle is
//! y-prox, z-prox, x-prox, conjugate-gradient s-update, multiplier updates.
//! The s-update solves (divided by the penalty `c`)
//!
//! ```text
//! E^T [g^T g2 g + h^T W h2 h + I + (2/c) T^H T] E s_bar
//!     = E^T [g^T (gamma y~) + h^T W ((1-gamma) z~) + x~ + (2/c) T^H m]
//! ```
//!
//! with `g2 = gamma^2`, `h2 = (1-gamma)^2`, `v~ = v - v_hat/c` and `W` the
//! Frobenius pairing on symmetric matrices (off-diagonal doubled).

use std::time::Instant;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::adaptwt::{eval_adaptive_reg, transform, AdaptiveWeights, TransformedWeights};
use crate::diffops::{grad, grad_adjoint, hess, hess_adjoint};
use crate::error::{check_shape, Error, Result};
use crate::fourier::{ComplexSamples, Fft2, SamplingMask, SamplingOperator};
use crate::image::{dot, kron_scale, norm2, pointwise_norm, Field, ScalarImage, SymMatImage, VectorImage2};
use crate::multires::{interpolate, interpolate_adjoint, restrict};
use crate::proxops::{prox_x, prox_y, prox_z, prox_z_frobenius, BoxRange};

/// Default `lambda` per pixel: `lambda = DEFAULT_LAMBDA_REL * rows * cols`.
/// The data term is measured on unnormalized DFT samples, whose energy
/// grows with the pixel count.
pub const DEFAULT_LAMBDA_REL: f64 = 0.1;
/// Default penalty as a multiple of `lambda`.
pub const DEFAULT_PENALTY_REL: f64 = 3.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub lambda: f64,
    pub penalty_c: f64,
    pub max_admm_iters: usize,
    pub min_admm_iters: usize,
    pub primal_tol: f64,
    pub cg_tol: f64,
    pub cg_max_iters: usize,
    pub box_range: BoxRange,
    /// Evaluate `F + lambda R` after every iteration.
    pub record_cost: bool,
}

impl SolverConfig {
    /// Defaults for a `rows x cols` image normalized to `[0, 1]`.
    pub fn for_shape(rows: usize, cols: usize) -> Self {
        Self::with_relative_lambda(rows, cols, DEFAULT_LAMBDA_REL)
    }

    pub fn with_relative_lambda(rows: usize, cols: usize, lambda_rel: f64) -> Self {
        let lambda = lambda_rel * (rows * cols) as f64;
        Self {
            lambda,
            penalty_c: DEFAULT_PENALTY_REL * lambda,
            max_admm_iters: 100,
            min_admm_iters: 2,
            primal_tol: 1e-4,
            cg_tol: 1e-5,
            cg_max_iters: 40,
            box_range: BoxRange::default(),
            record_cost: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str, v: f64| Err(Error::Parameter(format!("{what} invalid: {v}")));
        if !(self.lambda >= 0.0) || !self.lambda.is_finite() {
            return bad("lambda", self.lambda);
        }
        if !(self.penalty_c > 0.0) || !self.penalty_c.is_finite() {
            return bad("penalty_c", self.penalty_c);
        }
        if !(self.primal_tol > 0.0) {
            return bad("primal_tol", self.primal_tol);
        }
        if !(self.cg_tol > 0.0) {
            return bad("cg_tol", self.cg_tol);
        }
        if self.max_admm_iters == 0 || self.cg_max_iters == 0 {
            return Err(Error::Parameter("iteration limits must be positive".into()));
        }
        if !(self.box_range.lo < self.box_range.hi) {
            return Err(Error::Parameter("box needs lo < hi".into()));
        }
        Ok(())
    }
}

/// How the second-order splitting variable is shrunk.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SecondOrder {
    /// Weighted eigenvalue shrinkage driven by `zeta`.
    Eigen,
    /// Block shrinkage in the Frobenius norm (second-order TV).
    Frobenius,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverState {
    pub sbar: ScalarImage,
    pub x: ScalarImage,
    pub y: VectorImage2,
    pub z: SymMatImage,
    pub xhat: ScalarImage,
    pub yhat: VectorImage2,
    pub zhat: SymMatImage,
    pub iter: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageReport {
    pub label: String,
    pub iterations: usize,
    pub converged: bool,
    pub data_error: f64,
    pub regularizer: f64,
    pub cost: f64,
    /// `F + lambda (R + barrier)` for fixed-point stages.
    pub joint_cost: Option<f64>,
    /// `|s_k+1 - s_k| / |s_k|` for fixed-point stages.
    pub relative_change: Option<f64>,
    pub cost_history: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionReport {
    pub iterations: usize,
    pub converged: bool,
    /// Final `(|gamma grad s - y|, |(1-gamma) hess s - z|, |s - x|)`, each over `sqrt(pixels)`.
    pub residuals: [f64; 3],
    pub residual_history: Vec<[f64; 3]>,
    pub dual_history: Vec<f64>,
    pub cost_history: Vec<f64>,
    pub data_error: f64,
    pub regularizer: f64,
    pub cost: f64,
    pub wall_time_s: f64,
    pub stages: Vec<StageReport>,
}

/// The s-subproblem operator with cached pieces.
pub struct NormalOperator {
    op: SamplingOperator,
    gamma2: ScalarImage,
    omg2: ScalarImage,
    use_grad: bool,
    use_hess: bool,
    data_weight: f64,
    scale_j: u32,
    precond: (Fft2, Vec<f64>),
}

impl NormalOperator {
    pub fn new(gamma: &ScalarImage, mask: &SamplingMask, c: f64, scale_j: u32) -> Result<Self> {
        check_shape(mask.shape(), gamma.shape())?;
        if !(c > 0.0) {
            return Err(Error::Parameter(format!("penalty must be positive, got {c}")));
        }
        let (rows, cols) = mask.shape();
        let f = 1usize << scale_j;
        if rows % f != 0 || cols % f != 0 {
            return Err(Error::Parameter(format!("{rows}x{cols} not divisible by 2^{scale_j}")));
        }
        let gamma2 = gamma.map(|g| g * g);
        let omg2 = gamma.map(|g| (1.0 - g) * (1.0 - g));
        let use_grad = gamma2.max_abs() > 0.0;
        let use_hess = omg2.max_abs() > 0.0;
        let mut me = Self {
            op: SamplingOperator::new(mask.clone()),
            gamma2,
            omg2,
            use_grad,
            use_hess,
            data_weight: 2.0 / c,
            scale_j,
            precond: (Fft2::new(1, 1), Vec::new()),
        };
        me.precond = me.coarse_symbol();
        Ok(me)
    }

    pub fn sampling(&self) -> &SamplingOperator {
        &self.op
    }

    pub fn small_shape(&self) -> (usize, usize) {
        let (r, c) = self.op.mask().shape();
        (r >> self.scale_j, c >> self.scale_j)
    }

    /// Coarse-grid Fourier symbol of the operator with `gamma^2` and
    /// `(1-gamma)^2` replaced by their means. That operator commutes with
    /// coarse shifts, so its impulse response diagonalizes it; the symbol is
    /// exact when the weights are constant.
    fn coarse_symbol(&self) -> (Fft2, Vec<f64>) {
        let (r, c) = self.small_shape();
        let mut delta = ScalarImage::zeros(r, c);
        delta.set(0, 0, 1.0);
        let e = interpolate(&delta, self.scale_j);
        let g2 = self.gamma2.mean();
        let h2 = self.omg2.mean();
        let mut full = e.clone();
        if self.use_grad {
            let mut g = grad_adjoint(&grad(&e));
            g.scale(g2);
            full.axpy(1.0, &g);
        }
        if self.use_hess {
            let mut h = hess_adjoint(&hess(&e).frobenius_dual());
            h.scale(h2);
            full.axpy(1.0, &h);
        }
        full.axpy(self.data_weight, &self.op.normal(&e));
        let resp = interpolate_adjoint(&full, self.scale_j).expect("divisible");
        let fft = Fft2::new(r, c);
        let mut buf: Vec<Complex64> = resp.data().iter().map(|&v| Complex64::new(v, 0.0)).collect();
        fft.forward(&mut buf);
        let n = (r * c) as f64;
        // the response is symmetric, so the symbol is real and positive
        let sym = buf.iter().map(|v| v.re.max(1e-12) * n).collect();
        (fft, sym)
    }

    fn precondition(&self, r: &ScalarImage) -> ScalarImage {
        let (fft, sym) = &self.precond;
        let mut buf: Vec<Complex64> = r.data().iter().map(|&v| Complex64::new(v, 0.0)).collect();
        fft.forward(&mut buf);
        for (b, s) in buf.iter_mut().zip(sym) {
            *b /= *s;
        }
        fft.inverse_unnormalized(&mut buf);
        let mut out = r.clone();
        for (o, b) in out.data_mut().iter_mut().zip(&buf) {
            *o = b.re;
        }
        out
    }

    /// Full-resolution part, without the interpolator.
    fn apply_full(&self, s: &ScalarImage) -> ScalarImage {
        let mut out = s.clone();
        if self.use_grad {
            let g = kron_scale(&self.gamma2, &grad(s)).expect("shape");
            out.axpy(1.0, &grad_adjoint(&g));
        }
        if self.use_hess {
            let h = kron_scale(&self.omg2, &hess(s)).expect("shape");
            out.axpy(1.0, &hess_adjoint(&h.frobenius_dual()));
        }
        out.axpy(self.data_weight, &self.op.normal(s));
        out
    }

    pub fn apply(&self, sbar: &ScalarImage) -> Result<ScalarImage> {
        check_shape(self.small_shape(), sbar.shape())?;
        let s = interpolate(sbar, self.scale_j);
        Ok(interpolate_adjoint(&self.apply_full(&s), self.scale_j).expect("divisible"))
    }
}

/// Left-hand side of the s-subproblem applied to `sbar`.
pub fn normal_apply(
    sbar: &ScalarImage,
    gamma: &ScalarImage,
    mask: &SamplingMask,
    c: f64,
    scale_j: u32,
) -> Result<ScalarImage> {
    NormalOperator::new(gamma, mask, c, scale_j)?.apply(sbar)
}

/// Preconditioned conjugate gradients on `A x = b`, warm-started at `x`.
/// Returns the number of iterations.
pub fn conjugate_gradient(
    a: &NormalOperator,
    b: &ScalarImage,
    x: &mut ScalarImage,
    tol: f64,
    max_iters: usize,
) -> Result<usize> {
    let bnorm = norm2(b);
    if bnorm == 0.0 && norm2(x) == 0.0 {
        return Ok(0);
    }
    let mut r = b.sub(&a.apply(x)?);
    let target = tol * bnorm.max(f64::MIN_POSITIVE);
    if norm2(&r) <= target {
        return Ok(0);
    }
    let mut zr = a.precondition(&r);
    let mut p = zr.clone();
    let mut rz = dot(r.data(), zr.data());
    for k in 1..=max_iters {
        let ap = a.apply(&p)?;
        let pap = dot(p.data(), ap.data());
        let alpha = rz / pap;
        if !alpha.is_finite() {
            return Err(Error::Numerical(format!(
                "conjugate gradient breakdown at iteration {k}: p.Ap = {pap}, r.z = {rz}"
            )));
        }
        x.axpy(alpha, &p);
        r.axpy(-alpha, &ap);
        if norm2(&r) <= target {
            return Ok(k);
        }
        zr = a.precondition(&r);
        let rz_new = dot(r.data(), zr.data());
        let beta = rz_new / rz;
        rz = rz_new;
        p.scale(beta);
        p.axpy(1.0, &zr);
    }
    Ok(max_iters)
}

/// A prepared ADMM problem at one scale.
pub struct AdmmProblem {
    normal: NormalOperator,
    gamma: ScalarImage,
    one_minus_gamma: ScalarImage,
    zeta: ScalarImage,
    second: SecondOrder,
    rhs_data: ScalarImage,
    measured: Vec<Complex64>,
    cfg: SolverConfig,
    scale_j: u32,
}

impl AdmmProblem {
    pub fn new(
        weights: &TransformedWeights,
        second: SecondOrder,
        m: &ComplexSamples,
        cfg: &SolverConfig,
        scale_j: u32,
    ) -> Result<Self> {
        cfg.validate()?;
        check_shape(m.shape(), weights.shape())?;
        let normal = NormalOperator::new(&weights.gamma, &m.mask, cfg.penalty_c, scale_j)?;
        let mut rhs_data = normal.sampling().adjoint(&m.values);
        rhs_data.scale(2.0 / cfg.penalty_c);
        Ok(Self {
            normal,
            gamma: weights.gamma.clone(),
            one_minus_gamma: weights.gamma.map(|g| 1.0 - g),
            zeta: weights.zeta.clone(),
            second,
            rhs_data,
            measured: m.values.clone(),
            cfg: cfg.clone(),
            scale_j,
        })
    }

    pub fn config(&self) -> &SolverConfig {
        &self.cfg
    }

    pub fn scale(&self) -> u32 {
        self.scale_j
    }

    pub fn full(&self, sbar: &ScalarImage) -> ScalarImage {
        interpolate(sbar, self.scale_j)
    }

    /// Initial state from a scale-`j` or full-size image.
    pub fn init_state(&self, init: &ScalarImage) -> Result<SolverState> {
        let small = self.normal.small_shape();
        let sbar = if init.shape() == small {
            init.clone()
        } else {
            check_shape(self.gamma.shape(), init.shape())?;
            restrict(init, self.scale_j)?
        };
        let s = self.full(&sbar);
        let (rows, cols) = s.shape();
        Ok(SolverState {
            x: prox_x(&s, &self.cfg.box_range),
            y: kron_scale(&self.gamma, &grad(&s))?,
            z: kron_scale(&self.one_minus_gamma, &hess(&s))?,
            xhat: ScalarImage::zeros(rows, cols),
            yhat: VectorImage2::zeros(rows, cols),
            zhat: SymMatImage::zeros(rows, cols),
            sbar,
            iter: 0,
        })
    }

    fn threshold(&self) -> ScalarImage {
        let (rows, cols) = self.gamma.shape();
        ScalarImage::filled(rows, cols, self.cfg.lambda / self.cfg.penalty_c)
    }

    /// Right-hand side of the s-subproblem for the current auxiliaries.
    fn rhs(&self, st: &SolverState) -> ScalarImage {
        let inv_c = 1.0 / self.cfg.penalty_c;
        let mut yt = st.y.clone();
        yt.axpy(-inv_c, &st.yhat);
        let mut zt = st.z.clone();
        zt.axpy(-inv_c, &st.zhat);
        let mut xt = st.x.clone();
        xt.axpy(-inv_c, &st.xhat);
        let mut full = xt;
        full.axpy(1.0, &self.rhs_data);
        if self.normal.use_grad {
            full.axpy(1.0, &grad_adjoint(&kron_scale(&self.gamma, &yt).expect("shape")));
        }
        if self.normal.use_hess {
            let zw = kron_scale(&self.one_minus_gamma, &zt).expect("shape");
            full.axpy(1.0, &hess_adjoint(&zw.frobenius_dual()));
        }
        interpolate_adjoint(&full, self.scale_j).expect("divisible")
    }

    /// CG update of `sbar` with the auxiliaries held fixed.
    pub fn solve_s(&self, st: &SolverState) -> Result<ScalarImage> {
        let rhs = self.rhs(st);
        let mut s = st.sbar.clone();
        conjugate_gradient(&self.normal, &rhs, &mut s, self.cfg.cg_tol, self.cfg.cg_max_iters)?;
        Ok(s)
    }

    /// One full ADMM cycle. Returns the normalized primal residuals and the
    /// normalized dual residual `c |s_new - s_old|`.
    pub fn step(&self, st: &mut SolverState) -> Result<([f64; 3], f64)> {
        let c = self.cfg.penalty_c;
        let inv_c = 1.0 / c;
        let s = self.full(&st.sbar);
        let t = self.threshold();

        let mut ybar = kron_scale(&self.gamma, &grad(&s))?;
        ybar.axpy(inv_c, &st.yhat);
        st.y = prox_y(&ybar, &t)?;

        let mut zbar = kron_scale(&self.one_minus_gamma, &hess(&s))?;
        zbar.axpy(inv_c, &st.zhat);
        st.z = match self.second {
            SecondOrder::Eigen => prox_z(&zbar, &self.zeta, &t)?,
            SecondOrder::Frobenius => prox_z_frobenius(&zbar, &t)?,
        };

        let mut xbar = s.clone();
        xbar.axpy(inv_c, &st.xhat);
        st.x = prox_x(&xbar, &self.cfg.box_range);

        st.sbar = self.solve_s(st)?;
        let s_new = self.full(&st.sbar);

        let mut ry = kron_scale(&self.gamma, &grad(&s_new))?;
        ry.axpy(-1.0, &st.y);
        let mut rz = kron_scale(&self.one_minus_gamma, &hess(&s_new))?;
        rz.axpy(-1.0, &st.z);
        let rx = s_new.sub(&st.x);
        st.yhat.axpy(c, &ry);
        st.zhat.axpy(c, &rz);
        st.xhat.axpy(c, &rx);
        st.iter += 1;

        let root_n = (s.len() as f64).sqrt();
        let rz_norm = crate::image::inner_product(&rz, &rz.frobenius_dual())?.sqrt();
        let res = [norm2(&ry) / root_n, rz_norm / root_n, norm2(&rx) / root_n];
        if res.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerical(format!(
                "non-finite primal residual at iteration {}",
                st.iter
            )));
        }
        let dual = c * norm2(&s_new.sub(&s)) / root_n;
        Ok((res, dual))
    }

    /// `(F, R)` at full-size `s`, with `R` the regularizer this problem encodes.
    pub fn cost_terms(&self, s: &ScalarImage) -> Result<(f64, f64)> {
        let f = data_error(self.normal.sampling(), s, &self.measured)?;
        let g = pointwise_norm(&kron_scale(&self.gamma, &grad(s))?);
        let z = kron_scale(&self.one_minus_gamma, &hess(s))?;
        let mut r = g.sum();
        match self.second {
            SecondOrder::Eigen => {
                for i in 0..s.len() {
                    let (l1, l2) = crate::diffops::eig2(z.xx.data()[i], z.yy.data()[i], z.xy.data()[i]);
                    let zt = self.zeta.data()[i];
                    r += zt * l1.abs() + (1.0 - zt) * l2.abs();
                }
            }
            SecondOrder::Frobenius => {
                for i in 0..s.len() {
                    let (a, b, c) = (z.xx.data()[i], z.yy.data()[i], z.xy.data()[i]);
                    r += (a * a + b * b + 2.0 * c * c).sqrt();
                }
            }
        }
        Ok((f, r))
    }

    /// Runs until the residuals fall below tolerance or the iteration cap.
    pub fn run(
        &self,
        init: &ScalarImage,
        observer: &mut dyn FnMut(&SolverState, &ScalarImage),
    ) -> Result<(ScalarImage, ReconstructionReport)> {
        let start = Instant::now();
        let mut st = self.init_state(init)?;
        let mut residual_history = Vec::new();
        let mut dual_history = Vec::new();
        let mut cost_history = Vec::new();
        let mut converged = false;
        for _ in 0..self.cfg.max_admm_iters {
            let (res, dual) = self.step(&mut st)?;
            residual_history.push(res);
            dual_history.push(dual);
            let s = self.full(&st.sbar);
            if self.cfg.record_cost {
                let (f, r) = self.cost_terms(&s)?;
                cost_history.push(f + self.cfg.lambda * r);
            }
            observer(&st, &s);
            if st.iter >= self.cfg.min_admm_iters.max(1) && res.iter().all(|&v| v <= self.cfg.primal_tol) {
                converged = true;
                break;
            }
        }
        let out = self.full(&st.sbar);
        let (f, r) = self.cost_terms(&out)?;
        let report = ReconstructionReport {
            iterations: st.iter,
            converged,
            residuals: *residual_history.last().expect("at least one iteration"),
            residual_history,
            dual_history,
            cost_history,
            data_error: f,
            regularizer: r,
            cost: f + self.cfg.lambda * r,
            wall_time_s: start.elapsed().as_secs_f64(),
            stages: Vec::new(),
        };
        Ok((out, report))
    }
}

fn data_error(op: &SamplingOperator, s: &ScalarImage, measured: &[Complex64]) -> Result<f64> {
    let ts = op.forward(s)?;
    Ok(ts.iter().zip(measured).map(|(a, b)| (a - b).norm_sqr()).sum())
}

/// CG solution of the s-subproblem from `state`.
pub fn solve_s(
    state: &SolverState,
    weights: &TransformedWeights,
    m: &ComplexSamples,
    cfg: &SolverConfig,
    scale_j: u32,
) -> Result<ScalarImage> {
    AdmmProblem::new(weights, SecondOrder::Eigen, m, cfg, scale_j)?.solve_s(state)
}

/// One ADMM cycle from `state`.
pub fn admm_step(
    state: &SolverState,
    weights: &TransformedWeights,
    m: &ComplexSamples,
    cfg: &SolverConfig,
    scale_j: u32,
) -> Result<(SolverState, [f64; 3])> {
    let p = AdmmProblem::new(weights, SecondOrder::Eigen, m, cfg, scale_j)?;
    let mut st = state.clone();
    let (res, _) = p.step(&mut st)?;
    Ok((st, res))
}

pub fn reconstruct_adaptive(
    init: &ScalarImage,
    weights: &AdaptiveWeights,
    m: &ComplexSamples,
    cfg: &SolverConfig,
    scale_j: u32,
) -> Result<(ScalarImage, ReconstructionReport)> {
    reconstruct_adaptive_observed(init, weights, m, cfg, scale_j, &mut |_, _| {})
}

/// As [`reconstruct_adaptive`], calling `observer(state, E sbar)` after every iteration.
pub fn reconstruct_adaptive_observed(
    init: &ScalarImage,
    weights: &AdaptiveWeights,
    m: &ComplexSamples,
    cfg: &SolverConfig,
    scale_j: u32,
    observer: &mut dyn FnMut(&SolverState, &ScalarImage),
) -> Result<(ScalarImage, ReconstructionReport)> {
    AdmmProblem::new(&transform(weights), SecondOrder::Eigen, m, cfg, scale_j)?.run(init, observer)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Baseline {
    Tv1,
    Tv2,
    Hs,
}

pub fn reconstruct_baseline(
    kind: Baseline,
    init: &ScalarImage,
    m: &ComplexSamples,
    cfg: &SolverConfig,
    scale_j: u32,
) -> Result<(ScalarImage, ReconstructionReport)> {
    let (rows, cols) = m.shape();
    match kind {
        Baseline::Tv1 => {
            let w = AdaptiveWeights::constant(rows, cols, 1.0, 0.0, 0.0);
            reconstruct_adaptive(init, &w, m, cfg, scale_j)
        }
        Baseline::Hs => {
            let w = AdaptiveWeights::constant(rows, cols, 0.0, 0.5, 0.5);
            let mut c = cfg.clone();
            c.lambda *= 2.0;
            c.penalty_c *= 2.0;
            reconstruct_adaptive(init, &w, m, &c, scale_j)
        }
        Baseline::Tv2 => {
            let w = TransformedWeights::constant(rows, cols, 0.0, 0.5);
            AdmmProblem::new(&w, SecondOrder::Frobenius, m, cfg, scale_j)?.run(init, &mut |_, _| {})
        }
    }
}

/// `(F, R, F + lambda R)` with `F = |T s - m|^2` and the adaptive regularizer `R`.
pub fn eval_cost(
    s: &ScalarImage,
    weights: &AdaptiveWeights,
    m: &ComplexSamples,
    lambda: f64,
) -> Result<(f64, f64, f64)> {
    check_shape(m.shape(), s.shape())?;
    let op = SamplingOperator::new(m.mask.clone());
    let f = data_error(&op, s, &m.values)?;
    let r = eval_adaptive_reg(s, weights)?;
    Ok((f, r, f + lambda * r))
}
