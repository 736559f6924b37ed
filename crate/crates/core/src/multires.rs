//! Periodic tent interpolation between scales, the coarse-to-fine pyramid and
//! the full-resolution fixed-point refinement.

use std::collections::BTreeMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::adaptwt::{
    compute_features, eval_adaptive_reg, eval_barrier, solve_weights, AdaptiveWeights, DEFAULT_RELATIVE_TAU,
};
use crate::error::{Error, Result};
use crate::fourier::{zero_fill_invert, ComplexSamples};
use crate::image::{norm2, Field, ScalarImage};
use crate::solver::{
    eval_cost, reconstruct_adaptive, reconstruct_baseline, Baseline, ReconstructionReport, SolverConfig, StageReport,
};

fn upsample_axis(src: &[f64], n: usize, f: usize, stride: usize, out: &mut [f64], out_stride: usize) {
    for k in 0..n {
        let a = src[k * stride];
        let b = src[((k + 1) % n) * stride];
        for r in 0..f {
            let w = r as f64 / f as f64;
            out[(f * k + r) * out_stride] = (1.0 - w) * a + w * b;
        }
    }
}

fn upsample_axis_adjoint(src: &[f64], n: usize, f: usize, stride: usize, out: &mut [f64], out_stride: usize) {
    for k in 0..n {
        let mut a = 0.0;
        let mut b = 0.0;
        for r in 0..f {
            let w = r as f64 / f as f64;
            let v = src[(f * k + r) * stride];
            a += (1.0 - w) * v;
            b += w * v;
        }
        out[k * out_stride] += a;
        out[((k + 1) % n) * out_stride] += b;
    }
}

/// `2^factor_log2`-fold separable tent interpolation with periodic extension.
pub fn interpolate(s: &ScalarImage, factor_log2: u32) -> ScalarImage {
    if factor_log2 == 0 {
        return s.clone();
    }
    let f = 1usize << factor_log2;
    let (rows, cols) = s.shape();
    let (big_r, big_c) = (rows * f, cols * f);
    let mut wide = vec![0.0; rows * big_c];
    for r in 0..rows {
        upsample_axis(&s.data()[r * cols..], cols, f, 1, &mut wide[r * big_c..], 1);
    }
    let mut out = vec![0.0; big_r * big_c];
    for c in 0..big_c {
        upsample_axis(&wide[c..], rows, f, big_c, &mut out[c..], big_c);
    }
    ScalarImage::new(big_r, big_c, out).expect("finite")
}

/// Exact adjoint of [`interpolate`].
pub fn interpolate_adjoint(s: &ScalarImage, factor_log2: u32) -> Result<ScalarImage> {
    if factor_log2 == 0 {
        return Ok(s.clone());
    }
    let f = 1usize << factor_log2;
    let (big_r, big_c) = s.shape();
    if big_r % f != 0 || big_c % f != 0 {
        return Err(Error::Parameter(format!(
            "{big_r}x{big_c} not divisible by 2^{factor_log2}"
        )));
    }
    let (rows, cols) = (big_r / f, big_c / f);
    let mut tall = vec![0.0; rows * big_c];
    for c in 0..big_c {
        upsample_axis_adjoint(&s.data()[c..], rows, f, big_c, &mut tall[c..], big_c);
    }
    let mut out = vec![0.0; rows * cols];
    for r in 0..rows {
        upsample_axis_adjoint(&tall[r * big_c..], cols, f, 1, &mut out[r * cols..], 1);
    }
    ScalarImage::new(rows, cols, out)
}

/// Samples at multiples of `2^factor_log2`; inverts [`interpolate`] exactly.
pub fn downsample(s: &ScalarImage, factor_log2: u32) -> Result<ScalarImage> {
    let f = 1usize << factor_log2;
    let (rows, cols) = s.shape();
    if rows % f != 0 || cols % f != 0 {
        return Err(Error::Parameter(format!(
            "{rows}x{cols} not divisible by 2^{factor_log2}"
        )));
    }
    Ok(ScalarImage::from_fn(rows / f, cols / f, |r, c| s.get(r * f, c * f)))
}

/// Tent-weighted average `E^T v / E^T 1`, the coarse image closest in spirit
/// to an arbitrary full-size `v`.
pub fn restrict(s: &ScalarImage, factor_log2: u32) -> Result<ScalarImage> {
    let num = interpolate_adjoint(s, factor_log2)?;
    let (rows, cols) = s.shape();
    let den = interpolate_adjoint(&ScalarImage::filled(rows, cols, 1.0), factor_log2)?;
    num.zip_map(&den, |a, b| a / b)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PyramidConfig {
    /// Coarsest scale `J`.
    pub levels: u32,
    /// Full-resolution refinement passes `K`.
    pub fixed_point_iters: usize,
    /// `tau` as a fraction of the guide's mean derivative magnitude.
    pub tau_rel: f64,
    /// Force equal weights on both canonical second derivatives.
    pub corosa: bool,
    /// Solver settings replacing the shared ones at a given scale.
    pub scale_overrides: BTreeMap<u32, SolverConfig>,
}

impl Default for PyramidConfig {
    fn default() -> Self {
        Self {
            levels: 2,
            fixed_point_iters: 2,
            tau_rel: DEFAULT_RELATIVE_TAU,
            corosa: false,
            scale_overrides: BTreeMap::new(),
        }
    }
}

impl PyramidConfig {
    fn solver_for(&self, scale: u32, shared: &SolverConfig) -> SolverConfig {
        self.scale_overrides
            .get(&scale)
            .cloned()
            .unwrap_or_else(|| shared.clone())
    }

    pub fn validate(&self, rows: usize, cols: usize) -> Result<()> {
        let f = 1usize << self.levels;
        if rows % f != 0 || cols % f != 0 {
            return Err(Error::Parameter(format!(
                "{rows}x{cols} not divisible by 2^{} (levels)",
                self.levels
            )));
        }
        if !(self.tau_rel > 0.0) {
            return Err(Error::Parameter(format!(
                "tau_rel must be positive, got {}",
                self.tau_rel
            )));
        }
        Ok(())
    }
}

/// Adaptive weights of a guide image. Returns the weights and absolute `tau`.
pub fn guide_weights(guide: &ScalarImage, tau_rel: f64, corosa: bool) -> Result<(AdaptiveWeights, f64)> {
    let mut feats = compute_features(guide);
    if corosa {
        feats = feats.with_equal_csd();
    }
    let tau = feats.relative_tau(tau_rel);
    Ok((solve_weights(&feats, tau)?, tau))
}

/// Absolute-`tau` variant of [`guide_weights`].
pub fn guide_weights_abs(guide: &ScalarImage, tau: f64, corosa: bool) -> Result<AdaptiveWeights> {
    let mut feats = compute_features(guide);
    if corosa {
        feats = feats.with_equal_csd();
    }
    solve_weights(&feats, tau)
}

#[derive(Debug, Clone)]
pub struct PyramidOutput {
    /// `(j, s^(j))` from the coarsest scale down to `0`, all at full size.
    pub scales: Vec<(u32, ScalarImage)>,
    pub stages: Vec<StageReport>,
    pub last: ReconstructionReport,
}

impl PyramidOutput {
    pub fn finest(&self) -> &ScalarImage {
        &self.scales.last().expect("at least one scale").1
    }

    pub fn coarsest(&self) -> &ScalarImage {
        &self.scales[0].1
    }
}

fn stage(label: String, rep: &ReconstructionReport) -> StageReport {
    StageReport {
        label,
        iterations: rep.iterations,
        converged: rep.converged,
        data_error: rep.data_error,
        regularizer: rep.regularizer,
        cost: rep.cost,
        joint_cost: None,
        relative_change: None,
        cost_history: rep.cost_history.clone(),
    }
}

/// Non-adaptive seed at scale `J`, then adaptive scales `J-1 .. 0`, each
/// guided by the interpolated previous scale.
pub fn run_pyramid(m: &ComplexSamples, cfg: &PyramidConfig, solver_cfg: &SolverConfig) -> Result<PyramidOutput> {
    let (rows, cols) = m.shape();
    cfg.validate(rows, cols)?;
    let top = cfg.levels;
    let zf = zero_fill_invert(m);
    let init = restrict(&zf, top)?;
    let (mut s, mut rep) = reconstruct_baseline(Baseline::Hs, &init, m, &cfg.solver_for(top, solver_cfg), top)?;
    let mut scales = vec![(top, s.clone())];
    let mut stages = vec![stage(format!("hs scale {top}"), &rep)];
    for j in (0..top).rev() {
        let (w, _) = guide_weights(&s, cfg.tau_rel, cfg.corosa)?;
        let coarse = downsample(&s, j + 1)?;
        let init = interpolate(&coarse, 1);
        let (next, r) = reconstruct_adaptive(&init, &w, m, &cfg.solver_for(j, solver_cfg), j)?;
        stages.push(stage(format!("adaptive scale {j}"), &r));
        s = next;
        rep = r;
        scales.push((j, s.clone()));
    }
    if top == 0 {
        // no coarser scale: one adaptive pass guided by the HS seed itself
        let (w, _) = guide_weights(&s, cfg.tau_rel, cfg.corosa)?;
        let (next, r) = reconstruct_adaptive(&s, &w, m, &cfg.solver_for(0, solver_cfg), 0)?;
        stages.push(stage("adaptive scale 0".into(), &r));
        s = next;
        rep = r;
        scales.push((0, s.clone()));
    }
    Ok(PyramidOutput {
        scales,
        stages,
        last: rep,
    })
}

/// `K` passes of `s_{k+1} = reconstruct_adaptive(s_k, weights(s_k))` at full resolution.
pub fn run_fixed_point(
    s0: &ScalarImage,
    m: &ComplexSamples,
    iters: usize,
    tau: f64,
    corosa: bool,
    solver_cfg: &SolverConfig,
) -> Result<(ScalarImage, Vec<StageReport>, Option<ReconstructionReport>)> {
    let mut s = s0.clone();
    let mut stages = Vec::with_capacity(iters);
    let mut last = None;
    for k in 0..iters {
        let w = guide_weights_abs(&s, tau, corosa)?;
        let (next, rep) = reconstruct_adaptive(&s, &w, m, solver_cfg, 0)?;
        let (f, _, _) = eval_cost(&next, &w, m, solver_cfg.lambda)?;
        let r = eval_adaptive_reg(&next, &w)?;
        let barrier = eval_barrier(&w, tau)?;
        let mut st = stage(format!("fixed point {}", k + 1), &rep);
        st.joint_cost = Some(f + solver_cfg.lambda * (r + barrier));
        let denom = norm2(&s);
        st.relative_change = Some(if denom > 0.0 {
            norm2(&next.sub(&s)) / denom
        } else {
            norm2(&next)
        });
        stages.push(st);
        s = next;
        last = Some(rep);
    }
    Ok((s, stages, last))
}

/// Everything [`hcorosa`] computes, including the pyramid scales.
#[derive(Debug, Clone)]
pub struct HcorosaOutput {
    pub image: ScalarImage,
    pub report: ReconstructionReport,
    pub pyramid: PyramidOutput,
    /// Absolute `tau` used by the fixed-point passes.
    pub tau: f64,
}

/// Pyramid followed by fixed-point refinement seeded with its finest output.
pub fn hcorosa(
    m: &ComplexSamples,
    cfg: &PyramidConfig,
    solver_cfg: &SolverConfig,
) -> Result<(ScalarImage, ReconstructionReport)> {
    hcorosa_detailed(m, cfg, solver_cfg).map(|o| (o.image, o.report))
}

pub fn hcorosa_detailed(m: &ComplexSamples, cfg: &PyramidConfig, solver_cfg: &SolverConfig) -> Result<HcorosaOutput> {
    let start = Instant::now();
    let pyr = run_pyramid(m, cfg, solver_cfg)?;
    let s0 = pyr.finest().clone();
    let (_, tau) = guide_weights(&s0, cfg.tau_rel, cfg.corosa)?;
    let (s, fp_stages, fp_last) = run_fixed_point(
        &s0,
        m,
        cfg.fixed_point_iters,
        tau,
        cfg.corosa,
        &cfg.solver_for(0, solver_cfg),
    )?;
    let mut stages = pyr.stages.clone();
    stages.extend(fp_stages);
    let mut report = fp_last.unwrap_or_else(|| pyr.last.clone());
    report.iterations = stages.iter().map(|s| s.iterations).sum();
    report.stages = stages;
    report.wall_time_s = start.elapsed().as_secs_f64();
    Ok(HcorosaOutput {
        image: s,
        report,
        pyramid: pyr,
        tau,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::image::inner_product;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_image(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> ScalarImage {
        ScalarImage::from_fn(rows, cols, |_, _| rng.random_range(-1.0..1.0))
    }

    #[test]
    fn identity_and_constants() {
        let mut rng = ChaCha8Rng::seed_from_u64(60);
        let s = random_image(&mut rng, 5, 7);
        assert_eq!(interpolate(&s, 0), s);
        assert_eq!(interpolate_adjoint(&s, 0).unwrap(), s);
        let c = interpolate(&ScalarImage::filled(4, 3, 0.25), 2);
        assert_eq!(c.shape(), (16, 12));
        assert!(c.data().iter().all(|&v| v == 0.25));
    }

    #[test]
    fn hand_computed_two_by_two() {
        let s = ScalarImage::new(2, 2, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let out = interpolate(&s, 1);
        // rows: [1, 1.5, 2, 1.5] and [3, 3.5, 4, 3.5]; the odd rows average them
        let expect = [
            1.0, 1.5, 2.0, 1.5, //
            2.0, 2.5, 3.0, 2.5, //
            3.0, 3.5, 4.0, 3.5, //
            2.0, 2.5, 3.0, 2.5,
        ];
        assert_eq!(out.data(), &expect);
    }

    #[test]
    fn adjoint_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(61);
        for j in 0..4 {
            for _ in 0..5 {
                let u = random_image(&mut rng, 6, 4);
                let v = random_image(&mut rng, 6 << j, 4 << j);
                let lhs = inner_product(&interpolate(&u, j), &v).unwrap();
                let rhs = inner_product(&u, &interpolate_adjoint(&v, j).unwrap()).unwrap();
                assert!((lhs - rhs).abs() < 1e-10);
            }
        }
        assert!(interpolate_adjoint(&ScalarImage::zeros(6, 6), 2).is_err());
    }

    #[test]
    fn adjoint_of_ones_matches_operator_matrix() {
        let (rows, cols, j) = (3, 2, 1);
        let f = 1 << j;
        let mut col_sums = ScalarImage::zeros(rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                let mut e = ScalarImage::zeros(rows, cols);
                e.set(r, c, 1.0);
                col_sums.set(r, c, interpolate(&e, j).sum());
            }
        }
        let got = interpolate_adjoint(&ScalarImage::filled(rows * f, cols * f, 1.0), j).unwrap();
        assert_eq!(got, col_sums);
        assert!(got.data().iter().all(|&v| v == 4.0));
    }

    #[test]
    fn composition_and_representation() {
        let mut rng = ChaCha8Rng::seed_from_u64(62);
        let u = random_image(&mut rng, 4, 4);
        let a = interpolate(&interpolate(&u, 1), 1);
        let b = interpolate(&u, 2);
        for (x, y) in a.data().iter().zip(b.data()) {
            assert!((x - y).abs() < 1e-14);
        }
        let s = interpolate(&u, 2);
        assert_eq!(interpolate(&downsample(&s, 2).unwrap(), 2), s);
        let r = restrict(&s, 0).unwrap();
        assert_eq!(r, s);
    }
}
