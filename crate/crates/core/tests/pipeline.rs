use hcorosa_core::adaptwt::{hs_value, tv1_value};
use hcorosa_core::multires::{downsample, guide_weights, restrict};
use hcorosa_core::solver::reconstruct_adaptive_observed;
use hcorosa_core::*;

fn problem(n: usize, density: f64, noise: bool, seed: u64) -> (ScalarImage, ComplexSamples) {
    let truth = Phantom::SheppLogan.render(n, n);
    let mask = generate_mask(&MaskSpec::new(MaskKind::Random, n, n, density, seed)).unwrap();
    let sigma = if noise {
        calibrate_noise_sigma(&truth, 20.0).unwrap()
    } else {
        0.0
    };
    let m = simulate_measurements(&truth, &mask, sigma, seed + 1).unwrap();
    (truth, m)
}

fn data_term(s: &ScalarImage, m: &ComplexSamples) -> f64 {
    let t = apply_forward(s, &m.mask).unwrap();
    t.values.iter().zip(&m.values).map(|(a, b)| (a - b).norm_sqr()).sum()
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

fn recording(n: usize, iters: usize) -> SolverConfig {
    let mut cfg = SolverConfig::for_shape(n, n);
    cfg.max_admm_iters = iters;
    cfg.record_cost = true;
    cfg
}

#[test]
fn tv1_weights_reproduce_tv1_cost() {
    let n = 32;
    let (_, m) = problem(n, 0.3, true, 3);
    let cfg = recording(n, 25);
    let w = AdaptiveWeights::constant(n, n, 1.0, 0.0, 0.0);
    let mut dedicated = Vec::new();
    let zf = zero_fill_invert(&m);
    let (_, rep) = reconstruct_adaptive_observed(&zf, &w, &m, &cfg, 0, &mut |_, s| {
        dedicated.push(data_term(s, &m) + cfg.lambda * tv1_value(s));
    })
    .unwrap();
    assert_eq!(rep.cost_history.len(), dedicated.len());
    for (a, b) in rep.cost_history.iter().zip(&dedicated) {
        assert!(rel_close(*a, *b, 1e-9), "{a} vs {b}");
    }
    let (_, base) = reconstruct_baseline(Baseline::Tv1, &zf, &m, &cfg, 0).unwrap();
    assert_eq!(base.cost_history, rep.cost_history);
}

#[test]
fn hs_weights_reproduce_hs_cost() {
    let n = 32;
    let (_, m) = problem(n, 0.3, true, 4);
    let cfg = recording(n, 25);
    let mut doubled = cfg.clone();
    doubled.lambda *= 2.0;
    doubled.penalty_c *= 2.0;
    let w = AdaptiveWeights::constant(n, n, 0.0, 0.5, 0.5);
    let zf = zero_fill_invert(&m);
    let mut dedicated = Vec::new();
    let (_, rep) = reconstruct_adaptive_observed(&zf, &w, &m, &doubled, 0, &mut |_, s| {
        dedicated.push(data_term(s, &m) + cfg.lambda * hs_value(s));
    })
    .unwrap();
    for (a, b) in rep.cost_history.iter().zip(&dedicated) {
        assert!(rel_close(*a, *b, 1e-9), "{a} vs {b}");
    }
    let (_, base) = reconstruct_baseline(Baseline::Hs, &zf, &m, &cfg, 0).unwrap();
    assert_eq!(base.cost_history, rep.cost_history);
}

#[test]
fn degenerate_pyramid_is_one_guided_pass() {
    let n = 32;
    let (_, m) = problem(n, 0.3, true, 5);
    let cfg = SolverConfig::for_shape(n, n);
    let pc = PyramidConfig {
        levels: 0,
        fixed_point_iters: 0,
        ..Default::default()
    };
    let (s, _) = hcorosa(&m, &pc, &cfg).unwrap();
    let zf = zero_fill_invert(&m);
    let (seed, _) = reconstruct_baseline(Baseline::Hs, &zf, &m, &cfg, 0).unwrap();
    let (w, _) = guide_weights(&seed, pc.tau_rel, false).unwrap();
    let (direct, _) = reconstruct_adaptive(&seed, &w, &m, &cfg, 0).unwrap();
    assert_eq!(s, direct);
}

#[test]
fn zero_fixed_point_passes_return_input() {
    let n = 16;
    let (truth, m) = problem(n, 0.4, false, 6);
    let cfg = SolverConfig::for_shape(n, n);
    let (s, stages, last) = run_fixed_point(&truth, &m, 0, 0.1, false, &cfg).unwrap();
    assert_eq!(s, truth);
    assert!(stages.is_empty() && last.is_none());
}

#[test]
fn pyramid_scales_live_in_their_interpolation_range() {
    let n = 32;
    let (_, m) = problem(n, 0.3, true, 7);
    let mut cfg = SolverConfig::for_shape(n, n);
    cfg.max_admm_iters = 20;
    let out = run_pyramid(&m, &PyramidConfig::default(), &cfg).unwrap();
    let js: Vec<u32> = out.scales.iter().map(|(j, _)| *j).collect();
    assert_eq!(js, vec![2, 1, 0]);
    for (j, s) in &out.scales {
        assert_eq!(&interpolate(&downsample(s, *j).unwrap(), *j), s);
    }
    // the scale-J seed starts from the restricted zero-fill
    assert_eq!(restrict(&zero_fill_invert(&m), 2).unwrap().shape(), (8, 8));
}

#[test]
fn fixed_point_reports_every_pass() {
    let n = 32;
    let (_, m) = problem(n, 0.3, true, 8);
    let mut cfg = SolverConfig::for_shape(n, n);
    cfg.max_admm_iters = 30;
    let pc = PyramidConfig {
        fixed_point_iters: 3,
        ..Default::default()
    };
    let (_, rep) = hcorosa(&m, &pc, &cfg).unwrap();
    let fp: Vec<_> = rep.stages.iter().filter(|s| s.joint_cost.is_some()).collect();
    assert_eq!(fp.len(), 3);
    for st in fp {
        assert!(st.joint_cost.unwrap().is_finite());
        assert!(st.relative_change.unwrap() >= 0.0);
    }
    assert_eq!(rep.iterations, rep.stages.iter().map(|s| s.iterations).sum::<usize>());
}

#[test]
fn noiseless_full_mask_converges() {
    let n = 64;
    let mut cfg = SolverConfig::for_shape(n, n);
    cfg.max_admm_iters = 300;
    // the primal residuals scale like 1/c; the default c = 3 lambda needs a few hundred more
    cfg.penalty_c = 6.0 * cfg.lambda;
    for ph in Phantom::ALL {
        let truth = ph.render(n, n);
        let m = apply_forward(&truth, &SamplingMask::full(n, n)).unwrap();
        let zf = zero_fill_invert(&m);
        for kind in [Baseline::Tv1, Baseline::Hs] {
            let (_, rep) = reconstruct_baseline(kind, &zf, &m, &cfg, 0).unwrap();
            assert!(rep.residual_history.iter().flatten().all(|v| v.is_finite()));
            assert!(rep.converged, "{ph} {kind:?} residuals {:?}", rep.residuals);
        }
    }
}

#[test]
fn hcorosa_is_deterministic() {
    let n = 32;
    let (_, m) = problem(n, 0.3, true, 9);
    let mut cfg = SolverConfig::for_shape(n, n);
    cfg.max_admm_iters = 15;
    let pc = PyramidConfig::default();
    let (a, mut ra) = hcorosa(&m, &pc, &cfg).unwrap();
    let (b, mut rb) = hcorosa(&m, &pc, &cfg).unwrap();
    assert_eq!(a, b);
    ra.wall_time_s = 0.0;
    rb.wall_time_s = 0.0;
    assert_eq!(ra, rb);
}
