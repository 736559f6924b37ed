use std::path::Path;
use std::process::{Command, Output};

use hcorosa_cli::io::{decode_pgm, encode_pgm8};
use hcorosa_core::formats::{decode_image, decode_mask, decode_samples, encode_image};
use hcorosa_core::multires::guide_weights;
use hcorosa_core::{
    apply_forward, reconstruct_adaptive, reconstruct_baseline, zero_fill_invert, Baseline, Phantom, ScalarImage,
    SolverConfig,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn hcorosa(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hcorosa"))
        .args(args)
        .env("HCOROSA_THREADS", "0")
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = hcorosa(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn p(dir: &Path, name: &str) -> String {
    dir.join(name).to_str().unwrap().to_string()
}

fn write_raw(path: &str, img: &ScalarImage) {
    std::fs::write(path, encode_image(img)).unwrap();
}

fn sidecar_value(path: &str, key: &str) -> String {
    let text = std::fs::read_to_string(path).unwrap();
    text.lines()
        .find_map(|l| {
            l.split_once(" = ")
                .filter(|(k, _)| *k == key)
                .map(|(_, v)| v.to_string())
        })
        .unwrap()
}

#[test]
fn mask_count_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (p(dir.path(), "a.hcmk"), p(dir.path(), "b.hcmk"));
    for out in [&a, &b] {
        ok(&[
            "mask",
            "--kind",
            "random",
            "--size",
            "64",
            "--density",
            "0.10",
            "--seed",
            "7",
            "-o",
            out,
        ]);
    }
    let bytes = std::fs::read(&a).unwrap();
    assert_eq!(bytes, std::fs::read(&b).unwrap());
    assert_eq!(decode_mask(&bytes).unwrap().sample_count(), 410);
}

#[test]
fn spiral_mask_reports_density() {
    let dir = tempfile::tempdir().unwrap();
    let out = ok(&[
        "mask",
        "--kind",
        "spiral",
        "--size",
        "64",
        "--density",
        "0.20",
        "-o",
        &p(dir.path(), "s.hcmk"),
    ]);
    let d: f64 = out.trim().rsplit(' ').next().unwrap().parse().unwrap();
    assert!((d - 0.2).abs() <= 0.005, "{out}");
}

#[test]
fn unreachable_density_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = hcorosa(&[
        "mask",
        "--kind",
        "radial",
        "--size",
        "16",
        "--density",
        "0.999",
        "--tolerance",
        "1e-6",
        "-o",
        &p(dir.path(), "m"),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!String::from_utf8_lossy(&out.stderr).is_empty());
}

#[test]
fn simulate_sigma_and_noiseless_samples() {
    let dir = tempfile::tempdir().unwrap();
    let img = p(dir.path(), "img.hcrs");
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut truth = ScalarImage::from_fn(256, 256, |_, _| rng.random_range(0.0..0.9));
    truth.set(10, 10, 1.0);
    write_raw(&img, &truth);
    let mask = p(dir.path(), "m.hcmk");
    ok(&["mask", "--size", "256", "--density", "0.3", "--seed", "1", "-o", &mask]);

    let noisy = p(dir.path(), "noisy.hcks");
    ok(&[
        "simulate",
        "--image",
        &img,
        "--mask",
        &mask,
        "--noise-psnr",
        "20",
        "--seed",
        "5",
        "-o",
        &noisy,
    ]);
    let sigma: f64 = sidecar_value(&format!("{noisy}.txt"), "sigma").parse().unwrap();
    assert!((sigma - 25.6).abs() < 1e-9, "{sigma}");
    assert_eq!(sidecar_value(&format!("{noisy}.txt"), "normalization"), "1");

    let again = p(dir.path(), "again.hcks");
    ok(&[
        "simulate",
        "--image",
        &img,
        "--mask",
        &mask,
        "--noise-psnr",
        "20",
        "--seed",
        "5",
        "-o",
        &again,
    ]);
    assert_eq!(std::fs::read(&noisy).unwrap(), std::fs::read(&again).unwrap());

    let clean = p(dir.path(), "clean.hcks");
    ok(&[
        "simulate", "--image", &img, "--mask", &mask, "--noise", "none", "-o", &clean,
    ]);
    let m = decode_samples(&std::fs::read(&clean).unwrap()).unwrap();
    let exact = apply_forward(&truth, &m.mask).unwrap();
    assert_eq!(m.values, exact.values);
}

#[test]
fn simulate_normalizes_pgm_and_checks_shape() {
    let dir = tempfile::tempdir().unwrap();
    let img = p(dir.path(), "img.pgm");
    let half = Phantom::SheppLogan.render(32, 32).map(|v| 0.5 * v);
    std::fs::write(&img, encode_pgm8(&half)).unwrap();
    let mask = p(dir.path(), "m.hcmk");
    ok(&["mask", "--size", "32", "--density", "0.5", "-o", &mask]);
    let out = p(dir.path(), "m.hcks");
    ok(&[
        "simulate", "--image", &img, "--mask", &mask, "--noise", "none", "-o", &out,
    ]);
    let factor: f64 = sidecar_value(&format!("{out}.txt"), "normalization").parse().unwrap();
    assert_eq!(factor, 128.0);

    let wrong = p(dir.path(), "w.hcmk");
    ok(&["mask", "--size", "16", "--density", "0.5", "-o", &wrong]);
    let r = hcorosa(&[
        "simulate", "--image", &img, "--mask", &wrong, "--noise", "none", "-o", &out,
    ]);
    assert_eq!(r.status.code(), Some(2));
    let both = hcorosa(&[
        "simulate",
        "--image",
        &img,
        "--mask",
        &mask,
        "--noise-psnr",
        "20",
        "--noise-sigma",
        "1",
        "-o",
        &out,
    ]);
    assert_eq!(both.status.code(), Some(2));
}

fn full_noiseless(dir: &Path, truth: &ScalarImage) -> String {
    let img = p(dir, "truth.hcrs");
    write_raw(&img, truth);
    let mask = p(dir, "full.hcmk");
    let n = truth.rows().to_string();
    ok(&["mask", "--size", &n, "--density", "1.0", "-o", &mask]);
    let meas = p(dir, "full.hcks");
    ok(&[
        "simulate", "--image", &img, "--mask", &mask, "--noise", "none", "-o", &meas,
    ]);
    meas
}

#[test]
fn reconstruct_unregularized_hs_matches_zero_fill() {
    let dir = tempfile::tempdir().unwrap();
    let truth = Phantom::Shaded.render(32, 32);
    let meas = full_noiseless(dir.path(), &truth);
    let out = p(dir.path(), "rec.hcrs");
    let pgm = p(dir.path(), "rec.pgm");
    ok(&[
        "reconstruct",
        "-i",
        &meas,
        "--method",
        "hs",
        "--lambda-rel",
        "1e-8",
        "-o",
        &out,
        "--pgm",
        &pgm,
    ]);
    let rec = decode_image(&std::fs::read(&out).unwrap()).unwrap();
    let m = decode_samples(&std::fs::read(&meas).unwrap()).unwrap();
    let zf = zero_fill_invert(&m);
    let rmse = (rec
        .data()
        .iter()
        .zip(zf.data())
        .map(|(a, b)| (a - b).powi(2))
        .sum::<f64>()
        / rec.len() as f64)
        .sqrt();
    assert!(rmse <= 1e-3, "{rmse}");
    let (preview, maxval) = decode_pgm(&std::fs::read(&pgm).unwrap()).unwrap();
    assert_eq!((preview.shape(), maxval), ((32, 32), 65535));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(format!("{out}.json")).unwrap()).unwrap();
    assert_eq!(report["method"], "hs");
    assert_eq!(report["status"], "ok");
    assert!(report["report"]["iterations"].as_u64().unwrap() >= 1);
}

#[test]
fn reconstruct_degenerate_hcorosa_is_one_adaptive_pass_and_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let truth = Phantom::SheppLogan.render(32, 32);
    let img = p(dir.path(), "truth.hcrs");
    write_raw(&img, &truth);
    let mask = p(dir.path(), "m.hcmk");
    ok(&["mask", "--size", "32", "--density", "0.3", "--seed", "2", "-o", &mask]);
    let meas = p(dir.path(), "m.hcks");
    ok(&[
        "simulate",
        "--image",
        &img,
        "--mask",
        &mask,
        "--noise-psnr",
        "20",
        "--seed",
        "9",
        "-o",
        &meas,
    ]);
    let flags = [
        "--method",
        "hcorosa",
        "--levels",
        "0",
        "--fixed-point-iters",
        "0",
        "--max-iters",
        "30",
    ];
    let (a, b) = (p(dir.path(), "a.hcrs"), p(dir.path(), "b.hcrs"));
    for out in [&a, &b] {
        let mut args = vec!["reconstruct", "-i", &meas, "-o", out];
        args.extend(flags);
        ok(&args);
    }
    let bytes = std::fs::read(&a).unwrap();
    assert_eq!(bytes, std::fs::read(&b).unwrap());

    let m = decode_samples(&std::fs::read(&meas).unwrap()).unwrap();
    let mut cfg = SolverConfig::for_shape(32, 32);
    cfg.max_admm_iters = 30;
    let (seed, _) = reconstruct_baseline(Baseline::Hs, &zero_fill_invert(&m), &m, &cfg, 0).unwrap();
    let (w, _) = guide_weights(&seed, hcorosa_core::PyramidConfig::default().tau_rel, false).unwrap();
    let (direct, _) = reconstruct_adaptive(&seed, &w, &m, &cfg, 0).unwrap();
    assert_eq!(decode_image(&bytes).unwrap(), direct);
}

#[test]
fn config_file_and_flags() {
    let dir = tempfile::tempdir().unwrap();
    let truth = Phantom::Ramps.render(16, 16);
    let meas = full_noiseless(dir.path(), &truth);
    let cfg = p(dir.path(), "run.conf");
    std::fs::write(&cfg, "method = tv1\nmax_iters = 3\n").unwrap();
    let out = p(dir.path(), "r.hcrs");
    ok(&["reconstruct", "-i", &meas, "--config", &cfg, "-o", &out]);
    let rep: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(format!("{out}.json")).unwrap()).unwrap();
    assert_eq!(rep["method"], "tv1");
    assert_eq!(rep["report"]["iterations"], 3);
    ok(&[
        "reconstruct",
        "-i",
        &meas,
        "--config",
        &cfg,
        "--max-iters",
        "2",
        "-o",
        &out,
    ]);
    let rep: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(format!("{out}.json")).unwrap()).unwrap();
    assert_eq!(rep["report"]["iterations"], 2);
    std::fs::write(&cfg, "max_iters = many\n").unwrap();
    assert_eq!(
        hcorosa(&["reconstruct", "-i", &meas, "--config", &cfg, "-o", &out])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn bad_measurement_file_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = p(dir.path(), "bad.hcks");
    std::fs::write(&bad, b"HCKS garbage").unwrap();
    let r = hcorosa(&["reconstruct", "-i", &bad, "-o", &p(dir.path(), "o.hcrs")]);
    assert_eq!(r.status.code(), Some(2));
}

fn scores(out: &str) -> (f64, f64, f64) {
    let get = |k: &str| -> f64 {
        out.lines()
            .find_map(|l| l.strip_prefix(k))
            .unwrap()
            .trim()
            .parse()
            .unwrap()
    };
    (get("snr_db"), get("ssim"), get("psnr_db"))
}

#[test]
fn evaluate_cases() {
    let dir = tempfile::tempdir().unwrap();
    let truth = Phantom::SheppLogan.render(32, 32);
    let (r, z, n) = (
        p(dir.path(), "r.hcrs"),
        p(dir.path(), "z.hcrs"),
        p(dir.path(), "n.hcrs"),
    );
    write_raw(&r, &truth);
    write_raw(&z, &ScalarImage::zeros(32, 32));
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let noisy = ScalarImage::from_fn(32, 32, |r, c| truth.get(r, c) + rng.random_range(-0.1..0.1));
    write_raw(&n, &noisy);
    let csv = p(dir.path(), "scores.csv");

    let (_, s, _) = scores(&ok(&["evaluate", "--reference", &r, "--reconstruction", &r]));
    assert_eq!(s, 1.0);
    let (snr, _, _) = scores(&ok(&["evaluate", "--reference", &r, "--reconstruction", &z]));
    assert_eq!(snr, 0.0);
    let (snr, s, ps) = scores(&ok(&[
        "evaluate",
        "--reference",
        &r,
        "--reconstruction",
        &n,
        "--csv",
        &csv,
    ]));
    assert!((snr - hcorosa_core::snr(&truth, &noisy).unwrap()).abs() < 1e-4);
    assert!((s - hcorosa_core::ssim(&truth, &noisy).unwrap()).abs() < 1e-6);
    assert!((ps - hcorosa_core::psnr(&truth, &noisy).unwrap()).abs() < 1e-4);
    ok(&["evaluate", "--reference", &r, "--reconstruction", &n, "--csv", &csv]);
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().count(), 3);
    assert!(text.starts_with("reference,reconstruction,snr_db,ssim,psnr_db\n"));

    let small = p(dir.path(), "s.hcrs");
    write_raw(&small, &ScalarImage::zeros(16, 16));
    let out = hcorosa(&["evaluate", "--reference", &r, "--reconstruction", &small]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bench_rows_header_and_repeatability() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (p(dir.path(), "a.csv"), p(dir.path(), "b.csv"));
    let args = |out: &str| -> Vec<String> {
        [
            "bench",
            "--images",
            "shepp-logan",
            "--size",
            "32",
            "--methods",
            "tv1,hs",
            "--masks",
            "random",
            "--densities",
            "0.3",
            "--seeds",
            "0-2",
            "--max-iters",
            "5",
            "--no-timing",
            "-o",
            out,
        ]
        .map(String::from)
        .to_vec()
    };
    for out in [&a, &b] {
        let v = args(out);
        let refs: Vec<&str> = v.iter().map(String::as_str).collect();
        let summary = ok(&refs);
        assert!(summary.contains("tv1") && summary.contains("mean ssim"));
    }
    let text = std::fs::read_to_string(&a).unwrap();
    assert_eq!(text, std::fs::read_to_string(&b).unwrap());
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "method,image,mask,density,noise,snr_db,ssim,iters,wall_s,seed"
    );
    assert_eq!(lines.count(), 6);
}
