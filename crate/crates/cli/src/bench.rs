//! Benchmark harness: built-in phantoms, masks, noise and methods crossed
//! with seeds, one CSV row per reconstruction.

use std::fmt::Write as _;
use std::time::Instant;

use hcorosa_core::{
    calibrate_noise_sigma, generate_mask, score, simulate_measurements, ssim, MaskKind, MaskSpec, Phantom,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{parse_seeds, Layers, Method, MethodParams, NoiseSpec};
use crate::CliError;

pub const CSV_HEADER: &str = "method,image,mask,density,noise,snr_db,ssim,iters,wall_s,seed";

/// Noise draws use `seed + NOISE_SEED_OFFSET` so they never share a stream with the mask.
pub const NOISE_SEED_OFFSET: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchConfig {
    pub images: Vec<Phantom>,
    pub size: usize,
    pub methods: Vec<Method>,
    pub masks: Vec<MaskKind>,
    pub densities: Vec<f64>,
    pub seeds: Vec<u64>,
    pub noise: NoiseSpec,
    pub params: MethodParams,
    /// Write measured wall times; off gives byte-reproducible output.
    pub record_timing: bool,
    /// Worker threads; `0` runs everything on the calling thread.
    pub threads: usize,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            images: Phantom::ALL.to_vec(),
            size: 128,
            methods: vec![Method::Hcorosa, Method::Hs, Method::Tv1],
            masks: vec![MaskKind::Random],
            densities: vec![0.1, 0.2],
            seeds: (0..10).collect(),
            noise: NoiseSpec::Psnr(20.0),
            params: MethodParams::default(),
            record_timing: true,
            threads: 0,
        }
    }
}

fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>, CliError>
where
    T::Err: std::fmt::Display,
{
    let out: Vec<T> = s
        .split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| p.parse().map_err(|e| CliError::input(format!("bad {what} '{p}': {e}"))))
        .collect::<Result<_, _>>()?;
    if out.is_empty() {
        return Err(CliError::input(format!("empty {what} list")));
    }
    Ok(out)
}

impl BenchConfig {
    pub fn from_layers(layers: &Layers) -> Result<Self, CliError> {
        let mut cfg = BenchConfig::default();
        if let Some(s) = layers.get::<String>("images")? {
            cfg.images = parse_list(&s, "image")?;
        }
        layers.set(&mut cfg.size, "size")?;
        if let Some(s) = layers.get::<String>("methods")? {
            cfg.methods = parse_list(&s, "method")?;
        }
        if let Some(s) = layers.get::<String>("masks")? {
            cfg.masks = parse_list(&s, "mask kind")?;
        }
        if let Some(s) = layers.get::<String>("densities")? {
            cfg.densities = parse_list(&s, "density")?;
        }
        if let Some(s) = layers.get::<String>("seeds")? {
            cfg.seeds = parse_seeds(&s).map_err(CliError::input)?;
        }
        cfg.noise = layers.noise()?.unwrap_or(cfg.noise);
        cfg.params.apply(layers)?;
        layers.set(&mut cfg.record_timing, "record-timing")?;
        layers.set(&mut cfg.threads, "threads")?;
        Ok(cfg)
    }

    pub fn cases(&self) -> Vec<BenchCase> {
        let mut out = Vec::new();
        for &image in &self.images {
            for &mask in &self.masks {
                for &density in &self.densities {
                    for &seed in &self.seeds {
                        out.push(BenchCase {
                            image,
                            mask,
                            density,
                            seed,
                        });
                    }
                }
            }
        }
        out
    }
}

/// One simulated problem; every method runs on it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchCase {
    pub image: Phantom,
    pub mask: MaskKind,
    pub density: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub method: Method,
    pub image: String,
    pub mask: String,
    pub density: f64,
    pub noise: String,
    pub snr_db: f64,
    pub ssim: f64,
    pub iters: usize,
    pub wall_s: f64,
    pub seed: u64,
    /// Failure message; the scores are NaN when set.
    pub error: Option<String>,
}

impl BenchRow {
    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{:.6},{:.6},{},{:.3},{}",
            self.method,
            self.image,
            self.mask,
            self.density,
            self.noise,
            self.snr_db,
            self.ssim,
            self.iters,
            self.wall_s,
            self.seed
        )
    }
}

/// SSIM of the coarsest and finest pyramid scales of one multiresolution run.
#[derive(Debug, Clone, PartialEq)]
pub struct PyramidScores {
    pub method: Method,
    pub coarsest_ssim: f64,
    pub finest_ssim: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CaseResult {
    pub case: BenchCase,
    pub rows: Vec<BenchRow>,
    pub pyramid: Vec<PyramidScores>,
}

fn failed_row(case: &BenchCase, method: Method, noise: &NoiseSpec, msg: String) -> BenchRow {
    BenchRow {
        method,
        image: case.image.to_string(),
        mask: case.mask.to_string(),
        density: case.density,
        noise: noise.label(),
        snr_db: f64::NAN,
        ssim: f64::NAN,
        iters: 0,
        wall_s: 0.0,
        seed: case.seed,
        error: Some(msg),
    }
}

pub fn run_case(cfg: &BenchConfig, case: &BenchCase) -> CaseResult {
    let mut result = CaseResult {
        case: *case,
        rows: Vec::new(),
        pyramid: Vec::new(),
    };
    let truth = case.image.render(cfg.size, cfg.size);
    let setup = || -> hcorosa_core::Result<_> {
        let mask = generate_mask(&MaskSpec::new(case.mask, cfg.size, cfg.size, case.density, case.seed))?;
        let sigma = match cfg.noise {
            NoiseSpec::None => 0.0,
            NoiseSpec::Sigma(s) => s,
            NoiseSpec::Psnr(db) => calibrate_noise_sigma(&truth, db)?,
        };
        simulate_measurements(&truth, &mask, sigma, case.seed.wrapping_add(NOISE_SEED_OFFSET))
    };
    let m = match setup() {
        Ok(m) => m,
        Err(e) => {
            for &method in &cfg.methods {
                result.rows.push(failed_row(case, method, &cfg.noise, e.to_string()));
            }
            return result;
        }
    };
    for &method in &cfg.methods {
        let start = Instant::now();
        let run = crate::config::run_method(method, &m, &cfg.params).and_then(|out| {
            let sc = score(&truth, &out.image)?;
            let pyr = match (out.scales.first(), out.scales.last()) {
                (Some((_, c)), Some((_, f))) if out.scales.len() > 1 => Some(PyramidScores {
                    method,
                    coarsest_ssim: ssim(&truth, c)?,
                    finest_ssim: ssim(&truth, f)?,
                }),
                _ => None,
            };
            Ok((sc, out.report.iterations, pyr))
        });
        let wall = if cfg.record_timing {
            start.elapsed().as_secs_f64()
        } else {
            0.0
        };
        match run {
            Ok((sc, iters, pyr)) => {
                result.rows.push(BenchRow {
                    method,
                    image: case.image.to_string(),
                    mask: case.mask.to_string(),
                    density: case.density,
                    noise: cfg.noise.label(),
                    snr_db: sc.snr_db,
                    ssim: sc.ssim,
                    iters,
                    wall_s: wall,
                    seed: case.seed,
                    error: None,
                });
                result.pyramid.extend(pyr);
            }
            Err(e) => result.rows.push(failed_row(case, method, &cfg.noise, e.to_string())),
        }
    }
    result
}

/// Runs every case. Results come back in case order whatever the thread count.
pub fn run_bench(cfg: &BenchConfig) -> Result<Vec<CaseResult>, CliError> {
    let cases = cfg.cases();
    if cfg.threads == 0 {
        return Ok(cases.iter().map(|c| run_case(cfg, c)).collect());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| CliError::input(format!("cannot start {} worker threads: {e}", cfg.threads)))?;
    Ok(pool.install(|| cases.par_iter().map(|c| run_case(cfg, c)).collect()))
}

pub fn rows(results: &[CaseResult]) -> impl Iterator<Item = &BenchRow> {
    results.iter().flat_map(|r| r.rows.iter())
}

pub fn to_csv(results: &[CaseResult]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for row in rows(results) {
        out.push_str(&row.csv_line());
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodSummary {
    pub method: Method,
    pub rows: usize,
    pub failures: usize,
    pub mean_ssim: f64,
    pub mean_snr_db: f64,
}

/// Mean scores per method over the successful rows, in the configured method order.
pub fn summarize(cfg: &BenchConfig, results: &[CaseResult]) -> Vec<MethodSummary> {
    cfg.methods
        .iter()
        .map(|&method| {
            let all: Vec<&BenchRow> = rows(results).filter(|r| r.method == method).collect();
            let ok: Vec<&&BenchRow> = all.iter().filter(|r| r.error.is_none()).collect();
            let mean = |f: &dyn Fn(&BenchRow) -> f64| {
                if ok.is_empty() {
                    f64::NAN
                } else {
                    ok.iter().map(|r| f(r)).sum::<f64>() / ok.len() as f64
                }
            };
            MethodSummary {
                method,
                rows: all.len(),
                failures: all.len() - ok.len(),
                mean_ssim: mean(&|r| r.ssim),
                mean_snr_db: mean(&|r| r.snr_db),
            }
        })
        .collect()
}

pub fn summary_text(summary: &[MethodSummary]) -> String {
    let mut out = String::new();
    for s in summary {
        let _ = writeln!(
            out,
            "{:<8} rows {:>4}  failed {:>3}  mean ssim {:.4}  mean snr {:.2} dB",
            s.method.name(),
            s.rows,
            s.failures,
            s.mean_ssim,
            s.mean_snr_db
        );
    }
    out
}

/// Worker count from `HCOROSA_THREADS` if set; `0` means single-threaded.
pub fn threads_from_env() -> Result<Option<usize>, CliError> {
    match std::env::var("HCOROSA_THREADS") {
        Err(_) => Ok(None),
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|e| CliError::input(format!("bad HCOROSA_THREADS '{v}': {e}"))),
    }
}

pub fn default_threads() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> BenchConfig {
        let mut params = MethodParams::default();
        params.max_iters = 5;
        BenchConfig {
            images: vec![Phantom::SheppLogan],
            size: 32,
            methods: vec![Method::Tv1, Method::Hs],
            masks: vec![MaskKind::Random],
            densities: vec![0.3],
            seeds: vec![1, 2, 3],
            noise: NoiseSpec::Psnr(20.0),
            params,
            record_timing: false,
            threads: 0,
        }
    }

    #[test]
    fn cardinality_and_header() {
        let cfg = tiny();
        let res = run_bench(&cfg).unwrap();
        assert_eq!(rows(&res).count(), 6);
        let csv = to_csv(&res);
        assert_eq!(csv.lines().next().unwrap(), CSV_HEADER);
        assert_eq!(csv.lines().count(), 7);
        assert!(rows(&res).all(|r| r.error.is_none() && r.wall_s == 0.0));
        let s = summarize(&cfg, &res);
        assert_eq!(s.len(), 2);
        assert_eq!(s[0].rows, 3);
    }

    #[test]
    fn failures_are_recorded_per_row() {
        let mut cfg = tiny();
        cfg.densities = vec![0.3, 1e-6];
        let res = run_bench(&cfg).unwrap();
        let failed: Vec<_> = rows(&res).filter(|r| r.error.is_some()).collect();
        assert_eq!(failed.len(), 6);
        assert!(failed.iter().all(|r| r.ssim.is_nan()));
        assert_eq!(rows(&res).count(), 12);
    }

    #[test]
    fn thread_count_does_not_change_output() {
        let mut cfg = tiny();
        let a = to_csv(&run_bench(&cfg).unwrap());
        cfg.threads = 2;
        assert_eq!(to_csv(&run_bench(&cfg).unwrap()), a);
    }
}
