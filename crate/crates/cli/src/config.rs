//! Methods, their parameters and layered `key = value` configuration.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use hcorosa_core::multires::hcorosa_detailed;
use hcorosa_core::solver::{DEFAULT_LAMBDA_REL, DEFAULT_PENALTY_REL};
use hcorosa_core::{
    reconstruct_baseline, zero_fill_invert, Baseline, ComplexSamples, MaskKind, MaskSpec, PyramidConfig,
    ReconstructionReport, ScalarImage, SolverConfig,
};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Hcorosa,
    /// H-COROSA with equal weights on both canonical second derivatives.
    Corosa,
    Tv1,
    Tv2,
    Hs,
}

impl Method {
    pub const ALL: [Method; 5] = [Method::Hcorosa, Method::Corosa, Method::Tv1, Method::Tv2, Method::Hs];

    pub fn name(&self) -> &'static str {
        match self {
            Method::Hcorosa => "hcorosa",
            Method::Corosa => "corosa",
            Method::Tv1 => "tv1",
            Method::Tv2 => "tv2",
            Method::Hs => "hs",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| format!("unknown method '{s}' (expected hcorosa, corosa, tv1, tv2 or hs)"))
    }
}

/// Solver and pyramid settings shared by every method.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodParams {
    /// `lambda = lambda_rel * rows * cols`.
    pub lambda_rel: f64,
    /// `c = penalty_rel * lambda`.
    pub penalty_rel: f64,
    pub max_iters: usize,
    pub primal_tol: f64,
    pub cg_tol: f64,
    pub cg_max_iters: usize,
    pub levels: u32,
    pub fixed_point_iters: usize,
    pub tau_rel: f64,
}

impl Default for MethodParams {
    fn default() -> Self {
        let s = SolverConfig::for_shape(1, 1);
        let p = PyramidConfig::default();
        Self {
            lambda_rel: DEFAULT_LAMBDA_REL,
            penalty_rel: DEFAULT_PENALTY_REL,
            max_iters: s.max_admm_iters,
            primal_tol: s.primal_tol,
            cg_tol: s.cg_tol,
            cg_max_iters: s.cg_max_iters,
            levels: p.levels,
            fixed_point_iters: p.fixed_point_iters,
            tau_rel: p.tau_rel,
        }
    }
}

impl MethodParams {
    pub fn solver_config(&self, rows: usize, cols: usize) -> SolverConfig {
        let mut cfg = SolverConfig::with_relative_lambda(rows, cols, self.lambda_rel);
        cfg.penalty_c = self.penalty_rel * cfg.lambda;
        cfg.max_admm_iters = self.max_iters;
        cfg.primal_tol = self.primal_tol;
        cfg.cg_tol = self.cg_tol;
        cfg.cg_max_iters = self.cg_max_iters;
        cfg
    }

    pub fn pyramid_config(&self, corosa: bool) -> PyramidConfig {
        PyramidConfig {
            levels: self.levels,
            fixed_point_iters: self.fixed_point_iters,
            tau_rel: self.tau_rel,
            corosa,
            ..Default::default()
        }
    }

    /// Overlays values from `layers` (flags first, then file).
    pub fn apply(&mut self, layers: &Layers) -> Result<(), CliError> {
        layers.set(&mut self.lambda_rel, "lambda-rel")?;
        layers.set(&mut self.penalty_rel, "penalty-rel")?;
        layers.set(&mut self.max_iters, "max-iters")?;
        layers.set(&mut self.primal_tol, "primal-tol")?;
        layers.set(&mut self.cg_tol, "cg-tol")?;
        layers.set(&mut self.cg_max_iters, "cg-max-iters")?;
        layers.set(&mut self.levels, "levels")?;
        layers.set(&mut self.fixed_point_iters, "fixed-point-iters")?;
        layers.set(&mut self.tau_rel, "tau-rel")?;
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct MethodOutput {
    pub image: ScalarImage,
    pub report: ReconstructionReport,
    /// Pyramid scales `(j, s^(j))` for the multiresolution methods.
    pub scales: Vec<(u32, ScalarImage)>,
}

pub fn run_method(method: Method, m: &ComplexSamples, params: &MethodParams) -> hcorosa_core::Result<MethodOutput> {
    let (rows, cols) = m.shape();
    let cfg = params.solver_config(rows, cols);
    let baseline = |kind| -> hcorosa_core::Result<MethodOutput> {
        let (image, report) = reconstruct_baseline(kind, &zero_fill_invert(m), m, &cfg, 0)?;
        Ok(MethodOutput {
            image,
            report,
            scales: Vec::new(),
        })
    };
    match method {
        Method::Tv1 => baseline(Baseline::Tv1),
        Method::Tv2 => baseline(Baseline::Tv2),
        Method::Hs => baseline(Baseline::Hs),
        Method::Hcorosa | Method::Corosa => {
            let out = hcorosa_detailed(m, &params.pyramid_config(method == Method::Corosa), &cfg)?;
            Ok(MethodOutput {
                image: out.image,
                report: out.report,
                scales: out.pyramid.scales,
            })
        }
    }
}

/// Noise setting for simulation. Exactly one mode is active.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum NoiseSpec {
    None,
    /// Target full-mask zero-fill PSNR in dB.
    Psnr(f64),
    /// Explicit deviation per real/imaginary component.
    Sigma(f64),
}

impl NoiseSpec {
    pub fn label(&self) -> String {
        match self {
            NoiseSpec::None => "none".into(),
            NoiseSpec::Psnr(db) => format!("psnr{db}"),
            NoiseSpec::Sigma(s) => format!("sigma{s}"),
        }
    }
}

impl FromStr for NoiseSpec {
    type Err = String;

    /// `none`, `psnr:<dB>` or `sigma:<value>`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let num = |v: &str| {
            v.trim()
                .parse::<f64>()
                .map_err(|e| format!("bad noise value '{v}': {e}"))
        };
        match s.trim().split_once(':') {
            None if s.trim() == "none" => Ok(NoiseSpec::None),
            Some(("psnr", v)) => num(v).map(NoiseSpec::Psnr),
            Some(("sigma", v)) => {
                let v = num(v)?;
                if v >= 0.0 {
                    Ok(NoiseSpec::Sigma(v))
                } else {
                    Err(format!("noise sigma must be >= 0, got {v}"))
                }
            }
            _ => Err(format!(
                "bad noise setting '{s}' (expected none, psnr:<dB> or sigma:<value>)"
            )),
        }
    }
}

/// Everything one `reconstruct` or `simulate` run needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub method: Method,
    pub mask: MaskSource,
    pub noise: NoiseSpec,
    pub seeds: Vec<u64>,
    pub params: MethodParams,
    pub input: Option<PathBuf>,
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum MaskSource {
    Spec(MaskSpec),
    File(PathBuf),
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            method: Method::Hcorosa,
            mask: MaskSource::Spec(MaskSpec::new(MaskKind::Random, 128, 128, 0.2, 0)),
            noise: NoiseSpec::Psnr(20.0),
            seeds: vec![0],
            params: MethodParams::default(),
            input: None,
            output: None,
        }
    }
}

impl RunConfig {
    pub fn from_layers(layers: &Layers) -> Result<Self, CliError> {
        let mut cfg = RunConfig::default();
        layers.set(&mut cfg.method, "method")?;
        if let Some(p) = layers.get::<PathBuf>("mask")? {
            cfg.mask = MaskSource::File(p);
        } else if let MaskSource::Spec(spec) = &mut cfg.mask {
            layers.set(&mut spec.kind, "mask-kind")?;
            if let Some(n) = layers.get::<usize>("size")? {
                spec.rows = n;
                spec.cols = n;
            }
            layers.set(&mut spec.rows, "rows")?;
            layers.set(&mut spec.cols, "cols")?;
            layers.set(&mut spec.density, "density")?;
            layers.set(&mut spec.seed, "mask-seed")?;
        }
        cfg.noise = layers.noise()?.unwrap_or(cfg.noise);
        if let Some(s) = layers.get::<String>("seeds")? {
            cfg.seeds = parse_seeds(&s).map_err(CliError::input)?;
        }
        cfg.params.apply(layers)?;
        cfg.input = layers.get("input")?;
        cfg.output = layers.get("output")?;
        Ok(cfg)
    }
}

/// `3`, `1,4,9` or `0-9` (inclusive), or a mix of these.
pub fn parse_seeds(s: &str) -> Result<Vec<u64>, String> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let bad = |e: std::num::ParseIntError| format!("bad seed '{part}': {e}");
        match part.split_once('-') {
            Some((a, b)) => {
                let (a, b) = (
                    a.trim().parse::<u64>().map_err(bad)?,
                    b.trim().parse::<u64>().map_err(bad)?,
                );
                if b < a {
                    return Err(format!("empty seed range '{part}'"));
                }
                out.extend(a..=b);
            }
            None => out.push(part.parse().map_err(bad)?),
        }
    }
    if out.is_empty() {
        return Err("no seeds given".into());
    }
    Ok(out)
}

/// Parses a flat `key = value` file. `#` starts a comment.
pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>, String> {
    let mut map = BTreeMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| format!("line {}: expected key = value", n + 1))?;
        let key = normalize_key(k);
        if key.is_empty() {
            return Err(format!("line {}: empty key", n + 1));
        }
        if map.insert(key.clone(), v.trim().to_string()).is_some() {
            return Err(format!("line {}: duplicate key '{key}'", n + 1));
        }
    }
    Ok(map)
}

fn normalize_key(k: &str) -> String {
    k.trim().replace('_', "-")
}

/// Flag values over config-file values. Defaults are whatever the caller
/// starts from.
#[derive(Debug, Clone, Default)]
pub struct Layers {
    flags: BTreeMap<String, String>,
    file: BTreeMap<String, String>,
}

impl Layers {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_file(mut self, path: Option<&Path>) -> Result<Self, CliError> {
        if let Some(p) = path {
            let text = std::fs::read_to_string(p)
                .map_err(|e| CliError::input(format!("cannot read config {}: {e}", p.display())))?;
            self.file = parse_config_text(&text).map_err(|e| CliError::input(format!("{}: {e}", p.display())))?;
        }
        Ok(self)
    }

    pub fn with_file_text(mut self, text: &str) -> Result<Self, CliError> {
        self.file = parse_config_text(text).map_err(CliError::input)?;
        Ok(self)
    }

    /// Records a flag if it was given.
    pub fn flag<T: ToString>(&mut self, key: &str, value: Option<T>) {
        if let Some(v) = value {
            self.flags.insert(normalize_key(key), v.to_string());
        }
    }

    fn raw(&self, key: &str) -> Option<&String> {
        self.flags.get(key).or_else(|| self.file.get(key))
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>, CliError>
    where
        T::Err: fmt::Display,
    {
        match self.raw(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|e| CliError::input(format!("bad value '{v}' for {key}: {e}"))),
        }
    }

    pub fn set<T: FromStr>(&self, slot: &mut T, key: &str) -> Result<(), CliError>
    where
        T::Err: fmt::Display,
    {
        if let Some(v) = self.get(key)? {
            *slot = v;
        }
        Ok(())
    }

    /// Noise from `noise`, `noise-psnr` or `noise-sigma`. Within one layer
    /// at most one may be present; flags win over the file as a whole.
    pub fn noise(&self) -> Result<Option<NoiseSpec>, CliError> {
        for layer in [&self.flags, &self.file] {
            let given: Vec<NoiseSpec> = [
                layer.get("noise").map(|v| v.parse::<NoiseSpec>()),
                layer.get("noise-psnr").map(|v| format!("psnr:{v}").parse()),
                layer.get("noise-sigma").map(|v| format!("sigma:{v}").parse()),
            ]
            .into_iter()
            .flatten()
            .collect::<Result<_, _>>()
            .map_err(CliError::input)?;
            match given.len() {
                0 => continue,
                1 => return Ok(Some(given[0])),
                _ => return Err(CliError::input("give exactly one of noise, noise-psnr, noise-sigma")),
            }
        }
        Ok(None)
    }
}
