//! The five subcommands, independent of argument parsing.

use std::fs::OpenOptions;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use hcorosa_core::{
    calibrate_noise_sigma, generate_mask, psnr, simulate_measurements, snr, ssim, MaskSpec, ReconstructionReport,
    ScalarImage,
};
use serde::{Deserialize, Serialize};

use crate::bench::{run_bench, summarize, to_csv, BenchConfig, MethodSummary};
use crate::config::{run_method, Method, MethodParams, NoiseSpec};
use crate::io;
use crate::CliError;

pub fn cmd_mask(spec: &MaskSpec, output: &Path) -> Result<String, CliError> {
    let mask = generate_mask(spec)?;
    io::write_mask(output, &mask)?;
    Ok(format!(
        "{}: {} mask {}x{}, {} samples, density {:.4}",
        output.display(),
        spec.kind,
        mask.rows(),
        mask.cols(),
        mask.sample_count(),
        mask.density()
    ))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulateArgs {
    pub image: PathBuf,
    pub mask: PathBuf,
    pub noise: NoiseSpec,
    pub seed: u64,
    pub output: PathBuf,
    /// Defaults to the output path with `.txt` appended.
    pub sidecar: Option<PathBuf>,
}

/// Facts needed to reproduce or interpret a measurement file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub sigma: f64,
    pub seed: u64,
    /// The input image was divided by this before simulation.
    pub normalization: f64,
    pub noise: String,
    pub rows: usize,
    pub cols: usize,
    pub samples: usize,
}

impl Sidecar {
    pub fn to_text(&self) -> String {
        format!(
            "sigma = {}\nseed = {}\nnormalization = {}\nnoise = {}\nrows = {}\ncols = {}\nsamples = {}\n",
            self.sigma, self.seed, self.normalization, self.noise, self.rows, self.cols, self.samples
        )
    }
}

fn appended(path: &Path, ext: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(ext);
    PathBuf::from(s)
}

pub fn cmd_simulate(args: &SimulateArgs) -> Result<Sidecar, CliError> {
    let img = io::read_normalized(&args.image)?;
    let mask = io::read_mask(&args.mask)?;
    if mask.shape() != img.image.shape() {
        return Err(CliError::input(format!(
            "mask is {:?} but image is {:?}",
            mask.shape(),
            img.image.shape()
        )));
    }
    let sigma = match args.noise {
        NoiseSpec::None => 0.0,
        NoiseSpec::Sigma(s) => s,
        NoiseSpec::Psnr(db) => calibrate_noise_sigma(&img.image, db)?,
    };
    let m = simulate_measurements(&img.image, &mask, sigma, args.seed)?;
    io::write_samples(&args.output, &m)?;
    let side = Sidecar {
        sigma,
        seed: args.seed,
        normalization: img.factor,
        noise: args.noise.label(),
        rows: mask.rows(),
        cols: mask.cols(),
        samples: mask.sample_count(),
    };
    let path = args.sidecar.clone().unwrap_or_else(|| appended(&args.output, ".txt"));
    io::write_text(&path, &side.to_text())?;
    Ok(side)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReconstructArgs {
    pub input: PathBuf,
    pub method: Method,
    pub params: MethodParams,
    pub output: PathBuf,
    pub pgm: Option<PathBuf>,
    /// Defaults to the output path with `.json` appended.
    pub report: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub method: Method,
    pub params: MethodParams,
    pub rows: usize,
    pub cols: usize,
    pub status: String,
    pub error: Option<String>,
    pub report: Option<ReconstructionReport>,
}

impl ReconstructArgs {
    pub fn report_path(&self) -> PathBuf {
        self.report.clone().unwrap_or_else(|| appended(&self.output, ".json"))
    }
}

pub fn cmd_reconstruct(args: &ReconstructArgs) -> Result<RunReport, CliError> {
    let m = io::read_samples(&args.input)?;
    let (rows, cols) = m.shape();
    let mut rep = RunReport {
        method: args.method,
        params: args.params.clone(),
        rows,
        cols,
        status: "ok".into(),
        error: None,
        report: None,
    };
    let write_report = |rep: &RunReport| -> Result<(), CliError> {
        let text = serde_json::to_string_pretty(rep).expect("report serializes");
        io::write_text(&args.report_path(), &(text + "\n"))
    };
    match run_method(args.method, &m, &args.params) {
        Ok(out) => {
            io::write_raw(&args.output, &out.image)?;
            if let Some(p) = &args.pgm {
                io::write_pgm16(p, &out.image)?;
            }
            rep.report = Some(out.report);
            write_report(&rep)?;
            Ok(rep)
        }
        Err(e) => {
            let err = CliError::from(e);
            if err.code == crate::EXIT_NUMERICAL {
                rep.status = "numerical failure".into();
                rep.error = Some(err.message.clone());
                write_report(&rep)?;
            }
            Err(err)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scores {
    pub snr_db: f64,
    pub ssim: f64,
    pub psnr_db: f64,
}

/// Reference in `[0, 1]` after peak normalization. Raw reconstructions are
/// taken as they are (they already live in normalized units); PGM
/// reconstructions are divided by their `maxval`.
fn load_reconstruction(path: &Path) -> Result<ScalarImage, CliError> {
    let raw = io::read_image(path)?;
    Ok(match raw.maxval {
        Some(mv) => raw.image.map(|v| v / mv as f64),
        None => raw.image,
    })
}

pub fn cmd_evaluate(reference: &Path, reconstruction: &Path, csv: Option<&Path>) -> Result<Scores, CliError> {
    let r = io::read_normalized(reference)?.image;
    let s = load_reconstruction(reconstruction)?;
    if r.shape() != s.shape() {
        return Err(CliError::input(format!(
            "reference is {:?} but reconstruction is {:?}",
            r.shape(),
            s.shape()
        )));
    }
    let scores = Scores {
        snr_db: snr(&r, &s)?,
        ssim: ssim(&r, &s)?,
        psnr_db: psnr(&r, &s)?,
    };
    if let Some(p) = csv {
        let fresh = !p.exists();
        let mut f = OpenOptions::new()
            .create(true)
            .append(true)
            .open(p)
            .map_err(|e| CliError::input(format!("cannot open {}: {e}", p.display())))?;
        let mut text = String::new();
        if fresh {
            text.push_str("reference,reconstruction,snr_db,ssim,psnr_db\n");
        }
        text.push_str(&format!(
            "{},{},{:.6},{:.6},{:.6}\n",
            reference.display(),
            reconstruction.display(),
            scores.snr_db,
            scores.ssim,
            scores.psnr_db
        ));
        f.write_all(text.as_bytes())
            .map_err(|e| CliError::input(format!("cannot write {}: {e}", p.display())))?;
    }
    Ok(scores)
}

pub struct BenchOutput {
    pub csv: String,
    pub summary: Vec<MethodSummary>,
}

pub fn cmd_bench(cfg: &BenchConfig, output: Option<&Path>) -> Result<BenchOutput, CliError> {
    let results = run_bench(cfg)?;
    let csv = to_csv(&results);
    if let Some(p) = output {
        io::write_text(p, &csv)?;
    }
    Ok(BenchOutput {
        csv,
        summary: summarize(cfg, &results),
    })
}
