use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hcorosa_cli::bench::{default_threads, summary_text, threads_from_env};
use hcorosa_cli::commands::{
    cmd_bench, cmd_evaluate, cmd_mask, cmd_reconstruct, cmd_simulate, ReconstructArgs, SimulateArgs,
};
use hcorosa_cli::{BenchConfig, CliError, Layers, Method, MethodParams};
use hcorosa_core::sampling::DEFAULT_TOLERANCE;
use hcorosa_core::{MaskKind, MaskSpec};

#[derive(Parser)]
#[command(
    name = "hcorosa",
    version,
    about = "Multiresolution adaptive Hessian reconstruction from undersampled k-space"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a sampling mask (HCMK).
    Mask(MaskCmd),
    /// Simulate noisy k-space samples of an image (HCKS plus a sidecar).
    Simulate(SimulateCmd),
    /// Reconstruct an image from a measurement file.
    Reconstruct(ReconstructCmd),
    /// Score a reconstruction against a reference.
    Evaluate(EvaluateCmd),
    /// Run the phantom benchmark and write a CSV table.
    Bench(BenchCmd),
}

#[derive(Args)]
struct MaskCmd {
    #[arg(long, default_value = "random")]
    kind: MaskKind,
    /// Square size; overridden by --rows/--cols.
    #[arg(long, default_value_t = 128)]
    size: usize,
    #[arg(long)]
    rows: Option<usize>,
    #[arg(long)]
    cols: Option<usize>,
    #[arg(long)]
    density: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Allowed |achieved - requested| density.
    #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
    tolerance: f64,
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Args)]
struct NoiseArgs {
    /// `none`, `psnr:<dB>` or `sigma:<value>`.
    #[arg(long, conflicts_with_all = ["noise_psnr", "noise_sigma"])]
    noise: Option<String>,
    /// Target zero-fill PSNR in dB.
    #[arg(long, conflicts_with = "noise_sigma")]
    noise_psnr: Option<f64>,
    /// Noise deviation per real/imaginary component.
    #[arg(long)]
    noise_sigma: Option<f64>,
}

impl NoiseArgs {
    fn record(&self, l: &mut Layers) {
        l.flag("noise", self.noise.clone());
        l.flag("noise-psnr", self.noise_psnr);
        l.flag("noise-sigma", self.noise_sigma);
    }
}

#[derive(Args)]
struct ParamArgs {
    #[arg(long)]
    lambda_rel: Option<f64>,
    #[arg(long)]
    penalty_rel: Option<f64>,
    #[arg(long)]
    max_iters: Option<usize>,
    #[arg(long)]
    primal_tol: Option<f64>,
    #[arg(long)]
    cg_tol: Option<f64>,
    #[arg(long)]
    cg_max_iters: Option<usize>,
    /// Coarsest pyramid scale J.
    #[arg(long)]
    levels: Option<u32>,
    /// Full-resolution refinement passes K.
    #[arg(long)]
    fixed_point_iters: Option<usize>,
    #[arg(long)]
    tau_rel: Option<f64>,
}

impl ParamArgs {
    fn record(&self, l: &mut Layers) {
        l.flag("lambda-rel", self.lambda_rel);
        l.flag("penalty-rel", self.penalty_rel);
        l.flag("max-iters", self.max_iters);
        l.flag("primal-tol", self.primal_tol);
        l.flag("cg-tol", self.cg_tol);
        l.flag("cg-max-iters", self.cg_max_iters);
        l.flag("levels", self.levels);
        l.flag("fixed-point-iters", self.fixed_point_iters);
        l.flag("tau-rel", self.tau_rel);
    }
}

#[derive(Args)]
struct SimulateCmd {
    #[arg(long)]
    image: PathBuf,
    #[arg(long)]
    mask: PathBuf,
    #[command(flatten)]
    noise: NoiseArgs,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(short, long)]
    output: PathBuf,
    /// Defaults to `<output>.txt`.
    #[arg(long)]
    sidecar: Option<PathBuf>,
    /// Flat `key = value` file; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct ReconstructCmd {
    #[arg(short, long)]
    input: PathBuf,
    #[arg(long)]
    method: Option<Method>,
    #[command(flatten)]
    params: ParamArgs,
    /// HCRS raw output.
    #[arg(short, long)]
    output: PathBuf,
    /// Optional 16-bit PGM preview.
    #[arg(long)]
    pgm: Option<PathBuf>,
    /// JSON report; defaults to `<output>.json`.
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct EvaluateCmd {
    #[arg(long)]
    reference: PathBuf,
    #[arg(long)]
    reconstruction: PathBuf,
    /// Append a row to this CSV file.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct BenchCmd {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Comma-separated phantoms: shepp-logan, shaded, ramps.
    #[arg(long)]
    images: Option<String>,
    #[arg(long)]
    size: Option<usize>,
    #[arg(long)]
    methods: Option<String>,
    #[arg(long)]
    masks: Option<String>,
    #[arg(long)]
    densities: Option<String>,
    /// Seeds: `3`, `1,4,9` or `0-9`.
    #[arg(long)]
    seeds: Option<String>,
    #[command(flatten)]
    noise: NoiseArgs,
    #[command(flatten)]
    params: ParamArgs,
    /// Write 0 for wall times so identical runs give identical files.
    #[arg(long)]
    no_timing: bool,
    /// CSV path; stdout when absent.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Mask(a) => {
            let mut spec = MaskSpec::new(
                a.kind,
                a.rows.unwrap_or(a.size),
                a.cols.unwrap_or(a.size),
                a.density,
                a.seed,
            );
            spec.tolerance = a.tolerance;
            println!("{}", cmd_mask(&spec, &a.output)?);
        }
        Command::Simulate(a) => {
            let mut l = Layers::new().with_file(a.config.as_deref())?;
            a.noise.record(&mut l);
            l.flag("seed", a.seed);
            let noise = l
                .noise()?
                .ok_or_else(|| CliError::input("give one of --noise, --noise-psnr, --noise-sigma"))?;
            let args = SimulateArgs {
                image: a.image,
                mask: a.mask,
                noise,
                seed: l.get("seed")?.unwrap_or(0),
                output: a.output,
                sidecar: a.sidecar,
            };
            let side = cmd_simulate(&args)?;
            print!("{}", side.to_text());
        }
        Command::Reconstruct(a) => {
            let mut l = Layers::new().with_file(a.config.as_deref())?;
            a.params.record(&mut l);
            l.flag("method", a.method);
            let mut params = MethodParams::default();
            params.apply(&l)?;
            let args = ReconstructArgs {
                input: a.input,
                method: l.get("method")?.unwrap_or(Method::Hcorosa),
                params,
                output: a.output,
                pgm: a.pgm,
                report: a.report,
            };
            let rep = cmd_reconstruct(&args)?;
            if let Some(r) = rep.report {
                println!(
                    "{}: {} iterations, cost {:.6e}, wrote {}",
                    args.method,
                    r.iterations,
                    r.cost,
                    args.output.display()
                );
            }
        }
        Command::Evaluate(a) => {
            let s = cmd_evaluate(&a.reference, &a.reconstruction, a.csv.as_deref())?;
            println!("snr_db {:.4}\nssim {:.6}\npsnr_db {:.4}", s.snr_db, s.ssim, s.psnr_db);
        }
        Command::Bench(a) => {
            let mut l = Layers::new().with_file(a.config.as_deref())?;
            l.flag("images", a.images);
            l.flag("size", a.size);
            l.flag("methods", a.methods);
            l.flag("masks", a.masks);
            l.flag("densities", a.densities);
            l.flag("seeds", a.seeds);
            a.noise.record(&mut l);
            a.params.record(&mut l);
            if a.no_timing {
                l.flag("record-timing", Some(false));
            }
            let mut cfg = BenchConfig::from_layers(&l)?;
            cfg.threads = match threads_from_env()? {
                Some(t) => t,
                None => l.get("threads")?.unwrap_or_else(default_threads),
            };
            let out = cmd_bench(&cfg, a.output.as_deref())?;
            let summary = summary_text(&out.summary);
            if a.output.is_some() {
                print!("{summary}");
            } else {
                print!("{}", out.csv);
                eprint!("{summary}");
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code as u8)
        }
    }
}
