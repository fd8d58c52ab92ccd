use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gawd_core::io::{self, Format};
use gawd_core::pipeline::{
    self, default_cutoff_sweep, file_digest, run_denoise, score, CompareSpec, Method, MethodParams,
};
use gawd_core::synth::{self, GridPhantomParams, TwoLayerParams};
use gawd_core::thresholding::Shrinkage;
use gawd_core::{map_project, Data, Error, ErrorKind, Result};

/// Sample rate assumed for CSV input when `--fs-hz` is not given.
const DEFAULT_FS_HZ: f64 = 80e6;

#[derive(Parser)]
#[command(name = "gawd", version, about = "Wavelet denoising for photoacoustic A-lines and scan grids")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Render a synthetic phantom, optionally with noise.
    Synth(SynthArgs),
    /// Denoise a signal or grid with one method.
    Denoise(DenoiseArgs),
    /// Run several methods on the same input and write a report.
    Compare(CompareArgs),
    /// Maximum amplitude projection of a grid, written as a CSV matrix.
    Map(MapArgs),
    /// Score a signal or grid against a reference.
    Metrics(MetricsArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Scene {
    /// Single bipolar pulse.
    Pulse,
    /// Coupled burst, surface and deep layer on one A-line.
    TwoLayer,
    /// Raster phantom used by the grid benchmark.
    Grid,
}

#[derive(Clone, Copy, ValueEnum)]
enum ShrinkArg {
    Hard,
    Soft,
}

#[derive(Args)]
struct FileOpts {
    /// csv or raw; inferred from the extension when omitted.
    #[arg(long)]
    format: Option<Format>,
    /// Sample rate for CSV input (default 80e6). RAW files carry their own.
    #[arg(long)]
    fs_hz: Option<f64>,
}

#[derive(Args)]
struct MethodOpts {
    #[arg(long, default_value = "db8")]
    wavelet: String,
    #[arg(long, default_value_t = 6)]
    levels: usize,
    /// Shrinkage for the classic rules.
    #[arg(long, value_enum, default_value = "soft")]
    shrinkage: ShrinkArg,
    /// Butterworth cutoff.
    #[arg(long, default_value_t = 15e6)]
    cutoff_hz: f64,
    /// Butterworth order.
    #[arg(long, default_value_t = 4)]
    order: usize,
    /// Filter forward and backward instead of a single causal pass.
    #[arg(long)]
    zero_phase: bool,
}

impl MethodOpts {
    fn params(&self) -> MethodParams {
        MethodParams {
            wavelet: self.wavelet.clone(),
            levels: self.levels,
            shrinkage: match self.shrinkage {
                ShrinkArg::Hard => Shrinkage::Hard,
                ShrinkArg::Soft => Shrinkage::Soft,
            },
            cutoff_hz: self.cutoff_hz,
            order: self.order,
            zero_phase: self.zero_phase,
        }
    }
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, value_enum, default_value = "two-layer")]
    scene: Scene,
    #[arg(long)]
    output: PathBuf,
    #[arg(long)]
    format: Option<Format>,
    #[arg(long, default_value_t = DEFAULT_FS_HZ)]
    fs_hz: f64,
    /// Noise added so the result has this SNR; clean when omitted.
    #[arg(long)]
    noise_snr_db: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Grid rows.
    #[arg(long, default_value_t = 16)]
    ny: usize,
    /// Grid columns.
    #[arg(long, default_value_t = 16)]
    nx: usize,
    /// Samples per A-line.
    #[arg(long, default_value_t = 4096)]
    nt: usize,
    /// Pulse centre frequency (pulse scene only).
    #[arg(long, default_value_t = 5e6)]
    freq_hz: f64,
}

#[derive(Args)]
struct DenoiseArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: PathBuf,
    #[arg(long, default_value = "gawd")]
    method: Method,
    #[command(flatten)]
    file: FileOpts,
    #[command(flatten)]
    opts: MethodOpts,
    /// Write the gaWD threshold traces (one per A-line) as JSON.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args)]
struct CompareArgs {
    #[arg(long)]
    input: PathBuf,
    /// Clean reference; defaults to the input when noise is injected.
    #[arg(long)]
    reference: Option<PathBuf>,
    /// Methods to run, comma separated; all six by default.
    #[arg(long, value_delimiter = ',')]
    method: Vec<Method>,
    #[arg(long)]
    out_dir: PathBuf,
    /// Treat the input as clean and add noise to this SNR first.
    #[arg(long)]
    noise_snr_db: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Report the Butterworth row at its best cutoff on a 0.5 MHz grid.
    #[arg(long)]
    sweep_cutoff: bool,
    #[command(flatten)]
    file: FileOpts,
    #[command(flatten)]
    opts: MethodOpts,
}

#[derive(Args)]
struct MapArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: PathBuf,
    #[command(flatten)]
    file: FileOpts,
}

#[derive(Args)]
struct MetricsArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    reference: PathBuf,
    #[command(flatten)]
    file: FileOpts,
    /// Print JSON instead of text.
    #[arg(long)]
    json: bool,
}

fn infer_format(path: &Path, given: Option<Format>) -> Format {
    given.unwrap_or_else(|| match path.extension().and_then(|e| e.to_str()) {
        Some("raw") | Some("bin") => Format::Raw,
        _ => Format::Csv,
    })
}

fn load(path: &Path, file: &FileOpts) -> Result<Data<f64>> {
    let format = infer_format(path, file.format);
    let fs = match format {
        Format::Csv => Some(file.fs_hz.unwrap_or(DEFAULT_FS_HZ)),
        Format::Raw => file.fs_hz,
    };
    io::load(path, format, fs)
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::Load {
        path: path.display().to_string(),
        message: format!("cannot write: {e}"),
    })
}

fn synth(a: &SynthArgs) -> Result<()> {
    let clean = match a.scene {
        Scene::Pulse => {
            let duration = a.nt as f64 / a.fs_hz;
            Data::Signal(synth::make_pa_pulse(a.freq_hz, a.fs_hz, duration, duration / 4.0, 1.0)?)
        }
        Scene::TwoLayer => {
            let p = TwoLayerParams {
                fs_hz: a.fs_hz,
                duration_s: a.nt as f64 / a.fs_hz,
                ..TwoLayerParams::default()
            };
            Data::Signal(synth::make_two_layer_scene(&p)?.clean)
        }
        Scene::Grid => {
            let p = GridPhantomParams {
                ny: a.ny,
                nx: a.nx,
                nt: a.nt,
                fs_hz: a.fs_hz,
                ..GridPhantomParams::default()
            };
            Data::Grid(synth::make_two_layer_grid(&p)?)
        }
    };
    let out = match a.noise_snr_db {
        Some(snr) => clean.with_noise(snr, a.seed)?,
        None => clean,
    };
    io::save(&a.output, &out, infer_format(&a.output, a.format))
}

fn denoise(a: &DenoiseArgs) -> Result<()> {
    let input = load(&a.input, &a.file)?;
    let done = run_denoise(&input, a.method, &a.opts.params())?;
    io::save(&a.output, &done.output, infer_format(&a.output, a.file.format))?;
    if let Some(path) = &a.trace {
        let json = serde_json::to_string_pretty(&done.traces).expect("traces serialize");
        write_text(path, &(json + "\n"))?;
    }
    Ok(())
}

fn compare(a: &CompareArgs) -> Result<()> {
    let input = load(&a.input, &a.file)?;
    let reference = a.reference.as_ref().map(|p| load(p, &a.file)).transpose()?;
    let mut spec = CompareSpec::new(if a.method.is_empty() {
        Method::ALL.to_vec()
    } else {
        a.method.clone()
    });
    spec.params = a.opts.params();
    spec.seed = a.seed;
    spec.noise_snr_db = a.noise_snr_db;
    if a.sweep_cutoff {
        spec.butterworth_sweep_hz = default_cutoff_sweep(input.sample_rate_hz());
    }
    let mut cmp = pipeline::compare(&input, reference.as_ref(), &spec)?;

    let mut files = vec![&a.input];
    files.extend(a.reference.as_ref());
    // The injected-noise case reuses the input as reference.
    for (digest, path) in cmp.report.provenance.inputs.iter_mut().zip(files.iter().cycle()) {
        digest.source = Some(path.display().to_string());
        digest.file_sha256 = Some(file_digest(path)?);
    }

    let format = infer_format(&a.input, a.file.format);
    pipeline::write_outputs(&a.out_dir, &cmp, format)?;
    print!("{}", cmp.report.to_table());
    Ok(())
}

fn map(a: &MapArgs) -> Result<()> {
    let input = load(&a.input, &a.file)?;
    let grid = input.as_grid().ok_or_else(|| {
        Error::InvalidParameter(format!("{} holds a single signal, not a grid", a.input.display()))
    })?;
    write_text(&a.output, &pipeline::image_csv(&map_project(grid)))
}

fn metrics(a: &MetricsArgs) -> Result<()> {
    let input = load(&a.input, &a.file)?;
    let reference = load(&a.reference, &a.file)?;
    let s = score(&input, &reference)?;
    if a.json {
        println!("{}", serde_json::to_string_pretty(&s).expect("scores serialize"));
        return Ok(());
    }
    let opt = |v: Option<f64>| v.map_or("-".to_string(), |v| format!("{v:.4}"));
    println!("SNR 10log (dB):      {:.4}", s.snr_db);
    println!("SNR 20log peak (dB): {:.4}", s.peak_snr_db);
    println!("PSNR (dB):           {}", opt(s.psnr_db));
    println!("SSIM:                {}", opt(s.ssim));
    Ok(())
}

fn exit_code(kind: ErrorKind) -> u8 {
    match kind {
        ErrorKind::Io => 1,
        ErrorKind::InvalidParameter => 2,
        ErrorKind::Numerical => 3,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Synth(a) => synth(a),
        Command::Denoise(a) => denoise(a),
        Command::Compare(a) => compare(a),
        Command::Map(a) => map(a),
        Command::Metrics(a) => metrics(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(e.kind()))
        }
    }
}
