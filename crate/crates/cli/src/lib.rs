//! `specmerge` command line.
//!
//! Exit codes: 0 on success, 1 on usage errors, 2 on I/O or format errors.
//! Outputs are written to a temporary file beside the target and renamed
//! into place only after every output of the invocation has been produced.

use std::ffi::OsString;
use std::io::Write;
use std::net::{IpAddr, SocketAddr};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use specmerge::codec::{render_spectrum, HeatmapOptions};
use specmerge::json::{render_object, Value};
use specmerge::{
    encode_fmg, forward2d, merge_spatial, merge_spectral, read_pgm, reduce_to_ratio, wave_geometry,
    write_pgm, AlignMode, AlignmentPolicy, ImagePlane, MergeConfig, PgmDepth, Renorm,
    SpectralIndex, SpectralMerge,
};

#[derive(Debug, Parser)]
#[command(
    name = "specmerge",
    version,
    about = "Merge grayscale images in the spatial or frequency domain"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Merge images by adding intensities or weighted spectra
    Merge(MergeArgs),
    /// Render a spectrum magnitude heatmap
    Spectrum(SpectrumArgs),
    /// Print derived quantities
    Inspect {
        #[command(subcommand)]
        what: Inspect,
    },
    /// Merge spectrally and threshold to a target reduction ratio
    Reduce(ReduceArgs),
    /// Start the interactive tuning service
    Serve(ServeArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Mode {
    Spatial,
    Spectral,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
#[value(rename_all = "snake_case")]
enum RenormArg {
    DivideByMax,
    Clamp,
}

impl From<RenormArg> for Renorm {
    fn from(arg: RenormArg) -> Self {
        match arg {
            RenormArg::DivideByMax => Renorm::DivideByMax,
            RenormArg::Clamp => Renorm::Clamp,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
#[value(rename_all = "snake_case")]
enum AlignArg {
    CenterPad,
    TopleftPad,
}

impl From<AlignArg> for AlignMode {
    fn from(arg: AlignArg) -> Self {
        match arg {
            AlignArg::CenterPad => AlignMode::CenterPad,
            AlignArg::TopleftPad => AlignMode::TopleftPad,
        }
    }
}

#[derive(Debug, Args)]
struct MergeArgs {
    #[arg(long, value_enum)]
    mode: Mode,
    /// Prominence coefficients, one per input (default: all 1)
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    coeffs: Option<Vec<f64>>,
    /// Fraction x of the peak magnitude below which coefficients are dropped
    #[arg(long, default_value_t = 0.0)]
    threshold_frac: f64,
    #[arg(long, value_enum, default_value_t = RenormArg::DivideByMax)]
    renorm: RenormArg,
    #[arg(long, value_enum, default_value_t = AlignArg::CenterPad)]
    align: AlignArg,
    #[arg(short = 'o', value_name = "OUT.pgm")]
    output: PathBuf,
    #[arg(long, value_name = "OUT.fmg")]
    sparse: Option<PathBuf>,
    #[arg(long, value_name = "OUT.json")]
    report: Option<PathBuf>,
    #[arg(required = true, value_name = "IN.pgm")]
    inputs: Vec<PathBuf>,
}

#[derive(Debug, Args)]
struct SpectrumArgs {
    /// Center the DC coefficient
    #[arg(long)]
    shift: bool,
    /// Render log(1 + |I|)
    #[arg(long)]
    log: bool,
    #[arg(short = 'o', value_name = "OUT.pgm")]
    output: PathBuf,
    #[arg(value_name = "IN.pgm")]
    input: PathBuf,
}

#[derive(Debug, Subcommand)]
enum Inspect {
    /// Wavelengths, frequencies and wavefront direction of index (u, v)
    Geometry(GeometryArgs),
}

#[derive(Debug, Args)]
struct GeometryArgs {
    #[arg(long)]
    u: usize,
    #[arg(long)]
    v: usize,
    #[arg(long)]
    rows: usize,
    #[arg(long)]
    cols: usize,
    /// Report theta_wf in degrees instead of radians
    #[arg(long)]
    degrees: bool,
}

#[derive(Debug, Args)]
struct ReduceArgs {
    #[arg(long)]
    target_ratio: f64,
    #[arg(short = 'o', value_name = "OUT.pgm")]
    output: PathBuf,
    #[arg(long, value_name = "OUT.fmg")]
    sparse: PathBuf,
    #[arg(long, value_name = "OUT.json")]
    report: PathBuf,
    #[arg(required = true, value_name = "IN.pgm")]
    inputs: Vec<PathBuf>,
}

#[derive(Debug, Args)]
struct ServeArgs {
    #[arg(long)]
    port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    host: IpAddr,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Io(PathBuf, std::io::Error),
    Format(PathBuf, specmerge::Error),
    Failed(String),
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            _ => 2,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "usage error: {msg}"),
            CliError::Io(path, err) => write!(f, "{}: {err}", path.display()),
            CliError::Format(path, err) => write!(f, "{}: {err}", path.display()),
            CliError::Failed(msg) => write!(f, "{msg}"),
        }
    }
}

/// Parses `argv` (program name first), runs the subcommand and returns the
/// process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            return if err.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(err) => {
            eprintln!("specmerge: {err}");
            err.exit_code()
        }
    }
}

fn execute(command: Command) -> Result<(), CliError> {
    match command {
        Command::Merge(args) => merge(args),
        Command::Spectrum(args) => spectrum(args),
        Command::Inspect {
            what: Inspect::Geometry(args),
        } => geometry(args),
        Command::Reduce(args) => reduce(args),
        Command::Serve(args) => serve(args),
    }
}

fn read_inputs(paths: &[PathBuf]) -> Result<Vec<ImagePlane>, CliError> {
    paths
        .iter()
        .map(|path| {
            let bytes = std::fs::read(path).map_err(|e| CliError::Io(path.clone(), e))?;
            read_pgm(&bytes).map_err(|e| CliError::Format(path.clone(), e))
        })
        .collect()
}

fn merge(args: MergeArgs) -> Result<(), CliError> {
    let n = args.inputs.len();
    if let Some(coeffs) = &args.coeffs {
        if coeffs.len() != n {
            return Err(CliError::Usage(format!(
                "--coeffs lists {} values for {n} input images",
                coeffs.len()
            )));
        }
    }
    let mut config = MergeConfig::default()
        .with_threshold_fraction(args.threshold_frac)
        .with_renorm(args.renorm.into())
        .with_alignment(AlignmentPolicy::from(AlignMode::from(args.align)));
    config.coefficients = args.coeffs;
    config
        .validate(n)
        .map_err(|e| CliError::Usage(e.to_string()))?;

    if matches!(args.mode, Mode::Spatial) && (args.sparse.is_some() || args.report.is_some()) {
        return Err(CliError::Usage(
            "--sparse and --report need --mode spectral".into(),
        ));
    }

    let planes = read_inputs(&args.inputs)?;
    let mut outputs = Vec::new();
    match args.mode {
        Mode::Spatial => {
            let merged =
                merge_spatial(&planes, &config).map_err(|e| CliError::Failed(e.to_string()))?;
            outputs.push((args.output, write_pgm(&merged, PgmDepth::Eight)));
        }
        Mode::Spectral => {
            let result =
                merge_spectral(&planes, &config).map_err(|e| CliError::Failed(e.to_string()))?;
            spectral_outputs(&result, args.output, args.sparse, args.report, &mut outputs);
        }
    }
    write_all(outputs)
}

fn spectral_outputs(
    result: &SpectralMerge,
    output: PathBuf,
    sparse: Option<PathBuf>,
    report: Option<PathBuf>,
    outputs: &mut Vec<(PathBuf, Vec<u8>)>,
) {
    outputs.push((output, write_pgm(&result.merged, PgmDepth::Eight)));
    if let Some(path) = sparse {
        outputs.push((path, encode_fmg(&result.sparse)));
    }
    if let Some(path) = report {
        outputs.push((path, result.report.to_json().into_bytes()));
    }
}

fn reduce(args: ReduceArgs) -> Result<(), CliError> {
    if args.target_ratio.is_nan() || args.target_ratio < 1.0 {
        return Err(CliError::Usage(format!(
            "--target-ratio must be at least 1, got {}",
            args.target_ratio
        )));
    }
    let planes = read_inputs(&args.inputs)?;
    let result = reduce_to_ratio(&planes, &MergeConfig::default(), args.target_ratio)
        .map_err(|e| CliError::Failed(e.to_string()))?;
    let mut outputs = Vec::new();
    spectral_outputs(
        &result,
        args.output,
        Some(args.sparse),
        Some(args.report),
        &mut outputs,
    );
    write_all(outputs)
}

fn spectrum(args: SpectrumArgs) -> Result<(), CliError> {
    let plane = read_inputs(std::slice::from_ref(&args.input))?.remove(0);
    let heatmap = render_spectrum(
        &forward2d(&plane),
        HeatmapOptions {
            shift: args.shift,
            log: args.log,
        },
    );
    write_all(vec![(args.output, write_pgm(&heatmap, PgmDepth::Eight))])
}

fn geometry(args: GeometryArgs) -> Result<(), CliError> {
    let idx = SpectralIndex::new(args.u, args.v, args.rows, args.cols)
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let g = wave_geometry(idx);
    let theta = g
        .theta_wf
        .map(|t| if args.degrees { t.to_degrees() } else { t });
    let text = render_object([
        ("lambda_u", Value::Float(g.lambda_u)),
        ("lambda_v", Value::Float(g.lambda_v)),
        ("lambda_wf", Value::Float(g.lambda_wf)),
        ("omega_u", Value::Float(g.omega_u)),
        ("omega_v", Value::Float(g.omega_v)),
        ("omega_wf", Value::Float(g.omega_wf)),
        ("theta_wf", Value::Float(theta.unwrap_or(f64::NAN))),
        ("theta_defined", Value::Bool(theta.is_some())),
        ("regular", Value::Bool(g.is_regular())),
    ]);
    print!("{text}");
    Ok(())
}

fn serve(args: ServeArgs) -> Result<(), CliError> {
    let addr = SocketAddr::new(args.host, args.port);
    let runtime = tokio::runtime::Runtime::new().map_err(|e| CliError::Failed(e.to_string()))?;
    runtime
        .block_on(specmerge_tuner::serve(addr))
        .map_err(|e| CliError::Failed(format!("{addr}: {e}")))
}

/// Stages every output as a temporary file, then renames them all into
/// place. A failure before the renames leaves no output behind.
fn write_all(outputs: Vec<(PathBuf, Vec<u8>)>) -> Result<(), CliError> {
    let mut staged = Vec::with_capacity(outputs.len());
    for (path, bytes) in outputs {
        let dir = match path.parent() {
            Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
            _ => PathBuf::from("."),
        };
        let mut tmp =
            tempfile::NamedTempFile::new_in(&dir).map_err(|e| CliError::Io(path.clone(), e))?;
        tmp.write_all(&bytes)
            .map_err(|e| CliError::Io(path.clone(), e))?;
        staged.push((tmp, path));
    }
    for (tmp, path) in staged {
        tmp.persist(&path)
            .map_err(|e| CliError::Io(path.clone(), e.error))?;
    }
    Ok(())
}
