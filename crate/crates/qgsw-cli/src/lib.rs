//! `qgsw`: runs the experiments of the `qgsw-patch` library and writes their
//! results as CSV and JSON, together with a `run-manifest.json` that echoes the
//! flags.
//!
//! Exit codes: 0 on success, 1 for invalid flags or I/O failures, 2 when a
//! scheme diverges or a check fails.

pub mod commands;
pub mod io;

use clap::{Args, Parser, Subcommand};
use io::{emit_csv, emit_json, Cell, IoError};
use qgsw_patch::cantor::{CantorError, DiophantineParams};
use qgsw_patch::contour::ContourError;
use qgsw_patch::dynamics::DynamicsError;
use qgsw_patch::kam::KamError;
use qgsw_patch::spectrum::SpectrumError;
use serde::Serialize;
use std::ffi::OsString;
use std::path::PathBuf;

#[derive(Debug, Parser)]
#[command(name = "qgsw", version, about = "Vortex-patch spectra, contour dynamics and truncated KAM reducibility")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(tag = "subcommand", rename_all = "kebab-case")]
pub enum Command {
    /// Linear frequencies of the disc and their large-j residual.
    Spectrum(SpectrumArgs),
    /// Integrate the boundary equation and monitor the conserved quantities.
    Evolve(EvolveArgs),
    /// Compare finite differences of the right-hand side with its linearization.
    LinearizeCheck(LinearizeArgs),
    /// Straighten a manufactured transport coefficient.
    KamTransport(TransportArgs),
    /// Diagonalize the zero-order remainder of the contour linearization.
    KamRemainder(RemainderArgs),
    /// Measure of the first-order resonant set over a λ interval.
    CantorMeasure(CantorArgs),
    /// I_jK_j(λ) from the production routine and three independent quadratures.
    BesselTable(BesselArgs),
    /// Run a fast battery of invariant checks.
    Selftest(SelftestArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Common {
    /// Output directory; created if missing.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Seed for any sampled quantity.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Record wall-clock times; without it they are written as 0 so that outputs are reproducible byte for byte.
    #[arg(long)]
    pub timing: bool,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct DioArgs {
    #[arg(long, default_value_t = 1e-4)]
    pub gamma: f64,
    #[arg(long, default_value_t = 3.0)]
    pub tau1: f64,
    #[arg(long, default_value_t = 4.0)]
    pub tau2: f64,
    #[arg(long, default_value_t = 0.25)]
    pub upsilon: f64,
    #[arg(long, default_value_t = 2)]
    pub q0: u32,
    #[arg(long, default_value_t = 4)]
    pub n0: u32,
}

impl DioArgs {
    pub fn params(&self) -> DiophantineParams {
        DiophantineParams {
            gamma: self.gamma,
            tau1: self.tau1,
            tau2: self.tau2,
            upsilon: self.upsilon,
            q0: self.q0,
            n0: self.n0,
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SpectrumArgs {
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,
    #[arg(long, default_value_t = 0.5)]
    pub omega: f64,
    #[arg(long, default_value_t = 64)]
    pub jmax: u32,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct EvolveArgs {
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,
    #[arg(long, default_value_t = 0.5)]
    pub omega: f64,
    #[arg(long, default_value_t = 64)]
    pub grid: usize,
    /// Initial curve `amp·cos(mode·θ)`, unless `--init` is given.
    #[arg(long, default_value_t = 1e-3)]
    pub amp: f64,
    #[arg(long, default_value_t = 3)]
    pub mode: usize,
    /// Initial curve as written by a previous run (`curve-*.json`).
    #[arg(long)]
    pub init: Option<PathBuf>,
    #[arg(long, default_value_t = 1e-3)]
    pub dt: f64,
    #[arg(long, default_value_t = 1.0)]
    pub t_end: f64,
    /// Steps between recorded snapshots.
    #[arg(long, default_value_t = 100)]
    pub record_every: usize,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct LinearizeArgs {
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,
    #[arg(long, default_value_t = 0.5)]
    pub omega: f64,
    #[arg(long, default_value_t = 128)]
    pub grid: usize,
    /// Base curve `amp·(cos θ + ½cos 3θ)`.
    #[arg(long, default_value_t = 0.05)]
    pub amp: f64,
    #[arg(long, default_value_t = 20)]
    pub directions: usize,
    #[arg(long, value_delimiter = ',', default_value = "1e-2,1e-3,1e-4")]
    pub eps: Vec<f64>,
    /// Smallest acceptable convergence order.
    #[arg(long, default_value_t = 1.8)]
    pub min_order: f64,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct TransportArgs {
    /// Number of time frequencies.
    #[arg(long, default_value_t = 1)]
    pub d: usize,
    /// Truncation `⟨l,j⟩ ≤ cap`; 16 for d = 1 and 8 otherwise.
    #[arg(long)]
    pub cap: Option<usize>,
    #[arg(long, default_value_t = 4)]
    pub steps: usize,
    /// Initial `‖f₀‖_{s₀}/γ`.
    #[arg(long, default_value_t = 1e-3)]
    pub delta0: f64,
    /// Exponential decay rate of the manufactured coefficients.
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,
    #[arg(long, default_value_t = 0.5)]
    pub omega: f64,
    /// Tangential sites; defaults to 2 for d = 1 and 2,3 for d = 2.
    #[arg(long, value_delimiter = ',')]
    pub sites: Option<Vec<u32>>,
    #[command(flatten)]
    #[serde(flatten)]
    pub dio: DioArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct RemainderArgs {
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,
    #[arg(long, default_value_t = 0.5)]
    pub omega: f64,
    /// Torus amplitude.
    #[arg(long, default_value_t = 1e-3)]
    pub eps: f64,
    /// The single excited site.
    #[arg(long, value_delimiter = ',', default_value = "2")]
    pub sites: Vec<u32>,
    #[arg(long, default_value_t = 16)]
    pub jmax: u32,
    #[arg(long, default_value_t = 8)]
    pub lcap: usize,
    #[arg(long, default_value_t = 64)]
    pub grid: usize,
    #[arg(long, default_value_t = 4)]
    pub transport_steps: usize,
    #[arg(long, default_value_t = 3)]
    pub steps: usize,
    #[command(flatten)]
    #[serde(flatten)]
    pub dio: DioArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CantorArgs {
    #[arg(long, default_value_t = 0.5)]
    pub lambda_lo: f64,
    #[arg(long, default_value_t = 2.0)]
    pub lambda_hi: f64,
    #[arg(long, default_value_t = 0.5)]
    pub omega: f64,
    #[arg(long, value_delimiter = ',', default_value = "2,3")]
    pub sites: Vec<u32>,
    #[arg(long, default_value_t = 3.0)]
    pub tau1: f64,
    #[arg(long, default_value_t = 8)]
    pub lmax: u32,
    #[arg(long, default_value_t = 20_000)]
    pub grid: usize,
    #[arg(long, value_delimiter = ',', default_value = "1e-2,1e-3,1e-4,1e-5")]
    pub gammas: Vec<f64>,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct BesselArgs {
    #[arg(long, value_delimiter = ',', default_value = "0.1,0.5,1,2,5,10")]
    pub lambdas: Vec<f64>,
    #[arg(long, default_value_t = 20)]
    pub jmax: u32,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SelftestArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

impl Command {
    pub fn common(&self) -> &Common {
        match self {
            Command::Spectrum(a) => &a.common,
            Command::Evolve(a) => &a.common,
            Command::LinearizeCheck(a) => &a.common,
            Command::KamTransport(a) => &a.common,
            Command::KamRemainder(a) => &a.common,
            Command::CantorMeasure(a) => &a.common,
            Command::BesselTable(a) => &a.common,
            Command::Selftest(a) => &a.common,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid input: {0}")]
    Validation(String),
    #[error("{0}")]
    Failure(String),
    #[error(transparent)]
    Io(#[from] IoError),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) | CliError::Io(_) => 1,
            CliError::Failure(_) => 2,
        }
    }
}

impl From<SpectrumError> for CliError {
    fn from(e: SpectrumError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<ContourError> for CliError {
    fn from(e: ContourError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<CantorError> for CliError {
    fn from(e: CantorError) -> Self {
        match e {
            CantorError::Hypothesis { .. } => CliError::Failure(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<DynamicsError> for CliError {
    fn from(e: DynamicsError) -> Self {
        match e {
            DynamicsError::NotFinite(_) | DynamicsError::BlowUp { .. } => CliError::Failure(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<KamError> for CliError {
    fn from(e: KamError) -> Self {
        match e {
            KamError::Params(_) | KamError::Contour(_) | KamError::Config(_) => CliError::Validation(e.to_string()),
            _ => CliError::Failure(e.to_string()),
        }
    }
}

/// Collects the files written by one run, for the manifest.
#[derive(Debug)]
pub struct Outputs {
    dir: PathBuf,
    files: Vec<String>,
}

impl Outputs {
    pub fn new(dir: PathBuf) -> Self {
        Outputs { dir, files: Vec::new() }
    }

    pub fn csv(&mut self, name: &str, header: &[&str], rows: &[Vec<Cell>]) -> Result<(), CliError> {
        emit_csv(&self.dir.join(name), header, rows)?;
        self.files.push(name.to_string());
        Ok(())
    }

    pub fn json<T: Serialize + ?Sized>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        emit_json(&self.dir.join(name), value)?;
        self.files.push(name.to_string());
        Ok(())
    }

    pub fn files(&self) -> &[String] {
        &self.files
    }
}

#[derive(Serialize)]
struct Manifest<'a> {
    program: &'static str,
    version: &'static str,
    command: &'a Command,
    status: String,
    outputs: &'a [String],
}

/// Run one subcommand and write its manifest. Failures detected after some
/// outputs were written still produce a manifest that records them.
pub fn dispatch(cmd: &Command) -> Result<(), CliError> {
    let common = cmd.common();
    let mut out = Outputs::new(common.out.clone());
    let result = match cmd {
        Command::Spectrum(a) => commands::spectrum(a, &mut out),
        Command::Evolve(a) => commands::evolve(a, &mut out),
        Command::LinearizeCheck(a) => commands::linearize_check(a, &mut out),
        Command::KamTransport(a) => commands::kam_transport(a, &mut out),
        Command::KamRemainder(a) => commands::kam_remainder(a, &mut out),
        Command::CantorMeasure(a) => commands::cantor_measure(a, &mut out),
        Command::BesselTable(a) => commands::bessel_table(a, &mut out),
        Command::Selftest(a) => commands::selftest(a, &mut out),
    };
    if !out.files.is_empty() {
        let status = match &result {
            Ok(()) => "ok".to_string(),
            Err(e) => format!("error: {e}"),
        };
        let m = Manifest {
            program: "qgsw",
            version: env!("CARGO_PKG_VERSION"),
            command: cmd,
            status,
            outputs: &out.files,
        };
        emit_json(&out.dir.join("run-manifest.json"), &m)?;
    }
    result
}

/// Parse `args` (including the program name) and run; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match dispatch(&cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("qgsw: {e}");
            e.exit_code()
        }
    }
}
