use std::ffi::OsString;
use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lapcg_core::fixed::FixedSpec;
use lapcg_core::laplacian::DecompMode;
use lapcg_core::perfmodel::{Algorithm, LatencyConstants};
use serde::{Serialize, Serializer};

use crate::experiments;
use crate::report::Report;
use crate::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "lapcg",
    version,
    about = "Matrix-free CG and pipelined CG on the 2D Laplacian, with a dataflow latency model"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run CG and/or pipelined CG and write residual traces.
    Solve(SolveArgs),
    /// Per-iteration cycles of both algorithms over (n, FACTOR).
    Latency(LatencyArgs),
    /// Halo-copy cycles of strip versus quadruple layouts.
    Padding(PaddingArgs),
    /// Full-run cycles, resources and speedups over a grid of cells.
    Sweep(SweepArgs),
}

/// `double`, or a fixed-point format `T,I` (total and integer bits).
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Precision {
    Double,
    Fixed(FixedSpec),
}

impl Precision {
    pub fn total_bits(self) -> u32 {
        match self {
            Precision::Double => 64,
            Precision::Fixed(s) => s.total_bits(),
        }
    }
}

impl FromStr for Precision {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("double") {
            return Ok(Precision::Double);
        }
        s.parse().map(Precision::Fixed).map_err(|e| e.to_string())
    }
}

impl fmt::Display for Precision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Precision::Double => f.write_str("double"),
            Precision::Fixed(s) => write!(f, "{s}"),
        }
    }
}

impl Serialize for Precision {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
pub enum Decomp {
    #[value(name = "1d")]
    #[serde(rename = "1d")]
    OneD,
    #[value(name = "2d")]
    #[serde(rename = "2d")]
    TwoD,
}

impl From<Decomp> for DecompMode {
    fn from(d: Decomp) -> Self {
        match d {
            Decomp::OneD => DecompMode::OneD,
            Decomp::TwoD => DecompMode::TwoDQuadruple,
        }
    }
}

pub fn decomp_name(m: DecompMode) -> &'static str {
    match m {
        DecompMode::OneD => "1d",
        DecompMode::TwoDQuadruple => "2d",
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum AlgoChoice {
    Cg,
    Newcg,
    Both,
}

impl AlgoChoice {
    pub fn algorithms(self) -> Vec<Algorithm> {
        match self {
            AlgoChoice::Cg => vec![Algorithm::Cg],
            AlgoChoice::Newcg => vec![Algorithm::NewCg],
            AlgoChoice::Both => Algorithm::ALL.to_vec(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RhsKind {
    /// All-ones vector.
    Ones,
    /// `b = A x*` with `x*` uniform in [-1, 1) from `--seed`.
    Manufactured,
    /// Grid CSV given by `--rhs-file`.
    File,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LayoutChoice {
    /// Strips for FACTOR <= 2, otherwise the squarest quadruple lattice.
    Canonical,
    /// Always FACTOR horizontal strips.
    #[value(name = "1d")]
    #[serde(rename = "1d")]
    Strips,
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct ConstantArgs {
    /// Cycles per multiply.
    #[arg(long, default_value_t = LatencyConstants::default().a_mul)]
    pub a_mul: u64,
    /// Cycles per add.
    #[arg(long, default_value_t = LatencyConstants::default().b_add)]
    pub b_add: u64,
    /// Cycles per scalar division.
    #[arg(long, default_value_t = LatencyConstants::default().c_div)]
    pub c_div: u64,
    /// DSP blocks per multiplier.
    #[arg(long, default_value_t = LatencyConstants::default().d_dsp)]
    pub d_dsp: u64,
    #[arg(long, default_value_t = LatencyConstants::default().clock_ns)]
    pub clock_ns: f64,
}

impl ConstantArgs {
    pub fn resolve(&self) -> Result<LatencyConstants, CliError> {
        Ok(LatencyConstants::new(
            self.a_mul,
            self.b_add,
            self.c_div,
            self.d_dsp,
            self.clock_ns,
        )?)
    }
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct SolveArgs {
    /// Grid side.
    #[arg(long)]
    pub n: usize,
    /// Subgrid rows of the operator layout.
    #[arg(long, default_value_t = 1)]
    pub v: usize,
    /// Subgrid columns of the operator layout.
    #[arg(long, default_value_t = 1)]
    pub h: usize,
    #[arg(long, value_enum, default_value_t = Decomp::OneD)]
    pub decomp: Decomp,
    #[arg(long, value_enum, default_value_t = AlgoChoice::Both)]
    pub algo: AlgoChoice,
    #[arg(long, default_value = "50,20")]
    pub precision: Precision,
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    #[arg(long, default_value_t = 1000)]
    pub max_iter: usize,
    #[arg(long, value_enum, default_value_t = RhsKind::Ones)]
    pub rhs: RhsKind,
    #[arg(long, required_if_eq("rhs", "file"))]
    pub rhs_file: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Include the solution vector in the summary.
    #[arg(long)]
    pub emit_solution: bool,
    /// Directory for `trace_<algo>.csv` files.
    #[arg(long)]
    #[serde(skip)]
    pub trace_dir: Option<PathBuf>,
    /// Summary JSON path; stdout when absent.
    #[arg(long)]
    #[serde(skip)]
    pub output: Option<PathBuf>,
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct LatencyArgs {
    /// Grid sides, comma separated.
    #[arg(long = "n", value_delimiter = ',', default_values_t = [16, 32, 40, 100])]
    #[serde(rename = "n")]
    pub sizes: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_values_t = [1, 2, 4, 8, 16])]
    pub factors: Vec<usize>,
    #[arg(long, value_enum, default_value_t = LayoutChoice::Canonical)]
    pub layout: LayoutChoice,
    #[command(flatten)]
    #[serde(flatten)]
    pub constants: ConstantArgs,
    #[arg(long)]
    #[serde(skip)]
    pub output: Option<PathBuf>,
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct PaddingArgs {
    #[arg(long = "n", value_delimiter = ',', default_values_t = [16, 32, 40, 100])]
    #[serde(rename = "n")]
    pub sizes: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_values_t = [1, 2, 4, 8, 16])]
    pub factors: Vec<usize>,
    #[arg(long)]
    #[serde(skip)]
    pub output: Option<PathBuf>,
}

/// Sweep cells: `n:f,f,...` groups separated by `;`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CellList(pub Vec<CellSpec>);

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CellSpec {
    pub n: usize,
    pub factors: Vec<usize>,
}

pub const DEFAULT_CELLS: &str = "16:1,4;32:1,4,8;40:1,4,8,16;100:1,8,16";

impl FromStr for CellList {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let num = |t: &str| {
            t.trim()
                .parse::<usize>()
                .map_err(|_| format!("`{t}` is not a positive integer"))
        };
        let cells = s
            .split(';')
            .filter(|g| !g.trim().is_empty())
            .map(|g| {
                let (n, fs) = g
                    .split_once(':')
                    .ok_or_else(|| format!("cell group `{g}` must look like n:f1,f2"))?;
                Ok(CellSpec {
                    n: num(n)?,
                    factors: fs.split(',').map(num).collect::<Result<_, _>>()?,
                })
            })
            .collect::<Result<Vec<_>, String>>()?;
        if cells.is_empty() {
            return Err("no sweep cells given".into());
        }
        Ok(CellList(cells))
    }
}

/// `auto` (measure with the solver), one count for all sizes, or
/// `n=k` pairs separated by commas.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum IterationSpec {
    Auto,
    Fixed(u64),
    PerSize(Vec<(usize, u64)>),
}

impl FromStr for IterationSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("auto") {
            return Ok(IterationSpec::Auto);
        }
        if let Ok(k) = s.parse() {
            return Ok(IterationSpec::Fixed(k));
        }
        s.split(',')
            .map(|p| {
                let (n, k) = p
                    .split_once('=')
                    .ok_or_else(|| format!("`{p}` must look like n=k"))?;
                match (n.trim().parse(), k.trim().parse()) {
                    (Ok(n), Ok(k)) => Ok((n, k)),
                    _ => Err(format!("`{p}` must look like n=k")),
                }
            })
            .collect::<Result<_, _>>()
            .map(IterationSpec::PerSize)
    }
}

impl fmt::Display for IterationSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IterationSpec::Auto => f.write_str("auto"),
            IterationSpec::Fixed(k) => write!(f, "{k}"),
            IterationSpec::PerSize(v) => {
                let parts: Vec<String> = v.iter().map(|(n, k)| format!("{n}={k}")).collect();
                f.write_str(&parts.join(","))
            }
        }
    }
}

impl Serialize for IterationSpec {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct SweepArgs {
    #[arg(long, default_value = DEFAULT_CELLS)]
    pub cells: CellList,
    #[arg(long, default_value = "auto")]
    pub iterations: IterationSpec,
    /// Word format of the priced design; sets the block-RAM width.
    #[arg(long, default_value = "50,20")]
    pub precision: Precision,
    /// Arithmetic of the solves behind `--iterations auto`.
    #[arg(long, default_value = "double")]
    pub iter_precision: Precision,
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    #[arg(long, default_value_t = 1000)]
    pub max_iter: usize,
    #[arg(long, value_enum, default_value_t = RhsKind::Ones)]
    pub rhs: RhsKind,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    #[serde(flatten)]
    pub constants: ConstantArgs,
    /// Worker threads; 0 picks one per core. Does not change the output.
    #[arg(long, default_value_t = 0)]
    #[serde(skip)]
    pub jobs: usize,
    #[arg(long)]
    #[serde(skip)]
    pub output: Option<PathBuf>,
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = stderr.write_all(text.as_bytes());
                1
            } else {
                let _ = stdout.write_all(text.as_bytes());
                0
            };
        }
    };
    match dispatch(&cli.command, stdout) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "lapcg: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(cmd: &Command, stdout: &mut dyn Write) -> Result<(), CliError> {
    match cmd {
        Command::Solve(a) => {
            let out = experiments::run_solve(a)?;
            if let Some(dir) = &a.trace_dir {
                std::fs::create_dir_all(dir)?;
                for (algo, trace) in &out.traces {
                    let f = std::fs::File::create(dir.join(format!("trace_{}.csv", algo.name())))?;
                    crate::io::write_trace_csv(std::io::BufWriter::new(f), trace)?;
                }
            }
            emit(
                Report::new("solve", a, &out.summaries),
                a.output.as_deref(),
                stdout,
            )
        }
        Command::Latency(a) => {
            let rows = experiments::latency_table(a)?;
            emit(Report::new("latency", a, rows), a.output.as_deref(), stdout)
        }
        Command::Padding(a) => {
            let rows = experiments::padding_table(a);
            emit(Report::new("padding", a, rows), a.output.as_deref(), stdout)
        }
        Command::Sweep(a) => {
            let res = experiments::sweep(a)?;
            emit(Report::new("sweep", a, res), a.output.as_deref(), stdout)
        }
    }
}

fn emit<C: Serialize, R: Serialize>(
    r: Report<'_, C, R>,
    path: Option<&Path>,
    stdout: &mut dyn Write,
) -> Result<(), CliError> {
    let json = r.to_json()?;
    match path {
        Some(p) => std::fs::write(p, json)?,
        None => stdout.write_all(json.as_bytes())?,
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precision_parsing() {
        assert_eq!("double".parse(), Ok(Precision::Double));
        let p: Precision = "50,20".parse().unwrap();
        assert_eq!(p, Precision::Fixed(FixedSpec::default_hw()));
        assert_eq!(p.to_string(), "50,20");
        assert!("70,3".parse::<Precision>().is_err());
        assert!("float".parse::<Precision>().is_err());
    }

    #[test]
    fn cell_list_parsing() {
        let c: CellList = DEFAULT_CELLS.parse().unwrap();
        assert_eq!(c.0.len(), 4);
        assert_eq!(
            c.0[3],
            CellSpec {
                n: 100,
                factors: vec![1, 8, 16]
            }
        );
        assert!("16".parse::<CellList>().is_err());
        assert!("16:a".parse::<CellList>().is_err());
        assert!("".parse::<CellList>().is_err());
    }

    #[test]
    fn iteration_spec_round_trips() {
        for s in ["auto", "40", "16=33,32=60"] {
            assert_eq!(s.parse::<IterationSpec>().unwrap().to_string(), s);
        }
        assert!("16=x".parse::<IterationSpec>().is_err());
    }

    #[test]
    fn usage_errors_exit_with_one() {
        let (mut o, mut e) = (Vec::new(), Vec::new());
        assert_eq!(run(["lapcg", "solve"], &mut o, &mut e), 1);
        assert_eq!(
            run(
                ["lapcg", "solve", "--n", "4", "--precision", "7"],
                &mut o,
                &mut e
            ),
            1
        );
        assert_eq!(
            run(
                ["lapcg", "solve", "--n", "4", "--rhs", "file"],
                &mut o,
                &mut e
            ),
            1
        );
        assert_eq!(run(["lapcg", "--help"], &mut o, &mut e), 0);
    }
}
