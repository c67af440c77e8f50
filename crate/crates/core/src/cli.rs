//! `wgoc` command line: convergence studies, field exports and the
//! invariant suite.
//!
//! Exit codes: 0 success, 1 failed checks, 2 usage or configuration error,
//! 3 solver failure.

use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::checks;
use crate::fe_space::SpaceConfig;
use crate::postprocess::{convergence_study, sample_field, ConvergenceTable};
use crate::problems::{builtin, parse_config, parse_levels, ProblemSpec};
use crate::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "wgoc", about = "Weak Galerkin solver for Neumann boundary control")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a convergence study and print the error table.
    Study(RunArgs),
    /// Solve on one level and export u₀ samples as csv.
    Sample(RunArgs),
    /// Run the built-in invariant suite.
    Check,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Csv,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// Built-in example: 1, 2 or 3.
    #[arg(long)]
    pub example: Option<u32>,
    /// Plain-text key=value configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// State degree k (default 3).
    #[arg(long)]
    pub k: Option<usize>,
    /// Multiplier degree r (default k-2, or 1 for k = 2).
    #[arg(long)]
    pub r: Option<usize>,
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Grid levels, `a..b` inclusive or a single level.
    #[arg(long)]
    pub levels: Option<String>,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Sample points per element edge for `sample`.
    #[arg(long, default_value_t = 3)]
    pub samples: usize,
}

/// Fully resolved settings of a `study` or `sample` run.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub example: u32,
    pub problem: ProblemSpec,
    pub space: SpaceConfig,
    pub levels: (u32, u32),
    pub out: Option<PathBuf>,
    pub format: Format,
    pub samples: usize,
}

impl RunConfig {
    pub fn resolve(args: &RunArgs) -> Result<Self, Error> {
        let file = match &args.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| Error::Usage(format!("cannot read {}: {e}", path.display())))?;
                Some(parse_config(&text)?)
            }
            None => None,
        };
        let example = args
            .example
            .or(file.as_ref().map(|f| f.example))
            .ok_or_else(|| Error::Usage("either --example or --config is required".into()))?;
        let mut problem = match &file {
            Some(f) if f.example == example => f.problem.clone(),
            _ => builtin(example)?,
        };
        if let Some(alpha) = args.alpha {
            problem = problem.with_alpha(alpha)?;
        }
        let k = args.k.or(file.as_ref().and_then(|f| f.degree_k)).unwrap_or(3);
        let r = args
            .r
            .or(file.as_ref().and_then(|f| f.degree_r))
            .unwrap_or_else(|| SpaceConfig::default_r(k));
        let space = SpaceConfig::new(k, r)?;
        let levels = match &args.levels {
            Some(text) => parse_levels(text).map_err(Error::Usage)?,
            None => file.as_ref().and_then(|f| f.levels).unwrap_or((2, 4)),
        };
        Ok(Self {
            example,
            problem,
            space,
            levels,
            out: args.out.clone(),
            format: args.format,
            samples: args.samples,
        })
    }

    pub fn level_list(&self) -> Vec<u32> {
        (self.levels.0..=self.levels.1).collect()
    }
}

/// `0.657E-01` style: three significant digits, mantissa in `[0.1, 1)`.
pub fn sci3(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{:.3}E+00", if x.is_finite() { 0.0 } else { x });
    }
    let mut exp = x.abs().log10().floor() as i32 + 1;
    let mut mantissa = x / 10f64.powi(exp);
    if (mantissa.abs() * 1000.0).round() >= 1000.0 {
        exp += 1;
        mantissa = x / 10f64.powi(exp);
    }
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mantissa:.3}E{sign}{:02}", exp.abs())
}

pub fn table_text(table: &ConvergenceTable, title: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# {title}");
    let _ = writeln!(s, "level | energy    | order | l2        | order");
    for row in &table.rows {
        let order = |o: Option<crate::postprocess::Order>| o.map_or(0.0, |o| o.value);
        let _ = writeln!(
            s,
            "{:>5} | {} | {:>5.1} | {} | {:>5.1}",
            row.report.level,
            sci3(row.report.energy_error),
            order(row.energy_order),
            sci3(row.report.l2_error),
            order(row.l2_order),
        );
    }
    s
}

pub fn table_csv(table: &ConvergenceTable) -> String {
    let mut s = String::from("level,energy_error,energy_order,l2_error,l2_order,residual_rel\n");
    let order = |o: Option<crate::postprocess::Order>| o.map_or(String::new(), |o| format!("{:e}", o.value));
    for row in &table.rows {
        let _ = writeln!(
            s,
            "{},{:e},{},{:e},{},{:e}",
            row.report.level,
            row.report.energy_error,
            order(row.energy_order),
            row.report.l2_error,
            order(row.l2_order),
            row.report.residual_rel
        );
    }
    s
}

pub fn samples_csv(samples: &[[f64; 3]]) -> String {
    let mut s = String::from("x,y,u0\n");
    for [x, y, u] in samples {
        let _ = writeln!(s, "{x:e},{y:e},{u:e}");
    }
    s
}

fn emit(out: &Option<PathBuf>, text: &str, stdout: &mut dyn Write) -> Result<(), Error> {
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Error::Usage(format!("cannot write {}: {e}", path.display()))),
        None => stdout
            .write_all(text.as_bytes())
            .map_err(|e| Error::Usage(format!("cannot write output: {e}"))),
    }
}

fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Solvability(_) | Error::Accuracy { .. } => EXIT_SOLVER,
        _ => EXIT_USAGE,
    }
}

fn run_study(config: &RunConfig, stdout: &mut dyn Write) -> Result<(), Error> {
    let table = convergence_study(&config.problem, config.space, &config.level_list())?;
    let text = match config.format {
        Format::Text => table_text(
            &table,
            &format!(
                "{}, P{}-P{} WG, alpha = {:e}",
                config.problem.name, config.space.k, config.space.r, config.problem.alpha
            ),
        ),
        Format::Csv => table_csv(&table),
    };
    emit(&config.out, &text, stdout)
}

fn run_sample(config: &RunConfig, stdout: &mut dyn Write) -> Result<(), Error> {
    let problem = config.problem.clone().without_reference();
    let level = config.levels.1;
    let disc = crate::Discretization::new(level, config.space, &problem)?;
    let system = crate::assembly::assemble(&disc.mesh, &disc.space, &disc.local, &problem)?;
    let solution = crate::solver::solve(&system)?;
    let samples = sample_field(&disc, &solution, config.samples)?;
    emit(&config.out, &samples_csv(&samples), stdout)
}

/// Runs the command line and returns the process exit code.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(stderr, "{e}");
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let result = match &cli.command {
        Command::Check => {
            let results = checks::run_all();
            let mut text = String::new();
            for r in &results {
                let _ = writeln!(
                    text,
                    "{} {:<24} worst = {:.3e} (threshold {:.1e}; {})",
                    if r.passed { "PASS" } else { "FAIL" },
                    r.name,
                    r.worst,
                    r.threshold,
                    r.detail
                );
            }
            let _ = stdout.write_all(text.as_bytes());
            let failed: Vec<_> = results.iter().filter(|r| !r.passed).map(|r| r.name).collect();
            if failed.is_empty() {
                return EXIT_OK;
            }
            let _ = writeln!(stderr, "failed checks: {}", failed.join(", "));
            return EXIT_CHECK_FAILED;
        }
        Command::Study(args) => RunConfig::resolve(args).and_then(|c| run_study(&c, stdout)),
        Command::Sample(args) => RunConfig::resolve(args).and_then(|c| run_sample(&c, stdout)),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            exit_code(&e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_digit_number_format() {
        assert_eq!(sci3(0.0657), "0.657E-01");
        assert_eq!(sci3(0.26), "0.260E+00");
        assert_eq!(sci3(1.33e-5), "0.133E-04");
        assert_eq!(sci3(0.99972), "0.100E+01");
        assert_eq!(sci3(4.46), "0.446E+01");
    }

    #[test]
    fn default_r_rule() {
        let args = RunArgs {
            example: Some(1),
            config: None,
            k: Some(2),
            r: None,
            alpha: None,
            levels: None,
            out: None,
            format: Format::Text,
            samples: 1,
        };
        assert_eq!(RunConfig::resolve(&args).unwrap().space, SpaceConfig { k: 2, r: 1 });
        let args = RunArgs { k: Some(5), ..args };
        assert_eq!(RunConfig::resolve(&args).unwrap().space, SpaceConfig { k: 5, r: 3 });
    }

    #[test]
    fn bad_flags_exit_two() {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        assert_eq!(run(["wgoc", "study", "--bogus"], &mut out, &mut err), EXIT_USAGE);
        assert_eq!(run(["wgoc", "study"], &mut out, &mut err), EXIT_USAGE);
        assert_eq!(run(["wgoc", "study", "--example", "1", "--alpha", "-1"], &mut out, &mut err), EXIT_USAGE);
        assert_eq!(run(["wgoc", "study", "--example", "1", "--k", "3", "--r", "3"], &mut out, &mut err), EXIT_USAGE);
    }
}
