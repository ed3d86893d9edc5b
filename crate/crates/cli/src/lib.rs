//! Command-line front end for the `decorated` library.
//!
//! Exit codes: 0 on success, 1 when arguments or input files are rejected,
//! 2 when the computation itself fails (overflow, no root, failed identity).

use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use decorated::correlate::alpha_coefficients;
use decorated::format::{CellDocument, CouplingsDocument, LatticeDocument};
use decorated::mixed::{k_grid, solve_critical_curve, CurvePoint, ScanOptions};
use decorated::oracle::verify;
use decorated::transform::effective_couplings;
use decorated::vanderm::{build_vandermonde, format_rational, inverse_vandermonde};
use decorated::{CouplingVector, NodeConvention, SpinValue};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(
    name = "decorated",
    version,
    about = "Decoration transformations for classical spin models"
)]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
    /// Output format (each subcommand has its own default)
    #[arg(long, global = true, value_enum)]
    pub format: Option<OutputFormat>,
    /// Write to this file instead of standard output
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Equidistant-node Vandermonde matrix, or its inverse, as exact fractions
    Vandermonde {
        /// Twice the spin (1 for spin-1/2, 2 for spin-1, ...)
        #[arg(long)]
        spin: u32,
        #[arg(long, value_enum, default_value = "physical")]
        convention: ConventionArg,
        #[arg(long)]
        inverse: bool,
    },
    /// Effective couplings of a decorated cell
    Transform {
        #[arg(long)]
        cell: PathBuf,
    },
    /// Expansion coefficients of the central-spin correlation function
    Alpha {
        #[arg(long)]
        cell: PathBuf,
    },
    /// Critical D_c(K) of the mixed spin-(1/2, S) square lattice
    CriticalCurve {
        /// Twice the decorating spin S
        #[arg(long)]
        spin: u32,
        #[arg(long, allow_hyphen_values = true)]
        k_min: f64,
        #[arg(long, allow_hyphen_values = true)]
        k_max: f64,
        #[arg(long, allow_hyphen_values = true)]
        k_step: f64,
        #[arg(long, allow_hyphen_values = true, default_value_t = -60.0)]
        d_min: f64,
        #[arg(long, allow_hyphen_values = true, default_value_t = 60.0)]
        d_max: f64,
        #[arg(long, allow_hyphen_values = true, default_value_t = 1e-10)]
        tol: f64,
    },
    /// Check partition, correlation and constant-shift identities on a lattice file
    Verify {
        #[arg(long)]
        spec: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ConventionArg {
    Physical,
    Normalized,
}

impl From<ConventionArg> for NodeConvention {
    fn from(c: ConventionArg) -> Self {
        match c {
            ConventionArg::Physical => NodeConvention::Physical,
            ConventionArg::Normalized => NodeConvention::Normalized,
        }
    }
}

enum Failure {
    Invalid(String),
    Compute(String),
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure::Invalid(msg.into())
}

fn compute(e: decorated::Error) -> Failure {
    Failure::Compute(e.to_string())
}

/// Parses `args` (program name first) and runs the subcommand.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    run_with(args, &mut std::io::stdout().lock(), &mut std::io::stderr().lock())
}

/// As [`run`], with explicit output streams.
pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let config = match RunConfig::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{text}");
                1
            } else {
                let _ = write!(out, "{text}");
                0
            };
        }
    };
    match execute(&config, err) {
        Ok(text) => {
            let written = match &config.output {
                Some(path) => std::fs::write(path, &text).map_err(|e| format!("--output {}: {e}", path.display())),
                None => out.write_all(text.as_bytes()).map_err(|e| e.to_string()),
            };
            match written {
                Ok(()) => 0,
                Err(msg) => {
                    let _ = writeln!(err, "error: {msg}");
                    1
                }
            }
        }
        Err(Failure::Invalid(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            1
        }
        Err(Failure::Compute(msg)) => {
            let _ = writeln!(err, "computation failed: {msg}");
            2
        }
    }
}

fn spin_flag(twice: u32, flag: &str) -> Result<SpinValue, Failure> {
    SpinValue::from_twice(twice).map_err(|_| {
        invalid(format!(
            "{flag} must be a positive integer (twice the spin), got {twice}"
        ))
    })
}

fn finite(x: f64, flag: &str) -> Result<f64, Failure> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(invalid(format!("{flag} must be finite")))
    }
}

fn read_file(path: &PathBuf, flag: &str) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| invalid(format!("{flag} {}: {e}", path.display())))
}

fn execute(config: &RunConfig, err: &mut dyn Write) -> Result<String, Failure> {
    match &config.command {
        Command::Vandermonde {
            spin,
            convention,
            inverse,
        } => {
            let s = spin_flag(*spin, "--spin")?;
            let conv = NodeConvention::from(*convention);
            let m = if *inverse {
                inverse_vandermonde(s, conv)
            } else {
                build_vandermonde(s, conv)
            };
            Ok(match config.format.unwrap_or(OutputFormat::Csv) {
                OutputFormat::Csv => m.to_string(),
                OutputFormat::Json => {
                    let rows: Vec<Vec<String>> = (0..m.rows())
                        .map(|i| m.row(i).iter().map(format_rational).collect())
                        .collect();
                    let doc = serde_json::json!({
                        "spin": spin,
                        "convention": conv,
                        "inverse": inverse,
                        "matrix": rows,
                    });
                    json_text(&doc)
                }
            })
        }
        Command::Transform { cell: path } | Command::Alpha { cell: path } => {
            let text = read_file(path, "--cell")?;
            let cell = CellDocument::from_json(&text)
                .and_then(|d| d.to_cell())
                .map_err(|e| invalid(format!("--cell {}: {e}", path.display())))?;
            let values = match config.command {
                Command::Transform { .. } => effective_couplings(&cell).map_err(compute)?.into_couplings(),
                _ => alpha_coefficients(&cell).map_err(compute)?.values().clone(),
            };
            couplings_output(&values, config.format.unwrap_or(OutputFormat::Json))
        }
        Command::CriticalCurve {
            spin,
            k_min,
            k_max,
            k_step,
            d_min,
            d_max,
            tol,
        } => {
            let s = spin_flag(*spin, "--spin")?;
            let (k_min, k_max) = (finite(*k_min, "--k-min")?, finite(*k_max, "--k-max")?);
            let k_step = finite(*k_step, "--k-step")?;
            let (d_min, d_max) = (finite(*d_min, "--d-min")?, finite(*d_max, "--d-max")?);
            if k_step <= 0.0 {
                return Err(invalid("--k-step must be positive"));
            }
            if k_max < k_min {
                return Err(invalid("--k-max must not be below --k-min"));
            }
            if d_max <= d_min {
                return Err(invalid("--d-max must exceed --d-min"));
            }
            if !(*tol > 0.0 && tol.is_finite()) {
                return Err(invalid("--tol must be positive"));
            }
            let ks = k_grid(k_min, k_max, k_step).map_err(|e| invalid(format!("--k-step: {e}")))?;
            let opts = ScanOptions {
                tol: *tol,
                ..ScanOptions::with_bracket(d_min, d_max)
            };
            let curve = solve_critical_curve(s, &ks, &opts).map_err(compute)?;
            if curve.iter().all(|p| p.found().is_none()) {
                return Err(Failure::Compute(format!("no root in [{d_min}, {d_max}] for any K")));
            }
            for p in &curve {
                if let CurvePoint::NoRoot { k } = p {
                    let _ = writeln!(err, "warning: no root in bracket at K = {k}");
                }
            }
            Ok(curve_output(&curve, config.format.unwrap_or(OutputFormat::Csv)))
        }
        Command::Verify { spec } => {
            let text = read_file(spec, "--spec")?;
            let lattice = LatticeDocument::from_json(&text)
                .and_then(|d| d.to_spec())
                .map_err(|e| invalid(format!("--spec {}: {e}", spec.display())))?;
            let checks = verify(&lattice).map_err(compute)?;
            let mut out = String::new();
            match config.format {
                Some(OutputFormat::Json) => {
                    let rows: Vec<_> = checks
                        .iter()
                        .map(|c| {
                            serde_json::json!({
                                "check": c.name,
                                "passed": c.passed(),
                                "residual": c.residual,
                                "tolerance": c.tolerance,
                            })
                        })
                        .collect();
                    out = json_text(&serde_json::Value::Array(rows));
                }
                _ => {
                    for c in &checks {
                        let verdict = if c.passed() { "PASS" } else { "FAIL" };
                        let _ = writeln!(
                            out,
                            "{verdict} {}: residual {:.3e} (tolerance {:.0e})",
                            c.name, c.residual, c.tolerance
                        );
                    }
                }
            }
            if checks.iter().all(|c| c.passed()) {
                Ok(out)
            } else {
                let _ = write!(err, "{out}");
                Err(Failure::Compute("identity check failed".into()))
            }
        }
    }
}

fn json_text(v: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("plain data serializes");
    s.push('\n');
    s
}

fn float(x: f64) -> String {
    format!("{x:.16e}")
}

fn couplings_output(j: &CouplingVector, format: OutputFormat) -> Result<String, Failure> {
    let doc = CouplingsDocument::from_vector(j).map_err(compute)?;
    Ok(match format {
        OutputFormat::Json => {
            let mut s = doc.to_json();
            s.push('\n');
            s
        }
        OutputFormat::Csv => {
            let m = doc.legs.len();
            let mut s: String = (1..=m).map(|k| format!("n{k},")).collect();
            s.push_str("value\n");
            for e in &doc.couplings {
                for n in &e.index {
                    let _ = write!(s, "{n},");
                }
                let _ = writeln!(s, "{}", float(e.value));
            }
            s
        }
    })
}

fn curve_output(curve: &[CurvePoint], format: OutputFormat) -> String {
    match format {
        OutputFormat::Csv => {
            let mut s = String::from("K_c,D_c,delta,ratio,w1,w2,w5\n");
            for p in curve.iter().filter_map(CurvePoint::found) {
                let w = &p.weights;
                let row = [p.k_c, p.d_c, p.delta, p.ratio, w.w1(), w.w2(), w.w5()].map(float);
                let _ = writeln!(s, "{}", row.join(","));
            }
            s
        }
        OutputFormat::Json => {
            let rows: Vec<_> = curve
                .iter()
                .map(|p| match p {
                    CurvePoint::Found(c) => serde_json::json!({
                        "K_c": c.k_c,
                        "D_c": c.d_c,
                        "delta": c.delta,
                        "ratio": c.ratio,
                        "w1": c.weights.w1(),
                        "w2": c.weights.w2(),
                        "w5": c.weights.w5(),
                    }),
                    CurvePoint::NoRoot { k } => serde_json::json!({ "K": k, "root": null }),
                })
                .collect();
            json_text(&serde_json::Value::Array(rows))
        }
    }
}
