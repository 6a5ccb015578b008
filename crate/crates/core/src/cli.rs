//! Command-line front end: `run`, `sweep`, `fit`, `spin`, `oracle-check`.
//!
//! Exit codes: 0 success, 1 a self-check failed, 2 configuration error,
//! 3 numerical-resolution error.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::error::{PopperError, Result};
use crate::experiments::{
    fidelity_checks, fit_real_slit_epsilon, fit_sigma_from_width, run_scenario, run_strekalov_sweep, sweep_widths,
    width_roots, RunOptions, Scenario, SigmaFit, SweepRow, WidthReport, WidthRoots,
};
use crate::gaussian::PhysParams;
use crate::report::{write_sweep_csv, write_table_csv, ReportDocument};
use crate::spin::{self, Axis, Particle, SpinState, EIGENVALUES};

#[derive(Debug, Parser)]
#[command(name = "popper-sim", version, about = "Ghost imaging and ghost diffraction widths for entangled pairs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args, Default)]
pub struct Common {
    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Also write plot data as CSV.
    #[arg(long, global = true, value_name = "PATH")]
    pub csv: Option<PathBuf>,
    /// Run the grid oracle alongside the closed forms.
    #[arg(long, global = true)]
    pub oracle: bool,
    /// Grid points per axis for the oracle (power of two).
    #[arg(long, global = true, value_name = "N")]
    pub grid_n: Option<usize>,
    /// Accepted for compatibility; every computation is deterministic.
    #[arg(long, global = true)]
    pub seedless: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate a scenario file.
    Run { scenario: PathBuf },
    /// Coincidence FWHM against slit width.
    Sweep {
        scenario: PathBuf,
        #[arg(long, value_enum, default_value_t = SweepParam::SlitFullWidth)]
        param: SweepParam,
        #[arg(long, value_name = "MM")]
        from: Option<f64>,
        #[arg(long, value_name = "MM")]
        to: Option<f64>,
        #[arg(long)]
        steps: Option<usize>,
    },
    /// Infer a² (or a real slit's ε when --epsilon is omitted) from a FWHM.
    Fit {
        #[arg(long, value_name = "MM")]
        fwhm: f64,
        #[arg(long, value_name = "MM")]
        epsilon: Option<f64>,
        /// Flight from the (virtual) slit to the detector.
        #[arg(long, alias = "l2", value_name = "MM")]
        distance: f64,
        #[arg(long, default_value_t = 702.0)]
        lambda_nm: f64,
    },
    /// Spin-1 pair: marginals and coincidences.
    Spin {
        #[arg(long, requires = "beta", conflicts_with = "preset")]
        alpha: Option<f64>,
        #[arg(long, requires = "alpha", conflicts_with = "preset")]
        beta: Option<f64>,
        #[arg(long, value_enum)]
        preset: Option<SpinPreset>,
    },
    /// Compare the grid oracle against closed forms and itself.
    OracleCheck,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum SweepParam {
    SlitFullWidth,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SpinPreset {
    Eq2,
}

/// Parse arguments, run, report errors on stderr and return the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let stdout = io::stdout();
    match execute(&cli, &mut stdout.lock()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Run a parsed command, writing the main output to `stdout`.
pub fn execute(cli: &Cli, stdout: &mut dyn Write) -> Result<i32> {
    let c = &cli.common;
    let opts = RunOptions {
        oracle: c.oracle,
        grid_n: c.grid_n,
    };
    match &cli.command {
        Command::Run { scenario } => {
            let scn = Scenario::load(scenario)?;
            let report = run_scenario(&scn, opts)?;
            if let Some(path) = &c.csv {
                write_table_csv(
                    &["quantity", "analytic", "oracle"],
                    &report_table(&report),
                    create(path)?,
                )?;
            }
            emit(&ReportDocument::new("run", Some(scn), report), c, stdout)?;
        }
        Command::Sweep {
            scenario,
            param: SweepParam::SlitFullWidth,
            from,
            to,
            steps,
        } => {
            let scn = Scenario::load(scenario)?;
            let preset = scn.sweep;
            let pick = |flag: Option<f64>, field: Option<f64>, name: &str| {
                flag.or(field)
                    .ok_or_else(|| PopperError::config(format!("sweep needs --{name} (or a sweep block in the scenario)")))
            };
            let from = pick(*from, preset.map(|s| s.from_mm), "from")?;
            let to = pick(*to, preset.map(|s| s.to_mm), "to")?;
            let steps = steps
                .or(preset.map(|s| s.steps))
                .ok_or_else(|| PopperError::config("sweep needs --steps (or a sweep block in the scenario)"))?;
            let rows = run_strekalov_sweep(&scn, &sweep_widths(from, to, steps)?, opts)?;
            match &c.csv {
                Some(path) => write_sweep_csv(&rows, create(path)?)?,
                None => write_sweep_csv(&rows, &mut *stdout)?,
            }
            if c.out.is_some() {
                emit(&ReportDocument::new("sweep", Some(scn), SweepResults { rows }), c, stdout)?;
            }
        }
        Command::Fit {
            fwhm,
            epsilon,
            distance,
            lambda_nm,
        } => {
            let params = PhysParams::from_nm(*lambda_nm)?;
            let results = match epsilon {
                Some(eps) => FitResults::Sigma(fit_sigma_from_width(*fwhm, *eps, *distance, params)?),
                None => FitResults::RealSlit {
                    observed_fwhm_mm: *fwhm,
                    distance_mm: *distance,
                    epsilon_mm: fit_real_slit_epsilon(*fwhm, *distance, params)?,
                    roots: width_roots(*fwhm, *distance, params)?,
                },
            };
            emit(&ReportDocument::new("fit", None, results), c, stdout)?;
        }
        Command::Spin { alpha, beta, preset } => {
            let (alpha, beta, state) = match (preset, alpha, beta) {
                (Some(SpinPreset::Eq2), _, _) | (None, None, None) => {
                    let alpha = 0.05f64.sqrt();
                    (alpha, 0.9f64.sqrt(), spin::eq2_state())
                }
                (None, Some(a), Some(b)) => (*a, *b, spin::make_popper_spin_state(*a, *b).map_err(to_config)?),
                _ => return Err(PopperError::config("give both --alpha and --beta, or --preset")),
            };
            emit(&ReportDocument::new("spin", None, spin_results(alpha, beta, &state)), c, stdout)?;
        }
        Command::OracleCheck => {
            let checks = fidelity_checks(c.grid_n.unwrap_or(crate::experiments::DEFAULT_GRID_N))?;
            let pass = checks.iter().all(|k| k.pass);
            emit(&ReportDocument::new("oracle-check", None, CheckResults { pass, checks }), c, stdout)?;
            return Ok(if pass { 0 } else { 1 });
        }
    }
    Ok(0)
}

fn to_config(e: PopperError) -> PopperError {
    match e {
        PopperError::Domain(msg) => PopperError::Config(msg),
        other => other,
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

fn emit<T: Serialize>(doc: &ReportDocument<T>, c: &Common, stdout: &mut dyn Write) -> Result<()> {
    let text = doc.to_json()?;
    match &c.out {
        Some(path) => {
            let mut f = create(path)?;
            f.write_all(text.as_bytes())?;
            f.flush()?;
        }
        None => stdout.write_all(text.as_bytes())?,
    }
    Ok(())
}

fn report_table(r: &WidthReport) -> Vec<(String, Vec<Option<f64>>)> {
    let o = r.oracle.as_ref().map(|o| o.widths);
    let row = |name: &str, get: fn(&crate::experiments::WidthSet) -> Option<f64>| {
        (name.to_string(), vec![get(&r.analytic), o.as_ref().and_then(get)])
    };
    vec![
        row("beam_fwhm_mm", |w| w.beam_fwhm_mm),
        row("coincidence_fwhm_mm", |w| Some(w.coincidence_fwhm_mm)),
        row("real_slit_fwhm_mm", |w| w.real_slit_fwhm_mm),
        row("ghost_image_width_mm", |w| w.ghost_image_width_mm),
        row("virtual_slit_distance_mm", |w| w.virtual_slit_distance_mm),
    ]
}

#[derive(Serialize)]
struct SweepResults {
    rows: Vec<SweepRow>,
}

#[derive(Serialize)]
#[serde(untagged)]
enum FitResults {
    Sigma(SigmaFit),
    RealSlit {
        observed_fwhm_mm: f64,
        distance_mm: f64,
        epsilon_mm: f64,
        roots: WidthRoots,
    },
}

#[derive(Serialize)]
struct CheckResults {
    pass: bool,
    checks: Vec<crate::experiments::Check>,
}

#[derive(Serialize)]
struct SpinConditional {
    a_x: i8,
    probability: f64,
    /// `None` when the outcome never occurs.
    b_z: Option<[f64; 3]>,
}

#[derive(Serialize)]
struct SpinResults {
    basis_order: [i8; 3],
    alpha: f64,
    beta: f64,
    marginal_b_z: [f64; 3],
    marginal_a_x: [f64; 3],
    conditional_on_a_x: Vec<SpinConditional>,
}

fn spin_results(alpha: f64, beta: f64, state: &SpinState) -> SpinResults {
    let conditional_on_a_x = EIGENVALUES
        .iter()
        .map(|&v| match spin::condition_on(state, Particle::A, Axis::X, v) {
            Ok(o) => SpinConditional {
                a_x: v,
                probability: o.probability,
                b_z: Some(o.partner_distribution(Axis::Z).0),
            },
            Err(_) => SpinConditional {
                a_x: v,
                probability: 0.0,
                b_z: None,
            },
        })
        .collect();
    SpinResults {
        basis_order: EIGENVALUES,
        alpha,
        beta,
        marginal_b_z: spin::marginal_probabilities(state, Particle::B, Axis::Z).0,
        marginal_a_x: spin::marginal_probabilities(state, Particle::A, Axis::X).0,
        conditional_on_a_x,
    }
}
