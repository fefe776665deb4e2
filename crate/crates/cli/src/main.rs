//! Command-line interface for the two-site spin entanglement toolkit.
//!
//! Exit codes: 0 success, 1 usage error (including out-of-domain parameter
//! values), 2 evaluation failure (degenerate conditioning, numerical
//! contract violation), 3 statistical disagreement from `validate`.

use std::io::Write;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use spin_epr::criteria::{
    collective_spin_criterion, epr_criterion, negativity, negativity_formula, CriterionReport,
    InferenceConvention,
};
use spin_epr::gaussian::epr_threshold_curve;
use spin_epr::sampler::estimate_criteria_suite;
use spin_epr::states::{lossy_state_closed_form, project_two_photon, WernerLossParams};

/// Two independently computed values of the same quantity must match this
/// closely before the report claims agreement.
const AGREE_TOL: f64 = 1e-10;

#[derive(Parser)]
#[command(
    name = "spin-epr",
    version,
    about = "Entanglement and spin-inference criteria for photon pairs under loss"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Entanglement negativity of the lossy pair state, computed from the
    /// partial-transpose spectrum and cross-checked against the closed form.
    Negativity {
        /// Singlet weight of the pair state, in [0, 1].
        #[arg(long, allow_negative_numbers = true)]
        p: f64,
        /// Detection efficiency, in [0, 1].
        #[arg(long, allow_negative_numbers = true)]
        eta: f64,
    },
    /// Negativity over a uniform (p, eta) grid.
    SweepNegativity {
        /// Lower edge of the p range.
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        p_min: f64,
        /// Upper edge of the p range.
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        p_max: f64,
        /// Grid points along p (at least 2).
        #[arg(long, default_value_t = 21)]
        p_steps: usize,
        /// Lower edge of the eta range.
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        eta_min: f64,
        /// Upper edge of the eta range.
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        eta_max: f64,
        /// Grid points along eta (at least 2).
        #[arg(long, default_value_t = 21)]
        eta_steps: usize,
        /// Output format; JSON streams one object per row.
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Collective-spin uncertainty criterion; by default on the two-photon
    /// post-selected pair state, where the verdict is loss-independent.
    Entanglement {
        /// Singlet weight of the pair state, in [0, 1].
        #[arg(long, allow_negative_numbers = true)]
        p: f64,
        /// Detection efficiency, in [0, 1].
        #[arg(long, allow_negative_numbers = true)]
        eta: f64,
        /// Evaluate on the full lossy state (no post-selection) instead.
        #[arg(long)]
        full: bool,
    },
    /// Inference (EPR) criterion on the lossy state.
    Epr {
        /// Singlet weight of the pair state, in [0, 1].
        #[arg(long, allow_negative_numbers = true)]
        p: f64,
        /// Detection efficiency, in [0, 1].
        #[arg(long, allow_negative_numbers = true)]
        eta: f64,
        /// Conditioning convention; `both` compares the two side by side.
        #[arg(long, value_enum, default_value_t = ConventionArg::Both)]
        convention: ConventionArg,
    },
    /// Efficiency thresholds of the macroscopic squeezed pair versus the
    /// detected photon number per site.
    MacroThreshold {
        /// Comma-separated detected occupations; replaces the log sweep.
        #[arg(
            long = "nb",
            value_delimiter = ',',
            allow_negative_numbers = true,
            conflicts_with_all = ["nb_min", "nb_max", "nb_steps"]
        )]
        nb: Vec<f64>,
        /// Lower edge of the log-spaced occupation sweep (must be > 0).
        #[arg(long, default_value_t = 1e-4, allow_negative_numbers = true)]
        nb_min: f64,
        /// Upper edge of the log-spaced occupation sweep.
        #[arg(long, default_value_t = 1e6, allow_negative_numbers = true)]
        nb_max: f64,
        /// Points in the log-spaced sweep (at least 2).
        #[arg(long, default_value_t = 41)]
        nb_steps: usize,
        /// Output format; JSON streams one object per row.
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Monte Carlo cross-validation of the analytic criteria; exits 3 when
    /// any sampled margin drifts more than 3 bootstrap sigma from the
    /// analytic value.
    Validate {
        /// Singlet weight of the pair state, in [0, 1].
        #[arg(long, allow_negative_numbers = true)]
        p: f64,
        /// Detection efficiency, in [0, 1].
        #[arg(long, allow_negative_numbers = true)]
        eta: f64,
        /// Measurement events per axis.
        #[arg(long, default_value_t = 100_000)]
        n: u64,
        /// RNG seed (axis streams derive from it).
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
    /// Emit the lossy two-site state as dense JSON
    /// ({dim, dims, re, im}).
    State {
        /// Singlet weight of the pair state, in [0, 1].
        #[arg(long, allow_negative_numbers = true)]
        p: f64,
        /// Detection efficiency, in [0, 1].
        #[arg(long, allow_negative_numbers = true)]
        eta: f64,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ConventionArg {
    AllOutcomes,
    DetectedOnly,
    Both,
}

#[derive(Serialize)]
struct NegativityReport {
    p: f64,
    eta: f64,
    negativity_matrix: f64,
    negativity_formula: f64,
    agree: bool,
}

#[derive(Serialize)]
struct SweepRow {
    p: f64,
    eta: f64,
    negativity: f64,
}

type CliResult<T> = Result<T, Box<dyn std::error::Error>>;

fn check_range(
    name_pair: &'static str,
    min: f64,
    max: f64,
    steps_name: &'static str,
    steps: usize,
) -> Result<(), spin_epr::Error> {
    if steps < 2 {
        return Err(spin_epr::Error::Domain {
            name: steps_name,
            value: steps as f64,
            range: "[2, inf)",
        });
    }
    if min >= max || !min.is_finite() || !max.is_finite() {
        return Err(spin_epr::Error::Domain {
            name: name_pair,
            value: max - min,
            range: "min < max, both finite",
        });
    }
    Ok(())
}

/// `steps` values from `min` to `max` inclusive, uniform in the value
/// itself; endpoints are exact.
fn linear_grid(min: f64, max: f64, steps: usize) -> Vec<f64> {
    (0..steps)
        .map(|i| {
            if i == steps - 1 {
                max
            } else {
                min + (max - min) * (i as f64 / (steps - 1) as f64)
            }
        })
        .collect()
}

/// `steps` values from `min` to `max` inclusive, uniform in the logarithm;
/// requires `min > 0`.
fn log_grid(min: f64, max: f64, steps: usize) -> Result<Vec<f64>, spin_epr::Error> {
    if min <= 0.0 {
        return Err(spin_epr::Error::Domain {
            name: "nb_min",
            value: min,
            range: "(0, inf)",
        });
    }
    let (lo, hi) = (min.ln(), max.ln());
    Ok((0..steps)
        .map(|i| {
            if i == 0 {
                min
            } else if i == steps - 1 {
                max
            } else {
                (lo + (hi - lo) * (i as f64 / (steps - 1) as f64)).exp()
            }
        })
        .collect())
}

fn print_report(report: &CriterionReport) -> CliResult<()> {
    println!("{}", serde_json::to_string(report)?);
    Ok(())
}

fn run(cli: Cli) -> CliResult<u8> {
    let out = std::io::stdout();
    match cli.command {
        Command::Negativity { p, eta } => {
            let params = WernerLossParams::new(p, eta)?;
            let rho = lossy_state_closed_form(&params)?;
            let matrix = negativity(&rho, 0)?;
            let formula = negativity_formula(&params);
            let report = NegativityReport {
                p,
                eta,
                negativity_matrix: matrix,
                negativity_formula: formula,
                agree: (matrix - formula).abs() <= AGREE_TOL,
            };
            println!("{}", serde_json::to_string(&report)?);
        }
        Command::SweepNegativity {
            p_min,
            p_max,
            p_steps,
            eta_min,
            eta_max,
            eta_steps,
            format,
        } => {
            check_range("p_max - p_min", p_min, p_max, "p_steps", p_steps)?;
            check_range("eta_max - eta_min", eta_min, eta_max, "eta_steps", eta_steps)?;
            let mut rows = Vec::with_capacity(p_steps * eta_steps);
            for &p in &linear_grid(p_min, p_max, p_steps) {
                for &eta in &linear_grid(eta_min, eta_max, eta_steps) {
                    let params = WernerLossParams::new(p, eta)?;
                    let rho = lossy_state_closed_form(&params)?;
                    rows.push(SweepRow {
                        p,
                        eta,
                        negativity: negativity(&rho, 0)?,
                    });
                }
            }
            let mut lock = out.lock();
            match format {
                Format::Json => {
                    for row in rows {
                        writeln!(lock, "{}", serde_json::to_string(&row)?)?;
                    }
                }
                Format::Csv => {
                    writeln!(lock, "p,eta,negativity")?;
                    for row in rows {
                        writeln!(lock, "{},{},{}", row.p, row.eta, row.negativity)?;
                    }
                }
            }
        }
        Command::Entanglement { p, eta, full } => {
            let rho = lossy_state_closed_form(&WernerLossParams::new(p, eta)?)?;
            let report = if full {
                collective_spin_criterion(&rho)?
            } else {
                let pair = project_two_photon(&rho)?;
                let base = collective_spin_criterion(&pair)?;
                CriterionReport::new(
                    "collective-spin-uncertainty-projected",
                    base.lhs,
                    base.rhs,
                    None,
                )
            };
            print_report(&report)?;
        }
        Command::Epr { p, eta, convention } => {
            let rho = lossy_state_closed_form(&WernerLossParams::new(p, eta)?)?;
            match convention {
                ConventionArg::AllOutcomes => {
                    print_report(&epr_criterion(&rho, InferenceConvention::AllOutcomes)?)?
                }
                ConventionArg::DetectedOnly => {
                    print_report(&epr_criterion(&rho, InferenceConvention::DetectedOnly)?)?
                }
                ConventionArg::Both => {
                    let reports: Vec<CriterionReport> = InferenceConvention::ALL
                        .iter()
                        .map(|&c| epr_criterion(&rho, c))
                        .collect::<Result<_, _>>()?;
                    println!("{}", serde_json::to_string(&reports)?);
                }
            }
        }
        Command::MacroThreshold {
            nb,
            nb_min,
            nb_max,
            nb_steps,
            format,
        } => {
            let nbs = if nb.is_empty() {
                check_range("nb_max - nb_min", nb_min, nb_max, "nb_steps", nb_steps)?;
                log_grid(nb_min, nb_max, nb_steps)?
            } else {
                nb
            };
            let curve = epr_threshold_curve(&nbs)?;
            let mut lock = out.lock();
            match format {
                Format::Json => {
                    for point in curve {
                        writeln!(lock, "{}", serde_json::to_string(&point)?)?;
                    }
                }
                Format::Csv => {
                    writeln!(lock, "nb,eta_min_entanglement,eta_min_epr")?;
                    let cell = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
                    for point in curve {
                        writeln!(
                            lock,
                            "{},{},{}",
                            point.nb,
                            cell(point.eta_min_entanglement),
                            cell(point.eta_min_epr)
                        )?;
                    }
                }
            }
        }
        Command::Validate { p, eta, n, seed } => {
            let rho = lossy_state_closed_form(&WernerLossParams::new(p, eta)?)?;
            let suite = estimate_criteria_suite(&rho, n, seed)?;
            println!("{}", serde_json::to_string(&suite)?);
            if !suite.all_agree() {
                return Ok(3);
            }
        }
        Command::State { p, eta } => {
            let rho = lossy_state_closed_form(&WernerLossParams::new(p, eta)?)?;
            println!("{}", serde_json::to_string(&rho)?);
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            // Out-of-domain parameter values are argument mistakes; anything
            // else is an evaluation failure.
            let domain = matches!(
                e.downcast_ref::<spin_epr::Error>(),
                Some(spin_epr::Error::Domain { .. })
            );
            ExitCode::from(if domain { 1 } else { 2 })
        }
    }
}
