//! Command-line front end: argument parsing, dispatch and CSV/JSON output.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use rug::{Float, Rational};
use serde::Serialize;

use crate::difference::{self, Quantity};
use crate::error::{Error, Result};
use crate::ladder::{self, compute_at};
use crate::moments::{build_moment_table, WeightSpec};
use crate::painleve::{self, IntegrationLog, StepControl};
use crate::precision::{log2_abs, PrecisionConfig};
use crate::residual::{mismatch, ResidualReport};
use crate::scaling::{self, series, Regime, ScaledQuantity, SeriesExpansion, SeriesName, Truncation};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_PRECISION: i32 = 2;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_IO: i32 = 74;

#[derive(Parser, Debug)]
#[command(name = "hankel-p3", version, about = "Hankel determinants of exp(-x^2 - t/x^2) and their Painlevé III' structure")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Args, Debug, Clone)]
pub struct CommonArgs {
    /// Working precision in bits; defaults to a policy based on the largest order.
    #[arg(long, global = true, env = "HANKEL_P3_PREC_BITS")]
    pub prec_bits: Option<u32>,
    /// Guard bits subtracted from the working precision to form the tolerance.
    #[arg(long, global = true)]
    pub guard_bits: Option<u32>,
    /// Output file; standard output when absent.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Spacing {
    Linear,
    Log,
}

/// A list of values or an evenly spaced grid.
#[derive(Args, Debug, Clone)]
pub struct GridArgs {
    /// Comma-separated values.
    #[arg(long, value_delimiter = ',')]
    pub t: Vec<String>,
    #[arg(long)]
    pub t_start: Option<String>,
    #[arg(long)]
    pub t_stop: Option<String>,
    #[arg(long, default_value_t = 10)]
    pub t_count: usize,
    #[arg(long, value_enum, default_value_t = Spacing::Log)]
    pub spacing: Spacing,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ComputeQuantity {
    Recurrence,
    Aux,
    #[value(name = "R")]
    BigR,
    #[value(name = "r")]
    SmallR,
    Sigma,
    Beta,
    H,
    #[value(name = "logD")]
    LogD,
    P,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum VerifyWhat {
    Ladder,
    Difference,
    Ode,
    Laguerre,
    All,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Norms, recurrence coefficients and auxiliary quantities.
    Compute {
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        n_max: Option<usize>,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long, value_enum, default_value_t = ComputeQuantity::Aux)]
        quantity: ComputeQuantity,
    },
    /// Residuals of the identities and equations on a t grid.
    Verify {
        #[arg(long, value_enum, default_value_t = VerifyWhat::All)]
        what: VerifyWhat,
        #[arg(long, default_value_t = 20)]
        n_max: usize,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Forward recursion of a difference equation against the factorization.
    Recursion {
        #[arg(long, value_parser = parse_quantity)]
        quantity: Quantity,
        #[arg(long, default_value_t = 25)]
        n_max: usize,
        #[arg(long)]
        t: String,
    },
    /// Integrates the Painlevé III' equation for R_n.
    Integrate {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        t0: String,
        #[arg(long)]
        t1: String,
        /// Local error tolerance per step.
        #[arg(long, default_value = "1e-25")]
        tol: String,
    },
    /// Finite-n samples of the scaled quantities against their series.
    Scale {
        #[arg(long, value_parser = parse_scaled)]
        quantity: ScaledQuantity,
        #[arg(long, value_delimiter = ',', required = true)]
        s: Vec<String>,
        #[arg(long, value_delimiter = ',', default_value = "16,32,64")]
        n_list: Vec<usize>,
    },
    /// Evaluates or lists an asymptotic series.
    Series {
        #[arg(long, value_parser = parse_series)]
        which: SeriesName,
        #[arg(long, value_parser = parse_regime)]
        regime: Regime,
        /// Laguerre exponent for C, H and Delta, as a rational such as -1/2.
        #[arg(long, allow_hyphen_values = true)]
        alpha: Option<String>,
        #[arg(long, value_delimiter = ',')]
        s: Vec<String>,
        /// `auto` or a number of terms.
        #[arg(long, default_value = "auto")]
        truncation: String,
        /// List exact coefficients instead of evaluating.
        #[arg(long)]
        coefficients: bool,
    },
    /// Writes a moment table as JSON.
    DumpMoments {
        #[arg(long, value_enum, default_value_t = Family::Gaussian)]
        family: Family,
        #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
        alpha: f64,
        #[arg(long)]
        t: String,
        #[arg(long, allow_hyphen_values = true, default_value_t = 0)]
        k_min: i64,
        #[arg(long, default_value_t = 10)]
        k_max: i64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Family {
    Gaussian,
    Laguerre,
}

fn parse_quantity(s: &str) -> std::result::Result<Quantity, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_scaled(s: &str) -> std::result::Result<ScaledQuantity, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_series(s: &str) -> std::result::Result<SeriesName, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_regime(s: &str) -> std::result::Result<Regime, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// Validated configuration for one run.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: Command,
    pub precision: PrecisionConfig,
    pub output: Option<PathBuf>,
    pub format: Format,
}

impl RunConfig {
    pub fn from_cli(cli: Cli) -> Result<Self> {
        let order = order_hint(&cli.command);
        let precision = match (cli.common.prec_bits, cli.common.guard_bits) {
            (Some(bits), Some(guard)) => PrecisionConfig::new(bits, guard, 0)?,
            (Some(bits), None) => PrecisionConfig::with_bits(bits, order)?,
            (None, Some(guard)) => {
                let base = PrecisionConfig::for_order(order);
                PrecisionConfig::new(base.work_bits, guard, 0)?
            }
            (None, None) => PrecisionConfig::for_order(order),
        };
        let default_format = match cli.command {
            Command::Integrate { .. } | Command::DumpMoments { .. } => Format::Json,
            _ => Format::Csv,
        };
        Ok(RunConfig {
            command: cli.command,
            precision,
            output: cli.common.output,
            format: cli.common.format.unwrap_or(default_format),
        })
    }
}

/// Largest Hankel order a command touches.
fn order_hint(cmd: &Command) -> usize {
    match cmd {
        Command::Compute { n, n_max, .. } => n_max.or(*n).unwrap_or(10),
        Command::Verify { what, n_max, .. } => match what {
            VerifyWhat::Laguerre | VerifyWhat::All => 2 * n_max + 2,
            _ => *n_max + 1,
        },
        Command::Recursion { n_max, .. } => *n_max + 1,
        Command::Integrate { n, .. } => *n,
        Command::Scale { n_list, .. } => 2 * n_list.iter().max().copied().unwrap_or(0) + 1,
        Command::Series { .. } => 0,
        Command::DumpMoments { k_max, .. } => k_max.unsigned_abs() as usize / 2,
    }
}

/// Rows ready for serialization, and whether any checked residual failed.
pub struct Outcome {
    pub rows: Rows,
    pub violations: Vec<String>,
}

pub enum Rows {
    Recurrence(Vec<RecurrenceRow>),
    Aux(Vec<AuxRow>),
    Value(Vec<ValueRow>),
    Residual(Vec<ResidualRow>),
    Trace(Vec<TraceRow>),
    Integrate(Vec<IntegrateRow>),
    Scaling(Vec<ScalingRow>),
    Series(Vec<SeriesRow>),
    Coefficients(Vec<CoefficientRow>),
    Moments(crate::moments::MomentTableJson),
}

#[derive(Serialize, Debug, Clone, PartialEq)]
pub struct RecurrenceRow {
    pub n: usize,
    pub t: String,
    pub h_n: String,
    pub beta_n: String,
    pub p_n: String,
    #[serde(rename = "logD_n")]
    pub log_d_n: String,
}

#[derive(Serialize, Debug, Clone, PartialEq)]
pub struct AuxRow {
    pub n: usize,
    pub t: String,
    #[serde(rename = "R_n")]
    pub big_r_n: String,
    pub r_n: String,
    pub sigma_n: String,
    #[serde(rename = "dR_n")]
    pub d_big_r_n: String,
    pub dr_n: String,
    pub dsigma_n: String,
}

#[derive(Serialize, Debug, Clone, PartialEq)]
pub struct ValueRow {
    pub quantity: String,
    pub n: usize,
    pub t: String,
    pub value: String,
}

#[derive(Serialize, Debug, Clone, PartialEq)]
pub struct ResidualRow {
    pub equation: String,
    pub n: usize,
    pub t: String,
    pub residual: String,
}

#[derive(Serialize, Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub quantity: String,
    pub n: usize,
    pub t: String,
    pub value: String,
    pub source: String,
    pub residual: String,
}

#[derive(Serialize, Debug, Clone, PartialEq)]
pub struct IntegrateRow {
    #[serde(flatten)]
    pub log: IntegrationLog,
    #[serde(rename = "R_n")]
    pub big_r_n: String,
    #[serde(rename = "dR_n")]
    pub d_big_r_n: String,
    /// `R_n(t1)` from the factorization.
    pub reference: String,
    pub deviation: String,
}

#[derive(Serialize, Debug, Clone, PartialEq)]
pub struct ScalingRow {
    pub quantity: String,
    pub regime: String,
    pub n: usize,
    pub s: String,
    pub t: String,
    pub sample: String,
    pub series: String,
    pub next_term_bound: String,
    pub deviation: String,
}

#[derive(Serialize, Debug, Clone, PartialEq)]
pub struct SeriesRow {
    pub name: String,
    pub regime: String,
    pub alpha: String,
    pub s: String,
    pub value: String,
    pub next_term_bound: String,
    pub terms_used: usize,
}

#[derive(Serialize, Debug, Clone, PartialEq)]
pub struct CoefficientRow {
    pub name: String,
    pub regime: String,
    pub alpha: String,
    /// `term`, `log` or `constant`.
    pub kind: String,
    pub exponent: String,
    pub coefficient: String,
}

fn grid(args: &GridArgs, prec: &PrecisionConfig) -> Result<Vec<Float>> {
    let bits = prec.work_bits;
    let mut out: Vec<Float> = args.t.iter().map(|s| prec.parse(s)).collect::<Result<_>>()?;
    match (&args.t_start, &args.t_stop) {
        (Some(a), Some(b)) => {
            let (a, b) = (prec.parse(a)?, prec.parse(b)?);
            let k = args.t_count;
            if k == 0 {
                return Err(Error::domain("--t-count must be positive"));
            }
            for i in 0..k {
                let frac = if k == 1 { 0.0 } else { i as f64 / (k - 1) as f64 };
                let f = Float::with_val(bits, i) / Float::with_val(bits, (k - 1).max(1));
                let x = match args.spacing {
                    Spacing::Linear => Float::with_val(bits, &b - &a) * &f + &a,
                    Spacing::Log => {
                        if !(a > 0 && b > 0) {
                            return Err(Error::domain("log spacing needs positive endpoints"));
                        }
                        let ratio = Float::with_val(bits, &b / &a).ln() * &f;
                        ratio.exp() * &a
                    }
                };
                // endpoints exactly as given
                out.push(if frac == 0.0 { a.clone() } else if i + 1 == k { b.clone() } else { x });
            }
        }
        (None, None) => {}
        _ => return Err(Error::domain("--t-start and --t-stop go together")),
    }
    if out.is_empty() {
        return Err(Error::domain("empty t grid"));
    }
    Ok(out)
}

/// Runs the configured command. Precision failures are retried once at
/// doubled precision by [`run`].
pub fn execute(cfg: &RunConfig) -> Result<Outcome> {
    let prec = &cfg.precision;
    let fmt = |x: &Float| prec.format(x);
    let none = Vec::new;
    match &cfg.command {
        Command::Compute { n, n_max, grid: g, quantity } => {
            let hi = n_max.or(*n).ok_or_else(|| Error::domain("compute needs --n or --n-max"))?;
            let lo = n.unwrap_or(0);
            if lo > hi {
                return Err(Error::domain("--n exceeds --n-max"));
            }
            let ts = grid(g, prec)?;
            let data = ts
                .par_iter()
                .map(|t| compute_at(t, hi.max(1), prec))
                .collect::<Result<Vec<_>>>()?;
            let rows = match quantity {
                ComputeQuantity::Recurrence => Rows::Recurrence(
                    data.iter()
                        .flat_map(|(rec, _)| {
                            (lo..=hi).map(move |k| RecurrenceRow {
                                n: k,
                                t: fmt(&rec.t),
                                h_n: fmt(&rec.h[k]),
                                beta_n: fmt(&rec.beta[k]),
                                p_n: fmt(&rec.p_coeff[k]),
                                log_d_n: fmt(&rec.log_d[k]),
                            })
                        })
                        .collect(),
                ),
                ComputeQuantity::Aux => Rows::Aux(
                    data.iter()
                        .flat_map(|(_, a)| {
                            (lo..=hi).map(move |k| AuxRow {
                                n: k,
                                t: fmt(&a.t),
                                big_r_n: fmt(&a.big_r[k]),
                                r_n: fmt(&a.r[k]),
                                sigma_n: fmt(&a.sigma[k]),
                                d_big_r_n: fmt(&a.d_big_r[k]),
                                dr_n: fmt(&a.dr[k]),
                                dsigma_n: fmt(&a.dsigma[k]),
                            })
                        })
                        .collect(),
                ),
                q => {
                    let name = q.to_possible_value().expect("named").get_name().to_string();
                    Rows::Value(
                        data.iter()
                            .flat_map(|(rec, a)| {
                                let name = name.clone();
                                (lo..=hi).map(move |k| {
                                    let v = match q {
                                        ComputeQuantity::BigR => &a.big_r[k],
                                        ComputeQuantity::SmallR => &a.r[k],
                                        ComputeQuantity::Sigma => &a.sigma[k],
                                        ComputeQuantity::Beta => &rec.beta[k],
                                        ComputeQuantity::H => &rec.h[k],
                                        ComputeQuantity::LogD => &rec.log_d[k],
                                        _ => &rec.p_coeff[k],
                                    };
                                    ValueRow {
                                        quantity: name.clone(),
                                        n: k,
                                        t: fmt(&a.t),
                                        value: fmt(v),
                                    }
                                })
                            })
                            .collect(),
                    )
                }
            };
            Ok(Outcome { rows, violations: none() })
        }
        Command::Verify { what, n_max, grid: g } => {
            let ts = grid(g, prec)?;
            let what = *what;
            let n_max = *n_max;
            let reports = ts
                .par_iter()
                .map(|t| verify_at(what, n_max, t, prec))
                .collect::<Result<Vec<_>>>()?;
            let mut all = ResidualReport::new();
            for r in reports {
                all.extend(r);
            }
            let tol = prec.tolerance();
            let violations = all
                .violations(&tol)
                .iter()
                .map(|v| format!("{} n={} t={} residual=2^{:.1}", v.identity, v.n, fmt(&v.t), v.log2()))
                .collect();
            let rows = all
                .entries
                .iter()
                .map(|e| ResidualRow {
                    equation: e.identity.clone(),
                    n: e.n,
                    t: fmt(&e.t),
                    residual: fmt(&e.value),
                })
                .collect();
            Ok(Outcome { rows: Rows::Residual(rows), violations })
        }
        Command::Recursion { quantity, n_max, t } => {
            let t = prec.parse(t)?;
            let (_, aux) = compute_at(&t, (*n_max).max(2), prec)?;
            let hankel = difference::hankel_trace(&aux, *quantity);
            let rec = difference::run_recursion(*quantity, &t, *n_max, prec)?;
            let cmp = difference::compare_traces(&rec, &hankel, &prec.tolerance())?;
            let mut rows = Vec::new();
            for (k, dev) in cmp.deviations.iter().enumerate() {
                for (trace, src) in [(&rec, "recursion"), (&hankel, "hankel")] {
                    rows.push(TraceRow {
                        quantity: quantity.to_string(),
                        n: k,
                        t: fmt(&t),
                        value: fmt(&trace.values[k]),
                        source: src.to_string(),
                        residual: fmt(dev),
                    });
                }
            }
            let violations = match cmp.divergence_index {
                Some(k) => vec![format!(
                    "{quantity} recursion leaves tolerance at n={k} (deviation 2^{:.1})",
                    log2_abs(&cmp.deviations[k])
                )],
                None => none(),
            };
            Ok(Outcome { rows: Rows::Trace(rows), violations })
        }
        Command::Integrate { n, t0, t1, tol } => {
            let (t0, t1) = (prec.parse(t0)?, prec.parse(t1)?);
            let tol = prec.parse(tol)?;
            let init = painleve::initial_state(*n, &t0, prec)?;
            let ctl = StepControl::new(tol.clone());
            let out = painleve::integrate_p3(*n, &t0, &t1, &init, prec, &ctl)?;
            let (reference, _) = painleve::big_r_with_derivative(*n, &t1, prec)?;
            let dev = mismatch(&out.state.y, &reference);
            let violations = if out.log.final_error_estimate > tol.to_f64() * 1e3 {
                vec![format!("error estimate {:e} exceeds the step tolerance", out.log.final_error_estimate)]
            } else {
                none()
            };
            let row = IntegrateRow {
                log: out.log,
                big_r_n: fmt(&out.state.y),
                d_big_r_n: fmt(&out.state.dy),
                reference: fmt(&reference),
                deviation: fmt(&dev),
            };
            Ok(Outcome { rows: Rows::Integrate(vec![row]), violations })
        }
        Command::Scale { quantity, s, n_list } => {
            let mut ns = n_list.clone();
            ns.sort_unstable();
            ns.dedup();
            let ss: Vec<Float> = s.iter().map(|x| prec.parse(x)).collect::<Result<_>>()?;
            let jobs: Vec<(usize, usize)> = (0..ss.len()).flat_map(|i| ns.iter().map(move |&n| (i, n))).collect();
            let samples = jobs
                .par_iter()
                .map(|&(i, n)| scaling::scaled_measurement(*quantity, n, &ss[i], prec))
                .collect::<Result<Vec<_>>>()?;
            let refs = ss
                .iter()
                .map(|x| scaling::series_reference(*quantity, x))
                .collect::<Result<Vec<_>>>()?;
            let rows = jobs
                .iter()
                .zip(&samples)
                .map(|(&(i, _), x)| {
                    let (regime, v) = &refs[i];
                    let dev = Float::with_val(prec.work_bits, x.comparable() - &v.value).abs();
                    ScalingRow {
                        quantity: quantity.to_string(),
                        regime: regime.to_string(),
                        n: x.n,
                        s: fmt(&x.s),
                        t: fmt(&x.t),
                        sample: fmt(&x.value),
                        series: fmt(&v.value),
                        next_term_bound: fmt(&v.next_term_bound),
                        deviation: fmt(&dev),
                    }
                })
                .collect();
            Ok(Outcome { rows: Rows::Scaling(rows), violations: none() })
        }
        Command::Series { which, regime, alpha, s, truncation, coefficients } => {
            let alpha_q = match alpha {
                Some(a) => Some(
                    a.parse::<Rational>()
                        .map_err(|e| Error::domain(format!("alpha {a:?}: {e}")))?,
                ),
                None => None,
            };
            let ser = SeriesExpansion::named(*which, *regime, alpha_q.as_ref())?;
            let alpha_s = alpha_q.map(|a| a.to_string()).unwrap_or_default();
            if *coefficients {
                let mut rows: Vec<CoefficientRow> = ser
                    .terms
                    .iter()
                    .map(|t| CoefficientRow {
                        name: which.to_string(),
                        regime: regime.to_string(),
                        alpha: alpha_s.clone(),
                        kind: "term".into(),
                        exponent: t.exponent.to_string(),
                        coefficient: t.coefficient.to_string(),
                    })
                    .collect();
                if let Some(l) = &ser.log_coefficient {
                    rows.push(CoefficientRow {
                        name: which.to_string(),
                        regime: regime.to_string(),
                        alpha: alpha_s.clone(),
                        kind: "log".into(),
                        exponent: "0".into(),
                        coefficient: l.to_string(),
                    });
                }
                if let Some(c) = &ser.constant {
                    rows.push(CoefficientRow {
                        name: which.to_string(),
                        regime: regime.to_string(),
                        alpha: alpha_s.clone(),
                        kind: "constant".into(),
                        exponent: "0".into(),
                        coefficient: fmt(&c.value(prec.work_bits)?),
                    });
                }
                return Ok(Outcome { rows: Rows::Coefficients(rows), violations: none() });
            }
            if s.is_empty() {
                return Err(Error::domain("series evaluation needs --s"));
            }
            let trunc = match truncation.as_str() {
                "auto" => Truncation::Auto,
                k => Truncation::Terms(
                    k.parse()
                        .map_err(|_| Error::domain(format!("truncation {k:?} is neither auto nor a count")))?,
                ),
            };
            let rows = s
                .iter()
                .map(|x| {
                    let sv = prec.parse(x)?;
                    let v = series::eval_series(&ser, &sv, trunc)?;
                    Ok(SeriesRow {
                        name: which.to_string(),
                        regime: regime.to_string(),
                        alpha: alpha_s.clone(),
                        s: fmt(&sv),
                        value: fmt(&v.value),
                        next_term_bound: fmt(&v.next_term_bound),
                        terms_used: v.terms_used,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(Outcome { rows: Rows::Series(rows), violations: none() })
        }
        Command::DumpMoments { family, alpha, t, k_min, k_max } => {
            let t = prec.parse(t)?;
            let spec = match family {
                Family::Gaussian => WeightSpec::gaussian(t)?,
                Family::Laguerre => WeightSpec::laguerre(t, *alpha)?,
            };
            let table = build_moment_table(&spec, *k_min, *k_max, prec)?;
            Ok(Outcome { rows: Rows::Moments(table.to_json(prec)), violations: none() })
        }
    }
}

fn verify_at(what: VerifyWhat, n_max: usize, t: &Float, prec: &PrecisionConfig) -> Result<ResidualReport> {
    let mut rep = ResidualReport::new();
    let needs_aux = what != VerifyWhat::Laguerre;
    if needs_aux {
        let (rec, aux) = compute_at(t, n_max.max(3), prec)?;
        if matches!(what, VerifyWhat::Ladder | VerifyWhat::All) {
            rep.extend(ladder::check_s_identities(&aux, &rec, prec)?);
            let z = ladder::default_z_samples(prec.work_bits);
            rep.extend(ladder::check_ladder_relations(&rec, &aux, &z, prec)?);
        }
        if matches!(what, VerifyWhat::Difference | VerifyWhat::All) {
            rep.extend(difference::check_r_difference(&aux, prec)?);
            rep.extend(difference::check_big_r_difference(&aux, prec)?);
            rep.extend(difference::check_sigma_difference(&aux, prec)?);
        }
        if matches!(what, VerifyWhat::Ode | VerifyWhat::All) {
            rep.extend(painleve::riccati_residuals(&aux, prec));
            rep.extend(painleve::p3_residual(&aux, prec));
            rep.extend(painleve::sigma_ode_residual(&aux, prec));
        }
    }
    if matches!(what, VerifyWhat::Laguerre | VerifyWhat::All) {
        rep.extend(scaling::laguerre_correspondence_check(t, n_max, prec)?);
        for alpha in [-0.5, 0.5] {
            let name = if alpha < 0.0 { "H equation alpha=-1/2" } else { "H equation alpha=1/2" };
            for n in 0..=n_max {
                let r = scaling::h_equation_residual(n, alpha, std::slice::from_ref(t), prec)?;
                rep.push(name, n, t, r[0].clone());
            }
        }
    }
    rep.sort();
    Ok(rep)
}

/// Serializes `rows` in the requested format.
pub fn write_rows<W: Write>(rows: &Rows, format: Format, out: W) -> Result<()> {
    fn emit<T: Serialize, W: Write>(rows: &[T], format: Format, out: W) -> Result<()> {
        match format {
            Format::Csv => {
                let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
                for r in rows {
                    w.serialize(r)?;
                }
                w.flush()?;
            }
            Format::Json => {
                let mut out = out;
                serde_json::to_writer_pretty(&mut out, rows)?;
                out.write_all(b"\n")?;
            }
        }
        Ok(())
    }
    match rows {
        Rows::Recurrence(r) => emit(r, format, out),
        Rows::Aux(r) => emit(r, format, out),
        Rows::Value(r) => emit(r, format, out),
        Rows::Residual(r) => emit(r, format, out),
        Rows::Trace(r) => emit(r, format, out),
        Rows::Integrate(r) => emit(r, format, out),
        Rows::Scaling(r) => emit(r, format, out),
        Rows::Series(r) => emit(r, format, out),
        Rows::Coefficients(r) => emit(r, format, out),
        Rows::Moments(m) => {
            let mut out = out;
            serde_json::to_writer_pretty(&mut out, m)?;
            out.write_all(b"\n")?;
            Ok(())
        }
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Domain(_) | Error::InvalidPrecision(_) | Error::MomentRange { .. } => EXIT_USAGE,
        Error::PrecisionFailure { .. } => EXIT_PRECISION,
        Error::Io(_) => EXIT_IO,
        Error::Csv(c) if c.is_io_error() => EXIT_IO,
        _ => EXIT_VIOLATION,
    }
}

/// Executes `cfg`, retrying once at doubled precision after a precision
/// failure, writes the output and returns the exit status.
pub fn run(cfg: RunConfig) -> i32 {
    let sink: Box<dyn Write> = match &cfg.output {
        Some(path) => match File::create(path) {
            Ok(f) => Box::new(BufWriter::new(f)),
            Err(e) => {
                eprintln!("hankel-p3: cannot open {}: {e}", path.display());
                return EXIT_IO;
            }
        },
        None => Box::new(BufWriter::new(io::stdout().lock())),
    };
    let outcome = match execute(&cfg) {
        Err(e) if e.is_precision_failure() => {
            let retry = RunConfig {
                precision: cfg.precision.doubled(),
                ..cfg.clone()
            };
            eprintln!(
                "hankel-p3: {e}; retrying at {} bits",
                retry.precision.work_bits
            );
            execute(&retry)
        }
        other => other,
    };
    let outcome = match outcome {
        Ok(o) => o,
        Err(e) => {
            eprintln!("hankel-p3: {e}");
            return exit_code(&e);
        }
    };
    if let Err(e) = write_rows(&outcome.rows, cfg.format, sink) {
        eprintln!("hankel-p3: {e}");
        return EXIT_IO;
    }
    if outcome.violations.is_empty() {
        EXIT_OK
    } else {
        eprintln!("hankel-p3: {} violation(s)", outcome.violations.len());
        for v in outcome.violations.iter().take(20) {
            eprintln!("  {v}");
        }
        EXIT_VIOLATION
    }
}

/// Entry point used by the binary.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match RunConfig::from_cli(cli) {
        Ok(cfg) => run(cfg),
        Err(e) => {
            eprintln!("hankel-p3: {e}");
            exit_code(&e)
        }
    }
}

/// Convenience for tests and examples: parse and execute without writing.
pub fn execute_args<I, T>(args: I) -> Result<(RunConfig, Outcome)>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| Error::domain(e.to_string()))?;
    let cfg = RunConfig::from_cli(cli)?;
    let out = execute(&cfg)?;
    Ok((cfg, out))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn csv_of(args: &[&str]) -> (String, Vec<String>) {
        let (cfg, out) = execute_args(args.iter().copied()).unwrap();
        let mut buf = Vec::new();
        write_rows(&out.rows, cfg.format, &mut buf).unwrap();
        (String::from_utf8(buf).unwrap(), out.violations)
    }

    #[test]
    fn compute_sigma_two() {
        let (csv, v) = csv_of(&["hankel-p3", "compute", "--n", "2", "--t", "1", "--quantity", "sigma"]);
        assert!(v.is_empty());
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("quantity,n,t,value"));
        let row: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(row[0], "sigma");
        assert_eq!(row[1], "2");
        let value: f64 = row[3].parse().unwrap();
        assert!((value + 10.0 / 3.0).abs() < 1e-15);
        assert!(lines.next().is_none());
    }

    #[test]
    fn verify_ladder_is_clean() {
        let (csv, v) = csv_of(&["hankel-p3", "verify", "--what", "ladder", "--n-max", "8", "--t", "1", "--prec-bits", "256"]);
        assert!(v.is_empty(), "{v:?}");
        assert!(csv.starts_with("equation,n,t,residual\n"));
    }

    #[test]
    fn output_is_deterministic() {
        let args = ["hankel-p3", "verify", "--what", "ode", "--n-max", "6", "--t-start", "0.1", "--t-stop", "10", "--t-count", "4"];
        assert_eq!(csv_of(&args).0, csv_of(&args).0);
    }

    #[test]
    fn series_delta_large() {
        let (csv, _) = csv_of(&["hankel-p3", "series", "--which", "Delta1", "--regime", "large", "--s", "10", "--truncation", "auto"]);
        let row: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
        let value: f64 = row[4].parse().unwrap();
        assert!((value + 10.946).abs() < 1e-3, "{value}");
    }

    #[test]
    fn bad_flags_are_usage_errors() {
        assert_eq!(main_with_args(["hankel-p3", "compute", "--bogus"]), EXIT_USAGE);
        assert_eq!(main_with_args(["hankel-p3", "compute", "--n", "2", "--t=-1"]), EXIT_USAGE);
    }

    #[test]
    fn unwritable_output() {
        let code = main_with_args([
            "hankel-p3", "series", "--which", "C1", "--regime", "small", "--s", "0.1",
            "--output", "/nonexistent-dir/x.csv",
        ]);
        assert_eq!(code, EXIT_IO);
    }
}
