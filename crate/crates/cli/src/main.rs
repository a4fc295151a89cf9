mod output;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::Value;

use sparse_smooth::arith::Effort;
use sparse_smooth::characters::{count_prescribed_products, parse_pattern, scan_short_sums};
use sparse_smooth::construct::{
    construct_balanced, construct_theorem2, construct_theorem3, smoothness_exponent, ConstructOptions,
    ConstructionReport, DEFAULT_MAX_R,
};
use sparse_smooth::cyclotomic::fermat_like_factor;
use sparse_smooth::digits::{binary_entropy, theta0, DEFAULT_THETA0_TOLERANCE};
use sparse_smooth::smoothcount::{psi_exact, psi_exponent_trend, psi_ratio_check, PsiQuery};
use sparse_smooth::survey::{run_battery, survey_theorem1, BatteryConfig};
use sparse_smooth::Error;

use output::{Envelope, Format, Shape};

const EXIT_FAILURE: u8 = 1;
const EXIT_INVALID: u8 = 2;
const EXIT_INCOMPLETE: u8 = 3;

#[derive(Debug, Parser)]
#[command(name = "sparse-smooth", version, about = "Smooth integers with few binary digits")]
struct Cli {
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write to this file instead of standard output.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Seed for sampled checks.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    effort: EffortArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Args, Serialize)]
struct EffortArgs {
    /// Trial-division bound used before rho.
    #[arg(long, global = true, default_value_t = Effort::default().trial_bound)]
    trial_bound: u64,
    /// Iterations per Pollard rho attempt.
    #[arg(long, global = true, default_value_t = Effort::default().rho_iterations)]
    rho_iterations: u64,
    /// Rho attempts (distinct polynomial constants) per composite.
    #[arg(long, global = true, default_value_t = Effort::default().rho_attempts)]
    rho_attempts: u32,
}

impl From<&EffortArgs> for Effort {
    fn from(a: &EffortArgs) -> Self {
        Effort { trial_bound: a.trial_bound, rho_iterations: a.rho_iterations, rho_attempts: a.rho_attempts }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// (2^k + 1)^ℓ with ℓ = ⌊α·ln 2·k⌋.
    ConstructT2(PowerArgs),
    /// (2^k + 1)^ℓ with ℓ = ⌊k^(α/(2-α))⌋.
    ConstructT3(PowerArgs),
    /// (2^k₁ + 1)(2^k₂ - 1) with k₂ = k₁/3.
    ConstructBalanced(BalancedArgs),
    /// Factor 2^k + 1 (odd k) through its cyclotomic pieces.
    FermatFactor(FermatArgs),
    /// Exact Ψ(x, y), the Ψ(cx)/Ψ(x) ratio, or the exponent trend.
    Psi(PsiArgs),
    /// Maximum zero count over odd ⌊n^A⌋-smooth n-bit integers.
    Survey(SurveyArgs),
    /// Short character sums for every character modulo 2^n0.
    CharsScan(ScanArgs),
    /// Counts of smooth products with a prescribed bit pattern.
    CharsCount(CountArgs),
    /// Run the lemma check battery.
    Lemmas(LemmaArgs),
    /// Binary entropy H(γ) or the threshold θ₀(A).
    Entropy(EntropyArgs),
}

#[derive(Debug, Args, Serialize)]
struct CertifyArgs {
    /// Skip factoring 2^k ± 1 (the report is then uncertified).
    #[arg(long)]
    no_certify: bool,
    /// Largest accepted primorial length r.
    #[arg(long, default_value_t = DEFAULT_MAX_R)]
    max_r: usize,
    /// Include N itself (decimal) in the result.
    #[arg(long)]
    emit_value: bool,
}

#[derive(Debug, Args, Serialize)]
struct PowerArgs {
    #[arg(long, allow_negative_numbers = true)]
    alpha: f64,
    #[arg(long)]
    r: usize,
    #[command(flatten)]
    #[serde(flatten)]
    certify: CertifyArgs,
}

#[derive(Debug, Args, Serialize)]
struct BalancedArgs {
    #[arg(long)]
    r: usize,
    #[command(flatten)]
    #[serde(flatten)]
    certify: CertifyArgs,
}

#[derive(Debug, Args, Serialize)]
struct FermatArgs {
    #[arg(long)]
    k: u64,
}

#[derive(Debug, Args, Serialize)]
#[command(group(ArgGroup::new("mode").required(true).args(["exact", "ratio", "trend"])))]
struct PsiArgs {
    #[arg(long)]
    exact: bool,
    #[arg(long)]
    ratio: bool,
    #[arg(long)]
    trend: bool,
    /// Argument x; accepts `2^40` notation. For --trend, a comma-separated list.
    #[arg(long, value_delimiter = ',', value_parser = parse_u64_expr, required = true)]
    x: Vec<u64>,
    /// Smoothness bound (with --exact).
    #[arg(long, value_parser = parse_u64_expr, required_if_eq("exact", "true"))]
    y: Option<u64>,
    /// Ratio factor c (with --ratio).
    #[arg(long, default_value_t = 2.0)]
    c: f64,
    /// Exponent A in y = ⌊(ln x)^A⌋ (with --ratio / --trend).
    #[arg(long = "A", default_value_t = 2.0)]
    a_param: f64,
}

#[derive(Debug, Args, Serialize)]
struct SurveyArgs {
    #[arg(long)]
    n: u32,
    #[arg(long = "A")]
    a_param: f64,
    #[arg(long, allow_negative_numbers = true)]
    theta: f64,
    /// Emit the zero-count histogram (rows in CSV/text).
    #[arg(long)]
    histogram: bool,
}

#[derive(Debug, Args, Serialize)]
struct ScanArgs {
    #[arg(long)]
    n0: u32,
    #[arg(long)]
    m: u32,
    /// Leading pattern as a bit string of length m (default all zeros).
    #[arg(long)]
    sigma: Option<String>,
}

#[derive(Debug, Args, Serialize)]
struct CountArgs {
    #[arg(long)]
    n: u32,
    #[arg(long = "A")]
    a_param: f64,
    #[arg(long)]
    n0: u32,
    #[arg(long)]
    m: u32,
    /// Bit string of length m; may be empty when m = 0.
    #[arg(long, default_value = "")]
    sigma: String,
    /// Number of sampled k for the character-sum identity.
    #[arg(long, default_value_t = 8)]
    samples: usize,
}

#[derive(Debug, Args, Serialize)]
struct LemmaArgs {
    #[arg(long, default_value_t = BatteryConfig::default().height_n_max)]
    height_n_max: u64,
    #[arg(long, default_value_t = BatteryConfig::default().pairs)]
    pairs: usize,
    #[arg(long, default_value_t = BatteryConfig::default().pair_bits)]
    pair_bits: u64,
    #[arg(long, default_value_t = BatteryConfig::default().tail_n.1)]
    tail_n_max: u64,
    #[arg(long, default_value_t = BatteryConfig::default().log_sum_n.1)]
    log_sum_n_max: u64,
    #[arg(long, value_parser = parse_u64_expr, default_value_t = BatteryConfig::default().mertens_x)]
    mertens_x: u64,
    #[arg(long, value_parser = parse_u64_expr, default_value_t = BatteryConfig::default().tau_n_max)]
    tau_n_max: u64,
}

#[derive(Debug, Args, Serialize)]
#[command(group(ArgGroup::new("what").required(true).args(["gamma", "theta0"])))]
struct EntropyArgs {
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long, requires = "a_param")]
    theta0: bool,
    #[arg(long = "A")]
    a_param: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_THETA0_TOLERANCE)]
    tolerance: f64,
}

/// `123`, `1_000_000` or `b^e`.
fn parse_u64_expr(s: &str) -> Result<u64, String> {
    let clean = s.trim().replace('_', "");
    let parse = |t: &str| t.parse::<u64>().map_err(|e| format!("invalid integer {t:?}: {e}"));
    match clean.split_once('^') {
        Some((b, e)) => {
            let exp = u32::try_from(parse(e)?).map_err(|_| format!("exponent too large in {s:?}"))?;
            parse(b)?.checked_pow(exp).ok_or_else(|| format!("{s} overflows 64 bits"))
        }
        None => parse(&clean),
    }
}

struct Run {
    envelope: Envelope,
    incomplete: bool,
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("results serialize to JSON")
}

fn params<T: Serialize>(args: &T, cli: &Cli, uses_effort: bool, uses_seed: bool) -> Value {
    let mut p = to_value(args);
    if let Value::Object(map) = &mut p {
        if uses_effort {
            map.insert("effort".into(), to_value(&cli.effort));
        }
        if uses_seed {
            map.insert("seed".into(), cli.seed.into());
        }
    }
    p
}

fn construction(report: ConstructionReport, certify: &CertifyArgs) -> (Value, bool) {
    let mut v = to_value(&report);
    if let Value::Object(map) = &mut v {
        let exponent = smoothness_exponent(&report).ok();
        map.insert("smoothness_exponent".into(), to_value(&exponent));
        map.insert("within_ceiling".into(), to_value(&report.within_ceiling()));
        if certify.emit_value {
            map.insert("value".into(), report.value.to_str_radix(10).into());
        }
    }
    (v, !report.smoothness_complete)
}

fn options(cli: &Cli, certify: &CertifyArgs) -> ConstructOptions {
    ConstructOptions { effort: Effort::from(&cli.effort), certify: !certify.no_certify, max_r: certify.max_r }
}

fn dispatch(cli: &Cli) -> Result<Run, Error> {
    let effort = Effort::from(&cli.effort);
    let record = |subcommand, params, result| Envelope { subcommand, params, result, shape: Shape::Record };
    let run = |envelope| Run { envelope, incomplete: false };
    Ok(match &cli.command {
        Command::ConstructT2(a) | Command::ConstructT3(a) => {
            let (name, report) = match &cli.command {
                Command::ConstructT2(_) => ("construct-t2", construct_theorem2(a.alpha, a.r, &options(cli, &a.certify))?),
                _ => ("construct-t3", construct_theorem3(a.alpha, a.r, &options(cli, &a.certify))?),
            };
            let (result, incomplete) = construction(report, &a.certify);
            Run { envelope: record(name, params(a, cli, true, false), result), incomplete }
        }
        Command::ConstructBalanced(a) => {
            let (result, incomplete) = construction(construct_balanced(a.r, &options(cli, &a.certify))?, &a.certify);
            Run { envelope: record("construct-balanced", params(a, cli, true, false), result), incomplete }
        }
        Command::FermatFactor(a) => {
            let f = fermat_like_factor(a.k, &effort)?;
            let incomplete = !f.merged.complete;
            Run {
                envelope: Envelope {
                    subcommand: "fermat-factor",
                    params: params(a, cli, true, false),
                    result: to_value(&f),
                    shape: Shape::Rows { path: &["merged", "factors"], index_column: "index", value_column: "value" },
                },
                incomplete,
            }
        }
        Command::Psi(a) => {
            let p = params(a, cli, false, false);
            if a.exact {
                let [x] = a.x[..] else {
                    return Err(Error::InvalidArgument("--exact takes a single x".into()));
                };
                let y = a.y.ok_or_else(|| Error::InvalidArgument("--exact needs --y".into()))?;
                run(record("psi", p, to_value(&PsiQuery { x, y, count: psi_exact(x, y)? })))
            } else if a.ratio {
                let [x] = a.x[..] else {
                    return Err(Error::InvalidArgument("--ratio takes a single x".into()));
                };
                run(record("psi", p, to_value(&psi_ratio_check(x, a.c, a.a_param)?)))
            } else {
                let rows = psi_exponent_trend(&a.x, a.a_param)?;
                let mut result = to_value(&rows);
                if let Value::Array(items) = &mut result {
                    for item in items.iter_mut() {
                        item["target"] = (1.0 - 1.0 / a.a_param).into();
                    }
                }
                run(Envelope { subcommand: "psi", params: p, result, shape: Shape::rows(&[]) })
            }
        }
        Command::Survey(a) => {
            let s = survey_theorem1(a.n, a.a_param, a.theta, a.histogram)?;
            let shape = if a.histogram {
                Shape::Rows { path: &["histogram"], index_column: "zeros", value_column: "count" }
            } else {
                Shape::Record
            };
            run(Envelope { subcommand: "survey", params: params(a, cli, false, false), result: to_value(&s), shape })
        }
        Command::CharsScan(a) => {
            let s = match &a.sigma {
                Some(sigma) if sigma.len() as u32 != a.m => {
                    return Err(Error::InvalidArgument(format!("--sigma must have length m = {}", a.m)));
                }
                Some(sigma) => parse_pattern(sigma)?,
                None => 0,
            };
            let scan = scan_short_sums(a.n0, a.m, s)?;
            run(Envelope {
                subcommand: "chars-scan",
                params: params(a, cli, false, false),
                result: to_value(&scan),
                shape: Shape::rows(&["rows"]),
            })
        }
        Command::CharsCount(a) => {
            let c = count_prescribed_products(a.n, a.a_param, a.n0, a.m, &a.sigma, a.samples, cli.seed)?;
            let mut result = to_value(&c);
            result["max_identity_error"] = c.max_identity_error().into();
            run(Envelope {
                subcommand: "chars-count",
                params: params(a, cli, false, true),
                result,
                shape: Shape::Rows { path: &["counts"], index_column: "k", value_column: "count" },
            })
        }
        Command::Lemmas(a) => {
            let config = BatteryConfig {
                height_n_max: a.height_n_max,
                pairs: a.pairs,
                pair_bits: a.pair_bits,
                tail_n: (BatteryConfig::default().tail_n.0, a.tail_n_max),
                log_sum_n: (BatteryConfig::default().log_sum_n.0, a.log_sum_n_max),
                mertens_x: a.mertens_x,
                tau_n_max: a.tau_n_max,
                seed: cli.seed,
                ..BatteryConfig::default()
            };
            let checks = run_battery(&config)?;
            run(Envelope {
                subcommand: "lemmas",
                params: params(a, cli, false, true),
                result: to_value(&checks),
                shape: Shape::rows(&[]),
            })
        }
        Command::Entropy(a) => {
            let p = params(a, cli, false, false);
            let result = match (a.gamma, a.a_param) {
                (Some(g), _) => serde_json::json!({ "gamma": g, "entropy": binary_entropy(g)? }),
                (None, Some(big_a)) => {
                    let t = theta0(big_a, a.tolerance)?;
                    serde_json::json!({
                        "a_param": t.a_param,
                        "theta0": t.theta0,
                        "target": t.target(),
                        "tolerance": t.tolerance,
                    })
                }
                (None, None) => return Err(Error::InvalidArgument("--theta0 needs --A".into())),
            };
            run(record("entropy", p, result))
        }
    })
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::InvalidArgument(_) | Error::GuardExceeded { .. } => EXIT_INVALID,
        Error::Incomplete(_) => EXIT_INCOMPLETE,
        _ => EXIT_FAILURE,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match dispatch(&cli) {
        Ok(outcome) => outcome,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(exit_code(&e));
        }
    };
    let written = match &cli.output {
        Some(path) => File::create(path).and_then(|f| {
            let mut w = BufWriter::new(f);
            outcome.envelope.render(cli.format, &mut w)?;
            w.flush()
        }),
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            outcome.envelope.render(cli.format, &mut lock).and_then(|_| lock.flush())
        }
    };
    if let Err(e) = written {
        if e.kind() == io::ErrorKind::BrokenPipe {
            return ExitCode::SUCCESS;
        }
        eprintln!("error: cannot write output: {e}");
        return ExitCode::from(EXIT_FAILURE);
    }
    if outcome.incomplete {
        eprintln!("warning: smoothness certificate is incomplete");
        return ExitCode::from(EXIT_INCOMPLETE);
    }
    ExitCode::SUCCESS
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn integer_expressions() {
        assert_eq!(parse_u64_expr("2^40"), Ok(1 << 40));
        assert_eq!(parse_u64_expr("1_000_000"), Ok(1_000_000));
        assert_eq!(parse_u64_expr("100"), Ok(100));
        assert!(parse_u64_expr("2^64").is_err());
        assert!(parse_u64_expr("x").is_err());
    }
}
