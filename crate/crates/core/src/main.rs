use std::fs;
use std::io::Write;
use std::ops::RangeInclusive;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use cxorder::counterexample::{analyze_counterexample, build_counterexample, CounterexampleReport};
use cxorder::cx_order::{cx_compare_oracle, levin_steckin_check, ohlin_check, szostok_decision};
use cxorder::rasa::{psi_sign_pattern, verify_hoeffding, FamilySelection};
use cxorder::rational::{format_rational, parse_rational, rat, serde_str, to_decimal, Rational};
use cxorder::sweep::{rows_to_csv, run_sweep, GridRow, SweepConfig};
use cxorder::{DiscreteDistribution, Error};

const EXIT_OK: u8 = 0;
const EXIT_FAILED: u8 = 1;
const EXIT_INVALID: u8 = 2;
const EXIT_PRECONDITION: u8 = 3;

/// Default directory for reports when `--out` is not given.
const OUT_DIR_ENV: &str = "CXORDER_OUT_DIR";

#[derive(Parser)]
#[command(name = "cxorder", version, about = "Exact convex-order verification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Output {
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Shorthand for `--format json`.
    #[arg(long, conflicts_with = "format")]
    json: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Method {
    Oracle,
    Ohlin,
    Szostok,
    LevinSteckin,
}

#[derive(Subcommand)]
enum Command {
    /// Check the Bernstein-form inequality and its three orderings on a grid.
    VerifyRasa {
        /// Degree range, `a..b` (inclusive) or a single value.
        #[arg(long, default_value = "1..6")]
        n: String,
        /// Number of variables, `a..b` or a single value.
        #[arg(long, default_value = "2")]
        m: String,
        /// Largest parameter denominator.
        #[arg(long, default_value_t = 10)]
        denom: usize,
        /// Comma list from angles, monomials, affine, random; or `all`.
        #[arg(long, default_value = "all")]
        family: String,
        /// Seeded random piecewise-linear functions per cell.
        #[arg(long, default_value_t = 16)]
        random_fns: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Fill the wall_time_us column (makes reports nondeterministic).
        #[arg(long)]
        timing: bool,
        #[command(flatten)]
        output: Output,
    },
    /// Decide `A <=_cx B` for two distribution files.
    CxCompare {
        file_a: PathBuf,
        file_b: PathBuf,
        #[arg(long, value_enum, default_value_t = Method::Oracle)]
        method: Method,
        /// Interval start for szostok / levin-steckin (default: smallest support point).
        #[arg(long)]
        a: Option<String>,
        /// Interval end (default: largest support point).
        #[arg(long)]
        b: Option<String>,
        #[command(flatten)]
        output: Output,
    },
    /// Reproduce the non-binomial counterexample.
    Counterexample {
        #[command(flatten)]
        output: Output,
    },
    /// Poisson-binomial versus binomial comparison.
    Hoeffding {
        /// Bernoulli parameters as `p/q`.
        ps: Vec<String>,
        /// Number of seeded random instances instead of explicit parameters.
        #[arg(long)]
        random: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 8)]
        n_max: usize,
        #[arg(long, default_value_t = 20)]
        denom_max: i64,
        #[command(flatten)]
        output: Output,
    },
    /// Signs of psi_k for parameters x_1..x_m.
    PsiPattern {
        #[arg(long)]
        n: usize,
        xs: Vec<String>,
        #[command(flatten)]
        output: Output,
    },
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn invalid(e: impl std::fmt::Display) -> Self {
        Self {
            code: EXIT_INVALID,
            message: e.to_string(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Precondition(_) | Error::Degenerate(_) => EXIT_PRECONDITION,
            _ => EXIT_INVALID,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(command: Command) -> Result<u8, Failure> {
    match command {
        Command::VerifyRasa {
            n,
            m,
            denom,
            family,
            random_fns,
            seed,
            jobs,
            timing,
            output,
        } => {
            let config = SweepConfig {
                n: parse_range(&n)?,
                m: parse_range(&m)?,
                denom,
                family: parse_family(&family, random_fns)?,
                seed,
                jobs,
                timing,
            };
            config.validate().map_err(Failure::invalid)?;
            verify_rasa(&config, &output)
        }
        Command::CxCompare {
            file_a,
            file_b,
            method,
            a,
            b,
            output,
        } => {
            let lhs = read_distribution(&file_a)?;
            let rhs = read_distribution(&file_b)?;
            let a = a
                .map(|t| parse_rational(&t))
                .transpose()
                .map_err(Failure::invalid)?;
            let b = b
                .map(|t| parse_rational(&t))
                .transpose()
                .map_err(Failure::invalid)?;
            cx_compare(&lhs, &rhs, method, a, b, &output)
        }
        Command::Counterexample { output } => counterexample(&output),
        Command::Hoeffding {
            ps,
            random,
            seed,
            n_max,
            denom_max,
            output,
        } => hoeffding(ps, random, seed, n_max, denom_max, &output),
        Command::PsiPattern { n, xs, output } => {
            let xs: Vec<Rational> = xs
                .iter()
                .map(|t| parse_rational(t))
                .collect::<Result<_, _>>()
                .map_err(Failure::invalid)?;
            let pattern = psi_sign_pattern(n, &xs).map_err(|e| match e {
                Error::Degenerate(_) => Failure::from(e),
                other => Failure::invalid(other),
            })?;
            let body = match format(&output) {
                Format::Json => to_json(&pattern),
                Format::Csv => {
                    let rows = pattern.values.iter().zip(&pattern.pattern).enumerate().map(
                        |(k, (v, s))| {
                            vec![
                                k.to_string(),
                                format_rational(v),
                                s.symbol().to_string(),
                                to_decimal(v, 12),
                            ]
                        },
                    );
                    csv_table(&["k", "psi", "sign", "approx"], rows)
                }
            };
            emit(&output, "psi-pattern", &body)?;
            // two sign changes, positive at both ends
            let ok = pattern.change_count == 2
                && pattern.pattern.first().map(|s| s.symbol()) == Some('+')
                && pattern.pattern.last().map(|s| s.symbol()) == Some('+');
            Ok(if ok { EXIT_OK } else { EXIT_FAILED })
        }
    }
}

fn format(output: &Output) -> Format {
    if output.json {
        Format::Json
    } else {
        output.format
    }
}

fn extension(output: &Output) -> &'static str {
    match format(output) {
        Format::Json => "json",
        Format::Csv => "csv",
    }
}

/// Writes to `--out`, else into `$CXORDER_OUT_DIR/<command>.<ext>`, else stdout.
fn emit(output: &Output, command: &str, body: &str) -> Result<(), Failure> {
    let path = output.out.clone().or_else(|| {
        std::env::var_os(OUT_DIR_ENV)
            .map(|dir| PathBuf::from(dir).join(format!("{command}.{}", extension(output))))
    });
    match path {
        Some(p) => {
            fs::write(&p, body).map_err(|e| Failure::invalid(format!("{}: {e}", p.display())))
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(body.as_bytes())
                .map_err(|e| Failure::invalid(format!("stdout: {e}")))
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}

fn csv_table<I>(header: &[&str], rows: I) -> String
where
    I: IntoIterator<Item = Vec<String>>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
}

fn parse_range(text: &str) -> Result<RangeInclusive<usize>, Failure> {
    let bad = || Failure::invalid(format!("bad range {text:?}, expected `a..b` or `a`"));
    let (lo, hi) = match text.split_once("..") {
        Some((lo, hi)) => (lo, hi.trim_start_matches('=')),
        None => (text, text),
    };
    let lo: usize = lo.trim().parse().map_err(|_| bad())?;
    let hi: usize = hi.trim().parse().map_err(|_| bad())?;
    if lo > hi {
        return Err(bad());
    }
    Ok(lo..=hi)
}

fn parse_family(text: &str, random_fns: usize) -> Result<FamilySelection, Failure> {
    if text == "all" {
        return Ok(FamilySelection {
            random_piecewise: random_fns,
            ..FamilySelection::default()
        });
    }
    let mut sel = FamilySelection {
        angles: false,
        monomials: false,
        affine: false,
        random_piecewise: 0,
    };
    for part in text.split(',').map(str::trim) {
        match part {
            "angles" => sel.angles = true,
            "monomials" => sel.monomials = true,
            "affine" => sel.affine = true,
            "random" => sel.random_piecewise = random_fns,
            other => {
                return Err(Failure::invalid(format!(
                    "unknown test-function family {other:?}"
                )))
            }
        }
    }
    Ok(sel)
}

fn read_distribution(path: &PathBuf) -> Result<DiscreteDistribution, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::invalid(format!("{}: {e}", path.display())))?;
    DiscreteDistribution::parse(&text)
        .map_err(|e| Failure::invalid(format!("{}: {e}", path.display())))
}

#[derive(Serialize)]
struct SweepReport<'a> {
    rows: &'a [GridRow],
    points: usize,
    failures: usize,
}

fn verify_rasa(config: &SweepConfig, output: &Output) -> Result<u8, Failure> {
    let started = std::time::Instant::now();
    let rows = run_sweep(config)?;
    let failures = rows.iter().filter(|r| !r.passed()).count();
    let body = match format(output) {
        Format::Json => to_json(&SweepReport {
            rows: &rows,
            points: rows.len(),
            failures,
        }),
        Format::Csv => rows_to_csv(&rows)?,
    };
    emit(output, "verify-rasa", &body)?;
    eprintln!(
        "verify-rasa: {} points, {} failures, {:.2}s",
        rows.len(),
        failures,
        started.elapsed().as_secs_f64()
    );
    for r in rows.iter().filter(|r| !r.passed()).take(10) {
        let x: Vec<String> = r.x.iter().map(format_rational).collect();
        eprintln!(
            "  failed: n={} x=({}) min_form={}",
            r.n,
            x.join(", "),
            r.min_form
        );
    }
    Ok(if failures == 0 { EXIT_OK } else { EXIT_FAILED })
}

fn cx_compare(
    lhs: &DiscreteDistribution,
    rhs: &DiscreteDistribution,
    method: Method,
    a: Option<Rational>,
    b: Option<Rational>,
    output: &Output,
) -> Result<u8, Failure> {
    let a = a.unwrap_or_else(|| lhs.min_support().min(rhs.min_support()).clone());
    let b = b.unwrap_or_else(|| lhs.max_support().max(rhs.max_support()).clone());
    let (body, holds) = match method {
        Method::Oracle => {
            let v = cx_compare_oracle(lhs, rhs);
            (to_json(&v), v.holds)
        }
        Method::Ohlin => {
            if lhs.mean() != rhs.mean() {
                return Err(Failure {
                    code: EXIT_PRECONDITION,
                    message: format!("means differ: {} vs {}", lhs.mean(), rhs.mean()),
                });
            }
            let r = ohlin_check(lhs, rhs);
            (to_json(&r), r.applies)
        }
        Method::Szostok => {
            let r = szostok_decision(lhs.step_cdf(), rhs.step_cdf(), &a, &b)?;
            (to_json(&r), r.decision)
        }
        Method::LevinSteckin => {
            let r = if a == b {
                // both are Dirac masses at the same point
                return emit_identical(output, lhs == rhs);
            } else {
                levin_steckin_check(lhs.step_cdf(), rhs.step_cdf(), &a, &b)?
            };
            (to_json(&r), r.holds())
        }
    };
    let body = match format(output) {
        Format::Json => body,
        Format::Csv => {
            let value: serde_json::Value = serde_json::from_str(&body).expect("round trip");
            json_object_to_csv(&value)
        }
    };
    emit(output, "cx-compare", &body)?;
    Ok(if holds { EXIT_OK } else { EXIT_FAILED })
}

fn emit_identical(output: &Output, identical: bool) -> Result<u8, Failure> {
    #[derive(Serialize)]
    struct Degenerate {
        identical: bool,
    }
    emit(output, "cx-compare", &to_json(&Degenerate { identical }))?;
    Ok(if identical { EXIT_OK } else { EXIT_FAILED })
}

/// Flattens a JSON object to `field,value` rows; arrays become comma lists.
fn json_object_to_csv(value: &serde_json::Value) -> String {
    fn render(v: &serde_json::Value) -> String {
        match v {
            serde_json::Value::String(s) => s.clone(),
            serde_json::Value::Null => String::new(),
            serde_json::Value::Array(items) => {
                items.iter().map(render).collect::<Vec<_>>().join(",")
            }
            other => other.to_string(),
        }
    }
    let rows = value
        .as_object()
        .map(|obj| {
            obj.iter()
                .map(|(k, v)| vec![k.clone(), render(v)])
                .collect::<Vec<_>>()
        })
        .unwrap_or_default();
    csv_table(&["field", "value"], rows)
}

fn counterexample(output: &Output) -> Result<u8, Failure> {
    let report = match analyze_counterexample() {
        Ok(r) => r,
        Err(e) => {
            let (lhs, rhs) = build_counterexample();
            eprintln!("error: {e}\nlhs = {lhs}\nrhs = {rhs}");
            return Ok(EXIT_FAILED);
        }
    };
    let body = match format(output) {
        Format::Json => to_json(&report),
        Format::Csv => counterexample_csv(&report),
    };
    emit(output, "counterexample", &body)?;
    Ok(EXIT_OK)
}

fn counterexample_csv(r: &CounterexampleReport) -> String {
    let list = |v: &[Rational]| v.iter().map(format_rational).collect::<Vec<_>>().join(",");
    let atoms = |d: &DiscreteDistribution| {
        d.atoms()
            .iter()
            .map(|(s, m)| format!("{}:{}", format_rational(s), format_rational(m)))
            .collect::<Vec<_>>()
            .join(";")
    };
    let rows = vec![
        vec!["lhs".into(), atoms(&r.lhs)],
        vec!["rhs".into(), atoms(&r.rhs)],
        vec!["sign_change_points".into(), list(&r.sign_change_points)],
        vec!["areas".into(), list(&r.areas)],
        vec!["szostok_decision".into(), r.szostok_decision.to_string()],
        vec!["levin_steckin".into(), r.levin_steckin.holds().to_string()],
        vec!["holds".into(), r.oracle_verdict.holds.to_string()],
        vec![
            "witness".into(),
            r.oracle_verdict
                .witness
                .as_ref()
                .map(format_rational)
                .unwrap_or_default(),
        ],
        vec!["witness_function".into(), r.witness_function.to_string()],
        vec![
            "witness_lhs_expectation".into(),
            format_rational(&r.witness_lhs_expectation),
        ],
        vec![
            "witness_rhs_expectation".into(),
            format_rational(&r.witness_rhs_expectation),
        ],
    ];
    csv_table(&["field", "value"], rows)
}

#[derive(Serialize)]
struct HoeffdingRow {
    #[serde(with = "serde_str::vec")]
    ps: Vec<Rational>,
    holds: bool,
    identical: bool,
    #[serde(with = "serde_str::option")]
    witness: Option<Rational>,
}

#[derive(Serialize)]
struct HoeffdingReport {
    rows: Vec<HoeffdingRow>,
    failures: usize,
}

fn random_instance(rng: &mut ChaCha8Rng, n_max: usize, denom_max: i64) -> Vec<Rational> {
    let n = rng.gen_range(1..=n_max);
    (0..n)
        .map(|_| {
            let q = rng.gen_range(2..=denom_max);
            rat(rng.gen_range(1..q), q)
        })
        .collect()
}

fn hoeffding(
    ps: Vec<String>,
    random: Option<usize>,
    seed: u64,
    n_max: usize,
    denom_max: i64,
    output: &Output,
) -> Result<u8, Failure> {
    let instances: Vec<Vec<Rational>> = match random {
        Some(count) => {
            if n_max == 0 || denom_max < 2 {
                return Err(Failure::invalid(
                    "--n-max must be >= 1 and --denom-max >= 2",
                ));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..count)
                .map(|_| random_instance(&mut rng, n_max, denom_max))
                .collect()
        }
        None => {
            if ps.is_empty() {
                return Err(Failure::invalid("give probabilities or --random COUNT"));
            }
            vec![ps
                .iter()
                .map(|t| parse_rational(t))
                .collect::<Result<_, _>>()
                .map_err(Failure::invalid)?]
        }
    };
    let mut rows = Vec::with_capacity(instances.len());
    for ps in instances {
        let v = verify_hoeffding(&ps).map_err(Failure::invalid)?;
        let identical = ps.iter().all(|p| p == &ps[0]);
        rows.push(HoeffdingRow {
            ps,
            holds: v.holds,
            identical,
            witness: v.witness,
        });
    }
    let failures = rows.iter().filter(|r| !r.holds).count();
    let body = match format(output) {
        Format::Json => to_json(&HoeffdingReport { rows, failures }),
        Format::Csv => csv_table(
            &["ps", "holds", "identical", "witness"],
            rows.iter().map(|r| {
                vec![
                    r.ps.iter()
                        .map(format_rational)
                        .collect::<Vec<_>>()
                        .join(";"),
                    r.holds.to_string(),
                    r.identical.to_string(),
                    r.witness.as_ref().map(format_rational).unwrap_or_default(),
                ]
            }),
        ),
    };
    emit(output, "hoeffding", &body)?;
    Ok(if failures == 0 { EXIT_OK } else { EXIT_FAILED })
}
