use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use stieltjes::corpus::Corpus;
use stieltjes::counterexamples::{
    build_oscillator, necessity_witness, oscillator_report, series_identity_check, write_figures, Approach,
    WitnessVerdict,
};
use stieltjes::density::{approximate_in_l1g_with, ApproxOptions, Boundary};
use stieltjes::derivative::{g_derivative, phi};
use stieltjes::derivator::{Class, Derivator, Side};
use stieltjes::error::Error;
use stieltjes::ftc::{check_barrow, check_ftc_ae, check_ftc_everywhere, FtcReport};
use stieltjes::function::{Evaluable, PiecewiseFunction};
use stieltjes::integral::{integrate, primitive, rs_extrapolated};
use stieltjes::interval::IntervalSet;
use stieltjes::measure::{hahn_decomposition, measure_with_bound, MeasureKind};
use stieltjes::spec::{parse_derivator, parse_function};

#[derive(Parser)]
#[command(name = "stieltjes", version, about = "Stieltjes calculus for derivators of bounded variation")]
struct Cli {
    /// Seed for every randomized sample.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write the report here instead of stdout.
    #[arg(short, long, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Kind {
    Signed,
    Positive,
    Negative,
    Total,
    All,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Suite {
    Ae,
    Barrow,
    Everywhere,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BoundaryArg {
    Free,
    Clamped,
    JumpStart,
}

#[derive(Subcommand)]
enum Command {
    /// Jump points, constancy components, endpoint classes and Hahn sets.
    Analyze { derivator: PathBuf },
    /// Lebesgue–Stieltjes measure of an interval set.
    Measure {
        derivator: PathBuf,
        /// Interval set such as "[0,1)" or "(1,2]∪{3}".
        #[arg(long)]
        set: String,
        #[arg(long, value_enum, default_value_t = Kind::All)]
        kind: Kind,
    },
    /// Integral of a function over an interval set.
    Integrate {
        derivator: PathBuf,
        function: PathBuf,
        /// Defaults to the whole domain.
        #[arg(long)]
        set: Option<String>,
        #[arg(long, value_enum, default_value_t = Kind::Signed)]
        kind: Kind,
        /// Also report the refinement-sum oracle at this depth, for `[x,y)` sets.
        #[arg(long)]
        oracle_depth: Option<u32>,
    },
    /// Stieltjes derivative of a function at a point.
    Derive {
        derivator: PathBuf,
        function: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        at: f64,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
    /// The liminf ratio φ at a point.
    Phi {
        derivator: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        at: f64,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
    /// Fundamental-theorem checks on one pair or on a seeded corpus.
    FtcCheck {
        #[arg(long, value_enum)]
        suite: Suite,
        /// Required unless --corpus is given.
        derivator: Option<PathBuf>,
        function: Option<PathBuf>,
        /// Run on this many seeded random pairs instead.
        #[arg(long)]
        corpus: Option<usize>,
        #[arg(long, default_value_t = 64)]
        samples: usize,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// g-continuous approximation in L¹_g (nondecreasing derivators).
    Approximate {
        derivator: PathBuf,
        function: PathBuf,
        #[arg(long)]
        eps: f64,
        #[arg(long, value_enum, default_value_t = BoundaryArg::Free)]
        boundary: BoundaryArg,
        #[arg(long, allow_hyphen_values = true)]
        alpha: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        beta: Option<f64>,
        /// Declared range "c,d" of the target.
        #[arg(long, allow_hyphen_values = true)]
        range: Option<String>,
    },
    /// The oscillating derivator and its triangular-wave integrand.
    Example2 {
        /// Partial sum of the series with limit 1/6.
        #[arg(long)]
        check_series: bool,
        #[arg(long, default_value_t = 1000)]
        n: u64,
        /// Growth of F/g along x_{2n}.
        #[arg(long)]
        report: bool,
        /// Build a g-continuous witness integrand at 0 and report its quotients.
        #[arg(long)]
        witness: bool,
        /// Points of the witness sequence.
        #[arg(long, default_value_t = 2000)]
        count: u64,
        /// Oscillator truncation depth N.
        #[arg(long, default_value_t = 20000)]
        depth: u64,
        /// Write figure1.csv, figure2.csv, figure3.csv here.
        #[arg(long)]
        figures: Option<PathBuf>,
        #[arg(long, default_value_t = 2001)]
        points: usize,
    },
}

/// Exit 1: a check ran and failed. Exit 2: the input could not be used.
enum Failure {
    Check(String),
    Input(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Input(e)
    }
}

fn classify(e: Error) -> Failure {
    match e {
        Error::PhiHypothesisViolated { .. }
        | Error::GContinuityViolated { .. }
        | Error::NotDifferentiableAlmostEverywhere { .. }
        | Error::BudgetExceeded { .. }
        | Error::PhiNotZero { .. }
        | Error::SequenceUnsuitable(_)
        | Error::DegenerateQuotient { .. } => Failure::Check(e.to_string()),
        _ => Failure::Input(e.into()),
    }
}

trait OrFailure<T> {
    fn or_fail(self) -> Result<T, Failure>;
}

impl<T> OrFailure<T> for Result<T, Error> {
    fn or_fail(self) -> Result<T, Failure> {
        self.map_err(classify)
    }
}

struct Report {
    json: Value,
    text: String,
    pass: bool,
}

fn read(path: &Path) -> anyhow::Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn load_derivator(path: &Path) -> Result<Derivator, Failure> {
    let s = read(path)?;
    parse_derivator(&s).map_err(|e| Failure::Input(anyhow!("{}: {e}", path.display())))
}

fn load_function(path: &Path, d: &Derivator) -> Result<PiecewiseFunction, Failure> {
    let s = read(path)?;
    parse_function(&s, d).map_err(|e| Failure::Input(anyhow!("{}: {e}", path.display())))
}

fn parse_set(s: &str) -> Result<IntervalSet, Failure> {
    s.parse()
        .map_err(|e: Error| Failure::Input(anyhow!("--set {s:?}: {e}")))
}

fn kinds(k: Kind) -> Vec<MeasureKind> {
    match k {
        Kind::Signed => vec![MeasureKind::Signed],
        Kind::Positive => vec![MeasureKind::Positive],
        Kind::Negative => vec![MeasureKind::Negative],
        Kind::Total => vec![MeasureKind::Total],
        Kind::All => MeasureKind::ALL.to_vec(),
    }
}

fn kind_name(k: MeasureKind) -> &'static str {
    match k {
        MeasureKind::Signed => "signed",
        MeasureKind::Positive => "positive",
        MeasureKind::Negative => "negative",
        MeasureKind::Total => "total",
    }
}

fn set_text(ts: &[f64]) -> String {
    if ts.is_empty() {
        "∅".into()
    } else {
        let inner: Vec<String> = ts.iter().map(|t| t.to_string()).collect();
        format!("{{{}}}", inner.join(", "))
    }
}

fn analyze(d: &Derivator) -> Report {
    let (a, b) = d.domain();
    let atoms: Vec<f64> = d.atoms().into_iter().map(|(t, _)| t).collect();
    let comps = d.components();
    let c_g = if comps.is_empty() {
        "∅".to_string()
    } else {
        comps.iter().map(|(x, y)| format!("({x},{y})")).collect::<Vec<_>>().join("∪")
    };
    let mut n_minus = Vec::new();
    let mut n_plus = Vec::new();
    let mut points = Vec::new();
    for &t in d.knots() {
        let c = d.classify_point(t).expect("knots lie in the domain");
        match c.class {
            Class::NMinus => n_minus.push(t),
            Class::NPlus => n_plus.push(t),
            _ => {}
        }
        points.push(json!({ "t": t, "class": c, "g": d.g(t, Side::Value), "g_tilde": d.g_tilde(t, Side::Value) }));
    }
    let hahn = hahn_decomposition(d);
    let total = d.g_tilde(b, Side::Value) - d.g_tilde(a, Side::Value);
    let json = json!({
        "kind": d.kind(),
        "domain": [a, b],
        "D_g": atoms,
        "C_g": c_g,
        "N_g_minus": n_minus,
        "N_g_plus": n_plus,
        "A_g_plus": hahn.positive.to_string(),
        "A_g_minus": hahn.negative.to_string(),
        "total_variation": total,
        "nondecreasing": d.is_nondecreasing(),
        "tail_bound": d.tail_bound(),
        "points": points,
    });
    let text = format!(
        "D_g={}, C_g={}, N_g-={}, N_g+={}, A_g+={}, A_g-={}, var={}\n",
        set_text(&atoms),
        c_g,
        set_text(&n_minus),
        set_text(&n_plus),
        hahn.positive,
        hahn.negative,
        total
    );
    Report { json, text, pass: true }
}

fn ftc_summary(r: &FtcReport) -> String {
    format!(
        "{:?}: {} points, max error {:.3e}, {}\n",
        r.suite,
        r.n_points,
        r.max_error,
        if r.pass { "PASS" } else { "FAIL" }
    )
}

fn run_ftc(suite: Suite, f: &PiecewiseFunction, d: &Derivator, samples: usize, tol: f64, seed: u64) -> Result<FtcReport, Error> {
    match suite {
        Suite::Ae => check_ftc_ae(f, d, samples, tol),
        Suite::Barrow => {
            let big_f = primitive(f, d)?.to_function();
            check_barrow(&big_f, d, tol)
        }
        Suite::Everywhere => check_ftc_everywhere(f, d, tol, samples, seed),
    }
}

fn ftc_corpus(suite: Suite, n: usize, samples: usize, tol: f64, seed: u64) -> Report {
    let mut corpus = Corpus::new(seed);
    let mut rows = Vec::with_capacity(n);
    let (mut passed, mut failed, mut skipped) = (0, 0, 0);
    let mut max_error: f64 = 0.0;
    let mut text = String::new();
    for i in 0..n {
        let d = corpus.derivator();
        let f = match suite {
            Suite::Everywhere => corpus.g_continuous_function(&d),
            _ => corpus.continuous_function(&d),
        };
        let row = match run_ftc(suite, &f, &d, samples, tol, seed.wrapping_add(i as u64)) {
            Ok(r) => {
                max_error = max_error.max(r.max_error);
                if r.pass {
                    passed += 1;
                } else {
                    failed += 1;
                    let _ = writeln!(text, "pair {i}: {}", ftc_summary(&r).trim_end());
                }
                json!({ "pair": i, "points": r.n_points, "max_error": r.max_error, "pass": r.pass })
            }
            Err(e @ Error::PhiHypothesisViolated { .. }) => {
                skipped += 1;
                json!({ "pair": i, "skipped": e.to_string() })
            }
            Err(e) => {
                failed += 1;
                let _ = writeln!(text, "pair {i}: {e}");
                json!({ "pair": i, "error": e.to_string(), "pass": false })
            }
        };
        rows.push(row);
    }
    let pass = failed == 0;
    let _ = writeln!(
        text,
        "corpus of {n} (seed {seed}): {passed} passed, {failed} failed, {skipped} skipped, max error {max_error:.3e}: {}",
        if pass { "PASS" } else { "FAIL" }
    );
    Report {
        json: json!({
            "seed": seed,
            "pairs": n,
            "passed": passed,
            "failed": failed,
            "skipped": skipped,
            "max_error": max_error,
            "tolerance": tol,
            "pass": pass,
            "results": rows,
        }),
        text,
        pass,
    }
}

fn parse_range(s: &str) -> Result<(f64, f64), Failure> {
    let bad = || Failure::Input(anyhow!("--range {s:?}: expected \"c,d\" with c ≤ d"));
    let (c, d) = s.split_once(',').ok_or_else(bad)?;
    let c: f64 = c.trim().parse().map_err(|_| bad())?;
    let d: f64 = d.trim().parse().map_err(|_| bad())?;
    if c > d {
        return Err(bad());
    }
    Ok((c, d))
}

fn example2(cmd: &Command) -> Result<Report, Failure> {
    let Command::Example2 {
        check_series,
        n,
        report,
        witness,
        count,
        depth,
        figures,
        points,
    } = cmd
    else {
        unreachable!()
    };
    let (check_series, report) = if !check_series && !report && !witness && figures.is_none() {
        (true, true)
    } else {
        (*check_series, *report)
    };
    let mut json = serde_json::Map::new();
    let mut text = String::new();
    let mut pass = true;
    if check_series {
        let c = series_identity_check(*n).or_fail()?;
        let nf = *n as f64;
        let ok = c.deviation <= 1.0 / (3.0 * nf * nf);
        pass &= ok;
        let _ = writeln!(text, "partial sum (N={}) = {:.17}, |Δ| from 1/6 = {:.6e}", c.n, c.value, c.deviation);
        json.insert("series".into(), json!({ "check": c, "pass": ok }));
    }
    let d = if report || *witness || figures.is_some() {
        Some(build_oscillator(*depth).or_fail()?)
    } else {
        None
    };
    if report {
        let d = d.as_ref().expect("built above");
        let r = oscillator_report(d, 10.0).or_fail()?;
        let ok = r.verdict == WitnessVerdict::Divergent;
        pass &= ok;
        let ratio = r.ratio.map_or("-".into(), |(m, q)| format!("{q:.6} at m={m}"));
        let _ = writeln!(
            text,
            "Q(x_2n): max {:.6} over n ≤ {}, first above {} at n = {}, growth exponent {:.4}, ratio {}: {:?}",
            r.max_quotient,
            depth,
            r.threshold,
            r.crossed_at.map_or("-".into(), |n| n.to_string()),
            r.fit.exponent,
            ratio,
            r.verdict
        );
        json.insert("report".into(), serde_json::to_value(&r).map_err(anyhow::Error::from)?);
    }
    if *witness {
        let d = d.as_ref().expect("built above");
        if *count + 1 > *depth {
            return Err(Failure::Input(anyhow!("--count must be below --depth")));
        }
        let (_, r) = necessity_witness(d, 0.0, &Approach::oscillator(*count), 1e-6).or_fail()?;
        let ok = r.verdict == WitnessVerdict::Divergent;
        pass &= ok;
        let _ = writeln!(
            text,
            "witness: max quotient {:.6}, first above {} at n = {}: {:?}",
            r.max_quotient,
            r.threshold,
            r.crossed_at.map_or("-".into(), |n| n.to_string()),
            r.verdict
        );
        json.insert("witness".into(), serde_json::to_value(&r).map_err(anyhow::Error::from)?);
    }
    if let Some(dir) = figures {
        let d = d.as_ref().expect("built above");
        let written =
            write_figures(d, dir, *points).with_context(|| format!("writing figures to {}", dir.display()))?;
        for w in &written {
            let _ = writeln!(text, "wrote {w}");
        }
        json.insert("figures".into(), json!(written));
    }
    json.insert("pass".into(), json!(pass));
    Ok(Report {
        json: Value::Object(json),
        text,
        pass,
    })
}

fn execute(cli: &Cli) -> Result<Report, Failure> {
    match &cli.command {
        Command::Analyze { derivator } => Ok(analyze(&load_derivator(derivator)?)),
        Command::Measure { derivator, set, kind } => {
            let d = load_derivator(derivator)?;
            let e = parse_set(set)?;
            let mut values = serde_json::Map::new();
            let mut text = String::new();
            for k in kinds(*kind) {
                let (v, bound) = measure_with_bound(&d, &e, k).or_fail()?;
                let _ = writeln!(text, "{}({e}) = {v} (± {bound})", kind_name(k));
                values.insert(kind_name(k).into(), json!({ "value": v, "error_bound": bound }));
            }
            Ok(Report {
                json: json!({ "set": e.to_string(), "measures": values }),
                text,
                pass: true,
            })
        }
        Command::Integrate {
            derivator,
            function,
            set,
            kind,
            oracle_depth,
        } => {
            let d = load_derivator(derivator)?;
            let f = load_function(function, &d)?;
            let (a, b) = d.domain();
            let e = match set {
                Some(s) => parse_set(s)?,
                None => IntervalSet::half_open(a, b),
            };
            let mut values = serde_json::Map::new();
            let mut text = String::new();
            for k in kinds(*kind) {
                let r = integrate(&f, &d, &e, k).or_fail()?;
                let _ = writeln!(text, "∫ f dμ ({}) over {e} = {} (± {})", kind_name(k), r.value, r.error_bound);
                values.insert(kind_name(k).into(), json!(r));
            }
            let mut json = json!({ "set": e.to_string(), "integrals": values });
            if let Some(depth) = oracle_depth {
                let [p] = e.parts() else {
                    return Err(Failure::Input(anyhow!("--oracle-depth needs a single interval [x,y)")));
                };
                if !(p.lo_closed && !p.hi_closed) {
                    return Err(Failure::Input(anyhow!("--oracle-depth needs a half-open interval [x,y)")));
                }
                let v = rs_extrapolated(&f, &d, p.lo, p.hi, *depth, &f.breakpoints_in(p.lo, p.hi));
                let _ = writeln!(text, "refinement oracle (depth {depth}) = {v}");
                json["oracle"] = json!({ "depth": depth, "value": v });
            }
            Ok(Report { json, text, pass: true })
        }
        Command::Derive {
            derivator,
            function,
            at,
            tol,
        } => {
            let d = load_derivator(derivator)?;
            let f = load_function(function, &d)?;
            let e = g_derivative(&f, &d, *at, *tol).or_fail()?;
            let fmt = |v: Option<f64>| v.map_or("undefined".to_string(), |x| x.to_string());
            let verdict = if e.exists {
                format!("g-derivative at {} = {}", at, fmt(e.value))
            } else {
                format!("not g-differentiable: left={} right={}", fmt(e.left), fmt(e.right))
            };
            let mut json = serde_json::to_value(&e).map_err(anyhow::Error::from)?;
            json["verdict"] = json!(verdict);
            Ok(Report {
                json,
                text: verdict + "\n",
                pass: true,
            })
        }
        Command::Phi { derivator, at, tol } => {
            let d = load_derivator(derivator)?;
            let p = phi(&d, *at, *tol).or_fail()?;
            let class = d.classify_point(*at).or_fail()?;
            Ok(Report {
                text: format!(
                    "phi({at}) = {} ({})\n",
                    p.value,
                    if p.certified { "certified" } else { "sampled" }
                ),
                json: json!({ "t": at, "class": class, "phi": p }),
                pass: true,
            })
        }
        Command::FtcCheck {
            suite,
            derivator,
            function,
            corpus,
            samples,
            tol,
        } => {
            let tol = tol.unwrap_or(match suite {
                Suite::Barrow => 1e-9,
                _ => 1e-6,
            });
            if let Some(n) = corpus {
                return Ok(ftc_corpus(*suite, *n, *samples, tol, cli.seed));
            }
            let (Some(dp), Some(fp)) = (derivator, function) else {
                return Err(Failure::Input(anyhow!("give a derivator and a function, or --corpus N")));
            };
            let d = load_derivator(dp)?;
            let f = load_function(fp, &d)?;
            let r = run_ftc(*suite, &f, &d, *samples, tol, cli.seed).or_fail()?;
            let text = r.to_table();
            Ok(Report {
                pass: r.pass,
                json: serde_json::to_value(&r).map_err(anyhow::Error::from)?,
                text,
            })
        }
        Command::Approximate {
            derivator,
            function,
            eps,
            boundary,
            alpha,
            beta,
            range,
        } => {
            let d = load_derivator(derivator)?;
            let f = load_function(function, &d)?;
            let need = |v: &Option<f64>, name: &str| v.ok_or_else(|| Failure::Input(anyhow!("--{name} is required")));
            let boundary = match boundary {
                BoundaryArg::Free => Boundary::Free,
                BoundaryArg::Clamped => Boundary::Clamped {
                    alpha: need(alpha, "alpha")?,
                    beta: need(beta, "beta")?,
                },
                BoundaryArg::JumpStart => Boundary::JumpStart {
                    beta: need(beta, "beta")?,
                },
            };
            let opts = ApproxOptions {
                range: range.as_deref().map(parse_range).transpose()?,
                ..Default::default()
            };
            let r = approximate_in_l1g_with(&f, &d, *eps, boundary, opts).or_fail()?;
            let (a, b) = d.domain();
            let (ha, hb) = (r.h.value(a), r.h.value(b));
            let text = format!(
                "‖f − h‖ = {:.6e} < {} with {} nodes; h(a) = {ha}, h(b) = {hb}\n",
                r.error.value,
                eps,
                r.nodes.len()
            );
            let mut json = serde_json::to_value(&r).map_err(anyhow::Error::from)?;
            json["h_at_a"] = json!(ha);
            json["h_at_b"] = json!(hb);
            json["boundary"] = serde_json::to_value(boundary).map_err(anyhow::Error::from)?;
            Ok(Report { json, text, pass: true })
        }
        Command::Example2 { .. } => example2(&cli.command),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let report = match execute(&cli) {
        Ok(r) => r,
        Err(Failure::Input(e)) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(2);
        }
        Err(Failure::Check(msg)) => {
            eprintln!("check failed: {msg}");
            return ExitCode::from(1);
        }
    };
    let body = match cli.format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&report.json).expect("reports serialize");
            s.push('\n');
            s
        }
        Format::Text => report.text,
    };
    match &cli.output {
        Some(path) => {
            if let Err(e) = std::fs::write(path, body) {
                eprintln!("error: writing {}: {e}", path.display());
                return ExitCode::from(2);
            }
        }
        None => print!("{body}"),
    }
    if report.pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
