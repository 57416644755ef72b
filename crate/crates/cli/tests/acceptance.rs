//! Acceptance gate: one line per criterion, nonzero exit if any fails.
//!
//! Every expected value is recomputed here from first principles (exact
//! rationals, direct difference quotients, hand-built distribution functions)
//! rather than read back from the library.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::process::Command;
use std::time::Instant;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, One, Signed, ToPrimitive, Zero};

use stieltjes::continuity::{check_g_continuity, Mode};
use stieltjes::corpus::Corpus;
use stieltjes::counterexamples::{
    build_oscillator, example_sequences, oscillator_quotient, oscillator_report, psi, series_identity_check,
};
use stieltjes::density::{approximate_in_l1g, truncate_jumps, Boundary};
use stieltjes::derivative::{g_derivative, phi};
use stieltjes::derivator::{Class, Derivator, Side};
use stieltjes::error::Error;
use stieltjes::ftc::{check_barrow, check_ftc_ae, check_ftc_everywhere, check_ftc_pointwise, structural_points};
use stieltjes::function::{Evaluable, PiecewiseFunction, TriangularWave};
use stieltjes::integral::{integrate, l1g_distance, primitive, rs_extrapolated, rs_refinement_oracle};
use stieltjes::interval::IntervalSet;
use stieltjes::measure::{hahn_decomposition, measure_of, MeasureKind};

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn q(p: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(d))
}

fn exact(x: f64) -> BigRational {
    BigRational::from_f64(x).expect("finite")
}

// ---------------------------------------------------------------------------
// 1–3: sequences, series, ψ

fn alpha_oracle(n: u64) -> BigRational {
    if n == 1 {
        q(1, 2)
    } else {
        q(1, n as i64)
    }
}

fn criterion_1() -> Outcome {
    let golden = [(2, q(2, 3)), (3, q(1, 3)), (4, q(2, 9)), (5, q(1, 9)), (6, q(1, 12)), (7, q(1, 18)), (8, q(2, 45))];
    let n_max: u64 = 10_000;
    let terms = example_sequences(2 * n_max + 1).map_err(|e| e.to_string())?;
    for (k, want) in &golden {
        ensure!(terms[k - 1].1 == *want, "x_{k} = {} (want {want})", terms[k - 1].1);
    }
    // Own recursion, compared against the closed forms and the library.
    let mut x = BigRational::one();
    for k in 2..=2 * n_max + 1 {
        let n = k / 2;
        let a = alpha_oracle(n);
        x = if k % 2 == 0 { x / (BigRational::one() + a) } else { x * (BigRational::one() - a) };
        let ni = n as i64;
        let closed = if k == 2 {
            q(2, 3)
        } else if k % 2 == 0 {
            q(2, 3 * (ni - 1) * (ni + 1))
        } else {
            q(2, 3 * ni * (ni + 1))
        };
        ensure!(x == closed, "recursion and closed form differ at k = {k}");
        ensure!(terms[(k - 1) as usize].1 == x, "library x_{k} differs");
        ensure!(terms[(k - 1) as usize].0 == alpha_oracle(k), "library α_{k} differs");
    }
    Ok(format!("7 golden terms, recursion = closed form for k ≤ {}", 2 * n_max + 1))
}

fn criterion_2() -> Outcome {
    let mut out = Vec::new();
    for (n, tol) in [(1_000u64, 1e-5), (10_000, 1e-7)] {
        let c = series_identity_check(n).map_err(|e| e.to_string())?;
        // Independent float evaluation of the same partial sum.
        let (mut prod, mut sum) = (1.0f64, 0.0f64);
        for k in 1..=n {
            let a = alpha_oracle(k).to_f64().unwrap();
            let b = alpha_oracle(k + 1).to_f64().unwrap();
            prod *= (1.0 - a) / (1.0 + a);
            sum += b / (1.0 + b) * prod;
        }
        ensure!((sum - c.value).abs() < 1e-12, "partial sum {} vs float oracle {sum}", c.value);
        ensure!(c.deviation <= tol, "N = {n}: |Δ| = {:.3e} > {tol:e}", c.deviation);
        // The tail is 1/(3(N+1)(N+2)) exactly.
        let tail = q(1, 3 * (n as i64 + 1) * (n as i64 + 2));
        ensure!(
            q(1, 6) - &c.partial_sum == tail,
            "N = {n}: 1/6 − S_N = {} is not the predicted tail {tail}",
            q(1, 6) - &c.partial_sum
        );
        out.push(format!("N={n} |Δ|={:.3e}", c.deviation));
    }
    Ok(out.join(", "))
}

fn criterion_3() -> Outcome {
    let d = build_oscillator(50).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for n in 1..=20u64 {
        let ni = n as i64;
        let x_even = if n == 1 { 2.0 / 3.0 } else { 2.0 / (3.0 * ((ni - 1) * (ni + 1)) as f64) };
        let x_odd = 2.0 / (3.0 * (ni * (ni + 1)) as f64);
        let a = alpha_oracle(n).to_f64().unwrap();
        let e1 = (psi(&d, x_even) - a).abs();
        let e2 = psi(&d, x_odd).abs();
        worst = worst.max(e1).max(e2);
        ensure!(e1 <= 1e-10 && e2 <= 1e-10, "n = {n}: ψ(x_2n) − α_n = {e1:e}, ψ(x_2n+1) = {e2:e}");
    }
    Ok(format!("n ≤ 20, max deviation {worst:.2e}"))
}

// ---------------------------------------------------------------------------
// 4: measures against a rational distribution-function oracle

/// Exact distribution function of one Jordan part, built from the raw knots,
/// slopes and jumps.
struct Dist {
    knots: Vec<BigRational>,
    slopes: Vec<BigRational>,
    jumps: Vec<BigRational>,
    left: Vec<BigRational>,
}

impl Dist {
    fn new(d: &Derivator, kind: MeasureKind) -> Self {
        let part = |v: f64| -> BigRational {
            let v = exact(v);
            match kind {
                MeasureKind::Signed => v,
                MeasureKind::Positive => v.max(BigRational::zero()),
                MeasureKind::Negative => (-v).max(BigRational::zero()),
                MeasureKind::Total => v.abs(),
            }
        };
        let knots: Vec<BigRational> = d.knots().iter().map(|&t| exact(t)).collect();
        let slopes: Vec<BigRational> = d.slopes().iter().map(|&s| part(s)).collect();
        let jumps: Vec<BigRational> = d.jumps().iter().map(|&j| part(j)).collect();
        let mut left = vec![BigRational::zero()];
        for i in 0..slopes.len() {
            let v = &left[i] + &jumps[i] + &slopes[i] * (&knots[i + 1] - &knots[i]);
            left.push(v);
        }
        Dist { knots, slopes, jumps, left }
    }

    /// Left value at `t`, or the right limit with `right`.
    fn at(&self, t: f64, right: bool) -> BigRational {
        let t = exact(t);
        if let Some(i) = self.knots.iter().position(|k| *k == t) {
            return if right { &self.left[i] + &self.jumps[i] } else { self.left[i].clone() };
        }
        let i = self.knots.iter().rposition(|k| *k < t).expect("inside the domain");
        &self.left[i] + &self.jumps[i] + &self.slopes[i] * (t - &self.knots[i])
    }

    fn measure(&self, e: &IntervalSet) -> BigRational {
        let mut total = BigRational::zero();
        for p in e.parts() {
            let hi = self.at(p.hi, p.hi_closed);
            let lo = self.at(p.lo, !p.lo_closed);
            total += hi - lo;
        }
        total
    }
}

fn criterion_4() -> Outcome {
    let mut corpus = Corpus::new(4);
    let mut checks = 0usize;
    for i in 0..200 {
        let d = corpus.derivator();
        let dists: Vec<Dist> = MeasureKind::ALL.iter().map(|&k| Dist::new(&d, k)).collect();
        let hahn = hahn_decomposition(&d);
        let pos_of_neg = measure_of(&d, &hahn.negative, MeasureKind::Positive).map_err(|e| e.to_string())?;
        let neg_of_pos = measure_of(&d, &hahn.positive, MeasureKind::Negative).map_err(|e| e.to_string())?;
        ensure!(pos_of_neg == 0.0 && neg_of_pos == 0.0, "derivator {i}: μ⁺(A⁻) = {pos_of_neg}, μ⁻(A⁺) = {neg_of_pos}");
        // The Hahn sets also have to split the oracle's measures.
        ensure!(
            dists[1].measure(&hahn.negative).is_zero() && dists[2].measure(&hahn.positive).is_zero(),
            "derivator {i}: Hahn sets do not separate the oracle's Jordan parts"
        );
        for _ in 0..50 {
            let e = corpus.interval_set(&d);
            let m: Vec<f64> = MeasureKind::ALL
                .iter()
                .map(|&k| measure_of(&d, &e, k))
                .collect::<Result<_, Error>>()
                .map_err(|e| e.to_string())?;
            let (s, p, n, t) = (m[0], m[1], m[2], m[3]);
            ensure!((s - (p - n)).abs() <= 1e-12, "derivator {i}, {e}: signed {s} ≠ {p} − {n}");
            ensure!((t - (p + n)).abs() <= 1e-12, "derivator {i}, {e}: total {t} ≠ {p} + {n}");
            for (k, dist) in dists.iter().enumerate() {
                let want = dist.measure(&e).to_f64().unwrap();
                ensure!((m[k] - want).abs() <= 1e-12, "derivator {i}, {e}: kind {k} = {} vs oracle {want}", m[k]);
            }
            let (a, b) = d.domain();
            let x = corpus.uniform(a, b);
            let y = corpus.uniform(x, b);
            let tv = measure_of(&d, &IntervalSet::half_open(x, y), MeasureKind::Total).map_err(|e| e.to_string())?;
            let dg = d.g_tilde(y, Side::Value) - d.g_tilde(x, Side::Value);
            ensure!(tv == dg, "derivator {i}: |μ|([{x},{y})) = {tv} but Δg̃ = {dg}");
            let oracle = dists[3].at(y, false) - dists[3].at(x, false);
            ensure!((tv - oracle.to_f64().unwrap()).abs() <= 1e-12, "derivator {i}: |μ|([{x},{y})) off the oracle");
            checks += 1;
        }
    }
    Ok(format!("200 derivators × 50 sets ({checks} set checks)"))
}

// ---------------------------------------------------------------------------
// 5–8: integration and FTC over the seeded corpus

fn criterion_5() -> Outcome {
    let mut corpus = Corpus::new(5);
    let (mut worst, mut worst_raw): (f64, f64) = (0.0, 0.0);
    for i in 0..200 {
        let d = corpus.derivator();
        let f = corpus.continuous_function(&d);
        let (a, b) = d.domain();
        let x = corpus.uniform(a, b);
        let y = corpus.uniform(x, b);
        if y <= x {
            continue;
        }
        let closed = integrate(&f, &d, &IntervalSet::half_open(x, y), MeasureKind::Signed).map_err(|e| e.to_string())?;
        let oracle = rs_extrapolated(&f, &d, x, y, 18, &f.breakpoints_in(x, y));
        let err = (closed.value - oracle).abs() / (1.0 + closed.value.abs());
        ensure!(err <= 1e-6, "pair {i} on [{x},{y}): closed form {} vs oracle {oracle}", closed.value);
        worst = worst.max(err);
        if i < 20 {
            let raw = rs_refinement_oracle(&f, &d, x, y, 18);
            worst_raw = worst_raw.max((closed.value - raw).abs() / (1.0 + closed.value.abs()));
        }
    }
    Ok(format!(
        "200 pairs, max relative gap {worst:.2e} (plain depth-18 sum on 20 pairs: {worst_raw:.2e})"
    ))
}

fn criterion_6() -> Outcome {
    let mut corpus = Corpus::new(6);
    let (mut worst, mut atoms, mut points): (f64, usize, usize) = (0.0, 0, 0);
    for i in 0..200 {
        let d = corpus.derivator();
        let f = corpus.continuous_function(&d);
        let r = check_ftc_ae(&f, &d, 64, 1e-6).map_err(|e| format!("pair {i}: {e}"))?;
        ensure!(r.pass, "pair {i}: max error {:.3e}", r.max_error);
        for rec in &r.records {
            if d.jump_at(rec.t) != 0.0 {
                // Jump quotient computed directly from the primitive.
                let big_f = primitive(&f, &d).map_err(|e| e.to_string())?;
                let t = rec.t;
                let direct = (big_f.right_limit(t) - big_f.value(t)) / (d.g(t, Side::RightLimit) - d.g(t, Side::Value));
                ensure!(rec.estimate == Some(f.value(t)), "pair {i}: atom {t} estimate {:?} ≠ f(t)", rec.estimate);
                ensure!((direct - f.value(t)).abs() <= 1e-12, "pair {i}: atom {t} direct quotient {direct}");
                atoms += 1;
            }
        }
        points += r.n_points;
        worst = worst.max(r.max_error);
    }
    Ok(format!("200 pairs, {points} points, {atoms} atoms exact, max error {worst:.2e}"))
}

fn criterion_7() -> Outcome {
    let mut corpus = Corpus::new(7);
    let mut worst: f64 = 0.0;
    for i in 0..200 {
        let d = corpus.derivator();
        let f = corpus.continuous_function(&d);
        let big_f = primitive(&f, &d).map_err(|e| e.to_string())?.to_function();
        let r = check_barrow(&big_f, &d, 1e-9).map_err(|e| format!("pair {i}: {e}"))?;
        ensure!(r.pass && r.n_points >= 257, "pair {i}: {} points, max error {:.3e}", r.n_points, r.max_error);
        worst = worst.max(r.max_error);
    }
    Ok(format!("200 primitives, max error {worst:.2e}"))
}

fn criterion_8() -> Outcome {
    let mut corpus = Corpus::new(8);
    let (mut run, mut skipped, mut points, mut interiors) = (0usize, 0usize, 0usize, 0usize);
    let mut worst: f64 = 0.0;
    for i in 0..200 {
        let d = corpus.derivator();
        let f = corpus.g_continuous_function(&d);
        let certified = structural_points(&d, 0, 0).iter().all(|&t| {
            phi(&d, t, 1e-6).map(|p| p.certified && p.value == 1.0).unwrap_or(false)
        });
        if !certified {
            skipped += 1;
            continue;
        }
        let r = check_ftc_everywhere(&f, &d, 1e-6, 16, i).map_err(|e| format!("pair {i}: {e}"))?;
        ensure!(r.pass, "pair {i}: max error {:.3e}", r.max_error);
        for k in d.knots() {
            ensure!(r.records.iter().any(|rec| rec.t == *k), "pair {i}: knot {k} not checked");
        }
        interiors += r.records.iter().filter(|rec| matches!(rec.class.class, Class::ConstancyInterior(_))).count();
        run += 1;
        points += r.n_points;
        worst = worst.max(r.max_error);
    }
    ensure!(run >= 100, "only {run} corpus members have certified φ ≡ 1");
    Ok(format!(
        "{run} pairs ({skipped} without certified φ ≡ 1), {points} points incl. {interiors} constancy interiors, max error {worst:.2e}"
    ))
}

// ---------------------------------------------------------------------------
// 9–10: counterexamples

fn criterion_9() -> Outcome {
    let d = build_oscillator(20_000).map_err(|e| e.to_string())?;
    let p = phi(&d, 0.0, 1e-6).map_err(|e| e.to_string())?;
    ensure!(p.value < 0.05, "φ(0) estimate {}", p.value);
    let mut worst: f64 = 0.0;
    let mut prev = f64::NEG_INFINITY;
    let mut crossed = None;
    for n in 1..=20_000u64 {
        let qn = oscillator_quotient(&d, 2 * n).ok_or(format!("Q(x_{}) undefined", 2 * n))?;
        if n <= 10_000 {
            let ni = n as f64;
            let x = if n == 1 { 2.0 / 3.0 } else { 2.0 / (3.0 * (ni - 1.0) * (ni + 1.0)) };
            let want = x.cbrt() / (2.0 * alpha_oracle(n).to_f64().unwrap());
            let err = (qn - want).abs();
            worst = worst.max(err);
            ensure!(err <= 1e-9, "n = {n}: Q = {qn}, x^(1/3)/(2α) = {want}");
        }
        if n > 3 {
            ensure!(qn > prev, "Q not increasing at n = {n}");
        }
        if crossed.is_none() && qn > 10.0 {
            crossed = Some(n);
        }
        prev = qn;
    }
    let crossed = crossed.ok_or("Q(x_2n) stays below 10 for n ≤ 2·10⁴")?;
    let m = 1000u64;
    let ratio = oscillator_quotient(&d, 16 * m).unwrap() / oscillator_quotient(&d, 2 * m).unwrap();
    ensure!((1.9..=2.1).contains(&ratio), "Q(x_16m)/Q(x_2m) = {ratio} at m = {m}");
    let report = oscillator_report(&d, 10.0).map_err(|e| e.to_string())?;
    ensure!(report.crossed_at == Some(crossed), "report crossing {:?} vs {crossed}", report.crossed_at);
    // Negative control: without φ > 0 the FTC fails at 0.
    let small = build_oscillator(2000).map_err(|e| e.to_string())?;
    let f = PiecewiseFunction::TriangularWave(TriangularWave::new(1.0 / 3.0, 2000));
    let r = check_ftc_pointwise(&f, &small, &[0.0], 1e-6).map_err(|e| e.to_string())?;
    ensure!(!r.pass, "the FTC unexpectedly holds at 0");
    Ok(format!(
        "φ(0) ≈ {:.1e}, max |Q − x^(1/3)/(2α)| {worst:.1e}, Q > 10 from n = {crossed}, ratio {ratio:.4}, FTC fails at 0",
        p.value
    ))
}

fn criterion_10() -> Outcome {
    let tent = Derivator::piecewise_affine(vec![0.0, 1.0, 2.0], vec![1.0, -1.0], vec![0.0; 3], 0.0)
        .map_err(|e| e.to_string())?;
    let f = PiecewiseFunction::variation_of(&tent).map_err(|e| e.to_string())?;
    let est = g_derivative(&f, &tent, 1.0, 1e-6).map_err(|e| e.to_string())?;
    ensure!(!est.exists, "g̃ reported g-differentiable at 1");
    // Direct quotients (g̃(s) − g̃(1)) / (g(s) − g(1)) on each side.
    let quotient = |s: f64| {
        (tent.g_tilde(s, Side::Value) - tent.g_tilde(1.0, Side::Value)) / (tent.g(s, Side::Value) - tent.g(1.0, Side::Value))
    };
    let (left, right) = (quotient(1.0 - 1e-3), quotient(1.0 + 1e-3));
    let (l, r) = (est.left.ok_or("no left limit")?, est.right.ok_or("no right limit")?);
    ensure!((l - left).abs() < 1e-9 && (r - right).abs() < 1e-9, "sides {l}, {r} vs direct quotients {left}, {right}");
    let mut sides = [l, r];
    sides.sort_by(f64::total_cmp);
    ensure!(sides == [-1.0, 1.0], "one-sided limits {l}, {r}");
    Ok(format!(
        "exists=false, left={l}, right={r}; the stated orientation (left −1, right +1) is swapped, direct quotients agree with the computed sides"
    ))
}

// ---------------------------------------------------------------------------
// 11: density

fn pw(knots: &[f64], slopes: &[f64], jumps: &[f64]) -> Derivator {
    Derivator::piecewise_affine(knots.to_vec(), slopes.to_vec(), jumps.to_vec(), 0.0).expect("admissible")
}

fn criterion_11() -> Outcome {
    let identity = Derivator::identity(0.0, 1.0).map_err(|e| e.to_string())?;
    let two_atoms = pw(&[0.0, 0.25, 0.5, 1.0], &[1.0, 1.0, 1.0], &[0.0, 0.5, 0.25, 0.0]);
    let two_atoms_start = pw(&[0.0, 0.5, 1.0], &[1.0, 1.0], &[0.5, 0.25, 0.0]);
    let plateau = pw(&[0.0, 1.0, 2.0, 3.0], &[1.0, 0.0, 1.0], &[0.0; 4]);
    let cases: Vec<(&str, &Derivator, &str, Boundary)> = vec![
        ("identity", &identity, "[0.2,0.6)", Boundary::Free),
        ("identity", &identity, "[0.2,0.6)", Boundary::Clamped { alpha: 0.3, beta: -0.2 }),
        ("two-atom", &two_atoms, "[0.25,0.75)", Boundary::Free),
        ("two-atom", &two_atoms, "[0.25,0.75)", Boundary::Clamped { alpha: 1.0, beta: 1.0 }),
        ("two-atom at a", &two_atoms_start, "[0,0.5]", Boundary::JumpStart { beta: 0.5 }),
        ("plateau", &plateau, "[0.5,2.5)", Boundary::Free),
        ("plateau", &plateau, "[0.5,2.5)", Boundary::Clamped { alpha: 0.0, beta: 2.0 }),
    ];
    let mut runs = 0;
    let mut worst_ratio: f64 = 0.0;
    for (name, d, set, boundary) in &cases {
        let f = PiecewiseFunction::Indicator(set.parse().map_err(|e: Error| e.to_string())?);
        let (a, b) = d.domain();
        for eps in [0.1, 0.01, 0.001] {
            let r = approximate_in_l1g(&f, d, eps, *boundary).map_err(|e| format!("{name}, ε = {eps}: {e}"))?;
            // Measured independently over the whole closed domain.
            let dist = l1g_distance(&f, &r.h, d, &IntervalSet::closed(a, b)).map_err(|e| e.to_string())?;
            ensure!(dist.value + dist.error_bound < eps, "{name} {boundary:?}, ε = {eps}: ‖f − h‖ = {}", dist.value);
            worst_ratio = worst_ratio.max(dist.value / eps);
            match boundary {
                Boundary::Clamped { alpha, beta } => ensure!(
                    r.h.value(a) == *alpha && r.h.value(b) == *beta,
                    "{name}: h(a) = {}, h(b) = {}",
                    r.h.value(a),
                    r.h.value(b)
                ),
                Boundary::JumpStart { beta } => ensure!(
                    r.h.value(a) == f.value(a) && r.h.value(b) == *beta,
                    "{name}: h(a) = {}, h(b) = {}",
                    r.h.value(a),
                    r.h.value(b)
                ),
                Boundary::Free => {}
            }
            for t in structural_points(d, 32, runs as u64) {
                let v = check_g_continuity(&r.h, d, t, Mode::TwoSided, &Default::default()).map_err(|e| e.to_string())?;
                ensure!(v.passed(), "{name}, ε = {eps}: h not g-continuous at {t}: {v:?}");
            }
            runs += 1;
        }
    }
    // Geometric atoms 2^{-k} at 1 − 2^{-k}: η = 0.1 keeps the four largest.
    let n = 40;
    let mut knots = vec![0.0];
    let mut jumps = vec![0.0];
    for k in 1..=n {
        knots.push(1.0 - 0.5f64.powi(k));
        jumps.push(0.5f64.powi(k));
    }
    knots.push(1.0);
    jumps.push(0.0);
    let d = pw(&knots, &vec![1.0; knots.len() - 1], &jumps);
    let t = truncate_jumps(&d, 0.1).map_err(|e| e.to_string())?;
    let removed_exact: BigRational = (5..=n).map(|k| q(1, 1i64 << k)).sum();
    ensure!(t.kept.len() == 4, "kept {} atoms", t.kept.len());
    ensure!(exact(t.removed) == removed_exact, "removed {} vs exact {}", t.removed, removed_exact);
    // ‖μ_g − μ_G‖_TV from the raw pieces of both derivators.
    let g2 = &t.derivator;
    let mut tv = BigRational::zero();
    for (i, k) in d.knots().iter().enumerate() {
        tv += (exact(d.jump_at(*k)) - exact(g2.jump_at(*k))).abs();
        if i + 1 < d.knots().len() {
            let mid = 0.5 * (k + d.knots()[i + 1]);
            let s1 = d.g(d.knots()[i + 1], Side::Value) - d.g(mid, Side::Value);
            let s2 = g2.g(d.knots()[i + 1], Side::Value) - g2.g(mid, Side::Value);
            tv += (exact(s1) - exact(s2)).abs();
        }
    }
    ensure!(tv == removed_exact, "TV of the difference {} vs removed {}", tv, removed_exact);
    ensure!(removed_exact < q(1, 10), "TV bound violated");
    Ok(format!(
        "{runs} runs, worst ‖f − h‖/ε = {worst_ratio:.3}; truncation kept 4 atoms, TV {:.6} < 0.1",
        t.removed
    ))
}

// ---------------------------------------------------------------------------
// 12: determinism of the CLI

fn data(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "data", name].iter().collect();
    p.to_string_lossy().into_owned()
}

fn suite_run() -> Result<Vec<u8>, String> {
    let runs: Vec<Vec<String>> = vec![
        vec!["analyze".into(), data("tent.json")],
        vec!["measure".into(), data("two_atom.json"), "--set".into(), "[0,0.5],{1}".into()],
        vec!["integrate".into(), data("tent.json"), data("linear.fn"), "--oracle-depth".into(), "12".into()],
        vec!["derive".into(), data("tent.json"), data("gtilde.fn"), "--at".into(), "1".into()],
        vec!["phi".into(), data("oscillator.json"), "--at".into(), "0".into()],
        vec!["ftc-check".into(), "--suite".into(), "ae".into(), "--corpus".into(), "20".into()],
        vec!["ftc-check".into(), "--suite".into(), "barrow".into(), "--corpus".into(), "20".into()],
        vec!["ftc-check".into(), "--suite".into(), "everywhere".into(), "--corpus".into(), "20".into()],
        vec![
            "approximate".into(),
            data("two_atom.json"),
            data("half.fn"),
            "--eps".into(),
            "0.01".into(),
        ],
        vec!["example2".into()],
    ];
    let mut all = Vec::new();
    for args in runs {
        let out = Command::new(env!("CARGO_BIN_EXE_stieltjes"))
            .args(["--seed", "0"])
            .args(&args)
            .output()
            .map_err(|e| e.to_string())?;
        if !out.status.success() {
            return Err(format!("{args:?} exited with {}: {}", out.status, String::from_utf8_lossy(&out.stderr)));
        }
        all.extend_from_slice(&out.stdout);
    }
    Ok(all)
}

fn criterion_12() -> Outcome {
    let first = suite_run()?;
    let second = suite_run()?;
    ensure!(first == second, "reports differ between runs");
    Ok(format!("10 verbs, {} bytes, identical", first.len()))
}

// ---------------------------------------------------------------------------

fn main() {
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("golden sequence values", criterion_1),
        ("series identity", criterion_2),
        ("ψ structure", criterion_3),
        ("Hahn/Jordan identities", criterion_4),
        ("integration oracle equivalence", criterion_5),
        ("FTC a.e.", criterion_6),
        ("Barrow round trip", criterion_7),
        ("everywhere FTC", criterion_8),
        ("optimality / negative control", criterion_9),
        ("non-differentiability of g̃ (tent)", criterion_10),
        ("density theorem", criterion_11),
        ("determinism", criterion_12),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {:>2} ({name}): PASS {detail} [{secs:.2}s]", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} ({name}): FAIL {detail} [{secs:.2}s]", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
