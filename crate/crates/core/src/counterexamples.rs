//! The oscillating derivator, the triangular-wave integrand whose primitive
//! has no `g`-derivative at 0, and a generic construction of such an
//! integrand wherever `φ` vanishes.

use std::fmt::Write as _;
use std::io;
use std::path::Path;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::density::{approximate_in_l1g_with, ApproxOptions, Boundary};
use crate::derivative::phi;
use crate::derivator::{Derivator, Side};
use crate::error::{Error, Result};
use crate::function::{PiecewiseFunction, TriangularWave};
use crate::integral::integrate;
use crate::interval::IntervalSet;
use crate::measure::{hahn_decomposition, MeasureKind};
use crate::oscillator::{self, alpha, x_closed, x_recursive};
use crate::poly::{Piecewise, Poly};

/// Exponent `r_n ≡ 1/3` of the triangular wave.
pub const R: f64 = 1.0 / 3.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SequenceTerm {
    pub n: u64,
    pub alpha: String,
    pub x: String,
}

/// `(α_n, x_n)` for `n = 1..=m`, exact, with the recursion checked against the
/// closed forms.
pub fn example_sequences(m: u64) -> Result<Vec<(BigRational, BigRational)>> {
    if m == 0 {
        return Err(Error::MalformedSpec {
            field: "n".into(),
            reason: "must be at least 1".into(),
        });
    }
    let xs = x_recursive(m);
    let mut out = Vec::with_capacity(m as usize);
    for n in 1..=m {
        let x = xs[n as usize].clone();
        if x != x_closed(n) {
            return Err(Error::Unsupported(format!("recursion and closed form disagree at n = {n}")));
        }
        out.push((alpha(n), x));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesCheck {
    pub n: u64,
    #[serde(serialize_with = "ser_ratio")]
    pub partial_sum: BigRational,
    pub value: f64,
    /// `1/6 − partial_sum`, exact and then rounded.
    pub deviation: f64,
}

fn ser_ratio<S: serde::Serializer>(r: &BigRational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&r.to_string())
}

/// `Σ_{k=1}^{N} α_{k+1}/(1+α_{k+1}) · Π_{j=1}^{k} (1−α_j)/(1+α_j)`, exactly.
pub fn series_identity_check(n: u64) -> Result<SeriesCheck> {
    if n == 0 {
        return Err(Error::MalformedSpec {
            field: "n".into(),
            reason: "must be at least 1".into(),
        });
    }
    let one = BigRational::one();
    let mut prod = one.clone();
    let mut sum = BigRational::zero();
    for k in 1..=n {
        let a = alpha(k);
        prod = prod * (&one - &a) / (&one + &a);
        let b = alpha(k + 1);
        sum += &b / (&one + &b) * &prod;
    }
    let target = BigRational::new(BigInt::from(1), BigInt::from(6));
    let deviation = (&target - &sum).abs().to_f64().unwrap_or(f64::NAN);
    Ok(SeriesCheck {
        n,
        value: sum.to_f64().unwrap_or(f64::NAN),
        partial_sum: sum,
        deviation,
    })
}

/// The oscillating derivator resolved to depth `N`.
pub fn build_oscillator(depth: u64) -> Result<Derivator> {
    if depth < 2 {
        return Err(Error::MalformedSpec {
            field: "N".into(),
            reason: "depth must be at least 2".into(),
        });
    }
    Derivator::oscillator(depth, R)
}

/// `ψ(t) = g(t)/g̃(t)` read off the derivator (with `g(0) = g̃(0) = 0`).
pub fn psi(d: &Derivator, t: f64) -> f64 {
    d.g(t, Side::Value) / d.g_tilde(t, Side::Value)
}

/// `F(t) = ∫_{[0,t)} f dμ_g = ∫_0^t |f|` for the triangular wave, in closed
/// form. With `t ∈ [x_{k+1}, x_k]`, `h_k = x_k − x_{k+1}` and apex height `s_k`:
/// `½x_{k+1}^{4/3} + s_k (t − x_{k+1})² / h_k` up to the midpoint and
/// `½x_k^{4/3} − s_k (x_k − t)² / h_k` after it.
pub fn f_closed_form(t: f64, depth: u64) -> Result<f64> {
    if !(t > 0.0 && t <= 1.0) {
        return Err(Error::OutOfRange { y: t, lo: 0.0, hi: 1.0 });
    }
    let k = oscillator::segment_of(t);
    if k > 2 * depth {
        return Err(Error::OutOfRange {
            y: t,
            lo: oscillator::x_f64(2 * depth + 1),
            hi: 1.0,
        });
    }
    let (hi, lo) = (oscillator::x_f64(k), oscillator::x_f64(k + 1));
    let s = TriangularWave::new(R, depth).apex(k);
    let h = hi - lo;
    let p = 1.0 + R;
    Ok(if t <= lo + 0.5 * h {
        0.5 * lo.powf(p) + s * (t - lo) * (t - lo) / h
    } else {
        0.5 * hi.powf(p) - s * (hi - t) * (hi - t) / h
    })
}

/// `Q(x_k) = F(x_k)/g(x_k)`; undefined at odd `k`, where `g(x_k) = 0`.
pub fn oscillator_quotient(d: &Derivator, k: u64) -> Option<f64> {
    let x = oscillator::x_f64(k);
    let g = d.g(x, Side::Value);
    if g == 0.0 {
        return None;
    }
    let depth = d.oscillator_params().map_or(k, |p| p.depth);
    f_closed_form(x, depth).ok().map(|f| f / g)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WitnessVerdict {
    Divergent,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GrowthFit {
    /// Least-squares slope of `log q` against `log n`.
    pub exponent: f64,
    pub coefficient: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuotientSample {
    pub n: u64,
    pub x: f64,
    pub numerator: f64,
    pub denominator: f64,
    pub quotient: f64,
    /// Lower bound on the quotient promised by the construction, if any.
    pub lower_bound: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WitnessReport {
    pub sequence: String,
    /// A log-spaced selection of the computed samples.
    pub samples: Vec<QuotientSample>,
    #[serde(skip)]
    pub all: Vec<QuotientSample>,
    pub fit: GrowthFit,
    /// `Q(x_{16m})/Q(x_{2m})` for the largest available `m ≤ 1000`.
    pub ratio: Option<(u64, f64)>,
    pub threshold: f64,
    pub max_quotient: f64,
    /// First index at which the quotient exceeds the threshold.
    pub crossed_at: Option<u64>,
    pub verdict: WitnessVerdict,
}

fn fit(samples: &[QuotientSample], from: u64) -> GrowthFit {
    let pts: Vec<(f64, f64)> = samples
        .iter()
        .filter(|s| s.n >= from && s.quotient > 0.0)
        .map(|s| ((s.n as f64).ln(), s.quotient.ln()))
        .collect();
    let n = pts.len() as f64;
    if pts.len() < 2 {
        return GrowthFit {
            exponent: f64::NAN,
            coefficient: f64::NAN,
        };
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let exponent = sxy / sxx;
    GrowthFit {
        exponent,
        coefficient: (my - exponent * mx).exp(),
    }
}

fn log_spaced(all: &[QuotientSample]) -> Vec<QuotientSample> {
    let last = all.last().map_or(0, |s| s.n);
    all.iter()
        .filter(|s| s.n.is_power_of_two() || s.n == last || (s.n % 1000 == 0 && s.n <= 16_000))
        .cloned()
        .collect()
}

/// `Q(x_{2n})` for `n ≤ N`, from the closed form of `F` and the derivator's
/// values of `g`.
pub fn oscillator_report(d: &Derivator, threshold: f64) -> Result<WitnessReport> {
    let depth = d
        .oscillator_params()
        .ok_or_else(|| Error::Unsupported("oscillator_report needs the oscillating derivator".into()))?
        .depth;
    if depth < 4 {
        return Err(Error::MalformedSpec {
            field: "N".into(),
            reason: "depth must be at least 4".into(),
        });
    }
    let mut all = Vec::with_capacity(depth as usize);
    for n in 1..=depth {
        let x = oscillator::x_f64(2 * n);
        let num = f_closed_form(x, depth)?;
        let den = d.g(x, Side::Value);
        all.push(QuotientSample {
            n,
            x,
            numerator: num,
            denominator: den,
            quotient: num / den,
            lower_bound: None,
        });
    }
    let q = |n: u64| all[(n - 1) as usize].quotient;
    let m = (depth / 8).min(1000);
    let ratio = (m >= 1).then(|| (m, q(8 * m) / q(m)));
    let max_quotient = all.iter().map(|s| s.quotient).fold(f64::NEG_INFINITY, f64::max);
    let crossed_at = all.iter().find(|s| s.quotient > threshold).map(|s| s.n);
    let divergent = ratio.is_some_and(|(_, r)| (1.9..=2.1).contains(&r)) && crossed_at.is_some();
    Ok(WitnessReport {
        sequence: "x_{2n}".into(),
        samples: log_spaced(&all),
        fit: fit(&all, 4),
        all,
        ratio,
        threshold,
        max_quotient,
        crossed_at,
        verdict: if divergent {
            WitnessVerdict::Divergent
        } else {
            WitnessVerdict::Inconclusive
        },
    })
}

/// A monotone sequence approaching `t`, plus the quotient level that counts as
/// divergence.
#[derive(Debug, Clone, PartialEq)]
pub struct Approach {
    pub points: Vec<f64>,
    pub threshold: f64,
}

impl Approach {
    /// `x_{2n}`, `n = 1..=count+1`, towards the oscillator's accumulation point.
    pub fn oscillator(count: u64) -> Self {
        Approach {
            points: (1..=count + 1).map(|n| oscillator::x_f64(2 * n)).collect(),
            threshold: 10.0,
        }
    }
}

fn validate(d: &Derivator, t: f64, xs: &[f64]) -> Result<()> {
    let bad = |m: &str| Err(Error::SequenceUnsuitable(m.to_string()));
    if xs.len() < 3 {
        return bad("need at least three points");
    }
    let (a, b) = d.domain();
    if xs.iter().any(|&x| x < a || x > b || x == t) {
        return bad("points must lie in the domain and differ from t");
    }
    let above = xs[0] > t;
    for w in xs.windows(2) {
        let toward = if above { w[1] < w[0] && w[1] > t } else { w[1] > w[0] && w[1] < t };
        if !toward {
            return bad("points must approach t monotonically from one side");
        }
    }
    if d.jump_at(t) != 0.0 {
        return Err(Error::PhiNotZero { t, phi: 1.0 });
    }
    let gt = d.g(t, Side::Value);
    let dist: Vec<f64> = xs.iter().map(|&x| (d.g(x, Side::Value) - gt).abs()).collect();
    if dist.iter().any(|&v| v == 0.0) || dist.windows(2).any(|w| w[1] >= w[0]) {
        return bad("|g(x_n) − g(t)| must be positive and strictly decreasing");
    }
    let g: Vec<f64> = xs.iter().map(|&x| d.g(x, Side::Value)).collect();
    let inc = g[1] > g[0];
    if g.windows(2).any(|w| (w[1] > w[0]) != inc) {
        return bad("g(x_n) must be strictly monotone");
    }
    Ok(())
}

/// The pieces of the constructed integrand on the segments between
/// consecutive points, and the integral of each against `μ_g`.
struct Segment {
    lo: f64,
    hi: f64,
    pw: Piecewise,
    integral: f64,
}

/// Builds a `g`-continuous `f` whose primitive has unbounded difference
/// quotients along `approach`, following the optimality argument: on each
/// segment `f ≈ M_n (χ_{A⁺} − χ_{A⁻})` with
/// `M_n = √(|Δg| / Δg̃)`, approximated to `ε_n / (2 M_n)` in `L¹_g`,
/// `ε_n = |Δg|`. The pieces vanish at the segment ends.
pub fn necessity_witness(
    d: &Derivator,
    t: f64,
    approach: &Approach,
    tol: f64,
) -> Result<(PiecewiseFunction, WitnessReport)> {
    let p = phi(d, t, tol)?;
    if p.certified && p.value > 0.0 {
        return Err(Error::PhiNotZero { t, phi: p.value });
    }
    let xs = &approach.points;
    validate(d, t, xs)?;
    let hahn = hahn_decomposition(d);
    let var = d.variation_derivator()?;
    let mut segments: Vec<Segment> = Vec::with_capacity(xs.len() - 1);
    let mut ms = Vec::with_capacity(xs.len() - 1);
    let mut epss = Vec::with_capacity(xs.len() - 1);
    for (n, w) in xs.windows(2).enumerate() {
        let (lo, hi) = if w[0] < w[1] { (w[0], w[1]) } else { (w[1], w[0]) };
        let dg = (d.g(w[1], Side::Value) - d.g(w[0], Side::Value)).abs();
        let dv = d.g_tilde(hi, Side::Value) - d.g_tilde(lo, Side::Value);
        let m = (dg / dv).sqrt();
        let eps = dg;
        ms.push(m);
        epss.push(eps);
        let local = var.restrict(lo, hi)?;
        let seg = IntervalSet::half_open(lo, hi);
        let boundary = if local.jump_at(lo) != 0.0 {
            Boundary::JumpStart { beta: 0.0 }
        } else {
            Boundary::Clamped { alpha: 0.0, beta: 0.0 }
        };
        let budget = eps / (2.0 * m);
        let part = |set: &IntervalSet, range: (f64, f64), sign: f64| -> Result<Piecewise> {
            let target = PiecewiseFunction::Indicator(set.intersection(&seg));
            let target = if sign > 0.0 {
                target
            } else {
                let w = target.window(lo, hi, None)?;
                PiecewiseFunction::Piecewise(w.pw.scale(-1.0))
            };
            let opts = ApproxOptions {
                range: Some(range),
                ..Default::default()
            };
            let r = approximate_in_l1g_with(&target, &local, budget, boundary, opts).map_err(|e| {
                Error::SequenceUnsuitable(format!("segment {} [{lo}, {hi}] could not be approximated: {e}", n + 1))
            })?;
            Ok(r.h.window(lo, hi, None)?.pw)
        };
        let u = part(&hahn.positive, (0.0, 1.0), 1.0)?;
        let v = part(&hahn.negative, (-1.0, 0.0), -1.0)?;
        let pw = Piecewise::linear_combination(&[(m, &u), (m, &v)])?;
        let integral = integrate(&PiecewiseFunction::Piecewise(pw.clone()), d, &seg, MeasureKind::Signed)?.value;
        segments.push(Segment { lo, hi, pw, integral });
    }
    let f = assemble(d, &segments)?;

    // F(x_n) − F(t) = Σ_{k ≥ n} ∫_{segment k} f dμ_g, since f vanishes
    // between t and the last point.
    let above = xs[0] > t;
    let gt = d.g(t, Side::Value);
    let count = segments.len();
    let mut all = Vec::with_capacity(count);
    let mut tail = 0.0;
    let mut lower = 0.0;
    let mut rows = Vec::with_capacity(count);
    for k in (0..count).rev() {
        tail += segments[k].integral;
        let dv = d.g_tilde(segments[k].hi, Side::Value) - d.g_tilde(segments[k].lo, Side::Value);
        lower += ms[k] * dv - epss[k];
        rows.push((k, tail, lower));
    }
    rows.reverse();
    for (k, tail, lower) in rows {
        let x = xs[k];
        let den = d.g(x, Side::Value) - gt;
        let num = if above { tail } else { -tail };
        all.push(QuotientSample {
            n: k as u64 + 1,
            x,
            numerator: num,
            denominator: den,
            quotient: num / den,
            lower_bound: Some(lower / den.abs()),
        });
    }
    // The last few quotients only see a short remainder of the sequence.
    let usable = &all[..count.saturating_sub(count / 4).max(1)];
    let max_quotient = usable.iter().map(|s| s.quotient.abs()).fold(0.0, f64::max);
    let crossed_at = usable.iter().find(|s| s.quotient.abs() > approach.threshold).map(|s| s.n);
    let bounds_hold = all.iter().all(|s| s.quotient.abs() >= s.lower_bound.unwrap_or(0.0) - 1e-9);
    let verdict = if crossed_at.is_some() && bounds_hold {
        WitnessVerdict::Divergent
    } else {
        WitnessVerdict::Inconclusive
    };
    let report = WitnessReport {
        sequence: format!("{} points approaching t = {t}", xs.len()),
        samples: log_spaced(&all),
        fit: fit(usable, 2),
        all,
        ratio: None,
        threshold: approach.threshold,
        max_quotient,
        crossed_at,
        verdict,
    };
    Ok((f, report))
}

/// Concatenates the segment pieces over the whole domain, zero elsewhere.
fn assemble(d: &Derivator, segments: &[Segment]) -> Result<PiecewiseFunction> {
    let (a, b) = d.domain();
    let mut order: Vec<&Segment> = segments.iter().collect();
    order.sort_by(|x, y| x.lo.total_cmp(&y.lo));
    let mut knots = vec![a];
    let mut pieces = Vec::new();
    let mut values = vec![0.0];
    let mut push = |k: f64, p: Poly, v: f64, knots: &mut Vec<f64>, values: &mut Vec<f64>| {
        if k > *knots.last().expect("nonempty") {
            pieces.push(p);
            knots.push(k);
            values.push(v);
        }
    };
    for s in order {
        push(s.lo, Poly::zero(), 0.0, &mut knots, &mut values);
        let k = s.pw.knots();
        for i in 0..k.len() - 1 {
            let v = if i + 1 == k.len() - 1 { 0.0 } else { s.pw.values()[i + 1] };
            push(k[i + 1], s.pw.pieces()[i].clone(), v, &mut knots, &mut values);
        }
    }
    push(b, Poly::zero(), 0.0, &mut knots, &mut values);
    if knots.len() == 1 {
        return Ok(PiecewiseFunction::Piecewise(Piecewise::constant(a, b, 0.0)?));
    }
    Ok(PiecewiseFunction::Piecewise(Piecewise::new(knots, pieces, values)?))
}

/// Rows `(t, g, g̃, f, F, Q)` on a uniform grid of `[lo, hi]`; `Q` is empty
/// where `g = 0`.
pub fn figure_csv(d: &Derivator, lo: f64, hi: f64, points: usize) -> Result<String> {
    let depth = d
        .oscillator_params()
        .ok_or_else(|| Error::Unsupported("figures need the oscillating derivator".into()))?
        .depth;
    let wave = TriangularWave::new(R, depth);
    let mut s = String::from("t,g,g_tilde,f,F,Q\n");
    let points = points.max(2);
    for i in 0..points {
        let t = lo + (hi - lo) * i as f64 / (points - 1) as f64;
        let g = d.g(t, Side::Value);
        let gt = d.g_tilde(t, Side::Value);
        let f = wave.eval(t);
        let big_f = if t > 0.0 { f_closed_form(t, depth).unwrap_or(f64::NAN) } else { 0.0 };
        let q = if g != 0.0 { format!("{:.16e}", big_f / g) } else { String::new() };
        let _ = writeln!(s, "{t:.16e},{g:.16e},{gt:.16e},{f:.16e},{big_f:.16e},{q}");
    }
    Ok(s)
}

/// The three figure datasets: the derivator on `[0, 1]`, and two zooms towards
/// the accumulation point.
pub const FIGURES: [(&str, f64, f64); 3] = [
    ("figure1.csv", 0.0, 1.0),
    ("figure2.csv", 0.0, 0.1),
    ("figure3.csv", 0.0, 0.05),
];

pub fn write_figures(d: &Derivator, dir: &Path, points: usize) -> io::Result<Vec<String>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for (name, lo, hi) in FIGURES {
        let csv = figure_csv(d, lo, hi, points).map_err(|e| io::Error::new(io::ErrorKind::InvalidInput, e.to_string()))?;
        let path = dir.join(name);
        std::fs::write(&path, csv)?;
        written.push(path.display().to_string());
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::FromPrimitive;

    #[test]
    fn golden_terms() {
        let s = example_sequences(10).unwrap();
        let r = |p, q| BigRational::new(BigInt::from(p), BigInt::from(q));
        assert_eq!(s[1].1, r(2, 3));
        assert_eq!(s[7].1, r(2, 45));
        assert_eq!(s[9].1, r(1, 36));
    }

    #[test]
    fn first_partial_sum() {
        let c = series_identity_check(1).unwrap();
        assert_eq!(c.partial_sum, BigRational::new(BigInt::from(1), BigInt::from(9)));
        let c = series_identity_check(1000).unwrap();
        let tail = BigRational::from_f64(1.0 / (3.0 * 1001.0 * 1002.0)).unwrap();
        assert!((c.deviation - tail.to_f64().unwrap()).abs() < 1e-15);
    }

    #[test]
    fn f_at_sequence_points() {
        assert_eq!(f_closed_form(1.0, 10).unwrap(), 0.5);
        let x2 = 2.0f64 / 3.0;
        assert!((f_closed_form(x2, 10).unwrap() - 0.5 * x2.powf(4.0 / 3.0)).abs() < 1e-15);
        assert!(f_closed_form(0.0, 10).is_err());
    }

    #[test]
    fn quotient_first_value() {
        let d = build_oscillator(10).unwrap();
        let q = oscillator_quotient(&d, 2).unwrap();
        assert!((q - (2.0f64 / 3.0).cbrt()).abs() < 1e-12);
        assert!(oscillator_quotient(&d, 3).is_none());
    }

    #[test]
    fn witness_refused_where_phi_is_one() {
        let tent = Derivator::piecewise_affine(vec![0.0, 1.0, 2.0], vec![1.0, -1.0], vec![0.0; 3], 0.0).unwrap();
        let a = Approach {
            points: vec![2.0, 1.5, 1.25, 1.125],
            threshold: 10.0,
        };
        assert!(matches!(necessity_witness(&tent, 1.0, &a, 1e-6), Err(Error::PhiNotZero { .. })));
    }

    #[test]
    fn oscillator_witness_diverges() {
        let d = build_oscillator(2010).unwrap();
        let (f, r) = necessity_witness(&d, 0.0, &Approach::oscillator(2000), 1e-6).unwrap();
        eprintln!("{:?} max {} crossed {:?} fit {:?}", r.verdict, r.max_quotient, r.crossed_at, r.fit);
        assert_eq!(r.verdict, WitnessVerdict::Divergent);
        assert_eq!(crate::function::Evaluable::value(&f, 0.0), 0.0);
    }
}
