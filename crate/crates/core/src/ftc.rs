//! Executable checks of the fundamental theorems: derivative of the integral
//! almost everywhere and everywhere, integral of the derivative, and a
//! falsifier for g-absolute continuity.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::continuity::{check_g_continuity, ContinuityOptions, Mode, Verdict};
use crate::derivative::{g_derivative, g_derivative_with, phi, Sampling};
use crate::derivator::{Class, Derivator, PointClass, Side};
use crate::error::{Error, Result};
use crate::function::{Evaluable, PiecewiseFunction, Window};
use crate::integral::{primitive, primitive_of_window};
use crate::measure::MeasureKind;
use crate::poly::{Piecewise, Poly};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Ae,
    Barrow,
    Everywhere,
    Pointwise,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FtcRecord {
    pub t: f64,
    pub class: PointClass,
    pub phi: Option<f64>,
    pub expected: f64,
    pub estimate: Option<f64>,
    pub error: Option<f64>,
    pub pass: bool,
}

/// A family of disjoint open intervals with small total `g`-variation but
/// large total increment of `F`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AcWitness {
    pub intervals: Vec<(f64, f64)>,
    pub delta: f64,
    pub variation: f64,
    pub increment: f64,
    pub eps: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FtcReport {
    pub suite: Suite,
    pub n_points: usize,
    pub records: Vec<FtcRecord>,
    pub max_error: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub witness: Option<AcWitness>,
}

impl FtcReport {
    fn new(suite: Suite, mut records: Vec<FtcRecord>, tolerance: f64, witness: Option<AcWitness>) -> Self {
        records.sort_by(|a, b| a.t.total_cmp(&b.t));
        let max_error = records.iter().filter_map(|r| r.error).fold(0.0, f64::max);
        let pass = records.iter().all(|r| r.pass);
        FtcReport {
            suite,
            n_points: records.len(),
            records,
            max_error,
            tolerance,
            pass,
            witness,
        }
    }

    /// Plain-text table, one row per point.
    pub fn to_table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "{:>24}  {:<18} {:>24} {:>24} {:>10}  ok",
            "t", "class", "expected", "estimate", "error"
        );
        for r in &self.records {
            let class = match r.class.class {
                Class::ConstancyInterior(i) => format!("constancy[{i}]"),
                c => format!("{c:?}"),
            };
            let est = r.estimate.map_or("-".to_string(), |v| format!("{v:.16e}"));
            let err = r.error.map_or("-".to_string(), |v| format!("{v:.2e}"));
            let _ = writeln!(
                s,
                "{:>24.16e}  {:<18} {:>24.16e} {:>24} {:>10}  {}",
                r.t,
                class,
                r.expected,
                est,
                err,
                if r.pass { "yes" } else { "NO" }
            );
        }
        let _ = writeln!(
            s,
            "{} points, max error {:.3e} (tolerance {:.1e}): {}",
            self.n_points,
            self.max_error,
            self.tolerance,
            if self.pass { "PASS" } else { "FAIL" }
        );
        s
    }
}

/// Points spread according to `|μ_g|`: the quantiles of `g̃` at the cell
/// midpoints of a uniform grid, plus every atom.
pub fn mass_samples(d: &Derivator, n: usize) -> Vec<f64> {
    let (a, b) = d.domain();
    let lo = d.g_tilde(a, Side::Value);
    let total = d.g_tilde(b, Side::Value) - lo;
    let mut ts: Vec<f64> = (0..n)
        .filter_map(|i| d.quantile(MeasureKind::Total, lo + total * (i as f64 + 0.5) / n as f64).ok())
        .collect();
    ts.extend(d.atoms().into_iter().map(|(t, _)| t).filter(|&t| t < b));
    ts.sort_by(f64::total_cmp);
    ts.dedup();
    ts
}

fn discontinuous(f: &dyn Evaluable, t: f64) -> bool {
    let v = f.value(t);
    f.left_limit(t) != v || f.right_limit(t) != v
}

/// `F'_g = f` at `n` points spread by `|μ_g|` plus every atom, skipping the
/// null set `N_g ∪ C_g`, the unresolved tail of an oscillator and non-atom
/// discontinuities of `f`. At atoms equality must be exact.
pub fn check_ftc_ae(f: &PiecewiseFunction, d: &Derivator, n: usize, tol: f64) -> Result<FtcReport> {
    let big_f = primitive(f, d)?;
    let tail = d.tail_end();
    let mut records = Vec::new();
    for t in mass_samples(d, n) {
        let class = d.classify(t);
        let atom = d.jump_at(t) != 0.0;
        if matches!(class.class, Class::NPlus | Class::NMinus | Class::ConstancyInterior(_))
            || tail.is_some_and(|e| t < e)
            || (!atom && discontinuous(f, t))
        {
            continue;
        }
        let expected = f.value(t);
        let est = match g_derivative(&big_f, d, t, tol) {
            Ok(e) => e.value,
            Err(Error::DegenerateQuotient { .. }) => None,
            Err(e) => return Err(e),
        };
        let error = est.map(|v| (v - expected).abs());
        let pass = if atom {
            est == Some(expected)
        } else {
            error.is_some_and(|e| e <= tol)
        };
        records.push(FtcRecord {
            t,
            class,
            phi: None,
            expected,
            estimate: est,
            error,
            pass,
        });
    }
    Ok(FtcReport::new(Suite::Ae, records, tol, None))
}

/// The exact `g`-derivative of a piecewise-polynomial `F`: the classical
/// derivative over the slope on each segment, the jump quotient at atoms, and
/// zero on constancy segments (which carry no mass).
pub fn exact_g_derivative(pw: &Piecewise, d: &Derivator) -> Result<Piecewise> {
    let mut knots: Vec<f64> = d.knots().iter().chain(pw.knots()).copied().collect();
    knots.sort_by(f64::total_cmp);
    knots.dedup();
    let (a, b) = d.domain();
    knots.retain(|&k| k >= a && k <= b);
    let pieces: Vec<Poly> = knots
        .windows(2)
        .map(|w| {
            let mid = 0.5 * (w[0] + w[1]);
            let s = d.slopes()[d.segment_index(mid)];
            if s == 0.0 {
                Poly::zero()
            } else {
                pw.piece_around(mid).derivative().scale(1.0 / s)
            }
        })
        .collect();
    let values = knots
        .iter()
        .enumerate()
        .map(|(i, &c)| {
            let j = d.jump_at(c);
            if j != 0.0 {
                (pw.right_limit(c) - pw.value(c)) / j
            } else {
                pieces[i.min(pieces.len() - 1)].eval(c)
            }
        })
        .collect();
    Piecewise::new(knots, pieces, values)
}

/// Reconstructs `F(t) − F(a)` as `∫_{[a,t)} F'_g dμ_g` on a 257-point grid.
/// A failing reconstruction is accompanied by an absolute-continuity
/// falsifier witness when one is found.
pub fn check_barrow(big_f: &PiecewiseFunction, d: &Derivator, tol: f64) -> Result<FtcReport> {
    if d.tail_end().is_some() {
        return Err(Error::Unsupported(
            "integral-of-derivative reconstruction needs a finitely resolved derivator".into(),
        ));
    }
    let (a, b) = d.domain();
    let pw = big_f.window(a, b, None)?.pw;
    let deriv = exact_g_derivative(&pw, d)?;
    // Cross-check the exact derivative against the limit definition where
    // the measure lives.
    let mut records = Vec::new();
    for t in mass_samples(d, 16) {
        let class = d.classify(t);
        if d.jump_at(t) != 0.0
            || matches!(class.class, Class::NPlus | Class::NMinus | Class::ConstancyInterior(_))
            || discontinuous(&deriv, t)
            || discontinuous(&pw, t)
        {
            continue;
        }
        let est = g_derivative(&pw, d, t, 1e-6)?;
        if !est.exists {
            return Err(Error::NotDifferentiableAlmostEverywhere { t });
        }
        let expected = deriv.value(t);
        let v = est.value.unwrap_or(f64::NAN);
        let err = (v - expected).abs();
        records.push(FtcRecord {
            t,
            class,
            phi: None,
            expected,
            estimate: Some(v),
            error: None,
            pass: err <= 1e-6 * (1.0 + expected.abs()),
        });
    }
    let g = primitive_of_window(
        &Window {
            pw: deriv,
            unresolved: None,
        },
        d,
    )?;
    let f0 = pw.value(a);
    for i in 0..=256 {
        let t = if i == 256 { b } else { a + (b - a) * i as f64 / 256.0 };
        let expected = pw.value(t) - f0;
        let est = g.value(t);
        let err = (est - expected).abs();
        records.push(FtcRecord {
            t,
            class: d.classify(t),
            phi: None,
            expected,
            estimate: Some(est),
            error: Some(err),
            pass: err <= tol,
        });
    }
    let failed = records.iter().any(|r| !r.pass);
    let witness = if failed {
        let worst = records.iter().filter_map(|r| r.error).fold(0.0, f64::max);
        ac_falsifier(big_f, d, 0.5 * worst, 40)
    } else {
        None
    };
    Ok(FtcReport::new(Suite::Barrow, records, tol, witness))
}

/// Searches for disjoint open intervals `(a_i, b_i)` with
/// `Σ (g̃(b_i) − g̃(a_i)) < δ` but `Σ |F(b_i) − F(a_i)| ≥ eps`, for
/// `δ = var·2^{-j}`, `j < budget`. Returns the witness at the smallest `δ` if
/// every `δ` admits one, and `None` otherwise. `None` does not prove absolute
/// continuity.
pub fn ac_falsifier(big_f: &PiecewiseFunction, d: &Derivator, eps: f64, budget: u32) -> Option<AcWitness> {
    let (a, b) = d.domain();
    let len = b - a;
    let mut marks = big_f.breakpoints_in(a, b);
    marks.extend_from_slice(d.knots());
    for i in 0..=64 {
        marks.push(a + len * i as f64 / 64.0);
    }
    marks.sort_by(f64::total_cmp);
    marks.dedup();
    let mut cands: Vec<(f64, f64, f64, f64)> = Vec::new();
    for &m in &marks {
        for j in 1..=50 {
            let h = len * 0.5f64.powi(j);
            let (lo, hi) = ((m - h).max(a), (m + h).min(b));
            for (u, v) in [(lo, hi), (lo, m), (m, hi)] {
                if u < v {
                    let var = d.g_tilde(v, Side::Value) - d.g_tilde(u, Side::Value);
                    let inc = (big_f.value(v) - big_f.value(u)).abs();
                    cands.push((u, v, var, inc));
                }
            }
        }
    }
    let total = d.g_tilde(b, Side::Value) - d.g_tilde(a, Side::Value);
    let mut last = None;
    for j in 0..budget {
        let delta = total * 0.5f64.powi(j as i32);
        let mut pool: Vec<&(f64, f64, f64, f64)> = cands.iter().filter(|c| c.2 < delta && c.3 > 0.0).collect();
        pool.sort_by(|x, y| {
            let rx = x.3 / x.2.max(f64::MIN_POSITIVE);
            let ry = y.3 / y.2.max(f64::MIN_POSITIVE);
            ry.total_cmp(&rx).then(y.3.total_cmp(&x.3))
        });
        let mut chosen: Vec<(f64, f64)> = Vec::new();
        let (mut var, mut inc) = (0.0, 0.0);
        for c in pool {
            if var + c.2 >= delta || chosen.iter().any(|&(u, v)| c.0 < v && u < c.1) {
                continue;
            }
            chosen.push((c.0, c.1));
            var += c.2;
            inc += c.3;
        }
        if inc < eps {
            return None;
        }
        chosen.sort_by(|x, y| x.0.total_cmp(&y.0));
        last = Some(AcWitness {
            intervals: chosen,
            delta,
            variation: var,
            increment: inc,
            eps,
        });
    }
    last
}

fn continuity_mode(d: &Derivator, c: &PointClass, t: f64) -> Option<Mode> {
    let (a, b) = d.domain();
    match c.class {
        Class::ConstancyInterior(_) => None,
        _ if t == a => Some(Mode::Right),
        _ if t == b => Some(Mode::Left),
        Class::Regular => Some(Mode::TwoSided),
        Class::NMinus | Class::Jump => Some(Mode::Left),
        Class::NPlus => Some(Mode::Right),
        Class::LeftEndpoint => Some(Mode::Right),
        Class::RightEndpoint => Some(Mode::Left),
    }
}

/// Every knot, every constancy component (endpoints and midpoint) and `extra`
/// seeded uniform points.
pub fn structural_points(d: &Derivator, extra: usize, seed: u64) -> Vec<f64> {
    let (a, b) = d.domain();
    let mut pts: Vec<f64> = d.knots().to_vec();
    for (lo, hi) in d.components() {
        pts.extend([lo, 0.5 * (lo + hi), hi]);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..extra {
        pts.push(rng.gen_range(a..=b));
    }
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

/// Everywhere version: `F'_g(t) = f(t*)` at every structural point plus
/// `n_random` seeded points, after verifying `φ > 0` and the g-continuity of
/// `f` at each of them.
pub fn check_ftc_everywhere(
    f: &PiecewiseFunction,
    d: &Derivator,
    tol: f64,
    n_random: usize,
    seed: u64,
) -> Result<FtcReport> {
    const PHI_FLOOR: f64 = 1e-2;
    let pts = structural_points(d, n_random, seed);
    let opts = ContinuityOptions::default();
    for &t in &pts {
        let p = phi(d, t, tol)?;
        if p.value <= 0.0 || (!p.certified && p.value <= PHI_FLOOR) {
            return Err(Error::PhiHypothesisViolated { t, phi: p.value });
        }
        let c = d.classify(t);
        if let Some(mode) = continuity_mode(d, &c, t) {
            if let Verdict::Fail { witness, .. } = check_g_continuity(f, d, t, mode, &opts)? {
                return Err(Error::GContinuityViolated { t, witness });
            }
        }
    }
    let records = pointwise_records(f, d, &pts, tol)?;
    Ok(FtcReport::new(Suite::Everywhere, records, tol, None))
}

/// The same comparison without the hypothesis gates, for negative controls:
/// every point gets a record, and a missing derivative is a failing record.
pub fn check_ftc_pointwise(f: &PiecewiseFunction, d: &Derivator, points: &[f64], tol: f64) -> Result<FtcReport> {
    let records = pointwise_records(f, d, points, tol)?;
    Ok(FtcReport::new(Suite::Pointwise, records, tol, None))
}

fn pointwise_records(f: &PiecewiseFunction, d: &Derivator, points: &[f64], tol: f64) -> Result<Vec<FtcRecord>> {
    let big_f = primitive(f, d)?;
    let (a, _) = d.domain();
    let mut records = Vec::new();
    for &t in points {
        let class = d.classify_point(t)?;
        let p = phi(d, t, tol)?;
        let expected = f.value(class.t_star);
        // At an oscillator's accumulation point the knots are arbitrarily
        // close; sample across them instead of stopping at the first one.
        let est = if d.tail_end().is_some() && t == a {
            let s = Sampling {
                max_delta: 0.5,
                steps: 48,
            };
            g_derivative_with(&GapFree(&big_f), d, t, tol, s)
        } else {
            g_derivative(&big_f, d, t, tol)
        };
        let est = match est {
            Ok(e) => e.value,
            Err(Error::DegenerateQuotient { .. }) => None,
            Err(e) => return Err(e),
        };
        let error = est.map(|v| (v - expected).abs());
        records.push(FtcRecord {
            t,
            class,
            phi: Some(p.value),
            expected,
            estimate: est,
            error,
            pass: error.is_some_and(|e| e <= tol),
        });
    }
    Ok(records)
}

/// Hides the knot structure of `F` so that sampling spans many pieces.
struct GapFree<'a>(&'a dyn Evaluable);

impl Evaluable for GapFree<'_> {
    fn value(&self, t: f64) -> f64 {
        self.0.value(t)
    }
    fn right_limit(&self, t: f64) -> f64 {
        self.0.right_limit(t)
    }
    fn left_limit(&self, t: f64) -> f64 {
        self.0.left_limit(t)
    }
    fn gap(&self, _t: f64, _right: bool) -> Option<f64> {
        None
    }
}

/// Seeded uniform points in `[a, b]`.
pub fn random_points(d: &Derivator, n: usize, seed: u64) -> Vec<f64> {
    let (a, b) = d.domain();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.gen_range(a..=b)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tent() -> Derivator {
        Derivator::piecewise_affine(vec![0.0, 1.0, 2.0], vec![1.0, -1.0], vec![0.0; 3], 0.0).unwrap()
    }

    #[test]
    fn ae_on_tent_with_atom() {
        let d = Derivator::piecewise_affine(vec![0.0, 1.0, 2.0], vec![1.0, -1.0], vec![0.0, 2.0, 0.0], 0.0).unwrap();
        let f = PiecewiseFunction::linear(&[(0.0, 1.0), (2.0, 3.0)]).unwrap();
        let r = check_ftc_ae(&f, &d, 32, 1e-6).unwrap();
        assert!(r.pass, "{}", r.to_table());
        assert!(r.records.iter().any(|x| x.t == 1.0));
    }

    #[test]
    fn barrow_reconstructs_square() {
        let d = tent();
        let f = PiecewiseFunction::Piecewise(
            Piecewise::new(vec![0.0, 2.0], vec![Poly::new(0.0, vec![0.0, 0.0, 1.0])], vec![0.0, 4.0]).unwrap(),
        );
        let r = check_barrow(&f, &d, 1e-9).unwrap();
        assert!(r.pass, "{}", r.to_table());
    }

    #[test]
    fn falsifier_finds_cantor_like_jump() {
        // F jumps where g is continuous: not g-absolutely continuous.
        let d = Derivator::identity(0.0, 1.0).unwrap();
        let f = PiecewiseFunction::Indicator("[0.5,1]".parse().unwrap());
        let w = ac_falsifier(&f, &d, 0.5, 30).expect("witness");
        assert!(w.variation < w.delta && w.increment >= 0.5);
    }

    #[test]
    fn everywhere_on_tent() {
        let d = tent();
        let f = PiecewiseFunction::linear(&[(0.0, 1.0), (2.0, -1.0)]).unwrap();
        let r = check_ftc_everywhere(&f, &d, 1e-6, 16, 7).unwrap();
        assert!(r.pass, "{}", r.to_table());
    }
}
