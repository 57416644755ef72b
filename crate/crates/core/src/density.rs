//! Approximation of `L¹_g` functions by `g`-continuous ones, for nondecreasing
//! derivators.
//!
//! Every approximant has the form `h = Q ∘ g` with `Q` a clamped piecewise
//! linear interpolant. Since `|Q(g(s)) − Q(g(t))|` is controlled by
//! `|g(s) − g(t)| = ρ_g(s, t)`, such an `h` is `g`-continuous.

use serde::Serialize;

use crate::derivator::{Derivator, Side};
use crate::error::{Error, Result};
use crate::function::{Evaluable, PiecewiseFunction};
use crate::integral::{l1g_distance, Integral};
use crate::interval::IntervalSet;
use crate::measure::MeasureKind;
use crate::poly::Piecewise;

fn require_nondecreasing(d: &Derivator) -> Result<()> {
    if d.is_nondecreasing() {
        Ok(())
    } else {
        Err(Error::NondecreasingRequired)
    }
}

/// `g†(y) = inf{t : g(t) ≥ y}`. Values inside a jump gap map to the jump.
pub fn g_dagger(d: &Derivator, y: f64) -> Result<f64> {
    require_nondecreasing(d)?;
    d.quantile(MeasureKind::Signed, y)
}

/// The interpolant `P_A` through `nodes`, constant outside the first and last
/// abscissa. Repeated nodes are merged; a repeated abscissa with two
/// different ordinates is an error.
pub fn pa_interpolant(nodes: &[(f64, f64)]) -> Result<PiecewiseFunction> {
    Ok(PiecewiseFunction::Piecewise(interpolant(nodes)?))
}

fn interpolant(nodes: &[(f64, f64)]) -> Result<Piecewise> {
    let mut v = nodes.to_vec();
    if v.is_empty() {
        return Err(Error::MalformedSpec {
            field: "nodes".into(),
            reason: "empty node set".into(),
        });
    }
    if v.iter().any(|p| !p.0.is_finite() || !p.1.is_finite()) {
        return Err(Error::MalformedSpec {
            field: "nodes".into(),
            reason: "non-finite node".into(),
        });
    }
    v.sort_by(|p, q| p.0.total_cmp(&q.0));
    for w in v.windows(2) {
        if w[0].0 == w[1].0 && w[0].1 != w[1].1 {
            return Err(Error::DuplicateAbscissa { x: w[0].0 });
        }
    }
    v.dedup();
    if v.len() == 1 {
        let (x, y) = v[0];
        return Piecewise::constant(x - 1.0, x + 1.0, y);
    }
    Piecewise::linear(&v)
}

/// Boundary behaviour of the approximant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "boundary", rename_all = "snake_case")]
pub enum Boundary {
    Free,
    /// `h(a) = α`, `h(b) = β`; needs `a ∉ D_g` and `g(a) < g(b)`.
    Clamped { alpha: f64, beta: f64 },
    /// `h(a) = f(a)`, `h(b) = β`; needs `a ∈ D_g`.
    JumpStart { beta: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Approximation {
    #[serde(skip)]
    pub h: PiecewiseFunction,
    /// The outer interpolant `Q`, as `(y, Q(y))` nodes.
    pub nodes: Vec<(f64, f64)>,
    /// Measured `‖f − h‖_{L¹_g}` on the whole domain.
    pub error: Integral,
    pub eps: f64,
    /// `ℓ = g†(g(b))`: `h` is constant on `[ℓ, b]`.
    pub landmark: f64,
    pub refinements: u32,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ApproxOptions {
    /// Declared range `[c, d]` of the target; `h` is clamped into it.
    pub range: Option<(f64, f64)>,
    /// The node grid starts with 4 cells and doubles at most this many times.
    pub max_refinements: u32,
}

impl Default for ApproxOptions {
    fn default() -> Self {
        ApproxOptions {
            range: None,
            max_refinements: 18,
        }
    }
}

pub fn approximate_in_l1g(f: &PiecewiseFunction, d: &Derivator, eps: f64, boundary: Boundary) -> Result<Approximation> {
    approximate_in_l1g_with(f, d, eps, boundary, ApproxOptions::default())
}

pub fn approximate_in_l1g_with(
    f: &PiecewiseFunction,
    d: &Derivator,
    eps: f64,
    boundary: Boundary,
    opts: ApproxOptions,
) -> Result<Approximation> {
    require_nondecreasing(d)?;
    if !(eps > 0.0) {
        return Err(Error::MalformedSpec {
            field: "eps".into(),
            reason: "must be positive".into(),
        });
    }
    let (a, b) = d.domain();
    let y0 = d.g(a, Side::Value);
    let y1 = d.g(b, Side::Value);
    let clamp = |v: f64| match opts.range {
        Some((c, hi)) => v.clamp(c, hi),
        None => v,
    };
    let in_range = |v: f64| opts.range.is_none_or(|(c, hi)| v >= c && v <= hi);
    let ja = d.jump_at(a);
    match boundary {
        Boundary::Free => {}
        Boundary::Clamped { alpha, beta } => {
            if ja != 0.0 {
                return Err(Error::BoundaryHypothesisViolated(format!(
                    "h(a) cannot be prescribed: a = {a} is a jump point"
                )));
            }
            if y0 >= y1 {
                return Err(Error::BoundaryHypothesisViolated(format!("g(a) = g(b) = {y0}")));
            }
            if !in_range(alpha) || !in_range(beta) {
                return Err(Error::BoundaryHypothesisViolated("boundary values outside the declared range".into()));
            }
        }
        Boundary::JumpStart { beta } => {
            if ja == 0.0 {
                return Err(Error::BoundaryHypothesisViolated(format!("a = {a} is not a jump point")));
            }
            if !in_range(beta) {
                return Err(Error::BoundaryHypothesisViolated("boundary value outside the declared range".into()));
            }
        }
    }
    let landmark = g_dagger(d, y1)?;
    let whole = IntervalSet::closed(a, b);

    // No mass: any h will do, and 0 (clamped) is the canonical choice.
    if y0 == y1 + d.jump_at(b) && boundary == Boundary::Free {
        let nodes = vec![(y0, clamp(0.0))];
        let h = PiecewiseFunction::composed(interpolant(&nodes)?, d.clone())?;
        let error = l1g_distance(f, &h, d, &whole)?;
        return Ok(Approximation {
            h,
            nodes,
            error,
            eps,
            landmark,
            refinements: 0,
        });
    }

    let atoms = d.atoms();
    let mut best = f64::INFINITY;
    for k in 0..=opts.max_refinements {
        let cells = 4usize << k;
        // (y, value, priority): boundary 3, atom 2, gap end 1, grid 0.
        let mut cand: Vec<(f64, f64, u8)> = Vec::with_capacity(cells + 2 * atoms.len() + 3);
        for i in 0..=cells {
            let y = if i == cells {
                y1
            } else {
                y0 + (y1 - y0) * i as f64 / cells as f64
            };
            let t = d.quantile(MeasureKind::Signed, y)?;
            let v = if y > d.g(t, Side::Value) { f.right_limit(t) } else { f.value(t) };
            cand.push((y, clamp(v), 0));
        }
        for &(t, j) in &atoms {
            if t >= b {
                continue;
            }
            let yl = d.g(t, Side::Value);
            cand.push((yl, clamp(f.value(t)), 2));
            cand.push((yl + j, clamp(f.right_limit(t)), 1));
        }
        match boundary {
            Boundary::Free => {}
            Boundary::Clamped { alpha, beta } => {
                cand.push((y0, alpha, 3));
                cand.push((y1, beta, 3));
            }
            Boundary::JumpStart { beta } => cand.push((y1, beta, 3)),
        }
        cand.sort_by(|p, q| p.0.total_cmp(&q.0).then(q.2.cmp(&p.2)));
        cand.dedup_by(|later, earlier| later.0 == earlier.0);
        let nodes: Vec<(f64, f64)> = cand.into_iter().map(|(y, v, _)| (y, v)).collect();
        let h = PiecewiseFunction::composed(interpolant(&nodes)?, d.clone())?;
        let error = l1g_distance(f, &h, d, &whole)?;
        let certified = error.value + error.error_bound;
        if certified < eps {
            return Ok(Approximation {
                h,
                nodes,
                error,
                eps,
                landmark,
                refinements: k,
            });
        }
        best = best.min(certified);
    }
    Err(Error::BudgetExceeded { eps, best })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Truncation {
    #[serde(skip)]
    pub derivator: Derivator,
    /// Locations of the atoms that were kept.
    pub kept: Vec<f64>,
    /// `‖μ_g − μ_G‖_TV`, which is the total removed jump mass.
    pub removed: f64,
}

/// Keeps the fewest, largest jumps such that the removed jump mass is `< η`.
/// Equal jumps are removed right to left.
pub fn truncate_jumps(d: &Derivator, eta: f64) -> Result<Truncation> {
    require_nondecreasing(d)?;
    if !(eta > 0.0) {
        return Err(Error::MalformedSpec {
            field: "eta".into(),
            reason: "must be positive".into(),
        });
    }
    let jumps = d.jumps().to_vec();
    let mut order: Vec<usize> = (0..jumps.len()).filter(|&i| jumps[i] != 0.0).collect();
    order.sort_by(|&i, &j| jumps[i].total_cmp(&jumps[j]).then(j.cmp(&i)));
    let mut keep = jumps.clone();
    let mut removed = 0.0;
    for i in order {
        if removed + jumps[i] >= eta {
            break;
        }
        removed += jumps[i];
        keep[i] = 0.0;
    }
    let kept = d
        .knots()
        .iter()
        .zip(&keep)
        .filter(|(_, j)| **j != 0.0)
        .map(|(t, _)| *t)
        .collect();
    Ok(Truncation {
        derivator: d.with_jumps(keep)?,
        kept,
        removed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::continuity::{check_g_continuity, Mode};

    fn unit_jump() -> Derivator {
        Derivator::piecewise_affine(vec![0.0, 1.0, 2.0], vec![1.0, 1.0], vec![0.0, 1.0, 0.0], 0.0).unwrap()
    }

    #[test]
    fn dagger_examples() {
        let id = Derivator::identity(0.0, 1.0).unwrap();
        assert_eq!(g_dagger(&id, 0.5).unwrap(), 0.5);
        assert_eq!(g_dagger(&unit_jump(), 1.5).unwrap(), 1.0);
        let plateau =
            Derivator::piecewise_affine_unchecked(vec![0.0, 1.0, 2.0], vec![1.0, 0.0], vec![0.0; 3], 0.0).unwrap();
        assert_eq!(g_dagger(&plateau, 1.0).unwrap(), 1.0);
        let tent = Derivator::piecewise_affine(vec![0.0, 1.0, 2.0], vec![1.0, -1.0], vec![0.0; 3], 0.0).unwrap();
        assert!(matches!(g_dagger(&tent, 0.5), Err(Error::NondecreasingRequired)));
        assert!(matches!(g_dagger(&id, 2.0), Err(Error::OutOfRange { .. })));
    }

    #[test]
    fn interpolant_clamps() {
        let p = pa_interpolant(&[(0.0, 0.0), (1.0, 1.0)]).unwrap();
        assert_eq!(p.value(0.5), 0.5);
        assert_eq!(p.value(-3.0), 0.0);
        assert_eq!(p.value(7.0), 1.0);
        assert!(matches!(
            pa_interpolant(&[(0.0, 0.0), (0.0, 1.0)]),
            Err(Error::DuplicateAbscissa { .. })
        ));
    }

    #[test]
    fn indicator_under_identity() {
        let d = Derivator::identity(0.0, 1.0).unwrap();
        let f = PiecewiseFunction::Indicator("[0.25,0.75)".parse().unwrap());
        let r = approximate_in_l1g(&f, &d, 0.1, Boundary::Free).unwrap();
        assert!(r.error.value < 0.1);
        for t in [0.0, 0.25, 0.5, 0.75, 1.0] {
            assert!(check_g_continuity(&r.h, &d, t, Mode::TwoSided, &Default::default()).unwrap().passed());
        }
    }

    #[test]
    fn boundary_values_are_exact() {
        let d = unit_jump();
        let f = PiecewiseFunction::Indicator("[0.5,1.5)".parse().unwrap());
        let r = approximate_in_l1g(&f, &d, 0.01, Boundary::Clamped { alpha: 0.3, beta: -0.2 }).unwrap();
        assert_eq!(r.h.value(0.0), 0.3);
        assert_eq!(r.h.value(2.0), -0.2);
        let j = Derivator::piecewise_affine(vec![0.0, 1.0], vec![1.0], vec![0.5, 0.0], 0.0).unwrap();
        let r = approximate_in_l1g(&f, &j, 0.01, Boundary::JumpStart { beta: 2.0 }).unwrap();
        assert_eq!(r.h.value(0.0), 0.0);
        assert_eq!(r.h.value(1.0), 2.0);
        assert!(matches!(
            approximate_in_l1g(&f, &j, 0.01, Boundary::Clamped { alpha: 0.0, beta: 0.0 }),
            Err(Error::BoundaryHypothesisViolated(_))
        ));
    }

    #[test]
    fn massless_target_gives_zero() {
        let d = Derivator::piecewise_affine_unchecked(vec![0.0, 1.0], vec![0.0], vec![0.0; 2], 0.0).unwrap();
        let f = PiecewiseFunction::Indicator("[0,1)".parse().unwrap());
        let r = approximate_in_l1g(&f, &d, 1e-3, Boundary::Free).unwrap();
        assert_eq!(r.h.value(0.5), 0.0);
        assert_eq!(r.error.value, 0.0);
    }

    #[test]
    fn geometric_atoms() {
        let n = 40;
        let mut knots = vec![0.0];
        let mut jumps = vec![0.0];
        for k in 1..=n {
            knots.push(1.0 - 0.5f64.powi(k));
            jumps.push(0.5f64.powi(k));
        }
        knots.push(1.0);
        jumps.push(0.0);
        let slopes = vec![1.0; knots.len() - 1];
        let d = Derivator::piecewise_affine(knots, slopes, jumps, 0.0).unwrap();
        let t = truncate_jumps(&d, 0.1).unwrap();
        assert_eq!(t.kept.len(), 4);
        assert!((t.removed - 0.0625).abs() < 1e-11);
        let none = Derivator::identity(0.0, 1.0).unwrap();
        assert_eq!(truncate_jumps(&none, 0.1).unwrap().removed, 0.0);
    }
}
