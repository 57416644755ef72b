//! Pointwise Stieltjes derivatives and the φ map.

use serde::Serialize;

use crate::derivator::{Class, Derivator, DerivatorKind, PointClass, Side};
use crate::error::{Error, Result};
use crate::function::Evaluable;
use crate::oscillator;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    JumpFormula,
    LimitExtrapolation,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DerivativeEstimate {
    pub exists: bool,
    pub value: Option<f64>,
    pub left: Option<f64>,
    pub right: Option<f64>,
    /// `(s, (f(s) − f(t*)) / (g(s) − g(t*)))` for every sample used.
    pub trace: Vec<(f64, f64)>,
    pub method: Method,
    pub class: PointClass,
}

/// Sampling parameters for one-sided limits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sampling {
    pub max_delta: f64,
    pub steps: u32,
}

impl Default for Sampling {
    fn default() -> Self {
        Sampling {
            max_delta: 1e-2,
            steps: 48,
        }
    }
}

struct SideLimit {
    value: Option<f64>,
    sampled: bool,
}

/// Limit of `(f(s) − f(t*)) / (g(s) − g(t*))` as `s → t*` from one side, along
/// `s = t* ± δ₀·2^{-k}`, skipping samples with `g(s) = g(t*)`. Consecutive
/// quotients are Richardson-extrapolated (`2q_{k+1} − q_k`) since the error is
/// first order in `δ` for piecewise-smooth data.
fn side_limit(
    f: &dyn Evaluable,
    d: &Derivator,
    ts: f64,
    right: bool,
    tol: f64,
    sampling: Sampling,
    trace: &mut Vec<(f64, f64)>,
) -> SideLimit {
    let (a, b) = d.domain();
    let room = if right { b - ts } else { ts - a };
    let mut delta0 = sampling.max_delta.min(room);
    let knot_gap = {
        let k = d.knots();
        if right {
            let i = k.partition_point(|&x| x <= ts);
            k.get(i).map(|x| x - ts)
        } else {
            let i = k.partition_point(|&x| x < ts);
            (i > 0).then(|| ts - k[i - 1])
        }
    };
    for g in [knot_gap, f.gap(ts, right)].into_iter().flatten() {
        if g > 0.0 {
            delta0 = delta0.min(0.5 * g);
        }
    }
    if delta0 <= 0.0 {
        return SideLimit {
            value: None,
            sampled: false,
        };
    }
    let dir = if right { 1.0 } else { -1.0 };
    let ft = f.value(ts);
    let gt = d.g(ts, Side::Value);
    let mut prev_q: Option<f64> = None;
    // Richardson values from an unbroken run of samples.
    let mut rs: Vec<f64> = Vec::new();
    let mut sampled = false;
    for k in 0..sampling.steps {
        let s = ts + dir * delta0 * 0.5f64.powi(k as i32);
        if s == ts {
            break;
        }
        let dg = d.g(s, Side::Value) - gt;
        if dg == 0.0 {
            prev_q = None;
            rs.clear();
            continue;
        }
        sampled = true;
        let fs = f.value(s);
        let q = (fs - ft) / dg;
        trace.push((s, q));
        if let Some(p) = prev_q {
            rs.push(2.0 * q - p);
            let n = rs.len();
            if n >= 3 {
                let r = rs[n - 1];
                let close = |x: f64| (r - x).abs() <= 0.1 * tol * (1.0 + r.abs());
                if close(rs[n - 2]) && close(rs[n - 3]) {
                    return SideLimit {
                        value: Some(r),
                        sampled,
                    };
                }
            }
        }
        prev_q = Some(q);
        let noise = 4.0 * f64::EPSILON * (fs.abs() + ft.abs()) / dg.abs();
        if noise > 0.01 * tol {
            break;
        }
    }
    // Refinement stopped on rounding noise or the step cap: accept the last
    // extrapolate only if it already agrees with its predecessor.
    let n = rs.len();
    let value = (n >= 2 && (rs[n - 1] - rs[n - 2]).abs() <= tol * (1.0 + rs[n - 1].abs())).then(|| rs[n - 1]);
    SideLimit { value, sampled }
}

pub fn g_derivative(f: &dyn Evaluable, d: &Derivator, t: f64, tol: f64) -> Result<DerivativeEstimate> {
    g_derivative_with(f, d, t, tol, Sampling::default())
}

pub fn g_derivative_with(
    f: &dyn Evaluable,
    d: &Derivator,
    t: f64,
    tol: f64,
    sampling: Sampling,
) -> Result<DerivativeEstimate> {
    let class = d.classify_point(t)?;
    let ts = class.t_star;
    let jump = d.jump_at(ts);
    if jump != 0.0 {
        let v = f.jump_quotient(ts, jump);
        return Ok(DerivativeEstimate {
            exists: v.is_finite(),
            value: v.is_finite().then_some(v),
            left: None,
            right: Some(v),
            trace: vec![],
            method: Method::JumpFormula,
            class,
        });
    }
    let (need_left, need_right) = match class.class {
        Class::Regular => (true, true),
        Class::Jump | Class::NPlus | Class::ConstancyInterior(_) | Class::LeftEndpoint => (false, true),
        Class::NMinus | Class::RightEndpoint => (true, false),
    };
    let mut trace = Vec::new();
    let left = need_left.then(|| side_limit(f, d, ts, false, tol, sampling, &mut trace));
    let right = need_right.then(|| side_limit(f, d, ts, true, tol, sampling, &mut trace));
    let any_sampled = left.as_ref().is_some_and(|s| s.sampled) || right.as_ref().is_some_and(|s| s.sampled);
    let required_unsampled = left.as_ref().is_some_and(|s| !s.sampled) || right.as_ref().is_some_and(|s| !s.sampled);
    if !any_sampled || required_unsampled {
        return Err(Error::DegenerateQuotient { t_star: ts });
    }
    let lv = left.and_then(|s| s.value);
    let rv = right.and_then(|s| s.value);
    let (exists, value) = match (need_left, need_right, lv, rv) {
        (true, true, Some(l), Some(r)) => {
            let ok = (l - r).abs() <= tol * (1.0 + l.abs().max(r.abs()));
            (ok, ok.then_some(0.5 * (l + r)))
        }
        (true, false, Some(l), _) => (true, Some(l)),
        (false, true, _, Some(r)) => (true, Some(r)),
        _ => (false, None),
    };
    Ok(DerivativeEstimate {
        exists,
        value,
        left: lv,
        right: rv,
        trace,
        method: Method::LimitExtrapolation,
        class,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhiEstimate {
    pub value: f64,
    pub certified: bool,
    /// Points at which the ratio `|g(s) − g(t*)| / |g̃(s) − g̃(t*)|` was sampled
    /// (empty when certified).
    pub samples: Vec<f64>,
}

/// `φ(t)`: liminf of `|Δg| / |Δg̃|` on the sides selected by the class of `t`.
pub fn phi(d: &Derivator, t: f64, _tol: f64) -> Result<PhiEstimate> {
    let class = d.classify_point(t)?;
    if d.kind() == DerivatorKind::Oscillator {
        let (a, _) = d.domain();
        if t > a {
            // Finitely many ±1 segments near any t > 0: the ratio is 1 on
            // every side.
            return Ok(PhiEstimate {
                value: 1.0,
                certified: true,
                samples: vec![],
            });
        }
        return Ok(oscillator_phi_at_zero(d));
    }
    let ts = class.t_star;
    let knots = d.knots();
    let i = d.segment_index(ts);
    let right_ok = || d.jump_at(ts) != 0.0 || (ts < knots[knots.len() - 1] && d.slopes()[i] != 0.0);
    let left_ok = || {
        let j = knots.partition_point(|&k| k < ts);
        j > 0 && d.slopes()[j - 1] != 0.0
    };
    let ok = match class.class {
        Class::Regular => right_ok() && left_ok(),
        Class::Jump | Class::NPlus | Class::ConstancyInterior(_) | Class::LeftEndpoint => right_ok(),
        Class::NMinus | Class::RightEndpoint => left_ok(),
    };
    // Near a point, a piecewise-affine g has |Δg| = |Δg̃| on each side once the
    // adjacent slope (or the jump) is nonzero, so the liminf is exactly 1.
    Ok(if ok {
        PhiEstimate {
            value: 1.0,
            certified: true,
            samples: vec![],
        }
    } else {
        PhiEstimate {
            value: 0.0,
            certified: false,
            samples: vec![],
        }
    })
}

/// Sampled liminf at the accumulation point, along the `x_n` and along
/// geometric sequences, restricted to the resolved region. The reported value
/// is the minimum ratio seen.
fn oscillator_phi_at_zero(d: &Derivator) -> PhiEstimate {
    let depth = d.oscillator_params().map_or(2, |p| p.depth);
    let floor = d.tail_end().unwrap_or(0.0);
    let mut samples: Vec<f64> = (1..=2 * depth + 1).map(oscillator::x_f64).collect();
    let mut s = 1.0;
    while s >= floor {
        samples.push(s);
        s *= 0.5;
    }
    samples.retain(|&s| s >= floor && s > 0.0);
    let value = samples
        .iter()
        .map(|&s| d.g(s, Side::Value).abs() / d.g_tilde(s, Side::Value))
        .fold(f64::INFINITY, f64::min);
    PhiEstimate {
        value,
        certified: false,
        samples,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::function::PiecewiseFunction;
    use crate::poly::{Piecewise, Poly};

    fn tent() -> Derivator {
        Derivator::piecewise_affine(vec![0.0, 1.0, 2.0], vec![1.0, -1.0], vec![0.0; 3], 0.0).unwrap()
    }

    #[test]
    fn variation_not_differentiable_at_tent_peak() {
        let d = tent();
        let f = PiecewiseFunction::variation_of(&d).unwrap();
        let e = g_derivative(&f, &d, 1.0, 1e-6).unwrap();
        assert!(!e.exists);
        assert_eq!(e.left, Some(1.0));
        assert_eq!(e.right, Some(-1.0));
    }

    #[test]
    fn classical_derivative_of_square() {
        let d = Derivator::identity(0.0, 1.0).unwrap();
        let f = Piecewise::new(vec![0.0, 1.0], vec![Poly::new(0.0, vec![0.0, 0.0, 1.0])], vec![0.0, 1.0]).unwrap();
        let e = g_derivative(&f, &d, 0.5, 1e-6).unwrap();
        assert!(e.exists);
        assert!((e.value.unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn flat_side_is_degenerate() {
        let d = Derivator::piecewise_affine_unchecked(vec![0.0, 1.0, 2.0], vec![1.0, 0.0], vec![0.0; 3], 0.0).unwrap();
        let f = PiecewiseFunction::linear(&[(0.0, 0.0), (2.0, 1.0)]).unwrap();
        assert!(matches!(g_derivative(&f, &d, 2.0, 1e-6), Err(Error::DegenerateQuotient { .. })));
    }

    #[test]
    fn phi_values() {
        assert_eq!(phi(&tent(), 1.0, 1e-6).unwrap().value, 1.0);
        let o = Derivator::oscillator(50, 1.0 / 3.0).unwrap();
        let p = phi(&o, 0.0, 1e-6).unwrap();
        assert!(!p.certified);
        assert!(p.value < 0.05);
        assert!(phi(&o, 0.3, 1e-6).unwrap().certified);
    }
}
