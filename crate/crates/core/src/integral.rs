//! Lebesgue–Stieltjes integrals of piecewise-polynomial functions, primitives,
//! and an independent left-endpoint refinement-sum oracle.

use serde::Serialize;

use crate::derivator::{Derivator, Side};
use crate::error::Result;
use crate::function::{Evaluable, PiecewiseFunction, Window};
use crate::interval::{Interval, IntervalSet};
use crate::measure::{check_inside, interval_measure, MeasureKind};
use crate::poly::Piecewise;
use crate::sum::Neumaier;

/// Integral value with a bound on its error. The bound is zero except where an
/// oscillator tail or an unresolved part of a triangular wave is involved.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Integral {
    pub value: f64,
    pub error_bound: f64,
}

pub fn integrate(f: &PiecewiseFunction, d: &Derivator, e: &IntervalSet, kind: MeasureKind) -> Result<Integral> {
    check_inside(d, e)?;
    let (a, b) = d.domain();
    let w = f.window(a, b, d.tail_end())?;
    Ok(integrate_window(&w, d, e, kind))
}

/// `‖f‖_{L¹_g(E)} = ∫_E |f| d|μ_g|`.
pub fn l1g_norm(f: &PiecewiseFunction, d: &Derivator, e: &IntervalSet) -> Result<Integral> {
    check_inside(d, e)?;
    let (a, b) = d.domain();
    let w = f.window(a, b, d.tail_end())?;
    let w = Window {
        pw: w.pw.abs()?,
        unresolved: w.unresolved,
    };
    Ok(integrate_window(&w, d, e, MeasureKind::Total))
}

/// `‖f − h‖_{L¹_g(E)}`.
pub fn l1g_distance(f: &PiecewiseFunction, h: &PiecewiseFunction, d: &Derivator, e: &IntervalSet) -> Result<Integral> {
    check_inside(d, e)?;
    let (a, b) = d.domain();
    let wf = f.window(a, b, d.tail_end())?;
    let wh = h.window(a, b, d.tail_end())?;
    let unresolved = match (wf.unresolved, wh.unresolved) {
        (Some((e1, s1)), Some((e2, s2))) => Some((e1.max(e2), s1 + s2)),
        (x, None) | (None, x) => x,
    };
    let w = Window {
        pw: wf.pw.sub(&wh.pw)?.abs()?,
        unresolved,
    };
    Ok(integrate_window(&w, d, e, MeasureKind::Total))
}

pub(crate) fn integrate_window(w: &Window, d: &Derivator, e: &IntervalSet, kind: MeasureKind) -> Integral {
    let mut sum = Neumaier::default();
    let mut bound = 0.0;
    for part in e.parts() {
        integrate_interval(&w.pw, d, part, kind, &mut sum);
        if let Some((end, sup)) = w.unresolved {
            if part.lo < end {
                let u = Interval::half_open(part.lo, end.min(part.hi));
                bound += sup * interval_measure(d, &u, MeasureKind::Total).abs();
            }
        }
        if let Some(end) = d.tail_end() {
            if part.lo < end && kind != MeasureKind::Total {
                let hi = end.min(part.hi);
                let mut sup = w.pw.sup_abs_on(part.lo, hi);
                if let Some((_, s)) = w.unresolved {
                    sup = sup.max(s);
                }
                bound += sup * (hi - part.lo);
            }
        }
    }
    Integral {
        value: sum.total(),
        error_bound: bound,
    }
}

fn integrate_interval(pw: &Piecewise, d: &Derivator, part: &Interval, kind: MeasureKind, sum: &mut Neumaier) {
    let dk = d.knots();
    let (lo, hi) = (part.lo, part.hi);
    // Atoms owned by the part.
    let first = dk.partition_point(|&k| k < lo);
    let last = dk.partition_point(|&k| k <= hi);
    for i in first..last {
        let j = d.jump(kind, i);
        if j != 0.0 && part.contains(dk[i]) {
            sum.add(pw.value(dk[i]) * j);
        }
    }
    if lo == hi {
        return;
    }
    let mut cuts: Vec<f64> = Vec::new();
    cuts.push(lo);
    let fk = pw.knots();
    let mut i = first;
    let mut j = fk.partition_point(|&k| k <= lo);
    loop {
        let next_d = dk.get(i).copied().filter(|&k| k < hi);
        let next_f = fk.get(j).copied().filter(|&k| k < hi);
        let next = match (next_d, next_f) {
            (Some(x), Some(y)) => x.min(y),
            (Some(x), None) | (None, Some(x)) => x,
            (None, None) => break,
        };
        if next > *cuts.last().expect("nonempty") {
            cuts.push(next);
        }
        if next_d == Some(next) {
            i += 1;
        }
        if next_f == Some(next) {
            j += 1;
        }
    }
    cuts.push(hi);
    for c in cuts.windows(2) {
        let (u, v) = (c[0], c[1]);
        let mid = 0.5 * (u + v);
        let s = d.slope(kind, d.segment_index(mid));
        if s != 0.0 {
            sum.add(s * pw.piece_around(mid).integral(u, v));
        }
    }
}

/// `F(t) = ∫_{[a,t)} f dμ_g`, materialized as a piecewise polynomial.
#[derive(Debug, Clone, PartialEq)]
pub struct Primitive {
    pw: Piecewise,
    /// `(t, f(t))` at every atom of the derivator.
    atoms: Vec<(f64, f64)>,
    error_bound: f64,
}

pub fn primitive(f: &PiecewiseFunction, d: &Derivator) -> Result<Primitive> {
    let (a, b) = d.domain();
    let w = f.window(a, b, d.tail_end())?;
    primitive_of_window(&w, d)
}

pub(crate) fn primitive_of_window(w: &Window, d: &Derivator) -> Result<Primitive> {
    let f = &w.pw;
    let mut knots: Vec<f64> = d.knots().iter().chain(f.knots()).copied().collect();
    knots.sort_by(f64::total_cmp);
    knots.dedup();
    let (a, b) = d.domain();
    knots.retain(|&k| k >= a && k <= b);
    let mut values = Vec::with_capacity(knots.len());
    let mut pieces = Vec::with_capacity(knots.len());
    let mut acc = Neumaier::default();
    let mut atoms = Vec::new();
    values.push(0.0);
    for c in knots.windows(2) {
        let (u, v) = (c[0], c[1]);
        let jump = d.jump_at(u);
        if jump != 0.0 {
            let fv = f.value(u);
            atoms.push((u, fv));
            acc.add(fv * jump);
        }
        let start = acc.total();
        let mid = 0.5 * (u + v);
        let s = d.slope(MeasureKind::Signed, d.segment_index(mid));
        let anti = f.piece_around(mid).recenter(u).antiderivative();
        pieces.push(anti.scale(s).add_constant(start));
        acc.add(s * anti.eval(v));
        values.push(acc.total());
    }
    let pw = Piecewise::new(knots, pieces, values)?;
    let mut error_bound = 0.0;
    if let Some((end, sup)) = w.unresolved {
        error_bound += sup * (d.g_tilde(end, Side::Value) - d.g_tilde(a, Side::Value));
    }
    if let Some(end) = d.tail_end() {
        error_bound += f.sup_abs_on(a, end).max(w.unresolved.map_or(0.0, |u| u.1)) * (end - a);
    }
    Ok(Primitive {
        pw,
        atoms,
        error_bound,
    })
}

impl Primitive {
    pub fn as_piecewise(&self) -> &Piecewise {
        &self.pw
    }

    /// Bound on `|F_true(t) − F(t)|` uniformly in `t`; differences `F(t) − F(s)`
    /// with both points outside any unresolved region are exact.
    pub fn error_bound(&self) -> f64 {
        self.error_bound
    }

    pub fn to_function(&self) -> PiecewiseFunction {
        PiecewiseFunction::Piecewise(self.pw.clone())
    }
}

impl Evaluable for Primitive {
    fn value(&self, t: f64) -> f64 {
        self.pw.value(t)
    }
    fn right_limit(&self, t: f64) -> f64 {
        self.pw.right_limit(t)
    }
    fn left_limit(&self, t: f64) -> f64 {
        self.pw.left_limit(t)
    }
    fn jump_quotient(&self, t: f64, dg: f64) -> f64 {
        match self.atoms.binary_search_by(|p| p.0.total_cmp(&t)) {
            Ok(i) => self.atoms[i].1,
            Err(_) => (self.right_limit(t) - self.value(t)) / dg,
        }
    }
    fn gap(&self, t: f64, right: bool) -> Option<f64> {
        self.pw.gap(t, right)
    }
}

/// Left-endpoint Riemann–Stieltjes sum `Σ f(t_i)(g(t_{i+1}) − g(t_i))` over the
/// uniform partition of `[x, y)` into `2^depth` cells. Converges to the
/// integral over `[x, y)` when `f` is continuous at the atoms of `g`.
pub fn rs_refinement_oracle(f: &dyn Evaluable, d: &Derivator, x: f64, y: f64, depth: u32) -> f64 {
    let n = 1u64 << depth;
    let h = (y - x) / n as f64;
    let mut sum = Neumaier::default();
    let mut t0 = x;
    let mut g0 = d.g(x, Side::Value);
    for i in 1..=n {
        let t1 = if i == n { y } else { x + h * i as f64 };
        let g1 = d.g(t1, Side::Value);
        sum.add(f.value(t0) * (g1 - g0));
        t0 = t1;
        g0 = g1;
    }
    sum.total()
}

/// Left-endpoint sum over the uniform `2^depth` partition with `extra` points
/// inserted.
pub fn rs_aligned_sum(f: &dyn Evaluable, d: &Derivator, x: f64, y: f64, depth: u32, extra: &[f64]) -> f64 {
    let n = 1u64 << depth;
    let h = (y - x) / n as f64;
    let mut inner: Vec<f64> = extra.iter().copied().filter(|&k| k > x && k < y).collect();
    inner.sort_by(f64::total_cmp);
    inner.dedup();
    let mut sum = Neumaier::default();
    let mut t0 = x;
    let mut g0 = d.g(x, Side::Value);
    let mut j = 0;
    let mut i = 1;
    while i <= n {
        let grid = if i == n { y } else { x + h * i as f64 };
        let t1 = if j < inner.len() && inner[j] <= grid {
            j += 1;
            inner[j - 1]
        } else {
            i += 1;
            grid
        };
        if t1 <= t0 {
            continue;
        }
        let g1 = d.g(t1, Side::Value);
        sum.add(f.value(t0) * (g1 - g0));
        t0 = t1;
        g0 = g1;
    }
    sum.total()
}

/// Richardson extrapolation `2·S(depth) − S(depth−1)` of breakpoint-aligned
/// left-endpoint sums. For functions that are affine between the aligned
/// points, the first-order error term cancels away from the inserted points.
pub fn rs_extrapolated(f: &dyn Evaluable, d: &Derivator, x: f64, y: f64, depth: u32, breakpoints: &[f64]) -> f64 {
    let mut extra: Vec<f64> = d.knots().to_vec();
    extra.extend_from_slice(breakpoints);
    let fine = rs_aligned_sum(f, d, x, y, depth, &extra);
    let coarse = rs_aligned_sum(f, d, x, y, depth - 1, &extra);
    2.0 * fine - coarse
}
