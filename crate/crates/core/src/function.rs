//! Test functions used as integrands and derivands.

use crate::derivator::{Derivator, Side};
use crate::error::{Error, Result};
use crate::interval::IntervalSet;
use crate::oscillator;
use crate::poly::{Piecewise, Poly};

/// Anything with point values and one-sided limits.
pub trait Evaluable {
    fn value(&self, t: f64) -> f64;
    fn right_limit(&self, t: f64) -> f64;
    fn left_limit(&self, t: f64) -> f64;

    /// `(f(t⁺) − f(t)) / dg`. Implementors that know the quotient exactly
    /// (primitives at atoms) override this.
    fn jump_quotient(&self, t: f64, dg: f64) -> f64 {
        (self.right_limit(t) - self.value(t)) / dg
    }

    /// Distance from `t` to the next point (to the right if `right`) where the
    /// representation changes formula, if known.
    fn gap(&self, t: f64, right: bool) -> Option<f64>;
}

impl Evaluable for Piecewise {
    fn value(&self, t: f64) -> f64 {
        Piecewise::value(self, t)
    }
    fn right_limit(&self, t: f64) -> f64 {
        Piecewise::right_limit(self, t)
    }
    fn left_limit(&self, t: f64) -> f64 {
        Piecewise::left_limit(self, t)
    }
    fn gap(&self, t: f64, right: bool) -> Option<f64> {
        Piecewise::gap(self, t, right)
    }
}

/// The triangular wave on `(0, 1]`: on `[x_{k+1}, x_k]` a triangle with zero
/// ends and apex `(−1)^k·s_k` at the midpoint, where
/// `s_k = (x_k^{1+r} − x_{k+1}^{1+r}) / (x_k − x_{k+1})`. Each triangle has area
/// `½(x_k^{1+r} − x_{k+1}^{1+r})`, so `∫_0^{x_n} |f| = ½ x_n^{1+r}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TriangularWave {
    pub r: f64,
    /// Triangles `k ≤ depth` are resolved exactly in windows; below
    /// `x_{depth+1}` windows model `f` as zero with a sup bound.
    pub depth: u64,
}

impl TriangularWave {
    pub fn new(r: f64, depth: u64) -> Self {
        TriangularWave { r, depth }
    }

    /// `1 − x_{k+1}/x_k`, exactly representable from `α`.
    fn shrink(k: u64) -> f64 {
        if k % 2 == 1 {
            let a = oscillator::alpha_f64(k.div_ceil(2));
            a / (1.0 + a)
        } else {
            oscillator::alpha_f64(k / 2)
        }
    }

    /// Apex height `s_k`, evaluated without cancellation.
    pub fn apex(&self, k: u64) -> f64 {
        let p = 1.0 + self.r;
        let d = Self::shrink(k);
        let xk = oscillator::x_f64(k);
        xk.powf(self.r) * (-(p * (-d).ln_1p()).exp_m1()) / d
    }

    fn sign(k: u64) -> f64 {
        if k % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        if t <= 0.0 || t > 1.0 {
            return 0.0;
        }
        let k = oscillator::segment_of(t);
        let (hi, lo) = (oscillator::x_f64(k), oscillator::x_f64(k + 1));
        let half = 0.5 * (hi - lo);
        let mid = lo + half;
        let dist = if t <= mid { t - lo } else { hi - t };
        Self::sign(k) * self.apex(k) * (dist / half)
    }

    /// `sup |f|` on `[0, x_k]`.
    pub fn sup_below(&self, k: u64) -> f64 {
        // Apex heights decrease with k.
        self.apex(k.max(1))
    }

    fn triangle(&self, k: u64) -> [(f64, f64); 3] {
        let (hi, lo) = (oscillator::x_f64(k), oscillator::x_f64(k + 1));
        let mid = 0.5 * (hi + lo);
        [(lo, 0.0), (mid, Self::sign(k) * self.apex(k)), (hi, 0.0)]
    }
}

/// `Q ∘ g` for a piecewise-affine `g`, materialized as a piecewise polynomial
/// in `t` on the derivator's domain. `Q` should be continuous.
#[derive(Debug, Clone, PartialEq)]
pub struct Composed {
    outer: Piecewise,
    inner: Derivator,
    pw: Piecewise,
}

impl Composed {
    pub fn new(outer: Piecewise, inner: Derivator) -> Result<Self> {
        if inner.tail_end().is_some() {
            return Err(Error::Unsupported("composition with an oscillator tail".into()));
        }
        let pw = compose(&outer, &inner)?;
        Ok(Composed { outer, inner, pw })
    }

    pub fn outer(&self) -> &Piecewise {
        &self.outer
    }

    pub fn inner(&self) -> &Derivator {
        &self.inner
    }

    pub fn as_piecewise(&self) -> &Piecewise {
        &self.pw
    }
}

fn compose(q: &Piecewise, d: &Derivator) -> Result<Piecewise> {
    let dk = d.knots();
    let mut knots = Vec::new();
    let mut pieces = Vec::new();
    for i in 0..dk.len() - 1 {
        let (lo, hi) = (dk[i], dk[i + 1]);
        let s = d.slopes()[i];
        let g0 = d.g(lo, Side::RightLimit);
        let mut cuts = vec![lo];
        if s != 0.0 {
            let g1 = g0 + s * (hi - lo);
            let (ylo, yhi) = if g0 < g1 { (g0, g1) } else { (g1, g0) };
            for &y in q.knots() {
                if y > ylo && y < yhi {
                    let t = lo + (y - g0) / s;
                    if t > lo && t < hi {
                        cuts.push(t);
                    }
                }
            }
        }
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        cuts.push(hi);
        for w in cuts.windows(2) {
            let mid = 0.5 * (w[0] + w[1]);
            let gm = g0 + s * (mid - lo);
            // p(g0 + s·(t − lo)) as a polynomial in t − lo.
            let p = q.piece_around(gm).recenter(g0);
            let mut scale = 1.0;
            let coeffs = p
                .coeffs()
                .iter()
                .map(|c| {
                    let v = c * scale;
                    scale *= s;
                    v
                })
                .collect();
            knots.push(w[0]);
            pieces.push(Poly::new(lo, coeffs));
        }
    }
    knots.push(dk[dk.len() - 1]);
    let values = knots.iter().map(|&t| q.value(d.g(t, Side::Value))).collect();
    Piecewise::new(knots, pieces, values)
}

/// Evaluable test function.
#[derive(Debug, Clone, PartialEq)]
pub enum PiecewiseFunction {
    Piecewise(Piecewise),
    TriangularWave(TriangularWave),
    Composed(Composed),
    Indicator(IntervalSet),
}

/// A function restricted to `[lo, hi]` as a piecewise polynomial, plus an
/// optional region `[lo, end)` where it is only known up to `sup |f|`.
#[derive(Debug, Clone, PartialEq)]
pub struct Window {
    pub pw: Piecewise,
    pub unresolved: Option<(f64, f64)>,
}

impl PiecewiseFunction {
    pub fn linear(points: &[(f64, f64)]) -> Result<Self> {
        Ok(PiecewiseFunction::Piecewise(Piecewise::linear(points)?))
    }

    pub fn composed(outer: Piecewise, inner: Derivator) -> Result<Self> {
        Ok(PiecewiseFunction::Composed(Composed::new(outer, inner)?))
    }

    /// `g̃` of `d` as a function, i.e. `t ↦ g̃(t)`.
    pub fn variation_of(d: &Derivator) -> Result<Self> {
        let v = d.variation_derivator()?;
        Self::derivator_values(&v)
    }

    /// `t ↦ g(t)` for a piecewise-affine derivator.
    pub fn derivator_values(d: &Derivator) -> Result<Self> {
        if d.tail_end().is_some() {
            return Err(Error::Unsupported("values of an oscillator tail".into()));
        }
        let knots = d.knots().to_vec();
        let pieces = (0..knots.len() - 1)
            .map(|i| Poly::affine(knots[i], d.g(knots[i], Side::RightLimit), d.slopes()[i]))
            .collect();
        let values = knots.iter().map(|&t| d.g(t, Side::Value)).collect();
        Ok(PiecewiseFunction::Piecewise(Piecewise::new(knots, pieces, values)?))
    }

    /// Restriction to `[lo, hi]`. `resolve_to` asks the triangular wave to
    /// resolve at least down to that point.
    pub fn window(&self, lo: f64, hi: f64, resolve_to: Option<f64>) -> Result<Window> {
        let pw = match self {
            PiecewiseFunction::Piecewise(p) => p.restrict(lo, hi)?,
            PiecewiseFunction::Composed(c) => c.pw.restrict(lo, hi)?,
            PiecewiseFunction::Indicator(e) => indicator_window(e, lo, hi)?,
            PiecewiseFunction::TriangularWave(w) => return triangular_window(w, lo, hi, resolve_to),
        };
        let (mn, mx) = pw.range();
        if !mn.is_finite() || !mx.is_finite() {
            return Err(Error::UnboundedIntegrand { t: lo });
        }
        Ok(Window { pw, unresolved: None })
    }

    /// Kinks and jumps of the representation inside `[lo, hi]`.
    pub fn breakpoints_in(&self, lo: f64, hi: f64) -> Vec<f64> {
        match self.window(lo, hi, None) {
            Ok(w) => w.pw.knots().to_vec(),
            Err(_) => vec![lo, hi],
        }
    }
}

fn indicator_window(e: &IntervalSet, lo: f64, hi: f64) -> Result<Piecewise> {
    let mut knots = vec![lo, hi];
    for p in e.parts() {
        knots.extend([p.lo, p.hi].into_iter().filter(|&k| k > lo && k < hi));
    }
    knots.sort_by(f64::total_cmp);
    knots.dedup();
    let pieces = knots
        .windows(2)
        .map(|w| Poly::constant(if e.contains(0.5 * (w[0] + w[1])) { 1.0 } else { 0.0 }))
        .collect();
    let values = knots.iter().map(|&k| if e.contains(k) { 1.0 } else { 0.0 }).collect();
    Piecewise::new(knots, pieces, values)
}

fn triangular_window(w: &TriangularWave, lo: f64, hi: f64, resolve_to: Option<f64>) -> Result<Window> {
    let mut depth = w.depth;
    if let Some(r) = resolve_to.filter(|&r| r > 0.0 && r < 1.0) {
        depth = depth.max(oscillator::segment_of(r));
    }
    let floor = oscillator::x_f64(depth + 1);
    let mut points: Vec<(f64, f64)> = Vec::new();
    if lo < floor || lo <= 0.0 {
        points.push((lo.min(floor), 0.0));
    }
    for k in (1..=depth).rev() {
        for p in w.triangle(k) {
            if points.last().is_none_or(|q| q.0 < p.0) {
                points.push(p);
            }
        }
    }
    if hi > 1.0 {
        points.push((hi, 0.0));
    }
    let full = Piecewise::linear(&points)?;
    let pw = full.restrict(lo, hi)?;
    let unresolved = if lo < floor {
        Some((floor.min(hi), w.sup_below(depth + 1)))
    } else {
        None
    };
    Ok(Window { pw, unresolved })
}

impl Evaluable for PiecewiseFunction {
    fn value(&self, t: f64) -> f64 {
        match self {
            PiecewiseFunction::Piecewise(p) => p.value(t),
            PiecewiseFunction::Composed(c) => c.pw.value(t),
            PiecewiseFunction::Indicator(e) => {
                if e.contains(t) {
                    1.0
                } else {
                    0.0
                }
            }
            PiecewiseFunction::TriangularWave(w) => w.eval(t),
        }
    }

    fn right_limit(&self, t: f64) -> f64 {
        match self {
            PiecewiseFunction::Piecewise(p) => p.right_limit(t),
            PiecewiseFunction::Composed(c) => c.pw.right_limit(t),
            PiecewiseFunction::Indicator(e) => {
                let eps = self.gap(t, true).unwrap_or(1.0).min(1.0) * 0.5;
                if e.contains(t + eps) {
                    1.0
                } else {
                    0.0
                }
            }
            PiecewiseFunction::TriangularWave(w) => w.eval(t),
        }
    }

    fn left_limit(&self, t: f64) -> f64 {
        match self {
            PiecewiseFunction::Piecewise(p) => p.left_limit(t),
            PiecewiseFunction::Composed(c) => c.pw.left_limit(t),
            PiecewiseFunction::Indicator(e) => {
                let eps = self.gap(t, false).unwrap_or(1.0).min(1.0) * 0.5;
                if e.contains(t - eps) {
                    1.0
                } else {
                    0.0
                }
            }
            PiecewiseFunction::TriangularWave(w) => w.eval(t),
        }
    }

    fn gap(&self, t: f64, right: bool) -> Option<f64> {
        match self {
            PiecewiseFunction::Piecewise(p) => p.gap(t, right),
            PiecewiseFunction::Composed(c) => c.pw.gap(t, right),
            PiecewiseFunction::Indicator(e) => e
                .parts()
                .iter()
                .flat_map(|p| [p.lo, p.hi])
                .filter(|&k| if right { k > t } else { k < t })
                .map(|k| (k - t).abs())
                .min_by(f64::total_cmp),
            PiecewiseFunction::TriangularWave(_) => {
                if t <= 0.0 || t > 1.0 {
                    return if right && t <= 0.0 { None } else { Some(0.0) };
                }
                let k = oscillator::segment_of(t);
                let (hi, lo) = (oscillator::x_f64(k), oscillator::x_f64(k + 1));
                let mid = 0.5 * (hi + lo);
                let ks = [lo, mid, hi];
                ks.iter()
                    .filter(|&&x| if right { x > t } else { x < t })
                    .map(|x| (x - t).abs())
                    .min_by(f64::total_cmp)
            }
        }
    }
}
