//! Polynomials in a shifted variable and piecewise-polynomial functions with
//! explicit values at their knots.

use crate::error::{malformed, Result};

/// `p(t) = Σ c_k (t − origin)^k`, lowest degree first.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly {
    origin: f64,
    coeffs: Vec<f64>,
}

impl Poly {
    pub fn new(origin: f64, coeffs: Vec<f64>) -> Self {
        let mut p = Poly { origin, coeffs };
        p.trim();
        p
    }

    pub fn constant(c: f64) -> Self {
        Poly::new(0.0, vec![c])
    }

    /// Affine function with value `v` at `t0` and slope `m`.
    pub fn affine(t0: f64, v: f64, m: f64) -> Self {
        Poly::new(t0, vec![v, m])
    }

    pub fn zero() -> Self {
        Poly::new(0.0, vec![])
    }

    fn trim(&mut self) {
        while self.coeffs.last() == Some(&0.0) {
            self.coeffs.pop();
        }
    }

    pub fn origin(&self) -> f64 {
        self.origin
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, with the zero polynomial reported as 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    fn eval_local(&self, u: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * u + c)
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.eval_local(t - self.origin)
    }

    pub fn derivative(&self) -> Poly {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, &c)| c * k as f64)
            .collect();
        Poly::new(self.origin, coeffs)
    }

    /// Antiderivative vanishing at the origin.
    pub fn antiderivative(&self) -> Poly {
        let mut coeffs = Vec::with_capacity(self.coeffs.len() + 1);
        coeffs.push(0.0);
        for (k, &c) in self.coeffs.iter().enumerate() {
            coeffs.push(c / (k + 1) as f64);
        }
        Poly::new(self.origin, coeffs)
    }

    /// `∫_lo^hi p(t) dt`.
    pub fn integral(&self, lo: f64, hi: f64) -> f64 {
        let a = self.antiderivative();
        a.eval(hi) - a.eval(lo)
    }

    /// Same polynomial expressed around a new origin (Taylor shift).
    pub fn recenter(&self, origin: f64) -> Poly {
        let d = origin - self.origin;
        let mut c = self.coeffs.clone();
        let n = c.len();
        if d != 0.0 {
            for i in 0..n {
                for j in (i..n.saturating_sub(1)).rev() {
                    c[j] += d * c[j + 1];
                }
            }
        }
        Poly::new(origin, c)
    }

    pub fn scale(&self, k: f64) -> Poly {
        Poly::new(self.origin, self.coeffs.iter().map(|c| c * k).collect())
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let o = other.recenter(self.origin);
        let n = self.coeffs.len().max(o.coeffs.len());
        let coeffs = (0..n)
            .map(|k| self.coeffs.get(k).unwrap_or(&0.0) + o.coeffs.get(k).unwrap_or(&0.0))
            .collect();
        Poly::new(self.origin, coeffs)
    }

    pub fn add_constant(&self, k: f64) -> Poly {
        self.add(&Poly::constant(k))
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::new(self.origin, vec![]);
        }
        let o = other.recenter(self.origin);
        let mut coeffs = vec![0.0; self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in o.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        Poly::new(self.origin, coeffs)
    }

    /// Real roots strictly inside `(lo, hi)`, sorted. Roots of even
    /// multiplicity may be reported or not; callers only rely on sign changes.
    pub fn roots_in(&self, lo: f64, hi: f64) -> Vec<f64> {
        let u0 = lo - self.origin;
        let u1 = hi - self.origin;
        let mut out: Vec<f64> = local_roots(&self.coeffs, u0, u1)
            .into_iter()
            .map(|u| u + self.origin)
            .filter(|&t| t > lo && t < hi)
            .collect();
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    }

    /// Minimum and maximum over the closed interval `[lo, hi]`.
    pub fn extrema(&self, lo: f64, hi: f64) -> (f64, f64) {
        let mut lo_v = self.eval(lo).min(self.eval(hi));
        let mut hi_v = self.eval(lo).max(self.eval(hi));
        for r in self.derivative().roots_in(lo, hi) {
            let v = self.eval(r);
            lo_v = lo_v.min(v);
            hi_v = hi_v.max(v);
        }
        (lo_v, hi_v)
    }
}

fn eval_coeffs(c: &[f64], u: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &k| acc * u + k)
}

fn local_roots(c: &[f64], u0: f64, u1: f64) -> Vec<f64> {
    match c.len() {
        0 | 1 => vec![],
        2 => vec![-c[0] / c[1]],
        3 => {
            let (a, b, cc) = (c[2], c[1], c[0]);
            let disc = b * b - 4.0 * a * cc;
            if disc < 0.0 {
                return vec![];
            }
            let q = -0.5 * (b + b.signum() * disc.sqrt());
            let mut r = Vec::new();
            if q != 0.0 {
                r.push(cc / q);
                r.push(q / a);
            } else {
                r.push(0.0);
            }
            r
        }
        _ => {
            // Split at critical points, then bisect each monotone stretch.
            let d: Vec<f64> = c
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &x)| x * k as f64)
                .collect();
            let mut cuts = vec![u0];
            cuts.extend(local_roots(&d, u0, u1).into_iter().filter(|&u| u > u0 && u < u1));
            cuts.push(u1);
            cuts.sort_by(f64::total_cmp);
            let mut roots = Vec::new();
            for w in cuts.windows(2) {
                let (mut a, mut b) = (w[0], w[1]);
                let (mut fa, fb) = (eval_coeffs(c, a), eval_coeffs(c, b));
                if fa == 0.0 {
                    roots.push(a);
                    continue;
                }
                if fa.signum() == fb.signum() {
                    continue;
                }
                for _ in 0..200 {
                    let m = 0.5 * (a + b);
                    if m <= a || m >= b {
                        break;
                    }
                    let fm = eval_coeffs(c, m);
                    if fm == 0.0 {
                        a = m;
                        b = m;
                        break;
                    }
                    if fm.signum() == fa.signum() {
                        a = m;
                        fa = fm;
                    } else {
                        b = m;
                    }
                }
                roots.push(0.5 * (a + b));
            }
            roots
        }
    }
}

/// Where a point falls relative to the knots of a [`Piecewise`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Loc {
    Before,
    Knot(usize),
    Inside(usize),
    After,
}

pub(crate) fn locate(knots: &[f64], t: f64) -> Loc {
    let n = knots.len();
    if t < knots[0] {
        return Loc::Before;
    }
    if t > knots[n - 1] {
        return Loc::After;
    }
    let i = knots.partition_point(|&k| k < t);
    if knots[i] == t {
        Loc::Knot(i)
    } else {
        Loc::Inside(i - 1)
    }
}

/// A function on `[x_0, x_n]` given by a polynomial on each open piece
/// `(x_i, x_{i+1})` and an explicit value at every knot. Outside the domain it
/// is extended by the constant end values.
#[derive(Debug, Clone, PartialEq)]
pub struct Piecewise {
    knots: Vec<f64>,
    pieces: Vec<Poly>,
    values: Vec<f64>,
}

impl Piecewise {
    pub fn new(knots: Vec<f64>, pieces: Vec<Poly>, values: Vec<f64>) -> Result<Self> {
        if knots.len() < 2 {
            return Err(malformed("knots", "need at least two knots"));
        }
        if knots.iter().any(|k| !k.is_finite()) || values.iter().any(|v| !v.is_finite()) {
            return Err(malformed("knots", "non-finite entry"));
        }
        if knots.windows(2).any(|w| w[0] >= w[1]) {
            return Err(malformed("knots", "must be strictly increasing"));
        }
        if pieces.len() + 1 != knots.len() {
            return Err(malformed("pieces", "need exactly one piece per knot interval"));
        }
        if values.len() != knots.len() {
            return Err(malformed("values", "need exactly one value per knot"));
        }
        Ok(Piecewise {
            knots,
            pieces,
            values,
        })
    }

    /// Left-continuous function from pieces: each knot takes the limit of the
    /// piece on its left (the first knot takes the first piece's value).
    pub fn left_continuous(knots: Vec<f64>, pieces: Vec<Poly>) -> Result<Self> {
        if pieces.is_empty() || pieces.len() + 1 != knots.len() {
            return Err(malformed("pieces", "need exactly one piece per knot interval"));
        }
        let mut values = Vec::with_capacity(knots.len());
        values.push(pieces[0].eval(knots[0]));
        for (i, p) in pieces.iter().enumerate() {
            values.push(p.eval(knots[i + 1]));
        }
        Piecewise::new(knots, pieces, values)
    }

    /// Continuous piecewise-linear interpolant through `points` (sorted by x).
    pub fn linear(points: &[(f64, f64)]) -> Result<Self> {
        if points.len() < 2 {
            return Err(malformed("points", "need at least two points"));
        }
        let knots: Vec<f64> = points.iter().map(|p| p.0).collect();
        let values: Vec<f64> = points.iter().map(|p| p.1).collect();
        let pieces = points
            .windows(2)
            .map(|w| {
                let m = (w[1].1 - w[0].1) / (w[1].0 - w[0].0);
                Poly::affine(w[0].0, w[0].1, m)
            })
            .collect();
        Piecewise::new(knots, pieces, values)
    }

    pub fn constant(lo: f64, hi: f64, c: f64) -> Result<Self> {
        Piecewise::new(vec![lo, hi], vec![Poly::constant(c)], vec![c, c])
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn pieces(&self) -> &[Poly] {
        &self.pieces
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.knots[0], self.knots[self.knots.len() - 1])
    }

    pub fn locate(&self, t: f64) -> Loc {
        locate(&self.knots, t)
    }

    pub fn value(&self, t: f64) -> f64 {
        match self.locate(t) {
            Loc::Before => self.values[0],
            Loc::After => self.values[self.values.len() - 1],
            Loc::Knot(i) => self.values[i],
            Loc::Inside(i) => self.pieces[i].eval(t),
        }
    }

    pub fn right_limit(&self, t: f64) -> f64 {
        match self.locate(t) {
            Loc::Before => self.values[0],
            Loc::After => self.values[self.values.len() - 1],
            Loc::Knot(i) if i + 1 == self.knots.len() => self.values[i],
            Loc::Knot(i) | Loc::Inside(i) => self.pieces[i].eval(t),
        }
    }

    pub fn left_limit(&self, t: f64) -> f64 {
        match self.locate(t) {
            Loc::Before => self.values[0],
            Loc::After => self.values[self.values.len() - 1],
            Loc::Knot(0) => self.values[0],
            Loc::Knot(i) => self.pieces[i - 1].eval(t),
            Loc::Inside(i) => self.pieces[i].eval(t),
        }
    }

    /// The polynomial governing the open interval around `mid` (a constant
    /// outside the domain).
    pub fn piece_around(&self, mid: f64) -> Poly {
        match self.locate(mid) {
            Loc::Before => Poly::constant(self.values[0]),
            Loc::After => Poly::constant(self.values[self.values.len() - 1]),
            Loc::Inside(i) => self.pieces[i].clone(),
            Loc::Knot(i) => {
                if i + 1 < self.knots.len() {
                    self.pieces[i].clone()
                } else {
                    Poly::constant(self.values[i])
                }
            }
        }
    }

    /// Distance from `t` to the nearest knot strictly to its right (`right =
    /// true`) or left.
    pub fn gap(&self, t: f64, right: bool) -> Option<f64> {
        if right {
            let i = self.knots.partition_point(|&k| k <= t);
            self.knots.get(i).map(|k| k - t)
        } else {
            let i = self.knots.partition_point(|&k| k < t);
            if i == 0 {
                None
            } else {
                Some(t - self.knots[i - 1])
            }
        }
    }

    /// Restriction to `[lo, hi]` (which may extend past the domain, using the
    /// constant extension).
    pub fn restrict(&self, lo: f64, hi: f64) -> Result<Piecewise> {
        let mut knots = vec![lo];
        knots.extend(self.knots.iter().copied().filter(|&k| k > lo && k < hi));
        knots.push(hi);
        self.resample(knots)
    }

    /// Same function on a refined knot vector.
    pub fn resample(&self, knots: Vec<f64>) -> Result<Piecewise> {
        let pieces = knots
            .windows(2)
            .map(|w| self.piece_around(0.5 * (w[0] + w[1])))
            .collect();
        let values = knots.iter().map(|&k| self.value(k)).collect();
        Piecewise::new(knots, pieces, values)
    }

    fn union_knots(&self, other: &Piecewise) -> Vec<f64> {
        let mut k: Vec<f64> = self.knots.iter().chain(other.knots.iter()).copied().collect();
        k.sort_by(f64::total_cmp);
        k.dedup();
        k
    }

    /// `Σ w_i f_i` on the union of the knot vectors.
    pub fn linear_combination(terms: &[(f64, &Piecewise)]) -> Result<Piecewise> {
        let mut knots: Vec<f64> = terms.iter().flat_map(|(_, f)| f.knots.iter().copied()).collect();
        knots.sort_by(f64::total_cmp);
        knots.dedup();
        let pieces = knots
            .windows(2)
            .map(|w| {
                let mid = 0.5 * (w[0] + w[1]);
                terms
                    .iter()
                    .fold(Poly::new(w[0], vec![]), |acc, (c, f)| {
                        acc.add(&f.piece_around(mid).scale(*c))
                    })
            })
            .collect();
        let values = knots
            .iter()
            .map(|&k| terms.iter().map(|(c, f)| c * f.value(k)).sum())
            .collect();
        Piecewise::new(knots, pieces, values)
    }

    pub fn sub(&self, other: &Piecewise) -> Result<Piecewise> {
        Piecewise::linear_combination(&[(1.0, self), (-1.0, other)])
    }

    pub fn scale(&self, c: f64) -> Piecewise {
        Piecewise {
            knots: self.knots.clone(),
            pieces: self.pieces.iter().map(|p| p.scale(c)).collect(),
            values: self.values.iter().map(|v| v * c).collect(),
        }
    }

    pub fn mul(&self, other: &Piecewise) -> Result<Piecewise> {
        let knots = self.union_knots(other);
        let pieces = knots
            .windows(2)
            .map(|w| {
                let mid = 0.5 * (w[0] + w[1]);
                self.piece_around(mid)
                    .recenter(w[0])
                    .mul(&other.piece_around(mid))
            })
            .collect();
        let values = knots.iter().map(|&k| self.value(k) * other.value(k)).collect();
        Piecewise::new(knots, pieces, values)
    }

    /// Split every piece at the points where `split(piece)` has roots, then map
    /// each sub-piece through `map(piece, midpoint)` and every knot value
    /// through `map_value`.
    fn split_map(
        &self,
        split: impl Fn(&Poly) -> Vec<Poly>,
        map: impl Fn(&Poly, f64) -> Poly,
        map_value: impl Fn(f64) -> f64,
    ) -> Result<Piecewise> {
        let mut knots = vec![self.knots[0]];
        let mut pieces = Vec::new();
        for (i, p) in self.pieces.iter().enumerate() {
            let (lo, hi) = (self.knots[i], self.knots[i + 1]);
            let mut cuts: Vec<f64> = split(p).iter().flat_map(|q| q.roots_in(lo, hi)).collect();
            cuts.sort_by(f64::total_cmp);
            cuts.dedup();
            let mut prev = lo;
            for c in cuts.into_iter().chain(std::iter::once(hi)) {
                if c <= prev {
                    continue;
                }
                pieces.push(map(p, 0.5 * (prev + c)));
                knots.push(c);
                prev = c;
            }
        }
        let values = knots.iter().map(|&k| map_value(self.value(k))).collect();
        Piecewise::new(knots, pieces, values)
    }

    pub fn abs(&self) -> Result<Piecewise> {
        self.split_map(
            |p| vec![p.clone()],
            |p, mid| if p.eval(mid) < 0.0 { p.scale(-1.0) } else { p.clone() },
            f64::abs,
        )
    }

    /// `min(hi, max(f, lo))`.
    pub fn clamp(&self, lo: f64, hi: f64) -> Result<Piecewise> {
        self.split_map(
            |p| vec![p.add_constant(-lo), p.add_constant(-hi)],
            |p, mid| {
                let v = p.eval(mid);
                if v < lo {
                    Poly::constant(lo)
                } else if v > hi {
                    Poly::constant(hi)
                } else {
                    p.clone()
                }
            },
            |v| v.clamp(lo, hi),
        )
    }

    /// Infimum and supremum over the domain, counting knot values and the
    /// closure of each piece.
    pub fn range(&self) -> (f64, f64) {
        self.range_on(self.knots[0], self.knots[self.knots.len() - 1])
    }

    pub fn range_on(&self, lo: f64, hi: f64) -> (f64, f64) {
        let mut mn = f64::INFINITY;
        let mut mx = f64::NEG_INFINITY;
        for (i, &k) in self.knots.iter().enumerate() {
            if k >= lo && k <= hi {
                mn = mn.min(self.values[i]);
                mx = mx.max(self.values[i]);
            }
        }
        for (i, p) in self.pieces.iter().enumerate() {
            let a = self.knots[i].max(lo);
            let b = self.knots[i + 1].min(hi);
            if a < b {
                let (x, y) = p.extrema(a, b);
                mn = mn.min(x);
                mx = mx.max(y);
            }
        }
        if lo < self.knots[0] || hi > self.knots[self.knots.len() - 1] {
            mn = mn.min(self.value(lo)).min(self.value(hi));
            mx = mx.max(self.value(lo)).max(self.value(hi));
        }
        (mn, mx)
    }

    pub fn sup_abs_on(&self, lo: f64, hi: f64) -> f64 {
        let (a, b) = self.range_on(lo, hi);
        a.abs().max(b.abs())
    }

    /// Classical derivative on each piece; knot values are the left limits of
    /// the derivative (the choice is immaterial for integration).
    pub fn derivative(&self) -> Result<Piecewise> {
        let pieces: Vec<Poly> = self.pieces.iter().map(Poly::derivative).collect();
        Piecewise::left_continuous(self.knots.clone(), pieces)
    }

    pub fn map_values(&self, mut f: impl FnMut(usize, f64) -> f64) -> Piecewise {
        let mut out = self.clone();
        for (i, v) in out.values.iter_mut().enumerate() {
            *v = f(i, *v);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recenter_preserves_values() {
        let p = Poly::new(1.0, vec![2.0, -1.0, 0.5, 3.0]);
        let q = p.recenter(-2.5);
        for t in [-3.0, 0.0, 1.0, 2.25] {
            assert!((p.eval(t) - q.eval(t)).abs() < 1e-10);
        }
    }

    #[test]
    fn integral_of_affine_product() {
        let p = Poly::affine(0.0, 1.0, 2.0).mul(&Poly::affine(1.0, 0.0, 1.0));
        // ∫_0^1 (1 + 2t)(t − 1) dt = −5/6
        assert!((p.integral(0.0, 1.0) + 5.0 / 6.0).abs() < 1e-14);
    }

    #[test]
    fn cubic_roots_by_bisection() {
        // (t − 0.2)(t − 0.5)(t − 0.9)
        let p = Poly::new(0.0, vec![-0.09, 0.73, -1.6, 1.0]);
        let r = p.roots_in(0.0, 1.0);
        assert_eq!(r.len(), 3);
        for (a, b) in r.iter().zip([0.2, 0.5, 0.9]) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn knot_values_and_limits() {
        let f = Piecewise::new(
            vec![0.0, 1.0, 2.0],
            vec![Poly::constant(0.0), Poly::constant(1.0)],
            vec![0.0, 5.0, 1.0],
        )
        .unwrap();
        assert_eq!(f.value(1.0), 5.0);
        assert_eq!(f.left_limit(1.0), 0.0);
        assert_eq!(f.right_limit(1.0), 1.0);
        assert_eq!(f.value(-1.0), 0.0);
        assert_eq!(f.value(7.0), 1.0);
    }

    #[test]
    fn abs_and_clamp_split_at_crossings() {
        let f = Piecewise::linear(&[(0.0, -1.0), (2.0, 1.0)]).unwrap();
        let a = f.abs().unwrap();
        assert_eq!(a.knots(), &[0.0, 1.0, 2.0]);
        assert!((a.value(0.5) - 0.5).abs() < 1e-15);
        let c = f.clamp(-0.5, 0.25).unwrap();
        assert_eq!(c.value(0.1), -0.5);
        assert_eq!(c.value(1.9), 0.25);
        assert!((c.value(1.0) - 0.0).abs() < 1e-15);
        assert_eq!(c.range(), (-0.5, 0.25));
    }
}
