//! Left-continuous derivators of bounded variation: piecewise-affine segments
//! with signed jump atoms, plus the oscillating example with an unresolved
//! tail next to its accumulation point.

use serde::Serialize;

use crate::error::{malformed, Endpoint, Error, Result};
use crate::measure::MeasureKind;
use crate::oscillator;
use crate::poly::{locate, Loc};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DerivatorKind {
    PiecewiseAffine,
    Oscillator,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Value,
    RightLimit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Distance {
    /// `ρ_g(s,t) = |g̃(s) − g̃(t)|`.
    Variation,
    /// `|g(s) − g(t)|`.
    Raw,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "class", content = "component", rename_all = "snake_case")]
pub enum Class {
    Regular,
    Jump,
    /// Inside the open constancy component with this index.
    ConstancyInterior(usize),
    NPlus,
    NMinus,
    LeftEndpoint,
    RightEndpoint,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PointClass {
    #[serde(flatten)]
    pub class: Class,
    pub t_star: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OscillatorParams {
    pub depth: u64,
    pub r: f64,
}

/// One distribution function: a slope per segment, a jump per knot and the
/// left value at every knot.
#[derive(Debug, Clone, PartialEq)]
struct Track {
    slopes: Vec<f64>,
    jumps: Vec<f64>,
    left: Vec<f64>,
}

impl Track {
    fn build(knots: &[f64], slopes: Vec<f64>, jumps: Vec<f64>, base: f64) -> Track {
        let mut left = Vec::with_capacity(knots.len());
        left.push(base);
        for i in 0..slopes.len() {
            let v = left[i] + jumps[i] + slopes[i] * (knots[i + 1] - knots[i]);
            left.push(v);
        }
        Track {
            slopes,
            jumps,
            left,
        }
    }

    fn eval(&self, knots: &[f64], t: f64, side: Side) -> f64 {
        let last = knots.len() - 1;
        match locate(knots, t) {
            Loc::Before => self.left[0],
            Loc::After => self.left[last] + self.jumps[last],
            Loc::Knot(i) => match side {
                Side::Value => self.left[i],
                Side::RightLimit => self.left[i] + self.jumps[i],
            },
            Loc::Inside(i) => self.left[i] + self.jumps[i] + self.slopes[i] * (t - knots[i]),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Derivator {
    kind: DerivatorKind,
    knots: Vec<f64>,
    // Indexed by `MeasureKind as usize`.
    tracks: [Track; 4],
    /// Open constancy components as knot-index pairs `(i, j)`, i.e. `(t_i, t_j)`.
    components: Vec<(usize, usize)>,
    /// `[knots[0], knots[1])` is a modelled tail whose true values differ from
    /// the stored ones by at most `tail_bound`.
    tail_bound: Option<f64>,
    oscillator: Option<OscillatorParams>,
}

fn check_knots(knots: &[f64]) -> Result<()> {
    if knots.len() < 2 {
        return Err(malformed("breakpoints", "need at least the two domain endpoints"));
    }
    if let Some(k) = knots.iter().find(|k| !k.is_finite()) {
        return Err(malformed("breakpoints", format!("non-finite breakpoint {k}")));
    }
    if let Some(w) = knots.windows(2).find(|w| w[0] >= w[1]) {
        return Err(malformed(
            "breakpoints",
            format!("must be strictly increasing ({} then {})", w[0], w[1]),
        ));
    }
    Ok(())
}

impl Derivator {
    /// Piecewise-affine derivator with the endpoint hypotheses enforced.
    /// `jumps` may have one entry per knot or omit the (necessarily zero) one
    /// at `b`.
    pub fn piecewise_affine(knots: Vec<f64>, slopes: Vec<f64>, jumps: Vec<f64>, base: f64) -> Result<Self> {
        let d = Derivator::piecewise_affine_unchecked(knots, slopes, jumps, base)?;
        d.check_admissible()?;
        Ok(d)
    }

    /// Same as [`Derivator::piecewise_affine`] without the endpoint
    /// hypotheses. Truncations, Jordan parts and restrictions need this.
    pub fn piecewise_affine_unchecked(
        knots: Vec<f64>,
        slopes: Vec<f64>,
        mut jumps: Vec<f64>,
        base: f64,
    ) -> Result<Self> {
        check_knots(&knots)?;
        let m = knots.len() - 1;
        if slopes.len() != m {
            return Err(malformed(
                "slopes",
                format!("expected {m} slopes for {} breakpoints, got {}", m + 1, slopes.len()),
            ));
        }
        if jumps.len() == m {
            jumps.push(0.0);
        }
        if jumps.len() != m + 1 {
            return Err(malformed(
                "jumps",
                format!("expected {} jumps (one per breakpoint), got {}", m + 1, jumps.len()),
            ));
        }
        if slopes.iter().chain(jumps.iter()).any(|v| !v.is_finite()) || !base.is_finite() {
            return Err(malformed("slopes", "slopes, jumps and base_value must be finite"));
        }
        let pos = |v: &f64| v.max(0.0);
        let neg = |v: &f64| (-v).max(0.0);
        let tracks = [
            Track::build(&knots, slopes.clone(), jumps.clone(), base),
            Track::build(&knots, slopes.iter().map(pos).collect(), jumps.iter().map(pos).collect(), 0.0),
            Track::build(&knots, slopes.iter().map(neg).collect(), jumps.iter().map(neg).collect(), 0.0),
            Track::build(
                &knots,
                slopes.iter().map(|s| s.abs()).collect(),
                jumps.iter().map(|j| j.abs()).collect(),
                0.0,
            ),
        ];
        Ok(Derivator::assemble(DerivatorKind::PiecewiseAffine, knots, tracks, None, None))
    }

    /// `g(t) = t − a` on `[a, b]`.
    pub fn identity(a: f64, b: f64) -> Result<Self> {
        Derivator::piecewise_affine(vec![a, b], vec![1.0], vec![0.0, 0.0], 0.0)
    }

    /// The oscillating derivator on `[0, 1]`: slope `+1` on `(x_{k+1}, x_k]` for
    /// even `k`, `−1` for odd `k`, resolved for `k ≤ 2N`. Below `x_{2N+1}` the
    /// stored model is `g = 0`, `g̃(t) = t`, and every answer there carries the
    /// bound `sup |g| ≤ α_{N+1}·x_{2N+2}`.
    pub fn oscillator(depth: u64, r: f64) -> Result<Self> {
        if depth < 2 {
            return Err(malformed("oscillator.N", "truncation depth must be at least 2"));
        }
        if !(r > 0.0 && r.is_finite()) {
            return Err(malformed("oscillator.r", "r must be positive"));
        }
        let last = 2 * depth + 1;
        // Knots increase: 0, x_{2N+1}, x_{2N}, …, x_1.
        let idx: Vec<u64> = (1..=last).rev().collect();
        let mut knots = vec![0.0];
        knots.extend(idx.iter().map(|&k| oscillator::x_f64(k)));
        let mut signed_slopes = vec![0.0];
        signed_slopes.extend(idx[1..].iter().map(|&k| if k % 2 == 0 { 1.0 } else { -1.0 }));
        // Segment (x_{k+1}, x_k] has the slope of index k; idx[1..] lists the
        // upper ends x_{2N}, …, x_1.
        let g: Vec<f64> = std::iter::once(0.0)
            .chain(idx.iter().map(|&k| oscillator::g_at_f64(k)))
            .collect();
        let n = knots.len();
        let zeros = vec![0.0; n];
        let mk = |slopes: Vec<f64>, left: Vec<f64>| Track {
            slopes,
            jumps: zeros.clone(),
            left,
        };
        let total_left = knots.clone();
        let pos_left: Vec<f64> = (0..n).map(|i| 0.5 * (total_left[i] + g[i])).collect();
        let neg_left: Vec<f64> = (0..n).map(|i| 0.5 * (total_left[i] - g[i])).collect();
        let mut pos_slopes = vec![0.5];
        pos_slopes.extend(signed_slopes[1..].iter().map(|s: &f64| s.max(0.0)));
        let mut neg_slopes = vec![0.5];
        neg_slopes.extend(signed_slopes[1..].iter().map(|s: &f64| (-s).max(0.0)));
        let mut abs_slopes = vec![1.0];
        abs_slopes.extend(signed_slopes[1..].iter().map(|s: &f64| s.abs()));
        let tracks = [
            mk(signed_slopes, g),
            mk(pos_slopes, pos_left),
            mk(neg_slopes, neg_left),
            mk(abs_slopes, total_left),
        ];
        let bound = oscillator::alpha_f64(depth + 1) * oscillator::x_f64(2 * depth + 2);
        Ok(Derivator::assemble(
            DerivatorKind::Oscillator,
            knots,
            tracks,
            Some(bound),
            Some(OscillatorParams { depth, r }),
        ))
    }

    fn assemble(
        kind: DerivatorKind,
        knots: Vec<f64>,
        tracks: [Track; 4],
        tail_bound: Option<f64>,
        oscillator: Option<OscillatorParams>,
    ) -> Derivator {
        let flat = |i: usize| tracks[3].slopes[i] == 0.0;
        let m = knots.len() - 1;
        let mut components = Vec::new();
        let mut i = 0;
        while i < m {
            if !flat(i) {
                i += 1;
                continue;
            }
            let mut j = i + 1;
            while j < m && flat(j) && tracks[3].jumps[j] == 0.0 {
                j += 1;
            }
            components.push((i, j));
            i = j;
        }
        Derivator {
            kind,
            knots,
            tracks,
            components,
            tail_bound,
            oscillator,
        }
    }

    fn check_admissible(&self) -> Result<()> {
        let (a, b) = self.domain();
        let m = self.knots.len() - 1;
        let total = &self.tracks[3];
        if total.slopes[0] == 0.0 && total.jumps[0] == 0.0 {
            return Err(Error::NonAdmissibleEndpoint {
                endpoint: Endpoint::Left,
                at: a,
                set: "N_g^-",
            });
        }
        if total.jumps[m] != 0.0 {
            return Err(Error::NonAdmissibleEndpoint {
                endpoint: Endpoint::Right,
                at: b,
                set: "D_g",
            });
        }
        if total.slopes[m - 1] == 0.0 {
            return Err(Error::NonAdmissibleEndpoint {
                endpoint: Endpoint::Right,
                at: b,
                set: "N_g^+",
            });
        }
        Ok(())
    }

    pub fn kind(&self) -> DerivatorKind {
        self.kind
    }

    pub fn oscillator_params(&self) -> Option<OscillatorParams> {
        self.oscillator
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.knots[0], self.knots[self.knots.len() - 1])
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    /// Signed slopes, one per segment `[t_i, t_{i+1})`.
    pub fn slopes(&self) -> &[f64] {
        &self.tracks[0].slopes
    }

    /// Signed jumps `g(t_i⁺) − g(t_i)`, one per knot.
    pub fn jumps(&self) -> &[f64] {
        &self.tracks[0].jumps
    }

    pub fn slope(&self, kind: MeasureKind, i: usize) -> f64 {
        self.tracks[kind as usize].slopes[i]
    }

    pub fn jump(&self, kind: MeasureKind, i: usize) -> f64 {
        self.tracks[kind as usize].jumps[i]
    }

    /// Points with a nonzero jump, with the jump.
    pub fn atoms(&self) -> Vec<(f64, f64)> {
        self.knots
            .iter()
            .zip(self.jumps())
            .filter(|(_, j)| **j != 0.0)
            .map(|(t, j)| (*t, *j))
            .collect()
    }

    /// Jump at `t` (zero off the knots).
    pub fn jump_at(&self, t: f64) -> f64 {
        match locate(&self.knots, t) {
            Loc::Knot(i) => self.jumps()[i],
            _ => 0.0,
        }
    }

    /// Open constancy components `(a_n, b_n)`.
    pub fn components(&self) -> Vec<(f64, f64)> {
        self.components
            .iter()
            .map(|&(i, j)| (self.knots[i], self.knots[j]))
            .collect()
    }

    /// End of the modelled tail region `[a, tail_end)`, if any.
    pub fn tail_end(&self) -> Option<f64> {
        self.tail_bound.map(|_| self.knots[1])
    }

    pub fn tail_bound(&self) -> Option<f64> {
        self.tail_bound
    }

    pub fn is_nondecreasing(&self) -> bool {
        self.tail_bound.is_none()
            && self.slopes().iter().all(|&s| s >= 0.0)
            && self.jumps().iter().all(|&j| j >= 0.0)
    }

    fn check(&self, t: f64) -> Result<()> {
        let (a, b) = self.domain();
        if t.is_nan() || t < a || t > b {
            return Err(Error::OutOfDomain { t, a, b });
        }
        Ok(())
    }

    /// Distribution function of the given kind: `g` for `Signed`, `g̃` for
    /// `Total`, the Jordan parts for `Positive`/`Negative`. Clamps outside the
    /// domain.
    pub fn distribution(&self, kind: MeasureKind, t: f64, side: Side) -> f64 {
        self.tracks[kind as usize].eval(&self.knots, t, side)
    }

    /// `g(t)` (left value) or `g(t⁺)`.
    pub fn evaluate(&self, t: f64, side: Side) -> Result<f64> {
        self.check(t)?;
        if side == Side::RightLimit && t == self.domain().1 {
            let (a, b) = self.domain();
            return Err(Error::OutOfDomain { t, a, b });
        }
        Ok(self.g(t, side))
    }

    /// Value with a bound on the distance to the true derivator (nonzero only
    /// inside an oscillator tail).
    pub fn evaluate_bounded(&self, t: f64, side: Side) -> Result<(f64, f64)> {
        let v = self.evaluate(t, side)?;
        Ok((v, self.tail_error_at(t)))
    }

    pub(crate) fn tail_error_at(&self, t: f64) -> f64 {
        match (self.tail_bound, self.tail_end()) {
            (Some(b), Some(end)) if t < end => b.min(t - self.knots[0]),
            _ => 0.0,
        }
    }

    /// Unchecked `g`.
    pub fn g(&self, t: f64, side: Side) -> f64 {
        self.distribution(MeasureKind::Signed, t, side)
    }

    /// Unchecked `g̃`.
    pub fn g_tilde(&self, t: f64, side: Side) -> f64 {
        self.distribution(MeasureKind::Total, t, side)
    }

    pub fn variation_at(&self, t: f64) -> Result<f64> {
        self.check(t)?;
        Ok(self.g_tilde(t, Side::Value))
    }

    pub fn g_distance(&self, s: f64, t: f64, kind: Distance) -> Result<f64> {
        self.check(s)?;
        self.check(t)?;
        Ok(match kind {
            Distance::Variation => (self.g_tilde(s, Side::Value) - self.g_tilde(t, Side::Value)).abs(),
            Distance::Raw => (self.g(s, Side::Value) - self.g(t, Side::Value)).abs(),
        })
    }

    pub fn classify_point(&self, t: f64) -> Result<PointClass> {
        self.check(t)?;
        Ok(self.classify(t))
    }

    pub(crate) fn classify(&self, t: f64) -> PointClass {
        let (a, b) = self.domain();
        let at = |class| PointClass { class, t_star: t };
        let knot = match locate(&self.knots, t) {
            Loc::Knot(i) => Some(i),
            _ => None,
        };
        if let Some(i) = knot {
            if self.tracks[3].jumps[i] != 0.0 {
                return at(Class::Jump);
            }
        }
        for (n, &(i, j)) in self.components.iter().enumerate() {
            if t > self.knots[i] && t < self.knots[j] {
                return PointClass {
                    class: Class::ConstancyInterior(n),
                    t_star: self.knots[j],
                };
            }
        }
        if t == a {
            return at(Class::LeftEndpoint);
        }
        if t == b {
            return at(Class::RightEndpoint);
        }
        if let Some(k) = knot {
            if self.components.iter().any(|&(i, _)| i == k) {
                return at(Class::NMinus);
            }
            if self.components.iter().any(|&(_, j)| j == k) {
                return at(Class::NPlus);
            }
        }
        at(Class::Regular)
    }

    /// Index of the segment `[t_i, t_{i+1})` containing `t` (the last segment
    /// for `t = b`).
    pub fn segment_index(&self, t: f64) -> usize {
        let m = self.knots.len() - 1;
        match locate(&self.knots, t) {
            Loc::Before => 0,
            Loc::After => m - 1,
            Loc::Knot(i) => i.min(m - 1),
            Loc::Inside(i) => i,
        }
    }

    /// Nondecreasing derivator `g̃` on the same domain (exactly the identity
    /// for the oscillator).
    pub fn variation_derivator(&self) -> Result<Derivator> {
        if self.kind == DerivatorKind::Oscillator {
            let (a, b) = self.domain();
            return Derivator::piecewise_affine_unchecked(vec![a, b], vec![1.0], vec![0.0, 0.0], 0.0);
        }
        self.track_derivator(MeasureKind::Total)
    }

    /// The distribution function of `kind` as a derivator in its own right.
    pub(crate) fn track_derivator(&self, kind: MeasureKind) -> Result<Derivator> {
        let t = &self.tracks[kind as usize];
        let mut d = Derivator::piecewise_affine_unchecked(
            self.knots.clone(),
            t.slopes.clone(),
            t.jumps.clone(),
            t.left[0],
        )?;
        if self.tail_bound.is_some() {
            d.tail_bound = self.tail_bound;
            // Keep the exact knot values rather than re-accumulating.
            d.tracks[0].left = t.left.clone();
        }
        Ok(d)
    }

    /// Restriction to `[lo, hi] ⊆ [a, b]`, keeping `g(lo)` as base value, the
    /// jump at `lo` and dropping the one at `hi`.
    pub fn restrict(&self, lo: f64, hi: f64) -> Result<Derivator> {
        self.check(lo)?;
        self.check(hi)?;
        if lo >= hi {
            return Err(malformed("restrict", "need lo < hi"));
        }
        if self.tail_end().is_some_and(|e| lo < e) {
            return Err(Error::Unsupported("restriction into an oscillator tail".into()));
        }
        let mut knots = vec![lo];
        knots.extend(self.knots.iter().copied().filter(|&k| k > lo && k < hi));
        knots.push(hi);
        let slopes = knots
            .windows(2)
            .map(|w| self.slopes()[self.segment_index(0.5 * (w[0] + w[1]))])
            .collect();
        let mut jumps: Vec<f64> = knots.iter().map(|&k| self.jump_at(k)).collect();
        *jumps.last_mut().expect("two knots") = 0.0;
        let mut d = Derivator::piecewise_affine_unchecked(knots, slopes, jumps, self.g(lo, Side::Value))?;
        // Exact knot values: take them from the parent instead of re-summing.
        for (i, &k) in d.knots.clone().iter().enumerate() {
            d.tracks[0].left[i] = self.g(k, Side::Value);
        }
        Ok(d)
    }

    /// Same derivator with the jump at knot `i` replaced (no admissibility
    /// check).
    pub fn with_jumps(&self, jumps: Vec<f64>) -> Result<Derivator> {
        Derivator::piecewise_affine_unchecked(
            self.knots.clone(),
            self.slopes().to_vec(),
            jumps,
            self.tracks[0].left[0],
        )
    }

    /// `inf {t ∈ [a,b] : G(t) ≥ y}` for the distribution `G` of `kind`, which
    /// must be nondecreasing. Values inside a jump gap map to the jump point.
    pub(crate) fn quantile(&self, kind: MeasureKind, y: f64) -> Result<f64> {
        let tr = &self.tracks[kind as usize];
        let k = &self.knots;
        let m = k.len() - 1;
        let lo = tr.left[0];
        let hi = tr.left[m] + tr.jumps[m];
        if y.is_nan() || y < lo || y > hi {
            return Err(Error::OutOfRange { y, lo, hi });
        }
        if y <= lo {
            return Ok(k[0]);
        }
        // First knot whose left value reaches y; the answer lies in the
        // segment just before it (or at the jump that starts that segment).
        let j = tr.left.partition_point(|&v| v < y);
        if j == 0 {
            return Ok(k[0]);
        }
        let i = (j - 1).min(m);
        let start = tr.left[i] + tr.jumps[i];
        if y <= start || i == m {
            return Ok(k[i]);
        }
        let s = tr.slopes[i];
        Ok((k[i] + (y - start) / s).clamp(k[i], k[i + 1]))
    }

    /// Left values of `g` at the knots.
    pub fn knot_values(&self) -> &[f64] {
        &self.tracks[0].left
    }

    /// Left values of the distribution of `kind` at the knots.
    pub fn knot_values_of(&self, kind: MeasureKind) -> &[f64] {
        &self.tracks[kind as usize].left
    }
}
