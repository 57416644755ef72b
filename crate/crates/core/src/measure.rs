//! The signed measure `μ_g`, its variations, Hahn sets and Jordan parts.

use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::derivator::{Derivator, Side};
use crate::error::{malformed, Error, Result};
use crate::interval::{Interval, IntervalSet};
use crate::sum::Neumaier;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasureKind {
    /// `μ_g`
    Signed = 0,
    /// `μ_g⁺`
    Positive = 1,
    /// `μ_g⁻`
    Negative = 2,
    /// `|μ_g| = μ_g̃`
    Total = 3,
}

impl MeasureKind {
    pub const ALL: [MeasureKind; 4] = [
        MeasureKind::Signed,
        MeasureKind::Positive,
        MeasureKind::Negative,
        MeasureKind::Total,
    ];
}

impl FromStr for MeasureKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "signed" => Ok(MeasureKind::Signed),
            "positive" => Ok(MeasureKind::Positive),
            "negative" => Ok(MeasureKind::Negative),
            "total" => Ok(MeasureKind::Total),
            _ => Err(malformed("kind", format!("unknown measure kind `{s}`"))),
        }
    }
}

pub(crate) fn check_inside(d: &Derivator, e: &IntervalSet) -> Result<()> {
    let (a, b) = d.domain();
    if let Some((lo, hi)) = e.hull() {
        if lo < a || hi > b {
            let t = if lo < a { lo } else { hi };
            return Err(Error::OutOfDomain { t, a, b });
        }
    }
    Ok(())
}

/// `μ(I)` from the distribution function: closed ends take the value on the
/// side that includes the endpoint's atom.
pub(crate) fn interval_measure(d: &Derivator, i: &Interval, kind: MeasureKind) -> f64 {
    let hi = d.distribution(kind, i.hi, if i.hi_closed { Side::RightLimit } else { Side::Value });
    let lo = d.distribution(kind, i.lo, if i.lo_closed { Side::Value } else { Side::RightLimit });
    hi - lo
}

pub fn measure_of(d: &Derivator, e: &IntervalSet, kind: MeasureKind) -> Result<f64> {
    Ok(measure_with_bound(d, e, kind)?.0)
}

/// Measure together with a bound on its error, which is nonzero only when
/// `E` reaches into an oscillator tail.
pub fn measure_with_bound(d: &Derivator, e: &IntervalSet, kind: MeasureKind) -> Result<(f64, f64)> {
    check_inside(d, e)?;
    let mut sum = Neumaier::default();
    let mut bound = 0.0;
    for p in e.parts() {
        sum.add(interval_measure(d, p, kind));
        if let Some(end) = d.tail_end() {
            if p.lo < end {
                let b = d.tail_error_at(p.hi.min(end));
                bound += match kind {
                    MeasureKind::Signed => 2.0 * b,
                    MeasureKind::Positive | MeasureKind::Negative => b,
                    MeasureKind::Total => 0.0,
                };
            }
        }
    }
    Ok((sum.total(), bound))
}

#[derive(Debug, Clone, PartialEq)]
pub struct HahnSets {
    pub positive: IntervalSet,
    pub negative: IntervalSet,
}

/// Pieces `(t_i, t_{i+1}]` follow the sign of their slope (zero counts as
/// positive); a knot carrying a jump follows the sign of the jump instead, and
/// `a` without a jump is put in `A_g⁺`.
pub fn hahn_decomposition(d: &Derivator) -> HahnSets {
    let knots = d.knots();
    let slopes = d.slopes();
    let jumps = d.jumps();
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    let mut put = |i: Interval, positive: bool| {
        if positive {
            pos.push(i)
        } else {
            neg.push(i)
        }
    };
    put(Interval::atom(knots[0]), jumps[0] >= 0.0);
    for (i, &s) in slopes.iter().enumerate() {
        let (lo, hi) = (knots[i], knots[i + 1]);
        put(
            Interval {
                lo,
                hi,
                lo_closed: false,
                hi_closed: false,
            },
            s >= 0.0,
        );
        let j = jumps[i + 1];
        put(Interval::atom(hi), if j != 0.0 { j > 0.0 } else { s >= 0.0 });
    }
    HahnSets {
        positive: IntervalSet::new(pos),
        negative: IntervalSet::new(neg),
    }
}

/// `g₁(t) = μ_g⁺([a,t))` and `g₂(t) = μ_g⁻([a,t))`.
pub fn jordan_parts(d: &Derivator) -> (Derivator, Derivator) {
    let g1 = d
        .track_derivator(MeasureKind::Positive)
        .expect("tracks of a valid derivator are valid");
    let g2 = d
        .track_derivator(MeasureKind::Negative)
        .expect("tracks of a valid derivator are valid");
    (g1, g2)
}
