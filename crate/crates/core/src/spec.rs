//! JSON descriptions of derivators and test functions.
//!
//! Numbers may be given as JSON numbers or as strings holding a decimal or a
//! fraction `"p/q"`.

use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::derivator::{Derivator, DerivatorKind};
use crate::error::{malformed, Error, Result};
use crate::function::{PiecewiseFunction, TriangularWave};
use crate::interval::IntervalSet;
use crate::poly::{Piecewise, Poly};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RealRepr", into = "f64")]
pub struct Real(pub f64);

#[derive(Deserialize)]
#[serde(untagged)]
enum RealRepr {
    Num(f64),
    Text(String),
}

impl TryFrom<RealRepr> for Real {
    type Error = String;

    fn try_from(r: RealRepr) -> std::result::Result<Self, String> {
        match r {
            RealRepr::Num(x) => Ok(Real(x)),
            RealRepr::Text(s) => s.parse(),
        }
    }
}

impl From<Real> for f64 {
    fn from(r: Real) -> f64 {
        r.0
    }
}

impl FromStr for Real {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let s = s.trim();
        let parsed = match s.split_once('/') {
            Some((p, q)) => {
                let p: f64 = p.trim().parse().map_err(|_| format!("bad numerator in {s:?}"))?;
                let q: f64 = q.trim().parse().map_err(|_| format!("bad denominator in {s:?}"))?;
                if q == 0.0 {
                    return Err(format!("zero denominator in {s:?}"));
                }
                p / q
            }
            None => s.parse().map_err(|_| format!("not a number: {s:?}"))?,
        };
        if parsed.is_finite() {
            Ok(Real(parsed))
        } else {
            Err(format!("not finite: {s:?}"))
        }
    }
}

fn reals(v: &[Real]) -> Vec<f64> {
    v.iter().map(|r| r.0).collect()
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OscillatorSpec {
    #[serde(rename = "N")]
    pub depth: u64,
    #[serde(default)]
    pub r: Option<Real>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DerivatorSpec {
    pub kind: DerivatorKind,
    #[serde(default)]
    pub domain: Option<[Real; 2]>,
    #[serde(default)]
    pub breakpoints: Vec<Real>,
    #[serde(default)]
    pub slopes: Vec<Real>,
    /// One per breakpoint, or one fewer (no jump at `b`). Defaults to zeros.
    #[serde(default)]
    pub jumps: Option<Vec<Real>>,
    #[serde(default)]
    pub base_value: Option<Real>,
    #[serde(default = "default_true")]
    pub check_admissibility: bool,
    #[serde(default)]
    pub oscillator: Option<OscillatorSpec>,
}

impl DerivatorSpec {
    pub fn build(&self) -> Result<Derivator> {
        match self.kind {
            DerivatorKind::Oscillator => {
                let o = self
                    .oscillator
                    .as_ref()
                    .ok_or_else(|| malformed("oscillator", "missing for kind oscillator"))?;
                if o.depth < 2 {
                    return Err(malformed("oscillator.N", "must be at least 2"));
                }
                Derivator::oscillator(o.depth, o.r.map_or(1.0 / 3.0, |r| r.0))
            }
            DerivatorKind::PiecewiseAffine => {
                let knots = reals(&self.breakpoints);
                if knots.len() < 2 {
                    return Err(malformed("breakpoints", "need at least two"));
                }
                if let Some([a, b]) = self.domain {
                    if a.0 != knots[0] || b.0 != knots[knots.len() - 1] {
                        return Err(malformed("domain", "must match the first and last breakpoints"));
                    }
                }
                let slopes = reals(&self.slopes);
                if slopes.len() + 1 != knots.len() {
                    return Err(malformed(
                        "slopes",
                        &format!("expected {} slopes for {} breakpoints", knots.len() - 1, knots.len()),
                    ));
                }
                let jumps = self.jumps.as_deref().map_or_else(|| vec![0.0; knots.len()], reals);
                let base = self.base_value.map_or(0.0, |r| r.0);
                if self.check_admissibility {
                    Derivator::piecewise_affine(knots, slopes, jumps, base)
                } else {
                    Derivator::piecewise_affine_unchecked(knots, slopes, jumps, base)
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FunctionSpec {
    /// Continuous piecewise linear through `points`, constant outside.
    PiecewiseLinear { points: Vec<[Real; 2]> },
    /// Piecewise polynomial: on `[knots[i], knots[i+1])` the polynomial with
    /// `coeffs[i]` in powers of `t − knots[i]`. The last knot takes the left
    /// limit.
    Piecewise { knots: Vec<Real>, coeffs: Vec<Vec<Real>> },
    /// Indicator of an interval set written like `[0,1)∪{2}`.
    Indicator { set: String },
    TriangularWave {
        #[serde(default)]
        r: Option<Real>,
        depth: u64,
    },
    /// `Q ∘ g̃` (or `Q ∘ g` with `inner = "derivator"`), `Q` through `outer`.
    Composed {
        outer: Vec<[Real; 2]>,
        #[serde(default)]
        inner: Inner,
    },
    /// `t ↦ g̃(t)`.
    Variation,
    /// `t ↦ g(t)`.
    Derivator,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Inner {
    #[default]
    Variation,
    Derivator,
}

fn points(v: &[[Real; 2]]) -> Vec<(f64, f64)> {
    v.iter().map(|[x, y]| (x.0, y.0)).collect()
}

impl FunctionSpec {
    /// Resolves the spec against the derivator it will be used with.
    pub fn build(&self, d: &Derivator) -> Result<PiecewiseFunction> {
        match self {
            FunctionSpec::PiecewiseLinear { points: p } => PiecewiseFunction::linear(&points(p)),
            FunctionSpec::Piecewise { knots, coeffs } => {
                let knots = reals(knots);
                if coeffs.len() + 1 != knots.len() {
                    return Err(malformed("coeffs", "need one coefficient list per piece"));
                }
                let pieces: Vec<Poly> = knots
                    .iter()
                    .zip(coeffs)
                    .map(|(&k, c)| Poly::new(k, reals(c)))
                    .collect();
                let mut values: Vec<f64> = pieces.iter().zip(&knots).map(|(p, &k)| p.eval(k)).collect();
                let last = knots[knots.len() - 1];
                values.push(pieces.last().map_or(0.0, |p| p.eval(last)));
                Ok(PiecewiseFunction::Piecewise(Piecewise::new(knots, pieces, values)?))
            }
            FunctionSpec::Indicator { set } => {
                let e: IntervalSet = set.parse().map_err(|e: Error| malformed("set", &e.to_string()))?;
                Ok(PiecewiseFunction::Indicator(e))
            }
            FunctionSpec::TriangularWave { r, depth } => Ok(PiecewiseFunction::TriangularWave(TriangularWave::new(
                r.map_or(1.0 / 3.0, |r| r.0),
                *depth,
            ))),
            FunctionSpec::Composed { outer, inner } => {
                let q = Piecewise::linear(&points(outer))?;
                let g = match inner {
                    Inner::Variation => d.variation_derivator()?,
                    Inner::Derivator => d.clone(),
                };
                PiecewiseFunction::composed(q, g)
            }
            FunctionSpec::Variation => PiecewiseFunction::variation_of(d),
            FunctionSpec::Derivator => PiecewiseFunction::derivator_values(d),
        }
    }
}

pub fn parse_derivator(json: &str) -> Result<Derivator> {
    let spec: DerivatorSpec = serde_json::from_str(json).map_err(|e| malformed("derivator", &e.to_string()))?;
    spec.build()
}

pub fn parse_function(json: &str, d: &Derivator) -> Result<PiecewiseFunction> {
    let spec: FunctionSpec = serde_json::from_str(json).map_err(|e| malformed("function", &e.to_string()))?;
    spec.build(d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::derivator::Side;
    use crate::function::Evaluable;

    #[test]
    fn tent_spec() {
        let d = parse_derivator(r#"{"kind":"piecewise_affine","breakpoints":[0,1,2],"slopes":[1,-1]}"#).unwrap();
        assert_eq!(d.g(1.5, Side::Value), 0.5);
        let f = parse_function(r#"{"kind":"variation"}"#, &d).unwrap();
        assert_eq!(f.value(1.5), 1.5);
    }

    #[test]
    fn fractions_and_errors() {
        let d = parse_derivator(r#"{"kind":"piecewise_affine","breakpoints":["0","1/3",1],"slopes":[1,"0.5"]}"#)
            .unwrap();
        assert_eq!(d.knots()[1], 1.0 / 3.0);
        let e = parse_derivator(r#"{"kind":"piecewise_affine","breakpoints":[0,1],"slopes":[1],"extra":1}"#);
        assert!(matches!(e, Err(Error::MalformedSpec { .. })));
        let e = parse_derivator(r#"{"kind":"piecewise_affine","breakpoints":[0,1,2],"slopes":[1,0]}"#);
        assert!(matches!(e, Err(Error::NonAdmissibleEndpoint { .. })));
    }

    #[test]
    fn oscillator_spec() {
        let d = parse_derivator(r#"{"kind":"oscillator","oscillator":{"N":10,"r":"1/3"}}"#).unwrap();
        assert_eq!(d.g_tilde(1.0, Side::Value), 1.0);
    }
}
