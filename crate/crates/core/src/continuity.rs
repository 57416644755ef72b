//! Sampling-based falsifier for g-continuity.
//!
//! A `Pass` only means no counterexample was found among the samples; ε-δ
//! statements cannot be decided from point evaluations.

use serde::Serialize;

use crate::derivator::{Derivator, Side};
use crate::error::Result;
use crate::function::{Evaluable, PiecewiseFunction};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    TwoSided,
    Left,
    Right,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContinuityOptions {
    pub eps_grid: Vec<f64>,
    /// `δ` is searched among `δ₀·2^{-k}`, `k < max_halvings`, with `δ₀` the
    /// total variation.
    pub max_halvings: u32,
}

impl Default for ContinuityOptions {
    fn default() -> Self {
        ContinuityOptions {
            eps_grid: vec![1e-1, 1e-2, 1e-3, 1e-4],
            max_halvings: 40,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    /// `|f(s) − f(t)| ≥ eps` although `ρ_g(s, t) < δ` for every `δ` tried.
    Fail { witness: f64, eps: f64 },
}

impl Verdict {
    pub fn passed(&self) -> bool {
        matches!(self, Verdict::Pass)
    }
}

fn candidates(f: &PiecewiseFunction, d: &Derivator, t: f64, mode: Mode) -> Vec<f64> {
    let (a, b) = d.domain();
    let len = b - a;
    let mut s: Vec<f64> = Vec::new();
    for k in 0..64 {
        let h = len * 0.5f64.powi(k);
        s.push(t - h);
        s.push(t + h);
    }
    for i in 0..=32 {
        s.push(a + len * i as f64 / 32.0);
    }
    let mut marks = f.breakpoints_in(a, b);
    marks.extend_from_slice(d.knots());
    for m in marks {
        let eps = 1e-9 * (1.0 + m.abs());
        s.extend([m - eps, m, m + eps]);
    }
    s.retain(|&x| {
        x >= a
            && x <= b
            && x != t
            && match mode {
                Mode::TwoSided => true,
                Mode::Left => x < t,
                Mode::Right => x > t,
            }
    });
    s.sort_by(f64::total_cmp);
    s.dedup();
    s
}

pub fn check_g_continuity(
    f: &PiecewiseFunction,
    d: &Derivator,
    t: f64,
    mode: Mode,
    opts: &ContinuityOptions,
) -> Result<Verdict> {
    d.classify_point(t)?;
    let gt = d.g_tilde(t, Side::Value);
    let ft = f.value(t);
    let samples: Vec<(f64, f64, f64)> = candidates(f, d, t, mode)
        .into_iter()
        .map(|s| (s, (d.g_tilde(s, Side::Value) - gt).abs(), (f.value(s) - ft).abs()))
        .collect();
    let (a, b) = d.domain();
    let delta0 = (d.g_tilde(b, Side::Value) - d.g_tilde(a, Side::Value)).max(f64::MIN_POSITIVE);
    for &eps in &opts.eps_grid {
        // The worst offender among samples with |f(s) − f(t)| ≥ ε is the one
        // closest to t in ρ_g; δ works iff it is below that distance.
        let offender = samples
            .iter()
            .filter(|x| x.2 >= eps)
            .min_by(|x, y| x.1.total_cmp(&y.1));
        let Some(&(s, rho, _)) = offender else {
            continue;
        };
        let found = (0..opts.max_halvings).any(|k| delta0 * 0.5f64.powi(k as i32) <= rho);
        if !found {
            return Ok(Verdict::Fail { witness: s, eps });
        }
    }
    Ok(Verdict::Pass)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn variation_is_g_continuous_on_tent() {
        let d = Derivator::piecewise_affine(vec![0.0, 1.0, 2.0], vec![1.0, -1.0], vec![0.0; 3], 0.0).unwrap();
        let f = PiecewiseFunction::variation_of(&d).unwrap();
        let v = check_g_continuity(&f, &d, 1.0, Mode::TwoSided, &Default::default()).unwrap();
        assert_eq!(v, Verdict::Pass);
    }

    #[test]
    fn classical_step_fails() {
        let d = Derivator::identity(0.0, 1.0).unwrap();
        let f = PiecewiseFunction::Indicator("[0.5,1]".parse().unwrap());
        let v = check_g_continuity(&f, &d, 0.5, Mode::TwoSided, &Default::default()).unwrap();
        let Verdict::Fail { witness, .. } = v else { panic!("expected a witness") };
        assert!(witness < 0.5);
    }

    #[test]
    fn atom_gap_makes_right_continuity_vacuous() {
        let d = Derivator::piecewise_affine(vec![0.0, 1.0, 2.0], vec![1.0, 1.0], vec![0.0, 1.0, 0.0], 0.0).unwrap();
        let f = PiecewiseFunction::Indicator("(1,2]".parse().unwrap());
        let v = check_g_continuity(&f, &d, 1.0, Mode::Right, &Default::default()).unwrap();
        assert_eq!(v, Verdict::Pass);
        let v = check_g_continuity(&f, &d, 1.0, Mode::Left, &Default::default()).unwrap();
        assert_eq!(v, Verdict::Pass);
    }
}
