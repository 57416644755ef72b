//! Seeded random instances for property suites and the CLI's corpus mode.
//!
//! All breakpoints are multiples of 1/64 and all slopes, jumps and values are
//! dyadic, so most sums of lengths times slopes are exact in `f64`.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::derivator::Derivator;
use crate::function::PiecewiseFunction;
use crate::interval::{Interval, IntervalSet};
use crate::poly::Piecewise;

const SLOPES: [f64; 7] = [-2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0];
const JUMPS: [f64; 8] = [-2.0, -1.0, -0.5, -0.25, 0.25, 0.5, 1.0, 2.0];
const LENGTHS: [f64; 3] = [1.0, 2.0, 4.0];

pub struct Corpus {
    rng: ChaCha8Rng,
}

fn grid(len: f64) -> u32 {
    (len * 64.0) as u32
}

impl Corpus {
    pub fn new(seed: u64) -> Self {
        Corpus {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// A derivator on `[0, L]`, `L ∈ {1, 2, 4}`, with at most 12 segments and
    /// at most 4 atoms (none at `b`), first and last slopes nonzero.
    pub fn derivator(&mut self) -> Derivator {
        loop {
            let len = *LENGTHS.choose(&mut self.rng).expect("nonempty");
            let m = self.rng.gen_range(1..=12usize);
            let mut ticks: Vec<u32> = (1..grid(len)).collect();
            ticks.shuffle(&mut self.rng);
            let mut inner: Vec<u32> = ticks[..m - 1].to_vec();
            inner.sort_unstable();
            let mut knots = vec![0.0];
            knots.extend(inner.iter().map(|&k| k as f64 / 64.0));
            knots.push(len);
            let mut slopes: Vec<f64> = (0..m).map(|_| *SLOPES.choose(&mut self.rng).expect("nonempty")).collect();
            for i in [0, m - 1] {
                while slopes[i] == 0.0 {
                    slopes[i] = *SLOPES.choose(&mut self.rng).expect("nonempty");
                }
            }
            let mut jumps = vec![0.0; m + 1];
            let atoms = self.rng.gen_range(0..=4usize.min(m));
            let mut spots: Vec<usize> = (0..m).collect();
            spots.shuffle(&mut self.rng);
            for &i in &spots[..atoms] {
                jumps[i] = *JUMPS.choose(&mut self.rng).expect("nonempty");
            }
            if let Ok(d) = Derivator::piecewise_affine(knots, slopes, jumps, 0.0) {
                return d;
            }
        }
    }

    fn tick(&mut self, lo: f64, hi: f64) -> f64 {
        let a = (lo * 64.0).ceil() as i64;
        let b = (hi * 64.0).floor() as i64;
        self.rng.gen_range(a..=b) as f64 / 64.0
    }

    fn dyadic_value(&mut self) -> f64 {
        self.rng.gen_range(-16i32..=16) as f64 / 8.0
    }

    /// Continuous piecewise linear `f` on the domain of `d`, 2 to 9 nodes.
    pub fn continuous_function(&mut self, d: &Derivator) -> PiecewiseFunction {
        let (a, b) = d.domain();
        let n = self.rng.gen_range(0..=7usize);
        let mut xs: Vec<f64> = (0..n).map(|_| self.tick(a, b)).collect();
        xs.extend([a, b]);
        xs.sort_by(f64::total_cmp);
        xs.dedup();
        let pts: Vec<(f64, f64)> = xs.into_iter().map(|x| (x, self.dyadic_value())).collect();
        PiecewiseFunction::Piecewise(Piecewise::linear(&pts).expect("increasing nodes"))
    }

    /// `Q ∘ g̃` for a random continuous piecewise linear `Q` on the range of
    /// `g̃`: `g`-continuous everywhere.
    pub fn g_continuous_function(&mut self, d: &Derivator) -> PiecewiseFunction {
        let v = d.variation_derivator().expect("piecewise-affine derivators have a variation");
        let top = v.g(d.domain().1, crate::derivator::Side::Value);
        let n = self.rng.gen_range(0..=6usize);
        let mut ys: Vec<f64> = (0..n).map(|_| self.rng.gen_range(0.0..top)).collect();
        ys.extend([0.0, top]);
        ys.sort_by(f64::total_cmp);
        ys.dedup();
        let pts: Vec<(f64, f64)> = ys.into_iter().map(|y| (y, self.dyadic_value())).collect();
        let q = Piecewise::linear(&pts).expect("increasing nodes");
        PiecewiseFunction::composed(q, v).expect("finite derivator")
    }

    /// A random interval set inside `[a, b]` with 1 to 4 parts, half of the
    /// endpoints snapped to knots of `d`.
    pub fn interval_set(&mut self, d: &Derivator) -> IntervalSet {
        let (a, b) = d.domain();
        let knots = d.knots().to_vec();
        let parts = self.rng.gen_range(1..=4usize);
        let mut out = Vec::with_capacity(parts);
        for _ in 0..parts {
            let pick = |rng: &mut ChaCha8Rng| {
                if rng.gen_bool(0.5) {
                    *knots.choose(rng).expect("nonempty")
                } else {
                    let lo = (a * 64.0).ceil() as i64;
                    let hi = (b * 64.0).floor() as i64;
                    rng.gen_range(lo..=hi) as f64 / 64.0
                }
            };
            let x = pick(&mut self.rng);
            let y = pick(&mut self.rng);
            let (lo, hi) = if x <= y { (x, y) } else { (y, x) };
            let part = match self.rng.gen_range(0..5) {
                0 => Interval::atom(lo),
                1 => Interval::closed(lo, hi),
                2 => Interval {
                    lo,
                    hi,
                    lo_closed: false,
                    hi_closed: true,
                },
                3 => Interval {
                    lo,
                    hi,
                    lo_closed: false,
                    hi_closed: false,
                },
                _ => Interval::half_open(lo, hi),
            };
            out.push(part);
        }
        IntervalSet::new(out)
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        self.rng.gen_range(lo..=hi)
    }
}
