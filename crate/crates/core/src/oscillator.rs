//! Exact sequences behind the oscillating derivator: `α_1 = 1/2`, `α_n = 1/n`,
//! `x_1 = 1`, `x_{2n} = x_{2n-1}/(1+α_n)`, `x_{2n+1} = (1-α_n)·x_{2n}`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

fn ratio(p: i64, q: i64) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(q))
}

pub fn alpha(n: u64) -> BigRational {
    assert!(n >= 1, "α_n is indexed from 1");
    if n == 1 {
        ratio(1, 2)
    } else {
        ratio(1, n as i64)
    }
}

pub fn alpha_f64(n: u64) -> f64 {
    if n == 1 {
        0.5
    } else {
        1.0 / n as f64
    }
}

/// `x_0 = 0, x_1, …, x_m` by the recursion, exactly.
pub fn x_recursive(m: u64) -> Vec<BigRational> {
    let mut xs = Vec::with_capacity(m as usize + 1);
    xs.push(BigRational::zero());
    if m == 0 {
        return xs;
    }
    xs.push(BigRational::one());
    for k in 2..=m {
        let prev = &xs[(k - 1) as usize];
        let n = k / 2;
        let a = alpha(n);
        let next = if k % 2 == 0 {
            prev / (BigRational::one() + a)
        } else {
            prev * (BigRational::one() - a)
        };
        xs.push(next);
    }
    xs
}

/// `x_k` from the closed forms (`x_{2n} = 2/(3(n-1)(n+1))` for `n ≥ 2`,
/// `x_{2n+1} = 2/(3n(n+1))` for `n ≥ 1`).
pub fn x_closed(k: u64) -> BigRational {
    match k {
        0 => BigRational::zero(),
        1 => BigRational::one(),
        2 => ratio(2, 3),
        _ => {
            let n = (k / 2) as i64;
            if k % 2 == 0 {
                ratio(2, 3 * (n - 1) * (n + 1))
            } else {
                ratio(2, 3 * n * (n + 1))
            }
        }
    }
}

/// Closed form in floating point; every value is a correctly rounded quotient
/// of two exact integers.
pub fn x_f64(k: u64) -> f64 {
    match k {
        0 => 0.0,
        1 => 1.0,
        2 => 2.0 / 3.0,
        _ => {
            let n = (k / 2) as f64;
            if k % 2 == 0 {
                2.0 / (3.0 * (n - 1.0) * (n + 1.0))
            } else {
                2.0 / (3.0 * n * (n + 1.0))
            }
        }
    }
}

/// Exact `g(x_k)`: zero at odd indices, `α_n·x_{2n}` at `k = 2n`.
pub fn g_at(k: u64) -> BigRational {
    if k % 2 == 1 || k == 0 {
        BigRational::zero()
    } else {
        alpha(k / 2) * x_closed(k)
    }
}

pub fn g_at_f64(k: u64) -> f64 {
    g_at(k).to_f64().unwrap_or(f64::NAN)
}

/// Index `k` with `x_{k+1} < t ≤ x_k`, for `0 < t ≤ 1`.
pub fn segment_of(t: f64) -> u64 {
    debug_assert!(t > 0.0 && t <= 1.0);
    // x_{2n+1} ≈ 2/(3n²): start near the closed-form inverse and correct.
    let guess = (2.0 / (3.0 * t)).sqrt();
    let mut k = ((2.0 * guess) as u64).max(1);
    while k > 1 && x_f64(k) < t {
        k -= 1;
    }
    while x_f64(k + 1) >= t {
        k += 1;
    }
    k
}
