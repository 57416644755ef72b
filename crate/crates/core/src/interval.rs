//! Finite unions of intervals and atoms, the sets on which measures are queried.

use std::fmt;
use std::str::FromStr;

use crate::error::{malformed, Error, Result};

/// One interval with independent closedness at each end. An atom `{t}` is the
/// closed degenerate interval `[t, t]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl Interval {
    /// `[lo, hi)`.
    pub fn half_open(lo: f64, hi: f64) -> Self {
        Interval {
            lo,
            hi,
            lo_closed: true,
            hi_closed: false,
        }
    }

    pub fn closed(lo: f64, hi: f64) -> Self {
        Interval {
            lo,
            hi,
            lo_closed: true,
            hi_closed: true,
        }
    }

    pub fn atom(t: f64) -> Self {
        Interval::closed(t, t)
    }

    pub fn is_atom(&self) -> bool {
        self.lo == self.hi
    }

    pub fn is_empty(&self) -> bool {
        self.lo > self.hi || (self.lo == self.hi && !(self.lo_closed && self.hi_closed))
    }

    pub fn contains(&self, t: f64) -> bool {
        (t > self.lo || (t == self.lo && self.lo_closed))
            && (t < self.hi || (t == self.hi && self.hi_closed))
    }

    fn intersect(&self, o: &Interval) -> Interval {
        let (lo, lo_closed) = if self.lo > o.lo {
            (self.lo, self.lo_closed)
        } else if o.lo > self.lo {
            (o.lo, o.lo_closed)
        } else {
            (self.lo, self.lo_closed && o.lo_closed)
        };
        let (hi, hi_closed) = if self.hi < o.hi {
            (self.hi, self.hi_closed)
        } else if o.hi < self.hi {
            (o.hi, o.hi_closed)
        } else {
            (self.hi, self.hi_closed && o.hi_closed)
        };
        Interval {
            lo,
            hi,
            lo_closed,
            hi_closed,
        }
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_atom() {
            return write!(f, "{{{}}}", self.lo);
        }
        write!(
            f,
            "{}{},{}{}",
            if self.lo_closed { '[' } else { '(' },
            self.lo,
            self.hi,
            if self.hi_closed { ']' } else { ')' }
        )
    }
}

/// Sorted, pairwise disjoint, non-touching intervals. Construction always
/// normalizes, so equal sets compare equal.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct IntervalSet {
    parts: Vec<Interval>,
}

impl IntervalSet {
    pub fn empty() -> Self {
        IntervalSet::default()
    }

    pub fn new(parts: impl IntoIterator<Item = Interval>) -> Self {
        let mut v: Vec<Interval> = parts.into_iter().filter(|i| !i.is_empty()).collect();
        v.sort_by(|a, b| {
            a.lo.total_cmp(&b.lo)
                .then_with(|| b.lo_closed.cmp(&a.lo_closed))
        });
        let mut out: Vec<Interval> = Vec::with_capacity(v.len());
        for i in v {
            if let Some(last) = out.last_mut() {
                let touches = i.lo < last.hi || (i.lo == last.hi && (i.lo_closed || last.hi_closed));
                if touches {
                    if i.hi > last.hi {
                        last.hi = i.hi;
                        last.hi_closed = i.hi_closed;
                    } else if i.hi == last.hi {
                        last.hi_closed |= i.hi_closed;
                    }
                    continue;
                }
            }
            out.push(i);
        }
        IntervalSet { parts: out }
    }

    pub fn half_open(lo: f64, hi: f64) -> Self {
        IntervalSet::new([Interval::half_open(lo, hi)])
    }

    pub fn closed(lo: f64, hi: f64) -> Self {
        IntervalSet::new([Interval::closed(lo, hi)])
    }

    pub fn atom(t: f64) -> Self {
        IntervalSet::new([Interval::atom(t)])
    }

    pub fn parts(&self) -> &[Interval] {
        &self.parts
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn contains(&self, t: f64) -> bool {
        self.parts.iter().any(|i| i.contains(t))
    }

    pub fn union(&self, other: &IntervalSet) -> IntervalSet {
        IntervalSet::new(self.parts.iter().chain(other.parts.iter()).copied())
    }

    pub fn intersection(&self, other: &IntervalSet) -> IntervalSet {
        let mut v = Vec::new();
        for a in &self.parts {
            for b in &other.parts {
                v.push(a.intersect(b));
            }
        }
        IntervalSet::new(v)
    }

    /// Complement relative to the closed interval `[a, b]`.
    pub fn complement_in(&self, a: f64, b: f64) -> IntervalSet {
        let mut v = Vec::new();
        let mut lo = a;
        let mut lo_closed = true;
        for p in &self.parts {
            v.push(Interval {
                lo,
                hi: p.lo,
                lo_closed,
                hi_closed: !p.lo_closed,
            });
            lo = p.hi;
            lo_closed = !p.hi_closed;
        }
        v.push(Interval {
            lo,
            hi: b,
            lo_closed,
            hi_closed: true,
        });
        IntervalSet::new(v).intersection(&IntervalSet::closed(a, b))
    }

    /// Smallest and largest point of the closure.
    pub fn hull(&self) -> Option<(f64, f64)> {
        Some((self.parts.first()?.lo, self.parts.last()?.hi))
    }
}

impl fmt::Display for IntervalSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.parts.is_empty() {
            return f.write_str("∅");
        }
        for (k, p) in self.parts.iter().enumerate() {
            if k > 0 {
                f.write_str(" ∪ ")?;
            }
            write!(f, "{p}")?;
        }
        Ok(())
    }
}

fn parse_num(s: &str, item: &str) -> Result<f64> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| malformed("interval set", format!("bad number `{}` in `{item}`", s.trim())))?;
    if !v.is_finite() {
        return Err(malformed("interval set", format!("non-finite bound in `{item}`")));
    }
    Ok(v)
}

impl FromStr for IntervalSet {
    type Err = Error;

    /// Comma-separated items: `[x,y)`, `(x,y]`, `[x,y]`, `(x,y)` and atoms
    /// `{t}`. The empty string and `∅` denote the empty set.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let mut parts = Vec::new();
        let mut rest = s;
        if rest.is_empty() || rest == "∅" {
            return Ok(IntervalSet::empty());
        }
        loop {
            rest = rest.trim_start();
            let open = rest
                .chars()
                .next()
                .ok_or_else(|| malformed("interval set", "trailing comma"))?;
            let close_chars: &[char] = match open {
                '[' | '(' => &[']', ')'],
                '{' => &['}'],
                c => return Err(malformed("interval set", format!("unexpected `{c}`"))),
            };
            let end = rest
                .find(close_chars)
                .ok_or_else(|| malformed("interval set", format!("unterminated item in `{rest}`")))?;
            let item = &rest[..=end];
            let body = &rest[1..end];
            let close = rest[end..].chars().next().unwrap_or(')');
            if open == '{' {
                parts.push(Interval::atom(parse_num(body, item)?));
            } else {
                let (x, y) = body
                    .split_once(',')
                    .ok_or_else(|| malformed("interval set", format!("`{item}` needs two bounds")))?;
                let (x, y) = (parse_num(x, item)?, parse_num(y, item)?);
                if x >= y {
                    return Err(malformed("interval set", format!("`{item}` has lo >= hi")));
                }
                parts.push(Interval {
                    lo: x,
                    hi: y,
                    lo_closed: open == '[',
                    hi_closed: close == ']',
                });
            }
            rest = rest[end + close.len_utf8()..].trim_start();
            if rest.is_empty() {
                break;
            }
            rest = rest
                .strip_prefix(',')
                .ok_or_else(|| malformed("interval set", format!("expected `,` before `{rest}`")))?;
        }
        Ok(IntervalSet::new(parts))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_normalize() {
        let e: IntervalSet = "[0,1), {1}, (1,2]".parse().unwrap();
        assert_eq!(e, IntervalSet::closed(0.0, 2.0));
        let e: IntervalSet = "[0,1), (1,2]".parse().unwrap();
        assert_eq!(e.parts().len(), 2);
        assert!(!e.contains(1.0));
        assert!("[1,0)".parse::<IntervalSet>().is_err());
        assert!("[0,1".parse::<IntervalSet>().is_err());
        assert_eq!("".parse::<IntervalSet>().unwrap(), IntervalSet::empty());
    }

    #[test]
    fn atom_inside_interval_is_absorbed() {
        let e = IntervalSet::new([Interval::half_open(0.0, 1.0), Interval::atom(0.5)]);
        assert_eq!(e, IntervalSet::half_open(0.0, 1.0));
    }

    #[test]
    fn complement_round_trip() {
        let e: IntervalSet = "[0.25,0.5), {0.75}".parse().unwrap();
        let c = e.complement_in(0.0, 1.0);
        assert_eq!(c.to_string(), "[0,0.25) ∪ [0.5,0.75) ∪ (0.75,1]");
        assert_eq!(c.union(&e), IntervalSet::closed(0.0, 1.0));
        assert!(c.intersection(&e).is_empty());
    }
}
