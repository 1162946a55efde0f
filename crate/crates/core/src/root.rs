//! Bisection on a sign-changing bracket.

use crate::{Error, Result};

pub(crate) const MAX_BISECTIONS: usize = 200;

#[derive(Clone, Copy, Debug)]
pub(crate) struct Bracket {
    pub lo: f64,
    pub hi: f64,
    pub iterations: usize,
}

impl Bracket {
    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }
}

/// Bisects `f` on `[lo, hi]` where `f(lo) < 0 < f(hi)` (either orientation
/// of the interval is allowed; only the signs matter). Stops once
/// `done(lo, hi)` holds or the interval can no longer be split.
pub(crate) fn bisect<F, D>(what: &'static str, mut lo: f64, mut hi: f64, f: F, done: D) -> Result<Bracket>
where
    F: Fn(f64) -> f64,
    D: Fn(f64, f64) -> bool,
{
    let (flo, fhi) = (f(lo), f(hi));
    if !(flo < 0.0 && fhi > 0.0) {
        return Err(Error::Bracket(what));
    }
    for iterations in 0..MAX_BISECTIONS {
        if done(lo, hi) {
            return Ok(Bracket { lo, hi, iterations });
        }
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            return Ok(Bracket { lo, hi, iterations });
        }
        let fm = f(mid);
        if fm.is_nan() {
            return Err(Error::domain(what, mid));
        }
        if fm < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::NoConvergence(what, MAX_BISECTIONS))
}
