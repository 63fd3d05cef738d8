//! Adaptive Simpson quadrature with Richardson correction.

use crate::error::{Error, Result};

/// Default cap on integrand evaluations.
pub const MAX_EVALS: usize = 1_000_000;

const MAX_DEPTH: u32 = 60;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub evals: usize,
    /// False when the evaluation cap or depth limit stopped refinement
    /// somewhere; the value is still the best available estimate.
    pub converged: bool,
}

/// Integrates `f` over `[a, b]` to absolute tolerance `tol`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<Quadrature> {
    adaptive_simpson_capped(f, a, b, tol, MAX_EVALS)
}

pub fn adaptive_simpson_capped<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    tol: f64,
    max_evals: usize,
) -> Result<Quadrature> {
    if !(a.is_finite() && b.is_finite()) || !(tol > 0.0) {
        return Err(Error::invalid("quadrature needs finite bounds and a positive tolerance"));
    }
    if a == b {
        return Ok(Quadrature { value: 0.0, evals: 0, converged: true });
    }
    let mut st = State { f: &f, evals: 3, cap: max_evals, converged: true };
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = simpson(a, b, fa, fm, fb);
    let value = st.recurse(a, b, fa, fm, fb, whole, tol, MAX_DEPTH);
    if !value.is_finite() {
        return Err(Error::invalid("integrand produced a non-finite value"));
    }
    Ok(Quadrature { value, evals: st.evals, converged: st.converged })
}

/// Integrates over consecutive pieces `[knots[i], knots[i+1]]`, splitting
/// the tolerance in proportion to piece length. Use it to put known kinks
/// on piece boundaries.
pub fn adaptive_simpson_pieces<F: Fn(f64) -> f64>(f: F, knots: &[f64], tol: f64) -> Result<Quadrature> {
    let span = knots.last().copied().unwrap_or(0.0) - knots.first().copied().unwrap_or(0.0);
    let mut total = Quadrature { value: 0.0, evals: 0, converged: true };
    for w in knots.windows(2) {
        if w[1] <= w[0] {
            continue;
        }
        let piece_tol = tol * (w[1] - w[0]) / span;
        let q = adaptive_simpson(&f, w[0], w[1], piece_tol)?;
        total.value += q.value;
        total.evals += q.evals;
        total.converged &= q.converged;
    }
    Ok(total)
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

struct State<'a, F> {
    f: &'a F,
    evals: usize,
    cap: usize,
    converged: bool,
}

impl<F: Fn(f64) -> f64> State<'_, F> {
    #[allow(clippy::too_many_arguments)]
    fn recurse(&mut self, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        if self.evals + 2 > self.cap {
            self.converged = false;
            return whole;
        }
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = ((self.f)(lm), (self.f)(rm));
        self.evals += 2;
        let left = simpson(a, m, fa, flm, fm);
        let right = simpson(m, b, fm, frm, fb);
        let delta = left + right - whole;
        if delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        if depth == 0 || m <= a || m >= b {
            self.converged = false;
            return left + right + delta / 15.0;
        }
        self.recurse(a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + self.recurse(m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
}
