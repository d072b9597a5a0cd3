//! Bracketed scalar root finding.

/// Root of an increasing function given value and derivative.
///
/// Newton steps, capped at `max_step`, fall back to bisection whenever they
/// leave the bracket `(lo, hi)` known so far. Either bound may be infinite.
pub(crate) fn newton_increasing(
    mut f: impl FnMut(f64) -> (f64, f64),
    x0: f64,
    mut lo: f64,
    mut hi: f64,
    max_step: f64,
    xtol: f64,
) -> f64 {
    let mut x = x0;
    for _ in 0..200 {
        let (fx, dfx) = f(x);
        if fx == 0.0 {
            return x;
        }
        if fx < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let mut next = x - fx / dfx;
        if !next.is_finite() {
            next = if fx < 0.0 { x + max_step } else { x - max_step };
        }
        next = next.clamp(x - max_step, x + max_step);
        if !(next > lo && next < hi) {
            next = if lo.is_finite() && hi.is_finite() {
                0.5 * (lo + hi)
            } else if fx < 0.0 {
                x + max_step
            } else {
                x - max_step
            };
        }
        if (next - x).abs() <= xtol || (hi - lo) <= xtol {
            return next;
        }
        x = next;
    }
    x
}
