//! Frobenius-ball CSI errors and their worst cases.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::generate::complex_gaussian;
use super::UserChannel;
use crate::error::{domain, Result};
use crate::linalg::{kron_identity, min_eigenvalue, spectral_norm, vec_columns, CMatrix, CVector, C64};

/// Tolerance on `||u|| = 1` for beam vectors.
const UNIT_TOL: f64 = 1e-10;
/// Relative eigenvalue slack used when testing positive semidefiniteness.
const PSD_TOL: f64 = 1e-9;

/// Draws a matrix from the ball `||X||_F <= radius`.
///
/// Half of the draws (in expectation) sit exactly on the sphere; the rest are
/// uniform in the ball. The RNG is advanced identically for every radius.
pub(crate) fn draw_ball<R: Rng>(rng: &mut R, rows: usize, cols: usize, radius: f64) -> (CMatrix, bool) {
    let mut dir = complex_gaussian(rng, rows, cols);
    let on_boundary = rng.random_bool(0.5);
    let u: f64 = rng.random();
    let norm = dir.norm();
    if norm == 0.0 || radius == 0.0 {
        return (CMatrix::zeros(rows, cols), on_boundary);
    }
    let dim = 2.0 * (rows * cols) as f64;
    let frac = if on_boundary { 1.0 } else { u.powf(1.0 / dim) };
    dir *= C64::from(radius * frac / norm);
    (dir, on_boundary)
}

/// One joint draw of downlink and uplink errors.
#[derive(Debug, Clone, PartialEq)]
pub struct UncertaintySample {
    pub dg: CMatrix,
    pub dh: CMatrix,
    pub dg_on_boundary: bool,
    pub dh_on_boundary: bool,
}

/// `count` error pairs inside the user's uncertainty balls.
pub fn sample_uncertainty(user: &UserChannel, count: usize, seed: u64) -> Vec<UncertaintySample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (n_t, n_u) = user.g_hat.shape();
    let n_r = user.h_hat.ncols();
    (0..count)
        .map(|_| {
            let (dg, dg_on_boundary) = draw_ball(&mut rng, n_t, n_u, user.upsilon);
            let (dh, dh_on_boundary) = draw_ball(&mut rng, n_u, n_r, user.rho);
            UncertaintySample { dg, dh, dg_on_boundary, dh_on_boundary }
        })
        .collect()
}

/// Singular values of the worst channel in a spectral ball: `max(g - rho, 0)`.
pub fn worst_case_singular_values(gamma_hat: &[f64], rho: f64) -> Result<Vec<f64>> {
    if rho.is_nan() || rho < 0.0 {
        return Err(domain(format!("radius must be >= 0, got {rho}")));
    }
    if gamma_hat.iter().any(|&g| g.is_nan() || g < 0.0) {
        return Err(domain("singular values must be >= 0"));
    }
    if gamma_hat.windows(2).any(|w| w[0] < w[1]) {
        return Err(domain("singular values must be sorted in descending order"));
    }
    Ok(gamma_hat.iter().map(|&g| (g - rho).max(0.0)).collect())
}

fn check_unit(u: &CVector) -> Result<()> {
    let n = u.norm();
    if (n - 1.0).abs() > UNIT_TOL {
        return Err(domain(format!("beam vector must have unit norm, got {n}")));
    }
    Ok(())
}

/// Minimum of `Tr(G^H V G)` over `||G - g_hat||_F <= upsilon` with `V = p u u^H`.
///
/// Equals `p * max(||g_hat^H u|| - upsilon, 0)^2`.
pub fn worst_case_harvest_power(g_hat: &CMatrix, u: &CVector, p: f64, upsilon: f64) -> Result<f64> {
    check_unit(u)?;
    if g_hat.nrows() != u.len() {
        return Err(domain("beam length does not match transmit antennas"));
    }
    if !(p >= 0.0 && upsilon >= 0.0) {
        return Err(domain("power and radius must be >= 0"));
    }
    Ok(worst_case_gain(g_hat, u, upsilon) * p)
}

/// `max(||g^H u|| - upsilon, 0)^2` without input checks.
pub(crate) fn worst_case_gain(g_hat: &CMatrix, u: &CVector, upsilon: f64) -> f64 {
    let s = (g_hat.adjoint() * u).norm();
    let d = (s - upsilon).max(0.0);
    d * d
}

/// Error matrix in the ball attaining the worst case for beam `u`.
pub fn adversarial_downlink_error(g_hat: &CMatrix, u: &CVector, upsilon: f64) -> CMatrix {
    let g = g_hat.adjoint() * u;
    let s = g.norm();
    if s == 0.0 {
        return CMatrix::zeros(g_hat.nrows(), g_hat.ncols());
    }
    let shrink = upsilon.min(s) / s;
    -(u * g.adjoint()) * C64::from(shrink)
}

/// Builds the S-procedure matrix for the implication
/// `||dg||^2 <= upsilon^2  =>  Tr((G_hat + dG)^H V (G_hat + dG)) >= theta`.
fn s_procedure_matrix(v: &CMatrix, omega: f64, theta: f64, g_hat: &CMatrix, upsilon: f64) -> Result<CMatrix> {
    let n_t = g_hat.nrows();
    let n_u = g_hat.ncols();
    if v.shape() != (n_t, n_t) {
        return Err(domain(format!("energy matrix is {}x{}, expected {n_t}x{n_t}", v.nrows(), v.ncols())));
    }
    if min_eigenvalue(v) < -PSD_TOL * spectral_norm(v).max(1.0) {
        return Err(domain("energy matrix must be positive semidefinite"));
    }
    if !(omega >= 0.0 && upsilon >= 0.0) {
        return Err(domain("multiplier and radius must be >= 0"));
    }
    let n = n_t * n_u;
    let big_v = kron_identity(n_u, v);
    let g = vec_columns(g_hat);
    // U = [I | g], so U^H V U = [[V, V g], [g^H V, g^H V g]].
    let vg = &big_v * &g;
    let gvg = g.dotc(&vg).re;
    let mut m = CMatrix::zeros(n + 1, n + 1);
    m.view_mut((0, 0), (n, n)).copy_from(&big_v);
    for i in 0..n {
        m[(i, i)] += C64::from(omega);
        m[(i, n)] = vg[i];
        m[(n, i)] = vg[i].conj();
    }
    m[(n, n)] = C64::from(gvg - omega * upsilon * upsilon - theta);
    Ok(m)
}

/// `(lambda_min, ||M||_2)` of the S-procedure matrix at multiplier `omega`.
pub fn s_procedure_min_eigenvalue(
    v: &CMatrix,
    omega: f64,
    theta: f64,
    g_hat: &CMatrix,
    upsilon: f64,
) -> Result<(f64, f64)> {
    let m = s_procedure_matrix(v, omega, theta, g_hat, upsilon)?;
    let eig = nalgebra::SymmetricEigen::new(m).eigenvalues;
    let lo = eig.iter().copied().fold(f64::MAX, f64::min);
    let norm = eig.iter().fold(0.0f64, |a, &x| a.max(x.abs()));
    Ok((lo, norm))
}

/// True iff the S-procedure matrix is PSD at `omega`, which certifies that
/// `theta` does not exceed the worst-case received power over the ball.
pub fn s_procedure_certify(v: &CMatrix, omega: f64, theta: f64, g_hat: &CMatrix, upsilon: f64) -> Result<bool> {
    let (lo, norm) = s_procedure_min_eigenvalue(v, omega, theta, g_hat, upsilon)?;
    Ok(lo >= -PSD_TOL * norm)
}

/// Searches the multiplier: a 40-point log grid over `[1e-6, 1e6] * ||V||_2`
/// followed by golden-section refinement. The minimum eigenvalue is concave
/// in `omega`, so the refined point is the global maximizer up to tolerance.
///
/// Returns `(omega, lambda_min, ||M||_2)` at the best multiplier found.
pub fn best_s_procedure_margin(v: &CMatrix, theta: f64, g_hat: &CMatrix, upsilon: f64) -> Result<(f64, f64, f64)> {
    const GRID: usize = 40;
    let scale = spectral_norm(v).max(f64::MIN_POSITIVE);
    let log_lo = scale.log10() - 6.0;
    let log_hi = scale.log10() + 6.0;
    let at = |x: f64| -> Result<(f64, f64)> { s_procedure_min_eigenvalue(v, 10f64.powf(x), theta, g_hat, upsilon) };

    let xs: Vec<f64> = (0..GRID).map(|i| log_lo + (log_hi - log_lo) * i as f64 / (GRID - 1) as f64).collect();
    let mut vals = Vec::with_capacity(GRID);
    for &x in &xs {
        vals.push(at(x)?.0);
    }
    let best = (0..GRID).fold(0, |b, i| if vals[i] > vals[b] { i } else { b });
    // Tiny radii push the maximizer past the grid; widen the bracket there.
    let mut a = xs[best.saturating_sub(1)];
    let mut b = if best + 1 < GRID { xs[best + 1] } else { log_hi + 6.0 };
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let mut fc = at(c)?.0;
    let mut fd = at(d)?.0;
    for _ in 0..80 {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = at(c)?.0;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = at(d)?.0;
        }
    }
    let candidates = [(xs[best], vals[best]), (c, fc), (d, fd)];
    let (x, _) = candidates.iter().copied().fold(candidates[0], |acc, cand| if cand.1 > acc.1 { cand } else { acc });
    let (lo, norm) = at(x)?;
    Ok((10f64.powf(x), lo, norm))
}
