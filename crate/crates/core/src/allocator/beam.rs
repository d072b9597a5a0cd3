//! Energy-beam search: structured candidates plus projected-gradient ascent
//! on the unit sphere.

use nalgebra::{DMatrix, DVector};

use crate::linalg::{principal_eigvec, CMatrix, CVector, C64};

use super::inner::{Design, InnerSolution};
use super::Objective;

const ARMIJO: f64 = 1e-4;
const MAX_STEPS: usize = 60;
/// Length of the first trial step in chart coordinates.
const INITIAL_STEP: f64 = 0.2;
/// Predicted relative gains below this are treated as converged.
const GAIN_FLOOR: f64 = 1e-10;
const RECENTER: f64 = 0.5;

/// Beams worth trying for every `tau0`: each user's strongest direction and
/// principal directions of weighted mixtures of the normalized Gram matrices.
pub(crate) fn candidates(design: &Design) -> Vec<CVector> {
    let n_t = design.scn.n_t;
    let grams: Vec<CMatrix> = design
        .users
        .iter()
        .filter_map(|p| {
            let (top, _) = principal_eigvec(&p.a);
            (top > 0.0).then(|| &p.a / C64::from(top))
        })
        .collect();
    if grams.is_empty() {
        let mut e = CVector::zeros(n_t);
        e[0] = C64::from(1.0);
        return vec![e];
    }
    let mut out = Vec::new();
    for w in simplex_weights(grams.len()) {
        let mix = grams
            .iter()
            .zip(&w)
            .filter(|(_, &wk)| wk > 0.0)
            .fold(CMatrix::zeros(n_t, n_t), |acc, (g, &wk)| acc + g * C64::from(wk));
        let (_, v) = principal_eigvec(&mix);
        if !out.iter().any(|c: &CVector| c.dotc(&v).norm() > 1.0 - 1e-12) {
            out.push(v);
        }
    }
    out
}

/// Vertices first, then interior weights: a 0.25 grid for up to four users,
/// pairwise midpoints and the centroid beyond that.
fn simplex_weights(k: usize) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = (0..k).map(|i| (0..k).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
    if k == 1 {
        return out;
    }
    if k <= 4 {
        let mut w = vec![0usize; k];
        compositions(4, 0, &mut w, &mut |c| {
            if c.iter().filter(|&&x| x > 0).count() > 1 {
                out.push(c.iter().map(|&x| x as f64 / 4.0).collect());
            }
        });
    } else {
        for i in 0..k {
            for j in i + 1..k {
                out.push((0..k).map(|m| if m == i || m == j { 0.5 } else { 0.0 }).collect());
            }
        }
        out.push(vec![1.0 / k as f64; k]);
    }
    out
}

fn compositions(left: usize, idx: usize, w: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
    if idx == w.len() - 1 {
        w[idx] = left;
        f(w);
        return;
    }
    for x in 0..=left {
        w[idx] = x;
        compositions(left - x, idx + 1, w, f);
    }
}

/// Real orthonormal basis of the tangent space at `u`, excluding the phase
/// direction `i u` along which the score is constant.
fn tangent_basis(u: &CVector) -> Vec<CVector> {
    let n = u.len();
    let iu = u * C64::i();
    let mut basis: Vec<CVector> = Vec::with_capacity(2 * n);
    let fixed = [u.clone(), iu];
    for m in 0..n {
        for unit in [C64::from(1.0), C64::i()] {
            let mut v = CVector::zeros(n);
            v[m] = unit;
            for b in fixed.iter().chain(basis.iter()) {
                let c = b.dotc(&v).re;
                v -= b * C64::from(c);
            }
            let norm = v.norm();
            if norm > 1e-8 {
                basis.push(v / C64::from(norm));
            }
        }
    }
    basis
}

/// Local chart `x -> normalize(u0 + B x)` around a base point.
struct Chart {
    u0: CVector,
    basis: Vec<CVector>,
}

impl Chart {
    fn new(u0: CVector) -> Self {
        let basis = tangent_basis(&u0);
        Self { u0, basis }
    }

    fn point(&self, x: &DVector<f64>) -> (CVector, f64) {
        let v = self.basis.iter().zip(x.iter()).fold(self.u0.clone(), |acc, (b, &xi)| acc + b * C64::from(xi));
        let n = v.norm();
        (v / C64::from(n), n)
    }

    /// Gradient in chart coordinates from the Wirtinger gradient at `u`.
    fn pullback(&self, g: &CVector, u: &CVector, scale: f64) -> DVector<f64> {
        let along = u.dotc(g);
        let tg = g - u * along;
        DVector::from_iterator(self.basis.len(), self.basis.iter().map(|b| 2.0 * tg.dotc(b).re / scale))
    }
}

/// Quasi-Newton ascent on the unit sphere from `start`.
pub(crate) fn refine(design: &Design, start: InnerSolution, objective: Objective) -> InnerSolution {
    let mut chart = Chart::new(start.u.clone());
    let dim = chart.basis.len();
    if dim == 0 {
        return start;
    }
    let mut cur = start;
    let mut x = DVector::zeros(dim);
    let mut gx = chart.pullback(&design.gradient(&cur, objective), &cur.u, 1.0);
    let mut h = DMatrix::identity(dim, dim) * (INITIAL_STEP / gx.norm().max(f64::MIN_POSITIVE));
    for _ in 0..MAX_STEPS {
        let p = &h * &gx;
        let slope = gx.dot(&p);
        if !(slope > GAIN_FLOOR * cur.score.abs().max(f64::MIN_POSITIVE)) {
            break;
        }
        let mut t = 1.0;
        let mut accepted = None;
        while t * slope > GAIN_FLOOR * cur.score.abs().max(f64::MIN_POSITIVE) {
            let xt = &x + &p * t;
            let (u, n) = chart.point(&xt);
            let cand = design.evaluate(cur.tau0, &u, objective);
            if cand.score >= cur.score + ARMIJO * t * slope {
                accepted = Some((xt, n, cand));
                break;
            }
            t *= 0.5;
        }
        let Some((xt, n, next)) = accepted else { break };
        let g_next = chart.pullback(&design.gradient(&next, objective), &next.u, n);
        let s = &xt - &x;
        let y = &gx - &g_next;
        let sy = s.dot(&y);
        if sy > 1e-12 * s.norm() * y.norm() {
            let rho = 1.0 / sy;
            let i = DMatrix::<f64>::identity(dim, dim);
            let left = &i - &s * y.transpose() * rho;
            let right = &i - &y * s.transpose() * rho;
            h = &left * &h * &right + &s * s.transpose() * rho;
        }
        cur = next;
        x = xt;
        gx = g_next;
        if x.norm() > RECENTER {
            // The chart degenerates far from its base point; restart there.
            chart = Chart::new(cur.u.clone());
            x = DVector::zeros(dim);
            gx = chart.pullback(&design.gradient(&cur, objective), &cur.u, 1.0);
            h = DMatrix::identity(dim, dim) * (INITIAL_STEP / gx.norm().max(f64::MIN_POSITIVE));
        }
    }
    cur
}

/// Best beam for one `tau0`.
pub(crate) fn search(
    design: &Design,
    cands: &[CVector],
    tau0: f64,
    objective: Objective,
    multistarts: usize,
    warm: Option<&CVector>,
) -> InnerSolution {
    let mut pool: Vec<InnerSolution> = cands.iter().map(|u| design.evaluate(tau0, u, objective)).collect();
    if let Some(w) = warm {
        pool.push(design.evaluate(tau0, w, objective));
    }
    // Stable sort keeps candidate order among ties.
    pool.sort_by(|a, b| b.score.total_cmp(&a.score));
    let mut best: Option<InnerSolution> = None;
    for start in pool.into_iter().take(multistarts.max(1)) {
        let r = refine(design, start, objective);
        if best.as_ref().is_none_or(|b| r.score > b.score) {
            best = Some(r);
        }
    }
    best.expect("at least one candidate")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tangent_basis_is_orthonormal_and_tangent() {
        let u = CVector::from_vec(vec![C64::new(0.6, 0.1), C64::new(-0.2, 0.5), C64::new(0.3, -0.4)]);
        let u = &u / C64::from(u.norm());
        let b = tangent_basis(&u);
        assert_eq!(b.len(), 4);
        for (i, x) in b.iter().enumerate() {
            assert!(u.dotc(x).norm() < 1e-12);
            for (j, y) in b.iter().enumerate() {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((x.dotc(y).re - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn simplex_grid_sizes() {
        assert_eq!(simplex_weights(1).len(), 1);
        // Four vertices + compositions of 4 into 4 parts with >= 2 nonzero.
        assert_eq!(simplex_weights(4).len(), 4 + 35 - 4);
        assert_eq!(simplex_weights(2).len(), 2 + 3);
        assert_eq!(simplex_weights(6).len(), 6 + 15 + 1);
        for w in simplex_weights(3) {
            assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }
}
