//! Small complex linear-algebra helpers on top of nalgebra.

use nalgebra::{Complex, DMatrix, DVector, SymmetricEigen};

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Singular values in descending order with the matching left singular vectors.
pub fn sorted_svd(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let rows = m.nrows();
    let k = m.nrows().min(m.ncols());
    if k == 0 {
        return (Vec::new(), CMatrix::zeros(rows, 0));
    }
    let svd = m.clone().svd(true, false);
    let u = svd.u.expect("left singular vectors requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let values = order.iter().map(|&i| svd.singular_values[i]).collect();
    let mut left = CMatrix::zeros(rows, k);
    for (dst, &src) in order.iter().enumerate() {
        left.set_column(dst, &u.column(src));
    }
    (values, left)
}

pub fn spectral_norm(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().singular_values().iter().copied().fold(0.0, f64::max)
}

/// Largest eigenvalue and a unit eigenvector of a Hermitian matrix.
pub fn principal_eigvec(h: &CMatrix) -> (f64, CVector) {
    let eig = SymmetricEigen::new(h.clone());
    let (idx, val) =
        eig.eigenvalues.iter().enumerate().fold((0, f64::MIN), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
    let mut v: CVector = eig.eigenvectors.column(idx).into_owned();
    normalize_phase(&mut v);
    (val, v)
}

pub fn min_eigenvalue(h: &CMatrix) -> f64 {
    SymmetricEigen::new(h.clone()).eigenvalues.iter().copied().fold(f64::MAX, f64::min)
}

/// Rotates the global phase so the largest-magnitude entry is real positive.
pub fn normalize_phase(v: &mut CVector) {
    let pivot = v.iter().copied().max_by(|a, b| a.norm_sqr().total_cmp(&b.norm_sqr()));
    if let Some(p) = pivot {
        let mag = p.norm();
        if mag > 0.0 {
            let rot = p.conj() / mag;
            v.iter_mut().for_each(|x| *x *= rot);
        }
    }
}

/// Dominant left singular vector of `g`, i.e. the unit `u` maximizing `||g^H u||`.
pub fn dominant_left_singular(g: &CMatrix) -> CVector {
    let (_, v) = principal_eigvec(&(g * g.adjoint()));
    v
}

/// `I_n (x) m` for square `m`.
pub fn kron_identity(n: usize, m: &CMatrix) -> CMatrix {
    let d = m.nrows();
    let mut out = CMatrix::zeros(n * d, n * d);
    for b in 0..n {
        out.view_mut((b * d, b * d), (d, d)).copy_from(m);
    }
    out
}

/// Column-stacking vectorization.
pub fn vec_columns(m: &CMatrix) -> CVector {
    CVector::from_iterator(m.len(), m.iter().copied())
}
