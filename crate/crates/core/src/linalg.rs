//! Dense complex linear algebra shared by the oracle, the Hom-quiver builder
//! and the vortex solver.
//!
//! All rank decisions go through [`RankTolerance`]: a singular value counts as
//! zero when it is below `rel * max(sigma_max, 1)`.

use nalgebra::DMatrix;
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;

/// Default relative singular-value cutoff for numerical rank.
pub const DEFAULT_RANK_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankTolerance(pub f64);

impl Default for RankTolerance {
    fn default() -> Self {
        RankTolerance(DEFAULT_RANK_TOL)
    }
}

impl RankTolerance {
    pub fn cutoff(&self, sigma_max: f64) -> f64 {
        self.0 * sigma_max.max(1.0)
    }
}

pub fn zeros(rows: usize, cols: usize) -> CMat {
    CMat::zeros(rows, cols)
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

/// Singular values in descending order. Empty matrices have none.
pub fn singular_values(m: &CMat) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut sv: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    sv.sort_by(|a, b| b.partial_cmp(a).unwrap());
    sv
}

pub fn numerical_rank(m: &CMat, tol: RankTolerance) -> usize {
    let sv = singular_values(m);
    match sv.first() {
        None => 0,
        Some(&top) => {
            let cut = tol.cutoff(top);
            sv.iter().filter(|&&s| s > cut).count()
        }
    }
}

/// Singular values that sit within a factor 100 of the cutoff, on either side.
/// Used to flag instances whose rank decisions are fragile.
pub fn near_threshold(m: &CMat, tol: RankTolerance) -> bool {
    let sv = singular_values(m);
    let Some(&top) = sv.first() else { return false };
    let cut = tol.cutoff(top);
    sv.iter().any(|&s| s > cut / 100.0 && s < cut * 100.0)
}

/// Full SVD `(U, sigma, V)` with sigma sorted descending and `U`, `V` square.
fn full_svd(m: &CMat) -> (CMat, Vec<f64>, CMat) {
    let (r, c) = (m.nrows(), m.ncols());
    // nalgebra's thin SVD only returns min(r, c) vectors; pad to a square
    // problem so that complements come out of the same decomposition.
    let n = r.max(c);
    let mut padded = zeros(n, n);
    padded.view_mut((0, 0), (r, c)).copy_from(m);
    let svd = padded.svd(true, true);
    let u = svd.u.unwrap();
    let v_t = svd.v_t.unwrap();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].partial_cmp(&svd.singular_values[a]).unwrap());
    let sigma: Vec<f64> = order.iter().map(|&k| svd.singular_values[k]).collect();
    let mut u_sorted = zeros(n, n);
    let mut v_sorted = zeros(n, n);
    let v = v_t.adjoint();
    for (dst, &src) in order.iter().enumerate() {
        u_sorted.set_column(dst, &u.column(src));
        v_sorted.set_column(dst, &v.column(src));
    }
    (u_sorted, sigma, v_sorted)
}

/// Orthonormal basis (as columns) of the column space of `m`.
pub fn column_space(m: &CMat, tol: RankTolerance) -> CMat {
    let (r, c) = (m.nrows(), m.ncols());
    if r == 0 || c == 0 {
        return zeros(r, 0);
    }
    let (u, sigma, _) = full_svd(m);
    let cut = tol.cutoff(sigma[0]);
    let rank = sigma.iter().take(r.min(c)).filter(|&&s| s > cut).count();
    u.view((0, 0), (r, rank)).into_owned()
}

/// Orthonormal basis (as columns) of the null space of `m`.
pub fn null_space(m: &CMat, tol: RankTolerance) -> CMat {
    let (r, c) = (m.nrows(), m.ncols());
    if c == 0 {
        return zeros(0, 0);
    }
    if r == 0 {
        return identity(c);
    }
    let (_, sigma, v) = full_svd(m);
    let cut = tol.cutoff(sigma[0]);
    let rank = sigma.iter().take(r.min(c)).filter(|&&s| s > cut).count();
    v.view((0, rank), (c, c - rank)).into_owned()
}

/// Orthonormal basis of the orthogonal complement of the column space of `m`.
pub fn cokernel_basis(m: &CMat, tol: RankTolerance) -> CMat {
    null_space(&m.adjoint(), tol)
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    let (ar, ac) = (a.nrows(), a.ncols());
    let (br, bc) = (b.nrows(), b.ncols());
    let mut out = zeros(ar * br, ac * bc);
    for i in 0..ar {
        for j in 0..ac {
            let s = a[(i, j)];
            if s == C64::new(0.0, 0.0) {
                continue;
            }
            for k in 0..br {
                for l in 0..bc {
                    out[(i * br + k, j * bc + l)] = s * b[(k, l)];
                }
            }
        }
    }
    out
}

/// Column-major vectorization.
pub fn vec_col_major(m: &CMat) -> Vec<C64> {
    m.iter().copied().collect()
}

pub fn unvec_col_major(v: &[C64], rows: usize, cols: usize) -> CMat {
    CMat::from_column_slice(rows, cols, v)
}

pub fn frobenius(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Hermitian part `(m + m^†) / 2`.
pub fn hermitian_part(m: &CMat) -> CMat {
    (m + m.adjoint()).scale(0.5)
}

/// Eigen-decomposition of a Hermitian matrix; eigenvalues ascending.
pub fn hermitian_eigen(m: &CMat) -> (Vec<f64>, CMat) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), zeros(0, 0));
    }
    let eig = hermitian_part(m).symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap());
    let vals = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vecs = zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vecs.set_column(dst, &eig.eigenvectors.column(src));
    }
    (vals, vecs)
}

/// Spectral norm of a Hermitian matrix (largest absolute eigenvalue).
pub fn hermitian_spectral_norm(m: &CMat) -> f64 {
    hermitian_eigen(m).0.iter().fold(0.0, |acc, v| acc.max(v.abs()))
}

/// Applies a real function to a Hermitian matrix through its spectrum.
pub fn hermitian_map(m: &CMat, f: impl Fn(f64) -> f64) -> CMat {
    let (vals, vecs) = hermitian_eigen(m);
    let n = vals.len();
    let mut scaled = vecs.clone();
    for (k, v) in vals.iter().enumerate() {
        let s = f(*v);
        for r in 0..n {
            scaled[(r, k)] *= s;
        }
    }
    scaled * vecs.adjoint()
}

pub fn hermitian_exp(m: &CMat) -> CMat {
    hermitian_map(m, f64::exp)
}

/// Inverse of a square matrix, `None` when numerically singular.
pub fn inverse(m: &CMat) -> Option<CMat> {
    if m.nrows() == 0 {
        return Some(zeros(0, 0));
    }
    m.clone().try_inverse()
}

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn real(rows: usize, cols: usize, data: &[f64]) -> CMat {
        CMat::from_row_iterator(rows, cols, data.iter().map(|&x| c(x, 0.0)))
    }

    #[test]
    fn rank_of_simple_matrices() {
        let tol = RankTolerance::default();
        assert_eq!(numerical_rank(&real(2, 2, &[1.0, 0.0, 0.0, 0.0]), tol), 1);
        assert_eq!(numerical_rank(&real(2, 3, &[1.0, 2.0, 3.0, 2.0, 4.0, 6.0]), tol), 1);
        assert_eq!(numerical_rank(&zeros(0, 3), tol), 0);
        assert_eq!(numerical_rank(&real(1, 1, &[1e-12]), tol), 0);
    }

    #[test]
    fn null_space_and_column_space_are_complementary() {
        let tol = RankTolerance::default();
        let m = real(2, 3, &[1.0, 2.0, 3.0, 2.0, 4.0, 6.0]);
        let k = null_space(&m, tol);
        assert_eq!(k.ncols(), 2);
        assert!(frobenius(&(&m * &k)) < 1e-12);
        let im = column_space(&m, tol);
        assert_eq!(im.ncols(), 1);
        let ck = cokernel_basis(&m, tol);
        assert_eq!(ck.ncols(), 1);
        assert!(frobenius(&(ck.adjoint() * &im)) < 1e-12);
    }

    #[test]
    fn wide_and_tall_null_spaces() {
        let tol = RankTolerance::default();
        let tall = real(3, 1, &[1.0, 0.0, 0.0]);
        assert_eq!(null_space(&tall, tol).ncols(), 0);
        assert_eq!(cokernel_basis(&tall, tol).ncols(), 2);
        assert_eq!(null_space(&zeros(0, 2), tol).ncols(), 2);
    }

    #[test]
    fn kron_matches_vec_identity() {
        // vec(A X B) = (B^T ⊗ A) vec(X)
        let a = real(2, 2, &[1.0, 2.0, -1.0, 0.5]);
        let x = real(2, 3, &[0.3, -1.0, 2.0, 1.5, 0.0, 4.0]);
        let b = real(3, 1, &[1.0, -2.0, 0.25]);
        let lhs = vec_col_major(&(&a * &x * &b));
        let rhs = kron(&b.transpose(), &a) * CMat::from_column_slice(6, 1, &vec_col_major(&x));
        for (l, r) in lhs.iter().zip(rhs.iter()) {
            assert!((l - r).norm() < 1e-14);
        }
    }

    #[test]
    fn hermitian_exp_of_diagonal() {
        let m = real(2, 2, &[0.0, 0.0, 0.0, 1.0]);
        let e = hermitian_exp(&m);
        assert!((e[(0, 0)].re - 1.0).abs() < 1e-14);
        assert!((e[(1, 1)].re - std::f64::consts::E).abs() < 1e-14);
    }
}
