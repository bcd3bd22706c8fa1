//! Dense complex linear algebra helpers shared by the graded, Hodge and
//! parametrix modules.

use nalgebra::{Complex, DMatrix, DVector, Schur, SymmetricEigen};

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;
pub type CMat = DMatrix<C64>;

/// Relative singular-value threshold used for every rank decision.
pub const RANK_TOL: f64 = 1e-10;

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[inline]
pub fn real(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn zeros(rows: usize, cols: usize) -> CMat {
    CMat::zeros(rows, cols)
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

pub fn from_rows(rows: &[Vec<C64>]) -> CMat {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    CMat::from_fn(nrows, ncols, |i, j| rows[i][j])
}

pub fn from_real_rows(rows: &[&[f64]]) -> CMat {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, |r| r.len());
    CMat::from_fn(nrows, ncols, |i, j| real(rows[i][j]))
}

/// Frobenius norm; zero for empty matrices.
pub fn norm(m: &CMat) -> f64 {
    if m.is_empty() {
        0.0
    } else {
        m.norm()
    }
}

/// Singular values (descending) and the matching left singular vectors of
/// the nonzero ones, by one-sided Jacobi rotations on the columns.
fn svd_sorted(m: &CMat) -> (Vec<f64>, CMat) {
    let (rows, cols) = m.shape();
    if rows == 0 || cols == 0 {
        return (vec![0.0; rows.min(cols)], zeros(rows, 0));
    }
    let mut a = m.clone();
    for _sweep in 0..80 {
        let mut rotated = false;
        for p in 0..cols {
            for q in p + 1..cols {
                let alpha: f64 = a.column(p).iter().map(|z| z.norm_sqr()).sum();
                let beta: f64 = a.column(q).iter().map(|z| z.norm_sqr()).sum();
                let gamma: C64 = a.column(p).iter().zip(a.column(q).iter()).map(|(x, y)| x.conj() * y).sum();
                let g = gamma.norm();
                if g == 0.0 || g <= 1e-15 * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let phase = gamma / g;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = if zeta >= 0.0 {
                    1.0 / (zeta + (1.0 + zeta * zeta).sqrt())
                } else {
                    -1.0 / (-zeta + (1.0 + zeta * zeta).sqrt())
                };
                let cs = 1.0 / (1.0 + t * t).sqrt();
                let sn = cs * t;
                for i in 0..rows {
                    let ap = a[(i, p)];
                    let aq = a[(i, q)] * phase.conj();
                    a[(i, p)] = ap * cs - aq * sn;
                    a[(i, q)] = (ap * sn + aq * cs) * phase;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let norms: Vec<f64> = (0..cols).map(|j| a.column(j).norm()).collect();
    let mut idx: Vec<usize> = (0..cols).collect();
    idx.sort_by(|&x, &y| norms[y].total_cmp(&norms[x]));
    let sv: Vec<f64> = idx.iter().take(rows.min(cols)).map(|&j| norms[j]).collect();
    let vectors: Vec<DVector<C64>> = idx
        .iter()
        .filter(|&&j| norms[j] > 0.0)
        .take(rows.min(cols))
        .map(|&j| a.column(j) / real(norms[j]))
        .collect();
    let u = if vectors.is_empty() {
        zeros(rows, 0)
    } else {
        CMat::from_columns(&vectors)
    };
    (sv, u)
}

pub fn singular_values(m: &CMat) -> Vec<f64> {
    svd_sorted(m).0
}

/// Number of singular values above `rel_tol · max(σ_max, reference)`.
pub fn numerical_rank(m: &CMat, rel_tol: f64, reference: f64) -> usize {
    count_above(&singular_values(m), rel_tol, reference)
}

// singular values above `rel_tol · max(σ_max, reference)`
fn count_above(sv: &[f64], rel_tol: f64, reference: f64) -> usize {
    match sv.first() {
        None => 0,
        Some(&top) if top == 0.0 => 0,
        Some(&top) => sv.iter().filter(|&&s| s > rel_tol * top.max(reference)).count(),
    }
}

/// Orthonormal basis (as columns) of the column space of `m`, with the same
/// cutoff as [`numerical_rank`].
pub fn column_basis(m: &CMat, rel_tol: f64, reference: f64) -> CMat {
    let (sv, u) = svd_sorted(m);
    let rank = count_above(&sv, rel_tol, reference);
    u.columns(0, rank).into_owned()
}

/// Orthonormal basis of the orthogonal complement of the span of the
/// orthonormal columns of `basis` inside C^n.
pub fn orthogonal_complement(basis: &CMat, n: usize) -> CMat {
    if basis.ncols() == 0 {
        return identity(n);
    }
    if basis.ncols() >= n {
        return zeros(n, 0);
    }
    let p = identity(n) - basis * basis.adjoint();
    let (_, u) = svd_sorted(&p);
    u.columns(0, n - basis.ncols()).into_owned()
}

/// Eigenvalues via the complex Schur form.
pub fn eigenvalues(m: &CMat) -> Vec<C64> {
    assert!(m.is_square(), "eigenvalues of a non-square matrix");
    match m.nrows() {
        0 => Vec::new(),
        1 => vec![m[(0, 0)]],
        _ => {
            let (_, t) = Schur::new(m.clone()).unpack();
            t.diagonal().iter().copied().collect()
        }
    }
}

/// Sum of principal logarithms of the eigenvalues; zero for the empty matrix.
pub fn log_det(m: &CMat) -> C64 {
    eigenvalues(m).into_iter().map(|z| z.ln()).sum()
}

pub fn det(m: &CMat) -> C64 {
    if m.nrows() == 0 {
        return real(1.0);
    }
    m.clone().lu().determinant()
}

pub fn inverse(m: &CMat, what: &str) -> Result<CMat> {
    if m.nrows() == 0 {
        return Ok(zeros(0, 0));
    }
    m.clone()
        .try_inverse()
        .ok_or_else(|| Error::Singular(what.to_string()))
}

/// Matrix exponential (scaling and squaring with Padé approximants).
pub fn expm(m: &CMat) -> CMat {
    if m.nrows() == 0 {
        return zeros(0, 0);
    }
    m.exp()
}

pub fn trace(m: &CMat) -> C64 {
    if m.nrows() == 0 {
        real(0.0)
    } else {
        m.trace()
    }
}

/// Smallest eigenvalue of the Hermitian part of `m`, and the size of the
/// anti-Hermitian part.
pub fn hermitian_min_eigenvalue(m: &CMat) -> (f64, f64) {
    if m.nrows() == 0 {
        return (f64::INFINITY, 0.0);
    }
    let herm = (m + m.adjoint()) * real(0.5);
    let skew = norm(&(m - m.adjoint())) * 0.5;
    let eig = SymmetricEigen::new(herm);
    let min = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    (min, skew)
}

/// Relative distance `|a/b - 1|`, the natural comparison for determinants
/// whose logarithms are only defined modulo 2πi.
pub fn ratio_deviation(a: C64, b: C64) -> f64 {
    if b == real(0.0) {
        return if a == b { 0.0 } else { f64::INFINITY };
    }
    (a / b - real(1.0)).norm()
}

/// Distance of `z` to the nearest multiple of 2πi.
pub fn wrap_2pi_i(z: C64) -> C64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    let k = (z.im / two_pi).round();
    C64::new(z.re, z.im - k * two_pi)
}

/// Matrix as rows of `[re, im]` pairs.
pub fn matrix_to_rows(m: &CMat) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

/// Inverse of [`matrix_to_rows`]; `ncols` fixes the width of an empty matrix.
pub fn matrix_from_rows(rows: &[Vec<[f64; 2]>], ncols: Option<usize>) -> Result<CMat> {
    let width = ncols.or_else(|| rows.first().map(Vec::len)).unwrap_or(0);
    if let Some(bad) = rows.iter().position(|r| r.len() != width) {
        return Err(Error::Data(format!(
            "matrix row {bad} has {} entries, expected {width}",
            rows[bad].len()
        )));
    }
    Ok(CMat::from_fn(rows.len(), width, |i, j| c(rows[i][j][0], rows[i][j][1])))
}
