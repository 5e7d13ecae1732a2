//! Dense linear-algebra helpers on top of `faer`.

use std::f64::consts::PI;

use faer::{c64, Mat, MatRef, Side};

use crate::{Error, Result};

pub const ZERO: c64 = c64 { re: 0.0, im: 0.0 };
pub const ONE: c64 = c64 { re: 1.0, im: 0.0 };
pub const I: c64 = c64 { re: 0.0, im: 1.0 };

/// Pauli matrix `sigma^k`, with `k = 0` the identity.
pub fn pauli(k: usize) -> Mat<c64> {
    let (o, z, i) = (ONE, ZERO, I);
    let e = match k {
        0 => [[o, z], [z, o]],
        1 => [[z, o], [o, z]],
        2 => [[z, -i], [i, z]],
        3 => [[o, z], [z, -o]],
        _ => panic!("Pauli index {k} out of range"),
    };
    Mat::from_fn(2, 2, |r, c| e[r][c])
}

/// Kronecker product with `a` on the slow index.
pub fn kron(a: MatRef<'_, c64>, b: MatRef<'_, c64>) -> Mat<c64> {
    let (br, bc) = (b.nrows(), b.ncols());
    Mat::from_fn(a.nrows() * br, a.ncols() * bc, |r, c| {
        a[(r / br, c / bc)] * b[(r % br, c % bc)]
    })
}

/// Internal 4x4 operator `sigma^a (x) tau^b` in the `LD, RD, LU, RU` order,
/// where the L/R index runs fastest.
pub fn internal(sigma: usize, tau: usize) -> Mat<c64> {
    kron(pauli(tau).as_ref(), pauli(sigma).as_ref())
}

/// Largest entry modulus.
pub fn max_abs(m: MatRef<'_, c64>) -> f64 {
    let mut best = 0.0f64;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            best = best.max(m[(i, j)].norm());
        }
    }
    best
}

/// `max |(M^dagger M - I)_ij|`.
pub fn unitarity_residual(m: MatRef<'_, c64>) -> f64 {
    let p = m.adjoint() * m;
    let id = Mat::<c64>::identity(m.ncols(), m.ncols());
    max_abs((&p - &id).as_ref())
}

/// `max |(H - H^dagger)_ij|`.
pub fn hermiticity_residual(h: MatRef<'_, c64>) -> f64 {
    let d = h - h.adjoint();
    max_abs(d.as_ref())
}

/// Maps an angle to the principal branch `(-pi, pi]`.
pub fn wrap_angle(e: f64) -> f64 {
    let mut w = (e + PI).rem_euclid(2.0 * PI) - PI;
    if w <= -PI {
        w += 2.0 * PI;
    }
    w
}

/// Quasi-energy `E` of an eigenvalue `e^{-iE}`, in `(-pi, pi]`.
pub fn quasi_energy(lambda: c64) -> f64 {
    wrap_angle(-lambda.arg())
}

/// Eigen-decomposition of a Hermitian matrix: ascending eigenvalues and
/// orthonormal eigenvectors as columns.
pub fn hermitian_eigen(h: MatRef<'_, c64>) -> Result<(Vec<f64>, Mat<c64>)> {
    let evd = h.self_adjoint_eigen(Side::Lower).map_err(|e| Error::NoConvergence {
        context: format!("Hermitian eigensolver ({e:?})"),
        best_residual: f64::NAN,
    })?;
    let s = evd.S().column_vector();
    let vals: Vec<f64> = (0..h.nrows()).map(|i| s[i].re).collect();
    Ok((vals, evd.U().to_owned()))
}

/// Eigenvalues only of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(h: MatRef<'_, c64>) -> Result<Vec<f64>> {
    h.self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::NoConvergence {
            context: format!("Hermitian eigensolver ({e:?})"),
            best_residual: f64::NAN,
        })
}

/// Eigen-decomposition of a real symmetric matrix.
pub fn symmetric_eigen(h: MatRef<'_, f64>) -> Result<(Vec<f64>, Mat<f64>)> {
    let evd = h.self_adjoint_eigen(Side::Lower).map_err(|e| Error::NoConvergence {
        context: format!("symmetric eigensolver ({e:?})"),
        best_residual: f64::NAN,
    })?;
    let s = evd.S().column_vector();
    let vals: Vec<f64> = (0..h.nrows()).map(|i| s[i]).collect();
    Ok((vals, evd.U().to_owned()))
}

/// `exp(-i H t)` for Hermitian `H`.
pub fn expm_hermitian(h: MatRef<'_, c64>, t: f64) -> Result<Mat<c64>> {
    let (vals, v) = hermitian_eigen(h)?;
    let n = h.nrows();
    let scaled = Mat::from_fn(n, n, |i, j| v[(i, j)] * c64::from_polar(1.0, -vals[j] * t));
    Ok(&scaled * v.adjoint())
}

/// Eigenpairs of a unitary matrix.
#[derive(Clone, Debug)]
pub struct UnitaryEigen {
    /// Eigenvalues on the unit circle.
    pub values: Vec<c64>,
    /// Orthonormal eigenvectors as columns, in the order of `values`.
    pub vectors: Mat<c64>,
}

impl UnitaryEigen {
    /// Quasi-energies of the eigenvalues, in their stored order.
    pub fn quasi_energies(&self) -> Vec<f64> {
        self.values.iter().map(|&l| quasi_energy(l)).collect()
    }
}

const MIX_PRIMARY: f64 = 0.577_215_664_901_532_9;
const MIX_SECONDARY: f64 = std::f64::consts::SQRT_2;
const CLUSTER_TOL: f64 = 1e-8;

/// `(M + M^dagger)/2 + alpha (M - M^dagger)/(2i)`: Hermitian, with the same
/// eigenvectors as a unitary `M` and eigenvalues `cos E - alpha sin E`.
fn hermitian_mix(m: MatRef<'_, c64>, alpha: f64) -> Mat<c64> {
    let n = m.nrows();
    Mat::from_fn(n, n, |i, j| {
        let a = m[(i, j)];
        let b = m[(j, i)].conj();
        (a + b) * 0.5 + (a - b) * c64::new(0.0, -0.5 * alpha)
    })
}

/// Groups an ascending sequence into runs whose neighbours differ by less
/// than `tol`.
pub fn clusters(sorted: &[f64], tol: f64) -> Vec<std::ops::Range<usize>> {
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..=sorted.len() {
        if i == sorted.len() || sorted[i] - sorted[i - 1] >= tol {
            if i > start {
                out.push(start..i);
            }
            start = i;
        }
    }
    out
}

/// Eigen-decomposition of a unitary matrix with orthonormal eigenvectors,
/// including inside degenerate eigenspaces.
///
/// The vectors come from a Hermitian function of `M`. Clusters of that
/// function's eigenvalues may mix eigenvalues of `M` that it maps to the same
/// value; each such cluster is resolved by a second Hermitian function with a
/// different mixing coefficient on the projected matrix.
pub fn unitary_eigen(m: MatRef<'_, c64>) -> Result<UnitaryEigen> {
    let n = m.nrows();
    let (kvals, mut v) = hermitian_eigen(hermitian_mix(m, MIX_PRIMARY).as_ref())?;
    for range in clusters(&kvals, CLUSTER_TOL) {
        if range.len() < 2 {
            continue;
        }
        let block = v.subcols(range.start, range.len()).to_owned();
        let projected = block.adjoint() * m * &block;
        let (_, w) = hermitian_eigen(hermitian_mix(projected.as_ref(), MIX_SECONDARY).as_ref())?;
        let rotated = &block * &w;
        v.subcols_mut(range.start, range.len()).copy_from(&rotated);
    }
    let mv = m * &v;
    let values = (0..n)
        .map(|j| {
            let mut acc = ZERO;
            for i in 0..n {
                acc += v[(i, j)].conj() * mv[(i, j)];
            }
            acc / acc.norm()
        })
        .collect();
    Ok(UnitaryEigen { values, vectors: v })
}

/// Sorted quasi-energies of a unitary matrix.
pub fn unitary_quasi_energies(m: MatRef<'_, c64>) -> Result<Vec<f64>> {
    let mut e = unitary_eigen(m)?.quasi_energies();
    e.sort_by(f64::total_cmp);
    Ok(e)
}

/// Distance between two multisets of angles on the circle: the largest
/// pointwise angular difference after optimal cyclic alignment.
///
/// Returns infinity when the sizes differ.
pub fn circular_multiset_distance(a: &[f64], b: &[f64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    if a.is_empty() {
        return 0.0;
    }
    let mut sa: Vec<f64> = a.iter().map(|&x| x.rem_euclid(2.0 * PI)).collect();
    let mut sb: Vec<f64> = b.iter().map(|&x| x.rem_euclid(2.0 * PI)).collect();
    sa.sort_by(f64::total_cmp);
    sb.sort_by(f64::total_cmp);
    let n = sa.len();
    let dist = |x: f64, y: f64| wrap_angle(x - y).abs();
    // Small perturbations can move a few entries across the cut at 0, so try
    // a window of cyclic offsets around the identity alignment.
    let window = n.min(8);
    let mut best = f64::INFINITY;
    for off in 0..=2 * window {
        let shift = (off as isize - window as isize).rem_euclid(n as isize) as usize;
        let mut worst = 0.0f64;
        for i in 0..n {
            worst = worst.max(dist(sa[i], sb[(i + shift) % n]));
            if worst >= best {
                break;
            }
        }
        best = best.min(worst);
    }
    best
}

/// Gram-Schmidt orthonormalization of the columns of `m` in place (two
/// passes). Returns the number of columns that were numerically independent;
/// dependent columns are replaced by zeros.
pub fn orthonormalize(m: &mut Mat<c64>) -> usize {
    let (rows, cols) = (m.nrows(), m.ncols());
    let mut rank = 0;
    for j in 0..cols {
        let before: f64 = (0..rows).map(|i| m[(i, j)].norm_sqr()).sum::<f64>().sqrt();
        for _ in 0..2 {
            for k in 0..j {
                let mut dot = ZERO;
                for i in 0..rows {
                    dot += m[(i, k)].conj() * m[(i, j)];
                }
                for i in 0..rows {
                    let mk = m[(i, k)];
                    m[(i, j)] -= dot * mk;
                }
            }
        }
        let after: f64 = (0..rows).map(|i| m[(i, j)].norm_sqr()).sum::<f64>().sqrt();
        if after > 1e-10 * before.max(f64::MIN_POSITIVE) {
            for i in 0..rows {
                m[(i, j)] /= c64::new(after, 0.0);
            }
            rank += 1;
        } else {
            for i in 0..rows {
                m[(i, j)] = ZERO;
            }
        }
    }
    rank
}
