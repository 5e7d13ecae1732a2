//! Eigenpairs of the full walk with quasi-energy closest to zero.
//!
//! Both routes target the top of the spectrum of `H = (U + U^dagger)/2`,
//! whose eigenvalue `cos E` is largest for `E` nearest zero, and then
//! diagonalize `U` inside the resulting invariant subspace to separate `+E`
//! from `-E` and to orthogonalize degenerate clusters.

use faer::{c64, Mat};
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;

use crate::lattice::SpinorField2D;
use crate::linalg::{hermitian_eigen, internal, symmetric_eigen, unitary_eigen, ZERO};
use crate::operators::StepOperator2D;
use crate::{Error, Result};

/// One eigenpair `U psi = e^{-iE} psi`.
#[derive(Clone, Debug)]
pub struct EigenPair {
    pub energy: f64,
    pub state: SpinorField2D,
    /// `||U psi - e^{-iE} psi||`.
    pub residual: f64,
}

/// Eigenpairs sorted by `|E|`, with solver diagnostics.
#[derive(Clone, Debug)]
pub struct EigenpairSet {
    pub pairs: Vec<EigenPair>,
    /// `max E - min E` over the returned pairs.
    pub cluster_width: f64,
    /// Solver that produced the pairs.
    pub method: String,
    pub iterations: usize,
}

impl EigenpairSet {
    pub fn max_residual(&self) -> f64 {
        self.pairs.iter().map(|p| p.residual).fold(0.0, f64::max)
    }

    pub fn energies(&self) -> Vec<f64> {
        self.pairs.iter().map(|p| p.energy).collect()
    }
}

/// Residual threshold for accepting an eigenpair.
pub const RESIDUAL_LIMIT: f64 = 1e-8;

/// Relative gap below which top eigenvalues of `H` are kept together.
const CLUSTER_GAP: f64 = 1e-7;

fn residual(op: &StepOperator2D, psi: &[c64], lambda: c64, buf: &mut [c64], tmp: &mut [c64]) -> f64 {
    op.apply_into(psi, buf, tmp);
    buf.iter()
        .zip(psi)
        .map(|(u, p)| (u - p * lambda).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// Applies `U` to each column.
fn apply_u_block(op: &StepOperator2D, x: &Mat<c64>) -> Mat<c64> {
    let n = x.nrows();
    let cols: Vec<Vec<c64>> = (0..x.ncols())
        .into_par_iter()
        .map(|j| {
            let mut out = vec![ZERO; n];
            let mut tmp = vec![ZERO; n];
            op.apply_into(x.col_as_slice(j), &mut out, &mut tmp);
            out
        })
        .collect();
    Mat::from_fn(n, x.ncols(), |i, j| cols[j][i])
}

/// Applies `H = (U + U^dagger)/2` to each column.
fn apply_h_block(op: &StepOperator2D, x: &Mat<c64>) -> Mat<c64> {
    let n = x.nrows();
    let cols: Vec<Vec<c64>> = (0..x.ncols())
        .into_par_iter()
        .map(|j| {
            let mut f = vec![ZERO; n];
            let mut b = vec![ZERO; n];
            let mut tmp = vec![ZERO; n];
            let col = x.col_as_slice(j);
            op.apply_into(col, &mut f, &mut tmp);
            op.apply_adjoint_into(col, &mut b, &mut tmp);
            f.iter_mut().zip(&b).for_each(|(a, c)| *a = (*a + c) * 0.5);
            f
        })
        .collect();
    Mat::from_fn(n, x.ncols(), |i, j| cols[j][i])
}

/// Number of leading entries of a descending list to keep so that `count`
/// entries are taken without splitting a cluster.
fn extend_cluster(desc: &[f64], count: usize) -> usize {
    let mut k = count.min(desc.len());
    while k > 0 && k < desc.len() && (desc[k - 1] - desc[k]).abs() < CLUSTER_GAP {
        k += 1;
    }
    k
}

/// Diagonalizes `U` inside the span of orthonormal columns `v` and returns
/// the `count` pairs with smallest `|E|`.
fn resolve_in_subspace(
    op: &StepOperator2D,
    v: &Mat<c64>,
    count: usize,
    method: &str,
    iterations: usize,
) -> Result<EigenpairSet> {
    let lat = *op.lattice();
    let n = v.nrows();
    let uv = apply_u_block(op, v);
    let projected = v.adjoint() * &uv;
    let eig = unitary_eigen(projected.as_ref())?;
    let states = v * &eig.vectors;
    let mut buf = vec![ZERO; n];
    let mut tmp = vec![ZERO; n];
    let mut pairs: Vec<EigenPair> = (0..states.ncols())
        .map(|j| {
            let psi = states.col_as_slice(j).to_vec();
            let lambda = eig.values[j];
            let r = residual(op, &psi, lambda, &mut buf, &mut tmp);
            EigenPair {
                energy: crate::linalg::quasi_energy(lambda),
                state: SpinorField2D::from_vec(lat, psi).expect("dimension matches"),
                residual: r,
            }
        })
        .collect();
    pairs.sort_by(|a, b| a.energy.abs().total_cmp(&b.energy.abs()));
    pairs.truncate(count);
    let (lo, hi) = pairs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
        (lo.min(p.energy), hi.max(p.energy))
    });
    let set = EigenpairSet {
        cluster_width: if pairs.is_empty() { 0.0 } else { hi - lo },
        pairs,
        method: method.to_string(),
        iterations,
    };
    let worst = set.max_residual();
    if worst > RESIDUAL_LIMIT {
        return Err(Error::NoConvergence {
            context: format!("{method}: eigenpair residual above {RESIDUAL_LIMIT:e}"),
            best_residual: worst,
        });
    }
    Ok(set)
}

/// Sparse isometry onto the `+1` sector of the reflection
/// `R_x psi(x, y) = W psi(-x, y)` with `W = sigma^y (x) tau^x`.
struct ReflectionSector {
    columns: Vec<Vec<(usize, c64)>>,
}

impl ReflectionSector {
    fn new(op: &StepOperator2D) -> Result<Self> {
        let lat = *op.lattice();
        let w = internal(2, 1);
        let (vals, vecs) = hermitian_eigen(w.as_ref())?;
        let plus: Vec<usize> = (0..4).filter(|&i| vals[i] > 0.0).collect();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let mut columns = Vec::with_capacity(lat.dim() / 2 + lat.ly());
        for iy in 0..lat.ly() {
            let y = lat.coord_y(iy);
            let origin = lat.index_of(0, y, crate::Component::LD);
            for &k in &plus {
                columns.push((0..4).map(|a| (origin + a, vecs[(a, k)])).collect());
            }
            for x in 1..=lat.half_x() {
                let here = lat.index_of(x, y, crate::Component::LD);
                let there = lat.index_of(-x, y, crate::Component::LD);
                for c in 0..4 {
                    let mut col = vec![(here + c, c64::new(h, 0.0))];
                    for a in 0..4 {
                        if w[(a, c)].norm() > 0.0 {
                            col.push((there + a, w[(a, c)] * h));
                        }
                    }
                    columns.push(col);
                }
            }
        }
        Ok(Self { columns })
    }

    fn dim(&self) -> usize {
        self.columns.len()
    }

    /// `B^dagger v`.
    fn project(&self, v: &[c64]) -> Vec<c64> {
        self.columns
            .iter()
            .map(|col| col.iter().map(|&(i, b)| b.conj() * v[i]).sum())
            .collect()
    }

    /// `B s`.
    fn lift(&self, s: &[c64], n: usize) -> Vec<c64> {
        let mut out = vec![ZERO; n];
        for (col, &a) in self.columns.iter().zip(s) {
            for &(i, b) in col {
                out[i] += b * a;
            }
        }
        out
    }
}

/// `R_y psi(x, y) = tau^y psi(x, -y)`, which anticommutes with `R_x`.
fn reflect_y(op: &StepOperator2D, psi: &[c64]) -> Vec<c64> {
    let lat = *op.lattice();
    let w = internal(0, 2);
    let mut out = vec![ZERO; psi.len()];
    for iy in 0..lat.ly() {
        let y = lat.coord_y(iy);
        for ix in 0..lat.lx() {
            let x = lat.coord_x(ix);
            let src = lat.index_of(x, -y, crate::Component::LD);
            let dst = lat.index_of(x, y, crate::Component::LD);
            for a in 0..4 {
                out[dst + a] = (0..4).map(|b| w[(a, b)] * psi[src + b]).sum();
            }
        }
    }
    out
}

/// Scalars of the dense shift-invert iteration.
trait DenseScalar: Copy {
    fn from_parts(re: f64, im: f64) -> Self;
    fn to_c64(self) -> c64;
    fn ritz(g: faer::MatRef<'_, Self>) -> Result<(Vec<f64>, Mat<Self>)>;
}

impl DenseScalar for f64 {
    fn from_parts(re: f64, _im: f64) -> Self {
        re
    }
    fn to_c64(self) -> c64 {
        c64::new(self, 0.0)
    }
    fn ritz(g: faer::MatRef<'_, Self>) -> Result<(Vec<f64>, Mat<Self>)> {
        symmetric_eigen(g)
    }
}

impl DenseScalar for c64 {
    fn from_parts(re: f64, im: f64) -> Self {
        c64::new(re, im)
    }
    fn to_c64(self) -> c64 {
        self
    }
    fn ritz(g: faer::MatRef<'_, Self>) -> Result<(Vec<f64>, Mat<Self>)> {
        hermitian_eigen(g)
    }
}

/// Shift above the top of the spectrum of `H`, whose eigenvalues lie in
/// `[-1, 1]`.
const DENSE_SHIFT: f64 = 1.0 + 1e-3;

macro_rules! dense_top {
    ($name:ident, $t:ty) => {
        /// Orthonormal basis of the eigenvectors of the dense Hermitian `h`
        /// with the `count` largest eigenvalues, extended to whole clusters,
        /// by block inverse iteration with a single LU factorization.
        fn $name(h: &Mat<$t>, count: usize) -> Result<(Mat<$t>, usize)> {
            use faer::linalg::solvers::Solve;
            let n = h.nrows();
            let b = (2 * count + 8).min(n);
            let factor = |sigma: f64| {
                Mat::<$t>::from_fn(n, n, |i, j| {
                    if i == j {
                        h[(i, j)] - <$t>::from_parts(sigma, 0.0)
                    } else {
                        h[(i, j)]
                    }
                })
                .partial_piv_lu()
            };
            let mut lu = factor(DENSE_SHIFT);
            let mut rng = ChaCha20Rng::seed_from_u64(0x5eed);
            let mut unit = || (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64 - 0.5;
            let mut x = Mat::<$t>::from_fn(n, b, |_, _| <$t>::from_parts(unit(), unit()));
            let mut best = f64::INFINITY;
            for iter in 1..=DENSE_MAX_ITERATIONS {
                lu.solve_in_place(&mut x);
                x = x.qr().compute_thin_Q();
                let hx = h * &x;
                let g = x.adjoint() * &hx;
                let g = Mat::<$t>::from_fn(b, b, |i, j| {
                    let (a, c) = (g[(i, j)].to_c64(), g[(j, i)].to_c64().conj());
                    let m = (a + c) * 0.5;
                    <$t>::from_parts(m.re, m.im)
                });
                let (vals, w) = <$t>::ritz(g.as_ref())?;
                let wd = Mat::<$t>::from_fn(b, b, |i, j| w[(i, b - 1 - j)]);
                let theta: Vec<f64> = (0..b).map(|j| vals[b - 1 - j]).collect();
                x = &x * &wd;
                let hx = hx * &wd;
                let k = extend_cluster(&theta, count).min(b - 1);
                let mut worst = 0.0f64;
                for j in 0..k {
                    let r: f64 = (0..n)
                        .map(|i| (hx[(i, j)].to_c64() - x[(i, j)].to_c64() * theta[j]).norm_sqr())
                        .sum::<f64>()
                        .sqrt();
                    worst = worst.max(r);
                }
                best = best.min(worst);
                if worst < DENSE_TOL {
                    return Ok((x.subcols(0, k).to_owned(), iter));
                }
                if iter % DENSE_RESHIFT == 0 {
                    // Wanted values far below one: move the shift next to them.
                    let spread = (theta[0] - theta[b - 1]).max(1e-9);
                    lu = factor(theta[0] + 0.05 * spread);
                }
            }
            Err(Error::NoConvergence {
                context: "dense shift-invert iteration".into(),
                best_residual: best,
            })
        }
    };
}

const DENSE_MAX_ITERATIONS: usize = 100;
const DENSE_TOL: f64 = 1e-12;
const DENSE_RESHIFT: usize = 10;

dense_top!(dense_top_real, f64);
dense_top!(dense_top_complex, c64);

/// Dense route: the projected Hermitian surrogate is assembled explicitly
/// and its top eigenvectors are obtained by shift-invert iteration at
/// `cos E = 1`.
///
/// When both profiles are even in their coordinate, `U` commutes with the
/// reflections `R_x` and `R_y`, which anticommute with each other. The
/// problem is then solved in the `R_x = +1` sector, of half the dimension,
/// and the other half of the spectrum is obtained by applying `R_y`.
pub fn near_unity_states_dense(op: &StepOperator2D, count: usize) -> Result<EigenpairSet> {
    let lat = *op.lattice();
    let n = lat.dim();
    if count == 0 || count > n {
        return Err(Error::InvalidArgument(format!("count {count} outside 1..={n}")));
    }
    if op.profile_x().is_even() && op.profile_y().is_even() {
        let sector = ReflectionSector::new(op)?;
        let m = sector.dim();
        let images: Vec<Vec<c64>> = (0..m)
            .into_par_iter()
            .map(|j| {
                let mut e = vec![ZERO; m];
                e[j] = c64::new(1.0, 0.0);
                let full = sector.lift(&e, n);
                let mut out = vec![ZERO; n];
                let mut tmp = vec![ZERO; n];
                op.apply_into(&full, &mut out, &mut tmp);
                sector.project(&out)
            })
            .collect();
        let hs = Mat::from_fn(m, m, |i, j| (images[j][i] + images[i][j].conj()) * 0.5);
        drop(images);
        let (top, iters) = dense_top_complex(&hs, count.div_ceil(2).min(m - 1))?;
        let k = top.ncols();
        let mut basis = Mat::<c64>::zeros(n, 2 * k);
        for j in 0..k {
            let s: Vec<c64> = (0..m).map(|i| top[(i, j)]).collect();
            let full = sector.lift(&s, n);
            let partner = reflect_y(op, &full);
            for i in 0..n {
                basis[(i, j)] = full[i];
                basis[(i, k + j)] = partner[i];
            }
        }
        return resolve_in_subspace(op, &basis, count, "dense reflection sector", iters);
    }
    // U is real, so H is real symmetric.
    let cols: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|j| {
            let mut e = vec![ZERO; n];
            e[j] = c64::new(1.0, 0.0);
            let mut f = vec![ZERO; n];
            let mut g = vec![ZERO; n];
            let mut tmp = vec![ZERO; n];
            op.apply_into(&e, &mut f, &mut tmp);
            op.apply_adjoint_into(&e, &mut g, &mut tmp);
            f.iter().zip(&g).map(|(a, b)| 0.5 * (a.re + b.re)).collect()
        })
        .collect();
    let h = Mat::<f64>::from_fn(n, n, |i, j| cols[j][i]);
    drop(cols);
    let (top, iters) = dense_top_real(&h, count.min(n - 1))?;
    let basis = Mat::from_fn(n, top.ncols(), |i, j| c64::new(top[(i, j)], 0.0));
    resolve_in_subspace(op, &basis, count, "dense", iters)
}

/// Options of the Chebyshev-filtered subspace iteration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChebyshevOptions {
    /// Block size, at least `count`; the margin speeds up convergence.
    pub block: usize,
    pub degree: usize,
    pub max_iterations: usize,
    /// Residual target `||H x - theta x||` for the wanted Ritz vectors.
    pub tol: f64,
    pub seed: u64,
}

impl ChebyshevOptions {
    pub fn for_count(count: usize) -> Self {
        Self {
            block: count + 16,
            degree: 40,
            max_iterations: 200,
            tol: 1e-11,
            seed: 0x5eed,
        }
    }
}

fn orthonormal_columns(x: &Mat<c64>) -> Mat<c64> {
    x.qr().compute_thin_Q()
}

/// Matrix-free route: Chebyshev-filtered subspace iteration on
/// `H = (U + U^dagger)/2`, with Rayleigh-Ritz after every filter, followed
/// by diagonalization of `U` in the converged subspace.
pub fn near_unity_states(op: &StepOperator2D, count: usize, opts: ChebyshevOptions) -> Result<EigenpairSet> {
    let n = op.lattice().dim();
    let b = opts.block.max(count + 1).min(n);
    if count == 0 || count >= n {
        return Err(Error::InvalidArgument(format!("count {count} outside 1..{n}")));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(opts.seed);
    let mut unit = || (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64 - 0.5;
    let mut x = Mat::from_fn(n, b, |_, _| c64::new(unit(), unit()));
    x = orthonormal_columns(&x);
    let mut best = f64::INFINITY;
    for iter in 1..=opts.max_iterations {
        // Rayleigh-Ritz.
        let hx = apply_h_block(op, &x);
        let g = x.adjoint() * &hx;
        let g = Mat::from_fn(b, b, |i, j| (g[(i, j)] + g[(j, i)].conj()) * 0.5);
        let (vals, w) = hermitian_eigen(g.as_ref())?;
        let order: Vec<usize> = (0..b).rev().collect();
        let wd = Mat::from_fn(b, b, |i, j| w[(i, order[j])]);
        let theta: Vec<f64> = order.iter().map(|&j| vals[j]).collect();
        x = &x * &wd;
        let hx = hx * &wd;
        let k = extend_cluster(&theta, count).min(b - 1);
        let mut worst = 0.0f64;
        for j in 0..k {
            let r: f64 = (0..n)
                .map(|i| (hx[(i, j)] - x[(i, j)] * theta[j]).norm_sqr())
                .sum::<f64>()
                .sqrt();
            worst = worst.max(r);
        }
        best = best.min(worst);
        if worst < opts.tol {
            let v = x.subcols(0, k).to_owned();
            return resolve_in_subspace(op, &v, count, "chebyshev subspace iteration", iter);
        }
        // Filter: damp [-1, theta_min], normalized to one at the top, H = 1.
        let (a0, b0) = (-1.0, theta[b - 1]);
        let e = (b0 - a0) / 2.0;
        let center = (b0 + a0) / 2.0;
        let sigma1 = e / (1.0 - center);
        let mut sigma = sigma1;
        let mut prev = x.clone();
        let hy = apply_h_block(op, &x);
        let mut y = Mat::from_fn(n, b, |i, j| (hy[(i, j)] - x[(i, j)] * center) * (sigma1 / e));
        for _ in 2..=opts.degree {
            let sigma_new = 1.0 / (2.0 / sigma1 - sigma);
            let hy = apply_h_block(op, &y);
            let next = Mat::from_fn(n, b, |i, j| {
                (hy[(i, j)] - y[(i, j)] * center) * (2.0 * sigma_new / e) - prev[(i, j)] * (sigma * sigma_new)
            });
            prev = y;
            y = next;
            sigma = sigma_new;
        }
        x = orthonormal_columns(&y);
    }
    Err(Error::NoConvergence {
        context: "chebyshev subspace iteration".into(),
        best_residual: best,
    })
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::lattice::LatticeSpec;
    use crate::linalg::unitary_quasi_energies;
    use crate::operators::AngleProfile;

    fn corner_op(l: usize, wall: i64, t2: f64) -> StepOperator2D {
        let p = AngleProfile::wall(PI / 3.0, t2, wall);
        StepOperator2D::new(LatticeSpec::square(l).unwrap(), p, p)
    }

    fn sorted_abs(mut e: Vec<f64>) -> Vec<f64> {
        e.iter_mut().for_each(|x| *x = x.abs());
        e.sort_by(f64::total_cmp);
        e
    }

    #[test]
    fn reflections_commute_with_walk() {
        let op = corner_op(7, 1, -0.4);
        let lat = *op.lattice();
        let n = lat.dim();
        let psi: Vec<c64> = (0..n)
            .map(|i| c64::new((i as f64).sin(), (0.3 * i as f64).cos()))
            .collect();
        let mut a = vec![ZERO; n];
        let mut tmp = vec![ZERO; n];
        // R_y U = U R_y.
        op.apply_into(&reflect_y(&op, &psi), &mut a, &mut tmp);
        let mut b = vec![ZERO; n];
        op.apply_into(&psi, &mut b, &mut tmp);
        let b = reflect_y(&op, &b);
        let d = a.iter().zip(&b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
        assert!(d < 1e-14);
        // The sector isometry is orthonormal and U maps the sector into itself.
        let s = ReflectionSector::new(&op).unwrap();
        assert_eq!(s.dim(), n / 2);
        let e3: Vec<c64> = (0..s.dim())
            .map(|i| if i == 3 { c64::new(1.0, 0.0) } else { ZERO })
            .collect();
        let full = s.lift(&e3, n);
        op.apply_into(&full, &mut a, &mut tmp);
        let back = s.lift(&s.project(&a), n);
        let leak = a.iter().zip(&back).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
        assert!(leak < 1e-14);
    }

    #[test]
    fn dense_routes_agree_with_full_spectrum() {
        let op = corner_op(9, 2, -PI / 3.0);
        let all = unitary_quasi_energies(op.to_dense().as_ref()).unwrap();
        let want = sorted_abs(all)[..6].to_vec();
        let set = near_unity_states_dense(&op, 6).unwrap();
        assert_eq!(set.pairs.len(), 6);
        let got = sorted_abs(set.energies());
        for (g, w) in got.iter().zip(&want) {
            assert!((g - w).abs() < 1e-10, "{got:?} vs {want:?}");
        }
        assert!(set.max_residual() < 1e-10);
        // Orthonormal states.
        for i in 0..6 {
            for j in 0..6 {
                let ip = set.pairs[i].state.inner(&set.pairs[j].state);
                let id = if i == j { 1.0 } else { 0.0 };
                assert!((ip - c64::new(id, 0.0)).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn dense_fallback_for_uneven_profiles() {
        let p = AngleProfile::wall(PI / 3.0, -PI / 3.0, 2).with_noise(0.1, 4);
        let op = StepOperator2D::new(LatticeSpec::square(7).unwrap(), p, AngleProfile::constant(0.3));
        let all = unitary_quasi_energies(op.to_dense().as_ref()).unwrap();
        let want = sorted_abs(all)[..4].to_vec();
        let set = near_unity_states_dense(&op, 4).unwrap();
        assert_eq!(set.method, "dense");
        let got = sorted_abs(set.energies());
        for (g, w) in got.iter().zip(&want) {
            assert!((g - w).abs() < 1e-10);
        }
    }

    #[test]
    fn chebyshev_matches_dense() {
        let op = corner_op(11, 3, -PI / 3.0);
        let dense = near_unity_states_dense(&op, 8).unwrap();
        let opts = ChebyshevOptions {
            block: 20,
            degree: 20,
            ..ChebyshevOptions::for_count(8)
        };
        let mf = near_unity_states(&op, 8, opts).unwrap();
        let a = sorted_abs(dense.energies());
        let b = sorted_abs(mf.energies());
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-9, "{a:?} vs {b:?}");
        }
        assert!(mf.max_residual() < RESIDUAL_LIMIT);
    }
}
