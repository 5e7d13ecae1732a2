//! Symmetry checks for the Dirac Hamiltonians and the walk.

use std::f64::consts::PI;

use faer::{c64, Mat, MatRef};

use crate::continuum::LatticeHamiltonian;
use crate::linalg::{circular_multiset_distance, internal, max_abs, pauli, unitary_quasi_energies, wrap_angle, ZERO};
use crate::operators::{StepOperator1D, StepOperator2D};
use crate::spectral::{momentum_block, QuasiEnergySpectrum, TauSector};
use crate::{Error, Result};

/// Largest lattice side for which [`check_walk_particle_hole`] assembles `U`.
pub const MAX_DENSE_SIDE: usize = 15;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SymmetryKind {
    /// `Theta = (sigma^x tau^y) K`.
    TimeReversal,
    /// `Xi = K`.
    ParticleHole,
    /// `Pi = sigma^x tau^y`.
    Chiral,
    /// `Gamma_1 = sigma^x` on two internal states.
    Chiral1D,
}

/// A symmetry `W` or `W K` acting on the internal space of every site.
#[derive(Clone, Debug, PartialEq)]
pub struct SymmetryOp {
    pub kind: SymmetryKind,
    pub matrix: Mat<c64>,
    pub antiunitary: bool,
}

impl SymmetryOp {
    pub fn new(kind: SymmetryKind) -> Self {
        let (matrix, antiunitary) = match kind {
            SymmetryKind::TimeReversal => (internal(1, 2), true),
            SymmetryKind::ParticleHole => (Mat::identity(4, 4), true),
            SymmetryKind::Chiral => (internal(1, 2), false),
            SymmetryKind::Chiral1D => (pauli(1), false),
        };
        Self {
            kind,
            matrix,
            antiunitary,
        }
    }

    pub fn internal_dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// `+1` or `-1` from `W W* = ±I` (antiunitary) or `W W = ±I` (unitary).
    pub fn squaring_sign(&self) -> Result<i8> {
        let w = &self.matrix;
        let sq = if self.antiunitary { w * w.conjugate() } else { w * w };
        let n = w.nrows();
        for sign in [1i8, -1] {
            let d = Mat::from_fn(n, n, |i, j| {
                let id = if i == j { sign as f64 } else { 0.0 };
                sq[(i, j)] - c64::new(id, 0.0)
            });
            if max_abs(d.as_ref()) < 1e-14 {
                return Ok(sign);
            }
        }
        Err(Error::InvalidArgument(format!("{:?} does not square to ±1", self.kind)))
    }

    /// `a b`: the product of two operators, antiunitary when exactly one is.
    pub fn compose(a: &SymmetryOp, b: &SymmetryOp) -> SymmetryOp {
        // (W_a K^e_a)(W_b K^e_b) = W_a (W_b or W_b*) K^(e_a + e_b).
        let wb = if a.antiunitary {
            b.matrix.conjugate().to_owned()
        } else {
            b.matrix.clone()
        };
        let antiunitary = a.antiunitary != b.antiunitary;
        let matrix = &a.matrix * wb;
        let kind = if antiunitary { a.kind } else { SymmetryKind::Chiral };
        SymmetryOp {
            kind,
            matrix,
            antiunitary,
        }
    }
}

/// `(I_sites (x) W) H (I_sites (x) W)^dagger`, with `H` complex-conjugated
/// first when `conj` is set.
fn conjugate_by(h: MatRef<'_, c64>, w: MatRef<'_, c64>, conj: bool) -> Mat<c64> {
    let d = w.nrows();
    let n = h.nrows();
    let get = |i: usize, j: usize| if conj { h[(i, j)].conj() } else { h[(i, j)] };
    Mat::from_fn(n, n, |r, c| {
        let (sr, a) = (r / d, r % d);
        let (sc, b) = (c / d, c % d);
        let mut v = ZERO;
        for k in 0..d {
            let wa = w[(a, k)];
            if wa == ZERO {
                continue;
            }
            for l in 0..d {
                let wb = w[(b, l)];
                if wb != ZERO {
                    v += wa * get(d * sr + k, d * sc + l) * wb.conj();
                }
            }
        }
        v
    })
}

/// Residual of the defining relation: `||W H* W^dagger - H||` for time
/// reversal, `||W H* W^dagger + H||` for particle-hole and
/// `||W H W^dagger + H||` for the chiral kinds (max norm).
pub fn check_hamiltonian_symmetry(h: &LatticeHamiltonian, op: &SymmetryOp) -> Result<f64> {
    check_matrix_symmetry(h.matrix.as_ref(), op)
}

/// As [`check_hamiltonian_symmetry`] for any matrix over `(site, internal)`.
pub fn check_matrix_symmetry(h: MatRef<'_, c64>, op: &SymmetryOp) -> Result<f64> {
    let d = op.internal_dim();
    if h.nrows() % d != 0 || h.nrows() != h.ncols() {
        return Err(Error::LatticeMismatch {
            expected: format!("a square matrix over {d} internal states"),
            found: format!("{}x{}", h.nrows(), h.ncols()),
        });
    }
    let t = conjugate_by(h, op.matrix.as_ref(), op.antiunitary);
    let r = match op.kind {
        SymmetryKind::TimeReversal => &t - h,
        _ => &t + h,
    };
    Ok(max_abs(r.as_ref()))
}

/// Largest imaginary part of the position-space matrix of `U`. `U` real is
/// the particle-hole symmetry `Xi = K` of the walk. Nonzero `theta_y` is
/// allowed and measured rather than rejected.
pub fn check_walk_particle_hole(op: &StepOperator2D) -> Result<f64> {
    let lat = op.lattice();
    if lat.lx() > MAX_DENSE_SIDE || lat.ly() > MAX_DENSE_SIDE {
        return Err(Error::InvalidLattice(format!(
            "dense assembly is limited to {MAX_DENSE_SIDE} sites per side, got {}",
            lat.describe()
        )));
    }
    Ok(max_imag(op.to_dense().as_ref()))
}

/// The same check for the one-dimensional walk.
pub fn check_walk_particle_hole_1d(op: &StepOperator1D) -> f64 {
    max_imag(op.to_dense().as_ref())
}

fn max_imag(m: MatRef<'_, c64>) -> f64 {
    let mut worst = 0f64;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            worst = worst.max(m[(i, j)].im.abs());
        }
    }
    worst
}

/// `max_k d({E(k)}, {-E(k)})` on the circle.
pub fn check_energy_reflection(spectrum: &QuasiEnergySpectrum) -> f64 {
    spectrum
        .entries
        .iter()
        .map(|(_, e)| {
            let neg: Vec<f64> = e.iter().map(|x| -x).collect();
            circular_multiset_distance(e, &neg)
        })
        .fold(0.0, f64::max)
}

/// Pairs each `k` with `k + pi` (mod `2 pi`). Errors unless every point has
/// its partner in the grid.
fn pi_pairs(spectrum: &QuasiEnergySpectrum) -> Result<Vec<(usize, usize)>> {
    let ks: Vec<f64> = spectrum.entries.iter().map(|(k, _)| *k).collect();
    if ks.is_empty() {
        return Err(Error::InvalidArgument("empty k_y grid".into()));
    }
    ks.iter()
        .enumerate()
        .map(|(i, &k)| {
            ks.iter()
                .position(|&q| wrap_angle(q - k - PI).abs() < 1e-9)
                .map(|j| (i, j))
                .ok_or_else(|| Error::InvalidArgument(format!("k_y = {k} has no partner at k_y + pi in the grid")))
        })
        .collect()
}

/// `max d({E(k)}, {E(k + pi)})` over the paired grid points: the
/// `pi`-periodicity of the spectrum in `k_y`.
pub fn check_sublattice_shift(spectrum: &QuasiEnergySpectrum) -> Result<f64> {
    let e = &spectrum.entries;
    Ok(pi_pairs(spectrum)?
        .into_iter()
        .map(|(i, j)| circular_multiset_distance(&e[i].1, &e[j].1))
        .fold(0.0, f64::max))
}

/// `max d({E(k)} + pi, {E(k + pi)})`: the exact consequence of
/// `U(k_y + pi) = -U(k_y)`.
pub fn check_pi_shift_relation(spectrum: &QuasiEnergySpectrum) -> Result<f64> {
    let e = &spectrum.entries;
    Ok(pi_pairs(spectrum)?
        .into_iter()
        .map(|(i, j)| {
            let shifted: Vec<f64> = e[i].1.iter().map(|x| x + PI).collect();
            circular_multiset_distance(&shifted, &e[j].1)
        })
        .fold(0.0, f64::max))
}

/// `d(spec U_down(k_y), spec U_up(-k_y))` for `theta_y = 0`.
pub fn check_tau_block_relation(op: &StepOperator2D, ky: f64) -> Result<f64> {
    let plus = momentum_block(op, ky)?;
    let minus = momentum_block(op, -ky)?;
    let leak = plus.sector_leakage();
    if leak != 0.0 {
        return Err(Error::InvalidArgument(format!(
            "tau^z sectors are coupled (leakage {leak:e}); theta_y must vanish"
        )));
    }
    let down = unitary_quasi_energies(plus.sector(TauSector::Down).as_ref())?;
    let up = unitary_quasi_energies(minus.sector(TauSector::Up).as_ref())?;
    Ok(circular_multiset_distance(&down, &up))
}
