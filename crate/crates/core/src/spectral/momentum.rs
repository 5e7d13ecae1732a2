use std::f64::consts::PI;
use std::io::Write;

use faer::{c64, Mat};
use rayon::prelude::*;

use crate::linalg::{unitary_eigen, unitary_quasi_energies, UnitaryEigen, ZERO};
use crate::operators::StepOperator2D;
use crate::{fmt_f64, Error, Result};

/// `U(k_y)`: the walk restricted to plane waves `e^{i k_y y}`, a
/// `4 L_x x 4 L_x` unitary acting on `(x, c)` with index `4 ix + c`.
#[derive(Clone, Debug)]
pub struct MomentumBlock {
    pub ky: f64,
    pub matrix: Mat<c64>,
}

/// Internal-state sector of a block when `theta_y = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TauSector {
    /// `tau^z = +1`: `LD, RD`.
    Down,
    /// `tau^z = -1`: `LU, RU`.
    Up,
}

/// `out = U(k_y) psi` for a field over `x` only.
fn apply_block(op: &StepOperator2D, ky: f64, psi: &[c64], out: &mut [c64]) {
    let lx = op.lattice().lx();
    let theta_y = op.theta_y()[0];
    let (sy, cy) = theta_y.sin_cos();
    let (sk, ck) = ky.sin_cos();
    let isk = c64::new(0.0, sk);
    for ix in 0..lx {
        let r = (ix + 1) % lx;
        let l = (ix + lx - 1) % lx;
        let (sr, cr) = op.theta_x()[r].sin_cos();
        let (sl, cl) = op.theta_x()[l].sin_cos();
        let a = &psi[4 * r..4 * r + 4];
        let b = &psi[4 * l..4 * l + 4];
        let ld = a[0] * cr - a[1] * sr;
        let rd = b[0] * sl + b[1] * cl;
        let lu = a[2] * cr - a[3] * sr;
        let ru = b[2] * sl + b[3] * cl;
        let v = [
            ld * cy - ru * sy,
            rd * cy - lu * sy,
            lu * cy + rd * sy,
            ru * cy + ld * sy,
        ];
        let o = &mut out[4 * ix..4 * ix + 4];
        o[0] = v[0] * ck + v[1] * isk;
        o[1] = v[0] * isk + v[1] * ck;
        o[2] = v[2] * ck - v[3] * isk;
        o[3] = v[3] * ck - v[2] * isk;
    }
}

/// Builds `U(k_y)`. Requires a uniform `theta_y` so that `k_y` is conserved.
pub fn momentum_block(op: &StepOperator2D, ky: f64) -> Result<MomentumBlock> {
    if !op.profile_y().is_uniform() {
        return Err(Error::NotTranslationInvariant(format!(
            "theta_y profile '{}' depends on y",
            op.profile_y()
        )));
    }
    let n = 4 * op.lattice().lx();
    let mut m = Mat::<c64>::zeros(n, n);
    let mut e = vec![ZERO; n];
    let mut col = vec![ZERO; n];
    for j in 0..n {
        e[j] = c64::new(1.0, 0.0);
        apply_block(op, ky, &e, &mut col);
        e[j] = ZERO;
        for (i, v) in col.iter().enumerate() {
            m[(i, j)] = *v;
        }
    }
    Ok(MomentumBlock { ky, matrix: m })
}

impl MomentumBlock {
    /// Restriction to one `tau^z` sector (`2 L_x` square). Exact only when
    /// `theta_y = 0`, where the block is block diagonal in the sectors.
    pub fn sector(&self, sector: TauSector) -> Mat<c64> {
        let off = match sector {
            TauSector::Down => 0,
            TauSector::Up => 2,
        };
        let lx = self.matrix.nrows() / 4;
        let idx = |k: usize| 4 * (k / 2) + off + k % 2;
        Mat::from_fn(2 * lx, 2 * lx, |i, j| self.matrix[(idx(i), idx(j))])
    }

    /// Largest matrix element coupling the two `tau^z` sectors.
    pub fn sector_leakage(&self) -> f64 {
        let n = self.matrix.nrows();
        let mut worst = 0.0f64;
        for j in 0..n {
            for i in 0..n {
                if (i % 4 < 2) != (j % 4 < 2) {
                    worst = worst.max(self.matrix[(i, j)].norm());
                }
            }
        }
        worst
    }

    pub fn eigen(&self) -> Result<UnitaryEigen> {
        unitary_eigen(self.matrix.as_ref())
    }
}

/// Sorted quasi-energies of a block, `E` in `(-pi, pi]`.
pub fn quasi_energies(block: &MomentumBlock) -> Result<Vec<f64>> {
    unitary_quasi_energies(block.matrix.as_ref())
}

/// The commensurate grid `k_n = 2 pi n / L_y`, `n = -L_y/2..=L_y/2`.
pub fn commensurate_grid(ly: usize) -> Vec<f64> {
    let half = (ly / 2) as i64;
    (-half..=half).map(|n| 2.0 * PI * n as f64 / ly as f64).collect()
}

/// Quasi-energies per `k_y`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct QuasiEnergySpectrum {
    pub entries: Vec<(f64, Vec<f64>)>,
}

impl QuasiEnergySpectrum {
    pub fn at(&self, ky: f64) -> Option<&[f64]> {
        self.entries
            .iter()
            .find(|(k, _)| (k - ky).abs() < 1e-12)
            .map(|(_, e)| e.as_slice())
    }

    /// Writes `ky,E`, one row per eigenvalue.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "ky,E")?;
        for (ky, es) in &self.entries {
            for e in es {
                writeln!(w, "{},{}", fmt_f64(*ky), fmt_f64(*e))?;
            }
        }
        Ok(())
    }
}

/// Spectra over a `k_y` grid, computed in parallel and gathered in grid order.
pub fn spectrum_scan(op: &StepOperator2D, grid: &[f64]) -> Result<QuasiEnergySpectrum> {
    let entries = grid
        .par_iter()
        .map(|&ky| {
            let block = momentum_block(op, ky)?;
            Ok((ky, quasi_energies(&block)?))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(QuasiEnergySpectrum { entries })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{LatticeSpec, SpinorField2D};
    use crate::linalg::{circular_multiset_distance, unitarity_residual};
    use crate::operators::AngleProfile;

    fn wall_op(lx: usize, ly: usize, theta_y: f64) -> StepOperator2D {
        StepOperator2D::new(
            LatticeSpec::new(lx, ly).unwrap(),
            AngleProfile::wall(PI / 3.0, -PI / 3.0, 2).with_noise(0.1, 9),
            AngleProfile::constant(theta_y),
        )
    }

    #[test]
    fn free_block_at_zero_momentum_is_shift_spectrum() {
        let op = StepOperator2D::new(
            LatticeSpec::new(9, 3).unwrap(),
            AngleProfile::constant(0.0),
            AngleProfile::constant(0.0),
        );
        let e = quasi_energies(&momentum_block(&op, 0.0).unwrap()).unwrap();
        let mut want = Vec::new();
        for k in commensurate_grid(9) {
            want.extend([k, k, -k, -k]);
        }
        assert!(circular_multiset_distance(&e, &want) < 1e-12);
    }

    #[test]
    fn block_is_unitary() {
        let op = wall_op(15, 3, 0.4);
        for ky in [0.0, 0.3, -2.0] {
            let b = momentum_block(&op, ky).unwrap();
            assert!(unitarity_residual(b.matrix.as_ref()) < 1e-12);
        }
    }

    #[test]
    fn y_dependent_theta_y_is_rejected() {
        let op = StepOperator2D::new(
            LatticeSpec::new(5, 5).unwrap(),
            AngleProfile::constant(0.0),
            AngleProfile::wall(0.1, -0.1, 1),
        );
        assert!(matches!(
            momentum_block(&op, 0.0),
            Err(Error::NotTranslationInvariant(_))
        ));
        let noisy = StepOperator2D::new(
            LatticeSpec::new(5, 5).unwrap(),
            AngleProfile::constant(0.0),
            AngleProfile::constant(0.2).with_noise(0.1, 1),
        );
        assert!(momentum_block(&noisy, 0.0).is_err());
    }

    #[test]
    fn block_matches_matrix_free_step_on_plane_waves() {
        let (lx, ly) = (9, 7);
        let op = wall_op(lx, ly, 0.6);
        let lat = *op.lattice();
        for n in -3..=3 {
            let ky = 2.0 * PI * n as f64 / ly as f64;
            let block = momentum_block(&op, ky).unwrap();
            let phi: Vec<c64> = (0..4 * lx)
                .map(|i| c64::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos()))
                .collect();
            let mut psi = SpinorField2D::zeros(lat);
            for iy in 0..ly {
                let ph = c64::from_polar(1.0, ky * lat.coord_y(iy) as f64);
                for k in 0..4 * lx {
                    psi.amplitudes_mut()[4 * lx * iy + k] = phi[k] * ph;
                }
            }
            let out = op.apply(&psi).unwrap();
            for iy in 0..ly {
                let ph = c64::from_polar(1.0, ky * lat.coord_y(iy) as f64);
                for i in 0..4 * lx {
                    let want: c64 = (0..4 * lx).map(|j| block.matrix[(i, j)] * phi[j]).sum::<c64>() * ph;
                    assert!((out.amplitudes()[4 * lx * iy + i] - want).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn sectors_decouple_without_theta_y() {
        let b = momentum_block(&wall_op(11, 3, 0.0), 0.4).unwrap();
        assert_eq!(b.sector_leakage(), 0.0);
        let b = momentum_block(&wall_op(11, 3, 0.2), 0.4).unwrap();
        assert!(b.sector_leakage() > 0.1);
    }

    #[test]
    fn scan_is_ordered_and_complete() {
        let op = wall_op(11, 5, 0.0);
        let grid = commensurate_grid(5);
        let s = spectrum_scan(&op, &grid).unwrap();
        assert_eq!(s.entries.len(), 5);
        for ((k, e), g) in s.entries.iter().zip(&grid) {
            assert_eq!(k, g);
            assert_eq!(e.len(), 44);
            assert!(e.iter().all(|x| *x > -PI && *x <= PI));
        }
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 1 + 5 * 44);
    }
}
