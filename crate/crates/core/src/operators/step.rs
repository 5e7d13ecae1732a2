use faer::{c64, Mat};
use rayon::prelude::*;

use super::AngleProfile;
use crate::lattice::{LatticeSpec, SpinorField2D};
use crate::linalg::ZERO;
use crate::{Error, Result};

/// Lattice axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
}

/// Rows above this size are processed in parallel.
const PAR_MIN_ROW: usize = 64;

/// The 4x4 coin in the `LD, RD, LU, RU` basis.
///
/// `X`: `exp(-i theta sigma^y (x) tau^0)`, a rotation on `(LD, RD)` and on
/// `(LU, RU)`. `Y`: `exp(-i theta sigma^x (x) tau^y)`.
pub fn coin_matrix(axis: Axis, theta: f64) -> [[f64; 4]; 4] {
    let (s, c) = theta.sin_cos();
    match axis {
        Axis::X => [[c, -s, 0.0, 0.0], [s, c, 0.0, 0.0], [0.0, 0.0, c, -s], [0.0, 0.0, s, c]],
        Axis::Y => [[c, 0.0, 0.0, -s], [0.0, c, -s, 0.0], [0.0, s, c, 0.0], [s, 0.0, 0.0, c]],
    }
}

#[inline]
fn coin_x(a: &[c64], c: f64, s: f64) -> [c64; 4] {
    [
        a[0] * c - a[1] * s,
        a[0] * s + a[1] * c,
        a[2] * c - a[3] * s,
        a[2] * s + a[3] * c,
    ]
}

#[inline]
fn coin_y(a: [c64; 4], c: f64, s: f64) -> [c64; 4] {
    [
        a[0] * c - a[3] * s,
        a[1] * c - a[2] * s,
        a[2] * c + a[1] * s,
        a[3] * c + a[0] * s,
    ]
}

/// `S_y` at one row from the rows above (`y + 1`) and below (`y - 1`).
#[inline]
fn shift_y(up: &[c64], dn: &[c64], out: &mut [c64]) {
    let ps = (up[0] + up[1]) * 0.5;
    let md = (dn[0] - dn[1]) * 0.5;
    let mu = (up[2] - up[3]) * 0.5;
    let pd = (dn[2] + dn[3]) * 0.5;
    out[0] = ps + md;
    out[1] = ps - md;
    out[2] = mu + pd;
    out[3] = pd - mu;
}

/// `S_y^dagger` at one row.
#[inline]
fn shift_y_adjoint(up: &[c64], dn: &[c64], out: &mut [c64]) {
    let mu = (up[0] - up[1]) * 0.5;
    let pd = (dn[0] + dn[1]) * 0.5;
    let ps = (up[2] + up[3]) * 0.5;
    let md = (dn[2] - dn[3]) * 0.5;
    out[0] = mu + pd;
    out[1] = pd - mu;
    out[2] = ps + md;
    out[3] = ps - md;
}

fn for_rows<F>(out: &mut [c64], row_len: usize, f: F)
where
    F: Fn(usize, &mut [c64]) + Sync + Send,
{
    if row_len >= 4 * PAR_MIN_ROW {
        out.par_chunks_mut(row_len).enumerate().for_each(|(iy, row)| f(iy, row));
    } else {
        out.chunks_mut(row_len).enumerate().for_each(|(iy, row)| f(iy, row));
    }
}

/// Applies one shift operator to a state.
///
/// `X`: L components move to `x - 1`, R components to `x + 1`.
/// `Y`: the `P`/`Q` convolution with `P f(y) = (f(y+1) + f(y-1))/2` and
/// `Q f(y) = (f(y+1) - f(y-1))/2`.
pub fn apply_shift(axis: Axis, state: &SpinorField2D) -> SpinorField2D {
    let lat = *state.lattice();
    let (lx, ly) = (lat.lx(), lat.ly());
    let src = state.amplitudes();
    let mut out = vec![ZERO; src.len()];
    match axis {
        Axis::X => {
            for_rows(&mut out, 4 * lx, |iy, row| {
                for ix in 0..lx {
                    let right = 4 * lat.site((ix + 1) % lx, iy);
                    let left = 4 * lat.site((ix + lx - 1) % lx, iy);
                    row[4 * ix] = src[right];
                    row[4 * ix + 1] = src[left + 1];
                    row[4 * ix + 2] = src[right + 2];
                    row[4 * ix + 3] = src[left + 3];
                }
            });
        }
        Axis::Y => {
            for_rows(&mut out, 4 * lx, |iy, row| {
                let up = 4 * lx * ((iy + 1) % ly);
                let dn = 4 * lx * ((iy + ly - 1) % ly);
                for ix in 0..lx {
                    let o = 4 * ix;
                    shift_y(&src[up + o..up + o + 4], &src[dn + o..dn + o + 4], &mut row[o..o + 4]);
                }
            });
        }
    }
    SpinorField2D::from_vec(lat, out).expect("shift preserves the lattice")
}

/// One step `U = S_y C_y S_x C_x` of the two-dimensional walk.
#[derive(Clone, Debug)]
pub struct StepOperator2D {
    lattice: LatticeSpec,
    profile_x: AngleProfile,
    profile_y: AngleProfile,
    theta_x: Vec<f64>,
    theta_y: Vec<f64>,
    cs_x: Vec<(f64, f64)>,
    cs_y: Vec<(f64, f64)>,
}

impl StepOperator2D {
    pub fn new(lattice: LatticeSpec, profile_x: AngleProfile, profile_y: AngleProfile) -> Self {
        let theta_x = profile_x.sample(lattice.half_x());
        let theta_y = profile_y.sample(lattice.half_y());
        let cs = |t: &Vec<f64>| t.iter().map(|a| (a.cos(), a.sin())).collect();
        Self {
            cs_x: cs(&theta_x),
            cs_y: cs(&theta_y),
            lattice,
            profile_x,
            profile_y,
            theta_x,
            theta_y,
        }
    }

    pub fn lattice(&self) -> &LatticeSpec {
        &self.lattice
    }

    pub fn profile_x(&self) -> &AngleProfile {
        &self.profile_x
    }

    pub fn profile_y(&self) -> &AngleProfile {
        &self.profile_y
    }

    /// Sampled `theta_x`, indexed by array index.
    pub fn theta_x(&self) -> &[f64] {
        &self.theta_x
    }

    pub fn theta_y(&self) -> &[f64] {
        &self.theta_y
    }

    fn check(&self, state: &SpinorField2D) -> Result<()> {
        if *state.lattice() != self.lattice {
            return Err(Error::LatticeMismatch {
                expected: self.lattice.describe(),
                found: state.lattice().describe(),
            });
        }
        Ok(())
    }

    /// `U psi`.
    pub fn apply(&self, state: &SpinorField2D) -> Result<SpinorField2D> {
        self.check(state)?;
        let mut out = vec![ZERO; state.amplitudes().len()];
        let mut tmp = vec![ZERO; out.len()];
        self.apply_into(state.amplitudes(), &mut out, &mut tmp);
        SpinorField2D::from_vec(self.lattice, out)
    }

    /// `U^dagger psi`.
    pub fn apply_adjoint(&self, state: &SpinorField2D) -> Result<SpinorField2D> {
        self.check(state)?;
        let mut out = vec![ZERO; state.amplitudes().len()];
        let mut tmp = vec![ZERO; out.len()];
        self.apply_adjoint_into(state.amplitudes(), &mut out, &mut tmp);
        SpinorField2D::from_vec(self.lattice, out)
    }

    /// `out = U psi` on raw amplitude slices, using `tmp` as scratch.
    pub fn apply_into(&self, psi: &[c64], out: &mut [c64], tmp: &mut [c64]) {
        let lat = self.lattice;
        let (lx, ly) = (lat.lx(), lat.ly());
        assert_eq!(psi.len(), lat.dim());
        for_rows(tmp, 4 * lx, |iy, row| {
            let base = 4 * lx * iy;
            let (cy, sy) = self.cs_y[iy];
            for ix in 0..lx {
                let r = (ix + 1) % lx;
                let l = (ix + lx - 1) % lx;
                let (cr, sr) = self.cs_x[r];
                let (cl, sl) = self.cs_x[l];
                let from_r = coin_x(&psi[base + 4 * r..base + 4 * r + 4], cr, sr);
                let from_l = coin_x(&psi[base + 4 * l..base + 4 * l + 4], cl, sl);
                let shifted = [from_r[0], from_l[1], from_r[2], from_l[3]];
                row[4 * ix..4 * ix + 4].copy_from_slice(&coin_y(shifted, cy, sy));
            }
        });
        let tmp = &*tmp;
        for_rows(out, 4 * lx, |iy, row| {
            let up = 4 * lx * ((iy + 1) % ly);
            let dn = 4 * lx * ((iy + ly - 1) % ly);
            for o in (0..4 * lx).step_by(4) {
                shift_y(&tmp[up + o..up + o + 4], &tmp[dn + o..dn + o + 4], &mut row[o..o + 4]);
            }
        });
    }

    /// `out = U^dagger psi` on raw amplitude slices.
    pub fn apply_adjoint_into(&self, psi: &[c64], out: &mut [c64], tmp: &mut [c64]) {
        let lat = self.lattice;
        let (lx, ly) = (lat.lx(), lat.ly());
        assert_eq!(psi.len(), lat.dim());
        for_rows(tmp, 4 * lx, |iy, row| {
            let up = 4 * lx * ((iy + 1) % ly);
            let dn = 4 * lx * ((iy + ly - 1) % ly);
            let (cy, sy) = self.cs_y[iy];
            for o in (0..4 * lx).step_by(4) {
                let mut s = [ZERO; 4];
                shift_y_adjoint(&psi[up + o..up + o + 4], &psi[dn + o..dn + o + 4], &mut s);
                row[o..o + 4].copy_from_slice(&coin_y(s, cy, -sy));
            }
        });
        let tmp = &*tmp;
        for_rows(out, 4 * lx, |iy, row| {
            let base = 4 * lx * iy;
            for ix in 0..lx {
                let r = base + 4 * ((ix + 1) % lx);
                let l = base + 4 * ((ix + lx - 1) % lx);
                let (c, s) = self.cs_x[ix];
                let shifted = [tmp[l], tmp[r + 1], tmp[l + 2], tmp[r + 3]];
                row[4 * ix..4 * ix + 4].copy_from_slice(&coin_x(&shifted, c, -s));
            }
        });
    }

    /// Explicit matrix of `U`, column by column. Intended for small lattices.
    pub fn to_dense(&self) -> Mat<c64> {
        let n = self.lattice.dim();
        let mut m = Mat::<c64>::zeros(n, n);
        let mut e = vec![ZERO; n];
        let mut out = vec![ZERO; n];
        let mut tmp = vec![ZERO; n];
        for j in 0..n {
            e[j] = c64::new(1.0, 0.0);
            self.apply_into(&e, &mut out, &mut tmp);
            e[j] = ZERO;
            for (i, v) in out.iter().enumerate() {
                m[(i, j)] = *v;
            }
        }
        m
    }
}

/// One step `U = S C` of the one-dimensional walk. States are stored as
/// `[L(x), R(x)]` pairs in ascending `x`.
#[derive(Clone, Debug)]
pub struct StepOperator1D {
    lx: usize,
    profile: AngleProfile,
    cs: Vec<(f64, f64)>,
}

impl StepOperator1D {
    pub fn new(lx: usize, profile: AngleProfile) -> Result<Self> {
        LatticeSpec::new(lx, 3)?;
        let cs = profile
            .sample((lx / 2) as i64)
            .iter()
            .map(|a| (a.cos(), a.sin()))
            .collect();
        Ok(Self { lx, profile, cs })
    }

    pub fn len(&self) -> usize {
        self.lx
    }

    pub fn is_empty(&self) -> bool {
        self.lx == 0
    }

    pub fn profile(&self) -> &AngleProfile {
        &self.profile
    }

    pub fn dim(&self) -> usize {
        2 * self.lx
    }

    /// `U psi`.
    pub fn apply(&self, psi: &[c64]) -> Result<Vec<c64>> {
        if psi.len() != self.dim() {
            return Err(Error::LatticeMismatch {
                expected: format!("{} sites", self.lx),
                found: format!("{} amplitudes", psi.len()),
            });
        }
        let n = self.lx;
        let mut out = vec![ZERO; 2 * n];
        for ix in 0..n {
            let r = (ix + 1) % n;
            let l = (ix + n - 1) % n;
            let (cr, sr) = self.cs[r];
            let (cl, sl) = self.cs[l];
            out[2 * ix] = psi[2 * r] * cr - psi[2 * r + 1] * sr;
            out[2 * ix + 1] = psi[2 * l] * sl + psi[2 * l + 1] * cl;
        }
        Ok(out)
    }

    /// Explicit matrix of `U`.
    pub fn to_dense(&self) -> Mat<c64> {
        let n = self.dim();
        let mut m = Mat::<c64>::zeros(n, n);
        let mut e = vec![ZERO; n];
        for j in 0..n {
            e[j] = c64::new(1.0, 0.0);
            let col = self.apply(&e).expect("dimension matches");
            e[j] = ZERO;
            for (i, v) in col.into_iter().enumerate() {
                m[(i, j)] = v;
            }
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::lattice::Component;
    use crate::linalg::{max_abs, unitarity_residual};

    fn lat(l: usize) -> LatticeSpec {
        LatticeSpec::square(l).unwrap()
    }

    fn matmul4(a: &[[f64; 4]; 4], b: &[[f64; 4]; 4]) -> [[f64; 4]; 4] {
        let mut c = [[0.0; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                c[i][j] = (0..4).map(|k| a[i][k] * b[k][j]).sum();
            }
        }
        c
    }

    fn pseudo_random_state(l: LatticeSpec, seed: u64) -> SpinorField2D {
        let mut s = seed;
        let mut rnd = || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (s >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let amps = (0..l.dim()).map(|_| c64::new(rnd(), rnd())).collect();
        let mut st = SpinorField2D::from_vec(l, amps).unwrap();
        st.normalize();
        st
    }

    #[test]
    fn coins_at_zero_are_identity() {
        for axis in [Axis::X, Axis::Y] {
            let m = coin_matrix(axis, 0.0);
            for i in 0..4 {
                for j in 0..4 {
                    assert_eq!(m[i][j], if i == j { 1.0 } else { 0.0 });
                }
            }
        }
    }

    #[test]
    fn coin_y_layout() {
        let m = coin_matrix(Axis::Y, PI / 3.0);
        let (c, s) = (0.5, 3f64.sqrt() / 2.0);
        let want = [[c, 0.0, 0.0, -s], [0.0, c, -s, 0.0], [0.0, s, c, 0.0], [s, 0.0, 0.0, c]];
        for i in 0..4 {
            for j in 0..4 {
                assert!((m[i][j] - want[i][j]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn coins_are_orthogonal_and_invertible() {
        for axis in [Axis::X, Axis::Y] {
            for &t in &[0.3, -1.1, PI / 3.0, 2.5] {
                let m = coin_matrix(axis, t);
                let inv = coin_matrix(axis, -t);
                let p = matmul4(&m, &inv);
                let mut mt = m;
                for i in 0..4 {
                    for j in 0..4 {
                        mt[i][j] = m[j][i];
                    }
                }
                let q = matmul4(&mt, &m);
                for i in 0..4 {
                    for j in 0..4 {
                        let id = if i == j { 1.0 } else { 0.0 };
                        assert!((p[i][j] - id).abs() < 1e-15);
                        assert!((q[i][j] - id).abs() < 1e-14);
                    }
                }
            }
        }
    }

    #[test]
    fn coin_kernels_match_matrices() {
        let v = [
            c64::new(0.1, 0.2),
            c64::new(-0.3, 0.5),
            c64::new(0.7, -0.1),
            c64::new(0.4, 0.9),
        ];
        let t: f64 = 0.77;
        let (s, c) = t.sin_cos();
        for (axis, got) in [(Axis::X, coin_x(&v, c, s)), (Axis::Y, coin_y(v, c, s))] {
            let m = coin_matrix(axis, t);
            for i in 0..4 {
                let want: c64 = (0..4).map(|j| v[j] * m[i][j]).sum();
                assert!((got[i] - want).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn shift_x_moves_right_movers_right() {
        let s = SpinorField2D::basis(lat(5), 0, 0, Component::RD);
        let t = apply_shift(Axis::X, &s);
        assert_eq!(t.get(1, 0, Component::RD), c64::new(1.0, 0.0));
        let s = SpinorField2D::basis(lat(5), 0, 0, Component::LU);
        let t = apply_shift(Axis::X, &s);
        assert_eq!(t.get(-1, 0, Component::LU), c64::new(1.0, 0.0));
    }

    #[test]
    fn shift_y_of_ld() {
        let s = SpinorField2D::basis(lat(5), 0, 0, Component::LD);
        let t = apply_shift(Axis::Y, &s);
        let h = c64::new(0.5, 0.0);
        assert_eq!(t.get(0, -1, Component::LD), h);
        assert_eq!(t.get(0, 1, Component::LD), h);
        assert_eq!(t.get(0, -1, Component::RD), h);
        assert_eq!(t.get(0, 1, Component::RD), -h);
        assert!((t.norm_sqr() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn shift_y_moves_sigma_x_eigenvector_ballistically() {
        let l = lat(5);
        let mut s = SpinorField2D::zeros(l);
        let h = c64::new(0.5f64.sqrt(), 0.0);
        s.set(0, 0, Component::LD, h);
        s.set(0, 0, Component::RD, h);
        let t = apply_shift(Axis::Y, &s);
        let mut want = SpinorField2D::zeros(l);
        want.set(0, -1, Component::LD, h);
        want.set(0, -1, Component::RD, h);
        let diff: f64 = t
            .amplitudes()
            .iter()
            .zip(want.amplitudes())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(diff < 1e-15);
    }

    #[test]
    fn free_step_from_ru_spreads_over_four_sites() {
        let op = StepOperator2D::new(lat(7), AngleProfile::constant(0.0), AngleProfile::constant(0.0));
        let s = SpinorField2D::basis(lat(7), 0, 0, Component::RU);
        let t = op.apply(&s).unwrap();
        let p = t.probability_map();
        assert_eq!(p.iter().filter(|&&w| w > 1e-15).count(), 2);
        assert!((t.norm_sqr() - 1.0).abs() < 1e-15);
        // RU moves to x+1 and then splits between y+1 and y-1 over two
        // components each, giving four amplitudes.
        let nz = t.amplitudes().iter().filter(|a| a.norm() > 1e-15).count();
        assert_eq!(nz, 4);
    }

    #[test]
    fn step_matches_composition_of_factors() {
        let l = lat(5);
        let op = StepOperator2D::new(
            l,
            AngleProfile::wall(0.4, -0.9, 1).with_noise(0.2, 3),
            AngleProfile::linear(0.3, 1.0, 0.5),
        );
        let psi = pseudo_random_state(l, 11);
        // C_x site by site, then S_x, C_y, S_y.
        let mut a = psi.clone();
        for iy in 0..5 {
            for ix in 0..5 {
                let (c, s) = (op.theta_x()[ix].cos(), op.theta_x()[ix].sin());
                let i = l.amp_index(ix, iy, 0);
                let v = coin_x(&a.amplitudes()[i..i + 4], c, s);
                a.amplitudes_mut()[i..i + 4].copy_from_slice(&v);
            }
        }
        let mut a = apply_shift(Axis::X, &a);
        for iy in 0..5 {
            for ix in 0..5 {
                let (c, s) = (op.theta_y()[iy].cos(), op.theta_y()[iy].sin());
                let i = l.amp_index(ix, iy, 0);
                let mut w = [ZERO; 4];
                w.copy_from_slice(&a.amplitudes()[i..i + 4]);
                a.amplitudes_mut()[i..i + 4].copy_from_slice(&coin_y(w, c, s));
            }
        }
        let a = apply_shift(Axis::Y, &a);
        let b = op.apply(&psi).unwrap();
        let d = a
            .amplitudes()
            .iter()
            .zip(b.amplitudes())
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max);
        assert!(d < 1e-15);
    }

    #[test]
    fn dense_step_is_unitary_and_adjoint_matches() {
        let l = lat(5);
        let op = StepOperator2D::new(
            l,
            AngleProfile::wall(PI / 3.0, -PI / 3.0, 1),
            AngleProfile::constant(0.7),
        );
        let u = op.to_dense();
        assert!(unitarity_residual(u.as_ref()) < 1e-13);
        let psi = pseudo_random_state(l, 5);
        let back = op.apply_adjoint(&op.apply(&psi).unwrap()).unwrap();
        let d = back
            .amplitudes()
            .iter()
            .zip(psi.amplitudes())
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max);
        assert!(d < 1e-15);
        // Explicit adjoint matrix versus matrix-free adjoint.
        let n = l.dim();
        let mut ud = Mat::<c64>::zeros(n, n);
        for j in 0..n {
            let mut e = SpinorField2D::zeros(l);
            e.amplitudes_mut()[j] = c64::new(1.0, 0.0);
            let col = op.apply_adjoint(&e).unwrap();
            for i in 0..n {
                ud[(i, j)] = col.amplitudes()[i];
            }
        }
        let diff = &ud - u.adjoint();
        assert!(max_abs(diff.as_ref()) < 1e-15);
    }

    #[test]
    fn lattice_mismatch_is_rejected() {
        let op = StepOperator2D::new(lat(5), AngleProfile::constant(0.0), AngleProfile::constant(0.0));
        let s = SpinorField2D::zeros(lat(7));
        assert!(matches!(op.apply(&s), Err(Error::LatticeMismatch { .. })));
    }

    #[test]
    fn one_d_free_walk_moves_right() {
        let op = StepOperator1D::new(5, AngleProfile::constant(0.0)).unwrap();
        let mut psi = vec![ZERO; 10];
        psi[2 * 2 + 1] = c64::new(1.0, 0.0);
        let out = op.apply(&psi).unwrap();
        assert_eq!(out[2 * 3 + 1], c64::new(1.0, 0.0));
    }

    #[test]
    fn one_d_half_pi_coin_flips_left_to_right() {
        let op = StepOperator1D::new(5, AngleProfile::constant(PI / 2.0)).unwrap();
        let mut psi = vec![ZERO; 10];
        psi[2 * 2] = c64::new(1.0, 0.0);
        let out = op.apply(&psi).unwrap();
        assert!((out[2 * 3 + 1] - c64::new(1.0, 0.0)).norm() < 1e-15);
        assert!((out.iter().map(|a| a.norm_sqr()).sum::<f64>() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn one_d_hadamard_walk_matches_path_sum() {
        // Sum over all 2^3 coin-outcome paths of the T=3 walk from (0, L).
        let t: f64 = PI / 4.0;
        let (s, c) = t.sin_cos();
        // amp[from][to] of the coin: new_L = c L - s R, new_R = s L + c R.
        let coin = [[c, s], [-s, c]];
        let mut paths = std::collections::HashMap::<(i64, usize), f64>::new();
        for mask in 0..8u32 {
            let (mut x, mut d, mut a) = (0i64, 0usize, 1.0);
            for step in 0..3 {
                let nd = ((mask >> step) & 1) as usize;
                a *= coin[d][nd];
                x += if nd == 0 { -1 } else { 1 };
                d = nd;
            }
            *paths.entry((x, d)).or_default() += a;
        }
        let op = StepOperator1D::new(9, AngleProfile::constant(t)).unwrap();
        let mut psi = vec![ZERO; 18];
        psi[2 * 4] = c64::new(1.0, 0.0);
        for _ in 0..3 {
            psi = op.apply(&psi).unwrap();
        }
        for ix in 0..9 {
            let x = ix as i64 - 4;
            for d in 0..2 {
                let want = paths.get(&(x, d)).copied().unwrap_or(0.0);
                assert!((psi[2 * ix + d].re - want).abs() < 1e-15, "x={x} d={d}");
                assert!(psi[2 * ix + d].im.abs() < 1e-15);
            }
        }
    }
}
