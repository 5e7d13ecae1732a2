use faer::{c64, Mat};

use crate::lattice::SpinorField2D;
use crate::linalg::{internal, ZERO};
use crate::{Axis, Error, Result};

/// Real kernel of the spectral translation `f(x) -> f(x + a)` on a periodic
/// line of odd length `l`, i.e. `exp(-i a p)` with `p = i d/dx`.
pub fn translation_kernel(l: usize, a: f64) -> Result<Mat<f64>> {
    if l.is_multiple_of(2) {
        return Err(Error::InvalidLattice(format!(
            "fractional shifts need an odd length, got {l}"
        )));
    }
    let half = l / 2;
    let w = 2.0 * std::f64::consts::PI / l as f64;
    Ok(Mat::from_fn(l, l, |i, j| {
        let d = i as f64 - j as f64 + a;
        (1.0 + 2.0 * (1..=half).map(|n| (w * n as f64 * d).cos()).sum::<f64>()) / l as f64
    }))
}

/// `exp(-i a sigma^z p)` on a 1D spinor in `[u, v]` layout: `u` moves by
/// `+a`, `v` by `-a` in the argument. `a = 1` is the walk's shift.
pub fn fractional_shift_1d(psi: &[c64], a: f64) -> Result<Vec<c64>> {
    if !psi.len().is_multiple_of(2) {
        return Err(Error::InvalidArgument("spinor length must be even".into()));
    }
    let l = psi.len() / 2;
    let (tp, tm) = (translation_kernel(l, a)?, translation_kernel(l, -a)?);
    Ok((0..2 * l)
        .map(|r| {
            let (i, s) = (r / 2, r % 2);
            let t = if s == 0 { &tp } else { &tm };
            (0..l).map(|j| psi[2 * j + s] * t[(i, j)]).sum()
        })
        .collect())
}

/// `exp(-i a A p)` along one axis of a 2D field, with `A = sigma^z` for `x`
/// and `A = sigma^x tau^z` for `y`, the generators of the walk's shifts.
pub fn fractional_shift_2d(state: &SpinorField2D, axis: Axis, a: f64) -> Result<SpinorField2D> {
    let lat = *state.lattice();
    let (lx, ly) = (lat.lx(), lat.ly());
    let (l, gen) = match axis {
        Axis::X => (lx, internal(3, 0)),
        Axis::Y => (ly, internal(1, 3)),
    };
    let (tp, tm) = (translation_kernel(l, a)?, translation_kernel(l, -a)?);
    // exp(-i a A p) = P+ T(a) + P- T(-a) with P± = (1 ± A)/2.
    let proj = |sign: f64| {
        Mat::from_fn(4, 4, |i, j| {
            let id = if i == j { 1.0 } else { 0.0 };
            (c64::new(id, 0.0) + gen[(i, j)] * sign) * 0.5
        })
    };
    let (pp, pm) = (proj(1.0), proj(-1.0));
    let src = state.amplitudes();
    let mut out = vec![ZERO; src.len()];
    let mut line = vec![[ZERO; 4]; l];
    for other in 0..(if axis == Axis::X { ly } else { lx }) {
        let site = |i: usize| match axis {
            Axis::X => other * lx + i,
            Axis::Y => i * lx + other,
        };
        for i in 0..l {
            let mut acc_p = [ZERO; 4];
            let mut acc_m = [ZERO; 4];
            for j in 0..l {
                let (wp, wm) = (tp[(i, j)], tm[(i, j)]);
                let base = 4 * site(j);
                for c in 0..4 {
                    acc_p[c] += src[base + c] * wp;
                    acc_m[c] += src[base + c] * wm;
                }
            }
            for c in 0..4 {
                line[i][c] = (0..4).map(|d| pp[(c, d)] * acc_p[d] + pm[(c, d)] * acc_m[d]).sum();
            }
        }
        for (i, v) in line.iter().enumerate() {
            out[4 * site(i)..4 * site(i) + 4].copy_from_slice(v);
        }
    }
    SpinorField2D::from_vec(lat, out)
}

/// Eigenvector of `S^{1/2} C S^{1/2}` from one of `U = S C`: undoes half a
/// shift, which puts the walk state on the same footing as the Dirac one.
pub fn half_step_frame_1d(psi: &[c64]) -> Result<Vec<c64>> {
    fractional_shift_1d(psi, -0.5)
}

/// Undoes half of each shift of the 2D walk, `x` first.
pub fn half_step_frame_2d(state: &SpinorField2D) -> Result<SpinorField2D> {
    fractional_shift_2d(&fractional_shift_2d(state, Axis::X, -0.5)?, Axis::Y, -0.5)
}
