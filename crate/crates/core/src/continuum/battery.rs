//! The continuum oracles evaluated end to end: each function builds the
//! lattice objects, solves them and returns the measured figure of merit.

use faer::{c64, Mat};

use super::dirac::{build_dirac, central_clusters, DerivativeScheme, MassProfile, OracleParams};
use super::frame::{half_step_frame_1d, half_step_frame_2d};
use super::jackiw_rebbi::jr_edge_state;
use super::oscillator::{analytic_zero_mode_2d, assemble_2d, combine_2d, sigma_x_expectation, ZeroModeKind};
use crate::evolution::refine_unit_eigenstate;
use crate::lattice::LatticeSpec;
use crate::linalg::{hermitian_eigen, unitary_eigen};
use crate::operators::{AngleProfile, StepOperator1D, StepOperator2D};
use crate::{Error, Result};

/// One rung of the oscillator ladder, `E^2 = n omega`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LadderLevel {
    pub n: usize,
    pub expected: f64,
    /// Measured `E > 0` closest to `expected`, or the smallest `|E|` for
    /// `n = 0`.
    pub measured: f64,
    /// States per sign with `|E^2 / omega - n| < 0.5`, as central weight.
    pub count_positive: usize,
    pub count_negative: usize,
}

impl LadderLevel {
    pub fn relative_error(&self) -> f64 {
        if self.n == 0 {
            self.measured.abs()
        } else {
            (self.measured - self.expected).abs() / self.expected
        }
    }
}

fn ladder(levels: &[(f64, usize, f64)], omega: f64, max_n: usize) -> Vec<LadderLevel> {
    (0..=max_n)
        .map(|n| {
            let expected = (n as f64 * omega).sqrt();
            let near: Vec<&(f64, usize, f64)> = levels
                .iter()
                .filter(|(e, _, _)| (e * e / omega - n as f64).abs() < 0.5)
                .collect();
            let count = |pos: bool| {
                near.iter()
                    .filter(|(e, _, _)| if n == 0 { pos } else { (*e > 0.0) == pos })
                    .map(|(_, _, w)| w)
                    .sum::<f64>()
                    .round() as usize
            };
            let measured = near
                .iter()
                .map(|(e, _, _)| *e)
                .filter(|e| n == 0 || *e > 0.0)
                .min_by(|a, b| (a.abs() - expected).abs().total_cmp(&(b.abs() - expected).abs()))
                .unwrap_or(f64::NAN);
            LadderLevel {
                n,
                expected,
                measured,
                count_positive: count(true),
                count_negative: if n == 0 { 0 } else { count(false) },
            }
        })
        .collect()
}

/// Ladder of the Dirac oscillator with `m(x) = beta x` (and `m(y) = beta y`
/// in 2D), counting only states that live within `radius` of the origin.
pub fn oscillator_ladder(
    dim: usize,
    l: usize,
    params: &OracleParams,
    radius: i64,
    max_n: usize,
) -> Result<Vec<LadderLevel>> {
    let slope = MassProfile::Linear { slope: params.beta };
    let my = if dim == 2 { slope.clone() } else { MassProfile::Zero };
    let ly = if dim == 2 { l } else { 1 };
    let h = build_dirac(dim, l, ly, &slope, &my, params.epsilon, DerivativeScheme::Spectral)?;
    let levels: Vec<(f64, usize, f64)> = central_clusters(&h, radius, 1e-6)?
        .into_iter()
        .map(|c| (c.energy, c.size, c.central_weight))
        .collect();
    Ok(ladder(&levels, params.omega(), max_n))
}

fn subspace_overlap(v: &[c64], basis: &Mat<c64>, cols: &[usize]) -> f64 {
    let norm: f64 = v.iter().map(|a| a.norm_sqr()).sum();
    let w: f64 = cols
        .iter()
        .map(|&j| {
            v.iter()
                .enumerate()
                .map(|(i, a)| basis[(i, j)].conj() * a)
                .sum::<c64>()
                .norm_sqr()
        })
        .sum();
    (w / norm).sqrt()
}

/// `(1, 1) (x) (1, 1)` bound state at the corner `(l_wall + 1/2, l_wall + 1/2)`
/// built from two 1D bound states, projected on the four lowest-`|E|`
/// eigenvectors of `H_D^(2)` with twin walls `+m0` inside, `-m0` outside.
pub fn corner_product_overlap(l: usize, l_wall: i64, m0: f64, epsilon: f64) -> Result<f64> {
    let wall = MassProfile::Wall {
        inner: m0,
        outer: -m0,
        l_wall,
    };
    let h = build_dirac(2, l, l, &wall, &wall, epsilon, DerivativeScheme::Spectral)?;
    let (vals, vecs) = hermitian_eigen(h.matrix.as_ref())?;
    let mut idx: Vec<usize> = (0..vals.len()).collect();
    idx.sort_by(|&a, &b| vals[a].abs().total_cmp(&vals[b].abs()));
    let f = jr_edge_state(m0, epsilon, l, l_wall as f64 + 0.5)?;
    let mut v = Vec::with_capacity(4 * l * l);
    for iy in 0..l {
        for ix in 0..l {
            for t in 0..2 {
                for s in 0..2 {
                    v.push(f[2 * ix + s] * f[2 * iy + t]);
                }
            }
        }
    }
    // Storage order is (site, s + 2t), matching the loop above.
    Ok(subspace_overlap(&v, &vecs, &idx[..4]))
}

/// Overlap of the bound state at `x = l_wall + 1/2` with the zero
/// quasi-energy eigenspace of the 1D walk with `theta` inside and `-theta`
/// outside the walls. With `frame`, the walk states are first taken to the
/// half-step frame.
pub fn jr_walk_overlap(l: usize, l_wall: i64, theta: f64, frame: bool) -> Result<f64> {
    let w = StepOperator1D::new(l, AngleProfile::wall(theta, -theta, l_wall))?;
    let eig = unitary_eigen(w.to_dense().as_ref())?;
    let e = eig.quasi_energies();
    let zeros: Vec<usize> = (0..e.len()).filter(|&j| e[j].abs() < 1e-3).collect();
    if zeros.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "no zero quasi-energy states for theta {theta} on L = {l}"
        )));
    }
    let n = 2 * l;
    let mut basis = Mat::<c64>::zeros(n, zeros.len());
    for (k, &j) in zeros.iter().enumerate() {
        let col: Vec<c64> = (0..n).map(|i| eig.vectors[(i, j)]).collect();
        let col = if frame { half_step_frame_1d(&col)? } else { col };
        for (i, a) in col.into_iter().enumerate() {
            basis[(i, k)] = a;
        }
    }
    let jr = jr_edge_state(theta, 1.0, l, l_wall as f64 + 0.5)?;
    let cols: Vec<usize> = (0..zeros.len()).collect();
    Ok(subspace_overlap(&jr, &basis, &cols))
}

/// `|<psi_gauss, psi_U>|` for the unit-eigenvalue state refined from the
/// analytic Gaussian under a walk with the profile on both axes.
pub fn gaussian_refined_overlap(
    lattice: LatticeSpec,
    profile: AngleProfile,
    params: &OracleParams,
    iterations: usize,
    frame: bool,
) -> Result<(f64, f64)> {
    let op = StepOperator2D::new(lattice, profile, profile);
    let g = analytic_zero_mode_2d(ZeroModeKind::Gaussian, lattice, params)?;
    let (r, history) = refine_unit_eigenstate(&op, &g, iterations)?;
    let r = if frame { half_step_frame_2d(&r)? } else { r };
    Ok((
        g.inner(&r).norm() / r.norm(),
        *history.last().expect("history is never empty"),
    ))
}

/// Largest `||H^(2) psi - E psi||` over the states `(gamma + delta sigma^x)
/// |E_x>|E_y>` built from eigenvector pairs `(i, j)` of the two 1D
/// Hamiltonians, for both signs of `E`.
pub fn combined_state_residual(
    l: usize,
    mass_x: &MassProfile,
    mass_y: &MassProfile,
    epsilon: f64,
    pairs: &[(usize, usize)],
) -> Result<f64> {
    let scheme = DerivativeScheme::Spectral;
    let zero = MassProfile::Zero;
    let hx = build_dirac(1, l, 1, mass_x, &zero, epsilon, scheme)?.matrix;
    let hy = build_dirac(1, l, 1, mass_y, &zero, epsilon, scheme)?.matrix;
    let h2 = build_dirac(2, l, l, mass_x, mass_y, epsilon, scheme)?.matrix;
    let (ex, vx) = hermitian_eigen(hx.as_ref())?;
    let (ey, vy) = hermitian_eigen(hy.as_ref())?;
    let lat = LatticeSpec::square(l)?;
    let mut worst = 0.0f64;
    for &(i, j) in pairs {
        if i >= ex.len() || j >= ey.len() {
            return Err(Error::InvalidArgument(format!(
                "eigenvector pair ({i}, {j}) out of range"
            )));
        }
        let xs: Vec<c64> = vx.col(i).iter().copied().collect();
        let ys: Vec<c64> = vy.col(j).iter().copied().collect();
        let c = combine_2d(ex[i], ey[j], sigma_x_expectation(&xs))?;
        for c in [c, c.partner()?] {
            let f = assemble_2d(lat, &xs, &ys, c.gamma(), c.delta())?;
            let v = f.amplitudes();
            let r = (0..v.len())
                .map(|a| {
                    let hv: c64 = (0..v.len()).map(|b| h2[(a, b)] * v[b]).sum();
                    (hv - v[a] * c.energy).norm_sqr()
                })
                .sum::<f64>()
                .sqrt();
            worst = worst.max(r);
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ladder_classifies_levels() {
        let om = 0.25;
        let lv = [(0.0, 1, 1.0), (0.5, 2, 2.0), (-0.5, 2, 2.0), (0.49, 1, 0.2)];
        let l = ladder(&lv, om, 1);
        assert_eq!(
            (l[0].count_positive, l[1].count_positive, l[1].count_negative),
            (1, 2, 2)
        );
        assert_eq!(l[1].measured, 0.5);
    }
}
