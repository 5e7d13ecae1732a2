//! Edge branches of momentum-resolved spectra: states inside the openings
//! of the projected bulk bands.

use faer::c64;

use super::bands::{project_bands, ProjectedBands};
use super::momentum::{momentum_block, MomentumBlock, QuasiEnergySpectrum, TauSector};
use crate::linalg::unitary_quasi_energies;
use crate::operators::{AngleProfile, ProfileShape, StepOperator2D};
use crate::{Error, Result};

/// `k_x` samples used to project the bulk bands.
pub const PROJECTION_SAMPLES: usize = 2000;

/// Angles of the homogeneous regions of a profile, noise ignored.
pub fn bulk_values(profile: &AngleProfile) -> Vec<f64> {
    match profile.shape {
        ProfileShape::Constant { theta } => vec![theta],
        ProfileShape::DomainWall { theta1, theta2, .. } => vec![theta1, theta2],
        ProfileShape::LinearSaturated { theta_sat, .. } => vec![theta_sat, -theta_sat],
    }
}

/// `(theta_x, theta_y)` of every bulk region of a walk with uniform `theta_y`.
pub fn bulk_angle_pairs(op: &StepOperator2D) -> Vec<(f64, f64)> {
    let ty = op.theta_y()[0];
    bulk_values(op.profile_x()).into_iter().map(|tx| (tx, ty)).collect()
}

/// In-gap quasi-energies per `k_y`.
#[derive(Clone, Debug, PartialEq)]
pub struct EdgeBranch {
    pub entries: Vec<(f64, Vec<f64>)>,
}

impl EdgeBranch {
    /// Smallest `|E|` among the in-gap states at each `k_y`, if any.
    pub fn min_abs(&self) -> Vec<(f64, Option<f64>)> {
        self.entries
            .iter()
            .map(|(ky, e)| (*ky, e.iter().map(|x| x.abs()).min_by(f64::total_cmp)))
            .collect()
    }

    pub fn count(&self) -> usize {
        self.entries.iter().map(|(_, e)| e.len()).sum()
    }
}

/// Keeps the states of a spectrum that lie at least `margin` away from the
/// projected bulk bands of the given regions.
pub fn in_gap_states(spectrum: &QuasiEnergySpectrum, angles: &[(f64, f64)], margin: f64) -> Result<EdgeBranch> {
    let entries = spectrum
        .entries
        .iter()
        .map(|(ky, es)| {
            let proj = project_bands(angles, *ky, PROJECTION_SAMPLES)?;
            Ok((*ky, es.iter().copied().filter(|&e| proj.in_gap(e, margin)).collect()))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EdgeBranch { entries })
}

/// Least-squares fit `|E| = v |k_y|` through the origin.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinearFit {
    pub velocity: f64,
    /// RMS of the residuals divided by the RMS of `|E|`.
    pub relative_residual: f64,
    pub points: usize,
}

pub fn fit_linear_branch(points: &[(f64, f64)]) -> Result<LinearFit> {
    let sxx: f64 = points.iter().map(|(k, _)| k * k).sum();
    if points.is_empty() || sxx == 0.0 {
        return Err(Error::InvalidArgument("linear fit needs nonzero momenta".into()));
    }
    let sxy: f64 = points.iter().map(|(k, e)| k.abs() * e.abs()).sum();
    let v = sxy / sxx;
    let res: f64 = points.iter().map(|(k, e)| (e.abs() - v * k.abs()).powi(2)).sum();
    let norm: f64 = points.iter().map(|(_, e)| e * e).sum();
    Ok(LinearFit {
        velocity: v,
        relative_residual: if norm > 0.0 { (res / norm).sqrt() } else { 0.0 },
        points: points.len(),
    })
}

/// Smallest distance between an in-gap state of the `tau^z = +1` block and
/// the in-gap states of the `tau^z = -1` block at the same `k_y`. Zero when
/// the two branches are degenerate. Requires `theta_y = 0`.
pub fn sector_splitting(op: &StepOperator2D, ky: f64) -> Result<f64> {
    let block = momentum_block(op, ky)?;
    if block.sector_leakage() != 0.0 {
        return Err(Error::InvalidArgument(
            "tau^z sectors are coupled when theta_y is nonzero".into(),
        ));
    }
    let proj = project_bands(&bulk_angle_pairs(op), ky, PROJECTION_SAMPLES)?;
    let in_gap = |b: &MomentumBlock, s: TauSector| -> Result<Vec<f64>> {
        Ok(unitary_quasi_energies(b.sector(s).as_ref())?
            .into_iter()
            .filter(|&e| proj.in_gap(e, 0.0))
            .collect())
    };
    let down = in_gap(&block, TauSector::Down)?;
    let up = in_gap(&block, TauSector::Up)?;
    if down.is_empty() || up.is_empty() {
        return Err(Error::InvalidArgument(format!("no in-gap states at k_y = {ky}")));
    }
    Ok(down
        .iter()
        .map(|d| up.iter().map(|u| (d - u).abs()).fold(f64::INFINITY, f64::min))
        .fold(f64::INFINITY, f64::min))
}

/// Eigenvectors of a block with `|E| < window`, with their quasi-energies.
pub fn block_states_near_zero(block: &MomentumBlock, window: f64) -> Result<Vec<(f64, Vec<c64>)>> {
    let eig = block.eigen()?;
    let e = eig.quasi_energies();
    Ok((0..e.len())
        .filter(|&j| e[j].abs() < window)
        .map(|j| (e[j], eig.vectors.col(j).iter().copied().collect()))
        .collect())
}

/// Probability of a block vector (index `4 ix + c`) within `radius` of any of
/// the `centers` along `x`.
pub fn block_weight_near(v: &[c64], lx: usize, centers: &[i64], radius: i64) -> f64 {
    let half = (lx / 2) as i64;
    let total: f64 = v.iter().map(|a| a.norm_sqr()).sum();
    let near: f64 = (0..lx)
        .filter(|&ix| {
            let x = ix as i64 - half;
            centers.iter().any(|c| (x - c).abs() <= radius)
        })
        .map(|ix| v[4 * ix..4 * ix + 4].iter().map(|a| a.norm_sqr()).sum::<f64>())
        .sum();
    near / total
}

/// The projection used by [`in_gap_states`] at one momentum.
pub fn projection_at(op: &StepOperator2D, ky: f64) -> Result<ProjectedBands> {
    project_bands(&bulk_angle_pairs(op), ky, PROJECTION_SAMPLES)
}
