use std::f64::consts::PI;
use std::io::Write;

use faer::{c64, Mat};

use crate::linalg::{unitary_quasi_energies, wrap_angle};
use crate::operators::{coin_matrix, Axis};
use crate::{fmt_f64, Result};

fn real4(m: [[f64; 4]; 4]) -> Mat<c64> {
    Mat::from_fn(4, 4, |i, j| c64::new(m[i][j], 0.0))
}

/// The 4x4 Bloch unitary `S_y(k_y) C_y S_x(k_x) C_x` for uniform angles.
pub fn bulk_unitary(theta_x: f64, theta_y: f64, kx: f64, ky: f64) -> Mat<c64> {
    let ex = c64::from_polar(1.0, kx);
    let sx = Mat::from_fn(4, 4, |i, j| {
        if i != j {
            c64::new(0.0, 0.0)
        } else if i % 2 == 0 {
            ex
        } else {
            ex.conj()
        }
    });
    let (s, c) = ky.sin_cos();
    let (cc, is) = (c64::new(c, 0.0), c64::new(0.0, s));
    let z = c64::new(0.0, 0.0);
    let sy_entries = [[cc, is, z, z], [is, cc, z, z], [z, z, cc, -is], [z, z, -is, cc]];
    let sy = Mat::from_fn(4, 4, |i, j| sy_entries[i][j]);
    let cx = real4(coin_matrix(Axis::X, theta_x));
    let cy = real4(coin_matrix(Axis::Y, theta_y));
    &sy * &cy * &sx * &cx
}

/// The four quasi-energies at `(k_x, k_y)`, ascending.
pub fn bulk_bands(theta_x: f64, theta_y: f64, kx: f64, ky: f64) -> Result<[f64; 4]> {
    let e = unitary_quasi_energies(bulk_unitary(theta_x, theta_y, kx, ky).as_ref())?;
    Ok([e[0], e[1], e[2], e[3]])
}

/// Smallest spacing between bands 1-2 and between bands 3-4.
pub fn pair_gaps(bands: &[f64; 4]) -> (f64, f64) {
    (bands[1] - bands[0], bands[3] - bands[2])
}

/// Smallest spacing between any two of the four bands on the circle.
pub fn min_band_gap(bands: &[f64; 4]) -> f64 {
    let mut g = f64::INFINITY;
    for i in 0..4 {
        for j in i + 1..4 {
            g = g.min(wrap_angle(bands[i] - bands[j]).abs());
        }
    }
    g
}

/// Half-width of the bulk gap around `E = 0`: the smallest `|E|` over an
/// `n x n` grid of the Brillouin zone, including the points `k = +-pi/2`
/// whenever `n - 1` is divisible by four.
pub fn bulk_gap_around_zero(theta_x: f64, theta_y: f64, n: usize) -> Result<f64> {
    let grid = uniform_grid(n);
    let mut best = f64::INFINITY;
    for &ky in &grid {
        for &kx in &grid {
            for e in bulk_bands(theta_x, theta_y, kx, ky)? {
                best = best.min(e.abs());
            }
        }
    }
    Ok(best)
}

/// Bands over a uniform `n x n` grid of `[-pi, pi]^2`.
#[derive(Clone, Debug, PartialEq)]
pub struct BandStructure {
    pub theta_x: f64,
    pub theta_y: f64,
    /// `(k_x, k_y, bands)` with `k_x` varying fastest.
    pub points: Vec<(f64, f64, [f64; 4])>,
}

/// `n` equally spaced momenta from `-pi` to `pi` inclusive.
pub fn uniform_grid(n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..n).map(|i| -PI + 2.0 * PI * i as f64 / (n - 1) as f64).collect(),
    }
}

impl BandStructure {
    pub fn compute(theta_x: f64, theta_y: f64, kx: &[f64], ky: &[f64]) -> Result<Self> {
        let mut points = Vec::with_capacity(kx.len() * ky.len());
        for &y in ky {
            for &x in kx {
                points.push((x, y, bulk_bands(theta_x, theta_y, x, y)?));
            }
        }
        Ok(Self {
            theta_x,
            theta_y,
            points,
        })
    }

    /// Writes `kx,ky,E1,E2,E3,E4`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "kx,ky,E1,E2,E3,E4")?;
        for (kx, ky, e) in &self.points {
            writeln!(
                w,
                "{},{},{},{},{},{}",
                fmt_f64(*kx),
                fmt_f64(*ky),
                fmt_f64(e[0]),
                fmt_f64(e[1]),
                fmt_f64(e[2]),
                fmt_f64(e[3])
            )?;
        }
        Ok(())
    }
}

/// Bulk bands at fixed `k_y`, projected over `k_x`: the covered part of the
/// quasi-energy circle, as disjoint intervals.
#[derive(Clone, Debug, PartialEq)]
pub struct ProjectedBands {
    pub ky: f64,
    /// Covered intervals `[lo, hi]`; one may wrap through `pi` (`lo > hi`).
    pub covered: Vec<(f64, f64)>,
    /// Sampling resolution used to merge neighbouring values.
    pub resolution: f64,
}

/// Projects the bulk bands of every `(theta_x, theta_y)` pair at `k_y` over
/// `nkx` values of `k_x`.
///
/// Adjacent sampled energies closer than `resolution` are treated as one
/// continuous band; the group velocity of the walk is bounded by one, so
/// `resolution = 4 * 2 pi / nkx` safely bridges the sampling.
pub fn project_bands(angles: &[(f64, f64)], ky: f64, nkx: usize) -> Result<ProjectedBands> {
    let resolution = 4.0 * 2.0 * PI / nkx as f64;
    let mut all = Vec::with_capacity(4 * nkx * angles.len());
    for &(tx, ty) in angles {
        for i in 0..nkx {
            let kx = -PI + 2.0 * PI * i as f64 / nkx as f64;
            all.extend(bulk_bands(tx, ty, kx, ky)?);
        }
    }
    all.sort_by(f64::total_cmp);
    let mut covered: Vec<(f64, f64)> = Vec::new();
    for &e in &all {
        match covered.last_mut() {
            Some(last) if e - last.1 < resolution => last.1 = e,
            _ => covered.push((e, e)),
        }
    }
    // Merge across the branch cut at pi.
    if let (Some(&first), Some(&last)) = (covered.first(), covered.last()) {
        if first.0 + 2.0 * PI - last.1 < resolution {
            if covered.len() == 1 {
                covered[0] = (-PI, PI);
            } else {
                covered.pop();
                covered[0] = (last.0, first.1);
            }
        }
    }
    Ok(ProjectedBands {
        ky,
        covered,
        resolution,
    })
}

impl ProjectedBands {
    fn contains(&self, e: f64, margin: f64) -> bool {
        self.covered.iter().any(|&(lo, hi)| {
            if lo <= hi {
                e >= lo - margin && e <= hi + margin
            } else {
                e >= lo - margin || e <= hi + margin
            }
        })
    }

    /// Whether `e` lies in an opening of the projected bulk bands, at least
    /// `margin` away from every covered interval.
    pub fn in_gap(&self, e: f64, margin: f64) -> bool {
        !self.contains(e, margin)
    }

    /// Openings of the projection as `(lo, hi)` intervals.
    pub fn openings(&self) -> Vec<(f64, f64)> {
        let n = self.covered.len();
        if n == 0 {
            return vec![(-PI, PI)];
        }
        let mut out = Vec::new();
        for i in 0..n {
            let hi = self.covered[i].1;
            let lo = self.covered[(i + 1) % n].0;
            // The gap back to the first interval exists unless that one wraps through pi.
            if i + 1 < n || self.covered[0].0 <= self.covered[0].1 {
                out.push((hi, lo));
            }
        }
        out.retain(|(a, b)| wrap_angle(b - a).abs() > 0.0);
        out
    }

    /// Distance from `E = 0` to the nearest covered energy.
    pub fn gap_around_zero(&self) -> f64 {
        self.covered
            .iter()
            .map(|&(lo, hi)| {
                if lo <= hi {
                    if lo <= 0.0 && 0.0 <= hi {
                        0.0
                    } else {
                        lo.abs().min(hi.abs())
                    }
                } else {
                    lo.abs().min(hi.abs())
                }
            })
            .fold(f64::INFINITY, f64::min)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{quasi_energy, unitarity_residual};

    #[test]
    fn bulk_unitary_is_unitary() {
        let u = bulk_unitary(0.3, -1.2, 0.8, 2.1);
        assert!(unitarity_residual(u.as_ref()) < 1e-14);
    }

    #[test]
    fn free_bands_match_product_of_cosines() {
        let grid = uniform_grid(21);
        let mut worst = 0.0f64;
        for &ky in &grid {
            for &kx in &grid {
                let e = bulk_bands(0.0, 0.0, kx, ky).unwrap();
                let target = kx.cos() * ky.cos();
                for x in e {
                    worst = worst.max((x.cos() - target).abs());
                }
                // Independent oracle: the general eigensolver.
                let mut brute: Vec<f64> = bulk_unitary(0.0, 0.0, kx, ky)
                    .eigenvalues()
                    .unwrap()
                    .into_iter()
                    .map(quasi_energy)
                    .collect();
                brute.sort_by(f64::total_cmp);
                let d = crate::linalg::circular_multiset_distance(&brute, &e);
                assert!(d < 1e-12, "({kx}, {ky}): {d}");
            }
        }
        assert!(worst < 1e-12);
    }

    #[test]
    fn bulk_gap_of_uniform_walk() {
        // Closed for the free walk, open for equal nonzero angles.
        assert!(bulk_gap_around_zero(0.0, 0.0, 41).unwrap() < 1e-12);
        let g = bulk_gap_around_zero(PI / 3.0, PI / 3.0, 41).unwrap();
        let at = bulk_bands(PI / 3.0, PI / 3.0, PI / 2.0, PI / 2.0).unwrap();
        assert!((g - at[2]).abs() < 1e-12 && g > 0.25);
    }

    #[test]
    fn projection_of_free_bands_covers_circle() {
        let p = project_bands(&[(0.0, 0.0)], 0.0, 400).unwrap();
        assert!(p.openings().is_empty(), "{:?}", p.covered);
        assert!(!p.in_gap(0.1, 0.0));
    }

    #[test]
    fn gapped_projection_has_opening_at_zero() {
        let p = project_bands(&[(PI / 3.0, 0.0)], 0.5, 400).unwrap();
        assert!(p.gap_around_zero() > 0.1);
        assert!(p.in_gap(0.0, 0.01));
    }
}
