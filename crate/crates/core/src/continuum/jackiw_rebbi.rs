use faer::c64;

use crate::{Error, Result};

/// Bound state `(1, 1) e^{-m0 |x - center| / eps}` of a mass dropping from
/// `+m0` to `-m0` at `center`, sampled on `-l/2..=l/2` as `[u, v]` pairs and
/// normalized.
pub fn jr_edge_state(m0: f64, epsilon: f64, l: usize, center: f64) -> Result<Vec<c64>> {
    if m0 <= 0.0 || epsilon <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "bound state needs m0 > 0 and eps > 0 (m0 {m0}, eps {epsilon})"
        )));
    }
    let half = (l / 2) as i64;
    let amp: Vec<f64> = (-half..=half)
        .map(|x| (-m0 * (x as f64 - center).abs() / epsilon).exp())
        .collect();
    let n = (2.0 * amp.iter().map(|a| a * a).sum::<f64>()).sqrt();
    Ok(amp.iter().flat_map(|a| [c64::new(a / n, 0.0); 2]).collect())
}

/// Reflection and transmission amplitudes of a plane wave on a mass wall.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JrScattering {
    pub b_over_a: c64,
    pub c_over_a: c64,
    pub e_x: f64,
    /// `2 phi` with `tan 2 phi = m0 / (eps k_x)`.
    pub two_phi: f64,
}

impl JrScattering {
    /// `|B/A|^2 + |C/A|^2`.
    pub fn flux(&self) -> f64 {
        self.b_over_a.norm_sqr() + self.c_over_a.norm_sqr()
    }
}

pub fn jr_scattering(kx: f64, m0: f64, epsilon: f64) -> Result<JrScattering> {
    if kx <= 0.0 {
        return Err(Error::InvalidArgument(format!("scattering needs k_x > 0, got {kx}")));
    }
    let two_phi = (m0 / (epsilon * kx)).atan();
    let (s, c) = two_phi.sin_cos();
    Ok(JrScattering {
        b_over_a: c64::new(-s, 0.0),
        c_over_a: c64::new(-c, 0.0),
        e_x: (epsilon * kx).hypot(m0),
        two_phi,
    })
}

/// Reference structure of the 1D and 2D Dirac spectra with walls.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DispersionCase {
    /// 1D wall: zero mode and gapped continua.
    A,
    /// 2D straight wall along `y`: linear edge branch and filled continuum.
    B,
    /// 2D corner: zero mode, edge-times-bulk and bulk-times-bulk continua.
    C,
}

/// Energies at one momentum.
#[derive(Clone, Debug, PartialEq)]
pub struct DispersionReference {
    /// Isolated branches.
    pub discrete: Vec<f64>,
    /// Continuum edges, each present with both signs.
    pub continuum_edges: Vec<f64>,
}

pub fn dispersion_reference(case: DispersionCase, k: f64, m0: f64, epsilon: f64) -> DispersionReference {
    let edge = (epsilon * k).hypot(m0);
    match case {
        DispersionCase::A => DispersionReference {
            discrete: vec![0.0],
            continuum_edges: vec![-edge, edge],
        },
        DispersionCase::B => DispersionReference {
            discrete: vec![-epsilon * k, epsilon * k],
            continuum_edges: vec![-edge, edge],
        },
        DispersionCase::C => {
            let outer = (epsilon * k).hypot(2f64.sqrt() * m0);
            DispersionReference {
                discrete: vec![0.0],
                continuum_edges: vec![-outer, -edge, edge, outer],
            }
        }
    }
}

/// `nu = 1` iff the masses on the two sides of a wall have opposite signs.
pub fn topo_index(m1: f64, m2: f64) -> Result<u8> {
    if m1 == 0.0 || m2 == 0.0 {
        return Err(Error::InvalidArgument(format!(
            "topological index undefined for a zero mass ({m1}, {m2})"
        )));
    }
    Ok(u8::from(m1.signum() != m2.signum()))
}

/// Product of per-axis indices.
pub fn topo_product(nus: &[u8]) -> u8 {
    nus.iter().product()
}

#[cfg(test)]
mod tests {
    use std::f64::consts::FRAC_1_SQRT_2;

    use super::*;

    #[test]
    fn edge_state_shape() {
        let v = jr_edge_state(0.5, 1.0, 41, 0.0).unwrap();
        let p = |x: usize| v[2 * x].norm_sqr() + v[2 * x + 1].norm_sqr();
        assert!((p(21) / p(20) - (-1.0f64).exp()).abs() < 1e-14);
        for uv in v.chunks(2) {
            assert_eq!(uv[0], uv[1]);
        }
        let n: f64 = v.iter().map(|a| a.norm_sqr()).sum();
        assert!((n - 1.0).abs() < 1e-14);
    }

    #[test]
    fn scattering_examples() {
        let s = jr_scattering(1.0, 1e-12, 1.0).unwrap();
        assert!(s.b_over_a.norm() < 1e-11 && (s.c_over_a.re + 1.0).abs() < 1e-12);
        let s = jr_scattering(0.5, 0.5, 1.0).unwrap();
        assert!((s.b_over_a.re + FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((s.c_over_a.re + FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((s.flux() - 1.0).abs() < 1e-15);
        assert!(jr_scattering(0.0, 0.5, 1.0).is_err());
    }

    #[test]
    fn dispersion_cases() {
        let a = dispersion_reference(DispersionCase::A, 0.0, 0.4, 1.0);
        assert_eq!(a.continuum_edges, vec![-0.4, 0.4]);
        let b = dispersion_reference(DispersionCase::B, 0.0, 0.4, 1.0);
        assert_eq!(b.discrete, vec![0.0, 0.0]);
        let c = dispersion_reference(DispersionCase::C, 0.0, 0.4, 1.0);
        assert!((c.continuum_edges[3] - 0.4 * 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn indices() {
        assert_eq!(topo_index(0.5, -0.5).unwrap(), 1);
        assert_eq!(topo_index(0.5, 0.7).unwrap(), 0);
        assert!(topo_index(0.0, 1.0).is_err());
        assert_eq!(topo_product(&[1, 1]), 1);
        assert_eq!(topo_product(&[1, 0]), 0);
    }
}
