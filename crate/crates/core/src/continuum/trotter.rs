use faer::{c64, Mat};

use super::dirac::{axis_parts, build_dirac, DerivativeScheme, MassProfile};
use crate::linalg::{expm_hermitian, ZERO};
use crate::{Error, Result};

/// Walk with continuous parameters compared against the Dirac propagator.
///
/// The walk at time step `dt` shifts by `eps dt` through the spectral
/// shift `exp(-i eps dt sigma^z p)` and rotates by `m(x) dt`, so that the
/// only difference from `exp(-i H t)` is the splitting error.
#[derive(Clone, Debug)]
pub struct TrotterSetup {
    pub dim: usize,
    pub l: usize,
    pub mass_x: MassProfile,
    pub mass_y: MassProfile,
    pub epsilon: f64,
    pub initial: Vec<c64>,
}

impl TrotterSetup {
    /// A Gaussian of the given width centred at `center`, spinor
    /// `(1, i)/sqrt 2` along each axis.
    pub fn gaussian(
        dim: usize,
        l: usize,
        mass_x: MassProfile,
        mass_y: MassProfile,
        epsilon: f64,
        width: f64,
        center: (f64, f64),
    ) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::InvalidArgument(format!(
                "Trotter dimension must be 1 or 2, got {dim}"
            )));
        }
        let half = (l / 2) as i64;
        let g = |x: i64, c: f64| (-(x as f64 - c).powi(2) / (4.0 * width * width)).exp();
        let spin = [c64::new(1.0, 0.0), c64::new(0.0, 1.0)];
        let mut v = Vec::new();
        if dim == 1 {
            for x in -half..=half {
                for s in spin {
                    v.push(s * g(x, center.0));
                }
            }
        } else {
            for y in -half..=half {
                for x in -half..=half {
                    for t in spin {
                        for s in spin {
                            v.push(s * t * (g(x, center.0) * g(y, center.1)));
                        }
                    }
                }
            }
        }
        let n = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        v.iter_mut().for_each(|a| *a /= n);
        Ok(Self {
            dim,
            l,
            mass_x,
            mass_y,
            epsilon,
            initial: v,
        })
    }

    fn ly(&self) -> usize {
        if self.dim == 1 {
            1
        } else {
            self.l
        }
    }

    /// One scaled walk step `S C` (1D) or `S_y C_y S_x C_x` (2D).
    pub fn walk_step(&self, dt: f64) -> Result<Mat<c64>> {
        let scheme = DerivativeScheme::Spectral;
        let mut u: Option<Mat<c64>> = None;
        let axes = if self.dim == 1 { 1 } else { 2 };
        for axis in 0..axes {
            let mass = if axis == 0 { &self.mass_x } else { &self.mass_y };
            let (k, m) = axis_parts(self.dim, self.l, self.ly(), axis, mass, self.epsilon, scheme)?;
            let factor = expm_hermitian(k.as_ref(), dt)? * expm_hermitian(m.as_ref(), dt)?;
            u = Some(match u {
                None => factor,
                Some(prev) => factor * prev,
            });
        }
        Ok(u.expect("at least one axis"))
    }

    /// `exp(-i H t) psi_0` for the lattice Dirac Hamiltonian.
    pub fn exact(&self, t: f64) -> Result<Vec<c64>> {
        let h = build_dirac(
            self.dim,
            self.l,
            self.ly(),
            &self.mass_x,
            &self.mass_y,
            self.epsilon,
            DerivativeScheme::Spectral,
        )?;
        let e = expm_hermitian(h.matrix.as_ref(), t)?;
        Ok(apply(&e, &self.initial))
    }
}

fn apply(m: &Mat<c64>, v: &[c64]) -> Vec<c64> {
    let n = v.len();
    let mut out = vec![ZERO; n];
    for j in 0..n {
        let vj = v[j];
        if vj == ZERO {
            continue;
        }
        for (i, o) in out.iter_mut().enumerate() {
            *o += m[(i, j)] * vj;
        }
    }
    out
}

fn steps_for(dt: f64, t: f64) -> Result<usize> {
    let steps = (t / dt).round();
    if dt <= 0.0 || steps < 1.0 || (steps * dt - t).abs() > 1e-9 * t.max(1.0) {
        return Err(Error::InvalidArgument(format!(
            "time {t} is not a whole number of steps of {dt}"
        )));
    }
    Ok(steps as usize)
}

/// One point of a Trotter study.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrotterRun {
    pub dt: f64,
    pub steps: usize,
    /// `||U_dt^{t/dt} psi_0 - exp(-i H t) psi_0||`.
    pub error: f64,
}

pub fn trotter_error(setup: &TrotterSetup, dt: f64, t: f64) -> Result<f64> {
    Ok(trotter_study(setup, &[dt], t)?[0].error)
}

/// Errors for several time steps against a single exact propagation.
pub fn trotter_study(setup: &TrotterSetup, dts: &[f64], t: f64) -> Result<Vec<TrotterRun>> {
    let steps: Vec<usize> = dts.iter().map(|&dt| steps_for(dt, t)).collect::<Result<_>>()?;
    let exact = setup.exact(t)?;
    dts.iter()
        .zip(steps)
        .map(|(&dt, steps)| {
            let u = setup.walk_step(dt)?;
            let mut psi = setup.initial.clone();
            for _ in 0..steps {
                psi = apply(&u, &psi);
            }
            let error = psi
                .iter()
                .zip(&exact)
                .map(|(a, b)| (a - b).norm_sqr())
                .sum::<f64>()
                .sqrt();
            Ok(TrotterRun { dt, steps, error })
        })
        .collect()
}
