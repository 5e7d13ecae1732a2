use std::f64::consts::FRAC_PI_2;

use faer::c64;

use super::dirac::{derivative_matrix, DerivativeScheme, OracleParams};
use crate::evolution::TAIL_LIMIT;
use crate::lattice::{Component, LatticeSpec, SpinorField2D};
use crate::linalg::ONE;
use crate::{Error, Result};

/// Largest boundary probability accepted for sampled oscillator states.
pub const HERMITE_TAIL_LIMIT: f64 = 1e-6;

fn normalize(v: &mut [f64]) {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= n);
}

fn edge_probability(v: &[f64]) -> f64 {
    v[0] * v[0] + v[v.len() - 1] * v[v.len() - 1]
}

/// Oscillator eigenfunctions `|0>, ..., |n>` sampled on the `l` sites
/// `-l/2..=l/2`, built from the Gaussian by the raising operator
/// `-sqrt(eps/beta) d/dx + sqrt(beta/eps) x` with the spectral derivative.
pub fn hermite_states(n: usize, l: usize, params: &OracleParams) -> Result<Vec<Vec<f64>>> {
    let d = derivative_matrix(l, DerivativeScheme::Spectral)?;
    let half = (l / 2) as i64;
    let xs: Vec<f64> = (-half..=half).map(|x| x as f64).collect();
    let (eps, beta) = (params.epsilon, params.beta);
    let (len, inv) = ((eps / beta).sqrt(), (beta / eps).sqrt());
    let mut psi: Vec<f64> = xs.iter().map(|x| (-beta * x * x / (2.0 * eps)).exp()).collect();
    normalize(&mut psi);
    let mut out = vec![psi];
    for _ in 0..n {
        let prev = out.last().expect("non-empty");
        let mut next: Vec<f64> = (0..l)
            .map(|i| {
                let dv: f64 = (0..l).map(|j| d[(i, j)] * prev[j]).sum();
                -len * dv + inv * xs[i] * prev[i]
            })
            .collect();
        normalize(&mut next);
        out.push(next);
    }
    let tail = out.iter().map(|s| edge_probability(s)).fold(0.0, f64::max);
    if tail > HERMITE_TAIL_LIMIT {
        return Err(Error::TailTooLarge {
            tail,
            limit: HERMITE_TAIL_LIMIT,
        });
    }
    Ok(out)
}

/// The `n`-th oscillator eigenfunction.
pub fn hermite_state(n: usize, l: usize, params: &OracleParams) -> Result<Vec<f64>> {
    Ok(hermite_states(n, l, params)?.pop().expect("n + 1 states"))
}

/// Branch of a Dirac oscillator state.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Branch {
    Positive,
    Negative,
    Zero,
}

/// Eigenstate of `eps sigma^z p + beta x sigma^y` as `[u(x), v(x)]` pairs:
/// `(|n-1>, |n-1>)/sqrt2 +- i(-|n>, |n>)/sqrt2`, normalized, with energy
/// `+-sqrt(n omega)`; or the zero mode `(-|0>, |0>)/sqrt2`.
pub fn dirac_oscillator_eigenstate(
    n: usize,
    branch: Branch,
    l: usize,
    params: &OracleParams,
) -> Result<(f64, Vec<c64>)> {
    if branch == Branch::Zero {
        let h0 = hermite_state(0, l, params)?;
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let v = h0
            .iter()
            .flat_map(|a| [c64::new(-r * a, 0.0), c64::new(r * a, 0.0)])
            .collect();
        return Ok((0.0, v));
    }
    if n == 0 {
        return Err(Error::InvalidArgument("signed oscillator branches need n >= 1".into()));
    }
    let hs = hermite_states(n, l, params)?;
    let (lo, hi) = (&hs[n - 1], &hs[n]);
    let sign = if branch == Branch::Positive { 1.0 } else { -1.0 };
    let i = c64::new(0.0, sign);
    let v = (0..l)
        .flat_map(|k| [ONE * lo[k] - i * hi[k], ONE * lo[k] + i * hi[k]])
        .map(|z| z * 0.5)
        .collect();
    Ok((sign * (n as f64 * params.omega()).sqrt(), v))
}

/// Coefficients of the 2D eigenstate `(gamma + delta sigma^x)|E_x>|E_y>`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CombinedEigenstate {
    pub e_x: f64,
    pub e_y: f64,
    pub energy: f64,
    pub phi: f64,
    pub amplitude: f64,
    /// `<E_x| sigma^x |E_x>`.
    pub s: f64,
}

impl CombinedEigenstate {
    pub fn gamma(&self) -> f64 {
        self.amplitude * self.phi.cos()
    }

    pub fn delta(&self) -> f64 {
        self.amplitude * self.phi.sin()
    }

    /// The `-E` solution built on the same product state.
    pub fn partner(&self) -> Result<Self> {
        let phi = self.phi + FRAC_PI_2;
        Ok(Self {
            energy: -self.energy,
            phi,
            amplitude: amplitude(self.s, phi)?,
            ..*self
        })
    }
}

fn amplitude(s: f64, phi: f64) -> Result<f64> {
    let q = 1.0 + s * (2.0 * phi).sin();
    if q <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "non-normalizable combination: 1 + s sin 2phi = {q}"
        )));
    }
    Ok(1.0 / q.sqrt())
}

/// Solves `tan 2phi = E_y / E_x` on the branch with `E_x = E cos 2phi`,
/// `E_y = E sin 2phi` and `E = +sqrt(E_x^2 + E_y^2)`.
pub fn combine_2d(e_x: f64, e_y: f64, s: f64) -> Result<CombinedEigenstate> {
    if e_x == 0.0 && e_y == 0.0 {
        return Err(Error::InvalidArgument("combine_2d needs (E_x, E_y) != (0, 0)".into()));
    }
    if !(-1.0..=1.0).contains(&s) {
        return Err(Error::InvalidArgument(format!("<sigma^x> = {s} outside [-1, 1]")));
    }
    let two_phi = if e_x > 0.0 {
        (e_y / e_x).atan()
    } else if e_x < 0.0 {
        (e_y / e_x).atan() + std::f64::consts::PI
    } else {
        FRAC_PI_2.copysign(e_y)
    };
    let phi = two_phi / 2.0;
    Ok(CombinedEigenstate {
        e_x,
        e_y,
        energy: e_x.hypot(e_y),
        phi,
        amplitude: amplitude(s, phi)?,
        s,
    })
}

/// `(gamma + delta sigma^x) |x-state> (x) |y-state>` in the 2D layout, for
/// 1D states stored as `[u, v]` pairs.
pub fn assemble_2d(
    lattice: LatticeSpec,
    x_state: &[c64],
    y_state: &[c64],
    gamma: f64,
    delta: f64,
) -> Result<SpinorField2D> {
    if x_state.len() != 2 * lattice.lx() || y_state.len() != 2 * lattice.ly() {
        return Err(Error::LatticeMismatch {
            expected: lattice.describe(),
            found: format!("1D states of length {} and {}", x_state.len(), y_state.len()),
        });
    }
    let mut f = SpinorField2D::zeros(lattice);
    for iy in 0..lattice.ly() {
        for ix in 0..lattice.lx() {
            for t in 0..2 {
                for s in 0..2 {
                    let a = x_state[2 * ix + s] * gamma + x_state[2 * ix + 1 - s] * delta;
                    f.amplitudes_mut()[lattice.amp_index(ix, iy, s + 2 * t)] = a * y_state[2 * iy + t];
                }
            }
        }
    }
    Ok(f)
}

/// Analytic zero modes of the 2D Dirac operator.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ZeroModeKind {
    /// `(-1, 1) (x) (-1, 1) exp[-beta (x^2 + y^2) / 2 eps]`.
    Gaussian,
    /// `(1, 1) (x) (1, 1) exp[-(m0/eps)(|x - x0| + |y - y0|)]`, bound to the
    /// corner where both masses drop from `+m0` to `-m0`.
    Corner { x0: f64, y0: f64 },
}

type Envelope = Box<dyn Fn(f64, f64) -> f64>;

pub fn analytic_zero_mode_2d(kind: ZeroModeKind, lattice: LatticeSpec, params: &OracleParams) -> Result<SpinorField2D> {
    let (spin, env): ([f64; 2], Envelope) = match kind {
        ZeroModeKind::Gaussian => {
            let r = params.beta / (2.0 * params.epsilon);
            ([-1.0, 1.0], Box::new(move |x, y| (-r * (x * x + y * y)).exp()))
        }
        ZeroModeKind::Corner { x0, y0 } => {
            let k = params.m0 / params.epsilon;
            (
                [1.0, 1.0],
                Box::new(move |x, y| (-k * ((x - x0).abs() + (y - y0).abs())).exp()),
            )
        }
    };
    let mut f = SpinorField2D::zeros(lattice);
    for iy in 0..lattice.ly() {
        let y = lattice.coord_y(iy);
        for ix in 0..lattice.lx() {
            let x = lattice.coord_x(ix);
            let e = env(x as f64, y as f64);
            for c in Component::ALL {
                let (s, t) = (c.index() % 2, c.index() / 2);
                f.set(x, y, c, c64::new(spin[s] * spin[t] * e, 0.0));
            }
        }
    }
    f.normalize();
    let tail = crate::evolution::boundary_mass(&f);
    if tail > TAIL_LIMIT {
        return Err(Error::TailTooLarge {
            tail,
            limit: TAIL_LIMIT,
        });
    }
    Ok(f)
}

/// Real expectation `<psi| sigma^x |psi>` of a 1D spinor in `[u, v]` layout.
pub fn sigma_x_expectation(psi: &[c64]) -> f64 {
    let num: c64 = psi
        .chunks(2)
        .map(|uv| uv[0].conj() * uv[1] + uv[1].conj() * uv[0])
        .sum();
    let den: f64 = psi.iter().map(|a| a.norm_sqr()).sum();
    num.re / den
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::continuum::dirac::{build_dirac, MassProfile};
    use crate::linalg::hermitian_eigen;

    fn params() -> OracleParams {
        OracleParams::new(1.0, PI / 20.0, 0.5).unwrap()
    }

    fn apply(h: &faer::Mat<c64>, v: &[c64]) -> Vec<c64> {
        (0..v.len())
            .map(|i| (0..v.len()).map(|j| h[(i, j)] * v[j]).sum())
            .collect()
    }

    fn norm(v: &[c64]) -> f64 {
        v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    #[test]
    fn hermite_states_are_orthonormal_with_parity() {
        let hs = hermite_states(5, 61, &params()).unwrap();
        for m in 0..=5 {
            for n in 0..=5 {
                let ip: f64 = hs[m].iter().zip(&hs[n]).map(|(a, b)| a * b).sum();
                let id = if m == n { 1.0 } else { 0.0 };
                assert!((ip - id).abs() < 1e-8, "<{m}|{n}> = {ip}");
            }
        }
        assert!(hs[1][30].abs() < 1e-14);
        for k in 0..30 {
            assert!((hs[1][k] + hs[1][60 - k]).abs() < 1e-12);
        }
        assert!(matches!(
            hermite_state(3, 9, &params()),
            Err(Error::TailTooLarge { .. })
        ));
    }

    #[test]
    fn oscillator_states_are_lattice_eigenvectors() {
        let p = params();
        let l = 61;
        let h = build_dirac(
            1,
            l,
            1,
            &MassProfile::Linear { slope: p.beta },
            &MassProfile::Zero,
            1.0,
            DerivativeScheme::Spectral,
        )
        .unwrap()
        .matrix;
        let (_, zero) = dirac_oscillator_eigenstate(0, Branch::Zero, l, &p).unwrap();
        assert!(norm(&apply(&h, &zero)) < 1e-6);
        let (e, plus) = dirac_oscillator_eigenstate(1, Branch::Positive, l, &p).unwrap();
        let r: Vec<c64> = apply(&h, &plus).iter().zip(&plus).map(|(a, b)| a - b * e).collect();
        assert!(norm(&r) / e < 0.02, "{}", norm(&r) / e);
        let (_, minus) = dirac_oscillator_eigenstate(1, Branch::Negative, l, &p).unwrap();
        let ip: c64 = plus.iter().zip(&minus).map(|(a, b)| a.conj() * b).sum();
        assert!(ip.norm() < 1e-8);
        assert!((norm(&plus) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn combine_examples() {
        let c = combine_2d(1.0, 0.0, 0.0).unwrap();
        assert_eq!((c.phi, c.energy, c.amplitude), (0.0, 1.0, 1.0));
        assert_eq!(c.partner().unwrap().energy, -1.0);
        let c = combine_2d(3.0, 4.0, 0.0).unwrap();
        assert!((c.energy - 5.0).abs() < 1e-15);
        assert!(((2.0 * c.phi).tan() - 4.0 / 3.0).abs() < 1e-14);
        assert_eq!(c.amplitude, 1.0);
        let c = combine_2d(1.0, 1.0, 0.5).unwrap();
        assert!((2.0 * c.phi - PI / 4.0).abs() < 1e-15);
        let want = (1.0 + 0.5 * 2f64.sqrt() / 2.0).powf(-0.5);
        assert!((c.amplitude - want).abs() < 1e-15);
        // Reconstruct: a spinor with <sigma^x> = 0.5 times any y state.
        let a = 0.5f64.asin() / 2.0;
        let x = [c64::new(a.cos(), 0.0), c64::new(a.sin(), 0.0)];
        let y = [c64::new(0.6, 0.0), c64::new(0.0, 0.8)];
        assert!((sigma_x_expectation(&x) - 0.5).abs() < 1e-15);
        let mut n2 = 0.0;
        for t in 0..2 {
            for s in 0..2 {
                n2 += ((x[s] * c.gamma() + x[1 - s] * c.delta()) * y[t]).norm_sqr();
            }
        }
        assert!((n2 - 1.0).abs() < 1e-14);
        assert!(combine_2d(0.0, 1.0, -1.0).is_err());
        assert!(combine_2d(0.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn combined_state_solves_2d_dirac() {
        let l = 15;
        let p = OracleParams::new(1.0, 0.3, 0.5).unwrap();
        let (mx, my) = (
            MassProfile::Linear { slope: p.beta },
            MassProfile::Wall {
                inner: 0.6,
                outer: -0.6,
                l_wall: 3,
            },
        );
        let scheme = DerivativeScheme::Spectral;
        let hx = build_dirac(1, l, 1, &mx, &MassProfile::Zero, 1.0, scheme)
            .unwrap()
            .matrix;
        let hy = build_dirac(1, l, 1, &my, &MassProfile::Zero, 1.0, scheme)
            .unwrap()
            .matrix;
        let h2 = build_dirac(2, l, l, &mx, &my, 1.0, scheme).unwrap().matrix;
        let (ex, vx) = hermitian_eigen(hx.as_ref()).unwrap();
        let (ey, vy) = hermitian_eigen(hy.as_ref()).unwrap();
        let lat = LatticeSpec::square(l).unwrap();
        for (i, j) in [(17, 20), (3, 14), (25, 2)] {
            let xs: Vec<c64> = vx.col(i).iter().copied().collect();
            let ys: Vec<c64> = vy.col(j).iter().copied().collect();
            let c = combine_2d(ex[i], ey[j], sigma_x_expectation(&xs)).unwrap();
            for c in [c, c.partner().unwrap()] {
                let f = assemble_2d(lat, &xs, &ys, c.gamma(), c.delta()).unwrap();
                assert!((f.norm() - 1.0).abs() < 1e-10);
                let hv = apply(&h2, f.amplitudes());
                let r: Vec<c64> = hv.iter().zip(f.amplitudes()).map(|(a, b)| a - b * c.energy).collect();
                assert!(norm(&r) < 1e-10, "{}", norm(&r));
            }
        }
    }

    #[test]
    fn analytic_zero_modes() {
        let p = params();
        let lat = LatticeSpec::square(41).unwrap();
        let g = analytic_zero_mode_2d(ZeroModeKind::Gaussian, lat, &p).unwrap();
        let m = g.position_moments().unwrap();
        assert!((m.std_x - m.std_y).abs() < 1e-10);
        let c = analytic_zero_mode_2d(
            ZeroModeKind::Corner { x0: 2.0, y0: -3.0 },
            LatticeSpec::square(61).unwrap(),
            &p,
        )
        .unwrap();
        let lat = *c.lattice();
        let pr = c.probability_map();
        let at = |x: i64, y: i64| pr[lat.site(lat.wrap_x(x), lat.wrap_y(y))];
        let ratio = at(4, -3) / at(3, -3);
        assert!((ratio - (-2.0 * p.m0 / p.epsilon).exp()).abs() < 1e-12);
        let small = LatticeSpec::square(9).unwrap();
        assert!(analytic_zero_mode_2d(ZeroModeKind::Gaussian, small, &p).is_err());
    }
}
