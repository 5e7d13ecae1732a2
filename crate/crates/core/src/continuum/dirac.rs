use std::f64::consts::PI;

use faer::{c64, Mat, MatRef};

use crate::linalg::{hermiticity_residual, internal, max_abs, pauli, ZERO};
use crate::operators::AngleProfile;
use crate::{Error, Result};

/// Parameters of the continuum identifications.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OracleParams {
    /// Velocity `a / dt`.
    pub epsilon: f64,
    /// Mass slope `b / dt`.
    pub beta: f64,
    /// Wall mass magnitude.
    pub m0: f64,
}

impl OracleParams {
    pub fn new(epsilon: f64, beta: f64, m0: f64) -> Result<Self> {
        if !(epsilon > 0.0 && beta > 0.0 && m0 > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "oracle parameters must be positive (epsilon {epsilon}, beta {beta}, m0 {m0})"
            )));
        }
        Ok(Self { epsilon, beta, m0 })
    }

    /// Oscillator frequency `2 epsilon beta`.
    pub fn omega(&self) -> f64 {
        2.0 * self.epsilon * self.beta
    }

    /// Schrodinger mass with `epsilon^2 = 1 / (2 m_S)`.
    pub fn schrodinger_mass(&self) -> f64 {
        1.0 / (2.0 * self.epsilon * self.epsilon)
    }

    /// Oscillator length `sqrt(epsilon / beta)`.
    pub fn length(&self) -> f64 {
        (self.epsilon / self.beta).sqrt()
    }
}

/// Lattice realization of the momentum operator.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DerivativeScheme {
    /// Exact on the lattice plane waves.
    Spectral,
    CentralDifference,
}

/// Mass term along one axis.
#[derive(Clone, Debug, PartialEq)]
pub enum MassProfile {
    Zero,
    Constant(f64),
    /// `slope * x`.
    Linear {
        slope: f64,
    },
    /// `inner` for `|x| <= l_wall`, `outer` beyond.
    Wall {
        inner: f64,
        outer: f64,
        l_wall: i64,
    },
    /// `theta(x)` of a walk with unit time step.
    Angle(AngleProfile),
}

impl MassProfile {
    pub fn sample(&self, l: usize) -> Result<Vec<f64>> {
        let half = (l / 2) as i64;
        (-half..=half)
            .map(|x| {
                Ok(match self {
                    MassProfile::Zero => 0.0,
                    MassProfile::Constant(m) => *m,
                    MassProfile::Linear { slope } => slope * x as f64,
                    MassProfile::Wall { inner, outer, l_wall } => {
                        if x.abs() <= *l_wall {
                            *inner
                        } else {
                            *outer
                        }
                    }
                    MassProfile::Angle(p) => p.eval(x, half)?,
                })
            })
            .collect()
    }
}

fn check_odd(l: usize) -> Result<()> {
    if l < 3 || l.is_multiple_of(2) {
        return Err(Error::InvalidLattice(format!(
            "Dirac lattice needs an odd length >= 3 for a symmetric coordinate range, got {l}"
        )));
    }
    Ok(())
}

/// Real matrix of `d/dx` on a periodic lattice of odd length `l`.
pub fn derivative_matrix(l: usize, scheme: DerivativeScheme) -> Result<Mat<f64>> {
    check_odd(l)?;
    Ok(match scheme {
        DerivativeScheme::Spectral => {
            let half = l / 2;
            Mat::from_fn(l, l, |j, m| {
                let d = j as f64 - m as f64;
                -(2.0 / l as f64)
                    * (1..=half)
                        .map(|n| {
                            let k = 2.0 * PI * n as f64 / l as f64;
                            k * (k * d).sin()
                        })
                        .sum::<f64>()
            })
        }
        DerivativeScheme::CentralDifference => Mat::from_fn(l, l, |j, m| {
            if (j + 1) % l == m {
                0.5
            } else if (m + 1) % l == j {
                -0.5
            } else {
                0.0
            }
        }),
    })
}

/// Momentum `p = i d/dx`, so that `p e^{ikx} = -k e^{ikx}`; with this sign
/// the unit shift of the walk is `exp(-i sigma^z p)`.
pub fn momentum_matrix(l: usize, scheme: DerivativeScheme) -> Result<Mat<c64>> {
    let d = derivative_matrix(l, scheme)?;
    Ok(Mat::from_fn(l, l, |i, j| c64::new(0.0, d[(i, j)])))
}

/// A Hermitian lattice Dirac Hamiltonian.
///
/// In one dimension the index is `2 ix + s`; in two it is
/// `4 (iy lx + ix) + s + 2 t`, the layout of [`crate::SpinorField2D`].
#[derive(Clone, Debug)]
pub struct LatticeHamiltonian {
    pub dim: usize,
    pub lx: usize,
    pub ly: usize,
    pub scheme: DerivativeScheme,
    pub matrix: Mat<c64>,
}

impl LatticeHamiltonian {
    pub fn hermiticity(&self) -> f64 {
        hermiticity_residual(self.matrix.as_ref())
    }

    pub fn internal_dim(&self) -> usize {
        if self.dim == 1 {
            2
        } else {
            4
        }
    }

    /// Coordinates `(x, y)` of a matrix index.
    pub fn coords(&self, index: usize) -> (i64, i64) {
        let site = index / self.internal_dim();
        let (ix, iy) = (site % self.lx, site / self.lx);
        (ix as i64 - (self.lx / 2) as i64, iy as i64 - (self.ly / 2) as i64)
    }
}

/// `eps sigma^z p + m sigma^y` on `(x, s)` with index `2 ix + s`.
pub(crate) fn dirac_1d(mass: &[f64], p: MatRef<'_, c64>, eps: f64) -> Mat<c64> {
    let l = mass.len();
    let (sz, sy) = (pauli(3), pauli(2));
    Mat::from_fn(2 * l, 2 * l, |r, c| {
        let (i, a) = (r / 2, r % 2);
        let (j, b) = (c / 2, c % 2);
        let mut v = p[(i, j)] * sz[(a, b)] * eps;
        if i == j {
            v += sy[(a, b)] * mass[i];
        }
        v
    })
}

/// Adds `eps A (x) p` along `axis` and `B m(coord)` to a 2D matrix, where
/// `A` and `B` are internal 4x4 operators.
#[allow(clippy::too_many_arguments)]
fn add_axis_terms(
    h: &mut Mat<c64>,
    lx: usize,
    ly: usize,
    axis: usize,
    p: MatRef<'_, c64>,
    eps: f64,
    kinetic: MatRef<'_, c64>,
    mass_op: MatRef<'_, c64>,
    mass: &[f64],
) {
    let site = |ix: usize, iy: usize| iy * lx + ix;
    let (la, lb) = if axis == 0 { (lx, ly) } else { (ly, lx) };
    for other in 0..lb {
        for i in 0..la {
            let si = if axis == 0 { site(i, other) } else { site(other, i) };
            for j in 0..la {
                let sj = if axis == 0 { site(j, other) } else { site(other, j) };
                let pv = p[(i, j)] * eps;
                for a in 0..4 {
                    for b in 0..4 {
                        let mut v = kinetic[(a, b)] * pv;
                        if i == j {
                            v += mass_op[(a, b)] * mass[i];
                        }
                        if v != ZERO {
                            h[(4 * si + a, 4 * sj + b)] += v;
                        }
                    }
                }
            }
        }
    }
}

/// `H_D = eps sigma^z p + m(x) sigma^y` in one dimension, or
/// `H_Dx (x) tau^0 + sigma^x (x) H_Dy` with
/// `H_Dy = eps tau^z p_y + m_y(y) tau^y` in two.
pub fn build_dirac(
    dim: usize,
    lx: usize,
    ly: usize,
    mass_x: &MassProfile,
    mass_y: &MassProfile,
    epsilon: f64,
    scheme: DerivativeScheme,
) -> Result<LatticeHamiltonian> {
    match dim {
        1 => {
            let p = momentum_matrix(lx, scheme)?;
            let m = mass_x.sample(lx)?;
            Ok(LatticeHamiltonian {
                dim,
                lx,
                ly: 1,
                scheme,
                matrix: dirac_1d(&m, p.as_ref(), epsilon),
            })
        }
        2 => {
            let px = momentum_matrix(lx, scheme)?;
            let py = momentum_matrix(ly, scheme)?;
            let (mx, my) = (mass_x.sample(lx)?, mass_y.sample(ly)?);
            let n = 4 * lx * ly;
            let mut h = Mat::<c64>::zeros(n, n);
            add_axis_terms(
                &mut h,
                lx,
                ly,
                0,
                px.as_ref(),
                epsilon,
                internal(3, 0).as_ref(),
                internal(2, 0).as_ref(),
                &mx,
            );
            add_axis_terms(
                &mut h,
                lx,
                ly,
                1,
                py.as_ref(),
                epsilon,
                internal(1, 3).as_ref(),
                internal(1, 2).as_ref(),
                &my,
            );
            Ok(LatticeHamiltonian {
                dim,
                lx,
                ly,
                scheme,
                matrix: h,
            })
        }
        _ => Err(Error::InvalidArgument(format!(
            "Dirac dimension must be 1 or 2, got {dim}"
        ))),
    }
}

/// Kinetic and mass parts of the Dirac operator along one axis, in the
/// layout of [`build_dirac`]: `(eps sigma^z p, m sigma^y)` in one dimension,
/// `(eps sigma^z p_x, m_x sigma^y)` or `(eps sigma^x tau^z p_y,
/// m_y sigma^x tau^y)` in two.
pub fn axis_parts(
    dim: usize,
    lx: usize,
    ly: usize,
    axis: usize,
    mass: &MassProfile,
    epsilon: f64,
    scheme: DerivativeScheme,
) -> Result<(Mat<c64>, Mat<c64>)> {
    let l = if axis == 0 { lx } else { ly };
    let p = momentum_matrix(l, scheme)?;
    let m = mass.sample(l)?;
    let zeros = vec![0.0; l];
    if dim == 1 {
        let k = dirac_1d(&zeros, p.as_ref(), epsilon);
        let z = Mat::<c64>::zeros(l, l);
        let mm = dirac_1d(&m, z.as_ref(), epsilon);
        return Ok((k, mm));
    }
    let (kin, mop) = if axis == 0 {
        (internal(3, 0), internal(2, 0))
    } else {
        (internal(1, 3), internal(1, 2))
    };
    let n = 4 * lx * ly;
    let z4 = Mat::<c64>::zeros(4, 4);
    let zl = Mat::<c64>::zeros(l, l);
    let mut k = Mat::<c64>::zeros(n, n);
    add_axis_terms(
        &mut k,
        lx,
        ly,
        axis,
        p.as_ref(),
        epsilon,
        kin.as_ref(),
        z4.as_ref(),
        &zeros,
    );
    let mut mm = Mat::<c64>::zeros(n, n);
    add_axis_terms(
        &mut mm,
        lx,
        ly,
        axis,
        zl.as_ref(),
        epsilon,
        z4.as_ref(),
        mop.as_ref(),
        &m,
    );
    Ok((k, mm))
}

/// `eps^2 p^2 + m^2 - i eps sigma^x [p, m]` on `(x, s)`: the square of the 1D
/// Dirac operator written term by term.
pub fn schrodinger_1d(l: usize, mass: &MassProfile, epsilon: f64, scheme: DerivativeScheme) -> Result<Mat<c64>> {
    let p = momentum_matrix(l, scheme)?;
    let m = mass.sample(l)?;
    let p2 = &p * &p;
    let sx = pauli(1);
    Ok(Mat::from_fn(2 * l, 2 * l, |r, c| {
        let (i, a) = (r / 2, r % 2);
        let (j, b) = (c / 2, c % 2);
        let mut v = ZERO;
        if a == b {
            v += p2[(i, j)] * (epsilon * epsilon);
            if i == j {
                v += c64::new(m[i] * m[i], 0.0);
            }
        }
        let comm = p[(i, j)] * (m[j] - m[i]);
        v + c64::new(0.0, -epsilon) * sx[(a, b)] * comm
    }))
}

/// Embeds an operator on `(x, s)` as `O (x) tau^0`, or one on `(y, t)` as
/// `sigma^0 (x) O`, into the 2D layout.
fn embed_axis(o: MatRef<'_, c64>, lx: usize, ly: usize, axis: usize) -> Mat<c64> {
    let n = 4 * lx * ly;
    let mut h = Mat::<c64>::zeros(n, n);
    for iy in 0..ly {
        for ix in 0..lx {
            for t in 0..2 {
                for s in 0..2 {
                    let r = 4 * (iy * lx + ix) + s + 2 * t;
                    if axis == 0 {
                        for jx in 0..lx {
                            for s2 in 0..2 {
                                let c = 4 * (iy * lx + jx) + s2 + 2 * t;
                                h[(r, c)] = o[(2 * ix + s, 2 * jx + s2)];
                            }
                        }
                    } else {
                        for jy in 0..ly {
                            for t2 in 0..2 {
                                let c = 4 * (jy * lx + ix) + s + 2 * t2;
                                h[(r, c)] = o[(2 * iy + t, 2 * jy + t2)];
                            }
                        }
                    }
                }
            }
        }
    }
    h
}

/// `max |(H^(2))^2 - H_Sx (x) tau^0 - sigma^0 (x) H_Sy|`, with the Schrodinger
/// operators assembled from their components. Vanishes when every cross
/// term of the square cancels.
pub fn square_decomposition_check(
    h2: &LatticeHamiltonian,
    mass_x: &MassProfile,
    mass_y: &MassProfile,
    epsilon: f64,
) -> Result<f64> {
    if h2.dim != 2 {
        return Err(Error::InvalidArgument(
            "square decomposition needs a 2D Hamiltonian".into(),
        ));
    }
    let (lx, ly) = (h2.lx, h2.ly);
    let sx = schrodinger_1d(lx, mass_x, epsilon, h2.scheme)?;
    let sy = schrodinger_1d(ly, mass_y, epsilon, h2.scheme)?;
    let target = embed_axis(sx.as_ref(), lx, ly, 0) + embed_axis(sy.as_ref(), lx, ly, 1);
    let sq = &h2.matrix * &h2.matrix;
    Ok(max_abs((&sq - &target).as_ref()))
}

/// Row norms of the commutator term `-i eps sigma^x [p, m]` per site, which
/// concentrate at the discontinuities of a wall mass.
pub fn commutator_profile(l: usize, mass: &MassProfile, epsilon: f64, scheme: DerivativeScheme) -> Result<Vec<f64>> {
    let p = momentum_matrix(l, scheme)?;
    let m = mass.sample(l)?;
    Ok((0..l)
        .map(|i| {
            epsilon
                * (0..l)
                    .map(|j| (p[(i, j)] * (m[j] - m[i])).norm_sqr())
                    .sum::<f64>()
                    .sqrt()
        })
        .collect())
}

/// A cluster of nearly degenerate eigenvalues and the number of its states
/// that live in the centre of the lattice.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CentralCluster {
    pub energy: f64,
    pub size: usize,
    /// Trace of the projector onto `|x|, |y| <= radius` over the cluster.
    /// Invariant under any rotation within the degenerate subspace.
    pub central_weight: f64,
}

impl CentralCluster {
    pub fn central_count(&self) -> usize {
        self.central_weight.round() as usize
    }
}

/// Clusters of the spectrum (eigenvalues closer than `tol`) with central
/// weight at least one half, ascending in energy. Separates the oscillator
/// ladder from the states that periodic boundaries bind to the jump of a
/// linear mass.
pub fn central_clusters(h: &LatticeHamiltonian, radius: i64, tol: f64) -> Result<Vec<CentralCluster>> {
    let (vals, vecs) = crate::linalg::hermitian_eigen(h.matrix.as_ref())?;
    let n = vals.len();
    let inside: Vec<usize> = (0..n)
        .filter(|&i| {
            let (x, y) = h.coords(i);
            x.abs() <= radius && y.abs() <= radius
        })
        .collect();
    let weight = |j: usize| inside.iter().map(|&i| vecs[(i, j)].norm_sqr()).sum::<f64>();
    Ok(crate::linalg::clusters(&vals, tol)
        .into_iter()
        .map(|r| CentralCluster {
            energy: vals[r.clone()].iter().sum::<f64>() / r.len() as f64,
            size: r.len(),
            central_weight: r.clone().map(weight).sum(),
        })
        .filter(|c| c.central_weight >= 0.5)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::hermitian_eigenvalues;

    #[test]
    fn even_length_is_rejected() {
        let r = build_dirac(
            1,
            8,
            1,
            &MassProfile::Zero,
            &MassProfile::Zero,
            1.0,
            DerivativeScheme::Spectral,
        );
        assert!(matches!(r, Err(Error::InvalidLattice(_))));
    }

    #[test]
    fn spectral_derivative_is_exact_on_plane_waves() {
        let l = 9;
        let d = derivative_matrix(l, DerivativeScheme::Spectral).unwrap();
        for n in -4i64..=4 {
            let k = 2.0 * PI * n as f64 / l as f64;
            for i in 0..l {
                let got: c64 = (0..l).map(|j| c64::from_polar(1.0, k * j as f64) * d[(i, j)]).sum();
                let want = c64::new(0.0, k) * c64::from_polar(1.0, k * i as f64);
                assert!((got - want).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn free_dirac_spectrum() {
        let l = 9;
        let h = build_dirac(
            1,
            l,
            1,
            &MassProfile::Zero,
            &MassProfile::Zero,
            0.7,
            DerivativeScheme::Spectral,
        )
        .unwrap();
        let e = hermitian_eigenvalues(h.matrix.as_ref()).unwrap();
        let mut want: Vec<f64> = (-4i64..=4)
            .flat_map(|n| {
                let k = 2.0 * PI * n as f64 / l as f64;
                [0.7 * k, -0.7 * k]
            })
            .collect();
        want.sort_by(f64::total_cmp);
        for (a, b) in e.iter().zip(&want) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn massless_2d_spectrum_is_symmetric() {
        let h = build_dirac(
            2,
            5,
            5,
            &MassProfile::Zero,
            &MassProfile::Zero,
            1.0,
            DerivativeScheme::Spectral,
        )
        .unwrap();
        assert!(h.hermiticity() < 1e-12);
        let e = hermitian_eigenvalues(h.matrix.as_ref()).unwrap();
        let n = e.len();
        for i in 0..n {
            assert!((e[i] + e[n - 1 - i]).abs() < 1e-10);
        }
        // Square is eps^2 (p_x^2 + p_y^2): every level appears a multiple of
        // four times in the four-component space.
        for k in crate::linalg::clusters(&e, 1e-9) {
            assert_eq!(k.len() % 2, 0);
        }
    }

    #[test]
    fn squares_decompose() {
        for (mx, my) in [
            (MassProfile::Zero, MassProfile::Zero),
            (
                MassProfile::Linear { slope: PI / 20.0 },
                MassProfile::Linear { slope: 0.1 },
            ),
            (
                MassProfile::Wall {
                    inner: 0.5,
                    outer: -0.5,
                    l_wall: 3,
                },
                MassProfile::Wall {
                    inner: -0.4,
                    outer: 0.6,
                    l_wall: 2,
                },
            ),
        ] {
            for scheme in [DerivativeScheme::Spectral, DerivativeScheme::CentralDifference] {
                let h = build_dirac(2, 11, 9, &mx, &my, 0.8, scheme).unwrap();
                assert!(h.hermiticity() < 1e-12);
                let r = square_decomposition_check(&h, &mx, &my, 0.8).unwrap();
                assert!(r < 1e-10, "{mx:?} {scheme:?}: {r}");
            }
        }
    }

    #[test]
    fn commutator_peaks_at_walls() {
        let m = MassProfile::Wall {
            inner: 0.5,
            outer: -0.5,
            l_wall: 5,
        };
        let prof = commutator_profile(31, &m, 1.0, DerivativeScheme::CentralDifference).unwrap();
        let half = 15usize;
        // Nonzero only on the sites flanking x = +-5.5.
        for (i, v) in prof.iter().enumerate() {
            let x = i as i64 - half as i64;
            let flank = [5, 6, -5, -6].contains(&x);
            assert_eq!(*v > 0.0, flank, "x = {x}");
        }
        let spec = commutator_profile(31, &m, 1.0, DerivativeScheme::Spectral).unwrap();
        let peak = spec.iter().cloned().fold(0.0, f64::max);
        let at_wall = spec[half + 5].max(spec[half + 6]);
        assert_eq!(peak, at_wall.max(spec[half - 5]).max(spec[half - 6]));
    }
}
