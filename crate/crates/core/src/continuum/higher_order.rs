use faer::{c64, Mat, MatRef};

use super::dirac::{dirac_1d, momentum_matrix, DerivativeScheme, MassProfile};
use crate::linalg::{max_abs, pauli, ZERO};
use crate::{Error, Result};

/// Largest anticommutator or involution residual accepted by
/// [`build_higher_order`].
pub const ANTICOMMUTATION_LIMIT: f64 = 1e-10;

/// A one-axis Hamiltonian on `sites` lattice points with a two-level internal
/// factor, index `2 x + s`.
#[derive(Clone, Debug)]
pub struct ChiralBlock {
    pub sites: usize,
    pub h: Mat<c64>,
}

impl ChiralBlock {
    pub fn new(sites: usize, h: Mat<c64>) -> Result<Self> {
        if h.nrows() != 2 * sites || h.ncols() != 2 * sites {
            return Err(Error::LatticeMismatch {
                expected: format!("{0}x{0} block", 2 * sites),
                found: format!("{}x{}", h.nrows(), h.ncols()),
            });
        }
        Ok(Self { sites, h })
    }

    /// `eps v^z p + m(x) v^y`, the 1D Dirac form on every axis.
    pub fn dirac(sites: usize, mass: &MassProfile, epsilon: f64, scheme: DerivativeScheme) -> Result<Self> {
        let p = momentum_matrix(sites, scheme)?;
        let m = mass.sample(sites)?;
        Self::new(sites, dirac_1d(&m, p.as_ref(), epsilon))
    }

    /// `(I_sites (x) g) h + h (I_sites (x) g)`, max-norm.
    fn anticommutator(&self, g: MatRef<'_, c64>) -> f64 {
        let n = 2 * self.sites;
        let lift = |r: usize, c: usize| if r / 2 == c / 2 { g[(r % 2, c % 2)] } else { ZERO };
        let mut worst = 0f64;
        for r in 0..n {
            for c in 0..n {
                let mut v = ZERO;
                for k in (2 * (c / 2))..(2 * (c / 2) + 2) {
                    v += self.h[(r, k)] * lift(k, c);
                }
                for k in (2 * (r / 2))..(2 * (r / 2) + 2) {
                    v += lift(r, k) * self.h[(k, c)];
                }
                worst = worst.max(v.norm());
            }
        }
        worst
    }
}

/// Blocks `H_1..H_n` and chiral operators `Gamma_1..Gamma_{n-1}` (2x2).
#[derive(Clone, Debug)]
pub struct ChiralSet {
    pub blocks: Vec<ChiralBlock>,
    pub chirals: Vec<Mat<c64>>,
}

impl ChiralSet {
    /// Dirac blocks along each axis with `Gamma_1 = sigma^x`,
    /// `Gamma_2 = tau^x`, and so on.
    pub fn dirac(lengths: &[usize], masses: &[MassProfile], epsilon: f64, scheme: DerivativeScheme) -> Result<Self> {
        if lengths.len() != masses.len() || lengths.is_empty() {
            return Err(Error::InvalidArgument(format!(
                "{} lengths for {} mass profiles",
                lengths.len(),
                masses.len()
            )));
        }
        let blocks = lengths
            .iter()
            .zip(masses)
            .map(|(&l, m)| ChiralBlock::dirac(l, m, epsilon, scheme))
            .collect::<Result<_>>()?;
        Ok(Self {
            blocks,
            chirals: vec![pauli(1); lengths.len() - 1],
        })
    }
}

/// Residuals of the defining relations, indexed by `i`.
#[derive(Clone, Debug, PartialEq)]
pub struct ChiralReport {
    /// `||{Gamma_i, H_i}||_max`.
    pub anticommutators: Vec<f64>,
    /// `||Gamma_i^2 - I||_max`.
    pub involutions: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct HigherOrderHamiltonian {
    pub lengths: Vec<usize>,
    /// Index `site * 2^n + c` with `site = x_1 + L_1 (x_2 + L_2 (...))` and
    /// `c = s_1 + 2 s_2 + 4 s_3 + ...`.
    pub matrix: Mat<c64>,
    pub report: ChiralReport,
}

pub fn check_chiral_set(set: &ChiralSet) -> Result<ChiralReport> {
    let n = set.blocks.len();
    if !(1..=3).contains(&n) || set.chirals.len() + 1 != n {
        return Err(Error::InvalidArgument(format!(
            "need n in 1..=3 blocks and n - 1 chiral operators, got {} and {}",
            n,
            set.chirals.len()
        )));
    }
    let mut report = ChiralReport {
        anticommutators: Vec::new(),
        involutions: Vec::new(),
    };
    for (i, g) in set.chirals.iter().enumerate() {
        if g.nrows() != 2 || g.ncols() != 2 {
            return Err(Error::InvalidArgument(format!("Gamma_{} must be 2x2", i + 1)));
        }
        let sq = g * g - Mat::<c64>::identity(2, 2);
        report.involutions.push(max_abs(sq.as_ref()));
        report.anticommutators.push(set.blocks[i].anticommutator(g.as_ref()));
    }
    Ok(report)
}

/// `H_1 (x) 1 (x) ... + Gamma_1 (x) H_2 (x) ... + ... + Gamma_1 (x) ... (x)
/// Gamma_{n-1} (x) H_n`, every factor acting on its own axis and two-level
/// internal space.
pub fn build_higher_order(set: &ChiralSet) -> Result<HigherOrderHamiltonian> {
    let report = check_chiral_set(set)?;
    for (i, (&a, &q)) in report.anticommutators.iter().zip(&report.involutions).enumerate() {
        if a > ANTICOMMUTATION_LIMIT {
            return Err(Error::Anticommutation {
                pair: format!("{{Gamma_{0}, H_{0}}}", i + 1),
                residual: a,
            });
        }
        if q > ANTICOMMUTATION_LIMIT {
            return Err(Error::Anticommutation {
                pair: format!("Gamma_{0} Gamma_{0} - I", i + 1),
                residual: q,
            });
        }
    }
    let n = set.blocks.len();
    let lengths: Vec<usize> = set.blocks.iter().map(|b| b.sites).collect();
    let stride: Vec<usize> = lengths
        .iter()
        .scan(1, |acc, &l| {
            let s = *acc;
            *acc *= l;
            Some(s)
        })
        .collect();
    let sites: usize = lengths.iter().product();
    let internal = 1usize << n;
    let dim = sites * internal;
    let mut h = Mat::<c64>::zeros(dim, dim);
    let split = |index: usize| -> (Vec<usize>, Vec<usize>) {
        let (site, c) = (index / internal, index % internal);
        let xs = (0..n).map(|a| (site / stride[a]) % lengths[a]).collect();
        let ss = (0..n).map(|a| (c >> a) & 1).collect();
        (xs, ss)
    };
    for col in 0..dim {
        let (xc, sc) = split(col);
        for (i, block) in set.blocks.iter().enumerate() {
            let l = lengths[i];
            for xr in 0..l {
                for sr in 0..2 {
                    let v = block.h[(2 * xr + sr, 2 * xc[i] + sc[i])];
                    if v == ZERO {
                        continue;
                    }
                    // Axes before i carry Gamma, axes after i the identity.
                    let mut row_s = sc.clone();
                    row_s[i] = sr;
                    let mut targets = vec![(row_s, v)];
                    for (j, g) in set.chirals.iter().enumerate().take(i) {
                        targets = targets
                            .into_iter()
                            .flat_map(|(s, a)| {
                                let from = sc[j];
                                (0..2).filter_map(move |t| {
                                    let w = g[(t, from)];
                                    (w != ZERO).then(|| {
                                        let mut s2 = s.clone();
                                        s2[j] = t;
                                        (s2, a * w)
                                    })
                                })
                            })
                            .collect();
                    }
                    let mut site = 0;
                    for a in 0..n {
                        site += stride[a] * if a == i { xr } else { xc[a] };
                    }
                    for (s, a) in targets {
                        let c: usize = s.iter().enumerate().map(|(k, &b)| b << k).sum();
                        h[(site * internal + c, col)] += a;
                    }
                }
            }
        }
    }
    Ok(HigherOrderHamiltonian {
        lengths,
        matrix: h,
        report,
    })
}
