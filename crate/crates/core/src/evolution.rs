//! Initial-state preparation and time stepping.

use faer::c64;

use crate::lattice::{Component, ObservableRecord, ObservableSeries, SpinorField2D};
use crate::linalg::ZERO;
use crate::operators::StepOperator2D;
use crate::{Error, Result};

/// Largest probability tolerated on the outermost ring of sites.
pub const TAIL_LIMIT: f64 = 1e-8;

/// Recipe for the state before shift and kick.
#[derive(Clone, Debug, PartialEq)]
pub enum InitialState {
    /// `(-1, 1) (x) (-1, 1) exp(-r (x^2 + y^2) / 2)` with `r = beta / epsilon`.
    Gaussian {
        ratio: f64,
    },
    Basis {
        x: i64,
        y: i64,
        c: Component,
    },
    /// An explicit state, for example read from a dump.
    Field(SpinorField2D),
}

/// Everything needed to reproduce one dynamics run.
#[derive(Clone, Debug)]
pub struct DynamicsSpec {
    pub step: StepOperator2D,
    pub initial: InitialState,
    pub shift: (i64, i64),
    pub kick: (f64, f64),
    pub t_max: usize,
    pub stride: usize,
    /// Iterations of `(1 + (U + U^dagger)/2)/2` applied before shift and kick.
    pub refine: usize,
    /// Steps at which the full state is kept.
    pub snapshots: Vec<usize>,
}

impl DynamicsSpec {
    pub fn new(step: StepOperator2D, initial: InitialState, t_max: usize) -> Self {
        Self {
            step,
            initial,
            shift: (0, 0),
            kick: (0.0, 0.0),
            t_max,
            stride: 1,
            refine: 0,
            snapshots: Vec::new(),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.t_max < 1 {
            return Err(Error::InvalidArgument("T_max must be at least 1".into()));
        }
        if self.stride < 1 {
            return Err(Error::InvalidArgument("record stride must be at least 1".into()));
        }
        Ok(())
    }
}

/// Probability on the sites with `|x| = L_x/2` or `|y| = L_y/2`.
pub fn boundary_mass(state: &SpinorField2D) -> f64 {
    let lat = state.lattice();
    let p = state.probability_map();
    let mut tail = 0.0;
    for iy in 0..lat.ly() {
        for ix in 0..lat.lx() {
            if ix == 0 || iy == 0 || ix + 1 == lat.lx() || iy + 1 == lat.ly() {
                tail += p[lat.site(ix, iy)];
            }
        }
    }
    tail
}

/// The normalized Gaussian zero mode `(-1,1) (x) (-1,1) exp(-r (x^2+y^2)/2)`.
pub fn gaussian_zero_mode(lattice: crate::LatticeSpec, ratio: f64) -> Result<SpinorField2D> {
    if ratio <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "Gaussian ratio {ratio} must be positive"
        )));
    }
    let mut s = SpinorField2D::zeros(lattice);
    let signs = [1.0, -1.0, -1.0, 1.0];
    for iy in 0..lattice.ly() {
        let y = lattice.coord_y(iy) as f64;
        for ix in 0..lattice.lx() {
            let x = lattice.coord_x(ix) as f64;
            let g = (-ratio * (x * x + y * y) / 2.0).exp();
            let base = lattice.amp_index(ix, iy, 0);
            for (c, sg) in signs.iter().enumerate() {
                s.amplitudes_mut()[base + c] = c64::new(sg * g, 0.0);
            }
        }
    }
    s.normalize();
    let tail = boundary_mass(&s);
    if tail > TAIL_LIMIT {
        return Err(Error::TailTooLarge {
            tail,
            limit: TAIL_LIMIT,
        });
    }
    Ok(s)
}

/// `||U psi - psi||`.
pub fn unit_residual(op: &StepOperator2D, psi: &SpinorField2D) -> Result<f64> {
    let u = op.apply(psi)?;
    Ok(u.amplitudes()
        .iter()
        .zip(psi.amplitudes())
        .map(|(a, b)| (a - b).norm_sqr())
        .sum::<f64>()
        .sqrt())
}

/// Pushes `psi` toward the eigenvalue-one eigenspace of `U` by repeated
/// application of `(1 + (U + U^dagger)/2)/2` with renormalization.
///
/// Returns the refined state and the residuals `||U psi - psi||` before the
/// first and after every iteration. The operator is positive semi-definite
/// with top eigenvalue one on that eigenspace, so the residual cannot grow.
pub fn refine_unit_eigenstate(
    op: &StepOperator2D,
    psi: &SpinorField2D,
    iterations: usize,
) -> Result<(SpinorField2D, Vec<f64>)> {
    let n = psi.amplitudes().len();
    let mut cur = psi.clone();
    cur.normalize();
    let mut fwd = vec![ZERO; n];
    let mut bwd = vec![ZERO; n];
    let mut tmp = vec![ZERO; n];
    let mut history = vec![unit_residual(op, &cur)?];
    for _ in 0..iterations {
        op.apply_into(cur.amplitudes(), &mut fwd, &mut tmp);
        op.apply_adjoint_into(cur.amplitudes(), &mut bwd, &mut tmp);
        for ((a, f), b) in cur.amplitudes_mut().iter_mut().zip(&fwd).zip(&bwd) {
            *a = *a * 0.5 + (f + b) * 0.25;
        }
        cur.normalize();
        history.push(unit_residual(op, &cur)?);
    }
    Ok((cur, history))
}

/// Builds the initial state: recipe, optional refinement, translation, kick.
pub fn prepare_initial_state(spec: &DynamicsSpec) -> Result<SpinorField2D> {
    let lat = *spec.step.lattice();
    let mut psi = match &spec.initial {
        InitialState::Gaussian { ratio } => gaussian_zero_mode(lat, *ratio)?,
        InitialState::Basis { x, y, c } => {
            if x.abs() > lat.half_x() || y.abs() > lat.half_y() {
                return Err(Error::OutOfRange {
                    x: if x.abs() > lat.half_x() { *x } else { *y },
                    half: lat.half_x().max(lat.half_y()),
                });
            }
            SpinorField2D::basis(lat, *x, *y, *c)
        }
        InitialState::Field(f) => {
            if *f.lattice() != lat {
                return Err(Error::LatticeMismatch {
                    expected: lat.describe(),
                    found: f.lattice().describe(),
                });
            }
            let mut f = f.clone();
            f.normalize();
            f
        }
    };
    if spec.refine > 0 {
        psi = refine_unit_eigenstate(&spec.step, &psi, spec.refine)?.0;
    }
    let psi = psi.translate(spec.shift.0, spec.shift.1);
    Ok(psi.apply_phase_kick(spec.kick.0, spec.kick.1))
}

/// Output of [`run_dynamics`].
#[derive(Clone, Debug)]
pub struct DynamicsResult {
    pub series: ObservableSeries,
    pub snapshots: Vec<(usize, SpinorField2D)>,
    /// `max_T | ||psi(T)|| - 1 |` over all steps.
    pub max_norm_drift: f64,
    pub final_state: SpinorField2D,
}

/// Repeatedly applies the walk and records the position moments at
/// `T = 0, stride, 2 stride, ...` and at `T_max`.
pub fn run_dynamics(spec: &DynamicsSpec) -> Result<DynamicsResult> {
    spec.validate()?;
    let psi0 = prepare_initial_state(spec)?;
    let n = psi0.amplitudes().len();
    let lat = *psi0.lattice();
    let mut cur = psi0.into_vec();
    let mut next = vec![ZERO; n];
    let mut tmp = vec![ZERO; n];
    let mut series = ObservableSeries::default();
    let mut snapshots = Vec::new();
    let mut drift = 0.0f64;
    let mut state = SpinorField2D::from_vec(lat, cur.clone())?;
    for t in 0..=spec.t_max {
        if t > 0 {
            spec.step.apply_into(&cur, &mut next, &mut tmp);
            std::mem::swap(&mut cur, &mut next);
        }
        let record = t % spec.stride == 0 || t == spec.t_max;
        let snap = spec.snapshots.contains(&t);
        let norm = cur.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        drift = drift.max((norm - 1.0).abs());
        if record || snap || t == spec.t_max {
            state.amplitudes_mut().copy_from_slice(&cur);
        }
        if record {
            series.push(ObservableRecord::new(t, state.position_moments()?));
        }
        if snap {
            snapshots.push((t, state.clone()));
        }
    }
    Ok(DynamicsResult {
        series,
        snapshots,
        max_norm_drift: drift,
        final_state: state,
    })
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::lattice::LatticeSpec;
    use crate::operators::AngleProfile;

    fn fig1_step(l: usize) -> StepOperator2D {
        let p = AngleProfile::linear(PI / 20.0, 5.0, PI / 4.0);
        StepOperator2D::new(LatticeSpec::square(l).unwrap(), p, p)
    }

    #[test]
    fn gaussian_has_sign_pattern_and_zero_mean() {
        let spec = DynamicsSpec::new(fig1_step(51), InitialState::Gaussian { ratio: PI / 20.0 }, 1);
        let psi = prepare_initial_state(&spec).unwrap();
        assert!((psi.norm_sqr() - 1.0).abs() < 1e-12);
        let m = psi.position_moments().unwrap();
        assert!(m.mean_x.abs() < 1e-12 && m.mean_y.abs() < 1e-12);
        let a = psi.get(2, -1, Component::LD);
        for (c, sg) in Component::ALL.iter().zip([1.0, -1.0, -1.0, 1.0]) {
            assert!((psi.get(2, -1, *c) - a * sg).norm() < 1e-15);
        }
    }

    #[test]
    fn shifted_gaussian_mean() {
        let mut spec = DynamicsSpec::new(fig1_step(51), InitialState::Gaussian { ratio: PI / 20.0 }, 1);
        spec.shift = (2, 0);
        let m = prepare_initial_state(&spec).unwrap().position_moments().unwrap();
        assert!((m.mean_x - 2.0).abs() < 1e-10);
    }

    #[test]
    fn wide_gaussian_is_rejected() {
        let r = gaussian_zero_mode(LatticeSpec::square(11).unwrap(), 0.01);
        assert!(matches!(r, Err(Error::TailTooLarge { .. })));
    }

    #[test]
    fn refinement_residual_is_monotone() {
        let op = fig1_step(51);
        let g = gaussian_zero_mode(*op.lattice(), PI / 20.0).unwrap();
        let (_, hist) = refine_unit_eigenstate(&op, &g, 30).unwrap();
        for w in hist.windows(2) {
            assert!(w[1] <= w[0] * (1.0 + 1e-12), "{hist:?}");
        }
        assert!(hist.last().unwrap() < &hist[0]);
    }

    #[test]
    fn unkicked_gaussian_stays_centred() {
        let spec = DynamicsSpec::new(fig1_step(51), InitialState::Gaussian { ratio: PI / 20.0 }, 100);
        let res = run_dynamics(&spec).unwrap();
        for r in &res.series.records {
            assert!(r.mean_x.abs() < 1e-8 && r.mean_y.abs() < 1e-8, "{r:?}");
        }
        assert!(res.max_norm_drift < 1e-12);
    }

    #[test]
    fn stride_and_snapshots() {
        let mut spec = DynamicsSpec::new(
            fig1_step(21),
            InitialState::Basis {
                x: 0,
                y: 0,
                c: Component::LD,
            },
            10,
        );
        spec.stride = 4;
        spec.snapshots = vec![3];
        let res = run_dynamics(&spec).unwrap();
        let ts: Vec<usize> = res.series.records.iter().map(|r| r.t).collect();
        assert_eq!(ts, vec![0, 4, 8, 10]);
        assert_eq!(res.snapshots.len(), 1);
        assert_eq!(res.snapshots[0].0, 3);
    }

    #[test]
    fn invalid_spec_is_rejected() {
        let mut spec = DynamicsSpec::new(fig1_step(21), InitialState::Gaussian { ratio: 1.0 }, 0);
        assert!(run_dynamics(&spec).is_err());
        spec.t_max = 3;
        spec.stride = 0;
        assert!(run_dynamics(&spec).is_err());
    }
}
