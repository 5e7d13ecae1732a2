//! The computations behind each task, returning data rather than files.

use std::f64::consts::PI;

use dtqw_core::continuum::{
    build_dirac, combined_state_residual, corner_product_overlap, jr_scattering, oscillator_ladder,
    square_decomposition_check, trotter_study, DerivativeScheme, LadderLevel, MassProfile, OracleParams, TrotterRun,
    TrotterSetup,
};
use dtqw_core::evolution::{run_dynamics, DynamicsResult, DynamicsSpec, InitialState};
use dtqw_core::linalg::wrap_angle;
use dtqw_core::operators::ProfileShape;
use dtqw_core::spectral::{
    block_states_near_zero, block_weight_near, bulk_angle_pairs, bulk_bands, bulk_gap_around_zero, bulk_values,
    commensurate_grid, fit_linear_branch, in_gap_states, momentum_block, near_unity_states, near_unity_states_dense,
    project_bands, sector_splitting, span_weight, spectrum_scan, uniform_grid, BandStructure, ChebyshevOptions,
    EdgeBranch, EigenpairSet, LinearFit, ProjectedBands, QuasiEnergySpectrum, Region, PROJECTION_SAMPLES,
};
use dtqw_core::symmetry::{
    check_energy_reflection, check_hamiltonian_symmetry, check_pi_shift_relation, check_sublattice_shift,
    check_tau_block_relation, check_walk_particle_hole, SymmetryKind, SymmetryOp,
};
use dtqw_core::{AngleProfile, LatticeSpec, ObservableSeries, StepOperator2D};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{ExperimentConfig, Solver};
use crate::error::{CliError, Result};

/// Largest side solved densely under [`Solver::Auto`].
pub const DENSE_SIDE_LIMIT: usize = 41;

pub fn step_operator(cfg: &ExperimentConfig) -> Result<StepOperator2D> {
    let lat = LatticeSpec::new(cfg.lattice.lx, cfg.lattice.ly)?;
    Ok(StepOperator2D::new(lat, cfg.profile_x()?, cfg.profile_y()?))
}

pub fn ky_grid(cfg: &ExperimentConfig) -> Vec<f64> {
    match cfg.spectrum.ky_points {
        0 => commensurate_grid(cfg.lattice.ly),
        n => uniform_grid(n),
    }
}

fn wall_position(p: &AngleProfile) -> Option<i64> {
    match p.shape {
        ProfileShape::DomainWall { l_wall, .. } => Some(l_wall),
        _ => None,
    }
}

// ---------------------------------------------------------------- dynamics

pub fn dynamics_spec(cfg: &ExperimentConfig) -> Result<DynamicsSpec> {
    let step = step_operator(cfg)?;
    // beta = b / dt with dt = 1.
    let ratio = match step.profile_x().shape {
        ProfileShape::LinearSaturated { b, .. } => b,
        _ => cfg.oracle_beta(),
    };
    let d = &cfg.dynamics;
    let mut spec = DynamicsSpec::new(step, InitialState::Gaussian { ratio }, d.t_max);
    spec.shift = (d.shift_x, d.shift_y);
    spec.kick = cfg.kick()?;
    spec.stride = d.stride;
    spec.refine = d.refine;
    spec.snapshots = d.snapshots.clone();
    Ok(spec)
}

pub fn dynamics(cfg: &ExperimentConfig) -> Result<DynamicsResult> {
    Ok(run_dynamics(&dynamics_spec(cfg)?)?)
}

/// Shape of the centre-of-mass trajectory and of the widths over windows.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OrbitSummary {
    pub window: (usize, usize),
    /// Whether every step turns the angle of `(<x>, <y>)` the same way.
    pub monotonic_winding: bool,
    pub turns: f64,
    pub r_min: f64,
    pub r_max: f64,
    pub width_window: (usize, usize),
    /// `max / min - 1` of `std_x` and `std_y`.
    pub std_x_variation: f64,
    pub std_y_variation: f64,
}

pub fn orbit_summary(series: &ObservableSeries, window: (usize, usize), width_window: (usize, usize)) -> OrbitSummary {
    let pts: Vec<(f64, f64)> = series
        .window(window.0, window.1)
        .map(|r| (r.mean_x, r.mean_y))
        .collect();
    let steps: Vec<f64> = pts
        .windows(2)
        .map(|w| wrap_angle(w[1].1.atan2(w[1].0) - w[0].1.atan2(w[0].0)))
        .collect();
    let monotonic = !steps.is_empty() && (steps.iter().all(|&d| d > 0.0) || steps.iter().all(|&d| d < 0.0));
    let radii: Vec<f64> = pts.iter().map(|(x, y)| x.hypot(*y)).collect();
    let variation = |f: fn(&dtqw_core::ObservableRecord) -> f64| {
        let v: Vec<f64> = series.window(width_window.0, width_window.1).map(f).collect();
        let (lo, hi) = v
            .iter()
            .fold((f64::INFINITY, 0.0f64), |(a, b), &x| (a.min(x), b.max(x)));
        hi / lo - 1.0
    };
    OrbitSummary {
        window,
        monotonic_winding: monotonic,
        turns: steps.iter().sum::<f64>() / (2.0 * PI),
        r_min: radii.iter().copied().fold(f64::INFINITY, f64::min),
        r_max: radii.iter().copied().fold(0.0, f64::max),
        width_window,
        std_x_variation: variation(|r| r.std_x),
        std_y_variation: variation(|r| r.std_y),
    }
}

// ---------------------------------------------------------------- spectra

/// A zero mode of the `k_y = 0` block and its weight near the walls.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WallMode {
    pub energy: f64,
    pub weight_left: f64,
    pub weight_right: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FitSummary {
    pub velocity: f64,
    pub relative_residual: f64,
    pub points: usize,
}

impl From<LinearFit> for FitSummary {
    fn from(f: LinearFit) -> Self {
        Self {
            velocity: f.velocity,
            relative_residual: f.relative_residual,
            points: f.points,
        }
    }
}

/// In-gap states at one momentum.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InGapEntry {
    pub ky: f64,
    pub energies: Vec<f64>,
    /// Openings of the projected bulk bands at this `k_y`.
    pub openings: Vec<(f64, f64)>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectrumAnalysis {
    #[serde(skip)]
    pub spectrum: QuasiEnergySpectrum,
    #[serde(skip)]
    pub branch: EdgeBranch,
    pub in_gap: Vec<InGapEntry>,
    pub in_gap_count: usize,
    /// Smallest `|E|` of the in-gap states at `k_y = 0`.
    pub min_abs_at_zero: Option<f64>,
    /// Distance from zero to the nearest state at `k_y = 0`, in-gap or bulk.
    pub gap_at_zero: Option<f64>,
    pub fit: Option<FitSummary>,
    pub splitting_ky: f64,
    /// Distance between the two `tau^z` branches; only for `theta_y = 0`.
    pub splitting: Option<f64>,
    pub energy_reflection: f64,
    pub wall_modes: Vec<WallMode>,
}

pub fn spectrum(cfg: &ExperimentConfig) -> Result<SpectrumAnalysis> {
    let op = step_operator(cfg)?;
    let grid = ky_grid(cfg);
    let spectrum = spectrum_scan(&op, &grid)?;
    let angles = bulk_angle_pairs(&op);
    let branch = in_gap_states(&spectrum, &angles, 0.0)?;
    let in_gap = branch
        .entries
        .iter()
        .map(|(ky, e)| {
            let openings = project_bands(&angles, *ky, PROJECTION_SAMPLES)?.openings();
            Ok(InGapEntry {
                ky: *ky,
                energies: e.clone(),
                openings,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let min_abs_at_zero = branch
        .min_abs()
        .into_iter()
        .find(|(ky, _)| ky.abs() < 1e-12)
        .and_then(|(_, m)| m);
    let gap_at_zero = spectrum
        .at(0.0)
        .map(|e| e.iter().map(|x| x.abs()).fold(f64::INFINITY, f64::min));
    let pts: Vec<(f64, f64)> = branch
        .min_abs()
        .into_iter()
        .filter(|(ky, _)| ky.abs() > 1e-12 && ky.abs() <= cfg.spectrum.fit_window + 1e-12)
        .filter_map(|(ky, m)| m.map(|m| (ky, m)))
        .collect();
    let fit = if pts.is_empty() {
        None
    } else {
        Some(fit_linear_branch(&pts)?.into())
    };
    let ky_s = cfg.splitting_ky();
    let splitting = if op.theta_y().iter().all(|&t| t == 0.0) {
        sector_splitting(&op, ky_s).ok()
    } else {
        None
    };
    let wall_modes = match wall_position(op.profile_x()) {
        Some(l) if spectrum.at(0.0).is_some() => {
            let block = momentum_block(&op, 0.0)?;
            block_states_near_zero(&block, cfg.spectrum.edge_window)?
                .into_iter()
                .map(|(energy, v)| WallMode {
                    energy,
                    weight_left: block_weight_near(&v, cfg.lattice.lx, &[-l], cfg.spectrum.wall_radius),
                    weight_right: block_weight_near(&v, cfg.lattice.lx, &[l], cfg.spectrum.wall_radius),
                })
                .collect()
        }
        _ => Vec::new(),
    };
    Ok(SpectrumAnalysis {
        energy_reflection: check_energy_reflection(&spectrum),
        in_gap_count: branch.count(),
        spectrum,
        branch,
        in_gap,
        min_abs_at_zero,
        gap_at_zero,
        fit,
        splitting_ky: ky_s,
        splitting,
        wall_modes,
    })
}

/// Probability along `x` of each `k_y = 0` block state within the window.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EdgeProfile {
    pub energy: f64,
    pub weight_left: f64,
    pub weight_right: f64,
    pub probability: Vec<f64>,
}

pub fn edge_profiles(cfg: &ExperimentConfig) -> Result<Vec<EdgeProfile>> {
    let op = step_operator(cfg)?;
    let l = wall_position(op.profile_x())
        .ok_or_else(|| CliError::Config("edge profiles need a wall in `walk.theta_x`".into()))?;
    let block = momentum_block(&op, 0.0)?;
    let lx = cfg.lattice.lx;
    Ok(block_states_near_zero(&block, cfg.spectrum.edge_window)?
        .into_iter()
        .map(|(energy, v)| EdgeProfile {
            energy,
            weight_left: block_weight_near(&v, lx, &[-l], cfg.spectrum.wall_radius),
            weight_right: block_weight_near(&v, lx, &[l], cfg.spectrum.wall_radius),
            probability: (0..lx)
                .map(|ix| v[4 * ix..4 * ix + 4].iter().map(|a| a.norm_sqr()).sum())
                .collect(),
        })
        .collect())
}

// ---------------------------------------------------------------- corners

#[derive(Clone, Debug, Serialize)]
pub struct CornerAnalysis {
    #[serde(skip)]
    pub set: EigenpairSet,
    pub method: String,
    pub iterations: usize,
    pub max_residual: f64,
    pub cluster_width: f64,
    /// Smallest `|E|` of the translation-invariant walks of the bulk regions.
    pub bulk_gap: f64,
    pub energies: Vec<f64>,
    /// States with `|E|` below both the window and the bulk gap.
    pub in_gap: usize,
    pub corner: Option<i64>,
    /// Mean weight of the in-gap states near the four corners.
    pub corner_weight: f64,
}

pub fn bulk_gap(op: &StepOperator2D) -> Result<f64> {
    let mut g = f64::INFINITY;
    for tx in bulk_values(op.profile_x()) {
        for ty in bulk_values(op.profile_y()) {
            g = g.min(bulk_gap_around_zero(tx, ty, 101)?);
        }
    }
    Ok(g)
}

pub fn corner_states(cfg: &ExperimentConfig) -> Result<CornerAnalysis> {
    let op = step_operator(cfg)?;
    let count = cfg.eigen.states;
    let dense = match cfg.eigen.solver {
        Solver::Dense => true,
        Solver::Chebyshev => false,
        Solver::Auto => cfg.lattice.lx.max(cfg.lattice.ly) <= DENSE_SIDE_LIMIT,
    };
    let set = if dense {
        near_unity_states_dense(&op, count)?
    } else {
        let opts = ChebyshevOptions {
            seed: cfg.run.seed,
            ..ChebyshevOptions::for_count(count)
        };
        near_unity_states(&op, count, opts)?
    };
    let gap = bulk_gap(&op)?;
    let keep: Vec<_> = set
        .pairs
        .iter()
        .filter(|p| p.energy.abs() < cfg.eigen.energy_window && p.energy.abs() < gap)
        .map(|p| p.state.clone())
        .collect();
    let corner = match (wall_position(op.profile_x()), wall_position(op.profile_y())) {
        (Some(a), Some(b)) if a == b => Some(a),
        _ => None,
    };
    let corner_weight = corner.map_or(0.0, |l| {
        span_weight(&keep, &Region::four_corners(l, l, cfg.eigen.corner_radius))
    });
    Ok(CornerAnalysis {
        method: set.method.clone(),
        iterations: set.iterations,
        max_residual: set.max_residual(),
        cluster_width: set.cluster_width,
        bulk_gap: gap,
        energies: set.energies(),
        in_gap: keep.len(),
        corner,
        corner_weight,
        set,
    })
}

// ---------------------------------------------------------------- bands

pub struct BandsReport {
    pub theta_x: f64,
    pub theta_y: f64,
    pub structure: BandStructure,
    /// `(k_x, k_y, bands)` along `k_x` in `{0, pi/2, pi}`.
    pub cross_sections: Vec<(f64, f64, [f64; 4])>,
    pub projection: Vec<ProjectedBands>,
}

fn uniform_angle(p: &AngleProfile, key: &str) -> Result<f64> {
    match (p.shape, p.noise) {
        (ProfileShape::Constant { theta }, None) => Ok(theta),
        _ => Err(CliError::Config(format!("bands need a constant `{key}`"))),
    }
}

pub fn bands(cfg: &ExperimentConfig) -> Result<Vec<BandsReport>> {
    let tx = uniform_angle(&cfg.profile_x()?, "walk.theta_x")?;
    let tys = match cfg.theta_y_sweep() {
        s if s.is_empty() => vec![uniform_angle(&cfg.profile_y()?, "walk.theta_y")?],
        s => s,
    };
    let grid = uniform_grid(cfg.bands.nk);
    tys.into_iter()
        .map(|ty| {
            let mut cross = Vec::new();
            for kx in [0.0, PI / 2.0, PI] {
                for &ky in &grid {
                    cross.push((kx, ky, bulk_bands(tx, ty, kx, ky)?));
                }
            }
            let projection = grid
                .iter()
                .map(|&ky| project_bands(&[(tx, ty)], ky, PROJECTION_SAMPLES))
                .collect::<dtqw_core::Result<_>>()?;
            Ok(BandsReport {
                theta_x: tx,
                theta_y: ty,
                structure: BandStructure::compute(tx, ty, &grid, &grid)?,
                cross_sections: cross,
                projection,
            })
        })
        .collect()
}

// ---------------------------------------------------------------- checks

/// One pass/fail record; every check is `residual < threshold`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub check: String,
    pub parameters: Value,
    pub residual: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl Check {
    pub fn new(check: impl Into<String>, parameters: Value, residual: f64, threshold: f64) -> Self {
        Self {
            check: check.into(),
            parameters,
            residual,
            threshold,
            pass: residual < threshold,
        }
    }
}

pub struct OracleReport {
    pub checks: Vec<Check>,
    pub ladder_1d: Vec<LadderLevel>,
    pub ladder_2d: Vec<LadderLevel>,
}

pub fn oracle_battery(cfg: &ExperimentConfig) -> Result<OracleReport> {
    let o = &cfg.oracle;
    let beta = cfg.oracle_beta();
    let params = OracleParams::new(1.0, beta, o.m0)?;
    let mut checks = Vec::new();
    let ladder_1d = oscillator_ladder(1, o.l_1d, &params, o.radius_1d, o.max_level)?;
    let ladder_2d = oscillator_ladder(2, o.l_2d, &params, o.radius_2d, o.max_level)?;
    for (dim, l, ladder) in [(1, o.l_1d, &ladder_1d), (2, o.l_2d, &ladder_2d)] {
        for lv in ladder {
            let p =
                json!({"dim": dim, "L": l, "beta": beta, "n": lv.n, "expected": lv.expected, "measured": lv.measured});
            if lv.n == 0 {
                checks.push(Check::new("oscillator zero level |E|", p, lv.measured.abs(), 1e-8));
            } else {
                checks.push(Check::new(
                    "oscillator level relative error",
                    p,
                    lv.relative_error(),
                    0.03,
                ));
            }
        }
    }
    for lv in ladder_2d.iter() {
        // N >= 1 holds 2N states per sign; N = 0 holds one.
        let want = if lv.n == 0 { 1 } else { 2 * lv.n };
        let got = [lv.count_positive, if lv.n == 0 { want } else { lv.count_negative }];
        let miss = got.iter().map(|&g| g.abs_diff(want)).max().unwrap_or(0);
        checks.push(Check::new(
            "oscillator 2D degeneracy",
            json!({"L": o.l_2d, "radius": o.radius_2d, "N": lv.n, "expected_per_sign": want,
                   "positive": lv.count_positive, "negative": lv.count_negative}),
            miss as f64,
            0.5,
        ));
    }
    let wall = MassProfile::Wall {
        inner: o.m0,
        outer: -o.m0,
        l_wall: 2,
    };
    let lin = MassProfile::Linear { slope: beta };
    let mut sq = 0.0f64;
    for (mx, my) in [(&lin, &lin), (&wall, &wall), (&lin, &wall)] {
        let h = build_dirac(2, 9, 9, mx, my, 1.0, DerivativeScheme::Spectral)?;
        sq = sq.max(square_decomposition_check(&h, mx, my, 1.0)?);
    }
    checks.push(Check::new("H_D^(2) squaring residual", json!({"L": 9}), sq, 1e-10));
    let mut flux = 0.0f64;
    for i in 1..=50 {
        let kx = 0.1 * i as f64;
        for m0 in [0.1, 0.5, 1.0, 2.0] {
            flux = flux.max((jr_scattering(kx, m0, 1.0)?.flux() - 1.0).abs());
        }
    }
    checks.push(Check::new(
        "Jackiw-Rebbi flux identity",
        json!({"kx": "0.1..5", "m0": [0.1, 0.5, 1.0, 2.0]}),
        flux,
        1e-14,
    ));
    let overlap = corner_product_overlap(o.wall_l, o.l_wall, o.m0, 1.0)?;
    checks.push(Check::new(
        "corner zero mode product overlap deficit",
        json!({"L": o.wall_l, "L_wall": o.l_wall, "m0": o.m0, "overlap": overlap}),
        1.0 - overlap,
        0.01,
    ));
    let pairs = [(17, 20), (3, 14), (25, 2)];
    let comb = combined_state_residual(15, &lin, &wall, 1.0, &pairs)?;
    checks.push(Check::new(
        "combine_2d eigenstate residual",
        json!({"L": 15, "pairs": pairs}),
        comb,
        1e-6,
    ));
    Ok(OracleReport {
        checks,
        ladder_1d,
        ladder_2d,
    })
}

pub fn trotter(cfg: &ExperimentConfig) -> Result<Vec<TrotterRun>> {
    let t = &cfg.trotter;
    let mass = MassProfile::Linear { slope: t.slope };
    let my = if t.dim == 2 { mass.clone() } else { MassProfile::Zero };
    let setup = TrotterSetup::gaussian(t.dim, t.l, mass, my, t.epsilon, t.width, (0.0, 0.0))?;
    Ok(trotter_study(&setup, &t.dts, t.t)?)
}

/// Symmetry suite on the configured wall (and its noisy twin), the small
/// assembled walk and the lattice Dirac Hamiltonian.
pub fn symmetry_report(cfg: &ExperimentConfig) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    let base = cfg.profile_x()?;
    let noisy = match base.noise {
        Some(_) => base,
        None => base.with_noise(0.25, 1),
    };
    let grid = ky_grid(cfg);
    for p in [base, noisy] {
        let mut c = cfg.clone();
        c.walk.theta_x = p.to_string();
        c.walk.theta_y = "0".into();
        let op = step_operator(&c)?;
        let s = spectrum_scan(&op, &grid)?;
        let params = json!({"theta_x": c.walk.theta_x, "theta_y": 0.0, "Lx": c.lattice.lx, "ky_points": grid.len()});
        out.push(Check::new(
            "spectrum E -> -E",
            params.clone(),
            check_energy_reflection(&s),
            1e-10,
        ));
        out.push(Check::new(
            "spectrum k_y -> k_y + pi",
            params.clone(),
            check_sublattice_shift(&s)?,
            1e-10,
        ));
        out.push(Check::new(
            "spectrum E(k_y + pi) = E(k_y) + pi",
            params.clone(),
            check_pi_shift_relation(&s)?,
            1e-10,
        ));
        let mut tb = 0.0f64;
        for &ky in grid.iter().step_by(10) {
            tb = tb.max(check_tau_block_relation(&op, ky)?);
        }
        out.push(Check::new("tau^z block relation", params, tb, 1e-10));
    }
    // Reality of the assembled walk on a small lattice.
    let small = LatticeSpec::square(15)?;
    for p in [
        AngleProfile::wall(PI / 3.0, -PI / 3.0, 3),
        AngleProfile::wall(PI / 3.0, -PI / 3.0, 3).with_noise(0.25, 1),
    ] {
        let op = StepOperator2D::new(small, p, AngleProfile::constant(0.0));
        out.push(Check::new(
            "walk matrix reality (particle-hole)",
            json!({"L": 15, "theta_x": p.to_string(), "theta_y": 0.0}),
            check_walk_particle_hole(&op)?,
            1e-14,
        ));
    }
    let wall = MassProfile::Wall {
        inner: 0.5,
        outer: -0.5,
        l_wall: 2,
    };
    let h = build_dirac(2, 9, 7, &wall, &MassProfile::Zero, 1.0, DerivativeScheme::Spectral)?;
    for (name, kind) in [
        ("H_D^(2) time reversal", SymmetryKind::TimeReversal),
        ("H_D^(2) particle-hole", SymmetryKind::ParticleHole),
        ("H_D^(2) chiral", SymmetryKind::Chiral),
    ] {
        out.push(Check::new(
            name,
            json!({"Lx": 9, "Ly": 7, "m_x": "wall 0.5/-0.5 at 2", "m_y": 0.0}),
            check_hamiltonian_symmetry(&h, &SymmetryOp::new(kind))?,
            1e-12,
        ));
    }
    Ok(out)
}
