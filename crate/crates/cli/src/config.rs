//! Experiment configuration: named presets, TOML files with one table per
//! section, `meta.json` echoes and command-line overrides.

use std::path::Path;

use dtqw_core::operators::parse_angle;
use dtqw_core::AngleProfile;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{CliError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Dynamics,
    Spectrum,
    EdgeProfiles,
    Eigenpairs,
    Bands,
    Oracle,
    Trotter,
    Symmetry,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Solver {
    /// Dense up to a side of 41, Chebyshev beyond.
    Auto,
    Dense,
    Chebyshev,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub preset: String,
    pub task: Task,
    /// Seeds the random start block of the Chebyshev solver. Noise seeds are
    /// part of the profile text.
    pub seed: u64,
    pub out_dir: String,
    pub csv: bool,
    pub json: bool,
    pub svg: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeSection {
    pub lx: usize,
    pub ly: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WalkSection {
    pub theta_x: String,
    pub theta_y: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DynamicsSection {
    pub t_max: usize,
    pub stride: usize,
    pub shift_x: i64,
    pub shift_y: i64,
    pub kick_x: String,
    pub kick_y: String,
    /// Iterations of `(1 + (U + U^dagger)/2)/2` on the Gaussian.
    pub refine: usize,
    /// Steps whose probability map is written as `prob_T<t>.csv`.
    pub snapshots: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumSection {
    /// Points of the uniform grid over `[-pi, pi]`; 0 selects `2 pi n / L_y`.
    pub ky_points: usize,
    /// Half-width of the `k_y` window of the linear fit.
    pub fit_window: f64,
    /// `k_y` at which the splitting of the two branches is reported.
    pub splitting_ky: String,
    /// Quasi-energy window for the edge-state profiles.
    pub edge_window: f64,
    /// Half-width in sites of the band around each wall.
    pub wall_radius: i64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EigenSection {
    pub states: usize,
    pub solver: Solver,
    /// Manhattan radius around the wall corners.
    pub corner_radius: i64,
    pub energy_window: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BandsSection {
    pub nk: usize,
    /// Extra `theta_y` values; when non-empty they replace `walk.theta_y`.
    pub theta_y_sweep: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrotterSection {
    pub dim: usize,
    pub l: usize,
    pub slope: f64,
    pub epsilon: f64,
    pub width: f64,
    pub t: f64,
    pub dts: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleSection {
    pub beta: String,
    pub l_1d: usize,
    pub l_2d: usize,
    pub radius_1d: i64,
    pub radius_2d: i64,
    pub max_level: usize,
    pub wall_l: usize,
    pub l_wall: i64,
    pub m0: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub run: RunSection,
    pub lattice: LatticeSection,
    pub walk: WalkSection,
    pub dynamics: DynamicsSection,
    pub spectrum: SpectrumSection,
    pub eigen: EigenSection,
    pub bands: BandsSection,
    pub trotter: TrotterSection,
    pub oracle: OracleSection,
}

pub const PRESETS: &[&str] = &[
    "fig1", "fig3", "fig2a", "fig2b", "fig2c", "fig5", "fig6", "fig7a", "fig7b", "fig7c", "bandsB1", "bandsB2",
    "bandsB3", "oracleA", "trotter", "symmetry",
];

const PROFILE_GRAMMAR: &str = "constant:<theta> | linear:<b>:<x_c>:<theta_sat> | \
     wall:<theta1>:<theta2>:<L>, optionally followed by +noise:<W>:<seed>";
const ANGLE_GRAMMAR: &str = "a decimal or a multiple of pi such as pi/3, -pi/20, 2pi/3";

const FIG1_POTENTIAL: &str = "linear:pi/20:5:pi/4";
const WALL: &str = "wall:pi/3:-pi/3:25";

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            run: RunSection {
                preset: "run".into(),
                task: Task::Dynamics,
                seed: 0x5eed,
                out_dir: "out".into(),
                csv: true,
                json: true,
                svg: true,
            },
            lattice: LatticeSection { lx: 101, ly: 101 },
            walk: WalkSection {
                theta_x: "constant:0".into(),
                theta_y: "constant:0".into(),
            },
            dynamics: DynamicsSection {
                t_max: 1000,
                stride: 1,
                shift_x: 0,
                shift_y: 0,
                kick_x: "0".into(),
                kick_y: "0".into(),
                refine: 0,
                snapshots: Vec::new(),
            },
            spectrum: SpectrumSection {
                ky_points: 101,
                fit_window: 0.2,
                splitting_ky: "pi/4".into(),
                edge_window: 1e-3,
                wall_radius: 5,
            },
            eigen: EigenSection {
                states: 8,
                solver: Solver::Auto,
                corner_radius: 5,
                energy_window: 0.05,
            },
            bands: BandsSection {
                nk: 101,
                theta_y_sweep: Vec::new(),
            },
            trotter: TrotterSection {
                dim: 1,
                l: 21,
                slope: 0.05,
                epsilon: 1.0,
                width: 2.0,
                t: 4.0,
                dts: vec![0.2, 0.1, 0.05],
            },
            oracle: OracleSection {
                beta: "pi/20".into(),
                l_1d: 101,
                l_2d: 21,
                radius_1d: 30,
                radius_2d: 7,
                max_level: 4,
                wall_l: 21,
                l_wall: 5,
                m0: 0.5,
            },
        }
    }
}

/// Configuration of a named preset.
pub fn preset(name: &str) -> Result<ExperimentConfig> {
    let mut c = ExperimentConfig::default();
    c.run.preset = name.to_string();
    c.run.out_dir = format!("out/{name}");
    let spectrum = |c: &mut ExperimentConfig, theta_x: &str, theta_y: &str| {
        c.run.task = Task::Spectrum;
        c.walk.theta_x = theta_x.into();
        c.walk.theta_y = theta_y.into();
    };
    match name {
        "fig1" | "fig3" => {
            c.walk.theta_x = FIG1_POTENTIAL.into();
            c.walk.theta_y = FIG1_POTENTIAL.into();
            c.dynamics.shift_x = 2;
            c.dynamics.kick_y = "pi".into();
        }
        "fig2a" => spectrum(&mut c, WALL, "0"),
        "fig2b" => spectrum(&mut c, WALL, "pi/50"),
        "fig2c" => spectrum(&mut c, &format!("{WALL}+noise:0.25:1"), "0"),
        "fig5" => {
            spectrum(&mut c, WALL, "0");
            c.run.task = Task::EdgeProfiles;
        }
        "fig6" => {
            c.run.task = Task::Eigenpairs;
            c.walk.theta_x = WALL.into();
            c.walk.theta_y = WALL.into();
        }
        "fig7a" => spectrum(&mut c, WALL, "pi/6"),
        "fig7b" => spectrum(&mut c, WALL, "pi/4"),
        "fig7c" => spectrum(&mut c, WALL, "pi/3"),
        "bandsB1" | "bandsB2" | "bandsB3" => {
            c.run.task = Task::Bands;
            c.walk.theta_x = "pi/3".into();
            c.walk.theta_y = if name == "bandsB2" { "pi/3" } else { "0" }.into();
            if name == "bandsB3" {
                c.bands.theta_y_sweep = ["0", "pi/12", "pi/6", "pi/4", "pi/3"].map(String::from).to_vec();
            }
        }
        "oracleA" => c.run.task = Task::Oracle,
        "trotter" => c.run.task = Task::Trotter,
        "symmetry" => {
            c.run.task = Task::Symmetry;
            c.walk.theta_x = WALL.into();
        }
        _ => {
            return Err(CliError::UnknownPreset {
                name: name.to_string(),
                available: PRESETS.join(", "),
            })
        }
    }
    Ok(c)
}

/// Command-line values that take precedence over the file.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Overrides {
    pub out_dir: Option<String>,
    pub seed: Option<u64>,
    pub lx: Option<usize>,
    pub ly: Option<usize>,
    pub theta_x: Option<String>,
    pub theta_y: Option<String>,
    pub t_max: Option<usize>,
    pub stride: Option<usize>,
    pub shift_x: Option<i64>,
    pub shift_y: Option<i64>,
    pub kick_x: Option<String>,
    pub kick_y: Option<String>,
    pub refine: Option<usize>,
    pub ky_points: Option<usize>,
    pub states: Option<usize>,
    pub solver: Option<Solver>,
    pub no_csv: bool,
    pub no_json: bool,
    pub no_svg: bool,
}

impl Overrides {
    fn apply(&self, c: &mut ExperimentConfig) {
        fn set<T: Clone>(dst: &mut T, v: &Option<T>) {
            if let Some(v) = v {
                *dst = v.clone();
            }
        }
        set(&mut c.run.out_dir, &self.out_dir);
        set(&mut c.run.seed, &self.seed);
        set(&mut c.lattice.lx, &self.lx);
        set(&mut c.lattice.ly, &self.ly);
        set(&mut c.walk.theta_x, &self.theta_x);
        set(&mut c.walk.theta_y, &self.theta_y);
        set(&mut c.dynamics.t_max, &self.t_max);
        set(&mut c.dynamics.stride, &self.stride);
        set(&mut c.dynamics.shift_x, &self.shift_x);
        set(&mut c.dynamics.shift_y, &self.shift_y);
        set(&mut c.dynamics.kick_x, &self.kick_x);
        set(&mut c.dynamics.kick_y, &self.kick_y);
        set(&mut c.dynamics.refine, &self.refine);
        set(&mut c.spectrum.ky_points, &self.ky_points);
        set(&mut c.eigen.states, &self.states);
        set(&mut c.eigen.solver, &self.solver);
        c.run.csv &= !self.no_csv;
        c.run.json &= !self.no_json;
        c.run.svg &= !self.no_svg;
    }
}

fn merge(base: &mut Value, file: &Value, path: &str) -> Result<()> {
    let (Value::Object(b), Value::Object(f)) = (&mut *base, file) else {
        *base = file.clone();
        return Ok(());
    };
    for (k, v) in f {
        let key = if path.is_empty() {
            k.clone()
        } else {
            format!("{path}.{k}")
        };
        match b.get_mut(k) {
            None => return Err(CliError::Config(format!("unknown key `{key}`"))),
            Some(slot) if slot.is_object() != v.is_object() => {
                return Err(CliError::Config(format!(
                    "key `{key}` must be {}",
                    if slot.is_object() { "a section" } else { "a value" }
                )))
            }
            Some(slot) => merge(slot, v, &key)?,
        }
    }
    Ok(())
}

/// Reads a TOML config file, or the `config` member of a `meta.json`.
pub fn read_config_file(path: &Path) -> Result<Value> {
    let text = std::fs::read_to_string(path).map_err(CliError::io(path))?;
    if path.extension().is_some_and(|e| e == "json") {
        let mut v: Value =
            serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        return v
            .get_mut("config")
            .map(Value::take)
            .ok_or_else(|| CliError::Config(format!("{}: no `config` member", path.display())));
    }
    let t: toml::Table = toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    serde_json::to_value(t).map_err(|e| CliError::Config(e.to_string()))
}

/// Resolves the configuration for `target` (a preset name or `run`):
/// preset defaults, then the file, then the flags.
pub fn parse_config(target: &str, file: Option<&Value>, flags: &Overrides) -> Result<ExperimentConfig> {
    let name = match (target, file) {
        ("run", Some(f)) => f
            .pointer("/run/preset")
            .and_then(Value::as_str)
            .unwrap_or("run")
            .to_string(),
        _ => target.to_string(),
    };
    let base = match name.as_str() {
        "run" => ExperimentConfig::default(),
        n => preset(n)?,
    };
    let mut merged = serde_json::to_value(&base).expect("config serializes");
    if let Some(f) = file {
        merge(&mut merged, f, "")?;
    }
    let mut cfg: ExperimentConfig = serde_json::from_value(merged).map_err(|e| CliError::Config(e.to_string()))?;
    flags.apply(&mut cfg);
    cfg.validate()?;
    Ok(cfg)
}

fn profile(key: &str, text: &str) -> Result<AngleProfile> {
    text.parse()
        .map_err(|_| CliError::Config(format!("`{key}` = '{text}': expected {PROFILE_GRAMMAR}")))
}

fn angle(key: &str, text: &str) -> Result<f64> {
    parse_angle(text).map_err(|_| CliError::Config(format!("`{key}` = '{text}': expected {ANGLE_GRAMMAR}")))
}

fn odd(key: &str, v: usize) -> Result<()> {
    if v < 3 || v.is_multiple_of(2) {
        return Err(CliError::Config(format!("`{key}` = {v}: expected an odd integer >= 3")));
    }
    Ok(())
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        odd("lattice.lx", self.lattice.lx)?;
        odd("lattice.ly", self.lattice.ly)?;
        self.profile_x()?;
        self.profile_y()?;
        self.kick()?;
        angle("spectrum.splitting_ky", &self.spectrum.splitting_ky)?;
        angle("oracle.beta", &self.oracle.beta)?;
        for (i, t) in self.bands.theta_y_sweep.iter().enumerate() {
            angle(&format!("bands.theta_y_sweep[{i}]"), t)?;
        }
        if self.dynamics.stride == 0 {
            return Err(CliError::Config(
                "`dynamics.stride` = 0: expected an integer >= 1".into(),
            ));
        }
        odd("oracle.l_1d", self.oracle.l_1d)?;
        odd("oracle.l_2d", self.oracle.l_2d)?;
        odd("oracle.wall_l", self.oracle.wall_l)?;
        odd("trotter.l", self.trotter.l)?;
        Ok(())
    }

    pub fn profile_x(&self) -> Result<AngleProfile> {
        profile("walk.theta_x", &self.walk.theta_x)
    }

    pub fn profile_y(&self) -> Result<AngleProfile> {
        profile("walk.theta_y", &self.walk.theta_y)
    }

    pub fn kick(&self) -> Result<(f64, f64)> {
        Ok((
            angle("dynamics.kick_x", &self.dynamics.kick_x)?,
            angle("dynamics.kick_y", &self.dynamics.kick_y)?,
        ))
    }

    pub fn splitting_ky(&self) -> f64 {
        parse_angle(&self.spectrum.splitting_ky).expect("validated")
    }

    pub fn oracle_beta(&self) -> f64 {
        parse_angle(&self.oracle.beta).expect("validated")
    }

    pub fn theta_y_sweep(&self) -> Vec<f64> {
        self.bands
            .theta_y_sweep
            .iter()
            .map(|t| parse_angle(t).expect("validated"))
            .collect()
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_preset_validates() {
        for p in PRESETS {
            preset(p).unwrap().validate().unwrap();
        }
        assert!(matches!(preset("fig9"), Err(CliError::UnknownPreset { .. })));
    }

    #[test]
    fn merge_rejects_unknown_keys() {
        let f = serde_json::json!({"walk": {"theta_z": "0"}});
        let e = parse_config("fig1", Some(&f), &Overrides::default()).unwrap_err();
        assert!(e.to_string().contains("walk.theta_z"), "{e}");
    }
}
