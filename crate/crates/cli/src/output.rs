//! Files of a run. Every file is written to a temporary sibling and renamed
//! into place.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use dtqw_core::fmt_f64;
use serde::Serialize;
use serde_json::json;

use crate::config::{ExperimentConfig, Task};
use crate::error::{CliError, Result};
use crate::pipeline;
use crate::svg::{render, Style};

pub struct OutputDir {
    root: PathBuf,
    written: Vec<PathBuf>,
}

impl OutputDir {
    pub fn create(root: impl Into<PathBuf>) -> Result<Self> {
        let root = root.into();
        std::fs::create_dir_all(&root).map_err(CliError::io(&root))?;
        Ok(Self {
            root,
            written: Vec::new(),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }

    pub fn write(&mut self, rel: &str, bytes: &[u8]) -> Result<()> {
        let path = self.root.join(rel);
        let dir = path.parent().unwrap_or(&self.root).to_path_buf();
        std::fs::create_dir_all(&dir).map_err(CliError::io(&dir))?;
        let name = path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default();
        let tmp = dir.join(format!(".{name}.tmp"));
        let mut f = std::fs::File::create(&tmp).map_err(CliError::io(&tmp))?;
        f.write_all(bytes)
            .and_then(|_| f.sync_all())
            .map_err(CliError::io(&tmp))?;
        std::fs::rename(&tmp, &path).map_err(CliError::io(&path))?;
        self.written.push(path);
        Ok(())
    }

    pub fn write_with(&mut self, rel: &str, f: impl FnOnce(&mut Vec<u8>) -> dtqw_core::Result<()>) -> Result<()> {
        let mut buf = Vec::new();
        f(&mut buf)?;
        self.write(rel, &buf)
    }

    pub fn json<T: Serialize + ?Sized>(&mut self, rel: &str, v: &T) -> Result<()> {
        let mut s = serde_json::to_string_pretty(v).map_err(|e| CliError::Config(e.to_string()))?;
        s.push('\n');
        self.write(rel, s.as_bytes())
    }
}

/// `meta.json`: enough to rerun the experiment with `dtqw run --config`.
pub fn meta(cfg: &ExperimentConfig) -> serde_json::Value {
    json!({
        "tool": "dtqw",
        "version": env!("CARGO_PKG_VERSION"),
        "preset": cfg.run.preset,
        "seed": cfg.run.seed,
        "config": cfg,
    })
}

fn csv_rows(header: &str, rows: impl IntoIterator<Item = Vec<String>>) -> Vec<u8> {
    let mut s = String::from(header);
    s.push('\n');
    for r in rows {
        s.push_str(&r.join(","));
        s.push('\n');
    }
    s.into_bytes()
}

fn f(v: f64) -> String {
    fmt_f64(v)
}

/// Runs the configured task and writes its files, `meta.json` and `run.log`.
pub fn execute(cfg: &ExperimentConfig, out: &mut OutputDir) -> Result<()> {
    let start = Instant::now();
    let run = &cfg.run;
    match run.task {
        Task::Dynamics => {
            let r = pipeline::dynamics(cfg)?;
            let t = cfg.dynamics.t_max;
            let summary = pipeline::orbit_summary(&r.series, (t / 2, t), (t * 3 / 5, t));
            if run.csv {
                out.write_with("dynamics.csv", |w| r.series.write_csv(w))?;
                for (t, s) in &r.snapshots {
                    out.write_with(&format!("prob_T{t}.csv"), |w| s.write_probability_csv(w))?;
                }
            }
            if run.json {
                out.json(
                    "summary.json",
                    &json!({"max_norm_drift": r.max_norm_drift, "orbit": summary}),
                )?;
            }
            if run.svg {
                let orbit = vec![r.series.records.iter().map(|x| (x.mean_x, x.mean_y)).collect()];
                out.write(
                    "dynamics.svg",
                    render("centre of mass", "<x>", "<y>", &orbit, Style::Line).as_bytes(),
                )?;
                let widths = vec![
                    r.series.records.iter().map(|x| (x.t as f64, x.std_x)).collect(),
                    r.series.records.iter().map(|x| (x.t as f64, x.std_y)).collect(),
                ];
                out.write(
                    "widths.svg",
                    render("widths", "T", "std", &widths, Style::Line).as_bytes(),
                )?;
            }
        }
        Task::Spectrum => {
            let a = pipeline::spectrum(cfg)?;
            if run.csv {
                out.write_with("spectrum.csv", |w| a.spectrum.write_csv(w))?;
                let rows = a
                    .branch
                    .entries
                    .iter()
                    .flat_map(|(ky, es)| es.iter().map(move |e| vec![f(*ky), f(*e)]));
                out.write("in_gap.csv", &csv_rows("ky,E", rows))?;
            }
            if run.json {
                out.json("summary.json", &a)?;
            }
            if run.svg {
                let pts = vec![a
                    .spectrum
                    .entries
                    .iter()
                    .flat_map(|(ky, es)| es.iter().map(move |e| (*ky, *e)))
                    .collect()];
                out.write(
                    "spectrum.svg",
                    render("quasi-energy spectrum", "k_y", "E", &pts, Style::Scatter).as_bytes(),
                )?;
            }
        }
        Task::EdgeProfiles => {
            let profiles = pipeline::edge_profiles(cfg)?;
            let half = (cfg.lattice.lx / 2) as i64;
            if run.csv {
                let rows = profiles.iter().enumerate().flat_map(|(i, p)| {
                    p.probability
                        .iter()
                        .enumerate()
                        .map(move |(ix, v)| vec![i.to_string(), f(p.energy), (ix as i64 - half).to_string(), f(*v)])
                });
                out.write("edge_profiles.csv", &csv_rows("state,E,x,P", rows))?;
            }
            if run.json {
                let s: Vec<_> = profiles
                    .iter()
                    .map(|p| json!({"E": p.energy, "weight_left": p.weight_left, "weight_right": p.weight_right}))
                    .collect();
                out.json("summary.json", &s)?;
            }
            if run.svg {
                let series: Vec<Vec<(f64, f64)>> = profiles
                    .iter()
                    .map(|p| {
                        p.probability
                            .iter()
                            .enumerate()
                            .map(|(ix, v)| ((ix as i64 - half) as f64, *v))
                            .collect()
                    })
                    .collect();
                out.write(
                    "edge_profiles.svg",
                    render("edge states at k_y = 0", "x", "P", &series, Style::Line).as_bytes(),
                )?;
            }
        }
        Task::Eigenpairs => {
            let a = pipeline::corner_states(cfg)?;
            let region = a
                .corner
                .map(|l| dtqw_core::spectral::Region::four_corners(l, l, cfg.eigen.corner_radius));
            let mut index = Vec::new();
            for (i, p) in a.set.pairs.iter().enumerate() {
                if run.csv {
                    out.write_with(&format!("eigenpairs/state_{i}.csv"), |w| p.state.write_csv(w))?;
                }
                let m = dtqw_core::spectral::localization_metrics(&p.state, region.as_slice());
                index.push(json!({"index": i, "E": p.energy, "residual": p.residual,
                                  "corner_weight": m.weights.first(), "ipr": m.ipr}));
            }
            if run.json {
                out.json("eigenpairs/index.json", &index)?;
                out.json("summary.json", &a)?;
            }
            if run.svg {
                if let Some(p) = a.set.pairs.first() {
                    let lat = *p.state.lattice();
                    let mut prob = vec![0.0; lat.sites()];
                    for q in &a.set.pairs {
                        for (s, v) in q.state.probability_map().iter().enumerate() {
                            prob[s] += v;
                        }
                    }
                    let max = prob.iter().copied().fold(0.0, f64::max);
                    let pts = vec![(0..lat.sites())
                        .filter(|&s| prob[s] > 1e-3 * max)
                        .map(|s| (lat.coord_x(s % lat.lx()) as f64, lat.coord_y(s / lat.lx()) as f64))
                        .collect()];
                    out.write(
                        "eigenpairs.svg",
                        render("support of the returned states", "x", "y", &pts, Style::Scatter).as_bytes(),
                    )?;
                }
            }
        }
        Task::Bands => {
            let reports = pipeline::bands(cfg)?;
            let many = reports.len() > 1;
            for (i, r) in reports.iter().enumerate() {
                let dir = if many { format!("theta_y_{i}/") } else { String::new() };
                if run.csv {
                    out.write_with(&format!("{dir}bands.csv"), |w| r.structure.write_csv(w))?;
                    let rows = r.cross_sections.iter().map(|(kx, ky, e)| {
                        let mut v = vec![f(r.theta_y), f(*kx), f(*ky)];
                        v.extend(e.iter().map(|x| f(*x)));
                        v
                    });
                    out.write(
                        &format!("{dir}cross_sections.csv"),
                        &csv_rows("theta_y,kx,ky,E1,E2,E3,E4", rows),
                    )?;
                    let rows = r
                        .projection
                        .iter()
                        .flat_map(|p| p.covered.iter().map(move |(lo, hi)| vec![f(p.ky), f(*lo), f(*hi)]));
                    out.write(&format!("{dir}projection.csv"), &csv_rows("ky,lo,hi", rows))?;
                }
                if run.svg {
                    let series: Vec<Vec<(f64, f64)>> = (0..4)
                        .map(|b| {
                            r.cross_sections
                                .iter()
                                .filter(|(kx, _, _)| *kx == 0.0)
                                .map(|(_, ky, e)| (*ky, e[b]))
                                .collect()
                        })
                        .collect();
                    out.write(
                        &format!("{dir}bands.svg"),
                        render("bands at k_x = 0", "k_y", "E", &series, Style::Line).as_bytes(),
                    )?;
                }
            }
            if run.json {
                let s: Vec<_> = reports
                    .iter()
                    .map(|r| json!({"theta_x": r.theta_x, "theta_y": r.theta_y}))
                    .collect();
                out.json("summary.json", &s)?;
            }
        }
        Task::Oracle => {
            let r = pipeline::oracle_battery(cfg)?;
            if run.csv {
                let rows = [(1, &r.ladder_1d), (2, &r.ladder_2d)].into_iter().flat_map(|(d, l)| {
                    l.iter().map(move |lv| {
                        vec![
                            d.to_string(),
                            lv.n.to_string(),
                            f(lv.expected),
                            f(lv.measured),
                            lv.count_positive.to_string(),
                            lv.count_negative.to_string(),
                        ]
                    })
                });
                out.write(
                    "ladder.csv",
                    &csv_rows("dim,n,expected,measured,positive,negative", rows),
                )?;
            }
            out.json("oracle.json", &r.checks)?;
        }
        Task::Trotter => {
            let runs = pipeline::trotter(cfg)?;
            if run.csv {
                let rows = runs.iter().map(|r| vec![f(r.dt), r.steps.to_string(), f(r.error)]);
                out.write("trotter.csv", &csv_rows("dt,steps,error", rows))?;
            }
            if run.svg {
                let pts = vec![runs.iter().map(|r| (r.dt, r.error)).collect()];
                out.write(
                    "trotter.svg",
                    render("Trotter error", "dt", "error", &pts, Style::Line).as_bytes(),
                )?;
            }
        }
        Task::Symmetry => {
            let checks = pipeline::symmetry_report(cfg)?;
            out.json("symmetry_report.json", &checks)?;
        }
    }
    out.json("meta.json", &meta(cfg))?;
    let log = format!(
        "preset {}\nwall_clock_seconds {:.3}\n",
        run.preset,
        start.elapsed().as_secs_f64()
    );
    out.write("run.log", log.as_bytes())?;
    Ok(())
}
