//! Lattice geometry, spinor storage and position-space observables.
//!
//! Coordinates run over `-L/2..=L/2` (integer division) and the array index is
//! `coordinate + L/2`. Amplitudes are stored site-major: the flat index of
//! `(ix, iy, c)` is `(iy * L_x + ix) * 4 + c`.

use std::io::{BufRead, Write};

use faer::c64;

use crate::{fmt_f64, Error, Result};

/// Internal states of one site, in storage order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[repr(usize)]
pub enum Component {
    LD = 0,
    RD = 1,
    LU = 2,
    RU = 3,
}

impl Component {
    pub const ALL: [Component; 4] = [Component::LD, Component::RD, Component::LU, Component::RU];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(c: usize) -> Option<Self> {
        Self::ALL.get(c).copied()
    }
}

/// Periodic rectangular lattice with unit spacing and unit time step.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct LatticeSpec {
    lx: usize,
    ly: usize,
}

impl LatticeSpec {
    pub fn new(lx: usize, ly: usize) -> Result<Self> {
        for (name, l) in [("L_x", lx), ("L_y", ly)] {
            if l < 3 || l % 2 == 0 {
                return Err(Error::InvalidLattice(format!(
                    "{name} = {l} must be odd and at least 3"
                )));
            }
        }
        Ok(Self { lx, ly })
    }

    pub fn square(l: usize) -> Result<Self> {
        Self::new(l, l)
    }

    pub fn lx(&self) -> usize {
        self.lx
    }

    pub fn ly(&self) -> usize {
        self.ly
    }

    pub fn half_x(&self) -> i64 {
        (self.lx / 2) as i64
    }

    pub fn half_y(&self) -> i64 {
        (self.ly / 2) as i64
    }

    pub fn sites(&self) -> usize {
        self.lx * self.ly
    }

    /// Dimension of the full Hilbert space (sites times four).
    pub fn dim(&self) -> usize {
        4 * self.sites()
    }

    pub fn coord_x(&self, ix: usize) -> i64 {
        ix as i64 - self.half_x()
    }

    pub fn coord_y(&self, iy: usize) -> i64 {
        iy as i64 - self.half_y()
    }

    /// Array index of coordinate `x`, wrapped periodically.
    pub fn wrap_x(&self, x: i64) -> usize {
        (x + self.half_x()).rem_euclid(self.lx as i64) as usize
    }

    pub fn wrap_y(&self, y: i64) -> usize {
        (y + self.half_y()).rem_euclid(self.ly as i64) as usize
    }

    pub fn site(&self, ix: usize, iy: usize) -> usize {
        iy * self.lx + ix
    }

    pub fn amp_index(&self, ix: usize, iy: usize, c: usize) -> usize {
        4 * self.site(ix, iy) + c
    }

    /// Flat amplitude index for coordinates, wrapped periodically.
    pub fn index_of(&self, x: i64, y: i64, c: Component) -> usize {
        self.amp_index(self.wrap_x(x), self.wrap_y(y), c.index())
    }

    pub fn describe(&self) -> String {
        format!("{}x{}", self.lx, self.ly)
    }
}

/// Complex amplitudes over a periodic lattice with four internal states.
#[derive(Clone, Debug, PartialEq)]
pub struct SpinorField2D {
    lattice: LatticeSpec,
    amps: Vec<c64>,
}

impl SpinorField2D {
    pub fn zeros(lattice: LatticeSpec) -> Self {
        Self {
            lattice,
            amps: vec![c64::new(0.0, 0.0); lattice.dim()],
        }
    }

    pub fn from_vec(lattice: LatticeSpec, amps: Vec<c64>) -> Result<Self> {
        if amps.len() != lattice.dim() {
            return Err(Error::InvalidArgument(format!(
                "expected {} amplitudes for a {} lattice, got {}",
                lattice.dim(),
                lattice.describe(),
                amps.len()
            )));
        }
        Ok(Self { lattice, amps })
    }

    /// Single basis state `|x, y, c>`.
    pub fn basis(lattice: LatticeSpec, x: i64, y: i64, c: Component) -> Self {
        let mut s = Self::zeros(lattice);
        s.amps[lattice.index_of(x, y, c)] = c64::new(1.0, 0.0);
        s
    }

    pub fn lattice(&self) -> &LatticeSpec {
        &self.lattice
    }

    pub fn amplitudes(&self) -> &[c64] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [c64] {
        &mut self.amps
    }

    pub fn into_vec(self) -> Vec<c64> {
        self.amps
    }

    pub fn get(&self, x: i64, y: i64, c: Component) -> c64 {
        self.amps[self.lattice.index_of(x, y, c)]
    }

    pub fn set(&mut self, x: i64, y: i64, c: Component, v: c64) {
        let i = self.lattice.index_of(x, y, c);
        self.amps[i] = v;
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Scales the state to unit norm. A zero state is left unchanged.
    pub fn normalize(&mut self) {
        let n = self.norm();
        if n > 0.0 {
            let inv = 1.0 / n;
            self.amps.iter_mut().for_each(|a| *a *= inv);
        }
    }

    pub fn inner(&self, other: &Self) -> c64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }

    /// `P(x, y) = sum_c |psi(x, y, c)|^2`, indexed `iy * L_x + ix`.
    pub fn probability_map(&self) -> Vec<f64> {
        self.amps
            .chunks_exact(4)
            .map(|s| s.iter().map(|a| a.norm_sqr()).sum())
            .collect()
    }

    /// Means and standard deviations of the position distribution.
    pub fn position_moments(&self) -> Result<Moments> {
        let norm = self.norm_sqr();
        if (norm - 1.0).abs() > 1e-6 {
            return Err(Error::NotNormalized { norm, tol: 1e-6 });
        }
        let lat = self.lattice;
        let p = self.probability_map();
        let (mut sx, mut sy, mut sxx, mut syy) = (0.0, 0.0, 0.0, 0.0);
        for iy in 0..lat.ly() {
            let y = lat.coord_y(iy) as f64;
            for ix in 0..lat.lx() {
                let x = lat.coord_x(ix) as f64;
                let w = p[lat.site(ix, iy)];
                sx += x * w;
                sy += y * w;
                sxx += x * x * w;
                syy += y * y * w;
            }
        }
        Ok(Moments {
            mean_x: sx,
            mean_y: sy,
            std_x: (sxx - sx * sx).max(0.0).sqrt(),
            std_y: (syy - sy * sy).max(0.0).sqrt(),
        })
    }

    /// Multiplies every amplitude by `exp(i (k_x x + k_y y))`.
    pub fn apply_phase_kick(&self, kx: f64, ky: f64) -> Self {
        let lat = self.lattice;
        let mut out = self.clone();
        for iy in 0..lat.ly() {
            let y = lat.coord_y(iy) as f64;
            for ix in 0..lat.lx() {
                let x = lat.coord_x(ix) as f64;
                let phase = c64::from_polar(1.0, kx * x + ky * y);
                let base = lat.amp_index(ix, iy, 0);
                out.amps[base..base + 4].iter_mut().for_each(|a| *a *= phase);
            }
        }
        out
    }

    /// `psi'(x, y) = psi(x - dx, y - dy)` with periodic wraparound.
    pub fn translate(&self, dx: i64, dy: i64) -> Self {
        let lat = self.lattice;
        let mut out = Self::zeros(lat);
        for iy in 0..lat.ly() {
            let ty = lat.wrap_y(lat.coord_y(iy) + dy);
            for ix in 0..lat.lx() {
                let tx = lat.wrap_x(lat.coord_x(ix) + dx);
                let src = lat.amp_index(ix, iy, 0);
                let dst = lat.amp_index(tx, ty, 0);
                out.amps[dst..dst + 4].copy_from_slice(&self.amps[src..src + 4]);
            }
        }
        out
    }

    /// Writes the `x,y,c,re,im` state dump.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let lat = self.lattice;
        writeln!(w, "x,y,c,re,im")?;
        for iy in 0..lat.ly() {
            for ix in 0..lat.lx() {
                for c in 0..4 {
                    let a = self.amps[lat.amp_index(ix, iy, c)];
                    writeln!(
                        w,
                        "{},{},{},{},{}",
                        lat.coord_x(ix),
                        lat.coord_y(iy),
                        c,
                        fmt_f64(a.re),
                        fmt_f64(a.im)
                    )?;
                }
            }
        }
        Ok(())
    }

    /// Reads a state dump; rows absent from the file are zero.
    pub fn read_csv<R: BufRead>(lattice: LatticeSpec, r: R) -> Result<Self> {
        let mut s = Self::zeros(lattice);
        let bad = |line: &str| Error::Parse {
            what: "state row",
            input: line.to_string(),
            expected: "x,y,c,re,im",
        };
        for (n, line) in r.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || (n == 0 && line.starts_with('x')) {
                continue;
            }
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 5 {
                return Err(bad(line));
            }
            let x: i64 = f[0].trim().parse().map_err(|_| bad(line))?;
            let y: i64 = f[1].trim().parse().map_err(|_| bad(line))?;
            let c: usize = f[2].trim().parse().map_err(|_| bad(line))?;
            let re: f64 = f[3].trim().parse().map_err(|_| bad(line))?;
            let im: f64 = f[4].trim().parse().map_err(|_| bad(line))?;
            let comp = Component::from_index(c).ok_or_else(|| bad(line))?;
            if x.abs() > lattice.half_x() || y.abs() > lattice.half_y() {
                return Err(Error::OutOfRange {
                    x: if x.abs() > lattice.half_x() { x } else { y },
                    half: lattice.half_x().max(lattice.half_y()),
                });
            }
            s.set(x, y, comp, c64::new(re, im));
        }
        Ok(s)
    }

    /// Writes the `x,y,p` probability dump.
    pub fn write_probability_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let lat = self.lattice;
        let p = self.probability_map();
        writeln!(w, "x,y,p")?;
        for iy in 0..lat.ly() {
            for ix in 0..lat.lx() {
                writeln!(
                    w,
                    "{},{},{}",
                    lat.coord_x(ix),
                    lat.coord_y(iy),
                    fmt_f64(p[lat.site(ix, iy)])
                )?;
            }
        }
        Ok(())
    }
}

/// First and second moments of a position distribution, in site units.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Moments {
    pub mean_x: f64,
    pub mean_y: f64,
    pub std_x: f64,
    pub std_y: f64,
}

/// Moments recorded at one time step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ObservableRecord {
    pub t: usize,
    pub mean_x: f64,
    pub mean_y: f64,
    pub std_x: f64,
    pub std_y: f64,
}

impl ObservableRecord {
    pub fn new(t: usize, m: Moments) -> Self {
        Self {
            t,
            mean_x: m.mean_x,
            mean_y: m.mean_y,
            std_x: m.std_x,
            std_y: m.std_y,
        }
    }
}

/// Time series of position moments.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ObservableSeries {
    pub records: Vec<ObservableRecord>,
}

impl ObservableSeries {
    pub fn push(&mut self, r: ObservableRecord) {
        self.records.push(r);
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Records with `lo <= T <= hi`.
    pub fn window(&self, lo: usize, hi: usize) -> impl Iterator<Item = &ObservableRecord> {
        self.records.iter().filter(move |r| r.t >= lo && r.t <= hi)
    }

    /// Writes `T,mean_x,mean_y,std_x,std_y`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "T,mean_x,mean_y,std_x,std_y")?;
        for r in &self.records {
            writeln!(
                w,
                "{},{},{},{},{}",
                r.t,
                fmt_f64(r.mean_x),
                fmt_f64(r.mean_y),
                fmt_f64(r.std_x),
                fmt_f64(r.std_y)
            )?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lat(l: usize) -> LatticeSpec {
        LatticeSpec::square(l).unwrap()
    }

    #[test]
    fn rejects_even_and_tiny_lattices() {
        assert!(LatticeSpec::new(4, 5).is_err());
        assert!(LatticeSpec::new(1, 5).is_err());
        assert!(LatticeSpec::new(5, 5).is_ok());
    }

    #[test]
    fn coordinates_are_symmetric() {
        let l = lat(101);
        assert_eq!(l.coord_x(0), -50);
        assert_eq!(l.coord_x(100), 50);
        assert_eq!(l.wrap_x(51), 0);
        assert_eq!(l.wrap_x(-51), 100);
    }

    #[test]
    fn probability_of_basis_state() {
        let s = SpinorField2D::basis(lat(5), 0, 0, Component::LD);
        let p = s.probability_map();
        assert_eq!(p[lat(5).site(2, 2)], 1.0);
        assert_eq!(p.iter().sum::<f64>(), 1.0);
    }

    #[test]
    fn probability_of_two_site_superposition() {
        let l = lat(5);
        let mut s = SpinorField2D::zeros(l);
        let h = c64::new(0.5f64.sqrt(), 0.0);
        s.set(0, 0, Component::LD, h);
        s.set(1, 0, Component::RD, h);
        let p = s.probability_map();
        assert!((p[l.site(2, 2)] - 0.5).abs() < 1e-15);
        assert!((p[l.site(3, 2)] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn moments_of_basis_state() {
        let s = SpinorField2D::basis(lat(9), 3, -2, Component::RU);
        let m = s.position_moments().unwrap();
        assert_eq!((m.mean_x, m.mean_y, m.std_x, m.std_y), (3.0, -2.0, 0.0, 0.0));
    }

    #[test]
    fn moments_of_symmetric_pair() {
        let mut s = SpinorField2D::zeros(lat(21));
        let h = c64::new(0.5f64.sqrt(), 0.0);
        s.set(5, 0, Component::LD, h);
        s.set(-5, 0, Component::LD, h);
        let m = s.position_moments().unwrap();
        assert!(m.mean_x.abs() < 1e-15);
        assert!((m.std_x - 5.0).abs() < 1e-12);
    }

    #[test]
    fn moments_of_lattice_gaussian() {
        let l = lat(101);
        let ratio = std::f64::consts::PI / 20.0;
        let mut s = SpinorField2D::zeros(l);
        for iy in 0..l.ly() {
            for ix in 0..l.lx() {
                let (x, y) = (l.coord_x(ix) as f64, l.coord_y(iy) as f64);
                let amp = (-ratio * (x * x + y * y) / 2.0).exp();
                s.set(x as i64, y as i64, Component::LD, c64::new(amp, 0.0));
            }
        }
        s.normalize();
        let m = s.position_moments().unwrap();
        let expected = (1.0 / (2.0 * ratio)).sqrt();
        assert!(m.mean_x.abs() < 1e-12 && m.mean_y.abs() < 1e-12);
        assert!((m.std_x / expected - 1.0).abs() < 0.02);
        assert!((m.std_y / expected - 1.0).abs() < 0.02);
    }

    #[test]
    fn moments_reject_unnormalized() {
        let mut s = SpinorField2D::basis(lat(5), 0, 0, Component::LD);
        s.amplitudes_mut()[0] = c64::new(0.1, 0.0);
        assert!(matches!(s.position_moments(), Err(Error::NotNormalized { .. })));
    }

    #[test]
    fn kick_multiplies_by_phase() {
        let s = SpinorField2D::basis(lat(5), 0, 1, Component::LD);
        let k = s.apply_phase_kick(0.0, std::f64::consts::PI);
        let a = k.get(0, 1, Component::LD);
        assert!((a - c64::new(-1.0, 0.0)).norm() < 1e-15);
        assert_eq!(s.apply_phase_kick(0.0, 0.0), s);
    }

    #[test]
    fn translate_moves_and_wraps() {
        let l = lat(7);
        let s = SpinorField2D::basis(l, 0, 0, Component::LD);
        let t = s.translate(2, 0);
        assert_eq!(t.get(2, 0, Component::LD), c64::new(1.0, 0.0));
        assert_eq!(s.translate(0, 0), s);
        assert_eq!(s.translate(7, 0), s);
        assert_eq!(s.translate(3, 3).translate(-3, -3), s);
    }

    #[test]
    fn csv_round_trip() {
        let l = lat(3);
        let mut s = SpinorField2D::zeros(l);
        s.set(-1, 1, Component::RU, c64::new(0.6, -0.8));
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        let back = SpinorField2D::read_csv(l, buf.as_slice()).unwrap();
        assert_eq!(back, s);
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("x,y,c,re,im\n-1,-1,0,"));
    }
}
