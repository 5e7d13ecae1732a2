use crate::lattice::{LatticeSpec, SpinorField2D};

/// A set of lattice sites, with distances measured by minimal image on the
/// periodic lattice.
#[derive(Clone, Debug, PartialEq)]
pub enum Region {
    /// Sites with `|x - center| <= radius`, any `y`.
    XBand {
        center: i64,
        radius: i64,
    },
    /// Sites with `|y - center| <= radius`, any `x`.
    YBand {
        center: i64,
        radius: i64,
    },
    /// Sites with `|x - x0| + |y - y0| <= radius`.
    Manhattan {
        center: (i64, i64),
        radius: i64,
    },
    /// Explicit list of sites.
    Sites(Vec<(i64, i64)>),
    Union(Vec<Region>),
}

fn periodic_distance(a: i64, b: i64, l: usize) -> i64 {
    let l = l as i64;
    let d = (a - b).rem_euclid(l);
    d.min(l - d)
}

impl Region {
    /// Union of Manhattan balls around the four points `(+-x0, +-y0)`.
    pub fn four_corners(x0: i64, y0: i64, radius: i64) -> Self {
        Region::Union(
            [(x0, y0), (-x0, y0), (x0, -y0), (-x0, -y0)]
                .into_iter()
                .map(|center| Region::Manhattan { center, radius })
                .collect(),
        )
    }

    pub fn contains(&self, lat: &LatticeSpec, x: i64, y: i64) -> bool {
        match self {
            Region::XBand { center, radius } => periodic_distance(x, *center, lat.lx()) <= *radius,
            Region::YBand { center, radius } => periodic_distance(y, *center, lat.ly()) <= *radius,
            Region::Manhattan { center, radius } => {
                periodic_distance(x, center.0, lat.lx()) + periodic_distance(y, center.1, lat.ly()) <= *radius
            }
            Region::Sites(s) => s.contains(&(x, y)),
            Region::Union(rs) => rs.iter().any(|r| r.contains(lat, x, y)),
        }
    }
}

/// Probability per region and the inverse participation ratio.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalizationReport {
    pub weights: Vec<f64>,
    /// `sum_{x,y} P(x, y)^2`.
    pub ipr: f64,
}

/// Probability mass of a state in each region, together with its IPR.
pub fn localization_metrics(state: &SpinorField2D, regions: &[Region]) -> LocalizationReport {
    let lat = state.lattice();
    let p = state.probability_map();
    let mut weights = vec![0.0; regions.len()];
    for iy in 0..lat.ly() {
        let y = lat.coord_y(iy);
        for ix in 0..lat.lx() {
            let x = lat.coord_x(ix);
            let w = p[lat.site(ix, iy)];
            for (acc, r) in weights.iter_mut().zip(regions) {
                if r.contains(lat, x, y) {
                    *acc += w;
                }
            }
        }
    }
    let ipr = p.iter().map(|w| w * w).sum();
    LocalizationReport { weights, ipr }
}

/// Average weight of a set of orthonormal states in a region: the weight of
/// their span's projector divided by its rank.
pub fn span_weight(states: &[SpinorField2D], region: &Region) -> f64 {
    if states.is_empty() {
        return 0.0;
    }
    let total: f64 = states
        .iter()
        .map(|s| localization_metrics(s, std::slice::from_ref(region)).weights[0])
        .sum();
    total / states.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Component;
    use faer::c64;

    #[test]
    fn basis_state_metrics() {
        let lat = LatticeSpec::square(9).unwrap();
        let s = SpinorField2D::basis(lat, 2, -1, Component::RU);
        let r = localization_metrics(
            &s,
            &[Region::Sites(vec![(2, -1)]), Region::XBand { center: -3, radius: 1 }],
        );
        assert_eq!(r.weights, vec![1.0, 0.0]);
        assert_eq!(r.ipr, 1.0);
    }

    #[test]
    fn uniform_state_ipr() {
        let lat = LatticeSpec::square(5).unwrap();
        let n = lat.sites() as f64;
        let amps = (0..lat.dim())
            .map(|i| {
                if i % 4 == 0 {
                    c64::new(1.0 / n.sqrt(), 0.0)
                } else {
                    c64::new(0.0, 0.0)
                }
            })
            .collect();
        let s = SpinorField2D::from_vec(lat, amps).unwrap();
        let r = localization_metrics(&s, &[]);
        assert!((r.ipr - 1.0 / n).abs() < 1e-15);
    }

    #[test]
    fn regions_use_minimal_image() {
        let lat = LatticeSpec::square(11).unwrap();
        let band = Region::XBand { center: 5, radius: 1 };
        assert!(band.contains(&lat, -5, 0));
        let corners = Region::four_corners(3, 3, 1);
        assert!(corners.contains(&lat, -3, 2));
        assert!(!corners.contains(&lat, 0, 0));
    }
}
