use std::f64::consts::PI;

use dtqw_core::continuum::{
    build_dirac, corner_product_overlap, gaussian_refined_overlap, jr_walk_overlap, oscillator_ladder, trotter_error,
    DerivativeScheme, MassProfile, OracleParams, TrotterSetup,
};
use dtqw_core::linalg::{hermitian_eigen, wrap_angle};
use dtqw_core::spectral::{bulk_bands, spectrum_scan};
use dtqw_core::{AngleProfile, LatticeSpec, StepOperator2D};

fn oscillator_params() -> OracleParams {
    OracleParams::new(1.0, PI / 20.0, 0.5).unwrap()
}

#[test]
fn free_dirac_spectrum_is_linear() {
    let l = 9;
    let h = build_dirac(
        1,
        l,
        1,
        &MassProfile::Zero,
        &MassProfile::Zero,
        1.0,
        DerivativeScheme::Spectral,
    )
    .unwrap();
    let (mut e, _) = hermitian_eigen(h.matrix.as_ref()).unwrap();
    e.sort_by(f64::total_cmp);
    let mut want: Vec<f64> = (-(l as i64) / 2..=l as i64 / 2)
        .flat_map(|n| {
            let k = 2.0 * PI * n as f64 / l as f64;
            [k, -k]
        })
        .collect();
    want.sort_by(f64::total_cmp);
    let d = e.iter().zip(&want).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(d < 1e-12, "{d}");
}

#[test]
fn oscillator_ladder_1d() {
    let lv = oscillator_ladder(1, 101, &oscillator_params(), 30, 4).unwrap();
    assert!(lv[0].measured.abs() < 1e-10, "{:?}", lv[0]);
    // The ring's mass jump binds the chiral partner of the Gaussian. It is
    // spread over the whole ring, so it survives any central filter.
    assert_eq!(lv[0].count_positive, 2, "{lv:?}");
    for l in &lv[1..] {
        assert!(l.relative_error() < 1e-6, "{l:?}");
        assert_eq!((l.count_positive, l.count_negative), (1, 1), "{l:?}");
    }
}

#[test]
fn oscillator_degeneracy_2d() {
    let lv = oscillator_ladder(2, 21, &oscillator_params(), 7, 4).unwrap();
    assert_eq!(lv[0].count_positive, 1, "{:?}", lv[0]);
    for l in &lv[1..] {
        assert_eq!((l.count_positive, l.count_negative), (2 * l.n, 2 * l.n), "{l:?}");
        assert!(l.relative_error() < 0.02, "{l:?}");
    }
}

#[test]
fn corner_state_factorizes() {
    let o = corner_product_overlap(21, 5, 0.5, 1.0).unwrap();
    assert!(o > 0.99, "{o}");
}

#[test]
fn walk_wall_state_matches_the_bound_state() {
    let raw = jr_walk_overlap(41, 10, 0.5, false).unwrap();
    let framed = jr_walk_overlap(41, 10, 0.5, true).unwrap();
    assert!(framed > 0.99, "{framed}");
    assert!(framed > raw, "{raw} vs {framed}");
    assert!((raw - 0.9689).abs() < 1e-3, "{raw}");
}

#[test]
fn walk_gaussian_matches_the_oscillator_ground_state() {
    let lat = LatticeSpec::square(51).unwrap();
    let p = AngleProfile::linear(PI / 20.0, 5.0, PI / 4.0);
    let (framed, residual) = gaussian_refined_overlap(lat, p, &oscillator_params(), 1000, true).unwrap();
    let (raw, _) = gaussian_refined_overlap(lat, p, &oscillator_params(), 1000, false).unwrap();
    assert!(framed > 0.999, "{framed}");
    assert!((raw - 0.979).abs() < 2e-3, "{raw}");
    assert!(residual < 1e-2, "{residual}");
}

#[test]
fn walk_converges_to_dirac_at_first_order() {
    let setup = TrotterSetup::gaussian(
        1,
        21,
        MassProfile::Linear { slope: 0.05 },
        MassProfile::Zero,
        1.0,
        2.0,
        (0.0, 0.0),
    )
    .unwrap();
    let a = trotter_error(&setup, 0.1, 4.0).unwrap();
    let b = trotter_error(&setup, 0.05, 4.0).unwrap();
    assert!((1.9..2.1).contains(&(a / b)), "{a} {b}");
}

// Sorted on the circle so that values near +-pi compare equal.
fn circle_sorted(mut v: Vec<f64>) -> Vec<f64> {
    for x in &mut v {
        *x = wrap_angle(*x);
        if *x > PI - 1e-9 {
            *x -= 2.0 * PI;
        }
    }
    v.sort_by(f64::total_cmp);
    v
}

#[test]
fn bulk_bands_match_the_real_space_walk() {
    let lx = 9;
    for (tx, ty) in [(PI / 3.0, 0.0), (PI / 3.0, PI / 3.0), (0.4, -1.1)] {
        let op = StepOperator2D::new(
            LatticeSpec::new(lx, 5).unwrap(),
            AngleProfile::constant(tx),
            AngleProfile::constant(ty),
        );
        for ky in [0.0, 0.7, PI / 2.0, -2.3] {
            let s = spectrum_scan(&op, &[ky]).unwrap();
            let mut want = Vec::new();
            for n in 0..lx {
                let kx = 2.0 * PI * n as f64 / lx as f64;
                want.extend(bulk_bands(tx, ty, kx, ky).unwrap());
            }
            let (got, want) = (circle_sorted(s.entries[0].1.clone()), circle_sorted(want));
            let err = got.iter().zip(&want).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            assert!(err < 1e-12, "theta=({tx}, {ty}) ky={ky}: {err:e}");
        }
    }
}
