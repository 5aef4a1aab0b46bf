use dqsd::bridge::*;
use dqsd::dqop_flow::profile_diagnostics;
use dqsd::{DiskDomain, Error, RadialProfile};
use proptest::prelude::*;
use std::f64::consts::PI;

fn unit(eps: f64) -> DiskDomain {
    DiskDomain::new(1.0, 0.1, eps).unwrap()
}

#[test]
fn mass_to_radius_examples() {
    assert_eq!(mass_to_radius(-1.0, 1.0).unwrap(), 0.0);
    assert!((mass_to_radius(0.0, 1.0).unwrap() - 0.70711).abs() < 1e-5);
    assert!((mass_to_radius(0.5, 2.0).unwrap() - 1.73205).abs() < 1e-5);
    assert!(matches!(mass_to_radius(1.0, 1.0), Err(Error::Domain { .. })));
    assert!(matches!(mass_to_radius(-1.5, 1.0), Err(Error::Domain { .. })));
}

#[test]
fn radius_to_mass_examples() {
    assert_eq!(radius_to_mass(0.0, 1.0).unwrap(), -1.0);
    assert!(radius_to_mass(1.0 / 2f64.sqrt(), 1.0).unwrap().abs() < 1e-15);
    assert!(matches!(radius_to_mass(1.0, 1.0), Err(Error::Domain { .. })));
    assert!(matches!(radius_to_mass(-0.1, 1.0), Err(Error::Domain { .. })));
}

#[test]
fn enclosed_area_orientation() {
    let p = MassRadiusPair::from_radius(0.5, 1.0).unwrap();
    assert!((p.u_bar + 0.5).abs() < 1e-15);
    assert!((p.enclosed_area() - 2.3562).abs() < 1e-4);
    assert!((p.enclosed_area() + p.inner_area() - PI).abs() < 1e-14);
    assert!((p.inner_area() - PI / 4.0).abs() < 1e-15);
}

#[test]
fn annular_level_set_near_r0() {
    let lift = lift_circle(0.5, unit(0.01), 2048).unwrap();
    assert!(matches!(lift.family, LiftFamily::Annular(_)));
    let linear = project_level_set(&lift.profile).unwrap();
    assert!((0.49..=0.51).contains(&linear), "{linear}");
    let refined = lift.level_set().unwrap();
    assert!((refined - linear).abs() < 1e-5);
    assert!(lift.family.u_at(refined).abs() < 1e-12);
}

#[test]
fn pure_phase_has_no_level_set() {
    let p = RadialProfile::constant(-1.0, 64, unit(0.01));
    assert_eq!(project_level_set(&p), Err(Error::NoCrossing));
}

#[test]
fn lift_carries_the_equivalent_mass() {
    let lift = lift_circle(0.5, unit(0.01), 2048).unwrap();
    assert!((lift.family.mean_mass() + 0.5).abs() < 1e-6);
    lift.profile.check_admissible().unwrap();
}

#[test]
fn small_radius_lifts_to_dimple() {
    let d = unit(0.01);
    for r0 in [0.0, 0.005, 0.015, 0.02] {
        let lift = lift_circle(r0, d, 4096).unwrap();
        let LiftFamily::Dimple(s) = lift.family else { panic!("r0 = {r0}") };
        let target = radius_to_mass(r0, 1.0).unwrap();
        assert!((s.u_bar - target).abs() < 1e-14);
        assert!((lift.family.mean_mass() - target).abs() < 1e-9, "r0 = {r0}");
    }
    assert!(matches!(lift_circle(0.021, d, 512).unwrap().family, LiftFamily::Annular(_)));
}

#[test]
fn steady_state_correspondence() {
    let d = unit(0.01);
    for r0 in [0.01, 0.02, 0.05, 0.1, 0.3, 0.5, 0.7, 0.85] {
        let lift = lift_circle(r0, d, 4096).unwrap();
        let target = radius_to_mass(r0, 1.0).unwrap();
        assert!((lift.family.mean_mass() - target).abs() < 1e-6, "r0 = {r0}");
        let fv = profile_diagnostics(&lift.profile).u_bar;
        assert!((fv - target).abs() < 1e-5, "r0 = {r0}: {fv}");
    }
}

#[test]
fn lift_respects_the_collar() {
    assert!(matches!(lift_circle(0.89, unit(0.01), 512), Err(Error::DomainTooSmall { .. })));
    assert!(lift_circle(1.0, unit(0.01), 512).is_err());
}

#[test]
fn round_trip_within_two_epsilon() {
    for eps in [0.01, 0.005] {
        for r0 in [0.2, 0.5, 0.8] {
            let lift = lift_circle(r0, unit(eps), 2048).unwrap();
            let r = project_level_set(&lift.profile).unwrap();
            assert!((r - r0).abs() <= 2.0 * eps, "eps {eps} r0 {r0}: {r}");
        }
    }
}

#[test]
fn level_set_converges_in_epsilon() {
    let rows = bridge_sweep(&[0.04, 0.02, 0.01], 0.5, 1.0, 0.1, 4096).unwrap();
    let eps: Vec<f64> = rows.iter().map(|r| r.epsilon).collect();
    let err: Vec<f64> = rows.iter().map(|r| r.abs_err).collect();
    assert!(err[2] / err[1] <= 0.7, "{err:?}");
    assert!(err.windows(2).all(|w| w[1] < w[0]));
    assert!(log_log_slope(&eps, &err).unwrap() >= 1.0);
    for r in &rows {
        assert!((r.u_bar + 0.5).abs() < 1e-6);
        assert!((r.energy_limit - PI).abs() < 1e-14);
    }
}

#[test]
fn energy_approaches_perimeter_limit() {
    let r0 = 0.5;
    let e = |eps: f64| {
        let d = DiskDomain::with_ratio(1.0, 0.1, eps, BRIDGE_SCALE_RATIO).unwrap();
        lift_circle(r0, d, 256).unwrap().family.energy()
    };
    let limit = energy_limit(r0, &unit(0.01));
    let (e1, e2, e3) = (e(0.02), e(0.01), e(0.005));
    assert!((e3 - limit).abs() <= 0.05 * limit, "{e3} vs {limit}");
    let order = ((e1 - e2) / (e2 - e3)).log2();
    assert!((order - 2.0).abs() < 0.1, "{order}");
    let extrapolated = richardson(e2, e3, order);
    assert!((extrapolated - limit).abs() <= 1e-6 * limit, "{extrapolated}");
}

proptest! {
    #[test]
    fn mass_radius_bijection(r0 in 0.01f64..0.999, big in 0.1f64..10.0) {
        // nearer the center the spacing of u_bar near -1 dominates
        let r = r0 * big;
        let back = mass_to_radius(radius_to_mass(r, big).unwrap(), big).unwrap();
        prop_assert!((back - r).abs() <= 1e-14 * big);
    }

    #[test]
    fn radius_mass_bijection(u in -1.0f64..0.999) {
        let back = radius_to_mass(mass_to_radius(u, 1.0).unwrap(), 1.0).unwrap();
        prop_assert!((back - u).abs() <= 1e-14);
    }
}
