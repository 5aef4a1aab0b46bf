use dqsd::specfun::{self, bessel, polar, Kind, Order};
use proptest::prelude::*;
use std::f64::consts::{FRAC_PI_2, PI};

// x, J0, J1, Y0, Y1, K0, K1 from a 40-digit reference evaluation.
const TABLE: &[(f64, f64, f64, f64, f64, f64, f64)] = &[
    (0.001, 0.99999975000001562, 0.00049999993750000261, -4.4714166113759233, -636.62216723113941, 7.0236888005623813, 999.99623815608555),
    (0.1, 0.99750156206604003, 0.049937526036242, -1.5342386513503668, -6.4589510947020266, 2.4270690247020166, 9.8538447808706056),
    (0.5, 0.9384698072408129, 0.24226845767487389, -0.44451873350670656, -1.4714723926702431, 0.92441907122766586, 1.6564411200033009),
    (1.0, 0.76519768655796655, 0.44005058574493352, 0.088256964215676958, -0.78121282130028872, 0.42102443824070833, 0.60190723019723457),
    (2.4048, 1.3268284301171568e-5, 0.51915301450755324, 0.50992700926434347, 0.1027347418127735, 0.069816670486770165, 0.083221978374575039),
    (3.8317059702, -0.40275939570255297, 3.0257317610332284e-12, 0.051397673102510002, 0.41251739515924843, 0.013476902929952336, 0.015142577405545613),
    (5.0, -0.1775967713143383, -0.32757913759146522, -0.30851762524903378, 0.14786314339122684, 0.0036910983340425943, 0.0040446134454521642),
    (7.9, 0.19436184484127824, 0.2191793999217512, 0.20652094814437577, -0.18172107728057313, 0.00016286766768765322, 0.00017288430649238984),
    (8.0, 0.17165080713755391, 0.23463634685391462, 0.22352148938756622, -0.15806046173124749, 0.00014647070522281539, 0.00015536921180500113),
    (10.0, -0.24593576445134834, 0.043472746168861437, 0.055671167283599391, 0.24901542420695388, 1.7780062316167652e-5, 1.8648773453825585e-5),
    (17.3, -0.13370064707576419, -0.14142333549201399, -0.13750521344352496, 0.12978534673908389, 9.1767744393061193e-9, 9.4383700428039727e-9),
    (24.9, 0.08324596835301549, -0.13485569953140887, -0.13649918399676524, -0.086002557595554252, 3.8360965209894921e-12, 3.9123824362567633e-12),
    (25.1, 0.10827567149994945, -0.11463478413442257, -0.11676770763803695, -0.11062223322783099, 3.1283127143211171e-12, 3.190032318604266e-12),
    (40.0, 0.0073668905842372896, 0.126038318037585, 0.12593641705826093, -0.0057935058215496329, 8.392861100099567e-19, 8.4971319548610387e-19),
    (99.5, -0.019543066407440784, -0.077663198243076935, -0.077564015193883814, 0.019153554036776959, 7.6967001248092982e-45, 7.7352807933952901e-45),
    (250.0, -0.026053373425204234, -0.04326903841033075, -0.043216845440366268, 0.025966992185484582, 2.1147193716964606e-110, 2.1189445978139999e-110),
    (999.0, 0.017369296355194132, -0.018309728474911622, -0.018318419519867725, -0.01737846690654301, 0.0, 0.0),
];

fn close(got: f64, want: f64, rel: f64, abs: f64) -> bool {
    (got - want).abs() <= rel * want.abs() || (got - want).abs() <= abs
}

#[test]
fn matches_reference_table() {
    for &(x, j0, j1, y0, y1, k0, k1) in TABLE {
        let cases = [
            (Kind::J, Order::Zero, j0),
            (Kind::J, Order::One, j1),
            (Kind::Y, Order::Zero, y0),
            (Kind::Y, Order::One, y1),
        ];
        for (kind, order, want) in cases {
            let got = bessel(kind, order, x).unwrap();
            assert!(close(got, want, 1e-12, 1e-14), "{kind:?}{order:?}({x}) = {got}, want {want}");
        }
        if x < specfun::K_UNDERFLOW {
            for (order, want) in [(Order::Zero, k0), (Order::One, k1)] {
                let got = bessel(Kind::K, order, x).unwrap();
                assert!(close(got, want, 1e-10, 0.0), "K{order:?}({x}) = {got}, want {want}");
            }
        }
    }
}

#[test]
fn j0_at_trough_example() {
    let v = bessel(Kind::J, Order::Zero, 3.8317059702).unwrap();
    assert!((v + 0.4027593957).abs() < 1e-10);
}

#[test]
fn qbar_matches_j1_root() {
    assert!((specfun::qbar() - 3.831_705_970_207_512).abs() < 1e-14);
    assert!((specfun::j0_at_qbar() + 0.402_759_395_702_552_97).abs() < 1e-15);
}

#[test]
fn theta1_at_qbar_is_half_pi() {
    let (_, t) = polar(Order::One, 3.8317059702).unwrap();
    assert!((t - FRAC_PI_2).abs() < 1e-9);
}

#[test]
fn theta0_large_x_expansion() {
    let (_, t) = polar(Order::Zero, 100.0).unwrap();
    assert!((t - 99.213_351_901_685_78).abs() < 1e-11, "{t}");
    let two_term = 100.0 - PI / 4.0 - 1.0 / 800.0;
    assert!((t - two_term).abs() < 1e-6);
}

#[test]
fn theta1_tends_to_minus_half_pi() {
    // theta1 + pi/2 ~ pi x^2 / 4 for small x
    for x in [1e-2, 1e-3, 1e-4] {
        let (_, t) = polar(Order::One, x).unwrap();
        let gap = t + FRAC_PI_2;
        let lead = PI * x * x / 4.0;
        assert!((gap - lead).abs() < 1e-3 * lead, "x={x}: {gap} vs {lead}");
    }
    let (_, t) = polar(Order::One, 1e-8).unwrap();
    assert!((t + FRAC_PI_2).abs() < 1e-15);
}

#[test]
fn phase_inverse_examples() {
    let q = specfun::phase1_inverse(FRAC_PI_2).unwrap();
    assert!((q - 3.8317059702).abs() < 1e-9);
    let (_, t50) = polar(Order::One, 50.0).unwrap();
    assert!((specfun::phase1_inverse(t50).unwrap() - 50.0).abs() < 1e-9);
    let qp = specfun::phase1_inverse(t50 + PI).unwrap();
    let (_, tp) = polar(Order::One, qp).unwrap();
    assert!((tp - t50 - PI).abs() < 1e-10);
    assert!((qp - 50.0 - PI).abs() < 0.01);
}

#[test]
fn nicholson_examples() {
    let m = specfun::nicholson_modulus_sq(Order::Zero, 1.0).unwrap();
    // J0(1)^2 + Y0(1)^2 from the reference table
    let want = 0.76519768655796655f64.powi(2) + 0.088256964215676958f64.powi(2);
    assert!((m - want).abs() < 1e-10 * want, "{m} vs {want}");
    let m100 = specfun::nicholson_modulus_sq(Order::Zero, 100.0).unwrap();
    let lead = 2.0 / (100.0 * PI);
    assert!((m100 - lead).abs() < 1e-3 * lead);
    let a = specfun::nicholson_modulus_sq(Order::Zero, 0.5).unwrap();
    let b = specfun::nicholson_modulus_sq(Order::One, 0.5).unwrap();
    assert!(b > a);
}

#[test]
fn asymptotic_phase_fit() {
    // residual of theta1 against its two-term expansion behaves like 1/x^3
    let xs = [20.0, 40.0, 80.0, 160.0, 320.0, 500.0];
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .map(|&x| {
            let (_, t) = polar(Order::One, x).unwrap();
            let r = (t - (x - 3.0 * PI / 4.0 + 3.0 / (8.0 * x))).abs();
            (x.ln(), r.ln())
        })
        .filter(|p| p.1.is_finite())
        .take(4)
        .collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let slope = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>()
        / pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
    assert!(-slope >= 2.7, "fitted exponent {}", -slope);
}

proptest! {
    #[test]
    fn wronskian_holds(lx in (0.1f64).ln()..(1000f64).ln()) {
        let x = lx.exp();
        let e = dqsd::specfun::BesselEval::at(x).unwrap();
        let w = 2.0 / (PI * x);
        prop_assert!((e.j1 * e.y0 - e.j0 * e.y1 - w).abs() <= 1e-12 * w);
    }

    #[test]
    fn polar_ordering(lx in (0.01f64).ln()..(1000f64).ln()) {
        let x = lx.exp();
        let p = dqsd::specfun::PolarEval::at(x).unwrap();
        prop_assert!(p.m0 > 0.0 && p.m1 > 0.0);
        let d = p.theta0 - p.theta1;
        prop_assert!(d > 0.0 && d < PI);
        let w = 2.0 / (PI * x);
        prop_assert!((p.m0 * p.m1 * d.sin() - w).abs() <= 1e-10 * w);
    }

    #[test]
    fn phase_inverse_round_trip(lx in (0.05f64).ln()..(900f64).ln()) {
        let x = lx.exp();
        let (_, t) = polar(Order::One, x).unwrap();
        let back = specfun::phase1_inverse(t).unwrap();
        prop_assert!((back - x).abs() <= 1e-9 * x.max(1.0));
    }
}

#[test]
fn nicholson_matches_moduli_on_log_grid() {
    let n = 200;
    let step = (500.0f64 / 0.1).ln() / (n - 1) as f64;
    for i in 0..n {
        let x = 0.1 * (step * i as f64).exp();
        let p = specfun::PolarEval::at(x).unwrap();
        for (order, m2) in [(Order::Zero, p.m0 * p.m0), (Order::One, p.m1 * p.m1)] {
            let v = specfun::nicholson_modulus_sq(order, x).unwrap();
            assert!((v - m2).abs() <= 1e-8 * m2, "x = {x}: {v} vs {m2}");
        }
    }
}
