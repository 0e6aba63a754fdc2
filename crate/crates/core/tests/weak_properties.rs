//! Algebraic properties of the lattice operators and weak pairings.

use colehopf::weakform::{limit_nonlinearity, pair_tensor, weak_residual_terms};
use colehopf::{
    colehopf_transform, make_test_battery, mollify, solve_heat_ito, DerivativeOperator, Field, GridSpec, InitialDatum, Label,
    LatticeTest, Mollifier, NoisePath,
};
use proptest::prelude::*;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn centered_difference_is_skew(u in prop::collection::vec(-1.0f64..1.0, 3..200), seed in any::<u64>()) {
        let nx = u.len();
        let grid = GridSpec::new(1.0, nx, 1.0, 2).unwrap();
        let v: Vec<f64> = (0..nx).map(|i| ((i as f64 + 1.0) * (seed % 97 + 1) as f64).sin()).collect();
        let d = DerivativeOperator::centered(grid);
        let (du, dv) = (d.apply_row(&u), d.apply_row(&v));
        let scale = du.iter().zip(&v).map(|(a, b)| (a * b).abs()).sum::<f64>() + 1e-300;
        prop_assert!((dot(&du, &v) + dot(&u, &dv)).abs() / scale < 1e-13);
    }

    #[test]
    fn gauge_drops_out_bit_for_bit(seed in any::<u64>(), c in prop::collection::vec(-30.0f64..30.0, 33)) {
        let grid = GridSpec::new(1.0, 32, 0.01, 32).unwrap();
        let p = NoisePath::sample(grid, seed).unwrap();
        let z = solve_heat_ito(&InitialDatum::default(), &mollify(&p, &Mollifier::new(4).unwrap()).unwrap()).unwrap();
        let mut shifted = z.clone();
        shifted.scale_rows_by_exp(&c).unwrap();
        let d = DerivativeOperator::spectral(grid);
        let (u0, u1) = (colehopf_transform(&z, &d).unwrap(), colehopf_transform(&shifted, &d).unwrap());
        prop_assert_eq!(u0.raw(), u1.raw());
    }

    #[test]
    fn tensor_pairing_is_bilinear(a in -3.0f64..3.0, b in -3.0f64..3.0, seed in any::<u64>()) {
        let grid = GridSpec::new(1.0, 16, 0.5, 8).unwrap();
        let f = Field::from_fn(grid, Label::U, |t, x| (3.0 * t + 5.0 * x + (seed % 13) as f64).sin());
        let chi1: Vec<f64> = (0..grid.rows()).map(|k| grid.t(k).cos()).collect();
        let chi2: Vec<f64> = (0..grid.rows()).map(|k| grid.t(k) * grid.t(k)).collect();
        let psi: Vec<f64> = (0..grid.nx).map(|i| (6.0 * grid.x(i)).sin()).collect();
        let mix: Vec<f64> = chi1.iter().zip(&chi2).map(|(x, y)| a * x + b * y).collect();
        let lhs = pair_tensor(&f, &mix, &psi).unwrap();
        let rhs = a * pair_tensor(&f, &chi1, &psi).unwrap() + b * pair_tensor(&f, &chi2, &psi).unwrap();
        prop_assert!((lhs - rhs).abs() < 1e-12 * (1.0 + lhs.abs()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn residual_terms_are_linear_in_the_test_function(a in -2.0f64..2.0, b in -2.0f64..2.0, seed in any::<u64>()) {
        let grid = GridSpec::with_cfl(1.0, 64, 0.02).unwrap();
        let m = Mollifier::new(4).unwrap();
        let p = NoisePath::sample(grid, seed).unwrap();
        let z = solve_heat_ito(&InitialDatum::default(), &mollify(&p, &m).unwrap()).unwrap();
        let u = colehopf_transform(&z, &DerivativeOperator::centered(grid)).unwrap();
        let battery = make_test_battery(seed, 2, &grid).unwrap();
        let (phi, psi) = (LatticeTest::sample(&battery[0], &grid), LatticeTest::sample(&battery[1], &grid));
        let lhs = weak_residual_terms(&u, &p, &m, &phi.combine(a, &psi, b)).unwrap();
        let t1 = weak_residual_terms(&u, &p, &m, &phi).unwrap();
        let t2 = weak_residual_terms(&u, &p, &m, &psi).unwrap();
        for j in 0..4 {
            let rhs = a * t1[j] + b * t2[j];
            prop_assert!((lhs[j] - rhs).abs() <= 1e-11 * (1.0 + t1[j].abs() + t2[j].abs()), "term {}: {} vs {}", j, lhs[j], rhs);
        }
    }
}

#[test]
fn nonlinearity_limit_of_a_converging_sequence() {
    let grid = GridSpec::new(1.0, 64, 0.5, 64).unwrap();
    let battery = make_test_battery(1, 1, &grid).unwrap();
    let phi = &battery[0];
    let fields: Vec<Field> = [1.0, 2.0, 4.0, 8.0]
        .iter()
        .map(|n| Field::from_fn(grid, Label::U, move |t, x| (6.283185307179586 * x).sin() * (1.0 + t) + (12.0 * x).cos() / (n * n)))
        .collect();
    let seq = limit_nonlinearity(&fields, phi).unwrap();
    assert_eq!(seq.values.len(), 4);
    assert!(seq.differences_decrease(), "{:?}", seq.differences);
    // ratios of successive differences approach 1/4
    let r = seq.differences[2] / seq.differences[1];
    assert!((r - 0.25).abs() < 0.05, "ratio {r}");

    let constant = vec![fields[0].clone(), fields[0].clone(), fields[0].clone()];
    let seq = limit_nonlinearity(&constant, phi).unwrap();
    assert!(seq.differences.iter().all(|&d| d == 0.0));
    assert!(limit_nonlinearity(&fields[..2], phi).unwrap_err().is_configuration());
}
