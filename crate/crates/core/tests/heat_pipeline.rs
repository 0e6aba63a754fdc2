//! The heat solvers and the Cole–Hopf map, end to end.

use colehopf::noise::replica_seed;
use colehopf::spectral::heat_semigroup;
use colehopf::{
    colehopf_transform, log_field, mollify, solve_heat_ito, solve_heat_strat, solve_kpz_direct, DerivativeOperator, GridSpec,
    InitialDatum, Mollifier, NoisePath,
};

const BUMP: InitialDatum = InitialDatum::GaussianBump { amplitude: 0.5, center: 0.5, width: 0.1 };

#[test]
fn zero_noise_is_exact_heat_flow() {
    let grid = GridSpec::new(1.0, 64, 0.05, 40).unwrap();
    let path = NoisePath::zeros(grid).unwrap();
    let z = solve_heat_ito(&BUMP, &mollify(&path, &Mollifier::new(4).unwrap()).unwrap()).unwrap();
    let e_f: Vec<f64> = BUMP.sample(&grid).iter().map(|v| v.exp()).collect();
    let exact = heat_semigroup(&e_f, grid.horizon, grid.length);
    let h = log_field(&z).unwrap();
    for (i, e) in exact.iter().enumerate() {
        assert!((h.get(grid.nt, i) - e.ln()).abs() < 1e-8);
    }
}

#[test]
fn ito_solution_is_a_martingale() {
    // E Z(t, x) = (e^{tΔ} e^f)(x); with f = 0 that is 1
    let grid = GridSpec::new(1.0, 64, 0.05, 200).unwrap();
    let m = Mollifier::new(4).unwrap();
    let f = InitialDatum::Constant { value: 0.0 };
    let paths = 400;
    let mut mean = 0.0;
    let mut sq = 0.0;
    for k in 0..paths {
        let p = NoisePath::sample(grid, replica_seed(31, k)).unwrap();
        let z = solve_heat_ito(&f, &mollify(&p, &m).unwrap()).unwrap();
        let avg = z.row(grid.nt).iter().sum::<f64>() / grid.nx as f64;
        mean += avg;
        sq += avg * avg;
    }
    mean /= paths as f64;
    let se = ((sq / paths as f64 - mean * mean) / paths as f64).sqrt();
    assert!((mean - 1.0).abs() < 4.0 * se + 1e-3, "E Z = {mean} ± {se}");
}

#[test]
fn ito_and_stratonovich_differ_by_a_row_constant() {
    let grid = GridSpec::new(1.0, 64, 0.05, 200).unwrap();
    let m = Mollifier::new(4).unwrap();
    let p = NoisePath::sample(grid, 8).unwrap();
    let noise = mollify(&p, &m).unwrap();
    let z = log_field(&solve_heat_ito(&BUMP, &noise).unwrap()).unwrap();
    let g = log_field(&solve_heat_strat(&BUMP, &noise).unwrap()).unwrap();
    for k in [0, grid.nt / 2, grid.nt] {
        let shift = 0.5 * m.variance_rate() * grid.t(k);
        for i in 0..grid.nx {
            assert!((g.get(k, i) - z.get(k, i) - shift).abs() < 1e-10);
        }
    }
    let d = DerivativeOperator::centered(grid);
    let u = colehopf_transform(&solve_heat_ito(&BUMP, &noise).unwrap(), &d).unwrap();
    let v = colehopf_transform(&solve_heat_strat(&BUMP, &noise).unwrap(), &d).unwrap();
    assert!(u.difference(&v).unwrap().sup_norm() < 1e-9);
}

#[test]
fn deterministic_kpz_converges_to_log_heat() {
    let mut errors = Vec::new();
    for nx in [32, 64, 128] {
        let grid = GridSpec::with_cfl(1.0, nx, 0.02).unwrap();
        let path = NoisePath::zeros(grid).unwrap();
        let noise = mollify(&path, &Mollifier::new(4).unwrap()).unwrap();
        let h = solve_kpz_direct(&BUMP, &noise, 0.0).unwrap();
        let e_f: Vec<f64> = (0..nx).map(|i| BUMP.value(grid.x(i), 1.0).exp()).collect();
        let exact = heat_semigroup(&e_f, grid.horizon, grid.length);
        let err = (0..nx).map(|i| (h.get(grid.nt, i) - exact[i].ln()).abs()).fold(0.0, f64::max);
        errors.push(err);
    }
    let order = (errors[0] / errors[2]).log2() / 2.0;
    assert!(order >= 1.0, "errors {errors:?}, order {order}");
}

#[test]
fn shared_noise_couples_the_two_routes() {
    // with the Itô correction the direct KPZ solve tracks ln Z on one path
    let grid = GridSpec::with_cfl(1.0, 128, 0.02).unwrap();
    let m = Mollifier::new(4).unwrap();
    let p = NoisePath::sample(grid, 17).unwrap();
    let noise = mollify(&p, &m).unwrap();
    let h = log_field(&solve_heat_ito(&BUMP, &noise).unwrap()).unwrap();
    let coupled = solve_kpz_direct(&BUMP, &noise, 0.5 * m.variance_rate()).unwrap();
    let uncoupled = solve_kpz_direct(&BUMP, &mollify(&NoisePath::sample(grid, 18).unwrap(), &m).unwrap(), 0.5 * m.variance_rate()).unwrap();
    let near = coupled.difference(&h).unwrap().sup_norm();
    let far = uncoupled.difference(&h).unwrap().sup_norm();
    assert!(near < 0.01, "coupled distance {near}");
    assert!(far > 10.0 * near, "uncoupled {far} vs coupled {near}");
}

#[test]
fn solutions_stay_positive() {
    for (seed, n) in [(1, 2), (2, 4), (3, 8)] {
        let grid = GridSpec::with_cfl(1.0, 64, 0.1).unwrap();
        let p = NoisePath::sample(grid, seed).unwrap();
        let noise = mollify(&p, &Mollifier::new(n).unwrap()).unwrap();
        let z = solve_heat_ito(&InitialDatum::Sine { amplitude: 2.0, mode: 3, phase: 0.0 }, &noise).unwrap();
        assert!(z.raw().iter().all(|&v| v > 0.0));
    }
}
