//! Monte Carlo checks on sampled white noise and its mollification.

use colehopf::noise::{replica_seed, stochastic_integral, stochastic_integral_tensor};
use colehopf::{mollify, GridSpec, Mollifier, NoisePath};

const PATHS: u64 = 4000;

fn moments(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

fn indicator(grid: &GridSpec, a: f64, b: f64) -> Vec<f64> {
    (0..grid.nt * grid.nx)
        .map(|j| {
            let x = grid.x(j % grid.nx);
            if (a..b).contains(&x) { 1.0 } else { 0.0 }
        })
        .collect()
}

#[test]
fn total_mass_has_variance_t_times_l() {
    let grid = GridSpec::new(2.0, 16, 0.5, 8).unwrap();
    let ones = vec![1.0; grid.nt * grid.nx];
    let w: Vec<f64> = (0..PATHS)
        .map(|k| stochastic_integral(&ones, &NoisePath::sample(grid, replica_seed(11, k)).unwrap()).unwrap())
        .collect();
    let (mean, var) = moments(&w);
    let expected = grid.horizon * grid.length;
    assert!(mean.abs() < 4.0 * (expected / PATHS as f64).sqrt(), "mean {mean}");
    // relative standard error of a sample variance is sqrt(2 / N) ≈ 2.2%
    assert!((var / expected - 1.0).abs() < 0.1, "var {var} vs {expected}");
}

#[test]
fn disjoint_sets_are_uncorrelated() {
    let grid = GridSpec::new(1.0, 16, 1.0, 8).unwrap();
    let left = indicator(&grid, 0.0, 0.5);
    let right = indicator(&grid, 0.5, 1.0);
    let (mut a, mut b) = (Vec::new(), Vec::new());
    for k in 0..PATHS {
        let p = NoisePath::sample(grid, replica_seed(12, k)).unwrap();
        a.push(stochastic_integral(&left, &p).unwrap());
        b.push(stochastic_integral(&right, &p).unwrap());
    }
    let cov = a.iter().zip(&b).map(|(x, y)| x * y).sum::<f64>() / PATHS as f64;
    // each side has variance 1/2
    let se = 0.5 / (PATHS as f64).sqrt();
    assert!(cov.abs() < 4.0 * se, "cov {cov}");
    assert!((moments(&a).1 - 0.5).abs() < 0.05);
}

#[test]
fn normals_have_no_lag_one_correlation() {
    let grid = GridSpec::new(1.0, 256, 1.0, 256).unwrap();
    let p = NoisePath::sample(grid, 5).unwrap();
    let xi = p.normals();
    let n = (xi.len() - 1) as f64;
    let r = xi.windows(2).map(|w| w[0] * w[1]).sum::<f64>() / n;
    assert!(r.abs() < 4.0 / n.sqrt(), "lag-1 correlation {r}");
    let (mean, var) = moments(xi);
    assert!(mean.abs() < 4.0 / n.sqrt());
    assert!((var - 1.0).abs() < 0.02);
}

#[test]
fn tensor_integral_is_the_full_sum() {
    let grid = GridSpec::new(1.5, 24, 0.3, 10).unwrap();
    let p = NoisePath::sample(grid, 99).unwrap();
    let chi: Vec<f64> = (0..grid.rows()).map(|k| (grid.t(k) * 7.0).sin()).collect();
    let psi: Vec<f64> = (0..grid.nx).map(|i| (grid.x(i) * 3.0).cos()).collect();
    let full: Vec<f64> = (0..grid.nt).flat_map(|k| psi.iter().map(|p| chi[k] * p).collect::<Vec<_>>()).collect();
    let a = stochastic_integral_tensor(&chi, &psi, &p).unwrap();
    let b = stochastic_integral(&full, &p).unwrap();
    assert!((a - b).abs() < 1e-13 * (1.0 + a.abs()), "{a} vs {b}");
}

#[test]
fn coarsening_preserves_block_integrals() {
    let grid = GridSpec::new(1.0, 32, 0.25, 16).unwrap();
    let fine = NoisePath::sample(grid, 3).unwrap();
    let coarse = fine.coarsen(2, 4).unwrap();
    let ones = |g: &GridSpec| vec![1.0; g.nt * g.nx];
    let a = stochastic_integral(&ones(&grid), &fine).unwrap();
    let b = stochastic_integral(&ones(coarse.grid()), &coarse).unwrap();
    assert!((a - b).abs() < 1e-12, "{a} vs {b}");
    // coarse normals are again standard
    let big = NoisePath::sample(GridSpec::new(1.0, 256, 1.0, 256).unwrap(), 4).unwrap();
    let (_, var) = moments(big.coarsen(4, 4).unwrap().normals());
    assert!((var - 1.0).abs() < 0.1);
}

#[test]
fn mollified_quadratic_variation_grows_like_n() {
    let grid = GridSpec::new(1.0, 256, 0.25, 2048).unwrap();
    for n in [4, 8] {
        let m = Mollifier::new(n).unwrap();
        let mut qv = 0.0;
        let paths = 8;
        for k in 0..paths {
            let p = NoisePath::sample(grid, replica_seed(21, k)).unwrap();
            let noise = mollify(&p, &m).unwrap();
            qv += (0..grid.nx).map(|i| noise.quadratic_variation(i)).sum::<f64>() / grid.nx as f64;
        }
        qv /= paths as f64;
        let expected = grid.horizon * m.variance_rate();
        assert!((qv / expected - 1.0).abs() < 0.05, "n = {n}: {qv} vs {expected}");
    }
}
