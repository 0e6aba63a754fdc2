//! Second-order statistics of the lattice and mollified noise.

use super::config::{RunConfig, Study};
use super::result::{fit_slope_origin, Check, Record, StudyResult, Trend};
use super::{replica_path, replicas};
use crate::error::Result;
use crate::grid::GridSpec;
use crate::mollifier::Mollifier;
use crate::noise::{mollify, NoisePath};
use crate::quadrature::integrate;
use crate::weakform::make_test_battery;

/// Replica streams `QV_STREAM + k` feed the quadratic-variation paths, kept
/// apart from the covariance replicas.
pub const QV_STREAM: u64 = 1 << 40;

/// One `(x, y, s, t)` covariance probe, in cells and steps.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Probe {
    pub x: usize,
    pub y: usize,
    pub s: usize,
    pub t: usize,
}

/// 25 probes: five cell offsets (from coincident points to beyond the
/// kernel's reach) crossed with five time pairs.
pub fn probes(grid: &GridSpec, m: &Mollifier) -> Vec<Probe> {
    let nt = grid.nt;
    let reach = 2.0 * m.support_radius() / grid.dx();
    let offsets = [0.0, 0.125, 0.375, 0.75, 1.25].map(|f| (f * reach).round() as usize);
    let times = [(nt / 4, nt / 4), (nt / 4, nt), (nt / 2, nt / 2), (nt / 2, 3 * nt / 4), (nt, nt)];
    let mut out = Vec::with_capacity(25);
    for (a, &off) in offsets.iter().enumerate() {
        for (b, &(s, t)) in times.iter().enumerate() {
            let x = (grid.nx / 8 + 37 * (5 * a + b)) % grid.nx;
            out.push(Probe { x, y: (x + off) % grid.nx, s: s.max(1), t: t.max(1) });
        }
    }
    out
}

/// `(s ∧ t) C_n(x - y)` on the torus.
pub fn probe_reference(grid: &GridSpec, m: &Mollifier, p: &Probe) -> f64 {
    let z = grid.x(p.x) - grid.x(p.y);
    grid.t(p.s.min(p.t)) * m.periodic_autocorrelation(z, grid.length)
}

struct Integrand {
    chi: Vec<f64>,
    psi: Vec<f64>,
    reference: f64,
}

/// `g = ∂xφ = χ(t) ψ'(x)` for battery functions `φ`, with the quadrature
/// value of `∫∫ g²`.
fn integrands(cfg: &RunConfig, grid: &GridSpec) -> Result<Vec<Integrand>> {
    let battery = make_test_battery(cfg.battery_seed, cfg.covariance.integrands, grid)?;
    Ok(battery
        .iter()
        .map(|phi| {
            let (a, b) = phi.temporal.support();
            let (c, d) = phi.spatial.support();
            let time = integrate(|t| phi.temporal.value(t).powi(2), a, b, 1e-13);
            let space = integrate(|x| phi.spatial.d1(x).powi(2), c, d, 1e-13);
            // left-point sampling: the integrand on cell [t_k, t_k+1) is χ(t_k)
            let chi = (0..grid.nt).map(|k| phi.temporal.value(grid.t(k))).collect();
            Integrand { chi, psi: phi.spatial_d1_samples(grid), reference: time * space }
        })
        .collect())
}

fn isometry_sample(path: &NoisePath, g: &[Integrand]) -> Vec<f64> {
    let grid = path.grid();
    let scale = path.increment_scale() * grid.dx();
    let mut acc = vec![0.0; g.len()];
    for k in 0..grid.nt {
        let row = path.normals_row(k);
        for (a, it) in acc.iter_mut().zip(g) {
            let c = it.chi[k];
            if c != 0.0 {
                *a += c * row.iter().zip(&it.psi).map(|(x, p)| x * p).sum::<f64>();
            }
        }
    }
    acc.into_iter().map(|a| (a * scale).powi(2)).collect()
}

/// Empirical covariance surface, Itô isometry, and quadratic variation of
/// `W^n` against `(s ∧ t) C_n(x - y)`, `∫∫ g²`, and `n C t`.
pub fn run_covariance_study(cfg: &RunConfig) -> Result<StudyResult> {
    cfg.validate()?;
    let tol = cfg.tolerances;
    let grid = cfg.grid_spec()?;
    let m = Mollifier::new(cfg.n_scale)?;
    let kernel = m.lattice_kernel(&grid)?;
    let probes = probes(&grid, &m);
    let probe_points: Vec<(usize, usize)> = probes.iter().flat_map(|p| [(p.s, p.x), (p.t, p.y)]).collect();
    let g = integrands(cfg, &grid)?;

    let samples = replicas(0..cfg.replicas as u64, |k| {
        let path = replica_path(grid, cfg.seed, k)?;
        let w = path.mollified_cumulative(&kernel, &probe_points)?;
        let products: Vec<f64> = w.chunks_exact(2).map(|c| c[0] * c[1]).collect();
        Ok((products, isometry_sample(&path, &g)))
    })?;

    let mut res = StudyResult::new(Study::Covariance, cfg.clone());
    let mut cov: Vec<Record> = probes
        .iter()
        .enumerate()
        .map(|(j, p)| Record::new("covariance", j).with_reference(probe_reference(&grid, &m, p)))
        .collect();
    let mut iso: Vec<Record> = g
        .iter()
        .enumerate()
        .map(|(j, it)| Record::new("isometry", j).with_reference(it.reference))
        .collect();
    for (products, squares) in &samples {
        for (r, &x) in cov.iter_mut().zip(products) {
            r.push(x);
        }
        for (r, &x) in iso.iter_mut().zip(squares) {
            r.push(x);
        }
    }
    let within = |r: &Record| (r.mean() - r.reference.unwrap()).abs() <= tol.sigmas * r.std_err();
    let worst_z = |rs: &[Record]| {
        rs.iter()
            .map(|r| (r.mean() - r.reference.unwrap()).abs() / r.std_err())
            .fold(0.0, f64::max)
    };
    let cov_ok = cov.iter().filter(|r| within(r)).count();
    res.check(Check::at_most(
        "covariance_surface",
        worst_z(&cov),
        tol.sigmas,
        format!("{cov_ok}/{} probes within {} standard errors of (s∧t) C_n(x-y)", cov.len(), tol.sigmas),
    ));
    let iso_ok = iso.iter().filter(|r| within(r)).count();
    res.check(Check::at_most(
        "isometry",
        worst_z(&iso),
        tol.sigmas,
        format!("{iso_ok}/{} integrands within {} standard errors of ∫∫g²", iso.len(), tol.sigmas),
    ));
    res.trend(Trend::new(
        "covariance",
        "reference",
        "empirical",
        cov.iter().map(|r| (r.reference.unwrap(), r.mean())).collect(),
    ));
    res.records.extend(cov);
    res.records.extend(iso);

    quadratic_variation(cfg, &mut res)?;
    Ok(res.finish())
}

fn quadratic_variation(cfg: &RunConfig, res: &mut StudyResult) -> Result<()> {
    let tol = cfg.tolerances;
    let base = cfg.grid_spec()?;
    let grid = GridSpec::new(base.length, base.nx, base.horizon, cfg.covariance.qv_steps)?;
    let horizon = grid.horizon;

    // a single path at a single cell
    let m = Mollifier::new(cfg.n_scale)?;
    let path = replica_path(grid, cfg.seed, QV_STREAM)?;
    let noise = mollify(&path, &m)?;
    let expected = m.variance_rate() * horizon;
    let cell = grid.nx / 2;
    let qv = noise.quadratic_variation(cell);
    res.record(Record::value("qv_path", 0, qv).with_reference(expected));
    let rel = (qv - expected).abs() / expected;
    res.check(Check::at_most(
        "qv_single_path",
        rel,
        tol.qv_rel,
        format!("QV at cell {cell} over Nt = {} steps vs n C T = {expected:.6}", grid.nt),
    ));
    let inside = (0..grid.nx)
        .filter(|&i| (noise.quadratic_variation(i) - expected).abs() <= tol.qv_rel * expected)
        .count();
    res.check(
        Check::holds(
            "qv_cells_within",
            inside == grid.nx,
            format!("{inside}/{} cells of the same path within {}", grid.nx, tol.qv_rel),
        )
        .informational(),
    );
    drop(noise);

    // QV / n along the ladder: spatial mean, averaged over independent paths
    let ladder = cfg.covariance.qv_ladder;
    let per_path = super::replicas(0..cfg.covariance.qv_paths as u64, |k| {
        let path = replica_path(grid, cfg.seed, QV_STREAM + 1 + k)?;
        ladder
            .iter()
            .map(|&n| {
                let noise = mollify(&path, &Mollifier::new(n)?)?;
                Ok(noise.increments().iter().map(|w| w * w).sum::<f64>() / grid.nx as f64)
            })
            .collect::<Result<Vec<f64>>>()
    })?;
    let mut ratios = Vec::with_capacity(ladder.len());
    let mut points = Vec::with_capacity(ladder.len());
    for (j, &n) in ladder.iter().enumerate() {
        let mut r = Record::new("qv_mean", j).with_reference(Mollifier::new(n)?.variance_rate() * horizon);
        for p in &per_path {
            r.push(p[j]);
        }
        ratios.push(r.mean() / n as f64);
        points.push((n as f64, r.mean()));
        res.record(r);
    }
    let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
    let spread = ratios.iter().fold(0.0_f64, |a, r| a.max((r - mean).abs())) / mean;
    res.check(Check::at_most(
        "qv_scaling",
        spread,
        tol.qv_scaling_rel,
        format!("max deviation of QV/n from its mean over n = {ladder:?}"),
    ));
    let doubling = points
        .windows(2)
        .map(|w| (w[1].1 / w[0].1) / (w[1].0 / w[0].0) - 1.0)
        .fold(0.0_f64, |a, d| a.max(d.abs()));
    res.check(
        Check::at_most("qv_doubling", doubling, 0.1, "QV ratio under doubling n vs 2").informational(),
    );
    let c = Mollifier::new(1)?.c_constant();
    res.slope("qv_per_n_over_CT", fit_slope_origin(&points) / (c * horizon));
    res.trend(Trend::new("qv_ladder", "n", "qv_over_n", points.iter().map(|&(n, q)| (n, q / n)).collect()));
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn probes_cover_near_and_far_offsets() {
        let grid = GridSpec::new(1.0, 256, 0.25, 1024).unwrap();
        let m = Mollifier::new(8).unwrap();
        let p = probes(&grid, &m);
        assert_eq!(p.len(), 25);
        let zero = p.iter().filter(|q| probe_reference(&grid, &m, q) == 0.0).count();
        assert_eq!(zero, 5);
        let diag = p[4];
        let expect = 0.25 * m.c_constant() * 8.0;
        assert!((probe_reference(&grid, &m, &diag) - expect).abs() < 1e-8 * expect);
    }

    #[test]
    fn small_study_is_thread_count_independent() {
        let mut cfg = RunConfig { study: Some(Study::Covariance), ..RunConfig::default() };
        cfg.grid.nx = 64;
        cfg.grid.nt = Some(64);
        cfg.replicas = 40;
        cfg.covariance.qv_steps = 256;
        cfg.covariance.qv_paths = 2;
        cfg.covariance.integrands = 3;
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let three = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
        let a = one.install(|| run_covariance_study(&cfg)).unwrap();
        let b = three.install(|| run_covariance_study(&cfg)).unwrap();
        assert_eq!(a.to_json(), b.to_json());
    }
}
