//! Refinement studies on coupled noise: the finest path is sampled once and
//! coarsened to each level, so every level sees the same white noise.

use super::config::{RunConfig, Study};
use super::result::{decreasing, fit_order, Check, Record, StudyResult, Trend};
use super::{replica_path, replicas};
use crate::colehopf::{colehopf_transform, stability_compare, DerivativeOperator};
use crate::error::Result;
use crate::grid::GridSpec;
use crate::heat::{solve_heat_ito, solve_kpz_direct, InitialDatum};
use crate::mollifier::Mollifier;
use crate::noise::{mollify, NoisePath};
use crate::weakform::{make_test_battery, nonlinearity_pairing, weak_residual, NonlinearitySequence, TestFunction};

/// Replica-0 noise at each level, coarsest first.
fn level_paths(cfg: &RunConfig) -> Result<Vec<NoisePath>> {
    let fine = replica_path(cfg.grid_spec()?, cfg.seed, 0)?;
    let mut out = Vec::with_capacity(cfg.levels);
    for level in 0..cfg.levels - 1 {
        let (fx, ft) = cfg.level_factors(level);
        out.push(fine.coarsen(fx, ft)?);
    }
    out.push(fine);
    Ok(out)
}

/// The battery, drawn once on the finest grid and shared by every level.
fn battery(cfg: &RunConfig) -> Result<Vec<TestFunction>> {
    make_test_battery(cfg.battery_seed, cfg.battery_size, &cfg.grid_spec()?)
}

/// Weak and sup distances between `V_n = D H_n` (explicit KPZ, no drift
/// correction) and `∂x ln Z_n` over the mesh levels.
pub fn run_stability_study(cfg: &RunConfig) -> Result<StudyResult> {
    cfg.validate()?;
    let tol = cfg.tolerances;
    let battery = battery(cfg)?;
    let m = Mollifier::new(cfg.n_scale)?;
    let mut res = StudyResult::new(Study::Stability, cfg.clone());

    let mut means = Vec::with_capacity(cfg.levels);
    let mut trend = Vec::with_capacity(cfg.levels);
    let mut finest_max = 0.0;
    for (level, path) in level_paths(cfg)?.iter().enumerate() {
        let grid = *path.grid();
        let noise = mollify(path, &m)?;
        let z = solve_heat_ito(&cfg.initial, &noise)?;
        let h = solve_kpz_direct(&cfg.initial, &noise, 0.0)?;
        let d = DerivativeOperator::centered(grid);
        let v = d.apply(&h, crate::field::Label::V)?;
        drop(h);
        let report = stability_compare(&v, &z, &d, &battery)?;
        let mut rel = Record::new("weak_relative", level);
        for w in &report.weak {
            rel.push(w.relative());
        }
        res.record(Record::value("sup_distance", level, report.sup_distance));
        res.record(Record::value("sup_norm_u", level, report.sup_norm_u));
        means.push(rel.mean());
        trend.push((grid.dx(), rel.mean()));
        finest_max = report.max_relative();
        res.record(rel);
    }
    res.check(Check::at_most(
        "weak_distance",
        finest_max,
        tol.stability_rel,
        format!("max over {} battery functions of |⟨V-U, φ⟩| / ⟨|U|, |φ|⟩ at the finest level", battery.len()),
    ));
    res.check(Check::holds(
        "refinement_trend",
        decreasing(&means),
        format!("battery-mean relative distance by level: {means:?}"),
    ));
    res.slope("distance_order_dx", fit_order(&trend));
    res.trend(Trend::new("stability", "dx", "mean_relative_distance", trend));

    degenerate(cfg, &battery, &m, &mut res)?;
    n_sweep(cfg, &battery, &mut res)?;
    Ok(res.finish())
}

fn zero_noise_distance(grid: GridSpec, f: &InitialDatum, m: &Mollifier, battery: &[TestFunction]) -> Result<f64> {
    let path = NoisePath::zeros(grid)?;
    let noise = mollify(&path, m)?;
    let z = solve_heat_ito(f, &noise)?;
    let h = solve_kpz_direct(f, &noise, 0.0)?;
    let d = DerivativeOperator::centered(grid);
    let v = d.apply(&h, crate::field::Label::V)?;
    let r = stability_compare(&v, &z, &d, battery)?;
    Ok(r.sup_distance.max(r.weak.iter().map(|w| w.distance).fold(0.0, f64::max)))
}

/// Zero noise. With constant `f` both constructions are identically zero;
/// with the configured `f` they are two discretizations of the same
/// deterministic Burgers flow and differ at truncation-error level.
fn degenerate(cfg: &RunConfig, battery: &[TestFunction], m: &Mollifier, res: &mut StudyResult) -> Result<()> {
    let grid = cfg.grid_spec()?;
    let constant = zero_noise_distance(grid, &InitialDatum::Constant { value: 0.5 }, m, battery)?;
    res.record(Record::value("zero_noise_constant", 0, constant));
    res.check(Check::at_most("zero_noise", constant, cfg.tolerances.degenerate_abs, "zero noise, constant f"));
    let smooth = zero_noise_distance(grid, &cfg.initial, m, battery)?;
    res.record(Record::value("zero_noise_configured", 0, smooth));
    res.check(
        Check::at_most("zero_noise_configured_f", smooth, cfg.tolerances.degenerate_abs, "zero noise, configured f (O(dx²) expected)")
            .informational(),
    );
    Ok(())
}

/// Finest-level distance for each `n` in the ladder.
fn n_sweep(cfg: &RunConfig, battery: &[TestFunction], res: &mut StudyResult) -> Result<()> {
    let grid = cfg.grid_spec()?;
    let path = replica_path(grid, cfg.seed, 0)?;
    let d = DerivativeOperator::centered(grid);
    let mut points = Vec::new();
    for (j, &n) in cfg.n_ladder.iter().enumerate() {
        let m = Mollifier::new(n)?;
        if m.check_resolution(&grid).is_err() {
            continue;
        }
        let noise = mollify(&path, &m)?;
        let z = solve_heat_ito(&cfg.initial, &noise)?;
        let h = solve_kpz_direct(&cfg.initial, &noise, 0.0)?;
        let v = d.apply(&h, crate::field::Label::V)?;
        drop(h);
        let r = stability_compare(&v, &z, &d, battery)?;
        res.record(Record::value("n_sweep_max_relative", j, r.max_relative()));
        points.push((n as f64, r.max_relative()));
    }
    if !points.is_empty() {
        let worst = points.iter().map(|p| p.1).fold(0.0, f64::max);
        res.check(
            Check::at_most("weak_distance_n_sweep", worst, cfg.tolerances.stability_rel, format!("finest level, n over {:?}", cfg.n_ladder))
                .informational(),
        );
        res.trend(Trend::new("stability_n", "n", "max_relative_distance", points));
    }
    Ok(())
}

/// Weak residual of the Cole–Hopf velocity per battery function and level,
/// the gap between the mollified and unmollified stochastic terms along the
/// n-ladder, and the Cauchy trend of the nonlinearity.
pub fn run_residual_study(cfg: &RunConfig) -> Result<StudyResult> {
    cfg.validate()?;
    let tol = cfg.tolerances;
    let battery = battery(cfg)?;
    let m = Mollifier::new(cfg.n_scale)?;
    let mut res = StudyResult::new(Study::Residual, cfg.clone());

    let mut worst = Vec::with_capacity(cfg.levels);
    let mut trend = Vec::with_capacity(cfg.levels);
    for (level, path) in level_paths(cfg)?.iter().enumerate() {
        let grid = *path.grid();
        let noise = mollify(path, &m)?;
        let z = solve_heat_ito(&cfg.initial, &noise)?;
        drop(noise);
        let u = colehopf_transform(&z, &DerivativeOperator::centered(grid))?;
        drop(z);
        let mut normalized = Record::new("normalized_residual", level);
        let mut max: f64 = 0.0;
        for phi in &battery {
            let r = weak_residual(&u, path, &m, phi)?;
            for (t, v) in r.terms.iter().enumerate() {
                res.record(Record::value(format!("term{}_phi{}", t + 1, phi.id), level, *v));
            }
            normalized.push(r.normalized());
            max = max.max(r.normalized());
        }
        worst.push(max);
        trend.push((grid.dx(), max));
        res.record(normalized);
    }
    let finest = *worst.last().unwrap();
    res.check(Check::at_most(
        "residual",
        finest,
        tol.residual_rel,
        format!("max over {} battery functions of |residual| / max |term| at the finest level", battery.len()),
    ));
    res.check(Check::holds(
        "refinement_trend",
        decreasing(&worst),
        format!("battery-max normalized residual by level: {worst:?}"),
    ));
    res.slope("residual_order_dx", fit_order(&trend));
    res.trend(Trend::new("residual", "dx", "max_normalized_residual", trend));

    stochastic_gap(cfg, &battery, &mut res)?;
    nonlinearity(cfg, &battery, &mut res)?;
    Ok(res.finish())
}

/// `∫(∂xφ * δ_n) dW - ∫ ∂xφ dW` on `cfg.paths` independent paths; the root
/// mean square over paths and battery must decrease along the n-ladder.
fn stochastic_gap(cfg: &RunConfig, battery: &[TestFunction], res: &mut StudyResult) -> Result<()> {
    let grid = cfg.grid_spec()?;
    let dx = grid.dx();
    let dt = grid.dt();
    // per φ: χ on time cells, ψ', and (ψ' * δ_n) - ψ' for every n
    let chis: Vec<Vec<f64>> = battery
        .iter()
        .map(|phi| (0..grid.nt).map(|k| phi.temporal.value(grid.t(k))).collect())
        .collect();
    let mut diffs: Vec<Vec<Vec<f64>>> = Vec::with_capacity(cfg.n_ladder.len());
    for &n in &cfg.n_ladder {
        let kernel = Mollifier::new(n)?.lattice_kernel(&grid)?;
        diffs.push(
            battery
                .iter()
                .map(|phi| {
                    let psi_x = phi.spatial_d1_samples(&grid);
                    let mut smooth = vec![0.0; grid.nx];
                    kernel.convolve_direct(&psi_x, &mut smooth);
                    smooth.iter().zip(&psi_x).map(|(s, p)| s - p).collect()
                })
                .collect(),
        );
    }
    let per_path = replicas(0..cfg.paths as u64, |k| {
        let path = replica_path(grid, cfg.seed, k)?;
        let scale = path.increment_scale() * dx;
        // Y_φ = Σ_k χ(t_k) ξ_k, so each gap is a single dot product
        let ys: Vec<Vec<f64>> = chis
            .iter()
            .map(|chi| {
                let mut y = vec![0.0; grid.nx];
                for (k, &c) in chi.iter().enumerate() {
                    if c != 0.0 {
                        for (a, x) in y.iter_mut().zip(path.normals_row(k)) {
                            *a += c * x;
                        }
                    }
                }
                y
            })
            .collect();
        Ok(diffs
            .iter()
            .map(|per_phi| {
                per_phi
                    .iter()
                    .zip(&ys)
                    .map(|(d, y)| scale * d.iter().zip(y).map(|(a, b)| a * b).sum::<f64>())
                    .collect::<Vec<f64>>()
            })
            .collect::<Vec<_>>())
    })?;
    let mut rms = Vec::with_capacity(cfg.n_ladder.len());
    let mut points = Vec::with_capacity(cfg.n_ladder.len());
    for (j, &n) in cfg.n_ladder.iter().enumerate() {
        // isometry: E[gap²] = Σ χ² dt · Σ d² dx
        let expected: f64 = chis
            .iter()
            .zip(&diffs[j])
            .map(|(chi, d)| chi.iter().map(|c| c * c).sum::<f64>() * dt * d.iter().map(|v| v * v).sum::<f64>() * dx)
            .sum::<f64>()
            / battery.len() as f64;
        let mut r = Record::new("stochastic_gap_sq", j).with_reference(expected);
        for p in &per_path {
            for g in &p[j] {
                r.push(g * g);
            }
        }
        rms.push(r.mean().sqrt());
        points.push((n as f64, r.mean().sqrt()));
        res.record(r);
    }
    res.check(Check::holds(
        "stochastic_gap_trend",
        decreasing(&rms),
        format!("RMS mollified-minus-unmollified stochastic term over n = {:?}: {rms:?}", cfg.n_ladder),
    ));
    res.slope("stochastic_gap_order_n", fit_order(&points));
    res.trend(Trend::new("stochastic_gap", "n", "rms_gap", points));
    Ok(())
}

/// `-⟨U_n², ∂xφ⟩` along the n-ladder on one path; successive differences
/// should shrink.
fn nonlinearity(cfg: &RunConfig, battery: &[TestFunction], res: &mut StudyResult) -> Result<()> {
    let grid = cfg.grid_spec()?;
    let path = replica_path(grid, cfg.seed, 0)?;
    let d = DerivativeOperator::centered(grid);
    let mut values = vec![Vec::with_capacity(cfg.n_ladder.len()); battery.len()];
    for &n in &cfg.n_ladder {
        let noise = mollify(&path, &Mollifier::new(n)?)?;
        let z = solve_heat_ito(&cfg.initial, &noise)?;
        let u = colehopf_transform(&z, &d)?;
        for (vals, phi) in values.iter_mut().zip(battery) {
            vals.push(nonlinearity_pairing(&u, phi)?);
        }
    }
    let mut cauchy = 0;
    for (i, vals) in values.into_iter().enumerate() {
        let seq = NonlinearitySequence::from_values(vals)?;
        cauchy += seq.differences_decrease() as usize;
        for (j, v) in seq.values.iter().enumerate() {
            res.record(Record::value(format!("nonlinearity_phi{i}"), j, *v));
        }
    }
    res.check(
        Check::holds(
            "nonlinearity_cauchy",
            cauchy == battery.len(),
            format!("{cauchy}/{} battery functions with shrinking successive differences", battery.len()),
        )
        .informational(),
    );
    Ok(())
}
