//! Section of `U` at `t = 0` through a strict delta net.

use super::config::{RunConfig, Study};
use super::result::{decreasing, Check, Record, StudyResult, Trend};
use super::{replica_path, replicas};
use crate::colehopf::{colehopf_transform, DerivativeOperator};
use crate::error::Result;
use crate::grid::GridSpec;
use crate::heat::solve_heat_ito;
use crate::mollifier::Mollifier;
use crate::noise::{mollify, NoisePath};
use crate::weakform::{section_at_zero, section_target, StrictDeltaNet};

fn section_values(cfg: &RunConfig, path: &NoisePath, nets: &[StrictDeltaNet]) -> Result<Vec<f64>> {
    let grid = *path.grid();
    let noise = mollify(path, &Mollifier::new(cfg.n_scale)?)?;
    let z = solve_heat_ito(&cfg.initial, &noise)?;
    let u = colehopf_transform(&z, &DerivativeOperator::centered(grid))?;
    section_at_zero(&u, nets, &cfg.section.psi)
}

/// `⟨U, ρ_ε ⊗ ψ⟩` along the ε-ladder, deterministic and over `cfg.paths`
/// noise paths, against `⟨∂x f, ψ⟩ = -∫ f ψ'`.
pub fn run_section_study(cfg: &RunConfig) -> Result<StudyResult> {
    cfg.validate()?;
    let tol = cfg.tolerances;
    let grid: GridSpec = cfg.section.grid(&cfg.grid)?;
    let nets = cfg
        .section
        .eps_factors
        .iter()
        .map(|f| StrictDeltaNet::new(f * grid.horizon))
        .collect::<Result<Vec<_>>>()?;
    let target = section_target(&cfg.initial, &cfg.section.psi, grid.length);
    let mut res = StudyResult::new(Study::Section, cfg.clone());

    // net invariants
    let mass_err = nets.iter().map(|n| (n.mass() - 1.0).abs()).fold(0.0, f64::max);
    res.check(Check::at_most("net_mass", mass_err, tol.net_mass, "max |∫ρ_ε - 1| over the ladder"));
    let ends: Vec<f64> = nets.iter().map(|n| n.support().1).collect();
    let inside = nets.iter().all(|n| n.support().0 > 0.0 && n.support().1 < grid.horizon);
    res.check(Check::holds(
        "net_support",
        inside && decreasing(&ends),
        format!("supports inside (0, T) and shrinking; right ends {ends:?}"),
    ));
    let l1 = nets.iter().map(|n| n.l1_norm()).fold(0.0, f64::max);
    res.record(Record::value("net_l1_sup", 0, l1));

    // deterministic
    let det = section_values(cfg, &NoisePath::zeros(grid)?, &nets)?;
    for (j, v) in det.iter().enumerate() {
        res.record(Record::value("deterministic", j, *v).with_reference(target));
    }
    let last = *det.last().unwrap();
    res.check(Check::at_most(
        "deterministic_section",
        (last - target).abs() / target.abs(),
        tol.section_rel,
        format!("final rung ε = {:e}: {last:.6} vs target {target:.6}", nets.last().unwrap().eps),
    ));

    // stochastic
    let per_path = replicas(0..cfg.paths as u64, |k| section_values(cfg, &replica_path(grid, cfg.seed, k)?, &nets))?;
    let mut medians = Vec::with_capacity(nets.len());
    for j in 0..nets.len() {
        let mut r = Record::new("stochastic", j).with_reference(target);
        for p in &per_path {
            r.push_sample(p[j]);
        }
        medians.push(r.median().unwrap());
        res.record(r);
    }
    let r = res.find("stochastic", nets.len() - 1).unwrap();
    let (median, se) = (r.median().unwrap(), r.median_std_err().unwrap());
    res.check(Check::at_most(
        "stochastic_section",
        (median - target).abs() / se,
        tol.sigmas,
        format!("final-rung median {median:.6} over {} paths vs target {target:.6}, in standard errors of the median", cfg.paths),
    ));

    let eps: Vec<f64> = nets.iter().map(|n| n.eps).collect();
    res.trend(Trend::new("section_deterministic", "eps", "pairing", eps.iter().copied().zip(det).collect()));
    res.trend(Trend::new("section_median", "eps", "median_pairing", eps.into_iter().zip(medians).collect()));
    Ok(res.finish())
}
