//! Itô–Stratonovich drift: the ratio `G_n / Z_n` on shared noise.

use super::config::{RunConfig, Study};
use super::result::{fit_slope, Check, Record, StudyResult, Trend};
use super::{replica_path, thin};
use crate::colehopf::{colehopf_transform, DerivativeOperator};
use crate::error::Result;
use crate::field::Field;
use crate::heat::{solve_heat_ito, solve_heat_strat, solve_kpz_direct};
use crate::mollifier::Mollifier;
use crate::noise::mollify;

/// Row `k` of `ln F`, computed from the stored factors.
fn log_row(f: &Field, k: usize) -> impl Iterator<Item = f64> + '_ {
    let g = f.log_gauge()[k];
    f.row_raw(k).iter().map(move |v| v.ln() + g)
}

/// Per-row spatial mean and variance of `ln G - ln Z`.
pub fn log_ratio_rows(g: &Field, z: &Field) -> Vec<(f64, f64, f64)> {
    let grid = *z.grid();
    let nx = grid.nx as f64;
    (0..grid.rows())
        .map(|k| {
            let d: Vec<f64> = log_row(g, k).zip(log_row(z, k)).map(|(a, b)| a - b).collect();
            let mean = d.iter().sum::<f64>() / nx;
            let var = d.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / nx;
            (grid.t(k), mean, var)
        })
        .collect()
}

/// `sup |H - ln F|`.
fn sup_log_distance(h: &Field, f: &Field) -> f64 {
    let grid = *h.grid();
    (0..grid.rows())
        .flat_map(|k| {
            let hr = h.row_raw(k).to_vec();
            log_row(f, k).zip(hr).map(|(a, b)| (a - b).abs()).collect::<Vec<_>>()
        })
        .fold(0.0, f64::max)
}

/// Fits `ln(G_n / Z_n)(t) = α t` for each `n` in the ladder and checks
/// `α / (n C) = ½`, spatial constancy of the ratio, and gauge invariance of
/// the Cole–Hopf transform. Also compares the explicit KPZ height with
/// `ln Z_n` and `ln G_n`.
pub fn run_correction_study(cfg: &RunConfig) -> Result<StudyResult> {
    cfg.validate()?;
    let tol = cfg.tolerances;
    let grid = cfg.grid_spec()?;
    let path = replica_path(grid, cfg.seed, 0)?;
    let d = DerivativeOperator::centered(grid);
    let mut res = StudyResult::new(Study::Correction, cfg.clone());

    let mut worst_slope: f64 = 0.0;
    let mut worst_var: f64 = 0.0;
    let mut gauge_ok = true;
    for (j, &n) in cfg.n_ladder.iter().enumerate() {
        let m = Mollifier::new(n)?;
        let noise = mollify(&path, &m)?;
        let z = solve_heat_ito(&cfg.initial, &noise)?;
        let g = solve_heat_strat(&cfg.initial, &noise)?;
        let rows = log_ratio_rows(&g, &z);
        let points: Vec<(f64, f64)> = rows.iter().map(|r| (r.0, r.1)).collect();
        let alpha = fit_slope(&points);
        let ratio = alpha / m.variance_rate();
        let var = rows.iter().map(|r| r.2).fold(0.0, f64::max);
        worst_slope = worst_slope.max((ratio - 0.5).abs());
        worst_var = worst_var.max(var);
        res.record(Record::value("alpha_over_nC", j, ratio).with_reference(0.5));
        res.record(Record::value("ratio_spatial_variance", j, var));
        res.slope(format!("alpha_n{n}"), alpha);
        res.trend(Trend::new(&format!("log_ratio_n{n}"), "t", "ln(G/Z)", thin(&points, 257)));

        let ug = colehopf_transform(&g, &d)?;
        let uz = colehopf_transform(&z, &d)?;
        let same = ug.raw() == uz.raw();
        gauge_ok &= same;
        drop((ug, uz));

        if n == cfg.n_scale {
            let h_ito = solve_kpz_direct(&cfg.initial, &noise, 0.5 * m.variance_rate())?;
            let ito = sup_log_distance(&h_ito, &z);
            drop(h_ito);
            let h_strat = solve_kpz_direct(&cfg.initial, &noise, 0.0)?;
            let strat = sup_log_distance(&h_strat, &g);
            res.record(Record::value("kpz_ito_sup", j, ito));
            res.record(Record::value("kpz_strat_sup", j, strat));
            res.check(Check::at_most("kpz_vs_log_z", ito, tol.kpz_sup, format!("sup |H_n - ln Z_n|, correction nC/2, n = {n}")));
            res.check(Check::at_most("kpz_vs_log_g", strat, tol.kpz_sup, format!("sup |H_n - ln G_n|, correction 0, n = {n}")));
        }
    }
    res.check(Check::at_most(
        "slope",
        worst_slope,
        tol.slope_abs,
        format!("max |α/(nC) - 1/2| over n = {:?}", cfg.n_ladder),
    ));
    res.check(Check::at_most("ratio_constant_in_space", worst_var, tol.ratio_variance, "max spatial variance of ln(G/Z) per row"));
    res.check(Check::holds("gauge_invariance", gauge_ok, "colehopf(G_n) and colehopf(Z_n) bit-identical"));
    Ok(res.finish())
}
