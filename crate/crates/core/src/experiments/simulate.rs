//! One full pipeline run with field dumps.

use std::path::{Path, PathBuf};

use super::config::{RunConfig, Study};
use super::replica_path;
use super::result::{Check, Record, StudyResult};
use crate::colehopf::{colehopf_transform, DerivativeOperator};
use crate::error::Result;
use crate::field::{Field, Label};
use crate::heat::{solve_heat_ito, solve_kpz_direct};
use crate::mollifier::Mollifier;
use crate::noise::mollify;

/// Fields with more values than this are dumped in binary only.
pub const CSV_LIMIT: usize = 1 << 21;

fn dump(field: &Field, base: &Path, res: &mut StudyResult) -> Result<()> {
    let stem = base.file_stem().and_then(|s| s.to_str()).unwrap_or("simulate");
    let name = |ext: &str| -> PathBuf { base.with_file_name(format!("{stem}.{}.{ext}", field.label())) };
    field.save_binary(name("bin"))?;
    let csv = field.raw().len() <= CSV_LIMIT;
    if csv {
        field.save_csv(name("csv"))?;
    }
    res.check(
        Check::holds(
            format!("dump_{}", field.label()),
            true,
            format!("{}{}", name("bin").display(), if csv { " (+ csv)" } else { "" }),
        )
        .informational(),
    );
    Ok(())
}

/// Solves for `Z_n`, `U_n = ∂x ln Z_n`, and `V_n = ∂x H_n` on replica 0 and
/// dumps them next to `cfg.out` as `<stem>.<label>.bin` (and `.csv` when
/// small enough).
pub fn run_simulation(cfg: &RunConfig) -> Result<StudyResult> {
    cfg.validate()?;
    let grid = cfg.grid_spec()?;
    let m = Mollifier::new(cfg.n_scale)?;
    let path = replica_path(grid, cfg.seed, 0)?;
    let noise = mollify(&path, &m)?;
    let z = solve_heat_ito(&cfg.initial, &noise)?;
    let d = DerivativeOperator::centered(grid);
    let u = colehopf_transform(&z, &d)?;
    let h = solve_kpz_direct(&cfg.initial, &noise, 0.0)?;
    let v = d.apply(&h, Label::V)?;
    drop(h);

    let mut res = StudyResult::new(Study::Simulate, cfg.clone());
    let positive = z.raw().iter().all(|&x| x > 0.0);
    res.check(Check::holds("positivity", positive, "Z_n > 0 on the whole lattice"));
    res.record(Record::value("sup_u", 0, u.sup_norm()));
    res.record(Record::value("sup_v_minus_u", 0, v.difference(&u)?.sup_norm()));
    res.record(Record::value("final_log_gauge", 0, *z.log_gauge().last().unwrap()));
    if let Some(out) = &cfg.out {
        if let Some(dir) = out.parent() {
            if !dir.as_os_str().is_empty() {
                std::fs::create_dir_all(dir)?;
            }
        }
        for f in [&z, &u, &v] {
            dump(f, out, &mut res)?;
        }
    }
    Ok(res.finish())
}
