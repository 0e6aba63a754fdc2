//! Run configuration: a JSON file, optionally overridden from the command
//! line, validated in one pass.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::heat::InitialDatum;
use crate::mollifier::{Mollifier, MIN_SUPPORT_CELLS};
use crate::weakform::Bump;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Study {
    Covariance,
    Correction,
    Stability,
    Residual,
    Section,
    Simulate,
}

impl Study {
    pub const ALL: [Study; 6] = [
        Study::Covariance,
        Study::Correction,
        Study::Stability,
        Study::Residual,
        Study::Section,
        Study::Simulate,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Study::Covariance => "covariance",
            Study::Correction => "correction",
            Study::Stability => "stability",
            Study::Residual => "residual",
            Study::Section => "section",
            Study::Simulate => "simulate",
        }
    }
}

impl fmt::Display for Study {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Study {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Study::ALL
            .into_iter()
            .find(|st| st.name() == s)
            .ok_or_else(|| Error::config(format!("unknown study '{s}'")))
    }
}

/// Grid as written in a config file; `Nt` defaults to the explicit-scheme
/// bound `dt <= dx²/4`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(rename = "L")]
    pub length: f64,
    #[serde(rename = "Nx")]
    pub nx: usize,
    #[serde(rename = "T")]
    pub horizon: f64,
    #[serde(rename = "Nt", default, skip_serializing_if = "Option::is_none")]
    pub nt: Option<usize>,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig { length: 1.0, nx: 256, horizon: 0.25, nt: None }
    }
}

impl GridConfig {
    fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        if !(self.length > 0.0 && self.length.is_finite()) {
            v.push(format!("grid.L must be positive, got {}", self.length));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            v.push(format!("grid.T must be positive, got {}", self.horizon));
        }
        if self.nx < 2 {
            v.push(format!("grid.Nx must be >= 2, got {}", self.nx));
        }
        if let Some(nt) = self.nt {
            if nt < 2 {
                v.push(format!("grid.Nt must be >= 2, got {nt}"));
            }
        }
        v
    }

    pub fn resolve(&self) -> Result<GridSpec> {
        match self.nt {
            Some(nt) => GridSpec::new(self.length, self.nx, self.horizon, nt),
            None => GridSpec::with_cfl(self.length, self.nx, self.horizon),
        }
    }
}

/// Acceptance thresholds. Every field can be overridden in the config file.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Monte Carlo band half-width in standard errors.
    pub sigmas: f64,
    /// Per-path quadratic variation vs `n C T`, relative.
    pub qv_rel: f64,
    /// Spread of `QV / n` along the n-ladder, relative to its mean.
    pub qv_scaling_rel: f64,
    /// `|α / (n C) - ½|`.
    pub slope_abs: f64,
    /// Spatial variance of `ln(G / Z)` per row.
    pub ratio_variance: f64,
    /// `sup |H_n - ln Z_n|` with the Itô correction.
    pub kpz_sup: f64,
    /// Weak distance of `V_n` from `∂x ln Z_n`, relative to `⟨|U|, |φ|⟩`.
    pub stability_rel: f64,
    /// Zero-noise agreement.
    pub degenerate_abs: f64,
    /// Residual relative to the largest of its four terms.
    pub residual_rel: f64,
    /// Final-rung section error relative to the target.
    pub section_rel: f64,
    /// Delta-net mass.
    pub net_mass: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            sigmas: 3.0,
            qv_rel: 0.05,
            qv_scaling_rel: 0.05,
            slope_abs: 1e-10,
            ratio_variance: 1e-18,
            kpz_sup: 0.05,
            stability_rel: 0.02,
            degenerate_abs: 1e-8,
            residual_rel: 0.05,
            section_rel: 0.02,
            net_mass: 1e-10,
        }
    }
}

impl Tolerances {
    fn violations(&self) -> Vec<String> {
        let fields = [
            ("sigmas", self.sigmas),
            ("qv_rel", self.qv_rel),
            ("qv_scaling_rel", self.qv_scaling_rel),
            ("slope_abs", self.slope_abs),
            ("ratio_variance", self.ratio_variance),
            ("kpz_sup", self.kpz_sup),
            ("stability_rel", self.stability_rel),
            ("degenerate_abs", self.degenerate_abs),
            ("residual_rel", self.residual_rel),
            ("section_rel", self.section_rel),
            ("net_mass", self.net_mass),
        ];
        fields
            .iter()
            .filter(|(_, v)| !(*v > 0.0 && v.is_finite()))
            .map(|(k, v)| format!("tolerances.{k} must be positive, got {v}"))
            .collect()
    }
}

/// Covariance-study probes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CovarianceConfig {
    /// Number of `g = ∂xφ` integrands in the isometry check.
    pub integrands: usize,
    /// Time steps of the quadratic-variation paths (same `L`, `Nx`, `T`).
    pub qv_steps: usize,
    /// Replicas averaged for the `QV / n` ladder.
    pub qv_paths: usize,
    /// n-values of the `QV / n` ladder.
    pub qv_ladder: [u32; 3],
}

impl Default for CovarianceConfig {
    fn default() -> Self {
        CovarianceConfig { integrands: 20, qv_steps: 4096, qv_paths: 16, qv_ladder: [2, 4, 8] }
    }
}

/// Section-study setup. Runs on its own short horizon: the heat flow moves
/// `⟨U(t), ψ⟩` away from `⟨∂x f, ψ⟩` at a rate of order `√t`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SectionConfig {
    pub horizon: f64,
    /// Rungs `ε = factor · horizon`, strictly decreasing.
    pub eps_factors: Vec<f64>,
    pub psi: Bump,
}

impl Default for SectionConfig {
    fn default() -> Self {
        SectionConfig {
            horizon: 0.004,
            eps_factors: vec![0.2, 0.1, 0.05, 0.025],
            psi: Bump::new(0.4, 0.2),
        }
    }
}

impl SectionConfig {
    pub fn grid(&self, base: &GridConfig) -> Result<GridSpec> {
        GridSpec::with_cfl(base.length, base.nx, self.horizon)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub study: Option<Study>,
    pub grid: GridConfig,
    /// Mollifier scale of single-n runs.
    pub n_scale: u32,
    /// Scales of the n-sweeps.
    pub n_ladder: Vec<u32>,
    pub initial: InitialDatum,
    /// Master seed; replica `k` uses `replica_seed(seed, k)`.
    pub seed: u64,
    /// Monte Carlo replicas for second-order statistics.
    pub replicas: usize,
    /// Paths for pathwise ensemble checks.
    pub paths: usize,
    /// Mesh levels in refinement studies (each halves `dx` and quarters `dt`).
    pub levels: usize,
    pub battery_size: usize,
    pub battery_seed: u64,
    pub covariance: CovarianceConfig,
    pub section: SectionConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    /// Worker threads; defaults to the number of CPUs.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub jobs: Option<usize>,
    pub tolerances: Tolerances,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            study: None,
            grid: GridConfig::default(),
            n_scale: 8,
            n_ladder: vec![4, 8, 16, 32],
            initial: InitialDatum::default(),
            seed: 20240611,
            replicas: 10_000,
            paths: 100,
            levels: 3,
            battery_size: 10,
            battery_seed: 7,
            covariance: CovarianceConfig::default(),
            section: SectionConfig::default(),
            out: None,
            jobs: None,
            tolerances: Tolerances::default(),
        }
    }
}

/// Command-line overrides; `None` keeps the file's value.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub nx: Option<usize>,
    pub nt: Option<usize>,
    pub n_scale: Option<u32>,
    pub out: Option<PathBuf>,
    pub jobs: Option<usize>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::config(format!("invalid config: {e}")))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(seed) = o.seed {
            self.seed = seed;
        }
        if let Some(nx) = o.nx {
            self.grid.nx = nx;
        }
        if let Some(nt) = o.nt {
            self.grid.nt = Some(nt);
        }
        if let Some(n) = o.n_scale {
            self.n_scale = n;
        }
        if let Some(out) = &o.out {
            self.out = Some(out.clone());
        }
        if let Some(jobs) = o.jobs {
            self.jobs = Some(jobs);
        }
    }

    pub fn grid_spec(&self) -> Result<GridSpec> {
        self.grid.resolve()
    }

    pub fn study(&self) -> Result<Study> {
        self.study.ok_or_else(|| Error::config("no study selected"))
    }

    /// Space and time coarsening factors from the finest grid to level
    /// `level` (0 = coarsest).
    pub fn level_factors(&self, level: usize) -> (usize, usize) {
        let up = self.levels - 1 - level;
        (1 << up, 1 << (2 * up))
    }

    /// Every violation of the selected study's preconditions, in one list.
    pub fn violations(&self) -> Vec<String> {
        let mut v = self.grid.violations();
        v.extend(self.tolerances.violations());
        v.extend(self.initial.violations(self.grid.length));
        let Some(study) = self.study else {
            v.push("no study selected".into());
            return v;
        };
        if self.jobs == Some(0) {
            v.push("jobs must be >= 1".into());
        }
        let grid = if v.is_empty() { self.grid_spec().ok() } else { None };
        let resolves = |v: &mut Vec<String>, n: u32, g: &GridSpec, what: &str| {
            if n == 0 {
                v.push(format!("{what}: mollifier scale must be >= 1"));
                return;
            }
            let m = Mollifier::new(n).expect("n >= 1");
            let cells = 2.0 * m.support_radius() / g.dx();
            if cells + 1e-9 < MIN_SUPPORT_CELLS {
                v.push(format!(
                    "{what}: n = {n} spans {cells:.2} cells on Nx = {} (< 8); need Nx >= {}",
                    g.nx,
                    m.required_nx(g.length)
                ));
            }
        };
        let needs_battery = matches!(study, Study::Stability | Study::Residual);
        if needs_battery && self.battery_size == 0 {
            v.push("battery_size must be >= 1".into());
        }
        match study {
            Study::Covariance => {
                if self.replicas < 2 {
                    v.push(format!("insufficient replicas: {} (need >= 2)", self.replicas));
                }
                if self.covariance.integrands == 0 {
                    v.push("covariance.integrands must be >= 1".into());
                }
                if self.covariance.qv_steps < 2 {
                    v.push("covariance.qv_steps must be >= 2".into());
                }
                if self.covariance.qv_paths == 0 {
                    v.push("covariance.qv_paths must be >= 1".into());
                }
                if let Some(g) = grid {
                    resolves(&mut v, self.n_scale, &g, "n_scale");
                    for &n in &self.covariance.qv_ladder {
                        resolves(&mut v, n, &g, "covariance.qv_ladder");
                    }
                }
            }
            Study::Correction | Study::Simulate => {
                if let Some(g) = grid {
                    resolves(&mut v, self.n_scale, &g, "n_scale");
                    if study == Study::Correction {
                        for &n in &self.n_ladder {
                            resolves(&mut v, n, &g, "n_ladder");
                        }
                    }
                    if !g.satisfies_cfl() {
                        v.push(format!(
                            "explicit KPZ step needs dt <= dx²/4: Nt = {} too small for Nx = {}",
                            g.nt, g.nx
                        ));
                    }
                }
            }
            Study::Stability | Study::Residual => {
                if self.levels < 2 {
                    v.push(format!("levels must be >= 2 for a refinement trend, got {}", self.levels));
                }
                if study == Study::Residual {
                    if self.n_ladder.len() < 3 {
                        v.push(format!("n_ladder needs >= 3 entries, got {}", self.n_ladder.len()));
                    }
                    if self.n_ladder.windows(2).any(|w| w[1] <= w[0]) {
                        v.push("n_ladder must be strictly increasing".into());
                    }
                    if self.paths < 2 {
                        v.push(format!("paths must be >= 2, got {}", self.paths));
                    }
                }
                if let Some(g) = grid {
                    if !g.satisfies_cfl() {
                        v.push(format!(
                            "explicit KPZ step needs dt <= dx²/4: Nt = {} too small for Nx = {}",
                            g.nt, g.nx
                        ));
                    }
                    if self.levels >= 2 && self.levels < 12 {
                        let (fx, ft) = self.level_factors(0);
                        if g.nx % fx != 0 || g.nt % ft != 0 || g.nx / fx < 2 || g.nt / ft < 2 {
                            v.push(format!(
                                "{} levels need Nx divisible by {fx} and Nt by {ft} (got Nx = {}, Nt = {})",
                                self.levels, g.nx, g.nt
                            ));
                        } else if let Ok(coarse) = g.coarsened(fx, ft) {
                            resolves(&mut v, self.n_scale, &coarse, "n_scale at the coarsest level");
                        }
                    } else if self.levels >= 12 {
                        v.push(format!("levels = {} is too deep", self.levels));
                    }
                    if study == Study::Residual {
                        for &n in &self.n_ladder {
                            resolves(&mut v, n, &g, "n_ladder");
                        }
                    }
                }
            }
            Study::Section => {
                let s = &self.section;
                if !(s.horizon > 0.0 && s.horizon.is_finite()) {
                    v.push(format!("section.horizon must be positive, got {}", s.horizon));
                }
                if s.eps_factors.len() < 4 {
                    v.push(format!("section.eps_factors needs >= 4 rungs, got {}", s.eps_factors.len()));
                }
                if s.eps_factors.iter().any(|e| !(*e > 0.0)) || s.eps_factors.windows(2).any(|w| w[1] >= w[0]) {
                    v.push("section.eps_factors must be positive and strictly decreasing".into());
                }
                if let Some(&first) = s.eps_factors.first() {
                    // the widest net occupies [0.05 ε, 2.05 ε]
                    if first * 2.05 >= 1.0 {
                        v.push(format!("section rung {first}·T escapes (0, T)"));
                    }
                }
                let (a, b) = s.psi.support();
                if !(s.psi.half_width > 0.0 && a > 0.0 && b < self.grid.length) {
                    v.push(format!("section.psi support ({a}, {b}) not inside (0, L)"));
                }
                if self.paths < 2 {
                    v.push(format!("paths must be >= 2, got {}", self.paths));
                }
                if v.is_empty() {
                    match s.grid(&self.grid) {
                        Ok(g) => resolves(&mut v, self.n_scale, &g, "n_scale"),
                        Err(Error::Config(e)) => v.extend(e),
                        Err(e) => v.push(e.to_string()),
                    }
                }
            }
        }
        v
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(v))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn with(study: Study) -> RunConfig {
        RunConfig { study: Some(study), ..RunConfig::default() }
    }

    #[test]
    fn defaults_validate_for_every_study() {
        for s in Study::ALL {
            assert_eq!(with(s).violations(), Vec::<String>::new(), "{s}");
        }
    }

    #[test]
    fn default_grid_is_cfl() {
        let g = with(Study::Stability).grid_spec().unwrap();
        assert_eq!((g.nx, g.nt), (256, 65536));
        assert_eq!(with(Study::Stability).level_factors(0), (4, 16));
        assert_eq!(with(Study::Stability).level_factors(2), (1, 1));
    }

    #[test]
    fn violations_are_aggregated() {
        let mut c = with(Study::Covariance);
        c.replicas = 1;
        c.grid.length = -1.0;
        c.tolerances.qv_rel = 0.0;
        let v = c.violations();
        assert!(v.len() >= 3, "{v:?}");
        assert!(v.iter().any(|m| m.contains("insufficient replicas")));
        assert!(c.validate().unwrap_err().is_configuration());
    }

    #[test]
    fn unresolved_mollifier_names_required_nx() {
        let mut c = with(Study::Correction);
        c.grid.nx = 64;
        c.n_ladder = vec![32];
        let v = c.violations();
        assert!(v.iter().any(|m| m.contains("need Nx >= 128")), "{v:?}");
    }

    #[test]
    fn overrides_and_roundtrip() {
        let mut c = RunConfig::from_json(r#"{"grid": {"L": 1.0, "Nx": 128, "T": 0.1}, "seed": 3}"#).unwrap();
        assert_eq!(c.n_scale, 8);
        c.apply(&Overrides { seed: Some(9), nt: Some(4096), ..Default::default() });
        assert_eq!((c.seed, c.grid.nt), (9, Some(4096)));
        let back = RunConfig::from_json(&c.to_json()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = RunConfig::from_json(r#"{"sead": 3}"#).unwrap_err();
        assert!(err.is_configuration());
    }

    #[test]
    fn study_names_parse() {
        for s in Study::ALL {
            assert_eq!(s.name().parse::<Study>().unwrap(), s);
        }
        assert!("bogus".parse::<Study>().is_err());
    }
}
