//! Periodic space-time lattice.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A periodic torus `[0, L)` sampled at `Nx` points, times `[0, T]` split into
/// `Nt` steps.
///
/// Spatial nodes sit at `x_i = i * dx`; time nodes at `t_k = k * dt`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    #[serde(rename = "L")]
    pub length: f64,
    #[serde(rename = "Nx")]
    pub nx: usize,
    #[serde(rename = "T")]
    pub horizon: f64,
    #[serde(rename = "Nt")]
    pub nt: usize,
}

impl GridSpec {
    pub fn new(length: f64, nx: usize, horizon: f64, nt: usize) -> Result<Self> {
        let grid = GridSpec { length, nx, horizon, nt };
        grid.validate()?;
        Ok(grid)
    }

    /// Grid whose step satisfies the explicit-scheme bound `dt <= dx^2 / 4`
    /// with the fewest time steps.
    pub fn with_cfl(length: f64, nx: usize, horizon: f64) -> Result<Self> {
        let mut violations = Vec::new();
        if !(length > 0.0 && length.is_finite()) {
            violations.push(format!("L must be positive, got {length}"));
        }
        if nx < 2 {
            violations.push(format!("Nx must be >= 2, got {nx}"));
        }
        if !violations.is_empty() {
            return Err(Error::Config(violations));
        }
        let dx = length / nx as f64;
        let steps = horizon / (0.25 * dx * dx);
        // tolerate representation error when T / dt_max is an integer
        let nt = ((steps - 1e-9).ceil() as usize).max(2);
        Self::new(length, nx, horizon, nt)
    }

    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        if !(self.length > 0.0 && self.length.is_finite()) {
            v.push(format!("L must be positive, got {}", self.length));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            v.push(format!("T must be positive, got {}", self.horizon));
        }
        if self.nx < 2 {
            v.push(format!("Nx must be >= 2, got {}", self.nx));
        }
        if self.nt < 2 {
            v.push(format!("Nt must be >= 2, got {}", self.nt));
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

    #[inline]
    pub fn dx(&self) -> f64 {
        self.length / self.nx as f64
    }

    #[inline]
    pub fn dt(&self) -> f64 {
        self.horizon / self.nt as f64
    }

    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        i as f64 * self.dx()
    }

    #[inline]
    pub fn t(&self, k: usize) -> f64 {
        k as f64 * self.dt()
    }

    /// Periodic cell index.
    #[inline]
    pub fn wrap(&self, i: isize) -> usize {
        i.rem_euclid(self.nx as isize) as usize
    }

    /// Number of stored time rows of a field on this grid (`Nt + 1`).
    #[inline]
    pub fn rows(&self) -> usize {
        self.nt + 1
    }

    pub fn satisfies_cfl(&self) -> bool {
        let dx = self.dx();
        self.dt() <= 0.25 * dx * dx * (1.0 + 1e-12)
    }

    /// Grid with `Nx / fx` cells and `Nt / ft` steps over the same domain.
    pub fn coarsened(&self, fx: usize, ft: usize) -> Result<Self> {
        if fx == 0 || ft == 0 || self.nx % fx != 0 || self.nt % ft != 0 {
            return Err(Error::config(format!(
                "cannot coarsen Nx={} Nt={} by factors ({fx}, {ft})",
                self.nx, self.nt
            )));
        }
        Self::new(self.length, self.nx / fx, self.horizon, self.nt / ft)
    }

    pub fn same_shape(&self, other: &GridSpec) -> bool {
        self.nx == other.nx
            && self.nt == other.nt
            && self.length == other.length
            && self.horizon == other.horizon
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spacing_reconstructs_extent() {
        let g = GridSpec::new(1.0, 64, 1.0, 256).unwrap();
        assert!((g.dx() * 64.0 - 1.0).abs() <= f64::EPSILON);
        assert!((g.dt() * 256.0 - 1.0).abs() <= f64::EPSILON);
        let g = GridSpec::new(0.7, 96, 0.3, 1000).unwrap();
        assert!((g.dx() * 96.0 - 0.7).abs() <= 2.0 * f64::EPSILON);
        assert!((g.dt() * 1000.0 - 0.3).abs() <= 2.0 * f64::EPSILON);
    }

    #[test]
    fn rejects_degenerate_dimensions_all_at_once() {
        let err = GridSpec::new(-1.0, 1, 0.0, 1).unwrap_err();
        match err {
            Error::Config(v) => assert_eq!(v.len(), 4),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn periodic_wrap() {
        let g = GridSpec::new(1.0, 8, 1.0, 8).unwrap();
        assert_eq!(g.wrap(8), 0);
        assert_eq!(g.wrap(-1), 7);
        assert_eq!(g.wrap(3 + 8 * 5), 3);
    }

    #[test]
    fn cfl_grid_default_size() {
        let g = GridSpec::with_cfl(1.0, 256, 0.25).unwrap();
        assert_eq!(g.nt, 65536);
        assert!(g.satisfies_cfl());
        let g = GridSpec::with_cfl(1.0, 64, 0.25).unwrap();
        assert_eq!(g.nt, 4096);
    }

    #[test]
    fn json_uses_short_names() {
        let g = GridSpec::new(1.0, 4, 2.0, 8).unwrap();
        let s = serde_json::to_string(&g).unwrap();
        assert_eq!(s, r#"{"L":1.0,"Nx":4,"T":2.0,"Nt":8}"#);
    }
}
