//! Cole-Hopf transform `U = ∂x ln Z` and the comparison with the directly
//! regularized Burgers velocity.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Field, Label};
use crate::grid::GridSpec;
use crate::spectral::SpectralRow;
use crate::weakform::{pair_abs_tensor, pair_tensor, TestFunction};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DerivativeKind {
    /// `(u_{i+1} - u_{i-1}) / (2 dx)`; skew-adjoint, so summation by parts is exact.
    CenteredDifference,
    /// Fourier multiplier `i k` with the Nyquist bin zeroed.
    Spectral,
}

/// Periodic `∂x` on one grid.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DerivativeOperator {
    pub kind: DerivativeKind,
    pub grid: GridSpec,
}

impl DerivativeOperator {
    pub fn new(kind: DerivativeKind, grid: GridSpec) -> Self {
        DerivativeOperator { kind, grid }
    }

    pub fn centered(grid: GridSpec) -> Self {
        Self::new(DerivativeKind::CenteredDifference, grid)
    }

    pub fn spectral(grid: GridSpec) -> Self {
        Self::new(DerivativeKind::Spectral, grid)
    }

    pub fn apply_row(&self, row: &[f64]) -> Vec<f64> {
        let mut out = row.to_vec();
        let mut sp = match self.kind {
            DerivativeKind::Spectral => Some(SpectralRow::new(self.grid.nx, self.grid.length)),
            DerivativeKind::CenteredDifference => None,
        };
        self.apply_in_place(&mut out, row, sp.as_mut());
        out
    }

    fn apply_in_place(&self, out: &mut [f64], row: &[f64], sp: Option<&mut SpectralRow>) {
        let nx = row.len();
        match self.kind {
            DerivativeKind::CenteredDifference => {
                let inv = 0.5 / self.grid.dx();
                for i in 0..nx {
                    let right = row[if i + 1 == nx { 0 } else { i + 1 }];
                    let left = row[if i == 0 { nx - 1 } else { i - 1 }];
                    out[i] = (right - left) * inv;
                }
            }
            DerivativeKind::Spectral => {
                let sp = sp.expect("spectral derivative needs transform buffers");
                let mult = sp.derivative_multipliers();
                out.copy_from_slice(row);
                sp.apply_multiplier(out, &mult);
            }
        }
    }

    /// Rowwise derivative of an arbitrary (materialized) field.
    pub fn apply(&self, field: &Field, label: Label) -> Result<Field> {
        self.apply_rows(field, label, |k| field.row(k))
    }

    fn apply_rows(&self, field: &Field, label: Label, row_of: impl Fn(usize) -> Vec<f64>) -> Result<Field> {
        let grid = *field.grid();
        if !grid.same_shape(&self.grid) {
            return Err(Error::config("derivative operator and field are on different grids"));
        }
        let nx = grid.nx;
        let mut sp = match self.kind {
            DerivativeKind::Spectral => Some(SpectralRow::new(nx, grid.length)),
            DerivativeKind::CenteredDifference => None,
        };
        let mut values = vec![0.0; grid.rows() * nx];
        for (k, out) in values.chunks_exact_mut(nx).enumerate() {
            let row = row_of(k);
            self.apply_in_place(out, &row, sp.as_mut());
        }
        Field::from_values(grid, label, field.seed(), values)
    }
}

fn check_positive(z: &Field) -> Result<()> {
    let nx = z.grid().nx;
    if let Some(pos) = z.raw().iter().position(|&v| !(v > 0.0 && v.is_finite())) {
        return Err(Error::Domain { step: pos / nx, cell: pos % nx, value: z.raw()[pos] });
    }
    Ok(())
}

/// Pointwise `H = ln Z`.
pub fn log_field(z: &Field) -> Result<Field> {
    check_positive(z)?;
    let grid = *z.grid();
    let mut values = Vec::with_capacity(z.raw().len());
    for k in 0..grid.rows() {
        let g = z.log_gauge()[k];
        values.extend(z.row_raw(k).iter().map(|v| v.ln() + g));
    }
    Field::from_values(grid, Label::H, z.seed(), values)
}

/// `U = D(ln Z)` row by row.
///
/// The per-row gauge of `Z` is a spatial constant in `ln Z` and is dropped
/// before differencing, so multiplying `Z` by any `exp(c(t))` leaves `U`
/// bit-identical.
pub fn colehopf_transform(z: &Field, d: &DerivativeOperator) -> Result<Field> {
    check_positive(z)?;
    d.apply_rows(z, Label::U, |k| z.row_raw(k).iter().map(|v| v.ln()).collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeakDistance {
    pub phi_id: usize,
    /// `|⟨V - U, φ⟩|`.
    pub distance: f64,
    /// `⟨U, φ⟩`.
    pub pairing_u: f64,
    /// `⟨|U|, |φ|⟩`, the scale against which `distance` is judged.
    pub weak_norm_u: f64,
}

impl WeakDistance {
    pub fn relative(&self) -> f64 {
        if self.weak_norm_u > 0.0 {
            self.distance / self.weak_norm_u
        } else {
            self.distance
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub sup_distance: f64,
    pub sup_norm_u: f64,
    pub weak: Vec<WeakDistance>,
}

impl StabilityReport {
    pub fn max_relative(&self) -> f64 {
        self.weak.iter().map(WeakDistance::relative).fold(0.0, f64::max)
    }

    pub fn mean_relative(&self) -> f64 {
        if self.weak.is_empty() {
            return 0.0;
        }
        self.weak.iter().map(WeakDistance::relative).sum::<f64>() / self.weak.len() as f64
    }
}

/// Distances between `V_n` and the Cole-Hopf velocity `∂x ln Z_n`.
pub fn stability_compare(v: &Field, z: &Field, d: &DerivativeOperator, battery: &[TestFunction]) -> Result<StabilityReport> {
    if !v.grid().same_shape(z.grid()) {
        return Err(Error::config(format!(
            "grid mismatch: V_n on {:?}, Z_n on {:?}",
            v.grid(),
            z.grid()
        )));
    }
    let u = colehopf_transform(z, d)?;
    let diff = v.difference(&u)?;
    let grid = *u.grid();
    let mut weak = Vec::with_capacity(battery.len());
    for phi in battery {
        let chi = phi.temporal_samples(&grid);
        let psi = phi.spatial_samples(&grid);
        weak.push(WeakDistance {
            phi_id: phi.id,
            distance: pair_tensor(&diff, &chi, &psi)?.abs(),
            pairing_u: pair_tensor(&u, &chi, &psi)?,
            weak_norm_u: pair_abs_tensor(&u, &chi, &psi)?,
        });
    }
    Ok(StabilityReport { sup_distance: diff.sup_norm(), sup_norm_u: u.sup_norm(), weak })
}
