//! Real fields sampled on the space-time lattice, with CSV and binary export.
//!
//! Positive fields (`Z_n`, `G_n`) are stored in factored form: the value at
//! `(t_k, x_i)` is `values[k][i] · exp(log_gauge[k])`. Solvers keep each row
//! of `values` normalized to a unit maximum, which keeps the representation
//! finite for long horizons and makes multiplication by a spatially constant
//! factor an exact update of `log_gauge` alone.

use std::fmt;
use std::io::{BufWriter, Read, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::GridSpec;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Label {
    /// Itô solution of the regularized heat equation.
    #[serde(rename = "Z_n")]
    Z,
    /// Stratonovich solution of the regularized heat equation.
    #[serde(rename = "G_n")]
    G,
    /// Height field, `ln Z_n` or the direct KPZ solution.
    #[serde(rename = "H_n")]
    H,
    /// Cole-Hopf velocity `∂x ln Z_n`.
    #[serde(rename = "U_n")]
    U,
    /// Velocity from the directly regularized equation.
    #[serde(rename = "V_n")]
    V,
}

impl Label {
    pub fn code(self) -> u32 {
        match self {
            Label::Z => 0,
            Label::G => 1,
            Label::H => 2,
            Label::U => 3,
            Label::V => 4,
        }
    }

    pub fn from_code(code: u32) -> Option<Self> {
        Some(match code {
            0 => Label::Z,
            1 => Label::G,
            2 => Label::H,
            3 => Label::U,
            4 => Label::V,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Label::Z => "Z_n",
            Label::G => "G_n",
            Label::H => "H_n",
            Label::U => "U_n",
            Label::V => "V_n",
        }
    }

    pub fn is_positive(self) -> bool {
        matches!(self, Label::Z | Label::G)
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Label {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "Z_n" | "Z" | "z" => Ok(Label::Z),
            "G_n" | "G" | "g" => Ok(Label::G),
            "H_n" | "H" | "h" => Ok(Label::H),
            "U_n" | "U" | "u" => Ok(Label::U),
            "V_n" | "V" | "v" => Ok(Label::V),
            other => Err(Error::config(format!("unknown field label {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Field {
    grid: GridSpec,
    label: Label,
    seed: u64,
    values: Vec<f64>,
    log_gauge: Vec<f64>,
}

const MAGIC: &[u8; 4] = b"CHLF";
const VERSION: u32 = 1;

impl Field {
    /// Field from plain values, `(Nt + 1) × Nx` time-major.
    pub fn from_values(grid: GridSpec, label: Label, seed: u64, values: Vec<f64>) -> Result<Self> {
        let expected = grid.rows() * grid.nx;
        if values.len() != expected {
            return Err(Error::Dimension { expected, found: values.len() });
        }
        Ok(Field { grid, label, seed, values, log_gauge: vec![0.0; grid.rows()] })
    }

    /// Field in factored form `values[k][i] · exp(log_gauge[k])`.
    pub fn from_factored(grid: GridSpec, label: Label, seed: u64, values: Vec<f64>, log_gauge: Vec<f64>) -> Result<Self> {
        let expected = grid.rows() * grid.nx;
        if values.len() != expected {
            return Err(Error::Dimension { expected, found: values.len() });
        }
        if log_gauge.len() != grid.rows() {
            return Err(Error::Dimension { expected: grid.rows(), found: log_gauge.len() });
        }
        Ok(Field { grid, label, seed, values, log_gauge })
    }

    pub fn zeros(grid: GridSpec, label: Label) -> Self {
        Field {
            grid,
            label,
            seed: 0,
            values: vec![0.0; grid.rows() * grid.nx],
            log_gauge: vec![0.0; grid.rows()],
        }
    }

    /// Samples `f(t_k, x_i)` on the lattice.
    pub fn from_fn(grid: GridSpec, label: Label, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut values = Vec::with_capacity(grid.rows() * grid.nx);
        for k in 0..grid.rows() {
            let t = grid.t(k);
            for i in 0..grid.nx {
                values.push(f(t, grid.x(i)));
            }
        }
        Field { grid, label, seed: 0, values, log_gauge: vec![0.0; grid.rows()] }
    }

    /// `exp(H)` as a positive field, each row normalized by its maximum.
    pub fn exp_of(h: &Field, label: Label) -> Self {
        let nx = h.grid.nx;
        let mut values = Vec::with_capacity(h.values.len());
        let mut log_gauge = Vec::with_capacity(h.grid.rows());
        for k in 0..h.grid.rows() {
            let row = h.row_raw(k);
            let top = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            values.extend(row.iter().map(|v| (v - top).exp()));
            log_gauge.push(top + h.log_gauge[k]);
            debug_assert_eq!(values.len(), (k + 1) * nx);
        }
        Field { grid: h.grid, label, seed: h.seed, values, log_gauge }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn label(&self) -> Label {
        self.label
    }

    pub fn with_label(mut self, label: Label) -> Self {
        self.label = label;
        self
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn set_seed(&mut self, seed: u64) {
        self.seed = seed;
    }

    /// Stored (unscaled) values.
    pub fn raw(&self) -> &[f64] {
        &self.values
    }

    pub fn row_raw(&self, k: usize) -> &[f64] {
        let nx = self.grid.nx;
        &self.values[k * nx..(k + 1) * nx]
    }

    pub fn log_gauge(&self) -> &[f64] {
        &self.log_gauge
    }

    pub fn is_factored(&self) -> bool {
        self.log_gauge.iter().any(|&g| g != 0.0)
    }

    #[inline]
    pub fn get(&self, k: usize, i: usize) -> f64 {
        let v = self.values[k * self.grid.nx + i];
        let g = self.log_gauge[k];
        if g == 0.0 {
            v
        } else {
            v * g.exp()
        }
    }

    /// Row `k` with the gauge factor applied.
    pub fn row(&self, k: usize) -> Vec<f64> {
        let g = self.log_gauge[k];
        if g == 0.0 {
            self.row_raw(k).to_vec()
        } else {
            let s = g.exp();
            self.row_raw(k).iter().map(|v| v * s).collect()
        }
    }

    /// All values with the gauge applied, time-major.
    pub fn materialize(&self) -> Vec<f64> {
        (0..self.grid.rows()).flat_map(|k| self.row(k)).collect()
    }

    /// Multiplies row `k` by `exp(c[k])`; only the gauge changes.
    pub fn scale_rows_by_exp(&mut self, c: &[f64]) -> Result<()> {
        if c.len() != self.log_gauge.len() {
            return Err(Error::Dimension { expected: self.log_gauge.len(), found: c.len() });
        }
        for (g, v) in self.log_gauge.iter_mut().zip(c) {
            *g += v;
        }
        Ok(())
    }

    /// Pointwise map over materialized values.
    pub fn map(&self, label: Label, f: impl Fn(f64) -> f64) -> Field {
        let values = self.materialize().into_iter().map(f).collect();
        Field { grid: self.grid, label, seed: self.seed, values, log_gauge: vec![0.0; self.grid.rows()] }
    }

    /// `self - other` on materialized values.
    pub fn difference(&self, other: &Field) -> Result<Field> {
        if !self.grid.same_shape(&other.grid) {
            return Err(Error::config("grid mismatch between fields"));
        }
        let a = self.materialize();
        let b = other.materialize();
        let values = a.iter().zip(&b).map(|(x, y)| x - y).collect();
        Ok(Field { grid: self.grid, label: self.label, seed: self.seed, values, log_gauge: vec![0.0; self.grid.rows()] })
    }

    pub fn sup_norm(&self) -> f64 {
        (0..self.grid.rows())
            .flat_map(|k| self.row(k))
            .fold(0.0, |m, v| m.max(v.abs()))
    }

    /// CSV with header `t,x,value`, one line per lattice point, time-major.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = BufWriter::new(out);
        writeln!(w, "t,x,value")?;
        for k in 0..self.grid.rows() {
            let t = self.grid.t(k);
            for (i, v) in self.row(k).iter().enumerate() {
                writeln!(w, "{:e},{:e},{:e}", t, self.grid.x(i), v)?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }

    /// Little-endian binary dump.
    ///
    /// Header (56 bytes): magic `CHLF`, `u32` version, `f64` L, `u64` Nx,
    /// `f64` T, `u64` Nt, `u32` label code, `u32` reserved (0), `u64` seed.
    /// Then `(Nt + 1) · Nx` `f64` values, row-major in time.
    pub fn write_binary<W: Write>(&self, out: W) -> Result<()> {
        let mut w = BufWriter::new(out);
        w.write_all(MAGIC)?;
        w.write_all(&VERSION.to_le_bytes())?;
        w.write_all(&self.grid.length.to_le_bytes())?;
        w.write_all(&(self.grid.nx as u64).to_le_bytes())?;
        w.write_all(&self.grid.horizon.to_le_bytes())?;
        w.write_all(&(self.grid.nt as u64).to_le_bytes())?;
        w.write_all(&self.label.code().to_le_bytes())?;
        w.write_all(&0u32.to_le_bytes())?;
        w.write_all(&self.seed.to_le_bytes())?;
        for k in 0..self.grid.rows() {
            for v in self.row(k) {
                w.write_all(&v.to_le_bytes())?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_binary<R: Read>(mut input: R) -> Result<Field> {
        let mut header = [0u8; 56];
        input.read_exact(&mut header)?;
        if &header[0..4] != MAGIC {
            return Err(Error::config("not a field dump (bad magic)"));
        }
        let u32_at = |o: usize| u32::from_le_bytes(header[o..o + 4].try_into().unwrap());
        let u64_at = |o: usize| u64::from_le_bytes(header[o..o + 8].try_into().unwrap());
        let f64_at = |o: usize| f64::from_le_bytes(header[o..o + 8].try_into().unwrap());
        let version = u32_at(4);
        if version != VERSION {
            return Err(Error::config(format!("unsupported field dump version {version}")));
        }
        let grid = GridSpec::new(f64_at(8), u64_at(16) as usize, f64_at(24), u64_at(32) as usize)?;
        let label = Label::from_code(u32_at(40))
            .ok_or_else(|| Error::config(format!("unknown label code {}", u32_at(40))))?;
        let seed = u64_at(48);
        let count = grid.rows() * grid.nx;
        let mut bytes = vec![0u8; count * 8];
        input.read_exact(&mut bytes)?;
        let values = bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        Field::from_values(grid, label, seed, values)
    }

    pub fn save_binary(&self, path: impl AsRef<Path>) -> Result<()> {
        self.write_binary(std::fs::File::create(path)?)
    }

    pub fn load_binary(path: impl AsRef<Path>) -> Result<Field> {
        Field::read_binary(std::io::BufReader::new(std::fs::File::open(path)?))
    }
}
