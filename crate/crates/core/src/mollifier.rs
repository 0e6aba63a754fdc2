//! Smooth compactly supported mollifiers `δ_n(x) = n ρ(n x)`.
//!
//! The profile is the standard bump `ρ(x) = K exp(-a / (1 - x²))` on `(-1, 1)`
//! with sharpness `a` (default 1). `K` is fixed by unit mass and `C = ∫ρ²` is
//! the constant that sets the quadratic variation of the mollified noise,
//! `⟨W^n(x)⟩_t = C n t`. Both are computed once by adaptive quadrature.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::quadrature::integrate;

const QUAD_TOL: f64 = 1e-13;

/// Minimum number of grid cells that must span the mollifier's support
/// diameter `2 / n`.
pub const MIN_SUPPORT_CELLS: f64 = 8.0;

#[inline]
fn raw_bump(x: f64, sharpness: f64) -> f64 {
    let s = 1.0 - x * x;
    if s <= 0.0 {
        0.0
    } else {
        (-sharpness / s).exp()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MollifierSpec", into = "MollifierSpec")]
pub struct Mollifier {
    n: u32,
    sharpness: f64,
    normalization: f64,
    c_const: f64,
}

/// Serialized form; the derived constants are recomputed on load.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct MollifierSpec {
    pub n: u32,
    #[serde(default = "default_sharpness")]
    pub sharpness: f64,
}

fn default_sharpness() -> f64 {
    1.0
}

impl TryFrom<MollifierSpec> for Mollifier {
    type Error = Error;
    fn try_from(s: MollifierSpec) -> Result<Self> {
        Mollifier::with_sharpness(s.n, s.sharpness)
    }
}

impl From<Mollifier> for MollifierSpec {
    fn from(m: Mollifier) -> Self {
        MollifierSpec { n: m.n, sharpness: m.sharpness }
    }
}

impl Mollifier {
    pub fn new(n: u32) -> Result<Self> {
        Self::with_sharpness(n, 1.0)
    }

    pub fn with_sharpness(n: u32, sharpness: f64) -> Result<Self> {
        let mut v = Vec::new();
        if n == 0 {
            v.push("mollifier scale n must be a positive integer".to_string());
        }
        if !(sharpness > 0.0 && sharpness.is_finite()) {
            v.push(format!("bump sharpness must be positive, got {sharpness}"));
        }
        if !v.is_empty() {
            return Err(Error::Config(v));
        }
        let mass = integrate(|x| raw_bump(x, sharpness), -1.0, 1.0, QUAD_TOL);
        let normalization = 1.0 / mass;
        let c_const = integrate(
            |x| {
                let r = normalization * raw_bump(x, sharpness);
                r * r
            },
            -1.0,
            1.0,
            QUAD_TOL,
        );
        Ok(Mollifier { n, sharpness, normalization, c_const })
    }

    /// Same profile at a different scale.
    pub fn rescaled(&self, n: u32) -> Result<Self> {
        if n == 0 {
            return Err(Error::config("mollifier scale n must be a positive integer"));
        }
        Ok(Mollifier { n, ..self.clone() })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn sharpness(&self) -> f64 {
        self.sharpness
    }

    /// `K` with `∫ρ = 1`.
    pub fn normalization(&self) -> f64 {
        self.normalization
    }

    /// `C = ∫ρ²`.
    pub fn c_constant(&self) -> f64 {
        self.c_const
    }

    /// Variance rate of one mollified increment, `n C`.
    pub fn variance_rate(&self) -> f64 {
        self.n as f64 * self.c_const
    }

    /// Radius of `supp(δ_n)`, i.e. `1 / n`.
    pub fn support_radius(&self) -> f64 {
        1.0 / self.n as f64
    }

    /// The unscaled profile `ρ`.
    #[inline]
    pub fn profile(&self, x: f64) -> f64 {
        self.normalization * raw_bump(x, self.sharpness)
    }

    /// `δ_n(x) = n ρ(n x)`.
    #[inline]
    pub fn kernel(&self, x: f64) -> f64 {
        let n = self.n as f64;
        n * self.profile(n * x)
    }

    /// `∫ δ_n` by adaptive quadrature over its support.
    pub fn mass(&self) -> f64 {
        let r = self.support_radius();
        integrate(|x| self.kernel(x), -r, r, QUAD_TOL)
    }

    /// Covariance kernel `C_n(z) = ∫ δ_n(z - u) δ_n(-u) du`.
    ///
    /// Vanishes for `|z| >= 2 / n`; `C_n(0) = n C`.
    pub fn autocorrelation(&self, z: f64) -> f64 {
        let n = self.n as f64;
        let s = n * z;
        if s.abs() >= 2.0 {
            return 0.0;
        }
        // C_n(z) = n ∫ ρ(s - v) ρ(v) dv with s = n z (ρ is even)
        let lo = (s - 1.0).max(-1.0);
        let hi = (s + 1.0).min(1.0);
        n * integrate(|v| self.profile(s - v) * self.profile(v), lo, hi, QUAD_TOL)
    }

    /// `C_n` summed over torus images, the covariance kernel of the noise on
    /// a periodic domain of length `length`.
    pub fn periodic_autocorrelation(&self, z: f64, length: f64) -> f64 {
        let reach = 2.0 * self.support_radius();
        let z = z.rem_euclid(length);
        let mut total = 0.0;
        let mut p = -((reach / length).ceil() as i64) - 1;
        loop {
            let shifted = z + p as f64 * length;
            if shifted > reach {
                break;
            }
            if shifted.abs() < reach {
                total += self.autocorrelation(shifted);
            }
            p += 1;
        }
        total
    }

    /// Smallest `Nx` on a torus of length `length` that resolves this
    /// mollifier.
    pub fn required_nx(&self, length: f64) -> usize {
        (MIN_SUPPORT_CELLS * length / (2.0 * self.support_radius()) - 1e-9).ceil() as usize
    }

    pub fn check_resolution(&self, grid: &GridSpec) -> Result<()> {
        let cells = 2.0 * self.support_radius() / grid.dx();
        if cells + 1e-9 < MIN_SUPPORT_CELLS {
            return Err(Error::Resolution {
                n: self.n,
                cells,
                required_nx: self.required_nx(grid.length),
            });
        }
        Ok(())
    }

    /// The kernel sampled at lattice offsets and wrapped onto the torus.
    pub fn lattice_kernel(&self, grid: &GridSpec) -> Result<LatticeKernel> {
        self.check_resolution(grid)?;
        LatticeKernel::build(self, grid)
    }
}

/// Periodized lattice samples of `δ_n`, rescaled to unit discrete mass
/// `Σ w dx = 1`.
#[derive(Clone, Debug)]
pub struct LatticeKernel {
    /// Weight at cell offset `j` (0..Nx), i.e. at `x = j dx` modulo `L`.
    pub periodic: Vec<f64>,
    /// Non-zero `(offset, weight)` taps, offsets in `-r..=r`.
    pub taps: Vec<(isize, f64)>,
    pub dx: f64,
}

impl LatticeKernel {
    fn build(m: &Mollifier, grid: &GridSpec) -> Result<Self> {
        let dx = grid.dx();
        let nx = grid.nx;
        let r = (m.support_radius() / dx).floor() as isize;
        let mut taps: Vec<(isize, f64)> = (-r..=r)
            .map(|j| (j, m.kernel(j as f64 * dx)))
            .filter(|&(_, w)| w > 0.0)
            .collect();
        let mass: f64 = taps.iter().map(|&(_, w)| w).sum::<f64>() * dx;
        if !(mass > 0.0) {
            return Err(Error::Resolution {
                n: m.n,
                cells: 2.0 * m.support_radius() / dx,
                required_nx: m.required_nx(grid.length),
            });
        }
        for t in taps.iter_mut() {
            t.1 /= mass;
        }
        let mut periodic = vec![0.0; nx];
        for &(j, w) in &taps {
            periodic[grid.wrap(j)] += w;
        }
        Ok(LatticeKernel { periodic, taps, dx })
    }

    pub fn width(&self) -> usize {
        self.taps.len()
    }

    /// Circular convolution `(δ_n * row)(x_j) = Σ_i δ_n(x_j - x_i) row_i dx`.
    pub fn convolve_direct(&self, row: &[f64], out: &mut [f64]) {
        let nx = row.len() as isize;
        for (j, o) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            for &(m, w) in &self.taps {
                let i = (j as isize - m).rem_euclid(nx) as usize;
                acc += w * row[i];
            }
            *o = acc * self.dx;
        }
    }
}
