//! Lattice space-time white noise and its mollification.
//!
//! A [`NoisePath`] stores i.i.d. standard normals `ξ[k][i]`, one per
//! space-time cell `[t_k, t_{k+1}) × [x_i, x_{i+1})`. The increment density
//! of the cylindrical Wiener process on that cell is `ΔW = ξ sqrt(dt/dx)`,
//! so that the Riemann pairing `Σ_i φ(x_i) ΔW_{k,i} dx` of one time step has
//! variance `dt Σ φ(x_i)² dx`. In this lattice basis (normalized cell
//! indicators) the series stochastic integral truncates at `Nx` terms.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::mollifier::{LatticeKernel, Mollifier};
use crate::spectral::SpectralRow;

/// Kernel widths above this many taps are convolved through the FFT.
pub const FFT_TAP_THRESHOLD: usize = 64;

/// Seed of replica `index` derived from a master seed.
///
/// The master seed keys a ChaCha8 generator, the replica index selects its
/// stream, and the first 64-bit output of that stream is the replica seed.
/// Any replica can be regenerated in isolation.
pub fn replica_seed(master: u64, index: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(index);
    rng.next_u64()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseOrigin {
    Sampled,
    Zero,
    /// Aggregated from a finer path by the given space and time factors.
    Coarsened { factor_x: usize, factor_t: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct NoisePath {
    seed: u64,
    grid: GridSpec,
    xi: Vec<f64>,
    origin: NoiseOrigin,
}

/// Seeded lattice white noise on `grid`.
///
/// Draws are taken row by row (time-major) from a ChaCha8 stream keyed by
/// `seed`, so the path is reproducible bit for bit from `(grid, seed)`.
pub fn sample_noise(grid: GridSpec, seed: u64) -> Result<NoisePath> {
    NoisePath::sample(grid, seed)
}

impl NoisePath {
    pub fn sample(grid: GridSpec, seed: u64) -> Result<Self> {
        grid.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let len = grid.nt * grid.nx;
        let mut xi = Vec::with_capacity(len);
        for _ in 0..len {
            xi.push(StandardNormal.sample(&mut rng));
        }
        Ok(NoisePath { seed, grid, xi, origin: NoiseOrigin::Sampled })
    }

    pub fn zeros(grid: GridSpec) -> Result<Self> {
        grid.validate()?;
        Ok(NoisePath {
            seed: 0,
            grid,
            xi: vec![0.0; grid.nt * grid.nx],
            origin: NoiseOrigin::Zero,
        })
    }

    /// Wraps externally supplied normals (`Nt × Nx`, time-major).
    pub fn from_normals(grid: GridSpec, seed: u64, xi: Vec<f64>) -> Result<Self> {
        grid.validate()?;
        if xi.len() != grid.nt * grid.nx {
            return Err(Error::Dimension { expected: grid.nt * grid.nx, found: xi.len() });
        }
        Ok(NoisePath { seed, grid, xi, origin: NoiseOrigin::Sampled })
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn origin(&self) -> NoiseOrigin {
        self.origin
    }

    pub fn normals(&self) -> &[f64] {
        &self.xi
    }

    pub fn normals_row(&self, k: usize) -> &[f64] {
        let nx = self.grid.nx;
        &self.xi[k * nx..(k + 1) * nx]
    }

    /// `sqrt(dt / dx)`: converts a normal draw into an increment density.
    pub fn increment_scale(&self) -> f64 {
        (self.grid.dt() / self.grid.dx()).sqrt()
    }

    #[inline]
    pub fn increment(&self, k: usize, i: usize) -> f64 {
        self.xi[k * self.grid.nx + i] * self.increment_scale()
    }

    /// `W_t(φ)` at `t = steps · dt` for lattice samples `phi`.
    pub fn pairing(&self, phi: &[f64], steps: usize) -> Result<f64> {
        if phi.len() != self.grid.nx {
            return Err(Error::Dimension { expected: self.grid.nx, found: phi.len() });
        }
        if steps > self.grid.nt {
            return Err(Error::config(format!("{steps} steps exceed Nt = {}", self.grid.nt)));
        }
        let mut total = 0.0;
        for k in 0..steps {
            total += dot(self.normals_row(k), phi);
        }
        Ok(total * self.increment_scale() * self.grid.dx())
    }

    /// Aggregates white-noise mass over blocks of `fx` cells by `ft` steps.
    ///
    /// A coarse cell's mass is the sum of the fine masses it covers, so the
    /// coarse path is standard lattice noise on the coarse grid, coupled
    /// pathwise to this one.
    pub fn coarsen(&self, fx: usize, ft: usize) -> Result<NoisePath> {
        let coarse = self.grid.coarsened(fx, ft)?;
        let nx = self.grid.nx;
        let cnx = coarse.nx;
        let norm = 1.0 / ((fx * ft) as f64).sqrt();
        let mut xi = vec![0.0; coarse.nt * cnx];
        for kc in 0..coarse.nt {
            let out = &mut xi[kc * cnx..(kc + 1) * cnx];
            for k in kc * ft..(kc + 1) * ft {
                let row = &self.xi[k * nx..(k + 1) * nx];
                for (ic, o) in out.iter_mut().enumerate() {
                    *o += row[ic * fx..(ic + 1) * fx].iter().sum::<f64>();
                }
            }
            for o in out.iter_mut() {
                *o *= norm;
            }
        }
        let origin = match self.origin {
            NoiseOrigin::Zero => NoiseOrigin::Zero,
            NoiseOrigin::Coarsened { factor_x, factor_t } => NoiseOrigin::Coarsened {
                factor_x: factor_x * fx,
                factor_t: factor_t * ft,
            },
            NoiseOrigin::Sampled => NoiseOrigin::Coarsened { factor_x: fx, factor_t: ft },
        };
        Ok(NoisePath { seed: self.seed, grid: coarse, xi, origin })
    }

    /// Values `W^n_{t}(x_i)` at `(steps, cell)` probes, without materializing
    /// the mollified increments.
    ///
    /// Cumulates the raw noise up to each requested step and convolves only
    /// at the probed cells; by linearity this equals summing the rows of
    /// [`mollify`] up to rounding.
    pub fn mollified_cumulative(&self, kernel: &LatticeKernel, probes: &[(usize, usize)]) -> Result<Vec<f64>> {
        let nx = self.grid.nx;
        for &(steps, cell) in probes {
            if steps > self.grid.nt || cell >= nx {
                return Err(Error::config(format!("probe ({steps}, {cell}) outside grid")));
            }
        }
        let mut stops: Vec<usize> = probes.iter().map(|p| p.0).collect();
        stops.sort_unstable();
        stops.dedup();
        let mut running = vec![0.0; nx];
        let mut snapshots: Vec<Vec<f64>> = Vec::with_capacity(stops.len());
        let mut k = 0;
        for &stop in &stops {
            while k < stop {
                for (r, x) in running.iter_mut().zip(self.normals_row(k)) {
                    *r += x;
                }
                k += 1;
            }
            snapshots.push(running.clone());
        }
        let scale = self.increment_scale() * kernel.dx;
        Ok(probes
            .iter()
            .map(|&(steps, cell)| {
                let snap = &snapshots[stops.binary_search(&steps).unwrap()];
                let mut acc = 0.0;
                for &(m, w) in &kernel.taps {
                    acc += w * snap[self.grid.wrap(cell as isize - m)];
                }
                acc * scale
            })
            .collect())
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Increments of the mollified process `W^n` at the lattice nodes.
#[derive(Clone, Debug)]
pub struct MollifiedNoise<'a> {
    source: &'a NoisePath,
    mollifier: Mollifier,
    kernel: LatticeKernel,
    dw: Vec<f64>,
}

/// Convolves every time row of `path` with `δ_n` on the torus.
pub fn mollify<'a>(path: &'a NoisePath, m: &Mollifier) -> Result<MollifiedNoise<'a>> {
    let grid = *path.grid();
    let kernel = m.lattice_kernel(&grid)?;
    let nx = grid.nx;
    let scale = path.increment_scale();
    let mut dw = vec![0.0; grid.nt * nx];
    if path.origin() != NoiseOrigin::Zero {
        if kernel.width() > FFT_TAP_THRESHOLD {
            let mut sp = SpectralRow::new(nx, grid.length);
            let mult: Vec<Complex64> = sp
                .forward(&kernel.periodic)
                .into_iter()
                .map(|c| c * kernel.dx)
                .collect();
            for (k, out) in dw.chunks_exact_mut(nx).enumerate() {
                out.copy_from_slice(path.normals_row(k));
                sp.apply_multiplier(out, &mult);
            }
        } else {
            for (k, out) in dw.chunks_exact_mut(nx).enumerate() {
                kernel.convolve_direct(path.normals_row(k), out);
            }
        }
        for v in dw.iter_mut() {
            *v *= scale;
        }
    }
    Ok(MollifiedNoise { source: path, mollifier: m.clone(), kernel, dw })
}

impl<'a> MollifiedNoise<'a> {
    pub fn source(&self) -> &'a NoisePath {
        self.source
    }

    pub fn grid(&self) -> &GridSpec {
        self.source.grid()
    }

    pub fn mollifier(&self) -> &Mollifier {
        &self.mollifier
    }

    pub fn kernel(&self) -> &LatticeKernel {
        &self.kernel
    }

    pub fn increments(&self) -> &[f64] {
        &self.dw
    }

    pub fn row(&self, k: usize) -> &[f64] {
        let nx = self.grid().nx;
        &self.dw[k * nx..(k + 1) * nx]
    }

    /// `W^n_t(x_i)` at `t = steps · dt`.
    pub fn cumulative(&self, cell: usize, steps: usize) -> f64 {
        (0..steps).map(|k| self.row(k)[cell]).sum()
    }

    /// Realized quadratic variation `Σ_k (ΔW^n_k(x_i))²` over `[0, T]`.
    pub fn quadratic_variation(&self, cell: usize) -> f64 {
        self.quadratic_variation_until(cell, self.grid().nt)
    }

    pub fn quadratic_variation_until(&self, cell: usize, steps: usize) -> f64 {
        (0..steps)
            .map(|k| {
                let v = self.row(k)[cell];
                v * v
            })
            .sum()
    }
}

/// Free-function form of [`MollifiedNoise::quadratic_variation`].
pub fn quadratic_variation(noise: &MollifiedNoise<'_>, cell: usize) -> f64 {
    noise.quadratic_variation(cell)
}

/// Itô sum `Σ_k Σ_i g(t_k, x_i) ΔW_{k,i} dx` with `g` sampled time-major on
/// the lattice (`Nt` or `Nt + 1` rows; a final row is ignored).
pub fn stochastic_integral(g: &[f64], path: &NoisePath) -> Result<f64> {
    let grid = path.grid();
    let nx = grid.nx;
    if g.len() != grid.nt * nx && g.len() != grid.rows() * nx {
        return Err(Error::Dimension { expected: grid.nt * nx, found: g.len() });
    }
    let mut total = 0.0;
    for k in 0..grid.nt {
        total += dot(&g[k * nx..(k + 1) * nx], path.normals_row(k));
    }
    Ok(total * path.increment_scale() * grid.dx())
}

/// [`stochastic_integral`] for a separable integrand `g(t, x) = χ(t) ψ(x)`.
pub fn stochastic_integral_tensor(chi: &[f64], psi: &[f64], path: &NoisePath) -> Result<f64> {
    let grid = path.grid();
    if chi.len() < grid.nt {
        return Err(Error::Dimension { expected: grid.nt, found: chi.len() });
    }
    if psi.len() != grid.nx {
        return Err(Error::Dimension { expected: grid.nx, found: psi.len() });
    }
    let mut total = 0.0;
    for (k, &c) in chi.iter().take(grid.nt).enumerate() {
        if c != 0.0 {
            total += c * dot(path.normals_row(k), psi);
        }
    }
    Ok(total * path.increment_scale() * grid.dx())
}
