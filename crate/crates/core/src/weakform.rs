//! Test functions, lattice pairings, the tested weak residual of the
//! regularized Burgers equation, and sections at `t = 0` through strict delta
//! nets.
//!
//! Pairings use plain Riemann sums in space and the trapezoid rule in time:
//!
//! ```text
//! ⟨F, g⟩ = Σ_k w_k Σ_i F(t_k, x_i) g(t_k, x_i) dx dt,   w_0 = w_Nt = ½, else 1.
//! ```
//!
//! Derivatives in the weak formulation are always moved onto the test
//! function, whose partials are evaluated analytically.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Field, Label};
use crate::grid::GridSpec;
use crate::heat::InitialDatum;
use crate::mollifier::Mollifier;
use crate::noise::{stochastic_integral, stochastic_integral_tensor, NoisePath};
use crate::quadrature::integrate;

/// Bump `b(s) = exp(-1 / (1 - u²))`, `u = (s - center) / half_width`, with
/// support `(center - half_width, center + half_width)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bump {
    pub center: f64,
    pub half_width: f64,
}

impl Bump {
    pub fn new(center: f64, half_width: f64) -> Self {
        Bump { center, half_width }
    }

    pub fn support(&self) -> (f64, f64) {
        (self.center - self.half_width, self.center + self.half_width)
    }

    #[inline]
    fn u(&self, s: f64) -> Option<f64> {
        let u = (s - self.center) / self.half_width;
        if u.abs() < 1.0 {
            Some(u)
        } else {
            None
        }
    }

    pub fn value(&self, s: f64) -> f64 {
        self.u(s).map_or(0.0, |u| (-1.0 / (1.0 - u * u)).exp())
    }

    pub fn d1(&self, s: f64) -> f64 {
        self.u(s).map_or(0.0, |u| {
            let q = 1.0 - u * u;
            let b = (-1.0 / q).exp();
            b * (-2.0 * u / (q * q)) / self.half_width
        })
    }

    pub fn d2(&self, s: f64) -> f64 {
        self.u(s).map_or(0.0, |u| {
            let q = 1.0 - u * u;
            let b = (-1.0 / q).exp();
            let g1 = -2.0 * u / (q * q);
            let g2 = -2.0 * (1.0 + 3.0 * u * u) / (q * q * q);
            b * (g1 * g1 + g2) / (self.half_width * self.half_width)
        })
    }
}

/// Separable test function `φ(t, x) = χ(t) ψ(x)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestFunction {
    pub id: usize,
    pub temporal: Bump,
    pub spatial: Bump,
}

impl TestFunction {
    pub fn new(id: usize, temporal: Bump, spatial: Bump) -> Self {
        TestFunction { id, temporal, spatial }
    }

    pub fn value(&self, t: f64, x: f64) -> f64 {
        self.temporal.value(t) * self.spatial.value(x)
    }

    pub fn dt(&self, t: f64, x: f64) -> f64 {
        self.temporal.d1(t) * self.spatial.value(x)
    }

    pub fn dx(&self, t: f64, x: f64) -> f64 {
        self.temporal.value(t) * self.spatial.d1(x)
    }

    pub fn dxx(&self, t: f64, x: f64) -> f64 {
        self.temporal.value(t) * self.spatial.d2(x)
    }

    /// Support check: strictly inside `(0, T)` in time and inside `(0, L)`
    /// without wrapping in space.
    pub fn support_violations(&self, grid: &GridSpec) -> Vec<String> {
        let mut v = Vec::new();
        let (a, b) = self.temporal.support();
        if !(self.temporal.half_width > 0.0 && a > 0.0 && b < grid.horizon) {
            v.push(format!(
                "test function {}: temporal support ({a}, {b}) not strictly inside (0, {})",
                self.id, grid.horizon
            ));
        }
        let (c, d) = self.spatial.support();
        if !(self.spatial.half_width > 0.0 && c > 0.0 && d < grid.length) {
            v.push(format!(
                "test function {}: spatial support ({c}, {d}) not inside (0, {})",
                self.id, grid.length
            ));
        }
        v
    }

    pub fn check_support(&self, grid: &GridSpec) -> Result<()> {
        let v = self.support_violations(grid);
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(v))
        }
    }

    /// `χ(t_k)`, `k = 0..=Nt`.
    pub fn temporal_samples(&self, grid: &GridSpec) -> Vec<f64> {
        (0..grid.rows()).map(|k| self.temporal.value(grid.t(k))).collect()
    }

    pub fn temporal_derivative_samples(&self, grid: &GridSpec) -> Vec<f64> {
        (0..grid.rows()).map(|k| self.temporal.d1(grid.t(k))).collect()
    }

    /// `ψ(x_i)`, `i = 0..Nx`.
    pub fn spatial_samples(&self, grid: &GridSpec) -> Vec<f64> {
        (0..grid.nx).map(|i| self.spatial.value(grid.x(i))).collect()
    }

    pub fn spatial_d1_samples(&self, grid: &GridSpec) -> Vec<f64> {
        (0..grid.nx).map(|i| self.spatial.d1(grid.x(i))).collect()
    }

    pub fn spatial_d2_samples(&self, grid: &GridSpec) -> Vec<f64> {
        (0..grid.nx).map(|i| self.spatial.d2(grid.x(i))).collect()
    }

    /// `φ(t_k, x_i)` on the full lattice, time-major.
    pub fn lattice_samples(&self, grid: &GridSpec) -> Vec<f64> {
        let chi = self.temporal_samples(grid);
        let psi = self.spatial_samples(grid);
        chi.iter().flat_map(|c| psi.iter().map(move |p| c * p)).collect()
    }
}

#[inline]
fn trapezoid_weight(k: usize, nt: usize) -> f64 {
    if k == 0 || k == nt {
        0.5
    } else {
        1.0
    }
}

/// `⟨F, g⟩` with `g` sampled on the full lattice (`(Nt + 1) × Nx`).
pub fn pair(f: &Field, g: &[f64]) -> Result<f64> {
    let grid = *f.grid();
    let nx = grid.nx;
    if g.len() != grid.rows() * nx {
        return Err(Error::Dimension { expected: grid.rows() * nx, found: g.len() });
    }
    let mut total = 0.0;
    for k in 0..grid.rows() {
        let row: f64 = f.row(k).iter().zip(&g[k * nx..(k + 1) * nx]).map(|(a, b)| a * b).sum();
        total += trapezoid_weight(k, grid.nt) * row;
    }
    Ok(total * grid.dx() * grid.dt())
}

fn tensor_shapes(grid: &GridSpec, chi: &[f64], psi: &[f64]) -> Result<()> {
    if chi.len() != grid.rows() {
        return Err(Error::Dimension { expected: grid.rows(), found: chi.len() });
    }
    if psi.len() != grid.nx {
        return Err(Error::Dimension { expected: grid.nx, found: psi.len() });
    }
    Ok(())
}

/// `⟨h(F), χ ⊗ ψ⟩` for a pointwise map `h`; rows where `χ` vanishes are skipped.
pub fn pair_tensor_map(f: &Field, chi: &[f64], psi: &[f64], h: impl Fn(f64) -> f64) -> Result<f64> {
    let grid = *f.grid();
    tensor_shapes(&grid, chi, psi)?;
    let mut total = 0.0;
    for (k, &c) in chi.iter().enumerate() {
        if c == 0.0 {
            continue;
        }
        let scale = f.log_gauge()[k].exp();
        let row: f64 = f
            .row_raw(k)
            .iter()
            .zip(psi)
            .map(|(v, p)| h(v * scale) * p)
            .sum();
        total += trapezoid_weight(k, grid.nt) * c * row;
    }
    Ok(total * grid.dx() * grid.dt())
}

/// `⟨F, χ ⊗ ψ⟩`.
pub fn pair_tensor(f: &Field, chi: &[f64], psi: &[f64]) -> Result<f64> {
    pair_tensor_map(f, chi, psi, |v| v)
}

/// `⟨|F|, |χ ⊗ ψ|⟩`.
pub fn pair_abs_tensor(f: &Field, chi: &[f64], psi: &[f64]) -> Result<f64> {
    let chi: Vec<f64> = chi.iter().map(|c| c.abs()).collect();
    let psi: Vec<f64> = psi.iter().map(|p| p.abs()).collect();
    pair_tensor_map(f, &chi, &psi, f64::abs)
}

/// Lattice `(ψ' * δ_n)(x_i)` on the torus.
fn mollified_row(row: &[f64], m: &Mollifier, grid: &GridSpec) -> Result<Vec<f64>> {
    let kernel = m.lattice_kernel(grid)?;
    let mut out = vec![0.0; row.len()];
    kernel.convolve_direct(row, &mut out);
    Ok(out)
}

/// The four tested terms of the regularized Burgers equation for one test
/// function.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeakResidualReport {
    pub n: u32,
    pub grid: GridSpec,
    pub seed: u64,
    pub phi_id: usize,
    /// `[⟨U, ∂tφ⟩, ⟨U, ∂xxφ⟩, -⟨U², ∂xφ⟩, -∫(∂xφ * δ_n) dW]`.
    pub terms: [f64; 4],
    pub residual: f64,
}

impl WeakResidualReport {
    pub fn max_term(&self) -> f64 {
        self.terms.iter().fold(0.0, |m, t| m.max(t.abs()))
    }

    /// `|residual| / max |term|`.
    pub fn normalized(&self) -> f64 {
        let m = self.max_term();
        if m > 0.0 {
            self.residual.abs() / m
        } else {
            self.residual.abs()
        }
    }
}

/// Stochastic term `∫(∂xφ * δ_n) dW` and its unmollified counterpart
/// `∫ ∂xφ dW` on the same path.
pub fn stochastic_terms(noise: &NoisePath, m: &Mollifier, phi: &TestFunction) -> Result<(f64, f64)> {
    let grid = *noise.grid();
    let chi = phi.temporal_samples(&grid);
    let psi_x = phi.spatial_d1_samples(&grid);
    let smoothed = mollified_row(&psi_x, m, &grid)?;
    Ok((
        stochastic_integral_tensor(&chi, &smoothed, noise)?,
        stochastic_integral_tensor(&chi, &psi_x, noise)?,
    ))
}

/// Weak residual of `∂t U = ΔU + ∂x U² + ∂x Ẇ^n` tested against `φ`.
///
/// Pairing with `φ` and moving every derivative onto it gives
///
/// ```text
/// ⟨U, ∂tφ⟩ + ⟨U, ∂xxφ⟩ - ⟨U², ∂xφ⟩ - ∫(∂xφ * δ_n) dW = 0
/// ```
///
/// for the regularized solution; the report holds the four terms and their
/// sum.
pub fn weak_residual(u: &Field, noise: &NoisePath, m: &Mollifier, phi: &TestFunction) -> Result<WeakResidualReport> {
    let grid = *u.grid();
    if !grid.same_shape(noise.grid()) {
        return Err(Error::config("field and noise are on different grids"));
    }
    phi.check_support(&grid)?;
    let chi = phi.temporal_samples(&grid);
    let chi_t = phi.temporal_derivative_samples(&grid);
    let psi = phi.spatial_samples(&grid);
    let psi_x = phi.spatial_d1_samples(&grid);
    let psi_xx = phi.spatial_d2_samples(&grid);

    let time_term = pair_tensor(u, &chi_t, &psi)?;
    let diffusion_term = pair_tensor(u, &chi, &psi_xx)?;
    let nonlinear_term = -pair_tensor_map(u, &chi, &psi_x, |v| v * v)?;
    let smoothed = mollified_row(&psi_x, m, &grid)?;
    let noise_term = -stochastic_integral_tensor(&chi, &smoothed, noise)?;

    let terms = [time_term, diffusion_term, nonlinear_term, noise_term];
    Ok(WeakResidualReport {
        n: m.n(),
        grid,
        seed: noise.seed(),
        phi_id: phi.id,
        terms,
        residual: terms.iter().sum(),
    })
}

/// A test function held as full-lattice samples of `∂tφ`, `∂xφ`, `∂xxφ`, so
/// that linear combinations of [`TestFunction`]s can be tested too.
#[derive(Clone, Debug, PartialEq)]
pub struct LatticeTest {
    pub grid: GridSpec,
    pub dt: Vec<f64>,
    pub dx: Vec<f64>,
    pub dxx: Vec<f64>,
}

impl LatticeTest {
    pub fn sample(phi: &TestFunction, grid: &GridSpec) -> Self {
        let at = |f: &dyn Fn(f64, f64) -> f64| -> Vec<f64> {
            (0..grid.rows())
                .flat_map(|k| (0..grid.nx).map(move |i| (k, i)))
                .map(|(k, i)| f(grid.t(k), grid.x(i)))
                .collect()
        };
        LatticeTest {
            grid: *grid,
            dt: at(&|t, x| phi.dt(t, x)),
            dx: at(&|t, x| phi.dx(t, x)),
            dxx: at(&|t, x| phi.dxx(t, x)),
        }
    }

    /// `a · self + b · other`.
    pub fn combine(&self, a: f64, other: &LatticeTest, b: f64) -> Self {
        let mix = |p: &[f64], q: &[f64]| p.iter().zip(q).map(|(x, y)| a * x + b * y).collect();
        LatticeTest {
            grid: self.grid,
            dt: mix(&self.dt, &other.dt),
            dx: mix(&self.dx, &other.dx),
            dxx: mix(&self.dxx, &other.dxx),
        }
    }
}

/// The four residual terms of [`weak_residual`] for a lattice-sampled test
/// function.
pub fn weak_residual_terms(u: &Field, noise: &NoisePath, m: &Mollifier, phi: &LatticeTest) -> Result<[f64; 4]> {
    let grid = *u.grid();
    if !grid.same_shape(noise.grid()) || !grid.same_shape(&phi.grid) {
        return Err(Error::config("field, noise, and test function are on different grids"));
    }
    let nx = grid.nx;
    let squared = u.map(Label::U, |v| v * v);
    let kernel = m.lattice_kernel(&grid)?;
    let mut smoothed = vec![0.0; phi.dx.len()];
    for (row, out) in phi.dx.chunks_exact(nx).zip(smoothed.chunks_exact_mut(nx)) {
        kernel.convolve_direct(row, out);
    }
    Ok([
        pair(u, &phi.dt)?,
        pair(u, &phi.dxx)?,
        -pair(&squared, &phi.dx)?,
        -stochastic_integral(&smoothed, noise)?,
    ])
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NonlinearitySequence {
    /// `-⟨U_n², ∂xφ⟩` per entry.
    pub values: Vec<f64>,
    /// `|values[j + 1] - values[j]|`.
    pub differences: Vec<f64>,
}

impl NonlinearitySequence {
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        if values.len() < 3 {
            return Err(Error::config(format!(
                "limit check needs at least 3 entries, got {}",
                values.len()
            )));
        }
        let differences = values.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
        Ok(NonlinearitySequence { values, differences })
    }

    pub fn differences_decrease(&self) -> bool {
        self.differences.windows(2).all(|w| w[1] < w[0])
    }
}

/// `⟨∂x U², φ⟩ = -⟨U², ∂xφ⟩`.
pub fn nonlinearity_pairing(u: &Field, phi: &TestFunction) -> Result<f64> {
    let grid = *u.grid();
    phi.check_support(&grid)?;
    let chi = phi.temporal_samples(&grid);
    let psi_x = phi.spatial_d1_samples(&grid);
    Ok(-pair_tensor_map(u, &chi, &psi_x, |v| v * v)?)
}

/// [`nonlinearity_pairing`] along a sequence `U_n`, with successive differences.
pub fn limit_nonlinearity(fields: &[Field], phi: &TestFunction) -> Result<NonlinearitySequence> {
    if fields.len() < 3 {
        return Err(Error::config(format!(
            "limit check needs at least 3 fields, got {}",
            fields.len()
        )));
    }
    let values = fields.iter().map(|u| nonlinearity_pairing(u, phi)).collect::<Result<Vec<_>>>()?;
    NonlinearitySequence::from_values(values)
}

/// Unit-mass bump `ρ_ε(t) = ρ((t - a - ε) / ε) / ε` supported on
/// `[a, a + 2ε]` with offset `a = lead · ε`, where `ρ` is the standard
/// normalized bump on `(-1, 1)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StrictDeltaNet {
    pub eps: f64,
    pub lead: f64,
    #[serde(skip, default = "standard_profile")]
    profile: Mollifier,
}

fn standard_profile() -> Mollifier {
    Mollifier::new(1).expect("unit mollifier")
}

/// Default offset of the net's support from `t = 0`, in units of `ε`.
pub const DEFAULT_LEAD: f64 = 0.05;

impl StrictDeltaNet {
    pub fn new(eps: f64) -> Result<Self> {
        Self::with_lead(eps, DEFAULT_LEAD)
    }

    pub fn with_lead(eps: f64, lead: f64) -> Result<Self> {
        if !(eps > 0.0 && eps.is_finite()) || !(lead > 0.0 && lead.is_finite()) {
            return Err(Error::config(format!("delta net needs eps > 0 and lead > 0, got ({eps}, {lead})")));
        }
        Ok(StrictDeltaNet { eps, lead, profile: standard_profile() })
    }

    /// Geometric ladder `eps_0 · ratioʲ`, `j = 0..rungs`.
    pub fn ladder(eps0: f64, ratio: f64, rungs: usize) -> Result<Vec<Self>> {
        (0..rungs).map(|j| Self::new(eps0 * ratio.powi(j as i32))).collect()
    }

    pub fn support(&self) -> (f64, f64) {
        let a = self.lead * self.eps;
        (a, a + 2.0 * self.eps)
    }

    pub fn value(&self, t: f64) -> f64 {
        let center = (self.lead + 1.0) * self.eps;
        self.profile.profile((t - center) / self.eps) / self.eps
    }

    pub fn mass(&self) -> f64 {
        let (a, b) = self.support();
        integrate(|t| self.value(t), a, b, 1e-13)
    }

    pub fn l1_norm(&self) -> f64 {
        let (a, b) = self.support();
        integrate(|t| self.value(t).abs(), a, b, 1e-13)
    }

    /// Trapezoid weights of `ρ_ε` on the time nodes, rescaled to sum to one.
    pub fn lattice_weights(&self, grid: &GridSpec) -> Result<Vec<f64>> {
        let (a, b) = self.support();
        if !(a > 0.0 && b < grid.horizon) {
            return Err(Error::config(format!(
                "delta net support ({a}, {b}) escapes (0, {})",
                grid.horizon
            )));
        }
        let mut w: Vec<f64> = (0..grid.rows())
            .map(|k| trapezoid_weight(k, grid.nt) * self.value(grid.t(k)))
            .collect();
        let nodes = w.iter().filter(|&&v| v > 0.0).count();
        if nodes < 4 {
            return Err(Error::config(format!(
                "delta net eps = {} resolved by only {nodes} time nodes (dt = {})",
                self.eps,
                grid.dt()
            )));
        }
        let total: f64 = w.iter().sum();
        for v in w.iter_mut() {
            *v /= total;
        }
        Ok(w)
    }
}

/// `⟨U, ρ_ε ⊗ ψ⟩` for each net in a decreasing ladder.
pub fn section_at_zero(u: &Field, nets: &[StrictDeltaNet], psi: &Bump) -> Result<Vec<f64>> {
    if nets.windows(2).any(|w| w[1].eps >= w[0].eps) {
        return Err(Error::config("delta net ladder must be strictly decreasing in eps"));
    }
    let grid = *u.grid();
    let psi_samples: Vec<f64> = (0..grid.nx).map(|i| psi.value(grid.x(i))).collect();
    let dx = grid.dx();
    let mut out = Vec::with_capacity(nets.len());
    for net in nets {
        let w = net.lattice_weights(&grid)?;
        let mut total = 0.0;
        for (k, &wk) in w.iter().enumerate() {
            if wk == 0.0 {
                continue;
            }
            let row: f64 = u.row(k).iter().zip(&psi_samples).map(|(a, b)| a * b).sum();
            total += wk * row;
        }
        out.push(total * dx);
    }
    Ok(out)
}

/// `⟨∂x f, ψ⟩ = -∫ f ∂xψ` by adaptive quadrature over `supp ψ`.
pub fn section_target(f: &InitialDatum, psi: &Bump, length: f64) -> f64 {
    let (a, b) = psi.support();
    -integrate(|x| f.value(x, length) * psi.d1(x), a, b, 1e-13)
}

/// Reproducible battery of bump test functions for `grid`.
///
/// Spatial half-widths are drawn in `[max(4 dx, 0.08 L), 0.2 L]` (so every
/// support spans at least 8 cells) and temporal half-widths in
/// `[max(4 dt, 0.15 T), 0.35 T]`; centers keep a two-cell clearance from the
/// edges of `(0, L)` and `(0, T)`.
pub fn make_test_battery(seed: u64, count: usize, grid: &GridSpec) -> Result<Vec<TestFunction>> {
    if count == 0 {
        return Err(Error::config("test battery needs at least one function"));
    }
    grid.validate()?;
    let (l, t) = (grid.length, grid.horizon);
    let (dx, dt) = (grid.dx(), grid.dt());
    let sw = ((4.0 * dx).max(0.08 * l), 0.2 * l);
    let tw = ((4.0 * dt).max(0.15 * t), 0.35 * t);
    if sw.0 > sw.1 || tw.0 > tw.1 {
        return Err(Error::config(format!(
            "grid too coarse for a test battery: need Nx >= {} and Nt >= {}",
            (20.0_f64).ceil(),
            (4.0 / 0.35_f64).ceil()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    for id in 0..count {
        let hw = rng.random_range(sw.0..=sw.1);
        let c = rng.random_range(hw + 2.0 * dx..=l - hw - 2.0 * dx);
        let thw = rng.random_range(tw.0..=tw.1);
        let tc = rng.random_range(thw + 2.0 * dt..=t - thw - 2.0 * dt);
        out.push(TestFunction::new(id, Bump::new(tc, thw), Bump::new(c, hw)));
    }
    Ok(out)
}
