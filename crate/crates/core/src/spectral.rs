//! FFT-backed periodic operators on a single spatial row.

use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Signed wavenumber index of DFT bin `m` for a length-`n` transform.
#[inline]
pub fn signed_mode(m: usize, n: usize) -> isize {
    if m <= n / 2 {
        m as isize
    } else {
        m as isize - n as isize
    }
}

/// Forward/inverse transform pair with reusable buffers.
pub struct SpectralRow {
    n: usize,
    length: f64,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    buf: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

impl SpectralRow {
    pub fn new(n: usize, length: f64) -> Self {
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        let scratch_len = forward
            .get_inplace_scratch_len()
            .max(inverse.get_inplace_scratch_len());
        SpectralRow {
            n,
            length,
            forward,
            inverse,
            buf: vec![Complex64::new(0.0, 0.0); n],
            scratch: vec![Complex64::new(0.0, 0.0); scratch_len],
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Angular wavenumber `2π m / L` of bin `m`.
    #[inline]
    pub fn wavenumber(&self, m: usize) -> f64 {
        2.0 * PI * signed_mode(m, self.n) as f64 / self.length
    }

    /// Unnormalized forward DFT of a real row.
    pub fn forward(&mut self, row: &[f64]) -> Vec<Complex64> {
        assert_eq!(row.len(), self.n);
        let mut out: Vec<Complex64> = row.iter().map(|&r| Complex64::new(r, 0.0)).collect();
        self.forward.process_with_scratch(&mut out, &mut self.scratch);
        out
    }

    /// Applies a diagonal Fourier multiplier: `row <- F⁻¹ (mult · F row)`.
    pub fn apply_multiplier(&mut self, row: &mut [f64], mult: &[Complex64]) {
        assert_eq!(row.len(), self.n);
        assert_eq!(mult.len(), self.n);
        for (b, &r) in self.buf.iter_mut().zip(row.iter()) {
            *b = Complex64::new(r, 0.0);
        }
        self.forward.process_with_scratch(&mut self.buf, &mut self.scratch);
        for (b, m) in self.buf.iter_mut().zip(mult) {
            *b *= m;
        }
        self.inverse.process_with_scratch(&mut self.buf, &mut self.scratch);
        let scale = 1.0 / self.n as f64;
        for (r, b) in row.iter_mut().zip(self.buf.iter()) {
            *r = b.re * scale;
        }
    }

    /// Real-valued multiplier variant.
    pub fn apply_real_multiplier(&mut self, row: &mut [f64], mult: &[f64]) {
        assert_eq!(row.len(), self.n);
        for (b, &r) in self.buf.iter_mut().zip(row.iter()) {
            *b = Complex64::new(r, 0.0);
        }
        self.forward.process_with_scratch(&mut self.buf, &mut self.scratch);
        for (b, &m) in self.buf.iter_mut().zip(mult) {
            *b *= m;
        }
        self.inverse.process_with_scratch(&mut self.buf, &mut self.scratch);
        let scale = 1.0 / self.n as f64;
        for (r, b) in row.iter_mut().zip(self.buf.iter()) {
            *r = b.re * scale;
        }
    }

    /// Heat-kernel multipliers `exp(-(2πm/L)² dt)`.
    pub fn heat_multipliers(&self, dt: f64) -> Vec<f64> {
        (0..self.n)
            .map(|m| {
                let k = self.wavenumber(m);
                (-k * k * dt).exp()
            })
            .collect()
    }

    /// Multipliers of `∂x`; the Nyquist bin of an even-length grid is zeroed.
    pub fn derivative_multipliers(&self) -> Vec<Complex64> {
        (0..self.n)
            .map(|m| {
                if self.n % 2 == 0 && m == self.n / 2 {
                    Complex64::new(0.0, 0.0)
                } else {
                    Complex64::new(0.0, self.wavenumber(m))
                }
            })
            .collect()
    }
}

/// Exact periodic heat flow `e^{dt Δ}` applied to one row, computed spectrally.
pub fn heat_semigroup(row: &[f64], dt: f64, length: f64) -> Vec<f64> {
    let mut out = row.to_vec();
    if dt == 0.0 {
        return out;
    }
    let mut sp = SpectralRow::new(row.len(), length);
    let mult = sp.heat_multipliers(dt);
    sp.apply_real_multiplier(&mut out, &mult);
    out
}

/// Cached heat propagator for a fixed step.
pub struct HeatPropagator {
    spectral: SpectralRow,
    multipliers: Vec<f64>,
    identity: bool,
}

impl HeatPropagator {
    pub fn new(n: usize, length: f64, dt: f64) -> Self {
        let spectral = SpectralRow::new(n, length);
        let multipliers = spectral.heat_multipliers(dt);
        HeatPropagator { spectral, multipliers, identity: dt == 0.0 }
    }

    pub fn apply(&mut self, row: &mut [f64]) {
        if !self.identity {
            self.spectral.apply_real_multiplier(row, &self.multipliers);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_step_is_identity() {
        let row: Vec<f64> = (0..16).map(|i| (i as f64 * 0.37).sin() + 2.0).collect();
        assert_eq!(heat_semigroup(&row, 0.0, 1.0), row);
    }

    #[test]
    fn constants_are_fixed_points() {
        let row = vec![3.25; 32];
        for dt in [1e-4, 0.1, 10.0] {
            for v in heat_semigroup(&row, dt, 2.0) {
                assert!((v - 3.25).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn single_mode_decays_at_eigenvalue() {
        let n = 64;
        let row: Vec<f64> = (0..n).map(|i| (2.0 * PI * i as f64 / n as f64).sin()).collect();
        let out = heat_semigroup(&row, 0.1, 1.0);
        let factor = (-4.0 * PI * PI * 0.1).exp();
        for (o, r) in out.iter().zip(&row) {
            assert!((o - factor * r).abs() < 1e-10);
        }
    }

    #[test]
    fn mass_preserved() {
        let n = 50;
        let row: Vec<f64> = (0..n).map(|i| ((i * i) % 7) as f64).collect();
        let before: f64 = row.iter().sum();
        let after: f64 = heat_semigroup(&row, 0.003, 1.0).iter().sum();
        assert!((before - after).abs() < 1e-12 * before);
    }

    #[test]
    fn spectral_derivative_of_cosine() {
        let n = 32;
        let length = 3.0;
        let mut row: Vec<f64> = (0..n)
            .map(|i| (2.0 * PI * 2.0 * i as f64 / n as f64).cos())
            .collect();
        let mut sp = SpectralRow::new(n, length);
        let mult = sp.derivative_multipliers();
        sp.apply_multiplier(&mut row, &mult);
        let k = 2.0 * PI * 2.0 / length;
        for (i, v) in row.iter().enumerate() {
            let expected = -k * (2.0 * PI * 2.0 * i as f64 / n as f64).sin();
            assert!((v - expected).abs() < 1e-12);
        }
    }
}
