//! Periodic rectangular grids, Fourier transforms and spectral operators.
//!
//! Fields are stored row-major with `x` varying fastest: the value at grid
//! point `(i, j)`, located at `(i * hx, j * hy)`, lives at index `j * nx + i`.
//! Fourier coefficients use the same layout, with FFT-ordered mode indices
//! along each axis (`0, 1, .., n/2 - 1, -n/2, .., -1`).
//!
//! Transforms are normalized so that the `(0, 0)` coefficient equals the
//! field mean; the inverse transform is then a plain Fourier sum. Under this
//! convention `∫ f g dx = |Ω| Σ ĉ_f conj(ĉ_g)`.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Geometry and resolution of a doubly periodic rectangle `[0, lx) x [0, ly)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSpec {
    pub nx: usize,
    pub ny: usize,
    pub lx: f64,
    pub ly: f64,
}

impl GridSpec {
    pub fn new(nx: usize, ny: usize, lx: f64, ly: f64) -> Result<Self> {
        if nx < 4 || ny < 4 || !nx.is_multiple_of(2) || !ny.is_multiple_of(2) {
            return Err(Error::InvalidGrid(format!(
                "point counts must be even and >= 4, got {nx}x{ny}"
            )));
        }
        if !(lx > 0.0 && lx.is_finite() && ly > 0.0 && ly.is_finite()) {
            return Err(Error::InvalidGrid(format!(
                "domain lengths must be positive, got {lx}x{ly}"
            )));
        }
        Ok(GridSpec { nx, ny, lx, ly })
    }

    /// Square grid of `n x n` points on `[0, l)^2`.
    pub fn square(n: usize, l: f64) -> Result<Self> {
        Self::new(n, n, l, l)
    }

    pub fn hx(&self) -> f64 {
        self.lx / self.nx as f64
    }

    pub fn hy(&self) -> f64 {
        self.ly / self.ny as f64
    }

    /// Number of grid points.
    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Domain measure `|Ω|`.
    pub fn area(&self) -> f64 {
        self.lx * self.ly
    }

    pub fn x(&self, i: usize) -> f64 {
        i as f64 * self.hx()
    }

    pub fn y(&self, j: usize) -> f64 {
        j as f64 * self.hy()
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    /// Signed mode index for FFT slot `slot` on an axis with `n` points.
    pub fn mode_of_slot(slot: usize, n: usize) -> i64 {
        if slot < n / 2 {
            slot as i64
        } else {
            slot as i64 - n as i64
        }
    }

    /// FFT slot holding signed mode `mode` on an axis with `n` points.
    pub fn slot_of_mode(mode: i64, n: usize) -> usize {
        mode.rem_euclid(n as i64) as usize
    }

    pub fn kx(&self, p: i64) -> f64 {
        2.0 * PI * p as f64 / self.lx
    }

    pub fn ky(&self, q: i64) -> f64 {
        2.0 * PI * q as f64 / self.ly
    }
}

/// Real scalar field sampled on a [`GridSpec`].
#[derive(Clone, Debug, PartialEq)]
pub struct RealField {
    grid: GridSpec,
    values: Vec<f64>,
}

impl RealField {
    pub fn zeros(grid: GridSpec) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn constant(grid: GridSpec, c: f64) -> Self {
        RealField {
            grid,
            values: vec![c; grid.len()],
        }
    }

    pub fn from_values(grid: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "expected {} values, got {}",
                grid.len(),
                values.len()
            )));
        }
        Ok(RealField { grid, values })
    }

    /// Samples `f(x, y)` at every grid point.
    pub fn from_fn(grid: GridSpec, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut values = Vec::with_capacity(grid.len());
        for j in 0..grid.ny {
            let y = grid.y(j);
            for i in 0..grid.nx {
                values.push(f(grid.x(i), y));
            }
        }
        RealField { grid, values }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.index(i, j)]
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> RealField {
        RealField {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_map(&self, other: &RealField, f: impl Fn(f64, f64) -> f64) -> RealField {
        debug_assert_eq!(self.grid, other.grid);
        RealField {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    /// `a * self + b * other`.
    pub fn lin_comb(&self, a: f64, other: &RealField, b: f64) -> RealField {
        self.zip_map(other, |u, v| a * u + b * v)
    }

    pub fn scaled(&self, s: f64) -> RealField {
        self.map(|v| s * v)
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Largest absolute value; NaN if any value is NaN.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, &v| {
            if v.is_nan() || m.is_nan() {
                f64::NAN
            } else {
                m.max(v.abs())
            }
        })
    }

    /// Periodic trapezoid rule `hx * hy * Σ f_ij`.
    pub fn integral(&self) -> f64 {
        self.grid.hx() * self.grid.hy() * self.values.iter().sum::<f64>()
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }
}

/// Fourier coefficients of a field on a [`GridSpec`].
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralField {
    grid: GridSpec,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn zeros(grid: GridSpec) -> Self {
        SpectralField {
            grid,
            coeffs: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    /// Coefficient of signed mode `(p, q)`.
    pub fn coeff(&self, p: i64, q: i64) -> Complex64 {
        let i = GridSpec::slot_of_mode(p, self.grid.nx);
        let j = GridSpec::slot_of_mode(q, self.grid.ny);
        self.coeffs[self.grid.index(i, j)]
    }

    pub fn set_coeff(&mut self, p: i64, q: i64, c: Complex64) {
        let i = GridSpec::slot_of_mode(p, self.grid.nx);
        let j = GridSpec::slot_of_mode(q, self.grid.ny);
        let idx = self.grid.index(i, j);
        self.coeffs[idx] = c;
    }

    pub fn scaled(&self, s: f64) -> SpectralField {
        SpectralField {
            grid: self.grid,
            coeffs: self.coeffs.iter().map(|&c| c * s).collect(),
        }
    }

    /// `a * self + b * other`.
    pub fn lin_comb(&self, a: f64, other: &SpectralField, b: f64) -> SpectralField {
        debug_assert_eq!(self.grid, other.grid);
        SpectralField {
            grid: self.grid,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(&u, &v)| u * a + v * b)
                .collect(),
        }
    }
}

/// FFT plans and wavenumber tables for one grid.
///
/// All methods take `&self`; a `Spectral` can be shared between threads.
#[derive(Clone)]
pub struct Spectral {
    grid: GridSpec,
    fwd_x: Arc<dyn Fft<f64>>,
    inv_x: Arc<dyn Fft<f64>>,
    fwd_y: Arc<dyn Fft<f64>>,
    inv_y: Arc<dyn Fft<f64>>,
    ksq: Vec<f64>,
    keep_dealiased: Vec<bool>,
}

impl std::fmt::Debug for Spectral {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Spectral").field("grid", &self.grid).finish()
    }
}

impl Spectral {
    pub fn new(grid: GridSpec) -> Self {
        let mut planner = FftPlanner::new();
        let fwd_x = planner.plan_fft_forward(grid.nx);
        let inv_x = planner.plan_fft_inverse(grid.nx);
        let fwd_y = planner.plan_fft_forward(grid.ny);
        let inv_y = planner.plan_fft_inverse(grid.ny);

        let mut ksq = Vec::with_capacity(grid.len());
        let mut keep_dealiased = Vec::with_capacity(grid.len());
        for j in 0..grid.ny {
            let q = GridSpec::mode_of_slot(j, grid.ny);
            let ky = grid.ky(q);
            for i in 0..grid.nx {
                let p = GridSpec::mode_of_slot(i, grid.nx);
                let kx = grid.kx(p);
                ksq.push(kx * kx + ky * ky);
                keep_dealiased.push(3 * p.unsigned_abs() as usize <= grid.nx
                    && 3 * q.unsigned_abs() as usize <= grid.ny);
            }
        }

        Spectral {
            grid,
            fwd_x,
            inv_x,
            fwd_y,
            inv_y,
            ksq,
            keep_dealiased,
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    /// `|k|^2 = kx^2 + ky^2` per coefficient slot.
    pub fn ksq(&self) -> &[f64] {
        &self.ksq
    }

    fn transform_2d(&self, data: &mut [Complex64], along_x: &dyn Fft<f64>, along_y: &dyn Fft<f64>) {
        let (nx, ny) = (self.grid.nx, self.grid.ny);
        along_x.process(data);
        let mut cols = vec![Complex64::new(0.0, 0.0); data.len()];
        transpose(data, &mut cols, nx, ny);
        along_y.process(&mut cols);
        transpose(&cols, data, ny, nx);
    }

    /// Forward transform; coefficient `(0, 0)` is the field mean.
    pub fn forward(&self, f: &RealField) -> SpectralField {
        debug_assert_eq!(f.grid, self.grid);
        let mut data: Vec<Complex64> = f.values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.transform_2d(&mut data, self.fwd_x.as_ref(), self.fwd_y.as_ref());
        let scale = 1.0 / self.grid.len() as f64;
        for c in &mut data {
            *c *= scale;
        }
        SpectralField {
            grid: self.grid,
            coeffs: data,
        }
    }

    /// Inverse transform; imaginary round-off is discarded.
    pub fn inverse(&self, c: &SpectralField) -> RealField {
        debug_assert_eq!(c.grid, self.grid);
        let mut data = c.coeffs.clone();
        self.transform_2d(&mut data, self.inv_x.as_ref(), self.inv_y.as_ref());
        RealField {
            grid: self.grid,
            values: data.into_iter().map(|z| z.re).collect(),
        }
    }

    pub fn laplacian(&self, c: &SpectralField) -> SpectralField {
        SpectralField {
            grid: self.grid,
            coeffs: c
                .coeffs
                .iter()
                .zip(&self.ksq)
                .map(|(&z, &k2)| z * -k2)
                .collect(),
        }
    }

    /// Laplacian of a physical-space field.
    pub fn laplacian_real(&self, f: &RealField) -> RealField {
        self.inverse(&self.laplacian(&self.forward(f)))
    }

    /// `∫ f dx` by the periodic trapezoid rule.
    pub fn integrate(&self, f: &RealField) -> f64 {
        f.integral()
    }

    /// `∫ |∇f|^2 dx` via Parseval.
    pub fn grad_sq_integral(&self, f: &RealField) -> f64 {
        self.grad_sq_integral_spectral(&self.forward(f))
    }

    pub fn grad_sq_integral_spectral(&self, c: &SpectralField) -> f64 {
        let s: f64 = c
            .coeffs
            .iter()
            .zip(&self.ksq)
            .map(|(z, &k2)| k2 * z.norm_sqr())
            .sum();
        s * self.grid.area()
    }

    /// `sqrt(∫ f^2 dx)` via Parseval.
    pub fn l2_norm_spectral(&self, c: &SpectralField) -> f64 {
        let s: f64 = c.coeffs.iter().map(|z| z.norm_sqr()).sum();
        (s * self.grid.area()).sqrt()
    }

    /// `sqrt(|Ω| Σ (1 + |k|^2)^2 |ĉ|^2)`.
    pub fn h2_norm(&self, f: &RealField) -> f64 {
        let c = self.forward(f);
        let s: f64 = c
            .coeffs
            .iter()
            .zip(&self.ksq)
            .map(|(z, &k2)| (1.0 + k2).powi(2) * z.norm_sqr())
            .sum();
        (s * self.grid.area()).sqrt()
    }

    /// Zeroes every mode outside the 2/3-rule band.
    pub fn dealias(&self, c: &mut SpectralField) {
        for (z, &keep) in c.coeffs.iter_mut().zip(&self.keep_dealiased) {
            if !keep {
                *z = Complex64::new(0.0, 0.0);
            }
        }
    }
}

fn transpose(src: &[Complex64], dst: &mut [Complex64], row_len: usize, rows: usize) {
    for r in 0..rows {
        for c in 0..row_len {
            dst[c * rows + r] = src[r * row_len + c];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid2() -> GridSpec {
        GridSpec::square(20, 2.0).unwrap()
    }

    #[test]
    fn grid_validation() {
        assert!(GridSpec::new(3, 4, 1.0, 1.0).is_err());
        assert!(GridSpec::new(2, 4, 1.0, 1.0).is_err());
        assert!(GridSpec::new(6, 5, 1.0, 1.0).is_err());
        assert!(GridSpec::new(6, 6, 0.0, 1.0).is_err());
        assert!(GridSpec::new(6, 6, 1.0, -1.0).is_err());
        let g = GridSpec::new(8, 4, 2.0, 1.0).unwrap();
        assert_eq!(g.len(), 32);
        assert_eq!(g.hx(), 0.25);
        assert_eq!(g.index(3, 2), 19);
    }

    #[test]
    fn mode_slots_round_trip() {
        for n in [4usize, 8, 20] {
            for slot in 0..n {
                let m = GridSpec::mode_of_slot(slot, n);
                assert!(m >= -(n as i64) / 2 && m < n as i64 / 2);
                assert_eq!(GridSpec::slot_of_mode(m, n), slot);
            }
        }
    }

    #[test]
    fn constant_transforms_to_mean_only() {
        let g = grid2();
        let sp = Spectral::new(g);
        let c = sp.forward(&RealField::constant(g, 1.7));
        assert!((c.coeff(0, 0).re - 1.7).abs() < 1e-15);
        let others = c.coeffs().iter().skip(1).map(|z| z.norm()).fold(0.0, f64::max);
        assert!(others < 1e-15);
    }

    #[test]
    fn cosine_has_two_half_coefficients() {
        let g = GridSpec::new(16, 8, 3.0, 1.0).unwrap();
        let sp = Spectral::new(g);
        let f = RealField::from_fn(g, |x, _| (2.0 * PI * x / g.lx).cos());
        let c = sp.forward(&f);
        for q in -4..4 {
            for p in -8i64..8 {
                let expected = if q == 0 && p.abs() == 1 { 0.5 } else { 0.0 };
                assert!((c.coeff(p, q) - Complex64::new(expected, 0.0)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn laplacian_of_constant_is_zero() {
        let g = grid2();
        let sp = Spectral::new(g);
        let l = sp.laplacian_real(&RealField::constant(g, 3.0));
        // Transform round-off (~1e-16) is amplified by |k|² up to ~2000 here.
        assert!(l.max_abs() < 1e-11);
    }

    #[test]
    fn laplacian_eigenfunction() {
        let g = grid2();
        let sp = Spectral::new(g);
        let f = RealField::from_fn(g, |x, _| (PI * x).cos());
        let l = sp.laplacian_real(&f);
        let expected = f.scaled(-PI * PI);
        let err = l.zip_map(&expected, |a, b| a - b).max_abs();
        assert!(err < 1e-12, "err = {err}");
    }

    #[test]
    fn integrate_examples() {
        let g = grid2();
        let sp = Spectral::new(g);
        assert!((sp.integrate(&RealField::constant(g, 0.5)) - 2.0).abs() < 1e-14);
        let f = RealField::from_fn(g, |x, y| (PI * x).cos() * (PI * y).cos());
        assert!(sp.integrate(&f).abs() < 1e-13);
        let f = RealField::from_fn(g, |x, _| (PI * x).cos().powi(2));
        assert!((sp.integrate(&f) - 2.0).abs() < 1e-13);
    }

    #[test]
    fn grad_sq_examples() {
        let g = grid2();
        let sp = Spectral::new(g);
        assert!(sp.grad_sq_integral(&RealField::constant(g, -2.0)).abs() < 1e-13);
        let f = RealField::from_fn(g, |x, y| (PI * x).cos() * (PI * y).cos());
        let v = sp.grad_sq_integral(&f);
        assert!((v - 2.0 * PI * PI).abs() < 1e-12, "{v}");
    }

    #[test]
    fn h2_norm_examples() {
        let g = grid2();
        let sp = Spectral::new(g);
        assert_eq!(sp.h2_norm(&RealField::zeros(g)), 0.0);
        assert!((sp.h2_norm(&RealField::constant(g, 1.5)) - 3.0).abs() < 1e-14);
    }

    #[test]
    fn dealias_keeps_low_modes() {
        let g = GridSpec::square(12, 1.0).unwrap();
        let sp = Spectral::new(g);
        let f = RealField::from_fn(g, |x, y| {
            (2.0 * PI * x).cos() + (2.0 * PI * 5.0 * y).sin() + 0.25
        });
        let mut c = sp.forward(&f);
        sp.dealias(&mut c);
        let back = sp.inverse(&c);
        let expected = RealField::from_fn(g, |x, _| (2.0 * PI * x).cos() + 0.25);
        assert!(back.zip_map(&expected, |a, b| a - b).max_abs() < 1e-13);
    }
}
