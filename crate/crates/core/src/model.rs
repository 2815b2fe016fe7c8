//! Free energy, double-well potential and chemical potential of the
//! Cahn–Hilliard model
//!
//! ```text
//! φ_t = m0 Δμ + f,   μ = -β Δφ + λ φ + h(φ),   h(φ) = a (φ³ - φ)
//! E[φ] = ∫ (β/2 |∇φ|² + λ/2 φ² + a/4 (φ² - 1)²) dx + c0
//! ```
//!
//! A single well amplitude `a` covers both the unit-coefficient form
//! (`β = a = 1`) and the applied form with interfacial thickness `η`
//! (`a = β / η²`). Along solutions, `dE/dt = -m0 ∫ |∇μ|² dx`.

use crate::error::{Error, Result};
use crate::grid::{GridSpec, RealField, Spectral, SpectralField};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhysicalParams {
    /// Mobility.
    pub m0: f64,
    /// Mixing-energy coefficient.
    pub beta: f64,
    pub lambda: f64,
    /// Double-well amplitude `a`; zero gives the linear (biharmonic) regime.
    pub well_amp: f64,
    /// Interfacial thickness; only used to derive `a` and initial profiles.
    pub eta: f64,
    /// Energy shift keeping `E` positive.
    pub c0: f64,
}

impl PhysicalParams {
    pub fn new(m0: f64, beta: f64, lambda: f64, well_amp: f64, eta: f64, c0: f64) -> Result<Self> {
        let p = PhysicalParams {
            m0,
            beta,
            lambda,
            well_amp,
            eta,
            c0,
        };
        p.validate()?;
        Ok(p)
    }

    /// Applied form: `a = β / η²`, `λ = 0`.
    pub fn applied(m0: f64, beta: f64, eta: f64, c0: f64) -> Result<Self> {
        Self::new(m0, beta, 0.0, beta / (eta * eta), eta, c0)
    }

    /// Applied form with `β` derived from the surface tension `σ`.
    pub fn from_surface_tension(m0: f64, sigma: f64, eta: f64, c0: f64) -> Result<Self> {
        Self::applied(m0, sigma_to_beta(sigma, eta), eta, c0)
    }

    /// Unit-coefficient form `m0 = β = a = 1`.
    pub fn unit(lambda: f64, c0: f64) -> Result<Self> {
        Self::new(1.0, 1.0, lambda, 1.0, 1.0, c0)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.m0, self.beta, self.lambda, self.well_amp, self.eta, self.c0]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidParams("all parameters must be finite".into()));
        }
        if self.m0 <= 0.0 {
            return Err(Error::InvalidParams(format!("m0 must be positive, got {}", self.m0)));
        }
        if self.beta <= 0.0 {
            return Err(Error::InvalidParams(format!("beta must be positive, got {}", self.beta)));
        }
        if self.lambda < 0.0 {
            return Err(Error::InvalidParams(format!("lambda must be >= 0, got {}", self.lambda)));
        }
        if self.well_amp < 0.0 {
            return Err(Error::InvalidParams(format!(
                "well_amp must be >= 0, got {}",
                self.well_amp
            )));
        }
        if self.eta <= 0.0 {
            return Err(Error::InvalidParams(format!("eta must be positive, got {}", self.eta)));
        }
        Ok(())
    }
}

/// `β = 3/(2√2) σ η`.
pub fn sigma_to_beta(sigma: f64, eta: f64) -> f64 {
    3.0 / (2.0 * std::f64::consts::SQRT_2) * sigma * eta
}

/// Double-well density `H(φ) = a/4 (φ² - 1)²`.
#[inline]
pub fn well_density(phi: f64, a: f64) -> f64 {
    let d = phi * phi - 1.0;
    0.25 * a * d * d
}

/// `h(φ) = H'(φ) = a (φ³ - φ)`.
#[inline]
pub fn well_derivative(phi: f64, a: f64) -> f64 {
    a * phi * (phi * phi - 1.0)
}

/// Model functionals bound to one grid and parameter set.
#[derive(Clone, Debug)]
pub struct Model {
    spectral: Spectral,
    params: PhysicalParams,
}

impl Model {
    pub fn new(grid: GridSpec, params: PhysicalParams) -> Result<Self> {
        params.validate()?;
        Ok(Model {
            spectral: Spectral::new(grid),
            params,
        })
    }

    pub fn with_spectral(spectral: Spectral, params: PhysicalParams) -> Result<Self> {
        params.validate()?;
        Ok(Model { spectral, params })
    }

    pub fn spectral(&self) -> &Spectral {
        &self.spectral
    }

    pub fn params(&self) -> &PhysicalParams {
        &self.params
    }

    pub fn grid(&self) -> &GridSpec {
        self.spectral.grid()
    }

    pub fn potential_h(&self, phi: &RealField) -> RealField {
        let a = self.params.well_amp;
        phi.map(|v| well_derivative(v, a))
    }

    /// `∫ H(φ) dx` without the shift.
    pub fn potential_energy(&self, phi: &RealField) -> f64 {
        let a = self.params.well_amp;
        phi.map(|v| well_density(v, a)).integral()
    }

    /// Shifted total energy `E[φ]`; fails if it is not strictly positive.
    pub fn energy_total(&self, phi: &RealField) -> Result<f64> {
        let coeffs = self.spectral.forward(phi);
        self.energy_with_coeffs(phi, &coeffs)
    }

    /// As [`Model::energy_total`] with the Fourier coefficients of `φ` supplied.
    pub fn energy_with_coeffs(&self, phi: &RealField, coeffs: &SpectralField) -> Result<f64> {
        let p = &self.params;
        let grad = self.spectral.grad_sq_integral_spectral(coeffs);
        let mut e = 0.5 * p.beta * grad + self.potential_energy(phi) + p.c0;
        if p.lambda != 0.0 {
            let l2 = self.spectral.l2_norm_spectral(coeffs);
            e += 0.5 * p.lambda * l2 * l2;
        }
        if e > 0.0 {
            Ok(e)
        } else {
            Err(Error::NonPositiveEnergy { energy: e })
        }
    }

    /// `m0 ∫ |∇μ|² dx`.
    pub fn dissipation(&self, mu: &RealField) -> f64 {
        self.params.m0 * self.spectral.grad_sq_integral(mu)
    }

    /// `μ = -β Δφ + λ φ + h(φ)`.
    pub fn chemical_potential_exact(&self, phi: &RealField) -> RealField {
        let p = &self.params;
        let lap = self.spectral.laplacian_real(phi);
        let h = self.potential_h(phi);
        let mut mu = lap.scaled(-p.beta);
        for ((m, &f), &hv) in mu.values_mut().iter_mut().zip(phi.values()).zip(h.values()) {
            *m += p.lambda * f + hv;
        }
        mu
    }
}
