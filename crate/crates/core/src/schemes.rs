//! Time integrators for the Cahn–Hilliard model.
//!
//! The four auxiliary-variable schemes evolve a scalar `R ≈ sqrt(E)` next to
//! the field and scale the explicit nonlinear term by `ξ² = R²/E`. Every
//! scheme reduces to one constant-coefficient solve per step
//! ([`Stepper::solve_linear_step`]), and the `ξ`/`R` updates are closed-form,
//! which keeps `R` positive and non-increasing for any step size.
//!
//! | scheme | field solve | `ξ` used in the solve | `R` update |
//! |--------|-------------|-----------------------|------------|
//! | 1A | BDF1 | `ξⁿ⁺¹` from `φⁿ`, `μⁿ` (computed first) | `ξⁿ⁺¹ √E[φⁿ]` |
//! | 1B | BDF1 | lagged `ξⁿ` | `ξⁿ⁺¹ √E[φⁿ⁺¹]` (after the solve) |
//! | 2A | BDF2 | `ξⁿ⁺¹` from extrapolants (computed first) | `ξⁿ⁺¹ √E[φ̄ⁿ]` |
//! | 2B | BDF2 | `(2Rⁿ - Rⁿ⁻¹)/√E[φ̄ⁿ]` | `ξⁿ⁺¹ √E[φⁿ⁺¹]` (after the solve) |
//!
//! Two baselines share the solver: a BDF2 semi-implicit scheme with the
//! nonlinear term extrapolated, and the BDF2 scalar auxiliary variable (SAV)
//! scheme built on `r₁ = sqrt(∫H + c0)`, which needs two solves per step.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{RealField, SpectralField};
use crate::model::{Model, PhysicalParams};

/// Fields with `max |φ|` above this are treated as blown up.
pub const OVERFLOW_GUARD: f64 = 1e6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SchemeKind {
    Gpav1A,
    Gpav1B,
    Gpav2A,
    Gpav2B,
    SemiImplicit,
    Sav,
}

impl SchemeKind {
    pub const ALL: [SchemeKind; 6] = [
        SchemeKind::Gpav1A,
        SchemeKind::Gpav1B,
        SchemeKind::Gpav2A,
        SchemeKind::Gpav2B,
        SchemeKind::SemiImplicit,
        SchemeKind::Sav,
    ];

    pub const GPAV: [SchemeKind; 4] = [
        SchemeKind::Gpav1A,
        SchemeKind::Gpav1B,
        SchemeKind::Gpav2A,
        SchemeKind::Gpav2B,
    ];

    pub fn label(self) -> &'static str {
        match self {
            SchemeKind::Gpav1A => "1a",
            SchemeKind::Gpav1B => "1b",
            SchemeKind::Gpav2A => "2a",
            SchemeKind::Gpav2B => "2b",
            SchemeKind::SemiImplicit => "semi",
            SchemeKind::Sav => "sav",
        }
    }

    pub fn is_gpav(self) -> bool {
        !self.is_baseline()
    }

    pub fn is_baseline(self) -> bool {
        matches!(self, SchemeKind::SemiImplicit | SchemeKind::Sav)
    }

    /// Formal temporal order of accuracy.
    pub fn order(self) -> u32 {
        match self {
            SchemeKind::Gpav1A | SchemeKind::Gpav1B => 1,
            _ => 2,
        }
    }
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for SchemeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "1a" => Ok(SchemeKind::Gpav1A),
            "1b" => Ok(SchemeKind::Gpav1B),
            "2a" => Ok(SchemeKind::Gpav2A),
            "2b" => Ok(SchemeKind::Gpav2B),
            "semi" | "semi-implicit" => Ok(SchemeKind::SemiImplicit),
            "sav" => Ok(SchemeKind::Sav),
            other => Err(Error::validation(
                "scheme",
                format!("unknown scheme {other:?} (expected 1a, 1b, 2a, 2b, semi or sav)"),
            )),
        }
    }
}

/// Two time levels of `(φ, μ, R)` plus scheme-specific scalars.
#[derive(Clone, Debug)]
pub struct SchemeState {
    pub phi_cur: RealField,
    pub phi_prev: RealField,
    pub mu_cur: RealField,
    pub mu_prev: RealField,
    pub r_cur: f64,
    pub r_prev: f64,
    /// Latest `ξ`; the lagged value Scheme 1B feeds into its field solve.
    pub xi: f64,
    /// SAV auxiliary variable `r₁ⁿ` and its previous level.
    pub sav_r: f64,
    pub sav_r_prev: f64,
    pub step: usize,
}

/// Diagnostics produced by one step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepReport {
    /// `ξⁿ⁺¹` (auxiliary-variable schemes only).
    pub xi: Option<f64>,
    /// Upper bound `Rⁿ / sqrt(E[·])` for `ξⁿ⁺¹`, with the scheme's leading
    /// denominator field.
    pub xi_bound: Option<f64>,
    /// Explicit factor `(2Rⁿ - Rⁿ⁻¹)/sqrt(E[φ̄ⁿ])` used by Scheme 2B.
    pub xi_hat: Option<f64>,
    /// `Rⁿ⁺¹` (auxiliary-variable schemes only).
    pub r_new: Option<f64>,
    /// `r₁ⁿ⁺¹` (SAV only).
    pub sav_r: Option<f64>,
    /// `E[φⁿ⁺¹]`.
    pub energy: f64,
    /// `m0 ∫ |∇μⁿ⁺¹|² dx`.
    pub dissipation: f64,
    pub dt: f64,
}

/// `Rⁿ / (sqrt(E_lead) + dt·D / (2 sqrt(E_diss)))`: the closed-form `ξ`
/// shared by all four auxiliary-variable schemes.
pub fn xi_update(r_n: f64, e_lead: f64, e_diss: f64, diss: f64, dt: f64) -> Result<f64> {
    xi_update_forced(r_n, e_lead, e_diss, diss, 0.0, dt)
}

/// [`xi_update`] for a forced equation, where the energy also changes by the
/// source power `S = ∫ f μ dx`. The gain `S⁺` enters the numerator and the
/// loss `S⁻` the denominator, so `ξ` stays positive for any data:
///
/// ```text
/// ξ = (Rⁿ + dt S⁺ / (2 sqrt(E_diss))) / (sqrt(E_lead) + dt (D + S⁻) / (2 sqrt(E_diss)))
/// ```
pub fn xi_update_forced(
    r_n: f64,
    e_lead: f64,
    e_diss: f64,
    diss: f64,
    source_power: f64,
    dt: f64,
) -> Result<f64> {
    if !(e_lead > 0.0) || !(e_diss > 0.0) {
        return Err(Error::InvalidState(format!(
            "energies must be positive, got {e_lead} and {e_diss}"
        )));
    }
    if !(r_n > 0.0) {
        return Err(Error::InvalidState(format!("R must be positive, got {r_n}")));
    }
    if !(diss >= 0.0) || !(dt > 0.0) || !source_power.is_finite() {
        return Err(Error::InvalidState(format!(
            "need dissipation >= 0, dt > 0 and a finite source power, got {diss}, {dt} and {source_power}"
        )));
    }
    let w = dt / (2.0 * e_diss.sqrt());
    let gain = source_power.max(0.0);
    let loss = (-source_power).max(0.0);
    Ok((r_n + w * gain) / (e_lead.sqrt() + w * (diss + loss)))
}

/// `ξ` for Scheme 1A: `Rⁿ / (sqrt(Eⁿ) + dt·Dⁿ / (2 sqrt(Eⁿ)))`.
pub fn compute_xi_1a(r_n: f64, e_n: f64, diss_n: f64, dt: f64) -> Result<f64> {
    xi_update(r_n, e_n, e_n, diss_n, dt)
}

/// Source term `f` of a forced equation at both ends of a step.
///
/// The field solve uses `new`; the energy balance of the auxiliary variable
/// uses whichever level matches the scheme's time centring.
#[derive(Clone, Copy, Debug)]
pub struct Forcing<'a> {
    pub old: &'a RealField,
    pub new: &'a RealField,
}

/// One-step integrator for a fixed model and scheme.
#[derive(Clone, Debug)]
pub struct Stepper {
    model: Model,
    kind: SchemeKind,
    dealias: bool,
    bdf1_start: bool,
}

struct Solved {
    phi: RealField,
    mu: RealField,
    phi_hat: SpectralField,
    mu_hat: SpectralField,
}

impl Stepper {
    pub fn new(model: Model, kind: SchemeKind) -> Self {
        Stepper {
            model,
            kind,
            dealias: false,
            bdf1_start: true,
        }
    }

    /// Enables 2/3-rule truncation of the explicit nonlinear term.
    pub fn with_dealias(mut self, dealias: bool) -> Self {
        self.dealias = dealias;
        self
    }

    /// Chooses how the BDF2 schemes take their first step. With `true` (the
    /// default) step 0 uses the BDF1 field solve, which keeps the global error
    /// second order. With `false` it uses BDF2 with `φ⁻¹ = φ⁰`, whose
    /// start-up error is `O(dt)` whenever `φ_t(t0) ≠ 0`.
    pub fn with_bdf1_start(mut self, bdf1_start: bool) -> Self {
        self.bdf1_start = bdf1_start;
        self
    }

    pub fn model(&self) -> &Model {
        &self.model
    }

    pub fn kind(&self) -> SchemeKind {
        self.kind
    }

    fn params(&self) -> &PhysicalParams {
        self.model.params()
    }

    /// Whether the step out of `state` uses BDF2 (as opposed to the BDF1 start-up).
    pub fn uses_bdf2(&self, state: &SchemeState) -> bool {
        self.kind.order() == 2 && !(self.bdf1_start && state.step == 0)
    }

    /// Initial state: `μ⁰` from the exact chemical potential, `R⁰ = sqrt(E[φ⁰])`,
    /// `r₁⁰ = sqrt(∫H(φ⁰) + c0)`, previous levels copied from the current one.
    pub fn init_state(&self, phi0: &RealField) -> Result<SchemeState> {
        if !phi0.is_finite() {
            return Err(Error::InvalidState("initial field is not finite".into()));
        }
        let e0 = self.model.energy_total(phi0)?;
        let sav_arg = self.model.potential_energy(phi0) + self.params().c0;
        if !(sav_arg > 0.0) {
            return Err(Error::NonPositiveEnergy { energy: sav_arg });
        }
        let mu0 = self.model.chemical_potential_exact(phi0);
        let r0 = e0.sqrt();
        let sav_r = sav_arg.sqrt();
        Ok(SchemeState {
            phi_cur: phi0.clone(),
            phi_prev: phi0.clone(),
            mu_cur: mu0.clone(),
            mu_prev: mu0,
            r_cur: r0,
            r_prev: r0,
            xi: 1.0,
            sav_r,
            sav_r_prev: sav_r,
            step: 0,
        })
    }

    /// Advances `state` by `dt` with the configured scheme.
    pub fn step(
        &self,
        state: &SchemeState,
        dt: f64,
        forcing: Option<Forcing<'_>>,
    ) -> Result<(SchemeState, StepReport)> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidState(format!("dt must be positive, got {dt}")));
        }
        match self.kind {
            SchemeKind::Gpav1A => self.step_1a(state, dt, forcing),
            SchemeKind::Gpav1B => self.step_1b(state, dt, forcing),
            SchemeKind::Gpav2A => self.step_2a(state, dt, forcing),
            SchemeKind::Gpav2B => self.step_2b(state, dt, forcing),
            SchemeKind::SemiImplicit => self.step_semi_implicit2(state, dt, forcing),
            SchemeKind::Sav => self.step_sav2(state, dt, forcing),
        }
    }

    /// Solves `(σ/dt) φ = m0 Δ(-βΔφ + λφ + s) + g/dt` mode by mode:
    ///
    /// ```text
    /// φ̂ = (ĝ - dt m0 |k|² ŝ) / (σ + dt m0 |k|² (β|k|² + λ)),   μ̂ = (β|k|² + λ) φ̂ + ŝ
    /// ```
    pub fn solve_linear_step(
        &self,
        sigma: f64,
        g: &RealField,
        s: &RealField,
        dt: f64,
    ) -> (RealField, RealField) {
        let sp = self.model.spectral();
        let (phi_hat, mu_hat) = self.solve_linear_spectral(sigma, &sp.forward(g), &sp.forward(s), dt);
        (sp.inverse(&phi_hat), sp.inverse(&mu_hat))
    }

    /// Spectral-space form of [`Stepper::solve_linear_step`].
    pub fn solve_linear_spectral(
        &self,
        sigma: f64,
        g_hat: &SpectralField,
        s_hat: &SpectralField,
        dt: f64,
    ) -> (SpectralField, SpectralField) {
        let p = self.params();
        let grid = *self.model.grid();
        let mut phi_hat = SpectralField::zeros(grid);
        let mut mu_hat = SpectralField::zeros(grid);
        let ksq = self.model.spectral().ksq();
        for (idx, &k2) in ksq.iter().enumerate() {
            let stiff = p.beta * k2 + p.lambda;
            let g = g_hat.coeffs()[idx];
            let s = s_hat.coeffs()[idx];
            let phi = (g - s * (dt * p.m0 * k2)) / (sigma + dt * p.m0 * k2 * stiff);
            phi_hat.coeffs_mut()[idx] = phi;
            mu_hat.coeffs_mut()[idx] = phi * stiff + s;
        }
        (phi_hat, mu_hat)
    }

    fn nonlinear_hat(&self, phi: &RealField, scale: f64) -> SpectralField {
        let sp = self.model.spectral();
        let mut h_hat = sp.forward(&self.model.potential_h(phi));
        if self.dealias {
            sp.dealias(&mut h_hat);
        }
        if scale != 1.0 {
            h_hat = h_hat.scaled(scale);
        }
        h_hat
    }

    /// History part of the time derivative: `(σ, φⁿ)` for BDF1 and
    /// `(3/2, 2φⁿ - φⁿ⁻¹/2)` for BDF2.
    fn history(&self, state: &SchemeState) -> (f64, RealField) {
        if self.uses_bdf2(state) {
            (1.5, state.phi_cur.lin_comb(2.0, &state.phi_prev, -0.5))
        } else {
            (1.0, state.phi_cur.clone())
        }
    }

    /// Returns `σ` and the right-hand side `ĝ = history + dt f`.
    fn rhs_hat(&self, state: &SchemeState, dt: f64, forcing: Option<Forcing<'_>>) -> (f64, SpectralField) {
        let (sigma, base) = self.history(state);
        let base = match forcing {
            Some(f) => base.lin_comb(1.0, f.new, dt),
            None => base,
        };
        (sigma, self.model.spectral().forward(&base))
    }

    fn finish_solve(&self, phi_hat: SpectralField, mu_hat: SpectralField, step: usize) -> Result<Solved> {
        let sp = self.model.spectral();
        let phi = sp.inverse(&phi_hat);
        let mu = sp.inverse(&mu_hat);
        let max_abs = phi.max_abs();
        if !(max_abs <= OVERFLOW_GUARD) || !mu.is_finite() {
            return Err(Error::Diverged { step, max_abs });
        }
        Ok(Solved {
            phi,
            mu,
            phi_hat,
            mu_hat,
        })
    }

    fn energy_of(&self, solved: &Solved) -> Result<f64> {
        self.model.energy_with_coeffs(&solved.phi, &solved.phi_hat)
    }

    fn dissipation_of(&self, solved: &Solved) -> f64 {
        self.params().m0 * self.model.spectral().grad_sq_integral_spectral(&solved.mu_hat)
    }

    fn advance(state: &SchemeState, solved: Solved, r_new: f64, xi: f64) -> SchemeState {
        SchemeState {
            phi_prev: state.phi_cur.clone(),
            mu_prev: state.mu_cur.clone(),
            phi_cur: solved.phi,
            mu_cur: solved.mu,
            r_prev: state.r_cur,
            r_cur: r_new,
            xi,
            sav_r: state.sav_r,
            sav_r_prev: state.sav_r_prev,
            step: state.step + 1,
        }
    }

    /// `φ̄ⁿ = 2φⁿ - φⁿ⁻¹`, or `φⁿ` on a BDF1 start-up step.
    fn extrapolated(&self, state: &SchemeState) -> RealField {
        if self.uses_bdf2(state) {
            state.phi_cur.lin_comb(2.0, &state.phi_prev, -1.0)
        } else {
            state.phi_cur.clone()
        }
    }

    fn half_extrapolated(a_cur: &RealField, a_prev: &RealField) -> RealField {
        a_cur.lin_comb(1.5, a_prev, -0.5)
    }

    /// `∫ f μ dx` with `f = (1 - w) f_old + w f_new`.
    fn source_power(forcing: Option<Forcing<'_>>, w_new: f64, mu: &RealField) -> f64 {
        let Some(f) = forcing else { return 0.0 };
        f.old
            .zip_map(f.new, |a, b| (1.0 - w_new) * a + w_new * b)
            .zip_map(mu, |fv, m| fv * m)
            .integral()
    }

    /// Scheme 1A: `ξ` and `R` first, then one BDF1 solve with `s = ξ² h(φⁿ)`.
    pub fn step_1a(
        &self,
        state: &SchemeState,
        dt: f64,
        forcing: Option<Forcing<'_>>,
    ) -> Result<(SchemeState, StepReport)> {
        let e_n = self.model.energy_total(&state.phi_cur)?;
        let diss_n = self.model.dissipation(&state.mu_cur);
        let power = Self::source_power(forcing, 0.0, &state.mu_cur);
        let xi = xi_update_forced(state.r_cur, e_n, e_n, diss_n, power, dt)?;
        let r_new = xi * e_n.sqrt();

        let s_hat = self.nonlinear_hat(&state.phi_cur, xi * xi);
        let (sigma, g_hat) = self.rhs_hat(state, dt, forcing);
        let (phi_hat, mu_hat) = self.solve_linear_spectral(sigma, &g_hat, &s_hat, dt);
        let solved = self.finish_solve(phi_hat, mu_hat, state.step + 1)?;

        let report = StepReport {
            xi: Some(xi),
            xi_bound: Some(xi_update_forced(state.r_cur, e_n, e_n, 0.0, power, dt)?),
            xi_hat: None,
            r_new: Some(r_new),
            sav_r: None,
            energy: self.energy_of(&solved)?,
            dissipation: self.dissipation_of(&solved),
            dt,
        };
        Ok((Self::advance(state, solved, r_new, xi), report))
    }

    /// Scheme 1B: BDF1 solve with the lagged `ξⁿ`, then `ξⁿ⁺¹` and `R` from the
    /// new field.
    pub fn step_1b(
        &self,
        state: &SchemeState,
        dt: f64,
        forcing: Option<Forcing<'_>>,
    ) -> Result<(SchemeState, StepReport)> {
        let xi_lag = state.xi;
        let s_hat = self.nonlinear_hat(&state.phi_cur, xi_lag * xi_lag);
        let (sigma, g_hat) = self.rhs_hat(state, dt, forcing);
        let (phi_hat, mu_hat) = self.solve_linear_spectral(sigma, &g_hat, &s_hat, dt);
        let solved = self.finish_solve(phi_hat, mu_hat, state.step + 1)?;

        let e_new = self.energy_of(&solved)?;
        let diss_new = self.dissipation_of(&solved);
        let power = Self::source_power(forcing, 1.0, &solved.mu);
        let xi = xi_update_forced(state.r_cur, e_new, e_new, diss_new, power, dt)?;
        let r_new = xi * e_new.sqrt();

        let report = StepReport {
            xi: Some(xi),
            xi_bound: Some(xi_update_forced(state.r_cur, e_new, e_new, 0.0, power, dt)?),
            xi_hat: None,
            r_new: Some(r_new),
            sav_r: None,
            energy: e_new,
            dissipation: diss_new,
            dt,
        };
        Ok((Self::advance(state, solved, r_new, xi), report))
    }

    /// Scheme 2A: `ξ` from the extrapolants `φ̄ⁿ`, `φ̃ⁿ⁺¹ᐟ²`, `μ̃ⁿ⁺¹ᐟ²`, then
    /// one BDF2 solve with `s = ξ² h(φ̄ⁿ)`.
    pub fn step_2a(
        &self,
        state: &SchemeState,
        dt: f64,
        forcing: Option<Forcing<'_>>,
    ) -> Result<(SchemeState, StepReport)> {
        let phi_bar = self.extrapolated(state);
        let phi_tilde = Self::half_extrapolated(&state.phi_cur, &state.phi_prev);
        let mu_tilde = Self::half_extrapolated(&state.mu_cur, &state.mu_prev);

        let e_bar = self.model.energy_total(&phi_bar)?;
        let e_tilde = self.model.energy_total(&phi_tilde)?;
        let diss_tilde = self.model.dissipation(&mu_tilde);
        let power = Self::source_power(forcing, 0.5, &mu_tilde);
        let xi = xi_update_forced(state.r_cur, e_bar, e_tilde, diss_tilde, power, dt)?;
        let r_new = xi * e_bar.sqrt();

        let s_hat = self.nonlinear_hat(&phi_bar, xi * xi);
        let (sigma, g_hat) = self.rhs_hat(state, dt, forcing);
        let (phi_hat, mu_hat) = self.solve_linear_spectral(sigma, &g_hat, &s_hat, dt);
        let solved = self.finish_solve(phi_hat, mu_hat, state.step + 1)?;

        let report = StepReport {
            xi: Some(xi),
            xi_bound: Some(xi_update_forced(state.r_cur, e_bar, e_tilde, 0.0, power, dt)?),
            xi_hat: None,
            r_new: Some(r_new),
            sav_r: None,
            energy: self.energy_of(&solved)?,
            dissipation: self.dissipation_of(&solved),
            dt,
        };
        Ok((Self::advance(state, solved, r_new, xi), report))
    }

    /// Scheme 2B: BDF2 solve with the explicit `ξ̂ⁿ = (2Rⁿ - Rⁿ⁻¹)/sqrt(E[φ̄ⁿ])`,
    /// then `ξⁿ⁺¹` from `φⁿ⁺¹` and `μⁿ⁺¹ᐟ² = (μⁿ⁺¹ + μⁿ)/2`.
    pub fn step_2b(
        &self,
        state: &SchemeState,
        dt: f64,
        forcing: Option<Forcing<'_>>,
    ) -> Result<(SchemeState, StepReport)> {
        let phi_bar = self.extrapolated(state);
        let phi_tilde = Self::half_extrapolated(&state.phi_cur, &state.phi_prev);
        let e_bar = self.model.energy_total(&phi_bar)?;
        let e_tilde = self.model.energy_total(&phi_tilde)?;
        let r_extrap = if self.uses_bdf2(state) {
            2.0 * state.r_cur - state.r_prev
        } else {
            state.r_cur
        };
        let xi_hat = r_extrap / e_bar.sqrt();

        let s_hat = self.nonlinear_hat(&phi_bar, xi_hat * xi_hat);
        let (sigma, g_hat) = self.rhs_hat(state, dt, forcing);
        let (phi_hat, mu_hat) = self.solve_linear_spectral(sigma, &g_hat, &s_hat, dt);
        let solved = self.finish_solve(phi_hat, mu_hat, state.step + 1)?;

        let e_new = self.energy_of(&solved)?;
        let mu_half = solved.mu.lin_comb(0.5, &state.mu_cur, 0.5);
        let diss_half = self.model.dissipation(&mu_half);
        let power = Self::source_power(forcing, 0.5, &mu_half);
        let xi = xi_update_forced(state.r_cur, e_new, e_tilde, diss_half, power, dt)?;
        let r_new = xi * e_new.sqrt();

        let report = StepReport {
            xi: Some(xi),
            xi_bound: Some(xi_update_forced(state.r_cur, e_new, e_tilde, 0.0, power, dt)?),
            xi_hat: Some(xi_hat),
            r_new: Some(r_new),
            sav_r: None,
            energy: e_new,
            dissipation: self.dissipation_of(&solved),
            dt,
        };
        Ok((Self::advance(state, solved, r_new, xi), report))
    }

    /// Semi-implicit BDF2 baseline: `s = h(φ̄ⁿ)`, no auxiliary variable and no
    /// stabilization. May blow up; reports [`Error::Diverged`] when it does.
    pub fn step_semi_implicit2(
        &self,
        state: &SchemeState,
        dt: f64,
        forcing: Option<Forcing<'_>>,
    ) -> Result<(SchemeState, StepReport)> {
        let phi_bar = self.extrapolated(state);
        let s_hat = self.nonlinear_hat(&phi_bar, 1.0);
        let (sigma, g_hat) = self.rhs_hat(state, dt, forcing);
        let (phi_hat, mu_hat) = self.solve_linear_spectral(sigma, &g_hat, &s_hat, dt);
        let solved = self.finish_solve(phi_hat, mu_hat, state.step + 1)?;

        let report = StepReport {
            xi: None,
            xi_bound: None,
            xi_hat: None,
            r_new: None,
            sav_r: None,
            energy: self.energy_of(&solved)?,
            dissipation: self.dissipation_of(&solved),
            dt,
        };
        let (r, xi) = (state.r_cur, state.xi);
        Ok((Self::advance(state, solved, r, xi), report))
    }

    /// SAV-BDF2 baseline:
    ///
    /// ```text
    /// (3φⁿ⁺¹ - 4φⁿ + φⁿ⁻¹)/(2dt) = m0 Δμⁿ⁺¹ + f
    /// μⁿ⁺¹ = -βΔφⁿ⁺¹ + λφⁿ⁺¹ + r₁ⁿ⁺¹ b,       b = h(φ̄ⁿ) / sqrt(∫H(φ̄ⁿ) + c0)
    /// 3r₁ⁿ⁺¹ - 4r₁ⁿ + r₁ⁿ⁻¹ = ½ ∫ b (3φⁿ⁺¹ - 4φⁿ + φⁿ⁻¹) dx
    /// ```
    ///
    /// resolved by superposition `φⁿ⁺¹ = φ₁ + r₁ⁿ⁺¹ φ₂` (two solves). `r₁` has
    /// no sign guarantee. The BDF1 start-up step uses the analogous
    /// first-order relations.
    pub fn step_sav2(
        &self,
        state: &SchemeState,
        dt: f64,
        forcing: Option<Forcing<'_>>,
    ) -> Result<(SchemeState, StepReport)> {
        let sp = self.model.spectral();
        let grid = *self.model.grid();
        let phi_bar = self.extrapolated(state);
        let e1 = self.model.potential_energy(&phi_bar) + self.params().c0;
        if !(e1 > 0.0) {
            return Err(Error::NonPositiveEnergy { energy: e1 });
        }
        let b_hat = self.nonlinear_hat(&phi_bar, 1.0 / e1.sqrt());
        let (sigma, g_hat) = self.rhs_hat(state, dt, forcing);
        let zero = SpectralField::zeros(grid);
        let (phi1_hat, mu1_hat) = self.solve_linear_spectral(sigma, &g_hat, &zero, dt);
        let (phi2_hat, mu2_hat) = self.solve_linear_spectral(sigma, &zero, &b_hat, dt);

        // σ r - g_r = ½ ∫ b (σ φ - g_φ) with φ = φ₁ + r φ₂.
        let (_, hist) = self.history(state);
        let hist_hat = sp.forward(&hist);
        let g_r = if self.uses_bdf2(state) {
            2.0 * state.sav_r - 0.5 * state.sav_r_prev
        } else {
            state.sav_r
        };
        let area = grid.area();
        let inner = |a: &SpectralField, b: &SpectralField| -> f64 {
            area * a
                .coeffs()
                .iter()
                .zip(b.coeffs())
                .map(|(x, y)| (x * y.conj()).re)
                .sum::<f64>()
        };
        let b_phi2 = inner(&b_hat, &phi2_hat);
        let b_rest = inner(&b_hat, &phi1_hat.lin_comb(sigma, &hist_hat, -1.0));
        let r_new = (g_r + 0.5 * b_rest) / (sigma * (1.0 - 0.5 * b_phi2));

        let phi_hat = combine(&phi1_hat, &phi2_hat, r_new);
        let mu_hat = combine(&mu1_hat, &mu2_hat, r_new);
        let solved = self.finish_solve(phi_hat, mu_hat, state.step + 1)?;
        if !r_new.is_finite() {
            return Err(Error::Diverged {
                step: state.step + 1,
                max_abs: solved.phi.max_abs(),
            });
        }

        let report = StepReport {
            xi: None,
            xi_bound: None,
            xi_hat: None,
            r_new: None,
            sav_r: Some(r_new),
            energy: self.energy_of(&solved)?,
            dissipation: self.dissipation_of(&solved),
            dt,
        };
        let mut next = Self::advance(state, solved, state.r_cur, state.xi);
        next.sav_r_prev = state.sav_r;
        next.sav_r = r_new;
        Ok((next, report))
    }

    /// `β/2 ‖∇φ‖² + λ/2 ‖φ‖² + r₁² - c0` at the current level.
    pub fn sav_energy(&self, state: &SchemeState) -> f64 {
        let p = self.params();
        let sp = self.model.spectral();
        let c = sp.forward(&state.phi_cur);
        let l2 = sp.l2_norm_spectral(&c);
        0.5 * p.beta * sp.grad_sq_integral_spectral(&c) + 0.5 * p.lambda * l2 * l2
            + state.sav_r * state.sav_r
            - p.c0
    }

    /// Two-level modified energy of SAV-BDF2, non-increasing along unforced
    /// BDF2 steps by construction:
    ///
    /// ```text
    /// ¼ (β‖∇φⁿ‖² + β‖∇(2φⁿ - φⁿ⁻¹)‖² + λ‖φⁿ‖² + λ‖2φⁿ - φⁿ⁻¹‖²)
    ///   + ½ ((r₁ⁿ)² + (2r₁ⁿ - r₁ⁿ⁻¹)²) - c0
    /// ```
    ///
    /// Equals [`Stepper::sav_energy`] whenever the two levels coincide.
    pub fn sav_bdf2_energy(&self, state: &SchemeState) -> f64 {
        let p = self.params();
        let sp = self.model.spectral();
        let c_cur = sp.forward(&state.phi_cur);
        let c_ext = sp.forward(&state.phi_cur.lin_comb(2.0, &state.phi_prev, -1.0));
        let grad = sp.grad_sq_integral_spectral(&c_cur) + sp.grad_sq_integral_spectral(&c_ext);
        let l2 = sp.l2_norm_spectral(&c_cur).powi(2) + sp.l2_norm_spectral(&c_ext).powi(2);
        let r_ext = 2.0 * state.sav_r - state.sav_r_prev;
        0.25 * (p.beta * grad + p.lambda * l2) + 0.5 * (state.sav_r.powi(2) + r_ext * r_ext) - p.c0
    }
}

fn combine(a: &SpectralField, b: &SpectralField, scale: f64) -> SpectralField {
    let mut out = a.clone();
    for (o, &bv) in out.coeffs_mut().iter_mut().zip(b.coeffs()) {
        *o += bv * Complex64::new(scale, 0.0);
    }
    out
}
