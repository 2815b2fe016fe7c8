//! Per-step measurements, error norms, convergence-order fitting and
//! invariant checks over recorded histories.

use crate::error::{Error, Result};
use crate::grid::RealField;
use crate::model::Model;
use crate::schemes::SchemeKind;

/// One row of a run's time history. Optional quantities are `None` when the
/// scheme or problem does not define them.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HistoryRecord {
    pub step: usize,
    pub t: f64,
    pub mass: f64,
    /// Shifted energy `E[φ]`.
    pub energy: f64,
    /// Auxiliary variable `R`.
    pub r: Option<f64>,
    pub xi: Option<f64>,
    /// SAV variable `r₁`.
    pub sav_r: Option<f64>,
    pub h2: f64,
    pub dissipation: f64,
    pub linf_err: Option<f64>,
    pub l2_err: Option<f64>,
}

/// `(max |φ - exact|, sqrt(∫ (φ - exact)² dx))`.
pub fn error_norms(phi: &RealField, exact: &RealField) -> (f64, f64) {
    let diff = phi.zip_map(exact, |a, b| a - b);
    let linf = diff.max_abs();
    let l2 = diff.map(|d| d * d).integral().sqrt();
    (linf, l2)
}

/// Accuracy indicator `ξ = R / sqrt(E)`; 1 when `R` tracks `sqrt(E)` exactly.
pub fn xi_indicator(r: f64, energy: f64) -> Result<f64> {
    if !(energy > 0.0) {
        return Err(Error::InvalidState(format!(
            "energy must be positive, got {energy}"
        )));
    }
    Ok(r / energy.sqrt())
}

/// Least-squares slope of `log(error)` against `log(dt)`.
pub fn fit_convergence_order(dts: &[f64], errors: &[f64]) -> Result<f64> {
    if dts.len() != errors.len() {
        return Err(Error::InsufficientData(format!(
            "{} step sizes but {} errors",
            dts.len(),
            errors.len()
        )));
    }
    if dts.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "need at least 3 (dt, error) pairs, got {}",
            dts.len()
        )));
    }
    let positive = |v: &f64| *v > 0.0 && v.is_finite();
    if !dts.iter().all(positive) || !errors.iter().all(positive) {
        return Err(Error::InsufficientData(
            "step sizes and errors must be positive and finite".into(),
        ));
    }
    if dts.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InsufficientData(
            "step sizes must be strictly decreasing".into(),
        ));
    }
    let n = dts.len() as f64;
    let xs: Vec<f64> = dts.iter().map(|d| d.ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    Ok(sxy / sxx)
}

/// Finite-difference check that `μ` is the variational derivative of `E`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VariationalCheck {
    /// `∫ μ[φ] v dx`.
    pub exact: f64,
    /// `|central difference - exact|` at `ε`.
    pub err_coarse: f64,
    /// The same at `ε/2`.
    pub err_fine: f64,
    /// `err_coarse / err_fine`; 4 for a second-order central difference.
    pub ratio: f64,
}

/// Compares `(E[φ + εv] - E[φ - εv]) / (2ε)` with `∫ μ v dx` at `ε` and `ε/2`.
pub fn variational_check(model: &Model, phi: &RealField, v: &RealField, eps: f64) -> Result<VariationalCheck> {
    let exact = model.chemical_potential_exact(phi).zip_map(v, |m, w| m * w).integral();
    let central = |e: f64| -> Result<f64> {
        let plus = model.energy_total(&phi.lin_comb(1.0, v, e))?;
        let minus = model.energy_total(&phi.lin_comb(1.0, v, -e))?;
        Ok((plus - minus) / (2.0 * e))
    };
    let err_coarse = (central(eps)? - exact).abs();
    let err_fine = (central(0.5 * eps)? - exact).abs();
    Ok(VariationalCheck {
        exact,
        err_coarse,
        err_fine,
        ratio: err_coarse / err_fine,
    })
}

/// Relative mass drift allowed per 1000 steps.
pub const MASS_DRIFT_PER_1000_STEPS: f64 = 1e-12;

/// Relative slack in `Rⁿ⁺¹ ≤ Rⁿ`.
pub const R_MONOTONE_SLACK: f64 = 1e-14;

#[derive(Clone, Debug, PartialEq)]
pub struct InvariantCheck {
    pub name: &'static str,
    pub passed: bool,
    /// Step number of the first offending record.
    pub first_violation: Option<usize>,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct InvariantReport {
    pub scheme: SchemeKind,
    pub checks: Vec<InvariantCheck>,
}

impl InvariantReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&InvariantCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

fn first_failure<'a>(
    name: &'static str,
    records: impl Iterator<Item = &'a HistoryRecord>,
    mut bad: impl FnMut(&HistoryRecord) -> Option<String>,
) -> InvariantCheck {
    for rec in records {
        if let Some(detail) = bad(rec) {
            return InvariantCheck {
                name,
                passed: false,
                first_violation: Some(rec.step),
                detail,
            };
        }
    }
    InvariantCheck {
        name,
        passed: true,
        first_violation: None,
        detail: String::new(),
    }
}

/// Checks mass conservation for every scheme and, for the auxiliary-variable
/// schemes, `R > 0`, `Rⁿ⁺¹ ≤ Rⁿ (1 + 1e-14)` and `ξ > 0`.
///
/// Mass drift is measured relative to `max(|mass₀|, 1)` and allowed to grow
/// linearly at [`MASS_DRIFT_PER_1000_STEPS`] per 1000 steps (never less than
/// that amount).
pub fn assert_invariants(history: &[HistoryRecord], scheme: SchemeKind) -> InvariantReport {
    let mut checks = Vec::new();
    let Some(first) = history.first() else {
        checks.push(InvariantCheck {
            name: "non_empty",
            passed: false,
            first_violation: None,
            detail: "history is empty".into(),
        });
        return InvariantReport { scheme, checks };
    };

    let mass0 = first.mass;
    let scale = mass0.abs().max(1.0);
    checks.push(first_failure("mass", history.iter(), |rec| {
        let steps = rec.step.saturating_sub(first.step) as f64;
        let tol = MASS_DRIFT_PER_1000_STEPS * (steps / 1000.0).max(1.0);
        let drift = (rec.mass - mass0).abs() / scale;
        (!(drift <= tol)).then(|| format!("relative drift {drift:e} exceeds {tol:e}"))
    }));

    if scheme.is_gpav() {
        checks.push(first_failure("r_positive", history.iter(), |rec| match rec.r {
            Some(r) if r > 0.0 => None,
            other => Some(format!("R = {other:?}")),
        }));
        let mut prev: Option<f64> = None;
        checks.push(first_failure("r_non_increasing", history.iter(), |rec| {
            let r = rec.r?;
            let out = match prev {
                Some(p) if !(r <= p * (1.0 + R_MONOTONE_SLACK)) => {
                    Some(format!("R rose from {p:e} to {r:e}"))
                }
                _ => None,
            };
            prev = Some(r);
            out
        }));
        checks.push(first_failure("xi_positive", history.iter(), |rec| match rec.xi {
            Some(x) if x > 0.0 => None,
            other => Some(format!("xi = {other:?}")),
        }));
    }
    InvariantReport { scheme, checks }
}
