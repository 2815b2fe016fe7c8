//! Problem library: the manufactured-solution convergence case and the
//! periodic drop-array coalescence benchmark.

use std::f64::consts::{PI, SQRT_2};

use crate::error::{Error, Result};
use crate::grid::{GridSpec, RealField, Spectral};
use crate::model::{well_derivative, PhysicalParams};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProblemKind {
    Manufactured,
    DropArray,
}

impl ProblemKind {
    pub fn label(self) -> &'static str {
        match self {
            ProblemKind::Manufactured => "manufactured",
            ProblemKind::DropArray => "drop_array",
        }
    }
}

/// A rectangular lattice of circular drops. Drop `(i, j)` is centred at
/// `(offset_x + spacing·i, offset_y + spacing·j)` for `i = 1..=count_x`,
/// `j = 1..=count_y`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DropLattice {
    pub count_x: usize,
    pub count_y: usize,
    pub spacing: f64,
    pub radius: f64,
    pub offset_x: f64,
    pub offset_y: f64,
}

impl DropLattice {
    pub fn count(&self) -> usize {
        self.count_x * self.count_y
    }

    pub fn centers(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        (1..=self.count_y).flat_map(move |j| {
            (1..=self.count_x).map(move |i| {
                (
                    self.offset_x + self.spacing * i as f64,
                    self.offset_y + self.spacing * j as f64,
                )
            })
        })
    }

    pub fn validate(&self, grid: &GridSpec) -> Result<()> {
        if self.count() == 0 {
            return Err(Error::validation("problem.drops", "need at least one drop"));
        }
        if !(self.spacing > 0.0) || !(self.radius > 0.0) {
            return Err(Error::validation(
                "problem.drops",
                "spacing and radius must be positive",
            ));
        }
        if !(self.offset_x >= 0.0 && self.offset_y >= 0.0) {
            return Err(Error::validation("problem.drops", "offsets must be >= 0"));
        }
        let x_last = self.offset_x + self.spacing * self.count_x as f64;
        let y_last = self.offset_y + self.spacing * self.count_y as f64;
        if x_last > grid.lx || y_last > grid.ly {
            return Err(Error::validation(
                "problem.drops",
                format!("lattice extends to ({x_last}, {y_last}), outside the domain"),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProblemSpec {
    pub kind: ProblemKind,
    pub grid: GridSpec,
    pub params: PhysicalParams,
    pub t0: f64,
    pub tf: f64,
    pub dt: f64,
    /// Present exactly when `kind` is [`ProblemKind::DropArray`].
    pub drops: Option<DropLattice>,
}

impl ProblemSpec {
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if !(self.t0.is_finite() && self.tf.is_finite() && self.t0 < self.tf) {
            return Err(Error::validation(
                "time.tf",
                format!("need t0 < tf, got t0 = {} and tf = {}", self.t0, self.tf),
            ));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::validation(
                "time.dt",
                format!("must be positive, got {}", self.dt),
            ));
        }
        match self.kind {
            ProblemKind::Manufactured => {
                if self.grid.lx != 2.0 || self.grid.ly != 2.0 {
                    return Err(Error::validation(
                        "problem.grid",
                        "the manufactured problem lives on [0, 2]^2",
                    ));
                }
            }
            ProblemKind::DropArray => match &self.drops {
                Some(d) => d.validate(&self.grid)?,
                None => {
                    return Err(Error::validation(
                        "problem.drops",
                        "drop_array problems need a drop lattice",
                    ))
                }
            },
        }
        Ok(())
    }

    /// Number of steps of size `dt` covering `[t0, tf]`, rounded to nearest.
    pub fn num_steps(&self) -> usize {
        ((self.tf - self.t0) / self.dt).round().max(1.0) as usize
    }

    pub fn initial_condition(&self) -> Result<RealField> {
        match self.kind {
            ProblemKind::Manufactured => Ok(exact_solution(self.t0, &self.grid)),
            ProblemKind::DropArray => {
                let drops = self.drops.ok_or_else(|| {
                    Error::validation("problem.drops", "drop_array problems need a drop lattice")
                })?;
                Ok(ic_drop_array(&self.grid, &drops, self.params.eta))
            }
        }
    }
}

/// `φ(x, y, t) = cos(πx) cos(πy) sin(t)`.
pub fn exact_solution(t: f64, grid: &GridSpec) -> RealField {
    let s = t.sin();
    RealField::from_fn(*grid, |x, y| (PI * x).cos() * (PI * y).cos() * s)
}

/// Source `f = φ_t - m0 Δμ(φ)` that makes [`exact_solution`] an exact
/// solution of the forced equation. The time derivative is analytic; `μ` is
/// evaluated on the grid and differentiated spectrally, which is exact
/// because `φ³` only contains wavenumbers up to `3π`.
pub fn source_term(t: f64, grid: &GridSpec, p: &PhysicalParams) -> Result<RealField> {
    source_term_with(t, &Spectral::new(*grid), p)
}

/// As [`source_term`], reusing existing FFT plans.
pub fn source_term_with(t: f64, spectral: &Spectral, p: &PhysicalParams) -> Result<RealField> {
    let grid = *spectral.grid();
    if grid.nx < 8 || grid.ny < 8 {
        return Err(Error::GridTooCoarse {
            nx: grid.nx,
            ny: grid.ny,
        });
    }
    let phi = exact_solution(t, &grid);
    let phi_t = RealField::from_fn(grid, |x, y| (PI * x).cos() * (PI * y).cos() * t.cos());
    let lap_phi = spectral.laplacian_real(&phi);
    let mut mu = lap_phi.scaled(-p.beta);
    for (m, &f) in mu.values_mut().iter_mut().zip(phi.values()) {
        *m += p.lambda * f + well_derivative(f, p.well_amp);
    }
    let lap_mu = spectral.laplacian_real(&mu);
    Ok(phi_t.lin_comb(1.0, &lap_mu, -p.m0))
}

/// Superposed tanh drop profiles:
///
/// ```text
/// φ₀ = (N_d - 1) - Σ tanh((r_ij - R0) / (√2 η))
/// ```
///
/// where `r_ij` is the periodic (minimum-image) distance to drop `(i, j)`.
/// Inside a drop one term is near `-1` and the rest near `+1`, so `φ₀ ≈ 1`;
/// away from every drop `φ₀ ≈ -1`.
pub fn ic_drop_array(grid: &GridSpec, drops: &DropLattice, eta: f64) -> RealField {
    let centers: Vec<(f64, f64)> = drops.centers().collect();
    let n_d = centers.len() as f64;
    let width = SQRT_2 * eta;
    let (lx, ly) = (grid.lx, grid.ly);
    let wrap = |d: f64, l: f64| d - l * (d / l).round();
    RealField::from_fn(*grid, |x, y| {
        let sum: f64 = centers
            .iter()
            .map(|&(cx, cy)| {
                let r = wrap(x - cx, lx).hypot(wrap(y - cy, ly));
                ((r - drops.radius) / width).tanh()
            })
            .sum();
        (n_d - 1.0) - sum
    })
}

/// Surface tension shared by both drop-array configurations.
pub const DROP_SURFACE_TENSION: f64 = 151.15;

/// Scaled drop-array benchmark: 5×5 drops centred in `[0, 4]²` on a 128² grid,
/// `η = 0.02`. The ratios `η/spacing` and `R0/spacing` match the full-size
/// configuration of [`full_scale_drop_spec`].
pub fn desk_scale_drop_spec() -> ProblemSpec {
    let grid = GridSpec::square(128, 4.0).expect("valid grid");
    let params = PhysicalParams::from_surface_tension(1e-6, DROP_SURFACE_TENSION, 0.02, 1.0)
        .expect("valid parameters");
    ProblemSpec {
        kind: ProblemKind::DropArray,
        grid,
        params,
        t0: 0.0,
        tf: 1.0,
        dt: 1e-3,
        drops: Some(DropLattice {
            count_x: 5,
            count_y: 5,
            spacing: 0.4,
            radius: 0.17,
            offset_x: 0.8,
            offset_y: 0.8,
        }),
    }
}

/// Full-size benchmark: 19×19 drops with spacing 0.2 and `R0 = 0.085` in
/// `[0, 4]²`, 512² grid, `η = 0.01`, `σ = 151.15`, `m0 = 1e-6`, up to `t = 100`.
pub fn full_scale_drop_spec() -> ProblemSpec {
    let grid = GridSpec::square(512, 4.0).expect("valid grid");
    let params = PhysicalParams::from_surface_tension(1e-6, DROP_SURFACE_TENSION, 0.01, 1.0)
        .expect("valid parameters");
    ProblemSpec {
        kind: ProblemKind::DropArray,
        grid,
        params,
        t0: 0.0,
        tf: 100.0,
        dt: 1e-3,
        drops: Some(DropLattice {
            count_x: 19,
            count_y: 19,
            spacing: 0.2,
            radius: 0.085,
            offset_x: 0.0,
            offset_y: 0.0,
        }),
    }
}

/// Convergence-test configuration on `[0, 2]²`: `m0 = 0.01`, `β = 0.01`,
/// `η = 0.1` (so `a = 1`), `c0 = 1`, `t ∈ [0.1, 1.1]`.
pub fn manufactured_spec(n: usize, dt: f64) -> Result<ProblemSpec> {
    let spec = ProblemSpec {
        kind: ProblemKind::Manufactured,
        grid: GridSpec::square(n, 2.0)?,
        params: PhysicalParams::applied(0.01, 0.01, 0.1, 1.0)?,
        t0: 0.1,
        tf: 1.1,
        dt,
        drops: None,
    };
    spec.validate()?;
    Ok(spec)
}
