//! JSON run configuration.
//!
//! ```json
//! {
//!   "problem": {
//!     "kind": "drop_array",
//!     "grid": { "nx": 128, "ny": 128, "lx": 4.0, "ly": 4.0 },
//!     "params": { "m0": 1e-6, "sigma": 151.15, "eta": 0.02, "lambda": 0.0, "c0": 1.0 },
//!     "drops": { "count_x": 5, "count_y": 5, "spacing": 0.4, "radius": 0.17,
//!                "offset_x": 0.8, "offset_y": 0.8 },
//!     "dealias": false,
//!     "seed": 0
//!   },
//!   "scheme": "2a",
//!   "time": { "t0": 0.0, "tf": 1.0, "dt": 1e-3 },
//!   "output": { "dir": "out", "history_every": 1, "snapshot_every": 0 }
//! }
//! ```
//!
//! Only `problem.kind` and `scheme` are required. Everything else defaults to
//! the manufactured convergence case or the scaled drop-array benchmark,
//! depending on `kind`. `params` takes either `beta` or `sigma` (surface
//! tension, from which `beta` is derived), and `well_amp` defaults to
//! `beta / eta²`.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::model::{sigma_to_beta, PhysicalParams};
use crate::problems::{desk_scale_drop_spec, manufactured_spec, DropLattice, ProblemKind, ProblemSpec};
use crate::schemes::SchemeKind;

/// Fully validated run configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub problem: ProblemSpec,
    pub scheme: SchemeKind,
    pub output_dir: PathBuf,
    /// Steps between snapshots; 0 disables them.
    pub snapshot_every: usize,
    /// Steps between history rows (at least 1).
    pub history_every: usize,
    pub dealias: bool,
    /// Reserved for stochastic initial conditions; unused by the built-in problems.
    pub seed: u64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    problem: RawProblem,
    scheme: String,
    #[serde(default)]
    time: RawTime,
    #[serde(default)]
    output: RawOutput,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProblem {
    kind: String,
    grid: Option<RawGrid>,
    #[serde(default)]
    params: RawParams,
    drops: Option<RawDrops>,
    #[serde(default)]
    dealias: bool,
    #[serde(default)]
    seed: u64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    nx: usize,
    ny: usize,
    lx: f64,
    ly: f64,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawParams {
    m0: Option<f64>,
    beta: Option<f64>,
    sigma: Option<f64>,
    eta: Option<f64>,
    lambda: Option<f64>,
    well_amp: Option<f64>,
    c0: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDrops {
    count_x: usize,
    count_y: usize,
    spacing: f64,
    radius: f64,
    #[serde(default)]
    offset_x: f64,
    #[serde(default)]
    offset_y: f64,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawTime {
    t0: Option<f64>,
    tf: Option<f64>,
    dt: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawOutput {
    dir: PathBuf,
    history_every: usize,
    snapshot_every: usize,
}

impl Default for RawOutput {
    fn default() -> Self {
        RawOutput {
            dir: PathBuf::from("out"),
            history_every: 1,
            snapshot_every: 0,
        }
    }
}

fn parse_kind(s: &str) -> Result<ProblemKind> {
    match s {
        "manufactured" => Ok(ProblemKind::Manufactured),
        "drop_array" => Ok(ProblemKind::DropArray),
        other => Err(Error::validation(
            "problem.kind",
            format!("unknown problem {other:?} (expected manufactured or drop_array)"),
        )),
    }
}

fn build_params(raw: &RawParams, defaults: &PhysicalParams) -> Result<PhysicalParams> {
    let field = "problem.params";
    let eta = raw.eta.unwrap_or(defaults.eta);
    let beta = match (raw.beta, raw.sigma) {
        (Some(_), Some(_)) => {
            return Err(Error::validation(field, "give either beta or sigma, not both"))
        }
        (Some(b), None) => b,
        (None, Some(s)) => sigma_to_beta(s, eta),
        (None, None) if raw.eta.is_some() => {
            // Keep the default surface tension when only η changes.
            defaults.beta * eta / defaults.eta
        }
        (None, None) => defaults.beta,
    };
    let p = PhysicalParams {
        m0: raw.m0.unwrap_or(defaults.m0),
        beta,
        lambda: raw.lambda.unwrap_or(0.0),
        well_amp: raw.well_amp.unwrap_or(beta / (eta * eta)),
        eta,
        c0: raw.c0.unwrap_or(1.0),
    };
    p.validate().map_err(|e| match e {
        Error::InvalidParams(msg) => Error::validation(field, msg),
        other => other,
    })?;
    Ok(p)
}

fn build(raw: RawConfig) -> Result<RunConfig> {
    let scheme: SchemeKind = raw.scheme.parse()?;
    let kind = parse_kind(&raw.problem.kind)?;
    let mut spec = match kind {
        ProblemKind::Manufactured => manufactured_spec(20, 0.01)?,
        ProblemKind::DropArray => desk_scale_drop_spec(),
    };
    if let Some(g) = &raw.problem.grid {
        spec.grid = GridSpec::new(g.nx, g.ny, g.lx, g.ly).map_err(|e| match e {
            Error::InvalidGrid(msg) => Error::validation("problem.grid", msg),
            other => other,
        })?;
    }
    spec.params = build_params(&raw.problem.params, &spec.params)?;
    match (kind, raw.problem.drops) {
        (ProblemKind::DropArray, Some(d)) => {
            spec.drops = Some(DropLattice {
                count_x: d.count_x,
                count_y: d.count_y,
                spacing: d.spacing,
                radius: d.radius,
                offset_x: d.offset_x,
                offset_y: d.offset_y,
            })
        }
        (ProblemKind::Manufactured, Some(_)) => {
            return Err(Error::validation(
                "problem.drops",
                "only drop_array problems take a drop lattice",
            ))
        }
        _ => {}
    }
    if let Some(t0) = raw.time.t0 {
        spec.t0 = t0;
    }
    if let Some(tf) = raw.time.tf {
        spec.tf = tf;
    }
    if let Some(dt) = raw.time.dt {
        spec.dt = dt;
    }
    spec.validate()?;
    if raw.output.history_every == 0 {
        return Err(Error::validation("output.history_every", "must be at least 1"));
    }
    Ok(RunConfig {
        problem: spec,
        scheme,
        output_dir: raw.output.dir,
        snapshot_every: raw.output.snapshot_every,
        history_every: raw.output.history_every,
        dealias: raw.problem.dealias,
        seed: raw.problem.seed,
    })
}

/// Parses and validates a JSON configuration document.
///
/// Malformed JSON yields [`Error::Parse`]; a missing, mistyped, unknown or
/// out-of-range value yields [`Error::Validation`] naming the field.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let raw: RawConfig = serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        Error::validation(&path, e.into_inner().to_string())
    })?;
    build(raw)
}

pub fn load_config(path: impl AsRef<Path>) -> Result<RunConfig> {
    parse_config(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field_of(err: Error) -> String {
        match err {
            Error::Validation { field, .. } => field,
            other => panic!("expected a validation error, got {other:?}"),
        }
    }

    #[test]
    fn minimal_manufactured_config() {
        let cfg = parse_config(r#"{"problem": {"kind": "manufactured"}, "scheme": "2a"}"#).unwrap();
        assert_eq!(cfg.scheme, SchemeKind::Gpav2A);
        assert_eq!((cfg.problem.grid.nx, cfg.problem.grid.ny), (20, 20));
        assert_eq!(cfg.problem.params.c0, 1.0);
        assert_eq!(cfg.problem.params.lambda, 0.0);
        assert!((cfg.problem.params.well_amp - 1.0).abs() < 1e-12);
        assert!(!cfg.dealias);
        assert_eq!((cfg.problem.t0, cfg.problem.tf), (0.1, 1.1));
        assert_eq!(cfg.history_every, 1);
        assert_eq!(cfg.snapshot_every, 0);
    }

    #[test]
    fn drop_array_defaults_to_desk_benchmark() {
        let cfg = parse_config(r#"{"problem": {"kind": "drop_array"}, "scheme": "semi"}"#).unwrap();
        assert_eq!(cfg.problem, desk_scale_drop_spec());
    }

    #[test]
    fn full_config_round_trips_values() {
        let text = r#"{
            "problem": {
                "kind": "drop_array",
                "grid": {"nx": 64, "ny": 32, "lx": 4.0, "ly": 2.0},
                "params": {"m0": 1e-5, "sigma": 100.0, "eta": 0.05, "c0": 2.0},
                "drops": {"count_x": 3, "count_y": 1, "spacing": 1.0, "radius": 0.3, "offset_y": 0.5},
                "dealias": true,
                "seed": 7
            },
            "scheme": "1B",
            "time": {"t0": 0.0, "tf": 0.5, "dt": 0.01},
            "output": {"dir": "runs/a", "history_every": 5, "snapshot_every": 10}
        }"#;
        let cfg = parse_config(text).unwrap();
        assert_eq!(cfg.scheme, SchemeKind::Gpav1B);
        assert!(cfg.dealias);
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.output_dir, PathBuf::from("runs/a"));
        assert_eq!(cfg.problem.grid.ny, 32);
        let p = cfg.problem.params;
        assert!((p.beta - sigma_to_beta(100.0, 0.05)).abs() < 1e-15);
        assert!((p.well_amp - p.beta / 0.0025).abs() < 1e-9);
        assert_eq!(cfg.problem.drops.unwrap().offset_y, 0.5);
    }

    #[test]
    fn error_classification() {
        assert!(matches!(parse_config("{ not json"), Err(Error::Parse(_))));
        let bad_scheme = parse_config(r#"{"problem": {"kind": "manufactured"}, "scheme": "3c"}"#);
        assert_eq!(field_of(bad_scheme.unwrap_err()), "scheme");
        let bad_dt = parse_config(
            r#"{"problem": {"kind": "manufactured"}, "scheme": "1a", "time": {"dt": -0.1}}"#,
        );
        assert_eq!(field_of(bad_dt.unwrap_err()), "time.dt");
        let mistyped = parse_config(
            r#"{"problem": {"kind": "manufactured"}, "scheme": "1a", "time": {"dt": "x"}}"#,
        );
        assert_eq!(field_of(mistyped.unwrap_err()), "time.dt");
        let unknown = parse_config(r#"{"problem": {"kind": "manufactured", "foo": 1}, "scheme": "1a"}"#);
        assert!(field_of(unknown.unwrap_err()).starts_with("problem"));
        let no_scheme = parse_config(r#"{"problem": {"kind": "manufactured"}}"#);
        assert!(matches!(no_scheme, Err(Error::Validation { .. })));
        let bad_kind = parse_config(r#"{"problem": {"kind": "spinodal"}, "scheme": "1a"}"#);
        assert_eq!(field_of(bad_kind.unwrap_err()), "problem.kind");
        let both = parse_config(
            r#"{"problem": {"kind": "drop_array", "params": {"beta": 1, "sigma": 1}}, "scheme": "1a"}"#,
        );
        assert_eq!(field_of(both.unwrap_err()), "problem.params");
        let zero_every = parse_config(
            r#"{"problem": {"kind": "manufactured"}, "scheme": "1a", "output": {"history_every": 0}}"#,
        );
        assert_eq!(field_of(zero_every.unwrap_err()), "output.history_every");
    }
}
