//! Time-stepping driver tying a problem, a scheme and the diagnostics together.

use crate::diagnostics::{error_norms, HistoryRecord};
use crate::error::{Error, Result};
use crate::grid::RealField;
use crate::model::Model;
use crate::problems::{exact_solution, source_term_with, ProblemKind, ProblemSpec};
use crate::schemes::{Forcing, SchemeKind, SchemeState, StepReport, Stepper};

/// How a run ended.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RunOutcome {
    Completed,
    /// The step with this index blew up; earlier records were delivered.
    Diverged { step: usize, max_abs: f64 },
}

#[derive(Clone, Debug)]
pub struct RunSummary {
    pub outcome: RunOutcome,
    pub final_state: SchemeState,
    /// Measurements of `final_state`.
    pub last_record: HistoryRecord,
}

#[derive(Clone, Debug)]
pub struct Simulation {
    problem: ProblemSpec,
    stepper: Stepper,
}

impl Simulation {
    pub fn new(problem: ProblemSpec, kind: SchemeKind, dealias: bool) -> Result<Self> {
        problem.validate()?;
        let model = Model::new(problem.grid, problem.params)?;
        Ok(Simulation {
            problem,
            stepper: Stepper::new(model, kind).with_dealias(dealias),
        })
    }

    pub fn problem(&self) -> &ProblemSpec {
        &self.problem
    }

    pub fn stepper(&self) -> &Stepper {
        &self.stepper
    }

    pub fn initial_state(&self) -> Result<SchemeState> {
        self.stepper.init_state(&self.problem.initial_condition()?)
    }

    pub fn time_of(&self, step: usize) -> f64 {
        self.problem.t0 + step as f64 * self.problem.dt
    }

    /// Advances one step, adding the manufactured source when the problem has one.
    pub fn advance(&self, state: &SchemeState) -> Result<(SchemeState, StepReport)> {
        let f_old = self.source_at(self.time_of(state.step))?;
        let f_new = self.source_at(self.time_of(state.step + 1))?;
        let forcing = match (&f_old, &f_new) {
            (Some(old), Some(new)) => Some(Forcing { old, new }),
            _ => None,
        };
        self.stepper.step(state, self.problem.dt, forcing)
    }

    fn source_at(&self, t: f64) -> Result<Option<RealField>> {
        match self.problem.kind {
            ProblemKind::Manufactured => Ok(Some(source_term_with(
                t,
                self.stepper.model().spectral(),
                &self.problem.params,
            )?)),
            ProblemKind::DropArray => Ok(None),
        }
    }

    /// Measures `state`. `report` comes from the step that produced it and is
    /// `None` for the initial state.
    pub fn record(&self, state: &SchemeState, report: Option<&StepReport>) -> Result<HistoryRecord> {
        let model = self.stepper.model();
        let kind = self.stepper.kind();
        let t = self.time_of(state.step);
        let (energy, dissipation, xi, sav_r) = match report {
            Some(rep) => (rep.energy, rep.dissipation, rep.xi, rep.sav_r),
            None => (
                model.energy_total(&state.phi_cur)?,
                model.dissipation(&state.mu_cur),
                kind.is_gpav().then_some(state.xi),
                (kind == SchemeKind::Sav).then_some(state.sav_r),
            ),
        };
        let (linf_err, l2_err) = match self.problem.kind {
            ProblemKind::Manufactured => {
                let (a, b) = error_norms(&state.phi_cur, &exact_solution(t, &self.problem.grid));
                (Some(a), Some(b))
            }
            ProblemKind::DropArray => (None, None),
        };
        Ok(HistoryRecord {
            step: state.step,
            t,
            mass: state.phi_cur.integral(),
            energy,
            r: kind.is_gpav().then_some(state.r_cur),
            xi,
            sav_r,
            h2: model.spectral().h2_norm(&state.phi_cur),
            dissipation,
            linf_err,
            l2_err,
        })
    }

    /// Runs `steps` steps from the initial condition. `sink` receives the
    /// initial record, every `every`-th record and the final one, in order.
    /// A divergence ends the run with [`RunOutcome::Diverged`] instead of an
    /// error so that earlier output stays valid.
    pub fn run(
        &self,
        steps: usize,
        every: usize,
        mut sink: impl FnMut(&HistoryRecord, &SchemeState) -> Result<()>,
    ) -> Result<RunSummary> {
        let every = every.max(1);
        let mut state = self.initial_state()?;
        let mut last = self.record(&state, None)?;
        sink(&last, &state)?;
        for n in 1..=steps {
            match self.advance(&state) {
                Ok((next, report)) => {
                    state = next;
                    if n % every == 0 || n == steps {
                        last = self.record(&state, Some(&report))?;
                        sink(&last, &state)?;
                    }
                }
                Err(Error::Diverged { step, max_abs }) => {
                    return Ok(RunSummary {
                        outcome: RunOutcome::Diverged { step, max_abs },
                        last_record: self.record(&state, None)?,
                        final_state: state,
                    });
                }
                Err(e) => return Err(e),
            }
        }
        Ok(RunSummary {
            outcome: RunOutcome::Completed,
            final_state: state,
            last_record: last,
        })
    }

    /// Runs the whole `[t0, tf]` interval and returns every record.
    pub fn run_collect(&self) -> Result<(RunSummary, Vec<HistoryRecord>)> {
        let mut out = Vec::new();
        let summary = self.run(self.problem.num_steps(), 1, |rec, _| {
            out.push(*rec);
            Ok(())
        })?;
        Ok((summary, out))
    }
}
