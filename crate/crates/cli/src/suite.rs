use std::time::{Duration, Instant};

use cwave_core::diagnostics::InteractionKind;
use cwave_core::Error;

use crate::config::ExperimentConfig;
use crate::experiments::{self as ex, CheckRow, Status};
use crate::output::Artifacts;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Stage {
    Profile,
    Rarefaction,
    Weight,
    Poincare,
    Interactions,
    Scheme,
    Evolve,
    Shift,
}

const STAGES: [Stage; 8] =
    [Stage::Profile, Stage::Rarefaction, Stage::Weight, Stage::Poincare, Stage::Interactions, Stage::Scheme, Stage::Evolve, Stage::Shift];

impl Stage {
    fn dir(self) -> &'static str {
        match self {
            Stage::Profile => "profile",
            Stage::Rarefaction => "rarefaction",
            Stage::Weight => "weight_algebra",
            Stage::Poincare => "poincare",
            Stage::Interactions => "interactions",
            Stage::Scheme => "scheme",
            Stage::Evolve => "evolve",
            Stage::Shift => "shift",
        }
    }

    /// Row ids and criteria this stage produces, in order.
    fn rows(self) -> Vec<(String, u32)> {
        let own = |ids: &[&str], c: u32| ids.iter().map(|s| (s.to_string(), c)).collect();
        match self {
            Stage::Profile => own(&ex::PROFILE_ROWS, 1),
            Stage::Rarefaction => ex::RAREFACTION_ROWS.iter().map(|(s, c)| (s.to_string(), *c)).collect(),
            Stage::Weight => own(&ex::WEIGHT_ROWS, 4),
            Stage::Poincare => own(&ex::POINCARE_ROWS, 5),
            Stage::Interactions => InteractionKind::ALL.iter().map(|k| (ex::interaction_row_id(*k), 6)).collect(),
            Stage::Scheme => own(&ex::SCHEME_ROWS, 9),
            Stage::Evolve => ex::EVOLVE_ROWS.iter().map(|(s, c)| (s.to_string(), *c)).collect(),
            Stage::Shift => own(&[ex::SHIFT_ROW], 10),
        }
    }

    fn needs_rarefaction(self) -> bool {
        matches!(self, Stage::Rarefaction | Stage::Interactions)
    }

    fn run(self, cfg: &ExperimentConfig, art: &mut Artifacts, deadline: Instant) -> Result<Vec<CheckRow>, Error> {
        match self {
            Stage::Profile => ex::profile(cfg, art),
            Stage::Rarefaction => ex::rarefaction(cfg, art),
            Stage::Weight => ex::weight(cfg, art),
            Stage::Poincare => ex::poincare(cfg, art),
            Stage::Interactions => ex::interactions(cfg, art),
            Stage::Scheme => ex::scheme(cfg, art),
            Stage::Evolve => ex::evolve(cfg, art, Some(deadline)),
            Stage::Shift => ex::shift_identification(cfg, art),
        }
    }
}

fn fill(stage: Stage, status: Status, detail: &str) -> Vec<CheckRow> {
    stage.rows().iter().map(|(id, c)| CheckRow::placeholder(id, *c, status, detail)).collect()
}

/// Runs every stage in order under the wall-clock budget. Stages that would start after the
/// budget is spent, or whose evolution runs out of time, are reported as SKIPPED. A stage that
/// errors reports FAIL on each of its rows.
pub fn theorem_suite(cfg: &ExperimentConfig, art: &mut Artifacts) -> Vec<CheckRow> {
    let start = Instant::now();
    let deadline = start + Duration::from_secs_f64(cfg.budget_seconds);
    let rarefaction = cfg.wave_parameters().map(|p| p.has_rarefaction()).unwrap_or(false);
    let mut rows = Vec::new();
    for stage in STAGES {
        if stage.needs_rarefaction() && !rarefaction {
            rows.extend(fill(stage, Status::NotApplicable, "no rarefaction (u_+ = u_m)"));
            continue;
        }
        if Instant::now() >= deadline {
            rows.extend(fill(stage, Status::Skipped, &format!("budget of {} s exhausted", cfg.budget_seconds)));
            continue;
        }
        let mut sub = art.child(stage.dir());
        let result = stage.run(cfg, &mut sub, deadline);
        art.adopt(stage.dir(), sub);
        match result {
            Ok(r) => rows.extend(r),
            Err(e) => rows.extend(fill(stage, Status::Fail, &format!("error: {e}"))),
        }
    }
    rows
}
