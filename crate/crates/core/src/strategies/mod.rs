//! Per-day triage models and baselines.

mod board;
mod instance;
mod knapsack;
mod ranking;
mod sdabt;
mod validate;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::ilp::{solve, BinaryProgram, SolveOptions, SolveStatus, SolverError};
use crate::model::{PlanStatus, TriagePlan};

pub use instance::{coefficient, GroundTruth, InstanceBug, InstanceDeveloper, InstanceError, TriageInstance};
pub use knapsack::{budgets, build_dabt, build_rabt, KnapsackProgram};
pub use ranking::{rank_cbr, rank_costriage, replay_actual};
pub use sdabt::{build_sdabt, Compilation, SdabtProgram, VarKey};
pub use validate::{validate_plan, Rules, Violation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    Actual,
    Cbr,
    #[serde(rename = "costriage")]
    CosTriage,
    Rabt,
    Dabt,
    Sdabt,
}

impl Strategy {
    pub const ALL: [Strategy; 6] =
        [Strategy::Actual, Strategy::Cbr, Strategy::CosTriage, Strategy::Rabt, Strategy::Dabt, Strategy::Sdabt];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::Actual => "actual",
            Strategy::Cbr => "cbr",
            Strategy::CosTriage => "costriage",
            Strategy::Rabt => "rabt",
            Strategy::Dabt => "dabt",
            Strategy::Sdabt => "sdabt",
        }
    }

    /// Rules the strategy's plans must satisfy.
    pub fn rules(self) -> Rules {
        match self {
            Strategy::Sdabt => Rules::SCHEDULED,
            Strategy::Actual => Rules::HISTORICAL,
            _ => Rules::QUEUED,
        }
    }

    /// Whether the strategy solves a 0-1 program.
    pub fn uses_solver(self) -> bool {
        matches!(self, Strategy::Rabt | Strategy::Dabt | Strategy::Sdabt)
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, thiserror::Error, PartialEq)]
#[error("unknown strategy {0:?}")]
pub struct UnknownStrategy(pub String);

impl FromStr for Strategy {
    type Err = UnknownStrategy;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Strategy::ALL.into_iter().find(|x| x.name().eq_ignore_ascii_case(s)).ok_or_else(|| UnknownStrategy(s.to_string()))
    }
}

#[derive(Debug, thiserror::Error)]
pub enum StrategyError {
    #[error(transparent)]
    Instance(#[from] InstanceError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("solver budget ran out before any feasible plan was found")]
    NoIncumbent { day: i64 },
}

/// The program a strategy solves, when it solves one.
pub fn program_for(strategy: Strategy, instance: &TriageInstance) -> Option<BinaryProgram> {
    match strategy {
        Strategy::Sdabt => Some(build_sdabt(instance, Compilation::Eliminated).program),
        Strategy::Dabt => Some(build_dabt(instance).program),
        Strategy::Rabt => Some(build_rabt(instance).program),
        _ => None,
    }
}

fn run_solver(program: &BinaryProgram, options: &SolveOptions, day: i64) -> Result<(Vec<bool>, PlanStatus), StrategyError> {
    let result = solve(program, options)?;
    let status = match result.status {
        SolveStatus::Optimal => PlanStatus::Optimal,
        SolveStatus::TimeoutBestFeasible => PlanStatus::FeasibleTimeout,
        SolveStatus::Infeasible => return Ok((vec![false; program.num_vars()], PlanStatus::InfeasibleEmpty)),
        SolveStatus::TimeoutNoIncumbent => return Err(StrategyError::NoIncumbent { day }),
    };
    Ok((result.assignment, status))
}

/// Produces one day's plan under `strategy`.
pub fn plan(strategy: Strategy, instance: &TriageInstance, options: &SolveOptions) -> Result<TriagePlan, StrategyError> {
    instance.validate()?;
    let day = instance.day;
    Ok(match strategy {
        Strategy::Actual => replay_actual(instance),
        Strategy::Cbr => rank_cbr(instance),
        Strategy::CosTriage => rank_costriage(instance),
        Strategy::Sdabt => {
            let built = build_sdabt(instance, Compilation::Eliminated);
            let (x, status) = run_solver(&built.program, options, day)?;
            built.decode(instance, &x, status)
        }
        Strategy::Dabt | Strategy::Rabt => {
            let built = if strategy == Strategy::Dabt { build_dabt(instance) } else { build_rabt(instance) };
            let (x, status) = run_solver(&built.program, options, day)?;
            built.decode(instance, &x, status)
        }
    })
}
