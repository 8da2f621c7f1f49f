use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error("malformed program: {0}")]
    Malformed(String),
    #[error("assignment covers {got} variables, program has {expected}")]
    CoverageMismatch { expected: usize, got: usize },
    #[error("cannot parse solution: {0}")]
    Parse(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Comparator {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = "=")]
    Eq,
}

impl Comparator {
    pub fn holds(self, lhs: f64, rhs: f64) -> bool {
        const TOL: f64 = 1e-9;
        match self {
            Comparator::Le => lhs <= rhs + TOL,
            Comparator::Ge => lhs >= rhs - TOL,
            Comparator::Eq => (lhs - rhs).abs() <= TOL,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Comparator::Le => "<=",
            Comparator::Ge => ">=",
            Comparator::Eq => "=",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub terms: Vec<(usize, f64)>,
    pub cmp: Comparator,
    pub rhs: f64,
    #[serde(default)]
    pub name: String,
}

impl Constraint {
    pub fn lhs(&self, assignment: &[bool]) -> f64 {
        self.terms.iter().filter(|(v, _)| assignment[*v]).map(|(_, a)| a).sum()
    }
}

/// Outcome of [`BinaryProgram::verify`].
#[derive(Debug, Clone, PartialEq)]
pub struct Verification {
    pub feasible: bool,
    pub first_violated: Option<usize>,
}

/// A maximisation problem over binary variables.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BinaryProgram {
    labels: Vec<String>,
    objective: Vec<f64>,
    constraints: Vec<Constraint>,
}

impl BinaryProgram {
    pub fn new() -> Self {
        Self::default()
    }

    /// Declares a variable and returns its index. Declaration order is the
    /// order the tie-break rule uses.
    pub fn add_var(&mut self, label: impl Into<String>, objective: f64) -> usize {
        self.labels.push(label.into());
        self.objective.push(objective);
        self.labels.len() - 1
    }

    pub fn add_constraint(&mut self, name: impl Into<String>, terms: Vec<(usize, f64)>, cmp: Comparator, rhs: f64) {
        self.constraints.push(Constraint { terms, cmp, rhs, name: name.into() });
    }

    pub fn num_vars(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn objective_value(&self, assignment: &[bool]) -> f64 {
        self.objective.iter().zip(assignment).filter(|(_, &x)| x).map(|(c, _)| c).sum()
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        if let Some(i) = self.objective.iter().position(|c| !c.is_finite()) {
            return Err(SolverError::Malformed(format!("objective coefficient of {} is not finite", self.labels[i])));
        }
        for (k, c) in self.constraints.iter().enumerate() {
            if !c.rhs.is_finite() {
                return Err(SolverError::Malformed(format!("constraint {k} has a non-finite right-hand side")));
            }
            for &(v, a) in &c.terms {
                if v >= self.num_vars() {
                    return Err(SolverError::Malformed(format!("constraint {k} references undeclared variable {v}")));
                }
                if !a.is_finite() {
                    return Err(SolverError::Malformed(format!("constraint {k} has a non-finite coefficient")));
                }
            }
        }
        Ok(())
    }

    /// Checks every constraint against a full assignment.
    pub fn verify(&self, assignment: &[bool]) -> Result<Verification, SolverError> {
        if assignment.len() != self.num_vars() {
            return Err(SolverError::CoverageMismatch { expected: self.num_vars(), got: assignment.len() });
        }
        let first_violated = self.constraints.iter().position(|c| !c.cmp.holds(c.lhs(assignment), c.rhs));
        Ok(Verification { feasible: first_violated.is_none(), first_violated })
    }
}
