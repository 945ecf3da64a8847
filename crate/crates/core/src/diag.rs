//! Non-fatal diagnostics attached to results.

use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Warning {
    /// An input was outside its domain and was clamped.
    Clamped {
        what: String,
        value: f64,
        clamped_to: f64,
    },
    /// Some output pixels sampled outside the source image and were filled with 0.
    OutOfBounds { pixels: usize },
    /// The combined kernel matrix was not positive semidefinite; diagonal jitter was added.
    KernelJitter { jitter: f64 },
    /// A vote count exceeded the per-class maximum of one-vs-one voting.
    VotesAboveMaximum { votes: u32, maximum: u32 },
    /// The inner dual solver hit its iteration cap before meeting tolerance.
    SolverIterationLimit { iterations: usize, violation: f64 },
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Warning::Clamped {
                what,
                value,
                clamped_to,
            } => write!(f, "{what} = {value} clamped to {clamped_to}"),
            Warning::OutOfBounds { pixels } => {
                write!(f, "{pixels} pixels sampled outside the image (filled with 0)")
            }
            Warning::KernelJitter { jitter } => {
                write!(f, "kernel matrix not PSD; added {jitter:e} to the diagonal")
            }
            Warning::VotesAboveMaximum { votes, maximum } => {
                write!(f, "vote count {votes} exceeds one-vs-one maximum {maximum}")
            }
            Warning::SolverIterationLimit {
                iterations,
                violation,
            } => write!(
                f,
                "dual solver stopped after {iterations} iterations with KKT violation {violation:e}"
            ),
        }
    }
}

/// A value together with the warnings raised while producing it.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome<T> {
    pub value: T,
    pub warnings: Vec<Warning>,
}

impl<T> Outcome<T> {
    pub fn clean(value: T) -> Self {
        Outcome {
            value,
            warnings: Vec::new(),
        }
    }

    pub fn with_warnings(value: T, warnings: Vec<Warning>) -> Self {
        Outcome { value, warnings }
    }

    pub fn is_clean(&self) -> bool {
        self.warnings.is_empty()
    }

    pub fn map<U>(self, f: impl FnOnce(T) -> U) -> Outcome<U> {
        Outcome {
            value: f(self.value),
            warnings: self.warnings,
        }
    }
}

/// Clamps `value` into `[0, 1]`, recording a warning when it had to move.
pub(crate) fn clamp_unit(what: &str, value: f64, warnings: &mut Vec<Warning>) -> f64 {
    let clamped = if value.is_nan() { 0.0 } else { value.clamp(0.0, 1.0) };
    if clamped != value || value.is_nan() {
        warnings.push(Warning::Clamped {
            what: what.to_string(),
            value,
            clamped_to: clamped,
        });
    }
    clamped
}
