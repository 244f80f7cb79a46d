//! Reproducible runs of the two explicit examples: the null-line pair on
//! which no dual solution exists, and the cylinder whose dual potential is
//! not Lipschitz.

mod cylinder;
mod line;
mod spacing;

pub use cylinder::{
    build_profile, critical_displacement, cylinder_potential, run_cylinder_example, CylinderExperiment,
    CylinderSample, ProfileFunction, CIRCUMFERENCE, DEFAULT_ETAS,
};
pub use line::{line_problem, run_line_counterexample, shift_pattern_exact, LineExperiment, LineLevel};
pub use spacing::{select_spaced_points, select_spaced_points_exact};

use serde::{Deserialize, Serialize};

/// One named result together with the tolerance it was computed or checked
/// at. `passed` is `None` for values that are reported but not asserted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scalar {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub passed: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub name: String,
    pub csv: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub experiment: String,
    pub scalars: Vec<Scalar>,
    #[serde(skip)]
    pub tables: Vec<Table>,
}

impl ExperimentReport {
    pub fn new(experiment: &str) -> Self {
        Self { experiment: experiment.to_string(), ..Self::default() }
    }

    pub fn report(&mut self, name: impl Into<String>, value: f64, tolerance: f64) {
        self.scalars.push(Scalar { name: name.into(), value, tolerance, passed: None });
    }

    pub fn check(&mut self, name: impl Into<String>, value: f64, tolerance: f64, passed: bool) {
        self.scalars.push(Scalar { name: name.into(), value, tolerance, passed: Some(passed) });
    }

    pub fn scalar(&self, name: &str) -> Option<&Scalar> {
        self.scalars.iter().find(|s| s.name == name)
    }

    pub fn all_passed(&self) -> bool {
        self.scalars.iter().all(|s| s.passed != Some(false))
    }

    pub fn failures(&self) -> Vec<&str> {
        self.scalars.iter().filter(|s| s.passed == Some(false)).map(|s| s.name.as_str()).collect()
    }
}
