//! The acceptance battery: eleven numbered criteria, each a list of named checks.

mod criteria;
pub mod oracle;

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Group {
    Geometry,
    Classical,
    Quantum,
    Measures,
    Probability,
}

impl Group {
    pub const ALL: [Group; 5] = [Group::Geometry, Group::Classical, Group::Quantum, Group::Measures, Group::Probability];

    pub fn name(self) -> &'static str {
        match self {
            Group::Geometry => "geometry",
            Group::Classical => "classical",
            Group::Quantum => "quantum",
            Group::Measures => "measures",
            Group::Probability => "probability",
        }
    }
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Group {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Group::ALL
            .into_iter()
            .find(|g| g.name() == s)
            .ok_or_else(|| format!("unknown group {s:?} (expected one of geometry, classical, quantum, measures, probability)"))
    }
}

/// One comparison inside a criterion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub label: String,
    pub detail: String,
    pub passed: bool,
}

impl Check {
    pub fn new(label: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self { label: label.into(), detail: detail.into(), passed }
    }

    /// `|got − want| ≤ tol`.
    pub fn close(label: impl Into<String>, got: f64, want: f64, tol: f64) -> Self {
        let err = (got - want).abs();
        Self::new(label, err <= tol, format!("{got:.10e} vs {want:.10e} (|Δ| = {err:.2e}, tol {tol:.1e})"))
    }

    /// `value ≤ bound`.
    pub fn at_most(label: impl Into<String>, value: f64, bound: f64) -> Self {
        Self::new(label, value <= bound, format!("{value:.4e} ≤ {bound:.4e}"))
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Criterion {
    pub id: u8,
    pub title: &'static str,
    pub group: Group,
    /// Wall-clock allowance in seconds.
    pub budget: f64,
    run: fn() -> Result<Vec<Check>, String>,
}

pub const CRITERIA: [Criterion; 11] = [
    Criterion { id: 1, title: "asymptotic velocity examples", group: Group::Geometry, budget: 1.0, run: criteria::velocity_examples },
    Criterion { id: 2, title: "transform algebra", group: Group::Geometry, budget: 5.0, run: criteria::transform_algebra },
    Criterion { id: 3, title: "barrier oracle", group: Group::Classical, budget: 10.0, run: criteria::barrier_oracle },
    Criterion { id: 4, title: "free-particle quantum measure", group: Group::Quantum, budget: 60.0, run: criteria::free_quantum_measure },
    Criterion { id: 5, title: "AET invariance", group: Group::Quantum, budget: 120.0, run: criteria::aet_invariance },
    Criterion { id: 6, title: "corrected transfer", group: Group::Measures, budget: 120.0, run: criteria::corrected_transfer },
    Criterion { id: 7, title: "quotient measure", group: Group::Measures, budget: 1.0, run: criteria::quotient },
    Criterion { id: 8, title: "Bernoulli universe", group: Group::Probability, budget: 10.0, run: criteria::bernoulli },
    Criterion { id: 9, title: "cross-section", group: Group::Classical, budget: 60.0, run: criteria::cross_section },
    Criterion { id: 10, title: "semiclassical comparison", group: Group::Quantum, budget: 5.0, run: criteria::semiclassical },
    Criterion { id: 11, title: "NCDIC regression", group: Group::Measures, budget: 120.0, run: criteria::ncdic },
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionOutcome {
    pub id: u8,
    pub title: String,
    pub group: Group,
    pub passed: bool,
    pub seconds: f64,
    pub budget: f64,
    /// Set when the criterion could not be evaluated at all.
    pub error: Option<String>,
    pub checks: Vec<Check>,
}

impl CriterionOutcome {
    /// `PASS  4 free-particle quantum measure (12.3 s)` or the FAIL equivalent with the first failing check.
    pub fn line(&self) -> String {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        let mut s = format!("{verdict} {:>2} {} ({:.2} s)", self.id, self.title, self.seconds);
        if let Some(e) = &self.error {
            s += &format!(": {e}");
        } else if let Some(c) = self.checks.iter().find(|c| !c.passed) {
            s += &format!(": {}: {}", c.label, c.detail);
        }
        s
    }
}

impl Criterion {
    pub fn run(&self) -> CriterionOutcome {
        let start = Instant::now();
        let result = (self.run)();
        let seconds = start.elapsed().as_secs_f64();
        let (mut checks, error) = match result {
            Ok(c) => (c, None),
            Err(e) => (Vec::new(), Some(e)),
        };
        if error.is_none() {
            checks.push(Check::at_most("runtime (s)", seconds, self.budget));
        }
        let passed = error.is_none() && checks.iter().all(|c| c.passed);
        CriterionOutcome { id: self.id, title: self.title.into(), group: self.group, passed, seconds, budget: self.budget, error, checks }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteSummary {
    pub outcomes: Vec<CriterionOutcome>,
    pub passed: usize,
    pub failed: usize,
}

impl SuiteSummary {
    pub fn all_passed(&self) -> bool {
        self.failed == 0
    }
}

/// Criteria in `groups` (all when empty), in numerical order.
pub fn select(groups: &[Group]) -> Vec<Criterion> {
    CRITERIA.iter().filter(|c| groups.is_empty() || groups.contains(&c.group)).copied().collect()
}

/// Runs the criteria one after another, calling `report` as each finishes.
pub fn run_suite(criteria: &[Criterion], mut report: impl FnMut(&CriterionOutcome)) -> SuiteSummary {
    let outcomes: Vec<CriterionOutcome> = criteria
        .iter()
        .map(|c| {
            let o = c.run();
            report(&o);
            o
        })
        .collect();
    let passed = outcomes.iter().filter(|o| o.passed).count();
    SuiteSummary { failed: outcomes.len() - passed, passed, outcomes }
}
