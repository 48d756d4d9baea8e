use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// One witnessed violation.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Counterexample {
    pub axiom: String,
    pub witness: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lhs: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rhs: Option<Vec<usize>>,
}

impl Counterexample {
    pub fn new(axiom: impl Into<String>, witness: Vec<String>) -> Self {
        Counterexample {
            axiom: axiom.into(),
            witness,
            lhs: None,
            rhs: None,
        }
    }

    pub fn with_sides(mut self, lhs: Vec<usize>, rhs: Vec<usize>) -> Self {
        self.lhs = Some(lhs);
        self.rhs = Some(rhs);
        self
    }
}

/// Outcome of a checker. `passed` always mirrors `counterexamples.is_empty()`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckReport {
    pub name: String,
    pub passed: bool,
    pub counterexamples: Vec<Counterexample>,
    pub stats: BTreeMap<String, u64>,
}

/// Checkers stop recording after this many counterexamples; the count keeps going.
pub const MAX_RECORDED: usize = 64;

impl CheckReport {
    pub fn new(name: impl Into<String>) -> Self {
        CheckReport {
            name: name.into(),
            passed: true,
            counterexamples: Vec::new(),
            stats: BTreeMap::new(),
        }
    }

    pub fn fail(&mut self, cx: Counterexample) {
        *self.stats.entry("violations".into()).or_insert(0) += 1;
        if self.counterexamples.len() < MAX_RECORDED {
            self.counterexamples.push(cx);
        }
        self.passed = false;
    }

    pub fn bump(&mut self, key: &str, by: u64) {
        *self.stats.entry(key.to_string()).or_insert(0) += by;
    }

    pub fn set(&mut self, key: &str, value: u64) {
        self.stats.insert(key.to_string(), value);
    }

    /// Sorts counterexamples by axiom id and witness so parallel scans report identically.
    pub fn finalize(mut self) -> Self {
        self.counterexamples.sort();
        self.passed = self.counterexamples.is_empty();
        self
    }

    pub fn merge(&mut self, other: CheckReport) {
        for (k, v) in other.stats {
            *self.stats.entry(k).or_insert(0) += v;
        }
        for cx in other.counterexamples {
            if self.counterexamples.len() < MAX_RECORDED {
                self.counterexamples.push(cx);
            }
        }
        self.passed = self.passed && other.passed;
    }

    pub fn first_failure(&self) -> Option<&Counterexample> {
        self.counterexamples.first()
    }
}
