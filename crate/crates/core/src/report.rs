//! Pass/fail reports produced by the verifiers.
//!
//! Verifiers never abort on a failed identity; they record it and move on so
//! the report localizes every broken axiom at once.

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::error::Result;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Check {
    pub check: String,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Report {
    pub suite: String,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn new(suite: impl Into<String>) -> Self {
        Report {
            suite: suite.into(),
            checks: Vec::new(),
        }
    }

    pub fn record(&mut self, check: impl Into<String>, passed: bool, detail: Option<String>) {
        self.checks.push(Check {
            check: check.into(),
            passed,
            detail,
        });
    }

    pub fn pass(&mut self, check: impl Into<String>) {
        self.record(check, true, None);
    }

    pub fn fail(&mut self, check: impl Into<String>, detail: impl Into<String>) {
        self.record(check, false, Some(detail.into()));
    }

    /// Records `Ok(true)` as a pass and anything else as a failure.
    pub fn record_result(&mut self, check: impl Into<String>, outcome: Result<bool>) {
        match outcome {
            Ok(true) => self.pass(check),
            Ok(false) => self.fail(check, "identity does not hold"),
            Err(e) => self.fail(check, e.to_string()),
        }
    }

    /// Records the first counterexample reported by `outcome`, if any.
    pub fn record_sampled(&mut self, check: impl Into<String>, outcome: Result<Option<String>>) {
        match outcome {
            Ok(None) => self.pass(check),
            Ok(Some(witness)) => self.fail(check, witness),
            Err(e) => self.fail(check, e.to_string()),
        }
    }

    pub fn merge(&mut self, other: Report) {
        let prefix = other.suite;
        self.checks.extend(other.checks.into_iter().map(|c| Check {
            check: format!("{prefix}: {}", c.check),
            ..c
        }));
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    /// Whether the check with this exact name exists and passed.
    pub fn check_passed(&self, name: &str) -> Option<bool> {
        self.checks
            .iter()
            .find(|c| c.check == name)
            .map(|c| c.passed)
    }

    /// Whether every check whose name starts with `prefix` passed.
    pub fn group_passed(&self, prefix: &str) -> bool {
        self.checks
            .iter()
            .filter(|c| c.check.starts_with(prefix))
            .all(|c| c.passed)
    }
}

impl Serialize for Report {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let failures: Vec<&Check> = self.failures().collect();
        let mut st = s.serialize_struct("Report", 4)?;
        st.serialize_field("suite", &self.suite)?;
        st.serialize_field("passed", &self.passed())?;
        st.serialize_field("checks", &self.checks.len())?;
        st.serialize_field("failures", &failures)?;
        st.end()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    #[test]
    fn json_shape() {
        let mut r = Report::new("demo");
        r.pass("a");
        r.record_result("b", Err(Error::NotDivisible("2".into())));
        let v = serde_json::to_value(&r).unwrap();
        assert_eq!(v["suite"], "demo");
        assert_eq!(v["passed"], false);
        assert_eq!(v["checks"], 2);
        assert_eq!(v["failures"][0]["check"], "b");
        assert!(!r.group_passed("b"));
        assert_eq!(r.check_passed("a"), Some(true));
    }
}
