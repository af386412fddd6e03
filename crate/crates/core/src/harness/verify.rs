//! Bound verification over a record stream.

use super::records::ExperimentRecord;
use std::fmt;

/// What each trial is checked against.
#[derive(Debug, Clone, PartialEq)]
pub enum BoundSpec {
    /// The `bound_ok` flag each record was written with.
    Recorded,
    /// Every trial issues at most this many queries.
    MaxQueries(u64),
    /// Every trial issues at least this many queries.
    MinQueries(u64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifySpec {
    pub bound: BoundSpec,
    pub min_success_rate: Option<f64>,
}

impl Default for VerifySpec {
    fn default() -> Self {
        VerifySpec { bound: BoundSpec::Recorded, min_success_rate: None }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct VerifyReport {
    pub checked: usize,
    pub violations: Vec<String>,
    pub warnings: Vec<String>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for w in &self.warnings {
            writeln!(f, "warning: {w}")?;
        }
        for v in &self.violations {
            writeln!(f, "violation: {v}")?;
        }
        let verdict = if self.passed() { "PASS" } else { "FAIL" };
        write!(f, "{verdict}: {} trials checked, {} violations", self.checked, self.violations.len())
    }
}

pub fn verify_bounds(records: &[ExperimentRecord], spec: &VerifySpec) -> VerifyReport {
    let mut rep = VerifyReport { checked: records.len(), ..Default::default() };
    if records.is_empty() {
        rep.warnings.push("no records; passing vacuously".into());
        return rep;
    }
    let first = &records[0];
    if records.iter().any(|r| r.searcher != first.searcher || r.n != first.n) {
        rep.warnings.push("records mix searchers or sizes".into());
    }
    for r in records {
        let bad = match spec.bound {
            BoundSpec::Recorded => (!r.bound_ok).then(|| format!("bound {} (recorded)", r.bound_cap)),
            BoundSpec::MaxQueries(m) => (r.queries_total > m).then(|| format!("cap {m}")),
            BoundSpec::MinQueries(m) => (r.queries_total < m).then(|| format!("floor {m}")),
        };
        if let Some(what) = bad {
            rep.violations.push(format!("trial {}: {} queries against {what}", r.trial, r.queries_total));
        }
    }
    if let Some(min) = spec.min_success_rate {
        let rate = records.iter().filter(|r| r.success).count() as f64 / records.len() as f64;
        if rate < min {
            rep.violations.push(format!("success rate {rate:.3} below {min}"));
        }
    }
    rep
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(trial: u64, q: u64, ok: bool) -> ExperimentRecord {
        ExperimentRecord {
            trial,
            seed: trial,
            searcher: "restricted-set".into(),
            n: 1024,
            p1: None,
            epsilon: 0.0,
            rho: 1.0,
            queries_total: q,
            queries_by_type: format!("restricted_set={q}"),
            success: true,
            found: String::new(),
            bound_cap: 33,
            bound_ok: ok,
            millis: 0,
        }
    }

    #[test]
    fn empty_passes_with_warning() {
        let rep = verify_bounds(&[], &VerifySpec::default());
        assert!(rep.passed());
        assert_eq!(rep.warnings.len(), 1);
    }

    #[test]
    fn caps_and_floors() {
        let rs = vec![rec(0, 30, true), rec(1, 33, true)];
        assert!(verify_bounds(&rs, &VerifySpec::default()).passed());
        let cap = VerifySpec { bound: BoundSpec::MaxQueries(32), min_success_rate: Some(1.0) };
        assert_eq!(verify_bounds(&rs, &cap).violations.len(), 1);
        let floor = VerifySpec { bound: BoundSpec::MinQueries(31), min_success_rate: None };
        assert!(!verify_bounds(&rs, &floor).passed());
        assert!(!verify_bounds(&[rec(0, 40, false)], &VerifySpec::default()).passed());
    }
}
