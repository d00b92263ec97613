use serde::Serialize;

/// Outcome of a sampled check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    /// No violation found at the stated resolution.
    Pass,
    /// A concrete counterexample was found.
    Refuted,
    /// The check could not run to a conclusion (failed hypothesis, missing data).
    Inconclusive,
}

/// A concrete counterexample (or, on passing checks, the tightest sample).
///
/// The checked inequality is `lhs <= rhs`; `gap = lhs - rhs` is positive for
/// a violation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    pub points: Vec<Vec<f64>>,
    pub index: Option<usize>,
    pub lhs: f64,
    pub rhs: f64,
}

impl Witness {
    pub fn new(points: Vec<Vec<f64>>, index: Option<usize>, lhs: f64, rhs: f64) -> Self {
        Witness {
            points,
            index,
            lhs,
            rhs,
        }
    }

    pub fn gap(&self) -> f64 {
        self.lhs - self.rhs
    }
}

/// Structured verdict of one check, possibly bundling sub-checks.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Certificate {
    pub check: String,
    pub verdict: Verdict,
    /// Set when the check's preconditions were not themselves certified.
    pub conditional: bool,
    pub witness: Option<Witness>,
    /// Named measurements (worst margin, estimated limits, sample sizes).
    pub measured: Vec<(String, f64)>,
    pub note: String,
    pub children: Vec<Certificate>,
}

impl Certificate {
    pub fn new(check: impl Into<String>, verdict: Verdict) -> Self {
        Certificate {
            check: check.into(),
            verdict,
            conditional: false,
            witness: None,
            measured: Vec::new(),
            note: String::new(),
            children: Vec::new(),
        }
    }

    pub fn pass(check: impl Into<String>) -> Self {
        Self::new(check, Verdict::Pass)
    }

    pub fn refuted(check: impl Into<String>, witness: Witness) -> Self {
        Self::new(check, Verdict::Refuted).with_witness(witness)
    }

    /// Pass iff `witness` (the worst sample) satisfies its inequality with
    /// the given slack.
    pub fn from_worst(check: impl Into<String>, worst: Option<Witness>, slack: f64) -> Self {
        match worst {
            Some(w) if w.gap() > slack => Self::refuted(check, w),
            Some(w) => Self::pass(check).with_witness(w),
            None => Self::pass(check),
        }
    }

    /// Bundle: refuted if any child is refuted, else inconclusive if any child
    /// is, else pass.
    pub fn all(check: impl Into<String>, children: Vec<Certificate>) -> Self {
        let verdict = if children.iter().any(|c| c.verdict == Verdict::Refuted) {
            Verdict::Refuted
        } else if children.iter().any(|c| c.verdict == Verdict::Inconclusive) {
            Verdict::Inconclusive
        } else {
            Verdict::Pass
        };
        let mut c = Self::new(check, verdict);
        c.children = children;
        c
    }

    pub fn with_witness(mut self, witness: Witness) -> Self {
        self.witness = Some(witness);
        self
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = note.into();
        self
    }

    pub fn measure(mut self, name: impl Into<String>, value: f64) -> Self {
        self.measured.push((name.into(), value));
        self
    }

    pub fn conditional(mut self, yes: bool) -> Self {
        self.conditional = yes;
        self
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub fn is_refuted(&self) -> bool {
        self.verdict == Verdict::Refuted
    }

    /// Value of a named measurement.
    pub fn measured(&self, name: &str) -> Option<f64> {
        self.measured.iter().find(|(k, _)| k == name).map(|(_, v)| *v)
    }

    /// Depth-first search for a sub-check by name (including `self`).
    pub fn find(&self, check: &str) -> Option<&Certificate> {
        if self.check == check {
            return Some(self);
        }
        self.children.iter().find_map(|c| c.find(check))
    }
}

/// Keeps the sample with the largest `lhs - rhs`; ties keep the first seen.
#[derive(Debug, Default)]
pub(crate) struct WorstCase {
    pub worst: Option<Witness>,
}

impl WorstCase {
    pub fn offer(&mut self, make: impl FnOnce() -> Witness, lhs: f64, rhs: f64) {
        let gap = lhs - rhs;
        let better = match &self.worst {
            None => true,
            Some(w) => gap > w.gap() || (gap.is_nan() && !w.gap().is_nan()),
        };
        if better {
            let mut w = make();
            w.lhs = lhs;
            w.rhs = rhs;
            self.worst = Some(w);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundle_verdicts() {
        let p = Certificate::pass("a");
        let r = Certificate::refuted("b", Witness::new(vec![], None, 1.0, 0.0));
        let i = Certificate::new("c", Verdict::Inconclusive);
        assert_eq!(
            Certificate::all("x", vec![p.clone(), i.clone()]).verdict,
            Verdict::Inconclusive
        );
        assert_eq!(Certificate::all("x", vec![p.clone(), r, i]).verdict, Verdict::Refuted);
        let b = Certificate::all("x", vec![p]);
        assert!(b.passed());
        assert!(b.find("a").is_some());
    }

    #[test]
    fn worst_case_keeps_first_of_ties() {
        let mut w = WorstCase::default();
        w.offer(|| Witness::new(vec![vec![1.0]], None, 0.0, 0.0), 2.0, 1.0);
        w.offer(|| Witness::new(vec![vec![2.0]], None, 0.0, 0.0), 3.0, 2.0);
        w.offer(|| Witness::new(vec![vec![3.0]], None, 0.0, 0.0), 0.0, 2.0);
        assert_eq!(w.worst.unwrap().points, vec![vec![1.0]]);
    }
}
