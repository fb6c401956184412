//! Reports, their certificate evidence, and the standalone re-check.

use std::collections::BTreeMap;

use extdom::domination::DominationVerdict;
use extdom::lp::{verify, Certificate, Direction, LinearSystem};
use extdom::rational::{self, Q};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::schema::ChargeFile;

pub const SCHEMA: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Holds,
    Fails,
    Error,
}

/// What a linear certificate is claimed to show.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "claim", rename_all = "lowercase")]
pub enum Claim {
    Feasible,
    Infeasible,
    Optimum { value: String },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Range {
    pub atom: String,
    pub min: Certificate,
    pub max: Certificate,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Evidence {
    Domination {
        label: String,
        verdict: DominationVerdict,
    },
    Linear {
        label: String,
        #[serde(flatten)]
        claim: Claim,
        system: LinearSystem,
        certificate: Certificate,
    },
    /// Per-atom minima and maxima over one system; `exact` claims that
    /// every range is a single value.
    Ranges {
        label: String,
        exact: bool,
        system: LinearSystem,
        ranges: Vec<Range>,
    },
}

/// An exact number the verdict depends on, with the value it should have.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Number {
    pub name: String,
    pub value: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected: Option<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Verdict {
    pub name: String,
    pub status: Status,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub values: Vec<Number>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub charges: BTreeMap<String, ChargeFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub data: Option<Value>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub evidence: Vec<Evidence>,
}

impl Verdict {
    pub fn new(name: impl Into<String>, holds: bool) -> Self {
        Self {
            name: name.into(),
            status: if holds { Status::Holds } else { Status::Fails },
            detail: None,
            values: Vec::new(),
            charges: BTreeMap::new(),
            data: None,
            evidence: Vec::new(),
        }
    }

    pub fn error(name: impl Into<String>, detail: impl Into<String>) -> Self {
        Self { status: Status::Error, detail: Some(detail.into()), ..Self::new(name, false) }
    }

    pub fn holds(&self) -> bool {
        self.status == Status::Holds
    }

    pub fn detail(mut self, d: impl Into<String>) -> Self {
        self.detail = Some(d.into());
        self
    }

    pub fn evidence(mut self, e: Evidence) -> Self {
        self.evidence.push(e);
        self
    }

    pub fn charge(mut self, name: &str, c: ChargeFile) -> Self {
        self.charges.insert(name.into(), c);
        self
    }

    /// Records `value` against `expected`; a mismatch turns the verdict into
    /// a failure.
    pub fn expect(mut self, name: &str, value: &Q, expected: &Q) -> Self {
        if value != expected && self.status == Status::Holds {
            self.status = Status::Fails;
        }
        self.values.push(Number {
            name: name.into(),
            value: rational::format(value),
            expected: Some(rational::format(expected)),
        });
        self
    }

    pub fn value(mut self, name: &str, value: &Q) -> Self {
        self.values.push(Number { name: name.into(), value: rational::format(value), expected: None });
        self
    }

    /// Fails the verdict unless `cond` holds.
    pub fn require(mut self, cond: bool, what: &str) -> Self {
        if !cond && self.status == Status::Holds {
            self.status = Status::Fails;
            self.detail = Some(what.to_string());
        }
        self
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Timing {
    pub elapsed_ms: u128,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Report {
    pub schema: u32,
    pub command: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fragment_hash: Option<String>,
    pub holds: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub verdicts: Vec<Verdict>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub suites: Vec<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timing: Option<Timing>,
}

impl Report {
    pub fn new(command: Vec<String>) -> Self {
        Self { schema: SCHEMA, command, fragment_hash: None, holds: true, verdicts: Vec::new(), suites: Vec::new(), timing: None }
    }

    pub fn push(&mut self, v: Verdict) {
        self.holds &= v.holds();
        self.verdicts.push(v);
    }
}

/// One rejected item of a report.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Problem {
    pub verdict: String,
    pub message: String,
}

#[derive(Clone, Debug, Default)]
pub struct Audit {
    pub certificates: usize,
    pub problems: Vec<Problem>,
}

impl Audit {
    pub fn is_clean(&self) -> bool {
        self.problems.is_empty()
    }
}

fn check_direction(cert: &Certificate, want: Direction) -> Result<(), String> {
    match cert {
        Certificate::Optimal { objective, .. } if objective.direction == want => Ok(()),
        Certificate::Optimal { .. } => Err(format!("expected a {want:?} certificate")),
        _ => Err("range bound is not an optimum".into()),
    }
}

fn check_evidence(e: &Evidence, audit: &mut Audit) -> Result<(), String> {
    match e {
        Evidence::Domination { verdict, .. } => {
            audit.certificates += 1 + 2 * verdict.ranges.len();
            verdict.verify().map_err(|r| r.to_string())
        }
        Evidence::Linear { claim, system, certificate, .. } => {
            audit.certificates += 1;
            verify::check(system, certificate).map_err(|r| r.to_string())?;
            match (claim, certificate) {
                (Claim::Feasible, c) if c.is_feasible() => Ok(()),
                (Claim::Infeasible, Certificate::Infeasible { .. }) => Ok(()),
                (Claim::Optimum { value }, Certificate::Optimal { value: v, .. }) => {
                    let claimed = rational::parse(value).map_err(|e| e.to_string())?;
                    if &claimed == v {
                        Ok(())
                    } else {
                        Err(format!("claimed optimum {value} but the certificate shows {}", rational::format(v)))
                    }
                }
                (claim, _) => Err(format!("certificate does not support the claim {claim:?}")),
            }
        }
        Evidence::Ranges { exact, system, ranges, .. } => {
            let mut all_exact = true;
            for r in ranges {
                audit.certificates += 2;
                check_direction(&r.min, Direction::Min)?;
                check_direction(&r.max, Direction::Max)?;
                verify::check(system, &r.min).map_err(|e| format!("{}: {e}", r.atom))?;
                verify::check(system, &r.max).map_err(|e| format!("{}: {e}", r.atom))?;
                all_exact &= r.min.value() == r.max.value();
            }
            if all_exact == *exact {
                Ok(())
            } else {
                Err(format!("ranges claimed exact = {exact}, certificates show {all_exact}"))
            }
        }
    }
}

/// Re-checks every certificate in `report` with the standalone verifier,
/// and that each verdict's recorded numbers match their expectations.
pub fn audit(report: &Report) -> Audit {
    let mut audit = Audit::default();
    let problem = |verdict: &str, message: String| Problem { verdict: verdict.to_string(), message };
    let mut problems = Vec::new();
    if report.schema != SCHEMA {
        problems.push(problem("", format!("unsupported schema {}", report.schema)));
    }
    for v in &report.verdicts {
        for e in &v.evidence {
            if let Err(msg) = check_evidence(e, &mut audit) {
                problems.push(problem(&v.name, msg));
            }
        }
        if v.holds() {
            for val in &v.values {
                if val.expected.as_ref().is_some_and(|x| x != &val.value) {
                    problems.push(problem(&v.name, format!("{} is {} against {:?}", val.name, val.value, val.expected)));
                }
            }
        }
    }
    let all_hold = report.verdicts.iter().all(Verdict::holds)
        && report.suites.iter().all(|s| s.get("passed") == s.get("instances"));
    if all_hold != report.holds {
        problems.push(problem("", format!("report claims holds = {} but its verdicts say {all_hold}", report.holds)));
    }
    audit.problems = problems;
    audit
}
