//! Seeded property batteries over generated instances.
//!
//! Each instance draws everything from its own seed, derived from the suite
//! seed and the instance index, so instances run in any order and on any
//! number of threads with identical results.

mod amalgam;
mod extension;
mod order;
mod preservation;

use std::collections::BTreeMap;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::algebra::{Fragment, FULL};
use crate::charge::Charge;
use crate::error::{Error, Result};
use crate::fragments::random::{self, RandomSpec, COARSE, FINE, MAX_FACTOR_ATOMS, MAX_PRODUCT_ATOMS};
use crate::lp::{self, verify::Rejected, Certificate, Direction, LinearSystem, Objective, Prepared};
use crate::rational::{format, Q};

/// How many fresh draws an instance makes before giving up on its premise.
pub const PREMISE_ATTEMPTS: usize = 200;

pub const DEFAULT_MAX_ATOMS: usize = 6;

type Battery = fn(&mut Instance) -> Result<Outcome, Fault>;

const BATTERIES: &[(&str, Battery)] = &[
    ("common-extension", extension::common_extension),
    ("oracle-agreement", extension::oracle_agreement),
    ("preorder", order::preorder),
    ("pushforward", order::pushforward),
    ("squeeze-equivalence", order::squeeze_equivalence),
    ("invariance", preservation::invariance),
    ("smoothness", preservation::smoothness),
    ("finite-satisfiability", preservation::finite_satisfiability),
    ("amalgam-containment", amalgam::containment),
    ("dirac-bridging", amalgam::dirac_bridging),
    ("localization", amalgam::localization),
    ("convex-dirac", amalgam::convex_dirac),
];

pub fn names() -> impl Iterator<Item = &'static str> {
    BATTERIES.iter().map(|(n, _)| *n)
}

#[derive(Clone, Copy, Debug)]
pub struct SuiteConfig {
    pub seed: u64,
    pub instances: usize,
    pub max_atoms: usize,
}

/// What an instance ended with, short of a violated property.
pub(crate) enum Outcome {
    Pass,
    /// Worth recording but neither a pass nor a failure.
    Finding(String),
    /// The premise never held within [`PREMISE_ATTEMPTS`] draws.
    Skipped(&'static str),
}

pub(crate) enum Fault {
    Violated(String),
    Error(Error),
    Certificate(Rejected),
}

impl From<Error> for Fault {
    fn from(e: Error) -> Self {
        Fault::Error(e)
    }
}

impl From<Rejected> for Fault {
    fn from(e: Rejected) -> Self {
        Fault::Certificate(e)
    }
}

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Failed,
    Finding,
}

#[derive(Clone, Debug, Serialize)]
pub struct InstanceRecord {
    pub index: usize,
    pub seed: u64,
    pub status: Status,
    pub detail: String,
    /// Everything drawn by the instance, enough to rebuild it by hand.
    pub instance: Value,
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteStats {
    pub name: String,
    pub seed: u64,
    pub max_atoms: usize,
    pub instances: usize,
    pub passed: usize,
    pub failed: usize,
    pub findings: usize,
    pub skipped: usize,
    /// Individual assertions evaluated across all instances.
    pub checks: usize,
    /// Certificates re-checked by the independent verifier.
    pub certificates: usize,
    pub tallies: BTreeMap<String, usize>,
    pub records: Vec<InstanceRecord>,
}

impl SuiteStats {
    pub fn all_passed(&self) -> bool {
        self.passed == self.instances
    }
}

/// Per-instance state handed to a battery.
pub(crate) struct Instance {
    pub rng: ChaCha8Rng,
    pub max_atoms: usize,
    trace: serde_json::Map<String, Value>,
    checks: usize,
    certificates: usize,
    tallies: BTreeMap<String, usize>,
}

impl Instance {
    fn new(seed: u64, max_atoms: usize) -> Self {
        Self {
            rng: random::rng(seed),
            max_atoms,
            trace: serde_json::Map::new(),
            checks: 0,
            certificates: 0,
            tallies: BTreeMap::new(),
        }
    }

    pub fn ensure(&mut self, cond: bool, what: impl FnOnce() -> String) -> Result<(), Fault> {
        self.checks += 1;
        if cond {
            Ok(())
        } else {
            Err(Fault::Violated(what()))
        }
    }

    pub fn certified(&mut self, sys: &LinearSystem, cert: &Certificate) -> Result<(), Fault> {
        self.certificates += 1;
        lp::verify::check(sys, cert)?;
        Ok(())
    }

    pub fn certified_verdict(&mut self, v: &crate::domination::DominationVerdict) -> Result<(), Fault> {
        self.certificates += 1 + 2 * v.ranges.len();
        v.verify()?;
        Ok(())
    }

    pub fn certified_composition(&mut self, c: &crate::domination::Composition) -> Result<(), Fault> {
        self.certificates += 1;
        c.verify()?;
        Ok(())
    }

    pub fn tally(&mut self, key: impl Into<String>) {
        *self.tallies.entry(key.into()).or_default() += 1;
    }

    pub fn record(&mut self, key: &str, value: Value) {
        self.trace.insert(key.to_string(), value);
    }

    pub fn record_charge(&mut self, key: &str, c: &Charge) {
        self.record(key, charge_json(c));
    }

    /// Fresh pair-fragment bounds within the instance size limit.
    pub fn pair_spec(&mut self, xy_cap: usize) -> RandomSpec {
        let n = self.max_atoms.clamp(2, MAX_FACTOR_ATOMS);
        let x = self.rng.gen_range(2..=n);
        let y = self.rng.gen_range(2..=n);
        let hi = (x * y).min(2 * n).min(xy_cap).min(MAX_PRODUCT_ATOMS).max(x.max(y));
        RandomSpec {
            seed: self.rng.gen(),
            x_atoms: x,
            y_atoms: y,
            xy_atoms: self.rng.gen_range(x.max(y)..=hi),
            ..RandomSpec::default()
        }
    }

    pub fn fragment(&mut self, key: &str, spec: RandomSpec) -> Result<Fragment, Fault> {
        self.record(key, serde_json::to_value(&spec).expect("spec serializes"));
        Ok(random::build(&spec)?)
    }

    pub fn level(&mut self) -> &'static str {
        [COARSE, FINE, FULL][self.rng.gen_range(0..3)]
    }

    pub fn coarse_level(&mut self) -> &'static str {
        [COARSE, FINE][self.rng.gen_range(0..2)]
    }

    /// A vertex of `sys` maximizing a random objective.
    pub fn random_member(&mut self, sys: &LinearSystem) -> Result<Option<Vec<Q>>, Fault> {
        let coeffs = (0..sys.num_vars).map(|_| Q::from_integer(self.rng.gen_range(-5i64..=5).into())).collect();
        let cert = Prepared::new(sys)?.optimize(&Objective::new(coeffs, Direction::Max))?;
        self.certified(sys, &cert)?;
        Ok(cert.point().map(<[Q]>::to_vec))
    }
}

/// Random full-level weights on `atoms` of `space`, zero elsewhere.
pub(crate) fn weights_on(inst: &mut Instance, f: &Fragment, space: &str, atoms: &[usize]) -> Result<Charge, Fault> {
    let mut values = vec![Q::from_integer(0.into()); f.space(space)?.len()];
    for (&a, w) in atoms.iter().zip(random::random_weights(&mut inst.rng, atoms.len(), 6)) {
        values[a] = w;
    }
    Ok(Charge::on_atoms(f, space, values)?)
}

/// Atoms of `space` forming blocks of their own at `level`.
pub(crate) fn singleton_atoms(f: &Fragment, space: &str, level: &str) -> Result<Vec<usize>, Fault> {
    Ok(f.algebra(space, level)?.blocks().iter().filter(|b| b.len() == 1).map(|b| b[0]).collect())
}

pub fn charge_json(c: &Charge) -> Value {
    json!({
        "space": c.space(),
        "level": c.level(),
        "blocks": c.algebra().blocks(),
        "values": c.values().iter().map(format).collect::<Vec<_>>(),
    })
}

/// Seed of instance `index`, mixed so that neighbouring suite seeds do not
/// share instances.
pub fn instance_seed(seed: u64, index: usize) -> u64 {
    let mut z = seed ^ (index as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

struct Ran {
    outcome: std::result::Result<Outcome, Fault>,
    inst: Instance,
}

/// Runs the named battery on the current rayon pool.
pub fn run(name: &str, cfg: &SuiteConfig) -> Result<SuiteStats> {
    let battery = BATTERIES
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, b)| *b)
        .ok_or_else(|| Error::Recipe(format!("unknown suite {name:?}; known: {}", names().collect::<Vec<_>>().join(", "))))?;
    if cfg.max_atoms < 2 || cfg.max_atoms > MAX_FACTOR_ATOMS {
        return Err(Error::TooLarge(format!("max atoms {} outside 2..={MAX_FACTOR_ATOMS}", cfg.max_atoms)));
    }
    let runs: Vec<Ran> = (0..cfg.instances)
        .into_par_iter()
        .map(|i| {
            let mut inst = Instance::new(instance_seed(cfg.seed, i), cfg.max_atoms);
            let outcome = battery(&mut inst);
            Ran { outcome, inst }
        })
        .collect();
    let mut stats = SuiteStats {
        name: name.to_string(),
        seed: cfg.seed,
        max_atoms: cfg.max_atoms,
        instances: cfg.instances,
        passed: 0,
        failed: 0,
        findings: 0,
        skipped: 0,
        checks: 0,
        certificates: 0,
        tallies: BTreeMap::new(),
        records: Vec::new(),
    };
    for (index, Ran { outcome, inst }) in runs.into_iter().enumerate() {
        stats.checks += inst.checks;
        stats.certificates += inst.certificates;
        for (k, v) in inst.tallies {
            *stats.tallies.entry(k).or_default() += v;
        }
        let mut push = |status, detail: String| {
            stats.records.push(InstanceRecord {
                index,
                seed: instance_seed(cfg.seed, index),
                status,
                detail,
                instance: Value::Object(inst.trace.clone()),
            })
        };
        match outcome {
            Ok(Outcome::Pass) => stats.passed += 1,
            Ok(Outcome::Finding(detail)) => {
                stats.findings += 1;
                push(Status::Finding, detail);
            }
            Ok(Outcome::Skipped(reason)) => {
                stats.skipped += 1;
                *stats.tallies.entry(format!("skipped: {reason}")).or_default() += 1;
            }
            Err(fault) => {
                stats.failed += 1;
                let detail = match fault {
                    Fault::Violated(msg) => format!("violated: {msg}"),
                    Fault::Error(e) => format!("error: {e}"),
                    Fault::Certificate(e) => format!("{e}"),
                };
                push(Status::Failed, detail);
            }
        }
    }
    Ok(stats)
}
