//! Builders for the concrete fragments: dense order, Presburger arithmetic,
//! an ordered equivalence relation, and seeded random fragments.

mod build;
pub mod dlo;
pub mod oer;
pub mod presburger;
pub mod random;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::algebra::{AtomSet, Fragment};
use crate::charge::Charge;
use crate::error::{Error, Result};
use crate::rational::{self, Q};

pub use presburger::{End, Presburger, PresburgerSpec};
pub use random::RandomSpec;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NamedSet {
    pub space: String,
    pub atoms: AtomSet,
}

/// A built fragment with the charges and sets its construction singles out.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub name: String,
    pub fragment: Fragment,
    pub charges: BTreeMap<String, Charge>,
    pub sets: BTreeMap<String, NamedSet>,
}

impl Scenario {
    pub fn new(name: &str, fragment: Fragment) -> Self {
        Self { name: name.into(), fragment, charges: BTreeMap::new(), sets: BTreeMap::new() }
    }

    pub fn add_charge(&mut self, name: &str, c: Charge) {
        self.charges.insert(name.into(), c);
    }

    pub fn add_set(&mut self, name: &str, space: &str, atoms: AtomSet) {
        self.sets.insert(name.into(), NamedSet { space: space.into(), atoms });
    }

    pub fn charge(&self, name: &str) -> Result<&Charge> {
        self.charges
            .get(name)
            .ok_or_else(|| Error::Precondition(format!("scenario has no charge {name:?}")))
    }

    pub fn set(&self, name: &str) -> Result<&AtomSet> {
        self.sets
            .get(name)
            .map(|s| &s.atoms)
            .ok_or_else(|| Error::Precondition(format!("scenario has no set {name:?}")))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PresburgerRecipe {
    pub base: Vec<i64>,
    pub moduli: Vec<u32>,
    /// Residue of the new parameter `b`; without one the fragment has no
    /// nonstandard parameter.
    pub new_residue: Option<u32>,
    /// Residue distributions, as rational strings indexed by residue.
    #[serde(default)]
    pub mu: Option<Vec<String>>,
    #[serde(default)]
    pub nu: Option<Vec<String>>,
    #[serde(default)]
    pub eta: Option<Vec<String>>,
}

impl Default for PresburgerRecipe {
    fn default() -> Self {
        Self { base: vec![-1, 1], moduli: vec![2, 3], new_residue: Some(0), mu: None, nu: None, eta: None }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum FragmentRecipe {
    Dlo { params: Vec<String> },
    Presburger(PresburgerRecipe),
    Oer { k: usize },
    Random(RandomSpec),
}

/// Residue distributions used when a recipe leaves them out: uniform for
/// `mu`, increasing weights for `nu`, decreasing for `eta`.
fn default_distribution(which: &str, l: usize) -> Vec<Q> {
    let weights: Vec<i64> = match which {
        "mu" => vec![1; l],
        "nu" => (1..=l as i64).collect(),
        _ => (1..=l as i64).rev().collect(),
    };
    let total: i64 = weights.iter().sum();
    weights.into_iter().map(|w| rational::q(w, total)).collect()
}

fn parse_distribution(given: &Option<Vec<String>>, which: &str, l: usize) -> Result<Vec<Q>> {
    match given {
        None => Ok(default_distribution(which, l)),
        Some(v) => v.iter().map(|s| rational::parse(s)).collect(),
    }
}

/// The residue distributions of a Presburger recipe, in the order mu, nu, eta.
pub fn presburger_distributions(recipe: &PresburgerRecipe, modulus: u32) -> Result<[Vec<Q>; 3]> {
    let l = modulus as usize;
    Ok([
        parse_distribution(&recipe.mu, "mu", l)?,
        parse_distribution(&recipe.nu, "nu", l)?,
        parse_distribution(&recipe.eta, "eta", l)?,
    ])
}

pub fn build_dlo(params: &[Q]) -> Result<Scenario> {
    dlo::build(params)
}

/// The Presburger fragment with `mu`, `nu` at +∞ on x and y, the witness
/// `lambda` on xy, and `eta` at −∞ on z.
pub fn build_presburger(recipe: &PresburgerRecipe) -> Result<(Presburger, [Vec<Q>; 3])> {
    let spec = PresburgerSpec {
        base: recipe.base.clone(),
        moduli: recipe.moduli.clone(),
        new_residue: recipe.new_residue,
    };
    let mut p = presburger::build(&spec)?;
    let dists = presburger_distributions(recipe, p.modulus)?;
    let [mu_d, nu_d, eta_d] = &dists;
    let mu = p.at_end("x", End::Plus, mu_d)?;
    let nu = p.at_end("y", End::Plus, nu_d)?;
    let eta = p.at_end("z", End::Minus, eta_d)?;
    let lambda = p.end_witness("xy", End::Plus, mu_d, nu_d)?;
    let s = &mut p.scenario;
    s.add_charge("mu", mu);
    s.add_charge("nu", nu);
    s.add_charge("eta", eta);
    s.add_charge("lambda", lambda);
    let positive = p.positive();
    p.scenario.add_set("x>0", "x", positive);
    Ok((p, dists))
}

pub fn build_oer(k: usize) -> Result<Scenario> {
    oer::build(k)
}

pub fn build_random(spec: &RandomSpec) -> Result<Scenario> {
    Ok(Scenario::new("random", random::build(spec)?))
}

/// Builds any recipe into a scenario.
pub fn build_recipe(recipe: &FragmentRecipe) -> Result<Scenario> {
    match recipe {
        FragmentRecipe::Dlo { params } => {
            let params: Vec<Q> = params.iter().map(|s| rational::parse(s)).collect::<Result<_>>()?;
            build_dlo(&params)
        }
        FragmentRecipe::Presburger(r) => Ok(build_presburger(r)?.0.scenario),
        FragmentRecipe::Oer { k } => build_oer(*k),
        FragmentRecipe::Random(spec) => build_random(spec),
    }
}
