use rand::Rng;
use serde_json::json;

use super::{Fault, Instance, Outcome, PREMISE_ATTEMPTS};
use crate::algebra::{AtomSet, Pair, FULL};
use crate::charge::{self, Charge};
use crate::domination::{compose_witness, dominates, graph_set, squeeze_check, Triple};
use crate::fragments::random::{random_charge, random_extension, RandomSpec, COARSE, FINE, MAX_PRODUCT_ATOMS};

/// A witness at `level` and the y-marginal of the extension it came from.
pub(super) fn drawn_witness(
    inst: &mut Instance,
    pair: &Pair<'_>,
    mu: &Charge,
    level: &str,
) -> Result<(Charge, Charge), Fault> {
    let omega = random_extension(&mut inst.rng, pair, mu)?;
    let nu = omega.marginal(pair.fragment, pair.right)?;
    Ok((omega.restrict(pair.fragment, level)?, nu))
}

/// Either a graph lift at `level`, when a random graph is measurable there,
/// or a drawn witness; paired with the right charge it is meant to force.
fn premise_witness(inst: &mut Instance, pair: &Pair<'_>, mu: &Charge, level: &str) -> Result<(Charge, Charge), Fault> {
    if inst.rng.gen_bool(0.5) {
        let map = random_map(inst, pair);
        let graph = graph_set(pair, &map);
        if pair.fragment.algebra(pair.product.id(), level)?.is_measurable(&graph) {
            let lam = charge::graph_lift(pair, mu, &graph, level)?;
            return Ok((lam, mu.pushforward_map(pair.fragment, pair.right.target(), &map)?));
        }
    }
    drawn_witness(inst, pair, mu, level)
}

/// A map from left atoms to right atoms through nonempty cells.
fn random_map(inst: &mut Instance, pair: &Pair<'_>) -> Vec<usize> {
    (0..pair.left.target_len())
        .map(|a| {
            let fiber = pair.left.fiber(a);
            pair.right.apply(fiber[inst.rng.gen_range(0..fiber.len())])
        })
        .collect()
}

/// Reflexivity through the diagonal graph, then transitivity by composing
/// two witnesses on a triple fragment.
pub(super) fn preorder(inst: &mut Instance) -> Result<Outcome, Fault> {
    let spec = RandomSpec { copies: true, ..inst.pair_spec(MAX_PRODUCT_ATOMS) };
    let f = inst.fragment("copies", spec)?;
    let pair = f.pair("xy", "x", "y")?;
    let mu = random_charge(&mut inst.rng, &f, "x", FULL)?;
    let nu = mu.transport(&f, "y")?;
    let diagonal = charge::diagonal_set(&pair, |a, b| a == b);
    let lam = charge::graph_lift(&pair, &mu, &diagonal, FULL)?;
    inst.record_charge("reflexive mu", &mu);
    let v = dominates(&pair, &mu, &nu, &lam)?;
    inst.certified_verdict(&v)?;
    inst.ensure(v.holds, || "a charge does not dominate itself through the diagonal".into())?;

    for _ in 0..PREMISE_ATTEMPTS {
        let spec = RandomSpec { triple: true, glued: true, ..inst.pair_spec(MAX_PRODUCT_ATOMS) };
        let f = inst.fragment("triple", spec)?;
        let t = Triple::default();
        let level = inst.level();
        let xy = f.pair(t.xy, "x", t.y)?;
        let yz = f.pair(t.yz, t.y, "z")?;
        let mu = random_charge(&mut inst.rng, &f, "x", FULL)?;
        let (lam1, nu) = premise_witness(inst, &xy, &mu, level)?;
        if !dominates(&xy, &mu, &nu, &lam1)?.holds {
            continue;
        }
        let (lam2, eta) = premise_witness(inst, &yz, &nu, level)?;
        if !dominates(&yz, &nu, &eta, &lam2)?.holds {
            continue;
        }
        inst.record_charge("mu", &mu);
        inst.record_charge("lambda1", &lam1);
        inst.record_charge("lambda2", &lam2);
        inst.tally(format!("composed at {level}"));
        let composition = compose_witness(&f, &t, &lam1, &lam2)?;
        inst.certified_composition(&composition)?;
        let Some(witness) = composition.witness() else {
            inst.tally("triple system infeasible");
            return Ok(Outcome::Finding("triple system infeasible on a validated fragment".into()));
        };
        let xz = f.pair(t.xz, "x", "z")?;
        let v = dominates(&xz, &mu, &eta, witness)?;
        inst.certified_verdict(&v)?;
        inst.ensure(v.holds, || "composed witness does not give domination of the composite".into())?;
        return Ok(Outcome::Pass);
    }
    Ok(Outcome::Skipped("no transitivity premise"))
}

/// Pushing a charge forward along a graph set it is lifted onto.
pub(super) fn pushforward(inst: &mut Instance) -> Result<Outcome, Fault> {
    let spec = inst.pair_spec(MAX_PRODUCT_ATOMS);
    let f = inst.fragment("fragment", spec)?;
    let pair = f.pair("xy", "x", "y")?;
    let mu = random_charge(&mut inst.rng, &f, "x", FULL)?;
    let map = random_map(inst, &pair);
    inst.record_charge("mu", &mu);
    inst.record("map", json!(map));
    let graph: AtomSet = graph_set(&pair, &map);
    let mut level = FULL;
    for l in [COARSE, FINE] {
        if f.algebra("xy", l)?.is_measurable(&graph) {
            level = l;
            break;
        }
    }
    inst.tally(format!("graph measurable at {level}"));
    let lam = charge::graph_lift(&pair, &mu, &graph, level)?;
    let nu = mu.pushforward_map(&f, "y", &map)?;
    let v = dominates(&pair, &mu, &nu, &lam)?;
    inst.certified_verdict(&v)?;
    inst.ensure(v.holds, || format!("pushforward not dominated through the graph at {level}"))?;
    Ok(Outcome::Pass)
}

/// The hull squeeze against the direct extension-space verdict.
pub(super) fn squeeze_equivalence(inst: &mut Instance) -> Result<Outcome, Fault> {
    let spec = inst.pair_spec(MAX_PRODUCT_ATOMS);
    let f = inst.fragment("fragment", spec)?;
    let pair = f.pair("xy", "x", "y")?;
    let level = inst.coarse_level();
    let mu = random_charge(&mut inst.rng, &f, "x", FULL)?;
    let (lam, marginal) = drawn_witness(inst, &pair, &mu, level)?;
    let nu = match inst.rng.gen_range(0..4) {
        0 => random_charge(&mut inst.rng, &f, "y", FULL)?,
        1 => {
            let sys = crate::domination::extension_space(&pair, &lam, &mu)?;
            let point = inst.random_member(&sys)?.expect("the drawn extension is a member");
            crate::domination::point_charge(&pair, &point)?.marginal(&f, pair.right)?
        }
        _ => marginal,
    };
    inst.record_charge("mu", &mu);
    inst.record_charge("nu", &nu);
    inst.record_charge("lambda", &lam);
    let v = dominates(&pair, &mu, &nu, &lam)?;
    inst.certified_verdict(&v)?;
    let s = squeeze_check(&pair, &mu, &nu, &lam)?;
    inst.tally(if v.holds { "dominates" } else { "does not dominate" });
    inst.ensure(s.holds == v.holds, || format!("squeeze says {}, extension space says {}", s.holds, v.holds))?;
    Ok(Outcome::Pass)
}
