use std::sync::Arc;

use num_traits::{One, Zero};
use rand::Rng;
use serde_json::json;

use super::{Fault, Instance, Outcome};
use crate::algebra::{AtomSet, Subalgebra, FULL};
use crate::charge::Charge;
use crate::domination::{
    common_extension_check, extend_with_value, extension_range, extension_space, subset_scan, value_system,
};
use crate::error::Error;
use crate::fragments::random::{random_charge, random_extension, random_weights, COARSE};
use crate::lp::{self, Direction, LinearSystem, Objective, Prepared, DEFAULT_VERTEX_BOUND};
use crate::rational::{format, q, Q};

/// Largest space on which the subset scan serves as the oracle.
const SCAN_ATOMS: usize = 5;

fn random_partition(inst: &mut Instance, n: usize) -> Subalgebra {
    let k = inst.rng.gen_range(1..=n);
    let labels: Vec<usize> = (0..n).map(|_| inst.rng.gen_range(0..k)).collect();
    Subalgebra::from_labels(&labels)
}

fn block_charge(inst: &mut Instance, level: &str, alg: Subalgebra) -> Result<Charge, Fault> {
    let values = random_weights(&mut inst.rng, alg.num_blocks(), 6);
    Ok(Charge::from_parts("x", level, Arc::new(alg), values)?)
}

/// Common extensions against the hull condition and the subset scan, then
/// the range of values a new set can take.
pub(super) fn common_extension(inst: &mut Instance) -> Result<Outcome, Fault> {
    let n = inst.rng.gen_range(1..=inst.max_atoms);
    let (p1, p2) = (random_partition(inst, n), random_partition(inst, n));
    let consistent = inst.rng.gen_bool(0.5);
    let (m1, m2) = if consistent {
        let full = Charge::from_parts("x", FULL, Arc::new(Subalgebra::discrete(n)), random_weights(&mut inst.rng, n, 6))?;
        inst.record_charge("base", &full);
        (full.restrict_to("P", Arc::new(p1))?, full.restrict_to("Q", Arc::new(p2))?)
    } else {
        (block_charge(inst, "P", p1)?, block_charge(inst, "Q", p2)?)
    };
    inst.record_charge("m1", &m1);
    inst.record_charge("m2", &m2);
    inst.tally(if consistent { "drawn consistent" } else { "drawn independently" });

    let ce = common_extension_check(&m1, &m2)?;
    inst.certified(&ce.system, &ce.certificate)?;
    inst.tally(if ce.exists { "extension exists" } else { "no extension" });
    if consistent {
        inst.ensure(ce.exists, || "restrictions of one charge have no common extension".into())?;
    }
    if n <= SCAN_ATOMS {
        let scan = subset_scan(&m1, &m2)?;
        inst.tally("scanned");
        inst.ensure(scan == ce.exists, || format!("subset scan says {scan}, LP says {}", ce.exists))?;
    }

    let target: AtomSet = (0..n).filter(|_| inst.rng.gen_bool(0.5)).collect();
    inst.record("target", json!(target));
    let (r1, r2) = extension_range(&m1, &target)?;
    inst.ensure(r1 <= r2, || format!("range [{}, {}] is reversed", format(&r1), format(&r2)))?;
    let two = Q::from_integer(2.into());
    for d in [r1.clone(), (&r1 + &r2) / &two, r2.clone()] {
        let e = extend_with_value(&m1, &target, &d)?;
        let hit = e.evaluate(&target)?;
        inst.ensure(hit == d, || format!("extension gives {} instead of {}", format(&hit), format(&d)))?;
        let back = e.restrict_to(m1.level(), m1.algebra().clone())?;
        inst.ensure(back == m1, || "extension does not restrict to the original".into())?;
    }
    let mut outside = vec![r2.clone() + q(1, 2)];
    if r1.is_zero() {
        outside.push(-q(1, 3));
    } else {
        outside.push(&r1 / &two);
    }
    if r2 < Q::one() {
        outside.push((&r2 + Q::one()) / &two);
    }
    for d in outside {
        let refused = matches!(extend_with_value(&m1, &target, &d), Err(Error::OutOfRange { .. }));
        inst.ensure(refused, || format!("value {} outside the range was accepted", format(&d)))?;
        let sys = value_system(&m1, &target, &d);
        let cert = lp::solve(&sys, None)?;
        inst.certified(&sys, &cert)?;
        inst.ensure(!cert.is_feasible(), || format!("no infeasibility proof for {}", format(&d)))?;
    }
    Ok(Outcome::Pass)
}

fn small_q(inst: &mut Instance) -> Q {
    q(inst.rng.gen_range(-3..=3), inst.rng.gen_range(1..=3))
}

fn random_system(inst: &mut Instance, n: usize) -> LinearSystem {
    let mut sys = LinearSystem::new(n);
    for _ in 0..inst.rng.gen_range(0..=2) {
        let terms: Vec<(usize, Q)> = (0..n).map(|j| (j, small_q(inst))).collect();
        let rhs = small_q(inst);
        sys.add_equality(terms, rhs);
    }
    for _ in 0..inst.rng.gen_range(0..=3) {
        let terms: Vec<(usize, Q)> = (0..n).map(|j| (j, small_q(inst))).collect();
        let rhs = small_q(inst);
        sys.add_inequality(terms, rhs);
    }
    for _ in 0..inst.rng.gen_range(0..=1) {
        let (a, b) = (inst.rng.gen_range(0..n), inst.rng.gen_range(0..n));
        sys.add_equality([(a, Q::one()), (b, q(inst.rng.gen_range(1..=2), 1))], Q::zero());
    }
    sys
}

/// Simplex against vertex enumeration on one system, optimizing `objectives`.
fn agree(inst: &mut Instance, sys: &LinearSystem, objectives: &[Objective]) -> Result<(), Fault> {
    let vertices = lp::enumerate_vertices(sys, DEFAULT_VERTEX_BOUND)?;
    let prepared = Prepared::new(sys)?;
    let feas = prepared.feasibility();
    inst.certified(sys, &feas)?;
    inst.ensure(feas.is_feasible() == !vertices.is_empty(), || {
        format!("simplex feasibility {} against {} vertices", feas.is_feasible(), vertices.len())
    })?;
    inst.tally(if vertices.is_empty() { "infeasible systems" } else { "feasible systems" });
    for v in &vertices {
        inst.ensure(sys.contains(v), || "enumerated vertex outside the system".into())?;
    }
    for objective in objectives {
        let cert = prepared.optimize(objective)?;
        inst.certified(sys, &cert)?;
        let oracle = lp::optimize_over_vertices(&vertices, objective);
        inst.ensure(cert.value() == oracle.as_ref(), || {
            format!(
                "simplex optimum {:?} against vertex optimum {:?}",
                cert.value().map(format),
                oracle.as_ref().map(format)
            )
        })?;
    }
    Ok(())
}

/// Simplex verdicts and optima against vertex enumeration, on a random system
/// and on the extension space of a small random fragment.
pub(super) fn oracle_agreement(inst: &mut Instance) -> Result<Outcome, Fault> {
    let n = inst.rng.gen_range(2..=inst.max_atoms.min(DEFAULT_VERTEX_BOUND));
    let sys = random_system(inst, n);
    inst.record("system", serde_json::to_value(&sys).expect("system serializes"));
    let coeffs: Vec<Q> = (0..n).map(|_| small_q(inst)).collect();
    let objectives = [Direction::Min, Direction::Max].map(|d| Objective::new(coeffs.clone(), d));
    agree(inst, &sys, &objectives)?;

    let spec = inst.pair_spec(DEFAULT_VERTEX_BOUND);
    let f = inst.fragment("fragment", spec)?;
    let pair = f.pair("xy", "x", "y")?;
    let mu = random_charge(&mut inst.rng, &f, "x", FULL)?;
    let lam = random_extension(&mut inst.rng, &pair, &mu)?.restrict(&f, COARSE)?;
    inst.record_charge("mu", &mu);
    inst.record_charge("lambda", &lam);
    let sys = extension_space(&pair, &lam, &mu)?;
    let m = pair.product.len();
    let objectives: Vec<Objective> = (0..pair.right.target_len())
        .flat_map(|b| {
            let fiber = pair.right.fiber(b).to_vec();
            [Direction::Min, Direction::Max].map(|d| Objective::mass(m, fiber.iter().copied(), d))
        })
        .collect();
    agree(inst, &sys, &objectives)?;
    Ok(Outcome::Pass)
}
