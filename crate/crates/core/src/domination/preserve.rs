//! Invariance, smoothness and finite satisfiability, and convex witnesses.

use num_traits::{One, Signed, Zero};
use rayon::prelude::*;

use super::spaces::{self, extension_space};
use crate::algebra::{AtomSet, Automorphism, Fragment, Pair, FULL};
use crate::charge::{self, Charge};
use crate::error::{Error, Result};
use crate::lp::{self, Direction, LinearSystem, Objective, Prepared};
use crate::rational::Q;

/// An extension of `lam` with x-marginal `mu` fixed by the group generated by
/// `generators`: the orbit average of any extension.
pub fn invariant_extension(pair: &Pair<'_>, lam: &Charge, mu: &Charge, generators: &[Automorphism]) -> Result<Charge> {
    let f = pair.fragment;
    let group = crate::algebra::generate_group(generators, &f.space_sizes());
    if !mu.is_invariant(&group) {
        return Err(Error::Precondition("left charge is not invariant".into()));
    }
    if !lam.is_invariant(&group) {
        return Err(Error::Precondition("witness is not invariant".into()));
    }
    let sys = extension_space(pair, lam, mu)?;
    let cert = lp::solve(&sys, None)?;
    let start = spaces::point_charge(pair, cert.point().ok_or(Error::Infeasible)?)?;
    let weight = Q::new(1.into(), (group.len() as i64).into());
    let mut values = vec![Q::zero(); start.values().len()];
    for g in &group {
        let image = start.apply_automorphism(g)?;
        for (acc, v) in values.iter_mut().zip(image.values()) {
            *acc += v * &weight;
        }
    }
    Charge::new(f, pair.product.id(), FULL, values)
}

/// The system of full-level charges on `space` restricting to `restricted`.
pub fn restriction_system(restricted: &Charge) -> LinearSystem {
    let mut sys = LinearSystem::new(restricted.algebra().universe());
    for (block, v) in restricted.algebra().blocks().iter().zip(restricted.values()) {
        sys.add_equality(block.iter().map(|&a| (a, Q::one())), v.clone());
    }
    sys
}

/// True when `mu|_level` has exactly one extension to the full level.
pub fn is_smooth_over(f: &Fragment, mu: &Charge, level: &str) -> Result<bool> {
    let restricted = mu.restrict(f, level)?;
    let sys = restriction_system(&restricted);
    let prepared = Prepared::new(&sys)?;
    let n = sys.num_vars;
    let degenerate = (0..n)
        .into_par_iter()
        .map(|a| -> Result<bool> {
            let lo = prepared.optimize(&Objective::mass(n, [a], Direction::Min))?;
            let hi = prepared.optimize(&Objective::mass(n, [a], Direction::Max))?;
            Ok(lo.value() == hi.value())
        })
        .collect::<Result<Vec<bool>>>()?;
    Ok(degenerate.into_iter().all(|d| d))
}

/// Every atom carrying positive mass is inhabited.
pub fn is_finitely_satisfiable(mu: &Charge, inhabited: &AtomSet) -> Result<bool> {
    for (a, v) in mu.atom_values()?.iter().enumerate() {
        if v.is_positive() && !inhabited.contains(&a) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// A set containing the support of `nu1` and missing that of `nu2`.
pub fn separating_set(nu1: &Charge, nu2: &Charge) -> Result<AtomSet> {
    if nu1.space() != nu2.space() {
        return Err(Error::SpaceMismatch(format!("{:?} and {:?}", nu1.space(), nu2.space())));
    }
    let (s1, s2) = (nu1.support(), nu2.support());
    if !s1.is_disjoint(&s2) {
        return Err(Error::Precondition("supports overlap".into()));
    }
    Ok(s1)
}

/// `r·lam1 + (1−r)·lam2`, after checking that `sep` is measurable at the
/// witnesses' level on y and splits their y-marginals.
pub fn convex_decipher_witness(pair: &Pair<'_>, lam1: &Charge, lam2: &Charge, r: &Q, sep: &AtomSet) -> Result<Charge> {
    let f = pair.fragment;
    if !f.algebra(pair.right.target(), lam1.level())?.is_measurable(sep) {
        return Err(Error::NotMeasurable(format!("separating set at level {:?}", lam1.level())));
    }
    let y1 = lam1.marginal(f, pair.right)?;
    let y2 = lam2.marginal(f, pair.right)?;
    let hit1 = y1.evaluate(sep)?;
    let hit2 = y2.evaluate(sep)?;
    if !hit1.is_one() || !hit2.is_zero() {
        return Err(Error::Precondition("separating set does not split the witnesses".into()));
    }
    charge::convex(r, lam1, lam2)
}
