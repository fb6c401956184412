use num_traits::{One, Zero};

use super::order::drawn_witness;
use super::{singleton_atoms, weights_on, Fault, Instance, Outcome, PREMISE_ATTEMPTS};
use crate::algebra::{squeeze_algebra, Automorphism, Pair, FULL};
use crate::charge::Charge;
use crate::domination::{
    dominates, extension_space, invariant_extension, is_finitely_satisfiable, is_smooth_over, point_charge,
};
use crate::fragments::random::{random_charge, random_extension, RandomSpec, COARSE, MAX_PRODUCT_ATOMS};
use crate::lp::{self, LinearSystem};
use crate::rational::Q;

/// The y-marginal of a random vertex of the extension space.
pub(super) fn member_marginal(inst: &mut Instance, pair: &Pair<'_>, lam: &Charge, mu: &Charge) -> Result<Charge, Fault> {
    let sys = extension_space(pair, lam, mu)?;
    let point = inst.random_member(&sys)?.ok_or(crate::error::Error::Infeasible)?;
    Ok(point_charge(pair, &point)?.marginal(pair.fragment, pair.right)?)
}

fn orbit_average(c: &Charge, group: &[Automorphism]) -> Result<Charge, Fault> {
    let weight = Q::new(1.into(), (group.len() as i64).into());
    let mut values = vec![Q::zero(); c.values().len()];
    for g in group {
        for (acc, v) in values.iter_mut().zip(c.apply_automorphism(g)?.values()) {
            *acc += v * &weight;
        }
    }
    Ok(Charge::from_parts(c.space(), c.level(), c.algebra().clone(), values)?)
}

/// Invariant left charges and witnesses force invariant right charges, and
/// the orbit average of an extension stays in the extension space.
pub(super) fn invariance(inst: &mut Instance) -> Result<Outcome, Fault> {
    for _ in 0..PREMISE_ATTEMPTS {
        let spec = RandomSpec { symmetric: true, ..inst.pair_spec(MAX_PRODUCT_ATOMS) };
        let f = inst.fragment("fragment", spec)?;
        let group = f.automorphism_group();
        if group.iter().all(Automorphism::is_identity) {
            continue;
        }
        let pair = f.pair("xy", "x", "y")?;
        let level = inst.coarse_level();
        let mu = orbit_average(&random_charge(&mut inst.rng, &f, "x", FULL)?, &group)?;
        let omega = orbit_average(&random_extension(&mut inst.rng, &pair, &mu)?, &group)?;
        let lam = omega.restrict(&f, level)?;
        let nu = member_marginal(inst, &pair, &lam, &mu)?;
        let v = dominates(&pair, &mu, &nu, &lam)?;
        if !v.holds {
            continue;
        }
        inst.certified_verdict(&v)?;
        inst.record_charge("mu", &mu);
        inst.record_charge("lambda", &lam);
        inst.record_charge("nu", &nu);
        inst.tally(format!("dominated at {level}"));
        inst.ensure(mu.is_invariant(&group) && lam.is_invariant(&group), || "averaging left a non-invariant charge".into())?;
        inst.ensure(nu.is_invariant(&group), || "dominated charge is not invariant".into())?;
        let ext = invariant_extension(&pair, &lam, &mu, f.automorphisms())?;
        inst.ensure(extension_space(&pair, &lam, &mu)?.contains(ext.values()), || {
            "orbit average left the extension space".into()
        })?;
        inst.ensure(ext.is_invariant(&group), || "orbit average is not invariant".into())?;
        return Ok(Outcome::Pass);
    }
    Ok(Outcome::Skipped("no invariant domination"))
}

/// A full-level coupling of `mu` and `nu` on the product, if one exists.
fn coupling(pair: &Pair<'_>, mu: &Charge, nu: &Charge) -> Result<Option<Charge>, Fault> {
    let mut sys = LinearSystem::new(pair.product.len());
    for a in 0..pair.left.target_len() {
        sys.add_equality(pair.left.fiber(a).iter().map(|&w| (w, Q::one())), mu.atom_value(a)?.clone());
    }
    for b in 0..pair.right.target_len() {
        sys.add_equality(pair.right.fiber(b).iter().map(|&w| (w, Q::one())), nu.atom_value(b)?.clone());
    }
    let cert = lp::solve(&sys, None)?;
    lp::verify::check(&sys, &cert)?;
    Ok(cert.point().map(|p| point_charge(pair, p)).transpose()?)
}

/// A right charge smooth over the coarse level is dominated by any left
/// charge through a coupling restricted to that level.
fn smooth_right(inst: &mut Instance) -> Result<bool, Fault> {
    for _ in 0..PREMISE_ATTEMPTS {
        let spec = inst.pair_spec(MAX_PRODUCT_ATOMS);
        let f = inst.fragment("right-smooth fragment", spec)?;
        let singles = singleton_atoms(&f, "y", COARSE)?;
        if singles.is_empty() {
            continue;
        }
        let pair = f.pair("xy", "x", "y")?;
        let nu = weights_on(inst, &f, "y", &singles)?;
        let mu = random_charge(&mut inst.rng, &f, "x", FULL)?;
        let Some(omega) = coupling(&pair, &mu, &nu)? else { continue };
        let lam = omega.restrict(&f, COARSE)?;
        inst.record_charge("right-smooth nu", &nu);
        inst.ensure(is_smooth_over(&f, &nu, COARSE)?, || "charge on singleton blocks is not smooth".into())?;
        let v = dominates(&pair, &mu, &nu, &lam)?;
        inst.certified_verdict(&v)?;
        inst.ensure(v.holds, || "smooth right charge is not dominated".into())?;
        return Ok(true);
    }
    Ok(false)
}

/// Domination by a smooth left charge gives a smooth right charge.
fn smooth_left(inst: &mut Instance) -> Result<bool, Fault> {
    for _ in 0..PREMISE_ATTEMPTS {
        let spec = inst.pair_spec(MAX_PRODUCT_ATOMS);
        let f = inst.fragment("left-smooth fragment", spec)?;
        let singles = singleton_atoms(&f, "x", COARSE)?;
        if singles.is_empty() {
            continue;
        }
        let pair = f.pair("xy", "x", "y")?;
        let mu = weights_on(inst, &f, "x", &singles)?;
        let (lam, _) = drawn_witness(inst, &pair, &mu, COARSE)?;
        let nu = member_marginal(inst, &pair, &lam, &mu)?;
        let v = dominates(&pair, &mu, &nu, &lam)?;
        if !v.holds {
            continue;
        }
        inst.certified_verdict(&v)?;
        inst.record_charge("left-smooth mu", &mu);
        inst.record_charge("left-smooth nu", &nu);
        inst.ensure(is_smooth_over(&f, &mu, COARSE)?, || "charge on singleton blocks is not smooth".into())?;
        inst.ensure(is_smooth_over(&f, &nu, COARSE)?, || "dominated charge is not smooth".into())?;
        return Ok(true);
    }
    Ok(false)
}

/// A smooth witness has smooth marginals on both sides.
fn smooth_witness(inst: &mut Instance) -> Result<bool, Fault> {
    for _ in 0..PREMISE_ATTEMPTS {
        let spec = inst.pair_spec(MAX_PRODUCT_ATOMS);
        let f = inst.fragment("smooth-witness fragment", spec)?;
        let singles = singleton_atoms(&f, "xy", COARSE)?;
        if singles.is_empty() {
            continue;
        }
        let pair = f.pair("xy", "x", "y")?;
        let omega = weights_on(inst, &f, "xy", &singles)?;
        let lam = omega.restrict(&f, COARSE)?;
        let mu = omega.marginal(&f, pair.left)?;
        let nu = omega.marginal(&f, pair.right)?;
        inst.record_charge("smooth witness", &lam);
        inst.ensure(is_smooth_over(&f, &omega, COARSE)?, || "witness on singleton blocks is not smooth".into())?;
        let v = dominates(&pair, &mu, &nu, &lam)?;
        inst.certified_verdict(&v)?;
        inst.ensure(v.holds, || "smooth witness does not give domination".into())?;
        inst.ensure(is_smooth_over(&f, &mu, COARSE)?, || "left marginal of a smooth witness is not smooth".into())?;
        inst.ensure(is_smooth_over(&f, &nu, COARSE)?, || "right marginal of a smooth witness is not smooth".into())?;
        return Ok(true);
    }
    Ok(false)
}

pub(super) fn smoothness(inst: &mut Instance) -> Result<Outcome, Fault> {
    let mut ran = 0;
    for (name, prop) in [
        ("smooth right charge", smooth_right as fn(&mut Instance) -> Result<bool, Fault>),
        ("smooth left charge", smooth_left),
        ("smooth witness", smooth_witness),
    ] {
        if prop(inst)? {
            inst.tally(format!("{name} checked"));
            ran += 1;
        } else {
            inst.tally(format!("{name} premise missing"));
        }
    }
    Ok(if ran == 0 { Outcome::Skipped("no smoothness premise") } else { Outcome::Pass })
}

/// Domination from a charge living on inhabited atoms lands on inhabited
/// atoms, and positive squeeze blocks always contain inhabited product atoms.
pub(super) fn finite_satisfiability(inst: &mut Instance) -> Result<Outcome, Fault> {
    for _ in 0..PREMISE_ATTEMPTS {
        let spec = RandomSpec { inhabited: true, ..inst.pair_spec(MAX_PRODUCT_ATOMS) };
        let f = inst.fragment("fragment", spec)?;
        let (Some(hx), Some(hy), Some(hxy)) = (f.inhabited("x"), f.inhabited("y"), f.inhabited("xy")) else {
            continue;
        };
        if hx.is_empty() {
            continue;
        }
        let pair = f.pair("xy", "x", "y")?;
        let mu = weights_on(inst, &f, "x", &hx.iter().copied().collect::<Vec<_>>())?;
        let (lam, _) = drawn_witness(inst, &pair, &mu, COARSE)?;
        let sys = extension_space(&pair, &lam, &mu)?;
        let point = inst.random_member(&sys)?.ok_or(crate::error::Error::Infeasible)?;
        let member = point_charge(&pair, &point)?;
        let nu = member.marginal(&f, pair.right)?;
        let v = dominates(&pair, &mu, &nu, &lam)?;
        if !v.holds {
            continue;
        }
        inst.certified_verdict(&v)?;
        inst.record_charge("mu", &mu);
        inst.record_charge("lambda", &lam);
        inst.record_charge("nu", &nu);
        inst.ensure(is_finitely_satisfiable(&mu, hx)?, || "left charge leaves the inhabited atoms".into())?;
        inst.ensure(is_finitely_satisfiable(&nu, hy)?, || "dominated charge is not finitely satisfiable".into())?;
        let squeeze = squeeze_algebra(pair.left, lam.algebra())?;
        for block in squeeze.blocks() {
            let mass: Q = block.iter().map(|&w| &point[w]).sum();
            if mass.is_zero() {
                continue;
            }
            inst.ensure(block.iter().any(|w| hxy.contains(w)), || {
                "positive squeeze block without an inhabited product atom".into()
            })?;
        }
        return Ok(Outcome::Pass);
    }
    Ok(Outcome::Skipped("no finitely satisfiable domination"))
}
