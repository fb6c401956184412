use num_traits::Zero;
use rand::Rng;

use super::order::drawn_witness;
use super::preservation::member_marginal;
use super::{weights_on, Fault, Instance, Outcome, PREMISE_ATTEMPTS};
use crate::algebra::{AtomSet, Pair, FULL};
use crate::charge::{self, Charge};
use crate::domination::{
    amalgam_space, block_dirac, convex_decipher_witness, deciphers, dominates, extension_space, point_charge,
    type_dominates,
};
use crate::fragments::random::{random_charge, MAX_PRODUCT_ATOMS};
use crate::lp::{self, DEFAULT_VERTEX_BOUND};
use crate::rational::{q, Q};

/// Largest product space whose amalgam vertices are enumerated.
const VERTEX_ATOMS: usize = 8;

/// `mu(a)·nu(b)` on the least atom of each needed cell, if all exist.
fn product_charge(pair: &Pair<'_>, mu: &Charge, nu: &Charge) -> Result<Option<Charge>, Fault> {
    let mut values = vec![Q::zero(); pair.product.len()];
    for a in 0..pair.left.target_len() {
        for b in 0..pair.right.target_len() {
            let v = mu.atom_value(a)? * nu.atom_value(b)?;
            if v.is_zero() {
                continue;
            }
            let Some(&w) = pair.cell(a, b).iter().next() else { return Ok(None) };
            values[w] = v;
        }
    }
    Ok(Some(Charge::new(pair.fragment, pair.product.id(), FULL, values)?))
}

/// Every vertex of the amalgam space is an extension and a separated amalgam.
pub(super) fn containment(inst: &mut Instance) -> Result<Outcome, Fault> {
    for _ in 0..PREMISE_ATTEMPTS {
        let spec = inst.pair_spec(VERTEX_ATOMS);
        let f = inst.fragment("fragment", spec)?;
        let pair = f.pair("xy", "x", "y")?;
        let level = inst.level();
        let mu = random_charge(&mut inst.rng, &f, "x", FULL)?;
        let nu = random_charge(&mut inst.rng, &f, "y", FULL)?;
        let Some(omega) = product_charge(&pair, &mu, &nu)? else { continue };
        let lam = omega.restrict(&f, level)?;
        inst.record_charge("mu", &mu);
        inst.record_charge("lambda", &lam);
        inst.ensure(charge::is_separated_amalgam(&pair, &lam)?, || "restricted product is not an amalgam".into())?;
        let amal = amalgam_space(&pair, &lam, &mu)?;
        let ext = extension_space(&pair, &lam, &mu)?;
        let vertices = lp::enumerate_vertices(&amal, DEFAULT_VERTEX_BOUND)?;
        inst.ensure(!vertices.is_empty(), || "the product itself is missing from the amalgam space".into())?;
        let cert = lp::solve(&amal, None)?;
        inst.certified(&amal, &cert)?;
        inst.ensure(cert.is_feasible(), || "simplex misses a nonempty amalgam space".into())?;
        for v in &vertices {
            inst.ensure(ext.contains(v), || "amalgam vertex outside the extension space".into())?;
            let w = point_charge(&pair, v)?;
            inst.ensure(charge::is_separated_amalgam(&pair, &w)?, || "amalgam vertex is not separated".into())?;
        }
        inst.tally(format!("{} vertices", vertices.len()));
        return Ok(Outcome::Pass);
    }
    Ok(Outcome::Skipped("no product witness"))
}

/// With a point mass on the left, deciphering and domination agree, and type
/// domination yields domination through a single block.
pub(super) fn dirac_bridging(inst: &mut Instance) -> Result<Outcome, Fault> {
    let spec = inst.pair_spec(MAX_PRODUCT_ATOMS);
    let f = inst.fragment("fragment", spec)?;
    let pair = f.pair("xy", "x", "y")?;
    let level = inst.level();
    let p = inst.rng.gen_range(0..pair.left.target_len());
    let mu = Charge::dirac(&f, "x", p)?;
    let (lam, marginal) = drawn_witness(inst, &pair, &mu, level)?;
    let nu = match inst.rng.gen_range(0..4) {
        0 => random_charge(&mut inst.rng, &f, "y", FULL)?,
        1 => member_marginal(inst, &pair, &lam, &mu)?,
        _ => marginal,
    };
    inst.record_charge("mu", &mu);
    inst.record_charge("nu", &nu);
    inst.record_charge("lambda", &lam);
    let d = dominates(&pair, &mu, &nu, &lam)?;
    let c = deciphers(&pair, &mu, &nu, &lam)?;
    inst.certified_verdict(&d)?;
    inst.certified_verdict(&c)?;
    inst.tally(if d.holds { "dominates" } else { "does not dominate" });
    inst.ensure(d.holds == c.holds, || format!("deciphers {} against dominates {}", c.holds, d.holds))?;

    let target = inst.rng.gen_range(0..pair.right.target_len());
    if let Some(r) = type_dominates(&pair, p, target, level)? {
        inst.tally("type domination");
        let lam = block_dirac(&pair, level, r)?;
        let v = dominates(&pair, &mu, &Charge::dirac(&f, "y", target)?, &lam)?;
        inst.certified_verdict(&v)?;
        inst.ensure(v.holds, || "type domination without charge domination".into())?;
    }
    Ok(Outcome::Pass)
}

/// Conditioning an amalgam witness on a union of right blocks keeps domination.
pub(super) fn localization(inst: &mut Instance) -> Result<Outcome, Fault> {
    for _ in 0..PREMISE_ATTEMPTS {
        let spec = inst.pair_spec(MAX_PRODUCT_ATOMS);
        let f = inst.fragment("fragment", spec)?;
        let pair = f.pair("xy", "x", "y")?;
        let level = inst.coarse_level();
        let mu = random_charge(&mut inst.rng, &f, "x", FULL)?;
        let nu = random_charge(&mut inst.rng, &f, "y", FULL)?;
        let Some(omega) = product_charge(&pair, &mu, &nu)? else { continue };
        let lam = omega.restrict(&f, level)?;
        if !dominates(&pair, &mu, &nu, &lam)?.holds {
            continue;
        }
        let blocks = f.algebra("y", level)?;
        let proper = |s: &AtomSet| nu.evaluate(s).map(|m| !m.is_zero() && m != q(1, 1));
        let mut found = None;
        for _ in 0..8 {
            let chosen: Vec<usize> = (0..blocks.num_blocks()).filter(|_| inst.rng.gen_bool(0.5)).collect();
            let s: AtomSet = blocks.union_of(chosen);
            if proper(&s)? {
                found = Some(s);
                break;
            }
        }
        let Some(s) = found else { continue };
        inst.record_charge("mu", &mu);
        inst.record_charge("nu", &nu);
        inst.record_charge("lambda", &lam);
        inst.record("set", serde_json::json!(s));
        inst.ensure(charge::is_separated_amalgam(&pair, &lam)?, || "restricted product is not an amalgam".into())?;
        let pulled = pair.right.preimage(&s);
        inst.ensure(lam.algebra().is_measurable(&pulled), || "pulled-back set is not measurable".into())?;
        let v = dominates(&pair, &mu, &nu.localize(&s)?, &lam.localize(&pulled)?)?;
        inst.certified_verdict(&v)?;
        inst.tally(format!("localized at {level}"));
        inst.ensure(v.holds, || "localized witness does not give domination".into())?;
        return Ok(Outcome::Pass);
    }
    Ok(Outcome::Skipped("no localizable amalgam domination"))
}

/// Mixing two witnesses for a point mass whose targets are split by a
/// level set gives a witness for the mixed target.
pub(super) fn convex_dirac(inst: &mut Instance) -> Result<Outcome, Fault> {
    for _ in 0..PREMISE_ATTEMPTS {
        let spec = inst.pair_spec(MAX_PRODUCT_ATOMS);
        let f = inst.fragment("fragment", spec)?;
        let pair = f.pair("xy", "x", "y")?;
        let level = inst.coarse_level();
        let p = inst.rng.gen_range(0..pair.left.target_len());
        let mu = Charge::dirac(&f, "x", p)?;
        let (lam1, nu1) = drawn_witness(inst, &pair, &mu, level)?;
        if !dominates(&pair, &mu, &nu1, &lam1)?.holds {
            continue;
        }
        let (_, sep) = f.algebra("y", level)?.hulls(&nu1.support());
        let rest: Vec<usize> = pair.left.fiber(p).iter().copied().filter(|&w| !sep.contains(&pair.right.apply(w))).collect();
        if rest.is_empty() {
            continue;
        }
        let omega2 = weights_on(inst, &f, "xy", &rest)?;
        let lam2 = omega2.restrict(&f, level)?;
        let nu2 = omega2.marginal(&f, pair.right)?;
        if !dominates(&pair, &mu, &nu2, &lam2)?.holds {
            continue;
        }
        inst.record_charge("mu", &mu);
        inst.record_charge("lambda1", &lam1);
        inst.record_charge("lambda2", &lam2);
        for r in [q(1, 4), q(1, 2), q(3, 4)] {
            let lam = convex_decipher_witness(&pair, &lam1, &lam2, &r, &sep)?;
            let nu = charge::convex(&r, &nu1, &nu2)?;
            let v = dominates(&pair, &mu, &nu, &lam)?;
            let c = deciphers(&pair, &mu, &nu, &lam)?;
            inst.certified_verdict(&v)?;
            inst.certified_verdict(&c)?;
            inst.ensure(v.holds && c.holds, || format!("mixture at weight {r} is not dominated"))?;
        }
        inst.tally(format!("mixed at {level}"));
        return Ok(Outcome::Pass);
    }
    Ok(Outcome::Skipped("no split pair of witnesses"))
}
