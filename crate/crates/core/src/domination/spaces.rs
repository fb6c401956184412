//! Extension spaces, amalgam spaces and the domination verdicts over them.

use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{squeeze_algebra, AtomSet, Pair, FULL};
use crate::charge::{self, Charge};
use crate::error::{Error, Result};
use crate::lp::verify::{self, Rejected};
use crate::lp::{Certificate, Direction, LinearSystem, Objective, Prepared};
use crate::rational::{serde_opt_qvec, serde_q, Q};

fn check_inputs(pair: &Pair<'_>, lam: &Charge, mu: &Charge) -> Result<()> {
    if lam.space() != pair.product.id() {
        return Err(Error::SpaceMismatch(format!(
            "witness lives on {:?}, expected {:?}",
            lam.space(),
            pair.product.id()
        )));
    }
    if mu.space() != pair.left.target() || !mu.is_full() {
        return Err(Error::SpaceMismatch(format!(
            "left charge must be a full-level charge on {:?}",
            pair.left.target()
        )));
    }
    let f = pair.fragment;
    let pushed = lam.marginal(f, pair.left)?;
    let restricted = mu.restrict(f, lam.level())?;
    if pushed != restricted {
        return Err(Error::Inconsistent(format!(
            "x-marginal of the witness differs from the left charge at level {:?}",
            lam.level()
        )));
    }
    Ok(())
}

/// Charges on the product restricting to `lam` and projecting to `mu`.
pub fn extension_space(pair: &Pair<'_>, lam: &Charge, mu: &Charge) -> Result<LinearSystem> {
    check_inputs(pair, lam, mu)?;
    let one = Q::one();
    let mut sys = LinearSystem::new(pair.product.len());
    for (block, v) in lam.algebra().blocks().iter().zip(lam.values()) {
        sys.add_equality(block.iter().map(|&w| (w, one.clone())), v.clone());
    }
    for a in 0..pair.left.target_len() {
        sys.add_equality(pair.left.fiber(a).iter().map(|&w| (w, one.clone())), mu.atom_value(a)?.clone());
    }
    Ok(sys)
}

/// The extension space cut down to separated amalgams.
///
/// With the x-marginal pinned to `mu`, the rectangle identity on atoms,
/// `ω(cell(a, b)) = μ(a)·ω(π_y⁻¹(b))`, is linear.
pub fn amalgam_space(pair: &Pair<'_>, lam: &Charge, mu: &Charge) -> Result<LinearSystem> {
    let mut sys = extension_space(pair, lam, mu)?;
    if !charge::is_separated_amalgam(pair, lam)? {
        return Err(Error::Precondition(format!(
            "witness is not a separated amalgam at level {:?}",
            lam.level()
        )));
    }
    for b in 0..pair.right.target_len() {
        let column = pair.right.fiber(b);
        for a in 0..pair.left.target_len() {
            let m = mu.atom_value(a)?;
            let mut terms: Vec<(usize, Q)> = column.iter().map(|&w| (w, -m.clone())).collect();
            terms.extend(pair.cell(a, b).into_iter().map(|w| (w, Q::one())));
            sys.add_equality(terms, Q::zero());
        }
    }
    Ok(sys)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AtomRange {
    pub atom: String,
    #[serde(with = "serde_q")]
    pub target: Q,
    pub min: Certificate,
    pub max: Certificate,
}

impl AtomRange {
    pub fn is_exact(&self) -> bool {
        self.min.value() == Some(&self.target) && self.max.value() == Some(&self.target)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DominationVerdict {
    pub holds: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    pub witness_level: String,
    pub system: LinearSystem,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub emptiness: Option<Certificate>,
    pub ranges: Vec<AtomRange>,
    /// A member of the space whose y-marginal differs from the target.
    #[serde(default, skip_serializing_if = "Option::is_none", with = "serde_opt_qvec")]
    pub counterexample: Option<Vec<Q>>,
}

impl DominationVerdict {
    /// Re-checks every certificate against the recorded system and the
    /// verdict against the certified values, without the solver.
    pub fn verify(&self) -> Result<(), Rejected> {
        let fail = |msg: &str| Err(Rejected(msg.to_string()));
        if let Some(cert) = &self.emptiness {
            if cert.is_feasible() || self.holds || self.reason.as_deref() != Some(REASON_EMPTY) {
                return fail("emptiness certificate does not match the verdict");
            }
            return verify::check(&self.system, cert);
        }
        for r in &self.ranges {
            for (cert, dir) in [(&r.min, Direction::Min), (&r.max, Direction::Max)] {
                match cert {
                    Certificate::Optimal { objective, .. } if objective.direction == dir => {}
                    _ => return fail("range bound is not an optimum in the right direction"),
                }
                verify::check(&self.system, cert)?;
            }
        }
        if self.holds != self.ranges.iter().all(AtomRange::is_exact) {
            return fail("verdict disagrees with the certified ranges");
        }
        match &self.counterexample {
            Some(_) if self.holds => fail("a holding verdict carries a counterexample"),
            Some(point) => verify::check_point(&self.system, point),
            None if !self.holds => fail("failing verdict without a counterexample"),
            None => Ok(()),
        }
    }
}

pub const REASON_EMPTY: &str = "empty";
pub const REASON_MISMATCH: &str = "marginal-not-forced";

/// Per-y-atom min and max of `ω(π_y⁻¹(b))` over the system, compared with `nu`.
fn verdict(pair: &Pair<'_>, system: LinearSystem, nu: &Charge, level: &str) -> Result<DominationVerdict> {
    if nu.space() != pair.right.target() || !nu.is_full() {
        return Err(Error::SpaceMismatch(format!(
            "right charge must be a full-level charge on {:?}",
            pair.right.target()
        )));
    }
    let prepared = Prepared::new(&system)?;
    if !prepared.is_feasible() {
        return Ok(DominationVerdict {
            holds: false,
            reason: Some(REASON_EMPTY.into()),
            witness_level: level.to_string(),
            emptiness: Some(prepared.feasibility()),
            system,
            ranges: Vec::new(),
            counterexample: None,
        });
    }
    let n = pair.product.len();
    let ranges: Vec<AtomRange> = (0..pair.right.target_len())
        .into_par_iter()
        .map(|b| -> Result<AtomRange> {
            let fiber = pair.right.fiber(b).iter().copied();
            let min = prepared.optimize(&Objective::mass(n, fiber.clone(), Direction::Min))?;
            let max = prepared.optimize(&Objective::mass(n, fiber, Direction::Max))?;
            Ok(AtomRange {
                atom: pair.right_space().atom(b).to_string(),
                target: nu.atom_value(b)?.clone(),
                min,
                max,
            })
        })
        .collect::<Result<_>>()?;
    let bad = ranges.iter().find(|r| !r.is_exact());
    let counterexample = bad.map(|r| {
        let cert = if r.min.value() != Some(&r.target) { &r.min } else { &r.max };
        cert.point().expect("optimum carries a point").to_vec()
    });
    Ok(DominationVerdict {
        holds: bad.is_none(),
        reason: bad.map(|_| REASON_MISMATCH.to_string()),
        witness_level: level.to_string(),
        system,
        emptiness: None,
        ranges,
        counterexample,
    })
}

/// Does every extension of `lam` with x-marginal `mu` have y-marginal `nu`?
pub fn dominates(pair: &Pair<'_>, mu: &Charge, nu: &Charge, lam: &Charge) -> Result<DominationVerdict> {
    let system = extension_space(pair, lam, mu)?;
    verdict(pair, system, nu, lam.level())
}

/// Domination restricted to separated amalgams; fails with reason `empty`
/// when there are none.
pub fn deciphers(pair: &Pair<'_>, mu: &Charge, nu: &Charge, lam: &Charge) -> Result<DominationVerdict> {
    let system = amalgam_space(pair, lam, mu)?;
    verdict(pair, system, nu, lam.level())
}

#[derive(Clone, Debug, Serialize)]
pub struct SqueezeRow {
    pub atom: String,
    pub inner: Vec<usize>,
    pub outer: Vec<usize>,
    #[serde(with = "serde_q")]
    pub inner_min: Q,
    #[serde(with = "serde_q")]
    pub outer_max: Q,
    #[serde(with = "serde_q")]
    pub target: Q,
    pub exact: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct SqueezeReport {
    pub holds: bool,
    pub rows: Vec<SqueezeRow>,
}

/// Squeezes each `π_y⁻¹(b)` between its hulls in the algebra generated by
/// x-fibers and `lam`'s level, and asks whether both hulls are pinned to
/// `nu(b)` across the extension space.
///
/// This agrees with [`dominates`]: mass inside one block of that algebra can
/// be moved freely between its atoms without leaving the extension space, so
/// a block straddling `π_y⁻¹(b)` with positive mass somewhere in the space
/// breaks domination, and otherwise each y-fiber mass equals its hull masses.
pub fn squeeze_check(pair: &Pair<'_>, mu: &Charge, nu: &Charge, lam: &Charge) -> Result<SqueezeReport> {
    let system = extension_space(pair, lam, mu)?;
    let prepared = Prepared::new(&system)?;
    if !prepared.is_feasible() {
        return Ok(SqueezeReport { holds: false, rows: Vec::new() });
    }
    let squeeze = squeeze_algebra(pair.left, lam.algebra())?;
    let n = pair.product.len();
    let rows: Vec<SqueezeRow> = (0..pair.right.target_len())
        .into_par_iter()
        .map(|b| -> Result<SqueezeRow> {
            let fiber: AtomSet = pair.right.fiber(b).iter().copied().collect();
            let (inner, outer) = squeeze.hulls(&fiber);
            let value = |set: &AtomSet, dir| -> Result<Q> {
                let cert = prepared.optimize(&Objective::mass(n, set.iter().copied(), dir))?;
                Ok(cert.value().cloned().unwrap_or_else(Q::zero))
            };
            let inner_min = value(&inner, Direction::Min)?;
            let outer_max = value(&outer, Direction::Max)?;
            let target = nu.atom_value(b)?.clone();
            Ok(SqueezeRow {
                atom: pair.right_space().atom(b).to_string(),
                exact: inner_min == target && outer_max == target,
                inner: inner.into_iter().collect(),
                outer: outer.into_iter().collect(),
                inner_min,
                outer_max,
                target,
            })
        })
        .collect::<Result<_>>()?;
    Ok(SqueezeReport { holds: rows.iter().all(|r| r.exact), rows })
}

/// A full-level charge on the product from an LP point.
pub fn point_charge(pair: &Pair<'_>, point: &[Q]) -> Result<Charge> {
    Charge::new(pair.fragment, pair.product.id(), FULL, point.to_vec())
}
