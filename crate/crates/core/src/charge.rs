//! Finitely additive probability measures (charges) on fragment algebras.
//!
//! A charge stores one exact value per block of its level's partition; its
//! value on any measurable set is the sum over the blocks inside it, so finite
//! additivity holds by construction.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_traits::{One, Signed, Zero};

use crate::algebra::{AtomSet, Automorphism, Fragment, Pair, Projection, Subalgebra, FULL};
use crate::error::{Error, Result};
use crate::rational::{self, Q};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Charge {
    space: String,
    level: String,
    algebra: Arc<Subalgebra>,
    values: Vec<Q>,
}

impl Charge {
    /// Checks nonnegativity and total mass one.
    pub fn from_parts(
        space: impl Into<String>,
        level: impl Into<String>,
        algebra: Arc<Subalgebra>,
        values: Vec<Q>,
    ) -> Result<Self> {
        let space = space.into();
        if values.len() != algebra.num_blocks() {
            return Err(Error::InvalidCharge(format!(
                "{} values for {} blocks on {space:?}",
                values.len(),
                algebra.num_blocks()
            )));
        }
        if values.iter().any(Signed::is_negative) {
            return Err(Error::InvalidCharge(format!("negative value on {space:?}")));
        }
        let total = rational::sum(&values);
        if !total.is_one() {
            return Err(Error::InvalidCharge(format!(
                "mass {} on {space:?} is not 1",
                rational::format(&total)
            )));
        }
        Ok(Self { space, level: level.into(), algebra, values })
    }

    pub fn new(f: &Fragment, space: &str, level: &str, values: Vec<Q>) -> Result<Self> {
        let algebra = f.algebra(space, level)?.clone();
        Self::from_parts(space, level, algebra, values)
    }

    /// A charge at the full level from per-atom values.
    pub fn on_atoms(f: &Fragment, space: &str, values: Vec<Q>) -> Result<Self> {
        Self::new(f, space, FULL, values)
    }

    pub fn dirac(f: &Fragment, space: &str, atom: usize) -> Result<Self> {
        let n = f.space(space)?.len();
        if atom >= n {
            return Err(Error::Precondition(format!("atom {atom} outside {space:?}")));
        }
        let mut values = vec![Q::zero(); n];
        values[atom] = Q::one();
        Self::on_atoms(f, space, values)
    }

    /// Equal mass on each listed atom.
    pub fn uniform(f: &Fragment, space: &str, atoms: &AtomSet) -> Result<Self> {
        let n = f.space(space)?.len();
        if atoms.is_empty() {
            return Err(Error::Precondition("uniform charge on an empty set".into()));
        }
        let share = Q::new(1.into(), (atoms.len() as i64).into());
        let mut values = vec![Q::zero(); n];
        for &a in atoms {
            values[a] = share.clone();
        }
        Self::on_atoms(f, space, values)
    }

    pub fn space(&self) -> &str {
        &self.space
    }

    pub fn level(&self) -> &str {
        &self.level
    }

    pub fn algebra(&self) -> &Arc<Subalgebra> {
        &self.algebra
    }

    pub fn values(&self) -> &[Q] {
        &self.values
    }

    pub fn block_value(&self, block: usize) -> &Q {
        &self.values[block]
    }

    pub fn is_full(&self) -> bool {
        self.algebra.is_discrete()
    }

    /// Value of a single atom; only defined when the level is discrete.
    pub fn atom_value(&self, atom: usize) -> Result<&Q> {
        if !self.is_full() {
            return Err(Error::NotMeasurable(self.level.clone()));
        }
        Ok(&self.values[self.algebra.block_of(atom)])
    }

    /// Per-atom values of a full-level charge.
    pub fn atom_values(&self) -> Result<Vec<Q>> {
        (0..self.algebra.universe())
            .map(|a| self.atom_value(a).cloned())
            .collect()
    }

    pub fn evaluate(&self, set: &AtomSet) -> Result<Q> {
        if !self.algebra.is_measurable(set) {
            return Err(Error::NotMeasurable(self.level.clone()));
        }
        Ok(rational::sum(
            self.algebra.blocks_meeting(set).iter().map(|&b| &self.values[b]),
        ))
    }

    /// Atoms of the blocks carrying positive mass.
    pub fn support(&self) -> AtomSet {
        self.algebra
            .union_of((0..self.values.len()).filter(|&b| self.values[b].is_positive()))
    }

    pub fn restrict(&self, f: &Fragment, level: &str) -> Result<Charge> {
        let coarse = f.algebra(&self.space, level)?.clone();
        self.restrict_to(level, coarse)
    }

    pub fn restrict_to(&self, level: &str, coarse: Arc<Subalgebra>) -> Result<Charge> {
        if !self.algebra.refines(&coarse) {
            return Err(Error::NotNested(format!(
                "{:?} does not refine {level:?} on {:?}",
                self.level, self.space
            )));
        }
        let mut values = vec![Q::zero(); coarse.num_blocks()];
        for (b, block) in self.algebra.blocks().iter().enumerate() {
            values[coarse.block_of(block[0])] += &self.values[b];
        }
        Ok(Charge { space: self.space.clone(), level: level.to_string(), algebra: coarse, values })
    }

    /// Image under a projection, at the same level name on the target.
    pub fn marginal(&self, f: &Fragment, pr: &Projection) -> Result<Charge> {
        if pr.source() != self.space {
            return Err(Error::SpaceMismatch(format!(
                "charge on {:?} projected along {}->{}",
                self.space,
                pr.source(),
                pr.target()
            )));
        }
        let target = f.algebra(pr.target(), &self.level)?.clone();
        self.marginal_to(pr, &self.level, target)
    }

    pub fn marginal_to(&self, pr: &Projection, level: &str, target: Arc<Subalgebra>) -> Result<Charge> {
        if !self.algebra.refines(&target.pullback(pr.map())) {
            return Err(Error::NotMeasurable(format!(
                "pullbacks of {level:?} blocks along {}->{} at {:?}",
                pr.source(),
                pr.target(),
                self.level
            )));
        }
        let mut values = vec![Q::zero(); target.num_blocks()];
        for (b, block) in self.algebra.blocks().iter().enumerate() {
            values[target.block_of(pr.apply(block[0]))] += &self.values[b];
        }
        Charge::from_parts(pr.target(), level, target, values)
    }

    /// Conditioning on a measurable set of positive mass.
    pub fn localize(&self, set: &AtomSet) -> Result<Charge> {
        let mass = self.evaluate(set)?;
        if mass.is_zero() {
            return Err(Error::ZeroMeasure);
        }
        let values = self
            .algebra
            .blocks()
            .iter()
            .zip(&self.values)
            .map(|(block, v)| {
                if set.contains(&block[0]) {
                    v / &mass
                } else {
                    Q::zero()
                }
            })
            .collect();
        Ok(Charge { values, ..self.clone() })
    }

    /// Image charge under an atom map from this space into `target`.
    pub fn pushforward_map(&self, f: &Fragment, target: &str, map: &[usize]) -> Result<Charge> {
        if !self.is_full() {
            return Err(Error::Precondition("pushforward needs a full-level charge".into()));
        }
        let n = f.space(target)?.len();
        if map.len() != self.values.len() || map.iter().any(|&b| b >= n) {
            return Err(Error::Malformed("pushforward map has the wrong shape".into()));
        }
        let mut values = vec![Q::zero(); n];
        for (a, &b) in map.iter().enumerate() {
            values[b] += &self.values[self.algebra.block_of(a)];
        }
        Charge::on_atoms(f, target, values)
    }

    pub fn apply_automorphism(&self, aut: &Automorphism) -> Result<Charge> {
        let mut values = vec![Q::zero(); self.values.len()];
        for (b, block) in self.algebra.blocks().iter().enumerate() {
            let image = self.algebra.block_of(aut.apply(&self.space, block[0]));
            values[image] += &self.values[b];
        }
        Ok(Charge { values, ..self.clone() })
    }

    pub fn is_invariant(&self, group: &[Automorphism]) -> bool {
        group
            .iter()
            .all(|g| self.apply_automorphism(g).map(|c| c == *self).unwrap_or(false))
    }

    /// Block values keyed by their atom names joined with `+` (sorted).
    /// The same charge on another space with identical atoms and partition.
    pub fn transport(&self, f: &Fragment, space: &str) -> Result<Charge> {
        let (from, to) = (f.space(&self.space)?, f.space(space)?);
        let algebra = f.algebra(space, &self.level)?;
        if from.atoms() != to.atoms() || **algebra != *self.algebra {
            return Err(Error::SpaceMismatch(format!(
                "{:?} and {space:?} differ at level {:?}",
                self.space, self.level
            )));
        }
        Ok(Charge { space: space.into(), level: self.level.clone(), algebra: algebra.clone(), values: self.values.clone() })
    }

    pub fn keyed_values(&self, f: &Fragment) -> Result<BTreeMap<String, Q>> {
        let space = f.space(&self.space)?;
        Ok(self
            .algebra
            .blocks()
            .iter()
            .zip(&self.values)
            .map(|(block, v)| (block_key(space.atoms(), block), v.clone()))
            .collect())
    }
}

pub fn block_key(atoms: &[String], block: &[usize]) -> String {
    let mut names: Vec<&str> = block.iter().map(|&a| atoms[a].as_str()).collect();
    names.sort_unstable();
    names.join("+")
}

pub fn evaluate(c: &Charge, s: &AtomSet) -> Result<Q> {
    c.evaluate(s)
}

pub fn dirac(f: &Fragment, space: &str, atom: usize) -> Result<Charge> {
    Charge::dirac(f, space, atom)
}

pub fn support(c: &Charge) -> AtomSet {
    c.support()
}

/// Blockwise `r·c1 + (1−r)·c2`.
pub fn convex(r: &Q, c1: &Charge, c2: &Charge) -> Result<Charge> {
    if r.is_negative() || *r > Q::one() {
        return Err(Error::Precondition(format!(
            "mixing weight {} outside [0,1]",
            rational::format(r)
        )));
    }
    if c1.space != c2.space || c1.algebra != c2.algebra {
        return Err(Error::SpaceMismatch(format!(
            "mixing charges on {:?}/{:?} and {:?}/{:?}",
            c1.space, c1.level, c2.space, c2.level
        )));
    }
    let s = Q::one() - r;
    let values = c1
        .values
        .iter()
        .zip(&c2.values)
        .map(|(a, b)| r * a + &s * b)
        .collect();
    Charge::from_parts(c1.space.clone(), c1.level.clone(), c1.algebra.clone(), values)
}

/// Lifts `mu` along a graph set `graph` of the product space and restricts the
/// result to `level`.
///
/// For each left atom with positive mass, the mass is put on the least atom of
/// the graph fiber over it; that fiber must be nonempty and project to a single
/// right atom.
pub fn graph_lift(pair: &Pair<'_>, mu: &Charge, graph: &AtomSet, level: &str) -> Result<Charge> {
    let f = pair.fragment;
    if mu.space() != pair.left.target() {
        return Err(Error::SpaceMismatch(format!(
            "graph lift of a charge on {:?} into {:?}",
            mu.space(),
            pair.product.id()
        )));
    }
    let mut values = vec![Q::zero(); pair.product.len()];
    for a in 0..pair.left.target_len() {
        let mass = mu.atom_value(a)?;
        if mass.is_zero() {
            continue;
        }
        let fiber: Vec<usize> = pair.left.fiber(a).iter().copied().filter(|w| graph.contains(w)).collect();
        let Some(&first) = fiber.first() else {
            return Err(Error::Precondition(format!(
                "graph has no point over {:?}",
                pair.left_space().atom(a)
            )));
        };
        let b = pair.right.apply(first);
        if fiber.iter().any(|&w| pair.right.apply(w) != b) {
            return Err(Error::Precondition(format!(
                "graph is not functional over {:?}",
                pair.left_space().atom(a)
            )));
        }
        values[first] += mass;
    }
    let lifted = Charge::on_atoms(f, pair.product.id(), values)?;
    lifted.restrict(f, level)
}

/// The xy-atoms lying on the diagonal, given the left/right atom correspondence.
pub fn diagonal_set(pair: &Pair<'_>, same: impl Fn(usize, usize) -> bool) -> AtomSet {
    (0..pair.product.len())
        .filter(|&w| same(pair.left.apply(w), pair.right.apply(w)))
        .collect()
}

/// Rectangles over the blocks of `w`'s level on both factors that break the
/// product identity, as `(left block, right block)` pairs.
///
/// Checking rectangles of blocks is enough: both sides of the identity are
/// finitely additive in each argument separately, so agreement on block
/// rectangles extends to every measurable rectangle.
pub fn amalgam_defects(pair: &Pair<'_>, w: &Charge) -> Result<Vec<(usize, usize)>> {
    let f = pair.fragment;
    let mx = w.marginal(f, pair.left)?;
    let my = w.marginal(f, pair.right)?;
    let (ax, ay) = (mx.algebra().clone(), my.algebra().clone());
    let mut rect: BTreeMap<(usize, usize), Q> = BTreeMap::new();
    for (b, block) in w.algebra().blocks().iter().enumerate() {
        let key = (ax.block_of(pair.left.apply(block[0])), ay.block_of(pair.right.apply(block[0])));
        let mixed = block.iter().any(|&v| {
            (ax.block_of(pair.left.apply(v)), ay.block_of(pair.right.apply(v))) != key
        });
        if mixed {
            return Err(Error::NotMeasurable(format!(
                "rectangles at level {:?}",
                w.level()
            )));
        }
        *rect.entry(key).or_insert_with(Q::zero) += &w.values()[b];
    }
    let mut defects = Vec::new();
    for i in 0..ax.num_blocks() {
        for j in 0..ay.num_blocks() {
            let lhs = rect.get(&(i, j)).cloned().unwrap_or_else(Q::zero);
            if lhs != &mx.values()[i] * &my.values()[j] {
                defects.push((i, j));
            }
        }
    }
    Ok(defects)
}

pub fn is_separated_amalgam(pair: &Pair<'_>, w: &Charge) -> Result<bool> {
    Ok(amalgam_defects(pair, w)?.is_empty())
}
