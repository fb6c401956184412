//! Constructing and transporting domination witnesses.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use serde::Serialize;

use super::spaces::{self, dominates, extension_space};
use crate::algebra::{AtomSet, Fragment, Pair, FULL};
use crate::charge::{self, Charge};
use crate::error::{Error, Result};
use crate::lp::{self, Certificate, LinearSystem};
use crate::rational::Q;

/// Names of the seven spaces of a triple fragment.
#[derive(Clone, Copy, Debug)]
pub struct Triple<'a> {
    pub xyz: &'a str,
    pub xy: &'a str,
    pub yz: &'a str,
    pub xz: &'a str,
    pub y: &'a str,
}

impl Default for Triple<'static> {
    fn default() -> Self {
        Triple { xyz: "xyz", xy: "xy", yz: "yz", xz: "xz", y: "y" }
    }
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "outcome", rename_all = "kebab-case")]
pub enum Composition {
    Composed {
        #[serde(skip)]
        witness: Charge,
        #[serde(skip)]
        triple: Charge,
        system: LinearSystem,
        certificate: Certificate,
    },
    /// The triple system has no solution; recorded rather than raised.
    Infeasible { system: LinearSystem, certificate: Certificate },
}

impl Composition {
    pub fn witness(&self) -> Option<&Charge> {
        match self {
            Composition::Composed { witness, .. } => Some(witness),
            Composition::Infeasible { .. } => None,
        }
    }

    pub fn verify(&self) -> Result<(), lp::verify::Rejected> {
        match self {
            Composition::Composed { system, certificate, .. } | Composition::Infeasible { system, certificate } => {
                lp::verify::check(system, certificate)
            }
        }
    }
}

/// Rows pinning the images of level blocks of `xyz` in `target` to `lam`.
fn image_rows(f: &Fragment, t: &Triple<'_>, lam: &Charge, sys: &mut LinearSystem) -> Result<()> {
    let level = lam.level();
    let source = f.algebra(t.xyz, level)?;
    let pr = f.projection(t.xyz, lam.space())?;
    let mut rows: BTreeMap<usize, Vec<(usize, Q)>> = BTreeMap::new();
    for (c, block) in source.blocks().iter().enumerate() {
        let target_block = lam.algebra().block_of(pr.apply(block[0]));
        if block.iter().any(|&w| lam.algebra().block_of(pr.apply(w)) != target_block) {
            return Err(Error::NotMeasurable(format!("pullbacks from {:?} at {level:?}", lam.space())));
        }
        rows.entry(target_block).or_default().push((c, Q::one()));
    }
    for (b, v) in lam.values().iter().enumerate() {
        sys.add_equality(rows.remove(&b).unwrap_or_default(), v.clone());
    }
    Ok(())
}

/// Glues `lam1` on xy and `lam2` on yz along y into a level charge on xyz and
/// returns its xz-marginal.
pub fn compose_witness(f: &Fragment, t: &Triple<'_>, lam1: &Charge, lam2: &Charge) -> Result<Composition> {
    if lam1.space() != t.xy || lam2.space() != t.yz {
        return Err(Error::SpaceMismatch(format!(
            "witnesses on {:?} and {:?}, expected {:?} and {:?}",
            lam1.space(),
            lam2.space(),
            t.xy,
            t.yz
        )));
    }
    if lam1.level() != lam2.level() {
        return Err(Error::Precondition("witnesses live at different levels".into()));
    }
    let level = lam1.level();
    let y1 = lam1.marginal(f, f.projection(t.xy, t.y)?)?;
    let y2 = lam2.marginal(f, f.projection(t.yz, t.y)?)?;
    if y1 != y2 {
        return Err(Error::Inconsistent("the two witnesses disagree on y".into()));
    }
    let algebra = f.algebra(t.xyz, level)?.clone();
    let mut system = LinearSystem::new(algebra.num_blocks());
    image_rows(f, t, lam1, &mut system)?;
    image_rows(f, t, lam2, &mut system)?;
    let certificate = lp::solve(&system, None)?;
    let Some(point) = certificate.point() else {
        return Ok(Composition::Infeasible { system, certificate });
    };
    let triple = Charge::from_parts(t.xyz, level, algebra, point.to_vec())?;
    let witness = triple.marginal(f, f.projection(t.xyz, t.xz)?)?;
    Ok(Composition::Composed { witness, triple, system, certificate })
}

/// Restricts some member of the extension space to the finer `level`.
pub fn lift_witness(pair: &Pair<'_>, lam: &Charge, mu: &Charge, level: &str) -> Result<Charge> {
    let f = pair.fragment;
    if !f.algebra(pair.product.id(), level)?.refines(lam.algebra()) {
        return Err(Error::NotNested(format!("{level:?} does not refine {:?}", lam.level())));
    }
    let sys = extension_space(pair, lam, mu)?;
    let cert = lp::solve(&sys, None)?;
    let point = cert.point().ok_or(Error::Infeasible)?;
    spaces::point_charge(pair, point)?.restrict(f, level)
}

/// A level block `r` of the product such that every atom over `p` inside `r`
/// lies over `q`, `r` sits inside the pullback of `p`'s level block, and `r`
/// meets the fiber over `p`.
pub fn type_dominates(pair: &Pair<'_>, p: usize, q: usize, level: &str) -> Result<Option<usize>> {
    let f = pair.fragment;
    let xy = f.algebra(pair.product.id(), level)?;
    let x = f.algebra(pair.left.target(), level)?;
    let home = x.block_of(p);
    for (r, block) in xy.blocks().iter().enumerate() {
        if block.iter().any(|&w| x.block_of(pair.left.apply(w)) != home) {
            continue;
        }
        let mut over_p = block.iter().filter(|&&w| pair.left.apply(w) == p).peekable();
        if over_p.peek().is_none() {
            continue;
        }
        if over_p.all(|&w| pair.right.apply(w) == q) {
            return Ok(Some(r));
        }
    }
    Ok(None)
}

/// The level charge putting all mass on block `r`.
pub fn block_dirac(pair: &Pair<'_>, level: &str, r: usize) -> Result<Charge> {
    let f = pair.fragment;
    let alg = f.algebra(pair.product.id(), level)?;
    let mut values = vec![Q::zero(); alg.num_blocks()];
    values[r] = Q::one();
    Charge::new(f, pair.product.id(), level, values)
}

/// Graph set of an atom map `x → y` inside the product: the atoms whose
/// coordinates are related by `map`.
pub fn graph_set(pair: &Pair<'_>, map: &[usize]) -> AtomSet {
    (0..pair.product.len())
        .filter(|&w| map[pair.left.apply(w)] == pair.right.apply(w))
        .collect()
}

/// Candidate witnesses tried by [`search_witness`], in order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Candidate {
    GraphLift,
    Coupling,
    Product,
}

/// Tries a short list of natural witnesses for `mu` dominating `nu` at
/// `level` and returns the first that works.
pub fn search_witness(pair: &Pair<'_>, mu: &Charge, nu: &Charge, level: &str) -> Result<Option<(Candidate, Charge)>> {
    let f = pair.fragment;
    let mut candidates: Vec<(Candidate, Charge)> = Vec::new();
    if let Some(map) = pushforward_map_onto(pair, mu, nu)? {
        let g = graph_set(pair, &map);
        if let Ok(lam) = charge::graph_lift(pair, mu, &g, level) {
            candidates.push((Candidate::GraphLift, lam));
        }
    }
    if let Some(w) = coupling(pair, mu, nu)? {
        candidates.push((Candidate::Coupling, w.restrict(f, level)?));
    }
    if let Some(w) = product(pair, mu, nu)? {
        candidates.push((Candidate::Product, w.restrict(f, level)?));
    }
    for (kind, lam) in candidates {
        if dominates(pair, mu, nu, &lam)?.holds {
            return Ok(Some((kind, lam)));
        }
    }
    Ok(None)
}

/// An atom map sending `mu` onto `nu` through nonempty cells, found greedily
/// when every positive atom of `mu` has exactly one reachable y-atom carrying
/// positive `nu` mass.
fn pushforward_map_onto(pair: &Pair<'_>, mu: &Charge, nu: &Charge) -> Result<Option<Vec<usize>>> {
    let mut map = vec![0; pair.left.target_len()];
    for (a, slot) in map.iter_mut().enumerate() {
        let reachable: AtomSet = pair.left.fiber(a).iter().map(|&w| pair.right.apply(w)).collect();
        if mu.atom_value(a)?.is_zero() {
            *slot = *reachable.iter().next().expect("fibers of a surjection are nonempty");
            continue;
        }
        let positive: Vec<usize> = reachable.into_iter().filter(|&b| !nu.atom_value(b).map_or(true, Q::is_zero)).collect();
        let [b] = positive[..] else { return Ok(None) };
        *slot = b;
    }
    let pushed = mu.pushforward_map(pair.fragment, pair.right.target(), &map)?;
    Ok((pushed == *nu).then_some(map))
}

/// A basic solution of the coupling system `π_x ω = mu`, `π_y ω = nu`.
fn coupling(pair: &Pair<'_>, mu: &Charge, nu: &Charge) -> Result<Option<Charge>> {
    let mut sys = LinearSystem::new(pair.product.len());
    for a in 0..pair.left.target_len() {
        sys.add_equality(pair.left.fiber(a).iter().map(|&w| (w, Q::one())), mu.atom_value(a)?.clone());
    }
    for b in 0..pair.right.target_len() {
        sys.add_equality(pair.right.fiber(b).iter().map(|&w| (w, Q::one())), nu.atom_value(b)?.clone());
    }
    let cert = lp::solve(&sys, None)?;
    cert.point().map(|p| spaces::point_charge(pair, p)).transpose()
}

/// `mu(a)·nu(b)` on the least atom of each cell, when every needed cell exists.
fn product(pair: &Pair<'_>, mu: &Charge, nu: &Charge) -> Result<Option<Charge>> {
    let mut values = vec![Q::zero(); pair.product.len()];
    for a in 0..pair.left.target_len() {
        let ma = mu.atom_value(a)?;
        if ma.is_zero() {
            continue;
        }
        for b in 0..pair.right.target_len() {
            let nb = nu.atom_value(b)?;
            if nb.is_zero() {
                continue;
            }
            let Some(&w) = pair.cell(a, b).iter().next() else { return Ok(None) };
            values[w] = ma * nb;
        }
    }
    Ok(Some(Charge::new(pair.fragment, pair.product.id(), FULL, values)?))
}
