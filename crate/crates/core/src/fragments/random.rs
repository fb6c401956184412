//! Seeded random fragments and charges for the property suites.
//!
//! Levels are orbit partitions of two nested permutation groups acting on the
//! factor atoms, the finite picture of sets definable over a small and over a
//! larger parameter set. Orbits project onto orbits and pull back to unions
//! of orbits, so every generated fragment is shadow-closed, embedded and
//! nested by construction.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::Zero;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::algebra::{AtomSet, AtomSpace, Automorphism, Fragment, Pair, Subalgebra, UnionFind, FULL};
use crate::charge::Charge;
use crate::error::{Error, Result};
use crate::rational::Q;

/// The two generated levels, coarse then fine.
pub const COARSE: &str = "A";
pub const FINE: &str = "B";

pub const MAX_FACTOR_ATOMS: usize = 12;
pub const MAX_PRODUCT_ATOMS: usize = 96;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct RandomSpec {
    pub seed: u64,
    /// Upper bounds on the atom counts of x, y and xy. With `triple`, the
    /// factors stay within four atoms and `xy_atoms` bounds the drawn triples
    /// before any gluing.
    pub x_atoms: usize,
    pub y_atoms: usize,
    pub xy_atoms: usize,
    /// y is a copy of x and the diagonal is present.
    pub copies: bool,
    /// Adds an involution fixing every coarse block setwise.
    pub symmetric: bool,
    /// Adds inhabitation flags closed under the coarse level.
    pub inhabited: bool,
    /// Builds three factors with all pair spaces and the triple space.
    pub triple: bool,
    /// With `triple`, any two pair atoms over the same factor atom lie under
    /// a common triple atom, as in fragments of an actual theory.
    pub glued: bool,
}

impl Default for RandomSpec {
    fn default() -> Self {
        Self {
            seed: 0,
            x_atoms: 3,
            y_atoms: 3,
            xy_atoms: 6,
            copies: false,
            symmetric: false,
            inhabited: false,
            triple: false,
            glued: false,
        }
    }
}

impl RandomSpec {
    fn check(&self) -> Result<()> {
        if self.x_atoms == 0 || self.y_atoms == 0 {
            return Err(Error::Recipe("random fragments need at least one atom per factor".into()));
        }
        if self.x_atoms > MAX_FACTOR_ATOMS || self.y_atoms > MAX_FACTOR_ATOMS || self.xy_atoms > MAX_PRODUCT_ATOMS {
            return Err(Error::TooLarge(format!(
                "bounds ({}, {}, {}) exceed ({MAX_FACTOR_ATOMS}, {MAX_FACTOR_ATOMS}, {MAX_PRODUCT_ATOMS})",
                self.x_atoms, self.y_atoms, self.xy_atoms
            )));
        }
        if self.xy_atoms < self.x_atoms.max(self.y_atoms) {
            return Err(Error::Recipe("product bound must cover both factors".into()));
        }
        Ok(())
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

struct Draft {
    spaces: BTreeMap<String, Vec<String>>,
    projections: Vec<(String, String, Vec<usize>)>,
    involution: Option<BTreeMap<String, Vec<usize>>>,
    labels: BTreeMap<(&'static str, String), Vec<usize>>,
}

/// A group generator: a permutation of each factor, and whether it swaps the
/// two variants of a doubled product cell.
#[derive(Clone, Debug)]
struct Move {
    factors: Vec<Vec<usize>>,
    flip: bool,
}

struct Groups {
    fine: Vec<Move>,
    /// Contains `fine`.
    coarse: Vec<Move>,
    involution: Option<Move>,
}

fn random_involution(rng: &mut ChaCha8Rng, n: usize) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..n).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let pairs = if n >= 2 { rng.gen_range(1..=n / 2) } else { 0 };
    for p in 0..pairs {
        let (a, b) = (order[2 * p], order[2 * p + 1]);
        perm[a] = b;
        perm[b] = a;
    }
    perm
}

/// A random transposition, or the identity.
fn transposition(rng: &mut ChaCha8Rng, n: usize) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..n).collect();
    if n >= 2 && rng.gen_bool(0.7) {
        let a = rng.gen_range(0..n);
        let b = (a + rng.gen_range(1..n)) % n;
        perm.swap(a, b);
    }
    perm
}

/// A small permutation commuting with the involution `tau`.
fn commuting_swap(rng: &mut ChaCha8Rng, tau: &[usize]) -> Vec<usize> {
    let n = tau.len();
    let mut perm: Vec<usize> = (0..n).collect();
    if n == 0 {
        return perm;
    }
    let p = rng.gen_range(0..n);
    if tau[p] == p {
        let fixed: Vec<usize> = (0..n).filter(|&q| q != p && tau[q] == q).collect();
        if let Some(&q) = fixed.choose(rng) {
            perm.swap(p, q);
        }
        return perm;
    }
    let moved: Vec<usize> = (0..n).filter(|&q| tau[q] != q && q != p && q != tau[p]).collect();
    match moved.choose(rng) {
        Some(&q) if rng.gen_bool(0.5) => {
            perm.swap(p, q);
            perm.swap(tau[p], tau[q]);
        }
        _ => perm.swap(p, tau[p]),
    }
    perm
}

/// Nested generator lists; with `symmetric`, an involution in the coarse
/// group whose conjugation fixes the fine group.
fn draw_groups(rng: &mut ChaCha8Rng, sizes: &[usize], copies: bool, symmetric: bool) -> Groups {
    let involution = symmetric.then(|| {
        let mut factors: Vec<Vec<usize>> = sizes.iter().map(|&n| random_involution(rng, n)).collect();
        if copies {
            factors[1] = factors[0].clone();
        }
        Move { factors, flip: rng.gen_bool(0.5) }
    });
    let draw = |rng: &mut ChaCha8Rng, commuting: bool| {
        let mut factors: Vec<Vec<usize>> = sizes
            .iter()
            .enumerate()
            .map(|(i, &n)| match &involution {
                Some(t) if commuting => commuting_swap(rng, &t.factors[i]),
                _ => transposition(rng, n),
            })
            .collect();
        if copies {
            factors[1] = factors[0].clone();
        }
        Move { factors, flip: rng.gen_bool(0.3) }
    };
    let fine: Vec<Move> = (0..rng.gen_range(0..=2)).map(|_| draw(rng, true)).collect();
    let mut coarse = fine.clone();
    for _ in 0..rng.gen_range(1..=2) {
        coarse.push(draw(rng, false));
    }
    coarse.extend(involution.clone());
    Groups { fine, coarse, involution }
}

/// Atoms of one space: factor coordinates plus a variant index.
struct SpaceDraft {
    id: String,
    factors: Vec<usize>,
    atoms: Vec<(Vec<usize>, usize)>,
}

impl SpaceDraft {
    fn index(&self) -> BTreeMap<&(Vec<usize>, usize), usize> {
        self.atoms.iter().enumerate().map(|(i, k)| (k, i)).collect()
    }

    /// The permutation `m` induces on this space's atoms.
    fn image(&self, m: &Move) -> Vec<usize> {
        let index = self.index();
        self.atoms
            .iter()
            .map(|(coords, v)| {
                let doubled = index.contains_key(&(coords.clone(), 1));
                let moved: Vec<usize> = coords.iter().zip(&self.factors).map(|(&c, &i)| m.factors[i][c]).collect();
                let v = if m.flip && doubled { 1 - v } else { *v };
                *index.get(&(moved, v)).expect("atoms are closed under the coarse group")
            })
            .collect()
    }

    fn orbit_labels(&self, gens: &[Move]) -> Vec<usize> {
        let mut uf = UnionFind::new(self.atoms.len());
        for m in gens {
            for (w, img) in self.image(m).into_iter().enumerate() {
                uf.union(w, img);
            }
        }
        (0..self.atoms.len()).map(|w| uf.find(w)).collect()
    }
}

/// Closure of `cells` under the factor permutations of `gens`.
fn close(gens: &[Move], cells: &mut BTreeSet<Vec<usize>>, factors: &[usize]) {
    let mut todo: Vec<Vec<usize>> = cells.iter().cloned().collect();
    while let Some(c) = todo.pop() {
        for m in gens {
            let image: Vec<usize> = c.iter().zip(factors).map(|(&v, &i)| m.factors[i][v]).collect();
            if cells.insert(image.clone()) {
                todo.push(image);
            }
        }
    }
}

fn orbit(gens: &[Move], cell: Vec<usize>, factors: &[usize]) -> BTreeSet<Vec<usize>> {
    let mut set = BTreeSet::from([cell]);
    close(gens, &mut set, factors);
    set
}

/// Cells covering every factor atom, one per index of the longer factor.
fn cover(rng: &mut ChaCha8Rng, sizes: &[usize]) -> Vec<Vec<usize>> {
    let longest = sizes.iter().copied().max().unwrap_or(0);
    let orders: Vec<Vec<usize>> = sizes
        .iter()
        .map(|&n| {
            let mut o: Vec<usize> = (0..n).collect();
            o.shuffle(rng);
            o
        })
        .collect();
    (0..longest).map(|i| orders.iter().map(|o| o[i % o.len()]).collect()).collect()
}

/// Grows `cells` by whole orbits of random cells while staying within `bound`.
fn grow(rng: &mut ChaCha8Rng, gens: &[Move], sizes: &[usize], cells: &mut BTreeSet<Vec<usize>>, bound: usize) {
    let factors: Vec<usize> = (0..sizes.len()).collect();
    let target = rng.gen_range(cells.len().min(bound)..=bound.max(cells.len()));
    for _ in 0..4 * bound {
        if cells.len() >= target {
            break;
        }
        let cell: Vec<usize> = sizes.iter().map(|&n| rng.gen_range(0..n)).collect();
        if cells.contains(&cell) {
            continue;
        }
        let o = orbit(gens, cell, &factors);
        if cells.len() + o.len() <= target {
            cells.extend(o);
        }
    }
}

fn factor_names(prefix: char, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}{i}")).collect()
}

fn factor_space(id: &str, factor: usize, n: usize) -> SpaceDraft {
    SpaceDraft { id: id.into(), factors: vec![factor], atoms: (0..n).map(|a| (vec![a], 0)).collect() }
}

/// Names, projections, orbit levels and the involution for drafted spaces.
fn finish(
    spaces: Vec<(SpaceDraft, Vec<String>)>,
    projections: Vec<(String, String, Vec<usize>)>,
    groups: &Groups,
) -> Draft {
    let mut d = Draft {
        spaces: BTreeMap::new(),
        projections,
        involution: groups.involution.as_ref().map(|_| BTreeMap::new()),
        labels: BTreeMap::new(),
    };
    for (s, names) in spaces {
        d.labels.insert((COARSE, s.id.clone()), s.orbit_labels(&groups.coarse));
        d.labels.insert((FINE, s.id.clone()), s.orbit_labels(&groups.fine));
        if let (Some(t), Some(map)) = (&groups.involution, d.involution.as_mut()) {
            map.insert(s.id.clone(), s.image(t));
        }
        d.spaces.insert(s.id, names);
    }
    d
}

fn draft_pair(rng: &mut ChaCha8Rng, spec: &RandomSpec) -> Draft {
    // An involution may double the covering cells, so leave it room.
    let cap = |n: usize| if spec.symmetric { n.min((spec.xy_atoms / 2).max(1)) } else { n };
    let nx = rng.gen_range(1..=cap(spec.x_atoms)).max(2.min(cap(spec.x_atoms)));
    let ny = if spec.copies { nx } else { rng.gen_range(1..=cap(spec.y_atoms)).max(2.min(cap(spec.y_atoms))) };
    let sizes = [nx, ny];
    let factors = [0, 1];
    let base: Vec<Vec<usize>> = if spec.copies { (0..nx).map(|a| vec![a, a]).collect() } else { cover(rng, &sizes) };
    // Redraw generators whose orbits push the covering cells past the bound.
    let mut drawn = None;
    for _ in 0..20 {
        let groups = draw_groups(rng, &sizes, spec.copies, spec.symmetric);
        let mut cells: BTreeSet<Vec<usize>> = base.iter().cloned().collect();
        close(&groups.coarse, &mut cells, &factors);
        if cells.len() <= spec.xy_atoms {
            drawn = Some((groups, cells));
            break;
        }
    }
    let (groups, mut cells) = match drawn {
        Some(found) => found,
        None => {
            // The involution alone at most doubles the covering cells.
            let mut groups = draw_groups(rng, &sizes, spec.copies, spec.symmetric);
            groups.fine.clear();
            groups.coarse = groups.involution.iter().cloned().collect();
            let mut cells: BTreeSet<Vec<usize>> = base.iter().cloned().collect();
            close(&groups.coarse, &mut cells, &factors);
            (groups, cells)
        }
    };
    grow(rng, &groups.coarse, &sizes, &mut cells, spec.xy_atoms);
    // Double whole orbits of cells while there is room.
    let mut doubled: BTreeSet<Vec<usize>> = BTreeSet::new();
    let mut total = cells.len();
    for c in &cells {
        if doubled.contains(c) || !rng.gen_bool(0.3) {
            continue;
        }
        let o = orbit(&groups.coarse, c.clone(), &factors);
        if o.iter().all(|c| !doubled.contains(c)) && total + o.len() <= spec.xy_atoms {
            total += o.len();
            doubled.extend(o);
        }
    }
    let atoms: Vec<(Vec<usize>, usize)> = cells
        .iter()
        .flat_map(|c| {
            let variants = if doubled.contains(c) { 2 } else { 1 };
            (0..variants).map(move |v| (c.clone(), v))
        })
        .collect();
    let x_names = factor_names('a', nx);
    let y_names = if spec.copies { x_names.clone() } else { factor_names('b', ny) };
    let xy_names = atoms.iter().map(|(c, v)| format!("{}.{}.{v}", x_names[c[0]], y_names[c[1]])).collect();
    let projections = vec![
        ("xy".to_string(), "x".to_string(), atoms.iter().map(|(c, _)| c[0]).collect()),
        ("xy".to_string(), "y".to_string(), atoms.iter().map(|(c, _)| c[1]).collect()),
    ];
    let spaces = vec![
        (factor_space("x", 0, nx), x_names),
        (factor_space("y", 1, ny), y_names),
        (SpaceDraft { id: "xy".into(), factors: vec![0, 1], atoms }, xy_names),
    ];
    finish(spaces, projections, &groups)
}

/// Adds triples until any two pair atoms sharing a factor atom lie under a
/// common triple, keeping the set closed under `gens`.
fn glue(gens: &[Move], triples: &mut BTreeSet<Vec<usize>>) {
    let factors = [0, 1, 2];
    loop {
        let shadow = |i: usize, j: usize| -> BTreeSet<(usize, usize)> { triples.iter().map(|t| (t[i], t[j])).collect() };
        let (xy, yz, xz) = (shadow(0, 1), shadow(1, 2), shadow(0, 2));
        let mut missing: BTreeSet<Vec<usize>> = BTreeSet::new();
        for &(a, b) in &xy {
            missing.extend(yz.iter().filter(|&&(b2, _)| b2 == b).map(|&(_, c)| vec![a, b, c]));
            missing.extend(xz.iter().filter(|&&(a2, _)| a2 == a).map(|&(_, c)| vec![a, b, c]));
        }
        for &(a, c) in &xz {
            missing.extend(yz.iter().filter(|&&(_, c2)| c2 == c).map(|&(b, _)| vec![a, b, c]));
        }
        missing.retain(|t| !triples.contains(t));
        if missing.is_empty() {
            return;
        }
        triples.extend(missing);
        close(gens, triples, &factors);
    }
}

fn draft_triple(rng: &mut ChaCha8Rng, spec: &RandomSpec) -> Draft {
    let sizes: Vec<usize> = (0..3).map(|_| rng.gen_range(1..=spec.x_atoms.min(4)).max(2.min(spec.x_atoms))).collect();
    let factors = [0, 1, 2];
    let groups = draw_groups(rng, &sizes, false, false);
    let mut triples: BTreeSet<Vec<usize>> = cover(rng, &sizes).into_iter().collect();
    close(&groups.coarse, &mut triples, &factors);
    grow(rng, &groups.coarse, &sizes, &mut triples, spec.xy_atoms);
    if spec.glued {
        glue(&groups.coarse, &mut triples);
    }
    let names: Vec<Vec<String>> = ['a', 'b', 'c'].iter().zip(&sizes).map(|(&p, &n)| factor_names(p, n)).collect();
    let singles = ["x", "y", "z"];
    let mut spaces: Vec<(SpaceDraft, Vec<String>)> =
        (0..3).map(|i| (factor_space(singles[i], i, sizes[i]), names[i].clone())).collect();
    let mut projections = Vec::new();
    let triple_atoms: Vec<(Vec<usize>, usize)> = triples.iter().map(|t| (t.clone(), 0)).collect();
    for (id, l, r) in [("xy", 0, 1), ("yz", 1, 2), ("xz", 0, 2)] {
        let cells: Vec<Vec<usize>> =
            triples.iter().map(|t| vec![t[l], t[r]]).collect::<BTreeSet<_>>().into_iter().collect();
        let index: BTreeMap<&Vec<usize>, usize> = cells.iter().enumerate().map(|(i, c)| (c, i)).collect();
        let from_triples = triples.iter().map(|t| index[&vec![t[l], t[r]]]).collect();
        projections.push(("xyz".to_string(), id.to_string(), from_triples));
        projections.push((id.to_string(), singles[l].to_string(), cells.iter().map(|c| c[0]).collect()));
        projections.push((id.to_string(), singles[r].to_string(), cells.iter().map(|c| c[1]).collect()));
        let pair_names = cells.iter().map(|c| format!("{}.{}", names[l][c[0]], names[r][c[1]])).collect();
        let atoms = cells.into_iter().map(|c| (c, 0)).collect();
        spaces.push((SpaceDraft { id: id.into(), factors: vec![l, r], atoms }, pair_names));
    }
    for (i, s) in singles.iter().enumerate() {
        projections.push(("xyz".to_string(), s.to_string(), triples.iter().map(|t| t[i]).collect()));
    }
    let triple_names = triples.iter().map(|t| format!("{}.{}.{}", names[0][t[0]], names[1][t[1]], names[2][t[2]])).collect();
    spaces.push((SpaceDraft { id: "xyz".into(), factors: vec![0, 1, 2], atoms: triple_atoms }, triple_names));
    finish(spaces, projections, &groups)
}

/// Inhabitation flags closed under the coarse level: every inhabited atom of
/// a factor meets each coarse product block over it in an inhabited atom,
/// and inhabited product atoms project to inhabited atoms.
fn inhabit(rng: &mut ChaCha8Rng, f: &Fragment) -> Result<BTreeMap<String, AtomSet>> {
    let pair = f.pair("xy", "x", "y")?;
    let coarse = f.algebra("xy", COARSE)?;
    let mut flags: BTreeMap<String, AtomSet> = BTreeMap::new();
    for (id, n) in [("x", pair.left.target_len()), ("y", pair.right.target_len())] {
        let mut set: AtomSet = (0..n).filter(|_| rng.gen_bool(0.5)).collect();
        if set.is_empty() {
            set.insert(rng.gen_range(0..n));
        }
        flags.insert(id.into(), set);
    }
    flags.insert("xy".into(), AtomSet::new());
    loop {
        let mut changed = false;
        for (side, pr) in [("x", pair.left), ("y", pair.right)] {
            for a in flags[side].clone() {
                let mut by_block: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
                for &w in pr.fiber(a) {
                    by_block.entry(coarse.block_of(w)).or_default().push(w);
                }
                for atoms in by_block.values() {
                    if atoms.iter().any(|w| flags["xy"].contains(w)) {
                        continue;
                    }
                    let &w = atoms.choose(rng).expect("blocks are nonempty");
                    flags.get_mut("xy").expect("present").insert(w);
                    changed = true;
                }
            }
        }
        for w in flags["xy"].clone() {
            changed |= flags.get_mut("x").expect("present").insert(pair.left.apply(w));
            changed |= flags.get_mut("y").expect("present").insert(pair.right.apply(w));
        }
        if !changed {
            return Ok(flags);
        }
    }
}

fn assemble(d: &Draft, flags: &BTreeMap<String, AtomSet>) -> Result<Fragment> {
    let mut b = Fragment::builder();
    for (id, names) in &d.spaces {
        b = b.space(AtomSpace::new(id.clone(), names.clone())?);
    }
    for (src, tgt, map) in &d.projections {
        b = b.projection(src, tgt, map.clone());
    }
    for ((level, space), labels) in &d.labels {
        b = b.level(level, space, Subalgebra::from_labels(labels));
    }
    if let Some(inv) = &d.involution {
        b = b.automorphism(Automorphism::new(inv.clone()));
    }
    for (space, set) in flags {
        b = b.inhabited(space, set.clone());
    }
    b.build()
}

/// A valid random fragment; deterministic per spec.
pub fn build(spec: &RandomSpec) -> Result<Fragment> {
    spec.check()?;
    let mut rng = rng(spec.seed);
    let d = if spec.triple { draft_triple(&mut rng, spec) } else { draft_pair(&mut rng, spec) };
    let f = assemble(&d, &BTreeMap::new())?;
    if !spec.inhabited || spec.triple {
        return Ok(f);
    }
    let flags = inhabit(&mut rng, &f)?;
    assemble(&d, &flags)
}

/// Random weights with small denominators, some of them zero.
pub fn random_weights(rng: &mut impl Rng, n: usize, max_weight: u32) -> Vec<Q> {
    loop {
        let w: Vec<u32> = (0..n)
            .map(|_| if rng.gen_bool(0.3) { 0 } else { rng.gen_range(1..=max_weight) })
            .collect();
        let total: u32 = w.iter().sum();
        if total > 0 {
            return w.into_iter().map(|v| Q::new(v.into(), total.into())).collect();
        }
    }
}

/// A random charge on `space` at `level`.
pub fn random_charge(rng: &mut impl Rng, f: &Fragment, space: &str, level: &str) -> Result<Charge> {
    let n = f.algebra(space, level)?.num_blocks();
    Charge::new(f, space, level, random_weights(rng, n, 6))
}

/// A random full-level charge on the product with x-marginal `mu`.
pub fn random_extension(rng: &mut impl Rng, pair: &Pair<'_>, mu: &Charge) -> Result<Charge> {
    let mut values = vec![Q::zero(); pair.product.len()];
    for a in 0..pair.left.target_len() {
        let mass = mu.atom_value(a)?;
        if mass.is_zero() {
            continue;
        }
        let fiber = pair.left.fiber(a);
        for (&w, share) in fiber.iter().zip(random_weights(rng, fiber.len(), 4)) {
            values[w] = mass * share;
        }
    }
    Charge::new(pair.fragment, pair.product.id(), FULL, values)
}
