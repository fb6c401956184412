//! Finite Boolean algebras presented by their atoms.
//!
//! An [`AtomSpace`] lists the atoms of one variable tuple (complete fragment
//! types over the full parameter set). A [`Subalgebra`] is a partition of those
//! atoms: its measurable sets are exactly the unions of blocks. A
//! [`Projection`] is the coordinate map from a product tuple onto one of its
//! factors. A [`Fragment`] bundles the spaces, projections, parameter levels,
//! automorphisms and inhabitation flags of one scenario.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::hash::Hash;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Atom indices into one [`AtomSpace`].
pub type AtomSet = BTreeSet<usize>;

/// Name of the finest level: every space is partitioned into singletons.
pub const FULL: &str = "full";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AtomSpace {
    id: String,
    atoms: Vec<String>,
    index: HashMap<String, usize>,
}

impl AtomSpace {
    pub fn new(id: impl Into<String>, atoms: Vec<String>) -> Result<Self> {
        let id = id.into();
        if atoms.is_empty() {
            return Err(Error::Malformed(format!("space {id:?} has no atoms")));
        }
        let mut index = HashMap::with_capacity(atoms.len());
        for (i, a) in atoms.iter().enumerate() {
            if index.insert(a.clone(), i).is_some() {
                return Err(Error::Malformed(format!(
                    "space {id:?} repeats atom {a:?}"
                )));
            }
        }
        Ok(Self { id, atoms, index })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn atoms(&self) -> &[String] {
        &self.atoms
    }

    pub fn atom(&self, i: usize) -> &str {
        &self.atoms[i]
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.index.get(name).copied().ok_or_else(|| Error::UnknownAtom {
            space: self.id.clone(),
            atom: name.to_string(),
        })
    }

    pub fn all(&self) -> AtomSet {
        (0..self.atoms.len()).collect()
    }

    pub fn set_of<S: AsRef<str>>(&self, names: &[S]) -> Result<AtomSet> {
        names.iter().map(|n| self.index_of(n.as_ref())).collect()
    }

    pub fn names(&self, set: &AtomSet) -> Vec<String> {
        set.iter().map(|&i| self.atoms[i].clone()).collect()
    }
}

pub fn complement(universe: usize, set: &AtomSet) -> AtomSet {
    (0..universe).filter(|a| !set.contains(a)).collect()
}

/// A partition of an atom space into nonempty blocks.
///
/// Blocks are kept in canonical order (by least atom) and each block is sorted,
/// so two equal partitions compare equal structurally.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Subalgebra {
    block_of: Vec<usize>,
    blocks: Vec<Vec<usize>>,
}

impl Subalgebra {
    /// Atoms with equal labels share a block.
    pub fn from_labels<L: Hash + Eq>(labels: &[L]) -> Self {
        let mut ids: HashMap<&L, usize> = HashMap::new();
        let mut block_of = Vec::with_capacity(labels.len());
        let mut blocks: Vec<Vec<usize>> = Vec::new();
        for (atom, label) in labels.iter().enumerate() {
            let next = blocks.len();
            let b = *ids.entry(label).or_insert(next);
            if b == next {
                blocks.push(Vec::new());
            }
            blocks[b].push(atom);
            block_of.push(b);
        }
        Self { block_of, blocks }
    }

    pub fn from_blocks(universe: usize, blocks: &[Vec<usize>]) -> Result<Self> {
        let mut labels = vec![usize::MAX; universe];
        for (b, block) in blocks.iter().enumerate() {
            if block.is_empty() {
                return Err(Error::Malformed("empty block".into()));
            }
            for &a in block {
                if a >= universe {
                    return Err(Error::Malformed(format!("atom index {a} out of range")));
                }
                if labels[a] != usize::MAX {
                    return Err(Error::Malformed(format!("atom index {a} in two blocks")));
                }
                labels[a] = b;
            }
        }
        if let Some(a) = labels.iter().position(|&l| l == usize::MAX) {
            return Err(Error::Malformed(format!("atom index {a} in no block")));
        }
        Ok(Self::from_labels(&labels))
    }

    pub fn discrete(universe: usize) -> Self {
        Self {
            block_of: (0..universe).collect(),
            blocks: (0..universe).map(|a| vec![a]).collect(),
        }
    }

    pub fn trivial(universe: usize) -> Self {
        Self {
            block_of: vec![0; universe],
            blocks: vec![(0..universe).collect()],
        }
    }

    /// Number of atoms of the underlying space.
    pub fn universe(&self) -> usize {
        self.block_of.len()
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn block(&self, b: usize) -> &[usize] {
        &self.blocks[b]
    }

    pub fn block_of(&self, atom: usize) -> usize {
        self.block_of[atom]
    }

    pub fn labels(&self) -> &[usize] {
        &self.block_of
    }

    pub fn is_discrete(&self) -> bool {
        self.blocks.len() == self.block_of.len()
    }

    /// Common refinement: blocks are the nonempty pairwise intersections.
    pub fn join(&self, other: &Subalgebra) -> Result<Subalgebra> {
        if self.universe() != other.universe() {
            return Err(Error::SpaceMismatch(format!(
                "join of partitions over {} and {} atoms",
                self.universe(),
                other.universe()
            )));
        }
        let labels: Vec<(usize, usize)> = self
            .block_of
            .iter()
            .zip(&other.block_of)
            .map(|(&a, &b)| (a, b))
            .collect();
        Ok(Self::from_labels(&labels))
    }

    /// Finest partition coarser than both (blocks connected through shared atoms).
    pub fn meet(&self, other: &Subalgebra) -> Result<Subalgebra> {
        if self.universe() != other.universe() {
            return Err(Error::SpaceMismatch("meet of partitions of different spaces".into()));
        }
        let mut uf = UnionFind::new(self.universe());
        for p in [self, other] {
            for block in &p.blocks {
                for w in block.windows(2) {
                    uf.union(w[0], w[1]);
                }
            }
        }
        Ok(uf.into_subalgebra())
    }

    /// True when every block of `self` lies inside one block of `coarser`.
    pub fn refines(&self, coarser: &Subalgebra) -> bool {
        self.universe() == coarser.universe()
            && self.blocks.iter().all(|block| {
                let b0 = coarser.block_of[block[0]];
                block.iter().all(|&a| coarser.block_of[a] == b0)
            })
    }

    pub fn is_measurable(&self, set: &AtomSet) -> bool {
        self.blocks_meeting(set)
            .into_iter()
            .all(|b| self.blocks[b].iter().all(|x| set.contains(x)))
    }

    /// Blocks that intersect `set`.
    pub fn blocks_meeting(&self, set: &AtomSet) -> BTreeSet<usize> {
        set.iter().map(|&a| self.block_of[a]).collect()
    }

    /// Blocks contained in `set`.
    pub fn blocks_inside(&self, set: &AtomSet) -> BTreeSet<usize> {
        self.blocks_meeting(set)
            .into_iter()
            .filter(|&b| self.blocks[b].iter().all(|a| set.contains(a)))
            .collect()
    }

    pub fn union_of(&self, blocks: impl IntoIterator<Item = usize>) -> AtomSet {
        blocks
            .into_iter()
            .flat_map(|b| self.blocks[b].iter().copied())
            .collect()
    }

    /// Largest measurable subset and smallest measurable superset of `target`.
    pub fn hulls(&self, target: &AtomSet) -> (AtomSet, AtomSet) {
        let inner = self.union_of(self.blocks_inside(target));
        let outer = self.union_of(self.blocks_meeting(target));
        (inner, outer)
    }

    /// The partition of the source space induced through `map`.
    pub fn pullback(&self, map: &[usize]) -> Subalgebra {
        let labels: Vec<usize> = map.iter().map(|&t| self.block_of[t]).collect();
        Self::from_labels(&labels)
    }
}

pub(crate) struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub(crate) fn new(n: usize) -> Self {
        Self { parent: (0..n).collect() }
    }

    pub(crate) fn find(&mut self, mut a: usize) -> usize {
        while self.parent[a] != a {
            self.parent[a] = self.parent[self.parent[a]];
            a = self.parent[a];
        }
        a
    }

    /// Returns true when the two classes were distinct.
    pub(crate) fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        self.parent[hi] = lo;
        true
    }

    pub(crate) fn into_subalgebra(mut self) -> Subalgebra {
        let labels: Vec<usize> = (0..self.parent.len()).map(|a| self.find(a)).collect();
        Subalgebra::from_labels(&labels)
    }
}

/// Coordinate map from a product space onto one of its factors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Projection {
    source: String,
    target: String,
    map: Vec<usize>,
    fibers: Vec<Vec<usize>>,
}

impl Projection {
    pub fn new(
        source: impl Into<String>,
        target: impl Into<String>,
        target_len: usize,
        map: Vec<usize>,
    ) -> Result<Self> {
        let (source, target) = (source.into(), target.into());
        let mut fibers = vec![Vec::new(); target_len];
        for (a, &t) in map.iter().enumerate() {
            if t >= target_len {
                return Err(Error::Malformed(format!(
                    "projection {source}->{target} maps atom {a} outside the target"
                )));
            }
            fibers[t].push(a);
        }
        Ok(Self { source, target, map, fibers })
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn target(&self) -> &str {
        &self.target
    }

    pub fn map(&self) -> &[usize] {
        &self.map
    }

    pub fn apply(&self, atom: usize) -> usize {
        self.map[atom]
    }

    pub fn fiber(&self, target_atom: usize) -> &[usize] {
        &self.fibers[target_atom]
    }

    pub fn target_len(&self) -> usize {
        self.fibers.len()
    }

    pub fn is_surjective(&self) -> bool {
        self.fibers.iter().all(|f| !f.is_empty())
    }

    pub fn preimage(&self, set: &AtomSet) -> AtomSet {
        set.iter().flat_map(|&t| self.fibers[t].iter().copied()).collect()
    }

    /// Direct image: the finite form of `∃y θ(x, y)`.
    pub fn shadow(&self, set: &AtomSet) -> AtomSet {
        set.iter().map(|&a| self.map[a]).collect()
    }
}

/// A simultaneous permutation of the atoms of several spaces.
/// Spaces not listed are acted on trivially.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Automorphism {
    perms: BTreeMap<String, Vec<usize>>,
}

impl Automorphism {
    pub fn new(perms: BTreeMap<String, Vec<usize>>) -> Self {
        Self { perms }
    }

    pub fn perms(&self) -> &BTreeMap<String, Vec<usize>> {
        &self.perms
    }

    pub fn apply(&self, space: &str, atom: usize) -> usize {
        self.perms.get(space).map_or(atom, |p| p[atom])
    }

    /// `self ∘ other` on every space either mentions.
    pub fn compose(&self, other: &Automorphism, sizes: &BTreeMap<String, usize>) -> Automorphism {
        let mut perms = BTreeMap::new();
        for space in self.perms.keys().chain(other.perms.keys()) {
            if perms.contains_key(space) {
                continue;
            }
            let n = sizes[space];
            let p: Vec<usize> = (0..n).map(|a| self.apply(space, other.apply(space, a))).collect();
            perms.insert(space.clone(), p);
        }
        Automorphism { perms }
    }

    pub fn is_identity(&self) -> bool {
        self.perms.values().all(|p| p.iter().enumerate().all(|(i, &j)| i == j))
    }

    fn canonical(&self) -> Vec<(String, Vec<usize>)> {
        self.perms
            .iter()
            .filter(|(_, p)| !p.iter().enumerate().all(|(i, &j)| i == j))
            .map(|(s, p)| (s.clone(), p.clone()))
            .collect()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Fragment {
    spaces: BTreeMap<String, AtomSpace>,
    projections: Vec<Projection>,
    levels: BTreeMap<String, BTreeMap<String, Arc<Subalgebra>>>,
    automorphisms: Vec<Automorphism>,
    inhabited: BTreeMap<String, AtomSet>,
}

#[derive(Clone, Debug, Default)]
pub struct FragmentBuilder {
    inner: Fragment,
    errors: Vec<String>,
}

impl FragmentBuilder {
    pub fn space(mut self, space: AtomSpace) -> Self {
        self.inner.spaces.insert(space.id().to_string(), space);
        self
    }

    /// Adds a projection given as a function on atom indices.
    pub fn projection(mut self, source: &str, target: &str, map: Vec<usize>) -> Self {
        let (Some(s), Some(t)) = (self.inner.spaces.get(source), self.inner.spaces.get(target))
        else {
            self.errors.push(format!("projection {source}->{target} names an unknown space"));
            return self;
        };
        if map.len() != s.len() {
            self.errors.push(format!("projection {source}->{target} is not total"));
            return self;
        }
        match Projection::new(source, target, t.len(), map) {
            Ok(p) => self.inner.projections.push(p),
            Err(e) => self.errors.push(e.to_string()),
        }
        self
    }

    pub fn level(mut self, level: &str, space: &str, algebra: Subalgebra) -> Self {
        match self.inner.spaces.get(space) {
            Some(s) if s.len() == algebra.universe() => {
                self.inner
                    .levels
                    .entry(level.to_string())
                    .or_default()
                    .insert(space.to_string(), Arc::new(algebra));
            }
            Some(_) => self.errors.push(format!("level {level:?} on {space:?} has wrong size")),
            None => self.errors.push(format!("level {level:?} names unknown space {space:?}")),
        }
        self
    }

    pub fn automorphism(mut self, aut: Automorphism) -> Self {
        for (space, p) in aut.perms() {
            match self.inner.spaces.get(space) {
                Some(s) if s.len() == p.len() => {}
                _ => self.errors.push(format!("automorphism on {space:?} has wrong shape")),
            }
        }
        self.inner.automorphisms.push(aut);
        self
    }

    pub fn inhabited(mut self, space: &str, atoms: AtomSet) -> Self {
        match self.inner.spaces.get(space) {
            Some(s) if atoms.iter().all(|&a| a < s.len()) => {
                self.inner.inhabited.insert(space.to_string(), atoms);
            }
            _ => self.errors.push(format!("inhabitation flags on {space:?} are out of range")),
        }
        self
    }

    /// Fills in the discrete `full` level and checks that every level covers
    /// every space.
    pub fn build(mut self) -> Result<Fragment> {
        if !self.errors.is_empty() {
            return Err(Error::Malformed(self.errors.join("; ")));
        }
        let f = &mut self.inner;
        let full = f.levels.entry(FULL.to_string()).or_default();
        for (id, space) in &f.spaces {
            full.entry(id.clone())
                .or_insert_with(|| Arc::new(Subalgebra::discrete(space.len())));
        }
        for (level, per_space) in &f.levels {
            for id in f.spaces.keys() {
                if !per_space.contains_key(id) {
                    return Err(Error::Malformed(format!(
                        "level {level:?} has no partition for space {id:?}"
                    )));
                }
            }
        }
        Ok(self.inner)
    }
}

impl Fragment {
    pub fn builder() -> FragmentBuilder {
        FragmentBuilder::default()
    }

    pub fn spaces(&self) -> &BTreeMap<String, AtomSpace> {
        &self.spaces
    }

    pub fn space(&self, id: &str) -> Result<&AtomSpace> {
        self.spaces.get(id).ok_or_else(|| Error::UnknownSpace(id.to_string()))
    }

    pub fn projections(&self) -> &[Projection] {
        &self.projections
    }

    pub fn projection(&self, source: &str, target: &str) -> Result<&Projection> {
        self.projections
            .iter()
            .find(|p| p.source == source && p.target == target)
            .ok_or_else(|| Error::UnknownProjection {
                source_space: source.to_string(),
                target: target.to_string(),
            })
    }

    pub fn level_names(&self) -> impl Iterator<Item = &str> {
        self.levels.keys().map(String::as_str)
    }

    pub fn has_level(&self, level: &str) -> bool {
        self.levels.contains_key(level)
    }

    pub fn algebra(&self, space: &str, level: &str) -> Result<&Arc<Subalgebra>> {
        self.levels
            .get(level)
            .and_then(|m| m.get(space))
            .ok_or_else(|| Error::UnknownLevel {
                space: space.to_string(),
                level: level.to_string(),
            })
    }

    pub fn automorphisms(&self) -> &[Automorphism] {
        &self.automorphisms
    }

    pub fn inhabited(&self, space: &str) -> Option<&AtomSet> {
        self.inhabited.get(space)
    }

    pub fn inhabited_flags(&self) -> &BTreeMap<String, AtomSet> {
        &self.inhabited
    }

    pub fn space_sizes(&self) -> BTreeMap<String, usize> {
        self.spaces.iter().map(|(k, s)| (k.clone(), s.len())).collect()
    }

    /// All elements of the group generated by the automorphism list.
    pub fn automorphism_group(&self) -> Vec<Automorphism> {
        generate_group(&self.automorphisms, &self.space_sizes())
    }

    /// Levels from coarsest to finest; ties broken by name. Only meaningful for
    /// fragments that pass level monotonicity.
    pub fn levels_coarse_to_fine(&self) -> Vec<String> {
        let mut names: Vec<String> = self.levels.keys().cloned().collect();
        let weight = |l: &String| -> usize {
            self.levels[l].values().map(|a| a.num_blocks()).sum()
        };
        names.sort_by(|a, b| weight(a).cmp(&weight(b)).then(a.cmp(b)));
        names
    }

    /// True when level `fine` refines level `coarse` on every space.
    pub fn level_refines(&self, fine: &str, coarse: &str) -> Result<bool> {
        for id in self.spaces.keys() {
            if !self.algebra(id, fine)?.refines(self.algebra(id, coarse)?) {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// A product space together with its two coordinate projections.
#[derive(Clone, Copy, Debug)]
pub struct Pair<'f> {
    pub fragment: &'f Fragment,
    pub product: &'f AtomSpace,
    pub left: &'f Projection,
    pub right: &'f Projection,
}

impl<'f> Pair<'f> {
    pub fn left_space(&self) -> &'f AtomSpace {
        &self.fragment.spaces[self.left.target()]
    }

    pub fn right_space(&self) -> &'f AtomSpace {
        &self.fragment.spaces[self.right.target()]
    }

    /// `π_x⁻¹(a) ∩ π_y⁻¹(b)` for single atoms.
    pub fn cell(&self, a: usize, b: usize) -> AtomSet {
        self.left
            .fiber(a)
            .iter()
            .copied()
            .filter(|&w| self.right.apply(w) == b)
            .collect()
    }
}

impl Fragment {
    pub fn pair(&self, product: &str, left: &str, right: &str) -> Result<Pair<'_>> {
        if left == right {
            return Err(Error::SpaceMismatch(format!("both factors of {product:?} are {left:?}")));
        }
        Ok(Pair {
            fragment: self,
            product: self.space(product)?,
            left: self.projection(product, left)?,
            right: self.projection(product, right)?,
        })
    }
}

pub(crate) fn generate_group(
    generators: &[Automorphism],
    sizes: &BTreeMap<String, usize>,
) -> Vec<Automorphism> {
    let mut seen: BTreeSet<Vec<(String, Vec<usize>)>> = BTreeSet::new();
    let identity = Automorphism::default();
    seen.insert(identity.canonical());
    let mut group = vec![identity];
    let mut frontier = 0;
    while frontier < group.len() {
        let g = group[frontier].clone();
        frontier += 1;
        for s in generators {
            let h = s.compose(&g, sizes);
            if seen.insert(h.canonical()) {
                group.push(h);
            }
        }
    }
    group
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ViolationKind {
    ProjectionSurjectivity,
    ProjectionComposition,
    LevelMonotonicity,
    EmbeddingCompatibility,
    ShadowClosure,
    AutomorphismCompatibility,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub detail: String,
}

impl Violation {
    fn new(kind: ViolationKind, detail: String) -> Self {
        Self { kind, detail }
    }
}

/// Lists every violated structural invariant; an empty list means valid.
///
/// Shadow-closure is checked along every projection of every product space,
/// not only onto the left factor.
pub fn validate_fragment(f: &Fragment) -> Vec<Violation> {
    use ViolationKind::*;
    let mut out = Vec::new();

    for p in &f.projections {
        if !p.is_surjective() {
            out.push(Violation::new(
                ProjectionSurjectivity,
                format!("{}->{} misses target atoms", p.source, p.target),
            ));
        }
    }

    for p in &f.projections {
        for q in f.projections.iter().filter(|q| q.source == p.target) {
            if let Ok(r) = f.projection(&p.source, &q.target) {
                let bad = (0..p.map.len()).find(|&a| r.map[a] != q.map[p.map[a]]);
                if let Some(a) = bad {
                    out.push(Violation::new(
                        ProjectionComposition,
                        format!(
                            "{}->{}->{} disagrees with {}->{} at atom {:?}",
                            p.source,
                            p.target,
                            q.target,
                            r.source,
                            r.target,
                            f.spaces[&p.source].atom(a)
                        ),
                    ));
                }
            }
        }
    }

    let names: Vec<&String> = f.levels.keys().collect();
    for (i, l1) in names.iter().enumerate() {
        for l2 in &names[i + 1..] {
            let (mut finer1, mut finer2) = (false, false);
            for id in f.spaces.keys() {
                let (a1, a2) = (&f.levels[*l1][id], &f.levels[*l2][id]);
                match (a1.refines(a2), a2.refines(a1)) {
                    (true, true) => {}
                    (true, false) => finer1 = true,
                    (false, true) => finer2 = true,
                    (false, false) => out.push(Violation::new(
                        LevelMonotonicity,
                        format!("levels {l1:?} and {l2:?} are incomparable on {id:?}"),
                    )),
                }
            }
            if finer1 && finer2 {
                out.push(Violation::new(
                    LevelMonotonicity,
                    format!("levels {l1:?} and {l2:?} are ordered differently on different spaces"),
                ));
            }
        }
    }

    for (level, per_space) in &f.levels {
        for p in &f.projections {
            let (src, tgt) = (&per_space[&p.source], &per_space[&p.target]);
            if !src.refines(&tgt.pullback(&p.map)) {
                out.push(Violation::new(
                    EmbeddingCompatibility,
                    format!(
                        "level {level:?}: pullback of {} partition along {}->{} is not coarser than the {} partition",
                        p.target, p.source, p.target, p.source
                    ),
                ));
            }
            for (b, block) in src.blocks().iter().enumerate() {
                let image: AtomSet = block.iter().map(|&a| p.map[a]).collect();
                if !tgt.is_measurable(&image) {
                    out.push(Violation::new(
                        ShadowClosure,
                        format!(
                            "level {level:?}: image of {} block {b} (first atom {:?}) under {}->{} is not a union of blocks",
                            p.source,
                            f.spaces[&p.source].atom(block[0]),
                            p.source,
                            p.target
                        ),
                    ));
                }
            }
        }
    }

    for (k, aut) in f.automorphisms.iter().enumerate() {
        let mut bijective = true;
        for (space, perm) in aut.perms() {
            let distinct: BTreeSet<usize> = perm.iter().copied().collect();
            if distinct.len() != perm.len() {
                bijective = false;
                out.push(Violation::new(
                    AutomorphismCompatibility,
                    format!("automorphism {k} is not a permutation of {space:?}"),
                ));
            }
        }
        if !bijective {
            continue;
        }
        for p in &f.projections {
            let n = p.map.len();
            if (0..n).any(|a| p.map[aut.apply(&p.source, a)] != aut.apply(&p.target, p.map[a])) {
                out.push(Violation::new(
                    AutomorphismCompatibility,
                    format!("automorphism {k} does not commute with {}->{}", p.source, p.target),
                ));
            }
        }
        for (level, per_space) in &f.levels {
            for (space, alg) in per_space {
                let permutes = alg.blocks().iter().all(|block| {
                    let image: AtomSet = block.iter().map(|&a| aut.apply(space, a)).collect();
                    let b = alg.block_of(*image.iter().next().unwrap());
                    image.len() == alg.block(b).len() && image.iter().all(|&a| alg.block_of(a) == b)
                });
                if !permutes {
                    out.push(Violation::new(
                        AutomorphismCompatibility,
                        format!("automorphism {k} does not permute the blocks of level {level:?} on {space:?}"),
                    ));
                }
            }
        }
    }

    out.sort();
    out
}

/// Join of two partitions of the same space.
pub fn join_subalgebras(p: &Subalgebra, q: &Subalgebra) -> Result<Subalgebra> {
    p.join(q)
}

pub fn hulls(b: &Subalgebra, target: &AtomSet) -> (AtomSet, AtomSet) {
    b.hulls(target)
}

pub fn shadow(pr: &Projection, s: &AtomSet) -> AtomSet {
    pr.shadow(s)
}

/// The algebra generated by the pulled-back full x-algebra and the level-`A`
/// product algebra: fibers over single x-atoms cut by level-`A` blocks.
pub fn squeeze_algebra(left: &Projection, product_level: &Subalgebra) -> Result<Subalgebra> {
    let fibers = Subalgebra::discrete(left.target_len()).pullback(left.map());
    fibers.join(product_level)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn part(n: usize, blocks: &[&[usize]]) -> Subalgebra {
        let owned: Vec<Vec<usize>> = blocks.iter().map(|b| b.to_vec()).collect();
        Subalgebra::from_blocks(n, &owned).unwrap()
    }

    fn set(items: &[usize]) -> AtomSet {
        items.iter().copied().collect()
    }

    #[test]
    fn join_examples() {
        let p = part(4, &[&[0, 1], &[2, 3]]);
        let q = part(4, &[&[0, 2], &[1, 3]]);
        assert_eq!(p.join(&q).unwrap(), Subalgebra::discrete(4));
        assert_eq!(p.join(&p).unwrap(), p);
        assert_eq!(Subalgebra::trivial(4).join(&q).unwrap(), q);
        assert!(p.join(&Subalgebra::trivial(3)).is_err());
    }

    #[test]
    fn canonical_block_order() {
        let p = part(4, &[&[3, 1], &[2, 0]]);
        assert_eq!(p.blocks(), &[vec![0, 2], vec![1, 3]]);
    }

    #[test]
    fn hull_examples() {
        let b = part(4, &[&[0, 1], &[2, 3]]);
        assert_eq!(b.hulls(&set(&[0, 1, 2])), (set(&[0, 1]), set(&[0, 1, 2, 3])));
        assert_eq!(b.hulls(&set(&[])), (set(&[]), set(&[])));
        assert_eq!(b.hulls(&set(&[2, 3])), (set(&[2, 3]), set(&[2, 3])));
    }

    #[test]
    fn shadow_examples() {
        // pairs (1,1),(1,2),(2,1),(2,2) onto the first coordinate
        let pr = Projection::new("xy", "x", 2, vec![0, 0, 1, 1]).unwrap();
        assert_eq!(pr.shadow(&set(&[1, 3])), set(&[0, 1]));
        assert_eq!(pr.shadow(&set(&[])), set(&[]));
        assert_eq!(pr.shadow(&set(&[0, 1, 2, 3])), set(&[0, 1]));
    }

    fn space(id: &str, atoms: &[&str]) -> AtomSpace {
        AtomSpace::new(id, atoms.iter().map(|s| s.to_string()).collect()).unwrap()
    }

    #[test]
    fn single_space_fragment_is_valid() {
        let f = Fragment::builder()
            .space(space("x", &["a1", "a2"]))
            .build()
            .unwrap();
        assert!(validate_fragment(&f).is_empty());
    }

    #[test]
    fn one_atom_shadow_is_measurable() {
        let f = Fragment::builder()
            .space(space("x", &["1"]))
            .space(space("xy", &["(1,1)", "(1,2)"]))
            .projection("xy", "x", vec![0, 0])
            .level("A", "x", Subalgebra::trivial(1))
            .level("A", "xy", part(2, &[&[0], &[1]]))
            .build()
            .unwrap();
        assert!(validate_fragment(&f).is_empty());
    }

    #[test]
    fn detects_broken_shadow_closure() {
        // x = {1,2}; xy = (1,a),(2,a),(2,b). Level A keeps x discrete but
        // groups the xy-atoms so the image of {(1,a),(2,b)} is all of x while
        // the image of {(2,a)} is only {2}: fine. Break it by making x trivial
        // at A while xy block {(2,b)} has image {2}.
        let f = Fragment::builder()
            .space(space("x", &["1", "2"]))
            .space(space("xy", &["1a", "2a", "2b"]))
            .projection("xy", "x", vec![0, 1, 1])
            .level("A", "x", Subalgebra::trivial(2))
            .level("A", "xy", part(3, &[&[0, 1], &[2]]))
            .build()
            .unwrap();
        let report = validate_fragment(&f);
        assert!(report.iter().any(|v| v.kind == ViolationKind::ShadowClosure));
    }

    #[test]
    fn detects_embedding_failure() {
        let f = Fragment::builder()
            .space(space("x", &["1", "2"]))
            .space(space("xy", &["1a", "2a"]))
            .projection("xy", "x", vec![0, 1])
            .level("A", "x", Subalgebra::discrete(2))
            .level("A", "xy", Subalgebra::trivial(2))
            .build()
            .unwrap();
        let report = validate_fragment(&f);
        assert!(report.iter().any(|v| v.kind == ViolationKind::EmbeddingCompatibility));
    }

    #[test]
    fn detects_incomparable_levels() {
        let f = Fragment::builder()
            .space(space("x", &["1", "2", "3", "4"]))
            .level("A", "x", part(4, &[&[0, 1], &[2, 3]]))
            .level("B", "x", part(4, &[&[0, 2], &[1, 3]]))
            .build()
            .unwrap();
        let report = validate_fragment(&f);
        assert!(report.iter().any(|v| v.kind == ViolationKind::LevelMonotonicity));
    }

    #[test]
    fn detects_bad_automorphism() {
        let mut perms = BTreeMap::new();
        perms.insert("x".to_string(), vec![1, 0, 2]);
        let f = Fragment::builder()
            .space(space("x", &["1", "2", "3"]))
            .level("A", "x", part(3, &[&[0], &[1, 2]]))
            .automorphism(Automorphism::new(perms))
            .build()
            .unwrap();
        let report = validate_fragment(&f);
        assert!(report.iter().any(|v| v.kind == ViolationKind::AutomorphismCompatibility));
    }

    #[test]
    fn group_closure() {
        let mut perms = BTreeMap::new();
        perms.insert("x".to_string(), vec![1, 2, 0]);
        let sizes: BTreeMap<String, usize> = [("x".to_string(), 3)].into_iter().collect();
        let group = generate_group(&[Automorphism::new(perms)], &sizes);
        assert_eq!(group.len(), 3);
    }

    #[test]
    fn missing_level_partition_is_rejected() {
        let err = Fragment::builder()
            .space(space("x", &["1"]))
            .space(space("y", &["1"]))
            .level("A", "x", Subalgebra::trivial(1))
            .build();
        assert!(err.is_err());
    }
}
