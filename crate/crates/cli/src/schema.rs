//! Fragment and charge interchange files.
//!
//! Atoms are referred to by name everywhere, rationals are `"p/q"` strings,
//! and every map is ordered so that serializing a file twice gives the same
//! bytes.

use std::collections::{BTreeMap, BTreeSet};

use extdom::algebra::{AtomSpace, Automorphism, Fragment, Subalgebra, FULL};
use extdom::charge::{block_key, Charge};
use extdom::rational;
use extdom::{Error, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProjectionFile {
    pub source: String,
    pub target: String,
    pub map: BTreeMap<String, String>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FragmentFile {
    pub spaces: BTreeMap<String, Vec<String>>,
    #[serde(default)]
    pub projections: Vec<ProjectionFile>,
    #[serde(default)]
    pub levels: BTreeMap<String, BTreeMap<String, Vec<Vec<String>>>>,
    /// The i-th permutation listed under each space belongs to the i-th
    /// automorphism; spaces with shorter lists are fixed by the rest.
    #[serde(default)]
    pub automorphisms: BTreeMap<String, Vec<BTreeMap<String, String>>>,
    #[serde(default)]
    pub inhabited: BTreeMap<String, Vec<String>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChargeFile {
    pub space: String,
    pub level: String,
    pub values: BTreeMap<String, String>,
}

fn atom_index(space: &AtomSpace, name: &str) -> Result<usize> {
    space.index_of(name)
}

impl FragmentFile {
    pub fn to_fragment(&self) -> Result<Fragment> {
        let mut b = Fragment::builder();
        let mut spaces = BTreeMap::new();
        for (id, atoms) in &self.spaces {
            let s = AtomSpace::new(id.clone(), atoms.clone())?;
            spaces.insert(id.clone(), s.clone());
            b = b.space(s);
        }
        let space = |id: &str| spaces.get(id).ok_or_else(|| Error::UnknownSpace(id.to_string()));
        for p in &self.projections {
            let (src, tgt) = (space(&p.source)?, space(&p.target)?);
            if p.map.len() != src.len() {
                return Err(Error::Malformed(format!("projection {}->{} is not total", p.source, p.target)));
            }
            let mut map = vec![0; src.len()];
            for (from, to) in &p.map {
                map[atom_index(src, from)?] = atom_index(tgt, to)?;
            }
            b = b.projection(&p.source, &p.target, map);
        }
        for (level, per_space) in &self.levels {
            for (id, blocks) in per_space {
                let s = space(id)?;
                let blocks: Vec<Vec<usize>> = blocks
                    .iter()
                    .map(|blk| blk.iter().map(|a| atom_index(s, a)).collect::<Result<_>>())
                    .collect::<Result<_>>()?;
                b = b.level(level, id, Subalgebra::from_blocks(s.len(), &blocks)?);
            }
        }
        let count = self.automorphisms.values().map(Vec::len).max().unwrap_or(0);
        for i in 0..count {
            let mut perms = BTreeMap::new();
            for (id, list) in &self.automorphisms {
                let Some(m) = list.get(i) else { continue };
                let s = space(id)?;
                if m.len() != s.len() {
                    return Err(Error::Malformed(format!("automorphism {i} is not total on {id:?}")));
                }
                let mut perm = vec![0; s.len()];
                for (from, to) in m {
                    perm[atom_index(s, from)?] = atom_index(s, to)?;
                }
                if perm.iter().collect::<BTreeSet<_>>().len() != perm.len() {
                    return Err(Error::Malformed(format!("automorphism {i} is not a bijection on {id:?}")));
                }
                perms.insert(id.clone(), perm);
            }
            b = b.automorphism(Automorphism::new(perms));
        }
        for (id, atoms) in &self.inhabited {
            b = b.inhabited(id, space(id)?.set_of(atoms)?);
        }
        b.build()
    }

    /// The file describing `f`, restricted to the spaces in `keep` when given.
    /// The implicit full level is left out.
    pub fn from_fragment(f: &Fragment, keep: Option<&[&str]>) -> Self {
        let kept = |id: &str| keep.is_none_or(|k| k.contains(&id));
        let names = |id: &str| f.space(id).expect("space of the fragment").atoms().to_vec();
        let spaces = f.spaces().iter().filter(|(id, _)| kept(id)).map(|(id, s)| (id.clone(), s.atoms().to_vec())).collect();
        let projections = f
            .projections()
            .iter()
            .filter(|p| kept(p.source()) && kept(p.target()))
            .map(|p| {
                let (src, tgt) = (names(p.source()), names(p.target()));
                ProjectionFile {
                    source: p.source().into(),
                    target: p.target().into(),
                    map: p.map().iter().enumerate().map(|(a, &t)| (src[a].clone(), tgt[t].clone())).collect(),
                }
            })
            .collect();
        let mut levels = BTreeMap::new();
        for level in f.level_names().filter(|&l| l != FULL) {
            let per_space: BTreeMap<String, Vec<Vec<String>>> = f
                .spaces()
                .keys()
                .filter(|id| kept(id))
                .map(|id| {
                    let n = names(id);
                    let alg = f.algebra(id, level).expect("level covers every space");
                    (id.clone(), alg.blocks().iter().map(|b| b.iter().map(|&a| n[a].clone()).collect()).collect())
                })
                .collect();
            levels.insert(level.to_string(), per_space);
        }
        let mut automorphisms: BTreeMap<String, Vec<BTreeMap<String, String>>> = BTreeMap::new();
        for (i, aut) in f.automorphisms().iter().enumerate() {
            for (id, perm) in aut.perms() {
                if !kept(id) {
                    continue;
                }
                let n = names(id);
                let list = automorphisms.entry(id.clone()).or_default();
                while list.len() < i {
                    list.push(n.iter().map(|a| (a.clone(), a.clone())).collect());
                }
                list.push(perm.iter().enumerate().map(|(a, &t)| (n[a].clone(), n[t].clone())).collect());
            }
        }
        let inhabited = f
            .inhabited_flags()
            .iter()
            .filter(|(id, _)| kept(id))
            .map(|(id, set)| (id.clone(), f.space(id).expect("space of the fragment").names(set)))
            .collect();
        Self { spaces, projections, levels, automorphisms, inhabited }
    }
}

/// Hex SHA-256 of the canonical serialization of `f`.
pub fn fragment_hash(f: &Fragment) -> String {
    let canonical = serde_json::to_vec(&FragmentFile::from_fragment(f, None)).expect("fragment serializes");
    hex::encode(Sha256::digest(&canonical))
}

impl ChargeFile {
    pub fn from_charge(f: &Fragment, c: &Charge) -> Result<Self> {
        let values = c.keyed_values(f)?.into_iter().map(|(k, v)| (k, rational::format(&v))).collect();
        Ok(Self { space: c.space().into(), level: c.level().into(), values })
    }

    pub fn to_charge(&self, f: &Fragment) -> Result<Charge> {
        let space = f.space(&self.space)?;
        let alg = f.algebra(&self.space, &self.level)?;
        let mut values = Vec::with_capacity(alg.num_blocks());
        let mut used = 0;
        for block in alg.blocks() {
            let key = block_key(space.atoms(), block);
            match self.values.get(&key) {
                Some(v) => {
                    values.push(rational::parse(v)?);
                    used += 1;
                }
                None => values.push(rational::zero()),
            }
        }
        if used != self.values.len() {
            let unknown: Vec<&String> = self
                .values
                .keys()
                .filter(|k| !alg.blocks().iter().any(|b| &block_key(space.atoms(), b) == *k))
                .collect();
            return Err(Error::Malformed(format!(
                "charge keys {unknown:?} are not blocks of {:?} at level {:?}",
                self.space, self.level
            )));
        }
        Charge::new(f, &self.space, &self.level, values)
    }
}
