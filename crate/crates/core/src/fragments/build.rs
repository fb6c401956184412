//! Small helpers shared by the scenario builders.

use std::collections::BTreeMap;
use std::hash::Hash;

use crate::algebra::{AtomSpace, FragmentBuilder, Subalgebra};
use crate::error::Result;

/// Atoms of one space, keyed for level partitions.
pub(crate) struct SpaceSpec<K> {
    pub names: Vec<String>,
    pub keys: Vec<K>,
}

impl<K: Ord + Clone> SpaceSpec<K> {
    /// Sorts atoms by key so atom order is canonical.
    pub fn from_keys(mut keys: Vec<K>, name: impl Fn(&K) -> String) -> Self {
        keys.sort();
        keys.dedup();
        let names = keys.iter().map(&name).collect();
        Self { names, keys }
    }

    pub fn index(&self) -> BTreeMap<K, usize> {
        self.keys.iter().cloned().enumerate().map(|(i, k)| (k, i)).collect()
    }

    pub fn space(&self, id: &str) -> Result<AtomSpace> {
        AtomSpace::new(id, self.names.clone())
    }

    pub fn level<L: Hash + Eq>(&self, label: impl Fn(&K) -> L) -> Subalgebra {
        let labels: Vec<L> = self.keys.iter().map(label).collect();
        Subalgebra::from_labels(&labels)
    }
}

/// Adds a projection computed from keys.
pub(crate) fn project<K: Ord + Clone, T: Ord + Clone>(
    builder: FragmentBuilder,
    source: (&str, &SpaceSpec<K>),
    target: (&str, &SpaceSpec<T>),
    f: impl Fn(&K) -> T,
) -> FragmentBuilder {
    let index = target.1.index();
    let map = source.1.keys.iter().map(|k| index[&f(k)]).collect();
    builder.projection(source.0, target.0, map)
}

pub(crate) fn sign_name(s: i8, less: &str, equal: &str, greater: &str) -> String {
    match s {
        -1 => less.to_string(),
        0 => equal.to_string(),
        _ => greater.to_string(),
    }
}
