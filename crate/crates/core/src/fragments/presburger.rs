//! Integers with order, addition and congruences, cut down to finitely many
//! parameters and one modulus `L`.
//!
//! A one-variable atom is an order cell over the parameters together with a
//! residue mod `L`. Atoms of two and three variables add the signs of all
//! pairwise differences and sums. Atoms are computed by enumerating integers
//! in a window around the parameters and collecting the signatures that occur;
//! the new parameter `b` is replaced by a concrete integer with its designated
//! residue, far enough from the standard parameters that every configuration
//! is realized.

use std::collections::{HashMap, HashSet};

use num_integer::Integer;
use num_traits::Zero;

use crate::algebra::{AtomSet, Fragment};
use crate::charge::{self, Charge};
use crate::error::{Error, Result};
use crate::rational::{self, Q};

use super::build::{project, sign_name, SpaceSpec};
use super::Scenario;

/// Level of sets definable over the standard parameters only.
pub const BASE_LEVEL: &str = "Z";

type Single = (u16, u8);
type Double = (Single, Single, i8, i8);
type Triple = (Single, Single, Single, [i8; 6]);

#[derive(Clone, Debug)]
pub struct PresburgerSpec {
    pub base: Vec<i64>,
    pub moduli: Vec<u32>,
    pub new_residue: Option<u32>,
}

/// The built fragment plus what the scenario runner needs to place charges.
pub struct Presburger {
    pub scenario: Scenario,
    pub modulus: u32,
    /// Cell index above every parameter and the one below every parameter.
    pub top_cell: u16,
    pub bottom_cell: u16,
    singles: Vec<Single>,
    doubles: Vec<Double>,
    positive_cells: HashSet<u16>,
}

struct Window {
    params: Vec<i64>,
    base: Vec<i64>,
    modulus: i64,
    radius: i64,
}

impl Window {
    fn new(spec: &PresburgerSpec, gap_factor: i64) -> Result<Self> {
        let mut base = spec.base.clone();
        base.sort_unstable();
        base.dedup();
        if base.iter().any(|v| base.binary_search(&-v).is_err()) {
            return Err(Error::Recipe("base parameters must be closed under negation".into()));
        }
        if spec.moduli.contains(&0) {
            return Err(Error::Recipe("moduli must be positive".into()));
        }
        let modulus = spec.moduli.iter().fold(1i64, |acc, &m| acc.lcm(&(m as i64)));
        if modulus > 60 {
            return Err(Error::TooLarge(format!("modulus {modulus} exceeds 60")));
        }
        let gap = gap_factor * modulus;
        let reach = base.iter().map(|v| v.abs()).max().unwrap_or(0);
        let mut params = base.clone();
        let radius = match spec.new_residue {
            None => reach + gap,
            Some(r) if (r as i64) < modulus => {
                let mut b = reach + gap + 1;
                while b.mod_floor(&modulus) != r as i64 {
                    b += 1;
                }
                params.push(b);
                params.push(-b);
                params.sort_unstable();
                b + gap
            }
            Some(r) => {
                return Err(Error::Recipe(format!("residue {r} of the new parameter is not below {modulus}")))
            }
        };
        Ok(Self { params, base, modulus, radius })
    }

    fn cell(params: &[i64], v: i64) -> u16 {
        match params.binary_search(&v) {
            Ok(j) => (2 * j + 1) as u16,
            Err(j) => (2 * j) as u16,
        }
    }

    fn values(&self) -> impl Iterator<Item = i64> + Clone {
        -self.radius..=self.radius
    }

    fn single(&self, v: i64) -> Single {
        (Self::cell(&self.params, v), v.mod_floor(&self.modulus) as u8)
    }
}

fn sign(v: i64) -> i8 {
    v.signum() as i8
}

struct Atoms {
    singles: Vec<Single>,
    doubles: Vec<Double>,
    triples: Vec<Triple>,
    base_cells: HashMap<u16, u16>,
    positive_cells: HashSet<u16>,
}

fn enumerate(w: &Window, with_triples: bool) -> Atoms {
    let values: Vec<i64> = w.values().collect();
    let sig: Vec<Single> = values.iter().map(|&v| w.single(v)).collect();
    let mut base_cells = HashMap::new();
    let mut nonpositive = HashSet::new();
    for (&v, s) in values.iter().zip(&sig) {
        base_cells.insert(s.0, Window::cell(&w.base, v));
        if v <= 0 {
            nonpositive.insert(s.0);
        }
    }
    let positive_cells = base_cells.keys().copied().filter(|c| !nonpositive.contains(c)).collect();
    let mut singles: HashSet<Single> = sig.iter().copied().collect();
    let mut doubles: HashSet<Double> = HashSet::new();
    let mut triples: HashSet<Triple> = HashSet::new();
    for (i, &u) in values.iter().enumerate() {
        for (j, &v) in values.iter().enumerate() {
            doubles.insert((sig[i], sig[j], sign(u - v), sign(u + v)));
            if !with_triples {
                continue;
            }
            for (k, &t) in values.iter().enumerate() {
                let signs = [sign(u - v), sign(v - t), sign(u - t), sign(u + v), sign(v + t), sign(u + t)];
                triples.insert((sig[i], sig[j], sig[k], signs));
            }
        }
    }
    let sorted = |s: &mut HashSet<Single>| {
        let mut v: Vec<Single> = s.drain().collect();
        v.sort_unstable();
        v
    };
    let mut doubles: Vec<Double> = doubles.into_iter().collect();
    doubles.sort_unstable();
    let mut triples: Vec<Triple> = triples.into_iter().collect();
    triples.sort_unstable();
    Atoms { singles: sorted(&mut singles), doubles, triples, base_cells, positive_cells }
}

/// Atom sets of the three arities for a given window gap; exposed so that
/// tests can compare windows.
pub fn atom_counts(spec: &PresburgerSpec, gap_factor: i64, with_triples: bool) -> Result<(usize, usize, usize)> {
    let a = enumerate(&Window::new(spec, gap_factor)?, with_triples);
    Ok((a.singles.len(), a.doubles.len(), a.triples.len()))
}

#[doc(hidden)]
pub fn atom_names(spec: &PresburgerSpec, gap_factor: i64) -> Result<Vec<Vec<String>>> {
    let w = Window::new(spec, gap_factor)?;
    let a = enumerate(&w, true);
    let names = Names::new(&w);
    Ok(vec![
        a.singles.iter().map(|s| names.single(s)).collect(),
        a.doubles.iter().map(|d| names.double(d)).collect(),
        a.triples.iter().map(|t| names.triple(t)).collect(),
    ])
}

struct Names {
    labels: Vec<String>,
}

impl Names {
    fn new(w: &Window) -> Self {
        let b = w.params.iter().copied().max().filter(|_| w.params.len() > w.base.len());
        let labels = w
            .params
            .iter()
            .map(|&p| match b {
                Some(b) if p == b => "b".to_string(),
                Some(b) if p == -b => "-b".to_string(),
                _ => p.to_string(),
            })
            .collect();
        Self { labels }
    }

    fn cell(&self, c: u16) -> String {
        let c = c as usize;
        if c % 2 == 1 {
            return format!("{{{}}}", self.labels[c / 2]);
        }
        let lo = if c == 0 { "-inf" } else { &self.labels[c / 2 - 1] };
        let hi = self.labels.get(c / 2).map_or("inf", String::as_str);
        format!("({lo},{hi})")
    }

    fn single(&self, s: &Single) -> String {
        format!("{}:{}", self.cell(s.0), s.1)
    }

    fn double(&self, d: &Double) -> String {
        format!(
            "{}|{}|{}|{}",
            self.single(&d.0),
            self.single(&d.1),
            sign_name(d.2, "<", "=", ">"),
            sign_name(d.3, "-", "0", "+")
        )
    }

    fn triple(&self, t: &Triple) -> String {
        let d: String = t.3[..3].iter().map(|&s| sign_name(s, "<", "=", ">")).collect();
        let s: String = t.3[3..].iter().map(|&s| sign_name(s, "-", "0", "+")).collect();
        format!("{}|{}|{}|{d}|{s}", self.single(&t.0), self.single(&t.1), self.single(&t.2))
    }
}

const SINGLES: [&str; 3] = ["x", "y", "z"];
const PAIRS: [(&str, &str, &str); 3] = [("xy", "x", "y"), ("yz", "y", "z"), ("xz", "x", "z")];

pub(crate) fn build(spec: &PresburgerSpec) -> Result<Presburger> {
    let w = Window::new(spec, 4)?;
    let atoms = enumerate(&w, true);
    let names = Names::new(&w);
    let single = SpaceSpec::from_keys(atoms.singles.clone(), |s| names.single(s));
    let double = SpaceSpec::from_keys(atoms.doubles.clone(), |d| names.double(d));
    let triple = SpaceSpec::from_keys(atoms.triples.clone(), |t| names.triple(t));

    let bc = &atoms.base_cells;
    let zs = |s: &Single| (bc[&s.0], s.1);
    let mut b = Fragment::builder();
    for id in SINGLES {
        b = b.space(single.space(id)?).level(BASE_LEVEL, id, single.level(zs));
    }
    for (id, left, right) in PAIRS {
        b = b
            .space(double.space(id)?)
            .level(BASE_LEVEL, id, double.level(|d| (zs(&d.0), zs(&d.1), d.2, d.3)));
        b = project(b, (id, &double), (left, &single), |d| d.0);
        b = project(b, (id, &double), (right, &single), |d| d.1);
    }
    b = b
        .space(triple.space("xyz")?)
        .level(BASE_LEVEL, "xyz", triple.level(|t| (zs(&t.0), zs(&t.1), zs(&t.2), t.3)));
    b = project(b, ("xyz", &triple), ("xy", &double), |t| (t.0, t.1, t.3[0], t.3[3]));
    b = project(b, ("xyz", &triple), ("yz", &double), |t| (t.1, t.2, t.3[1], t.3[4]));
    b = project(b, ("xyz", &triple), ("xz", &double), |t| (t.0, t.2, t.3[2], t.3[5]));
    b = project(b, ("xyz", &triple), ("x", &single), |t| t.0);
    b = project(b, ("xyz", &triple), ("y", &single), |t| t.1);
    b = project(b, ("xyz", &triple), ("z", &single), |t| t.2);
    let fragment = b.build()?;

    let top_cell = (2 * w.params.len()) as u16;
    Ok(Presburger {
        scenario: Scenario::new("presburger", fragment),
        modulus: w.modulus as u32,
        top_cell,
        bottom_cell: 0,
        singles: atoms.singles,
        doubles: atoms.doubles,
        positive_cells: atoms.positive_cells,
    })
}

/// Which end of the line a charge concentrates on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum End {
    Plus,
    Minus,
}

impl Presburger {
    pub fn fragment(&self) -> &Fragment {
        &self.scenario.fragment
    }

    fn end_cell(&self, end: End) -> u16 {
        match end {
            End::Plus => self.top_cell,
            End::Minus => self.bottom_cell,
        }
    }

    fn single_index(&self, s: Single) -> Result<usize> {
        self.singles
            .binary_search(&s)
            .map_err(|_| Error::Precondition(format!("no atom for cell {} residue {}", s.0, s.1)))
    }

    fn double_index(&self, d: Double) -> Result<usize> {
        self.doubles
            .binary_search(&d)
            .map_err(|_| Error::Precondition("no two-variable atom for the requested configuration".into()))
    }

    fn check_distribution(&self, dist: &[Q]) -> Result<()> {
        if dist.len() != self.modulus as usize {
            return Err(Error::Recipe(format!(
                "residue distribution has {} entries, expected {}",
                dist.len(),
                self.modulus
            )));
        }
        if dist.iter().any(|v| v < &Q::zero()) || rational::sum(dist) != rational::one() {
            return Err(Error::Recipe("residue distribution must be nonnegative with total 1".into()));
        }
        Ok(())
    }

    /// A charge on `space` living beyond every parameter at `end`, with the
    /// given residue distribution.
    pub fn at_end(&self, space: &str, end: End, dist: &[Q]) -> Result<Charge> {
        self.check_distribution(dist)?;
        let f = self.fragment();
        let mut values = vec![Q::zero(); f.space(space)?.len()];
        for (r, p) in dist.iter().enumerate() {
            if !p.is_zero() {
                values[self.single_index((self.end_cell(end), r as u8))?] = p.clone();
            }
        }
        Charge::on_atoms(f, space, values)
    }

    fn product_witness(&self, pair: &str, cells: (u16, u16), signs: (i8, i8), left: &[Q], right: &[Q]) -> Result<Charge> {
        self.check_distribution(left)?;
        self.check_distribution(right)?;
        let f = self.fragment();
        let alg = f.algebra(pair, BASE_LEVEL)?;
        let mut values = vec![Q::zero(); alg.num_blocks()];
        for (r, p) in left.iter().enumerate() {
            for (s, q) in right.iter().enumerate() {
                if p.is_zero() || q.is_zero() {
                    continue;
                }
                let atom = self.double_index(((cells.0, r as u8), (cells.1, s as u8), signs.0, signs.1))?;
                values[alg.block_of(atom)] += p * q;
            }
        }
        Charge::new(f, pair, BASE_LEVEL, values)
    }

    /// The base-level witness for a charge at `end` with residues `left`
    /// dominating one at the same end with residues `right`: independent
    /// residues, and the right variable further out than the left one.
    pub fn end_witness(&self, pair: &str, end: End, left: &[Q], right: &[Q]) -> Result<Charge> {
        let c = self.end_cell(end);
        let signs = match end {
            End::Plus => (-1, 1),
            End::Minus => (1, -1),
        };
        self.product_witness(pair, (c, c), signs, left, right)
    }

    /// Atoms of a pair space where the two coordinates sum to zero.
    pub fn negation_graph(&self) -> AtomSet {
        self.doubles.iter().enumerate().filter(|(_, d)| d.3 == 0).map(|(i, _)| i).collect()
    }

    /// Residue distribution of the negated variable.
    pub fn negate_distribution(&self, dist: &[Q]) -> Vec<Q> {
        let l = dist.len();
        (0..l).map(|r| dist[(l - r) % l].clone()).collect()
    }

    /// Graph lift along negation from `pair`'s left space.
    pub fn negation_witness(&self, pair: &str, left: &str, right: &str, mu: &Charge) -> Result<Charge> {
        let f = self.fragment();
        let p = f.pair(pair, left, right)?;
        charge::graph_lift(&p, mu, &self.negation_graph(), BASE_LEVEL)
    }

    /// One-variable atoms lying strictly above zero.
    pub fn positive(&self) -> AtomSet {
        self.singles
            .iter()
            .enumerate()
            .filter(|(_, s)| self.positive_cells.contains(&s.0))
            .map(|(i, _)| i)
            .collect()
    }
}
