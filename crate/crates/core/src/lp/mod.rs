//! Exact rational linear programs over charge coordinates.
//!
//! Every system carries the implicit constraints `x ≥ 0` and `Σx = 1`. Rows
//! are numbered with the sum row first, then the equalities, then the
//! inequalities (`a·x ≤ b`); certificate multipliers use the same order.

mod simplex;
pub mod verify;
mod vertices;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{serde_q, serde_qvec, Q};

pub use simplex::{solve, Prepared};
pub use vertices::{enumerate_vertices, optimize_over_vertices, DEFAULT_VERTEX_BOUND};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Term {
    pub var: usize,
    #[serde(with = "serde_q")]
    pub coef: Q,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Constraint {
    pub terms: Vec<Term>,
    #[serde(with = "serde_q")]
    pub rhs: Q,
}

impl Constraint {
    pub fn new(terms: impl IntoIterator<Item = (usize, Q)>, rhs: Q) -> Self {
        let mut terms: Vec<Term> = terms
            .into_iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|(var, coef)| Term { var, coef })
            .collect();
        terms.sort_by_key(|t| t.var);
        let mut merged: Vec<Term> = Vec::with_capacity(terms.len());
        for t in terms {
            match merged.last_mut() {
                Some(last) if last.var == t.var => last.coef += t.coef,
                _ => merged.push(t),
            }
        }
        merged.retain(|t| !t.coef.is_zero());
        Self { terms: merged, rhs }
    }

    pub fn dot(&self, x: &[Q]) -> Q {
        let mut acc = Q::zero();
        for t in &self.terms {
            acc += &t.coef * &x[t.var];
        }
        acc
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Min,
    Max,
}

impl Direction {
    fn sign(self) -> i64 {
        match self {
            Direction::Min => -1,
            Direction::Max => 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinearSystem {
    pub num_vars: usize,
    pub equalities: Vec<Constraint>,
    pub inequalities: Vec<Constraint>,
}

impl LinearSystem {
    pub fn new(num_vars: usize) -> Self {
        Self { num_vars, equalities: Vec::new(), inequalities: Vec::new() }
    }

    pub fn add_equality(&mut self, terms: impl IntoIterator<Item = (usize, Q)>, rhs: Q) {
        self.equalities.push(Constraint::new(terms, rhs));
    }

    /// Adds `terms · x ≤ rhs`.
    pub fn add_inequality(&mut self, terms: impl IntoIterator<Item = (usize, Q)>, rhs: Q) {
        self.inequalities.push(Constraint::new(terms, rhs));
    }

    pub fn num_rows(&self) -> usize {
        1 + self.equalities.len() + self.inequalities.len()
    }

    pub fn sum_row(&self) -> Constraint {
        Constraint::new((0..self.num_vars).map(|j| (j, Q::from_integer(1.into()))), Q::from_integer(1.into()))
    }

    /// All rows in certificate order.
    pub fn rows(&self) -> Vec<Constraint> {
        let mut rows = Vec::with_capacity(self.num_rows());
        rows.push(self.sum_row());
        rows.extend(self.equalities.iter().cloned());
        rows.extend(self.inequalities.iter().cloned());
        rows
    }

    pub fn is_inequality_row(&self, row: usize) -> bool {
        row > self.equalities.len()
    }

    pub fn check_well_formed(&self) -> Result<()> {
        if self.num_vars == 0 {
            return Err(Error::Malformed("linear system without variables".into()));
        }
        for c in self.equalities.iter().chain(&self.inequalities) {
            if c.terms.windows(2).any(|w| w[0].var >= w[1].var) {
                return Err(Error::Malformed("constraint terms must have strictly increasing variables".into()));
            }
            if let Some(t) = c.terms.iter().find(|t| t.var >= self.num_vars) {
                return Err(Error::Malformed(format!(
                    "constraint references variable {} of {}",
                    t.var, self.num_vars
                )));
            }
        }
        Ok(())
    }

    /// Exact membership test for a point.
    pub fn contains(&self, x: &[Q]) -> bool {
        x.len() == self.num_vars
            && x.iter().all(|v| !v.is_negative())
            && crate::rational::sum(x) == Q::from_integer(1.into())
            && self.equalities.iter().all(|c| c.dot(x) == c.rhs)
            && self.inequalities.iter().all(|c| c.dot(x) <= c.rhs)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Objective {
    #[serde(with = "serde_qvec")]
    pub coeffs: Vec<Q>,
    pub direction: Direction,
}

impl Objective {
    pub fn new(coeffs: Vec<Q>, direction: Direction) -> Self {
        Self { coeffs, direction }
    }

    /// `direction` of the total mass on `vars`.
    pub fn mass(num_vars: usize, vars: impl IntoIterator<Item = usize>, direction: Direction) -> Self {
        let mut coeffs = vec![Q::zero(); num_vars];
        for v in vars {
            coeffs[v] = Q::from_integer(1.into());
        }
        Self { coeffs, direction }
    }

    pub fn eval(&self, x: &[Q]) -> Q {
        let mut acc = Q::zero();
        for (c, v) in self.coeffs.iter().zip(x) {
            if !c.is_zero() {
                acc += c * v;
            }
        }
        acc
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Certificate {
    Feasible {
        #[serde(with = "serde_qvec")]
        point: Vec<Q>,
    },
    /// Multipliers `f` with `f ≥ 0` on inequality rows, `f·A ≥ 0` and `f·b < 0`.
    Infeasible {
        #[serde(with = "serde_qvec")]
        multipliers: Vec<Q>,
    },
    /// A feasible optimiser plus multipliers `y` with `y ≥ 0` on inequality
    /// rows, `y·A ≥ s·c` and `y·b = s·value`, where `s` is +1 for max, −1 for min.
    Optimal {
        objective: Objective,
        #[serde(with = "serde_qvec")]
        point: Vec<Q>,
        #[serde(with = "serde_q")]
        value: Q,
        #[serde(with = "serde_qvec")]
        multipliers: Vec<Q>,
    },
}

impl Certificate {
    pub fn is_feasible(&self) -> bool {
        !matches!(self, Certificate::Infeasible { .. })
    }

    pub fn point(&self) -> Option<&[Q]> {
        match self {
            Certificate::Feasible { point } | Certificate::Optimal { point, .. } => Some(point),
            Certificate::Infeasible { .. } => None,
        }
    }

    pub fn value(&self) -> Option<&Q> {
        match self {
            Certificate::Optimal { value, .. } => Some(value),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, q};

    #[test]
    fn constraint_merges_terms() {
        let c = Constraint::new([(2, int(1)), (0, int(3)), (2, int(-1)), (0, q(1, 2))], int(0));
        assert_eq!(c.terms, vec![Term { var: 0, coef: q(7, 2) }]);
    }

    #[test]
    fn certificate_json_round_trip() {
        let cert = Certificate::Optimal {
            objective: Objective::new(vec![int(1), int(0)], Direction::Max),
            point: vec![int(1), int(0)],
            value: int(1),
            multipliers: vec![q(1, 1)],
        };
        let text = serde_json::to_string(&cert).unwrap();
        assert!(text.contains("\"kind\":\"optimal\""));
        let back: Certificate = serde_json::from_str(&text).unwrap();
        assert_eq!(back, cert);
    }

    #[test]
    fn malformed_system_rejected() {
        let mut s = LinearSystem::new(2);
        s.add_equality([(5, int(1))], int(0));
        assert!(s.check_well_formed().is_err());
        assert!(LinearSystem::new(0).check_well_formed().is_err());
    }
}
