//! Vertex enumeration by basis enumeration, an oracle for small systems.

use std::collections::BTreeSet;

use num_traits::{Signed, Zero};

use super::{LinearSystem, Objective};
use crate::error::{Error, Result};
use crate::rational::Q;

pub const DEFAULT_VERTEX_BOUND: usize = 10;

/// All vertices of the system's polytope, sorted; empty iff infeasible.
///
/// Works on the standard form with one slack per inequality: a vertex is a
/// nonnegative solution whose support columns are linearly independent, so
/// every independent column subset is solved and the nonnegative solutions
/// are kept.
pub fn enumerate_vertices(sys: &LinearSystem, bound: usize) -> Result<Vec<Vec<Q>>> {
    sys.check_well_formed()?;
    if sys.num_vars > bound {
        return Err(Error::TooLarge(format!("{} atoms exceed the vertex bound {bound}", sys.num_vars)));
    }
    let n = sys.num_vars;
    let slacks = sys.inequalities.len();
    let cols = n + slacks;
    let rows = sys.rows();
    let first_ineq = 1 + sys.equalities.len();
    let mut matrix = vec![vec![Q::zero(); cols]; rows.len()];
    let mut rhs = Vec::with_capacity(rows.len());
    for (i, row) in rows.iter().enumerate() {
        for t in &row.terms {
            matrix[i][t.var] = t.coef.clone();
        }
        if i >= first_ineq {
            matrix[i][n + i - first_ineq] = Q::from_integer(1.into());
        }
        rhs.push(row.rhs.clone());
    }
    let mut found = BTreeSet::new();
    let mut subset = Vec::new();
    collect(&matrix, &rhs, cols, 0, &mut subset, &mut found, n);
    Ok(found.into_iter().collect())
}

fn collect(
    matrix: &[Vec<Q>],
    rhs: &[Q],
    cols: usize,
    start: usize,
    subset: &mut Vec<usize>,
    found: &mut BTreeSet<Vec<Q>>,
    n: usize,
) {
    match solve_columns(matrix, rhs, subset) {
        Basis::Dependent => return,
        Basis::Solution(x) => {
            if x.iter().all(|v| !v.is_negative()) {
                let mut point = vec![Q::zero(); n];
                for (&c, v) in subset.iter().zip(x) {
                    if c < n {
                        point[c] = v;
                    }
                }
                found.insert(point);
            }
        }
        Basis::Inconsistent => {}
    }
    if subset.len() == matrix.len() {
        return;
    }
    for c in start..cols {
        subset.push(c);
        collect(matrix, rhs, cols, c + 1, subset, found, n);
        subset.pop();
    }
}

enum Basis {
    Dependent,
    Inconsistent,
    Solution(Vec<Q>),
}

/// Gaussian elimination on the chosen columns with the right-hand side.
fn solve_columns(matrix: &[Vec<Q>], rhs: &[Q], subset: &[usize]) -> Basis {
    let k = subset.len();
    let mut m: Vec<Vec<Q>> = matrix
        .iter()
        .zip(rhs)
        .map(|(row, b)| subset.iter().map(|&c| row[c].clone()).chain(std::iter::once(b.clone())).collect())
        .collect();
    for col in 0..k {
        let Some(p) = (col..m.len()).find(|&i| !m[i][col].is_zero()) else {
            return Basis::Dependent;
        };
        m.swap(col, p);
        let lead = m[col][col].clone();
        for v in m[col].iter_mut() {
            *v /= &lead;
        }
        let pivot = m[col].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i != col && !row[col].is_zero() {
                let factor = row[col].clone();
                for (v, p) in row[col..=k].iter_mut().zip(&pivot[col..=k]) {
                    *v -= &factor * p;
                }
            }
        }
    }
    if m[k..].iter().any(|row| !row[k].is_zero()) {
        return Basis::Inconsistent;
    }
    Basis::Solution(m[..k].iter().map(|row| row[k].clone()).collect())
}

/// Optimum of `objective` over a vertex list, `None` when the list is empty.
pub fn optimize_over_vertices(vertices: &[Vec<Q>], objective: &Objective) -> Option<Q> {
    let values = vertices.iter().map(|v| objective.eval(v));
    match objective.direction {
        super::Direction::Min => values.min(),
        super::Direction::Max => values.max(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, q};

    #[test]
    fn two_atom_simplex() {
        let sys = LinearSystem::new(2);
        let v = enumerate_vertices(&sys, DEFAULT_VERTEX_BOUND).unwrap();
        assert_eq!(v, vec![vec![int(0), int(1)], vec![int(1), int(0)]]);
    }

    #[test]
    fn infeasible_has_no_vertices() {
        let mut sys = LinearSystem::new(2);
        sys.add_equality([(0, int(1))], int(1));
        sys.add_equality([(0, int(1))], int(0));
        assert!(enumerate_vertices(&sys, DEFAULT_VERTEX_BOUND).unwrap().is_empty());
    }

    #[test]
    fn inequality_cuts_a_corner() {
        let mut sys = LinearSystem::new(2);
        sys.add_inequality([(0, int(1))], q(1, 3));
        let v = enumerate_vertices(&sys, DEFAULT_VERTEX_BOUND).unwrap();
        assert_eq!(v, vec![vec![int(0), int(1)], vec![q(1, 3), q(2, 3)]]);
    }

    #[test]
    fn bound_enforced() {
        assert!(matches!(enumerate_vertices(&LinearSystem::new(11), 10), Err(Error::TooLarge(_))));
    }
}
