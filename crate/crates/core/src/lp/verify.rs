//! Certificate checks that share no code with the solver.

use num_traits::{Signed, Zero};

use super::{Certificate, Direction, LinearSystem};
use crate::rational::{format, Q};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("certificate rejected: {0}")]
pub struct Rejected(pub String);

fn reject<T>(msg: impl Into<String>) -> Result<T, Rejected> {
    Err(Rejected(msg.into()))
}

/// Checks that `x` satisfies every constraint of `sys`, implicit ones included.
pub fn check_point(sys: &LinearSystem, x: &[Q]) -> Result<(), Rejected> {
    if x.len() != sys.num_vars {
        return reject(format!("point has {} coordinates, expected {}", x.len(), sys.num_vars));
    }
    if let Some(j) = x.iter().position(Signed::is_negative) {
        return reject(format!("coordinate {j} is negative"));
    }
    let total: Q = x.iter().sum();
    if total != Q::from_integer(1.into()) {
        return reject(format!("coordinates sum to {}", format(&total)));
    }
    for (i, c) in sys.equalities.iter().enumerate() {
        if c.dot(x) != c.rhs {
            return reject(format!("equality {i} violated"));
        }
    }
    for (i, c) in sys.inequalities.iter().enumerate() {
        if c.dot(x) > c.rhs {
            return reject(format!("inequality {i} violated"));
        }
    }
    Ok(())
}

/// Returns `y·A` (per column) and `y·b` over all rows, the sum row included.
fn combine(sys: &LinearSystem, y: &[Q]) -> Result<(Vec<Q>, Q), Rejected> {
    if y.len() != sys.num_rows() {
        return reject(format!("{} multipliers for {} rows", y.len(), sys.num_rows()));
    }
    let first_ineq = 1 + sys.equalities.len();
    if let Some(i) = y[first_ineq..].iter().position(Signed::is_negative) {
        return reject(format!("inequality multiplier {i} is negative"));
    }
    let mut col = vec![y[0].clone(); sys.num_vars];
    let mut rhs = y[0].clone();
    for (c, m) in sys.equalities.iter().chain(&sys.inequalities).zip(&y[1..]) {
        if m.is_zero() {
            continue;
        }
        for t in &c.terms {
            if t.var >= sys.num_vars {
                return reject(format!("term references variable {}", t.var));
            }
            col[t.var] += m * &t.coef;
        }
        rhs += m * &c.rhs;
    }
    Ok((col, rhs))
}

pub fn check(sys: &LinearSystem, cert: &Certificate) -> Result<(), Rejected> {
    match cert {
        Certificate::Feasible { point } => check_point(sys, point),
        Certificate::Infeasible { multipliers } => {
            let (col, rhs) = combine(sys, multipliers)?;
            if let Some(j) = col.iter().position(Signed::is_negative) {
                return reject(format!("combined coefficient {j} is negative"));
            }
            if !rhs.is_negative() {
                return reject(format!("combined right-hand side {} is not negative", format(&rhs)));
            }
            Ok(())
        }
        Certificate::Optimal { objective, point, value, multipliers } => {
            check_point(sys, point)?;
            if objective.coeffs.len() != sys.num_vars {
                return reject("objective has the wrong length");
            }
            if objective.eval(point) != *value {
                return reject("objective value does not match the point");
            }
            let (col, rhs) = combine(sys, multipliers)?;
            let flip = objective.direction == Direction::Min;
            for (j, (a, c)) in col.iter().zip(&objective.coeffs).enumerate() {
                let target = if flip { -c.clone() } else { c.clone() };
                if *a < target {
                    return reject(format!("dual constraint {j} violated"));
                }
            }
            let target = if flip { -value.clone() } else { value.clone() };
            if rhs != target {
                return reject(format!("dual bound {} differs from {}", format(&rhs), format(&target)));
            }
            Ok(())
        }
    }
}
