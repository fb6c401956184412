//! Two-phase dense-tableau simplex with Bland's rule.
//!
//! Every row gets its own artificial column, so the artificial block of the
//! tableau is `B⁻¹` at all times and dual multipliers are read off the
//! reduced costs of the artificials. Phase 1 runs once per system; each
//! objective then starts phase 2 from a copy of the feasible tableau.

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};

use super::{Certificate, Constraint, LinearSystem, Objective};
use crate::error::{Error, Result};
use crate::rational::Q;

pub fn solve(sys: &LinearSystem, objective: Option<&Objective>) -> Result<Certificate> {
    let prepared = Prepared::new(sys)?;
    match objective {
        None => Ok(prepared.feasibility()),
        Some(obj) => prepared.optimize(obj),
    }
}

/// Zero rows removed by presolve in one round, with the variables each forced.
type Round = Vec<(usize, Vec<usize>)>;

/// A system after presolve and phase 1, ready for repeated optimisation.
#[derive(Clone, Debug)]
pub struct Prepared {
    num_vars: usize,
    rows: Vec<Constraint>,
    kept_vars: Vec<usize>,
    kept_rows: Vec<usize>,
    rounds: Vec<Round>,
    outcome: Outcome,
}

#[derive(Clone, Debug)]
enum Outcome {
    Infeasible(Vec<Q>),
    Feasible(Tableau),
}

impl Prepared {
    pub fn new(sys: &LinearSystem) -> Result<Self> {
        sys.check_well_formed()?;
        let rows = sys.rows();
        let first_ineq = 1 + sys.equalities.len();
        let (kept_vars, kept_rows, rounds) = presolve(&rows, sys.num_vars, first_ineq);
        let mut prepared = Prepared {
            num_vars: sys.num_vars,
            rows,
            kept_vars,
            kept_rows,
            rounds,
            outcome: Outcome::Infeasible(Vec::new()),
        };
        let mut tab = Tableau::build(&prepared.rows, sys.num_vars, &prepared.kept_vars, &prepared.kept_rows, first_ineq);
        tab.phase_one();
        prepared.outcome = if tab.value().is_positive() {
            let y = tab.duals(|_| Q::one());
            let f: Vec<Q> = y.into_iter().map(|v| -v).collect();
            let lifted = prepared.lift(f, &vec![Q::zero(); sys.num_vars]);
            Outcome::Infeasible(lifted)
        } else {
            tab.drive_out_artificials();
            Outcome::Feasible(tab)
        };
        Ok(prepared)
    }

    pub fn is_feasible(&self) -> bool {
        matches!(self.outcome, Outcome::Feasible(_))
    }

    pub fn feasibility(&self) -> Certificate {
        match &self.outcome {
            Outcome::Infeasible(f) => Certificate::Infeasible { multipliers: f.clone() },
            Outcome::Feasible(tab) => Certificate::Feasible { point: self.expand(tab.point()) },
        }
    }

    pub fn optimize(&self, objective: &Objective) -> Result<Certificate> {
        if objective.coeffs.len() != self.num_vars {
            return Err(Error::Malformed(format!(
                "objective has {} coefficients for {} variables",
                objective.coeffs.len(),
                self.num_vars
            )));
        }
        let tab = match &self.outcome {
            Outcome::Infeasible(f) => return Ok(Certificate::Infeasible { multipliers: f.clone() }),
            Outcome::Feasible(tab) => tab,
        };
        let sign = Q::from_integer(objective.direction.sign().into());
        // internal problem: minimise −s·c
        let internal: Vec<Q> = self.kept_vars.iter().map(|&j| -(&sign * &objective.coeffs[j])).collect();
        let mut tab = tab.clone();
        tab.phase_two(&internal);
        let point = self.expand(tab.point());
        let value = objective.eval(&point);
        let y: Vec<Q> = tab.duals(|_| Q::zero()).into_iter().map(|v| -v).collect();
        let required: Vec<Q> = objective.coeffs.iter().map(|c| &sign * c).collect();
        let multipliers = self.lift(y, &required);
        Ok(Certificate::Optimal { objective: objective.clone(), point, value, multipliers })
    }

    fn expand(&self, reduced: Vec<Q>) -> Vec<Q> {
        let mut point = vec![Q::zero(); self.num_vars];
        for (v, &j) in reduced.into_iter().zip(&self.kept_vars) {
            point[j] = v;
        }
        point
    }

    /// Extends multipliers on the kept rows to every row so that each removed
    /// column `j` satisfies `y·A_j ≥ required[j]`.
    ///
    /// Removed rows have zero right-hand sides, so `y·b` is unchanged. A row
    /// removed in round `k` touches no column removed after round `k`, and its
    /// coefficients on the columns it forced share one sign; handling rounds
    /// from last to first therefore never undoes an earlier fix.
    fn lift(&self, reduced: Vec<Q>, required: &[Q]) -> Vec<Q> {
        let mut y = vec![Q::zero(); self.rows.len()];
        for (v, &r) in reduced.into_iter().zip(&self.kept_rows) {
            y[r] = v;
        }
        let mut removed = vec![false; self.num_vars];
        for round in &self.rounds {
            for (_, vars) in round {
                for &j in vars {
                    removed[j] = true;
                }
            }
        }
        let mut column: BTreeMap<usize, Q> = BTreeMap::new();
        for (r, row) in self.rows.iter().enumerate() {
            if y[r].is_zero() {
                continue;
            }
            for t in &row.terms {
                if removed[t.var] {
                    *column.entry(t.var).or_insert_with(Q::zero) += &y[r] * &t.coef;
                }
            }
        }
        for round in self.rounds.iter().rev() {
            for (r, vars) in round {
                let row = &self.rows[*r];
                let coef_of = |j: usize| {
                    let k = row.terms.binary_search_by_key(&j, |t| t.var).expect("forced column lies in its row");
                    &row.terms[k].coef
                };
                let mut need = Q::zero();
                for &j in vars {
                    let have = column.get(&j).cloned().unwrap_or_else(Q::zero);
                    let deficit = &required[j] - have;
                    if deficit.is_positive() {
                        let t = deficit / coef_of(j).abs();
                        if t > need {
                            need = t;
                        }
                    }
                }
                if need.is_zero() {
                    continue;
                }
                let t = if coef_of(vars[0]).is_negative() { -need } else { need };
                for term in &row.terms {
                    *column.entry(term.var).or_insert_with(Q::zero) += &t * &term.coef;
                }
                y[*r] += t;
            }
        }
        y
    }
}

/// Removes zero rows whose live coefficients share one sign, together with the
/// variables they force to zero, until nothing changes.
fn presolve(rows: &[Constraint], num_vars: usize, first_ineq: usize) -> (Vec<usize>, Vec<usize>, Vec<Round>) {
    let mut var_alive = vec![true; num_vars];
    let mut row_alive = vec![true; rows.len()];
    let mut rounds = Vec::new();
    loop {
        let mut round: Round = Vec::new();
        let mut forced = vec![false; num_vars];
        for (r, row) in rows.iter().enumerate().skip(1) {
            if !row_alive[r] {
                continue;
            }
            let is_ineq = r >= first_ineq;
            let live: Vec<_> = row.terms.iter().filter(|t| var_alive[t.var]).collect();
            if live.is_empty() {
                if row.rhs.is_zero() || (is_ineq && row.rhs.is_positive()) {
                    row_alive[r] = false;
                }
                continue;
            }
            if !row.rhs.is_zero() {
                continue;
            }
            let positive = live.iter().all(|t| t.coef.is_positive());
            let negative = live.iter().all(|t| t.coef.is_negative());
            if positive || (negative && !is_ineq) {
                let vars: Vec<usize> = live.iter().map(|t| t.var).filter(|&j| !forced[j]).collect();
                for &j in &vars {
                    forced[j] = true;
                }
                row_alive[r] = false;
                round.push((r, vars));
            }
        }
        if round.is_empty() {
            break;
        }
        for (_, vars) in &round {
            for &j in vars {
                var_alive[j] = false;
            }
        }
        rounds.push(round);
    }
    let kept_vars = (0..num_vars).filter(|&j| var_alive[j]).collect();
    let kept_rows = (0..rows.len()).filter(|&r| row_alive[r]).collect();
    (kept_vars, kept_rows, rounds)
}

#[derive(Clone, Debug)]
struct Tableau {
    a: Vec<Vec<Q>>,
    rhs: Vec<Q>,
    basis: Vec<usize>,
    /// Row signs: `true` where the original row was negated.
    flipped: Vec<bool>,
    num_structural: usize,
    first_art: usize,
    cost: Vec<Q>,
    reduced: Vec<Q>,
}

impl Tableau {
    fn build(rows: &[Constraint], num_vars: usize, kept_vars: &[usize], kept_rows: &[usize], first_ineq: usize) -> Self {
        let n = kept_vars.len();
        let mut col_of = vec![usize::MAX; num_vars];
        for (c, &j) in kept_vars.iter().enumerate() {
            col_of[j] = c;
        }
        let slacks = kept_rows.iter().filter(|&&r| r >= first_ineq).count();
        let m = kept_rows.len();
        let first_art = n + slacks;
        let width = first_art + m;
        let mut a = Vec::with_capacity(m);
        let mut rhs = Vec::with_capacity(m);
        let mut flipped = Vec::with_capacity(m);
        let mut slack = n;
        for (i, &r) in kept_rows.iter().enumerate() {
            let row = &rows[r];
            let mut dense = vec![Q::zero(); width];
            if r == 0 {
                dense[..n].fill(Q::one());
            } else {
                for t in &row.terms {
                    let c = col_of[t.var];
                    if c != usize::MAX {
                        dense[c] = t.coef.clone();
                    }
                }
            }
            if r >= first_ineq {
                dense[slack] = Q::one();
                slack += 1;
            }
            let flip = row.rhs.is_negative();
            if flip {
                for v in dense.iter_mut() {
                    if !v.is_zero() {
                        *v = -v.clone();
                    }
                }
            }
            dense[first_art + i] = Q::one();
            a.push(dense);
            rhs.push(if flip { -row.rhs.clone() } else { row.rhs.clone() });
            flipped.push(flip);
        }
        Tableau {
            a,
            rhs,
            basis: (first_art..width).collect(),
            flipped,
            num_structural: n,
            first_art,
            cost: vec![Q::zero(); width],
            reduced: vec![Q::zero(); width],
        }
    }

    fn width(&self) -> usize {
        self.cost.len()
    }

    fn set_cost(&mut self, cost: Vec<Q>) {
        let mut reduced = cost.clone();
        for (i, &b) in self.basis.iter().enumerate() {
            let cb = &cost[b];
            if cb.is_zero() {
                continue;
            }
            for (j, v) in self.a[i].iter().enumerate() {
                if !v.is_zero() {
                    reduced[j] -= cb * v;
                }
            }
        }
        self.cost = cost;
        self.reduced = reduced;
    }

    fn value(&self) -> Q {
        let mut z = Q::zero();
        for (i, &b) in self.basis.iter().enumerate() {
            if !self.cost[b].is_zero() {
                z += &self.cost[b] * &self.rhs[i];
            }
        }
        z
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.a[r][c].clone();
        if !p.is_one() {
            for v in self.a[r].iter_mut() {
                if !v.is_zero() {
                    *v /= &p;
                }
            }
            self.rhs[r] /= &p;
        }
        let support: Vec<usize> = (0..self.width()).filter(|&j| !self.a[r][j].is_zero()).collect();
        let pivot_row = std::mem::take(&mut self.a[r]);
        let pivot_rhs = self.rhs[r].clone();
        for i in 0..self.a.len() {
            if i == r || self.a[i][c].is_zero() {
                continue;
            }
            let factor = self.a[i][c].clone();
            let row = &mut self.a[i];
            for &j in &support {
                row[j] -= &factor * &pivot_row[j];
            }
            self.rhs[i] -= &factor * &pivot_rhs;
        }
        if !self.reduced[c].is_zero() {
            let factor = self.reduced[c].clone();
            for &j in &support {
                self.reduced[j] -= &factor * &pivot_row[j];
            }
        }
        self.a[r] = pivot_row;
        self.basis[r] = c;
    }

    /// Bland's rule over columns `< limit`.
    fn run(&mut self, limit: usize) {
        while let Some(c) = (0..limit).find(|&j| self.reduced[j].is_negative()) {
            let mut best: Option<(usize, Q)> = None;
            for i in 0..self.a.len() {
                if !self.a[i][c].is_positive() {
                    continue;
                }
                let ratio = &self.rhs[i] / &self.a[i][c];
                let better = match &best {
                    None => true,
                    Some((k, r)) => ratio < *r || (ratio == *r && self.basis[i] < self.basis[*k]),
                };
                if better {
                    best = Some((i, ratio));
                }
            }
            let (r, _) = best.expect("charge polytopes are bounded");
            self.pivot(r, c);
        }
    }

    fn phase_one(&mut self) {
        let mut cost = vec![Q::zero(); self.width()];
        for v in &mut cost[self.first_art..] {
            *v = Q::one();
        }
        self.set_cost(cost);
        self.run(self.width());
    }

    fn drive_out_artificials(&mut self) {
        for r in 0..self.a.len() {
            if self.basis[r] < self.first_art {
                continue;
            }
            if let Some(c) = (0..self.first_art).find(|&j| !self.a[r][j].is_zero()) {
                self.pivot(r, c);
            }
        }
    }

    fn phase_two(&mut self, structural_cost: &[Q]) {
        let mut cost = vec![Q::zero(); self.width()];
        cost[..self.num_structural].clone_from_slice(structural_cost);
        self.set_cost(cost);
        self.run(self.first_art);
    }

    fn point(&self) -> Vec<Q> {
        let mut x = vec![Q::zero(); self.num_structural];
        for (i, &b) in self.basis.iter().enumerate() {
            if b < self.num_structural {
                x[b] = self.rhs[i].clone();
            }
        }
        x
    }

    /// Duals `c_B·B⁻¹` in the original row signs, given the artificial costs.
    fn duals(&self, art_cost: impl Fn(usize) -> Q) -> Vec<Q> {
        (0..self.a.len())
            .map(|i| {
                let y = art_cost(i) - &self.reduced[self.first_art + i];
                if self.flipped[i] {
                    -y
                } else {
                    y
                }
            })
            .collect()
    }
}
