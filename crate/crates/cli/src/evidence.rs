//! Turning solver output into report evidence.

use extdom::domination::DominationVerdict;
use extdom::lp::{self, Certificate, Direction, LinearSystem, Objective, Prepared};
use extdom::rational::{self, Q};
use extdom::Result;
use rayon::prelude::*;

use crate::report::{Claim, Evidence, Range};

pub fn claim_of(cert: &Certificate) -> Claim {
    match cert {
        Certificate::Feasible { .. } => Claim::Feasible,
        Certificate::Infeasible { .. } => Claim::Infeasible,
        Certificate::Optimal { value, .. } => Claim::Optimum { value: rational::format(value) },
    }
}

pub fn linear(label: &str, system: &LinearSystem, certificate: &Certificate) -> Evidence {
    Evidence::Linear {
        label: label.into(),
        claim: claim_of(certificate),
        system: system.clone(),
        certificate: certificate.clone(),
    }
}

/// Solves `system` and returns the certificate with its evidence.
pub fn solve(label: &str, system: &LinearSystem, objective: Option<&Objective>) -> Result<(Certificate, Evidence)> {
    let cert = lp::solve(system, objective)?;
    let e = linear(label, system, &cert);
    Ok((cert, e))
}

/// Optimum of the total mass on `vars`; errors when the system is empty.
pub fn mass_optimum(
    label: &str,
    system: &LinearSystem,
    vars: impl IntoIterator<Item = usize>,
    direction: Direction,
) -> Result<(Q, Evidence)> {
    let objective = Objective::mass(system.num_vars, vars, direction);
    let (cert, e) = solve(label, system, Some(&objective))?;
    let value = cert.value().cloned().ok_or(extdom::Error::Infeasible)?;
    Ok((value, e))
}

/// Minimum and maximum of every variable over `system`; the flag says whether
/// each range is a single value.
pub fn ranges(label: &str, system: &LinearSystem, names: &[String]) -> Result<(bool, Evidence)> {
    let prepared = Prepared::new(system)?;
    let n = system.num_vars;
    let ranges = (0..n)
        .into_par_iter()
        .map(|a| -> Result<Range> {
            Ok(Range {
                atom: names[a].clone(),
                min: prepared.optimize(&Objective::mass(n, [a], Direction::Min))?,
                max: prepared.optimize(&Objective::mass(n, [a], Direction::Max))?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let exact = ranges.iter().all(|r| r.min.value() == r.max.value());
    Ok((exact, Evidence::Ranges { label: label.into(), exact, system: system.clone(), ranges }))
}

pub fn domination(label: &str, verdict: &DominationVerdict) -> Evidence {
    Evidence::Domination { label: label.into(), verdict: verdict.clone() }
}
