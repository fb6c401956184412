//! Order cells over finitely many rational parameters plus one new point `b`
//! above all of them.
//!
//! Cells are numbered `0..=2P` for `P` points: `2j` is the open interval just
//! below point `j`, `2j + 1` is point `j`, and `2P` lies above everything.

use std::cmp::Ordering;

use crate::algebra::{AtomSet, Fragment, FULL};
use crate::charge::{self, Charge};
use crate::error::{Error, Result};
use crate::rational::{self, Q};

use super::build::{project, sign_name, SpaceSpec};
use super::Scenario;

/// Level of sets definable over the rational parameters only.
pub const BASE_LEVEL: &str = "M";

pub(crate) fn build(params: &[Q]) -> Result<Scenario> {
    if params.is_empty() {
        return Err(Error::Recipe("dlo needs at least one rational parameter".into()));
    }
    if params.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Recipe("dlo parameters must be strictly increasing".into()));
    }
    let k = params.len();
    let points = k + 1;
    let labels: Vec<String> = params.iter().map(rational::format).chain(["b".to_string()]).collect();
    let cell_name = |c: usize| -> String {
        if c % 2 == 1 {
            format!("{{{}}}", labels[c / 2])
        } else {
            let lo = if c == 0 { "-inf" } else { &labels[c / 2 - 1] };
            let hi = if c == 2 * points { "inf" } else { &labels[c / 2] };
            format!("({lo},{hi})")
        }
    };
    let cells: Vec<usize> = (0..=2 * points).collect();
    let single = SpaceSpec::from_keys(cells.clone(), |&c| cell_name(c));

    let mut pairs = Vec::new();
    for &cx in &cells {
        for &cy in &cells {
            match cx.cmp(&cy) {
                Ordering::Less => pairs.push((cx, cy, -1i8)),
                Ordering::Greater => pairs.push((cx, cy, 1)),
                Ordering::Equal if cx % 2 == 1 => pairs.push((cx, cy, 0)),
                Ordering::Equal => pairs.extend([(cx, cy, -1), (cx, cy, 0), (cx, cy, 1)]),
            }
        }
    }
    let pair = SpaceSpec::from_keys(pairs, |&(cx, cy, o)| {
        format!("{}|{}|{}", cell_name(cx), cell_name(cy), sign_name(o, "<", "=", ">"))
    });

    // The base level cannot see b: everything above the last parameter merges.
    let top = 2 * k;
    let base = |c: usize| c.min(top);
    let mut b = Fragment::builder()
        .space(single.space("x")?)
        .space(single.space("y")?)
        .space(pair.space("xy")?);
    b = project(b, ("xy", &pair), ("x", &single), |k| k.0);
    b = project(b, ("xy", &pair), ("y", &single), |k| k.1);
    b = b
        .level(BASE_LEVEL, "x", single.level(|&c| base(c)))
        .level(BASE_LEVEL, "y", single.level(|&c| base(c)))
        .level(BASE_LEVEL, "xy", pair.level(|&(cx, cy, o)| (base(cx), base(cy), o)));
    let f = b.build()?;

    let just_above = top; // between the last parameter and b
    let beyond = 2 * points; // above b
    let xy = f.pair("xy", "x", "y")?;
    let mu = charge::convex(
        &rational::q(1, 2),
        &Charge::dirac(&f, "x", just_above)?,
        &Charge::dirac(&f, "x", beyond)?,
    )?;
    let nu = Charge::on_atoms(&f, "y", mu.values().to_vec())?;
    let diagonal: AtomSet = (0..pair.keys.len()).filter(|&w| pair.keys[w].2 == 0).collect();
    let omega = charge::graph_lift(&xy, &mu, &diagonal, FULL)?;
    let lambda = omega.restrict(&f, BASE_LEVEL)?;

    let above_b: AtomSet = [beyond].into();
    let below_b: AtomSet = (0..2 * k + 1).collect();
    let rect: AtomSet = (0..pair.keys.len())
        .filter(|&w| above_b.contains(&xy.left.apply(w)) && below_b.contains(&xy.right.apply(w)))
        .collect();

    let mut s = Scenario::new("dlo", f);
    s.add_charge("mu", mu);
    s.add_charge("nu", nu);
    s.add_charge("omega", omega);
    s.add_charge("lambda", lambda);
    s.add_charge("p_plus", Charge::dirac(&s.fragment, "x", just_above)?);
    s.add_charge("p_plus_inf", Charge::dirac(&s.fragment, "x", beyond)?);
    s.add_set("x>b", "x", above_b);
    s.add_set("x<b", "x", below_b.clone());
    s.add_set("y<b", "y", below_b);
    s.add_set("x=y", "xy", diagonal);
    s.add_set("x>b&y<b", "xy", rect);
    Ok(s)
}
