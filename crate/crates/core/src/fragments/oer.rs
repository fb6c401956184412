//! A dense order with an equivalence relation, over points `m`, `s1..s2k`
//! and one new point `b` above them, each in its own class.
//!
//! A one-variable atom is an order cell together with a class pattern: one of
//! the named classes or "new". Sample cell `i` is the interval just below
//! `s_i` (with `s_0 = m`), so every sample cell sits below `b`.

use std::cmp::Ordering;

use crate::algebra::Fragment;
use crate::charge::Charge;
use crate::error::{Error, Result};
use crate::rational::Q;

use super::build::{project, sign_name, SpaceSpec};
use super::Scenario;

/// Level of sets definable without `b`.
pub const BASE_LEVEL: &str = "N";

type Single = (usize, usize);
type Double = (Single, Single, i8, bool);

pub(crate) fn build(k: usize) -> Result<Scenario> {
    if k == 0 {
        return Err(Error::Recipe("oer needs at least one sample".into()));
    }
    if k > 8 {
        return Err(Error::TooLarge(format!("oer with k = {k} exceeds 8")));
    }
    let points = 2 * k + 2;
    let new = points;
    let b = points - 1;
    let mut labels = vec!["m".to_string()];
    labels.extend((1..=2 * k).map(|i| format!("s{i}")));
    labels.push("b".into());

    let cell_name = |c: usize| -> String {
        if c % 2 == 1 {
            return format!("{{{}}}", labels[c / 2]);
        }
        let lo = if c == 0 { "-inf" } else { &labels[c / 2 - 1] };
        let hi = labels.get(c / 2).map_or("inf", String::as_str);
        format!("({lo},{hi})")
    };
    let pattern_name = |p: usize| if p == new { "new".to_string() } else { format!("[{}]", labels[p]) };
    let single_name = |s: &Single| format!("{}~{}", cell_name(s.0), pattern_name(s.1));

    let mut singles = Vec::new();
    for c in 0..=2 * points {
        if c % 2 == 1 {
            singles.push((c, c / 2));
        } else {
            singles.extend((0..=new).map(|p| (c, p)));
        }
    }
    let mut doubles = Vec::new();
    for &sx in &singles {
        for &sy in &singles {
            let named = sx.1 != new || sy.1 != new;
            let classes: &[bool] = if named {
                if sx.1 == sy.1 { &[true] } else { &[false] }
            } else {
                &[false, true]
            };
            let orders: Vec<i8> = match sx.0.cmp(&sy.0) {
                Ordering::Less => vec![-1],
                Ordering::Greater => vec![1],
                Ordering::Equal if sx.0 % 2 == 1 => vec![0],
                Ordering::Equal if sx == sy => vec![-1, 0, 1],
                Ordering::Equal => vec![-1, 1],
            };
            for &o in &orders {
                for &e in classes {
                    if o == 0 && !e {
                        continue;
                    }
                    doubles.push((sx, sy, o, e));
                }
            }
        }
    }
    let single = SpaceSpec::from_keys(singles, single_name);
    let double = SpaceSpec::from_keys(doubles, |d: &Double| {
        format!(
            "{}|{}|{}|{}",
            single_name(&d.0),
            single_name(&d.1),
            sign_name(d.2, "<", "=", ">"),
            if d.3 { "E" } else { "~E" }
        )
    });

    // Without b, the cells from (s2k, b) upward merge and b's class is new.
    let top = 2 * b;
    let base = move |s: &Single| (s.0.min(top), if s.1 == b { new } else { s.1 });
    let mut fb = Fragment::builder()
        .space(single.space("x")?)
        .space(single.space("y")?)
        .space(double.space("xy")?)
        .level(BASE_LEVEL, "x", single.level(base))
        .level(BASE_LEVEL, "y", single.level(base))
        .level(BASE_LEVEL, "xy", double.level(|d| (base(&d.0), base(&d.1), d.2, d.3)));
    fb = project(fb, ("xy", &double), ("x", &single), |d| d.0);
    fb = project(fb, ("xy", &double), ("y", &single), |d| d.1);
    let f = fb.build()?;

    let si = single.index();
    let di = double.index();
    let share = Q::new(1.into(), (k as i64).into());
    let sample = |i: usize| (2 * i, new);
    let spread = |space: &str, range: std::ops::RangeInclusive<usize>| -> Result<Charge> {
        let mut values = vec![Q::from_integer(0.into()); single.keys.len()];
        for i in range {
            values[si[&sample(i)]] = share.clone();
        }
        Charge::on_atoms(&f, space, values)
    };
    let pairing = |forward: bool| -> Result<Charge> {
        let alg = f.algebra("xy", BASE_LEVEL)?;
        let mut values = vec![Q::from_integer(0.into()); alg.num_blocks()];
        for i in 1..=k {
            let key = if forward {
                (sample(i), sample(k + i), -1, true)
            } else {
                (sample(k + i), sample(i), 1, true)
            };
            values[alg.block_of(di[&key])] += &share;
        }
        Charge::new(&f, "xy", BASE_LEVEL, values)
    };

    let mu = spread("x", 1..=k)?;
    let nu = spread("y", k + 1..=2 * k)?;
    let nu_x = spread("x", k + 1..=2 * k)?;
    let mu_y = spread("y", 1..=k)?;
    let lambda = pairing(true)?;
    let lambda_t = pairing(false)?;
    let same_class = (0..double.keys.len()).filter(|&w| double.keys[w].3).collect();
    let named: Vec<(String, _)> = (0..points)
        .map(|p| {
            let set = (0..single.keys.len()).filter(|&a| single.keys[a].1 == p).collect();
            (format!("E(x,{})", labels[p]), set)
        })
        .collect();

    let mut s = Scenario::new("oer", f);
    s.add_charge("mu", mu);
    s.add_charge("nu", nu);
    s.add_charge("nu_on_x", nu_x);
    s.add_charge("mu_on_y", mu_y);
    s.add_charge("lambda", lambda);
    s.add_charge("lambda_transposed", lambda_t);
    s.add_set("E(x,y)", "xy", same_class);
    for (name, set) in named {
        s.add_set(&name, "x", set);
    }
    Ok(s)
}
