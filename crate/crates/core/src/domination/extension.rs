//! Common extensions of charges on two subalgebras of one space, and the
//! range of values an extension can give a new set.

use std::sync::Arc;

use num_traits::Zero;

use crate::algebra::{AtomSet, Subalgebra};
use crate::charge::Charge;
use crate::error::{Error, Result};
use crate::lp::{self, Certificate, LinearSystem};
use crate::rational::{self, Q};

/// Largest number of blocks whose subsets the hull route will scan.
const HULL_SCAN_LIMIT: usize = 20;

#[derive(Clone, Debug)]
pub struct CommonExtension {
    pub exists: bool,
    pub system: LinearSystem,
    pub certificate: Certificate,
    /// A full-level common extension when one exists.
    pub witness: Option<Vec<Q>>,
}

/// Rows forcing each block of `c` to carry its value.
fn block_rows(sys: &mut LinearSystem, c: &Charge) {
    for (block, v) in c.algebra().blocks().iter().zip(c.values()) {
        sys.add_equality(block.iter().map(|&a| (a, Q::from_integer(1.into()))), v.clone());
    }
}

pub fn common_extension_system(m1: &Charge, m2: &Charge) -> Result<LinearSystem> {
    if m1.space() != m2.space() || m1.algebra().universe() != m2.algebra().universe() {
        return Err(Error::SpaceMismatch(format!("{:?} and {:?}", m1.space(), m2.space())));
    }
    let mut sys = LinearSystem::new(m1.algebra().universe());
    block_rows(&mut sys, m1);
    block_rows(&mut sys, m2);
    Ok(sys)
}

/// Decides whether `m1` and `m2` have a common extension to the full algebra.
///
/// Two routes are run and must agree: the hull inequality `m1(S) ≤ m2(outer
/// hull of S)` over every union `S` of blocks of the side with fewer blocks,
/// and LP feasibility of the block-sum system.
pub fn common_extension_check(m1: &Charge, m2: &Charge) -> Result<CommonExtension> {
    let system = common_extension_system(m1, m2)?;
    let certificate = lp::solve(&system, None)?;
    let exists = certificate.is_feasible();
    if hull_condition(m1, m2)? != exists {
        return Err(Error::Inconsistent("hull condition and LP feasibility disagree".into()));
    }
    let witness = certificate.point().map(<[Q]>::to_vec);
    Ok(CommonExtension { exists, system, certificate, witness })
}

/// `m1(S) ≤ m2(outer hull of S)` for every union of blocks `S`, scanned on the
/// side with fewer blocks (the condition is symmetric under swapping sides).
pub fn hull_condition(m1: &Charge, m2: &Charge) -> Result<bool> {
    let (small, large) = if m1.algebra().num_blocks() <= m2.algebra().num_blocks() {
        (m1, m2)
    } else {
        (m2, m1)
    };
    let k = small.algebra().num_blocks();
    if k > HULL_SCAN_LIMIT {
        return Err(Error::TooLarge(format!("{k} blocks for the hull scan")));
    }
    for mask in 0u64..(1 << k) {
        let chosen = (0..k).filter(|b| mask >> b & 1 == 1);
        let s = small.algebra().union_of(chosen);
        let (_, outer) = large.algebra().hulls(&s);
        if small.evaluate(&s)? > large.evaluate(&outer)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `(m(inner hull), m(outer hull))` of `target` in `m`'s algebra.
pub fn extension_range(m: &Charge, target: &AtomSet) -> Result<(Q, Q)> {
    let (inner, outer) = m.algebra().hulls(target);
    Ok((m.evaluate(&inner)?, m.evaluate(&outer)?))
}

/// Block sums of `m` plus `target` carrying `d`.
pub fn value_system(m: &Charge, target: &AtomSet, d: &Q) -> LinearSystem {
    let mut sys = LinearSystem::new(m.algebra().universe());
    block_rows(&mut sys, m);
    sys.add_equality(target.iter().map(|&a| (a, Q::from_integer(1.into()))), d.clone());
    sys
}

pub const EXTENDED_LEVEL: &str = "extended";

/// Extends `m` to the algebra generated by its own and `target`, giving
/// `target` the value `d`.
pub fn extend_with_value(m: &Charge, target: &AtomSet, d: &Q) -> Result<Charge> {
    let (r1, r2) = extension_range(m, target)?;
    let sys = value_system(m, target, d);
    let cert = lp::solve(&sys, None)?;
    let Some(point) = cert.point() else {
        return Err(Error::OutOfRange {
            value: rational::format(d),
            low: rational::format(&r1),
            high: rational::format(&r2),
        });
    };
    let n = m.algebra().universe();
    let split = Subalgebra::from_labels(&(0..n).map(|a| target.contains(&a)).collect::<Vec<_>>());
    let joined = Arc::new(m.algebra().join(&split)?);
    let full = Arc::new(Subalgebra::discrete(n));
    let lifted = Charge::from_parts(m.space(), crate::algebra::FULL, full, point.to_vec())?;
    lifted.restrict_to(EXTENDED_LEVEL, joined)
}

/// Exhaustive scan of all measurable pairs `S ⊆ T`; exponential, an oracle only.
pub fn subset_scan(m1: &Charge, m2: &Charge) -> Result<bool> {
    let (a, b) = (m1.algebra(), m2.algebra());
    let (ka, kb) = (a.num_blocks(), b.num_blocks());
    if ka + kb > 2 * HULL_SCAN_LIMIT {
        return Err(Error::TooLarge(format!("{} blocks for the subset scan", ka + kb)));
    }
    for sa in 0u64..(1 << ka) {
        let s = a.union_of((0..ka).filter(|i| sa >> i & 1 == 1));
        let ms = m1.evaluate(&s)?;
        if ms.is_zero() {
            continue;
        }
        for sb in 0u64..(1 << kb) {
            let t = b.union_of((0..kb).filter(|i| sb >> i & 1 == 1));
            if s.is_subset(&t) && ms > m2.evaluate(&t)? {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, q};

    fn on(n: usize, blocks: &[Vec<usize>], values: Vec<Q>) -> Charge {
        let alg = Arc::new(Subalgebra::from_blocks(n, blocks).unwrap());
        Charge::from_parts("x", "A", alg, values).unwrap()
    }

    fn set(items: &[usize]) -> AtomSet {
        items.iter().copied().collect()
    }

    #[test]
    fn trivial_algebras_always_extend() {
        let a = on(3, &[vec![0, 1, 2]], vec![int(1)]);
        let r = common_extension_check(&a, &a).unwrap();
        assert!(r.exists);
        assert!(subset_scan(&a, &a).unwrap());
    }

    #[test]
    fn equal_algebras_different_values() {
        let a = on(2, &[vec![0], vec![1]], vec![q(1, 3), q(2, 3)]);
        let b = on(2, &[vec![0], vec![1]], vec![q(1, 2), q(1, 2)]);
        assert!(!common_extension_check(&a, &b).unwrap().exists);
        assert!(!subset_scan(&a, &b).unwrap());
    }

    #[test]
    fn range_examples() {
        let m = on(4, &[vec![0, 1], vec![2, 3]], vec![q(1, 2), q(1, 2)]);
        assert_eq!(extension_range(&m, &set(&[0, 2])).unwrap(), (int(0), int(1)));
        assert_eq!(extension_range(&m, &set(&[0, 1])).unwrap(), (q(1, 2), q(1, 2)));
        assert_eq!(extension_range(&m, &set(&[])).unwrap(), (int(0), int(0)));
        assert_eq!(extension_range(&m, &set(&[0, 1, 2, 3])).unwrap(), (int(1), int(1)));
    }

    #[test]
    fn extend_inside_and_outside_range() {
        let m = on(4, &[vec![0, 1], vec![2, 3]], vec![q(1, 2), q(1, 2)]);
        let target = set(&[0, 2]);
        let e = extend_with_value(&m, &target, &q(1, 3)).unwrap();
        assert_eq!(e.evaluate(&target).unwrap(), q(1, 3));
        assert_eq!(e.evaluate(&set(&[0, 1])).unwrap(), q(1, 2));
        let sys = value_system(&m, &target, &q(3, 2));
        let cert = lp::solve(&sys, None).unwrap();
        assert!(!cert.is_feasible());
        lp::verify::check(&sys, &cert).unwrap();
        assert!(matches!(extend_with_value(&m, &target, &q(3, 2)), Err(Error::OutOfRange { .. })));
    }

    #[test]
    fn measurable_target_is_determined() {
        let m = on(3, &[vec![0, 1], vec![2]], vec![q(1, 4), q(3, 4)]);
        let e = extend_with_value(&m, &set(&[2]), &q(3, 4)).unwrap();
        assert_eq!(e.algebra().as_ref(), m.algebra().as_ref());
        assert_eq!(e.values(), m.values());
    }
}
