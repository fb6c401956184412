use extdom::algebra::{validate_fragment, AtomSet, AtomSpace, Automorphism, Fragment, Subalgebra, FULL};
use extdom::charge::{self, Charge};
use extdom::domination::{
    amalgam_space, block_dirac, compose_witness, convex_decipher_witness, deciphers, dominates, extension_space,
    invariant_extension, is_finitely_satisfiable, is_smooth_over, lift_witness, separating_set, squeeze_check,
    type_dominates, Composition, Triple, REASON_EMPTY, REASON_MISMATCH,
};
use extdom::fragments::{self, random, RandomSpec};
use extdom::lp::{self, verify, Direction, Objective, DEFAULT_VERTEX_BOUND};
use extdom::rational::{int, q, Q};

fn space(id: &str, atoms: &[&str]) -> AtomSpace {
    AtomSpace::new(id, atoms.iter().map(|s| s.to_string()).collect()).unwrap()
}

fn set(items: &[usize]) -> AtomSet {
    items.iter().copied().collect()
}

fn qs(v: &[(i64, i64)]) -> Vec<Q> {
    v.iter().map(|&(n, d)| q(n, d)).collect()
}

/// x = {1,2}, y = {a,b}, xy = 1a,1b,2a,2b. Level A is trivial on x and
/// given on y and xy.
fn square(y_a: Subalgebra, xy_a: Subalgebra) -> Fragment {
    Fragment::builder()
        .space(space("x", &["1", "2"]))
        .space(space("y", &["a", "b"]))
        .space(space("xy", &["1a", "1b", "2a", "2b"]))
        .projection("xy", "x", vec![0, 0, 1, 1])
        .projection("xy", "y", vec![0, 1, 0, 1])
        .level("A", "x", Subalgebra::trivial(2))
        .level("A", "y", y_a)
        .level("A", "xy", xy_a)
        .build()
        .unwrap()
}

fn blind() -> Fragment {
    square(Subalgebra::trivial(2), Subalgebra::trivial(4))
}

/// Level A sees the y-coordinate only.
fn sees_y() -> Fragment {
    square(Subalgebra::discrete(2), Subalgebra::from_labels(&[0, 1, 0, 1]))
}

fn product(f: &Fragment, mu: &[Q], nu: &[Q]) -> Charge {
    let values = mu.iter().flat_map(|m| nu.iter().map(move |n| m * n)).collect();
    Charge::on_atoms(f, "xy", values).unwrap()
}

#[test]
fn full_witness_with_matching_marginal_dominates() {
    let f = blind();
    assert!(validate_fragment(&f).is_empty());
    let pair = f.pair("xy", "x", "y").unwrap();
    let (m, n) = (qs(&[(1, 3), (2, 3)]), qs(&[(1, 4), (3, 4)]));
    let mu = Charge::on_atoms(&f, "x", m.clone()).unwrap();
    let nu = Charge::on_atoms(&f, "y", n.clone()).unwrap();
    let lam = product(&f, &m, &n);
    let v = dominates(&pair, &mu, &nu, &lam).unwrap();
    assert!(v.holds);
    assert!(v.ranges.iter().all(|r| r.is_exact()));
    assert!(v.counterexample.is_none());
    v.verify().unwrap();
    assert!(squeeze_check(&pair, &mu, &nu, &lam).unwrap().holds);
}

#[test]
fn trivial_witness_does_not_force_marginal() {
    let f = blind();
    let pair = f.pair("xy", "x", "y").unwrap();
    let mu = Charge::on_atoms(&f, "x", qs(&[(1, 2), (1, 2)])).unwrap();
    let nu = Charge::on_atoms(&f, "y", qs(&[(1, 2), (1, 2)])).unwrap();
    let lam = Charge::new(&f, "xy", "A", vec![int(1)]).unwrap();
    let v = dominates(&pair, &mu, &nu, &lam).unwrap();
    assert!(!v.holds);
    assert_eq!(v.reason.as_deref(), Some(REASON_MISMATCH));
    let ce = v.counterexample.clone().unwrap();
    verify::check_point(&v.system, &ce).unwrap();
    v.verify().unwrap();

    // The image of the extension space on the first y-fiber is not a point.
    let sys = extension_space(&pair, &lam, &mu).unwrap();
    let vertices = lp::enumerate_vertices(&sys, DEFAULT_VERTEX_BOUND).unwrap();
    let fiber = Objective::mass(4, [0, 2], Direction::Min);
    let masses: AtomSet = vertices.iter().map(|p| if fiber.eval(p) == int(0) { 0 } else { 1 }).collect();
    assert_eq!(masses.len(), 2);
    assert!(!squeeze_check(&pair, &mu, &nu, &lam).unwrap().holds);
}

#[test]
fn measurable_fibers_reduce_to_block_values() {
    let f = sees_y();
    assert!(validate_fragment(&f).is_empty());
    let pair = f.pair("xy", "x", "y").unwrap();
    let mu = Charge::on_atoms(&f, "x", qs(&[(1, 5), (4, 5)])).unwrap();
    let lam = Charge::new(&f, "xy", "A", qs(&[(1, 4), (3, 4)])).unwrap();
    let forced = Charge::on_atoms(&f, "y", qs(&[(1, 4), (3, 4)])).unwrap();
    let other = Charge::on_atoms(&f, "y", qs(&[(1, 2), (1, 2)])).unwrap();

    let s = squeeze_check(&pair, &mu, &forced, &lam).unwrap();
    assert!(s.holds);
    assert!(s.rows.iter().all(|r| r.inner == r.outer));
    assert!(dominates(&pair, &mu, &forced, &lam).unwrap().holds);
    assert!(!dominates(&pair, &mu, &other, &lam).unwrap().holds);
    assert!(!squeeze_check(&pair, &mu, &other, &lam).unwrap().holds);
}

#[test]
fn inconsistent_witness_is_rejected() {
    let f = sees_y();
    let pair = f.pair("xy", "x", "y").unwrap();
    let mu = Charge::on_atoms(&f, "x", qs(&[(1, 2), (1, 2)])).unwrap();
    let lam = product(&f, &qs(&[(1, 3), (2, 3)]), &qs(&[(1, 2), (1, 2)]));
    assert!(extension_space(&pair, &lam, &mu).is_err());
}

#[test]
fn dirac_left_deciphers_iff_dominates() {
    for f in [blind(), sees_y()] {
        let pair = f.pair("xy", "x", "y").unwrap();
        let mu = Charge::dirac(&f, "x", 0).unwrap();
        let omega = Charge::on_atoms(&f, "xy", qs(&[(1, 3), (2, 3), (0, 1), (0, 1)])).unwrap();
        let lam = omega.restrict(&f, "A").unwrap();
        assert!(charge::is_separated_amalgam(&pair, &omega).unwrap());
        let amal = amalgam_space(&pair, &lam, &mu).unwrap();
        assert!(lp::solve(&amal, None).unwrap().is_feasible());
        for nu in [qs(&[(1, 3), (2, 3)]), qs(&[(1, 1), (0, 1)])] {
            let nu = Charge::on_atoms(&f, "y", nu).unwrap();
            let d = dominates(&pair, &mu, &nu, &lam).unwrap();
            let c = deciphers(&pair, &mu, &nu, &lam).unwrap();
            assert_eq!(d.holds, c.holds);
            d.verify().unwrap();
            c.verify().unwrap();
        }
    }
}

#[test]
fn dlo_deciphering_fails_for_emptiness() {
    let s = fragments::build_dlo(&[int(0)]).unwrap();
    let pair = s.fragment.pair("xy", "x", "y").unwrap();
    let (mu, nu, lam) = (s.charge("mu").unwrap(), s.charge("nu").unwrap(), s.charge("lambda").unwrap());
    let c = deciphers(&pair, mu, nu, lam).unwrap();
    assert!(!c.holds);
    assert_eq!(c.reason.as_deref(), Some(REASON_EMPTY));
    verify::check(&c.system, c.emptiness.as_ref().unwrap()).unwrap();
    c.verify().unwrap();
    let sys = extension_space(&pair, lam, mu).unwrap();
    assert!(lp::solve(&sys, None).unwrap().is_feasible());
}

/// x = {1,2}, y = {a,b}, z a copy of y; every space at the full level.
fn copied_triple() -> Fragment {
    let b = Fragment::builder()
        .space(space("x", &["1", "2"]))
        .space(space("y", &["a", "b"]))
        .space(space("z", &["a", "b"]))
        .space(space("xy", &["1a", "1b", "2a", "2b"]))
        .space(space("xz", &["1a", "1b", "2a", "2b"]))
        .space(space("yz", &["aa", "bb"]))
        .space(space("xyz", &["1aa", "1bb", "2aa", "2bb"]));
    let by_x = vec![0, 0, 1, 1];
    let by_y = vec![0, 1, 0, 1];
    b.projection("xyz", "xy", vec![0, 1, 2, 3])
        .projection("xyz", "xz", vec![0, 1, 2, 3])
        .projection("xyz", "yz", by_y.clone())
        .projection("xyz", "x", by_x.clone())
        .projection("xyz", "y", by_y.clone())
        .projection("xyz", "z", by_y.clone())
        .projection("xy", "x", by_x.clone())
        .projection("xy", "y", by_y.clone())
        .projection("xz", "x", by_x)
        .projection("xz", "z", by_y)
        .projection("yz", "y", vec![0, 1])
        .projection("yz", "z", vec![0, 1])
        .build()
        .unwrap()
}

#[test]
fn composing_with_a_copy_transports_the_witness() {
    let f = copied_triple();
    assert!(validate_fragment(&f).is_empty());
    let (m, n) = (qs(&[(1, 3), (2, 3)]), qs(&[(1, 4), (3, 4)]));
    let lam1 = product(&f, &m, &n);
    let yz = f.pair("yz", "y", "z").unwrap();
    let nu = Charge::on_atoms(&f, "y", n.clone()).unwrap();
    let diagonal = charge::diagonal_set(&yz, |a, b| a == b);
    let lam2 = charge::graph_lift(&yz, &nu, &diagonal, FULL).unwrap();
    let c = compose_witness(&f, &Triple::default(), &lam1, &lam2).unwrap();
    c.verify().unwrap();
    let w = c.witness().unwrap();
    assert_eq!(w.space(), "xz");
    assert_eq!(w.values(), lam1.values());

    let xz = f.pair("xz", "x", "z").unwrap();
    let mu = Charge::on_atoms(&f, "x", m).unwrap();
    let eta = Charge::on_atoms(&f, "z", n).unwrap();
    assert!(dominates(&xz, &mu, &eta, w).unwrap().holds);
}

#[test]
fn composing_rejects_mismatched_middles() {
    let f = copied_triple();
    let lam1 = product(&f, &qs(&[(1, 2), (1, 2)]), &qs(&[(1, 2), (1, 2)]));
    let lam2 = Charge::on_atoms(&f, "yz", qs(&[(1, 3), (2, 3)])).unwrap();
    assert!(compose_witness(&f, &Triple::default(), &lam1, &lam2).is_err());
}

/// Two factors whose product space lacks the atoms a glued triple would
/// need: premises compose on y, but no triple charge carries both.
#[test]
fn unglued_triples_can_block_composition() {
    let mut found = None;
    for seed in 0..400 {
        let spec = RandomSpec { seed, x_atoms: 3, xy_atoms: 8, triple: true, ..Default::default() };
        let f = random::build(&spec).unwrap();
        assert!(validate_fragment(&f).is_empty());
        let mut rng = random::rng(seed);
        let xy = f.pair("xy", "x", "y").unwrap();
        let yz = f.pair("yz", "y", "z").unwrap();
        let mu = random::random_charge(&mut rng, &f, "x", FULL).unwrap();
        let omega1 = random::random_extension(&mut rng, &xy, &mu).unwrap();
        let nu = omega1.marginal(&f, xy.right).unwrap();
        let omega2 = random::random_extension(&mut rng, &yz, &nu).unwrap();
        let level = random::COARSE;
        let lam1 = omega1.restrict(&f, level).unwrap();
        let lam2 = omega2.restrict(&f, level).unwrap();
        let c = compose_witness(&f, &Triple::default(), &lam1, &lam2).unwrap();
        c.verify().unwrap();
        if let Composition::Infeasible { .. } = c {
            found = Some(seed);
            break;
        }
    }
    assert!(found.is_some(), "every composition was feasible");

    for seed in 0..100 {
        let spec = RandomSpec { seed, x_atoms: 3, xy_atoms: 8, triple: true, glued: true, ..Default::default() };
        let f = random::build(&spec).unwrap();
        let mut rng = random::rng(seed);
        let xy = f.pair("xy", "x", "y").unwrap();
        let yz = f.pair("yz", "y", "z").unwrap();
        let mu = random::random_charge(&mut rng, &f, "x", FULL).unwrap();
        let omega1 = random::random_extension(&mut rng, &xy, &mu).unwrap();
        let nu = omega1.marginal(&f, xy.right).unwrap();
        let omega2 = random::random_extension(&mut rng, &yz, &nu).unwrap();
        let lam1 = omega1.restrict(&f, random::COARSE).unwrap();
        let lam2 = omega2.restrict(&f, random::COARSE).unwrap();
        let c = compose_witness(&f, &Triple::default(), &lam1, &lam2).unwrap();
        assert!(c.witness().is_some(), "glued seed {seed}");
    }
}

#[test]
fn lifted_witness_keeps_domination() {
    let f = sees_y();
    let pair = f.pair("xy", "x", "y").unwrap();
    let mu = Charge::on_atoms(&f, "x", qs(&[(1, 5), (4, 5)])).unwrap();
    let nu = Charge::on_atoms(&f, "y", qs(&[(1, 4), (3, 4)])).unwrap();
    let lam = Charge::new(&f, "xy", "A", qs(&[(1, 4), (3, 4)])).unwrap();
    assert_eq!(lift_witness(&pair, &lam, &mu, "A").unwrap(), lam);
    let full = lift_witness(&pair, &lam, &mu, FULL).unwrap();
    assert!(extension_space(&pair, &lam, &mu).unwrap().contains(full.values()));
    assert!(dominates(&pair, &mu, &nu, &full).unwrap().holds);
}

#[test]
fn type_domination_examples() {
    // The graph 1 -> a, 2 -> b: the type of x decides y.
    let f = Fragment::builder()
        .space(space("x", &["1", "2"]))
        .space(space("y", &["a", "b"]))
        .space(space("xy", &["1a", "2b"]))
        .projection("xy", "x", vec![0, 1])
        .projection("xy", "y", vec![0, 1])
        .level("A", "x", Subalgebra::trivial(2))
        .level("A", "y", Subalgebra::trivial(2))
        .level("A", "xy", Subalgebra::trivial(2))
        .build()
        .unwrap();
    assert!(validate_fragment(&f).is_empty());
    let pair = f.pair("xy", "x", "y").unwrap();
    let r = type_dominates(&pair, 0, 0, "A").unwrap().unwrap();
    assert_eq!(r, 0);
    assert_eq!(type_dominates(&pair, 0, 1, "A").unwrap(), None);
    let lam = block_dirac(&pair, "A", r).unwrap();
    let v = dominates(&pair, &Charge::dirac(&f, "x", 0).unwrap(), &Charge::dirac(&f, "y", 0).unwrap(), &lam).unwrap();
    assert!(v.holds);

    let g = blind();
    let pair = g.pair("xy", "x", "y").unwrap();
    assert_eq!(type_dominates(&pair, 0, 0, "A").unwrap(), None);
    assert_eq!(type_dominates(&pair, 0, 0, FULL).unwrap(), Some(0));
}

fn swap_y() -> Automorphism {
    Automorphism::new(
        [("y".to_string(), vec![1, 0]), ("xy".to_string(), vec![1, 0, 3, 2])].into_iter().collect(),
    )
}

#[test]
fn orbit_average_is_fixed_and_stays_in_the_space() {
    let f = Fragment::builder()
        .space(space("x", &["1", "2"]))
        .space(space("y", &["a", "b"]))
        .space(space("xy", &["1a", "1b", "2a", "2b"]))
        .projection("xy", "x", vec![0, 0, 1, 1])
        .projection("xy", "y", vec![0, 1, 0, 1])
        .level("A", "x", Subalgebra::discrete(2))
        .level("A", "y", Subalgebra::trivial(2))
        .level("A", "xy", Subalgebra::from_labels(&[0, 0, 1, 1]))
        .automorphism(swap_y())
        .build()
        .unwrap();
    assert!(validate_fragment(&f).is_empty());
    let pair = f.pair("xy", "x", "y").unwrap();
    let mu = Charge::on_atoms(&f, "x", qs(&[(1, 3), (2, 3)])).unwrap();
    let lam = Charge::new(&f, "xy", "A", qs(&[(1, 3), (2, 3)])).unwrap();
    let w = invariant_extension(&pair, &lam, &mu, f.automorphisms()).unwrap();
    assert_eq!(w.values(), qs(&[(1, 6), (1, 6), (1, 3), (1, 3)]).as_slice());
    assert!(w.is_invariant(&f.automorphism_group()));

    let trivial = invariant_extension(&pair, &lam, &mu, &[]).unwrap();
    assert!(extension_space(&pair, &lam, &mu).unwrap().contains(trivial.values()));

    let nu = Charge::on_atoms(&f, "y", qs(&[(1, 2), (1, 2)])).unwrap();
    assert!(nu.is_invariant(&f.automorphism_group()));
    assert!(dominates(&pair, &mu, &nu, &w.restrict(&f, FULL).unwrap()).unwrap().holds);
}

#[test]
fn orbit_average_needs_an_invariant_left_charge() {
    let swap_x = Automorphism::new(
        [("x".to_string(), vec![1, 0]), ("xy".to_string(), vec![2, 3, 0, 1])].into_iter().collect(),
    );
    let f = Fragment::builder()
        .space(space("x", &["1", "2"]))
        .space(space("y", &["a", "b"]))
        .space(space("xy", &["1a", "1b", "2a", "2b"]))
        .projection("xy", "x", vec![0, 0, 1, 1])
        .projection("xy", "y", vec![0, 1, 0, 1])
        .automorphism(swap_x.clone())
        .build()
        .unwrap();
    let pair = f.pair("xy", "x", "y").unwrap();
    let mu = Charge::on_atoms(&f, "x", qs(&[(1, 3), (2, 3)])).unwrap();
    let lam = product(&f, &qs(&[(1, 3), (2, 3)]), &qs(&[(1, 2), (1, 2)]));
    assert!(invariant_extension(&pair, &lam, &mu, &[swap_x]).is_err());
}

#[test]
fn smoothness_examples() {
    let f = blind();
    let mu = Charge::on_atoms(&f, "x", qs(&[(1, 3), (2, 3)])).unwrap();
    assert!(is_smooth_over(&f, &mu, FULL).unwrap());
    assert!(!is_smooth_over(&f, &mu, "A").unwrap());
    assert!(!is_smooth_over(&f, &Charge::dirac(&f, "x", 0).unwrap(), "A").unwrap());
    let g = sees_y();
    let nu = Charge::on_atoms(&g, "y", qs(&[(1, 3), (2, 3)])).unwrap();
    assert!(is_smooth_over(&g, &nu, "A").unwrap());
}

#[test]
fn finite_satisfiability_examples() {
    let f = blind();
    let mu = Charge::on_atoms(&f, "x", qs(&[(1, 3), (2, 3)])).unwrap();
    assert!(is_finitely_satisfiable(&mu, &set(&[0, 1])).unwrap());
    assert!(!is_finitely_satisfiable(&mu, &set(&[0])).unwrap());
    let d = Charge::dirac(&f, "x", 1).unwrap();
    assert!(!is_finitely_satisfiable(&d, &set(&[0])).unwrap());
    assert!(is_finitely_satisfiable(&d, &set(&[1])).unwrap());
}

#[test]
fn separating_set_examples() {
    let f = Fragment::builder().space(space("y", &["a", "b", "c", "d"])).build().unwrap();
    let a = Charge::dirac(&f, "y", 0).unwrap();
    let b = Charge::dirac(&f, "y", 1).unwrap();
    assert_eq!(separating_set(&a, &b).unwrap(), set(&[0]));
    let u1 = Charge::uniform(&f, "y", &set(&[0, 1])).unwrap();
    let u2 = Charge::uniform(&f, "y", &set(&[2, 3])).unwrap();
    assert_eq!(separating_set(&u1, &u2).unwrap(), set(&[0, 1]));
    assert!(separating_set(&u1, &a).is_err());
}

#[test]
fn convex_witness_mixes_split_targets() {
    let f = blind();
    let pair = f.pair("xy", "x", "y").unwrap();
    let mu = Charge::dirac(&f, "x", 0).unwrap();
    let lam1 = Charge::dirac(&f, "xy", 0).unwrap();
    let lam2 = Charge::dirac(&f, "xy", 1).unwrap();
    let nu1 = Charge::dirac(&f, "y", 0).unwrap();
    let nu2 = Charge::dirac(&f, "y", 1).unwrap();
    let sep = separating_set(&nu1, &nu2).unwrap();
    assert_eq!(convex_decipher_witness(&pair, &lam1, &lam2, &int(1), &sep).unwrap(), lam1);
    assert_eq!(convex_decipher_witness(&pair, &lam1, &lam2, &int(0), &sep).unwrap(), lam2);
    for r in [q(1, 4), q(1, 2), q(3, 4)] {
        let lam = convex_decipher_witness(&pair, &lam1, &lam2, &r, &sep).unwrap();
        let nu = charge::convex(&r, &nu1, &nu2).unwrap();
        assert!(deciphers(&pair, &mu, &nu, &lam).unwrap().holds);
        assert!(dominates(&pair, &mu, &nu, &lam).unwrap().holds);
    }
    assert!(convex_decipher_witness(&pair, &lam2, &lam1, &q(1, 2), &sep).is_err());
}
