use std::time::Instant;

use extdom::algebra::validate_fragment;
use extdom::domination::{amalgam_space, dominates, extension_space, is_smooth_over};
use extdom::fragments::{self, presburger, random, FragmentRecipe, PresburgerRecipe, PresburgerSpec, RandomSpec};
use extdom::lp;
use extdom::rational::{int, q, zero};
use extdom::Charge;

#[test]
fn dlo_one_parameter_has_five_cells() {
    let s = fragments::build_dlo(&[int(0)]).unwrap();
    let x = s.fragment.space("x").unwrap();
    assert_eq!(x.atoms(), ["(-inf,0)", "{0}", "(0,b)", "{b}", "(b,inf)"]);
    assert!(validate_fragment(&s.fragment).is_empty());
}

#[test]
fn dlo_cell_count_is_two_k_plus_three() {
    for k in 1..5 {
        let params: Vec<_> = (0..k as i64).map(int).collect();
        let s = fragments::build_dlo(&params).unwrap();
        assert_eq!(s.fragment.space("x").unwrap().len(), 2 * k + 3);
        assert!(validate_fragment(&s.fragment).is_empty());
    }
}

#[test]
fn dlo_rejects_unordered_parameters() {
    assert!(fragments::build_dlo(&[int(1), int(0)]).is_err());
    assert!(fragments::build_dlo(&[int(1), int(1)]).is_err());
}

#[test]
fn dlo_extension_exists_but_no_amalgam() {
    let s = fragments::build_dlo(&[int(0), int(1)]).unwrap();
    let f = &s.fragment;
    let lam = s.charge("lambda").unwrap();
    let mu = s.charge("mu").unwrap();
    assert_eq!(lam.evaluate(s.set("x=y").unwrap()).unwrap(), int(1));
    assert_eq!(mu.evaluate(s.set("x>b").unwrap()).unwrap(), q(1, 2));
    let omega = s.charge("omega").unwrap();
    assert_eq!(omega.evaluate(s.set("x>b&y<b").unwrap()).unwrap(), zero());

    let pair = f.pair("xy", "x", "y").unwrap();
    let e = extension_space(&pair, lam, mu).unwrap();
    let cert = lp::solve(&e, None).unwrap();
    assert!(cert.is_feasible());
    lp::verify::check(&e, &cert).unwrap();
    let amal = amalgam_space(&pair, lam, mu).unwrap();
    let cert = lp::solve(&amal, None).unwrap();
    assert!(!cert.is_feasible());
    lp::verify::check(&amal, &cert).unwrap();
}

#[test]
fn presburger_example_without_new_parameter_has_five_atoms() {
    let spec = PresburgerSpec { base: vec![0], moduli: vec![2], new_residue: None };
    let (x, _, _) = presburger::atom_counts(&spec, 4, false).unwrap();
    assert_eq!(x, 5);
}

#[test]
fn presburger_window_is_wide_enough() {
    let spec = PresburgerSpec { base: vec![-1, 1], moduli: vec![2, 3], new_residue: Some(0) };
    let narrow = presburger::atom_names(&spec, 4).unwrap();
    let wide = presburger::atom_names(&spec, 5).unwrap();
    assert_eq!(narrow, wide);
    assert_eq!(narrow.iter().map(Vec::len).collect::<Vec<_>>(), [29, 1177, 62357]);
}

#[test]
fn presburger_rejects_bad_recipes() {
    let asym = PresburgerRecipe { base: vec![1, 2], ..Default::default() };
    assert!(fragments::build_presburger(&asym).is_err());
    let residue = PresburgerRecipe { new_residue: Some(6), ..Default::default() };
    assert!(fragments::build_presburger(&residue).is_err());
    let dist = PresburgerRecipe { mu: Some(vec!["1".into(); 6]), ..Default::default() };
    assert!(fragments::build_presburger(&dist).is_err());
}

#[test]
fn presburger_at_infinity_dominates() {
    let start = Instant::now();
    let (p, _) = fragments::build_presburger(&PresburgerRecipe::default()).unwrap();
    let s = &p.scenario;
    let f = &s.fragment;
    assert!(validate_fragment(f).is_empty());
    let (mu, nu, lam) = (s.charge("mu").unwrap(), s.charge("nu").unwrap(), s.charge("lambda").unwrap());
    let x = f.space("x").unwrap();
    let beyond_b = x.set_of(&(0..6).map(|r| format!("(b,inf):{r}")).collect::<Vec<_>>()).unwrap();
    assert_eq!(mu.evaluate(&beyond_b).unwrap(), int(1));
    assert_eq!(Charge::on_atoms(f, "x", nu.values().to_vec()).unwrap().evaluate(&beyond_b).unwrap(), int(1));
    let pair = f.pair("xy", "x", "y").unwrap();
    let above: extdom::AtomSet = (0..pair.product.len()).filter(|&w| pair.product.atom(w).contains("|<|")).collect();
    assert_eq!(lam.evaluate(&above).unwrap(), int(1));
    let v = dominates(&pair, mu, nu, lam).unwrap();
    assert!(v.holds, "{:?}", v.reason);
    assert!(start.elapsed().as_secs() < 10);
}

#[test]
fn oer_mutual_domination() {
    let start = Instant::now();
    let s = fragments::build_oer(2).unwrap();
    let f = &s.fragment;
    assert!(validate_fragment(f).is_empty());
    let pair = f.pair("xy", "x", "y").unwrap();
    let lam = s.charge("lambda").unwrap();
    assert_eq!(lam.evaluate(s.set("E(x,y)").unwrap()).unwrap(), int(1));
    let mu = s.charge("mu").unwrap();
    for (name, set) in &s.sets {
        if name.starts_with("E(x,") && name != "E(x,y)" {
            assert_eq!(mu.evaluate(&set.atoms).unwrap(), zero(), "{name}");
        }
    }
    let forward = dominates(&pair, mu, s.charge("nu").unwrap(), lam).unwrap();
    assert!(forward.holds, "{:?}", forward.reason);
    let back = dominates(
        &pair,
        s.charge("nu_on_x").unwrap(),
        s.charge("mu_on_y").unwrap(),
        s.charge("lambda_transposed").unwrap(),
    )
    .unwrap();
    assert!(back.holds, "{:?}", back.reason);
    assert!(!is_smooth_over(f, mu, fragments::oer::BASE_LEVEL).unwrap());
    assert!(start.elapsed().as_secs() < 10);
}

#[test]
fn oer_rejects_zero_samples() {
    assert!(fragments::build_oer(0).is_err());
}

fn random_specs() -> Vec<RandomSpec> {
    let mut out = Vec::new();
    for seed in 0..40 {
        for (copies, symmetric, inhabited, triple, glued) in [
            (false, false, false, false, false),
            (true, false, false, false, false),
            (false, true, false, false, false),
            (true, true, false, false, false),
            (false, false, true, false, false),
            (false, true, true, false, false),
            (false, false, false, true, false),
            (false, false, false, true, true),
        ] {
            out.push(RandomSpec {
                seed,
                x_atoms: 4,
                y_atoms: 4,
                xy_atoms: 10,
                copies,
                symmetric,
                inhabited,
                triple,
                glued,
            });
        }
    }
    out
}

#[test]
fn random_fragments_are_valid() {
    for spec in random_specs() {
        let s = fragments::build_random(&spec).unwrap();
        let v = validate_fragment(&s.fragment);
        assert!(v.is_empty(), "{spec:?}: {v:?}");
        if spec.symmetric {
            assert!(s.fragment.automorphism_group().len() >= 2 || s.fragment.space("x").unwrap().len() < 2);
        }
        if !spec.triple {
            let f = &s.fragment;
            assert!(f.space("x").unwrap().len() <= spec.x_atoms);
            assert!(f.space("y").unwrap().len() <= spec.y_atoms);
            assert!(f.space("xy").unwrap().len() <= spec.xy_atoms, "{spec:?}");
        }
    }
}

#[test]
fn random_levels_are_not_degenerate() {
    let mut coarse_split = 0;
    let mut fine_singletons = 0;
    let specs: Vec<RandomSpec> = random_specs().into_iter().filter(|s| !s.triple).collect();
    for spec in &specs {
        let f = fragments::build_random(spec).unwrap().fragment;
        if f.algebra("xy", random::COARSE).unwrap().num_blocks() > 1 {
            coarse_split += 1;
        }
        if f.algebra("x", random::FINE).unwrap().blocks().iter().any(|b| b.len() == 1) {
            fine_singletons += 1;
        }
    }
    assert!(coarse_split * 2 > specs.len(), "{coarse_split} of {}", specs.len());
    assert!(fine_singletons * 2 > specs.len(), "{fine_singletons} of {}", specs.len());
}

#[test]
fn glued_triples_join_pair_atoms() {
    for seed in 0..40 {
        let spec = RandomSpec { seed, x_atoms: 4, xy_atoms: 12, triple: true, glued: true, ..Default::default() };
        let f = fragments::build_random(&spec).unwrap().fragment;
        let to_xy = f.projection("xyz", "xy").unwrap();
        let to_yz = f.projection("xyz", "yz").unwrap();
        let xy = f.pair("xy", "x", "y").unwrap();
        let yz = f.pair("yz", "y", "z").unwrap();
        for u in 0..xy.product.len() {
            for v in yz.left.fiber(xy.right.apply(u)) {
                assert!(to_xy.fiber(u).iter().any(|&t| to_yz.apply(t) == *v), "seed {seed}");
            }
        }
    }
}

#[test]
fn random_fragments_are_deterministic() {
    let spec = RandomSpec { seed: 11, x_atoms: 3, y_atoms: 3, xy_atoms: 6, ..Default::default() };
    let a = fragments::build_random(&spec).unwrap();
    let b = fragments::build_random(&spec).unwrap();
    assert_eq!(a.fragment, b.fragment);
}

#[test]
fn random_bounds_are_enforced() {
    let spec = RandomSpec { x_atoms: 100, ..Default::default() };
    assert!(fragments::build_random(&spec).is_err());
}

#[test]
fn recipe_json_round_trip() {
    let text = r#"{"kind":"dlo","params":["0","1/2"]}"#;
    let r: FragmentRecipe = serde_json::from_str(text).unwrap();
    let s = fragments::build_recipe(&r).unwrap();
    assert_eq!(s.fragment.space("x").unwrap().len(), 7);
    let text = r#"{"kind":"random","seed":3}"#;
    let r: FragmentRecipe = serde_json::from_str(text).unwrap();
    assert!(validate_fragment(&fragments::build_recipe(&r).unwrap().fragment).is_empty());
}
