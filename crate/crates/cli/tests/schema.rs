use std::collections::BTreeMap;

use extdom::fragments::{self, random, RandomSpec};
use extdom::rational::{int, q};
use extdom::{Charge, FULL};
use extdom_cli::schema::{fragment_hash, ChargeFile, FragmentFile};

fn rich(seed: u64) -> extdom::Fragment {
    let spec = RandomSpec { seed, symmetric: true, inhabited: true, ..Default::default() };
    random::build(&spec).unwrap()
}

#[test]
fn fragment_files_round_trip() {
    for seed in 0..20 {
        let f = rich(seed);
        let file = FragmentFile::from_fragment(&f, None);
        let text = serde_json::to_string(&file).unwrap();
        let back: FragmentFile = serde_json::from_str(&text).unwrap();
        assert_eq!(back, file);
        let rebuilt = back.to_fragment().unwrap();
        assert_eq!(FragmentFile::from_fragment(&rebuilt, None), file);
        assert_eq!(fragment_hash(&rebuilt), fragment_hash(&f));
        assert_eq!(rebuilt.automorphisms().len(), f.automorphisms().len());
        assert_eq!(rebuilt.inhabited_flags(), f.inhabited_flags());
    }
}

#[test]
fn scenario_fragments_round_trip() {
    let s = fragments::build_dlo(&[int(0), int(1)]).unwrap();
    let file = FragmentFile::from_fragment(&s.fragment, None);
    let rebuilt = file.to_fragment().unwrap();
    assert_eq!(fragment_hash(&rebuilt), fragment_hash(&s.fragment));
    for (name, c) in &s.charges {
        let cf = ChargeFile::from_charge(&s.fragment, c).unwrap();
        assert_eq!(&cf.to_charge(&rebuilt).unwrap(), c, "{name}");
    }
}

#[test]
fn hashes_separate_fragments() {
    let hashes: std::collections::BTreeSet<String> = (0..10).map(|s| fragment_hash(&rich(s))).collect();
    assert_eq!(hashes.len(), 10);
    assert_eq!(fragment_hash(&rich(3)), fragment_hash(&rich(3)));
    assert_eq!(fragment_hash(&rich(3)).len(), 64);
}

#[test]
fn sub_fragments_keep_only_named_spaces() {
    let spec = RandomSpec { seed: 5, triple: true, glued: true, ..Default::default() };
    let f = random::build(&spec).unwrap();
    let file = FragmentFile::from_fragment(&f, Some(&["x", "y", "xy"]));
    assert_eq!(file.spaces.keys().collect::<Vec<_>>(), ["x", "xy", "y"]);
    assert!(file.projections.iter().all(|p| p.source == "xy"));
    let sub = file.to_fragment().unwrap();
    assert!(extdom::algebra::validate_fragment(&sub).is_empty());
}

#[test]
fn charge_values_are_keyed_by_block() {
    let s = fragments::build_dlo(&[int(0)]).unwrap();
    let f = &s.fragment;
    let mu = s.charge("mu").unwrap();
    let cf = ChargeFile::from_charge(f, mu).unwrap();
    assert_eq!(cf.values.values().filter(|v| *v == "1/2").count(), 2);
    assert!(cf.values.keys().all(|k| f.space("x").unwrap().index_of(k).is_ok()));

    let lam = s.charge("lambda").unwrap();
    let cf = ChargeFile::from_charge(f, lam).unwrap();
    assert_eq!(cf.level, "M");
    assert!(cf.values.keys().any(|k| k.contains('+')));
}

#[test]
fn omitted_blocks_are_zero() {
    let s = fragments::build_dlo(&[int(0)]).unwrap();
    let f = &s.fragment;
    let mu = s.charge("mu").unwrap();
    let mut cf = ChargeFile::from_charge(f, mu).unwrap();
    cf.values.retain(|_, v| v != "0");
    assert_eq!(&cf.to_charge(f).unwrap(), mu);
}

#[test]
fn bad_charge_files_are_rejected() {
    let s = fragments::build_dlo(&[int(0)]).unwrap();
    let f = &s.fragment;
    let atom = f.space("x").unwrap().atom(0).to_string();
    let file = |space: &str, level: &str, values: &[(&str, &str)]| ChargeFile {
        space: space.into(),
        level: level.into(),
        values: values.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect::<BTreeMap<_, _>>(),
    };
    assert!(file("x", FULL, &[("nowhere", "1")]).to_charge(f).is_err());
    assert!(file("x", FULL, &[(&atom, "1/2")]).to_charge(f).is_err());
    assert!(file("x", FULL, &[(&atom, "0.5")]).to_charge(f).is_err());
    assert!(file("w", FULL, &[(&atom, "1")]).to_charge(f).is_err());
    assert!(file("x", "nope", &[(&atom, "1")]).to_charge(f).is_err());
    assert_eq!(file("x", FULL, &[(&atom, "1")]).to_charge(f).unwrap(), Charge::dirac(f, "x", 0).unwrap());
    let half = ChargeFile::from_charge(f, &extdom::charge::convex(&q(1, 2), &Charge::dirac(f, "x", 0).unwrap(), &Charge::dirac(f, "x", 1).unwrap()).unwrap()).unwrap();
    assert_eq!(half.values.values().filter(|v| *v == "1/2").count(), 2);
}

#[test]
fn bad_fragment_files_are_rejected() {
    let good = FragmentFile::from_fragment(&rich(1), None);
    let text = serde_json::to_string(&good).unwrap();
    let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
    v["extra"] = serde_json::json!(1);
    assert!(serde_json::from_value::<FragmentFile>(v).is_err());

    let mut partial = good.clone();
    partial.projections[0].map.pop_first();
    assert!(partial.to_fragment().is_err());

    let mut unknown = good.clone();
    unknown.projections[0].target = "nowhere".into();
    assert!(unknown.to_fragment().is_err());

    let mut collapsing = good.clone();
    if let Some(perm) = collapsing.automorphisms.get_mut("x").and_then(|l| l.first_mut()) {
        let first = perm.values().next().unwrap().clone();
        for t in perm.values_mut() {
            *t = first.clone();
        }
        assert!(collapsing.to_fragment().is_err());
    }

    let mut overlapping = good;
    let level = overlapping.levels.keys().next().unwrap().clone();
    let blocks = overlapping.levels.get_mut(&level).unwrap().get_mut("x").unwrap();
    let dup = blocks[0][0].clone();
    blocks.push(vec![dup]);
    assert!(overlapping.to_fragment().is_err());
}
