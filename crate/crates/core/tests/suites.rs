use extdom::suites::{self, SuiteConfig};

fn config(seed: u64, instances: usize) -> SuiteConfig {
    SuiteConfig { seed, instances, max_atoms: suites::DEFAULT_MAX_ATOMS }
}

#[test]
fn every_battery_passes_a_short_run() {
    for name in suites::names() {
        let stats = suites::run(name, &config(3, 25)).unwrap();
        assert_eq!(stats.failed, 0, "{name}: {:#?}", stats.records);
        assert_eq!(stats.findings, 0, "{name}: {:#?}", stats.records);
        assert!(stats.passed + stats.skipped == 25, "{name}");
        assert!(stats.checks > 0 && stats.certificates > 0, "{name}");
    }
}

#[test]
fn results_do_not_depend_on_thread_count() {
    let run = |threads| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| suites::run("squeeze-equivalence", &config(11, 30)).unwrap())
    };
    let (one, many) = (run(1), run(4));
    assert_eq!(serde_json::to_string(&one).unwrap(), serde_json::to_string(&many).unwrap());
}

#[test]
fn seeds_change_the_instances() {
    let a = suites::run("dirac-bridging", &config(1, 20)).unwrap();
    let b = suites::run("dirac-bridging", &config(2, 20)).unwrap();
    assert_ne!(a.tallies, b.tallies);
    assert_ne!(suites::instance_seed(1, 0), suites::instance_seed(2, 0));
    assert_ne!(suites::instance_seed(1, 0), suites::instance_seed(1, 1));
}

#[test]
fn bad_requests_are_errors() {
    assert!(suites::run("no-such-suite", &config(0, 1)).is_err());
    let tiny = SuiteConfig { max_atoms: 1, ..config(0, 1) };
    assert!(suites::run("preorder", &tiny).is_err());
}
