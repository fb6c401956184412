//! The `extdom` command line: load fragments and charges, run decisions,
//! scenarios and property suites, and emit self-verified JSON reports.

pub mod evidence;
pub mod report;
pub mod scenario;
pub mod schema;

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use extdom::algebra::validate_fragment;
use extdom::charge::Charge;
use extdom::domination::{
    amalgam_space, deciphers, dominates, extension_space, invariant_extension, is_finitely_satisfiable, point_charge,
    restriction_system, squeeze_check,
};
use extdom::fragments::PresburgerRecipe;
use extdom::rational;
use extdom::suites::{self, SuiteConfig};
use extdom::Fragment;

use report::{audit, Report, Timing, Verdict};
use schema::{ChargeFile, FragmentFile};

pub const EXIT_HOLDS: i32 = 0;
pub const EXIT_FAILS: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "extdom", version, about = "Exact extension-domination checks with verifiable certificates")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Write the report to this file instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Record wall-clock time in the report.
    #[arg(long, global = true)]
    pub timing: bool,
    /// Worker threads for solver fan-out and suite instances.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Op {
    Dominates,
    Deciphers,
    Squeeze,
    Smooth,
    Invariant,
    Finsat,
    Amalgam,
    Extension,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Check the structural invariants of a fragment file.
    Validate {
        #[arg(long)]
        fragment: PathBuf,
    },
    /// Run one decision on charges over a fragment.
    Check {
        #[arg(value_enum)]
        op: Op,
        #[arg(long)]
        fragment: PathBuf,
        #[arg(long)]
        mu: Option<PathBuf>,
        #[arg(long)]
        nu: Option<PathBuf>,
        #[arg(long)]
        lambda: Option<PathBuf>,
        /// Level for `smooth`.
        #[arg(long)]
        level: Option<String>,
    },
    /// Build and check one of the worked examples.
    Scenario {
        name: String,
        /// Standard parameters of the dense order, as rationals.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        params: Option<Vec<String>>,
        /// Base parameters of the Presburger fragment.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        base: Option<Vec<i64>>,
        /// Moduli of the Presburger fragment.
        #[arg(long, value_delimiter = ',')]
        moduli: Option<Vec<u32>>,
        /// Number of samples in the equivalence-relation example.
        #[arg(long, default_value_t = 2)]
        k: usize,
        /// Also write the fragment and charge files into this directory.
        #[arg(long)]
        export: Option<PathBuf>,
    },
    /// Run seeded property batteries.
    Suite {
        /// Battery to run; repeat for several, omit for all.
        #[arg(long)]
        name: Vec<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        instances: usize,
        #[arg(long, default_value_t = suites::DEFAULT_MAX_ATOMS)]
        max_atoms: usize,
    },
    /// Re-check every certificate in a report.
    Verify { report: PathBuf },
}

/// An input problem: unreadable files, bad JSON, charges that do not fit.
#[derive(Debug)]
pub struct InputError(pub String);

impl<E: std::fmt::Display> From<E> for InputError {
    fn from(e: E) -> Self {
        InputError(e.to_string())
    }
}

type Outcome<T> = std::result::Result<T, InputError>;

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Outcome<T> {
    let text = fs::read_to_string(path).map_err(|e| InputError(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| InputError(format!("{}: {e}", path.display())))
}

fn load_fragment(path: &Path) -> Outcome<Fragment> {
    let file: FragmentFile = read_json(path)?;
    file.to_fragment().map_err(|e| InputError(format!("{}: {e}", path.display())))
}

fn load_charge(f: &Fragment, path: &Option<PathBuf>, flag: &str) -> Outcome<Charge> {
    let path = path.as_ref().ok_or_else(|| InputError(format!("--{flag} is required for this check")))?;
    let file: ChargeFile = read_json(path)?;
    file.to_charge(f).map_err(|e| InputError(format!("{}: {e}", path.display())))
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Outcome<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).map_err(|e| InputError(format!("{}: {e}", path.display())))
}

fn validate(report: &mut Report, fragment: &Path) -> Outcome<()> {
    let f = load_fragment(fragment)?;
    report.fragment_hash = Some(schema::fragment_hash(&f));
    let violations = validate_fragment(&f);
    let mut v = Verdict::new("fragment-valid", violations.is_empty());
    if !violations.is_empty() {
        let lines: Vec<String> = violations.iter().map(|v| format!("{:?}: {}", v.kind, v.detail)).collect();
        v = v.detail(lines.join("\n"));
    }
    report.push(v);
    Ok(())
}

struct CheckArgs<'a> {
    op: Op,
    fragment: &'a Path,
    mu: &'a Option<PathBuf>,
    nu: &'a Option<PathBuf>,
    lambda: &'a Option<PathBuf>,
    level: &'a Option<String>,
}

fn check(report: &mut Report, a: CheckArgs<'_>) -> Outcome<()> {
    let f = load_fragment(a.fragment)?;
    report.fragment_hash = Some(schema::fragment_hash(&f));
    let mu = load_charge(&f, a.mu, "mu")?;
    let optional = |p: &Option<PathBuf>, flag| p.as_ref().map(|_| load_charge(&f, p, flag)).transpose();
    let nu = optional(a.nu, "nu")?;
    let lam = optional(a.lambda, "lambda")?;
    let required = |c: &Option<Charge>, flag: &str| {
        c.clone().ok_or_else(|| InputError(format!("--{flag} is required for this check")))
    };
    let name = format!("{:?}", a.op).to_lowercase();

    // Preservation checks may add the domination that should carry them over.
    let dominated = |report: &mut Report| -> Outcome<Option<Charge>> {
        let (Some(nu), Some(lam)) = (&nu, &lam) else { return Ok(None) };
        let pair = f.pair(lam.space(), mu.space(), nu.space())?;
        let d = dominates(&pair, &mu, nu, lam)?;
        report.push(Verdict::new("dominates", d.holds).evidence(evidence::domination("mu over nu", &d)));
        Ok(Some(nu.clone()))
    };

    match a.op {
        Op::Dominates | Op::Deciphers | Op::Squeeze => {
            let (nu, lam) = (required(&nu, "nu")?, required(&lam, "lambda")?);
            let pair = f.pair(lam.space(), mu.space(), nu.space())?;
            let v = match a.op {
                Op::Dominates => {
                    let d = dominates(&pair, &mu, &nu, &lam)?;
                    let v = Verdict::new(name, d.holds).evidence(evidence::domination("mu over nu", &d));
                    match &d.reason {
                        Some(r) => v.detail(r.clone()),
                        None => v,
                    }
                }
                Op::Deciphers => {
                    let d = deciphers(&pair, &mu, &nu, &lam)?;
                    let v = Verdict::new(name, d.holds).evidence(evidence::domination("mu over nu, amalgams", &d));
                    match &d.reason {
                        Some(r) => v.detail(r.clone()),
                        None => v,
                    }
                }
                _ => {
                    let s = squeeze_check(&pair, &mu, &nu, &lam)?;
                    let d = dominates(&pair, &mu, &nu, &lam)?;
                    let mut v = Verdict::new(name, s.holds)
                        .evidence(evidence::domination("mu over nu", &d))
                        .require(s.holds == d.holds, "squeeze verdict disagrees with domination");
                    v.data = Some(serde_json::to_value(&s)?);
                    v
                }
            };
            report.push(v);
        }
        Op::Smooth => {
            let level = a.level.as_ref().ok_or_else(|| InputError("--level is required for smooth".into()))?;
            let restricted = mu.restrict(&f, level)?;
            let sys = restriction_system(&restricted);
            let (exact, ev) = evidence::ranges("extensions from the level", &sys, f.space(mu.space())?.atoms())?;
            report.push(Verdict::new(name, exact).evidence(ev));
            if let Some(nu) = dominated(report)? {
                let restricted = nu.restrict(&f, level)?;
                let sys = restriction_system(&restricted);
                let (exact, ev) = evidence::ranges("extensions of nu", &sys, f.space(nu.space())?.atoms())?;
                report.push(Verdict::new("nu-smooth", exact).evidence(ev));
            }
        }
        Op::Invariant => {
            let group = f.automorphism_group();
            report.push(Verdict::new(name, mu.is_invariant(&group)));
            if let Some(nu) = dominated(report)? {
                let lam = lam.as_ref().expect("present with nu");
                let mut v = Verdict::new("nu-invariant", nu.is_invariant(&group));
                if mu.is_invariant(&group) && lam.is_invariant(&group) {
                    let pair = f.pair(lam.space(), mu.space(), nu.space())?;
                    let w = invariant_extension(&pair, lam, &mu, f.automorphisms())?;
                    v = v.charge("invariant-extension", ChargeFile::from_charge(&f, &w)?);
                }
                report.push(v);
            }
        }
        Op::Finsat => {
            let inhabited = |space: &str| {
                f.inhabited(space)
                    .cloned()
                    .ok_or_else(|| InputError(format!("fragment has no inhabited atoms listed for {space:?}")))
            };
            report.push(Verdict::new(name, is_finitely_satisfiable(&mu, &inhabited(mu.space())?)?));
            if let Some(nu) = dominated(report)? {
                let holds = is_finitely_satisfiable(&nu, &inhabited(nu.space())?)?;
                report.push(Verdict::new("nu-finsat", holds));
            }
        }
        Op::Amalgam | Op::Extension => {
            let lam = required(&lam, "lambda")?;
            let right = match &nu {
                Some(nu) => nu.space().to_string(),
                None => other_factor(&f, lam.space(), mu.space())?,
            };
            let pair = f.pair(lam.space(), mu.space(), &right)?;
            let (label, sys) = match a.op {
                Op::Amalgam => ("Amal(lambda, mu)", amalgam_space(&pair, &lam, &mu)?),
                _ => ("E(lambda, mu)", extension_space(&pair, &lam, &mu)?),
            };
            let (cert, ev) = evidence::solve(label, &sys, None)?;
            let mut v = Verdict::new(name, cert.is_feasible()).evidence(ev);
            if let Some(point) = cert.point() {
                v = v.charge("witness", ChargeFile::from_charge(&f, &point_charge(&pair, point)?)?);
            }
            report.push(v);
        }
    }
    Ok(())
}

/// The factor of `product` other than `left`, when there is exactly one.
fn other_factor(f: &Fragment, product: &str, left: &str) -> Outcome<String> {
    let others: Vec<&str> = f
        .projections()
        .iter()
        .filter(|p| p.source() == product && p.target() != left)
        .map(|p| p.target())
        .collect();
    match others.as_slice() {
        [one] => Ok(one.to_string()),
        _ => Err(InputError(format!("cannot tell the right factor of {product:?}; pass --nu"))),
    }
}

struct ScenarioArgs<'a> {
    name: &'a str,
    params: &'a Option<Vec<String>>,
    base: &'a Option<Vec<i64>>,
    moduli: &'a Option<Vec<u32>>,
    k: usize,
    export: &'a Option<PathBuf>,
}

fn scenario(report: &mut Report, a: ScenarioArgs<'_>) -> Outcome<()> {
    if !scenario::NAMES.contains(&a.name) {
        return Err(InputError(format!("unknown scenario {:?}; expected one of {:?}", a.name, scenario::NAMES)));
    }
    let mut opts = scenario::Options { k: a.k, ..Default::default() };
    if let Some(p) = a.params {
        opts.params = p.iter().map(|s| rational::parse(s)).collect::<Result<_, _>>()?;
    }
    let defaults = PresburgerRecipe::default();
    opts.presburger = PresburgerRecipe {
        base: a.base.clone().unwrap_or(defaults.base),
        moduli: a.moduli.clone().unwrap_or(defaults.moduli),
        ..defaults
    };
    let run = scenario::run(a.name, &opts)?;
    report.fragment_hash = Some(schema::fragment_hash(&run.fragment));
    for v in run.verdicts {
        report.push(v);
    }
    if let Some(dir) = a.export {
        fs::create_dir_all(dir).map_err(|e| InputError(format!("{}: {e}", dir.display())))?;
        write_json(&dir.join("fragment.json"), &run.export.fragment)?;
        for (name, c) in &run.export.charges {
            write_json(&dir.join(format!("{name}.json")), c)?;
        }
    }
    Ok(())
}

fn suite(report: &mut Report, names: &[String], cfg: SuiteConfig) -> Outcome<()> {
    let all: Vec<String> = suites::names().map(String::from).collect();
    let names = if names.is_empty() { &all } else { names };
    for name in names {
        let stats = suites::run(name, &cfg)?;
        report.holds &= stats.all_passed();
        report.suites.push(serde_json::to_value(&stats)?);
    }
    Ok(())
}

fn verify_file(path: &Path) -> i32 {
    let report: Report = match read_json(path) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {}", e.0);
            return EXIT_INPUT;
        }
    };
    let audit = audit(&report);
    for p in &audit.problems {
        eprintln!("rejected: {}: {}", if p.verdict.is_empty() { "report" } else { &p.verdict }, p.message);
    }
    let summary = serde_json::json!({
        "valid": audit.is_clean(),
        "certificates": audit.certificates,
        "verdicts": report.verdicts.len(),
        "problems": audit.problems.len(),
    });
    println!("{}", serde_json::to_string_pretty(&summary).expect("summary serializes"));
    if audit.is_clean() {
        EXIT_HOLDS
    } else {
        EXIT_FAILS
    }
}

fn execute(cli: &Cli, report: &mut Report) -> Outcome<()> {
    match &cli.command {
        Command::Validate { fragment } => validate(report, fragment),
        Command::Check { op, fragment, mu, nu, lambda, level } => {
            check(report, CheckArgs { op: *op, fragment, mu, nu, lambda, level })
        }
        Command::Scenario { name, params, base, moduli, k, export } => {
            scenario(report, ScenarioArgs { name, params, base, moduli, k: *k, export })
        }
        Command::Suite { name, seed, instances, max_atoms } => {
            suite(report, name, SuiteConfig { seed: *seed, instances: *instances, max_atoms: *max_atoms })
        }
        Command::Verify { .. } => unreachable!("handled before report assembly"),
    }
}

fn emit(cli: &Cli, report: &Report) -> Outcome<()> {
    let mut text = serde_json::to_string_pretty(report)?;
    text.push('\n');
    match &cli.out {
        Some(path) => fs::write(path, text).map_err(|e| InputError(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run_parsed(cli: &Cli, command: Vec<String>) -> i32 {
    if let Command::Verify { report } = &cli.command {
        return verify_file(report);
    }
    let start = Instant::now();
    let mut report = Report::new(command);
    if let Err(e) = execute(cli, &mut report) {
        eprintln!("error: {}", e.0);
        return EXIT_INPUT;
    }
    if cli.timing {
        report.timing = Some(Timing { elapsed_ms: start.elapsed().as_millis() });
    }
    let check = audit(&report);
    if !check.is_clean() {
        for p in &check.problems {
            eprintln!("self-verification: {}: {}", p.verdict, p.message);
        }
        report.push(Verdict::error("self-verification", format!("{} certificates rejected", check.problems.len())));
    }
    if let Err(e) = emit(cli, &report) {
        eprintln!("error: {}", e.0);
        return EXIT_INPUT;
    }
    if report.holds {
        EXIT_HOLDS
    } else {
        EXIT_FAILS
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_HOLDS };
            let _ = e.print();
            return code;
        }
    };
    let command: Vec<String> = args.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect();
    match cli.jobs {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build() {
            Ok(pool) => pool.install(|| run_parsed(&cli, command)),
            Err(e) => {
                eprintln!("error: {e}");
                EXIT_INPUT
            }
        },
        None => run_parsed(&cli, command),
    }
}
