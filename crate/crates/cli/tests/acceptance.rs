//! Runs the acceptance criteria through the binary and prints one line per
//! criterion. Exits nonzero if any criterion fails.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use extdom::fragments::PresburgerRecipe;
use serde_json::Value;

const SEED: &str = "7";

struct Ctx {
    dir: tempfile::TempDir,
    reports: Vec<PathBuf>,
}

type Check = Result<String, String>;
type Criterion = (&'static str, fn(&mut Ctx) -> Check);

fn ensure(cond: bool, what: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(what.into())
    }
}

impl Ctx {
    /// Runs the binary with `--out` into a fresh file; returns exit code,
    /// parsed report and wall time.
    fn run(&mut self, name: &str, args: &[&str]) -> Result<(i32, Value, Duration), String> {
        let out = self.dir.path().join(format!("{name}.json"));
        let start = Instant::now();
        let status = Command::new(env!("CARGO_BIN_EXE_extdom"))
            .args(args)
            .arg("--out")
            .arg(&out)
            .status()
            .map_err(|e| e.to_string())?;
        let wall = start.elapsed();
        let text = std::fs::read_to_string(&out).map_err(|e| format!("{name}: no report: {e}"))?;
        let report: Value = serde_json::from_str(&text).map_err(|e| e.to_string())?;
        self.reports.push(out);
        Ok((status.code().unwrap_or(-1), report, wall))
    }

    fn export_dir(&self, name: &str) -> String {
        self.dir.path().join(name).to_string_lossy().into_owned()
    }
}

fn verdict<'a>(report: &'a Value, name: &str) -> Result<&'a Value, String> {
    report["verdicts"]
        .as_array()
        .and_then(|vs| vs.iter().find(|v| v["name"] == name))
        .ok_or_else(|| format!("no verdict {name:?}"))
}

fn holds(report: &Value, name: &str) -> Result<(), String> {
    let v = verdict(report, name)?;
    ensure(v["status"] == "holds", format!("{name}: {} {}", v["status"], v["detail"]))
}

fn number(report: &Value, verdict_name: &str, value_name: &str) -> Result<String, String> {
    verdict(report, verdict_name)?["values"]
        .as_array()
        .and_then(|vs| vs.iter().find(|v| v["name"] == value_name))
        .and_then(|v| v["value"].as_str())
        .map(String::from)
        .ok_or_else(|| format!("no value {value_name:?} in {verdict_name:?}"))
}

fn exact(report: &Value, verdict_name: &str, value_name: &str, want: &str) -> Result<(), String> {
    let got = number(report, verdict_name, value_name)?;
    ensure(got == want, format!("{value_name} = {got}, expected {want}"))
}

fn elapsed_ms(report: &Value) -> u64 {
    report["timing"]["elapsed_ms"].as_u64().unwrap_or(u64::MAX)
}

fn dlo(ctx: &mut Ctx) -> Check {
    let (code, r, wall) = ctx.run("dlo", &["scenario", "dlo-counterexample", "--timing"])?;
    ensure(code == 0, format!("exit code {code}"))?;
    let e = verdict(&r, "extension-space-nonempty")?;
    holds(&r, "extension-space-nonempty")?;
    ensure(e["evidence"][0]["claim"] == "feasible", "extension space not certified feasible")?;
    ensure(e["charges"]["witness"]["space"] == "xy", "no explicit witness charge")?;
    let a = verdict(&r, "amalgam-space-empty")?;
    holds(&r, "amalgam-space-empty")?;
    ensure(a["evidence"][0]["certificate"]["kind"] == "infeasible", "amalgam space has no Farkas certificate")?;
    exact(&r, "diagonal-witness-values", "mu(x>b)", "1/2")?;
    exact(&r, "diagonal-witness-values", "omega(x>b & y<b)", "0")?;
    exact(&r, "diagonal-witness-values", "mu(x>b) * pi_y(omega)(y<b)", "1/4")?;
    exact(&r, "forced-contradiction", "amalgam pi_y(y<b)", "0")?;
    exact(&r, "forced-contradiction", "extension min pi_y(y<b)", "1/2")?;
    exact(&r, "forced-contradiction", "extension max pi_y(y<b)", "1/2")?;
    holds(&r, "deciphering-fails-empty")?;
    ensure(elapsed_ms(&r) < 1000 && wall < Duration::from_secs(1), format!("took {wall:?}"))?;
    Ok(format!("E feasible, Amal infeasible, 1/2, 1/4 vs 0, 0 vs 1/2, {} ms", elapsed_ms(&r)))
}

fn check_dominates(ctx: &mut Ctx, name: &str, dir: &str, mu: &str, nu: &str, lam: &str) -> Result<Duration, String> {
    let file = |n: &str| format!("{dir}/{n}.json");
    let args = [
        "check", "dominates", "--fragment", &file("fragment"), "--mu", &file(mu), "--nu", &file(nu), "--lambda",
        &file(lam),
    ];
    let (code, r, wall) = ctx.run(name, &args)?;
    ensure(code == 0, format!("check dominates {mu} {nu}: exit {code}"))?;
    holds(&r, "dominates")?;
    Ok(wall)
}

fn presburger(ctx: &mut Ctx) -> Check {
    let recipe = PresburgerRecipe::default();
    ensure(recipe.base.len() >= 2 && recipe.moduli == [2, 3], "default recipe changed")?;
    let dir = ctx.export_dir("presburger");
    let (code, r, wall) = ctx.run("presburger", &["scenario", "presburger-infinity", "--timing", "--export", &dir])?;
    ensure(code == 0, format!("exit code {code}"))?;
    for name in ["fragment-valid", "same-end-domination", "plus-over-minus", "minus-over-plus"] {
        holds(&r, name)?;
    }
    for rw in ["1/4", "1/2", "3/4"] {
        let name = format!("convex-r={rw}");
        holds(&r, &name)?;
        let v = verdict(&r, &name)?;
        let dec = v["evidence"].as_array().unwrap().iter().find(|e| e["label"] == "Dirac deciphers mixture");
        ensure(dec.is_some_and(|e| e["verdict"]["holds"] == true), "mixture not deciphered")?;
    }
    let check = check_dominates(ctx, "presburger-check", &dir, "mu", "nu", "lambda")?;
    ensure(wall < Duration::from_secs(10) && check < Duration::from_secs(10), format!("took {wall:?} + {check:?}"))?;
    Ok(format!("same end, both opposite ends, r in {{1/4, 1/2, 3/4}}, {} ms", elapsed_ms(&r)))
}

fn oer(ctx: &mut Ctx) -> Check {
    let dir = ctx.export_dir("oer");
    let (code, r, wall) = ctx.run("oer", &["scenario", "oer-mutual", "--k", "2", "--timing", "--export", &dir])?;
    ensure(code == 0, format!("exit code {code}"))?;
    for name in ["fragment-valid", "pairing-witness", "mu-dominates-nu", "nu-dominates-mu", "mu-not-smooth"] {
        holds(&r, name)?;
    }
    let forward = check_dominates(ctx, "oer-forward", &dir, "mu", "nu", "lambda")?;
    let back = check_dominates(ctx, "oer-back", &dir, "nu_on_x", "mu_on_y", "lambda_transposed")?;
    ensure(wall + forward + back < Duration::from_secs(10), format!("took {:?}", wall + forward + back))?;
    Ok(format!("both directions hold, mu not smooth over the base level, {} ms", elapsed_ms(&r)))
}

/// Runs one battery and requires every instance to pass.
fn battery(ctx: &mut Ctx, name: &str, instances: usize, extra: &[&str]) -> Result<Value, String> {
    let n = instances.to_string();
    let mut args = vec!["suite", "--name", name, "--seed", SEED, "--instances", &n];
    args.extend_from_slice(extra);
    let (code, r, _) = ctx.run(&format!("suite-{name}{}", extra.join("")), &args)?;
    let s = r["suites"][0].clone();
    ensure(
        code == 0 && s["passed"] == instances && s["failed"] == 0 && s["findings"] == 0,
        format!("{name}: {} passed, {} failed, {} findings, {} skipped", s["passed"], s["failed"], s["findings"], s["skipped"]),
    )?;
    Ok(s)
}

fn tally(s: &Value, key: &str) -> u64 {
    s["tallies"][key].as_u64().unwrap_or(0)
}

fn charge_extension(ctx: &mut Ctx) -> Check {
    let s = battery(ctx, "common-extension", 200, &[])?;
    let small = battery(ctx, "common-extension", 200, &["--max-atoms", "5"])?;
    ensure(tally(&small, "scanned") == 200, "subset scan did not cover every small instance")?;
    Ok(format!("200/200 at 6 atoms ({} scanned), 200/200 scanned at 5 atoms", tally(&s, "scanned")))
}

fn preorder(ctx: &mut Ctx) -> Check {
    let s = battery(ctx, "preorder", 200, &[])?;
    let composed: u64 = ["A", "B", "full"].iter().map(|l| tally(&s, &format!("composed at {l}"))).sum();
    ensure(composed == 200, format!("only {composed} compositions"))?;
    ensure(tally(&s, "triple system infeasible") == 0, "triple system infeasible")?;
    Ok("200/200 reflexive and transitive, 0 findings".into())
}

fn squeeze(ctx: &mut Ctx) -> Check {
    battery(ctx, "squeeze-equivalence", 200, &[])?;
    Ok("200/200 agree".into())
}

fn preservation(ctx: &mut Ctx) -> Check {
    for name in ["invariance", "smoothness", "finite-satisfiability"] {
        battery(ctx, name, 100, &[])?;
    }
    Ok("100/100 each for invariance, smoothness, finite satisfiability".into())
}

fn amalgams(ctx: &mut Ctx) -> Check {
    for name in ["amalgam-containment", "dirac-bridging", "localization"] {
        battery(ctx, name, 100, &[])?;
    }
    Ok("100/100 each for containment, Dirac bridging, localization".into())
}

fn oracle(ctx: &mut Ctx) -> Check {
    battery(ctx, "oracle-agreement", 200, &[])?;
    let reports = ctx.reports.clone();
    for path in &reports {
        let status = Command::new(env!("CARGO_BIN_EXE_extdom")).arg("verify").arg(path).output().map_err(|e| e.to_string())?;
        ensure(status.status.code() == Some(0), format!("verify rejected {}", display(path)))?;
    }
    Ok(format!("200/200 simplex = vertices, {} reports verified", reports.len()))
}

fn display(p: &Path) -> String {
    p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default()
}

fn main() {
    let mut ctx = Ctx { dir: tempfile::tempdir().expect("temp dir"), reports: Vec::new() };
    let criteria: [Criterion; 9] = [
        ("dense order counterexample", dlo),
        ("Presburger at infinity", presburger),
        ("ordered equivalence relation", oer),
        ("charge extension", charge_extension),
        ("preorder", preorder),
        ("squeeze equivalence", squeeze),
        ("preservation", preservation),
        ("amalgam layer", amalgams),
        ("oracle agreement and verification", oracle),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check(&mut ctx) {
            Ok(note) => println!("criterion {}: PASS {name}: {note}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {}: FAIL {name}: {why}", i + 1);
            }
        }
    }
    println!("{} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
