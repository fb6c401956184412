//! The three worked examples, run end to end with certificates.

use std::collections::BTreeMap;

use extdom::algebra::validate_fragment;
use extdom::charge::{self, Charge};
use extdom::domination::{
    amalgam_space, compose_witness, convex_decipher_witness, deciphers, dominates, extension_space, point_charge,
    restriction_system, Composition, Triple, REASON_EMPTY,
};
use extdom::fragments::{self, oer, End, PresburgerRecipe};
use extdom::lp::{Direction, LinearSystem};
use extdom::rational::{self, int, q, Q};
use extdom::{AtomSet, Error, Fragment, Result};
use num_traits::{One, Zero};

use crate::evidence;
use crate::report::Verdict;
use crate::schema::{ChargeFile, FragmentFile};

pub const NAMES: [&str; 3] = ["dlo-counterexample", "presburger-infinity", "oer-mutual"];

pub struct Options {
    pub params: Vec<Q>,
    pub presburger: PresburgerRecipe,
    pub k: usize,
}

impl Default for Options {
    fn default() -> Self {
        Self { params: vec![int(0)], presburger: PresburgerRecipe::default(), k: 2 }
    }
}

/// Files a scenario offers for `--export`.
pub struct Export {
    pub fragment: FragmentFile,
    pub charges: BTreeMap<String, ChargeFile>,
}

pub struct Run {
    pub fragment: Fragment,
    pub verdicts: Vec<Verdict>,
    pub export: Export,
}

pub fn run(name: &str, opts: &Options) -> Result<Run> {
    match name {
        "dlo-counterexample" => dlo(&opts.params),
        "presburger-infinity" => presburger(&opts.presburger),
        "oer-mutual" => oer_mutual(opts.k),
        other => Err(Error::Malformed(format!("unknown scenario {other:?}; expected one of {NAMES:?}"))),
    }
}

fn export(f: &Fragment, keep: Option<&[&str]>, charges: &[(&str, &Charge)]) -> Result<Export> {
    let charges = charges
        .iter()
        .map(|(n, c)| Ok((n.to_string(), ChargeFile::from_charge(f, c)?)))
        .collect::<Result<_>>()?;
    Ok(Export { fragment: FragmentFile::from_fragment(f, keep), charges })
}

fn validity(f: &Fragment) -> Verdict {
    let violations = validate_fragment(f);
    let v = Verdict::new("fragment-valid", violations.is_empty());
    match violations.first() {
        Some(first) => v.detail(format!("{} violations, first: {:?} {}", violations.len(), first.kind, first.detail)),
        None => v,
    }
}

fn add_mass(rows: &mut BTreeMap<usize, Q>, set: &AtomSet, coeff: &Q) {
    for &w in set {
        *rows.entry(w).or_insert_with(Q::zero) += coeff;
    }
}

fn dlo(params: &[Q]) -> Result<Run> {
    let s = fragments::build_dlo(params)?;
    let f = &s.fragment;
    let pair = f.pair("xy", "x", "y")?;
    let (mu, nu, omega, lam) = (s.charge("mu")?, s.charge("nu")?, s.charge("omega")?, s.charge("lambda")?);
    let (above_b, below_y, diagonal, rect) = (s.set("x>b")?, s.set("y<b")?, s.set("x=y")?, s.set("x>b&y<b")?);
    let mut out = vec![validity(f)];

    let e = extension_space(&pair, lam, mu)?;
    let (cert, ev) = evidence::solve("E(lambda, mu)", &e, None)?;
    let mut v = Verdict::new("extension-space-nonempty", cert.is_feasible()).evidence(ev);
    if let Some(point) = cert.point() {
        v = v.charge("witness", ChargeFile::from_charge(f, &point_charge(&pair, point)?)?);
    }
    out.push(v);

    let amal = amalgam_space(&pair, lam, mu)?;
    let (cert, ev) = evidence::solve("Amal(lambda, mu)", &amal, None)?;
    out.push(Verdict::new("amalgam-space-empty", !cert.is_feasible()).evidence(ev));

    let y_marginal = omega.marginal(f, pair.right)?;
    let mu_above = mu.evaluate(above_b)?;
    let product = &mu_above * y_marginal.evaluate(below_y)?;
    out.push(
        Verdict::new("diagonal-witness-values", true)
            .expect("mu(x>b)", &mu_above, &q(1, 2))
            .expect("lambda(x=y)", &lam.evaluate(diagonal)?, &int(1))
            .expect("omega(x>b & y<b)", &omega.evaluate(rect)?, &Q::zero())
            .expect("mu(x>b) * pi_y(omega)(y<b)", &product, &q(1, 4))
            .require(!charge::is_separated_amalgam(&pair, omega)?, "the diagonal witness is a separated amalgam"),
    );

    // A separated amalgam with x-marginal mu that lives on the diagonal:
    // its rectangle mass must equal mu(x>b) times its own y-mass below b.
    let y_low = pair.right.preimage(below_y);
    let n = pair.product.len();
    let mut cut = LinearSystem::new(n);
    cut.add_equality(diagonal.iter().map(|&w| (w, Q::one())), Q::one());
    let mut rows = BTreeMap::new();
    add_mass(&mut rows, rect, &Q::one());
    add_mass(&mut rows, &y_low, &-mu_above.clone());
    cut.add_equality(rows, Q::zero());
    let (forced, ev_cut) = evidence::mass_optimum("amalgam cut, max pi_y(y<b)", &cut, y_low.clone(), Direction::Max)?;
    let (lo, ev_lo) = evidence::mass_optimum("E(lambda, mu), min pi_y(y<b)", &e, y_low.clone(), Direction::Min)?;
    let (hi, ev_hi) = evidence::mass_optimum("E(lambda, mu), max pi_y(y<b)", &e, y_low, Direction::Max)?;
    out.push(
        Verdict::new("forced-contradiction", true)
            .expect("amalgam pi_y(y<b)", &forced, &Q::zero())
            .expect("extension min pi_y(y<b)", &lo, &q(1, 2))
            .expect("extension max pi_y(y<b)", &hi, &q(1, 2))
            .evidence(ev_cut)
            .evidence(ev_lo)
            .evidence(ev_hi),
    );

    let dom = dominates(&pair, mu, nu, lam)?;
    out.push(Verdict::new("dominates", dom.holds).evidence(evidence::domination("mu over nu", &dom)));
    let dec = deciphers(&pair, mu, nu, lam)?;
    out.push(
        Verdict::new("deciphering-fails-empty", !dec.holds && dec.reason.as_deref() == Some(REASON_EMPTY))
            .evidence(evidence::domination("mu over nu, amalgams", &dec)),
    );

    let export = export(f, None, &[("mu", mu), ("nu", nu), ("lambda", lam), ("omega", omega)])?;
    Ok(Run { fragment: s.fragment.clone(), verdicts: out, export })
}

struct Chain<'a> {
    f: &'a Fragment,
    label: String,
}

impl Chain<'_> {
    /// Checks `left >= mid` by `first` on xy and `mid >= right` by `second`
    /// on yz, glues the witnesses and checks `left >= right` on xz.
    fn run(&self, left: &Charge, mid: &Charge, right: &Charge, first: &Charge, second: &Charge) -> Result<Verdict> {
        let f = self.f;
        let (xy, yz, xz) = (f.pair("xy", "x", "y")?, f.pair("yz", "y", "z")?, f.pair("xz", "x", "z")?);
        let d1 = dominates(&xy, left, mid, first)?;
        let d2 = dominates(&yz, mid, right, second)?;
        let mut v = Verdict::new(self.label.clone(), true)
            .require(d1.holds, "first step fails")
            .require(d2.holds, "second step fails")
            .evidence(evidence::domination("first step", &d1))
            .evidence(evidence::domination("second step", &d2));
        match compose_witness(f, &Triple::default(), first, second)? {
            Composition::Composed { witness, system, certificate, .. } => {
                let d = dominates(&xz, left, right, &witness)?;
                v = v
                    .evidence(evidence::linear("glued witness", &system, &certificate))
                    .require(d.holds, "composite fails")
                    .evidence(evidence::domination("composite", &d))
                    .charge("composite-witness", ChargeFile::from_charge(f, &witness)?);
            }
            Composition::Infeasible { system, certificate } => {
                v = v.require(false, "witnesses do not glue").evidence(evidence::linear("glued witness", &system, &certificate));
            }
        }
        Ok(v)
    }
}

fn presburger(recipe: &PresburgerRecipe) -> Result<Run> {
    let (p, [mu_d, nu_d, eta_d]) = fragments::build_presburger(recipe)?;
    let s = &p.scenario;
    let f = &s.fragment;
    let (mu, nu, eta, lam) = (s.charge("mu")?, s.charge("nu")?, s.charge("eta")?, s.charge("lambda")?);
    let xy = f.pair("xy", "x", "y")?;
    let mut out = vec![validity(f)];

    let d = dominates(&xy, mu, nu, lam)?;
    out.push(
        Verdict::new("same-end-domination", d.holds)
            .expect("lambda(x<y)", &lam.evaluate(&above_diagonal(&xy))?, &int(1))
            .evidence(evidence::domination("mu over nu", &d)),
    );

    // +∞ over −∞: negate, then compare at −∞.
    let chain = |label: &str| Chain { f, label: label.into() };
    let neg_mu = p.negate_distribution(&mu_d);
    let first = p.negation_witness("xy", "x", "y", mu)?;
    let mid = first.marginal(f, xy.right)?;
    let second = p.end_witness("yz", End::Minus, &neg_mu, &eta_d)?;
    let mid_full = p.at_end("y", End::Minus, &neg_mu)?;
    let v = chain("plus-over-minus").run(mu, &mid_full, eta, &first, &second)?;
    out.push(v.require(mid_full.restrict(f, mid.level())? == mid, "negation image is not at -inf"));

    // −∞ over +∞, the same way round.
    let low = p.at_end("x", End::Minus, &eta_d)?;
    let neg_eta = p.negate_distribution(&eta_d);
    let first = p.negation_witness("xy", "x", "y", &low)?;
    let mid_full = p.at_end("y", End::Plus, &neg_eta)?;
    let second = p.end_witness("yz", End::Plus, &neg_eta, &mu_d)?;
    let high = p.at_end("z", End::Plus, &mu_d)?;
    out.push(chain("minus-over-plus").run(&low, &mid_full, &high, &first, &second)?);

    // Convex combinations through a Dirac type at +∞.
    let modulus = p.modulus as usize;
    let mut dirac = vec![Q::zero(); modulus];
    dirac[0] = Q::one();
    let yz = f.pair("yz", "y", "z")?;
    let point = p.at_end("y", End::Plus, &dirac)?;
    let to_point = p.end_witness("xy", End::Plus, &mu_d, &dirac)?;
    let high = p.at_end("z", End::Plus, &nu_d)?;
    let to_high = p.end_witness("yz", End::Plus, &dirac, &nu_d)?;
    let to_low = through_negation(&p, &point, &dirac, &eta_d)?;
    let sep = p.positive();
    for r in [q(1, 4), q(1, 2), q(3, 4)] {
        let target = charge::convex(&r, &high, eta)?;
        let mix = convex_decipher_witness(&yz, &to_high, &to_low, &r, &sep)?;
        let dec = deciphers(&yz, &point, &target, &mix)?;
        let label = format!("convex-r={}", rational::format(&r));
        let v = chain(&label)
            .run(mu, &point, &target, &to_point, &mix)?
            .require(dec.holds, "the Dirac type does not decipher the mixture")
            .evidence(evidence::domination("Dirac deciphers mixture", &dec));
        out.push(v);
    }

    let keep = ["x", "y", "xy"];
    let export = export(f, Some(&keep), &[("mu", mu), ("nu", nu), ("lambda", lam)])?;
    Ok(Run { fragment: f.clone(), verdicts: out, export })
}

/// A witness on yz for `point` at +∞ with residues `dist` over the charge at
/// −∞ with residues `low`: negate onto x, compare at −∞ on xz, glue along x.
fn through_negation(p: &fragments::Presburger, point: &Charge, dist: &[Q], low: &[Q]) -> Result<Charge> {
    let f = p.fragment();
    let negated = p.negation_witness("xy", "y", "x", point)?;
    let step = p.end_witness("xz", End::Minus, &p.negate_distribution(dist), low)?;
    let through_x = Triple { xyz: "xyz", xy: "xy", yz: "xz", xz: "yz", y: "x" };
    match compose_witness(f, &through_x, &negated, &step)? {
        Composition::Composed { witness, .. } => Ok(witness),
        Composition::Infeasible { .. } => Err(Error::Infeasible),
    }
}

fn above_diagonal(pair: &extdom::Pair<'_>) -> AtomSet {
    (0..pair.product.len()).filter(|&w| pair.product.atom(w).contains("|<|")).collect()
}

fn oer_mutual(k: usize) -> Result<Run> {
    let s = fragments::build_oer(k)?;
    let f = &s.fragment;
    let xy = f.pair("xy", "x", "y")?;
    let (mu, nu, lam) = (s.charge("mu")?, s.charge("nu")?, s.charge("lambda")?);
    let (nu_x, mu_y, lam_t) = (s.charge("nu_on_x")?, s.charge("mu_on_y")?, s.charge("lambda_transposed")?);
    let mut out = vec![validity(f)];

    let mut v = Verdict::new("pairing-witness", true).expect("lambda(E(x,y))", &lam.evaluate(s.set("E(x,y)")?)?, &int(1));
    for (name, set) in s.sets.iter().filter(|(n, _)| n.starts_with("E(x,") && *n != "E(x,y)") {
        v = v.expect(&format!("mu({name})"), &mu.evaluate(&set.atoms)?, &Q::zero());
    }
    out.push(v);

    let forward = dominates(&xy, mu, nu, lam)?;
    out.push(Verdict::new("mu-dominates-nu", forward.holds).evidence(evidence::domination("mu over nu", &forward)));
    let back = dominates(&xy, nu_x, mu_y, lam_t)?;
    out.push(Verdict::new("nu-dominates-mu", back.holds).evidence(evidence::domination("nu over mu", &back)));

    let restricted = mu.restrict(f, oer::BASE_LEVEL)?;
    let sys = restriction_system(&restricted);
    let (exact, ev) = evidence::ranges("extensions of mu from the base level", &sys, f.space("x")?.atoms())?;
    out.push(Verdict::new("mu-not-smooth", !exact).evidence(ev));

    let charges = [("mu", mu), ("nu", nu), ("lambda", lam), ("nu_on_x", nu_x), ("mu_on_y", mu_y), ("lambda_transposed", lam_t)];
    let export = export(f, None, &charges)?;
    Ok(Run { fragment: s.fragment.clone(), verdicts: out, export })
}
