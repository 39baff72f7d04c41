use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde_json::json;
use stablefrac::characterize::{
    certify_strongly_stable, gen_random_market_with_density, verify_characterization, Certification,
};
use stablefrac::model::{parse_market_with_warnings, serialize_market, Side as MarketSide};
use stablefrac::polytope::{check_scp, is_extreme_point};
use stablefrac::rotations::{enumerate_stable_via_rotations, find_cycles, reduce_profile};
use stablefrac::stability::{deferred_acceptance, enumerate_stable_bruteforce, is_stable};
use stablefrac::strongstab::{check_almost_integral, decompose, strong_stability_check};
use stablefrac::{incidence_vector, parse_fractional, FractionalMatching, Market, Matching};

use crate::report::{self, Report};
use crate::{Method, Side};

fn read(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).with_context(|| format!("cannot read {}", path.display()))
}

fn load_market(report: &mut Report, path: &Path) -> Result<Market> {
    let bytes = read(path)?;
    report.digest("market", &bytes);
    let text = String::from_utf8(bytes).context("market file is not UTF-8")?;
    let (m, pruned) =
        parse_market_with_warnings(&text).with_context(|| format!("in {}", path.display()))?;
    for p in pruned {
        report.diagnostics.push(format!(
            "dropped ({}, {}): not mutually acceptable",
            m.firm_name(p.firm),
            m.worker_name(p.worker)
        ));
    }
    Ok(m)
}

fn load_fraction(
    report: &mut Report,
    name: &str,
    m: &Market,
    path: &Path,
) -> Result<FractionalMatching> {
    let bytes = read(path)?;
    report.digest(name, &bytes);
    let text = String::from_utf8(bytes).context("fraction file is not UTF-8")?;
    parse_fractional(m, &text).with_context(|| format!("in {}", path.display()))
}

pub fn solve(market: &Path, side: Side) -> Result<Report> {
    let mut r = Report::new("solve");
    let m = load_market(&mut r, market)?;
    let (side, name) = match side {
        Side::Firms => (MarketSide::Firms, "firms"),
        Side::Workers => (MarketSide::Workers, "workers"),
    };
    let mu = deferred_acceptance(&m, side);
    let x = incidence_vector(&m, &mu);
    r.result = json!({
        "side": name,
        "matching": report::matching(&m, &mu),
        "matrix": report::matrix(&x),
    });
    r.text = format!("{}\n\n{}", mu.describe(&m), report::matrix_text(&m, &x));
    Ok(r)
}

pub fn check(market: &Path, fraction: &Path) -> Result<Report> {
    let mut r = Report::new("check");
    let m = load_market(&mut r, market)?;
    let x = load_fraction(&mut r, "fraction", &m, fraction)?;
    let scp = check_scp(&m, &x)?;
    if let Some(v) = scp.first_violation() {
        r.holds = false;
        r.diagnostics.push(report::describe_violation(&m, v));
        r.result = json!({
            "stability_polytope": report::constraint_report(&m, &scp),
            "strongly_stable": false,
        });
        r.text = format!(
            "stability polytope: infeasible\nfirst violation: {}\n",
            report::describe_violation(&m, v)
        );
        return Ok(r);
    }
    let ss = strong_stability_check(&m, &x)?;
    let vertex = is_extreme_point(&m, &x)?;
    let almost = check_almost_integral(&m, &x);
    r.holds = ss.overall;
    let witness = ss.first_violation();
    r.result = json!({
        "stability_polytope": report::constraint_report(&m, &scp),
        "strongly_stable": ss.overall,
        "witness": witness.map(|p| report::pair_condition(&m, p)),
        "pairs": ss.pairs.iter().map(|p| report::pair_condition(&m, p)).collect::<Vec<_>>(),
        "integral": x.is_integral(),
        "almost_integral": almost,
        "vertex": {
            "is_vertex": vertex.is_vertex,
            "rank": vertex.rank,
            "dimension": vertex.dimension,
        },
    });
    let yes_no = |b: bool| if b { "yes" } else { "no" };
    let mut t = String::from("stability polytope: feasible\n");
    t.push_str(&format!("strongly stable: {}\n", yes_no(ss.overall)));
    if let Some(p) = witness {
        t.push_str(&format!(
            "witness: ({},{}) {} * {} = {}\n",
            m.firm_name(p.firm),
            m.worker_name(p.worker),
            p.firm_factor,
            p.worker_factor,
            p.product
        ));
        r.diagnostics.push(format!(
            "product at ({},{}) is {}",
            m.firm_name(p.firm),
            m.worker_name(p.worker),
            p.product
        ));
    }
    t.push_str(&format!(
        "vertex: {} (rank {} of {})\nintegral: {}\nalmost integral: {}\n\n",
        yes_no(vertex.is_vertex),
        vertex.rank,
        vertex.dimension,
        yes_no(x.is_integral()),
        yes_no(almost)
    ));
    t.push_str("pair        firm factor  worker factor  product\n");
    for p in &ss.pairs {
        let pair = format!("({},{})", m.firm_name(p.firm), m.worker_name(p.worker));
        t.push_str(&format!(
            "{pair:<11} {:>11}  {:>13}  {:>7}\n",
            p.firm_factor.to_string(),
            p.worker_factor.to_string(),
            p.product.to_string()
        ));
    }
    r.text = t;
    Ok(r)
}

pub fn decompose_cmd(market: &Path, fraction: &Path) -> Result<Report> {
    let mut r = Report::new("decompose");
    let m = load_market(&mut r, market)?;
    let x = load_fraction(&mut r, "fraction", &m, fraction)?;
    let scp = check_scp(&m, &x)?;
    if let Some(v) = scp.first_violation() {
        r.holds = false;
        r.diagnostics.push(report::describe_violation(&m, v));
        r.result = json!({ "stability_polytope": report::constraint_report(&m, &scp) });
        r.text = format!(
            "stability polytope: infeasible\nfirst violation: {}\n",
            report::describe_violation(&m, v)
        );
        return Ok(r);
    }
    match certify_strongly_stable(&m, &x)? {
        Certification::Refused(p) => {
            r.holds = false;
            r.diagnostics.push(format!(
                "not strongly stable: product at ({},{}) is {}",
                m.firm_name(p.firm),
                m.worker_name(p.worker),
                p.product
            ));
            r.result = json!({ "refused": report::pair_condition(&m, &p) });
            r.text = format!(
                "not strongly stable at ({},{}): {} * {} = {}\n",
                m.firm_name(p.firm),
                m.worker_name(p.worker),
                p.firm_factor,
                p.worker_factor,
                p.product
            );
        }
        Certification::Certified(cert) => {
            let d = decompose(&m, &x)?;
            r.result = json!({
                "decomposition": report::decomposition(&m, &d),
                "certificate": report::certificate(&m, &cert),
            });
            let mut t = String::from("weight  matching\n");
            for term in &d.terms {
                t.push_str(&format!(
                    "{:>6}  {}\n",
                    term.weight.to_string(),
                    term.matching.describe(&m)
                ));
            }
            t.push_str(&format!("\nbase: {}\n", cert.base.describe(&m)));
            for (i, rot) in cert.phi.iter().enumerate() {
                t.push_str(&format!("rotation {i}: {}\n", rot.describe(&m)));
            }
            for term in &cert.terms {
                let k: Vec<String> = term.rotations.iter().map(usize::to_string).collect();
                t.push_str(&format!(
                    "{:>6}  base[{{{}}}]\n",
                    term.weight.to_string(),
                    k.join(",")
                ));
            }
            r.text = t;
        }
    }
    Ok(r)
}

pub fn rotations(market: &Path, mu_path: Option<&Path>) -> Result<Report> {
    let mut r = Report::new("rotations");
    let m = load_market(&mut r, market)?;
    let mu: Matching = match mu_path {
        Some(p) => {
            let x = load_fraction(&mut r, "mu", &m, p)?;
            match x.to_matching() {
                Some(mu) => mu,
                None => bail!("{} is not a 0/1 matching", p.display()),
            }
        }
        None => deferred_acceptance(&m, MarketSide::Firms),
    };
    if !is_stable(&m, &mu) {
        r.holds = false;
        r.diagnostics
            .push(format!("{} is not stable", mu.describe(&m)));
        r.result = json!({ "base": report::matching(&m, &mu), "stable": false });
        r.text = format!("{} is not stable\n", mu.describe(&m));
        return Ok(r);
    }
    let rp = reduce_profile(&m, &mu)?;
    let phi = find_cycles(&rp);
    r.result = json!({
        "base": report::matching(&m, &mu),
        "reduced": report::reduced_profile(&m, &rp),
        "rotations": phi.iter().map(|s| report::rotation(&m, s)).collect::<Vec<_>>(),
    });
    let mut t = format!("base: {}\n\nreduced lists\n", mu.describe(&m));
    for f in m.firms() {
        let list: Vec<&str> = rp.firm_list(f).iter().map(|w| m.worker_name(*w)).collect();
        t.push_str(&format!("  {}: {}\n", m.firm_name(f), list.join(" ")));
    }
    for w in m.workers() {
        let list: Vec<&str> = rp.worker_list(w).iter().map(|f| m.firm_name(*f)).collect();
        t.push_str(&format!("  {}: {}\n", m.worker_name(w), list.join(" ")));
    }
    t.push_str(&format!("\n{} rotation(s)\n", phi.len()));
    for s in phi.iter() {
        t.push_str(&format!(
            "  {} -> {}\n",
            s.describe(&m),
            s.apply_to(&mu).describe(&m)
        ));
    }
    r.text = t;
    Ok(r)
}

pub fn stable_all(market: &Path, method: Method) -> Result<Report> {
    let mut r = Report::new("stable-all");
    let m = load_market(&mut r, market)?;
    let (all, name) = match method {
        Method::Brute => (enumerate_stable_bruteforce(&m)?, "brute"),
        Method::Rotations => (enumerate_stable_via_rotations(&m), "rotations"),
    };
    r.result = json!({
        "method": name,
        "count": all.len(),
        "matchings": all.iter().map(|mu| report::matching(&m, mu)).collect::<Vec<_>>(),
    });
    let mut t = format!("{} stable matching(s)\n", all.len());
    for mu in &all {
        t.push_str(&format!("  {}\n", mu.describe(&m)));
    }
    r.text = t;
    Ok(r)
}

pub fn verify(
    market: Option<&Path>,
    random: Option<&[u64]>,
    samples: usize,
    seed: u64,
) -> Result<Report> {
    let mut r = Report::new("verify");
    let m = match (market, random) {
        (Some(path), _) => load_market(&mut r, path)?,
        (None, Some(&[s, nf, nw, q])) => {
            if nf == 0 || nw == 0 || q == 0 {
                bail!("--random needs positive firm, worker and quota counts");
            }
            let m = gen_random_market_with_density(s, nf as usize, nw as usize, q as usize, 0.5);
            r.digest("market", serialize_market(&m).as_bytes());
            r.inputs.insert(
                "random".into(),
                json!({ "seed": s, "firms": nf, "workers": nw, "qmax": q }),
            );
            m
        }
        _ => bail!("give a market file or --random SEED FIRMS WORKERS QMAX"),
    };
    r.inputs.insert("seed".into(), json!(seed));
    r.inputs.insert("samples".into(), json!(samples));
    let v = verify_characterization(&m, seed, samples)?;
    r.holds = v.ok();
    for c in &v.counterexamples {
        r.diagnostics.push(format!("{:?}: {}", c.kind, c.detail));
    }
    r.result = report::verify_report(&v);
    r.text = format!(
        "stable matchings: {}\nrotations: {}\nhull samples: {}\ncandidates in a hull: {}\n\
         candidates outside every hull: {}\nvertices: {} ({} fractional)\ncounterexamples: {}\n",
        v.stable_matchings,
        v.rotations,
        v.positives,
        v.candidates_in_hull,
        v.negatives,
        v.vertices,
        v.fractional_vertices,
        v.counterexamples.len()
    );
    Ok(r)
}

pub fn gen(seed: u64, firms: usize, workers: usize, qmax: usize, density: f64) -> Result<Report> {
    if firms == 0 || workers == 0 || qmax == 0 {
        bail!("firm, worker and quota counts must be positive");
    }
    if !(0.0..=1.0).contains(&density) {
        bail!("density must lie in [0, 1]");
    }
    let mut r = Report::new("gen");
    let m = gen_random_market_with_density(seed, firms, workers, qmax, density);
    let text = serialize_market(&m);
    r.inputs.insert(
        "random".into(),
        json!({ "seed": seed, "firms": firms, "workers": workers, "qmax": qmax, "density": density }),
    );
    r.result = json!({ "market": text });
    r.text = text;
    Ok(r)
}
