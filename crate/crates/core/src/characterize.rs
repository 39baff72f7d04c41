//! Hull certificates for strongly stable points, the hull sampler, and the
//! harness that checks strong stability against hull membership.

use std::collections::BTreeSet;

use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::model::{incidence_vector, Firm, FractionalMatching, Market, Matching, Worker};
use crate::polytope::{self, ConstraintReport};
use crate::rational::Rational;
use crate::rotations::{connected_set_indexed, rotations_at, Rotation, RotationSet};
use crate::stability::{enumerate_stable_bruteforce, EnumerationError};
use crate::strongstab::{
    check_almost_integral, decompose, firm_dominance, strong_stability_check, worker_dominance,
    Dominance, PairCondition, StrongStabilityError,
};

/// `μ¹[K_l]` with its weight; `rotations` indexes into the base's `Φ`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CertificateTerm {
    pub rotations: Vec<usize>,
    pub matching: Matching,
    pub weight: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HullCertificate {
    pub base: Matching,
    pub phi: RotationSet,
    pub terms: Vec<CertificateTerm>,
}

impl HullCertificate {
    pub fn reconstruct(&self, m: &Market) -> FractionalMatching {
        let vectors: Vec<FractionalMatching> = self
            .terms
            .iter()
            .map(|t| incidence_vector(m, &t.matching))
            .collect();
        FractionalMatching::combination(
            m.n_firms(),
            m.n_workers(),
            self.terms.iter().map(|t| &t.weight).zip(&vectors),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Certification {
    Certified(HullCertificate),
    /// The first pair with a nonzero product.
    Refused(PairCondition),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CertifyError {
    #[error("point has the wrong shape")]
    Shape,
    #[error("point is outside the stability polytope")]
    NotStable(ConstraintReport),
    #[error("characterization violated: {0}")]
    InvariantViolation(String),
}

/// Writes a strongly stable point as a convex combination over one
/// connected set, or names the pair where the product condition fails.
pub fn certify_strongly_stable(
    m: &Market,
    x: &FractionalMatching,
) -> Result<Certification, CertifyError> {
    let report = strong_stability_check(m, x).map_err(|e| match e {
        StrongStabilityError::Shape(_) => CertifyError::Shape,
        StrongStabilityError::NotStable(r) => CertifyError::NotStable(r),
    })?;
    if let Some(bad) = report.first_violation() {
        return Ok(Certification::Refused(bad.clone()));
    }
    let d = decompose(m, x).map_err(|e| CertifyError::InvariantViolation(e.to_string()))?;
    let base = d.terms[0].matching.clone();
    let phi = rotations_at(m, &base).map_err(|e| CertifyError::InvariantViolation(e.to_string()))?;
    let mut terms = Vec::with_capacity(d.len());
    for t in &d.terms {
        let k = rotations_between(&base, &phi, &t.matching).ok_or_else(|| {
            CertifyError::InvariantViolation(format!(
                "{} is not a cyclic matching of {}",
                t.matching.describe(m),
                base.describe(m)
            ))
        })?;
        terms.push(CertificateTerm {
            rotations: k,
            matching: t.matching.clone(),
            weight: t.weight.clone(),
        });
    }
    let cert = HullCertificate { base, phi, terms };
    if &cert.reconstruct(m) != x {
        return Err(CertifyError::InvariantViolation(
            "certificate does not reconstruct the point".into(),
        ));
    }
    Ok(Certification::Certified(cert))
}

/// The `K ⊆ Φ(base)` with `base[K] = target`, read firm by firm.
fn rotations_between(base: &Matching, phi: &RotationSet, target: &Matching) -> Option<Vec<usize>> {
    let mut k = Vec::new();
    let mut covered: BTreeSet<Firm> = BTreeSet::new();
    for (i, sigma) in phi.iter().enumerate() {
        let moved = sigma.apply_to(base);
        let same = sigma
            .firms()
            .iter()
            .all(|f| target.workers_of(*f) == base.workers_of(*f));
        let rotated = sigma
            .firms()
            .iter()
            .all(|f| target.workers_of(*f) == moved.workers_of(*f));
        match (same, rotated) {
            (true, _) => {}
            (false, true) => k.push(i),
            (false, false) => return None,
        }
        covered.extend(sigma.firms());
    }
    let untouched = (0..base.n_firms())
        .map(Firm)
        .filter(|f| !covered.contains(f))
        .all(|f| target.workers_of(f) == base.workers_of(f));
    untouched.then_some(k)
}

/// Coordinates `t ∈ [0,1]^{|Φ|}` with `x = x^μ + Σ t_σ (x^{μ[σ]} − x^μ)`,
/// if `x` lies in the hull of the connected set of `mu` over `phi`.
///
/// The rotations move disjoint firm rows, so each `t_σ` is fixed by any
/// single entry its difference vector touches.
pub fn hull_coordinates(
    m: &Market,
    mu: &Matching,
    phi: &[Rotation],
    x: &FractionalMatching,
) -> Option<Vec<Rational>> {
    let base = incidence_vector(m, mu);
    let offset = x.minus(&base);
    let mut coords = Vec::with_capacity(phi.len());
    let mut rebuilt = base.clone();
    for sigma in phi {
        let delta = incidence_vector(m, &sigma.apply_to(mu)).minus(&base);
        let (f, w, dv) = delta.entries().find(|(_, _, v)| !v.is_zero())?;
        let t = offset.get(f, w) / dv;
        if t < Rational::zero() || t > Rational::one() {
            return None;
        }
        rebuilt = rebuilt.plus(&delta.scaled(&t));
        coords.push(t);
    }
    (&rebuilt == x).then_some(coords)
}

/// Whether `x` lies in the hull of some connected set of a stable matching
/// in `stable`.
pub fn in_some_hull(
    m: &Market,
    stable: &[(Matching, RotationSet)],
    x: &FractionalMatching,
) -> bool {
    stable
        .iter()
        .any(|(mu, phi)| hull_coordinates(m, mu, &phi.rotations, x).is_some())
}

fn random_hull_point<R: Rng>(m: &Market, members: &[Matching], rng: &mut R) -> FractionalMatching {
    let mut weights: Vec<u32> = members
        .iter()
        .map(|_| {
            if rng.gen_bool(0.5) {
                rng.gen_range(1..=8)
            } else {
                0
            }
        })
        .collect();
    if weights.iter().all(|w| *w == 0) {
        let i = rng.gen_range(0..weights.len());
        weights[i] = rng.gen_range(1..=8);
    }
    let total: u32 = weights.iter().sum();
    let terms: Vec<(Rational, FractionalMatching)> = members
        .iter()
        .zip(&weights)
        .filter(|(_, w)| **w > 0)
        .map(|(mu, w)| {
            (
                Rational::new((*w).into(), total.into()),
                incidence_vector(m, mu),
            )
        })
        .collect();
    FractionalMatching::combination(
        m.n_firms(),
        m.n_workers(),
        terms.iter().map(|(a, x)| (a, x)),
    )
}

/// Seeded random rational points of the hull of the connected set of `mu`
/// over all of `Φ(μ)`. Weights are integers in `1..=8`, normalized.
pub fn sample_hull(
    m: &Market,
    mu: &Matching,
    seed: u64,
    count: usize,
) -> Result<Vec<FractionalMatching>, crate::rotations::RotationError> {
    let phi = rotations_at(m, mu)?;
    let members: Vec<Matching> = connected_set_indexed(m, mu, &phi.rotations)?
        .into_iter()
        .map(|(_, x)| x)
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..count)
        .map(|_| random_hull_point(m, &members, &mut rng))
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CounterexampleKind {
    /// A hull point that fails the product condition.
    HullPointNotStronglyStable,
    /// A strongly stable point outside every hull.
    StronglyStableOutsideHulls,
    /// Certification failed or did not reconstruct the point.
    CertificateFailure,
    /// Decomposition chain not strictly decreasing for the firms.
    ChainNotStrict,
    /// A non-integer vertex that passes the product condition.
    FractionalVertexStronglyStable,
    /// A strongly stable point that is not almost integral.
    NotAlmostIntegral,
    /// A strongly stable point outside the `μ_F`/`μ_W` dominance sandwich.
    OutsideSandwich,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Counterexample {
    pub kind: CounterexampleKind,
    pub point: FractionalMatching,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct VerifyReport {
    pub stable_matchings: usize,
    /// Sum of `|Φ(μ)|` over stable `μ`.
    pub rotations: usize,
    /// Hull samples checked.
    pub positives: usize,
    /// Stability-polytope points outside every hull.
    pub negatives: usize,
    /// Candidate points that turned out to lie in some hull.
    pub candidates_in_hull: usize,
    pub vertices: usize,
    pub fractional_vertices: usize,
    pub counterexamples: Vec<Counterexample>,
}

impl VerifyReport {
    pub fn ok(&self) -> bool {
        self.counterexamples.is_empty()
    }

    fn merge(&mut self, cell: Cell) {
        self.positives += cell.positives;
        self.negatives += cell.negatives;
        self.candidates_in_hull += cell.candidates_in_hull;
        self.vertices += cell.vertices;
        self.fractional_vertices += cell.fractional_vertices;
        self.counterexamples.extend(cell.counterexamples);
    }
}

#[derive(Default)]
struct Cell {
    positives: usize,
    negatives: usize,
    candidates_in_hull: usize,
    vertices: usize,
    fractional_vertices: usize,
    counterexamples: Vec<Counterexample>,
}

impl Cell {
    fn fail(&mut self, kind: CounterexampleKind, point: &FractionalMatching, detail: String) {
        self.counterexamples.push(Counterexample {
            kind,
            point: point.clone(),
            detail,
        });
    }
}

struct Context<'a> {
    m: &'a Market,
    stable: Vec<(Matching, RotationSet)>,
    members: Vec<Vec<Matching>>,
    x_f: FractionalMatching,
    x_w: FractionalMatching,
}

impl Context<'_> {
    /// Checks every property a strongly stable point must have.
    fn check_strong(&self, x: &FractionalMatching, cell: &mut Cell) {
        use CounterexampleKind::*;
        match certify_strongly_stable(self.m, x) {
            Ok(Certification::Certified(cert)) => {
                for pair in cert.terms.windows(2) {
                    let d = firm_dominance(
                        self.m,
                        &incidence_vector(self.m, &pair[0].matching),
                        &incidence_vector(self.m, &pair[1].matching),
                    );
                    if d != Dominance::StronglyDominates {
                        cell.fail(
                            ChainNotStrict,
                            x,
                            format!("adjacent terms compare as {d:?}"),
                        );
                    }
                }
            }
            Ok(Certification::Refused(p)) => cell.fail(
                CertificateFailure,
                x,
                format!("refused at {:?}", (p.firm, p.worker)),
            ),
            Err(e) => cell.fail(CertificateFailure, x, e.to_string()),
        }
        if !check_almost_integral(self.m, x) {
            cell.fail(NotAlmostIntegral, x, String::new());
        }
        let top = firm_dominance(self.m, &self.x_f, x);
        let bottom = firm_dominance(self.m, x, &self.x_w);
        let w_top = worker_dominance(self.m, &self.x_w, x);
        let w_bottom = worker_dominance(self.m, x, &self.x_f);
        let weak =
            |d: Dominance| matches!(d, Dominance::WeaklyDominates | Dominance::StronglyDominates);
        if !(weak(top) && weak(bottom) && weak(w_top) && weak(w_bottom)) {
            cell.fail(
                OutsideSandwich,
                x,
                format!("{top:?} {bottom:?} {w_top:?} {w_bottom:?}"),
            );
        }
    }

    fn positive(&self, rng: &mut ChaCha8Rng, cell: &mut Cell) {
        let i = rng.gen_range(0..self.stable.len());
        let x = random_hull_point(self.m, &self.members[i], rng);
        cell.positives += 1;
        if strong_stability_check(self.m, &x).map_or(true, |r| !r.overall) {
            cell.fail(
                CounterexampleKind::HullPointNotStronglyStable,
                &x,
                format!("hull of {}", self.stable[i].0.describe(self.m)),
            );
            return;
        }
        self.check_strong(&x, cell);
    }

    /// Classifies a stability-polytope point by hull membership and compares
    /// with the product condition.
    fn candidate(&self, x: &FractionalMatching, cell: &mut Cell) {
        let in_hull = in_some_hull(self.m, &self.stable, x);
        let strong = strong_stability_check(self.m, x).is_ok_and(|r| r.overall);
        if in_hull {
            cell.candidates_in_hull += 1;
        } else {
            cell.negatives += 1;
        }
        match (in_hull, strong) {
            (true, false) => cell.fail(
                CounterexampleKind::HullPointNotStronglyStable,
                x,
                String::new(),
            ),
            (false, true) => cell.fail(
                CounterexampleKind::StronglyStableOutsideHulls,
                x,
                String::new(),
            ),
            (true, true) => self.check_strong(x, cell),
            (false, false) => {}
        }
    }

    fn mixture(&self, rng: &mut ChaCha8Rng) -> FractionalMatching {
        let all: Vec<Matching> = self.stable.iter().map(|(mu, _)| mu.clone()).collect();
        let k = rng.gen_range(2..=3).min(all.len());
        let chosen: Vec<Matching> = all.choose_multiple(rng, k).cloned().collect();
        random_hull_point(self.m, &chosen, rng)
    }

    fn negative(&self, rng: &mut ChaCha8Rng, cell: &mut Cell) {
        let base = self.mixture(rng);
        match rng.gen_range(0..3) {
            0 => self.candidate(&base, cell),
            1 => {
                let mut vertex = polytope::walk_to_vertex(self.m, &base, rng)
                    .expect("mixtures of stable matchings are feasible");
                self.vertex(&vertex, cell);
                for _ in 0..rng.gen_range(1..=6) {
                    match polytope::step_to_adjacent_vertex(self.m, &vertex, rng) {
                        Ok(Some(next)) => {
                            vertex = next;
                            self.vertex(&vertex, cell);
                        }
                        _ => break,
                    }
                }
                let lambda = Rational::new(rng.gen_range(1..=7).into(), 8.into());
                let mixed = vertex
                    .scaled(&lambda)
                    .plus(&base.scaled(&(Rational::one() - &lambda)));
                self.candidate(&mixed, cell);
            }
            _ => {
                let pairs = self.m.acceptable_pairs();
                let eps = Rational::new(1.into(), rng.gen_range(2..=16).into());
                for _ in 0..8 {
                    let mut y = base.clone();
                    for (f, w) in pairs.iter() {
                        let step: i64 = rng.gen_range(-1..=1);
                        let v = y.get(f, w) + &eps * Rational::from_integer(step.into());
                        y.set(f, w, v);
                    }
                    if polytope::check_scp(self.m, &y).is_ok_and(|r| r.is_feasible()) {
                        self.candidate(&y, cell);
                        break;
                    }
                }
            }
        }
    }

    fn vertex(&self, v: &FractionalMatching, cell: &mut Cell) {
        cell.vertices += 1;
        self.candidate(v, cell);
        if !v.is_integral() {
            cell.fractional_vertices += 1;
            if strong_stability_check(self.m, v).is_ok_and(|r| r.overall) {
                cell.fail(
                    CounterexampleKind::FractionalVertexStronglyStable,
                    v,
                    String::new(),
                );
            }
        }
    }
}

/// Samples hull points (which must be strongly stable) and stability-polytope
/// points of several kinds (whose strong stability must match hull
/// membership). Cells are independent and seeded per index.
pub fn verify_characterization(
    m: &Market,
    seed: u64,
    samples: usize,
) -> Result<VerifyReport, EnumerationError> {
    let all = enumerate_stable_bruteforce(m)?;
    let stable: Vec<(Matching, RotationSet)> = all
        .iter()
        .map(|mu| {
            (
                mu.clone(),
                rotations_at(m, mu).expect("brute-force output is stable"),
            )
        })
        .collect();
    let members = stable
        .iter()
        .map(|(mu, phi)| {
            connected_set_indexed(m, mu, &phi.rotations)
                .expect("rotations at a stable matching are disjoint")
                .into_iter()
                .map(|(_, x)| x)
                .collect()
        })
        .collect();
    let ctx = Context {
        m,
        x_f: incidence_vector(
            m,
            &crate::stability::deferred_acceptance(m, crate::model::Side::Firms),
        ),
        x_w: incidence_vector(
            m,
            &crate::stability::deferred_acceptance(m, crate::model::Side::Workers),
        ),
        stable,
        members,
    };
    let cells: Vec<Cell> = (0..samples as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i);
            let mut cell = Cell::default();
            ctx.positive(&mut rng, &mut cell);
            ctx.negative(&mut rng, &mut cell);
            cell
        })
        .collect();
    let mut report = VerifyReport {
        stable_matchings: ctx.stable.len(),
        rotations: ctx.stable.iter().map(|(_, phi)| phi.len()).sum(),
        ..VerifyReport::default()
    };
    for cell in cells {
        report.merge(cell);
    }
    Ok(report)
}

/// Seeded random market: every agent lists each agent of the other side
/// with probability 1/2, in random order; quotas uniform in `1..=qmax`.
pub fn gen_random_market(seed: u64, nf: usize, nw: usize, qmax: usize) -> Market {
    gen_random_market_with_density(seed, nf, nw, qmax, 0.5)
}

/// [`gen_random_market`] with a chosen listing probability; 1.0 gives
/// complete lists.
pub fn gen_random_market_with_density(
    seed: u64,
    nf: usize,
    nw: usize,
    qmax: usize,
    density: f64,
) -> Market {
    assert!(nf >= 1 && nw >= 1 && qmax >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let quota: Vec<usize> = (0..nf).map(|_| rng.gen_range(1..=qmax)).collect();
    let draw = |n: usize, rng: &mut ChaCha8Rng| {
        let mut list: Vec<usize> = (0..n).filter(|_| rng.gen_bool(density)).collect();
        list.shuffle(rng);
        list
    };
    let firm_pref = (0..nf)
        .map(|_| draw(nw, &mut rng).into_iter().map(Worker).collect())
        .collect();
    let worker_pref = (0..nw)
        .map(|_| draw(nf, &mut rng).into_iter().map(Firm).collect())
        .collect();
    Market::new(
        (1..=nf).map(|i| format!("f{i}")).collect(),
        (1..=nw).map(|i| format!("w{i}")).collect(),
        quota,
        firm_pref,
        worker_pref,
    )
    .expect("generated lists are valid")
    .0
}
