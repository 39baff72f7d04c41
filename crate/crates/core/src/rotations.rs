//! Reduced preference profiles, cycles (rotations) in them, cyclic matchings
//! and connected sets.

use std::collections::BTreeSet;

use rayon::prelude::*;

use crate::model::{Firm, Market, Matching, ModelError, Side, Worker};
use crate::stability::{deferred_acceptance, is_stable};

/// Which matching fixes the top of firm lists and the bottom of worker lists.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum ReductionAnchor {
    /// The matching being reduced at.
    #[default]
    AtMatching,
    /// The global firm-optimal matching, whatever μ is.
    FirmOptimal,
}

/// `P^μ`: lists truncated so that μ is firm-optimal in the reduced market.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReducedProfile {
    pub base: Matching,
    pub market: Market,
}

impl ReducedProfile {
    pub fn firm_list(&self, f: Firm) -> &[Worker] {
        self.market.firm_pref(f)
    }

    pub fn worker_list(&self, w: Worker) -> &[Firm] {
        self.market.worker_pref(w)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RotationError {
    #[error("matching is not stable")]
    NotStable,
    #[error("rotation is not a cycle at this matching")]
    NotACycle,
    #[error("rotations share firm {0:?}")]
    Overlap(Firm),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// A cycle `σ = (e_1, …, e_r)` with `w_{e_d} ∈ μ(e_{d+1})`. Stored rotated
/// so the smallest firm index comes first.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rotation {
    firms: Vec<Firm>,
    workers: Vec<Worker>,
}

impl Rotation {
    /// Builds a canonical rotation from parallel firm and worker sequences.
    pub fn new(firms: Vec<Firm>, workers: Vec<Worker>) -> Self {
        assert_eq!(firms.len(), workers.len());
        let start = firms
            .iter()
            .enumerate()
            .min_by_key(|(_, f)| **f)
            .map_or(0, |(i, _)| i);
        let mut firms = firms;
        let mut workers = workers;
        firms.rotate_left(start);
        workers.rotate_left(start);
        Rotation { firms, workers }
    }

    pub fn firms(&self) -> &[Firm] {
        &self.firms
    }

    pub fn workers(&self) -> &[Worker] {
        &self.workers
    }

    pub fn len(&self) -> usize {
        self.firms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.firms.is_empty()
    }

    pub fn contains(&self, f: Firm) -> bool {
        self.firms.contains(&f)
    }

    /// `(f1 w4, f2 w2)` style: each firm with the worker it gains.
    pub fn describe(&self, m: &Market) -> String {
        let parts: Vec<String> = self
            .firms
            .iter()
            .zip(&self.workers)
            .map(|(f, w)| format!("{} {}", m.firm_name(*f), m.worker_name(*w)))
            .collect();
        format!("({})", parts.join(", "))
    }

    /// Applies the exchange to `mu` without checking that it is a cycle
    /// there.
    pub fn apply_to(&self, mu: &Matching) -> Matching {
        let mut out = mu.clone();
        self.apply_into(&mut out);
        out
    }

    fn apply_into(&self, mu: &mut Matching) {
        let r = self.len();
        for d in 0..r {
            let lost = self.workers[(d + r - 1) % r];
            let set = mu.set_mut(self.firms[d]);
            set.remove(&lost);
            set.insert(self.workers[d]);
        }
    }
}

/// `Φ(μ)`, sorted.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RotationSet {
    pub rotations: Vec<Rotation>,
}

impl RotationSet {
    pub fn len(&self) -> usize {
        self.rotations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rotations.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Rotation> {
        self.rotations.iter()
    }

    pub fn contains(&self, r: &Rotation) -> bool {
        self.rotations.contains(r)
    }
}

/// Reduction at `mu` with the default anchor.
pub fn reduce_profile(m: &Market, mu: &Matching) -> Result<ReducedProfile, RotationError> {
    reduce_profile_anchored(m, mu, ReductionAnchor::AtMatching)
}

pub fn reduce_profile_anchored(
    m: &Market,
    mu: &Matching,
    anchor: ReductionAnchor,
) -> Result<ReducedProfile, RotationError> {
    if mu.n_firms() != m.n_firms() || !is_stable(m, mu) {
        return Err(RotationError::NotStable);
    }
    let top = match anchor {
        ReductionAnchor::AtMatching => mu.clone(),
        ReductionAnchor::FirmOptimal => deferred_acceptance(m, Side::Firms),
    };
    let bottom = deferred_acceptance(m, Side::Workers);
    let top_partner = top.partners(m.n_workers());
    let bottom_partner = bottom.partners(m.n_workers());

    let firm_pref: Vec<Vec<Worker>> = m
        .firms()
        .map(|f| {
            let list = m.firm_pref(f);
            let rank_of = |w: &Worker| m.firm_rank(f, *w).expect("matched pairs are acceptable");
            let (Some(first), Some(last)) = (
                top.workers_of(f).iter().map(rank_of).min(),
                bottom.workers_of(f).iter().map(rank_of).max(),
            ) else {
                return Vec::new();
            };
            if first > last {
                return Vec::new();
            }
            list[first..=last].to_vec()
        })
        .collect();

    let worker_pref: Vec<Vec<Firm>> = m
        .workers()
        .map(|w| {
            let rank_of = |f: Firm| m.worker_rank(w, f).expect("matched pairs are acceptable");
            let (Some(best), Some(worst)) = (bottom_partner[w.0], top_partner[w.0]) else {
                return Vec::new();
            };
            let (first, last) = (rank_of(best), rank_of(worst));
            if first > last {
                return Vec::new();
            }
            m.worker_pref(w)[first..=last].to_vec()
        })
        .collect();

    // Market construction keeps only mutually listed pairs, which is the
    // fixpoint of the acceptability closure.
    let market = m.with_lists(firm_pref, worker_pref)?;
    Ok(ReducedProfile {
        base: mu.clone(),
        market,
    })
}

/// Each full firm points at the firm employing its best reduced-list worker
/// outside `μ(f)`; the cycles of that partial map are the rotations.
pub fn find_cycles(rp: &ReducedProfile) -> RotationSet {
    let m = &rp.market;
    let mu = &rp.base;
    let partner = mu.partners(m.n_workers());
    let step: Vec<Option<(Worker, Firm)>> = m
        .firms()
        .map(|f| {
            if mu.workers_of(f).len() < m.quota(f) {
                return None;
            }
            let w = *rp
                .firm_list(f)
                .iter()
                .find(|w| !mu.workers_of(f).contains(w))?;
            partner[w.0].map(|g| (w, g))
        })
        .collect();

    let n = m.n_firms();
    let mut stamp = vec![usize::MAX; n];
    let mut rotations = Vec::new();
    for start in 0..n {
        if stamp[start] != usize::MAX {
            continue;
        }
        let mut path = Vec::new();
        let mut cur = start;
        while stamp[cur] == usize::MAX {
            stamp[cur] = start;
            path.push(cur);
            match step[cur] {
                Some((_, g)) => cur = g.0,
                None => break,
            }
        }
        if stamp[cur] == start && step[cur].is_some() && path.contains(&cur) {
            let at = path.iter().position(|&p| p == cur).unwrap();
            let cycle = &path[at..];
            if cycle.len() >= 2 {
                let firms = cycle.iter().map(|&i| Firm(i)).collect();
                let workers = cycle.iter().map(|&i| step[i].unwrap().0).collect();
                rotations.push(Rotation::new(firms, workers));
            }
        }
    }
    rotations.sort();
    RotationSet { rotations }
}

/// `Φ(μ)` straight from the market.
pub fn rotations_at(m: &Market, mu: &Matching) -> Result<RotationSet, RotationError> {
    Ok(find_cycles(&reduce_profile(m, mu)?))
}

/// `μ[σ]`; `sigma` must be one of the cycles at `mu`.
pub fn apply_cycle(m: &Market, mu: &Matching, sigma: &Rotation) -> Result<Matching, RotationError> {
    if !rotations_at(m, mu)?.contains(sigma) {
        return Err(RotationError::NotACycle);
    }
    let mut out = mu.clone();
    sigma.apply_into(&mut out);
    Ok(out)
}

/// `μ[K]` for pairwise disjoint `K ⊆ Φ(μ)`.
pub fn apply_cycle_set(
    m: &Market,
    mu: &Matching,
    k: &[Rotation],
) -> Result<Matching, RotationError> {
    let phi = rotations_at(m, mu)?;
    let mut used = BTreeSet::new();
    for sigma in k {
        if !phi.contains(sigma) {
            return Err(RotationError::NotACycle);
        }
        for f in sigma.firms() {
            if !used.insert(*f) {
                return Err(RotationError::Overlap(*f));
            }
        }
    }
    let mut out = mu.clone();
    for sigma in k {
        sigma.apply_into(&mut out);
    }
    Ok(out)
}

/// `μ[K]` for every subset `K ⊆ K'`, indexed by the bitmask of `K` over
/// `kprime`.
pub fn connected_set_indexed(
    m: &Market,
    mu: &Matching,
    kprime: &[Rotation],
) -> Result<Vec<(u64, Matching)>, RotationError> {
    assert!(kprime.len() < 64, "too many rotations for a subset mask");
    // Validates membership and disjointness once for the full set.
    apply_cycle_set(m, mu, kprime)?;
    Ok((0..1u64 << kprime.len())
        .map(|mask| {
            let mut out = mu.clone();
            for (i, sigma) in kprime.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    sigma.apply_into(&mut out);
                }
            }
            (mask, out)
        })
        .collect())
}

/// `M^{K'}_μ = {μ[K] : K ⊆ K'}`.
pub fn connected_set(
    m: &Market,
    mu: &Matching,
    kprime: &[Rotation],
) -> Result<BTreeSet<Matching>, RotationError> {
    Ok(connected_set_indexed(m, mu, kprime)?
        .into_iter()
        .map(|(_, x)| x)
        .collect())
}

/// Breadth-first closure of `{μ_F}` under single cycle applications.
pub fn enumerate_stable_via_rotations(m: &Market) -> BTreeSet<Matching> {
    let start = deferred_acceptance(m, Side::Firms);
    let mut seen = BTreeSet::from([start.clone()]);
    let mut frontier = vec![start];
    while !frontier.is_empty() {
        let next: BTreeSet<Matching> = frontier
            .par_iter()
            .flat_map_iter(|mu| {
                let phi = rotations_at(m, mu).expect("closure only visits stable matchings");
                phi.rotations
                    .into_iter()
                    .map(|sigma| {
                        let mut out = mu.clone();
                        sigma.apply_into(&mut out);
                        out
                    })
                    .collect::<Vec<_>>()
            })
            .collect();
        frontier = next
            .into_iter()
            .filter(|x| seen.insert(x.clone()))
            .collect();
    }
    seen
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::model::parse_market;
    use crate::stability::{blocking_pairs, enumerate_stable_bruteforce};

    fn names(m: &Market, list: &[Worker]) -> Vec<String> {
        list.iter().map(|w| m.worker_name(*w).to_string()).collect()
    }

    fn fnames(m: &Market, list: &[Firm]) -> Vec<String> {
        list.iter().map(|f| m.firm_name(*f).to_string()).collect()
    }

    #[test]
    fn reduction_at_mu_f() {
        let m = fixtures::example_market();
        let rp = reduce_profile(&m, &fixtures::mu_f(&m)).unwrap();
        assert_eq!(names(&m, rp.firm_list(Firm(0))), ["w1", "w2", "w4"]);
        assert_eq!(names(&m, rp.firm_list(Firm(1))), ["w4", "w3", "w2"]);
        assert_eq!(fnames(&m, rp.worker_list(Worker(0))), ["f1"]);
        assert_eq!(fnames(&m, rp.worker_list(Worker(1))), ["f2", "f1"]);
        assert_eq!(fnames(&m, rp.worker_list(Worker(2))), ["f2"]);
        assert_eq!(fnames(&m, rp.worker_list(Worker(3))), ["f1", "f2"]);
        let sub = enumerate_stable_bruteforce(&rp.market).unwrap();
        assert_eq!(
            sub,
            BTreeSet::from([fixtures::mu_f(&m), fixtures::mu_w(&m)])
        );
    }

    #[test]
    fn reduction_at_mu_w_keeps_only_partners() {
        let m = fixtures::example_market();
        let mu_w = fixtures::mu_w(&m);
        let rp = reduce_profile(&m, &mu_w).unwrap();
        for f in m.firms() {
            let listed: BTreeSet<Worker> = rp.firm_list(f).iter().copied().collect();
            assert_eq!(&listed, mu_w.workers_of(f));
        }
        for w in m.workers() {
            assert_eq!(rp.worker_list(w), &[mu_w.partner(w).unwrap()]);
        }
        assert!(find_cycles(&rp).is_empty());
    }

    #[test]
    fn reduction_rejects_unstable() {
        let m = fixtures::example_market();
        let bad =
            Matching::from_names(&m, &[("f1", &["w1", "w3"]), ("f2", &["w2", "w4"])]).unwrap();
        assert_eq!(reduce_profile(&m, &bad), Err(RotationError::NotStable));
    }

    #[test]
    fn single_pair_profile_unchanged() {
        let m = parse_market("firms: f\nworkers: w\nquota: f=1\nfirm f: w\nworker w: f\n").unwrap();
        let mu = deferred_acceptance(&m, Side::Firms);
        let rp = reduce_profile(&m, &mu).unwrap();
        assert_eq!(rp.market, m);
        assert!(find_cycles(&rp).is_empty());
    }

    #[test]
    fn example_rotation() {
        let m = fixtures::example_market();
        let mu_f = fixtures::mu_f(&m);
        let phi = rotations_at(&m, &mu_f).unwrap();
        assert_eq!(phi.len(), 1);
        // (f2 w2, f1 w4) rotated to start at f1.
        let expected = Rotation::new(vec![Firm(1), Firm(0)], vec![Worker(1), Worker(3)]);
        assert_eq!(phi.rotations[0], expected);
        assert_eq!(expected.firms(), &[Firm(0), Firm(1)]);
        assert_eq!(expected.describe(&m), "(f1 w4, f2 w2)");

        let next = apply_cycle(&m, &mu_f, &expected).unwrap();
        assert_eq!(next, fixtures::mu_w(&m));
        assert!(blocking_pairs(&m, &next).is_empty());
        assert_eq!(apply_cycle_set(&m, &mu_f, &[]).unwrap(), mu_f);
        assert_eq!(apply_cycle_set(&m, &mu_f, &phi.rotations).unwrap(), next);
        assert_eq!(
            apply_cycle(&m, &next, &expected),
            Err(RotationError::NotACycle)
        );
    }

    #[test]
    fn connected_sets() {
        let m = fixtures::example_market();
        let mu_f = fixtures::mu_f(&m);
        let phi = rotations_at(&m, &mu_f).unwrap();
        assert_eq!(
            connected_set(&m, &mu_f, &phi.rotations).unwrap(),
            BTreeSet::from([mu_f.clone(), fixtures::mu_w(&m)])
        );
        assert_eq!(
            connected_set(&m, &mu_f, &[]).unwrap(),
            BTreeSet::from([mu_f.clone()])
        );
        let twice = vec![phi.rotations[0].clone(), phi.rotations[0].clone()];
        assert_eq!(
            connected_set(&m, &mu_f, &twice),
            Err(RotationError::Overlap(Firm(0)))
        );
    }

    #[test]
    fn slack_firm_is_in_no_cycle() {
        // f3 has quota 2 but only one acceptable worker.
        let m = parse_market(
            "firms: f1 f2 f3\nworkers: a b c\nquota: f1=1 f2=1 f3=2\n\
             firm f1: a b\nfirm f2: b a\nfirm f3: c\n\
             worker a: f2 f1\nworker b: f1 f2\nworker c: f3\n",
        )
        .unwrap();
        let mu_f = deferred_acceptance(&m, Side::Firms);
        let phi = rotations_at(&m, &mu_f).unwrap();
        assert_eq!(phi.len(), 1);
        assert!(!phi.rotations[0].contains(Firm(2)));
        assert_eq!(enumerate_stable_via_rotations(&m).len(), 2);
    }

    #[test]
    fn two_disjoint_rotations_commute() {
        let text = "firms: f1 f2 f3 f4\nworkers: a b c d\nquota: f1=1 f2=1 f3=1 f4=1\n\
             firm f1: a b\nfirm f2: b a\nfirm f3: c d\nfirm f4: d c\n\
             worker a: f2 f1\nworker b: f1 f2\nworker c: f4 f3\nworker d: f3 f4\n";
        let m = parse_market(text).unwrap();
        let mu_f = deferred_acceptance(&m, Side::Firms);
        let phi = rotations_at(&m, &mu_f).unwrap();
        assert_eq!(phi.len(), 2);
        let (s, t) = (&phi.rotations[0], &phi.rotations[1]);
        let st = apply_cycle(&m, &apply_cycle(&m, &mu_f, s).unwrap(), t).unwrap();
        let ts = apply_cycle(&m, &apply_cycle(&m, &mu_f, t).unwrap(), s).unwrap();
        assert_eq!(st, ts);
        let all = connected_set(&m, &mu_f, &phi.rotations).unwrap();
        assert_eq!(all.len(), 4);
        assert!(all.iter().all(|x| is_stable(&m, x)));
        assert_eq!(
            enumerate_stable_via_rotations(&m),
            enumerate_stable_bruteforce(&m).unwrap()
        );
    }

    #[test]
    fn enumeration_on_example() {
        let m = fixtures::example_market();
        assert_eq!(
            enumerate_stable_via_rotations(&m),
            BTreeSet::from([fixtures::mu_f(&m), fixtures::mu_w(&m)])
        );
    }

    #[test]
    fn literal_anchor_differs_below_the_top() {
        let m = fixtures::example_market();
        let mu_w = fixtures::mu_w(&m);
        let at = reduce_profile(&m, &mu_w).unwrap();
        let literal = reduce_profile_anchored(&m, &mu_w, ReductionAnchor::FirmOptimal).unwrap();
        assert_ne!(at.market, literal.market);
        let at_f = reduce_profile(&m, &fixtures::mu_f(&m)).unwrap();
        let lit_f =
            reduce_profile_anchored(&m, &fixtures::mu_f(&m), ReductionAnchor::FirmOptimal).unwrap();
        assert_eq!(at_f, lit_f);
    }
}
