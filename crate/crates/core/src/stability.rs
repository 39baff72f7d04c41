//! Deferred acceptance, blocking pairs, and the brute-force enumerator of
//! all stable matchings that serves as ground truth for everything else.

use std::collections::{BTreeSet, VecDeque};

use crate::model::{Firm, Market, Matching, Side, Worker};

/// Default bound on candidate worker→firm maps for brute force.
pub const DEFAULT_ENUMERATION_CAP: u128 = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BlockingReason {
    /// The firm is full and prefers the worker to one of its employees.
    PreferredSwap,
    /// The firm has a free position and finds the worker acceptable.
    Vacancy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BlockingPair {
    pub firm: Firm,
    pub worker: Worker,
    pub reason: BlockingReason,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EnumerationError {
    #[error("{candidates} candidate assignments exceed the enumeration cap of {cap}")]
    CapExceeded { candidates: u128, cap: u128 },
}

/// Gale–Shapley with quotas. `Side::Firms` yields the firm-optimal stable
/// matching, `Side::Workers` the worker-optimal one.
pub fn deferred_acceptance(m: &Market, side: Side) -> Matching {
    match side {
        Side::Firms => firms_propose(m),
        Side::Workers => workers_propose(m),
    }
}

fn firms_propose(m: &Market) -> Matching {
    let mut next = vec![0usize; m.n_firms()];
    let mut held: Vec<Option<Firm>> = vec![None; m.n_workers()];
    let mut load = vec![0usize; m.n_firms()];
    let mut active: VecDeque<Firm> = m.firms().collect();
    while let Some(f) = active.pop_front() {
        let list = m.firm_pref(f);
        while load[f.0] < m.quota(f) && next[f.0] < list.len() {
            let w = list[next[f.0]];
            next[f.0] += 1;
            match held[w.0] {
                None => {
                    held[w.0] = Some(f);
                    load[f.0] += 1;
                }
                Some(g) if m.worker_prefers(w, Some(f), Some(g)) => {
                    held[w.0] = Some(f);
                    load[f.0] += 1;
                    load[g.0] -= 1;
                    active.push_back(g);
                }
                Some(_) => {}
            }
        }
    }
    let mut mu = Matching::empty(m.n_firms());
    for (w, f) in held.iter().enumerate() {
        if let Some(f) = f {
            mu.set_mut(*f).insert(Worker(w));
        }
    }
    mu
}

fn workers_propose(m: &Market) -> Matching {
    let mut next = vec![0usize; m.n_workers()];
    let mut mu = Matching::empty(m.n_firms());
    let mut free: VecDeque<Worker> = m.workers().collect();
    while let Some(w) = free.pop_front() {
        let list = m.worker_pref(w);
        let Some(&f) = list.get(next[w.0]) else {
            continue;
        };
        next[w.0] += 1;
        let set = mu.set_mut(f);
        set.insert(w);
        if set.len() > m.quota(f) {
            let worst = *set
                .iter()
                .max_by_key(|v| m.firm_rank(f, **v))
                .expect("nonempty");
            set.remove(&worst);
            free.push_back(worst);
        }
    }
    mu
}

/// Every matched pair is mutually acceptable and no quota is exceeded.
pub fn is_individually_rational(m: &Market, mu: &Matching) -> bool {
    mu.n_firms() == m.n_firms()
        && m.firms().all(|f| mu.workers_of(f).len() <= m.quota(f))
        && mu.pairs().all(|(f, w)| m.is_acceptable(f, w))
}

/// All pairs blocking `mu`, in acceptable-pair order.
pub fn blocking_pairs(m: &Market, mu: &Matching) -> Vec<BlockingPair> {
    let partners = mu.partners(m.n_workers());
    let mut out = Vec::new();
    for (f, w) in m.acceptable_pairs().iter() {
        if partners[w.0] == Some(f) || !m.worker_prefers(w, Some(f), partners[w.0]) {
            continue;
        }
        let held = mu.workers_of(f);
        if held.len() < m.quota(f) {
            out.push(BlockingPair {
                firm: f,
                worker: w,
                reason: BlockingReason::Vacancy,
            });
        } else if held.iter().any(|v| m.firm_prefers(f, w, *v)) {
            out.push(BlockingPair {
                firm: f,
                worker: w,
                reason: BlockingReason::PreferredSwap,
            });
        }
    }
    out
}

pub fn is_stable(m: &Market, mu: &Matching) -> bool {
    is_individually_rational(m, mu) && blocking_pairs(m, mu).is_empty()
}

/// Number of worker→(acceptable firm or unmatched) maps.
pub fn candidate_count(m: &Market) -> u128 {
    m.workers()
        .map(|w| m.worker_pref(w).len() as u128 + 1)
        .fold(1u128, |acc, k| acc.saturating_mul(k))
}

/// All individually rational matchings, by backtracking over workers.
pub fn enumerate_matchings(m: &Market, cap: u128) -> Result<Vec<Matching>, EnumerationError> {
    let candidates = candidate_count(m);
    if candidates > cap {
        return Err(EnumerationError::CapExceeded { candidates, cap });
    }
    let mut out = Vec::new();
    let mut current = Matching::empty(m.n_firms());
    let mut load = vec![0usize; m.n_firms()];
    extend(m, 0, &mut current, &mut load, &mut out);
    Ok(out)
}

fn extend(
    m: &Market,
    w: usize,
    current: &mut Matching,
    load: &mut [usize],
    out: &mut Vec<Matching>,
) {
    if w == m.n_workers() {
        out.push(current.clone());
        return;
    }
    extend(m, w + 1, current, load, out);
    for &f in m.worker_pref(Worker(w)) {
        if load[f.0] < m.quota(f) {
            load[f.0] += 1;
            current.set_mut(f).insert(Worker(w));
            extend(m, w + 1, current, load, out);
            current.set_mut(f).remove(&Worker(w));
            load[f.0] -= 1;
        }
    }
}

/// `S(P)` by exhaustive search, with the default cap.
pub fn enumerate_stable_bruteforce(m: &Market) -> Result<BTreeSet<Matching>, EnumerationError> {
    enumerate_stable_bruteforce_with_cap(m, DEFAULT_ENUMERATION_CAP)
}

pub fn enumerate_stable_bruteforce_with_cap(
    m: &Market,
    cap: u128,
) -> Result<BTreeSet<Matching>, EnumerationError> {
    Ok(enumerate_matchings(m, cap)?
        .into_iter()
        .filter(|mu| blocking_pairs(m, mu).is_empty())
        .collect())
}

/// Matched agents coincide across `stable`, and a firm that is short of its
/// quota anywhere holds the same set everywhere.
pub fn check_rural_hospital<'a>(
    m: &Market,
    stable: impl IntoIterator<Item = &'a Matching>,
) -> bool {
    let all: Vec<&Matching> = stable.into_iter().collect();
    let Some(first) = all.first() else {
        return true;
    };
    let matched = |mu: &Matching| -> Vec<bool> {
        mu.partners(m.n_workers())
            .iter()
            .map(Option::is_some)
            .collect()
    };
    let reference = matched(first);
    for mu in &all {
        if matched(mu) != reference {
            return false;
        }
        for f in m.firms() {
            if mu.workers_of(f).len() < m.quota(f)
                && all
                    .iter()
                    .any(|other| other.workers_of(f) != mu.workers_of(f))
            {
                return false;
            }
        }
    }
    true
}
