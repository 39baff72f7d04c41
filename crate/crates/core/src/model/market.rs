use std::collections::HashSet;
use std::fmt;

use crate::model::ModelError;

/// Index of a firm in declaration order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Firm(pub usize);

/// Index of a worker in declaration order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Worker(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Firms,
    Workers,
}

/// Either side of the market, for per-agent queries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Agent {
    Firm(Firm),
    Worker(Worker),
}

/// A list entry dropped because acceptability was one-sided.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrunedPair {
    pub firm: Firm,
    pub worker: Worker,
    /// The side whose list mentioned the other agent.
    pub listed_by: Side,
}

/// A many-to-one market: firms with quotas, workers, and strict preference
/// lists over mutually acceptable partners.
///
/// Firms rank worker sets q-responsively from their individual lists; set
/// rankings are never stored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Market {
    firm_names: Vec<String>,
    worker_names: Vec<String>,
    quota: Vec<usize>,
    firm_pref: Vec<Vec<Worker>>,
    worker_pref: Vec<Vec<Firm>>,
    firm_rank: Vec<Vec<Option<usize>>>,
    worker_rank: Vec<Vec<Option<usize>>>,
}

impl Market {
    /// Validates agents and lists, then prunes every entry that is not
    /// mutually acceptable. The pruned entries are returned alongside.
    pub fn new(
        firm_names: Vec<String>,
        worker_names: Vec<String>,
        quota: Vec<usize>,
        firm_pref: Vec<Vec<Worker>>,
        worker_pref: Vec<Vec<Firm>>,
    ) -> Result<(Market, Vec<PrunedPair>), ModelError> {
        let nf = firm_names.len();
        let nw = worker_names.len();
        let mut seen = HashSet::new();
        for name in firm_names.iter().chain(&worker_names) {
            if !seen.insert(name.as_str()) {
                return Err(ModelError::DuplicateAgent(name.clone()));
            }
        }
        if quota.len() != nf || firm_pref.len() != nf || worker_pref.len() != nw {
            return Err(ModelError::Shape);
        }
        if let Some(f) = quota.iter().position(|&q| q == 0) {
            return Err(ModelError::ZeroQuota(firm_names[f].clone()));
        }
        for (f, list) in firm_pref.iter().enumerate() {
            let mut seen = HashSet::new();
            for w in list {
                if w.0 >= nw {
                    return Err(ModelError::UnknownWorker(w.0));
                }
                if !seen.insert(*w) {
                    return Err(ModelError::DuplicateListEntry {
                        owner: firm_names[f].clone(),
                        entry: worker_names[w.0].clone(),
                    });
                }
            }
        }
        for (w, list) in worker_pref.iter().enumerate() {
            let mut seen = HashSet::new();
            for f in list {
                if f.0 >= nf {
                    return Err(ModelError::UnknownFirm(f.0));
                }
                if !seen.insert(*f) {
                    return Err(ModelError::DuplicateListEntry {
                        owner: worker_names[w].clone(),
                        entry: firm_names[f.0].clone(),
                    });
                }
            }
        }

        let firm_lists: Vec<HashSet<Worker>> = firm_pref
            .iter()
            .map(|l| l.iter().copied().collect())
            .collect();
        let worker_lists: Vec<HashSet<Firm>> = worker_pref
            .iter()
            .map(|l| l.iter().copied().collect())
            .collect();

        let mut pruned = Vec::new();
        let firm_pref: Vec<Vec<Worker>> = firm_pref
            .into_iter()
            .enumerate()
            .map(|(f, list)| {
                list.into_iter()
                    .filter(|w| {
                        let keep = worker_lists[w.0].contains(&Firm(f));
                        if !keep {
                            pruned.push(PrunedPair {
                                firm: Firm(f),
                                worker: *w,
                                listed_by: Side::Firms,
                            });
                        }
                        keep
                    })
                    .collect()
            })
            .collect();
        let worker_pref: Vec<Vec<Firm>> = worker_pref
            .into_iter()
            .enumerate()
            .map(|(w, list)| {
                list.into_iter()
                    .filter(|f| {
                        let keep = firm_lists[f.0].contains(&Worker(w));
                        if !keep {
                            pruned.push(PrunedPair {
                                firm: *f,
                                worker: Worker(w),
                                listed_by: Side::Workers,
                            });
                        }
                        keep
                    })
                    .collect()
            })
            .collect();
        for p in &pruned {
            log::warn!(
                "dropping one-sided acceptability ({}, {})",
                firm_names[p.firm.0],
                worker_names[p.worker.0]
            );
        }

        let mut firm_rank = vec![vec![None; nw]; nf];
        for (f, list) in firm_pref.iter().enumerate() {
            for (r, w) in list.iter().enumerate() {
                firm_rank[f][w.0] = Some(r);
            }
        }
        let mut worker_rank = vec![vec![None; nf]; nw];
        for (w, list) in worker_pref.iter().enumerate() {
            for (r, f) in list.iter().enumerate() {
                worker_rank[w][f.0] = Some(r);
            }
        }

        Ok((
            Market {
                firm_names,
                worker_names,
                quota,
                firm_pref,
                worker_pref,
                firm_rank,
                worker_rank,
            },
            pruned,
        ))
    }

    /// Same agents and quotas, new preference lists (pruned to mutual
    /// acceptability without reporting).
    pub fn with_lists(
        &self,
        firm_pref: Vec<Vec<Worker>>,
        worker_pref: Vec<Vec<Firm>>,
    ) -> Result<Market, ModelError> {
        Market::new(
            self.firm_names.clone(),
            self.worker_names.clone(),
            self.quota.clone(),
            firm_pref,
            worker_pref,
        )
        .map(|(m, _)| m)
    }

    pub fn n_firms(&self) -> usize {
        self.firm_names.len()
    }

    pub fn n_workers(&self) -> usize {
        self.worker_names.len()
    }

    pub fn firms(&self) -> impl Iterator<Item = Firm> + Clone {
        (0..self.n_firms()).map(Firm)
    }

    pub fn workers(&self) -> impl Iterator<Item = Worker> + Clone {
        (0..self.n_workers()).map(Worker)
    }

    pub fn quota(&self, f: Firm) -> usize {
        self.quota[f.0]
    }

    pub fn quotas(&self) -> &[usize] {
        &self.quota
    }

    /// Most-preferred first.
    pub fn firm_pref(&self, f: Firm) -> &[Worker] {
        &self.firm_pref[f.0]
    }

    /// Most-preferred first.
    pub fn worker_pref(&self, w: Worker) -> &[Firm] {
        &self.worker_pref[w.0]
    }

    pub fn firm_rank(&self, f: Firm, w: Worker) -> Option<usize> {
        self.firm_rank[f.0][w.0]
    }

    pub fn worker_rank(&self, w: Worker, f: Firm) -> Option<usize> {
        self.worker_rank[w.0][f.0]
    }

    pub fn is_acceptable(&self, f: Firm, w: Worker) -> bool {
        self.firm_rank[f.0][w.0].is_some()
    }

    /// `a ≻_f b` over acceptable workers; acceptable beats unacceptable.
    pub fn firm_prefers(&self, f: Firm, a: Worker, b: Worker) -> bool {
        match (self.firm_rank(f, a), self.firm_rank(f, b)) {
            (Some(ra), Some(rb)) => ra < rb,
            (Some(_), None) => true,
            _ => false,
        }
    }

    /// `a ≻_w b`, where `None` stands for staying unmatched.
    pub fn worker_prefers(&self, w: Worker, a: Option<Firm>, b: Option<Firm>) -> bool {
        let rank = |f: Option<Firm>| f.and_then(|f| self.worker_rank(w, f));
        match (rank(a), rank(b)) {
            (Some(ra), Some(rb)) => ra < rb,
            (Some(_), None) => true,
            _ => false,
        }
    }

    pub fn firm_name(&self, f: Firm) -> &str {
        &self.firm_names[f.0]
    }

    pub fn worker_name(&self, w: Worker) -> &str {
        &self.worker_names[w.0]
    }

    pub fn firm_names(&self) -> &[String] {
        &self.firm_names
    }

    pub fn worker_names(&self) -> &[String] {
        &self.worker_names
    }

    pub fn firm_by_name(&self, name: &str) -> Option<Firm> {
        self.firm_names.iter().position(|n| n == name).map(Firm)
    }

    pub fn worker_by_name(&self, name: &str) -> Option<Worker> {
        self.worker_names.iter().position(|n| n == name).map(Worker)
    }

    pub fn acceptable_pairs(&self) -> AcceptablePairSet {
        acceptable_pairs(self)
    }

    pub fn agent_name(&self, agent: Agent) -> &str {
        match agent {
            Agent::Firm(f) => self.firm_name(f),
            Agent::Worker(w) => self.worker_name(w),
        }
    }
}

/// Mutually acceptable pairs, ordered by firm then worker declaration order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AcceptablePairSet {
    pairs: Vec<(Firm, Worker)>,
}

impl AcceptablePairSet {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn contains(&self, f: Firm, w: Worker) -> bool {
        self.pairs.binary_search(&(f, w)).is_ok()
    }

    /// Position of the pair in the canonical order, used as a coordinate.
    pub fn index_of(&self, f: Firm, w: Worker) -> Option<usize> {
        self.pairs.binary_search(&(f, w)).ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Firm, Worker)> + '_ {
        self.pairs.iter().copied()
    }

    pub fn as_slice(&self) -> &[(Firm, Worker)] {
        &self.pairs
    }
}

pub fn acceptable_pairs(m: &Market) -> AcceptablePairSet {
    let mut pairs = Vec::new();
    for f in m.firms() {
        for w in m.workers() {
            if m.firm_rank(f, w).is_some() && m.worker_rank(w, f).is_some() {
                pairs.push((f, w));
            }
        }
    }
    AcceptablePairSet { pairs }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Side::Firms => f.write_str("firms"),
            Side::Workers => f.write_str("workers"),
        }
    }
}
