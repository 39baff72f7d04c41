use std::collections::BTreeSet;

use crate::model::{Firm, Market, ModelError, Worker};
use crate::rational::Rational;

/// A matching as firm → worker set. Unmatched workers are the ones absent
/// from every set.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Matching {
    assignment: Vec<BTreeSet<Worker>>,
}

impl Matching {
    pub fn empty(n_firms: usize) -> Self {
        Matching {
            assignment: vec![BTreeSet::new(); n_firms],
        }
    }

    /// Checks quotas and that no worker is assigned twice. Acceptability is
    /// not required here; see `stability::is_individually_rational`.
    pub fn from_sets(m: &Market, assignment: Vec<BTreeSet<Worker>>) -> Result<Self, ModelError> {
        if assignment.len() != m.n_firms() {
            return Err(ModelError::Shape);
        }
        let mut seen = BTreeSet::new();
        for (f, set) in assignment.iter().enumerate() {
            if set.len() > m.quota(Firm(f)) {
                return Err(ModelError::QuotaExceeded(m.firm_name(Firm(f)).to_string()));
            }
            for w in set {
                if w.0 >= m.n_workers() {
                    return Err(ModelError::UnknownWorker(w.0));
                }
                if !seen.insert(*w) {
                    return Err(ModelError::WorkerAssignedTwice(
                        m.worker_name(*w).to_string(),
                    ));
                }
            }
        }
        Ok(Matching { assignment })
    }

    pub fn from_pairs(m: &Market, pairs: &[(Firm, Worker)]) -> Result<Self, ModelError> {
        let mut sets = vec![BTreeSet::new(); m.n_firms()];
        for &(f, w) in pairs {
            if f.0 >= m.n_firms() {
                return Err(ModelError::UnknownFirm(f.0));
            }
            sets[f.0].insert(w);
        }
        Matching::from_sets(m, sets)
    }

    /// Builds from agent names, e.g. `[("f1", &["w1", "w2"])]`.
    pub fn from_names(m: &Market, sets: &[(&str, &[&str])]) -> Result<Self, ModelError> {
        let mut pairs = Vec::new();
        for (f, ws) in sets {
            let f = m
                .firm_by_name(f)
                .ok_or_else(|| ModelError::UnknownName(f.to_string()))?;
            for w in ws.iter() {
                let w = m
                    .worker_by_name(w)
                    .ok_or_else(|| ModelError::UnknownName(w.to_string()))?;
                pairs.push((f, w));
            }
        }
        Matching::from_pairs(m, &pairs)
    }

    pub(crate) fn from_sets_unchecked(assignment: Vec<BTreeSet<Worker>>) -> Self {
        Matching { assignment }
    }

    pub fn n_firms(&self) -> usize {
        self.assignment.len()
    }

    pub fn workers_of(&self, f: Firm) -> &BTreeSet<Worker> {
        &self.assignment[f.0]
    }

    pub fn sets(&self) -> &[BTreeSet<Worker>] {
        &self.assignment
    }

    /// `μ(w)`, or `None` when the worker is unmatched.
    pub fn partner(&self, w: Worker) -> Option<Firm> {
        self.assignment
            .iter()
            .position(|set| set.contains(&w))
            .map(Firm)
    }

    pub fn partners(&self, n_workers: usize) -> Vec<Option<Firm>> {
        let mut out = vec![None; n_workers];
        for (f, set) in self.assignment.iter().enumerate() {
            for w in set {
                out[w.0] = Some(Firm(f));
            }
        }
        out
    }

    pub fn pairs(&self) -> impl Iterator<Item = (Firm, Worker)> + '_ {
        self.assignment
            .iter()
            .enumerate()
            .flat_map(|(f, set)| set.iter().map(move |w| (Firm(f), *w)))
    }

    pub fn size(&self) -> usize {
        self.assignment.iter().map(BTreeSet::len).sum()
    }

    pub(crate) fn set_mut(&mut self, f: Firm) -> &mut BTreeSet<Worker> {
        &mut self.assignment[f.0]
    }

    /// Workers of `f` listed in `f`'s preference order.
    pub fn ranked_workers(&self, m: &Market, f: Firm) -> Vec<Worker> {
        let mut ws: Vec<Worker> = self.assignment[f.0].iter().copied().collect();
        ws.sort_by_key(|w| m.firm_rank(f, *w).unwrap_or(usize::MAX));
        ws
    }

    /// `f1:{w1,w2} f2:{w3,w4}` with workers in the firm's preference order.
    pub fn describe(&self, m: &Market) -> String {
        m.firms()
            .map(|f| {
                let ws: Vec<&str> = self
                    .ranked_workers(m, f)
                    .into_iter()
                    .map(|w| m.worker_name(w))
                    .collect();
                format!("{}:{{{}}}", m.firm_name(f), ws.join(","))
            })
            .collect::<Vec<_>>()
            .join(" ")
    }
}

/// One term `α_l · x^{μ^l}` of a decomposition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecompositionTerm {
    pub matching: Matching,
    pub weight: Rational,
}

/// Ordered convex combination of stable matchings, best for the firms first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decomposition {
    pub terms: Vec<DecompositionTerm>,
}

impl Decomposition {
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn total_weight(&self) -> Rational {
        self.terms.iter().map(|t| t.weight.clone()).sum()
    }

    pub fn reconstruct(&self, m: &Market) -> crate::model::FractionalMatching {
        let mut acc = crate::model::FractionalMatching::zeros(m.n_firms(), m.n_workers());
        for t in &self.terms {
            for (f, w) in t.matching.pairs() {
                let v = acc.get(f, w) + &t.weight;
                acc.set(f, w, v);
            }
        }
        acc
    }
}
