//! The strong stability condition, the matching `μ_x` read off a fractional
//! point, the peel step and the ordered decomposition into stable matchings.

use std::cmp::Ordering;

use num_traits::{One, Zero};

use crate::model::{
    incidence_vector, Agent, Decomposition, DecompositionTerm, Firm, FractionalMatching, Market,
    Matching, Worker,
};
use crate::polytope::{self, ConstraintReport, PolytopeError};
use crate::rational::Rational;

/// Both factors of the condition at one acceptable pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairCondition {
    pub firm: Firm,
    pub worker: Worker,
    /// `q_f − Σ_{j ⪰_f w} x_{f,j}`
    pub firm_factor: Rational,
    /// `1 − Σ_{i ⪰_w f} x_{i,w}`
    pub worker_factor: Rational,
    pub product: Rational,
}

impl PairCondition {
    pub fn holds(&self) -> bool {
        self.product.is_zero()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StrongStabilityReport {
    /// One entry per acceptable pair, in acceptable-pair order.
    pub pairs: Vec<PairCondition>,
    pub overall: bool,
}

impl StrongStabilityReport {
    pub fn first_violation(&self) -> Option<&PairCondition> {
        self.pairs.iter().find(|p| !p.holds())
    }

    pub fn pair(&self, f: Firm, w: Worker) -> Option<&PairCondition> {
        self.pairs.iter().find(|p| p.firm == f && p.worker == w)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum StrongStabilityError {
    #[error(transparent)]
    Shape(PolytopeError),
    #[error("point is outside the stability polytope")]
    NotStable(ConstraintReport),
}

/// Evaluates the product condition at every acceptable pair. No
/// feasibility requirement; see [`strong_stability_check`].
pub fn condition_factors(m: &Market, x: &FractionalMatching) -> Vec<PairCondition> {
    m.acceptable_pairs()
        .iter()
        .map(|(f, w)| {
            let rank_w = m.firm_rank(f, w).expect("acceptable");
            let firm_load: Rational = m.firm_pref(f)[..=rank_w].iter().map(|j| x.get(f, *j)).sum();
            let rank_f = m.worker_rank(w, f).expect("acceptable");
            let worker_load: Rational = m.worker_pref(w)[..=rank_f]
                .iter()
                .map(|i| x.get(*i, w))
                .sum();
            let firm_factor = Rational::from_integer(m.quota(f).into()) - firm_load;
            let worker_factor = Rational::one() - worker_load;
            let product = &firm_factor * &worker_factor;
            PairCondition {
                firm: f,
                worker: w,
                firm_factor,
                worker_factor,
                product,
            }
        })
        .collect()
}

/// A point is strongly stable when it lies in the stability polytope and
/// every acceptable pair has a zero product. The polytope layer is checked
/// first and reported as an error; the product layer is the report.
pub fn strong_stability_check(
    m: &Market,
    x: &FractionalMatching,
) -> Result<StrongStabilityReport, StrongStabilityError> {
    let scp = polytope::check_scp(m, x).map_err(StrongStabilityError::Shape)?;
    if !scp.is_feasible() {
        return Err(StrongStabilityError::NotStable(scp));
    }
    let pairs = condition_factors(m, x);
    let overall = pairs.iter().all(PairCondition::holds);
    Ok(StrongStabilityReport { pairs, overall })
}

pub fn is_strongly_stable(m: &Market, x: &FractionalMatching) -> bool {
    strong_stability_check(m, x).is_ok_and(|r| r.overall)
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MuError {
    #[error(
        "worker {worker:?} is among the best supported workers of both {first:?} and {second:?}"
    )]
    ContestedWorker {
        worker: Worker,
        first: Firm,
        second: Firm,
    },
    #[error("point has the wrong shape")]
    Shape,
}

/// `μ_x`: every firm takes its `q_f` most-preferred workers inside the
/// support of `x` (all of them when fewer are supported).
pub fn mu_of_x(m: &Market, x: &FractionalMatching) -> Result<Matching, MuError> {
    if x.n_firms() != m.n_firms() || x.n_workers() != m.n_workers() {
        return Err(MuError::Shape);
    }
    let mut owner: Vec<Option<Firm>> = vec![None; m.n_workers()];
    let mut mu = Matching::empty(m.n_firms());
    for f in m.firms() {
        let best = m
            .firm_pref(f)
            .iter()
            .filter(|w| !x.get(f, **w).is_zero())
            .take(m.quota(f));
        for &w in best {
            if let Some(first) = owner[w.0] {
                return Err(MuError::ContestedWorker {
                    worker: w,
                    first,
                    second: f,
                });
            }
            owner[w.0] = Some(f);
            mu.set_mut(f).insert(w);
        }
    }
    Ok(mu)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Peel {
    /// `min{x_{f,w} : (f,w) ∈ μ_x}`
    pub alpha: Rational,
    pub matching: Matching,
    /// `(x − α x^{μ_x}) / (1 − α)`
    pub residual: FractionalMatching,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PeelError {
    #[error("point is already the incidence vector of a stable matching")]
    AlreadyIntegral,
    #[error("point is not strongly stable at {:?}", (.0.firm, .0.worker))]
    NotStronglyStable(PairCondition),
    #[error("point is outside the stability polytope")]
    NotStable(ConstraintReport),
    #[error(transparent)]
    Contested(#[from] MuError),
    #[error("peel invariant broken: {0}")]
    Internal(String),
}

impl From<StrongStabilityError> for PeelError {
    fn from(e: StrongStabilityError) -> Self {
        match e {
            StrongStabilityError::Shape(_) => PeelError::Contested(MuError::Shape),
            StrongStabilityError::NotStable(r) => PeelError::NotStable(r),
        }
    }
}

/// Splits a strongly stable `x` as `α x^{μ_x} + (1 − α) y`.
pub fn peel(m: &Market, x: &FractionalMatching) -> Result<Peel, PeelError> {
    let report = strong_stability_check(m, x)?;
    if let Some(bad) = report.first_violation() {
        return Err(PeelError::NotStronglyStable(bad.clone()));
    }
    peel_unchecked(m, x)
}

fn peel_unchecked(m: &Market, x: &FractionalMatching) -> Result<Peel, PeelError> {
    let matching = mu_of_x(m, x)?;
    let incidence = incidence_vector(m, &matching);
    if &incidence == x {
        return Err(PeelError::AlreadyIntegral);
    }
    let alpha = matching
        .pairs()
        .map(|(f, w)| x.get(f, w).clone())
        .min()
        .ok_or_else(|| PeelError::Internal("empty μ_x for a nonzero point".into()))?;
    if alpha >= Rational::one() {
        return Err(PeelError::Internal("peel weight reached 1".into()));
    }
    let residual = x
        .minus(&incidence.scaled(&alpha))
        .scaled(&(Rational::one() / (Rational::one() - &alpha)));
    Ok(Peel {
        alpha,
        matching,
        residual,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DecomposeError {
    #[error("point is not strongly stable at {:?}", (.0.firm, .0.worker))]
    NotStronglyStable(PairCondition),
    #[error("point is outside the stability polytope")]
    NotStable(ConstraintReport),
    #[error(transparent)]
    Contested(#[from] MuError),
    #[error("decomposition invariant broken: {0}")]
    Internal(String),
}

/// Repeated peeling. Weights compose as `α_1 = α'_1`,
/// `α_2 = (1 − α'_1) α'_2`, ... and the last term takes the remaining mass.
pub fn decompose(m: &Market, x: &FractionalMatching) -> Result<Decomposition, DecomposeError> {
    let report = strong_stability_check(m, x).map_err(|e| match e {
        StrongStabilityError::Shape(_) => DecomposeError::Contested(MuError::Shape),
        StrongStabilityError::NotStable(r) => DecomposeError::NotStable(r),
    })?;
    if let Some(bad) = report.first_violation() {
        return Err(DecomposeError::NotStronglyStable(bad.clone()));
    }
    let bound = x.support().len().max(1);
    let mut terms = Vec::new();
    let mut remaining = Rational::one();
    let mut current = x.clone();
    for step in 0..bound {
        // The first point was checked above; later ones are re-checked
        // because their strong stability is what the peel step promises.
        let peeled = if step == 0 {
            peel_unchecked(m, &current)
        } else {
            peel(m, &current)
        };
        match peeled {
            Ok(p) => {
                terms.push(DecompositionTerm {
                    matching: p.matching,
                    weight: &remaining * &p.alpha,
                });
                remaining *= Rational::one() - &p.alpha;
                current = p.residual;
            }
            Err(PeelError::AlreadyIntegral) => {
                terms.push(DecompositionTerm {
                    matching: mu_of_x(m, &current)?,
                    weight: remaining,
                });
                return Ok(Decomposition { terms });
            }
            Err(PeelError::Contested(e)) => return Err(DecomposeError::Contested(e)),
            Err(e) => {
                return Err(DecomposeError::Internal(format!(
                    "peel step {step} failed: {e}"
                )))
            }
        }
    }
    Err(DecomposeError::Internal(format!(
        "no integral residual after {bound} peel steps"
    )))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Dominance {
    /// Equal prefix sums everywhere.
    WeaklyDominates,
    /// At least as good everywhere, strictly somewhere.
    StronglyDominates,
    /// The reverse of `StronglyDominates`.
    Dominated,
    Incomparable,
}

fn prefix_sums(m: &Market, x: &FractionalMatching, agent: Agent) -> Vec<Rational> {
    let mut acc = Rational::zero();
    let values: Vec<&Rational> = match agent {
        Agent::Firm(f) => m.firm_pref(f).iter().map(|w| x.get(f, *w)).collect(),
        Agent::Worker(w) => m.worker_pref(w).iter().map(|f| x.get(*f, w)).collect(),
    };
    values
        .into_iter()
        .map(|v| {
            acc += v;
            acc.clone()
        })
        .collect()
}

fn classify(orderings: impl IntoIterator<Item = Ordering>) -> Dominance {
    let (mut greater, mut less) = (false, false);
    for o in orderings {
        match o {
            Ordering::Greater => greater = true,
            Ordering::Less => less = true,
            Ordering::Equal => {}
        }
    }
    match (greater, less) {
        (false, false) => Dominance::WeaklyDominates,
        (true, false) => Dominance::StronglyDominates,
        (false, true) => Dominance::Dominated,
        (true, true) => Dominance::Incomparable,
    }
}

/// Compares prefix sums of `x` and `y` along the agent's preference list.
pub fn dominance_compare(
    m: &Market,
    x: &FractionalMatching,
    y: &FractionalMatching,
    agent: Agent,
) -> Dominance {
    let a = prefix_sums(m, x, agent);
    let b = prefix_sums(m, y, agent);
    classify(a.iter().zip(&b).map(|(p, q)| p.cmp(q)))
}

/// [`dominance_compare`] aggregated over every firm.
pub fn firm_dominance(m: &Market, x: &FractionalMatching, y: &FractionalMatching) -> Dominance {
    aggregate(
        m.firms()
            .map(|f| dominance_compare(m, x, y, Agent::Firm(f))),
    )
}

/// [`dominance_compare`] aggregated over every worker.
pub fn worker_dominance(m: &Market, x: &FractionalMatching, y: &FractionalMatching) -> Dominance {
    aggregate(
        m.workers()
            .map(|w| dominance_compare(m, x, y, Agent::Worker(w))),
    )
}

fn aggregate(parts: impl IntoIterator<Item = Dominance>) -> Dominance {
    classify(parts.into_iter().flat_map(|d| match d {
        Dominance::WeaklyDominates => vec![Ordering::Equal],
        Dominance::StronglyDominates => vec![Ordering::Greater],
        Dominance::Dominated => vec![Ordering::Less],
        Dominance::Incomparable => vec![Ordering::Greater, Ordering::Less],
    }))
}

/// `μ ⪰_F μ'` on incidence vectors.
pub fn firms_weakly_prefer(m: &Market, a: &Matching, b: &Matching) -> bool {
    matches!(
        firm_dominance(m, &incidence_vector(m, a), &incidence_vector(m, b)),
        Dominance::WeaklyDominates | Dominance::StronglyDominates
    )
}

/// Every worker column has at most two positive entries, and every firm row
/// has either no fractional entry or exactly two that sum to an integer,
/// with all other entries in {0, 1}.
pub fn check_almost_integral(m: &Market, x: &FractionalMatching) -> bool {
    let columns_ok = m
        .workers()
        .all(|w| m.firms().filter(|f| !x.get(*f, w).is_zero()).count() <= 2);
    let rows_ok = m.firms().all(|f| {
        let row = x.row(f);
        let fractional: Vec<&Rational> = row.iter().filter(|v| !v.is_integer()).collect();
        let others_binary = row
            .iter()
            .filter(|v| v.is_integer())
            .all(|v| v.is_zero() || v.is_one());
        others_binary
            && match fractional.as_slice() {
                [] => true,
                [a, b] => (*a + *b).is_integer(),
                _ => false,
            }
    });
    columns_ok && rows_ok
}
