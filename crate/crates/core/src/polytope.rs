//! The feasibility polytope (capacity, unit-column, sign and zero-region
//! constraints) and the stability polytope obtained by adding one
//! stability inequality per acceptable pair.
//!
//! Constraints are evaluated exactly. Variables off the acceptable pairs are
//! fixed to zero and eliminated, so the vertex test works in the
//! `|A(P)|`-dimensional coordinate subspace.

use std::fmt;

use num_traits::{One, Signed, Zero};
use rand::Rng;

use crate::linalg;
use crate::model::{Firm, FractionalMatching, Market, Worker};
use crate::rational::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ConstraintId {
    /// `Σ_j x_{f,j} ≤ q_f`
    FirmCapacity(Firm),
    /// `Σ_i x_{i,w} ≤ 1`
    WorkerCapacity(Worker),
    /// `x_{f,w} ≥ 0`
    NonNegative(Firm, Worker),
    /// `x_{f,w} = 0` off the acceptable pairs
    Unacceptable(Firm, Worker),
    /// `Σ_{j≻_f w} x_{f,j} + q_f Σ_{i≻_w f} x_{i,w} + q_f x_{f,w} ≥ q_f`
    Stability(Firm, Worker),
}

impl ConstraintId {
    /// Constraint family name used in reports.
    pub fn family(&self) -> &'static str {
        match self {
            ConstraintId::FirmCapacity(_) => "firm_capacity",
            ConstraintId::WorkerCapacity(_) => "worker_capacity",
            ConstraintId::NonNegative(..) => "nonnegative",
            ConstraintId::Unacceptable(..) => "unacceptable",
            ConstraintId::Stability(..) => "stability",
        }
    }

    pub fn describe(&self, m: &Market) -> String {
        match *self {
            ConstraintId::FirmCapacity(f) => format!("capacity({})", m.firm_name(f)),
            ConstraintId::WorkerCapacity(w) => format!("capacity({})", m.worker_name(w)),
            ConstraintId::NonNegative(f, w) => {
                format!("nonnegative({},{})", m.firm_name(f), m.worker_name(w))
            }
            ConstraintId::Unacceptable(f, w) => {
                format!("unacceptable({},{})", m.firm_name(f), m.worker_name(w))
            }
            ConstraintId::Stability(f, w) => {
                format!("stability({},{})", m.firm_name(f), m.worker_name(w))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    AtMost,
    AtLeast,
    Equal,
}

impl fmt::Display for Sense {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sense::AtMost => "<=",
            Sense::AtLeast => ">=",
            Sense::Equal => "=",
        })
    }
}

/// `Σ coeff · x_{f,w}  (sense)  rhs`
#[derive(Debug, Clone)]
pub struct LinearConstraint {
    pub id: ConstraintId,
    pub terms: Vec<(Firm, Worker, Rational)>,
    pub sense: Sense,
    pub rhs: Rational,
}

impl LinearConstraint {
    pub fn lhs(&self, x: &FractionalMatching) -> Rational {
        self.terms.iter().map(|(f, w, c)| c * x.get(*f, *w)).sum()
    }

    pub fn holds(&self, lhs: &Rational) -> bool {
        match self.sense {
            Sense::AtMost => lhs <= &self.rhs,
            Sense::AtLeast => lhs >= &self.rhs,
            Sense::Equal => lhs == &self.rhs,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub id: ConstraintId,
    pub sense: Sense,
    pub lhs: Rational,
    pub rhs: Rational,
}

/// Outcome of evaluating a constraint system at a point.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ConstraintReport {
    pub violations: Vec<Violation>,
    /// Inequalities holding with equality. Zero-region identities are not
    /// listed; they hold for every feasible point.
    pub tight: Vec<ConstraintId>,
}

impl ConstraintReport {
    pub fn is_feasible(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn first_violation(&self) -> Option<&Violation> {
        self.violations.first()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PolytopeError {
    #[error("point has shape {found:?}, market needs {expected:?}")]
    Shape {
        expected: (usize, usize),
        found: (usize, usize),
    },
    #[error("point violates {} constraint(s)", .0.violations.len())]
    Infeasible(ConstraintReport),
    #[error("walk direction is unbounded")]
    Unbounded,
}

fn feasibility_constraints(m: &Market) -> Vec<LinearConstraint> {
    let mut out = Vec::new();
    for f in m.firms() {
        out.push(LinearConstraint {
            id: ConstraintId::FirmCapacity(f),
            terms: m.workers().map(|w| (f, w, Rational::one())).collect(),
            sense: Sense::AtMost,
            rhs: Rational::from_integer(m.quota(f).into()),
        });
    }
    for w in m.workers() {
        out.push(LinearConstraint {
            id: ConstraintId::WorkerCapacity(w),
            terms: m.firms().map(|f| (f, w, Rational::one())).collect(),
            sense: Sense::AtMost,
            rhs: Rational::one(),
        });
    }
    for f in m.firms() {
        for w in m.workers() {
            out.push(LinearConstraint {
                id: ConstraintId::NonNegative(f, w),
                terms: vec![(f, w, Rational::one())],
                sense: Sense::AtLeast,
                rhs: Rational::zero(),
            });
        }
    }
    for f in m.firms() {
        for w in m.workers() {
            if !m.is_acceptable(f, w) {
                out.push(LinearConstraint {
                    id: ConstraintId::Unacceptable(f, w),
                    terms: vec![(f, w, Rational::one())],
                    sense: Sense::Equal,
                    rhs: Rational::zero(),
                });
            }
        }
    }
    out
}

fn stability_constraints(m: &Market) -> Vec<LinearConstraint> {
    m.acceptable_pairs()
        .iter()
        .map(|(f, w)| {
            let q = Rational::from_integer(m.quota(f).into());
            let mut terms = Vec::new();
            for &j in m.firm_pref(f).iter().take_while(|&&j| j != w) {
                terms.push((f, j, Rational::one()));
            }
            for &i in m.worker_pref(w).iter().take_while(|&&i| i != f) {
                terms.push((i, w, q.clone()));
            }
            terms.push((f, w, q.clone()));
            LinearConstraint {
                id: ConstraintId::Stability(f, w),
                terms,
                sense: Sense::AtLeast,
                rhs: q,
            }
        })
        .collect()
}

/// All constraints of the stability polytope, feasibility ones first.
pub fn scp_constraints(m: &Market) -> Vec<LinearConstraint> {
    let mut out = feasibility_constraints(m);
    out.extend(stability_constraints(m));
    out
}

fn check_shape(m: &Market, x: &FractionalMatching) -> Result<(), PolytopeError> {
    if x.n_firms() != m.n_firms() || x.n_workers() != m.n_workers() {
        return Err(PolytopeError::Shape {
            expected: (m.n_firms(), m.n_workers()),
            found: (x.n_firms(), x.n_workers()),
        });
    }
    Ok(())
}

fn evaluate(
    m: &Market,
    constraints: &[LinearConstraint],
    x: &FractionalMatching,
) -> ConstraintReport {
    let mut report = ConstraintReport::default();
    for c in constraints {
        let lhs = c.lhs(x);
        if !c.holds(&lhs) {
            report.violations.push(Violation {
                id: c.id,
                sense: c.sense,
                lhs,
                rhs: c.rhs.clone(),
            });
        } else if lhs == c.rhs {
            let listed = match c.id {
                ConstraintId::Unacceptable(..) => false,
                ConstraintId::NonNegative(f, w) => m.is_acceptable(f, w),
                _ => true,
            };
            if listed {
                report.tight.push(c.id);
            }
        }
    }
    report
}

/// Capacity, sign and zero-region constraints.
pub fn check_cp(m: &Market, x: &FractionalMatching) -> Result<ConstraintReport, PolytopeError> {
    check_shape(m, x)?;
    Ok(evaluate(m, &feasibility_constraints(m), x))
}

/// [`check_cp`] plus one stability inequality per acceptable pair.
pub fn check_scp(m: &Market, x: &FractionalMatching) -> Result<ConstraintReport, PolytopeError> {
    check_shape(m, x)?;
    Ok(evaluate(m, &scp_constraints(m), x))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VertexStatus {
    pub is_vertex: bool,
    /// Rank of the tight system.
    pub rank: usize,
    /// Number of free coordinates, `|A(P)|`.
    pub dimension: usize,
}

/// Coefficient rows of `constraints` over acceptable-pair coordinates.
fn coordinate_rows<'a>(
    m: &Market,
    constraints: impl IntoIterator<Item = &'a LinearConstraint>,
) -> Vec<Vec<Rational>> {
    let pairs = m.acceptable_pairs();
    constraints
        .into_iter()
        .map(|c| {
            let mut row = vec![Rational::zero(); pairs.len()];
            for (f, w, coeff) in &c.terms {
                if let Some(k) = pairs.index_of(*f, *w) {
                    row[k] += coeff;
                }
            }
            row
        })
        .collect()
}

fn tight_rows(m: &Market, x: &FractionalMatching) -> Vec<Vec<Rational>> {
    let constraints = scp_constraints(m);
    let tight = constraints
        .iter()
        .filter(|c| !matches!(c.id, ConstraintId::Unacceptable(..)) && c.lhs(x) == c.rhs);
    coordinate_rows(m, tight)
}

/// A feasible point is a vertex iff its tight constraints have full rank
/// over the acceptable-pair coordinates.
pub fn is_extreme_point(m: &Market, x: &FractionalMatching) -> Result<VertexStatus, PolytopeError> {
    let report = check_scp(m, x)?;
    if !report.is_feasible() {
        return Err(PolytopeError::Infeasible(report));
    }
    let dimension = m.acceptable_pairs().len();
    let rank = linalg::rank(&tight_rows(m, x));
    Ok(VertexStatus {
        is_vertex: rank == dimension,
        rank,
        dimension,
    })
}

/// Moves a feasible point to a vertex of the stability polytope.
///
/// Each step picks a random direction in the null space of the tight
/// constraints and walks until a new constraint becomes tight, so the rank
/// of the tight system grows by at least one per step.
pub fn walk_to_vertex<R: Rng + ?Sized>(
    m: &Market,
    x: &FractionalMatching,
    rng: &mut R,
) -> Result<FractionalMatching, PolytopeError> {
    let report = check_scp(m, x)?;
    if !report.is_feasible() {
        return Err(PolytopeError::Infeasible(report));
    }
    let pairs = m.acceptable_pairs();
    let constraints: Vec<LinearConstraint> = scp_constraints(m)
        .into_iter()
        .filter(|c| !matches!(c.id, ConstraintId::Unacceptable(..)))
        .collect();
    let rows = coordinate_rows(m, &constraints);
    let mut point = x.clone();
    for _ in 0..=pairs.len() {
        let lhs: Vec<Rational> = constraints.iter().map(|c| c.lhs(&point)).collect();
        let tight: Vec<Vec<Rational>> = rows
            .iter()
            .zip(constraints.iter().zip(&lhs))
            .filter(|(_, (c, l))| **l == c.rhs)
            .map(|(r, _)| r.clone())
            .collect();
        let basis = linalg::null_space(&tight, pairs.len());
        if basis.is_empty() {
            return Ok(point);
        }
        let mut direction = vec![Rational::zero(); pairs.len()];
        let mut any = false;
        for b in &basis {
            let c: i64 = rng.gen_range(-3..=3);
            if c != 0 {
                any = true;
                for (d, v) in direction.iter_mut().zip(b) {
                    *d += v * Rational::from_integer(c.into());
                }
            }
        }
        if !any {
            direction = basis[0].clone();
        }
        let mut step: Option<Rational> = None;
        for ((row, c), l) in rows.iter().zip(&constraints).zip(&lhs) {
            let rate = linalg::dot(row, &direction);
            let limit = match c.sense {
                Sense::AtMost if rate.is_positive() => Some((&c.rhs - l) / &rate),
                Sense::AtLeast if rate.is_negative() => Some((l - &c.rhs) / -&rate),
                _ => None,
            };
            if let Some(t) = limit {
                if step.as_ref().is_none_or(|s| &t < s) {
                    step = Some(t);
                }
            }
        }
        let step = step.ok_or(PolytopeError::Unbounded)?;
        for (k, (f, w)) in pairs.iter().enumerate() {
            let v = point.get(f, w) + &step * &direction[k];
            point.set(f, w, v);
        }
    }
    unreachable!("tight rank grows every step")
}

/// Moves from a vertex along a random edge to a neighbouring vertex.
///
/// A basis of tight rows is chosen in random order, one basis row is
/// released, and the point moves in the direction that keeps the rest of the
/// basis tight until another constraint blocks. Returns `None` when every
/// release is blocked at once (degenerate vertex).
pub fn step_to_adjacent_vertex<R: Rng + ?Sized>(
    m: &Market,
    v: &FractionalMatching,
    rng: &mut R,
) -> Result<Option<FractionalMatching>, PolytopeError> {
    use rand::seq::SliceRandom;

    let status = is_extreme_point(m, v)?;
    if !status.is_vertex {
        return Ok(None);
    }
    let pairs = m.acceptable_pairs();
    let constraints: Vec<LinearConstraint> = scp_constraints(m)
        .into_iter()
        .filter(|c| !matches!(c.id, ConstraintId::Unacceptable(..)))
        .collect();
    let rows = coordinate_rows(m, &constraints);
    let lhs: Vec<Rational> = constraints.iter().map(|c| c.lhs(v)).collect();
    let mut tight: Vec<usize> = (0..constraints.len())
        .filter(|&i| lhs[i] == constraints[i].rhs)
        .collect();
    tight.shuffle(rng);
    let tight_rows: Vec<Vec<Rational>> = tight.iter().map(|&i| rows[i].clone()).collect();
    let basis: Vec<usize> = linalg::independent_rows(&tight_rows)
        .into_iter()
        .map(|k| tight[k])
        .collect();
    let mut order: Vec<usize> = (0..basis.len()).collect();
    order.shuffle(rng);
    'release: for k in order {
        let rest: Vec<Vec<Rational>> = basis
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != k)
            .map(|(_, &i)| rows[i].clone())
            .collect();
        let Some(mut direction) = linalg::null_space(&rest, pairs.len()).into_iter().next() else {
            continue;
        };
        let released = basis[k];
        let rate = linalg::dot(&rows[released], &direction);
        let flip = match constraints[released].sense {
            Sense::AtMost => rate.is_positive(),
            _ => rate.is_negative(),
        };
        if flip {
            direction.iter_mut().for_each(|d| *d = -d.clone());
        }
        let mut step: Option<Rational> = None;
        for (i, c) in constraints.iter().enumerate() {
            let rate = linalg::dot(&rows[i], &direction);
            let slack = match c.sense {
                Sense::AtMost if rate.is_positive() => Some((&c.rhs - &lhs[i]) / &rate),
                Sense::AtLeast if rate.is_negative() => Some((&lhs[i] - &c.rhs) / -&rate),
                _ => None,
            };
            if let Some(t) = slack {
                if t.is_zero() {
                    continue 'release;
                }
                if step.as_ref().is_none_or(|s| &t < s) {
                    step = Some(t);
                }
            }
        }
        let step = step.ok_or(PolytopeError::Unbounded)?;
        let mut next = v.clone();
        for (k, (f, w)) in pairs.iter().enumerate() {
            let value = next.get(f, w) + &step * &direction[k];
            next.set(f, w, value);
        }
        return walk_to_vertex(m, &next, rng).map(Some);
    }
    Ok(None)
}
