use std::collections::BTreeSet;

use num_traits::{One, Signed, Zero};

use crate::model::{Firm, Market, Matching, Worker};
use crate::rational::{parse_rational, Rational};

/// Exact |F|×|W| matrix `x_{f,w}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FractionalMatching {
    rows: Vec<Vec<Rational>>,
    n_workers: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FractionalParseError {
    #[error("expected {expected} rows, found {found}")]
    RowCount { expected: usize, found: usize },
    #[error("line {line}: expected {expected} entries, found {found}")]
    ColumnCount {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("line {line}: {source}")]
    Token {
        line: usize,
        source: crate::rational::RationalParseError,
    },
    #[error("negative entry {value} at ({firm}, {worker})")]
    Negative {
        firm: String,
        worker: String,
        value: String,
    },
    #[error("nonzero entry {value} at non-acceptable pair ({firm}, {worker})")]
    Unacceptable {
        firm: String,
        worker: String,
        value: String,
    },
}

impl FractionalMatching {
    pub fn zeros(n_firms: usize, n_workers: usize) -> Self {
        FractionalMatching {
            rows: vec![vec![Rational::zero(); n_workers]; n_firms],
            n_workers,
        }
    }

    /// Panics if the rows are ragged.
    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Self {
        let n_workers = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == n_workers), "ragged rows");
        FractionalMatching { rows, n_workers }
    }

    pub fn n_firms(&self) -> usize {
        self.rows.len()
    }

    pub fn n_workers(&self) -> usize {
        self.n_workers
    }

    pub fn get(&self, f: Firm, w: Worker) -> &Rational {
        &self.rows[f.0][w.0]
    }

    pub fn set(&mut self, f: Firm, w: Worker, value: Rational) {
        self.rows[f.0][w.0] = value;
    }

    pub fn rows(&self) -> &[Vec<Rational>] {
        &self.rows
    }

    pub fn row(&self, f: Firm) -> &[Rational] {
        &self.rows[f.0]
    }

    pub fn row_sum(&self, f: Firm) -> Rational {
        self.rows[f.0].iter().sum()
    }

    pub fn column_sum(&self, w: Worker) -> Rational {
        self.rows.iter().map(|r| &r[w.0]).sum()
    }

    pub fn entries(&self) -> impl Iterator<Item = (Firm, Worker, &Rational)> + '_ {
        self.rows.iter().enumerate().flat_map(|(f, row)| {
            row.iter()
                .enumerate()
                .map(move |(w, v)| (Firm(f), Worker(w), v))
        })
    }

    /// `supp(x) = {(f,w) : x_{f,w} > 0}`.
    pub fn support(&self) -> BTreeSet<(Firm, Worker)> {
        self.entries()
            .filter(|(_, _, v)| v.is_positive())
            .map(|(f, w, _)| (f, w))
            .collect()
    }

    pub fn is_integral(&self) -> bool {
        self.entries().all(|(_, _, v)| v.is_integer())
    }

    pub fn has_same_shape(&self, other: &FractionalMatching) -> bool {
        self.n_firms() == other.n_firms() && self.n_workers == other.n_workers
    }

    /// Interprets a 0/1 matrix as a matching.
    pub fn to_matching(&self) -> Option<Matching> {
        let mut sets = vec![BTreeSet::new(); self.n_firms()];
        for (f, w, v) in self.entries() {
            if v.is_one() {
                sets[f.0].insert(w);
            } else if !v.is_zero() {
                return None;
            }
        }
        Some(Matching::from_sets_unchecked(sets))
    }

    pub fn scaled(&self, factor: &Rational) -> Self {
        FractionalMatching {
            rows: self
                .rows
                .iter()
                .map(|r| r.iter().map(|v| v * factor).collect())
                .collect(),
            n_workers: self.n_workers,
        }
    }

    pub fn plus(&self, other: &FractionalMatching) -> Self {
        assert!(self.has_same_shape(other));
        FractionalMatching {
            rows: self
                .rows
                .iter()
                .zip(&other.rows)
                .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x + y).collect())
                .collect(),
            n_workers: self.n_workers,
        }
    }

    pub fn minus(&self, other: &FractionalMatching) -> Self {
        self.plus(&other.scaled(&-Rational::one()))
    }

    /// `Σ λ_i x_i` over same-shaped points.
    pub fn combination<'a>(
        n_firms: usize,
        n_workers: usize,
        terms: impl IntoIterator<Item = (&'a Rational, &'a FractionalMatching)>,
    ) -> Self {
        terms.into_iter().fold(
            FractionalMatching::zeros(n_firms, n_workers),
            |acc, (l, x)| acc.plus(&x.scaled(l)),
        )
    }

    /// One line per firm, whitespace-separated exact tokens.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        for row in &self.rows {
            let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }
}

/// `x^μ`: 1 exactly on the matched pairs.
pub fn incidence_vector(m: &Market, mu: &Matching) -> FractionalMatching {
    let mut x = FractionalMatching::zeros(m.n_firms(), m.n_workers());
    for (f, w) in mu.pairs() {
        x.set(f, w, Rational::one());
    }
    x
}

/// Parses the fraction file format. Only format, sign and the zero region
/// outside acceptable pairs are checked; polytope membership is not.
pub fn parse_fractional(
    m: &Market,
    text: &str,
) -> Result<FractionalMatching, FractionalParseError> {
    let mut rows = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.len() != m.n_workers() {
            return Err(FractionalParseError::ColumnCount {
                line: idx + 1,
                expected: m.n_workers(),
                found: tokens.len(),
            });
        }
        let row = tokens
            .into_iter()
            .map(|t| {
                parse_rational(t).map_err(|source| FractionalParseError::Token {
                    line: idx + 1,
                    source,
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        rows.push(row);
    }
    if rows.len() != m.n_firms() {
        return Err(FractionalParseError::RowCount {
            expected: m.n_firms(),
            found: rows.len(),
        });
    }
    let x = FractionalMatching {
        rows,
        n_workers: m.n_workers(),
    };
    for (f, w, v) in x.entries() {
        if v.is_negative() {
            return Err(FractionalParseError::Negative {
                firm: m.firm_name(f).to_string(),
                worker: m.worker_name(w).to_string(),
                value: v.to_string(),
            });
        }
        if !v.is_zero() && !m.is_acceptable(f, w) {
            return Err(FractionalParseError::Unacceptable {
                firm: m.firm_name(f).to_string(),
                worker: m.worker_name(w).to_string(),
                value: v.to_string(),
            });
        }
    }
    Ok(x)
}
