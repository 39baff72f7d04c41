//! The two-firm, four-worker market with a fractional vertex, plus the
//! points used throughout the tests.

use crate::model::{parse_fractional, parse_market, FractionalMatching, Market, Matching};

/// Both firms have quota 2. Worker w4 ranks f1 above f2.
pub const EXAMPLE_MARKET: &str = "\
# two firms, four workers; the stability polytope has a fractional vertex
firms: f1 f2
workers: w1 w2 w3 w4
quota: f1=2 f2=2
firm f1: w1 w2 w3 w4
firm f2: w4 w3 w2 w1
worker w1: f2 f1
worker w2: f2 f1
worker w3: f2 f1
worker w4: f1 f2
";

/// Fractional vertex of the stability polytope that is not strongly stable.
pub const X1_TEXT: &str = "1 1/2 1/2 0\n0 1/2 1/2 1\n";

/// Midpoint of the firm- and worker-optimal stable matchings.
pub const MIDPOINT_TEXT: &str = "1 1/2 0 1/2\n0 1/2 1 1/2\n";

pub fn example_market() -> Market {
    parse_market(EXAMPLE_MARKET).expect("fixture parses")
}

pub fn mu_f(m: &Market) -> Matching {
    Matching::from_names(m, &[("f1", &["w1", "w2"]), ("f2", &["w3", "w4"])]).unwrap()
}

pub fn mu_w(m: &Market) -> Matching {
    Matching::from_names(m, &[("f1", &["w1", "w4"]), ("f2", &["w2", "w3"])]).unwrap()
}

pub fn x1(m: &Market) -> FractionalMatching {
    parse_fractional(m, X1_TEXT).unwrap()
}

pub fn midpoint(m: &Market) -> FractionalMatching {
    parse_fractional(m, MIDPOINT_TEXT).unwrap()
}
