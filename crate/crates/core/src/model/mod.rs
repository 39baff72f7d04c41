//! Market, matchings, fractional matchings and their file formats.

mod fractional;
mod market;
mod matching;
mod parse;

pub use fractional::{
    incidence_vector, parse_fractional, FractionalMatching, FractionalParseError,
};
pub use market::{
    acceptable_pairs, AcceptablePairSet, Agent, Firm, Market, PrunedPair, Side, Worker,
};
pub use matching::{Decomposition, DecompositionTerm, Matching};
pub use parse::{parse_market, parse_market_with_warnings, serialize_market, ParseError};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ModelError {
    #[error("duplicate agent id `{0}`")]
    DuplicateAgent(String),
    #[error("quota of `{0}` must be at least 1")]
    ZeroQuota(String),
    #[error("unknown firm index {0}")]
    UnknownFirm(usize),
    #[error("unknown worker index {0}")]
    UnknownWorker(usize),
    #[error("unknown agent `{0}`")]
    UnknownName(String),
    #[error("`{owner}` lists `{entry}` twice")]
    DuplicateListEntry { owner: String, entry: String },
    #[error("quota of `{0}` exceeded")]
    QuotaExceeded(String),
    #[error("worker `{0}` assigned to two firms")]
    WorkerAssignedTwice(String),
    #[error("inconsistent dimensions")]
    Shape,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::rational::{int, ratio, zero};

    #[test]
    fn example_market_has_eight_acceptable_pairs() {
        let m = fixtures::example_market();
        assert_eq!(m.n_firms(), 2);
        assert_eq!(m.n_workers(), 4);
        assert_eq!(m.quotas(), &[2, 2]);
        assert_eq!(acceptable_pairs(&m).len(), 8);
        let w4 = m.worker_by_name("w4").unwrap();
        let f1 = m.firm_by_name("f1").unwrap();
        assert_eq!(m.worker_pref(w4)[0], f1);
    }

    #[test]
    fn empty_lists_give_no_acceptable_pairs() {
        let m = parse_market("firms: f1 f2\nworkers: w1 w2\nquota: f1=1 f2=3\n").unwrap();
        assert!(acceptable_pairs(&m).is_empty());
    }

    #[test]
    fn one_sided_entries_are_pruned_with_warning() {
        let text = "firms: f1\nworkers: w1 w2\nquota: f1=1\nfirm f1: w1 w2\nworker w2: f1\n";
        let (m, pruned) = parse_market_with_warnings(text).unwrap();
        let pairs = acceptable_pairs(&m);
        assert!(!pairs.contains(Firm(0), Worker(0)));
        assert!(pairs.contains(Firm(0), Worker(1)));
        assert_eq!(m.firm_pref(Firm(0)), &[Worker(1)]);
        assert_eq!(
            pruned,
            vec![PrunedPair {
                firm: Firm(0),
                worker: Worker(0),
                listed_by: Side::Firms
            }]
        );
    }

    #[test]
    fn single_pair_and_disjoint_markets() {
        let m = parse_market("firms: f1\nworkers: w1\nquota: f1=1\nfirm f1: w1\nworker w1: f1\n")
            .unwrap();
        assert_eq!(acceptable_pairs(&m).as_slice(), &[(Firm(0), Worker(0))]);
        let disjoint = "firms: f1 f2\nworkers: w1 w2\nquota: f1=1 f2=1\n\
                        firm f1: w1\nfirm f2: w2\nworker w1: f2\nworker w2: f1\n";
        assert!(acceptable_pairs(&parse_market(disjoint).unwrap()).is_empty());
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let dup = "firms: f1 f1\nworkers: w1\n";
        assert!(matches!(
            parse_market(dup),
            Err(ParseError::DuplicateAgent { line: 1, .. })
        ));
        let unknown = "firms: f1\nworkers: w1\nquota: f1=1\nfirm f1: w9\n";
        assert!(matches!(
            parse_market(unknown),
            Err(ParseError::UnknownAgent { line: 4, .. })
        ));
        let zero_q = "firms: f1\nworkers: w1\n# c\nquota: f1=0\n";
        assert!(matches!(
            parse_market(zero_q),
            Err(ParseError::BadQuota { line: 4, .. })
        ));
        let junk = "firms: f1\nworkers: w1\nquota: f1=1\nhello\n";
        assert!(matches!(
            parse_market(junk),
            Err(ParseError::Syntax { line: 4, .. })
        ));
        let missing = "firms: f1\nworkers: w1\n";
        assert!(matches!(
            parse_market(missing),
            Err(ParseError::MissingQuota(_))
        ));
        let twice = "firms: f1\nworkers: w1 w2\nquota: f1=1\nfirm f1: w1 w1\n";
        assert!(matches!(
            parse_market(twice),
            Err(ParseError::DuplicateEntry { line: 4, .. })
        ));
        let cross = "firms: a\nworkers: a\n";
        assert!(matches!(
            parse_market(cross),
            Err(ParseError::DuplicateAgent { line: 2, .. })
        ));
    }

    #[test]
    fn serialized_market_parses_back() {
        let m = fixtures::example_market();
        assert_eq!(parse_market(&serialize_market(&m)).unwrap(), m);
    }

    #[test]
    fn incidence_vectors_of_example_endpoints() {
        let m = fixtures::example_market();
        let mu_f = fixtures::mu_f(&m);
        let mu_w = fixtures::mu_w(&m);
        let to_rows = |rows: [[i64; 4]; 2]| {
            FractionalMatching::from_rows(
                rows.iter()
                    .map(|r| r.iter().map(|v| int(*v)).collect())
                    .collect(),
            )
        };
        assert_eq!(
            incidence_vector(&m, &mu_f),
            to_rows([[1, 1, 0, 0], [0, 0, 1, 1]])
        );
        assert_eq!(
            incidence_vector(&m, &mu_w),
            to_rows([[1, 0, 0, 1], [0, 1, 1, 0]])
        );
        assert_eq!(
            incidence_vector(&m, &Matching::empty(2)),
            FractionalMatching::zeros(2, 4)
        );
    }

    #[test]
    fn parses_fraction_files() {
        let m = fixtures::example_market();
        let x1 = parse_fractional(&m, fixtures::X1_TEXT).unwrap();
        assert_eq!(x1.get(Firm(0), Worker(1)), &ratio(1, 2));
        assert_eq!(x1.get(Firm(1), Worker(3)), &int(1));
        let zero_text = "0 0 0 0\n0 0 0 0\n";
        assert_eq!(
            parse_fractional(&m, zero_text).unwrap(),
            FractionalMatching::zeros(2, 4)
        );
        let big = parse_fractional(&m, "3/2 0 0 0\n0 0 0 0\n").unwrap();
        assert_eq!(big.get(Firm(0), Worker(0)), &ratio(3, 2));
        assert_eq!(big.get(Firm(0), Worker(1)), &zero());
    }

    #[test]
    fn fraction_file_errors() {
        let m = fixtures::example_market();
        assert!(matches!(
            parse_fractional(&m, "0 0 0\n0 0 0 0\n"),
            Err(FractionalParseError::ColumnCount { line: 1, .. })
        ));
        assert!(matches!(
            parse_fractional(&m, "0 0 0 0\n"),
            Err(FractionalParseError::RowCount { .. })
        ));
        assert!(matches!(
            parse_fractional(&m, "-1/2 0 0 0\n0 0 0 0\n"),
            Err(FractionalParseError::Negative { .. })
        ));
        assert!(matches!(
            parse_fractional(&m, "x 0 0 0\n0 0 0 0\n"),
            Err(FractionalParseError::Token { line: 1, .. })
        ));
        let sparse =
            parse_market("firms: f1\nworkers: w1 w2\nquota: f1=1\nfirm f1: w1\nworker w1: f1\n")
                .unwrap();
        assert!(matches!(
            parse_fractional(&sparse, "0 1/3\n"),
            Err(FractionalParseError::Unacceptable { .. })
        ));
    }

    #[test]
    fn matching_validation() {
        let m = fixtures::example_market();
        assert!(matches!(
            Matching::from_names(&m, &[("f1", &["w1", "w2", "w3"])]),
            Err(ModelError::QuotaExceeded(_))
        ));
        assert!(matches!(
            Matching::from_names(&m, &[("f1", &["w1"]), ("f2", &["w1"])]),
            Err(ModelError::WorkerAssignedTwice(_))
        ));
        let mu = fixtures::mu_w(&m);
        assert_eq!(mu.describe(&m), "f1:{w1,w4} f2:{w3,w2}");
        assert_eq!(mu.partner(Worker(1)), Some(Firm(1)));
    }
}
