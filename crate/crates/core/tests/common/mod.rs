//! Shared markets and independent oracles for the integration tests.

#![allow(dead_code)]

use std::collections::BTreeSet;

use stablefrac::characterize::{gen_random_market, gen_random_market_with_density};
use stablefrac::fixtures;
use stablefrac::rotations::enumerate_stable_via_rotations;
use stablefrac::{Firm, Market, Matching};

/// Shape of the `i`-th random test market: up to 4 firms, 6 workers, quota 3.
pub fn shape(i: u64) -> (usize, usize, usize) {
    let nf = 2 + (i % 3) as usize;
    let nw = 3 + (i % 4) as usize;
    let qmax = 1 + (i / 3 % 3) as usize;
    (nf, nw, qmax)
}

/// Thirty seeded random markets. Even indices have complete lists, odd
/// indices list each partner with probability 1/2. All but every fifth
/// market are the first seed (from a fixed start) reaching a target number
/// of stable matchings (two to four, else the richest seen), so rotations
/// and hulls are exercised.
pub fn random_markets() -> Vec<Market> {
    (0..30u64)
        .map(|i| {
            let (nf, nw, q) = shape(i);
            let make = |seed: u64| {
                if i % 2 == 0 {
                    gen_random_market_with_density(seed, nf, nw, q, 1.0)
                } else {
                    gen_random_market(seed, nf, nw, q)
                }
            };
            let start = 1000 * (i + 1);
            if i % 5 == 4 {
                return make(start);
            }
            let want = 2 + (i % 3) as usize;
            let mut best = (0, make(start));
            for seed in start..start + 1500 {
                let m = make(seed);
                // Selection only; every test compares against brute force afterwards.
                let n = enumerate_stable_via_rotations(&m).len();
                if n > best.0 {
                    best = (n, m);
                }
                if best.0 >= want {
                    break;
                }
            }
            best.1
        })
        .collect()
}

/// The two-firm example market followed by the random markets.
pub fn test_markets() -> Vec<Market> {
    let mut all = vec![fixtures::example_market()];
    all.extend(random_markets());
    all
}

/// `a(f) ⪰_f b(f)` for every firm, compared as q-responsive sets: after
/// sorting both sets best-first, every position of `a` is at least as good as
/// the same position of `b`, and `a` is no shorter.
pub fn firms_weakly_prefer_sets(m: &Market, a: &Matching, b: &Matching) -> bool {
    m.firms().all(|f| {
        let ra = ranks(m, f, a);
        let rb = ranks(m, f, b);
        ra.len() >= rb.len() && ra.iter().zip(&rb).all(|(x, y)| x <= y)
    })
}

fn ranks(m: &Market, f: Firm, mu: &Matching) -> Vec<usize> {
    let mut r: Vec<usize> = mu
        .workers_of(f)
        .iter()
        .map(|w| m.firm_rank(f, *w).unwrap())
        .collect();
    r.sort();
    r
}

/// The matchings `μ'` in `all` with `μ ⪰_F μ'`.
pub fn below(m: &Market, mu: &Matching, all: &BTreeSet<Matching>) -> BTreeSet<Matching> {
    all.iter()
        .filter(|x| firms_weakly_prefer_sets(m, mu, x))
        .cloned()
        .collect()
}
