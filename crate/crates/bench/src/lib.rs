//! Market fixtures shared by the benchmarks.

use stablefrac::characterize::gen_random_market_with_density;
use stablefrac::rotations::enumerate_stable_via_rotations;
use stablefrac::Market;

/// A complete-list market of the given shape with at least `want` stable
/// matchings, scanning seeds upward from `seed`.
pub fn rich_market(seed: u64, nf: usize, nw: usize, qmax: usize, want: usize) -> Market {
    let mut best = (0, gen_random_market_with_density(seed, nf, nw, qmax, 1.0));
    for s in seed..seed + 2000 {
        let m = gen_random_market_with_density(s, nf, nw, qmax, 1.0);
        let n = enumerate_stable_via_rotations(&m).len();
        if n > best.0 {
            best = (n, m);
        }
        if best.0 >= want {
            break;
        }
    }
    best.1
}
