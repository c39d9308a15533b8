//! Fixed inputs shared by the benchmarks.

use homquiver::ags::{LedgerInput, RankDegree, SheafChainType};
use homquiver::quiver::rep_type;
use homquiver::stability::alpha_to_tau;
use homquiver::{Chain, StabilityParam};

/// Generic chain with one-dimensional spaces, stable for [`increasing_alpha`].
pub fn line_chain(m: usize, seed: u64) -> Chain {
    Chain::random(vec![1; m + 1], seed)
}

/// `alpha_i = i`.
pub fn increasing_alpha(m: usize) -> StabilityParam {
    StabilityParam::from_ints(&(0..=m as i64).collect::<Vec<_>>())
}

pub fn tau_f64(c: &Chain, a: &StabilityParam) -> Vec<f64> {
    alpha_to_tau(&rep_type(c.rep()), a).expect("tau").to_f64()
}

pub fn random_chain(dims: Vec<usize>, seed: u64) -> Chain {
    Chain::random(dims, seed)
}

pub fn sample_ledger(m: usize) -> LedgerInput {
    let ranks: Vec<usize> = (0..=m).map(|i| 1 + i % 3).collect();
    let degs: Vec<i64> = (0..=m as i64).map(|i| 2 * i - 3).collect();
    LedgerInput {
        genus: 3,
        alpha: StabilityParam::from_ints(&(0..=m as i64).map(|i| 5 * i).collect::<Vec<_>>()),
        c_prime: SheafChainType::from_ints(&ranks, &degs).expect("type"),
        c_dprime: SheafChainType::from_ints(&ranks.iter().rev().copied().collect::<Vec<_>>(), &degs).expect("type"),
        ker: RankDegree::new(1, -4),
        coker: (1..=m).map(|i| RankDegree::new(i, 7 * i as i64)).collect(),
    }
}
