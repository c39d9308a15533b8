//! Seeded generators for chains with a known oracle verdict.

use num_bigint::BigInt;
use num_traits::Signed;
use rand::Rng;

use crate::linalg::{identity, inverse, CMat, RankTolerance};
use crate::oracle::{classify, interval_slope, Interval, StabilityKind, StabilityVerdict};
use crate::quiver::{random_matrix, Chain};
use crate::stability::{rat, Rational, StabilityParam};

/// Random rational `p/q` with `|p| <= 20`, `1 <= q <= 6`.
pub fn random_rational(rng: &mut impl Rng) -> Rational {
    rat(rng.random_range(-20..=20), rng.random_range(1..=6))
}

pub fn random_alpha(m: usize, rng: &mut impl Rng) -> StabilityParam {
    StabilityParam((0..=m).map(|_| random_rational(rng)).collect())
}

/// Random alpha, increasing in the vertex index with probability 1/2.
fn biased_alpha(m: usize, rng: &mut impl Rng) -> StabilityParam {
    let mut a = random_alpha(m, rng);
    if rng.random_bool(0.5) {
        a.0.sort();
    }
    a
}

/// Random invertible matrix, well away from singular.
fn random_gl(d: usize, rng: &mut impl Rng) -> (CMat, CMat) {
    loop {
        let g = random_matrix(d, d, rng) + identity(d).scale(0.5);
        let sv = crate::linalg::singular_values(&g);
        if d == 0 || sv[d - 1] > 0.2 * sv[0] {
            let gi = inverse(&g).expect("well conditioned");
            return (g, gi);
        }
    }
}

/// Applies a random change of basis at every vertex.
pub fn scramble(c: &Chain, rng: &mut impl Rng) -> Chain {
    let (g, gi): (Vec<CMat>, Vec<CMat>) = c.dims().iter().map(|&d| random_gl(d, rng)).unzip();
    Chain::from_rep(c.rep().transform(&g, &gi)).expect("change of basis keeps shapes")
}

/// Chain on the interval `[b, a]` with generic nonzero maps.
pub fn interval_chain(iv: Interval, m: usize, rng: &mut impl Rng) -> Chain {
    let dims: Vec<usize> = (0..=m).map(|i| usize::from(iv.contains(i))).collect();
    Chain::random_with(dims, rng)
}

fn random_interval(m: usize, rng: &mut impl Rng) -> Interval {
    let x = rng.random_range(0..=m);
    let y = rng.random_range(0..=m);
    Interval::new(x.max(y), x.min(y)).expect("ordered")
}

fn stable_interval(iv: Interval, a: &StabilityParam) -> bool {
    let s = interval_slope(iv, a);
    iv.proper_subs().all(|sub| interval_slope(sub, a) < s)
}

#[derive(Debug, Clone)]
pub struct Certified {
    pub chain: Chain,
    pub alpha: StabilityParam,
    pub verdict: StabilityVerdict,
}

/// A chain of length `m` certified `alpha`-stable by the oracle.
pub fn certified_stable(m: usize, rng: &mut impl Rng, tol: RankTolerance) -> Certified {
    loop {
        let iv = random_interval(m, rng);
        let alpha = biased_alpha(m, rng);
        if !stable_interval(iv, &alpha) {
            continue;
        }
        let chain = interval_chain(iv, m, rng);
        let Ok(verdict) = classify(&chain, &alpha, tol) else { continue };
        if verdict.kind == StabilityKind::Stable {
            return Certified { chain, alpha, verdict };
        }
    }
}

/// A stable chain of length `m` for a given `alpha`, if one exists among
/// `tries` random intervals.
pub fn certified_stable_for(
    m: usize,
    alpha: &StabilityParam,
    rng: &mut impl Rng,
    tol: RankTolerance,
    tries: usize,
) -> Option<Certified> {
    for _ in 0..tries {
        let iv = random_interval(m, rng);
        if !stable_interval(iv, alpha) {
            continue;
        }
        let chain = interval_chain(iv, m, rng);
        if let Ok(verdict) = classify(&chain, alpha, tol) {
            if verdict.kind == StabilityKind::Stable {
                return Some(Certified { chain, alpha: alpha.clone(), verdict });
            }
        }
    }
    None
}

/// Direct sum of equal-slope stable intervals (1 to 3 summands), with a
/// random change of basis so it is not visibly split.
pub fn certified_polystable(m: usize, rng: &mut impl Rng, tol: RankTolerance) -> Certified {
    loop {
        let base = certified_stable(m, rng, tol);
        let iv = *base.verdict.barcode.bars.keys().next().expect("one bar");
        let s = interval_slope(iv, &base.alpha);
        let extra = rng.random_range(0..=2);
        let mut chain = base.chain.clone();
        for _ in 0..extra {
            let other = if rng.random_bool(0.5) { iv } else { random_interval(m, rng) };
            if interval_slope(other, &base.alpha) != s || !stable_interval(other, &base.alpha) {
                continue;
            }
            chain = chain.direct_sum(&interval_chain(other, m, rng)).expect("same length");
        }
        let chain = scramble(&chain, rng);
        let Ok(verdict) = classify(&chain, &base.alpha, tol) else { continue };
        if verdict.kind.is_polystable() {
            return Certified { chain, alpha: base.alpha, verdict };
        }
    }
}

/// A chain with `m <= max_m`, dims `<= max_dim` and `|margin| >= min_margin`
/// (or no margin at all). Mixes polystable constructions with fully random
/// chains so both verdicts show up.
pub fn certified_with_margin(
    max_m: usize,
    max_dim: usize,
    min_margin: &Rational,
    rng: &mut impl Rng,
    tol: RankTolerance,
) -> Certified {
    loop {
        let m = rng.random_range(1..=max_m);
        let cand = if rng.random_bool(0.5) {
            let c = certified_polystable(m, rng, tol);
            if c.chain.dims().iter().any(|&d| d > max_dim) {
                continue;
            }
            c.chain
        } else {
            let dims: Vec<usize> = (0..=m).map(|_| rng.random_range(0..=max_dim)).collect();
            if dims.iter().all(|&d| d == 0) {
                continue;
            }
            Chain::random_with(dims, rng)
        };
        let alpha = biased_alpha(m, rng);
        let Ok(verdict) = classify(&cand, &alpha, tol) else { continue };
        let ok = match &verdict.margin {
            None => true,
            Some(g) => &g.abs() >= min_margin,
        };
        if ok && verdict.kind != StabilityKind::StrictlySemistable {
            return Certified { chain: cand, alpha, verdict };
        }
    }
}

/// Pair `(C', C'')` of stable chains with independent parameters.
pub fn stable_pair(m: usize, rng: &mut impl Rng, tol: RankTolerance) -> (Certified, Certified) {
    (certified_stable(m, rng, tol), certified_stable(m, rng, tol))
}

/// Pair of polystable chains sharing one parameter with `mu(C'') > mu(C')`.
pub fn polystable_pair_ordered(m: usize, rng: &mut impl Rng, tol: RankTolerance) -> (Certified, Certified) {
    loop {
        let first = certified_polystable(m, rng, tol);
        let alpha = first.alpha.clone();
        let Some(base) = certified_stable_for(m, &alpha, rng, tol, 50) else { continue };
        let mut chain = base.chain.clone();
        if rng.random_bool(0.5) {
            chain = chain.direct_sum(&base.chain).expect("same length");
            chain = scramble(&chain, rng);
        }
        let Ok(verdict) = classify(&chain, &alpha, tol) else { continue };
        let second = Certified { chain, alpha, verdict };
        if second.verdict.slope == first.verdict.slope {
            continue;
        }
        let (lo, hi) = if first.verdict.slope < second.verdict.slope { (first, second) } else { (second, first) };
        return (lo, hi);
    }
}

/// Integer in `[lo, hi]` as a `BigInt`.
pub fn random_bigint(lo: i64, hi: i64, rng: &mut impl Rng) -> BigInt {
    BigInt::from(rng.random_range(lo..=hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn samplers_deliver_their_promises() {
        let tol = RankTolerance::default();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for m in 1..=3 {
            let c = certified_stable(m, &mut rng, tol);
            assert_eq!(c.verdict.kind, StabilityKind::Stable);
            let p = certified_polystable(m, &mut rng, tol);
            assert!(p.verdict.kind.is_polystable());
            let (lo, hi) = polystable_pair_ordered(m, &mut rng, tol);
            assert!(hi.verdict.slope > lo.verdict.slope);
            assert_eq!(lo.alpha, hi.alpha);
        }
        let g = certified_with_margin(3, 3, &rat(1, 10), &mut rng, tol);
        assert!(g.verdict.margin.as_ref().is_none_or(|x| x.abs() >= rat(1, 10)));
    }

    #[test]
    fn scramble_keeps_barcode() {
        let tol = RankTolerance::default();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let c = Chain::random_with(vec![2, 3, 1], &mut rng);
        let s = scramble(&c, &mut rng);
        assert_eq!(crate::oracle::barcode(&c, tol).unwrap(), crate::oracle::barcode(&s, tol).unwrap());
    }
}
