//! Randomized subrepresentation candidates.
//!
//! A candidate is the subrepresentation generated by a few random vectors at a
//! few random vertices: the smallest family of subspaces containing them and
//! closed under every arrow. Dimensions are extracted numerically; slopes are
//! then compared exactly.

use num_bigint::BigInt;
use num_traits::Zero;
use rand::Rng;

use crate::linalg::{column_space, zeros, CMat, RankTolerance};
use crate::quiver::{random_matrix, Representation};
use crate::stability::{Rational, StabilityParam};

/// Closure of the given generators under all arrows.
pub fn generated_subrep(rep: &Representation, generators: &[CMat], tol: RankTolerance) -> Vec<CMat> {
    let q = rep.quiver();
    let mut bases: Vec<CMat> = generators.iter().map(|g| column_space(g, tol)).collect();
    let mut dirty: Vec<bool> = bases.iter().map(|b| b.ncols() > 0).collect();
    while let Some(v) = dirty.iter().position(|&d| d) {
        dirty[v] = false;
        for a in q.outgoing(v) {
            let h = q.arrow(a).head;
            let img = rep.map(a) * &bases[v];
            let mut joined = zeros(rep.dim(h), bases[h].ncols() + img.ncols());
            joined.view_mut((0, 0), bases[h].shape()).copy_from(&bases[h]);
            joined.view_mut((0, bases[h].ncols()), img.shape()).copy_from(&img);
            let nb = column_space(&joined, tol);
            if nb.ncols() > bases[h].ncols() {
                bases[h] = nb;
                dirty[h] = true;
            }
        }
    }
    bases
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Candidate {
    pub dims: Vec<usize>,
    pub slope: Rational,
}

/// Degree-zero slope of a dimension vector.
pub fn dims_slope(dims: &[usize], a: &StabilityParam) -> Option<Rational> {
    let total: usize = dims.iter().sum();
    if total == 0 {
        return None;
    }
    let num = dims
        .iter()
        .zip(&a.0)
        .fold(Rational::zero(), |acc, (d, al)| acc + al * Rational::from_integer(BigInt::from(*d)));
    Some(num / Rational::from_integer(BigInt::from(total)))
}

/// Draws one nonzero proper candidate, or `None` if the draw generated the
/// whole representation.
pub fn random_candidate(
    rep: &Representation,
    a: &StabilityParam,
    tol: RankTolerance,
    rng: &mut impl Rng,
) -> Option<Candidate> {
    let n = rep.quiver().num_vertices();
    let live: Vec<usize> = (0..n).filter(|&v| rep.dim(v) > 0).collect();
    if live.is_empty() {
        return None;
    }
    let count = rng.random_range(1..=live.len().min(3));
    let mut generators: Vec<CMat> = (0..n).map(|v| zeros(rep.dim(v), 0)).collect();
    for _ in 0..count {
        let v = live[rng.random_range(0..live.len())];
        let k = rng.random_range(1..=rep.dim(v));
        let fresh = random_matrix(rep.dim(v), k, rng);
        let old = &generators[v];
        let mut joined = zeros(rep.dim(v), old.ncols() + k);
        joined.view_mut((0, 0), old.shape()).copy_from(old);
        joined.view_mut((0, old.ncols()), fresh.shape()).copy_from(&fresh);
        generators[v] = joined;
    }
    let bases = generated_subrep(rep, &generators, tol);
    let dims: Vec<usize> = bases.iter().map(|b| b.ncols()).collect();
    if dims == rep.dims().0 {
        return None;
    }
    let slope = dims_slope(&dims, a)?;
    Some(Candidate { dims, slope })
}

#[derive(Debug, Clone)]
pub struct SearchSummary {
    pub draws: usize,
    /// Nonzero proper candidates among the draws.
    pub proper: usize,
    pub whole_slope: Rational,
    pub max_slope: Option<Rational>,
    /// `whole_slope - max_slope`; negative means a destabilizing candidate.
    pub worst_margin: Option<Rational>,
    pub violations: usize,
    /// Candidates with slope equal to the whole.
    pub ties: usize,
}

/// Draws `draws` candidates and compares each slope against the whole.
pub fn search(
    rep: &Representation,
    a: &StabilityParam,
    draws: usize,
    tol: RankTolerance,
    rng: &mut impl Rng,
) -> Option<SearchSummary> {
    let whole = dims_slope(&rep.dims().0, a)?;
    let mut max_slope: Option<Rational> = None;
    let (mut proper, mut violations, mut ties) = (0, 0, 0);
    for _ in 0..draws {
        if let Some(c) = random_candidate(rep, a, tol, rng) {
            proper += 1;
            if c.slope > whole {
                violations += 1;
            } else if c.slope == whole {
                ties += 1;
            }
            if max_slope.as_ref().is_none_or(|m| c.slope > *m) {
                max_slope = Some(c.slope);
            }
        }
    }
    let worst_margin = max_slope.as_ref().map(|m| &whole - m);
    Some(SearchSummary { draws, proper, whole_slope: whole, max_slope, worst_margin, violations, ties })
}
