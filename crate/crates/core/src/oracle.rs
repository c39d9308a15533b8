//! Exact stability classification of chain representations.
//!
//! A representation of the chain quiver `V_m -> ... -> V_0` splits into
//! interval modules `I[a, b]` (support `b..=a`, identity maps inside). The
//! multiplicities come from ranks of composites by inclusion-exclusion, and
//! the subrepresentations of `I[a, b]` are exactly `I[c, b]` for `b <= c <= a`
//! because the maps point toward vertex 0. Stability of the whole chain is then
//! a finite computation over sink-end sub-intervals.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::linalg::{identity, near_threshold, numerical_rank, zeros, CMat, RankTolerance};
use crate::quiver::Chain;
use crate::stability::{Rational, SlopeValue, StabilityParam};

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("negative multiplicity {mult} for interval [{a},{b}]; rank threshold too loose or too tight")]
    NegativeMultiplicity { a: usize, b: usize, mult: i64 },
    #[error("zero representation")]
    ZeroRepresentation,
    #[error("parameter has {got} entries, chain has {expected} vertices")]
    ParamLength { expected: usize, got: usize },
    #[error("interval [{0},{1}] is not ordered a >= b")]
    BadInterval(usize, usize),
}

/// `r(a, b)` for `m >= a >= b >= 0`: rank of `phi_{b+1} o ... o phi_a : V_a -> V_b`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankTable {
    m: usize,
    ranks: Vec<Vec<usize>>,
    /// Some composite had a singular value within two decades of the cutoff.
    pub near_threshold: bool,
}

impl RankTable {
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn get(&self, a: usize, b: usize) -> usize {
        assert!(a >= b && a <= self.m);
        self.ranks[a][b]
    }

    /// Out-of-range arguments count as zero.
    fn get_ext(&self, a: isize, b: isize) -> i64 {
        if b < 0 || a > self.m as isize || a < b {
            0
        } else {
            self.ranks[a as usize][b as usize] as i64
        }
    }
}

/// Composite map `V_a -> V_b`.
pub fn composite(chain: &Chain, a: usize, b: usize) -> CMat {
    assert!(a >= b);
    let mut acc = identity(chain.dim(a));
    for i in ((b + 1)..=a).rev() {
        acc = chain.phi(i) * acc;
    }
    acc
}

pub fn rank_table(chain: &Chain, tol: RankTolerance) -> RankTable {
    let m = chain.m();
    let mut ranks = vec![vec![0; m + 1]; m + 1];
    let mut near = false;
    for (a, row) in ranks.iter_mut().enumerate() {
        let mut acc = identity(chain.dim(a));
        row[a] = chain.dim(a);
        for b in (0..a).rev() {
            acc = chain.phi(b + 1) * acc;
            row[b] = numerical_rank(&acc, tol);
            near |= near_threshold(&acc, tol);
        }
    }
    RankTable { m, ranks, near_threshold: near }
}

/// Interval `[a, b]` with `a >= b`: support `b..=a`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Interval {
    pub a: usize,
    pub b: usize,
}

impl Interval {
    pub fn new(a: usize, b: usize) -> Result<Interval, OracleError> {
        if a < b {
            return Err(OracleError::BadInterval(a, b));
        }
        Ok(Interval { a, b })
    }

    pub fn contains(&self, i: usize) -> bool {
        self.b <= i && i <= self.a
    }

    pub fn len(&self) -> usize {
        self.a - self.b + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Proper nonzero subrepresentations `I[c, b]`, `b <= c < a`.
    pub fn proper_subs(&self) -> impl Iterator<Item = Interval> + '_ {
        (self.b..self.a).map(move |c| Interval { a: c, b: self.b })
    }
}

impl std::fmt::Display for Interval {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[{},{}]", self.a, self.b)
    }
}

/// Multiset of intervals with positive multiplicities.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Barcode {
    pub m: usize,
    pub bars: BTreeMap<Interval, usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BarRecord {
    pub a: usize,
    pub b: usize,
    pub mult: usize,
}

impl Barcode {
    pub fn records(&self) -> Vec<BarRecord> {
        // descending by a, then b, matching the m..0 file order
        let mut v: Vec<_> = self.bars.iter().map(|(i, &mult)| BarRecord { a: i.a, b: i.b, mult }).collect();
        v.sort_by(|x, y| (y.a, y.b).cmp(&(x.a, x.b)));
        v
    }

    /// `sum over bars containing i of mult`.
    pub fn dim_at(&self, i: usize) -> usize {
        self.bars.iter().filter(|(iv, _)| iv.contains(i)).map(|(_, m)| m).sum()
    }

    pub fn num_summands(&self) -> usize {
        self.bars.values().sum()
    }

    /// Multiset union.
    pub fn merge(&self, other: &Barcode) -> Barcode {
        let mut bars = self.bars.clone();
        for (iv, m) in &other.bars {
            *bars.entry(*iv).or_insert(0) += m;
        }
        Barcode { m: self.m.max(other.m), bars }
    }

    /// The direct sum of interval modules with these multiplicities.
    pub fn canonical_chain(&self) -> Chain {
        let m = self.m;
        let mut dims = vec![0; m + 1];
        let mut summands = Vec::new();
        for (iv, &mult) in &self.bars {
            for _ in 0..mult {
                summands.push(*iv);
                for d in dims.iter_mut().take(iv.a + 1).skip(iv.b) {
                    *d += 1;
                }
            }
        }
        // each summand owns one coordinate per vertex in its support
        let mut offset = vec![0; m + 1];
        let mut coords: Vec<Vec<Option<usize>>> = Vec::new();
        for iv in &summands {
            let mut c = vec![None; m + 1];
            for i in iv.b..=iv.a {
                c[i] = Some(offset[i]);
                offset[i] += 1;
            }
            coords.push(c);
        }
        let maps = (1..=m)
            .map(|i| {
                let mut phi = zeros(dims[i - 1], dims[i]);
                for c in &coords {
                    if let (Some(src), Some(dst)) = (c[i], c[i - 1]) {
                        phi[(dst, src)] = crate::linalg::c(1.0, 0.0);
                    }
                }
                phi
            })
            .collect();
        Chain::new(dims, maps).expect("canonical chain is well-shaped")
    }
}

/// `mult[a, b] = r(a,b) - r(a+1,b) - r(a,b-1) + r(a+1,b-1)`.
pub fn barcode_from_ranks(table: &RankTable) -> Result<Barcode, OracleError> {
    let m = table.m;
    let mut bars = BTreeMap::new();
    for a in 0..=m {
        for b in 0..=a {
            let (ai, bi) = (a as isize, b as isize);
            let mult = table.get_ext(ai, bi) - table.get_ext(ai + 1, bi) - table.get_ext(ai, bi - 1)
                + table.get_ext(ai + 1, bi - 1);
            if mult < 0 {
                return Err(OracleError::NegativeMultiplicity { a, b, mult });
            }
            if mult > 0 {
                bars.insert(Interval { a, b }, mult as usize);
            }
        }
    }
    Ok(Barcode { m, bars })
}

pub fn barcode(chain: &Chain, tol: RankTolerance) -> Result<Barcode, OracleError> {
    barcode_from_ranks(&rank_table(chain, tol))
}

/// `(sum_{i=b}^{a} alpha_i) / (a - b + 1)`.
pub fn interval_slope(iv: Interval, a: &StabilityParam) -> SlopeValue {
    let sum = (iv.b..=iv.a).fold(Rational::zero(), |acc, i| acc + &a.0[i]);
    SlopeValue(sum / Rational::from_integer(BigInt::from(iv.len())))
}

fn check_param(chain: &Chain, a: &StabilityParam) -> Result<(), OracleError> {
    if a.len() != chain.m() + 1 {
        return Err(OracleError::ParamLength { expected: chain.m() + 1, got: a.len() });
    }
    Ok(())
}

/// Degree-zero slope of a barcode: `sum alpha_i dim V_i / sum dim V_i`.
pub fn barcode_slope(bc: &Barcode, a: &StabilityParam) -> Result<SlopeValue, OracleError> {
    let (mut num, mut den) = (Rational::zero(), 0usize);
    for i in 0..=bc.m {
        let d = bc.dim_at(i);
        num += &a.0[i] * Rational::from_integer(BigInt::from(d));
        den += d;
    }
    if den == 0 {
        return Err(OracleError::ZeroRepresentation);
    }
    Ok(SlopeValue(num / Rational::from_integer(BigInt::from(den))))
}

/// Largest slope of a subrepresentation: the max over summands `[a, b]` and
/// `b <= c <= a` of `slope([c, b])`.
pub fn mu_max_of(bc: &Barcode, a: &StabilityParam) -> Result<SlopeValue, OracleError> {
    bc.bars
        .keys()
        .flat_map(|iv| (iv.b..=iv.a).map(move |c| interval_slope(Interval { a: c, b: iv.b }, a)))
        .max()
        .ok_or(OracleError::ZeroRepresentation)
}

pub fn mu_max(chain: &Chain, a: &StabilityParam, tol: RankTolerance) -> Result<SlopeValue, OracleError> {
    check_param(chain, a)?;
    mu_max_of(&barcode(chain, tol)?, a)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StabilityKind {
    Stable,
    PolystableNotStable,
    /// Semistable but not polystable.
    StrictlySemistable,
    Unstable,
}

impl StabilityKind {
    pub fn is_polystable(self) -> bool {
        matches!(self, StabilityKind::Stable | StabilityKind::PolystableNotStable)
    }

    pub fn is_semistable(self) -> bool {
        self != StabilityKind::Unstable
    }
}

/// What tipped the verdict, when something did.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    /// A sub-interval of a summand with slope above the whole.
    Destabilizing { summand: Interval, sub: Interval },
    /// A summand whose slope differs from the whole.
    UnequalSummand { summand: Interval },
    /// A proper subobject with slope equal to the whole.
    EqualSlope { summand: Interval, sub: Interval },
    /// Two or more equal-slope stable summands.
    SplitSummands { summands: Vec<Interval> },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StabilityVerdict {
    pub kind: StabilityKind,
    pub witness: Option<Witness>,
    pub slope: SlopeValue,
    pub mu_max: SlopeValue,
    /// Signed distance from the stability boundary: positive on the
    /// semistable side, `-(mu_max - mu)` when unstable, `None` when no
    /// summand has a proper subobject.
    pub margin: Option<Rational>,
    pub barcode: Barcode,
}

fn interval_is_stable(iv: Interval, a: &StabilityParam) -> bool {
    let s = interval_slope(iv, a);
    iv.proper_subs().all(|sub| interval_slope(sub, a) < s)
}

/// Classifies a chain from its barcode.
pub fn classify_barcode(bc: &Barcode, a: &StabilityParam) -> Result<StabilityVerdict, OracleError> {
    let mu = barcode_slope(bc, a)?;
    let mu_max = mu_max_of(bc, a)?;

    let mut margin: Option<Rational> = None;
    let mut equal_slope_sub = None;
    let mut destabilizing = None;
    let mut unequal = None;
    for iv in bc.bars.keys() {
        let s = interval_slope(*iv, a);
        if s != mu && unequal.is_none() {
            unequal = Some(*iv);
        }
        for sub in iv.proper_subs() {
            let ss = interval_slope(sub, a);
            let gap = &s.0 - &ss.0;
            if ss > s && destabilizing.is_none() {
                destabilizing = Some(Witness::Destabilizing { summand: *iv, sub });
            }
            if ss == s && equal_slope_sub.is_none() {
                equal_slope_sub = Some(Witness::EqualSlope { summand: *iv, sub });
            }
            margin = Some(match margin {
                None => gap,
                Some(g) if gap < g => gap,
                Some(g) => g,
            });
        }
    }

    let (kind, witness) = if mu_max > mu {
        let w = destabilizing.or(unequal.map(|summand| Witness::UnequalSummand { summand }));
        margin = Some(&mu.0 - &mu_max.0);
        (StabilityKind::Unstable, w)
    } else if equal_slope_sub.is_some() {
        (StabilityKind::StrictlySemistable, equal_slope_sub)
    } else if bc.num_summands() == 1 {
        debug_assert!(bc.bars.keys().all(|iv| interval_is_stable(*iv, a)));
        (StabilityKind::Stable, None)
    } else {
        let summands = bc
            .bars
            .iter()
            .flat_map(|(iv, &k)| std::iter::repeat_n(*iv, k))
            .collect();
        (StabilityKind::PolystableNotStable, Some(Witness::SplitSummands { summands }))
    };
    Ok(StabilityVerdict { kind, witness, slope: mu, mu_max, margin, barcode: bc.clone() })
}

pub fn classify(chain: &Chain, a: &StabilityParam, tol: RankTolerance) -> Result<StabilityVerdict, OracleError> {
    check_param(chain, a)?;
    if chain.rep().is_zero() {
        return Err(OracleError::ZeroRepresentation);
    }
    classify_barcode(&barcode(chain, tol)?, a)
}
