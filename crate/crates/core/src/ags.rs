//! Exact bookkeeping for the ker/coker slope bounds of the Hom-complex
//! differential `d` between two chains on a curve of genus `g`.
//!
//! Ranks and degrees of `ker d` and `coker d_i` are inputs; everything else
//! is derived here in exact rationals. Collapsed quiver vertices:
//! the center (parameter `alpha_m`) and off-diagonal `(i, j)` with parameter
//! `alpha_m + alpha_j - alpha_i`, rank `r''_i r'_j` and degree
//! `r''_i deg'_j - r'_j deg''_i`.

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::quiver::{QuiverTypeData, TypeDataError};
use crate::stability::{collapsed_params, format_rational, slope, Rational, StabilityError, StabilityParam};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum AgsError {
    #[error("chain types have lengths {0} and {1}")]
    LengthMismatch(usize, usize),
    #[error("total rank is zero")]
    ZeroRank,
    #[error(transparent)]
    Type(#[from] TypeDataError),
    #[error(transparent)]
    Stability(#[from] StabilityError),
    #[error("expected {expected} cokernel entries (i = 1..m), got {got}")]
    CokernelCount { expected: usize, got: usize },
    #[error("{0} has rank 0 but nonzero degree")]
    DegreeOnZeroRank(String),
    #[error("collapsed slope {collapsed} differs from mu' - mu'' + alpha_m = {direct}")]
    IdentityFailure { collapsed: String, direct: String },
}

fn q(n: impl Into<BigInt>) -> Rational {
    Rational::from_integer(n.into())
}

/// Ranks and degrees of a holomorphic chain, vertex `i` at index `i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SheafChainType(QuiverTypeData);

impl SheafChainType {
    pub fn new(ranks: Vec<usize>, degrees: Vec<BigInt>) -> Result<Self, AgsError> {
        let t = QuiverTypeData::new(ranks, degrees)?;
        if t.total_rank() == 0 {
            return Err(AgsError::ZeroRank);
        }
        Ok(SheafChainType(t))
    }

    pub fn from_ints(ranks: &[usize], degrees: &[i64]) -> Result<Self, AgsError> {
        Self::new(ranks.to_vec(), degrees.iter().map(|&d| BigInt::from(d)).collect())
    }

    pub fn m(&self) -> usize {
        self.0.len() - 1
    }

    pub fn data(&self) -> &QuiverTypeData {
        &self.0
    }

    pub fn slope(&self, a: &StabilityParam) -> Result<Rational, AgsError> {
        Ok(slope(&self.0, a)?.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankDegree {
    pub rank: usize,
    pub degree: BigInt,
}

impl RankDegree {
    pub fn new(rank: usize, degree: i64) -> Self {
        RankDegree { rank, degree: BigInt::from(degree) }
    }

    pub fn slope(&self) -> Option<Rational> {
        (self.rank > 0).then(|| Rational::new(self.degree.clone(), BigInt::from(self.rank)))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LedgerInput {
    pub genus: i64,
    pub alpha: StabilityParam,
    pub c_prime: SheafChainType,
    pub c_dprime: SheafChainType,
    pub ker: RankDegree,
    /// `coker d_i` for `i = 1..=m`, stored at `i - 1`.
    pub coker: Vec<RankDegree>,
}

impl LedgerInput {
    pub fn m(&self) -> usize {
        self.c_prime.m()
    }

    pub fn validate(&self) -> Result<(), AgsError> {
        let (mp, md) = (self.c_prime.m(), self.c_dprime.m());
        if mp != md {
            return Err(AgsError::LengthMismatch(mp + 1, md + 1));
        }
        if self.alpha.len() != mp + 1 {
            return Err(StabilityError::LengthMismatch { expected: mp + 1, got: self.alpha.len() }.into());
        }
        if self.coker.len() != mp {
            return Err(AgsError::CokernelCount { expected: mp, got: self.coker.len() });
        }
        if self.ker.rank == 0 && !self.ker.degree.is_zero() {
            return Err(AgsError::DegreeOnZeroRank("ker d".into()));
        }
        for (k, c) in self.coker.iter().enumerate() {
            if c.rank == 0 && !c.degree.is_zero() {
                return Err(AgsError::DegreeOnZeroRank(format!("coker d_{}", k + 1)));
            }
        }
        Ok(())
    }

    /// Rank and degree of `coker d = ⊕ coker d_i`.
    pub fn coker_total(&self) -> RankDegree {
        RankDegree {
            rank: self.coker.iter().map(|c| c.rank).sum(),
            degree: self.coker.iter().map(|c| c.degree.clone()).sum(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Holds,
    Fails,
    /// Nothing to check (zero rank).
    Vacuous,
}

impl Verdict {
    pub fn from_bool(b: bool) -> Self {
        if b {
            Verdict::Holds
        } else {
            Verdict::Fails
        }
    }

    pub fn ok(self) -> bool {
        self != Verdict::Fails
    }
}

/// One line of a proof trace: `lhs <relation> rhs`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceEntry {
    pub statement: String,
    #[serde(serialize_with = "ser_opt_rat")]
    pub lhs: Option<Rational>,
    #[serde(serialize_with = "ser_opt_rat")]
    pub rhs: Option<Rational>,
    pub verdict: Verdict,
}

fn ser_opt_rat<S: serde::Serializer>(v: &Option<Rational>, s: S) -> Result<S::Ok, S::Error> {
    match v {
        Some(r) => s.serialize_some(&format_rational(r)),
        None => s.serialize_none(),
    }
}

impl TraceEntry {
    fn le(statement: impl Into<String>, lhs: Rational, rhs: Rational) -> Self {
        let verdict = Verdict::from_bool(lhs <= rhs);
        TraceEntry { statement: statement.into(), lhs: Some(lhs), rhs: Some(rhs), verdict }
    }

    fn ge(statement: impl Into<String>, lhs: Rational, rhs: Rational) -> Self {
        let verdict = Verdict::from_bool(lhs >= rhs);
        TraceEntry { statement: statement.into(), lhs: Some(lhs), rhs: Some(rhs), verdict }
    }

    fn eq(statement: impl Into<String>, lhs: Rational, rhs: Rational) -> Self {
        let verdict = Verdict::from_bool(lhs == rhs);
        TraceEntry { statement: statement.into(), lhs: Some(lhs), rhs: Some(rhs), verdict }
    }

    fn vacuous(statement: impl Into<String>) -> Self {
        TraceEntry { statement: statement.into(), lhs: None, rhs: None, verdict: Verdict::Vacuous }
    }

    /// `lhs == rhs`, for spotting boundary (tight) cases.
    pub fn is_tight(&self) -> bool {
        matches!((&self.lhs, &self.rhs), (Some(a), Some(b)) if a == b)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HypothesisReport {
    pub holds: bool,
    /// One entry per `i = 1..=m`: `alpha_i - alpha_{i-1} >= 2g - 2`.
    pub per_index: Vec<TraceEntry>,
    pub warning: Option<String>,
}

pub fn hypothesis_check(a: &StabilityParam, genus: i64) -> HypothesisReport {
    let bound = q(2 * genus - 2);
    let per_index: Vec<TraceEntry> = (1..a.len())
        .map(|i| TraceEntry::ge(format!("alpha_{i} - alpha_{} >= 2g - 2", i - 1), &a.0[i] - &a.0[i - 1], bound.clone()))
        .collect();
    let warning = (genus < 2).then(|| format!("genus {genus} < 2: outside the standing assumption"));
    HypothesisReport { holds: per_index.iter().all(|e| e.verdict.ok()), per_index, warning }
}

/// `mu(ker d) <= mu' - mu''`; vacuous when `ker d = 0`.
pub fn kernel_inequality(mu_prime: &Rational, mu_dprime: &Rational, ker: &RankDegree) -> Verdict {
    match ker.slope() {
        None => Verdict::Vacuous,
        Some(s) => Verdict::from_bool(s <= mu_prime - mu_dprime),
    }
}

/// `mu(coker d) >= mu' - mu'' + 2g - 2`; vacuous when `coker d = 0`.
pub fn cokernel_inequality(mu_prime: &Rational, mu_dprime: &Rational, coker_total: &RankDegree, genus: i64) -> Verdict {
    match coker_total.slope() {
        None => Verdict::Vacuous,
        Some(s) => Verdict::from_bool(s >= mu_prime - mu_dprime + q(2 * genus - 2)),
    }
}

/// A collapsed quiver vertex with its type and parameter.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CollapsedVertex {
    /// `None` for the center.
    pub position: Option<(usize, usize)>,
    pub rank: BigInt,
    pub degree: BigInt,
    pub param: Rational,
}

/// Type of the collapsed Hom-quiver bundle, center first.
pub fn collapsed_type(
    t_prime: &SheafChainType,
    t_dprime: &SheafChainType,
    a: &StabilityParam,
) -> Result<Vec<CollapsedVertex>, AgsError> {
    let m = t_prime.m();
    if t_dprime.m() != m {
        return Err(AgsError::LengthMismatch(m + 1, t_dprime.m() + 1));
    }
    let p = collapsed_params(a, m)?;
    let (tp, td) = (t_prime.data(), t_dprime.data());
    let rank = |i: usize, j: usize| BigInt::from(td.ranks[i] * tp.ranks[j]);
    let degree =
        |i: usize, j: usize| BigInt::from(td.ranks[i]) * &tp.degrees[j] - BigInt::from(tp.ranks[j]) * &td.degrees[i];
    let mut out = vec![CollapsedVertex {
        position: None,
        rank: (0..=m).map(|i| rank(i, i)).sum(),
        degree: (0..=m).map(|i| degree(i, i)).sum(),
        param: p.center.clone(),
    }];
    for ((i, j), par) in &p.off_diagonal {
        out.push(CollapsedVertex { position: Some((*i, *j)), rank: rank(*i, *j), degree: degree(*i, *j), param: par.clone() });
    }
    Ok(out)
}

/// `mu_abar(E-bar)` from the collapsed vertex list, checked against
/// `mu' - mu'' + alpha_m`.
pub fn collapsed_slope_identity(
    t_prime: &SheafChainType,
    t_dprime: &SheafChainType,
    a: &StabilityParam,
) -> Result<Rational, AgsError> {
    let verts = collapsed_type(t_prime, t_dprime, a)?;
    let total: BigInt = verts.iter().map(|v| v.rank.clone()).sum();
    if total.is_zero() {
        return Err(AgsError::ZeroRank);
    }
    let num = verts
        .iter()
        .fold(Rational::zero(), |acc, v| acc + &v.param * q(v.rank.clone()) + q(v.degree.clone()));
    let collapsed = num / q(total);
    let direct = t_prime.slope(a)? - t_dprime.slope(a)? + &a.0[t_prime.m()];
    if collapsed != direct {
        return Err(AgsError::IdentityFailure {
            collapsed: format_rational(&collapsed),
            direct: format_rational(&direct),
        });
    }
    Ok(collapsed)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KernelBound {
    pub trace: Vec<TraceEntry>,
    /// `mu(ker d) + alpha_m <= mu_abar(E-bar)`.
    pub collapsed_form: Verdict,
    /// `mu(ker d) <= mu' - mu''`.
    pub direct_form: Verdict,
    pub agree: bool,
}

pub fn derive_kernel_bound(l: &LedgerInput) -> Result<KernelBound, AgsError> {
    l.validate()?;
    let m = l.m();
    let am = &l.alpha.0[m];
    let mu_p = l.c_prime.slope(&l.alpha)?;
    let mu_d = l.c_dprime.slope(&l.alpha)?;
    let e_bar = collapsed_slope_identity(&l.c_prime, &l.c_dprime, &l.alpha)?;
    let mut trace = vec![TraceEntry::eq("mu_abar(E-bar) = mu'(C') - mu''(C'') + alpha_m", e_bar.clone(), &mu_p - &mu_d + am)];
    let Some(mu_ker) = l.ker.slope() else {
        trace.push(TraceEntry::vacuous("ker d = 0"));
        return Ok(KernelBound { trace, collapsed_form: Verdict::Vacuous, direct_form: Verdict::Vacuous, agree: true });
    };
    // ker d lives at the center only, so its abar-slope picks up alpha_m
    let sub_slope = &mu_ker + am;
    let collapsed = TraceEntry::le("mu(ker d) + alpha_m <= mu_abar(E-bar)", sub_slope, e_bar);
    let direct = TraceEntry::le("mu(ker d) <= mu'(C') - mu''(C'')", mu_ker, &mu_p - &mu_d);
    let (cf, df) = (collapsed.verdict, direct.verdict);
    debug_assert_eq!(df, kernel_inequality(&mu_p, &mu_d, &l.ker));
    trace.push(collapsed);
    trace.push(direct);
    Ok(KernelBound { trace, collapsed_form: cf, direct_form: df, agree: cf == df })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CokernelBound {
    pub trace: Vec<TraceEntry>,
    /// `sum (alpha_i - alpha_{i-1}) rk coker d_i / sum rk coker d_i`.
    #[serde(serialize_with = "ser_opt_rat")]
    pub weighted_average: Option<Rational>,
    /// The abar-slope of the cokernel quotient.
    #[serde(serialize_with = "ser_opt_rat")]
    pub quotient_slope: Option<Rational>,
    /// Step 1: quotient slope `>= mu_abar(E-bar)` iff
    /// `mu(coker d) >= mu' - mu'' + weighted_average`; both sides agree.
    pub step1_agree: bool,
    pub step1: Verdict,
    /// Step 2: `weighted_average >= 2g - 2`.
    pub step2: Verdict,
    /// `mu(coker d) >= mu' - mu'' + 2g - 2`.
    pub conclusion: Verdict,
    /// Step 1 and step 2 together imply the conclusion.
    pub chain_holds: bool,
}

pub fn derive_cokernel_bound(l: &LedgerInput) -> Result<CokernelBound, AgsError> {
    l.validate()?;
    let m = l.m();
    let a = &l.alpha.0;
    let am = &a[m];
    let mu_p = l.c_prime.slope(&l.alpha)?;
    let mu_d = l.c_dprime.slope(&l.alpha)?;
    let e_bar = collapsed_slope_identity(&l.c_prime, &l.c_dprime, &l.alpha)?;
    let total = l.coker_total();
    let Some(mu_coker) = total.slope() else {
        return Ok(CokernelBound {
            trace: vec![TraceEntry::vacuous("coker d = 0")],
            weighted_average: None,
            quotient_slope: None,
            step1_agree: true,
            step1: Verdict::Vacuous,
            step2: Verdict::Vacuous,
            conclusion: Verdict::Vacuous,
            chain_holds: true,
        });
    };
    let params = collapsed_params(&l.alpha, m)?;
    let rank_total = q(total.rank);
    let weighted_average = (1..=m)
        .map(|i| (&a[i] - &a[i - 1]) * q(l.coker[i - 1].rank))
        .fold(Rational::zero(), |x, y| x + y)
        / &rank_total;
    // coker d_i sits at (i, i-1), where abar = alpha_m - (alpha_i - alpha_{i-1})
    let quotient_slope = (1..=m)
        .map(|i| params.at(i, i - 1) * q(l.coker[i - 1].rank) + q(l.coker[i - 1].degree.clone()))
        .fold(Rational::zero(), |x, y| x + y)
        / &rank_total;
    let bound = q(2 * l.genus - 2);
    let gap = &mu_p - &mu_d;

    let mut trace = vec![
        TraceEntry::eq("mu_abar(E-bar) = mu'(C') - mu''(C'') + alpha_m", e_bar.clone(), &gap + am),
        TraceEntry::eq(
            "abar-slope of quotient = mu(coker d) + alpha_m - weighted average",
            quotient_slope.clone(),
            &mu_coker + am - &weighted_average,
        ),
    ];
    let s1_collapsed = TraceEntry::ge("abar-slope of quotient >= mu_abar(E-bar)", quotient_slope.clone(), e_bar);
    let s1_direct =
        TraceEntry::ge("mu(coker d) >= mu'(C') - mu''(C'') + weighted average", mu_coker.clone(), &gap + &weighted_average);
    let step1_agree = s1_collapsed.verdict == s1_direct.verdict;
    let step1 = s1_direct.verdict;
    let s2 = TraceEntry::ge("weighted average >= 2g - 2", weighted_average.clone(), bound.clone());
    let step2 = s2.verdict;
    let concl = TraceEntry::ge("mu(coker d) >= mu'(C') - mu''(C'') + 2g - 2", mu_coker, &gap + &bound);
    let conclusion = concl.verdict;
    debug_assert_eq!(conclusion, cokernel_inequality(&mu_p, &mu_d, &total, l.genus));
    trace.extend([s1_collapsed, s1_direct, s2, concl]);
    let chain_holds = !(step1.ok() && step2.ok()) || conclusion.ok();
    Ok(CokernelBound {
        trace,
        weighted_average: Some(weighted_average),
        quotient_slope: Some(quotient_slope),
        step1_agree,
        step1,
        step2,
        conclusion,
        chain_holds,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LedgerReport {
    pub hypothesis: HypothesisReport,
    #[serde(serialize_with = "ser_rat")]
    pub collapsed_slope: Rational,
    pub kernel: KernelBound,
    pub cokernel: CokernelBound,
}

fn ser_rat<S: serde::Serializer>(v: &Rational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&format_rational(v))
}

impl LedgerReport {
    /// Every derivation step is internally consistent (equivalences agree
    /// and the implication chain holds). Says nothing about whether the
    /// ledger itself satisfies the inequalities.
    pub fn consistent(&self) -> bool {
        self.kernel.agree
            && self.cokernel.step1_agree
            && self.cokernel.chain_holds
            && self.kernel.trace[0].verdict.ok()
            && self.cokernel.trace.iter().take(2).all(|e| e.verdict.ok())
    }
}

pub fn verify_ledger(l: &LedgerInput) -> Result<LedgerReport, AgsError> {
    l.validate()?;
    Ok(LedgerReport {
        hypothesis: hypothesis_check(&l.alpha, l.genus),
        collapsed_slope: collapsed_slope_identity(&l.c_prime, &l.c_dprime, &l.alpha)?,
        kernel: derive_kernel_bound(l)?,
        cokernel: derive_cokernel_bound(l)?,
    })
}

/// `min_i w_i >= 0` weighted average of `values`; `None` if all weights vanish.
pub fn weighted_average(values: &[Rational], weights: &[usize]) -> Option<Rational> {
    let total: usize = weights.iter().sum();
    if total == 0 {
        return None;
    }
    let num = values.iter().zip(weights).fold(Rational::zero(), |acc, (v, w)| acc + v * q(*w));
    Some(num / q(total))
}

/// Whether `x` is a nonnegative rational, for callers assembling ledgers.
pub fn is_nonnegative(x: &Rational) -> bool {
    !x.is_negative()
}
