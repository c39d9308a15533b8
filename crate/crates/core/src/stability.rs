//! Exact slope and stability-parameter arithmetic.
//!
//! Everything here is over arbitrary-precision rationals. Parameters are
//! indexed by vertex position; for chains that is the chain index `i`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use crate::quiver::QuiverTypeData;

pub type Rational = BigRational;

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum StabilityError {
    #[error("total rank is zero")]
    ZeroRank,
    #[error("parameter has {got} entries, expected {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("subobject type is trivial (zero or the whole object)")]
    TrivialSub,
    #[error("subobject rank exceeds the ambient rank at vertex {0}")]
    NotASub(usize),
}

/// Stability parameter `alpha`, one rational per vertex.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct StabilityParam(pub Vec<Rational>);

/// Vortex parameter `tau`, one rational per vertex.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TauParam(pub Vec<Rational>);

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SlopeValue(pub Rational);

impl StabilityParam {
    pub fn from_ints(v: &[i64]) -> Self {
        StabilityParam(v.iter().map(|&x| int(x)).collect())
    }

    pub fn zero(n: usize) -> Self {
        StabilityParam(vec![Rational::zero(); n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn translate(&self, c: &Rational) -> Self {
        StabilityParam(self.0.iter().map(|a| a + c).collect())
    }
}

impl TauParam {
    pub fn to_f64(&self) -> Vec<f64> {
        self.0.iter().map(to_f64).collect()
    }
}

impl SlopeValue {
    pub fn to_f64(&self) -> f64 {
        to_f64(&self.0)
    }
}

pub fn to_f64(q: &Rational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

fn check_len(t: &QuiverTypeData, a: &StabilityParam) -> Result<(), StabilityError> {
    if t.len() != a.len() {
        return Err(StabilityError::LengthMismatch { expected: t.len(), got: a.len() });
    }
    Ok(())
}

/// `(sum_i alpha_i rk_i + deg_i) / (sum_i rk_i)`.
pub fn slope(t: &QuiverTypeData, a: &StabilityParam) -> Result<SlopeValue, StabilityError> {
    check_len(t, a)?;
    let total = t.total_rank();
    if total == 0 {
        return Err(StabilityError::ZeroRank);
    }
    let num = t
        .ranks
        .iter()
        .zip(&t.degrees)
        .zip(&a.0)
        .fold(Rational::zero(), |acc, ((r, d), al)| {
            acc + al * Rational::from_integer(BigInt::from(*r)) + Rational::from_integer(d.clone())
        });
    Ok(SlopeValue(num / Rational::from_integer(BigInt::from(total))))
}

/// `tau_i = mu_alpha(E) - alpha_i`.
pub fn alpha_to_tau(t: &QuiverTypeData, a: &StabilityParam) -> Result<TauParam, StabilityError> {
    let mu = slope(t, a)?.0;
    Ok(TauParam(a.0.iter().map(|al| &mu - al).collect()))
}

/// `alpha_i = tau_0 - tau_i`; the result always has `alpha_0 = 0`.
pub fn tau_to_alpha(tau: &TauParam) -> StabilityParam {
    match tau.0.first() {
        None => StabilityParam(Vec::new()),
        Some(t0) => StabilityParam(tau.0.iter().map(|t| t0 - t).collect()),
    }
}

/// Square grid indexed `(i, j)`, `0 <= i, j <= m`, stored row-major in `i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Grid<T> {
    pub m: usize,
    pub values: Vec<T>,
}

impl<T> Grid<T> {
    pub fn from_fn(m: usize, f: impl Fn(usize, usize) -> T) -> Self {
        let mut values = Vec::with_capacity((m + 1) * (m + 1));
        for i in 0..=m {
            for j in 0..=m {
                values.push(f(i, j));
            }
        }
        Grid { m, values }
    }

    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.values[i * (self.m + 1) + j]
    }
}

/// Position of grid vertex `(i, j)` in the extended Hom-quiver.
pub fn grid_index(m: usize, i: usize, j: usize) -> usize {
    i * (m + 1) + j
}

fn check_chain_len(m: usize, a: &[Rational]) -> Result<(), StabilityError> {
    if a.len() != m + 1 {
        return Err(StabilityError::LengthMismatch { expected: m + 1, got: a.len() });
    }
    Ok(())
}

/// `alpha~_ij = alpha''_m + alpha'_j - alpha''_i` on the extended Hom-quiver.
pub fn extended_params(
    a_prime: &StabilityParam,
    a_dprime: &StabilityParam,
    m: usize,
) -> Result<Grid<Rational>, StabilityError> {
    check_chain_len(m, &a_prime.0)?;
    check_chain_len(m, &a_dprime.0)?;
    Ok(Grid::from_fn(m, |i, j| &a_dprime.0[m] + &a_prime.0[j] - &a_dprime.0[i]))
}

/// `tau~_ij = tau'_j - tau''_i`.
pub fn tilde_tau(tau_prime: &TauParam, tau_dprime: &TauParam) -> Result<Grid<Rational>, StabilityError> {
    if tau_prime.0.len() != tau_dprime.0.len() || tau_prime.0.is_empty() {
        return Err(StabilityError::LengthMismatch {
            expected: tau_prime.0.len(),
            got: tau_dprime.0.len(),
        });
    }
    let m = tau_prime.0.len() - 1;
    Ok(Grid::from_fn(m, |i, j| &tau_prime.0[j] - &tau_dprime.0[i]))
}

/// Flattens a grid into a per-vertex parameter in extended Hom-quiver order.
pub fn grid_param(g: &Grid<Rational>) -> StabilityParam {
    StabilityParam(g.values.clone())
}

/// Parameter for the collapsed quiver: `alpha_m` at the center and
/// `alpha_m + alpha_j - alpha_i` at off-diagonal `(i, j)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CollapsedParam {
    pub m: usize,
    pub center: Rational,
    /// Off-diagonal entries `((i, j), value)` in row-major order.
    pub off_diagonal: Vec<((usize, usize), Rational)>,
}

impl CollapsedParam {
    pub fn at(&self, i: usize, j: usize) -> &Rational {
        if i == j {
            return &self.center;
        }
        &self
            .off_diagonal
            .iter()
            .find(|((a, b), _)| *a == i && *b == j)
            .expect("grid index in range")
            .1
    }
}

pub fn collapsed_params(a: &StabilityParam, m: usize) -> Result<CollapsedParam, StabilityError> {
    check_chain_len(m, &a.0)?;
    let am = &a.0[m];
    let mut off_diagonal = Vec::new();
    for i in 0..=m {
        for j in 0..=m {
            if i != j {
                off_diagonal.push(((i, j), am + &a.0[j] - &a.0[i]));
            }
        }
    }
    Ok(CollapsedParam { m, center: am.clone(), off_diagonal })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SemistabilityVerdict {
    pub holds: bool,
    /// `mu(sub) == mu(whole)`: the sub witnesses strict semistability.
    pub equal_slope: bool,
    pub sub_slope: SlopeValue,
    pub whole_slope: SlopeValue,
}

/// Compares `mu_alpha(sub)` against `mu_alpha(whole)`; `strict` asks for `<`.
pub fn semistable_against(
    whole: &QuiverTypeData,
    sub: &QuiverTypeData,
    a: &StabilityParam,
    strict: bool,
) -> Result<SemistabilityVerdict, StabilityError> {
    if whole.len() != sub.len() {
        return Err(StabilityError::LengthMismatch { expected: whole.len(), got: sub.len() });
    }
    if let Some(v) = sub.ranks.iter().zip(&whole.ranks).position(|(s, w)| s > w) {
        return Err(StabilityError::NotASub(v));
    }
    if sub.total_rank() == 0 || sub == whole {
        return Err(StabilityError::TrivialSub);
    }
    let sub_slope = slope(sub, a)?;
    let whole_slope = slope(whole, a)?;
    let holds = if strict { sub_slope < whole_slope } else { sub_slope <= whole_slope };
    Ok(SemistabilityVerdict {
        holds,
        equal_slope: sub_slope == whole_slope,
        sub_slope,
        whole_slope,
    })
}

/// Formats as `p/q` (or `p` for integers).
pub fn format_rational(q: &Rational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
#[error("malformed rational `{0}`")]
pub struct ParseRationalError(pub String);

pub fn parse_rational(s: &str) -> Result<Rational, ParseRationalError> {
    let err = || ParseRationalError(s.to_string());
    let s = s.trim();
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let n: BigInt = n.parse().map_err(|_| err())?;
    let d: BigInt = d.parse().map_err(|_| err())?;
    if d.is_zero() {
        return Err(err());
    }
    Ok(Rational::new(n, d))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn td(ranks: &[usize], degs: &[i64]) -> QuiverTypeData {
        QuiverTypeData::new(ranks.to_vec(), degs.iter().map(|&d| BigInt::from(d)).collect()).unwrap()
    }

    #[test]
    fn slope_examples() {
        // vectors are indexed by vertex position 0..m
        assert_eq!(slope(&td(&[1, 1], &[0, 0]), &StabilityParam::from_ints(&[0, 1])).unwrap().0, rat(1, 2));
        assert_eq!(slope(&td(&[2, 1], &[3, -1]), &StabilityParam::from_ints(&[0, 2])).unwrap().0, rat(4, 3));
        assert_eq!(slope(&td(&[5], &[7]), &StabilityParam::from_ints(&[0])).unwrap().0, rat(7, 5));
        assert_eq!(
            slope(&td(&[0, 0], &[0, 0]), &StabilityParam::from_ints(&[0, 1])).unwrap_err(),
            StabilityError::ZeroRank
        );
    }

    #[test]
    fn tau_examples() {
        let t = td(&[1, 1], &[0, 0]);
        let tau = alpha_to_tau(&t, &StabilityParam::from_ints(&[0, 1])).unwrap();
        assert_eq!(tau.0, vec![rat(1, 2), rat(-1, 2)]);
        assert_eq!(tau_to_alpha(&tau), StabilityParam::from_ints(&[0, 1]));
        let uniform = alpha_to_tau(&t, &StabilityParam::from_ints(&[3, 3])).unwrap();
        assert!(uniform.0.iter().all(Zero::is_zero));
        assert_eq!(tau_to_alpha(&TauParam(vec![int(0); 3])), StabilityParam::zero(3));
        let alpha = tau_to_alpha(&TauParam(vec![rat(3, 7), int(-2), rat(1, 5)]));
        assert!(alpha.0[0].is_zero());
    }

    #[test]
    fn extended_param_examples() {
        let a = StabilityParam::from_ints(&[0, 1, 2]);
        let g = extended_params(&a, &a, 2).unwrap();
        assert_eq!(*g.get(0, 0), int(2));
        assert_eq!(*g.get(2, 0), int(0));
        assert_eq!(*g.get(0, 2), int(4));
        for i in 0..=2 {
            for j in 0..=2 {
                assert_eq!(*g.get(i, j), int(2 + j as i64 - i as i64));
            }
        }
        let zero = StabilityParam::zero(3);
        let g = extended_params(&a, &zero, 2).unwrap();
        for i in 0..=2 {
            for j in 0..=2 {
                assert_eq!(g.get(i, j), &a.0[j]);
            }
        }
        assert!(extended_params(&a, &StabilityParam::zero(2), 2).is_err());
    }

    #[test]
    fn tilde_tau_examples() {
        let tp = TauParam(vec![rat(1, 2), rat(-1, 2)]);
        let g = tilde_tau(&tp, &tp).unwrap();
        assert!(g.get(0, 0).is_zero() && g.get(1, 1).is_zero());
        let g = tilde_tau(&tp, &TauParam(vec![int(0), int(0)])).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(g.get(i, j), &tp.0[j]);
            }
        }
    }

    #[test]
    fn collapsed_param_examples() {
        let p = collapsed_params(&StabilityParam::from_ints(&[0, 1]), 1).unwrap();
        assert_eq!(p.center, int(1));
        assert_eq!(*p.at(0, 1), int(2));
        assert_eq!(*p.at(1, 0), int(0));
        let p = collapsed_params(&StabilityParam::zero(4), 3).unwrap();
        assert!(p.center.is_zero() && p.off_diagonal.iter().all(|(_, v)| v.is_zero()));
    }

    #[test]
    fn semistable_against_examples() {
        let whole = td(&[1, 1], &[0, 0]);
        let a = StabilityParam::from_ints(&[0, 1]);
        let v = semistable_against(&whole, &td(&[1, 0], &[0, 0]), &a, false).unwrap();
        assert!(v.holds && !v.equal_slope);
        let v = semistable_against(&whole, &td(&[0, 1], &[0, 0]), &a, false).unwrap();
        assert!(!v.holds);
        let flat = StabilityParam::from_ints(&[0, 0]);
        let v = semistable_against(&whole, &td(&[1, 0], &[0, 0]), &flat, false).unwrap();
        assert!(v.holds && v.equal_slope);
        assert!(!semistable_against(&whole, &td(&[1, 0], &[0, 0]), &flat, true).unwrap().holds);
        assert_eq!(
            semistable_against(&whole, &whole, &a, false).unwrap_err(),
            StabilityError::TrivialSub
        );
        assert_eq!(
            semistable_against(&whole, &td(&[0, 0], &[0, 0]), &a, false).unwrap_err(),
            StabilityError::TrivialSub
        );
    }

    #[test]
    fn rational_text_roundtrip() {
        for s in ["3/4", "-7/2", "5", "0"] {
            assert_eq!(format_rational(&parse_rational(s).unwrap()), s);
        }
        assert_eq!(parse_rational("6/8").unwrap(), rat(3, 4));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
    }

    fn arb_rat() -> impl Strategy<Value = Rational> {
        (-50i64..50, 1i64..12).prop_map(|(n, d)| rat(n, d))
    }

    fn arb_typed() -> impl Strategy<Value = (QuiverTypeData, StabilityParam)> {
        (1usize..6).prop_flat_map(|n| {
            (
                proptest::collection::vec(0usize..5, n),
                proptest::collection::vec(-20i64..20, n),
                proptest::collection::vec(arb_rat(), n),
            )
                .prop_filter_map("nonzero rank", |(r, d, a)| {
                    if r.iter().sum::<usize>() == 0 {
                        return None;
                    }
                    let d = r.iter().zip(d).map(|(r, d)| if *r == 0 { 0 } else { d }).collect::<Vec<_>>();
                    Some((td(&r, &d), StabilityParam(a)))
                })
        })
    }

    proptest! {
        #[test]
        fn trace_identity((t, a) in arb_typed()) {
            let tau = alpha_to_tau(&t, &a).unwrap();
            let lhs = tau.0.iter().zip(&t.ranks)
                .fold(Rational::zero(), |acc, (x, r)| acc + x * int(*r as i64));
            let rhs = t.degrees.iter().fold(Rational::zero(), |acc, d| acc + Rational::from_integer(d.clone()));
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn roundtrip_normalizes_alpha((t, a) in arb_typed()) {
            let tau = alpha_to_tau(&t, &a).unwrap();
            let back = tau_to_alpha(&tau);
            prop_assert_eq!(back.clone(), a.translate(&-a.0[0].clone()));
            prop_assert_eq!(alpha_to_tau(&t, &back).unwrap(), tau);
        }

        #[test]
        fn translation_shifts_slopes((t, a) in arb_typed(), c in arb_rat()) {
            let s0 = slope(&t, &a).unwrap().0;
            let s1 = slope(&t, &a.translate(&c)).unwrap().0;
            prop_assert_eq!(s1 - s0, c);
        }
    }
}
