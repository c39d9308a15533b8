//! Quivers, chain quivers and their finite-dimensional representations.
//!
//! Vertices and arrows are addressed by their position in the quiver. For the
//! chain quiver `E_m -> ... -> E_0` the vertex at position `i` is the chain
//! vertex `i`, and the arrow at position `i - 1` is `phi_i : V_i -> V_{i-1}`.
//! Files list chain vertices in descending order `m, ..., 0`; see
//! [`crate::instance`].

use std::collections::HashSet;
use std::fmt;

use num_bigint::BigInt;
use num_traits::Zero;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::linalg::{c, zeros, CMat};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum QuiverError {
    #[error("duplicate vertex id `{0}`")]
    DuplicateVertex(String),
    #[error("duplicate arrow id `{0}`")]
    DuplicateArrow(String),
    #[error("arrow `{arrow}` refers to undeclared vertex `{vertex}`")]
    UnknownVertex { arrow: String, vertex: String },
    #[error("dimension vector has {got} entries, quiver has {expected} vertices")]
    DimVectorLength { expected: usize, got: usize },
    #[error("{} arrow matrices given, quiver has {expected} arrows", got)]
    ArrowCount { expected: usize, got: usize },
    #[error("representation shape violations: {}", format_violations(.0))]
    Shape(Vec<ShapeViolation>),
    #[error("representations live on different quivers")]
    QuiverMismatch,
    #[error("not a chain quiver")]
    NotAChain,
}

fn format_violations(v: &[ShapeViolation]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Arrow {
    pub id: String,
    pub tail: usize,
    pub head: usize,
}

/// A finite quiver. Vertex and arrow ids are unique; endpoints are declared.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Quiver {
    vertices: Vec<String>,
    arrows: Vec<Arrow>,
}

impl Quiver {
    /// Builds a quiver from vertex ids and `(arrow id, tail id, head id)` triples.
    pub fn new(
        vertices: Vec<String>,
        arrows: Vec<(String, String, String)>,
    ) -> Result<Quiver, QuiverError> {
        let mut seen = HashSet::new();
        for v in &vertices {
            if !seen.insert(v.as_str()) {
                return Err(QuiverError::DuplicateVertex(v.clone()));
            }
        }
        let lookup = |arrow: &str, v: &str| {
            vertices.iter().position(|x| x == v).ok_or_else(|| QuiverError::UnknownVertex {
                arrow: arrow.to_string(),
                vertex: v.to_string(),
            })
        };
        let mut seen_arrows = HashSet::new();
        let mut out = Vec::with_capacity(arrows.len());
        for (id, t, h) in &arrows {
            if !seen_arrows.insert(id.clone()) {
                return Err(QuiverError::DuplicateArrow(id.clone()));
            }
            out.push(Arrow { id: id.clone(), tail: lookup(id, t)?, head: lookup(id, h)? });
        }
        Ok(Quiver { vertices, arrows: out })
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_arrows(&self) -> usize {
        self.arrows.len()
    }

    pub fn vertex_id(&self, v: usize) -> &str {
        &self.vertices[v]
    }

    pub fn vertex_ids(&self) -> &[String] {
        &self.vertices
    }

    pub fn arrows(&self) -> &[Arrow] {
        &self.arrows
    }

    pub fn arrow(&self, a: usize) -> &Arrow {
        &self.arrows[a]
    }

    pub fn position(&self, id: &str) -> Option<usize> {
        self.vertices.iter().position(|v| v == id)
    }

    /// Arrows with head at `v`.
    pub fn incoming(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.arrows.iter().enumerate().filter(move |(_, a)| a.head == v).map(|(k, _)| k)
    }

    /// Arrows with tail at `v`.
    pub fn outgoing(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.arrows.iter().enumerate().filter(move |(_, a)| a.tail == v).map(|(k, _)| k)
    }

    /// Length `m` if this is the canonical chain quiver on `m + 1` vertices.
    pub fn chain_length(&self) -> Option<usize> {
        let n = self.num_vertices();
        if n == 0 {
            return None;
        }
        (*self == make_chain_quiver(n - 1)).then_some(n - 1)
    }
}

/// Shape of a holomorphic `(m+1)`-chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChainShape {
    pub m: usize,
}

impl ChainShape {
    pub fn quiver(&self) -> Quiver {
        make_chain_quiver(self.m)
    }
}

/// The equioriented chain quiver with vertices `m, ..., 0` and arrows `i -> i-1`.
pub fn make_chain_quiver(m: usize) -> Quiver {
    let vertices = (0..=m).map(|i| i.to_string()).collect();
    let arrows = (1..=m)
        .map(|i| Arrow { id: format!("phi{i}"), tail: i, head: i - 1 })
        .collect();
    Quiver { vertices, arrows }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DimVector(pub Vec<usize>);

impl DimVector {
    pub fn total(&self) -> usize {
        self.0.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&d| d == 0)
    }

    pub fn get(&self, v: usize) -> usize {
        self.0[v]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShapeViolation {
    pub arrow: String,
    pub expected: (usize, usize),
    pub actual: (usize, usize),
}

impl fmt::Display for ShapeViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "arrow {}: expected {}x{}, got {}x{}",
            self.arrow, self.expected.0, self.expected.1, self.actual.0, self.actual.1
        )
    }
}

/// A representation: a vector space of dimension `dims[v]` at every vertex and
/// a `dims[head] x dims[tail]` complex matrix on every arrow.
#[derive(Debug, Clone, PartialEq)]
pub struct Representation {
    quiver: Quiver,
    dims: DimVector,
    maps: Vec<CMat>,
}

impl Representation {
    /// Checked constructor; shape mismatches come back as [`QuiverError::Shape`].
    pub fn new(quiver: Quiver, dims: DimVector, maps: Vec<CMat>) -> Result<Self, QuiverError> {
        let rep = Representation::new_unchecked(quiver, dims, maps)?;
        validate_rep(&rep).map_err(QuiverError::Shape)?;
        Ok(rep)
    }

    /// Only checks counts; shapes are left to [`validate_rep`].
    pub fn new_unchecked(
        quiver: Quiver,
        dims: DimVector,
        maps: Vec<CMat>,
    ) -> Result<Self, QuiverError> {
        if dims.len() != quiver.num_vertices() {
            return Err(QuiverError::DimVectorLength {
                expected: quiver.num_vertices(),
                got: dims.len(),
            });
        }
        if maps.len() != quiver.num_arrows() {
            return Err(QuiverError::ArrowCount { expected: quiver.num_arrows(), got: maps.len() });
        }
        Ok(Representation { quiver, dims, maps })
    }

    pub fn zero(quiver: Quiver) -> Self {
        let dims = DimVector(vec![0; quiver.num_vertices()]);
        let maps = quiver.arrows().iter().map(|_| zeros(0, 0)).collect();
        Representation { quiver, dims, maps }
    }

    pub fn quiver(&self) -> &Quiver {
        &self.quiver
    }

    pub fn dims(&self) -> &DimVector {
        &self.dims
    }

    pub fn dim(&self, v: usize) -> usize {
        self.dims.0[v]
    }

    pub fn maps(&self) -> &[CMat] {
        &self.maps
    }

    pub fn map(&self, a: usize) -> &CMat {
        &self.maps[a]
    }

    pub fn is_zero(&self) -> bool {
        self.dims.is_zero()
    }

    /// Applies a vertexwise change of basis: `phi_a -> g_head phi_a g_tail^{-1}`.
    pub fn transform(&self, g: &[CMat], g_inv: &[CMat]) -> Representation {
        let maps = self
            .quiver
            .arrows()
            .iter()
            .zip(&self.maps)
            .map(|(a, phi)| &g[a.head] * phi * &g_inv[a.tail])
            .collect();
        Representation { quiver: self.quiver.clone(), dims: self.dims.clone(), maps }
    }
}

/// Every arrow matrix must be `dims(head) x dims(tail)`.
pub fn validate_rep(rep: &Representation) -> Result<(), Vec<ShapeViolation>> {
    let violations: Vec<_> = rep
        .quiver
        .arrows()
        .iter()
        .zip(&rep.maps)
        .filter_map(|(a, m)| {
            let expected = (rep.dims.0[a.head], rep.dims.0[a.tail]);
            let actual = (m.nrows(), m.ncols());
            (expected != actual).then(|| ShapeViolation { arrow: a.id.clone(), expected, actual })
        })
        .collect();
    if violations.is_empty() {
        Ok(())
    } else {
        Err(violations)
    }
}

/// Vertexwise direct sum; arrow matrices become block diagonal.
pub fn direct_sum(r1: &Representation, r2: &Representation) -> Result<Representation, QuiverError> {
    if r1.quiver != r2.quiver {
        return Err(QuiverError::QuiverMismatch);
    }
    let dims = DimVector(r1.dims.0.iter().zip(&r2.dims.0).map(|(a, b)| a + b).collect());
    let maps = r1
        .maps
        .iter()
        .zip(&r2.maps)
        .zip(r1.quiver.arrows())
        .map(|((m1, m2), a)| {
            let rows = dims.0[a.head];
            let cols = dims.0[a.tail];
            let mut out = zeros(rows, cols);
            out.view_mut((0, 0), m1.shape()).copy_from(m1);
            out.view_mut((m1.nrows(), m1.ncols()), m2.shape()).copy_from(m2);
            out
        })
        .collect();
    Ok(Representation { quiver: r1.quiver.clone(), dims, maps })
}

/// Seeded representation with i.i.d. standard complex Gaussian entries
/// (real and imaginary parts independent standard normals).
pub fn random_rep(quiver: &Quiver, dims: &DimVector, seed: u64) -> Result<Representation, QuiverError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_rep_with(quiver, dims, &mut rng)
}

pub fn random_rep_with(
    quiver: &Quiver,
    dims: &DimVector,
    rng: &mut impl rand::Rng,
) -> Result<Representation, QuiverError> {
    if dims.len() != quiver.num_vertices() {
        return Err(QuiverError::DimVectorLength { expected: quiver.num_vertices(), got: dims.len() });
    }
    let maps = quiver
        .arrows()
        .iter()
        .map(|a| random_matrix(dims.0[a.head], dims.0[a.tail], rng))
        .collect();
    Ok(Representation { quiver: quiver.clone(), dims: dims.clone(), maps })
}

pub fn random_matrix(rows: usize, cols: usize, rng: &mut impl rand::Rng) -> CMat {
    CMat::from_fn(rows, cols, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        c(re, im)
    })
}

/// Ranks and degrees per vertex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuiverTypeData {
    pub ranks: Vec<usize>,
    pub degrees: Vec<BigInt>,
}

impl QuiverTypeData {
    pub fn new(ranks: Vec<usize>, degrees: Vec<BigInt>) -> Result<Self, TypeDataError> {
        if ranks.len() != degrees.len() {
            return Err(TypeDataError::LengthMismatch);
        }
        if let Some(v) = ranks.iter().zip(&degrees).position(|(r, d)| *r == 0 && !d.is_zero()) {
            return Err(TypeDataError::DegreeOnZeroRank(v));
        }
        Ok(QuiverTypeData { ranks, degrees })
    }

    pub fn degree_zero(ranks: Vec<usize>) -> Self {
        let degrees = vec![BigInt::zero(); ranks.len()];
        QuiverTypeData { ranks, degrees }
    }

    pub fn total_rank(&self) -> usize {
        self.ranks.iter().sum()
    }

    pub fn len(&self) -> usize {
        self.ranks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranks.is_empty()
    }
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum TypeDataError {
    #[error("rank and degree vectors differ in length")]
    LengthMismatch,
    #[error("vertex {0} has rank 0 but nonzero degree")]
    DegreeOnZeroRank(usize),
}

/// Type of a representation at a point: ranks are the dimensions, degrees vanish.
pub fn rep_type(rep: &Representation) -> QuiverTypeData {
    QuiverTypeData::degree_zero(rep.dims.0.clone())
}

/// A representation of the chain quiver of length `m`.
#[derive(Debug, Clone, PartialEq)]
pub struct Chain(Representation);

impl Chain {
    pub fn from_rep(rep: Representation) -> Result<Chain, QuiverError> {
        rep.quiver.chain_length().ok_or(QuiverError::NotAChain)?;
        validate_rep(&rep).map_err(QuiverError::Shape)?;
        Ok(Chain(rep))
    }

    /// `dims[i]` is `dim V_i`; `maps[i - 1]` is `phi_i : V_i -> V_{i-1}`.
    pub fn new(dims: Vec<usize>, maps: Vec<CMat>) -> Result<Chain, QuiverError> {
        if dims.is_empty() {
            return Err(QuiverError::NotAChain);
        }
        let q = make_chain_quiver(dims.len() - 1);
        Chain::from_rep(Representation::new(q, DimVector(dims), maps)?)
    }

    pub fn random(dims: Vec<usize>, seed: u64) -> Chain {
        let q = make_chain_quiver(dims.len() - 1);
        Chain(random_rep(&q, &DimVector(dims), seed).expect("dims match chain length"))
    }

    pub fn random_with(dims: Vec<usize>, rng: &mut impl rand::Rng) -> Chain {
        let q = make_chain_quiver(dims.len() - 1);
        Chain(random_rep_with(&q, &DimVector(dims), rng).expect("dims match chain length"))
    }

    pub fn m(&self) -> usize {
        self.0.dims.len() - 1
    }

    pub fn dim(&self, i: usize) -> usize {
        self.0.dims.0[i]
    }

    pub fn dims(&self) -> &[usize] {
        &self.0.dims.0
    }

    /// `phi_i : V_i -> V_{i-1}` for `1 <= i <= m`.
    pub fn phi(&self, i: usize) -> &CMat {
        &self.0.maps[i - 1]
    }

    pub fn rep(&self) -> &Representation {
        &self.0
    }

    pub fn into_rep(self) -> Representation {
        self.0
    }

    pub fn direct_sum(&self, other: &Chain) -> Result<Chain, QuiverError> {
        direct_sum(&self.0, &other.0).map(Chain)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one(x: f64) -> CMat {
        CMat::from_element(1, 1, c(x, 0.0))
    }

    #[test]
    fn chain_quiver_shapes() {
        for m in 0..6 {
            let q = make_chain_quiver(m);
            assert_eq!(q.num_vertices(), m + 1);
            assert_eq!(q.num_arrows(), m);
            for a in q.arrows() {
                assert_eq!(a.head + 1, a.tail);
            }
            assert_eq!(q.chain_length(), Some(m));
        }
        let q1 = make_chain_quiver(1);
        assert_eq!((q1.arrow(0).tail, q1.arrow(0).head), (1, 0));
        let q2 = make_chain_quiver(2);
        let pairs: Vec<_> = q2.arrows().iter().map(|a| (a.tail, a.head)).collect();
        assert_eq!(pairs, vec![(1, 0), (2, 1)]);
    }

    #[test]
    fn quiver_rejects_bad_ids() {
        let s = |x: &str| x.to_string();
        assert_eq!(
            Quiver::new(vec![s("a"), s("a")], vec![]).unwrap_err(),
            QuiverError::DuplicateVertex(s("a"))
        );
        assert!(matches!(
            Quiver::new(vec![s("a")], vec![(s("x"), s("a"), s("b"))]).unwrap_err(),
            QuiverError::UnknownVertex { .. }
        ));
        assert!(matches!(
            Quiver::new(vec![s("a")], vec![(s("x"), s("a"), s("a")), (s("x"), s("a"), s("a"))])
                .unwrap_err(),
            QuiverError::DuplicateArrow(_)
        ));
    }

    #[test]
    fn validate_rep_examples() {
        let q = make_chain_quiver(1);
        // dims (1,1): 1x1 matrix
        let r = Representation::new_unchecked(q.clone(), DimVector(vec![1, 1]), vec![one(1.0)]).unwrap();
        assert!(validate_rep(&r).is_ok());
        // dims written (V_1, V_0) = (2, 1): phi_1 is 1x2
        let r = Representation::new_unchecked(q.clone(), DimVector(vec![1, 2]), vec![zeros(1, 2)]).unwrap();
        assert!(validate_rep(&r).is_ok());
        let r = Representation::new_unchecked(q, DimVector(vec![1, 2]), vec![zeros(2, 2)]).unwrap();
        let v = validate_rep(&r).unwrap_err();
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].arrow, "phi1");
        assert_eq!(v[0].expected, (1, 2));
        assert_eq!(v[0].actual, (2, 2));
    }

    #[test]
    fn direct_sum_adds_dims() {
        let q = make_chain_quiver(1);
        let r1 = random_rep(&q, &DimVector(vec![1, 1]), 1).unwrap();
        let r2 = random_rep(&q, &DimVector(vec![0, 1]), 2).unwrap();
        let s = direct_sum(&r1, &r2).unwrap();
        assert_eq!(s.dims().0, vec![1, 2]);
        assert!(validate_rep(&s).is_ok());
        let z = Representation::zero(q.clone());
        assert_eq!(direct_sum(&r1, &z).unwrap(), r1);
        let other = random_rep(&make_chain_quiver(2), &DimVector(vec![1, 1, 1]), 3).unwrap();
        assert_eq!(direct_sum(&r1, &other).unwrap_err(), QuiverError::QuiverMismatch);
    }

    #[test]
    fn random_rep_is_deterministic() {
        let q = make_chain_quiver(2);
        let d = DimVector(vec![2, 3, 1]);
        assert_eq!(random_rep(&q, &d, 42).unwrap(), random_rep(&q, &d, 42).unwrap());
        assert_ne!(random_rep(&q, &d, 42).unwrap(), random_rep(&q, &d, 43).unwrap());
        let z = random_rep(&q, &DimVector(vec![0, 0, 0]), 5).unwrap();
        assert!(z.is_zero());
        let r = random_rep(&make_chain_quiver(1), &DimVector(vec![1, 1]), 9).unwrap();
        assert!(validate_rep(&r).is_ok());
        assert!(r.map(0)[(0, 0)].norm() > 0.0);
    }

    #[test]
    fn rep_type_ignores_maps() {
        let q = make_chain_quiver(1);
        let r = random_rep(&q, &DimVector(vec![1, 2]), 0).unwrap();
        let t = rep_type(&r);
        assert_eq!(t.ranks, vec![1, 2]);
        assert!(t.degrees.iter().all(Zero::is_zero));
        let r2 = random_rep(&q, &DimVector(vec![1, 2]), 1).unwrap();
        assert_eq!(rep_type(&r2), t);
        assert_eq!(rep_type(&Representation::zero(q)).total_rank(), 0);
    }

    #[test]
    fn type_data_rejects_degree_on_zero_rank() {
        assert_eq!(
            QuiverTypeData::new(vec![0, 1], vec![BigInt::from(1), BigInt::from(0)]).unwrap_err(),
            TypeDataError::DegreeOnZeroRank(0)
        );
    }
}
