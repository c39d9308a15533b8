//! The extended Hom-quiver of two chains, its collapsed form, and the
//! Hom-complex `d : H^0 -> H^1`.
//!
//! Grid vertex `(i, j)` carries `Hom(V''_i, V'_j)`, i.e. `dim V'_j x dim V''_i`
//! matrices, vectorized column-major. Weight is `i - j`. Arrows:
//!
//! * `delta+_ij : (i, j) -> (i+1, j)`, `f -> f o phi''_{i+1}` for `i < m`
//! * `delta-_ij : (i, j) -> (i, j-1)`, `f -> -phi'_j o f` for `j >= 1`

use crate::linalg::{
    cokernel_basis, identity, kron, max_abs_diff, null_space, numerical_rank, unvec_col_major,
    vec_col_major, zeros, CMat, RankTolerance,
};
use crate::quiver::{Chain, DimVector, Quiver, Representation};
use crate::stability::{collapsed_params, grid_index, CollapsedParam, StabilityError, StabilityParam};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum HomError {
    #[error("chains have different lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("stability parameter mismatch: {0}")]
    Parameter(#[from] StabilityError),
    #[error("kernel subobject not closed under arrow `{arrow}` (residual {residual:e})")]
    ClosureViolation { arrow: String, residual: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

#[derive(Debug, Clone)]
pub struct GridArrow {
    pub sign: Sign,
    pub source: (usize, usize),
    pub target: (usize, usize),
}

#[derive(Debug, Clone)]
pub struct ExtendedHomQuiver {
    pub m: usize,
    pub dims_dprime: Vec<usize>,
    pub dims_prime: Vec<usize>,
    /// Representation over the grid quiver; vertex `(i, j)` sits at `grid_index(m, i, j)`.
    pub rep: Representation,
    /// Arrow descriptors, parallel to `rep.quiver().arrows()`.
    pub arrows: Vec<GridArrow>,
}

impl ExtendedHomQuiver {
    pub fn vertex(&self, i: usize, j: usize) -> usize {
        grid_index(self.m, i, j)
    }

    pub fn weight(&self, v: usize) -> isize {
        let (i, j) = (v / (self.m + 1), v % (self.m + 1));
        i as isize - j as isize
    }

    pub fn dim(&self, i: usize, j: usize) -> usize {
        self.dims_dprime[i] * self.dims_prime[j]
    }

    fn arrow_index(&self, sign: Sign, source: (usize, usize)) -> Option<usize> {
        self.arrows.iter().position(|a| a.sign == sign && a.source == source)
    }

    /// `delta+_ij` as a matrix, if `i < m`.
    pub fn delta_plus(&self, i: usize, j: usize) -> Option<&CMat> {
        self.arrow_index(Sign::Plus, (i, j)).map(|k| self.rep.map(k))
    }

    /// `delta-_ij` as a matrix, if `j >= 1`.
    pub fn delta_minus(&self, i: usize, j: usize) -> Option<&CMat> {
        self.arrow_index(Sign::Minus, (i, j)).map(|k| self.rep.map(k))
    }
}

fn grid_quiver(m: usize) -> (Quiver, Vec<GridArrow>) {
    let label = |i: usize, j: usize| format!("({i},{j})");
    let mut vertices = Vec::new();
    for i in 0..=m {
        for j in 0..=m {
            vertices.push(label(i, j));
        }
    }
    let mut arrows = Vec::new();
    let mut descr = Vec::new();
    for i in 0..=m {
        for j in 0..=m {
            if i < m {
                arrows.push((format!("d+({i},{j})"), label(i, j), label(i + 1, j)));
                descr.push(GridArrow { sign: Sign::Plus, source: (i, j), target: (i + 1, j) });
            }
            if j >= 1 {
                arrows.push((format!("d-({i},{j})"), label(i, j), label(i, j - 1)));
                descr.push(GridArrow { sign: Sign::Minus, source: (i, j), target: (i, j - 1) });
            }
        }
    }
    (Quiver::new(vertices, arrows).expect("grid quiver is well-formed"), descr)
}

/// Builds `H~(C'', C')`.
pub fn build_extended(c_dprime: &Chain, c_prime: &Chain) -> Result<ExtendedHomQuiver, HomError> {
    if c_dprime.m() != c_prime.m() {
        return Err(HomError::LengthMismatch(c_dprime.m(), c_prime.m()));
    }
    let m = c_prime.m();
    let (quiver, descr) = grid_quiver(m);
    let dims: Vec<usize> = (0..=m)
        .flat_map(|i| (0..=m).map(move |j| (i, j)))
        .map(|(i, j)| c_dprime.dim(i) * c_prime.dim(j))
        .collect();
    let maps = descr
        .iter()
        .map(|a| {
            let (i, j) = a.source;
            match a.sign {
                // vec(f phi) = (phi^T ⊗ I) vec(f)
                Sign::Plus => kron(&c_dprime.phi(i + 1).transpose(), &identity(c_prime.dim(j))),
                // vec(-phi f) = -(I ⊗ phi) vec(f)
                Sign::Minus => -kron(&identity(c_dprime.dim(i)), c_prime.phi(j)),
            }
        })
        .collect();
    let rep = Representation::new(quiver, DimVector(dims), maps).expect("delta shapes match grid dims");
    Ok(ExtendedHomQuiver {
        m,
        dims_dprime: c_dprime.dims().to_vec(),
        dims_prime: c_prime.dims().to_vec(),
        rep,
        arrows: descr,
    })
}

/// `H^0 = ⊕_i Hom(V''_i, V'_i)`, `H^1 = ⊕_{i>=1} Hom(V''_i, V'_{i-1})` and the
/// differential `d(g)_i = g_{i-1} phi''_i - phi'_i g_i`.
#[derive(Debug, Clone)]
pub struct HomComplex {
    pub m: usize,
    /// Offsets of `Hom(V''_i, V'_i)` inside `H^0`.
    pub h0_offsets: Vec<usize>,
    /// Offsets of `Hom(V''_i, V'_{i-1})` inside `H^1`, indexed by `i - 1`.
    pub h1_offsets: Vec<usize>,
    pub dim_h0: usize,
    pub dim_h1: usize,
    pub d: CMat,
}

impl HomComplex {
    pub fn rank(&self, tol: RankTolerance) -> usize {
        numerical_rank(&self.d, tol)
    }

    pub fn kernel(&self, tol: RankTolerance) -> CMat {
        null_space(&self.d, tol)
    }

    /// Block row of `d` landing in `Hom(V''_i, V'_{i-1})`.
    pub fn d_block(&self, i: usize) -> CMat {
        let start = self.h1_offsets[i - 1];
        let end = if i < self.m { self.h1_offsets[i] } else { self.dim_h1 };
        self.d.rows(start, end - start).into_owned()
    }
}

/// Assembles `d` column by column from the defining formula.
pub fn hom_complex(c_dprime: &Chain, c_prime: &Chain) -> Result<HomComplex, HomError> {
    if c_dprime.m() != c_prime.m() {
        return Err(HomError::LengthMismatch(c_dprime.m(), c_prime.m()));
    }
    let m = c_prime.m();
    let (dd, dp) = (c_dprime.dims(), c_prime.dims());
    let mut h0_offsets = Vec::with_capacity(m + 1);
    let mut dim_h0 = 0;
    for i in 0..=m {
        h0_offsets.push(dim_h0);
        dim_h0 += dd[i] * dp[i];
    }
    let mut h1_offsets = Vec::with_capacity(m);
    let mut dim_h1 = 0;
    for i in 1..=m {
        h1_offsets.push(dim_h1);
        dim_h1 += dd[i] * dp[i - 1];
    }
    let mut d = zeros(dim_h1, dim_h0);
    for k in 0..=m {
        for col in 0..dd[k] {
            for row in 0..dp[k] {
                let mut g = zeros(dp[k], dd[k]);
                g[(row, col)] = crate::linalg::c(1.0, 0.0);
                let src = h0_offsets[k] + col * dp[k] + row;
                // g_k appears as g_{i-1} phi''_i with i = k + 1 ...
                if k < m {
                    let i = k + 1;
                    let img = &g * c_dprime.phi(i);
                    for (t, z) in vec_col_major(&img).into_iter().enumerate() {
                        d[(h1_offsets[i - 1] + t, src)] += z;
                    }
                }
                // ... and as -phi'_i g_i with i = k
                if k >= 1 {
                    let img = c_prime.phi(k) * &g;
                    for (t, z) in vec_col_major(&img).into_iter().enumerate() {
                        d[(h1_offsets[k - 1] + t, src)] -= z;
                    }
                }
            }
        }
    }
    Ok(HomComplex { m, h0_offsets, h1_offsets, dim_h0, dim_h1, d })
}

/// Evaluates `d` on a tuple `(g_0, ..., g_m)` directly from the formula.
pub fn apply_d(c_dprime: &Chain, c_prime: &Chain, g: &[CMat]) -> Vec<CMat> {
    (1..=c_prime.m())
        .map(|i| &g[i - 1] * c_dprime.phi(i) - c_prime.phi(i) * &g[i])
        .collect()
}

/// The block matrix of `delta+ + delta-` from weight 0 to weight 1.
pub fn middle_columns_matrix(ext: &ExtendedHomQuiver) -> CMat {
    let m = ext.m;
    let h0: Vec<usize> = (0..=m).map(|i| ext.dim(i, i)).collect();
    let h1: Vec<usize> = (1..=m).map(|i| ext.dim(i, i - 1)).collect();
    let off = |v: &[usize], k: usize| v[..k].iter().sum::<usize>();
    let mut out = zeros(h1.iter().sum(), h0.iter().sum());
    for i in 1..=m {
        let row = off(&h1, i - 1);
        let plus = ext.delta_plus(i - 1, i - 1).expect("i - 1 < m");
        out.view_mut((row, off(&h0, i - 1)), plus.shape()).copy_from(plus);
        let minus = ext.delta_minus(i, i).expect("i >= 1");
        out.view_mut((row, off(&h0, i)), minus.shape()).copy_from(minus);
    }
    out
}

/// Maximum entrywise deviation between the middle columns of `ext` and `d`.
pub fn middle_columns_deviation(ext: &ExtendedHomQuiver, hc: &HomComplex) -> f64 {
    let mid = middle_columns_matrix(ext);
    if mid.shape() != hc.d.shape() {
        return f64::INFINITY;
    }
    if mid.is_empty() {
        return 0.0;
    }
    max_abs_diff(&mid, &hc.d)
}

/// True iff the middle two columns reproduce `d` entrywise to `1e-12`.
pub fn middle_columns_check(ext: &ExtendedHomQuiver, hc: &HomComplex) -> bool {
    middle_columns_deviation(ext, hc) <= 1e-12
}

/// Largest deviation `|delta-_{i+1,j} delta+_ij - delta+_{i,j-1} delta-_ij|`
/// over all grid squares. Both paths equal `f -> -phi'_j f phi''_{i+1}`.
pub fn square_deviation(ext: &ExtendedHomQuiver) -> f64 {
    let m = ext.m;
    let mut worst: f64 = 0.0;
    for i in 0..m {
        for j in 1..=m {
            let a = ext.delta_minus(i + 1, j).unwrap() * ext.delta_plus(i, j).unwrap();
            let b = ext.delta_plus(i, j - 1).unwrap() * ext.delta_minus(i, j).unwrap();
            if !a.is_empty() {
                worst = worst.max(max_abs_diff(&a, &b));
            }
        }
    }
    worst
}

/// The collapsed quiver: weight-0 vertices merged into one center, parallel
/// arrows into and out of the center summed.
#[derive(Debug, Clone)]
pub struct CollapsedQuiver {
    pub m: usize,
    pub rep: Representation,
    pub param: StabilityParam,
    pub center: usize,
    /// Collapsed vertex position of off-diagonal grid vertex `(i, j)`.
    pub positions: Vec<((usize, usize), usize)>,
    /// Offsets of `Hom(V''_i, V'_i)` inside the center.
    pub center_offsets: Vec<usize>,
    /// Arrow positions of `d_i : center -> (i, i-1)`, indexed by `i - 1`.
    pub d_arrows: Vec<usize>,
}

impl CollapsedQuiver {
    pub fn position(&self, i: usize, j: usize) -> usize {
        if i == j {
            return self.center;
        }
        self.positions.iter().find(|(k, _)| *k == (i, j)).expect("grid vertex").1
    }

    pub fn d_block(&self, i: usize) -> &CMat {
        self.rep.map(self.d_arrows[i - 1])
    }

    /// All `d_i` stacked: the Hom-complex differential.
    pub fn stacked_d(&self) -> CMat {
        let cols = self.rep.dim(self.center);
        let rows: usize = (1..=self.m).map(|i| self.d_block(i).nrows()).sum();
        let mut out = zeros(rows, cols);
        let mut r = 0;
        for i in 1..=self.m {
            let b = self.d_block(i);
            out.view_mut((r, 0), b.shape()).copy_from(b);
            r += b.nrows();
        }
        out
    }

    pub fn collapsed_param(&self) -> CollapsedParam {
        collapsed_params_from(self)
    }
}

fn collapsed_params_from(col: &CollapsedQuiver) -> CollapsedParam {
    CollapsedParam {
        m: col.m,
        center: col.param.0[col.center].clone(),
        off_diagonal: col.positions.iter().map(|(k, p)| (*k, col.param.0[*p].clone())).collect(),
    }
}

/// Collapses the weight-0 column of `ext`, attaching the parameter
/// `alpha_m` at the center and `alpha_m + alpha_j - alpha_i` elsewhere.
pub fn collapse_middle(ext: &ExtendedHomQuiver, a: &StabilityParam) -> Result<CollapsedQuiver, HomError> {
    let m = ext.m;
    let cp = collapsed_params(a, m)?;

    let mut vertices = vec!["center".to_string()];
    let mut positions = Vec::new();
    let mut dims = vec![(0..=m).map(|i| ext.dim(i, i)).sum::<usize>()];
    let mut param = vec![cp.center.clone()];
    for ((i, j), v) in &cp.off_diagonal {
        positions.push(((*i, *j), vertices.len()));
        vertices.push(format!("({i},{j})"));
        dims.push(ext.dim(*i, *j));
        param.push(v.clone());
    }
    let pos = |i: usize, j: usize| -> usize {
        if i == j {
            0
        } else {
            positions.iter().find(|(k, _)| *k == (i, j)).unwrap().1
        }
    };
    let center_offsets: Vec<usize> =
        (0..=m).scan(0, |acc, i| { let o = *acc; *acc += ext.dim(i, i); Some(o) }).collect();
    let center_dim = dims[0];

    let mut arrows = Vec::new();
    let mut maps = Vec::new();
    let mut d_arrows = vec![0; m];
    // arrows between off-diagonal vertices are kept as they are
    for (k, ga) in ext.arrows.iter().enumerate() {
        let (s, t) = (ga.source, ga.target);
        if s.0 != s.1 && t.0 != t.1 {
            arrows.push((ext.rep.quiver().arrow(k).id.clone(), vertices[pos(s.0, s.1)].clone(), vertices[pos(t.0, t.1)].clone()));
            maps.push(ext.rep.map(k).clone());
        }
    }
    // weight -1 vertex (i, i+1) into the center: delta+ lands in (i+1, i+1), delta- in (i, i)
    for i in 0..m {
        let src_dim = ext.dim(i, i + 1);
        let mut map = zeros(center_dim, src_dim);
        let plus = ext.delta_plus(i, i + 1).unwrap();
        map.view_mut((center_offsets[i + 1], 0), plus.shape()).copy_from(plus);
        let minus = ext.delta_minus(i, i + 1).unwrap();
        map.view_mut((center_offsets[i], 0), minus.shape()).copy_from(minus);
        arrows.push((format!("in({i},{})", i + 1), vertices[pos(i, i + 1)].clone(), vertices[0].clone()));
        maps.push(map);
    }
    // the center into weight 1 vertex (i, i-1): d_i
    for i in 1..=m {
        let mut map = zeros(ext.dim(i, i - 1), center_dim);
        let plus = ext.delta_plus(i - 1, i - 1).unwrap();
        map.view_mut((0, center_offsets[i - 1]), plus.shape()).copy_from(plus);
        let minus = ext.delta_minus(i, i).unwrap();
        map.view_mut((0, center_offsets[i]), minus.shape()).copy_from(minus);
        d_arrows[i - 1] = arrows.len();
        arrows.push((format!("d{i}"), vertices[0].clone(), vertices[pos(i, i - 1)].clone()));
        maps.push(map);
    }
    let quiver = Quiver::new(vertices, arrows).expect("collapsed quiver is well-formed");
    let rep = Representation::new(quiver, DimVector(dims), maps).expect("collapsed shapes match");
    Ok(CollapsedQuiver {
        m,
        rep,
        param: StabilityParam(param),
        center: 0,
        positions,
        center_offsets,
        d_arrows,
    })
}

/// A subrepresentation given by orthonormal bases per vertex.
#[derive(Debug, Clone)]
pub struct SubRepresentation {
    pub bases: Vec<CMat>,
}

impl SubRepresentation {
    pub fn dims(&self) -> Vec<usize> {
        self.bases.iter().map(|b| b.ncols()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.bases.iter().all(|b| b.ncols() == 0)
    }
}

#[derive(Debug, Clone)]
pub struct KernelSubobject {
    pub sub: SubRepresentation,
    /// `ker d = 0`.
    pub trivial: bool,
    /// Worst `|d_i K|` over the outgoing arrows.
    pub closure_residual: f64,
}

/// `ker d` at the center, zero elsewhere.
pub fn kernel_subobject(col: &CollapsedQuiver, tol: RankTolerance) -> Result<KernelSubobject, HomError> {
    let kernel = null_space(&col.stacked_d(), tol);
    let mut worst: f64 = 0.0;
    let q = col.rep.quiver();
    for a in q.outgoing(col.center) {
        let img = col.rep.map(a) * &kernel;
        let r = img.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let scale = crate::linalg::frobenius(col.rep.map(a)).max(1.0);
        if r > 1e3 * tol.0 * scale {
            return Err(HomError::ClosureViolation { arrow: q.arrow(a).id.clone(), residual: r });
        }
        worst = worst.max(r);
    }
    let trivial = kernel.ncols() == 0;
    let bases = (0..q.num_vertices())
        .map(|v| if v == col.center { kernel.clone() } else { zeros(col.rep.dim(v), 0) })
        .collect();
    Ok(KernelSubobject { sub: SubRepresentation { bases }, trivial, closure_residual: worst })
}

#[derive(Debug, Clone)]
pub struct CokernelQuotient {
    /// `(i, coker basis)` for `i = 1..=m`: orthonormal complement of `im d_i`
    /// inside `Hom(V''_i, V'_{i-1})`.
    pub blocks: Vec<(usize, CMat)>,
    /// `dim coker d_i = dim Hom(V''_i, V'_{i-1}) - rank d_i`.
    pub coker_dims: Vec<usize>,
    pub ranks: Vec<usize>,
    /// `dim H^1 - rank d`, computed from the bundled `d`.
    pub coker_d_dim: usize,
    pub rank_d: usize,
}

impl CokernelQuotient {
    pub fn total_block_coker(&self) -> usize {
        self.coker_dims.iter().sum()
    }
}

pub fn cokernel_quotient(col: &CollapsedQuiver, tol: RankTolerance) -> CokernelQuotient {
    let mut blocks = Vec::new();
    let mut coker_dims = Vec::new();
    let mut ranks = Vec::new();
    for i in 1..=col.m {
        let d = col.d_block(i);
        let basis = cokernel_basis(d, tol);
        ranks.push(d.nrows() - basis.ncols());
        coker_dims.push(basis.ncols());
        blocks.push((i, basis));
    }
    let stacked = col.stacked_d();
    let rank_d = numerical_rank(&stacked, tol);
    CokernelQuotient { blocks, coker_dims, ranks, coker_d_dim: stacked.nrows() - rank_d, rank_d }
}

/// Splits a vector of `H^0` into its components `g_i`.
pub fn split_h0(c_dprime: &Chain, c_prime: &Chain, v: &[crate::linalg::C64]) -> Vec<CMat> {
    let mut off = 0;
    (0..=c_prime.m())
        .map(|i| {
            let (r, c) = (c_prime.dim(i), c_dprime.dim(i));
            let g = unvec_col_major(&v[off..off + r * c], r, c);
            off += r * c;
            g
        })
        .collect()
}
