//! Point-level quiver vortex equations.
//!
//! Over a point the curvature term drops out and the equations for a metric
//! `H = (H_i)` read
//!
//! ```text
//! sum_{ha = i} phi_a phi_a^*  -  sum_{ta = i} phi_a^* phi_a  =  tau_i Id
//! ```
//!
//! with `phi_a^* = H_{ta}^{-1} phi_a^† H_{ha}`. Taking traces forces
//! `sum_i tau_i dim V_i = 0`.
//!
//! The solver works with frames `g_i` (`H_i = g_i^† g_i`) so the
//! representation seen in orthonormal coordinates is
//! `psi_a = g_{ha} phi_a g_{ta}^{-1}` and the residual `R^_i` is Hermitian.
//! Solutions are critical points of the convex functional
//! `sum_a |psi_a|^2 - sum_i tau_i log det H_i`; each iteration takes a damped
//! Newton step `g_i <- exp(s X_i / 2) g_i` on it, halving `s` until the
//! Frobenius norm of the residual drops.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::hom::{build_extended, ExtendedHomQuiver, HomError};
use crate::linalg::{
    frobenius, hermitian_eigen, hermitian_exp, hermitian_spectral_norm, identity, inverse, kron,
    numerical_rank, singular_values, zeros, CMat, RankTolerance, C64,
};
use crate::quiver::{rep_type, validate_rep, Chain, Representation};
use crate::stability::{alpha_to_tau, tilde_tau, Grid, Rational, StabilityError, StabilityParam, TauParam};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum VortexError {
    #[error("metric block {vertex} is not positive definite Hermitian ({reason})")]
    BadMetric { vertex: usize, reason: String },
    #[error("metric has {got} blocks, representation has {expected} vertices")]
    MetricShape { expected: usize, got: usize },
    #[error("tau has {got} entries, representation has {expected} vertices")]
    TauLength { expected: usize, got: usize },
    #[error("trace condition violated: sum tau_i dim V_i = {0:e} (no solution can exist)")]
    TraceCondition(f64),
    #[error("representation fails validation")]
    InvalidRep,
    #[error("flow for {0} did not converge")]
    NotConverged(&'static str),
    #[error("zero representation")]
    ZeroRepresentation,
    #[error(transparent)]
    Stability(#[from] StabilityError),
    #[error(transparent)]
    Hom(#[from] HomError),
}

const HERMITIAN_TOL: f64 = 1e-12;

/// Positive-definite Hermitian matrix per vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMetric {
    pub blocks: Vec<CMat>,
}

impl HermitianMetric {
    pub fn identity(dims: &[usize]) -> Self {
        HermitianMetric { blocks: dims.iter().map(|&d| identity(d)).collect() }
    }

    pub fn validate(&self) -> Result<(), VortexError> {
        for (v, h) in self.blocks.iter().enumerate() {
            if h.nrows() != h.ncols() {
                return Err(VortexError::BadMetric { vertex: v, reason: "not square".into() });
            }
            if h.is_empty() {
                continue;
            }
            let scale = frobenius(h).max(1.0);
            let asym = frobenius(&(h - h.adjoint()));
            if asym > HERMITIAN_TOL * scale {
                return Err(VortexError::BadMetric { vertex: v, reason: format!("asymmetry {asym:e}") });
            }
            let (vals, _) = hermitian_eigen(h);
            if vals[0] <= 0.0 {
                return Err(VortexError::BadMetric {
                    vertex: v,
                    reason: format!("minimum eigenvalue {:e}", vals[0]),
                });
            }
        }
        Ok(())
    }

    /// Largest over smallest eigenvalue across all blocks.
    pub fn condition_number(&self) -> f64 {
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for h in self.blocks.iter().filter(|h| !h.is_empty()) {
            let (vals, _) = hermitian_eigen(h);
            lo = lo.min(vals[0]);
            hi = hi.max(*vals.last().unwrap());
        }
        if hi == 0.0 {
            1.0
        } else {
            hi / lo
        }
    }

    /// Frames `g_i` with `g_i^† g_i = H_i` and their inverses.
    fn frames(&self) -> Result<(Vec<CMat>, Vec<CMat>), VortexError> {
        self.validate()?;
        let mut g = Vec::with_capacity(self.blocks.len());
        let mut gi = Vec::with_capacity(self.blocks.len());
        for (v, h) in self.blocks.iter().enumerate() {
            if h.is_empty() {
                g.push(zeros(0, 0));
                gi.push(zeros(0, 0));
                continue;
            }
            let chol = crate::linalg::hermitian_part(h)
                .cholesky()
                .ok_or_else(|| VortexError::BadMetric { vertex: v, reason: "Cholesky failed".into() })?;
            let frame = chol.l().adjoint();
            let inv = inverse(&frame)
                .ok_or_else(|| VortexError::BadMetric { vertex: v, reason: "singular".into() })?;
            g.push(frame);
            gi.push(inv);
        }
        Ok((g, gi))
    }
}

/// `phi^* = H_tail^{-1} phi^† H_head`.
pub fn adjoint(phi: &CMat, h_tail: &CMat, h_head: &CMat) -> Result<CMat, VortexError> {
    let inv = inverse(h_tail)
        .ok_or_else(|| VortexError::BadMetric { vertex: 0, reason: "singular tail metric".into() })?;
    Ok(inv * phi.adjoint() * h_head)
}

#[derive(Debug, Clone)]
pub struct VortexResidual {
    /// `sum phi phi^* - sum phi^* phi - tau Id` per vertex, H-self-adjoint.
    pub blocks: Vec<CMat>,
    /// The same blocks in an H-orthonormal frame (Hermitian).
    pub frame_blocks: Vec<CMat>,
    /// Sup over vertices of the spectral norm.
    pub norm: f64,
    /// `sum_i trace(block_i)`; equals `-sum_i tau_i dim V_i`.
    pub trace_sum: f64,
}

fn check_tau(rep: &Representation, tau: &[f64]) -> Result<(), VortexError> {
    if tau.len() != rep.quiver().num_vertices() {
        return Err(VortexError::TauLength { expected: rep.quiver().num_vertices(), got: tau.len() });
    }
    Ok(())
}

/// Moment-map residual in the frame `g`: `psi_a = g_ha phi_a g_ta^{-1}`.
fn frame_residual(rep: &Representation, g: &[CMat], gi: &[CMat], tau: &[f64]) -> (Vec<CMat>, Vec<CMat>) {
    let q = rep.quiver();
    let psi: Vec<CMat> = q
        .arrows()
        .iter()
        .zip(rep.maps())
        .map(|(a, phi)| &g[a.head] * phi * &gi[a.tail])
        .collect();
    let mut res: Vec<CMat> = (0..q.num_vertices())
        .map(|v| identity(rep.dim(v)).scale(-tau[v]))
        .collect();
    for (a, p) in q.arrows().iter().zip(&psi) {
        res[a.head] += p * p.adjoint();
        res[a.tail] -= p.adjoint() * p;
    }
    (psi, res)
}

fn norms(res: &[CMat]) -> (f64, f64) {
    let sup = res.iter().filter(|r| !r.is_empty()).map(hermitian_spectral_norm).fold(0.0, f64::max);
    let fro = res.iter().map(|r| frobenius(r).powi(2)).sum::<f64>().sqrt();
    (sup, fro)
}

pub fn residual(rep: &Representation, h: &HermitianMetric, tau: &[f64]) -> Result<VortexResidual, VortexError> {
    validate_rep(rep).map_err(|_| VortexError::InvalidRep)?;
    check_tau(rep, tau)?;
    if h.blocks.len() != rep.quiver().num_vertices() {
        return Err(VortexError::MetricShape { expected: rep.quiver().num_vertices(), got: h.blocks.len() });
    }
    for (v, b) in h.blocks.iter().enumerate() {
        if b.nrows() != rep.dim(v) {
            return Err(VortexError::BadMetric { vertex: v, reason: "size differs from dim".into() });
        }
    }
    let (g, gi) = h.frames()?;
    let (_, frame_blocks) = frame_residual(rep, &g, &gi, tau);
    let blocks: Vec<CMat> = frame_blocks.iter().zip(&g).zip(&gi).map(|((r, g), gi)| gi * r * g).collect();
    let (norm, _) = norms(&frame_blocks);
    let trace_sum = blocks.iter().map(|b| b.trace().re).sum();
    Ok(VortexResidual { blocks, frame_blocks, norm, trace_sum })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowConfig {
    /// Initial trial step of the line search (1 is a full Newton step).
    pub step: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub cond_bound: f64,
}

impl Default for FlowConfig {
    fn default() -> Self {
        FlowConfig { step: 1.0, tol: 1e-10, max_iter: 100_000, cond_bound: 1e8 }
    }
}

impl FlowConfig {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.step > 0.0 && self.tol > 0.0 && self.max_iter > 0 && self.cond_bound > 0.0) {
            return Err(format!("flow configuration must be positive: {self:?}"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlowStatus {
    Converged,
    ConditionBoundExceeded,
    MaxIterations,
    /// No step length decreased the residual.
    Stalled,
}

#[derive(Debug, Clone)]
pub struct FlowOutcome {
    pub converged: bool,
    pub status: FlowStatus,
    pub metric: HermitianMetric,
    /// Sup over vertices of the spectral norm of the residual.
    pub residual_norm: f64,
    pub iterations: usize,
    /// Metric condition number after every accepted step (first entry: start).
    pub condition_trace: Vec<f64>,
    /// Frobenius residual after every accepted step; non-increasing.
    pub merit_trace: Vec<f64>,
}

/// Coordinates of a Hermitian matrix in the basis orthonormal for `Re tr(XY)`.
fn herm_to_coords(x: &CMat, out: &mut [f64]) {
    let d = x.nrows();
    let s = std::f64::consts::SQRT_2;
    let mut k = 0;
    for p in 0..d {
        out[k] = x[(p, p)].re;
        k += 1;
    }
    for p in 0..d {
        for q in (p + 1)..d {
            let z = (x[(p, q)] + x[(q, p)].conj()) * 0.5;
            out[k] = s * z.re;
            out[k + 1] = s * z.im;
            k += 2;
        }
    }
}

fn coords_to_herm(d: usize, x: &[f64]) -> CMat {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut m = zeros(d, d);
    let mut k = 0;
    for p in 0..d {
        m[(p, p)] = C64::new(x[k], 0.0);
        k += 1;
    }
    for p in 0..d {
        for q in (p + 1)..d {
            let z = C64::new(s * x[k], s * x[k + 1]);
            m[(p, q)] = z;
            m[(q, p)] = z.conj();
            k += 2;
        }
    }
    m
}

/// Hessian of the Kempf-Ness functional at the current frame, as a real
/// symmetric matrix on the Hermitian coordinates of all vertices.
fn hessian(rep: &Representation, psi: &[CMat], offsets: &[usize], total: usize) -> DMatrix<f64> {
    let q = rep.quiver();
    let n = q.num_vertices();
    let mut s_v: Vec<CMat> = (0..n).map(|v| zeros(rep.dim(v), rep.dim(v))).collect();
    for (a, p) in q.arrows().iter().zip(psi) {
        s_v[a.head] += p * p.adjoint();
        s_v[a.tail] += p.adjoint() * p;
    }
    let mut l = DMatrix::<f64>::zeros(total, total);
    let mut unit = vec![0.0; total];
    let mut buf = vec![0.0; total];
    for v in 0..n {
        let d = rep.dim(v);
        for k in 0..d * d {
            unit.iter_mut().for_each(|x| *x = 0.0);
            unit[k] = 1.0;
            let b = coords_to_herm(d, &unit[..d * d]);
            let col = offsets[v] + k;
            let mut add = |w: usize, m: &CMat| {
                let dw = rep.dim(w);
                herm_to_coords(m, &mut buf[..dw * dw]);
                for (t, val) in buf[..dw * dw].iter().enumerate() {
                    l[(offsets[w] + t, col)] += val;
                }
            };
            let own = (&b * &s_v[v] + &s_v[v] * &b).scale(0.5);
            add(v, &own);
            for (a, p) in q.arrows().iter().zip(psi) {
                if a.tail == v {
                    add(a.head, &(-(p * &b * p.adjoint())));
                }
                if a.head == v {
                    add(a.tail, &(-(p.adjoint() * &b * p)));
                }
            }
        }
    }
    l
}

fn metric_from_frames(g: &[CMat]) -> HermitianMetric {
    HermitianMetric {
        blocks: g.iter().map(|g| crate::linalg::hermitian_part(&(g.adjoint() * g))).collect(),
    }
}

fn frames_condition(g: &[CMat]) -> f64 {
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for f in g.iter().filter(|f| !f.is_empty()) {
        let sv = singular_values(f);
        hi = hi.max(sv[0]);
        lo = lo.min(*sv.last().unwrap());
    }
    if hi == 0.0 {
        1.0
    } else {
        (hi / lo).powi(2)
    }
}

/// Rescales all frames by one scalar so that `sum_i log det H_i = 0`.
fn normalize_frames(g: &mut [CMat], gi: &mut [CMat]) {
    let total_dim: usize = g.iter().map(|f| f.nrows()).sum();
    if total_dim == 0 {
        return;
    }
    let logdet: f64 = g
        .iter()
        .filter(|f| !f.is_empty())
        .map(|f| singular_values(f).iter().map(|s| 2.0 * s.ln()).sum::<f64>())
        .sum();
    let c = (-logdet / (2.0 * total_dim as f64)).exp();
    for f in g.iter_mut() {
        *f *= C64::new(c, 0.0);
    }
    for f in gi.iter_mut() {
        *f *= C64::new(1.0 / c, 0.0);
    }
}

/// Necessary condition `sum_i tau_i dim V_i = 0` (to 1e-12, scaled).
pub fn trace_defect(rep: &Representation, tau: &[f64]) -> f64 {
    tau.iter().enumerate().map(|(v, t)| t * rep.dim(v) as f64).sum()
}

/// Searches for a metric solving the point-level `tau`-vortex equations.
pub fn solve_flow(rep: &Representation, tau: &[f64], cfg: &FlowConfig) -> Result<FlowOutcome, VortexError> {
    validate_rep(rep).map_err(|_| VortexError::InvalidRep)?;
    check_tau(rep, tau)?;
    let scale: f64 = tau.iter().enumerate().map(|(v, t)| t.abs() * rep.dim(v) as f64).sum::<f64>().max(1.0);
    let defect = trace_defect(rep, tau);
    if defect.abs() > 1e-12 * scale {
        return Err(VortexError::TraceCondition(defect));
    }

    let n = rep.quiver().num_vertices();
    let dims: Vec<usize> = (0..n).map(|v| rep.dim(v)).collect();
    let mut offsets = Vec::with_capacity(n);
    let mut total = 0;
    for &d in &dims {
        offsets.push(total);
        total += d * d;
    }
    let mut g: Vec<CMat> = dims.iter().map(|&d| identity(d)).collect();
    let mut gi = g.clone();

    let (mut psi, mut res) = frame_residual(rep, &g, &gi, tau);
    let (mut sup, mut merit) = norms(&res);
    let mut condition_trace = vec![1.0];
    let mut merit_trace = vec![merit];
    let mut iterations = 0;
    let mut status = FlowStatus::MaxIterations;

    let mut grad = vec![0.0; total];
    while iterations < cfg.max_iter {
        if sup <= cfg.tol {
            status = FlowStatus::Converged;
            break;
        }
        iterations += 1;

        for v in 0..n {
            let d = dims[v];
            herm_to_coords(&res[v], &mut grad[offsets[v]..offsets[v] + d * d]);
        }
        let mut l = hessian(rep, &psi, &offsets, total);
        let lambda = merit.min(1.0);
        for k in 0..total {
            l[(k, k)] += lambda;
        }
        let rhs = nalgebra::DVector::from_iterator(total, grad.iter().map(|x| -x));
        let x = match l.clone().cholesky() {
            Some(ch) => ch.solve(&rhs),
            None => match l.lu().solve(&rhs) {
                Some(x) => x,
                None => {
                    status = FlowStatus::Stalled;
                    break;
                }
            },
        };
        let steps: Vec<CMat> = (0..n).map(|v| coords_to_herm(dims[v], &x.as_slice()[offsets[v]..offsets[v] + dims[v] * dims[v]])).collect();
        let step_norm = steps.iter().filter(|s| !s.is_empty()).map(hermitian_spectral_norm).fold(0.0, f64::max);

        let mut s = if step_norm * cfg.step > 20.0 { 20.0 / step_norm } else { cfg.step };
        let mut accepted = None;
        for _ in 0..60 {
            let mut ng = Vec::with_capacity(n);
            let mut ngi = Vec::with_capacity(n);
            for v in 0..n {
                let half = steps[v].scale(0.5 * s);
                ng.push(hermitian_exp(&half) * &g[v]);
                ngi.push(&gi[v] * hermitian_exp(&(-half)));
            }
            let (npsi, nres) = frame_residual(rep, &ng, &ngi, tau);
            let (nsup, nmerit) = norms(&nres);
            if nmerit < merit {
                accepted = Some((ng, ngi, npsi, nres, nsup, nmerit));
                break;
            }
            s *= 0.5;
        }
        let Some((ng, ngi, npsi, nres, nsup, nmerit)) = accepted else {
            status = FlowStatus::Stalled;
            break;
        };
        g = ng;
        gi = ngi;
        normalize_frames(&mut g, &mut gi);
        psi = npsi;
        res = nres;
        sup = nsup;
        merit = nmerit;
        merit_trace.push(merit);
        let cond = frames_condition(&g);
        condition_trace.push(cond);
        if cond > cfg.cond_bound {
            status = FlowStatus::ConditionBoundExceeded;
            break;
        }
    }
    if status == FlowStatus::MaxIterations && sup <= cfg.tol {
        status = FlowStatus::Converged;
    }
    // psi is only used inside the loop; keep the borrow checker honest
    let _ = &psi;
    let converged = status == FlowStatus::Converged;
    Ok(FlowOutcome {
        converged,
        status,
        metric: metric_from_frames(&g),
        residual_norm: sup,
        iterations,
        condition_trace,
        merit_trace,
    })
}

/// The induced metric on `Hom(V''_i, V'_j)`:
/// `<f, g> = trace(H'_j f H''_i^{-1} g^†)`, i.e. the Gram matrix
/// `conj(H''_i^{-1}) ⊗ H'_j` in column-major coordinates.
pub fn induced_hom_metric(
    h_dprime: &HermitianMetric,
    h_prime: &HermitianMetric,
) -> Result<HermitianMetric, VortexError> {
    if h_dprime.blocks.len() != h_prime.blocks.len() {
        return Err(VortexError::MetricShape { expected: h_prime.blocks.len(), got: h_dprime.blocks.len() });
    }
    let m = h_prime.blocks.len() - 1;
    let mut blocks = Vec::with_capacity((m + 1) * (m + 1));
    for i in 0..=m {
        let inv = inverse(&h_dprime.blocks[i])
            .ok_or_else(|| VortexError::BadMetric { vertex: i, reason: "singular".into() })?;
        let inv_conj = inv.map(|z| z.conj());
        for j in 0..=m {
            blocks.push(crate::linalg::hermitian_part(&kron(&inv_conj, &h_prime.blocks[j])));
        }
    }
    Ok(HermitianMetric { blocks })
}

#[derive(Debug, Clone)]
pub struct LemmaReport {
    pub tau_tilde: Grid<Rational>,
    pub hom_residual: f64,
    pub residual_prime: f64,
    pub residual_dprime: f64,
    /// `hom_residual / (residual_prime + residual_dprime)` when the
    /// denominator is nonzero.
    pub kappa: Option<f64>,
    /// `hom_residual <= residual_prime + residual_dprime` up to roundoff.
    pub bound_holds: bool,
    /// Sup over diagonal vertices of the spectral norm.
    pub diagonal_residual: f64,
}

/// Evaluates the induced metric on the extended Hom-quiver against the
/// `tau~_ij = tau'_j - tau''_i` equations.
pub fn verify_lemma_with_metrics(
    c_dprime: &Chain,
    c_prime: &Chain,
    h_dprime: &HermitianMetric,
    h_prime: &HermitianMetric,
    tau_dprime: &TauParam,
    tau_prime: &TauParam,
) -> Result<LemmaReport, VortexError> {
    let ext: ExtendedHomQuiver = build_extended(c_dprime, c_prime)?;
    let grid = tilde_tau(tau_prime, tau_dprime)?;
    let tau_grid: Vec<f64> = grid.values.iter().map(crate::stability::to_f64).collect();
    let metric = induced_hom_metric(h_dprime, h_prime)?;
    let hom = residual(&ext.rep, &metric, &tau_grid)?;
    let rp = residual(c_prime.rep(), h_prime, &tau_prime.to_f64())?.norm;
    let rd = residual(c_dprime.rep(), h_dprime, &tau_dprime.to_f64())?.norm;
    let denom = rp + rd;
    let kappa = (denom > 0.0).then(|| hom.norm / denom);
    let bound_holds = hom.norm <= denom * (1.0 + 1e-9) + 1e-13;
    let m = c_prime.m();
    let diagonal_residual = (0..=m)
        .map(|i| &hom.frame_blocks[ext.vertex(i, i)])
        .filter(|b| !b.is_empty())
        .map(hermitian_spectral_norm)
        .fold(0.0, f64::max);
    Ok(LemmaReport {
        tau_tilde: grid,
        hom_residual: hom.norm,
        residual_prime: rp,
        residual_dprime: rd,
        kappa,
        bound_holds,
        diagonal_residual,
    })
}

/// Same as [`verify_lemma_with_metrics`], taking flow outcomes; both flows
/// must have converged.
pub fn verify_lemma(
    c_dprime: &Chain,
    c_prime: &Chain,
    out_dprime: &FlowOutcome,
    out_prime: &FlowOutcome,
    tau_dprime: &TauParam,
    tau_prime: &TauParam,
) -> Result<LemmaReport, VortexError> {
    if !out_dprime.converged {
        return Err(VortexError::NotConverged("C''"));
    }
    if !out_prime.converged {
        return Err(VortexError::NotConverged("C'"));
    }
    verify_lemma_with_metrics(c_dprime, c_prime, &out_dprime.metric, &out_prime.metric, tau_dprime, tau_prime)
}

/// Dimension of `{ e : e_ha phi_a = phi_a e_ta for all a }`.
pub fn endomorphism_dim(rep: &Representation, tol: RankTolerance) -> usize {
    let q = rep.quiver();
    let n = q.num_vertices();
    let mut offsets = Vec::with_capacity(n);
    let mut unknowns = 0;
    for v in 0..n {
        offsets.push(unknowns);
        unknowns += rep.dim(v) * rep.dim(v);
    }
    let rows: usize = q.arrows().iter().map(|a| rep.dim(a.head) * rep.dim(a.tail)).sum();
    if unknowns == 0 {
        return 0;
    }
    let mut sys = zeros(rows, unknowns);
    let mut r = 0;
    for (a, phi) in q.arrows().iter().zip(rep.maps()) {
        let (dh, dt) = (rep.dim(a.head), rep.dim(a.tail));
        let block_rows = dh * dt;
        if block_rows == 0 {
            continue;
        }
        // vec(e_h phi) = (phi^T ⊗ I) vec(e_h); vec(phi e_t) = (I ⊗ phi) vec(e_t)
        let left = kron(&phi.transpose(), &identity(dh));
        let right = kron(&identity(dt), phi);
        let mut blk = sys.view_mut((r, offsets[a.head]), (block_rows, dh * dh));
        blk += left;
        let mut blk = sys.view_mut((r, offsets[a.tail]), (block_rows, dt * dt));
        blk -= right;
        r += block_rows;
    }
    unknowns - numerical_rank(&sys, tol)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NumericalKind {
    Stable,
    PolystableNotStable,
    NotPolystable,
    /// The trace condition fails, so no metric can exist.
    StructurallyUnsolvable,
}

impl NumericalKind {
    pub fn is_polystable(self) -> bool {
        matches!(self, NumericalKind::Stable | NumericalKind::PolystableNotStable)
    }
}

#[derive(Debug, Clone)]
pub struct NumericalVerdict {
    pub kind: NumericalKind,
    pub tau: TauParam,
    pub outcome: Option<FlowOutcome>,
    pub endomorphism_dim: Option<usize>,
}

/// Polystability through the point-level Hitchin-Kobayashi correspondence:
/// solvable vortex equations mean polystable, and a one-dimensional
/// endomorphism algebra on top of that means stable.
pub fn numerical_polystability(
    rep: &Representation,
    a: &StabilityParam,
    cfg: &FlowConfig,
    tol: RankTolerance,
) -> Result<NumericalVerdict, VortexError> {
    if rep.is_zero() {
        return Err(VortexError::ZeroRepresentation);
    }
    let tau = alpha_to_tau(&rep_type(rep), a)?;
    let outcome = match solve_flow(rep, &tau.to_f64(), cfg) {
        Ok(o) => o,
        Err(VortexError::TraceCondition(_)) => {
            return Ok(NumericalVerdict {
                kind: NumericalKind::StructurallyUnsolvable,
                tau,
                outcome: None,
                endomorphism_dim: None,
            })
        }
        Err(e) => return Err(e),
    };
    let (kind, endo) = if outcome.converged {
        let e = endomorphism_dim(rep, tol);
        (if e == 1 { NumericalKind::Stable } else { NumericalKind::PolystableNotStable }, Some(e))
    } else {
        (NumericalKind::NotPolystable, None)
    };
    Ok(NumericalVerdict { kind, tau, outcome: Some(outcome), endomorphism_dim: endo })
}

/// Exact metric for the chain `C -> C` with map `c` and `tau = (t, -t)`,
/// `t > 0`: `h_1 = 1`, `h_0 = t / |c|^2`. Blocks are in vertex order `0, 1`.
pub fn scalar_chain_metric(c: C64, t: f64) -> HermitianMetric {
    HermitianMetric {
        blocks: vec![
            CMat::from_element(1, 1, C64::new(t / c.norm_sqr(), 0.0)),
            CMat::from_element(1, 1, C64::new(1.0, 0.0)),
        ],
    }
}
