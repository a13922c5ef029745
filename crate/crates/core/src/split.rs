//! Invariant frames, split projectors, μ-factors and invariant metrics.

use std::sync::Arc;

use num::{BigRational, Zero};
use thiserror::Error;

use crate::expr::{Coeff, Expr, SampleBox, ZeroVerdict};
use crate::lie_algebra::{algebraic_killing, ConstantMetric, MetricProvenance, StructureConstants};
use crate::matrix::ExprMatrix;
use crate::tensor::{lie_derivative, Chart, FrameTag, TensorError, TensorField, VectorField};

#[derive(Debug, Error)]
pub enum SplitError {
    #[error(transparent)]
    Tensor(#[from] TensorError),
    #[error("frame matrix is singular")]
    Singular,
    #[error("frame and coframe are not dual: {0:?}")]
    Duality(ZeroVerdict),
    #[error("covector e^{covector} is not an eigen-covector of generator {generator}: {verdict:?}")]
    NotEigenFrame { covector: usize, generator: usize, verdict: ZeroVerdict },
    #[error("group does not act simply transitively: {0}")]
    NotSimplyTransitive(String),
    #[error("no closed-form invariant frame under the exponential/polynomial ansatz; supply the frame explicitly")]
    NoClosedForm,
    #[error("{check} failed: {verdict:?}")]
    Verification { check: String, verdict: ZeroVerdict },
}

fn require(check: &str, verdict: ZeroVerdict) -> Result<ZeroVerdict, SplitError> {
    if verdict.is_zero() {
        Ok(verdict)
    } else {
        Err(SplitError::Verification { check: check.to_string(), verdict })
    }
}

fn matrix_verdict(m: &ExprMatrix, domain: &SampleBox) -> Result<ZeroVerdict, SplitError> {
    let mut acc = ZeroVerdict::SymbolicallyZero;
    for e in &m.data {
        acc = acc.and(crate::expr::is_zero(e, domain).map_err(TensorError::from)?);
    }
    Ok(acc)
}

/// Frame `{e_a}` with its dual coframe `{e^a}`.
#[derive(Debug, Clone)]
pub struct Frame {
    pub name: String,
    pub chart: Arc<Chart>,
    pub vectors: Vec<VectorField>,
    pub covectors: Vec<TensorField>,
    /// Verdict on `e^b(e_a) - δ^b_a`.
    pub duality: ZeroVerdict,
}

impl Frame {
    /// `V[i][a] = e_a^i`.
    pub fn vector_matrix(&self) -> ExprMatrix {
        let n = self.chart.dim();
        let mut m = ExprMatrix::zeros(n, n);
        for (a, v) in self.vectors.iter().enumerate() {
            for i in 0..n {
                m.set(i, a, v.components[i].clone());
            }
        }
        m
    }

    /// `E[a][i] = e^a_i`.
    pub fn covector_matrix(&self) -> ExprMatrix {
        ExprMatrix::from_rows(self.covectors.iter().map(|c| c.components.clone()).collect())
    }

    pub fn dim(&self) -> usize {
        self.vectors.len()
    }

    pub fn tag(&self) -> FrameTag {
        FrameTag::Named(self.name.clone())
    }

    pub fn new(
        name: &str,
        vectors: Vec<VectorField>,
        covectors: Vec<TensorField>,
        domain: &SampleBox,
    ) -> Result<Frame, SplitError> {
        let chart = vectors.first().ok_or(SplitError::Singular)?.chart.clone();
        if vectors.len() != chart.dim() || covectors.len() != chart.dim() {
            return Err(SplitError::Singular);
        }
        let mut f = Frame {
            name: name.to_string(),
            chart,
            vectors,
            covectors,
            duality: ZeroVerdict::SymbolicallyZero,
        };
        let pairing = f.covector_matrix().mul(&f.vector_matrix()).sub(&ExprMatrix::identity(f.dim()));
        let v = matrix_verdict(&pairing, domain)?;
        if !v.is_zero() {
            return Err(SplitError::Duality(v));
        }
        f.duality = v;
        Ok(f)
    }

    pub fn from_vectors(name: &str, vectors: Vec<VectorField>, domain: &SampleBox) -> Result<Frame, SplitError> {
        let chart = vectors.first().ok_or(SplitError::Singular)?.chart.clone();
        let n = chart.dim();
        let mut v = ExprMatrix::zeros(n, vectors.len());
        for (a, x) in vectors.iter().enumerate() {
            for i in 0..n {
                v.set(i, a, x.components[i].clone());
            }
        }
        if v.rows != v.cols {
            return Err(SplitError::Singular);
        }
        let e = v.inverse().ok_or(SplitError::Singular)?;
        let covectors = (0..n).map(|a| TensorField::one_form(chart.clone(), e.row(a))).collect();
        Frame::new(name, vectors, covectors, domain)
    }

    pub fn from_covectors(name: &str, covectors: Vec<TensorField>, domain: &SampleBox) -> Result<Frame, SplitError> {
        let chart = covectors.first().ok_or(SplitError::Singular)?.chart.clone();
        let e = ExprMatrix::from_rows(covectors.iter().map(|c| c.components.clone()).collect());
        if e.rows != e.cols {
            return Err(SplitError::Singular);
        }
        let v = e.inverse().ok_or(SplitError::Singular)?;
        let vectors = (0..e.rows)
            .map(|a| VectorField { chart: chart.clone(), components: (0..e.rows).map(|i| v.get(i, a).clone()).collect() })
            .collect();
        Frame::new(name, vectors, covectors, domain)
    }

    /// Re-expresses a frame-indexed tensor in the coordinate frame.
    pub fn to_coordinate(&self, t: &TensorField) -> TensorField {
        let v = self.vector_matrix();
        let e = self.covector_matrix();
        let mut out = t.clone();
        for slot in 0..t.rank() {
            // upper: T^i = e_a^i T^a ; lower: T_j = e^b_j T_b
            out = if slot < t.upper { transform_slot(&out, slot, &v) } else { transform_slot(&out, slot, &e.transpose()) };
        }
        out.frame = FrameTag::Coordinate;
        out
    }

    /// Re-expresses a coordinate tensor against this frame.
    pub fn to_frame(&self, t: &TensorField) -> TensorField {
        let v = self.vector_matrix();
        let e = self.covector_matrix();
        let mut out = t.clone();
        for slot in 0..t.rank() {
            out = if slot < t.upper { transform_slot(&out, slot, &e) } else { transform_slot(&out, slot, &v.transpose()) };
        }
        out.frame = self.tag();
        out
    }
}

/// `out[.., i, ..] = Σ_a m[i][a] t[.., a, ..]` on one slot.
fn transform_slot(t: &TensorField, slot: usize, m: &ExprMatrix) -> TensorField {
    let n = t.dim();
    let mut out = t.map(|_| Expr::zero());
    for flat in 0..t.components.len() {
        let idx = t.multi_index(flat);
        let mut j = idx.clone();
        let mut acc = Expr::zero();
        for a in 0..n {
            j[slot] = a;
            let c = t.get(&j);
            let w = m.get(idx[slot], a);
            if !c.is_zero() && !w.is_zero() {
                acc = acc + c * w;
            }
        }
        out.components[flat] = acc;
    }
    out
}

/// `H^a = e_a ⊗ e^a` as a coordinate (1,1) tensor.
#[derive(Debug, Clone)]
pub struct Projector {
    pub leg: usize,
    pub h: TensorField,
}

impl Projector {
    pub fn matrix(&self) -> ExprMatrix {
        let n = self.h.dim();
        ExprMatrix { rows: n, cols: n, data: self.h.components.clone() }
    }

    /// `(H X)^i = H^i_j X^j`.
    pub fn apply(&self, x: &VectorField) -> VectorField {
        let m = self.matrix();
        let n = m.rows;
        let components = (0..n)
            .map(|i| (0..n).fold(Expr::zero(), |acc, j| acc + m.get(i, j) * &x.components[j]))
            .collect();
        VectorField { chart: x.chart.clone(), components }
    }
}

#[derive(Debug, Clone)]
pub struct ProjectorSet {
    pub projectors: Vec<Projector>,
    /// Verdict on `H^a H^b - δ^{ab} H^b` over all pairs.
    pub orthogonality: ZeroVerdict,
    /// Verdict on `Σ_a H^a - I`.
    pub completeness: ZeroVerdict,
}

pub fn build_projectors(f: &Frame, domain: &SampleBox) -> Result<ProjectorSet, SplitError> {
    if !f.duality.is_zero() {
        return Err(SplitError::Duality(f.duality.clone()));
    }
    let projectors: Vec<Projector> = (0..f.dim())
        .map(|a| Projector { leg: a, h: f.vectors[a].to_tensor().outer(&f.covectors[a]) })
        .collect();
    let n = f.dim();
    let mut orth = ZeroVerdict::SymbolicallyZero;
    for a in 0..n {
        for b in 0..n {
            let prod = projectors[a].matrix().mul(&projectors[b].matrix());
            let want = if a == b { projectors[b].matrix() } else { ExprMatrix::zeros(n, n) };
            orth = orth.and(matrix_verdict(&prod.sub(&want), domain)?);
        }
    }
    let sum = projectors.iter().fold(ExprMatrix::zeros(n, n), |acc, p| acc.add(&p.matrix()));
    let complete = matrix_verdict(&sum.sub(&ExprMatrix::identity(n)), domain)?;
    let orthogonality = require("projector orthogonality", orth)?;
    let completeness = require("projector completeness", complete)?;
    Ok(ProjectorSet { projectors, orthogonality, completeness })
}

/// Verdicts on `L_{ξ_i} H^a` for every generator and leg.
pub fn projector_invariance(
    set: &ProjectorSet,
    xi: &[VectorField],
    domain: &SampleBox,
) -> Result<ZeroVerdict, SplitError> {
    let mut acc = ZeroVerdict::SymbolicallyZero;
    for x in xi {
        for p in &set.projectors {
            let (v, _) = lie_derivative(x, &p.h)?.zero_verdict(domain)?;
            acc = acc.and(v);
        }
    }
    Ok(acc)
}

/// Factors `μ[a][i]` with `L_{ξ_i} e^a = μ^a_i e^a`.
#[derive(Debug, Clone)]
pub struct MuFactors {
    pub mu: Vec<Vec<Expr>>,
    pub integrability: ZeroVerdict,
    pub dual_action: ZeroVerdict,
}

impl MuFactors {
    pub fn get(&self, covector: usize, generator: usize) -> &Expr {
        &self.mu[covector][generator]
    }

    pub fn is_trivial(&self) -> bool {
        self.mu.iter().flatten().all(|m| m.is_zero())
    }
}

pub fn compute_mu(
    f: &Frame,
    xi: &[VectorField],
    sc: &StructureConstants,
    domain: &SampleBox,
) -> Result<MuFactors, SplitError> {
    let n = f.dim();
    let r = xi.len();
    let mut mu = vec![vec![Expr::zero(); r]; n];
    for a in 0..n {
        let ea = &f.covectors[a];
        let c = ea.components.iter().position(|e| !e.is_zero()).ok_or(SplitError::Singular)?;
        for i in 0..r {
            let l = lie_derivative(&xi[i], ea)?;
            let m = &l.components[c] * &ea.components[c].recip();
            let (v, _) = l.sub(&ea.scale(&m)).zero_verdict(domain)?;
            if !v.is_zero() {
                return Err(SplitError::NotEigenFrame { covector: a + 1, generator: i + 1, verdict: v });
            }
            mu[a][i] = m;
        }
    }
    let mut integ = ZeroVerdict::SymbolicallyZero;
    for a in 0..n {
        for i in 0..r {
            for k in 0..r {
                let mut e = xi[i].apply(&mu[a][k]) - xi[k].apply(&mu[a][i]);
                for (j, m) in mu[a].iter().enumerate() {
                    let c = sc.get(j, i, k);
                    if !c.is_zero() {
                        e = e - m.scale(&Coeff::real(c.clone()));
                    }
                }
                integ = integ.and(crate::expr::is_zero(&e, domain).map_err(TensorError::from)?);
            }
        }
    }
    let mut dual = ZeroVerdict::SymbolicallyZero;
    for a in 0..n {
        for i in 0..r {
            let l = lie_derivative(&xi[i], &f.vectors[a].to_tensor())?;
            let (v, _) = l.add(&f.vectors[a].to_tensor().scale(&mu[a][i])).zero_verdict(domain)?;
            dual = dual.and(v);
        }
    }
    Ok(MuFactors {
        mu,
        integrability: require("mu integrability", integ)?,
        dual_action: require("dual mu action", dual)?,
    })
}

/// Solution `L[b][a]` of the invariance equations with `e_a = L^b_a ξ_b`.
#[derive(Debug, Clone)]
pub struct FrameSolution {
    pub l: ExprMatrix,
    pub det: Expr,
    pub invariance: ZeroVerdict,
    pub xi: Vec<VectorField>,
    pub sc: StructureConstants,
}

/// `(C_b)^a_q = C^a_{bq}`.
fn adjoint_matrix(sc: &StructureConstants, b: usize) -> ExprMatrix {
    let r = sc.dim();
    let mut m = ExprMatrix::zeros(r, r);
    for a in 0..r {
        for q in 0..r {
            let c = sc.get(a, b, q);
            if !c.is_zero() {
                m.set(a, q, Expr::constant(Coeff::real(c.clone())));
            }
        }
    }
    m
}

fn generator_matrix(xi: &[VectorField]) -> ExprMatrix {
    ExprMatrix::from_rows(xi.iter().map(|x| x.components.clone()).collect())
}

/// Verdict on `ξ_b L^a_d + C^a_{bq} L^q_d` for all indices.
pub fn invariance_verdict(
    l: &ExprMatrix,
    xi: &[VectorField],
    sc: &StructureConstants,
    domain: &SampleBox,
) -> Result<ZeroVerdict, SplitError> {
    let mut acc = ZeroVerdict::SymbolicallyZero;
    for (b, x) in xi.iter().enumerate() {
        let res = l.map(|e| x.apply(e)).add(&adjoint_matrix(sc, b).mul(l));
        acc = acc.and(matrix_verdict(&res, domain)?);
    }
    Ok(acc)
}

fn base_point(lo: f64, hi: f64) -> Expr {
    if lo <= 0.0 && 0.0 <= hi {
        return Expr::zero();
    }
    let mid = ((lo + hi) * 4.0).round() as i64;
    Expr::ratio(mid, 8)
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out.sort();
    out
}

fn step_exponential(a: &ExprMatrix) -> Option<ExprMatrix> {
    if a.is_diagonal() {
        let mut e = ExprMatrix::identity(a.rows);
        for i in 0..a.rows {
            e.set(i, i, Expr::exp(a.get(i, i).clone()));
        }
        return Some(e);
    }
    a.exp_nilpotent()
}

/// Integrates `∂_j L = -M_j L`, `M_j = Σ_b (Ξ^{-1})_j^b C_b`, one coordinate
/// axis at a time from a base point, trying every axis order until each
/// step has a closed-form exponential and the result satisfies the
/// invariance equations.
pub fn solve_invariant_frame(
    sc: &StructureConstants,
    xi: &[VectorField],
    domain: &SampleBox,
) -> Result<(FrameSolution, Frame), SplitError> {
    let chart = xi.first().ok_or_else(|| SplitError::NotSimplyTransitive("no generators".into()))?.chart.clone();
    let n = chart.dim();
    if xi.len() != n || sc.dim() != n {
        return Err(SplitError::NotSimplyTransitive(format!(
            "{} generators on a {}-dimensional chart",
            xi.len(),
            n
        )));
    }
    let big_xi = generator_matrix(xi);
    let det_xi = big_xi.det();
    for k in 0..crate::expr::SAMPLE_COUNT {
        let env = domain.point(k, &chart.params);
        let v = det_xi.eval(&env).map_err(|_| SplitError::NotSimplyTransitive("generator matrix undefined".into()))?;
        if v.norm() < 1e-12 {
            return Err(SplitError::NotSimplyTransitive("generators are linearly dependent at a sample point".into()));
        }
    }
    let w = big_xi.inverse().ok_or_else(|| SplitError::NotSimplyTransitive("singular generator matrix".into()))?;
    let ms: Vec<ExprMatrix> = (0..n)
        .map(|j| {
            (0..n).fold(ExprMatrix::zeros(n, n), |acc, b| {
                let wjb = w.get(j, b);
                if wjb.is_zero() {
                    acc
                } else {
                    acc.add(&adjoint_matrix(sc, b).scale(wjb))
                }
            })
        })
        .collect();
    let x0: Vec<Expr> = chart.domain.iter().map(|(lo, hi)| base_point(*lo, *hi)).collect();

    'orders: for order in permutations(n) {
        let mut l = ExprMatrix::identity(n);
        for (step, &j) in order.iter().enumerate() {
            let mut m = ms[j].clone();
            for &later in &order[step + 1..] {
                m = m.map(|e| e.subst(&chart.coords[later], &x0[later]));
            }
            if m.data.iter().any(|e| e.depends_on(&chart.coords[j])) {
                continue 'orders;
            }
            let t = chart.coord(j) - x0[j].clone();
            let a = m.scale(&(-t));
            match step_exponential(&a) {
                Some(e) => l = e.mul(&l),
                None => continue 'orders,
            }
        }
        let verdict = invariance_verdict(&l, xi, sc, domain)?;
        if !verdict.is_zero() {
            continue;
        }
        let det = l.det();
        if det.is_zero() {
            continue;
        }
        let vectors: Vec<VectorField> = (0..n)
            .map(|a| {
                (0..n).fold(VectorField::zero(chart.clone()), |acc, b| acc.add(&xi[b].scale(l.get(b, a))))
            })
            .collect();
        let frame = Frame::from_vectors("invariant", vectors, domain)?;
        let sol = FrameSolution { l, det, invariance: verdict, xi: xi.to_vec(), sc: sc.clone() };
        return Ok((sol, frame));
    }
    Err(SplitError::NoClosedForm)
}

/// Contravariant metric `g^{ik}` in the generator basis with its Killing
/// certificate per generator.
#[derive(Debug, Clone)]
pub struct InvariantMetric {
    pub g_inv: ExprMatrix,
    pub rank: usize,
    pub provenance: MetricProvenance,
    pub killing: Vec<ZeroVerdict>,
}

impl InvariantMetric {
    pub fn is_constant(&self) -> bool {
        self.g_inv.data.iter().all(|e| e.as_constant().is_some())
    }

    /// Coordinate components `g^{ab} = g^{ik} ξ_i^a ξ_k^b`.
    pub fn coordinate_inverse(&self, xi: &[VectorField]) -> ExprMatrix {
        let x = generator_matrix(xi);
        x.transpose().mul(&self.g_inv).mul(&x)
    }

    /// The metric as a (2,0) tensor tagged with the generator basis.
    pub fn to_tensor(&self, chart: Arc<Chart>) -> Option<TensorField> {
        if self.g_inv.rows != chart.dim() {
            return None;
        }
        TensorField::new(chart, 2, 0, FrameTag::Named("generators".into()), self.g_inv.data.clone()).ok()
    }
}

/// Verdicts on `ξ_j g^{ik} + C^i_{jl} g^{lk} + C^k_{jl} g^{il}` per generator `j`.
pub fn killing_verdicts(
    g: &ExprMatrix,
    xi: &[VectorField],
    sc: &StructureConstants,
    domain: &SampleBox,
) -> Result<Vec<ZeroVerdict>, SplitError> {
    let r = sc.dim();
    let mut out = Vec::with_capacity(r);
    for (j, x) in xi.iter().enumerate() {
        let cj = adjoint_matrix(sc, j);
        // C^i_{jl} g^{lk} = (C_j g)^{ik}; C^k_{jl} g^{il} = (g C_j^T)^{ik}
        let res = g.map(|e| x.apply(e)).add(&cj.mul(g)).add(&g.mul(&cj.transpose()));
        out.push(matrix_verdict(&res, domain)?);
    }
    Ok(out)
}

pub fn build_invariant_metric(fs: &FrameSolution, domain: &SampleBox) -> Result<InvariantMetric, SplitError> {
    let g = fs.l.mul(&fs.l.transpose());
    let killing = killing_verdicts(&g, &fs.xi, &fs.sc, domain)?;
    if let Some(bad) = killing.iter().find(|v| !v.is_zero()) {
        return Err(SplitError::Verification { check: "Killing condition".into(), verdict: bad.clone() });
    }
    Ok(InvariantMetric { rank: g.rows, g_inv: g, provenance: MetricProvenance::FrameBuilt, killing })
}

/// Lifts a constant algebra metric (Cartan inverse or user supplied) and
/// certifies it against the realized generators.
pub fn constant_invariant_metric(
    m: &ConstantMetric,
    xi: &[VectorField],
    sc: &StructureConstants,
    domain: &SampleBox,
) -> Result<InvariantMetric, SplitError> {
    let r = m.g_inv.n;
    let mut g = ExprMatrix::zeros(r, r);
    for i in 0..r {
        for k in 0..r {
            let c: &BigRational = m.g_inv.get(i, k);
            if !c.is_zero() {
                g.set(i, k, Expr::constant(Coeff::real(c.clone())));
            }
        }
    }
    if !algebraic_killing(sc, &m.g_inv) {
        return Err(SplitError::Verification {
            check: "algebraic Killing condition".into(),
            verdict: ZeroVerdict::Nonzero { witness: vec![], value_re: f64::NAN, value_im: 0.0 },
        });
    }
    let killing = killing_verdicts(&g, xi, sc, domain)?;
    Ok(InvariantMetric { g_inv: g, rank: m.g_inv.rank(), provenance: m.provenance, killing })
}

/// Reassembly check: `Σ_a H^a X = X` and `e^a(H^b X) = 0` for `a ≠ b`.
pub fn decomposition_verdict(
    f: &Frame,
    set: &ProjectorSet,
    x: &VectorField,
    domain: &SampleBox,
) -> Result<ZeroVerdict, SplitError> {
    let n = f.dim();
    let parts: Vec<VectorField> = set.projectors.iter().map(|p| p.apply(x)).collect();
    let sum = parts.iter().fold(VectorField::zero(x.chart.clone()), |acc, p| acc.add(p));
    let (mut acc, _) = sum.sub(x).to_tensor().zero_verdict(domain)?;
    for a in 0..n {
        for (b, part) in parts.iter().enumerate() {
            if a == b {
                continue;
            }
            let pairing = f.covectors[a]
                .components
                .iter()
                .zip(&part.components)
                .fold(Expr::zero(), |s, (w, v)| s + w * v);
            acc = acc.and(crate::expr::is_zero(&pairing, domain).map_err(TensorError::from)?);
        }
    }
    Ok(acc)
}
