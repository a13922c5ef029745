//! The generalized Casimir operator `G = g^{ik} L_{ξ_i} L_{ξ_k}`, its
//! reduction to scalar operators on frame monomials, and eigen certificates.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::Serialize;
use serde_json::json;
use thiserror::Error;

use crate::expr::{is_zero, Expr, SampleBox, ZeroVerdict};
use crate::lie_algebra::StructureConstants;
use crate::split::{Frame, InvariantMetric, MuFactors};
use crate::tensor::{lie_derivative, Chart, FrameTag, TensorError, TensorField, VectorField};

pub const CONVENTION: &str =
    "lambda is the eigenvalue of G = g^{ik} L_i L_k; the form -G T = l(l+1) T corresponds to lambda = -l(l+1)";

#[derive(Debug, Error)]
pub enum CasimirError {
    #[error(transparent)]
    Tensor(#[from] TensorError),
    #[error("tensor frame `{0}` is not the operator's frame")]
    FrameIncompatible(String),
    #[error("operator has no mu-factors; attach a certified eigen-frame first")]
    MissingMu,
    #[error("metric is {0}x{0} but there are {1} generators")]
    MetricShape(usize, usize),
}

/// Linear differential operator `Σ_α c_α ∂^α`, keyed by sorted coordinate
/// multi-indices.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarOperator {
    pub coords: Vec<String>,
    pub terms: BTreeMap<Vec<usize>, Expr>,
}

impl ScalarOperator {
    pub fn zero(coords: &[String]) -> Self {
        ScalarOperator { coords: coords.to_vec(), terms: BTreeMap::new() }
    }

    /// Multiplication by `f`.
    pub fn multiplication(coords: &[String], f: Expr) -> Self {
        let mut op = ScalarOperator::zero(coords);
        op.push(vec![], f);
        op
    }

    pub fn from_vector(x: &VectorField) -> Self {
        let mut op = ScalarOperator::zero(&x.chart.coords);
        for (c, e) in x.components.iter().enumerate() {
            op.push(vec![c], e.clone());
        }
        op
    }

    fn push(&mut self, mut alpha: Vec<usize>, c: Expr) {
        if c.is_zero() {
            return;
        }
        alpha.sort_unstable();
        let slot = self.terms.entry(alpha.clone()).or_insert_with(Expr::zero);
        *slot = slot.clone() + c;
        if slot.is_zero() {
            self.terms.remove(&alpha);
        }
    }

    pub fn order(&self) -> usize {
        self.terms.keys().map(|k| k.len()).max().unwrap_or(0)
    }

    pub fn coefficient(&self, derivs: &[&str]) -> Expr {
        let mut alpha: Vec<usize> = derivs
            .iter()
            .map(|d| self.coords.iter().position(|c| c == d).expect("unknown coordinate"))
            .collect();
        alpha.sort_unstable();
        self.terms.get(&alpha).cloned().unwrap_or_else(Expr::zero)
    }

    pub fn add(&self, o: &ScalarOperator) -> ScalarOperator {
        let mut out = self.clone();
        for (a, c) in &o.terms {
            out.push(a.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, o: &ScalarOperator) -> ScalarOperator {
        self.add(&o.scale(&Expr::int(-1)))
    }

    /// Left multiplication of every coefficient by `f`.
    pub fn scale(&self, f: &Expr) -> ScalarOperator {
        let mut out = ScalarOperator::zero(&self.coords);
        for (a, c) in &self.terms {
            out.push(a.clone(), c * f);
        }
        out
    }

    fn derivative(&self, f: &Expr, alpha: &[usize]) -> Expr {
        alpha.iter().fold(f.clone(), |acc, &c| acc.diff(&self.coords[c]))
    }

    pub fn apply(&self, f: &Expr) -> Expr {
        let mut acc = Expr::zero();
        for (a, c) in &self.terms {
            let d = self.derivative(f, a);
            if !d.is_zero() {
                acc = acc + c * &d;
            }
        }
        acc
    }

    /// `self ∘ o`, expanding `∂^α (b ∂^β)` by the Leibniz rule.
    pub fn compose(&self, o: &ScalarOperator) -> ScalarOperator {
        let mut out = ScalarOperator::zero(&self.coords);
        for (alpha, a) in &self.terms {
            for (beta, b) in &o.terms {
                for mask in 0..(1usize << alpha.len()) {
                    let mut on_b = Vec::new();
                    let mut rest = beta.clone();
                    for (pos, &c) in alpha.iter().enumerate() {
                        if mask & (1 << pos) != 0 {
                            on_b.push(c);
                        } else {
                            rest.push(c);
                        }
                    }
                    let db = self.derivative(b, &on_b);
                    if !db.is_zero() {
                        out.push(rest, a * &db);
                    }
                }
            }
        }
        out
    }

    /// Coefficientwise zero verdict on `self - o`.
    pub fn difference_verdict(&self, o: &ScalarOperator, domain: &SampleBox) -> Result<ZeroVerdict, TensorError> {
        let mut acc = ZeroVerdict::SymbolicallyZero;
        for c in self.sub(o).terms.values() {
            acc = acc.and(is_zero(c, domain)?);
        }
        Ok(acc)
    }

    fn ordered_terms(&self) -> Vec<(&Vec<usize>, &Expr)> {
        let mut t: Vec<_> = self.terms.iter().collect();
        t.sort_by(|a, b| b.0.len().cmp(&a.0.len()).then(a.0.cmp(b.0)));
        t
    }

    pub fn to_json(&self) -> serde_json::Value {
        let terms: Vec<serde_json::Value> = self
            .ordered_terms()
            .into_iter()
            .map(|(a, c)| {
                json!({
                    "derivative": a.iter().map(|&i| self.coords[i].clone()).collect::<Vec<_>>(),
                    "coefficient": c.to_string(),
                })
            })
            .collect();
        json!({ "coords": self.coords, "terms": terms })
    }
}

impl fmt::Display for ScalarOperator {
    /// One term per line, highest order first: `(coefficient) ∂x ∂y`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (a, c)) in self.ordered_terms().into_iter().enumerate() {
            let sep = if k == 0 { "  " } else { "\n+ " };
            let d = if a.is_empty() {
                "1".to_string()
            } else {
                a.iter().map(|&i| format!("∂{}", self.coords[i])).collect::<Vec<_>>().join(" ")
            };
            write!(f, "{sep}({c}) {d}")?;
        }
        Ok(())
    }
}

/// Frame-leg indices of a tensor monomial: contravariant legs `upper`,
/// covariant legs `lower`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct MonomialLabel {
    pub upper: Vec<usize>,
    pub lower: Vec<usize>,
}

impl MonomialLabel {
    pub fn new(upper: &[usize], lower: &[usize]) -> Self {
        MonomialLabel { upper: upper.to_vec(), lower: lower.to_vec() }
    }

    pub fn of_component(t: &TensorField, flat: usize) -> Self {
        let idx = t.multi_index(flat);
        MonomialLabel { upper: idx[..t.upper].to_vec(), lower: idx[t.upper..].to_vec() }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EigenResult {
    pub lambda: String,
    pub residual: ZeroVerdict,
    pub components: Vec<ZeroVerdict>,
    pub convention: &'static str,
}

impl EigenResult {
    pub fn passed(&self) -> bool {
        self.residual.is_zero()
    }
}

#[derive(Debug, Clone)]
pub struct CasimirOperator {
    pub chart: Arc<Chart>,
    pub xi: Vec<VectorField>,
    pub sc: StructureConstants,
    pub metric: InvariantMetric,
    pub frame: Option<Frame>,
    pub mu: Option<MuFactors>,
}

impl CasimirOperator {
    pub fn new(xi: Vec<VectorField>, sc: StructureConstants, metric: InvariantMetric) -> Result<Self, CasimirError> {
        if metric.g_inv.rows != xi.len() {
            return Err(CasimirError::MetricShape(metric.g_inv.rows, xi.len()));
        }
        let chart = xi[0].chart.clone();
        Ok(CasimirOperator { chart, xi, sc, metric, frame: None, mu: None })
    }

    pub fn with_frame(mut self, frame: Frame, mu: MuFactors) -> Self {
        self.frame = Some(frame);
        self.mu = Some(mu);
        self
    }

    fn g(&self, i: usize, k: usize) -> &Expr {
        self.metric.g_inv.get(i, k)
    }

    /// `K = g^{ik} ξ_i ξ_k` on scalar functions.
    pub fn k_operator(&self) -> ScalarOperator {
        let ops: Vec<ScalarOperator> = self.xi.iter().map(ScalarOperator::from_vector).collect();
        let mut k = ScalarOperator::zero(&self.chart.coords);
        for i in 0..self.xi.len() {
            for j in 0..self.xi.len() {
                let g = self.g(i, j);
                if !g.is_zero() {
                    k = k.add(&ops[i].compose(&ops[j]).scale(g));
                }
            }
        }
        k
    }

    /// `g^{ik} L_{ξ_i} L_{ξ_k} T`; frame-indexed tensors go through the
    /// coordinate frame and back.
    pub fn apply_g(&self, t: &TensorField) -> Result<TensorField, CasimirError> {
        match &t.frame {
            FrameTag::Coordinate => self.apply_g_coordinate(t),
            FrameTag::Named(name) => {
                let f = self
                    .frame
                    .as_ref()
                    .filter(|f| &f.name == name)
                    .ok_or_else(|| CasimirError::FrameIncompatible(name.clone()))?;
                let out = self.apply_g_coordinate(&f.to_coordinate(t))?;
                Ok(f.to_frame(&out))
            }
        }
    }

    fn apply_g_coordinate(&self, t: &TensorField) -> Result<TensorField, CasimirError> {
        let r = self.xi.len();
        let first: Vec<TensorField> =
            self.xi.iter().map(|x| lie_derivative(x, t)).collect::<Result<_, _>>()?;
        let mut acc = t.map(|_| Expr::zero());
        for i in 0..r {
            for k in 0..r {
                let g = self.g(i, k);
                if g.is_zero() {
                    continue;
                }
                acc = acc.add(&lie_derivative(&self.xi[i], &first[k])?.scale(g));
            }
        }
        Ok(acc)
    }

    fn mu(&self) -> Result<&MuFactors, CasimirError> {
        self.mu.as_ref().ok_or(CasimirError::MissingMu)
    }

    /// `φ_i = Σ_{a∈A} μ^a_i − Σ_{b∈B} μ^b_i`, so that
    /// `L_{ξ_i}(T ê) = (ξ_i T − φ_i T) ê`.
    pub fn phi(&self, label: &MonomialLabel) -> Result<Vec<Expr>, CasimirError> {
        let mu = self.mu()?;
        Ok((0..self.xi.len())
            .map(|i| {
                let up = label.upper.iter().fold(Expr::zero(), |acc, &a| acc + mu.get(a, i).clone());
                label.lower.iter().fold(up, |acc, &b| acc - mu.get(b, i).clone())
            })
            .collect())
    }

    /// Shifted generator `ξ_i − φ_i` acting on the monomial coefficient.
    pub fn shifted_generator(&self, label: &MonomialLabel, i: usize) -> Result<ScalarOperator, CasimirError> {
        let phi = self.phi(label)?;
        let x = ScalarOperator::from_vector(&self.xi[i]);
        Ok(x.sub(&ScalarOperator::multiplication(&self.chart.coords, phi[i].clone())))
    }

    /// `K − 2 g^{ik} φ_i ξ_k − g^{ik} ξ_i(φ_k) + g^{ik} φ_i φ_k`.
    pub fn reduce_to_scalar(&self, label: &MonomialLabel) -> Result<ScalarOperator, CasimirError> {
        let phi = self.phi(label)?;
        let r = self.xi.len();
        let mut op = self.k_operator();
        let mut zeroth = Expr::zero();
        for i in 0..r {
            for k in 0..r {
                let g = self.g(i, k);
                if g.is_zero() {
                    continue;
                }
                if !phi[i].is_zero() {
                    let first = ScalarOperator::from_vector(&self.xi[k]).scale(&(g * &phi[i]).scale(&(-2).into()));
                    op = op.add(&first);
                    zeroth = zeroth + g * &(&phi[i] * &phi[k]);
                }
                let d = self.xi[i].apply(&phi[k]);
                if !d.is_zero() {
                    zeroth = zeroth - g * &d;
                }
            }
        }
        Ok(op.add(&ScalarOperator::multiplication(&self.chart.coords, zeroth)))
    }

    /// Applies the reduced operator of each component's label to that
    /// component of a frame-indexed tensor.
    pub fn apply_reduced(&self, t: &TensorField) -> Result<TensorField, CasimirError> {
        let mut cache: BTreeMap<MonomialLabel, ScalarOperator> = BTreeMap::new();
        let mut out = t.clone();
        for flat in 0..t.components.len() {
            if t.components[flat].is_zero() {
                continue;
            }
            let label = MonomialLabel::of_component(t, flat);
            if !cache.contains_key(&label) {
                cache.insert(label.clone(), self.reduce_to_scalar(&label)?);
            }
            out.components[flat] = cache[&label].apply(&t.components[flat]);
        }
        Ok(out)
    }

    /// Verdict on `apply_g(T) − apply_reduced(T)` for a frame tensor.
    pub fn reduction_consistency(&self, t: &TensorField, domain: &SampleBox) -> Result<ZeroVerdict, CasimirError> {
        let full = self.apply_g(t)?;
        let reduced = self.apply_reduced(t)?;
        Ok(full.sub(&reduced).zero_verdict(domain)?.0)
    }

    pub fn certify_eigen(&self, t: &TensorField, lambda: &Expr, domain: &SampleBox) -> Result<EigenResult, CasimirError> {
        let gt = self.apply_g(t)?;
        let (residual, components) = gt.sub(&t.scale(lambda)).zero_verdict(domain)?;
        Ok(EigenResult { lambda: lambda.to_string(), residual, components, convention: CONVENTION })
    }

    /// Verdict on `(G L_{ξ_j} − L_{ξ_j} G) T` for a coordinate tensor.
    pub fn check_g_commutes(&self, j: usize, t: &TensorField, domain: &SampleBox) -> Result<ZeroVerdict, CasimirError> {
        let a = self.apply_g(&lie_derivative(&self.xi[j], t)?)?;
        let b = lie_derivative(&self.xi[j], &self.apply_g(t)?)?;
        Ok(a.sub(&b).zero_verdict(domain)?.0)
    }

    /// Lie derivative along generator `i`, accepting the operator's frame.
    pub fn lie(&self, i: usize, t: &TensorField) -> Result<TensorField, CasimirError> {
        lie_along(&self.xi[i], self.frame.as_ref(), t)
    }
}

/// `L_X T`, routing frame tensors through the coordinate frame.
pub fn lie_along(x: &VectorField, frame: Option<&Frame>, t: &TensorField) -> Result<TensorField, CasimirError> {
    match &t.frame {
        FrameTag::Coordinate => Ok(lie_derivative(x, t)?),
        FrameTag::Named(name) => {
            let f = frame
                .filter(|f| &f.name == name)
                .ok_or_else(|| CasimirError::FrameIncompatible(name.clone()))?;
            Ok(f.to_frame(&lie_derivative(x, &f.to_coordinate(t))?))
        }
    }
}

/// Verdict on `L_X T − value·T`.
pub fn certify_lie_eigen(
    x: &VectorField,
    frame: Option<&Frame>,
    t: &TensorField,
    value: &Expr,
    domain: &SampleBox,
) -> Result<ZeroVerdict, CasimirError> {
    let l = lie_along(x, frame, t)?;
    Ok(l.sub(&t.scale(value)).zero_verdict(domain)?.0)
}
