//! Charts, vector fields and type-(p,q) tensor fields with Lie derivatives.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{is_zero, Coeff, parse_with, Expr, ParseError, SampleBox, UndefinedPoint, ZeroVerdict};
use crate::lie_algebra::StructureConstants;

#[derive(Debug, Error)]
pub enum TensorError {
    #[error("fields live on different charts (`{0}` vs `{1}`)")]
    ChartMismatch(String, String),
    #[error("tensor is in frame `{0}`; expected the coordinate frame")]
    FrameMismatch(String),
    #[error("expected {expected} components, got {got}")]
    Shape { expected: usize, got: usize },
    #[error(transparent)]
    Undefined(#[from] UndefinedPoint),
    #[error(transparent)]
    Parse(#[from] ParseError),
}

/// Local coordinate patch with a sampling box and constant parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Chart {
    pub name: String,
    pub coords: Vec<String>,
    /// Open interval per coordinate used for numeric sampling.
    pub domain: Vec<(f64, f64)>,
    /// Expressions that must stay nonzero on the domain, as strings.
    #[serde(default)]
    pub singular_loci: Vec<String>,
    /// Constant symbols allowed in expressions (amplitudes, labels).
    #[serde(default)]
    pub params: Vec<String>,
}

impl Chart {
    pub fn new(name: &str, coords: &[&str], domain: &[(f64, f64)]) -> Self {
        Chart {
            name: name.to_string(),
            coords: coords.iter().map(|s| s.to_string()).collect(),
            domain: domain.to_vec(),
            singular_loci: Vec::new(),
            params: Vec::new(),
        }
    }

    pub fn with_params(mut self, params: &[&str]) -> Self {
        for p in params {
            if !self.params.iter().any(|q| q == p) {
                self.params.push(p.to_string());
            }
        }
        self
    }

    pub fn with_singular(mut self, loci: &[&str]) -> Self {
        self.singular_loci.extend(loci.iter().map(|s| s.to_string()));
        self
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coord(&self, i: usize) -> Expr {
        Expr::sym(&self.coords[i])
    }

    pub fn sample_box(&self, seed: u64) -> SampleBox {
        SampleBox::new(
            self.coords
                .iter()
                .zip(&self.domain)
                .map(|(c, (lo, hi))| (c.clone(), *lo, *hi))
                .collect(),
        )
        .with_seed(seed)
    }

    pub fn parse(&self, text: &str) -> Result<Expr, ParseError> {
        let coords: Vec<&str> = self.coords.iter().map(|s| s.as_str()).collect();
        let params: Vec<&str> = self.params.iter().map(|s| s.as_str()).collect();
        parse_with(text, &coords, &params)
    }

    /// Checks that coordinate names are unique and the singular loci stay
    /// away from zero at every sample point.
    pub fn validate(&self, seed: u64) -> Result<(), String> {
        for (i, a) in self.coords.iter().enumerate() {
            if self.coords[i + 1..].contains(a) {
                return Err(format!("duplicate coordinate `{a}`"));
            }
        }
        if self.domain.len() != self.coords.len() {
            return Err("domain box must list one interval per coordinate".into());
        }
        let b = self.sample_box(seed);
        for locus in &self.singular_loci {
            let e = self.parse(locus).map_err(|e| e.to_string())?;
            for k in 0..crate::expr::SAMPLE_COUNT {
                let env = b.point(k, &self.params);
                let v = e.eval(&env).map_err(|e| e.to_string())?;
                if v.norm() < 1e-12 {
                    return Err(format!("singular locus `{locus}` vanishes inside the domain box"));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FrameTag {
    Coordinate,
    Named(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    pub chart: Arc<Chart>,
    pub components: Vec<Expr>,
}

impl VectorField {
    pub fn new(chart: Arc<Chart>, components: Vec<Expr>) -> Result<Self, TensorError> {
        if components.len() != chart.dim() {
            return Err(TensorError::Shape { expected: chart.dim(), got: components.len() });
        }
        Ok(VectorField { chart, components })
    }

    pub fn parse(chart: Arc<Chart>, comps: &[&str]) -> Result<Self, TensorError> {
        let components = comps.iter().map(|s| chart.parse(s)).collect::<Result<Vec<_>, _>>()?;
        VectorField::new(chart, components)
    }

    pub fn zero(chart: Arc<Chart>) -> Self {
        let n = chart.dim();
        VectorField { chart, components: vec![Expr::zero(); n] }
    }

    /// `X f = X^c ∂_c f`.
    pub fn apply(&self, f: &Expr) -> Expr {
        let mut acc = Expr::zero();
        for (c, xc) in self.components.iter().enumerate() {
            if xc.is_zero() {
                continue;
            }
            let d = f.diff(&self.chart.coords[c]);
            if !d.is_zero() {
                acc = acc + xc * &d;
            }
        }
        acc
    }

    pub fn scale(&self, s: &Expr) -> VectorField {
        VectorField {
            chart: self.chart.clone(),
            components: self.components.iter().map(|c| c * s).collect(),
        }
    }

    pub fn add(&self, o: &VectorField) -> VectorField {
        VectorField {
            chart: self.chart.clone(),
            components: self.components.iter().zip(&o.components).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, o: &VectorField) -> VectorField {
        VectorField {
            chart: self.chart.clone(),
            components: self.components.iter().zip(&o.components).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(|c| c.is_zero())
    }

    pub fn to_tensor(&self) -> TensorField {
        TensorField {
            chart: self.chart.clone(),
            upper: 1,
            lower: 0,
            frame: FrameTag::Coordinate,
            components: self.components.clone(),
        }
    }
}

fn same_chart(a: &Chart, b: &Chart) -> Result<(), TensorError> {
    if a.name != b.name || a.coords != b.coords {
        return Err(TensorError::ChartMismatch(a.name.clone(), b.name.clone()));
    }
    Ok(())
}

/// `[X, Y]^a = X^c ∂_c Y^a - Y^c ∂_c X^a`.
pub fn lie_bracket(x: &VectorField, y: &VectorField) -> Result<VectorField, TensorError> {
    same_chart(&x.chart, &y.chart)?;
    let components = (0..x.chart.dim())
        .map(|a| x.apply(&y.components[a]) - y.apply(&x.components[a]))
        .collect();
    Ok(VectorField { chart: x.chart.clone(), components })
}

/// Tensor with `upper` contravariant and `lower` covariant slots, components
/// stored row-major over `(a1..ap, b1..bq)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorField {
    pub chart: Arc<Chart>,
    pub upper: usize,
    pub lower: usize,
    pub frame: FrameTag,
    pub components: Vec<Expr>,
}

impl TensorField {
    pub fn new(
        chart: Arc<Chart>,
        upper: usize,
        lower: usize,
        frame: FrameTag,
        components: Vec<Expr>,
    ) -> Result<Self, TensorError> {
        let expected = chart.dim().pow((upper + lower) as u32);
        if components.len() != expected {
            return Err(TensorError::Shape { expected, got: components.len() });
        }
        Ok(TensorField { chart, upper, lower, frame, components })
    }

    pub fn zeros(chart: Arc<Chart>, upper: usize, lower: usize, frame: FrameTag) -> Self {
        let n = chart.dim().pow((upper + lower) as u32);
        TensorField { chart, upper, lower, frame, components: vec![Expr::zero(); n] }
    }

    pub fn scalar(chart: Arc<Chart>, f: Expr) -> Self {
        TensorField { chart, upper: 0, lower: 0, frame: FrameTag::Coordinate, components: vec![f] }
    }

    pub fn one_form(chart: Arc<Chart>, comps: Vec<Expr>) -> Self {
        TensorField { chart, upper: 0, lower: 1, frame: FrameTag::Coordinate, components: comps }
    }

    pub fn rank(&self) -> usize {
        self.upper + self.lower
    }

    pub fn dim(&self) -> usize {
        self.chart.dim()
    }

    /// Splits a flat index into its slot indices.
    pub fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        let n = self.dim();
        let mut idx = vec![0; self.rank()];
        for slot in (0..self.rank()).rev() {
            idx[slot] = flat % n;
            flat /= n;
        }
        idx
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        let n = self.dim();
        idx.iter().fold(0, |acc, &i| acc * n + i)
    }

    pub fn get(&self, idx: &[usize]) -> &Expr {
        &self.components[self.flat_index(idx)]
    }

    pub fn map(&self, f: impl Fn(&Expr) -> Expr) -> TensorField {
        TensorField { components: self.components.iter().map(f).collect(), ..self.clone() }
    }

    pub fn scale(&self, s: &Expr) -> TensorField {
        self.map(|c| c * s)
    }

    pub fn add(&self, o: &TensorField) -> TensorField {
        TensorField {
            components: self.components.iter().zip(&o.components).map(|(a, b)| a + b).collect(),
            ..self.clone()
        }
    }

    pub fn sub(&self, o: &TensorField) -> TensorField {
        TensorField {
            components: self.components.iter().zip(&o.components).map(|(a, b)| a - b).collect(),
            ..self.clone()
        }
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(|c| c.is_zero())
    }

    /// Outer product; upper slots of `self` then `o`, then lower slots of
    /// `self` then `o`.
    pub fn outer(&self, o: &TensorField) -> TensorField {
        let upper = self.upper + o.upper;
        let lower = self.lower + o.lower;
        let mut out = TensorField::zeros(self.chart.clone(), upper, lower, self.frame.clone());
        for (fa, a) in self.components.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            let ia = self.multi_index(fa);
            for (fb, b) in o.components.iter().enumerate() {
                if b.is_zero() {
                    continue;
                }
                let ib = o.multi_index(fb);
                let mut idx = Vec::with_capacity(upper + lower);
                idx.extend_from_slice(&ia[..self.upper]);
                idx.extend_from_slice(&ib[..o.upper]);
                idx.extend_from_slice(&ia[self.upper..]);
                idx.extend_from_slice(&ib[o.upper..]);
                let f = out.flat_index(&idx);
                out.components[f] = a * b;
            }
        }
        out
    }

    /// Componentwise zero test; returns the combined verdict and per-component
    /// verdicts (flat index order).
    pub fn zero_verdict(&self, domain: &SampleBox) -> Result<(ZeroVerdict, Vec<ZeroVerdict>), TensorError> {
        let mut all = Vec::with_capacity(self.components.len());
        let mut acc = ZeroVerdict::SymbolicallyZero;
        for c in &self.components {
            let v = is_zero(c, domain)?;
            acc = acc.and(v.clone());
            all.push(v);
        }
        Ok((acc, all))
    }
}

/// Lie derivative of a coordinate-frame tensor:
/// `X^c ∂_c T^A_B + Σ T^A_{..c..} ∂_{b} X^c - Σ T^{..c..}_B ∂_c X^a`.
pub fn lie_derivative(x: &VectorField, t: &TensorField) -> Result<TensorField, TensorError> {
    same_chart(&x.chart, &t.chart)?;
    if let FrameTag::Named(n) = &t.frame {
        return Err(TensorError::FrameMismatch(n.clone()));
    }
    let n = t.dim();
    let coords = &t.chart.coords;
    // dx[a][c] = ∂_c X^a
    let dx: Vec<Vec<Expr>> = x
        .components
        .iter()
        .map(|xa| coords.iter().map(|c| xa.diff(c)).collect())
        .collect();
    let mut out = Vec::with_capacity(t.components.len());
    for flat in 0..t.components.len() {
        let idx = t.multi_index(flat);
        let mut acc = x.apply(&t.components[flat]);
        for slot in 0..t.rank() {
            let mut j = idx.clone();
            for c in 0..n {
                j[slot] = c;
                let tc = t.get(&j);
                if tc.is_zero() {
                    continue;
                }
                if slot < t.upper {
                    let d = &dx[idx[slot]][c];
                    if !d.is_zero() {
                        acc = acc - tc * d;
                    }
                } else {
                    let d = &dx[c][idx[slot]];
                    if !d.is_zero() {
                        acc = acc + tc * d;
                    }
                }
            }
        }
        out.push(acc);
    }
    Ok(TensorField { components: out, ..t.clone() })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairVerdict {
    /// 1-based generator indices.
    pub i: usize,
    pub j: usize,
    pub verdict: ZeroVerdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealizationReport {
    pub pairs: Vec<PairVerdict>,
}

impl RealizationReport {
    pub fn all_zero(&self) -> bool {
        self.pairs.iter().all(|p| p.verdict.is_zero())
    }

    pub fn all_symbolic(&self) -> bool {
        self.pairs.iter().all(|p| p.verdict.is_symbolic())
    }
}

/// Checks `[ξ_i, ξ_j] = C^k_{ij} ξ_k` for every pair `i < j`.
pub fn verify_realization(
    fields: &[VectorField],
    sc: &StructureConstants,
    domain: &SampleBox,
) -> Result<RealizationReport, TensorError> {
    if fields.len() != sc.dim() {
        return Err(TensorError::Shape { expected: sc.dim(), got: fields.len() });
    }
    let chart = fields[0].chart.clone();
    let mut pairs = Vec::new();
    for i in 0..fields.len() {
        for j in i + 1..fields.len() {
            let mut diff = lie_bracket(&fields[i], &fields[j])?;
            for (k, xk) in fields.iter().enumerate() {
                let c = sc.get(k, i, j);
                if !num::Zero::is_zero(c) {
                    diff = diff.sub(&xk.scale(&Expr::constant(c.clone().into())));
                }
            }
            let tensor = TensorField { chart: chart.clone(), ..diff.to_tensor() };
            let (verdict, _) = tensor.zero_verdict(domain)?;
            pairs.push(PairVerdict { i: i + 1, j: j + 1, verdict });
        }
    }
    Ok(RealizationReport { pairs })
}

/// Verdict on `(L_X L_Y - L_Y L_X - L_[X,Y]) T`.
pub fn check_lie_commutator(
    x: &VectorField,
    y: &VectorField,
    t: &TensorField,
    domain: &SampleBox,
) -> Result<ZeroVerdict, TensorError> {
    let xy = lie_derivative(x, &lie_derivative(y, t)?)?;
    let yx = lie_derivative(y, &lie_derivative(x, t)?)?;
    let br = lie_derivative(&lie_bracket(x, y)?, t)?;
    let (v, _) = xy.sub(&yx).sub(&br).zero_verdict(domain)?;
    Ok(v)
}

/// Polynomial of degree at most 2 in the chart coordinates with small
/// rational coefficients.
pub fn random_polynomial(chart: &Chart, rng: &mut ChaCha8Rng) -> Expr {
    let n = chart.dim();
    let mut acc = Expr::zero();
    let coeff = |rng: &mut ChaCha8Rng| Coeff::ratio(rng.gen_range(-4..=4), rng.gen_range(1..=3));
    acc = acc + Expr::constant(coeff(rng));
    for i in 0..n {
        acc = acc + chart.coord(i).scale(&coeff(rng));
        for j in i..n {
            acc = acc + (&chart.coord(i) * &chart.coord(j)).scale(&coeff(rng));
        }
    }
    acc
}

/// Coordinate-frame tensor of type (p,q) with random polynomial components.
pub fn random_tensor(chart: Arc<Chart>, upper: usize, lower: usize, seed: u64) -> TensorField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = chart.dim().pow((upper + lower) as u32);
    let components = (0..n).map(|_| random_polynomial(&chart, &mut rng)).collect();
    TensorField { chart, upper, lower, frame: FrameTag::Coordinate, components }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plane() -> Arc<Chart> {
        Arc::new(Chart::new("plane", &["x", "y"], &[(-1.0, 1.0), (-1.0, 1.0)]))
    }

    #[test]
    fn bracket_with_itself_vanishes() {
        let c = plane();
        let x = VectorField::parse(c, &["x*y", "sin(x)"]).unwrap();
        assert!(lie_bracket(&x, &x).unwrap().is_zero());
    }

    #[test]
    fn lie_derivative_of_function_is_directional() {
        let c = plane();
        let x = VectorField::parse(c.clone(), &["y", "x^2"]).unwrap();
        let f = c.parse("x*y^2").unwrap();
        let l = lie_derivative(&x, &TensorField::scalar(c, f.clone())).unwrap();
        assert_eq!(l.components[0], x.apply(&f));
    }

    #[test]
    fn lie_derivative_of_constant_is_zero() {
        let c = plane();
        let x = VectorField::parse(c.clone(), &["y", "x^2"]).unwrap();
        let l = lie_derivative(&x, &TensorField::scalar(c, Expr::one())).unwrap();
        assert!(l.is_zero());
    }

    #[test]
    fn lie_derivative_of_vector_is_bracket() {
        let c = plane();
        let x = VectorField::parse(c.clone(), &["y", "x^2"]).unwrap();
        let y = VectorField::parse(c, &["x*y", "1"]).unwrap();
        let l = lie_derivative(&x, &y.to_tensor()).unwrap();
        assert_eq!(l.components, lie_bracket(&x, &y).unwrap().components);
    }

    #[test]
    fn one_form_rule_matches_pairing_identity() {
        // (L_X ω)(Z) = X(ω(Z)) - ω([X, Z])
        let c = plane();
        let x = VectorField::parse(c.clone(), &["y^2", "x"]).unwrap();
        let z = VectorField::parse(c.clone(), &["1", "x*y"]).unwrap();
        let w = TensorField::one_form(c.clone(), vec![c.parse("x").unwrap(), c.parse("y^2").unwrap()]);
        let lw = lie_derivative(&x, &w).unwrap();
        let pair = |om: &TensorField, v: &VectorField| -> Expr {
            om.components.iter().zip(&v.components).fold(Expr::zero(), |a, (p, q)| a + p * q)
        };
        let lhs = pair(&lw, &z);
        let rhs = x.apply(&pair(&w, &z)) - pair(&w, &lie_bracket(&x, &z).unwrap());
        assert!((lhs - rhs).is_zero());
    }

    #[test]
    fn frame_tensors_are_rejected() {
        let c = plane();
        let x = VectorField::parse(c.clone(), &["1", "0"]).unwrap();
        let t = TensorField::zeros(c, 0, 1, FrameTag::Named("e".into()));
        assert!(matches!(lie_derivative(&x, &t), Err(TensorError::FrameMismatch(_))));
    }

    #[test]
    fn abelian_commutator_vanishes() {
        let c = plane();
        let x = VectorField::parse(c.clone(), &["1", "0"]).unwrap();
        let y = VectorField::parse(c.clone(), &["0", "1"]).unwrap();
        let t = TensorField::new(
            c.clone(),
            1,
            1,
            FrameTag::Coordinate,
            ["x*y", "x^2", "y", "1+x"].iter().map(|s| c.parse(s).unwrap()).collect(),
        )
        .unwrap();
        let v = check_lie_commutator(&x, &y, &t, &c.sample_box(0)).unwrap();
        assert!(v.is_symbolic());
        let xy = lie_derivative(&x, &lie_derivative(&y, &t).unwrap()).unwrap();
        let yx = lie_derivative(&y, &lie_derivative(&x, &t).unwrap()).unwrap();
        assert_eq!(xy, yx);
    }

    #[test]
    fn chart_mismatch_is_reported() {
        let a = plane();
        let b = Arc::new(Chart::new("other", &["u", "w"], &[(0.0, 1.0), (0.0, 1.0)]));
        let x = VectorField::parse(a, &["1", "0"]).unwrap();
        let y = VectorField::parse(b, &["1", "0"]).unwrap();
        assert!(matches!(lie_bracket(&x, &y), Err(TensorError::ChartMismatch(..))));
    }

    #[test]
    fn outer_product_layout() {
        let c = plane();
        let v = VectorField::parse(c.clone(), &["x", "y"]).unwrap().to_tensor();
        let w = TensorField::one_form(c.clone(), vec![Expr::one(), Expr::int(2)]);
        let t = v.outer(&w);
        assert_eq!((t.upper, t.lower), (1, 1));
        assert_eq!(t.get(&[1, 1]), &Expr::sym("y").scale(&2.into()));
    }

    #[test]
    fn chart_validation() {
        let c = Chart::new("s", &["theta"], &[(0.01, 3.13)]).with_singular(&["sin(theta)"]);
        assert!(c.validate(0).is_ok());
        let bad = Chart::new("s", &["theta"], &[(-1.0, 1.0)]).with_singular(&["theta"]);
        // zero may not be hit exactly by samples; use a degenerate box
        let degenerate = Chart::new("s", &["theta"], &[(0.0, 0.0)]).with_singular(&["theta"]);
        assert!(degenerate.validate(0).is_err());
        let _ = bad;
        let dup = Chart::new("d", &["x", "x"], &[(0.0, 1.0), (0.0, 1.0)]);
        assert!(dup.validate(0).is_err());
    }

    #[test]
    fn random_tensors_are_seeded() {
        let c = plane();
        assert_eq!(random_tensor(c.clone(), 1, 1, 3), random_tensor(c.clone(), 1, 1, 3));
        assert_ne!(random_tensor(c.clone(), 1, 1, 3), random_tensor(c, 1, 1, 4));
    }
}
