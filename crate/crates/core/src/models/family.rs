//! Harmonic families: labelled members, certificates, JSON and CSV export.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::Arc;

use num::complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::expr::{is_zero, Env, Expr, SampleBox, ZeroVerdict};
use crate::tensor::{Chart, FrameTag, TensorField};

use super::ModelError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    #[serde(flatten)]
    pub verdict: ZeroVerdict,
}

impl Check {
    pub fn new(name: impl Into<String>, verdict: ZeroVerdict) -> Self {
        Check { name: name.into(), verdict }
    }

    pub fn passed(&self) -> bool {
        self.verdict.is_zero()
    }
}

#[derive(Debug, Clone)]
pub struct Member {
    pub labels: BTreeMap<String, String>,
    pub tensor: Option<TensorField>,
    pub checks: Vec<Check>,
}

impl Member {
    pub fn new(labels: &[(&str, String)], tensor: Option<TensorField>) -> Self {
        Member {
            labels: labels.iter().map(|(k, v)| (k.to_string(), v.clone())).collect(),
            tensor,
            checks: Vec::new(),
        }
    }

    pub fn label(&self, key: &str) -> Option<&str> {
        self.labels.get(key).map(|s| s.as_str())
    }

    pub fn label_i64(&self, key: &str) -> Result<i64, ModelError> {
        self.label(key)
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| ModelError::Label(format!("member label `{key}` missing or not an integer")))
    }
}

#[derive(Debug, Clone)]
pub struct HarmonicFamily {
    pub model: String,
    pub kind: String,
    pub labels: BTreeMap<String, String>,
    /// Free amplitude parameters carried symbolically.
    pub params: Vec<String>,
    pub lambda: String,
    pub members: Vec<Member>,
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
    /// Seed of the numeric sampling used by the certificates.
    pub seed: u64,
}

impl HarmonicFamily {
    pub fn new(model: &str, kind: &str, labels: &[(&str, String)], lambda: String) -> Self {
        HarmonicFamily {
            model: model.to_string(),
            kind: kind.to_string(),
            labels: labels.iter().map(|(k, v)| (k.to_string(), v.clone())).collect(),
            params: Vec::new(),
            lambda,
            members: Vec::new(),
            checks: Vec::new(),
            notes: Vec::new(),
            seed: 0,
        }
    }

    pub fn all_checks(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().chain(self.members.iter().flat_map(|m| m.checks.iter()))
    }

    pub fn passed(&self) -> bool {
        self.all_checks().all(|c| c.passed())
    }

    pub fn clear_checks(&mut self) {
        self.checks.clear();
        for m in &mut self.members {
            m.checks.clear();
        }
    }

    pub fn component_count(&self) -> usize {
        self.members
            .iter()
            .filter_map(|m| m.tensor.as_ref())
            .map(|t| t.components.iter().filter(|c| !c.is_zero()).count())
            .sum()
    }

    pub fn to_doc(&self) -> FamilyDoc {
        FamilyDoc {
            model: self.model.clone(),
            kind: self.kind.clone(),
            labels: self.labels.clone(),
            params: self.params.clone(),
            lambda: self.lambda.clone(),
            convention: crate::casimir::CONVENTION.to_string(),
            members: self
                .members
                .iter()
                .map(|m| MemberDoc {
                    labels: m.labels.clone(),
                    tensor: m.tensor.as_ref().map(TensorDoc::from_tensor),
                    checks: m.checks.clone(),
                })
                .collect(),
            checks: self.checks.clone(),
            notes: self.notes.clone(),
            seed: self.seed,
        }
    }

    /// Rebuilds a family from its document; `chart_for` resolves chart names.
    pub fn from_doc(doc: &FamilyDoc, chart_for: impl Fn(&str) -> Option<Arc<Chart>>) -> Result<Self, ModelError> {
        let mut members = Vec::with_capacity(doc.members.len());
        for m in &doc.members {
            let tensor = match &m.tensor {
                Some(t) => {
                    let chart =
                        chart_for(&t.chart).ok_or_else(|| ModelError::Label(format!("unknown chart `{}`", t.chart)))?;
                    Some(t.to_tensor(chart)?)
                }
                None => None,
            };
            members.push(Member { labels: m.labels.clone(), tensor, checks: m.checks.clone() });
        }
        Ok(HarmonicFamily {
            model: doc.model.clone(),
            kind: doc.kind.clone(),
            labels: doc.labels.clone(),
            params: doc.params.clone(),
            lambda: doc.lambda.clone(),
            members,
            checks: doc.checks.clone(),
            notes: doc.notes.clone(),
            seed: doc.seed,
        })
    }

    /// Numeric samples of every nonzero component on a coordinate grid, with
    /// amplitude parameters set to 1.
    pub fn samples_csv(&self, grid: &[(String, f64, f64, usize)]) -> Result<String, ModelError> {
        let mut out = String::new();
        let coords: Vec<&str> = grid.iter().map(|g| g.0.as_str()).collect();
        writeln!(out, "member,component,{},re,im", coords.join(",")).unwrap();
        let points = grid_points(grid);
        for (k, m) in self.members.iter().enumerate() {
            let Some(t) = &m.tensor else { continue };
            for (flat, c) in t.components.iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                let idx: Vec<String> = if t.rank() == 0 {
                    vec!["scalar".into()]
                } else {
                    t.multi_index(flat).iter().map(|i| (i + 1).to_string()).collect()
                };
                for p in &points {
                    let mut env: Env = self.params.iter().map(|s| (s.clone(), Complex64::new(1.0, 0.0))).collect();
                    for (name, v) in coords.iter().zip(p) {
                        env.insert(name.to_string(), Complex64::new(*v, 0.0));
                    }
                    let v = c.eval(&env).map_err(|e| ModelError::Label(e.to_string()))?;
                    let vals: Vec<String> = p.iter().map(|x| fmt17(*x)).collect();
                    writeln!(out, "{k},{},{},{},{}", idx.join(""), vals.join(","), fmt17(v.re), fmt17(v.im)).unwrap();
                }
            }
        }
        Ok(out)
    }
}

/// Lossless float formatting with 17 significant digits.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn grid_points(grid: &[(String, f64, f64, usize)]) -> Vec<Vec<f64>> {
    let mut pts = vec![vec![]];
    for (_, a, b, n) in grid {
        let axis: Vec<f64> = if *n <= 1 {
            vec![*a]
        } else {
            (0..*n).map(|i| a + (b - a) * i as f64 / (*n - 1) as f64).collect()
        };
        pts = pts
            .into_iter()
            .flat_map(|p| {
                axis.iter().map(move |x| {
                    let mut q = p.clone();
                    q.push(*x);
                    q
                })
            })
            .collect();
    }
    pts
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorDoc {
    pub chart: String,
    pub upper: usize,
    pub lower: usize,
    pub frame: FrameTag,
    pub components: Vec<String>,
}

impl TensorDoc {
    pub fn from_tensor(t: &TensorField) -> Self {
        TensorDoc {
            chart: t.chart.name.clone(),
            upper: t.upper,
            lower: t.lower,
            frame: t.frame.clone(),
            components: t.components.iter().map(|c| c.to_string()).collect(),
        }
    }

    pub fn to_tensor(&self, chart: Arc<Chart>) -> Result<TensorField, ModelError> {
        let components = self
            .components
            .iter()
            .map(|s| chart.parse(s))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| ModelError::Label(e.to_string()))?;
        TensorField::new(chart, self.upper, self.lower, self.frame.clone(), components)
            .map_err(|e| ModelError::Label(e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemberDoc {
    pub labels: BTreeMap<String, String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub tensor: Option<TensorDoc>,
    pub checks: Vec<Check>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyDoc {
    pub model: String,
    pub kind: String,
    pub labels: BTreeMap<String, String>,
    pub params: Vec<String>,
    pub lambda: String,
    pub convention: String,
    pub members: Vec<MemberDoc>,
    pub checks: Vec<Check>,
    #[serde(default)]
    pub notes: Vec<String>,
    #[serde(default)]
    pub seed: u64,
}

pub fn combine(it: impl IntoIterator<Item = ZeroVerdict>) -> ZeroVerdict {
    it.into_iter().fold(ZeroVerdict::SymbolicallyZero, |a, b| a.and(b))
}

/// Verdict that `c` and `g` are proportional: `c ∂g − g ∂c = 0` along every
/// coordinate, and `c` vanishes exactly when `g` does.
pub fn proportional(c: &Expr, g: &Expr, coords: &[String], domain: &SampleBox) -> Result<ZeroVerdict, ModelError> {
    if c.is_zero() != g.is_zero() {
        return Ok(ZeroVerdict::Nonzero { witness: vec![], value_re: f64::NAN, value_im: 0.0 });
    }
    let mut acc = ZeroVerdict::SymbolicallyZero;
    for x in coords {
        let w = c * &g.diff(x) - g * &c.diff(x);
        acc = acc.and(is_zero(&w, domain).map_err(crate::tensor::TensorError::from)?);
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_is_cartesian() {
        let g = vec![("x".to_string(), 0.0, 1.0, 3), ("y".to_string(), 2.0, 2.0, 1)];
        let p = grid_points(&g);
        assert_eq!(p, vec![vec![0.0, 2.0], vec![0.5, 2.0], vec![1.0, 2.0]]);
    }

    #[test]
    fn seventeen_digits_round_trip() {
        let x = 0.1f64 + 0.2;
        assert_eq!(fmt17(x).parse::<f64>().unwrap(), x);
    }

    #[test]
    fn tensor_doc_round_trip() {
        let c = Arc::new(Chart::new("s", &["theta", "phi"], &[(0.1, 3.0), (0.0, 6.0)]).with_params(&["h"]));
        let comps = ["h*exp(2*i*phi)*sin(theta)^2", "cot(theta)*(1+cos(theta))^(1/2)"];
        let t = TensorField::one_form(c.clone(), comps.iter().map(|s| c.parse(s).unwrap()).collect());
        let back = TensorDoc::from_tensor(&t).to_tensor(c).unwrap();
        assert_eq!(back, t);
    }
}
