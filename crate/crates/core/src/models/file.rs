//! JSON model documents: chart, structure constants, generators and an
//! optional frame or metric.

use std::sync::Arc;

use num::rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::expr::ZeroVerdict;
use crate::lie_algebra::{
    cartan, cartan_metric, rat_string, validate, AlgebraError, ValidationReport, MetricProvenance, StructureConstants,
};
use crate::matrix::ExprMatrix;
use crate::split::{killing_verdicts, Frame, InvariantMetric};
use crate::tensor::{verify_realization, Chart, RealizationReport, TensorField, VectorField};

use super::family::Check;
use super::{bianchi2::Bianchi2Model, so3::So3Model, ModelError};

/// `C^k_{ij}` with 1-based indices and an exact rational value string.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Triplet {
    pub k: usize,
    pub i: usize,
    pub j: usize,
    pub value: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameSpec {
    pub name: String,
    pub covectors: Vec<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSpec {
    /// `g^{ik}` in the generator basis.
    pub g_inv: Vec<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub name: String,
    pub chart: Chart,
    pub structure_constants: Vec<Triplet>,
    pub generators: Vec<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frame: Option<FrameSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metric: Option<MetricSpec>,
}

/// A model file after parsing every expression.
#[derive(Debug, Clone)]
pub struct LoadedModel {
    pub name: String,
    pub chart: Arc<Chart>,
    pub sc: StructureConstants,
    pub xi: Vec<VectorField>,
    pub frame: Option<Frame>,
    pub metric: Option<ExprMatrix>,
}

fn input(msg: impl Into<String>) -> ModelError {
    ModelError::Input(msg.into())
}

fn parse_rational(s: &str) -> Result<BigRational, ModelError> {
    s.trim().parse::<BigRational>().map_err(|_| input(format!("`{s}` is not an exact rational")))
}

impl ModelFile {
    pub fn from_json(text: &str) -> Result<Self, ModelError> {
        serde_json::from_str(text).map_err(|e| input(format!("model schema: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serializes")
    }

    pub fn builtin(tag: &str) -> Option<ModelFile> {
        let (name, chart, sc, gens): (&str, Chart, StructureConstants, Vec<Vec<String>>) = match tag {
            "so3" => {
                let m = So3Model::new();
                let xi = m.xi(&m.sphere);
                ("so3", (*m.sphere).clone(), m.sc, xi.iter().map(|x| x.components.iter().map(|c| c.to_string()).collect()).collect())
            }
            "bianchi2" => {
                let m = Bianchi2Model::new();
                let mut chart = (*m.chart).clone();
                chart.params.clear();
                let xi = m.xi();
                ("bianchi2", chart, m.sc, xi.iter().map(|x| x.components.iter().map(|c| c.to_string()).collect()).collect())
            }
            "abelian" => {
                let chart = Chart::new("cartesian", &["x", "y", "z"], &[(-1.0, 1.0); 3]);
                let gens = (0..3).map(|i| (0..3).map(|k| if i == k { "1" } else { "0" }.to_string()).collect()).collect();
                ("abelian", chart, StructureConstants::abelian(3), gens)
            }
            _ => return None,
        };
        let structure_constants = sc
            .triplets()
            .into_iter()
            .map(|(k, i, j, v)| Triplet { k: k + 1, i: i + 1, j: j + 1, value: rat_string(&v) })
            .collect();
        Some(ModelFile { name: name.into(), chart, structure_constants, generators: gens, frame: None, metric: None })
    }

    pub fn load(&self) -> Result<LoadedModel, ModelError> {
        let chart = Arc::new(self.chart.clone());
        let n = chart.dim();
        if chart.domain.len() != n {
            return Err(input(format!("chart has {n} coordinates but {} domain intervals", chart.domain.len())));
        }
        let r = self.generators.len();
        let mut entries = Vec::new();
        for t in &self.structure_constants {
            if t.k == 0 || t.i == 0 || t.j == 0 {
                return Err(input("structure constant indices are 1-based"));
            }
            entries.push((t.k - 1, t.i - 1, t.j - 1, parse_rational(&t.value)?));
        }
        let sc = StructureConstants::from_triplets(r, &entries).map_err(|e| input(e.to_string()))?;
        let xi = self
            .generators
            .iter()
            .map(|g| {
                let comps: Vec<&str> = g.iter().map(String::as_str).collect();
                VectorField::parse(chart.clone(), &comps).map_err(|e| input(e.to_string()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let domain = chart.sample_box(0);
        let frame = match &self.frame {
            Some(f) => {
                let cov = f
                    .covectors
                    .iter()
                    .map(|row| {
                        let comps =
                            row.iter().map(|s| chart.parse(s)).collect::<Result<Vec<_>, _>>().map_err(|e| input(e.to_string()))?;
                        if comps.len() != n {
                            return Err(input(format!("covector has {} components, chart has {n}", comps.len())));
                        }
                        Ok(TensorField::one_form(chart.clone(), comps))
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                Some(Frame::from_covectors(&f.name, cov, &domain)?)
            }
            None => None,
        };
        let metric = match &self.metric {
            Some(m) => {
                if m.g_inv.len() != r || m.g_inv.iter().any(|row| row.len() != r) {
                    return Err(input(format!("metric must be {r}×{r}")));
                }
                let rows = m
                    .g_inv
                    .iter()
                    .map(|row| row.iter().map(|s| chart.parse(s)).collect::<Result<Vec<_>, _>>())
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|e| input(e.to_string()))?;
                Some(ExprMatrix::from_rows(rows))
            }
            None => None,
        };
        Ok(LoadedModel { name: self.name.clone(), chart, sc, xi, frame, metric })
    }
}

/// Outcome of the algebra, realization and Killing checks on a model.
#[derive(Debug, Clone, Serialize)]
pub struct VerifyOutcome {
    pub algebra: Vec<Check>,
    pub validation: ValidationReport,
    pub realization: RealizationReport,
    pub killing: Vec<Check>,
    pub notes: Vec<String>,
}

impl VerifyOutcome {
    pub fn passed(&self) -> bool {
        self.algebra.iter().chain(&self.killing).all(Check::passed) && self.realization.all_zero()
    }
}

impl LoadedModel {
    pub fn verify(&self, seed: u64) -> Result<VerifyOutcome, ModelError> {
        let domain = self.chart.sample_box(seed);
        let report = validate(&self.sc);
        let mut notes = Vec::new();
        let algebra_verdict = if report.violations.is_empty() {
            ZeroVerdict::SymbolicallyZero
        } else {
            ZeroVerdict::Nonzero { witness: vec![], value_re: f64::NAN, value_im: 0.0 }
        };
        let algebra = vec![Check::new("antisymmetry-and-jacobi", algebra_verdict)];
        let ct = cartan(&self.sc);
        if ct.is_degenerate {
            notes.push(format!("Cartan tensor degenerate: rank {} of {}", ct.rank, self.sc.dim()));
        }
        let realization = verify_realization(&self.xi, &self.sc, &domain)?;
        let mut killing = Vec::new();
        if let Some(g) = &self.metric {
            for (j, v) in killing_verdicts(g, &self.xi, &self.sc, &domain)?.into_iter().enumerate() {
                killing.push(Check::new(format!("killing xi_{}", j + 1), v));
            }
        }
        Ok(VerifyOutcome { algebra, validation: report, realization, killing, notes })
    }

    /// Cartan inverse when non-degenerate, otherwise the invariant frame.
    pub fn build_metric(&self, seed: u64) -> Result<InvariantMetric, ModelError> {
        let domain = self.chart.sample_box(seed);
        match cartan_metric(&self.sc) {
            Ok((m, _)) => Ok(crate::split::constant_invariant_metric(&m, &self.xi, &self.sc, &domain)?),
            Err(AlgebraError::DegenerateCartan { .. }) => {
                let (fs, _) = crate::split::solve_invariant_frame(&self.sc, &self.xi, &domain)?;
                Ok(crate::split::build_invariant_metric(&fs, &domain)?)
            }
            Err(e) => Err(input(e.to_string())),
        }
    }
}

pub fn provenance_name(p: MetricProvenance) -> &'static str {
    match p {
        MetricProvenance::CartanInverse => "cartan-inverse",
        MetricProvenance::UserSupplied => "user-supplied",
        MetricProvenance::FrameBuilt => "frame-built",
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins_round_trip_and_verify() {
        for tag in ["so3", "bianchi2", "abelian"] {
            let m = ModelFile::builtin(tag).unwrap();
            let back = ModelFile::from_json(&m.to_json()).unwrap();
            assert_eq!(back, m);
            let out = back.load().unwrap().verify(0).unwrap();
            assert!(out.passed(), "{tag}: {out:?}");
        }
    }

    #[test]
    fn corrupted_constant_fails_realization() {
        let mut m = ModelFile::builtin("bianchi2").unwrap();
        for t in &mut m.structure_constants {
            t.value = if t.value.starts_with('-') { "-2".into() } else { "2".into() };
        }
        let out = m.load().unwrap().verify(0).unwrap();
        assert!(!out.realization.all_zero());
        assert!(!out.passed());
    }

    #[test]
    fn metric_fallback_reaches_frame_solver() {
        let g = ModelFile::builtin("bianchi2").unwrap().load().unwrap().build_metric(0).unwrap();
        assert_eq!(g.provenance, MetricProvenance::FrameBuilt);
        let g = ModelFile::builtin("so3").unwrap().load().unwrap().build_metric(0).unwrap();
        assert_eq!(g.provenance, MetricProvenance::CartanInverse);
        let g = ModelFile::builtin("abelian").unwrap().load().unwrap().build_metric(0).unwrap();
        assert_eq!(g.provenance, MetricProvenance::FrameBuilt);
    }

    #[test]
    fn schema_errors_are_input_errors() {
        assert!(matches!(ModelFile::from_json("{\"name\": 1}"), Err(ModelError::Input(_))));
        let mut m = ModelFile::builtin("so3").unwrap();
        m.generators[0][0] = "sin(".into();
        assert!(matches!(m.load(), Err(ModelError::Input(_))));
    }
}
