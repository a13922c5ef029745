//! Bianchi type II on `(υ, y, z)`, `υ = x e^{−y}`: invariant frame and
//! metric, the point series `t_m = e^{my+νz} ∂_υ^{n−m−1}(1+υ²)^{n−1/2}` and
//! covector harmonics on the invariant coframe.

use std::sync::Arc;

use crate::casimir::{certify_lie_eigen, CasimirOperator, ScalarOperator};
use crate::expr::{is_zero, Coeff, Expr, SampleBox, ZeroVerdict};
use crate::lie_algebra::StructureConstants;
use crate::split::{build_invariant_metric, compute_mu, killing_verdicts, solve_invariant_frame, Frame, InvariantMetric};
use crate::tensor::{Chart, TensorError, TensorField, VectorField};

use super::family::{combine, Check, HarmonicFamily, Member};
use super::ModelError;

pub const AMPLITUDES: [&str; 3] = ["a1", "a2", "a3"];

#[derive(Debug, Clone)]
pub struct Bianchi2Model {
    /// `(v, y, z)`.
    pub chart: Arc<Chart>,
    /// `(x, y, z)` before the substitution.
    pub original: Arc<Chart>,
    pub sc: StructureConstants,
}

impl Default for Bianchi2Model {
    fn default() -> Self {
        Self::new()
    }
}

impl Bianchi2Model {
    pub fn new() -> Self {
        let dom = [(-2.0, 2.0), (-1.0, 1.0), (-1.0, 1.0)];
        Bianchi2Model {
            chart: Arc::new(Chart::new("bianchi2", &["v", "y", "z"], &dom).with_params(&AMPLITUDES)),
            original: Arc::new(Chart::new("bianchi2-xyz", &["x", "y", "z"], &dom)),
            sc: StructureConstants::bianchi2(),
        }
    }

    pub fn chart(&self, name: &str) -> Option<Arc<Chart>> {
        [&self.chart, &self.original].into_iter().find(|c| c.name == name).cloned()
    }

    fn fields(chart: &Arc<Chart>, comps: [[&str; 3]; 3]) -> Vec<VectorField> {
        comps.iter().map(|c| VectorField::parse(chart.clone(), c).expect("built-in field parses")).collect()
    }

    /// `ξ_1 = e^{−y}∂_υ, ξ_2 = ∂_y, ξ_3 = ∂_z`.
    pub fn xi(&self) -> Vec<VectorField> {
        Self::fields(&self.chart, [["exp(-y)", "0", "0"], ["0", "1", "0"], ["0", "0", "1"]])
    }

    /// `ξ_1 = ∂_x, ξ_2 = x∂_x + ∂_y, ξ_3 = ∂_z`.
    pub fn xi_original(&self) -> Vec<VectorField> {
        Self::fields(&self.original, [["1", "0", "0"], ["x", "1", "0"], ["0", "0", "1"]])
    }

    /// `υ = x e^{−y}` as an expression on the original chart.
    pub fn v_of_xyz(&self) -> Expr {
        self.original.parse("x*exp(-y)").unwrap()
    }

    pub fn frame(&self) -> Result<Frame, ModelError> {
        Ok(solve_invariant_frame(&self.sc, &self.xi(), &self.chart.sample_box(0))?.1)
    }

    pub fn metric(&self) -> Result<InvariantMetric, ModelError> {
        let (fs, _) = solve_invariant_frame(&self.sc, &self.xi(), &self.chart.sample_box(0))?;
        Ok(build_invariant_metric(&fs, &self.chart.sample_box(0))?)
    }

    pub fn casimir(&self) -> Result<CasimirOperator, ModelError> {
        let domain = self.chart.sample_box(0);
        let xi = self.xi();
        let (fs, frame) = solve_invariant_frame(&self.sc, &xi, &domain)?;
        let metric = build_invariant_metric(&fs, &domain)?;
        let mu = compute_mu(&frame, &xi, &self.sc, &domain)?;
        Ok(CasimirOperator::new(xi, self.sc.clone(), metric)?.with_frame(frame, mu))
    }

    /// The same operator on `(x, y, z)`: the metric is carried over by
    /// `υ → x e^{−y}` and recertified against the original generators.
    pub fn casimir_original(&self) -> Result<CasimirOperator, ModelError> {
        let m = self.metric()?;
        let v = self.v_of_xyz();
        let g = m.g_inv.map(|e| e.subst("v", &v));
        let xi = self.xi_original();
        let killing = killing_verdicts(&g, &xi, &self.sc, &self.original.sample_box(0))?;
        let metric = InvariantMetric { g_inv: g, rank: m.rank, provenance: m.provenance, killing };
        Ok(CasimirOperator::new(xi, self.sc.clone(), metric)?)
    }

    /// `(1+υ²)∂²_υ − 2υ∂_υ∂_y + υ∂_υ + ∂²_y + ∂²_z`, written out by hand.
    pub fn reference_operator(&self) -> ScalarOperator {
        let c = &self.chart;
        let d = |i: usize| {
            let comps = (0..3).map(|k| if k == i { Expr::one() } else { Expr::zero() }).collect();
            ScalarOperator::from_vector(&VectorField::new(c.clone(), comps).unwrap())
        };
        let v = c.coord(0);
        d(0).compose(&d(0))
            .scale(&(Expr::one() + &v * &v))
            .add(&d(0).compose(&d(1)).scale(&v.scale(&Coeff::int(-2))))
            .add(&d(0).scale(&v))
            .add(&d(1).compose(&d(1)))
            .add(&d(2).compose(&d(2)))
    }
}

fn check_labels(n: i64, m: i64) -> Result<(), ModelError> {
    if n < 1 {
        return Err(ModelError::Label(format!("point series needs n ≥ 1 (got {n})")));
    }
    if m >= n {
        return Err(ModelError::Label(format!("point series needs m < n (got n = {n}, m = {m})")));
    }
    Ok(())
}

/// `∂_υ^{n−m−1}(1+υ²)^{n−1/2}` by repeated exact differentiation.
pub fn point_series_profile(n: i64, m: i64) -> Result<Expr, ModelError> {
    check_labels(n, m)?;
    let v = Expr::sym("v");
    let mut f = Expr::half_pow(Expr::one() + &v * &v, (2 * n - 1) as i32);
    for _ in 0..(n - m - 1) {
        f = f.diff("v");
    }
    Ok(f)
}

fn exp_weight(m: i64, nu: i64) -> Expr {
    Expr::exp(Expr::sym("y").scale(&Coeff::int(m)) + Expr::sym("z").scale(&Coeff::int(nu)))
}

/// `t^{n²}_{mν}` written directly from the closed form.
pub fn point_series_scalar(n: i64, m: i64, nu: i64) -> Result<Expr, ModelError> {
    Ok(exp_weight(m, nu) * point_series_profile(n, m)?)
}

/// `(1+υ²)f'' + (1−2μ)υf' + μ²f − σf`.
pub fn profile_residual(f: &Expr, mu: i64, sigma: i64) -> Expr {
    let v = Expr::sym("v");
    let d1 = f.diff("v");
    let d2 = d1.diff("v");
    (Expr::one() + &v * &v) * d2 + (&v * &d1).scale(&Coeff::int(1 - 2 * mu)) + f.scale(&Coeff::int(mu * mu - sigma))
}

/// Members from `m = n−1` down to `min(m, −n)`; each lower member is the
/// image of the one above under `ξ_1`.
pub fn point_series_family(model: &Bianchi2Model, n: i64, m: i64, nu: i64) -> Result<HarmonicFamily, ModelError> {
    check_labels(n, m)?;
    let lambda = nu * nu + n * n;
    let labels = [("n", n.to_string()), ("m", m.to_string()), ("nu", nu.to_string())];
    let mut fam = HarmonicFamily::new("bianchi2", "bianchi2-point-series", &labels, lambda.to_string());
    let xi1 = &model.xi()[0];
    let mut t = point_series_scalar(n, n - 1, nu)?;
    for k in (m.min(-n)..n).rev() {
        let member = TensorField::scalar(model.chart.clone(), t.clone());
        fam.members.push(Member::new(&[("n", n.to_string()), ("m", k.to_string()), ("nu", nu.to_string())], Some(member)));
        t = xi1.apply(&t);
    }
    fam.notes.push("members below the top are generated by the lowering field xi_1".into());
    certify_family(model, &mut fam)?;
    Ok(fam)
}

/// `[a_1 e^1 + a_2 e^2 + a_3 e^3] t^{n²}_{mν}` on the invariant coframe.
pub fn covector_family(
    model: &Bianchi2Model,
    n: i64,
    m: i64,
    nu: i64,
    amplitudes: [Expr; 3],
) -> Result<HarmonicFamily, ModelError> {
    let t = point_series_scalar(n, m, nu)?;
    let frame = model.frame()?;
    let comps = amplitudes.iter().map(|a| a * &t).collect();
    let field = TensorField::new(model.chart.clone(), 0, 1, frame.tag(), comps)?;
    let labels = [("n", n.to_string()), ("m", m.to_string()), ("nu", nu.to_string())];
    let mut fam =
        HarmonicFamily::new("bianchi2", "bianchi2-covector", &labels, (nu * nu + n * n).to_string());
    fam.params = AMPLITUDES.iter().map(|s| s.to_string()).collect();
    fam.members.push(Member::new(&labels, Some(field)));
    certify_family(model, &mut fam)?;
    Ok(fam)
}

pub fn symbolic_amplitudes() -> [Expr; 3] {
    AMPLITUDES.map(Expr::sym)
}

fn verdict(e: &Expr, domain: &SampleBox) -> Result<ZeroVerdict, ModelError> {
    Ok(is_zero(e, domain).map_err(TensorError::from)?)
}

/// Recomputes every certificate of a Bianchi II family.
pub fn certify_family(model: &Bianchi2Model, fam: &mut HarmonicFamily) -> Result<(), ModelError> {
    if fam.kind == "bianchi2-hypergeometric" {
        return Ok(super::hypergeometric::certify_family(fam)?);
    }
    fam.clear_checks();
    let domain = model.chart.sample_box(fam.seed);
    let op = model.casimir()?;
    let xi = model.xi();
    let n = fam.labels.get("n").and_then(|s| s.parse::<i64>().ok()).ok_or_else(|| ModelError::Label("label `n` missing".into()))?;
    let nu = fam.labels.get("nu").and_then(|s| s.parse::<i64>().ok()).ok_or_else(|| ModelError::Label("label `nu` missing".into()))?;
    let lambda = Expr::int(nu * nu + n * n);
    let covector = fam.kind == "bianchi2-covector";
    let frame = if covector { op.frame.clone() } else { None };

    let mut profiles = Vec::new();
    for member in &mut fam.members {
        let m = member.label_i64("m")?;
        let t = member.tensor.clone().ok_or_else(|| ModelError::Label("member without tensor".into()))?;
        let closed = point_series_scalar(n, m, nu)?;
        let mut checks = vec![
            Check::new("casimir-eigen", op.certify_eigen(&t, &lambda, &domain)?.residual),
            Check::new("xi2-eigen", certify_lie_eigen(&xi[1], frame.as_ref(), &t, &Expr::int(m), &domain)?),
            Check::new("xi3-eigen", certify_lie_eigen(&xi[2], frame.as_ref(), &t, &Expr::int(nu), &domain)?),
        ];
        if covector {
            checks.push(Check::new("reduction-consistency", op.reduction_consistency(&t, &domain)?));
            // e^1 = dυ + υ dy, e^2 = dy, e^3 = dz
            let f = frame.as_ref().unwrap();
            let coord = f.to_coordinate(&t);
            let a = symbolic_amplitudes();
            let v = Expr::sym("v");
            let expected = [&a[0] * &closed, &(&a[0] * &v + &a[1]) * &closed, &a[2] * &closed];
            let diffs = coord.components.iter().zip(&expected).map(|(c, e)| verdict(&(c - e), &domain));
            let amps = TensorField::new(
                model.chart.clone(),
                0,
                1,
                f.tag(),
                t.components.iter().map(|c| c * &closed.powi(-1)).collect(),
            )?;
            // only meaningful when the member carries the symbolic amplitudes
            if amps.components.iter().zip(&a).all(|(c, ai)| (c - ai).is_zero()) {
                checks.push(Check::new("coordinate-form", combine(diffs.collect::<Result<Vec<_>, _>>()?)));
            }
        } else {
            let c = &t.components[0];
            checks.push(Check::new("closed-form", verdict(&(c - &closed), &domain)?));
            let f = c * &exp_weight(-m, -nu);
            checks.push(Check::new("profile-ode", verdict(&profile_residual(&f, m, n * n), &domain)?));
            profiles.push((m, f));
        }
        member.checks = checks;
    }

    for w in profiles.windows(2) {
        let ((m, f), (m1, f1)) = (&w[0], &w[1]);
        if *m1 == m - 1 {
            let name = format!("lowering m={m}: d/dv f_m = f_(m-1)");
            fam.checks.push(Check::new(name, verdict(&(f.diff("v") - f1), &domain)?));
        }
    }
    if !covector {
        let mut chain = Vec::new();
        for w in fam.members.windows(2) {
            let (Some(a), Some(b)) = (&w[0].tensor, &w[1].tensor) else { continue };
            let name = format!("xi1-chain m={}: xi_1 t_m = t_(m-1)", w[0].label_i64("m")?);
            let img = xi[0].apply(&a.components[0]);
            chain.push(Check::new(name, verdict(&(img - &b.components[0]), &domain)?));
        }
        fam.checks.extend(chain);
    }
    Ok(())
}

/// The `(n, m)` point-series scalar on `(x, y, z)`, certified against the
/// original generators.
pub fn original_chart_checks(model: &Bianchi2Model, n: i64, m: i64, nu: i64) -> Result<Vec<Check>, ModelError> {
    let t = point_series_scalar(n, m, nu)?.subst("v", &model.v_of_xyz());
    let t = TensorField::scalar(model.original.clone(), t);
    let domain = model.original.sample_box(0);
    let op = model.casimir_original()?;
    let xi = model.xi_original();
    Ok(vec![
        Check::new("metric-killing", combine(op.metric.killing.clone())),
        Check::new("casimir-eigen", op.certify_eigen(&t, &Expr::int(nu * nu + n * n), &domain)?.residual),
        Check::new("xi2-eigen", certify_lie_eigen(&xi[1], None, &t, &Expr::int(m), &domain)?),
        Check::new("xi3-eigen", certify_lie_eigen(&xi[2], None, &t, &Expr::int(nu), &domain)?),
    ])
}
