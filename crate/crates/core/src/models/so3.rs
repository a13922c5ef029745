//! Rotation group on the sphere: generators, ladder fields, spin frame and
//! tensor spherical harmonic families.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::casimir::{certify_lie_eigen, lie_along, CasimirOperator, ScalarOperator};
use crate::expr::{is_zero, Coeff, Expr};
use crate::lie_algebra::{cartan_metric, StructureConstants};
use crate::split::{compute_mu, constant_invariant_metric, Frame, InvariantMetric};
use crate::tensor::{Chart, FrameTag, TensorField, VectorField};

use super::family::{combine, proportional, Check, HarmonicFamily, Member};
use super::legendre::solve_plnm;
use super::ModelError;

/// Guard keeping samples away from the poles.
pub const THETA_EPS: f64 = 0.01;
/// Amplitudes of the rr, r-spin and spin-spin parts of a (2,0) harmonic.
pub const AMPLITUDES: [&str; 3] = ["h_rr", "h_r", "h"];

#[derive(Debug, Clone)]
pub struct So3Model {
    pub sphere: Arc<Chart>,
    pub spatial: Arc<Chart>,
    pub sc: StructureConstants,
    pub ladder_sc: StructureConstants,
}

impl Default for So3Model {
    fn default() -> Self {
        Self::new()
    }
}

impl So3Model {
    pub fn new() -> Self {
        let th = (THETA_EPS, PI - THETA_EPS);
        let ph = (0.0, 2.0 * PI);
        let sphere = Chart::new("sphere", &["theta", "phi"], &[th, ph]).with_singular(&["sin(theta)"]);
        let spatial = Chart::new("spherical", &["r", "theta", "phi"], &[(0.5, 2.0), th, ph])
            .with_singular(&["sin(theta)"])
            .with_params(&AMPLITUDES);
        So3Model {
            sphere: Arc::new(sphere),
            spatial: Arc::new(spatial),
            sc: StructureConstants::so3(),
            ladder_sc: StructureConstants::so3_ladder(),
        }
    }

    pub fn chart(&self, name: &str) -> Option<Arc<Chart>> {
        [&self.sphere, &self.spatial].into_iter().find(|c| c.name == name).cloned()
    }

    fn fields(chart: &Arc<Chart>, comps: &[[&str; 2]]) -> Vec<VectorField> {
        let radial = chart.dim() == 3;
        comps
            .iter()
            .map(|[t, p]| {
                let parts: Vec<&str> = if radial { vec!["0", t, p] } else { vec![t, p] };
                VectorField::parse(chart.clone(), &parts).expect("built-in field parses")
            })
            .collect()
    }

    /// `ξ_1, ξ_2, ξ_3` with `[ξ_i, ξ_j] = ε_{ijk} ξ_k`.
    pub fn xi(&self, chart: &Arc<Chart>) -> Vec<VectorField> {
        Self::fields(
            chart,
            &[["sin(phi)", "cot(theta)*cos(phi)"], ["-cos(phi)", "cot(theta)*sin(phi)"], ["0", "-1"]],
        )
    }

    /// `H_{+1}, H_{-1}, H_3` with `H_s = −s ξ_2 + i ξ_1`, `H_3 = −i ∂_φ`.
    pub fn ladder(&self, chart: &Arc<Chart>) -> Vec<VectorField> {
        Self::fields(
            chart,
            &[
                ["exp(i*phi)", "i*exp(i*phi)*cot(theta)"],
                ["-exp(-i*phi)", "i*exp(-i*phi)*cot(theta)"],
                ["0", "-i"],
            ],
        )
    }

    /// Spin coframe `e^s = dθ + i s sin θ dφ` (`s = +1, −1`), preceded by
    /// the invariant `dr` on the spatial chart.
    pub fn frame(&self, chart: &Arc<Chart>) -> Result<Frame, ModelError> {
        let mut cov = Vec::new();
        let radial = chart.dim() == 3;
        if radial {
            cov.push(vec!["1", "0", "0"]);
        }
        for s in ["i*sin(theta)", "-i*sin(theta)"] {
            cov.push(if radial { vec!["0", "1", s] } else { vec!["1", s] });
        }
        let cov = cov
            .into_iter()
            .map(|c| TensorField::one_form(chart.clone(), c.iter().map(|s| chart.parse(s).unwrap()).collect()))
            .collect();
        let name = if radial { "spin" } else { "spin-sphere" };
        Ok(Frame::from_covectors(name, cov, &chart.sample_box(0))?)
    }

    /// Spin weight of each frame leg.
    pub fn leg_weights(&self, chart: &Chart) -> Vec<i64> {
        if chart.dim() == 3 {
            vec![0, 1, -1]
        } else {
            vec![1, -1]
        }
    }

    pub fn metric(&self, chart: &Arc<Chart>) -> Result<InvariantMetric, ModelError> {
        let (m, _) = cartan_metric(&self.sc).map_err(|e| ModelError::Label(e.to_string()))?;
        Ok(constant_invariant_metric(&m, &self.xi(chart), &self.sc, &chart.sample_box(0))?)
    }

    pub fn casimir(&self, chart: &Arc<Chart>) -> Result<CasimirOperator, ModelError> {
        let xi = self.xi(chart);
        let frame = self.frame(chart)?;
        let mu = compute_mu(&frame, &xi, &self.sc, &chart.sample_box(0))?;
        Ok(CasimirOperator::new(xi, self.sc.clone(), self.metric(chart)?)?.with_frame(frame, mu))
    }

    /// `−(H_{+1} H_{−1} + H_3² − H_3)` on sphere scalars.
    pub fn ladder_casimir(&self) -> ScalarOperator {
        let h: Vec<ScalarOperator> = self.ladder(&self.sphere).iter().map(ScalarOperator::from_vector).collect();
        h[0].compose(&h[1]).add(&h[2].compose(&h[2])).sub(&h[2]).scale(&Expr::int(-1))
    }

    /// `∂²_θ + cot θ ∂_θ + sin⁻²θ (∂²_φ − 2 i n cos θ ∂_φ − n²)`.
    pub fn spin_weighted_operator(&self, n: i64) -> ScalarOperator {
        let c = &self.sphere;
        let mut op = ScalarOperator::multiplication(&c.coords, c.parse(&format!("-{}/sin(theta)^2", n * n)).unwrap());
        let term = |d: &[usize], s: &str| {
            ScalarOperator::from_vector(&VectorField::new(c.clone(), unit(2, d[0])).unwrap())
                .compose(&if d.len() == 2 {
                    ScalarOperator::from_vector(&VectorField::new(c.clone(), unit(2, d[1])).unwrap())
                } else {
                    ScalarOperator::multiplication(&c.coords, Expr::one())
                })
                .scale(&c.parse(s).unwrap())
        };
        op = op.add(&term(&[0, 0], "1"));
        op = op.add(&term(&[0], "cot(theta)"));
        op = op.add(&term(&[1, 1], "1/sin(theta)^2"));
        op.add(&term(&[1], &format!("-2*i*{n}*cos(theta)/sin(theta)^2")))
    }

    /// Sphere Laplacian `(1/sin θ) ∂_θ (sin θ ∂_θ) + sin⁻²θ ∂²_φ`.
    pub fn laplacian(&self) -> ScalarOperator {
        self.spin_weighted_operator(0)
    }
}

fn unit(n: usize, i: usize) -> Vec<Expr> {
    (0..n).map(|k| if k == i { Expr::one() } else { Expr::zero() }).collect()
}

/// `√(l(l+1) − m(m+s))`, the exact ladder coefficient.
pub fn ladder_coefficient(l: i64, m: i64, s: i64) -> Expr {
    let k = l * (l + 1) - m * (m + s);
    if k <= 0 {
        Expr::zero()
    } else {
        Expr::sqrt(Expr::int(k))
    }
}

fn label_strings(l: i64, m: i64, kind: &str) -> Vec<(&'static str, String)> {
    vec![("l", l.to_string()), ("m", m.to_string()), ("type", kind.to_string())]
}

/// Scalar harmonics `t^l_0 = e^{imφ} P^l_{0m}`, `m = l, …, −l`.
pub fn scalar_family(model: &So3Model, l: i64) -> Result<HarmonicFamily, ModelError> {
    if l < 0 {
        return Err(ModelError::Label(format!("weight l = {l} must be non-negative")));
    }
    let chart = model.sphere.clone();
    let p = solve_plnm(l, 0, l)?;
    let top = chart.parse(&format!("exp({l}*i*phi)")).unwrap() * p.expr;
    let top = TensorField::scalar(chart, top);
    build_ladder_family(model, l, "scalar", top)
}

/// Symmetric covariant harmonic on `{dr, e^{+1}, e^{−1}}` with components
/// `h_rr t_0`, `h_r t_s`, `h t_{s+s′}`; the spin sums above `l` vanish.
pub fn tensor20_family(model: &So3Model, l: i64) -> Result<HarmonicFamily, ModelError> {
    if l < 0 {
        return Err(ModelError::Label(format!("weight l = {l} must be non-negative")));
    }
    let chart = model.spatial.clone();
    let w = model.leg_weights(&chart);
    let phase = chart.parse(&format!("exp({l}*i*phi)")).unwrap();
    let mut t = TensorField::zeros(chart.clone(), 0, 2, FrameTag::Named("spin".into()));
    for flat in 0..t.components.len() {
        let idx = t.multi_index(flat);
        let n = w[idx[0]] + w[idx[1]];
        if n.abs() > l {
            continue;
        }
        let radial = idx.iter().filter(|&&a| a == 0).count();
        let amp = Expr::sym(AMPLITUDES[2 - radial]);
        t.components[flat] = &(&amp * &phase) * &solve_plnm(l, n, l)?.expr;
    }
    let mut fam = build_ladder_family(model, l, "2,0", t)?;
    fam.params = AMPLITUDES.iter().map(|s| s.to_string()).collect();
    Ok(fam)
}

/// Generates members `m = l−1, …, −l` from the top member by
/// `T_{m−1} = ℒ_{H_{−1}} T_m / √(l(l+1) − m(m−1))`, then certifies.
fn build_ladder_family(model: &So3Model, l: i64, kind: &str, top: TensorField) -> Result<HarmonicFamily, ModelError> {
    let chart = top.chart.clone();
    let frame = if matches!(top.frame, FrameTag::Named(_)) { Some(model.frame(&chart)?) } else { None };
    let h = model.ladder(&chart);
    let lambda = Expr::int(-l * (l + 1));
    let mut fam = HarmonicFamily::new("so3", &format!("so3-{kind}"), &[("l", l.to_string())], lambda.to_string());
    let mut current = top;
    for m in (-l..=l).rev() {
        fam.members.push(Member::new(&label_strings(l, m, kind), Some(current.clone())));
        if m > -l {
            let lowered = lie_along(&h[1], frame.as_ref(), &current)?;
            let k = Expr::int(l * (l + 1) - m * (m - 1));
            current = lowered.scale(&Expr::half_pow(k, -1));
        }
    }
    fam.notes.push("components are proportional to exp(i m phi) P^l_{nm}; the top member has unit leading coefficient".into());
    certify_family(model, &mut fam)?;
    Ok(fam)
}

/// Number of `(member, spin sum)` pairs carrying a nonzero component.
pub fn weight_class_count(model: &So3Model, fam: &HarmonicFamily) -> usize {
    let mut count = 0;
    for t in fam.members.iter().filter_map(|m| m.tensor.as_ref()) {
        let w = model.leg_weights(&t.chart);
        let mut sums: Vec<i64> = t
            .components
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(flat, _)| if t.rank() == 0 { 0 } else { t.multi_index(flat).iter().map(|&a| w[a]).sum() })
            .collect();
        sums.sort_unstable();
        sums.dedup();
        count += sums.len();
    }
    count
}

/// Recomputes every certificate of an SO(3) family from its tensors.
pub fn certify_family(model: &So3Model, fam: &mut HarmonicFamily) -> Result<(), ModelError> {
    fam.clear_checks();
    let first = fam.members.first().and_then(|m| m.tensor.clone()).ok_or_else(|| ModelError::Label("empty family".into()))?;
    let chart = first.chart.clone();
    let domain = chart.sample_box(fam.seed);
    let op = model.casimir(&chart)?;
    let frame = if matches!(first.frame, FrameTag::Named(_)) { op.frame.clone() } else { None };
    let h = model.ladder(&chart);
    let weights = model.leg_weights(&chart);
    let l = fam.members[0].label_i64("l")?;
    let lambda = Expr::int(-l * (l + 1));

    let mut tensors = Vec::new();
    for member in &mut fam.members {
        let m = member.label_i64("m")?;
        let t = member.tensor.clone().ok_or_else(|| ModelError::Label("member without tensor".into()))?;
        let mut checks = Vec::new();
        checks.push(Check::new("casimir-eigen", op.certify_eigen(&t, &lambda, &domain)?.residual));
        checks.push(Check::new("h3-eigen", certify_lie_eigen(&h[2], frame.as_ref(), &t, &Expr::int(m), &domain)?));

        let mut reduced = Vec::new();
        let mut prop = Vec::new();
        for (flat, c) in t.components.iter().enumerate() {
            let n: i64 = t.multi_index(flat).iter().map(|&a| weights[a]).sum();
            let target = if n.abs() > l {
                Expr::zero()
            } else {
                chart.parse(&format!("exp({m}*i*phi)")).unwrap() * solve_plnm(l, n, m)?.expr
            };
            prop.push(proportional(c, &target, &chart.coords, &domain)?);
            if !c.is_zero() {
                let r = model.spin_weighted_operator(n).apply(c) + c.scale(&Coeff::int(l * (l + 1)));
                reduced.push(is_zero(&r, &domain).map_err(crate::tensor::TensorError::from)?);
            }
        }
        checks.push(Check::new("reduced-operator-eigen", combine(reduced)));
        checks.push(Check::new("solver-proportional", combine(prop)));
        if frame.is_some() {
            checks.push(Check::new("reduction-consistency", op.reduction_consistency(&t, &domain)?));
        }

        let lp = lie_along(&h[0], frame.as_ref(), &t)?;
        let lm = lie_along(&h[1], frame.as_ref(), &t)?;
        let l3 = lie_along(&h[2], frame.as_ref(), &t)?;
        let mut alg = Vec::new();
        for (s, ls) in [(1, &lp), (-1, &lm)] {
            // [ℒ_{H_s}, ℒ_{H_3}] = −s ℒ_{H_s}
            let a = lie_along(&h[if s == 1 { 0 } else { 1 }], frame.as_ref(), &l3)?;
            let b = lie_along(&h[2], frame.as_ref(), ls)?;
            alg.push(a.sub(&b).add(&ls.scale(&Expr::int(s))).zero_verdict(&domain)?.0);
        }
        let pm = lie_along(&h[0], frame.as_ref(), &lm)?;
        let mp = lie_along(&h[1], frame.as_ref(), &lp)?;
        alg.push(pm.sub(&mp).sub(&l3.scale(&Expr::int(2))).zero_verdict(&domain)?.0);
        checks.push(Check::new("ladder-algebra", combine(alg)));
        member.checks = checks;
        tensors.push((m, t, lp, lm));
    }

    for (m, _, lp, lm) in &tensors {
        for (s, img) in [(1i64, lp), (-1, lm)] {
            let target = tensors.iter().find(|(k, ..)| *k == m + s).map(|(_, t, ..)| t);
            let coeff = ladder_coefficient(l, *m, s);
            let diff = match target {
                Some(t) => img.sub(&t.scale(&coeff)),
                None => img.clone(),
            };
            let name = format!("ladder s={s:+} m={m}: coefficient {coeff}");
            fam.checks.push(Check::new(name, diff.zero_verdict(&domain)?.0));
        }
    }
    Ok(())
}

/// `ℒ_{H_s}` applied to every member; each image is compared with
/// `√(l(l+1) − m(m+s))` times the member at `m + s` (zero past the edge).
pub fn apply_ladder(model: &So3Model, fam: &HarmonicFamily, s: i64) -> Result<HarmonicFamily, ModelError> {
    let first = fam.members.first().and_then(|m| m.tensor.clone()).ok_or_else(|| ModelError::Label("empty family".into()))?;
    let chart = first.chart.clone();
    let frame = if matches!(first.frame, FrameTag::Named(_)) { Some(model.frame(&chart)?) } else { None };
    let h = &model.ladder(&chart)[if s == 1 { 0 } else { 1 }];
    let l = fam.members[0].label_i64("l")?;
    let mut out = HarmonicFamily::new("so3", &fam.kind, &[("l", l.to_string()), ("s", s.to_string())], fam.lambda.clone());
    out.params = fam.params.clone();
    out.seed = fam.seed;
    for member in &fam.members {
        let m = member.label_i64("m")?;
        let t = member.tensor.as_ref().unwrap();
        let img = lie_along(h, frame.as_ref(), t)?;
        let coeff = ladder_coefficient(l, m, s);
        let target = fam.members.iter().find(|x| x.label_i64("m").ok() == Some(m + s)).and_then(|x| x.tensor.clone());
        let verdict = match target {
            Some(tt) => img.sub(&tt.scale(&coeff)).zero_verdict(&chart.sample_box(fam.seed))?.0,
            None => img.zero_verdict(&chart.sample_box(fam.seed))?.0,
        };
        let mut labels = label_strings(l, m + s, member.label("type").unwrap_or("scalar"));
        labels.push(("coefficient", coeff.to_string()));
        let mut nm = Member::new(&labels, Some(img));
        nm.checks.push(Check::new("ladder-coefficient", verdict));
        out.members.push(nm);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::verify_realization;

    #[test]
    fn realizations_close() {
        let m = So3Model::new();
        let b = m.sphere.sample_box(0);
        assert!(verify_realization(&m.xi(&m.sphere), &m.sc, &b).unwrap().all_symbolic());
        assert!(verify_realization(&m.ladder(&m.sphere), &m.ladder_sc, &b).unwrap().all_symbolic());
        assert!(verify_realization(&m.xi(&m.spatial), &m.sc, &m.spatial.sample_box(0)).unwrap().all_symbolic());
    }

    #[test]
    fn ladder_form_equals_delta_form() {
        let m = So3Model::new();
        let k = m.casimir(&m.sphere).unwrap().k_operator();
        let b = m.sphere.sample_box(0);
        assert!(m.ladder_casimir().difference_verdict(&k, &b).unwrap().is_symbolic());
        assert!(m.laplacian().difference_verdict(&k, &b).unwrap().is_symbolic());
    }

    #[test]
    fn ladder_coefficients() {
        assert!(ladder_coefficient(1, 1, 1).is_zero());
        assert_eq!(ladder_coefficient(1, 0, 1), Expr::sqrt(Expr::int(2)));
        assert_eq!(ladder_coefficient(2, -1, -1), Expr::int(2));
    }

    #[test]
    fn scalar_l1_family() {
        let m = So3Model::new();
        let f = scalar_family(&m, 1).unwrap();
        assert_eq!(f.members.len(), 3);
        assert!(f.passed(), "{:#?}", f.all_checks().filter(|c| !c.passed()).collect::<Vec<_>>());
        let mid = f.members[1].tensor.as_ref().unwrap();
        let ratio = &mid.components[0] * &Expr::cos(Expr::sym("theta")).powi(-1);
        assert!(ratio.symbols().is_empty(), "{}", mid.components[0]);
    }

    #[test]
    fn scalar_l0_is_constant() {
        let m = So3Model::new();
        let f = scalar_family(&m, 0).unwrap();
        assert_eq!(f.members.len(), 1);
        assert!(f.members[0].tensor.as_ref().unwrap().components[0].as_constant().is_some());
        assert!(f.passed());
    }

    #[test]
    fn tensor_l1_family_certifies() {
        let m = So3Model::new();
        let f = tensor20_family(&m, 1).unwrap();
        assert!(f.passed(), "{:#?}", f.all_checks().filter(|c| !c.passed()).collect::<Vec<_>>());
    }

    #[test]
    fn ladder_images_match_coefficients() {
        let m = So3Model::new();
        let f = scalar_family(&m, 2).unwrap();
        let up = apply_ladder(&m, &f, 1).unwrap();
        assert!(up.passed());
        assert_eq!(up.members[0].label("coefficient"), Some("0"));
        let down = apply_ladder(&m, &f, -1).unwrap();
        let row = down.members.iter().find(|x| x.label("m") == Some("-2")).unwrap();
        assert_eq!(row.label("coefficient"), Some("2"));
        assert!(down.passed());
    }
}
