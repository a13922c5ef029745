//! Gauss series `2F1(a, b; c; z)` and the two-branch solution of
//! `(1+υ²) f'' + (1−2μ) υ f' + (μ² + ν²) f = λ f`.
//!
//! With `z = −υ²` the equation becomes the hypergeometric equation with
//! `c = 1/2`, `a + b = −μ`, `ab = (μ² − σ)/4`, `σ = λ − ν²`, hence
//! `a, b = (−μ ∓ √σ)/2`. The second branch is `|υ| 2F1(a+½, b+½; 3/2; −υ²)`.

use num::complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use super::family::{fmt17, Check, HarmonicFamily, Member};
use crate::expr::ZeroVerdict;

pub const RESIDUAL_TOLERANCE: f64 = 1e-8;
const MAX_TERMS: usize = 200_000;

#[derive(Debug, Error, PartialEq)]
pub enum HypergeometricError {
    #[error("series diverges at |z| = {0} ≥ 1; analytic continuation is not supported")]
    NonConvergent(f64),
    #[error("c = {0} is a non-positive integer")]
    Pole(f64),
    #[error("second branch is only certified for υ > 0 (got {0})")]
    Branch(f64),
}

pub fn hyp2f1(a: Complex64, b: Complex64, c: Complex64, z: Complex64) -> Result<Complex64, HypergeometricError> {
    if z.norm() >= 1.0 {
        return Err(HypergeometricError::NonConvergent(z.norm()));
    }
    if c.im == 0.0 && c.re <= 0.0 && c.re.fract() == 0.0 {
        return Err(HypergeometricError::Pole(c.re));
    }
    let mut sum = Complex64::new(1.0, 0.0);
    let mut term = Complex64::new(1.0, 0.0);
    for k in 0..MAX_TERMS {
        let kf = k as f64;
        term = term * (a + kf) * (b + kf) / ((c + kf) * (kf + 1.0)) * z;
        sum += term;
        if term.norm() <= f64::EPSILON * 1e-2 * sum.norm().max(1e-300) {
            return Ok(sum);
        }
    }
    Err(HypergeometricError::NonConvergent(z.norm()))
}

/// Value, first and second `z`-derivatives of `2F1`.
fn hyp_with_derivs(a: Complex64, b: Complex64, c: Complex64, z: Complex64) -> Result<[Complex64; 3], HypergeometricError> {
    let one = Complex64::new(1.0, 0.0);
    let f0 = hyp2f1(a, b, c, z)?;
    let f1 = a * b / c * hyp2f1(a + one, b + one, c + one, z)?;
    let f2 = a * (a + one) * b * (b + one) / (c * (c + one)) * hyp2f1(a + 2.0, b + 2.0, c + 2.0, z)?;
    Ok([f0, f1, f2])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BianchiHypergeometric {
    pub mu: f64,
    pub nu: f64,
    pub lambda: f64,
    pub a_amp: f64,
    pub b_amp: f64,
}

impl BianchiHypergeometric {
    pub fn sigma(&self) -> f64 {
        self.lambda - self.nu * self.nu
    }

    fn sqrt_sigma(&self) -> Complex64 {
        Complex64::new(self.sigma(), 0.0).sqrt()
    }

    /// `(a, b, c)` of the even branch.
    pub fn even_parameters(&self) -> [Complex64; 3] {
        let s = self.sqrt_sigma();
        let mu = Complex64::new(self.mu, 0.0);
        [(-mu - s) / 2.0, (-mu + s) / 2.0, Complex64::new(0.5, 0.0)]
    }

    /// `(a, b, c)` of the odd branch.
    pub fn odd_parameters(&self) -> [Complex64; 3] {
        let [a, b, _] = self.even_parameters();
        [a + 0.5, b + 0.5, Complex64::new(1.5, 0.0)]
    }

    /// The alternative parameter set built on `√(2μ² − σ)`, kept so that its
    /// residual can be reported next to the one actually used.
    pub fn alternative_parameters(&self) -> ([Complex64; 3], [Complex64; 3]) {
        let s = Complex64::new(2.0 * self.mu * self.mu - self.sigma(), 0.0).sqrt();
        let mu = Complex64::new(self.mu, 0.0);
        let half = Complex64::new(0.5, 0.0);
        (
            [(-mu - s) / 2.0, (-mu + s) / 2.0, half],
            [(-mu - s - 1.0) / 2.0, (-mu + s + 1.0) / 2.0, Complex64::new(1.5, 0.0)],
        )
    }

    pub fn uses_second_branch(&self) -> bool {
        self.b_amp != 0.0
    }

    /// `f, f', f''` at `υ`.
    pub fn eval_with(&self, even: [Complex64; 3], odd: [Complex64; 3], v: f64) -> Result<[Complex64; 3], HypergeometricError> {
        let z = Complex64::new(-v * v, 0.0);
        let mut out = [Complex64::new(0.0, 0.0); 3];
        if self.a_amp != 0.0 {
            let [f, d1, d2] = hyp_with_derivs(even[0], even[1], even[2], z)?;
            out[0] += self.a_amp * f;
            out[1] += self.a_amp * (-2.0 * v) * d1;
            out[2] += self.a_amp * (4.0 * v * v * d2 - 2.0 * d1);
        }
        if self.uses_second_branch() {
            if v <= 0.0 {
                return Err(HypergeometricError::Branch(v));
            }
            let [f, d1, d2] = hyp_with_derivs(odd[0], odd[1], odd[2], z)?;
            out[0] += self.b_amp * v * f;
            out[1] += self.b_amp * (f - 2.0 * v * v * d1);
            out[2] += self.b_amp * (-6.0 * v * d1 + 4.0 * v * v * v * d2);
        }
        Ok(out)
    }

    pub fn eval(&self, v: f64) -> Result<[Complex64; 3], HypergeometricError> {
        self.eval_with(self.even_parameters(), self.odd_parameters(), v)
    }

    pub fn value(&self, v: f64) -> Result<Complex64, HypergeometricError> {
        Ok(self.eval(v)?[0])
    }

    pub fn ode_residual_of(&self, f: [Complex64; 3], v: f64) -> Complex64 {
        let mu = self.mu;
        (1.0 + v * v) * f[2] + (1.0 - 2.0 * mu) * v * f[1] + (mu * mu + self.nu * self.nu - self.lambda) * f[0]
    }

    pub fn residual(&self, v: f64) -> Result<Complex64, HypergeometricError> {
        Ok(self.ode_residual_of(self.eval(v)?, v))
    }

    /// Sample points in `|υ| ≤ 0.9`, restricted to `υ > 0` for the second branch.
    pub fn sample_points(&self, count: usize) -> Vec<f64> {
        let (lo, hi) = if self.uses_second_branch() { (0.9 / count as f64, 0.9) } else { (-0.9, 0.9) };
        (0..count).map(|k| lo + (hi - lo) * k as f64 / (count - 1) as f64).collect()
    }

    pub fn certify(&self, count: usize) -> Result<ZeroVerdict, HypergeometricError> {
        verdict_over(&self.sample_points(count), |v| self.residual(v))
    }

    /// Certificate for the alternative parameter set, for comparison.
    pub fn certify_alternative(&self, count: usize) -> Result<ZeroVerdict, HypergeometricError> {
        let (even, odd) = self.alternative_parameters();
        verdict_over(&self.sample_points(count), |v| Ok(self.ode_residual_of(self.eval_with(even, odd, v)?, v)))
    }
}

fn verdict_over(
    points: &[f64],
    f: impl Fn(f64) -> Result<Complex64, HypergeometricError>,
) -> Result<ZeroVerdict, HypergeometricError> {
    let mut worst = (0.0f64, 0.0f64, Complex64::new(0.0, 0.0));
    for &v in points {
        let r = f(v)?;
        if !(r.norm() <= worst.0) {
            worst = (r.norm(), v, r);
        }
    }
    Ok(if worst.0 < RESIDUAL_TOLERANCE {
        ZeroVerdict::NumericallyZero { max_abs: worst.0 }
    } else {
        ZeroVerdict::Nonzero { witness: vec![("v".into(), worst.1)], value_re: worst.2.re, value_im: worst.2.im }
    })
}

pub const SAMPLE_POINTS: usize = 16;

pub fn family(p: BianchiHypergeometric) -> Result<HarmonicFamily, HypergeometricError> {
    let labels = [
        ("mu", fmt17(p.mu)),
        ("nu", fmt17(p.nu)),
        ("lambda", fmt17(p.lambda)),
        ("sigma", fmt17(p.sigma())),
        ("A", fmt17(p.a_amp)),
        ("B", fmt17(p.b_amp)),
    ];
    let mut fam = HarmonicFamily::new("bianchi2", "bianchi2-hypergeometric", &labels, fmt17(p.lambda));
    fam.params = vec!["A".into(), "B".into()];
    fam.members.push(Member::new(&labels, None));
    if p.uses_second_branch() {
        fam.notes.push("second branch |v| 2F1(a+1/2, b+1/2; 3/2; -v^2) certified on v > 0 only".into());
    }
    fam.notes.push("series evaluated inside |v| < 1; no analytic continuation".into());
    certify_family(&mut fam)?;
    Ok(fam)
}

pub fn parameters_from_labels(m: &Member) -> Option<BianchiHypergeometric> {
    let g = |k: &str| m.label(k).and_then(|s| s.parse::<f64>().ok());
    Some(BianchiHypergeometric { mu: g("mu")?, nu: g("nu")?, lambda: g("lambda")?, a_amp: g("A")?, b_amp: g("B")? })
}

pub fn certify_family(fam: &mut HarmonicFamily) -> Result<(), HypergeometricError> {
    fam.clear_checks();
    for m in &mut fam.members {
        let Some(p) = parameters_from_labels(m) else { continue };
        m.checks.push(Check::new("ode-residual", p.certify(SAMPLE_POINTS)?));
    }
    Ok(())
}

/// CSV of `f(υ)` on an evenly spaced grid.
pub fn samples_csv(p: &BianchiHypergeometric, a: f64, b: f64, n: usize) -> Result<String, HypergeometricError> {
    let mut out = String::from("v,re,im\n");
    for k in 0..n {
        let v = if n <= 1 { a } else { a + (b - a) * k as f64 / (n - 1) as f64 };
        let f = p.value(v)?;
        out.push_str(&format!("{},{},{}\n", fmt17(v), fmt17(f.re), fmt17(f.im)));
    }
    Ok(out)
}
