//! Regular solutions `P^l_{nm}(cos θ)` of
//! `P'' + cot θ P' − (m² − 2mn cos θ + n²)/sin²θ P + l(l+1) P = 0`.
//!
//! Ansatz `P = (1−x)^{|n−m|/2} (1+x)^{|n+m|/2} y(u)` with `x = cos θ`,
//! `u = (1−x)/2`. Substituting gives the two-term recurrence
//! `c_{j+1}(j+1)(j+a+1) = c_j [j(j+a+b+1) − (l(l+1) − ρ(ρ+1))]`,
//! `a = |n−m|`, `b = |n+m|`, `ρ = (a+b)/2`, which terminates at `j = l − ρ`.

use num::rational::BigRational;
use num::{One, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::expr::{is_zero, rat, Coeff, Expr, SampleBox, UndefinedPoint, ZeroVerdict};

#[derive(Debug, Error, PartialEq)]
pub enum LegendreError {
    #[error("label out of range: l = {l} must be non-negative")]
    Label { l: i64 },
    #[error("recurrence for (l={l}, n={n}, m={m}) never terminates: no index j ≥ 0 makes the coefficient vanish (checked through j = {checked})")]
    NonTerminating { l: i64, n: i64, m: i64, checked: i64 },
}

#[derive(Debug, Clone)]
pub struct GeneralizedLegendre {
    pub l: i64,
    pub n: i64,
    pub m: i64,
    /// Coefficients of `y` in powers of `x = cos θ`, leading one equal to 1.
    pub poly_x: Vec<BigRational>,
    /// `P` as a function of `theta`.
    pub expr: Expr,
    pub residual: ZeroVerdict,
}

#[derive(Debug, Clone, Serialize)]
pub struct LegendreSummary {
    pub l: i64,
    pub n: i64,
    pub m: i64,
    pub expr: String,
    pub residual: ZeroVerdict,
}

impl GeneralizedLegendre {
    pub fn summary(&self) -> LegendreSummary {
        LegendreSummary { l: self.l, n: self.n, m: self.m, expr: self.expr.to_string(), residual: self.residual.clone() }
    }
}

/// Left-hand operator of the ODE applied to `p(θ)`.
pub fn legendre_residual(p: &Expr, l: i64, n: i64, m: i64) -> Expr {
    let th = Expr::sym("theta");
    let d1 = p.diff("theta");
    let d2 = d1.diff("theta");
    let pot = Expr::int(m * m + n * n) - Expr::cos(th.clone()).scale(&Coeff::int(2 * m * n));
    let inv_sin2 = Expr::sin(th.clone()).powi(-2);
    d2 + Expr::cot(th) * d1 - &(&pot * &inv_sin2) * p + p.scale(&Coeff::int(l * (l + 1)))
}

pub fn sphere_theta_box(seed: u64) -> SampleBox {
    SampleBox::new(vec![("theta".into(), 0.01, std::f64::consts::PI - 0.01)]).with_seed(seed)
}

/// Coefficients `c_0..c_J` of `y(u)`, `c_0 = 1`.
pub fn series_coefficients(l: i64, n: i64, m: i64) -> Result<Vec<BigRational>, LegendreError> {
    if l < 0 {
        return Err(LegendreError::Label { l });
    }
    let a = (n - m).abs();
    let b = (n + m).abs();
    let rho = (a + b) / 2;
    let target = l * (l + 1) - rho * (rho + 1);
    let limit = l + 1;
    let mut c = vec![BigRational::one()];
    for j in 0..=limit {
        let factor = j * (j + a + b + 1) - target;
        if factor == 0 {
            return Ok(c);
        }
        let next = c[j as usize].clone() * rat(factor, (j + 1) * (j + a + 1));
        c.push(next);
    }
    Err(LegendreError::NonTerminating { l, n, m, checked: limit })
}

/// Converts `Σ c_j u^j`, `u = (1−x)/2`, to coefficients in `x`.
fn to_x_basis(c: &[BigRational]) -> Vec<BigRational> {
    let mut out = vec![BigRational::zero(); c.len()];
    // (1−x)^j / 2^j expanded with binomials
    for (j, cj) in c.iter().enumerate() {
        let scale = cj / BigRational::from_integer(num::pow(num::BigInt::from(2), j));
        let mut binom = BigRational::one();
        for k in 0..=j {
            let sign = if k % 2 == 0 { BigRational::one() } else { -BigRational::one() };
            out[k] += &scale * &binom * sign;
            binom = binom * rat((j - k) as i64, (k + 1) as i64);
        }
    }
    out
}

pub fn solve_plnm(l: i64, n: i64, m: i64) -> Result<GeneralizedLegendre, LegendreError> {
    let c = series_coefficients(l, n, m)?;
    let mut poly = to_x_basis(&c);
    let lead = poly.last().cloned().expect("non-empty series");
    for p in poly.iter_mut() {
        *p = &*p / &lead;
    }
    let th = Expr::sym("theta");
    let x = Expr::cos(th.clone());
    let y = poly.iter().rev().fold(Expr::zero(), |acc, p| &acc * &x + Expr::constant(Coeff::real(p.clone())));
    let a = (n - m).abs();
    let b = (n + m).abs();
    let one_minus = Expr::one() - x.clone();
    let one_plus = Expr::one() + x;
    let prefactor = if a % 2 == 1 {
        // (1−x)^{1/2}(1+x)^{1/2} = sin θ on (0, π)
        Expr::sin(th) * one_minus.powi(((a - 1) / 2) as i32) * one_plus.powi(((b - 1) / 2) as i32)
    } else {
        one_minus.powi((a / 2) as i32) * one_plus.powi((b / 2) as i32)
    };
    let expr = &prefactor * &y;
    let r = legendre_residual(&expr, l, n, m);
    let residual = is_zero(&r, &sphere_theta_box(0)).unwrap_or_else(|UndefinedPoint { point }| {
        ZeroVerdict::Nonzero { witness: point, value_re: f64::NAN, value_im: f64::NAN }
    });
    Ok(GeneralizedLegendre { l, n, m, poly_x: poly, expr, residual })
}
