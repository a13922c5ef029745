use std::collections::HashMap;

use num::complex::Complex64;
use thiserror::Error;

use super::{Atom, Expr, Monomial};

/// Numeric values for symbols.
pub type Env = HashMap<String, Complex64>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum EvalError {
    #[error("symbol `{0}` has no value")]
    Unbound(String),
    #[error("expression is undefined at the sample point")]
    Undefined,
}

impl Expr {
    pub fn eval(&self, env: &Env) -> Result<Complex64, EvalError> {
        let mut acc = Complex64::new(0.0, 0.0);
        for (m, c) in self.terms() {
            acc += c.to_complex() * eval_monomial(m, env)?;
        }
        check(acc)
    }

    /// Values of the individual terms, used to scale numeric tolerances.
    pub fn eval_terms(&self, env: &Env) -> Result<Vec<Complex64>, EvalError> {
        self.terms()
            .map(|(m, c)| eval_monomial(m, env).map(|v| c.to_complex() * v))
            .collect()
    }

    pub fn eval_real(&self, env: &Env) -> Result<f64, EvalError> {
        self.eval(env).map(|z| z.re)
    }
}

fn check(z: Complex64) -> Result<Complex64, EvalError> {
    if z.re.is_finite() && z.im.is_finite() {
        Ok(z)
    } else {
        Err(EvalError::Undefined)
    }
}

fn eval_monomial(m: &Monomial, env: &Env) -> Result<Complex64, EvalError> {
    let mut acc = Complex64::new(1.0, 0.0);
    for (a, k) in m.factors() {
        let v = match a {
            Atom::Sym(s) => *env.get(s.as_ref()).ok_or_else(|| EvalError::Unbound(s.to_string()))?,
            Atom::Sin(e) => e.eval(env)?.sin(),
            Atom::Cos(e) => e.eval(env)?.cos(),
            Atom::Root(e) => e.eval(env)?.sqrt(),
        };
        acc *= v.powi(k);
    }
    if let Some(arg) = m.exp_arg() {
        acc *= arg.eval(env)?.exp();
    }
    check(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    #[test]
    fn evaluates_elementary_functions() {
        let e = parse("cot(theta)*cos(phi) + exp(2*phi)", &["theta", "phi"]).unwrap();
        let mut env = Env::new();
        env.insert("theta".into(), Complex64::new(0.7, 0.0));
        env.insert("phi".into(), Complex64::new(0.3, 0.0));
        let want = 0.7f64.cos() / 0.7f64.sin() * 0.3f64.cos() + (0.6f64).exp();
        assert!((e.eval(&env).unwrap().re - want).abs() < 1e-12);
    }

    #[test]
    fn unbound_symbol_is_reported() {
        let e = parse("x", &["x"]).unwrap();
        assert_eq!(e.eval(&Env::new()), Err(EvalError::Unbound("x".into())));
    }

    #[test]
    fn singular_point_is_undefined() {
        let e = parse("1/sin(t)", &["t"]).unwrap();
        let mut env = Env::new();
        env.insert("t".into(), Complex64::new(0.0, 0.0));
        assert_eq!(e.eval(&env), Err(EvalError::Undefined));
    }
}
