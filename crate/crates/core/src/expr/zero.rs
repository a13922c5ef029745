//! Tri-state zero test: exact rewriting first, quasi-random sampling second.

use num::complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{Env, EvalError, Expr};

pub const SAMPLE_COUNT: usize = 32;
pub const NUMERIC_TOLERANCE: f64 = 1e-9;

/// Default interval for symbols the box does not mention (free parameters).
const PARAM_INTERVAL: (f64, f64) = (0.5, 1.5);

const PRIMES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum ZeroVerdict {
    SymbolicallyZero,
    NumericallyZero { max_abs: f64 },
    Nonzero { witness: Vec<(String, f64)>, value_re: f64, value_im: f64 },
}

impl ZeroVerdict {
    pub fn is_zero(&self) -> bool {
        !matches!(self, ZeroVerdict::Nonzero { .. })
    }

    pub fn is_symbolic(&self) -> bool {
        matches!(self, ZeroVerdict::SymbolicallyZero)
    }

    pub fn label(&self) -> &'static str {
        match self {
            ZeroVerdict::SymbolicallyZero => "symbolically-zero",
            ZeroVerdict::NumericallyZero { .. } => "numerically-zero",
            ZeroVerdict::Nonzero { .. } => "nonzero",
        }
    }

    /// Combines verdicts: nonzero dominates, then numeric, then symbolic.
    pub fn and(self, other: ZeroVerdict) -> ZeroVerdict {
        match (&self, &other) {
            (ZeroVerdict::Nonzero { .. }, _) => self,
            (_, ZeroVerdict::Nonzero { .. }) => other,
            (ZeroVerdict::NumericallyZero { max_abs: a }, ZeroVerdict::NumericallyZero { max_abs: b }) => {
                ZeroVerdict::NumericallyZero { max_abs: a.max(*b) }
            }
            (ZeroVerdict::NumericallyZero { .. }, _) => self,
            (_, ZeroVerdict::NumericallyZero { .. }) => other,
            _ => self,
        }
    }
}

/// Coordinate box for numeric sampling, plus the low-discrepancy seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleBox {
    pub intervals: Vec<(String, f64, f64)>,
    pub seed: u64,
}

impl SampleBox {
    pub fn new(intervals: Vec<(String, f64, f64)>) -> Self {
        SampleBox { intervals, seed: 0 }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Halton point `index` covering the box coordinates and the extra symbols.
    pub fn point(&self, index: usize, extra: &[String]) -> Env {
        let n = self.seed.wrapping_mul(SAMPLE_COUNT as u64).wrapping_add(index as u64 + 1);
        let mut env = Env::new();
        let mut dim = 0;
        for (name, lo, hi) in &self.intervals {
            let u = radical_inverse(n, PRIMES[dim % PRIMES.len()]);
            env.insert(name.clone(), Complex64::new(lo + (hi - lo) * u, 0.0));
            dim += 1;
        }
        for name in extra {
            if env.contains_key(name) {
                continue;
            }
            let u = radical_inverse(n, PRIMES[dim % PRIMES.len()]);
            let (lo, hi) = PARAM_INTERVAL;
            env.insert(name.clone(), Complex64::new(lo + (hi - lo) * u, 0.0));
            dim += 1;
        }
        env
    }
}

fn radical_inverse(mut n: u64, base: u64) -> f64 {
    let mut inv = 1.0 / base as f64;
    let mut acc = 0.0;
    while n > 0 {
        acc += (n % base) as f64 * inv;
        n /= base;
        inv /= base as f64;
    }
    acc
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("expression undefined at sample point {point:?}; shrink the domain box")]
pub struct UndefinedPoint {
    pub point: Vec<(String, f64)>,
}

/// Decides whether `e` vanishes on the box.
///
/// Symbolic zero: the expression with denominators cleared reduces to the
/// zero literal. Otherwise 32 sample points are evaluated and the result is
/// numerically zero iff `max|value| < 1e-9 * (1 + max|term|)`.
pub fn is_zero(e: &Expr, domain: &SampleBox) -> Result<ZeroVerdict, UndefinedPoint> {
    is_zero_with(e, domain, SAMPLE_COUNT)
}

pub fn is_zero_with(e: &Expr, domain: &SampleBox, samples: usize) -> Result<ZeroVerdict, UndefinedPoint> {
    if e.is_zero() || e.clear_denominators().is_zero() {
        return Ok(ZeroVerdict::SymbolicallyZero);
    }
    let extra: Vec<String> = e.symbols().into_iter().collect();
    let mut max_abs: f64 = 0.0;
    let mut max_term: f64 = 0.0;
    let mut worst: Option<(Env, Complex64)> = None;
    for k in 0..samples {
        let env = domain.point(k, &extra);
        let terms = e.eval_terms(&env).map_err(|err| match err {
            EvalError::Undefined | EvalError::Unbound(_) => UndefinedPoint { point: env_vec(&env) },
        })?;
        let v: Complex64 = terms.iter().sum();
        if !(v.re.is_finite() && v.im.is_finite()) {
            return Err(UndefinedPoint { point: env_vec(&env) });
        }
        for t in &terms {
            max_term = max_term.max(t.norm());
        }
        if worst.as_ref().map(|(_, w)| v.norm() > w.norm()).unwrap_or(true) {
            worst = Some((env, v));
        }
        max_abs = max_abs.max(v.norm());
    }
    if max_abs < NUMERIC_TOLERANCE * (1.0 + max_term) {
        Ok(ZeroVerdict::NumericallyZero { max_abs })
    } else {
        let (env, v) = worst.expect("at least one sample");
        Ok(ZeroVerdict::Nonzero { witness: env_vec(&env), value_re: v.re, value_im: v.im })
    }
}

fn env_vec(env: &Env) -> Vec<(String, f64)> {
    let mut v: Vec<(String, f64)> = env.iter().map(|(k, z)| (k.clone(), z.re)).collect();
    v.sort_by(|a, b| a.0.cmp(&b.0));
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    fn sphere_box() -> SampleBox {
        SampleBox::new(vec![
            ("theta".into(), 0.01, std::f64::consts::PI - 0.01),
            ("phi".into(), 0.0, 2.0 * std::f64::consts::PI),
        ])
    }

    #[test]
    fn pythagorean_identity_is_symbolic() {
        let e = parse("sin(theta)^2 + cos(theta)^2 - 1", &["theta", "phi"]).unwrap();
        assert_eq!(is_zero(&e, &sphere_box()).unwrap(), ZeroVerdict::SymbolicallyZero);
    }

    #[test]
    fn cot_csc_identity_is_symbolic() {
        let e = parse("cot(theta)^2 - 1/sin(theta)^2 + 1", &["theta"]).unwrap();
        assert!(is_zero(&e, &sphere_box()).unwrap().is_symbolic());
    }

    #[test]
    fn root_ode_residual_is_symbolic() {
        let f = parse("(1+v^2)^(1/2)", &["v"]).unwrap();
        let v = Expr::sym("v");
        let r = &(Expr::one() + v.powi(2)) * &f.diff("v").diff("v") + &v * &f.diff("v") - f;
        let b = SampleBox::new(vec![("v".into(), -0.9, 0.9)]);
        assert!(is_zero(&r, &b).unwrap().is_symbolic());
    }

    #[test]
    fn cosine_is_nonzero_with_witness() {
        let e = parse("cos(theta)", &["theta"]).unwrap();
        match is_zero(&e, &sphere_box()).unwrap() {
            ZeroVerdict::Nonzero { witness, .. } => assert!(witness.iter().any(|(k, _)| k == "theta")),
            v => panic!("expected nonzero, got {v:?}"),
        }
    }

    #[test]
    fn undefined_point_reported() {
        let e = parse("1/sin(theta) - 1", &["theta"]).unwrap();
        let b = SampleBox::new(vec![("theta".into(), 0.0, 0.0)]);
        assert!(is_zero(&e, &b).is_err());
    }

    #[test]
    fn numeric_fallback_catches_unreduced_identity() {
        // sin(2t) - 2 sin t cos t is outside the rewrite set
        let e = parse("sin(2*t) - 2*sin(t)*cos(t)", &["t"]).unwrap();
        let b = SampleBox::new(vec![("t".into(), 0.1, 3.0)]);
        assert!(matches!(is_zero(&e, &b).unwrap(), ZeroVerdict::NumericallyZero { .. }));
    }

    #[test]
    fn sampling_is_deterministic() {
        let b = sphere_box().with_seed(7);
        assert_eq!(b.point(3, &[]), b.point(3, &[]));
        assert_ne!(b.point(3, &[]), sphere_box().point(3, &[]));
    }
}
