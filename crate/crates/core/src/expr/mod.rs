//! Minimal computer-algebra kernel over named chart coordinates.
//!
//! An [`Expr`] is kept in canonical form at all times: a sorted sum of terms,
//! each term an exact complex-rational coefficient times a [`Monomial`]. A
//! monomial is a product of atoms (symbols, `sin`, `cos`, square roots) raised
//! to integer powers, times at most one merged `exp` factor. The rewrite rules
//! applied during construction are:
//!
//! * `cos(a)^k` with `k >= 2` becomes `cos(a)^(k-2) * (1 - sin(a)^2)`;
//! * `sqrt(b)^k` with `k >= 2` becomes `b^(k/2)` times the leftover root;
//! * constant square roots are merged and reduced to a squarefree radicand;
//! * `exp(i*k*x)` with integer `k` is expanded as `(cos x + i sin x)^k`.
//!
//! Negative exponents are allowed on every atom, so quotients by single terms
//! stay exact. Quotients by sums are expressed as `sqrt(b)^(-2)`.

mod coeff;
mod eval;
mod parse;
mod zero;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{Integer, One, Signed, Zero};

pub use coeff::{rat, Coeff};
pub use eval::{Env, EvalError};
pub use parse::{parse, parse_with, ParseError};
pub use zero::{is_zero, is_zero_with, SampleBox, UndefinedPoint, ZeroVerdict, NUMERIC_TOLERANCE, SAMPLE_COUNT};

/// A non-constant building block of a monomial.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Atom {
    Sym(Arc<str>),
    Sin(Arc<Expr>),
    Cos(Arc<Expr>),
    /// `base^(1/2)`; the monomial exponent counts half powers.
    Root(Arc<Expr>),
}

/// Product of atoms with integer exponents and an optional `exp(arg)` factor.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial {
    factors: BTreeMap<Atom, i32>,
    exp: Option<Arc<Expr>>,
}

impl Monomial {
    pub fn is_one(&self) -> bool {
        self.factors.is_empty() && self.exp.is_none()
    }

    pub fn factors(&self) -> impl Iterator<Item = (&Atom, i32)> {
        self.factors.iter().map(|(a, k)| (a, *k))
    }

    pub fn exp_arg(&self) -> Option<&Expr> {
        self.exp.as_deref()
    }

    fn merged(&self, other: &Monomial) -> Monomial {
        let mut factors = self.factors.clone();
        for (a, k) in &other.factors {
            let e = factors.entry(a.clone()).or_insert(0);
            *e += k;
            if *e == 0 {
                factors.remove(a);
            }
        }
        let exp = match (&self.exp, &other.exp) {
            (None, None) => None,
            (Some(a), None) | (None, Some(a)) => Some(a.clone()),
            (Some(a), Some(b)) => {
                let s = a.as_ref() + b.as_ref();
                if s.is_zero() {
                    None
                } else {
                    Some(Arc::new(s))
                }
            }
        };
        Monomial { factors, exp }
    }
}

/// Canonical symbolic scalar expression.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Expr {
    terms: BTreeMap<Monomial, Coeff>,
}

impl Expr {
    pub fn zero() -> Expr {
        Expr::default()
    }

    pub fn one() -> Expr {
        Expr::constant(Coeff::one())
    }

    pub fn int(n: i64) -> Expr {
        Expr::constant(Coeff::int(n))
    }

    pub fn ratio(n: i64, d: i64) -> Expr {
        Expr::constant(Coeff::ratio(n, d))
    }

    pub fn i() -> Expr {
        Expr::constant(Coeff::i())
    }

    pub fn constant(c: Coeff) -> Expr {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(Monomial::default(), c);
        }
        Expr { terms }
    }

    pub fn sym(name: &str) -> Expr {
        Expr::atom(Atom::Sym(Arc::from(name)), 1)
    }

    fn atom(a: Atom, k: i32) -> Expr {
        let mut factors = BTreeMap::new();
        factors.insert(a, k);
        canon_term(Coeff::one(), Monomial { factors, exp: None })
    }

    pub fn sin(arg: Expr) -> Expr {
        if arg.is_zero() {
            return Expr::zero();
        }
        if arg.leading_negative() {
            return -Expr::atom(Atom::Sin(Arc::new(-arg)), 1);
        }
        Expr::atom(Atom::Sin(Arc::new(arg)), 1)
    }

    pub fn cos(arg: Expr) -> Expr {
        if arg.is_zero() {
            return Expr::one();
        }
        let arg = if arg.leading_negative() { -arg } else { arg };
        Expr::atom(Atom::Cos(Arc::new(arg)), 1)
    }

    pub fn cot(arg: Expr) -> Expr {
        Expr::cos(arg.clone()) * Expr::sin(arg).powi(-1)
    }

    pub fn tan(arg: Expr) -> Expr {
        Expr::sin(arg.clone()) * Expr::cos(arg).powi(-1)
    }

    pub fn exp(arg: Expr) -> Expr {
        if arg.is_zero() {
            return Expr::one();
        }
        canon_term(
            Coeff::one(),
            Monomial { factors: BTreeMap::new(), exp: Some(Arc::new(arg)) },
        )
    }

    pub fn sqrt(base: Expr) -> Expr {
        Expr::half_pow(base, 1)
    }

    /// `base^(k/2)`.
    pub fn half_pow(base: Expr, k: i32) -> Expr {
        if k % 2 == 0 {
            return base.powi(k / 2);
        }
        if base.is_zero() {
            return Expr::zero();
        }
        Expr::atom(Atom::Root(Arc::new(base)), k)
    }

    /// Integer power; negative powers of sums go through `sqrt(b)^(-2)`.
    pub fn powi(&self, k: i32) -> Expr {
        if k == 0 {
            return Expr::one();
        }
        if k < 0 {
            return self.recip().powi(-k);
        }
        let mut acc = Expr::one();
        let mut base = self.clone();
        let mut k = k as u32;
        while k > 0 {
            if k & 1 == 1 {
                acc = &acc * &base;
            }
            k >>= 1;
            if k > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Rational power with denominator 1 or 2.
    pub fn pow_rational(&self, p: &BigRational) -> Option<Expr> {
        let d = p.denom();
        let n = num::ToPrimitive::to_i32(p.numer())?;
        if d.is_one() {
            Some(self.powi(n))
        } else if *d == BigInt::from(2) {
            Some(Expr::half_pow(self.clone(), n))
        } else {
            None
        }
    }

    pub fn recip(&self) -> Expr {
        assert!(!self.is_zero(), "reciprocal of zero expression");
        if self.terms.len() == 1 {
            let (m, c) = self.terms.iter().next().unwrap();
            let factors = m.factors.iter().map(|(a, k)| (a.clone(), -k)).collect();
            let exp = m.exp.as_ref().map(|e| Arc::new(-e.as_ref().clone()));
            return canon_term(c.inv(), Monomial { factors, exp });
        }
        Expr::atom(Atom::Root(Arc::new(self.clone())), -2)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.as_constant().map(|c| c.is_one()).unwrap_or(false)
    }

    pub fn as_constant(&self) -> Option<Coeff> {
        match self.terms.len() {
            0 => Some(Coeff::zero()),
            1 => {
                let (m, c) = self.terms.iter().next().unwrap();
                if m.is_one() {
                    Some(c.clone())
                } else {
                    None
                }
            }
            _ => None,
        }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Coeff)> {
        self.terms.iter()
    }

    pub fn scale(&self, c: &Coeff) -> Expr {
        if c.is_zero() {
            return Expr::zero();
        }
        Expr {
            terms: self.terms.iter().map(|(m, k)| (m.clone(), k * c)).collect(),
        }
    }

    fn leading_negative(&self) -> bool {
        self.terms
            .iter()
            .next()
            .map(|(_, c)| c.leading_sign_negative())
            .unwrap_or(false)
    }

    /// Names of all symbols occurring anywhere in the expression.
    pub fn symbols(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_symbols(&mut out);
        out
    }

    fn collect_symbols(&self, out: &mut BTreeSet<String>) {
        for m in self.terms.keys() {
            for a in m.factors.keys() {
                match a {
                    Atom::Sym(s) => {
                        out.insert(s.to_string());
                    }
                    Atom::Sin(e) | Atom::Cos(e) | Atom::Root(e) => e.collect_symbols(out),
                }
            }
            if let Some(e) = &m.exp {
                e.collect_symbols(out);
            }
        }
    }

    pub fn depends_on(&self, x: &str) -> bool {
        self.terms.keys().any(|m| monomial_depends_on(m, x))
    }

    /// Exact partial derivative with respect to the symbol `x`.
    pub fn diff(&self, x: &str) -> Expr {
        let mut out = Expr::zero();
        for (m, c) in &self.terms {
            if !monomial_depends_on(m, x) {
                continue;
            }
            let base = Expr::from_term(c.clone(), m.clone());
            for (a, k) in &m.factors {
                let da = atom_diff(a, x);
                if da.is_zero() {
                    continue;
                }
                // k * atom^-1 * d(atom) * (whole term)
                let factor = Expr::atom(a.clone(), -1).scale(&Coeff::int(*k as i64));
                out = out + &(&base * &factor) * &da;
            }
            if let Some(arg) = &m.exp {
                let darg = arg.diff(x);
                if !darg.is_zero() {
                    out = out + &base * &darg;
                }
            }
        }
        out
    }

    /// Replaces the symbol `x` by `value` everywhere.
    pub fn subst(&self, x: &str, value: &Expr) -> Expr {
        if !self.depends_on(x) {
            return self.clone();
        }
        let mut out = Expr::zero();
        for (m, c) in &self.terms {
            let mut t = Expr::constant(c.clone());
            for (a, k) in &m.factors {
                let f = match a {
                    Atom::Sym(s) if s.as_ref() == x => value.powi(*k),
                    Atom::Sym(_) => Expr::atom(a.clone(), *k),
                    Atom::Sin(e) => Expr::sin(e.subst(x, value)).powi(*k),
                    Atom::Cos(e) => Expr::cos(e.subst(x, value)).powi(*k),
                    Atom::Root(e) => Expr::half_pow(e.subst(x, value), *k),
                };
                t = &t * &f;
            }
            if let Some(arg) = &m.exp {
                t = &t * &Expr::exp(arg.subst(x, value));
            }
            out = out + t;
        }
        out
    }

    /// Canonical form. Construction already canonicalizes, so this rebuilds
    /// the expression through the constructors and is idempotent.
    pub fn simplify(&self) -> Expr {
        let mut out = Expr::zero();
        for (m, c) in &self.terms {
            out = out + canon_term(c.clone(), m.clone());
        }
        out
    }

    fn from_term(c: Coeff, m: Monomial) -> Expr {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        Expr { terms }
    }

    fn add_term(&mut self, m: Monomial, c: Coeff) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(existing) => {
                let s = &*existing + &c;
                if s.is_zero() {
                    self.terms.remove(&m);
                } else {
                    *existing = s;
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    /// Multiplies through by the smallest monomial that clears every negative
    /// exponent. The result vanishes iff `self` does (on the domain where the
    /// cleared atoms are nonzero).
    pub fn clear_denominators(&self) -> Expr {
        let mut lowest: BTreeMap<Atom, i32> = BTreeMap::new();
        for m in self.terms.keys() {
            for (a, k) in &m.factors {
                if *k < 0 {
                    let e = lowest.entry(a.clone()).or_insert(0);
                    *e = (*e).min(*k);
                }
            }
        }
        if lowest.is_empty() {
            return self.clone();
        }
        let factors = lowest.into_iter().map(|(a, k)| (a, -k)).collect();
        let m = Monomial { factors, exp: None };
        let mut out = Expr::zero();
        for (tm, c) in &self.terms {
            out = out + canon_term(c.clone(), tm.merged(&m));
        }
        out
    }
}

fn monomial_depends_on(m: &Monomial, x: &str) -> bool {
    m.factors.keys().any(|a| atom_depends_on(a, x))
        || m.exp.as_ref().map(|e| e.depends_on(x)).unwrap_or(false)
}

fn atom_depends_on(a: &Atom, x: &str) -> bool {
    match a {
        Atom::Sym(s) => s.as_ref() == x,
        Atom::Sin(e) | Atom::Cos(e) | Atom::Root(e) => e.depends_on(x),
    }
}

fn atom_diff(a: &Atom, x: &str) -> Expr {
    match a {
        Atom::Sym(s) => {
            if s.as_ref() == x {
                Expr::one()
            } else {
                Expr::zero()
            }
        }
        Atom::Sin(e) => {
            let de = e.diff(x);
            if de.is_zero() {
                return de;
            }
            &Expr::cos(e.as_ref().clone()) * &de
        }
        Atom::Cos(e) => {
            let de = e.diff(x);
            if de.is_zero() {
                return de;
            }
            -(&Expr::sin(e.as_ref().clone()) * &de)
        }
        Atom::Root(e) => {
            let de = e.diff(x);
            if de.is_zero() {
                return de;
            }
            (&Expr::atom(a.clone(), -1) * &de).scale(&Coeff::ratio(1, 2))
        }
    }
}

/// Builds the canonical expression for `c * m`, applying every rewrite rule.
fn canon_term(c: Coeff, m: Monomial) -> Expr {
    if c.is_zero() {
        return Expr::zero();
    }
    let mut coeff = c;
    let mut factors: BTreeMap<Atom, i32> = BTreeMap::new();
    let mut extra: Vec<Expr> = Vec::new();
    let mut const_roots: Vec<(BigRational, i32)> = Vec::new();

    for (a, k) in m.factors {
        if k == 0 {
            continue;
        }
        match &a {
            Atom::Root(b) => {
                if let Some(bc) = b.as_constant() {
                    if bc.is_real() {
                        if bc.re.is_zero() {
                            if k > 0 {
                                return Expr::zero();
                            }
                            factors.insert(a, k);
                        } else {
                            const_roots.push((bc.re.clone(), k));
                        }
                        continue;
                    }
                }
                if k >= 2 {
                    extra.push(b.powi(k / 2));
                    if k % 2 == 1 {
                        factors.insert(a, 1);
                    }
                } else {
                    factors.insert(a, k);
                }
            }
            Atom::Cos(arg) if k >= 2 => {
                let s2 = Expr::sin(arg.as_ref().clone()).powi(2);
                let reduced = Expr::one() - s2;
                for _ in 0..k / 2 {
                    extra.push(reduced.clone());
                }
                if k % 2 == 1 {
                    factors.insert(a, 1);
                }
            }
            _ => {
                factors.insert(a, k);
            }
        }
    }

    if !const_roots.is_empty() {
        let mut radicand = BigRational::one();
        for (r, k) in const_roots {
            let whole = Integer::div_floor(&k, &2);
            let half = Integer::mod_floor(&k, &2);
            coeff = &coeff * &Coeff::real(rat_powi(&r, whole));
            if half == 1 {
                radicand *= r;
            }
        }
        if !radicand.is_one() {
            let negative = radicand.is_negative();
            let r = radicand.abs();
            let pq = r.numer() * r.denom();
            let (s, f) = coeff::square_part(&pq);
            coeff = &coeff * &Coeff::real(BigRational::new(s, r.denom().clone()));
            if negative {
                coeff = &coeff * &Coeff::i();
            }
            if !f.is_one() {
                let base = Expr::constant(Coeff::real(BigRational::from_integer(f)));
                factors.insert(Atom::Root(Arc::new(base)), 1);
            }
        }
    }

    let mut exp = None;
    if let Some(arg) = m.exp {
        let mut rest = Expr::zero();
        for (tm, tc) in &arg.terms {
            if let Some(sym) = single_symbol(tm) {
                if tc.is_real() == false && tc.re.is_zero() && tc.im.is_integer() {
                    let kk: i64 = num::ToPrimitive::to_i64(&tc.im.to_integer()).unwrap_or(0);
                    if kk != 0 {
                        let x = Expr::sym(sym);
                        let phase = if kk > 0 {
                            Expr::cos(x.clone()) + &Expr::i() * &Expr::sin(x)
                        } else {
                            Expr::cos(x.clone()) - &Expr::i() * &Expr::sin(x)
                        };
                        extra.push(phase.powi(kk.unsigned_abs() as i32));
                        continue;
                    }
                }
            }
            rest.add_term(tm.clone(), tc.clone());
        }
        if !rest.is_zero() {
            exp = Some(Arc::new(rest));
        }
    }

    let mut out = Expr::from_term(coeff, Monomial { factors, exp });
    for e in extra {
        out = &out * &e;
    }
    out
}

fn single_symbol(m: &Monomial) -> Option<&str> {
    if m.exp.is_some() || m.factors.len() != 1 {
        return None;
    }
    match m.factors.iter().next() {
        Some((Atom::Sym(s), 1)) => Some(s.as_ref()),
        _ => None,
    }
}

fn rat_powi(r: &BigRational, k: i32) -> BigRational {
    if k >= 0 {
        num::pow(r.clone(), k as usize)
    } else {
        num::pow(r.recip(), (-k) as usize)
    }
}

impl Add for Expr {
    type Output = Expr;
    fn add(mut self, o: Expr) -> Expr {
        for (m, c) in o.terms {
            self.add_term(m, c);
        }
        self
    }
}

impl<'a> Add<&'a Expr> for &'a Expr {
    type Output = Expr;
    fn add(self, o: &Expr) -> Expr {
        self.clone() + o.clone()
    }
}

impl Add<&Expr> for Expr {
    type Output = Expr;
    fn add(self, o: &Expr) -> Expr {
        self + o.clone()
    }
}

impl Sub for Expr {
    type Output = Expr;
    fn sub(self, o: Expr) -> Expr {
        self + (-o)
    }
}

impl<'a> Sub<&'a Expr> for &'a Expr {
    type Output = Expr;
    fn sub(self, o: &Expr) -> Expr {
        self.clone() + (-o.clone())
    }
}

impl Sub<&Expr> for Expr {
    type Output = Expr;
    fn sub(self, o: &Expr) -> Expr {
        self + (-o.clone())
    }
}

impl Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr { terms: self.terms.into_iter().map(|(m, c)| (m, -&c)).collect() }
    }
}

impl Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        -self.clone()
    }
}

impl<'a> Mul<&'a Expr> for &'a Expr {
    type Output = Expr;
    fn mul(self, o: &Expr) -> Expr {
        if self.is_zero() || o.is_zero() {
            return Expr::zero();
        }
        if let Some(c) = self.as_constant() {
            return o.scale(&c);
        }
        if let Some(c) = o.as_constant() {
            return self.scale(&c);
        }
        let mut out = Expr::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &o.terms {
                let c = c1 * c2;
                let m = m1.merged(m2);
                let needs_canon = m.factors.iter().any(|(a, k)| match a {
                    Atom::Root(b) => *k >= 2 || b.as_constant().is_some(),
                    Atom::Cos(_) => *k >= 2,
                    _ => false,
                }) || m.exp.is_some() && (m1.exp.is_some() && m2.exp.is_some());
                if needs_canon {
                    out = out + canon_term(c, m);
                } else {
                    out.add_term(m, c);
                }
            }
        }
        out
    }
}

impl Mul for Expr {
    type Output = Expr;
    fn mul(self, o: Expr) -> Expr {
        &self * &o
    }
}

impl Mul<&Expr> for Expr {
    type Output = Expr;
    fn mul(self, o: &Expr) -> Expr {
        &self * o
    }
}

impl From<i64> for Expr {
    fn from(n: i64) -> Expr {
        Expr::int(n)
    }
}

impl From<Coeff> for Expr {
    fn from(c: Coeff) -> Expr {
        Expr::constant(c)
    }
}

fn fmt_factor(f: &mut fmt::Formatter<'_>, a: &Atom, k: i32) -> fmt::Result {
    match a {
        Atom::Sym(s) => {
            write!(f, "{s}")?;
            fmt_int_exp(f, k)
        }
        Atom::Sin(e) => {
            write!(f, "sin({e})")?;
            fmt_int_exp(f, k)
        }
        Atom::Cos(e) => {
            write!(f, "cos({e})")?;
            fmt_int_exp(f, k)
        }
        Atom::Root(e) => {
            if e.as_constant().is_some() && e.len() == 1 {
                write!(f, "{e}")?;
            } else {
                write!(f, "({e})")?;
            }
            if k % 2 == 0 {
                write!(f, "^({})", k / 2)
            } else {
                write!(f, "^({}/2)", k)
            }
        }
    }
}

fn fmt_int_exp(f: &mut fmt::Formatter<'_>, k: i32) -> fmt::Result {
    match k {
        1 => Ok(()),
        k if k < 0 => write!(f, "^({k})"),
        k => write!(f, "^{k}"),
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (a, k) in &self.factors {
            if !first {
                write!(f, "*")?;
            }
            first = false;
            fmt_factor(f, a, *k)?;
        }
        if let Some(e) = &self.exp {
            if !first {
                write!(f, "*")?;
            }
            write!(f, "exp({e})")?;
        }
        Ok(())
    }
}

impl fmt::Display for Expr {
    /// Prints in the grammar accepted by [`parse`].
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (idx, (m, c)) in self.terms.iter().enumerate() {
            let (negative, mag) = if c.is_real() && c.re.is_negative() {
                (true, -c)
            } else if c.re.is_zero() && c.im.is_negative() {
                (true, -c)
            } else {
                (false, c.clone())
            };
            if idx == 0 {
                if negative {
                    write!(f, "-")?;
                }
            } else if negative {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            if m.is_one() {
                write!(f, "{mag}")?;
            } else if mag.is_one() {
                write!(f, "{m}")?;
            } else {
                write!(f, "{mag}*{m}")?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x() -> Expr {
        Expr::sym("x")
    }

    #[test]
    fn canonical_sums_cancel() {
        let e = &x() + &Expr::int(1) - (Expr::int(1) + x());
        assert!(e.is_zero());
    }

    #[test]
    fn pythagorean_rewrite() {
        let t = Expr::sym("theta");
        let e = Expr::sin(t.clone()).powi(2) + Expr::cos(t).powi(2) - Expr::one();
        assert!(e.is_zero());
    }

    #[test]
    fn constant_roots_merge() {
        let r2 = Expr::sqrt(Expr::int(2));
        let r3 = Expr::sqrt(Expr::int(3));
        let r6 = Expr::sqrt(Expr::int(6));
        assert_eq!(&r2 * &r3, r6);
        assert_eq!(&r2 * &r2, Expr::int(2));
        assert_eq!(Expr::sqrt(Expr::int(8)), &Expr::int(2) * &r2);
        assert_eq!(Expr::sqrt(Expr::int(4)), Expr::int(2));
        assert_eq!(Expr::sqrt(Expr::int(-1)), Expr::i());
        assert_eq!(r2.recip(), r2.scale(&Coeff::ratio(1, 2)));
    }

    #[test]
    fn root_squares_expand() {
        let b = Expr::one() + x().powi(2);
        let r = Expr::sqrt(b.clone());
        assert_eq!(&r * &r, b);
        let r3 = Expr::half_pow(b.clone(), 3);
        assert_eq!(r3, &b * &r);
    }

    #[test]
    fn imaginary_exponentials_become_trig() {
        let p = Expr::sym("phi");
        let e = Expr::exp(&Expr::i() * &p);
        assert_eq!(e, Expr::cos(p.clone()) + &Expr::i() * &Expr::sin(p.clone()));
        let inv = Expr::exp(-(&Expr::i() * &p));
        assert!((&e * &inv - Expr::one()).is_zero());
    }

    #[test]
    fn exponentials_merge() {
        let y = Expr::sym("y");
        let e = &Expr::exp(y.clone()) * &Expr::exp(-y.clone());
        assert!(e.is_one());
        let e2 = &Expr::exp(y.clone()) * &Expr::exp(y.clone());
        assert_eq!(e2, Expr::exp(y.scale(&Coeff::int(2))));
    }

    #[test]
    fn diff_table_rules() {
        let t = Expr::sym("theta");
        assert_eq!(Expr::cos(t.clone()).diff("theta"), -Expr::sin(t.clone()));
        let y = Expr::sym("y");
        let m = Expr::sym("m");
        let e = Expr::exp(&m * &y);
        assert_eq!(e.diff("y"), &m * &e);
    }

    #[test]
    fn diff_of_root() {
        let v = Expr::sym("v");
        let b = Expr::one() + v.powi(2);
        let d = Expr::sqrt(b.clone()).diff("v");
        assert_eq!(d, &v * &Expr::half_pow(b, -1));
    }

    #[test]
    fn negative_sin_arguments_flip() {
        let t = Expr::sym("t");
        assert_eq!(Expr::sin(-t.clone()), -Expr::sin(t.clone()));
        assert_eq!(Expr::cos(-t.clone()), Expr::cos(t));
    }

    #[test]
    fn subst_replaces_symbol() {
        let e = Expr::sin(x()) * x();
        let s = e.subst("x", &Expr::zero());
        assert!(s.is_zero());
        let s2 = (x().powi(2) + Expr::one()).subst("x", &Expr::int(2));
        assert_eq!(s2, Expr::int(5));
    }

    #[test]
    fn display_roundtrip_shapes() {
        let v = Expr::sym("v");
        let e = Expr::half_pow(Expr::one() + v.powi(2), -1) - v.scale(&Coeff::ratio(3, 2));
        let s = e.to_string();
        let back = parse(&s, &["v"]).unwrap();
        assert_eq!(back, e);
    }
}
