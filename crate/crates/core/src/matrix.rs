//! Small dense matrices over [`Expr`].

use crate::expr::{Coeff, Expr};

#[derive(Debug, Clone, PartialEq)]
pub struct ExprMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<Expr>,
}

impl ExprMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        ExprMatrix { rows, cols, data: vec![Expr::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = ExprMatrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Expr::one());
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Expr>>) -> Self {
        let r = rows.len();
        let c = rows.first().map(|x| x.len()).unwrap_or(0);
        assert!(rows.iter().all(|x| x.len() == c), "ragged matrix");
        ExprMatrix { rows: r, cols: c, data: rows.into_iter().flatten().collect() }
    }

    pub fn get(&self, i: usize, j: usize) -> &Expr {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, e: Expr) {
        self.data[i * self.cols + j] = e;
    }

    pub fn row(&self, i: usize) -> Vec<Expr> {
        self.data[i * self.cols..(i + 1) * self.cols].to_vec()
    }

    pub fn transpose(&self) -> ExprMatrix {
        let mut t = ExprMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j).clone());
            }
        }
        t
    }

    pub fn mul(&self, o: &ExprMatrix) -> ExprMatrix {
        assert_eq!(self.cols, o.rows);
        let mut out = ExprMatrix::zeros(self.rows, o.cols);
        for i in 0..self.rows {
            for j in 0..o.cols {
                let mut acc = Expr::zero();
                for k in 0..self.cols {
                    let a = self.get(i, k);
                    let b = o.get(k, j);
                    if !a.is_zero() && !b.is_zero() {
                        acc = acc + a * b;
                    }
                }
                out.set(i, j, acc);
            }
        }
        out
    }

    pub fn add(&self, o: &ExprMatrix) -> ExprMatrix {
        ExprMatrix {
            data: self.data.iter().zip(&o.data).map(|(a, b)| a + b).collect(),
            ..self.clone()
        }
    }

    pub fn sub(&self, o: &ExprMatrix) -> ExprMatrix {
        ExprMatrix {
            data: self.data.iter().zip(&o.data).map(|(a, b)| a - b).collect(),
            ..self.clone()
        }
    }

    pub fn scale(&self, s: &Expr) -> ExprMatrix {
        ExprMatrix { data: self.data.iter().map(|a| a * s).collect(), ..self.clone() }
    }

    pub fn scale_coeff(&self, c: &Coeff) -> ExprMatrix {
        ExprMatrix { data: self.data.iter().map(|a| a.scale(c)).collect(), ..self.clone() }
    }

    pub fn map(&self, f: impl Fn(&Expr) -> Expr) -> ExprMatrix {
        ExprMatrix { data: self.data.iter().map(f).collect(), ..self.clone() }
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|e| e.is_zero())
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.rows).all(|i| (0..self.cols).all(|j| i == j || self.get(i, j).is_zero()))
    }

    /// Laplace expansion along the first row; intended for n ≤ 4.
    pub fn det(&self) -> Expr {
        assert_eq!(self.rows, self.cols);
        match self.rows {
            0 => Expr::one(),
            1 => self.get(0, 0).clone(),
            2 => self.get(0, 0) * self.get(1, 1) - self.get(0, 1) * self.get(1, 0),
            n => {
                let mut acc = Expr::zero();
                for j in 0..n {
                    let a = self.get(0, j);
                    if a.is_zero() {
                        continue;
                    }
                    let m = a * &self.minor(0, j).det();
                    acc = if j % 2 == 0 { acc + m } else { acc - m };
                }
                acc
            }
        }
    }

    fn minor(&self, r: usize, c: usize) -> ExprMatrix {
        let mut rows = Vec::with_capacity(self.rows - 1);
        for i in (0..self.rows).filter(|&i| i != r) {
            rows.push((0..self.cols).filter(|&j| j != c).map(|j| self.get(i, j).clone()).collect());
        }
        ExprMatrix::from_rows(rows)
    }

    /// Adjugate over determinant; `None` when the determinant is identically zero.
    pub fn inverse(&self) -> Option<ExprMatrix> {
        let n = self.rows;
        let d = self.det();
        if d.is_zero() {
            return None;
        }
        if n == 1 {
            return Some(ExprMatrix::from_rows(vec![vec![d.recip()]]));
        }
        let inv_d = d.recip();
        let mut out = ExprMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let cof = self.minor(j, i).det();
                let cof = if (i + j) % 2 == 0 { cof } else { -cof };
                out.set(i, j, &cof * &inv_d);
            }
        }
        Some(out)
    }

    /// Power series `Σ_k A^k / k!`, exact when `A` is nilpotent.
    pub fn exp_nilpotent(&self) -> Option<ExprMatrix> {
        let n = self.rows;
        let mut acc = ExprMatrix::identity(n);
        let mut term = ExprMatrix::identity(n);
        for k in 1..=n {
            term = term.mul(self).scale_coeff(&Coeff::ratio(1, k as i64));
            if term.is_zero() {
                return Some(acc);
            }
            acc = acc.add(&term);
        }
        if term.mul(self).is_zero() {
            Some(acc)
        } else {
            None
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    fn m(rows: &[&[&str]]) -> ExprMatrix {
        ExprMatrix::from_rows(
            rows.iter().map(|r| r.iter().map(|s| parse(s, &["x", "y"]).unwrap()).collect()).collect(),
        )
    }

    #[test]
    fn inverse_times_matrix_is_identity() {
        let a = m(&[&["exp(y)", "x", "0"], &["0", "1", "y"], &["0", "0", "2"]]);
        let inv = a.inverse().unwrap();
        let p = a.mul(&inv).sub(&ExprMatrix::identity(3));
        assert!(p.data.iter().all(|e| e.clear_denominators().is_zero()));
    }

    #[test]
    fn determinant_of_rotation_like_matrix() {
        let a = m(&[&["cos(x)", "sin(x)"], &["-sin(x)", "cos(x)"]]);
        assert!((a.det() - Expr::one()).is_zero());
    }

    #[test]
    fn singular_matrix_has_no_inverse() {
        let a = m(&[&["x", "y"], &["2*x", "2*y"]]);
        assert!(a.inverse().is_none());
    }

    #[test]
    fn nilpotent_exponential_terminates() {
        let a = m(&[&["0", "x"], &["0", "0"]]);
        let e = a.exp_nilpotent().unwrap();
        assert_eq!(e, m(&[&["1", "x"], &["0", "1"]]));
        assert!(m(&[&["1", "0"], &["0", "0"]]).exp_nilpotent().is_none());
    }

}
