//! Structure constants, the Cartan tensor and constant invariant metrics.
//!
//! Indices are 0-based in the API and 1-based in reports and JSON.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::rat;

#[derive(Debug, Error, PartialEq)]
pub enum AlgebraError {
    #[error("Cartan tensor is degenerate (rank {rank} of {dim}); use a frame-built metric")]
    DegenerateCartan { rank: usize, dim: usize },
    #[error("invalid structure constants: {0}")]
    Input(String),
}

/// `C^k_{ij}` stored densely as `c[k][i][j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct StructureConstants {
    r: usize,
    c: Vec<BigRational>,
}

impl StructureConstants {
    pub fn zero(r: usize) -> Self {
        StructureConstants { r, c: vec![BigRational::zero(); r * r * r] }
    }

    pub fn dim(&self) -> usize {
        self.r
    }

    pub fn get(&self, k: usize, i: usize, j: usize) -> &BigRational {
        &self.c[(k * self.r + i) * self.r + j]
    }

    pub fn set(&mut self, k: usize, i: usize, j: usize, v: BigRational) {
        let r = self.r;
        self.c[(k * r + i) * r + j] = v;
    }

    /// Sets `C^k_{ij} = v` and `C^k_{ji} = -v`.
    pub fn set_antisym(&mut self, k: usize, i: usize, j: usize, v: BigRational) {
        self.set(k, j, i, -v.clone());
        self.set(k, i, j, v);
    }

    pub fn abelian(r: usize) -> Self {
        Self::zero(r)
    }

    /// so(3): `C^k_{ij} = ε_{ijk}`.
    pub fn so3() -> Self {
        let mut sc = Self::zero(3);
        for (i, j, k) in [(0, 1, 2), (1, 2, 0), (2, 0, 1)] {
            sc.set_antisym(k, i, j, BigRational::one());
        }
        sc
    }

    /// so(3) in the ladder basis `(H_+1, H_-1, H_3)`:
    /// `[H_s, H_3] = -s H_s`, `[H_+1, H_-1] = 2 H_3`.
    pub fn so3_ladder() -> Self {
        let mut sc = Self::zero(3);
        sc.set_antisym(0, 0, 2, -BigRational::one());
        sc.set_antisym(1, 1, 2, BigRational::one());
        sc.set_antisym(2, 0, 1, rat(2, 1));
        sc
    }

    /// Bianchi type II realization used here: only `C^1_{12} = 1`.
    pub fn bianchi2() -> Self {
        let mut sc = Self::zero(3);
        sc.set_antisym(0, 0, 1, BigRational::one());
        sc
    }

    pub fn from_triplets(r: usize, entries: &[(usize, usize, usize, BigRational)]) -> Result<Self, AlgebraError> {
        let mut sc = Self::zero(r);
        for (k, i, j, v) in entries {
            if *k >= r || *i >= r || *j >= r {
                return Err(AlgebraError::Input(format!(
                    "index ({}, {}, {}) out of range for r = {r}",
                    k + 1,
                    i + 1,
                    j + 1
                )));
            }
            sc.set(*k, *i, *j, v.clone());
        }
        Ok(sc)
    }

    /// Nonzero entries, one per stored value (both orderings of `(i, j)`).
    pub fn triplets(&self) -> Vec<(usize, usize, usize, BigRational)> {
        let mut out = Vec::new();
        for k in 0..self.r {
            for i in 0..self.r {
                for j in 0..self.r {
                    let v = self.get(k, i, j);
                    if !v.is_zero() {
                        out.push((k, i, j, v.clone()));
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Violation {
    /// `C^k_{ij} + C^k_{ji} != 0` (1-based indices).
    Antisymmetry { k: usize, i: usize, j: usize },
    /// Jacobi sum nonzero for `(p, i, j, k)` (1-based indices).
    Jacobi { p: usize, i: usize, j: usize, k: usize, value: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn jacobi_sum(sc: &StructureConstants, p: usize, i: usize, j: usize, k: usize) -> BigRational {
    let mut acc = BigRational::zero();
    for s in 0..sc.r {
        acc += sc.get(p, i, s) * sc.get(s, j, k)
            + sc.get(p, j, s) * sc.get(s, k, i)
            + sc.get(p, k, s) * sc.get(s, i, j);
    }
    acc
}

/// Lists every antisymmetry and Jacobi violation.
pub fn validate(sc: &StructureConstants) -> ValidationReport {
    let r = sc.r;
    let mut violations = Vec::new();
    for k in 0..r {
        for i in 0..r {
            for j in i..r {
                if !(sc.get(k, i, j) + sc.get(k, j, i)).is_zero() {
                    violations.push(Violation::Antisymmetry { k: k + 1, i: i + 1, j: j + 1 });
                }
            }
        }
    }
    for p in 0..r {
        for i in 0..r {
            for j in 0..r {
                for k in 0..r {
                    let v = jacobi_sum(sc, p, i, j, k);
                    if !v.is_zero() {
                        violations.push(Violation::Jacobi {
                            p: p + 1,
                            i: i + 1,
                            j: j + 1,
                            k: k + 1,
                            value: v.to_string(),
                        });
                    }
                }
            }
        }
    }
    ValidationReport { violations }
}

/// Square matrix of exact rationals, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct RatMatrix {
    pub n: usize,
    pub data: Vec<BigRational>,
}

impl RatMatrix {
    pub fn zeros(n: usize) -> Self {
        RatMatrix { n, data: vec![BigRational::zero(); n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = BigRational::one();
        }
        m
    }

    pub fn get(&self, i: usize, j: usize) -> &BigRational {
        &self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: BigRational) {
        let n = self.n;
        self.data[i * n + j] = v;
    }

    pub fn scaled(&self, s: &BigRational) -> Self {
        RatMatrix { n: self.n, data: self.data.iter().map(|v| v * s).collect() }
    }

    pub fn mul(&self, o: &RatMatrix) -> RatMatrix {
        let n = self.n;
        let mut out = RatMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                let mut acc = BigRational::zero();
                for k in 0..n {
                    acc += self.get(i, k) * o.get(k, j);
                }
                out.set(i, j, acc);
            }
        }
        out
    }

    /// Rank by fraction-free (Bareiss) elimination on the integer matrix
    /// obtained by clearing denominators row by row.
    pub fn rank(&self) -> usize {
        let n = self.n;
        let mut m: Vec<Vec<BigInt>> = (0..n)
            .map(|i| {
                let row = &self.data[i * n..(i + 1) * n];
                let l = row.iter().fold(BigInt::one(), |acc, v| num::integer::lcm(acc, v.denom().clone()));
                row.iter().map(|v| (v * BigRational::from_integer(l.clone())).to_integer()).collect()
            })
            .collect();
        let mut rank = 0;
        let mut prev = BigInt::one();
        let mut col = 0;
        while rank < n && col < n {
            let pivot = (rank..n).find(|&r| !m[r][col].is_zero());
            let Some(p) = pivot else {
                col += 1;
                continue;
            };
            m.swap(rank, p);
            for r in rank + 1..n {
                for c in col + 1..n {
                    let v = (&m[r][c] * &m[rank][col] - &m[r][col] * &m[rank][c]) / &prev;
                    m[r][c] = v;
                }
                m[r][col] = BigInt::zero();
            }
            prev = m[rank][col].clone();
            rank += 1;
            col += 1;
        }
        rank
    }

    /// Exact inverse by Gauss-Jordan elimination.
    pub fn inverse(&self) -> Option<RatMatrix> {
        let n = self.n;
        let mut a = self.clone();
        let mut inv = RatMatrix::identity(n);
        for col in 0..n {
            let p = (col..n).find(|&r| !a.get(r, col).is_zero())?;
            if p != col {
                for j in 0..n {
                    a.data.swap(p * n + j, col * n + j);
                    inv.data.swap(p * n + j, col * n + j);
                }
            }
            let piv = a.get(col, col).clone();
            for j in 0..n {
                let v = a.get(col, j) / &piv;
                a.set(col, j, v);
                let w = inv.get(col, j) / &piv;
                inv.set(col, j, w);
            }
            for r in 0..n {
                if r == col {
                    continue;
                }
                let f = a.get(r, col).clone();
                if f.is_zero() {
                    continue;
                }
                for j in 0..n {
                    let v = a.get(r, j) - &f * a.get(col, j);
                    a.set(r, j, v);
                    let w = inv.get(r, j) - &f * inv.get(col, j);
                    inv.set(r, j, w);
                }
            }
        }
        Some(inv)
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|i| (0..self.n).all(|j| self.get(i, j) == self.get(j, i)))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CartanTensor {
    /// Covariant components `g_{ik}`.
    pub g: RatMatrix,
    pub rank: usize,
    pub is_degenerate: bool,
    /// Whether `C^l_{ij} g_{lk} + C^l_{ik} g_{jl} = 0` holds exactly.
    pub ad_invariant: bool,
}

/// `g_{ik} = 1/2 C^l_{ij} C^j_{lk}`.
pub fn cartan(sc: &StructureConstants) -> CartanTensor {
    let r = sc.r;
    let half = rat(1, 2);
    let mut g = RatMatrix::zeros(r);
    for i in 0..r {
        for k in 0..r {
            let mut acc = BigRational::zero();
            for l in 0..r {
                for j in 0..r {
                    acc += sc.get(l, i, j) * sc.get(j, l, k);
                }
            }
            g.set(i, k, acc * &half);
        }
    }
    let rank = g.rank();
    let ad_invariant = cartan_ad_invariant(sc, &g);
    CartanTensor { g, rank, is_degenerate: rank < r, ad_invariant }
}

/// Checks `C^l_{ij} g_{lk} + C^l_{ik} g_{jl} = 0` for all `i, j, k`.
pub fn cartan_ad_invariant(sc: &StructureConstants, g: &RatMatrix) -> bool {
    let r = sc.r;
    for i in 0..r {
        for j in 0..r {
            for k in 0..r {
                let mut acc = BigRational::zero();
                for l in 0..r {
                    acc += sc.get(l, i, j) * g.get(l, k) + sc.get(l, i, k) * g.get(j, l);
                }
                if !acc.is_zero() {
                    return false;
                }
            }
        }
    }
    true
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MetricProvenance {
    CartanInverse,
    UserSupplied,
    FrameBuilt,
}

/// Constant contravariant metric `g^{ik}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstantMetric {
    pub g_inv: RatMatrix,
    pub provenance: MetricProvenance,
}

/// Checks the algebraic Killing condition `C^i_{jl} g^{lk} + C^k_{jl} g^{il} = 0`.
pub fn algebraic_killing(sc: &StructureConstants, g_inv: &RatMatrix) -> bool {
    let r = sc.r;
    for i in 0..r {
        for j in 0..r {
            for k in 0..r {
                let mut acc = BigRational::zero();
                for l in 0..r {
                    acc += sc.get(i, j, l) * g_inv.get(l, k) + sc.get(k, j, l) * g_inv.get(i, l);
                }
                if !acc.is_zero() {
                    return false;
                }
            }
        }
    }
    true
}

pub fn invert_cartan(ct: &CartanTensor) -> Result<ConstantMetric, AlgebraError> {
    if ct.is_degenerate {
        return Err(AlgebraError::DegenerateCartan { rank: ct.rank, dim: ct.g.n });
    }
    let g_inv = ct
        .g
        .inverse()
        .ok_or(AlgebraError::DegenerateCartan { rank: ct.rank, dim: ct.g.n })?;
    Ok(ConstantMetric { g_inv, provenance: MetricProvenance::CartanInverse })
}

/// Cartan inverse plus its exact Killing certificate.
pub fn cartan_metric(sc: &StructureConstants) -> Result<(ConstantMetric, bool), AlgebraError> {
    let m = invert_cartan(&cartan(sc))?;
    let ok = algebraic_killing(sc, &m.g_inv);
    Ok((m, ok))
}

/// Every antisymmetric real 3-dimensional algebra with entries in {-1, 0, 1}
/// that satisfies the Jacobi identity.
pub fn small_algebra_library() -> Vec<StructureConstants> {
    let pairs = [(0usize, 1usize), (0, 2), (1, 2)];
    let mut out = Vec::new();
    for code in 0..3usize.pow(9) {
        let mut sc = StructureConstants::zero(3);
        let mut c = code;
        for k in 0..3 {
            for (i, j) in pairs {
                let v = (c % 3) as i64 - 1;
                c /= 3;
                if v != 0 {
                    sc.set_antisym(k, i, j, rat(v, 1));
                }
            }
        }
        if validate(&sc).is_valid() {
            out.push(sc);
        }
    }
    out
}

/// Normalizes a rational for reports (`-1/2`, `3`).
pub fn rat_string(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else if r.is_negative() {
        format!("-{}/{}", r.numer().abs(), r.denom())
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}
