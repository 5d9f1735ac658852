use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::{abs, ceil, log2};

/// Dense `n × n` matrix stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SquareMatrix {
    n: usize,
    a: Vec<f64>,
}

struct Lu {
    lu: Vec<f64>,
    perm: Vec<usize>,
    sign: f64,
}

impl SquareMatrix {
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::param("matrix", "dimension must be at least 1"));
        }
        let mut a = Vec::with_capacity(n * n);
        for r in rows {
            if r.len() != n {
                return Err(Error::DimensionMismatch { expected: n, found: r.len() });
            }
            a.extend_from_slice(r);
        }
        if a.iter().any(|v| !v.is_finite()) {
            return Err(Error::param("matrix", "entries must be finite"));
        }
        Ok(SquareMatrix { n, a })
    }

    pub fn zeros(n: usize) -> Self {
        SquareMatrix { n, a: vec![0.0; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.a[i * n + i] = 1.0;
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.a[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.a[i * self.n + j] = v;
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        let n = self.n;
        (0..n).map(|i| (0..n).map(|j| self.a[i * n + j] * v[j]).sum()).collect()
    }

    fn max_abs(&self) -> f64 {
        self.a.iter().fold(0.0, |m, v| m.max(abs(*v)))
    }

    /// Infinity norm (max absolute row sum).
    pub fn norm_inf(&self) -> f64 {
        let n = self.n;
        (0..n)
            .map(|i| self.a[i * n..(i + 1) * n].iter().map(|v| abs(*v)).sum::<f64>())
            .fold(0.0, f64::max)
    }

    fn lu(&self) -> Lu {
        let n = self.n;
        let mut lu = self.a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = 1.0;
        for k in 0..n {
            let mut p = k;
            for i in k + 1..n {
                if abs(lu[i * n + k]) > abs(lu[p * n + k]) {
                    p = i;
                }
            }
            if p != k {
                for j in 0..n {
                    lu.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
                sign = -sign;
            }
            let piv = lu[k * n + k];
            if piv == 0.0 {
                continue;
            }
            for i in k + 1..n {
                let f = lu[i * n + k] / piv;
                lu[i * n + k] = f;
                for j in k + 1..n {
                    lu[i * n + j] -= f * lu[k * n + j];
                }
            }
        }
        Lu { lu, perm, sign }
    }

    pub fn det(&self) -> f64 {
        let n = self.n;
        let f = self.lu();
        (0..n).fold(f.sign, |d, i| d * f.lu[i * n + i])
    }

    fn minor(&self, i: usize, j: usize) -> SquareMatrix {
        let n = self.n;
        let mut a = Vec::with_capacity((n - 1) * (n - 1));
        for r in (0..n).filter(|&r| r != i) {
            for c in (0..n).filter(|&c| c != j) {
                a.push(self.a[r * n + c]);
            }
        }
        SquareMatrix { n: n - 1, a }
    }

    /// `(-1)^{i+j}` times the determinant of the matrix with row `i` and
    /// column `j` removed. The 1×1 cofactor is 1.
    pub fn cofactor(&self, i: usize, j: usize) -> f64 {
        if self.n == 1 {
            return 1.0;
        }
        let s = if (i + j).is_multiple_of(2) { 1.0 } else { -1.0 };
        s * self.minor(i, j).det()
    }

    /// Solves `A x = b` by partial-pivot elimination.
    ///
    /// A pivot below `1e-12 · max|a_ij|` counts as singular.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let n = self.n;
        if b.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: b.len() });
        }
        let f = self.lu();
        let thresh = 1e-12 * self.max_abs();
        if (0..n).any(|i| !(abs(f.lu[i * n + i]) > thresh)) {
            return Err(Error::SingularMatrix);
        }
        let mut x: Vec<f64> = f.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            for j in 0..i {
                x[i] -= f.lu[i * n + j] * x[j];
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                x[i] -= f.lu[i * n + j] * x[j];
            }
            x[i] /= f.lu[i * n + i];
        }
        Ok(x)
    }
}

/// `e^{M t} v` by scaling and squaring of a truncated Taylor series.
pub fn mat_exp_apply(m: &SquareMatrix, t: f64, v: &[f64]) -> Result<Vec<f64>> {
    let n = m.dim();
    if v.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: v.len() });
    }
    if !t.is_finite() {
        return Err(Error::param("t", "time must be finite"));
    }
    let norm = m.norm_inf() * abs(t);
    if norm == 0.0 {
        return Ok(v.to_vec());
    }
    // Scale so the series argument has norm at most 1/2.
    let s = if norm > 0.5 { ceil(log2(norm / 0.5)).max(0.0) as u32 } else { 0 };
    let scale = t / (1u64 << s) as f64;
    let b: Vec<f64> = m.a.iter().map(|x| x * scale).collect();
    let mul = |x: &[f64], y: &[f64]| -> Vec<f64> {
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            for k in 0..n {
                let xik = x[i * n + k];
                if xik == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out[i * n + j] += xik * y[k * n + j];
                }
            }
        }
        out
    };
    // Taylor series to 20 terms: remainder below 0.5^21/21! is far under 1e-16.
    let mut e = SquareMatrix::identity(n).a;
    let mut term = e.clone();
    for k in 1..=20 {
        term = mul(&term, &b);
        let inv = 1.0 / k as f64;
        for x in term.iter_mut() {
            *x *= inv;
        }
        for (ei, ti) in e.iter_mut().zip(&term) {
            *ei += ti;
        }
    }
    for _ in 0..s {
        e = mul(&e, &e);
    }
    Ok(SquareMatrix { n, a: e }.mul_vec(v))
}
