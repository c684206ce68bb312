//! Sparse multivariate polynomials and the integral factorization used to
//! put static nonlinearities into input-affine-times-polynomial form.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};

use crate::error::Error;
use crate::Result;

/// A scalar polynomial in `n_in` variables, stored as a sparse map from
/// exponent vectors to coefficients. Zero coefficients are never stored.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Poly {
    n_in: usize,
    terms: BTreeMap<Vec<u32>, f64>,
}

impl Poly {
    pub fn zero(n_in: usize) -> Self {
        Self {
            n_in,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(n_in: usize, c: f64) -> Self {
        let mut p = Self::zero(n_in);
        p.add_term(&vec![0; n_in], c);
        p
    }

    pub fn n_in(&self) -> usize {
        self.n_in
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u32], f64)> {
        self.terms.iter().map(|(e, &c)| (e.as_slice(), c))
    }

    /// Add `c · u^exps`, merging with an existing term if present.
    pub fn add_term(&mut self, exps: &[u32], c: f64) {
        assert_eq!(exps.len(), self.n_in, "exponent vector length mismatch");
        if c == 0.0 {
            return;
        }
        let entry = self.terms.entry(exps.to_vec()).or_insert(0.0);
        *entry += c;
        if *entry == 0.0 {
            self.terms.remove(exps);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    pub fn eval(&self, u: &DVector<f64>) -> f64 {
        let mut acc = 0.0;
        for (exps, &c) in &self.terms {
            let mut t = c;
            for (j, &e) in exps.iter().enumerate() {
                t *= u[j].powi(e as i32);
            }
            acc += t;
        }
        acc
    }

    pub fn scale(&self, s: f64) -> Poly {
        let mut out = Self::zero(self.n_in);
        for (e, &c) in &self.terms {
            out.add_term(e, c * s);
        }
        out
    }

    pub fn add(&self, other: &Poly) -> Poly {
        assert_eq!(self.n_in, other.n_in);
        let mut out = self.clone();
        for (e, &c) in &other.terms {
            out.add_term(e, c);
        }
        out
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        assert_eq!(self.n_in, other.n_in);
        let mut out = Self::zero(self.n_in);
        for (ea, &ca) in &self.terms {
            for (eb, &cb) in &other.terms {
                let exps: Vec<u32> = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.add_term(&exps, ca * cb);
            }
        }
        out
    }
}

/// A polynomial vector function `f : ℝⁿ → ℝᵐ` (one [`Poly`] per output row).
#[derive(Debug, Clone, PartialEq)]
pub struct MultiPoly {
    n_in: usize,
    rows: Vec<Poly>,
}

impl MultiPoly {
    pub fn new(n_in: usize, n_out: usize) -> Self {
        Self {
            n_in,
            rows: vec![Poly::zero(n_in); n_out],
        }
    }

    pub fn from_rows(rows: Vec<Poly>) -> Self {
        let n_in = rows.first().map(|p| p.n_in()).unwrap_or(0);
        assert!(rows.iter().all(|p| p.n_in() == n_in));
        Self { n_in, rows }
    }

    pub fn n_in(&self) -> usize {
        self.n_in
    }

    pub fn n_out(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[Poly] {
        &self.rows
    }

    pub fn add_term(&mut self, row: usize, exps: &[u32], c: f64) {
        self.rows[row].add_term(exps, c);
    }

    pub fn is_zero(&self) -> bool {
        self.rows.iter().all(Poly::is_zero)
    }

    pub fn total_degree(&self) -> u32 {
        self.rows.iter().map(Poly::total_degree).max().unwrap_or(0)
    }

    pub fn eval(&self, u: &DVector<f64>) -> Result<DVector<f64>> {
        if u.len() != self.n_in {
            return Err(Error::Dimension(format!(
                "polynomial expects {} inputs, got {}",
                self.n_in,
                u.len()
            )));
        }
        Ok(DVector::from_fn(self.rows.len(), |i, _| {
            self.rows[i].eval(u)
        }))
    }
}

/// A matrix of polynomials in the input, the shape taken by factored input
/// maps such as `f̃` with `f(u) − f(0) = f̃(u)·u`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyMatrix {
    n_rows: usize,
    n_cols: usize,
    entries: Vec<Poly>, // row-major
}

impl PolyMatrix {
    pub fn zero(n_rows: usize, n_cols: usize, n_in: usize) -> Self {
        Self {
            n_rows,
            n_cols,
            entries: vec![Poly::zero(n_in); n_rows * n_cols],
        }
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn entry(&self, r: usize, c: usize) -> &Poly {
        &self.entries[r * self.n_cols + c]
    }

    pub fn entry_mut(&mut self, r: usize, c: usize) -> &mut Poly {
        &mut self.entries[r * self.n_cols + c]
    }

    /// Value of `P(u)·u` as a polynomial vector.
    pub fn apply_to_input(&self) -> MultiPoly {
        let n_in = self.n_cols;
        let mut out = MultiPoly::new(n_in, self.n_rows);
        for r in 0..self.n_rows {
            for c in 0..self.n_cols {
                let mut uj = vec![0u32; n_in];
                uj[c] = 1;
                let mut unit = Poly::zero(n_in);
                unit.add_term(&uj, 1.0);
                let prod = self.entry(r, c).mul(&unit);
                for (e, coef) in prod.terms() {
                    out.add_term(r, e, coef);
                }
            }
        }
        out
    }
}

/// Split off the constant part: returns `(f(0), f − f(0))` with the remainder
/// vanishing at zero.
pub fn split_const(f: &MultiPoly) -> (DVector<f64>, MultiPoly) {
    let zero_exps = vec![0u32; f.n_in()];
    let mut f0 = DVector::zeros(f.n_out());
    let mut rest = f.clone();
    for (i, row) in f.rows().iter().enumerate() {
        for (e, c) in row.terms() {
            if e == zero_exps.as_slice() {
                f0[i] = c;
                rest.add_term(i, e, -c);
            }
        }
    }
    (f0, rest)
}

/// Closed-form factorization `f̄(u) = f̃(u)·u` for `f̄(0) = 0`, with
/// `f̃(u) = ∫₀¹ (∂f̄/∂u)(λu) dλ`. The λ-integral is evaluated symbolically per
/// monomial: each Jacobian-entry monomial of total degree `m` contributes its
/// coefficient divided by `m + 1`.
pub fn lambda_factor(f_bar: &MultiPoly) -> Result<PolyMatrix> {
    let n_in = f_bar.n_in();
    let zero_exps = vec![0u32; n_in];
    let mut out = PolyMatrix::zero(f_bar.n_out(), n_in, n_in);
    for (i, row) in f_bar.rows().iter().enumerate() {
        for (exps, c) in row.terms() {
            if exps == zero_exps.as_slice() {
                return Err(Error::Precondition(format!(
                    "lambda_factor requires f(0) = 0; row {i} has constant term {c}"
                )));
            }
            let total: u32 = exps.iter().sum();
            for j in 0..n_in {
                if exps[j] == 0 {
                    continue;
                }
                // d/du_j of c·u^exps, then ∫₀¹ λ^(total−1) dλ = 1/total
                let mut de = exps.to_vec();
                de[j] -= 1;
                out.entry_mut(i, j)
                    .add_term(&de, c * exps[j] as f64 / total as f64);
            }
        }
    }
    Ok(out)
}

/// Numeric evaluation of a polynomial matrix.
pub fn poly_eval(p: &PolyMatrix, u: &DVector<f64>) -> Result<DMatrix<f64>> {
    let n_in = p.entries.first().map(|e| e.n_in()).unwrap_or(0);
    if !p.entries.is_empty() && u.len() != n_in {
        return Err(Error::Dimension(format!(
            "polynomial matrix expects {} inputs, got {}",
            n_in,
            u.len()
        )));
    }
    Ok(DMatrix::from_fn(p.n_rows, p.n_cols, |r, c| {
        p.entry(r, c).eval(u)
    }))
}
