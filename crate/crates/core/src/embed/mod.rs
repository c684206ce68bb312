//! Exact lifted models and the inductive embedding of block chains.
//!
//! A lifted model keeps constant state and output matrices `A`, `C` plus two
//! [`InputMap`]s carrying every input-dependent term. The map value
//! `Σ_d (K_d + Σ_j z_j L_{d,j}) u⁽ᵈ⁾` is linear in the lifted state by
//! construction and polynomial in the input, and vanishes at `u = 0`. This
//! canonical, degree-indexed form replaces the factored `P(z)·Q(u)` pairs of
//! the derivation: the factored blocks are not unique and grow recursively,
//! while the canonical coefficients support all composition rules with
//! explicit, testable algebra.

mod compose;
mod io;
mod reduce;
mod zu;

pub use compose::{
    compose_ld, compose_sn, embed_chain, embed_chain_with, embed_lti_start, embed_sn_start, join,
    split, EmbedOptions,
};
pub use io::{model_from_json, model_to_json};
pub use reduce::reduce;

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::{DMatrix, DVector};

use crate::atlas::Atlas;
use crate::error::Error;
use crate::model::{BlockChain, ChainNode};
use crate::Result;

/// Cached Kronecker powers of one input sample, `pows[d] = u⁽ᵈ⁾`.
pub struct UPowers {
    pows: Vec<DVector<f64>>,
}

impl UPowers {
    pub fn new(u: &DVector<f64>, max_degree: usize) -> Self {
        let mut pows = Vec::with_capacity(max_degree + 1);
        pows.push(DVector::from_element(1, 1.0));
        for d in 1..=max_degree {
            pows.push(DVector::from(u.kronecker(&pows[d - 1])));
        }
        Self { pows }
    }

    pub fn get(&self, d: usize) -> &DVector<f64> {
        &self.pows[d]
    }

    pub fn max_degree(&self) -> usize {
        self.pows.len() - 1
    }
}

/// One input degree of an [`InputMap`]: the constant coefficient `K_d` and the
/// per-lifted-coordinate coefficients `L_{d,j}` (kept sparse over `j`).
#[derive(Debug, Clone, PartialEq)]
pub struct InputTerm {
    pub degree: usize,
    pub constant: DMatrix<f64>,
    pub linear: BTreeMap<usize, DMatrix<f64>>,
}

/// Canonical input-dependence map `(z, u) ↦ Σ_d (K_d + Σ_j z_j L_{d,j}) u⁽ᵈ⁾`
/// with every degree `d ≥ 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct InputMap {
    rows: usize,
    n_u: usize,
    terms: Vec<InputTerm>, // strictly ascending degree
}

impl InputMap {
    pub fn empty(rows: usize, n_u: usize) -> Self {
        Self {
            rows,
            n_u,
            terms: Vec::new(),
        }
    }

    /// The map `u ↦ M u` (single degree-1 constant term).
    pub fn from_feedthrough(m: &DMatrix<f64>) -> Self {
        let mut map = Self::empty(m.nrows(), m.ncols());
        map.add_constant(1, m);
        map.normalize();
        map
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn n_u(&self) -> usize {
        self.n_u
    }

    pub fn terms(&self) -> &[InputTerm] {
        &self.terms
    }

    pub fn max_degree(&self) -> usize {
        self.terms.last().map(|t| t.degree).unwrap_or(0)
    }

    /// True when the map is identically zero (no stored terms).
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn only_degree_one(&self) -> bool {
        self.terms.iter().all(|t| t.degree == 1)
    }

    pub fn has_linear_part(&self) -> bool {
        self.terms.iter().any(|t| !t.linear.is_empty())
    }

    fn cols_for(&self, d: usize) -> usize {
        self.n_u.pow(d as u32)
    }

    fn term_mut(&mut self, d: usize) -> &mut InputTerm {
        assert!(d >= 1, "input maps have no degree-0 terms");
        let pos = match self.terms.binary_search_by_key(&d, |t| t.degree) {
            Ok(pos) => pos,
            Err(pos) => {
                let cols = self.cols_for(d);
                self.terms.insert(
                    pos,
                    InputTerm {
                        degree: d,
                        constant: DMatrix::zeros(self.rows, cols),
                        linear: BTreeMap::new(),
                    },
                );
                pos
            }
        };
        &mut self.terms[pos]
    }

    /// Add `m` into `K_d`.
    pub fn add_constant(&mut self, d: usize, m: &DMatrix<f64>) {
        let rows = self.rows;
        let cols = self.cols_for(d);
        assert_eq!((m.nrows(), m.ncols()), (rows, cols), "K_{d} shape");
        self.term_mut(d).constant += m;
    }

    /// Add `m` into `L_{d,j}`.
    pub fn add_linear(&mut self, d: usize, j: usize, m: &DMatrix<f64>) {
        let rows = self.rows;
        let cols = self.cols_for(d);
        assert_eq!((m.nrows(), m.ncols()), (rows, cols), "L_{d} shape");
        let term = self.term_mut(d);
        match term.linear.get_mut(&j) {
            Some(existing) => *existing += m,
            None => {
                term.linear.insert(j, m.clone());
            }
        }
    }

    /// Add a single entry into `L_{d,j}` column `col`.
    pub(crate) fn add_linear_entry(&mut self, d: usize, j: usize, row: usize, col: usize, v: f64) {
        if v == 0.0 {
            return;
        }
        let rows = self.rows;
        let cols = self.cols_for(d);
        let term = self.term_mut(d);
        let m = term
            .linear
            .entry(j)
            .or_insert_with(|| DMatrix::zeros(rows, cols));
        m[(row, col)] += v;
    }

    pub(crate) fn add_constant_entry(&mut self, d: usize, row: usize, col: usize, v: f64) {
        if v == 0.0 {
            return;
        }
        self.term_mut(d).constant[(row, col)] += v;
    }

    /// Drop exactly-zero coefficients and empty terms. Only exact zeros are
    /// removed; no tolerance is involved.
    pub fn normalize(&mut self) {
        for term in &mut self.terms {
            term.linear.retain(|_, m| m.iter().any(|&v| v != 0.0));
        }
        self.terms
            .retain(|t| !t.linear.is_empty() || t.constant.iter().any(|&v| v != 0.0));
    }

    /// Evaluate the map at `(z, u)` given precomputed input powers.
    pub fn value(&self, z: &DVector<f64>, u: &UPowers) -> DVector<f64> {
        let mut out = DVector::zeros(self.rows);
        for term in &self.terms {
            let up = u.get(term.degree);
            out.gemv(1.0, &term.constant, up, 1.0);
            for (&j, lm) in &term.linear {
                let zj = z[j];
                if zj != 0.0 {
                    out.gemv(zj, lm, up, 1.0);
                }
            }
        }
        out
    }

    /// Left-multiply by a constant matrix (`m · value`).
    pub fn left_mul(&self, m: &DMatrix<f64>) -> InputMap {
        assert_eq!(m.ncols(), self.rows);
        let mut out = InputMap::empty(m.nrows(), self.n_u);
        for term in &self.terms {
            out.add_constant(term.degree, &(m * &term.constant));
            for (&j, lm) in &term.linear {
                out.add_linear(term.degree, j, &(m * lm));
            }
        }
        out.normalize();
        out
    }

    /// Vertical stack of two maps over the same input.
    pub fn vstack(top: &InputMap, bottom: &InputMap) -> InputMap {
        assert_eq!(top.n_u, bottom.n_u);
        let mut out = InputMap::empty(top.rows + bottom.rows, top.n_u);
        out.accumulate(top, 0, 0);
        out.accumulate(bottom, top.rows, 0);
        out.normalize();
        out
    }

    /// Add `other` into this map with its rows placed at `row_offset` and its
    /// lifted-coordinate indices shifted by `coord_offset`.
    pub(crate) fn accumulate(&mut self, other: &InputMap, row_offset: usize, coord_offset: usize) {
        assert_eq!(self.n_u, other.n_u);
        assert!(row_offset + other.rows <= self.rows);
        for term in &other.terms {
            let d = term.degree;
            let cols = self.cols_for(d);
            let rows = self.rows;
            let dst = self.term_mut(d);
            add_rows_into(&mut dst.constant, row_offset, &term.constant);
            for (&j, lm) in &term.linear {
                let entry = dst
                    .linear
                    .entry(coord_offset + j)
                    .or_insert_with(|| DMatrix::zeros(rows, cols));
                add_rows_into(entry, row_offset, lm);
            }
        }
    }

    /// Sum of two maps over the same rows; `coord_offset` shifts the lifted
    /// indices of `other` (used when branch atlases are concatenated).
    pub fn sum_with_offset(&self, other: &InputMap, coord_offset: usize) -> InputMap {
        assert_eq!(self.rows, other.rows);
        let mut out = self.clone();
        for term in &other.terms {
            out.add_constant(term.degree, &term.constant);
            for (&j, lm) in &term.linear {
                out.add_linear(term.degree, coord_offset + j, lm);
            }
        }
        out.normalize();
        out
    }
}

fn add_rows_into(dst: &mut DMatrix<f64>, row_offset: usize, src: &DMatrix<f64>) {
    debug_assert!(row_offset + src.nrows() <= dst.nrows());
    debug_assert_eq!(src.ncols(), dst.ncols());
    for j in 0..src.ncols() {
        for i in 0..src.nrows() {
            dst[(row_offset + i, j)] += src[(i, j)];
        }
    }
}

/// Lifted model with constant `A`, `C` and input influence that is linear in
/// the lifted state and polynomial in the input:
/// `ż = A z + state_input(z, u)`, `y = C z + output_input(z, u)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PitiModel {
    pub a: DMatrix<f64>,
    pub c: DMatrix<f64>,
    pub state_input: InputMap,
    pub output_input: InputMap,
    pub atlas: Atlas,
    pub n_u: usize,
}

impl PitiModel {
    /// The model of the empty chain `y = u`: zero states, unit feedthrough.
    pub fn identity(n_u: usize) -> Self {
        Self {
            a: DMatrix::zeros(0, 0),
            c: DMatrix::zeros(n_u, 0),
            state_input: InputMap::empty(0, n_u),
            output_input: InputMap::from_feedthrough(&DMatrix::identity(n_u, n_u)),
            atlas: Atlas::empty(),
            n_u,
        }
    }

    pub fn n_z(&self) -> usize {
        self.a.nrows()
    }

    pub fn n_y(&self) -> usize {
        self.c.nrows()
    }

    /// Highest input power appearing in either map.
    pub fn max_input_degree(&self) -> usize {
        self.state_input
            .max_degree()
            .max(self.output_input.max_degree())
            .max(1)
    }

    /// `ż` at `(z, u)`.
    pub fn deriv(&self, z: &DVector<f64>, u: &UPowers) -> DVector<f64> {
        let mut dz = self.state_input.value(z, u);
        dz.gemv(1.0, &self.a, z, 1.0);
        dz
    }

    /// `y` at `(z, u)`.
    pub fn output(&self, z: &DVector<f64>, u: &UPowers) -> DVector<f64> {
        let mut y = self.output_input.value(z, u);
        y.gemv(1.0, &self.c, z, 1.0);
        y
    }
}

/// Structural class of a lifted model, from most to least general.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelClass {
    Piti,
    Blti,
    BltiNoFeedthrough,
    Lti,
}

impl ModelClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            ModelClass::Piti => "PITI",
            ModelClass::Blti => "BLTI",
            ModelClass::BltiNoFeedthrough => "BLTI_no_feedthrough",
            ModelClass::Lti => "LTI",
        }
    }
}

impl fmt::Display for ModelClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Classify a lifted model by the shape of its input maps.
///
/// A bilinear state map with no output feedthrough at all reports
/// `BltiNoFeedthrough` even when the dynamics happen to be fully linear, so
/// that the classification matches the structural guarantee given by
/// [`predict_blti`].
pub fn classify(model: &PitiModel) -> ModelClass {
    let state_d1 = model.state_input.only_degree_one();
    if state_d1 && model.output_input.is_zero() {
        return ModelClass::BltiNoFeedthrough;
    }
    if state_d1 && model.output_input.only_degree_one() {
        if !model.state_input.has_linear_part() && !model.output_input.has_linear_part() {
            ModelClass::Lti
        } else {
            ModelClass::Blti
        }
    } else {
        ModelClass::Piti
    }
}

/// Sufficient structural test on the chain itself: the embedding is bilinear
/// without feedthrough whenever no LTI block has feedthrough and no leading
/// block (descending through leading parallel branches) is a static
/// nonlinearity. The converse is not claimed. The empty chain reports `false`:
/// the identity map has direct feedthrough.
pub fn predict_blti(chain: &BlockChain) -> bool {
    if chain.seq.is_empty() {
        return false;
    }
    fn no_feedthrough(seq: &[ChainNode]) -> bool {
        seq.iter().all(|node| match node {
            ChainNode::Lti(b) => !b.has_feedthrough(),
            ChainNode::Sn(_) => true,
            ChainNode::Parallel(branches) => branches.iter().all(|br| no_feedthrough(br)),
        })
    }
    fn starts_with_sn(seq: &[ChainNode]) -> bool {
        match seq.first() {
            Some(ChainNode::Sn(_)) => true,
            Some(ChainNode::Parallel(branches)) => branches.iter().any(|br| starts_with_sn(br)),
            _ => false,
        }
    }
    no_feedthrough(&chain.seq) && !starts_with_sn(&chain.seq)
}

/// Bilinear form `ż = A z + Σ_k (ₖB̄ z + ₖB) u_k`, `y = C z` (no feedthrough).
#[derive(Debug, Clone, PartialEq)]
pub struct BltiModel {
    pub a: DMatrix<f64>,
    pub c: DMatrix<f64>,
    /// constant input columns, `n_z × n_u`
    pub b: DMatrix<f64>,
    /// per input channel `k`, the bilinear matrix `ₖB̄` (`n_z × n_z`)
    pub b_bar: Vec<DMatrix<f64>>,
    pub atlas: Atlas,
}

/// Extract the bilinear form of a model whose state map is degree-1 and whose
/// output map is zero.
pub fn to_blti(model: &PitiModel) -> Result<BltiModel> {
    if !model.state_input.only_degree_one() {
        return Err(Error::Precondition(
            "state map has input powers beyond degree 1; model is not bilinear".into(),
        ));
    }
    if !model.output_input.is_zero() {
        return Err(Error::Precondition(
            "model has an output feedthrough term".into(),
        ));
    }
    let n_z = model.n_z();
    let n_u = model.n_u;
    let mut b = DMatrix::zeros(n_z, n_u);
    let mut b_bar = vec![DMatrix::zeros(n_z, n_z); n_u];
    if let Some(term) = model.state_input.terms().first() {
        b += &term.constant;
        for (&j, lm) in &term.linear {
            for k in 0..n_u {
                for row in 0..n_z {
                    b_bar[k][(row, j)] += lm[(row, k)];
                }
            }
        }
    }
    Ok(BltiModel {
        a: model.a.clone(),
        c: model.c.clone(),
        b,
        b_bar,
        atlas: model.atlas.clone(),
    })
}
