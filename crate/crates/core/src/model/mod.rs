//! Block-chain system descriptions: LTI dynamic blocks and static polynomial
//! blocks interconnected in series and parallel (no feedback).
//!
//! A parallel section is a single bracketed construct holding its branches, so
//! every signal split is closed by the matching sum by construction; there is
//! no way to write an unbalanced junction.

mod parse;

pub use parse::{parse_model, serialize_model};

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::{DMatrix, DVector};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::atlas::BlockId;
use crate::error::Error;
use crate::poly::{MultiPoly, Poly};
use crate::Result;

/// A linear time-invariant block `ẋ = Ax + Bu`, `y = Cx + Du`. A block with
/// zero states (`A` empty) is a pure static gain `y = Du`.
#[derive(Debug, Clone, PartialEq)]
pub struct LtiBlock {
    a: DMatrix<f64>,
    b: DMatrix<f64>,
    c: DMatrix<f64>,
    d: DMatrix<f64>,
    pub label: String,
}

impl LtiBlock {
    pub fn new(
        a: DMatrix<f64>,
        b: DMatrix<f64>,
        c: DMatrix<f64>,
        d: DMatrix<f64>,
        label: impl Into<String>,
    ) -> Result<Self> {
        let label = label.into();
        let n_x = a.nrows();
        if a.ncols() != n_x {
            return Err(Error::Validation(format!(
                "block '{label}': A must be square, got {}x{}",
                a.nrows(),
                a.ncols()
            )));
        }
        if b.nrows() != n_x || c.ncols() != n_x {
            return Err(Error::Validation(format!(
                "block '{label}': B has {} rows and C has {} cols, expected {n_x}",
                b.nrows(),
                c.ncols()
            )));
        }
        // empty B/C (static-gain blocks, n_x = 0) carry no width information
        // when read from JSON; D is the authority then
        let n_u = if b.nrows() > 0 { b.ncols() } else { d.ncols() };
        let n_y = if c.nrows() > 0 { c.nrows() } else { d.nrows() };
        let b = if b.nrows() == 0 {
            DMatrix::zeros(0, n_u)
        } else {
            b
        };
        let c = if c.nrows() == 0 {
            DMatrix::zeros(n_y, n_x)
        } else {
            c
        };
        if d.nrows() != n_y || d.ncols() != n_u {
            return Err(Error::Validation(format!(
                "block '{label}': D must be {n_y}x{n_u}, got {}x{}",
                d.nrows(),
                d.ncols()
            )));
        }
        for m in [&a, &b, &c, &d] {
            if m.iter().any(|v| !v.is_finite()) {
                return Err(Error::Validation(format!(
                    "block '{label}': non-finite matrix entry"
                )));
            }
        }
        Ok(Self { a, b, c, d, label })
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }
    pub fn b(&self) -> &DMatrix<f64> {
        &self.b
    }
    pub fn c(&self) -> &DMatrix<f64> {
        &self.c
    }
    pub fn d(&self) -> &DMatrix<f64> {
        &self.d
    }

    pub fn n_x(&self) -> usize {
        self.a.nrows()
    }
    pub fn n_u(&self) -> usize {
        self.b.ncols()
    }
    pub fn n_y(&self) -> usize {
        self.c.nrows()
    }

    pub fn has_feedthrough(&self) -> bool {
        self.d.iter().any(|&v| v != 0.0)
    }
}

/// A static polynomial block in decoupled form `y = W g(Vᵀu)`, where
/// `g_e(σ) = Σ_m γ[e][m] σᵐ` are univariate polynomials. The decoupling
/// itself is required input; an optional raw polynomial may accompany it for
/// consistency checking only.
#[derive(Debug, Clone, PartialEq)]
pub struct SnBlock {
    w: DMatrix<f64>,
    v: DMatrix<f64>,
    gamma: DMatrix<f64>,
    pub label: String,
    pub raw_poly: Option<MultiPoly>,
}

impl SnBlock {
    pub fn new(
        w: DMatrix<f64>,
        v: DMatrix<f64>,
        gamma: DMatrix<f64>,
        label: impl Into<String>,
        raw_poly: Option<MultiPoly>,
    ) -> Result<Self> {
        let label = label.into();
        let r = w.ncols();
        if r == 0 {
            return Err(Error::Validation(format!(
                "block '{label}': decoupling order r must be >= 1"
            )));
        }
        if v.ncols() != r || gamma.nrows() != r {
            return Err(Error::Validation(format!(
                "block '{label}': W has {r} columns but V has {} and gamma has {} rows",
                v.ncols(),
                gamma.nrows()
            )));
        }
        if gamma.ncols() < 2 {
            return Err(Error::Validation(format!(
                "block '{label}': gamma rows must have p+1 >= 2 entries"
            )));
        }
        for m in [&w, &v, &gamma] {
            if m.iter().any(|x| !x.is_finite()) {
                return Err(Error::Validation(format!(
                    "block '{label}': non-finite matrix entry"
                )));
            }
        }
        if let Some(f) = &raw_poly {
            if f.n_in() != v.nrows() || f.n_out() != w.nrows() {
                return Err(Error::Validation(format!(
                    "block '{label}': raw polynomial is {}->{} but the decoupling is {}->{}",
                    f.n_in(),
                    f.n_out(),
                    v.nrows(),
                    w.nrows()
                )));
            }
        }
        Ok(Self {
            w,
            v,
            gamma,
            label,
            raw_poly,
        })
    }

    pub fn w(&self) -> &DMatrix<f64> {
        &self.w
    }
    pub fn v(&self) -> &DMatrix<f64> {
        &self.v
    }
    pub fn gamma(&self) -> &DMatrix<f64> {
        &self.gamma
    }

    pub fn n_u(&self) -> usize {
        self.v.nrows()
    }
    pub fn n_y(&self) -> usize {
        self.w.nrows()
    }
    pub fn r(&self) -> usize {
        self.w.ncols()
    }

    /// Maximum monomial degree `p` of the decoupled polynomials.
    pub fn degree(&self) -> usize {
        self.gamma.ncols() - 1
    }

    /// Evaluate `W g(Vᵀu)`.
    pub fn eval(&self, u: &DVector<f64>) -> Result<DVector<f64>> {
        if u.len() != self.n_u() {
            return Err(Error::Dimension(format!(
                "block '{}' expects {} inputs, got {}",
                self.label,
                self.n_u(),
                u.len()
            )));
        }
        let sigma = self.v.transpose() * u;
        let g = DVector::from_fn(self.r(), |e, _| {
            // Horner evaluation of gamma row e at sigma[e]
            let mut acc = 0.0;
            for m in (0..self.gamma.ncols()).rev() {
                acc = acc * sigma[e] + self.gamma[(e, m)];
            }
            acc
        });
        Ok(&self.w * g)
    }

    /// Reconstruct the raw multivariate polynomial from the decoupled form by
    /// expanding each `γ[e][m] (v_eᵀu)ᵐ` multinomially.
    pub fn to_poly(&self) -> MultiPoly {
        let n_u = self.n_u();
        let mut rows = vec![Poly::zero(n_u); self.n_y()];
        for e in 0..self.r() {
            let mut linear = Poly::zero(n_u);
            for j in 0..n_u {
                let mut exps = vec![0u32; n_u];
                exps[j] = 1;
                linear.add_term(&exps, self.v[(j, e)]);
            }
            let mut power = Poly::constant(n_u, 1.0); // (v_eᵀu)^m, built up
            for m in 0..self.gamma.ncols() {
                if m > 0 {
                    power = power.mul(&linear);
                }
                let scaled = power.scale(self.gamma[(e, m)]);
                for (i, row) in rows.iter_mut().enumerate() {
                    *row = row.add(&scaled.scale(self.w[(i, e)]));
                }
            }
        }
        MultiPoly::from_rows(rows)
    }
}

/// Max-residual consistency check of a decoupling against a raw polynomial:
/// samples `u` uniformly from the unit ball (seeded) and returns
/// `max ‖f(u) − W g(Vᵀu)‖∞`.
pub fn check_decoupling(f: &MultiPoly, block: &SnBlock, samples: usize, seed: u64) -> Result<f64> {
    if f.n_in() != block.n_u() || f.n_out() != block.n_y() {
        return Err(Error::Dimension(format!(
            "raw polynomial is {}->{} but block '{}' is {}->{}",
            f.n_in(),
            f.n_out(),
            block.label,
            block.n_u(),
            block.n_y()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = f.n_in();
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let mut u = DVector::from_fn(n, |_, _| rng.sample::<f64, _>(rand_distr::StandardNormal));
        let norm = u.norm();
        if norm > 0.0 {
            let radius = rng.random::<f64>().powf(1.0 / n as f64);
            u *= radius / norm;
        }
        let diff = f.eval(&u)? - block.eval(&u)?;
        worst = worst.max(diff.amax());
    }
    Ok(worst)
}

/// One element of a chain: a dynamic block, a static block, or a parallel
/// section (signal copied into every branch, branch outputs summed).
#[derive(Debug, Clone, PartialEq)]
pub enum ChainNode {
    Lti(LtiBlock),
    Sn(SnBlock),
    Parallel(Vec<Vec<ChainNode>>),
}

impl ChainNode {
    pub fn kind(&self) -> &'static str {
        match self {
            ChainNode::Lti(_) => "lti",
            ChainNode::Sn(_) => "sn",
            ChainNode::Parallel(_) => "parallel",
        }
    }

    fn label(&self) -> String {
        match self {
            ChainNode::Lti(b) => b.label.clone(),
            ChainNode::Sn(b) => b.label.clone(),
            ChainNode::Parallel(_) => "parallel".to_string(),
        }
    }
}

/// A validated-on-demand series chain of nodes. The empty chain is legal and
/// denotes the identity map `y = u`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockChain {
    pub n_u: usize,
    pub n_y: usize,
    pub seq: Vec<ChainNode>,
}

/// Interface dimensions of one node as seen during validation.
#[derive(Debug, Clone, PartialEq)]
pub struct DimEntry {
    /// position path, e.g. `2` or `1.0.3` (branch paths are dot-separated)
    pub path: String,
    pub kind: String,
    pub label: String,
    pub n_in: usize,
    pub n_out: usize,
}

/// Per-node interface dimensions produced by a successful validation.
#[derive(Debug, Clone, PartialEq)]
pub struct DimensionReport {
    pub n_u: usize,
    pub n_y: usize,
    pub entries: Vec<DimEntry>,
}

impl fmt::Display for DimensionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "chain: {} -> {}", self.n_u, self.n_y)?;
        for e in &self.entries {
            writeln!(
                f,
                "  [{}] {} '{}': {} -> {}",
                e.path, e.kind, e.label, e.n_in, e.n_out
            )?;
        }
        Ok(())
    }
}

impl BlockChain {
    /// Check chain compatibility of every interface; on success the report
    /// lists the in/out dimension of every node.
    pub fn validate(&self) -> Result<DimensionReport> {
        let mut entries = Vec::new();
        let out = validate_seq(&self.seq, self.n_u, "", &mut entries)?;
        if out != self.n_y {
            return Err(Error::Validation(format!(
                "chain produces {out} outputs but declares n_y = {}",
                self.n_y
            )));
        }
        Ok(DimensionReport {
            n_u: self.n_u,
            n_y: self.n_y,
            entries,
        })
    }

    /// Dynamic (state-carrying) blocks in traversal order, with the block ids
    /// the embedding assigns. Static-gain blocks (`n_x = 0`) are skipped.
    pub fn dynamic_blocks(&self) -> Vec<(BlockId, &LtiBlock)> {
        let mut out = Vec::new();
        let mut counter = 0;
        walk(&self.seq, &mut counter, &mut |id, node| {
            if let ChainNode::Lti(b) = node {
                if b.n_x() > 0 {
                    out.push((id, b));
                }
            }
        });
        out
    }

    /// Initial condition assigning the all-ones vector to every dynamic block.
    pub fn ones_initial_state(&self) -> BTreeMap<BlockId, DVector<f64>> {
        self.dynamic_blocks()
            .into_iter()
            .map(|(id, b)| (id, DVector::from_element(b.n_x(), 1.0)))
            .collect()
    }
}

fn validate_seq(
    seq: &[ChainNode],
    n_in: usize,
    path: &str,
    entries: &mut Vec<DimEntry>,
) -> Result<usize> {
    let mut cur = n_in;
    let mut prev_label = "chain input".to_string();
    for (i, node) in seq.iter().enumerate() {
        let node_path = if path.is_empty() {
            format!("{i}")
        } else {
            format!("{path}.{i}")
        };
        let (n_u, n_y) = match node {
            ChainNode::Lti(b) => (b.n_u(), b.n_y()),
            ChainNode::Sn(b) => (b.n_u(), b.n_y()),
            ChainNode::Parallel(branches) => {
                if branches.len() < 2 {
                    return Err(Error::Validation(format!(
                        "parallel section at [{node_path}] has {} branch(es); at least 2 required",
                        branches.len()
                    )));
                }
                let mut dims = None;
                for (bi, branch) in branches.iter().enumerate() {
                    if branch.is_empty() {
                        return Err(Error::Validation(format!(
                            "parallel section at [{node_path}] has an empty branch {bi}"
                        )));
                    }
                    let sub_path = format!("{node_path}.{bi}");
                    let out = validate_seq(branch, cur, &sub_path, entries)?;
                    match dims {
                        None => dims = Some(out),
                        Some(d) if d != out => {
                            return Err(Error::Validation(format!(
                                "parallel section at [{node_path}]: branch {bi} produces {out} \
                                 outputs but branch 0 produces {d}"
                            )))
                        }
                        _ => {}
                    }
                }
                (cur, dims.unwrap())
            }
        };
        if n_u != cur {
            return Err(Error::Validation(format!(
                "dimension mismatch between {prev_label} ({cur} outputs) and {} '{}' at \
                 [{node_path}] ({n_u} inputs)",
                node.kind(),
                node.label()
            )));
        }
        entries.push(DimEntry {
            path: node_path,
            kind: node.kind().to_string(),
            label: node.label(),
            n_in: n_u,
            n_out: n_y,
        });
        prev_label = format!("{} '{}'", node.kind(), node.label());
        cur = n_y;
    }
    Ok(cur)
}

/// Pre-order walk assigning one id per node (branches visited in order).
/// The embedding and the chain simulator rely on the same numbering.
pub(crate) fn walk<'a>(
    seq: &'a [ChainNode],
    counter: &mut usize,
    f: &mut impl FnMut(BlockId, &'a ChainNode),
) {
    for node in seq {
        let id = BlockId(*counter);
        *counter += 1;
        f(id, node);
        if let ChainNode::Parallel(branches) = node {
            for branch in branches {
                walk(branch, counter, f);
            }
        }
    }
}
