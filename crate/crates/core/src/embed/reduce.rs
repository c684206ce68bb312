//! Duplicate-state reduction of lifted models.
//!
//! Kronecker enumeration repeats monomials (`z ⊗ z` carries `z₁z₂` twice) and
//! parallel sections duplicate whole state blocks. On any lifted trajectory
//! coordinates carrying the same monomial hold the same value, so projecting
//! onto first occurrences and reading duplicates back through `T†` leaves the
//! input–output behavior unchanged.

use nalgebra::DMatrix;

use super::{InputMap, PitiModel};
use crate::atlas::ReductionMap;

fn gather_rows(m: &DMatrix<f64>, keep: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(keep.len(), m.ncols(), |i, j| m[(keep[i], j)])
}

/// `M · T†`: fold columns of duplicate coordinates onto their representative.
fn fold_cols(m: &DMatrix<f64>, rep: &[usize], n_reduced: usize) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(m.nrows(), n_reduced);
    for j in 0..m.ncols() {
        let jr = rep[j];
        for i in 0..m.nrows() {
            out[(i, jr)] += m[(i, j)];
        }
    }
    out
}

fn reduce_map(map: &InputMap, rm: &ReductionMap, reduce_rows: bool) -> InputMap {
    let rows = if reduce_rows {
        rm.n_reduced()
    } else {
        map.rows()
    };
    let mut out = InputMap::empty(rows, map.n_u());
    for term in map.terms() {
        let k = if reduce_rows {
            gather_rows(&term.constant, rm.keep())
        } else {
            term.constant.clone()
        };
        out.add_constant(term.degree, &k);
        for (&j, lm) in &term.linear {
            let l = if reduce_rows {
                gather_rows(lm, rm.keep())
            } else {
                lm.clone()
            };
            out.add_linear(term.degree, rm.rep()[j], &l);
        }
    }
    out.normalize();
    out
}

/// Project a model onto its unique monomial coordinates:
/// `A' = T A T†`, `C' = C T†`, input maps re-indexed through the
/// representatives. Simulated input–output behavior is unchanged.
pub fn reduce(model: &PitiModel) -> (PitiModel, ReductionMap) {
    let rm = model.atlas.dedup();
    let a = fold_cols(&gather_rows(&model.a, rm.keep()), rm.rep(), rm.n_reduced());
    let c = fold_cols(&model.c, rm.rep(), rm.n_reduced());
    let state_input = reduce_map(&model.state_input, &rm, true);
    let output_input = reduce_map(&model.output_input, &rm, false);
    let reduced = PitiModel {
        a,
        c,
        state_input,
        output_input,
        atlas: rm.reduced_atlas().clone(),
        n_u: model.n_u,
    };
    (reduced, rm)
}
