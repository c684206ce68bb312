//! JSON export/import of lifted models.
//!
//! Schema: `{"n_z", "n_u", "n_y", "A", "C", "state_input", "output_input",
//! "atlas", "base_dims", "class"}` where each input-map entry is
//! `{"d": int, "K": [[..]], "L": [[[..]]]}` with `L` listed densely over the
//! lifted coordinates, `atlas` lists each coordinate as its
//! `[block, state]` factor pairs, and `base_dims` maps block ids to state
//! dimensions.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{classify, InputMap, PitiModel};
use crate::atlas::{Atlas, BlockId, Monomial};
use crate::error::Error;
use crate::Result;

#[derive(Serialize, Deserialize)]
struct RawModel {
    n_z: usize,
    n_u: usize,
    n_y: usize,
    #[serde(rename = "A")]
    a: Vec<Vec<f64>>,
    #[serde(rename = "C")]
    c: Vec<Vec<f64>>,
    state_input: Vec<RawTerm>,
    output_input: Vec<RawTerm>,
    atlas: Vec<Vec<[usize; 2]>>,
    base_dims: Vec<[usize; 2]>,
    class: String,
}

#[derive(Serialize, Deserialize)]
struct RawTerm {
    d: usize,
    #[serde(rename = "K")]
    k: Vec<Vec<f64>>,
    #[serde(rename = "L")]
    l: Vec<Vec<Vec<f64>>>,
}

fn matrix_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

fn rows_matrix(rows: &[Vec<f64>], nrows: usize, ncols: usize, what: &str) -> Result<DMatrix<f64>> {
    if rows.len() != nrows || rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::Parse(format!(
            "embedded model: {what} is not a {nrows}x{ncols} matrix"
        )));
    }
    Ok(DMatrix::from_row_iterator(
        nrows,
        ncols,
        rows.iter().flatten().copied(),
    ))
}

fn map_to_raw(map: &InputMap, n_z: usize) -> Vec<RawTerm> {
    map.terms()
        .iter()
        .map(|t| {
            let cols = t.constant.ncols();
            let zero = DMatrix::zeros(map.rows(), cols);
            RawTerm {
                d: t.degree,
                k: matrix_rows(&t.constant),
                l: (0..n_z)
                    .map(|j| matrix_rows(t.linear.get(&j).unwrap_or(&zero)))
                    .collect(),
            }
        })
        .collect()
}

fn raw_to_map(
    raw: &[RawTerm],
    rows: usize,
    n_u: usize,
    n_z: usize,
    what: &str,
) -> Result<InputMap> {
    let mut map = InputMap::empty(rows, n_u);
    for t in raw {
        if t.d == 0 {
            return Err(Error::Parse(format!(
                "embedded model: {what} has a degree-0 term"
            )));
        }
        let cols = n_u.pow(t.d as u32);
        map.add_constant(t.d, &rows_matrix(&t.k, rows, cols, what)?);
        if t.l.len() != n_z {
            return Err(Error::Parse(format!(
                "embedded model: {what} degree {} lists {} linear blocks, expected {n_z}",
                t.d,
                t.l.len()
            )));
        }
        for (j, lm) in t.l.iter().enumerate() {
            map.add_linear(t.d, j, &rows_matrix(lm, rows, cols, what)?);
        }
    }
    map.normalize();
    Ok(map)
}

/// Serialize a lifted model (class is recomputed, never trusted).
pub fn model_to_json(model: &PitiModel) -> String {
    let n_z = model.n_z();
    let raw = RawModel {
        n_z,
        n_u: model.n_u,
        n_y: model.n_y(),
        a: matrix_rows(&model.a),
        c: matrix_rows(&model.c),
        state_input: map_to_raw(&model.state_input, n_z),
        output_input: map_to_raw(&model.output_input, n_z),
        atlas: model
            .atlas
            .coords()
            .iter()
            .map(|m| m.factors().iter().map(|&(b, s)| [b.0, s]).collect())
            .collect(),
        base_dims: model
            .atlas
            .base_dims()
            .iter()
            .map(|(&b, &d)| [b.0, d])
            .collect(),
        class: classify(model).to_string(),
    };
    serde_json::to_string_pretty(&raw).expect("model serialization cannot fail")
}

/// Parse a lifted model previously written by [`model_to_json`].
pub fn model_from_json(text: &str) -> Result<PitiModel> {
    let raw: RawModel = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let a = rows_matrix(&raw.a, raw.n_z, raw.n_z, "A")?;
    let c = rows_matrix(&raw.c, raw.n_y, raw.n_z, "C")?;
    let state_input = raw_to_map(&raw.state_input, raw.n_z, raw.n_u, raw.n_z, "state_input")?;
    let output_input = raw_to_map(&raw.output_input, raw.n_y, raw.n_u, raw.n_z, "output_input")?;
    let base_dims: BTreeMap<BlockId, usize> = raw
        .base_dims
        .iter()
        .map(|&[b, d]| (BlockId(b), d))
        .collect();
    if raw.atlas.len() != raw.n_z {
        return Err(Error::Parse(format!(
            "embedded model: atlas lists {} coordinates, expected {}",
            raw.atlas.len(),
            raw.n_z
        )));
    }
    let coords = raw
        .atlas
        .iter()
        .map(|factors| {
            let mut m = Monomial::one();
            for &[b, s] in factors {
                let id = BlockId(b);
                match base_dims.get(&id) {
                    Some(&dim) if s < dim => {}
                    _ => {
                        return Err(Error::Parse(format!(
                            "embedded model: atlas factor [{b}, {s}] outside base dimensions"
                        )))
                    }
                }
                m = m.product(&Monomial::var(id, s));
            }
            Ok(m)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PitiModel {
        a,
        c,
        state_input,
        output_input,
        atlas: Atlas::from_parts(coords, base_dims),
        n_u: raw.n_u,
    })
}
