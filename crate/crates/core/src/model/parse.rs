//! JSON front end for block-chain descriptions.
//!
//! Top level: `{"n_u": int, "n_y": int, "chain": [node, ...]}` with node forms
//! `{"kind": "lti", "A": [[..]], "B": [[..]], "C": [[..]], "D": [[..]], "label": str}`,
//! `{"kind": "sn", "W": [[..]], "V": [[..]], "gamma": [[..]], "label": str,
//!   "raw_poly": {"n_in": int, "n_out": int, "terms": [{"row": int, "exps": [int..], "coef": f}..]}}`
//! and `{"kind": "parallel", "branches": [[node..], [node..], ..]}`.
//! Matrices are row-major arrays of arrays of finite doubles.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{BlockChain, ChainNode, LtiBlock, SnBlock};
use crate::error::Error;
use crate::poly::MultiPoly;
use crate::Result;

#[derive(Serialize, Deserialize)]
struct RawModel {
    n_u: usize,
    n_y: usize,
    chain: Vec<RawNode>,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum RawNode {
    Lti {
        #[serde(rename = "A")]
        a: Vec<Vec<f64>>,
        #[serde(rename = "B")]
        b: Vec<Vec<f64>>,
        #[serde(rename = "C")]
        c: Vec<Vec<f64>>,
        #[serde(rename = "D")]
        d: Vec<Vec<f64>>,
        label: String,
    },
    Sn {
        #[serde(rename = "W")]
        w: Vec<Vec<f64>>,
        #[serde(rename = "V")]
        v: Vec<Vec<f64>>,
        gamma: Vec<Vec<f64>>,
        label: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        raw_poly: Option<RawPoly>,
    },
    Parallel {
        branches: Vec<Vec<RawNode>>,
    },
}

#[derive(Serialize, Deserialize)]
struct RawPoly {
    n_in: usize,
    n_out: usize,
    terms: Vec<RawTerm>,
}

#[derive(Serialize, Deserialize)]
struct RawTerm {
    row: usize,
    exps: Vec<u32>,
    coef: f64,
}

fn to_matrix(rows: &[Vec<f64>], what: &str, label: &str) -> Result<DMatrix<f64>> {
    let n_rows = rows.len();
    let n_cols = rows.first().map(Vec::len).unwrap_or(0);
    if rows.iter().any(|r| r.len() != n_cols) {
        return Err(Error::Parse(format!(
            "block '{label}': matrix {what} has ragged rows"
        )));
    }
    Ok(DMatrix::from_row_iterator(
        n_rows,
        n_cols,
        rows.iter().flatten().copied(),
    ))
}

fn from_matrix(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

fn to_node(raw: &RawNode) -> Result<ChainNode> {
    match raw {
        RawNode::Lti { a, b, c, d, label } => Ok(ChainNode::Lti(LtiBlock::new(
            to_matrix(a, "A", label)?,
            to_matrix(b, "B", label)?,
            to_matrix(c, "C", label)?,
            to_matrix(d, "D", label)?,
            label.clone(),
        )?)),
        RawNode::Sn {
            w,
            v,
            gamma,
            label,
            raw_poly,
        } => {
            let poly = raw_poly.as_ref().map(|rp| to_poly(rp, label)).transpose()?;
            Ok(ChainNode::Sn(SnBlock::new(
                to_matrix(w, "W", label)?,
                to_matrix(v, "V", label)?,
                to_matrix(gamma, "gamma", label)?,
                label.clone(),
                poly,
            )?))
        }
        RawNode::Parallel { branches } => Ok(ChainNode::Parallel(
            branches
                .iter()
                .map(|br| br.iter().map(to_node).collect())
                .collect::<Result<_>>()?,
        )),
    }
}

fn to_poly(raw: &RawPoly, label: &str) -> Result<MultiPoly> {
    let mut f = MultiPoly::new(raw.n_in, raw.n_out);
    for t in &raw.terms {
        if t.row >= raw.n_out || t.exps.len() != raw.n_in {
            return Err(Error::Parse(format!(
                "block '{label}': raw polynomial term with row {} / {} exponents does not \
                 match declared dimensions {}x{}",
                t.row,
                t.exps.len(),
                raw.n_out,
                raw.n_in
            )));
        }
        if !t.coef.is_finite() {
            return Err(Error::Parse(format!(
                "block '{label}': non-finite raw polynomial coefficient"
            )));
        }
        f.add_term(t.row, &t.exps, t.coef);
    }
    Ok(f)
}

fn from_node(node: &ChainNode) -> RawNode {
    match node {
        ChainNode::Lti(b) => RawNode::Lti {
            a: from_matrix(b.a()),
            b: from_matrix(b.b()),
            c: from_matrix(b.c()),
            d: from_matrix(b.d()),
            label: b.label.clone(),
        },
        ChainNode::Sn(b) => RawNode::Sn {
            w: from_matrix(b.w()),
            v: from_matrix(b.v()),
            gamma: from_matrix(b.gamma()),
            label: b.label.clone(),
            raw_poly: b.raw_poly.as_ref().map(|f| RawPoly {
                n_in: f.n_in(),
                n_out: f.n_out(),
                terms: f
                    .rows()
                    .iter()
                    .enumerate()
                    .flat_map(|(row, p)| {
                        p.terms().map(move |(e, c)| RawTerm {
                            row,
                            exps: e.to_vec(),
                            coef: c,
                        })
                    })
                    .collect(),
            }),
        },
        ChainNode::Parallel(branches) => RawNode::Parallel {
            branches: branches
                .iter()
                .map(|br| br.iter().map(from_node).collect())
                .collect(),
        },
    }
}

/// Parse a model file. Total over the documented grammar; the returned chain
/// still needs [`BlockChain::validate`] for interconnection checks.
pub fn parse_model(text: &str) -> Result<BlockChain> {
    let raw: RawModel = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let seq = raw.chain.iter().map(to_node).collect::<Result<_>>()?;
    Ok(BlockChain {
        n_u: raw.n_u,
        n_y: raw.n_y,
        seq,
    })
}

/// Serialize a chain back to the model-file format.
pub fn serialize_model(chain: &BlockChain) -> String {
    let raw = RawModel {
        n_u: chain.n_u,
        n_y: chain.n_y,
        chain: chain.seq.iter().map(from_node).collect(),
    };
    serde_json::to_string_pretty(&raw).expect("model serialization cannot fail")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_empty_chain() {
        let chain = parse_model(r#"{"n_u": 1, "n_y": 1, "chain": []}"#).unwrap();
        assert_eq!((chain.n_u, chain.n_y), (1, 1));
        assert!(chain.seq.is_empty());
        chain.validate().unwrap();
    }

    #[test]
    fn parse_reports_position() {
        let err = parse_model("{\"n_u\": 1,\n  oops").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("line 2"), "{msg}");
    }

    #[test]
    fn parse_rejects_unknown_kind() {
        let err =
            parse_model(r#"{"n_u":1,"n_y":1,"chain":[{"kind":"delay","label":"x"}]}"#).unwrap_err();
        assert!(err.to_string().contains("delay"), "{err}");
    }

    #[test]
    fn parse_rejects_shape_mismatch() {
        let err = parse_model(
            r#"{"n_u":1,"n_y":1,"chain":[{"kind":"lti",
                "A":[[0.0,1.0],[0.0,0.0]],"B":[[1.0]],"C":[[1.0,0.0]],"D":[[0.0]],
                "label":"l"}]}"#,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Validation(_)), "{err}");

        let err = parse_model(
            r#"{"n_u":1,"n_y":1,"chain":[{"kind":"lti",
                "A":[[0.0,1.0],[0.0]],"B":[[1.0],[1.0]],"C":[[1.0,0.0]],"D":[[0.0]],
                "label":"l"}]}"#,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Parse(_)), "{err}");
    }

    #[test]
    fn roundtrip_preserves_structure() {
        let text = r#"{
            "n_u": 1, "n_y": 1,
            "chain": [
                {"kind": "lti", "A": [[-1.0]], "B": [[2.0]], "C": [[1.0]], "D": [[0.5]],
                 "label": "g"},
                {"kind": "parallel", "branches": [
                    [{"kind": "sn", "W": [[1.0]], "V": [[1.0]],
                      "gamma": [[0.0, 1.0, 0.5]], "label": "s",
                      "raw_poly": {"n_in": 1, "n_out": 1,
                                   "terms": [{"row": 0, "exps": [1], "coef": 1.0},
                                             {"row": 0, "exps": [2], "coef": 0.5}]}}],
                    [{"kind": "lti", "A": [[-2.0]], "B": [[1.0]], "C": [[1.0]],
                      "D": [[0.0]], "label": "h"}]
                ]}
            ]
        }"#;
        let chain = parse_model(text).unwrap();
        let back = parse_model(&serialize_model(&chain)).unwrap();
        assert_eq!(chain, back);
    }
}
