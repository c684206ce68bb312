#![allow(dead_code)]

//! Shared helpers for the integration suites: fixture loading and a seeded
//! random chain generator used by the fuzzing-style exactness tests.

use std::collections::BTreeMap;
use std::path::PathBuf;

use blocklift::atlas::{Atlas, BlockId};
use blocklift::model::{parse_model, BlockChain, ChainNode, LtiBlock, SnBlock};
use nalgebra::{DMatrix, DVector};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
}

pub fn load_fixture(name: &str) -> BlockChain {
    let text = std::fs::read_to_string(fixture_path(name))
        .unwrap_or_else(|e| panic!("cannot read fixture {name}: {e}"));
    parse_model(&text).unwrap_or_else(|e| panic!("cannot parse fixture {name}: {e}"))
}

/// Size guard for the intermediate power atlas a static block would create.
const MAX_LIFT: usize = 1200;

fn power_size(n: usize, p: usize) -> usize {
    let mut total = 1usize;
    let mut pow = 1usize;
    for _ in 0..p {
        pow = pow.saturating_mul(n);
        total = total.saturating_add(pow);
    }
    total
}

/// Random block chain within the fuzzing bounds: at most 4 nodes, at most one
/// parallel section of two branches, state dimensions up to 2, polynomial
/// degrees up to 3, all coefficients in [−1, 1] (state matrices shifted to be
/// Hurwitz). The generator tracks the deduplicated lift dimension and avoids
/// chains whose embedding would outgrow `MAX_LIFT`.
pub fn random_chain(seed: u64) -> BlockChain {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_u = rng.random_range(1..=2usize);
    let n_nodes = rng.random_range(1..=4usize);
    let mut counter = 0usize;
    let mut atlas = Atlas::empty();
    let mut parallel_left = 1usize;
    let (seq, n_y) = gen_seq(
        &mut rng,
        n_nodes,
        n_u,
        None,
        &mut counter,
        &mut atlas,
        &mut parallel_left,
    );
    BlockChain { n_u, n_y, seq }
}

/// Random initial state (entries in [−1, 1]) for every dynamic block.
pub fn random_x0(chain: &BlockChain, seed: u64) -> BTreeMap<BlockId, DVector<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    chain
        .dynamic_blocks()
        .into_iter()
        .map(|(id, b)| {
            (
                id,
                DVector::from_fn(b.n_x(), |_, _| rng.random_range(-1.0..1.0)),
            )
        })
        .collect()
}

fn gen_seq(
    rng: &mut ChaCha8Rng,
    n_nodes: usize,
    n_in: usize,
    force_out: Option<usize>,
    counter: &mut usize,
    atlas: &mut Atlas,
    parallel_left: &mut usize,
) -> (Vec<ChainNode>, usize) {
    let mut seq = Vec::new();
    let mut dim = n_in;
    for i in 0..n_nodes {
        let last = i + 1 == n_nodes;
        let out_constraint = if last { force_out } else { None };

        let sn_degrees: Vec<usize> = (1..=3)
            .filter(|&p| power_size(atlas.len(), p) <= MAX_LIFT)
            .collect();
        let mut kinds = vec!["lti"];
        if !sn_degrees.is_empty() {
            kinds.push("sn");
        }
        if *parallel_left > 0 {
            kinds.push("parallel");
        }
        let kind = *kinds.choose(rng).unwrap();

        let node = match kind {
            "lti" => {
                let id = BlockId(*counter);
                *counter += 1;
                let node = gen_lti(rng, dim, out_constraint);
                if let ChainNode::Lti(b) = &node {
                    dim = b.n_y();
                    if b.n_x() > 0 {
                        *atlas = atlas
                            .concat(&Atlas::for_block(id, b.n_x()))
                            .dedup()
                            .reduced_atlas()
                            .clone();
                    }
                }
                node
            }
            "sn" => {
                *counter += 1;
                let p = *sn_degrees.choose(rng).unwrap();
                let node = gen_sn(rng, dim, out_constraint, p);
                if let ChainNode::Sn(b) = &node {
                    dim = b.n_y();
                }
                *atlas = atlas.power(p).dedup().reduced_atlas().clone();
                node
            }
            _ => {
                *parallel_left -= 1;
                *counter += 1;
                let shared = atlas.clone();
                let mut atlas_a = shared.clone();
                let n_a = rng.random_range(1..=2usize);
                let (branch_a, out_a) =
                    gen_seq(rng, n_a, dim, out_constraint, counter, &mut atlas_a, &mut 0);
                let mut atlas_b = shared;
                let n_b = rng.random_range(1..=2usize);
                let (branch_b, _) =
                    gen_seq(rng, n_b, dim, Some(out_a), counter, &mut atlas_b, &mut 0);
                *atlas = atlas_a.concat(&atlas_b).dedup().reduced_atlas().clone();
                dim = out_a;
                ChainNode::Parallel(vec![branch_a, branch_b])
            }
        };
        seq.push(node);
    }
    (seq, dim)
}

fn gen_lti(rng: &mut ChaCha8Rng, n_in: usize, force_out: Option<usize>) -> ChainNode {
    let n_out = force_out.unwrap_or_else(|| rng.random_range(1..=2));
    let n_x = if rng.random_bool(0.1) {
        0
    } else {
        rng.random_range(1..=2)
    };
    let mut a = DMatrix::from_fn(n_x, n_x, |_, _| rng.random_range(-1.0..1.0));
    for i in 0..n_x {
        a[(i, i)] -= 2.5; // Gershgorin: eigenvalues strictly in the left half-plane
    }
    let b = DMatrix::from_fn(n_x, n_in, |_, _| rng.random_range(-1.0..1.0));
    let c = DMatrix::from_fn(n_out, n_x, |_, _| rng.random_range(-1.0..1.0));
    let d = if n_x > 0 && rng.random_bool(0.5) {
        DMatrix::zeros(n_out, n_in)
    } else {
        DMatrix::from_fn(n_out, n_in, |_, _| rng.random_range(-1.0..1.0))
    };
    ChainNode::Lti(LtiBlock::new(a, b, c, d, format!("lti{}", rng.random::<u32>())).unwrap())
}

fn gen_sn(rng: &mut ChaCha8Rng, n_in: usize, force_out: Option<usize>, p: usize) -> ChainNode {
    let n_out = force_out.unwrap_or_else(|| rng.random_range(1..=2));
    let r = rng.random_range(1..=2usize);
    let w = DMatrix::from_fn(n_out, r, |_, _| rng.random_range(-1.0..1.0));
    let v = DMatrix::from_fn(n_in, r, |_, _| rng.random_range(-1.0..1.0));
    let gamma = DMatrix::from_fn(r, p + 1, |_, _| rng.random_range(-1.0..1.0));
    ChainNode::Sn(SnBlock::new(w, v, gamma, format!("sn{}", rng.random::<u32>()), None).unwrap())
}
