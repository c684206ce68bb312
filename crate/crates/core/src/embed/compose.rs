//! The elementary embedding rules and the induction driver.
//!
//! Every rule takes the lifted model of the chain prefix and absorbs one more
//! node, preserving exactness: a dynamic block extends the state, a static
//! polynomial block raises the lifted state to its Kronecker powers, a
//! parallel section copies the prefix into each branch and block-diagonally
//! rejoins the branch models at the closing sum.

use nalgebra::{DMatrix, DVector, RowDVector};

use super::zu::ScalarZu;
use super::{reduce, InputMap, PitiModel};
use crate::atlas::{Atlas, BlockId};
use crate::error::Error;
use crate::kron::{lifted_a, lifted_b};
use crate::model::{BlockChain, ChainNode, LtiBlock, SnBlock};
use crate::Result;

/// Options for [`embed_chain_with`].
#[derive(Debug, Clone, Copy, Default)]
pub struct EmbedOptions {
    /// Deduplicate lifted coordinates after every absorbed node instead of
    /// once at the end. Semantics-preserving; curbs intermediate blowup.
    pub reduce_each_step: bool,
}

/// Lift a single LTI block: the lifted state is the block state itself.
pub fn embed_lti_start(block: &LtiBlock, id: BlockId) -> PitiModel {
    let atlas = Atlas::for_block(id, block.n_x());
    let mut state_input = InputMap::empty(block.n_x(), block.n_u());
    state_input.add_constant(1, block.b());
    state_input.normalize();
    let mut output_input = InputMap::empty(block.n_y(), block.n_u());
    output_input.add_constant(1, block.d());
    output_input.normalize();
    PitiModel {
        a: block.a().clone(),
        c: block.c().clone(),
        state_input,
        output_input,
        atlas,
        n_u: block.n_u(),
    }
}

/// Lift a single static block: the lifted state is the constant 1, the output
/// is `f(0) + f̃(u)·u` with the factor from the closed-form integral.
pub fn embed_sn_start(block: &SnBlock) -> Result<PitiModel> {
    let n_u = block.n_u();
    let f = block.to_poly();
    let (f0, f_bar) = crate::poly::split_const(&f);
    let f_tilde = crate::poly::lambda_factor(&f_bar)?;

    let atlas = Atlas::from_parts(vec![crate::atlas::Monomial::one()], Default::default());
    let mut output_input = InputMap::empty(block.n_y(), n_u);
    for r in 0..f_tilde.n_rows() {
        for c in 0..f_tilde.n_cols() {
            for (exps, coef) in f_tilde.entry(r, c).terms() {
                // the monomial u^exps·u_c, regrouped by total degree
                let d = exps.iter().sum::<u32>() as usize + 1;
                let mut pos = 0usize;
                for (var, &e) in exps.iter().enumerate() {
                    for _ in 0..e {
                        pos = pos * n_u + var;
                    }
                }
                pos = pos * n_u + c;
                output_input.add_constant_entry(d, r, pos, coef);
            }
        }
    }
    output_input.normalize();

    Ok(PitiModel {
        a: DMatrix::zeros(1, 1),
        c: DMatrix::from_column_slice(block.n_y(), 1, f0.as_slice()),
        state_input: InputMap::empty(1, n_u),
        output_input,
        atlas,
        n_u,
    })
}

/// Absorb an LTI block following a lifted prefix.
pub fn compose_ld(prev: &PitiModel, block: &LtiBlock, id: BlockId) -> Result<PitiModel> {
    if prev.n_y() != block.n_u() {
        return Err(Error::Dimension(format!(
            "prefix produces {} outputs but block '{}' expects {} inputs",
            prev.n_y(),
            block.label,
            block.n_u()
        )));
    }
    let n_prev = prev.n_z();
    let n_x = block.n_x();
    let atlas = prev.atlas.concat(&Atlas::for_block(id, n_x));

    let mut a = DMatrix::zeros(n_prev + n_x, n_prev + n_x);
    a.view_mut((0, 0), (n_prev, n_prev)).copy_from(&prev.a);
    a.view_mut((n_prev, 0), (n_x, n_prev))
        .copy_from(&(block.b() * &prev.c));
    a.view_mut((n_prev, n_prev), (n_x, n_x))
        .copy_from(block.a());

    let state_input = InputMap::vstack(&prev.state_input, &prev.output_input.left_mul(block.b()));

    let mut c = DMatrix::zeros(block.n_y(), n_prev + n_x);
    c.view_mut((0, 0), (block.n_y(), n_prev))
        .copy_from(&(block.d() * &prev.c));
    c.view_mut((0, n_prev), (block.n_y(), n_x))
        .copy_from(block.c());

    let output_input = prev.output_input.left_mul(block.d());

    Ok(PitiModel {
        a,
        c,
        state_input,
        output_input,
        atlas,
        n_u: prev.n_u,
    })
}

fn binomial(l: usize, k: usize) -> f64 {
    let mut acc = 1.0;
    for i in 0..k {
        acc = acc * (l - i) as f64 / (i + 1) as f64;
    }
    acc
}

/// Absorb a static polynomial block of degree `p` following a lifted prefix:
/// the new lifted state is `[1, z, z⁽²⁾, …, z⁽ᵖ⁾]`.
pub fn compose_sn(prev: &PitiModel, block: &SnBlock) -> Result<PitiModel> {
    if prev.n_y() != block.n_u() {
        return Err(Error::Dimension(format!(
            "prefix produces {} outputs but block '{}' expects {} inputs",
            prev.n_y(),
            block.label,
            block.n_u()
        )));
    }
    let p = block.degree();
    let n = prev.n_z();
    let n_u = prev.n_u;
    let r = block.r();

    let atlas = prev.atlas.power(p);
    // coordinate (and row) offset of the z^{(g)} block; block 0 is the single
    // constant coordinate
    let mut offsets = vec![0usize; p + 1];
    for g in 1..=p {
        offsets[g] = offsets[g - 1] + n.pow((g - 1) as u32);
    }
    let block_offset = |g: usize| offsets[g];
    let n_z = atlas.len();
    debug_assert_eq!(n_z, block_offset(p) + n.pow(p as u32));

    // state matrix: block-diagonal lifts of the previous state matrix
    let mut a = DMatrix::zeros(n_z, n_z);
    for tau in 1..=p {
        let dim = n.pow(tau as u32);
        if dim == 0 {
            continue;
        }
        let lifted = lifted_a(&prev.a, tau);
        a.view_mut((block_offset(tau), block_offset(tau)), (dim, dim))
            .copy_from(&lifted);
    }

    // state input: each previous term feeds every power block through the
    // Kronecker-power Jacobian; constants enter via lifted columns acting on
    // z^{(τ−1)}, state-linear parts via lifted columns re-indexed into z^{(τ)}
    let mut state_input = InputMap::empty(n_z, n_u);
    for term in prev.state_input.terms() {
        let d = term.degree;
        let cols = term.constant.ncols();
        // τ = 1 rows: the original term, coordinates shifted past the constant
        {
            let mut k_new = DMatrix::zeros(n_z, cols);
            k_new
                .view_mut((block_offset(1), 0), (n, cols))
                .copy_from(&term.constant);
            state_input.add_constant(d, &k_new);
            for (&j, lm) in &term.linear {
                let mut l_new = DMatrix::zeros(n_z, cols);
                l_new
                    .view_mut((block_offset(1), 0), (n, cols))
                    .copy_from(lm);
                state_input.add_linear(d, block_offset(1) + j, &l_new);
            }
        }
        for tau in 2..=p {
            let row0 = block_offset(tau);
            let sub = n.pow((tau - 1) as u32);
            for c in 0..cols {
                let b_col = DVector::from(term.constant.column(c));
                if b_col.iter().any(|&v| v != 0.0) {
                    let tb = lifted_b(&b_col, tau);
                    for mu in 0..sub {
                        for row in 0..tb.nrows() {
                            let v = tb[(row, mu)];
                            state_input.add_linear_entry(
                                d,
                                block_offset(tau - 1) + mu,
                                row0 + row,
                                c,
                                v,
                            );
                        }
                    }
                }
                for (&j, lm) in &term.linear {
                    let l_col = DVector::from(lm.column(c));
                    if l_col.iter().all(|&v| v == 0.0) {
                        continue;
                    }
                    let tb = lifted_b(&l_col, tau);
                    for mu in 0..sub {
                        for row in 0..tb.nrows() {
                            let v = tb[(row, mu)];
                            state_input.add_linear_entry(
                                d,
                                block_offset(tau) + j * sub + mu,
                                row0 + row,
                                c,
                                v,
                            );
                        }
                    }
                }
            }
        }
    }
    state_input.normalize();

    // output matrix: W·Γ with Γ rows [γ₀, γ₁ṽ, γ₂ṽ⁽²⁾, …] and ṽ = vᵀC
    let mut gamma_full = DMatrix::zeros(r, n_z);
    let mut v_tilde_rows = Vec::with_capacity(r);
    for e in 0..r {
        let v_e = block.v().column(e);
        let v_tilde = RowDVector::from(v_e.transpose() * &prev.c);
        gamma_full[(e, 0)] = block.gamma()[(e, 0)];
        let mut pow = RowDVector::from_element(1, 1.0);
        for g in 1..=p {
            pow = RowDVector::from(v_tilde.kronecker(&pow));
            let coef = block.gamma()[(e, g)];
            let dim = n.pow(g as u32);
            for i in 0..dim {
                gamma_full[(e, block_offset(g) + i)] = coef * pow[i];
            }
        }
        v_tilde_rows.push(v_tilde);
    }
    let c = block.w() * gamma_full;

    // output input: binomial cross terms of (ṽz + v·feedthrough)^l, expanded
    // into canonical coefficients over the new atlas
    let mut output_input = InputMap::empty(block.n_y(), n_u);
    if !prev.output_input.is_zero() {
        for (e, v_tilde) in v_tilde_rows.iter().enumerate() {
            let v_col: Vec<f64> = block.v().column(e).iter().copied().collect();
            let s_e = ScalarZu::from_row_of_map(&v_col, &prev.output_input, n);
            if s_e.is_zero() {
                continue;
            }
            let z_lin = ScalarZu::from_state_row(v_tilde.as_slice(), n, n_u);
            let mut z_pows = Vec::with_capacity(p + 1);
            z_pows.push(ScalarZu::one(n, n_u));
            let mut s_pows = Vec::with_capacity(p + 1);
            s_pows.push(ScalarZu::one(n, n_u));
            for m in 1..=p {
                z_pows.push(z_pows[m - 1].mul(&z_lin));
                s_pows.push(s_pows[m - 1].mul(&s_e));
            }
            let mut cross = ScalarZu::zero(n, n_u);
            for l in 1..=p {
                let coef = block.gamma()[(e, l)];
                if coef == 0.0 {
                    continue;
                }
                for k in 1..=l {
                    let prod = z_pows[l - k].mul(&s_pows[k]);
                    cross.add_scaled(&prod, coef * binomial(l, k));
                }
            }
            for ((g, zpos, d, upos), coef) in cross.terms() {
                debug_assert!(d >= 1 && g <= p);
                for i in 0..block.n_y() {
                    let v = block.w()[(i, e)] * coef;
                    if v == 0.0 {
                        continue;
                    }
                    if g == 0 {
                        output_input.add_constant_entry(d, i, upos, v);
                    } else {
                        output_input.add_linear_entry(d, block_offset(g) + zpos, i, upos, v);
                    }
                }
            }
        }
    }
    output_input.normalize();

    Ok(PitiModel {
        a,
        c,
        state_input,
        output_input,
        atlas,
        n_u,
    })
}

/// Copy a lifted prefix into `m` parallel branches. The copies share atlas
/// and block identifiers — the physical state is one — so duplicated branch
/// dynamics collapse again in the final reduction.
pub fn split(prev: &PitiModel, m: usize) -> Result<Vec<PitiModel>> {
    if m < 2 {
        return Err(Error::Precondition(format!(
            "a parallel section needs at least 2 branches, got {m}"
        )));
    }
    Ok(vec![prev.clone(); m])
}

/// Join parallel branch models at the output sum: block-diagonal state,
/// summed outputs.
pub fn join(branches: &[PitiModel]) -> Result<PitiModel> {
    let first = branches
        .first()
        .ok_or_else(|| Error::Precondition("join requires at least one branch".into()))?;
    let n_u = first.n_u;
    let n_y = first.n_y();
    for (i, b) in branches.iter().enumerate() {
        if b.n_u != n_u || b.n_y() != n_y {
            return Err(Error::Dimension(format!(
                "branch {i} is {}->{} but branch 0 is {}->{}",
                b.n_u,
                b.n_y(),
                n_u,
                n_y
            )));
        }
    }
    let n_z: usize = branches.iter().map(PitiModel::n_z).sum();

    let mut a = DMatrix::zeros(n_z, n_z);
    let mut c = DMatrix::zeros(n_y, n_z);
    let mut atlas = Atlas::empty();
    let mut state_input = InputMap::empty(n_z, n_u);
    let mut output_input = InputMap::empty(n_y, n_u);
    let mut offset = 0;
    for b in branches {
        let nb = b.n_z();
        a.view_mut((offset, offset), (nb, nb)).copy_from(&b.a);
        c.view_mut((0, offset), (n_y, nb)).copy_from(&b.c);
        atlas = atlas.concat(&b.atlas);
        state_input.accumulate(&b.state_input, offset, offset);
        output_input = output_input.sum_with_offset(&b.output_input, offset);
        offset += nb;
    }
    state_input.normalize();
    output_input.normalize();

    Ok(PitiModel {
        a,
        c,
        state_input,
        output_input,
        atlas,
        n_u,
    })
}

/// Embed a validated chain into its exact lifted model, folding the nodes
/// left to right from the identity model.
pub fn embed_chain(chain: &BlockChain) -> Result<PitiModel> {
    embed_chain_with(chain, &EmbedOptions::default())
}

/// [`embed_chain`] with explicit options.
pub fn embed_chain_with(chain: &BlockChain, opts: &EmbedOptions) -> Result<PitiModel> {
    chain.validate()?;
    let mut counter = 0usize;
    fold_seq(
        &chain.seq,
        PitiModel::identity(chain.n_u),
        &mut counter,
        opts,
    )
}

fn fold_seq(
    seq: &[ChainNode],
    start: PitiModel,
    counter: &mut usize,
    opts: &EmbedOptions,
) -> Result<PitiModel> {
    let mut model = start;
    for node in seq {
        let id = BlockId(*counter);
        *counter += 1;
        model = match node {
            ChainNode::Lti(b) => compose_ld(&model, b, id)?,
            ChainNode::Sn(b) => compose_sn(&model, b)?,
            ChainNode::Parallel(branches) => {
                let copies = split(&model, branches.len())?;
                let mut outs = Vec::with_capacity(branches.len());
                for (copy, branch) in copies.into_iter().zip(branches) {
                    outs.push(fold_seq(branch, copy, counter, opts)?);
                }
                join(&outs)?
            }
        };
        if opts.reduce_each_step {
            model = reduce(&model).0;
        }
    }
    Ok(model)
}
