//! Monomial bookkeeping for the lifted state.
//!
//! Every coordinate of a lifted state is a monomial over the states of the
//! dynamic blocks (the empty product being the constant 1). The [`Atlas`]
//! records one monomial per coordinate; it is the basis of initial-condition
//! lifting and of duplicate-coordinate reduction.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::{DMatrix, DVector};

use crate::error::Error;
use crate::Result;

/// Identifier of a dynamic block instance within a chain, assigned in
/// pre-order traversal of the chain description. Branch copies made at an
/// input junction keep the original identifiers: the physical state is one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BlockId(pub usize);

impl fmt::Display for BlockId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "b{}", self.0)
    }
}

/// A monomial over base block states, kept as a canonically sorted factor
/// multiset. Two monomials are equal iff their sorted factor lists are equal.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial {
    factors: Vec<(BlockId, usize)>,
}

impl Monomial {
    /// The constant monomial 1 (empty product).
    pub fn one() -> Self {
        Self::default()
    }

    /// The first-degree monomial for state `index` of block `block`.
    pub fn var(block: BlockId, index: usize) -> Self {
        Self {
            factors: vec![(block, index)],
        }
    }

    /// Product of two monomials (multiset union of the factors).
    pub fn product(&self, other: &Self) -> Self {
        let mut factors = Vec::with_capacity(self.factors.len() + other.factors.len());
        factors.extend_from_slice(&self.factors);
        factors.extend_from_slice(&other.factors);
        factors.sort_unstable();
        Self { factors }
    }

    pub fn degree(&self) -> usize {
        self.factors.len()
    }

    pub fn is_one(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn factors(&self) -> &[(BlockId, usize)] {
        &self.factors
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.factors.is_empty() {
            return write!(f, "1");
        }
        for (i, (b, s)) in self.factors.iter().enumerate() {
            if i > 0 {
                write!(f, "*")?;
            }
            write!(f, "{b}.x{s}")?;
        }
        Ok(())
    }
}

/// Per-coordinate description of a lifted state: `coords[j]` is the monomial
/// carried by coordinate `j`; `base_dims` records the state dimension of every
/// block instance appearing in the coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Atlas {
    coords: Vec<Monomial>,
    base_dims: BTreeMap<BlockId, usize>,
}

impl Atlas {
    /// Atlas of the zero-dimensional lifted state (no coordinates at all).
    pub fn empty() -> Self {
        Self {
            coords: Vec::new(),
            base_dims: BTreeMap::new(),
        }
    }

    /// Atlas whose coordinates are the `dim` states of a single block.
    pub fn for_block(id: BlockId, dim: usize) -> Self {
        let coords = (0..dim).map(|i| Monomial::var(id, i)).collect();
        let mut base_dims = BTreeMap::new();
        if dim > 0 {
            base_dims.insert(id, dim);
        }
        Self { coords, base_dims }
    }

    pub fn from_parts(coords: Vec<Monomial>, base_dims: BTreeMap<BlockId, usize>) -> Self {
        Self { coords, base_dims }
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn coords(&self) -> &[Monomial] {
        &self.coords
    }

    pub fn base_dims(&self) -> &BTreeMap<BlockId, usize> {
        &self.base_dims
    }

    /// Concatenation of coordinate lists; shared block instances must agree
    /// on their dimension.
    pub fn concat(&self, other: &Atlas) -> Atlas {
        let mut coords = self.coords.clone();
        coords.extend_from_slice(&other.coords);
        let mut base_dims = self.base_dims.clone();
        for (&id, &dim) in &other.base_dims {
            let prev = base_dims.insert(id, dim);
            debug_assert!(
                prev.is_none() || prev == Some(dim),
                "conflicting dims for {id}"
            );
        }
        Atlas { coords, base_dims }
    }

    /// Atlas of `[1, z, z⁽²⁾, …, z⁽ᵖ⁾]` over this atlas `z`: the constant
    /// coordinate followed by the full Kronecker enumeration of every power,
    /// duplicates included.
    pub fn power(&self, p: usize) -> Atlas {
        assert!(p >= 1, "power atlas requires p >= 1");
        let n = self.coords.len();
        let mut coords = vec![Monomial::one()];
        let mut prev: Vec<Monomial> = vec![Monomial::one()];
        for _ in 1..=p {
            let mut cur = Vec::with_capacity(n * prev.len());
            for c in &self.coords {
                for m in &prev {
                    cur.push(c.product(m));
                }
            }
            coords.extend(cur.iter().cloned());
            prev = cur;
        }
        Atlas {
            coords,
            base_dims: self.base_dims.clone(),
        }
    }

    /// Evaluate the lift map: coordinate `j` is the product of the named base
    /// state entries (empty product = 1).
    pub fn lift(&self, base: &BTreeMap<BlockId, DVector<f64>>) -> Result<DVector<f64>> {
        for (&id, &dim) in &self.base_dims {
            match base.get(&id) {
                None => {
                    return Err(Error::Dimension(format!(
                        "missing base state for block {id}"
                    )))
                }
                Some(v) if v.len() != dim => {
                    return Err(Error::Dimension(format!(
                        "base state for block {id} has length {}, expected {dim}",
                        v.len()
                    )))
                }
                _ => {}
            }
        }
        let mut z = DVector::zeros(self.coords.len());
        for (j, mono) in self.coords.iter().enumerate() {
            let mut val = 1.0;
            for &(id, s) in mono.factors() {
                val *= base[&id][s];
            }
            z[j] = val;
        }
        Ok(z)
    }

    /// Deduplicate coordinates carrying equal monomials. The representative of
    /// each monomial is its first occurrence in atlas order.
    pub fn dedup(&self) -> ReductionMap {
        let mut first: BTreeMap<&Monomial, usize> = BTreeMap::new();
        let mut keep = Vec::new();
        let mut rep = Vec::with_capacity(self.coords.len());
        for mono in &self.coords {
            match first.get(mono) {
                Some(&r) => rep.push(r),
                None => {
                    let r = keep.len();
                    first.insert(mono, r);
                    keep.push(rep.len());
                    rep.push(r);
                }
            }
        }
        let reduced = Atlas {
            coords: keep.iter().map(|&j| self.coords[j].clone()).collect(),
            base_dims: self.base_dims.clone(),
        };
        ReductionMap { keep, rep, reduced }
    }
}

/// Projection removing duplicate lifted coordinates: `T` selects the unique
/// representatives (one 1 per row), `T†` reconstructs every original
/// coordinate from its representative, and `T·T† = I` on the reduced space.
#[derive(Debug, Clone, PartialEq)]
pub struct ReductionMap {
    /// reduced index -> original index of the kept representative
    keep: Vec<usize>,
    /// original index -> reduced index of its representative
    rep: Vec<usize>,
    reduced: Atlas,
}

impl ReductionMap {
    pub fn n_original(&self) -> usize {
        self.rep.len()
    }

    pub fn n_reduced(&self) -> usize {
        self.keep.len()
    }

    pub fn keep(&self) -> &[usize] {
        &self.keep
    }

    pub fn rep(&self) -> &[usize] {
        &self.rep
    }

    pub fn reduced_atlas(&self) -> &Atlas {
        &self.reduced
    }

    pub fn is_identity(&self) -> bool {
        self.keep.len() == self.rep.len()
    }

    /// `T` as a dense 0/1 matrix (`n_reduced × n_original`).
    pub fn t_matrix(&self) -> DMatrix<f64> {
        let mut t = DMatrix::zeros(self.keep.len(), self.rep.len());
        for (r, &j) in self.keep.iter().enumerate() {
            t[(r, j)] = 1.0;
        }
        t
    }

    /// `T†` as a dense 0/1 matrix (`n_original × n_reduced`).
    pub fn t_dagger_matrix(&self) -> DMatrix<f64> {
        let mut td = DMatrix::zeros(self.rep.len(), self.keep.len());
        for (j, &r) in self.rep.iter().enumerate() {
            td[(j, r)] = 1.0;
        }
        td
    }

    /// Apply `T` to a vector: keep representative entries.
    pub fn select_vec(&self, v: &DVector<f64>) -> DVector<f64> {
        DVector::from_fn(self.keep.len(), |r, _| v[self.keep[r]])
    }

    /// Apply `T†` to a vector: expand representatives onto all duplicates.
    pub fn expand_vec(&self, v: &DVector<f64>) -> DVector<f64> {
        DVector::from_fn(self.rep.len(), |j, _| v[self.rep[j]])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dvector;

    fn two_state_atlas() -> Atlas {
        Atlas::for_block(BlockId(0), 2)
    }

    #[test]
    fn power_atlas_enumeration() {
        let a = two_state_atlas().power(2);
        assert_eq!(a.len(), 7);
        // [1, x0, x1, x0x0, x0x1, x1x0, x1x1]; coords 4 and 5 are equal monomials
        assert_eq!(a.coords()[4], a.coords()[5]);
        assert!(a.coords()[0].is_one());

        let b = Atlas::for_block(BlockId(1), 1).power(3);
        assert_eq!(b.len(), 4);
        let distinct = b.dedup();
        assert!(distinct.is_identity());
    }

    #[test]
    fn dedup_first_occurrence_and_projections() {
        let a = two_state_atlas().power(2);
        let red = a.dedup();
        assert_eq!(red.n_original(), 7);
        assert_eq!(red.n_reduced(), 6);
        // the duplicate x1x0 maps back to x0x1
        assert_eq!(red.rep()[5], red.rep()[4]);
        let t = red.t_matrix();
        let td = red.t_dagger_matrix();
        assert_eq!(&t * &td, DMatrix::identity(6, 6));
    }

    #[test]
    fn dedup_is_idempotent() {
        let a = two_state_atlas().power(3);
        let red = a.dedup();
        let again = red.reduced_atlas().dedup();
        assert!(again.is_identity());
        assert_eq!(again.reduced_atlas(), red.reduced_atlas());
    }

    #[test]
    fn lift_products() {
        let a = two_state_atlas().power(2);
        let mut base = BTreeMap::new();
        base.insert(BlockId(0), dvector![2.0, 3.0]);
        let z = a.lift(&base).unwrap();
        assert_eq!(z.as_slice(), &[1.0, 2.0, 3.0, 4.0, 6.0, 6.0, 9.0]);

        // T z and the reduced lift agree; T† restores duplicates
        let red = a.dedup();
        let zr = red.reduced_atlas().lift(&base).unwrap();
        assert_eq!(red.select_vec(&z), zr);
        assert_eq!(red.expand_vec(&zr), z);
    }

    #[test]
    fn lift_missing_block_errors() {
        let a = two_state_atlas();
        let base = BTreeMap::new();
        assert!(matches!(a.lift(&base), Err(Error::Dimension(_))));
    }

    #[test]
    fn constant_only_atlas_lifts_to_one() {
        let a = Atlas::empty().power(1);
        assert_eq!(a.len(), 1);
        let z = a.lift(&BTreeMap::new()).unwrap();
        assert_eq!(z.as_slice(), &[1.0]);
    }
}
