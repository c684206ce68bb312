//! Scalar polynomials in the powered lifted state and the input, used to
//! expand the output cross terms when a static nonlinearity is absorbed.
//!
//! A term is keyed by `(g, zpos, d, upos)` and stands for the product of
//! coordinate `zpos` of `z⁽ᵍ⁾` with coordinate `upos` of `u⁽ᵈ⁾`. Products of
//! two terms concatenate the Kronecker indices, so multiplication is pure
//! index arithmetic: `zpos ← zpos₁·nᵍ² + zpos₂` and likewise for `upos`.

use std::collections::HashMap;

use crate::embed::InputMap;

#[derive(Debug, Clone)]
pub(crate) struct ScalarZu {
    nz: usize,
    nu: usize,
    terms: HashMap<(usize, usize, usize, usize), f64>,
}

impl ScalarZu {
    pub fn zero(nz: usize, nu: usize) -> Self {
        Self {
            nz,
            nu,
            terms: HashMap::new(),
        }
    }

    pub fn one(nz: usize, nu: usize) -> Self {
        let mut s = Self::zero(nz, nu);
        s.add((0, 0, 0, 0), 1.0);
        s
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&mut self, key: (usize, usize, usize, usize), coef: f64) {
        if coef == 0.0 {
            return;
        }
        let entry = self.terms.entry(key).or_insert(0.0);
        *entry += coef;
        if *entry == 0.0 {
            self.terms.remove(&key);
        }
    }

    /// The scalar `row · map(z, u)` for a constant row vector over the map's
    /// output (the per-channel input dependence of a previous output map).
    pub fn from_row_of_map(row: &[f64], map: &InputMap, nz: usize) -> Self {
        let mut s = Self::zero(nz, map.n_u());
        for term in map.terms() {
            let d = term.degree;
            for col in 0..term.constant.ncols() {
                let mut acc = 0.0;
                for (r, &w) in row.iter().enumerate() {
                    acc += w * term.constant[(r, col)];
                }
                s.add((0, 0, d, col), acc);
            }
            for (&j, lm) in &term.linear {
                for col in 0..lm.ncols() {
                    let mut acc = 0.0;
                    for (r, &w) in row.iter().enumerate() {
                        acc += w * lm[(r, col)];
                    }
                    s.add((1, j, d, col), acc);
                }
            }
        }
        s
    }

    /// The linear form `Σ_j row[j]·z_j` (no input dependence).
    pub fn from_state_row(row: &[f64], nz: usize, nu: usize) -> Self {
        let mut s = Self::zero(nz, nu);
        for (j, &w) in row.iter().enumerate() {
            s.add((1, j, 0, 0), w);
        }
        s
    }

    pub fn mul(&self, other: &Self) -> Self {
        debug_assert_eq!(self.nz, other.nz);
        debug_assert_eq!(self.nu, other.nu);
        let mut out = Self::zero(self.nz, self.nu);
        out.terms.reserve(self.terms.len() * other.terms.len());
        for (&(g1, zp1, d1, up1), &c1) in &self.terms {
            for (&(g2, zp2, d2, up2), &c2) in &other.terms {
                let key = (
                    g1 + g2,
                    zp1 * self.nz.pow(g2 as u32) + zp2,
                    d1 + d2,
                    up1 * self.nu.pow(d2 as u32) + up2,
                );
                out.add(key, c1 * c2);
            }
        }
        out
    }

    pub fn add_scaled(&mut self, other: &Self, scale: f64) {
        for (&key, &c) in &other.terms {
            self.add(key, c * scale);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = ((usize, usize, usize, usize), f64)> + '_ {
        self.terms.iter().map(|(&k, &v)| (k, v))
    }
}
