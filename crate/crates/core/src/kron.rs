//! Kronecker-power calculus.
//!
//! Throughout the crate the `d`-th Kronecker power of a vector is built
//! left-to-right, `x⁽ᵈ⁾ = x ⊗ x⁽ᵈ⁻¹⁾` with `x⁽⁰⁾ = 1`, so the coordinate of
//! `x⁽ᵈ⁾` at index `(i₁,…,i_d)` sits at position `i₁·nᵈ⁻¹ + … + i_d`
//! (leftmost factor slowest). Every module uses this one convention.

use nalgebra::{DMatrix, DVector};

/// `v ⊗ v ⊗ … ⊗ v` (`d` factors). `d = 0` yields the 1-vector `[1]`.
pub fn kron_power_vec(v: &DVector<f64>, d: usize) -> DVector<f64> {
    let mut out = DVector::from_element(1, 1.0);
    for _ in 0..d {
        out = DVector::from(v.kronecker(&out));
    }
    out
}

/// `M ⊗ M ⊗ … ⊗ M` (`d` factors). `d = 0` yields the 1×1 identity.
pub fn kron_power_mat(m: &DMatrix<f64>, d: usize) -> DMatrix<f64> {
    let mut out = DMatrix::identity(1, 1);
    for _ in 0..d {
        out = m.kronecker(&out);
    }
    out
}

/// Jacobian of the `i`-th Kronecker power at `x`:
/// `∂x⁽ⁱ⁾/∂x = Σ_{k=0}^{i−1} x⁽ᵏ⁾ ⊗ Iₙ ⊗ x⁽ⁱ⁻ᵏ⁻¹⁾`, an `nⁱ × n` matrix.
pub fn kron_jacobian(x: &DVector<f64>, i: usize) -> DMatrix<f64> {
    assert!(i >= 1, "kron_jacobian requires i >= 1");
    let n = x.len();
    let eye = DMatrix::<f64>::identity(n, n);
    let mut sum = DMatrix::zeros(n.pow(i as u32), n);
    for k in 0..i {
        let left = kron_power_vec(x, k);
        let right = kron_power_vec(x, i - k - 1);
        sum += left.kronecker(&eye).kronecker(&right);
    }
    sum
}

/// Lifted state operator `ᵗA = Σ_{k=0}^{τ−1} Iₙ⁽ᵏ⁾ ⊗ A ⊗ Iₙ⁽ᵗ⁻ᵏ⁻¹⁾`
/// satisfying `∂x⁽ᵗ⁾/∂x · A x = ᵗA x⁽ᵗ⁾`. `τ = 1` returns `A` itself.
pub fn lifted_a(a: &DMatrix<f64>, tau: usize) -> DMatrix<f64> {
    assert!(tau >= 1, "lifted_a requires tau >= 1");
    assert_eq!(a.nrows(), a.ncols(), "lifted_a requires a square matrix");
    let n = a.nrows();
    let dim = n.pow(tau as u32);
    let mut sum = DMatrix::zeros(dim, dim);
    for k in 0..tau {
        let left = DMatrix::<f64>::identity(n.pow(k as u32), n.pow(k as u32));
        let rdim = n.pow((tau - k - 1) as u32);
        let right = DMatrix::<f64>::identity(rdim, rdim);
        sum += left.kronecker(a).kronecker(&right);
    }
    sum
}

/// Lifted input column `ᵗb = Σ_{k=0}^{τ−1} Iₙ⁽ᵏ⁾ ⊗ b ⊗ Iₙ⁽ᵗ⁻ᵏ⁻¹⁾`
/// satisfying `∂x⁽ᵗ⁾/∂x · b = ᵗb x⁽ᵗ⁻¹⁾`, an `nᵗ × nᵗ⁻¹` matrix.
pub fn lifted_b(b: &DVector<f64>, tau: usize) -> DMatrix<f64> {
    assert!(tau >= 1, "lifted_b requires tau >= 1");
    let n = b.len();
    let dim = n.pow(tau as u32);
    let codim = n.pow((tau - 1) as u32);
    let mut sum = DMatrix::zeros(dim, codim);
    for k in 0..tau {
        let left = DMatrix::<f64>::identity(n.pow(k as u32), n.pow(k as u32));
        let rdim = n.pow((tau - k - 1) as u32);
        let right = DMatrix::<f64>::identity(rdim, rdim);
        sum += left.kronecker(b).kronecker(&right);
    }
    sum
}
