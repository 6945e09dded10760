//! Small dense complex matrix helpers.
//!
//! Every matrix in this crate is at most a few dozen rows wide, so plain
//! `DMatrix<Complex64>` storage is used throughout.

use std::f64::consts::PI;

use nalgebra::DMatrix;
pub use num_complex::Complex64 as C64;

use crate::error::{QcaError, Result};

pub type CMat = DMatrix<C64>;

pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };
pub const IM: C64 = C64 { re: 0.0, im: 1.0 };

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

pub fn zeros(n: usize) -> CMat {
    CMat::zeros(n, n)
}

/// The Pauli matrices σ_x, σ_y, σ_z.
pub fn pauli() -> [CMat; 3] {
    [
        CMat::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]),
        CMat::from_row_slice(2, 2, &[ZERO, -IM, IM, ZERO]),
        CMat::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE]),
    ]
}

/// σ·v for a real 3-vector.
pub fn sigma_dot(v: &[f64; 3]) -> CMat {
    CMat::from_row_slice(
        2,
        2,
        &[C64::new(v[2], 0.0), C64::new(v[0], -v[1]), C64::new(v[0], v[1]), C64::new(-v[2], 0.0)],
    )
}

/// Largest entry modulus.
pub fn max_norm(m: &CMat) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn distance(a: &CMat, b: &CMat) -> f64 {
    max_norm(&(a - b))
}

/// max-norm of A†A − I.
pub fn unitarity_residual(a: &CMat) -> f64 {
    let n = a.nrows();
    max_norm(&(a.adjoint() * a - identity(n)))
}

pub fn hermiticity_residual(h: &CMat) -> f64 {
    max_norm(&(h - h.adjoint()))
}

/// Wraps an angle into (−π, π].
pub fn wrap_phase(x: f64) -> f64 {
    let mut y = x.rem_euclid(2.0 * PI);
    if y > PI {
        y -= 2.0 * PI;
    }
    y
}

/// Eigen-decomposition of a unitary matrix: A = Q diag(e^{iφ}) Q†.
#[derive(Debug, Clone)]
pub struct UnitaryEigen {
    /// Eigenphases in (−π, π], ascending.
    pub phases: Vec<f64>,
    /// Orthonormal eigenvectors as columns, in the order of `phases`.
    pub vectors: CMat,
}

impl UnitaryEigen {
    pub fn reconstruct_power(&self, power: i64) -> CMat {
        let n = self.phases.len();
        let mut d = zeros(n);
        for (j, &phi) in self.phases.iter().enumerate() {
            d[(j, j)] = C64::from_polar(1.0, phi * power as f64);
        }
        &self.vectors * d * self.vectors.adjoint()
    }
}

/// Complex Schur form of a normal matrix is diagonal, so its Schur vectors
/// are eigenvectors.
pub fn unitary_eigen(a: &CMat) -> UnitaryEigen {
    let n = a.nrows();
    let (q, t) = a.clone().schur().unpack();
    let mut order: Vec<(f64, usize)> = (0..n).map(|j| (wrap_phase(t[(j, j)].arg()), j)).collect();
    order.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut vectors = zeros(n);
    for (dst, &(_, src)) in order.iter().enumerate() {
        vectors.set_column(dst, &q.column(src));
    }
    UnitaryEigen { phases: order.iter().map(|p| p.0).collect(), vectors }
}

/// Eigenvalues (ascending) and eigenvectors of a Hermitian matrix.
pub fn hermitian_eigen(h: &CMat) -> (Vec<f64>, CMat) {
    let n = h.nrows();
    let sym = (h + h.adjoint()).scale(0.5);
    let eig = sym.symmetric_eigen();
    let mut order: Vec<(f64, usize)> = eig.eigenvalues.iter().copied().zip(0..n).collect();
    order.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut vectors = zeros(n);
    for (dst, &(_, src)) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (order.iter().map(|p| p.0).collect(), vectors)
}

pub fn hermitian_eigenvalues(h: &CMat) -> Vec<f64> {
    hermitian_eigen(h).0
}

/// exp(−i H t) for Hermitian H.
pub fn exp_i_hermitian(h: &CMat, t: f64) -> CMat {
    let (vals, vecs) = hermitian_eigen(h);
    let n = vals.len();
    let mut d = zeros(n);
    for (j, &e) in vals.iter().enumerate() {
        d[(j, j)] = C64::from_polar(1.0, -e * t);
    }
    &vecs * d * vecs.adjoint()
}

/// Principal Hermitian logarithm: returns H with exp(−iH) = A, eigenvalues
/// of H in [−π, π). Fails when an eigenphase sits within `tol` of ±π.
pub fn log_unitary(a: &CMat, tol: f64) -> Result<CMat> {
    let eig = unitary_eigen(a);
    let n = eig.phases.len();
    let mut d = zeros(n);
    for (j, &phi) in eig.phases.iter().enumerate() {
        if PI - phi.abs() < tol {
            return Err(QcaError::BranchPoint { omega: phi.abs(), tolerance: tol });
        }
        d[(j, j)] = C64::new(-phi, 0.0);
    }
    let h = &eig.vectors * d * eig.vectors.adjoint();
    Ok((&h + h.adjoint()).scale(0.5))
}

/// Kronecker product.
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

/// Assembles a 2×2 block matrix from equally sized square blocks.
pub fn block2(a: &CMat, b: &CMat, c: &CMat, d: &CMat) -> CMat {
    let n = a.nrows();
    let mut m = zeros(2 * n);
    m.view_mut((0, 0), (n, n)).copy_from(a);
    m.view_mut((0, n), (n, n)).copy_from(b);
    m.view_mut((n, 0), (n, n)).copy_from(c);
    m.view_mut((n, n), (n, n)).copy_from(d);
    m
}

/// Least-squares slope of log(y) against log(x).
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (x, y) in lx.iter().zip(&ly) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    sxy / sxx
}

/// ω / sin ω written as a function of u = cos ω, with its derivative in u.
/// Both have removable singularities at u = 1, filled by series.
pub fn omega_over_sin(u: f64) -> (f64, f64) {
    let u = u.clamp(-1.0, 1.0);
    let w = u.acos();
    if w < 1e-4 {
        let w2 = w * w;
        (1.0 + w2 / 6.0 + 7.0 * w2 * w2 / 360.0, -1.0 / 3.0 - 2.0 * w2 / 15.0)
    } else {
        let s = w.sin();
        (w / s, -(s - w * w.cos()) / (s * s * s))
    }
}
