use nalgebra::{Matrix3, Vector3};
use serde::Serialize;

use crate::error::{QcaError, Result};
use crate::evolution::FieldState;
use crate::linalg::{exp_i_hermitian, max_norm, pauli, sigma_dot, CMat, C64, IM};
use crate::weyl::{helicity, helicity_taylor, WeylVariant};

pub type CVec3 = [C64; 3];

/// Spinor amplitudes of the two Fermionic fields at one wave vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModePair {
    pub psi: [C64; 2],
    pub phi: [C64; 2],
}

/// Two single-excitation fields on the same lattice: ψ evolves by W_k and
/// φ by its complex conjugate W_k*.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoFieldState {
    pub psi: FieldState,
    pub phi: FieldState,
}

impl TwoFieldState {
    pub fn new(psi: FieldState, phi: FieldState) -> Result<Self> {
        if psi.lattice != phi.lattice || psi.internal_dim != 2 || phi.internal_dim != 2 {
            return Err(QcaError::DimensionMismatch("ψ and φ need the same lattice and two components".into()));
        }
        Ok(TwoFieldState { psi, phi })
    }

    /// Fourier amplitudes at wave vector q (Cartesian), ψ̂(q) = Σ_x e^{−iq·x} ψ(x).
    pub fn mode_pair(&self, q: &[f64]) -> ModePair {
        let lat = &self.psi.lattice;
        let mut psi = [C64::new(0.0, 0.0); 2];
        let mut phi = [C64::new(0.0, 0.0); 2];
        for site in 0..lat.sites() {
            let x: Vec<f64> = lat.coords(site).iter().map(|&c| c as f64).collect();
            let r = lat.presentation.embed(&x);
            let ph = C64::from_polar(1.0, -r.iter().zip(q).map(|(a, b)| a * b).sum::<f64>());
            for a in 0..2 {
                psi[a] += ph * self.psi.amplitudes[2 * site + a];
                phi[a] += ph * self.phi.amplitudes[2 * site + a];
            }
        }
        ModePair { psi, phi }
    }
}

/// G^i = φ^T σ^i ψ.
pub fn bilinear_g(psi: &[C64; 2], phi: &[C64; 2]) -> CVec3 {
    let s = pauli();
    [0, 1, 2].map(|i| {
        let m = &s[i];
        let mut acc = C64::new(0.0, 0.0);
        for a in 0..2 {
            for b in 0..2 {
                acc += phi[a] * m[(a, b)] * psi[b];
            }
        }
        acc
    })
}

fn norm3(v: &[f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

fn half(k: &[f64]) -> Vec<f64> {
    k.iter().map(|x| x / 2.0).collect()
}

/// n_{k/2}, failing at k = 0 where the direction is undefined.
pub fn half_helicity(v: &WeylVariant, k: &[f64]) -> Result<[f64; 3]> {
    if k.iter().all(|&x| x == 0.0) {
        return Err(QcaError::ZeroWaveVector);
    }
    let n = helicity(v, &half(k));
    if norm3(&n) == 0.0 {
        return Err(QcaError::ZeroWaveVector);
    }
    Ok(n)
}

/// Removes the component of G along n.
pub fn project_transverse(g: &CVec3, n: &[f64; 3]) -> CVec3 {
    let len = norm3(n);
    let e = n.map(|x| x / len);
    let along: C64 = (0..3).map(|i| g[i] * e[i]).sum();
    [0, 1, 2].map(|i| g[i] - along * e[i])
}

pub fn transverse_project(v: &WeylVariant, g: &CVec3, k: &[f64]) -> Result<CVec3> {
    Ok(project_transverse(g, &half_helicity(v, k)?))
}

/// Active rotation by |w| about w (Rodrigues form).
pub fn rotation(w: &[f64; 3]) -> Matrix3<f64> {
    let theta = norm3(w);
    if theta == 0.0 {
        return Matrix3::identity();
    }
    let a = Vector3::new(w[0], w[1], w[2]) / theta;
    let k = Matrix3::new(0.0, -a.z, a.y, a.z, 0.0, -a.x, -a.y, a.x, 0.0);
    Matrix3::identity() + k * theta.sin() + k * k * (1.0 - theta.cos())
}

fn rotate(r: &Matrix3<f64>, g: &CVec3) -> CVec3 {
    [0, 1, 2].map(|i| (0..3).map(|j| g[j] * r[(i, j)]).sum())
}

fn cross(n: &[f64; 3], g: &CVec3) -> CVec3 {
    [n[1] * g[2] - n[2] * g[1], n[2] * g[0] - n[0] * g[2], n[0] * g[1] - n[1] * g[0]]
}

fn dot_n(n: &[f64; 3], g: &CVec3) -> C64 {
    (0..3).map(|i| g[i] * n[i]).sum()
}

fn vec_dist(a: &CVec3, b: &CVec3) -> f64 {
    (0..3).map(|i| (a[i] - b[i]).norm()).fold(0.0, f64::max)
}

/// The mode pair at continuous time t: ψ ← exp(−i H_I t) ψ and
/// φ ← conj(exp(−i H_I t)) φ, with H_I taken at k/2.
pub fn evolve_pair(v: &WeylVariant, k: &[f64], pair: &ModePair, t: f64) -> ModePair {
    let h = sigma_dot(&helicity(v, &half(k)));
    let u = exp_i_hermitian(&h, t);
    let uc = u.map(|z| z.conj());
    let ap = |m: &CMat, x: &[C64; 2]| [m[(0, 0)] * x[0] + m[(0, 1)] * x[1], m[(1, 0)] * x[0] + m[(1, 1)] * x[1]];
    ModePair { psi: ap(&u, &pair.psi), phi: ap(&uc, &pair.phi) }
}

/// Transverse bilinear field built from the evolved spinors.
pub fn g_transverse_at(v: &WeylVariant, k: &[f64], pair: &ModePair, t: f64) -> Result<CVec3> {
    let n = half_helicity(v, k)?;
    let p = evolve_pair(v, k, pair, t);
    Ok(project_transverse(&bilinear_g(&p.psi, &p.phi), &n))
}

/// Rotation form: G_T(t) = R(2 n_{k/2} t) G_T(0).
pub fn g_transverse_rotated(v: &WeylVariant, k: &[f64], pair: &ModePair, t: f64) -> Result<CVec3> {
    let n = half_helicity(v, k)?;
    let g0 = project_transverse(&bilinear_g(&pair.psi, &pair.phi), &n);
    Ok(rotate(&rotation(&n.map(|x| 2.0 * x * t)), &g0))
}

/// E = |n|(G_T + conj G_T) and B = i|n|(conj G_T − G_T).
pub fn electric_magnetic(gt: &CVec3, n: &[f64; 3]) -> (CVec3, CVec3) {
    let len = norm3(n);
    let e = gt.map(|g| (g + g.conj()) * len);
    let b = gt.map(|g| (g.conj() - g) * IM * len);
    (e, b)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MaxwellReport {
    pub k: Vec<f64>,
    pub time: f64,
    pub dt: f64,
    /// max |n·G_T|
    pub transversality: f64,
    /// max |∂_t G_T − 2n × G_T| with a central difference
    pub g_residual: f64,
    pub div_e: f64,
    pub div_b: f64,
    /// max |∂_t E − 2n × E|
    pub e_residual: f64,
    /// max |∂_t B − 2n × B|
    pub b_residual: f64,
    /// max |G_T(spinors) − R(2nt) G_T(0)|
    pub rotation_form: f64,
}

impl MaxwellReport {
    pub fn max_dynamic(&self) -> f64 {
        self.g_residual.max(self.e_residual).max(self.b_residual)
    }
}

pub fn maxwell_residual(v: &WeylVariant, pair: &ModePair, k: &[f64], t: f64, dt: f64) -> Result<MaxwellReport> {
    let n = half_helicity(v, k)?;
    let n2 = n.map(|x| 2.0 * x);
    let g = |tt: f64| g_transverse_at(v, k, pair, tt);
    let (gm, g0, gp) = (g(t - dt)?, g(t)?, g(t + dt)?);
    let deriv = |a: &CVec3, b: &CVec3| -> CVec3 { [0, 1, 2].map(|i| (b[i] - a[i]) / (2.0 * dt)) };
    let g_residual = vec_dist(&deriv(&gm, &gp), &cross(&n2, &g0));
    let (em, bm) = electric_magnetic(&gm, &n);
    let (e0, b0) = electric_magnetic(&g0, &n);
    let (ep, bp) = electric_magnetic(&gp, &n);
    let e_residual = vec_dist(&deriv(&em, &ep), &cross(&n2, &e0));
    let b_residual = vec_dist(&deriv(&bm, &bp), &cross(&n2, &b0));
    Ok(MaxwellReport {
        k: k.to_vec(),
        time: t,
        dt,
        transversality: dot_n(&n, &g0).norm(),
        g_residual,
        div_e: dot_n(&n2, &e0).norm(),
        div_b: dot_n(&n2, &b0).norm(),
        e_residual,
        b_residual,
        rotation_form: vec_dist(&g0, &g_transverse_rotated(v, k, pair, t)?),
    })
}

/// Exp(−i v·J) with (J_a)_{bc} = i ε_{abc}: the rotation by −v. With this
/// convention exp(−iv·σ/2) σ exp(iv·σ/2) = Exp(−iv·J) σ.
pub fn exp_angular_momentum(v: &[f64; 3]) -> Matrix3<f64> {
    rotation(&v.map(|x| -x))
}

/// Largest entry of exp(−iv·σ/2) σ_a exp(iv·σ/2) − Σ_b Exp(−iv·J)_{ab} σ_b.
pub fn angular_momentum_identity_residual(v: &[f64; 3]) -> f64 {
    let h = sigma_dot(&v.map(|x| x / 2.0));
    let u = exp_i_hermitian(&h, 1.0);
    let s = pauli();
    let r = exp_angular_momentum(v);
    (0..3)
        .map(|a| {
            let lhs = &u * &s[a] * u.adjoint();
            let mut rhs = CMat::zeros(2, 2);
            for b in 0..3 {
                rhs += &s[b] * C64::from(r[(a, b)]);
            }
            max_norm(&(lhs - rhs))
        })
        .fold(0.0, f64::max)
}

/// Relative deviation |2 n_{k/2} − J k| / |J k| between the rotation
/// generator and its first-order form.
pub fn generator_deviation(v: &WeylVariant, k: &[f64]) -> Result<f64> {
    let n = half_helicity(v, k)?;
    let (_, j) = helicity_taylor(v);
    let lin: [f64; 3] = [0, 1, 2].map(|a| (0..k.len()).map(|b| j[a][b] * k[b]).sum());
    let diff = [0, 1, 2].map(|a| 2.0 * n[a] - lin[a]);
    Ok(norm3(&diff) / norm3(&lin))
}

/// Right-handed transverse pair (u1, u2) for the helicity direction n_k.
/// u1 = ẑ × n̂ normalised; when n is within 1e−6 of the z axis ŷ × n̂ is used,
/// which gives u1 = x̂, u2 = ŷ for n = ẑ.
pub fn polarization_basis(v: &WeylVariant, k: &[f64]) -> Result<([f64; 3], [f64; 3])> {
    if k.iter().all(|&x| x == 0.0) {
        return Err(QcaError::ZeroWaveVector);
    }
    polarization_from_direction(&helicity(v, k))
}

pub fn polarization_from_direction(n: &[f64; 3]) -> Result<([f64; 3], [f64; 3])> {
    let len = norm3(n);
    if len == 0.0 {
        return Err(QcaError::ZeroWaveVector);
    }
    let e = Vector3::new(n[0], n[1], n[2]) / len;
    let z = Vector3::z();
    let a = if e.cross(&z).norm() < 1e-6 { Vector3::y() } else { z };
    let u1 = a.cross(&e).normalize();
    let u2 = e.cross(&u1);
    Ok(([u1.x, u1.y, u1.z], [u2.x, u2.y, u2.z]))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn a_plus() -> WeylVariant {
        WeylVariant::from_name("bcc-a-plus", 0.0).unwrap()
    }

    #[test]
    fn bilinear_examples() {
        let up = [c(1.0, 0.0), c(0.0, 0.0)];
        let g = bilinear_g(&up, &up);
        assert_eq!(g, [c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        assert_eq!(bilinear_g(&[c(0.0, 0.0); 2], &up), [c(0.0, 0.0); 3]);
        let x = [c(0.3, -0.1), c(0.7, 0.2)];
        let y = [c(-0.4, 0.5), c(0.1, 0.9)];
        let g1 = bilinear_g(&x, &y);
        let g2 = bilinear_g(&y, &x);
        assert!((g1[0] - g2[0]).norm() < 1e-15 && (g1[2] - g2[2]).norm() < 1e-15);
        assert!((g1[1] + g2[1]).norm() < 1e-15);
    }

    #[test]
    fn projection_cases() {
        let n = [0.3, -0.5, 0.8];
        let par = n.map(|x| c(2.0 * x, -x));
        assert!(project_transverse(&par, &n).iter().all(|z| z.norm() < 1e-15));
        let perp = [c(0.5, 1.0), c(0.3, 0.6), c(0.0, 0.0)];
        let out = project_transverse(&perp, &n);
        assert!(vec_dist(&out, &perp) < 1e-15);
        let g = [c(0.1, 0.4), c(-0.7, 0.2), c(0.5, -0.3)];
        let once = project_transverse(&g, &n);
        assert!(vec_dist(&project_transverse(&once, &n), &once) < 1e-15);
        assert!(dot_n(&n, &once).norm() < 1e-15);
    }

    #[test]
    fn zero_wave_vector_rejected() {
        let g = [c(1.0, 0.0); 3];
        assert!(matches!(transverse_project(&a_plus(), &g, &[0.0; 3]), Err(QcaError::ZeroWaveVector)));
        assert!(matches!(polarization_basis(&a_plus(), &[0.0; 3]), Err(QcaError::ZeroWaveVector)));
    }

    #[test]
    fn rotation_about_x_by_pi() {
        assert!(angular_momentum_identity_residual(&[std::f64::consts::PI, 0.0, 0.0]) < 1e-13);
        assert!(angular_momentum_identity_residual(&[0.0; 3]) == 0.0);
        let r = exp_angular_momentum(&[std::f64::consts::PI, 0.0, 0.0]);
        assert!((r[(1, 1)] + 1.0).abs() < 1e-15 && (r[(2, 2)] + 1.0).abs() < 1e-15);
    }

    #[test]
    fn rotation_form_matches_spinors() {
        let pair = ModePair { psi: [c(0.6, 0.1), c(-0.2, 0.7)], phi: [c(0.3, -0.4), c(0.5, 0.2)] };
        let k = [0.4, -0.9, 1.3];
        for t in [0.0, 0.5, 3.0, 10.0] {
            let a = g_transverse_at(&a_plus(), &k, &pair, t).unwrap();
            let b = g_transverse_rotated(&a_plus(), &k, &pair, t).unwrap();
            assert!(vec_dist(&a, &b) < 1e-12);
        }
    }

    #[test]
    fn polarization_canonical_and_handed() {
        let (u1, u2) = polarization_from_direction(&[0.0, 0.0, 2.0]).unwrap();
        assert_eq!(u1, [1.0, 0.0, 0.0]);
        assert_eq!(u2, [0.0, 1.0, 0.0]);
        let n = [0.2, -0.7, 0.4];
        let (u1, u2) = polarization_from_direction(&n).unwrap();
        let d = |a: &[f64; 3], b: &[f64; 3]| a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
        assert!(d(&u1, &n).abs() < 1e-15 && d(&u2, &n).abs() < 1e-15 && d(&u1, &u2).abs() < 1e-15);
        let x = [u1[1] * u2[2] - u1[2] * u2[1], u1[2] * u2[0] - u1[0] * u2[2], u1[0] * u2[1] - u1[1] * u2[0]];
        assert!(d(&x, &n) > 0.0);
    }

    #[test]
    fn conjugation_identity_generic_axis() {
        for v in [[0.3, -1.2, 2.0], [4.0, 1.0, -2.5], [0.0, 0.0, 0.7]] {
            assert!(angular_momentum_identity_residual(&v) < 1e-12, "{v:?}");
        }
        // the opposite sign convention fails away from half turns
        let v = [0.3, -1.2, 2.0];
        let h = sigma_dot(&v.map(|x| x / 2.0));
        let u = exp_i_hermitian(&h, 1.0);
        let s = pauli();
        let r = rotation(&v);
        let lhs = &u * &s[0] * u.adjoint();
        let mut rhs = CMat::zeros(2, 2);
        for b in 0..3 {
            rhs += &s[b] * C64::from(r[(0, b)]);
        }
        assert!(max_norm(&(lhs - rhs)) > 0.1);
    }

    #[test]
    fn maxwell_residual_is_second_order() {
        let pair = ModePair { psi: [c(0.6, 0.1), c(-0.2, 0.7)], phi: [c(0.3, -0.4), c(0.5, 0.2)] };
        let k = [0.4, -0.9, 1.3];
        let r1 = maxwell_residual(&a_plus(), &pair, &k, 1.5, 1e-2).unwrap();
        let r2 = maxwell_residual(&a_plus(), &pair, &k, 1.5, 5e-3).unwrap();
        let ratio = r1.max_dynamic() / r2.max_dynamic();
        assert!((ratio - 4.0).abs() < 0.05, "{ratio}");
        assert!(r1.transversality < 1e-14 && r1.div_e < 1e-14 && r1.div_b < 1e-14);
        assert!(r1.rotation_form < 1e-12);
    }
}
