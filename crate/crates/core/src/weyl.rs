//! Closed-form Weyl automata in one, two and three dimensions.
//!
//! Every variant is written as W_k = u_k I − i σ·ñ_k with u² + |ñ|² = 1.
//! The closed forms are evaluated on dual numbers so gradients of u and the
//! Jacobian of ñ come out exactly alongside the values.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};

use serde::Serialize;

use crate::automaton::{extract_transition_matrices, AutomatonDescriptor, IsotropyGroup};
use crate::cayley::{build_presentation, CayleyPresentation, Label, PresentationKind};
use crate::error::{QcaError, Result};
use crate::linalg::{identity, omega_over_sin, pauli, sigma_dot, CMat, C64, IM};

/// Tolerance on |ω − π| below which the logarithm is refused.
pub const BRANCH_TOL: f64 = 1e-6;

/// A value together with its gradient in up to three variables.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub v: f64,
    pub g: [f64; 3],
}

impl Jet {
    pub fn constant(v: f64) -> Self {
        Jet { v, g: [0.0; 3] }
    }

    pub fn variable(v: f64, i: usize) -> Self {
        let mut g = [0.0; 3];
        g[i] = 1.0;
        Jet { v, g }
    }

    pub fn scale(self, a: f64) -> Self {
        Jet { v: a * self.v, g: self.g.map(|x| a * x) }
    }

    pub fn sin(self) -> Self {
        let c = self.v.cos();
        Jet { v: self.v.sin(), g: self.g.map(|x| c * x) }
    }

    pub fn cos(self) -> Self {
        let s = -self.v.sin();
        Jet { v: self.v.cos(), g: self.g.map(|x| s * x) }
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, o: Jet) -> Jet {
        Jet { v: self.v + o.v, g: [self.g[0] + o.g[0], self.g[1] + o.g[1], self.g[2] + o.g[2]] }
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, o: Jet) -> Jet {
        self + (-o)
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        Jet {
            v: self.v * o.v,
            g: [
                self.g[0] * o.v + self.v * o.g[0],
                self.g[1] * o.v + self.v * o.g[1],
                self.g[2] * o.v + self.v * o.g[2],
            ],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Family3 {
    APlus,
    AMinus,
    BPlus,
    BMinus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Family2 {
    A,
    B,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum WeylVariant {
    D1,
    D2 { family: Family2, theta: f64 },
    D3 { family: Family3 },
}

impl WeylVariant {
    pub const NAMES: [&'static str; 7] =
        ["weyl-1d", "weyl-2d", "weyl-2d-b", "bcc-a-plus", "bcc-a-minus", "bcc-b-plus", "bcc-b-minus"];

    pub fn from_name(name: &str, theta: f64) -> Option<Self> {
        Some(match name {
            "weyl-1d" => WeylVariant::D1,
            "weyl-2d" => WeylVariant::D2 { family: Family2::A, theta },
            "weyl-2d-b" => WeylVariant::D2 { family: Family2::B, theta },
            "bcc-a-plus" => WeylVariant::D3 { family: Family3::APlus },
            "bcc-a-minus" => WeylVariant::D3 { family: Family3::AMinus },
            "bcc-b-plus" => WeylVariant::D3 { family: Family3::BPlus },
            "bcc-b-minus" => WeylVariant::D3 { family: Family3::BMinus },
            _ => return None,
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            WeylVariant::D1 => "weyl-1d",
            WeylVariant::D2 { family: Family2::A, .. } => "weyl-2d",
            WeylVariant::D2 { family: Family2::B, .. } => "weyl-2d-b",
            WeylVariant::D3 { family: Family3::APlus } => "bcc-a-plus",
            WeylVariant::D3 { family: Family3::AMinus } => "bcc-a-minus",
            WeylVariant::D3 { family: Family3::BPlus } => "bcc-b-plus",
            WeylVariant::D3 { family: Family3::BMinus } => "bcc-b-minus",
        }
    }

    pub fn dimension(&self) -> usize {
        match self {
            WeylVariant::D1 => 1,
            WeylVariant::D2 { .. } => 2,
            WeylVariant::D3 { .. } => 3,
        }
    }

    pub fn presentation(&self) -> CayleyPresentation {
        build_presentation(match self.dimension() {
            1 => PresentationKind::Line,
            2 => PresentationKind::Square2d,
            _ => PresentationKind::Bcc3d,
        })
    }

    /// The transposed partner (A ↔ B). The one-dimensional automaton is
    /// symmetric and is its own partner.
    pub fn transposed(&self) -> Self {
        match *self {
            WeylVariant::D1 => WeylVariant::D1,
            WeylVariant::D2 { family, theta } => {
                WeylVariant::D2 { family: if family == Family2::A { Family2::B } else { Family2::A }, theta }
            }
            WeylVariant::D3 { family } => WeylVariant::D3 {
                family: match family {
                    Family3::APlus => Family3::BPlus,
                    Family3::AMinus => Family3::BMinus,
                    Family3::BPlus => Family3::APlus,
                    Family3::BMinus => Family3::AMinus,
                },
            },
        }
    }

    /// u_k and ñ_k with their derivatives in the Cartesian components of k.
    pub fn jets(&self, k: &[f64]) -> (Jet, [Jet; 3]) {
        let d = self.dimension();
        assert_eq!(k.len(), d, "wave vector has wrong dimension");
        let r = 1.0 / (d as f64).sqrt();
        let x: Vec<Jet> = (0..d).map(|i| Jet::variable(k[i], i).scale(r)).collect();
        let c: Vec<Jet> = x.iter().map(|j| j.cos()).collect();
        let s: Vec<Jet> = x.iter().map(|j| j.sin()).collect();
        let zero = Jet::constant(0.0);
        match *self {
            WeylVariant::D1 => (c[0], [zero, zero, s[0]]),
            WeylVariant::D2 { family, theta } => {
                let u = c[0] * c[1];
                let n = [s[0] * c[1], c[0] * s[1], s[0] * s[1]];
                let (ct, st) = (theta.cos(), theta.sin());
                let u2 = u.scale(ct) + n[0].scale(st);
                let mut n2 =
                    [n[0].scale(ct) - u.scale(st), n[1].scale(ct) + n[2].scale(st), n[2].scale(ct) - n[1].scale(st)];
                if family == Family2::B {
                    n2[1] = -n2[1];
                }
                (u2, n2)
            }
            WeylVariant::D3 { family } => {
                let sign = match family {
                    Family3::APlus | Family3::BPlus => 1.0,
                    Family3::AMinus | Family3::BMinus => -1.0,
                };
                let (cx, cy, cz) = (c[0], c[1], c[2]);
                let (sx, sy, sz) = (s[0], s[1], s[2]);
                let u = cx * cy * cz + (sx * sy * sz).scale(sign);
                let mut n = [
                    sx * cy * cz - (cx * sy * sz).scale(sign),
                    -(cx * sy * cz).scale(sign) - sx * cy * sz,
                    cx * cy * sz - (sx * sy * cz).scale(sign),
                ];
                if matches!(family, Family3::BPlus | Family3::BMinus) {
                    n[1] = -n[1];
                }
                (u, n)
            }
        }
    }

    pub fn u_n(&self, k: &[f64]) -> (f64, [f64; 3]) {
        let (u, n) = self.jets(k);
        (u.v, n.map(|j| j.v))
    }
}

/// u I − i σ·ñ.
pub fn su2(u: f64, n: &[f64; 3]) -> CMat {
    identity(2) * C64::from(u) - sigma_dot(n) * IM
}

pub fn weyl_matrix(v: &WeylVariant, k: &[f64]) -> CMat {
    let (u, n) = v.u_n(k);
    su2(u, &n)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DispersionSample {
    pub k: Vec<f64>,
    /// Eigenphases (+ω, −ω).
    pub omega: [f64; 2],
    /// ∇ω of the +ω branch.
    pub group_velocity: Vec<f64>,
    pub helicity: [f64; 3],
}

/// ∇ω = −∇u / sin ω. Exactly at a cone apex (sin ω = 0) the gradient is
/// undefined and zero is returned.
pub fn group_velocity(v: &WeylVariant, k: &[f64]) -> Vec<f64> {
    let (u, _) = v.jets(k);
    let w = u.v.clamp(-1.0, 1.0).acos();
    let s = w.sin();
    let d = v.dimension();
    if s == 0.0 {
        return vec![0.0; d];
    }
    (0..d).map(|i| -u.g[i] / s).collect()
}

/// Central finite-difference gradient of ω, for cross-checks.
pub fn finite_difference_velocity(v: &WeylVariant, k: &[f64], h: f64) -> Vec<f64> {
    let omega = |k: &[f64]| v.u_n(k).0.clamp(-1.0, 1.0).acos();
    (0..k.len())
        .map(|i| {
            let mut kp = k.to_vec();
            let mut km = k.to_vec();
            kp[i] += h;
            km[i] -= h;
            (omega(&kp) - omega(&km)) / (2.0 * h)
        })
        .collect()
}

/// n_k = (ω / sin ω) ñ_k.
pub fn helicity(v: &WeylVariant, k: &[f64]) -> [f64; 3] {
    let (u, n) = v.u_n(k);
    let (g, _) = omega_over_sin(u);
    n.map(|x| g * x)
}

pub fn dispersion(v: &WeylVariant, k: &[f64]) -> DispersionSample {
    let (u, _) = v.u_n(k);
    let w = u.clamp(-1.0, 1.0).acos();
    DispersionSample { k: k.to_vec(), omega: [w, -w], group_velocity: group_velocity(v, k), helicity: helicity(v, k) }
}

/// H with exp(−iH) = W_k, namely σ·n_k.
pub fn interpolating_hamiltonian(v: &WeylVariant, k: &[f64]) -> Result<CMat> {
    let (u, _) = v.u_n(k);
    let w = u.clamp(-1.0, 1.0).acos();
    if PI - w < BRANCH_TOL {
        return Err(QcaError::BranchPoint { omega: w, tolerance: BRANCH_TOL });
    }
    Ok(sigma_dot(&helicity(v, k)))
}

/// First-order Taylor data of n_k at k = 0: n(k) ≈ n0 + J k.
pub fn helicity_taylor(v: &WeylVariant) -> ([f64; 3], [[f64; 3]; 3]) {
    let d = v.dimension();
    let (u, n) = v.jets(&vec![0.0; d]);
    let (g, dg) = omega_over_sin(u.v);
    let n0 = n.map(|x| g * x.v);
    let mut j = [[0.0; 3]; 3];
    for (a, row) in j.iter_mut().enumerate() {
        for (b, entry) in row.iter_mut().enumerate().take(d) {
            *entry = dg * n[a].v * u.g[b] + g * n[a].g[b];
        }
    }
    (n0, j)
}

/// The linearised interpolating Hamiltonian σ·(n0 + J k).
pub fn small_k_hamiltonian(v: &WeylVariant, k: &[f64]) -> CMat {
    let (n0, j) = helicity_taylor(v);
    let mut n = n0;
    for (a, row) in j.iter().enumerate() {
        n[a] += row.iter().zip(k).map(|(x, y)| x * y).sum::<f64>();
    }
    sigma_dot(&n)
}

fn isotropy(v: &WeylVariant, p: &CayleyPresentation) -> IsotropyGroup {
    let [sx, sy, sz] = pauli();
    let diag = |d: &[f64]| -> Vec<Vec<f64>> {
        (0..d.len()).map(|r| (0..d.len()).map(|c| if r == c { d[r] } else { 0.0 }).collect()).collect()
    };
    let maps = match v.dimension() {
        1 => vec![(diag(&[1.0]), identity(2))],
        2 => vec![(diag(&[1.0, 1.0]), identity(2)), (diag(&[1.0, -1.0]), sx * IM)],
        _ => vec![
            (diag(&[1.0, 1.0, 1.0]), identity(2)),
            (diag(&[1.0, -1.0, -1.0]), sx * IM),
            (diag(&[-1.0, 1.0, -1.0]), sy * IM),
            (diag(&[-1.0, -1.0, 1.0]), sz * IM),
        ],
    };
    IsotropyGroup::from_orthogonal(p, &maps).expect("binary rotations preserve the generator set")
}

/// Transition-matrix form of the variant, recovered from the closed form,
/// together with its isotropy group.
pub fn descriptor(v: &WeylVariant) -> AutomatonDescriptor {
    let p = v.presentation();
    let mut support: Vec<Label> = p.labels();
    support.push(Label::Identity);
    let rule = extract_transition_matrices(|k| weyl_matrix(v, k), &p, &support, 1e-10)
        .expect("closed forms are degree one in every generator");
    let iso = isotropy(v, &p);
    AutomatonDescriptor::new(p, rule, Some(iso)).expect("consistent by construction")
}

/// Nonzero transition matrices keyed by label name, for display.
pub fn named_matrices(a: &AutomatonDescriptor) -> BTreeMap<String, CMat> {
    a.rule.entries.iter().map(|(&l, m)| (a.presentation.label_name(l), m.clone())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automaton::{check_covariance, check_unitarity_conditions};
    use crate::linalg::{max_norm, unitarity_residual, unitary_eigen};

    fn all_variants() -> Vec<WeylVariant> {
        let mut v: Vec<WeylVariant> =
            WeylVariant::NAMES.iter().map(|n| WeylVariant::from_name(n, 0.0).unwrap()).collect();
        v.push(WeylVariant::D2 { family: Family2::A, theta: 0.7 });
        v.push(WeylVariant::D2 { family: Family2::B, theta: -1.1 });
        v
    }

    fn sample_k(d: usize, i: usize) -> Vec<f64> {
        (0..d).map(|j| ((i * 7 + j * 13) as f64 * 0.37).sin() * 4.0).collect()
    }

    #[test]
    fn jet_derivatives_match_finite_differences() {
        for v in all_variants() {
            let d = v.dimension();
            let k = sample_k(d, 3);
            let (u, n) = v.jets(&k);
            for i in 0..d {
                let h = 1e-6;
                let mut kp = k.clone();
                let mut km = k.clone();
                kp[i] += h;
                km[i] -= h;
                let (up, np) = v.u_n(&kp);
                let (um, nm) = v.u_n(&km);
                assert!(((up - um) / (2.0 * h) - u.g[i]).abs() < 1e-8);
                for a in 0..3 {
                    assert!(((np[a] - nm[a]) / (2.0 * h) - n[a].g[i]).abs() < 1e-8);
                }
            }
        }
    }

    #[test]
    fn unimodular() {
        for v in all_variants() {
            for i in 0..50 {
                let (u, n) = v.u_n(&sample_k(v.dimension(), i));
                assert!((u * u + n.iter().map(|x| x * x).sum::<f64>() - 1.0).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn face_center_example() {
        let v = WeylVariant::from_name("bcc-a-plus", 0.0).unwrap();
        let m = weyl_matrix(&v, &[3f64.sqrt() * PI / 2.0, 0.0, 0.0]);
        assert!(max_norm(&(m + pauli()[0].clone() * IM)) < 1e-15);
    }

    #[test]
    fn identity_at_origin() {
        for v in all_variants() {
            let d = v.dimension();
            let w = weyl_matrix(&v, &vec![0.0; d]);
            let theta = if let WeylVariant::D2 { theta, .. } = v { theta } else { 0.0 };
            if theta == 0.0 {
                assert!(max_norm(&(w - identity(2))) < 1e-15);
            }
        }
    }

    #[test]
    fn transpose_relation() {
        for v in all_variants() {
            for i in 0..20 {
                let k = sample_k(v.dimension(), i);
                let a = weyl_matrix(&v, &k);
                let b = weyl_matrix(&v.transposed(), &k);
                assert!(max_norm(&(a.transpose() - b)) < 1e-14);
            }
        }
    }

    #[test]
    fn one_dimensional_values() {
        let v = WeylVariant::D1;
        let s = dispersion(&v, &[0.4]);
        assert!((s.omega[0] - 0.4).abs() < 1e-15);
        assert!((s.group_velocity[0] - 1.0).abs() < 1e-12);
        let h = interpolating_hamiltonian(&v, &[0.3]).unwrap();
        assert!(max_norm(&(h - pauli()[2].clone() * C64::from(0.3))) < 1e-14);
    }

    #[test]
    fn branch_point_rejected() {
        assert!(matches!(interpolating_hamiltonian(&WeylVariant::D1, &[PI]), Err(QcaError::BranchPoint { .. })));
    }

    #[test]
    fn spectrum_matches_formula() {
        for v in all_variants() {
            for i in 0..20 {
                let k = sample_k(v.dimension(), i);
                let w = v.u_n(&k).0.acos();
                let e = unitary_eigen(&weyl_matrix(&v, &k));
                assert!((e.phases[0] + w).abs() < 1e-10 && (e.phases[1] - w).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn descriptors_are_unitary_and_covariant() {
        for v in all_variants() {
            let a = descriptor(&v);
            assert!(check_unitarity_conditions(&a.rule, &a.presentation).passes(1e-12), "{}", v.name());
            let c = check_covariance(&a).unwrap();
            assert!(c.passes(1e-12), "{} {:?}", v.name(), c);
            let k = sample_k(v.dimension(), 1);
            assert!(max_norm(&(a.k_operator(&k) - weyl_matrix(&v, &k))) < 1e-13);
            assert!(unitarity_residual(&a.k_operator(&k)) < 1e-13);
        }
    }

    #[test]
    fn bcc_has_eight_rank_one_matrices() {
        let a = descriptor(&WeylVariant::from_name("bcc-a-plus", 0.0).unwrap());
        assert_eq!(a.rule.entries.len(), 8);
        for m in a.rule.entries.values() {
            // a 2×2 matrix has rank one iff it is nonzero with vanishing determinant
            assert!(m.determinant().norm() < 1e-14 && max_norm(m) > 0.1);
        }
    }

    #[test]
    fn taylor_map_of_a_plus() {
        let (n0, j) = helicity_taylor(&WeylVariant::from_name("bcc-a-plus", 0.0).unwrap());
        let r = 1.0 / 3f64.sqrt();
        assert!(n0.iter().all(|x| x.abs() < 1e-15));
        let expect = [[r, 0.0, 0.0], [0.0, -r, 0.0], [0.0, 0.0, r]];
        for a in 0..3 {
            for b in 0..3 {
                assert!((j[a][b] - expect[a][b]).abs() < 1e-14);
            }
        }
    }
}
