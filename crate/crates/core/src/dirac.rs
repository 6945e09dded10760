//! Dirac automaton: two Weyl automata coupled by a constant mass term.
//!
//! In the chiral gamma representation
//! γ⁰ = [[0, I], [I, 0]], γʲ = [[0, σʲ], [−σʲ, 0]]
//! the automaton reads D_k = n u I − i n γ⁰γ·ñ + i m γ⁰, i.e. the block
//! matrix [[n W†, i m], [i m, n W]].

use nalgebra::{DMatrix, DVector, Matrix2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::automaton::{extract_transition_matrices, AutomatonDescriptor, IsotropyElement, IsotropyGroup};
use crate::cayley::Label;
use crate::error::{QcaError, Result};
use crate::linalg::{block2, identity, omega_over_sin, pauli, unitary_eigen, zeros, CMat, C64, IM};
use crate::weyl::{self, WeylVariant, BRANCH_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiracDescriptor {
    pub weyl: WeylVariant,
    pub mass: f64,
    pub n: f64,
}

impl DiracDescriptor {
    pub fn new(weyl: WeylVariant, mass: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&mass) {
            return Err(QcaError::InvalidDescriptor(format!("mass {mass} outside [0, 1]")));
        }
        Ok(DiracDescriptor { weyl, mass, n: (1.0 - mass * mass).sqrt() })
    }

    pub fn dimension(&self) -> usize {
        self.weyl.dimension()
    }
}

/// γ⁰ and the spatial γʲ.
pub fn gamma_matrices() -> (CMat, [CMat; 3]) {
    let i2 = identity(2);
    let z = zeros(2);
    let g0 = block2(&z, &i2, &i2, &z);
    let s = pauli();
    let gs = [0, 1, 2].map(|j| block2(&z, &s[j], &(-&s[j]), &z));
    (g0, gs)
}

/// γ⁰ γ·v
fn gamma0_gamma_dot(v: &[f64; 3]) -> CMat {
    let (g0, gs) = gamma_matrices();
    let mut acc = zeros(4);
    for j in 0..3 {
        acc += &gs[j] * C64::from(v[j]);
    }
    g0 * acc
}

pub fn dirac_matrix(dd: &DiracDescriptor, k: &[f64]) -> CMat {
    let w = weyl::weyl_matrix(&dd.weyl, k);
    let im = identity(2) * (IM * dd.mass);
    block2(&(w.adjoint() * C64::from(dd.n)), &im, &im, &(w * C64::from(dd.n)))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiracDispersionSample {
    pub k: Vec<f64>,
    pub omega: f64,
    /// The four eigenphases (−ω, −ω, ω, ω).
    pub phases: [f64; 4],
    /// ∇ω of the positive branch.
    pub group_velocity: Vec<f64>,
}

pub fn dirac_omega(dd: &DiracDescriptor, k: &[f64]) -> f64 {
    (dd.n * dd.weyl.u_n(k).0).clamp(-1.0, 1.0).acos()
}

pub fn dirac_dispersion(dd: &DiracDescriptor, k: &[f64]) -> DiracDispersionSample {
    let (u, _) = dd.weyl.jets(k);
    let w = (dd.n * u.v).clamp(-1.0, 1.0).acos();
    let s = w.sin();
    let group_velocity = (0..dd.dimension()).map(|i| if s == 0.0 { 0.0 } else { -dd.n * u.g[i] / s }).collect();
    DiracDispersionSample { k: k.to_vec(), omega: w, phases: [-w, -w, w, w], group_velocity }
}

/// f (n γ⁰γ·ñ − m γ⁰) with f = ω / sin ω.
pub fn dirac_interpolating_hamiltonian(dd: &DiracDescriptor, k: &[f64]) -> Result<CMat> {
    let (u, n) = dd.weyl.u_n(k);
    let w = (dd.n * u).clamp(-1.0, 1.0).acos();
    if std::f64::consts::PI - w < BRANCH_TOL {
        return Err(QcaError::BranchPoint { omega: w, tolerance: BRANCH_TOL });
    }
    let (f, _) = omega_over_sin(dd.n * u);
    let (g0, _) = gamma_matrices();
    let m = gamma0_gamma_dot(&n) * C64::from(dd.n) - g0 * C64::from(dd.mass);
    Ok(m * C64::from(f))
}

/// First-order expansion of the interpolating Hamiltonian at k = 0.
pub fn dirac_small_k_hamiltonian(dd: &DiracDescriptor, k: &[f64]) -> CMat {
    let d = dd.dimension();
    let (u, n) = dd.weyl.jets(&vec![0.0; d]);
    let (f0, df) = omega_over_sin(dd.n * u.v);
    let (g0, _) = gamma_matrices();
    let n0 = n.map(|x| x.v);
    let m0 = gamma0_gamma_dot(&n0) * C64::from(dd.n) - g0 * C64::from(dd.mass);
    let du: f64 = (0..d).map(|i| u.g[i] * k[i]).sum();
    let jk = n.map(|x| (0..d).map(|i| x.g[i] * k[i]).sum::<f64>());
    &m0 * C64::from(f0) + m0 * C64::from(df * dd.n * du) + gamma0_gamma_dot(&jk) * C64::from(f0 * dd.n)
}

/// Transition-matrix form with the Weyl isotropy lifted as U ⊕ U.
pub fn dirac_descriptor(dd: &DiracDescriptor) -> AutomatonDescriptor {
    let w = weyl::descriptor(&dd.weyl);
    let p = w.presentation.clone();
    let mut support: Vec<Label> = p.labels();
    support.push(Label::Identity);
    let rule = extract_transition_matrices(|k| dirac_matrix(dd, k), &p, &support, 1e-10)
        .expect("closed form is degree one in every generator");
    let iso = w.isotropy.map(|g| IsotropyGroup {
        elements: g
            .elements
            .into_iter()
            .map(|e| {
                let z = zeros(2);
                IsotropyElement { permutation: e.permutation, unitary: block2(&e.unitary, &z, &z, &e.unitary) }
            })
            .collect(),
    });
    AutomatonDescriptor::new(p, rule, iso).expect("consistent by construction")
}

/// Candidate coupling [[p W†, q X], [r Y, t W]] with constant X, Y.
#[derive(Debug, Clone, PartialEq)]
pub struct Coupling {
    pub p: C64,
    pub q: C64,
    pub r: C64,
    pub t: C64,
    pub x: CMat,
    pub y: CMat,
}

impl Coupling {
    /// The member of the Dirac family with mass m.
    pub fn family(mass: f64) -> Self {
        let n = C64::from((1.0 - mass * mass).sqrt());
        let im = IM * mass;
        Coupling { p: n, q: im, r: im, t: n, x: identity(2), y: identity(2) }
    }

    pub fn matrix(&self, w: &CMat) -> CMat {
        block2(&(w.adjoint() * self.p), &(&self.x * self.q), &(&self.y * self.r), &(w * self.t))
    }

    fn from_params(v: &[f64]) -> Self {
        let c = |i: usize| C64::new(v[i], v[i + 1]);
        let m = |o: usize| CMat::from_fn(2, 2, |r, col| c(o + 2 * (2 * r + col)));
        Coupling { p: c(0), q: c(2), r: c(4), t: c(6), x: m(8), y: m(16) }
    }
}

/// max over the sampled k of ‖D_k† D_k − I‖.
pub fn coupling_unitarity_residual(c: &Coupling, weyl: &WeylVariant, ks: &[Vec<f64>]) -> f64 {
    ks.iter().map(|k| crate::linalg::unitarity_residual(&c.matrix(&weyl::weyl_matrix(weyl, k)))).fold(0.0, f64::max)
}

type M2 = Matrix2<C64>;

fn to_m2(m: &CMat) -> M2 {
    M2::new(m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)])
}

/// Residual vector of D†D − I split into real parts. The diagonal blocks do
/// not depend on k; the off-diagonal block is p̄ q W X + r̄ t Y† W.
fn residual_vector(v: &[f64], ws: &[M2]) -> Vec<f64> {
    let c = |i: usize| C64::new(v[i], v[i + 1]);
    let m = |o: usize| M2::from_fn(|r, col| c(o + 2 * (2 * r + col)));
    let (p, q, r, t) = (c(0), c(2), c(4), c(6));
    let (x, y) = (m(8), m(16));
    let one = M2::identity();
    let tl = one * C64::from(p.norm_sqr()) + y.adjoint() * y * C64::from(r.norm_sqr()) - one;
    let br = x.adjoint() * x * C64::from(q.norm_sqr()) + one * C64::from(t.norm_sqr()) - one;
    let mut out = Vec::with_capacity(16 + 8 * ws.len());
    for z in tl.iter().chain(br.iter()) {
        out.push(z.re);
        out.push(z.im);
    }
    for w in ws {
        let tr = w * x * (p.conj() * q) + y.adjoint() * w * (r.conj() * t);
        for z in tr.iter() {
            out.push(z.re);
            out.push(z.im);
        }
    }
    out
}

fn levenberg_marquardt(x0: Vec<f64>, ws: &[M2], max_iter: usize) -> (Vec<f64>, f64) {
    let cost = |v: &[f64]| residual_vector(v, ws).iter().map(|r| r * r).sum::<f64>();
    let n = x0.len();
    let mut x = x0;
    let mut fx = cost(&x);
    let mut lambda = 1e-3;
    for _ in 0..max_iter {
        if fx < 1e-28 {
            break;
        }
        let r0 = residual_vector(&x, ws);
        let mut jac = DMatrix::<f64>::zeros(r0.len(), n);
        for j in 0..n {
            let h = 1e-7 * (1.0 + x[j].abs());
            let mut xp = x.clone();
            xp[j] += h;
            let rp = residual_vector(&xp, ws);
            for (i, (a, b)) in rp.iter().zip(&r0).enumerate() {
                jac[(i, j)] = (a - b) / h;
            }
        }
        let jt = jac.transpose();
        let jtj = &jt * &jac;
        let g = &jt * DVector::from_vec(r0);
        let mut improved = false;
        for _ in 0..20 {
            let mut a = jtj.clone();
            for i in 0..n {
                a[(i, i)] += lambda * (1.0 + jtj[(i, i)]);
            }
            let Some(step) = a.lu().solve(&(-&g)) else {
                lambda *= 10.0;
                continue;
            };
            let xn: Vec<f64> = x.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
            let fnew = cost(&xn);
            if fnew < fx {
                x = xn;
                fx = fnew;
                lambda = (lambda / 3.0).max(1e-12);
                improved = true;
                break;
            }
            lambda *= 4.0;
        }
        if !improved {
            break;
        }
    }
    (x, fx)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolutionClass {
    /// Spectrum γ ± arccos(n u_k), doubly degenerate, for a global phase γ.
    InFamily,
    /// Family member up to a relative phase between the two Weyl blocks,
    /// i.e. W replaced by e^{iδ} W, after a conjugation fixing the blocks.
    RelativePhase,
    /// p = t = 0: a constant unitary without any Weyl content (the excluded
    /// n = 0 edge of the family).
    KIndependent,
    /// Anything else that is unitary.
    Other,
    /// The search did not reach a unitary matrix.
    NotConverged,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchOutcome {
    pub seed: u64,
    pub residual: f64,
    pub class: SolutionClass,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchReport {
    pub variant: String,
    pub k_samples: usize,
    pub outcomes: Vec<SearchOutcome>,
    pub in_family: usize,
    pub relative_phase: usize,
    pub k_independent: usize,
    pub other: usize,
    pub not_converged: usize,
    /// Smallest unitarity residual among converged solutions not in the family.
    pub best_off_family_residual: Option<f64>,
    /// Smallest unitarity residual among solutions classed as `Other`.
    pub best_other_residual: Option<f64>,
}

pub const SEARCH_CONVERGED: f64 = 1e-9;

/// Whether m commutes with every sampled W_k, i.e. lies in their commutant.
fn in_commutant(m: &CMat, ws: &[CMat], tol: f64) -> bool {
    let scale = 1.0 + crate::linalg::max_norm(m);
    ws.iter().all(|w| crate::linalg::max_norm(&(m * w - w * m)) < tol * scale)
}

/// Classifies a unitary candidate by comparing its spectrum with the family.
pub fn classify(c: &Coupling, weyl: &WeylVariant, ks: &[Vec<f64>]) -> SolutionClass {
    if has_family_spectrum(c, weyl, ks) {
        return SolutionClass::InFamily;
    }
    if c.p.norm() < 1e-6 && c.t.norm() < 1e-6 {
        return SolutionClass::KIndependent;
    }
    // Off-diagonal blocks in the commutant of all W_k can be rotated to
    // scalars by a conjugation that fixes the diagonal blocks.
    let ws: Vec<CMat> = ks.iter().map(|k| weyl::weyl_matrix(weyl, k)).collect();
    let coupled = c.q.norm() * crate::linalg::max_norm(&c.x) > 1e-6;
    if coupled && !(in_commutant(&c.x, &ws, 1e-6) && in_commutant(&c.y, &ws, 1e-6)) {
        return SolutionClass::Other;
    }
    // p → p e^{−iδ}, t → t e^{iδ} keeps unitarity; equal phases must then
    // land in the family.
    let mu = 0.5 * (c.p.arg() + c.t.arg());
    let mut aligned = c.clone();
    aligned.p = C64::from_polar(c.p.norm(), mu);
    aligned.t = C64::from_polar(c.t.norm(), mu);
    if has_family_spectrum(&aligned, weyl, ks) {
        SolutionClass::RelativePhase
    } else {
        SolutionClass::Other
    }
}

/// Whether the spectrum at every sample is γ ± arccos(n u_k), each twice,
/// for one global phase γ and one n ∈ [0, 1].
fn has_family_spectrum(c: &Coupling, weyl: &WeylVariant, ks: &[Vec<f64>]) -> bool {
    let mats: Vec<(f64, CMat)> = ks
        .iter()
        .map(|k| {
            let w = weyl::weyl_matrix(weyl, k);
            (weyl.u_n(k).0, c.matrix(&w))
        })
        .collect();
    // det D = e^{4iγ} for a family member times a global phase
    let base = mats[0].1.determinant().arg() / 4.0;
    let (umax, dmax) = mats.iter().max_by(|a, b| a.0.abs().total_cmp(&b.0.abs())).expect("samples");
    (0..4).any(|j| {
        let gamma = base + j as f64 * std::f64::consts::FRAC_PI_2;
        let phase = C64::from_polar(1.0, -gamma);
        let n = ((dmax * phase).trace().re / 4.0) / umax;
        if !(-1e-9..=1.0 + 1e-9).contains(&n) {
            return false;
        }
        mats.iter().all(|(u, d)| {
            let w = (n * u).clamp(-1.0, 1.0).acos();
            let ph = unitary_eigen(&(d * phase)).phases;
            ph.iter().zip([-w, -w, w, w]).all(|(a, b)| (a - b).abs() < 1e-6)
        })
    })
}

/// Randomised Levenberg–Marquardt search over the 24 real parameters of
/// [`Coupling`] for unitary solutions, one restart per seed.
pub fn dirac_search(weyl: &WeylVariant, restarts: usize, seed: u64, k_samples: usize) -> SearchReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = weyl.dimension();
    let ks: Vec<Vec<f64>> = (0..k_samples)
        .map(|_| (0..d).map(|_| rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI)).collect())
        .collect();
    let ws: Vec<M2> = ks.iter().map(|k| to_m2(&weyl::weyl_matrix(weyl, k))).collect();
    let mut outcomes = Vec::with_capacity(restarts);
    for r in 0..restarts {
        let s = seed.wrapping_add(r as u64);
        let mut local = ChaCha8Rng::seed_from_u64(s);
        let x0: Vec<f64> = (0..24).map(|_| local.gen_range(-1.0..1.0)).collect();
        let (x, _) = levenberg_marquardt(x0, &ws, 300);
        let c = Coupling::from_params(&x);
        let residual = coupling_unitarity_residual(&c, weyl, &ks);
        let class = if residual > SEARCH_CONVERGED { SolutionClass::NotConverged } else { classify(&c, weyl, &ks) };
        outcomes.push(SearchOutcome { seed: s, residual, class });
    }
    let count = |c: SolutionClass| outcomes.iter().filter(|o| o.class == c).count();
    let best = |f: &dyn Fn(SolutionClass) -> bool| {
        outcomes.iter().filter(|o| f(o.class)).map(|o| o.residual).min_by(f64::total_cmp)
    };
    SearchReport {
        variant: weyl.name().to_string(),
        k_samples,
        in_family: count(SolutionClass::InFamily),
        relative_phase: count(SolutionClass::RelativePhase),
        k_independent: count(SolutionClass::KIndependent),
        other: count(SolutionClass::Other),
        not_converged: count(SolutionClass::NotConverged),
        best_off_family_residual: best(&|c| !matches!(c, SolutionClass::InFamily | SolutionClass::NotConverged)),
        best_other_residual: best(&|c| c == SolutionClass::Other),
        outcomes,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automaton::{check_covariance, check_unitarity_conditions};
    use crate::linalg::{exp_i_hermitian, hermitian_eigenvalues, max_norm, unitarity_residual, ONE};

    fn a_plus() -> WeylVariant {
        WeylVariant::from_name("bcc-a-plus", 0.0).unwrap()
    }

    #[test]
    fn gamma_anticommutation() {
        let (g0, gs) = gamma_matrices();
        let all = [g0, gs[0].clone(), gs[1].clone(), gs[2].clone()];
        let eta = [1.0, -1.0, -1.0, -1.0];
        for a in 0..4 {
            for b in 0..4 {
                let ac = &all[a] * &all[b] + &all[b] * &all[a];
                let expect = if a == b { identity(4) * C64::from(2.0 * eta[a]) } else { zeros(4) };
                assert!(max_norm(&(ac - expect)) < 1e-15);
            }
        }
    }

    #[test]
    fn gamma_form_matches_blocks() {
        let dd = DiracDescriptor::new(a_plus(), 0.37).unwrap();
        let k = [0.3, -1.2, 0.8];
        let (u, n) = dd.weyl.u_n(&k);
        let (g0, _) = gamma_matrices();
        let expect = identity(4) * C64::from(dd.n * u) - gamma0_gamma_dot(&n) * (IM * dd.n) + g0 * (IM * dd.mass);
        assert!(max_norm(&(dirac_matrix(&dd, &k) - expect)) < 1e-15);
    }

    #[test]
    fn massless_and_maximal_mass_limits() {
        let k = [0.4, 0.1, -0.9];
        let dd = DiracDescriptor::new(a_plus(), 0.0).unwrap();
        let w = weyl::weyl_matrix(&a_plus(), &k);
        let z = zeros(2);
        assert_eq!(max_norm(&(dirac_matrix(&dd, &k) - block2(&w.adjoint(), &z, &z, &w))), 0.0);
        let dd = DiracDescriptor::new(a_plus(), 1.0).unwrap();
        let ph = unitary_eigen(&dirac_matrix(&dd, &k)).phases;
        let h = std::f64::consts::FRAC_PI_2;
        assert!(ph.iter().zip([-h, -h, h, h]).all(|(a, b)| (a - b).abs() < 1e-12));
    }

    #[test]
    fn hamiltonian_exponentiates_back() {
        for (m, k) in [(0.3, [0.0, 0.0, 0.0]), (0.6, [0.5, -0.2, 1.3]), (0.05, [2.0, 0.3, -0.4])] {
            let dd = DiracDescriptor::new(a_plus(), m).unwrap();
            let h = dirac_interpolating_hamiltonian(&dd, &k).unwrap();
            assert!(max_norm(&(exp_i_hermitian(&h, 1.0) - dirac_matrix(&dd, &k))) < 1e-12);
        }
    }

    #[test]
    fn small_k_spectrum_at_origin() {
        let dd = DiracDescriptor::new(a_plus(), 0.3).unwrap();
        let h = dirac_small_k_hamiltonian(&dd, &[0.0; 3]);
        let w0 = dd.n.acos();
        let f0 = w0 / w0.sin();
        let ev = hermitian_eigenvalues(&h);
        assert!((ev[3] - 0.3 * f0).abs() < 1e-12 && (ev[0] + 0.3 * f0).abs() < 1e-12);
    }

    #[test]
    fn small_k_derivative_matches_finite_difference() {
        let dd = DiracDescriptor::new(a_plus(), 0.2).unwrap();
        let k = [1e-5, -2e-5, 0.5e-5];
        let h = dirac_interpolating_hamiltonian(&dd, &k).unwrap();
        let l = dirac_small_k_hamiltonian(&dd, &k);
        assert!(max_norm(&(h - l)) < 1e-9);
    }

    #[test]
    fn family_coupling_is_unitary() {
        let ks: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64 * 0.3, -0.2 * i as f64, 1.0]).collect();
        assert!(coupling_unitarity_residual(&Coupling::family(0.4), &a_plus(), &ks) < 1e-12);
        assert!(coupling_unitarity_residual(&Coupling::family(0.0), &a_plus(), &ks) < 1e-15);
        let mut bad = Coupling::family(0.4);
        bad.p = ONE;
        bad.q = C64::new(0.7, 0.2);
        bad.r = bad.q;
        bad.t = bad.q;
        assert!(coupling_unitarity_residual(&bad, &a_plus(), &ks) > 0.1);
    }

    #[test]
    fn family_is_classified_in_family() {
        let ks: Vec<Vec<f64>> = (0..12).map(|i| vec![i as f64 * 0.31, -0.27 * i as f64, 0.9]).collect();
        let mut c = Coupling::family(0.3);
        let g = C64::from_polar(1.0, 0.4);
        c.p *= g;
        c.q *= g;
        c.r *= g;
        c.t *= g;
        assert_eq!(classify(&c, &a_plus(), &ks), SolutionClass::InFamily);
        let mut rel = Coupling::family(0.3);
        rel.p *= C64::from_polar(1.0, 0.5);
        rel.t *= C64::from_polar(1.0, -0.5);
        assert!(coupling_unitarity_residual(&rel, &a_plus(), &ks) < 1e-12);
        assert_eq!(classify(&rel, &a_plus(), &ks), SolutionClass::RelativePhase);
    }

    #[test]
    fn descriptor_round_trip() {
        let dd = DiracDescriptor::new(a_plus(), 0.25).unwrap();
        let a = dirac_descriptor(&dd);
        assert!(check_unitarity_conditions(&a.rule, &a.presentation).passes(1e-12));
        assert!(check_covariance(&a).unwrap().passes(1e-12));
        let k = [0.7, 0.1, -0.3];
        assert!(max_norm(&(a.k_operator(&k) - dirac_matrix(&dd, &k))) < 1e-13);
        assert!(unitarity_residual(&a.k_operator(&k)) < 1e-13);
    }

    #[test]
    fn search_finds_no_counterexample() {
        let r = dirac_search(&a_plus(), 12, 3, 20);
        assert_eq!(r.other, 0);
        assert_eq!(r.not_converged, 0);
        assert_eq!(r.outcomes.len(), 12);
    }

    #[test]
    fn rejects_bad_mass() {
        assert!(DiracDescriptor::new(a_plus(), 1.5).is_err());
    }
}
