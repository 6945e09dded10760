use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{QcaError, Result};
use crate::linalg::{pauli, C64};

/// Occupation vectors are bit masks, so this is the largest mode count.
pub const MAX_MODES: usize = 128;

/// Sparse Fock vector keyed by occupation mask.
pub type FockState = BTreeMap<u128, C64>;

pub fn vacuum() -> FockState {
    BTreeMap::from([(0u128, C64::new(1.0, 0.0))])
}

pub fn basis_state(modes: &[usize]) -> FockState {
    let mask = modes.iter().fold(0u128, |m, &j| m | (1u128 << j));
    BTreeMap::from([(mask, C64::new(1.0, 0.0))])
}

/// Parity of the occupied modes below j.
fn sign(mask: u128, j: usize) -> f64 {
    let below = if j == 0 { 0 } else { mask & ((1u128 << j) - 1) };
    if below.count_ones() % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

pub fn annihilate(state: &FockState, j: usize) -> FockState {
    let mut out = FockState::new();
    for (&m, &z) in state {
        if m >> j & 1 == 1 {
            *out.entry(m & !(1u128 << j)).or_default() += z * sign(m, j);
        }
    }
    out
}

pub fn create(state: &FockState, j: usize) -> FockState {
    let mut out = FockState::new();
    for (&m, &z) in state {
        if m >> j & 1 == 0 {
            *out.entry(m | (1u128 << j)).or_default() += z * sign(m, j);
        }
    }
    out
}

pub fn add_scaled(acc: &mut FockState, x: &FockState, c: C64) {
    for (&m, &z) in x {
        *acc.entry(m).or_default() += c * z;
    }
}

pub fn norm(state: &FockState) -> f64 {
    state.values().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Largest ‖({a_i, a_j†} − δ_ij)|s⟩‖ over all mode pairs.
pub fn anticommutator_residual(n_modes: usize, state: &FockState) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..n_modes {
        for j in 0..n_modes {
            let mut r = annihilate(&create(state, j), i);
            add_scaled(&mut r, &create(&annihilate(state, i), j), C64::new(1.0, 0.0));
            if i == j {
                add_scaled(&mut r, state, C64::new(-1.0, 0.0));
            }
            worst = worst.max(norm(&r));
        }
    }
    worst
}

/// Two Fermionic fields on a region of `cells` wave-vector cells, each with
/// two spin components. Mode ψ(q, b) is 2q + b and φ(q, a) is 2N + 2q + a.
#[derive(Debug, Clone)]
pub struct FockOracle {
    pub cells: usize,
    pub profile: Vec<C64>,
    pub polarization: [[f64; 3]; 2],
}

impl FockOracle {
    pub fn new(profile: Vec<C64>, polarization: [[f64; 3]; 2]) -> Result<Self> {
        let cells = profile.len();
        if 4 * cells > MAX_MODES || cells == 0 {
            return Err(QcaError::TooManyModes { modes: 4 * cells, limit: MAX_MODES });
        }
        let w: f64 = profile.iter().map(|z| z.norm_sqr()).sum();
        if (w - 1.0).abs() > 1e-12 {
            return Err(QcaError::InvalidDescriptor(format!("profile weight {w} is not 1")));
        }
        Ok(FockOracle { cells, profile, polarization })
    }

    /// Flat profile |f(q)|² = 1/N.
    pub fn flat(cells: usize, polarization: [[f64; 3]; 2]) -> Result<Self> {
        Self::new(vec![C64::new(1.0 / (cells as f64).sqrt(), 0.0); cells], polarization)
    }

    pub fn n_modes(&self) -> usize {
        4 * self.cells
    }

    pub fn psi_mode(&self, q: usize, b: usize) -> usize {
        2 * q + b
    }

    pub fn phi_mode(&self, q: usize, a: usize) -> usize {
        2 * self.cells + 2 * q + a
    }

    /// Σ^i = (u^i·σ)/√2, normalised so that tr(Σ^i† Σ^j) = δ_ij.
    fn sigma(&self, i: usize) -> [[C64; 2]; 2] {
        let s = pauli();
        let u = self.polarization[i];
        let mut m = [[C64::new(0.0, 0.0); 2]; 2];
        for (a, row) in m.iter_mut().enumerate() {
            for (b, e) in row.iter_mut().enumerate() {
                *e = (0..3).map(|c| s[c][(a, b)] * u[c]).sum::<C64>() / 2f64.sqrt();
            }
        }
        m
    }

    /// γ^i|s⟩ with γ^i = Σ_q f(q) Σ_ab Σ^i_ab φ(q,a) ψ(q,b).
    pub fn gamma(&self, i: usize, state: &FockState) -> FockState {
        let sig = self.sigma(i);
        let mut out = FockState::new();
        for q in 0..self.cells {
            for b in 0..2 {
                let after_psi = annihilate(state, self.psi_mode(q, b));
                if after_psi.is_empty() {
                    continue;
                }
                for (a, row) in sig.iter().enumerate() {
                    let c = self.profile[q] * row[b];
                    if c != C64::new(0.0, 0.0) {
                        add_scaled(&mut out, &annihilate(&after_psi, self.phi_mode(q, a)), c);
                    }
                }
            }
        }
        out
    }

    /// γ^i†|s⟩ = Σ_q f̄(q) Σ_ab Σ̄^i_ab ψ†(q,b) φ†(q,a)|s⟩.
    pub fn gamma_dag(&self, i: usize, state: &FockState) -> FockState {
        let sig = self.sigma(i);
        let mut out = FockState::new();
        for q in 0..self.cells {
            for (a, row) in sig.iter().enumerate() {
                let after_phi = create(state, self.phi_mode(q, a));
                if after_phi.is_empty() {
                    continue;
                }
                for (b, &e) in row.iter().enumerate() {
                    let c = (self.profile[q] * e).conj();
                    if c != C64::new(0.0, 0.0) {
                        add_scaled(&mut out, &create(&after_phi, self.psi_mode(q, b)), c);
                    }
                }
            }
        }
        out
    }

    /// Both spin components of the first `fill` cells occupied for ψ and φ.
    pub fn filled_state(&self, fill: usize) -> Result<FockState> {
        if fill > self.cells {
            return Err(QcaError::DimensionMismatch(format!("fill {fill} exceeds {} cells", self.cells)));
        }
        let modes: Vec<usize> = (0..fill)
            .flat_map(|q| [self.psi_mode(q, 0), self.psi_mode(q, 1), self.phi_mode(q, 0), self.phi_mode(q, 1)])
            .collect();
        Ok(basis_state(&modes))
    }

    /// ‖([γ^i, γ^j†] − δ_ij)|s⟩‖.
    pub fn commutator_deviation(&self, state: &FockState, i: usize, j: usize) -> f64 {
        let mut r = self.gamma(i, &self.gamma_dag(j, state));
        add_scaled(&mut r, &self.gamma_dag(j, &self.gamma(i, state)), C64::new(-1.0, 0.0));
        if i == j {
            add_scaled(&mut r, state, C64::new(-1.0, 0.0));
        }
        norm(&r)
    }

    /// Largest fraction of occupied ξ modes over ξ ∈ {ψ, φ}.
    pub fn epsilon(&self, state: &FockState) -> f64 {
        let mut worst: f64 = 0.0;
        for &m in state.keys() {
            let psi = (0..2 * self.cells).filter(|&j| m >> j & 1 == 1).count();
            let phi = (2 * self.cells..4 * self.cells).filter(|&j| m >> j & 1 == 1).count();
            worst = worst.max(psi.max(phi) as f64 / (2 * self.cells) as f64);
        }
        worst
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FockDeviation {
    pub cells: usize,
    pub fill: usize,
    pub i: usize,
    pub j: usize,
    pub epsilon: f64,
    pub deviation: f64,
}

/// Deviation of the flat-profile polarization operators from canonical
/// Bosonic commutation on the state with `fill` occupied cells.
pub fn fock_commutator_deviation(
    cells: usize,
    fill: usize,
    polarization: [[f64; 3]; 2],
    i: usize,
    j: usize,
) -> Result<FockDeviation> {
    let oracle = FockOracle::flat(cells, polarization)?;
    let state = oracle.filled_state(fill)?;
    Ok(FockDeviation {
        cells,
        fill,
        i,
        j,
        epsilon: oracle.epsilon(&state),
        deviation: oracle.commutator_deviation(&state, i, j),
    })
}
