use std::f64::consts::PI;

use rayon::prelude::*;
use rustfft::FftDirection;
use serde::{Deserialize, Serialize};

use super::lattice::{FieldState, LatticeSpec};
use super::spectral::fft_nd;
use crate::automaton::AutomatonDescriptor;
use crate::cayley::dot;
use crate::error::{QcaError, Result};
use crate::linalg::{unitary_eigen, zeros, CMat, C64};

/// Gaussian weight below which the zone boundary counts as untouched.
pub const ZONE_LEAK_TOL: f64 = 1e-12;

/// Relative Gaussian amplitude below which a mode is left empty; smaller
/// contributions vanish against the unit peak in double precision.
const ENVELOPE_CUTOFF: f64 = 1e-16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    /// Eigenphase −ω, i.e. evolution e^{−iωt} and velocity +∇ω.
    Plus,
    /// Eigenphase +ω.
    Minus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WavePacketSpec {
    /// Cartesian centre in wave-vector space.
    pub center_k: Vec<f64>,
    /// Standard deviation of |ψ̂(k)|² per Cartesian direction.
    pub sigma_k: f64,
    /// Centre site in free-basis coordinates.
    pub center_x: Vec<i64>,
    pub branch: Branch,
}

/// Projector onto the half of the spectrum selected by `branch`: the s/2
/// lowest eigenphases for `Plus`, the highest for `Minus`.
pub fn branch_projector(ak: &CMat, branch: Branch) -> CMat {
    let s = ak.nrows();
    let e = unitary_eigen(ak);
    let cols: Vec<usize> = match branch {
        Branch::Plus => (0..s / 2).collect(),
        Branch::Minus => (s - s / 2..s).collect(),
    };
    let mut p = zeros(s);
    for j in cols {
        let v = e.vectors.column(j);
        p += v * v.adjoint();
    }
    p
}

/// Distance from `k` to the nearest face of the zone.
fn distance_to_boundary(a: &AutomatonDescriptor, k: &[f64]) -> f64 {
    a.presentation.zone.bounds.iter().map(|h| h.offset - dot(&h.normal, k)).fold(f64::INFINITY, f64::min)
}

/// Builds a normalised Gaussian packet on the chosen dispersion branch.
/// The branch vector is P(k) r / ‖P(k) r‖ with r taken at the centre, which
/// fixes a smooth gauge across the packet.
pub fn make_packet(spec: &WavePacketSpec, a: &AutomatonDescriptor, lattice: &LatticeSpec) -> Result<FieldState> {
    let d = lattice.dimension();
    if spec.center_k.len() != d || spec.center_x.len() != d {
        return Err(QcaError::DimensionMismatch("packet centre has wrong dimension".into()));
    }
    if lattice.presentation != a.presentation {
        return Err(QcaError::DimensionMismatch("lattice and automaton use different presentations".into()));
    }
    let p = &a.presentation;
    let center = p.reduce_to_zone(&spec.center_k);
    let gap = distance_to_boundary(a, &center).max(0.0);
    let envelope = (-gap * gap / (4.0 * spec.sigma_k * spec.sigma_k)).exp();
    if envelope > ZONE_LEAK_TOL {
        return Err(QcaError::ZoneLeak { envelope });
    }
    let s = a.internal_dim();
    let p0 = branch_projector(&a.k_operator(&center), spec.branch);
    let r = (0..s).map(|j| p0.column(j).into_owned()).max_by(|x, y| x.norm().total_cmp(&y.norm())).expect("s > 0");
    let x0: Vec<f64> = spec.center_x.iter().map(|&x| x as f64).collect();
    let mut data = vec![C64::new(0.0, 0.0); lattice.sites() * s];
    data.par_chunks_mut(s).enumerate().for_each(|(m, out)| {
        let k = lattice.mode_k(m);
        let dk: Vec<f64> = k.iter().zip(&center).map(|(a, b)| a - b).collect();
        let dk = p.reduce_to_zone(&dk);
        let w = (-dot(&dk, &dk) / (4.0 * spec.sigma_k * spec.sigma_k)).exp();
        if w < ENVELOPE_CUTOFF {
            return;
        }
        let kk: Vec<f64> = center.iter().zip(&dk).map(|(a, b)| a + b).collect();
        let v = branch_projector(&a.k_operator(&kk), spec.branch) * &r;
        let nv = v.norm();
        if nv < 1e-12 {
            return;
        }
        let theta = lattice.mode_phases(m);
        let phase = C64::from_polar(w / nv, -dot(&theta, &x0));
        for (o, z) in out.iter_mut().zip(v.iter()) {
            *o = z * phase;
        }
    });
    fft_nd(&mut data, &lattice.sizes, s, FftDirection::Inverse);
    let mut st = FieldState { lattice: lattice.clone(), internal_dim: s, amplitudes: data, time: 0 };
    st.normalize();
    Ok(st)
}

/// Circular mean, in [0, L), and spread of the site distribution along each
/// free coordinate, in lattice units.
pub fn circular_moments(state: &FieldState) -> (Vec<f64>, Vec<f64>) {
    let lat = &state.lattice;
    let w = state.site_weights();
    let total: f64 = w.iter().sum();
    let d = lat.dimension();
    let mut z = vec![C64::new(0.0, 0.0); d];
    for (site, &p) in w.iter().enumerate() {
        let x = lat.coords(site);
        for j in 0..d {
            z[j] += C64::from_polar(p / total, 2.0 * PI * x[j] as f64 / lat.sizes[j] as f64);
        }
    }
    let mean = (0..d)
        .map(|j| {
            let l = lat.sizes[j] as f64;
            let m = (z[j].arg() * l / (2.0 * PI)).rem_euclid(l);
            // rem_euclid rounds tiny negatives up to l
            if m < l {
                m
            } else {
                0.0
            }
        })
        .collect();
    let spread =
        (0..d).map(|j| (-2.0 * z[j].norm().max(1e-300).ln()).sqrt() * lat.sizes[j] as f64 / (2.0 * PI)).collect();
    (mean, spread)
}

fn check_seam(state: &FieldState) -> Result<Vec<f64>> {
    let (mean, spread) = circular_moments(state);
    for (j, (&sd, &l)) in spread.iter().zip(&state.lattice.sizes).enumerate() {
        if 3.0 * sd >= l as f64 / 2.0 {
            return Err(QcaError::PacketAtBoundary { axis: j });
        }
    }
    Ok(mean)
}

/// Mean Cartesian displacement per step between two snapshots of a packet.
pub fn measure_packet_velocity(before: &FieldState, after: &FieldState, steps: i64) -> Result<Vec<f64>> {
    if before.lattice != after.lattice {
        return Err(QcaError::DimensionMismatch("snapshots on different lattices".into()));
    }
    let m0 = check_seam(before)?;
    let m1 = check_seam(after)?;
    let shift: Vec<f64> = m0
        .iter()
        .zip(&m1)
        .zip(&before.lattice.sizes)
        .map(|((a, b), &l)| {
            let l = l as f64;
            let mut dlt = (b - a).rem_euclid(l);
            if dlt > l / 2.0 {
                dlt -= l;
            }
            dlt
        })
        .collect();
    Ok(before.lattice.presentation.embed(&shift).into_iter().map(|x| x / steps as f64).collect())
}
