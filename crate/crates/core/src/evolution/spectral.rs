use rayon::prelude::*;
use rustfft::{FftDirection, FftPlanner};

use super::lattice::{FieldState, LatticeSpec};
use crate::automaton::AutomatonDescriptor;
use crate::error::{QcaError, Result};
use crate::linalg::{identity, CMat, C64};

/// In-place multidimensional DFT over the site index, applied to every
/// internal component. Forward uses e^{−iθ·x}; neither direction scales.
pub fn fft_nd(data: &mut [C64], sizes: &[usize], s: usize, direction: FftDirection) {
    let mut planner = FftPlanner::new();
    let total: usize = sizes.iter().product();
    for (axis, &len) in sizes.iter().enumerate() {
        let fft = planner.plan_fft(len, direction);
        let inner: usize = sizes[axis + 1..].iter().product::<usize>() * s;
        let outer = total * s / (inner * len);
        let mut buf = vec![C64::new(0.0, 0.0); len];
        let mut scratch = vec![C64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
        for o in 0..outer {
            let base = o * len * inner;
            for i in 0..inner {
                for (m, b) in buf.iter_mut().enumerate() {
                    *b = data[base + m * inner + i];
                }
                fft.process_with_scratch(&mut buf, &mut scratch);
                for (m, b) in buf.iter().enumerate() {
                    data[base + m * inner + i] = *b;
                }
            }
        }
    }
}

fn check_compatible(lattice: &LatticeSpec, s: usize, a: &AutomatonDescriptor) -> Result<()> {
    if lattice.presentation != a.presentation {
        return Err(QcaError::DimensionMismatch("lattice and automaton use different presentations".into()));
    }
    if s != a.internal_dim() {
        return Err(QcaError::DimensionMismatch(format!(
            "state has internal dimension {s}, automaton {}",
            a.internal_dim()
        )));
    }
    Ok(())
}

/// a^e by repeated squaring.
fn power(a: &CMat, mut e: u64) -> CMat {
    let mut acc = identity(a.nrows());
    let mut sq = a.clone();
    while e > 0 {
        if e & 1 == 1 {
            acc = &acc * &sq;
        }
        e >>= 1;
        if e > 0 {
            sq = &sq * &sq;
        }
    }
    acc
}

/// Per-mode A_k^steps on a fixed lattice, reusable across many states.
#[derive(Debug, Clone)]
pub struct SpectralPropagator {
    pub lattice: LatticeSpec,
    pub steps: i64,
    modes: Vec<CMat>,
}

impl SpectralPropagator {
    pub fn new(a: &AutomatonDescriptor, lattice: &LatticeSpec, steps: i64) -> Result<Self> {
        check_compatible(lattice, a.internal_dim(), a)?;
        let modes = (0..lattice.sites())
            .into_par_iter()
            .map(|m| {
                let ak = a.k_operator(&lattice.mode_k(m));
                let base = if steps < 0 { ak.adjoint() } else { ak };
                power(&base, steps.unsigned_abs())
            })
            .collect();
        Ok(SpectralPropagator { lattice: lattice.clone(), steps, modes })
    }

    pub fn apply(&self, state: &FieldState) -> Result<FieldState> {
        if state.lattice != self.lattice || state.internal_dim != self.modes[0].nrows() {
            return Err(QcaError::DimensionMismatch("state lives on a different lattice".into()));
        }
        let s = state.internal_dim;
        let mut data = state.amplitudes.clone();
        fft_nd(&mut data, &self.lattice.sizes, s, FftDirection::Forward);
        let scale = 1.0 / self.lattice.sites() as f64;
        data.par_chunks_mut(s).zip(self.modes.par_iter()).for_each(|(v, m)| {
            let mut out = vec![C64::new(0.0, 0.0); s];
            for (r, o) in out.iter_mut().enumerate() {
                for (c, x) in v.iter().enumerate() {
                    *o += m[(r, c)] * x;
                }
            }
            for (x, o) in v.iter_mut().zip(out) {
                *x = o * scale;
            }
        });
        fft_nd(&mut data, &self.lattice.sizes, s, FftDirection::Inverse);
        Ok(FieldState {
            lattice: state.lattice.clone(),
            internal_dim: s,
            amplitudes: data,
            time: state.time + self.steps,
        })
    }
}

/// Evolves by `steps` applications of the automaton in wave-vector space.
pub fn step_spectral(state: &FieldState, a: &AutomatonDescriptor, steps: i64) -> Result<FieldState> {
    check_compatible(&state.lattice, state.internal_dim, a)?;
    SpectralPropagator::new(a, &state.lattice, steps)?.apply(state)
}

/// One step by explicit neighbourhood sums ψ′(x) = Σ_h A_h ψ(x − h).
pub fn step_direct(state: &FieldState, a: &AutomatonDescriptor) -> Result<FieldState> {
    check_compatible(&state.lattice, state.internal_dim, a)?;
    let lat = &state.lattice;
    let s = state.internal_dim;
    let terms: Vec<(Vec<i64>, &CMat)> =
        a.rule.entries.iter().map(|(&l, m)| (a.presentation.label_coords(l), m)).collect();
    let mut out = vec![C64::new(0.0, 0.0); state.amplitudes.len()];
    out.par_chunks_mut(s).enumerate().for_each(|(site, dst)| {
        let x = lat.coords(site);
        for (h, m) in &terms {
            let src: Vec<i64> = x.iter().zip(h).map(|(a, b)| a - b).collect();
            let j = lat.index(&src) * s;
            let v = &state.amplitudes[j..j + s];
            for (r, d) in dst.iter_mut().enumerate() {
                for (c, z) in v.iter().enumerate() {
                    *d += m[(r, c)] * z;
                }
            }
        }
    });
    Ok(FieldState { lattice: lat.clone(), internal_dim: s, amplitudes: out, time: state.time + 1 })
}
