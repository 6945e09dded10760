use rand::Rng;

use crate::cayley::CayleyPresentation;
use crate::error::{QcaError, Result};
use crate::linalg::C64;

/// A periodic box of the Cayley graph, sized per free-basis coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeSpec {
    pub presentation: CayleyPresentation,
    pub sizes: Vec<usize>,
}

impl LatticeSpec {
    pub fn new(presentation: CayleyPresentation, sizes: Vec<usize>) -> Result<Self> {
        if sizes.len() != presentation.dimension {
            return Err(QcaError::DimensionMismatch(format!(
                "{} lattice sizes for a {}-dimensional presentation",
                sizes.len(),
                presentation.dimension
            )));
        }
        if sizes.iter().any(|&l| l < 2) {
            return Err(QcaError::DimensionMismatch("every lattice size must be at least 2".into()));
        }
        Ok(LatticeSpec { presentation, sizes })
    }

    pub fn dimension(&self) -> usize {
        self.sizes.len()
    }

    pub fn sites(&self) -> usize {
        self.sizes.iter().product()
    }

    /// Row-major site index: the first coordinate varies slowest.
    pub fn index(&self, coords: &[i64]) -> usize {
        let mut idx = 0;
        for (&x, &l) in coords.iter().zip(&self.sizes) {
            idx = idx * l + x.rem_euclid(l as i64) as usize;
        }
        idx
    }

    pub fn coords(&self, mut idx: usize) -> Vec<i64> {
        let mut out = vec![0; self.sizes.len()];
        for j in (0..self.sizes.len()).rev() {
            out[j] = (idx % self.sizes[j]) as i64;
            idx /= self.sizes[j];
        }
        out
    }

    /// Phases θ_j = 2π m_j / L_j of the Fourier mode with index `idx`.
    pub fn mode_phases(&self, idx: usize) -> Vec<f64> {
        self.coords(idx)
            .iter()
            .zip(&self.sizes)
            .map(|(&m, &l)| 2.0 * std::f64::consts::PI * m as f64 / l as f64)
            .collect()
    }

    /// Cartesian wave vector of a Fourier mode.
    pub fn mode_k(&self, idx: usize) -> Vec<f64> {
        self.presentation.cartesian_from_phases(&self.mode_phases(idx))
    }
}

/// Single-excitation amplitudes ψ(x, a), site-major with the internal
/// index fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldState {
    pub lattice: LatticeSpec,
    pub internal_dim: usize,
    pub amplitudes: Vec<C64>,
    pub time: i64,
}

impl FieldState {
    pub fn zeros(lattice: LatticeSpec, internal_dim: usize) -> Self {
        let n = lattice.sites() * internal_dim;
        FieldState { lattice, internal_dim, amplitudes: vec![C64::new(0.0, 0.0); n], time: 0 }
    }

    /// Unit-norm state with independent Gaussian amplitudes.
    pub fn random<R: Rng>(lattice: LatticeSpec, internal_dim: usize, rng: &mut R) -> Self {
        let mut s = Self::zeros(lattice, internal_dim);
        for z in s.amplitudes.iter_mut() {
            // Box–Muller keeps the dependency set to `rand`
            let (u1, u2): (f64, f64) = (rng.gen_range(f64::EPSILON..1.0), rng.gen());
            let r = (-2.0 * u1.ln()).sqrt();
            let t = 2.0 * std::f64::consts::PI * u2;
            *z = C64::new(r * t.cos(), r * t.sin());
        }
        s.normalize();
        s
    }

    pub fn at(&self, coords: &[i64], a: usize) -> C64 {
        self.amplitudes[self.lattice.index(coords) * self.internal_dim + a]
    }

    pub fn set(&mut self, coords: &[i64], a: usize, v: C64) {
        let i = self.lattice.index(coords) * self.internal_dim + a;
        self.amplitudes[i] = v;
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn normalize(&mut self) {
        let n = self.norm();
        if n > 0.0 {
            for z in self.amplitudes.iter_mut() {
                *z /= n;
            }
        }
    }

    pub fn inner(&self, other: &FieldState) -> C64 {
        self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a.conj() * b).sum()
    }

    /// Largest amplitude difference.
    pub fn distance(&self, other: &FieldState) -> f64 {
        self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    /// Lattice translation: the result at x equals self at x − shift.
    pub fn translated(&self, shift: &[i64]) -> FieldState {
        let mut out = FieldState { time: self.time, ..Self::zeros(self.lattice.clone(), self.internal_dim) };
        let s = self.internal_dim;
        for site in 0..self.lattice.sites() {
            let x = self.lattice.coords(site);
            let y: Vec<i64> = x.iter().zip(shift).map(|(a, b)| a + b).collect();
            let dst = self.lattice.index(&y);
            out.amplitudes[dst * s..(dst + 1) * s].copy_from_slice(&self.amplitudes[site * s..(site + 1) * s]);
        }
        out
    }

    /// Probability mass per site.
    pub fn site_weights(&self) -> Vec<f64> {
        self.amplitudes.chunks(self.internal_dim).map(|c| c.iter().map(|z| z.norm_sqr()).sum()).collect()
    }
}
