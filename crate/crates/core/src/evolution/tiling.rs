use std::collections::BTreeMap;

use super::lattice::{FieldState, LatticeSpec};
use crate::automaton::{AutomatonDescriptor, TransitionRule};
use crate::cayley::{CayleyPresentation, Generator, TilingMap, ZoneKind};
use crate::error::{QcaError, Result};
use crate::linalg::{zeros, CMat};

/// Presentation of the sublattice in its own coordinates: unit generators
/// t1..td plus one extra generator for each further displacement that the
/// coarse automaton needs.
pub fn coarse_presentation(t: &TilingMap, displacements: &[Vec<i64>]) -> Result<CayleyPresentation> {
    let p = &t.parent;
    let d = p.dimension;
    let embed = |n: &[i64]| -> Vec<f64> {
        let mut fine = vec![0i64; d];
        for (j, row) in t.subgroup_basis.iter().enumerate() {
            for c in 0..d {
                fine[c] += n[j] * row[c];
            }
        }
        p.embed(&fine.iter().map(|&x| x as f64).collect::<Vec<_>>())
    };
    let mut gens: Vec<Generator> = (0..d)
        .map(|j| {
            let n: Vec<i64> = (0..d).map(|c| i64::from(c == j)).collect();
            Generator {
                label: format!("t{}", j + 1),
                inverse_label: format!("t{}^-1", j + 1),
                displacement: embed(&n),
                coords: n,
            }
        })
        .collect();
    let mut extra: Vec<Vec<i64>> = Vec::new();
    for m in displacements {
        if m.iter().all(|&x| x == 0) || m.iter().filter(|&&x| x != 0).count() == 1 && m.iter().all(|x| x.abs() <= 1) {
            continue;
        }
        // orient so the first nonzero coordinate is positive
        let first = m.iter().find(|&&x| x != 0).copied().unwrap_or(1);
        let canon: Vec<i64> = if first > 0 { m.clone() } else { m.iter().map(|x| -x).collect() };
        if !extra.contains(&canon) {
            extra.push(canon);
        }
    }
    let mut relators = Vec::new();
    let total = d + extra.len();
    for (e, m) in extra.iter().enumerate() {
        let name = format!("t{}", d + e + 1);
        gens.push(Generator {
            label: name.clone(),
            inverse_label: format!("{name}^-1"),
            displacement: embed(m),
            coords: m.clone(),
        });
        let mut r = vec![0i64; total];
        for j in 0..d {
            r[j] = -m[j];
        }
        r[d + e] = 1;
        relators.push(r);
    }
    CayleyPresentation::new(d, gens, relators, (0..d).collect(), ZoneKind::Voronoi)
}

/// Coarse-grained automaton with internal dimension s·r. For fine rep c_i
/// and generator h, writing c_i − h = c_j + m·B places A_h in block (i, j)
/// of the coarse matrix at displacement −m.
pub fn tile_descriptor(a: &AutomatonDescriptor, t: &TilingMap) -> Result<AutomatonDescriptor> {
    if a.presentation != t.parent {
        return Err(QcaError::TilingIncompatible("tiling built for another presentation".into()));
    }
    let s = a.internal_dim();
    let r = t.index();
    let mut blocks: BTreeMap<Vec<i64>, CMat> = BTreeMap::new();
    for (i, ci) in t.coset_reps.iter().enumerate() {
        for (&l, ah) in &a.rule.entries {
            let h = a.presentation.label_coords(l);
            let x: Vec<i64> = ci.iter().zip(&h).map(|(a, b)| a - b).collect();
            let (j, m) = t.decompose(&x);
            let disp: Vec<i64> = m.iter().map(|v| -v).collect();
            let big = blocks.entry(disp).or_insert_with(|| zeros(s * r));
            let mut view = big.view_mut((i * s, j * s), (s, s));
            view += ah;
        }
    }
    let keys: Vec<Vec<i64>> = blocks.keys().cloned().collect();
    let cp = coarse_presentation(t, &keys)?;
    let mut entries = BTreeMap::new();
    for (m, mat) in blocks {
        let label = cp
            .label_for_coords(&m)
            .ok_or_else(|| QcaError::TilingIncompatible(format!("coarse displacement {m:?} has no generator")))?;
        if let Some(prev) = entries.get_mut(&label) {
            *prev += mat;
        } else {
            entries.insert(label, mat);
        }
    }
    let rule = TransitionRule::new(s * r, entries)?;
    AutomatonDescriptor::new(cp, rule, None)
}

/// Coarse lattice matching a fine lattice; requires a diagonal subgroup
/// basis whose entries divide the lattice sizes.
pub fn coarse_lattice(t: &TilingMap, fine: &LatticeSpec, coarse: &CayleyPresentation) -> Result<LatticeSpec> {
    let d = fine.dimension();
    let mut sizes = Vec::with_capacity(d);
    for j in 0..d {
        for c in 0..d {
            if c != j && t.subgroup_basis[j][c] != 0 {
                return Err(QcaError::TilingIncompatible("finite lattices need a diagonal subgroup basis".into()));
            }
        }
        let b = t.subgroup_basis[j][j].unsigned_abs() as usize;
        if !fine.sizes[j].is_multiple_of(b) {
            return Err(QcaError::TilingIncompatible(format!(
                "lattice size {} not divisible by {b} along coordinate {j}",
                fine.sizes[j]
            )));
        }
        sizes.push(fine.sizes[j] / b);
    }
    LatticeSpec::new(coarse.clone(), sizes)
}

/// Regroups a fine state into coarse cells: the coarse internal index is
/// i·s + a for coset representative c_i.
pub fn apply_tiling(state: &FieldState, t: &TilingMap, coarse: &CayleyPresentation) -> Result<FieldState> {
    let lat = coarse_lattice(t, &state.lattice, coarse)?;
    let s = state.internal_dim;
    let r = t.index();
    let mut out = FieldState::zeros(lat, s * r);
    out.time = state.time;
    for site in 0..state.lattice.sites() {
        let x = state.lattice.coords(site);
        let (i, n) = t.decompose(&x);
        let dst = out.lattice.index(&n) * s * r + i * s;
        out.amplitudes[dst..dst + s].copy_from_slice(&state.amplitudes[site * s..(site + 1) * s]);
    }
    Ok(out)
}

/// Inverse of [`apply_tiling`].
pub fn undo_tiling(coarse_state: &FieldState, t: &TilingMap, fine: &LatticeSpec) -> Result<FieldState> {
    let r = t.index();
    let s = coarse_state.internal_dim / r;
    let mut out = FieldState::zeros(fine.clone(), s);
    out.time = coarse_state.time;
    for site in 0..fine.sites() {
        let x = fine.coords(site);
        let (i, n) = t.decompose(&x);
        let src = coarse_state.lattice.index(&n) * s * r + i * s;
        out.amplitudes[site * s..(site + 1) * s].copy_from_slice(&coarse_state.amplitudes[src..src + s]);
    }
    Ok(out)
}
