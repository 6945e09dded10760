//! Abelian Cayley-graph presentations of Z^d.
//!
//! A presentation carries its generators S_+ with a Euclidean embedding,
//! integer relators, the free basis used as group coordinates and the first
//! Brillouin zone (the Voronoi cell of the reciprocal lattice).

use std::collections::{HashMap, HashSet, VecDeque};
use std::f64::consts::PI;
use std::fmt;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{QcaError, Result};

const GEOM_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Generator {
    pub label: String,
    pub inverse_label: String,
    /// Euclidean embedding, lattice units.
    pub displacement: Vec<f64>,
    /// Integer coordinates in the free basis.
    pub coords: Vec<i64>,
}

/// A signed element of S = S_+ ∪ S_− ∪ {e}.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Label {
    Identity,
    Gen(usize),
    Inv(usize),
}

impl Label {
    pub fn inverse(self) -> Label {
        match self {
            Label::Identity => Label::Identity,
            Label::Gen(i) => Label::Inv(i),
            Label::Inv(i) => Label::Gen(i),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PresentationKind {
    Line,
    Square2d,
    Bcc3d,
}

impl std::str::FromStr for PresentationKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "line" => Ok(PresentationKind::Line),
            "square_2d" => Ok(PresentationKind::Square2d),
            "bcc_3d" => Ok(PresentationKind::Bcc3d),
            other => Err(format!("unknown lattice kind `{other}` (line, square_2d, bcc_3d)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZoneKind {
    Interval1d,
    Square2d,
    RhombicDodecahedron3d,
    /// Zones of presentations that are not one of the canonical three,
    /// e.g. the coarse lattices produced by tiling.
    Voronoi,
}

/// Half-space `normal · k <= offset` with a unit normal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HalfSpace {
    pub normal: Vec<f64>,
    pub offset: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BrillouinZone {
    pub kind: ZoneKind,
    pub bounds: Vec<HalfSpace>,
    /// Dual basis G_i with G_i · b_j = 2π δ_ij.
    #[serde(skip)]
    pub reciprocal_basis: Vec<Vec<f64>>,
}

impl BrillouinZone {
    pub fn contains(&self, k: &[f64], tol: f64) -> bool {
        self.bounds.iter().all(|h| dot(&h.normal, k) <= h.offset + tol)
    }

    /// Smallest face distance from the origin.
    pub fn inradius(&self) -> f64 {
        self.bounds.iter().map(|h| h.offset).fold(f64::INFINITY, f64::min)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CayleyPresentation {
    pub dimension: usize,
    pub generators: Vec<Generator>,
    /// Integer coefficient vectors over S_+ that sum to the identity.
    pub relators: Vec<Vec<i64>>,
    /// Indices into `generators`; their displacements are the coordinate axes.
    pub free_basis: Vec<usize>,
    pub zone: BrillouinZone,
}

#[derive(Deserialize)]
struct PresentationDoc {
    dimension: usize,
    generators: Vec<Generator>,
    #[serde(default)]
    relators: Vec<Vec<i64>>,
    free_basis: Vec<usize>,
    zone: ZoneDoc,
}

#[derive(Deserialize)]
struct ZoneDoc {
    kind: ZoneKind,
}

impl<'de> Deserialize<'de> for CayleyPresentation {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let doc = PresentationDoc::deserialize(d)?;
        CayleyPresentation::new(doc.dimension, doc.generators, doc.relators, doc.free_basis, doc.zone.kind)
            .map_err(serde::de::Error::custom)
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm2(a: &[f64]) -> f64 {
    dot(a, a)
}

/// Iterates over all integer vectors in [lo, hi]^d.
pub(crate) fn integer_box(d: usize, lo: i64, hi: i64) -> Vec<Vec<i64>> {
    let mut out = vec![vec![]];
    for _ in 0..d {
        let mut next = Vec::with_capacity(out.len() * (hi - lo + 1) as usize);
        for v in &out {
            for x in lo..=hi {
                let mut w = v.clone();
                w.push(x);
                next.push(w);
            }
        }
        out = next;
    }
    out
}

/// Lexicographic comparison with an absolute tolerance per component.
fn lex_greater(a: &[f64], b: &[f64], tol: f64) -> bool {
    for (x, y) in a.iter().zip(b) {
        if *x > y + tol {
            return true;
        }
        if *x < y - tol {
            return false;
        }
    }
    false
}

pub fn build_presentation(kind: PresentationKind) -> CayleyPresentation {
    let gen = |label: &str, disp: Vec<f64>, coords: Vec<i64>| Generator {
        label: label.to_string(),
        inverse_label: format!("{label}^-1"),
        displacement: disp,
        coords,
    };
    let result = match kind {
        PresentationKind::Line => {
            CayleyPresentation::new(1, vec![gen("h", vec![1.0], vec![1])], vec![], vec![0], ZoneKind::Interval1d)
        }
        PresentationKind::Square2d => {
            let a = 1.0 / 2f64.sqrt();
            CayleyPresentation::new(
                2,
                vec![gen("h1", vec![a, a], vec![1, 0]), gen("h2", vec![a, -a], vec![0, 1])],
                vec![],
                vec![0, 1],
                ZoneKind::Square2d,
            )
        }
        PresentationKind::Bcc3d => {
            let a = 1.0 / 3f64.sqrt();
            CayleyPresentation::new(
                3,
                vec![
                    gen("h1", vec![a, a, a], vec![1, 0, 0]),
                    gen("h2", vec![a, -a, -a], vec![0, 1, 0]),
                    gen("h3", vec![-a, a, -a], vec![0, 0, 1]),
                    gen("h4", vec![-a, -a, a], vec![-1, -1, -1]),
                ],
                vec![vec![1, 1, 1, 1]],
                vec![0, 1, 2],
                ZoneKind::RhombicDodecahedron3d,
            )
        }
    };
    result.expect("canonical presentations are valid")
}

impl CayleyPresentation {
    /// Validates the presentation invariants and computes its Brillouin zone.
    pub fn new(
        dimension: usize,
        generators: Vec<Generator>,
        relators: Vec<Vec<i64>>,
        free_basis: Vec<usize>,
        kind: ZoneKind,
    ) -> Result<Self> {
        let bad = |m: String| Err(QcaError::InvalidPresentation(m));
        if !(1..=3).contains(&dimension) {
            return bad(format!("dimension {dimension} outside 1..=3"));
        }
        if free_basis.len() != dimension {
            return bad("free basis size differs from dimension".into());
        }
        let mut seen = HashSet::new();
        for g in &generators {
            if g.displacement.len() != dimension || g.coords.len() != dimension {
                return bad(format!("generator {} has wrong arity", g.label));
            }
            if !seen.insert(g.label.clone()) || !seen.insert(g.inverse_label.clone()) {
                return bad(format!("duplicate label {}", g.label));
            }
        }
        if seen.contains("e") {
            return bad("label `e` is reserved for the identity".into());
        }
        for &i in &free_basis {
            if i >= generators.len() {
                return bad(format!("free basis index {i} out of range"));
            }
        }
        let basis: Vec<Vec<f64>> = free_basis.iter().map(|&i| generators[i].displacement.clone()).collect();
        let bmat = DMatrix::from_fn(dimension, dimension, |r, c| basis[r][c]);
        if bmat.determinant().abs() < GEOM_TOL {
            return bad("free basis displacements are linearly dependent".into());
        }
        for (j, &i) in free_basis.iter().enumerate() {
            let expect: Vec<i64> = (0..dimension).map(|c| i64::from(c == j)).collect();
            if generators[i].coords != expect {
                return bad(format!("free basis generator {} must have unit coordinates", generators[i].label));
            }
        }
        for g in &generators {
            let mut emb = vec![0.0; dimension];
            for (j, b) in basis.iter().enumerate() {
                for c in 0..dimension {
                    emb[c] += g.coords[j] as f64 * b[c];
                }
            }
            if emb.iter().zip(&g.displacement).any(|(a, b)| (a - b).abs() > GEOM_TOL) {
                return bad(format!("generator {} is not the stated combination of the free basis", g.label));
            }
        }
        for r in &relators {
            if r.len() != generators.len() {
                return bad("relator length differs from |S_+|".into());
            }
            for c in 0..dimension {
                let s: f64 = r.iter().zip(&generators).map(|(n, g)| *n as f64 * g.displacement[c]).sum();
                if s.abs() > GEOM_TOL {
                    return bad(format!("relator {r:?} does not close"));
                }
            }
        }
        let zone = voronoi_zone(&basis, kind);
        Ok(CayleyPresentation { dimension, generators, relators, free_basis, zone })
    }

    pub fn basis(&self) -> Vec<Vec<f64>> {
        self.free_basis.iter().map(|&i| self.generators[i].displacement.clone()).collect()
    }

    /// Volume of the primitive cell spanned by the free basis.
    pub fn cell_volume(&self) -> f64 {
        let b = self.basis();
        let d = self.dimension;
        DMatrix::from_fn(d, d, |r, c| b[r][c]).determinant().abs()
    }

    /// All labels of S_+ ∪ S_− (without the identity).
    pub fn labels(&self) -> Vec<Label> {
        let n = self.generators.len();
        (0..n).map(Label::Gen).chain((0..n).map(Label::Inv)).collect()
    }

    pub fn label_coords(&self, l: Label) -> Vec<i64> {
        match l {
            Label::Identity => vec![0; self.dimension],
            Label::Gen(i) => self.generators[i].coords.clone(),
            Label::Inv(i) => self.generators[i].coords.iter().map(|x| -x).collect(),
        }
    }

    pub fn label_displacement(&self, l: Label) -> Vec<f64> {
        match l {
            Label::Identity => vec![0.0; self.dimension],
            Label::Gen(i) => self.generators[i].displacement.clone(),
            Label::Inv(i) => self.generators[i].displacement.iter().map(|x| -x).collect(),
        }
    }

    pub fn label_name(&self, l: Label) -> String {
        match l {
            Label::Identity => "e".to_string(),
            Label::Gen(i) => self.generators[i].label.clone(),
            Label::Inv(i) => self.generators[i].inverse_label.clone(),
        }
    }

    pub fn parse_label(&self, name: &str) -> Option<Label> {
        if name == "e" {
            return Some(Label::Identity);
        }
        self.generators.iter().enumerate().find_map(|(i, g)| {
            if g.label == name {
                Some(Label::Gen(i))
            } else if g.inverse_label == name {
                Some(Label::Inv(i))
            } else {
                None
            }
        })
    }

    /// Looks up the label whose group element has the given coordinates.
    pub fn label_for_coords(&self, coords: &[i64]) -> Option<Label> {
        if coords.iter().all(|&x| x == 0) {
            return Some(Label::Identity);
        }
        self.labels().into_iter().find(|&l| self.label_coords(l) == coords)
    }

    /// Cartesian position of the group element with integer coordinates `x`.
    pub fn embed(&self, x: &[f64]) -> Vec<f64> {
        let b = self.basis();
        let mut out = vec![0.0; self.dimension];
        for (j, bj) in b.iter().enumerate() {
            for c in 0..self.dimension {
                out[c] += x[j] * bj[c];
            }
        }
        out
    }

    /// θ_j = k · b_j, the phase picked up along each free-basis generator.
    pub fn phases_from_cartesian(&self, k: &[f64]) -> Vec<f64> {
        self.basis().iter().map(|b| dot(b, k)).collect()
    }

    /// Inverse of [`phases_from_cartesian`](Self::phases_from_cartesian).
    pub fn cartesian_from_phases(&self, theta: &[f64]) -> Vec<f64> {
        let g = &self.zone.reciprocal_basis;
        let mut k = vec![0.0; self.dimension];
        for (j, gj) in g.iter().enumerate() {
            for c in 0..self.dimension {
                k[c] += theta[j] / (2.0 * PI) * gj[c];
            }
        }
        k
    }

    /// Word-metric distance between two group elements by breadth-first
    /// search over S = S_+ ∪ S_−.
    pub fn word_metric(&self, a: &[i64], b: &[i64], radius: usize) -> Result<usize> {
        if a == b {
            return Ok(0);
        }
        let steps: Vec<Vec<i64>> = self.labels().into_iter().map(|l| self.label_coords(l)).collect();
        let mut seen: HashSet<Vec<i64>> = HashSet::from([a.to_vec()]);
        let mut frontier = VecDeque::from([(a.to_vec(), 0usize)]);
        while let Some((x, dist)) = frontier.pop_front() {
            if dist == radius {
                continue;
            }
            for s in &steps {
                let y: Vec<i64> = x.iter().zip(s).map(|(p, q)| p + q).collect();
                if y == b {
                    return Ok(dist + 1);
                }
                if seen.insert(y.clone()) {
                    frontier.push_back((y, dist + 1));
                }
            }
        }
        Err(QcaError::RadiusExceeded { radius })
    }

    /// Maps `k` into the first Brillouin zone by subtracting the nearest
    /// reciprocal lattice vector. Boundary points keep the face whose outward
    /// normal has a positive first nonzero component.
    pub fn reduce_to_zone(&self, k: &[f64]) -> Vec<f64> {
        let d = self.dimension;
        let g = &self.zone.reciprocal_basis;
        let frac = self.phases_from_cartesian(k);
        let mut k0 = k.to_vec();
        for (j, gj) in g.iter().enumerate() {
            let n = (frac[j] / (2.0 * PI)).round();
            for c in 0..d {
                k0[c] -= n * gj[c];
            }
        }
        let scale = 1.0 + norm2(&k0);
        // strictly interior points are already the unique nearest image
        if self.zone.bounds.iter().all(|h| dot(&h.normal, &k0) < h.offset - 1e-9 * scale) {
            return k0;
        }
        let mut best = k0.clone();
        let mut best2 = f64::INFINITY;
        let mut cand = vec![0.0; d];
        let mut m = vec![-2i64; d];
        loop {
            for c in 0..d {
                cand[c] = k0[c] - (0..d).map(|j| m[j] as f64 * g[j][c]).sum::<f64>();
            }
            let n2 = norm2(&cand);
            let tie = (n2 - best2).abs() <= 1e-12 * scale;
            if (n2 < best2 && !tie) || (tie && lex_greater(&cand, &best, 1e-12)) {
                best2 = best2.min(n2);
                best.copy_from_slice(&cand);
            } else if tie {
                best2 = best2.min(n2);
            }
            // next offset in {-2..2}^d
            let mut j = 0;
            while j < d && m[j] == 2 {
                m[j] = -2;
                j += 1;
            }
            if j == d {
                break;
            }
            m[j] += 1;
        }
        best
    }
}

impl fmt::Display for CayleyPresentation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<&str> = self.generators.iter().map(|g| g.label.as_str()).collect();
        write!(f, "<{} | {} relators> in Z^{}", names.join(", "), self.relators.len(), self.dimension)
    }
}

/// The Voronoi cell of the reciprocal lattice around the origin.
fn voronoi_zone(basis: &[Vec<f64>], kind: ZoneKind) -> BrillouinZone {
    let d = basis.len();
    let bmat = DMatrix::from_fn(d, d, |r, c| basis[r][c]);
    // rows of 2π (B^{-1})^T are the dual basis
    let inv = bmat.try_inverse().expect("checked nonsingular");
    let reciprocal_basis: Vec<Vec<f64>> = (0..d).map(|i| (0..d).map(|c| 2.0 * PI * inv[(c, i)]).collect()).collect();
    let lattice_point = |m: &[i64]| -> Vec<f64> {
        let mut v = vec![0.0; d];
        for (j, gj) in reciprocal_basis.iter().enumerate() {
            for c in 0..d {
                v[c] += m[j] as f64 * gj[c];
            }
        }
        v
    };
    let others: Vec<Vec<f64>> =
        integer_box(d, -3, 3).iter().filter(|m| m.iter().any(|&x| x != 0)).map(|m| lattice_point(m)).collect();
    let mut bounds = Vec::new();
    for m in integer_box(d, -2, 2) {
        if m.iter().all(|&x| x == 0) {
            continue;
        }
        let gv = lattice_point(&m);
        let half: Vec<f64> = gv.iter().map(|x| x / 2.0).collect();
        let r2 = norm2(&half);
        let relevant = others.iter().all(|o| {
            let same = o.iter().zip(&gv).all(|(a, b)| (a - b).abs() < 1e-9);
            if same {
                return true;
            }
            let diff: Vec<f64> = half.iter().zip(o).map(|(a, b)| a - b).collect();
            norm2(&diff) > r2 * (1.0 + 1e-9)
        });
        if relevant {
            let len = norm2(&gv).sqrt();
            bounds.push(HalfSpace { normal: gv.iter().map(|x| x / len).collect(), offset: len / 2.0 });
        }
    }
    BrillouinZone { kind, bounds, reciprocal_basis }
}

/// Integer determinant and adjugate for d ≤ 3 (row-vector convention:
/// `B · adj(B) = det(B) I`).
fn det_adj(b: &[Vec<i64>]) -> (i64, Vec<Vec<i64>>) {
    match b.len() {
        1 => (b[0][0], vec![vec![1]]),
        2 => (b[0][0] * b[1][1] - b[0][1] * b[1][0], vec![vec![b[1][1], -b[0][1]], vec![-b[1][0], b[0][0]]]),
        3 => {
            let m = |r: usize, c: usize| b[r][c];
            let cof = |r: usize, c: usize| {
                let rs: Vec<usize> = (0..3).filter(|&x| x != r).collect();
                let cs: Vec<usize> = (0..3).filter(|&x| x != c).collect();
                let minor = m(rs[0], cs[0]) * m(rs[1], cs[1]) - m(rs[0], cs[1]) * m(rs[1], cs[0]);
                if (r + c).is_multiple_of(2) {
                    minor
                } else {
                    -minor
                }
            };
            let det = (0..3).map(|c| m(0, c) * cof(0, c)).sum();
            let adj = (0..3).map(|r| (0..3).map(|c| cof(c, r)).collect()).collect();
            (det, adj)
        }
        _ => unreachable!("dimension checked"),
    }
}

/// Regrouping of a presentation onto a finite-index sublattice.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TilingMap {
    pub parent: CayleyPresentation,
    /// Rows are the sublattice generators in the parent's free coordinates.
    pub subgroup_basis: Vec<Vec<i64>>,
    pub coset_reps: Vec<Vec<i64>>,
    #[serde(skip)]
    det: i64,
    #[serde(skip)]
    adj: Vec<Vec<i64>>,
    #[serde(skip)]
    rep_index: HashMap<Vec<i64>, usize>,
}

pub fn make_tiling(p: &CayleyPresentation, subgroup_basis: Vec<Vec<i64>>) -> Result<TilingMap> {
    let d = p.dimension;
    if subgroup_basis.len() != d || subgroup_basis.iter().any(|r| r.len() != d) {
        return Err(QcaError::DimensionMismatch(format!("subgroup basis must be {d}×{d}")));
    }
    let (det, adj) = det_adj(&subgroup_basis);
    if det == 0 {
        return Err(QcaError::SingularBasis);
    }
    let r = det.unsigned_abs() as usize;
    let mut t = TilingMap {
        parent: p.clone(),
        subgroup_basis,
        coset_reps: Vec::with_capacity(r),
        det,
        adj,
        rep_index: HashMap::new(),
    };
    for x in integer_box(d, 0, r as i64 - 1) {
        let key = t.coset_key(&x);
        if !t.rep_index.contains_key(&key) {
            t.rep_index.insert(key, t.coset_reps.len());
            t.coset_reps.push(x);
            if t.coset_reps.len() == r {
                break;
            }
        }
    }
    Ok(t)
}

impl TilingMap {
    pub fn index(&self) -> usize {
        self.coset_reps.len()
    }

    fn projected(&self, x: &[i64]) -> Vec<i64> {
        let d = x.len();
        (0..d).map(|c| (0..d).map(|r| x[r] * self.adj[r][c]).sum()).collect()
    }

    fn coset_key(&self, x: &[i64]) -> Vec<i64> {
        let m = self.det.abs();
        self.projected(x).into_iter().map(|v| v.rem_euclid(m)).collect()
    }

    pub fn in_sublattice(&self, x: &[i64]) -> bool {
        self.coset_key(x).iter().all(|&v| v == 0)
    }

    /// Writes x = c_i + n·B and returns (i, n).
    pub fn decompose(&self, x: &[i64]) -> (usize, Vec<i64>) {
        let i = self.rep_index[&self.coset_key(x)];
        let diff: Vec<i64> = x.iter().zip(&self.coset_reps[i]).map(|(a, b)| a - b).collect();
        let n = self.projected(&diff).into_iter().map(|v| v / self.det).collect();
        (i, n)
    }

    pub fn compose(&self, i: usize, n: &[i64]) -> Vec<i64> {
        let d = n.len();
        (0..d).map(|c| self.coset_reps[i][c] + (0..d).map(|r| n[r] * self.subgroup_basis[r][c]).sum::<i64>()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_presentation() {
        let p = build_presentation(PresentationKind::Line);
        assert_eq!(p.generators.len(), 1);
        assert!(p.relators.is_empty());
        assert_eq!(p.zone.bounds.len(), 2);
        assert!(p.zone.bounds.iter().all(|h| (h.offset - PI).abs() < 1e-12));
    }

    #[test]
    fn bcc_relator_closes() {
        let p = build_presentation(PresentationKind::Bcc3d);
        assert_eq!(p.generators.len(), 4);
        for c in 0..3 {
            let s: f64 = p.generators.iter().map(|g| g.displacement[c]).sum();
            assert!(s.abs() < 1e-15);
        }
        // rhombic dodecahedron: 12 faces at distance √3π/√2
        assert_eq!(p.zone.bounds.len(), 12);
        let r = 3f64.sqrt() * PI / 2f64.sqrt();
        assert!(p.zone.bounds.iter().all(|h| (h.offset - r).abs() < 1e-12));
    }

    #[test]
    fn square_displacements_orthonormal() {
        let p = build_presentation(PresentationKind::Square2d);
        let a = &p.generators[0].displacement;
        let b = &p.generators[1].displacement;
        assert!(dot(a, b).abs() < 1e-15);
        assert!((dot(a, a) - 1.0).abs() < 1e-15 && (dot(b, b) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn zone_volumes_match_cell() {
        // Volume of each canonical zone from its closed form.
        let line = build_presentation(PresentationKind::Line);
        assert!((2.0 * PI - (2.0 * PI) / line.cell_volume()).abs() < 1e-12);
        let sq = build_presentation(PresentationKind::Square2d);
        // |kx ± ky| ≤ √2π is a square of side 2π
        assert!(((2.0 * PI).powi(2) / sq.cell_volume() - 4.0 * PI * PI).abs() < 1e-9);
        let bcc = build_presentation(PresentationKind::Bcc3d);
        let a = 3f64.sqrt() * PI;
        assert!(((2.0 * PI).powi(3) / bcc.cell_volume() - 2.0 * a.powi(3)).abs() < 1e-9);
    }

    #[test]
    fn word_metric_basics() {
        let p = build_presentation(PresentationKind::Bcc3d);
        assert_eq!(p.word_metric(&[1, 2, 3], &[1, 2, 3], 4).unwrap(), 0);
        assert_eq!(p.word_metric(&[0, 0, 0], &[-1, -1, -1], 4).unwrap(), 1);
        assert!(matches!(p.word_metric(&[0, 0, 0], &[9, 0, 0], 3), Err(QcaError::RadiusExceeded { .. })));
    }

    #[test]
    fn line_boundary_keeps_plus_pi() {
        let p = build_presentation(PresentationKind::Line);
        let k = p.reduce_to_zone(&[3.0 * PI]);
        assert!((k[0] - PI).abs() < 1e-12);
        let k = p.reduce_to_zone(&[-PI]);
        assert!((k[0] - PI).abs() < 1e-12);
        assert_eq!(p.reduce_to_zone(&[0.25]), vec![0.25]);
    }

    #[test]
    fn tiling_cosets() {
        let line = build_presentation(PresentationKind::Line);
        let t = make_tiling(&line, vec![vec![2]]).unwrap();
        assert_eq!(t.coset_reps, vec![vec![0], vec![1]]);
        let id = make_tiling(&line, vec![vec![1]]).unwrap();
        assert_eq!(id.coset_reps, vec![vec![0]]);
        assert!(matches!(make_tiling(&line, vec![vec![0]]), Err(QcaError::SingularBasis)));

        let sq = build_presentation(PresentationKind::Square2d);
        let t = make_tiling(&sq, vec![vec![2, 0], vec![0, 2]]).unwrap();
        assert_eq!(t.coset_reps, vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]);
        let (i, n) = t.decompose(&[-3, 5]);
        assert_eq!(t.compose(i, &n), vec![-3, 5]);
        assert_eq!(t.coset_reps[i], vec![1, 1]);
    }

    #[test]
    fn skew_tiling_index() {
        let sq = build_presentation(PresentationKind::Square2d);
        let t = make_tiling(&sq, vec![vec![1, 1], vec![1, -1]]).unwrap();
        assert_eq!(t.index(), 2);
        for i in 0..2 {
            for j in 0..i {
                let d: Vec<i64> = t.coset_reps[i].iter().zip(&t.coset_reps[j]).map(|(a, b)| a - b).collect();
                assert!(!t.in_sublattice(&d));
            }
        }
    }

    #[test]
    fn json_round_trip_rebuilds_zone() {
        let p = build_presentation(PresentationKind::Bcc3d);
        let text = serde_json::to_string(&p).unwrap();
        let q: CayleyPresentation = serde_json::from_str(&text).unwrap();
        assert_eq!(p, q);
    }

    #[test]
    fn rejects_open_relator() {
        let mut p = build_presentation(PresentationKind::Bcc3d);
        let r =
            CayleyPresentation::new(3, p.generators.clone(), vec![vec![1, 1, 1, 0]], vec![0, 1, 2], ZoneKind::Voronoi);
        assert!(r.is_err());
        p.generators[3].coords = vec![1, 1, 1];
        let r = CayleyPresentation::new(3, p.generators, vec![], vec![0, 1, 2], ZoneKind::Voronoi);
        assert!(r.is_err());
    }
}
