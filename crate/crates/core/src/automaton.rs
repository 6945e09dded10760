//! Generic automaton descriptors: transition matrices on a Cayley graph,
//! the wave-vector operator, unitarity and isotropy checks, and recovery of
//! transition matrices from a closed-form A_k.

use std::collections::{BTreeMap, HashMap};
use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cayley::{dot, integer_box, CayleyPresentation, Label};
use crate::error::{QcaError, Result};
use crate::linalg::{identity, max_norm, unitarity_residual, unitary_eigen, zeros, CMat, UnitaryEigen, C64};

pub const ALGEBRAIC_TOL: f64 = 1e-12;
pub const EIGEN_TOL: f64 = 1e-9;

/// Transition matrices A_h indexed by signed generator label.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionRule {
    pub internal_dim: usize,
    pub entries: BTreeMap<Label, CMat>,
}

impl TransitionRule {
    pub fn new(internal_dim: usize, entries: BTreeMap<Label, CMat>) -> Result<Self> {
        if internal_dim == 0 {
            return Err(QcaError::InvalidDescriptor("internal dimension must be positive".into()));
        }
        for m in entries.values() {
            if m.nrows() != internal_dim || m.ncols() != internal_dim {
                return Err(QcaError::DimensionMismatch(format!(
                    "transition matrix is {}×{}, expected {internal_dim}×{internal_dim}",
                    m.nrows(),
                    m.ncols()
                )));
            }
        }
        if entries.values().all(|m| max_norm(m) == 0.0) {
            return Err(QcaError::InvalidDescriptor("all transition matrices vanish".into()));
        }
        Ok(TransitionRule { internal_dim, entries })
    }

    pub fn get(&self, l: Label) -> Option<&CMat> {
        self.entries.get(&l)
    }

    /// A_k = Σ_h e^{−ik·h} A_h.
    pub fn k_operator(&self, p: &CayleyPresentation, k: &[f64]) -> CMat {
        let mut out = zeros(self.internal_dim);
        for (&l, a) in &self.entries {
            let phase = C64::from_polar(1.0, -dot(k, &p.label_displacement(l)));
            out += a * phase;
        }
        out
    }

    /// Conjugates every transition matrix by a fixed unitary.
    pub fn conjugated(&self, u: &CMat) -> TransitionRule {
        let entries = self.entries.iter().map(|(&l, a)| (l, u * a * u.adjoint())).collect();
        TransitionRule { internal_dim: self.internal_dim, entries }
    }
}

/// One element l of the isotropy group: its action on S and its unitary U_l.
#[derive(Debug, Clone, PartialEq)]
pub struct IsotropyElement {
    pub permutation: BTreeMap<Label, Label>,
    pub unitary: CMat,
}

impl IsotropyElement {
    pub fn apply(&self, l: Label) -> Label {
        if l == Label::Identity {
            return l;
        }
        self.permutation.get(&l).copied().unwrap_or(l)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IsotropyGroup {
    pub elements: Vec<IsotropyElement>,
}

impl IsotropyGroup {
    pub fn trivial(s: usize) -> Self {
        IsotropyGroup { elements: vec![IsotropyElement { permutation: BTreeMap::new(), unitary: identity(s) }] }
    }

    /// Builds the group from orthogonal maps of the embedding: the action on
    /// S is read off by matching rotated displacements.
    pub fn from_orthogonal(p: &CayleyPresentation, maps: &[(Vec<Vec<f64>>, CMat)]) -> Result<Self> {
        let labels = p.labels();
        let mut elements = Vec::with_capacity(maps.len());
        for (o, u) in maps {
            let mut permutation = BTreeMap::new();
            for &l in &labels {
                let h = p.label_displacement(l);
                let img: Vec<f64> = o.iter().map(|row| dot(row, &h)).collect();
                let target = labels
                    .iter()
                    .copied()
                    .find(|&m| p.label_displacement(m).iter().zip(&img).all(|(a, b)| (a - b).abs() < 1e-9));
                match target {
                    Some(t) => {
                        permutation.insert(l, t);
                    }
                    None => {
                        return Err(QcaError::InvalidIsotropy(format!(
                            "map does not preserve the generator set (image of {})",
                            p.label_name(l)
                        )))
                    }
                }
            }
            elements.push(IsotropyElement { permutation, unitary: u.clone() });
        }
        Ok(IsotropyGroup { elements })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AutomatonDescriptor {
    pub presentation: CayleyPresentation,
    pub rule: TransitionRule,
    pub isotropy: Option<IsotropyGroup>,
}

impl AutomatonDescriptor {
    pub fn new(
        presentation: CayleyPresentation,
        rule: TransitionRule,
        isotropy: Option<IsotropyGroup>,
    ) -> Result<Self> {
        let labels = presentation.labels();
        for l in rule.entries.keys() {
            if *l != Label::Identity && !labels.contains(l) {
                return Err(QcaError::InvalidDescriptor(format!("label {l:?} not in presentation")));
            }
        }
        if let Some(g) = &isotropy {
            for e in &g.elements {
                if e.unitary.nrows() != rule.internal_dim || e.unitary.ncols() != rule.internal_dim {
                    return Err(QcaError::DimensionMismatch("isotropy unitary size differs from s".into()));
                }
            }
        }
        Ok(AutomatonDescriptor { presentation, rule, isotropy })
    }

    pub fn internal_dim(&self) -> usize {
        self.rule.internal_dim
    }

    pub fn k_operator(&self, k: &[f64]) -> CMat {
        self.rule.k_operator(&self.presentation, k)
    }
}

pub fn assemble_k_operator(a: &AutomatonDescriptor, k: &[f64]) -> CMat {
    a.k_operator(k)
}

/// Residual of one off-diagonal unitarity sum for a group element h″ ≠ e.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DifferenceResidual {
    pub element: Vec<i64>,
    /// ‖Σ_{h′ − h = h″} A_h† A_{h′}‖
    pub left: f64,
    /// ‖Σ_{h − h′ = h″} A_h A_{h′}†‖
    pub right: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UnitarityReport {
    pub completeness_left: f64,
    pub completeness_right: f64,
    pub differences: Vec<DifferenceResidual>,
}

impl UnitarityReport {
    pub fn max_residual(&self) -> f64 {
        self.differences
            .iter()
            .flat_map(|d| [d.left, d.right])
            .fold(self.completeness_left.max(self.completeness_right), f64::max)
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.max_residual() <= tol
    }
}

pub fn check_unitarity_conditions(rule: &TransitionRule, p: &CayleyPresentation) -> UnitarityReport {
    let s = rule.internal_dim;
    let mut left_c = zeros(s);
    let mut right_c = zeros(s);
    for a in rule.entries.values() {
        left_c += a.adjoint() * a;
        right_c += a * a.adjoint();
    }
    let id = identity(s);
    let mut left: BTreeMap<Vec<i64>, CMat> = BTreeMap::new();
    let mut right: BTreeMap<Vec<i64>, CMat> = BTreeMap::new();
    let coords: Vec<(Vec<i64>, &CMat)> = rule.entries.iter().map(|(&l, a)| (p.label_coords(l), a)).collect();
    for (ch, ah) in &coords {
        for (cg, ag) in &coords {
            let diff: Vec<i64> = cg.iter().zip(ch).map(|(x, y)| x - y).collect();
            if diff.iter().all(|&x| x == 0) {
                continue;
            }
            // h″ = h′ − h on the left, h″ = h − h′ on the right
            *left.entry(diff.clone()).or_insert_with(|| zeros(s)) += ah.adjoint() * *ag;
            let neg: Vec<i64> = diff.iter().map(|x| -x).collect();
            *right.entry(neg).or_insert_with(|| zeros(s)) += *ah * ag.adjoint();
        }
    }
    let differences = left
        .iter()
        .map(|(e, m)| DifferenceResidual {
            element: e.clone(),
            left: max_norm(m),
            right: right.get(e).map_or(0.0, max_norm),
        })
        .collect();
    UnitarityReport {
        completeness_left: max_norm(&(left_c - &id)),
        completeness_right: max_norm(&(right_c - id)),
        differences,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CovarianceReport {
    /// max over l, h of ‖U_l A_h U_l† − A_{l(h)}‖
    pub residual: f64,
    pub closed: bool,
    pub transitive: bool,
    pub unitaries_unitary: bool,
    pub respects_inverses: bool,
    /// max over pairs of 1 − |tr(U_{ab}† U_a U_b)| / s
    pub projective_defect: f64,
}

impl CovarianceReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.residual <= tol
            && self.closed
            && self.transitive
            && self.unitaries_unitary
            && self.respects_inverses
            && self.projective_defect <= EIGEN_TOL
    }
}

pub fn check_covariance(a: &AutomatonDescriptor) -> Result<CovarianceReport> {
    let g = a.isotropy.as_ref().ok_or(QcaError::MissingIsotropy)?;
    let p = &a.presentation;
    let s = a.internal_dim();
    let zero = zeros(s);
    let mut all = p.labels();
    all.push(Label::Identity);
    let mut residual: f64 = 0.0;
    for e in &g.elements {
        for &h in &all {
            let ah = a.rule.get(h).unwrap_or(&zero);
            let target = a.rule.get(e.apply(h)).unwrap_or(&zero);
            residual = residual.max(max_norm(&(&e.unitary * ah * e.unitary.adjoint() - target)));
        }
    }
    let labels = p.labels();
    let perm_of = |e: &IsotropyElement| -> Vec<Label> { labels.iter().map(|&l| e.apply(l)).collect() };
    let perms: Vec<Vec<Label>> = g.elements.iter().map(perm_of).collect();
    let index: HashMap<Label, usize> = labels.iter().enumerate().map(|(i, &l)| (l, i)).collect();
    let mut closed = true;
    let mut projective_defect: f64 = 0.0;
    for (ia, pa) in perms.iter().enumerate() {
        for (ib, pb) in perms.iter().enumerate() {
            let comp: Vec<Label> = pb.iter().map(|l| pa[index[l]]).collect();
            match perms.iter().position(|pc| *pc == comp) {
                Some(ic) => {
                    let prod = &g.elements[ia].unitary * &g.elements[ib].unitary;
                    let tr = (g.elements[ic].unitary.adjoint() * prod).trace();
                    projective_defect = projective_defect.max((1.0 - tr.norm() / s as f64).abs());
                }
                None => closed = false,
            }
        }
    }
    let n = p.generators.len();
    let transitive = (0..n).all(|j| perms.iter().any(|pm| pm[0] == Label::Gen(j)));
    let respects_inverses =
        perms.iter().all(|pm| labels.iter().all(|&l| pm[index[&l.inverse()]] == pm[index[&l]].inverse()));
    let unitaries_unitary = g.elements.iter().all(|e| unitarity_residual(&e.unitary) <= ALGEBRAIC_TOL);
    Ok(CovarianceReport { residual, closed, transitive, unitaries_unitary, respects_inverses, projective_defect })
}

/// Recovers transition matrices from a closed-form A_k by discrete Fourier
/// inversion over group coordinates.
pub fn extract_transition_matrices<F>(
    f: F,
    p: &CayleyPresentation,
    support: &[Label],
    tol: f64,
) -> Result<TransitionRule>
where
    F: Fn(&[f64]) -> CMat,
{
    let d = p.dimension;
    let coords: Vec<Vec<i64>> = support.iter().map(|&l| p.label_coords(l)).collect();
    let deg = coords.iter().flatten().map(|x| x.abs()).max().unwrap_or(0).max(1);
    let m = 2 * deg + 1;
    let grid = integer_box(d, 0, m - 1);
    let samples: Vec<(Vec<f64>, CMat)> = grid
        .iter()
        .map(|g| {
            let theta: Vec<f64> = g.iter().map(|&x| 2.0 * PI * x as f64 / m as f64).collect();
            let k = p.cartesian_from_phases(&theta);
            (theta, f(&k))
        })
        .collect();
    let s = samples[0].1.nrows();
    let norm = (m as f64).powi(d as i32);
    let coefficient = |c: &[i64]| -> CMat {
        let mut acc = zeros(s);
        for (theta, fk) in &samples {
            let ph: f64 = theta.iter().zip(c).map(|(t, &x)| t * x as f64).sum();
            acc += fk * C64::from_polar(1.0, ph);
        }
        acc / C64::from(norm)
    };
    let clean = |mut a: CMat| -> CMat {
        for z in a.iter_mut() {
            if z.re.abs() < 1e-14 {
                z.re = 0.0;
            }
            if z.im.abs() < 1e-14 {
                z.im = 0.0;
            }
        }
        a
    };
    let mut entries = BTreeMap::new();
    let mut outside: f64 = 0.0;
    for c in integer_box(d, -deg, deg) {
        let a = clean(coefficient(&c));
        match coords.iter().position(|x| *x == c) {
            Some(i) => {
                if max_norm(&a) > 0.0 {
                    entries.insert(support[i], a);
                }
            }
            None => outside = outside.max(max_norm(&a)),
        }
    }
    if outside > tol {
        return Err(QcaError::SupportMismatch { residual: outside });
    }
    if entries.is_empty() {
        return Err(QcaError::SupportMismatch { residual: 0.0 });
    }
    let rule = TransitionRule { internal_dim: s, entries };
    let mut residual: f64 = 0.0;
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let probes = samples
        .iter()
        .map(|(t, _)| p.cartesian_from_phases(t))
        .chain((0..32).map(|_| (0..d).map(|_| rng.gen_range(-4.0..4.0)).collect()));
    for k in probes {
        residual = residual.max(max_norm(&(rule.k_operator(p, &k) - f(&k))));
    }
    if residual > tol {
        return Err(QcaError::SupportMismatch { residual });
    }
    Ok(rule)
}

pub fn spectrum(a: &AutomatonDescriptor, k: &[f64]) -> Result<UnitaryEigen> {
    let ak = a.k_operator(k);
    let residual = unitarity_residual(&ak);
    if residual > EIGEN_TOL {
        return Err(QcaError::NotUnitary { residual });
    }
    Ok(unitary_eigen(&ak))
}

// ---- JSON form ----

fn matrix_to_pairs(m: &CMat) -> Vec<[f64; 2]> {
    let n = m.nrows();
    (0..n).flat_map(|r| (0..n).map(move |c| (r, c))).map(|(r, c)| [m[(r, c)].re, m[(r, c)].im]).collect()
}

fn matrix_from_pairs(v: &[[f64; 2]], s: usize) -> Result<CMat> {
    if v.len() != s * s {
        return Err(QcaError::DimensionMismatch(format!("matrix has {} entries, expected {}", v.len(), s * s)));
    }
    Ok(CMat::from_fn(s, s, |r, c| C64::new(v[r * s + c][0], v[r * s + c][1])))
}

#[derive(Serialize, Deserialize)]
struct IsotropyDoc {
    permutation: BTreeMap<String, String>,
    unitary: Vec<[f64; 2]>,
}

#[derive(Serialize, Deserialize)]
struct DescriptorDoc {
    presentation: CayleyPresentation,
    internal_dim: usize,
    matrices: BTreeMap<String, Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    isotropy: Option<Vec<IsotropyDoc>>,
}

impl Serialize for AutomatonDescriptor {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        let p = &self.presentation;
        let doc = DescriptorDoc {
            presentation: p.clone(),
            internal_dim: self.internal_dim(),
            matrices: self.rule.entries.iter().map(|(&l, m)| (p.label_name(l), matrix_to_pairs(m))).collect(),
            isotropy: self.isotropy.as_ref().map(|g| {
                g.elements
                    .iter()
                    .map(|e| IsotropyDoc {
                        permutation: e.permutation.iter().map(|(&a, &b)| (p.label_name(a), p.label_name(b))).collect(),
                        unitary: matrix_to_pairs(&e.unitary),
                    })
                    .collect()
            }),
        };
        doc.serialize(ser)
    }
}

impl AutomatonDescriptor {
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: DescriptorDoc = serde_json::from_str(text)?;
        let p = doc.presentation;
        let s = doc.internal_dim;
        let label = |name: &str| {
            p.parse_label(name).ok_or_else(|| QcaError::InvalidDescriptor(format!("unknown label `{name}`")))
        };
        let mut entries = BTreeMap::new();
        for (name, v) in &doc.matrices {
            entries.insert(label(name)?, matrix_from_pairs(v, s)?);
        }
        let rule = TransitionRule::new(s, entries)?;
        let isotropy = match doc.isotropy {
            None => None,
            Some(items) => {
                let mut elements = Vec::with_capacity(items.len());
                for it in items {
                    let mut permutation = BTreeMap::new();
                    for (a, b) in &it.permutation {
                        permutation.insert(label(a)?, label(b)?);
                    }
                    elements.push(IsotropyElement { permutation, unitary: matrix_from_pairs(&it.unitary, s)? });
                }
                Some(IsotropyGroup { elements })
            }
        };
        AutomatonDescriptor::new(p, rule, isotropy)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cayley::{build_presentation, PresentationKind};
    use crate::linalg::{pauli, IM, ONE};

    fn projector(i: usize) -> CMat {
        let mut m = zeros(2);
        m[(i, i)] = ONE;
        m
    }

    fn weyl_line() -> AutomatonDescriptor {
        let p = build_presentation(PresentationKind::Line);
        let entries = BTreeMap::from([(Label::Gen(0), projector(0)), (Label::Inv(0), projector(1))]);
        AutomatonDescriptor::new(p, TransitionRule::new(2, entries).unwrap(), None).unwrap()
    }

    #[test]
    fn line_k_operator_quarter_turn() {
        let a = weyl_line();
        let ak = a.k_operator(&[PI / 2.0]);
        let expect = -pauli()[2].clone() * IM;
        assert!(max_norm(&(ak - expect)) < 1e-15);
    }

    #[test]
    fn identity_rule_has_zero_residuals() {
        let p = build_presentation(PresentationKind::Bcc3d);
        let rule = TransitionRule::new(2, BTreeMap::from([(Label::Identity, identity(2))])).unwrap();
        let r = check_unitarity_conditions(&rule, &p);
        assert_eq!(r.max_residual(), 0.0);
        assert!(r.differences.is_empty());
    }

    #[test]
    fn single_non_unitary_entry_witness() {
        let p = build_presentation(PresentationKind::Line);
        let a = identity(2) * C64::from(1.1);
        let rule = TransitionRule::new(2, BTreeMap::from([(Label::Gen(0), a.clone())])).unwrap();
        let r = check_unitarity_conditions(&rule, &p);
        let expect = max_norm(&(a.adjoint() * &a - identity(2)));
        assert!((r.completeness_left - expect).abs() < 1e-15);
        assert!(r.completeness_left > 0.2);
    }

    #[test]
    fn line_rule_unitary() {
        let a = weyl_line();
        assert!(check_unitarity_conditions(&a.rule, &a.presentation).passes(ALGEBRAIC_TOL));
    }

    #[test]
    fn trivial_isotropy_zero_residual() {
        let mut a = weyl_line();
        a.isotropy = Some(IsotropyGroup::trivial(2));
        let r = check_covariance(&a).unwrap();
        assert_eq!(r.residual, 0.0);
        assert!(r.closed);
        assert!(r.transitive);
    }

    #[test]
    fn missing_isotropy_is_error() {
        assert!(matches!(check_covariance(&weyl_line()), Err(QcaError::MissingIsotropy)));
    }

    #[test]
    fn extract_identity() {
        let p = build_presentation(PresentationKind::Square2d);
        let support = [Label::Identity, Label::Gen(0), Label::Inv(0), Label::Gen(1), Label::Inv(1)];
        let rule = extract_transition_matrices(|_| identity(2), &p, &support, 1e-12).unwrap();
        assert_eq!(rule.entries.len(), 1);
        assert!(max_norm(&(&rule.entries[&Label::Identity] - identity(2))) < 1e-15);
    }

    #[test]
    fn extract_rejects_missing_support() {
        let p = build_presentation(PresentationKind::Line);
        let f = |k: &[f64]| identity(2) * C64::from_polar(1.0, -2.0 * k[0]);
        let support = [Label::Identity, Label::Gen(0), Label::Inv(0)];
        assert!(matches!(extract_transition_matrices(f, &p, &support, 1e-12), Err(QcaError::SupportMismatch { .. })));
    }

    #[test]
    fn spectrum_rejects_non_unitary() {
        let p = build_presentation(PresentationKind::Line);
        let rule = TransitionRule::new(2, BTreeMap::from([(Label::Gen(0), identity(2) * C64::from(0.5))])).unwrap();
        let a = AutomatonDescriptor::new(p, rule, None).unwrap();
        assert!(matches!(spectrum(&a, &[0.1]), Err(QcaError::NotUnitary { .. })));
    }

    #[test]
    fn json_round_trip() {
        let mut a = weyl_line();
        a.isotropy = Some(IsotropyGroup::trivial(2));
        let text = a.to_json().unwrap();
        let b = AutomatonDescriptor::from_json(&text).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_wrong_matrix_size() {
        let r = TransitionRule::new(2, BTreeMap::from([(Label::Identity, identity(3))]));
        assert!(matches!(r, Err(QcaError::DimensionMismatch(_))));
    }
}
