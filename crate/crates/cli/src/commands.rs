use std::fs::{self, File};
use std::io::{BufReader, BufWriter};
use std::path::PathBuf;

use clap::{Args, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use qca_core::automaton::{check_covariance, check_unitarity_conditions, CovarianceReport};
use qca_core::cayley::{build_presentation, make_tiling, CayleyPresentation, PresentationKind};
use qca_core::dirac::{dirac_dispersion, dirac_search as search};
use qca_core::evolution::{
    apply_tiling, circular_moments, make_packet, measure_packet_velocity, read_snapshot, step_direct, step_spectral,
    tile_descriptor, write_snapshot, Branch, FieldState, LatticeSpec, SpectralPropagator, WavePacketSpec,
};
use qca_core::linalg::{unitarity_residual, unitary_eigen, C64};
use qca_core::maxwell::{
    fock_commutator_deviation, generator_deviation, maxwell_residual, polarization_basis, FockDeviation, MaxwellReport,
    ModePair,
};
use qca_core::weyl::{dispersion as weyl_dispersion, WeylVariant};
use qca_core::{AutomatonDescriptor, Builtin};

use crate::output::{self, num, Csv};
use crate::{Common, Emit, Failure, Source};

type Outcome = Result<(), Failure>;

fn parse_floats(s: &str) -> Result<Vec<f64>, Failure> {
    s.split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|_| Failure::Usage(format!("`{x}` is not a number"))))
        .collect()
}

fn parse_ints(s: &str) -> Result<Vec<i64>, Failure> {
    s.split(',')
        .map(|x| x.trim().parse::<i64>().map_err(|_| Failure::Usage(format!("`{x}` is not an integer"))))
        .collect()
}

fn json_only(common: &Common, command: &str) -> Outcome {
    if common.emit == Emit::Csv {
        return Err(Failure::Usage(format!("`{command}` has no CSV output")));
    }
    Ok(())
}

fn emit_json<T: Serialize>(common: &Common, command: &str, body: &T) -> Outcome {
    output::write(common.output.as_deref(), &output::json(command, body)?)?;
    Ok(())
}

struct Resolved {
    name: String,
    builtin: Option<Builtin>,
    descriptor: AutomatonDescriptor,
}

fn resolve(src: &Source) -> Result<Resolved, Failure> {
    match (&src.builtin, &src.descriptor) {
        (Some(name), None) => {
            let name = match src.dirac && !name.starts_with("dirac-") {
                true => format!("dirac-{name}"),
                false => name.clone(),
            };
            let b = Builtin::from_name(&name, src.theta, src.mass).map_err(|e| Failure::Usage(e.to_string()))?;
            Ok(Resolved { name: b.name(), builtin: Some(b), descriptor: b.descriptor() })
        }
        (None, Some(path)) if !src.dirac => {
            let text = fs::read_to_string(path)?;
            let descriptor = AutomatonDescriptor::from_json(&text)?;
            Ok(Resolved { name: path.display().to_string(), builtin: None, descriptor })
        }
        (None, Some(_)) => Err(Failure::Usage("--dirac applies to built-ins only".into())),
        _ => Err(Failure::Usage("give exactly one of --builtin or --descriptor".into())),
    }
}

/// Uniform zone samples: uniform in a bounding box, folded into the zone.
fn zone_samples(p: &CayleyPresentation, n: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let r = 2.0 * p.zone.bounds.iter().map(|h| h.offset).fold(0.0, f64::max);
    (0..n).map(|_| p.reduce_to_zone(&(0..p.dimension).map(|_| rng.gen_range(-r..r)).collect::<Vec<_>>())).collect()
}

// ---------------------------------------------------------------- graph

#[derive(Args)]
pub struct GraphArgs {
    /// line, square_2d or bcc_3d.
    #[arg(long, alias = "kind", default_value = "bcc_3d")]
    presentation: String,
    /// Lists group elements within this word distance of the identity.
    #[arg(long, default_value_t = 1)]
    radius: usize,
    #[command(flatten)]
    common: Common,
}

#[derive(Serialize)]
struct BallEntry {
    coords: Vec<i64>,
    distance: usize,
}

#[derive(Serialize)]
struct GraphReport {
    presentation: CayleyPresentation,
    basis: Vec<Vec<f64>>,
    cell_volume: f64,
    zone_inradius: f64,
    radius: usize,
    ball: Vec<BallEntry>,
}

pub fn graph(a: GraphArgs) -> Outcome {
    json_only(&a.common, "graph")?;
    let kind: PresentationKind = a
        .presentation
        .parse()
        .map_err(|_| Failure::Usage(format!("unknown presentation `{}` (line, square_2d, bcc_3d)", a.presentation)))?;
    let p = build_presentation(kind);
    let d = p.dimension;
    let r = a.radius as i64;
    let side = (2 * r + 1) as usize;
    let mut ball = Vec::new();
    for idx in 0..side.pow(d as u32) {
        let mut rem = idx;
        let mut x = vec![0i64; d];
        for c in (0..d).rev() {
            x[c] = (rem % side) as i64 - r;
            rem /= side;
        }
        // a word of length ℓ moves every free coordinate by at most ℓ
        if let Ok(dist) = p.word_metric(&vec![0; d], &x, a.radius) {
            ball.push(BallEntry { coords: x, distance: dist });
        }
    }
    let report = GraphReport {
        basis: p.basis(),
        cell_volume: p.cell_volume(),
        zone_inradius: p.zone.inradius(),
        radius: a.radius,
        ball,
        presentation: p,
    };
    emit_json(&a.common, "graph", &report)
}

// ------------------------------------------------------------- validate

#[derive(Args)]
pub struct ValidateArgs {
    #[command(flatten)]
    source: Source,
    /// Random zone points at which A_k is checked.
    #[arg(long, default_value_t = 1000)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1e-12)]
    tolerance: f64,
    #[command(flatten)]
    common: Common,
}

#[derive(Serialize)]
struct ValidateReport {
    automaton: String,
    dimension: usize,
    internal_dim: usize,
    tolerance: f64,
    completeness_left: f64,
    completeness_right: f64,
    max_difference_residual: f64,
    samples: usize,
    max_k_unitarity_residual: f64,
    covariance: Option<CovarianceReport>,
    passed: bool,
}

pub fn validate(a: ValidateArgs) -> Outcome {
    json_only(&a.common, "validate")?;
    let r = resolve(&a.source)?;
    let d = &r.descriptor;
    let u = check_unitarity_conditions(&d.rule, &d.presentation);
    let ks = zone_samples(&d.presentation, a.samples, a.seed);
    let worst_k = ks.par_iter().map(|k| unitarity_residual(&d.k_operator(k))).reduce(|| 0.0, f64::max);
    let covariance = match d.isotropy {
        Some(_) => Some(check_covariance(d)?),
        None => None,
    };
    let max_diff = u.differences.iter().map(|x| x.left.max(x.right)).fold(0.0, f64::max);
    let passed =
        u.passes(a.tolerance) && worst_k < a.tolerance && covariance.as_ref().is_none_or(|c| c.passes(a.tolerance));
    let report = ValidateReport {
        automaton: r.name,
        dimension: d.presentation.dimension,
        internal_dim: d.internal_dim(),
        tolerance: a.tolerance,
        completeness_left: u.completeness_left,
        completeness_right: u.completeness_right,
        max_difference_residual: max_diff,
        samples: a.samples,
        max_k_unitarity_residual: worst_k,
        covariance,
        passed,
    };
    emit_json(&a.common, "validate", &report)?;
    if passed {
        Ok(())
    } else {
        Err(Failure::Validation(format!("residuals exceed {:e}", a.tolerance)))
    }
}

// ----------------------------------------------------------- dispersion

#[derive(Args)]
pub struct DispersionArgs {
    #[command(flatten)]
    source: Source,
    /// Grid points per free coordinate.
    #[arg(long, default_value_t = 32)]
    grid: usize,
    #[command(flatten)]
    common: Common,
}

#[derive(Serialize)]
struct DispersionRow {
    k: Vec<f64>,
    omega_plus: f64,
    omega_minus: f64,
    velocity: Vec<f64>,
}

#[derive(Serialize)]
struct DispersionReport<'a> {
    automaton: String,
    grid: usize,
    rows: &'a [DispersionRow],
}

/// Highest eigenphase of A_k and its central-difference gradient, for
/// descriptors without a closed form. Where bands touch the gradient is the
/// mean of the one-sided slopes.
fn numeric_row(d: &AutomatonDescriptor, k: Vec<f64>) -> DispersionRow {
    let top = |k: &[f64]| *unitary_eigen(&d.k_operator(k)).phases.last().expect("s > 0");
    let bottom = unitary_eigen(&d.k_operator(&k)).phases[0];
    let h = 1e-6;
    let velocity = (0..k.len())
        .map(|j| {
            let mut kp = k.clone();
            let mut km = k.clone();
            kp[j] += h;
            km[j] -= h;
            (top(&kp) - top(&km)) / (2.0 * h)
        })
        .collect();
    DispersionRow { omega_plus: top(&k), omega_minus: bottom, velocity, k }
}

pub fn dispersion(a: DispersionArgs) -> Outcome {
    if a.grid == 0 {
        return Err(Failure::Usage("--grid must be positive".into()));
    }
    let r = resolve(&a.source)?;
    let p = &r.descriptor.presentation;
    let dim = p.dimension;
    let n = a.grid;
    let total = n.pow(dim as u32);
    let rows: Vec<DispersionRow> = (0..total)
        .into_par_iter()
        .map(|idx| {
            let mut rem = idx;
            let mut theta = vec![0.0; dim];
            for c in (0..dim).rev() {
                let m = rem % n;
                rem /= n;
                theta[c] = -std::f64::consts::PI + 2.0 * std::f64::consts::PI * m as f64 / n as f64;
            }
            let k = p.reduce_to_zone(&p.cartesian_from_phases(&theta));
            match r.builtin {
                Some(Builtin::Weyl(v)) => {
                    let s = weyl_dispersion(&v, &k);
                    DispersionRow { omega_plus: s.omega[0], omega_minus: s.omega[1], velocity: s.group_velocity, k }
                }
                Some(Builtin::Dirac(dd)) => {
                    let s = dirac_dispersion(&dd, &k);
                    DispersionRow { omega_plus: s.omega, omega_minus: -s.omega, velocity: s.group_velocity, k }
                }
                None => numeric_row(&r.descriptor, k),
            }
        })
        .collect();
    let text = match a.common.emit {
        Emit::Json => output::json("dispersion", &DispersionReport { automaton: r.name, grid: n, rows: &rows })?,
        Emit::Csv => {
            let mut header: Vec<String> = (1..=dim).map(|j| format!("k{j}")).collect();
            header.push("omega_plus".into());
            header.push("omega_minus".into());
            header.extend((1..=dim).map(|j| format!("v{j}")));
            let mut csv = Csv::new(&header);
            for row in &rows {
                let mut f: Vec<String> = row.k.iter().map(|&x| num(x)).collect();
                f.push(num(row.omega_plus));
                f.push(num(row.omega_minus));
                f.extend(row.velocity.iter().map(|&x| num(x)));
                csv.row(&f);
            }
            csv.finish()
        }
    };
    output::write(a.common.output.as_deref(), &text)?;
    Ok(())
}

// --------------------------------------------------------------- evolve

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Spectral,
    Direct,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BranchArg {
    Plus,
    Minus,
}

/// Packet given as `k0=a,b,c,sigma=s[,x0=i,j,k]`.
struct PacketArg {
    k0: Vec<f64>,
    sigma: Option<f64>,
    x0: Option<Vec<i64>>,
}

fn parse_packet(s: &str) -> Result<PacketArg, Failure> {
    let mut fields: Vec<(String, Vec<String>)> = Vec::new();
    for tok in s.split(',') {
        let tok = tok.trim();
        match tok.split_once('=') {
            Some((key, val)) => fields.push((key.to_string(), vec![val.to_string()])),
            None => match fields.last_mut() {
                Some((_, vals)) => vals.push(tok.to_string()),
                None => return Err(Failure::Usage(format!("--packet: expected key=value, got `{tok}`"))),
            },
        }
    }
    let mut out = PacketArg { k0: Vec::new(), sigma: None, x0: None };
    for (key, vals) in fields {
        let joined = vals.join(",");
        match key.as_str() {
            "k0" => out.k0 = parse_floats(&joined)?,
            "sigma" => {
                let v = parse_floats(&joined)?;
                if v.len() != 1 {
                    return Err(Failure::Usage("--packet: sigma takes one value".into()));
                }
                out.sigma = Some(v[0]);
            }
            "x0" => out.x0 = Some(parse_ints(&joined)?),
            other => return Err(Failure::Usage(format!("--packet: unknown key `{other}` (k0, sigma, x0)"))),
        }
    }
    if out.k0.is_empty() {
        return Err(Failure::Usage("--packet needs k0".into()));
    }
    Ok(out)
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Observables {
    Json,
    Csv,
}

#[derive(Serialize)]
struct ObservableRow {
    time: i64,
    norm: f64,
    mean_position: Vec<f64>,
    spread: Vec<f64>,
}

fn observe(st: &FieldState) -> ObservableRow {
    let (mean_position, spread) = circular_moments(st);
    ObservableRow { time: st.time, norm: st.norm(), mean_position, spread }
}

#[derive(Args)]
pub struct EvolveArgs {
    #[command(flatten)]
    source: Source,
    /// Lattice sizes per free coordinate, comma separated.
    #[arg(long)]
    sizes: String,
    #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
    steps: i64,
    #[arg(long, value_enum, default_value = "spectral")]
    method: Method,
    /// Packet centre in wave-vector space (Cartesian, comma separated).
    #[arg(long, allow_hyphen_values = true)]
    packet_k: Option<String>,
    /// Packet width: standard deviation of |ψ̂(k)|².
    #[arg(long, default_value_t = 0.05)]
    sigma: f64,
    /// Packet centre site in free coordinates; defaults to the middle.
    #[arg(long, allow_hyphen_values = true)]
    center: Option<String>,
    #[arg(long, value_enum, default_value = "plus")]
    branch: BranchArg,
    /// Compact packet form `k0=a,b,c,sigma=s[,x0=i,j,k]`.
    #[arg(long, allow_hyphen_values = true, conflicts_with_all = ["packet_k", "center"])]
    packet: Option<String>,
    /// Records norm, mean and spread after every step.
    #[arg(long, value_enum)]
    observables: Option<Observables>,
    /// Initial state snapshot; a seeded random state is used otherwise.
    #[arg(long, conflicts_with_all = ["packet_k", "packet"])]
    input: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Writes the final state as a binary snapshot.
    #[arg(long)]
    snapshot: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

#[derive(Serialize)]
struct EvolveReport {
    automaton: String,
    sizes: Vec<usize>,
    method: &'static str,
    initial: &'static str,
    steps: i64,
    time: i64,
    norm: f64,
    mean_position: Vec<f64>,
    spread: Vec<f64>,
    velocity: Option<Vec<f64>>,
    velocity_error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    observables: Option<Vec<ObservableRow>>,
}

pub fn evolve(a: EvolveArgs) -> Outcome {
    let csv = a.common.emit == Emit::Csv || a.observables == Some(Observables::Csv);
    let r = resolve(&a.source)?;
    let d = &r.descriptor;
    let sizes: Vec<usize> = parse_ints(&a.sizes)?
        .into_iter()
        .map(|x| usize::try_from(x).map_err(|_| Failure::Usage("sizes must be positive".into())))
        .collect::<Result<_, _>>()?;
    if sizes.len() != d.presentation.dimension {
        return Err(Failure::Usage(format!(
            "{} sizes given for a {}-dimensional lattice",
            sizes.len(),
            d.presentation.dimension
        )));
    }
    let lattice = LatticeSpec::new(d.presentation.clone(), sizes.clone())?;
    let packet = match (&a.packet, &a.packet_k) {
        (Some(p), _) => Some(parse_packet(p)?),
        (None, Some(k)) => {
            Some(PacketArg { k0: parse_floats(k)?, sigma: None, x0: a.center.as_deref().map(parse_ints).transpose()? })
        }
        (None, None) => None,
    };
    let (initial, kind) = if let Some(p) = packet {
        let center_k = p.k0;
        let center_x = p.x0.unwrap_or_else(|| sizes.iter().map(|&l| l as i64 / 2).collect());
        let branch = match a.branch {
            BranchArg::Plus => Branch::Plus,
            BranchArg::Minus => Branch::Minus,
        };
        let spec = WavePacketSpec { center_k, sigma_k: p.sigma.unwrap_or(a.sigma), center_x, branch };
        (make_packet(&spec, d, &lattice)?, "packet")
    } else if let Some(path) = &a.input {
        let st = read_snapshot(&d.presentation, BufReader::new(File::open(path)?))?;
        if st.lattice.sizes != sizes {
            return Err(Failure::Usage("snapshot lattice differs from --sizes".into()));
        }
        (st, "snapshot")
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
        (FieldState::random(lattice, d.internal_dim(), &mut rng), "random")
    };
    if a.method == Method::Direct && a.steps < 0 {
        return Err(Failure::Usage("direct evolution needs a non-negative step count".into()));
    }
    let record = a.observables.is_some() || csv;
    let mut series = record.then(|| vec![observe(&initial)]);
    let fin = match (a.method, &mut series) {
        (Method::Spectral, None) => step_spectral(&initial, d, a.steps)?,
        (Method::Spectral, Some(rows)) => {
            let one = SpectralPropagator::new(d, &initial.lattice, a.steps.signum())?;
            let mut st = initial.clone();
            for _ in 0..a.steps.unsigned_abs() {
                st = one.apply(&st)?;
                rows.push(observe(&st));
            }
            st
        }
        (Method::Direct, rows) => {
            let mut st = initial.clone();
            for _ in 0..a.steps {
                st = step_direct(&st, d)?;
                if let Some(rows) = rows.as_mut() {
                    rows.push(observe(&st));
                }
            }
            st
        }
    };
    let (mean, spread) = circular_moments(&fin);
    let (velocity, velocity_error) = if kind == "packet" && a.steps != 0 {
        match measure_packet_velocity(&initial, &fin, a.steps) {
            Ok(v) => (Some(v), None),
            Err(e) => (None, Some(e.to_string())),
        }
    } else {
        (None, None)
    };
    if let Some(path) = &a.snapshot {
        write_snapshot(&fin, BufWriter::new(File::create(path)?))?;
    }
    if csv {
        let dim = d.presentation.dimension;
        let mut header = vec!["time".to_string(), "norm".to_string()];
        header.extend((1..=dim).map(|i| format!("mean{i}")));
        header.extend((1..=dim).map(|i| format!("spread{i}")));
        let mut table = Csv::new(&header);
        for row in series.unwrap_or_default() {
            let mut f = vec![row.time.to_string(), num(row.norm)];
            f.extend(row.mean_position.iter().chain(&row.spread).map(|&x| num(x)));
            table.row(&f);
        }
        output::write(a.common.output.as_deref(), &table.finish())?;
        return Ok(());
    }
    let report = EvolveReport {
        automaton: r.name,
        sizes,
        method: match a.method {
            Method::Spectral => "spectral",
            Method::Direct => "direct",
        },
        initial: kind,
        steps: a.steps,
        time: fin.time,
        norm: fin.norm(),
        mean_position: mean,
        spread,
        velocity,
        velocity_error,
        observables: series,
    };
    emit_json(&a.common, "evolve", &report)
}

// -------------------------------------------------------------- maxwell

#[derive(Args)]
pub struct MaxwellArgs {
    /// Three-dimensional Weyl variant driving both fields.
    #[arg(long, default_value = "bcc-a-plus")]
    variant: String,
    /// Wave vector, comma separated.
    #[arg(long, allow_hyphen_values = true)]
    k: String,
    #[arg(long, default_value_t = 1.0)]
    time: f64,
    #[arg(long, default_value_t = 1e-3)]
    dt: f64,
    /// Seed of the random spinor amplitudes.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    common: Common,
}

#[derive(Serialize)]
struct MaxwellOut {
    variant: &'static str,
    #[serde(flatten)]
    report: MaxwellReport,
    /// |2n_{k/2} − J k| / |J k| with J the first-order helicity map.
    generator_deviation: f64,
}

pub fn maxwell(a: MaxwellArgs) -> Outcome {
    json_only(&a.common, "maxwell")?;
    let v = WeylVariant::from_name(&a.variant, 0.0)
        .filter(|v| v.dimension() == 3)
        .ok_or_else(|| Failure::Usage(format!("`{}` is not a three-dimensional Weyl variant", a.variant)))?;
    let k = parse_floats(&a.k)?;
    if k.len() != 3 {
        return Err(Failure::Usage("--k needs three components".into()));
    }
    if a.dt.is_nan() || a.dt <= 0.0 {
        return Err(Failure::Usage("--dt must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let mut c = || C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    let pair = ModePair { psi: [c(), c()], phi: [c(), c()] };
    let report = maxwell_residual(&v, &pair, &k, a.time, a.dt)?;
    let out = MaxwellOut { variant: v.name(), generator_deviation: generator_deviation(&v, &k)?, report };
    emit_json(&a.common, "maxwell", &out)
}

// ----------------------------------------------------------------- fock

#[derive(Args)]
pub struct FockArgs {
    /// Wave-vector cells N in the smearing region; the Fock space has 4N modes.
    #[arg(long)]
    modes: usize,
    /// Largest number of filled cells; every fill from 0 to M is reported.
    #[arg(long, default_value_t = 1)]
    fill: usize,
    /// Takes the polarization pair from n_k of this variant instead of x̂, ŷ.
    #[arg(long)]
    variant: Option<String>,
    #[arg(long, allow_hyphen_values = true, requires = "variant")]
    k: Option<String>,
    #[command(flatten)]
    common: Common,
}

#[derive(Serialize)]
struct FockReport<'a> {
    cells: usize,
    fermionic_modes: usize,
    polarization: [[f64; 3]; 2],
    rows: &'a [FockDeviation],
}

pub fn fock(a: FockArgs) -> Outcome {
    if a.fill > a.modes {
        return Err(Failure::Usage("--fill cannot exceed --modes".into()));
    }
    let polarization = match (&a.variant, &a.k) {
        (Some(name), Some(k)) => {
            let v = WeylVariant::from_name(name, 0.0)
                .ok_or_else(|| Failure::Usage(format!("unknown Weyl variant `{name}`")))?;
            let (u1, u2) = polarization_basis(&v, &parse_floats(k)?)?;
            [u1, u2]
        }
        (Some(_), None) => return Err(Failure::Usage("--variant needs --k".into())),
        _ => [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]],
    };
    let cases: Vec<(usize, usize, usize)> =
        (0..=a.fill).flat_map(|m| [(m, 0, 0), (m, 0, 1), (m, 1, 0), (m, 1, 1)]).collect();
    let rows = cases
        .par_iter()
        .map(|&(m, i, j)| fock_commutator_deviation(a.modes, m, polarization, i, j))
        .collect::<Result<Vec<_>, _>>()?;
    let text = match a.common.emit {
        Emit::Json => output::json(
            "fock",
            &FockReport { cells: a.modes, fermionic_modes: 4 * a.modes, polarization, rows: &rows },
        )?,
        Emit::Csv => {
            let header: Vec<String> = ["cells", "fill", "i", "j", "epsilon", "deviation"].map(String::from).to_vec();
            let mut csv = Csv::new(&header);
            for r in &rows {
                csv.row(&[
                    r.cells.to_string(),
                    r.fill.to_string(),
                    (r.i + 1).to_string(),
                    (r.j + 1).to_string(),
                    num(r.epsilon),
                    num(r.deviation),
                ]);
            }
            csv.finish()
        }
    };
    output::write(a.common.output.as_deref(), &text)?;
    Ok(())
}

// ----------------------------------------------------------------- tile

#[derive(Args)]
pub struct TileArgs {
    #[command(flatten)]
    source: Source,
    /// Sublattice basis rows in free coordinates, e.g. "2,0;0,2".
    #[arg(long, allow_hyphen_values = true)]
    basis: String,
    /// Checks the commuting square on a random state of this fine lattice.
    #[arg(long)]
    sizes: Option<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Writes the coarse-grained descriptor as JSON.
    #[arg(long)]
    descriptor_out: Option<PathBuf>,
    #[arg(long, default_value_t = 1e-12)]
    tolerance: f64,
    #[command(flatten)]
    common: Common,
}

#[derive(Serialize)]
struct TileReport {
    automaton: String,
    basis: Vec<Vec<i64>>,
    index: usize,
    coset_representatives: Vec<Vec<i64>>,
    coarse_internal_dim: usize,
    coarse_generators: Vec<String>,
    coarse_unitarity_residual: f64,
    commuting_square_residual: Option<f64>,
    passed: bool,
}

pub fn tile(a: TileArgs) -> Outcome {
    json_only(&a.common, "tile")?;
    let r = resolve(&a.source)?;
    let d = &r.descriptor;
    let basis = a.basis.split(';').map(parse_ints).collect::<Result<Vec<_>, _>>()?;
    let t = make_tiling(&d.presentation, basis.clone())?;
    let coarse = tile_descriptor(d, &t)?;
    let unitarity = check_unitarity_conditions(&coarse.rule, &coarse.presentation).max_residual();
    let square = match &a.sizes {
        Some(s) => {
            let sizes: Vec<usize> = parse_ints(s)?.into_iter().map(|x| x.max(0) as usize).collect();
            let lattice = LatticeSpec::new(d.presentation.clone(), sizes)?;
            let s0 = FieldState::random(lattice, d.internal_dim(), &mut ChaCha8Rng::seed_from_u64(a.seed));
            let lhs = apply_tiling(&step_direct(&s0, d)?, &t, &coarse.presentation)?;
            let rhs = step_direct(&apply_tiling(&s0, &t, &coarse.presentation)?, &coarse)?;
            Some(lhs.distance(&rhs))
        }
        None => None,
    };
    if let Some(path) = &a.descriptor_out {
        fs::write(path, coarse.to_json()? + "\n")?;
    }
    let passed = unitarity < a.tolerance && square.is_none_or(|x| x < a.tolerance);
    let report = TileReport {
        automaton: r.name,
        index: t.index(),
        coset_representatives: t.coset_reps.clone(),
        basis,
        coarse_internal_dim: coarse.internal_dim(),
        coarse_generators: coarse.presentation.generators.iter().map(|g| g.label.clone()).collect(),
        coarse_unitarity_residual: unitarity,
        commuting_square_residual: square,
        passed,
    };
    emit_json(&a.common, "tile", &report)?;
    if passed {
        Ok(())
    } else {
        Err(Failure::Validation(format!("tiling residuals exceed {:e}", a.tolerance)))
    }
}

// --------------------------------------------------------- dirac-search

#[derive(Args)]
pub struct DiracSearchArgs {
    #[arg(long, default_value = "bcc-a-plus")]
    variant: String,
    /// Random restarts of the least-squares search.
    #[arg(long, alias = "samples", default_value_t = 200)]
    restarts: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 50)]
    k_samples: usize,
    /// Includes the per-restart outcomes.
    #[arg(long)]
    outcomes: bool,
    #[command(flatten)]
    common: Common,
}

pub fn dirac_search(a: DiracSearchArgs) -> Outcome {
    json_only(&a.common, "dirac-search")?;
    let v = WeylVariant::from_name(&a.variant, 0.0)
        .ok_or_else(|| Failure::Usage(format!("unknown Weyl variant `{}`", a.variant)))?;
    let mut report = search(&v, a.restarts, a.seed, a.k_samples);
    if !a.outcomes {
        report.outcomes.clear();
    }
    if report.other > 0 {
        eprintln!("warning: {} converged couplings are not conjugate to the mass coupling", report.other);
    }
    emit_json(&a.common, "dirac-search", &report)
}
