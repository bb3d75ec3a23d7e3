//! Instance generation, the named instances, and the on-disk format.
//!
//! Instance files are UTF-8 JSON:
//!
//! ```json
//! {
//!   "format_version": 1,
//!   "layout": [{"label": "A", "dim": 2}, {"label": "B", "dim": 2}],
//!   "kind": "single_party",
//!   "marginals": [
//!     {"support": ["A"], "matrix": [["0.5", "0.0"], ["0.0", "0.0"], ["0.0", "0.0"], ["0.5", "0.0"]]}
//!   ],
//!   "metadata": {"generator": "..."}
//! }
//! ```
//!
//! `matrix` is row-major; each entry is a `[re, im]` pair of shortest
//! round-trip decimal strings, so a save/load cycle is bit-exact.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::bounds::{interface_deviations, InstanceKind, Marginal, QmpInstance, CONSISTENCY_TOL};
use crate::error::{Error, Result, Violation};
use crate::qstate::{partial_trace, validate_density, CMatrix, CVector, DensityMatrix, PureState, SystemLayout, C64};

pub const FORMAT_VERSION: u32 = 1;

/// Tolerance for density-matrix validation of loaded and generated states.
pub const LOAD_TOL: f64 = 1e-9;

/// Seeded generator used for everything random in this crate.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Standard complex gaussian: real and imaginary parts independent `N(0, 1/2)`.
pub fn complex_gaussian<R: rand::Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    C64::new(re, im).unscale(std::f64::consts::SQRT_2)
}

pub fn ginibre_matrix<R: rand::Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    // column-major fill order is part of the seeded output
    CMatrix::from_fn(rows, cols, |_, _| complex_gaussian(rng))
}

/// `G G† / tr(G G†)` for a `dim × rank` Ginibre matrix `G`, on the layout's space.
pub fn ginibre_state<R: rand::Rng + ?Sized>(layout: &SystemLayout, rank: usize, rng: &mut R) -> Result<DensityMatrix> {
    let dim = layout.total_dim();
    if rank == 0 || rank > dim {
        return Err(Error::BadRank { dim, rank });
    }
    let g = ginibre_matrix(dim, rank, rng);
    let w = &g * g.adjoint();
    let tr = w.trace().re;
    validate_density(w.unscale(tr), layout, LOAD_TOL)
}

/// Seeded Ginibre state on a single `dim`-level system labelled `A1`.
pub fn gen_ginibre_density(dim: usize, rank: usize, seed: u64) -> Result<DensityMatrix> {
    let layout = SystemLayout::numbered(&[dim])?;
    ginibre_state(&layout, rank, &mut seeded_rng(seed))
}

/// Haar-distributed pure state (a normalized complex gaussian vector).
pub fn haar_pure_state<R: rand::Rng + ?Sized>(layout: &SystemLayout, rng: &mut R) -> Result<PureState> {
    let d = layout.total_dim();
    PureState::normalized(CVector::from_fn(d, |_, _| complex_gaussian(rng)), layout)
}

/// Haar-distributed unitary from the phase-corrected QR decomposition of a Ginibre matrix.
pub fn haar_unitary<R: rand::Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix {
    let qr = ginibre_matrix(dim, dim, rng).qr();
    let (mut q, r) = qr.unpack();
    for j in 0..dim {
        let d = r[(j, j)];
        let n = d.norm();
        if n > 0.0 {
            let phase = d / n;
            for i in 0..dim {
                q[(i, j)] *= phase;
            }
        }
    }
    q
}

fn labels_of(layout: &SystemLayout) -> Vec<String> {
    layout.labels().iter().map(|s| s.to_string()).collect()
}

/// Marginals of `joint` in the requested pattern; consistent by construction.
pub fn instance_from_joint(joint: &DensityMatrix, kind: InstanceKind) -> Result<QmpInstance> {
    let layout = joint.layout().clone();
    if layout.len() < 2 {
        return Err(Error::TooFewSubsystems(layout.len()));
    }
    let labels = labels_of(&layout);
    let supports: Vec<Vec<String>> = match kind {
        InstanceKind::Chain => labels.windows(2).map(|w| w.to_vec()).collect(),
        InstanceKind::SingleParty => labels.iter().map(|l| vec![l.clone()]).collect(),
        InstanceKind::General => {
            return Err(Error::SupportMismatch(
                "general instances need explicit supports".into(),
            ))
        }
    };
    let marginals = supports
        .into_iter()
        .map(|support| {
            let state = partial_trace(joint, &support)?;
            Ok(Marginal { support, state })
        })
        .collect::<Result<Vec<_>>>()?;
    QmpInstance::new(layout, marginals, kind)
}

/// Random feasible instance: marginals of a seeded Ginibre joint state on `A1…An`.
pub fn random_instance(dims: &[usize], kind: InstanceKind, rank: Option<usize>, seed: u64) -> Result<QmpInstance> {
    let layout = SystemLayout::numbered(dims)?;
    let rank = rank.unwrap_or_else(|| layout.total_dim());
    let joint = ginibre_state(&layout, rank, &mut seeded_rng(seed))?;
    Ok(instance_from_joint(&joint, kind)?
        .with_metadata("generator", "ginibre")
        .with_metadata("seed", seed.to_string())
        .with_metadata("rank", rank.to_string()))
}

/// The named instances.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Builtin {
    /// Singlets on both AB and BC; no joint state exists.
    SingletMonogamy,
    /// `I/4` on AB and BC.
    MaximallyMixedQubits,
    /// Reductions of `(|000⟩ + |111⟩)/√2`.
    GhzChain,
    /// Reductions of `|000⟩`.
    ProductPure,
    /// Reductions of a seeded Haar-random pure three-qubit state.
    HaarUnique(u64),
}

impl Builtin {
    pub const FIXED: [Builtin; 4] = [
        Builtin::SingletMonogamy,
        Builtin::MaximallyMixedQubits,
        Builtin::GhzChain,
        Builtin::ProductPure,
    ];
}

impl fmt::Display for Builtin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Builtin::SingletMonogamy => f.write_str("singlet_monogamy"),
            Builtin::MaximallyMixedQubits => f.write_str("maximally_mixed_qubits"),
            Builtin::GhzChain => f.write_str("ghz_chain"),
            Builtin::ProductPure => f.write_str("product_pure"),
            Builtin::HaarUnique(seed) => write!(f, "haar_unique({seed})"),
        }
    }
}

impl FromStr for Builtin {
    type Err = Error;

    /// Accepts `haar_unique(3)`, `haar_unique:3`, and bare `haar_unique` (seed 0).
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "singlet_monogamy" => return Ok(Builtin::SingletMonogamy),
            "maximally_mixed_qubits" => return Ok(Builtin::MaximallyMixedQubits),
            "ghz_chain" => return Ok(Builtin::GhzChain),
            "product_pure" => return Ok(Builtin::ProductPure),
            "haar_unique" => return Ok(Builtin::HaarUnique(0)),
            _ => {}
        }
        let seed = s
            .strip_prefix("haar_unique(")
            .and_then(|r| r.strip_suffix(')'))
            .or_else(|| s.strip_prefix("haar_unique:"))
            .ok_or_else(|| Error::UnknownBuiltin(s.to_string()))?;
        seed.trim()
            .parse()
            .map(Builtin::HaarUnique)
            .map_err(|_| Error::UnknownBuiltin(s.to_string()))
    }
}

fn abc() -> SystemLayout {
    SystemLayout::uniform(&["A", "B", "C"], 2).expect("static layout")
}

fn two_qubit_pure(amps: [f64; 4], labels: &[&str]) -> Result<DensityMatrix> {
    let layout = SystemLayout::uniform(labels, 2)?;
    let v = CVector::from_iterator(4, amps.iter().map(|&a| C64::new(a, 0.0)));
    Ok(PureState::new(v, &layout, 1e-12)?.density())
}

/// The canonical instance behind a builtin.
pub fn builtin_instance(which: Builtin) -> Result<QmpInstance> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let inst = match which {
        Builtin::SingletMonogamy => {
            let singlet = [0.0, s, -s, 0.0];
            let ab = two_qubit_pure(singlet, &["A", "B"])?;
            let bc = two_qubit_pure(singlet, &["B", "C"])?;
            QmpInstance::new(
                abc(),
                vec![
                    Marginal { support: vec!["A".into(), "B".into()], state: ab },
                    Marginal { support: vec!["B".into(), "C".into()], state: bc },
                ],
                InstanceKind::Chain,
            )?
            .with_metadata("description", "singlet on AB and on BC (monogamy)")
        }
        Builtin::MaximallyMixedQubits => instance_from_joint(&DensityMatrix::maximally_mixed(&abc()), InstanceKind::Chain)?
            .with_metadata("description", "completely mixed two-qubit marginals"),
        Builtin::GhzChain => {
            let mut v = CVector::zeros(8);
            v[0] = C64::new(s, 0.0);
            v[7] = C64::new(s, 0.0);
            let ghz = PureState::new(v, &abc(), 1e-12)?;
            instance_from_joint(&ghz.density(), InstanceKind::Chain)?
                .with_metadata("description", "reductions of the three-qubit GHZ state")
        }
        Builtin::ProductPure => instance_from_joint(&PureState::basis(0, &abc())?.density(), InstanceKind::Chain)?
            .with_metadata("description", "reductions of |000>"),
        Builtin::HaarUnique(seed) => {
            let psi = haar_pure_state(&abc(), &mut seeded_rng(seed))?;
            instance_from_joint(&psi.density(), InstanceKind::Chain)?
                .with_metadata("description", "reductions of a Haar-random pure three-qubit state")
                .with_metadata("seed", seed.to_string())
        }
    };
    Ok(inst.with_metadata("generator", which.to_string()))
}

/// Looks up a builtin by name, e.g. `"singlet_monogamy"` or `"haar_unique(3)"`.
pub fn builtin(name: &str) -> Result<QmpInstance> {
    builtin_instance(name.parse()?)
}

#[derive(Debug, Serialize, Deserialize)]
struct LayoutEntry {
    label: String,
    dim: usize,
}

#[derive(Debug, Serialize, Deserialize)]
struct MarginalEntry {
    support: Vec<String>,
    matrix: Vec<[String; 2]>,
}

/// Raw, unvalidated contents of an instance file.
#[derive(Debug, Serialize, Deserialize)]
pub struct InstanceFile {
    format_version: u32,
    layout: Vec<LayoutEntry>,
    kind: String,
    marginals: Vec<MarginalEntry>,
    #[serde(default)]
    metadata: BTreeMap<String, String>,
}

fn encode(x: f64) -> String {
    // Debug is the shortest string that parses back to the same bits
    format!("{x:?}")
}

fn decode(s: &str) -> std::result::Result<f64, String> {
    let x: f64 = s.trim().parse().map_err(|_| format!("`{s}` is not a number"))?;
    if x.is_finite() {
        Ok(x)
    } else {
        Err(format!("`{s}` is not finite"))
    }
}

impl InstanceFile {
    pub fn from_instance(instance: &QmpInstance) -> Self {
        InstanceFile {
            format_version: FORMAT_VERSION,
            layout: instance
                .layout()
                .subsystems()
                .iter()
                .map(|s| LayoutEntry { label: s.label.clone(), dim: s.dim })
                .collect(),
            kind: instance.kind().as_str().to_string(),
            marginals: instance
                .marginals()
                .iter()
                .map(|m| {
                    let mat = m.state.matrix();
                    let n = mat.nrows();
                    let mut matrix = Vec::with_capacity(n * n);
                    for i in 0..n {
                        for j in 0..n {
                            let z = mat[(i, j)];
                            matrix.push([encode(z.re), encode(z.im)]);
                        }
                    }
                    MarginalEntry { support: m.support.clone(), matrix }
                })
                .collect(),
            metadata: instance.metadata.clone(),
        }
    }

    /// Full validation; every problem found is reported, not just the first.
    pub fn into_instance(self) -> Result<QmpInstance> {
        if self.format_version != FORMAT_VERSION {
            return Err(Error::Parse(format!(
                "unsupported format_version {} (this build reads {FORMAT_VERSION})",
                self.format_version
            )));
        }
        let kind: InstanceKind = self.kind.parse()?;
        let global = |message: String| Violation { marginal: None, support: Vec::new(), message };
        let layout = SystemLayout::new(self.layout.iter().map(|e| (e.label.clone(), e.dim)))
            .map_err(|e| Error::Validation(vec![global(e.to_string())]))?;

        let mut violations = Vec::new();
        let mut marginals = Vec::with_capacity(self.marginals.len());
        for (i, entry) in self.marginals.into_iter().enumerate() {
            let local = |message: String| Violation {
                marginal: Some(i),
                support: entry.support.clone(),
                message,
            };
            let sub = match layout.restrict(&entry.support) {
                Ok(sub) => sub,
                Err(e) => {
                    violations.push(local(e.to_string()));
                    continue;
                }
            };
            let d = sub.total_dim();
            if entry.matrix.len() != d * d {
                violations.push(local(format!(
                    "matrix has {} entries, support dimension {d} needs {}",
                    entry.matrix.len(),
                    d * d
                )));
                continue;
            }
            let parsed: std::result::Result<Vec<C64>, String> = entry
                .matrix
                .iter()
                .map(|[re, im]| Ok(C64::new(decode(re)?, decode(im)?)))
                .collect();
            let values = match parsed {
                Ok(v) => v,
                Err(msg) => {
                    violations.push(local(msg));
                    continue;
                }
            };
            match validate_density(CMatrix::from_row_slice(d, d, &values), &sub, LOAD_TOL) {
                Ok(state) => marginals.push(Marginal { support: entry.support.clone(), state }),
                Err(e) => violations.push(local(e.to_string())),
            }
        }
        if !violations.is_empty() {
            return Err(Error::Validation(violations));
        }

        let mut instance = QmpInstance::new(layout, marginals, kind)
            .map_err(|e| Error::Validation(vec![global(e.to_string())]))?;
        instance.metadata = self.metadata;
        for dev in interface_deviations(&instance)? {
            if dev.deviation > CONSISTENCY_TOL {
                violations.push(global(format!(
                    "marginals {} and {} disagree on [{}] (Frobenius deviation {:e})",
                    dev.first,
                    dev.second,
                    dev.shared.join(","),
                    dev.deviation
                )));
            }
        }
        if !violations.is_empty() {
            return Err(Error::Validation(violations));
        }
        Ok(instance)
    }
}

pub fn to_json(instance: &QmpInstance) -> String {
    let mut s = serde_json::to_string_pretty(&InstanceFile::from_instance(instance)).expect("plain data serializes");
    s.push('\n');
    s
}

pub fn from_json(text: &str) -> Result<QmpInstance> {
    let file: InstanceFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    file.into_instance()
}

pub fn save(instance: &QmpInstance, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, to_json(instance))?;
    Ok(())
}

pub fn load(path: impl AsRef<Path>) -> Result<QmpInstance> {
    from_json(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::interface_consistency_check;
    use crate::qstate::{frobenius_distance, von_neumann_entropy};

    #[test]
    fn rank_one_ginibre_is_pure() {
        for seed in 0..5 {
            let rho = gen_ginibre_density(2, 1, seed).unwrap();
            assert!(von_neumann_entropy(&rho).unwrap() < 1e-9);
        }
    }

    #[test]
    fn full_rank_ginibre_is_mixed() {
        let rho = gen_ginibre_density(4, 4, 42).unwrap();
        let s = von_neumann_entropy(&rho).unwrap();
        assert!(s > 0.0 && s < 2.0, "entropy {s}");
    }

    #[test]
    fn ginibre_is_deterministic() {
        let a = gen_ginibre_density(3, 2, 9).unwrap();
        let b = gen_ginibre_density(3, 2, 9).unwrap();
        assert_eq!(a, b);
        assert!(matches!(gen_ginibre_density(3, 4, 9), Err(Error::BadRank { .. })));
        assert!(matches!(gen_ginibre_density(3, 0, 9), Err(Error::BadRank { .. })));
    }

    #[test]
    fn haar_unitary_is_unitary() {
        let u = haar_unitary(5, &mut seeded_rng(1));
        let id = CMatrix::identity(5, 5);
        assert!(frobenius_distance(&(u.adjoint() * &u), &id) < 1e-12);
    }

    #[test]
    fn ghz_marginals() {
        let inst = builtin("ghz_chain").unwrap();
        let expected = CMatrix::from_diagonal(&CVector::from_iterator(
            4,
            [0.5, 0.0, 0.0, 0.5].iter().map(|&p| C64::new(p, 0.0)),
        ));
        for m in inst.marginals() {
            assert!(frobenius_distance(m.state.matrix(), &expected) < 1e-15);
        }
        assert_eq!(inst.marginals()[0].support, vec!["A", "B"]);
        assert_eq!(inst.marginals()[1].support, vec!["B", "C"]);
    }

    #[test]
    fn maximally_mixed_joint_gives_mixed_marginals() {
        let inst = builtin("maximally_mixed_qubits").unwrap();
        let expected = CMatrix::identity(4, 4).unscale(4.0);
        for m in inst.marginals() {
            assert!(frobenius_distance(m.state.matrix(), &expected) < 1e-15);
        }
    }

    #[test]
    fn single_party_marginals_are_one_party_reductions() {
        let layout = SystemLayout::numbered(&[2, 3]).unwrap();
        let joint = ginibre_state(&layout, 6, &mut seeded_rng(4)).unwrap();
        let inst = instance_from_joint(&joint, InstanceKind::SingleParty).unwrap();
        assert_eq!(inst.marginals().len(), 2);
        let a = partial_trace(&joint, &["A1"]).unwrap();
        assert_eq!(inst.marginals()[0].state, a);
    }

    #[test]
    fn from_joint_needs_two_parties() {
        let rho = gen_ginibre_density(3, 3, 0).unwrap();
        assert!(matches!(instance_from_joint(&rho, InstanceKind::Chain), Err(Error::TooFewSubsystems(1))));
    }

    #[test]
    fn singlet_builtin_shape() {
        let inst = builtin("singlet_monogamy").unwrap();
        assert_eq!(inst.kind(), InstanceKind::Chain);
        for m in inst.marginals() {
            let spec = crate::qstate::spectral_decomposition(&m.state).unwrap();
            assert!((spec.eigenvalues[0] - 1.0).abs() < 1e-12);
            assert!(spec.eigenvalues[1].abs() < 1e-12);
        }
        let b = partial_trace(&inst.marginals()[0].state, &["B"]).unwrap();
        assert!(frobenius_distance(b.matrix(), &CMatrix::identity(2, 2).unscale(2.0)) < 1e-15);
        assert!(interface_consistency_check(&inst, 1e-10));
    }

    #[test]
    fn product_pure_has_zero_entropies() {
        let inst = builtin("product_pure").unwrap();
        for m in inst.marginals() {
            assert_eq!(von_neumann_entropy(&m.state).unwrap(), 0.0);
        }
    }

    #[test]
    fn builtin_names() {
        assert_eq!("haar_unique(3)".parse::<Builtin>().unwrap(), Builtin::HaarUnique(3));
        assert_eq!("haar_unique:7".parse::<Builtin>().unwrap(), Builtin::HaarUnique(7));
        for b in Builtin::FIXED.into_iter().chain([Builtin::HaarUnique(11)]) {
            assert_eq!(b.to_string().parse::<Builtin>().unwrap(), b);
        }
        assert!(matches!(builtin("nope"), Err(Error::UnknownBuiltin(_))));
        assert!(matches!(builtin("haar_unique(x)"), Err(Error::UnknownBuiltin(_))));
    }

    #[test]
    fn json_round_trip_is_exact() {
        let inst = builtin("ghz_chain").unwrap();
        assert_eq!(from_json(&to_json(&inst)).unwrap(), inst);
        let rnd = random_instance(&[2, 3, 2], InstanceKind::Chain, None, 5).unwrap();
        assert_eq!(from_json(&to_json(&rnd)).unwrap(), rnd);
    }

    #[test]
    fn rejects_unsupported_version() {
        let text = to_json(&builtin("product_pure").unwrap()).replace("\"format_version\": 1", "\"format_version\": 999");
        match from_json(&text) {
            Err(Error::Parse(msg)) => assert!(msg.contains("999")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_trace_naming_marginal() {
        let layout = SystemLayout::uniform(&["A", "B"], 2).unwrap();
        let inst = instance_from_joint(&DensityMatrix::maximally_mixed(&layout), InstanceKind::SingleParty).unwrap();
        let mut file = InstanceFile::from_instance(&inst);
        file.marginals[1].matrix[3][0] = "0.4".into();
        match file.into_instance() {
            Err(Error::Validation(v)) => {
                assert_eq!(v.len(), 1);
                assert_eq!(v[0].marginal, Some(1));
                assert!(v[0].message.contains("trace"), "{}", v[0]);
                assert!(v[0].to_string().starts_with("marginal 1 [B]"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_inconsistent_marginals() {
        let good = builtin("product_pure").unwrap();
        let mixed = builtin("maximally_mixed_qubits").unwrap();
        let mut file = InstanceFile::from_instance(&good);
        file.marginals[1] = InstanceFile::from_instance(&mixed).marginals.remove(1);
        match file.into_instance() {
            Err(Error::Validation(v)) => assert!(v[0].message.contains("disagree"), "{}", v[0]),
            other => panic!("unexpected {other:?}"),
        }
    }
}
