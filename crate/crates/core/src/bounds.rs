//! Entropic upper bounds on the number of orthogonal solutions.
//!
//! Each bound follows from writing a hypothetical uniform mixture of `m`
//! orthogonal solutions, whose entropy is exactly `log2 m`, and bounding that
//! entropy from above with (strong) subadditivity evaluated on the given
//! marginals.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::qstate::{frobenius_distance, partial_trace, von_neumann_entropy, DensityMatrix, SystemLayout};

/// Tolerance used when the bounds check that overlapping marginals agree.
pub const CONSISTENCY_TOL: f64 = 1e-8;

/// Slack added before flooring `2^exponent`, so exact powers of two survive rounding.
pub const COUNT_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InstanceKind {
    Chain,
    SingleParty,
    General,
}

impl InstanceKind {
    pub fn as_str(self) -> &'static str {
        match self {
            InstanceKind::Chain => "chain",
            InstanceKind::SingleParty => "single_party",
            InstanceKind::General => "general",
        }
    }
}

impl fmt::Display for InstanceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for InstanceKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "chain" => Ok(InstanceKind::Chain),
            "single_party" => Ok(InstanceKind::SingleParty),
            "general" => Ok(InstanceKind::General),
            other => Err(Error::Parse(format!("unknown instance kind `{other}`"))),
        }
    }
}

/// A prescribed reduced state together with the subsystems it lives on.
#[derive(Debug, Clone, PartialEq)]
pub struct Marginal {
    pub support: Vec<String>,
    pub state: DensityMatrix,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QmpInstance {
    layout: SystemLayout,
    marginals: Vec<Marginal>,
    kind: InstanceKind,
    pub metadata: BTreeMap<String, String>,
}

impl QmpInstance {
    /// Checks the support pattern against `kind` and each marginal's layout
    /// against the global layout. Interface consistency is checked separately.
    pub fn new(layout: SystemLayout, marginals: Vec<Marginal>, kind: InstanceKind) -> Result<Self> {
        if marginals.is_empty() {
            return Err(Error::SupportMismatch("instance has no marginals".into()));
        }
        for (i, m) in marginals.iter().enumerate() {
            let expected = layout.restrict(&m.support)?;
            if expected.labels() != m.support.iter().map(String::as_str).collect::<Vec<_>>() {
                return Err(Error::SupportMismatch(format!(
                    "marginal {i}: support {:?} is not in layout order or repeats a label",
                    m.support
                )));
            }
            if m.state.layout() != &expected {
                return Err(Error::SupportMismatch(format!(
                    "marginal {i}: state layout {:?} does not match the global layout on {:?}",
                    m.state.layout().labels(),
                    m.support
                )));
            }
        }
        let labels = layout.labels();
        let supports: Vec<Vec<&str>> = marginals
            .iter()
            .map(|m| m.support.iter().map(String::as_str).collect())
            .collect();
        match kind {
            InstanceKind::Chain => {
                let expected: Vec<Vec<&str>> = labels.windows(2).map(|w| w.to_vec()).collect();
                if labels.len() < 2 || supports != expected {
                    return Err(Error::NotAChain(format!(
                        "expected supports {expected:?}, got {supports:?}"
                    )));
                }
            }
            InstanceKind::SingleParty => {
                let expected: Vec<Vec<&str>> = labels.iter().map(|l| vec![*l]).collect();
                if labels.len() < 2 || supports != expected {
                    return Err(Error::NotSingleParty(format!(
                        "expected supports {expected:?}, got {supports:?}"
                    )));
                }
            }
            InstanceKind::General => {}
        }
        Ok(QmpInstance {
            layout,
            marginals,
            kind,
            metadata: BTreeMap::new(),
        })
    }

    pub fn with_metadata(mut self, key: impl Into<String>, value: impl Into<String>) -> Self {
        self.metadata.insert(key.into(), value.into());
        self
    }

    pub fn layout(&self) -> &SystemLayout {
        &self.layout
    }

    pub fn marginals(&self) -> &[Marginal] {
        &self.marginals
    }

    pub fn kind(&self) -> InstanceKind {
        self.kind
    }
}

/// A disagreement between two marginals on their shared subsystems.
#[derive(Debug, Clone, PartialEq)]
pub struct InterfaceMismatch {
    pub first: usize,
    pub second: usize,
    pub shared: Vec<String>,
    pub deviation: f64,
}

/// Frobenius deviation of every overlapping pair of marginals, reduced to their intersection.
pub fn interface_deviations(instance: &QmpInstance) -> Result<Vec<InterfaceMismatch>> {
    let ms = instance.marginals();
    let mut out = Vec::new();
    for i in 0..ms.len() {
        for j in i + 1..ms.len() {
            let shared: Vec<String> = ms[i]
                .support
                .iter()
                .filter(|l| ms[j].support.contains(l))
                .cloned()
                .collect();
            if shared.is_empty() {
                continue;
            }
            let a = partial_trace(&ms[i].state, &shared)?;
            let b = partial_trace(&ms[j].state, &shared)?;
            out.push(InterfaceMismatch {
                first: i,
                second: j,
                shared,
                deviation: frobenius_distance(a.matrix(), b.matrix()),
            });
        }
    }
    Ok(out)
}

/// True iff every pair of overlapping marginals agrees on the overlap within `tol`.
pub fn interface_consistency_check(instance: &QmpInstance, tol: f64) -> bool {
    match interface_deviations(instance) {
        Ok(devs) => devs.iter().all(|d| d.deviation <= tol),
        Err(_) => false,
    }
}

fn require_consistent(instance: &QmpInstance) -> Result<()> {
    let worst = interface_deviations(instance)?
        .into_iter()
        .map(|d| d.deviation)
        .fold(0.0f64, f64::max);
    if worst > CONSISTENCY_TOL {
        return Err(Error::InconsistentInterface(worst));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Formula {
    PureTripartite,
    Chain,
    SingleParty,
    MixedPurified,
}

impl Formula {
    pub fn as_str(self) -> &'static str {
        match self {
            Formula::PureTripartite => "pure_tripartite",
            Formula::Chain => "chain",
            Formula::SingleParty => "single_party",
            Formula::MixedPurified => "mixed_purified",
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One signed entropy contribution to a bound's exponent.
#[derive(Debug, Clone, PartialEq)]
pub struct EntropyTerm {
    pub support: Vec<String>,
    pub entropy_bits: f64,
    /// Integer weight; ±1 for the pure bounds, ±2 for the purified bound.
    pub coefficient: i32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub formula: Formula,
    pub exponent_bits: f64,
    pub bound_value: f64,
    pub m_max: u64,
    pub entropy_terms: Vec<EntropyTerm>,
}

impl BoundReport {
    fn from_terms(formula: Formula, entropy_terms: Vec<EntropyTerm>) -> Self {
        let exponent_bits = exponent_of(&entropy_terms);
        let bound_value = exponent_bits.exp2();
        let m_max = count_from_bound(bound_value);
        BoundReport {
            formula,
            exponent_bits,
            bound_value,
            m_max,
            entropy_terms,
        }
    }

    /// Recomputes the exponent from the recorded terms.
    pub fn recomputed_exponent(&self) -> f64 {
        exponent_of(&self.entropy_terms)
    }
}

fn exponent_of(terms: &[EntropyTerm]) -> f64 {
    terms
        .iter()
        .fold(0.0, |acc, t| acc + f64::from(t.coefficient) * t.entropy_bits)
}

fn count_from_bound(bound: f64) -> u64 {
    if !(bound >= 1.0 - COUNT_SLACK) {
        return 0;
    }
    // float-to-int casts saturate
    (bound + COUNT_SLACK).floor() as u64
}

/// Largest integer number of orthogonal solutions the report allows.
pub fn max_orthogonal_count(report: &BoundReport) -> u64 {
    count_from_bound(report.exponent_bits.exp2())
}

fn term(support: &[String], state: &DensityMatrix, coefficient: i32) -> Result<EntropyTerm> {
    Ok(EntropyTerm {
        support: support.to_vec(),
        entropy_bits: von_neumann_entropy(state)?,
        coefficient,
    })
}

/// Splits `(ρ_XB, ρ_BZ)` into `(X, B, Z)` where `B` is the shared middle block.
fn tripartite_supports(rho_ab: &DensityMatrix, rho_bc: &DensityMatrix) -> Result<Vec<String>> {
    let left: Vec<String> = rho_ab.layout().labels().iter().map(|s| s.to_string()).collect();
    let right: Vec<String> = rho_bc.layout().labels().iter().map(|s| s.to_string()).collect();
    let shared: Vec<String> = left.iter().filter(|l| right.contains(l)).cloned().collect();
    let n = shared.len();
    let fits = n > 0
        && n < left.len()
        && n < right.len()
        && left[left.len() - n..] == shared[..]
        && right[..n] == shared[..];
    if !fits {
        return Err(Error::SupportMismatch(format!(
            "marginals on {left:?} and {right:?} do not share a middle block"
        )));
    }
    for label in &shared {
        if rho_ab.layout().dim_of(label) != rho_bc.layout().dim_of(label) {
            return Err(Error::SupportMismatch(format!("dimension of `{label}` differs")));
        }
    }
    Ok(shared)
}

fn tripartite_terms(rho_ab: &DensityMatrix, rho_bc: &DensityMatrix, weight: i32) -> Result<Vec<EntropyTerm>> {
    let shared = tripartite_supports(rho_ab, rho_bc)?;
    let b_left = partial_trace(rho_ab, &shared)?;
    let b_right = partial_trace(rho_bc, &shared)?;
    let deviation = frobenius_distance(b_left.matrix(), b_right.matrix());
    if deviation > CONSISTENCY_TOL {
        return Err(Error::InconsistentInterface(deviation));
    }
    let labels = |rho: &DensityMatrix| rho.layout().labels().iter().map(|s| s.to_string()).collect::<Vec<_>>();
    Ok(vec![
        term(&labels(rho_ab), rho_ab, weight)?,
        term(&labels(rho_bc), rho_bc, weight)?,
        term(&shared, &b_left, -weight)?,
    ])
}

/// `m ≤ 2^(S_AB + S_BC − S_B)` for orthogonal pure joint states.
pub fn pure_tripartite_bound(rho_ab: &DensityMatrix, rho_bc: &DensityMatrix) -> Result<BoundReport> {
    Ok(BoundReport::from_terms(Formula::PureTripartite, tripartite_terms(rho_ab, rho_bc, 1)?))
}

/// `m ≤ 2^(2 S_AB + 2 S_BC − 2 S_B)` for mixed solutions with orthogonal purifications.
pub fn mixed_state_bound(rho_ab: &DensityMatrix, rho_bc: &DensityMatrix) -> Result<BoundReport> {
    Ok(BoundReport::from_terms(Formula::MixedPurified, tripartite_terms(rho_ab, rho_bc, 2)?))
}

/// `m ≤ Π 2^S(A_j A_{j+1}) · Π_interior 2^−S(A_j)` for nearest-neighbour marginals.
pub fn chain_bound(instance: &QmpInstance) -> Result<BoundReport> {
    if instance.kind() != InstanceKind::Chain {
        return Err(Error::NotAChain(format!("instance kind is {}", instance.kind())));
    }
    require_consistent(instance)?;
    let ms = instance.marginals();
    let mut terms = Vec::with_capacity(2 * ms.len());
    for m in ms {
        terms.push(term(&m.support, &m.state, 1)?);
    }
    // interior party j is the right half of marginal j−1
    for m in &ms[..ms.len() - 1] {
        let interior = vec![m.support[1].clone()];
        let reduced = partial_trace(&m.state, &interior)?;
        terms.push(term(&interior, &reduced, -1)?);
    }
    Ok(BoundReport::from_terms(Formula::Chain, terms))
}

/// `m ≤ Π 2^S(A_j)` from single-party marginals.
pub fn single_party_bound(instance: &QmpInstance) -> Result<BoundReport> {
    if instance.kind() != InstanceKind::SingleParty {
        return Err(Error::NotSingleParty(format!("instance kind is {}", instance.kind())));
    }
    let terms = instance
        .marginals()
        .iter()
        .map(|m| term(&m.support, &m.state, 1))
        .collect::<Result<Vec<_>>>()?;
    Ok(BoundReport::from_terms(Formula::SingleParty, terms))
}

/// The bound that caps pure solutions of this instance, if its kind has one.
pub fn applicable_pure_bound(instance: &QmpInstance) -> Result<BoundReport> {
    match instance.kind() {
        InstanceKind::Chain => chain_bound(instance),
        InstanceKind::SingleParty => single_party_bound(instance),
        InstanceKind::General => Err(Error::NotAChain(
            "general instances have no entropic bound".into(),
        )),
    }
}
