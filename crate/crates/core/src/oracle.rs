//! Numerical oracles that check the entropic bounds from the other side.
//!
//! [`dykstra_feasibility`] looks for any joint state matching the marginals.
//! [`pure_solution_search`] collects mutually orthogonal pure joint states
//! matching them, which is a constructive lower bound on the count the
//! bounds cap from above. Neither oracle ever certifies that no solution
//! exists.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::bounds::{interface_deviations, BoundReport, QmpInstance, CONSISTENCY_TOL};
use crate::error::{Error, Result};
use crate::instances::{complex_gaussian, seeded_rng};
use crate::qstate::{hermitian_eigen, spectral_function, CMatrix, CVector, DensityMatrix, FactorSplit, PureState, C64};

/// Target residual of the affine marginal projection.
const AFFINE_INNER_TOL: f64 = 1e-12;
const AFFINE_MAX_SWEEPS: usize = 100;

/// Armijo sufficient-decrease constant.
const ARMIJO: f64 = 1e-4;
const INITIAL_STEP: f64 = 0.1;
/// Restarts stuck above the acceptance threshold stop after this many
/// iterations without relative progress of `STALL_REL`.
const STALL_WINDOW: usize = 200;
const STALL_REL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct OracleConfig {
    pub max_iterations: usize,
    pub residual_tol: f64,
    pub restarts: usize,
    pub seed: u64,
    pub deflation_overlap_tol: f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            max_iterations: 5000,
            residual_tol: 1e-6,
            restarts: 64,
            seed: 0,
            deflation_overlap_tol: 1e-6,
        }
    }
}

impl OracleConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::Numerical(format!("invalid oracle config: {msg}")));
        if self.max_iterations == 0 {
            return bad("max_iterations must be positive");
        }
        if self.restarts == 0 {
            return bad("restarts must be positive");
        }
        if !(self.residual_tol > 0.0) {
            return bad("residual_tol must be positive");
        }
        if !(self.deflation_overlap_tol > 0.0 && self.deflation_overlap_tol < 1.0) {
            return bad("deflation_overlap_tol must lie in (0, 1)");
        }
        Ok(())
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

/// Index bookkeeping for each marginal constraint of an instance.
struct Constraints {
    splits: Vec<FactorSplit>,
    targets: Vec<CMatrix>,
}

impl Constraints {
    fn new(instance: &QmpInstance) -> Result<Self> {
        let layout = instance.layout();
        let mut splits = Vec::new();
        let mut targets = Vec::new();
        for m in instance.marginals() {
            splits.push(FactorSplit::new(layout, &layout.mask(&m.support)?));
            targets.push(m.state.matrix().clone());
        }
        Ok(Constraints { splits, targets })
    }

    fn max_mismatch(&self, x: &CMatrix) -> f64 {
        self.splits
            .iter()
            .zip(&self.targets)
            .map(|(s, t)| (s.trace_out(x) - t).norm())
            .fold(0.0, f64::max)
    }
}

/// Max Frobenius mismatch between the marginals of `x` and the instance's marginals.
pub fn marginal_residual(x: &CMatrix, instance: &QmpInstance) -> Result<f64> {
    let d = instance.layout().total_dim();
    if x.nrows() != d || x.ncols() != d {
        return Err(Error::DimensionMismatch { expected: d, got: x.nrows() });
    }
    Ok(Constraints::new(instance)?.max_mismatch(x))
}

/// Euclidean projection of a real vector onto the probability simplex.
pub fn project_simplex(values: &[f64]) -> Vec<f64> {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumulative = 0.0;
    let mut shift = 0.0;
    for (k, &v) in sorted.iter().enumerate() {
        cumulative += v;
        let candidate = (cumulative - 1.0) / (k + 1) as f64;
        if v - candidate > 0.0 {
            shift = candidate;
        } else {
            break;
        }
    }
    values.iter().map(|&v| (v - shift).max(0.0)).collect()
}

fn psd_trace_one_matrix(m: &CMatrix) -> Result<CMatrix> {
    let (values, vectors) = hermitian_eigen(m)?;
    let projected = project_simplex(&values);
    Ok(spectral_function(&projected, &vectors, |v| v))
}

/// Frobenius-nearest positive-semidefinite unit-trace matrix.
pub fn project_psd_trace_one(m: &CMatrix, layout: &crate::qstate::SystemLayout) -> Result<DensityMatrix> {
    let p = psd_trace_one_matrix(m)?;
    DensityMatrix::new(p, layout, 1e-9)
}

fn affine_projection(x: &CMatrix, constraints: &Constraints) -> Result<CMatrix> {
    let mut x = x.clone();
    let mut previous = f64::INFINITY;
    for _ in 0..AFFINE_MAX_SWEEPS {
        for (split, target) in constraints.splits.iter().zip(&constraints.targets) {
            let correction = (target - split.trace_out(&x)).unscale(split.rest_dim as f64);
            x += split.embed(&correction);
        }
        let residual = constraints.max_mismatch(&x);
        if residual <= AFFINE_INNER_TOL {
            return Ok(x);
        }
        // marginals that only agree to within the consistency tolerance
        // leave a constant gap that further sweeps cannot close
        if residual >= 0.5 * previous {
            if residual <= CONSISTENCY_TOL {
                return Ok(x);
            }
            return Err(Error::InnerConvergenceFailure(residual));
        }
        previous = residual;
    }
    Err(Error::InnerConvergenceFailure(previous))
}

/// Frobenius projection onto `{X : tr_complement(X) = ρ_given for every marginal}`.
pub fn project_marginal_affine(x: &CMatrix, instance: &QmpInstance) -> Result<CMatrix> {
    let d = instance.layout().total_dim();
    if x.nrows() != d || x.ncols() != d {
        return Err(Error::DimensionMismatch { expected: d, got: x.nrows() });
    }
    affine_projection(x, &Constraints::new(instance)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeasibilityStatus {
    Feasible,
    /// No convergence within the iteration budget. Not a proof of infeasibility.
    Undetermined,
}

impl FeasibilityStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            FeasibilityStatus::Feasible => "feasible",
            FeasibilityStatus::Undetermined => "undetermined",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityResult {
    pub status: FeasibilityStatus,
    pub residual: f64,
    pub iterations_used: usize,
    pub witness: Option<DensityMatrix>,
}

/// Dykstra alternating projections between the state set and the marginal
/// affine set, started from the maximally mixed state.
pub fn dykstra_feasibility(instance: &QmpInstance, config: &OracleConfig) -> Result<FeasibilityResult> {
    config.validate()?;
    require_consistent(instance)?;
    let layout = instance.layout();
    let constraints = Constraints::new(instance)?;
    let d = layout.total_dim();
    let mut x = CMatrix::identity(d, d).unscale(d as f64);
    let mut p = CMatrix::zeros(d, d);
    let mut q = CMatrix::zeros(d, d);
    let mut residual = f64::INFINITY;
    for it in 1..=config.max_iterations {
        let shifted = &x + &p;
        let y = psd_trace_one_matrix(&shifted)?;
        p = shifted - &y;
        residual = constraints.max_mismatch(&y);
        if residual <= config.residual_tol {
            let witness = DensityMatrix::new(y, layout, 1e-9)?;
            return Ok(FeasibilityResult {
                status: FeasibilityStatus::Feasible,
                residual,
                iterations_used: it,
                witness: Some(witness),
            });
        }
        let shifted = &y + &q;
        let next = affine_projection(&shifted, &constraints)?;
        q = shifted - &next;
        x = next;
    }
    Ok(FeasibilityResult {
        status: FeasibilityStatus::Undetermined,
        residual,
        iterations_used: config.max_iterations,
        witness: None,
    })
}

/// `J(ψ) = Σ ‖tr_complement(ψψ†) − ρ_given‖²_F`, defined for any vector `ψ`.
pub struct SearchObjective {
    constraints: Constraints,
    dim: usize,
}

impl SearchObjective {
    pub fn new(instance: &QmpInstance) -> Result<Self> {
        Ok(SearchObjective {
            constraints: Constraints::new(instance)?,
            dim: instance.layout().total_dim(),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn check(&self, psi: &CVector) -> Result<()> {
        if psi.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: psi.len() });
        }
        Ok(())
    }

    /// `ψ` reshaped to a (kept × traced) matrix for one constraint.
    fn reshape(split: &FactorSplit, psi: &CVector) -> CMatrix {
        let mut m = CMatrix::zeros(split.keep_dim, split.rest_dim);
        for (full, (&k, &r)) in split.keep.iter().zip(&split.rest).enumerate() {
            m[(k, r)] = psi[full];
        }
        m
    }

    fn eval(&self, psi: &CVector, want_gradient: bool) -> (f64, Option<CVector>, Vec<f64>) {
        let mut value = 0.0;
        let mut grad = want_gradient.then(|| CVector::zeros(self.dim));
        let mut mismatches = Vec::with_capacity(self.constraints.splits.len());
        for (split, target) in self.constraints.splits.iter().zip(&self.constraints.targets) {
            let shaped = Self::reshape(split, psi);
            let residual = &shaped * shaped.adjoint() - target;
            let sq = residual.norm_squared();
            value += sq;
            mismatches.push(sq.sqrt());
            if let Some(g) = grad.as_mut() {
                // dJ = 4 Re⟨(R ⊗ I) ψ, dψ⟩
                let rg = &residual * &shaped;
                for (full, (&k, &r)) in split.keep.iter().zip(&split.rest).enumerate() {
                    g[full] += rg[(k, r)].scale(4.0);
                }
            }
        }
        (value, grad, mismatches)
    }

    pub fn value(&self, psi: &CVector) -> Result<f64> {
        self.check(psi)?;
        Ok(self.eval(psi, false).0)
    }

    /// Value and gradient. The partial derivatives with respect to the real and
    /// imaginary parts of `ψ_k` are `grad[k].re` and `grad[k].im`.
    pub fn value_and_gradient(&self, psi: &CVector) -> Result<(f64, CVector)> {
        self.check(psi)?;
        let (v, g, _) = self.eval(psi, true);
        Ok((v, g.expect("gradient requested")))
    }

    /// Frobenius mismatch of each marginal.
    pub fn mismatches(&self, psi: &CVector) -> Result<Vec<f64>> {
        self.check(psi)?;
        Ok(self.eval(psi, false).2)
    }
}

/// Orthonormal pure solutions found by the deflated search.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionSet {
    pub states: Vec<PureState>,
    /// `|⟨ψ_i|ψ_j⟩|`.
    pub pairwise_overlaps: DMatrix<f64>,
    /// Max Frobenius marginal mismatch of each state.
    pub per_state_residuals: Vec<f64>,
    /// Lowest objective reached in the round that accepted nothing, if any.
    pub best_rejected_objective: Option<f64>,
    pub restarts_run: usize,
}

impl SolutionSet {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn max_overlap(&self) -> f64 {
        let n = self.states.len();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    worst = worst.max(self.pairwise_overlaps[(i, j)]);
                }
            }
        }
        worst
    }
}

fn project_out(v: &mut CVector, basis: &[CVector]) {
    for b in basis {
        let c = b.dotc(v);
        v.axpy(-c, b, C64::new(1.0, 0.0));
    }
}

fn normalized(mut v: CVector, basis: &[CVector]) -> Option<CVector> {
    project_out(&mut v, basis);
    // second pass for numerical orthogonality
    project_out(&mut v, basis);
    let n = v.norm();
    (n > 1e-300 && n.is_finite()).then(|| v.unscale(n))
}

/// Makes the largest-magnitude amplitude (first on ties) real and positive.
fn fix_phase(v: &mut CVector) {
    let mut best = 0;
    for (i, z) in v.iter().enumerate() {
        if z.norm() > v[best].norm() {
            best = i;
        }
    }
    let z = v[best];
    let n = z.norm();
    if n > 0.0 {
        let phase = z.conj().unscale(n);
        for a in v.iter_mut() {
            *a *= phase;
        }
    }
}

struct Descent {
    psi: CVector,
    value: f64,
}

fn descend(objective: &SearchObjective, start: CVector, basis: &[CVector], config: &OracleConfig) -> Option<Descent> {
    let accept = config.residual_tol * config.residual_tol;
    let polish = accept * 1e-6;
    let mut psi = normalized(start, basis)?;
    let tangent = |psi: &CVector, g: CVector| {
        let mut d = g;
        project_out(&mut d, basis);
        let c = psi.dotc(&d);
        d.axpy(-c, psi, C64::new(1.0, 0.0));
        d
    };
    let (mut value, g) = objective.eval(&psi, true).into_grad();
    let mut dir = tangent(&psi, g);
    let mut step = INITIAL_STEP;
    let mut window_start = value;
    for it in 0..config.max_iterations {
        if value <= polish {
            break;
        }
        let gnorm2 = dir.norm_squared();
        if gnorm2 < 1e-30 {
            break;
        }
        let mut t = step;
        let mut accepted = None;
        while t > 1e-16 {
            if let Some(cand) = normalized(&psi - dir.scale(t), basis) {
                let (cv, cg) = objective.eval(&cand, true).into_grad();
                if cv <= value - ARMIJO * t * gnorm2 {
                    accepted = Some((cand, cv, cg));
                    break;
                }
            }
            t *= 0.5;
        }
        let Some((cand, cv, cg)) = accepted else { break };
        let new_dir = tangent(&cand, cg);
        // Barzilai-Borwein guess for the next trial step
        let s = &cand - &psi;
        let y = &new_dir - &dir;
        let sy = s.dotc(&y).re;
        step = if sy > 0.0 { (s.norm_squared() / sy).clamp(1e-6, 1e3) } else { (2.0 * t).min(1e3) };
        psi = cand;
        value = cv;
        dir = new_dir;
        if (it + 1) % STALL_WINDOW == 0 {
            if value > accept && window_start - value <= STALL_REL * window_start {
                break;
            }
            window_start = value;
        }
    }
    Some(Descent { psi, value })
}

trait IntoGrad {
    fn into_grad(self) -> (f64, CVector);
}

impl IntoGrad for (f64, Option<CVector>, Vec<f64>) {
    fn into_grad(self) -> (f64, CVector) {
        (self.0, self.1.expect("gradient requested"))
    }
}

fn restart_start(config: &OracleConfig, round: usize, restart: usize, dim: usize) -> CVector {
    let mut rng = seeded_rng(config.seed);
    rng.set_stream(((round as u64) << 32) | restart as u64);
    CVector::from_fn(dim, |_, _| complex_gaussian(&mut rng))
}

/// Random-restart gradient search for orthogonal pure solutions, with
/// deflation onto the orthogonal complement of everything accepted so far.
///
/// Each round runs every restart (in parallel on the current rayon pool),
/// accepts the lowest-objective converged candidate (ties by restart index),
/// and the search stops after a round that accepts nothing.
pub fn pure_solution_search(instance: &QmpInstance, config: &OracleConfig) -> Result<SolutionSet> {
    config.validate()?;
    require_consistent(instance)?;
    let objective = SearchObjective::new(instance)?;
    let layout = instance.layout();
    let dim = objective.dim();
    let accept = config.residual_tol * config.residual_tol;

    let mut basis: Vec<CVector> = Vec::new();
    let mut residuals = Vec::new();
    let mut best_rejected = None;
    let mut restarts_run = 0;
    let mut round = 0;
    while basis.len() < dim {
        let outcomes: Vec<Option<Descent>> = (0..config.restarts)
            .into_par_iter()
            .map(|r| descend(&objective, restart_start(config, round, r, dim), &basis, config))
            .collect();
        restarts_run += config.restarts;
        round += 1;

        let mut chosen: Option<Descent> = None;
        let mut best = f64::INFINITY;
        for outcome in outcomes.into_iter().flatten() {
            best = best.min(outcome.value);
            if outcome.value <= accept && chosen.as_ref().is_none_or(|c| outcome.value < c.value) {
                chosen = Some(outcome);
            }
        }
        let Some(found) = chosen else {
            best_rejected = Some(best);
            break;
        };
        let Some(mut psi) = normalized(found.psi, &basis) else {
            best_rejected = Some(best);
            break;
        };
        fix_phase(&mut psi);
        let mismatch = objective.eval(&psi, false).2.into_iter().fold(0.0, f64::max);
        let overlap = basis.iter().map(|b| b.dotc(&psi).norm()).fold(0.0, f64::max);
        if mismatch > config.residual_tol || overlap > config.deflation_overlap_tol {
            best_rejected = Some(found.value);
            break;
        }
        residuals.push(mismatch);
        basis.push(psi);
    }

    let n = basis.len();
    let overlaps = DMatrix::from_fn(n, n, |i, j| basis[i].dotc(&basis[j]).norm());
    let states = basis
        .into_iter()
        .map(|v| PureState::new(v, layout, 1e-10))
        .collect::<Result<Vec<_>>>()?;
    Ok(SolutionSet {
        states,
        pairwise_overlaps: overlaps,
        per_state_residuals: residuals,
        best_rejected_objective: best_rejected,
        restarts_run,
    })
}

/// One-sided check that the number of solutions found does not exceed the bound.
pub fn verify_against_bound(instance: &QmpInstance, solutions: &SolutionSet, report: &BoundReport) -> Result<bool> {
    if let Some(s) = solutions.states.iter().find(|s| s.layout() != instance.layout()) {
        return Err(Error::InstanceMismatch(format!(
            "solution layout {:?} differs from instance layout {:?}",
            s.layout().labels(),
            instance.layout().labels()
        )));
    }
    for t in &report.entropy_terms {
        if let Some(l) = t.support.iter().find(|l| instance.layout().position(l).is_none()) {
            return Err(Error::InstanceMismatch(format!("report mentions unknown subsystem `{l}`")));
        }
    }
    Ok(solutions.len() as u64 <= report.m_max)
}
