//! Alternating maximization of `Σ a_ij tr(ρ(E_i ⊗ F_j)) + ... - bound`
//! over projective measurements.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inequality::{BellInequality, Party};
use crate::linalg::ComplexMatrix;
use crate::quantum::{random_projective_measurement, violation, DensityMatrix, Effect, MeasurementSet};

/// Eigenvalues above this count as strictly positive.
pub const POSITIVE_CUTOFF: f64 = 1e-14;

/// Monotonicity slack between consecutive recorded objective values.
pub const MONOTONE_SLACK: f64 = 1e-12;

/// Rank distribution of the random initial projectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RankPolicy {
    /// Uniform over `1..=d-1`.
    Uniform,
    Fixed(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeesawConfig {
    pub tol: f64,
    pub max_iters: usize,
    pub restarts: usize,
    pub base_seed: u64,
    pub rank_policy: RankPolicy,
}

impl Default for SeesawConfig {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            max_iters: 500,
            restarts: 1000,
            base_seed: 0,
            rank_policy: RankPolicy::Uniform,
        }
    }
}

impl SeesawConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::InvalidArgument(format!("tol must be positive, got {}", self.tol)));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidArgument("max_iters must be at least 1".into()));
        }
        if self.restarts == 0 {
            return Err(Error::InvalidArgument("restarts must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SeesawResult {
    pub best_violation: f64,
    pub best_a: MeasurementSet,
    pub best_b: MeasurementSet,
    /// Full A/B sweeps performed.
    pub iters_used: usize,
    pub restart_index: usize,
    pub converged: bool,
    /// Objective at the start and after every sweep.
    pub history: Vec<f64>,
}

/// `a_{k0}·I + Σ_l a_{kl}·X_l` for setting `k` of `party`, where `X_l` are
/// the other party's effects.
fn local_operator(ineq: &BellInequality, party: Party, k: usize, fixed: &MeasurementSet, d: usize) -> ComplexMatrix {
    let marg = match party {
        Party::A => ineq.marg_a()[k],
        Party::B => ineq.marg_b()[k],
    };
    let coeff = |l: usize| match party {
        Party::A => ineq.joint(k, l),
        Party::B => ineq.joint(l, k),
    };
    let mut m = ComplexMatrix::identity(d).scale(marg as f64);
    for (l, x) in fixed.effects().iter().enumerate() {
        let c = coeff(l);
        if c != 0 {
            m = &m + &x.op().scale(c as f64);
        }
    }
    m
}

/// Best response of `party` against the other party's fixed measurements:
/// each effect becomes the projector onto the strictly positive eigenspace
/// of its reduced operator.
pub fn optimize_party(
    ineq: &BellInequality,
    rho: &DensityMatrix,
    fixed: &MeasurementSet,
    party: Party,
) -> Result<MeasurementSet> {
    let d = rho.local_dim();
    if fixed.party() == party {
        return Err(Error::InvalidArgument("fixed set must belong to the other party".into()));
    }
    if fixed.len() != ineq.settings(party.other()) {
        return Err(Error::Dimension(format!(
            "party {} has {} effects, inequality needs {}",
            fixed.party(),
            fixed.len(),
            ineq.settings(party.other())
        )));
    }
    if fixed.dim().is_some_and(|fd| fd != d) {
        return Err(Error::Dimension("effects and state differ in local dimension".into()));
    }
    let effects = (0..ineq.settings(party))
        .map(|k| {
            let m = local_operator(ineq, party, k, fixed, d);
            let g = match party {
                Party::A => rho.reduce_onto_a(&m),
                Party::B => rho.reduce_onto_b(&m),
            };
            // G is Hermitian up to rounding; symmetrize before diagonalizing
            let g = (&g + &g.adjoint()).scale(0.5);
            Effect::from_projector(g.hermitian_eigen().positive_projector(POSITIVE_CUTOFF))
        })
        .collect();
    MeasurementSet::new(party, effects)
}

/// Alternates Alice and Bob half-steps from the given start until one full
/// sweep improves the objective by less than `cfg.tol` or `cfg.max_iters`
/// sweeps have run.
pub fn seesaw(
    ineq: &BellInequality,
    rho: &DensityMatrix,
    init_a: &MeasurementSet,
    init_b: &MeasurementSet,
    cfg: &SeesawConfig,
) -> Result<SeesawResult> {
    cfg.validate()?;
    let mut a = init_a.clone();
    let mut b = init_b.clone();
    let mut value = violation(ineq, rho, &a, &b)?;
    let mut history = vec![value];
    let mut converged = false;
    let mut iters = 0;
    while iters < cfg.max_iters {
        iters += 1;
        a = optimize_party(ineq, rho, &b, Party::A)?;
        b = optimize_party(ineq, rho, &a, Party::B)?;
        let next = violation(ineq, rho, &a, &b)?;
        history.push(next);
        let gain = next - value;
        value = next;
        if gain < cfg.tol {
            converged = true;
            break;
        }
    }
    Ok(SeesawResult {
        best_violation: value,
        best_a: a,
        best_b: b,
        iters_used: iters,
        restart_index: 0,
        converged,
        history,
    })
}

/// Generator for restart `index`: one ChaCha stream per restart.
pub fn restart_rng(base_seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(base_seed);
    rng.set_stream(index as u64);
    rng
}

/// Random projective start for every setting of both parties.
pub fn random_start<R: Rng + ?Sized>(
    ineq: &BellInequality,
    d: usize,
    policy: RankPolicy,
    rng: &mut R,
) -> Result<(MeasurementSet, MeasurementSet)> {
    let mut draw = |m: usize, party: Party| -> Result<MeasurementSet> {
        let effects = (0..m)
            .map(|_| {
                let rank = match policy {
                    RankPolicy::Uniform => rng.gen_range(1..d),
                    RankPolicy::Fixed(r) => r,
                };
                random_projective_measurement(d, rank, rng)
            })
            .collect::<Result<_>>()?;
        MeasurementSet::new(party, effects)
    };
    let a = draw(ineq.m_a(), Party::A)?;
    let b = draw(ineq.m_b(), Party::B)?;
    Ok((a, b))
}

/// One see-saw run from the random start of restart `index`.
pub fn run_restart(ineq: &BellInequality, rho: &DensityMatrix, cfg: &SeesawConfig, index: usize) -> Result<SeesawResult> {
    let mut rng = restart_rng(cfg.base_seed, index);
    let (a, b) = random_start(ineq, rho.local_dim(), cfg.rank_policy, &mut rng)?;
    let mut r = seesaw(ineq, rho, &a, &b, cfg)?;
    r.restart_index = index;
    Ok(r)
}

/// Measurements to seed one extra run (index `cfg.restarts`) with.
pub type WarmStart<'a> = Option<(&'a MeasurementSet, &'a MeasurementSet)>;

fn run_indexed(
    ineq: &BellInequality,
    rho: &DensityMatrix,
    cfg: &SeesawConfig,
    warm: WarmStart<'_>,
    index: usize,
) -> Result<SeesawResult> {
    match warm {
        Some((a, b)) if index == cfg.restarts => {
            let mut r = seesaw(ineq, rho, a, b, cfg)?;
            r.restart_index = index;
            Ok(r)
        }
        _ => run_restart(ineq, rho, cfg, index),
    }
}

/// Highest violation; ties go to the lowest restart index.
fn pick_best(results: Vec<SeesawResult>) -> SeesawResult {
    results
        .into_iter()
        .reduce(|best, r| {
            if r.best_violation.total_cmp(&best.best_violation).is_gt() {
                r
            } else {
                best
            }
        })
        .expect("at least one restart")
}

fn run_count(cfg: &SeesawConfig, warm: WarmStart<'_>) -> usize {
    cfg.restarts + usize::from(warm.is_some())
}

/// Best of `cfg.restarts` independent runs (plus the warm start, if any),
/// evaluated on a single thread.
pub fn multi_restart_max_sequential(
    ineq: &BellInequality,
    rho: &DensityMatrix,
    cfg: &SeesawConfig,
    warm: WarmStart<'_>,
) -> Result<SeesawResult> {
    cfg.validate()?;
    let results = (0..run_count(cfg, warm))
        .map(|k| run_indexed(ineq, rho, cfg, warm, k))
        .collect::<Result<Vec<_>>>()?;
    Ok(pick_best(results))
}

/// Same result as [`multi_restart_max_sequential`], with restarts spread
/// over the current rayon pool.
#[cfg(feature = "parallel")]
pub fn multi_restart_max_parallel(
    ineq: &BellInequality,
    rho: &DensityMatrix,
    cfg: &SeesawConfig,
    warm: WarmStart<'_>,
) -> Result<SeesawResult> {
    use rayon::prelude::*;
    cfg.validate()?;
    let results = (0..run_count(cfg, warm))
        .into_par_iter()
        .map(|k| run_indexed(ineq, rho, cfg, warm, k))
        .collect::<Result<Vec<_>>>()?;
    Ok(pick_best(results))
}

pub fn multi_restart_max_warm(
    ineq: &BellInequality,
    rho: &DensityMatrix,
    cfg: &SeesawConfig,
    warm: WarmStart<'_>,
) -> Result<SeesawResult> {
    #[cfg(feature = "parallel")]
    {
        multi_restart_max_parallel(ineq, rho, cfg, warm)
    }
    #[cfg(not(feature = "parallel"))]
    {
        multi_restart_max_sequential(ineq, rho, cfg, warm)
    }
}

pub fn multi_restart_max(ineq: &BellInequality, rho: &DensityMatrix, cfg: &SeesawConfig) -> Result<SeesawResult> {
    multi_restart_max_warm(ineq, rho, cfg, None)
}
