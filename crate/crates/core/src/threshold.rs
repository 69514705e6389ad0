//! Bisection for the isotropic threshold `α_max` of an inequality.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inequality::BellInequality;
use crate::quantum::isotropic_state;
use crate::seesaw::{multi_restart_max_warm, SeesawConfig, SeesawResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub bracket_tol: f64,
    /// Violations at or below this are treated as zero.
    pub significance: f64,
    pub seesaw: SeesawConfig,
    /// Start the bracket at the separability bound `1/(d+1)` instead of 0.
    pub warm_start_separable: bool,
    /// Seed one extra run per step from the latest violating witness.
    pub warm_restart: bool,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            bracket_tol: 1e-6,
            significance: 1e-13,
            seesaw: SeesawConfig {
                restarts: 200,
                ..SeesawConfig::default()
            },
            warm_start_separable: false,
            warm_restart: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SearchStatus {
    Bracketed,
    /// Nothing above the significance level even at `α = 1`.
    NoViolationObserved,
}

#[derive(Debug, Clone)]
pub struct AlphaEstimate {
    pub name: Option<String>,
    pub d: usize,
    /// Smallest α with a significant violation found.
    pub alpha_upper: f64,
    /// Largest α tested without one.
    pub alpha_lower: f64,
    /// Best run at `alpha_upper` (at `α = 1` when nothing was found).
    pub witness: SeesawResult,
    pub status: SearchStatus,
    /// Bisection steps after the initial `α = 1` probe.
    pub steps: usize,
    pub config: SearchConfig,
}

/// Seed for bisection step `step`; step 0 is the `α = 1` probe.
pub fn step_seed(base_seed: u64, step: usize) -> u64 {
    base_seed ^ (step as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Number of halvings needed to shrink `width` to at most `tol`.
pub fn bisection_steps(width: f64, tol: f64) -> usize {
    let mut n = 0;
    let mut w = width;
    while w > tol {
        w /= 2.0;
        n += 1;
    }
    n
}

pub fn alpha_max(ineq: &BellInequality, d: usize, cfg: &SearchConfig) -> Result<AlphaEstimate> {
    if d < 2 {
        return Err(Error::InvalidArgument(format!("local dimension must be >= 2, got {d}")));
    }
    if !(cfg.bracket_tol > 0.0 && cfg.bracket_tol < 1.0) {
        return Err(Error::InvalidArgument("bracket_tol must lie in (0, 1)".into()));
    }
    cfg.seesaw.validate()?;

    let probe = |alpha: f64, step: usize, warm: Option<&SeesawResult>| -> Result<SeesawResult> {
        let rho = isotropic_state(d, alpha)?;
        let seesaw = SeesawConfig {
            base_seed: step_seed(cfg.seesaw.base_seed, step),
            ..cfg.seesaw.clone()
        };
        let warm = warm.filter(|_| cfg.warm_restart).map(|w| (&w.best_a, &w.best_b));
        multi_restart_max_warm(ineq, &rho, &seesaw, warm)
    };

    let top = probe(1.0, 0, None)?;
    if top.best_violation <= cfg.significance {
        return Ok(AlphaEstimate {
            name: ineq.name().map(str::to_owned),
            d,
            alpha_upper: 1.0,
            alpha_lower: 1.0,
            witness: top,
            status: SearchStatus::NoViolationObserved,
            steps: 0,
            config: cfg.clone(),
        });
    }

    let mut upper = 1.0;
    let mut lower = if cfg.warm_start_separable {
        1.0 / (d as f64 + 1.0)
    } else {
        0.0
    };
    let mut witness = top;
    let mut steps = 0;
    while upper - lower > cfg.bracket_tol {
        steps += 1;
        let mid = 0.5 * (lower + upper);
        let r = probe(mid, steps, Some(&witness))?;
        if r.best_violation > cfg.significance {
            upper = mid;
            witness = r;
        } else {
            lower = mid;
        }
    }
    Ok(AlphaEstimate {
        name: ineq.name().map(str::to_owned),
        d,
        alpha_upper: upper,
        alpha_lower: lower,
        witness,
        status: SearchStatus::Bracketed,
        steps,
        config: cfg.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::violation;

    fn chsh() -> BellInequality {
        BellInequality::new(vec![-1, 0], vec![-1, 0], vec![vec![1, 1], vec![1, -1]], 0).unwrap()
    }

    fn quick(restarts: usize, tol: f64) -> SearchConfig {
        SearchConfig {
            bracket_tol: tol,
            seesaw: SeesawConfig {
                restarts,
                base_seed: 3,
                ..SeesawConfig::default()
            },
            ..SearchConfig::default()
        }
    }

    #[test]
    fn step_count() {
        assert_eq!(bisection_steps(1.0, 1e-6), 20);
        assert_eq!(bisection_steps(1.0, 0.25), 2);
        assert_eq!(bisection_steps(1.0, 1.0), 0);
    }

    #[test]
    fn qubit_chsh_bracket() {
        let est = alpha_max(&chsh(), 2, &quick(20, 1e-4)).unwrap();
        assert_eq!(est.status, SearchStatus::Bracketed);
        assert!(est.alpha_lower < est.alpha_upper);
        assert!(est.alpha_upper - est.alpha_lower <= 1e-4);
        assert_eq!(est.steps, bisection_steps(1.0, 1e-4));
        assert!((est.alpha_upper - 1.0 / 2f64.sqrt()).abs() < 5e-4, "{}", est.alpha_upper);
        let rho = isotropic_state(2, est.alpha_upper).unwrap();
        let again = violation(&chsh(), &rho, &est.witness.best_a, &est.witness.best_b).unwrap();
        assert!(again > 1e-13 && (again - est.witness.best_violation).abs() < 1e-10);
    }

    #[test]
    fn positive_probability_is_flagged() {
        let a1 = BellInequality::new(vec![0], vec![0], vec![vec![-1]], 0).unwrap();
        let est = alpha_max(&a1, 3, &quick(10, 1e-3)).unwrap();
        assert_eq!(est.status, SearchStatus::NoViolationObserved);
        assert_eq!(est.alpha_upper, 1.0);
    }

    #[test]
    fn separable_warm_start_narrows_bracket() {
        let mut cfg = quick(10, 1e-3);
        cfg.warm_start_separable = true;
        let est = alpha_max(&chsh(), 2, &cfg).unwrap();
        assert_eq!(est.steps, bisection_steps(1.0 - 1.0 / 3.0, 1e-3));
        assert!((est.alpha_upper - 1.0 / 2f64.sqrt()).abs() < 2e-3);
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(alpha_max(&chsh(), 1, &quick(1, 1e-3)).is_err());
        assert!(alpha_max(&chsh(), 2, &quick(1, 0.0)).is_err());
    }
}
