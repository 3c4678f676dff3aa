use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{generate, RandomSpec, Target};
use crate::error::Result;
use crate::facts::Facts;
use crate::kernel::{ComplexMatrix, Tolerances};
use crate::properties::{property_report, PropertyReport, DEFAULT_CENTERED_DEPTH};
use crate::symmetry::OracleConfig;

#[derive(Debug, Clone)]
pub struct HuntConfig {
    /// Number of generated samples to examine.
    pub budget: usize,
    pub max_found: Option<usize>,
    /// Worker threads; 1 runs inline.
    pub jobs: usize,
    pub oracle: OracleConfig,
}

impl Default for HuntConfig {
    fn default() -> Self {
        Self {
            budget: 10_000,
            max_found: None,
            jobs: 1,
            oracle: OracleConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HuntMatch {
    pub index: usize,
    /// Seed handed to the oracle for this sample.
    pub seed: u64,
    pub matrix: ComplexMatrix,
    pub report: PropertyReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HuntOutcome {
    pub target: String,
    pub spec: RandomSpec,
    pub tolerances: Tolerances,
    pub oracle: OracleConfig,
    pub examined: usize,
    pub found: Vec<HuntMatch>,
    /// The whole budget was spent without reaching `max_found`.
    pub budget_exhausted: bool,
}

const CHUNK: usize = 2048;

fn probe(target: &Target, spec: &RandomSpec, index: usize, tol: &Tolerances, oracle: &OracleConfig) -> Result<Option<ComplexMatrix>> {
    let t = generate(spec, index)?;
    let cfg = OracleConfig {
        seed: spec.instance_seed(index),
        ..*oracle
    };
    let facts = Facts::new(t, tol, cfg);
    Ok(target.matches(&facts).then(|| facts.t().clone()))
}

/// Examines samples `0..budget` of `spec` in index order. Chunks are evaluated
/// in parallel but merged by index, so the outcome does not depend on `jobs`.
pub fn hunt(target: &Target, spec: &RandomSpec, cfg: &HuntConfig, tol: &Tolerances) -> Result<HuntOutcome> {
    let spec = RandomSpec {
        count: cfg.budget.max(1),
        ..spec.clone()
    };
    spec.validate()?;
    let limit = cfg.max_found.unwrap_or(usize::MAX);
    let pool = (cfg.jobs > 1).then(|| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.jobs)
            .build()
            .expect("thread pool")
    });
    let mut hits: Vec<(usize, ComplexMatrix)> = Vec::new();
    let mut examined = 0;
    let mut start = 0;
    while start < cfg.budget && hits.len() < limit {
        let end = (start + CHUNK).min(cfg.budget);
        let chunk: Vec<Result<Option<ComplexMatrix>>> = match &pool {
            None => (start..end).map(|i| probe(target, &spec, i, tol, &cfg.oracle)).collect(),
            Some(pool) => pool.install(|| {
                (start..end)
                    .into_par_iter()
                    .map(|i| probe(target, &spec, i, tol, &cfg.oracle))
                    .collect()
            }),
        };
        for (offset, r) in chunk.into_iter().enumerate() {
            examined = start + offset + 1;
            if let Some(m) = r? {
                hits.push((start + offset, m));
                if hits.len() >= limit {
                    break;
                }
            }
        }
        start = end;
    }
    let mut found = Vec::with_capacity(hits.len());
    for (index, matrix) in hits {
        let seed = spec.instance_seed(index);
        let report = property_report(&matrix, DEFAULT_CENTERED_DEPTH, tol, &OracleConfig { seed, ..cfg.oracle })?;
        found.push(HuntMatch {
            index,
            seed,
            matrix,
            report,
        });
    }
    Ok(HuntOutcome {
        target: target.to_string(),
        budget_exhausted: found.len() < limit,
        spec,
        tolerances: *tol,
        oracle: cfg.oracle,
        examined,
        found,
    })
}

/// Re-checks a stored outcome from its matrices and seeds alone: every match
/// must still satisfy the target and reproduce its stored report.
pub fn reverify(outcome: &HuntOutcome) -> Result<bool> {
    let target: Target = outcome.target.parse()?;
    let tol = &outcome.tolerances;
    for m in &outcome.found {
        let oracle = OracleConfig {
            seed: m.seed,
            ..outcome.oracle
        };
        let facts = Facts::new(m.matrix.clone(), tol, oracle);
        if !target.matches(&facts) {
            return Ok(false);
        }
        if property_report(&m.matrix, DEFAULT_CENTERED_DEPTH, tol, &oracle)? != m.report {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::search::Family;

    #[test]
    fn impossible_target_finds_nothing() {
        let tol = Tolerances::default();
        let spec = RandomSpec::new(Family::IntegerDense, 3, 1, 1);
        let cfg = HuntConfig {
            budget: 300,
            ..HuntConfig::default()
        };
        let out = hunt(&"normal & !binormal".parse().unwrap(), &spec, &cfg, &tol).unwrap();
        assert!(out.found.is_empty());
        assert!(out.budget_exhausted);
        assert_eq!(out.examined, 300);
    }

    #[test]
    fn thread_count_does_not_change_results() {
        let tol = Tolerances::default();
        let spec = RandomSpec::new(Family::IntegerDense, 2, 4, 1).with_bound(1);
        let target: Target = "binormal & !normal".parse().unwrap();
        let run = |jobs| {
            let cfg = HuntConfig {
                budget: 400,
                max_found: Some(5),
                jobs,
                ..HuntConfig::default()
            };
            hunt(&target, &spec, &cfg, &tol).unwrap()
        };
        let (a, b) = (run(1), run(4));
        assert_eq!(a, b);
        assert_eq!(a.found.len(), 5);
        assert!(!a.budget_exhausted);
        assert!(reverify(&a).unwrap());
        let mut tampered = a.clone();
        tampered.found[0].matrix = ComplexMatrix::identity(2);
        assert!(!reverify(&tampered).unwrap());
    }
}
