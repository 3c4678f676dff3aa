//! Built-in example matrices and their claimed properties.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{OpError, Result};
use crate::facts::Facts;
use crate::io::{parse_document, Claim, MatrixDocument};
use crate::kernel::Tolerances;
use crate::search::Target;
use crate::symmetry::{CSVerdict, OracleConfig};

const BUILTIN: [&str; 5] = [
    include_str!("../fixtures/example_binormal_cs.json"),
    include_str!("../fixtures/square_cs_aluthge_not_cs.json"),
    include_str!("../fixtures/square_and_aluthge_cs.json"),
    include_str!("../fixtures/aluthge_not_binormal.json"),
    include_str!("../fixtures/square_not_cs.json"),
];

pub fn builtin() -> Vec<MatrixDocument> {
    BUILTIN
        .iter()
        .map(|text| parse_document(text).expect("built-in fixtures are well formed"))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClaimCheck {
    pub property: String,
    pub claimed: Claim,
    /// `None` when the property could not be decided.
    pub observed: Option<Claim>,
    pub holds: bool,
    /// Residual, margin or witness behind the observation.
    pub evidence: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixtureOutcome {
    pub name: String,
    pub n: usize,
    pub claims: Vec<ClaimCheck>,
    pub passed: bool,
    pub seconds: f64,
}

fn evidence(v: &CSVerdict) -> String {
    match v {
        CSVerdict::CertifiedCs { residual, .. } => format!("certificate residual {residual:.3e}"),
        CSVerdict::CertifiedNotCs { screen, margin } => format!("{} screen margin {margin:.3e}", screen.as_str()),
        CSVerdict::Inconclusive { best_residual } => format!("best oracle residual {best_residual:.3e}"),
    }
}

/// Evaluates every claim of `doc`. Claim keys use the target syntax of a
/// single property, e.g. `binormal`, `sq.cs`, `al.binormal`.
pub fn check_claims(doc: &MatrixDocument, tol: &Tolerances, oracle: &OracleConfig) -> Result<FixtureOutcome> {
    let start = Instant::now();
    let facts = Facts::new(doc.matrix()?, tol, *oracle);
    let mut claims = Vec::with_capacity(doc.expected.len());
    for (key, &claimed) in &doc.expected {
        let Target::Atom(op, atom) = key.parse::<Target>()? else {
            return Err(OpError::InvalidTarget(format!("claim key `{key}` must name a single property")));
        };
        let is_cs = atom.name() == "cs";
        let (observed, evidence) = match claimed {
            Claim::Verdict(_) if !is_cs => {
                return Err(OpError::InvalidTarget(format!("verdict claim on non-cs property `{key}`")));
            }
            Claim::Verdict(_) => {
                let v = facts.cs(op)?;
                (Some(Claim::Verdict(v.kind())), evidence(v))
            }
            Claim::Holds(_) if is_cs => {
                let v = facts.cs(op)?;
                (v.decided().map(Claim::Holds), evidence(v))
            }
            Claim::Holds(_) => {
                let value = Target::Atom(op, atom).eval(&facts);
                let ev = match atom.name() {
                    "binormal" => format!("relative commutator {:.3e}", facts.binormal(op)?.witness),
                    "normal" => format!("relative commutator {:.3e}", facts.normal(op)?.witness),
                    _ => String::new(),
                };
                (value.map(Claim::Holds), ev)
            }
        };
        claims.push(ClaimCheck {
            property: key.clone(),
            claimed,
            holds: observed == Some(claimed),
            observed,
            evidence,
        });
    }
    Ok(FixtureOutcome {
        name: doc.name.clone(),
        n: doc.n,
        passed: claims.iter().all(|c| c.holds),
        claims,
        seconds: start.elapsed().as_secs_f64(),
    })
}

pub fn check_builtin(tol: &Tolerances, oracle: &OracleConfig) -> Result<Vec<FixtureOutcome>> {
    builtin().iter().map(|d| check_claims(d, tol, oracle)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_fixtures_parse_with_integer_entries() {
        let docs = builtin();
        assert_eq!(docs.len(), 5);
        for d in &docs {
            let m = d.matrix().unwrap();
            assert!(m.entries().iter().all(|z| z.im == 0.0 && z.re.fract() == 0.0), "{}", d.name);
            assert!(!d.expected.is_empty());
        }
    }

    #[test]
    fn first_fixture_claims_hold() {
        let out = check_claims(&builtin()[0], &Tolerances::default(), &OracleConfig::default()).unwrap();
        assert!(out.passed, "{out:?}");
        assert_eq!(out.claims.len(), 3);
    }
}
