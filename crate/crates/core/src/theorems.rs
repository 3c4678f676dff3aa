//! Executable theorem checks with pass / fail / skip semantics.
//!
//! Each check inspects one matrix through a shared [`Facts`] cache and emits
//! named clauses. A clause fails only on a decisive disagreement: the
//! hypothesis holds at the tight tolerance while the conclusion is violated
//! by at least `eps_screen`. Values between the two thresholds, inconclusive
//! oracle verdicts and unmet hypotheses are skips, each with a reason.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{OpError, Result};
use crate::facts::{Facts, Operand};
use crate::kernel::{commutator_norm, herm_eig, min_gap, ComplexMatrix, Tolerances};
use crate::properties::{Paranormal, DEFAULT_CENTERED_DEPTH};
use crate::search::{generate, RandomSpec};
use crate::symmetry::{conjugation_commutes_with, CSVerdict, OracleConfig};
use crate::transforms::{square_polar_identity, PolarMode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TheoremId {
    HyponormalCs,
    SquareNormal,
    ConjugationCommutation,
    Duggal,
    AluthgeSquare,
    WeightedPermutation,
    ParanormalFamily,
    SquarePsd,
    ModulusCommutation,
}

impl TheoremId {
    pub const ALL: [TheoremId; 9] = [
        TheoremId::HyponormalCs,
        TheoremId::SquareNormal,
        TheoremId::ConjugationCommutation,
        TheoremId::Duggal,
        TheoremId::AluthgeSquare,
        TheoremId::WeightedPermutation,
        TheoremId::ParanormalFamily,
        TheoremId::SquarePsd,
        TheoremId::ModulusCommutation,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TheoremId::HyponormalCs => "hyponormal_cs",
            TheoremId::SquareNormal => "square_normal",
            TheoremId::ConjugationCommutation => "conjugation_commutation",
            TheoremId::Duggal => "duggal",
            TheoremId::AluthgeSquare => "aluthge_square",
            TheoremId::WeightedPermutation => "weighted_permutation",
            TheoremId::ParanormalFamily => "paranormal_family",
            TheoremId::SquarePsd => "square_psd",
            TheoremId::ModulusCommutation => "modulus_commutation",
        }
    }

    /// One-line statement of what is checked.
    pub fn statement(self) -> &'static str {
        match self {
            TheoremId::HyponormalCs => "hyponormal and complex symmetric implies normal",
            TheoremId::SquareNormal => "T² normal implies T binormal and complex symmetric",
            TheoremId::ConjugationCommutation => "for CS T = CTC*: binormal iff C commutes with TT*T*T",
            TheoremId::Duggal => "for binormal T: T is CS iff its Duggal transform is CS",
            TheoremId::AluthgeSquare => "for binormal T: Aluthge transform CS implies T² CS",
            TheoremId::WeightedPermutation => {
                "binormal CS with distinct singular values is unitarily an involutive weighted permutation"
            }
            TheoremId::ParanormalFamily => "paranormal, hyponormal and normal coincide under binormal / CS hypotheses",
            TheoremId::SquarePsd => "T² PSD iff T binormal, CS and U self-adjoint",
            TheoremId::ModulusCommutation => "for unitary U: binormal iff |T| and |T̂| commute",
        }
    }

    /// The two directions of each biconditional, as clause names.
    pub fn directions(self) -> &'static [&'static str] {
        match self {
            TheoremId::ConjugationCommutation => &["binormal=>commutes", "commutes=>binormal"],
            TheoremId::Duggal => &["cs=>cs_duggal", "cs_duggal=>cs"],
            TheoremId::ParanormalFamily => &[
                "hyponormal=>paranormal",
                "paranormal=>hyponormal",
                "cs_normal=>paranormal",
                "cs_paranormal=>normal",
                "normal=>normal_square",
                "normal_square=>normal",
            ],
            TheoremId::SquarePsd => &["square_psd=>u_self_adjoint", "u_self_adjoint=>square_psd"],
            TheoremId::ModulusCommutation => &["binormal=>moduli_commute", "moduli_commute=>binormal"],
            _ => &[],
        }
    }

    /// Parses a comma separated list; `all` selects every theorem.
    pub fn parse_list(s: &str) -> Result<Vec<TheoremId>> {
        if s.trim() == "all" {
            return Ok(Self::ALL.to_vec());
        }
        let mut out = Vec::new();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let id: TheoremId = part.parse()?;
            if !out.contains(&id) {
                out.push(id);
            }
        }
        if out.is_empty() {
            return Err(OpError::UnknownTheorem(s.to_string()));
        }
        Ok(out)
    }
}

impl fmt::Display for TheoremId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TheoremId {
    type Err = OpError;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| OpError::UnknownTheorem(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum ClauseOutcome {
    Pass,
    Fail { witness: f64, detail: String },
    Skip { reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Clause {
    pub name: String,
    #[serde(flatten)]
    pub outcome: ClauseOutcome,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", content = "reason", rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    Skip(String),
}

/// Outcome of one theorem on one matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceCheck {
    pub theorem: TheoremId,
    pub clauses: Vec<Clause>,
    /// Recorded but never asserted.
    pub notes: BTreeMap<String, bool>,
    skip_reason: Option<String>,
}

impl InstanceCheck {
    fn new(theorem: TheoremId) -> Self {
        Self {
            theorem,
            clauses: Vec::new(),
            notes: BTreeMap::new(),
            skip_reason: None,
        }
    }

    pub fn verdict(&self) -> Verdict {
        if self.first_failure().is_some() {
            return Verdict::Fail;
        }
        if self.clauses.iter().any(|c| c.outcome == ClauseOutcome::Pass) {
            return Verdict::Pass;
        }
        let reason = self.skip_reason.clone().or_else(|| {
            self.clauses.iter().find_map(|c| match &c.outcome {
                ClauseOutcome::Skip { reason } => Some(reason.clone()),
                _ => None,
            })
        });
        Verdict::Skip(reason.unwrap_or_else(|| "no clause applied".into()))
    }

    pub fn first_failure(&self) -> Option<&Clause> {
        self.clauses.iter().find(|c| matches!(c.outcome, ClauseOutcome::Fail { .. }))
    }

    /// Marks the whole instance as skipped and stops evaluation.
    fn skip_all(&mut self, reason: &str) {
        self.skip_reason = Some(reason.to_string());
    }

    fn push(&mut self, name: &str, outcome: ClauseOutcome) {
        self.clauses.push(Clause {
            name: name.to_string(),
            outcome,
        });
    }

    fn pass(&mut self, name: &str) {
        self.push(name, ClauseOutcome::Pass);
    }

    fn fail(&mut self, name: &str, witness: f64, detail: impl Into<String>) {
        self.push(
            name,
            ClauseOutcome::Fail {
                witness,
                detail: detail.into(),
            },
        );
    }

    fn skip(&mut self, name: &str, reason: impl Into<String>) {
        self.push(name, ClauseOutcome::Skip { reason: reason.into() });
    }

    /// Conclusion "w is small": pass at `w ≤ holds`, fail at `w ≥ fails`.
    fn expect_small(&mut self, name: &str, what: &str, w: f64, holds: f64, fails: f64) {
        if w <= holds {
            self.pass(name);
        } else if w >= fails {
            self.fail(name, w, format!("{what} = {w:.3e}"));
        } else {
            self.skip(name, format!("{what} in tolerance band"));
        }
    }

    /// Conclusion "T is not refuted as complex symmetric"; inconclusive skips.
    fn expect_cs(&mut self, name: &str, verdict: &CSVerdict) {
        match verdict {
            CSVerdict::CertifiedCs { .. } => self.pass(name),
            CSVerdict::CertifiedNotCs { screen, margin } => {
                self.fail(name, *margin, format!("{} screen refutes with margin {margin:.3e}", screen.as_str()))
            }
            CSVerdict::Inconclusive { .. } => self.skip(name, "cs inconclusive"),
        }
    }
}

fn cs_reason(v: &CSVerdict) -> &'static str {
    match v {
        CSVerdict::CertifiedCs { .. } => "cs",
        CSVerdict::CertifiedNotCs { .. } => "not cs",
        CSVerdict::Inconclusive { .. } => "cs inconclusive",
    }
}

/// Residual scale `max(1, ||T||_F²)` for quadratic identities.
fn quadratic_scale(t: &ComplexMatrix) -> f64 {
    t.frobenius_norm().powi(2).max(1.0)
}

/// Runs one theorem against the facts of one matrix. Numerical failures
/// inside the check become a skip with the error as reason.
pub fn check_theorem(id: TheoremId, facts: &Facts) -> InstanceCheck {
    let mut out = InstanceCheck::new(id);
    let r = match id {
        TheoremId::HyponormalCs => hyponormal_cs(facts, &mut out),
        TheoremId::SquareNormal => square_normal(facts, &mut out),
        TheoremId::ConjugationCommutation => conjugation_commutation(facts, &mut out),
        TheoremId::Duggal => duggal(facts, &mut out),
        TheoremId::AluthgeSquare => aluthge_square(facts, &mut out),
        TheoremId::WeightedPermutation => weighted_permutation(facts, &mut out),
        TheoremId::ParanormalFamily => paranormal_family(facts, &mut out),
        TheoremId::SquarePsd => square_psd(facts, &mut out),
        TheoremId::ModulusCommutation => modulus_commutation(facts, &mut out),
    };
    if let Err(e) = r {
        out.clauses.clear();
        out.skip_all(&format!("numerical failure: {e}"));
    }
    out
}

fn hyponormal_cs(f: &Facts, out: &mut InstanceCheck) -> Result<()> {
    if !f.hyponormal(Operand::T)?.holds {
        out.skip_all("not hyponormal");
        return Ok(());
    }
    let cs = f.cs(Operand::T)?;
    if !cs.is_cs() {
        out.skip_all(cs_reason(cs));
        return Ok(());
    }
    let tol = f.tol();
    let w = f.normal(Operand::T)?.witness;
    out.expect_small("hyponormal_cs=>normal", "normality residual", w, tol.eps_comm, tol.eps_screen);
    Ok(())
}

fn square_normal(f: &Facts, out: &mut InstanceCheck) -> Result<()> {
    if !f.normal(Operand::Square)?.holds {
        out.skip_all("square not normal");
        return Ok(());
    }
    let tol = f.tol();
    let b = f.binormal(Operand::T)?.witness;
    out.expect_small("square_normal=>binormal", "binormality residual", b, tol.eps_comm, tol.eps_screen);
    out.expect_cs("square_normal=>cs", f.cs(Operand::T)?);
    Ok(())
}

fn conjugation_commutation(f: &Facts, out: &mut InstanceCheck) -> Result<()> {
    let cs = f.cs(Operand::T)?;
    let Some(c) = cs.conjugation() else {
        out.skip_all(cs_reason(cs));
        return Ok(());
    };
    let tol = f.tol();
    let t = f.t();
    let scale = t.gram().frobenius_norm() * t.cogram().frobenius_norm();
    let r = if scale == 0.0 {
        0.0
    } else {
        conjugation_commutes_with(t, c)? / scale
    };
    let b = f.binormal(Operand::T)?.witness;
    biconditional(
        out,
        (b, "binormal", "binormality residual"),
        (r, "commutes", "relative conjugation commutator"),
        tol,
    );
    Ok(())
}

/// Tallies both directions of `P ⟺ Q` for residuals `p`, `q` (small means
/// true): a hypothesis holds at `eps_cert` or below (`eps_comm` for
/// binormality), a conclusion is violated at `eps_screen` or above.
fn biconditional(out: &mut InstanceCheck, p: (f64, &str, &str), q: (f64, &str, &str), tol: &Tolerances) {
    let holds = |name: &str| if name == "binormal" { tol.eps_comm } else { tol.eps_cert };
    let (pw, pn, pd) = p;
    let (qw, qn, qd) = q;
    let mut applied = false;
    if pw <= holds(pn) {
        applied = true;
        let name = format!("{pn}=>{qn}");
        if qw < tol.eps_screen {
            out.pass(&name);
        } else {
            out.fail(&name, qw, format!("{qd} = {qw:.3e} while {pd} = {pw:.3e}"));
        }
    }
    if qw <= holds(qn) {
        applied = true;
        let name = format!("{qn}=>{pn}");
        if pw < tol.eps_screen {
            out.pass(&name);
        } else {
            out.fail(&name, pw, format!("{pd} = {pw:.3e} while {qd} = {qw:.3e}"));
        }
    }
    if !applied {
        if pw >= tol.eps_screen && qw >= tol.eps_screen {
            out.pass(&format!("!{pn}<=>!{qn}"));
        } else {
            out.skip(&format!("!{pn}<=>!{qn}"), "residual in tolerance band");
        }
    }
}

fn duggal(f: &Facts, out: &mut InstanceCheck) -> Result<()> {
    if !f.binormal(Operand::T)?.holds {
        out.skip_all("not binormal");
        return Ok(());
    }
    let ct = f.cs(Operand::T)?;
    let cd = f.cs(Operand::Duggal)?;
    match (ct, cd) {
        (CSVerdict::CertifiedCs { .. }, CSVerdict::CertifiedCs { .. }) => {
            out.pass("cs=>cs_duggal");
            out.pass("cs_duggal=>cs");
        }
        (CSVerdict::CertifiedNotCs { .. }, CSVerdict::CertifiedNotCs { .. }) => out.pass("!cs<=>!cs_duggal"),
        (CSVerdict::CertifiedCs { .. }, CSVerdict::CertifiedNotCs { screen, margin }) => out.fail(
            "cs=>cs_duggal",
            *margin,
            format!("T certified, Duggal transform refuted by {} screen", screen.as_str()),
        ),
        (CSVerdict::CertifiedNotCs { screen, margin }, CSVerdict::CertifiedCs { .. }) => out.fail(
            "cs_duggal=>cs",
            *margin,
            format!("Duggal transform certified, T refuted by {} screen", screen.as_str()),
        ),
        _ => out.skip("cs_agreement", "cs inconclusive"),
    }
    let parts = f.polar()?;
    if ct.is_cs() && parts.u_unitary {
        let t = f.t();
        let back = parts.u.matmul(f.matrix(Operand::Duggal)?).matmul(&parts.u.adjoint());
        let r = t.distance(&back) / t.frobenius_norm().max(1.0);
        let tol = f.tol();
        out.expect_small("unitary_equivalence", "||T − U T̂ U*||", r, tol.eps_cert, tol.eps_screen);
    }
    Ok(())
}

fn aluthge_square(f: &Facts, out: &mut InstanceCheck) -> Result<()> {
    if !f.binormal(Operand::T)?.holds {
        out.skip_all("not binormal");
        return Ok(());
    }
    let ca = f.cs(Operand::Aluthge)?;
    if ca.is_cs() {
        out.expect_cs("cs_aluthge=>cs_square", f.cs(Operand::Square)?);
    } else {
        out.skip("cs_aluthge=>cs_square", format!("aluthge {}", cs_reason(ca)));
    }
    let parts = f.polar()?;
    if parts.u_unitary {
        let t = f.t();
        let al = f.matrix(Operand::Aluthge)?;
        let lhs = parts.u.matmul(al).matmul(&parts.u.adjoint()).matmul(al);
        let r = lhs.distance(&t.square()) / quadratic_scale(t);
        let tol = f.tol();
        out.expect_small("proof_identity", "||U T̃ U* T̃ − T²||", r, tol.eps_cert, tol.eps_screen);
    }
    Ok(())
}

/// Unitarily invariant form: in an eigenbasis `V` of `T*T`, `B = V* T V` has
/// one nonzero per column at the row whose `TT*` eigenvalue matches, and the
/// induced permutation is an involution. `T²` is then normal.
fn weighted_permutation(f: &Facts, out: &mut InstanceCheck) -> Result<()> {
    if !f.binormal(Operand::T)?.holds {
        out.skip_all("not binormal");
        return Ok(());
    }
    let cs = f.cs(Operand::T)?;
    if !cs.is_cs() {
        out.skip_all(cs_reason(cs));
        return Ok(());
    }
    let tol = f.tol();
    let parts = f.polar()?;
    if !tol.all_distinct(&parts.singular_values) {
        out.skip_all("repeated singular values");
        return Ok(());
    }
    let t = f.t();
    let n = t.n();
    let gram = t.gram();
    let eg = herm_eig(&gram, tol)?;
    let v = &eg.vectors;
    let vh = v.adjoint();
    let d = vh.matmul(&t.cogram()).matmul(v);
    let b = vh.matmul(t).matmul(v);

    // Eigenvector accuracy degrades with the relative eigenvalue gap.
    let top = eg.max_abs().max(f64::MIN_POSITIVE);
    let rel_gap = (min_gap(&eg.values) / top).max(f64::MIN_POSITIVE);
    let allowance = 1e3 * f64::EPSILON / rel_gap;

    let off: f64 = (0..n)
        .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
        .map(|(i, j)| d.get(i, j).norm_sqr())
        .sum::<f64>()
        .sqrt()
        / d.frobenius_norm().max(f64::MIN_POSITIVE);
    expect_within(out, "simultaneous_diagonalization", "off-diagonal mass of V* TT* V", off, allowance, tol);

    let perm: Vec<usize> = eg
        .values
        .iter()
        .map(|&g| {
            (0..n)
                .min_by(|&a, &c| (d.get(a, a).re - g).abs().total_cmp(&(d.get(c, c).re - g).abs()))
                .expect("n ≥ 1")
        })
        .collect();
    let mut seen = vec![false; n];
    let bijective = perm.iter().all(|&p| !std::mem::replace(&mut seen[p], true));
    if !bijective {
        out.fail("weighted_permutation_form", 1.0, "eigenvalues of TT* do not match those of T*T");
        return Ok(());
    }
    let stray: f64 = (0..n)
        .flat_map(|c| (0..n).map(move |r| (r, c)))
        .filter(|&(r, c)| r != perm[c])
        .map(|(r, c)| b.get(r, c).norm_sqr())
        .sum::<f64>()
        .sqrt()
        / t.frobenius_norm().max(f64::MIN_POSITIVE);
    expect_within(out, "weighted_permutation_form", "mass of V* T V off the permutation", stray, allowance, tol);

    if (0..n).all(|i| perm[perm[i]] == i) {
        out.pass("involutive");
    } else {
        out.fail("involutive", 1.0, format!("induced permutation {perm:?} is not an involution"));
    }
    let sq = f.normal(Operand::Square)?.witness;
    out.expect_small("square_normal", "normality residual of T²", sq, tol.eps_comm, tol.eps_screen);

    let st = f.structure(Operand::T)?;
    out.notes.insert("literal_weighted_permutation".into(), st.is_weighted_permutation);
    out.notes.insert("literal_involution".into(), st.is_involution);
    Ok(())
}

/// Pass at `w ≤ eps_screen + allowance`, fail otherwise.
fn expect_within(out: &mut InstanceCheck, name: &str, what: &str, w: f64, allowance: f64, tol: &Tolerances) {
    if w <= tol.eps_screen + allowance {
        out.pass(name);
    } else {
        out.fail(name, w, format!("{what} = {w:.3e} (allowance {allowance:.1e})"));
    }
}

fn paranormal_family(f: &Facts, out: &mut InstanceCheck) -> Result<()> {
    let tol = f.tol();
    let para = f.paranormal(Operand::T)?;
    let p = para.decided();
    let binormal = f.binormal(Operand::T)?.holds;
    let normal = f.normal(Operand::T)?;

    if binormal {
        let hypo = f.hyponormal(Operand::T)?;
        match p {
            None => out.skip("hyponormal<=>paranormal", "paranormal inconclusive"),
            Some(pv) => {
                if hypo.holds {
                    if pv {
                        out.pass("hyponormal=>paranormal");
                    } else {
                        out.fail("hyponormal=>paranormal", para_gap(&para), "hyponormal but a paranormality witness exists");
                    }
                }
                if pv {
                    if hypo.holds {
                        out.pass("paranormal=>hyponormal");
                    } else {
                        out.fail(
                            "paranormal=>hyponormal",
                            hypo.min_eig,
                            format!("paranormal but T*T − TT* has eigenvalue {:.3e}", hypo.min_eig),
                        );
                    }
                }
                if !hypo.holds && !pv {
                    out.pass("!hyponormal<=>!paranormal");
                }
            }
        }

        let cs = f.cs(Operand::T)?;
        if cs.is_cs() {
            match p {
                None => out.skip("normal<=>paranormal", "paranormal inconclusive"),
                Some(pv) => {
                    if normal.holds {
                        if pv {
                            out.pass("cs_normal=>paranormal");
                        } else {
                            out.fail("cs_normal=>paranormal", para_gap(&para), "normal but a paranormality witness exists");
                        }
                    }
                    if pv {
                        out.expect_small(
                            "cs_paranormal=>normal",
                            "normality residual",
                            normal.witness,
                            tol.eps_comm,
                            tol.eps_screen,
                        );
                    }
                    if !normal.holds && !pv {
                        out.pass("!cs_normal<=>!paranormal");
                    }
                }
            }
        }
    }

    if p == Some(true) {
        let sq = f.normal(Operand::Square)?;
        if normal.holds {
            out.expect_small("normal=>normal_square", "normality residual of T²", sq.witness, tol.eps_comm, tol.eps_screen);
        }
        if sq.holds {
            out.expect_small("normal_square=>normal", "normality residual", normal.witness, tol.eps_comm, tol.eps_screen);
        }
        if !normal.holds && !sq.holds {
            out.pass("!normal<=>!normal_square");
        }
    }
    if out.clauses.is_empty() {
        out.skip_all(match p {
            None => "paranormal inconclusive",
            Some(_) => "not binormal and not paranormal",
        });
    }
    Ok(())
}

fn para_gap(p: &Paranormal) -> f64 {
    match p {
        Paranormal::No { gap, .. } => *gap,
        _ => 0.0,
    }
}

fn square_psd(f: &Facts, out: &mut InstanceCheck) -> Result<()> {
    let tol = f.tol();
    let t = f.t();
    let parts = f.polar()?;
    let sq_psd = f.structure(Operand::Square)?.is_psd;
    let binormal = f.binormal(Operand::T)?;
    let cs = f.cs(Operand::T)?;

    if sq_psd {
        out.expect_small(
            "square_psd=>binormal",
            "binormality residual",
            binormal.witness,
            tol.eps_comm,
            tol.eps_screen,
        );
        out.expect_cs("square_psd=>cs", cs);
        // U is only determined on the range of |T|.
        let skew = &parts.u - &parts.u.adjoint();
        let r = parts.p.matmul(&skew).matmul(&parts.p).frobenius_norm() / parts.p.frobenius_norm().powi(2).max(f64::MIN_POSITIVE);
        out.expect_small("square_psd=>u_self_adjoint", "||P (U − U*) P|| / ||P||²", r, tol.eps_cert, tol.eps_screen);
    }

    if binormal.holds && cs.is_cs() && parts.u_unitary {
        if parts.u_self_adjoint {
            if sq_psd {
                out.pass("u_self_adjoint=>square_psd");
            } else {
                let sq = f.matrix(Operand::Square)?;
                let min = herm_eig(&sq.hermitian_part(), tol)?.min();
                out.fail(
                    "u_self_adjoint=>square_psd",
                    min,
                    format!("T² not PSD: skew part {:.3e}, smallest eigenvalue {min:.3e}", sq.skew_norm()),
                );
            }
        } else if !sq_psd {
            out.pass("!u_self_adjoint<=>!square_psd");
        }
        let res = square_polar_identity(t, PolarMode::Canonical, tol)?;
        let scale = quadratic_scale(t);
        out.expect_small("polar_square_lemma", "square polar residual", res.max() / scale, tol.eps_cert, tol.eps_screen);
    }
    if out.clauses.is_empty() {
        out.skip_all(if !binormal.holds {
            "square not psd and not binormal"
        } else if !cs.is_cs() {
            "square not psd and T not certified cs"
        } else {
            "square not psd and U not unitary"
        });
    }
    Ok(())
}

fn modulus_commutation(f: &Facts, out: &mut InstanceCheck) -> Result<()> {
    let parts = f.polar()?;
    if !parts.u_unitary {
        out.skip_all("polar factor not unitary");
        return Ok(());
    }
    let tol = f.tol();
    let abs_dug = crate::kernel::psd_sqrt(&f.matrix(Operand::Duggal)?.gram(), tol)?;
    let scale = parts.p.frobenius_norm() * abs_dug.frobenius_norm();
    let r = if scale == 0.0 {
        0.0
    } else {
        commutator_norm(&parts.p, &abs_dug)? / scale
    };
    let b = f.binormal(Operand::T)?.witness;
    biconditional(
        out,
        (b, "binormal", "binormality residual"),
        (r, "moduli_commute", "relative commutator of |T| and |T̂|"),
        tol,
    );
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub tol: Tolerances,
    /// Restart and iteration limits; the seed is replaced per instance.
    pub oracle: OracleConfig,
    pub centered_depth: usize,
    pub jobs: usize,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            tol: Tolerances::default(),
            oracle: OracleConfig::default(),
            centered_depth: DEFAULT_CENTERED_DEPTH,
            jobs: 1,
        }
    }
}

impl SuiteConfig {
    fn facts(&self, t: ComplexMatrix, seed: u64) -> Facts<'_> {
        Facts::new(t, &self.tol, OracleConfig { seed, ..self.oracle }).with_centered_depth(self.centered_depth)
    }
}

/// A failing instance, with everything needed to reproduce it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub theorem: TheoremId,
    /// Ensemble description or fixture name.
    pub source: String,
    pub index: Option<usize>,
    /// Oracle seed used for this instance.
    pub seed: u64,
    pub matrix: ComplexMatrix,
    pub clause: String,
    pub witness: f64,
    pub detail: String,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClauseTally {
    pub passed: usize,
    pub failed: usize,
    pub skipped: usize,
}

impl ClauseTally {
    /// Non-vacuous evaluations.
    pub fn checked(&self) -> usize {
        self.passed + self.failed
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoremResult {
    pub theorem_id: TheoremId,
    pub instances_run: usize,
    pub passed: usize,
    pub skipped: usize,
    pub violations: Vec<Violation>,
    pub skip_reasons: BTreeMap<String, usize>,
    pub clauses: BTreeMap<String, ClauseTally>,
    /// Informational observations: name → (true count, false count).
    pub notes: BTreeMap<String, (usize, usize)>,
}

impl TheoremResult {
    pub fn new(theorem_id: TheoremId) -> Self {
        Self {
            theorem_id,
            instances_run: 0,
            passed: 0,
            skipped: 0,
            violations: Vec::new(),
            skip_reasons: BTreeMap::new(),
            clauses: BTreeMap::new(),
            notes: BTreeMap::new(),
        }
    }

    pub fn record(&mut self, check: &InstanceCheck, source: &str, index: Option<usize>, seed: u64, matrix: &ComplexMatrix) {
        self.instances_run += 1;
        for c in &check.clauses {
            let tally = self.clauses.entry(c.name.clone()).or_default();
            match c.outcome {
                ClauseOutcome::Pass => tally.passed += 1,
                ClauseOutcome::Fail { .. } => tally.failed += 1,
                ClauseOutcome::Skip { .. } => tally.skipped += 1,
            }
        }
        for (k, &v) in &check.notes {
            let e = self.notes.entry(k.clone()).or_default();
            if v {
                e.0 += 1;
            } else {
                e.1 += 1;
            }
        }
        match check.verdict() {
            Verdict::Pass => self.passed += 1,
            Verdict::Skip(reason) => {
                self.skipped += 1;
                *self.skip_reasons.entry(reason).or_default() += 1;
            }
            Verdict::Fail => {
                let clause = check.first_failure().expect("failing check has a failing clause");
                let ClauseOutcome::Fail { witness, detail } = &clause.outcome else {
                    unreachable!()
                };
                self.violations.push(Violation {
                    theorem: check.theorem,
                    source: source.to_string(),
                    index,
                    seed,
                    matrix: matrix.clone(),
                    clause: clause.name.clone(),
                    witness: *witness,
                    detail: detail.clone(),
                });
            }
        }
    }

    pub fn merge(&mut self, other: TheoremResult) {
        debug_assert_eq!(self.theorem_id, other.theorem_id);
        self.instances_run += other.instances_run;
        self.passed += other.passed;
        self.skipped += other.skipped;
        self.violations.extend(other.violations);
        for (k, v) in other.skip_reasons {
            *self.skip_reasons.entry(k).or_default() += v;
        }
        for (k, v) in other.clauses {
            let e = self.clauses.entry(k).or_default();
            e.passed += v.passed;
            e.failed += v.failed;
            e.skipped += v.skipped;
        }
        for (k, (a, b)) in other.notes {
            let e = self.notes.entry(k).or_default();
            e.0 += a;
            e.1 += b;
        }
    }

    pub fn is_consistent(&self) -> bool {
        self.passed + self.skipped + self.violations.len() == self.instances_run
    }

    /// Non-vacuous count for each biconditional direction.
    pub fn direction_coverage(&self) -> Vec<(&'static str, usize)> {
        self.theorem_id
            .directions()
            .iter()
            .map(|d| (*d, self.clauses.get(*d).map_or(0, ClauseTally::checked)))
            .collect()
    }
}

/// Checks every theorem in `ids` against one matrix, sharing the facts cache.
pub fn check_matrix(t: &ComplexMatrix, ids: &[TheoremId], cfg: &SuiteConfig, seed: u64) -> Vec<InstanceCheck> {
    let facts = cfg.facts(t.clone(), seed);
    ids.iter().map(|&id| check_theorem(id, &facts)).collect()
}

/// Applies each theorem to each generated instance. Instances are evaluated
/// in parallel when `jobs > 1` and merged in index order.
pub fn run_suite(spec: &RandomSpec, ids: &[TheoremId], cfg: &SuiteConfig) -> Result<Vec<TheoremResult>> {
    spec.validate()?;
    cfg.tol.validate()?;
    let run_one = |i: usize| -> Result<(ComplexMatrix, u64, Vec<InstanceCheck>)> {
        let t = generate(spec, i)?;
        let seed = spec.instance_seed(i);
        let checks = check_matrix(&t, ids, cfg, seed);
        Ok((t, seed, checks))
    };
    let rows: Vec<Result<(ComplexMatrix, u64, Vec<InstanceCheck>)>> = if cfg.jobs > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.jobs)
            .build()
            .map_err(|e| OpError::InvalidArgument(format!("thread pool: {e}")))?;
        pool.install(|| (0..spec.count).into_par_iter().map(run_one).collect())
    } else {
        (0..spec.count).map(run_one).collect()
    };
    let source = spec.to_string();
    let mut results: Vec<TheoremResult> = ids.iter().map(|&id| TheoremResult::new(id)).collect();
    for (i, row) in rows.into_iter().enumerate() {
        let (t, seed, checks) = row?;
        for (res, check) in results.iter_mut().zip(&checks) {
            res.record(check, &source, Some(i), seed, &t);
        }
    }
    Ok(results)
}

/// Re-runs the failing check from the stored matrix and seed alone and
/// confirms the same clause fails with a bit-identical witness.
pub fn reverify(v: &Violation, cfg: &SuiteConfig) -> bool {
    let facts = cfg.facts(v.matrix.clone(), v.seed);
    let check = check_theorem(v.theorem, &facts);
    check.clauses.iter().any(|c| {
        c.name == v.clause && matches!(&c.outcome, ClauseOutcome::Fail { witness, .. } if witness.to_bits() == v.witness.to_bits())
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::c64;
    use crate::search::Family;

    fn check(id: TheoremId, t: ComplexMatrix) -> InstanceCheck {
        check_matrix(&t, &[id], &SuiteConfig::default(), 0).remove(0)
    }

    fn example() -> ComplexMatrix {
        ComplexMatrix::from_real_rows(&[[-1.0, 0.0, -1.0], [-1.0, 0.0, 1.0], [0.0, 1.0, 0.0]])
    }

    #[test]
    fn parses_ids() {
        assert_eq!(TheoremId::parse_list("all").unwrap().len(), 9);
        assert_eq!(
            TheoremId::parse_list("duggal, square_psd,duggal").unwrap(),
            vec![TheoremId::Duggal, TheoremId::SquarePsd]
        );
        assert!(matches!(TheoremId::parse_list("duggal,nope"), Err(OpError::UnknownTheorem(_))));
    }

    #[test]
    fn nilpotent_jordan_block() {
        let t = ComplexMatrix::from_real_rows(&[[0.0, 1.0], [0.0, 0.0]]);
        assert_eq!(check(TheoremId::HyponormalCs, t.clone()).verdict(), Verdict::Skip("not hyponormal".into()));
        let sn = check(TheoremId::SquareNormal, t.clone());
        assert_eq!(sn.verdict(), Verdict::Pass);
        assert_eq!(sn.clauses.len(), 2);
        let pf = check(TheoremId::ParanormalFamily, t);
        assert_eq!(pf.verdict(), Verdict::Pass);
        assert!(pf.clauses.iter().any(|c| c.name == "!hyponormal<=>!paranormal"));
    }

    #[test]
    fn example_matrix_passes_everything() {
        let cfg = SuiteConfig::default();
        for c in check_matrix(&example(), &TheoremId::ALL, &cfg, 0) {
            assert_ne!(c.verdict(), Verdict::Fail, "{c:?}");
        }
        let sn = check(TheoremId::SquareNormal, example());
        assert_eq!(sn.verdict(), Verdict::Skip("square not normal".into()));
        let cc = check(TheoremId::ConjugationCommutation, example());
        assert!(cc.clauses.iter().any(|c| c.name == "binormal=>commutes" && c.outcome == ClauseOutcome::Pass));
    }

    #[test]
    fn weighted_permutation_examples() {
        let t = ComplexMatrix::from_real_rows(&[[0.0, 2.0], [0.5, 0.0]]);
        let c = check(TheoremId::WeightedPermutation, t);
        assert_eq!(c.verdict(), Verdict::Pass, "{c:?}");
        assert!(c.notes["literal_weighted_permutation"]);

        let t = ComplexMatrix::from_real_rows(&[[0.0, 3.0, 0.0], [1.0 / 3.0, 0.0, 0.0], [0.0, 0.0, -1.0]]);
        let v = crate::search::random_unitary(3, &mut rand_chacha::ChaCha8Rng::seed_from_u64(5));
        let conj = v.matmul(&t).matmul(&v.adjoint());
        for m in [t, conj] {
            let c = check(TheoremId::WeightedPermutation, m);
            assert_eq!(c.verdict(), Verdict::Pass, "{c:?}");
            assert!(c.clauses.iter().all(|c| c.outcome == ClauseOutcome::Pass));
        }
    }

    #[test]
    fn square_psd_examples() {
        let swap = ComplexMatrix::from_real_rows(&[[0.0, 1.0], [1.0, 0.0]]);
        let c = check(TheoremId::SquarePsd, swap.clone());
        assert_eq!(c.verdict(), Verdict::Pass, "{c:?}");
        assert!(c.clauses.iter().any(|c| c.name == "u_self_adjoint=>square_psd"));

        let rot = swap.scale(c64(0.0, 1.0));
        let c = check(TheoremId::SquarePsd, rot);
        assert_ne!(c.verdict(), Verdict::Fail);
        assert!(!c.clauses.iter().any(|c| c.name.starts_with("square_psd=>")));
    }

    #[test]
    fn biconditional_tallies() {
        let tol = Tolerances::default();
        let mut out = InstanceCheck::new(TheoremId::ModulusCommutation);
        biconditional(&mut out, (0.0, "binormal", ""), (0.0, "q", ""), &tol);
        assert_eq!(out.clauses.len(), 2);
        let mut out = InstanceCheck::new(TheoremId::ModulusCommutation);
        biconditional(&mut out, (1.0, "binormal", ""), (1e-12, "q", ""), &tol);
        assert_eq!(out.verdict(), Verdict::Fail);
        assert_eq!(out.first_failure().unwrap().name, "q=>binormal");
        let mut out = InstanceCheck::new(TheoremId::ModulusCommutation);
        biconditional(&mut out, (1e-8, "binormal", ""), (1.0, "q", ""), &tol);
        assert!(matches!(out.verdict(), Verdict::Skip(_)));
    }

    #[test]
    fn involution_ensemble_is_clean_and_deterministic() {
        let spec = RandomSpec::new(Family::Involution, 3, 7, 40);
        let cfg = SuiteConfig::default();
        let a = run_suite(&spec, &TheoremId::ALL, &cfg).unwrap();
        let b = run_suite(&spec, &TheoremId::ALL, &SuiteConfig { jobs: 3, ..cfg }).unwrap();
        assert_eq!(a, b);
        for r in &a {
            assert!(r.violations.is_empty(), "{r:?}");
            assert!(r.is_consistent());
            assert_eq!(r.instances_run, 40);
        }
    }

    #[test]
    fn violations_reverify() {
        // A huge PSD slack makes every matrix pass the hyponormal test, so a
        // non-normal 2×2 matrix (always complex symmetric) must fail.
        let cfg = SuiteConfig {
            tol: Tolerances {
                eps_psd: 1e3,
                ..Tolerances::default()
            },
            ..SuiteConfig::default()
        };
        let t = ComplexMatrix::from_real_rows(&[[1.0, 5.0], [0.0, 2.0]]);
        let mut res = TheoremResult::new(TheoremId::HyponormalCs);
        let checks = check_matrix(&t, &[TheoremId::HyponormalCs], &cfg, 11);
        res.record(&checks[0], "manual", None, 11, &t);
        assert!(res.is_consistent());
        let v = &res.violations[0];
        assert_eq!(v.clause, "hyponormal_cs=>normal");
        assert!(reverify(v, &cfg));
        let mut forged = v.clone();
        forged.witness += 1.0;
        assert!(!reverify(&forged, &cfg));
    }

    use rand::SeedableRng;
}
