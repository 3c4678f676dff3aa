//! Lazily evaluated facts about one matrix and its derived operators.
//!
//! Theorem checks and hunt targets ask overlapping questions of `T`, `T²`,
//! `T̃` and `T̂`; each answer is computed at most once per instance.

use std::cell::OnceCell;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::kernel::{structural_tests, ComplexMatrix, StructuralFlags, Tolerances};
use crate::properties::{
    flush_negligible, flushed_power, is_binormal, is_centered, is_hyponormal, is_normal, is_paranormal, is_quasinormal, CenteredCheck,
    HyponormalCheck, Paranormal, Witnessed, DEFAULT_CENTERED_DEPTH,
};
use crate::symmetry::{classify_cs, CSVerdict, OracleConfig};
use crate::transforms::{aluthge_from_parts, is_invertible, polar, PolarMode, PolarParts};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Operand {
    T,
    Square,
    Aluthge,
    Duggal,
}

impl Operand {
    pub const ALL: [Operand; 4] = [Operand::T, Operand::Square, Operand::Aluthge, Operand::Duggal];

    fn index(self) -> usize {
        self as usize
    }

    pub fn prefix(self) -> &'static str {
        match self {
            Operand::T => "",
            Operand::Square => "sq.",
            Operand::Aluthge => "al.",
            Operand::Duggal => "du.",
        }
    }
}

#[derive(Default)]
struct OperandFacts {
    normal: OnceCell<Witnessed>,
    quasinormal: OnceCell<Witnessed>,
    binormal: OnceCell<Witnessed>,
    hyponormal: OnceCell<Result<HyponormalCheck>>,
    paranormal: OnceCell<Result<Paranormal>>,
    centered: OnceCell<Result<CenteredCheck>>,
    structure: OnceCell<StructuralFlags>,
    cs: OnceCell<CSVerdict>,
}

pub struct Facts<'a> {
    t: ComplexMatrix,
    tol: &'a Tolerances,
    oracle: OracleConfig,
    centered_depth: usize,
    polar: OnceCell<Result<PolarParts>>,
    invertible: OnceCell<Result<bool>>,
    matrices: [OnceCell<Result<ComplexMatrix>>; 4],
    ops: [OperandFacts; 4],
}

impl<'a> Facts<'a> {
    pub fn new(t: ComplexMatrix, tol: &'a Tolerances, oracle: OracleConfig) -> Self {
        Self {
            t,
            tol,
            oracle,
            centered_depth: DEFAULT_CENTERED_DEPTH,
            polar: OnceCell::new(),
            invertible: OnceCell::new(),
            matrices: Default::default(),
            ops: Default::default(),
        }
    }

    pub fn with_centered_depth(mut self, depth: usize) -> Self {
        self.centered_depth = depth;
        self
    }

    pub fn t(&self) -> &ComplexMatrix {
        &self.t
    }

    pub fn tol(&self) -> &Tolerances {
        self.tol
    }

    pub fn oracle(&self) -> &OracleConfig {
        &self.oracle
    }

    /// Canonical polar factors of `T`.
    pub fn polar(&self) -> Result<&PolarParts> {
        self.polar
            .get_or_init(|| polar(&self.t, PolarMode::Canonical, self.tol))
            .as_ref()
            .map_err(Clone::clone)
    }

    pub fn invertible(&self) -> Result<bool> {
        self.invertible.get_or_init(|| is_invertible(&self.t, self.tol)).clone()
    }

    /// Derived operators are replaced by zero when negligible next to `||T||_F`.
    pub fn matrix(&self, op: Operand) -> Result<&ComplexMatrix> {
        if op == Operand::T {
            return Ok(&self.t);
        }
        self.matrices[op.index()]
            .get_or_init(|| match op {
                Operand::T => unreachable!(),
                Operand::Square => Ok(flushed_power(&self.t, 2, self.tol)),
                Operand::Aluthge => self.polar().map(|p| self.flush(aluthge_from_parts(p))),
                Operand::Duggal => self.polar().map(|p| self.flush(p.p.matmul(&p.u))),
            })
            .as_ref()
            .map_err(Clone::clone)
    }

    /// Both transforms vanish exactly on rank-one nilpotents; the computed
    /// noise would otherwise be classified as a matrix in its own right.
    fn flush(&self, m: ComplexMatrix) -> ComplexMatrix {
        flush_negligible(m, self.t.frobenius_norm(), self.tol)
    }

    fn slot(&self, op: Operand) -> &OperandFacts {
        &self.ops[op.index()]
    }

    pub fn normal(&self, op: Operand) -> Result<Witnessed> {
        let m = self.matrix(op)?;
        Ok(*self.slot(op).normal.get_or_init(|| is_normal(m, self.tol)))
    }

    pub fn quasinormal(&self, op: Operand) -> Result<Witnessed> {
        let m = self.matrix(op)?;
        Ok(*self.slot(op).quasinormal.get_or_init(|| is_quasinormal(m, self.tol)))
    }

    pub fn binormal(&self, op: Operand) -> Result<Witnessed> {
        let m = self.matrix(op)?;
        Ok(*self.slot(op).binormal.get_or_init(|| is_binormal(m, self.tol)))
    }

    pub fn hyponormal(&self, op: Operand) -> Result<HyponormalCheck> {
        let m = self.matrix(op)?;
        self.slot(op).hyponormal.get_or_init(|| is_hyponormal(m, self.tol)).clone()
    }

    pub fn paranormal(&self, op: Operand) -> Result<Paranormal> {
        let m = self.matrix(op)?;
        self.slot(op).paranormal.get_or_init(|| is_paranormal(m, self.tol)).clone()
    }

    pub fn centered(&self, op: Operand) -> Result<CenteredCheck> {
        let m = self.matrix(op)?;
        self.slot(op)
            .centered
            .get_or_init(|| is_centered(m, self.centered_depth, self.tol))
            .clone()
    }

    pub fn structure(&self, op: Operand) -> Result<StructuralFlags> {
        let m = self.matrix(op)?;
        Ok(*self.slot(op).structure.get_or_init(|| structural_tests(m, self.tol)))
    }

    pub fn cs(&self, op: Operand) -> Result<&CSVerdict> {
        let m = self.matrix(op)?;
        Ok(self.slot(op).cs.get_or_init(|| classify_cs(m, self.tol, &self.oracle)))
    }
}
