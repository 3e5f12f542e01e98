//! The fishtail twist moves and conjugations as typed, validity-checked,
//! replayable derivation certificates.
//!
//! Moves are stored symbolically; the verifier reconstitutes every
//! intermediate matrix and checks it is still Cappell-Shaneson. Delta
//! and Delta0 moves carry their shape preconditions as hard errors:
//! they are only licensed on matrices of the right column shape.

use crate::cs::{cs_diagnostic, CsViolation, StdForm};
use crate::mat::IntMat3;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fmt;

/// `Delta = [[1,-1,0],[0,1,0],[0,1,1]]`: the Dehn-twist matrix acting on
/// standard forms.
pub const DELTA: IntMat3 = IntMat3([[1, -1, 0], [0, 1, 0], [0, 1, 1]]);

/// `Delta_0 = [[1,0,1],[0,1,-2],[0,0,1]]`: the twist matrix for matrices
/// whose second column is `(1,-1,0)^T`.
pub const DELTA0: IntMat3 = IntMat3([[1, 0, 1], [0, 1, -2], [0, 0, 1]]);

/// `diag(1,-1,1)`.
pub const NEGATE_MIDDLE: IntMat3 = IntMat3([[1, 0, 0], [0, -1, 0], [0, 0, 1]]);

/// `Delta^k` in closed form: `(Delta - I)^2 = 0`.
pub fn delta_pow(k: i128) -> IntMat3 {
    IntMat3([[1, -k, 0], [0, 1, 0], [0, k, 1]])
}

/// `Delta_0^k` in closed form.
pub fn delta0_pow(k: i128) -> IntMat3 {
    IntMat3([[1, 0, k], [0, 1, -2 * k], [0, 0, 1]])
}

/// A single certificate step.
///
/// Serialized as a `{"kind": ..., ...}` map. The tagged representation
/// buffers through serde's internal `Content` type, which has no i128
/// support, so (de)serialization goes through an i64 mirror; move
/// parameters beyond i64 range are rejected rather than truncated.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Move {
    /// Left multiplication by `Delta^k`; requires first column `e3`.
    LeftDelta { k: i128 },
    /// Right multiplication by `Delta^k`; requires first column `e3`.
    RightDelta { k: i128 },
    /// Left multiplication by `Delta_0^k`; requires second column `(1,-1,0)^T`.
    LeftDelta0 { k: i128 },
    /// Right multiplication by `Delta_0^k`; requires second column `(1,-1,0)^T`.
    RightDelta0 { k: i128 },
    /// Conjugation `P M P^{-1}` by a unimodular `P`.
    Conjugate { p: IntMat3 },
    /// Elementary conjugation: add `k` times row `i` to row `j`
    /// (1-based), with the paired column operation (column `i` minus
    /// `k` times column `j`).
    ElemConj { i: usize, j: usize, k: i128 },
    /// Conjugation by `diag(1,-1,1)`.
    NegateMiddle,
    /// Replace the matrix by its inverse (sign normalization).
    Invert,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind")]
enum MoveRepr {
    LeftDelta { k: i64 },
    RightDelta { k: i64 },
    LeftDelta0 { k: i64 },
    RightDelta0 { k: i64 },
    Conjugate { p: [[i64; 3]; 3] },
    ElemConj { i: usize, j: usize, k: i64 },
    NegateMiddle,
    Invert,
}

impl TryFrom<&Move> for MoveRepr {
    type Error = std::num::TryFromIntError;

    fn try_from(mv: &Move) -> std::result::Result<MoveRepr, Self::Error> {
        Ok(match *mv {
            Move::LeftDelta { k } => MoveRepr::LeftDelta { k: k.try_into()? },
            Move::RightDelta { k } => MoveRepr::RightDelta { k: k.try_into()? },
            Move::LeftDelta0 { k } => MoveRepr::LeftDelta0 { k: k.try_into()? },
            Move::RightDelta0 { k } => MoveRepr::RightDelta0 { k: k.try_into()? },
            Move::Conjugate { ref p } => {
                let mut rows = [[0i64; 3]; 3];
                for i in 0..3 {
                    for j in 0..3 {
                        rows[i][j] = p.0[i][j].try_into()?;
                    }
                }
                MoveRepr::Conjugate { p: rows }
            }
            Move::ElemConj { i, j, k } => MoveRepr::ElemConj { i, j, k: k.try_into()? },
            Move::NegateMiddle => MoveRepr::NegateMiddle,
            Move::Invert => MoveRepr::Invert,
        })
    }
}

impl From<MoveRepr> for Move {
    fn from(r: MoveRepr) -> Move {
        match r {
            MoveRepr::LeftDelta { k } => Move::LeftDelta { k: k.into() },
            MoveRepr::RightDelta { k } => Move::RightDelta { k: k.into() },
            MoveRepr::LeftDelta0 { k } => Move::LeftDelta0 { k: k.into() },
            MoveRepr::RightDelta0 { k } => Move::RightDelta0 { k: k.into() },
            MoveRepr::Conjugate { p } => Move::Conjugate {
                p: IntMat3(p.map(|row| row.map(i128::from))),
            },
            MoveRepr::ElemConj { i, j, k } => Move::ElemConj { i, j, k: k.into() },
            MoveRepr::NegateMiddle => Move::NegateMiddle,
            MoveRepr::Invert => Move::Invert,
        }
    }
}

impl Serialize for Move {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        MoveRepr::try_from(self)
            .map_err(serde::ser::Error::custom)?
            .serialize(ser)
    }
}

impl<'de> Deserialize<'de> for Move {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Move, D::Error> {
        MoveRepr::deserialize(de).map(Move::from)
    }
}

impl fmt::Display for Move {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Move::LeftDelta { k } => write!(f, "LeftDelta({k})"),
            Move::RightDelta { k } => write!(f, "RightDelta({k})"),
            Move::LeftDelta0 { k } => write!(f, "LeftDelta0({k})"),
            Move::RightDelta0 { k } => write!(f, "RightDelta0({k})"),
            Move::Conjugate { .. } => write!(f, "Conjugate"),
            Move::ElemConj { i, j, k } => write!(f, "ElemConj({i},{j},{k})"),
            Move::NegateMiddle => write!(f, "NegateMiddle"),
            Move::Invert => write!(f, "Invert"),
        }
    }
}

fn first_col_is_e3(m: &IntMat3) -> bool {
    m.0[0][0] == 0 && m.0[1][0] == 0 && m.0[2][0] == 1
}

fn second_col_is_delta0_shape(m: &IntMat3) -> bool {
    m.0[0][1] == 1 && m.0[1][1] == -1 && m.0[2][1] == 0
}

/// Applies `mv` to `m`, enforcing the move's validity condition.
pub fn apply_move(m: &IntMat3, mv: &Move) -> Result<IntMat3> {
    match mv {
        Move::LeftDelta { k } | Move::RightDelta { k } => {
            if !first_col_is_e3(m) {
                return Err(Error::InvalidMoveShape(mv.to_string()));
            }
            let d = delta_pow(*k);
            match mv {
                Move::LeftDelta { .. } => d.mul_mat(m),
                _ => m.mul_mat(&d),
            }
        }
        Move::LeftDelta0 { k } | Move::RightDelta0 { k } => {
            if !second_col_is_delta0_shape(m) {
                return Err(Error::InvalidMoveShape(mv.to_string()));
            }
            let d = delta0_pow(*k);
            match mv {
                Move::LeftDelta0 { .. } => d.mul_mat(m),
                _ => m.mul_mat(&d),
            }
        }
        Move::Conjugate { p } => m.conjugate_by(p),
        Move::ElemConj { i, j, k } => {
            if !(1..=3).contains(i) || !(1..=3).contains(j) || i == j {
                return Err(Error::InvalidMoveShape(mv.to_string()));
            }
            let mut e = IntMat3::IDENTITY;
            e.0[j - 1][i - 1] = *k;
            m.conjugate_by(&e)
        }
        Move::NegateMiddle => m.conjugate_by(&NEGATE_MIDDLE),
        Move::Invert => m.inverse_unimodular(),
    }
}

/// `P M P^{-1}` for unimodular `P`.
pub fn conjugate(m: &IntMat3, p: &IntMat3) -> Result<IntMat3> {
    m.conjugate_by(p)
}

/// A tagged assertion a certificate relies on but does not verify
/// (e.g. uniqueness of a conjugacy class for a given trace).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Claim {
    pub tag: String,
    pub text: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub r: Option<i128>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Step {
    #[serde(rename = "move")]
    pub mv: Move,
    pub result: IntMat3,
}

/// An ordered list of moves with start matrix and intermediate results:
/// a replayable, machine-checkable certificate.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Derivation {
    pub initial: IntMat3,
    pub steps: Vec<Step>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub claims: Vec<Claim>,
}

impl Derivation {
    pub fn new(initial: IntMat3) -> Derivation {
        Derivation {
            initial,
            steps: Vec::new(),
            claims: Vec::new(),
        }
    }

    /// The current (latest) matrix.
    pub fn current(&self) -> IntMat3 {
        self.steps.last().map_or(self.initial, |s| s.result)
    }

    pub fn end(&self) -> IntMat3 {
        self.current()
    }

    /// Applies a move to the current matrix and records the step.
    pub fn push(&mut self, mv: Move) -> Result<()> {
        let result = apply_move(&self.current(), &mv)?;
        self.steps.push(Step { mv, result });
        Ok(())
    }

    pub fn push_claim(&mut self, claim: Claim) {
        self.claims.push(claim);
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

/// Why a derivation failed to replay.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReplayFailure {
    /// Index of the failing step; `None` when the initial matrix itself
    /// is bad.
    pub step: Option<usize>,
    pub reason: String,
}

impl fmt::Display for ReplayFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.step {
            Some(i) => write!(f, "step {i}: {}", self.reason),
            None => write!(f, "initial matrix: {}", self.reason),
        }
    }
}

/// Replays every step and recomputes CS-ness of every intermediate.
/// Matrices on the far side of an `Invert` step may have
/// `det(M - I) = -1`, so the check accepts either sign. Claims are
/// carried along but not checked (they are flagged assumptions by
/// design). Returns the first failing step.
pub fn verify_derivation(d: &Derivation) -> std::result::Result<(), ReplayFailure> {
    let check_cs = |m: &IntMat3, step: Option<usize>| -> std::result::Result<(), ReplayFailure> {
        match cs_diagnostic(m) {
            Ok(None) => Ok(()),
            Ok(Some(CsViolation::DetMinusINotOne(-1))) => Ok(()),
            Ok(Some(v)) => Err(ReplayFailure {
                step,
                reason: format!("not a Cappell-Shaneson matrix: {v}"),
            }),
            Err(e) => Err(ReplayFailure {
                step,
                reason: e.to_string(),
            }),
        }
    };
    check_cs(&d.initial, None)?;
    let mut cur = d.initial;
    for (i, step) in d.steps.iter().enumerate() {
        let expect = apply_move(&cur, &step.mv).map_err(|e| ReplayFailure {
            step: Some(i),
            reason: e.to_string(),
        })?;
        if expect != step.result {
            return Err(ReplayFailure {
                step: Some(i),
                reason: format!(
                    "recorded result {} disagrees with replay {}",
                    step.result, expect
                ),
            });
        }
        check_cs(&step.result, Some(i))?;
        cur = step.result;
    }
    Ok(())
}

/// Reads the current matrix of `d` as a standard form with `e = 0`.
fn current_std_e0(d: &Derivation) -> Result<StdForm> {
    let s = StdForm::from_matrix(&d.current())?;
    if s.e != 0 {
        return Err(Error::PreconditionE0(s.e));
    }
    Ok(s)
}

/// Conjugates `e` to zero on a standard form (replacing `a` by `a + ce`).
pub(crate) fn push_e_reset(d: &mut Derivation) -> Result<()> {
    let s = StdForm::from_matrix(&d.current())?;
    if s.e != 0 {
        d.push(Move::ElemConj { i: 2, j: 1, k: s.e })?;
        debug_assert_eq!(StdForm::from_matrix(&d.current()).unwrap().e, 0);
    }
    Ok(())
}

/// Move (i) of the mod-a reduction: `(a, c) -> (a, c + ka)`, keeping
/// `e = 0`. Three elementary conjugations: the row/column operation and
/// the two first-column resets, top to bottom.
pub(crate) fn push_move_i(d: &mut Derivation, k: i128) -> Result<()> {
    let s = current_std_e0(d)?;
    if k == 0 {
        return Ok(());
    }
    d.push(Move::ElemConj { i: 1, j: 2, k })?;
    let m00 = d.current().0[0][0];
    if m00 != 0 {
        d.push(Move::ElemConj { i: 3, j: 1, k: -m00 })?;
    }
    let m10 = d.current().0[1][0];
    if m10 != 0 {
        d.push(Move::ElemConj { i: 3, j: 2, k: -m10 })?;
    }
    let out = current_std_e0(d)?;
    debug_assert_eq!((out.a, out.c), (s.a, s.c + k * s.a));
    Ok(())
}

/// Move (ii) of the mod-a reduction: `(a, c) -> (a + k c(c-1), c)`,
/// keeping `e = 0`. A Delta move followed by the e-reset conjugation.
pub(crate) fn push_move_ii(d: &mut Derivation, k: i128) -> Result<()> {
    let s = current_std_e0(d)?;
    if k == 0 {
        return Ok(());
    }
    d.push(Move::LeftDelta { k })?;
    push_e_reset(d)?;
    let out = current_std_e0(d)?;
    debug_assert_eq!((out.a, out.c), (s.a + k * s.c * (s.c - 1), s.c));
    Ok(())
}

/// Changes the trace of a standard form to `target` (congruent mod `d`)
/// with a single `LeftDelta` move; `c` and `d` are unchanged.
pub fn adjust_trace(s: &StdForm, target: i128) -> Result<Derivation> {
    let mut deriv = Derivation::new(s.assemble());
    let trace = s.trace();
    if target == trace {
        return Ok(deriv);
    }
    if s.d == 0 || (target - trace) % s.d != 0 {
        return Err(Error::TraceUnreachable {
            trace,
            target,
            d: s.d,
        });
    }
    deriv.push(Move::LeftDelta {
        k: (target - trace) / s.d,
    })?;
    Ok(deriv)
}

/// Standalone move (i) derivation (precondition `e = 0`).
pub fn move_i(s: &StdForm, k: i128) -> Result<Derivation> {
    let mut d = Derivation::new(s.assemble());
    push_move_i(&mut d, k)?;
    Ok(d)
}

/// Standalone move (ii) derivation (precondition `e = 0`).
pub fn move_ii(s: &StdForm, k: i128) -> Result<Derivation> {
    let mut d = Derivation::new(s.assemble());
    push_move_ii(&mut d, k)?;
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;

    const SIG0_A: IntMat3 = IntMat3([[0, -1, -2], [0, -1, -3], [1, 2, 5]]);
    const SIG0_B: IntMat3 = IntMat3([[0, -1, -2], [0, 1, 1], [1, 2, 3]]);
    const A0: IntMat3 = IntMat3([[0, 1, 0], [0, 1, 1], [1, 0, 1]]);

    #[test]
    fn delta_powers() {
        assert_eq!(delta_pow(1), DELTA);
        assert_eq!(delta_pow(2), DELTA.mul_mat(&DELTA).unwrap());
        assert_eq!(
            delta_pow(-1),
            DELTA.inverse_unimodular().unwrap()
        );
        assert_eq!(delta0_pow(2), DELTA0.mul_mat(&DELTA0).unwrap());
    }

    #[test]
    fn sig0_chain_moves() {
        let m1 = apply_move(&SIG0_A, &Move::LeftDelta { k: 2 }).unwrap();
        assert_eq!(m1, IntMat3([[0, 1, 4], [0, -1, -3], [1, 0, -1]]));
        let m2 = apply_move(&m1, &Move::RightDelta0 { k: 2 }).unwrap();
        assert_eq!(m2, IntMat3([[0, 1, 0], [0, -1, 1], [1, 0, 1]]));
        let m3 = apply_move(&m2, &Move::RightDelta { k: 2 }).unwrap();
        assert_eq!(m3, A0);
        let m4 = apply_move(&m3, &Move::LeftDelta { k: 2 }).unwrap();
        assert_eq!(m4, SIG0_B);
    }

    #[test]
    fn zero_power_is_identity_move() {
        assert_eq!(apply_move(&SIG0_A, &Move::LeftDelta { k: 0 }).unwrap(), SIG0_A);
    }

    #[test]
    fn shape_preconditions_enforced() {
        // A0's second column is not (1,-1,0)^T
        assert!(matches!(
            apply_move(&A0, &Move::RightDelta0 { k: 1 }),
            Err(Error::InvalidMoveShape(_))
        ));
        // first column of Delta itself is not e3
        assert!(matches!(
            apply_move(&DELTA, &Move::LeftDelta { k: 1 }),
            Err(Error::InvalidMoveShape(_))
        ));
    }

    #[test]
    fn conjugation_examples() {
        // the trace -5 class with d = 3: triple product equals A_{-1}
        let p = IntMat3([[-1, -4, 1], [1, 5, 1], [0, 0, -1]]);
        let m = IntMat3([[0, -9, -14], [0, 2, 3], [1, 4, -1]]);
        let am1 = IntMat3([[0, 1, 0], [0, 1, 1], [1, 0, 0]]);
        assert_eq!(conjugate(&m, &p).unwrap(), am1);
        assert_eq!(conjugate(&m, &IntMat3::IDENTITY).unwrap(), m);

        let c = IntMat3([[2, 1, 2], [0, -1, -1], [-1, 0, -1]]);
        assert_eq!(conjugate(&SIG0_A, &c).unwrap(), SIG0_B);
    }

    #[test]
    fn adjust_trace_examples() {
        // A_m to trace 2 is LeftDelta(-m)
        let m = 3i128;
        let d = adjust_trace(&StdForm::am(m), 2).unwrap();
        assert_eq!(d.steps.len(), 1);
        assert_eq!(d.steps[0].mv, Move::LeftDelta { k: -m });
        assert_eq!(d.end(), IntMat3([[0, m + 1, m], [0, 1, 1], [1, -m, 1]]));

        // trace -5 to 1 with d = 3 is LeftDelta(2)
        let s = StdForm::new(-5, -8, 2, 3, 0, -7);
        let d = adjust_trace(&s, 1).unwrap();
        assert_eq!(d.steps[0].mv, Move::LeftDelta { k: 2 });
        assert_eq!(d.end(), IntMat3([[0, -9, -14], [0, 2, 3], [1, 4, -1]]));

        // already at target: empty derivation
        let d = adjust_trace(&s, -5).unwrap();
        assert!(d.is_empty());

        // unreachable residue
        assert!(matches!(
            adjust_trace(&s, 0),
            Err(Error::TraceUnreachable { .. })
        ));
    }

    #[test]
    fn move_i_examples() {
        let s = StdForm::new(-5, -8, 2, 3, 0, -7);
        let d = move_i(&s, 1).unwrap();
        let out = StdForm::from_matrix(&d.end()).unwrap();
        assert_eq!((out.a, out.c), (-5, -3));
        assert!(out.is_valid());
        assert!(verify_derivation(&d).is_ok());

        assert!(move_i(&s, 0).unwrap().is_empty());

        let d = move_i(&StdForm::am(0), 3).unwrap();
        let out = StdForm::from_matrix(&d.end()).unwrap();
        assert_eq!((out.a, out.c), (1, 4));
        assert!(out.is_valid());
    }

    #[test]
    fn move_ii_examples() {
        let s = StdForm::new(-5, -8, 2, 3, 0, -7);
        let d = move_ii(&s, 1).unwrap();
        let out = StdForm::from_matrix(&d.end()).unwrap();
        assert_eq!((out.a, out.c), (-3, 2));
        assert!(out.is_valid());
        assert!(verify_derivation(&d).is_ok());

        assert!(move_ii(&s, 0).unwrap().is_empty());

        // c in {0,1}: c(c-1) = 0, a unchanged
        let d = move_ii(&StdForm::am(2), 5).unwrap();
        let out = StdForm::from_matrix(&d.end()).unwrap();
        assert_eq!((out.a, out.c), (1, 1));
    }

    #[test]
    fn move_preconditions() {
        let s = StdForm::new(-1, -2, 1, 1, 2, 3); // e = 2
        assert!(matches!(move_i(&s, 1), Err(Error::PreconditionE0(2))));
        assert!(matches!(move_ii(&s, 1), Err(Error::PreconditionE0(2))));
    }

    #[test]
    fn verify_detects_tampering() {
        let mut d = Derivation::new(SIG0_A);
        d.push(Move::LeftDelta { k: 2 }).unwrap();
        d.push(Move::RightDelta0 { k: 2 }).unwrap();
        d.push(Move::RightDelta { k: 2 }).unwrap();
        d.push(Move::LeftDelta { k: 2 }).unwrap();
        assert!(verify_derivation(&d).is_ok());

        // empty derivation is fine
        assert!(verify_derivation(&Derivation::new(A0)).is_ok());

        // perturb one entry of an intermediate result
        let mut bad = d.clone();
        bad.steps[1].result.0[2][2] += 1;
        let fail = verify_derivation(&bad).unwrap_err();
        assert_eq!(fail.step, Some(1));
    }

    #[test]
    fn inverse_moves_cancel() {
        let mut d = Derivation::new(A0);
        d.push(Move::LeftDelta { k: 5 }).unwrap();
        d.push(Move::LeftDelta { k: -5 }).unwrap();
        assert_eq!(d.end(), A0);
        d.push(Move::NegateMiddle).unwrap();
        d.push(Move::NegateMiddle).unwrap();
        assert_eq!(d.end(), A0);
        d.push(Move::Invert).unwrap();
        d.push(Move::Invert).unwrap();
        assert_eq!(d.end(), A0);
    }

    #[test]
    fn derivation_json_round_trip() {
        let mut d = Derivation::new(SIG0_A);
        d.push(Move::LeftDelta { k: 2 }).unwrap();
        d.push_claim(Claim {
            tag: "number-theoretic".into(),
            text: "unique conjugacy class for trace r".into(),
            r: Some(2),
        });
        let json = serde_json::to_string(&d).unwrap();
        assert!(json.contains("\"kind\":\"LeftDelta\""));
        let back: Derivation = serde_json::from_str(&json).unwrap();
        assert_eq!(back, d);
    }
}
