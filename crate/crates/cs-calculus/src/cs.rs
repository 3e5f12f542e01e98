//! Cappell-Shaneson predicates, sign normalization, standard forms and
//! the `A_m` family.
//!
//! A CS matrix is `A` in `SL(3,Z)` with `det(A - I) = 1`. A standard
//! form is the shape `[[0,a,b],[0,c,d],[1,e,f]]`, reached by conjugating
//! with a basis `(v, w, Av)`.

use crate::mat::{complete_basis, ordered_vectors, IntMat3};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fmt;

/// Which CS condition a matrix fails.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CsViolation {
    /// `det(M) != 1`.
    DetNotOne(i128),
    /// `det(M - I) != 1`.
    DetMinusINotOne(i128),
}

impl fmt::Display for CsViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CsViolation::DetNotOne(d) => write!(f, "det(M) = {d}, expected 1"),
            CsViolation::DetMinusINotOne(d) => write!(f, "det(M - I) = {d}, expected 1"),
        }
    }
}

/// `None` iff `M` is a Cappell-Shaneson matrix.
pub fn cs_diagnostic(m: &IntMat3) -> Result<Option<CsViolation>> {
    let d = m.det()?;
    if d != 1 {
        return Ok(Some(CsViolation::DetNotOne(d)));
    }
    let dmi = m.sub_mat(&IntMat3::IDENTITY)?.det()?;
    if dmi != 1 {
        return Ok(Some(CsViolation::DetMinusINotOne(dmi)));
    }
    Ok(None)
}

pub fn is_cs_matrix(m: &IntMat3) -> Result<bool> {
    Ok(cs_diagnostic(m)?.is_none())
}

/// A matrix certified to satisfy `det = 1` and `det(A - I) = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "IntMat3", into = "IntMat3")]
pub struct CsMatrix(IntMat3);

impl CsMatrix {
    pub fn new(m: IntMat3) -> Result<CsMatrix> {
        match cs_diagnostic(&m)? {
            None => Ok(CsMatrix(m)),
            Some(v) => Err(Error::NotCappellShaneson(v.to_string())),
        }
    }

    pub fn matrix(&self) -> &IntMat3 {
        &self.0
    }

    pub fn into_matrix(self) -> IntMat3 {
        self.0
    }
}

impl TryFrom<IntMat3> for CsMatrix {
    type Error = Error;
    fn try_from(m: IntMat3) -> Result<CsMatrix> {
        CsMatrix::new(m)
    }
}

impl From<CsMatrix> for IntMat3 {
    fn from(c: CsMatrix) -> IntMat3 {
        c.0
    }
}

/// Normalizes the sign of `det(M - I)`: returns `M` itself when the
/// sign is already `+1`, otherwise `M^{-1}` (inverting flips the sign).
/// The boolean records whether inversion occurred.
pub fn normalize_sign(m: &IntMat3) -> Result<(CsMatrix, bool)> {
    let d = m.det()?;
    if d != 1 {
        return Err(Error::NotCappellShaneson(
            CsViolation::DetNotOne(d).to_string(),
        ));
    }
    let dmi = m.sub_mat(&IntMat3::IDENTITY)?.det()?;
    match dmi {
        1 => Ok((CsMatrix(*m), false)),
        -1 => {
            let inv = m.inverse_unimodular()?;
            Ok((CsMatrix::new(inv)?, true))
        }
        other => Err(Error::NotCappellShaneson(
            CsViolation::DetMinusINotOne(other).to_string(),
        )),
    }
}

/// A standard-form violation found by [`StdForm::validate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StdFormViolation {
    /// `ad - bc != 1`.
    Determinant,
    /// `b != (c-1)(f-1) - de`.
    BIdentity,
    /// `d` even, or both `a` and `e` even.
    Parity,
    /// `(a+ce) d != c(c-1)(f-1) + 1`.
    Factorization,
    /// Arithmetic overflow while checking.
    Overflow,
}

impl fmt::Display for StdFormViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            StdFormViolation::Determinant => "ad - bc != 1",
            StdFormViolation::BIdentity => "b != (c-1)(f-1) - de",
            StdFormViolation::Parity => "d even, or a and e both even",
            StdFormViolation::Factorization => "(a+ce)d != c(c-1)(f-1) + 1",
            StdFormViolation::Overflow => "overflow while validating",
        };
        write!(f, "{s}")
    }
}

/// The six entries of a standard-form CS matrix
/// `[[0,a,b],[0,c,d],[1,e,f]]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StdForm {
    pub a: i128,
    pub b: i128,
    pub c: i128,
    pub d: i128,
    pub e: i128,
    pub f: i128,
}

impl StdForm {
    pub fn new(a: i128, b: i128, c: i128, d: i128, e: i128, f: i128) -> StdForm {
        StdForm { a, b, c, d, e, f }
    }

    /// The matrix `A_m = [[0,1,0],[0,1,1],[1,0,m+1]]` as a standard form.
    pub fn am(m: i128) -> StdForm {
        StdForm::new(1, 0, 1, 1, 0, m + 1)
    }

    pub fn assemble(&self) -> IntMat3 {
        IntMat3([
            [0, self.a, self.b],
            [0, self.c, self.d],
            [1, self.e, self.f],
        ])
    }

    pub fn trace(&self) -> i128 {
        self.c + self.f
    }

    /// Reads a standard form off a matrix whose first column is `e3`.
    pub fn from_matrix(m: &IntMat3) -> Result<StdForm> {
        let r = &m.0;
        if r[0][0] != 0 || r[1][0] != 0 || r[2][0] != 1 {
            return Err(Error::NotStandardShape);
        }
        Ok(StdForm::new(
            r[0][1], r[0][2], r[1][1], r[1][2], r[2][1], r[2][2],
        ))
    }

    /// Checks all the standard-form identities exactly; empty means valid.
    pub fn validate(&self) -> Vec<StdFormViolation> {
        let StdForm { a, b, c, d, e, f } = *self;
        let mut out = Vec::new();
        let check = |v: Option<bool>, tag: StdFormViolation, out: &mut Vec<StdFormViolation>| {
            match v {
                Some(true) => {}
                Some(false) => out.push(tag),
                None => out.push(StdFormViolation::Overflow),
            }
        };
        check(
            a.checked_mul(d)
                .and_then(|ad| b.checked_mul(c).and_then(|bc| ad.checked_sub(bc)))
                .map(|det| det == 1),
            StdFormViolation::Determinant,
            &mut out,
        );
        check(
            (c - 1)
                .checked_mul(f - 1)
                .and_then(|x| d.checked_mul(e).and_then(|de| x.checked_sub(de)))
                .map(|rhs| b == rhs),
            StdFormViolation::BIdentity,
            &mut out,
        );
        if d % 2 == 0 || (a % 2 == 0 && e % 2 == 0) {
            out.push(StdFormViolation::Parity);
        }
        check(
            c.checked_mul(e)
                .and_then(|ce| a.checked_add(ce))
                .and_then(|ace| ace.checked_mul(d))
                .and_then(|lhs| {
                    c.checked_mul(c - 1)
                        .and_then(|x| x.checked_mul(f - 1))
                        .and_then(|x| x.checked_add(1))
                        .map(|rhs| lhs == rhs)
                }),
            StdFormViolation::Factorization,
            &mut out,
        );
        out
    }

    pub fn is_valid(&self) -> bool {
        self.validate().is_empty()
    }

    /// Recognizes `A_m` exactly, or `A_m` conjugated by `diag(1,-1,1)`
    /// (middle row and column negated). Nothing broader.
    pub fn recognize_am(&self) -> Option<AmIndex> {
        let StdForm { a, b, c, d, e, f } = *self;
        if (a, b, c, d, e) == (1, 0, 1, 1, 0) || (a, b, c, d, e) == (-1, 0, 1, -1, 0) {
            Some(AmIndex(f - 1))
        } else {
            None
        }
    }
}

/// Index into the `A_m` family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AmIndex(pub i128);

impl AmIndex {
    pub fn std_form(&self) -> StdForm {
        StdForm::am(self.0)
    }

    pub fn matrix(&self) -> IntMat3 {
        self.std_form().assemble()
    }
}

pub const DEFAULT_STANDARDIZE_BOUND: i128 = 12;

/// Conjugates a normalized CS matrix to standard form.
///
/// Searches primitive `v` in [`ordered_vectors`] order for one where
/// `(v, w, Av)` completes to a basis, and returns the standard form
/// `S = P^{-1} A P` together with the unimodular conjugator `P` whose
/// columns are `(v, w, Av)`. Such a `v` always exists for a CS matrix, so
/// `SearchExhausted` signals a too-small `bound`.
pub fn to_standard_form(a: &CsMatrix, bound: i128) -> Result<(StdForm, IntMat3)> {
    let m = a.matrix();
    for v in ordered_vectors(bound) {
        if v.is_zero() || !v.is_primitive() {
            continue;
        }
        let u = m.mul_vec(&v)?;
        let cross = v.cross(&u)?;
        if !cross.is_primitive() {
            continue;
        }
        let w = complete_basis(&v, &u)?;
        let p = IntMat3::from_cols(v, w, u);
        let s_mat = p.inverse_unimodular()?.mul_mat(m)?.mul_mat(&p)?;
        let s = StdForm::from_matrix(&s_mat)?;
        debug_assert!(s.is_valid(), "standardization produced invalid form {s:?}");
        return Ok((s, p));
    }
    Err(Error::SearchExhausted(bound))
}
