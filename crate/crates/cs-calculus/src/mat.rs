//! Exact 3x3 integer linear algebra.
//!
//! Entries are `i128` and every ring operation is overflow-checked; a
//! wrap is reported as [`Error::Overflow`] instead of silently
//! corrupting a certificate. The env var `CSLAB_MAX_INT` optionally
//! installs a lower magnitude cap (any decimal value), which turns
//! runaway conjugation chains into loud [`Error::IntCapExceeded`]s.

use crate::poly::CubicPoly;
use crate::{Error, Result};
use num_integer::Integer;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

fn int_cap() -> Option<i128> {
    static CAP: OnceLock<Option<i128>> = OnceLock::new();
    *CAP.get_or_init(|| {
        std::env::var("CSLAB_MAX_INT")
            .ok()
            .and_then(|s| s.trim().parse::<i128>().ok())
    })
}

fn guard(x: i128) -> Result<i128> {
    if let Some(cap) = int_cap() {
        if x.checked_abs().ok_or(Error::Overflow)? > cap {
            return Err(Error::IntCapExceeded(cap));
        }
    }
    Ok(x)
}

fn add(a: i128, b: i128) -> Result<i128> {
    guard(a.checked_add(b).ok_or(Error::Overflow)?)
}

fn sub(a: i128, b: i128) -> Result<i128> {
    guard(a.checked_sub(b).ok_or(Error::Overflow)?)
}

fn mul(a: i128, b: i128) -> Result<i128> {
    guard(a.checked_mul(b).ok_or(Error::Overflow)?)
}

/// A column vector in `Z^3`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IntVec3(pub [i128; 3]);

impl IntVec3 {
    pub const ZERO: IntVec3 = IntVec3([0, 0, 0]);
    pub const E1: IntVec3 = IntVec3([1, 0, 0]);
    pub const E2: IntVec3 = IntVec3([0, 1, 0]);
    pub const E3: IntVec3 = IntVec3([0, 0, 1]);

    pub fn is_zero(&self) -> bool {
        self.0 == [0, 0, 0]
    }

    /// gcd of the coordinates (0 for the zero vector).
    pub fn content(&self) -> i128 {
        self.0.iter().fold(0i128, |g, &x| g.gcd(&x))
    }

    /// A nonzero vector is primitive iff its coordinates are coprime.
    pub fn is_primitive(&self) -> bool {
        self.content() == 1
    }

    pub fn cross(&self, other: &IntVec3) -> Result<IntVec3> {
        let a = self.0;
        let b = other.0;
        Ok(IntVec3([
            sub(mul(a[1], b[2])?, mul(a[2], b[1])?)?,
            sub(mul(a[2], b[0])?, mul(a[0], b[2])?)?,
            sub(mul(a[0], b[1])?, mul(a[1], b[0])?)?,
        ]))
    }

    pub fn dot(&self, other: &IntVec3) -> Result<i128> {
        let mut acc = 0i128;
        for i in 0..3 {
            acc = add(acc, mul(self.0[i], other.0[i])?)?;
        }
        Ok(acc)
    }

    pub fn max_norm(&self) -> i128 {
        self.0.iter().map(|x| x.abs()).max().unwrap()
    }
}

/// A 3x3 matrix over `Z`, stored row-major.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IntMat3(pub [[i128; 3]; 3]);

impl IntMat3 {
    pub const IDENTITY: IntMat3 = IntMat3([[1, 0, 0], [0, 1, 0], [0, 0, 1]]);

    pub fn from_rows(rows: [[i128; 3]; 3]) -> IntMat3 {
        IntMat3(rows)
    }

    pub fn from_cols(c1: IntVec3, c2: IntVec3, c3: IntVec3) -> IntMat3 {
        IntMat3([
            [c1.0[0], c2.0[0], c3.0[0]],
            [c1.0[1], c2.0[1], c3.0[1]],
            [c1.0[2], c2.0[2], c3.0[2]],
        ])
    }

    pub fn diag(d1: i128, d2: i128, d3: i128) -> IntMat3 {
        IntMat3([[d1, 0, 0], [0, d2, 0], [0, 0, d3]])
    }

    pub fn col(&self, j: usize) -> IntVec3 {
        IntVec3([self.0[0][j], self.0[1][j], self.0[2][j]])
    }

    pub fn row(&self, i: usize) -> IntVec3 {
        IntVec3(self.0[i])
    }

    pub fn transpose(&self) -> IntMat3 {
        let m = &self.0;
        IntMat3([
            [m[0][0], m[1][0], m[2][0]],
            [m[0][1], m[1][1], m[2][1]],
            [m[0][2], m[1][2], m[2][2]],
        ])
    }

    pub fn trace(&self) -> Result<i128> {
        add(add(self.0[0][0], self.0[1][1])?, self.0[2][2])
    }

    /// Exact determinant by cofactor expansion along the first row.
    pub fn det(&self) -> Result<i128> {
        let m = &self.0;
        let c0 = sub(mul(m[1][1], m[2][2])?, mul(m[1][2], m[2][1])?)?;
        let c1 = sub(mul(m[1][0], m[2][2])?, mul(m[1][2], m[2][0])?)?;
        let c2 = sub(mul(m[1][0], m[2][1])?, mul(m[1][1], m[2][0])?)?;
        add(sub(mul(m[0][0], c0)?, mul(m[0][1], c1)?)?, mul(m[0][2], c2)?)
    }

    pub fn add_mat(&self, other: &IntMat3) -> Result<IntMat3> {
        let mut out = [[0i128; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                out[i][j] = add(self.0[i][j], other.0[i][j])?;
            }
        }
        Ok(IntMat3(out))
    }

    pub fn sub_mat(&self, other: &IntMat3) -> Result<IntMat3> {
        let mut out = [[0i128; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                out[i][j] = sub(self.0[i][j], other.0[i][j])?;
            }
        }
        Ok(IntMat3(out))
    }

    pub fn scale(&self, s: i128) -> Result<IntMat3> {
        let mut out = [[0i128; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                out[i][j] = mul(self.0[i][j], s)?;
            }
        }
        Ok(IntMat3(out))
    }

    pub fn mul_mat(&self, other: &IntMat3) -> Result<IntMat3> {
        let mut out = [[0i128; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                let mut acc = 0i128;
                for k in 0..3 {
                    acc = add(acc, mul(self.0[i][k], other.0[k][j])?)?;
                }
                out[i][j] = acc;
            }
        }
        Ok(IntMat3(out))
    }

    pub fn mul_vec(&self, v: &IntVec3) -> Result<IntVec3> {
        let mut out = [0i128; 3];
        for i in 0..3 {
            let mut acc = 0i128;
            for k in 0..3 {
                acc = add(acc, mul(self.0[i][k], v.0[k])?)?;
            }
            out[i] = acc;
        }
        Ok(IntVec3(out))
    }

    /// Exact integer inverse via the adjugate; requires `det = +-1`.
    pub fn inverse_unimodular(&self) -> Result<IntMat3> {
        let d = self.det()?;
        if d != 1 && d != -1 {
            return Err(Error::NotUnimodular(d));
        }
        let m = &self.0;
        let cof = |r1: usize, r2: usize, c1: usize, c2: usize| -> Result<i128> {
            sub(mul(m[r1][c1], m[r2][c2])?, mul(m[r1][c2], m[r2][c1])?)
        };
        // adjugate: transpose of the cofactor matrix
        let adj = IntMat3([
            [cof(1, 2, 1, 2)?, -cof(0, 2, 1, 2)?, cof(0, 1, 1, 2)?],
            [-cof(1, 2, 0, 2)?, cof(0, 2, 0, 2)?, -cof(0, 1, 0, 2)?],
            [cof(1, 2, 0, 1)?, -cof(0, 2, 0, 1)?, cof(0, 1, 0, 1)?],
        ]);
        if d == 1 {
            Ok(adj)
        } else {
            adj.scale(-1)
        }
    }

    /// `P * self * P^{-1}` for unimodular `P`.
    pub fn conjugate_by(&self, p: &IntMat3) -> Result<IntMat3> {
        let d = p.det()?;
        if d != 1 && d != -1 {
            return Err(Error::NotUnimodularConjugator(d));
        }
        p.mul_mat(self)?.mul_mat(&p.inverse_unimodular()?)
    }

    /// Sum of the principal 2x2 minors (the degree-1 coefficient of the
    /// characteristic polynomial).
    pub fn second_invariant(&self) -> Result<i128> {
        let m = &self.0;
        let m1 = sub(mul(m[1][1], m[2][2])?, mul(m[1][2], m[2][1])?)?;
        let m2 = sub(mul(m[0][0], m[2][2])?, mul(m[0][2], m[2][0])?)?;
        let m3 = sub(mul(m[0][0], m[1][1])?, mul(m[0][1], m[1][0])?)?;
        add(add(m1, m2)?, m3)
    }

    /// Exact coefficients of `det(lambda I - M)`.
    pub fn char_poly(&self) -> Result<CubicPoly> {
        Ok(CubicPoly::from_ints(
            1,
            -self.trace()?,
            self.second_invariant()?,
            -self.det()?,
        ))
    }

    pub fn max_entry(&self) -> i128 {
        self.0
            .iter()
            .flat_map(|r| r.iter())
            .map(|x| x.abs())
            .max()
            .unwrap()
    }
}

/// Exact coefficients of `t -> det((1-t) M + t N)`, computed by
/// evaluating at t = 0, 1, 2, 3 and interpolating.
pub fn segment_det_cubic(m: &IntMat3, n: &IntMat3) -> Result<CubicPoly> {
    let mut vals = [0i128; 4];
    for (t, slot) in vals.iter_mut().enumerate() {
        let t = t as i128;
        let mt = m.scale(1 - t)?.add_mat(&n.scale(t)?)?;
        *slot = mt.det()?;
    }
    Ok(CubicPoly::interpolate_at_0123(vals))
}

/// Coordinate values in canonical order: 0, 1, -1, 2, -2, ..., n, -n.
fn coord_order(n: i128) -> impl Iterator<Item = i128> {
    (0..=n).flat_map(|k| {
        let neg = if k > 0 { Some(-k) } else { None };
        std::iter::once(k).chain(neg)
    })
}

/// All lattice vectors with max-norm at most `bound`, in a fixed
/// deterministic order: increasing max-norm, then canonical coordinate
/// order with `z` most significant. The first nonzero vectors are
/// `e1, -e1, e2, ...`, so already-standard inputs standardize to
/// themselves.
pub fn ordered_vectors(bound: i128) -> impl Iterator<Item = IntVec3> {
    (0..=bound).flat_map(move |n| {
        coord_order(n).flat_map(move |z| {
            coord_order(n).flat_map(move |y| {
                coord_order(n).filter_map(move |x| {
                    let v = IntVec3([x, y, z]);
                    (v.max_norm() == n).then_some(v)
                })
            })
        })
    })
}

/// Completes `(v, ?, u)` to a basis of `Z^3`: returns the first `w` in
/// [`ordered_vectors`] order with `det[v w u] = +-1`, so certificates
/// are deterministic.
///
/// Succeeds iff `v x u` is primitive, i.e. the gcd of the 2x2 minors of
/// the 3x2 matrix `[v u]` is 1 (Smith normal form `diag(1,1)`).
pub fn complete_basis(v: &IntVec3, u: &IntVec3) -> Result<IntVec3> {
    if v.is_zero() || u.is_zero() {
        return Err(Error::ZeroVector);
    }
    let cross = v.cross(u)?;
    if !cross.is_primitive() {
        return Err(Error::NotCompletable(cross));
    }
    // det[v w u] = -(w . (v x u)), so any w with |w . cross| = 1 works.
    // A Bezout solution has coordinates bounded by the cross entries.
    let bound = cross.max_norm().max(1);
    for w in ordered_vectors(bound) {
        let d = IntMat3::from_cols(*v, w, *u).det()?;
        if d == 1 || d == -1 {
            return Ok(w);
        }
    }
    // unreachable for primitive cross products
    Err(Error::NotCompletable(cross))
}

impl fmt::Display for IntMat3 {
    /// Row-major text format: rows joined by ';', entries by ','.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = self
            .0
            .iter()
            .map(|r| {
                r.iter()
                    .map(|x| x.to_string())
                    .collect::<Vec<_>>()
                    .join(",")
            })
            .collect();
        write!(f, "{}", rows.join(";"))
    }
}

impl FromStr for IntMat3 {
    type Err = Error;

    /// Accepts `"0,1,0;0,1,1;1,0,1"` (whitespace ignored) or the JSON
    /// form `[[0,1,0],[0,1,1],[1,0,1]]`.
    fn from_str(s: &str) -> Result<IntMat3> {
        let s = s.trim();
        if s.starts_with('[') {
            let rows: [[i128; 3]; 3] = serde_json::from_str(s)
                .map_err(|e| Error::Parse(format!("bad JSON matrix: {e}")))?;
            return Ok(IntMat3(rows));
        }
        let mut out = [[0i128; 3]; 3];
        let rows: Vec<&str> = s.split(';').collect();
        if rows.len() != 3 {
            return Err(Error::Parse(format!("expected 3 rows, got {}", rows.len())));
        }
        for (i, row) in rows.iter().enumerate() {
            let entries: Vec<&str> = row.split(',').collect();
            if entries.len() != 3 {
                return Err(Error::Parse(format!(
                    "row {}: expected 3 entries, got {}",
                    i + 1,
                    entries.len()
                )));
            }
            for (j, e) in entries.iter().enumerate() {
                out[i][j] = e
                    .trim()
                    .parse::<i128>()
                    .map_err(|_| Error::Parse(format!("bad integer {e:?}")))?;
            }
        }
        Ok(IntMat3(out))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const A0: IntMat3 = IntMat3([[0, 1, 0], [0, 1, 1], [1, 0, 1]]);
    const DELTA: IntMat3 = IntMat3([[1, -1, 0], [0, 1, 0], [0, 1, 1]]);

    #[test]
    fn det_examples() {
        assert_eq!(IntMat3::IDENTITY.det().unwrap(), 1);
        assert_eq!(A0.det().unwrap(), 1);
        assert_eq!(DELTA.det().unwrap(), 1);
    }

    #[test]
    fn mul_identity_and_sig0_chain() {
        let a = IntMat3([[0, -1, -2], [0, -1, -3], [1, 2, 5]]);
        assert_eq!(a.mul_mat(&IntMat3::IDENTITY).unwrap(), a);
        let delta_sq = DELTA.mul_mat(&DELTA).unwrap();
        let step1 = delta_sq.mul_mat(&a).unwrap();
        assert_eq!(step1, IntMat3([[0, 1, 4], [0, -1, -3], [1, 0, -1]]));
        let delta0 = IntMat3([[1, 0, 1], [0, 1, -2], [0, 0, 1]]);
        let delta0_sq = delta0.mul_mat(&delta0).unwrap();
        let step2 = step1.mul_mat(&delta0_sq).unwrap();
        assert_eq!(step2, IntMat3([[0, 1, 0], [0, -1, 1], [1, 0, 1]]));
    }

    #[test]
    fn inverse_examples() {
        assert_eq!(
            IntMat3::IDENTITY.inverse_unimodular().unwrap(),
            IntMat3::IDENTITY
        );
        let c = IntMat3([[2, 1, 2], [0, -1, -1], [-1, 0, -1]]);
        assert_eq!(
            c.inverse_unimodular().unwrap(),
            IntMat3([[1, 1, 1], [1, 0, 2], [-1, -1, -2]])
        );
        // adjugate oracle: product with the inverse is the identity
        let dinv = DELTA.inverse_unimodular().unwrap();
        assert_eq!(dinv, IntMat3([[1, 1, 0], [0, 1, 0], [0, -1, 1]]));
        assert_eq!(DELTA.mul_mat(&dinv).unwrap(), IntMat3::IDENTITY);
    }

    #[test]
    fn inverse_rejects_non_unimodular() {
        let m = IntMat3::diag(2, 1, 1);
        assert!(matches!(
            m.inverse_unimodular(),
            Err(Error::NotUnimodular(2))
        ));
    }

    #[test]
    fn char_poly_examples() {
        let p = IntMat3::IDENTITY.char_poly().unwrap();
        assert_eq!(p, CubicPoly::from_ints(1, -3, 3, -1));
        let p = A0.char_poly().unwrap();
        assert_eq!(p, CubicPoly::from_ints(1, -2, 1, -1));
        let a = IntMat3([[0, -1, -2], [0, -1, -3], [1, 2, 5]]);
        assert_eq!(a.char_poly().unwrap(), CubicPoly::from_ints(1, -4, 3, -1));
    }

    #[test]
    fn complete_basis_examples() {
        let w = complete_basis(&IntVec3::E1, &IntVec3::E3).unwrap();
        assert_eq!(w, IntVec3::E2);
        let d = IntMat3::from_cols(IntVec3::E1, w, IntVec3::E3).det().unwrap();
        assert_eq!(d.abs(), 1);

        // v = e1, u = A0 e1 = e3: same completion problem
        let u = A0.mul_vec(&IntVec3::E1).unwrap();
        assert_eq!(u, IntVec3::E3);
        let w = complete_basis(&IntVec3::E1, &u).unwrap();
        assert_eq!(
            IntMat3::from_cols(IntVec3::E1, w, u).det().unwrap().abs(),
            1
        );

        let err = complete_basis(&IntVec3([2, 0, 0]), &IntVec3([0, 1, 0]));
        assert!(matches!(err, Err(Error::NotCompletable(_))));
    }

    #[test]
    fn segment_det_endpoints() {
        let m = IntMat3([[0, -1, -2], [0, -1, -3], [1, 2, 5]]);
        let n = IntMat3([[0, -1, -2], [0, 1, 1], [1, 2, 3]]);
        let p = segment_det_cubic(&m, &n).unwrap();
        assert_eq!(p.eval_int(0), crate::poly::rat(m.det().unwrap()));
        assert_eq!(p.eval_int(1), crate::poly::rat(n.det().unwrap()));

        let q = segment_det_cubic(&IntMat3::IDENTITY, &IntMat3::diag(-1, -1, 1)).unwrap();
        // det((1-t)I + t diag(-1,-1,1)) = (1-2t)^2
        assert_eq!(q, CubicPoly::from_ints(0, 4, -4, 1));

        let same = segment_det_cubic(&m, &m).unwrap();
        assert_eq!(same, CubicPoly::from_ints(0, 0, 0, 1));
    }

    #[test]
    fn parse_round_trip() {
        let a: IntMat3 = "0,1,0;0,1,1;1,0,1".parse().unwrap();
        assert_eq!(a, A0);
        let a: IntMat3 = " 0, 1,0 ; 0,1,1; 1,0,1 ".parse().unwrap();
        assert_eq!(a, A0);
        let a: IntMat3 = "[[0,1,0],[0,1,1],[1,0,1]]".parse().unwrap();
        assert_eq!(a, A0);
        assert_eq!(A0.to_string(), "0,1,0;0,1,1;1,0,1");
        assert!("1,2;3,4".parse::<IntMat3>().is_err());
    }
}
