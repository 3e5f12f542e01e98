//! Exact rational polynomials up to degree 3 and Sturm-chain root
//! counting. No floating point: coefficients are arbitrary-precision
//! rationals, kept in lowest terms by construction.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::fmt;

pub type Rat = BigRational;

/// Exact rational from an integer.
pub fn rat(x: i128) -> Rat {
    Rat::from_integer(BigInt::from(x))
}

pub fn rat_frac(num: i128, den: i128) -> Rat {
    Rat::new(BigInt::from(num), BigInt::from(den))
}

/// Dense univariate polynomial over Q, ascending coefficients, no
/// trailing zeros.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RatPoly {
    coeffs: Vec<Rat>,
}

impl RatPoly {
    pub fn new(mut coeffs: Vec<Rat>) -> RatPoly {
        while coeffs.last().map_or(false, |c| c.is_zero()) {
            coeffs.pop();
        }
        RatPoly { coeffs }
    }

    pub fn zero() -> RatPoly {
        RatPoly { coeffs: vec![] }
    }

    pub fn from_ints(ascending: &[i128]) -> RatPoly {
        RatPoly::new(ascending.iter().map(|&c| rat(c)).collect())
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// None for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeff(&self, i: usize) -> Rat {
        self.coeffs.get(i).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn leading(&self) -> Rat {
        self.coeffs.last().cloned().unwrap_or_else(Rat::zero)
    }

    pub fn eval(&self, x: &Rat) -> Rat {
        let mut acc = Rat::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn derivative(&self) -> RatPoly {
        if self.coeffs.len() <= 1 {
            return RatPoly::zero();
        }
        RatPoly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * rat(i as i128))
                .collect(),
        )
    }

    pub fn neg(&self) -> RatPoly {
        RatPoly::new(self.coeffs.iter().map(|c| -c).collect())
    }

    /// Remainder of `self` by `div` (which must be nonzero).
    pub fn rem(&self, div: &RatPoly) -> RatPoly {
        assert!(!div.is_zero(), "polynomial division by zero");
        let dd = div.degree().unwrap();
        let lead = div.leading();
        let mut r = self.coeffs.clone();
        while r.len() > dd {
            let k = r.len() - 1 - dd;
            let factor = r.last().unwrap() / &lead;
            for i in 0..=dd {
                let sub = &factor * &div.coeffs[i];
                r[k + i] = &r[k + i] - sub;
            }
            r.pop();
            while r.last().map_or(false, |c| c.is_zero()) {
                r.pop();
            }
        }
        RatPoly { coeffs: r }
    }

    /// Exact quotient; panics if the division is inexact.
    pub fn div_exact(&self, div: &RatPoly) -> RatPoly {
        assert!(!div.is_zero(), "polynomial division by zero");
        let dd = div.degree().unwrap();
        let lead = div.leading();
        let mut r = self.coeffs.clone();
        let mut q = vec![Rat::zero(); r.len().saturating_sub(dd)];
        while r.len() > dd {
            let k = r.len() - 1 - dd;
            let factor = r.last().unwrap() / &lead;
            q[k] = factor.clone();
            for i in 0..=dd {
                let sub = &factor * &div.coeffs[i];
                r[k + i] = &r[k + i] - sub;
            }
            r.pop();
            while r.last().map_or(false, |c| c.is_zero()) {
                r.pop();
            }
        }
        assert!(r.is_empty(), "inexact polynomial division");
        RatPoly::new(q)
    }

    /// Monic gcd by the Euclidean algorithm.
    pub fn gcd(&self, other: &RatPoly) -> RatPoly {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let r = a.rem(&b);
            a = b;
            b = r;
        }
        if a.is_zero() {
            return a;
        }
        let lead = a.leading();
        RatPoly::new(a.coeffs.into_iter().map(|c| c / &lead).collect())
    }

    /// `self / gcd(self, self')`: same distinct roots, all simple.
    pub fn square_free_part(&self) -> RatPoly {
        if self.is_zero() || self.degree() == Some(0) {
            return self.clone();
        }
        let g = self.gcd(&self.derivative());
        if g.degree() == Some(0) {
            self.clone()
        } else {
            self.div_exact(&g)
        }
    }

    /// Synthetic division by `(x - root)`; panics unless `root` is a root.
    fn deflate_at(&self, root: &Rat) -> RatPoly {
        let div = RatPoly::new(vec![-root.clone(), Rat::one()]);
        self.div_exact(&div)
    }

    /// Strict upper bound on the absolute value of every real root
    /// (Cauchy bound).
    pub fn cauchy_root_bound(&self) -> Rat {
        let lead = self.leading();
        let mut m = Rat::zero();
        for c in &self.coeffs[..self.coeffs.len().saturating_sub(1)] {
            let v = (c / &lead).abs();
            if v > m {
                m = v;
            }
        }
        Rat::one() + m
    }
}

/// The Sturm chain of a square-free polynomial. Sign-variation counts
/// at interval endpoints yield exact distinct-root counts.
#[derive(Debug, Clone)]
pub struct SturmChain {
    chain: Vec<RatPoly>,
}

impl SturmChain {
    /// `p` should be square-free; the count semantics below assume it.
    pub fn new(p: &RatPoly) -> SturmChain {
        let mut chain = vec![p.clone(), p.derivative()];
        loop {
            let n = chain.len();
            if chain[n - 1].is_zero() {
                chain.pop();
                break;
            }
            let r = chain[n - 2].rem(&chain[n - 1]).neg();
            if r.is_zero() {
                break;
            }
            chain.push(r);
        }
        SturmChain { chain }
    }

    /// Sign variations at `x`, skipping zeros.
    pub fn variations_at(&self, x: &Rat) -> usize {
        let signs: Vec<i8> = self
            .chain
            .iter()
            .map(|p| {
                let v = p.eval(x);
                if v.is_zero() {
                    0
                } else if v.is_positive() {
                    1
                } else {
                    -1
                }
            })
            .filter(|&s| s != 0)
            .collect();
        signs.windows(2).filter(|w| w[0] != w[1]).count()
    }
}

/// Interval for exact root counting.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RootInterval {
    /// `(lo, hi)`, both endpoints excluded.
    Open(Rat, Rat),
    /// `(lo, hi]`.
    OpenClosed(Rat, Rat),
    /// `(0, +infinity)`, closed off by the Cauchy bound.
    PositiveRay,
}

/// Number of distinct real roots of `p` strictly between `u` and `w`,
/// for square-free `p`. Roots exactly at `u` or `w` are deflated away
/// first, so the classical Sturm hypothesis `p(u) p(w) != 0` holds.
fn distinct_roots_open_sf(p_sf: &RatPoly, u: &Rat, w: &Rat) -> usize {
    if u >= w || p_sf.degree().map_or(true, |d| d == 0) {
        return 0;
    }
    let mut q = p_sf.clone();
    if q.eval(u).is_zero() {
        q = q.deflate_at(u);
    }
    if q.eval(w).is_zero() {
        q = q.deflate_at(w);
    }
    if q.degree().map_or(true, |d| d == 0) {
        return 0;
    }
    let chain = SturmChain::new(&q);
    chain.variations_at(u) - chain.variations_at(w)
}

/// Exact count of distinct real roots of `p` in the interval, via
/// square-free reduction and Sturm chains.
pub fn count_roots_in_interval(p: &CubicPoly, interval: &RootInterval) -> usize {
    count_roots_ratpoly(&p.to_ratpoly(), interval)
}

pub fn count_roots_ratpoly(p: &RatPoly, interval: &RootInterval) -> usize {
    if p.is_zero() {
        return 0;
    }
    let sf = p.square_free_part();
    match interval {
        RootInterval::Open(u, w) => distinct_roots_open_sf(&sf, u, w),
        RootInterval::OpenClosed(u, w) => {
            let boundary = if w > u && sf.eval(w).is_zero() { 1 } else { 0 };
            distinct_roots_open_sf(&sf, u, w) + boundary
        }
        RootInterval::PositiveRay => {
            let b = sf.cauchy_root_bound();
            distinct_roots_open_sf(&sf, &Rat::zero(), &b)
        }
    }
}

/// An exact cubic (leading coefficient may be zero, admitting lower
/// degree). Coefficients are stored in lowest terms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CubicPoly {
    pub c3: Rat,
    pub c2: Rat,
    pub c1: Rat,
    pub c0: Rat,
}

impl CubicPoly {
    pub fn new(c3: Rat, c2: Rat, c1: Rat, c0: Rat) -> CubicPoly {
        CubicPoly { c3, c2, c1, c0 }
    }

    pub fn from_ints(c3: i128, c2: i128, c1: i128, c0: i128) -> CubicPoly {
        CubicPoly::new(rat(c3), rat(c2), rat(c1), rat(c0))
    }

    pub fn to_ratpoly(&self) -> RatPoly {
        RatPoly::new(vec![
            self.c0.clone(),
            self.c1.clone(),
            self.c2.clone(),
            self.c3.clone(),
        ])
    }

    pub fn eval(&self, x: &Rat) -> Rat {
        self.to_ratpoly().eval(x)
    }

    pub fn eval_int(&self, x: i128) -> Rat {
        self.eval(&rat(x))
    }

    pub fn is_zero(&self) -> bool {
        self.c3.is_zero() && self.c2.is_zero() && self.c1.is_zero() && self.c0.is_zero()
    }

    /// The unique cubic through `(i, values[i])` for `i = 0..4`, by
    /// finite differences.
    pub fn interpolate_at_0123(values: [i128; 4]) -> CubicPoly {
        let v: Vec<Rat> = values.iter().map(|&x| rat(x)).collect();
        let d1 = &v[1] - &v[0];
        let d2 = &v[2] - rat(2) * &v[1] + &v[0];
        let d3 = &v[3] - rat(3) * &v[2] + rat(3) * &v[1] - &v[0];
        let c3 = &d3 / rat(6);
        let c2 = &d2 / rat(2) - &d3 / rat(2);
        let c1 = &d1 - &d2 / rat(2) + &d3 / rat(3);
        let c0 = v[0].clone();
        CubicPoly { c3, c2, c1, c0 }
    }
}

impl fmt::Display for CubicPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms = [
            (&self.c3, "x^3"),
            (&self.c2, "x^2"),
            (&self.c1, "x"),
            (&self.c0, ""),
        ];
        let mut first = true;
        for (c, var) in terms {
            if c.is_zero() {
                continue;
            }
            if first {
                write!(f, "{c}")?;
                first = false;
            } else if c.is_positive() {
                write!(f, " + {c}")?;
            } else {
                write!(f, " - {}", c.abs())?;
            }
            if !var.is_empty() {
                write!(f, "*{var}")?;
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}
