//! Exact multivariate polynomials over the integers.
//!
//! Polynomials live in `Z[x1, x2, ...]` and are stored recursively: a
//! non-constant polynomial is a dense coefficient list in its highest
//! variable, each coefficient mentioning only lower variables. The
//! representation is canonical (no trailing zero coefficients, no
//! length-one coefficient lists), so structural equality is polynomial
//! equality and hashing is sound.
//!
//! Variables are 1-based: `x1` has index 1. Most operations take the index
//! of the main variable explicitly, since the elimination order is
//! positional.

mod text;
mod univariate;

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::sign::Sign;

pub use text::{tokenize, variable_index, ParseError, PolyParser, RatPoly, Token, TokenKind};
pub use univariate::QPoly;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolyError {
    #[error("truncation index {index} outside [-1, {degree}]")]
    TruncationOutOfRange { index: isize, degree: isize },
    #[error("point has {given} coordinates but the polynomial needs {needed}")]
    DimensionMismatch { given: usize, needed: usize },
    #[error("polynomial is constant in x{var}")]
    ConstantInMainVariable { var: usize },
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("polynomial has non-integer coefficients")]
    NonIntegral,
}

#[derive(Clone, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
enum Repr {
    Const(BigInt),
    /// `coeffs[j]` multiplies `x_var^j`; at least two entries, last nonzero.
    Rec { var: usize, coeffs: Vec<MPoly> },
}

/// A polynomial in `Z[x1, ..., xk]`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MPoly(Repr);

impl MPoly {
    pub fn zero() -> MPoly {
        MPoly(Repr::Const(BigInt::zero()))
    }

    pub fn one() -> MPoly {
        MPoly(Repr::Const(BigInt::one()))
    }

    pub fn constant(c: impl Into<BigInt>) -> MPoly {
        MPoly(Repr::Const(c.into()))
    }

    /// The monomial `x_v`.
    pub fn var(v: usize) -> MPoly {
        assert!(v >= 1, "variables are 1-based");
        MPoly(Repr::Rec {
            var: v,
            coeffs: vec![MPoly::zero(), MPoly::one()],
        })
    }

    /// Builds `sum_j coeffs[j] * x_v^j`. Coefficients must not mention `x_w`
    /// for `w >= v`.
    pub fn from_coeffs(v: usize, coeffs: Vec<MPoly>) -> MPoly {
        debug_assert!(coeffs.iter().all(|c| c.top_var() < v));
        normalize(v, coeffs)
    }

    /// Univariate polynomial in `x_v` with integer coefficients (lowest first).
    pub fn from_ints<T: Into<BigInt> + Clone>(v: usize, coeffs: &[T]) -> MPoly {
        normalize(
            v,
            coeffs
                .iter()
                .map(|c| MPoly::constant(c.clone().into()))
                .collect(),
        )
    }

    pub fn is_zero(&self) -> bool {
        matches!(&self.0, Repr::Const(c) if c.is_zero())
    }

    pub fn is_one(&self) -> bool {
        matches!(&self.0, Repr::Const(c) if c.is_one())
    }

    /// True when the polynomial lies in `Z`.
    pub fn is_constant(&self) -> bool {
        matches!(self.0, Repr::Const(_))
    }

    pub fn as_constant(&self) -> Option<&BigInt> {
        match &self.0 {
            Repr::Const(c) => Some(c),
            Repr::Rec { .. } => None,
        }
    }

    /// Sign of a constant polynomial.
    pub fn constant_sign(&self) -> Option<Sign> {
        self.as_constant().map(Sign::of_int)
    }

    /// Index of the highest variable present, 0 for constants.
    pub fn top_var(&self) -> usize {
        match &self.0 {
            Repr::Const(_) => 0,
            Repr::Rec { var, .. } => *var,
        }
    }

    /// Coefficients in `x_v`, lowest degree first. Empty for the zero polynomial.
    pub fn coeffs_in(&self, v: usize) -> Vec<MPoly> {
        if self.is_zero() {
            return Vec::new();
        }
        match &self.0 {
            Repr::Const(_) => vec![self.clone()],
            Repr::Rec { var, coeffs } => {
                if *var == v {
                    coeffs.clone()
                } else if *var < v {
                    vec![self.clone()]
                } else {
                    let per: Vec<Vec<MPoly>> = coeffs.iter().map(|c| c.coeffs_in(v)).collect();
                    let len = per.iter().map(Vec::len).max().unwrap_or(0);
                    (0..len)
                        .map(|j| {
                            let outer = per
                                .iter()
                                .map(|cs| cs.get(j).cloned().unwrap_or_else(MPoly::zero))
                                .collect();
                            normalize(*var, outer)
                        })
                        .collect()
                }
            }
        }
    }

    /// Degree in `x_v`; `None` for the zero polynomial.
    pub fn degree_in(&self, v: usize) -> Option<usize> {
        if self.is_zero() {
            return None;
        }
        Some(match &self.0 {
            Repr::Const(_) => 0,
            Repr::Rec { var, coeffs } => {
                if *var == v {
                    coeffs.len() - 1
                } else if *var < v {
                    0
                } else {
                    coeffs
                        .iter()
                        .filter_map(|c| c.degree_in(v))
                        .max()
                        .unwrap_or(0)
                }
            }
        })
    }

    /// Leading coefficient with respect to `x_v` (zero for the zero polynomial).
    pub fn lc_in(&self, v: usize) -> MPoly {
        if self.top_var() == v {
            if let Repr::Rec { coeffs, .. } = &self.0 {
                return coeffs.last().cloned().unwrap_or_else(MPoly::zero);
            }
        }
        self.coeffs_in(v).pop().unwrap_or_else(MPoly::zero)
    }

    /// Total degree; 0 for constants including zero.
    pub fn total_degree(&self) -> usize {
        match &self.0 {
            Repr::Const(_) => 0,
            Repr::Rec { coeffs, .. } => coeffs
                .iter()
                .enumerate()
                .filter(|(_, c)| !c.is_zero())
                .map(|(j, c)| j + c.total_degree())
                .max()
                .unwrap_or(0),
        }
    }

    /// Total degree in all variables other than `x_v`.
    pub fn param_degree(&self, v: usize) -> usize {
        self.coeffs_in(v)
            .iter()
            .map(MPoly::total_degree)
            .max()
            .unwrap_or(0)
    }

    pub fn scale(&self, k: &BigInt) -> MPoly {
        if k.is_zero() {
            return MPoly::zero();
        }
        match &self.0 {
            Repr::Const(c) => MPoly::constant(c * k),
            Repr::Rec { var, coeffs } => MPoly(Repr::Rec {
                var: *var,
                coeffs: coeffs.iter().map(|c| c.scale(k)).collect(),
            }),
        }
    }

    pub fn pow(&self, e: u32) -> MPoly {
        let mut acc = MPoly::one();
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Formal derivative of the given order with respect to `x_v`.
    pub fn derivative(&self, v: usize, order: usize) -> MPoly {
        let mut p = self.clone();
        for _ in 0..order {
            p = p.derivative_once(v);
            if p.is_zero() {
                break;
            }
        }
        p
    }

    fn derivative_once(&self, v: usize) -> MPoly {
        match &self.0 {
            Repr::Const(_) => MPoly::zero(),
            Repr::Rec { var, coeffs } => {
                if *var == v {
                    let out = coeffs
                        .iter()
                        .enumerate()
                        .skip(1)
                        .map(|(j, c)| c.scale(&BigInt::from(j)))
                        .collect();
                    normalize(v, out)
                } else if *var < v {
                    MPoly::zero()
                } else {
                    let out = coeffs.iter().map(|c| c.derivative_once(v)).collect();
                    normalize(*var, out)
                }
            }
        }
    }

    /// `[P, P', ..., P^(p-1)]` where `p` is the degree in `x_v`.
    pub fn der_list(&self, v: usize) -> Result<Vec<MPoly>, PolyError> {
        let p = match self.degree_in(v) {
            Some(p) if p >= 1 => p,
            _ => return Err(PolyError::ConstantInMainVariable { var: v }),
        };
        let mut out = Vec::with_capacity(p);
        let mut cur = self.clone();
        for _ in 0..p {
            let next = cur.derivative_once(v);
            out.push(cur);
            cur = next;
        }
        Ok(out)
    }

    /// `c_j x_v^j + ... + c_0`; `j = -1` gives the zero polynomial.
    pub fn truncation(&self, v: usize, j: isize) -> Result<MPoly, PolyError> {
        let coeffs = self.coeffs_in(v);
        let degree = coeffs.len() as isize - 1;
        if j < -1 || j > degree.max(0) {
            return Err(PolyError::TruncationOutOfRange { index: j, degree });
        }
        let keep = (j + 1) as usize;
        Ok(normalize_in(v, coeffs.into_iter().take(keep).collect()))
    }

    /// The set of truncations of `self` in `x_v`, largest first.
    pub fn truncation_set(&self, v: usize) -> Vec<MPoly> {
        let mut out = Vec::new();
        let mut cur = self.clone();
        while !cur.is_zero() {
            let lc = cur.lc_in(v);
            out.push(cur.clone());
            if lc.is_constant() {
                break;
            }
            cur = cur.drop_leading(v);
        }
        out
    }

    /// Relevant coefficients: the leading coefficients of successive
    /// truncations, stopping at the first one lying in `Z`.
    pub fn relevant_coefficients(&self, v: usize) -> Vec<MPoly> {
        let mut out = Vec::new();
        let mut cur = self.clone();
        while !cur.is_zero() {
            let lc = cur.lc_in(v);
            if lc.is_constant() {
                break;
            }
            out.push(lc);
            cur = cur.drop_leading(v);
        }
        out
    }

    /// `Tru_{p-1}` for `p = deg_v self`.
    pub(crate) fn drop_leading(&self, v: usize) -> MPoly {
        let mut coeffs = self.coeffs_in(v);
        coeffs.pop();
        normalize_in(v, coeffs)
    }

    /// Evaluates at a rational point; `point[i]` is the value of `x_{i+1}`.
    pub fn eval(&self, point: &[BigRational]) -> Result<BigRational, PolyError> {
        if self.top_var() > point.len() {
            return Err(PolyError::DimensionMismatch {
                given: point.len(),
                needed: self.top_var(),
            });
        }
        Ok(self.eval_unchecked(point))
    }

    fn eval_unchecked(&self, point: &[BigRational]) -> BigRational {
        match &self.0 {
            Repr::Const(c) => BigRational::from_integer(c.clone()),
            Repr::Rec { var, coeffs } => {
                let x = &point[var - 1];
                let mut acc = BigRational::zero();
                for c in coeffs.iter().rev() {
                    acc = acc * x + c.eval_unchecked(point);
                }
                acc
            }
        }
    }

    /// Substitutes `x_1..x_n` by `point` (n = `point.len()`), leaving a
    /// univariate rational polynomial in `x_{n+1}`.
    pub fn specialize(&self, point: &[BigRational]) -> Result<QPoly, PolyError> {
        let n = point.len();
        if self.top_var() > n + 1 {
            return Err(PolyError::DimensionMismatch {
                given: n,
                needed: self.top_var() - 1,
            });
        }
        let coeffs = self
            .coeffs_in(n + 1)
            .iter()
            .map(|c| c.eval_unchecked(point))
            .collect();
        Ok(QPoly::new(coeffs))
    }

    /// Integer coefficients of a polynomial mentioning at most the variable `x_v`.
    pub fn int_coeffs_in(&self, v: usize) -> Option<Vec<BigInt>> {
        if self.top_var() > v {
            return None;
        }
        self.coeffs_in(v)
            .into_iter()
            .map(|c| c.as_constant().cloned())
            .collect()
    }

    /// Gcd of the integer coefficients (zero for the zero polynomial).
    pub fn content(&self) -> BigInt {
        match &self.0 {
            Repr::Const(c) => c.abs(),
            Repr::Rec { coeffs, .. } => coeffs
                .iter()
                .fold(BigInt::zero(), |g, c| g.gcd(&c.content())),
        }
    }

    /// Divides every coefficient by `k`, which must divide them all.
    pub fn div_exact_int(&self, k: &BigInt) -> MPoly {
        match &self.0 {
            Repr::Const(c) => {
                debug_assert!((c % k).is_zero());
                MPoly::constant(c / k)
            }
            Repr::Rec { var, coeffs } => MPoly(Repr::Rec {
                var: *var,
                coeffs: coeffs.iter().map(|c| c.div_exact_int(k)).collect(),
            }),
        }
    }

    /// Terms as `(exponents, coefficient)`, `exponents[i]` being the power of
    /// `x_{i+1}`. Ordered lexicographically with the highest variable most
    /// significant, largest first.
    pub fn terms(&self) -> Vec<(Vec<u32>, BigInt)> {
        let n = self.top_var();
        let mut out = Vec::new();
        self.collect_terms(&mut vec![0; n], &mut out);
        out
    }

    fn collect_terms(&self, exps: &mut Vec<u32>, out: &mut Vec<(Vec<u32>, BigInt)>) {
        match &self.0 {
            Repr::Const(c) => {
                if !c.is_zero() {
                    out.push((exps.clone(), c.clone()));
                }
            }
            Repr::Rec { var, coeffs } => {
                for (j, c) in coeffs.iter().enumerate().rev() {
                    exps[var - 1] = j as u32;
                    c.collect_terms(exps, out);
                }
                exps[var - 1] = 0;
            }
        }
    }
}

fn normalize(v: usize, mut coeffs: Vec<MPoly>) -> MPoly {
    while coeffs.last().is_some_and(MPoly::is_zero) {
        coeffs.pop();
    }
    match coeffs.len() {
        0 => MPoly::zero(),
        1 => coeffs.pop().unwrap(),
        _ => MPoly(Repr::Rec { var: v, coeffs }),
    }
}

/// Like `normalize`, but the coefficients may come from `coeffs_in` of a
/// polynomial whose top variable is below `v`.
fn normalize_in(v: usize, coeffs: Vec<MPoly>) -> MPoly {
    normalize(v, coeffs)
}

fn add_poly(a: &MPoly, b: &MPoly) -> MPoly {
    let (va, vb) = (a.top_var(), b.top_var());
    match (&a.0, &b.0) {
        (Repr::Const(x), Repr::Const(y)) => MPoly::constant(x + y),
        (Repr::Rec { var, coeffs: ca }, Repr::Rec { coeffs: cb, .. }) if va == vb => {
            let n = ca.len().max(cb.len());
            let out = (0..n)
                .map(|j| match (ca.get(j), cb.get(j)) {
                    (Some(x), Some(y)) => add_poly(x, y),
                    (Some(x), None) => x.clone(),
                    (None, Some(y)) => y.clone(),
                    (None, None) => unreachable!(),
                })
                .collect();
            normalize(*var, out)
        }
        _ => {
            let (hi, lo) = if va > vb { (a, b) } else { (b, a) };
            if lo.is_zero() {
                return hi.clone();
            }
            match &hi.0 {
                Repr::Rec { var, coeffs } => {
                    let mut out = coeffs.clone();
                    out[0] = add_poly(&out[0], lo);
                    MPoly(Repr::Rec { var: *var, coeffs: out })
                }
                Repr::Const(_) => unreachable!(),
            }
        }
    }
}

fn mul_poly(a: &MPoly, b: &MPoly) -> MPoly {
    if a.is_zero() || b.is_zero() {
        return MPoly::zero();
    }
    let (va, vb) = (a.top_var(), b.top_var());
    match (&a.0, &b.0) {
        (Repr::Const(x), Repr::Const(y)) => MPoly::constant(x * y),
        (Repr::Rec { var, coeffs: ca }, Repr::Rec { coeffs: cb, .. }) if va == vb => {
            let mut out = vec![MPoly::zero(); ca.len() + cb.len() - 1];
            for (i, x) in ca.iter().enumerate() {
                if x.is_zero() {
                    continue;
                }
                for (j, y) in cb.iter().enumerate() {
                    if y.is_zero() {
                        continue;
                    }
                    out[i + j] = add_poly(&out[i + j], &mul_poly(x, y));
                }
            }
            normalize(*var, out)
        }
        _ => {
            let (hi, lo) = if va > vb { (a, b) } else { (b, a) };
            if let Repr::Const(k) = &lo.0 {
                return hi.scale(k);
            }
            match &hi.0 {
                Repr::Rec { var, coeffs } => {
                    normalize(*var, coeffs.iter().map(|c| mul_poly(c, lo)).collect())
                }
                Repr::Const(_) => unreachable!(),
            }
        }
    }
}

fn neg_poly(a: &MPoly) -> MPoly {
    match &a.0 {
        Repr::Const(c) => MPoly::constant(-c),
        Repr::Rec { var, coeffs } => MPoly(Repr::Rec {
            var: *var,
            coeffs: coeffs.iter().map(neg_poly).collect(),
        }),
    }
}

macro_rules! forward_binop {
    ($tr:ident, $method:ident, $f:expr) => {
        impl std::ops::$tr<&MPoly> for &MPoly {
            type Output = MPoly;
            fn $method(self, rhs: &MPoly) -> MPoly {
                $f(self, rhs)
            }
        }
        impl std::ops::$tr<MPoly> for MPoly {
            type Output = MPoly;
            fn $method(self, rhs: MPoly) -> MPoly {
                $f(&self, &rhs)
            }
        }
        impl std::ops::$tr<&MPoly> for MPoly {
            type Output = MPoly;
            fn $method(self, rhs: &MPoly) -> MPoly {
                $f(&self, rhs)
            }
        }
        impl std::ops::$tr<MPoly> for &MPoly {
            type Output = MPoly;
            fn $method(self, rhs: MPoly) -> MPoly {
                $f(self, &rhs)
            }
        }
    };
}

forward_binop!(Add, add, add_poly);
forward_binop!(Mul, mul, mul_poly);
forward_binop!(Sub, sub, |a: &MPoly, b: &MPoly| add_poly(a, &neg_poly(b)));

impl std::ops::Neg for &MPoly {
    type Output = MPoly;
    fn neg(self) -> MPoly {
        neg_poly(self)
    }
}

impl std::ops::Neg for MPoly {
    type Output = MPoly;
    fn neg(self) -> MPoly {
        neg_poly(&self)
    }
}

impl From<i64> for MPoly {
    fn from(c: i64) -> MPoly {
        MPoly::constant(c)
    }
}

impl From<BigInt> for MPoly {
    fn from(c: BigInt) -> MPoly {
        MPoly::constant(c)
    }
}

impl fmt::Display for MPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms = self.terms();
        if terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (exps, c)) in terms.iter().enumerate() {
            let neg = c.is_negative();
            if i == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, "{}", if neg { " - " } else { " + " })?;
            }
            let mag = c.abs();
            let mut factors: Vec<String> = exps
                .iter()
                .enumerate()
                .filter(|(_, e)| **e > 0)
                .map(|(v, e)| {
                    if *e == 1 {
                        format!("x{}", v + 1)
                    } else {
                        format!("x{}^{}", v + 1, e)
                    }
                })
                .collect();
            if factors.is_empty() || !mag.is_one() {
                factors.insert(0, mag.to_string());
            }
            write!(f, "{}", factors.join("*"))?;
        }
        Ok(())
    }
}

impl fmt::Debug for MPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MPoly({self})")
    }
}

impl std::str::FromStr for MPoly {
    type Err = PolyError;

    /// Parses the textual format: integer coefficients, variables
    /// `x1..xk`, `+ - *` and `^` by nonnegative integer literals.
    fn from_str(s: &str) -> Result<MPoly, PolyError> {
        let mut parser = PolyParser::new(s)?;
        let p = parser.parse_poly()?;
        parser.expect_end()?;
        p.into_integral().ok_or(PolyError::NonIntegral)
    }
}

impl serde::Serialize for MPoly {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> serde::Deserialize<'de> for MPoly {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<MPoly, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
