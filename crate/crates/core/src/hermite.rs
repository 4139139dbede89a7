//! Hermite matrices, their scaled principal minors, and signatures.
//!
//! For `T = c_p' y^p' + ... + c_0` and `A = c'_a y^a + ... + c'_0` with
//! coefficients in a ring of parameters, `c^(a+2p'-2) Her(T;A)` has entries
//! in that ring and is computed from the traces of the multiplication-by-`c y`
//! maps in `R[y]/T`. Its leading principal minors, reindexed, are the `HMi`
//! polynomials. Signs of those minors at a parameter point determine the
//! Tarski query `TaQu(A;T)` there.

use num_bigint::BigInt;
use num_traits::Zero;
use thiserror::Error;

use crate::linalg::{berkowitz_principal_minors, Ring, SquareMatrix};
use crate::poly::MPoly;
use crate::sign::Sign;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HermiteError {
    #[error("trace table holds traces up to {have}, {need} required")]
    TableTooShort { have: usize, need: usize },
    #[error("polynomial has degree 0 in its main variable")]
    ConstantBase,
    #[error("last sign of the minor list is zero")]
    ZeroLastSign,
    #[error("leading coefficient sign is zero")]
    ZeroLeadingSign,
    #[error("expected {expected} minor signs, got {got}")]
    WrongLength { expected: usize, got: usize },
    #[error("polynomials must be univariate in a common variable")]
    NotUnivariate,
}

/// Traces of `M_h`, the matrix of multiplication by `(c y)^h` in `R[y]/T`,
/// for `h = 0..=N`.
#[derive(Clone, Debug)]
pub struct TraceTable<R> {
    coeffs: Vec<R>,
    traces: Vec<R>,
    lc_powers: Vec<R>,
}

impl<R: Ring> TraceTable<R> {
    /// `coeffs` are the coefficients of `T` in its main variable, lowest
    /// first; the last one is the (nonzero) leading coefficient.
    pub fn build(coeffs: Vec<R>, n: usize) -> Result<TraceTable<R>, HermiteError> {
        if coeffs.len() < 2 || coeffs.last().is_none_or(|c| c.is_zero()) {
            return Err(HermiteError::ConstantBase);
        }
        let p = coeffs.len() - 1;
        let c = coeffs[p].clone();
        let n = n.max(p - 1);
        let mut lc_powers = vec![R::one()];
        for i in 1..=n.max(p) {
            let next = lc_powers[i - 1].times(&c);
            lc_powers.push(next);
        }

        let mut traces = Vec::with_capacity(n + 1);
        traces.push(R::from_i64(p as i64));
        // M_h for h < p by repeated multiplication with the companion-like M_1:
        // (M_1 X)[i][j] = c X[i-1][j] - c_i X[p-1][j]
        let mut m = SquareMatrix::<R>::identity(p);
        for h in 1..p.min(n + 1) {
            m = SquareMatrix::from_fn(p, |i, j| {
                let last = coeffs[i].times(m.get(p - 1, j));
                if i == 0 {
                    last.negate()
                } else {
                    c.times(m.get(i - 1, j)).minus(&last)
                }
            });
            debug_assert_eq!(traces.len(), h);
            traces.push(m.trace());
        }
        for h in p..=n {
            let mut acc = R::zero();
            for i in 1..=p {
                let term = coeffs[p - i].times(&lc_powers[i - 1]).times(&traces[h - i]);
                acc = acc.plus(&term);
            }
            traces.push(acc.negate());
        }
        Ok(TraceTable {
            coeffs,
            traces,
            lc_powers,
        })
    }

    /// Degree `p'` of the base polynomial.
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn leading_coefficient(&self) -> &R {
        &self.coeffs[self.degree()]
    }

    pub fn traces(&self) -> &[R] {
        &self.traces
    }

    /// Largest `h` whose trace is stored.
    pub fn max_index(&self) -> usize {
        self.traces.len() - 1
    }

    fn lc_pow(&self, e: usize) -> R {
        if e < self.lc_powers.len() {
            return self.lc_powers[e].clone();
        }
        let mut acc = self.lc_powers.last().unwrap().clone();
        for _ in self.lc_powers.len() - 1..e {
            acc = acc.times(self.leading_coefficient());
        }
        acc
    }

    /// `c^(a+2p'-2) Her(T;A)` where `a_coeffs` are the coefficients of `A`
    /// (lowest first, nonempty).
    pub fn scaled_hermite_matrix(&self, a_coeffs: &[R]) -> Result<SquareMatrix<R>, HermiteError> {
        let p = self.degree();
        let a = a_coeffs.len().saturating_sub(1);
        let need = a + 2 * p - 2;
        if need > self.max_index() {
            return Err(HermiteError::TableTooShort {
                have: self.max_index(),
                need,
            });
        }
        let hankel: Vec<R> = (0..=2 * p - 2)
            .map(|k| {
                a_coeffs.iter().enumerate().fold(R::zero(), |acc, (h, ch)| {
                    if ch.is_zero() {
                        return acc;
                    }
                    let term = ch.times(&self.lc_pow(need - h - k)).times(&self.traces[h + k]);
                    acc.plus(&term)
                })
            })
            .collect();
        Ok(SquareMatrix::from_fn(p, |i, j| hankel[i + j].clone()))
    }

    /// `HMi(T;A)`: entry `j` is the `(p'-j)`-th leading principal minor of
    /// the scaled Hermite matrix.
    pub fn hmi(&self, a_coeffs: &[R]) -> Result<HmiList<R>, HermiteError> {
        let m = self.scaled_hermite_matrix(a_coeffs)?;
        let mut minors = berkowitz_principal_minors(&m);
        minors.reverse();
        Ok(HmiList {
            minors,
            a: a_coeffs.len().saturating_sub(1),
        })
    }
}

/// `[HMi_0, ..., HMi_{p'-1}]` together with the degree `a` of `A`.
#[derive(Clone, Debug, PartialEq)]
pub struct HmiList<R> {
    pub minors: Vec<R>,
    pub a: usize,
}

impl<R> HmiList<R> {
    pub fn degree(&self) -> usize {
        self.minors.len()
    }
}

impl HmiList<MPoly> {
    /// Checks `deg_u HMi <= p'((a+2p'-2) deg_u T + deg_u A)`.
    pub fn within_degree_bound(&self, t_param_degree: usize, a_param_degree: usize) -> bool {
        let p = self.degree();
        let bound = p * ((self.a + 2 * p - 2) * t_param_degree + a_param_degree);
        self.minors.iter().all(|m| m.total_degree() <= bound)
    }
}

/// `(-1)^(k(k-1)/2)`
fn epsilon(k: usize) -> i64 {
    if (k * (k.wrapping_sub(1)) / 2).is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// Permanences minus variations of a sign list `h_0..h_p` with `h_p != 0`.
pub fn pmv(signs: &[Sign]) -> Result<i64, HermiteError> {
    if signs.last().is_none_or(|s| s.is_zero()) {
        return Err(HermiteError::ZeroLastSign);
    }
    let nonzero: Vec<usize> = (0..signs.len()).rev().filter(|&i| !signs[i].is_zero()).collect();
    let mut total = 0;
    for w in nonzero.windows(2) {
        let gap = w[0] - w[1];
        if gap % 2 == 1 {
            total += epsilon(gap) * (signs[w[0]] * signs[w[1]]).to_i8() as i64;
        }
    }
    Ok(total)
}

/// Signature of `Her(T;A)` from the signs of `HMi_0..HMi_{p'-1}` at a point
/// where the leading coefficient of `T` has sign `lc_sign`.
pub fn signature_from_minor_signs(
    minor_signs: &[Sign],
    a: usize,
    lc_sign: Sign,
) -> Result<i64, HermiteError> {
    if lc_sign.is_zero() {
        return Err(HermiteError::ZeroLeadingSign);
    }
    let p = minor_signs.len();
    let mut signs: Vec<Sign> = minor_signs
        .iter()
        .enumerate()
        .map(|(j, s)| *s * lc_sign.pow(((p - j) * (a + 2 * p - 2)) as u64))
        .collect();
    signs.push(Sign::Pos);
    pmv(&signs)
}

/// Signature of `Her(T;A)` for an integer `HmiList` and known leading sign.
pub fn signature_from_hmi(h: &HmiList<BigInt>, lc_sign: Sign) -> Result<i64, HermiteError> {
    let signs: Vec<Sign> = h.minors.iter().map(Sign::of_int).collect();
    signature_from_minor_signs(&signs, h.a, lc_sign)
}

/// `TaQu(Q;P)` for univariate integer polynomials, through the Hermite
/// pipeline.
pub fn tarski_query_numeric(p: &MPoly, q: &MPoly) -> Result<i64, HermiteError> {
    let v = p.top_var();
    if v == 0 {
        return Err(HermiteError::ConstantBase);
    }
    if q.top_var() > v && !q.is_constant() {
        return Err(HermiteError::NotUnivariate);
    }
    let pc = p.int_coeffs_in(v).ok_or(HermiteError::NotUnivariate)?;
    let qc = q.int_coeffs_in(v).ok_or(HermiteError::NotUnivariate)?;
    if qc.is_empty() {
        return Ok(0);
    }
    tarski_query_ints(&pc, &qc)
}

/// `TaQu(Q;P)` from integer coefficient lists (lowest first).
pub fn tarski_query_ints(p: &[BigInt], q: &[BigInt]) -> Result<i64, HermiteError> {
    if q.iter().all(Zero::is_zero) {
        return Ok(0);
    }
    let deg = p.len().checked_sub(1).ok_or(HermiteError::ConstantBase)?;
    if deg == 0 {
        return Err(HermiteError::ConstantBase);
    }
    let a = q.len() - 1;
    let table = TraceTable::build(p.to_vec(), a + 2 * deg - 2)?;
    let h = table.hmi(q)?;
    signature_from_hmi(&h, Sign::of_int(&p[deg]))
}
