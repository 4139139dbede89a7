//! Sign determination at the real roots of a polynomial from Tarski
//! queries, Thom encodings, and the Thom ordering of roots.
//!
//! Everything here is driven by a query callback answering `TaQu(A;T)` for
//! product polynomials `A`, identified by exponent vectors. The callback may
//! compute numerically (see [`NumericQueries`]) or read signs of
//! precomputed minors off a parameter sign condition.

use std::cmp::Ordering;
use std::collections::HashMap;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::hermite::{tarski_query_ints, HermiteError};
use crate::linalg::{first_independent_rows, solve_exact, SquareMatrix};
use crate::poly::MPoly;
use crate::sign::Sign;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SignDetError {
    #[error("Tarski queries are inconsistent: {0}")]
    Inconsistent(String),
    #[error("product {exps:?} lies outside the admissible product set")]
    ProductSetViolation { exps: Vec<u8> },
    #[error("query failed: {0}")]
    Query(String),
    #[error("Thom encodings are not comparable")]
    Incomparable,
}

impl From<HermiteError> for SignDetError {
    fn from(e: HermiteError) -> Self {
        SignDetError::Query(e.to_string())
    }
}

/// `bit(p)`: number of binary digits of `p`, with `bit(0) = 1`.
pub fn bit(p: usize) -> usize {
    if p == 0 {
        1
    } else {
        (usize::BITS - p.leading_zeros()) as usize
    }
}

/// Exponent vectors of `PDer_j` over `n` derivatives: entries in `{0,1,2}`
/// with at most `j` nonzero. Ordered by number of nonzero entries, then
/// lexicographically.
pub fn pder_exponents(n: usize, j: usize) -> Vec<Vec<u8>> {
    let mut out: Vec<Vec<u8>> = Vec::new();
    let mut cur = vec![0u8; n];
    fn rec(i: usize, left: usize, cur: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
        if i == cur.len() {
            out.push(cur.clone());
            return;
        }
        cur[i] = 0;
        rec(i + 1, left, cur, out);
        if left > 0 {
            for e in 1..=2 {
                cur[i] = e;
                rec(i + 1, left - 1, cur, out);
            }
            cur[i] = 0;
        }
    }
    rec(0, j, &mut cur, &mut out);
    out.sort_by(|a, b| {
        let na = a.iter().filter(|&&e| e > 0).count();
        let nb = b.iter().filter(|&&e| e > 0).count();
        na.cmp(&nb).then_with(|| a.cmp(b))
    });
    out
}

/// Number of elements of `PDer_j` over `n` derivatives, without enumerating.
pub fn pder_count(n: usize, j: usize) -> u128 {
    let mut total: u128 = 0;
    let mut binom: u128 = 1;
    for t in 0..=j.min(n) {
        if t > 0 {
            binom = binom * (n - t + 1) as u128 / t as u128;
        }
        total += binom << t;
    }
    total
}

/// `PDer_j(P)`: products of derivatives of `P` (in `x_v`) to powers 0, 1, 2
/// with at most `j` nonzero exponents, the empty product included.
pub fn pder(p: &MPoly, v: usize, j: usize) -> Vec<MPoly> {
    let ders = match p.der_list(v) {
        Ok(d) => d,
        Err(_) => return vec![MPoly::one()],
    };
    pder_exponents(ders.len() - 1, j)
        .iter()
        .map(|e| product(&ders[1..], e))
        .collect()
}

/// `PDer_j(P;Q)`: every element of `PDer_j(P)` multiplied by `Q` and by `Q^2`.
pub fn pder_with(p: &MPoly, q: &MPoly, v: usize, j: usize) -> Vec<MPoly> {
    let q2 = q * q;
    pder(p, v, j)
        .into_iter()
        .flat_map(|a| [&a * q, &a * &q2])
        .collect()
}

/// `prod_i factors[i]^exps[i]`
pub fn product(factors: &[MPoly], exps: &[u8]) -> MPoly {
    let mut acc = MPoly::one();
    for (f, &e) in factors.iter().zip(exps) {
        if e > 0 {
            acc = &acc * &f.pow(e as u32);
        }
    }
    acc
}

/// Realizable sign conditions on a polynomial list at the roots of `T`,
/// with the number of roots realizing each.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SignCounts {
    pub entries: Vec<(Vec<Sign>, u64)>,
}

impl SignCounts {
    pub fn count(&self, cond: &[Sign]) -> u64 {
        self.entries
            .iter()
            .find(|(c, _)| c == cond)
            .map_or(0, |(_, n)| *n)
    }

    pub fn total(&self) -> u64 {
        self.entries.iter().map(|(_, n)| n).sum()
    }
}

/// `sigma^alpha` with `0^0 = 1`.
fn sign_power_product(cond: &[Sign], exps: &[u8]) -> i64 {
    cond.iter()
        .zip(exps)
        .fold(Sign::Pos, |acc, (s, &e)| acc * s.pow(e as u64))
        .to_i8() as i64
}

/// Incremental sign-determination state: realizable conditions on the
/// polynomials processed so far, their root counts, and an adapted set of
/// exponent vectors whose matrix of sign values on the conditions is
/// invertible.
#[derive(Clone, Debug)]
pub struct SignDetState {
    max_support: usize,
    conditions: Vec<Vec<Sign>>,
    counts: Vec<u64>,
    ada: Vec<Vec<u8>>,
}

impl SignDetState {
    /// Starts from `TaQu(1;T)`, the number of real roots of `T`.
    pub fn start(
        max_support: usize,
        query: &mut impl FnMut(&[u8]) -> Result<i64, SignDetError>,
    ) -> Result<SignDetState, SignDetError> {
        let roots = query(&[])?;
        if roots < 0 {
            return Err(SignDetError::Inconsistent(format!(
                "negative root count {roots}"
            )));
        }
        let (conditions, counts, ada) = if roots == 0 {
            (Vec::new(), Vec::new(), Vec::new())
        } else {
            (vec![Vec::new()], vec![roots as u64], vec![Vec::new()])
        };
        Ok(SignDetState {
            max_support,
            conditions,
            counts,
            ada,
        })
    }

    pub fn conditions(&self) -> &[Vec<Sign>] {
        &self.conditions
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn adapted_set(&self) -> &[Vec<u8>] {
        &self.ada
    }

    /// Adds one polynomial to the list. `query` receives exponent vectors
    /// of length (current length + 1).
    pub fn extend(
        &self,
        query: &mut impl FnMut(&[u8]) -> Result<i64, SignDetError>,
    ) -> Result<SignDetState, SignDetError> {
        let m = self.conditions.len();
        if m == 0 {
            return Ok(SignDetState {
                max_support: self.max_support,
                conditions: Vec::new(),
                counts: Vec::new(),
                ada: Vec::new(),
            });
        }
        const BASE: [[i64; 3]; 3] = [[1, 1, 1], [0, 1, -1], [0, 1, 1]];
        let old: Vec<Vec<i64>> = self
            .ada
            .iter()
            .map(|a| {
                self.conditions
                    .iter()
                    .map(|c| sign_power_product(c, a))
                    .collect()
            })
            .collect();
        let n = 3 * m;
        let mut rows_exps = Vec::with_capacity(n);
        let mut rhs = Vec::with_capacity(n);
        for a in &self.ada {
            for e in 0..3u8 {
                let mut exps = a.clone();
                exps.push(e);
                let support = exps.iter().filter(|&&x| x > 0).count();
                if support > self.max_support {
                    return Err(SignDetError::ProductSetViolation { exps });
                }
                rhs.push(BigInt::from(query(&exps)?));
                rows_exps.push(exps);
            }
        }
        let full = SquareMatrix::from_fn(n, |r, c| {
            BigInt::from(old[r / 3][c / 3] * BASE[r % 3][c % 3])
        });
        let sol = solve_exact(&full, &rhs)
            .map_err(|e| SignDetError::Inconsistent(format!("sign system: {e}")))?;
        let mut kept = Vec::new();
        let mut conditions = Vec::new();
        let mut counts = Vec::new();
        for (col, x) in sol.iter().enumerate() {
            if !x.is_integer() || x.is_negative() {
                return Err(SignDetError::Inconsistent(format!(
                    "non-integral or negative count {x}"
                )));
            }
            if x.is_zero() {
                continue;
            }
            let mut cond = self.conditions[col / 3].clone();
            cond.push(Sign::ALL[col % 3]);
            conditions.push(cond);
            counts.push(x.to_integer().to_u64().unwrap_or(u64::MAX));
            kept.push(col);
        }
        let restricted: Vec<Vec<BigInt>> = (0..n)
            .map(|r| kept.iter().map(|&c| full.get(r, c).clone()).collect())
            .collect();
        let chosen = first_independent_rows(&restricted);
        if chosen.len() != kept.len() {
            return Err(SignDetError::Inconsistent("adapted set lost rank".into()));
        }
        let ada = chosen.into_iter().map(|r| rows_exps[r].clone()).collect();
        Ok(SignDetState {
            max_support: self.max_support,
            conditions,
            counts,
            ada,
        })
    }

    pub fn into_counts(self) -> SignCounts {
        SignCounts {
            entries: self.conditions.into_iter().zip(self.counts).collect(),
        }
    }
}

/// Determines the realizable sign conditions of `s` polynomials at the
/// roots of a degree-`p` polynomial, and their counts. `query(alpha)` must
/// return `TaQu(prod Q_i^alpha_i; T)`; it is only called with products of at
/// most `bit(p)` factors, each to power 1 or 2.
pub fn sign_determination(
    p: usize,
    s: usize,
    mut query: impl FnMut(&[u8]) -> Result<i64, SignDetError>,
) -> Result<SignCounts, SignDetError> {
    let mut state = SignDetState::start(bit(p), &mut query)?;
    for _ in 0..s {
        state = state.extend(&mut query)?;
    }
    Ok(state.into_counts())
}

/// A real root of `T` described by its Thom encoding.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RootInfo {
    /// Signs of `T', ..., T^(p'-1)` at the root.
    pub encoding: Vec<Sign>,
    /// Sign of the leading coefficient of `T`.
    pub lc_sign: Sign,
    /// Multiplicity of the root.
    pub multiplicity: usize,
    /// Sign of each extra polynomial at the root.
    pub extra_signs: Vec<Sign>,
}

impl RootInfo {
    /// Signs of `T, T', ..., T^(p'-1)` followed by the leading sign.
    pub fn extended(&self) -> Vec<Sign> {
        let mut v = Vec::with_capacity(self.encoding.len() + 2);
        v.push(Sign::Zero);
        v.extend_from_slice(&self.encoding);
        v.push(self.lc_sign);
        v
    }
}

/// Real roots of `T` in increasing order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RootTable {
    pub degree: usize,
    pub roots: Vec<RootInfo>,
}

/// Query identifier used by [`thom_table`]: exponents of `T', ..., T^(p'-1)`
/// and optionally `(extra index, exponent)`.
pub type ThomQuery<'a> = (&'a [u8], Option<(usize, u8)>);

/// Owned form of a [`ThomQuery`].
pub type QueryKey = (Vec<u8>, Option<(usize, u8)>);

/// Computes the Thom encodings of the real roots of a degree-`p` polynomial
/// `T` and the signs of `n_extras` further polynomials at each root.
///
/// The derivative stage is shared by all extras. `query` answers
/// `TaQu(prod (T^(h))^alpha_h * Q^e; T)`; `alpha` always has length `p - 1`.
pub fn thom_table(
    p: usize,
    lc_sign: Sign,
    n_extras: usize,
    mut query: impl FnMut(ThomQuery<'_>) -> Result<i64, SignDetError>,
) -> Result<RootTable, SignDetError> {
    if p == 0 {
        return Err(SignDetError::Query("base polynomial has degree 0".into()));
    }
    let b = bit(p);
    let pad = |e: &[u8]| {
        let mut full = e.to_vec();
        full.resize(p - 1, 0);
        full
    };
    let mut der_query = |e: &[u8]| query((&pad(e), None));
    let mut state = SignDetState::start(b, &mut der_query)?;
    for _ in 1..p {
        state = state.extend(&mut der_query)?;
    }
    if state.counts().iter().any(|&c| c != 1) {
        return Err(SignDetError::Inconsistent(
            "a Thom encoding is realized by several roots".into(),
        ));
    }
    let mut extra_signs: Vec<Vec<Sign>> = vec![Vec::with_capacity(n_extras); state.conditions().len()];
    for q in 0..n_extras {
        let mut qstate = state.clone();
        qstate.max_support = b;
        let mut extra_query = |e: &[u8]| {
            let (der, last) = e.split_at(e.len() - 1);
            if last[0] > 0 && der.iter().filter(|&&x| x > 0).count() + 1 > b {
                return Err(SignDetError::ProductSetViolation { exps: e.to_vec() });
            }
            let extra = (last[0] > 0).then_some((q, last[0]));
            query((&pad(der), extra))
        };
        let ext = qstate.extend(&mut extra_query)?;
        for (cond, _) in ext.conditions().iter().zip(ext.counts()) {
            let root = state
                .conditions()
                .iter()
                .position(|c| c[..] == cond[..cond.len() - 1])
                .expect("extension of a known condition");
            extra_signs[root].push(*cond.last().unwrap());
        }
        if extra_signs.iter().any(|v| v.len() != q + 1) {
            return Err(SignDetError::Inconsistent(
                "extra polynomial sign is not unique at a root".into(),
            ));
        }
    }
    let mut roots: Vec<RootInfo> = state
        .conditions()
        .iter()
        .zip(extra_signs)
        .map(|(enc, extra)| {
            let mut r = RootInfo {
                encoding: enc.clone(),
                lc_sign,
                multiplicity: 0,
                extra_signs: extra,
            };
            let ext = r.extended();
            r.multiplicity = (1..ext.len()).find(|&h| !ext[h].is_zero()).unwrap_or(p);
            r
        })
        .collect();
    let mut err = None;
    roots.sort_by(|a, b| {
        thom_compare(&a.extended(), &b.extended()).unwrap_or_else(|e| {
            err = Some(e);
            Ordering::Equal
        })
    });
    if let Some(e) = err {
        return Err(e);
    }
    Ok(RootTable { degree: p, roots })
}

/// Compares two points from their sign vectors on `P, P', ..., P^(p)`, the
/// last entry being the sign of `P^(p)` (a nonzero constant multiple of the
/// leading coefficient).
pub fn thom_compare(e1: &[Sign], e2: &[Sign]) -> Result<Ordering, SignDetError> {
    if e1.len() != e2.len() {
        return Err(SignDetError::Incomparable);
    }
    let q = match (0..e1.len()).rev().find(|&i| e1[i] != e2[i]) {
        None => return Ok(Ordering::Equal),
        Some(q) => q,
    };
    let next = e1.get(q + 1).copied().ok_or(SignDetError::Incomparable)?;
    if next != e2[q + 1] || next.is_zero() {
        return Err(SignDetError::Incomparable);
    }
    let less = (e1[q] < e2[q]) == (next == Sign::Pos);
    Ok(if less { Ordering::Less } else { Ordering::Greater })
}

/// Tarski queries of products of derivatives and extras, computed through
/// the numeric Hermite pipeline with memoization.
pub struct NumericQueries {
    var: usize,
    base: Vec<BigInt>,
    ders: Vec<MPoly>,
    extras: Vec<MPoly>,
    cache: HashMap<QueryKey, i64>,
    /// Every product queried, in order.
    pub log: Vec<QueryKey>,
}

impl NumericQueries {
    /// `t` must be univariate with integer coefficients.
    pub fn new(t: &MPoly, extras: &[MPoly]) -> Result<NumericQueries, SignDetError> {
        let var = t.top_var().max(extras.iter().map(MPoly::top_var).max().unwrap_or(0)).max(1);
        let base = t
            .int_coeffs_in(var)
            .ok_or_else(|| SignDetError::Query("base polynomial is not univariate".into()))?;
        let ders = t
            .der_list(var)
            .map_err(|e| SignDetError::Query(e.to_string()))?;
        Ok(NumericQueries {
            var,
            base,
            ders,
            extras: extras.to_vec(),
            cache: HashMap::new(),
            log: Vec::new(),
        })
    }

    pub fn degree(&self) -> usize {
        self.base.len() - 1
    }

    pub fn lc_sign(&self) -> Sign {
        Sign::of_int(self.base.last().unwrap())
    }

    pub fn answer(&mut self, der: &[u8], extra: Option<(usize, u8)>) -> Result<i64, SignDetError> {
        let key = (der.to_vec(), extra);
        self.log.push(key.clone());
        if let Some(&v) = self.cache.get(&key) {
            return Ok(v);
        }
        let mut a = product(&self.ders[1..], der);
        if let Some((q, e)) = extra {
            a = &a * &self.extras[q].pow(e as u32);
        }
        let coeffs = a
            .int_coeffs_in(self.var)
            .ok_or_else(|| SignDetError::Query("product is not univariate".into()))?;
        let v = tarski_query_ints(&self.base, &coeffs)?;
        self.cache.insert(key, v);
        Ok(v)
    }

    /// Tarski query of an arbitrary product of a polynomial list.
    pub fn answer_list(&mut self, polys: &[MPoly], exps: &[u8]) -> Result<i64, SignDetError> {
        let a = product(polys, exps);
        let coeffs = a
            .int_coeffs_in(self.var)
            .ok_or_else(|| SignDetError::Query("product is not univariate".into()))?;
        Ok(tarski_query_ints(&self.base, &coeffs)?)
    }
}

/// Sign determination for a univariate integer `t` and polynomial list,
/// using Hermite-based Tarski queries. Also returns every exponent vector
/// queried.
pub fn sign_determination_numeric(
    t: &MPoly,
    polys: &[MPoly],
) -> Result<(SignCounts, Vec<Vec<u8>>), SignDetError> {
    let mut q = NumericQueries::new(t, &[])?;
    let p = q.degree();
    let mut log = Vec::new();
    let counts = sign_determination(p, polys.len(), |e| {
        log.push(e.to_vec());
        q.answer_list(&polys[..e.len()], e)
    })?;
    Ok((counts, log))
}

/// Thom table of a univariate integer polynomial with numeric queries.
pub fn thom_table_numeric(t: &MPoly, extras: &[MPoly]) -> Result<RootTable, SignDetError> {
    let mut q = NumericQueries::new(t, extras)?;
    let (p, lc) = (q.degree(), q.lc_sign());
    thom_table(p, lc, extras.len(), |(der, extra)| q.answer(der, extra))
}

#[cfg(test)]
mod tests {
    use super::*;
    use Sign::*;

    fn mp(s: &str) -> MPoly {
        s.parse().unwrap()
    }

    #[test]
    fn bit_values() {
        assert_eq!(bit(0), 1);
        assert_eq!(bit(1), 1);
        assert_eq!(bit(2), 2);
        assert_eq!(bit(3), 2);
        assert_eq!(bit(4), 3);
        assert_eq!(bit(8), 4);
    }

    #[test]
    fn pder_examples() {
        let p2 = mp("x1^2 - 1");
        assert_eq!(pder(&p2, 1, 2), vec![mp("1"), mp("2*x1"), mp("4*x1^2")]);
        let p3 = mp("x1^3 - 3*x1");
        let got = pder(&p3, 1, 1);
        let want = vec![
            mp("1"),
            mp("6*x1"),
            mp("36*x1^2"),
            mp("3*x1^2 - 3"),
            mp("(3*x1^2 - 3)^2"),
        ];
        let mut g = got.clone();
        let mut w = want.clone();
        g.sort();
        w.sort();
        assert_eq!(g, w);
        for p in 1..=8usize {
            for j in 0..=4 {
                let n = pder_exponents(p - 1, j).len();
                assert_eq!(n as u128, pder_count(p - 1, j));
                assert!(n <= 2 * p.pow(j as u32));
            }
        }
        assert_eq!(pder_with(&p2, &mp("x1 + 1"), 1, 1).len(), 6);
    }

    #[test]
    fn sign_determination_examples() {
        let (c, _) = sign_determination_numeric(&mp("x1^2 - 1"), &[mp("2*x1")]).unwrap();
        assert_eq!(c.count(&[Neg]), 1);
        assert_eq!(c.count(&[Zero]), 0);
        assert_eq!(c.count(&[Pos]), 1);

        let (c, _) =
            sign_determination_numeric(&mp("x1^3 - 3*x1"), &[mp("3*x1^2 - 3"), mp("6*x1")]).unwrap();
        assert_eq!(c.count(&[Pos, Neg]), 1);
        assert_eq!(c.count(&[Neg, Zero]), 1);
        assert_eq!(c.count(&[Pos, Pos]), 1);
        assert_eq!(c.total(), 3);

        let (c, _) = sign_determination_numeric(&mp("x1^2 + 1"), &[mp("x1")]).unwrap();
        assert!(c.entries.is_empty());
    }

    #[test]
    fn linear_system_matches_hand_example() {
        // y^2 - 1 with Q = 2y: TaQu(1) = 2, TaQu(2y) = 0, TaQu(4y^2) = 2
        let answers: HashMap<Vec<u8>, i64> =
            [(vec![], 2), (vec![0], 2), (vec![1], 0), (vec![2], 2)].into_iter().collect();
        let c = sign_determination(2, 1, |e| Ok(answers[e])).unwrap();
        assert_eq!(c.entries, vec![(vec![Pos], 1), (vec![Neg], 1)]);
    }

    #[test]
    fn inconsistent_queries_are_reported() {
        let c = sign_determination(2, 1, |e| {
            Ok(match e {
                [] | [0] => 2,
                [1] => 1,
                _ => 0,
            })
        });
        assert!(matches!(c, Err(SignDetError::Inconsistent(_))));
        let c = sign_determination(2, 0, |_| Ok(-1));
        assert!(matches!(c, Err(SignDetError::Inconsistent(_))));
    }

    #[test]
    fn thom_table_examples() {
        let t = thom_table_numeric(&mp("x1^2 - 1"), &[mp("x1 + 2")]).unwrap();
        assert_eq!(t.roots.len(), 2);
        assert_eq!(t.roots[0].encoding, vec![Neg]);
        assert_eq!(t.roots[1].encoding, vec![Pos]);
        assert!(t.roots.iter().all(|r| r.extra_signs == vec![Pos]));

        let t = thom_table_numeric(&mp("x1^2 - 2*x1 + 1"), &[]).unwrap();
        assert_eq!(t.roots.len(), 1);
        assert_eq!(t.roots[0].encoding, vec![Zero]);
        assert_eq!(t.roots[0].multiplicity, 2);

        let t = thom_table_numeric(&mp("x1^3 - 3*x1"), &[mp("x1")]).unwrap();
        let signs: Vec<Sign> = t.roots.iter().map(|r| r.extra_signs[0]).collect();
        assert_eq!(signs, vec![Neg, Zero, Pos]);
        assert!(t.roots.iter().all(|r| r.multiplicity == 1));
    }

    #[test]
    fn thom_compare_examples() {
        assert_eq!(
            thom_compare(&[Zero, Pos, Neg, Pos], &[Zero, Neg, Zero, Pos]).unwrap(),
            Ordering::Less
        );
        assert_eq!(
            thom_compare(&[Zero, Neg, Zero, Pos], &[Zero, Pos, Pos, Pos]).unwrap(),
            Ordering::Less
        );
        assert_eq!(
            thom_compare(&[Zero, Pos, Pos], &[Zero, Pos, Pos]).unwrap(),
            Ordering::Equal
        );
        assert_eq!(
            thom_compare(&[Zero, Neg, Zero], &[Zero, Pos, Zero]),
            Err(SignDetError::Incomparable)
        );
    }
}
