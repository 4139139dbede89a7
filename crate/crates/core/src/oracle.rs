//! Independent numeric checks: Sturm sequences, exact root isolation,
//! one-quantifier decision by sampling, and staged verification of a QE
//! result.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::formula::{Quantifier, QfResult, Qf, Relation};
use crate::poly::{MPoly, QPoly};
use crate::sign::Sign;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("the polynomial is zero")]
    ZeroPolynomial,
}

fn rat(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

/// Monic gcd; zero only if both inputs are zero.
pub fn gcd(a: &QPoly, b: &QPoly) -> QPoly {
    let (mut a, mut b) = (a.clone(), b.clone());
    while !b.is_zero() {
        let r = a.rem(&b);
        a = b;
        b = r;
    }
    if a.is_zero() {
        a
    } else {
        a.monic()
    }
}

/// Square-free part, monic.
pub fn square_free(p: &QPoly) -> QPoly {
    let g = gcd(p, &p.derivative());
    p.div_rem(&g).0.monic()
}

/// Signed remainder sequence of `a` and `b`.
fn signed_remainders(a: &QPoly, b: &QPoly) -> Vec<QPoly> {
    let mut seq = vec![a.clone()];
    let (mut x, mut y) = (a.clone(), b.clone());
    while !y.is_zero() {
        seq.push(y.clone());
        let r = -&x.rem(&y);
        x = y;
        y = r;
    }
    seq
}

fn variations(signs: impl Iterator<Item = Sign>) -> i64 {
    let mut last = Sign::Zero;
    let mut v = 0;
    for s in signs.filter(|s| !s.is_zero()) {
        if !last.is_zero() && s != last {
            v += 1;
        }
        last = s;
    }
    v
}

/// `TaQu(Q; P) = #{P = 0, Q > 0} - #{P = 0, Q < 0}` by the Sturm-Tarski
/// theorem on the signed remainder sequence of `P` and `P' Q`.
pub fn sturm_tarski(p: &QPoly, q: &QPoly) -> Result<i64, OracleError> {
    if p.is_zero() {
        return Err(OracleError::ZeroPolynomial);
    }
    if q.is_zero() {
        return Ok(0);
    }
    let seq = signed_remainders(p, &(&p.derivative() * q));
    let lo = variations(seq.iter().map(QPoly::sign_at_neg_inf));
    let hi = variations(seq.iter().map(QPoly::sign_at_pos_inf));
    Ok(lo - hi)
}

/// Sturm chain of a square-free polynomial.
#[derive(Debug, Clone)]
struct SturmChain(Vec<QPoly>);

impl SturmChain {
    fn new(sqf: &QPoly) -> SturmChain {
        SturmChain(signed_remainders(sqf, &sqf.derivative()))
    }

    fn var_at(&self, x: &BigRational) -> i64 {
        variations(self.0.iter().map(|p| p.sign_at(x)))
    }

    /// Distinct roots in `(a, b]`.
    fn count(&self, a: &BigRational, b: &BigRational) -> i64 {
        self.var_at(a) - self.var_at(b)
    }
}

/// An isolating interval `(lo, hi)` with a single root strictly inside and
/// no root at either end, or an exact root `lo = hi`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Interval {
    #[serde(serialize_with = "ser_rat")]
    pub lo: BigRational,
    #[serde(serialize_with = "ser_rat")]
    pub hi: BigRational,
}

fn ser_rat<S: serde::Serializer>(x: &BigRational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&x.to_string())
}

impl Interval {
    pub fn is_exact(&self) -> bool {
        self.lo == self.hi
    }

    pub fn width(&self) -> BigRational {
        &self.hi - &self.lo
    }
}

/// The real roots of a polynomial, isolated and sorted.
#[derive(Debug, Clone)]
pub struct RootIsolation {
    pub sqf: QPoly,
    chain: SturmChain,
    pub roots: Vec<Interval>,
}

/// `1 + max |a_i / a_n|`, rounded up to an integer.
fn cauchy_bound(p: &QPoly) -> BigRational {
    let lc = p.lc();
    let m = p.coeffs()[..p.coeffs().len() - 1]
        .iter()
        .map(|c| (c / &lc).abs())
        .fold(BigRational::zero(), |a, b| if b > a { b } else { a });
    (m + BigRational::one()).ceil()
}

/// Isolates the real roots of `p`.
pub fn isolate_roots(p: &QPoly) -> Result<RootIsolation, OracleError> {
    if p.is_zero() {
        return Err(OracleError::ZeroPolynomial);
    }
    let sqf = square_free(p);
    let chain = SturmChain::new(&sqf);
    let mut roots = Vec::new();
    if sqf.degree() == Some(1) {
        let x = -&sqf.coeffs()[0] / &sqf.coeffs()[1];
        roots.push(Interval { lo: x.clone(), hi: x });
    } else if sqf.degree().unwrap_or(0) > 1 {
        let b = cauchy_bound(&sqf);
        // open intervals; an endpoint may be a root found at an earlier split
        let open_count = |lo: &BigRational, hi: &BigRational| {
            chain.count(lo, hi) - i64::from(sqf.sign_at(hi).is_zero())
        };
        let mut stack = vec![(-b.clone(), b)];
        // depth-first, right half pushed first so roots come out ascending
        while let Some((lo, hi)) = stack.pop() {
            if lo == hi {
                roots.push(Interval { lo, hi });
                continue;
            }
            let c = open_count(&lo, &hi);
            if c == 0 {
                continue;
            }
            let mid = (&lo + &hi) / rat(2);
            let mid_root = sqf.sign_at(&mid).is_zero();
            if c == 1 && !mid_root {
                let (mut lo, mut hi) = (lo, hi);
                while sqf.sign_at(&lo).is_zero() || sqf.sign_at(&hi).is_zero() {
                    let m = (&lo + &hi) / rat(2);
                    if sqf.sign_at(&m).is_zero() {
                        lo = m.clone();
                        hi = m;
                        break;
                    }
                    if open_count(&lo, &m) == 1 {
                        hi = m;
                    } else {
                        lo = m;
                    }
                }
                roots.push(Interval { lo, hi });
                continue;
            }
            stack.push((mid.clone(), hi));
            if mid_root {
                stack.push((mid.clone(), mid.clone()));
            }
            stack.push((lo, mid));
        }
    }
    Ok(RootIsolation { sqf, chain, roots })
}

impl RootIsolation {
    pub fn len(&self) -> usize {
        self.roots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }

    /// Halves the interval of root `i` once, landing on the root exactly if
    /// the midpoint is one.
    fn bisect(&mut self, i: usize) {
        let iv = &self.roots[i];
        if iv.is_exact() {
            return;
        }
        let mid = (&iv.lo + &iv.hi) / rat(2);
        let s = self.sqf.sign_at(&mid);
        let slo = self.sqf.sign_at(&iv.lo);
        let iv = &mut self.roots[i];
        if s.is_zero() {
            iv.lo = mid.clone();
            iv.hi = mid;
        } else if s == slo {
            iv.lo = mid;
        } else {
            iv.hi = mid;
        }
    }

    /// Shrinks root `i`'s interval below `width`.
    pub fn refine(&mut self, i: usize, width: &BigRational) {
        while !self.roots[i].is_exact() && self.roots[i].width() >= *width {
            self.bisect(i);
        }
    }

    /// Sign of `q` at root `i`, certified without approximation.
    pub fn sign_at_root(&mut self, i: usize, q: &QPoly) -> Sign {
        if self.roots[i].is_exact() {
            return q.sign_at(&self.roots[i].lo);
        }
        if q.is_zero() {
            return Sign::Zero;
        }
        // g divides the square-free part, so it vanishes at the root iff it
        // changes sign across the interval
        let g = gcd(&self.sqf, q);
        if g.degree().unwrap_or(0) > 0 {
            let iv = &self.roots[i];
            if g.sign_at(&iv.lo) * g.sign_at(&iv.hi) == Sign::Neg {
                return Sign::Zero;
            }
        }
        let qs = SturmChain::new(&square_free(q));
        loop {
            let iv = &self.roots[i];
            if iv.is_exact() {
                return q.sign_at(&iv.lo);
            }
            if !q.sign_at(&iv.lo).is_zero() && qs.count(&iv.lo, &iv.hi) == 0 {
                return q.sign_at(&iv.lo);
            }
            self.bisect(i);
        }
    }

    /// Distinct roots of the isolated polynomial in `(a, b]`.
    pub fn count_in(&self, a: &BigRational, b: &BigRational) -> i64 {
        self.chain.count(a, b)
    }
}

/// A point of the line at which a quantifier-free formula is evaluated.
#[derive(Debug, Clone)]
enum Sample {
    Rational(BigRational),
    Root(usize),
}

/// Decides `Q y. matrix(point, y)` where `y` is the variable after `point`.
///
/// The samples are every real root of the specialized atom polynomials and
/// a rational point in each gap between them; truth is constant on the gaps.
pub fn decide_one_quantifier(point: &[BigRational], q: Quantifier, matrix: &Qf) -> bool {
    let mut polys: Vec<MPoly> = Vec::new();
    for a in matrix.atoms() {
        if !polys.contains(&a.poly) {
            polys.push(a.poly.clone());
        }
    }
    let uni: Vec<QPoly> = polys
        .iter()
        .map(|p| p.specialize(point).expect("atom variables within the point"))
        .collect();
    let product = uni
        .iter()
        .filter(|u| u.degree().unwrap_or(0) > 0)
        .fold(QPoly::constant(BigRational::one()), |acc, u| &acc * u);
    let mut iso = isolate_roots(&product).expect("nonzero product");

    let mut samples = Vec::with_capacity(2 * iso.len() + 1);
    if iso.is_empty() {
        samples.push(Sample::Rational(BigRational::zero()));
    } else {
        samples.push(Sample::Rational(&iso.roots[0].lo - rat(1)));
        for r in 0..iso.len() {
            samples.push(Sample::Root(r));
            let right = &iso.roots[r].hi;
            match iso.roots.get(r + 1) {
                Some(next) => samples.push(Sample::Rational((right + &next.lo) / rat(2))),
                None => samples.push(Sample::Rational(right + rat(1))),
            }
        }
    }

    let mut eval_at = |s: &Sample| -> bool {
        let signs: Vec<Sign> = uni
            .iter()
            .map(|u| match s {
                Sample::Rational(x) => u.sign_at(x),
                Sample::Root(r) => iso.sign_at_root(*r, u),
            })
            .collect();
        matrix
            .eval(&|p| polys.iter().position(|x| x == p).map(|i| signs[i]))
            .expect("every atom polynomial was specialized")
    };
    match q {
        Quantifier::Exists => samples.iter().any(&mut eval_at),
        Quantifier::Forall => samples.iter().all(&mut eval_at),
    }
}

/// `Qf` for the nodes of `result` that are true at `level`:
/// a disjunction of sign conditions on the non-constant entries of
/// `Elim_level`. With `negate`, the complement among realizable nodes.
pub fn level_formula(result: &QfResult, level: usize, negate: bool) -> Qf {
    if level == result.formula.k && !negate {
        return result.formula.matrix.clone();
    }
    let fam = result.chain.level(level);
    let vars = fam.variable_entries();
    let mut out = Qf::False;
    for (n, t) in result.truth[level].iter().enumerate() {
        let Some(t) = t else { continue };
        if *t == negate {
            continue;
        }
        let cond = &result.tree.levels[level][n].condition;
        let conj = vars.iter().fold(Qf::True, |acc, &e| {
            let atom = Qf::Atom(crate::formula::Atom {
                poly: fam.entries[e].poly.clone(),
                rel: Relation::for_sign(cond.0[e]),
            });
            match acc {
                Qf::True => atom,
                acc => Qf::And(Box::new(acc), Box::new(atom)),
            }
        });
        out = match out {
            Qf::False => conj,
            out => Qf::Or(Box::new(out), Box::new(conj)),
        };
    }
    out
}

/// Deterministic rational coordinates: small integers half of the time,
/// otherwise fractions with denominators up to 4.
pub fn sample_point(rng: &mut ChaCha8Rng, dim: usize) -> Vec<BigRational> {
    (0..dim)
        .map(|_| {
            if rng.gen_bool(0.5) {
                rat(rng.gen_range(-3..=3))
            } else {
                let d: i64 = rng.gen_range(1..=4);
                let n: i64 = rng.gen_range(-12..=12);
                BigRational::new(BigInt::from(n), BigInt::from(d))
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StageReport {
    pub quantifier: &'static str,
    /// Index of the bound variable.
    pub variable: usize,
    pub samples: usize,
    pub mismatches: usize,
    /// The first point where the two sides disagreed.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first_mismatch: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VerifyReport {
    pub stages: Vec<StageReport>,
}

impl VerifyReport {
    pub fn mismatches(&self) -> usize {
        self.stages.iter().map(|s| s.mismatches).sum()
    }

    pub fn passed(&self) -> bool {
        self.mismatches() == 0
    }
}

/// Checks a QE result one quantifier at a time, innermost first.
///
/// Stage `j` (for `j` from `k - 1` down to the free level) compares, at
/// sampled `u` in `Q^j`, the level-`j` formula of the result against the
/// oracle applied to `Qu_{j+1} x_{j+1}` and the level-`j+1` formula. Sentence
/// stages have a single point.
pub fn verify_staged(result: &QfResult, samples: usize, seed: u64) -> VerifyReport {
    verify_staged_with(result, samples, seed, false)
}

/// As [`verify_staged`]; `corrupt` replaces the free-level true set by its
/// complement, which must be detected.
pub fn verify_staged_with(result: &QfResult, samples: usize, seed: u64, corrupt: bool) -> VerifyReport {
    let phi = &result.formula;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut stages = Vec::new();
    for j in (phi.free..phi.k).rev() {
        let q = phi.quantifiers[j - phi.free];
        let inner = level_formula(result, j + 1, false);
        let outer = level_formula(result, j, corrupt && j == phi.free);
        let n = if j == 0 { 1 } else { samples };
        let points: Vec<Vec<BigRational>> = (0..n).map(|_| sample_point(&mut rng, j)).collect();
        let verdicts: Vec<bool> = points
            .par_iter()
            .map(|pt| {
                let expected = decide_one_quantifier(pt, q, &inner);
                let got = outer
                    .eval(&|p| p.eval(pt).ok().map(|v| Sign::of_rat(&v)))
                    .expect("level polynomials live in the sampled variables");
                expected == got
            })
            .collect();
        let mismatches = verdicts.iter().filter(|ok| !**ok).count();
        let first_mismatch = verdicts
            .iter()
            .position(|ok| !ok)
            .map(|i| points[i].iter().map(|x| x.to_string()).collect());
        stages.push(StageReport {
            quantifier: q.keyword(),
            variable: j + 1,
            samples: n,
            mismatches,
            first_mismatch,
        });
    }
    VerifyReport { stages }
}
