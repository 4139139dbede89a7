//! Test-side oracles and generators, written independently of the library
//! algorithms they check.

#![allow(dead_code)]

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use rcfqe::oracle::isolate_roots;
use rcfqe::{MPoly, QPoly, Sign};

pub fn rat(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

pub fn ints(v: &[i64]) -> Vec<BigInt> {
    v.iter().map(|&x| BigInt::from(x)).collect()
}

/// Univariate integer polynomial in `x1`.
pub fn upoly(c: &[i64]) -> MPoly {
    MPoly::from_ints(1, c)
}

pub fn qpoly(c: &[i64]) -> QPoly {
    QPoly::from_ints(c)
}

/// Coefficients of degree exactly `deg` with entries in `[-r, r]`.
pub fn random_coeffs(rng: &mut ChaCha8Rng, deg: usize, r: i64) -> Vec<i64> {
    let mut c: Vec<i64> = (0..=deg).map(|_| rng.gen_range(-r..=r)).collect();
    while c[deg] == 0 {
        c[deg] = rng.gen_range(-r..=r);
    }
    c
}

pub fn mul_coeffs(a: &[i64], b: &[i64]) -> Vec<i64> {
    let mut out = vec![0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// A polynomial of degree `1..=max_deg` with many real roots: a product of
/// linear factors with small integer or half-integer roots (repeats
/// allowed), sometimes times an irreducible quadratic or `y^2 - 2`.
pub fn rooty_coeffs(rng: &mut ChaCha8Rng, max_deg: usize) -> Vec<i64> {
    let deg = rng.gen_range(1..=max_deg);
    let mut c = vec![rng.gen_range(1..=3) * if rng.gen_bool(0.5) { 1 } else { -1 }];
    let mut d = 0;
    while d < deg {
        if deg - d >= 2 && rng.gen_bool(0.3) {
            let q = match rng.gen_range(0..3) {
                0 => vec![-2, 0, 1],
                1 => vec![rng.gen_range(1..=4), rng.gen_range(-1..=1), 1],
                _ => vec![-3, 0, 1],
            };
            c = mul_coeffs(&c, &q);
            d += 2;
        } else {
            let f = if rng.gen_bool(0.7) {
                vec![-rng.gen_range(-3..=3), 1]
            } else {
                vec![-rng.gen_range(-5..=5), 2]
            };
            c = mul_coeffs(&c, &f);
            d += 1;
        }
    }
    c
}

/// Either a uniformly random or a root-rich polynomial of degree `1..=max_deg`.
pub fn mixed_coeffs(rng: &mut ChaCha8Rng, max_deg: usize) -> Vec<i64> {
    if rng.gen_bool(0.5) {
        let deg = rng.gen_range(1..=max_deg);
        random_coeffs(rng, deg, 20)
    } else {
        rooty_coeffs(rng, max_deg)
    }
}

pub fn derivative_coeffs(c: &[i64]) -> Vec<i64> {
    c.iter().enumerate().skip(1).map(|(i, x)| i as i64 * x).collect()
}

/// Sign conditions of `qs` at the real roots of `p`, with multiplicity
/// counts, from exact root isolation.
pub fn brute_sign_counts(p: &QPoly, qs: &[QPoly]) -> BTreeMap<Vec<Sign>, u64> {
    let mut iso = isolate_roots(p).unwrap();
    let mut out = BTreeMap::new();
    for r in 0..iso.len() {
        let cond: Vec<Sign> = qs.iter().map(|q| iso.sign_at_root(r, q)).collect();
        *out.entry(cond).or_insert(0) += 1;
    }
    out
}

/// Signs of all derivatives `p', ..., p^(deg-1)` at each real root of `p`,
/// roots in increasing order.
pub fn numeric_thom_encodings(c: &[i64]) -> Vec<Vec<Sign>> {
    let p = qpoly(c);
    let deg = c.len() - 1;
    let mut ders = Vec::new();
    let mut cur = c.to_vec();
    for _ in 1..deg {
        cur = derivative_coeffs(&cur);
        ders.push(qpoly(&cur));
    }
    let mut iso = isolate_roots(&p).unwrap();
    (0..iso.len())
        .map(|r| ders.iter().map(|d| iso.sign_at_root(r, d)).collect())
        .collect()
}

/// Multiplicity of each real root of `c`, roots in increasing order.
pub fn numeric_multiplicities(c: &[i64]) -> Vec<usize> {
    let p = qpoly(c);
    let mut iso = isolate_roots(&p).unwrap();
    (0..iso.len())
        .map(|r| {
            let mut cur = c.to_vec();
            let mut m = 0;
            while iso.sign_at_root(r, &qpoly(&cur)).is_zero() {
                m += 1;
                cur = derivative_coeffs(&cur);
            }
            m
        })
        .collect()
}

/// Determinant by Gaussian elimination over the rationals.
pub fn det_rational(m: &[Vec<BigRational>]) -> BigRational {
    let n = m.len();
    let mut a: Vec<Vec<BigRational>> = m.to_vec();
    let mut det = BigRational::one();
    for col in 0..n {
        let Some(piv) = (col..n).find(|&r| !a[r][col].is_zero()) else {
            return BigRational::zero();
        };
        if piv != col {
            a.swap(piv, col);
            det = -det;
        }
        det *= &a[col][col];
        for r in col + 1..n {
            if a[r][col].is_zero() {
                continue;
            }
            let f = &a[r][col] / &a[col][col];
            let (top, rest) = a.split_at_mut(r);
            for (x, y) in rest[0][col..].iter_mut().zip(&top[col][col..]) {
                *x -= &f * y;
            }
        }
    }
    det
}

/// Determinant by cofactor expansion along the first row.
pub fn det_cofactor(m: &[Vec<BigInt>]) -> BigInt {
    let n = m.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut acc = BigInt::zero();
    for j in 0..n {
        if m[0][j].is_zero() {
            continue;
        }
        let minor: Vec<Vec<BigInt>> = m[1..]
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter(|(c, _)| *c != j)
                    .map(|(_, x)| x.clone())
                    .collect()
            })
            .collect();
        let term = &m[0][j] * det_cofactor(&minor);
        if j % 2 == 0 {
            acc += term;
        } else {
            acc -= term;
        }
    }
    acc
}

/// Power sums `N_0..=N_max` of the complex roots of `t` (lowest
/// coefficient first), by Newton's identities.
pub fn power_sums(t: &[BigRational], max: usize) -> Vec<BigRational> {
    let p = t.len() - 1;
    let b: Vec<BigRational> = t.iter().map(|c| c / &t[p]).collect();
    let mut s = vec![rat(p as i64)];
    for m in 1..=max {
        let mut acc = BigRational::zero();
        for i in 1..=m.min(p) {
            let e = &b[p - i];
            if i == m {
                acc += e * rat(m as i64);
            } else {
                acc += e * &s[m - i];
            }
        }
        s.push(-acc);
    }
    s
}

/// Leading principal minors of the unscaled Hermite matrix
/// `[sum_h a_h N_{h+i+j}]`, listed like `HMi`: entry `j` has size `p - j`.
pub fn hermite_minors_unscaled(t: &[BigRational], a: &[BigRational]) -> Vec<BigRational> {
    let p = t.len() - 1;
    let n = power_sums(t, a.len() + 2 * p);
    let her: Vec<Vec<BigRational>> = (0..p)
        .map(|i| {
            (0..p)
                .map(|j| {
                    a.iter()
                        .enumerate()
                        .fold(BigRational::zero(), |acc, (h, ah)| acc + ah * &n[h + i + j])
                })
                .collect()
        })
        .collect();
    (0..p)
        .map(|j| {
            let size = p - j;
            let block: Vec<Vec<BigRational>> = her[..size].iter().map(|r| r[..size].to_vec()).collect();
            det_rational(&block)
        })
        .collect()
}

/// Ordered sign vectors of `g` along the real line: an interval, then
/// alternately a root of the product and the following interval.
pub fn numeric_line_signs(g: &[QPoly]) -> Vec<Vec<Sign>> {
    let product = g
        .iter()
        .filter(|u| u.degree().unwrap_or(0) > 0)
        .fold(QPoly::constant(BigRational::one()), |acc, u| &acc * u);
    let mut iso = isolate_roots(&product).unwrap();
    let at = |x: &BigRational| -> Vec<Sign> { g.iter().map(|u| u.sign_at(x)).collect() };
    if iso.is_empty() {
        return vec![at(&rat(0))];
    }
    let mut out = vec![at(&(&iso.roots[0].lo - rat(1)))];
    for r in 0..iso.len() {
        out.push(g.iter().map(|u| iso.sign_at_root(r, u)).collect());
        let right = iso.roots[r].hi.clone();
        let gap = match iso.roots.get(r + 1) {
            Some(next) => (&right + &next.lo) / rat(2),
            None => right + rat(1),
        };
        out.push(at(&gap));
    }
    out
}

/// Signs of `polys` at a rational point.
pub fn signs_at(polys: &[MPoly], pt: &[BigRational]) -> Vec<Sign> {
    polys
        .iter()
        .map(|p| Sign::of_rat(&p.eval(pt).unwrap()))
        .collect()
}
