//! Division-free principal minors and exact rational linear algebra.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::poly::MPoly;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LinalgError {
    #[error("matrix is singular")]
    Singular,
    #[error("dimension mismatch: {0}")]
    Dimension(String),
}

/// Commutative ring operations, without division.
pub trait Ring: Clone + PartialEq + fmt::Debug + Send + Sync + Zero + One {
    fn plus(&self, o: &Self) -> Self;
    fn minus(&self, o: &Self) -> Self;
    fn times(&self, o: &Self) -> Self;
    fn negate(&self) -> Self;
    fn from_i64(v: i64) -> Self;
}

impl Ring for BigInt {
    fn plus(&self, o: &Self) -> Self {
        self + o
    }
    fn minus(&self, o: &Self) -> Self {
        self - o
    }
    fn times(&self, o: &Self) -> Self {
        self * o
    }
    fn negate(&self) -> Self {
        -self
    }
    fn from_i64(v: i64) -> Self {
        BigInt::from(v)
    }
}

impl Ring for BigRational {
    fn plus(&self, o: &Self) -> Self {
        self + o
    }
    fn minus(&self, o: &Self) -> Self {
        self - o
    }
    fn times(&self, o: &Self) -> Self {
        self * o
    }
    fn negate(&self) -> Self {
        -self
    }
    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(v.into())
    }
}

impl Zero for MPoly {
    fn zero() -> Self {
        MPoly::zero()
    }
    fn is_zero(&self) -> bool {
        MPoly::is_zero(self)
    }
}

impl One for MPoly {
    fn one() -> Self {
        MPoly::one()
    }
}

impl Ring for MPoly {
    fn plus(&self, o: &Self) -> Self {
        self + o
    }
    fn minus(&self, o: &Self) -> Self {
        self - o
    }
    fn times(&self, o: &Self) -> Self {
        self * o
    }
    fn negate(&self) -> Self {
        -self
    }
    fn from_i64(v: i64) -> Self {
        MPoly::constant(v)
    }
}

/// Dense square matrix, row-major.
#[derive(Clone, PartialEq, Debug)]
pub struct SquareMatrix<R> {
    n: usize,
    data: Vec<R>,
}

impl<R: Ring> SquareMatrix<R> {
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> R) -> SquareMatrix<R> {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        SquareMatrix { n, data }
    }

    pub fn from_rows(rows: Vec<Vec<R>>) -> Result<SquareMatrix<R>, LinalgError> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(LinalgError::Dimension("rows must all have length n".into()));
        }
        Ok(SquareMatrix {
            n,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn identity(n: usize) -> SquareMatrix<R> {
        SquareMatrix::from_fn(n, |i, j| if i == j { R::one() } else { R::zero() })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &R {
        &self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: R) {
        self.data[i * self.n + j] = v;
    }

    pub fn mul(&self, o: &SquareMatrix<R>) -> SquareMatrix<R> {
        assert_eq!(self.n, o.n);
        SquareMatrix::from_fn(self.n, |i, j| {
            (0..self.n).fold(R::zero(), |acc, k| {
                let a = self.get(i, k);
                if a.is_zero() {
                    acc
                } else {
                    acc.plus(&a.times(o.get(k, j)))
                }
            })
        })
    }

    pub fn trace(&self) -> R {
        (0..self.n).fold(R::zero(), |acc, i| acc.plus(self.get(i, i)))
    }

    pub fn map<S: Ring>(&self, f: impl Fn(&R) -> S) -> SquareMatrix<S> {
        SquareMatrix {
            n: self.n,
            data: self.data.iter().map(f).collect(),
        }
    }
}

/// Determinants of the leading principal blocks of sizes `1..=n`, computed
/// with Berkowitz's division-free algorithm.
pub fn berkowitz_principal_minors<R: Ring>(m: &SquareMatrix<R>) -> Vec<R> {
    let n = m.dim();
    let mut minors = Vec::with_capacity(n);
    // characteristic polynomial of the current leading block, highest power first
    let mut chi = vec![R::one()];
    for r in 0..n {
        // c = [1, -a_rr, -R S, -R A S, ..., -R A^{r-1} S]
        let mut c = Vec::with_capacity(r + 2);
        c.push(R::one());
        c.push(m.get(r, r).negate());
        let mut v: Vec<R> = (0..r).map(|i| m.get(i, r).clone()).collect();
        for k in 0..r {
            let dot = (0..r).fold(R::zero(), |acc, j| acc.plus(&m.get(r, j).times(&v[j])));
            c.push(dot.negate());
            if k + 1 < r {
                v = (0..r)
                    .map(|i| (0..r).fold(R::zero(), |acc, j| acc.plus(&m.get(i, j).times(&v[j]))))
                    .collect();
            }
        }
        let mut next = vec![R::zero(); r + 2];
        for (i, slot) in next.iter_mut().enumerate() {
            for (j, x) in chi.iter().enumerate().take(i.min(r) + 1) {
                *slot = slot.plus(&c[i - j].times(x));
            }
        }
        chi = next;
        let det = if (r + 1) % 2 == 1 {
            chi[r + 1].negate()
        } else {
            chi[r + 1].clone()
        };
        minors.push(det);
    }
    minors
}

/// Solves `A x = b` exactly over the rationals.
pub fn solve_exact(a: &SquareMatrix<BigInt>, b: &[BigInt]) -> Result<Vec<BigRational>, LinalgError> {
    let n = a.dim();
    if b.len() != n {
        return Err(LinalgError::Dimension(format!(
            "right-hand side has length {}, expected {n}",
            b.len()
        )));
    }
    let mut rows: Vec<Vec<BigRational>> = (0..n)
        .map(|i| {
            let mut row: Vec<BigRational> = (0..n)
                .map(|j| BigRational::from_integer(a.get(i, j).clone()))
                .collect();
            row.push(BigRational::from_integer(b[i].clone()));
            row
        })
        .collect();
    for col in 0..n {
        let piv = (col..n)
            .find(|&r| !rows[r][col].is_zero())
            .ok_or(LinalgError::Singular)?;
        rows.swap(col, piv);
        let inv = rows[col][col].recip();
        for x in rows[col].iter_mut() {
            *x *= &inv;
        }
        let pivot_row = rows[col].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r == col || row[col].is_zero() {
                continue;
            }
            let f = row[col].clone();
            for (x, p) in row.iter_mut().zip(&pivot_row) {
                *x -= &f * p;
            }
        }
    }
    Ok(rows.into_iter().map(|mut r| r.pop().unwrap()).collect())
}

/// Incremental row-echelon basis over the rationals.
#[derive(Default)]
struct EchelonBasis {
    rows: Vec<(usize, Vec<BigRational>)>,
}

impl EchelonBasis {
    /// Adds `row` if it is independent of the rows seen so far.
    fn insert(&mut self, row: &[BigInt]) -> bool {
        let mut v: Vec<BigRational> = row
            .iter()
            .map(|x| BigRational::from_integer(x.clone()))
            .collect();
        for (pc, b) in &self.rows {
            if !v[*pc].is_zero() {
                let f = v[*pc].clone();
                for (x, y) in v.iter_mut().zip(b) {
                    *x -= &f * y;
                }
            }
        }
        match v.iter().position(|x| !x.is_zero()) {
            None => false,
            Some(pc) => {
                let inv = v[pc].recip();
                for x in v.iter_mut() {
                    *x *= &inv;
                }
                for (_, b) in self.rows.iter_mut() {
                    if !b[pc].is_zero() {
                        let f = b[pc].clone();
                        for (x, y) in b.iter_mut().zip(&v) {
                            *x -= &f * y;
                        }
                    }
                }
                self.rows.push((pc, v));
                true
            }
        }
    }
}

/// Rank over the rationals of an integer matrix given by rows.
pub fn rank_exact(rows: &[Vec<BigInt>]) -> usize {
    let mut basis = EchelonBasis::default();
    rows.iter().filter(|r| basis.insert(r)).count()
}

/// Indices of the lexicographically first maximal set of linearly
/// independent rows: row `i` is kept iff it raises the rank of the kept rows.
pub fn first_independent_rows(rows: &[Vec<BigInt>]) -> Vec<usize> {
    let mut basis = EchelonBasis::default();
    (0..rows.len()).filter(|&i| basis.insert(&rows[i])).collect()
}
