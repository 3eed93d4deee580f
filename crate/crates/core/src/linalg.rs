//! Exact integer and rational elimination on small dense matrices.
//!
//! Vectors are rows. All work happens on `BigInt`; results are converted back
//! to `i64` with an explicit overflow check.

use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::{Error, IntVec, Result};

pub(crate) type BigVec = Vec<BigInt>;

pub(crate) fn to_big(v: &[i64]) -> BigVec {
    v.iter().map(|&x| BigInt::from(x)).collect()
}

pub(crate) fn to_i64(v: &[BigInt]) -> Result<IntVec> {
    v.iter().map(|x| x.to_i64().ok_or(Error::Overflow)).collect()
}

pub(crate) fn big_to_i64(x: &BigInt) -> Result<i64> {
    x.to_i64().ok_or(Error::Overflow)
}

pub(crate) fn dot(a: &[i64], b: &[i64]) -> i64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `a[i] -= q * a[r]`.
fn sub_scaled(a: &mut [BigVec], i: usize, r: usize, q: &BigInt) {
    let pivot_row = a[r].clone();
    for (x, y) in a[i].iter_mut().zip(pivot_row.iter()) {
        *x -= q * y;
    }
}

fn negate_row(row: &mut [BigInt]) {
    for x in row.iter_mut() {
        *x = -core::mem::take(x);
    }
}

/// Row-style Hermite reduction restricted to the first `pivot_cols` columns.
///
/// On return the first `rank` rows are in Hermite normal form on those
/// columns (positive pivots, entries above a pivot reduced into
/// `[0, pivot)`), and the remaining rows vanish on them. Returns the rank.
pub(crate) fn echelon(a: &mut [BigVec], pivot_cols: usize) -> usize {
    let m = a.len();
    let mut r = 0;
    for col in 0..pivot_cols {
        if r == m {
            break;
        }
        let mut found = false;
        loop {
            let piv = (r..m)
                .filter(|&i| !a[i][col].is_zero())
                .min_by(|&i, &j| a[i][col].abs().cmp(&a[j][col].abs()));
            let Some(p) = piv else { break };
            found = true;
            a.swap(r, p);
            let mut clean = true;
            for i in r + 1..m {
                if !a[i][col].is_zero() {
                    let q = &a[i][col] / &a[r][col];
                    if !q.is_zero() {
                        sub_scaled(a, i, r, &q);
                    }
                    if !a[i][col].is_zero() {
                        clean = false;
                    }
                }
            }
            if clean {
                break;
            }
        }
        if found {
            if a[r][col].is_negative() {
                negate_row(&mut a[r]);
            }
            for i in 0..r {
                let q = a[i][col].div_floor(&a[r][col]);
                if !q.is_zero() {
                    sub_scaled(a, i, r, &q);
                }
            }
            r += 1;
        }
    }
    r
}

/// Canonical Hermite basis of the lattice spanned by `rows` (nonzero rows only).
pub(crate) fn hnf(rows: &[IntVec], n: usize) -> Result<Vec<IntVec>> {
    let mut a: Vec<BigVec> = rows.iter().map(|r| to_big(r)).collect();
    let rank = echelon(&mut a, n);
    a.truncate(rank);
    a.iter().map(|r| to_i64(r)).collect()
}

pub(crate) fn rank(rows: &[IntVec], n: usize) -> usize {
    let mut a: Vec<BigVec> = rows.iter().map(|r| to_big(r)).collect();
    echelon(&mut a, n)
}

/// Lattice basis (in Hermite form) of `{x in Z^n : <row, x> = 0 for all rows}`.
pub(crate) fn kernel(rows: &[IntVec], n: usize) -> Result<Vec<IntVec>> {
    let m = rows.len();
    let mut a: Vec<BigVec> = (0..n)
        .map(|j| {
            let mut row: BigVec = rows.iter().map(|r| BigInt::from(r[j])).collect();
            row.extend((0..n).map(|k| if k == j { BigInt::one() } else { BigInt::zero() }));
            row
        })
        .collect();
    let rank = echelon(&mut a, m);
    let basis: Vec<IntVec> = a[rank..]
        .iter()
        .map(|r| to_i64(&r[m..]))
        .collect::<Result<_>>()?;
    hnf(&basis, n)
}

/// Smith normal form `U A V = D` of a relation matrix, keeping `V` and `V^-1`.
///
/// With `x` a row vector, `x V` are the Smith coordinates: the relation
/// lattice becomes `diag[0] Z + ... + diag[r-1] Z + 0`.
pub(crate) struct Smith {
    pub diag: Vec<BigInt>,
    pub v: Vec<BigVec>,
    pub vinv: Vec<BigVec>,
}

fn identity(n: usize) -> Vec<BigVec> {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { BigInt::one() } else { BigInt::zero() })
                .collect()
        })
        .collect()
}

struct SmithCalc {
    a: Vec<BigVec>,
    v: Vec<BigVec>,
    vinv: Vec<BigVec>,
    n: usize,
}

impl SmithCalc {
    fn swap_cols(&mut self, i: usize, j: usize) {
        if i == j {
            return;
        }
        for row in self.a.iter_mut().chain(self.v.iter_mut()) {
            row.swap(i, j);
        }
        self.vinv.swap(i, j);
    }

    /// `col_j -= q col_t`
    fn col_op(&mut self, j: usize, t: usize, q: &BigInt) {
        for row in self.a.iter_mut().chain(self.v.iter_mut()) {
            let delta = q * &row[t];
            row[j] -= delta;
        }
        let src = self.vinv[j].clone();
        for (x, y) in self.vinv[t].iter_mut().zip(src.iter()) {
            *x += q * y;
        }
    }

    fn run(mut self) -> Smith {
        let k = self.a.len();
        let n = self.n;
        let mut t = 0;
        while t < k.min(n) {
            let mut best: Option<(usize, usize)> = None;
            for i in t..k {
                for j in t..n {
                    if self.a[i][j].is_zero() {
                        continue;
                    }
                    let better = match best {
                        None => true,
                        Some((bi, bj)) => self.a[i][j].abs() < self.a[bi][bj].abs(),
                    };
                    if better {
                        best = Some((i, j));
                    }
                }
            }
            let Some((pi, pj)) = best else { break };
            self.a.swap(t, pi);
            self.swap_cols(t, pj);
            loop {
                let mut dirty = false;
                for i in t + 1..k {
                    if !self.a[i][t].is_zero() {
                        let q = &self.a[i][t] / &self.a[t][t];
                        sub_scaled(&mut self.a, i, t, &q);
                        dirty |= !self.a[i][t].is_zero();
                    }
                }
                for j in t + 1..n {
                    if !self.a[t][j].is_zero() {
                        let q = &self.a[t][j] / &self.a[t][t];
                        self.col_op(j, t, &q);
                        dirty |= !self.a[t][j].is_zero();
                    }
                }
                if dirty {
                    let mut best: Option<(bool, usize)> = None;
                    let mut best_abs = self.a[t][t].abs();
                    for i in t + 1..k {
                        let x = self.a[i][t].abs();
                        if !x.is_zero() && x < best_abs {
                            best_abs = x;
                            best = Some((true, i));
                        }
                    }
                    for j in t + 1..n {
                        let x = self.a[t][j].abs();
                        if !x.is_zero() && x < best_abs {
                            best_abs = x;
                            best = Some((false, j));
                        }
                    }
                    match best {
                        Some((true, i)) => self.a.swap(t, i),
                        Some((false, j)) => self.swap_cols(t, j),
                        None => {}
                    }
                    continue;
                }
                let offender = (t + 1..k).find(|&i| {
                    (t + 1..n).any(|j| !(&self.a[i][j] % &self.a[t][t]).is_zero())
                });
                match offender {
                    Some(i) => {
                        let row = self.a[i].clone();
                        for (x, y) in self.a[t].iter_mut().zip(row.iter()) {
                            *x += y;
                        }
                    }
                    None => break,
                }
            }
            if self.a[t][t].is_negative() {
                negate_row(&mut self.a[t]);
            }
            t += 1;
        }
        let diag = (0..t).map(|i| self.a[i][i].clone()).collect();
        Smith {
            diag,
            v: self.v,
            vinv: self.vinv,
        }
    }
}

pub(crate) fn smith(rows: &[IntVec], n: usize) -> Smith {
    SmithCalc {
        a: rows.iter().map(|r| to_big(r)).collect(),
        v: identity(n),
        vinv: identity(n),
        n,
    }
    .run()
}

/// Row vector times matrix.
pub(crate) fn vec_mat(x: &[BigInt], m: &[BigVec]) -> BigVec {
    let cols = m.first().map_or(0, |r| r.len());
    let mut out = vec![BigInt::zero(); cols];
    for (xi, row) in x.iter().zip(m) {
        if xi.is_zero() {
            continue;
        }
        for (o, mij) in out.iter_mut().zip(row) {
            *o += xi * mij;
        }
    }
    out
}

/// Coefficients `c` with `sum c_i basis_i = target`, or `None` when `target`
/// is outside the rational span. Free variables are set to zero when the
/// basis is dependent.
pub(crate) fn solve_rational(basis: &[IntVec], target: &[i64]) -> Option<Vec<BigRational>> {
    let k = basis.len();
    let n = target.len();
    let mut a: Vec<Vec<BigRational>> = (0..n)
        .map(|j| {
            let mut row: Vec<BigRational> = basis
                .iter()
                .map(|b| BigRational::from_integer(BigInt::from(b[j])))
                .collect();
            row.push(BigRational::from_integer(BigInt::from(target[j])));
            row
        })
        .collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..k {
        let Some(p) = (r..n).find(|&i| !a[i][col].is_zero()) else {
            continue;
        };
        a.swap(r, p);
        let inv = a[r][col].recip();
        for x in a[r].iter_mut() {
            *x *= &inv;
        }
        for i in 0..n {
            if i != r && !a[i][col].is_zero() {
                let f = a[i][col].clone();
                let pivot_row = a[r].clone();
                for (x, y) in a[i].iter_mut().zip(pivot_row.iter()) {
                    *x -= &f * y;
                }
            }
        }
        pivots.push(col);
        r += 1;
    }
    if a[r..].iter().any(|row| !row[k].is_zero()) {
        return None;
    }
    let mut c = vec![BigRational::zero(); k];
    for (row, &col) in a.iter().zip(pivots.iter()) {
        c[col] = row[k].clone();
    }
    Some(c)
}

/// Determinant of a square integer matrix (Bareiss elimination).
pub(crate) fn det(rows: &[IntVec]) -> BigInt {
    let n = rows.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut a: Vec<BigVec> = rows.iter().map(|r| to_big(r)).collect();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            let Some(p) = (k + 1..n).find(|&i| !a[i][k].is_zero()) else {
                return BigInt::zero();
            };
            a.swap(k, p);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let val = (&a[i][j] * &a[k][k] - &a[i][k] * &a[k][j]) / &prev;
                a[i][j] = val;
            }
        }
        prev = a[k][k].clone();
    }
    sign * &a[n - 1][n - 1]
}
