//! Exact truncated power series over `Q`.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

/// `sum_{k < order} c_k t^k`, computed modulo `t^order`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Series {
    coeffs: Vec<BigRational>,
}

impl Series {
    pub fn zero(order: usize) -> Self {
        Series {
            coeffs: vec![BigRational::zero(); order],
        }
    }

    pub fn one(order: usize) -> Self {
        let mut s = Self::zero(order);
        if order > 0 {
            s.coeffs[0] = BigRational::one();
        }
        s
    }

    /// `c · t^k`.
    pub fn monomial(order: usize, k: usize, c: i64) -> Self {
        let mut s = Self::zero(order);
        if k < order {
            s.coeffs[k] = BigRational::from_integer(BigInt::from(c));
        }
        s
    }

    pub fn order(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeff(&self, k: usize) -> &BigRational {
        &self.coeffs[k]
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    /// `c` times the series.
    pub fn scale(&self, c: &BigRational) -> Self {
        Series {
            coeffs: self.coeffs.iter().map(|x| x * c).collect(),
        }
    }

    /// Multiplicative inverse; `None` when the constant term vanishes.
    pub fn inverse(&self) -> Option<Self> {
        let n = self.order();
        if n == 0 {
            return Some(self.clone());
        }
        if self.coeffs[0].is_zero() {
            return None;
        }
        let a0 = self.coeffs[0].recip();
        let mut inv = vec![BigRational::zero(); n];
        inv[0] = a0.clone();
        for k in 1..n {
            let mut acc = BigRational::zero();
            for j in 1..=k {
                acc += &self.coeffs[j] * &inv[k - j];
            }
            inv[k] = -acc * &a0;
        }
        Some(Series { coeffs: inv })
    }

    /// Formal derivative, keeping the order.
    pub fn derivative(&self) -> Self {
        let n = self.order();
        let mut out = Self::zero(n);
        for k in 1..n {
            out.coeffs[k - 1] = &self.coeffs[k] * BigRational::from_integer(BigInt::from(k));
        }
        out
    }

    /// `t^m - 1` truncated.
    pub fn t_power_minus_one(order: usize, m: usize) -> Self {
        let mut s = Self::monomial(order, m, 1);
        if order > 0 {
            s.coeffs[0] -= BigRational::one();
        }
        s
    }

    /// Integer power, negative exponents via the inverse.
    pub fn pow(&self, exp: i64) -> Option<Self> {
        let base = if exp < 0 { self.inverse()? } else { self.clone() };
        let mut out = Self::one(self.order());
        for _ in 0..exp.unsigned_abs() {
            out = &out * &base;
        }
        Some(out)
    }
}

impl Add for &Series {
    type Output = Series;
    fn add(self, rhs: &Series) -> Series {
        assert_eq!(self.order(), rhs.order());
        Series {
            coeffs: self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &Series {
    type Output = Series;
    fn sub(self, rhs: &Series) -> Series {
        self + &(-rhs)
    }
}

impl Neg for &Series {
    type Output = Series;
    fn neg(self) -> Series {
        Series {
            coeffs: self.coeffs.iter().map(|a| -a).collect(),
        }
    }
}

impl Mul for &Series {
    type Output = Series;
    fn mul(self, rhs: &Series) -> Series {
        let n = self.order();
        assert_eq!(n, rhs.order());
        let mut out = Series::zero(n);
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs[..n - i].iter().enumerate() {
                out.coeffs[i + j] += a * b;
            }
        }
        out
    }
}
