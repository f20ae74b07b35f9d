//! Dense integer polynomials and small helpers on big integers.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use std::fmt;

/// Dense integer polynomial, coefficients low to high. The zero polynomial is empty.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct IntPoly {
    pub coeffs: Vec<BigInt>,
}

impl IntPoly {
    pub fn new(mut coeffs: Vec<BigInt>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        IntPoly { coeffs }
    }

    pub fn from_i64(c: &[i64]) -> Self {
        IntPoly::new(c.iter().map(|&x| BigInt::from(x)).collect())
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, or -1 for the zero polynomial.
    pub fn degree(&self) -> isize {
        self.coeffs.len() as isize - 1
    }

    pub fn coeff(&self, i: usize) -> BigInt {
        self.coeffs.get(i).cloned().unwrap_or_default()
    }

    pub fn leading(&self) -> BigInt {
        self.coeffs.last().cloned().unwrap_or_default()
    }

    pub fn eval(&self, x: &BigInt) -> BigInt {
        self.coeffs
            .iter()
            .rev()
            .fold(BigInt::zero(), |acc, c| acc * x + c)
    }

    pub fn derivative(&self) -> IntPoly {
        IntPoly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * BigInt::from(i))
                .collect(),
        )
    }

    pub fn mul(&self, other: &IntPoly) -> IntPoly {
        if self.is_zero() || other.is_zero() {
            return IntPoly::default();
        }
        let mut r = vec![BigInt::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                r[i + j] += a * b;
            }
        }
        IntPoly::new(r)
    }

    pub fn add(&self, other: &IntPoly) -> IntPoly {
        let n = self.coeffs.len().max(other.coeffs.len());
        IntPoly::new((0..n).map(|i| self.coeff(i) + other.coeff(i)).collect())
    }

    pub fn scale(&self, c: &BigInt) -> IntPoly {
        IntPoly::new(self.coeffs.iter().map(|x| x * c).collect())
    }

    pub fn content(&self) -> BigInt {
        self.coeffs
            .iter()
            .fold(BigInt::zero(), |g, c| g.gcd(c))
    }

    /// Divide out the content and make the leading coefficient positive.
    pub fn primitive(&self) -> IntPoly {
        let g = self.content();
        if g.is_zero() {
            return self.clone();
        }
        let g = if self.leading().is_negative() { -g } else { g };
        IntPoly::new(self.coeffs.iter().map(|c| c / &g).collect())
    }

    /// Reduction modulo a word-size prime, coefficients in [0, p).
    pub fn mod_p(&self, p: u64) -> Vec<u64> {
        let pb = BigInt::from(p);
        let mut v: Vec<u64> = self
            .coeffs
            .iter()
            .map(|c| {
                let r = c.mod_floor(&pb);
                u64::try_from(r).unwrap()
            })
            .collect();
        while v.last() == Some(&0) {
            v.pop();
        }
        v
    }
}

impl fmt::Display for IntPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            let a = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { '-' } else { '+' })?;
            }
            first = false;
            let show_coeff = i == 0 || !a.is_one();
            if show_coeff {
                write!(f, "{a}")?;
            }
            match i {
                0 => {}
                1 => write!(f, "{}X", if show_coeff { "*" } else { "" })?,
                _ => write!(f, "{}X^{i}", if show_coeff { "*" } else { "" })?,
            }
        }
        Ok(())
    }
}

/// A polynomial with integer numerator and positive integer denominator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RecognizedPoly {
    pub numerator: IntPoly,
    pub denominator: BigInt,
}

impl RecognizedPoly {
    pub fn new(numerator: IntPoly, denominator: BigInt) -> Self {
        let mut r = RecognizedPoly {
            numerator,
            denominator,
        };
        r.normalize();
        r
    }

    pub fn integral(p: IntPoly) -> Self {
        RecognizedPoly {
            numerator: p,
            denominator: BigInt::one(),
        }
    }

    fn normalize(&mut self) {
        if self.denominator.is_negative() {
            self.denominator = -self.denominator.clone();
            self.numerator = self.numerator.scale(&BigInt::from(-1));
        }
        let g = self.numerator.content().gcd(&self.denominator);
        if !g.is_zero() && !g.is_one() {
            self.numerator = IntPoly::new(self.numerator.coeffs.iter().map(|c| c / &g).collect());
            self.denominator = &self.denominator / &g;
        }
    }
}

/// 2-adic valuation of a nonzero integer.
pub fn v2(x: &BigInt) -> u64 {
    x.trailing_zeros().unwrap_or(u64::MAX)
}

/// Exact integer square root test.
pub fn is_square(x: &BigInt) -> Option<BigInt> {
    if x.is_negative() {
        return None;
    }
    let r = x.sqrt();
    (&r * &r == *x).then_some(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn display_and_eval() {
        let p = IntPoly::from_i64(&[-121287375, 191025, 1]);
        assert_eq!(p.to_string(), "X^2 + 191025*X - 121287375");
        assert_eq!(p.eval(&BigInt::from(0)), BigInt::from(-121287375));
        assert_eq!(p.derivative(), IntPoly::from_i64(&[191025, 2]));
    }

    #[test]
    fn primitive_part() {
        let p = IntPoly::from_i64(&[6, -4, -2]);
        assert_eq!(p.primitive(), IntPoly::from_i64(&[-3, 2, 1]));
        let r = RecognizedPoly::new(IntPoly::from_i64(&[4, 6]), BigInt::from(-8));
        assert_eq!(r.numerator, IntPoly::from_i64(&[-2, -3]));
        assert_eq!(r.denominator, BigInt::from(4));
    }
}
