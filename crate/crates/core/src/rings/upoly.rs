//! Dense univariate integer polynomials, the elements of ℤ[q].

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

/// `coeffs[i]` is the coefficient of `q^i`; no trailing zeros.
#[derive(Clone, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct UPoly {
    coeffs: Vec<BigInt>,
}

impl UPoly {
    pub fn zero() -> Self {
        UPoly { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(BigInt::one())
    }

    /// The generator `q`.
    pub fn q() -> Self {
        UPoly {
            coeffs: vec![BigInt::zero(), BigInt::one()],
        }
    }

    pub fn constant(c: impl Into<BigInt>) -> Self {
        Self::from_coeffs(vec![c.into()])
    }

    pub fn monomial(c: impl Into<BigInt>, deg: usize) -> Self {
        let mut coeffs = vec![BigInt::zero(); deg + 1];
        coeffs[deg] = c.into();
        Self::from_coeffs(coeffs)
    }

    pub fn from_coeffs(mut coeffs: Vec<BigInt>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        UPoly { coeffs }
    }

    pub fn from_i64(coeffs: &[i64]) -> Self {
        Self::from_coeffs(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> BigInt {
        self.coeffs.get(i).cloned().unwrap_or_default()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.len() <= 1
    }

    pub fn add(&self, other: &UPoly) -> UPoly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..n).map(|i| self.coeff(i) + other.coeff(i)).collect();
        Self::from_coeffs(coeffs)
    }

    pub fn neg(&self) -> UPoly {
        UPoly {
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }

    pub fn sub(&self, other: &UPoly) -> UPoly {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &UPoly) -> UPoly {
        if self.is_zero() || other.is_zero() {
            return UPoly::zero();
        }
        let mut out = vec![BigInt::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self::from_coeffs(out)
    }

    pub fn scale(&self, k: &BigInt) -> UPoly {
        Self::from_coeffs(self.coeffs.iter().map(|c| c * k).collect())
    }

    pub fn pow(&self, e: u32) -> UPoly {
        let mut acc = UPoly::one();
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    /// Exact coefficientwise division.
    pub fn div_int(&self, k: &BigInt) -> Option<UPoly> {
        let mut out = Vec::with_capacity(self.coeffs.len());
        for c in &self.coeffs {
            let (q, r) = c.div_rem(k);
            if !r.is_zero() {
                return None;
            }
            out.push(q);
        }
        Some(Self::from_coeffs(out))
    }

    /// Exact division by `q^k`, `None` when a low coefficient is nonzero.
    pub fn div_q_power(&self, k: usize) -> Option<UPoly> {
        if self.coeffs.iter().take(k).any(|c| !c.is_zero()) {
            return None;
        }
        Some(Self::from_coeffs(
            self.coeffs.iter().skip(k).cloned().collect(),
        ))
    }

    pub fn eval(&self, x: &BigInt) -> BigInt {
        self.coeffs
            .iter()
            .rev()
            .fold(BigInt::zero(), |acc, c| acc * x + c)
    }

    /// `f(g(q))`.
    pub fn compose(&self, g: &UPoly) -> UPoly {
        self.coeffs.iter().rev().fold(UPoly::zero(), |acc, c| {
            acc.mul(g).add(&UPoly::constant(c.clone()))
        })
    }

    /// `f(q^p)`.
    pub fn frobenius(&self, p: usize) -> UPoly {
        let mut out = vec![BigInt::zero(); (self.coeffs.len().max(1) - 1) * p + 1];
        for (i, c) in self.coeffs.iter().enumerate() {
            out[i * p] = c.clone();
        }
        Self::from_coeffs(out)
    }

    /// Content: gcd of coefficients (zero for the zero polynomial).
    pub fn content(&self) -> BigInt {
        self.coeffs.iter().fold(BigInt::zero(), |g, c| g.gcd(c))
    }
}

impl fmt::Display for UPoly {
    /// Renders in the expression grammar, e.g. `q^2-3*q+3`.
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
            let mag = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, "{}", if neg { "-" } else { "+" })?;
            }
            first = false;
            match (i, mag.is_one()) {
                (0, _) => write!(f, "{mag}")?,
                (_, true) => {}
                (_, false) => write!(f, "{mag}*")?,
            }
            match i {
                0 => {}
                1 => write!(f, "q")?,
                _ => write!(f, "q^{i}")?,
            }
        }
        Ok(())
    }
}

impl fmt::Debug for UPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "UPoly({self})")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic_and_display() {
        let q = UPoly::q();
        let p = q
            .mul(&q)
            .scale(&BigInt::from(2))
            .sub(&q.scale(&BigInt::from(2)));
        assert_eq!(p.to_string(), "2*q^2-2*q");
        assert_eq!(p.div_int(&BigInt::from(2)).unwrap().to_string(), "q^2-q");
        assert!(p.div_int(&BigInt::from(4)).is_none());
        assert_eq!(UPoly::from_i64(&[3, -3, 1]).to_string(), "q^2-3*q+3");
        assert_eq!(UPoly::from_i64(&[-1]).to_string(), "-1");
        assert_eq!(UPoly::zero().to_string(), "0");
    }

    #[test]
    fn compose_and_frobenius() {
        let f = UPoly::from_i64(&[2, -1]); // 2 - q
        let one_minus_q = UPoly::from_i64(&[1, -1]);
        assert_eq!(f.compose(&one_minus_q), UPoly::from_i64(&[1, 1]));
        assert_eq!(f.frobenius(3), UPoly::from_i64(&[2, 0, 0, -1]));
        assert_eq!(f.eval(&BigInt::from(5)), BigInt::from(-3));
        assert_eq!(UPoly::q().pow(3).div_q_power(2).unwrap(), UPoly::q());
        assert!(UPoly::from_i64(&[1, 1]).div_q_power(1).is_none());
    }
}
