use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::scalar::{Cplx, Real};

/// Polynomial in the delay operator, `c0 + c1 q^-1 + ... + cn q^-n`.
///
/// Trailing zero coefficients are trimmed so that the stored length is the
/// canonical degree plus one. The zero polynomial is `[0]`.
#[derive(Clone, PartialEq)]
pub struct PolyQ<T: Real> {
    coeffs: Vec<T>,
}

impl<T: Real> PolyQ<T> {
    pub fn new(coeffs: impl Into<Vec<T>>) -> Self {
        let mut coeffs = coeffs.into();
        trim(&mut coeffs);
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self { coeffs: vec![T::zero()] }
    }

    pub fn one() -> Self {
        Self::constant(T::one())
    }

    pub fn constant(c: T) -> Self {
        Self::new(vec![c])
    }

    /// `c q^-delay`.
    pub fn monomial(c: T, delay: usize) -> Self {
        let mut coeffs = vec![T::zero(); delay + 1];
        coeffs[delay] = c;
        Self::new(coeffs)
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    /// Coefficient of `q^-k`; zero beyond the degree.
    pub fn coeff(&self, k: usize) -> T {
        self.coeffs.get(k).copied().unwrap_or_else(T::zero)
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0] == T::zero()
    }

    /// Index of the first nonzero coefficient, `None` for the zero polynomial.
    pub fn leading_delay(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| *c != T::zero())
    }

    pub fn scale(&self, s: T) -> Self {
        Self::new(self.coeffs.iter().map(|&c| c * s).collect::<Vec<_>>())
    }

    /// Evaluates at `q^-1 = x` (Horner).
    pub fn eval_complex(&self, x: Cplx<T>) -> Cplx<T> {
        self.coeffs
            .iter()
            .rev()
            .fold(Cplx::new(T::zero(), T::zero()), |acc, &c| acc * x + Cplx::new(c, T::zero()))
    }

    /// Evaluates at `q = e^{j omega}`, i.e. `q^-1 = e^{-j omega}`.
    pub fn eval_freq(&self, omega: T) -> Cplx<T> {
        self.eval_complex(unit_delay(omega))
    }

    pub fn eval_real(&self, x: T) -> T {
        self.coeffs.iter().rev().fold(T::zero(), |acc, &c| acc * x + c)
    }

    pub fn abs_sum(&self) -> T {
        self.coeffs.iter().fold(T::zero(), |acc, &c| acc + c.abs())
    }

    pub(crate) fn normalized(mut self) -> Self {
        trim(&mut self.coeffs);
        self
    }
}

/// `e^{-j omega}`, the value taken by `q^-1` on the unit circle.
pub fn unit_delay<T: Real>(omega: T) -> Cplx<T> {
    Cplx::new(omega.cos(), -omega.sin())
}

fn trim<T: Real>(coeffs: &mut Vec<T>) {
    match coeffs.iter().rposition(|c| *c != T::zero()) {
        Some(last) => coeffs.truncate(last + 1),
        None => {
            coeffs.clear();
            coeffs.push(T::zero());
        }
    }
}

impl<T: Real> Add for &PolyQ<T> {
    type Output = PolyQ<T>;

    fn add(self, rhs: Self) -> PolyQ<T> {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        PolyQ::new((0..n).map(|k| self.coeff(k) + rhs.coeff(k)).collect::<Vec<_>>())
    }
}

impl<T: Real> Sub for &PolyQ<T> {
    type Output = PolyQ<T>;

    fn sub(self, rhs: Self) -> PolyQ<T> {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        PolyQ::new((0..n).map(|k| self.coeff(k) - rhs.coeff(k)).collect::<Vec<_>>())
    }
}

impl<T: Real> Mul for &PolyQ<T> {
    type Output = PolyQ<T>;

    fn mul(self, rhs: Self) -> PolyQ<T> {
        if self.is_zero() || rhs.is_zero() {
            return PolyQ::zero();
        }
        let mut out = vec![T::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (k, &b) in rhs.coeffs.iter().enumerate() {
                out[i + k] += a * b;
            }
        }
        PolyQ::new(out)
    }
}

impl<T: Real> Neg for &PolyQ<T> {
    type Output = PolyQ<T>;

    fn neg(self) -> PolyQ<T> {
        self.scale(-T::one())
    }
}

impl<T: Real> fmt::Debug for PolyQ<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PolyQ{:?}", self.coeffs)
    }
}

impl<T: Real> fmt::Display for PolyQ<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate() {
            if *c == T::zero() {
                continue;
            }
            let (sign, mag) = if *c < T::zero() { ("-", -*c) } else { ("+", *c) };
            match (first, sign) {
                (true, "-") => write!(f, "-")?,
                (true, _) => {}
                (false, s) => write!(f, " {s} ")?,
            }
            match k {
                0 => write!(f, "{mag}")?,
                1 => write!(f, "{mag} q^-1")?,
                _ => write!(f, "{mag} q^-{k}")?,
            }
            first = false;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trailing_zeros_trimmed() {
        let p = PolyQ::new(vec![1.0, 2.0, 0.0, 0.0]);
        assert_eq!(p.coeffs(), &[1.0, 2.0]);
        assert_eq!(p.degree(), 1);
        let z = PolyQ::<f64>::new(vec![0.0, 0.0]);
        assert!(z.is_zero());
        assert_eq!(z.coeffs(), &[0.0]);
        assert_eq!(PolyQ::<f64>::new(Vec::new()), PolyQ::zero());
    }

    #[test]
    fn leading_delay_of_g34() {
        let p = PolyQ::new(vec![0.0, -0.3, 0.8]);
        assert_eq!(p.leading_delay(), Some(1));
        assert_eq!(PolyQ::<f64>::zero().leading_delay(), None);
    }

    #[test]
    fn monomial_product() {
        let a = PolyQ::monomial(0.5, 1);
        let b = PolyQ::monomial(-0.5, 1);
        assert_eq!((&a * &b).coeffs(), &[0.0, 0.0, -0.25]);
    }

    #[test]
    fn cancellation_trims_degree() {
        let a = PolyQ::new(vec![1.0, 2.0, 3.0]);
        let b = PolyQ::new(vec![0.0, 0.0, 3.0]);
        assert_eq!((&a - &b).coeffs(), &[1.0, 2.0]);
        assert!((&a - &a).is_zero());
    }

    #[test]
    fn display_reads_like_a_formula() {
        let p = PolyQ::new(vec![0.0, -0.3, 0.8]);
        assert_eq!(p.to_string(), "-0.3 q^-1 + 0.8 q^-2");
    }

    #[test]
    fn eval_at_zero_frequency_is_coefficient_sum() {
        let p = PolyQ::new(vec![0.0f64, -0.3, 0.8]);
        let v = p.eval_freq(0.0);
        assert!((v.re - 0.5).abs() < 1e-15 && v.im.abs() < 1e-15);
    }
}
