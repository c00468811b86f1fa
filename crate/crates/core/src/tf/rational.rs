use std::fmt;

use crate::error::{Error, Result};
use crate::scalar::{Cplx, Real};
use crate::tf::poly::{unit_delay, PolyQ};

/// Poles closer to the unit circle than this are treated as unstable.
pub const STABILITY_MARGIN: f64 = 1e-9;

/// SISO rational transfer function `num(q^-1) / den(q^-1)` with `den[0] = 1`.
#[derive(Clone, PartialEq)]
pub struct RationalTf<T: Real> {
    num: PolyQ<T>,
    den: PolyQ<T>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TfOp {
    Add,
    Sub,
    Mul,
}

impl<T: Real> RationalTf<T> {
    /// Builds `num / den`, scaling both so the denominator's constant term is one.
    pub fn new(num: PolyQ<T>, den: PolyQ<T>) -> Result<Self> {
        let d0 = den.coeff(0);
        if d0 == T::zero() {
            return Err(Error::InvalidPolynomial(format!(
                "denominator constant term must be nonzero, got {den:?}"
            )));
        }
        if d0 == T::one() {
            return Ok(Self { num, den });
        }
        let inv = T::one() / d0;
        // d0 * (1 / d0) can round away from one
        let mut d = den.scale(inv).coeffs().to_vec();
        d[0] = T::one();
        Ok(Self { num: num.scale(inv), den: PolyQ::new(d) })
    }

    pub fn from_coeffs(num: &[T], den: &[T]) -> Result<Self> {
        Self::new(PolyQ::new(num.to_vec()), PolyQ::new(den.to_vec()))
    }

    /// Polynomial (FIR) transfer function.
    pub fn fir(num: PolyQ<T>) -> Self {
        Self { num, den: PolyQ::one() }
    }

    pub fn zero() -> Self {
        Self::fir(PolyQ::zero())
    }

    pub fn one() -> Self {
        Self::fir(PolyQ::one())
    }

    pub fn num(&self) -> &PolyQ<T> {
        &self.num
    }

    pub fn den(&self) -> &PolyQ<T> {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_fir(&self) -> bool {
        self.den.degree() == 0
    }

    /// Number of leading delays; `Some(0)` means direct feedthrough.
    pub fn relative_degree(&self) -> Option<usize> {
        self.num.leading_delay()
    }

    /// Zero-delay (feedthrough) coefficient.
    pub fn feedthrough(&self) -> T {
        self.num.coeff(0)
    }

    /// Response at `q = e^{j omega}`.
    pub fn eval(&self, omega: T) -> Result<Cplx<T>> {
        let x = unit_delay(omega);
        let d = self.den.eval_complex(x);
        let tol = T::default_epsilon() * T::lit(64.0) * self.den.abs_sum();
        if d.norm_sqr() <= tol * tol {
            return Err(Error::PoleOnCircle { omega: omega.to_f64_lossy() });
        }
        Ok(self.num.eval_complex(x) / d)
    }

    pub fn arith(&self, rhs: &Self, op: TfOp) -> Self {
        match op {
            TfOp::Add => self.combine(rhs, false),
            TfOp::Sub => self.combine(rhs, true),
            TfOp::Mul => Self::normalized(&self.num * &rhs.num, &self.den * &rhs.den),
        }
    }

    fn combine(&self, rhs: &Self, subtract: bool) -> Self {
        if self.den == rhs.den {
            let num = if subtract { &self.num - &rhs.num } else { &self.num + &rhs.num };
            return Self { num, den: self.den.clone() };
        }
        let left = &self.num * &rhs.den;
        let right = &rhs.num * &self.den;
        let num = if subtract { &left - &right } else { &left + &right };
        Self::normalized(num, &self.den * &rhs.den)
    }

    fn normalized(num: PolyQ<T>, den: PolyQ<T>) -> Self {
        // den[0] is a product of unit constants, so it is one up to rounding.
        Self::new(num.normalized(), den.normalized()).expect("product of monic denominators")
    }

    /// True iff every pole lies strictly inside the circle of radius `1 - STABILITY_MARGIN`.
    pub fn is_stable(&self) -> bool {
        schur_stable(self.den.coeffs(), T::one() - T::lit(STABILITY_MARGIN))
    }

    /// First `n` impulse-response samples by long division.
    pub fn impulse(&self, n: usize) -> Vec<T> {
        let num = self.num.coeffs();
        let den = self.den.coeffs();
        let mut h = vec![T::zero(); n];
        for t in 0..n {
            let mut acc = num.get(t).copied().unwrap_or_else(T::zero);
            for k in 1..den.len().min(t + 1) {
                acc -= den[k] * h[t - k];
            }
            h[t] = acc;
        }
        h
    }
}

/// Schur-Cohn test on `den(q^-1) = d0 + d1 q^-1 + ... + dn q^-n`.
///
/// The poles are the roots of `d0 z^n + d1 z^(n-1) + ... + dn`. Scaling by
/// `radius` checks them against that circle instead of the unit circle.
fn schur_stable<T: Real>(den: &[T], radius: T) -> bool {
    let n = den.len() - 1;
    // ascending powers of z: p[k] multiplies z^k
    let mut p: Vec<T> = (0..=n)
        .map(|k| {
            let mut scale = T::one();
            for _ in 0..k {
                scale *= radius;
            }
            den[n - k] * scale
        })
        .collect();
    while p.len() > 1 {
        let m = p.len() - 1;
        let lead = p[m];
        let tail = p[0];
        if tail.abs() >= lead.abs() {
            return false;
        }
        let k = tail / lead;
        p = (1..=m).map(|i| p[i] - k * p[m - i]).collect();
    }
    true
}

impl<T: Real> fmt::Debug for RationalTf<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RationalTf({:?} / {:?})", self.num, self.den)
    }
}

impl<T: Real> fmt::Display for RationalTf<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_fir() {
            write!(f, "{}", self.num)
        } else {
            write!(f, "({}) / ({})", self.num, self.den)
        }
    }
}
