use crate::error::{Error, Result};
use crate::scalar::Real;

/// Angular frequencies in `[0, 2 pi)`, strictly increasing.
#[derive(Debug, Clone, PartialEq)]
pub struct FreqGrid<T: Real> {
    omegas: Vec<T>,
}

impl<T: Real> FreqGrid<T> {
    pub fn new(omegas: Vec<T>) -> Result<Self> {
        if omegas.is_empty() {
            return Err(Error::InvalidGrid("grid is empty".into()));
        }
        if omegas.iter().any(|w| *w < T::zero() || *w >= T::two_pi()) {
            return Err(Error::InvalidGrid("frequencies must lie in [0, 2pi)".into()));
        }
        if omegas.windows(2).any(|p| p[1] <= p[0]) {
            return Err(Error::InvalidGrid("frequencies must be strictly increasing".into()));
        }
        Ok(Self { omegas })
    }

    /// `n` equispaced points `2 pi k / n`, starting at zero.
    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidGrid("grid is empty".into()));
        }
        let step = T::two_pi() / T::lit(n as f64);
        Ok(Self { omegas: (0..n).map(|k| step * T::lit(k as f64)).collect() })
    }

    pub fn omegas(&self) -> &[T] {
        &self.omegas
    }

    pub fn len(&self) -> usize {
        self.omegas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omegas.is_empty()
    }

    /// Index of the grid point at `2 pi - omega[k]`, if the grid contains it.
    pub fn mirror_index(&self, k: usize) -> Option<usize> {
        let target = T::two_pi() - self.omegas[k];
        let tol = T::lit(1e-9);
        if self.omegas[k] == T::zero() {
            return Some(k);
        }
        self.omegas.iter().position(|w| (*w - target).abs() < tol)
    }
}
