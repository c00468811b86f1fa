//! Small dense linear-algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector};

use crate::scalar::{Cplx, Real};

/// Least-squares solution with the numerical rank it was computed at.
#[derive(Debug, Clone)]
pub struct LstsqSolution<T: Real> {
    pub theta: DVector<T>,
    pub rank: usize,
}

impl<T: Real> LstsqSolution<T> {
    pub fn full_rank(&self) -> bool {
        self.rank == self.theta.len()
    }
}

/// Minimum-norm least-squares solution of `phi * theta ~ y`.
pub fn lstsq<T: Real>(phi: &DMatrix<T>, y: &DVector<T>) -> LstsqSolution<T> {
    assert_eq!(phi.nrows(), y.len(), "regressor and target lengths differ");
    let (theta, rank) = lstsq_many(phi, &DMatrix::from_column_slice(y.len(), 1, y.as_slice()));
    LstsqSolution { theta: theta.column(0).into_owned(), rank }
}

/// Least squares for several right-hand sides sharing one regressor; returns
/// one solution column per column of `y` and the numerical rank of `phi`.
///
/// Householder QR reduces the problem to the `n x n` triangular factor, whose
/// SVD then yields the minimum-norm solution when `phi` is rank deficient.
pub fn lstsq_many<T: Real>(phi: &DMatrix<T>, y: &DMatrix<T>) -> (DMatrix<T>, usize) {
    let (m, n) = phi.shape();
    assert_eq!(m, y.nrows(), "regressor and target lengths differ");
    if n == 0 {
        return (DMatrix::zeros(0, y.ncols()), 0);
    }
    let (r, qty) = if m > n {
        let qr = phi.clone().qr();
        let mut qty = y.clone();
        qr.q_tr_mul(&mut qty);
        (qr.r(), qty.rows(0, n).into_owned())
    } else {
        (phi.clone(), y.clone())
    };
    let svd = r.svd(true, true);
    let smax = svd.singular_values.iter().fold(T::zero(), |a, &s| a.max(s));
    let tol = smax * T::default_epsilon() * T::lit(m.max(n) as f64);
    let rank = svd.singular_values.iter().filter(|&&s| s > tol).count();
    let theta = if smax == T::zero() {
        DMatrix::zeros(n, y.ncols())
    } else {
        svd.solve(&qty, tol).expect("svd computed with both factors")
    };
    (theta, rank)
}

/// Eigenvalue condition number of a symmetric positive semidefinite matrix;
/// infinite when the smallest eigenvalue is not positive.
pub fn spd_condition<T: Real>(gram: &DMatrix<T>) -> (T, T) {
    if gram.nrows() == 0 {
        return (T::zero(), T::zero());
    }
    let eig = gram.clone().symmetric_eigen();
    let min = eig.eigenvalues.iter().fold(T::max_value().unwrap(), |a, &e| a.min(e));
    let max = eig.eigenvalues.iter().fold(T::min_value().unwrap(), |a, &e| a.max(e));
    let cond = if min <= T::zero() || max <= T::zero() {
        T::max_value().unwrap()
    } else {
        max / min
    };
    (cond, min)
}

/// `A^{-1} B` together with the 1-norm condition number of `A`, or `None`
/// when `A` is singular to working precision.
pub fn solve_with_condition<T: Real>(
    a: &DMatrix<Cplx<T>>,
    b: &DMatrix<Cplx<T>>,
) -> Option<(DMatrix<Cplx<T>>, T)> {
    let n = a.nrows();
    let lu = a.clone().lu();
    let inv = lu.try_inverse()?;
    if inv.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return None;
    }
    let cond = norm1(a) * norm1(&inv);
    debug_assert_eq!(inv.ncols(), n);
    Some((&inv * b, cond))
}

pub fn norm1<T: Real>(a: &DMatrix<Cplx<T>>) -> T {
    a.column_iter()
        .map(|c| c.iter().fold(T::zero(), |s, z| s + z.norm_sqr().sqrt()))
        .fold(T::zero(), |m, s| m.max(s))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_system_is_recovered() {
        let phi = DMatrix::from_row_slice(4, 2, &[1.0, 0.0, 0.0, 1.0, 1.0, 1.0, 2.0, -1.0]);
        let theta = DVector::from_vec(vec![0.7, -0.2]);
        let y = &phi * &theta;
        let sol = lstsq(&phi, &y);
        assert!(sol.full_rank());
        assert!((sol.theta - theta).amax() < 1e-14);
    }

    #[test]
    fn rank_deficient_gives_minimum_norm() {
        // two identical columns: the minimum-norm split is even
        let phi = DMatrix::<f64>::from_row_slice(3, 2, &[1.0, 1.0, 2.0, 2.0, 3.0, 3.0]);
        let y = DVector::from_vec(vec![2.0, 4.0, 6.0]);
        let sol = lstsq(&phi, &y);
        assert_eq!(sol.rank, 1);
        assert!((sol.theta[0] - 1.0).abs() < 1e-12 && (sol.theta[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_regressor_gives_zero() {
        let sol = lstsq(&DMatrix::<f64>::zeros(5, 3), &DVector::zeros(5));
        assert_eq!(sol.rank, 0);
        assert_eq!(sol.theta, DVector::zeros(3));
    }

    #[test]
    fn condition_of_singular_gram_is_infinite() {
        let (c, _) = spd_condition(&DMatrix::<f64>::zeros(2, 2));
        assert_eq!(c, f64::MAX);
        let (c, min) = spd_condition(&DMatrix::from_diagonal(&DVector::from_vec(vec![4.0f64, 2.0])));
        assert!((c - 2.0).abs() < 1e-12 && (min - 2.0).abs() < 1e-12);
    }

    #[test]
    fn complex_solve_reports_condition() {
        let a = DMatrix::from_diagonal(&DVector::from_vec(vec![Cplx::new(2.0f64, 0.0), Cplx::new(0.0, 1.0)]));
        let b = DMatrix::from_column_slice(2, 1, &[Cplx::new(2.0, 0.0), Cplx::new(1.0, 0.0)]);
        let (x, cond) = solve_with_condition(&a, &b).unwrap();
        assert!((x[(0, 0)] - Cplx::new(1.0, 0.0)).norm() < 1e-15);
        assert!((x[(1, 0)] - Cplx::new(0.0, -1.0)).norm() < 1e-15);
        assert!((cond - 2.0).abs() < 1e-12);
        assert!(solve_with_condition(&DMatrix::<Cplx<f64>>::zeros(2, 2), &b).is_none());
    }
}
