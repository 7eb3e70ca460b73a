//! Thomas algorithm for tridiagonal systems.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TridiagError {
    #[error("row {row} lost diagonal dominance: |diag| = {diag}, off-diagonal sum = {off}")]
    NotDominant { row: usize, diag: f64, off: f64 },
    #[error("zero pivot at row {0}")]
    ZeroPivot(usize),
}

/// Tridiagonal system `lower[i]·x[i−1] + diag[i]·x[i] + upper[i]·x[i+1] = rhs[i]`.
/// `lower[0]` and `upper[n−1]` are ignored.
#[derive(Debug, Clone, PartialEq)]
pub struct Tridiagonal {
    pub lower: Vec<f64>,
    pub diag: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Tridiagonal {
    pub fn zeros(n: usize) -> Self {
        Tridiagonal {
            lower: vec![0.0; n],
            diag: vec![0.0; n],
            upper: vec![0.0; n],
        }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// Fails on the first row where `|diag| < (1 − tol)·(|lower| + |upper|)`
    /// or the diagonal is not positive.
    pub fn check_dominance(&self, tol: f64) -> Result<(), TridiagError> {
        let n = self.len();
        for i in 0..n {
            let l = if i > 0 { self.lower[i].abs() } else { 0.0 };
            let u = if i + 1 < n { self.upper[i].abs() } else { 0.0 };
            let d = self.diag[i];
            if !(d > 0.0) || d < (1.0 - tol) * (l + u) {
                return Err(TridiagError::NotDominant { row: i, diag: d, off: l + u });
            }
        }
        Ok(())
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut s = self.diag[i] * x[i];
                if i > 0 {
                    s += self.lower[i] * x[i - 1];
                }
                if i + 1 < n {
                    s += self.upper[i] * x[i + 1];
                }
                s
            })
            .collect()
    }

    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>, TridiagError> {
        let n = self.len();
        assert_eq!(rhs.len(), n);
        let mut c = vec![0.0; n];
        let mut d = vec![0.0; n];
        let mut piv = self.diag[0];
        if piv == 0.0 {
            return Err(TridiagError::ZeroPivot(0));
        }
        c[0] = if n > 1 { self.upper[0] / piv } else { 0.0 };
        d[0] = rhs[0] / piv;
        for i in 1..n {
            piv = self.diag[i] - self.lower[i] * c[i - 1];
            if piv == 0.0 {
                return Err(TridiagError::ZeroPivot(i));
            }
            c[i] = if i + 1 < n { self.upper[i] / piv } else { 0.0 };
            d[i] = (rhs[i] - self.lower[i] * d[i - 1]) / piv;
        }
        for i in (0..n - 1).rev() {
            d[i] -= c[i] * d[i + 1];
        }
        Ok(d)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn solves_small_system() {
        let m = Tridiagonal {
            lower: vec![0.0, -1.0, -1.0],
            diag: vec![2.0, 2.0, 2.0],
            upper: vec![-1.0, -1.0, 0.0],
        };
        let x = m.solve(&[1.0, 0.0, 1.0]).unwrap();
        for xi in x {
            assert!((xi - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn single_row() {
        let m = Tridiagonal {
            lower: vec![0.0],
            diag: vec![4.0],
            upper: vec![0.0],
        };
        assert_eq!(m.solve(&[2.0]).unwrap(), vec![0.5]);
    }

    #[test]
    fn dominance_check() {
        let mut m = Tridiagonal::zeros(3);
        m.diag = vec![1.0, 1.0, 1.0];
        m.lower = vec![0.0, 0.6, 0.1];
        m.upper = vec![0.2, 0.6, 0.0];
        assert!(matches!(m.check_dominance(1e-12), Err(TridiagError::NotDominant { row: 1, .. })));
        m.upper[1] = 0.4;
        assert!(m.check_dominance(1e-12).is_ok());
        m.diag[2] = -1.0;
        assert!(m.check_dominance(1e-12).is_err());
    }

    proptest! {
        #[test]
        fn residual_is_small_for_dominant_systems(
            rows in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0, 0.1f64..2.0, -5.0f64..5.0), 2..40)
        ) {
            let n = rows.len();
            let mut m = Tridiagonal::zeros(n);
            let mut rhs = vec![0.0; n];
            for (i, (l, u, extra, r)) in rows.into_iter().enumerate() {
                m.lower[i] = if i > 0 { l } else { 0.0 };
                m.upper[i] = if i + 1 < n { u } else { 0.0 };
                m.diag[i] = m.lower[i].abs() + m.upper[i].abs() + extra;
                rhs[i] = r;
            }
            let x = m.solve(&rhs).unwrap();
            let back = m.mul_vec(&x);
            for (a, b) in back.iter().zip(&rhs) {
                prop_assert!((a - b).abs() < 1e-11);
            }
        }
    }
}
