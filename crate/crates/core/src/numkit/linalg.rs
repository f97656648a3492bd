//! Dense complex linear algebra on top of `faer`.
//!
//! Solves go through partial-pivoting LU. Eigenvalues are only used for
//! diagnostics.

use crate::error::{Error, Result};
use faer::linalg::solvers::{DenseSolveCore, PartialPivLu};
use faer::prelude::*;
use faer::{c64, Mat, MatRef};

pub type CMat = Mat<c64>;

pub fn to_complex(a: MatRef<'_, f64>) -> CMat {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| c64::new(a[(i, j)], 0.0))
}

/// Rows `rows` and columns `cols` of `a`, in the given order.
pub fn select(a: MatRef<'_, c64>, rows: &[usize], cols: &[usize]) -> CMat {
    Mat::from_fn(rows.len(), cols.len(), |i, j| a[(rows[i], cols[j])])
}

pub fn select_rows(a: MatRef<'_, c64>, rows: &[usize]) -> CMat {
    Mat::from_fn(rows.len(), a.ncols(), |i, j| a[(rows[i], j)])
}

pub fn select_cols(a: MatRef<'_, c64>, cols: &[usize]) -> CMat {
    Mat::from_fn(a.nrows(), cols.len(), |i, j| a[(i, cols[j])])
}

/// Maximum absolute row sum.
pub fn norm_inf(a: MatRef<'_, c64>) -> f64 {
    (0..a.nrows())
        .map(|i| (0..a.ncols()).map(|j| a[(i, j)].norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Maximum absolute column sum.
pub fn norm_one(a: MatRef<'_, c64>) -> f64 {
    (0..a.ncols())
        .map(|j| a.col(j).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub fn max_abs(a: MatRef<'_, c64>) -> f64 {
    let mut m = 0.0f64;
    for j in 0..a.ncols() {
        for z in a.col(j).iter() {
            m = m.max(z.norm());
        }
    }
    m
}

pub fn singular_values(a: MatRef<'_, c64>) -> Result<Vec<f64>> {
    a.singular_values()
        .map_err(|e| Error::Factorization(format!("singular value decomposition: {e:?}")))
}

/// Largest singular value.
pub fn norm_2(a: MatRef<'_, c64>) -> Result<f64> {
    Ok(singular_values(a)?.first().copied().unwrap_or(0.0))
}

pub fn eigenvalues(a: MatRef<'_, c64>) -> Result<Vec<c64>> {
    a.eigenvalues()
        .map_err(|e| Error::Factorization(format!("eigenvalue iteration: {e:?}")))
}

/// LU factorization with a finiteness check on the factors.
pub struct Lu {
    inner: PartialPivLu<c64>,
    n: usize,
}

impl Lu {
    pub fn new(a: MatRef<'_, c64>) -> Result<Self> {
        if a.nrows() != a.ncols() {
            return Err(Error::Dimension(format!(
                "LU of a non-square {}x{} matrix",
                a.nrows(),
                a.ncols()
            )));
        }
        let inner = a.partial_piv_lu();
        let u = inner.U();
        let n = a.nrows();
        for i in 0..n {
            let d = u[(i, i)];
            if d == c64::new(0.0, 0.0) || !d.re.is_finite() || !d.im.is_finite() {
                return Err(Error::Factorization(format!("zero or non-finite pivot at {i}")));
            }
        }
        Ok(Lu { inner, n })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn solve(&self, b: MatRef<'_, c64>) -> CMat {
        self.inner.solve(b)
    }

    pub fn solve_vec(&self, b: &[c64]) -> Vec<c64> {
        let rhs = Mat::from_fn(b.len(), 1, |i, _| b[i]);
        let x = self.inner.solve(rhs.as_ref());
        (0..b.len()).map(|i| x[(i, 0)]).collect()
    }

    pub fn inverse(&self) -> CMat {
        self.inner.inverse()
    }

    /// Lower estimate of `||A^{-1}||_1` from a few solves with `A` and
    /// `A^H` (Hager's method with Higham's extra test vector). Usually within
    /// a factor of 3 of the true norm.
    pub fn inverse_norm_one_estimate(&self) -> f64 {
        let n = self.n;
        if n == 0 {
            return 0.0;
        }
        let col = |v: &[c64]| Mat::from_fn(n, 1, |i, _| v[i]);
        let l1 = |m: &CMat| (0..n).map(|i| m[(i, 0)].norm()).sum::<f64>();
        let mut x = vec![c64::new(1.0 / n as f64, 0.0); n];
        let mut est = 0.0f64;
        let mut last_j = usize::MAX;
        for iter in 0..5 {
            let y = self.inner.solve(col(&x).as_ref());
            let new_est = l1(&y);
            if iter > 0 && new_est <= est {
                break;
            }
            est = new_est;
            let xi: Vec<c64> = (0..n)
                .map(|i| {
                    let v = y[(i, 0)];
                    let a = v.norm();
                    if a == 0.0 { c64::new(1.0, 0.0) } else { v / a }
                })
                .collect();
            let z = self.inner.solve_adjoint(col(&xi).as_ref());
            let (mut j, mut zmax) = (0, 0.0);
            for i in 0..n {
                if z[(i, 0)].norm() > zmax {
                    zmax = z[(i, 0)].norm();
                    j = i;
                }
            }
            let ztx: f64 = (0..n).map(|i| (z[(i, 0)].conj() * x[i]).re).sum();
            if iter > 0 && (zmax <= ztx || j == last_j) {
                break;
            }
            last_j = j;
            x = vec![c64::new(0.0, 0.0); n];
            x[j] = c64::new(1.0, 0.0);
        }
        let denom = (n.max(2) - 1) as f64;
        let b: Vec<c64> = (0..n)
            .map(|i| {
                let s = if i % 2 == 0 { 1.0 } else { -1.0 };
                c64::new(s * (1.0 + i as f64 / denom), 0.0)
            })
            .collect();
        let alt = 2.0 * l1(&self.inner.solve(col(&b).as_ref())) / (3.0 * n as f64);
        est.max(alt)
    }
}

pub fn solve(a: MatRef<'_, c64>, b: MatRef<'_, c64>) -> Result<CMat> {
    Ok(Lu::new(a)?.solve(b))
}

pub fn inverse(a: MatRef<'_, c64>) -> Result<CMat> {
    Ok(Lu::new(a)?.inverse())
}

/// `||A||_1 ||A^{-1}||_1`, with the inverse formed explicitly.
pub fn cond_one(a: MatRef<'_, c64>) -> Result<f64> {
    let inv = inverse(a)?;
    Ok(norm_one(a) * norm_one(inv.as_ref()))
}

/// `||A||_1` times an estimate of `||A^{-1}||_1` from the LU factors.
pub fn cond_one_estimate(a: MatRef<'_, c64>, lu: &Lu) -> f64 {
    norm_one(a) * lu.inverse_norm_one_estimate()
}

pub fn mat_vec(a: MatRef<'_, c64>, x: &[c64]) -> Vec<c64> {
    let mut y = vec![c64::new(0.0, 0.0); a.nrows()];
    for (j, &xj) in x.iter().enumerate() {
        if xj == c64::new(0.0, 0.0) {
            continue;
        }
        for (i, &aij) in a.col(j).iter().enumerate() {
            y[i] += aij * xj;
        }
    }
    y
}

pub fn identity(n: usize) -> CMat {
    Mat::identity(n, n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(n: usize, m: usize, rng: &mut ChaCha8Rng) -> CMat {
        Mat::from_fn(n, m, |_, _| c64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
    }

    #[test]
    fn backward_stable_solves() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for &n in &[1usize, 7, 64, 400] {
            let mut a = random(n, n, &mut rng);
            for i in 0..n {
                a[(i, i)] += c64::new(2.0 * (n as f64).sqrt(), 0.0);
            }
            let b = random(n, 3, &mut rng);
            let x = solve(a.as_ref(), b.as_ref()).unwrap();
            let r = &a * &x - &b;
            let rel = norm_inf(r.as_ref()) / (norm_inf(a.as_ref()) * norm_inf(x.as_ref()));
            assert!(rel <= 1e-13, "n={n}: {rel:.2e}");
        }
    }

    #[test]
    fn inverse_and_condition() {
        let mut a = identity(4);
        a[(0, 0)] = c64::new(1e-3, 0.0);
        let inv = inverse(a.as_ref()).unwrap();
        assert!((inv[(0, 0)].re - 1e3).abs() < 1e-9);
        assert!((cond_one(a.as_ref()).unwrap() - 1e3).abs() < 1e-9);
    }

    #[test]
    fn condition_estimate_brackets_exact_value() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for &n in &[1usize, 5, 40, 120] {
            for scale in [1.0, 1e-6] {
                let mut a = random(n, n, &mut rng);
                for i in 0..n {
                    a[(n - 1 - i, i)] += c64::new(0.3, 0.0);
                }
                // one nearly dependent row pair drives the condition number up
                if n > 1 {
                    for j in 0..n {
                        let v = a[(0, j)] + c64::new(scale, 0.0) * a[(1, j)];
                        a[(1, j)] = v;
                    }
                }
                let exact = cond_one(a.as_ref()).unwrap();
                let lu = Lu::new(a.as_ref()).unwrap();
                let est = cond_one_estimate(a.as_ref(), &lu);
                assert!(est <= exact * (1.0 + 1e-10), "n={n}: {est:e} > {exact:e}");
                assert!(est >= exact / 10.0, "n={n}: {est:e} << {exact:e}");
            }
        }
    }

    #[test]
    fn singular_matrix_rejected() {
        let a = Mat::<c64>::zeros(3, 3);
        assert!(Lu::new(a.as_ref()).is_err());
        let r = Mat::<c64>::zeros(2, 3);
        assert!(matches!(Lu::new(r.as_ref()), Err(Error::Dimension(_))));
    }

    #[test]
    fn norms_and_selection() {
        let a = Mat::from_fn(2, 3, |i, j| c64::new((i * 3 + j) as f64, 0.0));
        assert_eq!(norm_inf(a.as_ref()), 12.0);
        assert_eq!(norm_one(a.as_ref()), 7.0);
        let s = select(a.as_ref(), &[1, 0], &[2]);
        assert_eq!(s[(0, 0)].re, 5.0);
        assert_eq!(s[(1, 0)].re, 2.0);
        let y = mat_vec(a.as_ref(), &[c64::new(1.0, 0.0); 3]);
        assert_eq!(y[1].re, 12.0);
    }

    #[test]
    fn eigenvalues_of_diagonal() {
        let mut a = identity(3);
        a[(1, 1)] = c64::new(0.0, 2.0);
        let mut ev = eigenvalues(a.as_ref()).unwrap();
        ev.sort_by(|x, y| x.im.partial_cmp(&y.im).unwrap());
        assert!((ev[2] - c64::new(0.0, 2.0)).norm() < 1e-14);
        assert!((norm_2(a.as_ref()).unwrap() - 2.0).abs() < 1e-14);
    }
}
