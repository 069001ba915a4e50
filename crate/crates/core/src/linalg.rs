//! Small dense eigen routines: Householder reduction to tridiagonal form and
//! implicit-shift QL. Used for the Lanczos projections, the dense
//! cross-check path, and density-matrix spectra.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Real;

const QL_MAX_SWEEPS: usize = 60;

/// Eigenvalues in ascending order and, optionally, the matching eigenvectors
/// as columns of a row-major `n × n` matrix.
#[derive(Debug, Clone)]
pub struct Eigen<R> {
    pub values: Vec<R>,
    pub vectors: Option<Vec<R>>,
    pub n: usize,
}

impl<R: Real> Eigen<R> {
    /// Component `k` of eigenvector `j`.
    pub fn vector_entry(&self, k: usize, j: usize) -> R {
        self.vectors.as_ref().expect("eigenvectors requested")[k * self.n + j]
    }
}

/// Symmetric tridiagonal eigenproblem. `off[i]` couples rows `i` and `i+1`.
pub fn tridiagonal_eigen<R: Real>(diag: &[R], off: &[R], want_vectors: bool) -> Result<Eigen<R>> {
    let n = diag.len();
    if n == 0 {
        return Ok(Eigen {
            values: vec![],
            vectors: want_vectors.then(Vec::new),
            n,
        });
    }
    if off.len() + 1 != n {
        return Err(Error::LengthMismatch {
            expected: n - 1,
            got: off.len(),
        });
    }
    let mut d = diag.to_vec();
    let mut e: Vec<R> = off.iter().copied().chain([R::zero()]).collect();
    let mut z = want_vectors.then(|| {
        let mut z = vec![R::zero(); n * n];
        for i in 0..n {
            z[i * n + i] = R::one();
        }
        z
    });
    ql_implicit(&mut d, &mut e, z.as_deref_mut(), n)?;
    Ok(sorted(d, z, n))
}

fn sorted<R: Real>(d: Vec<R>, z: Option<Vec<R>>, n: usize) -> Eigen<R> {
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].partial_cmp(&d[b]).unwrap_or(std::cmp::Ordering::Equal));
    let values = order.iter().map(|&i| d[i]).collect();
    let vectors = z.map(|z| {
        let mut out = vec![R::zero(); n * n];
        for (new_j, &old_j) in order.iter().enumerate() {
            for k in 0..n {
                out[k * n + new_j] = z[k * n + old_j];
            }
        }
        out
    });
    Eigen { values, vectors, n }
}

/// Implicit QL with Wilkinson-style shifts on a tridiagonal matrix. On
/// return `d` holds eigenvalues (unsorted) and columns of `z` are rotated by
/// the accumulated transformations.
fn ql_implicit<R: Real>(d: &mut [R], e: &mut [R], mut z: Option<&mut [R]>, n: usize) -> Result<()> {
    let two = R::lit(2.0);
    let eps = R::epsilon();
    let anorm = (0..n).fold(R::zero(), |m, i| m.max(d[i].abs() + e[i].abs()));
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= eps * dd.max(anorm) {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > QL_MAX_SWEEPS {
                return Err(Error::NoConvergence {
                    iterations: iter,
                    residual: e[l].to_f64_lossy().abs(),
                });
            }
            let mut g = (d[l + 1] - d[l]) / (two * e[l]);
            let mut r = g.hypot(R::one());
            let signed_r = if g >= R::zero() { r.abs() } else { -r.abs() };
            g = d[m] - d[l] + e[l] / (g + signed_r);
            let (mut s, mut c, mut p) = (R::one(), R::one(), R::zero());
            let mut underflow = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == R::zero() {
                    d[i + 1] = d[i + 1] - p;
                    e[m] = R::zero();
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + two * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                if let Some(z) = z.as_deref_mut() {
                    for k in 0..n {
                        let f = z[k * n + i + 1];
                        z[k * n + i + 1] = s * z[k * n + i] + c * f;
                        z[k * n + i] = c * z[k * n + i] - s * f;
                    }
                }
            }
            if underflow {
                continue;
            }
            d[l] = d[l] - p;
            e[l] = g;
            e[m] = R::zero();
        }
    }
    Ok(())
}

/// Full eigendecomposition of a dense real symmetric matrix (row-major).
pub fn symmetric_eigen<R: Real>(a: &[R], n: usize, want_vectors: bool) -> Result<Eigen<R>> {
    if a.len() != n * n {
        return Err(Error::LengthMismatch {
            expected: n * n,
            got: a.len(),
        });
    }
    if n == 0 {
        return tridiagonal_eigen(&[], &[], want_vectors);
    }
    // 1-based working copy keeps the Householder loop bounds readable
    let w = n + 1;
    let mut m = vec![R::zero(); w * w];
    for i in 0..n {
        for j in 0..n {
            m[(i + 1) * w + j + 1] = a[i * n + j];
        }
    }
    let mut d = vec![R::zero(); w];
    let mut e = vec![R::zero(); w];
    householder_tridiagonalize(&mut m, &mut d, &mut e, n, want_vectors);

    let mut d0: Vec<R> = d[1..].to_vec();
    // e[i] couples i-1 and i; shift so that e0[i] couples i and i+1
    let mut e0: Vec<R> = e[2..].iter().copied().chain([R::zero()]).collect();
    let mut z = want_vectors.then(|| {
        let mut z = vec![R::zero(); n * n];
        for i in 0..n {
            for j in 0..n {
                z[i * n + j] = m[(i + 1) * w + j + 1];
            }
        }
        z
    });
    ql_implicit(&mut d0, &mut e0, z.as_deref_mut(), n)?;
    Ok(sorted(d0, z, n))
}

/// Householder reduction, 1-based indices into a `(n+1)²` buffer. Leaves the
/// diagonal in `d[1..=n]`, the subdiagonal in `e[2..=n]`, and (when
/// requested) the orthogonal transform in `a`.
fn householder_tridiagonalize<R: Real>(a: &mut [R], d: &mut [R], e: &mut [R], n: usize, vectors: bool) {
    let w = n + 1;
    let at = |i: usize, j: usize| i * w + j;
    for i in (2..=n).rev() {
        let l = i - 1;
        let mut h = R::zero();
        if l > 1 {
            let scale: R = (1..=l).map(|k| a[at(i, k)].abs()).sum();
            if scale == R::zero() {
                e[i] = a[at(i, l)];
            } else {
                for k in 1..=l {
                    a[at(i, k)] = a[at(i, k)] / scale;
                    h = h + a[at(i, k)] * a[at(i, k)];
                }
                let f = a[at(i, l)];
                let g = if f >= R::zero() { -h.sqrt() } else { h.sqrt() };
                e[i] = scale * g;
                h = h - f * g;
                a[at(i, l)] = f - g;
                let mut f = R::zero();
                for j in 1..=l {
                    if vectors {
                        a[at(j, i)] = a[at(i, j)] / h;
                    }
                    let mut g = R::zero();
                    for k in 1..=j {
                        g = g + a[at(j, k)] * a[at(i, k)];
                    }
                    for k in j + 1..=l {
                        g = g + a[at(k, j)] * a[at(i, k)];
                    }
                    e[j] = g / h;
                    f = f + e[j] * a[at(i, j)];
                }
                let hh = f / (h + h);
                for j in 1..=l {
                    let f = a[at(i, j)];
                    let g = e[j] - hh * f;
                    e[j] = g;
                    for k in 1..=j {
                        a[at(j, k)] = a[at(j, k)] - (f * e[k] + g * a[at(i, k)]);
                    }
                }
            }
        } else {
            e[i] = a[at(i, l)];
        }
        d[i] = h;
    }
    d[1] = R::zero();
    e[1] = R::zero();
    for i in 1..=n {
        if vectors {
            let l = i - 1;
            if d[i] != R::zero() {
                for j in 1..=l {
                    let mut g = R::zero();
                    for k in 1..=l {
                        g = g + a[at(i, k)] * a[at(k, j)];
                    }
                    for k in 1..=l {
                        a[at(k, j)] = a[at(k, j)] - g * a[at(k, i)];
                    }
                }
            }
            d[i] = a[at(i, i)];
            a[at(i, i)] = R::one();
            for j in 1..=l {
                a[at(j, i)] = R::zero();
                a[at(i, j)] = R::zero();
            }
        } else {
            d[i] = a[at(i, i)];
        }
    }
}

/// Eigenvalues of a Hermitian matrix (row-major), ascending.
///
/// Uses the real symmetric embedding `[[Re, −Im], [Im, Re]]`, whose spectrum
/// is the Hermitian spectrum with every eigenvalue doubled.
pub fn hermitian_eigenvalues<R: Real>(a: &[Complex<R>], n: usize) -> Result<Vec<R>> {
    if a.len() != n * n {
        return Err(Error::LengthMismatch {
            expected: n * n,
            got: a.len(),
        });
    }
    let m = 2 * n;
    let mut big = vec![R::zero(); m * m];
    for i in 0..n {
        for j in 0..n {
            let z = a[i * n + j];
            big[i * m + j] = z.re;
            big[(i + n) * m + j + n] = z.re;
            big[i * m + j + n] = -z.im;
            big[(i + n) * m + j] = z.im;
        }
    }
    let eig = symmetric_eigen(&big, m, false)?;
    Ok(eig.values.into_iter().step_by(2).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn residual(a: &[f64], n: usize, eig: &Eigen<f64>) -> f64 {
        let mut worst = 0.0f64;
        for j in 0..n {
            for i in 0..n {
                let av: f64 = (0..n).map(|k| a[i * n + k] * eig.vector_entry(k, j)).sum();
                worst = worst.max((av - eig.values[j] * eig.vector_entry(i, j)).abs());
            }
        }
        worst
    }

    #[test]
    fn two_by_two_closed_form() {
        let eig = tridiagonal_eigen(&[1.0, 3.0], &[2.0], true).unwrap();
        let disc = (1.0f64 + 4.0).sqrt() * 2.0 / 2.0;
        assert!((eig.values[0] - (2.0 - disc)).abs() < 1e-14);
        assert!((eig.values[1] - (2.0 + disc)).abs() < 1e-14);
    }

    #[test]
    fn path_graph_spectrum() {
        // Laplacian-free path adjacency: eigenvalues 2 cos(kπ/(n+1))
        let n = 12;
        let eig = tridiagonal_eigen(&vec![0.0; n], &vec![1.0; n - 1], false).unwrap();
        let mut want: Vec<f64> = (1..=n)
            .map(|k| 2.0 * (k as f64 * std::f64::consts::PI / (n as f64 + 1.0)).cos())
            .collect();
        want.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (g, w) in eig.values.iter().zip(&want) {
            assert!((g - w).abs() < 1e-13);
        }
    }

    #[test]
    fn random_symmetric_residuals_and_orthogonality() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for n in [1, 2, 3, 7, 20, 33] {
            let mut a = vec![0.0; n * n];
            for i in 0..n {
                for j in 0..=i {
                    let x = rng.gen_range(-1.0..1.0);
                    a[i * n + j] = x;
                    a[j * n + i] = x;
                }
            }
            let eig = symmetric_eigen(&a, n, true).unwrap();
            assert!(residual(&a, n, &eig) < 1e-12, "n = {n}");
            for p in 0..n {
                for q in 0..n {
                    let dot: f64 = (0..n).map(|k| eig.vector_entry(k, p) * eig.vector_entry(k, q)).sum();
                    let want = if p == q { 1.0 } else { 0.0 };
                    assert!((dot - want).abs() < 1e-12);
                }
            }
            let trace: f64 = (0..n).map(|i| a[i * n + i]).sum();
            assert!((eig.values.iter().sum::<f64>() - trace).abs() < 1e-12);
            let values_only = symmetric_eigen(&a, n, false).unwrap();
            for (x, y) in values_only.values.iter().zip(&eig.values) {
                assert!((x - y).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn degenerate_spectrum() {
        let n = 6;
        let a: Vec<f64> = (0..n * n).map(|k| if k % (n + 1) == 0 { 2.0 } else { 0.0 }).collect();
        let eig = symmetric_eigen(&a, n, true).unwrap();
        assert!(eig.values.iter().all(|&v| (v - 2.0).abs() < 1e-15));
    }

    #[test]
    fn hermitian_pauli_y() {
        let z = Complex::new(0.0, 0.0);
        let a = vec![z, Complex::new(0.0, -1.0), Complex::new(0.0, 1.0), z];
        let vals: Vec<f64> = hermitian_eigenvalues(&a, 2).unwrap();
        assert!((vals[0] + 1.0f64).abs() < 1e-14 && (vals[1] - 1.0f64).abs() < 1e-14);
    }

    #[test]
    fn works_in_single_precision() {
        let eig = symmetric_eigen(&[2.0f32, 1.0, 1.0, 2.0], 2, true).unwrap();
        assert!((eig.values[0] - 1.0).abs() < 1e-6 && (eig.values[1] - 3.0).abs() < 1e-6);
    }
}
