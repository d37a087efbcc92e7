//! Dense helpers for small Hermitian matrices: determinants via LU with
//! partial pivoting and eigenvalues via Jacobi rotations on the real
//! symmetric embedding.

use num_complex::Complex64;

/// Determinant of a dense complex matrix (row-major, n x n).
pub fn det_complex(data: &[Complex64], n: usize) -> Complex64 {
    assert_eq!(data.len(), n * n);
    let mut a = data.to_vec();
    let mut det = Complex64::new(1.0, 0.0);
    for col in 0..n {
        // partial pivot
        let mut pivot = col;
        let mut best = a[col * n + col].norm();
        for row in (col + 1)..n {
            let v = a[row * n + col].norm();
            if v > best {
                best = v;
                pivot = row;
            }
        }
        if best == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        if pivot != col {
            for j in 0..n {
                a.swap(col * n + j, pivot * n + j);
            }
            det = -det;
        }
        let d = a[col * n + col];
        det *= d;
        for row in (col + 1)..n {
            let f = a[row * n + col] / d;
            if f.norm() == 0.0 {
                continue;
            }
            for j in col..n {
                let v = a[col * n + j];
                a[row * n + j] -= f * v;
            }
        }
    }
    det
}

/// Eigenvalues of a Hermitian matrix via its 2n x 2n real symmetric
/// embedding [[Re, -Im], [Im, Re]]; each eigenvalue appears twice, so the
/// deduplicated ascending list of n values is returned.
pub fn hermitian_eigenvalues(data: &[Complex64], n: usize) -> Vec<f64> {
    assert_eq!(data.len(), n * n);
    let m = 2 * n;
    let mut a = vec![0.0f64; m * m];
    for i in 0..n {
        for j in 0..n {
            let v = data[i * n + j];
            a[i * m + j] = v.re;
            a[i * m + (n + j)] = -v.im;
            a[(n + i) * m + j] = v.im;
            a[(n + i) * m + (n + j)] = v.re;
        }
    }
    let mut eig = jacobi_eigenvalues(&mut a, m);
    eig.sort_by(|x, y| x.partial_cmp(y).unwrap());
    // doubled spectrum: take every other entry
    (0..n).map(|i| (eig[2 * i] + eig[2 * i + 1]) / 2.0).collect()
}

fn jacobi_eigenvalues(a: &mut [f64], n: usize) -> Vec<f64> {
    for _sweep in 0..100 {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[p * n + q] * a[p * n + q];
            }
        }
        if off.sqrt() < 1e-14 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let tau = (aqq - app) / (2.0 * apq);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
            }
        }
    }
    (0..n).map(|i| a[i * n + i]).collect()
}
