//! Jacobi-matrix kernels: Golub-Welsch via implicit QL and the
//! shifted-QR Christoffel step.

use crate::error::{Error, Result};
use crate::real::Real;

const MAX_QL_SWEEPS: usize = 100;

/// Eigenvalues of the `n`-by-`n` Jacobi matrix built from `alpha[..n]`
/// and `sqrt(beta[1..n])`, together with the squared first components of
/// the normalized eigenvectors. Eigenvalues are returned ascending.
pub(crate) fn jacobi_eigen<T: Real>(alpha: &[T], beta: &[T], n: usize) -> Result<(Vec<T>, Vec<T>)> {
    if alpha.len() < n || beta.len() < n {
        return Err(Error::Capacity {
            needed: n,
            available: alpha.len().min(beta.len()),
        });
    }
    let mut d: Vec<T> = alpha[..n].to_vec();
    let mut e: Vec<T> = (0..n)
        .map(|i| {
            if i + 1 < n {
                beta[i + 1].sqrt()
            } else {
                T::zero()
            }
        })
        .collect();
    let mut z = vec![T::zero(); n];
    if n > 0 {
        z[0] = T::one();
    }
    let eps = T::epsilon();
    let two = T::from_f64(2.0);

    for l in 0..n {
        let mut sweeps = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= eps * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            sweeps += 1;
            if sweeps > MAX_QL_SWEEPS {
                return Err(Error::numeric(format!(
                    "implicit QL failed to converge for eigenvalue {l} of {n}"
                )));
            }
            let mut g = (d[l + 1] - d[l]) / (two * e[l]);
            let mut r = g.hypot(T::one());
            let shifted = if g >= T::zero() { g + r } else { g - r };
            g = d[m] - d[l] + e[l] / shifted;
            let mut s = T::one();
            let mut c = T::one();
            let mut p = T::zero();
            let mut deflated = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == T::zero() {
                    d[i + 1] -= p;
                    e[m] = T::zero();
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + two * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                let zf = z[i + 1];
                z[i + 1] = s * z[i] + c * zf;
                z[i] = c * z[i] - s * zf;
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = T::zero();
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].partial_cmp(&d[j]).unwrap_or(std::cmp::Ordering::Equal));
    let nodes = order.iter().map(|&i| d[i]).collect();
    let first = order.iter().map(|&i| z[i] * z[i]).collect();
    Ok((nodes, first))
}

/// Gauss nodes and weights from recurrence coefficients.
pub(crate) fn gauss_nodes_weights<T: Real>(
    alpha: &[T],
    beta: &[T],
    n: usize,
) -> Result<(Vec<T>, Vec<T>)> {
    let (nodes, first) = jacobi_eigen(alpha, beta, n)?;
    let mass = beta[0];
    Ok((nodes, first.into_iter().map(|v| v * mass).collect()))
}

/// One Christoffel step by the linear factor `t - shift` (`above`) or
/// `shift - t`.
///
/// Factors `±(J - shift I) = L L^T` with `L` lower bidiagonal and forms
/// `shift I ± L^T L` with the last row and column dropped, which is the
/// Jacobi matrix of the modified measure. Only the squares of the
/// entries of `L` are needed, so no square roots are taken. Output length
/// is one less than the input; `beta[0]` of the result is
/// `beta[0] * |alpha[0] - shift|`.
pub(crate) fn christoffel_linear<T: Real>(
    alpha: &[T],
    beta: &[T],
    shift: T,
    above: bool,
) -> (Vec<T>, Vec<T>) {
    let m = alpha.len().min(beta.len());
    if m < 2 {
        return (Vec::new(), Vec::new());
    }
    let signed = |x: T| if above { x } else { -x };
    // pivots u_k = l_k^2 and sub-diagonal squares v_k = (m_k)^2
    let mut u = Vec::with_capacity(m);
    let mut v = Vec::with_capacity(m - 1);
    u.push(signed(alpha[0] - shift));
    for k in 0..m - 1 {
        let vk = beta[k + 1] / u[k];
        v.push(vk);
        u.push(signed(alpha[k + 1] - shift) - vk);
    }

    let mut new_alpha = Vec::with_capacity(m - 1);
    let mut new_beta = Vec::with_capacity(m - 1);
    new_beta.push(beta[0] * u[0]);
    for k in 0..m - 1 {
        new_alpha.push(shift + signed(u[k] + v[k]));
        if k + 1 < m - 1 {
            new_beta.push(v[k] * u[k + 1]);
        }
    }
    (new_alpha, new_beta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::real::DoubleDouble;

    fn legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
        let alpha = vec![0.0; n];
        let beta = (0..n)
            .map(|k| {
                if k == 0 {
                    2.0
                } else {
                    let k = k as f64;
                    k * k / (4.0 * k * k - 1.0)
                }
            })
            .collect();
        (alpha, beta)
    }

    #[test]
    fn two_point_gauss_legendre() {
        let (a, b) = legendre(4);
        let (x, w) = gauss_nodes_weights(&a, &b, 2).unwrap();
        let g = 1.0 / 3f64.sqrt();
        assert!((x[0] + g).abs() < 1e-15 && (x[1] - g).abs() < 1e-15);
        assert!((w[0] - 1.0).abs() < 1e-14 && (w[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn eigen_in_double_double() {
        let a = vec![DoubleDouble::from_f64(0.0); 6];
        let b: Vec<DoubleDouble> = (0..6)
            .map(|k| {
                let k = DoubleDouble::from_usize(k);
                if k.to_f64() == 0.0 {
                    DoubleDouble::from_f64(2.0)
                } else {
                    k * k / (DoubleDouble::from_f64(4.0) * k * k - DoubleDouble::from_f64(1.0))
                }
            })
            .collect();
        let (x, w) = gauss_nodes_weights(&a, &b, 2).unwrap();
        let g = (DoubleDouble::from_f64(1.0) / DoubleDouble::from_f64(3.0)).sqrt();
        assert!((x[1] - g).abs().to_f64() < 1e-30);
        assert!((w[0] - DoubleDouble::from_f64(1.0)).abs().to_f64() < 1e-29);
    }

    #[test]
    fn christoffel_step_gives_radau_node() {
        // (1+t) dt on [-1,1]: alpha_0 = 1/3, beta_0 = 2
        let (a, b) = legendre(5);
        let (na, nb) = christoffel_linear(&a, &b, -1.0, true);
        assert_eq!(na.len(), 4);
        assert!((na[0] - 1.0 / 3.0).abs() < 1e-15);
        assert!((nb[0] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn capacity_is_checked() {
        let (a, b) = legendre(3);
        assert!(matches!(
            jacobi_eigen(&a, &b, 4),
            Err(Error::Capacity { .. })
        ));
    }
}
