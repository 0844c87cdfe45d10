//! Least-squares polynomial fitting via Householder QR.

use crate::scalar::Scalar;

/// Coefficients `c[0] + c[1] t + ... + c[degree] t^degree` minimising the
/// squared residual. Requires `xs.len() > degree`.
pub fn polyfit<T: Scalar>(xs: &[T], ys: &[T], degree: usize) -> Vec<T> {
    assert_eq!(xs.len(), ys.len());
    let cols = degree + 1;
    let rows = xs.len();
    assert!(rows >= cols, "need at least {cols} points for degree {degree}");

    // Column-major Vandermonde matrix.
    let mut a: Vec<Vec<T>> = (0..cols)
        .map(|j| xs.iter().map(|&x| x.powi(j as i32)).collect())
        .collect();
    let mut b = ys.to_vec();

    for k in 0..cols {
        let norm = a[k][k..].iter().map(|&v| v * v).sum::<T>().sqrt();
        if norm == T::zero() {
            continue;
        }
        let alpha = if a[k][k] > T::zero() { -norm } else { norm };
        let mut v: Vec<T> = a[k][k..].to_vec();
        v[0] = v[0] - alpha;
        let vnorm2: T = v.iter().map(|&x| x * x).sum();
        if vnorm2 == T::zero() {
            continue;
        }
        let two = T::one() + T::one();
        for col in a.iter_mut().skip(k) {
            let dot: T = v.iter().zip(&col[k..]).map(|(&p, &q)| p * q).sum();
            let f = two * dot / vnorm2;
            for (c, &vi) in col[k..].iter_mut().zip(&v) {
                *c = *c - f * vi;
            }
        }
        let dot: T = v.iter().zip(&b[k..]).map(|(&p, &q)| p * q).sum();
        let f = two * dot / vnorm2;
        for (c, &vi) in b[k..].iter_mut().zip(&v) {
            *c = *c - f * vi;
        }
    }

    let mut coeffs = vec![T::zero(); cols];
    for i in (0..cols).rev() {
        let mut acc = b[i];
        for j in i + 1..cols {
            acc = acc - a[j][i] * coeffs[j];
        }
        coeffs[i] = if a[i][i] == T::zero() { T::zero() } else { acc / a[i][i] };
    }
    coeffs
}

/// Horner evaluation.
pub fn polyval<T: Scalar>(coeffs: &[T], x: T) -> T {
    coeffs.iter().rev().fold(T::zero(), |acc, &c| acc * x + c)
}
