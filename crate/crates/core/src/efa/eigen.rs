//! Dense symmetric eigensolver: Householder tridiagonalization followed by
//! the implicit QL iteration with Wilkinson-style shifts.
//!
//! Storage is column-major so that the inner loops of both phases walk
//! contiguous memory.

use ndarray::{Array1, Array2, Axis, ShapeBuilder};

use crate::error::{Error, Result};
use crate::Scalar;

const MAX_QL_ITERATIONS: usize = 64;

/// Eigenpairs of a symmetric matrix, eigenvalues descending, eigenvectors as columns.
#[derive(Debug, Clone)]
pub struct SymmetricEigen<T> {
    pub values: Array1<T>,
    pub vectors: Array2<T>,
}

fn check_input<T: Scalar>(a: &Array2<T>) -> Result<usize> {
    let (n, m) = a.dim();
    if n != m {
        return Err(Error::Numerical(format!("eigendecomposition of a {n}x{m} matrix")));
    }
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("matrix has non-finite entries".into()));
    }
    Ok(n)
}

fn column_major<T: Scalar>(a: &Array2<T>) -> Vec<T> {
    // Symmetric input: row-major and column-major layouts coincide, but copy
    // the lower triangle so that only it is trusted.
    let n = a.nrows();
    let mut w = vec![T::zero(); n * n];
    for c in 0..n {
        for r in 0..n {
            w[c * n + r] = if r >= c { a[[r, c]] } else { a[[c, r]] };
        }
    }
    w
}

/// All eigenpairs of the symmetric matrix `a` (lower triangle is read).
pub fn symmetric_eigen<T: Scalar>(a: &Array2<T>) -> Result<SymmetricEigen<T>> {
    let n = check_input(a)?;
    if n == 0 {
        return Ok(SymmetricEigen {
            values: Array1::zeros(0),
            vectors: Array2::zeros((0, 0)),
        });
    }
    let mut w = column_major(a);
    let mut d = vec![T::zero(); n];
    let mut e = vec![T::zero(); n];
    tridiagonalize(&mut w, n, &mut d, &mut e, true);
    ql_implicit(&mut d, &mut e, n, Some(&mut w))?;

    let order = descending_order(&d);
    let vectors = Array2::from_shape_vec((n, n).f(), w).expect("n*n buffer");
    Ok(SymmetricEigen {
        values: order.iter().map(|&i| d[i]).collect(),
        vectors: vectors.select(Axis(1), &order),
    })
}

/// Eigenvalues only, descending.
pub fn symmetric_eigenvalues<T: Scalar>(a: &Array2<T>) -> Result<Array1<T>> {
    let n = check_input(a)?;
    if n == 0 {
        return Ok(Array1::zeros(0));
    }
    let mut w = column_major(a);
    let mut d = vec![T::zero(); n];
    let mut e = vec![T::zero(); n];
    tridiagonalize(&mut w, n, &mut d, &mut e, false);
    ql_implicit(&mut d, &mut e, n, None)?;
    let order = descending_order(&d);
    Ok(order.iter().map(|&i| d[i]).collect())
}

fn descending_order<T: Scalar>(d: &[T]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..d.len()).collect();
    order.sort_by(|&a, &b| {
        d[b].partial_cmp(&d[a])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    order
}

/// Householder reduction to tridiagonal form. On return `d` holds the
/// diagonal and `e[1..]` the subdiagonal; with `accumulate`, `w` holds the
/// orthogonal transformation (column-major).
fn tridiagonalize<T: Scalar>(w: &mut [T], n: usize, d: &mut [T], e: &mut [T], accumulate: bool) {
    let zero = T::zero();
    for j in 0..n {
        d[j] = w[j * n + (n - 1)];
    }
    for i in (1..n).rev() {
        let mut scale = zero;
        let mut h = zero;
        for &dk in &d[..i] {
            scale += dk.abs();
        }
        if scale == zero {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = w[j * n + (i - 1)];
                w[j * n + i] = zero;
                w[i * n + j] = zero;
            }
        } else {
            for dk in &mut d[..i] {
                *dk /= scale;
                h += *dk * *dk;
            }
            let mut f = d[i - 1];
            let mut g = h.sqrt();
            if f > zero {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for ej in &mut e[..i] {
                *ej = zero;
            }
            for j in 0..i {
                f = d[j];
                w[i * n + j] = f;
                let col = &w[j * n..j * n + i];
                g = e[j] + col[j] * f;
                for k in j + 1..i {
                    g += col[k] * d[k];
                    e[k] += col[k] * f;
                }
                e[j] = g;
            }
            f = zero;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                let col = &mut w[j * n..j * n + i];
                for k in j..i {
                    col[k] -= f * e[k] + g * d[k];
                }
                d[j] = w[j * n + (i - 1)];
                w[j * n + i] = zero;
            }
        }
        d[i] = h;
    }

    if accumulate {
        for i in 0..n - 1 {
            w[i * n + (n - 1)] = w[i * n + i];
            w[i * n + i] = T::one();
            let h = d[i + 1];
            if h != zero {
                for k in 0..=i {
                    d[k] = w[(i + 1) * n + k] / h;
                }
                for j in 0..=i {
                    let (left, right) = w.split_at_mut((i + 1) * n);
                    let next = &right[..=i];
                    let col = &mut left[j * n..j * n + i + 1];
                    let g: T = next.iter().zip(col.iter()).map(|(&a, &b)| a * b).sum();
                    for (c, &dk) in col.iter_mut().zip(d.iter()) {
                        *c -= g * dk;
                    }
                }
            }
            for k in 0..=i {
                w[(i + 1) * n + k] = zero;
            }
        }
        for j in 0..n {
            d[j] = w[j * n + (n - 1)];
            w[j * n + (n - 1)] = zero;
        }
        w[(n - 1) * n + (n - 1)] = T::one();
    } else {
        for j in 0..n {
            d[j] = w[j * n + j];
        }
    }
    e[0] = zero;
}

/// Implicit QL on the tridiagonal (`d`, `e`), rotating `w`'s columns when given.
fn ql_implicit<T: Scalar>(d: &mut [T], e: &mut [T], n: usize, mut w: Option<&mut [T]>) -> Result<()> {
    let zero = T::zero();
    let one = T::one();
    let two = one + one;
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = zero;

    let mut f = zero;
    let mut tst1 = zero;
    let eps = T::epsilon();
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 && e[m].abs() > eps * tst1 {
            m += 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > MAX_QL_ITERATIONS {
                    return Err(Error::Numerical(format!(
                        "QL iteration did not converge for eigenvalue {l}"
                    )));
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (two * e[l]);
                let mut r = p.hypot(one);
                if p < zero {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in &mut d[l + 2..n] {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = one;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = zero;
                let mut s2 = zero;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    if let Some(w) = w.as_deref_mut() {
                        let (left, right) = w.split_at_mut((i + 1) * n);
                        let ci = &mut left[i * n..];
                        let ci1 = &mut right[..n];
                        for (a, b) in ci.iter_mut().zip(ci1.iter_mut()) {
                            let t = *b;
                            *b = s * *a + c * t;
                            *a = c * *a - s * t;
                        }
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = zero;
    }
    Ok(())
}
