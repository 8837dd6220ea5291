//! Orthogonal Varimax rotation by pairwise planar rotations (Kaiser's method).

use ndarray::{Array2, Axis};
use serde::{Deserialize, Serialize};

use super::uls::normalize_signs;
use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VarimaxOptions {
    /// Scale rows to unit communality before rotating.
    pub kaiser_normalize: bool,
    /// Stop when a full sweep improves the criterion by less than this.
    pub tol: f64,
    /// Maximum number of sweeps over all factor pairs.
    pub max_iter: usize,
}

impl Default for VarimaxOptions {
    fn default() -> Self {
        VarimaxOptions {
            kaiser_normalize: true,
            tol: 1e-10,
            max_iter: 1000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Varimax<T> {
    /// `loadings · rotation`, columns sign-normalized and ordered by
    /// descending sum of squared loadings.
    pub rotated: Array2<T>,
    pub rotation: Array2<T>,
    /// Criterion of the (normalized, if requested) loadings before the first
    /// sweep and after each sweep.
    pub criterion_trace: Vec<T>,
    pub sweeps: usize,
    pub converged: bool,
}

/// `Σ_f [ Σ_i λ_if⁴ / p − (Σ_i λ_if² / p)² ]`.
pub fn varimax_criterion<T: Scalar>(loadings: &Array2<T>) -> T {
    let p = T::of_usize(loadings.nrows().max(1));
    loadings
        .axis_iter(Axis(1))
        .map(|col| {
            let (s2, s4) = col.iter().fold((T::zero(), T::zero()), |(a, b), &x| {
                let x2 = x * x;
                (a + x2, b + x2 * x2)
            });
            s4 / p - (s2 / p) * (s2 / p)
        })
        .sum()
}

/// Optimal planar angle for columns `a`, `b` of `m`.
fn pair_angle<T: Scalar>(m: &Array2<T>, a: usize, b: usize) -> T {
    let p = T::of_usize(m.nrows());
    let two = T::of(2.0);
    let (mut sa, mut sb, mut sc, mut sd) = (T::zero(), T::zero(), T::zero(), T::zero());
    for row in m.axis_iter(Axis(0)) {
        let (x, y) = (row[a], row[b]);
        let u = x * x - y * y;
        let v = two * x * y;
        sa += u;
        sb += v;
        sc += u * u - v * v;
        sd += u * v;
    }
    let num = two * sd - two * sa * sb / p;
    let den = sc - (sa * sa - sb * sb) / p;
    num.atan2(den) / T::of(4.0)
}

fn rotate_pair<T: Scalar>(m: &mut Array2<T>, a: usize, b: usize, cos: T, sin: T) {
    for mut row in m.axis_iter_mut(Axis(0)) {
        let (x, y) = (row[a], row[b]);
        row[a] = x * cos + y * sin;
        row[b] = -x * sin + y * cos;
    }
}

/// Rotate `loadings` (`p × k`) to maximize the Varimax criterion.
pub fn varimax_rotate<T: Scalar>(loadings: &Array2<T>, opts: &VarimaxOptions) -> Varimax<T> {
    let (p, k) = loadings.dim();
    if k <= 1 || p == 0 {
        return Varimax {
            rotated: loadings.clone(),
            rotation: Array2::eye(k),
            criterion_trace: vec![varimax_criterion(loadings)],
            sweeps: 0,
            converged: true,
        };
    }

    let scale: Vec<T> = loadings
        .axis_iter(Axis(0))
        .map(|row| {
            let h: T = row.iter().map(|&x| x * x).sum::<T>().sqrt();
            if opts.kaiser_normalize && h > T::zero() {
                h
            } else {
                T::one()
            }
        })
        .collect();
    let mut work = loadings.clone();
    for (mut row, &s) in work.axis_iter_mut(Axis(0)).zip(&scale) {
        row.mapv_inplace(|x| x / s);
    }

    let mut rotation = Array2::<T>::eye(k);
    let mut trace = vec![varimax_criterion(&work)];
    let tol = T::of(opts.tol);
    let mut sweeps = 0;
    let mut converged = false;
    let negligible = T::epsilon();
    while sweeps < opts.max_iter {
        sweeps += 1;
        for a in 0..k - 1 {
            for b in a + 1..k {
                let phi = pair_angle(&work, a, b);
                if phi.abs() <= negligible {
                    continue;
                }
                let (sin, cos) = phi.sin_cos();
                rotate_pair(&mut work, a, b, cos, sin);
                rotate_pair(&mut rotation, a, b, cos, sin);
            }
        }
        let current = varimax_criterion(&work);
        let improvement = current - *trace.last().expect("trace starts non-empty");
        trace.push(current);
        if improvement < tol {
            converged = true;
            break;
        }
    }

    let mut rotated = loadings.dot(&rotation);

    // Order by explained variance, then fix signs; apply both to the rotation.
    let ssq: Vec<T> = rotated
        .axis_iter(Axis(1))
        .map(|c| c.iter().map(|&x| x * x).sum())
        .collect();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&i, &j| {
        ssq[j]
            .partial_cmp(&ssq[i])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(i.cmp(&j))
    });
    rotated = rotated.select(Axis(1), &order);
    rotation = rotation.select(Axis(1), &order);
    let flipped = normalize_signs(&mut rotated);
    for (mut col, f) in rotation.axis_iter_mut(Axis(1)).zip(flipped) {
        if f {
            col.mapv_inplace(|x| -x);
        }
    }

    Varimax {
        rotated,
        rotation,
        criterion_trace: trace,
        sweeps,
        converged,
    }
}
