//! Fourth-order centred differences on a uniform periodic grid.

use std::ops::{Add, Mul, Sub};

/// First derivative, `(-q[j+2] + 8q[j+1] - 8q[j-1] + q[j-2]) / (12h)`.
pub fn d1<T>(q: &[T], h: f64) -> Vec<T>
where
    T: Copy + Add<Output = T> + Sub<Output = T> + Mul<f64, Output = T>,
{
    let len = q.len();
    let scale = 1.0 / (12.0 * h);
    (0..len)
        .map(|j| {
            let m2 = q[(j + len - 2) % len];
            let m1 = q[(j + len - 1) % len];
            let p1 = q[(j + 1) % len];
            let p2 = q[(j + 2) % len];
            ((p1 - m1) * 8.0 - (p2 - m2)) * scale
        })
        .collect()
}

/// Second derivative, `(-q[j+2] + 16q[j+1] - 30q[j] + 16q[j-1] - q[j-2]) / (12h²)`.
pub fn d2<T>(q: &[T], h: f64) -> Vec<T>
where
    T: Copy + Add<Output = T> + Sub<Output = T> + Mul<f64, Output = T>,
{
    let len = q.len();
    let scale = 1.0 / (12.0 * h * h);
    (0..len)
        .map(|j| {
            let m2 = q[(j + len - 2) % len];
            let m1 = q[(j + len - 1) % len];
            let c = q[j];
            let p1 = q[(j + 1) % len];
            let p2 = q[(j + 2) % len];
            ((p1 + m1) * 16.0 - (p2 + m2) - c * 30.0) * scale
        })
        .collect()
}

/// Arclength derivative `(1/√g) d/dφ` given the speed `√g = |z'|` per node.
pub fn d_ds(q: &[f64], speed: &[f64], h: f64) -> Vec<f64> {
    d1(q, h).into_iter().zip(speed).map(|(dq, s)| dq / s).collect()
}

/// Arclength Laplacian `(1/√g) d/dφ ((1/√g) dq/dφ)`.
pub fn laplace_s(q: &[f64], speed: &[f64], h: f64) -> Vec<f64> {
    d_ds(&d_ds(q, speed, h), speed, h)
}
