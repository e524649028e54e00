//! Central finite differences and midpoint quadrature on a cell-centred grid.

use alloc::vec::Vec;

/// Ghost-cell policy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    Periodic,
    /// Ghost cells copy the boundary cell, i.e. hold the far-field value of
    /// data that is flat near the ends.
    FarFieldClamp,
}

#[inline]
fn at(f: &[f64], i: isize, b: Boundary) -> f64 {
    let m = f.len() as isize;
    let j = match b {
        Boundary::Periodic => i.rem_euclid(m),
        Boundary::FarFieldClamp => i.clamp(0, m - 1),
    };
    f[j as usize]
}

/// First derivative with a central stencil of order 2 or 4.
pub fn derivative(f: &[f64], dx: f64, order: usize, b: Boundary) -> Vec<f64> {
    let m = f.len() as isize;
    (0..m)
        .map(|i| {
            if order >= 4 {
                (8.0 * (at(f, i + 1, b) - at(f, i - 1, b)) - (at(f, i + 2, b) - at(f, i - 2, b)))
                    / (12.0 * dx)
            } else {
                (at(f, i + 1, b) - at(f, i - 1, b)) / (2.0 * dx)
            }
        })
        .collect()
}

/// Second derivative, 3-point stencil.
pub fn second_derivative(f: &[f64], dx: f64, b: Boundary) -> Vec<f64> {
    let m = f.len() as isize;
    (0..m)
        .map(|i| (at(f, i + 1, b) - 2.0 * at(f, i, b) + at(f, i - 1, b)) / (dx * dx))
        .collect()
}

/// Midpoint rule.
pub fn integrate(f: &[f64], dx: f64) -> f64 {
    f.iter().sum::<f64>() * dx
}

/// Discrete inner product `Σ a·b dx`.
pub fn inner(a: &[f64], b: &[f64], dx: f64) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>() * dx
}
