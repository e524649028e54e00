//! Built-in initial profiles, each with its exact x-derivative.

use alloc::vec::Vec;

/// Piecewise-parabolic thicknesses `(η₂, η₃)` of the pressure-imbalance
/// benchmark at position `x`, channel height `h`.
pub fn figure3(h: f64, x: f64) -> (f64, f64) {
    let eta3 = if -1.0 < x && x < 1.0 {
        h / 4.0 * (1.0 - x * x) + h / 5.0
    } else {
        h / 5.0
    };
    let eta2 = if 0.0 < x && x < 2.0 {
        h / 3.0 * (x * x - 2.0 * x) + 2.0 * h / 5.0
    } else {
        2.0 * h / 5.0
    };
    (eta2, eta3)
}

/// Canonical fields `(ζ₁, ζ₂, σ₁, σ₂)` of the benchmark at rest.
pub fn figure3_canonical(h: f64, xs: &[f64]) -> Vec<Vec<f64>> {
    let mut z1 = Vec::with_capacity(xs.len());
    let mut z2 = Vec::with_capacity(xs.len());
    for &x in xs {
        let (e2, e3) = figure3(h, x);
        z1.push(e2 + e3);
        z2.push(e3);
    }
    let zeros = alloc::vec![0.0; xs.len()];
    alloc::vec![z1, z2, zeros.clone(), zeros]
}

/// `base + amplitude·exp(−((x − center)/width)²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bump {
    pub base: f64,
    pub amplitude: f64,
    pub center: f64,
    pub width: f64,
}

impl Bump {
    pub fn flat(base: f64) -> Self {
        Self {
            base,
            amplitude: 0.0,
            center: 0.0,
            width: 1.0,
        }
    }

    pub fn value(&self, x: f64) -> f64 {
        let s = (x - self.center) / self.width;
        self.base + self.amplitude * libm::exp(-s * s)
    }

    pub fn slope(&self, x: f64) -> f64 {
        let s = (x - self.center) / self.width;
        -2.0 * s / self.width * self.amplitude * libm::exp(-s * s)
    }

    pub fn sample(&self, xs: &[f64]) -> Vec<f64> {
        xs.iter().map(|&x| self.value(x)).collect()
    }
}

/// Samples one bump per field.
pub fn sample_bumps(bumps: &[Bump], xs: &[f64]) -> Vec<Vec<f64>> {
    bumps.iter().map(|b| b.sample(xs)).collect()
}
