//! Seeded random states and density triples for the analysis reports.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use strata_core::hamiltonian::HamiltonianModel;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A physically ordered point state of `model` (momentum coordinates for
/// free-surface models).
pub fn random_state(model: &HamiltonianModel, rng: &mut ChaCha8Rng) -> Vec<f64> {
    match model {
        HamiltonianModel::FreeSurface { rho, g } => {
            let n = rho.len();
            let v = 0.3 * g.sqrt();
            let mut p: Vec<f64> = (0..n).map(|_| rng.random_range(0.2..1.0)).collect();
            p.extend(rho.iter().map(|r| r * rng.random_range(-v..v)));
            p
        }
        HamiltonianModel::Symmetric {
            g,
            h,
            rho_bar,
            rho_delta,
        } => {
            let crit = (g * h * rho_bar * rho_delta / 2.0).sqrt();
            vec![
                h * rng.random_range(0.02..0.48),
                crit * rng.random_range(-1.5..1.5),
            ]
        }
        other => {
            let h = other.h().unwrap_or(1.0);
            let k = other.dim() / 2;
            let mut z = Vec::with_capacity(2 * k);
            let mut upper = h * rng.random_range(0.4..0.9);
            for _ in 0..k {
                z.push(upper);
                upper *= rng.random_range(0.1..0.9);
            }
            for _ in 0..k {
                z.push(rng.random_range(-0.1..0.1));
            }
            z
        }
    }
}

/// Strictly increasing positive densities.
pub fn density_triple(rng: &mut ChaCha8Rng) -> [f64; 3] {
    let r1 = rng.random_range(0.1..1.0);
    let r2 = r1 + rng.random_range(0.05..1.0);
    let r3 = r2 + rng.random_range(0.05..1.0);
    [r1, r2, r3]
}

/// i.i.d. uniform samples in (−1, 1).
pub fn noise(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}
