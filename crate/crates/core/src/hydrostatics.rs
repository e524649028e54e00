//! Hydrostatic layer pressures, bottom pressure and its gradient, and the
//! far-field pressure imbalance.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::model::{LayerConfig, Lid, PrimitiveState};
use crate::stencil::{derivative, integrate, Boundary};
use crate::{Error, Result};

/// Pressure in layer `layer` (0 = top) at height `z`, given the bottom
/// pressure `p0` and the local thicknesses `eta` (top to bottom).
pub fn layer_pressure(
    config: &LayerConfig,
    eta: &[f64],
    p0: f64,
    layer: usize,
    z: f64,
) -> Result<f64> {
    let n = config.n();
    if eta.len() != n {
        return Err(Error::Shape {
            expected: n,
            found: eta.len(),
        });
    }
    if layer >= n {
        return Err(Error::Domain(format!("layer {layer} out of range")));
    }
    let rho = config.rho();
    let lower: f64 = eta[layer + 1..].iter().sum();
    let upper = lower + eta[layer];
    let slack = 1e-12 * (1.0 + upper.abs());
    if z < lower - slack || z > upper + slack {
        return Err(Error::Domain(format!(
            "z = {z} outside layer {layer} [{lower}, {upper}]"
        )));
    }
    let g = config.g();
    let above_bottom: f64 = (layer + 1..n).map(|k| rho[k] * eta[k]).sum();
    Ok(p0 - g * above_bottom - rho[layer] * g * (z - lower))
}

/// P⁰ = g Σ ρₖηₖ for a free-surface configuration.
pub fn free_surface_bottom_pressure(
    config: &LayerConfig,
    state: &PrimitiveState,
) -> Result<Vec<f64>> {
    if config.lid() != Lid::FreeSurface {
        return Err(Error::Misuse(
            "bottom pressure is algebraic only with a free surface".into(),
        ));
    }
    if state.eta.len() != config.n() {
        return Err(Error::Shape {
            expected: config.n(),
            found: state.eta.len(),
        });
    }
    let m = state.cells();
    let rho = config.rho();
    Ok((0..m)
        .map(|c| {
            config.g()
                * (0..config.n())
                    .map(|k| rho[k] * state.eta[k][c])
                    .sum::<f64>()
        })
        .collect())
}

/// Horizontal bottom-pressure gradient under a rigid lid, any n:
///
/// P⁰ₓ = [−Σ(ηᵢūᵢ²)ₓ + g Σᵢ Σ_{k>i} (ρₖ−ρᵢ)/ρᵢ ηₖₓ ηᵢ] / Σ ηᵢ/ρᵢ
pub fn rigid_lid_bottom_pressure_gradient(
    config: &LayerConfig,
    state: &PrimitiveState,
    dx: f64,
    order: usize,
    boundary: Boundary,
) -> Result<Vec<f64>> {
    config.require_h()?;
    let n = config.n();
    if state.eta.len() != n || state.u.len() != n {
        return Err(Error::Shape {
            expected: n,
            found: state.eta.len(),
        });
    }
    let m = state.cells();
    let rho = config.rho();
    let g = config.g();
    let eta_x: Vec<Vec<f64>> = state
        .eta
        .iter()
        .map(|f| derivative(f, dx, order, boundary))
        .collect();
    let flux2: Vec<f64> = (0..m)
        .map(|c| {
            (0..n)
                .map(|i| state.eta[i][c] * state.u[i][c] * state.u[i][c])
                .sum()
        })
        .collect();
    let flux2_x = derivative(&flux2, dx, order, boundary);
    let mut out = vec![0.0; m];
    for c in 0..m {
        let mut buoy = 0.0;
        let mut den = 0.0;
        for i in 0..n {
            den += state.eta[i][c] / rho[i];
            for k in i + 1..n {
                buoy += (rho[k] - rho[i]) / rho[i] * eta_x[k][c] * state.eta[i][c];
            }
        }
        out[c] = (-flux2_x[c] + g * buoy) / den;
    }
    Ok(out)
}

/// Result of [`pressure_imbalance`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Imbalance {
    /// ∫ P⁰ₓ dx over the domain.
    pub value: f64,
    /// False when some layer is not flat at the domain ends; the integral
    /// is then not a far-field difference.
    pub flat_far_field: bool,
}

/// P_Δ = ∫ P⁰ₓ dx with the midpoint rule.
pub fn pressure_imbalance(
    config: &LayerConfig,
    state: &PrimitiveState,
    dx: f64,
    order: usize,
    boundary: Boundary,
) -> Result<Imbalance> {
    let px = rigid_lid_bottom_pressure_gradient(config, state, dx, order, boundary)?;
    let h = config.require_h()?;
    let tol = 1e-12 * h;
    let flat = |f: &[f64]| {
        let m = f.len();
        m >= 3
            && (f[0] - f[1]).abs() <= tol
            && (f[1] - f[2]).abs() <= tol
            && (f[m - 1] - f[m - 2]).abs() <= tol
            && (f[m - 2] - f[m - 3]).abs() <= tol
    };
    let flat_far_field = state.eta.iter().chain(state.u.iter()).all(|f| flat(f));
    Ok(Imbalance {
        value: integrate(&px, dx),
        flat_far_field,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bottom_reference() {
        let c = LayerConfig::rigid(alloc::vec![0.5, 0.75, 1.0], 1.0, 1.0).unwrap();
        let p = layer_pressure(&c, &[0.25, 0.5, 0.25], 7.0, 2, 0.0).unwrap();
        assert_eq!(p, 7.0);
        assert!(layer_pressure(&c, &[0.25, 0.5, 0.25], 7.0, 2, 0.5).is_err());
    }
}
