//! Characteristic matrices `A(u)` for `u_t + A(u) u_x = 0`, hyperbolicity
//! classification, and Nijenhuis/Haantjes tensors.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::hamiltonian::{HamiltonianModel, Variant};
use crate::linalg::{Complex, Matrix, Tensor3};
use crate::model::{LayerConfig, Lid};
use crate::{Error, Result};

/// A state-dependent characteristic matrix with derivative access.
pub trait QuasilinearSystem {
    fn dim(&self) -> usize;

    fn matrix(&self, u: &[f64]) -> Result<Matrix>;

    /// `d[(i, k, l)] = ∂A^i_k/∂u^l`. Defaults to central differences with
    /// step `1e−6·(1 + |u^l|)`.
    fn derivative(&self, u: &[f64]) -> Result<Tensor3> {
        fd_derivative(self, u, 1e-6)
    }
}

/// Central-difference `∂A/∂u` with relative step `delta`.
pub fn fd_derivative<S: QuasilinearSystem + ?Sized>(
    sys: &S,
    u: &[f64],
    delta: f64,
) -> Result<Tensor3> {
    let n = sys.dim();
    let mut d = Tensor3::zeros(n);
    let mut q = u.to_vec();
    for l in 0..n {
        let s = delta * (1.0 + u[l].abs());
        q[l] = u[l] + s;
        let ap = sys.matrix(&q)?;
        q[l] = u[l] - s;
        let am = sys.matrix(&q)?;
        q[l] = u[l];
        for i in 0..n {
            for k in 0..n {
                d[(i, k, l)] = (ap[(i, k)] - am[(i, k)]) / (2.0 * s);
            }
        }
    }
    Ok(d)
}

/// The model variants with a characteristic matrix.
#[derive(Debug, Clone, PartialEq)]
pub enum System {
    /// `(η₁, η₂, ū₁, ū₂)`.
    FreeSurface2 { g: f64, rho: [f64; 2] },
    /// `(η₁..ηₙ, ū₁..ūₙ)`.
    FreeSurfaceN { g: f64, rho: Vec<f64> },
    /// `(ζ₁, ζ₂, σ₁, σ₂)`; A is the state Jacobian of the Hamiltonian flux.
    RigidLid3(HamiltonianModel),
    /// `(ζ₁, ζ₂, σ₁, σ₂)`, closed form.
    Boussinesq3 { g: f64, h: f64, rho: [f64; 3] },
    /// `(ζ, σ)`, closed form.
    Symmetric {
        g: f64,
        h: f64,
        rho_bar: f64,
        rho_delta: f64,
    },
}

pub fn build_system(config: &LayerConfig, variant: Variant) -> Result<System> {
    let g = config.g();
    let free = config.lid() == Lid::FreeSurface;
    let mismatch = || {
        Error::Config(format!(
            "variant {variant:?} does not fit this configuration"
        ))
    };
    match variant {
        Variant::FreeSurface2 => match (free, config.rho()) {
            (true, [a, b]) => Ok(System::FreeSurface2 { g, rho: [*a, *b] }),
            _ => Err(mismatch()),
        },
        Variant::FreeSurface3 | Variant::FreeSurfaceN => {
            if !free || (variant == Variant::FreeSurface3 && config.n() != 3) {
                return Err(mismatch());
            }
            Ok(System::FreeSurfaceN {
                g,
                rho: config.rho().to_vec(),
            })
        }
        Variant::RigidLid3 => Ok(System::RigidLid3(HamiltonianModel::new(
            config,
            Variant::RigidLid3,
        )?)),
        Variant::Boussinesq3 => {
            let (rho, h) = config.rigid3().map_err(|_| mismatch())?;
            Ok(System::Boussinesq3 { g, h, rho })
        }
        Variant::Symmetric => {
            let (rho, h) = config.rigid3().map_err(|_| mismatch())?;
            Ok(System::Symmetric {
                g,
                h,
                rho_bar: config.mean_density(),
                rho_delta: rho[2] - rho[1],
            })
        }
        Variant::RigidLidN => Err(Error::Misuse(
            "no characteristic matrix for the n-layer rigid lid".into(),
        )),
    }
}

/// Characteristic matrix `[[0, I], [I, 0]]·Hess` of a canonical Hamiltonian
/// flow `u_t = −[[0, I], [I, 0]] ∂ₓ∇h`; `order` selects the Hessian stencil.
pub fn hamiltonian_characteristic(
    model: &HamiltonianModel,
    u: &[f64],
    order: usize,
) -> Result<Matrix> {
    Ok(swap_halves(&model.hessian(u, order)?))
}

fn swap_halves(m: &Matrix) -> Matrix {
    let n = m.dim();
    let k = n / 2;
    Matrix::from_fn(n, |i, j| m[((i + k) % n, j)])
}

fn free_surface_matrix(g: f64, rho: &[f64], u: &[f64]) -> Matrix {
    let n = rho.len();
    let mut a = Matrix::zeros(2 * n);
    for i in 0..n {
        a[(i, i)] = u[n + i];
        a[(i, n + i)] = u[i];
        a[(n + i, n + i)] = u[n + i];
        for k in 0..n {
            a[(n + i, k)] = g * rho[i.min(k)] / rho[i];
        }
    }
    a
}

/// Entries of the Boussinesq matrix for `u_t = M u_x`, scaled by `hρ̄`.
fn boussinesq_entries(g: f64, h: f64, rho: &[f64; 3], u: &[f64]) -> Matrix {
    let [z1, z2, s1, s2] = [u[0], u[1], u[2], u[3]];
    let rb = (rho[0] + rho[1] + rho[2]) / 3.0;
    let gt = g * h * rb;
    let d1 = (2.0 * z1 - h) * s1 + s2 * z2;
    let d2 = (z1 - h) * s1 + (2.0 * z2 - h) * s2;
    Matrix::from_rows([
        [d1, (z1 - h) * s2, z1 * (z1 - h), z2 * (z1 - h)],
        [z2 * s1, d2, z2 * (z1 - h), z2 * (z2 - h)],
        [s1 * s1 + gt * (rho[0] - rho[1]), s1 * s2, d1, z2 * s1],
        [s1 * s2, s2 * s2 + gt * (rho[1] - rho[2]), (z1 - h) * s2, d2],
    ])
}

fn check_len(u: &[f64], n: usize) -> Result<()> {
    if u.len() != n {
        return Err(Error::Shape {
            expected: n,
            found: u.len(),
        });
    }
    Ok(())
}

impl QuasilinearSystem for System {
    fn dim(&self) -> usize {
        match self {
            System::FreeSurface2 { .. } => 4,
            System::FreeSurfaceN { rho, .. } => 2 * rho.len(),
            System::RigidLid3(_) | System::Boussinesq3 { .. } => 4,
            System::Symmetric { .. } => 2,
        }
    }

    fn matrix(&self, u: &[f64]) -> Result<Matrix> {
        check_len(u, self.dim())?;
        Ok(match self {
            System::FreeSurface2 { g, rho } => free_surface_matrix(*g, rho, u),
            System::FreeSurfaceN { g, rho } => free_surface_matrix(*g, rho, u),
            System::RigidLid3(model) => swap_halves(&model.hessian(u, 4)?),
            System::Boussinesq3 { g, h, rho } => {
                let rb = (rho[0] + rho[1] + rho[2]) / 3.0;
                boussinesq_entries(*g, *h, rho, u).scale(-1.0 / (h * rb))
            }
            System::Symmetric {
                g,
                h,
                rho_bar,
                rho_delta,
            } => {
                let (z, s) = (u[0], u[1]);
                let c = -1.0 / (rho_bar * h);
                Matrix::from_rows([
                    [c * (4.0 * z - h) * s, c * z * (2.0 * z - h)],
                    [
                        c * (2.0 * s * s - g * rho_bar * rho_delta * h),
                        c * (4.0 * z - h) * s,
                    ],
                ])
            }
        })
    }

    fn derivative(&self, u: &[f64]) -> Result<Tensor3> {
        check_len(u, self.dim())?;
        match self {
            System::FreeSurface2 { rho, .. } => Ok(free_surface_derivative(rho.len())),
            System::FreeSurfaceN { rho, .. } => Ok(free_surface_derivative(rho.len())),
            System::RigidLid3(_) => fd_derivative(self, u, 1e-4),
            System::Boussinesq3 { h, rho, .. } => Ok(boussinesq_derivative(*h, rho, u)),
            System::Symmetric { h, rho_bar, .. } => {
                let (z, s) = (u[0], u[1]);
                let c = -1.0 / (rho_bar * h);
                let mut d = Tensor3::zeros(2);
                d[(0, 0, 0)] = c * 4.0 * s;
                d[(0, 0, 1)] = c * (4.0 * z - h);
                d[(0, 1, 0)] = c * (4.0 * z - h);
                d[(1, 0, 1)] = c * 4.0 * s;
                d[(1, 1, 0)] = c * 4.0 * s;
                d[(1, 1, 1)] = c * (4.0 * z - h);
                Ok(d)
            }
        }
    }
}

fn free_surface_derivative(n: usize) -> Tensor3 {
    let mut d = Tensor3::zeros(2 * n);
    for i in 0..n {
        d[(i, i, n + i)] = 1.0;
        d[(i, n + i, i)] = 1.0;
        d[(n + i, n + i, n + i)] = 1.0;
    }
    d
}

fn boussinesq_derivative(h: f64, rho: &[f64; 3], u: &[f64]) -> Tensor3 {
    let [z1, z2, s1, s2] = [u[0], u[1], u[2], u[3]];
    let rb = (rho[0] + rho[1] + rho[2]) / 3.0;
    let c = -1.0 / (h * rb);
    // (row, col, [∂ζ₁, ∂ζ₂, ∂σ₁, ∂σ₂]) of the unscaled entries.
    let d1 = [2.0 * s1, s2, 2.0 * z1 - h, z2];
    let d2 = [s1, 2.0 * s2, z1 - h, 2.0 * z2 - h];
    let entries: [(usize, usize, [f64; 4]); 16] = [
        (0, 0, d1),
        (0, 1, [s2, 0.0, 0.0, z1 - h]),
        (0, 2, [2.0 * z1 - h, 0.0, 0.0, 0.0]),
        (0, 3, [z2, z1 - h, 0.0, 0.0]),
        (1, 0, [0.0, s1, z2, 0.0]),
        (1, 1, d2),
        (1, 2, [z2, z1 - h, 0.0, 0.0]),
        (1, 3, [0.0, 2.0 * z2 - h, 0.0, 0.0]),
        (2, 0, [0.0, 0.0, 2.0 * s1, 0.0]),
        (2, 1, [0.0, 0.0, s2, s1]),
        (2, 2, d1),
        (2, 3, [0.0, s1, z2, 0.0]),
        (3, 0, [0.0, 0.0, s2, s1]),
        (3, 1, [0.0, 0.0, 0.0, 2.0 * s2]),
        (3, 2, [s2, 0.0, 0.0, z1 - h]),
        (3, 3, d2),
    ];
    let mut d = Tensor3::zeros(4);
    for (i, k, g) in entries {
        for l in 0..4 {
            d[(i, k, l)] = c * g[l];
        }
    }
    d
}

/// Outcome of [`classify_hyperbolicity`].
#[derive(Debug, Clone, PartialEq)]
pub enum Hyperbolicity {
    /// Real, diagonalizable; speeds sorted ascending.
    Hyperbolic(Vec<f64>),
    /// Some eigenvalues form a complex pair.
    Elliptic(Vec<Complex>),
    /// Real spectrum with a repeated eigenvalue lacking eigenvectors.
    Degenerate(Vec<f64>),
}

impl Hyperbolicity {
    pub fn is_hyperbolic(&self) -> bool {
        matches!(self, Hyperbolicity::Hyperbolic(_))
    }

    /// Largest |λ| (real part for complex eigenvalues).
    pub fn max_speed(&self) -> f64 {
        match self {
            Hyperbolicity::Hyperbolic(v) | Hyperbolicity::Degenerate(v) => {
                v.iter().fold(0.0, |a, x| f64::max(a, x.abs()))
            }
            Hyperbolicity::Elliptic(v) => v.iter().fold(0.0, |a, x| f64::max(a, x.abs())),
        }
    }
}

/// Spectrum of a matrix classified with reality tolerance `tol`
/// (|Im λ| < tol·(1 + |λ|)).
pub fn classify_matrix(a: &Matrix, tol: f64) -> Result<Hyperbolicity> {
    if !a.is_finite() {
        return Err(Error::NonFinite("characteristic matrix".into()));
    }
    let eig = a
        .eigenvalues()
        .ok_or_else(|| Error::NonFinite("eigenvalue iteration did not converge".into()))?;
    let n = eig.len();
    let scale = 1.0 + eig.iter().fold(0.0f64, |m, c| m.max(c.abs()));
    // A defective double root splits by about sqrt(ε·‖A‖) under rounding.
    let cluster = 1e-6 * scale;
    let mut used = vec![false; n];
    let mut real = Vec::with_capacity(n);
    let mut degenerate = false;
    for i in 0..n {
        if used[i] {
            continue;
        }
        let mut group = vec![i];
        for j in i + 1..n {
            if !used[j]
                && (eig[j].re - eig[i].re).abs() < cluster
                && (eig[j].im - eig[i].im).abs() < 2.0 * cluster
            {
                group.push(j);
            }
        }
        for &j in &group {
            used[j] = true;
        }
        let re = group.iter().map(|&j| eig[j].re).sum::<f64>() / group.len() as f64;
        let im_max = group.iter().fold(0.0f64, |m, &j| m.max(eig[j].im.abs()));
        if group.len() == 1 {
            if im_max >= tol * (1.0 + eig[i].abs()) {
                return Ok(Hyperbolicity::Elliptic(eig));
            }
            real.push(re);
            continue;
        }
        if im_max >= cluster {
            return Ok(Hyperbolicity::Elliptic(eig));
        }
        let shifted = a.sub(&Matrix::identity(a.dim()).scale(re));
        let nullity = a.dim() - shifted.rank(1e-6 * a.max_abs().max(1e-300));
        if nullity < group.len() {
            degenerate = true;
        }
        for _ in 0..group.len() {
            real.push(re);
        }
    }
    real.sort_by(|x, y| x.total_cmp(y));
    Ok(if degenerate {
        Hyperbolicity::Degenerate(real)
    } else {
        Hyperbolicity::Hyperbolic(real)
    })
}

pub fn classify_hyperbolicity<S: QuasilinearSystem + ?Sized>(
    sys: &S,
    u: &[f64],
    tol: f64,
) -> Result<Hyperbolicity> {
    classify_matrix(&sys.matrix(u)?, tol)
}

/// Closed-form characteristic speeds of the symmetric reduction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CharSpeeds {
    Real { minus: f64, plus: f64 },
    Complex { re: f64, im: f64 },
}

pub fn symmetric_char_speeds(config: &LayerConfig, zeta: f64, sigma: f64) -> Result<CharSpeeds> {
    let (rho, h) = config.rigid3()?;
    if !(zeta > 0.0 && zeta < h / 2.0) {
        return Err(Error::Domain(format!("ζ = {zeta} outside (0, h/2)")));
    }
    let rb = config.mean_density();
    let rd = rho[2] - rho[1];
    let g = config.g();
    let centre = sigma * (h - 4.0 * zeta) / (rb * h);
    let rad = zeta * (h - 2.0 * zeta) * (g * h * rb * rd - 2.0 * sigma * sigma);
    let w = libm::sqrt(rad.abs()) / (rb * h);
    Ok(if rad >= 0.0 {
        CharSpeeds::Real {
            minus: centre - w,
            plus: centre + w,
        }
    } else {
        CharSpeeds::Complex { re: centre, im: w }
    })
}

/// Haantjes tensor components with lower indices `j < k`.
#[derive(Debug, Clone, PartialEq)]
pub struct HaantjesResult {
    pub dim: usize,
    /// `(i, j, k, value)`, zero-based, `j < k`.
    pub components: Vec<(usize, usize, usize, f64)>,
    pub max_abs: f64,
    pub threshold: f64,
    /// Zero-based `(i, j, k)` with |value| above `threshold`.
    pub nonvanishing: Vec<(usize, usize, usize)>,
}

impl HaantjesResult {
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        if j == k {
            return 0.0;
        }
        let (a, b, s) = if j < k { (j, k, 1.0) } else { (k, j, -1.0) };
        self.components
            .iter()
            .find(|c| c.0 == i && c.1 == a && c.2 == b)
            .map_or(0.0, |c| s * c.3)
    }
}

/// Full Nijenhuis torsion `N[(i, j, k)]`.
pub fn nijenhuis(a: &Matrix, d: &Tensor3) -> Tensor3 {
    let n = a.dim();
    let mut t = Tensor3::zeros(n);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let mut s = 0.0;
                for l in 0..n {
                    s += a[(l, j)] * d[(i, k, l)]
                        - a[(l, k)] * d[(i, j, l)]
                        - a[(i, l)] * (d[(l, k, j)] - d[(l, j, k)]);
                }
                t[(i, j, k)] = s;
            }
        }
    }
    t
}

/// Full Haantjes tensor from the matrix and its torsion.
pub fn haantjes_full(a: &Matrix, nt: &Tensor3) -> Tensor3 {
    let n = a.dim();
    let aa = a.mul(a);
    let mut h = Tensor3::zeros(n);
    // N contracted with A on one lower index: NA1[p,q,k] = N^p_{q'k} A^{q'}_q, NA2[p,j,q] = N^p_{jq'} A^{q'}_q
    let mut na1 = Tensor3::zeros(n);
    let mut na2 = Tensor3::zeros(n);
    for p in 0..n {
        for q in 0..n {
            for k in 0..n {
                let mut s1 = 0.0;
                let mut s2 = 0.0;
                for r in 0..n {
                    s1 += nt[(p, r, k)] * a[(r, q)];
                    s2 += nt[(p, q, r)] * a[(r, k)];
                }
                na1[(p, q, k)] = s1;
                na2[(p, q, k)] = s2;
            }
        }
    }
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let mut s = 0.0;
                for q in 0..n {
                    s += aa[(i, q)] * nt[(q, j, k)];
                }
                for p in 0..n {
                    for q in 0..n {
                        s += nt[(i, p, q)] * a[(p, j)] * a[(q, k)];
                    }
                }
                for p in 0..n {
                    s -= a[(i, p)] * (na1[(p, j, k)] + na2[(p, j, k)]);
                }
                h[(i, j, k)] = s;
            }
        }
    }
    h
}

/// Haantjes tensor at `u` with the non-vanishing threshold
/// `1e−8·max(1, ‖A‖³·‖∂A‖)` (max-abs norms).
pub fn haantjes<S: QuasilinearSystem + ?Sized>(sys: &S, u: &[f64]) -> Result<HaantjesResult> {
    let a = sys.matrix(u)?;
    let d = sys.derivative(u)?;
    if !a.is_finite() || !d.is_finite() {
        return Err(Error::NonFinite("characteristic matrix derivative".into()));
    }
    let n = a.dim();
    let h = haantjes_full(&a, &nijenhuis(&a, &d));
    let na = a.max_abs();
    let threshold = 1e-8 * f64::max(1.0, na * na * na * d.max_abs());
    let mut components = Vec::with_capacity(n * n * (n - 1) / 2);
    let mut nonvanishing = Vec::new();
    let mut max_abs = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            for k in j + 1..n {
                let v = h[(i, j, k)];
                components.push((i, j, k, v));
                max_abs = max_abs.max(v.abs());
                if v.abs() > threshold {
                    nonvanishing.push((i, j, k));
                }
            }
        }
    }
    Ok(HaantjesResult {
        dim: n,
        components,
        max_abs,
        threshold,
        nonvanishing,
    })
}

/// Closed-form non-vanishing components for the free-surface 2-layer
/// system at `(η₁, η₂, ū₁, ū₂)` (zero-based indices).
pub fn haantjes_closed_free_surface2(
    g: f64,
    rho: [f64; 2],
    u: &[f64],
) -> Vec<(usize, usize, usize, f64)> {
    let [r1, r2] = rho;
    let e1 = u[0];
    let a = e1 * g * g * (r1 - r2) / r2;
    let b = -e1 * g * g * r1 * (r1 - r2) / (r2 * r2);
    vec![(0, 0, 1, a), (2, 1, 2, a), (3, 0, 2, b)]
}

/// Closed-form non-vanishing components for the Boussinesq system at
/// `(ζ₁, ζ₂, σ₁, σ₂)` (zero-based indices).
pub fn haantjes_closed_boussinesq(
    g: f64,
    h: f64,
    rho: [f64; 3],
    u: &[f64],
) -> Vec<(usize, usize, usize, f64)> {
    let [z1, z2, s1, s2] = [u[0], u[1], u[2], u[3]];
    let b = (rho[0] + rho[1] + rho[2]) / 3.0;
    let r21 = rho[1] - rho[0];
    let r32 = rho[2] - rho[1];
    let b3h2 = b * b * b * h * h;
    let tail = g * g * r21 * r32 * z2 * (h - z1) / (b * b * h);
    let c1 = -g * r32 * z2 * (h - z1) * s1 * s1 / b3h2
        + g * r21 * (z1 - 2.0 * z2) * (h - z1) * s2 * s2 / b3h2
        + tail;
    let c2 = -g * r32 * z2 * (z2 + h - 2.0 * z1) * s1 * s1 / b3h2
        - g * r21 * z2 * (h - z1) * s2 * s2 / b3h2
        + tail;
    let c3 = 2.0 * g * r21 * z2 * s2 * (z1 - z2) * (h - z1) / b3h2;
    let c4 = -2.0 * g * r32 * z2 * s1 * (z1 - z2) * (h - z1) / b3h2;
    vec![
        (0, 0, 1, c1),
        (2, 1, 2, c1),
        (3, 0, 2, -c1),
        (1, 0, 1, c2),
        (2, 1, 3, c2),
        (3, 0, 3, -c2),
        (0, 0, 3, c3),
        (1, 0, 2, -c3),
        (2, 2, 3, -c3),
        (0, 1, 3, c4),
        (1, 1, 2, -c4),
        (3, 2, 3, -c4),
    ]
}
