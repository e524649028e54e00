use strata_core::dynamics::{bump_jets, free_surface_layer_rates, hamiltonian_rates, Jet};
use strata_core::hamiltonian::*;
use strata_core::linalg::Matrix;
use strata_core::model::{
    canonical_jacobian, canonical_to_primitive, CanonicalState, Grid1D, LayerConfig,
};
use strata_core::profiles::Bump;
use strata_core::stencil::{inner, Boundary};

const RHO: [f64; 3] = [0.5, 0.75, 1.0];

fn rigid() -> LayerConfig {
    LayerConfig::rigid(RHO.to_vec(), 1.0, 1.0).unwrap()
}

/// Deterministic pseudo-random sequence in [0, 1).
struct Lcg(u64);

impl Lcg {
    fn next(&mut self) -> f64 {
        self.0 = self
            .0
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        (self.0 >> 11) as f64 / (1u64 << 53) as f64
    }

    fn range(&mut self, a: f64, b: f64) -> f64 {
        a + (b - a) * self.next()
    }

    fn canonical_point(&mut self, h: f64) -> [f64; 4] {
        let z1 = self.range(0.3, 0.9) * h;
        let z2 = self.range(0.1, 0.9) * z1;
        [z1, z2, self.range(-0.1, 0.1), self.range(-0.1, 0.1)]
    }
}

#[test]
fn free_surface_energy_per_length() {
    let c = LayerConfig::free_surface(vec![1.0, 2.0], 1.0).unwrap();
    let m = HamiltonianModel::new(&c, Variant::FreeSurface2).unwrap();
    let fields = vec![vec![1.0; 40], vec![1.0; 40], vec![0.0; 40], vec![0.0; 40]];
    let l = 4.0;
    let h = evaluate_hamiltonian(&m, &fields, l / 40.0, None).unwrap();
    assert!((h - 2.5 * l).abs() < 1e-12);
}

#[test]
fn far_field_renormalisation_anchor() {
    let m = HamiltonianModel::new(&rigid(), Variant::RigidLid3).unwrap();
    let fields = vec![vec![0.75; 20], vec![0.25; 20], vec![0.0; 20], vec![0.0; 20]];
    let h = evaluate_hamiltonian(&m, &fields, 0.1, Some(&[0.75, 0.25, 0.0, 0.0])).unwrap();
    assert_eq!(h, 0.0);
}

#[test]
fn boussinesq_kinetic_reference() {
    for s in [0.1, -0.4, 2.0] {
        let t = kinetic_boussinesq(1.0, 1.0, [0.75, 0.25, s, s]);
        assert!((t - 0.25 * s * s).abs() < 1e-15);
    }
}

#[test]
fn rest_gradient_is_potential_only() {
    let m = HamiltonianModel::new(&rigid(), Variant::RigidLid3).unwrap();
    let g = m.gradient_point(&[0.75, 0.3, 0.0, 0.0]).unwrap();
    assert!((g[0] - 0.1875).abs() < 1e-15);
    assert!((g[1] - 0.25 * 0.3).abs() < 1e-15);
    assert_eq!((g[2], g[3]), (0.0, 0.0));
}

#[test]
fn singular_psi_is_an_error() {
    // Ψ = 0 at ζ₂ = (hρ₂ρ₃ − ρ₃(ρ₂−ρ₁)ζ₁)/(ρ₁(ρ₃−ρ₂)) > h for physical data;
    // use a non-physical point to reach it.
    let m = HamiltonianModel::new(&rigid(), Variant::RigidLid3).unwrap();
    let z1 = 0.5;
    let z2 = (0.75 - 0.25 * z1) / (0.5 * 0.25);
    assert!(m.density(&[z1, z2, 0.1, 0.1]).is_err());
}

#[test]
fn analytic_gradient_matches_fd_with_second_order_steps() {
    let m = HamiltonianModel::new(&rigid(), Variant::RigidLid3).unwrap();
    let mut rng = Lcg(7);
    for _ in 0..100 {
        let p = rng.canonical_point(1.0);
        let exact = m.gradient_closed(&p).unwrap().unwrap();
        let scale = exact.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let err = |d: f64| {
            let fd = gradient_fd_point(&m, &p, d, 2).unwrap();
            fd.iter()
                .zip(&exact)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max)
                / scale
        };
        assert!(err(1e-5) < 1e-6);
        let (e1, e2) = (err(4e-3), err(2e-3));
        let order = (e1 / e2).log2();
        assert!((order - 2.0).abs() < 0.2, "order {order}");
    }
}

#[test]
fn kinetic_density_equals_layer_sum() {
    let c = rigid();
    let mut rng = Lcg(11);
    for _ in 0..50 {
        let p = rng.canonical_point(1.0);
        let cs = CanonicalState::new(vec![p[0]], vec![p[1]], vec![p[2]], vec![p[3]]).unwrap();
        let prim = canonical_to_primitive(&c, &cs).unwrap();
        let t: f64 = (0..3)
            .map(|i| 0.5 * RHO[i] * prim.eta[i][0] * prim.u[i][0] * prim.u[i][0])
            .sum();
        let k = kinetic_rigid3(&RHO, 1.0, p);
        assert!((t - k).abs() <= 1e-12 * t.abs().max(1e-300), "{t} {k}");
    }
}

#[test]
fn generic_n_layer_density_reduces_to_three_layer() {
    let c = rigid();
    let a = HamiltonianModel::new(&c, Variant::RigidLid3).unwrap();
    let b = HamiltonianModel::new(&c, Variant::RigidLidN).unwrap();
    let mut rng = Lcg(3);
    for _ in 0..20 {
        let p = rng.canonical_point(1.0);
        let (x, y) = (a.density(&p).unwrap(), b.density(&p).unwrap());
        assert!((x - y).abs() < 1e-14 * (1.0 + x.abs()));
    }
}

#[test]
fn preta_applies_minus_swapped_derivatives() {
    let grid = Grid1D::new(0.0, 1.0, 64).unwrap();
    let xs = grid.centers();
    let f = |k: f64| -> Vec<f64> {
        xs.iter()
            .map(|x| (2.0 * std::f64::consts::PI * k * x).sin())
            .collect()
    };
    let w = vec![f(1.0), f(2.0), f(3.0), f(4.0)];
    let op = PoissonOperator::new(PoissonKind::Canonical3);
    let out = op.apply(&w, grid.dx(), 2, Boundary::Periodic);
    let d = |v: &[f64]| strata_core::stencil::derivative(v, grid.dx(), 2, Boundary::Periodic);
    let expect = [d(&w[2]), d(&w[3]), d(&w[0]), d(&w[1])];
    for k in 0..4 {
        for c in 0..64 {
            assert_eq!(out[k][c], -expect[k][c]);
        }
    }
}

#[test]
fn congruence_for_random_density_triples() {
    let mut rng = Lcg(5);
    for _ in 0..50 {
        let r1 = rng.range(0.1, 1.0);
        let r2 = r1 + rng.range(0.01, 1.0);
        let r3 = r2 + rng.range(0.01, 1.0);
        let res = congruence_residual(&[r1, r2, r3]).unwrap();
        assert!(res < 1e-14, "{res}");
        // Independent arithmetic on the explicit matrices.
        let m = canonical_jacobian(&[r1, r2, r3]).unwrap();
        let pred = PoissonOperator::new(PoissonKind::Flat3([r1, r2, r3])).b;
        let preta = PoissonOperator::canonical(2).b;
        assert!(m.mul(&pred).mul(&m.transpose()).sub(&preta).max_abs() < 1e-14);
    }
}

#[test]
fn poisson_operators_are_skew_adjoint() {
    let grid = Grid1D::new(0.0, 3.0, 96).unwrap();
    let xs = grid.centers();
    let mut rng = Lcg(9);
    let mut field = || -> Vec<f64> {
        let (a, b, k) = (
            rng.range(-1.0, 1.0),
            rng.range(0.0, 6.0),
            (rng.range(1.0, 4.0)).floor(),
        );
        xs.iter()
            .map(|x| a * (2.0 * std::f64::consts::PI * k * x / 3.0 + b).sin())
            .collect()
    };
    let kinds = [
        PoissonKind::Canonical3,
        PoissonKind::Flat3(RHO),
        PoissonKind::FreeSurface(3),
        PoissonKind::Symmetric,
    ];
    for kind in kinds {
        let op = PoissonOperator::new(kind);
        assert!(op.b.is_symmetric());
        let n = op.dim();
        let v: Vec<Vec<f64>> = (0..n).map(|_| field()).collect();
        let w: Vec<Vec<f64>> = (0..n).map(|_| field()).collect();
        for order in [2, 4] {
            let bw = op.apply(&w, grid.dx(), order, Boundary::Periodic);
            let bv = op.apply(&v, grid.dx(), order, Boundary::Periodic);
            let s: f64 = (0..n)
                .map(|k| inner(&v[k], &bw[k], grid.dx()) + inner(&bv[k], &w[k], grid.dx()))
                .sum();
            assert!(s.abs() < 1e-12, "{kind:?} {s}");
        }
    }
}

#[test]
fn boussinesq_limit_is_first_order() {
    let c = rigid();
    let mut rng = Lcg(13);
    let m = 40;
    let mut f = vec![Vec::new(); 4];
    for _ in 0..m {
        let p = rng.canonical_point(1.0);
        for k in 0..4 {
            f[k].push(p[k]);
        }
    }
    let s = CanonicalState::from_fields(f).unwrap();
    let mut prev = None;
    for eps in [0.2, 0.1, 0.05, 0.025, 0.0125] {
        let d = boussinesq_limit_check(&c, &s, eps).unwrap();
        if let Some(p) = prev {
            let r = d / p;
            assert!((0.4..=0.6).contains(&r), "{r}");
        }
        prev = Some(d);
    }
    let mut last = f64::INFINITY;
    for eps in [1e-3, 5e-4, 2.5e-4, 1e-4] {
        let d = boussinesq_limit_check(&c, &s, eps).unwrap();
        assert!(d < last);
        last = d;
    }
    assert!(boussinesq_limit_check(&c, &s, 0.0).is_err());
    assert!(boussinesq_limit_check(&c, &s, 10.0).is_err());
}

#[test]
fn involution_properties() {
    let c = rigid();
    let mut rng = Lcg(17);
    let mut f = vec![Vec::new(); 4];
    for _ in 0..30 {
        let p = rng.canonical_point(1.0);
        for k in 0..4 {
            f[k].push(p[k]);
        }
    }
    let s = CanonicalState::from_fields(f).unwrap();
    let twice = involution(&c, &involution(&c, &s).unwrap()).unwrap();
    for (a, b) in s
        .clone()
        .into_fields()
        .iter()
        .flatten()
        .zip(twice.into_fields().iter().flatten())
    {
        assert!((a - b).abs() < 1e-15);
    }
    let j = involution_jacobian();
    let preta = PoissonOperator::canonical(2).b;
    assert_eq!(j.mul(&preta).mul(&j.transpose()), preta);

    // A fixed point.
    let fp = CanonicalState::new(vec![0.7], vec![0.3], vec![0.02], vec![-0.02]).unwrap();
    let img = involution(&c, &fp).unwrap();
    assert!((img.zeta1[0] - 0.7).abs() < 1e-15 && (img.zeta2[0] - 0.3).abs() < 1e-15);
    assert_eq!((img.sigma1[0], img.sigma2[0]), (0.02, -0.02));

    // Boussinesq kinetic density is invariant.
    let j = involution(&c, &s).unwrap();
    for k in 0..s.cells() {
        let a = kinetic_boussinesq(0.75, 1.0, s.point(k));
        let b = kinetic_boussinesq(0.75, 1.0, j.point(k));
        assert!((a - b).abs() < 1e-12 * a.abs().max(1e-300));
    }
}

#[test]
fn equal_gap_potential_shift_is_a_casimir() {
    let c = rigid();
    let mut rng = Lcg(19);
    for _ in 0..20 {
        let p = rng.canonical_point(1.0);
        let cs = CanonicalState::new(vec![p[0]], vec![p[1]], vec![p[2]], vec![p[3]]).unwrap();
        let q = involution(&c, &cs).unwrap().point(0);
        let v = |x: [f64; 4]| potential_rigid3(&RHO, 1.0, x[0], x[1]);
        let shift = v(q) - v(p);
        let rd = 0.25;
        assert!((shift - (rd - rd * (p[0] + p[1]))).abs() < 1e-14);
    }
    let grid = Grid1D::new(0.0, 1.0, 32).unwrap();
    let grad = vec![vec![1.0; 32], vec![1.0; 32], vec![0.0; 32], vec![0.0; 32]];
    let out = PoissonOperator::canonical(2).apply(&grad, grid.dx(), 2, Boundary::Periodic);
    assert!(out.iter().flatten().all(|v| *v == 0.0));
}

#[test]
fn reduced_energy_is_half_boussinesq_on_symmetric_set() {
    let c = rigid();
    let full = HamiltonianModel::new(&c, Variant::Boussinesq3).unwrap();
    let red = HamiltonianModel::new(&c, Variant::Symmetric).unwrap();
    let mut rng = Lcg(23);
    for _ in 0..50 {
        let z = rng.range(0.05, 0.45);
        let s = rng.range(-0.2, 0.2);
        let lifted = [1.0 - z, z, -s, s];
        let hb = full.density(&lifted).unwrap();
        let h2 = red.density(&[z, s]).unwrap();
        assert!((h2 - (0.5 * hb - 0.25 / 8.0)).abs() < 1e-14);
        let gb = full.gradient_point(&lifted).unwrap();
        let g2 = red.gradient_point(&[z, s]).unwrap();
        // The ζ-gradients differ by the x-independent constant gρ_Δh/2.
        assert!((g2[0] - gb[1] + 0.125).abs() < 1e-14, "{} {}", g2[0], gb[1]);
        assert!((g2[1] - gb[3]).abs() < 1e-14);
    }
}

#[test]
fn free_surface_gradients_match_fd() {
    let c = LayerConfig::free_surface(vec![0.8, 1.0, 1.3], 9.81).unwrap();
    let m = HamiltonianModel::new(&c, Variant::FreeSurface3).unwrap();
    let p = [0.3, 0.5, 0.2, 0.1, -0.2, 0.05];
    let a = m.gradient_closed(&p).unwrap().unwrap();
    let b = gradient_fd_point(&m, &p, 1e-5, 2).unwrap();
    for (x, y) in a.iter().zip(&b) {
        assert!((x - y).abs() < 1e-7 * (1.0 + x.abs()));
    }
}

/// Appendix equations of motion in (η, μ), coded directly.
fn appendix_rates(rho: [f64; 3], g: f64, j: &Jet) -> Vec<f64> {
    let (e, m) = j.value.split_at(3);
    let (ex, mx) = j.slope.split_at(3);
    let mut out = vec![0.0; 6];
    for i in 0..3 {
        out[i] = -(ex[i] * m[i] + e[i] * mx[i]) / rho[i];
    }
    let [r1, r2, r3] = rho;
    out[3] = -m[0] * mx[0] / r1 - g * r1 * (ex[0] + ex[1] + ex[2]);
    out[4] = -m[1] * mx[1] / r2 - g * (r1 * ex[0] + r2 * ex[1] + r2 * ex[2]);
    out[5] = -m[2] * mx[2] / r3 - g * (r3 * ex[2] + r2 * ex[1] + r1 * ex[0]);
    out
}

#[test]
fn free_surface_three_layer_operator_reproduces_appendix() {
    let rho = [0.8, 1.0, 1.3];
    let c = LayerConfig::free_surface(rho.to_vec(), 9.81).unwrap();
    let model = HamiltonianModel::new(&c, Variant::FreeSurface3).unwrap();
    let bumps = [
        Bump {
            base: 0.3,
            amplitude: 0.05,
            center: 0.0,
            width: 1.0,
        },
        Bump {
            base: 0.5,
            amplitude: -0.04,
            center: 0.4,
            width: 0.8,
        },
        Bump {
            base: 0.2,
            amplitude: 0.03,
            center: -0.3,
            width: 1.2,
        },
        Bump {
            base: 0.1,
            amplitude: 0.2,
            center: 0.1,
            width: 0.9,
        },
        Bump {
            base: -0.05,
            amplitude: 0.1,
            center: 0.0,
            width: 1.1,
        },
        Bump {
            base: 0.02,
            amplitude: -0.15,
            center: -0.2,
            width: 0.7,
        },
    ];
    let xs = Grid1D::new(-3.0, 3.0, 200).unwrap().centers();
    let mut diff: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for j in bump_jets(&bumps, &xs) {
        let a = appendix_rates(rho, 9.81, &j);
        let b = hamiltonian_rates(&model, &j).unwrap();
        for (x, y) in a.iter().zip(&b) {
            diff = diff.max((x - y).abs());
            scale = scale.max(x.abs());
        }
    }
    assert!(diff / scale < 1e-8, "{}", diff / scale);
}

#[test]
fn variant_mismatch_is_rejected() {
    let free = LayerConfig::free_surface(vec![1.0, 2.0], 1.0).unwrap();
    assert!(HamiltonianModel::new(&free, Variant::RigidLid3).is_err());
    assert!(HamiltonianModel::new(&free, Variant::FreeSurface3).is_err());
    assert!(HamiltonianModel::new(&rigid(), Variant::FreeSurface2).is_err());
    let four = LayerConfig::rigid(vec![0.4, 0.6, 0.8, 1.0], 1.0, 1.0).unwrap();
    assert!(HamiltonianModel::new(&four, Variant::Boussinesq3).is_err());
    assert!(HamiltonianModel::new(&four, Variant::RigidLidN).is_ok());
}

#[test]
fn hessian_is_symmetric() {
    let m = HamiltonianModel::new(&rigid(), Variant::RigidLid3).unwrap();
    let h: Matrix = m.hessian(&[0.7, 0.3, 0.05, -0.02], 4).unwrap();
    assert!(h.sub(&h.transpose()).max_abs() < 1e-8);
}

#[test]
fn generic_free_surface_rates_match_operator_form() {
    let xs = Grid1D::new(-3.0, 3.0, 120).unwrap().centers();
    for rho in [
        vec![0.8, 1.0],
        vec![0.8, 1.0, 1.3],
        vec![0.5, 0.7, 0.9, 1.2],
    ] {
        let n = rho.len();
        let c = LayerConfig::free_surface(rho.clone(), 9.81).unwrap();
        let model = HamiltonianModel::new(&c, Variant::FreeSurfaceN).unwrap();
        let bumps: Vec<Bump> = (0..2 * n)
            .map(|k| Bump {
                base: if k < n {
                    0.2 + 0.1 * k as f64
                } else {
                    0.01 * k as f64
                },
                amplitude: 0.05 - 0.01 * k as f64,
                center: 0.1 * k as f64 - 0.2,
                width: 0.8 + 0.05 * k as f64,
            })
            .collect();
        let mut worst: f64 = 0.0;
        for j in bump_jets(&bumps, &xs) {
            let a = free_surface_layer_rates(&c, &j).unwrap();
            let b = hamiltonian_rates(&model, &j).unwrap();
            if n == 3 {
                let o = appendix_rates([rho[0], rho[1], rho[2]], 9.81, &j);
                worst = worst.max(
                    a.iter()
                        .zip(&o)
                        .map(|(x, y)| (x - y).abs())
                        .fold(0.0, f64::max),
                );
            }
            worst = worst.max(
                a.iter()
                    .zip(&b)
                    .map(|(x, y)| (x - y).abs())
                    .fold(0.0, f64::max),
            );
        }
        assert!(worst < 1e-7, "n={n}: {worst}");
    }
}
