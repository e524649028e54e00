use strata_core::hamiltonian::Variant;
use strata_core::linalg::Matrix;
use strata_core::model::{Grid1D, LayerConfig};
use strata_core::profiles::figure3_canonical;
use strata_core::quasilinear::*;

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
}

fn rigid() -> LayerConfig {
    LayerConfig::rigid(vec![0.5, 0.75, 1.0], 1.0, 1.0).unwrap()
}

fn sorted_real(a: &Matrix) -> Vec<f64> {
    let mut v: Vec<f64> = a.eigenvalues().unwrap().iter().map(|z| z.re).collect();
    v.sort_by(f64::total_cmp);
    v
}

#[test]
fn free_surface_two_layer_rest_speeds() {
    let c = LayerConfig::free_surface(vec![0.5, 1.0], 1.0).unwrap();
    let sys = build_system(&c, Variant::FreeSurface2).unwrap();
    let a = sys.matrix(&[1.0, 1.0, 0.0, 0.0]).unwrap();
    // Block reduction: λ² are the eigenvalues of the 2×2 product block.
    let (p, q) = (1.0 + 0.5f64.sqrt(), 1.0 - 0.5f64.sqrt());
    let expect = [-p.sqrt(), -q.sqrt(), q.sqrt(), p.sqrt()];
    let got = sorted_real(&a);
    for (x, y) in got.iter().zip(&expect) {
        assert!((x - y).abs() < 1e-10, "{got:?}");
    }
    assert!((expect[3] - 1.306563).abs() < 1e-6 && (expect[2] - 0.541196).abs() < 1e-6);
}

#[test]
fn boussinesq_at_rest_is_block_antidiagonal() {
    let sys = build_system(&rigid(), Variant::Boussinesq3).unwrap();
    let a = sys.matrix(&[0.7, 0.3, 0.0, 0.0]).unwrap();
    for i in 0..2 {
        for j in 0..2 {
            assert_eq!(a[(i, j)], 0.0);
            assert_eq!(a[(i + 2, j + 2)], 0.0);
        }
    }
}

#[test]
fn symmetric_matrix_entries() {
    let c = rigid();
    let sys = build_system(&c, Variant::Symmetric).unwrap();
    let (g, h, rb, rd) = (1.0, 1.0, 0.75, 0.25);
    let mut rng = Lcg(1);
    for _ in 0..20 {
        let (z, s) = (rng.range(0.05, 0.45), rng.range(-0.3, 0.3));
        let a = sys.matrix(&[z, s]).unwrap();
        let m = [
            [(4.0 * z - h) * s, z * (2.0 * z - h)],
            [2.0 * s * s - g * h * rb * rd, (4.0 * z - h) * s],
        ];
        for i in 0..2 {
            for j in 0..2 {
                // u_t = M u_x / (ρ̄h) is u_t + A u_x = 0 with A = −M/(ρ̄h).
                assert!((a[(i, j)] + m[i][j] / (rb * h)).abs() < 1e-15);
            }
        }
    }
}

#[test]
fn figure3_data_hyperbolic_everywhere() {
    let c = rigid();
    let sys = build_system(&c, Variant::RigidLid3).unwrap();
    let xs = Grid1D::new(-5.0, 7.0, 240).unwrap().centers();
    let f = figure3_canonical(1.0, &xs);
    for i in 0..xs.len() {
        let u = [f[0][i], f[1][i], f[2][i], f[3][i]];
        assert!(
            classify_hyperbolicity(&sys, &u, 1e-9)
                .unwrap()
                .is_hyperbolic(),
            "cell {i}"
        );
    }
}

#[test]
fn symmetric_hyperbolicity_rectangle() {
    let c = rigid();
    let sys = build_system(&c, Variant::Symmetric).unwrap();
    let crit = (1.0f64 * 1.0 * 0.75 * 0.25 / 2.0).sqrt();
    let mut rng = Lcg(2);
    for _ in 0..100 {
        let z = rng.range(0.01, 0.49);
        let s_in = crit * rng.range(0.0, 0.999);
        let s_out = crit * rng.range(1.001, 2.0);
        assert!(classify_hyperbolicity(&sys, &[z, s_in], 1e-9)
            .unwrap()
            .is_hyperbolic());
        assert!(matches!(
            classify_hyperbolicity(&sys, &[z, s_out], 1e-9).unwrap(),
            Hyperbolicity::Elliptic(_)
        ));
        assert!(matches!(
            symmetric_char_speeds(&c, z, s_out).unwrap(),
            CharSpeeds::Complex { .. }
        ));
    }
}

#[test]
fn symmetric_rest_speeds() {
    let c = LayerConfig::rigid(vec![0.75, 1.0, 1.25], 1.0, 1.0).unwrap();
    assert_eq!(c.mean_density(), 1.0);
    let sys = build_system(&c, Variant::Symmetric).unwrap();
    let v = match classify_hyperbolicity(&sys, &[0.25, 0.0], 1e-9).unwrap() {
        Hyperbolicity::Hyperbolic(v) => v,
        other => panic!("{other:?}"),
    };
    assert!((v[1] - 0.1767767).abs() < 1e-7 && (v[0] + 0.1767767).abs() < 1e-7);
    match symmetric_char_speeds(&c, 0.25, 0.0).unwrap() {
        CharSpeeds::Real { minus, plus } => {
            assert!((plus - 0.03125f64.sqrt()).abs() < 1e-15 && (minus + plus).abs() < 1e-15)
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn sonic_boundary_merges_speeds() {
    let c = rigid();
    let crit = (0.75f64 * 0.25 / 2.0).sqrt();
    match symmetric_char_speeds(&c, 0.2, crit).unwrap() {
        CharSpeeds::Real { minus, plus } => assert!((plus - minus).abs() < 1e-7),
        other => panic!("{other:?}"),
    }
    assert!(symmetric_char_speeds(&c, 0.6, 0.0).is_err());
    assert!(symmetric_char_speeds(&c, 0.0, 0.0).is_err());
}

#[test]
fn closed_form_speeds_match_eigen_solve() {
    let c = rigid();
    let sys = build_system(&c, Variant::Symmetric).unwrap();
    let mut rng = Lcg(3);
    for _ in 0..100 {
        let z = rng.range(0.02, 0.48);
        let s = rng.range(-0.4, 0.4);
        let eig = sys.matrix(&[z, s]).unwrap().eigenvalues().unwrap();
        match symmetric_char_speeds(&c, z, s).unwrap() {
            CharSpeeds::Real { minus, plus } => {
                let mut r: Vec<f64> = eig.iter().map(|e| e.re).collect();
                r.sort_by(f64::total_cmp);
                let sc = plus.abs().max(minus.abs());
                assert!((r[0] - minus).abs() <= 1e-10 * sc && (r[1] - plus).abs() <= 1e-10 * sc);
            }
            CharSpeeds::Complex { re, im } => {
                let sc = (re * re + im * im).sqrt();
                assert!((eig[0].re - re).abs() <= 1e-10 * sc);
                assert!((eig[0].im.abs() - im).abs() <= 1e-10 * sc);
            }
        }
    }
}

#[test]
fn rigid_lid_speeds_are_real_near_rest() {
    let sys = build_system(&rigid(), Variant::RigidLid3).unwrap();
    let h = classify_hyperbolicity(&sys, &[0.6, 0.3, 0.01, -0.01], 1e-9).unwrap();
    assert!(h.is_hyperbolic());
    assert!(h.max_speed() > 0.0);
}

fn free_surface_golden(g: f64, rho: [f64; 2], u: &[f64]) -> [(usize, usize, usize, f64); 3] {
    let (r1, r2) = (rho[0], rho[1]);
    let e1 = u[0];
    let a = e1 * g * g * (r1 - r2) / r2;
    [
        (0, 0, 1, a),
        (2, 1, 2, a),
        (3, 0, 2, -e1 * g * g * r1 * (r1 - r2) / (r2 * r2)),
    ]
}

#[test]
fn free_surface_haantjes_three_components() {
    let mut rng = Lcg(4);
    let mut checked = 0;
    while checked < 100 {
        let r1 = rng.range(0.3, 0.9);
        let rho = [r1, 1.0];
        let g = rng.range(0.5, 10.0);
        let c = LayerConfig::free_surface(rho.to_vec(), g).unwrap();
        let sys = build_system(&c, Variant::FreeSurface2).unwrap();
        let u = [
            rng.range(0.2, 1.0),
            rng.range(0.2, 1.0),
            rng.range(-0.3, 0.3),
            rng.range(-0.3, 0.3),
        ];
        if !classify_hyperbolicity(&sys, &u, 1e-9)
            .unwrap()
            .is_hyperbolic()
        {
            continue;
        }
        checked += 1;
        let res = haantjes(&sys, &u).unwrap();
        let golden = free_surface_golden(g, rho, &u);
        assert_eq!(res.nonvanishing.len(), 3, "{:?}", res.nonvanishing);
        for (i, j, k, v) in golden {
            let got = res.get(i, j, k);
            assert!((got - v).abs() <= 1e-6 * v.abs(), "{i}{j}{k}: {got} {v}");
            assert!(res.nonvanishing.contains(&(i, j, k)));
        }
        let lib = haantjes_closed_free_surface2(g, rho, &u);
        assert_eq!(lib.len(), 3);
        for (i, j, k, v) in lib {
            assert!((res.get(i, j, k) - v).abs() <= 1e-6 * v.abs());
        }
    }
}

#[test]
fn free_surface_haantjes_vanishes_for_equal_densities() {
    let sys = System::FreeSurface2 {
        g: 1.0,
        rho: [1.0, 1.0],
    };
    let res = haantjes(&sys, &[0.4, 0.6, 0.1, -0.2]).unwrap();
    assert!(res.max_abs < 1e-14);
    assert!(res.nonvanishing.is_empty());
}

#[test]
fn boussinesq_haantjes_twelve_components() {
    let mut rng = Lcg(5);
    let mut checked = 0;
    while checked < 100 {
        let r1 = rng.range(0.3, 0.6);
        let r2 = r1 + rng.range(0.05, 0.3);
        let r3 = r2 + rng.range(0.05, 0.3);
        let h = rng.range(0.5, 2.0);
        let g = rng.range(0.5, 10.0);
        let c = LayerConfig::rigid(vec![r1, r2, r3], g, h).unwrap();
        let sys = build_system(&c, Variant::Boussinesq3).unwrap();
        let z1 = h * rng.range(0.4, 0.9);
        let z2 = z1 * rng.range(0.1, 0.9);
        let u = [z1, z2, rng.range(-0.1, 0.1), rng.range(-0.1, 0.1)];
        if !classify_hyperbolicity(&sys, &u, 1e-9)
            .unwrap()
            .is_hyperbolic()
        {
            continue;
        }
        checked += 1;
        let res = haantjes(&sys, &u).unwrap();
        assert_eq!(res.components.len(), 24);
        assert_eq!(res.nonvanishing.len(), 12, "{:?}", res.nonvanishing);
        let golden = haantjes_closed_boussinesq(g, h, [r1, r2, r3], &u);
        assert_eq!(golden.len(), 12);
        for (i, j, k, v) in golden {
            let got = res.get(i, j, k);
            assert!((got - v).abs() <= 1e-6 * v.abs(), "{i}{j}{k}: {got} {v}");
        }
    }
}

#[test]
fn two_field_haantjes_vanishes() {
    let sys = build_system(&rigid(), Variant::Symmetric).unwrap();
    let mut rng = Lcg(6);
    for _ in 0..50 {
        let u = [rng.range(0.05, 0.45), rng.range(-0.2, 0.2)];
        let a = sys.matrix(&u).unwrap().max_abs();
        let res = haantjes(&sys, &u).unwrap();
        assert!(res.max_abs < 1e-10 * (1.0 + a * a * a));
    }
}

#[test]
fn torsion_and_haantjes_antisymmetric() {
    let sys = build_system(&rigid(), Variant::Boussinesq3).unwrap();
    let u = [0.7, 0.25, 0.05, -0.03];
    let a = sys.matrix(&u).unwrap();
    let d = sys.derivative(&u).unwrap();
    let n = nijenhuis(&a, &d);
    let h = haantjes_full(&a, &n);
    for i in 0..4 {
        for j in 0..4 {
            for k in 0..4 {
                assert!((n[(i, j, k)] + n[(i, k, j)]).abs() < 1e-15);
                assert!((h[(i, j, k)] + h[(i, k, j)]).abs() < 1e-15);
            }
        }
    }
}

struct Shifted<'a>(&'a System, f64);

impl QuasilinearSystem for Shifted<'_> {
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn matrix(&self, u: &[f64]) -> strata_core::Result<Matrix> {
        Ok(self
            .0
            .matrix(u)?
            .add(&Matrix::identity(self.dim()).scale(self.1)))
    }

    fn derivative(&self, u: &[f64]) -> strata_core::Result<strata_core::linalg::Tensor3> {
        self.0.derivative(u)
    }
}

#[test]
fn haantjes_invariant_under_identity_shift() {
    let sys = build_system(&rigid(), Variant::Boussinesq3).unwrap();
    let u = [0.65, 0.2, 0.04, 0.02];
    let base = haantjes(&sys, &u).unwrap();
    let shifted = haantjes(&Shifted(&sys, 0.37), &u).unwrap();
    for (a, b) in base.components.iter().zip(&shifted.components) {
        assert!((a.3 - b.3).abs() < 1e-12 * (1.0 + a.3.abs()));
    }
}

#[test]
fn analytic_derivatives_match_fd() {
    let mut rng = Lcg(8);
    let fs = build_system(
        &LayerConfig::free_surface(vec![0.6, 1.0], 2.0).unwrap(),
        Variant::FreeSurface2,
    )
    .unwrap();
    let bq = build_system(&rigid(), Variant::Boussinesq3).unwrap();
    let sy = build_system(&rigid(), Variant::Symmetric).unwrap();
    for _ in 0..100 {
        let states: [(&System, Vec<f64>); 3] = [
            (
                &fs,
                vec![
                    rng.range(0.2, 1.0),
                    rng.range(0.2, 1.0),
                    rng.range(-0.3, 0.3),
                    rng.range(-0.3, 0.3),
                ],
            ),
            (
                &bq,
                vec![
                    rng.range(0.5, 0.9),
                    rng.range(0.1, 0.4),
                    rng.range(-0.2, 0.2),
                    rng.range(-0.2, 0.2),
                ],
            ),
            (&sy, vec![rng.range(0.05, 0.45), rng.range(-0.3, 0.3)]),
        ];
        for (sys, u) in states {
            let a = sys.derivative(&u).unwrap();
            let b = fd_derivative(sys, &u, 1e-6).unwrap();
            let scale = a.max_abs().max(1e-12);
            let n = sys.dim();
            for i in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        assert!((a[(i, k, l)] - b[(i, k, l)]).abs() < 1e-6 * scale);
                    }
                }
            }
        }
    }
}

#[test]
fn variant_mismatch() {
    assert!(build_system(&rigid(), Variant::FreeSurface2).is_err());
    let four = LayerConfig::rigid(vec![0.4, 0.6, 0.8, 1.0], 1.0, 1.0).unwrap();
    assert!(build_system(&four, Variant::Boussinesq3).is_err());
    assert!(build_system(&four, Variant::RigidLidN).is_err());
}

#[test]
fn defective_double_root_is_degenerate() {
    let a = Matrix::from_rows([[1.0, 1.0], [0.0, 1.0]]);
    assert!(matches!(
        classify_matrix(&a, 1e-9).unwrap(),
        Hyperbolicity::Degenerate(_)
    ));
    let b = Matrix::from_rows([[1.0, 0.0], [0.0, 1.0]]);
    assert!(classify_matrix(&b, 1e-9).unwrap().is_hyperbolic());
}
