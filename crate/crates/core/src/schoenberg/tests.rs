use super::*;
use crate::special_fn::gegenbauer_c;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn settings() -> NumericSettings {
    NumericSettings::default()
}

#[test]
fn single_gegenbauer_term_is_recovered() {
    let grid = AbelianGrid::cyclic(5).unwrap();
    for d in 1..=4 {
        let basis = SphereBasis::new(d, 8).unwrap();
        for k in 0..=8 {
            let g = |u: f64| Complex64::new((u * 0.7).cos(), (u * 0.3).sin() * 0.0) + c(1.0 + u);
            let field = KernelField::closed(d, grid.clone(), move |x, u| {
                g(u) * gegenbauer_c(d, k, x).unwrap()
            })
            .unwrap();
            let s = d_schoenberg(&field, &basis).unwrap();
            for n in 0..=8 {
                for (i, &u) in grid.points().iter().enumerate() {
                    let want = if n == k { g(u) } else { c(0.0) };
                    let got = s.coefficient(n).values()[i];
                    assert!((got - want).norm() < 1e-10, "d={d} k={k} n={n}: {got}");
                }
            }
        }
    }
}

#[test]
fn constant_kernel_has_only_b0() {
    let basis = SphereBasis::new(3, 10).unwrap();
    let field = KernelField::closed(3, AbelianGrid::cyclic(4).unwrap(), |_, _| c(1.0)).unwrap();
    let s = d_schoenberg(&field, &basis).unwrap();
    for n in 0..=10 {
        for v in s.coefficient(n).values() {
            let want = if n == 0 { 1.0 } else { 0.0 };
            assert!((v - c(want)).norm() < 1e-12);
        }
    }
    for v in s.bound().values() {
        assert!((v - c(1.0)).norm() < 1e-12);
    }
}

#[test]
fn identity_on_s2_has_b1_one() {
    let basis = SphereBasis::new(2, 6).unwrap();
    let s = d_schoenberg(&KernelField::sphere(2, |x| x).unwrap(), &basis).unwrap();
    for n in 0..=6 {
        let want = if n == 1 { 1.0 } else { 0.0 };
        assert!((s.scalar(n) - want).abs() < 1e-12, "n={n}: {}", s.scalar(n));
    }
}

#[test]
fn round_trip_on_polynomial_kernels() {
    let grid = AbelianGrid::circle(8).unwrap();
    let basis = SphereBasis::new(2, 7).unwrap();
    let field = KernelField::closed(2, grid.clone(), |x, u| {
        Complex64::new(u.cos(), 0.0) * (1.0 + x * x * x - 0.4 * x.powi(7)) + c(x)
    })
    .unwrap();
    let s = d_schoenberg(&field, &basis).unwrap();
    for &x in basis.nodes() {
        for &u in grid.points() {
            let got = s.synthesize(x, u).unwrap();
            let want = field.eval(x, u).unwrap();
            assert!((got - want).norm() < 1e-9);
        }
    }
}

#[test]
fn synthesize_rejects_out_of_range() {
    let s = SchoenbergSeries::from_scalars(2, &[1.0, 0.5]).unwrap();
    assert!(matches!(
        s.synthesize(1.5, 0.0),
        Err(GkError::Domain { .. })
    ));
    assert!(s.synthesize(0.3, 0.5).is_err());
    let one = SchoenbergSeries::from_scalars(2, &[1.0]).unwrap();
    assert!((one.synthesize(-0.2, 0.0).unwrap() - c(1.0)).norm() < 1e-15);
}

#[test]
fn geometric_series_at_pole_sums_to_one() {
    let q: f64 = 0.5;
    let b: Vec<f64> = (0..=60).map(|n| q.powi(n) * (1.0 - q)).collect();
    let s = SchoenbergSeries::from_scalars(2, &b).unwrap();
    let v = s.synthesize(1.0, 0.0).unwrap();
    assert!((v.re - 1.0).abs() < 1e-15 * 100.0 + q.powi(61));
}

#[test]
fn linearity_of_coefficients() {
    let grid = AbelianGrid::cyclic(6).unwrap();
    let basis = SphereBasis::new(3, 12).unwrap();
    let f = KernelField::closed(3, grid.clone(), |x, u| c((x * (u + 1.0)).exp())).unwrap();
    let g = KernelField::closed(3, grid.clone(), |x, u| Complex64::new(x.cos(), u.sin())).unwrap();
    let (a, b) = (1.7, -0.6);
    let h = KernelField::closed(3, grid.clone(), move |x, u| {
        c((x * (u + 1.0)).exp()) * a + Complex64::new(x.cos(), u.sin()) * b
    })
    .unwrap();
    let (sf, sg, sh) = (
        d_schoenberg(&f, &basis).unwrap(),
        d_schoenberg(&g, &basis).unwrap(),
        d_schoenberg(&h, &basis).unwrap(),
    );
    for n in 0..=12 {
        for i in 0..grid.len() {
            let want = sf.coefficient(n).values()[i] * a + sg.coefficient(n).values()[i] * b;
            assert!((sh.coefficient(n).values()[i] - want).norm() < 1e-12);
        }
    }
}

#[test]
fn bound_dominates_synthesis() {
    let grid = AbelianGrid::real_line(0.1, 8.0).unwrap();
    let basis = SphereBasis::new(2, 12).unwrap();
    let field = KernelField::closed(2, grid.clone(), |x, u| {
        c((-u * u / 2.0).exp() * (0.5 + 0.5 * x) + (-(u - 1.0).powi(2)).exp() * (x * x - 0.3))
    })
    .unwrap();
    let s = d_schoenberg(&field, &basis).unwrap();
    let bound = s.bound();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..1000 {
        let x: f64 = rng.random_range(-1.0..=1.0);
        let i = rng.random_range(0..grid.len());
        let v = s.synthesize_index(x, i).unwrap().norm();
        assert!(v <= bound.values()[i].re + 1e-12);
    }
}

#[test]
fn separable_bound_is_time_factor() {
    let grid = AbelianGrid::real_line(0.05, 10.0).unwrap();
    let basis = SphereBasis::new(2, 6).unwrap();
    let field = KernelField::closed(2, grid.clone(), |x, u| {
        c((-u * u / 2.0).exp() * (0.5 + 0.5 * x))
    })
    .unwrap();
    let s = d_schoenberg(&field, &basis).unwrap();
    for (v, &u) in s.bound().values().iter().zip(grid.points()) {
        assert!((v.re - (-u * u / 2.0).exp()).abs() < 1e-12);
    }
}

#[test]
fn separable_gaussian_is_certified() {
    let grid = AbelianGrid::real_line(0.05, 10.0).unwrap();
    let basis = SphereBasis::new(2, 8).unwrap();
    let field =
        KernelField::closed(2, grid, |x, u| c((-u * u / 2.0).exp() * (0.5 + 0.5 * x))).unwrap();
    let r = certify_sphere_time(&field, &basis, &settings()).unwrap();
    assert_eq!(r.verdict, Verdict::CertifiedPd, "{r}");
}

#[test]
fn negative_b0_is_refuted_at_degree_zero() {
    let grid = AbelianGrid::real_line(0.05, 10.0).unwrap();
    let basis = SphereBasis::new(2, 8).unwrap();
    let field = KernelField::closed(2, grid, |x, u| c((-u * u).exp() * (x * x - 0.9))).unwrap();
    let r = certify_sphere_time(&field, &basis, &settings()).unwrap();
    assert_eq!(r.verdict, Verdict::CertifiedNotPd, "{r}");
    assert!(matches!(r.witness, Witness::Degree { n: 0, .. }));
    assert!(r.min_value < -r.tolerances.negative_threshold);
}

#[test]
fn circle_cosine_is_certified() {
    let field =
        KernelField::closed(3, AbelianGrid::circle(32).unwrap(), |_, u| c(u.cos())).unwrap();
    let basis = SphereBasis::new(3, 4).unwrap();
    let r = certify_sphere_time(&field, &basis, &settings()).unwrap();
    assert_eq!(r.verdict, Verdict::CertifiedPd, "{r}");
}

#[test]
fn non_hermitian_in_time_is_refuted() {
    let field = KernelField::closed(2, AbelianGrid::cyclic(5).unwrap(), |_, u| {
        Complex64::new(1.0, u)
    })
    .unwrap();
    let r = certify_sphere_time(&field, &SphereBasis::new(2, 3).unwrap(), &settings()).unwrap();
    assert_eq!(r.verdict, Verdict::CertifiedNotPd);
    assert!(matches!(r.witness, Witness::Hermitian { .. }));
}

#[test]
fn slowly_decaying_series_is_inconclusive() {
    // b_n = 1/(n+1)^2 truncated far beyond the tested degree.
    let field = KernelField::sphere(2, |x| {
        (0..400)
            .map(|n| gegenbauer_c(2, n, x).unwrap() / ((n + 1) as f64).powi(2))
            .sum()
    })
    .unwrap();
    let r = certify_sphere_time(&field, &SphereBasis::new(2, 6).unwrap(), &settings()).unwrap();
    assert_eq!(r.verdict, Verdict::Inconclusive, "{r}");
    assert!(matches!(r.witness, Witness::Truncation { .. }));
}

#[test]
fn cross_check_agrees() {
    let grid = AbelianGrid::cyclic(8).unwrap();
    let field = KernelField::closed(2, grid, |x, u| {
        c((0.3 * x).exp() * (1.0 + (std::f64::consts::PI * u / 4.0).cos()))
    })
    .unwrap();
    let mut s = settings();
    s.cross_check = true;
    let r = certify_sphere_time(&field, &SphereBasis::new(2, 20).unwrap(), &s).unwrap();
    assert_eq!(r.verdict, Verdict::CertifiedPd, "{r}");
    let basis = SphereBasis::new(2, 20).unwrap();
    let series = d_schoenberg(&field, &basis).unwrap();
    let swapped = partial_transform_coefficients(&field, &basis).unwrap();
    for (b, p) in series.coefficients().iter().zip(&swapped) {
        for (x, y) in fourier(b).values().iter().zip(p) {
            assert!((x - y).norm() < 1e-12);
        }
    }
}

#[test]
fn csv_round_trip_is_bit_exact() {
    let grid = AbelianGrid::real_line(0.3, 3.0).unwrap();
    let basis = SphereBasis::new(3, 5).unwrap();
    let field = KernelField::closed(3, grid.clone(), |x, u| {
        Complex64::new((x * u).sin() + 1.0 / 3.0, (x - u).cos() * 1e-7)
    })
    .unwrap();
    let s = d_schoenberg(&field, &basis).unwrap();
    let back = SchoenbergSeries::from_csv(3, grid, &s.to_csv()).unwrap();
    assert_eq!(s, back);
}

#[test]
fn uniform_convergence_proxy() {
    let field = KernelField::sphere(3, |x| (x - 1.0).exp()).unwrap();
    let basis = SphereBasis::new(3, 16).unwrap();
    let s = d_schoenberg(&field, &basis).unwrap();
    let tail: f64 = (9..=16).map(|n| s.scalar(n)).sum();
    for k in 0..=200 {
        let x = -1.0 + k as f64 / 100.0;
        let d = s.partial_sum_index(x, 0, 9, 16).unwrap().norm();
        assert!(d <= tail + 1e-14);
    }
}

#[test]
fn too_few_nodes_is_an_error() {
    let basis = SphereBasis::with_quadrature(2, 10, 5).unwrap();
    let field = KernelField::sphere(2, |x| x).unwrap();
    assert!(d_schoenberg(&field, &basis).is_err());
}

#[test]
fn sphere_sphere_tables() {
    let b = SphereBasis::new(2, 5).unwrap();
    let xy =
        sphere_sphere_coefficients(&BiSphereField::closed(2, 2, |x, y| x * y).unwrap(), &b, &b)
            .unwrap();
    for (n, row) in xy.iter().enumerate() {
        for (m, v) in row.iter().enumerate() {
            let want = if (n, m) == (1, 1) { 1.0 } else { 0.0 };
            assert!((v - want).abs() < 1e-10);
        }
    }
    let one = sphere_sphere_coefficients(&BiSphereField::closed(2, 2, |_, _| 1.0).unwrap(), &b, &b)
        .unwrap();
    assert!((one[0][0] - 1.0).abs() < 1e-12);
    assert!(one.iter().flatten().skip(1).all(|v| v.abs() < 1e-12));
}

#[test]
fn sphere_sphere_certification() {
    let b1 = SphereBasis::new(2, 6).unwrap();
    let b2 = SphereBasis::new(3, 6).unwrap();
    let diff = BiSphereField::closed(2, 3, |x, y| x - y).unwrap();
    let r = certify_sphere_sphere(&diff, &b1, &b2, &settings()).unwrap();
    assert_eq!(r.verdict, Verdict::CertifiedNotPd);
    assert!(matches!(r.witness, Witness::DegreePair { n: 0, m: 1 }));
    assert!((r.min_value + 1.0).abs() < 1e-10);
    let good = BiSphereField::closed(2, 3, |x, y| (1.0 + x) * (2.0 + y * y)).unwrap();
    let r = certify_sphere_sphere(&good, &b1, &b2, &settings()).unwrap();
    assert_eq!(r.verdict, Verdict::CertifiedPd, "{r}");
}

#[test]
fn random_character_combinations() {
    let n_grid = 6;
    let grid = AbelianGrid::cyclic(n_grid).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for trial in 0..50 {
        let d = 1 + trial % 3;
        let terms: Vec<(usize, f64, usize)> = (0..4)
            .map(|k| (k, rng.random_range(0.1..1.0), rng.random_range(0..n_grid)))
            .collect();
        let build = |terms: Vec<(usize, f64, usize)>| {
            KernelField::closed(d as u32, grid.clone(), move |x, u| {
                terms
                    .iter()
                    .map(|&(k, a, g)| {
                        let phase = 2.0 * std::f64::consts::PI * (g as f64) * u / n_grid as f64;
                        Complex64::from_polar(a * gegenbauer_c(d as u32, k, x).unwrap(), phase)
                    })
                    .sum()
            })
            .unwrap()
        };
        let basis = SphereBasis::new(d as u32, 6).unwrap();
        let r = certify_sphere_time(&build(terms.clone()), &basis, &settings()).unwrap();
        assert_eq!(r.verdict, Verdict::CertifiedPd, "trial {trial}: {r}");
        let mut flipped = terms;
        let j = rng.random_range(0..4);
        flipped[j].1 = -flipped[j].1;
        let r = certify_sphere_time(&build(flipped), &basis, &settings()).unwrap();
        assert_eq!(r.verdict, Verdict::CertifiedNotPd, "trial {trial}: {r}");
        assert!(matches!(r.witness, Witness::Degree { n, .. } if n == j));
    }
}
