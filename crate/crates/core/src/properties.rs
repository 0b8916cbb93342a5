//! Randomized invariants across modules.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Zero};
use proptest::prelude::*;

use crate::abelian::{bochner_test, fourier, inverse_fourier, AbelianGrid, Spectrum};
use crate::appendix::ln_norm;
use crate::chg::{gneiting_certify, ProductField};
use crate::gneiting::rn_table;
use crate::gram::{gram_matrix, min_eigenvalue, GramKernel, PointConfig};
use crate::schoenberg::{certify_sphere_time, d_schoenberg, KernelField};
use crate::special_fn::{arccos_coeffs, gegenbauer_all, harmonic_dim, SphereBasis};
use crate::{NumericSettings, Verdict};

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn config() -> ProptestConfig {
    ProptestConfig {
        cases: 64,
        ..ProptestConfig::default()
    }
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn gegenbauer_is_bounded_by_one(d in 1u32..8, x in -1.0f64..=1.0) {
        for v in gegenbauer_all(d, 40, x).unwrap() {
            prop_assert!(v.abs() <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn scaled_gegenbauer_is_orthonormal(d in 1u32..6, top in 0usize..20) {
        let basis = SphereBasis::new(d, top).unwrap();
        for n in 0..=top {
            for k in 0..=n {
                let s = (harmonic_dim(d, n).unwrap() as f64 * harmonic_dim(d, k).unwrap() as f64).sqrt();
                let (vn, vk) = (basis.values(n), basis.values(k));
                let ip: f64 = basis
                    .weights()
                    .iter()
                    .zip(vn.iter().zip(vk))
                    .map(|(w, (a, b))| w * a * b)
                    .sum::<f64>()
                    * s;
                let want = if n == k { 1.0 } else { 0.0 };
                prop_assert!((ip - want).abs() < 1e-10, "d={} n={} k={} ip={}", d, n, k, ip);
            }
        }
    }

    #[test]
    fn quadrature_integrates_random_polynomials(
        d in 1u32..6,
        m in 1usize..30,
        coeffs in prop::collection::vec(-1.0f64..1.0, 60),
    ) {
        let basis = SphereBasis::with_quadrature(d, 0, m).unwrap();
        let deg = 2 * m - 1;
        let p = &coeffs[..=deg.min(59)];
        // Normalized moments of x^k: zero for odd k, prod (j - 1) / (j - 1 + d) over even j <= k.
        let exact: f64 = p
            .iter()
            .enumerate()
            .map(|(k, a)| {
                if k % 2 == 1 {
                    return 0.0;
                }
                let mut mom = 1.0;
                let mut j = 2;
                while j <= k {
                    mom *= (j as f64 - 1.0) / (j as f64 - 1.0 + d as f64);
                    j += 2;
                }
                a * mom
            })
            .sum();
        let got = basis.integrate(|x| p.iter().rev().fold(0.0, |acc, a| acc * x + a));
        prop_assert!((got - exact).abs() < 1e-10, "{} vs {}", got, exact);
    }

    #[test]
    fn plancherel_on_cyclic_groups(vals in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..64)) {
        let grid = AbelianGrid::cyclic(vals.len()).unwrap();
        let f = grid.sample({
            let mut it = vals.iter();
            move |_| {
                let (a, b) = it.next().unwrap();
                Complex64::new(*a, *b)
            }
        });
        let lhs = f.l2_norm_sq();
        let rhs = fourier(&f).l2_norm_sq();
        prop_assert!((lhs - rhs).abs() < 1e-12 * lhs.max(1.0));
    }

    #[test]
    fn hermitian_functions_have_real_transforms(vals in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..64)) {
        let n = vals.len();
        let grid = AbelianGrid::cyclic(n).unwrap();
        let mut v: Vec<Complex64> = vals.iter().map(|&(a, b)| Complex64::new(a, b)).collect();
        for i in 0..n {
            let j = (n - i) % n;
            if j <= i {
                v[i] = if j == i { c(v[i].re) } else { v[j].conj() };
            }
        }
        let f = crate::abelian::SampledFunction::new(grid, v).unwrap();
        prop_assert!(f.hermitian_deviation().0 < 1e-15);
        for z in fourier(&f).values() {
            prop_assert!(z.im.abs() < 1e-12);
        }
    }

    #[test]
    fn nonnegative_spectra_are_certified(
        which in 0usize..3,
        spec in prop::collection::vec(0.0f64..1.0, 128),
    ) {
        let grid = match which {
            0 => AbelianGrid::cyclic(32).unwrap(),
            1 => AbelianGrid::circle(64).unwrap(),
            _ => AbelianGrid::cyclic(128).unwrap(),
        };
        let s = Spectrum::new(grid.clone(), spec[..grid.len()].iter().map(|&v| c(v)).collect()).unwrap();
        let f = inverse_fourier(&s);
        prop_assert_eq!(bochner_test(&f, 1e-9).verdict, Verdict::CertifiedPd);
    }

    #[test]
    fn bochner_matches_circulant_eigenvalues(
        spec in prop::collection::vec(prop_oneof![0.01f64..1.0, -1.0f64..-0.01], 2..=16),
    ) {
        let n = spec.len();
        let grid = AbelianGrid::cyclic(n).unwrap();
        let f = inverse_fourier(&Spectrum::new(grid.clone(), spec.iter().map(|&v| c(v)).collect()).unwrap());
        let verdict = bochner_test(&f, 1e-9).verdict;
        let vals = f.values().to_vec();
        let kernel = GramKernel::Abelian {
            grid: grid.clone(),
            f: Arc::new(move |u| vals[(u.round() as i64).rem_euclid(n as i64) as usize]),
        };
        let cfg = PointConfig {
            sphere_points: vec![],
            sphere2_points: vec![],
            group_points: grid.points().to_vec(),
            seed: 0,
        };
        let lam = min_eigenvalue(&gram_matrix(&kernel, &cfg).unwrap()).unwrap();
        let gram_pd = lam >= -1e-9;
        prop_assert_eq!(verdict == Verdict::CertifiedPd, gram_pd, "min eigenvalue {}", lam);
        prop_assert!(verdict != Verdict::Inconclusive);
    }

    #[test]
    fn schoenberg_coefficients_are_linear(
        d in 1u32..4,
        a in -2.0f64..2.0,
        b in -2.0f64..2.0,
        p in prop::collection::vec(-1.0f64..1.0, 8),
        q in prop::collection::vec(-1.0f64..1.0, 8),
    ) {
        let basis = SphereBasis::new(d, 10).unwrap();
        let poly = |c: Vec<f64>| move |x: f64| c.iter().rev().fold(0.0, |acc, v| acc * x + v);
        let (fp, fq) = (poly(p.clone()), poly(q.clone()));
        let fp2 = fp.clone();
        let fq2 = fq.clone();
        let sp = d_schoenberg(&KernelField::sphere(d, fp).unwrap(), &basis).unwrap();
        let sq = d_schoenberg(&KernelField::sphere(d, fq).unwrap(), &basis).unwrap();
        let sum = d_schoenberg(&KernelField::sphere(d, move |x| a * fp2(x) + b * fq2(x)).unwrap(), &basis).unwrap();
        for n in 0..=10 {
            let want = a * sp.scalar(n) + b * sq.scalar(n);
            prop_assert!((sum.scalar(n) - want).abs() < 1e-12, "n={}", n);
        }
    }
}

#[test]
fn arccos_series_reaches_its_tolerance() {
    let s = arccos_coeffs(200);
    let mut worst: f64 = 0.0;
    for i in 0..=180 {
        let x = -0.9 + 0.01 * i as f64;
        worst = worst.max((s.eval(x) - x.acos()).abs());
    }
    assert!(worst <= 1e-8, "{worst}");
}

/// `r_n(a) / n!` is the coefficient of `x^n` in `exp(a arcsin x)`. Expanding
/// `exp(a S) = sum_k a^k S^k / k!` with exact rational arcsine coefficients
/// gives the coefficient of `a^k` in `r_n` as `n! [x^n] S^k / k!`.
#[test]
fn polynomial_table_matches_formal_exponential() {
    const N: usize = 15;
    let int = |v: i64| BigRational::from_integer(BigInt::from(v));
    // arcsin x = sum_j (2j)! / (4^j (j!)^2 (2j + 1)) x^{2j+1}
    let mut s = vec![BigRational::zero(); N + 1];
    let mut central = BigRational::one();
    for j in 0..=(N - 1) / 2 {
        if j > 0 {
            central = central * int((2 * j - 1) as i64) / int((2 * j) as i64);
        }
        s[2 * j + 1] = central.clone() / int((2 * j + 1) as i64);
    }
    let mul = |p: &[BigRational], q: &[BigRational]| {
        let mut out = vec![BigRational::zero(); N + 1];
        for (i, a) in p.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in q.iter().enumerate().take(N + 1 - i) {
                out[i + j] += a * b;
            }
        }
        out
    };
    let mut power = vec![BigRational::zero(); N + 1];
    power[0] = BigRational::one();
    let mut fact_k = BigRational::one();
    let mut expected = vec![vec![BigRational::zero(); N + 1]; N + 1];
    #[allow(clippy::needless_range_loop)]
    for k in 0..=N {
        if k > 0 {
            power = mul(&power, &s);
            fact_k *= int(k as i64);
        }
        let mut fact_n = BigRational::one();
        for (n, coeff) in power.iter().enumerate() {
            if n > 0 {
                fact_n *= int(n as i64);
            }
            expected[n][k] = coeff * &fact_n / &fact_k;
        }
    }
    let table = rn_table(N);
    for (n, row) in expected.iter().enumerate() {
        for (k, want) in row.iter().enumerate() {
            assert!(want.is_integer(), "n={n} k={k}");
            let got = table
                .coefficients(n)
                .get(k)
                .map(|v| BigInt::from(v.clone()))
                .unwrap_or_default();
            assert_eq!(got, want.to_integer(), "n={n} k={k}");
        }
    }
}

#[test]
fn norm_keeps_growing() {
    let mut n = 1;
    let mut prev = ln_norm(1).unwrap();
    let mut last_step = 0.0;
    while n < 1024 {
        n *= 2;
        let v = ln_norm(n).unwrap();
        assert!(v > prev);
        last_step = v - prev;
        prev = v;
    }
    let slope = 8.0 / std::f64::consts::PI * 2f64.ln();
    assert!(last_step >= 0.9 * slope, "{last_step}");
}

/// The full group `Z_8 x Z_8` as 64 Gram points; its eigenvalues are the
/// two-dimensional transform values.
#[test]
fn product_certifier_agrees_with_full_gram_matrix() {
    use rand::{Rng, SeedableRng};
    let grid = AbelianGrid::cyclic(8).unwrap();
    let settings = NumericSettings::default();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(21);
    for trial in 0..100 {
        let mut terms: Vec<(f64, f64, f64)> = (0..3)
            .map(|_| {
                (
                    rng.random_range(0..8) as f64,
                    rng.random_range(0..8) as f64,
                    rng.random_range(0.1..1.0),
                )
            })
            .collect();
        if trial % 2 == 0 {
            terms.push((
                rng.random_range(0..8) as f64,
                rng.random_range(0..8) as f64,
                -1.5,
            ));
        }
        let f = move |x: f64, u: f64| -> f64 {
            terms
                .iter()
                .map(|&(p, q, a)| a * (std::f64::consts::PI * (p * x + q * u) / 4.0).cos())
                .sum()
        };
        let field = ProductField::from_fn(grid.clone(), grid.clone(), |x, u| c(f(x, u))).unwrap();
        let verdict = gneiting_certify(&field, &settings).unwrap().verdict;
        let pts: Vec<(f64, f64)> = (0..8)
            .flat_map(|x| (0..8).map(move |u| (x as f64, u as f64)))
            .collect();
        let m = DMatrix::from_fn(64, 64, |i, j| {
            c(f(pts[i].0 - pts[j].0, pts[i].1 - pts[j].1))
        });
        let lam = min_eigenvalue(&m).unwrap();
        assert_ne!(verdict, Verdict::Inconclusive);
        assert_eq!(
            verdict == Verdict::CertifiedPd,
            lam >= -1e-9,
            "trial {trial}: {lam}"
        );
    }
}

/// Points seeded from a refuted degree: zonal configurations along a great
/// circle at the witness frequency expose a negative eigenvalue.
#[test]
fn refuted_series_are_exposed_by_witness_points() {
    use crate::Witness;
    let grid = AbelianGrid::cyclic(6).unwrap();
    let settings = NumericSettings::default();
    for d in 1..=3u32 {
        for flip in 0..4usize {
            let mut coeffs = [0.6, 0.5, 0.4, 0.3];
            coeffs[flip] = -coeffs[flip];
            let field = KernelField::closed(d, grid.clone(), move |x, u| {
                let cx = gegenbauer_all(d, 3, x.clamp(-1.0, 1.0)).unwrap();
                let time = 1.0 + 0.5 * (std::f64::consts::PI * u / 3.0).cos();
                c(coeffs.iter().zip(&cx).map(|(a, v)| a * v).sum::<f64>() * time)
            })
            .unwrap();
            let basis = SphereBasis::new(d, 5).unwrap();
            let r = certify_sphere_time(&field, &basis, &settings).unwrap();
            assert_eq!(r.verdict, Verdict::CertifiedNotPd);
            let Witness::Degree { n, .. } = r.witness else {
                panic!("{:?}", r.witness)
            };
            assert_eq!(n, flip);
            // 24 points on a great circle times the whole group.
            let m = 24;
            let mut cfg = PointConfig {
                sphere_points: vec![],
                sphere2_points: vec![],
                group_points: vec![],
                seed: 0,
            };
            for k in 0..m {
                let t = 2.0 * std::f64::consts::PI * k as f64 / m as f64;
                for u in 0..6 {
                    let mut p = vec![0.0; d as usize + 1];
                    p[0] = t.cos();
                    p[1] = t.sin();
                    cfg.sphere_points.push(p);
                    cfg.group_points.push(u as f64);
                }
            }
            let kernel = GramKernel::SphereAbelian {
                d,
                grid: grid.clone(),
                f: field.closure().unwrap(),
            };
            let lam = min_eigenvalue(&gram_matrix(&kernel, &cfg).unwrap()).unwrap();
            assert!(lam < -settings.transform_tol, "d={d} flip={flip}: {lam}");
        }
    }
}
