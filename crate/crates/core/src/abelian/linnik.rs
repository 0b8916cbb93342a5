//! Linnik densities `p_alpha`, whose Fourier transform is `1 / (1 + |t|^alpha)`.
//!
//! They are integrable with a nonnegative transform but unbounded at the
//! origin, which makes them a useful fixture for the transform machinery.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{GkError, Result};
use crate::quad::{gk15_nodes, integrate};
use crate::special_fn::gamma;

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(GkError::Domain {
            name: "alpha",
            value: alpha,
            domain: "(0, 1]",
        });
    }
    Ok(())
}

/// `p_alpha(x)` for `x != 0` from its Laplace-type integral representation,
/// `sin(alpha pi / 2) / pi * int_0^inf e^{-x y} y^alpha / |1 + y^alpha e^{i alpha pi / 2}|^2 dy`.
pub fn linnik_density(alpha: f64, x: f64) -> Result<f64> {
    check_alpha(alpha)?;
    let x = x.abs();
    if x == 0.0 || !x.is_finite() {
        return Err(GkError::Domain {
            name: "x",
            value: x,
            domain: "x != 0 (the density is unbounded at the origin)",
        });
    }
    let c = (alpha * PI / 2.0).cos();
    let s = (alpha * PI / 2.0).sin();
    // Substitute y = w / x so the exponential weight is e^{-w}.
    let integrand = |w: f64| {
        if w == 0.0 {
            return 0.0;
        }
        let ya = (w / x).powf(alpha);
        (-w).exp() * ya / (1.0 + 2.0 * c * ya + ya * ya)
    };
    // The mass of e^{-w} beyond w = 60 is below 1e-26.
    let r = integrate(integrand, 0.0, 60.0, 1e-15, 1e-11)?;
    Ok(s / (PI * x) * r.value)
}

/// Coefficients `a_k` of the large-`x` expansion `p(x) ~ sum_k a_k x^{-1 - k alpha}`.
fn asymptotic_coefficients(alpha: f64, terms: usize) -> Vec<f64> {
    (1..=terms)
        .map(|k| {
            let k = k as f64;
            let sign = if (k as i64) % 2 == 1 { 1.0 } else { -1.0 };
            sign * gamma(1.0 + k * alpha) * (k * alpha * PI / 2.0).sin() / PI
        })
        .collect()
}

/// Numerical Fourier transform `2 int_0^inf p(x) cos(t x) dx` at each `t`.
///
/// The integral is split into dyadic panels towards the singular origin,
/// unit panels up to `x = 200`, width-two panels up to `x = 5000`, and an
/// asymptotic tail correction beyond that.
pub fn linnik_transform(alpha: f64, t_grid: &[f64]) -> Result<Vec<f64>> {
    check_alpha(alpha)?;
    let mut panels: Vec<(f64, f64)> = Vec::new();
    // Dyadic panels on (2^-60, 1].
    for k in (0..60).rev() {
        panels.push((0.5f64.powi(k + 1), 0.5f64.powi(k)));
    }
    let mut x = 1.0;
    while x < 200.0 {
        panels.push((x, x + 1.0));
        x += 1.0;
    }
    while x < 5000.0 {
        panels.push((x, x + 2.0));
        x += 2.0;
    }
    let upper = x;

    // Tabulate p on the Kronrod nodes of every panel once; reuse for every t.
    let tabulated: Vec<Vec<(f64, f64, f64)>> = panels
        .par_iter()
        .map(|&(a, b)| {
            gk15_nodes(a, b)
                .iter()
                .map(|&(x, w)| linnik_density(alpha, x).map(|p| (x, w, p)))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;

    let p_upper = linnik_density(alpha, upper)?;
    let asym = asymptotic_coefficients(alpha, 3);

    let transform = t_grid
        .iter()
        .map(|&t| {
            let total: f64 = tabulated
                .iter()
                .flatten()
                .map(|&(x, w, p)| w * p * (t * x).cos())
                .sum();
            let tail = if t == 0.0 {
                asym.iter()
                    .enumerate()
                    .map(|(k, ak)| {
                        let e = (k + 1) as f64 * alpha;
                        ak * upper.powf(-e) / e
                    })
                    .sum::<f64>()
            } else {
                // Leading term of integration by parts.
                -p_upper * (t * upper).sin() / t
            };
            2.0 * (total + tail)
        })
        .collect();
    Ok(transform)
}

/// Largest deviation of the numerical transform of `p_alpha` from
/// `(1 + |t|^alpha)^{-1}` over `t_grid`.
pub fn linnik_check(alpha: f64, t_grid: &[f64]) -> Result<f64> {
    let ft = linnik_transform(alpha, t_grid)?;
    Ok(t_grid
        .iter()
        .zip(ft)
        .map(|(&t, v)| (v - 1.0 / (1.0 + t.abs().powf(alpha))).abs())
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn origin_and_alpha_are_guarded() {
        assert!(linnik_density(0.5, 0.0).is_err());
        assert!(linnik_density(1.5, 1.0).is_err());
        assert!(linnik_density(0.0, 1.0).is_err());
    }

    #[test]
    fn density_is_symmetric_and_decreasing() {
        let a = linnik_density(0.5, 0.3).unwrap();
        assert_eq!(a, linnik_density(0.5, -0.3).unwrap());
        assert!(a > linnik_density(0.5, 0.6).unwrap());
    }

    #[test]
    fn cauchy_type_closed_form_for_alpha_one() {
        // F p_1(t) = 1 / (1 + |t|), so p_1(x) = (1/pi) int_0^inf cos(t x) / (1 + t) dt.
        // The oscillatory integral is cut at T = 2 pi K / x, where the
        // boundary term of integration by parts vanishes.
        for &x in &[0.5, 1.0, 2.0] {
            let period = 2.0 * PI / x;
            let mut total = 0.0;
            for k in 0..4000 {
                let a = k as f64 * period;
                total += integrate(
                    |t: f64| (t * x).cos() / (1.0 + t),
                    a,
                    a + period,
                    1e-14,
                    1e-12,
                )
                .unwrap()
                .value;
            }
            let upper = 4000.0 * period;
            total += 1.0 / (x * x * (1.0 + upper).powi(2));
            let oracle = total / PI;
            let p = linnik_density(1.0, x).unwrap();
            assert!((p - oracle).abs() < 1e-6, "x={x}: {p} vs {oracle}");
        }
    }

    #[test]
    fn transform_at_zero_is_one() {
        let dev = linnik_check(1.0, &[0.0]).unwrap();
        assert!(dev <= 1e-4, "deviation {dev:e}");
    }

    #[test]
    fn half_alpha_spot_frequencies() {
        let dev = linnik_check(0.5, &[-2.0, -1.0, 1.0, 2.0]).unwrap();
        assert!(dev <= 1e-3, "deviation {dev:e}");
    }
}
