//! Zonal spherical functions for the pair (O(d+1), O(d)): normalized
//! Gegenbauer polynomials, harmonic dimensions, the probability measure
//! `tau_d` on [-1, 1] and its Gaussian quadrature, plus the power series of
//! `arccos`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{GkError, Result};

/// Gamma function at a positive half-integer `k / 2`.
fn gamma_half_integer(twice: u32) -> f64 {
    // Gamma(1/2) = sqrt(pi), Gamma(1) = 1, Gamma(x + 1) = x Gamma(x).
    let (mut x, mut g) = if twice.is_multiple_of(2) {
        (1.0, 1.0)
    } else {
        (0.5, PI.sqrt())
    };
    let target = twice as f64 / 2.0;
    while x < target - 0.25 {
        g *= x;
        x += 1.0;
    }
    g
}

/// Total surface measure of the unit sphere `S^d` in `R^{d+1}`,
/// `2 pi^{(d+1)/2} / Gamma((d+1)/2)`.
pub fn surface_measure(d: u32) -> f64 {
    2.0 * PI.powf((d as f64 + 1.0) / 2.0) / gamma_half_integer(d + 1)
}

/// Gamma function for real arguments.
pub fn gamma(x: f64) -> f64 {
    libm::tgamma(x)
}

fn check_unit_interval(x: f64) -> Result<()> {
    if x.is_nan() || x.abs() > 1.0 {
        return Err(GkError::Domain {
            name: "x",
            value: x,
            domain: "[-1, 1]",
        });
    }
    Ok(())
}

fn check_dimension(d: u32) -> Result<()> {
    if d == 0 {
        return Err(GkError::Domain {
            name: "d",
            value: 0.0,
            domain: "d >= 1",
        });
    }
    Ok(())
}

/// Writes `c_0(d, x), ..., c_{out.len()-1}(d, x)` into `out`.
///
/// Uses the recurrence on the normalized functions,
/// `c_{n+1} = ((2n + d - 1) x c_n - n c_{n-1}) / (n + d - 1)`,
/// which for `d = 1` reduces to the Chebyshev recurrence.
fn fill_gegenbauer(d: u32, x: f64, out: &mut [f64]) {
    let dm1 = d as f64 - 1.0;
    let mut prev = 1.0;
    let mut cur = x;
    for (n, slot) in out.iter_mut().enumerate() {
        match n {
            0 => *slot = 1.0,
            1 => *slot = x,
            _ => {
                let k = (n - 1) as f64;
                let next = ((2.0 * k + dm1) * x * cur - k * prev) / (k + dm1);
                prev = cur;
                cur = next;
                *slot = next;
            }
        }
    }
}

/// Normalized Gegenbauer polynomial `c_n(d, x) = C_n^{(d-1)/2}(x) / C_n^{(d-1)/2}(1)`.
///
/// For `d = 1` this is the Chebyshev limit `cos(n arccos x)`.
pub fn gegenbauer_c(d: u32, n: usize, x: f64) -> Result<f64> {
    check_dimension(d)?;
    check_unit_interval(x)?;
    let mut values = vec![0.0; n + 1];
    fill_gegenbauer(d, x, &mut values);
    Ok(values[n])
}

/// All of `c_0(d, x), ..., c_max(d, x)`.
pub fn gegenbauer_all(d: u32, max_degree: usize, x: f64) -> Result<Vec<f64>> {
    check_dimension(d)?;
    check_unit_interval(x)?;
    let mut values = vec![0.0; max_degree + 1];
    fill_gegenbauer(d, x, &mut values);
    Ok(values)
}

fn binomial_u128(a: u128, k: u128) -> Option<u128> {
    if k > a {
        return Some(0);
    }
    let k = k.min(a - k);
    let mut r: u128 = 1;
    for i in 0..k {
        // C(a, i) * (a - i) = C(a, i + 1) * (i + 1), so the division is exact.
        r = r.checked_mul(a - i)? / (i + 1);
    }
    Some(r)
}

/// Dimension `N_n(d)` of the space of degree-`n` spherical harmonics on `S^d`,
/// i.e. the Plancherel weight of `c_n(d, .)`.
pub fn harmonic_dim(d: u32, n: usize) -> Result<u64> {
    check_dimension(d)?;
    if n == 0 {
        return Ok(1);
    }
    let overflow = || GkError::Overflow(format!("N_{n}({d})"));
    let n128 = n as u128;
    let d128 = d as u128;
    // N_n(d) = (d)_{n-1} (2n + d - 1) / n! = C(n + d - 2, n - 1) (2n + d - 1) / n
    let b = binomial_u128(n128 + d128 - 2, n128 - 1).ok_or_else(overflow)?;
    let v = b.checked_mul(2 * n128 + d128 - 1).ok_or_else(overflow)? / n128;
    u64::try_from(v).map_err(|_| overflow())
}

/// Zonal basis on `S^d` truncated at `max_degree`, with a Gaussian
/// quadrature for `tau_d` and the basis functions tabulated at its nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereBasis {
    d: u32,
    max_degree: usize,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    /// `values[n][j] = c_n(d, nodes[j])`.
    values: Vec<Vec<f64>>,
    dims: Vec<f64>,
}

impl SphereBasis {
    /// Basis with the default quadrature order `2 (max_degree + 1)`.
    pub fn new(d: u32, max_degree: usize) -> Result<Self> {
        Self::with_quadrature(d, max_degree, 2 * (max_degree + 1))
    }

    pub fn with_quadrature(d: u32, max_degree: usize, quad_order: usize) -> Result<Self> {
        check_dimension(d)?;
        let (nodes, weights) = build_quadrature(d, quad_order)?;
        let mut values = vec![vec![0.0; nodes.len()]; max_degree + 1];
        let mut column = vec![0.0; max_degree + 1];
        for (j, &x) in nodes.iter().enumerate() {
            fill_gegenbauer(d, x, &mut column);
            for (n, &c) in column.iter().enumerate() {
                values[n][j] = c;
            }
        }
        let dims = (0..=max_degree)
            .map(|n| harmonic_dim(d, n).map(|v| v as f64))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            d,
            max_degree,
            nodes,
            weights,
            values,
            dims,
        })
    }

    pub fn dimension(&self) -> u32 {
        self.d
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    pub fn quad_order(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `c_n(d, x_j)` for every quadrature node `x_j`.
    pub fn values(&self, n: usize) -> &[f64] {
        &self.values[n]
    }

    /// Plancherel weight `N_n(d)` as a float.
    pub fn plancherel_weight(&self, n: usize) -> f64 {
        self.dims[n]
    }

    /// `sum_j w_j g(x_j)`.
    pub fn integrate<F: Fn(f64) -> f64>(&self, g: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * g(x))
            .sum()
    }

    /// `|sum_j w_j - 1|`, the residual of integrating the constant function.
    pub fn constant_residual(&self) -> f64 {
        (self.weights.iter().sum::<f64>() - 1.0).abs()
    }
}

/// Gaussian quadrature with `m` nodes for the probability measure
/// `tau_d(dx) = (sigma_{d-1} / sigma_d) (1 - x^2)^{d/2 - 1} dx` on (-1, 1).
///
/// Nodes are the eigenvalues of the Jacobi matrix of the monic Gegenbauer
/// recurrence and weights are the squared first eigenvector components.
pub fn build_quadrature(d: u32, m: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    check_dimension(d)?;
    if m == 0 {
        return Err(GkError::InvalidInput(
            "quadrature order must be >= 1".into(),
        ));
    }
    let lambda = (d as f64 - 1.0) / 2.0;
    let mut jacobi = DMatrix::<f64>::zeros(m, m);
    for k in 1..m {
        let kf = k as f64;
        // Monic recurrence p_{k+1} = x p_k - beta_k p_{k-1}.
        let beta = if d == 1 {
            if k == 1 {
                0.5
            } else {
                0.25
            }
        } else {
            kf * (kf + 2.0 * lambda - 1.0) / (4.0 * (kf + lambda) * (kf + lambda - 1.0))
        };
        let off = beta.sqrt();
        jacobi[(k, k - 1)] = off;
        jacobi[(k - 1, k)] = off;
    }
    let eig = SymmetricEigen::try_new(jacobi, f64::EPSILON, 1000 * m.max(1))
        .ok_or(GkError::EigenNoConvergence(m))?;
    let mut pairs: Vec<(f64, f64)> = (0..m)
        .map(|i| (eig.eigenvalues[i], eig.eigenvectors[(0, i)].powi(2)))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));

    // tau_d is symmetric; enforce it exactly so odd moments vanish.
    let mut nodes = vec![0.0; m];
    let mut weights = vec![0.0; m];
    for i in 0..m {
        let j = m - 1 - i;
        nodes[i] = 0.5 * (pairs[i].0 - pairs[j].0);
        weights[i] = 0.5 * (pairs[i].1 + pairs[j].1);
    }
    if m % 2 == 1 {
        nodes[m / 2] = 0.0;
    }
    Ok((nodes, weights))
}

/// Truncated power series `arccos(x) = pi/2 - sum_n (1/2)_n / n! x^{2n+1} / (2n+1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ArccosSeries {
    /// Coefficient of `x^k` for `k = 0..=n_terms`.
    coefficients: Vec<f64>,
}

impl ArccosSeries {
    pub fn n_terms(&self) -> usize {
        self.coefficients.len() - 1
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coefficients
            .iter()
            .rev()
            .fold(0.0, |acc, &c| acc * x + c)
    }
}

/// `(1/2)_n / n!` for `n = 0..len`.
pub(crate) fn half_pochhammer_ratios(len: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(len);
    let mut t = 1.0;
    for n in 0..len {
        if n > 0 {
            t *= (n as f64 - 0.5) / n as f64;
        }
        out.push(t);
    }
    out
}

pub fn arccos_coeffs(n_terms: usize) -> ArccosSeries {
    let n_terms = n_terms.max(1);
    let mut coefficients = vec![0.0; n_terms + 1];
    coefficients[0] = PI / 2.0;
    let ratios = half_pochhammer_ratios(n_terms / 2 + 1);
    for (n, t) in ratios.into_iter().enumerate() {
        let k = 2 * n + 1;
        if k > n_terms {
            break;
        }
        coefficients[k] = -t / k as f64;
    }
    ArccosSeries { coefficients }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn surface_measures() {
        assert!((surface_measure(0) - 2.0).abs() < 1e-14);
        assert!((surface_measure(1) - 2.0 * PI).abs() < 1e-13);
        assert!((surface_measure(2) - 4.0 * PI).abs() < 1e-13);
        // S^3: 2 pi^2
        assert!((surface_measure(3) - 2.0 * PI * PI).abs() < 1e-12);
    }

    #[test]
    fn gamma_matches_half_integers() {
        for twice in 1..30 {
            let x = twice as f64 / 2.0;
            let rel = (gamma(x) - gamma_half_integer(twice)).abs() / gamma_half_integer(twice);
            assert!(rel < 1e-13, "x={x} rel={rel:e}");
        }
        assert!((gamma(0.25) - 3.625_609_908_221_908).abs() < 1e-13);
    }

    #[test]
    fn gegenbauer_spot_values() {
        for d in 1..6 {
            for n in 0..20 {
                assert!((gegenbauer_c(d, n, 1.0).unwrap() - 1.0).abs() < 1e-12);
            }
        }
        for d in 2..6 {
            assert_eq!(gegenbauer_c(d, 1, 0.3).unwrap(), 0.3);
        }
        assert!((gegenbauer_c(2, 2, 0.0).unwrap() + 0.5).abs() < 1e-15);
    }

    #[test]
    fn circle_is_chebyshev() {
        for n in 0..30 {
            for &x in &[-1.0, -0.7, 0.0, 0.31, 0.99] {
                let expected = (n as f64 * f64::acos(x)).cos();
                assert!((gegenbauer_c(1, n, x).unwrap() - expected).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn legendre_closed_form() {
        // c_n(2, x) is the Legendre polynomial P_n.
        let x: f64 = 0.37;
        let p3 = 0.5 * (5.0 * x.powi(3) - 3.0 * x);
        assert!((gegenbauer_c(2, 3, x).unwrap() - p3).abs() < 1e-15);
    }

    #[test]
    fn gegenbauer_domain_error() {
        assert!(matches!(
            gegenbauer_c(2, 3, 1.5),
            Err(GkError::Domain { .. })
        ));
        assert!(gegenbauer_c(0, 3, 0.5).is_err());
    }

    #[test]
    fn harmonic_dims() {
        for d in 1..8 {
            assert_eq!(harmonic_dim(d, 0).unwrap(), 1);
        }
        assert_eq!(harmonic_dim(2, 1).unwrap(), 3);
        for n in 0..50 {
            assert_eq!(harmonic_dim(2, n).unwrap(), 2 * n as u64 + 1);
            if n > 0 {
                assert_eq!(harmonic_dim(1, n).unwrap(), 2);
            }
            // S^3: (n + 1)^2
            assert_eq!(harmonic_dim(3, n).unwrap(), (n as u64 + 1).pow(2));
        }
    }

    #[test]
    fn harmonic_dim_overflow_is_reported() {
        assert!(matches!(
            harmonic_dim(1000, 1000),
            Err(GkError::Overflow(_))
        ));
    }

    #[test]
    fn single_node_rule() {
        let (x, w) = build_quadrature(2, 1).unwrap();
        assert_eq!(x, vec![0.0]);
        assert!((w[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn second_moments() {
        for m in 2..12 {
            let (x, w) = build_quadrature(2, m).unwrap();
            let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x * x).sum();
            assert!((s - 1.0 / 3.0).abs() < 1e-12);
            let (x, w) = build_quadrature(3, m).unwrap();
            let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x * x).sum();
            assert!((s - 0.25).abs() < 1e-12);
        }
    }

    #[test]
    fn quadrature_invariants() {
        for d in 1..5 {
            for m in [1, 2, 5, 17, 130] {
                let (x, w) = build_quadrature(d, m).unwrap();
                assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12, "d={d} m={m}");
                assert!(w.iter().all(|&w| w > 0.0));
                assert!(x.windows(2).all(|p| p[0] < p[1]));
                assert!(x.iter().all(|&x| x > -1.0 && x < 1.0));
            }
        }
    }

    #[test]
    fn arccos_low_coefficients() {
        let s = arccos_coeffs(7);
        let c = s.coefficients();
        assert_eq!(c.len(), 8);
        assert!((c[0] - PI / 2.0).abs() < 1e-15);
        assert_eq!(c[1], -1.0);
        assert!((c[3] + 1.0 / 6.0).abs() < 1e-15);
        assert!((c[5] + 3.0 / 40.0).abs() < 1e-15);
        for k in (2..8).step_by(2) {
            assert_eq!(c[k], 0.0);
        }
    }

    #[test]
    fn arccos_series_converges() {
        let s = arccos_coeffs(200);
        let mut worst: f64 = 0.0;
        for i in 0..=180 {
            let x = -0.9 + 0.01 * i as f64;
            worst = worst.max((s.eval(x) - x.acos()).abs());
        }
        assert!(worst <= 1e-8, "max error {worst:e}");
    }
}
