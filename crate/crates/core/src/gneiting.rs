//! Completely monotone mixtures `rho(theta) = sum_k w_k exp(-a_k theta)`
//! composed with `theta = arccos x`, their exact power-series coefficients
//! and the membership test for power series with nonnegative coefficients.

use std::f64::consts::PI;
use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{GkError, Result};
use crate::special_fn::half_pochhammer_ratios;

/// Finite mixture of `exp(-a theta)` with positive weights summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct CmMixture {
    atoms: Vec<(f64, f64)>,
}

impl CmMixture {
    /// Atoms are `(a_k, w_k)`.
    pub fn new(atoms: Vec<(f64, f64)>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(GkError::InvalidInput(
                "mixture needs at least one atom".into(),
            ));
        }
        for &(a, w) in &atoms {
            if !(a >= 0.0 && a.is_finite()) {
                return Err(GkError::Domain {
                    name: "a",
                    value: a,
                    domain: "[0, inf)",
                });
            }
            if !(w > 0.0 && w.is_finite()) {
                return Err(GkError::Domain {
                    name: "w",
                    value: w,
                    domain: "(0, inf)",
                });
            }
        }
        let total: f64 = atoms.iter().map(|p| p.1).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(GkError::InvalidInput(format!(
                "mixture weights sum to {total}, expected 1"
            )));
        }
        Ok(Self { atoms })
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    /// `rho(theta)`.
    pub fn eval(&self, theta: f64) -> f64 {
        self.atoms
            .iter()
            .map(|&(a, w)| w * (-a * theta).exp())
            .sum()
    }
}

/// The monic polynomials `r_n(a)` with
/// `exp(-a arccos x) = e^{-a pi / 2} sum_n r_n(a) x^n / n!`.
#[derive(Debug, Clone, PartialEq)]
pub struct RnPolynomials {
    table: Vec<Vec<BigUint>>,
}

impl RnPolynomials {
    pub fn max_n(&self) -> usize {
        self.table.len() - 1
    }

    /// Coefficients of `r_n`, index `j` holding the coefficient of `a^j`.
    pub fn coefficients(&self, n: usize) -> &[BigUint] {
        &self.table[n]
    }

    /// `r_n(a)` in floating point (Horner).
    pub fn eval(&self, n: usize, a: f64) -> f64 {
        self.table[n]
            .iter()
            .rev()
            .fold(0.0, |acc, c| acc * a + c.to_f64().unwrap_or(f64::INFINITY))
    }

    /// One line per polynomial, e.g. `r_5(a) = a^5 + 10a^3 + 9a`.
    pub fn listing(&self) -> String {
        (0..self.table.len())
            .map(|n| format!("r_{n}(a) = {}\n", poly_string(&self.table[n])))
            .collect()
    }

    /// CSV with header `n,power,coefficient`, nonzero coefficients only.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,power,coefficient\n");
        for (n, row) in self.table.iter().enumerate() {
            for (j, c) in row.iter().enumerate().rev() {
                if !c.is_zero() {
                    out.push_str(&format!("{n},{j},{c}\n"));
                }
            }
        }
        out
    }
}

impl fmt::Display for RnPolynomials {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.listing())
    }
}

fn poly_string(coeffs: &[BigUint]) -> String {
    let terms: Vec<String> = coeffs
        .iter()
        .enumerate()
        .rev()
        .filter(|(_, c)| !c.is_zero())
        .map(|(j, c)| {
            let coef = if c.is_one() && j > 0 {
                String::new()
            } else {
                c.to_string()
            };
            match j {
                0 => coef,
                1 => format!("{coef}a"),
                _ => format!("{coef}a^{j}"),
            }
        })
        .collect();
    if terms.is_empty() {
        "0".into()
    } else {
        terms.join(" + ")
    }
}

/// `r_{n+1}(a) = a sum_{k <= n/2} C(n, 2k) r_{n-2k}(a) ((2k-1)!!)^2`,
/// `r_0 = 1`, in exact integers.
pub fn rn_table(max_n: usize) -> RnPolynomials {
    // binom[k] = C(n, k) for the current n; dfsq[k] = ((2k-1)!!)^2.
    let mut dfsq: Vec<BigUint> = vec![BigUint::one()];
    for k in 1..=max_n / 2 + 1 {
        let odd = BigUint::from(2 * k - 1);
        let next = &dfsq[k - 1] * &odd * &odd;
        dfsq.push(next);
    }
    let mut table: Vec<Vec<BigUint>> = vec![vec![BigUint::one()]];
    let mut binom: Vec<BigUint> = vec![BigUint::one()];
    for n in 0..max_n {
        let mut next = vec![BigUint::zero(); n + 2];
        for k in 0..=n / 2 {
            let factor = &binom[2 * k] * &dfsq[k];
            for (j, c) in table[n - 2 * k].iter().enumerate() {
                if !c.is_zero() {
                    next[j + 1] += &factor * c;
                }
            }
        }
        table.push(next);
        let mut nb = vec![BigUint::one(); n + 2];
        for k in 1..=n {
            nb[k] = &binom[k - 1] + &binom[k];
        }
        binom = nb;
    }
    RnPolynomials { table }
}

/// `r_n(a) / n!` for `n <= max_n` by the scaled recursion
/// `(n + 1) s_{n+1} = a sum_k t_k s_{n-2k}`, `t_k = (1/2)_k / k!`.
/// Every term is positive, so the recursion is stable.
fn scaled_rn(a: f64, max_n: usize) -> Vec<f64> {
    let t = half_pochhammer_ratios(max_n / 2 + 1);
    let mut s = vec![0.0; max_n + 1];
    s[0] = 1.0;
    for n in 0..max_n {
        let acc: f64 = (0..=n / 2).map(|k| t[k] * s[n - 2 * k]).sum();
        s[n + 1] = a * acc / (n + 1) as f64;
    }
    s
}

/// Taylor coefficients `e^{-a pi / 2} r_n(a) / n!` of `exp(-a arccos x)`.
pub fn exp_arccos_coeffs(a: f64, max_n: usize) -> Result<Vec<f64>> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(GkError::Domain {
            name: "a",
            value: a,
            domain: "(0, inf)",
        });
    }
    let scale = (-a * PI / 2.0).exp();
    Ok(scaled_rn(a, max_n).into_iter().map(|s| s * scale).collect())
}

/// Mixture coefficients `c_n = sum_k w_k e^{-a_k pi / 2} r_n(a_k)` together
/// with the Taylor coefficients `c_n / n!` of `rho(arccos x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureCoefficients {
    pub c: Vec<f64>,
    pub taylor: Vec<f64>,
}

pub fn cm_mixture_coeffs(mix: &CmMixture, max_n: usize) -> MixtureCoefficients {
    let mut taylor = vec![0.0; max_n + 1];
    for &(a, w) in &mix.atoms {
        let scale = w * (-a * PI / 2.0).exp();
        if a == 0.0 {
            taylor[0] += scale;
            continue;
        }
        for (t, s) in taylor.iter_mut().zip(scaled_rn(a, max_n)) {
            *t += scale * s;
        }
    }
    let mut fact = 1.0;
    let c = taylor
        .iter()
        .enumerate()
        .map(|(n, t)| {
            if n > 0 {
                fact *= n as f64;
            }
            t * fact
        })
        .collect();
    MixtureCoefficients { c, taylor }
}

/// Outcome of [`psi_infinity_check`].
#[derive(Debug, Clone, PartialEq)]
pub struct PsiReport {
    pub pass: bool,
    /// Index of the most negative coefficient below `-tol`.
    pub witness: Option<usize>,
    pub min_value: f64,
    /// `sum_n |b_n|` over the given coefficients.
    pub partial_sum: f64,
    /// Estimated remainder `sum_{n > N} b_n`.
    pub tail_estimate: f64,
    pub tail_tol: f64,
    /// Fitted `p` in `b_n ~ n^{-p}`, when the trailing coefficients are not negligible.
    pub decay_exponent: Option<f64>,
    pub notes: Vec<String>,
}

impl PsiReport {
    pub fn verdict(&self) -> &'static str {
        if self.pass {
            "PASS"
        } else {
            "FAIL"
        }
    }
}

impl fmt::Display for PsiReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "verdict: {}", self.verdict())?;
        match self.witness {
            Some(n) => writeln!(f, "witness: n={n}")?,
            None => writeln!(f, "witness: none")?,
        }
        writeln!(f, "min_value: {:e}", self.min_value)?;
        writeln!(f, "partial_sum: {:e}", self.partial_sum)?;
        writeln!(f, "tail_estimate: {:e}", self.tail_estimate)?;
        writeln!(f, "tail_tol: {:e}", self.tail_tol)?;
        if let Some(p) = self.decay_exponent {
            writeln!(f, "decay_exponent: {p}")?;
        }
        for n in &self.notes {
            writeln!(f, "note: {n}")?;
        }
        Ok(())
    }
}

/// Minimum decay exponent accepted as evidence of a summable tail.
const MIN_DECAY: f64 = 1.1;

/// Tests a truncated power series `sum b_n x^n` for membership in the class
/// of nonnegative-coefficient series with `sum b_n < inf`.
///
/// Convergence is accepted when the last coefficients are below
/// `tail_rel * sum |b_n|`, or when a power law fitted to the second half of
/// the nonzero coefficients decays faster than `n^{-1.1}`; the reported tail
/// then extrapolates that law.
pub fn psi_infinity_check(coeffs: &[f64], tol: f64, tail_rel: f64) -> PsiReport {
    let partial_sum: f64 = coeffs.iter().map(|b| b.abs()).sum();
    let tail_tol = tail_rel * partial_sum.max(f64::MIN_POSITIVE);
    let (witness, min_value) = coeffs
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(n, &v)| (if v < -tol { Some(n) } else { None }, v))
        .unwrap_or((None, 0.0));
    let mut report = PsiReport {
        pass: false,
        witness,
        min_value,
        partial_sum,
        tail_estimate: 0.0,
        tail_tol,
        decay_exponent: None,
        notes: Vec::new(),
    };
    if coeffs.is_empty() {
        report.pass = true;
        return report;
    }
    if witness.is_some() {
        report.notes.push("negative coefficient".into());
        return report;
    }
    let n = coeffs.len();
    let last = coeffs[n.saturating_sub(2)..]
        .iter()
        .map(|b| b.abs())
        .fold(0.0, f64::max);
    if last <= tail_tol {
        report.tail_estimate = last;
        report.pass = true;
        return report;
    }
    // Least-squares fit of log b_n against log n over the second half.
    let pts: Vec<(f64, f64)> = (n / 2..n)
        .filter(|&k| k > 0 && coeffs[k] > tail_tol)
        .map(|k| ((k as f64).ln(), coeffs[k].ln()))
        .collect();
    if pts.len() < 3 {
        report.tail_estimate = last;
        report
            .notes
            .push("too few trailing coefficients to judge convergence".into());
        return report;
    }
    let m = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1));
    let (mx, my) = (sx / m, sy / m);
    let (sxy, sxx) = pts.iter().fold((0.0, 0.0), |a, p| {
        (a.0 + (p.0 - mx) * (p.1 - my), a.1 + (p.0 - mx).powi(2))
    });
    let p = -sxy / sxx;
    report.decay_exponent = Some(p);
    // Nonzero coefficients may occur on one parity only; rescale accordingly.
    let density = pts.len() as f64 / (n - n / 2) as f64;
    let nn = (n - 1) as f64;
    if p > MIN_DECAY {
        // b_k ~ C k^{-p} with C fitted at the end: sum_{k > N} ~ C N^{1-p} / (p - 1).
        let c = (my + p * mx).exp();
        report.tail_estimate = density * c * nn.powf(1.0 - p) / (p - 1.0);
        report.pass = true;
        report.notes.push(format!(
            "power-law tail n^-{p:.3}; remainder is extrapolated"
        ));
    } else {
        report.tail_estimate = f64::INFINITY;
        report.notes.push(format!(
            "coefficients decay like n^-{p:.3}: no evidence of convergence"
        ));
    }
    report
}
