//! Schoenberg expansions `f(x, u) = sum_n b_{n,d}(u) c_n(d, x)` on `S^d x A`
//! and `S^{d1} x S^{d2}`, with certification through the coefficients.
//!
//! A kernel on `S^d x A` is positive definite exactly when every coefficient
//! function `b_{n,d}` is positive definite on `A`; on a product of spheres,
//! exactly when every double coefficient `B[n][m]` is nonnegative.

mod field;

pub use field::{BiKernelFn, BiSphereField, KernelField, KernelFn};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::abelian::{bochner_test_with, fourier, AbelianGrid, BochnerOptions, SampledFunction};
use crate::error::{GkError, Result};
use crate::report::{CertReport, Tolerances, Verdict, Witness};
use crate::settings::NumericSettings;
use crate::special_fn::{gegenbauer_all, SphereBasis};

/// Truncated family `b_{0,d}, ..., b_{N,d}` of coefficient functions on a
/// grid (scalars when the grid is the trivial group).
#[derive(Debug, Clone, PartialEq)]
pub struct SchoenbergSeries {
    d: u32,
    grid: AbelianGrid,
    coeffs: Vec<SampledFunction>,
}

impl SchoenbergSeries {
    pub fn new(d: u32, grid: AbelianGrid, coeffs: Vec<SampledFunction>) -> Result<Self> {
        if d == 0 {
            return Err(GkError::InvalidInput(
                "sphere dimension must be >= 1".into(),
            ));
        }
        if coeffs.is_empty() {
            return Err(GkError::InvalidInput("a series needs at least b_0".into()));
        }
        if coeffs.iter().any(|c| c.grid() != &grid) {
            return Err(GkError::InvalidInput("coefficient grid mismatch".into()));
        }
        Ok(Self { d, grid, coeffs })
    }

    /// Scalar series on `S^d` alone.
    pub fn from_scalars(d: u32, values: &[f64]) -> Result<Self> {
        let grid = AbelianGrid::trivial();
        let coeffs = values
            .iter()
            .map(|&v| SampledFunction::new(grid.clone(), vec![Complex64::new(v, 0.0)]))
            .collect::<Result<Vec<_>>>()?;
        Self::new(d, grid, coeffs)
    }

    pub fn dimension(&self) -> u32 {
        self.d
    }

    pub fn max_degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn grid(&self) -> &AbelianGrid {
        &self.grid
    }

    pub fn coefficients(&self) -> &[SampledFunction] {
        &self.coeffs
    }

    pub fn coefficient(&self, n: usize) -> &SampledFunction {
        &self.coeffs[n]
    }

    /// `Re b_n(e)`; the scalar coefficient when the grid is trivial.
    pub fn scalar(&self, n: usize) -> f64 {
        self.coeffs[n].at_identity().re
    }

    /// `sum_n |b_n(e)|`, the value of the kernel at the identity when all
    /// coefficients are positive definite.
    pub fn total_mass(&self) -> f64 {
        self.coeffs.iter().map(|c| c.at_identity().norm()).sum()
    }

    /// `sum_{n <= N} b_n(u_i) c_n(d, x)` at grid point index `i`.
    pub fn synthesize_index(&self, x: f64, i: usize) -> Result<Complex64> {
        let c = gegenbauer_all(self.d, self.max_degree(), x)?;
        Ok(self
            .coeffs
            .iter()
            .zip(c)
            .map(|(b, cn)| b.values()[i] * cn)
            .sum())
    }

    /// `sum_{n <= N} b_n(u) c_n(d, x)` for a group element `u` on the grid.
    pub fn synthesize(&self, x: f64, u: f64) -> Result<Complex64> {
        let i = self.grid.index_of(u).ok_or(GkError::Domain {
            name: "u",
            value: u,
            domain: "points of the coefficient grid",
        })?;
        self.synthesize_index(x, i)
    }

    /// Sum of the coefficients of degree `lo..=hi` at `(x, u_i)`.
    pub fn partial_sum_index(&self, x: f64, i: usize, lo: usize, hi: usize) -> Result<Complex64> {
        let c = gegenbauer_all(self.d, self.max_degree(), x)?;
        Ok((lo..=hi.min(self.max_degree()))
            .map(|n| self.coeffs[n].values()[i] * c[n])
            .sum())
    }

    /// `B_d(u) = sum_n |b_{n,d}(u)|`, which dominates `|f(x, u)|` for every `x`.
    pub fn bound(&self) -> SampledFunction {
        let mut values = vec![Complex64::new(0.0, 0.0); self.grid.len()];
        for b in &self.coeffs {
            for (acc, v) in values.iter_mut().zip(b.values()) {
                acc.re += v.norm();
            }
        }
        SampledFunction::new(self.grid.clone(), values).expect("grid length matches")
    }

    /// CSV with header `n,point,re,im` and 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,point,re,im\n");
        for (n, b) in self.coeffs.iter().enumerate() {
            for (u, v) in self.grid.points().iter().zip(b.values()) {
                out.push_str(&format!("{n},{u:.16e},{:.16e},{:.16e}\n", v.re, v.im));
            }
        }
        out
    }

    /// Inverse of [`SchoenbergSeries::to_csv`] for a known grid.
    pub fn from_csv(d: u32, grid: AbelianGrid, text: &str) -> Result<Self> {
        let mut lines = text.lines();
        match lines.next() {
            Some(h) if h.trim() == "n,point,re,im" => {}
            other => {
                return Err(GkError::InvalidInput(format!(
                    "unexpected series CSV header {other:?}"
                )))
            }
        }
        let mut rows: Vec<Vec<Complex64>> = Vec::new();
        for (lineno, line) in lines.enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let bad = || GkError::InvalidInput(format!("malformed series CSV row {}", lineno + 2));
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 4 {
                return Err(bad());
            }
            let n: usize = fields[0].parse().map_err(|_| bad())?;
            let u: f64 = fields[1].parse().map_err(|_| bad())?;
            let re: f64 = fields[2].parse().map_err(|_| bad())?;
            let im: f64 = fields[3].parse().map_err(|_| bad())?;
            if n >= rows.len() {
                rows.resize(n + 1, Vec::new());
            }
            let expected = grid.points().get(rows[n].len()).copied();
            if expected.is_none_or(|p| (p - u).abs() > 1e-12 * p.abs().max(1.0)) {
                return Err(GkError::InvalidInput(format!(
                    "series CSV row {} has point {u} off the grid",
                    lineno + 2
                )));
            }
            rows[n].push(Complex64::new(re, im));
        }
        let coeffs = rows
            .into_iter()
            .map(|values| SampledFunction::new(grid.clone(), values))
            .collect::<Result<Vec<_>>>()?;
        Self::new(d, grid, coeffs)
    }
}

fn series_from_samples(
    basis: &SphereBasis,
    grid: &AbelianGrid,
    samples: &[Complex64],
) -> Result<SchoenbergSeries> {
    let ng = grid.len();
    let weights = basis.weights();
    let coeffs = (0..=basis.max_degree())
        .into_par_iter()
        .map(|n| {
            let cn = basis.values(n);
            let dim = basis.plancherel_weight(n);
            let mut acc = vec![Complex64::new(0.0, 0.0); ng];
            for (j, (&w, &c)) in weights.iter().zip(cn).enumerate() {
                let row = &samples[j * ng..(j + 1) * ng];
                let s = w * c;
                for (a, v) in acc.iter_mut().zip(row) {
                    *a += v * s;
                }
            }
            for a in acc.iter_mut() {
                *a *= dim;
            }
            SampledFunction::new(grid.clone(), acc)
        })
        .collect::<Result<Vec<_>>>()?;
    SchoenbergSeries::new(basis.dimension(), grid.clone(), coeffs)
}

fn check_order(basis: &SphereBasis) -> Result<()> {
    if basis.quad_order() < basis.max_degree() + 1 {
        return Err(GkError::InvalidInput(format!(
            "quadrature order {} is below truncation + 1 = {}",
            basis.quad_order(),
            basis.max_degree() + 1
        )));
    }
    Ok(())
}

/// d-Schoenberg coefficients
/// `b_{n,d}(u) = N_n(d) int f(x, u) c_n(d, x) d tau_d(x)` for `n <= N`.
pub fn d_schoenberg(field: &KernelField, basis: &SphereBasis) -> Result<SchoenbergSeries> {
    check_order(basis)?;
    let samples = field.samples_on(basis)?;
    series_from_samples(basis, field.grid(), &samples)
}

/// Fubini-swapped coefficients: transform each row `f(x_j, .)` over the group
/// first, then expand in `c_n`. Returns `P[n][gamma]`, which must agree with
/// the transform of `b_{n,d}`.
pub fn partial_transform_coefficients(
    field: &KernelField,
    basis: &SphereBasis,
) -> Result<Vec<Vec<Complex64>>> {
    check_order(basis)?;
    let samples = field.samples_on(basis)?;
    let grid = field.grid();
    let ng = grid.len();
    let rows: Vec<Vec<Complex64>> = (0..basis.quad_order())
        .into_par_iter()
        .map(|j| {
            let row = SampledFunction::new(grid.clone(), samples[j * ng..(j + 1) * ng].to_vec())
                .expect("row length matches grid");
            fourier(&row).values().to_vec()
        })
        .collect();
    Ok((0..=basis.max_degree())
        .map(|n| {
            let mut acc = vec![Complex64::new(0.0, 0.0); ng];
            for ((row, &w), &c) in rows.iter().zip(basis.weights()).zip(basis.values(n)) {
                for (a, v) in acc.iter_mut().zip(row) {
                    *a += v * (w * c);
                }
            }
            let dim = basis.plancherel_weight(n);
            acc.iter_mut().for_each(|a| *a *= dim);
            acc
        })
        .collect())
}

fn max_node_residual(series: &SchoenbergSeries, basis: &SphereBasis, samples: &[Complex64]) -> f64 {
    let ng = series.grid().len();
    let mut worst: f64 = 0.0;
    for j in 0..basis.quad_order() {
        for i in 0..ng {
            let mut s = Complex64::new(0.0, 0.0);
            for n in 0..=series.max_degree() {
                s += series.coeffs[n].values()[i] * basis.values(n)[j];
            }
            worst = worst.max((samples[j * ng + i] - s).norm());
        }
    }
    worst
}

/// Truncation tail: the sup-norm of the last two coefficients together with
/// the residual of the truncated expansion at the quadrature nodes.
fn tail_estimate(series: &SchoenbergSeries, basis: &SphereBasis, samples: &[Complex64]) -> f64 {
    let n = series.max_degree();
    let last = series.coeffs[n.saturating_sub(1)..]
        .iter()
        .map(SampledFunction::max_abs)
        .fold(0.0, f64::max);
    let last = if n == 0 { 0.0 } else { last };
    last.max(max_node_residual(series, basis, samples))
}

/// Certify a kernel on `S^d x A` through its d-Schoenberg coefficients: every
/// `b_{n,d}` must pass the Bochner test on `A` and the truncation tail must
/// be below `tail_rel * sum_n |b_{n,d}(e)|`.
pub fn certify_sphere_time(
    field: &KernelField,
    basis: &SphereBasis,
    settings: &NumericSettings,
) -> Result<CertReport> {
    check_order(basis)?;
    let grid = field.grid();
    let ng = grid.len();
    let samples = field.samples_on(basis)?;
    let sup = samples.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let tol = settings.transform_tol;
    let mut base_tol = Tolerances {
        tol,
        negative_threshold: tol,
        boundary_guard: if grid.is_real_line() {
            settings.boundary_rel * sup
        } else {
            0.0
        },
        ..Tolerances::default()
    };

    // Hermitian symmetry in u.
    let mut herm = (0.0, 0);
    for j in 0..basis.quad_order() {
        for i in 0..ng {
            let dev = (samples[j * ng + grid.neg_index(i)] - samples[j * ng + i].conj()).norm();
            if dev > herm.0 {
                herm = (dev, i);
            }
        }
    }
    if herm.0 > tol {
        let mut r = CertReport::new(Verdict::CertifiedNotPd, base_tol);
        r.witness = Witness::Hermitian {
            point: grid.points()[herm.1],
        };
        r.min_value = -herm.0;
        r.truncation = Some(basis.max_degree());
        r.notes
            .push("f(x, -u) != conj f(x, u): not positive definite".into());
        return Ok(r);
    }

    if grid.is_real_line() {
        let mut edge: f64 = 0.0;
        for j in 0..basis.quad_order() {
            edge = edge
                .max(samples[j * ng].norm())
                .max(samples[j * ng + ng - 1].norm());
        }
        if sup > 0.0 && edge >= base_tol.boundary_guard {
            let mut r = CertReport::new(Verdict::Inconclusive, base_tol);
            r.witness = Witness::Boundary { edge_value: edge };
            r.truncation = Some(basis.max_degree());
            r.notes
                .push("kernel has not decayed at the edge of the time window".into());
            return Ok(r);
        }
    }

    let series = series_from_samples(basis, grid, &samples)?;
    let residual = basis.constant_residual();
    let reports: Vec<CertReport> = series
        .coeffs
        .par_iter()
        .enumerate()
        .map(|(n, b)| {
            let opts = BochnerOptions {
                tol,
                boundary_rel: settings.boundary_rel,
                extra_margin: residual * sup * basis.plancherel_weight(n),
                check_boundary: false,
            };
            bochner_test_with(b, &opts)
        })
        .collect();

    let tail = tail_estimate(&series, basis, &samples);
    let mass = series.total_mass();
    let tail_tol = settings.tail_rel
        * if mass > 0.0 {
            mass
        } else {
            sup.max(f64::MIN_POSITIVE)
        };
    base_tol.tail_tol = tail_tol;
    base_tol.discretization_error = reports
        .iter()
        .map(|r| r.tolerances.discretization_error)
        .fold(0.0, f64::max);

    let dual_of = |r: &CertReport| match r.witness {
        Witness::Frequency { dual, .. } if ng > 1 => Some(dual),
        _ => None,
    };
    let (worst_n, worst) = reports
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.min_value.total_cmp(&b.1.min_value))
        .expect("at least one coefficient");
    let failing = reports
        .iter()
        .enumerate()
        .filter(|(_, r)| r.verdict == Verdict::CertifiedNotPd)
        .min_by(|a, b| a.1.min_value.total_cmp(&b.1.min_value));

    let mut report = if let Some((n, r)) = failing {
        let mut out = CertReport::new(Verdict::CertifiedNotPd, base_tol);
        out.tolerances.negative_threshold = r.tolerances.negative_threshold;
        out.witness = Witness::Degree {
            n,
            dual: dual_of(r),
        };
        out.min_value = r.min_value;
        out
    } else {
        let verdict =
            if reports.iter().any(|r| r.verdict == Verdict::Inconclusive) || tail > tail_tol {
                Verdict::Inconclusive
            } else {
                Verdict::CertifiedPd
            };
        let mut out = CertReport::new(verdict, base_tol);
        out.tolerances.negative_threshold = worst.tolerances.negative_threshold;
        out.min_value = worst.min_value;
        out.witness = if verdict == Verdict::Inconclusive && tail > tail_tol {
            out.notes
                .push("truncation insufficient: tail above tail_tol".into());
            Witness::Truncation {
                n: basis.max_degree(),
            }
        } else {
            Witness::Degree {
                n: worst_n,
                dual: dual_of(worst),
            }
        };
        out
    };
    report.max_imag = reports.iter().map(|r| r.max_imag).fold(0.0, f64::max);
    report.truncation = Some(basis.max_degree());
    report.tail_estimate = Some(tail);

    if settings.cross_check {
        let swapped = partial_transform_coefficients(field, basis)?;
        let mut dev: f64 = 0.0;
        for (b, p) in series.coeffs.iter().zip(&swapped) {
            for (x, y) in fourier(b).values().iter().zip(p) {
                dev = dev.max((x - y).norm());
            }
        }
        report.notes.push(format!(
            "cross-check (partial transform first) max deviation {dev:e}"
        ));
    }
    Ok(report)
}

/// Double coefficients
/// `B[n][m] = N_n(d1) N_m(d2) sum_{j,k} w_j w_k f(x_j, y_k) c_n(d1, x_j) c_m(d2, y_k)`.
pub fn sphere_sphere_coefficients(
    field: &BiSphereField,
    b1: &SphereBasis,
    b2: &SphereBasis,
) -> Result<Vec<Vec<f64>>> {
    check_order(b1)?;
    check_order(b2)?;
    let samples = field.samples_on(b1, b2)?;
    Ok(table_from_samples(b1, b2, &samples))
}

fn table_from_samples(b1: &SphereBasis, b2: &SphereBasis, samples: &[f64]) -> Vec<Vec<f64>> {
    let m1 = b1.quad_order();
    let m2 = b2.quad_order();
    // G[n][k] = sum_j w_j c_n(x_j) f(x_j, y_k)
    let g: Vec<Vec<f64>> = (0..=b1.max_degree())
        .into_par_iter()
        .map(|n| {
            let mut row = vec![0.0; m2];
            for j in 0..m1 {
                let s = b1.weights()[j] * b1.values(n)[j];
                for (r, v) in row.iter_mut().zip(&samples[j * m2..(j + 1) * m2]) {
                    *r += s * v;
                }
            }
            row
        })
        .collect();
    g.iter()
        .enumerate()
        .map(|(n, row)| {
            (0..=b2.max_degree())
                .map(|m| {
                    let s: f64 = row
                        .iter()
                        .zip(b2.weights())
                        .zip(b2.values(m))
                        .map(|((g, w), c)| g * w * c)
                        .sum();
                    s * b1.plancherel_weight(n) * b2.plancherel_weight(m)
                })
                .collect()
        })
        .collect()
}

/// Certify a kernel on `S^{d1} x S^{d2}`: all `B[n][m] >= -tol` and both
/// marginal tails below `tail_rel * sum |B|`.
pub fn certify_sphere_sphere(
    field: &BiSphereField,
    b1: &SphereBasis,
    b2: &SphereBasis,
    settings: &NumericSettings,
) -> Result<CertReport> {
    check_order(b1)?;
    check_order(b2)?;
    let samples = field.samples_on(b1, b2)?;
    let table = table_from_samples(b1, b2, &samples);
    let sup = samples.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let n1 = b1.max_degree();
    let n2 = b2.max_degree();
    let residual = b1.constant_residual() + b2.constant_residual();
    let tol = settings.transform_tol;

    let mut worst = (f64::INFINITY, 0, 0);
    let mut failing: Option<(f64, usize, usize, f64)> = None;
    for (n, row) in table.iter().enumerate() {
        for (m, &v) in row.iter().enumerate() {
            if v < worst.0 {
                worst = (v, n, m);
            }
            let threshold =
                tol + residual * sup * b1.plancherel_weight(n) * b2.plancherel_weight(m);
            if v < -threshold && failing.is_none_or(|f| v < f.0) {
                failing = Some((v, n, m, threshold));
            }
        }
    }

    let marginal = |rows: &mut dyn Iterator<Item = f64>| rows.map(f64::abs).sum::<f64>();
    let lo1 = n1.saturating_sub(1);
    let lo2 = n2.saturating_sub(1);
    let tail1 = if n1 == 0 {
        0.0
    } else {
        marginal(&mut table[lo1..].iter().flatten().copied())
    };
    let tail2 = if n2 == 0 {
        0.0
    } else {
        marginal(&mut table.iter().flat_map(|row| row[lo2..].iter().copied()))
    };
    let tail = tail1.max(tail2);
    let mass: f64 = table.iter().flatten().map(|v| v.abs()).sum();
    let tail_tol = settings.tail_rel
        * if mass > 0.0 {
            mass
        } else {
            sup.max(f64::MIN_POSITIVE)
        };

    let mut tolerances = Tolerances {
        tol,
        negative_threshold: tol,
        tail_tol,
        ..Tolerances::default()
    };
    let mut report = if let Some((v, n, m, threshold)) = failing {
        tolerances.negative_threshold = threshold;
        let mut r = CertReport::new(Verdict::CertifiedNotPd, tolerances);
        r.min_value = v;
        r.witness = Witness::DegreePair { n, m };
        r
    } else {
        let verdict = if worst.0 >= -tol && tail <= tail_tol {
            Verdict::CertifiedPd
        } else {
            Verdict::Inconclusive
        };
        let mut r = CertReport::new(verdict, tolerances);
        r.min_value = worst.0;
        r.witness = if worst.0 >= -tol && tail > tail_tol {
            r.notes
                .push("truncation insufficient: marginal tail above tail_tol".into());
            Witness::Truncation { n: n1.max(n2) }
        } else {
            Witness::DegreePair {
                n: worst.1,
                m: worst.2,
            }
        };
        r
    };
    report.truncation = Some(n1.max(n2));
    report.tail_estimate = Some(tail);
    Ok(report)
}

#[cfg(test)]
mod tests;
