//! Spectral synthesis `C(x, u) = int phi(x) h(phi, u) d nu(phi)` of kernels
//! on `G x L` from a family of positive definite functions on `L`, and the
//! partial-transform certification of kernels on a product of two abelian
//! grids.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::abelian::{
    bochner_test, bochner_test_with, discretization_error, fourier, inverse_fourier, AbelianGrid,
    BochnerOptions, SampledFunction, Spectrum,
};
use crate::error::{GkError, Result};
use crate::report::{CertReport, Tolerances, Verdict, Witness};
use crate::schoenberg::KernelField;
use crate::settings::NumericSettings;
use crate::special_fn::{gegenbauer_all, harmonic_dim};

/// The compact or abelian factor `G` whose dual indexes the family.
#[derive(Debug, Clone, PartialEq)]
pub enum FirstFactor {
    /// `S^d`, indexed by degrees `n` with weights `N_n(d)`.
    Sphere(u32),
    /// An abelian grid, indexed by its dual grid with the dual Haar weight.
    Abelian(AbelianGrid),
}

/// A validated family `h(phi, .)` of positive definite functions on the
/// second factor.
#[derive(Debug, Clone)]
pub struct SpectralFamily {
    first: FirstFactor,
    second: AbelianGrid,
    h: Vec<SampledFunction>,
    weights: Vec<f64>,
    reports: Vec<CertReport>,
    tail_estimate: f64,
}

impl SpectralFamily {
    /// Validates the family and refuses it unless every `h(phi, .)` is
    /// certified positive definite and the weighted mass at the identity has
    /// a negligible tail.
    pub fn new(
        first: FirstFactor,
        second: AbelianGrid,
        h: Vec<SampledFunction>,
        settings: &NumericSettings,
    ) -> Result<Self> {
        if h.is_empty() {
            return Err(GkError::InvalidInput("spectral family is empty".into()));
        }
        if h.iter().any(|f| f.grid() != &second) {
            return Err(GkError::InvalidInput(
                "h(phi, .) is not sampled on the second grid".into(),
            ));
        }
        let weights: Vec<f64> = match &first {
            FirstFactor::Sphere(d) => {
                if *d == 0 {
                    return Err(GkError::InvalidInput(
                        "sphere dimension must be >= 1".into(),
                    ));
                }
                (0..h.len())
                    .map(|n| harmonic_dim(*d, n).map(|v| v as f64))
                    .collect::<Result<_>>()?
            }
            FirstFactor::Abelian(g) => {
                if h.len() != g.len() {
                    return Err(GkError::InvalidInput(format!(
                        "family has {} members but the first grid has {} dual points",
                        h.len(),
                        g.len()
                    )));
                }
                vec![g.dual_weight(); h.len()]
            }
        };
        for f in &h {
            if f.values()
                .iter()
                .any(|v| !v.re.is_finite() || !v.im.is_finite())
            {
                return Err(GkError::NonFinite("spectral family sample".into()));
            }
        }
        let reports: Vec<CertReport> = h
            .par_iter()
            .map(|f| bochner_test(f, settings.transform_tol))
            .collect();
        if let Some((i, r)) = reports.iter().enumerate().find(|(_, r)| !r.is_pd()) {
            return Err(GkError::RefusedFamily(format!(
                "h at index {i} is {} (min transform {:e})",
                r.verdict.as_str(),
                r.min_value
            )));
        }
        let masses: Vec<f64> = h
            .iter()
            .zip(&weights)
            .map(|(f, w)| w * f.at_identity().norm())
            .collect();
        let total: f64 = masses.iter().sum();
        let tail_estimate = match first {
            FirstFactor::Sphere(_) if h.len() > 1 => {
                masses[h.len() - 2..].iter().cloned().fold(0.0, f64::max)
            }
            _ => 0.0,
        };
        if tail_estimate > settings.tail_rel * total {
            return Err(GkError::RefusedFamily(format!(
                "weighted mass tail {tail_estimate:e} exceeds tail_tol {:e}",
                settings.tail_rel * total
            )));
        }
        Ok(Self {
            first,
            second,
            h,
            weights,
            reports,
            tail_estimate,
        })
    }

    pub fn first(&self) -> &FirstFactor {
        &self.first
    }

    pub fn second(&self) -> &AbelianGrid {
        &self.second
    }

    pub fn members(&self) -> &[SampledFunction] {
        &self.h
    }

    /// Plancherel weight of each index.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn reports(&self) -> &[CertReport] {
        &self.reports
    }

    pub fn tail_estimate(&self) -> f64 {
        self.tail_estimate
    }

    /// `sum_phi weight(phi) |h(phi, e)|`.
    pub fn total_mass(&self) -> f64 {
        self.h
            .iter()
            .zip(&self.weights)
            .map(|(f, w)| w * f.at_identity().norm())
            .sum()
    }

    /// `C(x, u_i)`: `sum_n N_n(d) c_n(d, x) h(n, u_i)` on a sphere, or the
    /// dual-Haar-weighted `sum_gamma gamma(x) h(gamma, u_i)` on a grid.
    pub fn synthesize_index(&self, x: f64, i: usize) -> Result<Complex64> {
        match &self.first {
            FirstFactor::Sphere(d) => {
                let c = gegenbauer_all(*d, self.h.len() - 1, x)?;
                Ok(self
                    .h
                    .iter()
                    .zip(&self.weights)
                    .zip(c)
                    .map(|((f, w), cn)| f.values()[i] * (w * cn))
                    .sum())
            }
            FirstFactor::Abelian(g) => Ok(self
                .h
                .iter()
                .enumerate()
                .map(|(k, f)| g.character(k, x) * f.values()[i] * self.weights[k])
                .sum()),
        }
    }

    pub fn synthesize(&self, x: f64, u: f64) -> Result<Complex64> {
        let i = self.second.index_of(u).ok_or(GkError::Domain {
            name: "u",
            value: u,
            domain: "points of the second grid",
        })?;
        self.synthesize_index(x, i)
    }

    /// The synthesized kernel on `S^d x A2` as a closed-form field.
    pub fn sphere_field(&self) -> Result<KernelField> {
        let FirstFactor::Sphere(d) = self.first else {
            return Err(GkError::InvalidInput("first factor is not a sphere".into()));
        };
        let fam = self.clone();
        KernelField::closed(d, self.second.clone(), move |x, u| {
            fam.synthesize(x, u).expect("node and grid point are valid")
        })
    }

    /// The synthesized kernel on `A1 x A2`, one inverse transform per `u`.
    pub fn product_field(&self) -> Result<ProductField> {
        let FirstFactor::Abelian(g1) = &self.first else {
            return Err(GkError::InvalidInput(
                "first factor is not an abelian grid".into(),
            ));
        };
        let n1 = g1.len();
        let n2 = self.second.len();
        let columns: Vec<Vec<Complex64>> = (0..n2)
            .into_par_iter()
            .map(|i| {
                let spec =
                    Spectrum::new(g1.clone(), self.h.iter().map(|f| f.values()[i]).collect())
                        .expect("length matches");
                inverse_fourier(&spec).into_values()
            })
            .collect();
        let mut values = vec![Complex64::new(0.0, 0.0); n1 * n2];
        for (i, col) in columns.iter().enumerate() {
            for (j, v) in col.iter().enumerate() {
                values[j * n2 + i] = *v;
            }
        }
        ProductField::new(g1.clone(), self.second.clone(), values)
    }
}

/// Samples of a kernel on `A1 x A2`, row-major in `(x, u)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductField {
    first: AbelianGrid,
    second: AbelianGrid,
    values: Vec<Complex64>,
}

impl ProductField {
    pub fn new(first: AbelianGrid, second: AbelianGrid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != first.len() * second.len() {
            return Err(GkError::InvalidInput(format!(
                "expected {} x {} samples, got {}",
                first.len(),
                second.len(),
                values.len()
            )));
        }
        if values
            .iter()
            .any(|v| !v.re.is_finite() || !v.im.is_finite())
        {
            return Err(GkError::NonFinite("product field sample".into()));
        }
        Ok(Self {
            first,
            second,
            values,
        })
    }

    pub fn from_fn<F: Fn(f64, f64) -> Complex64 + Sync>(
        first: AbelianGrid,
        second: AbelianGrid,
        f: F,
    ) -> Result<Self> {
        let n2 = second.len();
        let values: Vec<Complex64> = (0..first.len() * n2)
            .into_par_iter()
            .map(|k| f(first.points()[k / n2], second.points()[k % n2]))
            .collect();
        Self::new(first, second, values)
    }

    pub fn first(&self) -> &AbelianGrid {
        &self.first
    }

    pub fn second(&self) -> &AbelianGrid {
        &self.second
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn at(&self, i: usize, j: usize) -> Complex64 {
        self.values[i * self.second.len() + j]
    }

    fn column(&self, j: usize) -> SampledFunction {
        let n2 = self.second.len();
        SampledFunction::new(
            self.first.clone(),
            (0..self.first.len())
                .map(|i| self.values[i * n2 + j])
                .collect(),
        )
        .expect("length matches")
    }

    fn row(&self, i: usize) -> SampledFunction {
        let n2 = self.second.len();
        SampledFunction::new(
            self.second.clone(),
            self.values[i * n2..(i + 1) * n2].to_vec(),
        )
        .expect("length matches")
    }

    /// `C_omega(u_j)` for every dual point `omega` of the first grid,
    /// row-major in `(omega, u)`.
    pub fn partial_transform(&self) -> Vec<SampledFunction> {
        let n1 = self.first.len();
        let n2 = self.second.len();
        let cols: Vec<Vec<Complex64>> = (0..n2)
            .into_par_iter()
            .map(|j| fourier(&self.column(j)).values().to_vec())
            .collect();
        (0..n1)
            .map(|w| {
                SampledFunction::new(self.second.clone(), cols.iter().map(|c| c[w]).collect())
                    .expect("length matches")
            })
            .collect()
    }

    /// Full transform computed in the other order: over `u` first, then `x`.
    /// Row-major in `(omega, xi)`.
    pub fn full_transform(&self) -> Vec<Complex64> {
        let n1 = self.first.len();
        let n2 = self.second.len();
        let rows: Vec<Vec<Complex64>> = (0..n1)
            .into_par_iter()
            .map(|i| fourier(&self.row(i)).values().to_vec())
            .collect();
        let cols: Vec<Vec<Complex64>> = (0..n2)
            .into_par_iter()
            .map(|k| {
                let f =
                    SampledFunction::new(self.first.clone(), rows.iter().map(|r| r[k]).collect())
                        .expect("length matches");
                fourier(&f).values().to_vec()
            })
            .collect();
        let mut out = vec![Complex64::new(0.0, 0.0); n1 * n2];
        for (k, col) in cols.iter().enumerate() {
            for (w, v) in col.iter().enumerate() {
                out[w * n2 + k] = *v;
            }
        }
        out
    }
}

/// Certifies a kernel on `A1 x A2` by testing every partial transform
/// `C_omega` for positive definiteness on `A2`, and cross-checks against the
/// full two-dimensional transform taken in the other order.
pub fn gneiting_certify(f: &ProductField, settings: &NumericSettings) -> Result<CertReport> {
    let tol = settings.transform_tol;
    let (g1, g2) = (&f.first, &f.second);
    let (n1, n2) = (g1.len(), g2.len());
    let sup = f.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let mut tolerances = Tolerances {
        tol,
        negative_threshold: tol,
        ..Tolerances::default()
    };
    if sup == 0.0 {
        return Ok(CertReport::new(Verdict::CertifiedPd, tolerances));
    }

    let mut herm = (0.0, 0.0);
    for i in 0..n1 {
        for j in 0..n2 {
            let dev = (f.at(g1.neg_index(i), g2.neg_index(j)) - f.at(i, j).conj()).norm();
            if dev > herm.0 {
                herm = (dev, g2.points()[j]);
            }
        }
    }
    if herm.0 > tol {
        let mut r = CertReport::new(Verdict::CertifiedNotPd, tolerances);
        r.witness = Witness::Hermitian { point: herm.1 };
        r.min_value = -herm.0;
        r.notes
            .push("f(-x, -u) != conj f(x, u): not positive definite".into());
        return Ok(r);
    }

    if g1.is_real_line() || g2.is_real_line() {
        let guard = settings.boundary_rel * sup;
        tolerances.boundary_guard = guard;
        let mut edge: f64 = 0.0;
        if g1.is_real_line() {
            for j in 0..n2 {
                edge = edge.max(f.at(0, j).norm()).max(f.at(n1 - 1, j).norm());
            }
        }
        if g2.is_real_line() {
            for i in 0..n1 {
                edge = edge.max(f.at(i, 0).norm()).max(f.at(i, n2 - 1).norm());
            }
        }
        if edge >= guard {
            let mut r = CertReport::new(Verdict::Inconclusive, tolerances);
            r.witness = Witness::Boundary { edge_value: edge };
            r.notes
                .push("kernel has not decayed at the edge of the window".into());
            return Ok(r);
        }
    }

    // Error of the first-factor transform, propagated through the second.
    let margin: f64 = (0..n2)
        .map(|j| discretization_error(&f.column(j)))
        .sum::<f64>()
        * g2.haar_weight();
    let partial = f.partial_transform();
    let reports: Vec<CertReport> = partial
        .par_iter()
        .map(|c| {
            bochner_test_with(
                c,
                &BochnerOptions {
                    tol,
                    boundary_rel: settings.boundary_rel,
                    extra_margin: margin,
                    check_boundary: false,
                },
            )
        })
        .collect();

    let full = f.full_transform();
    let scale = full.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let mut dev: f64 = 0.0;
    for (w, c) in partial.iter().enumerate() {
        for (k, v) in fourier(c).values().iter().enumerate() {
            dev = dev.max((v - full[w * n2 + k]).norm());
        }
    }
    if dev > 1e-9 * scale.max(1.0) {
        return Err(GkError::Inconsistent(format!(
            "partial and full transforms differ by {dev:e}"
        )));
    }

    tolerances.discretization_error = reports
        .iter()
        .map(|r| r.tolerances.discretization_error)
        .fold(0.0, f64::max)
        + margin;
    let witness_of = |w: usize, r: &CertReport| match r.witness {
        Witness::Frequency { dual, .. } => Witness::DualPair {
            first: g1.dual_points()[w],
            second: dual,
        },
        other => other,
    };
    let failing = reports
        .iter()
        .enumerate()
        .filter(|(_, r)| r.verdict == Verdict::CertifiedNotPd)
        .min_by(|a, b| a.1.min_value.total_cmp(&b.1.min_value));
    let (worst_w, worst) = reports
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.min_value.total_cmp(&b.1.min_value))
        .expect("nonempty grid");
    let mut report = if let Some((w, r)) = failing {
        let mut out = CertReport::new(Verdict::CertifiedNotPd, tolerances);
        out.tolerances.negative_threshold = r.tolerances.negative_threshold;
        out.min_value = r.min_value;
        out.witness = witness_of(w, r);
        out
    } else {
        let verdict = if reports.iter().all(CertReport::is_pd) {
            Verdict::CertifiedPd
        } else {
            Verdict::Inconclusive
        };
        let mut out = CertReport::new(verdict, tolerances);
        out.tolerances.negative_threshold = worst.tolerances.negative_threshold;
        out.min_value = worst.min_value;
        out.witness = witness_of(worst_w, worst);
        out
    };
    report.max_imag = reports.iter().map(|r| r.max_imag).fold(0.0, f64::max);
    report
        .notes
        .push(format!("partial vs full transform max deviation {dev:e}"));
    Ok(report)
}
