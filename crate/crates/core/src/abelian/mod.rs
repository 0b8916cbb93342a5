//! Computable abelian groups: cyclic groups, a uniform window of the real
//! line and the circle, with their dual grids, Fourier transforms and the
//! nonnegativity test for integrable positive definite functions.

mod linnik;

pub use linnik::{linnik_check, linnik_density, linnik_transform};

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{GkError, Result};
use crate::report::{CertReport, Tolerances, Verdict, Witness};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GridKind {
    /// `Z_N` with counting measure; dual `Z_N` with `1/N` counting measure.
    Cyclic { n: usize },
    /// `n` points `-L + j step`, `L = n step / 2`, Lebesgue measure;
    /// dual frequencies `2 pi k / (n step)` with measure `dt / (2 pi)`.
    RealLine { step: f64, n: usize },
    /// `n` equispaced angles on `[0, 2 pi)`; dual harmonics `k` with
    /// measure `1 / (2 pi)` each.
    Circle { n: usize },
}

/// A sampled abelian group together with its dual grid.
#[derive(Debug, Clone, PartialEq)]
pub struct AbelianGrid {
    kind: GridKind,
    points: Vec<f64>,
    dual_points: Vec<f64>,
}

impl AbelianGrid {
    pub fn cyclic(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(GkError::InvalidInput(
                "cyclic group order must be >= 1".into(),
            ));
        }
        let points: Vec<f64> = (0..n).map(|u| u as f64).collect();
        Ok(Self {
            kind: GridKind::Cyclic { n },
            dual_points: points.clone(),
            points,
        })
    }

    /// The trivial group `{0}`, used when a kernel lives on a sphere alone.
    pub fn trivial() -> Self {
        Self::cyclic(1).expect("order 1 is valid")
    }

    /// Window `[-L, L)` sampled with spacing `step`, using `2 ceil(L / step)` points.
    pub fn real_line(step: f64, half_width: f64) -> Result<Self> {
        if !(step > 0.0 && step.is_finite()) || !(half_width > 0.0 && half_width.is_finite()) {
            return Err(GkError::InvalidInput(format!(
                "real line grid needs step > 0 and half_width > 0 (got {step}, {half_width})"
            )));
        }
        // Tolerate half widths that are integer multiples of the step up to rounding.
        let ratio = half_width / step;
        let half = if (ratio - ratio.round()).abs() < 1e-9 {
            ratio.round()
        } else {
            ratio.ceil()
        } as usize;
        let n = 2 * half.max(1);
        let points = (0..n).map(|j| (j as f64 - half as f64) * step).collect();
        let dual_step = 2.0 * PI / (n as f64 * step);
        let dual_points = (0..n)
            .map(|i| (i as f64 - half as f64) * dual_step)
            .collect();
        Ok(Self {
            kind: GridKind::RealLine { step, n },
            points,
            dual_points,
        })
    }

    pub fn circle(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(GkError::InvalidInput("circle grid needs n >= 1".into()));
        }
        let points = (0..n).map(|j| 2.0 * PI * j as f64 / n as f64).collect();
        let dual_points = (0..n).map(|i| i as f64 - (n / 2) as f64).collect();
        Ok(Self {
            kind: GridKind::Circle { n },
            points,
            dual_points,
        })
    }

    pub fn kind(&self) -> GridKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn dual_points(&self) -> &[f64] {
        &self.dual_points
    }

    pub fn is_real_line(&self) -> bool {
        matches!(self.kind, GridKind::RealLine { .. })
    }

    /// Haar weight carried by each group point.
    pub fn haar_weight(&self) -> f64 {
        match self.kind {
            GridKind::Cyclic { .. } => 1.0,
            GridKind::RealLine { step, .. } => step,
            GridKind::Circle { n } => 2.0 * PI / n as f64,
        }
    }

    /// Weight of each dual point under the dual Haar measure, chosen so that
    /// the inversion formula holds.
    pub fn dual_weight(&self) -> f64 {
        match self.kind {
            GridKind::Cyclic { n } => 1.0 / n as f64,
            GridKind::RealLine { step, n } => 1.0 / (n as f64 * step),
            GridKind::Circle { .. } => 1.0 / (2.0 * PI),
        }
    }

    /// Index of the neutral element.
    pub fn identity_index(&self) -> usize {
        match self.kind {
            GridKind::Cyclic { .. } | GridKind::Circle { .. } => 0,
            GridKind::RealLine { n, .. } => n / 2,
        }
    }

    /// Index of `-u_i`. Real-line windows are treated as periodic, so the
    /// left edge is its own negative.
    pub fn neg_index(&self, i: usize) -> usize {
        match self.kind {
            GridKind::Cyclic { n } | GridKind::Circle { n } | GridKind::RealLine { n, .. } => {
                (n - i % n) % n
            }
        }
    }

    /// Index of a group element that lies on the grid.
    pub fn index_of(&self, u: f64) -> Option<usize> {
        let n = self.len();
        let raw = match self.kind {
            GridKind::Cyclic { n } => u.rem_euclid(n as f64),
            GridKind::Circle { n } => u.rem_euclid(2.0 * PI) * n as f64 / (2.0 * PI),
            GridKind::RealLine { step, n } => u / step + (n / 2) as f64,
        };
        let r = raw.round();
        if (raw - r).abs() > 1e-9 || r < 0.0 {
            return None;
        }
        let i = r as usize;
        match self.kind {
            GridKind::RealLine { .. } => (i < n).then_some(i),
            _ => Some(i % n),
        }
    }

    /// Group difference `a - b`.
    pub fn sub(&self, a: f64, b: f64) -> f64 {
        match self.kind {
            GridKind::Cyclic { n } => (a - b).rem_euclid(n as f64),
            GridKind::Circle { .. } => (a - b).rem_euclid(2.0 * PI),
            GridKind::RealLine { .. } => a - b,
        }
    }

    /// Character `gamma(u)` for the dual point with the given index.
    pub fn character(&self, dual_index: usize, u: f64) -> Complex64 {
        let gamma = self.dual_points[dual_index];
        let phase = match self.kind {
            GridKind::Cyclic { n } => 2.0 * PI * gamma * u / n as f64,
            GridKind::RealLine { .. } | GridKind::Circle { .. } => gamma * u,
        };
        Complex64::from_polar(1.0, phase)
    }

    /// Sample a function on the group points.
    pub fn sample<F: FnMut(f64) -> Complex64>(&self, mut f: F) -> SampledFunction {
        SampledFunction {
            grid: self.clone(),
            values: self.points.iter().map(|&u| f(u)).collect(),
        }
    }

    /// Sample a function on the dual points.
    pub fn sample_dual<F: FnMut(f64) -> Complex64>(&self, mut f: F) -> Spectrum {
        Spectrum {
            grid: self.clone(),
            values: self.dual_points.iter().map(|&g| f(g)).collect(),
        }
    }

    /// Integer harmonic `k` of the dual point `i`, in FFT slot order.
    fn dual_harmonic(&self, i: usize) -> i64 {
        match self.kind {
            GridKind::Cyclic { .. } => i as i64,
            GridKind::RealLine { n, .. } | GridKind::Circle { n } => i as i64 - (n / 2) as i64,
        }
    }
}

/// A function on the points of an abelian grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledFunction {
    grid: AbelianGrid,
    values: Vec<Complex64>,
}

impl SampledFunction {
    pub fn new(grid: AbelianGrid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(GkError::InvalidInput(format!(
                "{} values for a grid of {} points",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn grid(&self) -> &AbelianGrid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    /// Value at the neutral element.
    pub fn at_identity(&self) -> Complex64 {
        self.values[self.grid.identity_index()]
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// `max_i |f(-u_i) - conj f(u_i)|`, with the index of the worst point.
    pub fn hermitian_deviation(&self) -> (f64, usize) {
        let mut worst = (0.0, 0);
        for (i, v) in self.values.iter().enumerate() {
            let dev = (self.values[self.grid.neg_index(i)] - v.conj()).norm();
            if dev > worst.0 {
                worst = (dev, i);
            }
        }
        worst
    }

    /// `sum_u |f(u)|^2` weighted by Haar measure.
    pub fn l2_norm_sq(&self) -> f64 {
        self.grid.haar_weight() * self.values.iter().map(|v| v.norm_sqr()).sum::<f64>()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| v * s).collect(),
        }
    }
}

/// A function on the dual points of an abelian grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    grid: AbelianGrid,
    values: Vec<Complex64>,
}

impl Spectrum {
    pub fn new(grid: AbelianGrid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(GkError::InvalidInput(format!(
                "{} spectral values for a grid of {} points",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn grid(&self) -> &AbelianGrid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// `sum_gamma |F(gamma)|^2` weighted by the dual Haar measure.
    pub fn l2_norm_sq(&self) -> f64 {
        self.grid.dual_weight() * self.values.iter().map(|v| v.norm_sqr()).sum::<f64>()
    }
}

/// Unnormalized in-place DFT (`sign = -1` forward, `+1` inverse).
pub(crate) fn dft_in_place(buf: &mut [Complex64], inverse: bool) {
    if buf.len() <= 1 {
        return;
    }
    let mut planner = FftPlanner::<f64>::new();
    let fft = if inverse {
        planner.plan_fft_inverse(buf.len())
    } else {
        planner.plan_fft_forward(buf.len())
    };
    fft.process(buf);
}

/// Fourier transform `Ff(gamma) = int conj(gamma(u)) f(u) d omega(u)` realized
/// as a Haar-weighted sum. Exact on cyclic groups.
pub fn fourier(f: &SampledFunction) -> Spectrum {
    let grid = &f.grid;
    let n = grid.len();
    let mut buf = f.values.clone();
    dft_in_place(&mut buf, false);
    let values = match grid.kind {
        GridKind::Cyclic { .. } => buf,
        GridKind::Circle { .. } | GridKind::RealLine { .. } => {
            let w = grid.haar_weight();
            // Real-line points start at -n step / 2, which contributes (-1)^k.
            let shifted = grid.is_real_line();
            (0..n)
                .map(|i| {
                    let k = grid.dual_harmonic(i);
                    let slot = k.rem_euclid(n as i64) as usize;
                    let sign = if shifted && k % 2 != 0 { -1.0 } else { 1.0 };
                    buf[slot] * (w * sign)
                })
                .collect()
        }
    };
    Spectrum {
        grid: grid.clone(),
        values,
    }
}

/// Inverse transform `f(u) = int gamma(u) F(gamma) d omega^(gamma)`.
pub fn inverse_fourier(spec: &Spectrum) -> SampledFunction {
    let grid = &spec.grid;
    let n = grid.len();
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    match grid.kind {
        GridKind::Cyclic { .. } => buf.copy_from_slice(&spec.values),
        GridKind::Circle { .. } | GridKind::RealLine { .. } => {
            let shifted = grid.is_real_line();
            for (i, v) in spec.values.iter().enumerate() {
                let k = grid.dual_harmonic(i);
                let slot = k.rem_euclid(n as i64) as usize;
                let sign = if shifted && k % 2 != 0 { -1.0 } else { 1.0 };
                buf[slot] = v * sign;
            }
        }
    }
    dft_in_place(&mut buf, true);
    let w = grid.dual_weight();
    SampledFunction {
        grid: grid.clone(),
        values: buf.into_iter().map(|v| v * w).collect(),
    }
}

/// Knobs for [`bochner_test_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BochnerOptions {
    pub tol: f64,
    /// Edge guard for real-line windows, relative to `max |f|`.
    pub boundary_rel: f64,
    /// Added to the negative-verdict threshold.
    pub extra_margin: f64,
    /// Apply the real-line edge guard. Callers that already guarded the
    /// function this one was derived from switch it off.
    pub check_boundary: bool,
}

impl BochnerOptions {
    pub fn new(tol: f64) -> Self {
        Self {
            tol,
            boundary_rel: 1e-6,
            extra_margin: 0.0,
            check_boundary: true,
        }
    }
}

/// Estimated error of the Riemann-sum transform on a real-line or circle grid:
/// mass outside the window (geometric extrapolation from the edges) plus a
/// `step^2`-scaled second-difference bound.
pub fn discretization_error(f: &SampledFunction) -> f64 {
    let grid = &f.grid;
    let v = &f.values;
    let n = v.len();
    match grid.kind {
        GridKind::Cyclic { .. } => 0.0,
        GridKind::Circle { .. } | GridKind::RealLine { .. } => {
            if n < 3 {
                return f.max_abs() * grid.haar_weight() * n as f64;
            }
            let h = grid.haar_weight();
            let periodic = matches!(grid.kind, GridKind::Circle { .. });
            let mut second = 0.0;
            for i in 0..n {
                if !periodic && (i == 0 || i == n - 1) {
                    continue;
                }
                let l = v[(i + n - 1) % n];
                let r = v[(i + 1) % n];
                second += (l - v[i] * 2.0 + r).norm();
            }
            let smooth = h / 12.0 * second;
            if periodic {
                return smooth;
            }
            let half_width = n as f64 * h / 2.0;
            let edge_tail = |edge: f64, inner: f64| {
                if edge == 0.0 {
                    0.0
                } else if inner > edge {
                    let r = edge / inner;
                    h * edge * r / (1.0 - r)
                } else {
                    edge * half_width
                }
            };
            let tail =
                edge_tail(v[0].norm(), v[1].norm()) + edge_tail(v[n - 1].norm(), v[n - 2].norm());
            smooth + tail
        }
    }
}

/// Nonnegativity test of the Fourier transform with the default boundary guard.
pub fn bochner_test(f: &SampledFunction, tol: f64) -> CertReport {
    bochner_test_with(f, &BochnerOptions::new(tol))
}

/// Certifies `f` positive definite when `Re Ff >= -tol` and `|Im Ff| <= tol`
/// on the whole dual grid; certifies it not positive definite when Hermitian
/// symmetry fails or some `Re Ff` is below `-max(tol, discretization error)`.
pub fn bochner_test_with(f: &SampledFunction, opts: &BochnerOptions) -> CertReport {
    let max_abs = f.max_abs();
    let disc = discretization_error(f);
    let guard = opts.boundary_rel * max_abs;
    let tolerances = Tolerances {
        tol: opts.tol,
        negative_threshold: opts.tol.max(disc) + opts.extra_margin,
        discretization_error: disc,
        boundary_guard: if opts.check_boundary && f.grid.is_real_line() {
            guard
        } else {
            0.0
        },
        tail_tol: 0.0,
    };
    if max_abs == 0.0 {
        return CertReport::new(Verdict::CertifiedPd, tolerances);
    }

    let (herm_dev, herm_at) = f.hermitian_deviation();
    if herm_dev > opts.tol {
        let mut r = CertReport::new(Verdict::CertifiedNotPd, tolerances);
        r.witness = Witness::Hermitian {
            point: f.grid.points[herm_at],
        };
        r.min_value = -herm_dev;
        r.notes
            .push("f(-u) != conj f(u): not positive definite".into());
        return r;
    }

    if opts.check_boundary && f.grid.is_real_line() {
        let n = f.values.len();
        let edge = f.values[0].norm().max(f.values[n - 1].norm());
        if edge >= guard {
            let mut r = CertReport::new(Verdict::Inconclusive, tolerances);
            r.witness = Witness::Boundary { edge_value: edge };
            r.notes
                .push("function has not decayed at the window edge".into());
            return r;
        }
    }

    let spectrum = fourier(f);
    let (mut min_re, mut argmin) = (f64::INFINITY, 0);
    let mut max_im: f64 = 0.0;
    for (i, v) in spectrum.values.iter().enumerate() {
        if v.re < min_re {
            min_re = v.re;
            argmin = i;
        }
        max_im = max_im.max(v.im.abs());
    }
    let verdict = if min_re >= -opts.tol && max_im <= opts.tol {
        Verdict::CertifiedPd
    } else if min_re < -tolerances.negative_threshold {
        Verdict::CertifiedNotPd
    } else {
        Verdict::Inconclusive
    };
    let mut r = CertReport::new(verdict, tolerances);
    r.min_value = min_re;
    r.max_imag = max_im;
    r.witness = Witness::Frequency {
        index: argmin,
        dual: f.grid.dual_points[argmin],
    };
    r
}
