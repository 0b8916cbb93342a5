//! Non-integrable transforms: growth of `int_0^{n pi} |sin u| / u du`, the
//! periodization `f = sum_n a_n h(. - n)` with `|Ff| >= |Fh| / 4`, and window
//! masses of `C(h; u) = e^{-u^2/2} Ff(-h)`.
//!
//! The bases used here are ordinary compactly supported functions; the
//! tables show the mechanism, not a function whose transform fails to be
//! integrable.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::abelian::{fourier, AbelianGrid, SampledFunction};
use crate::error::{GkError, Result};
use crate::quad::integrate;

/// Printed with every demo table.
pub const DEMO_NOTE: &str = "illustration only: the bases are integrable-transform \
functions; the tables show the norm growth and the 1/4 lower bound, not an explicit \
function with non-integrable transform";

/// `int_{(k-1) pi}^{k pi} |sin u| / u du` for `k = 1..=n`.
pub fn ln_terms(n: usize) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(GkError::Domain {
            name: "n",
            value: 0.0,
            domain: "n >= 1",
        });
    }
    (1..=n)
        .into_par_iter()
        .map(|k| {
            let a = (k - 1) as f64 * PI;
            let f = |u: f64| if u == 0.0 { 1.0 } else { u.sin().abs() / u };
            integrate(f, a, a + PI, 1e-15, 1e-12).map(|r| r.value)
        })
        .collect()
}

/// `||L_n|| = 4 int_0^{n pi} |sin u| / u du`, one panel per half period.
pub fn ln_norm(n: usize) -> Result<f64> {
    Ok(4.0 * ln_terms(n)?.iter().sum::<f64>())
}

/// Compactly supported nonnegative base functions with maximum 1, supported
/// in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub enum Base {
    /// `(1 - |2x - 1|)_+`.
    Triangle,
    /// `exp(-(x - 1/2)^2 / (2 sigma^2))` cut off outside `[0, 1]`.
    Gaussian { sigma: f64 },
    /// `sum_{k=1}^{levels} k^{-2} tent_k(x - 1/2) / Z` with tents of
    /// half-width `2^{-k}`; `|Fh(t)|` decays like `1 / (|t| log^2 |t|)`
    /// until the finest level is resolved.
    NestedTents { levels: u32 },
    /// Samples `h(j step)`, `j = 0..`, linearly interpolated.
    Sampled { step: f64, values: Vec<f64> },
}

impl Base {
    pub fn validate(&self) -> Result<()> {
        match self {
            Base::Triangle => Ok(()),
            Base::Gaussian { sigma } if *sigma > 0.0 && *sigma <= 0.1 => Ok(()),
            Base::Gaussian { sigma } => Err(GkError::Domain {
                name: "sigma",
                value: *sigma,
                domain: "(0, 0.1] so the cutoff at [0, 1] is below 1e-21",
            }),
            Base::NestedTents { levels } if (1..=20).contains(levels) => Ok(()),
            Base::NestedTents { levels } => Err(GkError::Domain {
                name: "levels",
                value: *levels as f64,
                domain: "1..=20",
            }),
            Base::Sampled { step, values } => {
                if step.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) || values.len() < 2 {
                    return Err(GkError::InvalidInput(
                        "sampled base needs step > 0 and 2+ values".into(),
                    ));
                }
                if (values.len() - 1) as f64 * step > 1.0 + 1e-12 {
                    return Err(GkError::InvalidInput(
                        "aliasing: sampled base is wider than the unit spacing".into(),
                    ));
                }
                if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
                    return Err(GkError::InvalidInput(
                        "sampled base must be finite and >= 0".into(),
                    ));
                }
                let max = values.iter().cloned().fold(0.0, f64::max);
                if (max - 1.0).abs() > 1e-12 {
                    return Err(GkError::InvalidInput(format!(
                        "sampled base has max {max}, expected 1"
                    )));
                }
                Ok(())
            }
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Base::Triangle => (1.0 - (2.0 * x - 1.0).abs()).max(0.0),
            Base::Gaussian { sigma } => {
                if (0.0..=1.0).contains(&x) {
                    (-(x - 0.5).powi(2) / (2.0 * sigma * sigma)).exp()
                } else {
                    0.0
                }
            }
            Base::NestedTents { levels } => {
                let z: f64 = (1..=*levels).map(|k| 1.0 / (k * k) as f64).sum();
                (1..=*levels)
                    .map(|k| {
                        let eps = 0.5f64.powi(k as i32);
                        (1.0 - (x - 0.5).abs() / eps).max(0.0) / (k * k) as f64
                    })
                    .sum::<f64>()
                    / z
            }
            Base::Sampled { step, values } => {
                let s = x / step;
                if s < 0.0 || s > (values.len() - 1) as f64 {
                    return 0.0;
                }
                let j = (s.floor() as usize).min(values.len() - 2);
                let r = s - j as f64;
                values[j] * (1.0 - r) + values[j + 1] * r
            }
        }
    }
}

/// Weights `a_0 = 1/2` and `a_n`, `1 <= |n| <= n_range`, summing to `1/4`.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodizationSpec {
    pub base: Base,
    pub n_range: usize,
    /// `a_{-n_range}, ..., a_{n_range}`.
    weights: Vec<f64>,
    /// Mass of the untruncated default sequence beyond `n_range`, before
    /// renormalization.
    truncation_mass: f64,
}

impl PeriodizationSpec {
    /// `a_n = (1/4) 2^{-|n|} / sum_{1 <= |m| <= n_range} 2^{-|m|}`.
    pub fn new(base: Base, n_range: usize) -> Result<Self> {
        base.validate()?;
        let side = |n: usize| 0.5f64.powi(n as i32);
        let norm: f64 = 2.0 * (1..=n_range).map(side).sum::<f64>();
        let mut weights = vec![0.0; 2 * n_range + 1];
        weights[n_range] = 0.5;
        for n in 1..=n_range {
            let a = 0.25 * side(n) / norm;
            weights[n_range + n] = a;
            weights[n_range - n] = a;
        }
        Ok(Self {
            base,
            n_range,
            weights,
            // The untruncated sequence 2^{-|n|} / 8 sums to 1/4 over n != 0.
            truncation_mass: 0.25 * side(n_range),
        })
    }

    /// Only `a_0 = 1/2`.
    pub fn center_only(base: Base) -> Result<Self> {
        base.validate()?;
        Ok(Self {
            base,
            n_range: 0,
            weights: vec![0.5],
            truncation_mass: 0.0,
        })
    }

    pub fn default_triangle() -> Self {
        Self::new(Base::Triangle, 20).expect("default spec is valid")
    }

    /// `a_n` for `|n| <= n_range`, zero outside.
    pub fn weight(&self, n: i64) -> f64 {
        let i = n + self.n_range as i64;
        if i < 0 || i as usize >= self.weights.len() {
            0.0
        } else {
            self.weights[i as usize]
        }
    }

    pub fn side_sum(&self) -> f64 {
        self.weights.iter().sum::<f64>() - 0.5
    }

    pub fn truncation_mass(&self) -> f64 {
        self.truncation_mass
    }

    /// `sum_n a_n e^{-i t n}`.
    pub fn symbol(&self, t: f64) -> Complex64 {
        let r = self.n_range as i64;
        (-r..=r)
            .map(|n| Complex64::from_polar(self.weight(n), -t * n as f64))
            .sum()
    }
}

/// The default window for periodized functions: step `1/64`, `[-32, 32)`.
pub fn default_grid() -> AbelianGrid {
    AbelianGrid::real_line(1.0 / 64.0, 32.0).expect("valid grid")
}

fn check_window(spec: &PeriodizationSpec, grid: &AbelianGrid) -> Result<()> {
    if !grid.is_real_line() {
        return Err(GkError::InvalidInput(
            "periodization needs a real-line grid".into(),
        ));
    }
    let pts = grid.points();
    let (lo, hi) = (pts[0], pts[pts.len() - 1]);
    let r = spec.n_range as f64;
    if -r < lo || 1.0 + r > hi {
        return Err(GkError::InvalidInput(format!(
            "aliasing: shifted copies cover [{}, {}] but the window is [{lo}, {hi}]",
            -r,
            1.0 + r
        )));
    }
    Ok(())
}

/// Samples of the base `h` on a grid.
pub fn sample_base(spec: &PeriodizationSpec, grid: &AbelianGrid) -> SampledFunction {
    grid.sample(|x| Complex64::new(spec.base.eval(x), 0.0))
}

/// `f(x) = sum_{|n| <= n_range} a_n h(x - n)` on the grid.
pub fn periodize(spec: &PeriodizationSpec, grid: &AbelianGrid) -> Result<SampledFunction> {
    check_window(spec, grid)?;
    let r = spec.n_range as i64;
    Ok(grid.sample(|x| {
        let v: f64 = (-r..=r)
            .map(|n| spec.weight(n) * spec.base.eval(x - n as f64))
            .sum();
        Complex64::new(v, 0.0)
    }))
}

/// `Ff` and `Fh` on the dual grid together with the frequencies that are
/// resolved: `|t|` at most half the Nyquist frequency and `|Fh(t)| > 1e-10`.
#[derive(Debug, Clone)]
pub struct Transforms {
    pub t: Vec<f64>,
    pub ff: Vec<Complex64>,
    pub fh: Vec<Complex64>,
    pub resolved: Vec<bool>,
}

pub fn transforms(spec: &PeriodizationSpec, grid: &AbelianGrid) -> Result<Transforms> {
    let f = periodize(spec, grid)?;
    let h = sample_base(spec, grid);
    let ff = fourier(&f).values().to_vec();
    let fh = fourier(&h).values().to_vec();
    let nyquist = PI / grid.haar_weight();
    let t = grid.dual_points().to_vec();
    let resolved = t
        .iter()
        .zip(&fh)
        .map(|(t, v)| t.abs() <= nyquist / 2.0 && v.norm() > 1e-10)
        .collect();
    Ok(Transforms {
        t,
        ff,
        fh,
        resolved,
    })
}

/// Outcome of [`fourier_lower_bound_check`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioCheck {
    pub min_ratio: f64,
    pub argmin: f64,
    pub ratio_at_zero: f64,
    pub resolved: usize,
}

/// `min |Ff(t)| / |Fh(t)|` over resolved frequencies with `|t| <= t_max`.
pub fn fourier_lower_bound_check(
    spec: &PeriodizationSpec,
    grid: &AbelianGrid,
    t_max: f64,
) -> Result<RatioCheck> {
    let tr = transforms(spec, grid)?;
    let mut out = RatioCheck {
        min_ratio: f64::INFINITY,
        argmin: 0.0,
        ratio_at_zero: f64::NAN,
        resolved: 0,
    };
    for i in 0..tr.t.len() {
        if !tr.resolved[i] || tr.t[i].abs() > t_max {
            continue;
        }
        let ratio = tr.ff[i].norm() / tr.fh[i].norm();
        out.resolved += 1;
        if tr.t[i] == 0.0 {
            out.ratio_at_zero = ratio;
        }
        if ratio < out.min_ratio {
            out.min_ratio = ratio;
            out.argmin = tr.t[i];
        }
    }
    if out.resolved == 0 {
        return Err(GkError::InvalidInput(
            "no resolved frequency in range".into(),
        ));
    }
    Ok(out)
}

/// One row of [`conclusion_demo`]: masses over `[-w, w]^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowMass {
    pub window: f64,
    /// `int int |e^{-u^2/2} Ff(-h)| dh du`.
    pub mass: f64,
    /// The same for the lower bound `e^{-u^2/2} |Fh(-h)| / 4`.
    pub lower: f64,
}

/// Masses of `|C(h; u)| = e^{-u^2/2} |Ff(-h)|` over growing square windows.
/// Windows beyond the resolved band are refused.
pub fn conclusion_demo(
    spec: &PeriodizationSpec,
    grid: &AbelianGrid,
    windows: &[f64],
) -> Result<Vec<WindowMass>> {
    let tr = transforms(spec, grid)?;
    let band = PI / grid.haar_weight() / 2.0;
    let dt = 2.0 * PI * grid.dual_weight();
    windows
        .par_iter()
        .map(|&w| {
            if !(w > 0.0 && w <= band) {
                return Err(GkError::Domain {
                    name: "window",
                    value: w,
                    domain: "(0, half the Nyquist frequency]",
                });
            }
            let time = integrate(|u: f64| (-u * u / 2.0).exp(), -w, w, 1e-15, 1e-13)?.value;
            let (mut m, mut l) = (0.0, 0.0);
            for i in 0..tr.t.len() {
                if tr.t[i].abs() <= w {
                    m += tr.ff[i].norm();
                    l += tr.fh[i].norm() / 4.0;
                }
            }
            Ok(WindowMass {
                window: w,
                mass: m * dt * time,
                lower: l * dt * time,
            })
        })
        .collect()
}
