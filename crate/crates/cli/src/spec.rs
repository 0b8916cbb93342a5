//! The kernel-spec file: a TOML document naming the two factors, a kernel
//! family with its parameters, numeric overrides and a seed.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use gk_core::abelian::{AbelianGrid, GridKind};
use gk_core::chg::{FirstFactor, ProductField, SpectralFamily};
use gk_core::gneiting::CmMixture;
use gk_core::gram::GramKernel;
use gk_core::schoenberg::{BiSphereField, KernelField};
use gk_core::special_fn::{gegenbauer_all, SphereBasis};
use gk_core::{GkError, NumericSettings};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelSpecFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub first: FactorDef,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub second: Option<FactorDef>,
    pub kernel: KernelDef,
    #[serde(default)]
    pub numerics: NumericsDef,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FactorDef {
    Sphere { d: u32 },
    Cyclic { n: usize },
    Circle { n: usize },
    RealLine { step: f64, half_width: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermDef {
    pub power: usize,
    pub values: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub imag: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PolyBasis {
    Monomial,
    Gegenbauer,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum KernelDef {
    /// `f = value`.
    Constant {
        #[serde(default = "one")]
        value: f64,
    },
    /// `exp(-u^2 / (2 scale^2)) sum_n sphere[n] c_n(d, x)`, or a Gaussian in
    /// both variables when the first factor is abelian.
    SeparableGaussian {
        #[serde(default = "one")]
        scale: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        first_scale: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        sphere: Option<Vec<f64>>,
    },
    /// `sum_k w_k exp(-a_k arccos x)`, times an optional time Gaussian.
    GneitingCm {
        atoms: Vec<[f64; 2]>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        time_scale: Option<f64>,
    },
    /// `sum_k g_k(u) x^k` (or `c_k(d, x)`), `g_k` sampled on the second grid.
    PolynomialInX {
        #[serde(default = "monomial")]
        basis: PolyBasis,
        terms: Vec<TermDef>,
    },
    /// `sum_n b_n c_n(d, x)` with explicit `b_n` or `b_n = (n + 1)^{-decay}`.
    SchoenbergSeries {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        coefficients: Option<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        decay: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        terms: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        time_scale: Option<f64>,
    },
    /// `sum_{i,j} coefficients[i][j] x^i y^j` on a product of spheres.
    BiPolynomial { coefficients: Vec<Vec<f64>> },
    /// Raw samples, path relative to the spec file.
    Samples { file: String },
    /// Spectral family `h(phi, u) = weights[phi] exp(-u^2 / (2 s_phi^2))`,
    /// or explicit real samples per index.
    Spectral {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        weights: Option<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        time_scale: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        time_scales: Option<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        members: Option<Vec<Vec<f64>>>,
    },
}

fn one() -> f64 {
    1.0
}

fn monomial() -> PolyBasis {
    PolyBasis::Monomial
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NumericsDef {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truncation: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quad_order: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quad_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transform_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boundary_rel: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tail_rel: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probe_points: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probe_trials: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cross_check: Option<bool>,
}

impl NumericsDef {
    pub fn settings(&self) -> NumericSettings {
        let mut s = NumericSettings::default();
        s.truncation = self.truncation.unwrap_or(s.truncation);
        s.quad_tol = self.quad_tol.unwrap_or(s.quad_tol);
        s.transform_tol = self.transform_tol.unwrap_or(s.transform_tol);
        s.boundary_rel = self.boundary_rel.unwrap_or(s.boundary_rel);
        s.tail_rel = self.tail_rel.unwrap_or(s.tail_rel);
        s.probe_points = self.probe_points.unwrap_or(s.probe_points);
        s.probe_trials = self.probe_trials.unwrap_or(s.probe_trials);
        s.cross_check = self.cross_check.unwrap_or(s.cross_check);
        s
    }
}

/// A parsed spec together with the directory relative paths resolve against.
#[derive(Debug, Clone)]
pub struct LoadedSpec {
    pub file: KernelSpecFile,
    pub dir: PathBuf,
    pub settings: NumericSettings,
}

impl LoadedSpec {
    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Spec(format!("cannot read {}: {e}", path.display())))?;
        let file: KernelSpecFile = toml::from_str(&text)
            .map_err(|e| CliError::Spec(format!("{}: {e}", path.display())))?;
        let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        let settings = file.numerics.settings();
        let spec = Self {
            file,
            dir,
            settings,
        };
        spec.validate()?;
        Ok(spec)
    }

    fn validate(&self) -> Result<(), CliError> {
        let s = &self.settings;
        for (name, v) in [
            ("numerics.quad_tol", s.quad_tol),
            ("numerics.transform_tol", s.transform_tol),
            ("numerics.boundary_rel", s.boundary_rel),
            ("numerics.tail_rel", s.tail_rel),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(CliError::Spec(format!(
                    "{name} must be a positive number, got {v}"
                )));
            }
        }
        if let Some(m) = self.file.numerics.quad_order {
            if m < s.truncation + 1 {
                return Err(CliError::Spec(format!(
                    "numerics.quad_order = {m} is below truncation + 1 = {}",
                    s.truncation + 1
                )));
            }
        }
        if matches!(self.file.second, Some(FactorDef::Sphere { .. }))
            && !matches!(self.file.first, FactorDef::Sphere { .. })
        {
            return Err(CliError::Spec(
                "second: a sphere second factor needs a sphere first factor".into(),
            ));
        }
        Ok(())
    }

    pub fn seed(&self) -> u64 {
        self.file.seed.unwrap_or(0)
    }

    pub fn basis(&self, d: u32) -> Result<SphereBasis, CliError> {
        let n = self.settings.truncation;
        let m = self
            .file
            .numerics
            .quad_order
            .unwrap_or_else(|| NumericSettings::default_quad_order(n));
        Ok(SphereBasis::with_quadrature(d, n, m)?)
    }

    pub fn shape(&self) -> Result<Shape, CliError> {
        let second = match &self.file.second {
            None => None,
            Some(FactorDef::Sphere { d }) => {
                return Ok(Shape::SphereSphere(self.sphere_dim()?, *d))
            }
            Some(f) => Some(grid_of(f, "second")?),
        };
        let second = second.unwrap_or_else(AbelianGrid::trivial);
        Ok(match &self.file.first {
            FactorDef::Sphere { d } => Shape::SphereGroup(*d, second),
            f => Shape::GroupGroup(grid_of(f, "first")?, second),
        })
    }

    fn sphere_dim(&self) -> Result<u32, CliError> {
        match self.file.first {
            FactorDef::Sphere { d } => Ok(d),
            _ => Err(CliError::Spec("first: expected a sphere".into())),
        }
    }
}

fn grid_of(f: &FactorDef, field: &str) -> Result<AbelianGrid, CliError> {
    let g = match *f {
        FactorDef::Cyclic { n } => AbelianGrid::cyclic(n),
        FactorDef::Circle { n } => AbelianGrid::circle(n),
        FactorDef::RealLine { step, half_width } => AbelianGrid::real_line(step, half_width),
        FactorDef::Sphere { .. } => unreachable!("handled by caller"),
    };
    g.map_err(|e| CliError::Spec(format!("{field}: {e}")))
}

/// The factor combination of a spec.
#[derive(Debug, Clone)]
pub enum Shape {
    SphereGroup(u32, AbelianGrid),
    SphereSphere(u32, u32),
    GroupGroup(AbelianGrid, AbelianGrid),
}

/// A kernel ready for certification, with a closed form when available.
pub enum Problem {
    SphereGroup {
        field: KernelField,
        basis: SphereBasis,
    },
    SphereSphere {
        field: BiSphereField,
        b1: SphereBasis,
        b2: SphereBasis,
    },
    GroupGroup {
        field: ProductField,
        closure: Option<Arc<dyn Fn(f64, f64) -> Complex64 + Send + Sync>>,
    },
}

impl Problem {
    pub fn describe(&self) -> String {
        match self {
            Problem::SphereGroup { field, basis } => format!(
                "S^{} x {:?}, truncation {}, {} nodes",
                field.dimension(),
                field.grid().kind(),
                basis.max_degree(),
                basis.quad_order()
            ),
            Problem::SphereSphere { field, b1, .. } => {
                let (d1, d2) = field.dimensions();
                format!("S^{d1} x S^{d2}, truncation {}", b1.max_degree())
            }
            Problem::GroupGroup { field, .. } => {
                format!("{:?} x {:?}", field.first().kind(), field.second().kind())
            }
        }
    }

    /// Kernel for the Gram oracle; `None` for sampled kernels.
    pub fn gram_kernel(&self) -> Option<GramKernel> {
        match self {
            Problem::SphereGroup { field, .. } => {
                field.closure().map(|f| GramKernel::SphereAbelian {
                    d: field.dimension(),
                    grid: field.grid().clone(),
                    f,
                })
            }
            Problem::SphereSphere { field, .. } => {
                let (d1, d2) = field.dimensions();
                field
                    .closure()
                    .map(|f| GramKernel::SphereSphere { d1, d2, f })
            }
            Problem::GroupGroup { field, closure } => {
                let trivial_second = field.second().len() == 1;
                match (closure, trivial_second) {
                    (Some(f), true) => {
                        let f = f.clone();
                        Some(GramKernel::Abelian {
                            grid: field.first().clone(),
                            f: Arc::new(move |u| f(u, 0.0)),
                        })
                    }
                    _ => None,
                }
            }
        }
    }
}

/// Signed representative of a group element: `(-n/2, n/2]` on `Z_n`,
/// `(-pi, pi]` on the circle.
fn centered(grid: &AbelianGrid, u: f64) -> f64 {
    match grid.kind() {
        GridKind::Cyclic { n } => {
            let n = n as f64;
            let r = u.rem_euclid(n);
            if r > n / 2.0 {
                r - n
            } else {
                r
            }
        }
        GridKind::Circle { .. } => {
            let r = u.rem_euclid(2.0 * PI);
            if r > PI {
                r - 2.0 * PI
            } else {
                r
            }
        }
        GridKind::RealLine { .. } => u,
    }
}

fn time_gaussian(grid: &AbelianGrid, scale: f64) -> impl Fn(f64) -> f64 + Send + Sync + Clone {
    let grid = grid.clone();
    move |u| {
        let v = centered(&grid, u);
        (-v * v / (2.0 * scale * scale)).exp()
    }
}

fn positive(name: &str, v: f64) -> Result<f64, CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::Spec(format!("{name} must be positive, got {v}")))
    }
}

type ClosedFn = Arc<dyn Fn(f64, f64) -> Complex64 + Send + Sync>;

fn gegenbauer_sum(d: u32, coeffs: Vec<f64>) -> impl Fn(f64) -> f64 + Send + Sync + Clone {
    move |x| {
        let c = gegenbauer_all(d, coeffs.len().saturating_sub(1), x.clamp(-1.0, 1.0))
            .expect("dimension validated");
        coeffs.iter().zip(c).map(|(b, c)| b * c).sum()
    }
}

impl LoadedSpec {
    /// Closed-form `f(x, u)` on a sphere or group first factor times a
    /// group second factor.
    fn closed_sphere_group(
        &self,
        d: Option<u32>,
        grid: &AbelianGrid,
    ) -> Result<ClosedFn, CliError> {
        let k = &self.file.kernel;
        let need_sphere = |family: &str| {
            d.ok_or_else(|| {
                CliError::Spec(format!(
                    "kernel.family = {family} needs a sphere first factor"
                ))
            })
        };
        Ok(match k {
            KernelDef::Constant { value } => {
                let v = *value;
                Arc::new(move |_, _| Complex64::new(v, 0.0))
            }
            KernelDef::SeparableGaussian { scale, sphere, .. } => {
                let d = need_sphere("separable-gaussian")?;
                let t = time_gaussian(grid, positive("kernel.scale", *scale)?);
                let s = gegenbauer_sum(d, sphere.clone().unwrap_or_else(|| vec![1.0]));
                Arc::new(move |x, u| Complex64::new(s(x) * t(u), 0.0))
            }
            KernelDef::GneitingCm { atoms, time_scale } => {
                need_sphere("gneiting-cm")?;
                let mix = CmMixture::new(atoms.iter().map(|p| (p[0], p[1])).collect())
                    .map_err(|e| CliError::Spec(format!("kernel.atoms: {e}")))?;
                let t = time_gaussian(
                    grid,
                    positive("kernel.time_scale", time_scale.unwrap_or(1.0))?,
                );
                let timed = time_scale.is_some();
                Arc::new(move |x, u| {
                    let s = mix.eval(x.clamp(-1.0, 1.0).acos());
                    Complex64::new(if timed { s * t(u) } else { s }, 0.0)
                })
            }
            KernelDef::PolynomialInX { basis, terms } => {
                let d = need_sphere("polynomial-in-x")?;
                let n = grid.len();
                let mut table: Vec<(usize, Vec<Complex64>)> = Vec::new();
                for (i, t) in terms.iter().enumerate() {
                    if t.values.len() != n {
                        return Err(CliError::Spec(format!(
                            "kernel.terms[{i}].values has {} entries, the second grid has {n}",
                            t.values.len()
                        )));
                    }
                    let imag = t.imag.clone().unwrap_or_else(|| vec![0.0; n]);
                    if imag.len() != n {
                        return Err(CliError::Spec(format!(
                            "kernel.terms[{i}].imag has wrong length"
                        )));
                    }
                    table.push((
                        t.power,
                        t.values
                            .iter()
                            .zip(&imag)
                            .map(|(&r, &i)| Complex64::new(r, i))
                            .collect(),
                    ));
                }
                let basis = *basis;
                let grid = grid.clone();
                let top = table.iter().map(|t| t.0).max().unwrap_or(0);
                Arc::new(move |x, u| {
                    let Some(i) = grid.index_of(grid.sub(u, 0.0)) else {
                        return Complex64::new(f64::NAN, f64::NAN);
                    };
                    let x = x.clamp(-1.0, 1.0);
                    let c = match basis {
                        PolyBasis::Gegenbauer => gegenbauer_all(d, top, x).expect("validated"),
                        PolyBasis::Monomial => (0..=top).map(|k| x.powi(k as i32)).collect(),
                    };
                    table.iter().map(|(k, g)| g[i] * c[*k]).sum()
                })
            }
            KernelDef::SchoenbergSeries {
                coefficients,
                decay,
                terms,
                time_scale,
            } => {
                let d = need_sphere("schoenberg-series")?;
                let b = match (coefficients, decay) {
                    (Some(c), None) => c.clone(),
                    (None, Some(p)) => {
                        let terms = terms.unwrap_or(400);
                        (0..terms).map(|n| ((n + 1) as f64).powf(-p)).collect()
                    }
                    _ => {
                        return Err(CliError::Spec(
                            "kernel: give exactly one of coefficients or decay".into(),
                        ))
                    }
                };
                let s = gegenbauer_sum(d, b);
                let t = time_gaussian(
                    grid,
                    positive("kernel.time_scale", time_scale.unwrap_or(1.0))?,
                );
                let timed = time_scale.is_some();
                Arc::new(move |x, u| Complex64::new(if timed { s(x) * t(u) } else { s(x) }, 0.0))
            }
            other => {
                return Err(CliError::Spec(format!(
                    "kernel.family = {} does not fit this factor combination",
                    family_name(other)
                )))
            }
        })
    }

    /// The kernel as a certification problem.
    pub fn problem(&self) -> Result<Problem, CliError> {
        if let KernelDef::Spectral { .. } = self.file.kernel {
            return self.spectral_problem();
        }
        match self.shape()? {
            Shape::SphereGroup(d, grid) => {
                let basis = self.basis(d)?;
                let field = match &self.file.kernel {
                    KernelDef::Samples { file } => {
                        self.read_sphere_group_samples(d, &grid, file)?
                    }
                    _ => {
                        let f = self.closed_sphere_group(Some(d), &grid)?;
                        KernelField::closed(d, grid, move |x, u| f(x, u))?
                    }
                };
                Ok(Problem::SphereGroup { field, basis })
            }
            Shape::SphereSphere(d1, d2) => {
                let b1 = self.basis(d1)?;
                let b2 = self.basis(d2)?;
                let field = match &self.file.kernel {
                    KernelDef::BiPolynomial { coefficients } => {
                        let c = coefficients.clone();
                        BiSphereField::closed(d1, d2, move |x, y| {
                            c.iter()
                                .enumerate()
                                .map(|(i, row)| {
                                    row.iter()
                                        .enumerate()
                                        .map(|(j, v)| v * x.powi(i as i32) * y.powi(j as i32))
                                        .sum::<f64>()
                                })
                                .sum()
                        })?
                    }
                    KernelDef::Constant { value } => {
                        let v = *value;
                        BiSphereField::closed(d1, d2, move |_, _| v)?
                    }
                    KernelDef::Samples { file } => {
                        self.read_sphere_sphere_samples(d1, d2, &b1, &b2, file)?
                    }
                    other => {
                        return Err(CliError::Spec(format!(
                            "kernel.family = {} does not fit a product of spheres",
                            family_name(other)
                        )))
                    }
                };
                Ok(Problem::SphereSphere { field, b1, b2 })
            }
            Shape::GroupGroup(g1, g2) => {
                let closure: Option<ClosedFn> = match &self.file.kernel {
                    KernelDef::Samples { .. } => None,
                    KernelDef::Constant { value } => {
                        let v = *value;
                        Some(Arc::new(move |_, _| Complex64::new(v, 0.0)))
                    }
                    KernelDef::SeparableGaussian {
                        scale,
                        first_scale,
                        sphere,
                    } => {
                        if sphere.is_some() {
                            return Err(CliError::Spec(
                                "kernel.sphere needs a sphere first factor".into(),
                            ));
                        }
                        let t1 = time_gaussian(
                            &g1,
                            positive("kernel.first_scale", first_scale.unwrap_or(1.0))?,
                        );
                        let t2 = time_gaussian(&g2, positive("kernel.scale", *scale)?);
                        Some(Arc::new(move |h, u| Complex64::new(t1(h) * t2(u), 0.0)))
                    }
                    other => {
                        return Err(CliError::Spec(format!(
                            "kernel.family = {} does not fit two abelian factors",
                            family_name(other)
                        )))
                    }
                };
                let field = match (&self.file.kernel, &closure) {
                    (KernelDef::Samples { file }, _) => {
                        self.read_group_group_samples(&g1, &g2, file)?
                    }
                    (_, Some(f)) => {
                        let f = f.clone();
                        ProductField::from_fn(g1, g2, move |h, u| f(h, u))?
                    }
                    _ => unreachable!("closure exists for every non-sample family"),
                };
                Ok(Problem::GroupGroup { field, closure })
            }
        }
    }

    pub fn spectral_family(&self) -> Result<SpectralFamily, CliError> {
        let KernelDef::Spectral {
            weights,
            time_scale,
            time_scales,
            members,
        } = &self.file.kernel
        else {
            return Err(CliError::Spec("kernel.family must be spectral".into()));
        };
        let (first, second) = match self.shape()? {
            Shape::SphereGroup(d, g) => (FirstFactor::Sphere(d), g),
            Shape::GroupGroup(g1, g2) => (FirstFactor::Abelian(g1), g2),
            Shape::SphereSphere(..) => {
                return Err(CliError::Spec(
                    "spectral families need an abelian second factor".into(),
                ))
            }
        };
        let h: Vec<_> = match (members, weights) {
            (Some(rows), None) => rows
                .iter()
                .enumerate()
                .map(|(i, row)| {
                    if row.len() != second.len() {
                        return Err(CliError::Spec(format!(
                            "kernel.members[{i}] has {} entries, the second grid has {}",
                            row.len(),
                            second.len()
                        )));
                    }
                    Ok(gk_core::abelian::SampledFunction::new(
                        second.clone(),
                        row.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
                    )?)
                })
                .collect::<Result<_, CliError>>()?,
            (None, Some(w)) => {
                let scales: Vec<f64> = match (time_scales, time_scale) {
                    (Some(s), None) if s.len() == w.len() => s.clone(),
                    (Some(_), None) => {
                        return Err(CliError::Spec(
                            "kernel.time_scales must match kernel.weights".into(),
                        ))
                    }
                    (None, s) => vec![s.unwrap_or(1.0); w.len()],
                    (Some(_), Some(_)) => {
                        return Err(CliError::Spec(
                            "kernel: give time_scale or time_scales, not both".into(),
                        ))
                    }
                };
                w.iter()
                    .zip(&scales)
                    .map(|(&a, &s)| {
                        let t = time_gaussian(&second, positive("kernel.time_scale", s)?);
                        Ok(second.sample(|u| Complex64::new(a * t(u), 0.0)))
                    })
                    .collect::<Result<_, CliError>>()?
            }
            _ => {
                return Err(CliError::Spec(
                    "kernel: spectral needs exactly one of members or weights".into(),
                ))
            }
        };
        Ok(SpectralFamily::new(first, second, h, &self.settings)?)
    }

    fn spectral_problem(&self) -> Result<Problem, CliError> {
        let fam = self.spectral_family()?;
        Ok(match fam.first().clone() {
            FirstFactor::Sphere(d) => Problem::SphereGroup {
                field: fam.sphere_field()?,
                basis: self.basis(d)?,
            },
            FirstFactor::Abelian(_) => Problem::GroupGroup {
                field: fam.product_field()?,
                closure: None,
            },
        })
    }

    fn samples_path(&self, file: &str) -> PathBuf {
        self.dir.join(file)
    }

    fn read_rows(&self, file: &str, header: &[&str]) -> Result<Vec<Vec<f64>>, CliError> {
        let path = self.samples_path(file);
        let mut rdr = csv::Reader::from_path(&path)
            .map_err(|e| CliError::Spec(format!("kernel.file {}: {e}", path.display())))?;
        let got: Vec<String> = rdr
            .headers()
            .map_err(|e| CliError::Spec(format!("kernel.file: {e}")))?
            .iter()
            .map(str::to_owned)
            .collect();
        if got != header {
            return Err(CliError::Spec(format!(
                "kernel.file: header {got:?}, expected {header:?}"
            )));
        }
        rdr.records()
            .enumerate()
            .map(|(i, r)| {
                let r = r.map_err(|e| CliError::Spec(format!("kernel.file row {}: {e}", i + 2)))?;
                r.iter()
                    .map(|v| {
                        v.trim().parse::<f64>().map_err(|_| {
                            CliError::Spec(format!("kernel.file row {}: bad number {v:?}", i + 2))
                        })
                    })
                    .collect()
            })
            .collect()
    }

    fn read_sphere_group_samples(
        &self,
        d: u32,
        grid: &AbelianGrid,
        file: &str,
    ) -> Result<KernelField, CliError> {
        let rows = self.read_rows(file, &["x", "u", "re", "im"])?;
        let ng = grid.len();
        if rows.is_empty() || rows.len() % ng != 0 {
            return Err(CliError::Spec(format!(
                "kernel.file: {} rows is not a multiple of the grid size {ng}",
                rows.len()
            )));
        }
        let mut nodes = Vec::new();
        for (k, r) in rows.iter().enumerate() {
            if k % ng == 0 {
                nodes.push(r[0]);
            }
            let expect = grid.points()[k % ng];
            if r[0] != nodes[k / ng] || (r[1] - expect).abs() > 1e-12 * expect.abs().max(1.0) {
                return Err(CliError::Spec(format!(
                    "kernel.file row {}: expected node-major order over the grid",
                    k + 2
                )));
            }
        }
        let values = rows.iter().map(|r| Complex64::new(r[2], r[3])).collect();
        Ok(KernelField::sampled(d, grid.clone(), nodes, values)?)
    }

    fn read_sphere_sphere_samples(
        &self,
        d1: u32,
        d2: u32,
        b1: &SphereBasis,
        b2: &SphereBasis,
        file: &str,
    ) -> Result<BiSphereField, CliError> {
        let rows = self.read_rows(file, &["x", "y", "value"])?;
        let (m1, m2) = (b1.quad_order(), b2.quad_order());
        if rows.len() != m1 * m2 {
            return Err(CliError::Spec(format!(
                "kernel.file: expected {} rows on the {m1} x {m2} node grid",
                m1 * m2
            )));
        }
        let nodes1: Vec<f64> = (0..m1).map(|j| rows[j * m2][0]).collect();
        let nodes2: Vec<f64> = (0..m2).map(|k| rows[k][1]).collect();
        let values = rows.iter().map(|r| r[2]).collect();
        Ok(BiSphereField::sampled(d1, d2, nodes1, nodes2, values)?)
    }

    fn read_group_group_samples(
        &self,
        g1: &AbelianGrid,
        g2: &AbelianGrid,
        file: &str,
    ) -> Result<ProductField, CliError> {
        let rows = self.read_rows(file, &["h", "u", "re", "im"])?;
        let n2 = g2.len();
        if rows.len() != g1.len() * n2 {
            return Err(CliError::Spec(format!(
                "kernel.file: expected {} rows, found {}",
                g1.len() * n2,
                rows.len()
            )));
        }
        for (k, r) in rows.iter().enumerate() {
            let (h, u) = (g1.points()[k / n2], g2.points()[k % n2]);
            if (r[0] - h).abs() > 1e-12 * h.abs().max(1.0)
                || (r[1] - u).abs() > 1e-12 * u.abs().max(1.0)
            {
                return Err(CliError::Spec(format!(
                    "kernel.file row {}: point off the grid",
                    k + 2
                )));
            }
        }
        Ok(ProductField::new(
            g1.clone(),
            g2.clone(),
            rows.iter().map(|r| Complex64::new(r[2], r[3])).collect(),
        )?)
    }
}

pub fn family_name(k: &KernelDef) -> &'static str {
    match k {
        KernelDef::Constant { .. } => "constant",
        KernelDef::SeparableGaussian { .. } => "separable-gaussian",
        KernelDef::GneitingCm { .. } => "gneiting-cm",
        KernelDef::PolynomialInX { .. } => "polynomial-in-x",
        KernelDef::SchoenbergSeries { .. } => "schoenberg-series",
        KernelDef::BiPolynomial { .. } => "bi-polynomial",
        KernelDef::Samples { .. } => "samples",
        KernelDef::Spectral { .. } => "spectral",
    }
}

impl From<GkError> for CliError {
    fn from(e: GkError) -> Self {
        match e {
            GkError::Domain { .. } | GkError::InvalidInput(_) | GkError::RefusedFamily(_) => {
                CliError::Spec(e.to_string())
            }
            _ => CliError::Numeric(e.to_string()),
        }
    }
}
