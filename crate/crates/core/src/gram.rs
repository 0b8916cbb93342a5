//! Brute-force positive definiteness oracle: Gram matrices of a kernel on
//! finite point configurations and their smallest eigenvalue. A falsifier
//! only; a nonnegative spectrum on sampled configurations proves nothing.

use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::abelian::{AbelianGrid, GridKind};
use crate::error::{GkError, Result};
use crate::schoenberg::{BiKernelFn, KernelFn};

pub type GroupKernelFn = Arc<dyn Fn(f64) -> Complex64 + Send + Sync>;

/// A kernel together with the space its arguments live in.
#[derive(Clone)]
pub enum GramKernel {
    /// `f(u_k - u_l)` on an abelian group.
    Abelian { grid: AbelianGrid, f: GroupKernelFn },
    /// `f(<p_k, p_l>, u_k - u_l)` on `S^d x A`.
    SphereAbelian {
        d: u32,
        grid: AbelianGrid,
        f: KernelFn,
    },
    /// `f(<p_k, p_l>, <q_k, q_l>)` on `S^{d1} x S^{d2}`.
    SphereSphere { d1: u32, d2: u32, f: BiKernelFn },
}

impl std::fmt::Debug for GramKernel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            GramKernel::Abelian { grid, .. } => write!(f, "Abelian({:?})", grid.kind()),
            GramKernel::SphereAbelian { d, grid, .. } => {
                write!(f, "SphereAbelian(d={d}, {:?})", grid.kind())
            }
            GramKernel::SphereSphere { d1, d2, .. } => write!(f, "SphereSphere({d1}, {d2})"),
        }
    }
}

impl GramKernel {
    fn sphere_dims(&self) -> (Option<u32>, Option<u32>) {
        match self {
            GramKernel::Abelian { .. } => (None, None),
            GramKernel::SphereAbelian { d, .. } => (Some(*d), None),
            GramKernel::SphereSphere { d1, d2, .. } => (Some(*d1), Some(*d2)),
        }
    }

    fn grid(&self) -> Option<&AbelianGrid> {
        match self {
            GramKernel::Abelian { grid, .. } | GramKernel::SphereAbelian { grid, .. } => Some(grid),
            GramKernel::SphereSphere { .. } => None,
        }
    }
}

/// Points `(p_k, q_k, u_k)`; unused components are empty.
#[derive(Debug, Clone, PartialEq)]
pub struct PointConfig {
    pub sphere_points: Vec<Vec<f64>>,
    pub sphere2_points: Vec<Vec<f64>>,
    pub group_points: Vec<f64>,
    pub seed: u64,
}

impl PointConfig {
    pub fn len(&self) -> usize {
        self.sphere_points
            .len()
            .max(self.sphere2_points.len())
            .max(self.group_points.len())
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn validate(&self, kernel: &GramKernel) -> Result<()> {
        let n = self.len();
        let (d1, d2) = kernel.sphere_dims();
        let check = |pts: &[Vec<f64>], d: Option<u32>, what: &str| -> Result<()> {
            match d {
                None if pts.is_empty() => Ok(()),
                None => Err(GkError::InvalidInput(format!(
                    "{what} points given but unused"
                ))),
                Some(d) => {
                    if pts.len() != n {
                        return Err(GkError::InvalidInput(format!(
                            "{what} has {} points, expected {n}",
                            pts.len()
                        )));
                    }
                    for p in pts {
                        if p.len() != d as usize + 1 {
                            return Err(GkError::InvalidInput(format!(
                                "{what} point has wrong length"
                            )));
                        }
                        let norm = p.iter().map(|v| v * v).sum::<f64>().sqrt();
                        if (norm - 1.0).abs() > 1e-12 {
                            return Err(GkError::InvalidInput(format!(
                                "{what} point has norm {norm}"
                            )));
                        }
                    }
                    Ok(())
                }
            }
        };
        check(&self.sphere_points, d1, "sphere")?;
        check(&self.sphere2_points, d2, "second sphere")?;
        match kernel.grid() {
            Some(_) if self.group_points.len() != n => Err(GkError::InvalidInput(format!(
                "{} group points, expected {n}",
                self.group_points.len()
            ))),
            None if !self.group_points.is_empty() => Err(GkError::InvalidInput(
                "group points given but unused".into(),
            )),
            _ => Ok(()),
        }
    }

    /// CSV with header `k,u,p0..,q0..`; one row per point.
    pub fn to_csv(&self) -> String {
        let dp = self.sphere_points.first().map_or(0, Vec::len);
        let dq = self.sphere2_points.first().map_or(0, Vec::len);
        let mut out = String::from("k,u");
        (0..dp).for_each(|i| out.push_str(&format!(",p{i}")));
        (0..dq).for_each(|i| out.push_str(&format!(",q{i}")));
        out.push('\n');
        for k in 0..self.len() {
            out.push_str(&k.to_string());
            match self.group_points.get(k) {
                Some(u) => out.push_str(&format!(",{u:.16e}")),
                None => out.push(','),
            }
            for p in self.sphere_points.get(k).into_iter().flatten() {
                out.push_str(&format!(",{p:.16e}"));
            }
            for q in self.sphere2_points.get(k).into_iter().flatten() {
                out.push_str(&format!(",{q:.16e}"));
            }
            out.push('\n');
        }
        out
    }

    /// Inverse of [`PointConfig::to_csv`].
    pub fn from_csv(text: &str, seed: u64) -> Result<Self> {
        let mut lines = text.lines();
        let header: Vec<&str> = lines
            .next()
            .ok_or_else(|| GkError::InvalidInput("empty config CSV".into()))?
            .split(',')
            .collect();
        if header.len() < 2 || header[0] != "k" || header[1] != "u" {
            return Err(GkError::InvalidInput(
                "config CSV header must start with k,u".into(),
            ));
        }
        let dp = header.iter().filter(|h| h.starts_with('p')).count();
        let dq = header.iter().filter(|h| h.starts_with('q')).count();
        let mut cfg = PointConfig {
            sphere_points: Vec::new(),
            sphere2_points: Vec::new(),
            group_points: Vec::new(),
            seed,
        };
        for line in lines.filter(|l| !l.trim().is_empty()) {
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 2 + dp + dq {
                return Err(GkError::InvalidInput(format!(
                    "malformed config row {line:?}"
                )));
            }
            let num = |s: &str| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| GkError::InvalidInput(format!("bad number {s:?}")))
            };
            if !f[1].is_empty() {
                cfg.group_points.push(num(f[1])?);
            }
            if dp > 0 {
                cfg.sphere_points
                    .push(f[2..2 + dp].iter().map(|s| num(s)).collect::<Result<_>>()?);
            }
            if dq > 0 {
                cfg.sphere2_points
                    .push(f[2 + dp..].iter().map(|s| num(s)).collect::<Result<_>>()?);
            }
        }
        Ok(cfg)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| x * y)
        .sum::<f64>()
        .clamp(-1.0, 1.0)
}

/// `M[k][l] = f(...)` for the kernel's argument shape. Fails when the result
/// is not Hermitian within `1e-12` relative to its largest entry.
pub fn gram_matrix(kernel: &GramKernel, cfg: &PointConfig) -> Result<DMatrix<Complex64>> {
    cfg.validate(kernel)?;
    let n = cfg.len();
    let entry = |k: usize, l: usize| -> Complex64 {
        match kernel {
            GramKernel::Abelian { grid, f } => {
                f(grid.sub(cfg.group_points[k], cfg.group_points[l]))
            }
            GramKernel::SphereAbelian { grid, f, .. } => f(
                dot(&cfg.sphere_points[k], &cfg.sphere_points[l]),
                grid.sub(cfg.group_points[k], cfg.group_points[l]),
            ),
            GramKernel::SphereSphere { f, .. } => Complex64::new(
                f(
                    dot(&cfg.sphere_points[k], &cfg.sphere_points[l]),
                    dot(&cfg.sphere2_points[k], &cfg.sphere2_points[l]),
                ),
                0.0,
            ),
        }
    };
    let m = DMatrix::from_fn(n, n, entry);
    if m.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(GkError::NonFinite("Gram matrix entry".into()));
    }
    let scale = m.iter().map(|v| v.norm()).fold(0.0, f64::max).max(1.0);
    for k in 0..n {
        for l in 0..=k {
            if (m[(k, l)] - m[(l, k)].conj()).norm() > 1e-12 * scale {
                return Err(GkError::InvalidInput(format!(
                    "kernel is not Hermitian: M[{k}][{l}] != conj M[{l}][{k}]"
                )));
            }
        }
    }
    Ok(m)
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn min_eigenvalue(m: &DMatrix<Complex64>) -> Result<f64> {
    if m.nrows() != m.ncols() {
        return Err(GkError::InvalidInput("matrix is not square".into()));
    }
    if m.nrows() == 0 {
        return Err(GkError::InvalidInput("empty matrix".into()));
    }
    let max_iter = 1000 * m.nrows().max(10);
    let eig = SymmetricEigen::try_new(m.clone(), f64::EPSILON, max_iter)
        .ok_or(GkError::EigenNoConvergence(max_iter))?;
    Ok(eig
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min))
}

/// Knobs for [`randomized_pd_probe`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeOptions {
    pub n_points: usize,
    pub trials: usize,
    pub seed: u64,
    /// Add one configuration made of every point of a finite group times
    /// `structured_sphere_points` random sphere points.
    pub structured: bool,
    pub structured_sphere_points: usize,
}

impl Default for ProbeOptions {
    fn default() -> Self {
        Self {
            n_points: 10,
            trials: 200,
            seed: 0,
            structured: true,
            structured_sphere_points: 12,
        }
    }
}

/// Worst case found by [`randomized_pd_probe`].
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeResult {
    pub worst: f64,
    /// Trial index; `trials` denotes the structured configuration.
    pub trial: usize,
    pub config: PointConfig,
    /// Largest entry modulus of the worst Gram matrix.
    pub matrix_scale: f64,
    pub trials_run: usize,
}

impl ProbeResult {
    /// `worst < -tol * max(1, scale)`.
    pub fn falsifies(&self, tol: f64) -> bool {
        self.worst < -tol * self.matrix_scale.max(1.0)
    }
}

fn random_sphere_point(d: u32, rng: &mut ChaCha8Rng) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..=d).map(|_| rng.sample(StandardNormal)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-8 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    rng
}

/// Configuration used by trial `trial` of a probe with the given seed.
pub fn trial_config(kernel: &GramKernel, opts: &ProbeOptions, trial: usize) -> PointConfig {
    let mut rng = trial_rng(opts.seed, trial);
    let (d1, d2) = kernel.sphere_dims();
    let grid = kernel.grid();
    let structured = opts.structured && trial == opts.trials;
    let finite_group = grid.filter(|g| !matches!(g.kind(), GridKind::RealLine { .. }));
    if let (true, Some(g)) = (structured, finite_group) {
        let m = if d1.is_some() {
            opts.structured_sphere_points.max(1)
        } else {
            1
        };
        let sphere: Vec<Vec<f64>> = d1
            .map(|d| (0..m).map(|_| random_sphere_point(d, &mut rng)).collect())
            .unwrap_or_default();
        let mut cfg = PointConfig {
            sphere_points: Vec::new(),
            sphere2_points: Vec::new(),
            group_points: Vec::new(),
            seed: opts.seed,
        };
        for j in 0..m {
            for &u in g.points() {
                cfg.group_points.push(u);
                if let Some(p) = sphere.get(j) {
                    cfg.sphere_points.push(p.clone());
                }
            }
        }
        return cfg;
    }
    let n = if structured {
        opts.structured_sphere_points.max(opts.n_points)
    } else {
        opts.n_points
    };
    let sphere_points = d1
        .map(|d| (0..n).map(|_| random_sphere_point(d, &mut rng)).collect())
        .unwrap_or_default();
    let sphere2_points = d2
        .map(|d| (0..n).map(|_| random_sphere_point(d, &mut rng)).collect())
        .unwrap_or_default();
    let group_points = grid
        .map(|g| {
            (0..n)
                .map(|_| g.points()[rng.random_range(0..g.len())])
                .collect()
        })
        .unwrap_or_default();
    PointConfig {
        sphere_points,
        sphere2_points,
        group_points,
        seed: opts.seed,
    }
}

/// Smallest Gram eigenvalue over seeded random configurations. Each trial
/// draws from its own stream of the seed, so parallel and serial runs agree.
pub fn randomized_pd_probe(kernel: &GramKernel, opts: &ProbeOptions) -> Result<ProbeResult> {
    if opts.trials == 0 || opts.n_points == 0 {
        return Err(GkError::InvalidInput(
            "trials and n_points must be >= 1".into(),
        ));
    }
    let total = opts.trials + usize::from(opts.structured);
    let results: Vec<(usize, f64, f64)> = (0..total)
        .into_par_iter()
        .map(|trial| {
            let cfg = trial_config(kernel, opts, trial);
            let m = gram_matrix(kernel, &cfg)?;
            let scale = m.iter().map(|v| v.norm()).fold(0.0, f64::max);
            Ok((trial, min_eigenvalue(&m)?, scale))
        })
        .collect::<Result<_>>()?;
    let &(trial, worst, matrix_scale) = results
        .iter()
        .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
        .expect("at least one trial");
    Ok(ProbeResult {
        worst,
        trial,
        config: trial_config(kernel, opts, trial),
        matrix_scale,
        trials_run: total,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn ones_kernel() {
        let k = GramKernel::SphereAbelian {
            d: 2,
            grid: AbelianGrid::cyclic(3).unwrap(),
            f: Arc::new(|_, _| c(1.0)),
        };
        let cfg = trial_config(
            &k,
            &ProbeOptions {
                n_points: 3,
                ..Default::default()
            },
            0,
        );
        let m = gram_matrix(&k, &cfg).unwrap();
        assert!(m.iter().all(|v| (v - c(1.0)).norm() < 1e-15));
        let eig = SymmetricEigen::new(m.clone()).eigenvalues;
        let mut e: Vec<f64> = eig.iter().cloned().collect();
        e.sort_by(f64::total_cmp);
        assert!(e[0].abs() < 1e-12 && e[1].abs() < 1e-12 && (e[2] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn orthonormal_frame_gives_identity() {
        let k = GramKernel::SphereSphere {
            d1: 2,
            d2: 1,
            f: Arc::new(|x, _| x),
        };
        let cfg = PointConfig {
            sphere_points: vec![
                vec![1.0, 0.0, 0.0],
                vec![0.0, 1.0, 0.0],
                vec![0.0, 0.0, 1.0],
            ],
            sphere2_points: vec![vec![1.0, 0.0]; 3],
            group_points: vec![],
            seed: 0,
        };
        let m = gram_matrix(&k, &cfg).unwrap();
        assert_eq!(m, DMatrix::identity(3, 3));
        assert!((min_eigenvalue(&m).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn gaussian_spot_values() {
        let k = GramKernel::Abelian {
            grid: AbelianGrid::real_line(0.5, 4.0).unwrap(),
            f: Arc::new(|u| c((-u * u / 2.0).exp())),
        };
        let cfg = PointConfig {
            sphere_points: vec![],
            sphere2_points: vec![],
            group_points: vec![-1.0, 0.0, 0.5, 2.0],
            seed: 0,
        };
        let m = gram_matrix(&k, &cfg).unwrap();
        assert!((m[(0, 3)].re - (-4.5f64).exp()).abs() < 1e-16);
        assert!((m[(1, 2)].re - (-0.125f64).exp()).abs() < 1e-16);
        assert!(min_eigenvalue(&m).unwrap() > 0.0);
    }

    #[test]
    fn small_eigenvalues() {
        let ones = DMatrix::from_element(3, 3, c(1.0));
        assert!(min_eigenvalue(&ones).unwrap().abs() < 1e-14);
        let diag = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c(1.0), c(-0.5)]));
        assert!((min_eigenvalue(&diag).unwrap() + 0.5).abs() < 1e-15);
    }

    #[test]
    fn asymmetric_kernel_is_rejected() {
        let k = GramKernel::Abelian {
            grid: AbelianGrid::real_line(0.5, 4.0).unwrap(),
            f: Arc::new(c),
        };
        let cfg = PointConfig {
            sphere_points: vec![],
            sphere2_points: vec![],
            group_points: vec![0.0, 1.0],
            seed: 0,
        };
        assert!(matches!(
            gram_matrix(&k, &cfg),
            Err(GkError::InvalidInput(_))
        ));
    }

    #[test]
    fn probes() {
        let k = GramKernel::SphereAbelian {
            d: 2,
            grid: AbelianGrid::trivial(),
            f: Arc::new(|x, _| c(x - 0.1)),
        };
        let r = randomized_pd_probe(&k, &ProbeOptions::default()).unwrap();
        assert!(r.worst < -1e-3);
        let g = AbelianGrid::cyclic(8).unwrap();
        let g2 = g.clone();
        let ch = GramKernel::Abelian {
            grid: g,
            f: Arc::new(move |u| g2.character(3, u)),
        };
        let r = randomized_pd_probe(
            &ch,
            &ProbeOptions {
                trials: 100,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(r.worst >= -1e-12);
    }

    #[test]
    fn replay_is_deterministic() {
        let k = GramKernel::SphereAbelian {
            d: 3,
            grid: AbelianGrid::cyclic(8).unwrap(),
            f: Arc::new(|x, u| c(x * x - 0.2) * (1.0 + (std::f64::consts::PI * u / 4.0).cos())),
        };
        let opts = ProbeOptions {
            seed: 11,
            trials: 50,
            ..Default::default()
        };
        let a = randomized_pd_probe(&k, &opts).unwrap();
        let b = randomized_pd_probe(&k, &opts).unwrap();
        assert_eq!(a, b);
        let replay = gram_matrix(&k, &a.config).unwrap();
        assert_eq!(
            min_eigenvalue(&replay).unwrap().to_bits(),
            a.worst.to_bits()
        );
        let back = PointConfig::from_csv(&a.config.to_csv(), 11).unwrap();
        assert_eq!(back, a.config);
    }

    #[test]
    fn structured_config_covers_the_group() {
        // Single negative Fourier coefficient at frequency 5.
        let g = AbelianGrid::cyclic(8).unwrap();
        let g2 = g.clone();
        let f = GramKernel::Abelian {
            grid: g,
            f: Arc::new(move |u| {
                (0..8)
                    .map(|w| g2.character(w, u) * if w == 5 { -0.05 } else { 1.0 } / 8.0)
                    .sum()
            }),
        };
        let opts = ProbeOptions {
            trials: 1,
            ..Default::default()
        };
        let r = randomized_pd_probe(&f, &opts).unwrap();
        assert!(r.falsifies(1e-8));
        assert!((r.worst + 0.05).abs() < 1e-12);
    }
}
