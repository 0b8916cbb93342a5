use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::abelian::AbelianGrid;
use crate::error::{GkError, Result};
use crate::special_fn::SphereBasis;

/// Closed-form kernel `f(x, u)` with `x = cos(angle)` in [-1, 1].
pub type KernelFn = Arc<dyn Fn(f64, f64) -> Complex64 + Send + Sync>;

/// Closed-form real kernel `f(x, y)` on a product of two spheres.
pub type BiKernelFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

const NODE_MATCH_TOL: f64 = 1e-12;

#[derive(Clone)]
enum FieldRepr {
    Closed(KernelFn),
    /// Row-major samples: `values[j * grid.len() + i] = f(nodes[j], u_i)`.
    Sampled {
        nodes: Vec<f64>,
        values: Vec<Complex64>,
    },
}

/// A kernel on `S^d x A`, given in closed form or sampled on
/// (quadrature nodes) x (grid points). A pure sphere kernel uses the
/// trivial group.
#[derive(Clone)]
pub struct KernelField {
    d: u32,
    grid: AbelianGrid,
    repr: FieldRepr,
}

impl fmt::Debug for KernelField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let repr = match &self.repr {
            FieldRepr::Closed(_) => "closed".to_string(),
            FieldRepr::Sampled { nodes, .. } => format!("sampled({} nodes)", nodes.len()),
        };
        f.debug_struct("KernelField")
            .field("d", &self.d)
            .field("grid", &self.grid.kind())
            .field("repr", &repr)
            .finish()
    }
}

fn check_dim(d: u32) -> Result<()> {
    if d == 0 {
        return Err(GkError::InvalidInput(
            "sphere dimension must be >= 1".into(),
        ));
    }
    Ok(())
}

fn nodes_match(expected: &[f64], got: &[f64]) -> bool {
    expected.len() == got.len()
        && expected
            .iter()
            .zip(got)
            .all(|(a, b)| (a - b).abs() <= NODE_MATCH_TOL)
}

impl KernelField {
    pub fn closed<F>(d: u32, grid: AbelianGrid, f: F) -> Result<Self>
    where
        F: Fn(f64, f64) -> Complex64 + Send + Sync + 'static,
    {
        check_dim(d)?;
        Ok(Self {
            d,
            grid,
            repr: FieldRepr::Closed(Arc::new(f)),
        })
    }

    /// A real kernel on `S^d` alone.
    pub fn sphere<F>(d: u32, f: F) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self::closed(d, AbelianGrid::trivial(), move |x, _| {
            Complex64::new(f(x), 0.0)
        })
    }

    pub fn sampled(
        d: u32,
        grid: AbelianGrid,
        nodes: Vec<f64>,
        values: Vec<Complex64>,
    ) -> Result<Self> {
        check_dim(d)?;
        if values.len() != nodes.len() * grid.len() {
            return Err(GkError::InvalidInput(format!(
                "sample tensor has {} values, expected {} nodes x {} points",
                values.len(),
                nodes.len(),
                grid.len()
            )));
        }
        if values
            .iter()
            .any(|v| !v.re.is_finite() || !v.im.is_finite())
        {
            return Err(GkError::NonFinite("kernel samples".into()));
        }
        Ok(Self {
            d,
            grid,
            repr: FieldRepr::Sampled { nodes, values },
        })
    }

    pub fn dimension(&self) -> u32 {
        self.d
    }

    pub fn grid(&self) -> &AbelianGrid {
        &self.grid
    }

    pub fn is_closed_form(&self) -> bool {
        matches!(self.repr, FieldRepr::Closed(_))
    }

    /// Closed-form evaluation; `None` for sampled fields.
    pub fn eval(&self, x: f64, u: f64) -> Option<Complex64> {
        match &self.repr {
            FieldRepr::Closed(f) => Some(f(x, u)),
            FieldRepr::Sampled { .. } => None,
        }
    }

    pub fn closure(&self) -> Option<KernelFn> {
        match &self.repr {
            FieldRepr::Closed(f) => Some(f.clone()),
            FieldRepr::Sampled { .. } => None,
        }
    }

    /// Samples on `basis.nodes() x grid.points()` (row-major). Sampled
    /// fields must already live on the basis nodes.
    pub fn samples_on(&self, basis: &SphereBasis) -> Result<Vec<Complex64>> {
        if basis.dimension() != self.d {
            return Err(GkError::InvalidInput(format!(
                "basis is for S^{} but the kernel lives on S^{}",
                basis.dimension(),
                self.d
            )));
        }
        let values = match &self.repr {
            FieldRepr::Closed(f) => {
                let mut out = Vec::with_capacity(basis.quad_order() * self.grid.len());
                for &x in basis.nodes() {
                    for &u in self.grid.points() {
                        out.push(f(x, u));
                    }
                }
                out
            }
            FieldRepr::Sampled { nodes, values } => {
                if !nodes_match(basis.nodes(), nodes) {
                    return Err(GkError::InvalidInput(
                        "sampled kernel nodes do not match the quadrature nodes".into(),
                    ));
                }
                values.clone()
            }
        };
        if values
            .iter()
            .any(|v| !v.re.is_finite() || !v.im.is_finite())
        {
            return Err(GkError::NonFinite("kernel samples".into()));
        }
        Ok(values)
    }
}

#[derive(Clone)]
enum BiRepr {
    Closed(BiKernelFn),
    /// `values[j * nodes2.len() + k] = f(nodes1[j], nodes2[k])`.
    Sampled {
        nodes1: Vec<f64>,
        nodes2: Vec<f64>,
        values: Vec<f64>,
    },
}

/// A real kernel `f(x, y)` on `S^{d1} x S^{d2}`.
#[derive(Clone)]
pub struct BiSphereField {
    d1: u32,
    d2: u32,
    repr: BiRepr,
}

impl fmt::Debug for BiSphereField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BiSphereField")
            .field("d1", &self.d1)
            .field("d2", &self.d2)
            .finish_non_exhaustive()
    }
}

impl BiSphereField {
    pub fn closed<F>(d1: u32, d2: u32, f: F) -> Result<Self>
    where
        F: Fn(f64, f64) -> f64 + Send + Sync + 'static,
    {
        check_dim(d1)?;
        check_dim(d2)?;
        Ok(Self {
            d1,
            d2,
            repr: BiRepr::Closed(Arc::new(f)),
        })
    }

    pub fn sampled(
        d1: u32,
        d2: u32,
        nodes1: Vec<f64>,
        nodes2: Vec<f64>,
        values: Vec<f64>,
    ) -> Result<Self> {
        check_dim(d1)?;
        check_dim(d2)?;
        if values.len() != nodes1.len() * nodes2.len() {
            return Err(GkError::InvalidInput(format!(
                "sample tensor has {} values, expected {} x {}",
                values.len(),
                nodes1.len(),
                nodes2.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(GkError::NonFinite("kernel samples".into()));
        }
        Ok(Self {
            d1,
            d2,
            repr: BiRepr::Sampled {
                nodes1,
                nodes2,
                values,
            },
        })
    }

    pub fn dimensions(&self) -> (u32, u32) {
        (self.d1, self.d2)
    }

    pub fn eval(&self, x: f64, y: f64) -> Option<f64> {
        match &self.repr {
            BiRepr::Closed(f) => Some(f(x, y)),
            BiRepr::Sampled { .. } => None,
        }
    }

    pub fn closure(&self) -> Option<BiKernelFn> {
        match &self.repr {
            BiRepr::Closed(f) => Some(f.clone()),
            BiRepr::Sampled { .. } => None,
        }
    }

    pub fn samples_on(&self, b1: &SphereBasis, b2: &SphereBasis) -> Result<Vec<f64>> {
        if b1.dimension() != self.d1 || b2.dimension() != self.d2 {
            return Err(GkError::InvalidInput(
                "basis dimensions do not match the kernel".into(),
            ));
        }
        let values = match &self.repr {
            BiRepr::Closed(f) => {
                let mut out = Vec::with_capacity(b1.quad_order() * b2.quad_order());
                for &x in b1.nodes() {
                    for &y in b2.nodes() {
                        out.push(f(x, y));
                    }
                }
                out
            }
            BiRepr::Sampled {
                nodes1,
                nodes2,
                values,
            } => {
                if !nodes_match(b1.nodes(), nodes1) || !nodes_match(b2.nodes(), nodes2) {
                    return Err(GkError::InvalidInput(
                        "sampled kernel nodes do not match the quadrature nodes".into(),
                    ));
                }
                values.clone()
            }
        };
        if values.iter().any(|v| !v.is_finite()) {
            return Err(GkError::NonFinite("kernel samples".into()));
        }
        Ok(values)
    }
}
