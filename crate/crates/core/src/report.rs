//! Certification reports.

use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    CertifiedPd,
    CertifiedNotPd,
    Inconclusive,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::CertifiedPd => "certified-pd",
            Verdict::CertifiedNotPd => "certified-not-pd",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Where the worst value of a certification was found.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Witness {
    None,
    /// A dual element of an abelian grid (by index and value).
    Frequency {
        index: usize,
        dual: f64,
    },
    /// Schoenberg degree `n`, with the dual element of its coefficient
    /// function when the second factor is an abelian group.
    Degree {
        n: usize,
        dual: Option<f64>,
    },
    /// Coefficient `B[n][m]` of a sphere x sphere expansion.
    DegreePair {
        n: usize,
        m: usize,
    },
    /// Dual pair `(omega, gamma)` of a product of abelian grids.
    DualPair {
        first: f64,
        second: f64,
    },
    /// `f(-u) != conj f(u)` at group element `point`.
    Hermitian {
        point: f64,
    },
    /// The function has not decayed at the edge of a real-line window.
    Boundary {
        edge_value: f64,
    },
    /// The truncated expansion still has significant mass at degree `n`.
    Truncation {
        n: usize,
    },
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Witness::None => write!(f, "none"),
            Witness::Frequency { index, dual } => {
                write!(f, "frequency index={index} dual={dual:e}")
            }
            Witness::Degree { n, dual: Some(d) } => write!(f, "degree n={n} dual={d:e}"),
            Witness::Degree { n, dual: None } => write!(f, "degree n={n}"),
            Witness::DegreePair { n, m } => write!(f, "degree-pair n={n} m={m}"),
            Witness::DualPair { first, second } => {
                write!(f, "dual-pair first={first:e} second={second:e}")
            }
            Witness::Hermitian { point } => write!(f, "hermitian-violation point={point:e}"),
            Witness::Boundary { edge_value } => write!(f, "boundary edge_value={edge_value:e}"),
            Witness::Truncation { n } => write!(f, "truncation n={n}"),
        }
    }
}

/// Every threshold that entered a verdict.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Tolerances {
    /// Acceptance tolerance: values `>= -tol` count as nonnegative.
    pub tol: f64,
    /// Values below `-negative_threshold` count as genuinely negative.
    pub negative_threshold: f64,
    /// Estimated discretization error of the transform.
    pub discretization_error: f64,
    /// Boundary guard for real-line windows (absolute).
    pub boundary_guard: f64,
    /// Tail tolerance for truncated expansions.
    pub tail_tol: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CertReport {
    pub verdict: Verdict,
    pub witness: Witness,
    /// The most negative real transform / coefficient value found.
    pub min_value: f64,
    /// Largest imaginary part seen on the transform side.
    pub max_imag: f64,
    pub tolerances: Tolerances,
    pub truncation: Option<usize>,
    pub tail_estimate: Option<f64>,
    pub notes: Vec<String>,
}

impl CertReport {
    pub(crate) fn new(verdict: Verdict, tolerances: Tolerances) -> Self {
        Self {
            verdict,
            witness: Witness::None,
            min_value: 0.0,
            max_imag: 0.0,
            tolerances,
            truncation: None,
            tail_estimate: None,
            notes: Vec::new(),
        }
    }

    pub fn is_pd(&self) -> bool {
        self.verdict == Verdict::CertifiedPd
    }

    /// Structured `key: value` text with every tolerance echoed.
    pub fn to_text(&self) -> String {
        let t = &self.tolerances;
        let mut out = String::new();
        out.push_str(&format!("verdict: {}\n", self.verdict));
        out.push_str(&format!("witness: {}\n", self.witness));
        out.push_str(&format!("min_value: {:.16e}\n", self.min_value));
        out.push_str(&format!("max_imag: {:.16e}\n", self.max_imag));
        out.push_str(&format!("tolerance.tol: {:e}\n", t.tol));
        out.push_str(&format!(
            "tolerance.negative_threshold: {:e}\n",
            t.negative_threshold
        ));
        out.push_str(&format!(
            "tolerance.discretization_error: {:e}\n",
            t.discretization_error
        ));
        out.push_str(&format!(
            "tolerance.boundary_guard: {:e}\n",
            t.boundary_guard
        ));
        out.push_str(&format!("tolerance.tail_tol: {:e}\n", t.tail_tol));
        match self.truncation {
            Some(n) => out.push_str(&format!("truncation: {n}\n")),
            None => out.push_str("truncation: none\n"),
        }
        match self.tail_estimate {
            Some(v) => out.push_str(&format!("tail_estimate: {v:e}\n")),
            None => out.push_str("tail_estimate: none\n"),
        }
        for note in &self.notes {
            out.push_str(&format!("note: {note}\n"));
        }
        out
    }
}

impl fmt::Display for CertReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}
