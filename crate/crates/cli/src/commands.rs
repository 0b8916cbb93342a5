use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::Args;
use gk_core::appendix::{
    conclusion_demo, default_grid, fourier_lower_bound_check, ln_norm, Base, PeriodizationSpec,
    DEMO_NOTE,
};
use gk_core::chg::{gneiting_certify, FirstFactor};
use gk_core::gneiting::{
    cm_mixture_coeffs, exp_arccos_coeffs, psi_infinity_check, rn_table, CmMixture,
};
use gk_core::gram::{gram_matrix, min_eigenvalue, randomized_pd_probe, PointConfig, ProbeOptions};
use gk_core::schoenberg::{
    certify_sphere_sphere, certify_sphere_time, d_schoenberg, sphere_sphere_coefficients,
};
use gk_core::special_fn::SphereBasis;
use gk_core::{CertReport, Verdict};

use crate::spec::{family_name, KernelDef, KernelSpecFile, LoadedSpec, Problem};
use crate::{CliError, GlobalArgs};

fn write_out(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(p) => std::fs::write(p, text)
            .map_err(|e| CliError::Numeric(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load(global: &GlobalArgs) -> Result<LoadedSpec, CliError> {
    let path = global
        .spec
        .as_deref()
        .ok_or_else(|| CliError::Spec("--spec is required".into()))?;
    let mut spec = LoadedSpec::read(path)?;
    if let Some(tol) = global.tol {
        if !(tol > 0.0 && tol.is_finite()) {
            return Err(CliError::Spec(format!("--tol must be positive, got {tol}")));
        }
        spec.settings.transform_tol = tol;
    }
    if let Some(seed) = global.seed {
        spec.file.seed = Some(seed);
    }
    Ok(spec)
}

pub fn schoenberg(global: &GlobalArgs) -> Result<u8, CliError> {
    let spec = load(global)?;
    let problem = spec.problem()?;
    let mut summary = format!(
        "kernel: {}\nproblem: {}\n",
        family_name(&spec.file.kernel),
        problem.describe()
    );
    let csv = match &problem {
        Problem::SphereGroup { field, basis } => {
            let series = d_schoenberg(field, basis)?;
            let min = series
                .coefficients()
                .iter()
                .flat_map(|b| b.values().iter().map(|v| v.re))
                .fold(f64::INFINITY, f64::min);
            let _ = writeln!(summary, "coefficients: {}", series.max_degree() + 1);
            let _ = writeln!(summary, "min_coefficient_re: {min:.16e}");
            let _ = writeln!(summary, "all_coefficients_ge_-1e-9: {}", min >= -1e-9);
            let _ = writeln!(summary, "total_mass: {:.16e}", series.total_mass());
            series.to_csv()
        }
        Problem::SphereSphere { field, b1, b2 } => {
            let table = sphere_sphere_coefficients(field, b1, b2)?;
            let mut csv = String::from("n,m,value\n");
            let mut min = f64::INFINITY;
            for (n, row) in table.iter().enumerate() {
                for (m, v) in row.iter().enumerate() {
                    min = min.min(*v);
                    let _ = writeln!(csv, "{n},{m},{v:.16e}");
                }
            }
            let _ = writeln!(summary, "min_coefficient: {min:.16e}");
            let _ = writeln!(summary, "all_coefficients_ge_-1e-9: {}", min >= -1e-9);
            csv
        }
        Problem::GroupGroup { .. } => {
            return Err(CliError::Spec(
                "first: schoenberg expansions need a sphere first factor".into(),
            ))
        }
    };
    match &global.out {
        Some(p) => {
            write_out(Some(p), &csv)?;
            print!("{summary}");
        }
        None => {
            print!("{csv}");
            eprint!("{summary}");
        }
    }
    Ok(0)
}

#[derive(Args, Debug, Clone)]
pub struct CertifyArgs {
    /// Run the randomized Gram probe and append its worst case.
    #[arg(long)]
    pub oracle: bool,
    /// Write the probe's worst configuration as CSV.
    #[arg(long)]
    pub witness_out: Option<PathBuf>,
    /// Evaluate the Gram matrix on a configuration CSV written by --witness-out.
    #[arg(long)]
    pub replay: Option<PathBuf>,
}

fn verdict_code(r: &CertReport) -> u8 {
    match r.verdict {
        Verdict::CertifiedPd => 0,
        Verdict::CertifiedNotPd => 1,
        Verdict::Inconclusive => 4,
    }
}

pub fn certify(global: &GlobalArgs, args: &CertifyArgs) -> Result<u8, CliError> {
    let spec = load(global)?;
    let problem = spec.problem()?;
    let report = match &problem {
        Problem::SphereGroup { field, basis } => certify_sphere_time(field, basis, &spec.settings)?,
        Problem::SphereSphere { field, b1, b2 } => {
            certify_sphere_sphere(field, b1, b2, &spec.settings)?
        }
        Problem::GroupGroup { field, .. } => gneiting_certify(field, &spec.settings)?,
    };
    let mut text = format!(
        "kernel: {}\nproblem: {}\nseed: {}\n",
        family_name(&spec.file.kernel),
        problem.describe(),
        spec.seed()
    );
    text.push_str(&report.to_text());
    let mut code = verdict_code(&report);

    if args.oracle || args.replay.is_some() {
        let kernel = problem
            .gram_kernel()
            .ok_or_else(|| CliError::Spec("the Gram oracle needs a closed-form kernel".into()))?;
        if let Some(path) = &args.replay {
            let csv = std::fs::read_to_string(path)
                .map_err(|e| CliError::Spec(format!("cannot read {}: {e}", path.display())))?;
            let cfg = PointConfig::from_csv(&csv, spec.seed())?;
            let m = gram_matrix(&kernel, &cfg)?;
            let _ = writeln!(text, "replay_points: {}", cfg.len());
            let _ = writeln!(text, "replay_min_eigenvalue: {:.16e}", min_eigenvalue(&m)?);
        }
        if args.oracle {
            let opts = ProbeOptions {
                n_points: spec.settings.probe_points,
                trials: spec.settings.probe_trials,
                seed: spec.seed(),
                ..ProbeOptions::default()
            };
            let probe = randomized_pd_probe(&kernel, &opts)?;
            let falsified = probe.falsifies(spec.settings.quad_tol.max(1e-8));
            let _ = writeln!(text, "oracle.trials: {}", probe.trials_run);
            let _ = writeln!(text, "oracle.points: {}", opts.n_points);
            let _ = writeln!(text, "oracle.worst_min_eigenvalue: {:.16e}", probe.worst);
            let _ = writeln!(text, "oracle.worst_trial: {}", probe.trial);
            let _ = writeln!(text, "oracle.falsified: {falsified}");
            if let Some(p) = &args.witness_out {
                write_out(Some(p), &probe.config.to_csv())?;
            }
            if falsified && report.is_pd() {
                print!("{text}");
                return Err(CliError::Numeric(
                    "the Gram oracle contradicts the certificate".into(),
                ));
            }
            if falsified && report.verdict == Verdict::Inconclusive {
                text.push_str("note: the Gram oracle exhibits a negative eigenvalue\n");
                code = 1;
            }
        }
    }
    write_out(global.out.as_deref(), &text)?;
    Ok(code)
}

pub fn synth(global: &GlobalArgs) -> Result<u8, CliError> {
    let spec = load(global)?;
    let out = global
        .out
        .as_deref()
        .ok_or_else(|| CliError::Spec("--out is required for synth".into()))?;
    let fam = spec.spectral_family()?;
    let mut csv = String::new();
    match fam.first() {
        FirstFactor::Sphere(d) => {
            let basis: SphereBasis = spec.basis(*d)?;
            csv.push_str("x,u,re,im\n");
            for &x in basis.nodes() {
                for (i, &u) in fam.second().points().iter().enumerate() {
                    let v = fam.synthesize_index(x, i)?;
                    let _ = writeln!(csv, "{x:.16e},{u:.16e},{:.16e},{:.16e}", v.re, v.im);
                }
            }
        }
        FirstFactor::Abelian(_) => {
            let field = fam.product_field()?;
            csv.push_str("h,u,re,im\n");
            for (i, &h) in field.first().points().iter().enumerate() {
                for (j, &u) in field.second().points().iter().enumerate() {
                    let v = field.at(i, j);
                    let _ = writeln!(csv, "{h:.16e},{u:.16e},{:.16e},{:.16e}", v.re, v.im);
                }
            }
        }
    }
    write_out(Some(out), &csv)?;
    let companion: KernelSpecFile = KernelSpecFile {
        kernel: KernelDef::Samples {
            file: out
                .file_name()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default(),
        },
        ..spec.file.clone()
    };
    let toml_text = toml::to_string(&companion)
        .map_err(|e| CliError::Numeric(format!("cannot serialize companion spec: {e}")))?;
    let spec_path = out.with_extension("toml");
    write_out(Some(&spec_path), &toml_text)?;
    println!("samples: {}", out.display());
    println!("spec: {}", spec_path.display());
    println!("members: {}", fam.members().len());
    println!("total_mass: {:.16e}", fam.total_mass());
    println!("tail_estimate: {:e}", fam.tail_estimate());
    Ok(0)
}

#[derive(Args, Debug, Clone)]
pub struct GneitingArgs {
    /// Print r_0, ..., r_N as exact integer polynomials.
    #[arg(long, value_name = "N")]
    pub table: Option<usize>,
    /// Write the r_n table as CSV (n, power, coefficient).
    #[arg(long, value_name = "PATH")]
    pub csv: Option<PathBuf>,
    /// Taylor coefficients of exp(-a arccos x) for this a.
    #[arg(long, value_name = "A")]
    pub coeffs: Option<f64>,
    /// Mixture atoms as a:w pairs, e.g. 1:0.5,2:0.5.
    #[arg(long, value_name = "ATOMS")]
    pub mixture: Option<String>,
    /// Highest coefficient index for --coeffs and --mixture.
    #[arg(long, default_value_t = 40)]
    pub max_n: usize,
    /// Run the nonnegative-coefficient membership check; exit 1 on FAIL.
    #[arg(long)]
    pub check: bool,
}

fn parse_atoms(s: &str) -> Result<Vec<(f64, f64)>, CliError> {
    s.split(',')
        .map(|pair| {
            let (a, w) = pair
                .split_once(':')
                .ok_or_else(|| CliError::Spec(format!("--mixture: expected a:w, got {pair:?}")))?;
            let num = |v: &str| {
                v.trim()
                    .parse::<f64>()
                    .map_err(|_| CliError::Spec(format!("--mixture: bad number {v:?}")))
            };
            Ok((num(a)?, num(w)?))
        })
        .collect()
}

pub fn gneiting(global: &GlobalArgs, args: &GneitingArgs) -> Result<u8, CliError> {
    let mut out = String::new();
    let mut code = 0;
    if let Some(n) = args.table {
        let t = rn_table(n);
        out.push_str(&t.listing());
        if let Some(p) = &args.csv {
            write_out(Some(p), &t.to_csv())?;
        }
    }
    let tol = global.tol.unwrap_or(1e-12);
    let series = match (args.coeffs, &args.mixture) {
        (Some(_), Some(_)) => {
            return Err(CliError::Spec(
                "give --coeffs or --mixture, not both".into(),
            ))
        }
        (Some(a), None) => {
            let c = exp_arccos_coeffs(a, args.max_n)?;
            out.push_str("n,coefficient\n");
            for (n, v) in c.iter().enumerate() {
                let _ = writeln!(out, "{n},{v:.16e}");
            }
            Some(c)
        }
        (None, Some(s)) => {
            let mix = CmMixture::new(parse_atoms(s)?)?;
            let m = cm_mixture_coeffs(&mix, args.max_n);
            out.push_str("n,c_n,taylor\n");
            for (n, (c, t)) in m.c.iter().zip(&m.taylor).enumerate() {
                let _ = writeln!(out, "{n},{c:.16e},{t:.16e}");
            }
            Some(m.taylor)
        }
        (None, None) => None,
    };
    if args.check {
        let c =
            series.ok_or_else(|| CliError::Spec("--check needs --coeffs or --mixture".into()))?;
        let r = psi_infinity_check(&c, tol, 1e-8);
        out.push_str(&r.to_string());
        code = if r.pass { 0 } else { 1 };
    }
    if args.table.is_none() && args.coeffs.is_none() && args.mixture.is_none() {
        return Err(CliError::Spec(
            "gneiting: give --table, --coeffs or --mixture".into(),
        ));
    }
    write_out(global.out.as_deref(), &out)?;
    Ok(code)
}

#[derive(Args, Debug, Clone)]
pub struct AppendixArgs {
    /// Print ||L_n|| = 4 int_0^{n pi} |sin u| / u du.
    #[arg(long, value_name = "N")]
    pub ln: Option<usize>,
    /// CSV of ||L_n|| for n = 1, 2, 4, ... up to N.
    #[arg(long, value_name = "N")]
    pub ln_table: Option<usize>,
    /// Minimum of |Ff| / |Fh| for the periodized base.
    #[arg(long)]
    pub ratio: bool,
    /// Comma-separated square window half-widths for the mass table.
    #[arg(long, value_name = "W,..")]
    pub windows: Option<String>,
    /// Base function: triangle, gaussian or tents.
    #[arg(long, default_value = "triangle")]
    pub base: String,
}

pub fn appendix(global: &GlobalArgs, args: &AppendixArgs) -> Result<u8, CliError> {
    let mut out = String::new();
    if let Some(n) = args.ln {
        let _ = writeln!(out, "ln_norm({n}) = {:.10}", ln_norm(n)?);
    }
    if let Some(n) = args.ln_table {
        out.push_str("n,ln_norm\n");
        let mut k = 1;
        while k <= n.max(1) {
            let _ = writeln!(out, "{k},{:.16e}", ln_norm(k)?);
            k *= 2;
        }
    }
    let (base, grid) = match args.base.as_str() {
        "triangle" => (Base::Triangle, default_grid()),
        "gaussian" => (Base::Gaussian { sigma: 0.08 }, default_grid()),
        "tents" => (
            Base::NestedTents { levels: 7 },
            gk_core::abelian::AbelianGrid::real_line(1.0 / 1024.0, 32.0)?,
        ),
        other => return Err(CliError::Spec(format!("--base: unknown base {other:?}"))),
    };
    let spec = PeriodizationSpec::new(base, 20)?;
    if args.ratio || args.windows.is_some() {
        eprintln!("note: {DEMO_NOTE}");
    }
    if args.ratio {
        let r = fourier_lower_bound_check(&spec, &grid, f64::INFINITY)?;
        let _ = writeln!(out, "min_ratio: {:.16e}", r.min_ratio);
        let _ = writeln!(out, "argmin_t: {:.16e}", r.argmin);
        let _ = writeln!(out, "ratio_at_zero: {:.16e}", r.ratio_at_zero);
        let _ = writeln!(out, "resolved_frequencies: {}", r.resolved);
        let _ = writeln!(out, "bound_0.25_holds: {}", r.min_ratio >= 0.25 - 1e-6);
    }
    if let Some(w) = &args.windows {
        let windows: Vec<f64> = w
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| CliError::Spec(format!("--windows: bad number {s:?}")))
            })
            .collect::<Result<_, _>>()?;
        out.push_str("window,mass,lower\n");
        for r in conclusion_demo(&spec, &grid, &windows)? {
            let _ = writeln!(out, "{:.16e},{:.16e},{:.16e}", r.window, r.mass, r.lower);
        }
    }
    if out.is_empty() {
        return Err(CliError::Spec(
            "appendix: give --ln, --ln-table, --ratio or --windows".into(),
        ));
    }
    write_out(global.out.as_deref(), &out)?;
    Ok(0)
}
