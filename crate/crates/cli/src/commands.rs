use std::path::{Path, PathBuf};

use sheafbar::endpoint::{format_rational, parse_rational, Rational};
use sheafbar::geometry::{self, ConeParams, GeometryError, PointCloud, Verdict};
use sheafbar::interleaving::{
    check_interleaving, gamma, gamma_symmetric, rational_truncation, CertificateSpec, Decision, InterleavingCertificate,
};
use sheafbar::limits::{complete_cauchy, defect_check, hocolim, InductiveSystem, LimitMode, Subsample};
use sheafbar::morphism::MorphismSpec;
use sheafbar::spectral::{spectral_invariants, sublevel_barcode, Convention, PlFunction};
use sheafbar::{Barcode, Endpoint, PrimeField};

use crate::config::{Config, FileConfig};
use crate::error::CliError;
use crate::output::Output;

fn read_text(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

fn read_barcode(path: &Path) -> Result<Barcode, CliError> {
    Barcode::parse_text(&read_text(path)?).map_err(|e| CliError::parse(path, e))
}

fn rational_arg(name: &str, text: &str) -> Result<Rational, CliError> {
    parse_rational(text).map_err(|e| CliError::Input(format!("--{name}: {e}")))
}

fn geometry_error(e: GeometryError) -> CliError {
    match e {
        GeometryError::Parse { .. }
        | GeometryError::BadDimension(_)
        | GeometryError::DimensionMismatch { .. }
        | GeometryError::EmptyCloud => CliError::Input(e.to_string()),
        other => CliError::Domain(other.to_string()),
    }
}

fn stem(path: &Path) -> String {
    path.file_stem().map_or_else(|| "barcode".into(), |s| s.to_string_lossy().into_owned())
}

/// How the certificate file names a barcode: by file name when they share a directory.
fn reference_from(cert: &Path, barcode: &Path) -> String {
    let dir = |p: &Path| p.canonicalize().ok().and_then(|c| c.parent().map(Path::to_path_buf));
    let cert_dir = cert
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."))
        .canonicalize()
        .ok();
    match (cert_dir, dir(barcode), barcode.file_name()) {
        (Some(c), Some(b), Some(name)) if c == b => name.to_string_lossy().into_owned(),
        _ => barcode
            .canonicalize()
            .map_or_else(|_| barcode.display().to_string(), |p| p.display().to_string()),
    }
}

/// Write the certificate, read it back and verify it against the barcodes again.
fn write_certificate(
    path: &Path,
    cert: &InterleavingCertificate,
    f_path: &Path,
    g_path: &Path,
    f: &Barcode,
    g: &Barcode,
    field: PrimeField,
) -> Result<(), CliError> {
    let text = cert.to_text(&reference_from(path, f_path), &reference_from(path, g_path));
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))?;
    let spec = CertificateSpec::parse(&read_text(path)?).map_err(|e| CliError::parse(path, e))?;
    let reread = spec
        .resolve(f, g, field)
        .map_err(|e| CliError::Domain(format!("{}: certificate failed re-verification: {e}", path.display())))?;
    if &reread != cert {
        return Err(CliError::Domain(format!("{}: certificate changed on re-reading", path.display())));
    }
    Ok(())
}

pub fn dist_gamma(
    cfg: &Config,
    out: &Output,
    f_path: &Path,
    g_path: &Path,
    symmetric: bool,
    cert_path: Option<PathBuf>,
) -> Result<(), CliError> {
    let f = read_barcode(f_path)?;
    let g = read_barcode(g_path)?;
    let options = cfg.search();
    let report = if symmetric {
        gamma_symmetric(&f, &g, &options)
    } else {
        gamma(&f, &g, &options)
    };
    let exactness = if report.is_exact() { "exact" } else { "bracket" };
    if report.is_exact() {
        out.human(format!("{} exact", report.value));
    } else {
        out.human(format!("[{}, {}] bracket", report.lower(), report.upper()));
    }
    let mut cert_field = String::from("none");
    match &report.certificate {
        Some(cert) => {
            let path = cert_path.unwrap_or_else(|| PathBuf::from(format!("{}_{}.cert", stem(f_path), stem(g_path))));
            write_certificate(&path, cert, f_path, g_path, &f, &g, cfg.field)?;
            out.human(format!(
                "certificate {} (a = {}, b = {})",
                path.display(),
                format_rational(cert.a()),
                format_rational(cert.b())
            ));
            cert_field = path.display().to_string();
        }
        None if report.is_exact() => {
            let reason = if report.value == Endpoint::PosInf {
                "no interleaving at any finite shift"
            } else {
                "no single pair of shifts works in every degree"
            };
            out.human(format!("certificate none: {reason}"));
        }
        None => {}
    }
    out.record(
        "gamma",
        &[
            ("symmetric", symmetric.to_string()),
            ("value", report.value.to_string()),
            ("exactness", exactness.into()),
            ("lower", report.lower().to_string()),
            ("upper", report.upper().to_string()),
            ("certificate", cert_field),
        ],
    );
    Ok(())
}

pub fn dist_check(
    cfg: &Config,
    out: &Output,
    f_path: &Path,
    g_path: &Path,
    a: &str,
    b: &str,
    cert_path: Option<PathBuf>,
) -> Result<(), CliError> {
    let f = read_barcode(f_path)?;
    let g = read_barcode(g_path)?;
    let a = rational_arg("a", a)?;
    let b = rational_arg("b", b)?;
    let decision =
        check_interleaving(&f, &g, &a, &b, &cfg.search()).map_err(|e| CliError::Domain(e.to_string()))?;
    let verdict = match &decision {
        Decision::Found(_) => "found",
        Decision::Infeasible => "infeasible",
        Decision::Unknown => "unknown",
    };
    out.human(verdict);
    let mut cert_field = String::from("none");
    if let (Decision::Found(cert), Some(path)) = (&decision, cert_path) {
        write_certificate(&path, cert, f_path, g_path, &f, &g, cfg.field)?;
        out.human(format!("certificate {}", path.display()));
        cert_field = path.display().to_string();
    }
    out.record(
        "check",
        &[
            ("a", format_rational(&a)),
            ("b", format_rational(&b)),
            ("result", verdict.into()),
            ("certificate", cert_field),
        ],
    );
    Ok(())
}

pub fn spectral(out: &Output, path: &Path, convention: Convention, dim: i32) -> Result<(), CliError> {
    let b = read_barcode(path)?;
    let r = spectral_invariants(&b, convention, dim).map_err(|e| CliError::Domain(e.to_string()))?;
    out.human(format!("c_minus {}", format_rational(&r.c_minus)));
    out.human(format!("c_plus {}", format_rational(&r.c_plus)));
    out.human(format!("gamma {}", format_rational(&r.gamma)));
    for (degree, value) in &r.invariants {
        out.human(format!("essential {degree} {value}"));
        out.record("essential", &[("degree", degree.to_string()), ("value", value.to_string())]);
    }
    out.record(
        "spectral",
        &[
            ("c_minus", format_rational(&r.c_minus)),
            ("c_plus", format_rational(&r.c_plus)),
            ("gamma", format_rational(&r.gamma)),
        ],
    );
    Ok(())
}

pub fn sublevel(out: &Output, path: &Path) -> Result<(), CliError> {
    let f = PlFunction::parse(&read_text(path)?).map_err(|e| CliError::parse(path, e))?;
    out.barcode(&sublevel_barcode(&f));
    Ok(())
}

pub fn limit(cfg: &Config, out: &Output, dir: &Path, defect: Option<usize>, mode: LimitMode) -> Result<(), CliError> {
    let system = InductiveSystem::load_dir(dir, cfg.field)?;
    let lim = hocolim(&system, mode)?;
    out.barcode(&lim.barcode);
    out.human(format!("error_bound {}", lim.error_bound));
    out.human(format!("exact {}", lim.is_exact()));
    out.record(
        "limit",
        &[
            ("stages", system.stages().len().to_string()),
            ("bars", lim.barcode.len().to_string()),
            ("error_bound", lim.error_bound.to_string()),
            ("exact", lim.is_exact().to_string()),
        ],
    );
    if let Some(n) = defect {
        if n > system.last_index() {
            return Err(CliError::Input(format!(
                "--defect {n}: the tower has stages 0..={}",
                system.last_index()
            )));
        }
        let report = defect_check(&system, n)?;
        out.human(format!("defect {n} lhs {} rhs {} holds {}", report.lhs, report.rhs, report.holds()));
        out.record(
            "defect",
            &[
                ("stage", n.to_string()),
                ("lhs", report.lhs.to_string()),
                ("rhs", report.rhs.to_string()),
                ("holds", report.holds().to_string()),
            ],
        );
        if !report.holds() {
            return Err(CliError::Domain(format!("defect bound fails at stage {n}")));
        }
    }
    Ok(())
}

/// `F0.bc, F1.bc, ...` up to the first missing index.
fn read_sequence(dir: &Path) -> Result<Vec<Barcode>, CliError> {
    if !dir.is_dir() {
        return Err(CliError::Input(format!("{}: not a directory", dir.display())));
    }
    let mut seq = Vec::new();
    loop {
        let path = dir.join(format!("F{}.bc", seq.len()));
        if !path.exists() {
            break;
        }
        seq.push(read_barcode(&path)?);
    }
    if seq.is_empty() {
        return Err(CliError::Input(format!("{}: no F0.bc", dir.display())));
    }
    Ok(seq)
}

pub fn complete(cfg: &Config, out: &Output, dir: &Path, tol: &str) -> Result<(), CliError> {
    let seq = read_sequence(dir)?;
    let tol = rational_arg("tol", tol)?;
    let subsample = cfg.seed.map_or(Subsample::Earliest, Subsample::Seeded);
    let done = complete_cauchy(&seq, &tol, &cfg.search(), subsample)?;
    let kept: Vec<String> = done.subsequence.iter().map(|i| i.to_string()).collect();
    out.human(format!("subsequence {}", kept.join(" ")));
    out.barcode(&done.limit.barcode);
    out.human(format!("distance_to_last {}", done.distance_to_last));
    out.human(format!("exact {}", done.limit.is_exact()));
    out.record(
        "completion",
        &[
            ("subsequence", kept.join(",")),
            ("distance_to_last", done.distance_to_last.to_string()),
            ("error_bound", done.limit.error_bound.to_string()),
            ("exact", done.limit.is_exact().to_string()),
        ],
    );
    Ok(())
}

pub fn cone_test(out: &Output, cloud_path: &Path, point: &str, params: &ConeParams) -> Result<(), CliError> {
    let cloud = PointCloud::parse_csv(&read_text(cloud_path)?).map_err(geometry_error)?;
    let x = geometry::parse_point(point).map_err(|e| CliError::Input(format!("--point: {e}")))?;
    let report = geometry::cone_coisotropy_test(&cloud, &x, params).map_err(geometry_error)?;
    out.human(report.verdict.to_string());
    out.human(format!(
        "paratingent rank {} of {} ({} directions), contingent {} directions",
        report.paratingent_rank,
        cloud.dimension(),
        report.paratingent.len(),
        report.contingent.len()
    ));
    let normal = match &report.verdict {
        Verdict::NotCoisotropic(h) => h.normal.iter().map(|c| format!("{c:.6}")).collect::<Vec<_>>().join(","),
        _ => "none".into(),
    };
    let verdict = match &report.verdict {
        Verdict::CoisotropicVacuous => "coisotropic-vacuous",
        Verdict::Coisotropic => "coisotropic",
        Verdict::NotCoisotropic(_) => "not-coisotropic",
    };
    out.record(
        "cone",
        &[
            ("verdict", verdict.into()),
            ("witness", normal),
            ("paratingent_rank", report.paratingent_rank.to_string()),
            ("contingent_directions", report.contingent.len().to_string()),
            ("paratingent_directions", report.paratingent.len().to_string()),
        ],
    );
    Ok(())
}

pub fn cantor(out: &Output, a: &str, n: u32, k: u32, emit_cloud: bool, bound_table: bool) -> Result<(), CliError> {
    let a = rational_arg("a", a)?;
    if bound_table {
        for level in 1..=k {
            let bound = geometry::displacement_bound(&a, level, n).map_err(geometry_error)?;
            out.human(format!("{level} {}", format_rational(&bound)));
            out.record("bound", &[("k", level.to_string()), ("value", format_rational(&bound))]);
        }
        return Ok(());
    }
    let family = geometry::cantor_cubes(&a, k, n).map_err(geometry_error)?;
    if emit_cloud {
        print!("{}", family.vertex_cloud().map_err(geometry_error)?.to_csv());
        return Ok(());
    }
    out.human(format!("cubes {} edge {}", family.len(), format_rational(&family.edge)));
    out.record(
        "cantor",
        &[("cubes", family.len().to_string()), ("edge", format_rational(&family.edge))],
    );
    if out.is_human() {
        print!("{}", family.to_text());
    }
    Ok(())
}

pub fn rational_degeneracy(cfg: &Config, out: &Output, denom_max: u32) -> Result<(), CliError> {
    if denom_max < 2 {
        return Err(CliError::Input("--denom-max must be at least 2".into()));
    }
    let mut previous: Option<Endpoint> = None;
    let mut failures = Vec::new();
    for m in 2..=denom_max {
        let (f, g) = rational_truncation(m);
        let bound = Rational::new(1.into(), m.into());
        let report = gamma(&f, &g, &cfg.search());
        let certified = report.certificate.as_ref().is_some_and(|c| c.total() <= bound);
        let distinct = f != g;
        let monotone = previous.as_ref().map_or(true, |p| &report.value <= p);
        out.human(format!(
            "N={m} bars={} gamma={} bound={} certified={certified} distinct={distinct}",
            f.len(),
            report.value,
            format_rational(&bound)
        ));
        out.record(
            "degeneracy",
            &[
                ("denom_max", m.to_string()),
                ("bars", f.len().to_string()),
                ("gamma", report.value.to_string()),
                ("bound", format_rational(&bound)),
                ("certified", certified.to_string()),
                ("distinct", distinct.to_string()),
                ("monotone", monotone.to_string()),
            ],
        );
        if !(certified && distinct && monotone) {
            failures.push(m);
        }
        previous = Some(report.value);
    }
    if failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::Domain(format!("degeneracy checks failed for N in {failures:?}")))
    }
}

fn relative(base: &Path, name: &str) -> PathBuf {
    base.parent().unwrap_or(Path::new(".")).join(name)
}

pub fn validate(cfg: &Config, out: &Output, path: &Path) -> Result<(), CliError> {
    let report = |kind: &str, detail: String| {
        out.human(format!("ok {kind}: {detail}"));
        out.record("valid", &[("type", kind.into()), ("detail", detail)]);
    };
    if path.is_dir() {
        let system = InductiveSystem::load_dir(path, cfg.field)?.with_reverses()?;
        report("tower", format!("{} stages", system.stages().len()));
        return Ok(());
    }
    let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("");
    match ext {
        "bc" => {
            let b = read_barcode(path)?;
            let again = Barcode::parse_text(&b.to_text()).map_err(|e| CliError::parse(path, e))?;
            if again != b {
                return Err(CliError::Domain(format!("{}: round trip changed the barcode", path.display())));
            }
            report("barcode", format!("{} bars", b.len()));
        }
        "mor" => {
            let spec = MorphismSpec::parse(&read_text(path)?).map_err(|e| CliError::parse(path, e))?;
            let source = read_barcode(&relative(path, &spec.source_path))?;
            let target = read_barcode(&relative(path, &spec.target_path))?;
            let (m, dropped) = spec
                .resolve(&source, &target, cfg.field)
                .map_err(|e| CliError::parse(path, e))?;
            if !dropped.is_empty() {
                return Err(CliError::Domain(format!(
                    "{}: entries outside the allowed support: {dropped:?}",
                    path.display()
                )));
            }
            report("morphism", format!("{} nonzero entries", m.matrix().nonzero_entries().count()));
        }
        "cert" => {
            let spec = CertificateSpec::parse(&read_text(path)?).map_err(|e| CliError::parse(path, e))?;
            let f = read_barcode(&relative(path, &spec.u.source_path))?;
            let g = read_barcode(&relative(path, &spec.u.target_path))?;
            let cert = spec
                .resolve(&f, &g, cfg.field)
                .map_err(|e| CliError::Domain(format!("{}: {e}", path.display())))?;
            report("certificate", format!("total shift {}", format_rational(&cert.total())));
        }
        "pl" => {
            let f = PlFunction::parse(&read_text(path)?).map_err(|e| CliError::parse(path, e))?;
            report("pl-function", format!("{} breakpoints", f.values().len()));
        }
        "csv" => {
            let cloud = PointCloud::parse_csv(&read_text(path)?).map_err(geometry_error)?;
            report("point-cloud", format!("{} points in dimension {}", cloud.len(), cloud.dimension()));
        }
        "toml" => {
            FileConfig::load(path)?;
            report("config", "ok".into());
        }
        _ => {
            return Err(CliError::Input(format!(
                "{}: unknown file type (expected .bc, .mor, .cert, .pl, .csv, .toml or a tower directory)",
                path.display()
            )))
        }
    }
    Ok(())
}
