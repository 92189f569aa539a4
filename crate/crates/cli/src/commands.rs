use std::fmt;
use std::path::{Path, PathBuf};

use jdisc_core::acstructure::{
    coefficients_from_structure, levi_form_checked, matrix_a_from_j, nondegeneracy_check, normalize_coordinates,
    to_real, verify_block_structure, BlockReport, FitReport, LeviEstimate, NormalizationReport, StructureField,
    LEVI_STEP,
};
use jdisc_core::beltrami::{BeltramiSolver, CoefficientPair, SolveReport};
use jdisc_core::discfield::{build_grid, dbar, dz, norm, ComplexField};
use jdisc_core::morse::{
    crossing_profile, morse_normal_form, takagi, totally_real_e, ComplexMatrix, CrossingProfile, MorseModel,
    TotallyRealSet,
};
use jdisc_core::transforms::{
    bergman, cauchy_green, estimate_norm, r0, random_polynomial_field, t0, OperatorId, OperatorNormProfile,
    PROBE_DEGREE,
};
use jdisc_core::Complex64;
use nalgebra::Vector4;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::Value;

use crate::config::{AnalyzeInput, MorseInput, SolveInput, StructureInput, TakagiInput, VerifyInput};
use crate::output::{emit, envelope, write_atomic};

#[derive(Debug)]
pub enum Failure {
    Core(jdisc_core::Error),
    /// Unreadable or invalid configuration, bad arguments.
    Input(String),
    /// The command ran and its report says a required check did not hold.
    Check(String),
    Io(String),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Core(jdisc_core::Error::NonConvergence { .. }) => 2,
            Failure::Core(_) | Failure::Input(_) | Failure::Check(_) => 1,
            Failure::Io(_) => 3,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Core(e) => write!(f, "{e}"),
            Failure::Input(m) => write!(f, "invalid input: {m}"),
            Failure::Check(m) => write!(f, "check failed: {m}"),
            Failure::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl From<jdisc_core::Error> for Failure {
    fn from(e: jdisc_core::Error) -> Self {
        Failure::Core(e)
    }
}

pub type Outcome = Result<(), Failure>;

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> Failure + '_ {
    move |e| Failure::Io(format!("{}: {e}", path.display()))
}

pub fn read_config<T: DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn emit_to(value: &impl Serialize, out: Option<&Path>) -> Outcome {
    emit(value, out)
        .map_err(|e| Failure::Io(format!("{}: {e}", out.map_or("stdout".into(), |p| p.display().to_string()))))
}

/// Overrides shared by several subcommands.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub grid: Option<(usize, usize)>,
    pub seed: Option<u64>,
    pub p: Option<f64>,
    pub n: Option<u32>,
}

#[derive(Serialize)]
struct SolveResult {
    coefficients: CoefficientPair,
    fit: Option<FitReport>,
    report: SolveReport,
}

fn pair_from_structure(s: &StructureInput) -> Result<(CoefficientPair, FitReport), Failure> {
    let field = StructureField::sample(&s.spec, &s.sample)?;
    let blocks = verify_block_structure(&field);
    if !blocks.pass {
        return Err(Failure::Check(format!("structure fails block conditions {:?}", blocks.failing)));
    }
    Ok(coefficients_from_structure(&field, s.sample.gamma, s.fit_degree)?)
}

pub fn solve(config: &Path, ov: &Overrides, out: Option<&Path>, fields: Option<&Path>) -> Outcome {
    let mut cfg: SolveInput = read_config(config)?;
    if let Some((nr, na)) = ov.grid {
        cfg.solver.n_radial = nr;
        cfg.solver.n_angular = na;
    }
    if let Some(p) = ov.p {
        cfg.solver.p = Some(p);
    }
    if let Some(n) = ov.n {
        cfg.solver.n = n;
    }
    if let Some(seed) = ov.seed {
        cfg.solver.seed = seed;
    }
    let (pair, fit) = match (&cfg.coefficients, &cfg.structure) {
        (Some(c), None) => (c.build()?, None),
        (None, Some(s)) => {
            let (pair, fit) = pair_from_structure(s)?;
            (pair, Some(fit))
        }
        _ => return Err(Failure::Input("give exactly one of `coefficients` or `structure`".into())),
    };
    let solver = BeltramiSolver::new(pair.clone(), cfg.solver.clone())?;
    let (sol, report) = solver.outer_iterate()?;
    if let Some(dir) = fields {
        std::fs::create_dir_all(dir).map_err(io_err(dir))?;
        for (name, f) in [("z", &sol.z), ("w", &sol.w), ("u", &sol.u), ("v", &sol.v), ("h", &sol.h)] {
            let mut buf = Vec::new();
            f.write_csv(&mut buf).map_err(io_err(dir))?;
            let path = dir.join(format!("{name}.csv"));
            write_atomic(&path, &buf).map_err(io_err(&path))?;
        }
    }
    let converged = report.converged;
    emit_to(&envelope("solve", &cfg, SolveResult { coefficients: pair, fit, report }), out)?;
    if !converged {
        return Err(Failure::Check("solver stopped without meeting its tolerances".into()));
    }
    Ok(())
}

#[derive(Serialize)]
struct IdentityCheck {
    identity: &'static str,
    grid: String,
    max_error: f64,
    threshold: f64,
    pass: bool,
}

#[derive(Serialize)]
struct VerifyResult {
    checks: Vec<IdentityCheck>,
    norm_estimates: Vec<OperatorNormProfile>,
    all_pass: bool,
}

pub fn verify_ops(config: Option<&Path>, ov: &Overrides, out: Option<&Path>) -> Outcome {
    let mut cfg = match config {
        Some(p) => read_config(p)?,
        None => VerifyInput::default(),
    };
    if let Some((nr, na)) = ov.grid {
        cfg.n_radial = nr;
        cfg.n_angular = na;
    }
    if let Some(seed) = ov.seed {
        cfg.seed = seed;
    }
    if cfg.probes == 0 {
        return Err(Failure::Input("probes must be positive".into()));
    }
    let grid = build_grid(cfg.n_radial, cfg.n_angular)?;
    let label = format!("{}x{}", cfg.n_radial, cfg.n_angular);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let probes: Vec<ComplexField> =
        (0..cfg.probes).map(|_| random_polynomial_field(&grid, PROBE_DEGREE, &mut rng)).collect();

    // NaN must surface as a failure, which f64::max would hide
    let nan_max = |a: f64, b: f64| if a.is_nan() || b.is_nan() { f64::NAN } else { a.max(b) };
    let worst = |f: &dyn Fn(&ComplexField) -> f64| probes.iter().map(f).fold(0.0, nan_max);
    let mut checks = Vec::new();
    let mut push = |identity, max_error: f64, threshold: f64| {
        checks.push(IdentityCheck {
            identity,
            grid: label.clone(),
            max_error,
            threshold,
            pass: max_error <= threshold,
        });
    };
    push("dbar_of_cauchy_green", worst(&|f| (&dbar(&cauchy_green(f)) - f).interior_sup()), 1e-6);
    push("dbar_of_t0", worst(&|f| (&dbar(&t0(f)) - f).interior_sup()), 1e-6);
    push(
        "t0_boundary_real_part",
        worst(&|f| t0(f).boundary_trace().values.iter().map(|v| v.re.abs()).fold(0.0, f64::max)),
        1e-8,
    );
    push("r0_is_dz_of_t0", worst(&|f| (&r0(f) - &dz(&t0(f))).sup()), 1e-6);
    push(
        "r0_l2_isometry",
        worst(&|f| (norm(&r0(f), 2.0).unwrap_or(f64::NAN) / norm(f, 2.0).unwrap_or(f64::NAN) - 1.0).abs()),
        1e-6,
    );
    let holo = (0..5u32)
        .map(|k| {
            let f = ComplexField::from_fn(&grid, |z| z.powu(k));
            (&bergman(&f) + &f).sup()
        })
        .fold(0.0, nan_max);
    push("bergman_on_holomorphic", holo, 1e-10);

    let mut norm_estimates = Vec::new();
    for op in [OperatorId::R, OperatorId::R0] {
        norm_estimates.push(estimate_norm(&grid, op, cfg.norm_p, cfg.norm_trials, cfg.seed)?);
    }
    let all_pass = checks.iter().all(|c| c.pass);
    let failing: Vec<&str> = checks.iter().filter(|c| !c.pass).map(|c| c.identity).collect();
    emit_to(&envelope("verify-ops", &cfg, VerifyResult { checks, norm_estimates, all_pass }), out)?;
    if !all_pass {
        return Err(Failure::Check(format!("identities failing: {failing:?}")));
    }
    Ok(())
}

#[derive(Serialize)]
struct LeviSample {
    z: Complex64,
    w: Complex64,
    direction: &'static str,
    estimate: LeviEstimate,
}

#[derive(Serialize)]
struct AnalyzeResult {
    samples: usize,
    blocks: BlockReport,
    sup_a: f64,
    sup_a_second_column: f64,
    min_det_j_plus_jst: f64,
    coefficients: Option<CoefficientPair>,
    fit: Option<FitReport>,
    fit_error: Option<String>,
    normalization: Option<NormalizationReport>,
    normalization_error: Option<String>,
    levi_euclidean: Vec<LeviSample>,
    unreliable_levi_samples: usize,
    pass: bool,
}

pub fn analyze_structure(config: &Path, out: Option<&Path>) -> Outcome {
    let cfg: AnalyzeInput = read_config(config)?;
    let s = &cfg.structure;
    s.spec.validate()?;
    let field = StructureField::sample(&s.spec, &s.sample)?;
    let blocks = verify_block_structure(&field);
    let a = matrix_a_from_j(&field)?;
    let det = nondegeneracy_check(&field);
    let (coefficients, fit, fit_error) = match coefficients_from_structure(&field, s.sample.gamma, s.fit_degree) {
        Ok((pair, fit)) => (Some(pair), Some(fit), None),
        Err(e) => (None, None, Some(e.to_string())),
    };
    let (normalization, normalization_error) = match normalize_coordinates(&s.spec) {
        Ok(r) => (Some(r), None),
        Err(e) => (None, Some(e.to_string())),
    };
    // Levi form of |z|² + |w|² along both coordinate directions at a spread of samples
    let potential = |p: &Vector4<f64>| p.norm_squared();
    let stride = (field.points.len() / 16).max(1);
    let mut levi = Vec::new();
    for &(z, w) in field.points.iter().step_by(stride) {
        let p = to_real(z, w);
        for (direction, v) in [("z", Vector4::new(1.0, 0.0, 0.0, 0.0)), ("w", Vector4::new(0.0, 0.0, 1.0, 0.0))] {
            let estimate = levi_form_checked(&potential, &s.spec, &p, &v, LEVI_STEP);
            levi.push(LeviSample { z, w, direction, estimate });
        }
    }
    let unreliable = levi.iter().filter(|l| !l.estimate.reliable).count();
    let pass = blocks.pass && coefficients.as_ref().is_some_and(|c| c.a0() < 1.0) && det > 0.0;
    let result = AnalyzeResult {
        samples: field.points.len(),
        sup_a: a.sup(),
        sup_a_second_column: a.second_column_sup(),
        blocks,
        min_det_j_plus_jst: det,
        coefficients,
        fit,
        fit_error,
        normalization,
        normalization_error,
        levi_euclidean: levi,
        unreliable_levi_samples: unreliable,
        pass,
    };
    let summary = if pass {
        None
    } else {
        Some(format!(
            "blocks failing {:?}; fit {}",
            result.blocks.failing,
            result.fit_error.clone().unwrap_or_else(|| "ok".into())
        ))
    };
    emit_to(&envelope("analyze-structure", &cfg, result), out)?;
    match summary {
        Some(m) => Err(Failure::Check(m)),
        None => Ok(()),
    }
}

#[derive(Serialize)]
struct TakagiResult {
    u: [[Complex64; 2]; 2],
    d: [f64; 2],
    unitarity_error: f64,
    off_diagonal: f64,
}

pub fn takagi_cmd(config: &Path, out: Option<&Path>) -> Outcome {
    let cfg: TakagiInput = read_config(config)?;
    let m = cfg.matrix;
    let b = ComplexMatrix::new(m[0][0], m[0][1], m[1][0], m[1][1]);
    let t = takagi(&b)?;
    let unitarity = (t.u.adjoint() * t.u - ComplexMatrix::identity()).iter().map(|e| e.norm()).fold(0.0, f64::max);
    let d = t.u.transpose() * b * t.u;
    let result = TakagiResult {
        u: [[t.u[(0, 0)], t.u[(0, 1)]], [t.u[(1, 0)], t.u[(1, 1)]]],
        d: t.d,
        unitarity_error: unitarity,
        off_diagonal: d[(0, 1)].norm().max(d[(1, 0)].norm()),
    };
    emit_to(&envelope("takagi", &cfg, result), out)
}

#[derive(Serialize)]
struct MorseResult {
    model: MorseModel,
    crossing: Option<CrossingProfile>,
    totally_real: Option<TotallyRealSet>,
}

pub fn morse_cmd(config: &Path, out: Option<&Path>) -> Outcome {
    let cfg: MorseInput = read_config(config)?;
    let model = morse_normal_form(&cfg.quadratic, cfg.k, cfg.epsilon, cfg.delta)?;
    let (crossing, totally_real) =
        if cfg.k == 0 { (None, None) } else { (Some(crossing_profile(cfg.k)?), Some(totally_real_e(cfg.c0, cfg.k)?)) };
    emit_to(&envelope("morse", &cfg, MorseResult { model, crossing, totally_real }), out)
}

fn field<'a>(v: &'a Value, path: &[&str]) -> &'a Value {
    path.iter().fold(v, |acc, k| &acc[*k])
}

fn summarize(name: &str, doc: &Value) -> Result<String, Failure> {
    let command = doc["command"].as_str().ok_or_else(|| Failure::Input(format!("{name}: not a report")))?;
    let r = &doc["result"];
    let mut lines = vec![format!(
        "{name}: {command} (version {}, {})",
        doc["version"].as_str().unwrap_or("?"),
        doc["config_hash"].as_str().unwrap_or("?")
    )];
    match command {
        "solve" => {
            let rep = &r["report"];
            lines.push(format!(
                "  n = {}, p = {}, converged = {}, outer iterations = {}",
                rep["n"], rep["p"], rep["converged"], rep["outer_iters"]
            ));
            lines.push(format!(
                "  residuals: pde z {}, pde w {}, boundary z {}, boundary w {}",
                field(rep, &["residuals", "pde_z"]),
                field(rep, &["residuals", "pde_w"]),
                field(rep, &["residuals", "boundary_z"]),
                field(rep, &["residuals", "boundary_w"])
            ));
            lines.push(format!(
                "  winding {}, min jacobian {}, envelope C {}, sup |w| {}",
                rep["winding_z"], rep["min_jacobian"], rep["envelope_c"], rep["sup_w"]
            ));
            lines.push(format!(
                "  contraction: max ratio {} against a0 {} and norm estimate {}",
                rep["max_inner_ratio"], rep["a0"], rep["r0_norm_estimate"]
            ));
        }
        "verify-ops" => {
            for c in r["checks"].as_array().into_iter().flatten() {
                let verdict = if c["pass"].as_bool() == Some(true) { "PASS" } else { "FAIL" };
                lines.push(format!(
                    "  {verdict} {} on {}: {} (limit {})",
                    c["identity"].as_str().unwrap_or("?"),
                    c["grid"].as_str().unwrap_or("?"),
                    c["max_error"],
                    c["threshold"]
                ));
            }
        }
        "analyze-structure" => {
            lines.push(format!(
                "  pass = {}, blocks failing {}, sup |a| {}, min |det(J + J_st)| {}",
                r["pass"],
                field(r, &["blocks", "failing"]),
                r["sup_a"],
                r["min_det_j_plus_jst"]
            ));
            lines.push(format!("  unreliable Levi samples {}", r["unreliable_levi_samples"]));
        }
        "takagi" => lines.push(format!("  d = {}, unitarity error {}", r["d"], r["unitarity_error"])),
        "morse" => {
            let m = &r["model"];
            lines.push(format!(
                "  index {}, coefficients {}, min Levi {}",
                m["index"],
                m["coeffs"],
                field(m, &["certificate", "min_levi"])
            ));
            if !r["crossing"].is_null() {
                lines.push(format!(
                    "  crossing profile: tau0 {}, tau1 {}, min Levi {}",
                    field(r, &["crossing", "tau0"]),
                    field(r, &["crossing", "tau1"]),
                    field(r, &["crossing", "min_levi"])
                ));
            }
        }
        other => return Err(Failure::Input(format!("{name}: unknown command `{other}`"))),
    }
    Ok(lines.join("\n"))
}

/// Plain-text digest of previously written reports.
pub fn report(files: &[PathBuf], out: Option<&Path>) -> Outcome {
    if files.is_empty() {
        return Err(Failure::Input("no report files given".into()));
    }
    let mut parts = Vec::new();
    for f in files {
        let doc: Value = read_config(f)?;
        parts.push(summarize(&f.display().to_string(), &doc)?);
    }
    let mut text = parts.join("\n\n");
    text.push('\n');
    match out {
        Some(p) => write_atomic(p, text.as_bytes()).map_err(io_err(p)),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
