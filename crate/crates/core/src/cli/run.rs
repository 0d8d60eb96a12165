//! Command pipelines: manifest -> metric -> frame -> spin coefficients ->
//! reports, with deterministic serialization and stable exit semantics
//! (0 all-pass, 1 check or gate failure, 2 input error).

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::classify::{
    classify_structure, constancy_from_values, eta_einstein_test, eth_sigma, kmunu_extract,
    ClassificationReport, ClassifyError, EtaEinsteinReport, KMuNuReport, SampledSpin,
};
use crate::expr::{ComplexField, Params, Program};
use crate::frame::{AcmStructure, Frame};
use crate::geometry::MetricData;
use crate::grid::Grid;
use crate::np::{frame_derivative, spin_coefficients, FrameDir, SpinCoefficients};
use crate::verify::{
    raychaudhuri_orbit_check, sachs4_rearranged, verify_all, IdentityEntry, IdentityReport,
    Outcome, OrbitError, OrbitReport, OrbitSpec,
};

use super::manifest::Manifest;
use super::report::Value;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    /// Bad input: malformed manifest, degenerate metric, missing section.
    #[error("{0}")]
    Input(String),
    /// A definitional gate refused the computation (exit 1).
    #[error("{0}")]
    Gate(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommandKind {
    Spin,
    Classify,
    EtaEinstein,
    Kmunu,
    Verify,
    Orbit,
    Report,
}

#[derive(Debug)]
pub struct RunOutcome {
    pub value: Value,
    pub text: String,
    pub pass: bool,
}

/// Everything derived from a manifest, built once per invocation.
pub struct Pipeline {
    pub manifest: Manifest,
    pub grid: Grid,
    pub m: MetricData,
    pub frame: Frame,
    pub acm: AcmStructure,
    pub sc: SpinCoefficients,
}

impl Pipeline {
    pub fn build(manifest: Manifest) -> Result<Pipeline, RunError> {
        let grid = Grid::uniform(manifest.domain, manifest.grid_n, &manifest.excluded);
        if grid.is_empty() {
            return Err(RunError::Input(
                "grid is empty after applying exclusions".into(),
            ));
        }
        let m = crate::geometry::build_metric(&manifest.metric, &grid.points, &manifest.params)
            .map_err(|e| RunError::Input(e.to_string()))?;
        let frame = crate::frame::build_frame(
            &m,
            &manifest.reeb,
            manifest.orientation,
            &grid.points,
            manifest.domain.center(),
            &manifest.params,
        )
        .map_err(|e| RunError::Input(e.to_string()))?;
        let acm = AcmStructure::from_frame(&frame, &m);
        let sc = spin_coefficients(&m, &frame);
        Ok(Pipeline {
            manifest,
            grid,
            m,
            frame,
            acm,
            sc,
        })
    }

    fn params(&self) -> &Params {
        &self.manifest.params
    }

    fn tol(&self) -> f64 {
        self.manifest.tol
    }
}

fn classify_err(e: ClassifyError) -> RunError {
    match e {
        ClassifyError::Inapplicable(msg) => RunError::Gate(msg),
        other => RunError::Input(other.to_string()),
    }
}

fn header(p: &Pipeline, command: &str) -> (Value, String) {
    let v = Value::map()
        .field("tool_version", TOOL_VERSION)
        .field("command", command)
        .field("manifest", p.manifest.name.as_str())
        .field("manifest_digest", p.manifest.digest.as_str())
        .field("orientation", p.manifest.orientation as i64)
        .field("grid_points", p.grid.len())
        .field("tol", p.tol())
        .build();
    let t = format!(
        "acmnp {} v{} | manifest {} | orientation {:+} | {} grid points | tol {:.1e}\n\
         (claims are per sampled grid; they speak only about the sampled box)\n",
        command,
        TOOL_VERSION,
        p.manifest.name,
        p.manifest.orientation,
        p.grid.len(),
        p.tol()
    );
    (v, t)
}

fn merge(base: Value, extra: &[(&str, Value)]) -> Value {
    let mut map = match base {
        Value::Map(m) => m,
        _ => BTreeMap::new(),
    };
    for (k, v) in extra {
        map.insert(k.to_string(), v.clone());
    }
    Value::Map(map)
}

pub fn run(kind: CommandKind, p: &Pipeline) -> Result<RunOutcome, RunError> {
    match kind {
        CommandKind::Spin => run_spin(p),
        CommandKind::Classify => run_classify(p),
        CommandKind::EtaEinstein => run_eta_einstein(p),
        CommandKind::Kmunu => run_kmunu(p),
        CommandKind::Verify => run_verify(p),
        CommandKind::Orbit => run_orbit(p),
        CommandKind::Report => run_report(p),
    }
}

fn sampled_tables(p: &Pipeline, ee: Option<&EtaEinsteinReport>) -> Result<Value, RunError> {
    let s = SampledSpin::sample(&p.sc, &p.grid, p.params())
        .map_err(|e| RunError::Input(e.to_string()))?;
    let mut rows = Vec::with_capacity(p.grid.len());
    for i in 0..s.points.len() {
        let mut row = Value::map()
            .field("point", Value::point(s.points[i]))
            .field("theta", s.rho[i].re)
            .field("omega", s.rho[i].im)
            .field("sigma_abs", s.sigma[i].norm())
            .field("kappa_abs", s.kappa[i].norm())
            .field("alpha", s.rho[i].im)
            .field("beta_s", s.rho[i].re);
        row = match ee {
            Some(ee) => row
                .field("a", ee.a_values[i])
                .field("b", ee.b_values[i]),
            None => row.field("a", Value::Null).field("b", Value::Null),
        };
        rows.push(row.build());
    }
    Ok(Value::List(rows))
}

fn run_spin(p: &Pipeline) -> Result<RunOutcome, RunError> {
    let (hv, mut text) = header(p, "spin");
    let s = SampledSpin::sample(&p.sc, &p.grid, p.params())
        .map_err(|e| RunError::Input(e.to_string()))?;
    let max = |f: &dyn Fn(usize) -> f64| (0..s.points.len()).map(f).fold(0.0, f64::max);
    let summary = Value::map()
        .field("kappa_max", max(&|i| s.kappa[i].norm()))
        .field("sigma_max", max(&|i| s.sigma[i].norm()))
        .field("theta_max", max(&|i| s.rho[i].re.abs()))
        .field("omega_max", max(&|i| s.rho[i].im.abs()))
        .field("epsilon_max", max(&|i| s.epsilon[i].norm()))
        .field("beta_max", max(&|i| s.beta[i].norm()))
        .build();
    let mut rows = Vec::with_capacity(s.points.len());
    for i in 0..s.points.len() {
        rows.push(
            Value::map()
                .field("point", Value::point(s.points[i]))
                .field("kappa", Value::complex(s.kappa[i]))
                .field("rho", Value::complex(s.rho[i]))
                .field("sigma", Value::complex(s.sigma[i]))
                .field("epsilon", Value::complex(s.epsilon[i]))
                .field("beta", Value::complex(s.beta[i]))
                .build(),
        );
    }
    text.push_str("spin coefficient magnitudes over the grid:\n");
    text.push_str(&format!(
        "  max |kappa| {:.3e}  max |sigma| {:.3e}  max |Theta| {:.3e}  max |omega| {:.3e}\n  max |epsilon| {:.3e}  max |beta| {:.3e}\n",
        max(&|i| s.kappa[i].norm()),
        max(&|i| s.sigma[i].norm()),
        max(&|i| s.rho[i].re.abs()),
        max(&|i| s.rho[i].im.abs()),
        max(&|i| s.epsilon[i].norm()),
        max(&|i| s.beta[i].norm()),
    ));
    let value = merge(
        hv,
        &[
            ("summary", summary),
            ("table", Value::List(rows)),
        ],
    );
    Ok(RunOutcome {
        value,
        text,
        pass: true,
    })
}

fn classification_value(r: &ClassificationReport) -> Value {
    let mut flags = BTreeMap::new();
    for f in &r.flags {
        flags.insert(f.name.to_string(), Value::from(f));
    }
    let rank = match r.rank.uniform {
        Some(rk) => Value::Int(rk.as_u8() as i64),
        None => Value::Str("non-uniform".into()),
    };
    let mut per_point = Vec::new();
    for (pt, rk) in &r.rank.per_point {
        per_point.push(
            Value::map()
                .field("point", Value::point(*pt))
                .field("rank", rk.as_u8() as i64)
                .build(),
        );
    }
    Value::map()
        .field("flags", Value::Map(flags))
        .field("rank", rank)
        .field("rank_per_point", Value::List(per_point))
        .field("orientation", r.orientation as i64)
        .field("tol_effective", r.tol_effective)
        .field("alpha", &r.alpha)
        .field("beta_s", &r.beta_s)
        .build()
}

fn classification_text(r: &ClassificationReport) -> String {
    let mut t = String::from("classification (max violation over grid):\n");
    for f in &r.flags {
        t.push_str(&format!(
            "  [{}] {:<15} {:.3e}\n",
            if f.holds { "x" } else { " " },
            f.name,
            f.max_violation
        ));
    }
    match r.rank.uniform {
        Some(rk) => t.push_str(&format!("rank: {} (uniform)\n", rk.as_u8())),
        None => t.push_str("rank: non-uniform across the grid\n"),
    }
    t.push_str(&format!(
        "trans-Sasakian type: alpha = omega (mean {:.6}, {}), beta_s = Theta (mean {:.6}, {})\n",
        r.alpha.mean.re,
        if r.alpha.constant { "constant" } else { "non-constant" },
        r.beta_s.mean.re,
        if r.beta_s.constant { "constant" } else { "non-constant" },
    ));
    t
}

fn run_classify(p: &Pipeline) -> Result<RunOutcome, RunError> {
    let (hv, mut text) = header(p, "classify");
    let r = classify_structure(&p.sc, &p.acm, &p.grid, p.tol(), p.params())
        .map_err(classify_err)?;
    text.push_str(&classification_text(&r));
    Ok(RunOutcome {
        value: merge(hv, &[("classification", classification_value(&r))]),
        text,
        pass: true,
    })
}

fn eta_einstein_value(r: &EtaEinsteinReport) -> Value {
    Value::map()
        .field("passes", r.passes)
        .field("residual1_max", r.residual1_max)
        .field("residual2_max", r.residual2_max)
        .field("cross_check_max", r.cross_check_max)
        .field("a", &r.a)
        .field("b", &r.b)
        .field("tol_effective", r.tol_effective)
        .build()
}

fn eta_einstein_text(r: &EtaEinsteinReport) -> String {
    format!(
        "eta-Einstein: {} (P(sigma)+2*Theta*sigma max {:.3e}, del(rho)+ethbar(sigma) max {:.3e})\n  a mean {:.6} ({}), b mean {:.6} ({}), curvature cross-check {:.3e}\n",
        if r.passes { "PASS" } else { "FAIL" },
        r.residual1_max,
        r.residual2_max,
        r.a.mean.re,
        if r.a.constant { "constant" } else { "non-constant" },
        r.b.mean.re,
        if r.b.constant { "constant" } else { "non-constant" },
        r.cross_check_max,
    )
}

fn run_eta_einstein(p: &Pipeline) -> Result<RunOutcome, RunError> {
    let (hv, mut text) = header(p, "eta-einstein");
    let r = eta_einstein_test(&p.sc, &p.m, &p.frame, &p.grid, p.tol(), p.params())
        .map_err(classify_err)?;
    text.push_str(&eta_einstein_text(&r));
    let pass = r.passes;
    Ok(RunOutcome {
        value: merge(hv, &[("eta_einstein", eta_einstein_value(&r))]),
        text,
        pass,
    })
}

fn kmunu_value(r: &KMuNuReport) -> Value {
    let opt_stats = |s: &Option<crate::classify::ConstancyStats>| match s {
        Some(st) => Value::from(st),
        None => Value::Null,
    };
    Value::map()
        .field("is_kmunu", r.is_kmunu)
        .field("is_k00", r.is_k00)
        .field("contact_kappa_max", r.contact_kappa_max)
        .field("contact_omega_dev", r.contact_omega_dev)
        .field("theta_residual_max", r.theta_residual_max)
        .field("ethbar_sigma_max", r.ethbar_sigma_max)
        .field("k", &r.k)
        .field("mu", opt_stats(&r.mu))
        .field("nu", opt_stats(&r.nu))
        .field("indeterminate_points", r.indeterminate_points)
        .field("consistency_max", r.consistency_max)
        .field("ric_cross_max", r.ric_cross_max)
        .field("tol_effective", r.tol_effective)
        .build()
}

fn kmunu_text(r: &KMuNuReport) -> String {
    let mut t = format!(
        "(k,mu,nu): {}",
        if r.is_k00 {
            "(k,0,0)-structure"
        } else if r.is_kmunu {
            "(k,mu,nu)-structure"
        } else {
            "NOT a (k,mu,nu)-structure"
        }
    );
    t.push_str(&format!(
        " | k mean {:.6} ({})",
        r.k.mean.re,
        if r.k.constant { "constant" } else { "non-constant" }
    ));
    if let (Some(mu), Some(nu)) = (&r.mu, &r.nu) {
        t.push_str(&format!(
            " | mu mean {:.6} ({}), nu mean {:.6} ({})",
            mu.mean.re,
            if mu.constant { "constant" } else { "non-constant" },
            nu.mean.re,
            if nu.constant { "constant" } else { "non-constant" }
        ));
    } else {
        t.push_str(" | mu, nu indeterminate (sigma = 0 on the grid)");
    }
    t.push_str(&format!(
        "\n  residuals: Theta {:.3e}, ethbar(sigma) {:.3e}, P(sigma) fit {:.3e}, Ricci cross {:.3e}; {} indeterminate points\n",
        r.theta_residual_max, r.ethbar_sigma_max, r.consistency_max, r.ric_cross_max,
        r.indeterminate_points
    ));
    t
}

fn run_kmunu(p: &Pipeline) -> Result<RunOutcome, RunError> {
    let (hv, mut text) = header(p, "kmunu");
    let r = kmunu_extract(&p.sc, &p.m, &p.frame, &p.grid, p.tol(), p.params())
        .map_err(classify_err)?;
    text.push_str(&kmunu_text(&r));
    let pass = r.is_kmunu;
    Ok(RunOutcome {
        value: merge(hv, &[("kmunu", kmunu_value(&r))]),
        text,
        pass,
    })
}

/// Appends the Raychaudhuri identities to an identity report: checked along
/// the manifest orbit when one is declared, skipped with a reason otherwise.
fn append_orbit_entries(
    report: &mut IdentityReport,
    p: &Pipeline,
) -> Result<Option<OrbitReport>, RunError> {
    let Some(orbit) = &p.manifest.orbit else {
        for id in ["raychaudhuri_theta", "raychaudhuri_omega"] {
            report.entries.push(IdentityEntry {
                id: id.to_string(),
                outcome: Outcome::Skipped {
                    reason: "no_orbit_section".into(),
                },
            });
        }
        return Ok(None);
    };
    let spec = match orbit.steps {
        Some(steps) => OrbitSpec {
            x0: orbit.x0,
            t_end: orbit.t_end,
            steps,
        },
        None => OrbitSpec::with_default_steps(orbit.x0, orbit.t_end),
    };
    match raychaudhuri_orbit_check(
        &p.m,
        &p.frame,
        &p.sc,
        &spec,
        &p.manifest.domain,
        p.tol(),
        p.params(),
    ) {
        Ok(r) => {
            let x0 = spec.x0;
            report.entries.push(IdentityEntry {
                id: "raychaudhuri_theta".into(),
                outcome: Outcome::Checked {
                    max_residual: r.theta_residual_max,
                    worst_point: x0,
                    pass: r.theta_residual_max <= report.tol,
                },
            });
            report.entries.push(IdentityEntry {
                id: "raychaudhuri_omega".into(),
                outcome: Outcome::Checked {
                    max_residual: r.omega_residual_max,
                    worst_point: x0,
                    pass: r.omega_residual_max <= report.tol,
                },
            });
            Ok(Some(r))
        }
        Err(OrbitError::NotGeodesic(_, kappa)) => {
            for id in ["raychaudhuri_theta", "raychaudhuri_omega"] {
                report.entries.push(IdentityEntry {
                    id: id.to_string(),
                    outcome: Outcome::Skipped {
                        reason: format!("requires_kappa_zero (max |kappa| = {kappa:.3e})"),
                    },
                });
            }
            Ok(None)
        }
        Err(OrbitError::StartOutsideDomain(p0)) => Err(RunError::Input(format!(
            "orbit start {p0:?} outside the domain box"
        ))),
        Err(OrbitError::Eval(e)) => Err(RunError::Input(e.to_string())),
    }
}

fn identities_text(r: &IdentityReport) -> String {
    let mut t = String::from("identity residuals:\n");
    let mut entries: Vec<&IdentityEntry> = r.entries.iter().collect();
    entries.sort_by(|a, b| a.id.cmp(&b.id));
    for e in entries {
        match &e.outcome {
            Outcome::Checked {
                max_residual,
                pass,
                ..
            } => t.push_str(&format!(
                "  [{}] {:<22} {:.3e}\n",
                if *pass { "x" } else { "!" },
                e.id,
                max_residual
            )),
            Outcome::Skipped { reason } => {
                t.push_str(&format!("  [-] {:<22} skipped: {}\n", e.id, reason))
            }
        }
    }
    t
}

fn orbit_value(r: &OrbitReport) -> Value {
    Value::map()
        .field("pass", r.pass)
        .field("steps_taken", r.steps_taken)
        .field("truncated", r.truncated)
        .field("kappa_max", r.kappa_max)
        .field("theta_residual_max", r.theta_residual_max)
        .field("omega_residual_max", r.omega_residual_max)
        .field("cointegration_max", r.cointegration_max)
        .build()
}

fn run_verify(p: &Pipeline) -> Result<RunOutcome, RunError> {
    let (hv, mut text) = header(p, "verify");
    let mut report = verify_all(&p.m, &p.frame, &p.sc, &p.grid, p.tol(), p.params())
        .map_err(|e| RunError::Input(e.to_string()))?;
    let orbit = append_orbit_entries(&mut report, p)?;
    text.push_str(&identities_text(&report));
    let pass = report.all_pass();
    text.push_str(&format!("overall: {}\n", if pass { "PASS" } else { "FAIL" }));
    let mut extra = vec![("identities_report", Value::from(&report))];
    if let Some(o) = &orbit {
        extra.push(("orbit", orbit_value(o)));
    }
    Ok(RunOutcome {
        value: merge(hv, &extra),
        text,
        pass,
    })
}

fn run_orbit(p: &Pipeline) -> Result<RunOutcome, RunError> {
    let (hv, mut text) = header(p, "orbit");
    let Some(orbit) = &p.manifest.orbit else {
        return Err(RunError::Input(
            "the orbit command needs an [orbit] section in the manifest".into(),
        ));
    };
    let spec = match orbit.steps {
        Some(steps) => OrbitSpec {
            x0: orbit.x0,
            t_end: orbit.t_end,
            steps,
        },
        None => OrbitSpec::with_default_steps(orbit.x0, orbit.t_end),
    };
    let r = raychaudhuri_orbit_check(
        &p.m,
        &p.frame,
        &p.sc,
        &spec,
        &p.manifest.domain,
        p.tol(),
        p.params(),
    )
    .map_err(|e| match e {
        OrbitError::NotGeodesic(_, _) => RunError::Gate(e.to_string()),
        other => RunError::Input(other.to_string()),
    })?;
    text.push_str(&format!(
        "raychaudhuri along the Reeb orbit from {:?} (t to {}, {} steps{}):\n  -xi(Theta) = Theta^2 - omega^2 + |sigma|^2 + Ric(xi,xi)/2: residual {:.3e}\n  -xi(omega) = 2 Theta omega: residual {:.3e}\n  field vs co-integrated ODE: {:.3e}\n",
        spec.x0,
        spec.t_end,
        r.steps_taken,
        if r.truncated { "; truncated at domain exit" } else { "" },
        r.theta_residual_max,
        r.omega_residual_max,
        r.cointegration_max,
    ));
    let pass = r.pass;
    text.push_str(&format!("overall: {}\n", if pass { "PASS" } else { "FAIL" }));
    Ok(RunOutcome {
        value: merge(hv, &[("orbit", orbit_value(&r))]),
        text,
        pass,
    })
}

/// Blair-recovery consistency on inputs that are both contact metric and
/// eta-Einstein: the structure must report (k,0,0) with |sigma| constant,
/// eth(sigma) = 0, and the rearranged fourth Sachs equation satisfied.
struct BlairConsistency {
    k00: bool,
    sigma_abs_constant: bool,
    eth_sigma_max: f64,
    sachs4_rearranged_max: f64,
    ok: bool,
}

fn blair_consistency(
    p: &Pipeline,
    km: &KMuNuReport,
    tol_eff: f64,
) -> Result<BlairConsistency, RunError> {
    let es = eth_sigma(&p.sc, &p.frame);
    let s4 = sachs4_rearranged(&p.sc, &p.frame);
    let sigma_sq = ComplexField::from_real(p.sc.sigma.modulus_sq());
    let prog = Program::compile(&[
        es.re.clone(),
        es.im.clone(),
        s4.re.clone(),
        s4.im.clone(),
        sigma_sq.re.clone(),
    ]);
    let mut eth_max = 0.0f64;
    let mut s4_max = 0.0f64;
    let mut sigma_vals = Vec::with_capacity(p.grid.len());
    for &pt in &p.grid.points {
        let v = prog.eval(pt, p.params()).map_err(|e| RunError::Input(e.to_string()))?;
        eth_max = eth_max.max(Complex64::new(v[0], v[1]).norm());
        s4_max = s4_max.max(Complex64::new(v[2], v[3]).norm());
        sigma_vals.push(Complex64::from(v[4].sqrt()));
    }
    let stats = constancy_from_values(&sigma_vals, p.tol());
    let ok = km.is_k00 && stats.constant && eth_max <= tol_eff && s4_max <= tol_eff;
    Ok(BlairConsistency {
        k00: km.is_k00,
        sigma_abs_constant: stats.constant,
        eth_sigma_max: eth_max,
        sachs4_rearranged_max: s4_max,
        ok,
    })
}

/// Compact-classification dichotomy probe for normal structures: either
/// alpha-Sasakian with constant twist, or beta-Kenmotsu with Theta varying
/// only along the Reeb flow. A normal structure satisfying neither is
/// flagged as escaping the dichotomy, with the reminder that the sampled
/// chart is not compact, so there is no conflict with the compact theorem.
struct DichotomyProbe {
    alpha_branch: bool,
    beta_branch: bool,
    escapes: bool,
    del_theta_max: f64,
}

fn dichotomy_probe(
    p: &Pipeline,
    cls: &ClassificationReport,
) -> Result<DichotomyProbe, RunError> {
    let del_theta = frame_derivative(
        &ComplexField::from_real(p.sc.theta()),
        FrameDir::Del,
        &p.frame,
    );
    let prog = Program::compile(&[del_theta.re.clone(), del_theta.im.clone()]);
    let mut del_theta_max = 0.0f64;
    for &pt in &p.grid.points {
        let v = prog.eval(pt, p.params()).map_err(|e| RunError::Input(e.to_string()))?;
        del_theta_max = del_theta_max.max(Complex64::new(v[0], v[1]).norm());
    }
    let alpha_branch = cls.holds("alpha_sasakian") && cls.alpha.constant;
    let beta_branch = cls.holds("beta_kenmotsu") && del_theta_max <= cls.tol_effective;
    Ok(DichotomyProbe {
        alpha_branch,
        beta_branch,
        escapes: !(alpha_branch || beta_branch),
        del_theta_max,
    })
}

fn run_report(p: &Pipeline) -> Result<RunOutcome, RunError> {
    let (hv, mut text) = header(p, "report");
    let cls = classify_structure(&p.sc, &p.acm, &p.grid, p.tol(), p.params())
        .map_err(classify_err)?;
    text.push_str(&classification_text(&cls));

    // eta-Einstein: applicable only to geodesic structures.
    let mut ee_skip = String::new();
    let ee = match eta_einstein_test(&p.sc, &p.m, &p.frame, &p.grid, p.tol(), p.params()) {
        Ok(r) => {
            text.push_str(&eta_einstein_text(&r));
            Some(r)
        }
        Err(ClassifyError::Inapplicable(msg)) => {
            text.push_str(&format!("eta-Einstein: skipped — {msg}\n"));
            ee_skip = msg;
            None
        }
        Err(other) => return Err(classify_err(other)),
    };

    // (k,mu,nu): applicable only to contact metric structures.
    let mut km_skip = String::new();
    let km = match kmunu_extract(&p.sc, &p.m, &p.frame, &p.grid, p.tol(), p.params()) {
        Ok(r) => {
            text.push_str(&kmunu_text(&r));
            Some(r)
        }
        Err(ClassifyError::Inapplicable(msg)) => {
            text.push_str(&format!("(k,mu,nu): skipped — {msg}\n"));
            km_skip = msg;
            None
        }
        Err(other) => return Err(classify_err(other)),
    };

    let mut identities = verify_all(&p.m, &p.frame, &p.sc, &p.grid, p.tol(), p.params())
        .map_err(|e| RunError::Input(e.to_string()))?;
    let orbit = append_orbit_entries(&mut identities, p)?;
    text.push_str(&identities_text(&identities));

    // Blair recovery: contact metric + eta-Einstein forces (k,0,0) with
    // constant |sigma|.
    let mut pass = identities.all_pass();
    let blair = match (&ee, &km) {
        (Some(ee), Some(km)) if ee.passes && cls.holds("contact_metric") => {
            let b = blair_consistency(p, km, km.tol_effective)?;
            text.push_str(&format!(
                "blair recovery: contact + eta-Einstein => (k,0,0) {}; |sigma| constant {}; eth(sigma) {:.3e}; rearranged sachs4 {:.3e}\n",
                b.k00, b.sigma_abs_constant, b.eth_sigma_max, b.sachs4_rearranged_max
            ));
            pass = pass && b.ok;
            Some(b)
        }
        _ => None,
    };

    // Compact dichotomy probe for normal structures.
    let dichotomy = if cls.holds("normal") {
        let d = dichotomy_probe(p, &cls)?;
        if d.escapes {
            text.push_str(
                "compact dichotomy: ESCAPES — neither alpha-Sasakian with constant twist nor \
                 beta-Kenmotsu with del(Theta) = 0; the sampled chart is not compact, so this \
                 does not contradict the compact classification\n",
            );
        } else if d.alpha_branch {
            text.push_str("compact dichotomy: alpha-Sasakian with constant twist\n");
        } else {
            text.push_str("compact dichotomy: beta-Kenmotsu with Theta varying only along the Reeb flow\n");
        }
        Some(d)
    } else {
        None
    };

    if let Some(o) = &orbit {
        text.push_str(&format!(
            "orbit: {} steps{}; raychaudhuri residuals {:.3e} / {:.3e}; co-integration {:.3e}\n",
            o.steps_taken,
            if o.truncated { " (truncated)" } else { "" },
            o.theta_residual_max,
            o.omega_residual_max,
            o.cointegration_max
        ));
    }

    let tables = sampled_tables(p, ee.as_ref())?;
    text.push_str(&format!("overall: {}\n", if pass { "PASS" } else { "FAIL" }));

    let mut extra = vec![
        ("classification", classification_value(&cls)),
        ("identities_report", Value::from(&identities)),
        ("fields", tables),
    ];
    extra.push((
        "eta_einstein",
        match &ee {
            Some(r) => eta_einstein_value(r),
            None => Value::map()
                .field("status", "skipped")
                .field("reason", ee_skip.as_str())
                .build(),
        },
    ));
    extra.push((
        "kmunu",
        match &km {
            Some(r) => kmunu_value(r),
            None => Value::map()
                .field("status", "skipped")
                .field("reason", km_skip.as_str())
                .build(),
        },
    ));
    if let Some(b) = &blair {
        extra.push((
            "blair_recovery",
            Value::map()
                .field("asserted_k00", b.k00)
                .field("sigma_abs_constant", b.sigma_abs_constant)
                .field("eth_sigma_max", b.eth_sigma_max)
                .field("sachs4_rearranged_max", b.sachs4_rearranged_max)
                .field("ok", b.ok)
                .build(),
        ));
    }
    if let Some(d) = &dichotomy {
        extra.push((
            "compact_dichotomy",
            Value::map()
                .field("alpha_sasakian_constant_twist", d.alpha_branch)
                .field("beta_kenmotsu_vertical_theta", d.beta_branch)
                .field("escapes", d.escapes)
                .field("del_theta_max", d.del_theta_max)
                .field(
                    "note",
                    if d.escapes {
                        "sampled chart is not compact; no conflict with the compact classification"
                    } else {
                        ""
                    },
                )
                .build(),
        ));
    }
    if let Some(o) = &orbit {
        extra.push(("orbit", orbit_value(o)));
    }

    Ok(RunOutcome {
        value: merge(hv, &extra),
        text,
        pass,
    })
}

/// `verify --seed N`: the identity suite on a seeded random structure,
/// without any manifest.
pub fn run_random_verify(
    seed: u64,
    amplitude: f64,
    grid_n: usize,
    tol: f64,
) -> Result<RunOutcome, RunError> {
    let grid = Grid::uniform(super::random::default_domain(), grid_n, &[]);
    let (m, frame) = super::random::random_structure(seed, amplitude, &grid)
        .map_err(|e| RunError::Input(e.to_string()))?;
    let sc = spin_coefficients(&m, &frame);
    let params = Params::new();
    let report = verify_all(&m, &frame, &sc, &grid, tol, &params)
        .map_err(|e| RunError::Input(e.to_string()))?;
    let pass = report.all_pass();
    let mut text = format!(
        "acmnp verify v{TOOL_VERSION} | random structure seed {seed} amplitude {amplitude} | {} grid points | tol {tol:.1e}\n",
        grid.len()
    );
    text.push_str(&identities_text(&report));
    text.push_str(&format!("overall: {}\n", if pass { "PASS" } else { "FAIL" }));
    let value = Value::map()
        .field("tool_version", TOOL_VERSION)
        .field("command", "verify")
        .field("seed", seed as i64)
        .field("amplitude", amplitude)
        .field("grid_points", grid.len())
        .field("tol", tol)
        .field("identities_report", Value::from(&report))
        .build();
    Ok(RunOutcome { value, text, pass })
}
