//! Structure classification, trans-Sasakian type extraction, the
//! eta-Einstein test, and (k, mu, nu) extraction.
//!
//! Every flag is scored as a max-over-grid violation against a tolerance
//! scaled by the largest spin-coefficient magnitude seen on the grid.
//! Compound flags take the max of their constituents' violations, so the
//! implication lattice (sasakian => alpha-sasakian => normal, and so on)
//! holds in every report by construction. Classification is per-grid: a
//! report speaks only about the sampled box.

use num_complex::Complex64;

use crate::expr::{ComplexField, EvalError, Expr, Params, Point, Program};
use crate::frame::{rank_report, AcmStructure, Frame, RankReport};
use crate::geometry::MetricData;
use crate::grid::Grid;
use crate::np::{
    eth, eth_bar, frame_derivative, ricci_frame_components, thorn, FrameDir, SpinCoefficients,
    SpinWeightedField,
};

#[derive(Debug, thiserror::Error)]
pub enum ClassifyError {
    #[error("grid has {0} points; need at least 8")]
    GridTooSmall(usize),
    #[error("criterion inapplicable: {0}")]
    Inapplicable(String),
    #[error("evaluation failed: {0}")]
    Eval(#[from] EvalError),
}

/// One classification flag with its worst violation and where it occurred.
#[derive(Debug, Clone)]
pub struct FlagRecord {
    pub name: &'static str,
    pub holds: bool,
    pub max_violation: f64,
    pub witness: Point,
}

/// Mean / max-deviation constancy statistics of a sampled complex field.
#[derive(Debug, Clone)]
pub struct ConstancyStats {
    pub constant: bool,
    pub mean: Complex64,
    pub max_deviation: f64,
    pub samples: usize,
}

/// Checks whether a field is constant over the grid:
/// max |v - mean| <= tol (1 + |mean|).
pub fn constancy_check(
    field: &ComplexField,
    grid: &Grid,
    tol: f64,
    params: &Params,
) -> Result<ConstancyStats, ClassifyError> {
    if grid.is_empty() {
        return Err(ClassifyError::GridTooSmall(0));
    }
    let prog = Program::compile(&[field.re.clone(), field.im.clone()]);
    let mut vals = Vec::with_capacity(grid.len());
    for &p in &grid.points {
        let out = prog.eval(p, params)?;
        vals.push(Complex64::new(out[0], out[1]));
    }
    Ok(constancy_from_values(&vals, tol))
}

pub fn constancy_from_values(vals: &[Complex64], tol: f64) -> ConstancyStats {
    let n = vals.len() as f64;
    let mean = vals.iter().sum::<Complex64>() / n;
    let max_deviation = vals.iter().map(|v| (v - mean).norm()).fold(0.0, f64::max);
    ConstancyStats {
        constant: max_deviation <= tol * (1.0 + mean.norm()),
        mean,
        max_deviation,
        samples: vals.len(),
    }
}

/// Spin coefficients evaluated over a grid; the shared input to the
/// classification and extraction reports.
pub struct SampledSpin {
    pub points: Vec<Point>,
    pub kappa: Vec<Complex64>,
    pub rho: Vec<Complex64>,
    pub sigma: Vec<Complex64>,
    pub epsilon: Vec<Complex64>,
    pub beta: Vec<Complex64>,
}

impl SampledSpin {
    pub fn sample(
        sc: &SpinCoefficients,
        grid: &Grid,
        params: &Params,
    ) -> Result<SampledSpin, EvalError> {
        let fields = [&sc.kappa, &sc.rho, &sc.sigma, &sc.epsilon, &sc.beta];
        let exprs: Vec<Expr> = fields
            .iter()
            .flat_map(|q| [q.re.clone(), q.im.clone()])
            .collect();
        let prog = Program::compile(&exprs);
        let mut out = SampledSpin {
            points: grid.points.clone(),
            kappa: Vec::with_capacity(grid.len()),
            rho: Vec::with_capacity(grid.len()),
            sigma: Vec::with_capacity(grid.len()),
            epsilon: Vec::with_capacity(grid.len()),
            beta: Vec::with_capacity(grid.len()),
        };
        let mut vals = vec![0.0; exprs.len()];
        for &p in &grid.points {
            prog.eval_into(p, params, &mut vals)?;
            out.kappa.push(Complex64::new(vals[0], vals[1]));
            out.rho.push(Complex64::new(vals[2], vals[3]));
            out.sigma.push(Complex64::new(vals[4], vals[5]));
            out.epsilon.push(Complex64::new(vals[6], vals[7]));
            out.beta.push(Complex64::new(vals[8], vals[9]));
        }
        Ok(out)
    }

    /// Largest spin-coefficient magnitude on the grid; scales tolerances.
    pub fn max_magnitude(&self) -> f64 {
        let mut m = 0.0f64;
        for i in 0..self.points.len() {
            m = m
                .max(self.kappa[i].norm())
                .max(self.rho[i].norm())
                .max(self.sigma[i].norm())
                .max(self.epsilon[i].norm())
                .max(self.beta[i].norm());
        }
        m
    }
}

#[derive(Debug, Clone)]
pub struct ClassificationReport {
    pub flags: Vec<FlagRecord>,
    pub rank: RankReport,
    pub orientation: i8,
    /// Base tolerance scaled by (1 + max |spin coefficient|).
    pub tol_effective: f64,
    /// Trans-Sasakian type fields alpha = omega, beta_s = Theta.
    pub alpha: ConstancyStats,
    pub beta_s: ConstancyStats,
}

impl ClassificationReport {
    pub fn flag(&self, name: &str) -> &FlagRecord {
        self.flags
            .iter()
            .find(|f| f.name == name)
            .unwrap_or_else(|| panic!("unknown flag {name}"))
    }

    pub fn holds(&self, name: &str) -> bool {
        self.flag(name).holds
    }
}

/// Classifies the structure over the grid. Flags, in report order:
/// geodesic, shear_free, killing, normal (= trans_sasakian), contact_metric,
/// alpha_sasakian, sasakian, beta_kenmotsu, kenmotsu, cosymplectic.
pub fn classify_structure(
    sc: &SpinCoefficients,
    acm: &AcmStructure,
    grid: &Grid,
    tol: f64,
    params: &Params,
) -> Result<ClassificationReport, ClassifyError> {
    if grid.len() < 8 {
        return Err(ClassifyError::GridTooSmall(grid.len()));
    }
    let s = SampledSpin::sample(sc, grid, params)?;
    let tol_eff = tol * (1.0 + s.max_magnitude());

    let n = s.points.len();
    let mut records: Vec<(&'static str, Vec<f64>)> = Vec::new();
    let per_point = |f: &dyn Fn(usize) -> f64| -> Vec<f64> { (0..n).map(f).collect() };

    let geodesic = per_point(&|i| s.kappa[i].norm());
    let shear_free = per_point(&|i| s.sigma[i].norm());
    let killing = per_point(&|i| s.kappa[i].norm().max(s.sigma[i].norm()).max(s.rho[i].re.abs()));
    let normal = per_point(&|i| s.kappa[i].norm().max(s.sigma[i].norm()));
    let contact = per_point(&|i| s.kappa[i].norm().max((s.rho[i].im - 1.0).abs()));
    let alpha_sasakian = per_point(&|i| normal[i].max(s.rho[i].re.abs()));
    let sasakian = per_point(&|i| alpha_sasakian[i].max((s.rho[i].im - 1.0).abs()));
    let beta_kenmotsu = per_point(&|i| normal[i].max(s.rho[i].im.abs()));
    let kenmotsu = per_point(&|i| beta_kenmotsu[i].max((s.rho[i].re - 1.0).abs()));
    let cosymplectic = per_point(&|i| normal[i].max(s.rho[i].norm()));

    records.push(("geodesic", geodesic));
    records.push(("shear_free", shear_free));
    records.push(("killing", killing));
    records.push(("normal", normal));
    records.push(("contact_metric", contact));
    records.push(("alpha_sasakian", alpha_sasakian));
    records.push(("sasakian", sasakian));
    records.push(("beta_kenmotsu", beta_kenmotsu));
    records.push(("kenmotsu", kenmotsu));
    records.push(("cosymplectic", cosymplectic));

    let flags = records
        .into_iter()
        .map(|(name, v)| {
            let (idx, worst) = v
                .iter()
                .enumerate()
                .fold((0usize, 0.0f64), |(bi, bv), (i, &x)| {
                    if x > bv {
                        (i, x)
                    } else {
                        (bi, bv)
                    }
                });
            FlagRecord {
                name,
                holds: worst <= tol_eff,
                max_violation: worst,
                witness: s.points[idx],
            }
        })
        .collect();

    let rank = rank_report(acm, grid, tol_eff, params)?;
    let alpha_vals: Vec<Complex64> = s.rho.iter().map(|r| Complex64::from(r.im)).collect();
    let beta_s_vals: Vec<Complex64> = s.rho.iter().map(|r| Complex64::from(r.re)).collect();

    Ok(ClassificationReport {
        flags,
        rank,
        orientation: acm.frame.orientation,
        tol_effective: tol_eff,
        alpha: constancy_from_values(&alpha_vals, tol),
        beta_s: constancy_from_values(&beta_s_vals, tol),
    })
}

/// The eta-Einstein report for kappa = 0 structures.
///
/// The two spin-coefficient residuals are `P(sigma) + 2 Theta sigma`
/// (equal to `Ric(del,del)` by the Sachs system) and
/// `del(rho) + eth_bar(sigma)` (equal to `-Ric(xi,del)`). The fields
/// `a = Ric(del,delbar)` and `b = Ric(xi,xi) - a` come from the curvature
/// route, and the cross check confronts the two routes.
#[derive(Debug, Clone)]
pub struct EtaEinsteinReport {
    pub residual1_max: f64,
    pub residual2_max: f64,
    pub passes: bool,
    pub a: ConstancyStats,
    pub b: ConstancyStats,
    pub a_values: Vec<f64>,
    pub b_values: Vec<f64>,
    /// Curvature-route check that Ric = a g + b eta (x) eta on frame pairs.
    pub cross_check_max: f64,
    pub tol_effective: f64,
}

pub fn eta_einstein_test(
    sc: &SpinCoefficients,
    m: &MetricData,
    f: &Frame,
    grid: &Grid,
    tol: f64,
    params: &Params,
) -> Result<EtaEinsteinReport, ClassifyError> {
    if grid.len() < 8 {
        return Err(ClassifyError::GridTooSmall(grid.len()));
    }
    let s = SampledSpin::sample(sc, grid, params)?;
    let tol_eff = tol * (1.0 + s.max_magnitude());
    let max_kappa = s.kappa.iter().map(|k| k.norm()).fold(0.0, f64::max);
    if max_kappa > tol_eff {
        return Err(ClassifyError::Inapplicable(format!(
            "kappa != 0 (max |kappa| = {max_kappa:.3e} exceeds {tol_eff:.3e})"
        )));
    }

    // Spin-coefficient route.
    let p_sigma = thorn(&SpinWeightedField::new(sc.sigma.clone(), 2), sc, f).value;
    let residual1 = p_sigma.add(&sc.sigma.scale(&sc.theta()).scale_f64(2.0));
    let del_rho = frame_derivative(&sc.rho, FrameDir::Del, f);
    let ethbar_sigma = eth_bar(&SpinWeightedField::new(sc.sigma.clone(), 2), sc, f).value;
    let residual2 = del_rho.add(&ethbar_sigma);

    // Curvature route.
    let ric = ricci_frame_components(m, f);
    let a_field = ric.del_delbar.clone();
    let b_field = ric.xi_xi.sub(&ric.del_delbar);

    let exprs = [
        residual1.re.clone(),
        residual1.im.clone(),
        residual2.re.clone(),
        residual2.im.clone(),
        a_field.re.clone(),
        b_field.re.clone(),
        ric.xi_del.re.clone(),
        ric.xi_del.im.clone(),
        ric.del_del.re.clone(),
        ric.del_del.im.clone(),
    ];
    let prog = Program::compile(&exprs);
    let mut r1 = 0.0f64;
    let mut r2 = 0.0f64;
    let mut cross = 0.0f64;
    let mut a_values = Vec::with_capacity(grid.len());
    let mut b_values = Vec::with_capacity(grid.len());
    let mut vals = vec![0.0; exprs.len()];
    for &p in &grid.points {
        prog.eval_into(p, params, &mut vals)?;
        r1 = r1.max(Complex64::new(vals[0], vals[1]).norm());
        r2 = r2.max(Complex64::new(vals[2], vals[3]).norm());
        a_values.push(vals[4]);
        b_values.push(vals[5]);
        cross = cross
            .max(Complex64::new(vals[6], vals[7]).norm())
            .max(Complex64::new(vals[8], vals[9]).norm());
    }
    let a_c: Vec<Complex64> = a_values.iter().map(|&v| Complex64::from(v)).collect();
    let b_c: Vec<Complex64> = b_values.iter().map(|&v| Complex64::from(v)).collect();

    Ok(EtaEinsteinReport {
        residual1_max: r1,
        residual2_max: r2,
        passes: r1 <= tol_eff && r2 <= tol_eff,
        a: constancy_from_values(&a_c, tol),
        b: constancy_from_values(&b_c, tol),
        a_values,
        b_values,
        cross_check_max: cross,
        tol_effective: tol_eff,
    })
}

/// Point below which mu and nu are not extracted (division by sigma).
pub const SIGMA_INDETERMINATE: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct KMuNuReport {
    /// Contact gate values the input passed: max |kappa| and max |omega - 1|.
    pub contact_kappa_max: f64,
    pub contact_omega_dev: f64,
    pub theta_residual_max: f64,
    pub ethbar_sigma_max: f64,
    pub k: ConstancyStats,
    pub k_values: Vec<f64>,
    /// mu, nu extracted pointwise from P(sigma)/sigma where |sigma| is
    /// above the indeterminacy floor; None elsewhere.
    pub mu_nu_values: Vec<Option<(f64, f64)>>,
    pub mu: Option<ConstancyStats>,
    pub nu: Option<ConstancyStats>,
    pub indeterminate_points: usize,
    /// max |P(sigma) - sigma (i mu_hat - nu_hat)| at the fitted constants.
    pub consistency_max: f64,
    /// Curvature-route checks: |Ric(xi,xi) - 2k|, |Ric(xi,del)|,
    /// |Ric(del,del) - P(sigma)|.
    pub ric_cross_max: f64,
    pub is_kmunu: bool,
    /// True when the structure is a (k,0,0)-structure on this grid
    /// (mu and nu below tolerance or indeterminate everywhere).
    pub is_k00: bool,
    pub tol_effective: f64,
}

/// Extracts (k, mu, nu) data on a contact metric structure; refuses other
/// inputs, reporting the failing gate.
pub fn kmunu_extract(
    sc: &SpinCoefficients,
    m: &MetricData,
    f: &Frame,
    grid: &Grid,
    tol: f64,
    params: &Params,
) -> Result<KMuNuReport, ClassifyError> {
    if grid.len() < 8 {
        return Err(ClassifyError::GridTooSmall(grid.len()));
    }
    let s = SampledSpin::sample(sc, grid, params)?;
    let tol_eff = tol * (1.0 + s.max_magnitude());
    let max_kappa = s.kappa.iter().map(|k| k.norm()).fold(0.0, f64::max);
    let omega_dev = s.rho.iter().map(|r| (r.im - 1.0).abs()).fold(0.0, f64::max);
    if max_kappa > tol_eff {
        return Err(ClassifyError::Inapplicable(format!(
            "not contact metric: kappa != 0 (max |kappa| = {max_kappa:.3e})"
        )));
    }
    if omega_dev > tol_eff {
        let omega_mean =
            s.rho.iter().map(|r| r.im).sum::<f64>() / s.rho.len() as f64;
        return Err(ClassifyError::Inapplicable(format!(
            "not contact metric: omega = {omega_mean:.6} (|omega - 1| up to {omega_dev:.3e})"
        )));
    }

    let p_sigma = thorn(&SpinWeightedField::new(sc.sigma.clone(), 2), sc, f).value;
    let ethbar_sigma = eth_bar(&SpinWeightedField::new(sc.sigma.clone(), 2), sc, f).value;
    let ric = ricci_frame_components(m, f);

    let exprs = [
        p_sigma.re.clone(),
        p_sigma.im.clone(),
        ethbar_sigma.re.clone(),
        ethbar_sigma.im.clone(),
        ric.xi_xi.re.clone(),
        ric.xi_del.re.clone(),
        ric.xi_del.im.clone(),
        ric.del_del.re.clone(),
        ric.del_del.im.clone(),
    ];
    let prog = Program::compile(&exprs);

    let mut theta_max = 0.0f64;
    let mut ethbar_max = 0.0f64;
    let mut ric_cross = 0.0f64;
    let mut k_values = Vec::with_capacity(grid.len());
    let mut mu_nu_values: Vec<Option<(f64, f64)>> = Vec::with_capacity(grid.len());
    let mut p_sigma_vals = Vec::with_capacity(grid.len());
    let mut vals = vec![0.0; exprs.len()];
    for (i, &p) in grid.points.iter().enumerate() {
        prog.eval_into(p, params, &mut vals)?;
        let ps = Complex64::new(vals[0], vals[1]);
        p_sigma_vals.push(ps);
        theta_max = theta_max.max(s.rho[i].re.abs());
        ethbar_max = ethbar_max.max(Complex64::new(vals[2], vals[3]).norm());
        let sigma = s.sigma[i];
        let k = 1.0 - sigma.norm_sqr();
        k_values.push(k);
        ric_cross = ric_cross
            .max((vals[4] - 2.0 * k).abs())
            .max(Complex64::new(vals[5], vals[6]).norm())
            .max((Complex64::new(vals[7], vals[8]) - ps).norm());
        if sigma.norm() > SIGMA_INDETERMINATE {
            // P(sigma) = sigma (i mu - nu)
            let ratio = ps / sigma;
            mu_nu_values.push(Some((ratio.im, -ratio.re)));
        } else {
            mu_nu_values.push(None);
        }
    }

    let k_c: Vec<Complex64> = k_values.iter().map(|&v| Complex64::from(v)).collect();
    let k_stats = constancy_from_values(&k_c, tol);

    let valid: Vec<(f64, f64)> = mu_nu_values.iter().flatten().copied().collect();
    let indeterminate_points = grid.len() - valid.len();
    let (mu_stats, nu_stats, mu_hat, nu_hat) = if valid.is_empty() {
        (None, None, 0.0, 0.0)
    } else {
        let mu_c: Vec<Complex64> = valid.iter().map(|v| Complex64::from(v.0)).collect();
        let nu_c: Vec<Complex64> = valid.iter().map(|v| Complex64::from(v.1)).collect();
        let ms = constancy_from_values(&mu_c, tol);
        let ns = constancy_from_values(&nu_c, tol);
        let (mh, nh) = (ms.mean.re, ns.mean.re);
        (Some(ms), Some(ns), mh, nh)
    };

    // Consistency of P(sigma) = sigma (i mu_hat - nu_hat) at the fitted
    // constants; vacuous on the sigma = 0 locus.
    let fit = Complex64::new(-nu_hat, mu_hat);
    let mut consistency = 0.0f64;
    for (i, ps) in p_sigma_vals.iter().enumerate() {
        consistency = consistency.max((ps - s.sigma[i] * fit).norm());
    }

    let theta_ok = theta_max <= tol_eff;
    let ethbar_ok = ethbar_max <= tol_eff;
    let consistency_ok = consistency <= tol_eff;
    let is_kmunu = theta_ok && ethbar_ok && consistency_ok;
    let is_k00 = is_kmunu && mu_hat.abs() <= tol_eff && nu_hat.abs() <= tol_eff;

    Ok(KMuNuReport {
        contact_kappa_max: max_kappa,
        contact_omega_dev: omega_dev,
        theta_residual_max: theta_max,
        ethbar_sigma_max: ethbar_max,
        k: k_stats,
        k_values,
        mu_nu_values,
        mu: mu_stats,
        nu: nu_stats,
        indeterminate_points,
        consistency_max: consistency,
        ric_cross_max: ric_cross,
        is_kmunu,
        is_k00,
        tol_effective: tol_eff,
    })
}

/// eth(sigma), which must vanish on eta-Einstein contact metric structures
/// (the Blair recovery argument).
pub fn eth_sigma(sc: &SpinCoefficients, f: &Frame) -> ComplexField {
    eth(&SpinWeightedField::new(sc.sigma.clone(), 2), sc, f).value
}
