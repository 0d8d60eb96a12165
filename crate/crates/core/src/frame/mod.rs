//! The adapted frame (xi, e2, e3), its complex combination and coframe, the
//! ACM structure tensors phi / Phi / d(eta), gauge rotations, and the
//! h-tensor.
//!
//! e2 is produced by Gram-Schmidt from the first coordinate basis vector
//! whose projection orthogonal to xi is non-degenerate at the box center
//! (ties broken in coordinate order), and e3 is fixed by orthonormality and
//! the requested orientation relative to the coordinate volume form. The
//! twist changes sign with the orientation, so reports always state which
//! orientation was used.

use crate::expr::{ComplexField, EvalError, Expr, Params, Point};
use crate::geometry::{MetricData, RealVectorField, VectorField};
use crate::grid::Grid;

pub const SQRT_2: f64 = std::f64::consts::SQRT_2;

#[derive(Debug, thiserror::Error)]
pub enum FrameError {
    #[error("reeb field vanishes near ({0}, {1}, {2}): |xi|^2 = {3:.3e}")]
    ReebVanishes(f64, f64, f64, f64),
    #[error("gram-schmidt degenerate at box center: every coordinate field is parallel to xi")]
    GramSchmidtDegenerate,
    #[error("frame invariant violated at ({0}, {1}, {2}): {3} = {4:.3e}")]
    InvariantViolated(f64, f64, f64, &'static str, f64),
    #[error("frame construction evaluation failed: {0}")]
    Eval(#[from] EvalError),
}

/// How the Reeb direction is specified in a manifest.
#[derive(Debug, Clone)]
pub enum ReebSpec {
    /// Vector field components.
    Xi([Expr; 3]),
    /// 1-form components; the Reeb field is the metric dual.
    Eta([Expr; 3]),
}

/// Adapted orthonormal frame with complex leg `del = (e2 - i e3)/sqrt(2)`
/// and coframe `(eta, theta2, theta3)`, `mu = (theta2 + i theta3)/sqrt(2)`.
#[derive(Debug, Clone)]
pub struct Frame {
    pub xi: RealVectorField,
    pub e2: RealVectorField,
    pub e3: RealVectorField,
    pub eta: [Expr; 3],
    pub theta2: [Expr; 3],
    pub theta3: [Expr; 3],
    pub orientation: i8,
}

impl Frame {
    /// The complex frame leg `(e2 - i e3)/sqrt(2)`.
    pub fn del(&self) -> VectorField {
        let s = Expr::constant(1.0 / SQRT_2);
        let mut out = VectorField::zero();
        for k in 0..3 {
            out.0[k] = ComplexField::new(self.e2.0[k].mul(&s), self.e3.0[k].mul(&s).neg());
        }
        out
    }

    pub fn del_bar(&self) -> VectorField {
        self.del().conj()
    }

    pub fn xi_c(&self) -> VectorField {
        self.xi.complexify()
    }

    /// Complex coframe leg `mu = (theta2 + i theta3)/sqrt(2)`, dual to `del`.
    pub fn mu(&self) -> [ComplexField; 3] {
        let s = Expr::constant(1.0 / SQRT_2);
        let mut out: [ComplexField; 3] = Default::default();
        for k in 0..3 {
            out[k] = ComplexField::new(self.theta2[k].mul(&s), self.theta3[k].mul(&s));
        }
        out
    }

    pub fn mu_bar(&self) -> [ComplexField; 3] {
        let mu = self.mu();
        [mu[0].conj(), mu[1].conj(), mu[2].conj()]
    }

    pub fn eta_c(&self) -> [ComplexField; 3] {
        [
            ComplexField::from_real(self.eta[0].clone()),
            ComplexField::from_real(self.eta[1].clone()),
            ComplexField::from_real(self.eta[2].clone()),
        ]
    }
}

/// Builds the adapted frame. `probe` supplies the sample points for the
/// orthonormality checks and `center` seeds Gram-Schmidt deterministically.
pub fn build_frame(
    m: &MetricData,
    reeb: &ReebSpec,
    orientation: i8,
    probe: &[Point],
    center: Point,
    params: &Params,
) -> Result<Frame, FrameError> {
    assert!(orientation == 1 || orientation == -1);
    let raw = match reeb {
        ReebSpec::Xi(c) => RealVectorField(c.clone()),
        ReebSpec::Eta(c) => m.raise(c),
    };

    // Unit check: pass the field through untouched when it is already unit,
    // otherwise normalize symbolically.
    let norm_sq = m.pair_real(&raw, &raw);
    let mut unit = true;
    for &p in probe {
        let v = norm_sq.eval(p, params)?;
        if v < 1e-12 {
            return Err(FrameError::ReebVanishes(p[0], p[1], p[2], v));
        }
        if (v - 1.0).abs() > 1e-12 {
            unit = false;
        }
    }
    let xi = if unit {
        raw
    } else {
        raw.scale(&Expr::one().div(&norm_sq.sqrt()))
    };

    // Gram-Schmidt seed: first coordinate direction whose projection
    // orthogonal to xi is visible at the box center.
    let mut e2 = None;
    for k in 0..3 {
        let basis = RealVectorField::coordinate(k);
        let proj = m.pair_real(&basis, &xi);
        let v = basis.sub(&xi.scale(&proj));
        let v_norm_sq = m.pair_real(&v, &v);
        let at_center = v_norm_sq.eval(center, params)?;
        if at_center > 1e-16 {
            e2 = Some(v.scale(&Expr::one().div(&v_norm_sq.sqrt())));
            break;
        }
    }
    let e2 = e2.ok_or(FrameError::GramSchmidtDegenerate)?;

    // e3 = orientation * (xi x e2) with respect to the metric volume form:
    // (X x Y)_l = sqrt(det g) eps_ijl X^i Y^j, raised with g^{-1}.
    let mut cross_cov: [Expr; 3] = Default::default();
    for l in 0..3 {
        let mut acc = Expr::zero();
        for i in 0..3 {
            for j in 0..3 {
                let eps = levi_civita(i, j, l);
                if eps != 0.0 {
                    acc = acc.add(&Expr::constant(eps).mul(&xi.0[i]).mul(&e2.0[j]));
                }
            }
        }
        cross_cov[l] = m.sqrt_det.mul(&acc);
    }
    let mut e3 = m.raise(&cross_cov);
    if orientation < 0 {
        e3 = e3.scale(&Expr::constant(-1.0));
    }

    let frame = Frame {
        eta: m.lower(&xi),
        theta2: m.lower(&e2),
        theta3: m.lower(&e3),
        xi,
        e2,
        e3,
        orientation,
    };
    validate_frame(&frame, m, probe, params)?;
    Ok(frame)
}

fn levi_civita(i: usize, j: usize, k: usize) -> f64 {
    match (i, j, k) {
        (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1.0,
        (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1.0,
        _ => 0.0,
    }
}

fn validate_frame(
    f: &Frame,
    m: &MetricData,
    probe: &[Point],
    params: &Params,
) -> Result<(), FrameError> {
    let checks: [(&'static str, Expr, f64); 6] = [
        ("g(xi,xi)", m.pair_real(&f.xi, &f.xi), 1.0),
        ("g(e2,e2)", m.pair_real(&f.e2, &f.e2), 1.0),
        ("g(e3,e3)", m.pair_real(&f.e3, &f.e3), 1.0),
        ("g(xi,e2)", m.pair_real(&f.xi, &f.e2), 0.0),
        ("g(xi,e3)", m.pair_real(&f.xi, &f.e3), 0.0),
        ("g(e2,e3)", m.pair_real(&f.e2, &f.e3), 0.0),
    ];
    for &p in probe {
        for (name, e, want) in &checks {
            let v = e.eval(p, params)?;
            if (v - want).abs() > 1e-10 {
                return Err(FrameError::InvariantViolated(p[0], p[1], p[2], name, v - want));
            }
        }
    }
    Ok(())
}

/// Gauge rotation `del -> e^{i theta} del` of the horizontal legs; xi and the
/// orientation are untouched.
#[derive(Debug, Clone)]
pub struct GaugeTransform {
    pub theta: Expr,
}

pub fn gauge_transform(f: &Frame, t: &GaugeTransform) -> Frame {
    let c = t.theta.cos();
    let s = t.theta.sin();
    let rot = |a: &RealVectorField, b: &RealVectorField| -> (RealVectorField, RealVectorField) {
        (a.scale(&c).add(&b.scale(&s)), b.scale(&c).sub(&a.scale(&s)))
    };
    let (e2, e3) = rot(&f.e2, &f.e3);
    let rot1 = |a: &[Expr; 3], b: &[Expr; 3]| -> ([Expr; 3], [Expr; 3]) {
        let mut p: [Expr; 3] = Default::default();
        let mut q: [Expr; 3] = Default::default();
        for k in 0..3 {
            p[k] = a[k].mul(&c).add(&b[k].mul(&s));
            q[k] = b[k].mul(&c).sub(&a[k].mul(&s));
        }
        (p, q)
    };
    let (theta2, theta3) = rot1(&f.theta2, &f.theta3);
    Frame {
        xi: f.xi.clone(),
        e2,
        e3,
        eta: f.eta.clone(),
        theta2,
        theta3,
        orientation: f.orientation,
    }
}

/// ACM structure tensors derived from a frame: the endomorphism phi with
/// `phi(e2) = e3`, `phi(e3) = -e2`, `phi(xi) = 0` (so `phi(del) = i del`),
/// the fundamental two-form `Phi(X,Y) = g(X, phi Y)`, and `d eta`.
///
/// Wedge convention throughout: `(a ^ b)(X,Y) = (a(X)b(Y) - a(Y)b(X))/2`,
/// so `(d eta)_ij = (d_i eta_j - d_j eta_i)/2`.
#[derive(Debug, Clone)]
pub struct AcmStructure {
    pub frame: Frame,
    /// phi^k_l
    pub phi: [[Expr; 3]; 3],
    /// Phi_ij = g(d_i, phi d_j)
    pub big_phi: [[Expr; 3]; 3],
    /// (d eta)_ij
    pub d_eta: [[Expr; 3]; 3],
}

impl AcmStructure {
    pub fn from_frame(frame: &Frame, m: &MetricData) -> AcmStructure {
        let mut phi: [[Expr; 3]; 3] = Default::default();
        for k in 0..3 {
            for l in 0..3 {
                phi[k][l] = frame.e3.0[k]
                    .mul(&frame.theta2[l])
                    .sub(&frame.e2.0[k].mul(&frame.theta3[l]));
            }
        }
        let mut big_phi: [[Expr; 3]; 3] = Default::default();
        for i in 0..3 {
            for j in 0..3 {
                let mut acc = Expr::zero();
                for k in 0..3 {
                    acc = acc.add(&m.g[i][k].mul(&phi[k][j]));
                }
                big_phi[i][j] = acc;
            }
        }
        let mut d_eta: [[Expr; 3]; 3] = Default::default();
        for i in 0..3 {
            for j in 0..3 {
                d_eta[i][j] =
                    Expr::constant(0.5).mul(&frame.eta[j].diff(i).sub(&frame.eta[i].diff(j)));
            }
        }
        AcmStructure {
            frame: frame.clone(),
            phi,
            big_phi,
            d_eta,
        }
    }

    /// Applies phi to a vector field.
    pub fn apply_phi(&self, x: &VectorField) -> VectorField {
        let mut out = VectorField::zero();
        for k in 0..3 {
            let mut acc = ComplexField::zero();
            for l in 0..3 {
                acc = acc.add(&x.0[l].scale(&self.phi[k][l]));
            }
            out.0[k] = acc;
        }
        out
    }
}

/// Rank of eta at one point: 1 if `d eta = 0`, 2 if `d eta != 0` but
/// `eta ^ d eta = 0`, 3 otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EtaRank {
    One,
    Two,
    Three,
}

impl EtaRank {
    pub fn as_u8(self) -> u8 {
        match self {
            EtaRank::One => 1,
            EtaRank::Two => 2,
            EtaRank::Three => 3,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RankReport {
    pub per_point: Vec<(Point, EtaRank)>,
    /// Some(rank) when the rank is the same at every sampled point.
    pub uniform: Option<EtaRank>,
}

/// Classifies the rank of eta over the grid. The `eta ^ d eta` component uses
/// the alternation convention matching the pairwise wedge, so only its
/// zero locus matters here.
pub fn rank_report(
    acm: &AcmStructure,
    grid: &Grid,
    tol: f64,
    params: &Params,
) -> Result<RankReport, EvalError> {
    // single independent component of eta ^ d eta
    let mut vol = Expr::zero();
    for (i, j, k, sgn) in [
        (0usize, 1usize, 2usize, 1.0),
        (1, 2, 0, 1.0),
        (2, 0, 1, 1.0),
    ] {
        vol = vol.add(&Expr::constant(sgn).mul(&acm.frame.eta[i].mul(&acm.d_eta[j][k])));
    }
    let mut exprs: Vec<Expr> = Vec::new();
    for i in 0..3 {
        for j in (i + 1)..3 {
            exprs.push(acm.d_eta[i][j].clone());
        }
    }
    exprs.push(vol);
    let prog = crate::expr::Program::compile(&exprs);
    let mut per_point = Vec::with_capacity(grid.len());
    let mut out = vec![0.0; exprs.len()];
    for &p in &grid.points {
        prog.eval_into(p, params, &mut out)?;
        let d_eta_max = out[..3].iter().map(|v| v.abs()).fold(0.0, f64::max);
        let vol_abs = out[3].abs();
        let rank = if d_eta_max <= tol {
            EtaRank::One
        } else if vol_abs <= tol {
            EtaRank::Two
        } else {
            EtaRank::Three
        };
        per_point.push((p, rank));
    }
    let first = per_point.first().map(|(_, r)| *r);
    let uniform = match first {
        Some(r) if per_point.iter().all(|(_, q)| *q == r) => Some(r),
        _ => None,
    };
    Ok(RankReport { per_point, uniform })
}

/// The tensor `h = (1/2) L_xi phi` via the Lie derivative, as a (1,1) matrix
/// field. The spin-coefficient route lives in the np module; the two are
/// compared by the identity suite.
pub fn h_tensor(acm: &AcmStructure) -> [[Expr; 3]; 3] {
    let xi = &acm.frame.xi;
    let mut h: [[Expr; 3]; 3] = Default::default();
    for k in 0..3 {
        for l in 0..3 {
            // (L_xi phi)^k_l = xi^i d_i phi^k_l - (d_i xi^k) phi^i_l
            //                + (d_l xi^i) phi^k_i
            let mut acc = Expr::zero();
            for i in 0..3 {
                acc = acc.add(&xi.0[i].mul(&acm.phi[k][l].diff(i)));
                acc = acc.sub(&xi.0[k].diff(i).mul(&acm.phi[i][l]));
                acc = acc.add(&xi.0[i].diff(l).mul(&acm.phi[k][i]));
            }
            h[k][l] = Expr::constant(0.5).mul(&acc);
        }
    }
    h
}

/// Horizontal gradient `grad f - xi(f) xi` (index-raising form). The frame
/// expansion `e2(f) e2 + e3(f) e3` is checked against it by the tests.
pub fn horizontal_gradient(f: &ComplexField, m: &MetricData, frame: &Frame) -> VectorField {
    let grad = crate::geometry::gradient(f, m);
    let xi_f = frame.xi_c().derive(f);
    grad.sub(&frame.xi_c().scale(&xi_f))
}
