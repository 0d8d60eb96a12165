//! Spin coefficients of the adapted frame, the weight-covariant operators
//! P (thorn), eth and eth-bar, and the residuals of the generalized Sachs
//! and second-Bianchi systems.
//!
//! Definitions, with `g` extended complex-bilinearly:
//!
//! ```text
//! kappa = -g(nabla_xi xi, del)      rho   =  g(nabla_delbar xi, del)
//! sigma = -g(nabla_del xi, del)     eps   =  g(nabla_xi del, delbar)
//! beta  =  g(nabla_del del, delbar)
//! ```
//!
//! `rho = Theta + i omega` carries the expansion and twist. The residuals
//! are formed symbolically and only then evaluated, so a nonzero value
//! indicates a convention bug rather than float noise; the hyperbolic
//! Kenmotsu example pins all signs (see the convention tests).

use crate::expr::{ComplexField, Expr};
use crate::frame::Frame;
use crate::geometry::{covariant_derivative, MetricData, VectorField};

/// The five complex spin coefficients, re-differentiable expressions.
#[derive(Debug, Clone)]
pub struct SpinCoefficients {
    pub kappa: ComplexField,
    pub rho: ComplexField,
    pub sigma: ComplexField,
    pub epsilon: ComplexField,
    pub beta: ComplexField,
}

impl SpinCoefficients {
    /// Expansion, the real part of rho.
    pub fn theta(&self) -> Expr {
        self.rho.re.clone()
    }

    /// Twist, the imaginary part of rho; its sign follows the frame
    /// orientation.
    pub fn omega(&self) -> Expr {
        self.rho.im.clone()
    }
}

pub fn spin_coefficients(m: &MetricData, f: &Frame) -> SpinCoefficients {
    let xi = f.xi_c();
    let del = f.del();
    let del_bar = f.del_bar();

    let d_xi_xi = covariant_derivative(&xi, &xi, m);
    let d_del_xi = covariant_derivative(&xi, &del, m);
    let d_delbar_xi = covariant_derivative(&xi, &del_bar, m);
    let d_xi_del = covariant_derivative(&del, &xi, m);
    let d_del_del = covariant_derivative(&del, &del, m);

    SpinCoefficients {
        kappa: m.pair(&d_xi_xi, &del).neg(),
        rho: m.pair(&d_delbar_xi, &del),
        sigma: m.pair(&d_del_xi, &del).neg(),
        epsilon: m.pair(&d_xi_del, &del_bar),
        beta: m.pair(&d_del_del, &del_bar),
    }
}

/// Frame direction for scalar derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrameDir {
    Xi,
    Del,
    DelBar,
}

/// Directional derivative of a complex scalar along a frame leg; exact.
pub fn frame_derivative(q: &ComplexField, dir: FrameDir, f: &Frame) -> ComplexField {
    let leg = match dir {
        FrameDir::Xi => f.xi_c(),
        FrameDir::Del => f.del(),
        FrameDir::DelBar => f.del_bar(),
    };
    leg.derive(q)
}

/// A complex scalar with a definite spin weight.
#[derive(Debug, Clone)]
pub struct SpinWeightedField {
    pub value: ComplexField,
    pub weight: i32,
}

impl SpinWeightedField {
    pub fn new(value: ComplexField, weight: i32) -> Self {
        SpinWeightedField { value, weight }
    }

    /// Conjugation negates the weight.
    pub fn conj(&self) -> Self {
        SpinWeightedField {
            value: self.value.conj(),
            weight: -self.weight,
        }
    }
}

/// P(q) = xi(q) - s eps q, weight s.
pub fn thorn(q: &SpinWeightedField, sc: &SpinCoefficients, f: &Frame) -> SpinWeightedField {
    let d = frame_derivative(&q.value, FrameDir::Xi, f);
    let v = d.sub(&sc.epsilon.mul(&q.value).scale_f64(q.weight as f64));
    SpinWeightedField::new(v, q.weight)
}

/// eth(q) = del(q) - s q beta, weight s + 1.
pub fn eth(q: &SpinWeightedField, sc: &SpinCoefficients, f: &Frame) -> SpinWeightedField {
    let d = frame_derivative(&q.value, FrameDir::Del, f);
    let v = d.sub(&sc.beta.mul(&q.value).scale_f64(q.weight as f64));
    SpinWeightedField::new(v, q.weight + 1)
}

/// eth_bar(q) = delbar(q) + s q conj(beta), weight s - 1.
pub fn eth_bar(q: &SpinWeightedField, sc: &SpinCoefficients, f: &Frame) -> SpinWeightedField {
    let d = frame_derivative(&q.value, FrameDir::DelBar, f);
    let v = d.add(&sc.beta.conj().mul(&q.value).scale_f64(q.weight as f64));
    SpinWeightedField::new(v, q.weight - 1)
}

/// Ricci tensor contracted on the complex frame. `Ric(xi,xi)` and
/// `Ric(del, delbar)` are real-valued.
#[derive(Debug, Clone)]
pub struct RicciFrame {
    pub xi_xi: ComplexField,
    pub xi_del: ComplexField,
    pub del_del: ComplexField,
    pub del_delbar: ComplexField,
}

pub fn ricci_frame_components(m: &MetricData, f: &Frame) -> RicciFrame {
    let xi = f.xi_c();
    let del = f.del();
    let del_bar = f.del_bar();
    let ric = |x: &VectorField, y: &VectorField| -> ComplexField {
        let mut acc = ComplexField::zero();
        for i in 0..3 {
            for j in 0..3 {
                acc = acc.add(&x.0[i].mul(&y.0[j]).scale(&m.ricci[i][j]));
            }
        }
        acc
    };
    RicciFrame {
        xi_xi: ric(&xi, &xi),
        xi_del: ric(&xi, &del),
        del_del: ric(&del, &del),
        del_delbar: ric(&del, &del_bar),
    }
}

/// Residuals (left minus right) of the five generalized Sachs equations:
///
/// ```text
/// 1: -xi(rho) - delbar(kappa) = |kappa|^2 + |sigma|^2 + rho^2
///                               + kappa conj(beta) + Ric(xi,xi)/2
/// 2:  xi(sigma) - del(kappa)  = kappa^2 + 2 sigma eps - sigma (rho + conj(rho))
///                               - kappa beta + Ric(del,del)
/// 3: -del(rho) - delbar(sigma) = 2 sigma conj(beta) + (rho - conj(rho)) kappa
///                               + Ric(xi,del)
/// 4:  xi(beta) - del(eps)     = sigma (conj(kappa) - conj(beta))
///                               + kappa (eps + conj(rho)) + beta (eps - conj(rho))
///                               - Ric(xi,del)
/// 5:  del(conj(beta)) + delbar(beta) = |sigma|^2 - |rho|^2 - 2|beta|^2
///                               - (rho - conj(rho)) eps - Ric(del,delbar)
///                               + Ric(xi,xi)/2
/// ```
pub fn sachs_residuals(m: &MetricData, f: &Frame, sc: &SpinCoefficients) -> [ComplexField; 5] {
    let ric = ricci_frame_components(m, f);
    let d = |q: &ComplexField, dir: FrameDir| frame_derivative(q, dir, f);
    let re = |e: Expr| ComplexField::from_real(e);

    let kappa = &sc.kappa;
    let rho = &sc.rho;
    let sigma = &sc.sigma;
    let eps = &sc.epsilon;
    let beta = &sc.beta;

    let eq1 = {
        let lhs = d(rho, FrameDir::Xi).neg().sub(&d(kappa, FrameDir::DelBar));
        let rhs = re(kappa.modulus_sq())
            .add(&re(sigma.modulus_sq()))
            .add(&rho.mul(rho))
            .add(&kappa.mul(&beta.conj()))
            .add(&ric.xi_xi.scale_f64(0.5));
        lhs.sub(&rhs)
    };

    let eq2 = {
        let lhs = d(sigma, FrameDir::Xi).sub(&d(kappa, FrameDir::Del));
        let rhs = kappa
            .mul(kappa)
            .add(&sigma.mul(eps).scale_f64(2.0))
            .sub(&sigma.scale(&rho.re.mul(&Expr::constant(2.0))))
            .sub(&kappa.mul(beta))
            .add(&ric.del_del);
        lhs.sub(&rhs)
    };

    let eq3 = {
        let lhs = d(rho, FrameDir::Del).neg().sub(&d(sigma, FrameDir::DelBar));
        let rhs = sigma
            .mul(&beta.conj())
            .scale_f64(2.0)
            .add(&kappa.scale(&rho.im.mul(&Expr::constant(2.0))).mul_i())
            .add(&ric.xi_del);
        lhs.sub(&rhs)
    };

    let eq4 = {
        let lhs = d(beta, FrameDir::Xi).sub(&d(eps, FrameDir::Del));
        let rhs = sigma
            .mul(&kappa.conj().sub(&beta.conj()))
            .add(&kappa.mul(&eps.add(&rho.conj())))
            .add(&beta.mul(&eps.sub(&rho.conj())))
            .sub(&ric.xi_del);
        lhs.sub(&rhs)
    };

    let eq5 = {
        let lhs = d(&beta.conj(), FrameDir::Del).add(&d(beta, FrameDir::DelBar));
        let rhs = re(sigma.modulus_sq())
            .sub(&re(rho.modulus_sq()))
            .sub(&re(beta.modulus_sq()).scale_f64(2.0))
            .sub(&eps.scale(&rho.im.mul(&Expr::constant(2.0))).mul_i())
            .sub(&ric.del_delbar)
            .add(&ric.xi_xi.scale_f64(0.5));
        lhs.sub(&rhs)
    };

    [eq1, eq2, eq3, eq4, eq5]
}

/// Residuals of the two frame forms of the contracted second Bianchi
/// identity (`div Ric = d(Scal)/2` against xi and del):
///
/// ```text
/// a: xi(R01) - del(R00)/2 + delbar(R11)
///    = kappa R00 + (eps - conj(rho) - 2 rho) R01 + sigma conj(R01)
///      - (conj(kappa) + 2 conj(beta)) R11 - kappa R1b
/// b: del(conj(R01)) + delbar(R01) - xi(R1b) + xi(R00)/2
///    = -(rho + conj(rho)) (R00 - R1b) - conj(sigma) R11 - sigma conj(R11)
///      - (2 conj(kappa) + conj(beta)) R01 - (2 kappa + beta) conj(R01)
/// ```
///
/// where `R00 = Ric(xi,xi)`, `R01 = Ric(xi,del)`, `R11 = Ric(del,del)`,
/// `R1b = Ric(del,delbar)`. Requires third derivatives of the metric.
pub fn bianchi2_residuals(m: &MetricData, f: &Frame, sc: &SpinCoefficients) -> [ComplexField; 2] {
    let ric = ricci_frame_components(m, f);
    let d = |q: &ComplexField, dir: FrameDir| frame_derivative(q, dir, f);

    let r00 = &ric.xi_xi;
    let r01 = &ric.xi_del;
    let r11 = &ric.del_del;
    let r1b = &ric.del_delbar;

    let kappa = &sc.kappa;
    let rho = &sc.rho;
    let sigma = &sc.sigma;
    let eps = &sc.epsilon;
    let beta = &sc.beta;

    let eq_a = {
        let lhs = d(r01, FrameDir::Xi)
            .sub(&d(r00, FrameDir::Del).scale_f64(0.5))
            .add(&d(r11, FrameDir::DelBar));
        let coeff = eps.sub(&rho.conj()).sub(&rho.scale_f64(2.0));
        let rhs = kappa
            .mul(r00)
            .add(&coeff.mul(r01))
            .add(&sigma.mul(&r01.conj()))
            .sub(&kappa.conj().add(&beta.conj().scale_f64(2.0)).mul(r11))
            .sub(&kappa.mul(r1b));
        lhs.sub(&rhs)
    };

    let eq_b = {
        let lhs = d(&r01.conj(), FrameDir::Del)
            .add(&d(r01, FrameDir::DelBar))
            .sub(&d(r1b, FrameDir::Xi))
            .add(&d(r00, FrameDir::Xi).scale_f64(0.5));
        let rhs = r00
            .sub(r1b)
            .scale(&sc.rho.re.mul(&Expr::constant(-2.0)))
            .sub(&sigma.conj().mul(r11))
            .sub(&sigma.mul(&r11.conj()))
            .sub(&kappa.conj().scale_f64(2.0).add(&beta.conj()).mul(r01))
            .sub(&kappa.scale_f64(2.0).add(beta).mul(&r01.conj()));
        lhs.sub(&rhs)
    };

    [eq_a, eq_b]
}

/// The h-tensor by the spin-coefficient route, `h(del) = i sigma delbar
/// + (i/2) kappa xi`, assembled into a real (1,1) matrix field.
pub fn h_from_spin(sc: &SpinCoefficients, f: &Frame) -> [[Expr; 3]; 3] {
    let del_bar = f.del_bar();
    let xi = f.xi_c();
    let h_del = del_bar
        .scale(&sc.sigma.mul_i())
        .add(&xi.scale(&sc.kappa.mul_i().scale_f64(0.5)));
    let mu = f.mu();
    // h = h(del) (x) mu + conj: real part of 2 Re(h(del)^k mu_l)
    let mut h: [[Expr; 3]; 3] = Default::default();
    for k in 0..3 {
        for l in 0..3 {
            let prod = h_del.0[k].mul(&mu[l]);
            h[k][l] = prod.re.mul(&Expr::constant(2.0));
        }
    }
    h
}

/// The 2x2 matrix of h in the (e2, e3) basis predicted by the shear:
/// `[[-Im sigma, -Re sigma], [-Re sigma, Im sigma]]` (exact when kappa = 0).
pub fn h_matrix_from_sigma(sc: &SpinCoefficients) -> [[Expr; 2]; 2] {
    let s1 = sc.sigma.re.clone();
    let s2 = sc.sigma.im.clone();
    [[s2.neg(), s1.neg()], [s1.neg(), s2.clone()]]
}

/// Eigen data of the h-tensor sampled over a grid: h is real symmetric on
/// the horizontal plane with eigenvalues +-|sigma|; the eigenvector angle
/// follows the phase of sigma = |sigma| e^{i gamma}.
#[derive(Debug, Clone)]
pub struct HEigenReport {
    /// (point, lambda_plus, lambda_minus, |sigma|, gamma)
    pub per_point: Vec<(crate::expr::Point, f64, f64, f64, f64)>,
    /// max over the grid of | lambda_plus - |sigma| | and | lambda_minus + |sigma| |
    pub eigen_deviation_max: f64,
    /// max deviation between the Lie-derivative and spin-coefficient routes
    pub route_deviation_max: f64,
}

/// Computes h by both routes (Lie derivative of phi, spin-coefficient
/// formula), compares them, and diagonalizes the (e2, e3) block pointwise.
pub fn h_eigen_report(
    acm: &crate::frame::AcmStructure,
    m: &MetricData,
    sc: &SpinCoefficients,
    grid: &crate::grid::Grid,
    params: &crate::expr::Params,
) -> Result<HEigenReport, crate::expr::EvalError> {
    let h_lie = crate::frame::h_tensor(acm);
    let h_sc = h_from_spin(sc, &acm.frame);
    let block = h_block(&h_lie, &acm.frame, m);
    let mut exprs: Vec<Expr> = vec![
        block[0][0].clone(),
        block[0][1].clone(),
        block[1][0].clone(),
        block[1][1].clone(),
        sc.sigma.modulus_sq().sqrt(),
        sc.sigma.im.clone(),
        sc.sigma.re.clone(),
    ];
    for k in 0..3 {
        for l in 0..3 {
            exprs.push(h_lie[k][l].sub(&h_sc[k][l]));
        }
    }
    let prog = crate::expr::Program::compile(&exprs);
    let mut per_point = Vec::with_capacity(grid.len());
    let mut eigen_dev = 0.0f64;
    let mut route_dev = 0.0f64;
    let mut vals = vec![0.0; exprs.len()];
    for &p in &grid.points {
        prog.eval_into(p, params, &mut vals)?;
        let mean = 0.5 * (vals[0] + vals[3]);
        let disc = (0.25 * (vals[0] - vals[3]).powi(2) + vals[1] * vals[2]).sqrt();
        let (lam_plus, lam_minus) = (mean + disc, mean - disc);
        let sigma_abs = vals[4];
        let gamma = vals[5].atan2(vals[6]);
        eigen_dev = eigen_dev
            .max((lam_plus - sigma_abs).abs())
            .max((lam_minus + sigma_abs).abs());
        for v in &vals[7..16] {
            route_dev = route_dev.max(v.abs());
        }
        per_point.push((p, lam_plus, lam_minus, sigma_abs, gamma));
    }
    Ok(HEigenReport {
        per_point,
        eigen_deviation_max: eigen_dev,
        route_deviation_max: route_dev,
    })
}

/// Projects a (1,1) matrix field onto the (e2, e3) block: entries
/// `g(h(e_a), e_b)`.
pub fn h_block(
    h: &[[Expr; 3]; 3],
    f: &Frame,
    m: &MetricData,
) -> [[Expr; 2]; 2] {
    let legs = [&f.e2, &f.e3];
    let mut out: [[Expr; 2]; 2] = Default::default();
    for (a, ea) in legs.iter().enumerate() {
        // h(e_a)
        let mut img: [Expr; 3] = Default::default();
        for k in 0..3 {
            let mut acc = Expr::zero();
            for l in 0..3 {
                acc = acc.add(&h[k][l].mul(&ea.0[l]));
            }
            img[k] = acc;
        }
        let img = crate::geometry::RealVectorField(img);
        for (b, eb) in legs.iter().enumerate() {
            out[a][b] = m.pair_real(&img, eb);
        }
    }
    out
}

#[cfg(test)]
mod tests;
