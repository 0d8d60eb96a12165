//! Metric, Levi-Civita connection, curvature, and first-order differential
//! operators on the chart, all as symbolic expressions.
//!
//! Conventions, frozen by the calibration tests: Christoffel symbols
//! `G^k_ij = (1/2) g^{kl} (d_i g_jl + d_j g_il - d_l g_ij)`, Ricci
//! `R_ij = d_k G^k_ij - d_i G^k_kj + G^k_kl G^l_ij - G^k_il G^l_kj`. With
//! these signs the hyperbolic metric `dz^2 + e^{2z}(dx^2 + dy^2)` has
//! `Ric = -2 g` and all generalized Sachs residuals vanish.

use crate::expr::{ComplexField, EvalError, Expr, Params, Point};

/// Vector field with three real expression components.
#[derive(Debug, Clone, PartialEq)]
pub struct RealVectorField(pub [Expr; 3]);

/// Vector field with complex components; frames and spin machinery use
/// the complex-bilinear extension of every metric operation.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField(pub [ComplexField; 3]);

impl RealVectorField {
    pub fn zero() -> Self {
        RealVectorField([Expr::zero(), Expr::zero(), Expr::zero()])
    }

    pub fn coordinate(k: usize) -> Self {
        let mut v = Self::zero();
        v.0[k] = Expr::one();
        v
    }

    pub fn complexify(&self) -> VectorField {
        VectorField([
            ComplexField::from_real(self.0[0].clone()),
            ComplexField::from_real(self.0[1].clone()),
            ComplexField::from_real(self.0[2].clone()),
        ])
    }

    pub fn scale(&self, s: &Expr) -> Self {
        RealVectorField([self.0[0].mul(s), self.0[1].mul(s), self.0[2].mul(s)])
    }

    pub fn add(&self, rhs: &Self) -> Self {
        RealVectorField([
            self.0[0].add(&rhs.0[0]),
            self.0[1].add(&rhs.0[1]),
            self.0[2].add(&rhs.0[2]),
        ])
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        RealVectorField([
            self.0[0].sub(&rhs.0[0]),
            self.0[1].sub(&rhs.0[1]),
            self.0[2].sub(&rhs.0[2]),
        ])
    }

    /// Directional derivative of a real scalar along this field.
    pub fn derive(&self, f: &Expr) -> Expr {
        let mut acc = Expr::zero();
        for i in 0..3 {
            acc = acc.add(&self.0[i].mul(&f.diff(i)));
        }
        acc
    }

    pub fn eval(&self, p: Point, params: &Params) -> Result<[f64; 3], EvalError> {
        Ok([
            self.0[0].eval(p, params)?,
            self.0[1].eval(p, params)?,
            self.0[2].eval(p, params)?,
        ])
    }
}

impl VectorField {
    pub fn zero() -> Self {
        VectorField([ComplexField::zero(), ComplexField::zero(), ComplexField::zero()])
    }

    pub fn add(&self, rhs: &Self) -> Self {
        VectorField([
            self.0[0].add(&rhs.0[0]),
            self.0[1].add(&rhs.0[1]),
            self.0[2].add(&rhs.0[2]),
        ])
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        VectorField([
            self.0[0].sub(&rhs.0[0]),
            self.0[1].sub(&rhs.0[1]),
            self.0[2].sub(&rhs.0[2]),
        ])
    }

    pub fn scale(&self, s: &ComplexField) -> Self {
        VectorField([self.0[0].mul(s), self.0[1].mul(s), self.0[2].mul(s)])
    }

    pub fn conj(&self) -> Self {
        VectorField([self.0[0].conj(), self.0[1].conj(), self.0[2].conj()])
    }

    /// Directional derivative of a complex scalar along this field,
    /// extended complex-linearly in the direction.
    pub fn derive(&self, q: &ComplexField) -> ComplexField {
        let mut acc = ComplexField::zero();
        for i in 0..3 {
            let dq = ComplexField::new(q.re.diff(i), q.im.diff(i));
            acc = acc.add(&self.0[i].mul(&dq));
        }
        acc
    }

    /// Pairs the field with a real 1-form given by covariant components.
    pub fn pair_form(&self, form: &[Expr; 3]) -> ComplexField {
        let mut acc = ComplexField::zero();
        for k in 0..3 {
            acc = acc.add(&self.0[k].scale(&form[k]));
        }
        acc
    }

    pub fn re_part(&self) -> RealVectorField {
        RealVectorField([self.0[0].re.clone(), self.0[1].re.clone(), self.0[2].re.clone()])
    }

    pub fn im_part(&self) -> RealVectorField {
        RealVectorField([self.0[0].im.clone(), self.0[1].im.clone(), self.0[2].im.clone()])
    }
}

#[derive(Debug, thiserror::Error)]
pub enum GeometryError {
    #[error("metric is not positive definite at ({0}, {1}, {2}): leading minor {3} = {4:.6e}")]
    Degenerate(f64, f64, f64, usize, f64),
    #[error("metric evaluation failed at ({0}, {1}, {2}): {3}")]
    Eval(f64, f64, f64, EvalError),
}

/// Symmetric metric with all derived connection and curvature expressions.
#[derive(Debug, Clone)]
pub struct MetricData {
    pub g: [[Expr; 3]; 3],
    pub g_inv: [[Expr; 3]; 3],
    pub det_g: Expr,
    pub sqrt_det: Expr,
    /// Christoffel symbols of the second kind, indexed `gamma[k][i][j]` for
    /// `G^k_ij`.
    pub gamma: [[[Expr; 3]; 3]; 3],
    pub ricci: [[Expr; 3]; 3],
    pub scalar_curv: Expr,
}

/// Builds the metric and every derived field from six independent
/// components `(g11, g12, g13, g22, g23, g33)`, checking positive
/// definiteness at the probe points via leading principal minors.
pub fn build_metric(
    components: &[Expr; 6],
    probe: &[Point],
    params: &Params,
) -> Result<MetricData, GeometryError> {
    let [g11, g12, g13, g22, g23, g33] = components.clone();
    let g = [
        [g11.clone(), g12.clone(), g13.clone()],
        [g12.clone(), g22.clone(), g23.clone()],
        [g13.clone(), g23.clone(), g33.clone()],
    ];

    // Leading principal minors as expressions; checked numerically below.
    let minor1 = g[0][0].clone();
    let minor2 = g[0][0].mul(&g[1][1]).sub(&g[0][1].mul(&g[1][0]));
    let det = det3(&g);

    for &p in probe {
        for (idx, m) in [&minor1, &minor2, &det].iter().enumerate() {
            let v = m
                .eval(p, params)
                .map_err(|e| GeometryError::Eval(p[0], p[1], p[2], e))?;
            if v <= 0.0 {
                return Err(GeometryError::Degenerate(p[0], p[1], p[2], idx + 1, v));
            }
        }
    }

    // Inverse via adjugate / determinant, kept symbolic so curvature stays
    // differentiable to third order.
    let mut g_inv: [[Expr; 3]; 3] = Default::default();
    for i in 0..3 {
        for j in 0..3 {
            g_inv[i][j] = cofactor(&g, j, i).div(&det);
        }
    }

    // First kind: G_{ij,l} = (1/2)(d_i g_jl + d_j g_il - d_l g_ij).
    let half = Expr::constant(0.5);
    let mut gamma1: [[[Expr; 3]; 3]; 3] = Default::default();
    for i in 0..3 {
        for j in 0..3 {
            for l in 0..3 {
                let t = g[j][l]
                    .diff(i)
                    .add(&g[i][l].diff(j))
                    .sub(&g[i][j].diff(l));
                gamma1[i][j][l] = half.mul(&t);
            }
        }
    }

    // Second kind: G^k_ij = g^{kl} G_{ij,l}.
    let mut gamma: [[[Expr; 3]; 3]; 3] = Default::default();
    for k in 0..3 {
        for i in 0..3 {
            for j in 0..3 {
                let mut acc = Expr::zero();
                for l in 0..3 {
                    acc = acc.add(&g_inv[k][l].mul(&gamma1[i][j][l]));
                }
                gamma[k][i][j] = acc;
            }
        }
    }

    // R_ij = d_k G^k_ij - d_i G^k_kj + G^k_kl G^l_ij - G^k_il G^l_kj.
    let mut ricci: [[Expr; 3]; 3] = Default::default();
    for i in 0..3 {
        for j in 0..3 {
            let mut acc = Expr::zero();
            for k in 0..3 {
                acc = acc.add(&gamma[k][i][j].diff(k));
                acc = acc.sub(&gamma[k][k][j].diff(i));
                for l in 0..3 {
                    acc = acc.add(&gamma[k][k][l].mul(&gamma[l][i][j]));
                    acc = acc.sub(&gamma[k][i][l].mul(&gamma[l][k][j]));
                }
            }
            ricci[i][j] = acc;
        }
    }

    let mut scalar = Expr::zero();
    for i in 0..3 {
        for j in 0..3 {
            scalar = scalar.add(&g_inv[i][j].mul(&ricci[i][j]));
        }
    }

    Ok(MetricData {
        g,
        g_inv,
        sqrt_det: det.sqrt(),
        det_g: det,
        gamma,
        ricci,
        scalar_curv: scalar,
    })
}

fn cofactor(m: &[[Expr; 3]; 3], r: usize, c: usize) -> Expr {
    let rows: Vec<usize> = (0..3).filter(|&i| i != r).collect();
    let cols: Vec<usize> = (0..3).filter(|&j| j != c).collect();
    let minor = m[rows[0]][cols[0]]
        .mul(&m[rows[1]][cols[1]])
        .sub(&m[rows[0]][cols[1]].mul(&m[rows[1]][cols[0]]));
    if (r + c) % 2 == 0 {
        minor
    } else {
        minor.neg()
    }
}

fn det3(m: &[[Expr; 3]; 3]) -> Expr {
    let mut acc = Expr::zero();
    for j in 0..3 {
        acc = acc.add(&m[0][j].mul(&cofactor(m, 0, j)));
    }
    acc
}

impl MetricData {
    /// Complex-bilinear metric pairing `g(X, Y)`.
    pub fn pair(&self, x: &VectorField, y: &VectorField) -> ComplexField {
        let mut acc = ComplexField::zero();
        for i in 0..3 {
            for j in 0..3 {
                acc = acc.add(&x.0[i].mul(&y.0[j]).scale(&self.g[i][j]));
            }
        }
        acc
    }

    pub fn pair_real(&self, x: &RealVectorField, y: &RealVectorField) -> Expr {
        let mut acc = Expr::zero();
        for i in 0..3 {
            for j in 0..3 {
                acc = acc.add(&x.0[i].mul(&y.0[j]).mul(&self.g[i][j]));
            }
        }
        acc
    }

    /// Lowers an index: the covariant components of a real field.
    pub fn lower(&self, x: &RealVectorField) -> [Expr; 3] {
        let mut out: [Expr; 3] = Default::default();
        for i in 0..3 {
            let mut acc = Expr::zero();
            for j in 0..3 {
                acc = acc.add(&self.g[i][j].mul(&x.0[j]));
            }
            out[i] = acc;
        }
        out
    }

    /// Raises an index: the vector field dual to a covariant 1-form.
    pub fn raise(&self, omega: &[Expr; 3]) -> RealVectorField {
        let mut out = RealVectorField::zero();
        for i in 0..3 {
            let mut acc = Expr::zero();
            for j in 0..3 {
                acc = acc.add(&self.g_inv[i][j].mul(&omega[j]));
            }
            out.0[i] = acc;
        }
        out
    }
}

/// Levi-Civita covariant derivative of `x` along `along`:
/// `(nabla_A X)^k = A^i d_i X^k + A^i X^j G^k_ij`, componentwise on the
/// complex parts.
pub fn covariant_derivative(
    x: &VectorField,
    along: &VectorField,
    m: &MetricData,
) -> VectorField {
    let mut out = VectorField::zero();
    for k in 0..3 {
        let mut acc = ComplexField::zero();
        for i in 0..3 {
            let dx_k = ComplexField::new(x.0[k].re.diff(i), x.0[k].im.diff(i));
            acc = acc.add(&along.0[i].mul(&dx_k));
            for j in 0..3 {
                acc = acc.add(&along.0[i].mul(&x.0[j]).scale(&m.gamma[k][i][j]));
            }
        }
        out.0[k] = acc;
    }
    out
}

/// Lie bracket `[X, Y]^k = X^i d_i Y^k - Y^i d_i X^k` (metric-independent).
pub fn lie_bracket(x: &VectorField, y: &VectorField) -> VectorField {
    let mut out = VectorField::zero();
    for k in 0..3 {
        let mut acc = ComplexField::zero();
        for i in 0..3 {
            let dy_k = ComplexField::new(y.0[k].re.diff(i), y.0[k].im.diff(i));
            let dx_k = ComplexField::new(x.0[k].re.diff(i), x.0[k].im.diff(i));
            acc = acc.add(&x.0[i].mul(&dy_k));
            acc = acc.sub(&y.0[i].mul(&dx_k));
        }
        out.0[k] = acc;
    }
    out
}

/// Riemannian divergence `div X = (1/sqrt(det g)) d_i (sqrt(det g) X^i)`.
pub fn divergence(x: &VectorField, m: &MetricData) -> ComplexField {
    let mut acc = ComplexField::zero();
    for i in 0..3 {
        let weighted_re = m.sqrt_det.mul(&x.0[i].re);
        let weighted_im = m.sqrt_det.mul(&x.0[i].im);
        acc = acc.add(&ComplexField::new(weighted_re.diff(i), weighted_im.diff(i)));
    }
    ComplexField::new(acc.re.div(&m.sqrt_det), acc.im.div(&m.sqrt_det))
}

/// Gradient `(grad f)^k = g^{ki} d_i f`, componentwise complex.
pub fn gradient(f: &ComplexField, m: &MetricData) -> VectorField {
    let mut out = VectorField::zero();
    for k in 0..3 {
        let mut acc = ComplexField::zero();
        for i in 0..3 {
            let df = ComplexField::new(f.re.diff(i), f.im.diff(i));
            acc = acc.add(&df.scale(&m.g_inv[k][i]));
        }
        out.0[k] = acc;
    }
    out
}

/// Full Riemann tensor `R^l_kij` (an independent path to Ricci used by the
/// dual-route tests): `R(d_i, d_j) d_k = R^l_kij d_l`.
pub fn riemann(m: &MetricData) -> [[[[Expr; 3]; 3]; 3]; 3] {
    let mut r: [[[[Expr; 3]; 3]; 3]; 3] = Default::default();
    for l in 0..3 {
        for k in 0..3 {
            for i in 0..3 {
                for j in 0..3 {
                    let mut acc = m.gamma[l][j][k].diff(i).sub(&m.gamma[l][i][k].diff(j));
                    for s in 0..3 {
                        acc = acc.add(&m.gamma[l][i][s].mul(&m.gamma[s][j][k]));
                        acc = acc.sub(&m.gamma[l][j][s].mul(&m.gamma[s][i][k]));
                    }
                    r[l][k][i][j] = acc;
                }
            }
        }
    }
    r
}

/// Ricci by contracting the Riemann tensor, `Ric_kj = R^i_kij`.
pub fn ricci_from_riemann(m: &MetricData) -> [[Expr; 3]; 3] {
    let riem = riemann(m);
    let mut out: [[Expr; 3]; 3] = Default::default();
    for k in 0..3 {
        for j in 0..3 {
            let mut acc = Expr::zero();
            for i in 0..3 {
                acc = acc.add(&riem[i][k][i][j]);
            }
            out[k][j] = acc;
        }
    }
    out
}

/// Contracted second Bianchi residual `g^{ij} nabla_i Ric_{jk} - (1/2) d_k Scal`
/// in coordinates; identically zero, used as the independent oracle for the
/// frame-form Bianchi residuals.
pub fn div_ricci_residual(m: &MetricData) -> [Expr; 3] {
    // nabla_i Ric_jk = d_i Ric_jk - G^l_ij Ric_lk - G^l_ik Ric_jl
    let mut out: [Expr; 3] = Default::default();
    for k in 0..3 {
        let mut acc = Expr::zero();
        for i in 0..3 {
            for j in 0..3 {
                let mut term = m.ricci[j][k].diff(i);
                for l in 0..3 {
                    term = term.sub(&m.gamma[l][i][j].mul(&m.ricci[l][k]));
                    term = term.sub(&m.gamma[l][i][k].mul(&m.ricci[j][l]));
                }
                acc = acc.add(&m.g_inv[i][j].mul(&term));
            }
        }
        out[k] = acc.sub(&Expr::constant(0.5).mul(&m.scalar_curv.diff(k)));
    }
    out
}
