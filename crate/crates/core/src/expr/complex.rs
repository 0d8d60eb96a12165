//! Complex scalar fields as (re, im) pairs of expressions.

use num_complex::Complex64;

use super::{EvalError, Expr, Params, Point};

/// Complex-valued scalar field on the chart; both parts are real
/// expressions. All the spin-coefficient scalars live here.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexField {
    pub re: Expr,
    pub im: Expr,
}

impl Default for ComplexField {
    fn default() -> Self {
        ComplexField::zero()
    }
}

impl ComplexField {
    pub fn new(re: Expr, im: Expr) -> Self {
        ComplexField { re, im }
    }

    pub fn from_real(re: Expr) -> Self {
        ComplexField {
            re,
            im: Expr::zero(),
        }
    }

    pub fn zero() -> Self {
        ComplexField {
            re: Expr::zero(),
            im: Expr::zero(),
        }
    }

    pub fn constant(c: Complex64) -> Self {
        ComplexField {
            re: Expr::constant(c.re),
            im: Expr::constant(c.im),
        }
    }

    pub fn conj(&self) -> Self {
        ComplexField {
            re: self.re.clone(),
            im: self.im.neg(),
        }
    }

    pub fn add(&self, rhs: &Self) -> Self {
        ComplexField {
            re: self.re.add(&rhs.re),
            im: self.im.add(&rhs.im),
        }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        ComplexField {
            re: self.re.sub(&rhs.re),
            im: self.im.sub(&rhs.im),
        }
    }

    pub fn neg(&self) -> Self {
        ComplexField {
            re: self.re.neg(),
            im: self.im.neg(),
        }
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        ComplexField {
            re: self.re.mul(&rhs.re).sub(&self.im.mul(&rhs.im)),
            im: self.re.mul(&rhs.im).add(&self.im.mul(&rhs.re)),
        }
    }

    /// Multiplication by the imaginary unit.
    pub fn mul_i(&self) -> Self {
        ComplexField {
            re: self.im.neg(),
            im: self.re.clone(),
        }
    }

    pub fn scale(&self, s: &Expr) -> Self {
        ComplexField {
            re: self.re.mul(s),
            im: self.im.mul(s),
        }
    }

    pub fn scale_f64(&self, s: f64) -> Self {
        self.scale(&Expr::constant(s))
    }

    /// |q|^2 as a real expression.
    pub fn modulus_sq(&self) -> Expr {
        self.re.powi(2).add(&self.im.powi(2))
    }

    /// e^{i s} for a real expression s.
    pub fn phase(s: &Expr) -> Self {
        ComplexField {
            re: s.cos(),
            im: s.sin(),
        }
    }

    pub fn eval(&self, point: Point, params: &Params) -> Result<Complex64, EvalError> {
        Ok(Complex64::new(
            self.re.eval(point, params)?,
            self.im.eval(point, params)?,
        ))
    }
}
