//! Golden structures shared by the unit tests: small closed-form metrics
//! whose spin coefficients were computed by hand (or with a CAS) before the
//! implementation existed.

use crate::expr::{parse_expression, Expr, Params, Point};
use crate::frame::{build_frame, Frame, ReebSpec};
use crate::geometry::{build_metric, MetricData};
use crate::grid::{DomainBox, Grid};

pub fn parse(src: &str) -> Expr {
    parse_expression(src, &["x", "y", "z"], &[]).unwrap()
}

pub fn probe_points() -> Vec<Point> {
    let mut pts = Vec::new();
    for &a in &[-0.4, 0.1, 0.5] {
        for &b in &[-0.3, 0.2, 0.6] {
            for &c in &[-0.5, 0.0, 0.4] {
                pts.push([a, b, c]);
            }
        }
    }
    pts
}

pub fn metric_from(strings: [&str; 6], probe: &[Point]) -> MetricData {
    let c: Vec<Expr> = strings.iter().map(|s| parse(s)).collect();
    build_metric(
        &[
            c[0].clone(),
            c[1].clone(),
            c[2].clone(),
            c[3].clone(),
            c[4].clone(),
            c[5].clone(),
        ],
        probe,
        &Params::new(),
    )
    .unwrap()
}

/// A golden example: metric, adapted frame, sample grid.
pub struct Golden {
    pub m: MetricData,
    pub frame: Frame,
    pub grid: Grid,
    pub params: Params,
}

fn assemble(
    strings: [&str; 6],
    reeb: ReebSpec,
    orientation: i8,
    domain: DomainBox,
    n: usize,
) -> Golden {
    let grid = Grid::uniform(domain, n, &[]);
    let m = metric_from(strings, &grid.points);
    let frame = build_frame(&m, &reeb, orientation, &grid.points, domain.center(), &Params::new())
        .unwrap();
    Golden {
        m,
        frame,
        grid,
        params: Params::new(),
    }
}

fn xi_z() -> ReebSpec {
    ReebSpec::Xi([Expr::zero(), Expr::zero(), Expr::one()])
}

/// Flat metric, xi = d_z: the cosymplectic golden.
pub fn flat() -> Golden {
    assemble(
        ["1", "0", "0", "1", "0", "1"],
        xi_z(),
        1,
        DomainBox::new([-1.0, -1.0, -1.0], [1.0, 1.0, 1.0]),
        3,
    )
}

/// g = dz^2 + e^{2z}(dx^2 + dy^2): Kenmotsu with Theta = 1.
/// Hand oracle: kappa = sigma = 0, rho = 1, epsilon = beta = 0, Ric = -2g.
pub fn hyperbolic_kenmotsu() -> Golden {
    assemble(
        ["exp(2*z)", "0", "0", "exp(2*z)", "0", "1"],
        xi_z(),
        1,
        DomainBox::new([-1.0, -1.0, -0.5], [1.0, 1.0, 0.5]),
        3,
    )
}

/// g = dx^2 + dy^2 + (dz - y dx)^2: quasi-Sasakian Heisenberg.
/// Hand oracle (orientation +1): Theta = sigma = kappa = 0, omega = -1/2,
/// epsilon = i/2, beta = 0, Ric(xi,xi) = 1/2.
pub fn heisenberg() -> Golden {
    assemble(
        ["1 + y^2", "0", "-y", "1", "0", "1"],
        xi_z(),
        1,
        DomainBox::new([-1.0, -1.0, -1.0], [1.0, 1.0, 1.0]),
        3,
    )
}

/// g = (1/2)(dx^2 + dy^2) + (dz - y dx)^2 with orientation -1: the
/// Sasakian normalization (omega = +1).
pub fn heisenberg_sasakian() -> Golden {
    assemble(
        ["0.5 + y^2", "0", "-y", "0.5", "0", "1"],
        xi_z(),
        -1,
        DomainBox::new([-1.0, -1.0, -1.0], [1.0, 1.0, 1.0]),
        3,
    )
}

/// Sheared contact metric structure on a solvable group chart:
/// g = (5/16)e^{-2y}dx^2 + dy^2 + (5/16)e^{2y}dz^2 + (3/8)dx dz,
/// xi = (e^y, 0, e^{-y}), orientation -1.
/// Hand oracle from the Milnor-frame bracket coefficients (c1, c2, c3) =
/// (2, -1/2, 0): omega = 1, Theta = 0, kappa = 0, sigma = -i/4 in the
/// built frame, k = 15/16, mu = 5/2, nu = 0, Ric(xi,xi) = 15/8.
pub fn sheared_contact() -> Golden {
    assemble(
        [
            "0.3125*exp(-2*y)",
            "0",
            "0.1875",
            "1",
            "0",
            "0.3125*exp(2*y)",
        ],
        ReebSpec::Xi([parse("exp(y)"), Expr::zero(), parse("exp(-y)")]),
        -1,
        DomainBox::new([-1.0, -0.6, -1.0], [1.0, 0.6, 1.0]),
        3,
    )
}

/// The rank-3 eta-Einstein example that is neither alpha-Sasakian nor
/// beta-Kenmotsu: g = (1/2)(z^2 + sin^2 y)(dx^2 + dy^2) + (dz + cos y dx)^2
/// with eta = dz + cos(y) dx, away from its singular lines.
/// Hand oracle: kappa = sigma = 0, rho = 1/(z + i sin y).
pub fn remark() -> Golden {
    assemble(
        [
            "0.5*(z^2 + sin(y)^2) + cos(y)^2",
            "0",
            "cos(y)",
            "0.5*(z^2 + sin(y)^2)",
            "0",
            "1",
        ],
        ReebSpec::Eta([parse("cos(y)"), Expr::zero(), Expr::one()]),
        1,
        DomainBox::new([0.0, 0.5, 0.5], [1.0, 2.5, 1.5]),
        3,
    )
}

/// Warped anisotropic product g = f(z)^2 dx^2 + h(z)^2 dy^2 + dz^2 with
/// xi = d_z: geodesic (kappa = 0) with twist-free shear and expansion.
/// Hand oracle: Theta = (f'/f + h'/h)/2, sigma = (h'/h - f'/f)/2, omega = 0.
pub fn warped_sheared() -> Golden {
    assemble(
        ["exp(2*z)", "0", "0", "exp(0.6*z^2)", "0", "1"],
        xi_z(),
        1,
        DomainBox::new([-1.0, -1.0, -0.5], [1.0, 1.0, 0.5]),
        3,
    )
}

/// Flat metric with a z-dependent tilt of xi: kappa != 0, for testing the
/// geodesic gates.
pub fn tilted_flat() -> Golden {
    assemble(
        ["1", "0", "0", "1", "0", "1"],
        ReebSpec::Xi([parse("cos(0.7*z)"), Expr::zero(), parse("sin(0.7*z)")]),
        1,
        DomainBox::new([-1.0, -1.0, -0.4], [1.0, 1.0, 0.4]),
        3,
    )
}
