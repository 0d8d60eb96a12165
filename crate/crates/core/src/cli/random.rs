//! Seeded random structures for the property suites: metrics of the form
//! `I + amplitude * S(x)` with trigonometric-polynomial perturbations, and a
//! geodesic variant whose Reeb field is exactly `d_z`.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::expr::{Expr, Params};
use crate::frame::{build_frame, Frame, ReebSpec};
use crate::geometry::{build_metric, GeometryError, MetricData};
use crate::grid::{DomainBox, Grid};

#[derive(Debug, thiserror::Error)]
pub enum RandomError {
    #[error("amplitude {0} outside (0, 0.3]")]
    BadAmplitude(f64),
    #[error("seed {0}: no positive-definite metric after 8 attempts")]
    NotPositiveDefinite(u64),
    #[error("frame construction failed: {0}")]
    Frame(#[from] crate::frame::FrameError),
}

pub fn default_domain() -> DomainBox {
    DomainBox::new([-1.0, -1.0, -1.0], [1.0, 1.0, 1.0])
}

fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    let u = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
    lo + u * (hi - lo)
}

/// One trig factor with integer wave vector in {-1,0,1}^3 (not all zero).
fn trig_factor(rng: &mut ChaCha8Rng) -> Expr {
    let mut wave = [0i32; 3];
    loop {
        for w in wave.iter_mut() {
            *w = (rng.next_u64() % 3) as i32 - 1;
        }
        if wave.iter().any(|&w| w != 0) {
            break;
        }
    }
    let mut arg = Expr::zero();
    for (i, &w) in wave.iter().enumerate() {
        if w != 0 {
            arg = arg.add(&Expr::constant(w as f64).mul(&Expr::coord(i)));
        }
    }
    if rng.next_u64() % 2 == 0 {
        arg.sin()
    } else {
        arg.cos()
    }
}

/// Trigonometric polynomial of degree <= 2:
/// c0 + c1 * T1 + c2 * T2 * T3 with coefficients in [-1, 1].
fn trig_poly(rng: &mut ChaCha8Rng) -> Expr {
    let c0 = Expr::constant(uniform(rng, -0.5, 0.5));
    let t1 = trig_factor(rng).mul(&Expr::constant(uniform(rng, -1.0, 1.0)));
    let t2 = trig_factor(rng)
        .mul(&trig_factor(rng))
        .mul(&Expr::constant(uniform(rng, -1.0, 1.0)));
    c0.add(&t1).add(&t2)
}

fn xy_trig_poly(rng: &mut ChaCha8Rng) -> Expr {
    // z-independent variant used by the geodesic family
    let mut wave = [0i32; 2];
    let mut factor = |rng: &mut ChaCha8Rng| {
        loop {
            for w in wave.iter_mut() {
                *w = (rng.next_u64() % 3) as i32 - 1;
            }
            if wave.iter().any(|&w| w != 0) {
                break;
            }
        }
        let mut arg = Expr::zero();
        for (i, &w) in wave.iter().enumerate() {
            if w != 0 {
                arg = arg.add(&Expr::constant(w as f64).mul(&Expr::coord(i)));
            }
        }
        if rng.next_u64() % 2 == 0 {
            arg.sin()
        } else {
            arg.cos()
        }
    };
    let c0 = Expr::constant(uniform(rng, -0.5, 0.5));
    let t1 = factor(rng).mul(&Expr::constant(uniform(rng, -1.0, 1.0)));
    c0.add(&t1)
}

fn attempt_seed(seed: u64, attempt: u64) -> u64 {
    seed.wrapping_add(attempt.wrapping_mul(0x9e37_79b9_7f4a_7c15))
}

/// Random structure `g = I + amplitude S(x)` with a perturbed unit Reeb
/// field, built with orientation +1. Retries up to 8 seed-derived
/// perturbations before giving up on positive definiteness.
pub fn random_structure(
    seed: u64,
    amplitude: f64,
    grid: &Grid,
) -> Result<(MetricData, Frame), RandomError> {
    if !(amplitude > 0.0 && amplitude <= 0.3) {
        return Err(RandomError::BadAmplitude(amplitude));
    }
    let params = Params::new();
    for attempt in 0..8 {
        let mut rng = ChaCha8Rng::seed_from_u64(attempt_seed(seed, attempt));
        let amp = Expr::constant(amplitude);
        let mut comps: [Expr; 6] = Default::default();
        for (i, is_diag) in [(0, true), (1, false), (2, false), (3, true), (4, false), (5, true)] {
            let s = amp.mul(&trig_poly(&mut rng));
            comps[i] = if is_diag { Expr::one().add(&s) } else { s };
        }
        let m = match build_metric(&comps, &grid.points, &params) {
            Ok(m) => m,
            Err(GeometryError::Degenerate(..)) => continue,
            Err(GeometryError::Eval(..)) => continue,
        };
        let xi = ReebSpec::Xi([
            amp.mul(&trig_poly(&mut rng)),
            amp.mul(&trig_poly(&mut rng)),
            Expr::one().add(&amp.mul(&trig_poly(&mut rng))),
        ]);
        match build_frame(&m, &xi, 1, &grid.points, grid.domain.center(), &params) {
            Ok(f) => return Ok((m, f)),
            Err(_) => continue,
        }
    }
    Err(RandomError::NotPositiveDefinite(seed))
}

/// Random structure whose Reeb field is exactly geodesic: `g_zz = 1` with
/// z-independent `g_xz`, `g_yz`, so `xi = d_z` is unit with `kappa = 0`
/// identically, while expansion, twist and shear stay generic.
pub fn random_geodesic_structure(
    seed: u64,
    amplitude: f64,
    grid: &Grid,
) -> Result<(MetricData, Frame), RandomError> {
    if !(amplitude > 0.0 && amplitude <= 0.3) {
        return Err(RandomError::BadAmplitude(amplitude));
    }
    let params = Params::new();
    for attempt in 0..8 {
        let mut rng = ChaCha8Rng::seed_from_u64(attempt_seed(seed, attempt));
        let amp = Expr::constant(amplitude);
        let comps: [Expr; 6] = [
            Expr::one().add(&amp.mul(&trig_poly(&mut rng))), // g11
            amp.mul(&trig_poly(&mut rng)),                   // g12
            amp.mul(&xy_trig_poly(&mut rng)),                // g13 (z-free)
            Expr::one().add(&amp.mul(&trig_poly(&mut rng))), // g22
            amp.mul(&xy_trig_poly(&mut rng)),                // g23 (z-free)
            Expr::one(),                                     // g33
        ];
        let m = match build_metric(&comps, &grid.points, &params) {
            Ok(m) => m,
            Err(_) => continue,
        };
        let xi = ReebSpec::Xi([Expr::zero(), Expr::zero(), Expr::one()]);
        match build_frame(&m, &xi, 1, &grid.points, grid.domain.center(), &params) {
            Ok(f) => return Ok((m, f)),
            Err(_) => continue,
        }
    }
    Err(RandomError::NotPositiveDefinite(seed))
}

/// Seeded non-constant gauge angle for covariance sweeps.
pub fn random_gauge_angle(seed: u64, amplitude: f64) -> Expr {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x2545_f491_4f6c_dd1d));
    Expr::constant(amplitude)
        .mul(&trig_poly(&mut rng))
        .add(&Expr::constant(amplitude * 0.5).mul(&trig_poly(&mut rng)))
}
