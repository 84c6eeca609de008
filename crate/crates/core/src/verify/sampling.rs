//! Seeded random smooth fields and profiles for the property suites.

use crate::geometry::{SU3Background, WarpedProfile};
use crate::numerics::{Field, Grid};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Low-order trigonometric polynomial around `offset`, with the mode-`m`
/// coefficient drawn from `[-amplitude, amplitude]/m^2`; periodic, so valid
/// on any topology.
pub fn smooth_field(rng: &mut ChaCha8Rng, grid: Grid, offset: f64, amplitude: f64) -> Field {
    let modes = 3;
    let coeffs: Vec<(f64, f64)> = (0..modes)
        .map(|m| {
            let cap = amplitude / ((m + 1) * (m + 1)) as f64;
            (rng.gen_range(-cap..cap), rng.gen_range(-cap..cap))
        })
        .collect();
    let span = grid.r_max() - grid.r_min();
    let base = grid.r_min();
    Field::from_fn(grid, |r| {
        let x = 2.0 * std::f64::consts::PI * (r - base) / span;
        offset
            + coeffs
                .iter()
                .enumerate()
                .map(|(m, (a, b))| {
                    let k = (m + 1) as f64;
                    a * (k * x).sin() + b * (k * x).cos()
                })
                .sum::<f64>()
    })
}

/// Random profile with generic torsion (gamma not small).
pub fn random_profile(rng: &mut ChaCha8Rng, grid: Grid, lambda: f64) -> WarpedProfile {
    let g = smooth_field(rng, grid, 0.0, 0.2).map(f64::exp);
    let h = smooth_field(rng, grid, 2.0, 0.25);
    let theta_offset = rng.gen_range(-1.0..1.0);
    let theta = smooth_field(rng, grid, theta_offset, 0.4);
    WarpedProfile::new(g, h, theta, SU3Background::new(lambda))
}

/// Random co-closed nearly-Kahler profile: all three fields are closed
/// forms chosen so `gamma = h'/h + lambda G cos(theta)/h` vanishes
/// identically, with the phase solved from the other two:
///
/// ```text
/// G = exp(b sin(r + phi)),  h = h0 + c sin(r + phi),
/// theta = arccos(-c cos(r + phi) / (lambda G))
/// ```
pub fn random_coclosed_nk_profile(rng: &mut ChaCha8Rng, grid: Grid) -> WarpedProfile {
    let lambda = 1.0;
    let b = rng.gen_range(0.03..0.1);
    let c = rng.gen_range(0.05..0.12);
    let phi = rng.gen_range(0.0..std::f64::consts::TAU);
    let h0 = rng.gen_range(2.0..2.6);
    let g = Field::from_fn(grid, |r| (b * (r + phi).sin()).exp());
    let h = Field::from_fn(grid, |r| h0 + c * (r + phi).sin());
    let theta = Field::from_fn(grid, |r| {
        let cos_theta = -c * (r + phi).cos() / (lambda * (b * (r + phi).sin()).exp());
        cos_theta.acos()
    });
    WarpedProfile::new(g, h, theta, SU3Background::new(lambda))
}
