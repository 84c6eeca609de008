//! Warped-product G2-structure profiles, their torsion in the (alpha, beta,
//! gamma) coordinates, conformal transformations, and reconstruction of a
//! profile from its torsion.
//!
//! A profile consists of a warp factor `G > 0` on `dr`, a fiber scale `h`
//! (nowhere zero, either sign), a phase `theta` (stored unwrapped; structures
//! are compared through `e^{i theta}`), and the SU(3) background constant
//! `lambda` (`0` Calabi-Yau, conventionally `1` nearly Kahler). The torsion
//! coordinates are
//!
//! ```text
//! alpha = theta'/G,   beta = lambda sin(theta)/h,
//! gamma = h'/h + lambda G cos(theta)/h,
//! ```
//!
//! and `gamma = 0` is the co-closed condition.
//!
//! Note on conventions: the components `tau1`, `tau7`, `tau27` are
//! normalized as pieces of the full torsion tensor `T`. Some references
//! instead normalize them as coefficients inside the exterior derivatives
//! of the defining forms, which rescales them (their `tau_0` is `4 tau1`,
//! their `tau_1` is `-tau7`, and so on); that convention is not used here.

use crate::numerics::{diff, quadrature, Field, Grid};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("conformal factor vanishes somewhere (min |f| = {min_abs:.3e})")]
    ZeroConformalFactor { min_abs: f64 },
    #[error("torsion is degenerate for the generic reconstruction: {0}")]
    DegenerateTorsion(&'static str),
    #[error("lambda^2 - h^2 beta^2 not positive at r = {r:.6} (value {value:.3e})")]
    NegativeRadicand { r: f64, value: f64 },
    #[error("no degenerate reconstruction branch matches the torsion")]
    NoBranchMatched,
}

/// SU(3)-structure class of the 6-dimensional factor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SU3Background {
    pub lambda: f64,
}

impl SU3Background {
    pub fn new(lambda: f64) -> Self {
        assert!(lambda.is_finite(), "lambda must be finite");
        SU3Background { lambda }
    }

    pub fn calabi_yau() -> Self {
        Self::new(0.0)
    }

    pub fn nearly_kahler() -> Self {
        Self::new(1.0)
    }

    pub fn is_calabi_yau(&self) -> bool {
        self.lambda == 0.0
    }
}

/// Complete state of a warped G2-structure over a 1-dimensional grid.
#[derive(Debug, Clone)]
pub struct WarpedProfile {
    pub grid: Grid,
    /// warp factor on dr, positive
    pub g: Field,
    /// fiber scale, nowhere zero with a single sign
    pub h: Field,
    /// phase, unwrapped
    pub theta: Field,
    pub background: SU3Background,
}

impl WarpedProfile {
    /// # Panics
    /// Panics if the fields live on different grids, `G` is not positive, or
    /// `h` vanishes or changes sign.
    pub fn new(g: Field, h: Field, theta: Field, background: SU3Background) -> Self {
        let grid = g.grid();
        assert_eq!(grid, h.grid(), "profile fields must share a grid");
        assert_eq!(grid, theta.grid(), "profile fields must share a grid");
        assert!(
            g.values().iter().all(|&v| v > 0.0),
            "warp factor G must be positive"
        );
        let sign = h.value(0).signum();
        assert!(
            h.values().iter().all(|&v| v != 0.0 && v.signum() == sign),
            "fiber scale h must be nowhere zero with a single sign"
        );
        WarpedProfile {
            grid,
            g,
            h,
            theta,
            background,
        }
    }

    pub fn lambda(&self) -> f64 {
        self.background.lambda
    }
}

/// Torsion coordinates (alpha, beta, gamma), units 1/length.
#[derive(Debug, Clone)]
pub struct TorsionABC {
    pub alpha: Field,
    pub beta: Field,
    pub gamma: Field,
}

impl TorsionABC {
    pub fn new(alpha: Field, beta: Field, gamma: Field) -> Self {
        assert_eq!(
            alpha.grid(),
            beta.grid(),
            "torsion fields must share a grid"
        );
        assert_eq!(
            alpha.grid(),
            gamma.grid(),
            "torsion fields must share a grid"
        );
        TorsionABC { alpha, beta, gamma }
    }

    pub fn grid(&self) -> Grid {
        self.alpha.grid()
    }

    pub fn max_magnitude(&self) -> f64 {
        self.alpha
            .max_abs()
            .max(self.beta.max_abs())
            .max(self.gamma.max_abs())
    }
}

/// Torsion split into its irreducible components.
///
/// The 14-dimensional component vanishes identically for warped products,
/// so it has no slot here.
#[derive(Debug, Clone)]
pub struct TorsionComponents {
    /// scalar component, (alpha - 6 beta)/7
    pub tau1: Field,
    /// tau7 = tau7_coeff * dr, with tau7_coeff = -gamma
    pub tau7_coeff: Field,
    /// tau27 with one index raised is tau27_scale * diag(6, -delta_6)
    pub tau27_scale: Field,
    /// trace of the full torsion tensor, alpha - 6 beta
    pub trace_t: Field,
}

/// Full torsion tensor `T` with one index raised:
/// `diag(alpha, -beta delta_6) - (gamma/G) J_6`.
#[derive(Debug, Clone)]
pub struct FullTorsion {
    /// rr entry of the symmetric part, alpha
    pub diag_r: Field,
    /// repeated 6-block entry of the symmetric part, -beta
    pub diag_6: Field,
    /// coefficient of J_6 (the skew part), -gamma/G
    pub j6_coeff: Field,
}

/// Torsion class predicates at a given absolute tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClassFlags {
    pub torsion_free: bool,
    pub closed: bool,
    pub co_closed: bool,
    pub nearly_parallel: bool,
    pub pure_27: bool,
}

/// Torsion coordinates of a profile, evaluated pointwise.
pub fn compute_abc(p: &WarpedProfile) -> TorsionABC {
    let lambda = p.lambda();
    let theta_prime = diff(&p.theta);
    let h_prime = diff(&p.h);
    let alpha = theta_prime.zip_with(&p.g, |tp, g| tp / g);
    // beta stays exactly zero on a Calabi-Yau background
    let beta = if lambda == 0.0 {
        Field::zeros(p.grid)
    } else {
        p.theta.zip_with(&p.h, |th, h| lambda * th.sin() / h)
    };
    let mut gamma_vals = Vec::with_capacity(p.grid.len());
    for i in 0..p.grid.len() {
        let h = p.h.value(i);
        let g = p.g.value(i);
        let th = p.theta.value(i);
        gamma_vals.push(h_prime.value(i) / h + lambda * g * th.cos() / h);
    }
    TorsionABC::new(alpha, beta, Field::new(p.grid, gamma_vals))
}

/// Irreducible torsion components from the (alpha, beta, gamma) coordinates.
pub fn torsion_components(t: &TorsionABC) -> TorsionComponents {
    TorsionComponents {
        tau1: t.alpha.zip_with(&t.beta, |a, b| (a - 6.0 * b) / 7.0),
        tau7_coeff: t.gamma.map(|c| -c),
        tau27_scale: t.alpha.zip_with(&t.beta, |a, b| (a + b) / 7.0),
        trace_t: t.alpha.zip_with(&t.beta, |a, b| a - 6.0 * b),
    }
}

/// Full torsion tensor of a torsion triple, given the warp factor `G`.
///
/// # Panics
/// Panics if `G` is not positive or lives on a different grid.
pub fn full_torsion(t: &TorsionABC, g: &Field) -> FullTorsion {
    assert_eq!(
        t.grid(),
        g.grid(),
        "torsion and warp factor must share a grid"
    );
    assert!(
        g.values().iter().all(|&v| v > 0.0),
        "warp factor G must be positive"
    );
    FullTorsion {
        diag_r: t.alpha.clone(),
        diag_6: t.beta.map(|b| -b),
        j6_coeff: t.gamma.zip_with(g, |c, g| -c / g),
    }
}

/// Torsion class flags at absolute tolerance `tol`.
///
/// `co_closed` checks `max|gamma|`; `torsion_free` checks all three
/// coordinates; `nearly_parallel` additionally requires `alpha + beta = 0`
/// with constant `tau1`; `pure_27` requires `alpha - 6 beta = 0`. Since the
/// 14-component vanishes structurally, `closed` coincides with
/// `torsion_free`.
pub fn torsion_class(t: &TorsionABC, tol: f64) -> ClassFlags {
    assert!(tol > 0.0, "tolerance must be positive");
    let co_closed = t.gamma.max_abs() <= tol;
    let torsion_free = co_closed && t.alpha.max_abs() <= tol && t.beta.max_abs() <= tol;
    let comps = torsion_components(t);
    let tau1_mean = comps.tau1.values().iter().sum::<f64>() / comps.tau1.len() as f64;
    let tau1_const = comps
        .tau1
        .values()
        .iter()
        .all(|&v| (v - tau1_mean).abs() <= tol);
    let nearly_parallel = co_closed && comps.tau27_scale.max_abs() <= tol / 7.0 && tau1_const;
    let pure_27 = co_closed && comps.trace_t.max_abs() <= tol;
    ClassFlags {
        torsion_free,
        closed: torsion_free,
        co_closed,
        nearly_parallel,
        pure_27,
    }
}

/// Default classification tolerance: 1e-9 relative to the largest coordinate.
pub fn default_class_tol(t: &TorsionABC) -> f64 {
    1e-9 * t.max_magnitude().max(1.0)
}

/// Torsion of the conformally transformed structure with factor `f`:
/// `alpha/f`, `beta/f`, `f'/f + gamma`.
///
/// The logarithmic derivative is evaluated as `(ln|f|)'`, which makes
/// composing two transformations agree with the product factor to rounding.
pub fn conformal_transform(t: &TorsionABC, f: &Field) -> Result<TorsionABC, GeometryError> {
    assert_eq!(
        t.grid(),
        f.grid(),
        "conformal factor must share the torsion grid"
    );
    let min_abs = f.min_abs();
    if min_abs < 1e-13 * f.max_abs().max(1.0) {
        return Err(GeometryError::ZeroConformalFactor { min_abs });
    }
    let log_deriv = diff(&f.map(|v| v.abs().ln()));
    Ok(TorsionABC::new(
        t.alpha.zip_with(f, |a, f| a / f),
        t.beta.zip_with(f, |b, f| b / f),
        log_deriv.zip_with(&t.gamma, |q, c| q + c),
    ))
}

/// Conformal factor `f = exp(-int_{r0}^{r} gamma)` that removes the
/// 7-component of the torsion, together with the transformed torsion.
///
/// The returned gamma is set to zero exactly rather than recomputed. On a
/// Circle the factor is single-valued only if gamma integrates to zero over
/// the period.
pub fn gauge_fix_gamma(t: &TorsionABC, r0: f64) -> (TorsionABC, Field) {
    let f = quadrature(&t.gamma, r0).map(|v| (-v).exp());
    let fixed = TorsionABC::new(
        t.alpha.zip_with(&f, |a, f| a / f),
        t.beta.zip_with(&f, |b, f| b / f),
        Field::zeros(t.grid()),
    );
    (fixed, f)
}

fn nowhere_zero(f: &Field, scale: f64) -> bool {
    f.min_abs() > 1e-12 * scale.max(1.0)
}

/// Reconstruct the profile of a co-closed torsion triple on a non-degenerate
/// background.
///
/// Requires `lambda != 0`, `alpha`, `beta` and `alpha + beta` nowhere zero,
/// and a positive radicand `lambda^2 - h^2 beta^2`. The fiber scale is fixed
/// by the constant `h0 = h(r0)`; the sine of the phase follows from
/// `s0 = beta(r0) h0 / lambda` and the phase itself from integrating
/// `theta' = alpha G` out of `theta(r0)`.
pub fn reconstruct_profile(
    t: &TorsionABC,
    background: SU3Background,
    h0: f64,
    r0: f64,
) -> Result<WarpedProfile, GeometryError> {
    let lambda = background.lambda;
    if lambda == 0.0 {
        return Err(GeometryError::DegenerateTorsion("lambda must be nonzero"));
    }
    assert!(h0 != 0.0 && h0.is_finite(), "h0 must be a nonzero real");
    let grid = t.grid();
    assert!(grid.contains(r0), "r0 must lie inside the grid range");
    let scale = t.max_magnitude();
    if t.gamma.max_abs() > 1e-9 * scale.max(1.0) {
        return Err(GeometryError::DegenerateTorsion("gamma must vanish"));
    }
    if !nowhere_zero(&t.alpha, scale) {
        return Err(GeometryError::DegenerateTorsion("alpha vanishes somewhere"));
    }
    if !nowhere_zero(&t.beta, scale) {
        return Err(GeometryError::DegenerateTorsion("beta vanishes somewhere"));
    }
    let apb = t.alpha.zip_with(&t.beta, |a, b| a + b);
    if !nowhere_zero(&apb, scale) {
        return Err(GeometryError::DegenerateTorsion(
            "alpha + beta vanishes somewhere",
        ));
    }

    let beta_prime = diff(&t.beta);
    // h = h0 exp(-int beta'/(alpha+beta))
    let h_exp = quadrature(&beta_prime.zip_with(&apb, |bp, s| bp / s), r0);
    let h = h_exp.map(|v| h0 * (-v).exp());

    // G^2 = (h')^2 / (lambda^2 - h^2 beta^2)
    let h_prime = diff(&h);
    let mut g_vals = Vec::with_capacity(grid.len());
    for i in 0..grid.len() {
        let rad = lambda * lambda - h.value(i) * h.value(i) * t.beta.value(i) * t.beta.value(i);
        if rad <= 0.0 {
            return Err(GeometryError::NegativeRadicand {
                r: grid.node(i),
                value: rad,
            });
        }
        let g = (h_prime.value(i) * h_prime.value(i) / rad).sqrt();
        if g <= 0.0 {
            return Err(GeometryError::DegenerateTorsion(
                "warp factor degenerates where h' vanishes",
            ));
        }
        g_vals.push(g);
    }
    let g = Field::new(grid, g_vals);

    // theta from theta' = alpha G, anchored by sin(theta(r0)) = s0 and the
    // sign of cos(theta(r0)) = -h'(r0)/(lambda G(r0))
    let i0 = nearest_node(grid, r0);
    let s0 = t.beta.value(i0) * h0 / lambda;
    let cos0 = -h_prime.value(i0) / (lambda * g.value(i0));
    let theta0 = s0.atan2(cos0);
    let theta_int = quadrature(&t.alpha.zip_with(&g, |a, g| a * g), r0);
    let theta = theta_int.map(|v| theta0 + v);

    Ok(WarpedProfile::new(g, h, theta, background))
}

/// Sine of the phase along the reconstruction, from its closed-form integral
/// `s0 exp(int (beta'/beta) alpha/(alpha+beta))`. Used as an independent
/// consistency check on [`reconstruct_profile`].
pub fn reconstruct_sin_theta(t: &TorsionABC, background: SU3Background, h0: f64, r0: f64) -> Field {
    let lambda = background.lambda;
    let grid = t.grid();
    let beta_prime = diff(&t.beta);
    let integrand = Field::new(
        grid,
        (0..grid.len())
            .map(|i| {
                let b = t.beta.value(i);
                let a = t.alpha.value(i);
                beta_prime.value(i) / b * a / (a + b)
            })
            .collect(),
    );
    let i0 = nearest_node(grid, r0);
    let s0 = t.beta.value(i0) * h0 / lambda;
    quadrature(&integrand, r0).map(|v| s0 * v.exp())
}

fn nearest_node(grid: Grid, r: f64) -> usize {
    let x = (r - grid.r_min()) / grid.spacing();
    (x.round() as isize).clamp(0, grid.len() as isize - 1) as usize
}

/// Caller-supplied data for the degenerate reconstruction branches: the
/// fields the torsion leaves free.
#[derive(Debug, Clone)]
pub struct DegenerateData {
    /// warp factor to use where it is arbitrary (default: 1 everywhere)
    pub g: Option<Field>,
    /// phase value at the anchor (default: pi/2)
    pub theta0: f64,
    /// fiber scale at the anchor
    pub h0: f64,
    /// anchor point
    pub r0: f64,
}

impl DegenerateData {
    pub fn defaults(r0: f64) -> Self {
        DegenerateData {
            g: None,
            theta0: std::f64::consts::FRAC_PI_2,
            h0: 1.0,
            r0,
        }
    }
}

/// Reconstruction for the three degenerate torsion branches with
/// `lambda != 0` and `gamma = 0`:
///
/// 1. `beta = 0` forces `alpha = 0` and a constant phase `k pi`; `G` is
///    arbitrary and `h' = -lambda G cos(theta)`.
/// 2. `alpha = 0`, `beta != 0`: constant phase, `h = lambda sin(theta)/beta`,
///    and `G = -h'/(lambda cos(theta))` unless `cos(theta) = 0`, in which
///    case `G` is arbitrary.
/// 3. `alpha + beta = 0` with `alpha` a nonzero constant: `G` arbitrary,
///    `theta' = alpha G`, `h = -(lambda/alpha) sin(theta)`.
pub fn reconstruct_degenerate(
    t: &TorsionABC,
    background: SU3Background,
    data: &DegenerateData,
) -> Result<WarpedProfile, GeometryError> {
    let lambda = background.lambda;
    if lambda == 0.0 {
        return Err(GeometryError::DegenerateTorsion("lambda must be nonzero"));
    }
    let grid = t.grid();
    let scale = t.max_magnitude().max(1.0);
    let tol = 1e-12 * scale;
    if t.gamma.max_abs() > 1e-9 * scale {
        return Err(GeometryError::DegenerateTorsion("gamma must vanish"));
    }
    let g = data.g.clone().unwrap_or_else(|| Field::constant(grid, 1.0));
    assert_eq!(
        g.grid(),
        grid,
        "supplied warp factor must share the torsion grid"
    );

    let beta_zero = t.beta.max_abs() <= tol;
    let alpha_zero = t.alpha.max_abs() <= tol;
    let apb = t.alpha.zip_with(&t.beta, |a, b| a + b);

    if beta_zero {
        // phase must sit at a multiple of pi
        if !alpha_zero {
            return Err(GeometryError::NoBranchMatched);
        }
        let k = (data.theta0 / std::f64::consts::PI).round();
        if (data.theta0 - k * std::f64::consts::PI).abs() > 1e-9 {
            return Err(GeometryError::DegenerateTorsion(
                "beta = 0 branch needs theta0 at a multiple of pi",
            ));
        }
        let theta0 = k * std::f64::consts::PI;
        let cos0 = theta0.cos();
        let h = quadrature(&g, data.r0).map(|v| data.h0 - lambda * cos0 * v);
        let theta = Field::constant(grid, theta0);
        return Ok(WarpedProfile::new(g, h, theta, background));
    }

    if alpha_zero {
        // constant phase; h determined by beta
        let sin0 = data.theta0.sin();
        let cos0 = data.theta0.cos();
        if sin0.abs() < 1e-12 {
            return Err(GeometryError::DegenerateTorsion(
                "alpha = 0 branch needs sin(theta0) != 0",
            ));
        }
        let h = t.beta.map(|b| lambda * sin0 / b);
        let theta = Field::constant(grid, data.theta0);
        let g_out = if cos0.abs() < 1e-12 {
            g
        } else {
            let h_prime = diff(&h);
            let g_vals: Vec<f64> = h_prime
                .values()
                .iter()
                .map(|&hp| -hp / (lambda * cos0))
                .collect();
            if g_vals.iter().any(|&v| v <= 0.0) {
                return Err(GeometryError::DegenerateTorsion(
                    "alpha = 0 branch yields a non-positive warp factor",
                ));
            }
            Field::new(grid, g_vals)
        };
        return Ok(WarpedProfile::new(g_out, h, theta, background));
    }

    if apb.max_abs() <= tol {
        // alpha must be constant and nonzero
        let a0 = t.alpha.value(0);
        if t.alpha.values().iter().any(|&a| (a - a0).abs() > tol) {
            return Err(GeometryError::NoBranchMatched);
        }
        let theta = quadrature(&g, data.r0).map(|v| data.theta0 + a0 * v);
        let h = theta.map(|th| -(lambda / a0) * th.sin());
        if h.min_abs() < 1e-12 {
            return Err(GeometryError::DegenerateTorsion(
                "alpha + beta = 0 branch crosses sin(theta) = 0",
            ));
        }
        return Ok(WarpedProfile::new(g, h, theta, background));
    }

    Err(GeometryError::NoBranchMatched)
}

/// Which sign in `h' = +/- lambda G` a torsion-free nearly-Kahler profile
/// realizes, or `None` if the profile is not torsion-free.
///
/// Torsion-free with `lambda != 0` needs `theta' = 0`, `sin(theta) = 0`, and
/// `h' = -lambda G cos(theta)`, so the sign is `-cos(theta)`.
pub fn nk_torsion_free_sign(p: &WarpedProfile, tol: f64) -> Option<i8> {
    let t = compute_abc(p);
    if !torsion_class(&t, tol).torsion_free {
        return None;
    }
    let h_prime = diff(&p.h);
    let lambda = p.lambda();
    let plus = h_prime.zip_with(&p.g, |hp, g| hp - lambda * g).max_abs();
    let minus = h_prime.zip_with(&p.g, |hp, g| hp + lambda * g).max_abs();
    let scale = h_prime.max_abs().max(lambda.abs() * p.g.max_abs()).max(1.0);
    if plus <= tol * scale.max(1.0) {
        Some(1)
    } else if minus <= tol * scale {
        Some(-1)
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn grid() -> Grid {
        Grid::interval(128, 0.0, 1.0)
    }

    #[test]
    fn abc_of_flat_cy_profile_vanishes() {
        let g = grid();
        let p = WarpedProfile::new(
            Field::constant(g, 1.0),
            Field::constant(g, 1.0),
            Field::constant(g, 0.7),
            SU3Background::calabi_yau(),
        );
        let t = compute_abc(&p);
        assert_eq!(t.alpha.max_abs(), 0.0);
        assert_eq!(t.beta.max_abs(), 0.0);
        assert_eq!(t.gamma.max_abs(), 0.0);
    }

    #[test]
    fn abc_of_constant_nk_profile() {
        let g = grid();
        let p = WarpedProfile::new(
            Field::constant(g, 1.0),
            Field::constant(g, 2.0),
            Field::constant(g, FRAC_PI_2),
            SU3Background::nearly_kahler(),
        );
        let t = compute_abc(&p);
        assert_eq!(t.alpha.max_abs(), 0.0);
        assert!(t.beta.max_abs_diff(&Field::constant(g, 0.5)) < 1e-15);
        assert!(t.gamma.max_abs() < 1e-15);
    }

    #[test]
    fn abc_of_linear_phase_profile() {
        let g = Grid::interval(256, 0.0, 1.0);
        let p = WarpedProfile::new(
            Field::constant(g, 1.0),
            Field::constant(g, 1.0),
            Field::from_fn(g, |r| r),
            SU3Background::nearly_kahler(),
        );
        let t = compute_abc(&p);
        assert!(t.alpha.max_abs_diff(&Field::constant(g, 1.0)) < 1e-10);
        assert!(t.beta.max_abs_diff(&Field::from_fn(g, f64::sin)) < 1e-12);
        assert!(t.gamma.max_abs_diff(&Field::from_fn(g, f64::cos)) < 1e-12);
    }

    #[test]
    fn component_arithmetic() {
        let g = grid();
        let t = TorsionABC::new(Field::constant(g, 7.0), Field::zeros(g), Field::zeros(g));
        let c = torsion_components(&t);
        assert_eq!(c.tau1.value(0), 1.0);
        assert_eq!(c.tau27_scale.value(0), 1.0);
        assert_eq!(c.tau7_coeff.value(0), 0.0);
        assert_eq!(c.trace_t.value(0), 7.0);
    }

    #[test]
    fn nearly_parallel_constants() {
        let g = grid();
        let t = TorsionABC::new(
            Field::constant(g, 1.0),
            Field::constant(g, -1.0),
            Field::zeros(g),
        );
        let flags = torsion_class(&t, 1e-9);
        assert!(flags.nearly_parallel);
        assert!(!flags.torsion_free);
        let c = torsion_components(&t);
        assert_eq!(c.tau27_scale.max_abs(), 0.0);
        assert_eq!(c.tau1.value(0), 1.0);
    }

    #[test]
    fn pure_27_constants() {
        let g = grid();
        let t = TorsionABC::new(
            Field::constant(g, 6.0),
            Field::constant(g, 1.0),
            Field::zeros(g),
        );
        let flags = torsion_class(&t, 1e-9);
        assert!(flags.pure_27);
        assert!(!flags.nearly_parallel);
        assert_eq!(torsion_components(&t).tau1.max_abs(), 0.0);
    }

    #[test]
    fn full_torsion_substitution() {
        let g = grid();
        let t = TorsionABC::new(
            Field::constant(g, 2.0),
            Field::constant(g, 1.0),
            Field::zeros(g),
        );
        let ft = full_torsion(&t, &Field::constant(g, 1.0));
        assert_eq!(ft.diag_r.value(0), 2.0);
        assert_eq!(ft.diag_6.value(0), -1.0);
        assert_eq!(ft.j6_coeff.max_abs(), 0.0);
    }

    #[test]
    fn full_torsion_cy_profile_form() {
        // with lambda = 0 the tensor is diag(theta'/G, 0) - (h'/(hG)) J6
        let g = Grid::interval(256, 0.1, 0.9);
        let p = WarpedProfile::new(
            Field::from_fn(g, |r| 1.0 + 0.2 * r),
            Field::from_fn(g, |r| 2.0 - 0.4 * r),
            Field::from_fn(g, |r| 0.3 * r * r),
            SU3Background::calabi_yau(),
        );
        let t = compute_abc(&p);
        let ft = full_torsion(&t, &p.g);
        let tp = diff(&p.theta);
        let hp = diff(&p.h);
        for i in 0..g.len() {
            let expect_rr = tp.value(i) / p.g.value(i);
            let expect_j6 = -hp.value(i) / (p.h.value(i) * p.g.value(i));
            assert!((ft.diag_r.value(i) - expect_rr).abs() < 1e-12);
            assert_eq!(ft.diag_6.value(i), 0.0);
            assert!((ft.j6_coeff.value(i) - expect_j6).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_torsion_raises_every_flag() {
        let g = grid();
        let t = TorsionABC::new(Field::zeros(g), Field::zeros(g), Field::zeros(g));
        let flags = torsion_class(&t, 1e-9);
        assert!(flags.torsion_free);
        assert!(flags.closed);
        assert!(flags.co_closed);
        assert!(flags.nearly_parallel);
        assert!(flags.pure_27);
    }

    #[test]
    fn gauge_fix_identity_when_already_coclosed() {
        let g = grid();
        let t = TorsionABC::new(
            Field::constant(g, 1.0),
            Field::constant(g, 0.5),
            Field::zeros(g),
        );
        let (fixed, f) = gauge_fix_gamma(&t, 0.0);
        assert!(f.max_abs_diff(&Field::constant(g, 1.0)) < 1e-15);
        assert!(fixed.alpha.max_abs_diff(&t.alpha) < 1e-15);
        assert!(fixed.beta.max_abs_diff(&t.beta) < 1e-15);
    }

    #[test]
    fn conformal_identity_and_scaling() {
        let g = grid();
        let t = TorsionABC::new(
            Field::constant(g, 2.0),
            Field::constant(g, 4.0),
            Field::constant(g, 1.0),
        );
        let id = conformal_transform(&t, &Field::constant(g, 1.0)).unwrap();
        assert!(id.alpha.max_abs_diff(&t.alpha) < 1e-15);
        assert!(id.gamma.max_abs_diff(&t.gamma) < 1e-12);

        let halved = conformal_transform(&t, &Field::constant(g, 2.0)).unwrap();
        assert!(halved.alpha.max_abs_diff(&Field::constant(g, 1.0)) < 1e-15);
        assert!(halved.beta.max_abs_diff(&Field::constant(g, 2.0)) < 1e-15);
        assert!(halved.gamma.max_abs_diff(&Field::constant(g, 1.0)) < 1e-12);
    }

    #[test]
    fn conformal_exponential_factor() {
        let g = grid();
        let t = TorsionABC::new(Field::zeros(g), Field::zeros(g), Field::zeros(g));
        let out = conformal_transform(&t, &Field::from_fn(g, f64::exp)).unwrap();
        assert!(out.gamma.max_abs_diff(&Field::constant(g, 1.0)) < 1e-9);
    }

    #[test]
    fn conformal_rejects_vanishing_factor() {
        let g = grid();
        let t = TorsionABC::new(Field::zeros(g), Field::zeros(g), Field::zeros(g));
        let pivot = g.node(g.len() / 2);
        let f = Field::from_fn(g, move |r| r - pivot);
        assert!(matches!(
            conformal_transform(&t, &f),
            Err(GeometryError::ZeroConformalFactor { .. })
        ));
    }

    #[test]
    fn gauge_fix_constant_gamma() {
        let g = grid();
        let t = TorsionABC::new(
            Field::constant(g, 1.0),
            Field::constant(g, 1.0),
            Field::constant(g, 0.8),
        );
        let (fixed, f) = gauge_fix_gamma(&t, 0.0);
        assert_eq!(fixed.gamma.max_abs(), 0.0);
        let expect = Field::from_fn(g, |r| (-0.8 * r).exp());
        assert!(f.max_abs_diff(&expect) < 1e-12);
    }

    #[test]
    fn gauge_fix_roundtrip_through_conformal() {
        let g = Grid::interval(256, 0.0, 1.0);
        let t = TorsionABC::new(
            Field::from_fn(g, |r| 1.0 + 0.3 * (2.0 * r).sin()),
            Field::from_fn(g, |r| 0.5 + 0.2 * (3.0 * r).cos()),
            Field::from_fn(g, |r| 0.4 * (1.5 * r).sin()),
        );
        let (fixed, f) = gauge_fix_gamma(&t, 0.0);
        let inv = f.map(|v| 1.0 / v);
        let back = conformal_transform(&fixed, &inv).unwrap();
        assert!(back.alpha.max_abs_diff(&t.alpha) < 1e-9);
        assert!(back.beta.max_abs_diff(&t.beta) < 1e-9);
        assert!(back.gamma.max_abs_diff(&t.gamma) < 1e-9);
    }

    #[test]
    fn reconstruct_roundtrip_coclosed() {
        // co-closed by construction: h' = -lambda G cos(theta)
        let grid = Grid::interval(512, 0.2, 1.2);
        let bg = SU3Background::nearly_kahler();
        let g = Field::constant(grid, 1.0);
        let theta = Field::from_fn(grid, |r| r);
        let h = Field::from_fn(grid, |r| 2.0 - r.sin());
        let p = WarpedProfile::new(g, h, theta, bg);
        let t = compute_abc(&p);
        assert!(t.gamma.max_abs() < 1e-8);
        let t0 = TorsionABC::new(t.alpha.clone(), t.beta.clone(), Field::zeros(grid));
        let h0 = p.h.value(0);
        let rec = reconstruct_profile(&t0, bg, h0, grid.r_min()).unwrap();
        assert!(rec.h.max_abs_diff(&p.h) / p.h.max_abs() < 1e-6);
        assert!(rec.g.max_abs_diff(&p.g) / p.g.max_abs() < 1e-6);
        assert!(rec.theta.max_abs_diff(&p.theta) < 1e-6);
        // the closed-form sine matches the integrated phase
        let sin_theta = reconstruct_sin_theta(&t0, bg, h0, grid.r_min());
        assert!(sin_theta.max_abs_diff(&rec.theta.map(f64::sin)) < 1e-6);
    }

    #[test]
    fn reconstruct_scales_linearly_in_h0() {
        // small phases keep the radicand positive after doubling h0
        let grid = Grid::interval(256, 0.05, 0.45);
        let bg = SU3Background::nearly_kahler();
        let p = WarpedProfile::new(
            Field::constant(grid, 1.0),
            Field::from_fn(grid, |r| 2.0 - r.sin()),
            Field::from_fn(grid, |r| r),
            bg,
        );
        let t = compute_abc(&p);
        let t0 = TorsionABC::new(t.alpha.clone(), t.beta.clone(), Field::zeros(grid));
        let h0 = p.h.value(0);
        let rec1 = reconstruct_profile(&t0, bg, h0, grid.r_min()).unwrap();
        let rec2 = reconstruct_profile(&t0, bg, 2.0 * h0, grid.r_min()).unwrap();
        // h is linear in h0, and the doubled profile still realizes the
        // same (alpha, beta): the phase absorbs the rescaling
        assert!(rec2.h.max_abs_diff(&rec1.h.map(|v| 2.0 * v)) < 1e-9);
        let back = compute_abc(&rec2);
        assert!(back.alpha.max_abs_diff(&t0.alpha) < 1e-5);
        assert!(back.beta.max_abs_diff(&t0.beta) < 1e-5);
        assert!(back.gamma.max_abs() < 1e-5);
    }

    #[test]
    fn reconstruct_rejects_nearly_parallel_line() {
        let grid = Grid::interval(128, 0.0, 1.0);
        let t = TorsionABC::new(
            Field::constant(grid, -1.0),
            Field::constant(grid, 1.0),
            Field::zeros(grid),
        );
        assert!(matches!(
            reconstruct_profile(&t, SU3Background::nearly_kahler(), 1.0, 0.0),
            Err(GeometryError::DegenerateTorsion(_))
        ));
    }

    #[test]
    fn reconstruct_rejects_negative_radicand() {
        let grid = Grid::interval(128, 0.0, 1.0);
        let t = TorsionABC::new(
            Field::constant(grid, 1.0),
            Field::constant(grid, 3.0),
            Field::zeros(grid),
        );
        // h stays at h0 = 1 for constant beta, so lambda^2 - h^2 beta^2 < 0
        assert!(matches!(
            reconstruct_profile(&t, SU3Background::nearly_kahler(), 1.0, 0.0),
            Err(GeometryError::NegativeRadicand { .. })
        ));
    }

    #[test]
    fn degenerate_branch_beta_zero() {
        let grid = Grid::interval(128, 0.0, 0.9);
        let t = TorsionABC::new(Field::zeros(grid), Field::zeros(grid), Field::zeros(grid));
        let data = DegenerateData {
            theta0: 0.0,
            ..DegenerateData::defaults(0.0)
        };
        let p = reconstruct_degenerate(&t, SU3Background::nearly_kahler(), &data).unwrap();
        let expect = Field::from_fn(grid, |r| 1.0 - r);
        assert!(p.h.max_abs_diff(&expect) < 1e-12);
        let back = compute_abc(&p);
        assert!(back.gamma.max_abs() < 1e-10);
    }

    #[test]
    fn degenerate_branch_alpha_zero() {
        let grid = Grid::interval(128, 0.0, 1.0);
        let t = TorsionABC::new(
            Field::zeros(grid),
            Field::constant(grid, 0.5),
            Field::zeros(grid),
        );
        let data = DegenerateData {
            theta0: FRAC_PI_2,
            ..DegenerateData::defaults(0.0)
        };
        let p = reconstruct_degenerate(&t, SU3Background::nearly_kahler(), &data).unwrap();
        assert!(p.h.max_abs_diff(&Field::constant(grid, 2.0)) < 1e-12);
        let back = compute_abc(&p);
        assert!(back.beta.max_abs_diff(&t.beta) < 1e-12);
        assert!(back.gamma.max_abs() < 1e-12);
    }

    #[test]
    fn degenerate_branch_alpha_plus_beta_zero() {
        let grid = Grid::interval(128, 0.0, 1.0);
        let t = TorsionABC::new(
            Field::constant(grid, -1.0),
            Field::constant(grid, 1.0),
            Field::zeros(grid),
        );
        let data = DegenerateData {
            theta0: FRAC_PI_2,
            ..DegenerateData::defaults(0.0)
        };
        let p = reconstruct_degenerate(&t, SU3Background::nearly_kahler(), &data).unwrap();
        // theta' = alpha G = -1
        let tp = diff(&p.theta);
        assert!(tp.max_abs_diff(&Field::constant(grid, -1.0)) < 1e-10);
        let back = compute_abc(&p);
        assert!(back.alpha.max_abs_diff(&t.alpha) < 1e-9);
        assert!(back.beta.max_abs_diff(&t.beta) < 1e-9);
    }

    #[test]
    fn no_branch_for_generic_torsion() {
        let grid = Grid::interval(128, 0.0, 1.0);
        let t = TorsionABC::new(
            Field::constant(grid, 1.0),
            Field::constant(grid, 0.5),
            Field::zeros(grid),
        );
        assert!(matches!(
            reconstruct_degenerate(
                &t,
                SU3Background::nearly_kahler(),
                &DegenerateData::defaults(0.0)
            ),
            Err(GeometryError::NoBranchMatched)
        ));
    }

    #[test]
    fn nk_torsion_free_sign_resolution() {
        let grid = Grid::interval(128, 0.0, 0.5);
        // theta = 0: h' = -lambda G
        let p = WarpedProfile::new(
            Field::constant(grid, 1.0),
            Field::from_fn(grid, |r| 2.0 - r),
            Field::zeros(grid),
            SU3Background::nearly_kahler(),
        );
        assert_eq!(nk_torsion_free_sign(&p, 1e-9), Some(-1));
        // theta = pi: h' = +lambda G
        let q = WarpedProfile::new(
            Field::constant(grid, 1.0),
            Field::from_fn(grid, |r| 2.0 + r),
            Field::constant(grid, PI),
            SU3Background::nearly_kahler(),
        );
        assert_eq!(nk_torsion_free_sign(&q, 1e-9), Some(1));
    }
}
