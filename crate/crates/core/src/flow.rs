//! Time evolution of co-closed warped G2-structures under the modified
//! Laplacian coflow, as a method-of-lines system in the profile variables
//! `(G, h, theta)`, plus the general kinematics relating profile rates to
//! the evolution of the dual 4-form and of the torsion coordinates.
//!
//! The flow writes `d psi/dt = Lap psi + k d((C - Tr T) phi)`; `k = 2` is
//! the canonical choice and `k = 0` the plain coflow. The evolved state
//! vector is `(G, h, theta)`, which avoids the `alpha + beta` division in
//! the torsion-coordinate form of the equations.
//!
//! On Interval grids no boundary conditions are imposed: spatial
//! derivatives close with one-sided stencils, which formally
//! over-determines the endpoints. Circle is the topology the verification
//! suites rely on for generic (non-constant-in-r) data; Interval runs are
//! appropriate for spatially uniform or boundary-insensitive data such as
//! the separable solution.

use crate::geometry::{compute_abc, TorsionABC, WarpedProfile};
use crate::numerics::{diff, integrate_ode, Field, OdeError, StepControl};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FlowError {
    #[error("initial data is not co-closed (max |gamma| = {max_gamma:.3e})")]
    NotCoClosed { max_gamma: f64 },
    #[error("alpha + beta underflows at r = {r:.6}")]
    SingularDenominator { r: f64 },
    #[error("separable solution queried at or beyond its blow-up time {t_blow:.6}")]
    BeyondBlowUp { t_blow: f64 },
    #[error(transparent)]
    Ode(#[from] OdeError),
}

/// Coefficients of the modified coflow.
///
/// `k > 1` is the weakly parabolic regime; `k = 0` recovers the plain
/// coflow.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowParams {
    pub k: f64,
    pub c: f64,
}

impl FlowParams {
    pub fn new(k: f64, c: f64) -> Self {
        assert!(
            k.is_finite() && c.is_finite(),
            "flow parameters must be finite"
        );
        FlowParams { k, c }
    }

    /// Canonical modified coflow, `k = 2`.
    pub fn canonical(c: f64) -> Self {
        Self::new(2.0, c)
    }

    pub fn well_posed(&self) -> bool {
        self.k > 1.0
    }
}

/// A profile at a moment of flow time.
#[derive(Debug, Clone)]
pub struct FlowState {
    pub t: f64,
    pub profile: WarpedProfile,
}

/// Components of `* d(psi)/dt` induced by profile rates.
#[derive(Debug, Clone)]
pub struct PsiDot {
    pub re1: Field,
    pub im1: Field,
    pub re2: Field,
}

/// `* d(psi)/dt` components for given profile rates:
/// `(G./G + 3 h./h, theta., 4 h./h)`.
pub fn psi_dot_from_rates(
    g_dot: &Field,
    h_dot: &Field,
    theta_dot: &Field,
    p: &WarpedProfile,
) -> PsiDot {
    assert_eq!(g_dot.grid(), p.grid, "rates must live on the profile grid");
    assert_eq!(h_dot.grid(), p.grid, "rates must live on the profile grid");
    assert_eq!(
        theta_dot.grid(),
        p.grid,
        "rates must live on the profile grid"
    );
    let gg = g_dot.zip_with(&p.g, |gd, g| gd / g);
    let hh = h_dot.zip_with(&p.h, |hd, h| hd / h);
    PsiDot {
        re1: gg.zip_with(&hh, |a, b| a + 3.0 * b),
        im1: theta_dot.clone(),
        re2: hh.map(|b| 4.0 * b),
    }
}

/// Torsion-coordinate rates induced by profile rates:
///
/// ```text
/// alpha. = (theta.)'/G - alpha G./G
/// beta.  = theta. G^{-1} (beta gamma + beta')/(alpha+beta) - (h./h) beta
/// gamma. = (h./h)' + (G./G - h./h)(beta gamma + beta')/(alpha+beta)
///          - theta. G beta
/// ```
pub fn abc_dot_from_rates(
    g_dot: &Field,
    h_dot: &Field,
    theta_dot: &Field,
    t: &TorsionABC,
    p: &WarpedProfile,
) -> Result<(Field, Field, Field), FlowError> {
    assert_eq!(t.grid(), p.grid, "torsion must live on the profile grid");
    let grid = p.grid;
    let n = grid.len();
    let scale = t.max_magnitude().max(1.0);
    let gg = g_dot.zip_with(&p.g, |gd, g| gd / g);
    let hh = h_dot.zip_with(&p.h, |hd, h| hd / h);
    let td_prime = diff(theta_dot);
    let hh_prime = diff(&hh);
    let beta_prime = diff(&t.beta);
    let mut alpha_dot = Vec::with_capacity(n);
    let mut beta_dot = Vec::with_capacity(n);
    let mut gamma_dot = Vec::with_capacity(n);
    for i in 0..n {
        let a = t.alpha.value(i);
        let b = t.beta.value(i);
        let c = t.gamma.value(i);
        let denom = a + b;
        if denom.abs() < 1e-13 * scale {
            return Err(FlowError::SingularDenominator { r: grid.node(i) });
        }
        let q = (b * c + beta_prime.value(i)) / denom;
        let g = p.g.value(i);
        let td = theta_dot.value(i);
        alpha_dot.push(td_prime.value(i) / g - a * gg.value(i));
        beta_dot.push(td / g * q - hh.value(i) * b);
        gamma_dot.push(hh_prime.value(i) + (gg.value(i) - hh.value(i)) * q - td * g * b);
    }
    Ok((
        Field::new(grid, alpha_dot),
        Field::new(grid, beta_dot),
        Field::new(grid, gamma_dot),
    ))
}

/// absolute co-closure tolerance used by the flow entry points
fn coclosed_tol(t: &TorsionABC) -> f64 {
    1e-6 * t.max_magnitude().max(1.0)
}

fn rates_from_abc(t: &TorsionABC, p: &WarpedProfile, params: &FlowParams) -> (Field, Field, Field) {
    let (k, c) = (params.k, params.c);
    let grid = p.grid;
    let n = grid.len();
    let trace = t.alpha.zip_with(&t.beta, |a, b| a - 6.0 * b);
    let trace_prime = diff(&trace);
    let mut g_dot = Vec::with_capacity(n);
    let mut theta_dot = Vec::with_capacity(n);
    let mut h_dot = Vec::with_capacity(n);
    for i in 0..n {
        let a = t.alpha.value(i);
        let b = t.beta.value(i);
        g_dot.push(p.g.value(i) * ((1.0 - k) * a * a + 3.0 * b * b + 6.0 * k * a * b + k * c * a));
        theta_dot.push((k - 1.0) * trace_prime.value(i) / p.g.value(i));
        h_dot.push(p.h.value(i) * (3.0 * (1.0 - 2.0 * k) * b * b + (k - 1.0) * a * b - k * c * b));
    }
    (
        Field::new(grid, g_dot),
        Field::new(grid, theta_dot),
        Field::new(grid, h_dot),
    )
}

/// Right-hand side of the modified coflow in profile variables:
///
/// ```text
/// G./G   = (1-k) alpha^2 + 3 beta^2 + 6k alpha beta + kC alpha
/// theta. = (k-1) G^{-1} (alpha - 6 beta)'
/// h./h   = 3(1-2k) beta^2 + (k-1) alpha beta - kC beta
/// ```
///
/// with `alpha`, `beta` recomputed from the profile on every evaluation.
/// Returns `(G., theta., h.)`.
pub fn flow_rhs(
    state: &FlowState,
    params: &FlowParams,
) -> Result<(Field, Field, Field), FlowError> {
    let t = compute_abc(&state.profile);
    let max_gamma = t.gamma.max_abs();
    if max_gamma > coclosed_tol(&t) {
        return Err(FlowError::NotCoClosed { max_gamma });
    }
    Ok(rates_from_abc(&t, &state.profile, params))
}

/// Coflow right-hand side in torsion coordinates, for co-closed data:
///
/// ```text
/// alpha. = (k-1) G^{-2} (-(G'/G)(Tr T)' + (Tr T)'')
///          + (k-1) alpha^3 - 6k beta alpha^2 - 3 beta^2 alpha - kC alpha^2
/// beta.  = (k-1) G^{-2} (Tr T)' beta'/(alpha+beta)
///          + (1-k) beta^2 alpha + 3(2k-1) beta^3 + kC beta^2
/// ```
pub fn abc_flow_rhs(
    t: &TorsionABC,
    g: &Field,
    params: &FlowParams,
) -> Result<(Field, Field), FlowError> {
    assert_eq!(
        t.grid(),
        g.grid(),
        "torsion and warp factor must share a grid"
    );
    let max_gamma = t.gamma.max_abs();
    if max_gamma > coclosed_tol(t) {
        return Err(FlowError::NotCoClosed { max_gamma });
    }
    let (k, c) = (params.k, params.c);
    let grid = t.grid();
    let n = grid.len();
    let scale = t.max_magnitude().max(1.0);
    let trace = t.alpha.zip_with(&t.beta, |a, b| a - 6.0 * b);
    let trace_prime = diff(&trace);
    let trace_second = diff(&trace_prime);
    let g_prime = diff(g);
    let beta_prime = diff(&t.beta);
    let mut alpha_dot = Vec::with_capacity(n);
    let mut beta_dot = Vec::with_capacity(n);
    for i in 0..n {
        let a = t.alpha.value(i);
        let b = t.beta.value(i);
        let gv = g.value(i);
        let g2i = 1.0 / (gv * gv);
        let tp = trace_prime.value(i);
        alpha_dot.push(
            (k - 1.0) * g2i * (-(g_prime.value(i) / gv) * tp + trace_second.value(i))
                + (k - 1.0) * a * a * a
                - 6.0 * k * b * a * a
                - 3.0 * b * b * a
                - k * c * a * a,
        );
        let advect = if k == 1.0 {
            0.0
        } else {
            let denom = a + b;
            if denom.abs() < 1e-13 * scale {
                return Err(FlowError::SingularDenominator { r: grid.node(i) });
            }
            (k - 1.0) * g2i * tp * beta_prime.value(i) / denom
        };
        beta_dot.push(
            advect + (1.0 - k) * b * b * a + 3.0 * (2.0 * k - 1.0) * b * b * b + k * c * b * b,
        );
    }
    Ok((Field::new(grid, alpha_dot), Field::new(grid, beta_dot)))
}

/// Flow blow-up marker: the last time the integrator accepted a step before
/// the step size collapsed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlowUp {
    pub t_last: f64,
}

/// One accepted step of the evolution with its torsion diagnostics.
#[derive(Debug, Clone)]
pub struct FlowSample {
    pub state: FlowState,
    pub alpha: Field,
    pub beta: Field,
    pub gamma: Field,
}

#[derive(Debug, Clone)]
pub struct FlowTrajectory {
    pub samples: Vec<FlowSample>,
    pub blow_up: Option<BlowUp>,
}

impl FlowTrajectory {
    pub fn last(&self) -> &FlowSample {
        self.samples.last().expect("trajectory is never empty")
    }
}

/// Integrate the coflow from `state` to `t_end` by the method of lines over
/// the stacked `(G, h, theta)` vector.
///
/// A step-size collapse (finite-time blow-up) is a result, not an error: the
/// trajectory accepted so far is returned with a [`BlowUp`] marker.
pub fn evolve(
    state: &FlowState,
    params: &FlowParams,
    t_end: f64,
    ctl: &StepControl,
) -> Result<FlowTrajectory, FlowError> {
    let p0 = &state.profile;
    let t0 = compute_abc(p0);
    let max_gamma = t0.gamma.max_abs();
    if max_gamma > coclosed_tol(&t0) {
        return Err(FlowError::NotCoClosed { max_gamma });
    }
    let grid = p0.grid;
    let n = grid.len();
    let background = p0.background;
    let params = *params;

    let mut y0 = Vec::with_capacity(3 * n);
    y0.extend_from_slice(p0.g.values());
    y0.extend_from_slice(p0.h.values());
    y0.extend_from_slice(p0.theta.values());

    let h_sign = p0.h.value(0).signum();
    let rhs = move |_t: f64, y: &[f64], dy: &mut [f64]| {
        // reject unphysical stage values by poisoning the derivative
        let usable = y.iter().all(|v| v.is_finite())
            && y[..n].iter().all(|&g| g > 0.0)
            && y[n..2 * n]
                .iter()
                .all(|&h| h != 0.0 && h.signum() == h_sign);
        if !usable {
            dy.fill(f64::NAN);
            return;
        }
        let g = Field::new(grid, y[..n].to_vec());
        let h = Field::new(grid, y[n..2 * n].to_vec());
        let theta = Field::new(grid, y[2 * n..].to_vec());
        let profile = WarpedProfile::new(g, h, theta, background);
        let t = compute_abc(&profile);
        let (g_dot, theta_dot, h_dot) = rates_from_abc(&t, &profile, &params);
        dy[..n].copy_from_slice(g_dot.values());
        dy[n..2 * n].copy_from_slice(h_dot.values());
        dy[2 * n..].copy_from_slice(theta_dot.values());
    };

    let (solution, blow_up) = match integrate_ode(rhs, &y0, state.t, t_end, ctl) {
        Ok(sol) => (sol, None),
        Err(OdeError::StepSizeUnderflow { t_last, partial }) => (partial, Some(BlowUp { t_last })),
        Err(e) => return Err(FlowError::Ode(e)),
    };

    let mut samples = Vec::with_capacity(solution.len());
    for (step, y) in solution.times.iter().zip(&solution.states) {
        let profile = WarpedProfile::new(
            Field::new(grid, y[..n].to_vec()),
            Field::new(grid, y[n..2 * n].to_vec()),
            Field::new(grid, y[2 * n..].to_vec()),
            background,
        );
        let t = compute_abc(&profile);
        samples.push(FlowSample {
            state: FlowState { t: *step, profile },
            alpha: t.alpha,
            beta: t.beta,
            gamma: t.gamma,
        });
    }
    Ok(FlowTrajectory { samples, blow_up })
}

/// Separable solution of the Calabi-Yau coflow (`k = 2`, `C = 0`) with
/// separation constant `lambda1 > 0` and time amplitude `theta_t`:
///
/// ```text
/// G(t, r) = sqrt(1 - 2 lambda1 theta_t^2 t)
/// theta(t, r) = theta_t sqrt(lambda1) r
/// alpha(t, r) = sqrt(lambda1) theta_t / G(t)
/// ```
///
/// valid for `t < 1/(2 lambda1 theta_t^2)`.
pub fn separable_cy(
    lambda1: f64,
    theta_t: f64,
    t: f64,
    r: f64,
) -> Result<(f64, f64, f64), FlowError> {
    assert!(lambda1 > 0.0, "separation constant must be positive");
    let t_blow = separable_cy_blow_up_time(lambda1, theta_t);
    if t >= t_blow {
        return Err(FlowError::BeyondBlowUp { t_blow });
    }
    let g_t = (1.0 - 2.0 * lambda1 * theta_t * theta_t * t).sqrt();
    let theta = theta_t * lambda1.sqrt() * r;
    let alpha = lambda1.sqrt() * theta_t / g_t;
    Ok((g_t, theta, alpha))
}

/// Blow-up time of the separable solution, `1/(2 lambda1 theta_t^2)`.
pub fn separable_cy_blow_up_time(lambda1: f64, theta_t: f64) -> f64 {
    if theta_t == 0.0 {
        f64::INFINITY
    } else {
        1.0 / (2.0 * lambda1 * theta_t * theta_t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::SU3Background;
    use crate::numerics::Grid;
    use std::f64::consts::PI;

    fn grid() -> Grid {
        Grid::interval(64, 0.0, 1.0)
    }

    fn flat_profile(lambda: f64) -> WarpedProfile {
        let g = grid();
        WarpedProfile::new(
            Field::constant(g, 1.0),
            Field::constant(g, 1.0),
            Field::constant(g, 0.0),
            SU3Background::new(lambda),
        )
    }

    #[test]
    fn psi_dot_substitutions() {
        let p = flat_profile(0.0);
        let g = grid();
        let zero = Field::zeros(g);

        let quiet = psi_dot_from_rates(&zero, &zero, &zero, &p);
        assert_eq!(quiet.re1.max_abs(), 0.0);
        assert_eq!(quiet.im1.max_abs(), 0.0);
        assert_eq!(quiet.re2.max_abs(), 0.0);

        // G. = G
        let stretch = psi_dot_from_rates(&p.g.clone(), &zero, &zero, &p);
        assert_eq!(stretch.re1.value(0), 1.0);
        assert_eq!(stretch.re2.max_abs(), 0.0);

        // h. = h
        let fiber = psi_dot_from_rates(&zero, &p.h.clone(), &zero, &p);
        assert_eq!(fiber.re1.value(0), 3.0);
        assert_eq!(fiber.re2.value(0), 4.0);
    }

    #[test]
    fn abc_dot_substitutions() {
        let g = grid();
        let p = WarpedProfile::new(
            Field::constant(g, 1.0),
            Field::constant(g, 2.0),
            Field::constant(g, PI / 2.0),
            SU3Background::nearly_kahler(),
        );
        let t = compute_abc(&p);
        let zero = Field::zeros(g);

        let (ad, bd, cd) = abc_dot_from_rates(&zero, &zero, &zero, &t, &p).unwrap();
        assert_eq!(ad.max_abs(), 0.0);
        assert_eq!(bd.max_abs(), 0.0);
        assert_eq!(cd.max_abs(), 0.0);

        // h./h = 0.3 drains beta
        let h_dot = p.h.map(|h| 0.3 * h);
        let (_, bd, _) = abc_dot_from_rates(&zero, &h_dot, &zero, &t, &p).unwrap();
        let expect = t.beta.map(|b| -0.3 * b);
        assert!(bd.max_abs_diff(&expect) < 1e-12);

        // constant beta, gamma = 0: G-stretching leaves gamma flat
        let g_dot = p.g.map(|g| 0.5 * g);
        let (_, _, cd) = abc_dot_from_rates(&g_dot, &zero, &zero, &t, &p).unwrap();
        assert!(cd.max_abs() < 1e-12);
    }

    #[test]
    fn abc_rates_match_time_differencing() {
        // an analytic one-parameter family of profiles: the kinematic rates
        // must agree with centered differencing of the torsion in t
        let g = Grid::interval(512, 0.1, 0.9);
        let bg = SU3Background::nearly_kahler();
        let family = |t: f64| {
            WarpedProfile::new(
                Field::from_fn(g, move |r| (1.0 + 0.3 * t) * (1.0 + 0.2 * r)),
                Field::from_fn(g, move |r| 2.0 + 0.4 * t + 0.3 * r * r),
                Field::from_fn(g, move |r| 0.8 * r + 0.5 * t * (1.0 - r)),
                bg,
            )
        };
        let p = family(0.0);
        let t = compute_abc(&p);
        let g_dot = Field::from_fn(g, |r| 0.3 * (1.0 + 0.2 * r));
        let h_dot = Field::constant(g, 0.4);
        let theta_dot = Field::from_fn(g, |r| 0.5 * (1.0 - r));
        let (ad, bd, cd) = abc_dot_from_rates(&g_dot, &h_dot, &theta_dot, &t, &p).unwrap();

        // differencing noise is amplified by the r-derivative, so eps
        // balances truncation against roundoff/eps
        let eps = 1e-4;
        let plus = compute_abc(&family(eps));
        let minus = compute_abc(&family(-eps));
        let fd = |a: &Field, b: &Field| a.zip_with(b, |x, y| (x - y) / (2.0 * eps));
        assert!(ad.max_abs_diff(&fd(&plus.alpha, &minus.alpha)) < 1e-8);
        assert!(bd.max_abs_diff(&fd(&plus.beta, &minus.beta)) < 1e-8);
        assert!(cd.max_abs_diff(&fd(&plus.gamma, &minus.gamma)) < 1e-8);
    }

    #[test]
    fn flow_rates_push_to_torsion_rates() {
        // pushing the flow's (G., h., theta.) through the kinematics must
        // reproduce the torsion-coordinate right-hand side, with gamma
        // staying flat (the flow preserves co-closure)
        let g = Grid::circle(256, 0.0, 2.0 * PI);
        let mut rng = crate::verify::sampling::rng(7);
        for _ in 0..5 {
            let p = crate::verify::sampling::random_coclosed_nk_profile(&mut rng, g);
            let t = compute_abc(&p);
            let params = FlowParams::canonical(0.4);
            let state = FlowState {
                t: 0.0,
                profile: p.clone(),
            };
            let (g_dot, theta_dot, h_dot) = flow_rhs(&state, &params).unwrap();
            let (ad_kin, bd_kin, cd_kin) =
                abc_dot_from_rates(&g_dot, &h_dot, &theta_dot, &t, &p).unwrap();
            let (ad, bd) = abc_flow_rhs(&t, &p.g, &params).unwrap();
            let scale = ad.max_abs().max(1.0);
            assert!(ad_kin.max_abs_diff(&ad) < 1e-6 * scale);
            assert!(bd_kin.max_abs_diff(&bd) < 1e-6 * scale);
            assert!(
                cd_kin.max_abs() < 1e-6 * scale,
                "gamma rate {}",
                cd_kin.max_abs()
            );
        }
    }

    #[test]
    fn torsion_free_data_is_a_fixed_point() {
        let p = flat_profile(0.0);
        let state = FlowState { t: 0.0, profile: p };
        let (g_dot, theta_dot, h_dot) = flow_rhs(&state, &FlowParams::canonical(1.0)).unwrap();
        assert_eq!(g_dot.max_abs(), 0.0);
        assert_eq!(theta_dot.max_abs(), 0.0);
        assert_eq!(h_dot.max_abs(), 0.0);
    }

    #[test]
    fn plain_coflow_rates() {
        // k = 0: G./G = alpha^2 + 3 beta^2, h./h = 3 beta^2 - alpha beta
        let g = Grid::interval(64, 0.05, 0.95);
        let theta = Field::from_fn(g, |r| 0.5 * r + 0.3);
        // co-closed by construction: h' = -cos(theta)
        let h = Field::from_fn(g, |r| 3.0 - 2.0 * ((0.5 * r + 0.3).sin() - 0.3_f64.sin()));
        let p = WarpedProfile::new(
            Field::constant(g, 1.0),
            h,
            theta,
            SU3Background::nearly_kahler(),
        );
        let t = compute_abc(&p);
        assert!(t.gamma.max_abs() < 1e-8, "gamma = {}", t.gamma.max_abs());
        let state = FlowState {
            t: 0.0,
            profile: p.clone(),
        };
        let (g_dot, _, h_dot) = flow_rhs(&state, &FlowParams::new(0.0, 5.0)).unwrap();
        for i in 0..g.len() {
            let a = t.alpha.value(i);
            let b = t.beta.value(i);
            let gg = g_dot.value(i) / p.g.value(i);
            let hh = h_dot.value(i) / p.h.value(i);
            assert!((gg - (a * a + 3.0 * b * b)).abs() < 1e-12);
            assert!((hh - (3.0 * b * b - a * b)).abs() < 1e-12);
        }
    }

    #[test]
    fn canonical_coflow_rates() {
        // k = 2: G./G = -a^2 + 3b^2 + 12ab + 2Ca, h./h = -9b^2 + ab - 2Cb
        let g = Grid::interval(64, 0.05, 0.95);
        let theta = Field::from_fn(g, |r| 0.5 * r + 0.3);
        let h = Field::from_fn(g, |r| 3.0 - 2.0 * ((0.5 * r + 0.3).sin() - 0.3_f64.sin()));
        let p = WarpedProfile::new(
            Field::constant(g, 1.0),
            h,
            theta,
            SU3Background::nearly_kahler(),
        );
        let t = compute_abc(&p);
        let c = 0.7;
        let state = FlowState {
            t: 0.0,
            profile: p.clone(),
        };
        let (g_dot, _, h_dot) = flow_rhs(&state, &FlowParams::new(2.0, c)).unwrap();
        for i in 0..g.len() {
            let a = t.alpha.value(i);
            let b = t.beta.value(i);
            let gg = g_dot.value(i) / p.g.value(i);
            let hh = h_dot.value(i) / p.h.value(i);
            assert!((gg - (-a * a + 3.0 * b * b + 12.0 * a * b + 2.0 * c * a)).abs() < 1e-12);
            assert!((hh - (-9.0 * b * b + a * b - 2.0 * c * b)).abs() < 1e-12);
        }
    }

    #[test]
    fn sign_relation_between_k0_and_k2() {
        // on beta = 0 data the leading terms enter with opposite signs
        let g = Grid::circle(64, 0.0, 2.0 * PI);
        let p = WarpedProfile::new(
            Field::constant(g, 1.0),
            Field::constant(g, 1.0),
            Field::from_fn(g, |r| 0.3 * r.sin()),
            SU3Background::calabi_yau(),
        );
        let state = FlowState { t: 0.0, profile: p };
        let (g0, th0, _) = flow_rhs(&state, &FlowParams::new(0.0, 0.0)).unwrap();
        let (g2, th2, _) = flow_rhs(&state, &FlowParams::new(2.0, 0.0)).unwrap();
        assert_eq!(g0.zip_with(&g2, |x, y| x + y).max_abs(), 0.0);
        assert_eq!(th0.zip_with(&th2, |x, y| x + y).max_abs(), 0.0);
    }

    #[test]
    fn abc_rhs_cubic_term() {
        // k = 2, C = 0, lambda = 0, G = 1: alpha. = alpha'' + alpha^3
        let g = Grid::circle(128, 0.0, 2.0 * PI);
        let alpha = Field::from_fn(g, |r| 0.7 + 0.2 * r.sin());
        let t = TorsionABC::new(alpha.clone(), Field::zeros(g), Field::zeros(g));
        let (ad, _) =
            abc_flow_rhs(&t, &Field::constant(g, 1.0), &FlowParams::new(2.0, 0.0)).unwrap();
        let expect = diff(&diff(&alpha)).zip_with(&alpha, |dd, a| dd + a * a * a);
        assert!(ad.max_abs_diff(&expect) < 1e-6);
    }

    #[test]
    fn abc_rhs_k1_constants() {
        // k = 1 kills every (k-1) term
        let g = grid();
        let (a, b, c) = (0.8, 0.5, 2.0);
        let t = TorsionABC::new(
            Field::constant(g, a),
            Field::constant(g, b),
            Field::zeros(g),
        );
        let (ad, bd) =
            abc_flow_rhs(&t, &Field::constant(g, 1.0), &FlowParams::new(1.0, c)).unwrap();
        let expect_a = -6.0 * b * a * a - 3.0 * b * b * a - c * a * a;
        let expect_b = 3.0 * b * b * b + c * b * b;
        assert!((ad.value(0) - expect_a).abs() < 1e-12);
        assert!((bd.value(0) - expect_b).abs() < 1e-12);
    }

    #[test]
    fn evolve_holds_fixed_point() {
        let p = flat_profile(0.0);
        let state = FlowState {
            t: 0.0,
            profile: p.clone(),
        };
        let ctl = StepControl {
            dt_init: 1e-2,
            ..Default::default()
        };
        let traj = evolve(&state, &FlowParams::canonical(0.0), 1.0, &ctl).unwrap();
        assert!(traj.blow_up.is_none());
        let last = traj.last();
        assert!((last.state.t - 1.0).abs() < 1e-12);
        assert!(last.state.profile.g.max_abs_diff(&p.g) < 1e-12);
        assert!(last.state.profile.h.max_abs_diff(&p.h) < 1e-12);
        assert!(last.state.profile.theta.max_abs_diff(&p.theta) < 1e-12);
    }

    #[test]
    fn evolve_flags_blow_up() {
        let g = Grid::circle(32, 0.0, 2.0 * PI);
        let p = WarpedProfile::new(
            Field::constant(g, 1.0),
            Field::constant(g, 1.0),
            Field::from_fn(g, |r| 3.0 * r.sin()),
            SU3Background::calabi_yau(),
        );
        let state = FlowState { t: 0.0, profile: p };
        let ctl = StepControl {
            rtol: 1e-6,
            atol: 1e-9,
            ..Default::default()
        };
        let traj = evolve(&state, &FlowParams::canonical(0.0), 50.0, &ctl).unwrap();
        let blow = traj.blow_up.expect("focusing data must collapse");
        assert!(blow.t_last < 1.0);
        for s in &traj.samples {
            assert!(s.state.profile.g.values().iter().all(|v| v.is_finite()));
        }
    }

    #[test]
    fn separable_closed_form_values() {
        let (g, _, alpha) = separable_cy(1.0, 1.0, 0.0, 0.5).unwrap();
        assert_eq!(g, 1.0);
        assert_eq!(alpha, 1.0);
        let (g, _, alpha) = separable_cy(1.0, 1.0, 0.375, 0.0).unwrap();
        assert!((g - 0.5).abs() < 1e-15);
        assert!((alpha - 2.0).abs() < 1e-15);
        assert!(matches!(
            separable_cy(1.0, 1.0, 0.6, 0.0),
            Err(FlowError::BeyondBlowUp { .. })
        ));
    }

    #[test]
    fn separable_alpha_grows_monotonically() {
        let mut prev = 0.0;
        for i in 0..40 {
            let t = 0.0124 * i as f64;
            let (_, _, alpha) = separable_cy(1.0, 1.0, t, 0.0).unwrap();
            assert!(alpha > prev);
            prev = alpha;
        }
    }
}
