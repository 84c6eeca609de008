use super::sampling;
use super::{Check, CheckOutcome};
use crate::flow::{
    abc_flow_rhs, evolve, flow_rhs, separable_cy, separable_cy_blow_up_time, FlowParams, FlowState,
};
use crate::geometry::{compute_abc, SU3Background, WarpedProfile};
use crate::numerics::{integrate_ode, Field, Grid, StepControl};
use std::f64::consts::PI;

pub(super) fn checks() -> Vec<Check> {
    vec![
        Check {
            suite: "flow",
            name: "commuting-diagram",
            run: commuting_diagram,
        },
        Check {
            suite: "flow",
            name: "k0-k2-sign-relation",
            run: sign_relation,
        },
        Check {
            suite: "flow",
            name: "coclosedness-preserved",
            run: coclosed_preserved,
        },
        Check {
            suite: "flow",
            name: "separable-cy-tracking",
            run: separable_tracking,
        },
        Check {
            suite: "flow",
            name: "torsion-free-fixed-point",
            run: fixed_point,
        },
        Check {
            suite: "flow",
            name: "blow-up-flag",
            run: blow_up_flag,
        },
    ]
}

/// Evolving `(G, h, theta)` and recomputing the torsion agrees with evolving
/// `(alpha, beta)` directly, for 10 random co-closed nearly-Kahler initial
/// conditions bounded away from `alpha + beta = 0`.
fn commuting_diagram() -> CheckOutcome {
    let mut rng = sampling::rng(900);
    let grid = Grid::circle(256, 0.0, 2.0 * PI);
    let params = FlowParams::canonical(0.15);
    let t_end = 0.05;
    let ctl = StepControl::default();
    let n = grid.len();
    let mut worst = 0.0_f64;
    for _ in 0..10 {
        let p = sampling::random_coclosed_nk_profile(&mut rng, grid);
        let t0 = compute_abc(&p);

        // route A: profile evolution, then recompute torsion
        let traj = evolve(
            &FlowState {
                t: 0.0,
                profile: p.clone(),
            },
            &params,
            t_end,
            &ctl,
        )
        .expect("smooth short-time evolution");
        assert!(
            traj.blow_up.is_none(),
            "unexpected blow-up in the commuting check"
        );
        let a_route = traj.last();

        // route B: torsion-coordinate evolution with the warp factor co-evolved
        let mut y0 = Vec::with_capacity(3 * n);
        y0.extend_from_slice(t0.alpha.values());
        y0.extend_from_slice(t0.beta.values());
        y0.extend_from_slice(p.g.values());
        let sol = integrate_ode(
            |_, y, dy| {
                if !y.iter().all(|v| v.is_finite()) {
                    dy.fill(f64::NAN);
                    return;
                }
                let alpha = Field::new(grid, y[..n].to_vec());
                let beta = Field::new(grid, y[n..2 * n].to_vec());
                let g = Field::new(grid, y[2 * n..].to_vec());
                let t = crate::geometry::TorsionABC::new(
                    alpha.clone(),
                    beta.clone(),
                    Field::zeros(grid),
                );
                match abc_flow_rhs(&t, &g, &params) {
                    Ok((ad, bd)) => {
                        dy[..n].copy_from_slice(ad.values());
                        dy[n..2 * n].copy_from_slice(bd.values());
                        for i in 0..n {
                            let (a, b) = (y[i], y[n + i]);
                            let gg = (1.0 - params.k) * a * a
                                + 3.0 * b * b
                                + 6.0 * params.k * a * b
                                + params.k * params.c * a;
                            dy[2 * n + i] = y[2 * n + i] * gg;
                        }
                    }
                    Err(_) => dy.fill(f64::NAN),
                }
            },
            &y0,
            0.0,
            t_end,
            &ctl,
        )
        .expect("torsion-coordinate route integrates");
        let yb = sol.last_state();
        for i in 0..n {
            worst = worst
                .max((a_route.alpha.value(i) - yb[i]).abs())
                .max((a_route.beta.value(i) - yb[n + i]).abs());
        }
    }
    CheckOutcome::bounded(
        worst,
        1e-5,
        "profile route vs torsion route at t = 0.05, 10 samples",
    )
}

/// The `k = 0` and `k = 2, C = 0` rates cancel pointwise on `beta = 0`
/// inputs.
fn sign_relation() -> CheckOutcome {
    let mut rng = sampling::rng(910);
    let grid = Grid::circle(128, 0.0, 2.0 * PI);
    let mut worst = 0.0_f64;
    for case in 0..10 {
        // co-closed Calabi-Yau data: gamma = h'/h, so h is constant
        let p = WarpedProfile::new(
            sampling::smooth_field(&mut rng, grid, 0.0, 0.2).map(f64::exp),
            Field::constant(grid, 1.0 + 0.2 * case as f64),
            sampling::smooth_field(&mut rng, grid, 0.0, 0.5),
            SU3Background::calabi_yau(),
        );
        let state = FlowState { t: 0.0, profile: p };
        let (g0, th0, h0) = flow_rhs(&state, &FlowParams::new(0.0, 0.0)).expect("co-closed");
        let (g2, th2, h2) = flow_rhs(&state, &FlowParams::new(2.0, 0.0)).expect("co-closed");
        worst = worst
            .max(g0.zip_with(&g2, |x, y| x + y).max_abs())
            .max(th0.zip_with(&th2, |x, y| x + y).max_abs())
            .max(h0.zip_with(&h2, |x, y| x + y).max_abs());
    }
    CheckOutcome {
        passed: worst == 0.0,
        measured: worst,
        tolerance: 0.0,
        detail: "k=0 and k=2 (C=0) rates must cancel exactly on beta = 0 data".to_string(),
    }
}

/// Co-closedness is preserved along the flow: gamma recomputed from the
/// evolved profile stays below 1e-7.
fn coclosed_preserved() -> CheckOutcome {
    let mut rng = sampling::rng(920);
    let grid = Grid::circle(256, 0.0, 2.0 * PI);
    let mut worst = 0.0_f64;
    for _ in 0..3 {
        let p = sampling::random_coclosed_nk_profile(&mut rng, grid);
        let traj = evolve(
            &FlowState { t: 0.0, profile: p },
            &FlowParams::canonical(0.1),
            0.05,
            &StepControl::default(),
        )
        .expect("short-time evolution");
        for s in &traj.samples {
            worst = worst.max(s.gamma.max_abs());
        }
    }
    CheckOutcome::bounded(worst, 1e-7, "max |gamma| along 3 evolutions to t = 0.05")
}

/// The numerical evolution tracks the separable Calabi-Yau solution to
/// relative 1e-4 until `G_t^2 = 0.1`, and the blow-up time extrapolated
/// from the evolved `G^2` lands within 1% of the closed form.
fn separable_tracking() -> CheckOutcome {
    let grid = Grid::interval(32, 0.0, 1.0);
    let mut worst_track = 0.0_f64;
    let mut worst_t = 0.0_f64;
    for (lambda1, theta_t) in [(1.0, 1.0), (1.0, 2.0), (2.0, 1.0)] {
        let t_blow = separable_cy_blow_up_time(lambda1, theta_t);
        let t_stop = 0.9 * t_blow; // where G_t^2 = 0.1
        let p = WarpedProfile::new(
            Field::constant(grid, 1.0),
            Field::constant(grid, 1.0),
            Field::from_fn(grid, |r| theta_t * lambda1.sqrt() * r),
            SU3Background::calabi_yau(),
        );
        let traj = evolve(
            &FlowState { t: 0.0, profile: p },
            &FlowParams::canonical(0.0),
            t_stop,
            &StepControl::default(),
        )
        .expect("separable evolution reaches G_t^2 = 0.1");
        assert!(traj.blow_up.is_none());
        for s in &traj.samples {
            let (g_exact, _, alpha_exact) =
                separable_cy(lambda1, theta_t, s.state.t, 0.0).expect("inside validity");
            let g_num = s.state.profile.g.value(grid.len() / 2);
            let alpha_num = s.alpha.value(grid.len() / 2);
            worst_track = worst_track
                .max((g_num - g_exact).abs() / g_exact)
                .max((alpha_num - alpha_exact).abs() / alpha_exact);
        }
        // extrapolate the zero of G^2(t), which decays linearly
        let m = traj.samples.len();
        let (s1, s2) = (&traj.samples[m / 2], &traj.samples[m - 1]);
        let (t1, t2) = (s1.state.t, s2.state.t);
        let (g1, g2) = (
            s1.state.profile.g.value(0).powi(2),
            s2.state.profile.g.value(0).powi(2),
        );
        let slope = (g2 - g1) / (t2 - t1);
        let t_est = t2 - g2 / slope;
        worst_t = worst_t.max((t_est - t_blow).abs() / t_blow);
    }
    let passed = worst_track <= 1e-4 && worst_t <= 0.01;
    CheckOutcome {
        passed,
        measured: worst_track.max(worst_t),
        tolerance: 1e-4,
        detail: format!(
            "relative tracking error {worst_track:.2e} (<= 1e-4); blow-up time error {worst_t:.2e} (<= 1e-2)"
        ),
    }
}

/// Torsion-free initial data stays put.
fn fixed_point() -> CheckOutcome {
    let grid = Grid::interval(64, 0.0, 1.0);
    let p = WarpedProfile::new(
        Field::constant(grid, 1.0),
        Field::constant(grid, 1.0),
        Field::constant(grid, 0.4),
        SU3Background::calabi_yau(),
    );
    let traj = evolve(
        &FlowState {
            t: 0.0,
            profile: p.clone(),
        },
        &FlowParams::canonical(0.7),
        1.0,
        &StepControl {
            dt_init: 1e-2,
            ..Default::default()
        },
    )
    .expect("fixed point evolution");
    let last = traj.last();
    let drift = last
        .state
        .profile
        .g
        .max_abs_diff(&p.g)
        .max(last.state.profile.h.max_abs_diff(&p.h))
        .max(last.state.profile.theta.max_abs_diff(&p.theta));
    CheckOutcome::bounded(drift, 1e-12, "torsion-free data constant over t in [0, 1]")
}

/// Focusing initial data collapses the step size in finite time and the
/// run reports a blow-up marker instead of NaNs.
fn blow_up_flag() -> CheckOutcome {
    let grid = Grid::circle(32, 0.0, 2.0 * PI);
    let p = WarpedProfile::new(
        Field::constant(grid, 1.0),
        Field::constant(grid, 1.0),
        Field::from_fn(grid, |r| 3.0 * r.sin()),
        SU3Background::calabi_yau(),
    );
    let traj = evolve(
        &FlowState { t: 0.0, profile: p },
        &FlowParams::canonical(0.0),
        50.0,
        &StepControl {
            rtol: 1e-6,
            atol: 1e-9,
            ..Default::default()
        },
    )
    .expect("blow-up is a result, not an error");
    match traj.blow_up {
        Some(b) => {
            let finite = traj
                .samples
                .iter()
                .all(|s| s.state.profile.g.values().iter().all(|v| v.is_finite()));
            CheckOutcome::flag(
                finite && b.t_last < 50.0,
                format!(
                    "step collapse at t = {:.6} with finite trajectory",
                    b.t_last
                ),
            )
        }
        None => CheckOutcome::flag(false, "expected a blow-up marker"),
    }
}
