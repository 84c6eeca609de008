use super::{Check, CheckOutcome};
use crate::numerics::{diff, integrate_ode, quadrature, Field, Grid, OdeError, StepControl};
use std::f64::consts::PI;

pub(super) fn checks() -> Vec<Check> {
    vec![
        Check {
            suite: "numerics",
            name: "diff-exact-on-quartics",
            run: diff_quartic,
        },
        Check {
            suite: "numerics",
            name: "diff-sin-circle",
            run: diff_sin,
        },
        Check {
            suite: "numerics",
            name: "quadrature-analytic",
            run: quad_analytic,
        },
        Check {
            suite: "numerics",
            name: "diff-quadrature-fourth-order",
            run: diff_quad_scaling,
        },
        Check {
            suite: "numerics",
            name: "ode-linear-accuracy",
            run: ode_linear,
        },
        Check {
            suite: "numerics",
            name: "ode-blow-up-underflow",
            run: ode_blow_up,
        },
    ]
}

fn diff_quartic() -> CheckOutcome {
    let mut worst = 0.0_f64;
    for n in [16usize, 33, 64] {
        let grid = Grid::interval(n, -1.0, 2.0);
        let f = Field::from_fn(grid, |r| {
            0.25 * r.powi(4) - 1.5 * r.powi(3) + r * r - 2.0 * r + 3.0
        });
        let exact = Field::from_fn(grid, |r| r.powi(3) - 4.5 * r * r + 2.0 * r - 2.0);
        worst = worst.max(diff(&f).max_abs_diff(&exact));
    }
    CheckOutcome::bounded(worst, 1e-12, "4th-order stencils on degree-4 polynomials")
}

fn diff_sin() -> CheckOutcome {
    let grid = Grid::circle(256, 0.0, 2.0 * PI);
    let err = diff(&Field::from_fn(grid, f64::sin)).max_abs_diff(&Field::from_fn(grid, f64::cos));
    CheckOutcome::bounded(err, 1e-7, "d/dr sin on a 256-node circle")
}

fn quad_analytic() -> CheckOutcome {
    let grid = Grid::circle(256, 0.0, 2.0 * PI);
    let err = quadrature(&Field::from_fn(grid, f64::cos), 0.0)
        .max_abs_diff(&Field::from_fn(grid, f64::sin));
    let lin = Grid::interval(64, 0.0, 1.0);
    let err2 =
        quadrature(&Field::constant(lin, 1.0), 0.0).max_abs_diff(&Field::from_fn(lin, |r| r));
    CheckOutcome::bounded(
        err.max(err2 * 1e4),
        1e-8,
        "antiderivatives of cos (1e-8) and of 1 (1e-12)",
    )
}

fn diff_quad_scaling() -> CheckOutcome {
    let mut errs = Vec::new();
    for n in [64usize, 128, 256] {
        let grid = Grid::circle(n, 0.0, 2.0 * PI);
        let f = Field::from_fn(grid, |r| (2.0 * r).sin() + 0.5 * (3.0 * r).cos());
        errs.push(diff(&quadrature(&f, 0.0)).max_abs_diff(&f));
    }
    let r01 = errs[0] / errs[1];
    let r12 = errs[1] / errs[2];
    let passed = (8.0..32.0).contains(&r01) && (8.0..32.0).contains(&r12);
    CheckOutcome {
        passed,
        measured: r01.min(r12),
        tolerance: 8.0,
        detail: format!(
            "error halving ratios {:.1}, {:.1} (expect ~16 for 4th order; errors {:.2e}/{:.2e}/{:.2e})",
            r01, r12, errs[0], errs[1], errs[2]
        ),
    }
}

fn ode_linear() -> CheckOutcome {
    let ctl = StepControl::default();
    let sol = integrate_ode(
        |_, y, dy| {
            dy[0] = -y[1];
            dy[1] = y[0];
        },
        &[1.0, 0.0],
        0.0,
        1.0,
        &ctl,
    )
    .expect("rotation system integrates");
    let s = sol.last_state();
    let err = (s[0] - 1.0_f64.cos())
        .abs()
        .max((s[1] - 1.0_f64.sin()).abs());
    let exp = integrate_ode(|_, y, dy| dy[0] = y[0], &[1.0], 0.0, 1.0, &ctl)
        .expect("exponential integrates");
    let err = err.max((exp.last_state()[0] - std::f64::consts::E).abs());
    CheckOutcome::bounded(
        err,
        ctl.rtol * 10.0,
        "linear systems over unit time vs analytic",
    )
}

fn ode_blow_up() -> CheckOutcome {
    match integrate_ode(
        |_, y, dy| dy[0] = y[0] * y[0],
        &[1.0],
        0.0,
        2.0,
        &StepControl::default(),
    ) {
        Err(OdeError::StepSizeUnderflow { t_last, .. }) => CheckOutcome::flag(
            t_last > 0.99 && t_last < 1.0,
            format!("y' = y^2 underflows at t = {t_last:.12} (analytic blow-up at 1)"),
        ),
        other => CheckOutcome::flag(false, format!("expected underflow, got {other:?}")),
    }
}
