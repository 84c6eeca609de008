use super::sampling;
use super::{Check, CheckOutcome};
use crate::geometry::{
    compute_abc, conformal_transform, full_torsion, gauge_fix_gamma, nk_torsion_free_sign,
    reconstruct_profile, reconstruct_sin_theta, torsion_class, torsion_components, SU3Background,
    TorsionABC, WarpedProfile,
};
use crate::numerics::{Field, Grid};
use std::f64::consts::PI;

pub(super) fn checks() -> Vec<Check> {
    vec![
        Check {
            suite: "geometry",
            name: "torsion-symmetry-trace-components",
            run: torsion_structure,
        },
        Check {
            suite: "geometry",
            name: "gauge-fix-gamma",
            run: gauge_fix,
        },
        Check {
            suite: "geometry",
            name: "conformal-composition",
            run: conformal_composition,
        },
        Check {
            suite: "geometry",
            name: "cy-beta-exact-zero",
            run: cy_beta_zero,
        },
        Check {
            suite: "geometry",
            name: "cy-torsion-free-characterization",
            run: cy_torsion_free,
        },
        Check {
            suite: "geometry",
            name: "nk-torsion-free-sign",
            run: nk_sign,
        },
        Check {
            suite: "geometry",
            name: "reconstruction-roundtrip",
            run: reconstruction,
        },
    ]
}

/// 100 random smooth profiles: the full torsion is symmetric iff
/// `max|gamma| <= 1e-9`, `Tr T` equals `alpha - 6 beta` bitwise, and the
/// irreducible components rebuild the full tensor with nothing left over
/// (no 14-part).
fn torsion_structure() -> CheckOutcome {
    let mut rng = sampling::rng(101);
    let grid = Grid::circle(256, 0.0, 2.0 * PI);
    let mut worst_recombine = 0.0_f64;
    for case in 0..100 {
        // alternate generic profiles and co-closed ones so both sides of the
        // symmetry biconditional are exercised
        let coclosed_sample = case % 2 == 1;
        let p = if coclosed_sample {
            sampling::random_coclosed_nk_profile(&mut rng, grid)
        } else {
            sampling::random_profile(&mut rng, grid, 1.0)
        };
        let t = compute_abc(&p);
        let ft = full_torsion(&t, &p.g);
        let comps = torsion_components(&t);

        // symmetric (skew part ~ 0) exactly when gamma ~ 0
        if coclosed_sample {
            if t.gamma.max_abs() > 1e-9 || ft.j6_coeff.max_abs() > 1e-8 {
                return CheckOutcome::flag(
                    false,
                    format!(
                        "co-closed sample {case} not symmetric: |gamma| = {:.2e}, |skew| = {:.2e}",
                        t.gamma.max_abs(),
                        ft.j6_coeff.max_abs()
                    ),
                );
            }
        } else if t.gamma.max_abs() <= 1e-6 || ft.j6_coeff.max_abs() <= 1e-7 {
            return CheckOutcome::flag(
                false,
                format!("generic sample {case} unexpectedly symmetric"),
            );
        }
        for i in 0..grid.len() {
            let a = t.alpha.value(i);
            let b = t.beta.value(i);
            if comps.trace_t.value(i) != a - 6.0 * b {
                return CheckOutcome::flag(
                    false,
                    "trace not computed as alpha - 6 beta".to_string(),
                );
            }
            // rebuild T from tau1 + tau27 + the tau7 skew part: nothing may
            // be left over for a 14-component
            let t_rr = comps.tau1.value(i) + 6.0 * comps.tau27_scale.value(i);
            let t_66 = comps.tau1.value(i) - comps.tau27_scale.value(i);
            worst_recombine = worst_recombine
                .max((t_rr - ft.diag_r.value(i)).abs())
                .max((t_66 - ft.diag_6.value(i)).abs())
                .max((comps.tau7_coeff.value(i) / p.g.value(i) - ft.j6_coeff.value(i)).abs());
        }
    }
    CheckOutcome::bounded(
        worst_recombine,
        1e-13,
        "symmetry iff gamma small; trace exact; components recombine with no 14-part",
    )
}

/// 100 random smooth torsion triples: after the conformal gauge fix the
/// recomputed gamma stays within 1e-8.
fn gauge_fix() -> CheckOutcome {
    let mut rng = sampling::rng(202);
    let grid = Grid::interval(1024, 0.0, 1.0);
    let mut worst = 0.0_f64;
    for _ in 0..100 {
        let t = TorsionABC::new(
            sampling::smooth_field(&mut rng, grid, 1.0, 0.3),
            sampling::smooth_field(&mut rng, grid, 0.5, 0.2),
            sampling::smooth_field(&mut rng, grid, 0.0, 0.5),
        );
        let (fixed, f) = gauge_fix_gamma(&t, 0.0);
        // push the original through conformal_transform with the returned f
        let transformed = conformal_transform(&t, &f).expect("f is positive");
        worst = worst.max(transformed.gamma.max_abs());
        assert_eq!(fixed.gamma.max_abs(), 0.0);
    }
    CheckOutcome::bounded(
        worst,
        1e-8,
        "max |gamma| after conformal gauge fixing, 100 samples",
    )
}

/// Composing conformal transformations multiplies the factors.
fn conformal_composition() -> CheckOutcome {
    let mut rng = sampling::rng(303);
    let grid = Grid::interval(256, 0.0, 1.0);
    let mut worst = 0.0_f64;
    for _ in 0..20 {
        let t = TorsionABC::new(
            sampling::smooth_field(&mut rng, grid, 1.0, 0.3),
            sampling::smooth_field(&mut rng, grid, 0.4, 0.2),
            sampling::smooth_field(&mut rng, grid, 0.1, 0.3),
        );
        let f1 = sampling::smooth_field(&mut rng, grid, 0.0, 0.3).map(f64::exp);
        let f2 = sampling::smooth_field(&mut rng, grid, 0.0, 0.3).map(f64::exp);
        let seq = conformal_transform(&conformal_transform(&t, &f1).unwrap(), &f2).unwrap();
        let joint = conformal_transform(&t, &f1.zip_with(&f2, |a, b| a * b)).unwrap();
        worst = worst
            .max(seq.alpha.max_abs_diff(&joint.alpha))
            .max(seq.beta.max_abs_diff(&joint.beta))
            .max(seq.gamma.max_abs_diff(&joint.gamma));
    }
    CheckOutcome::bounded(worst, 1e-10, "f2 after f1 equals f1*f2, 20 samples")
}

/// `lambda = 0` forces `beta = 0` exactly, never approximately.
fn cy_beta_zero() -> CheckOutcome {
    let mut rng = sampling::rng(404);
    let grid = Grid::circle(128, 0.0, 2.0 * PI);
    for _ in 0..20 {
        let p = sampling::random_profile(&mut rng, grid, 0.0);
        if compute_abc(&p).beta.max_abs() != 0.0 {
            return CheckOutcome::flag(false, "beta not exactly zero on a Calabi-Yau background");
        }
    }
    CheckOutcome::flag(true, "beta is bitwise zero for lambda = 0, 20 samples")
}

/// With `lambda = 0` the structure is torsion-free exactly when both
/// `theta'` and `h'` vanish.
fn cy_torsion_free() -> CheckOutcome {
    let grid = Grid::interval(128, 0.0, 1.0);
    let flat = WarpedProfile::new(
        Field::constant(grid, 2.0),
        Field::constant(grid, 1.5),
        Field::constant(grid, 0.7),
        SU3Background::calabi_yau(),
    );
    let free = torsion_class(&compute_abc(&flat), 1e-9).torsion_free;
    let twisted = WarpedProfile::new(
        Field::constant(grid, 2.0),
        Field::constant(grid, 1.5),
        Field::from_fn(grid, |r| 0.7 + 0.1 * r),
        SU3Background::calabi_yau(),
    );
    let not_free = !torsion_class(&compute_abc(&twisted), 1e-9).torsion_free;
    let scaled = WarpedProfile::new(
        Field::constant(grid, 2.0),
        Field::from_fn(grid, |r| 1.5 + 0.1 * r),
        Field::constant(grid, 0.7),
        SU3Background::calabi_yau(),
    );
    let not_free2 = !torsion_class(&compute_abc(&scaled), 1e-9).torsion_free;
    CheckOutcome::flag(
        free && not_free && not_free2,
        "torsion-free iff theta' = h' = 0 on a Calabi-Yau background",
    )
}

/// Nearly-Kahler torsion-free needs `sin(theta) = 0` and `h' = +/- lambda G`;
/// the realized sign is reported.
fn nk_sign() -> CheckOutcome {
    let grid = Grid::interval(128, 0.0, 0.5);
    let down = WarpedProfile::new(
        Field::constant(grid, 1.0),
        Field::from_fn(grid, |r| 2.0 - r),
        Field::zeros(grid),
        SU3Background::nearly_kahler(),
    );
    let up = WarpedProfile::new(
        Field::constant(grid, 1.0),
        Field::from_fn(grid, |r| 2.0 + r),
        Field::constant(grid, PI),
        SU3Background::nearly_kahler(),
    );
    let titled = WarpedProfile::new(
        Field::constant(grid, 1.0),
        Field::from_fn(grid, |r| 2.0 - r),
        Field::constant(grid, 0.3),
        SU3Background::nearly_kahler(),
    );
    let ok = nk_torsion_free_sign(&down, 1e-9) == Some(-1)
        && nk_torsion_free_sign(&up, 1e-9) == Some(1)
        && nk_torsion_free_sign(&titled, 1e-9).is_none();
    CheckOutcome::flag(
        ok,
        "h' = -G at theta = 0, h' = +G at theta = pi, none off the zeros of sin",
    )
}

/// Round-trip profile -> (alpha, beta, 0) -> profile at n = 512.
fn reconstruction() -> CheckOutcome {
    let grid = Grid::interval(512, 0.2, 1.2);
    let bg = SU3Background::nearly_kahler();
    let mut worst = 0.0_f64;

    // a co-closed profile round-trips directly
    let p = WarpedProfile::new(
        Field::constant(grid, 1.0),
        Field::from_fn(grid, |r| 2.0 - r.sin()),
        Field::from_fn(grid, |r| r),
        bg,
    );
    let t = compute_abc(&p);
    let t0 = TorsionABC::new(t.alpha.clone(), t.beta.clone(), Field::zeros(grid));
    let rec = reconstruct_profile(&t0, bg, p.h.value(0), grid.r_min()).expect("preconditions hold");
    worst = worst
        .max(rec.g.max_abs_diff(&p.g) / p.g.max_abs())
        .max(rec.h.max_abs_diff(&p.h) / p.h.max_abs())
        .max(rec.theta.max_abs_diff(&p.theta) / p.theta.max_abs());
    let sin_check = reconstruct_sin_theta(&t0, bg, p.h.value(0), grid.r_min());
    worst = worst.max(sin_check.max_abs_diff(&rec.theta.map(f64::sin)));

    // a profile with gamma != 0 round-trips through the conformal gauge:
    // reconstruct the gauge-fixed structure, then divide the factor out
    let q = WarpedProfile::new(
        Field::constant(grid, 1.0),
        Field::constant(grid, 1.0),
        Field::from_fn(grid, |r| r),
        bg,
    );
    let tq = compute_abc(&q);
    let (fixed, f) = gauge_fix_gamma(&tq, grid.r_min());
    let rec = reconstruct_profile(&fixed, bg, f.value(0) * q.h.value(0), grid.r_min())
        .expect("gauge-fixed preconditions hold");
    let g_back = rec.g.zip_with(&f, |g, f| g / f);
    let h_back = rec.h.zip_with(&f, |h, f| h / f);
    worst = worst
        .max(g_back.max_abs_diff(&q.g) / q.g.max_abs())
        .max(h_back.max_abs_diff(&q.h) / q.h.max_abs())
        .max(rec.theta.max_abs_diff(&q.theta) / q.theta.max_abs());

    CheckOutcome::bounded(
        worst,
        1e-5,
        "max relative error over (G, h, theta), n = 512",
    )
}
