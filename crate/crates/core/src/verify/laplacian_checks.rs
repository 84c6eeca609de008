use super::sampling;
use super::{Check, CheckOutcome};
use crate::geometry::TorsionABC;
use crate::laplacian::{
    coclosed_im1, coclosed_re1, coclosed_re2, g2_decompose, laplacian_g2_decomp, laplacian_phi,
    star_d, SymThreeForm,
};
use crate::numerics::{diff, Field, Grid};
use std::f64::consts::PI;

pub(super) fn checks() -> Vec<Check> {
    vec![
        Check {
            suite: "laplacian",
            name: "decomposition-consistency",
            run: decomposition,
        },
        Check {
            suite: "laplacian",
            name: "coclosed-path-exact",
            run: coclosed_exact,
        },
        Check {
            suite: "laplacian",
            name: "harmonic-coclosed-torsion-free",
            run: harmonic,
        },
        Check {
            suite: "laplacian",
            name: "star-d-phi-closed-form",
            run: star_d_phi,
        },
        Check {
            suite: "laplacian",
            name: "second-derivatives-only-in-vector-part",
            run: second_order,
        },
    ]
}

fn coclosed_torsion(seed: u64, grid: Grid) -> (TorsionABC, Field) {
    let mut rng = sampling::rng(seed);
    let t = TorsionABC::new(
        sampling::smooth_field(&mut rng, grid, 0.9, 0.3),
        sampling::smooth_field(&mut rng, grid, 0.4, 0.2),
        Field::zeros(grid),
    );
    let g = sampling::smooth_field(&mut rng, grid, 0.0, 0.2).map(f64::exp);
    (t, g)
}

/// The direct polynomial decomposition agrees with decomposing the
/// evaluated Laplacian, to 1e-12.
fn decomposition() -> CheckOutcome {
    let grid = Grid::circle(256, 0.0, 2.0 * PI);
    let mut worst = 0.0_f64;
    for seed in 0..10 {
        let (t, g) = coclosed_torsion(500 + seed, grid);
        let direct = laplacian_g2_decomp(&t, &g).expect("co-closed");
        let composed = g2_decompose(&laplacian_phi(&t, &g).expect("regular"));
        worst = worst
            .max(direct.x_coeff.max_abs_diff(&composed.x_coeff))
            .max(direct.s_rr.max_abs_diff(&composed.s_rr))
            .max(direct.s_6.max_abs_diff(&composed.s_6))
            .max(direct.trace_s.max_abs_diff(&composed.trace_s));
    }
    CheckOutcome::bounded(
        worst,
        1e-12,
        "two evaluation routes for the Laplacian decomposition",
    )
}

/// With gamma identically zero the general evaluation must equal the
/// co-closed closed form with zero error (same arithmetic path).
fn coclosed_exact() -> CheckOutcome {
    let grid = Grid::circle(256, 0.0, 2.0 * PI);
    let mut worst = 0.0_f64;
    for seed in 0..10 {
        let (t, g) = coclosed_torsion(600 + seed, grid);
        let lap = laplacian_phi(&t, &g).expect("regular");
        let da = diff(&t.alpha);
        let db = diff(&t.beta);
        for i in 0..grid.len() {
            let a = t.alpha.value(i);
            let b = t.beta.value(i);
            worst = worst
                .max((lap.re1.value(i) - coclosed_re1(a, b)).abs())
                .max((lap.im1.value(i) - coclosed_im1(da.value(i), db.value(i), g.value(i))).abs())
                .max((lap.re2.value(i) - coclosed_re2(a, b)).abs());
        }
    }
    CheckOutcome {
        passed: worst == 0.0,
        measured: worst,
        tolerance: 0.0,
        detail: "gamma = 0 specialization must be bitwise identical".to_string(),
    }
}

/// Harmonic and co-closed forces vanishing torsion: the scalar component is
/// a positive definite quadratic form, and a 10^4-point sweep finds no
/// nonzero root of both scalar components.
fn harmonic() -> CheckOutcome {
    // positive definiteness of a^2 - 3ab + 12b^2: discriminant 9 - 48 < 0
    let disc = 9.0 - 48.0_f64;
    if disc >= 0.0 {
        return CheckOutcome::flag(false, "quadratic form not positive definite");
    }
    let n = 100;
    for i in 0..n {
        for j in 0..n {
            let a = -2.0 + 4.0 * (i as f64 + 0.5) / n as f64;
            let b = -2.0 + 4.0 * (j as f64 + 0.5) / n as f64;
            let re1 = coclosed_re1(a, b);
            let re2 = coclosed_re2(a, b);
            if re1.abs() < 1e-12 && re2.abs() < 1e-12 && (a != 0.0 || b != 0.0) {
                return CheckOutcome::flag(
                    false,
                    format!("nonzero torsion ({a}, {b}) with harmonic components"),
                );
            }
        }
    }
    CheckOutcome::flag(
        true,
        "discriminant 9 - 48 < 0; no nonzero (alpha, beta) kills both components on a 10^4 sweep",
    )
}

/// `*(d phi)` from the general equivariant formulas matches the closed-form
/// torsion expressions (substituting the (1, 0, 1) form is the same code
/// path the torsion theorem specializes).
fn star_d_phi() -> CheckOutcome {
    let mut rng = sampling::rng(700);
    let grid = Grid::circle(256, 0.0, 2.0 * PI);
    let mut worst = 0.0_f64;
    for _ in 0..10 {
        let p = sampling::random_profile(&mut rng, grid, 1.0);
        let out = star_d(&SymThreeForm::phi(grid), &p);
        let hp = diff(&p.h);
        let tp = diff(&p.theta);
        for i in 0..grid.len() {
            let (g, h, th) = (p.g.value(i), p.h.value(i), p.theta.value(i));
            let re1 = tp.value(i) / g - 3.0 * th.sin() / h;
            let im1 = -3.0 / (g * h) * (hp.value(i) + g * th.cos());
            let re2 = -4.0 * th.sin() / h;
            worst = worst
                .max((out.re1.value(i) - re1).abs())
                .max((out.im1.value(i) - im1).abs())
                .max((out.re2.value(i) - re2).abs());
        }
    }
    CheckOutcome::bounded(
        worst,
        1e-12,
        "*(d phi) against the torsion closed forms, 10 profiles",
    )
}

/// For co-closed input only the vector part of the Laplacian carries second
/// derivatives: a high-frequency perturbation of `alpha` with amplitude
/// `eps` moves the symmetric components by O(eps) but the vector component
/// by O(eps * frequency).
fn second_order() -> CheckOutcome {
    let grid = Grid::circle(512, 0.0, 2.0 * PI);
    let (t, g) = coclosed_torsion(800, grid);
    let base = laplacian_phi(&t, &g).expect("regular");
    let eps = 1e-6;
    let freq = 40.0;
    let wiggle = Field::from_fn(grid, |r| eps * (freq * r).sin());
    let perturbed = TorsionABC::new(
        t.alpha.zip_with(&wiggle, |a, w| a + w),
        t.beta.clone(),
        t.gamma.clone(),
    );
    let out = laplacian_phi(&perturbed, &g).expect("regular");
    let d_re1 = out.re1.max_abs_diff(&base.re1);
    let d_re2 = out.re2.max_abs_diff(&base.re2);
    let d_im1 = out.im1.max_abs_diff(&base.im1);
    let symmetric_small = d_re1 < 50.0 * eps && d_re2 < 50.0 * eps;
    let vector_large = d_im1 > 0.5 * eps * freq;
    CheckOutcome::flag(
        symmetric_small && vector_large,
        format!(
            "d(re1) = {d_re1:.2e}, d(re2) = {d_re2:.2e} (O(eps)); d(im1) = {d_im1:.2e} (O(eps*freq))"
        ),
    )
}
