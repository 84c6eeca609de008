//! Property tests over randomized smooth inputs.

use g2flow::geometry::{compute_abc, conformal_transform, gauge_fix_gamma, TorsionABC};
use g2flow::geometry::{SU3Background, WarpedProfile};
use g2flow::numerics::{diff, quadrature, Field, Grid};
use g2flow::soliton::{cy_closed_form, first_integral_r2, CYFamily, FamilyKind, SolitonState};
use proptest::prelude::*;

fn trig_field(grid: Grid, coeffs: &[(f64, f64)], offset: f64) -> Field {
    let span = grid.r_max() - grid.r_min();
    let base = grid.r_min();
    let coeffs = coeffs.to_vec();
    Field::from_fn(grid, move |r| {
        let x = 2.0 * std::f64::consts::PI * (r - base) / span;
        offset
            + coeffs
                .iter()
                .enumerate()
                .map(|(m, (a, b))| {
                    let k = (m + 1) as f64;
                    (a * (k * x).sin() + b * (k * x).cos()) / (k * k)
                })
                .sum::<f64>()
    })
}

fn coeff() -> impl Strategy<Value = (f64, f64)> {
    (-0.3..0.3, -0.3..0.3)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// Conformal transformations compose through the product of factors.
    #[test]
    fn conformal_composition(c1 in prop::collection::vec(coeff(), 2),
                             c2 in prop::collection::vec(coeff(), 2),
                             ct in prop::collection::vec(coeff(), 3)) {
        let grid = Grid::interval(256, 0.0, 1.0);
        let t = TorsionABC::new(
            trig_field(grid, &ct[..1], 1.0),
            trig_field(grid, &ct[1..2], 0.5),
            trig_field(grid, &ct[2..], 0.0),
        );
        let f1 = trig_field(grid, &c1, 0.0).map(f64::exp);
        let f2 = trig_field(grid, &c2, 0.0).map(f64::exp);
        let seq = conformal_transform(&conformal_transform(&t, &f1).unwrap(), &f2).unwrap();
        let joint = conformal_transform(&t, &f1.zip_with(&f2, |a, b| a * b)).unwrap();
        prop_assert!(seq.alpha.max_abs_diff(&joint.alpha) < 1e-10);
        prop_assert!(seq.beta.max_abs_diff(&joint.beta) < 1e-10);
        prop_assert!(seq.gamma.max_abs_diff(&joint.gamma) < 1e-10);
    }

    /// The gauge-fixed torsion pushed back through the returned factor
    /// reproduces the input.
    #[test]
    fn gauge_fix_round_trip(ct in prop::collection::vec(coeff(), 3)) {
        let grid = Grid::interval(512, 0.0, 1.0);
        let t = TorsionABC::new(
            trig_field(grid, &ct[..1], 1.0),
            trig_field(grid, &ct[1..2], 0.5),
            trig_field(grid, &ct[2..], 0.1),
        );
        let (fixed, f) = gauge_fix_gamma(&t, 0.0);
        prop_assert_eq!(fixed.gamma.max_abs(), 0.0);
        let back = conformal_transform(&fixed, &f.map(|v| 1.0 / v)).unwrap();
        prop_assert!(back.alpha.max_abs_diff(&t.alpha) < 1e-9);
        prop_assert!(back.gamma.max_abs_diff(&t.gamma) < 1e-7);
    }

    /// Differentiating an antiderivative returns the integrand at 4th
    /// order. On a circle the integrand must have zero mean for the
    /// antiderivative to be periodic, so the offset stays 0.
    #[test]
    fn diff_of_quadrature(cs in prop::collection::vec(coeff(), 3), n in 0usize..2) {
        let grid = Grid::circle([128, 256][n], 0.0, 2.0 * std::f64::consts::PI);
        let f = trig_field(grid, &cs, 0.0);
        let err = diff(&quadrature(&f, 0.0)).max_abs_diff(&f);
        // 4th-order truncation bound for modes up to 3 at these resolutions
        let bound = [1e-6, 7e-8][n];
        prop_assert!(err < bound, "err = {err}");
    }

    /// A Calabi-Yau background forces beta to be bitwise zero.
    #[test]
    fn cy_beta_is_exactly_zero(cs in prop::collection::vec(coeff(), 3)) {
        let grid = Grid::circle(128, 0.0, 2.0 * std::f64::consts::PI);
        let p = WarpedProfile::new(
            trig_field(grid, &cs[..1], 0.0).map(f64::exp),
            trig_field(grid, &cs[1..2], 2.0),
            trig_field(grid, &cs[2..], 0.3),
            SU3Background::calabi_yau(),
        );
        prop_assert_eq!(compute_abc(&p).beta.max_abs(), 0.0);
    }

    /// Along every closed-form family the first integral equals R^2.
    #[test]
    fn closed_forms_conserve_r2(c in 0.3..1.5f64, frac in 0.1..0.9f64, r in -3.0..3.0f64) {
        let radius = 2.0 * c * frac; // trigonometric regime
        let f = CYFamily::new(FamilyKind::Trigonometric, c, radius, 0.0, 0.0, -1).unwrap();
        let (a, l, _) = cy_closed_form(&f, r).unwrap();
        let r2 = first_integral_r2(&SolitonState::cy(a, l), c);
        prop_assert!((r2 - radius * radius).abs() < 1e-12 * (1.0 + radius * radius));
    }
}
