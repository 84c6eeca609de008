use super::{Check, CheckOutcome};
use crate::geometry::{torsion_components, TorsionABC};
use crate::numerics::{Field, Grid};
use crate::soliton::{
    catalog_entry_residual, nk_constant_catalog, soliton_residual, soliton_residual_at,
    soliton_rhs_general_k, soliton_rhs_nk, CatalogValue, GeneralKRhs, SolitonParams, SolitonState,
};

pub(super) fn checks() -> Vec<Check> {
    vec![
        Check {
            suite: "nk-soliton",
            name: "catalog-residual-sweep",
            run: catalog_sweep,
        },
        Check {
            suite: "nk-soliton",
            name: "special-value-identities",
            run: special_values,
        },
        Check {
            suite: "nk-soliton",
            name: "grid-search-completeness",
            run: grid_search,
        },
        Check {
            suite: "nk-soliton",
            name: "general-k-specialization",
            run: general_k,
        },
        Check {
            suite: "nk-soliton",
            name: "nearly-parallel-entries",
            run: nearly_parallel,
        },
    ]
}

/// Residuals of every catalog entry over a `(C, mu)` sweep of
/// `[-2, 2] x [-1, 1]` intersected with each validity region.
fn catalog_sweep() -> CheckOutcome {
    let mut worst = 0.0_f64;
    let mut entries_checked = 0usize;
    let mut points = Vec::new();
    for i in 0..=8 {
        let c = -2.0 + 0.5 * i as f64;
        for j in 0..=8 {
            points.push((c, -1.0 + 0.25 * j as f64));
        }
        // the entry-3 locus mu = C^2/12 lies off the rectangular grid
        points.push((c, c * c / 12.0));
    }
    for (c, mu) in points {
        let params = SolitonParams::canonical(c, mu);
        for entry in nk_constant_catalog(c, mu) {
            entries_checked += 1;
            worst = worst.max(catalog_entry_residual(&entry, &params));
        }
    }
    CheckOutcome::bounded(
        worst,
        1e-12,
        format!("max catalog residual over {entries_checked} entries in the sweep"),
    )
}

/// The torsion-free lines and the distinguished parameter values: at
/// `mu = 12 C^2/169` (with `C < 0`) an entry-5 solution is nearly parallel
/// (`alpha + beta = 0`), and at `mu = C^2/3` (with `C < 0`) it is of pure
/// type 27 (`alpha - 6 beta = 0`).
fn special_values() -> CheckOutcome {
    let grid = Grid::interval(64, 0.0, 1.0);
    let mut worst = 0.0_f64;

    // torsion-free lines: alpha = beta = 0, l = -mu r + l0
    for (mu, l0) in [(0.5, 0.0), (-1.0, 2.0), (0.0, 1.0)] {
        let params = SolitonParams::canonical(0.8, mu);
        let l = Field::from_fn(grid, |r| -mu * r + l0);
        worst = worst.max(soliton_residual(
            &Field::zeros(grid),
            &Field::zeros(grid),
            &l,
            &params,
            1.0,
        ));
    }

    // nearly parallel at mu = 12 C^2 / 169, C < 0
    let c = -1.3;
    let mu = 12.0 * c * c / 169.0;
    let entries = nk_constant_catalog(c, mu);
    let near = entries.iter().filter(|e| e.id == 5).find_map(|e| {
        let s = e.representative()?;
        ((s.alpha + s.beta).abs() < 1e-13).then_some(s)
    });
    let near = match near {
        Some(s) => s,
        None => return CheckOutcome::flag(false, "no nearly-parallel entry-5 state found"),
    };
    worst = worst.max(soliton_residual_at(
        &near,
        &SolitonParams::canonical(c, mu),
        1.0,
    ));

    // pure type 27 at mu = C^2/3, C < 0
    let c27 = -0.9;
    let mu27 = c27 * c27 / 3.0;
    let entries = nk_constant_catalog(c27, mu27);
    let pure = entries.iter().filter(|e| e.id == 5).find_map(|e| {
        let s = e.representative()?;
        ((s.alpha - 6.0 * s.beta).abs() < 1e-13).then_some(s)
    });
    let pure = match pure {
        Some(s) => s,
        None => return CheckOutcome::flag(false, "no pure-27 entry-5 state found"),
    };
    worst = worst.max(soliton_residual_at(
        &pure,
        &SolitonParams::canonical(c27, mu27),
        1.0,
    ));

    CheckOutcome::bounded(
        worst,
        1e-12,
        "torsion-free lines and the two distinguished mu values",
    )
}

/// Constant solutions of `(P1, P2) = 0` at `l = 0` found by a dense grid
/// scan over `(alpha, beta) in [-5, 5]^2` at resolution 1e-3, refined by
/// Newton iteration, must all coincide with catalog points.
fn grid_search() -> CheckOutcome {
    let samples = [
        (1.0, 0.05),
        (2.0, 0.3),
        (-1.0, 0.08),
        (0.5, -0.2),
        (1.5, 0.12),
    ];
    let res = 1e-3_f64;
    let mut detail = String::new();
    for (c, mu) in samples {
        let catalog: Vec<(f64, f64)> = nk_constant_catalog(c, mu)
            .into_iter()
            .filter(|e| matches!(e.l, CatalogValue::Value(v) if v == 0.0))
            .filter_map(|e| {
                let s = e.representative()?;
                Some((s.alpha, s.beta))
            })
            .collect();

        let p1 = |a: f64, b: f64| -a * a + 3.0 * b * b + 12.0 * a * b + 2.0 * c * a - mu;
        let p2 = |a: f64, b: f64| (9.0 * b * b - a * b + 2.0 * c * b + mu) * (a + b);
        let grad1 = |a: f64, b: f64| (-2.0 * a + 12.0 * b + 2.0 * c, 6.0 * b + 12.0 * a);
        let grad2 = |a: f64, b: f64| {
            let f = 9.0 * b * b - a * b + 2.0 * c * b + mu;
            let s = a + b;
            (-b * s + f, (18.0 * b - a + 2.0 * c) * s + f)
        };

        let n = (10.0 / res).round() as usize; // 10^4 cells per axis
        let mut found: Vec<(f64, f64)> = Vec::new();
        let mut unresolved = 0usize;
        for i in 0..=n {
            let a = -5.0 + res * i as f64;
            for j in 0..=n {
                let b = -5.0 + res * j as f64;
                let v1 = p1(a, b);
                let v2 = p2(a, b);
                let (g1a, g1b) = grad1(a, b);
                let (g2a, g2b) = grad2(a, b);
                let local = 2.0 * res * (g1a.abs() + g1b.abs() + g2a.abs() + g2b.abs() + 1.0);
                if v1.abs() > local || v2.abs() > local {
                    continue;
                }
                // candidate: polish with Newton on (P1, P2)
                let (mut x, mut y) = (a, b);
                let mut converged = false;
                for _ in 0..60 {
                    let (f1, f2) = (p1(x, y), p2(x, y));
                    if f1.abs().max(f2.abs()) < 1e-12 {
                        converged = true;
                        break;
                    }
                    let (j11, j12) = grad1(x, y);
                    let (j21, j22) = grad2(x, y);
                    let det = j11 * j22 - j12 * j21;
                    if det.abs() < 1e-14 {
                        break;
                    }
                    x -= (f1 * j22 - f2 * j12) / det;
                    y -= (j11 * f2 - j21 * f1) / det;
                }
                if converged {
                    // the nearly-parallel roots are double zeros of P2, so
                    // the refined point can sit O(sqrt(tol)) along the P1
                    // curve; cluster at that scale
                    if !found
                        .iter()
                        .any(|&(fx, fy)| (fx - x).abs() + (fy - y).abs() < 1e-4)
                    {
                        found.push((x, y));
                    }
                } else {
                    unresolved += 1;
                }
            }
        }

        // every refined zero must be a catalog point, and every catalog
        // point must have been found
        for &(x, y) in &found {
            let dist = catalog
                .iter()
                .map(|&(ca, cb)| ((x - ca).powi(2) + (y - cb).powi(2)).sqrt())
                .fold(f64::INFINITY, f64::min);
            if dist > 1e-4 {
                return CheckOutcome::flag(
                    false,
                    format!("non-catalog zero ({x:.6}, {y:.6}) at (C, mu) = ({c}, {mu})"),
                );
            }
        }
        for &(ca, cb) in &catalog {
            if ca.abs() > 5.0 || cb.abs() > 5.0 {
                continue; // outside the scanned square
            }
            let hit = found
                .iter()
                .any(|&(x, y)| ((x - ca).powi(2) + (y - cb).powi(2)).sqrt() < 1e-4);
            if !hit {
                return CheckOutcome::flag(
                    false,
                    format!("catalog point ({ca:.4}, {cb:.4}) missed at (C, mu) = ({c}, {mu})"),
                );
            }
        }
        if unresolved > 0 {
            return CheckOutcome::flag(
                false,
                format!("{unresolved} candidates failed to refine at (C, mu) = ({c}, {mu})"),
            );
        }
        detail.push_str(&format!("({c}, {mu}): {} zeros = catalog; ", found.len()));
    }
    CheckOutcome::flag(true, detail)
}

/// `k = 2` of the general right-hand side is bitwise the nearly-Kahler
/// system; `k = 1` degenerates to the constraint.
fn general_k() -> CheckOutcome {
    let p = SolitonParams::canonical(0.7, -0.2);
    for (a, b, l) in [
        (1.0, 0.4, 2.0),
        (-0.5, 0.9, -1.5),
        (2.0, -0.3, 0.7),
        (0.3, 0.2, 3.0),
    ] {
        let s = SolitonState::new(a, b, l);
        let direct = soliton_rhs_nk(&s, &p).expect("regular state");
        match soliton_rhs_general_k(&s, &p, 2.0).expect("regular state") {
            GeneralKRhs::Rates { alpha, beta, l } => {
                if (alpha, beta, l) != direct {
                    return CheckOutcome::flag(false, "k = 2 disagrees with the direct system");
                }
            }
            GeneralKRhs::ConstraintOnly { .. } => {
                return CheckOutcome::flag(false, "k = 2 must be regular")
            }
        }
        match soliton_rhs_general_k(&s, &p, 1.0).expect("constraint") {
            GeneralKRhs::ConstraintOnly { alpha_l } => {
                if alpha_l != a * l {
                    return CheckOutcome::flag(false, "k = 1 constraint mis-evaluated");
                }
            }
            GeneralKRhs::Rates { .. } => {
                return CheckOutcome::flag(false, "k = 1 must return the constraint")
            }
        }
        // k = 0 on the torsion-free state
        match soliton_rhs_general_k(&SolitonState::new(0.0, 0.0, l), &p, 0.0).expect("regular") {
            GeneralKRhs::Rates { alpha, beta, l } => {
                if alpha != 0.0 || beta != 0.0 || l != -p.mu {
                    return CheckOutcome::flag(false, "k = 0 torsion-free rates wrong");
                }
            }
            GeneralKRhs::ConstraintOnly { .. } => {
                return CheckOutcome::flag(false, "k = 0 must be regular")
            }
        }
    }
    CheckOutcome::flag(
        true,
        "k = 2 exact agreement; k = 1 constraint; k = 0 torsion-free line",
    )
}

/// Entry-4 states are nearly parallel: their `tau_27` scale vanishes.
fn nearly_parallel() -> CheckOutcome {
    let grid = Grid::interval(64, 0.0, 1.0);
    let mut worst = 0.0_f64;
    for (c, mu) in [(10.0, 0.0), (1.0, 0.05), (-2.0, 0.3)] {
        for entry in nk_constant_catalog(c, mu).iter().filter(|e| e.id == 4) {
            let s = entry.representative().expect("entry 4 is concrete");
            let t = TorsionABC::new(
                Field::constant(grid, s.alpha),
                Field::constant(grid, s.beta),
                Field::zeros(grid),
            );
            worst = worst.max(torsion_components(&t).tau27_scale.max_abs());
        }
    }
    CheckOutcome::bounded(worst, 1e-14, "tau27 scale of entry-4 states")
}
