//! SU(3)-equivariant 3-form calculus on the warped product: G2
//! decomposition, `*d` and `d*`, and the Hodge Laplacian of the defining
//! 3-form in torsion coordinates.
//!
//! An equivariant 3-form is determined by three real functions of `r`: the
//! real and imaginary parts of the coefficient multiplying the holomorphic
//! part, and the coefficient on the `dr`-wedge part. The Laplacian is
//! evaluated in cleared-denominator form so nodes where `gamma` vanishes are
//! regular.

use crate::geometry::{TorsionABC, WarpedProfile};
use crate::numerics::{diff, Field, Grid};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LaplacianError {
    #[error("alpha + beta underflows at r = {r:.6} (|alpha+beta| = {value:.3e})")]
    SingularDenominator { r: f64, value: f64 },
    #[error("input torsion is not co-closed (max |gamma| = {max_gamma:.3e})")]
    NotCoClosed { max_gamma: f64 },
}

/// The (Re_1, Im_1, Re_2) triple of an SU(3)-equivariant 3-form.
#[derive(Debug, Clone)]
pub struct SymThreeForm {
    pub re1: Field,
    pub im1: Field,
    pub re2: Field,
}

impl SymThreeForm {
    pub fn new(re1: Field, im1: Field, re2: Field) -> Self {
        assert_eq!(re1.grid(), im1.grid(), "components must share a grid");
        assert_eq!(re1.grid(), re2.grid(), "components must share a grid");
        SymThreeForm { re1, im1, re2 }
    }

    /// The defining 3-form itself, (1, 0, 1).
    pub fn phi(grid: Grid) -> Self {
        SymThreeForm::new(
            Field::constant(grid, 1.0),
            Field::zeros(grid),
            Field::constant(grid, 1.0),
        )
    }

    pub fn grid(&self) -> Grid {
        self.re1.grid()
    }

    pub fn max_abs_diff(&self, other: &SymThreeForm) -> f64 {
        self.re1
            .max_abs_diff(&other.re1)
            .max(self.im1.max_abs_diff(&other.im1))
            .max(self.re2.max_abs_diff(&other.re2))
    }
}

/// G2-decomposition of an equivariant 3-form: a vector part and a symmetric
/// part `s = s_rr G^2 dr^2 + s_6 h^2 g_6`.
#[derive(Debug, Clone)]
pub struct G2Decomp {
    /// coefficient of `G^{-1} d/dr` in the vector part
    pub x_coeff: Field,
    /// coefficient of `G^2 dr^2`
    pub s_rr: Field,
    /// coefficient of `h^2 g_6`
    pub s_6: Field,
    pub trace_s: Field,
}

impl G2Decomp {
    /// Eigenvalues of `s` with one index raised: `(s_rr, s_6 delta_6)`.
    pub fn s_sharp(&self) -> (Field, Field) {
        (self.s_rr.clone(), self.s_6.clone())
    }
}

/// Decompose an equivariant 3-form into its G2 pieces:
/// vector coefficient `Im_1`, `s_rr = 3 Re_2 - 2 Re_1`, `s_6 = Re_1`,
/// `Tr s = 3 Re_2 + 4 Re_1`.
pub fn g2_decompose(chi: &SymThreeForm) -> G2Decomp {
    G2Decomp {
        x_coeff: chi.im1.clone(),
        s_rr: chi.re2.zip_with(&chi.re1, |b, a| 3.0 * b - 2.0 * a),
        s_6: chi.re1.clone(),
        trace_s: chi.re2.zip_with(&chi.re1, |b, a| 3.0 * b + 4.0 * a),
    }
}

/// Components of `*(d chi)` over a warped profile.
pub fn star_d(chi: &SymThreeForm, p: &WarpedProfile) -> SymThreeForm {
    assert_eq!(chi.grid(), p.grid, "form and profile must share a grid");
    let lambda = p.lambda();
    let re_a_prime = diff(&chi.re1);
    let im_a_prime = diff(&chi.im1);
    let h_prime = diff(&p.h);
    let theta_prime = diff(&p.theta);
    let n = p.grid.len();
    let mut re1 = Vec::with_capacity(n);
    let mut im1 = Vec::with_capacity(n);
    let mut re2 = Vec::with_capacity(n);
    for i in 0..n {
        let g = p.g.value(i);
        let h = p.h.value(i);
        let th = p.theta.value(i);
        let re_a = chi.re1.value(i);
        let im_a = chi.im1.value(i);
        let b = chi.re2.value(i);
        let hph = h_prime.value(i) / h;
        let tp = theta_prime.value(i);
        re1.push(
            (im_a_prime.value(i) + 3.0 * hph * im_a + tp * re_a
                - 3.0 * lambda * b * g * th.sin() / h)
                / g,
        );
        im1.push(
            (-re_a_prime.value(i) - 3.0 * hph * re_a + tp * im_a
                - 3.0 * lambda * b * g * th.cos() / h)
                / g,
        );
        re2.push(-4.0 * lambda / h * (th.sin() * re_a + th.cos() * im_a));
    }
    SymThreeForm::new(
        Field::new(p.grid, re1),
        Field::new(p.grid, im1),
        Field::new(p.grid, re2),
    )
}

/// Coefficients of `d(*chi)` and `*d*chi` over a warped profile.
///
/// The first field multiplies `G h^3 dr ^ omega^2`; the second multiplies
/// `4 h^{-1} (G^{-1} d/dr) hook phi`.
pub fn d_star(chi: &SymThreeForm, p: &WarpedProfile) -> (Field, Field) {
    assert_eq!(chi.grid(), p.grid, "form and profile must share a grid");
    let lambda = p.lambda();
    let b_prime = diff(&chi.re2);
    let h_prime = diff(&p.h);
    let n = p.grid.len();
    let mut five = Vec::with_capacity(n);
    let mut two = Vec::with_capacity(n);
    for i in 0..n {
        let g = p.g.value(i);
        let h = p.h.value(i);
        let th = p.theta.value(i);
        let re_a = chi.re1.value(i);
        let im_a = chi.im1.value(i);
        let b = chi.re2.value(i);
        let equiv = th.cos() * re_a - th.sin() * im_a;
        five.push(
            0.5 * b_prime.value(i) * h / g + 2.0 * h_prime.value(i) * b / g + 2.0 * lambda * equiv,
        );
        two.push(0.25 * b_prime.value(i) * h / g + h_prime.value(i) * b / g + lambda * equiv);
    }
    (Field::new(p.grid, five), Field::new(p.grid, two))
}

/// The co-closed Laplacian components, shared verbatim between the general
/// evaluation and its `gamma = 0` specialization.
#[inline]
pub fn coclosed_re1(a: f64, b: f64) -> f64 {
    a * a - 3.0 * b * a + 12.0 * b * b
}

#[inline]
pub fn coclosed_im1(da: f64, db: f64, g: f64) -> f64 {
    (6.0 * db - da) / g
}

#[inline]
pub fn coclosed_re2(a: f64, b: f64) -> f64 {
    -4.0 * b * (a - 3.0 * b)
}

fn denominator_floor(a: f64, b: f64) -> f64 {
    1e-13 * a.abs().max(b.abs()).max(1.0)
}

/// Components of the Hodge Laplacian of the defining 3-form, in torsion
/// coordinates with warp factor `G`.
///
/// The `gamma` terms are kept in cleared-denominator form (a single division
/// by `alpha + beta`), so nodes with `gamma = 0` take exactly the co-closed
/// arithmetic path.
pub fn laplacian_phi(t: &TorsionABC, g: &Field) -> Result<SymThreeForm, LaplacianError> {
    assert_eq!(
        t.grid(),
        g.grid(),
        "torsion and warp factor must share a grid"
    );
    let grid = t.grid();
    let da = diff(&t.alpha);
    let db = diff(&t.beta);
    let dc = diff(&t.gamma);
    let n = grid.len();
    let mut re1 = Vec::with_capacity(n);
    let mut im1 = Vec::with_capacity(n);
    let mut re2 = Vec::with_capacity(n);
    for i in 0..n {
        let a = t.alpha.value(i);
        let b = t.beta.value(i);
        let c = t.gamma.value(i);
        let gv = g.value(i);
        let g2i = 1.0 / (gv * gv);
        let (bracket1, bracket2) = if c == 0.0 {
            (0.0, 0.0)
        } else {
            let denom = a + b;
            if denom.abs() < denominator_floor(a, b) {
                return Err(LaplacianError::SingularDenominator {
                    r: grid.node(i),
                    value: denom.abs(),
                });
            }
            (
                c * (c * (4.0 * b - 3.0 * a) + 7.0 * db.value(i)) / denom,
                c * (c * (3.0 * b - 2.0 * a) + 5.0 * db.value(i)) / denom,
            )
        };
        re1.push(coclosed_re1(a, b) + 3.0 * g2i * (-dc.value(i) + bracket1));
        im1.push(coclosed_im1(da.value(i), db.value(i), gv) - 6.0 * c * a / gv);
        re2.push(coclosed_re2(a, b) + 4.0 * g2i * (-dc.value(i) + bracket2));
    }
    Ok(SymThreeForm::new(
        Field::new(grid, re1),
        Field::new(grid, im1),
        Field::new(grid, re2),
    ))
}

/// G2-decomposition of the Laplacian of a co-closed structure, evaluated
/// directly from the torsion polynomials:
/// `X = G^{-2}(6 beta' - alpha') d/dr`,
/// `s_rr = -2 alpha^2 - 6 alpha beta + 12 beta^2`, `s_6 = Re_1`.
///
/// Pointwise consistent with [`g2_decompose`] composed with
/// [`laplacian_phi`].
pub fn laplacian_g2_decomp(t: &TorsionABC, g: &Field) -> Result<G2Decomp, LaplacianError> {
    assert_eq!(
        t.grid(),
        g.grid(),
        "torsion and warp factor must share a grid"
    );
    let max_gamma = t.gamma.max_abs();
    if max_gamma > 1e-9 * t.max_magnitude().max(1.0) {
        return Err(LaplacianError::NotCoClosed { max_gamma });
    }
    let grid = t.grid();
    let da = diff(&t.alpha);
    let db = diff(&t.beta);
    let n = grid.len();
    let mut x = Vec::with_capacity(n);
    let mut s_rr = Vec::with_capacity(n);
    let mut s_6 = Vec::with_capacity(n);
    let mut trace = Vec::with_capacity(n);
    for i in 0..n {
        let a = t.alpha.value(i);
        let b = t.beta.value(i);
        let gv = g.value(i);
        x.push((6.0 * db.value(i) - da.value(i)) / gv);
        let rr = -2.0 * a * a - 6.0 * a * b + 12.0 * b * b;
        let six = coclosed_re1(a, b);
        s_rr.push(rr);
        s_6.push(six);
        trace.push(rr + 6.0 * six);
    }
    Ok(G2Decomp {
        x_coeff: Field::new(grid, x),
        s_rr: Field::new(grid, s_rr),
        s_6: Field::new(grid, s_6),
        trace_s: Field::new(grid, trace),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::SU3Background;
    use crate::numerics::Grid;
    use std::f64::consts::PI;

    fn grid() -> Grid {
        Grid::interval(128, 0.0, 1.0)
    }

    fn profile(lambda: f64, g: f64, h: f64, theta: f64) -> WarpedProfile {
        let gr = grid();
        WarpedProfile::new(
            Field::constant(gr, g),
            Field::constant(gr, h),
            Field::constant(gr, theta),
            SU3Background::new(lambda),
        )
    }

    #[test]
    fn decompose_phi() {
        let d = g2_decompose(&SymThreeForm::phi(grid()));
        assert_eq!(d.x_coeff.max_abs(), 0.0);
        assert_eq!(d.s_rr.value(0), 1.0);
        assert_eq!(d.s_6.value(0), 1.0);
        assert_eq!(d.trace_s.value(0), 7.0);
    }

    #[test]
    fn decompose_pure_vector() {
        let g = grid();
        let chi = SymThreeForm::new(Field::zeros(g), Field::constant(g, 1.0), Field::zeros(g));
        let d = g2_decompose(&chi);
        assert_eq!(d.x_coeff.value(0), 1.0);
        assert_eq!(d.s_rr.max_abs(), 0.0);
        assert_eq!(d.s_6.max_abs(), 0.0);
    }

    #[test]
    fn decompose_arithmetic() {
        let g = grid();
        let chi = SymThreeForm::new(
            Field::constant(g, 2.0),
            Field::zeros(g),
            Field::constant(g, -1.0),
        );
        let d = g2_decompose(&chi);
        assert_eq!(d.s_rr.value(0), -7.0);
        assert_eq!(d.s_6.value(0), 2.0);
        assert_eq!(d.trace_s.value(0), 5.0);
        // trace identity s_rr + 6 s_6
        assert!((d.trace_s.value(0) - (d.s_rr.value(0) + 6.0 * d.s_6.value(0))).abs() < 1e-15);
    }

    #[test]
    fn star_d_kills_constants_on_flat_cy() {
        let p = profile(0.0, 1.0, 1.0, 0.3);
        let g = grid();
        let chi = SymThreeForm::new(
            Field::constant(g, 0.7),
            Field::constant(g, -1.2),
            Field::constant(g, 2.0),
        );
        let out = star_d(&chi, &p);
        assert_eq!(
            out.max_abs_diff(&SymThreeForm::new(
                Field::zeros(g),
                Field::zeros(g),
                Field::zeros(g),
            )),
            0.0
        );
    }

    #[test]
    fn star_d_dr_wedge_part_on_nk() {
        let p = profile(1.0, 1.0, 1.0, 0.0);
        let g = grid();
        let chi = SymThreeForm::new(Field::zeros(g), Field::zeros(g), Field::constant(g, 1.0));
        let out = star_d(&chi, &p);
        assert_eq!(out.re1.max_abs(), 0.0);
        assert!(out.im1.max_abs_diff(&Field::constant(g, -3.0)) < 1e-14);
        assert_eq!(out.re2.max_abs(), 0.0);
    }

    #[test]
    fn star_d_of_phi_gives_torsion_components() {
        // *(d phi) components against their closed forms for a varying profile
        let gr = Grid::interval(256, 0.1, 1.1);
        let p = WarpedProfile::new(
            Field::from_fn(gr, |r| 1.0 + 0.2 * r),
            Field::from_fn(gr, |r| 2.0 - 0.5 * r * r),
            Field::from_fn(gr, |r| 0.7 * r),
            SU3Background::nearly_kahler(),
        );
        let out = star_d(&SymThreeForm::phi(gr), &p);
        let lambda = 1.0;
        let hp = diff(&p.h);
        let tp = diff(&p.theta);
        for i in 0..gr.len() {
            let (g, h, th) = (p.g.value(i), p.h.value(i), p.theta.value(i));
            let re1 = tp.value(i) / g - 3.0 * lambda * th.sin() / h;
            let im1 = -3.0 / (g * h) * (hp.value(i) + lambda * g * th.cos());
            let re2 = -4.0 * lambda * th.sin() / h;
            assert!((out.re1.value(i) - re1).abs() < 1e-11);
            assert!((out.im1.value(i) - im1).abs() < 1e-11);
            assert!((out.re2.value(i) - re2).abs() < 1e-13);
        }
    }

    #[test]
    fn d_star_trivial_on_product() {
        let p = profile(0.0, 1.0, 1.0, 0.0);
        let (five, two) = d_star(&SymThreeForm::phi(grid()), &p);
        assert_eq!(five.max_abs(), 0.0);
        assert_eq!(two.max_abs(), 0.0);
    }

    #[test]
    fn d_star_cos_term() {
        let p = profile(1.0, 1.0, 1.0, 0.0);
        let g = grid();
        let chi = SymThreeForm::new(Field::constant(g, 1.0), Field::zeros(g), Field::zeros(g));
        let (_, two) = d_star(&chi, &p);
        assert!(two.max_abs_diff(&Field::constant(g, 1.0)) < 1e-14);
    }

    #[test]
    fn d_star_b_prime_term() {
        let g = grid();
        let p = profile(0.0, 1.0, 1.0, 0.0);
        let chi = SymThreeForm::new(Field::zeros(g), Field::zeros(g), Field::from_fn(g, |r| r));
        let (five, two) = d_star(&chi, &p);
        assert!(five.max_abs_diff(&Field::constant(g, 0.5)) < 1e-10);
        assert!(two.max_abs_diff(&Field::constant(g, 0.25)) < 1e-10);
    }

    #[test]
    fn laplacian_coclosed_polynomials() {
        let g = grid();
        let t = TorsionABC::new(
            Field::constant(g, 1.0),
            Field::constant(g, 2.0),
            Field::zeros(g),
        );
        let lp = laplacian_phi(&t, &Field::constant(g, 1.0)).unwrap();
        // alpha^2 - 3 alpha beta + 12 beta^2 = 1 - 6 + 48
        assert_eq!(lp.re1.value(0), 43.0);
        assert_eq!(lp.im1.value(0), 0.0);
        // -4 beta (alpha - 3 beta) = -8 * (-5)
        assert_eq!(lp.re2.value(0), 40.0);
    }

    #[test]
    fn laplacian_coclosed_cy_specialization() {
        // beta = 0: components reduce to (alpha^2, -alpha'/G, 0)
        let g = Grid::circle(128, 0.0, 2.0 * PI);
        let alpha = Field::from_fn(g, |r| 0.5 + 0.2 * r.sin());
        let t = TorsionABC::new(alpha.clone(), Field::zeros(g), Field::zeros(g));
        let warp = Field::constant(g, 2.0);
        let lp = laplacian_phi(&t, &warp).unwrap();
        assert_eq!(lp.re2.max_abs(), 0.0);
        let expect_re1 = alpha.map(|a| a * a);
        assert!(lp.re1.max_abs_diff(&expect_re1) < 1e-15);
        let expect_im1 = diff(&alpha).map(|da| -da / 2.0);
        assert!(lp.im1.max_abs_diff(&expect_im1) < 1e-15);
    }

    #[test]
    fn laplacian_cy_with_gamma() {
        let g = grid();
        let t = TorsionABC::new(
            Field::constant(g, 1.0),
            Field::zeros(g),
            Field::constant(g, 1.0),
        );
        let lp = laplacian_phi(&t, &Field::constant(g, 1.0)).unwrap();
        assert!(lp.re1.max_abs_diff(&Field::constant(g, -8.0)) < 1e-12);
        assert!(lp.im1.max_abs_diff(&Field::constant(g, -6.0)) < 1e-12);
        assert!(lp.re2.max_abs_diff(&Field::constant(g, -8.0)) < 1e-12);
    }

    #[test]
    fn laplacian_singular_denominator() {
        let g = grid();
        let t = TorsionABC::new(
            Field::constant(g, 1.0),
            Field::constant(g, -1.0),
            Field::constant(g, 0.5),
        );
        assert!(matches!(
            laplacian_phi(&t, &Field::constant(g, 1.0)),
            Err(LaplacianError::SingularDenominator { .. })
        ));
    }

    #[test]
    fn g2_decomp_constant_substitution() {
        let g = grid();
        let t = TorsionABC::new(
            Field::constant(g, 1.0),
            Field::constant(g, 1.0),
            Field::zeros(g),
        );
        let d = laplacian_g2_decomp(&t, &Field::constant(g, 1.0)).unwrap();
        assert_eq!(d.x_coeff.max_abs(), 0.0);
        // -2 - 6 + 12
        assert_eq!(d.s_rr.value(0), 4.0);
        assert_eq!(d.s_6.value(0), 10.0);
        assert_eq!(d.trace_s.value(0), 64.0);
    }

    #[test]
    fn g2_decomp_requires_coclosed() {
        let g = grid();
        let t = TorsionABC::new(
            Field::constant(g, 1.0),
            Field::zeros(g),
            Field::constant(g, 0.1),
        );
        assert!(matches!(
            laplacian_g2_decomp(&t, &Field::constant(g, 1.0)),
            Err(LaplacianError::NotCoClosed { .. })
        ));
    }

    #[test]
    fn laplacian_is_iterated_star_d_when_coclosed() {
        // with d(psi) = 0 the Laplacian of the 3-form reduces to *d(*d phi),
        // an entirely independent evaluation route
        let grid = Grid::circle(512, 0.0, 2.0 * PI);
        let mut rng = crate::verify::sampling::rng(42);
        for _ in 0..5 {
            let p = crate::verify::sampling::random_coclosed_nk_profile(&mut rng, grid);
            let t = crate::geometry::compute_abc(&p);
            let star_d_phi = star_d(&SymThreeForm::phi(grid), &p);
            let iterated = star_d(&star_d_phi, &p);
            let direct = laplacian_phi(&t, &p.g).expect("regular");
            assert!(iterated.max_abs_diff(&direct) < 1e-6);
            // and d(*phi) vanishes: both coefficients are multiples of gamma
            let (five, two) = d_star(&SymThreeForm::phi(grid), &p);
            assert!(five.max_abs() < 1e-8);
            assert!(two.max_abs() < 1e-8);
        }
    }

    #[test]
    fn decomposition_consistency_smooth_fields() {
        let g = Grid::circle(256, 0.0, 2.0 * std::f64::consts::PI);
        let t = TorsionABC::new(
            Field::from_fn(g, |r| 0.8 + 0.3 * r.sin()),
            Field::from_fn(g, |r| 0.4 + 0.2 * (2.0 * r).cos()),
            Field::zeros(g),
        );
        let warp = Field::from_fn(g, |r| (0.2 * r.cos()).exp());
        let direct = laplacian_g2_decomp(&t, &warp).unwrap();
        let composed = g2_decompose(&laplacian_phi(&t, &warp).unwrap());
        assert!(direct.x_coeff.max_abs_diff(&composed.x_coeff) < 1e-12);
        assert!(direct.s_rr.max_abs_diff(&composed.s_rr) < 1e-12);
        assert!(direct.s_6.max_abs_diff(&composed.s_6) < 1e-12);
        assert!(direct.trace_s.max_abs_diff(&composed.trace_s) < 1e-12);
    }
}
