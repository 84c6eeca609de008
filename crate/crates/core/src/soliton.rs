//! Soliton ODE systems of the modified coflow in the `G = 1` gauge:
//! the nearly-Kahler system and its `k = 2` specialization, the Calabi-Yau
//! system with its first integral, all three closed-form Calabi-Yau
//! families, compact (periodic) solutions, the catalog of nearly-Kahler
//! solutions with a constant variable, and the reduction recovering the
//! Karigiannis-McKay-Tsui soliton.
//!
//! The nearly-Kahler system is differential-algebraic: the `beta` equation
//! carries a factor `1/l`, so `l = 0` is a singular locus where the system
//! degenerates to polynomial constraints. Integration refuses to cross it;
//! the constant solutions living there are enumerated by
//! [`nk_constant_catalog`].

use crate::numerics::{diff, integrate_ode, Field, OdeError, StepControl};
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SolitonError {
    #[error("the soliton system is a constraint, not an ODE, where l = 0 (|l| = {l_abs:.3e})")]
    SingularAtLZero { l_abs: f64 },
    #[error("alpha + beta underflows (|alpha+beta| = {value:.3e})")]
    SingularDenominator { value: f64 },
    #[error("invalid closed-form family: {0}")]
    InvalidFamily(&'static str),
    #[error("evaluation outside the validity domain: {0}")]
    DomainError(&'static str),
    #[error(transparent)]
    Ode(#[from] OdeError),
}

const SINGULAR_TOL: f64 = 1e-13;

/// Parameters of the soliton equations. `k` is fixed to 2 for the catalogs
/// and closed forms; the general right-hand side accepts any `k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolitonParams {
    pub c: f64,
    pub mu: f64,
    pub k: f64,
}

impl SolitonParams {
    pub fn new(c: f64, mu: f64, k: f64) -> Self {
        assert!(c.is_finite() && mu.is_finite() && k.is_finite());
        SolitonParams { c, mu, k }
    }

    pub fn canonical(c: f64, mu: f64) -> Self {
        Self::new(c, mu, 2.0)
    }
}

/// Pointwise state `(alpha, beta, l)` in the `G = 1` gauge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolitonState {
    pub alpha: f64,
    pub beta: f64,
    pub l: f64,
}

impl SolitonState {
    pub fn new(alpha: f64, beta: f64, l: f64) -> Self {
        assert!(alpha.is_finite() && beta.is_finite() && l.is_finite());
        SolitonState { alpha, beta, l }
    }

    /// Calabi-Yau state (`lambda = 0` forces `beta = 0`).
    pub fn cy(alpha: f64, l: f64) -> Self {
        Self::new(alpha, 0.0, l)
    }
}

fn scale_of(s: &SolitonState) -> f64 {
    s.alpha.abs().max(s.beta.abs()).max(1.0)
}

/// Nearly-Kahler soliton right-hand side at `k = 2`:
///
/// ```text
/// l'     = -alpha^2 + 3 beta^2 + 12 alpha beta + 2C alpha - mu
/// beta'  = (9 beta^2 - alpha beta + 2C beta + mu)(alpha + beta)/l
/// alpha' = alpha l + 6 beta'
/// ```
pub fn soliton_rhs_nk(
    s: &SolitonState,
    p: &SolitonParams,
) -> Result<(f64, f64, f64), SolitonError> {
    let (a, b, l) = (s.alpha, s.beta, s.l);
    let (c, mu) = (p.c, p.mu);
    // the torsion-free line alpha = beta = 0 is regular: only l evolves
    if a == 0.0 && b == 0.0 {
        return Ok((0.0, 0.0, -mu));
    }
    if l.abs() < SINGULAR_TOL * scale_of(s).max(1.0) {
        return Err(SolitonError::SingularAtLZero { l_abs: l.abs() });
    }
    let denom = a + b;
    if denom.abs() < SINGULAR_TOL * scale_of(s) {
        return Err(SolitonError::SingularDenominator { value: denom.abs() });
    }
    let beta_p = (9.0 * b * b - a * b + 2.0 * c * b + mu) * denom / l;
    let alpha_p = a * l + 6.0 * beta_p;
    let l_p = -a * a + 3.0 * b * b + 12.0 * a * b + 2.0 * c * a - mu;
    Ok((alpha_p, beta_p, l_p))
}

/// Outcome of the general-`k` soliton right-hand side: at `k = 1` the
/// phase equation degenerates to the constraint `alpha l = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GeneralKRhs {
    Rates { alpha: f64, beta: f64, l: f64 },
    ConstraintOnly { alpha_l: f64 },
}

/// Soliton right-hand side before specializing `k`:
///
/// ```text
/// l'    = (1-k) alpha^2 + 3 beta^2 + 6k alpha beta + kC alpha - mu
/// beta' = (3(2k-1) beta^2 + (1-k) alpha beta + kC beta + mu)(alpha+beta)/l
/// alpha'= alpha l/(k-1) + 6 beta'
/// ```
///
/// At `k = 2` this agrees exactly with [`soliton_rhs_nk`].
pub fn soliton_rhs_general_k(
    s: &SolitonState,
    p: &SolitonParams,
    k: f64,
) -> Result<GeneralKRhs, SolitonError> {
    let (a, b, l) = (s.alpha, s.beta, s.l);
    let (c, mu) = (p.c, p.mu);
    if k == 1.0 {
        return Ok(GeneralKRhs::ConstraintOnly { alpha_l: a * l });
    }
    if a == 0.0 && b == 0.0 {
        return Ok(GeneralKRhs::Rates {
            alpha: 0.0,
            beta: 0.0,
            l: -mu,
        });
    }
    if l.abs() < SINGULAR_TOL * scale_of(s).max(1.0) {
        return Err(SolitonError::SingularAtLZero { l_abs: l.abs() });
    }
    let denom = a + b;
    if denom.abs() < SINGULAR_TOL * scale_of(s) {
        return Err(SolitonError::SingularDenominator { value: denom.abs() });
    }
    let beta_p = (3.0 * (2.0 * k - 1.0) * b * b + (1.0 - k) * a * b + k * c * b + mu) * denom / l;
    let alpha_p = a * l / (k - 1.0) + 6.0 * beta_p;
    let l_p = (1.0 - k) * a * a + 3.0 * b * b + 6.0 * k * a * b + k * c * a - mu;
    Ok(GeneralKRhs::Rates {
        alpha: alpha_p,
        beta: beta_p,
        l: l_p,
    })
}

/// Calabi-Yau soliton system (`lambda = 0`, `k = 2`, `mu = 0`):
/// `(alpha', l') = (alpha l, -alpha^2 + 2C alpha)`.
pub fn cy_soliton_rhs(s: &SolitonState, c: f64) -> (f64, f64) {
    let (a, l) = (s.alpha, s.l);
    (a * l, -a * a + 2.0 * c * a)
}

/// First integral of the Calabi-Yau system: `R^2 = l^2 + (alpha - 2C)^2`.
pub fn first_integral_r2(s: &SolitonState, c: f64) -> f64 {
    s.l * s.l + (s.alpha - 2.0 * c) * (s.alpha - 2.0 * c)
}

/// The three closed-form Calabi-Yau families, split by the sign of
/// `R^2 - 4C^2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FamilyKind {
    /// `R^2 = 4C^2`, seeded at `alpha_0 = 4C`
    Parabolic,
    /// `R^2 > 4C^2`, `Q^2 = R^2 - 4C^2`
    Hyperbolic,
    /// `R^2 < 4C^2`, `Q^2 = 4C^2 - R^2`; the compact candidates
    Trigonometric,
}

/// A closed-form Calabi-Yau soliton: kind, parameters `(C, R)`, anchor
/// `r0` where `l = 0`, phase offset `theta0`, and the branch selector
/// `sign` picking `alpha_0 = 2C + sign * R`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CYFamily {
    pub kind: FamilyKind,
    pub c: f64,
    pub radius: f64,
    pub r0: f64,
    pub theta0: f64,
    pub sign: i8,
}

impl CYFamily {
    pub fn new(
        kind: FamilyKind,
        c: f64,
        radius: f64,
        r0: f64,
        theta0: f64,
        sign: i8,
    ) -> Result<Self, SolitonError> {
        if sign != 1 && sign != -1 {
            return Err(SolitonError::InvalidFamily("sign must be +1 or -1"));
        }
        if !(c.is_finite() && radius.is_finite() && r0.is_finite() && theta0.is_finite()) {
            return Err(SolitonError::InvalidFamily("parameters must be finite"));
        }
        let disc = radius * radius - 4.0 * c * c;
        let scale = (radius * radius).max(4.0 * c * c).max(1e-30);
        match kind {
            FamilyKind::Parabolic if disc.abs() > 1e-9 * scale => Err(SolitonError::InvalidFamily(
                "parabolic kind needs R^2 = 4C^2",
            )),
            FamilyKind::Hyperbolic if disc <= 0.0 => Err(SolitonError::InvalidFamily(
                "hyperbolic kind needs R^2 > 4C^2",
            )),
            FamilyKind::Trigonometric if disc >= 0.0 => Err(SolitonError::InvalidFamily(
                "trigonometric kind needs R^2 < 4C^2",
            )),
            _ => Ok(CYFamily {
                kind,
                c,
                radius,
                r0,
                theta0,
                sign,
            }),
        }
    }

    pub fn parabolic(c: f64, r0: f64, theta0: f64) -> Self {
        Self::new(FamilyKind::Parabolic, c, 2.0 * c.abs(), r0, theta0, 1).unwrap()
    }

    pub fn q(&self) -> f64 {
        (self.radius * self.radius - 4.0 * self.c * self.c)
            .abs()
            .sqrt()
    }

    /// Value of `alpha` at the anchor point `r0`.
    pub fn alpha0(&self) -> f64 {
        match self.kind {
            FamilyKind::Parabolic => 4.0 * self.c,
            _ => 2.0 * self.c + f64::from(self.sign) * self.radius,
        }
    }
}

/// Evaluate a closed-form family at `r`, returning `(alpha, l, theta)` with
/// the phase unwrapped across arctangent branch cuts.
pub fn cy_closed_form(f: &CYFamily, r: f64) -> Result<(f64, f64, f64), SolitonError> {
    evaluate_family(f, r, true)
}

/// Same as [`cy_closed_form`] but with the raw principal-branch phase.
pub fn cy_closed_form_principal(f: &CYFamily, r: f64) -> Result<(f64, f64, f64), SolitonError> {
    evaluate_family(f, r, false)
}

fn evaluate_family(f: &CYFamily, r: f64, unwrap: bool) -> Result<(f64, f64, f64), SolitonError> {
    let (c, radius) = (f.c, f.radius);
    match f.kind {
        FamilyKind::Parabolic => {
            let rt = r - f.r0;
            let d = 4.0 * c * c * rt * rt + 1.0;
            let alpha = 4.0 * c / d;
            let l = -8.0 * c * c * rt / d;
            let theta = 2.0 * (2.0 * c * rt).atan() + f.theta0;
            Ok((alpha, l, theta))
        }
        FamilyKind::Hyperbolic => {
            let q = f.q();
            let s = f64::from(f.sign);
            let rt = r - f.r0;
            let e = (-rt * q).exp();
            let d = (e * radius - s * 2.0 * c).powi(2) + q * q;
            let alpha = s * 2.0 * radius * q * q * e / d;
            let l = radius * radius * q * (e * e - 1.0) / d;
            let theta_tilde0 = f.theta0 - 2.0 * ((2.0 * c - s * radius) / q).atan();
            let theta = 2.0 * ((2.0 * c - s * e * radius) / q).atan() + theta_tilde0;
            Ok((alpha, l, theta))
        }
        FamilyKind::Trigonometric => {
            let q = f.q();
            // the alpha0 = 2C + R branch is the cos form shifted by pi/Q
            let rt = if f.sign > 0 {
                r - f.r0 + PI / q
            } else {
                r - f.r0
            };
            let d = 2.0 * c + radius * (rt * q).cos();
            if d.abs() < 1e-12 * (c.abs() + radius.abs()).max(1.0) {
                return Err(SolitonError::DomainError("2C + R cos(rQ) vanishes"));
            }
            let alpha = q * q / d;
            let l = q * radius * (rt * q).sin() / d;
            let kappa = (2.0 * c - radius) / q;
            let x = 0.5 * rt * q;
            let theta = if unwrap {
                // continuous branch of 2 arctan(kappa tan x): for kappa > 0,
                // arctan(kappa tan x) = x + arctan((kappa-1) sin x cos x /
                // (cos^2 x + kappa sin^2 x)), smooth across the poles of tan
                let k = kappa.abs();
                let (s, co) = x.sin_cos();
                let correction = ((k - 1.0) * s * co / (co * co + k * s * s)).atan();
                kappa.signum() * 2.0 * (x + correction) + f.theta0
            } else {
                2.0 * (kappa * x.tan()).atan() + f.theta0
            };
            Ok((alpha, l, theta))
        }
    }
}

/// Result of the compactness test for the trigonometric family.
///
/// `periodic` is the numerical verdict (sample-and-compare of `alpha`, `l`
/// and `e^{i theta}` across one circumference); the two analytic readings
/// `Q = 2n` and `Q^2 = 2n` are reported side by side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Periodicity {
    pub periodic: bool,
    pub q: f64,
    /// integer `n` when `Q = 2n`
    pub n_half_q: Option<i64>,
    /// integer `n` when `Q^2 = 2n`
    pub n_half_q_squared: Option<i64>,
}

/// Whether the trigonometric family at `(C, R)` closes up on a circle of
/// the given circumference (2 pi for the standard circle).
pub fn cy_periodicity(c: f64, radius: f64, circumference: f64) -> Periodicity {
    let disc = 4.0 * c * c - radius * radius;
    if disc <= 0.0 {
        return Periodicity {
            periodic: false,
            q: 0.0,
            n_half_q: None,
            n_half_q_squared: None,
        };
    }
    let q = disc.sqrt();
    let n_half_q = near_integer(q / 2.0);
    let n_half_q_squared = near_integer(q * q / 2.0);

    let family = CYFamily::new(FamilyKind::Trigonometric, c, radius, 0.0, 0.0, -1)
        .expect("validated trigonometric parameters");
    let tol = 1e-10;
    let mut periodic = true;
    let samples = 97;
    for i in 0..samples {
        let r = circumference * (i as f64 + 0.21) / samples as f64;
        let (a1, l1, th1) = match cy_closed_form(&family, r) {
            Ok(v) => v,
            Err(_) => {
                periodic = false;
                break;
            }
        };
        let (a2, l2, th2) = match cy_closed_form(&family, r + circumference) {
            Ok(v) => v,
            Err(_) => {
                periodic = false;
                break;
            }
        };
        if (a1 - a2).abs() > tol
            || (l1 - l2).abs() > tol
            || (th1.cos() - th2.cos()).abs() > tol
            || (th1.sin() - th2.sin()).abs() > tol
        {
            periodic = false;
            break;
        }
    }
    Periodicity {
        periodic,
        q,
        n_half_q,
        n_half_q_squared,
    }
}

fn near_integer(x: f64) -> Option<i64> {
    let n = x.round();
    if (x - n).abs() < 1e-9 {
        Some(n as i64)
    } else {
        None
    }
}

/// Max residual of the soliton equations over sampled fields
/// `(alpha, beta, l)` of `r`. All equations are evaluated with every term
/// moved to one side; the `beta` equation is cleared of its
/// `alpha + beta` denominator, and the co-closure residual keeps the
/// overall factor of `l` from the underlying evolution identity.
pub fn soliton_residual(
    alpha: &Field,
    beta: &Field,
    l: &Field,
    p: &SolitonParams,
    lambda: f64,
) -> f64 {
    assert_eq!(alpha.grid(), beta.grid(), "fields must share a grid");
    assert_eq!(alpha.grid(), l.grid(), "fields must share a grid");
    let (k, c, mu) = (p.k, p.c, p.mu);
    let grid = alpha.grid();
    let n = grid.len();
    let db = diff(beta);
    let dl = diff(l);
    let trace = alpha.zip_with(beta, |a, b| a - 6.0 * b);
    let dtrace = diff(&trace);
    // q = beta'/(alpha + beta), with the 0/0 of exactly constant beta
    // resolved to 0
    let q = Field::new(
        grid,
        (0..n)
            .map(|i| {
                let bp = db.value(i);
                if bp == 0.0 {
                    0.0
                } else {
                    bp / (alpha.value(i) + beta.value(i))
                }
            })
            .collect(),
    );
    let dq = diff(&q);

    let mut worst = 0.0_f64;
    for i in 0..n {
        let a = alpha.value(i);
        let b = beta.value(i);
        let lv = l.value(i);
        let r1 = (1.0 - k) * a * a + 3.0 * b * b + 6.0 * k * a * b + k * c * a - mu - dl.value(i);
        let r2 = (k - 1.0) * dtrace.value(i) - a * lv;
        let r3 = (3.0 * (1.0 - 2.0 * k) * b * b + (k - 1.0) * a * b - k * c * b - mu) * (a + b)
            + db.value(i) * lv;
        worst = worst.max(r1.abs()).max(r2.abs()).max(r3.abs());
        if lambda != 0.0 {
            let qv = q.value(i);
            let r4 = lv * (qv * qv - dq.value(i) - a * b);
            worst = worst.max(r4.abs());
        }
    }
    worst
}

/// [`soliton_residual`] for a constant state; derivative terms drop out.
pub fn soliton_residual_at(s: &SolitonState, p: &SolitonParams, lambda: f64) -> f64 {
    let (k, c, mu) = (p.k, p.c, p.mu);
    let (a, b, l) = (s.alpha, s.beta, s.l);
    let r1 = (1.0 - k) * a * a + 3.0 * b * b + 6.0 * k * a * b + k * c * a - mu;
    let r2 = a * l;
    let r3 = (3.0 * (1.0 - 2.0 * k) * b * b + (k - 1.0) * a * b - k * c * b - mu) * (a + b);
    let mut worst = r1.abs().max(r2.abs()).max(r3.abs());
    if lambda != 0.0 {
        worst = worst.max((l * a * b).abs());
    }
    worst
}

/// How a catalog variable depends on `r`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CatalogValue {
    Value(f64),
    /// any constant works
    Arbitrary,
    /// `slope * r + const` with a free constant
    LinearInR {
        slope: f64,
    },
}

/// One family of nearly-Kahler soliton solutions with a constant variable.
#[derive(Debug, Clone)]
pub struct NKCatalogEntry {
    pub id: u8,
    pub alpha: CatalogValue,
    pub beta: CatalogValue,
    pub l: CatalogValue,
    pub mu: f64,
    pub validity: &'static str,
}

impl NKCatalogEntry {
    /// A concrete representative state (free values resolved to simple
    /// choices) for residual evaluation; linear-in-r values need the field
    /// form instead.
    pub fn representative(&self) -> Option<SolitonState> {
        let pick = |v: &CatalogValue| match v {
            CatalogValue::Value(x) => Some(*x),
            CatalogValue::Arbitrary => Some(0.7),
            CatalogValue::LinearInR { .. } => None,
        };
        Some(SolitonState::new(
            pick(&self.alpha)?,
            pick(&self.beta)?,
            pick(&self.l)?,
        ))
    }
}

/// Every catalog family whose validity constraint holds at `(C, mu)`, with
/// concrete values:
///
/// 1. `alpha = beta = 0`, `l' = -mu`;
/// 2. `alpha = 0`, `beta` a real root of `9 beta^2 + 2C beta + mu = 0`,
///    `l' = 2 beta (6 beta + C)`;
/// 3. `alpha = 0`, `beta = -C/6`, requires `mu = C^2/12`, `l` an arbitrary
///    constant;
/// 4. `l = 0`, `alpha = (C +/- sqrt(C^2 - 10 mu))/10`, `beta = -alpha`, for
///    `mu <= C^2/10`;
/// 5. `l = 0`, `alpha = 2C +/- 4 sqrt(3 mu)`, `beta = +/- sqrt(3 mu)/3`, for
///    `mu >= 0` (both sign branches solve the constraints).
pub fn nk_constant_catalog(c: f64, mu: f64) -> Vec<NKCatalogEntry> {
    let mut entries = Vec::new();

    entries.push(NKCatalogEntry {
        id: 1,
        alpha: CatalogValue::Value(0.0),
        beta: CatalogValue::Value(0.0),
        l: CatalogValue::LinearInR { slope: -mu },
        mu,
        validity: "any (C, mu)",
    });

    let disc2 = c * c - 9.0 * mu;
    if disc2 >= 0.0 {
        let root = disc2.sqrt();
        for b in [(-c + root) / 9.0, (-c - root) / 9.0] {
            entries.push(NKCatalogEntry {
                id: 2,
                alpha: CatalogValue::Value(0.0),
                beta: CatalogValue::Value(b),
                l: CatalogValue::LinearInR {
                    slope: 2.0 * b * (6.0 * b + c),
                },
                mu,
                validity: "mu <= C^2/9 (real beta roots)",
            });
        }
    }

    if (mu - c * c / 12.0).abs() <= 1e-12 * (c * c).max(1.0) {
        entries.push(NKCatalogEntry {
            id: 3,
            alpha: CatalogValue::Value(0.0),
            beta: CatalogValue::Value(-c / 6.0),
            l: CatalogValue::Arbitrary,
            mu,
            validity: "mu = C^2/12",
        });
    }

    let disc4 = c * c - 10.0 * mu;
    if disc4 >= 0.0 {
        let root = disc4.sqrt();
        for a in [(c + root) / 10.0, (c - root) / 10.0] {
            entries.push(NKCatalogEntry {
                id: 4,
                alpha: CatalogValue::Value(a),
                beta: CatalogValue::Value(-a),
                l: CatalogValue::Value(0.0),
                mu,
                validity: "mu <= C^2/10",
            });
        }
    }

    if mu >= 0.0 {
        let s = (3.0 * mu).sqrt();
        for (a, b) in [(2.0 * c + 4.0 * s, s / 3.0), (2.0 * c - 4.0 * s, -s / 3.0)] {
            entries.push(NKCatalogEntry {
                id: 5,
                alpha: CatalogValue::Value(a),
                beta: CatalogValue::Value(b),
                l: CatalogValue::Value(0.0),
                mu,
                validity: "mu >= 0",
            });
            if s == 0.0 {
                break; // the two branches coincide at mu = 0
            }
        }
    }

    entries
}

/// Residual of one catalog entry, with free constants resolved to simple
/// representatives; linear-in-r entries are evaluated as fields over a
/// sample grid so the derivative terms participate.
pub fn catalog_entry_residual(e: &NKCatalogEntry, p: &SolitonParams) -> f64 {
    use crate::numerics::Grid;
    match e.representative() {
        Some(state) => soliton_residual_at(&state, p, 1.0),
        None => {
            let grid = Grid::interval(64, 0.0, 1.0);
            let value = |v: &CatalogValue| match v {
                CatalogValue::Value(x) => *x,
                CatalogValue::Arbitrary => 0.7,
                CatalogValue::LinearInR { .. } => unreachable!("only l is linear in r"),
            };
            let slope = match e.l {
                CatalogValue::LinearInR { slope } => slope,
                _ => unreachable!("representative() covers constant l"),
            };
            let alpha = Field::constant(grid, value(&e.alpha));
            let beta = Field::constant(grid, value(&e.beta));
            let l = Field::from_fn(grid, |r| slope * r + 0.3);
            soliton_residual(&alpha, &beta, &l, p, 1.0)
        }
    }
}

/// Conserved quantity along constant-`alpha` soliton trajectories:
/// `F = alpha l^2 + 12 (beta^3 + 6 alpha beta^2 - (alpha^2 - 2C alpha + mu) beta)`.
pub fn nk_conserved_f(s: &SolitonState, c: f64, mu: f64) -> f64 {
    let (a, b, l) = (s.alpha, s.beta, s.l);
    a * l * l + 12.0 * (b * b * b + 6.0 * a * b * b - (a * a - 2.0 * c * a + mu) * b)
}

/// The Karigiannis-McKay-Tsui soliton profile:
/// `l = b (1 - c^2 e^{2br})/(1 + c^2 e^{2br})`, `theta = 2 arctan(c e^{br})`.
pub fn kmt_reduction(b: f64, c: f64, r: f64) -> (f64, f64) {
    let w = c * c * (2.0 * b * r).exp();
    let l = b * (1.0 - w) / (1.0 + w);
    let theta = 2.0 * (c * (b * r).exp()).atan();
    (l, theta)
}

/// The hyperbolic family with `C = 0` that realizes a given KMT profile
/// (`b < 0`, `c != 0`) under `b = -Q`, `c = -A0/(2Q)`.
pub fn kmt_matching_family(b: f64, c: f64) -> Result<CYFamily, SolitonError> {
    if b >= 0.0 || c == 0.0 {
        return Err(SolitonError::InvalidFamily(
            "the KMT reparametrization needs b < 0 and c != 0",
        ));
    }
    let q = -b;
    let sign: i8 = if c < 0.0 { 1 } else { -1 };
    let r0 = c.abs().ln() / q;
    let theta0 = -f64::from(sign) * PI / 2.0;
    CYFamily::new(FamilyKind::Hyperbolic, 0.0, q, r0, theta0, sign)
}

/// One integrated soliton trajectory: states and phase at the sample points,
/// plus the worst first-integral drift for Calabi-Yau runs.
#[derive(Debug, Clone)]
pub struct SolitonTrajectory {
    pub rs: Vec<f64>,
    pub states: Vec<SolitonState>,
    pub thetas: Vec<f64>,
    pub r2_drift: Option<f64>,
}

impl SolitonTrajectory {
    pub fn last(&self) -> (&f64, &SolitonState) {
        (
            self.rs.last().expect("non-empty"),
            self.states.last().expect("non-empty"),
        )
    }
}

/// Integrate a soliton system from initial conditions at `r_span.0` to
/// `r_span.1`, with the phase carried along via `theta' = alpha`.
///
/// `lambda = 0` selects the Calabi-Yau system (requires `beta = 0` and
/// reports the first-integral drift); otherwise the `k = 2` nearly-Kahler
/// system is integrated and the trajectory must stay off the `l = 0` locus.
pub fn solve_soliton_bvp(
    ics: &SolitonState,
    p: &SolitonParams,
    lambda: f64,
    r_span: (f64, f64),
    theta0: f64,
    ctl: &StepControl,
) -> Result<SolitonTrajectory, SolitonError> {
    if lambda == 0.0 {
        if ics.beta != 0.0 {
            return Err(SolitonError::DomainError(
                "Calabi-Yau mode requires beta = 0",
            ));
        }
        let c = p.c;
        let y0 = [ics.alpha, ics.l, theta0];
        let sol = integrate_ode(
            |_, y, dy| {
                let s = SolitonState::cy(y[0], y[1]);
                let (ap, lp) = cy_soliton_rhs(&s, c);
                dy[0] = ap;
                dy[1] = lp;
                dy[2] = y[0];
            },
            &y0,
            r_span.0,
            r_span.1,
            ctl,
        )?;
        let r2_ref = first_integral_r2(ics, c);
        let mut drift = 0.0_f64;
        let mut states = Vec::with_capacity(sol.len());
        let mut thetas = Vec::with_capacity(sol.len());
        for y in &sol.states {
            let s = SolitonState::cy(y[0], y[1]);
            drift = drift.max((first_integral_r2(&s, c) - r2_ref).abs());
            states.push(s);
            thetas.push(y[2]);
        }
        Ok(SolitonTrajectory {
            rs: sol.times,
            states,
            thetas,
            r2_drift: Some(drift),
        })
    } else {
        if p.k != 2.0 {
            return Err(SolitonError::DomainError(
                "nearly-Kahler integration is specialized to k = 2",
            ));
        }
        // reject initial data on the singular loci up front
        soliton_rhs_nk(ics, p)?;
        let params = *p;
        let l_floor = 1e-10 * ics.l.abs().max(1.0);
        let y0 = [ics.alpha, ics.beta, ics.l, theta0];
        let outcome = integrate_ode(
            |_, y, dy| {
                let s = SolitonState {
                    alpha: y[0],
                    beta: y[1],
                    l: y[2],
                };
                match soliton_rhs_nk(&s, &params) {
                    Ok((ap, bp, lp)) => {
                        dy[0] = ap;
                        dy[1] = bp;
                        dy[2] = lp;
                        dy[3] = y[0];
                    }
                    Err(_) => dy.fill(f64::NAN),
                }
            },
            &y0,
            r_span.0,
            r_span.1,
            ctl,
        );
        let sol = match outcome {
            Ok(sol) => sol,
            Err(OdeError::StepSizeUnderflow { partial, .. }) => {
                // approaching l = 0 collapses the step size
                let l_last = partial.last_state()[2];
                if l_last.abs() < 0.05 * ics.l.abs().max(1.0) {
                    return Err(SolitonError::SingularAtLZero {
                        l_abs: l_last.abs(),
                    });
                }
                return Err(SolitonError::Ode(OdeError::StepSizeUnderflow {
                    t_last: partial.last_time(),
                    partial,
                }));
            }
            Err(e) => return Err(SolitonError::Ode(e)),
        };
        let sign0 = ics.l.signum();
        let mut states = Vec::with_capacity(sol.len());
        let mut thetas = Vec::with_capacity(sol.len());
        for y in &sol.states {
            if y[2].signum() != sign0 || y[2].abs() < l_floor {
                return Err(SolitonError::SingularAtLZero { l_abs: y[2].abs() });
            }
            states.push(SolitonState {
                alpha: y[0],
                beta: y[1],
                l: y[2],
            });
            thetas.push(y[3]);
        }
        Ok(SolitonTrajectory {
            rs: sol.times,
            states,
            thetas,
            r2_drift: None,
        })
    }
}
