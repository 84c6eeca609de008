use thiserror::Error;

/// Tolerances and step bounds for [`integrate_ode`].
#[derive(Debug, Clone, Copy)]
pub struct StepControl {
    pub rtol: f64,
    pub atol: f64,
    pub dt_init: f64,
    pub dt_min: f64,
    pub max_steps: usize,
}

impl Default for StepControl {
    fn default() -> Self {
        StepControl {
            rtol: 1e-9,
            atol: 1e-12,
            dt_init: 1e-3,
            dt_min: 1e-12,
            max_steps: 10_000_000,
        }
    }
}

impl StepControl {
    pub fn validate(&self) {
        assert!(
            self.rtol > 0.0 && self.atol > 0.0,
            "tolerances must be positive"
        );
        assert!(
            self.dt_init > 0.0 && self.dt_min > 0.0,
            "step sizes must be positive"
        );
        assert!(self.dt_min < self.dt_init, "dt_min must be below dt_init");
        assert!(self.max_steps > 0);
    }
}

#[derive(Debug, Error)]
pub enum OdeError {
    /// The controller pushed the step below `dt_min`; usually stiffness or a
    /// finite-time blow-up. Carries the accepted trajectory up to that point.
    #[error("step size underflow at t = {t_last}")]
    StepSizeUnderflow { t_last: f64, partial: OdeSolution },
    #[error("exceeded {max_steps} steps at t = {t_last}")]
    MaxStepsExceeded {
        t_last: f64,
        max_steps: usize,
        partial: OdeSolution,
    },
    #[error("initial state contains non-finite entries")]
    NonFiniteInitial,
}

impl OdeError {
    pub fn partial(&self) -> Option<&OdeSolution> {
        match self {
            OdeError::StepSizeUnderflow { partial, .. } => Some(partial),
            OdeError::MaxStepsExceeded { partial, .. } => Some(partial),
            OdeError::NonFiniteInitial => None,
        }
    }

    pub fn into_partial(self) -> Option<(f64, OdeSolution)> {
        match self {
            OdeError::StepSizeUnderflow { t_last, partial } => Some((t_last, partial)),
            OdeError::MaxStepsExceeded {
                t_last, partial, ..
            } => Some((t_last, partial)),
            OdeError::NonFiniteInitial => None,
        }
    }
}

/// Accepted steps of an integration, with the derivative stored per step so
/// intermediate times can be sampled by cubic Hermite interpolation
/// (4th-order accurate within a step).
#[derive(Debug, Clone, Default)]
pub struct OdeSolution {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    derivs: Vec<Vec<f64>>,
}

impl OdeSolution {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last_time(&self) -> f64 {
        *self.times.last().expect("empty solution")
    }

    pub fn last_state(&self) -> &[f64] {
        self.states.last().expect("empty solution")
    }

    /// Dense output at time `t` within the covered span.
    ///
    /// # Panics
    /// Panics if `t` lies outside the integrated span.
    pub fn sample(&self, t: f64) -> Vec<f64> {
        assert!(!self.is_empty(), "cannot sample an empty solution");
        let t0 = self.times[0];
        let t1 = self.last_time();
        let fwd = t1 >= t0;
        let inside = if fwd {
            t >= t0 && t <= t1
        } else {
            t <= t0 && t >= t1
        };
        assert!(
            inside,
            "sample time {t} outside integrated span [{t0}, {t1}]"
        );

        // locate the bracketing accepted step
        let k = match self.times.binary_search_by(|probe| {
            if fwd {
                probe.partial_cmp(&t).unwrap()
            } else {
                t.partial_cmp(probe).unwrap()
            }
        }) {
            Ok(exact) => return self.states[exact].clone(),
            Err(pos) => pos.clamp(1, self.len() - 1),
        };
        let (ta, tb) = (self.times[k - 1], self.times[k]);
        let h = tb - ta;
        let s = (t - ta) / h;
        let (ya, yb) = (&self.states[k - 1], &self.states[k]);
        let (fa, fb) = (&self.derivs[k - 1], &self.derivs[k]);

        // cubic Hermite basis
        let h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
        let h10 = s * (1.0 - s) * (1.0 - s);
        let h01 = s * s * (3.0 - 2.0 * s);
        let h11 = s * s * (s - 1.0);
        (0..ya.len())
            .map(|i| h00 * ya[i] + h10 * h * fa[i] + h01 * yb[i] + h11 * h * fb[i])
            .collect()
    }

    pub fn sample_at(&self, ts: &[f64]) -> Vec<Vec<f64>> {
        ts.iter().map(|&t| self.sample(t)).collect()
    }
}

// Dormand-Prince 5(4) tableau.
const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const C: [f64; 6] = [1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
// order-5 weights minus order-4 weights, applied to k1..k7
const E: [f64; 7] = [
    35.0 / 384.0 - 5179.0 / 57600.0,
    0.0,
    500.0 / 1113.0 - 7571.0 / 16695.0,
    125.0 / 192.0 - 393.0 / 640.0,
    -2187.0 / 6784.0 + 92097.0 / 339200.0,
    11.0 / 84.0 - 187.0 / 2100.0,
    -1.0 / 40.0,
];

/// Adaptive embedded Runge-Kutta 5(4) integration of `dy/dt = rhs(t, y)`
/// from `t0` to `t1` (either direction).
///
/// Every accepted step satisfies the elementwise local error bound
/// `atol + rtol * |y|`. Non-finite right-hand sides reject the step, so a
/// finite-time blow-up surfaces as [`OdeError::StepSizeUnderflow`] with the
/// trajectory so far attached.
pub fn integrate_ode(
    mut rhs: impl FnMut(f64, &[f64], &mut [f64]),
    y0: &[f64],
    t0: f64,
    t1: f64,
    ctl: &StepControl,
) -> Result<OdeSolution, OdeError> {
    ctl.validate();
    if !y0.iter().all(|v| v.is_finite()) {
        return Err(OdeError::NonFiniteInitial);
    }
    let dim = y0.len();
    let dir = if t1 >= t0 { 1.0 } else { -1.0 };
    let span = (t1 - t0).abs();

    let mut sol = OdeSolution::default();
    let mut t = t0;
    let mut y = y0.to_vec();
    let mut f = vec![0.0; dim];
    rhs(t, &y, &mut f);
    sol.times.push(t);
    sol.states.push(y.clone());
    sol.derivs.push(f.clone());
    if span == 0.0 {
        return Ok(sol);
    }

    let mut dt = ctl.dt_init.min(span);
    let mut k = vec![vec![0.0; dim]; 7];
    let mut y_stage = vec![0.0; dim];
    let mut y_new = vec![0.0; dim];
    let mut steps = 0usize;

    loop {
        if steps >= ctl.max_steps {
            return Err(OdeError::MaxStepsExceeded {
                t_last: t,
                max_steps: ctl.max_steps,
                partial: sol,
            });
        }
        steps += 1;

        let remaining = (t1 - t) * dir;
        let h = dir * dt.min(remaining);

        k[0].copy_from_slice(&f);
        for stage in 0..6 {
            for i in 0..dim {
                let mut acc = 0.0;
                for (j, kj) in k.iter().enumerate().take(stage + 1) {
                    acc += A[stage][j] * kj[i];
                }
                y_stage[i] = y[i] + h * acc;
            }
            let (head, tail) = k.split_at_mut(stage + 1);
            let _ = head;
            rhs(t + C[stage] * h, &y_stage, &mut tail[0]);
        }
        // stage 7 state equals the 5th-order solution (FSAL)
        y_new.copy_from_slice(&y_stage);

        let mut err_norm = 0.0_f64;
        for i in 0..dim {
            let mut e = 0.0;
            for (j, kj) in k.iter().enumerate() {
                e += E[j] * kj[i];
            }
            e *= h;
            let scale = ctl.atol + ctl.rtol * y[i].abs().max(y_new[i].abs());
            err_norm += (e / scale) * (e / scale);
        }
        err_norm = (err_norm / dim as f64).sqrt();

        let finite = y_new.iter().all(|v| v.is_finite()) && err_norm.is_finite();
        if finite && err_norm <= 1.0 {
            t += h;
            y.copy_from_slice(&y_new);
            f.copy_from_slice(&k[6]);
            sol.times.push(t);
            sol.states.push(y.clone());
            sol.derivs.push(f.clone());
            if (t1 - t) * dir <= 0.0 || (t1 - t).abs() < 1e-14 * span.max(1.0) {
                return Ok(sol);
            }
            let grow = if err_norm == 0.0 {
                5.0
            } else {
                (0.9 * err_norm.powf(-0.2)).clamp(0.2, 5.0)
            };
            dt = (dt * grow).max(ctl.dt_min);
        } else {
            let shrink = if finite {
                (0.9 * err_norm.powf(-0.2)).clamp(0.1, 0.9)
            } else {
                0.5
            };
            dt *= shrink;
            if dt < ctl.dt_min {
                return Err(OdeError::StepSizeUnderflow {
                    t_last: t,
                    partial: sol,
                });
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_solution_for_zero_rhs() {
        let sol = integrate_ode(
            |_, _, dy| dy.fill(0.0),
            &[1.0, 2.0],
            0.0,
            1.0,
            &StepControl::default(),
        )
        .unwrap();
        assert_eq!(sol.last_state(), &[1.0, 2.0]);
    }

    #[test]
    fn exponential_growth_matches_e() {
        let ctl = StepControl::default();
        let sol = integrate_ode(|_, y, dy| dy[0] = y[0], &[1.0], 0.0, 1.0, &ctl).unwrap();
        let err = (sol.last_state()[0] - std::f64::consts::E).abs();
        assert!(err < ctl.rtol * 10.0, "err = {err}");
    }

    #[test]
    fn quadratic_blow_up_underflows_after_one() {
        let err = integrate_ode(
            |_, y, dy| dy[0] = y[0] * y[0],
            &[1.0],
            0.0,
            2.0,
            &StepControl::default(),
        )
        .unwrap_err();
        match err {
            OdeError::StepSizeUnderflow { t_last, .. } => {
                assert!(t_last < 1.0 && t_last > 0.99, "t_last = {t_last}");
            }
            other => panic!("expected underflow, got {other:?}"),
        }
    }

    #[test]
    fn linear_system_rotation() {
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
        .unwrap();
        let s = sol.last_state();
        assert!((s[0] - 1.0_f64.cos()).abs() < ctl.rtol * 10.0);
        assert!((s[1] - 1.0_f64.sin()).abs() < ctl.rtol * 10.0);
    }

    #[test]
    fn dense_output_tracks_exponential() {
        // cubic Hermite between accepted steps: error ~ h^4/384 * max|y''''|
        let sol = integrate_ode(
            |_, y, dy| dy[0] = y[0],
            &[1.0],
            0.0,
            1.0,
            &StepControl::default(),
        )
        .unwrap();
        for &t in &[0.1, 0.37, 0.62, 0.95] {
            let v = sol.sample(t)[0];
            assert!(
                (v - t.exp()).abs() < 1e-5,
                "t={t}, err={:.2e}",
                (v - t.exp()).abs()
            );
        }
    }

    #[test]
    fn backward_integration() {
        let sol = integrate_ode(
            |_, y, dy| dy[0] = y[0],
            &[1.0],
            0.0,
            -1.0,
            &StepControl::default(),
        )
        .unwrap();
        assert!((sol.last_state()[0] - (-1.0_f64).exp()).abs() < 1e-8);
    }

    #[test]
    fn rejects_non_finite_initial_state() {
        let err = integrate_ode(
            |_, _, dy| dy.fill(0.0),
            &[f64::NAN],
            0.0,
            1.0,
            &StepControl::default(),
        );
        assert!(matches!(err, Err(OdeError::NonFiniteInitial)));
    }
}
