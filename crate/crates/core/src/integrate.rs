//! Adaptive Dormand–Prince 5(4) integration of matrix ODEs.
//!
//! The state is a [`SymMatrix`], advanced through its packed coordinates
//! so symmetry is exact at every stage. Error control is per entry with
//! mixed absolute/relative tolerance and the classic `0.9·err^(−1/5)`
//! step factor clamped to `[0.2, 5]`. The pair is FSAL: seven stages,
//! six right-hand-side evaluations per accepted step.
//!
//! Monitors follow the trajectory on a coarse sample grid: the relative
//! spectrum drift `d_ev`, the relative off-diagonal mass `d_off`, and the
//! objective `f = ½‖X−D‖²`. Samples are taken at the first accepted step
//! past each grid point; there is no dense-output interpolation.

use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::flows::FieldEval;
use crate::symspace::SymMatrix;

/// Butcher tableau of the Dormand–Prince 5(4) pair.
///
/// `A` are the stage coefficients, `B` the fifth-order weights, `C` the
/// nodes, and `E = B − B̂` the difference against the embedded
/// fourth-order weights used for the error estimate.
const DP_A: [[f64; 6]; 6] = [
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
const DP_E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Step-size and sampling configuration.
#[derive(Debug, Clone)]
pub struct IntegratorConfig {
    pub abstol: f64,
    pub reltol: f64,
    pub t_final: f64,
    pub max_steps: u64,
    /// `None` selects `min(1e-3, t_final/100)`.
    pub initial_step: Option<f64>,
    /// Monitor output spacing; `None` selects `t_final/400`.
    pub sample_interval: Option<f64>,
    /// Keep a state snapshot per sample.
    pub store_snapshots: bool,
}

impl IntegratorConfig {
    pub fn new(t_final: f64) -> Self {
        IntegratorConfig {
            abstol: 1e-13,
            reltol: 1e-13,
            t_final,
            max_steps: 10_000_000,
            initial_step: None,
            sample_interval: None,
            store_snapshots: false,
        }
    }

    pub fn tolerances(mut self, abstol: f64, reltol: f64) -> Self {
        self.abstol = abstol;
        self.reltol = reltol;
        self
    }

    pub fn initial_step(mut self, h0: f64) -> Self {
        self.initial_step = Some(h0);
        self
    }

    pub fn sample_interval(mut self, dt: f64) -> Self {
        self.sample_interval = Some(dt);
        self
    }

    pub fn store_snapshots(mut self, on: bool) -> Self {
        self.store_snapshots = on;
        self
    }

    fn validate(&self) -> Result<()> {
        fn positive(v: f64) -> bool {
            v.is_finite() && v > 0.0
        }
        if !positive(self.abstol) || !positive(self.reltol) {
            return Err(Error::InvalidParameter("tolerances must be positive"));
        }
        if !positive(self.t_final) {
            return Err(Error::InvalidParameter("t_final must be positive"));
        }
        if let Some(dt) = self.sample_interval {
            if !positive(dt) {
                return Err(Error::InvalidParameter("sample_interval must be positive"));
            }
        }
        Ok(())
    }
}

/// Relative spectrum drift `‖ev(X₀) − ev(X)‖ / ‖ev(X₀)‖` with ascending
/// eigenvalue vectors and the Euclidean norm.
pub fn d_ev(x0: &SymMatrix, x: &SymMatrix) -> Result<f64> {
    let ev0 = x0.eigenvalues()?;
    let norm0 = ev0.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm0 == 0.0 {
        return Err(Error::ZeroDenominator("reference matrix has zero spectrum"));
    }
    let ev = x.eigenvalues()?;
    Ok(ev_distance(&ev0, &ev) / norm0)
}

fn ev_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Relative off-diagonal mass `‖X − diag X‖_F / ‖X₀ − diag X₀‖_F`.
pub fn d_off(x0: &SymMatrix, x: &SymMatrix) -> Result<f64> {
    let denom = x0.off_diag_norm();
    if denom == 0.0 {
        return Err(Error::ZeroDenominator("reference matrix is diagonal"));
    }
    Ok(x.off_diag_norm() / denom)
}

/// Precomputed monitor context for one trajectory.
#[derive(Debug, Clone)]
pub struct Monitors {
    ev0: Vec<f64>,
    ev0_norm: f64,
    off0: f64,
    target: SymMatrix,
}

impl Monitors {
    /// Fails when a denominator degenerates: `X₀` with zero spectrum (for
    /// `d_ev`) or diagonal `X₀` (for `d_off`).
    pub fn new(x0: &SymMatrix, target: &SymMatrix) -> Result<Self> {
        let ev0 = x0.eigenvalues()?;
        let ev0_norm = ev0.iter().map(|v| v * v).sum::<f64>().sqrt();
        if ev0_norm == 0.0 {
            return Err(Error::ZeroDenominator("reference matrix has zero spectrum"));
        }
        let off0 = x0.off_diag_norm();
        if off0 == 0.0 {
            return Err(Error::ZeroDenominator("reference matrix is diagonal"));
        }
        if x0.order() != target.order() {
            return Err(Error::DimensionMismatch {
                left: x0.order(),
                right: target.order(),
            });
        }
        Ok(Monitors {
            ev0,
            ev0_norm,
            off0,
            target: target.clone(),
        })
    }

    fn sample(&self, x: &SymMatrix) -> Result<(f64, f64, f64)> {
        let ev = x.eigenvalues()?;
        let dev = ev_distance(&self.ev0, &ev) / self.ev0_norm;
        let doff = x.off_diag_norm() / self.off0;
        let f = 0.5 * (x - &self.target).frob_norm_sq();
        Ok((dev, doff, f))
    }
}

/// Record of one integration.
#[derive(Debug, Clone)]
pub struct TrajectoryLog {
    /// Strictly increasing sample times starting at 0; the last entry is
    /// `t_final` unless the run was truncated by `max_steps`.
    pub times: Vec<f64>,
    pub d_ev: Vec<f64>,
    pub d_off: Vec<f64>,
    pub f: Vec<f64>,
    pub accepted_steps: u64,
    pub rejected_steps: u64,
    pub final_state: SymMatrix,
    /// Number of field evaluations that reported a singular operator.
    pub singular_flag_count: u64,
    /// True when `max_steps` was exhausted before reaching `t_final`.
    pub truncated: bool,
    /// State snapshots aligned with `times` when requested.
    pub snapshots: Option<Vec<SymMatrix>>,
}

impl TrajectoryLog {
    pub fn max_d_ev(&self) -> f64 {
        self.d_ev.iter().fold(0.0, |m, &v| m.max(v))
    }

    pub fn final_d_off(&self) -> Option<f64> {
        self.d_off.last().copied()
    }

    /// First sample time at which `d_off` drops to `threshold` or below.
    pub fn first_d_off_below(&self, threshold: f64) -> Option<f64> {
        self.d_off
            .iter()
            .position(|&v| v <= threshold)
            .map(|i| self.times[i])
    }
}

struct Sampler<'a> {
    monitors: Option<&'a Monitors>,
    interval: f64,
    next_at: f64,
    store_snapshots: bool,
    log: TrajectoryLog,
}

impl<'a> Sampler<'a> {
    fn record(&mut self, t: f64, x: &SymMatrix) -> Result<()> {
        if let Some(mon) = self.monitors {
            let (dev, doff, f) = mon.sample(x)?;
            self.log.d_ev.push(dev);
            self.log.d_off.push(doff);
            self.log.f.push(f);
        }
        self.log.times.push(t);
        if self.store_snapshots {
            self.log.snapshots.get_or_insert_with(Vec::new).push(x.clone());
        }
        while self.next_at <= t {
            self.next_at += self.interval;
        }
        Ok(())
    }
}

/// Integrates `X' = field(X)` from `X(0) = x0` to `cfg.t_final`.
///
/// Exhausting `max_steps` returns the partial log with the `truncated`
/// flag set; a step size collapsing below `1e-14·t_final` is reported as
/// stiffness failure. Identical inputs produce bit-identical logs: the
/// integrator holds no hidden state.
pub fn rk45_integrate<F>(
    mut field: F,
    x0: &SymMatrix,
    cfg: &IntegratorConfig,
    monitors: Option<&Monitors>,
) -> Result<TrajectoryLog>
where
    F: FnMut(&SymMatrix) -> Result<FieldEval>,
{
    cfg.validate()?;
    let tf = cfg.t_final;
    let interval = cfg.sample_interval.unwrap_or(tf / 400.0);

    let mut singular_flag_count = 0u64;
    let mut eval = |x: &SymMatrix, count: &mut u64| -> Result<SymMatrix> {
        let fe = field(x)?;
        if fe.singular {
            *count += 1;
        }
        Ok(fe.derivative)
    };

    let mut sampler = Sampler {
        monitors,
        interval,
        next_at: interval,
        store_snapshots: cfg.store_snapshots,
        log: TrajectoryLog {
            times: Vec::new(),
            d_ev: Vec::new(),
            d_off: Vec::new(),
            f: Vec::new(),
            accepted_steps: 0,
            rejected_steps: 0,
            final_state: x0.clone(),
            singular_flag_count: 0,
            truncated: false,
            snapshots: None,
        },
    };
    sampler.record(0.0, x0)?;

    let dim = x0.svec().len();
    let mut y = x0.clone();
    let mut t = 0.0_f64;
    let mut k: Vec<SymMatrix> = Vec::with_capacity(7);
    k.push(eval(&y, &mut singular_flag_count)?); // FSAL slot k1
    for _ in 1..7 {
        k.push(SymMatrix::zeros(y.order()));
    }
    let mut h = cfg
        .initial_step
        .unwrap_or_else(|| (1e-3_f64).min(tf / 100.0))
        .min(tf);

    let mut steps = 0u64;
    let mut truncated = false;
    while t < tf {
        if steps >= cfg.max_steps {
            truncated = true;
            break;
        }
        steps += 1;
        if h < 1e-14 * tf {
            return Err(Error::StepUnderflow { t });
        }
        h = h.min(tf - t);

        // stages 2..7
        for stage in 0..6 {
            let mut packed = y.packed().to_vec();
            for (j, kj) in k.iter().enumerate().take(stage + 1) {
                let a = DP_A[stage][j];
                if a == 0.0 {
                    continue;
                }
                for (p, kv) in packed.iter_mut().zip(kj.packed()) {
                    *p += h * a * kv;
                }
            }
            let y_stage = SymMatrix::from_packed(y.order(), packed);
            k[stage + 1] = eval(&y_stage, &mut singular_flag_count)?;
        }
        // stage 7 argument is the fifth-order solution itself
        let mut y_new = y.packed().to_vec();
        for (j, kj) in k.iter().enumerate().take(6) {
            let a = DP_A[5][j];
            if a == 0.0 {
                continue;
            }
            for (p, kv) in y_new.iter_mut().zip(kj.packed()) {
                *p += h * a * kv;
            }
        }
        let y_new = SymMatrix::from_packed(y.order(), y_new);

        // per-entry mixed error norm
        let mut err_norm = 0.0_f64;
        for idx in 0..dim {
            let mut err = 0.0;
            for (j, kj) in k.iter().enumerate() {
                err += DP_E[j] * kj.packed()[idx];
            }
            err *= h;
            let scale =
                cfg.abstol + cfg.reltol * y.packed()[idx].abs().max(y_new.packed()[idx].abs());
            err_norm = err_norm.max((err / scale).abs());
        }

        if err_norm.is_nan() {
            // treat a non-finite stage as a hard rejection
            sampler.log.rejected_steps += 1;
            h *= 0.2;
            continue;
        }

        if err_norm <= 1.0 {
            t += h;
            // k7 = f(t+h, y_new) is k1 of the next step
            k.swap(0, 6);
            y = y_new;
            sampler.log.accepted_steps += 1;
            if t >= sampler.next_at || t >= tf {
                sampler.record(t, &y)?;
            }
        } else {
            sampler.log.rejected_steps += 1;
        }

        let factor = if err_norm == 0.0 {
            5.0
        } else {
            (0.9 * err_norm.powf(-0.2)).clamp(0.2, 5.0)
        };
        h *= factor;
    }

    if sampler.log.times.last().copied() != Some(t) {
        sampler.record(t, &y)?;
    }
    sampler.log.truncated = truncated;
    sampler.log.final_state = y;
    sampler.log.singular_flag_count = singular_flag_count;
    Ok(sampler.log)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flows::FieldEval;

    #[test]
    fn linear_decay_matches_exponential() {
        let x0 = SymMatrix::identity(2);
        let cfg = IntegratorConfig::new(1.0);
        let log = rk45_integrate(
            |x: &SymMatrix| Ok(FieldEval::smooth(x.scaled(-1.0))),
            &x0,
            &cfg,
            None,
        )
        .unwrap();
        let expect = (-1.0_f64).exp();
        assert!((log.final_state.get(0, 0) - expect).abs() < 1e-10);
        assert!((log.final_state.get(1, 1) - expect).abs() < 1e-10);
        assert!(log.final_state.get(0, 1).abs() < 1e-14);
        assert_eq!(log.times.last().copied(), Some(1.0));
    }

    #[test]
    fn zero_field_is_exact() {
        let x0 = SymMatrix::from_rows_lower(2, &[1.0, 2.0, 2.0, 3.0]);
        let cfg = IntegratorConfig::new(2.0);
        let log = rk45_integrate(
            |x: &SymMatrix| Ok(FieldEval::smooth(SymMatrix::zeros(x.order()))),
            &x0,
            &cfg,
            None,
        )
        .unwrap();
        assert_eq!(log.final_state, x0);
        assert_eq!(log.rejected_steps, 0);
    }

    #[test]
    fn tolerance_ladder_reduces_error() {
        let x0 = SymMatrix::identity(2);
        let expect = (-1.0_f64).exp();
        let mut last = f64::INFINITY;
        for p in [8, 9, 10, 11, 12, 13] {
            let tol = 10.0_f64.powi(-p);
            let cfg = IntegratorConfig::new(1.0).tolerances(tol, tol);
            let log = rk45_integrate(
                |x: &SymMatrix| Ok(FieldEval::smooth(x.scaled(-1.0))),
                &x0,
                &cfg,
                None,
            )
            .unwrap();
            let err = (log.final_state.get(0, 0) - expect).abs();
            assert!(err <= 100.0 * tol, "err {err:e} at tol {tol:e}");
            assert!(err <= last + 1e-15, "error must not grow: {err:e} vs {last:e}");
            last = err;
        }
    }

    #[test]
    fn max_steps_truncates_with_flag() {
        let x0 = SymMatrix::identity(2);
        let mut cfg = IntegratorConfig::new(1.0);
        cfg.max_steps = 3;
        let log = rk45_integrate(
            |x: &SymMatrix| Ok(FieldEval::smooth(x.scaled(-1.0))),
            &x0,
            &cfg,
            None,
        )
        .unwrap();
        assert!(log.truncated);
        assert!(log.times.last().copied().unwrap() < 1.0);
    }

    #[test]
    fn finite_time_blowup_reports_stiffness() {
        // scalar X' = X², X(0) = 1 blows up at t = 1
        let x0 = SymMatrix::from_diag(&[1.0]);
        let cfg = IntegratorConfig::new(2.0);
        let err = rk45_integrate(
            |x: &SymMatrix| {
                let v = x.get(0, 0);
                Ok(FieldEval::smooth(SymMatrix::from_diag(&[v * v])))
            },
            &x0,
            &cfg,
            None,
        )
        .unwrap_err();
        assert!(matches!(err, Error::StepUnderflow { .. }));
    }

    #[test]
    fn config_is_validated() {
        let x0 = SymMatrix::identity(2);
        let field = |x: &SymMatrix| Ok(FieldEval::smooth(x.scaled(-1.0)));
        let bad_tol = IntegratorConfig::new(1.0).tolerances(0.0, 1e-13);
        assert!(matches!(
            rk45_integrate(field, &x0, &bad_tol, None),
            Err(Error::InvalidParameter(_))
        ));
        let bad_t = IntegratorConfig::new(-1.0);
        assert!(matches!(
            rk45_integrate(field, &x0, &bad_t, None),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn monitor_examples() {
        let x0 = SymMatrix::from_diag(&[1.0, 2.0]);
        assert_eq!(d_ev(&x0, &x0).unwrap(), 0.0);
        let x = SymMatrix::from_diag(&[1.0, 3.0]);
        let expect = 1.0 / 5.0_f64.sqrt();
        assert!((d_ev(&x0, &x).unwrap() - expect).abs() < 1e-14);

        let y0 = SymMatrix::from_rows_lower(2, &[0.0, 2.0, 2.0, 0.0]);
        let y = SymMatrix::from_rows_lower(2, &[0.0, 1.0, 1.0, 0.0]);
        assert!((d_off(&y0, &y).unwrap() - 0.5).abs() < 1e-14);
        assert_eq!(d_off(&y0, &x0).unwrap(), 0.0);
        assert_eq!(d_off(&y0, &y0).unwrap(), 1.0);

        assert!(matches!(
            d_ev(&SymMatrix::zeros(2), &x0),
            Err(Error::ZeroDenominator(_))
        ));
        assert!(matches!(
            d_off(&x0, &y0),
            Err(Error::ZeroDenominator(_))
        ));
    }

    #[test]
    fn spectrum_invariant_under_orthogonal_similarity() {
        // d_ev(X0, QX0Qᵀ) ≈ 0 for a rotation Q
        let x0 = SymMatrix::from_rows_lower(2, &[1.0, 0.7, 0.7, -2.0]);
        let (c, s) = (0.6, 0.8);
        let q = crate::matrix::Matrix::from_rows(2, 2, &[c, -s, s, c]);
        let rotated = SymMatrix::symmetrize(&q.mul(&x0.to_full()).mul(&q.transpose()));
        assert!(d_ev(&x0, &rotated).unwrap() <= 1e-12);
    }

    #[test]
    fn deterministic_logs_are_bit_identical() {
        let x0 = SymMatrix::from_rows_lower(2, &[1.0, 0.3, 0.3, 2.0]);
        let d = SymMatrix::from_diag(&[1.0, 2.0]);
        let cfg = IntegratorConfig::new(3.0).tolerances(1e-12, 1e-12);
        let mon = Monitors::new(&x0, &d).unwrap();
        let run = || {
            rk45_integrate(
                |x: &SymMatrix| crate::flows::double_bracket_field(x, &d).map(FieldEval::smooth),
                &x0,
                &cfg,
                Some(&mon),
            )
            .unwrap()
        };
        let (a, b) = (run(), run());
        assert_eq!(a.times.len(), b.times.len());
        for (x, y) in a.times.iter().zip(&b.times) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
        for (x, y) in a.d_off.iter().zip(&b.d_off) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
        assert_eq!(a.final_state, b.final_state);
        assert_eq!(a.accepted_steps, b.accepted_steps);
        assert_eq!(a.rejected_steps, b.rejected_steps);
    }

    #[test]
    fn monitor_arrays_align_with_times() {
        let x0 = SymMatrix::from_rows_lower(2, &[1.0, 0.3, 0.3, 2.0]);
        let d = SymMatrix::from_diag(&[1.0, 2.0]);
        let cfg = IntegratorConfig::new(1.0).store_snapshots(true);
        let mon = Monitors::new(&x0, &d).unwrap();
        let log = rk45_integrate(
            |x: &SymMatrix| crate::flows::double_bracket_field(x, &d).map(FieldEval::smooth),
            &x0,
            &cfg,
            Some(&mon),
        )
        .unwrap();
        assert_eq!(log.times.len(), log.d_ev.len());
        assert_eq!(log.times.len(), log.d_off.len());
        assert_eq!(log.times.len(), log.f.len());
        assert_eq!(log.times.len(), log.snapshots.as_ref().unwrap().len());
        assert!(log.times.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(log.times.last().copied(), Some(1.0));
    }
}
