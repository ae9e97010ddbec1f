//! Numerical integration of the CKR planar system and of the auxiliary
//! linear non-autonomous systems, plus cumulative quadrature.
//!
//! Two methods are provided: fixed-step classical RK4 and the adaptive
//! Dormand-Prince 5(4) embedded pair. Blow-up is a first-class termination
//! status rather than an error: CKR flows genuinely reach poles (the moving
//! poles of the quantum momentum function), and those poles carry meaning.

use thiserror::Error;

use crate::expr::{EvalError, Expr};
use crate::geometry::PhasePoint;
use crate::grid::Grid;
use crate::model::CkrCoefficients;

/// Step-control strategy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Method {
    /// Classical fixed-step RK4. The step is rounded so the range divides
    /// into a whole number of steps.
    Rk4 { h: f64 },
    /// Dormand-Prince 5(4) with standard PI-free step-size control.
    Rk45 { abs_tol: f64, rel_tol: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    pub method: Method,
    /// Any state component exceeding this magnitude terminates the run with
    /// [`Termination::BlowUp`].
    pub blow_up: f64,
    pub max_steps: usize,
}

impl IntegratorConfig {
    pub fn rk4(h: f64) -> IntegratorConfig {
        IntegratorConfig { method: Method::Rk4 { h }, ..IntegratorConfig::default() }
    }

    pub fn rk45(abs_tol: f64, rel_tol: f64) -> IntegratorConfig {
        IntegratorConfig { method: Method::Rk45 { abs_tol, rel_tol }, ..IntegratorConfig::default() }
    }

    fn validate(&self) -> Result<(), OdeError> {
        let ok = match self.method {
            Method::Rk4 { h } => h > 0.0 && h.is_finite(),
            Method::Rk45 { abs_tol, rel_tol } => {
                abs_tol > 0.0 && rel_tol > 0.0 && abs_tol.is_finite() && rel_tol.is_finite()
            }
        };
        if !ok {
            return Err(OdeError::InvalidConfig("step size and tolerances must be positive".into()));
        }
        if !(self.blow_up > 0.0) {
            return Err(OdeError::InvalidConfig("blow-up threshold must be positive".into()));
        }
        if self.max_steps == 0 {
            return Err(OdeError::InvalidConfig("max_steps must be nonzero".into()));
        }
        Ok(())
    }
}

impl Default for IntegratorConfig {
    fn default() -> IntegratorConfig {
        IntegratorConfig {
            method: Method::Rk45 { abs_tol: 1e-9, rel_tol: 1e-9 },
            blow_up: 1e8,
            max_steps: 1_000_000,
        }
    }
}

/// How a run ended.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Termination {
    Completed,
    BlowUp { x: f64 },
    StepLimit { x: f64 },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OdeError {
    #[error(transparent)]
    Coefficient(#[from] EvalError),
    #[error("invalid integrator configuration: {0}")]
    InvalidConfig(String),
    #[error("initial state is not finite")]
    BadInitialState,
    #[error("solution of a linear system exceeded the blow-up threshold at x = {x}")]
    Unbounded { x: f64 },
    #[error("step limit reached at x = {x} before the end of the range")]
    StepLimit { x: f64 },
    #[error("query at x = {x} outside the sampled range [{lo}, {hi}]")]
    OutOfRange { x: f64, lo: f64, hi: f64 },
}

// ---------------------------------------------------------------------------
// Sampled paths
// ---------------------------------------------------------------------------

/// Samples of a vector-valued function of `x`, queried by linear
/// interpolation between nodes. Callers needing more accuracy between nodes
/// densify the grid; the interpolation contract is part of the API.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledPath {
    xs: Vec<f64>,
    rows: Vec<Vec<f64>>,
    dim: usize,
}

impl SampledPath {
    pub fn new(xs: Vec<f64>, rows: Vec<Vec<f64>>, dim: usize) -> SampledPath {
        assert_eq!(xs.len(), rows.len());
        assert!(rows.iter().all(|r| r.len() == dim));
        assert!(xs.windows(2).all(|w| w[0] < w[1]), "nodes must be strictly increasing");
        SampledPath { xs, rows, dim }
    }

    /// Sample a function on a grid.
    pub fn sample<F>(grid: &Grid, dim: usize, mut f: F) -> Result<SampledPath, OdeError>
    where
        F: FnMut(f64) -> Result<Vec<f64>, OdeError>,
    {
        let mut xs = Vec::with_capacity(grid.points());
        let mut rows = Vec::with_capacity(grid.points());
        for x in grid.iter() {
            let row = f(x)?;
            assert_eq!(row.len(), dim);
            xs.push(x);
            rows.push(row);
        }
        Ok(SampledPath { xs, rows, dim })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn row(&self, k: usize) -> &[f64] {
        &self.rows[k]
    }

    pub fn first_x(&self) -> f64 {
        self.xs[0]
    }

    pub fn last_x(&self) -> f64 {
        *self.xs.last().unwrap()
    }

    /// Linearly interpolated values at `x`. Queries slightly outside the
    /// range (within 1e-9 of the span) clamp to the nearest endpoint.
    pub fn value_at(&self, x: f64) -> Result<Vec<f64>, OdeError> {
        let mut out = vec![0.0; self.dim];
        self.value_into(x, &mut out)?;
        Ok(out)
    }

    pub fn component_at(&self, i: usize, x: f64) -> Result<f64, OdeError> {
        assert!(i < self.dim);
        let (k, t) = self.locate(x)?;
        Ok(self.rows[k][i] * (1.0 - t) + self.rows[k + 1][i] * t)
    }

    pub fn value_into(&self, x: f64, out: &mut [f64]) -> Result<(), OdeError> {
        let (k, t) = self.locate(x)?;
        for i in 0..self.dim {
            out[i] = self.rows[k][i] * (1.0 - t) + self.rows[k + 1][i] * t;
        }
        Ok(())
    }

    fn locate(&self, x: f64) -> Result<(usize, f64), OdeError> {
        let lo = self.first_x();
        let hi = self.last_x();
        let slack = 1e-9 * (hi - lo).max(1.0);
        if x < lo - slack || x > hi + slack || !x.is_finite() {
            return Err(OdeError::OutOfRange { x, lo, hi });
        }
        let x = x.clamp(lo, hi);
        // Index of the last node <= x, capped so k+1 is valid.
        let k = match self.xs.binary_search_by(|v| v.partial_cmp(&x).unwrap()) {
            Ok(k) => k.min(self.xs.len() - 2),
            Err(ins) => ins.saturating_sub(1).min(self.xs.len() - 2),
        };
        let span = self.xs[k + 1] - self.xs[k];
        Ok((k, (x - self.xs[k]) / span))
    }
}

/// A sampled CKR solution together with how the run ended.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub path: SampledPath,
    pub status: Termination,
}

impl Trajectory {
    pub fn samples(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.path
            .xs()
            .iter()
            .enumerate()
            .map(|(k, &x)| (x, self.path.row(k)[0], self.path.row(k)[1]))
    }

    pub fn point_at(&self, x: f64) -> Result<PhasePoint, OdeError> {
        let v = self.path.value_at(x)?;
        Ok(PhasePoint::new(v[0], v[1]))
    }

    pub fn last(&self) -> (f64, PhasePoint) {
        let k = self.path.len() - 1;
        let row = self.path.row(k);
        (self.path.xs()[k], PhasePoint::new(row[0], row[1]))
    }
}

// ---------------------------------------------------------------------------
// Core stepper
// ---------------------------------------------------------------------------

enum StepOutcome {
    Done,
    BlowUp,
}

/// Integrate `dy/dx = rhs(x, y)` from `x0` to `x1 > x0`, recording every
/// accepted node.
pub fn integrate<F>(
    mut rhs: F,
    x0: f64,
    y0: &[f64],
    x1: f64,
    cfg: &IntegratorConfig,
) -> Result<(SampledPath, Termination), OdeError>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<(), OdeError>,
{
    cfg.validate()?;
    if !(x1 > x0) || !x0.is_finite() || !x1.is_finite() {
        return Err(OdeError::InvalidConfig(format!(
            "integration range must satisfy x0 < x1, got [{x0}, {x1}]"
        )));
    }
    if y0.iter().any(|v| !v.is_finite()) {
        return Err(OdeError::BadInitialState);
    }

    let dim = y0.len();
    let mut xs = vec![x0];
    let mut rows = vec![y0.to_vec()];
    let mut x = x0;
    let mut y = y0.to_vec();

    let status = match cfg.method {
        Method::Rk4 { h } => {
            let n = (((x1 - x0) / h).round() as usize).max(1);
            let h = (x1 - x0) / n as f64;
            let mut status = Termination::Completed;
            if n > cfg.max_steps {
                return Err(OdeError::InvalidConfig(format!(
                    "fixed-step run needs {n} steps but max_steps is {}",
                    cfg.max_steps
                )));
            }
            let mut work = Rk4Work::new(dim);
            for k in 0..n {
                let x_next = if k + 1 == n { x1 } else { x0 + h * (k + 1) as f64 };
                match work.step(&mut rhs, x, &mut y, x_next - x)? {
                    StepOutcome::BlowUp => {
                        status = Termination::BlowUp { x };
                        break;
                    }
                    StepOutcome::Done => {}
                }
                x = x_next;
                if y.iter().all(|v| v.is_finite()) {
                    xs.push(x);
                    rows.push(y.clone());
                }
                if y.iter().any(|v| !v.is_finite() || v.abs() > cfg.blow_up) {
                    status = Termination::BlowUp { x };
                    break;
                }
            }
            status
        }
        Method::Rk45 { abs_tol, rel_tol } => {
            let mut h = ((x1 - x0) / 100.0).min(0.1);
            let mut status = Termination::StepLimit { x };
            let mut work = DopriWork::new(dim);
            let mut steps = 0usize;
            'outer: while steps < cfg.max_steps {
                steps += 1;
                if x + h >= x1 {
                    h = x1 - x;
                }
                let attempt = work.step(&mut rhs, x, &y, h, abs_tol, rel_tol)?;
                match attempt {
                    DopriStep::Reject { h_new } => {
                        // A step that cannot shrink further means the solution
                        // is leaving the representable range (a pole).
                        if h_new < f64::EPSILON * (x.abs() + 1.0) * 16.0 {
                            status = Termination::BlowUp { x };
                            break 'outer;
                        }
                        h = h_new;
                    }
                    DopriStep::Accept { h_new } => {
                        x += h;
                        y.copy_from_slice(&work.y_next);
                        if y.iter().all(|v| v.is_finite()) {
                            xs.push(x);
                            rows.push(y.clone());
                        }
                        if y.iter().any(|v| !v.is_finite() || v.abs() > cfg.blow_up) {
                            status = Termination::BlowUp { x };
                            break 'outer;
                        }
                        if x >= x1 {
                            status = Termination::Completed;
                            break 'outer;
                        }
                        h = h_new;
                    }
                }
            }
            if let Termination::StepLimit { .. } = status {
                status = Termination::StepLimit { x };
            }
            status
        }
    };

    Ok((SampledPath::new(xs, rows, dim), status))
}

struct Rk4Work {
    k1: Vec<f64>,
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
    tmp: Vec<f64>,
}

impl Rk4Work {
    fn new(dim: usize) -> Rk4Work {
        Rk4Work {
            k1: vec![0.0; dim],
            k2: vec![0.0; dim],
            k3: vec![0.0; dim],
            k4: vec![0.0; dim],
            tmp: vec![0.0; dim],
        }
    }

    fn step<F>(&mut self, rhs: &mut F, x: f64, y: &mut [f64], h: f64) -> Result<StepOutcome, OdeError>
    where
        F: FnMut(f64, &[f64], &mut [f64]) -> Result<(), OdeError>,
    {
        let dim = y.len();
        rhs(x, y, &mut self.k1)?;
        for i in 0..dim {
            self.tmp[i] = y[i] + 0.5 * h * self.k1[i];
        }
        if self.tmp.iter().any(|v| !v.is_finite()) {
            return Ok(StepOutcome::BlowUp);
        }
        rhs(x + 0.5 * h, &self.tmp, &mut self.k2)?;
        for i in 0..dim {
            self.tmp[i] = y[i] + 0.5 * h * self.k2[i];
        }
        if self.tmp.iter().any(|v| !v.is_finite()) {
            return Ok(StepOutcome::BlowUp);
        }
        rhs(x + 0.5 * h, &self.tmp, &mut self.k3)?;
        for i in 0..dim {
            self.tmp[i] = y[i] + h * self.k3[i];
        }
        if self.tmp.iter().any(|v| !v.is_finite()) {
            return Ok(StepOutcome::BlowUp);
        }
        rhs(x + h, &self.tmp, &mut self.k4)?;
        for i in 0..dim {
            y[i] += h / 6.0 * (self.k1[i] + 2.0 * self.k2[i] + 2.0 * self.k3[i] + self.k4[i]);
        }
        Ok(StepOutcome::Done)
    }
}

// Dormand-Prince 5(4) tableau.
const DP_C: [f64; 6] = [1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const DP_A: [&[f64]; 6] = [
    &[1.0 / 5.0],
    &[3.0 / 40.0, 9.0 / 40.0],
    &[44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0],
    &[19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0],
    &[9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0],
    &[35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
// Difference between the 5th- and 4th-order weights.
const DP_E: [f64; 7] = [
    35.0 / 384.0 - 5179.0 / 57600.0,
    0.0,
    500.0 / 1113.0 - 7571.0 / 16695.0,
    125.0 / 192.0 - 393.0 / 640.0,
    -2187.0 / 6784.0 + 92097.0 / 339200.0,
    11.0 / 84.0 - 187.0 / 2100.0,
    -1.0 / 40.0,
];

enum DopriStep {
    Accept { h_new: f64 },
    Reject { h_new: f64 },
}

struct DopriWork {
    k: [Vec<f64>; 7],
    tmp: Vec<f64>,
    y_next: Vec<f64>,
}

impl DopriWork {
    fn new(dim: usize) -> DopriWork {
        DopriWork {
            k: std::array::from_fn(|_| vec![0.0; dim]),
            tmp: vec![0.0; dim],
            y_next: vec![0.0; dim],
        }
    }

    fn step<F>(
        &mut self,
        rhs: &mut F,
        x: f64,
        y: &[f64],
        h: f64,
        abs_tol: f64,
        rel_tol: f64,
    ) -> Result<DopriStep, OdeError>
    where
        F: FnMut(f64, &[f64], &mut [f64]) -> Result<(), OdeError>,
    {
        let dim = y.len();
        rhs(x, y, &mut self.k[0])?;
        for stage in 0..6 {
            for i in 0..dim {
                let mut acc = 0.0;
                for (j, &a) in DP_A[stage].iter().enumerate() {
                    acc += a * self.k[j][i];
                }
                self.tmp[i] = y[i] + h * acc;
            }
            if self.tmp.iter().any(|v| !v.is_finite()) {
                return Ok(DopriStep::Reject { h_new: 0.25 * h });
            }
            rhs(x + DP_C[stage] * h, &self.tmp, &mut self.k[stage + 1])?;
        }
        // Stage 7 input is the 5th-order solution itself.
        self.y_next.copy_from_slice(&self.tmp);

        let mut err_sq = 0.0;
        for i in 0..dim {
            let mut e = 0.0;
            for j in 0..7 {
                e += DP_E[j] * self.k[j][i];
            }
            e *= h;
            let sc = abs_tol + rel_tol * y[i].abs().max(self.y_next[i].abs());
            err_sq += (e / sc) * (e / sc);
        }
        let err = (err_sq / dim as f64).sqrt();
        if !err.is_finite() {
            return Ok(DopriStep::Reject { h_new: 0.25 * h });
        }
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        if err <= 1.0 {
            Ok(DopriStep::Accept { h_new: h * factor })
        } else {
            Ok(DopriStep::Reject { h_new: h * factor })
        }
    }
}

// ---------------------------------------------------------------------------
// Spec-level entry points
// ---------------------------------------------------------------------------

/// Integrate the CKR system
/// `p1' = a2 p1 + 2 a3 p1 p2`, `p2' = a1 + a2 p2 + a3 (p2^2 - p1^2)`.
pub fn integrate_ckr(
    c: &CkrCoefficients,
    x0: f64,
    p0: PhasePoint,
    x1: f64,
    cfg: &IntegratorConfig,
) -> Result<Trajectory, OdeError> {
    let rhs = |x: f64, y: &[f64], dydx: &mut [f64]| -> Result<(), OdeError> {
        let [a1, a2, a3] = c.eval(x)?;
        let (p1, p2) = (y[0], y[1]);
        dydx[0] = a2 * p1 + 2.0 * a3 * p1 * p2;
        dydx[1] = a1 + a2 * p2 + a3 * (p2 * p2 - p1 * p1);
        Ok(())
    };
    let (path, status) = integrate(rhs, x0, &[p0.p1, p0.p2], x1, cfg)?;
    Ok(Trajectory { path, status })
}

/// Integrate the linear non-autonomous system `y' = A(x) y + b(x)`.
///
/// `matrix` fills a row-major `dim * dim` buffer, `forcing` a `dim` buffer.
/// Unlike the CKR flow, a linear solve that hits the blow-up threshold or
/// the step limit is an error: its callers need the whole path.
pub fn integrate_linear<A, B>(
    dim: usize,
    mut matrix: A,
    mut forcing: B,
    x0: f64,
    y0: &[f64],
    x1: f64,
    cfg: &IntegratorConfig,
) -> Result<SampledPath, OdeError>
where
    A: FnMut(f64, &mut [f64]) -> Result<(), OdeError>,
    B: FnMut(f64, &mut [f64]) -> Result<(), OdeError>,
{
    assert_eq!(y0.len(), dim);
    let mut a = vec![0.0; dim * dim];
    let mut b = vec![0.0; dim];
    let rhs = move |x: f64, y: &[f64], dydx: &mut [f64]| -> Result<(), OdeError> {
        matrix(x, &mut a)?;
        forcing(x, &mut b)?;
        for i in 0..dim {
            let mut acc = b[i];
            for j in 0..dim {
                acc += a[i * dim + j] * y[j];
            }
            dydx[i] = acc;
        }
        Ok(())
    };
    let (path, status) = integrate(rhs, x0, y0, x1, cfg)?;
    match status {
        Termination::Completed => Ok(path),
        Termination::BlowUp { x } => Err(OdeError::Unbounded { x }),
        Termination::StepLimit { x } => Err(OdeError::StepLimit { x }),
    }
}

/// Cumulative integral of `f` over the grid, zero at the left endpoint.
///
/// Each grid interval contributes a Simpson panel (with an extra midpoint
/// evaluation), so nodes carry composite-Simpson O(h^4) accuracy.
pub fn antiderivative<F>(mut f: F, grid: &Grid) -> Result<SampledPath, OdeError>
where
    F: FnMut(f64) -> Result<f64, OdeError>,
{
    let mut xs = Vec::with_capacity(grid.points());
    let mut rows = Vec::with_capacity(grid.points());
    let mut acc = 0.0;
    let mut prev_x = grid.x0();
    let mut prev_f = f(prev_x)?;
    xs.push(prev_x);
    rows.push(vec![0.0]);
    for k in 1..grid.points() {
        let x = grid.node(k);
        let mid = 0.5 * (prev_x + x);
        let fm = f(mid)?;
        let fx = f(x)?;
        acc += (x - prev_x) / 6.0 * (prev_f + 4.0 * fm + fx);
        xs.push(x);
        rows.push(vec![acc]);
        prev_x = x;
        prev_f = fx;
    }
    Ok(SampledPath::new(xs, rows, 1))
}

/// Adapt an expression into an integrand for [`antiderivative`].
pub fn expr_integrand(e: &Expr) -> impl FnMut(f64) -> Result<f64, OdeError> + '_ {
    move |x| Ok(e.eval(x)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Expr;

    fn coeffs(a1: &str, a2: &str, a3: &str) -> CkrCoefficients {
        CkrCoefficients::new(
            Expr::parse(a1).unwrap(),
            Expr::parse(a2).unwrap(),
            Expr::parse(a3).unwrap(),
        )
    }

    #[test]
    fn zero_field_is_constant() {
        let c = coeffs("0", "0", "0");
        let t = integrate_ckr(&c, 0.0, PhasePoint::new(1.0, 2.0), 1.0, &IntegratorConfig::rk4(0.1))
            .unwrap();
        assert_eq!(t.status, Termination::Completed);
        for (_, p1, p2) in t.samples() {
            assert_eq!((p1, p2), (1.0, 2.0));
        }
    }

    #[test]
    fn tangent_closed_form() {
        // a = (1, 0, 1) from (0, 0): p2' = 1 + p2^2, so p2 = tan(x).
        let c = coeffs("1", "0", "1");
        for cfg in [IntegratorConfig::rk4(1e-3), IntegratorConfig::rk45(1e-10, 1e-10)] {
            let t = integrate_ckr(&c, 0.0, PhasePoint::new(0.0, 0.0), 1.0, &cfg).unwrap();
            assert_eq!(t.status, Termination::Completed);
            let (x, p) = t.last();
            assert_eq!(x, 1.0);
            assert!((p.p2 - 1.0f64.tan()).abs() < 1e-8, "p2 = {}", p.p2);
            assert_eq!(p.p1, 0.0);
        }
    }

    #[test]
    fn oscillator_closed_form() {
        // a = (1 - x^2, 0, 1) from (0, 0): p2 = x (ground-state momentum).
        let c = coeffs("1 - x^2", "0", "1");
        let t = integrate_ckr(&c, 0.0, PhasePoint::new(0.0, 0.0), 1.0, &IntegratorConfig::rk4(1e-3))
            .unwrap();
        let (_, p) = t.last();
        assert!(p.p1.abs() < 1e-12);
        assert!((p.p2 - 1.0).abs() < 1e-8);
    }

    #[test]
    fn rk4_is_fourth_order() {
        let c = coeffs("1", "0", "1");
        let err = |h: f64| {
            let t = integrate_ckr(&c, 0.0, PhasePoint::new(0.0, 0.0), 1.0, &IntegratorConfig::rk4(h))
                .unwrap();
            (t.last().1.p2 - 1.0f64.tan()).abs()
        };
        let ratio = err(0.02) / err(0.01);
        assert!(
            (12.0..=20.0).contains(&ratio),
            "expected 4th-order error ratio, got {ratio}"
        );
    }

    #[test]
    fn blow_up_is_detected_before_the_pole() {
        let c = coeffs("1", "0", "1");
        let cfg = IntegratorConfig::rk45(1e-9, 1e-9);
        let t = integrate_ckr(&c, 0.0, PhasePoint::new(0.0, 0.0), 3.0, &cfg).unwrap();
        match t.status {
            Termination::BlowUp { x } => {
                assert!(x < std::f64::consts::FRAC_PI_2 + 0.1, "blow-up too late: {x}");
            }
            other => panic!("expected blow-up, got {other:?}"),
        }
        // Stored values stay finite.
        for (_, p1, p2) in t.samples() {
            assert!(p1.is_finite() && p2.is_finite());
        }
    }

    #[test]
    fn p1_axis_is_invariant() {
        let c = coeffs("1 - x^2", "0.3", "1");
        for p2 in [-1.0, 0.0, 2.0] {
            let t = integrate_ckr(
                &c,
                0.0,
                PhasePoint::new(0.0, p2),
                1.0,
                &IntegratorConfig::rk4(1e-2),
            )
            .unwrap();
            for (_, p1, _) in t.samples() {
                assert!(p1.abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn coefficient_domain_error_reports_x() {
        let c = coeffs("log(x)", "0", "1");
        let err = integrate_ckr(
            &c,
            -1.0,
            PhasePoint::new(0.0, 0.0),
            1.0,
            &IntegratorConfig::rk4(0.125),
        )
        .unwrap_err();
        match err {
            OdeError::Coefficient(e) => assert!(e.x <= 0.0),
            other => panic!("expected coefficient error, got {other:?}"),
        }
    }

    #[test]
    fn linear_constant_and_exponential() {
        let path = integrate_linear(
            1,
            |_, a| {
                a[0] = 0.0;
                Ok(())
            },
            |_, b| {
                b[0] = 0.0;
                Ok(())
            },
            0.0,
            &[4.0],
            1.0,
            &IntegratorConfig::rk4(0.1),
        )
        .unwrap();
        for k in 0..path.len() {
            assert_eq!(path.row(k)[0], 4.0);
        }

        let path = integrate_linear(
            1,
            |_, a| {
                a[0] = 1.0;
                Ok(())
            },
            |_, b| {
                b[0] = 0.0;
                Ok(())
            },
            0.0,
            &[1.0],
            1.0,
            &IntegratorConfig::rk45(1e-10, 1e-10),
        )
        .unwrap();
        let e = path.row(path.len() - 1)[0];
        assert!((e - std::f64::consts::E).abs() < 1e-8, "e = {e}");
    }

    #[test]
    fn linear_rotation() {
        // y' = [[0, 1], [-1, 0]] y from (1, 0) is (cos x, -sin x).
        let path = integrate_linear(
            2,
            |_, a| {
                a.copy_from_slice(&[0.0, 1.0, -1.0, 0.0]);
                Ok(())
            },
            |_, b| {
                b.fill(0.0);
                Ok(())
            },
            0.0,
            &[1.0, 0.0],
            std::f64::consts::FRAC_PI_2,
            &IntegratorConfig::rk45(1e-11, 1e-11),
        )
        .unwrap();
        let last = path.row(path.len() - 1);
        assert!(last[0].abs() < 1e-8);
        assert!((last[1] + 1.0).abs() < 1e-8);
    }

    #[test]
    fn antiderivative_values() {
        let grid = Grid::new(0.0, 2.0, 41).unwrap();
        let path = antiderivative(|_| Ok(0.0), &grid).unwrap();
        for k in 0..path.len() {
            assert_eq!(path.row(k)[0], 0.0);
        }

        let path = antiderivative(|x| Ok(x), &grid).unwrap();
        assert!((path.component_at(0, 2.0).unwrap() - 2.0).abs() < 1e-14);

        // int_0^1 exp(-x^2) dx = sqrt(pi)/2 * erf(1).
        let grid = Grid::new(0.0, 1.0, 101).unwrap();
        let e = Expr::parse("exp(-x^2)").unwrap();
        let path = antiderivative(expr_integrand(&e), &grid).unwrap();
        assert!((path.component_at(0, 1.0).unwrap() - 0.7468241328124271).abs() < 1e-8);
    }

    #[test]
    fn interpolation_contract() {
        let path = SampledPath::new(
            vec![0.0, 1.0, 3.0],
            vec![vec![0.0], vec![2.0], vec![6.0]],
            1,
        );
        assert_eq!(path.component_at(0, 0.5).unwrap(), 1.0);
        assert_eq!(path.component_at(0, 2.0).unwrap(), 4.0);
        assert_eq!(path.component_at(0, 3.0).unwrap(), 6.0);
        assert!(matches!(
            path.component_at(0, 3.5),
            Err(OdeError::OutOfRange { .. })
        ));
    }

    #[test]
    fn rejects_bad_config() {
        let c = coeffs("1", "0", "1");
        let mut cfg = IntegratorConfig::rk4(-0.1);
        assert!(matches!(
            integrate_ckr(&c, 0.0, PhasePoint::new(0.0, 0.0), 1.0, &cfg),
            Err(OdeError::InvalidConfig(_))
        ));
        cfg = IntegratorConfig::rk4(0.1);
        assert!(matches!(
            integrate_ckr(&c, 1.0, PhasePoint::new(0.0, 0.0), 0.0, &cfg),
            Err(OdeError::InvalidConfig(_))
        ));
    }
}
