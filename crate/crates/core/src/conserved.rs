//! Lie integrals of the CKR flow and the consistency constraints they
//! impose on the model functions.
//!
//! An x-dependent Lie integral `Upsilon = sum_j Upsilon_j(x) H_j` is constant
//! along every solution exactly when its coefficients solve the Euler
//! triplet
//!
//! ```text
//! Upsilon1' = a2 Upsilon1 - a1 Upsilon2
//! Upsilon2' = 2 (a3 Upsilon1 - a1 Upsilon3)
//! Upsilon3' = a3 Upsilon2 - a2 Upsilon3
//! ```
//!
//! Setting `Upsilon2 = 0` decouples the triplet into closed forms for all
//! three model cases, at the price of the algebraic constraint
//! `a3 Upsilon1 = a1 Upsilon3`. Feeding that constraint back into the model
//! produces the solvers at the bottom of this module: a damped Picard
//! iteration for the gauge function `sigma` (Case I), a mass-profile ODE
//! (Case II), and a pointwise residual for the Swanson data (Case III).

use thiserror::Error;

use crate::expr::{DiffError, DomainKind, EvalError, Expr};
use crate::geometry::{hamiltonian, GeometryError, PhasePoint, EPS_DOM};
use crate::grid::Grid;
use crate::model::{swanson_reduce, CkrCoefficients, MassProfile, ModelError, SwansonParams};
use crate::ode::{
    antiderivative, integrate, integrate_linear, IntegratorConfig, OdeError, SampledPath,
    Termination, Trajectory,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConservedError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Derivative(#[from] DiffError),
    #[error(transparent)]
    Ode(#[from] OdeError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("trajectory sample at x = {x} has |p1| < {EPS_DOM}; the Lie integral is undefined there")]
    AxisViolation { x: f64 },
    #[error("the closed-form Lie integral needs nu1 = nu2 and nu3 = nu4 (k1 must vanish)")]
    K1NotZero,
    #[error("the denominator constant of a Lie-integral spec must be nonzero")]
    ZeroDenominator,
    #[error("B0 must be nonzero")]
    B0Zero,
    #[error("square-root domain exhausted at x = {x}: (E - V - B0 M) M^3 < 0")]
    SqrtDomain { x: f64 },
    #[error("intermediate value is not finite at x = {x}")]
    NonFinite { x: f64 },
}

impl From<GeometryError> for ConservedError {
    fn from(e: GeometryError) -> ConservedError {
        match e {
            GeometryError::AxisSingularity { p1_abs } => {
                ConservedError::AxisViolation { x: p1_abs }
            }
        }
    }
}

/// Coefficients of a candidate Lie integral
/// `Upsilon(x, q) = Upsilon1 H1(q) + Upsilon2 H2(q) + Upsilon3 H3(q)`.
#[derive(Debug, Clone, PartialEq)]
pub enum UpsilonTriple {
    Closed([Expr; 3]),
    /// Three columns `(Upsilon1, Upsilon2, Upsilon3)` on a sample grid.
    Sampled(SampledPath),
}

impl UpsilonTriple {
    pub fn components_at(&self, x: f64) -> Result<[f64; 3], ConservedError> {
        match self {
            UpsilonTriple::Closed(es) => Ok([es[0].eval(x)?, es[1].eval(x)?, es[2].eval(x)?]),
            UpsilonTriple::Sampled(path) => {
                let v = path.value_at(x)?;
                Ok([v[0], v[1], v[2]])
            }
        }
    }

    /// Evaluate `Upsilon(x, q)`.
    pub fn value_at(&self, x: f64, q: PhasePoint) -> Result<f64, ConservedError> {
        let u = self.components_at(x)?;
        if q.p1.abs() < EPS_DOM {
            return Err(ConservedError::AxisViolation { x });
        }
        let mut acc = 0.0;
        for (j, uj) in u.iter().enumerate() {
            acc += uj * hamiltonian(j + 1, q)?;
        }
        Ok(acc)
    }
}

/// Integration constants of a closed-form Lie integral: `(C-, C+)` for
/// Case I, `(B-, B+)` for Case II, `(K-, K+)` for Case III. The ratio
/// `minus / plus` is the constant the matching consistency constraint pins.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LieIntegralSpec {
    pub minus: f64,
    pub plus: f64,
}

impl LieIntegralSpec {
    pub fn new(minus: f64, plus: f64) -> Result<LieIntegralSpec, ConservedError> {
        if plus == 0.0 {
            return Err(ConservedError::ZeroDenominator);
        }
        Ok(LieIntegralSpec { minus, plus })
    }

    pub fn ratio(&self) -> f64 {
        self.minus / self.plus
    }
}

/// Case data for [`closed_form_upsilon`].
#[derive(Debug, Clone, Copy)]
pub enum ClosedFormCase<'a> {
    /// Case I: `Upsilon1 = C- exp(-2 int sigma)`, `Upsilon3 = C+ exp(2 int sigma)`.
    ConstantMass { sigma: &'a Expr },
    /// Case II: `Upsilon1 = B- M`, `Upsilon3 = B+ / M`.
    VariableMass { mass: &'a MassProfile },
    /// Case III with `nu1 = nu2`, `nu3 = nu4`: `Upsilon1 = K- alpha1^-2`,
    /// `Upsilon3 = K+ alpha1^2`.
    Swanson { params: &'a SwansonParams },
}

/// Integrate the Euler triplet from the given initial components.
pub fn solve_euler(
    c: &CkrCoefficients,
    initial: [f64; 3],
    x0: f64,
    x1: f64,
    cfg: &IntegratorConfig,
) -> Result<UpsilonTriple, ConservedError> {
    let fill = |x: f64, a: &mut [f64]| -> Result<(), OdeError> {
        let [a1, a2, a3] = c.eval(x)?;
        a.copy_from_slice(&[
            a2, -a1, 0.0, //
            2.0 * a3, 0.0, -2.0 * a1, //
            0.0, a3, -a2,
        ]);
        Ok(())
    };
    let force = |_: f64, b: &mut [f64]| -> Result<(), OdeError> {
        b.fill(0.0);
        Ok(())
    };
    let path = integrate_linear(3, fill, force, x0, &initial, x1, cfg)?;
    Ok(UpsilonTriple::Sampled(path))
}

/// The closed forms under `Upsilon2 = 0`.
///
/// The Case-I cumulative integral of `sigma` is computed by Simpson
/// quadrature anchored at the left grid endpoint (the lower limit of the
/// indefinite integrals is a convention; the grid carries it explicitly).
pub fn closed_form_upsilon(
    spec: &LieIntegralSpec,
    case: ClosedFormCase,
    grid: &Grid,
) -> Result<UpsilonTriple, ConservedError> {
    if spec.plus == 0.0 {
        return Err(ConservedError::ZeroDenominator);
    }
    match case {
        ClosedFormCase::ConstantMass { sigma } => {
            let exponent = antiderivative(|x| Ok(sigma.eval(x)?), grid)?;
            let mut xs = Vec::with_capacity(grid.points());
            let mut rows = Vec::with_capacity(grid.points());
            for (k, x) in grid.iter().enumerate() {
                let s = exponent.row(k)[0];
                let u1 = spec.minus * (-2.0 * s).exp();
                let u3 = spec.plus * (2.0 * s).exp();
                if !u1.is_finite() || !u3.is_finite() {
                    return Err(ConservedError::NonFinite { x });
                }
                xs.push(x);
                rows.push(vec![u1, 0.0, u3]);
            }
            Ok(UpsilonTriple::Sampled(SampledPath::new(xs, rows, 3)))
        }
        ClosedFormCase::VariableMass { mass } => {
            mass.validate_on(grid)?;
            Ok(UpsilonTriple::Closed([
                Expr::constant(spec.minus) * mass.m.clone(),
                Expr::constant(0.0),
                Expr::constant(spec.plus) / mass.m.clone(),
            ]))
        }
        ClosedFormCase::Swanson { params } => {
            if params.nu[1] != params.nu[2] || params.nu[3] != params.nu[4] {
                return Err(ConservedError::K1NotZero);
            }
            params.validate_on(grid)?;
            let sq = Expr::pow(params.alpha1.clone(), Expr::constant(2.0));
            Ok(UpsilonTriple::Closed([
                Expr::constant(spec.minus) / sq.clone(),
                Expr::constant(0.0),
                Expr::constant(spec.plus) * sq,
            ]))
        }
    }
}

/// Drift of a candidate Lie integral along a trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriftReport {
    /// Value at the first sample.
    pub initial: f64,
    pub max_abs_drift: f64,
    /// `max_abs_drift / |initial|`, or the absolute drift when the initial
    /// value vanishes.
    pub relative_drift: f64,
    pub samples: usize,
}

/// Evaluate `Upsilon` on every sample of a trajectory and report the drift
/// from its initial value. Samples must stay off the `p1 = 0` axis.
pub fn conservation_check(
    u: &UpsilonTriple,
    t: &Trajectory,
) -> Result<DriftReport, ConservedError> {
    let mut initial = None;
    let mut max_abs = 0.0f64;
    let mut samples = 0usize;
    for (x, p1, p2) in t.samples() {
        if p1.abs() < EPS_DOM {
            return Err(ConservedError::AxisViolation { x });
        }
        let v = u.value_at(x, PhasePoint::new(p1, p2))?;
        match initial {
            None => initial = Some(v),
            Some(v0) => max_abs = max_abs.max((v - v0).abs()),
        }
        samples += 1;
    }
    let initial = initial.unwrap_or(0.0);
    let relative = if initial != 0.0 { max_abs / initial.abs() } else { max_abs };
    Ok(DriftReport { initial, max_abs_drift: max_abs, relative_drift: relative, samples })
}

/// Result of the damped Picard iteration for the Case-I gauge constraint.
#[derive(Debug, Clone, PartialEq)]
pub struct SigmaSolution {
    pub sigma: SampledPath,
    /// Pointwise residual of
    /// `sigma' - 2m (V - E) + sigma^2 - C0 exp(-4 int sigma)`.
    pub residual: SampledPath,
    pub converged: bool,
    pub iterations: usize,
}

/// Solve `sigma' = 2m (V - E) - sigma^2 + C0 exp(-4 int sigma)`,
/// `sigma(x0) = sigma0`, by damped Picard iteration (damping 0.5, at most
/// 200 sweeps, declared converged at sup-norm update <= 1e-10).
///
/// Non-convergence is not an error: the best iterate comes back with
/// `converged = false`, and the residual column makes the quality auditable
/// either way.
pub fn sigma_constraint(
    potential: &Expr,
    mass: f64,
    energy: f64,
    c0: f64,
    sigma0: f64,
    grid: &Grid,
) -> Result<SigmaSolution, ConservedError> {
    const DAMPING: f64 = 0.5;
    const MAX_ITER: usize = 200;
    const TOL: f64 = 1e-10;

    // Work on a twice-refined grid so Simpson midpoints are nodes.
    let fine = Grid::new(grid.x0(), grid.x1(), 2 * grid.points() - 1)
        .expect("refinement of a valid grid");
    let n = fine.points();

    let mut driving = Vec::with_capacity(n);
    for x in fine.iter() {
        driving.push(2.0 * mass * (potential.eval(x)? - energy));
    }

    let make_path = |vals: &[f64]| {
        SampledPath::new(fine.iter().collect(), vals.iter().map(|&v| vec![v]).collect(), 1)
    };

    // The undamped Picard map: sigma -> sigma0 + int RHS(sigma). Returns the
    // new node values together with the right-hand side they integrate.
    let sweep = |sigma: &SampledPath| -> Result<(Vec<f64>, Vec<f64>), ConservedError> {
        let cumulative = antiderivative(|x| Ok(sigma.component_at(0, x)?), &fine)?;
        let mut rhs = Vec::with_capacity(n);
        for (k, x) in fine.iter().enumerate() {
            let s = sigma.row(k)[0];
            let v = driving[k] - s * s + c0 * (-4.0 * cumulative.row(k)[0]).exp();
            if !v.is_finite() {
                return Err(ConservedError::NonFinite { x });
            }
            rhs.push(v);
        }
        let rhs_path = make_path(&rhs);
        let integrated = antiderivative(|x| Ok(rhs_path.component_at(0, x)?), &fine)?;
        let next: Vec<f64> = (0..n).map(|k| sigma0 + integrated.row(k)[0]).collect();
        Ok((next, rhs))
    };

    let mut current: Vec<f64> = vec![sigma0; n];
    let mut converged = false;
    let mut iterations = 0;
    while iterations < MAX_ITER {
        iterations += 1;
        let path = make_path(&current);
        let (next, _) = sweep(&path)?;
        let mut update = 0.0f64;
        for k in 0..n {
            let blended = (1.0 - DAMPING) * current[k] + DAMPING * next[k];
            update = update.max((blended - current[k]).abs());
            current[k] = blended;
        }
        if update <= TOL {
            converged = true;
            break;
        }
    }

    // One undamped refinement: its output is the exact antiderivative of the
    // recorded right-hand side, so the reported residual measures the true
    // pointwise defect of the final path.
    let path = make_path(&current);
    let (final_vals, rhs_of_prev) = sweep(&path)?;
    let final_path = make_path(&final_vals);
    let cumulative = antiderivative(|x| Ok(final_path.component_at(0, x)?), &fine)?;

    let mut xs = Vec::with_capacity(grid.points());
    let mut sigma_rows = Vec::with_capacity(grid.points());
    let mut residual_rows = Vec::with_capacity(grid.points());
    for (k, x) in fine.iter().enumerate() {
        if k % 2 != 0 {
            continue;
        }
        let s = final_vals[k];
        let defect =
            rhs_of_prev[k] - (driving[k] - s * s + c0 * (-4.0 * cumulative.row(k)[0]).exp());
        xs.push(x);
        sigma_rows.push(vec![s]);
        residual_rows.push(vec![defect]);
    }

    Ok(SigmaSolution {
        sigma: SampledPath::new(xs.clone(), sigma_rows, 1),
        residual: SampledPath::new(xs, residual_rows, 1),
        converged,
        iterations,
    })
}

/// Sign of the square-root branch in [`mass_constraint`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SqrtBranch {
    Plus,
    Minus,
}

impl SqrtBranch {
    fn sign(self) -> f64 {
        match self {
            SqrtBranch::Plus => 1.0,
            SqrtBranch::Minus => -1.0,
        }
    }
}

/// Solve the Case-II consistency condition `B0 M = E - V - a^2 (M')^2 / M^3`
/// for the mass profile (ordering `b = -1`, `c = -a`).
///
/// For `a = 0` the condition is algebraic, `M = (E - V)/B0`, sampled on the
/// grid. For `a != 0` it is integrated as
/// `M' = sign * sqrt((E - V - B0 M) M^3) / |a|` from `M(x0) = m_at_x0`.
pub fn mass_constraint(
    potential: &Expr,
    energy: f64,
    b0: f64,
    a_param: f64,
    branch: SqrtBranch,
    m_at_x0: f64,
    grid: &Grid,
    cfg: &IntegratorConfig,
) -> Result<SampledPath, ConservedError> {
    if b0 == 0.0 {
        return Err(ConservedError::B0Zero);
    }
    if a_param == 0.0 {
        let path =
            SampledPath::sample(grid, 1, |x| Ok(vec![(energy - potential.eval(x)?) / b0]))?;
        return Ok(path);
    }

    let inv_a = 1.0 / a_param.abs();
    let sign = branch.sign();
    let rhs = |x: f64, y: &[f64], dydx: &mut [f64]| -> Result<(), OdeError> {
        let m = y[0];
        let rad = (energy - potential.eval(x)? - b0 * m) * m * m * m;
        if rad < 0.0 {
            // Signalled through a domain-style error; mapped below.
            return Err(OdeError::Coefficient(EvalError {
                kind: DomainKind::SqrtNegative,
                x,
            }));
        }
        dydx[0] = sign * rad.sqrt() * inv_a;
        Ok(())
    };
    let (path, status) =
        integrate(rhs, grid.x0(), &[m_at_x0], grid.x1(), cfg).map_err(|e| match e {
            OdeError::Coefficient(EvalError { kind: DomainKind::SqrtNegative, x }) => {
                ConservedError::SqrtDomain { x }
            }
            other => ConservedError::Ode(other),
        })?;
    match status {
        Termination::Completed => Ok(path),
        Termination::BlowUp { x } => Err(ConservedError::Ode(OdeError::Unbounded { x })),
        Termination::StepLimit { x } => Err(ConservedError::Ode(OdeError::StepLimit { x })),
    }
}

/// Pointwise residual of the Case-III consistency condition in its
/// energy-free differential form, `k2' - 2 nu_tilde alpha1' / alpha1^3`.
///
/// Requires `nu1 = nu2` and `nu3 = nu4`; otherwise `k1 != 0` and the
/// closed-form Lie integral behind the condition does not exist.
pub fn swanson_condition(s: &SwansonParams, grid: &Grid) -> Result<SampledPath, ConservedError> {
    if s.nu[1] != s.nu[2] || s.nu[3] != s.nu[4] {
        return Err(ConservedError::K1NotZero);
    }
    s.validate_on(grid)?;
    let (nt, _, k2) = swanson_reduce(s)?;
    let dk2 = k2.differentiate()?;
    let da1 = s.alpha1.differentiate()?;
    let path = SampledPath::sample(grid, 1, |x| {
        let alpha = s.alpha1.eval(x)?;
        Ok(vec![dk2.eval(x)? - 2.0 * nt * da1.eval(x)? / (alpha * alpha * alpha)])
    })?;
    Ok(path)
}
