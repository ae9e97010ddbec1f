//! Lie symmetry operators of the autonomized CKR field.
//!
//! The flow lives on extended space `(x, p1, p2)` as
//! `X~ = d/dx + sum_j a_j(x) chi_j`. An operator
//! `Y = lambda0(x) d/dx + sum_j lambda_j(x) chi_j` is a symmetry when
//! `[Y, X~] = lambda(x) X~`, which pins `lambda = -lambda0'` and reduces the
//! remaining freedom to a linear non-autonomous system for
//! `(lambda1, lambda2, lambda3)`:
//!
//! ```text
//! lambda1' = lambda0 a1' + lambda1 a2 - lambda2 a1 + a0 a1
//! lambda2' = lambda0 a2' + 2 (lambda1 a3 - lambda3 a1) + a0 a2
//! lambda3' = lambda0 a3' + lambda2 a3 - lambda3 a2 + a0 a3
//! ```
//!
//! with `a0 = lambda0'`. Any `lambda0` works; the classical special choice
//! `lambda0 = a0` forces `lambda0 = A e^x`, available as
//! [`exponential_lambda0`]. Initial data for the `lambda_j` is free (the
//! integration constants are open); every choice yields a symmetry
//! candidate, and [`symmetry_residual`] measures how well the commutator
//! condition actually holds at a point.
//!
//! [`quadrature_lambda13`] rebuilds `lambda1` and `lambda3` by quadrature
//! from a given `lambda2`, the integro-differential route; it serves as an
//! independent cross-check of the ODE solution, reading the integrating
//! factor as `g = exp(int a2)`.

use thiserror::Error;

use crate::expr::{DiffError, EvalError, Expr, Func};
use crate::geometry::{chi, chi_jacobian, PhasePoint};
use crate::grid::Grid;
use crate::model::CkrCoefficients;
use crate::ode::{antiderivative, integrate_linear, IntegratorConfig, OdeError, SampledPath};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SymmetryError {
    #[error(transparent)]
    Derivative(#[from] DiffError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("integrator failure: {0}")]
    Ode(#[from] OdeError),
}

/// A point of the autonomized space `(x, p1, p2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtendedPoint {
    pub x: f64,
    pub p1: f64,
    pub p2: f64,
}

impl ExtendedPoint {
    pub fn new(x: f64, p1: f64, p2: f64) -> ExtendedPoint {
        ExtendedPoint { x, p1, p2 }
    }

    pub fn phase(&self) -> PhasePoint {
        PhasePoint::new(self.p1, self.p2)
    }
}

/// The autonomized field `X~ = d/dx + sum_j a_j(x) chi_j` at a point,
/// as `(1, dp1/dx, dp2/dx)`.
pub fn autonomized(c: &CkrCoefficients, q: ExtendedPoint) -> Result<[f64; 3], EvalError> {
    let [a1, a2, a3] = c.eval(q.x)?;
    Ok([
        1.0,
        a2 * q.p1 + 2.0 * a3 * q.p1 * q.p2,
        a1 + a2 * q.p2 + a3 * (q.p2 * q.p2 - q.p1 * q.p1),
    ])
}

/// The coefficient functions of a symmetry candidate.
#[derive(Debug, Clone, PartialEq)]
pub enum LambdaParts {
    /// Closed-form `(lambda1, lambda2, lambda3)`.
    Closed([Expr; 3]),
    /// Integrated paths and their derivative samples, on the same nodes.
    Sampled { values: SampledPath, derivs: SampledPath },
}

/// A symmetry candidate `Y = lambda0 d/dx + sum lambda_j chi_j` with
/// multiplier `lambda = -a0` and `a0 = lambda0'` by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetryCoefficients {
    pub lambda0: Expr,
    pub a0: Expr,
    pub parts: LambdaParts,
}

impl SymmetryCoefficients {
    pub fn from_exprs(
        lambda0: Expr,
        parts: [Expr; 3],
    ) -> Result<SymmetryCoefficients, SymmetryError> {
        let a0 = lambda0.differentiate()?;
        Ok(SymmetryCoefficients { lambda0, a0, parts: LambdaParts::Closed(parts) })
    }

    /// The trivial symmetry `Y = X~` (`lambda0 = 1`, `lambda_j = a_j`,
    /// multiplier zero).
    pub fn x_tilde(c: &CkrCoefficients) -> SymmetryCoefficients {
        SymmetryCoefficients {
            lambda0: Expr::constant(1.0),
            a0: Expr::constant(0.0),
            parts: LambdaParts::Closed([c.a1.clone(), c.a2.clone(), c.a3.clone()]),
        }
    }

    /// Multiplier `lambda(x) = -a0(x)`.
    pub fn multiplier_at(&self, x: f64) -> Result<f64, SymmetryError> {
        Ok(-self.a0.eval(x)?)
    }

    pub fn lambda_at(&self, x: f64) -> Result<[f64; 3], SymmetryError> {
        match &self.parts {
            LambdaParts::Closed(es) => Ok([es[0].eval(x)?, es[1].eval(x)?, es[2].eval(x)?]),
            LambdaParts::Sampled { values, .. } => {
                let v = values.value_at(x)?;
                Ok([v[0], v[1], v[2]])
            }
        }
    }

    pub fn lambda_deriv_at(&self, x: f64) -> Result<[f64; 3], SymmetryError> {
        match &self.parts {
            LambdaParts::Closed(es) => Ok([
                es[0].differentiate()?.eval(x)?,
                es[1].differentiate()?.eval(x)?,
                es[2].differentiate()?.eval(x)?,
            ]),
            LambdaParts::Sampled { derivs, .. } => {
                let v = derivs.value_at(x)?;
                Ok([v[0], v[1], v[2]])
            }
        }
    }
}

/// The branch `lambda0 = A e^x` singled out by demanding `lambda0 = a0`.
pub fn exponential_lambda0(a: f64) -> Expr {
    Expr::constant(a) * Expr::call(Func::Exp, Expr::var())
}

/// Integrate the coefficient system for `(lambda1, lambda2, lambda3)` with
/// the given `lambda0` and initial data at `x0`.
pub fn solve_lambda(
    c: &CkrCoefficients,
    lambda0: &Expr,
    initial: [f64; 3],
    x0: f64,
    x1: f64,
    cfg: &IntegratorConfig,
) -> Result<SymmetryCoefficients, SymmetryError> {
    let a0 = lambda0.differentiate()?;
    let da = [c.a1.differentiate()?, c.a2.differentiate()?, c.a3.differentiate()?];

    let fill = |x: f64, a: &mut [f64]| -> Result<(), OdeError> {
        let [a1, a2, a3] = c.eval(x)?;
        a.copy_from_slice(&[
            a2, -a1, 0.0, //
            2.0 * a3, 0.0, -2.0 * a1, //
            0.0, a3, -a2,
        ]);
        Ok(())
    };
    let force = |x: f64, b: &mut [f64]| -> Result<(), OdeError> {
        let l0 = lambda0.eval(x)?;
        let a0x = a0.eval(x)?;
        let [a1, a2, a3] = c.eval(x)?;
        b[0] = l0 * da[0].eval(x)? + a0x * a1;
        b[1] = l0 * da[1].eval(x)? + a0x * a2;
        b[2] = l0 * da[2].eval(x)? + a0x * a3;
        Ok(())
    };

    let values = integrate_linear(3, fill, force, x0, &initial, x1, cfg)?;

    // Derivative samples on the same nodes, straight from the system RHS.
    let mut a = vec![0.0; 9];
    let mut b = vec![0.0; 3];
    let mut rows = Vec::with_capacity(values.len());
    for k in 0..values.len() {
        let x = values.xs()[k];
        fill(x, &mut a)?;
        force(x, &mut b)?;
        let lam = values.row(k);
        let mut d = [0.0; 3];
        for i in 0..3 {
            d[i] = b[i] + (0..3).map(|j| a[i * 3 + j] * lam[j]).sum::<f64>();
        }
        rows.push(d.to_vec());
    }
    let derivs = SampledPath::new(values.xs().to_vec(), rows, 3);

    Ok(SymmetryCoefficients {
        lambda0: lambda0.clone(),
        a0,
        parts: LambdaParts::Sampled { values, derivs },
    })
}

/// The commutator defect `R = [Y, X~](q) - lambda(x) X~(q)` as components
/// along `(d/dx, d/dp1, d/dp2)`; all three vanish exactly when `Y` is a
/// symmetry with multiplier `lambda = -a0`.
pub fn symmetry_residual(
    c: &CkrCoefficients,
    s: &SymmetryCoefficients,
    q: ExtendedPoint,
) -> Result<[f64; 3], SymmetryError> {
    let x = q.x;
    let p = q.phase();
    let a = c.eval(x)?;
    let da = [
        c.a1.differentiate()?.eval(x)?,
        c.a2.differentiate()?.eval(x)?,
        c.a3.differentiate()?.eval(x)?,
    ];
    let lam = s.lambda_at(x)?;
    let dlam = s.lambda_deriv_at(x)?;
    let l0 = s.lambda0.eval(x)?;
    let dl0 = s.a0.eval(x)?;
    let multiplier = s.multiplier_at(x)?;

    // Phase-space parts of the two fields.
    let mut xp = [0.0f64; 2];
    let mut yp = [0.0f64; 2];
    for j in 0..3 {
        let v = chi(j + 1, p);
        xp[0] += a[j] * v.u1;
        xp[1] += a[j] * v.u2;
        yp[0] += lam[j] * v.u1;
        yp[1] += lam[j] * v.u2;
    }

    // d/dx component: [Y, X~]^x = -lambda0', minus lambda * 1.
    let r0 = -dl0 - multiplier;

    // Phase components:
    //   lambda0 d(Xp)/dx - d(Yp)/dx + sum_j a_j Jchi_j Yp
    //   - sum_j lambda_j Jchi_j Xp - lambda Xp
    let mut r = [0.0f64; 2];
    for j in 0..3 {
        let v = [chi(j + 1, p).u1, chi(j + 1, p).u2];
        let jac = chi_jacobian(j + 1, p);
        for k in 0..2 {
            r[k] += l0 * da[j] * v[k];
            r[k] -= dlam[j] * v[k];
            r[k] += a[j] * (jac[k][0] * yp[0] + jac[k][1] * yp[1]);
            r[k] -= lam[j] * (jac[k][0] * xp[0] + jac[k][1] * xp[1]);
        }
    }
    r[0] -= multiplier * xp[0];
    r[1] -= multiplier * xp[1];

    Ok([r0, r[0], r[1]])
}

/// Rebuild `lambda1` and `lambda3` by quadrature from a known `lambda2`,
/// with `g = exp(int a2)` anchored at the left grid endpoint:
///
/// ```text
/// lambda1(x) = g(x) [ lambda1(x0) + int_x0^x (1/g) ((lambda0 a1)' - lambda2 a1) ]
/// lambda3(x) = (1/g(x)) [ lambda3(x0) + int_x0^x g (lambda0 a3' + a0 a3 + lambda2 a3) ]
/// ```
pub fn quadrature_lambda13<L>(
    c: &CkrCoefficients,
    lambda0: &Expr,
    lambda2: L,
    initial: [f64; 2],
    grid: &Grid,
) -> Result<(SampledPath, SampledPath), SymmetryError>
where
    L: Fn(f64) -> Result<f64, OdeError>,
{
    let a0 = lambda0.differentiate()?;
    let da3 = c.a3.differentiate()?;
    let l0a1_prime = (lambda0.clone() * c.a1.clone()).differentiate()?;

    // The exponent of g on a twice-refined grid, so the Simpson midpoints of
    // the outer quadratures land on its nodes.
    let fine = Grid::new(grid.x0(), grid.x1(), 2 * grid.points() - 1)
        .expect("refinement of a valid grid");
    let exponent = antiderivative(|x| Ok(c.a2.eval(x)?), &fine)?;
    let g_at = |x: f64| -> Result<f64, OdeError> { Ok(exponent.component_at(0, x)?.exp()) };

    let i1 = antiderivative(
        |x| {
            let g = g_at(x)?;
            Ok((l0a1_prime.eval(x)? - lambda2(x)? * c.a1.eval(x)?) / g)
        },
        grid,
    )?;
    let i3 = antiderivative(
        |x| {
            let g = g_at(x)?;
            Ok(g * (lambda0.eval(x)? * da3.eval(x)?
                + a0.eval(x)? * c.a3.eval(x)?
                + lambda2(x)? * c.a3.eval(x)?))
        },
        grid,
    )?;

    let mut xs = Vec::with_capacity(grid.points());
    let mut rows1 = Vec::with_capacity(grid.points());
    let mut rows3 = Vec::with_capacity(grid.points());
    for (k, x) in grid.iter().enumerate() {
        let g = g_at(x)?;
        xs.push(x);
        rows1.push(vec![g * (initial[0] + i1.row(k)[0])]);
        rows3.push(vec![(initial[1] + i3.row(k)[0]) / g]);
    }
    Ok((
        SampledPath::new(xs.clone(), rows1, 1),
        SampledPath::new(xs, rows3, 1),
    ))
}
