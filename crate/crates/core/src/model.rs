//! Coefficient builders: from a physical problem statement to the CKR
//! coefficient triple `(a1, a2, a3)`.
//!
//! Three families are covered.
//!
//! * Case I: a particle of constant mass `m` in a potential `V(x)` with
//!   assumed-known energy `E` (units `hbar = 1`), brought to CKR form by the
//!   gauge map `p = (alpha P + i sigma) / delta` applied to the quantum
//!   momentum function `P`.
//! * Case II: position-dependent mass `m(x) = m0 M(x)` with von Roos
//!   ordering parameters `(a, b, c)`, `a + b + c = -1` (units
//!   `hbar = 2 m0 = 1`).
//! * Case III: the non-Hermitian Swanson Hamiltonian with generalized ladder
//!   operators `a = alpha1 d/dx + alpha2`,
//!   `a+ = -alpha1 d/dx + alpha2 - alpha1'` (same units as Case II).
//!
//! All coefficients are assembled as [`Expr`] trees with exact derivatives;
//! nothing is differenced numerically. Nonvanishing requirements (gauge
//! functions, mass profile, `alpha1`) are checked on an explicit sample
//! grid, never symbolically.

use thiserror::Error;

use crate::expr::{self, DiffError, EvalError, Expr};
use crate::grid::Grid;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("particle mass must be positive, got {mass}")]
    NonPositiveMass { mass: f64 },
    #[error("gauge invariant violated: {name}(x) must be nonvanishing on the working interval, but {name}({x}) = 0")]
    GaugeDegenerate { name: &'static str, x: f64 },
    #[error("mass profile singularity: M({x}) = 0 on the working interval")]
    MassVanishing { x: f64 },
    #[error("ladder coefficient alpha1 vanishes at x = {x} on the working interval")]
    Alpha1Vanishing { x: f64 },
    #[error("von Roos ordering parameters must satisfy a + b + c = -1, got {a} + {b} + {c}")]
    OrderingConstraint { a: f64, b: f64, c: f64 },
    #[error("nu0 - nu1 - nu2 must be nonzero")]
    NuTildeZero,
    #[error("coefficient {name} is not finite on the working interval: {source}")]
    NotFinite { name: &'static str, source: EvalError },
    #[error(transparent)]
    Derivative(#[from] DiffError),
}

/// Constant-mass problem statement. Units: `hbar = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub mass: f64,
    pub potential: Expr,
    pub energy: f64,
}

impl ProblemSpec {
    pub fn new(mass: f64, potential: Expr, energy: f64) -> Result<ProblemSpec, ModelError> {
        if !(mass > 0.0) || !mass.is_finite() {
            return Err(ModelError::NonPositiveMass { mass });
        }
        Ok(ProblemSpec { mass, potential, energy })
    }
}

/// The real gauge functions of the specialized Moebius map
/// `p = (alpha P + i sigma) / delta`; `alpha` and `delta` must not vanish on
/// the working interval.
#[derive(Debug, Clone, PartialEq)]
pub struct GaugeTriple {
    pub alpha: Expr,
    pub delta: Expr,
    pub sigma: Expr,
}

impl GaugeTriple {
    /// `alpha = delta = 1`, `sigma = 0`: the gauge under which `p` is the
    /// quantum momentum function itself.
    pub fn identity() -> GaugeTriple {
        GaugeTriple {
            alpha: Expr::constant(1.0),
            delta: Expr::constant(1.0),
            sigma: Expr::constant(0.0),
        }
    }

    pub fn validate_on(&self, grid: &Grid) -> Result<(), ModelError> {
        check_nonvanishing(&self.alpha, "alpha", grid)?;
        check_nonvanishing(&self.delta, "delta", grid)?;
        Ok(())
    }
}

fn check_nonvanishing(e: &Expr, name: &'static str, grid: &Grid) -> Result<(), ModelError> {
    for x in grid.iter() {
        let v = e.eval(x).map_err(|source| ModelError::NotFinite { name, source })?;
        if v == 0.0 {
            return Err(ModelError::GaugeDegenerate { name, x });
        }
    }
    Ok(())
}

/// Von Roos kinetic-operator ordering parameters, constrained to
/// `a + b + c = -1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MassOrdering {
    a: f64,
    b: f64,
    c: f64,
}

impl MassOrdering {
    pub fn new(a: f64, b: f64, c: f64) -> Result<MassOrdering, ModelError> {
        if a + b + c != -1.0 {
            return Err(ModelError::OrderingConstraint { a, b, c });
        }
        Ok(MassOrdering { a, b, c })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn c(&self) -> f64 {
        self.c
    }
}

/// Dimensionless mass ratio `M(x)` in `m(x) = m0 M(x)`.
///
/// A zero of `M` is a genuine singularity of the model (the symmetry
/// operator changes character with the sign of the effective mass), so it is
/// reported as an error instead of being crossed silently.
#[derive(Debug, Clone, PartialEq)]
pub struct MassProfile {
    pub m: Expr,
}

impl MassProfile {
    pub fn new(m: Expr) -> MassProfile {
        MassProfile { m }
    }

    pub fn validate_on(&self, grid: &Grid) -> Result<(), ModelError> {
        for x in grid.iter() {
            let v = self.m.eval(x).map_err(|source| ModelError::NotFinite { name: "M", source })?;
            if v == 0.0 {
                return Err(ModelError::MassVanishing { x });
            }
        }
        Ok(())
    }
}

/// Parameters of the Swanson Hamiltonian
/// `H = nu0 (a+ a + 1/2) + nu1 a^2 + nu2 (a+)^2 + nu3 a + nu4 a+`.
#[derive(Debug, Clone, PartialEq)]
pub struct SwansonParams {
    pub nu: [f64; 5],
    pub alpha1: Expr,
    pub alpha2: Expr,
}

impl SwansonParams {
    pub fn new(nu: [f64; 5], alpha1: Expr, alpha2: Expr) -> SwansonParams {
        SwansonParams { nu, alpha1, alpha2 }
    }

    /// `nu0 - nu1 - nu2`, the coefficient of the second-order part.
    pub fn nu_tilde(&self) -> f64 {
        self.nu[0] - self.nu[1] - self.nu[2]
    }

    pub fn validate_on(&self, grid: &Grid) -> Result<(), ModelError> {
        if self.nu_tilde() == 0.0 {
            return Err(ModelError::NuTildeZero);
        }
        for x in grid.iter() {
            let v = self
                .alpha1
                .eval(x)
                .map_err(|source| ModelError::NotFinite { name: "alpha1", source })?;
            if v == 0.0 {
                return Err(ModelError::Alpha1Vanishing { x });
            }
        }
        Ok(())
    }
}

/// The coefficient triple of the planar CKR system
/// `p1' = a2 p1 + 2 a3 p1 p2`, `p2' = a1 + a2 p2 + a3 (p2^2 - p1^2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CkrCoefficients {
    pub a1: Expr,
    pub a2: Expr,
    pub a3: Expr,
}

impl CkrCoefficients {
    pub fn new(a1: Expr, a2: Expr, a3: Expr) -> CkrCoefficients {
        CkrCoefficients { a1, a2, a3 }
    }

    pub fn eval(&self, x: f64) -> Result<[f64; 3], EvalError> {
        Ok([self.a1.eval(x)?, self.a2.eval(x)?, self.a3.eval(x)?])
    }

    /// Check that all three coefficients evaluate to finite reals on the
    /// grid.
    pub fn validate_on(&self, grid: &Grid) -> Result<(), ModelError> {
        for x in grid.iter() {
            for (e, name) in [(&self.a1, "a1"), (&self.a2, "a2"), (&self.a3, "a3")] {
                e.eval(x).map_err(|source| ModelError::NotFinite { name, source })?;
            }
        }
        Ok(())
    }
}

/// Case I: constant mass in a potential, under a gauge triple.
///
/// With `f = 2m (V - E)` and `W(u, v) = u'v - uv'`:
///
/// ```text
/// a1 = W(sigma, alpha) / (alpha delta) - (alpha / delta) f + sigma^2 / (alpha delta)
/// a2 = -(2 sigma / alpha + W(delta, alpha) / (delta alpha))
/// a3 = 1 / alpha
/// ```
///
/// Real potentials only; a complex potential has no CKR reduction of this
/// form, and the expression language cannot represent one.
pub fn build_case1(
    p: &ProblemSpec,
    g: &GaugeTriple,
    grid: &Grid,
) -> Result<CkrCoefficients, ModelError> {
    g.validate_on(grid)?;
    let f = Expr::constant(2.0 * p.mass) * (p.potential.clone() - Expr::constant(p.energy));
    let alpha_delta = g.alpha.clone() * g.delta.clone();

    let a1 = expr::wronskian(&g.sigma, &g.alpha)? / alpha_delta.clone()
        - g.alpha.clone() / g.delta.clone() * f
        + Expr::pow(g.sigma.clone(), Expr::constant(2.0)) / alpha_delta;
    let a2 = -(Expr::constant(2.0) * g.sigma.clone() / g.alpha.clone()
        + expr::wronskian(&g.delta, &g.alpha)? / (g.delta.clone() * g.alpha.clone()));
    let a3 = Expr::constant(1.0) / g.alpha.clone();

    let c = CkrCoefficients::new(a1, a2, a3);
    c.validate_on(grid)?;
    Ok(c)
}

/// Effective potential of the von Roos kinetic operator,
/// `V_eff = V + (b+1)/2 * M''/M^2 - (1 + b - a c) * (M')^2 / M^3`.
pub fn effective_potential(
    m: &MassProfile,
    o: MassOrdering,
    v: &Expr,
) -> Result<Expr, ModelError> {
    let dm = m.m.differentiate()?;
    let ddm = dm.differentiate()?;
    let m2 = Expr::pow(m.m.clone(), Expr::constant(2.0));
    let m3 = Expr::pow(m.m.clone(), Expr::constant(3.0));
    Ok(v.clone() + Expr::constant((o.b + 1.0) / 2.0) * (ddm / m2)
        - Expr::constant(1.0 + o.b - o.a * o.c) * (Expr::pow(dm, Expr::constant(2.0)) / m3))
}

/// Case II: position-dependent mass.
///
/// `a1 = M (E - V_eff)`, `a2 = M'/M`, `a3 = 1`. Units `hbar = 2 m0 = 1`.
pub fn build_case2(
    potential: &Expr,
    energy: f64,
    m: &MassProfile,
    o: MassOrdering,
    grid: &Grid,
) -> Result<CkrCoefficients, ModelError> {
    m.validate_on(grid)?;
    let veff = effective_potential(m, o, potential)?;
    let a1 = m.m.clone() * (Expr::constant(energy) - veff);
    let a2 = m.m.differentiate()? / m.m.clone();
    let c = CkrCoefficients::new(a1, a2, Expr::constant(1.0));
    c.validate_on(grid)?;
    Ok(c)
}

/// Collapse the Swanson Hamiltonian onto the second-order operator
/// `H = -nu_tilde d/dx alpha1^2 d/dx + k1 d/dx + k2`, returning
/// `(nu_tilde, k1, k2)`.
///
/// Expanding the ladder products gives
///
/// ```text
/// k1 = (nu1 - nu2) alpha1 (2 alpha2 - alpha1') + (nu3 - nu4) alpha1
/// k2 = (nu0 + nu1 + nu2) alpha2^2 - (nu0 + 2 nu2) alpha1' alpha2
///      - (nu0 - nu1 + nu2) alpha1 alpha2'
///      + nu2 (alpha1 alpha1'' + (alpha1')^2)
///      + (nu3 + nu4) alpha2 - nu4 alpha1' + nu0 / 2
/// ```
///
/// The `nu2` group is `(alpha1 alpha1')'`; a unit test checks the whole
/// reduction against a direct application of the ladder operators.
pub fn swanson_reduce(s: &SwansonParams) -> Result<(f64, Expr, Expr), ModelError> {
    let nt = s.nu_tilde();
    if nt == 0.0 {
        return Err(ModelError::NuTildeZero);
    }
    let [n0, n1, n2, n3, n4] = s.nu;
    let a1p = s.alpha1.differentiate()?;
    let a1pp = a1p.differentiate()?;
    let a2p = s.alpha2.differentiate()?;

    let k1 = Expr::constant(n1 - n2)
        * s.alpha1.clone()
        * (Expr::constant(2.0) * s.alpha2.clone() - a1p.clone())
        + Expr::constant(n3 - n4) * s.alpha1.clone();

    let k2 = Expr::constant(n0 + n1 + n2) * Expr::pow(s.alpha2.clone(), Expr::constant(2.0))
        - Expr::constant(n0 + 2.0 * n2) * a1p.clone() * s.alpha2.clone()
        - Expr::constant(n0 - n1 + n2) * s.alpha1.clone() * a2p
        + Expr::constant(n2)
            * (s.alpha1.clone() * a1pp + Expr::pow(a1p.clone(), Expr::constant(2.0)))
        + Expr::constant(n3 + n4) * s.alpha2.clone()
        - Expr::constant(n4) * a1p
        + Expr::constant(n0 / 2.0);

    Ok((nt, k1, k2))
}

/// Case III: CKR coefficients of the Swanson model,
/// `a1 = (E - k2) / (nu_tilde alpha1^2)`,
/// `a2 = (k1 - 2 nu_tilde alpha1 alpha1') / (nu_tilde alpha1^2)`, `a3 = 1`.
pub fn build_case3(
    s: &SwansonParams,
    energy: f64,
    grid: &Grid,
) -> Result<CkrCoefficients, ModelError> {
    s.validate_on(grid)?;
    let (nt, k1, k2) = swanson_reduce(s)?;
    let denom = Expr::constant(nt) * Expr::pow(s.alpha1.clone(), Expr::constant(2.0));
    let a1 = (Expr::constant(energy) - k2) / denom.clone();
    let a2 = (k1
        - Expr::constant(2.0 * nt) * s.alpha1.clone() * s.alpha1.differentiate()?)
        / denom;
    let c = CkrCoefficients::new(a1, a2, Expr::constant(1.0));
    c.validate_on(grid)?;
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(s: &str) -> Expr {
        Expr::parse(s).unwrap()
    }

    fn grid01() -> Grid {
        Grid::new(0.0, 1.0, 21).unwrap()
    }

    fn assert_close_on(grid: &Grid, got: &Expr, expected: impl Fn(f64) -> f64, tol: f64) {
        for x in grid.iter() {
            let g = got.eval(x).unwrap();
            let want = expected(x);
            assert!(
                (g - want).abs() <= tol * (1.0 + want.abs()),
                "mismatch at x = {x}: got {g}, expected {want}"
            );
        }
    }

    #[test]
    fn case1_harmonic_oscillator() {
        let p = ProblemSpec::new(1.0, e("x^2/2"), 0.5).unwrap();
        let grid = Grid::new(-2.0, 2.0, 41).unwrap();
        let c = build_case1(&p, &GaugeTriple::identity(), &grid).unwrap();
        assert_close_on(&grid, &c.a1, |x| 1.0 - x * x, 1e-14);
        assert_close_on(&grid, &c.a2, |_| 0.0, 1e-14);
        assert_close_on(&grid, &c.a3, |_| 1.0, 1e-14);
        assert_eq!(c.a1.eval(2.0).unwrap(), -3.0);
    }

    #[test]
    fn case1_trivial_and_constant_sigma() {
        // V = E: everything vanishes except a3.
        let p = ProblemSpec::new(1.0, e("0.5"), 0.5).unwrap();
        let c = build_case1(&p, &GaugeTriple::identity(), &grid01()).unwrap();
        assert_close_on(&grid01(), &c.a1, |_| 0.0, 0.0);
        assert_close_on(&grid01(), &c.a2, |_| 0.0, 0.0);

        // Constant sigma = s: a1 = s^2, a2 = -2s.
        let g = GaugeTriple { sigma: e("0.7"), ..GaugeTriple::identity() };
        let c = build_case1(&p, &g, &grid01()).unwrap();
        assert_close_on(&grid01(), &c.a1, |_| 0.49, 1e-15);
        assert_close_on(&grid01(), &c.a2, |_| -1.4, 1e-15);
    }

    #[test]
    fn case1_rejects_degenerate_gauge() {
        let p = ProblemSpec::new(1.0, e("x^2/2"), 0.5).unwrap();
        let g = GaugeTriple { alpha: e("x"), ..GaugeTriple::identity() };
        match build_case1(&p, &g, &grid01()).unwrap_err() {
            ModelError::GaugeDegenerate { name, x } => {
                assert_eq!(name, "alpha");
                assert_eq!(x, 0.0);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn ordering_constraint_is_exact() {
        assert!(MassOrdering::new(0.0, -1.0, 0.0).is_ok());
        assert!(MassOrdering::new(-0.25, -0.5, -0.25).is_ok());
        assert!(matches!(
            MassOrdering::new(0.0, -0.5, 0.0),
            Err(ModelError::OrderingConstraint { .. })
        ));
    }

    #[test]
    fn effective_potential_cases() {
        let v = e("sin(x)");
        // Constant mass: no correction.
        let m = MassProfile::new(e("1"));
        let o = MassOrdering::new(0.3, -1.6, 0.3).unwrap();
        let veff = effective_potential(&m, o, &v).unwrap();
        assert_close_on(&grid01(), &veff, |x| x.sin(), 1e-15);

        // M = e^x, b = -1, c = -a: V_eff = V - a^2 e^-x.
        let m = MassProfile::new(e("exp(x)"));
        let o = MassOrdering::new(0.4, -1.0, -0.4).unwrap();
        let veff = effective_potential(&m, o, &v).unwrap();
        assert_close_on(&grid01(), &veff, |x| x.sin() - 0.16 * (-x).exp(), 1e-14);

        // b = -1, a = c = 0: no correction for any M.
        let m = MassProfile::new(e("1 + x^2"));
        let o = MassOrdering::new(0.0, -1.0, 0.0).unwrap();
        let veff = effective_potential(&m, o, &v).unwrap();
        assert_close_on(&grid01(), &veff, |x| x.sin(), 1e-15);
    }

    #[test]
    fn effective_potential_is_linear_in_v() {
        let m = MassProfile::new(e("1 + x^2/4"));
        let o = MassOrdering::new(0.2, -0.7, -0.5).unwrap();
        let v1 = e("sin(x)");
        let v2 = e("x^2");
        let lhs = effective_potential(&m, o, &(v1.clone() + v2.clone())).unwrap();
        let a = effective_potential(&m, o, &v1).unwrap();
        let b = effective_potential(&m, o, &v2).unwrap();
        let zero = effective_potential(&m, o, &e("0")).unwrap();
        for x in grid01().iter() {
            let defect = lhs.eval(x).unwrap() - a.eval(x).unwrap() - b.eval(x).unwrap()
                + zero.eval(x).unwrap();
            assert!(defect.abs() <= 1e-12);
        }
    }

    #[test]
    fn case2_examples() {
        let o = MassOrdering::new(0.0, -1.0, 0.0).unwrap();

        // Constant mass reduces to Case I in the 2m = 1 convention.
        let m = MassProfile::new(e("1"));
        let c = build_case2(&e("x^2"), 2.0, &m, o, &grid01()).unwrap();
        assert_close_on(&grid01(), &c.a1, |x| 2.0 - x * x, 1e-14);
        assert_close_on(&grid01(), &c.a2, |_| 0.0, 0.0);

        // M = e^x, V = E - e^x B0: a1 = B0 e^{2x}, a2 = 1.
        let b0 = 0.8;
        let m = MassProfile::new(e("exp(x)"));
        let v = Expr::constant(1.5) - Expr::constant(b0) * e("exp(x)");
        let c = build_case2(&v, 1.5, &m, o, &grid01()).unwrap();
        assert_close_on(&grid01(), &c.a1, |x| b0 * (2.0 * x).exp(), 1e-13);
        assert_close_on(&grid01(), &c.a2, |_| 1.0, 1e-14);

        // M = 1 + x^2, V = 0, E = 1 at x = 1.
        let m = MassProfile::new(e("1 + x^2"));
        let c = build_case2(&e("0"), 1.0, &m, o, &grid01()).unwrap();
        assert!((c.a1.eval(1.0).unwrap() - 2.0).abs() < 1e-14);
        assert!((c.a2.eval(1.0).unwrap() - 1.0).abs() < 1e-14);
        assert_eq!(c.a3.eval(0.3).unwrap(), 1.0);
    }

    #[test]
    fn case2_reports_mass_singularity() {
        let o = MassOrdering::new(0.0, -1.0, 0.0).unwrap();
        let m = MassProfile::new(e("x - 0.5"));
        match build_case2(&e("0"), 1.0, &m, o, &grid01()).unwrap_err() {
            ModelError::MassVanishing { x } => assert_eq!(x, 0.5),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn swanson_reduce_oscillator() {
        let s = SwansonParams::new([1.0, 0.0, 0.0, 0.0, 0.0], e("1"), e("x"));
        let (nt, k1, k2) = swanson_reduce(&s).unwrap();
        assert_eq!(nt, 1.0);
        assert_close_on(&grid01(), &k1, |_| 0.0, 0.0);
        assert_close_on(&grid01(), &k2, |x| x * x - 0.5, 1e-15);
    }

    #[test]
    fn swanson_k1_vanishes_for_balanced_parameters() {
        let s = SwansonParams::new([2.0, 0.4, 0.4, 0.3, 0.3], e("1 + x^2"), e("sin(x)"));
        let (_, k1, _) = swanson_reduce(&s).unwrap();
        assert_close_on(&grid01(), &k1, |_| 0.0, 0.0);

        let s = SwansonParams::new([1.5, 0.0, 0.0, 0.0, 0.0], e("1"), e("0"));
        let (_, k1, k2) = swanson_reduce(&s).unwrap();
        assert_close_on(&grid01(), &k1, |_| 0.0, 0.0);
        assert_close_on(&grid01(), &k2, |_| 0.75, 0.0);
    }

    #[test]
    fn swanson_reduce_matches_ladder_operators() {
        // Apply H = nu0 (a+ a + 1/2) + nu1 a^2 + nu2 (a+)^2 + nu3 a + nu4 a+
        // to a trial wave function directly and through the reduced
        // (nu_tilde, k1, k2) operator; the two must agree pointwise.
        let s = SwansonParams::new(
            [2.0, 0.5, 1.0, 0.3, 0.7],
            e("1 + x^2"),
            e("sin(x)"),
        );
        let psi = e("exp(-x^2/2)");
        let dpsi = psi.differentiate().unwrap();

        let apply_a = |f: &Expr| -> Expr {
            s.alpha1.clone() * f.differentiate().unwrap() + s.alpha2.clone() * f.clone()
        };
        let apply_adag = |f: &Expr| -> Expr {
            -(s.alpha1.clone() * f.differentiate().unwrap())
                + (s.alpha2.clone() - s.alpha1.differentiate().unwrap()) * f.clone()
        };

        let [n0, n1, n2, n3, n4] = s.nu;
        let h_ladder = Expr::constant(n0)
            * (apply_adag(&apply_a(&psi)) + Expr::constant(0.5) * psi.clone())
            + Expr::constant(n1) * apply_a(&apply_a(&psi))
            + Expr::constant(n2) * apply_adag(&apply_adag(&psi))
            + Expr::constant(n3) * apply_a(&psi)
            + Expr::constant(n4) * apply_adag(&psi);

        let (nt, k1, k2) = swanson_reduce(&s).unwrap();
        let alpha_sq = Expr::pow(s.alpha1.clone(), Expr::constant(2.0));
        let flux = alpha_sq * dpsi.clone();
        let h_reduced = -(Expr::constant(nt) * flux.differentiate().unwrap())
            + k1 * dpsi
            + k2 * psi;

        let grid = Grid::new(-1.5, 1.5, 31).unwrap();
        for x in grid.iter() {
            let a = h_ladder.eval(x).unwrap();
            let b = h_reduced.eval(x).unwrap();
            assert!(
                (a - b).abs() <= 1e-11 * (1.0 + a.abs()),
                "ladder {a} vs reduced {b} at x = {x}"
            );
        }
    }

    #[test]
    fn case3_examples() {
        // Oscillator reduction.
        let s = SwansonParams::new([1.0, 0.0, 0.0, 0.0, 0.0], e("1"), e("x"));
        let c = build_case3(&s, 0.5, &grid01()).unwrap();
        assert_close_on(&grid01(), &c.a1, |x| 1.0 - x * x, 1e-15);
        assert_close_on(&grid01(), &c.a2, |_| 0.0, 0.0);

        // Balanced nus with alpha1 = e^x: a2 = -2 alpha1'/alpha1 = -2.
        let s = SwansonParams::new([1.0, 0.2, 0.2, 0.1, 0.1], e("exp(x)"), e("x"));
        let c = build_case3(&s, 0.5, &grid01()).unwrap();
        assert_close_on(&grid01(), &c.a2, |_| -2.0, 1e-13);

        // alpha1 = 1 with constant k2 = kappa: a1 = (E - kappa)/nu_tilde.
        let s = SwansonParams::new([1.5, 0.0, 0.0, 0.0, 0.0], e("1"), e("0"));
        let c = build_case3(&s, 2.0, &grid01()).unwrap();
        assert_close_on(&grid01(), &c.a1, |_| (2.0 - 0.75) / 1.5, 1e-15);
    }

    #[test]
    fn case3_rejects_bad_parameters() {
        let s = SwansonParams::new([1.0, 0.5, 0.5, 0.0, 0.0], e("1"), e("x"));
        assert!(matches!(
            build_case3(&s, 0.5, &grid01()),
            Err(ModelError::NuTildeZero)
        ));
        let s = SwansonParams::new([1.0, 0.0, 0.0, 0.0, 0.0], e("x - 0.5"), e("x"));
        assert!(matches!(
            build_case3(&s, 0.5, &grid01()),
            Err(ModelError::Alpha1Vanishing { .. })
        ));
    }

    #[test]
    fn case1_and_case3_agree_on_the_oscillator() {
        // 2m = 1 Case I with V = x^2 - 1/2 matches the nu0-only Swanson
        // triple with alpha2 = x after scaling E.
        let nu0 = 2.0;
        let energy = 0.5;
        let grid = Grid::new(-1.0, 1.0, 41).unwrap();
        let p = ProblemSpec::new(0.5, e("x^2 - 0.5"), energy / nu0).unwrap();
        let c1 = build_case1(&p, &GaugeTriple::identity(), &grid).unwrap();
        let s = SwansonParams::new([nu0, 0.0, 0.0, 0.0, 0.0], e("1"), e("x"));
        let c3 = build_case3(&s, energy, &grid).unwrap();
        for x in grid.iter() {
            let a = c1.eval(x).unwrap();
            let b = c3.eval(x).unwrap();
            for k in 0..3 {
                assert!(
                    (a[k] - b[k]).abs() <= 1e-12,
                    "coefficient a{} differs at x = {x}: {} vs {}",
                    k + 1,
                    a[k],
                    b[k]
                );
            }
        }
    }
}
