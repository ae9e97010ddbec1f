//! The sl(2,R) vector-field realization on the (p1, p2) plane and its
//! Hamiltonian structures.
//!
//! The three generators
//!
//! ```text
//! chi1 = d/dp2
//! chi2 = p1 d/dp1 + p2 d/dp2
//! chi3 = 2 p1 p2 d/dp1 + (p2^2 - p1^2) d/dp2
//! ```
//!
//! close under the commutators `[chi1,chi2] = chi1`, `[chi2,chi3] = chi3`,
//! `[chi1,chi3] = 2 chi2`. On the chart `p1 != 0` they are Hamiltonian for
//! the symplectic form `omega = p1^-2 dp2 ^ dp1`, with Hamiltonian functions
//! `H1 = -1/p1`, `H2 = -p2/p1`, `H3 = -(p1^2 + p2^2)/p1`, and equivalently
//! for the Poisson bivector `Lambda = p1^2 d/dp2 ^ d/dp1` through
//! `chi_i = -Lambda(dH_i)`.
//!
//! Operations that live on the chart refuse points with `|p1| < EPS_DOM`
//! instead of returning infinities: the chart singularity at the axis is a
//! property of the Hamiltonian description, not of the CKR flow, which
//! crosses no such barrier.

use thiserror::Error;

/// Chart guard: geometry operations require `|p1| >= EPS_DOM`.
pub const EPS_DOM: f64 = 1e-9;

/// Relative step used by the finite-difference bracket path.
pub const H_FD: f64 = 1e-6;

/// A point of the (p1, p2) plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhasePoint {
    pub p1: f64,
    pub p2: f64,
}

impl PhasePoint {
    pub fn new(p1: f64, p2: f64) -> PhasePoint {
        PhasePoint { p1, p2 }
    }
}

/// Components of a tangent vector at a [`PhasePoint`], in the
/// `(d/dp1, d/dp2)` basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TangentPair {
    pub u1: f64,
    pub u2: f64,
}

impl TangentPair {
    pub fn new(u1: f64, u2: f64) -> TangentPair {
        TangentPair { u1, u2 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum GeometryError {
    #[error("point lies on the chart singularity: |p1| = {p1_abs} < {EPS_DOM}")]
    AxisSingularity { p1_abs: f64 },
}

fn guard(q: PhasePoint) -> Result<(), GeometryError> {
    if q.p1.abs() < EPS_DOM {
        return Err(GeometryError::AxisSingularity { p1_abs: q.p1.abs() });
    }
    Ok(())
}

/// Generator index, 1..=3.
fn check_index(i: usize) {
    assert!((1..=3).contains(&i), "generator index must be 1, 2 or 3");
}

/// The vector field `chi_i` at `q`.
pub fn chi(i: usize, q: PhasePoint) -> TangentPair {
    check_index(i);
    match i {
        1 => TangentPair::new(0.0, 1.0),
        2 => TangentPair::new(q.p1, q.p2),
        _ => TangentPair::new(2.0 * q.p1 * q.p2, q.p2 * q.p2 - q.p1 * q.p1),
    }
}

/// Exact Jacobian of `chi_i` at `q`, rows indexed by component, columns by
/// `(p1, p2)`.
pub fn chi_jacobian(i: usize, q: PhasePoint) -> [[f64; 2]; 2] {
    check_index(i);
    match i {
        1 => [[0.0, 0.0], [0.0, 0.0]],
        2 => [[1.0, 0.0], [0.0, 1.0]],
        _ => [[2.0 * q.p2, 2.0 * q.p1], [-2.0 * q.p1, 2.0 * q.p2]],
    }
}

/// Lie bracket `[chi_i, chi_j]` at `q` from the exact Jacobians.
pub fn commutator(i: usize, j: usize, q: PhasePoint) -> TangentPair {
    let xi = chi(i, q);
    let xj = chi(j, q);
    let ji = chi_jacobian(i, q);
    let jj = chi_jacobian(j, q);
    TangentPair::new(
        jj[0][0] * xi.u1 + jj[0][1] * xi.u2 - (ji[0][0] * xj.u1 + ji[0][1] * xj.u2),
        jj[1][0] * xi.u1 + jj[1][1] * xi.u2 - (ji[1][0] * xj.u1 + ji[1][1] * xj.u2),
    )
}

/// Hamiltonian function `H_i` at `q`.
pub fn hamiltonian(i: usize, q: PhasePoint) -> Result<f64, GeometryError> {
    check_index(i);
    guard(q)?;
    Ok(match i {
        1 => -1.0 / q.p1,
        2 => -q.p2 / q.p1,
        _ => -(q.p1 * q.p1 + q.p2 * q.p2) / q.p1,
    })
}

/// Exact gradient `(dH_i/dp1, dH_i/dp2)` at `q`.
pub fn hamiltonian_gradient(i: usize, q: PhasePoint) -> Result<[f64; 2], GeometryError> {
    check_index(i);
    guard(q)?;
    let (p1, p2) = (q.p1, q.p2);
    Ok(match i {
        1 => [1.0 / (p1 * p1), 0.0],
        2 => [p2 / (p1 * p1), -1.0 / p1],
        _ => [-1.0 + p2 * p2 / (p1 * p1), -2.0 * p2 / p1],
    })
}

/// The symplectic form `omega = p1^-2 dp2 ^ dp1` on a pair of tangents.
pub fn symplectic(q: PhasePoint, u: TangentPair, v: TangentPair) -> Result<f64, GeometryError> {
    guard(q)?;
    Ok((u.u2 * v.u1 - u.u1 * v.u2) / (q.p1 * q.p1))
}

/// Closed-form Poisson bracket `{H_i, H_j}_omega = omega(chi_i, chi_j)`.
pub fn bracket_omega(i: usize, j: usize, q: PhasePoint) -> Result<f64, GeometryError> {
    symplectic(q, chi(i, q), chi(j, q))
}

/// Poisson bracket of two scalar fields in the bivector realization,
/// `{U, V}_Lambda = p1^2 (dU/dp2 dV/dp1 - dV/dp2 dU/dp1)`, with partials by
/// central finite differences of step `H_FD * (1 + |p_i|)`.
///
/// This is the path that generalizes to user-supplied scalar fields; for the
/// three Hamiltonian functions the exact counterpart is
/// [`bracket_lambda_hamiltonians`].
pub fn bracket_lambda<F, G>(f: F, g: G, q: PhasePoint) -> Result<f64, GeometryError>
where
    F: Fn(PhasePoint) -> Result<f64, GeometryError>,
    G: Fn(PhasePoint) -> Result<f64, GeometryError>,
{
    guard(q)?;
    let df = fd_gradient(&f, q)?;
    let dg = fd_gradient(&g, q)?;
    Ok(q.p1 * q.p1 * (df[1] * dg[0] - dg[1] * df[0]))
}

/// Closed-form `{H_i, H_j}_Lambda` from the exact gradients.
pub fn bracket_lambda_hamiltonians(
    i: usize,
    j: usize,
    q: PhasePoint,
) -> Result<f64, GeometryError> {
    let di = hamiltonian_gradient(i, q)?;
    let dj = hamiltonian_gradient(j, q)?;
    Ok(q.p1 * q.p1 * (di[1] * dj[0] - dj[1] * di[0]))
}

/// Central finite-difference gradient of a scalar field on the plane.
pub fn fd_gradient<F>(f: &F, q: PhasePoint) -> Result<[f64; 2], GeometryError>
where
    F: Fn(PhasePoint) -> Result<f64, GeometryError>,
{
    let h1 = H_FD * (1.0 + q.p1.abs());
    let h2 = H_FD * (1.0 + q.p2.abs());
    let d1 = (f(PhasePoint::new(q.p1 + h1, q.p2))? - f(PhasePoint::new(q.p1 - h1, q.p2))?)
        / (2.0 * h1);
    let d2 = (f(PhasePoint::new(q.p1, q.p2 + h2))? - f(PhasePoint::new(q.p1, q.p2 - h2))?)
        / (2.0 * h2);
    Ok([d1, d2])
}

/// The Hamiltonian vector field `-Lambda(dH_i)` from the exact gradients.
/// Equals `chi(i, q)` identically on the chart.
pub fn bivector_field(i: usize, q: PhasePoint) -> Result<TangentPair, GeometryError> {
    let d = hamiltonian_gradient(i, q)?;
    let g = q.p1 * q.p1;
    Ok(TangentPair::new(-g * d[1], g * d[0]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_point(rng: &mut ChaCha8Rng, p1_lo: f64, p1_hi: f64, p2_max: f64) -> PhasePoint {
        let mag = rng.random_range(p1_lo..p1_hi);
        let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        PhasePoint::new(sign * mag, rng.random_range(-p2_max..p2_max))
    }

    // Fourth-order five-point gradient, used only by tests that need the
    // finite-difference route at tolerances the three-point stencil cannot
    // reach.
    fn fd_gradient5(
        f: &dyn Fn(PhasePoint) -> Result<f64, GeometryError>,
        q: PhasePoint,
    ) -> [f64; 2] {
        let mut out = [0.0; 2];
        for (axis, slot) in out.iter_mut().enumerate() {
            let h = 1e-4 * (1.0 + if axis == 0 { q.p1.abs() } else { q.p2.abs() });
            let at = |s: f64| {
                let mut p = q;
                if axis == 0 {
                    p.p1 += s;
                } else {
                    p.p2 += s;
                }
                f(p).unwrap()
            };
            *slot = (-at(2.0 * h) + 8.0 * at(h) - 8.0 * at(-h) + at(-2.0 * h)) / (12.0 * h);
        }
        out
    }

    #[test]
    fn chi_values() {
        assert_eq!(chi(1, PhasePoint::new(5.0, -3.0)), TangentPair::new(0.0, 1.0));
        assert_eq!(chi(2, PhasePoint::new(1.0, 2.0)), TangentPair::new(1.0, 2.0));
        assert_eq!(chi(3, PhasePoint::new(1.0, 1.0)), TangentPair::new(2.0, 0.0));
    }

    #[test]
    fn commutator_table_at_fixed_points() {
        // [chi1, chi2] = chi1
        let q = PhasePoint::new(3.0, -1.0);
        assert_eq!(commutator(1, 2, q), TangentPair::new(0.0, 1.0));
        // [chi1, chi3] = 2 chi2
        let q = PhasePoint::new(1.0, 1.0);
        assert_eq!(commutator(1, 3, q), TangentPair::new(2.0, 2.0));
        // Antisymmetry on equal arguments.
        assert_eq!(commutator(2, 2, q), TangentPair::new(0.0, 0.0));
    }

    #[test]
    fn structure_constants_at_random_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let q = random_point(&mut rng, 0.1, 10.0, 10.0);
            let checks = [
                (commutator(1, 2, q), chi(1, q), 1.0),
                (commutator(2, 3, q), chi(3, q), 1.0),
                (commutator(1, 3, q), chi(2, q), 2.0),
            ];
            for (lhs, rhs, scale) in checks {
                assert!((lhs.u1 - scale * rhs.u1).abs() <= 1e-10);
                assert!((lhs.u2 - scale * rhs.u2).abs() <= 1e-10);
            }
        }
    }

    #[test]
    fn hamiltonian_values() {
        let q = PhasePoint::new(1.0, 0.0);
        assert_eq!(hamiltonian(1, q).unwrap(), -1.0);
        assert_eq!(hamiltonian(2, q).unwrap(), 0.0);
        assert_eq!(hamiltonian(3, q).unwrap(), -1.0);

        let q = PhasePoint::new(1.0, 2.0);
        assert_eq!(hamiltonian(1, q).unwrap(), -1.0);
        assert_eq!(hamiltonian(2, q).unwrap(), -2.0);
        assert_eq!(hamiltonian(3, q).unwrap(), -5.0);

        for p1 in [-3.0, 0.5, 7.0] {
            assert_eq!(hamiltonian(2, PhasePoint::new(p1, 0.0)).unwrap(), 0.0);
        }
    }

    #[test]
    fn axis_is_refused() {
        let q = PhasePoint::new(1e-12, 1.0);
        assert!(matches!(
            hamiltonian(1, q),
            Err(GeometryError::AxisSingularity { .. })
        ));
        assert!(symplectic(q, chi(1, q), chi(2, q)).is_err());
        assert!(bivector_field(3, q).is_err());
    }

    #[test]
    fn symplectic_examples() {
        let q = PhasePoint::new(1.0, 2.0);
        let u = chi(1, q);
        assert_eq!(symplectic(q, u, u).unwrap(), 0.0);
        // omega(chi1, chi2) = -H1
        assert_eq!(symplectic(q, chi(1, q), chi(2, q)).unwrap(), 1.0);
        // omega(chi1, chi3) = -2 H2
        let q = PhasePoint::new(1.0, 1.0);
        assert_eq!(symplectic(q, chi(1, q), chi(3, q)).unwrap(), 2.0);
    }

    #[test]
    fn bracket_tables_hold_in_both_realizations() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let h = |i: usize| move |q: PhasePoint| hamiltonian(i, q);
        for _ in 0..100 {
            let q = random_point(&mut rng, 0.1, 10.0, 10.0);
            let table = [
                (1, 2, -hamiltonian(1, q).unwrap()),
                (2, 3, -hamiltonian(3, q).unwrap()),
                (1, 3, -2.0 * hamiltonian(2, q).unwrap()),
            ];
            for (i, j, expected) in table {
                let omega = bracket_omega(i, j, q).unwrap();
                assert!((omega - expected).abs() <= 1e-12 * (1.0 + expected.abs()));
                let lambda_exact = bracket_lambda_hamiltonians(i, j, q).unwrap();
                assert!((lambda_exact - expected).abs() <= 1e-12 * (1.0 + expected.abs()));
                let lambda_fd = bracket_lambda(h(i), h(j), q).unwrap();
                assert!(
                    (lambda_fd - expected).abs() <= 1e-6 * (1.0 + expected.abs()),
                    "fd bracket ({i},{j}) at {q:?}: {lambda_fd} vs {expected}"
                );
            }
        }
    }

    #[test]
    fn lambda_bracket_specific_values() {
        let q = PhasePoint::new(2.0, 1.0);
        let h1 = |q: PhasePoint| hamiltonian(1, q);
        let h3 = |q: PhasePoint| hamiltonian(3, q);
        // {H1, H1} = 0 by antisymmetry.
        assert!(bracket_lambda(h1, h1, q).unwrap().abs() <= 1e-9);
        // {H1, H3} = -2 H2 = 1 at (2, 1).
        let v = bracket_lambda(h1, h3, q).unwrap();
        assert!((v - 1.0).abs() <= 1e-6, "got {v}");
    }

    #[test]
    fn differential_is_contraction_of_omega() {
        // <dH_i, v> = omega(chi_i, v) with a five-point gradient; moderate
        // point range so the check is meaningful at 1e-9.
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..100 {
            let q = random_point(&mut rng, 0.5, 5.0, 5.0);
            let v = TangentPair::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            for i in 1..=3 {
                let f = |p: PhasePoint| hamiltonian(i, p);
                let grad = fd_gradient5(&f, q);
                let pairing = grad[0] * v.u1 + grad[1] * v.u2;
                let contraction = symplectic(q, chi(i, q), v).unwrap();
                assert!(
                    (pairing - contraction).abs() <= 1e-9 * (1.0 + pairing.abs()),
                    "dH{i} mismatch at {q:?}: {pairing} vs {contraction}"
                );
            }
        }
    }

    #[test]
    fn bivector_reproduces_the_fields() {
        assert_eq!(
            bivector_field(1, PhasePoint::new(1.0, 5.0)).unwrap(),
            TangentPair::new(0.0, 1.0)
        );
        assert_eq!(
            bivector_field(2, PhasePoint::new(1.0, 2.0)).unwrap(),
            TangentPair::new(1.0, 2.0)
        );
        assert_eq!(
            bivector_field(3, PhasePoint::new(1.0, 0.0)).unwrap(),
            TangentPair::new(0.0, -1.0)
        );

        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let q = random_point(&mut rng, 0.1, 10.0, 10.0);
            for i in 1..=3 {
                let a = bivector_field(i, q).unwrap();
                let b = chi(i, q);
                assert!((a.u1 - b.u1).abs() <= 1e-12 * (1.0 + b.u1.abs()));
                assert!((a.u2 - b.u2).abs() <= 1e-12 * (1.0 + b.u2.abs()));
            }
        }
    }

    #[test]
    fn jacobi_identity_for_lambda_bracket() {
        // Cyclic sum {H1,{H2,H3}} + {H2,{H3,H1}} + {H3,{H1,H2}} = 0. Inner
        // brackets are exact, outer ones finite-difference.
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..50 {
            let q = random_point(&mut rng, 0.3, 5.0, 5.0);
            let inner = |i: usize, j: usize| move |p: PhasePoint| bracket_lambda_hamiltonians(i, j, p);
            let h = |i: usize| move |p: PhasePoint| hamiltonian(i, p);
            let s = bracket_lambda(h(1), inner(2, 3), q).unwrap()
                + bracket_lambda(h(2), inner(3, 1), q).unwrap()
                + bracket_lambda(h(3), inner(1, 2), q).unwrap();
            assert!(s.abs() <= 1e-5, "Jacobi defect {s} at {q:?}");
        }
    }
}
