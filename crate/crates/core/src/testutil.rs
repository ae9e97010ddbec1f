//! Seeded samplers shared by the unit and acceptance test suites.
//!
//! Not part of the public API.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::expr::{Expr, Func};

/// Draw a bounded random expression tree.
///
/// The grammar is deliberately tame: constants in [-2, 2], integer exponents
/// 2..=4, and only smooth functions, so central finite differences of the
/// result are trustworthy away from scattered domain errors. `abs`/`sgn` are
/// excluded (their kink breaks finite-difference comparisons) and exponents
/// are always constant, so every sampled tree is differentiable.
pub fn random_tame_expr(rng: &mut ChaCha8Rng, depth: usize) -> Expr {
    if depth == 0 {
        return if rng.random_bool(0.5) {
            Expr::var()
        } else {
            Expr::constant(quantized(rng))
        };
    }
    match rng.random_range(0..10) {
        0 => Expr::var(),
        1 => Expr::constant(quantized(rng)),
        2 => Expr::neg(random_tame_expr(rng, depth - 1)),
        3 => Expr::add(
            random_tame_expr(rng, depth - 1),
            random_tame_expr(rng, depth - 1),
        ),
        4 => Expr::sub(
            random_tame_expr(rng, depth - 1),
            random_tame_expr(rng, depth - 1),
        ),
        5 => Expr::mul(
            random_tame_expr(rng, depth - 1),
            random_tame_expr(rng, depth - 1),
        ),
        6 => Expr::div(
            random_tame_expr(rng, depth - 1),
            random_tame_expr(rng, depth - 1),
        ),
        7 => Expr::pow(
            random_tame_expr(rng, depth - 1),
            Expr::constant(rng.random_range(2..=4) as f64),
        ),
        _ => {
            let f = match rng.random_range(0..8) {
                0 => Func::Sin,
                1 => Func::Cos,
                2 => Func::Tanh,
                3 => Func::Sinh,
                4 => Func::Cosh,
                5 => Func::Exp,
                6 => Func::Log,
                _ => Func::Sqrt,
            };
            Expr::call(f, random_tame_expr(rng, depth - 1))
        }
    }
}

// Constants on a coarse lattice keep printed forms short and avoid
// pathological cancellation scales in finite-difference checks.
fn quantized(rng: &mut ChaCha8Rng) -> f64 {
    (rng.random_range(-8..=8) as f64) * 0.25
}

/// Deterministic stream of bounded random expressions.
pub struct ExprSampler {
    rng: ChaCha8Rng,
}

impl ExprSampler {
    pub fn new(seed: u64) -> ExprSampler {
        ExprSampler { rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn sample(&mut self) -> Expr {
        random_tame_expr(&mut self.rng, 3)
    }
}
