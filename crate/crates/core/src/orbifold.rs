//! Orbifold elliptic genus of `(C^2, 0, Z_n)` with `Z_n` acting through
//! `SU(2)`, and its comparison with the crepant (ALE) resolution.
//!
//! Every commuting pair `(g, h) = (a, b)` fixes only the origin unless both are
//! trivial, so the torus-localised genus is a single fixed-point term per pair:
//!
//! ```text
//! (1/n) sum_{a,b} prod_i orb_factor(u_i, lambda_i(a), lambda_i(b), 0)
//! ```

use num_complex::Complex64 as C64;
use num_integer::Integer;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::fan::{ale_fan, ale_tangent_weights};
use crate::genus::{TorusSample, GENERIC_THRESHOLD};
use crate::rational::{self, frac, int, Rational};
use crate::theta::{self, EvalContext};

/// `Z_n` acting on `C^2` by `(zeta^a x, zeta^-a y)`, recorded as the rational
/// weights `lambda(a) = (a/n, ((n - a) mod n)/n)` in `[0, 1)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CyclicAction {
    pub order: usize,
    pub weights: Vec<[Rational; 2]>,
}

impl CyclicAction {
    pub fn new(order: usize) -> Result<Self> {
        if order < 1 {
            return Err(Error::InvalidInput("group order must be positive".into()));
        }
        let n = order as i64;
        let weights = (0..n)
            .map(|a| [frac(a, n), frac((n - a).mod_floor(&n), n)])
            .collect();
        Ok(Self { order, weights })
    }

    pub fn lambda(&self, a: usize) -> &[Rational; 2] {
        &self.weights[a]
    }

    /// Determinant one and every weight in `[0, 1)`.
    pub fn check(&self) -> bool {
        self.weights.iter().all(|[l1, l2]| {
            let s = l1 + l2;
            let unit = |l: &Rational| l >= &Rational::zero() && l < &int(1);
            (s.is_zero() || s == int(1)) && unit(l1) && unit(l2)
        })
    }
}

/// Fractional part in `[0, 1)`.
fn frac_part(r: &Rational) -> Rational {
    r - r.floor()
}

/// Local data at one torus-fixed point of one `(g, h)`-fixed component:
/// tangent weights (forms in `u`), the `(eps_g, eps_h)` shift of each weight,
/// and the divisor coefficient attached to each weight direction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrbifoldFixedDatum {
    pub weights: Vec<Vec<i64>>,
    pub shifts: Vec<(Rational, Rational)>,
    pub coefficients: Vec<Rational>,
}

impl OrbifoldFixedDatum {
    pub fn evaluate(&self, sample: &TorusSample, ctx: &EvalContext) -> Result<C64> {
        self.weights
            .iter()
            .zip(&self.shifts)
            .zip(&self.coefficients)
            .try_fold(C64::new(1.0, 0.0), |acc, ((w, (eg, eh)), delta)| {
                let f = theta::orb_factor(
                    sample.eval_form(w),
                    rational::to_f64(eg),
                    rational::to_f64(eh),
                    rational::to_f64(delta),
                    ctx,
                )?;
                Ok(acc * f)
            })
    }

    /// Shifted theta arguments that appear in denominators.
    fn shifted_arguments(&self, sample: &TorusSample, ctx: &EvalContext) -> Vec<C64> {
        self.weights
            .iter()
            .zip(&self.shifts)
            .map(|(w, (eg, eh))| {
                sample.eval_form(w) + rational::to_f64(eg) - ctx.tau * rational::to_f64(eh)
            })
            .collect()
    }
}

/// The origin of `C^2` for the pair `(a, b)`.
pub fn plane_datum(action: &CyclicAction, a: usize, b: usize) -> OrbifoldFixedDatum {
    let (la, lb) = (action.lambda(a), action.lambda(b));
    OrbifoldFixedDatum {
        weights: vec![vec![1, 0], vec![0, 1]],
        shifts: vec![
            (la[0].clone(), lb[0].clone()),
            (la[1].clone(), lb[1].clone()),
        ],
        coefficients: vec![Rational::zero(), Rational::zero()],
    }
}

/// The two torus-fixed points on the exceptional curve of the blow-up of the
/// origin, for the pair `(a, b)`. Chart `i` has coordinates `(x_i, x_j / x_i)`;
/// the first direction is normal to the exceptional divisor, which carries
/// coefficient `-1`.
pub fn blowup_data(action: &CyclicAction, a: usize, b: usize) -> [OrbifoldFixedDatum; 2] {
    let (la, lb) = (action.lambda(a), action.lambda(b));
    let chart = |i: usize, j: usize| {
        let mut normal = vec![0, 0];
        normal[i] = 1;
        let mut ratio = vec![0, 0];
        ratio[j] = 1;
        ratio[i] = -1;
        OrbifoldFixedDatum {
            weights: vec![normal, ratio],
            shifts: vec![
                (la[i].clone(), lb[i].clone()),
                (frac_part(&(&la[j] - &la[i])), frac_part(&(&lb[j] - &lb[i]))),
            ],
            coefficients: vec![int(-1), Rational::zero()],
        }
    };
    [chart(0, 1), chart(1, 0)]
}

/// Orbifold genus of `(C^2, 0, Z_n)` at one torus sample.
pub fn orbifold_ell_c2(n: usize, sample: &TorusSample, ctx: &EvalContext) -> Result<C64> {
    let action = CyclicAction::new(n)?;
    let mut total = C64::new(0.0, 0.0);
    for a in 0..n {
        for b in 0..n {
            total += plane_datum(&action, a, b).evaluate(sample, ctx)?;
        }
    }
    Ok(total / n as f64)
}

/// Genus of the minimal resolution of `C^2 / Z_n`, as a sum over its `n`
/// fixed points with every divisor coefficient zero.
pub fn resolution_ell(n: usize, sample: &TorusSample, ctx: &EvalContext) -> Result<C64> {
    ale_tangent_weights(n)?
        .iter()
        .try_fold(C64::new(0.0, 0.0), |acc, [x1, x2]| {
            Ok(acc
                + theta::phi(sample.eval_form(x1), -1.0, ctx)?
                    * theta::phi(sample.eval_form(x2), -1.0, ctx)?)
        })
}

/// Orbifold genus of the blown-up plane with the exceptional divisor at
/// coefficient `-1`.
pub fn orbifold_blowup_ell(n: usize, sample: &TorusSample, ctx: &EvalContext) -> Result<C64> {
    let action = CyclicAction::new(n)?;
    let mut total = C64::new(0.0, 0.0);
    for a in 0..n {
        for b in 0..n {
            for datum in blowup_data(&action, a, b) {
                total += datum.evaluate(sample, ctx)?;
            }
        }
    }
    Ok(total / n as f64)
}

/// Whether every denominator theta in the orbifold, resolution and blow-up sums
/// stays away from zero at this sample.
pub fn orbifold_generic(n: usize, sample: &TorusSample, ctx: &EvalContext) -> bool {
    let Ok(action) = CyclicAction::new(n) else {
        return false;
    };
    let floor = GENERIC_THRESHOLD * ctx.q_eighth().norm();
    let ok = |t: C64| matches!(theta::theta(t, ctx), Ok(v) if v.norm() >= floor);
    let Ok(weights) = ale_tangent_weights(n) else {
        return false;
    };
    if !weights.iter().flatten().all(|w| ok(sample.eval_form(w))) {
        return false;
    }
    if ![-1.0, -2.0].iter().all(|&c| ok(ctx.z * c)) {
        return false;
    }
    (0..n).all(|a| {
        (0..n).all(|b| {
            let mut args = plane_datum(&action, a, b).shifted_arguments(sample, ctx);
            for d in blowup_data(&action, a, b) {
                args.extend(d.shifted_arguments(sample, ctx));
            }
            args.into_iter().all(ok)
        })
    })
}

fn max_relative(
    samples: &[TorusSample],
    f: impl Fn(&TorusSample) -> Result<(C64, C64)>,
) -> Result<f64> {
    samples.iter().try_fold(0.0f64, |worst, s| {
        let (lhs, reference) = f(s)?;
        Ok(worst.max((lhs - reference).norm() / reference.norm().max(1.0)))
    })
}

/// `max |orbifold - resolution| / max(1, |resolution|)` over the samples.
pub fn mckay_residual(n: usize, samples: &[TorusSample], ctx: &EvalContext) -> Result<f64> {
    max_relative(samples, |s| {
        Ok((orbifold_ell_c2(n, s, ctx)?, resolution_ell(n, s, ctx)?))
    })
}

/// `max |blown-up orbifold genus - orbifold genus| / max(1, |orbifold genus|)`.
pub fn orbifold_blowup_residual(
    n: usize,
    samples: &[TorusSample],
    ctx: &EvalContext,
) -> Result<f64> {
    max_relative(samples, |s| {
        Ok((orbifold_blowup_ell(n, s, ctx)?, orbifold_ell_c2(n, s, ctx)?))
    })
}

/// Orbifold Euler number `(1/n) sum_{(g,h)} e((C^2)^{g,h})`. Every fixed
/// locus is a linear subspace, so each pair contributes 1.
pub fn orbifold_euler(n: usize) -> Result<u64> {
    let action = CyclicAction::new(n)?;
    let mut total = 0u64;
    for a in 0..n {
        for b in 0..n {
            let (la, lb) = (action.lambda(a), action.lambda(b));
            // the fixed locus is C^k with k = #{i : lambda_i(a) = lambda_i(b) = 0}
            let _k = (0..2)
                .filter(|&i| la[i].is_zero() && lb[i].is_zero())
                .count();
            total += 1;
        }
    }
    Ok(total / n as u64)
}

/// Number of torus-fixed points of the ALE resolution.
pub fn ale_fixed_point_count(n: usize) -> Result<usize> {
    Ok(ale_fan(n)?.0.num_max_cones())
}

/// Steps for the `z -> 0` extrapolation of `theta(-z)^2 * resolution_ell`.
pub const DEGENERATION_STEPS: [f64; 2] = [1e-3, 1e-4];

/// `|lim_{z->0} theta(-z)^2 resolution_ell(n) - n|`, the limit taken by
/// linear extrapolation from `DEGENERATION_STEPS`.
pub fn euler_degeneration(n: usize, sample: &TorusSample, ctx: &EvalContext) -> Result<f64> {
    let at = |z: f64| -> Result<C64> {
        let small = ctx.with_z(C64::new(z, 0.0));
        Ok(theta::theta(C64::new(-z, 0.0), &small)?.powu(2) * resolution_ell(n, sample, &small)?)
    };
    let [h1, h2] = DEGENERATION_STEPS;
    let (v1, v2) = (at(h1)?, at(h2)?);
    let r = h1 / h2;
    let limit = (v2 * r - v1) / (r - 1.0);
    Ok((limit - n as f64).norm())
}
