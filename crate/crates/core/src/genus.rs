//! Equivariant elliptic genera of toric pairs by fixed-point summation, their
//! chi_y specialisation, and stringy Euler numbers.
//!
//! The genus of a pair `(X, sum delta_i D_i)` is evaluated in the normalised
//! form
//!
//! ```text
//! sum_{maximal cones C} prod_j phi(x^C_j(u), delta_{r_j} - 1)
//! ```
//!
//! where `x^C_j` is the dual form of ray `r_j` of `C`. It differs from the
//! unnormalised index by the factor `prod_{all rays} theta((delta_i - 1) z)`,
//! which is nonzero for generic `z`.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use num_traits::{One, Zero};
use rand::Rng;

use crate::error::{Error, Result};
use crate::fan::{Fan, FanMorphism};
use crate::pwpoly::{pullback, PiecewisePoly};
use crate::rational::{self, Rational};
use crate::theta::{self, EvalContext};

/// Samples are rejected when a denominator theta falls below this fraction of `|q|^(1/8)`.
pub const GENERIC_THRESHOLD: f64 = 1e-6;

/// Rejections tolerated per requested sample.
pub const MAX_REJECTIONS: usize = 100;

/// A smooth toric variety together with a coefficient `delta_i != 1` on every
/// torus-invariant divisor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ToricPair {
    pub fan: Fan,
    pub delta: Vec<Rational>,
}

impl ToricPair {
    pub fn new(fan: Fan, delta: Vec<Rational>) -> Result<Self> {
        if delta.len() != fan.num_rays() {
            return Err(Error::InvalidInput(format!(
                "{} coefficients for {} rays",
                delta.len(),
                fan.num_rays()
            )));
        }
        if let Some(i) = delta.iter().position(|d| d.is_one()) {
            return Err(Error::InvalidInput(format!(
                "coefficient of ray {i} equals 1"
            )));
        }
        Ok(Self { fan, delta })
    }

    /// The pair with every coefficient zero.
    pub fn trivial(fan: Fan) -> Self {
        let delta = vec![Rational::zero(); fan.num_rays()];
        Self { fan, delta }
    }

    /// `delta_i - 1` per ray.
    pub fn shifted(&self) -> Vec<Rational> {
        self.delta.iter().map(|d| d - Rational::one()).collect()
    }

    /// Whether the sample keeps every denominator theta of the fixed-point sum
    /// away from zero.
    pub fn is_generic(&self, sample: &TorusSample, ctx: &EvalContext) -> bool {
        let floor = GENERIC_THRESHOLD * ctx.q_eighth().norm();
        let Ok(frames) = self.fan.dual_frames() else {
            return false;
        };
        frames.iter().all(|frame| {
            frame.forms.iter().all(|f| matches!(theta::theta(sample.eval_form(f), ctx), Ok(v) if v.norm() >= floor))
        }) && self
            .shifted()
            .iter()
            .all(|c| matches!(theta::theta(ctx.z * rational::to_f64(c), ctx), Ok(v) if v.norm() >= floor))
    }
}

/// A point `u` of the complexified Lie algebra of the torus.
#[derive(Debug, Clone, PartialEq)]
pub struct TorusSample {
    pub u: Vec<C64>,
}

impl TorusSample {
    pub fn new(u: Vec<C64>) -> Self {
        Self { u }
    }

    /// Real parts uniform in `[0, 1)`, imaginary parts uniform in `[-0.1, 0.1)`.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Self {
        Self {
            u: (0..dim)
                .map(|_| C64::new(rng.gen_range(0.0..1.0), rng.gen_range(-0.1..0.1)))
                .collect(),
        }
    }

    pub fn eval_form(&self, form: &[i64]) -> C64 {
        form.iter().zip(&self.u).map(|(&a, &x)| x * a as f64).sum()
    }
}

/// Draws `count` samples accepted by `accept`, resampling on rejection.
pub fn generic_samples<R: Rng + ?Sized>(
    rng: &mut R,
    count: usize,
    dim: usize,
    accept: impl Fn(&TorusSample) -> bool,
) -> Result<Vec<TorusSample>> {
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let mut rejections = 0;
        loop {
            let s = TorusSample::random(rng, dim);
            if accept(&s) {
                out.push(s);
                break;
            }
            rejections += 1;
            if rejections > MAX_REJECTIONS {
                return Err(Error::SampleExhausted(rejections));
            }
        }
    }
    Ok(out)
}

/// Whether `K_X + sum delta_i D_i = 0`, i.e. the ray values `delta_i - 1`
/// come from one global linear form.
pub fn cy_check(pair: &ToricPair) -> bool {
    let Ok(frame) = pair.fan.dual_frame(0) else {
        return false;
    };
    let values = pair.shifted();
    let n = pair.fan.dim;
    let mut m = vec![Rational::zero(); n];
    for (pos, &r) in pair.fan.max_cones[0].iter().enumerate() {
        for (a, slot) in m.iter_mut().enumerate() {
            *slot += &values[r] * Rational::from_integer(frame.forms[pos][a].into());
        }
    }
    pair.fan.rays.iter().zip(&values).all(|(ray, v)| {
        let at: Rational = ray
            .iter()
            .zip(&m)
            .map(|(&x, c)| c * Rational::from_integer(x.into()))
            .sum();
        &at == v
    })
}

/// Per-cone summands of the normalised genus, in maximal-cone order.
pub fn normalized_ell_terms(
    pair: &ToricPair,
    sample: &TorusSample,
    ctx: &EvalContext,
) -> Result<Vec<C64>> {
    let shifted: Vec<f64> = pair.shifted().iter().map(rational::to_f64).collect();
    pair.fan
        .dual_frames()?
        .iter()
        .map(|frame| {
            pair.fan.max_cones[frame.cone]
                .iter()
                .zip(&frame.forms)
                .try_fold(C64::new(1.0, 0.0), |acc, (&r, form)| {
                    Ok(acc * theta::phi(sample.eval_form(form), shifted[r], ctx)?)
                })
        })
        .collect()
}

pub fn normalized_ell(pair: &ToricPair, sample: &TorusSample, ctx: &EvalContext) -> Result<C64> {
    Ok(normalized_ell_terms(pair, sample, ctx)?.into_iter().sum())
}

/// `|sum| / max |summand|`; zero up to roundoff for Calabi-Yau pairs.
pub fn rigidity_residual(pair: &ToricPair, sample: &TorusSample, ctx: &EvalContext) -> Result<f64> {
    let terms = normalized_ell_terms(pair, sample, ctx)?;
    let scale = terms.iter().map(|t| t.norm()).fold(0.0, f64::max);
    let sum: C64 = terms.into_iter().sum();
    Ok(if scale == 0.0 {
        0.0
    } else {
        sum.norm() / scale
    })
}

/// Checks that `fine` carries the pullback of `coarse`'s ray values `delta - 1`.
pub fn check_pulled_back(
    fine: &ToricPair,
    coarse: &ToricPair,
    morphism: &FanMorphism,
) -> Result<()> {
    if morphism.source != fine.fan || morphism.target != coarse.fan {
        return Err(Error::NotPulledBack(
            "morphism does not connect the two fans".into(),
        ));
    }
    let coarse_fn = PiecewisePoly::from_ray_coefficients(&coarse.fan, &coarse.shifted())?;
    let fine_fn = PiecewisePoly::from_ray_coefficients(&fine.fan, &fine.shifted())?;
    if pullback(morphism, &coarse_fn)? != fine_fn {
        return Err(Error::NotPulledBack(
            "fine coefficients - 1 differ from the pulled-back values".into(),
        ));
    }
    Ok(())
}

/// Maximum over samples of `|E(fine) - E(coarse)| / max(1, |E(coarse)|)`.
pub fn blowup_identity_residual(
    fine: &ToricPair,
    coarse: &ToricPair,
    morphism: &FanMorphism,
    samples: &[TorusSample],
    ctx: &EvalContext,
) -> Result<f64> {
    check_pulled_back(fine, coarse, morphism)?;
    samples.iter().try_fold(0.0f64, |worst, s| {
        let a = normalized_ell(fine, s, ctx)?;
        let b = normalized_ell(coarse, s, ctx)?;
        Ok(worst.max((a - b).norm() / b.norm().max(1.0)))
    })
}

fn chi_factor(x: C64, y: C64) -> Result<C64> {
    let w = (-C64::i() * 2.0 * PI * x).exp();
    let den = 1.0 - w;
    if den.norm() < 1e-12 {
        return Err(Error::Pole(format!("weight {x} is an integer")));
    }
    Ok((1.0 - y * w) / den)
}

/// Equivariant chi_y genus of the stratum `D_J` cut out by the rays in
/// `stratum` (the whole variety for an empty stratum): a sum over maximal
/// cones containing `stratum` of `prod (1 - y e^{-2 pi i x}) / (1 - e^{-2 pi i x})`
/// over the dual forms of the remaining rays.
pub fn chi_y_stratum(fan: &Fan, stratum: &[usize], sample: &TorusSample, y: C64) -> Result<C64> {
    let mut total = C64::new(0.0, 0.0);
    for k in fan.cones_containing(stratum) {
        let frame = fan.dual_frame(k)?;
        let mut term = C64::new(1.0, 0.0);
        for (&r, form) in fan.max_cones[k].iter().zip(&frame.forms) {
            if !stratum.contains(&r) {
                term *= chi_factor(sample.eval_form(form), y)?;
            }
        }
        total += term;
    }
    Ok(total)
}

pub fn chi_y_genus(fan: &Fan, sample: &TorusSample, y: C64) -> Result<C64> {
    chi_y_stratum(fan, &[], sample, y)
}

/// Whether no tangent weight of the fan is within `1e-6` of an integer pole.
pub fn chi_y_generic(fan: &Fan, sample: &TorusSample) -> bool {
    let Ok(frames) = fan.dual_frames() else {
        return false;
    };
    frames.iter().all(|f| {
        f.forms
            .iter()
            .all(|form| (1.0 - (-C64::i() * 2.0 * PI * sample.eval_form(form)).exp()).norm() > 1e-6)
    })
}

/// A divisor `sum a_i D_i` supported on some rays of a fan.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Divisor {
    pub rays: Vec<usize>,
    pub coefficients: Vec<Rational>,
}

impl Divisor {
    pub fn empty() -> Self {
        Self {
            rays: Vec::new(),
            coefficients: Vec::new(),
        }
    }

    pub fn new(rays: Vec<usize>, coefficients: Vec<Rational>) -> Result<Self> {
        if rays.len() != coefficients.len() {
            return Err(Error::InvalidInput(
                "one coefficient per divisor ray".into(),
            ));
        }
        let mut sorted = rays.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != rays.len() {
            return Err(Error::InvalidInput("divisor repeats a ray".into()));
        }
        if coefficients.iter().any(|a| a == &-Rational::one()) {
            return Err(Error::InvalidInput("divisor coefficient -1".into()));
        }
        Ok(Self { rays, coefficients })
    }

    fn check(&self, fan: &Fan) -> Result<()> {
        if let Some(&r) = self.rays.iter().find(|&&r| r >= fan.num_rays()) {
            return Err(Error::InvalidInput(format!("divisor ray {r} not in fan")));
        }
        Ok(())
    }

    fn coefficient(&self, ray: usize) -> Option<&Rational> {
        self.rays
            .iter()
            .position(|&r| r == ray)
            .map(|p| &self.coefficients[p])
    }
}

/// `e_str(X, D) = sum_J e(D_J^o) prod_{j in J} 1/(a_j + 1)`, where `e(D_J^o)`
/// counts maximal cones meeting the divisor rays in exactly `J`.
pub fn stringy_euler(fan: &Fan, divisor: &Divisor) -> Result<Rational> {
    divisor.check(fan)?;
    Ok(fan
        .max_cones
        .iter()
        .map(|cone| {
            cone.iter()
                .filter_map(|&r| divisor.coefficient(r))
                .fold(Rational::one(), |acc, a| acc / (a + Rational::one()))
        })
        .sum())
}

/// `sum_{J subset I} chi_y(D_J) prod_{j in J} ((y - 1)/(y^{a_j + 1} - 1) - 1)`.
pub fn stringy_j_sum(fan: &Fan, divisor: &Divisor, sample: &TorusSample, y: C64) -> Result<C64> {
    divisor.check(fan)?;
    let m = divisor.rays.len();
    let mut total = C64::new(0.0, 0.0);
    for mask in 0u64..(1u64 << m) {
        let members: Vec<usize> = (0..m).filter(|&b| mask >> b & 1 == 1).collect();
        let stratum: Vec<usize> = members.iter().map(|&b| divisor.rays[b]).collect();
        if !fan.has_cone(&stratum) {
            continue;
        }
        let weight = members.iter().fold(C64::new(1.0, 0.0), |acc, &b| {
            let a = rational::to_f64(&divisor.coefficients[b]);
            acc * ((y - 1.0) / (y.powf(a + 1.0) - 1.0) - 1.0)
        });
        total += chi_y_stratum(fan, &stratum, sample, y)? * weight;
    }
    Ok(total)
}

/// Step sizes for the `y -> 1` extrapolation.
pub const LIMIT_STEPS: [f64; 2] = [1e-3, 1e-4];

/// `|q|` used for the small-`q` theta cross-check.
pub const SMALL_Q: f64 = 1e-6;

/// Outcome of the `q -> 0`, `y -> 1` limit comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct StringyLimit {
    pub e_str: Rational,
    /// Extrapolated J-sum at `y = 1`.
    pub chi_y_limit: C64,
    /// Extrapolated theta-based genus at `q = SMALL_Q`, `y = 1`.
    pub theta_limit: C64,
    /// `|chi_y_limit - e_str|`.
    pub residual: f64,
    /// `|theta_limit - e_str|`.
    pub theta_residual: f64,
}

fn richardson(coarse: C64, fine: C64, what: &str) -> Result<C64> {
    let ratio = LIMIT_STEPS[0] / LIMIT_STEPS[1];
    let spread = (coarse - fine).norm();
    if !coarse.is_finite() || !fine.is_finite() || spread > 0.1 * fine.norm().max(1.0) {
        return Err(Error::Divergence(format!("{what}: {coarse} vs {fine}")));
    }
    Ok((fine * ratio - coarse) / (ratio - 1.0))
}

/// Compares `e_str` with the `y -> 1` limit of the J-sum and with the `q -> 0`,
/// `y -> 1` limit of `(y^(1/2) theta(-z))^n` times the normalised genus of
/// `(X, -D)`, where `y = e^{2 pi i z}`.
pub fn stringy_limit_residual(
    fan: &Fan,
    divisor: &Divisor,
    sample: &TorusSample,
    ctx: &EvalContext,
) -> Result<StringyLimit> {
    let e_str = stringy_euler(fan, divisor)?;
    let exact = rational::to_f64(&e_str);

    let chi_y_limit = if divisor.rays.is_empty() {
        stringy_j_sum(fan, divisor, sample, C64::new(1.0, 0.0))?
    } else {
        let [a, b] =
            LIMIT_STEPS.map(|eps| stringy_j_sum(fan, divisor, sample, C64::new(1.0 + eps, 0.0)));
        richardson(a?, b?, "J-sum")?
    };

    let mut delta = vec![Rational::zero(); fan.num_rays()];
    for (&r, a) in divisor.rays.iter().zip(&divisor.coefficients) {
        delta[r] = -a.clone();
    }
    let pair = ToricPair::new(fan.clone(), delta)?;
    let tau = C64::new(0.0, -SMALL_Q.ln() / (2.0 * PI));
    let theta_at = |eps: f64| -> Result<C64> {
        let z = C64::new(0.0, -(1.0 + eps).ln() / (2.0 * PI));
        let small = EvalContext::new(tau, z)?
            .with_trunc(ctx.trunc)
            .with_tol(ctx.tol);
        let y = C64::new(1.0 + eps, 0.0);
        let norm = y.sqrt() * theta::theta(-z, &small)?;
        Ok(norm.powu(fan.dim as u32) * normalized_ell(&pair, sample, &small)?)
    };
    let theta_limit = richardson(
        theta_at(LIMIT_STEPS[0])?,
        theta_at(LIMIT_STEPS[1])?,
        "theta genus",
    )?;

    Ok(StringyLimit {
        residual: (chi_y_limit - exact).norm(),
        theta_residual: (theta_limit - exact).norm(),
        e_str,
        chi_y_limit,
        theta_limit,
    })
}
