//! Jacobi theta function and the elliptic per-weight factors.
//!
//! Convention: with `q = exp(2 pi i tau)`,
//!
//! ```text
//! theta(t, tau) = q^(1/8) (2 sin pi t) prod_{l>=1} (1 - q^l)(1 - q^l e^{2 pi i t})(1 - q^l e^{-2 pi i t})
//! ```
//!
//! which is odd and entire in `t`, satisfies `theta(t + 1) = -theta(t)` and
//! `theta(t + tau) = -q^(-1/2) e^(-2 pi i t) theta(t)`, and has
//! `theta'(0) = 2 pi q^(1/8) prod (1 - q^l)^3`.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use rand::Rng;

use crate::error::{Error, Result};

/// Bound on the first neglected product factor, `|q|^L e^{2 pi |Im t|}`.
pub const TAIL_BOUND: f64 = 1e-14;

/// Upper limit on the number of product factors chosen automatically.
pub const MAX_TERMS: usize = 200_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Truncation {
    /// Pick the number of factors per argument so the tail bound holds.
    Auto,
    /// Use exactly this many factors; evaluation fails if the tail bound does not hold.
    Fixed(usize),
}

/// Lattice parameter, Jacobi parameter, truncation and identity tolerance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalContext {
    pub tau: C64,
    pub z: C64,
    pub trunc: Truncation,
    pub tol: f64,
}

impl EvalContext {
    pub fn new(tau: C64, z: C64) -> Result<Self> {
        if tau.im.is_nan()
            || tau.im <= 0.0
            || !tau.re.is_finite()
            || !z.re.is_finite()
            || !z.im.is_finite()
        {
            return Err(Error::InvalidContext(format!(
                "need Im(tau) > 0, got tau = {tau}"
            )));
        }
        Ok(Self {
            tau,
            z,
            trunc: Truncation::Auto,
            tol: 1e-7,
        })
    }

    pub fn with_trunc(mut self, trunc: Truncation) -> Self {
        self.trunc = trunc;
        self
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_z(mut self, z: C64) -> Self {
        self.z = z;
        self
    }

    pub fn with_tau(self, tau: C64) -> Result<Self> {
        Ok(Self {
            tau,
            ..Self::new(tau, self.z)?
        }
        .with_trunc(self.trunc)
        .with_tol(self.tol))
    }

    pub fn q(&self) -> C64 {
        (C64::i() * 2.0 * PI * self.tau).exp()
    }

    /// `q^(1/8) = exp(pi i tau / 4)`.
    pub fn q_eighth(&self) -> C64 {
        (C64::i() * PI * self.tau / 4.0).exp()
    }

    /// Number of product factors needed at argument `t`.
    pub fn terms_for(&self, t: C64) -> Result<usize> {
        let decay = 2.0 * PI * self.tau.im;
        let growth = 2.0 * PI * t.im.abs();
        let needed = (growth - TAIL_BOUND.ln()) / decay;
        match self.trunc {
            Truncation::Auto => {
                if !needed.is_finite() || needed >= MAX_TERMS as f64 {
                    return Err(Error::TruncationInsufficient(format!(
                        "|Im t| = {} at Im tau = {} needs more than {MAX_TERMS} factors",
                        t.im.abs(),
                        self.tau.im
                    )));
                }
                Ok((needed.floor() as usize + 1).max(1))
            }
            Truncation::Fixed(l) => {
                if t.im.abs() >= l as f64 * self.tau.im || (l as f64) <= needed {
                    return Err(Error::TruncationInsufficient(format!(
                        "L = {l} at |Im t| = {}, Im tau = {} (need L > {needed:.1})",
                        t.im.abs(),
                        self.tau.im
                    )));
                }
                Ok(l)
            }
        }
    }

    fn pole_threshold(&self) -> f64 {
        self.tol * self.q_eighth().norm()
    }
}

/// An element of SL(2, Z).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SL2Matrix {
    pub a: i64,
    pub b: i64,
    pub c: i64,
    pub d: i64,
}

impl SL2Matrix {
    pub const IDENTITY: Self = Self {
        a: 1,
        b: 0,
        c: 0,
        d: 1,
    };
    pub const S: Self = Self {
        a: 0,
        b: -1,
        c: 1,
        d: 0,
    };
    pub const T: Self = Self {
        a: 1,
        b: 1,
        c: 0,
        d: 1,
    };

    pub fn new(a: i64, b: i64, c: i64, d: i64) -> Result<Self> {
        if a * d - b * c != 1 {
            return Err(Error::InvalidInput(format!(
                "ad - bc = {} != 1",
                a * d - b * c
            )));
        }
        Ok(Self { a, b, c, d })
    }

    /// Uniform rejection sample among matrices with entries in `[-bound, bound]`.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, bound: i64) -> Self {
        loop {
            let [a, b, c, d] = [(); 4].map(|_| rng.gen_range(-bound..=bound));
            if a * d - b * c == 1 {
                return Self { a, b, c, d };
            }
        }
    }

    pub fn act(&self, tau: C64) -> C64 {
        (tau * self.a as f64 + self.b as f64) / (tau * self.c as f64 + self.d as f64)
    }

    pub fn automorphy(&self, tau: C64) -> C64 {
        tau * self.c as f64 + self.d as f64
    }
}

fn theta_terms(t: C64, ctx: &EvalContext, terms: usize) -> C64 {
    let q = ctx.q();
    let w = (C64::i() * 2.0 * PI * t).exp();
    let w_inv = (-C64::i() * 2.0 * PI * t).exp();
    let mut acc = ctx.q_eighth() * 2.0 * (t * PI).sin();
    let mut ql = C64::new(1.0, 0.0);
    for _ in 0..terms {
        ql *= q;
        acc *= (1.0 - ql) * (1.0 - ql * w) * (1.0 - ql * w_inv);
    }
    acc
}

/// The Jacobi theta function at `t` for the lattice parameter of `ctx`.
pub fn theta(t: C64, ctx: &EvalContext) -> Result<C64> {
    let terms = ctx.terms_for(t)?;
    Ok(theta_terms(t, ctx, terms))
}

/// `theta'(0) = 2 pi q^(1/8) prod (1 - q^l)^3`.
pub fn theta_prime_zero(ctx: &EvalContext) -> Result<C64> {
    let terms = ctx.terms_for(C64::new(0.0, 0.0))?;
    let q = ctx.q();
    let mut ql = C64::new(1.0, 0.0);
    let mut acc = ctx.q_eighth() * 2.0 * PI;
    for _ in 0..terms {
        ql *= q;
        acc *= (1.0 - ql).powu(3);
    }
    Ok(acc)
}

fn nonzero_theta(t: C64, ctx: &EvalContext, what: &str) -> Result<C64> {
    let v = theta(t, ctx)?;
    if v.norm() < ctx.pole_threshold() {
        return Err(Error::Pole(format!("theta({what} = {t}) vanishes")));
    }
    Ok(v)
}

/// `theta(x + c z) / (theta(x) theta(c z))`.
pub fn phi(x: C64, c: f64, ctx: &EvalContext) -> Result<C64> {
    let cz = ctx.z * c;
    let den = nonzero_theta(x, ctx, "x")? * nonzero_theta(cz, ctx, "cz")?;
    Ok(theta(x + cz, ctx)? / den)
}

/// Shifted factor for a divisor with coefficient `coeff` on which `g` and `h`
/// act by `e^{2 pi i eps_g}` and `e^{2 pi i eps_h}`:
/// `phi(x + eps_g - eps_h tau, coeff - 1) e^{2 pi i (1 - coeff) eps_h z}`.
pub fn orb_factor(x: C64, eps_g: f64, eps_h: f64, coeff: f64, ctx: &EvalContext) -> Result<C64> {
    if coeff == 1.0 {
        return Err(Error::InvalidInput(
            "divisor coefficient 1 is not allowed".into(),
        ));
    }
    let shifted = x + eps_g - ctx.tau * eps_h;
    let phase = (C64::i() * 2.0 * PI * (1.0 - coeff) * eps_h * ctx.z).exp();
    Ok(phi(shifted, coeff - 1.0, ctx)? * phase)
}

/// Relative residual of the modular transformation law
/// `theta(t/(c tau + d), g tau) = zeta (c tau + d)^(1/2) e^{pi i c t^2/(c tau + d)} theta(t, tau)`,
/// minimised over the eighth roots of unity `zeta`. Also returns the winning
/// root as `k` with `zeta = e^{2 pi i k / 8}`.
pub fn modular_residual_detail(g: &SL2Matrix, t: C64, ctx: &EvalContext) -> Result<(f64, usize)> {
    let j = g.automorphy(ctx.tau);
    if j.norm() == 0.0 {
        return Err(Error::InvalidInput("c tau + d = 0".into()));
    }
    let moved = ctx.with_tau(g.act(ctx.tau))?;
    let lhs = theta(t / j, &moved)?;
    let base = theta(t, ctx)?;
    let rhs = j.sqrt() * (C64::i() * PI * g.c as f64 * t * t / j).exp() * base;
    let scale = base.norm();
    let (k, r) = (0..8)
        .map(|k| {
            let zeta = C64::from_polar(1.0, PI * k as f64 / 4.0);
            (k, (lhs - zeta * rhs).norm() / scale)
        })
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("eight candidates");
    Ok((r, k))
}

pub fn modular_residual(g: &SL2Matrix, t: C64, ctx: &EvalContext) -> Result<f64> {
    modular_residual_detail(g, t, ctx).map(|(r, _)| r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn ctx(tau: C64, z: C64) -> EvalContext {
        EvalContext::new(tau, z).unwrap()
    }

    /// Triple-product sum form, `-i sum_n (-1)^n q^{(n+1/2)^2/2} e^{(2n+1) pi i t}`.
    fn theta_sum_oracle(t: C64, tau: C64) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for n in -60i64..=60 {
            let m = n as f64 + 0.5;
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            acc += sign * (C64::i() * PI * tau * m * m + C64::i() * PI * (2.0 * m) * t).exp();
        }
        -C64::i() * acc
    }

    #[test]
    fn vanishes_at_origin() {
        let e = ctx(c(0.0, 1.0), c(0.2, 0.0));
        assert_eq!(theta(c(0.0, 0.0), &e).unwrap(), c(0.0, 0.0));
    }

    #[test]
    fn odd() {
        let e = ctx(c(0.0, 1.0), c(0.2, 0.0));
        let t = c(0.3, 0.1);
        let d = theta(-t, &e).unwrap() + theta(t, &e).unwrap();
        assert!(d.norm() < 1e-12, "{d}");
    }

    #[test]
    fn product_matches_sum_oracle() {
        let tau = c(0.1, 0.8);
        let e = ctx(tau, c(0.2, 0.0));
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let t = c(rng.gen_range(-1.0..1.0), rng.gen_range(-0.5..0.5));
            let a = theta(t, &e).unwrap();
            let b = theta_sum_oracle(t, tau);
            assert!(
                (a - b).norm() < 1e-10 * b.norm().max(1.0),
                "{t}: {a} vs {b}"
            );
        }
    }

    #[test]
    fn periodicity_and_quasi_periodicity() {
        let tau = c(0.1, 0.8);
        let e = ctx(tau, c(0.2, 0.0));
        let q = e.q();
        for t in [c(0.31, 0.07), c(-0.4, 0.2), c(0.05, -0.3)] {
            let th = theta(t, &e).unwrap();
            assert!((theta(t + 1.0, &e).unwrap() + th).norm() < 1e-12 * th.norm().max(1.0));
            let expect = -th / q.sqrt() * (-C64::i() * 2.0 * PI * t).exp();
            let got = theta(t + tau, &e).unwrap();
            assert!(
                (got - expect).norm() < 1e-10 * expect.norm().max(1.0),
                "{got} vs {expect}"
            );
        }
    }

    #[test]
    fn prime_zero_small_q_limit() {
        for k in [4, 8, 12] {
            let tau = c(0.0, k as f64 * 10f64.ln() / (2.0 * PI));
            let e = ctx(tau, c(0.2, 0.0));
            let r = theta_prime_zero(&e).unwrap() / e.q_eighth();
            assert!(
                (r - 2.0 * PI).norm() < 10f64.powi(-k + 2),
                "q = 1e-{k}: {r}"
            );
        }
    }

    #[test]
    fn prime_zero_matches_central_difference() {
        let e = ctx(c(0.0, 1.0), c(0.2, 0.0)).with_trunc(Truncation::Fixed(60));
        let h = 1e-5;
        let fd = (theta(c(h, 0.0), &e).unwrap() - theta(c(-h, 0.0), &e).unwrap()) / (2.0 * h);
        let start = std::time::Instant::now();
        let exact = theta_prime_zero(&e).unwrap();
        assert!(start.elapsed().as_secs_f64() < 1e-3);
        assert!((fd - exact).norm() < 1e-8, "{fd} vs {exact}");
    }

    #[test]
    fn fixed_truncation_guard() {
        let e = ctx(c(0.0, 1.0), c(0.2, 0.0)).with_trunc(Truncation::Fixed(3));
        assert!(matches!(
            theta(c(0.1, 3.5), &e),
            Err(Error::TruncationInsufficient(_))
        ));
        assert!(matches!(
            theta(c(0.1, 0.0), &e),
            Err(Error::TruncationInsufficient(_))
        ));
        let e = e.with_trunc(Truncation::Fixed(10));
        assert!(theta(c(0.1, 0.0), &e).is_ok());
    }

    #[test]
    fn phi_symmetric_in_its_two_arguments() {
        let e = ctx(c(0.0, 1.0), c(0.17, 0.02));
        let x = c(0.23, 0.04);
        let cval = -2.0;
        let a = phi(x, cval, &e).unwrap();
        let swapped = e.with_z(x / cval);
        let b = phi(e.z * cval, cval, &swapped).unwrap();
        assert!((a - b).norm() < 1e-12 * a.norm().max(1.0));
    }

    #[test]
    fn two_cone_addition() {
        // star subdivision of the standard 2-cone with ray values (a1, a2)
        let e = ctx(c(0.0, 1.0), c(0.17, 0.0));
        let (a1, a2) = (-1.0, -2.0);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            let u1 = c(rng.gen_range(0.0..1.0), rng.gen_range(-0.1..0.1));
            let u2 = c(rng.gen_range(0.0..1.0), rng.gen_range(-0.1..0.1));
            let lhs = phi(u1 - u2, a1, &e).unwrap() * phi(u2, a1 + a2, &e).unwrap()
                + phi(u1, a1 + a2, &e).unwrap() * phi(u2 - u1, a2, &e).unwrap();
            let rhs = phi(u1, a1, &e).unwrap() * phi(u2, a2, &e).unwrap();
            assert!((lhs - rhs).norm() < 1e-9 * rhs.norm().max(1.0));
        }
    }

    #[test]
    fn phi_small_q_sine_ratio() {
        let x = c(0.21, 0.03);
        let cval = -1.5;
        let mut prev = f64::INFINITY;
        for k in [2, 4, 6, 8] {
            let tau = c(0.0, k as f64 * 10f64.ln() / (2.0 * PI));
            let e = ctx(tau, c(0.13, 0.0));
            let cz = e.z * cval;
            let r =
                phi(x, cval, &e).unwrap() * e.q_eighth() * 2.0 * (x * PI).sin() * (cz * PI).sin()
                    / ((x + cz) * PI).sin();
            let dev = (r - 1.0).norm();
            assert!(dev < prev);
            prev = dev;
        }
        assert!(prev < 1e-6);
    }

    #[test]
    fn orb_factor_reductions_and_shifts() {
        let e = ctx(c(0.0, 1.0), c(0.21, 0.03));
        let x = c(0.31, 0.02);
        assert_eq!(
            orb_factor(x, 0.0, 0.0, 0.5, &e).unwrap(),
            phi(x, -0.5, &e).unwrap()
        );
        let base = orb_factor(x, 0.25, 0.5, 0.0, &e).unwrap();
        let g1 = orb_factor(x, 1.25, 0.5, 0.0, &e).unwrap();
        assert!((g1 - base).norm() < 1e-12 * base.norm().max(1.0));
        let h1 = orb_factor(x, 0.25, 1.5, 0.0, &e).unwrap();
        assert!((h1 - base).norm() < 1e-10 * base.norm().max(1.0));
        let d = orb_factor(x, 0.25, 0.5, -1.0, &e).unwrap();
        let dh = orb_factor(x, 0.25, 1.5, -1.0, &e).unwrap();
        assert!((dh - d).norm() < 1e-10 * d.norm().max(1.0));
        assert!(orb_factor(x, 0.0, 0.0, 1.0, &e).is_err());
    }

    #[test]
    fn pole_detected() {
        let e = ctx(c(0.0, 1.0), c(0.21, 0.0));
        assert!(matches!(phi(c(1.0, 0.0), -1.0, &e), Err(Error::Pole(_))));
        assert!(matches!(phi(c(0.3, 0.0), 0.0, &e), Err(Error::Pole(_))));
    }

    #[test]
    fn modular_identity_t_and_s() {
        let e = ctx(c(0.0, 1.0), c(0.2, 0.0));
        let t = c(0.2, 0.1);
        assert_eq!(modular_residual(&SL2Matrix::IDENTITY, t, &e).unwrap(), 0.0);
        let (r, k) = modular_residual_detail(&SL2Matrix::T, c(0.37, -0.05), &e).unwrap();
        assert!(r < 1e-9);
        assert_eq!(k, 1);
        assert!(modular_residual(&SL2Matrix::S, t, &e).unwrap() < 1e-8);
    }

    #[test]
    fn modular_random_matrices() {
        let e = ctx(c(0.0, 1.0), c(0.2, 0.0));
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..5 {
            let g = SL2Matrix::random(&mut rng, 5);
            let t = c(rng.gen_range(-0.5..0.5), rng.gen_range(-0.2..0.2));
            let r = modular_residual(&g, t, &e).unwrap();
            assert!(r < 1e-8, "{g:?}: {r}");
        }
    }

    #[test]
    fn rejects_lower_half_plane() {
        assert!(EvalContext::new(c(0.0, -1.0), c(0.1, 0.0)).is_err());
        assert!(SL2Matrix::new(1, 1, 1, 1).is_err());
    }
}
