//! Piecewise polynomial functions on a fan and their pushforward along fan
//! morphisms.
//!
//! An element stores one polynomial per maximal cone, in the dual coordinates
//! of the fan's lattice. The pushforward along `nu` is
//!
//! ```text
//! (nu_* f)_C = d * sum_{C_i -> C} f_{C_i} * prod_j x^C_j / prod_j x^{C_i}_j
//! ```
//!
//! computed as an exact rational function and then required to cancel to a
//! polynomial.

use num_traits::{One, Zero};
use rand::Rng;

use crate::error::{Error, Result};
use crate::fan::{Fan, FanMorphism};
use crate::lattice::{self, IntMatrix};
use crate::poly::{Poly, RationalFunctionValue};
use crate::rational::{int, Rational};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PiecewisePoly {
    fan: Fan,
    pieces: Vec<Poly>,
}

impl PiecewisePoly {
    /// Checked constructor: one piece per maximal cone, agreeing on shared faces.
    pub fn new(fan: Fan, pieces: Vec<Poly>) -> Result<Self> {
        if pieces.len() != fan.num_max_cones() || pieces.iter().any(|p| p.nvars() != fan.dim) {
            return Err(Error::InvalidInput(
                "one polynomial in dim variables per maximal cone".into(),
            ));
        }
        let f = Self { fan, pieces };
        if let Some((i, j)) = f.incompatible_pairs().first() {
            return Err(Error::InvalidInput(format!(
                "pieces on cones {i} and {j} disagree on their shared face"
            )));
        }
        Ok(f)
    }

    /// The same polynomial on every cone.
    pub fn global(fan: &Fan, p: Poly) -> Self {
        Self {
            pieces: vec![p; fan.num_max_cones()],
            fan: fan.clone(),
        }
    }

    pub fn constant(fan: &Fan, c: Rational) -> Self {
        Self::global(fan, Poly::constant(fan.dim, c))
    }

    pub fn one(fan: &Fan) -> Self {
        Self::constant(fan, Rational::one())
    }

    pub fn zero(fan: &Fan) -> Self {
        Self::constant(fan, Rational::zero())
    }

    pub fn fan(&self) -> &Fan {
        &self.fan
    }

    pub fn pieces(&self) -> &[Poly] {
        &self.pieces
    }

    pub fn piece(&self, k: usize) -> &Poly {
        &self.pieces[k]
    }

    /// The piecewise linear function taking value `coeffs[i]` on ray `i`.
    pub fn from_ray_coefficients(fan: &Fan, coeffs: &[Rational]) -> Result<Self> {
        if coeffs.len() != fan.num_rays() {
            return Err(Error::InvalidInput(format!(
                "{} coefficients for {} rays",
                coeffs.len(),
                fan.num_rays()
            )));
        }
        let pieces = fan
            .dual_frames()?
            .iter()
            .map(|frame| {
                fan.max_cones[frame.cone]
                    .iter()
                    .zip(&frame.forms)
                    .fold(Poly::zero(fan.dim), |acc, (&r, form)| {
                        &acc + &Poly::linear_int(form).scale(&coeffs[r])
                    })
            })
            .collect();
        Ok(Self {
            fan: fan.clone(),
            pieces,
        })
    }

    /// `f^C`: the product of the dual forms of the rays of `cone` on every
    /// maximal cone containing it, zero elsewhere.
    pub fn thom_basis_element(fan: &Fan, cone: &[usize]) -> Result<Self> {
        if !fan.has_cone(cone) {
            return Err(Error::ConeNotFound(cone.to_vec()));
        }
        let pieces = fan
            .dual_frames()?
            .iter()
            .map(|frame| {
                if !cone.iter().all(|r| fan.max_cones[frame.cone].contains(r)) {
                    return Poly::zero(fan.dim);
                }
                cone.iter().fold(Poly::one(fan.dim), |acc, &r| {
                    &acc * &Poly::linear_int(frame.form_for_ray(fan, r).expect("ray in cone"))
                })
            })
            .collect();
        Ok(Self {
            fan: fan.clone(),
            pieces,
        })
    }

    fn zip_with(&self, other: &Self, op: impl Fn(&Poly, &Poly) -> Poly) -> Result<Self> {
        if self.fan != other.fan {
            return Err(Error::InvalidInput(
                "piecewise functions live on different fans".into(),
            ));
        }
        let pieces = self
            .pieces
            .iter()
            .zip(&other.pieces)
            .map(|(a, b)| op(a, b))
            .collect();
        Ok(Self {
            fan: self.fan.clone(),
            pieces,
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a * b)
    }

    pub fn scale(&self, c: &Rational) -> Self {
        Self {
            fan: self.fan.clone(),
            pieces: self.pieces.iter().map(|p| p.scale(c)).collect(),
        }
    }

    /// Pairs of maximal cones whose pieces disagree on the shared face.
    /// Each piece is restricted to the face by the exact substitution
    /// `u = sum_{s in face} t_s r_s`.
    pub fn incompatible_pairs(&self) -> Vec<(usize, usize)> {
        let fan = &self.fan;
        let mut out = Vec::new();
        for i in 0..fan.num_max_cones() {
            for j in i + 1..fan.num_max_cones() {
                let shared: Vec<usize> = fan.max_cones[i]
                    .iter()
                    .copied()
                    .filter(|r| fan.max_cones[j].contains(r))
                    .collect();
                if shared.is_empty() {
                    // both pieces are evaluated only at the origin
                    if self.pieces[i].eval(&vec![Rational::zero(); fan.dim])
                        != self.pieces[j].eval(&vec![Rational::zero(); fan.dim])
                    {
                        out.push((i, j));
                    }
                    continue;
                }
                let rows: Vec<Vec<Rational>> = (0..fan.dim)
                    .map(|a| shared.iter().map(|&s| int(fan.rays[s][a])).collect())
                    .collect();
                if self.pieces[i].substitute_linear(&rows)
                    != self.pieces[j].substitute_linear(&rows)
                {
                    out.push((i, j));
                }
            }
        }
        out
    }

    pub fn is_compatible(&self) -> bool {
        self.incompatible_pairs().is_empty()
    }

    /// A random element of total degree at most `max_degree`: a combination of
    /// products of global coordinates and ray-indicator functions.
    pub fn random<R: Rng + ?Sized>(fan: &Fan, max_degree: u32, rng: &mut R) -> Result<Self> {
        let mut generators: Vec<Self> = (0..fan.dim)
            .map(|i| Self::global(fan, Poly::var(fan.dim, i)))
            .collect();
        for r in 0..fan.num_rays() {
            let coeffs: Vec<Rational> = (0..fan.num_rays())
                .map(|i| int(i64::from(i == r)))
                .collect();
            generators.push(Self::from_ray_coefficients(fan, &coeffs)?);
        }
        let mut acc = Self::constant(fan, int(rng.gen_range(-3..=3)));
        for _ in 0..4 {
            let deg = rng.gen_range(1..=max_degree.max(1));
            let mut term = Self::constant(fan, int(rng.gen_range(-4..=4)));
            for _ in 0..deg {
                term = term.mul(&generators[rng.gen_range(0..generators.len())])?;
            }
            acc = acc.add(&term)?;
        }
        Ok(acc)
    }
}

/// Splits an integer linear form into `scale * primitive`, with the first
/// nonzero entry of the primitive part positive.
fn normalize_form(form: &[i64]) -> (i64, Vec<i64>) {
    let g = lattice::gcd_all(form);
    let first = form.iter().copied().find(|&x| x != 0).unwrap_or(1);
    let s = if first < 0 { -g } else { g };
    (s, form.iter().map(|&x| x / s).collect())
}

fn product_of_forms(forms: &[Vec<i64>], nvars: usize) -> Poly {
    forms
        .iter()
        .fold(Poly::one(nvars), |acc, f| &acc * &Poly::linear_int(f))
}

fn rational_matrix(m: &IntMatrix) -> Vec<Vec<Rational>> {
    m.iter().map(|r| lattice::rational_row(r)).collect()
}

/// Deterministic evaluation points for the cheap identity guard.
fn guard_points(nvars: usize) -> Vec<Vec<Rational>> {
    let mut state: u64 = 0x9e37_79b9_7f4a_7c15;
    (0..3)
        .map(|_| {
            (0..nvars)
                .map(|_| {
                    state = state
                        .wrapping_mul(6364136223846793005)
                        .wrapping_add(1442695040888963407);
                    int(((state >> 33) % 997) as i64 - 498)
                })
                .collect()
        })
        .collect()
}

/// A source-cone term kept for the evaluation guard: numerator and its
/// linear denominator factors.
type GuardTerm = (Poly, Vec<Vec<i64>>);

/// Sum over source cones for target cone `k`, in source coordinates, as an
/// exact fraction over the lcm of the linear denominators.
fn pushforward_sum(
    morphism: &FanMorphism,
    f: &PiecewisePoly,
    k: usize,
) -> Result<(RationalFunctionValue, Vec<GuardTerm>)> {
    let n = morphism.source.dim;
    let target_frame = morphism.target.dual_frame(k)?;
    let pulled: Vec<Vec<i64>> = target_frame
        .forms
        .iter()
        .map(|x| lattice::row_mat(x, &morphism.lattice_map))
        .collect();
    let top = product_of_forms(&pulled, n);

    let mut terms = Vec::new();
    let mut lcm: Vec<(Vec<i64>, u32)> = Vec::new();
    for i in morphism.preimage(k) {
        let frame = morphism.source.dual_frame(i)?;
        let mut scale = 1i64;
        let mut counts: Vec<(Vec<i64>, u32)> = Vec::new();
        for form in &frame.forms {
            let (s, prim) = normalize_form(form);
            scale *= s;
            match counts.iter_mut().find(|(p, _)| *p == prim) {
                Some((_, c)) => *c += 1,
                None => counts.push((prim, 1)),
            }
        }
        for (prim, c) in &counts {
            match lcm.iter_mut().find(|(p, _)| p == prim) {
                Some((_, m)) => *m = (*m).max(*c),
                None => lcm.push((prim.clone(), *c)),
            }
        }
        let base =
            (&f.pieces[i] * &top).scale(&Rational::from_integer(morphism.multiplicity.into()));
        terms.push((base, scale, counts, frame.forms));
    }

    let mut numerator = Poly::zero(n);
    for (base, scale, counts, _) in &terms {
        let mut t = base.scale(&(Rational::one() / int(*scale)));
        for (prim, m) in &lcm {
            let have = counts
                .iter()
                .find(|(p, _)| p == prim)
                .map_or(0, |(_, c)| *c);
            t = &t * &Poly::linear_int(prim).pow(m - have);
        }
        numerator = &numerator + &t;
    }
    let denominator = lcm.iter().fold(Poly::one(n), |acc, (p, m)| {
        &acc * &Poly::linear_int(p).pow(*m)
    });
    let raw = terms
        .into_iter()
        .map(|(base, _, _, forms)| (base, forms))
        .collect();
    Ok((RationalFunctionValue::new(numerator, denominator)?, raw))
}

/// Exact pushforward of `f` along `morphism`.
pub fn pushforward(morphism: &FanMorphism, f: &PiecewisePoly) -> Result<PiecewisePoly> {
    if f.fan != morphism.source {
        return Err(Error::InvalidInput(
            "function does not live on the source fan".into(),
        ));
    }
    let n = morphism.source.dim;
    let back = if morphism.lattice_map == lattice::identity(n) {
        None
    } else {
        Some(
            lattice::rational_inverse(&morphism.lattice_map)
                .ok_or_else(|| Error::InvalidInput("singular lattice map".into()))?,
        )
    };
    let mut pieces = Vec::with_capacity(morphism.target.num_max_cones());
    for k in 0..morphism.target.num_max_cones() {
        let (sum, raw) = pushforward_sum(morphism, f, k)?;
        // divide out one linear factor at a time
        let mut quotient = sum.numerator.clone();
        let factors = linear_factors(&sum.denominator, morphism, k)?;
        for factor in &factors {
            quotient = quotient
                .div_exact(factor)
                .ok_or(Error::NonPolynomialResidue(k))?;
        }
        for point in guard_points(n) {
            let mut expected = Rational::zero();
            let mut degenerate = false;
            for (numer, forms) in &raw {
                let den = product_of_forms(forms, n).eval(&point);
                if den.is_zero() {
                    degenerate = true;
                    break;
                }
                expected += numer.eval(&point) / den;
            }
            if !degenerate && expected != quotient.eval(&point) {
                return Err(Error::NonPolynomialResidue(k));
            }
        }
        pieces.push(match &back {
            None => quotient,
            Some(inv) => quotient.substitute_linear(inv),
        });
    }
    let out = PiecewisePoly {
        fan: morphism.target.clone(),
        pieces,
    };
    if !out.is_compatible() {
        return Err(Error::NonPolynomialResidue(out.incompatible_pairs()[0].1));
    }
    Ok(out)
}

/// Recovers the primitive linear factors making up an lcm denominator.
fn linear_factors(den: &Poly, morphism: &FanMorphism, k: usize) -> Result<Vec<Poly>> {
    let n = morphism.source.dim;
    let mut factors: Vec<Poly> = Vec::new();
    let mut seen: Vec<Vec<i64>> = Vec::new();
    for i in morphism.preimage(k) {
        for form in morphism.source.dual_frame(i)?.forms {
            let (_, prim) = normalize_form(&form);
            if !seen.contains(&prim) {
                seen.push(prim);
            }
        }
    }
    let mut rest = den.clone();
    for prim in seen {
        let l = Poly::linear_int(&prim);
        while let Some(q) = rest.div_exact(&l) {
            factors.push(l.clone());
            rest = q;
            if rest.degree() == Some(0) {
                break;
            }
        }
    }
    debug_assert_eq!(rest, Poly::one(n));
    Ok(factors)
}

/// `g o nu`: each source cone receives the piece of its target cone.
pub fn pullback(morphism: &FanMorphism, g: &PiecewisePoly) -> Result<PiecewisePoly> {
    if g.fan != morphism.target {
        return Err(Error::InvalidInput(
            "function does not live on the target fan".into(),
        ));
    }
    let rows = rational_matrix(&morphism.lattice_map);
    let identity = morphism.lattice_map == lattice::identity(morphism.source.dim);
    let pieces = morphism
        .cone_assignment
        .iter()
        .map(|&k| {
            if identity {
                g.pieces[k].clone()
            } else {
                g.pieces[k].substitute_linear(&rows)
            }
        })
        .collect();
    Ok(PiecewisePoly {
        fan: morphism.source.clone(),
        pieces,
    })
}

/// Projection formula `nu_*(f * nu^* g) == nu_*(f) * g`, checked exactly.
pub fn projection_check(
    morphism: &FanMorphism,
    f: &PiecewisePoly,
    g: &PiecewisePoly,
) -> Result<bool> {
    let lhs = pushforward(morphism, &f.mul(&pullback(morphism, g)?)?)?;
    let rhs = pushforward(morphism, f)?.mul(g)?;
    Ok(lhs == rhs)
}
