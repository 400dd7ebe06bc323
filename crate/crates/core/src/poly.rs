//! Sparse multivariate polynomials with exact rational coefficients.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::rational::{self, int, Rational};

/// Exponent vectors map to nonzero coefficients. `BTreeMap` order on the
/// exponent vectors is lexicographic, so the last entry is the lex-leading term.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Poly {
    nvars: usize,
    terms: BTreeMap<Vec<u32>, Rational>,
}

impl Poly {
    pub fn zero(nvars: usize) -> Self {
        Self {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: Rational) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(vec![0; nvars], c);
        p
    }

    pub fn one(nvars: usize) -> Self {
        Self::constant(nvars, Rational::one())
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        let mut p = Self::zero(nvars);
        p.add_term(e, Rational::one());
        p
    }

    /// `sum_i coeffs[i] u_i`.
    pub fn linear(coeffs: &[Rational]) -> Self {
        let n = coeffs.len();
        let mut p = Self::zero(n);
        for (i, c) in coeffs.iter().enumerate() {
            let mut e = vec![0; n];
            e[i] = 1;
            p.add_term(e, c.clone());
        }
        p
    }

    pub fn linear_int(coeffs: &[i64]) -> Self {
        Self::linear(&coeffs.iter().map(|&c| int(c)).collect::<Vec<_>>())
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &Rational)> {
        self.terms.iter()
    }

    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).max()
    }

    pub fn as_constant(&self) -> Option<Rational> {
        match self.terms.len() {
            0 => Some(Rational::zero()),
            1 => self.terms.get(&vec![0; self.nvars]).cloned(),
            _ => None,
        }
    }

    fn add_term(&mut self, e: Vec<u32>, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(e) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn scale(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return Self::zero(self.nvars);
        }
        Self {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(e, v)| (e.clone(), v * c)).collect(),
        }
    }

    pub fn pow(&self, k: u32) -> Self {
        (0..k).fold(Self::one(self.nvars), |acc, _| &acc * self)
    }

    pub fn eval(&self, point: &[Rational]) -> Rational {
        self.terms
            .iter()
            .map(|(e, c)| {
                e.iter().zip(point).fold(c.clone(), |acc, (&k, x)| {
                    acc * num_traits::pow(x.clone(), k as usize)
                })
            })
            .sum()
    }

    /// Replaces variable `i` by `images[i]`; all images share one variable count.
    pub fn substitute(&self, images: &[Poly]) -> Poly {
        assert_eq!(images.len(), self.nvars, "one image per variable");
        let m = images.first().map_or(0, |p| p.nvars);
        let mut powers: Vec<Vec<Poly>> = images
            .iter()
            .map(|p| vec![Poly::one(m), p.clone()])
            .collect();
        let mut out = Poly::zero(m);
        for (e, c) in &self.terms {
            let mut term = Poly::constant(m, c.clone());
            for (i, &k) in e.iter().enumerate() {
                while powers[i].len() <= k as usize {
                    let next = powers[i].last().unwrap() * &images[i];
                    powers[i].push(next);
                }
                term = &term * &powers[i][k as usize];
            }
            out = &out + &term;
        }
        out
    }

    /// Substitutes `u_i = sum_j rows[i][j] w_j`.
    pub fn substitute_linear(&self, rows: &[Vec<Rational>]) -> Poly {
        let images: Vec<Poly> = rows.iter().map(|r| Poly::linear(r)).collect();
        self.substitute(&images)
    }

    fn leading(&self) -> Option<(&Vec<u32>, &Rational)> {
        self.terms.iter().next_back()
    }

    /// Exact quotient `self / d`, or `None` if `d` does not divide `self`.
    pub fn div_exact(&self, d: &Poly) -> Option<Poly> {
        let (de, dc) = d.leading()?;
        let (de, dc) = (de.clone(), dc.clone());
        let mut rem = self.clone();
        let mut quot = Poly::zero(self.nvars);
        while let Some((re, rc)) = rem.leading() {
            if re.iter().zip(&de).any(|(a, b)| a < b) {
                return None;
            }
            let e: Vec<u32> = re.iter().zip(&de).map(|(a, b)| a - b).collect();
            let c = rc / &dc;
            let mut mono = Poly::zero(self.nvars);
            mono.add_term(e, c);
            rem = &rem - &(&mono * d);
            quot = &quot + &mono;
        }
        Some(quot)
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        assert_eq!(self.nvars, rhs.nvars);
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        self + &(-rhs)
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(e, c)| (e.clone(), -c)).collect(),
        }
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        assert_eq!(self.nvars, rhs.nvars);
        let mut acc: BTreeMap<Vec<u32>, Rational> = BTreeMap::new();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &rhs.terms {
                let e: Vec<u32> = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                *acc.entry(e).or_insert_with(Rational::zero) += ca * cb;
            }
        }
        acc.retain(|_, c| !c.is_zero());
        Poly {
            nvars: self.nvars,
            terms: acc,
        }
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in self.terms.iter().rev() {
            let mono: Vec<String> = e
                .iter()
                .enumerate()
                .filter(|(_, &k)| k > 0)
                .map(|(i, &k)| {
                    if k == 1 {
                        format!("u{}", i + 1)
                    } else {
                        format!("u{}^{k}", i + 1)
                    }
                })
                .collect();
            let neg = c < &Rational::zero();
            let mag = if neg { -c } else { c.clone() };
            if first {
                write!(f, "{}", if neg { "-" } else { "" })?;
            } else {
                write!(f, " {} ", if neg { "-" } else { "+" })?;
            }
            first = false;
            match (mono.is_empty(), mag.is_one()) {
                (true, _) => write!(f, "{}", rational::format(&mag))?,
                (false, true) => write!(f, "{}", mono.join("*"))?,
                (false, false) => write!(f, "{}*{}", rational::format(&mag), mono.join("*"))?,
            }
        }
        Ok(())
    }
}

/// A quotient of polynomials with a nonzero denominator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalFunctionValue {
    pub numerator: Poly,
    pub denominator: Poly,
}

impl RationalFunctionValue {
    pub fn new(numerator: Poly, denominator: Poly) -> Result<Self> {
        if denominator.is_zero() {
            return Err(Error::InvalidInput("zero denominator".into()));
        }
        Ok(Self {
            numerator,
            denominator,
        })
    }

    pub fn from_poly(p: Poly) -> Self {
        let n = p.nvars();
        Self {
            numerator: p,
            denominator: Poly::one(n),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            numerator: &(&self.numerator * &other.denominator)
                + &(&other.numerator * &self.denominator),
            denominator: &self.denominator * &other.denominator,
        }
    }

    /// `None` when the denominator vanishes at `point`.
    pub fn eval(&self, point: &[Rational]) -> Option<Rational> {
        let d = self.denominator.eval(point);
        (!d.is_zero()).then(|| self.numerator.eval(point) / d)
    }

    /// The polynomial this function equals, if the denominator divides exactly.
    pub fn to_polynomial(&self) -> Option<Poly> {
        self.numerator.div_exact(&self.denominator)
    }
}
