//! Sparse multivariate polynomials over big rationals.
//!
//! The variable universe is fixed and globally ordered (n < k < z < t < c < a
//! < sigma); monomials are compared in graded lexicographic order so equal
//! polynomials always have identical representations.

use super::{Int, Rat};
use num::traits::{One, Signed, Zero};
use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

pub const NVARS: usize = 7;

/// A variable from the fixed universe. The declaration order is the global
/// term order used everywhere.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Var {
    N,
    K,
    Z,
    T,
    C,
    A,
    Sigma,
}

impl Var {
    pub const ALL: [Var; NVARS] = [Var::N, Var::K, Var::Z, Var::T, Var::C, Var::A, Var::Sigma];

    pub fn index(self) -> usize {
        match self {
            Var::N => 0,
            Var::K => 1,
            Var::Z => 2,
            Var::T => 3,
            Var::C => 4,
            Var::A => 5,
            Var::Sigma => 6,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Var::N => "n",
            Var::K => "k",
            Var::Z => "z",
            Var::T => "t",
            Var::C => "c",
            Var::A => "a",
            Var::Sigma => "sigma",
        }
    }

    pub fn from_name(s: &str) -> Option<Var> {
        Var::ALL.iter().copied().find(|v| v.name() == s)
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Exponent vector over the fixed variable universe.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Expos(pub [u16; NVARS]);

impl Expos {
    pub fn zero() -> Self {
        Expos([0; NVARS])
    }

    pub fn total_degree(&self) -> u32 {
        self.0.iter().map(|&e| e as u32).sum()
    }

    fn mul(&self, other: &Expos) -> Expos {
        let mut out = [0u16; NVARS];
        for i in 0..NVARS {
            out[i] = self.0[i].checked_add(other.0[i]).expect("exponent overflow");
        }
        Expos(out)
    }
}

impl Ord for Expos {
    fn cmp(&self, other: &Self) -> Ordering {
        // Graded lexicographic: total degree first, then lexicographic with
        // earlier variables more significant.
        match self.total_degree().cmp(&other.total_degree()) {
            Ordering::Equal => self.0.cmp(&other.0),
            ord => ord,
        }
    }
}

impl PartialOrd for Expos {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Sparse multivariate polynomial; no zero coefficients are stored.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct MultiPoly {
    terms: BTreeMap<Expos, Rat>,
}

impl MultiPoly {
    pub fn zero() -> Self {
        MultiPoly { terms: BTreeMap::new() }
    }

    pub fn one() -> Self {
        MultiPoly::constant(Rat::one())
    }

    pub fn constant(c: Rat) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(Expos::zero(), c);
        }
        MultiPoly { terms }
    }

    pub fn int(c: i64) -> Self {
        MultiPoly::constant(Rat::from(Int::from(c)))
    }

    pub fn var(v: Var) -> Self {
        let mut e = Expos::zero();
        e.0[v.index()] = 1;
        let mut terms = BTreeMap::new();
        terms.insert(e, Rat::one());
        MultiPoly { terms }
    }

    /// x_v^e
    pub fn var_pow(v: Var, e: u16) -> Self {
        let mut ex = Expos::zero();
        ex.0[v.index()] = e;
        let mut terms = BTreeMap::new();
        terms.insert(ex, Rat::one());
        MultiPoly { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.as_constant().map(|c| c.is_one()).unwrap_or(false)
    }

    pub fn is_constant(&self) -> bool {
        self.terms.is_empty() || (self.terms.len() == 1 && self.terms.contains_key(&Expos::zero()))
    }

    pub fn as_constant(&self) -> Option<Rat> {
        if self.terms.is_empty() {
            return Some(Rat::zero());
        }
        if self.terms.len() == 1 {
            if let Some(c) = self.terms.get(&Expos::zero()) {
                return Some(c.clone());
            }
        }
        None
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Expos, &Rat)> {
        self.terms.iter()
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(|e| e.total_degree()).max().unwrap_or(0)
    }

    pub fn degree_in(&self, v: Var) -> u16 {
        self.terms.keys().map(|e| e.0[v.index()]).max().unwrap_or(0)
    }

    pub fn uses_var(&self, v: Var) -> bool {
        self.terms.keys().any(|e| e.0[v.index()] > 0)
    }

    pub fn vars_used(&self) -> Vec<Var> {
        Var::ALL.iter().copied().filter(|&v| self.uses_var(v)).collect()
    }

    /// Leading term under the graded-lexicographic order.
    pub fn leading(&self) -> Option<(&Expos, &Rat)> {
        self.terms.iter().next_back()
    }

    pub fn leading_coeff(&self) -> Rat {
        self.leading().map(|(_, c)| c.clone()).unwrap_or_else(Rat::zero)
    }

    fn insert_term(&mut self, e: Expos, c: Rat) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(e) {
            Entry::Vacant(slot) => {
                slot.insert(c);
            }
            Entry::Occupied(mut slot) => {
                *slot.get_mut() += c;
                if slot.get().is_zero() {
                    slot.remove();
                }
            }
        }
    }

    pub fn map_coeffs(&self, f: impl Fn(&Rat) -> Rat) -> MultiPoly {
        let mut out = MultiPoly::zero();
        for (e, c) in &self.terms {
            out.insert_term(*e, f(c));
        }
        out
    }

    pub fn scale(&self, c: &Rat) -> MultiPoly {
        if c.is_zero() {
            return MultiPoly::zero();
        }
        self.map_coeffs(|x| x * c)
    }

    pub fn pow(&self, mut e: u32) -> MultiPoly {
        let mut base = self.clone();
        let mut acc = MultiPoly::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Substitute a polynomial for a variable.
    pub fn subst(&self, v: Var, value: &MultiPoly) -> MultiPoly {
        let vi = v.index();
        // Group terms by exponent of v, then apply Horner over value powers.
        let mut by_exp: BTreeMap<u16, MultiPoly> = BTreeMap::new();
        for (e, c) in &self.terms {
            let mut rest = *e;
            let ev = rest.0[vi];
            rest.0[vi] = 0;
            by_exp.entry(ev).or_insert_with(MultiPoly::zero).insert_term(rest, c.clone());
        }
        let max = by_exp.keys().next_back().copied().unwrap_or(0);
        let mut acc = MultiPoly::zero();
        for ev in (0..=max).rev() {
            acc = &acc * value;
            if let Some(p) = by_exp.get(&ev) {
                acc = &acc + p;
            }
        }
        acc
    }

    /// Substitute v -> v + j.
    pub fn shift(&self, v: Var, j: i64) -> MultiPoly {
        if j == 0 || !self.uses_var(v) {
            return self.clone();
        }
        let val = &MultiPoly::var(v) + &MultiPoly::int(j);
        self.subst(v, &val)
    }

    pub fn derivative(&self, v: Var) -> MultiPoly {
        let vi = v.index();
        let mut out = MultiPoly::zero();
        for (e, c) in &self.terms {
            let ev = e.0[vi];
            if ev == 0 {
                continue;
            }
            let mut e2 = *e;
            e2.0[vi] = ev - 1;
            out.insert_term(e2, c * Rat::from(Int::from(ev as i64)));
        }
        out
    }

    /// Evaluate with a full assignment for every variable the polynomial uses.
    pub fn eval(&self, assign: &dyn Fn(Var) -> Rat) -> Rat {
        let mut acc = Rat::zero();
        for (e, c) in &self.terms {
            let mut term = c.clone();
            for v in Var::ALL {
                let ev = e.0[v.index()];
                if ev > 0 {
                    let x = assign(v);
                    let mut p = Rat::one();
                    for _ in 0..ev {
                        p *= x.clone();
                    }
                    term *= p;
                }
            }
            acc += term;
        }
        acc
    }

    /// View as a univariate polynomial in v with MultiPoly coefficients
    /// (ascending powers).
    pub fn to_univar(&self, v: Var) -> Vec<MultiPoly> {
        let vi = v.index();
        let deg = self.degree_in(v) as usize;
        let mut out = vec![MultiPoly::zero(); deg + 1];
        for (e, c) in &self.terms {
            let mut rest = *e;
            let ev = rest.0[vi] as usize;
            rest.0[vi] = 0;
            out[ev].insert_term(rest, c.clone());
        }
        out
    }

    pub fn from_univar(v: Var, coeffs: &[MultiPoly]) -> MultiPoly {
        let mut out = MultiPoly::zero();
        for (i, c) in coeffs.iter().enumerate() {
            let m = &MultiPoly::var_pow(v, i as u16) * c;
            out = &out + &m;
        }
        out
    }

    /// Positive rational content together with the sign of the leading
    /// coefficient: `self == content * primitive` where `primitive` has
    /// coprime integer coefficients and positive leading coefficient.
    pub fn content_decompose(&self) -> (Rat, MultiPoly) {
        if self.is_zero() {
            return (Rat::zero(), MultiPoly::zero());
        }
        let mut num_gcd = Int::zero();
        let mut den_lcm = Int::one();
        for c in self.terms.values() {
            num_gcd = num::integer::gcd(num_gcd.clone(), c.numer().abs());
            den_lcm = num::integer::lcm(den_lcm.clone(), c.denom().clone());
        }
        let mut content = Rat::new(num_gcd, den_lcm);
        if self.leading_coeff().is_negative() {
            content = -content;
        }
        let inv = content.recip();
        (content, self.map_coeffs(|c| c * &inv))
    }

    pub fn primitive_part(&self) -> MultiPoly {
        self.content_decompose().1
    }

    /// Exact division; panics if the division is not exact. Internal use only
    /// (content and gcd bookkeeping guarantee exactness at every call site).
    pub fn divexact(&self, d: &MultiPoly) -> MultiPoly {
        assert!(!d.is_zero(), "division by zero polynomial");
        if self.is_zero() {
            return MultiPoly::zero();
        }
        if let Some(c) = d.as_constant() {
            let inv = c.recip();
            return self.map_coeffs(|x| x * &inv);
        }
        let mut rem = self.clone();
        let mut quot = MultiPoly::zero();
        let (dlead_e, dlead_c) = {
            let (e, c) = d.leading().unwrap();
            (*e, c.clone())
        };
        while !rem.is_zero() {
            let (rlead_e, rlead_c) = {
                let (e, c) = rem.leading().unwrap();
                (*e, c.clone())
            };
            let mut q_e = [0u16; NVARS];
            for i in 0..NVARS {
                let (re, de) = (rlead_e.0[i], dlead_e.0[i]);
                assert!(re >= de, "inexact polynomial division");
                q_e[i] = re - de;
            }
            let q_c = rlead_c / dlead_c.clone();
            let mut mono = MultiPoly::zero();
            mono.insert_term(Expos(q_e), q_c);
            rem = &rem - &(&mono * d);
            quot = &quot + &mono;
        }
        quot
    }

    /// Pseudo-remainder of self by d, both viewed as univariate in v.
    fn prem(&self, d: &MultiPoly, v: Var) -> MultiPoly {
        let mut r = self.to_univar(v);
        let dd = d.to_univar(v);
        let db = dd.len() - 1;
        let lead = dd[db].clone();
        while r.len() >= dd.len() && !(r.len() == 1 && r[0].is_zero()) {
            let dr = r.len() - 1;
            if r[dr].is_zero() {
                r.pop();
                continue;
            }
            let shift = dr - db;
            let rl = r[dr].clone();
            for item in r.iter_mut() {
                *item = &*item * &lead;
            }
            for (i, di) in dd.iter().enumerate() {
                let idx = i + shift;
                r[idx] = &r[idx] - &(&rl * di);
            }
            while r.len() > 1 && r.last().unwrap().is_zero() {
                r.pop();
            }
            if r.len() == 1 && r[0].is_zero() {
                break;
            }
        }
        MultiPoly::from_univar(v, &r)
    }

    /// Content of self viewed as univariate in v: the gcd of its
    /// MultiPoly coefficients.
    fn content_wrt(&self, v: Var) -> MultiPoly {
        let coeffs = self.to_univar(v);
        let mut g = MultiPoly::zero();
        for c in coeffs.iter().filter(|c| !c.is_zero()) {
            g = gcd(&g, c);
            if g.is_one() {
                break;
            }
        }
        g
    }
}

/// Polynomial gcd over Q, returned integer-primitive with positive leading
/// coefficient (the constant polynomial 1 for coprime inputs). Recursive
/// primitive PRS on the first variable present.
pub fn gcd(a: &MultiPoly, b: &MultiPoly) -> MultiPoly {
    if a.is_zero() {
        return b.primitive_part();
    }
    if b.is_zero() {
        return a.primitive_part();
    }
    let a = a.primitive_part();
    let b = b.primitive_part();
    if a.is_constant() || b.is_constant() {
        return MultiPoly::one();
    }
    let v = Var::ALL
        .iter()
        .copied()
        .find(|&v| a.uses_var(v) || b.uses_var(v))
        .expect("nonconstant polynomial uses a variable");
    if !a.uses_var(v) || !b.uses_var(v) {
        // One input is free of the main variable: gcd divides the other's
        // content with respect to v.
        let (free, other) = if a.uses_var(v) { (b, a) } else { (a, b) };
        return gcd(&free, &other.content_wrt(v));
    }
    let ca = a.content_wrt(v);
    let cb = b.content_wrt(v);
    let gc = gcd(&ca, &cb);
    let pa = a.divexact(&ca);
    let pb = b.divexact(&cb);
    let (mut f, mut g) = if pa.degree_in(v) >= pb.degree_in(v) { (pa, pb) } else { (pb, pa) };
    loop {
        let r = f.prem(&g, v);
        if r.is_zero() {
            break;
        }
        if r.degree_in(v) == 0 {
            // Coprime as univariate polynomials in v.
            return gc;
        }
        f = g;
        g = r.divexact(&r.content_wrt(v)).primitive_part();
    }
    (&gc * &g.divexact(&g.content_wrt(v))).primitive_part()
}

impl Add for &MultiPoly {
    type Output = MultiPoly;
    fn add(self, rhs: &MultiPoly) -> MultiPoly {
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.insert_term(*e, c.clone());
        }
        out
    }
}

impl Sub for &MultiPoly {
    type Output = MultiPoly;
    fn sub(self, rhs: &MultiPoly) -> MultiPoly {
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.insert_term(*e, -c.clone());
        }
        out
    }
}

impl Mul for &MultiPoly {
    type Output = MultiPoly;
    fn mul(self, rhs: &MultiPoly) -> MultiPoly {
        let mut out = MultiPoly::zero();
        for (e1, c1) in &self.terms {
            for (e2, c2) in &rhs.terms {
                out.insert_term(e1.mul(e2), c1 * c2);
            }
        }
        out
    }
}

impl Neg for &MultiPoly {
    type Output = MultiPoly;
    fn neg(self) -> MultiPoly {
        self.map_coeffs(|c| -c.clone())
    }
}

fn render_rat(c: &Rat) -> String {
    if c.denom().is_one() {
        c.numer().to_string()
    } else {
        format!("{}/{}", c.numer(), c.denom())
    }
}

impl fmt::Display for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        // Descending graded-lex order.
        for (idx, (e, c)) in self.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            let cabs = if neg { -c.clone() } else { c.clone() };
            if idx == 0 {
                if neg {
                    f.write_str("-")?;
                }
            } else if neg {
                f.write_str(" - ")?;
            } else {
                f.write_str(" + ")?;
            }
            let mut parts: Vec<String> = Vec::new();
            if !cabs.is_one() || e.total_degree() == 0 {
                parts.push(render_rat(&cabs));
            }
            for v in Var::ALL {
                let ev = e.0[v.index()];
                if ev == 1 {
                    parts.push(v.name().to_string());
                } else if ev > 1 {
                    parts.push(format!("{}^{}", v.name(), ev));
                }
            }
            f.write_str(&parts.join("*"))?;
        }
        Ok(())
    }
}

impl fmt::Debug for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MultiPoly({})", self)
    }
}
