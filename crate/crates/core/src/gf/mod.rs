//! Arithmetic in the tower F_p ⊆ F_q ⊆ F_{q^n}.
//!
//! Every element lives in the top field F_{q^n} and is addressed by a
//! compact [`Elem`] handle: the integer `sum(a_i p^i)` of its coefficient
//! vector over the prime field with respect to the polynomial basis of the
//! top modulus. Multiplication runs through discrete-log tables and addition
//! through a Zech logarithm table, so every basic operation is a handful of
//! table lookups. The tower is immutable once built and can be shared freely
//! between rayon workers.

mod poly;

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Largest field order for which the log tables are built.
pub const MAX_FIELD_ORDER: u64 = 1 << 20;

const NONE: u32 = u32::MAX;

/// Handle of an element of the top field.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Elem(pub(crate) u32);

impl Elem {
    pub const ZERO: Elem = Elem(0);
    pub const ONE: Elem = Elem(1);

    /// Raw integer encoding `sum(a_i p^i)`.
    pub fn code(self) -> u32 {
        self.0
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

/// Which level of the tower an element belongs to (the smallest one).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Level {
    Prime,
    Base,
    Top,
}

/// Quadratic character of an element of F_q.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SquareClass {
    Zero,
    Square,
    NonSquare,
}

/// Parameters of a tower, as written in the `p=3,e=1,n=2,mod=1,0,1` format.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModulusSpec {
    pub p: u32,
    pub e: u32,
    pub n: u32,
    /// Top modulus over F_p (degree e·n), coefficients low-to-high.
    pub top: Option<Vec<u32>>,
    /// Modulus of F_q over F_p (degree e), coefficients low-to-high.
    pub base: Option<Vec<u32>>,
}

impl ModulusSpec {
    pub fn new(p: u32, e: u32, n: u32) -> Self {
        ModulusSpec {
            p,
            e,
            n,
            top: None,
            base: None,
        }
    }

    /// `q = p^e`, `n = 2`: the setting of the PG(3,q²) geometry.
    pub fn for_q(q: u32) -> Result<Self> {
        let (p, e) = prime_power(q).ok_or(Error::NotPrimePower(q))?;
        Ok(ModulusSpec::new(p, e, 2))
    }
}

fn join_coeffs(c: &[u32]) -> String {
    c.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

impl fmt::Display for ModulusSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "p={},e={},n={}", self.p, self.e, self.n)?;
        if let Some(top) = &self.top {
            write!(f, ",mod={}", join_coeffs(top))?;
        }
        if let Some(base) = &self.base {
            write!(f, ",base={}", join_coeffs(base))?;
        }
        Ok(())
    }
}

impl FromStr for ModulusSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("bad modulus spec {s:?}"));
        let mut p = None;
        let mut e = None;
        let mut n = None;
        let mut top: Option<Vec<u32>> = None;
        let mut base: Option<Vec<u32>> = None;
        let mut current: Option<&str> = None;
        for tok in s.split(',').map(str::trim) {
            if let Some((key, val)) = tok.split_once('=') {
                current = Some(key);
                let v: u32 = val.parse().map_err(|_| bad())?;
                match key {
                    "p" => p = Some(v),
                    "e" => e = Some(v),
                    "n" => n = Some(v),
                    "mod" => top = Some(vec![v]),
                    "base" => base = Some(vec![v]),
                    _ => return Err(bad()),
                }
            } else {
                let v: u32 = tok.parse().map_err(|_| bad())?;
                match current {
                    Some("mod") => top.as_mut().ok_or_else(bad)?.push(v),
                    Some("base") => base.as_mut().ok_or_else(bad)?.push(v),
                    _ => return Err(bad()),
                }
            }
        }
        Ok(ModulusSpec {
            p: p.ok_or_else(bad)?,
            e: e.unwrap_or(1),
            n: n.unwrap_or(2),
            top,
            base,
        })
    }
}

pub(crate) fn is_prime(p: u32) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u32;
    while d * d <= p {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Splits `q = p^e` into `(p, e)`.
pub fn prime_power(q: u32) -> Option<(u32, u32)> {
    if q < 2 {
        return None;
    }
    let p = (2..=q).find(|d| q.is_multiple_of(*d))?;
    let mut rest = q;
    let mut e = 0;
    while rest.is_multiple_of(p) {
        rest /= p;
        e += 1;
    }
    (rest == 1).then_some((p, e))
}

/// The field tower F_p ⊆ F_q ⊆ F_{q^n} with table-driven arithmetic.
pub struct FieldTower {
    p: u32,
    e: u32,
    n: u32,
    q: u32,
    order: u32,
    degree: usize,
    top_modulus: Vec<u32>,
    base_modulus: Vec<u32>,
    base_root: Elem,
    primitive: Elem,
    exp: Vec<u32>,
    log: Vec<u32>,
    zech: Vec<u32>,
    neg: Vec<u32>,
    frob: Vec<u32>,
    base_elems: Vec<Elem>,
    fq_basis: Vec<Elem>,
    fq_dual: Vec<Elem>,
}

impl fmt::Debug for FieldTower {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FieldTower({})", self.spec())
    }
}

impl FieldTower {
    /// Builds the tower; moduli that are not given default to the smallest
    /// irreducible of the right degree.
    pub fn new(spec: &ModulusSpec) -> Result<Self> {
        let ModulusSpec { p, e, n, .. } = *spec;
        if !is_prime(p) {
            return Err(Error::CompositeCharacteristic(p));
        }
        if e == 0 || n == 0 {
            return Err(Error::Parse("extension degrees must be positive".into()));
        }
        let degree = (e * n) as usize;
        let order64 = (p as u64).checked_pow(degree as u32).unwrap_or(u64::MAX);
        if order64 > MAX_FIELD_ORDER {
            return Err(Error::FieldTooLarge(order64));
        }
        let order = order64 as u32;
        let q = p.pow(e);

        let top_modulus = match &spec.top {
            Some(m) => {
                let m = poly::trim(m.iter().map(|c| c % p).collect());
                if m.len() != degree + 1 || m[degree] != 1 || !poly::is_irreducible(&m, p) {
                    return Err(Error::ReducibleModulus(join_coeffs(&m)));
                }
                m
            }
            None => poly::smallest_irreducible(p, degree),
        };
        let base_modulus = match &spec.base {
            Some(m) => {
                let m = poly::trim(m.iter().map(|c| c % p).collect());
                if m.len() != e as usize + 1 || m[e as usize] != 1 || !poly::is_irreducible(&m, p) {
                    return Err(Error::ReducibleModulus(join_coeffs(&m)));
                }
                m
            }
            None => poly::smallest_irreducible(p, e as usize),
        };

        let mut tower = FieldTower {
            p,
            e,
            n,
            q,
            order,
            degree,
            top_modulus,
            base_modulus,
            base_root: Elem::ZERO,
            primitive: Elem::ZERO,
            exp: Vec::new(),
            log: Vec::new(),
            zech: Vec::new(),
            neg: Vec::new(),
            frob: Vec::new(),
            base_elems: Vec::new(),
            fq_basis: Vec::new(),
            fq_dual: Vec::new(),
        };
        tower.build_tables();
        Ok(tower)
    }

    /// Convenience constructor with default moduli.
    pub fn with_params(p: u32, e: u32, n: u32) -> Result<Self> {
        Self::new(&ModulusSpec::new(p, e, n))
    }

    /// The quadratic extension F_{q²} over F_q for a prime power `q`.
    pub fn for_q(q: u32) -> Result<Self> {
        Self::new(&ModulusSpec::for_q(q)?)
    }

    fn build_tables(&mut self) {
        let order = self.order as usize;
        let group = order - 1;

        self.neg = (0..self.order)
            .map(|c| {
                self.encode(
                    &self
                        .decode(Elem(c))
                        .iter()
                        .map(|&a| (self.p - a) % self.p)
                        .collect::<Vec<_>>(),
                )
                .0
            })
            .collect();

        // smallest generator of the multiplicative group
        let factors = {
            let mut out = Vec::new();
            let mut k = group;
            let mut d = 2;
            while d * d <= k {
                if k.is_multiple_of(d) {
                    out.push(d);
                    while k.is_multiple_of(d) {
                        k /= d;
                    }
                }
                d += 1;
            }
            if k > 1 {
                out.push(k);
            }
            out
        };
        let g = (1..self.order)
            .map(Elem)
            .find(|&cand| {
                let c = self.decode(cand);
                factors.iter().all(|&r| {
                    let pw = poly::powmod(&c, (group / r) as u128, &self.top_modulus, self.p);
                    pw != vec![1]
                })
            })
            .expect("multiplicative group is cyclic");
        self.primitive = g;

        let gpoly = self.decode(g);
        self.exp = vec![0; 2 * group.max(1)];
        self.log = vec![NONE; order];
        let mut cur = vec![1u32];
        for k in 0..group {
            let code = self.encode(&cur).0;
            self.exp[k] = code;
            self.exp[k + group] = code;
            self.log[code as usize] = k as u32;
            cur = poly::mulmod(&cur, &gpoly, &self.top_modulus, self.p);
        }

        self.zech = (0..group)
            .map(|k| {
                let s = self.add_poly(Elem(self.exp[k]), Elem::ONE);
                if s.is_zero() {
                    NONE
                } else {
                    self.log[s.0 as usize]
                }
            })
            .collect();

        let q = self.q as u64;
        self.frob = (0..self.order).map(|c| self.pow(Elem(c), q).0).collect();
        self.base_elems = (0..self.order)
            .map(Elem)
            .filter(|&x| self.frob[x.0 as usize] == x.0)
            .collect();

        // a root of the base modulus inside the top field
        self.base_root = *self
            .base_elems
            .iter()
            .find(|&&x| {
                let mut acc = Elem::ZERO;
                for &c in self.base_modulus.iter().rev() {
                    acc = self.add(self.mul(acc, x), Elem(c));
                }
                acc.is_zero()
            })
            .expect("F_q contains the roots of its modulus");

        // F_q-basis 1, g, ..., g^(n-1) and its trace-dual basis
        let n = self.n as usize;
        self.fq_basis = (0..n).map(|i| self.pow(g, i as u64)).collect();
        let mut gram = crate::linalg::Mat::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let t = self.trace(self.mul(self.fq_basis[i], self.fq_basis[j]));
                gram.set(i, j, t);
            }
        }
        let ginv = gram.inverse(self).expect("trace form is nondegenerate");
        self.fq_dual = (0..n)
            .map(|i| {
                let mut acc = Elem::ZERO;
                for j in 0..n {
                    acc = self.add(acc, self.mul(ginv.get(i, j), self.fq_basis[j]));
                }
                acc
            })
            .collect();
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn e(&self) -> u32 {
        self.e
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// |F_q|.
    pub fn q(&self) -> u32 {
        self.q
    }

    /// |F_{q^n}|.
    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn top_modulus(&self) -> &[u32] {
        &self.top_modulus
    }

    pub fn base_modulus(&self) -> &[u32] {
        &self.base_modulus
    }

    pub fn primitive(&self) -> Elem {
        self.primitive
    }

    /// The fully explicit spec string of this tower.
    pub fn spec(&self) -> ModulusSpec {
        ModulusSpec {
            p: self.p,
            e: self.e,
            n: self.n,
            top: Some(self.top_modulus.clone()),
            base: (self.e > 1).then(|| self.base_modulus.clone()),
        }
    }

    /// Coefficient vector over F_p (length e·n).
    pub fn decode(&self, x: Elem) -> Vec<u32> {
        let mut c = x.0;
        (0..self.degree)
            .map(|_| {
                let d = c % self.p;
                c /= self.p;
                d
            })
            .collect()
    }

    pub fn encode(&self, coeffs: &[u32]) -> Elem {
        let mut code = 0u32;
        for &c in coeffs.iter().take(self.degree).rev() {
            code = code * self.p + c % self.p;
        }
        Elem(code)
    }

    /// All elements of the top field in encoding order.
    pub fn elements(&self) -> impl Iterator<Item = Elem> + Clone {
        (0..self.order).map(Elem)
    }

    /// Elements of F_q in encoding order.
    pub fn base_elements(&self) -> &[Elem] {
        &self.base_elems
    }

    /// Embeds an element of F_q given by its coordinates over F_p with
    /// respect to the base modulus.
    pub fn embed_base(&self, coords: &[u32]) -> Elem {
        let mut acc = Elem::ZERO;
        for &c in coords.iter().rev() {
            acc = self.add(self.mul(acc, self.base_root), Elem(c % self.p));
        }
        acc
    }

    /// Image of an integer in the prime field.
    pub fn from_int(&self, v: i64) -> Elem {
        Elem(v.rem_euclid(self.p as i64) as u32)
    }

    pub fn level(&self, x: Elem) -> Level {
        if x.0 < self.p {
            Level::Prime
        } else if self.is_base(x) {
            Level::Base
        } else {
            Level::Top
        }
    }

    pub fn is_base(&self, x: Elem) -> bool {
        self.frob[x.0 as usize] == x.0
    }

    #[inline]
    pub fn add(&self, a: Elem, b: Elem) -> Elem {
        if a.0 == 0 {
            return b;
        }
        if b.0 == 0 {
            return a;
        }
        let group = self.order - 1;
        let la = self.log[a.0 as usize];
        let lb = self.log[b.0 as usize];
        let d = if lb >= la { lb - la } else { lb + group - la };
        let z = self.zech[d as usize];
        if z == NONE {
            Elem::ZERO
        } else {
            Elem(self.exp[(la + z) as usize])
        }
    }

    /// Coefficient-wise addition; the reference path the Zech tables are
    /// checked against.
    pub fn add_poly(&self, a: Elem, b: Elem) -> Elem {
        let (x, y) = (self.decode(a), self.decode(b));
        let s: Vec<u32> = x.iter().zip(&y).map(|(u, v)| (u + v) % self.p).collect();
        self.encode(&s)
    }

    #[inline]
    pub fn neg(&self, a: Elem) -> Elem {
        Elem(self.neg[a.0 as usize])
    }

    #[inline]
    pub fn sub(&self, a: Elem, b: Elem) -> Elem {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: Elem, b: Elem) -> Elem {
        if a.0 == 0 || b.0 == 0 {
            return Elem::ZERO;
        }
        Elem(self.exp[(self.log[a.0 as usize] + self.log[b.0 as usize]) as usize])
    }

    /// Product computed by polynomial multiplication modulo the top modulus.
    pub fn mul_poly(&self, a: Elem, b: Elem) -> Elem {
        let r = poly::mulmod(&self.decode(a), &self.decode(b), &self.top_modulus, self.p);
        self.encode(&r)
    }

    pub fn inv(&self, a: Elem) -> Result<Elem> {
        if a.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let group = self.order - 1;
        let l = self.log[a.0 as usize];
        Ok(Elem(self.exp[((group - l) % group) as usize]))
    }

    pub fn div(&self, a: Elem, b: Elem) -> Result<Elem> {
        Ok(self.mul(a, self.inv(b)?))
    }

    pub fn pow(&self, a: Elem, k: u64) -> Elem {
        if k == 0 {
            return Elem::ONE;
        }
        if a.is_zero() {
            return Elem::ZERO;
        }
        let group = (self.order - 1) as u64;
        let l = self.log[a.0 as usize] as u64;
        Elem(self.exp[((l * (k % group)) % group) as usize])
    }

    /// Discrete logarithm to the base [`FieldTower::primitive`].
    pub fn log(&self, a: Elem) -> Option<u32> {
        (!a.is_zero()).then(|| self.log[a.0 as usize])
    }

    /// `x^(q^i)`, with `i` taken modulo n.
    pub fn frobenius(&self, x: Elem, i: i64) -> Elem {
        let k = i.rem_euclid(self.n as i64);
        let mut y = x;
        for _ in 0..k {
            y = Elem(self.frob[y.0 as usize]);
        }
        y
    }

    /// `x^q`.
    #[inline]
    pub fn frob(&self, x: Elem) -> Elem {
        Elem(self.frob[x.0 as usize])
    }

    /// Relative trace F_{q^n} → F_q.
    pub fn trace(&self, x: Elem) -> Elem {
        let mut acc = Elem::ZERO;
        let mut y = x;
        for _ in 0..self.n {
            acc = self.add(acc, y);
            y = self.frob(y);
        }
        acc
    }

    /// Relative norm F_{q^n} → F_q.
    pub fn norm(&self, x: Elem) -> Elem {
        let mut acc = Elem::ONE;
        let mut y = x;
        for _ in 0..self.n {
            acc = self.mul(acc, y);
            y = self.frob(y);
        }
        acc
    }

    pub fn trace_norm(&self, x: Elem) -> (Elem, Elem) {
        (self.trace(x), self.norm(x))
    }

    /// Legendre character of an element of F_q (q odd).
    pub fn is_square_base(&self, a: Elem) -> Result<SquareClass> {
        if self.p == 2 {
            return Err(Error::EvenCharacteristicUnsupported);
        }
        if !self.is_base(a) {
            return Err(Error::NotInBaseField(self.format(a)));
        }
        if a.is_zero() {
            return Ok(SquareClass::Zero);
        }
        let r = self.pow(a, ((self.q - 1) / 2) as u64);
        Ok(if r == Elem::ONE {
            SquareClass::Square
        } else {
            SquareClass::NonSquare
        })
    }

    /// F_q-coordinates of `x` with respect to the basis 1, g, …, g^(n-1).
    pub fn fq_coords(&self, x: Elem) -> Vec<Elem> {
        self.fq_dual
            .iter()
            .map(|&d| self.trace(self.mul(x, d)))
            .collect()
    }

    pub fn fq_basis(&self) -> &[Elem] {
        &self.fq_basis
    }

    /// Comma-separated prime-field coefficients, low-to-high.
    pub fn format(&self, x: Elem) -> String {
        join_coeffs(&self.decode(x))
    }

    pub fn parse(&self, s: &str) -> Result<Elem> {
        let coeffs: Vec<u32> = s
            .split(',')
            .map(|t| t.trim().parse::<u32>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::Parse(format!("bad field element {s:?}")))?;
        if coeffs.len() > self.degree || coeffs.iter().any(|&c| c >= self.p) {
            return Err(Error::Parse(format!("field element {s:?} out of range")));
        }
        Ok(self.encode(&coeffs))
    }

    /// An element `i` with `i^q = -i` (n = 2, q odd): a square root of a
    /// nonsquare of F_q.
    pub fn imaginary_unit(&self) -> Option<Elem> {
        self.elements()
            .find(|&x| !x.is_zero() && self.frob(x) == self.neg(x))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn f9() -> FieldTower {
        FieldTower::with_params(3, 1, 2).unwrap()
    }

    #[test]
    fn default_modulus_for_f9() {
        let t = f9();
        assert_eq!(t.top_modulus(), &[1, 0, 1]);
        assert_eq!(t.order(), 9);
        assert_eq!(t.q(), 3);
    }

    #[test]
    fn reducible_modulus_rejected() {
        let spec: ModulusSpec = "p=3,e=1,n=2,mod=0,1,1".parse().unwrap();
        assert!(matches!(
            FieldTower::new(&spec),
            Err(Error::ReducibleModulus(_))
        ));
    }

    #[test]
    fn composite_characteristic_rejected() {
        assert!(matches!(
            FieldTower::with_params(4, 1, 2),
            Err(Error::CompositeCharacteristic(4))
        ));
    }

    #[test]
    fn f25_enumerates_25_elements() {
        let t = FieldTower::with_params(5, 1, 2).unwrap();
        assert_eq!(t.elements().count(), 25);
        assert_eq!(t.base_elements().len(), 5);
    }

    #[test]
    fn spec_string_roundtrip() {
        let s: ModulusSpec = "p=3,e=1,n=2,mod=1,0,1".parse().unwrap();
        assert_eq!(s.to_string(), "p=3,e=1,n=2,mod=1,0,1");
        let t = FieldTower::new(&s).unwrap();
        assert_eq!(t.spec(), s);
    }

    #[test]
    fn frobenius_examples() {
        let t = f9();
        let i = t.encode(&[0, 1]);
        assert_eq!(t.mul(i, i), t.from_int(-1));
        assert_eq!(t.frobenius(i, 1), t.neg(i));
        for x in t.elements() {
            assert_eq!(t.frobenius(x, 2), x);
            assert_eq!(t.frobenius(x, 0), x);
        }
        for &b in t.base_elements() {
            assert_eq!(t.frobenius(b, 1), b);
        }
    }

    #[test]
    fn trace_norm_examples() {
        let t = f9();
        let i = t.encode(&[0, 1]);
        assert_eq!(t.trace(Elem::ONE), t.from_int(2));
        assert_eq!(t.trace_norm(i), (Elem::ZERO, Elem::ONE));
        assert_eq!(t.norm(t.add(Elem::ONE, i)), t.from_int(2));
    }

    #[test]
    fn square_classes() {
        let t = f9();
        assert_eq!(
            t.is_square_base(t.from_int(1)).unwrap(),
            SquareClass::Square
        );
        assert_eq!(
            t.is_square_base(t.from_int(2)).unwrap(),
            SquareClass::NonSquare
        );
        assert_eq!(t.is_square_base(Elem::ZERO).unwrap(), SquareClass::Zero);
        let t5 = FieldTower::with_params(5, 1, 2).unwrap();
        assert_eq!(
            t5.is_square_base(t5.from_int(4)).unwrap(),
            SquareClass::Square
        );
        let t2 = FieldTower::with_params(2, 1, 2).unwrap();
        assert!(matches!(
            t2.is_square_base(Elem::ONE),
            Err(Error::EvenCharacteristicUnsupported)
        ));
    }

    #[test]
    fn half_of_units_are_squares() {
        for (p, e) in [(3, 1), (5, 1), (7, 1), (3, 2)] {
            let t = FieldTower::with_params(p, e, 2).unwrap();
            let squares = t
                .base_elements()
                .iter()
                .filter(|&&a| t.is_square_base(a).unwrap() == SquareClass::Square)
                .count();
            assert_eq!(squares as u32, (t.q() - 1) / 2);
        }
    }

    #[test]
    fn trace_is_onto_and_lands_in_base() {
        for (p, e, n) in [(3, 1, 2), (3, 1, 3), (5, 1, 2), (3, 2, 2), (2, 1, 3)] {
            let t = FieldTower::with_params(p, e, n).unwrap();
            let mut image = std::collections::BTreeSet::new();
            for x in t.elements() {
                let (tr, nm) = t.trace_norm(x);
                assert!(t.is_base(tr) && t.is_base(nm));
                image.insert(tr);
            }
            assert_eq!(image.len() as u32, t.q());
        }
    }

    #[test]
    fn table_and_polynomial_paths_agree() {
        for (p, e, n) in [
            (3, 1, 2),
            (2, 2, 2),
            (5, 1, 2),
            (3, 1, 3),
            (3, 2, 2),
            (7, 1, 2),
        ] {
            let t = FieldTower::with_params(p, e, n).unwrap();
            for a in t.elements() {
                for b in t.elements() {
                    assert_eq!(t.mul(a, b), t.mul_poly(a, b));
                    assert_eq!(t.add(a, b), t.add_poly(a, b));
                }
            }
        }
    }

    #[test]
    fn base_embedding_matches_subfield() {
        let t = FieldTower::with_params(3, 2, 2).unwrap();
        let mut embedded: Vec<Elem> = (0..3)
            .flat_map(|a| (0..3).map(move |b| [a, b]))
            .map(|c| t.embed_base(&c))
            .collect();
        embedded.sort();
        assert_eq!(embedded, t.base_elements());
    }

    #[test]
    fn fq_coordinates_reconstruct() {
        let t = FieldTower::with_params(3, 1, 3).unwrap();
        for x in t.elements() {
            let c = t.fq_coords(x);
            let mut acc = Elem::ZERO;
            for (ci, &b) in c.iter().zip(t.fq_basis()) {
                assert!(t.is_base(*ci));
                acc = t.add(acc, t.mul(*ci, b));
            }
            assert_eq!(acc, x);
        }
    }

    proptest! {
        #[test]
        fn frobenius_closes_and_is_additive(a in 0u32..729, b in 0u32..729) {
            let t = FieldTower::with_params(3, 2, 3).unwrap();
            let (a, b) = (Elem(a), Elem(b));
            prop_assert_eq!(t.pow(a, t.order() as u64), a);
            prop_assert_eq!(t.frob(t.add(a, b)), t.add(t.frob(a), t.frob(b)));
            prop_assert_eq!(t.frob(t.mul(a, b)), t.mul(t.frob(a), t.frob(b)));
        }

        #[test]
        fn format_parse_roundtrip(a in 0u32..625) {
            let t = FieldTower::with_params(5, 2, 2).unwrap();
            prop_assert_eq!(t.parse(&t.format(Elem(a))).unwrap(), Elem(a));
        }
    }
}
