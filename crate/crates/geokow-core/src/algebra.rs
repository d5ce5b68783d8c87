//! Exact rational multivariate polynomials and the small amount of linear
//! algebra built on top of them.
//!
//! Every identity check in the crate goes through this module, so nothing
//! here touches floating point except the explicit `eval_complex` helpers.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

/// Arbitrary precision rational, always kept in lowest terms.
pub type Rational = BigRational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AlgebraError {
    #[error("not quadratic in variable {0}")]
    NotQuadratic(String),
    #[error("matrix is not square ({0}x{1})")]
    NotSquare(usize, usize),
    #[error("degenerate Möbius map")]
    DegenerateMoebius,
    #[error("unknown variable {0}")]
    UnknownVariable(String),
    #[error("polynomial depends on variable {0} outside the target context")]
    ExtraVariable(String),
    #[error("degree {deg} in {var} exceeds the limit {limit}")]
    DegreeTooHigh { var: String, deg: u32, limit: u32 },
    #[error("cannot parse rational from {0:?}")]
    Parse(String),
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Parses `p/q`, a plain integer, or a finite decimal such as `-0.25`.
pub fn parse_rational(s: &str) -> Result<Rational, AlgebraError> {
    let t = s.trim();
    let err = || AlgebraError::Parse(s.to_string());
    if let Some((n, d)) = t.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| err())?;
        let d: BigInt = d.trim().parse().map_err(|_| err())?;
        if d.is_zero() {
            return Err(err());
        }
        return Ok(Rational::new(n, d));
    }
    if let Some((whole, frac)) = t.split_once('.') {
        let neg = whole.starts_with('-');
        let w: BigInt = if whole.is_empty() || whole == "-" || whole == "+" {
            BigInt::zero()
        } else {
            whole.parse().map_err(|_| err())?
        };
        if frac.is_empty() || !frac.chars().all(|c| c.is_ascii_digit()) {
            return Err(err());
        }
        let f: BigInt = frac.parse().map_err(|_| err())?;
        let den = num_traits::pow(BigInt::from(10), frac.len());
        let mag = Rational::new(w.abs() * &den + f, den);
        return Ok(if neg { -mag } else { mag });
    }
    let n: BigInt = t.parse().map_err(|_| err())?;
    Ok(Rational::from_integer(n))
}

/// `p/q` form used in reports; integers print as `p/1`.
pub fn format_rational(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

pub fn to_c64(r: &Rational) -> Complex64 {
    Complex64::new(to_f64(r), 0.0)
}

/// Multivariate polynomial over the rationals in a named variable context.
///
/// Arithmetic between polynomials with different contexts works on the
/// union of both variable lists (left operand's order first).
#[derive(Clone, Debug)]
pub struct MultiPoly {
    vars: Vec<String>,
    terms: BTreeMap<Vec<u32>, Rational>,
}

impl MultiPoly {
    pub fn zero(vars: &[&str]) -> Self {
        MultiPoly {
            vars: vars.iter().map(|v| v.to_string()).collect(),
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(c: Rational, vars: &[&str]) -> Self {
        let mut p = Self::zero(vars);
        if !c.is_zero() {
            p.terms.insert(vec![0; vars.len()], c);
        }
        p
    }

    pub fn one(vars: &[&str]) -> Self {
        Self::constant(Rational::one(), vars)
    }

    /// The polynomial `name`; `name` is appended to the context if missing.
    pub fn var(name: &str, vars: &[&str]) -> Self {
        let mut vs: Vec<String> = vars.iter().map(|v| v.to_string()).collect();
        if !vs.iter().any(|v| v == name) {
            vs.push(name.to_string());
        }
        let idx = vs.iter().position(|v| v == name).unwrap();
        let mut e = vec![0; vs.len()];
        e[idx] = 1;
        let mut terms = BTreeMap::new();
        terms.insert(e, Rational::one());
        MultiPoly { vars: vs, terms }
    }

    /// Univariate polynomial from ascending coefficients.
    pub fn from_univariate(coeffs: &[Rational], v: &str) -> Self {
        let mut p = Self::zero(&[v]);
        for (k, c) in coeffs.iter().enumerate() {
            if !c.is_zero() {
                p.terms.insert(vec![k as u32], c.clone());
            }
        }
        p
    }

    pub fn from_terms(
        vars: &[&str],
        terms: impl IntoIterator<Item = (Vec<u32>, Rational)>,
    ) -> Self {
        let mut p = Self::zero(vars);
        for (e, c) in terms {
            assert_eq!(e.len(), vars.len(), "exponent length mismatch");
            p.add_term(e, c);
        }
        p
    }

    fn add_term(&mut self, e: Vec<u32>, c: Rational) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(e);
        match entry {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &Rational)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn index_of(&self, v: &str) -> Option<usize> {
        self.vars.iter().position(|x| x == v)
    }

    /// Variables that actually occur with positive degree.
    pub fn support(&self) -> Vec<String> {
        self.vars
            .iter()
            .enumerate()
            .filter(|(i, _)| self.terms.keys().any(|e| e[*i] > 0))
            .map(|(_, v)| v.clone())
            .collect()
    }

    /// Re-expresses the polynomial in the given context. Fails if a variable
    /// with positive degree is not part of it.
    pub fn with_vars(&self, vars: &[&str]) -> Result<Self, AlgebraError> {
        for v in self.support() {
            if !vars.contains(&v.as_str()) {
                return Err(AlgebraError::ExtraVariable(v));
            }
        }
        let map: Vec<Option<usize>> = vars.iter().map(|v| self.index_of(v)).collect();
        let mut out = Self::zero(vars);
        for (e, c) in &self.terms {
            let ne: Vec<u32> = map.iter().map(|m| m.map_or(0, |i| e[i])).collect();
            out.add_term(ne, c.clone());
        }
        Ok(out)
    }

    fn union_vars(&self, other: &Self) -> Vec<String> {
        let mut vs = self.vars.clone();
        for v in &other.vars {
            if !vs.contains(v) {
                vs.push(v.clone());
            }
        }
        vs
    }

    fn lift(&self, vars: &[String]) -> Self {
        let refs: Vec<&str> = vars.iter().map(|s| s.as_str()).collect();
        self.with_vars(&refs).expect("lift to a superset context")
    }

    fn aligned(&self, other: &Self) -> (Self, Self) {
        if self.vars == other.vars {
            return (self.clone(), other.clone());
        }
        let vs = self.union_vars(other);
        (self.lift(&vs), other.lift(&vs))
    }

    pub fn scale(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return MultiPoly {
                vars: self.vars.clone(),
                terms: BTreeMap::new(),
            };
        }
        MultiPoly {
            vars: self.vars.clone(),
            terms: self.terms.iter().map(|(e, v)| (e.clone(), v * c)).collect(),
        }
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = MultiPoly::constant(Rational::one(), &[]).lift(&self.vars);
        let mut base = self.clone();
        let mut k = n;
        while k > 0 {
            if k & 1 == 1 {
                acc = &acc * &base;
            }
            k >>= 1;
            if k > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    pub fn degree_in(&self, v: &str) -> u32 {
        match self.index_of(v) {
            Some(i) => self.terms.keys().map(|e| e[i]).max().unwrap_or(0),
            None => 0,
        }
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    /// Coefficient of `v^k`, still living in the same context.
    pub fn coeff_of(&self, v: &str, k: u32) -> Self {
        let mut out = MultiPoly {
            vars: self.vars.clone(),
            terms: BTreeMap::new(),
        };
        let Some(i) = self.index_of(v) else {
            if k == 0 {
                return self.clone();
            }
            return out;
        };
        for (e, c) in &self.terms {
            if e[i] == k {
                let mut ne = e.clone();
                ne[i] = 0;
                out.terms.insert(ne, c.clone());
            }
        }
        out
    }

    pub fn derivative(&self, v: &str) -> Self {
        let mut out = MultiPoly {
            vars: self.vars.clone(),
            terms: BTreeMap::new(),
        };
        let Some(i) = self.index_of(v) else {
            return out;
        };
        for (e, c) in &self.terms {
            if e[i] > 0 {
                let mut ne = e.clone();
                ne[i] -= 1;
                out.add_term(ne, c * int(e[i] as i64));
            }
        }
        out
    }

    /// Substitutes `v <- q` and removes `v` from the context.
    pub fn substitute(&self, v: &str, q: &MultiPoly) -> Self {
        let Some(_) = self.index_of(v) else {
            return self.clone();
        };
        let deg = self.degree_in(v);
        let rest: Vec<String> = self
            .vars
            .iter()
            .filter(|x| x.as_str() != v)
            .cloned()
            .collect();
        let rest_refs: Vec<&str> = rest.iter().map(|s| s.as_str()).collect();
        let mut acc = MultiPoly::zero(&rest_refs);
        for k in (0..=deg).rev() {
            let ck = self
                .coeff_of(v, k)
                .with_vars(&rest_refs)
                .expect("coefficient is free of v");
            acc = &(&acc * q) + &ck;
        }
        acc
    }

    pub fn substitute_rational(&self, v: &str, r: &Rational) -> Self {
        self.substitute(v, &MultiPoly::constant(r.clone(), &[]))
    }

    /// Simultaneous substitution, each value interpreted in the output context.
    pub fn substitute_many(&self, subs: &[(&str, MultiPoly)]) -> Self {
        let tmp: Vec<String> = subs.iter().map(|(v, _)| format!("__tmp_{v}")).collect();
        let mut p = self.clone();
        for ((v, _), t) in subs.iter().zip(&tmp) {
            p = p.rename(v, t);
        }
        for ((_, q), t) in subs.iter().zip(&tmp) {
            p = p.substitute(t, q);
        }
        p
    }

    pub fn rename(&self, from: &str, to: &str) -> Self {
        let mut p = self.clone();
        if let Some(i) = p.index_of(from) {
            if let Some(j) = p.index_of(to) {
                if i != j {
                    // Merge into the existing variable.
                    let mut out = MultiPoly {
                        vars: p.vars.clone(),
                        terms: BTreeMap::new(),
                    };
                    for (e, c) in &p.terms {
                        let mut ne = e.clone();
                        ne[j] += ne[i];
                        ne[i] = 0;
                        out.add_term(ne, c.clone());
                    }
                    return out;
                }
            } else {
                p.vars[i] = to.to_string();
            }
        }
        p
    }

    pub fn swap_vars(&self, a: &str, b: &str) -> Self {
        self.rename(a, "__swap").rename(b, a).rename("__swap", b)
    }

    /// Ascending coefficient list of a polynomial in `v` alone.
    pub fn univariate_coeffs(&self, v: &str) -> Result<Vec<Rational>, AlgebraError> {
        for s in self.support() {
            if s != v {
                return Err(AlgebraError::ExtraVariable(s));
            }
        }
        let deg = self.degree_in(v);
        let i = self.index_of(v);
        let mut out = vec![Rational::zero(); deg as usize + 1];
        for (e, c) in &self.terms {
            let k = i.map_or(0, |i| e[i]) as usize;
            out[k] = c.clone();
        }
        Ok(out)
    }

    pub fn eval_rational(&self, point: &HashMap<&str, Rational>) -> Result<Rational, AlgebraError> {
        let mut total = Rational::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (i, &k) in e.iter().enumerate() {
                if k == 0 {
                    continue;
                }
                let x = point
                    .get(self.vars[i].as_str())
                    .ok_or_else(|| AlgebraError::UnknownVariable(self.vars[i].clone()))?;
                t *= num_traits::pow(x.clone(), k as usize);
            }
            total += t;
        }
        Ok(total)
    }

    pub fn eval_complex(
        &self,
        point: &HashMap<&str, Complex64>,
    ) -> Result<Complex64, AlgebraError> {
        let vals: Vec<Complex64> = self
            .vars
            .iter()
            .enumerate()
            .map(|(i, v)| match point.get(v.as_str()) {
                Some(z) => Ok(*z),
                None if self.terms.keys().all(|e| e[i] == 0) => Ok(Complex64::new(0.0, 0.0)),
                None => Err(AlgebraError::UnknownVariable(v.clone())),
            })
            .collect::<Result<_, _>>()?;
        Ok(self.compile().eval(&vals))
    }

    /// Floating point copy for repeated numeric evaluation in this context.
    pub fn compile(&self) -> CompiledPoly {
        CompiledPoly {
            vars: self.vars.clone(),
            terms: self
                .terms
                .iter()
                .map(|(e, c)| (e.clone(), to_f64(c)))
                .collect(),
        }
    }

    pub fn max_abs_coeff(&self) -> Rational {
        self.terms
            .values()
            .map(|c| c.abs())
            .max()
            .unwrap_or_else(Rational::zero)
    }

    pub fn is_symmetric_in(&self, a: &str, b: &str) -> bool {
        (&self.swap_vars(a, b) - self).is_zero()
    }
}

impl PartialEq for MultiPoly {
    fn eq(&self, other: &Self) -> bool {
        (self - other).is_zero()
    }
}

impl<'a> Add<&'a MultiPoly> for &'a MultiPoly {
    type Output = MultiPoly;
    fn add(self, rhs: &'a MultiPoly) -> MultiPoly {
        let (mut a, b) = self.aligned(rhs);
        for (e, c) in b.terms {
            a.add_term(e, c);
        }
        a
    }
}

impl<'a> Sub<&'a MultiPoly> for &'a MultiPoly {
    type Output = MultiPoly;
    fn sub(self, rhs: &'a MultiPoly) -> MultiPoly {
        let (mut a, b) = self.aligned(rhs);
        for (e, c) in b.terms {
            a.add_term(e, -c);
        }
        a
    }
}

impl<'a> Mul<&'a MultiPoly> for &'a MultiPoly {
    type Output = MultiPoly;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn mul(self, rhs: &'a MultiPoly) -> MultiPoly {
        let (a, b) = self.aligned(rhs);
        let mut out = MultiPoly {
            vars: a.vars.clone(),
            terms: BTreeMap::new(),
        };
        for (ea, ca) in &a.terms {
            for (eb, cb) in &b.terms {
                let e: Vec<u32> = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
                out.add_term(e, ca * cb);
            }
        }
        out
    }
}

impl Neg for &MultiPoly {
    type Output = MultiPoly;
    fn neg(self) -> MultiPoly {
        self.scale(&-Rational::one())
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr<MultiPoly> for MultiPoly {
            type Output = MultiPoly;
            fn $m(self, rhs: MultiPoly) -> MultiPoly {
                (&self).$m(&rhs)
            }
        }
        impl<'a> $tr<&'a MultiPoly> for MultiPoly {
            type Output = MultiPoly;
            fn $m(self, rhs: &'a MultiPoly) -> MultiPoly {
                (&self).$m(rhs)
            }
        }
        impl<'a> $tr<MultiPoly> for &'a MultiPoly {
            type Output = MultiPoly;
            fn $m(self, rhs: MultiPoly) -> MultiPoly {
                self.$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for MultiPoly {
    type Output = MultiPoly;
    fn neg(self) -> MultiPoly {
        (&self).neg()
    }
}

impl fmt::Display for MultiPoly {
    /// Terms in descending total degree, then descending lexicographic
    /// exponent order; stable across runs.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut items: Vec<(&Vec<u32>, &Rational)> = self.terms.iter().collect();
        items.sort_by(|a, b| {
            let da: u32 = a.0.iter().sum();
            let db: u32 = b.0.iter().sum();
            db.cmp(&da).then_with(|| b.0.cmp(a.0))
        });
        for (n, (e, c)) in items.into_iter().enumerate() {
            let neg = c.is_negative();
            let mag = c.abs();
            if n == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, "{}", if neg { " - " } else { " + " })?;
            }
            let mono: Vec<String> = e
                .iter()
                .enumerate()
                .filter(|(_, k)| **k > 0)
                .map(|(i, k)| {
                    if *k == 1 {
                        self.vars[i].clone()
                    } else {
                        format!("{}^{}", self.vars[i], k)
                    }
                })
                .collect();
            let coeff = if mag.is_integer() {
                mag.numer().to_string()
            } else {
                format!("{}/{}", mag.numer(), mag.denom())
            };
            if mono.is_empty() {
                write!(f, "{coeff}")?;
            } else if mag.is_one() {
                write!(f, "{}", mono.join("*"))?;
            } else {
                write!(f, "{}*{}", coeff, mono.join("*"))?;
            }
        }
        Ok(())
    }
}

/// Floating point evaluation form of a [`MultiPoly`].
#[derive(Clone, Debug)]
pub struct CompiledPoly {
    vars: Vec<String>,
    terms: Vec<(Vec<u32>, f64)>,
}

impl CompiledPoly {
    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    /// Values are given in the polynomial's own variable order.
    pub fn eval(&self, vals: &[Complex64]) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (e, c) in &self.terms {
            let mut t = Complex64::new(*c, 0.0);
            for (x, &k) in vals.iter().zip(e) {
                if k > 0 {
                    t *= x.powu(k);
                }
            }
            acc += t;
        }
        acc
    }
}

/// `p = A v² + 2B v + C`; returns `B² − AC`.
pub fn discriminant_half(p: &MultiPoly, v: &str) -> Result<MultiPoly, AlgebraError> {
    if p.degree_in(v) != 2 {
        return Err(AlgebraError::NotQuadratic(v.to_string()));
    }
    let a = p.coeff_of(v, 2);
    let b = p.coeff_of(v, 1).scale(&rat(1, 2));
    let c = p.coeff_of(v, 0);
    let d = &(&b * &b) - &(&a * &c);
    let rest: Vec<&str> = p
        .vars()
        .iter()
        .map(|s| s.as_str())
        .filter(|s| *s != v)
        .collect();
    Ok(d.with_vars(&rest).expect("discriminant is free of v"))
}

/// Classical discriminant `b² − 4ac` of `a v² + b v + c`, i.e. four times
/// [`discriminant_half`].
pub fn discriminant(p: &MultiPoly, v: &str) -> Result<MultiPoly, AlgebraError> {
    Ok(discriminant_half(p, v)?.scale(&int(4)))
}

/// Rectangular grid of polynomial entries.
#[derive(Clone, Debug)]
pub struct PolyMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<MultiPoly>,
}

impl PolyMatrix {
    pub fn new(rows: Vec<Vec<MultiPoly>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        assert!(rows.iter().all(|x| x.len() == c), "ragged matrix");
        PolyMatrix {
            rows: r,
            cols: c,
            entries: rows.into_iter().flatten().collect(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &MultiPoly {
        &self.entries[i * self.cols + j]
    }

    pub fn transpose(&self) -> Self {
        let rows = (0..self.cols)
            .map(|j| (0..self.rows).map(|i| self.get(i, j).clone()).collect())
            .collect();
        PolyMatrix::new(rows)
    }

    /// Matrix with the listed rows and columns removed.
    pub fn minor(&self, drop_rows: &[usize], drop_cols: &[usize]) -> Self {
        let rows = (0..self.rows)
            .filter(|i| !drop_rows.contains(i))
            .map(|i| {
                (0..self.cols)
                    .filter(|j| !drop_cols.contains(j))
                    .map(|j| self.get(i, j).clone())
                    .collect()
            })
            .collect();
        PolyMatrix::new(rows)
    }

    pub fn swap_rows(&self, a: usize, b: usize) -> Self {
        let mut m = self.clone();
        for j in 0..self.cols {
            m.entries.swap(a * self.cols + j, b * self.cols + j);
        }
        m
    }
}

/// Exact determinant by Laplace expansion along rows with memoised minors
/// (O(n·2ⁿ) polynomial products, fine for the 4×4 and 5×5 cases used here).
pub fn det(m: &PolyMatrix) -> Result<MultiPoly, AlgebraError> {
    if m.rows != m.cols {
        return Err(AlgebraError::NotSquare(m.rows, m.cols));
    }
    let n = m.rows;
    if n == 0 {
        return Ok(MultiPoly::one(&[]));
    }
    let mut memo: HashMap<u32, MultiPoly> = HashMap::new();
    Ok(det_rec(m, 0, (1u32 << n) - 1, &mut memo))
}

fn det_rec(m: &PolyMatrix, row: usize, cols: u32, memo: &mut HashMap<u32, MultiPoly>) -> MultiPoly {
    if row == m.rows {
        return MultiPoly::one(&[]);
    }
    if let Some(p) = memo.get(&cols) {
        return p.clone();
    }
    let mut acc = MultiPoly::zero(&[]);
    let mut pos = 0;
    for j in 0..m.cols {
        if cols & (1 << j) == 0 {
            continue;
        }
        let e = m.get(row, j);
        if !e.is_zero() {
            let sub = det_rec(m, row + 1, cols & !(1 << j), memo);
            let term = e * &sub;
            acc = if pos % 2 == 0 {
                &acc + &term
            } else {
                &acc - &term
            };
        }
        pos += 1;
    }
    memo.insert(cols, acc.clone());
    acc
}

/// Fractional linear map `v ↦ (a v + b)/(c v + d)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Moebius {
    pub a: Rational,
    pub b: Rational,
    pub c: Rational,
    pub d: Rational,
}

impl Moebius {
    pub fn new(a: Rational, b: Rational, c: Rational, d: Rational) -> Result<Self, AlgebraError> {
        let m = Moebius { a, b, c, d };
        if m.det().is_zero() {
            return Err(AlgebraError::DegenerateMoebius);
        }
        Ok(m)
    }

    pub fn identity() -> Self {
        Moebius {
            a: int(1),
            b: int(0),
            c: int(0),
            d: int(1),
        }
    }

    pub fn det(&self) -> Rational {
        &self.a * &self.d - &self.b * &self.c
    }

    pub fn inverse(&self) -> Self {
        Moebius {
            a: self.d.clone(),
            b: -self.b.clone(),
            c: -self.c.clone(),
            d: self.a.clone(),
        }
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Moebius) -> Self {
        Moebius {
            a: &self.a * &other.a + &self.b * &other.c,
            b: &self.a * &other.b + &self.b * &other.d,
            c: &self.c * &other.a + &self.d * &other.c,
            d: &self.c * &other.b + &self.d * &other.d,
        }
    }

    pub fn apply(&self, x: &Rational) -> Option<Rational> {
        let den = &self.c * x + &self.d;
        if den.is_zero() {
            None
        } else {
            Some((&self.a * x + &self.b) / den)
        }
    }
}

/// Substitutes `v ← (a v + b)/(c v + d)` and clears the denominator with
/// `(c v + d)^deg_v(p)`.
pub fn moebius_substitute(p: &MultiPoly, v: &str, m: &Moebius) -> Result<MultiPoly, AlgebraError> {
    if m.det().is_zero() {
        return Err(AlgebraError::DegenerateMoebius);
    }
    let n = p.degree_in(v);
    let x = MultiPoly::var(v, &[]);
    let num = &x.scale(&m.a) + &MultiPoly::constant(m.b.clone(), &[]);
    let den = &x.scale(&m.c) + &MultiPoly::constant(m.d.clone(), &[]);
    let mut acc = MultiPoly::zero(&[]);
    for k in 0..=n {
        let ck = p.coeff_of(v, k);
        if ck.is_zero() {
            continue;
        }
        acc = &acc + &(&ck * &(&num.pow(k) * &den.pow(n - k)));
    }
    let refs: Vec<&str> = p.vars().iter().map(|s| s.as_str()).collect();
    Ok(acc.with_vars(&refs).unwrap_or(acc))
}

/// Dense 5×5 coefficient matrix `T[i][j]` of `x1^i x2^j`.
pub fn coeff_matrix(p: &MultiPoly, x1: &str, x2: &str) -> Result<Vec<Vec<Rational>>, AlgebraError> {
    let q = p.with_vars(&[x1, x2])?;
    for (v, d) in [(x1, q.degree_in(x1)), (x2, q.degree_in(x2))] {
        if d > 4 {
            return Err(AlgebraError::DegreeTooHigh {
                var: v.to_string(),
                deg: d,
                limit: 4,
            });
        }
    }
    let mut t = vec![vec![Rational::zero(); 5]; 5];
    for (e, c) in q.terms() {
        t[e[0] as usize][e[1] as usize] = c.clone();
    }
    Ok(t)
}

/// Inverse of [`coeff_matrix`].
pub fn from_coeff_matrix(t: &[Vec<Rational>], x1: &str, x2: &str) -> MultiPoly {
    let mut p = MultiPoly::zero(&[x1, x2]);
    for (i, row) in t.iter().enumerate() {
        for (j, c) in row.iter().enumerate() {
            p.add_term(vec![i as u32, j as u32], c.clone());
        }
    }
    p
}

/// Exact rank over the rationals. Rows are scaled to integers and reduced by
/// fraction-free (Bareiss) elimination.
pub fn rank(t: &[Vec<Rational>]) -> usize {
    let mut m: Vec<Vec<BigInt>> = t
        .iter()
        .map(|row| {
            let l = row.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
            row.iter()
                .map(|c| (c * Rational::from_integer(l.clone())).to_integer())
                .collect()
        })
        .collect();
    let rows = m.len();
    let cols = m.first().map_or(0, |r| r.len());
    let mut r = 0;
    let mut prev = BigInt::one();
    for c in 0..cols {
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        for i in (r + 1)..rows {
            for j in (c + 1)..cols {
                let v = &m[r][c] * &m[i][j] - &m[i][c] * &m[r][j];
                m[i][j] = v / &prev;
            }
            m[i][c] = BigInt::zero();
        }
        prev = m[r][c].clone();
        r += 1;
        if r == rows {
            break;
        }
    }
    r
}

/// Ascending-coefficient univariate helpers over the rationals.
pub mod upoly {
    use super::Rational;
    use num_traits::Zero;

    pub fn trim(mut p: Vec<Rational>) -> Vec<Rational> {
        while p.len() > 1 && p.last().is_some_and(|c| c.is_zero()) {
            p.pop();
        }
        if p.is_empty() {
            p.push(Rational::zero());
        }
        p
    }

    pub fn degree(p: &[Rational]) -> Option<usize> {
        p.iter().rposition(|c| !c.is_zero())
    }

    pub fn derivative(p: &[Rational]) -> Vec<Rational> {
        trim(
            p.iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c * super::int(k as i64))
                .collect(),
        )
    }

    pub fn rem(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
        let db = degree(b).expect("division by the zero polynomial");
        let mut r = a.to_vec();
        while let Some(dr) = degree(&r) {
            if dr < db {
                break;
            }
            let f = &r[dr] / &b[db];
            for k in 0..=db {
                let t = &f * &b[k];
                r[dr - db + k] -= t;
            }
        }
        trim(r)
    }

    pub fn gcd(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
        let (mut x, mut y) = (trim(a.to_vec()), trim(b.to_vec()));
        while degree(&y).is_some() {
            let r = rem(&x, &y);
            x = y;
            y = r;
        }
        match degree(&x) {
            Some(d) => {
                let lead = x[d].clone();
                trim(x.iter().map(|c| c / &lead).collect())
            }
            None => x,
        }
    }

    /// True when `p` has no repeated root (and is not identically zero).
    pub fn is_squarefree(p: &[Rational]) -> bool {
        degree(p).is_some() && degree(&gcd(p, &derivative(p))) == Some(0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn v(n: &str) -> MultiPoly {
        MultiPoly::var(n, &[])
    }

    fn c(n: i64) -> MultiPoly {
        MultiPoly::constant(int(n), &[])
    }

    #[test]
    fn half_discriminant_of_p2_in_z() {
        let (x, y, z) = (v("x"), v("y"), v("z"));
        let p = &(&(&z * &z) - &(&z * &(&x + &y)).scale(&int(2))) + &(&x - &y).pow(2);
        let d = discriminant_half(&p, "z").unwrap();
        assert_eq!(d, (&x * &y).scale(&int(4)));
    }

    #[test]
    fn discriminant_of_square_vanishes() {
        let p = v("v").pow(2);
        assert!(discriminant_half(&p, "v").unwrap().is_zero());
    }

    #[test]
    fn non_quadratic_rejected() {
        let p = v("v").pow(3);
        assert_eq!(
            discriminant_half(&p, "v"),
            Err(AlgebraError::NotQuadratic("v".into()))
        );
    }

    #[test]
    fn small_determinants() {
        let x = v("x");
        assert_eq!(det(&PolyMatrix::new(vec![vec![x.clone()]])).unwrap(), x);
        let m = PolyMatrix::new(vec![vec![x.clone(), c(1)], vec![c(1), x.clone()]]);
        assert_eq!(det(&m).unwrap(), &(&x * &x) - &c(1));
        let r = PolyMatrix::new(vec![vec![c(1), c(2)]]);
        assert_eq!(det(&r), Err(AlgebraError::NotSquare(1, 2)));
    }

    #[test]
    fn row_swap_flips_sign() {
        let (x, y) = (v("x"), v("y"));
        let m = PolyMatrix::new(vec![
            vec![x.clone(), c(2), y.clone()],
            vec![c(1), &x * &y, c(3)],
            vec![y.clone(), c(-1), x.clone()],
        ]);
        let d = det(&m).unwrap();
        assert_eq!(det(&m.swap_rows(0, 2)).unwrap(), -d.clone());
        assert_eq!(det(&m.transpose()).unwrap(), d);
    }

    #[test]
    fn moebius_examples() {
        let p = v("v");
        assert_eq!(
            moebius_substitute(&p, "v", &Moebius::identity()).unwrap(),
            p
        );
        let inv = Moebius::new(int(0), int(1), int(1), int(0)).unwrap();
        assert_eq!(moebius_substitute(&v("v").pow(2), "v", &inv).unwrap(), c(1));
        assert!(Moebius::new(int(1), int(2), int(2), int(4)).is_err());
    }

    #[test]
    fn coeff_matrix_examples() {
        let (x1, x2) = (v("x1"), v("x2"));
        let t = coeff_matrix(&(&x1 * &x2), "x1", "x2").unwrap();
        assert_eq!(t[1][1], int(1));
        assert_eq!(t.iter().flatten().filter(|c| !c.is_zero()).count(), 1);
        let t = coeff_matrix(&(&x1 + &x2).pow(2), "x1", "x2").unwrap();
        assert_eq!(
            (t[2][0].clone(), t[0][2].clone(), t[1][1].clone()),
            (int(1), int(1), int(2))
        );
        assert!(coeff_matrix(&x1.pow(5), "x1", "x2").is_err());
        assert!(coeff_matrix(&(&x1 * &v("y")), "x1", "x2").is_err());
    }

    #[test]
    fn rank_examples() {
        let zero = vec![vec![Rational::zero(); 5]; 5];
        assert_eq!(rank(&zero), 0);
        let id: Vec<Vec<Rational>> = (0..5)
            .map(|i| (0..5).map(|j| int((i == j) as i64)).collect())
            .collect();
        assert_eq!(rank(&id), 5);
        let u = [rat(1, 2), int(-3), int(0), int(7), rat(2, 3)];
        let w = [int(2), int(0), rat(-5, 4), int(1), int(1)];
        let outer: Vec<Vec<Rational>> = u
            .iter()
            .map(|a| w.iter().map(|b| a * b).collect())
            .collect();
        assert_eq!(rank(&outer), 1);
    }

    #[test]
    fn product_of_quartics_has_rank_one() {
        let p = |x: &MultiPoly| &(&x.pow(4).scale(&int(3)) - &x.scale(&rat(1, 2))) + &c(5);
        let q = &p(&v("x1")) * &p(&v("x2"));
        assert_eq!(rank(&coeff_matrix(&q, "x1", "x2").unwrap()), 1);
    }

    #[test]
    fn parse_and_format() {
        assert_eq!(parse_rational("3/6").unwrap(), rat(1, 2));
        assert_eq!(parse_rational("-0.25").unwrap(), rat(-1, 4));
        assert_eq!(parse_rational("7").unwrap(), int(7));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
        assert_eq!(format_rational(&rat(-2, 4)), "-1/2");
        assert_eq!(format_rational(&int(3)), "3/1");
    }

    #[test]
    fn display_is_stable() {
        let p = &(&v("x").pow(2).scale(&int(-2)) + &v("x")) + &c(3);
        assert_eq!(p.to_string(), "-2*x^2 + x + 3");
    }

    #[test]
    fn squarefree() {
        assert!(upoly::is_squarefree(&[int(-1), int(0), int(1)]));
        assert!(!upoly::is_squarefree(&[int(1), int(-2), int(1)]));
    }

    fn small_poly() -> impl Strategy<Value = MultiPoly> {
        proptest::collection::vec((0u32..3, 0u32..3, -6i64..6, 1i64..4), 1..6).prop_map(|ts| {
            MultiPoly::from_terms(
                &["v", "y"],
                ts.into_iter().map(|(a, b, n, d)| (vec![a, b], rat(n, d))),
            )
        })
    }

    proptest! {
        #[test]
        fn derivative_squared_is_four_half_discriminant_on_roots(p in small_poly()) {
            prop_assume!(p.degree_in("v") == 2);
            // (∂p/∂v)² − 4·D equals 4A·p identically, hence vanishes on p = 0.
            let dp = p.derivative("v");
            let lhs = &(&dp * &dp) - &discriminant_half(&p, "v").unwrap().scale(&int(4));
            let rhs = (&p.coeff_of("v", 2) * &p).scale(&int(4));
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn moebius_roundtrip_is_scalar_multiple(p in small_poly(), a in -3i64..4, b in -3i64..4, cc in -3i64..4, d in -3i64..4) {
            prop_assume!(a * d - b * cc != 0);
            let m = Moebius::new(int(a), int(b), int(cc), int(d)).unwrap();
            let q = moebius_substitute(&p, "v", &m).unwrap();
            let back = moebius_substitute(&q, "v", &m.inverse()).unwrap();
            // back = λ·p for a nonzero constant λ.
            prop_assume!(!p.is_zero() && back.degree_in("v") == p.degree_in("v"));
            let (e, c0) = p.terms().next().map(|(e, c)| (e.clone(), c.clone())).unwrap();
            let cb = back.terms().find(|(eb, _)| **eb == e).map(|(_, c)| c.clone()).unwrap_or_else(Rational::zero);
            prop_assert!(!cb.is_zero());
            prop_assert_eq!(back, p.scale(&(cb / c0)));
        }

        #[test]
        fn coeff_matrix_roundtrip(p in small_poly()) {
            let q = p.rename("v", "x1").rename("y", "x2");
            let t = coeff_matrix(&q, "x1", "x2").unwrap();
            prop_assert_eq!(from_coeff_matrix(&t, "x1", "x2"), q);
        }
    }
}
