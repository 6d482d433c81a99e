//! Exact representation and calculus of polynomial families f(t, z).
//!
//! A [`PolyFamily`] is a polynomial in z1..zn whose coefficients are
//! univariate polynomials in the deformation parameter t over the rationals.
//! A [`Germ`] is the t-free specialization used by all polyhedral routines.
//! Term maps are ordered (lexicographic on exponent vectors), so every
//! iteration order in the crate is deterministic.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::{Error, Result};

pub type Q = BigRational;
pub type Z = BigInt;

pub fn q_int(v: i64) -> Q {
    Q::from_integer(Z::from(v))
}

pub fn q_ratio(num: i64, den: i64) -> Q {
    Q::new(Z::from(num), Z::from(den))
}

pub fn q_to_f64(q: &Q) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

/// Exponent vector (b1,...,bn) of a monomial z1^b1 ... zn^bn.
///
/// The derived `Ord` is lexicographic, which fixes the term order used for
/// canonical printing and for "first offender" reporting.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Expo(pub Vec<u32>);

impl Expo {
    pub fn zero(n: usize) -> Self {
        Expo(vec![0; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&b| b == 0)
    }

    pub fn get(&self, idx: usize) -> u32 {
        self.0[idx]
    }

    pub fn total_degree(&self) -> u64 {
        self.0.iter().map(|&b| b as u64).sum()
    }

    /// Total degree in the variables z2..zn.
    pub fn ztilde_degree(&self) -> u64 {
        self.0.iter().skip(1).map(|&b| b as u64).sum()
    }

    /// `Some(b)` if the vector is b * e_j for the given 0-based axis.
    pub fn as_pure_power(&self, axis: usize) -> Option<u32> {
        let b = self.0[axis];
        if b > 0 && self.0.iter().enumerate().all(|(k, &v)| k == axis || v == 0) {
            Some(b)
        } else {
            None
        }
    }

    /// Componentwise domination on the z2..zn block.
    pub fn dominates_ztilde(&self, other: &Expo) -> bool {
        self.0
            .iter()
            .zip(other.0.iter())
            .skip(1)
            .all(|(&a, &b)| a >= b)
    }
}

impl fmt::Display for Expo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (k, b) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{b}")?;
        }
        write!(f, ")")
    }
}

impl fmt::Debug for Expo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Univariate polynomial in t over Q, coefficients ascending, trailing
/// zeros trimmed (so the zero polynomial has no coefficients).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TPoly(Vec<Q>);

impl TPoly {
    pub fn zero() -> Self {
        TPoly(Vec::new())
    }

    pub fn constant(c: Q) -> Self {
        Self::from_coeffs(vec![c])
    }

    pub fn one() -> Self {
        Self::constant(q_int(1))
    }

    pub fn from_coeffs(mut coeffs: Vec<Q>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        TPoly(coeffs)
    }

    pub fn coeffs(&self) -> &[Q] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.0.len().checked_sub(1)
    }

    pub fn as_constant(&self) -> Option<Q> {
        match self.0.len() {
            0 => Some(Q::zero()),
            1 => Some(self.0[0].clone()),
            _ => None,
        }
    }

    pub fn eval(&self, t: &Q) -> Q {
        let mut acc = Q::zero();
        for c in self.0.iter().rev() {
            acc = acc * t + c;
        }
        acc
    }

    pub fn eval_complex(&self, t: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for c in self.0.iter().rev() {
            acc = acc * t + Complex64::new(q_to_f64(c), 0.0);
        }
        acc
    }

    pub fn derivative(&self) -> TPoly {
        let coeffs = self
            .0
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, c)| c * q_int(k as i64))
            .collect();
        TPoly::from_coeffs(coeffs)
    }

    pub fn add(&self, other: &TPoly) -> TPoly {
        let mut coeffs = vec![Q::zero(); self.0.len().max(other.0.len())];
        for (k, c) in self.0.iter().enumerate() {
            coeffs[k] += c;
        }
        for (k, c) in other.0.iter().enumerate() {
            coeffs[k] += c;
        }
        TPoly::from_coeffs(coeffs)
    }

    pub fn scale(&self, by: &Q) -> TPoly {
        TPoly::from_coeffs(self.0.iter().map(|c| c * by).collect())
    }
}

/// A point (t, z) with double-precision complex coordinates.
#[derive(Clone, Debug)]
pub struct ComplexPoint {
    pub t: Complex64,
    pub z: Vec<Complex64>,
}

impl ComplexPoint {
    pub fn new(t: Complex64, z: Vec<Complex64>) -> Result<Self> {
        let finite =
            t.re.is_finite() && t.im.is_finite() && z.iter().all(|c| c.re.is_finite() && c.im.is_finite());
        if finite {
            Ok(ComplexPoint { t, z })
        } else {
            Err(Error::NonFinite)
        }
    }
}

/// Polynomial family f(t, z) with t-polynomial coefficients.
///
/// No stored term has an identically zero coefficient. The absence of a
/// constant term (f(t, 0) = 0) is a parse-time check, not a structural
/// invariant: partial derivatives legitimately carry constant terms.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolyFamily {
    n: usize,
    terms: BTreeMap<Expo, TPoly>,
    pub name: String,
}

impl PolyFamily {
    pub fn from_terms<I>(n: usize, name: impl Into<String>, terms: I) -> Self
    where
        I: IntoIterator<Item = (Expo, TPoly)>,
    {
        let mut map: BTreeMap<Expo, TPoly> = BTreeMap::new();
        for (e, c) in terms {
            assert_eq!(e.len(), n, "exponent arity mismatch");
            let entry = map.entry(e).or_insert_with(TPoly::zero);
            *entry = entry.add(&c);
        }
        map.retain(|_, c| !c.is_zero());
        PolyFamily {
            n,
            terms: map,
            name: name.into(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Expo, &TPoly)> {
        self.terms.iter()
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    pub fn term_map(&self) -> &BTreeMap<Expo, TPoly> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, e: &Expo) -> TPoly {
        self.terms.get(e).cloned().unwrap_or_else(TPoly::zero)
    }

    pub fn has_constant_term(&self) -> bool {
        self.terms.keys().any(|e| e.is_zero())
    }

    pub fn has_pure_z1_power(&self) -> bool {
        self.terms.keys().any(|e| e.as_pure_power(0).is_some())
    }

    /// Evaluate every coefficient at t0 and drop vanished terms. The result
    /// has constant (t-free) coefficients.
    pub fn specialize_t(&self, t0: &Q) -> PolyFamily {
        PolyFamily::from_terms(
            self.n,
            self.name.clone(),
            self.terms
                .iter()
                .map(|(e, c)| (e.clone(), TPoly::constant(c.eval(t0)))),
        )
    }

    /// Specialization as a [`Germ`].
    pub fn germ_at(&self, t0: &Q) -> Germ {
        Germ::from_terms(
            self.n,
            self.terms.iter().map(|(e, c)| (e.clone(), c.eval(t0))),
        )
    }

    /// Add the term z_j^a with coefficient 1 (1-based variable index).
    pub fn add_pure_power(&self, var_index: usize, a: u32) -> PolyFamily {
        assert!(a >= 1, "pure-power exponent must be >= 1");
        assert!(
            (1..=self.n).contains(&var_index),
            "variable index out of range"
        );
        let mut e = Expo::zero(self.n);
        e.0[var_index - 1] = a;
        PolyFamily::from_terms(
            self.n,
            self.name.clone(),
            self.terms
                .iter()
                .map(|(e, c)| (e.clone(), c.clone()))
                .chain(std::iter::once((e, TPoly::one()))),
        )
    }

    pub fn partial_t(&self) -> PolyFamily {
        PolyFamily::from_terms(
            self.n,
            format!("d({})/dt", self.name),
            self.terms
                .iter()
                .map(|(e, c)| (e.clone(), c.derivative())),
        )
    }

    /// Partial derivative with respect to z_j (1-based).
    pub fn partial_z(&self, j: usize) -> PolyFamily {
        assert!((1..=self.n).contains(&j));
        PolyFamily::from_terms(
            self.n,
            format!("d({})/dz{}", self.name, j),
            self.terms.iter().filter_map(|(e, c)| {
                let b = e.0[j - 1];
                if b == 0 {
                    return None;
                }
                let mut e2 = e.clone();
                e2.0[j - 1] = b - 1;
                Some((e2, c.scale(&q_int(b as i64))))
            }),
        )
    }

    /// All partials in the order (d/dt, d/dz1, ..., d/dzn).
    pub fn partials(&self) -> Vec<PolyFamily> {
        let mut out = Vec::with_capacity(self.n + 1);
        out.push(self.partial_t());
        for j in 1..=self.n {
            out.push(self.partial_z(j));
        }
        out
    }

    /// True iff f restricted to z2 = ... = zn = 0 is the zero polynomial
    /// (as a polynomial in t and z1).
    pub fn vanishes_on_axis(&self) -> bool {
        !self.terms.keys().any(|e| e.ztilde_degree() == 0)
    }

    pub fn evaluate(&self, p: &ComplexPoint) -> Result<Complex64> {
        if p.z.len() != self.n {
            return Err(Error::DimensionMismatch {
                want: self.n,
                got: p.z.len(),
            });
        }
        let pows = power_table(&p.z, self.max_exponents());
        let mut acc = Complex64::new(0.0, 0.0);
        for (e, c) in &self.terms {
            let mut term = c.eval_complex(p.t);
            for (j, &b) in e.0.iter().enumerate() {
                term *= pows[j][b as usize];
            }
            acc += term;
        }
        if acc.re.is_finite() && acc.im.is_finite() {
            Ok(acc)
        } else {
            Err(Error::NonFinite)
        }
    }

    pub fn max_exponents(&self) -> Vec<u32> {
        let mut m = vec![0u32; self.n];
        for e in self.terms.keys() {
            for (j, &b) in e.0.iter().enumerate() {
                m[j] = m[j].max(b);
            }
        }
        m
    }
}

fn power_table(z: &[Complex64], max: Vec<u32>) -> Vec<Vec<Complex64>> {
    z.iter()
        .zip(max)
        .map(|(&zj, mj)| {
            let mut row = Vec::with_capacity(mj as usize + 1);
            row.push(Complex64::new(1.0, 0.0));
            for _ in 0..mj {
                let last = *row.last().unwrap();
                row.push(last * zj);
            }
            row
        })
        .collect()
}

/// A polynomial with constant rational coefficients (one member of the
/// family, or a slice of one).
#[derive(Clone, PartialEq, Eq)]
pub struct Germ {
    n: usize,
    terms: BTreeMap<Expo, Q>,
}

impl Germ {
    pub fn from_terms<I>(n: usize, terms: I) -> Self
    where
        I: IntoIterator<Item = (Expo, Q)>,
    {
        let mut map: BTreeMap<Expo, Q> = BTreeMap::new();
        for (e, c) in terms {
            assert_eq!(e.len(), n, "exponent arity mismatch");
            *map.entry(e).or_insert_with(Q::zero) += c;
        }
        map.retain(|_, c| !c.is_zero());
        Germ { n, terms: map }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Expo, &Q)> {
        self.terms.iter()
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    pub fn support(&self) -> Vec<Expo> {
        self.terms.keys().cloned().collect()
    }

    pub fn coefficient(&self, e: &Expo) -> Q {
        self.terms.get(e).cloned().unwrap_or_else(Q::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&self, e: Expo, c: Q) -> Germ {
        Germ::from_terms(
            self.n,
            self.terms
                .iter()
                .map(|(e, c)| (e.clone(), c.clone()))
                .chain(std::iter::once((e, c))),
        )
    }

    pub fn add_pure_power(&self, var_index: usize, a: u32) -> Germ {
        assert!(a >= 1 && (1..=self.n).contains(&var_index));
        let mut e = Expo::zero(self.n);
        e.0[var_index - 1] = a;
        self.add_term(e, q_int(1))
    }

    /// Partial derivative with respect to z_j (1-based).
    pub fn partial(&self, j: usize) -> Germ {
        assert!((1..=self.n).contains(&j));
        Germ::from_terms(
            self.n,
            self.terms.iter().filter_map(|(e, c)| {
                let b = e.0[j - 1];
                if b == 0 {
                    return None;
                }
                let mut e2 = e.clone();
                e2.0[j - 1] = b - 1;
                Some((e2, c * q_int(b as i64)))
            }),
        )
    }

    pub fn partials(&self) -> Vec<Germ> {
        (1..=self.n).map(|j| self.partial(j)).collect()
    }

    /// Substitute the exact value `val` for z_j (1-based) and drop that
    /// coordinate; the result lives in n-1 variables.
    pub fn substitute_var(&self, j: usize, val: &Q) -> Germ {
        assert!((1..=self.n).contains(&j) && self.n >= 2);
        Germ::from_terms(
            self.n - 1,
            self.terms.iter().map(|(e, c)| {
                let b = e.0[j - 1];
                let mut rest: Vec<u32> = e.0.clone();
                rest.remove(j - 1);
                let mut coeff = c.clone();
                for _ in 0..b {
                    coeff *= val;
                }
                (Expo(rest), coeff)
            }),
        )
    }

    pub fn evaluate(&self, z: &[Complex64]) -> Result<Complex64> {
        if z.len() != self.n {
            return Err(Error::DimensionMismatch {
                want: self.n,
                got: z.len(),
            });
        }
        let pows = power_table(z, self.max_exponents());
        let mut acc = Complex64::new(0.0, 0.0);
        for (e, c) in &self.terms {
            let mut term = Complex64::new(q_to_f64(c), 0.0);
            for (j, &b) in e.0.iter().enumerate() {
                term *= pows[j][b as usize];
            }
            acc += term;
        }
        if acc.re.is_finite() && acc.im.is_finite() {
            Ok(acc)
        } else {
            Err(Error::NonFinite)
        }
    }

    pub fn max_exponents(&self) -> Vec<u32> {
        let mut m = vec![0u32; self.n];
        for e in self.terms.keys() {
            for (j, &b) in e.0.iter().enumerate() {
                m[j] = m[j].max(b);
            }
        }
        m
    }

    pub fn max_abs_coeff_f64(&self) -> f64 {
        self.terms
            .values()
            .map(|c| q_to_f64(&c.abs()))
            .fold(0.0, f64::max)
    }

    pub fn to_family(&self, name: impl Into<String>) -> PolyFamily {
        PolyFamily::from_terms(
            self.n,
            name,
            self.terms
                .iter()
                .map(|(e, c)| (e.clone(), TPoly::constant(c.clone()))),
        )
    }
}

impl fmt::Debug for Germ {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(e, c)| format!("{c}*z^{e}"))
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_family;

    fn ex1() -> PolyFamily {
        parse_family("z2^4+z3^3+t*z1^2*z2^4*z3^3").unwrap()
    }

    #[test]
    fn specialize_drops_t_term_at_zero() {
        let f = parse_family("z2^2+z3^2+t*z1^2*z2^2*z3^2").unwrap();
        let f0 = f.specialize_t(&q_int(0));
        assert_eq!(f0.term_count(), 2);
        assert!(f0.coefficient(&Expo(vec![2, 2, 2])).is_zero());
        let f1 = f.specialize_t(&q_int(1));
        assert_eq!(f1.term_count(), 3);
        assert_eq!(
            f1.coefficient(&Expo(vec![2, 2, 2])).as_constant().unwrap(),
            q_int(1)
        );
    }

    #[test]
    fn specialize_evaluates_coefficients() {
        let f = ex1();
        let g = f.germ_at(&q_ratio(1, 2));
        assert_eq!(g.coefficient(&Expo(vec![2, 4, 3])), q_ratio(1, 2));
    }

    #[test]
    fn add_pure_power_inserts_and_merges() {
        let f = parse_family("z2^4+z3^3").unwrap();
        let g = f.add_pure_power(1, 5);
        assert_eq!(
            g.coefficient(&Expo(vec![5, 0, 0])).as_constant().unwrap(),
            q_int(1)
        );

        let f = parse_family("z1^5+z2^2").unwrap();
        let g = f.add_pure_power(1, 5);
        assert_eq!(
            g.coefficient(&Expo(vec![5, 0])).as_constant().unwrap(),
            q_int(2)
        );

        let f = parse_family("z2^2+z3^2").unwrap();
        let g = f.add_pure_power(2, 2);
        assert_eq!(
            g.coefficient(&Expo(vec![0, 2, 0])).as_constant().unwrap(),
            q_int(2)
        );
    }

    #[test]
    fn partials_power_rule() {
        let f = parse_family("t*z1^2*z2^2*z3^2").unwrap();
        let d1 = f.partial_z(1);
        let c = d1.coefficient(&Expo(vec![1, 2, 2]));
        assert_eq!(c.coeffs(), &[q_int(0), q_int(2)]); // 2t
    }

    #[test]
    fn partial_t_drops_constant_coefficients() {
        let f = parse_family("z2^2+z3^2+t*z1*z2^2").unwrap();
        let dt = f.partial_t();
        assert_eq!(dt.term_count(), 1);
        assert_eq!(
            dt.coefficient(&Expo(vec![1, 2, 0])).as_constant().unwrap(),
            q_int(1)
        );
    }

    #[test]
    fn specialize_commutes_with_z_partials() {
        let f = ex1();
        let t0 = q_ratio(-3, 7);
        for j in 1..=3 {
            let a = f.partial_z(j).specialize_t(&t0);
            let b = f.specialize_t(&t0).partial_z(j);
            assert_eq!(a.term_map(), b.term_map());
        }
    }

    #[test]
    fn evaluate_cancels_and_scales() {
        let f = parse_family("z2^2+z3^2").unwrap();
        let p = ComplexPoint::new(
            Complex64::new(0.0, 0.0),
            vec![
                Complex64::new(5.0, -1.0),
                Complex64::new(0.0, 1.0),
                Complex64::new(1.0, 0.0),
            ],
        )
        .unwrap();
        let v = f.evaluate(&p).unwrap();
        assert!(v.norm() < 1e-15);

        let f = parse_family("vars t, z1, z2, z3\nf = t*z1*z2^2").unwrap();
        let p = ComplexPoint::new(
            Complex64::new(2.0, 0.0),
            vec![
                Complex64::new(1.0, 0.0),
                Complex64::new(3.0, 0.0),
                Complex64::new(0.0, 0.0),
            ],
        )
        .unwrap();
        assert!((f.evaluate(&p).unwrap() - Complex64::new(18.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn family_vanishes_on_singular_axis() {
        let f = ex1();
        let p = ComplexPoint::new(
            Complex64::new(0.3, 0.7),
            vec![
                Complex64::new(-2.5, 1.1),
                Complex64::new(0.0, 0.0),
                Complex64::new(0.0, 0.0),
            ],
        )
        .unwrap();
        assert_eq!(f.evaluate(&p).unwrap(), Complex64::new(0.0, 0.0));
        for d in f.partials() {
            assert_eq!(d.evaluate(&p).unwrap(), Complex64::new(0.0, 0.0));
        }
    }

    #[test]
    fn substitute_var_reduces_arity() {
        let g = ex1().germ_at(&q_int(1));
        let s = g.substitute_var(1, &q_ratio(1, 3));
        assert_eq!(s.n(), 2);
        assert_eq!(s.coefficient(&Expo(vec![4, 3])), q_ratio(1, 9));
        assert_eq!(s.coefficient(&Expo(vec![4, 0])), q_int(1));
    }
}
