//! Exact asymptotics for finite sums of power-log monomials
//! `c * rho^p * L^q` with `L = log(1/rho)`.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_rational::Rational64;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::CoreError;
use crate::internal::Idempotent;
use crate::ternary::Ternary;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Term {
    pub coeff: f64,
    pub p: Rational64,
    pub q: Rational64,
}

impl Term {
    pub fn new(coeff: f64, p: Rational64, q: Rational64) -> Self {
        Term { coeff, p, q }
    }

    pub fn eval(&self, eps: f64) -> f64 {
        let l = (1.0 / eps).ln();
        let mut v = self.coeff;
        if !self.p.is_zero() {
            v *= eps.powf(rat_f64(self.p));
        }
        if !self.q.is_zero() {
            v *= l.powf(rat_f64(self.q));
        }
        v
    }

    /// Growth order as eps -> 0: larger means the term dominates.
    fn dominance(&self, other: &Term) -> Ordering {
        other.p.cmp(&self.p).then(self.q.cmp(&other.q))
    }
}

pub(crate) fn rat_f64(r: Rational64) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Sum of power-log monomials, kept sorted with the dominant term first,
/// optionally glued with idempotent-weighted pieces.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ScaleExpr {
    terms: Vec<Term>,
    glue: Vec<(Idempotent, ScaleExpr)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScaleOrdering {
    Lt,
    Eq,
    Gt,
}

/// Scale classes of a quantity; see the glossary in the README.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScaleFlags {
    pub infinitesimal: Ternary,
    pub moderate: Ternary,
    pub negligible: Ternary,
    pub fast_scale: Ternary,
    pub slow_scale: Ternary,
    pub fast_infinitesimal: Ternary,
    pub slow_infinitesimal: Ternary,
}

impl ScaleFlags {
    pub fn undecidable() -> Self {
        let u = Ternary::Undecidable;
        ScaleFlags {
            infinitesimal: u,
            moderate: u,
            negligible: u,
            fast_scale: u,
            slow_scale: u,
            fast_infinitesimal: u,
            slow_infinitesimal: u,
        }
    }

    pub(crate) fn zero() -> Self {
        use Ternary::*;
        ScaleFlags {
            infinitesimal: Yes,
            moderate: Yes,
            negligible: Yes,
            fast_scale: No,
            slow_scale: Yes,
            fast_infinitesimal: Yes,
            slow_infinitesimal: No,
        }
    }

    /// Flags of a nonzero quantity whose leading behaviour is `rho^p L^q`,
    /// where `p` and `q` are only known by sign.
    pub(crate) fn leading(p_sign: i8, q_sign: i8) -> Self {
        use Ternary::*;
        let b = Ternary::from_bool;
        let infinitesimal = p_sign > 0 || (p_sign == 0 && q_sign < 0);
        ScaleFlags {
            infinitesimal: b(infinitesimal),
            moderate: Yes,
            negligible: No,
            fast_scale: b(p_sign < 0),
            slow_scale: b(p_sign >= 0),
            fast_infinitesimal: b(p_sign > 0),
            slow_infinitesimal: b(p_sign == 0 && q_sign < 0),
        }
    }

    pub fn as_pairs(&self) -> [(&'static str, Ternary); 7] {
        [
            ("infinitesimal", self.infinitesimal),
            ("moderate", self.moderate),
            ("negligible", self.negligible),
            ("fast_scale", self.fast_scale),
            ("slow_scale", self.slow_scale),
            ("fast_infinitesimal", self.fast_infinitesimal),
            ("slow_infinitesimal", self.slow_infinitesimal),
        ]
    }
}

impl ScaleExpr {
    pub fn zero() -> Self {
        ScaleExpr::default()
    }

    pub fn monomial(coeff: f64, p: Rational64, q: Rational64) -> Self {
        ScaleExpr::from_terms([Term::new(coeff, p, q)])
    }

    /// `rho^p` for integer or rational `p = num/den`.
    pub fn rho(num: i64, den: i64) -> Self {
        ScaleExpr::monomial(1.0, Rational64::new(num, den), Rational64::zero())
    }

    /// `L^q` with `L = log(1/rho)`.
    pub fn log_inv(num: i64, den: i64) -> Self {
        ScaleExpr::monomial(1.0, Rational64::zero(), Rational64::new(num, den))
    }

    pub fn constant(c: f64) -> Self {
        ScaleExpr::monomial(c, Rational64::zero(), Rational64::zero())
    }

    /// Builds a normalized expression: like terms merged, zeros dropped,
    /// dominant term first.
    pub fn from_terms<I: IntoIterator<Item = Term>>(terms: I) -> Self {
        let mut out: Vec<Term> = Vec::new();
        for t in terms {
            match out.iter_mut().find(|o| o.p == t.p && o.q == t.q) {
                Some(o) => o.coeff += t.coeff,
                None => out.push(t),
            }
        }
        out.retain(|t| t.coeff != 0.0);
        out.sort_by(|a, b| a.dominance(b).reverse());
        ScaleExpr { terms: out, glue: Vec::new() }
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn glue(&self) -> &[(Idempotent, ScaleExpr)] {
        &self.glue
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty() && self.glue.is_empty()
    }

    pub fn is_piecewise(&self) -> bool {
        !self.glue.is_empty()
    }

    pub fn dominant(&self) -> Option<&Term> {
        self.terms.first()
    }

    /// Adds an idempotent-weighted piece: the result equals `self + e * piece`.
    pub fn with_glue(mut self, e: Idempotent, piece: ScaleExpr) -> Self {
        self.glue.push((e, piece));
        self
    }

    pub fn add(&self, other: &ScaleExpr) -> ScaleExpr {
        let mut r = ScaleExpr::from_terms(self.terms.iter().chain(other.terms.iter()).copied());
        r.glue = self.glue.iter().chain(other.glue.iter()).cloned().collect();
        r
    }

    pub fn scale(&self, c: f64) -> ScaleExpr {
        let mut r = ScaleExpr::from_terms(self.terms.iter().map(|t| Term { coeff: t.coeff * c, ..*t }));
        r.glue = self.glue.iter().map(|(e, g)| (e.clone(), g.scale(c))).collect();
        r
    }

    pub fn neg(&self) -> ScaleExpr {
        self.scale(-1.0)
    }

    pub fn sub(&self, other: &ScaleExpr) -> ScaleExpr {
        self.add(&other.neg())
    }

    /// Product of two monomial sums.
    pub fn mul(&self, other: &ScaleExpr) -> Result<ScaleExpr, CoreError> {
        if self.is_piecewise() || other.is_piecewise() {
            return Err(CoreError::Piecewise);
        }
        let mut prods = Vec::with_capacity(self.terms.len() * other.terms.len());
        for a in &self.terms {
            for b in &other.terms {
                prods.push(Term::new(a.coeff * b.coeff, a.p + b.p, a.q + b.q));
            }
        }
        Ok(ScaleExpr::from_terms(prods))
    }

    /// Value at a concrete `eps`, resolving glue pieces through their
    /// idempotents.
    pub fn eval(&self, eps: f64) -> Result<f64, CoreError> {
        if !(eps > 0.0 && eps <= 1.0) {
            return Err(CoreError::EpsOutOfRange(eps));
        }
        let mut v = 0.0;
        for t in &self.terms {
            if eps == 1.0 && t.q.is_negative() {
                return Err(CoreError::LogPole);
            }
            v += t.eval(eps);
        }
        for (e, g) in &self.glue {
            if e.at(eps)? {
                v += g.eval(eps)?;
            }
        }
        Ok(v)
    }

    /// Eventual order of `self` against `other` as eps -> 0.
    pub fn compare(&self, other: &ScaleExpr) -> Result<ScaleOrdering, CoreError> {
        if self.is_piecewise() || other.is_piecewise() {
            return Err(CoreError::Piecewise);
        }
        let d = self.sub(other);
        Ok(match d.dominant() {
            None => ScaleOrdering::Eq,
            Some(t) if t.coeff > 0.0 => ScaleOrdering::Gt,
            Some(_) => ScaleOrdering::Lt,
        })
    }

    /// Exact scale flags, decided from the dominant term.
    pub fn classify(&self) -> Result<ScaleFlags, CoreError> {
        if self.is_piecewise() {
            return Err(CoreError::Piecewise);
        }
        Ok(match self.dominant() {
            None => ScaleFlags::zero(),
            Some(t) => ScaleFlags::leading(sign(t.p), sign(t.q)),
        })
    }
}

fn sign(r: Rational64) -> i8 {
    if r.is_positive() {
        1
    } else if r.is_negative() {
        -1
    } else {
        0
    }
}

fn fmt_rat(r: Rational64) -> String {
    if *r.denom() == 1 {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

impl fmt::Display for ScaleExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            f.write_str("0")?;
        }
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "{}*rho^({})*L^({})", t.coeff, fmt_rat(t.p), fmt_rat(t.q))?;
        }
        for (e, g) in &self.glue {
            write!(f, " + [{e}]*({g})")?;
        }
        Ok(())
    }
}

impl Serialize for ScaleExpr {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl FromStr for ScaleExpr {
    type Err = CoreError;

    fn from_str(s: &str) -> Result<Self, CoreError> {
        Parser { src: s.as_bytes(), pos: 0 }.expr()
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn err<T>(&self, msg: impl Into<String>) -> Result<T, CoreError> {
        Err(CoreError::ScaleParse { col: self.pos + 1, msg: msg.into() })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(mut self) -> Result<ScaleExpr, CoreError> {
        let mut terms = Vec::new();
        let mut negate = self.eat(b'-');
        loop {
            let mut t = self.term()?;
            if negate {
                t.coeff = -t.coeff;
            }
            terms.push(t);
            if self.eat(b'+') {
                negate = self.eat(b'-');
            } else if self.eat(b'-') {
                negate = true;
            } else {
                break;
            }
        }
        if self.peek().is_some() {
            return self.err("unexpected trailing input");
        }
        Ok(ScaleExpr::from_terms(terms))
    }

    fn term(&mut self) -> Result<Term, CoreError> {
        let mut t = Term::new(1.0, Rational64::zero(), Rational64::zero());
        let mut first = true;
        loop {
            match self.peek() {
                Some(c) if c.is_ascii_digit() || c == b'.' => {
                    let (num, den) = self.decimal()?;
                    t.coeff *= num as f64 / den as f64;
                }
                Some(b'r') if self.src[self.pos..].starts_with(b"rho") => {
                    self.pos += 3;
                    t.p += self.exponent()?;
                }
                Some(b'L') => {
                    self.pos += 1;
                    t.q += self.exponent()?;
                }
                _ if first => return self.err("expected a coefficient, `rho` or `L`"),
                _ => return self.err("expected a factor after `*`"),
            }
            first = false;
            if !self.eat(b'*') {
                return Ok(t);
            }
        }
    }

    fn exponent(&mut self) -> Result<Rational64, CoreError> {
        if !self.eat(b'^') {
            return Ok(Rational64::from_integer(1));
        }
        let paren = self.eat(b'(');
        let neg = self.eat(b'-');
        let (n, d) = self.decimal()?;
        let mut r = Rational64::new(n, d);
        if self.eat(b'/') {
            let (n2, d2) = self.decimal()?;
            if n2 == 0 {
                return self.err("zero denominator");
            }
            r /= Rational64::new(n2, d2);
        }
        if neg {
            r = -r;
        }
        if paren && !self.eat(b')') {
            return self.err("expected `)`");
        }
        Ok(r)
    }

    /// Unsigned decimal literal as an exact fraction.
    fn decimal(&mut self) -> Result<(i64, i64), CoreError> {
        self.skip_ws();
        let start = self.pos;
        let (mut num, mut den, mut seen_dot, mut digits) = (0i64, 1i64, false, 0);
        while let Some(&c) = self.src.get(self.pos) {
            if c.is_ascii_digit() {
                num = num
                    .checked_mul(10)
                    .and_then(|n| n.checked_add((c - b'0') as i64))
                    .ok_or(CoreError::ScaleParse { col: start + 1, msg: "number too long".into() })?;
                if seen_dot {
                    den = den
                        .checked_mul(10)
                        .ok_or(CoreError::ScaleParse { col: start + 1, msg: "number too long".into() })?;
                }
                digits += 1;
            } else if c == b'.' && !seen_dot {
                seen_dot = true;
            } else {
                break;
            }
            self.pos += 1;
        }
        if digits == 0 {
            self.pos = start;
            return self.err("expected a number");
        }
        Ok((num, den))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use Ternary::*;

    fn r(n: i64, d: i64) -> Rational64 {
        Rational64::new(n, d)
    }

    #[test]
    fn eval_examples() {
        assert!((ScaleExpr::rho(2, 1).eval(0.1).unwrap() - 0.01).abs() < 1e-15);
        assert_eq!(ScaleExpr::zero().eval(0.5).unwrap(), 0.0);
        let e = ScaleExpr::rho(-1, 1).add(&ScaleExpr::rho(1, 1));
        assert_eq!(e.eval(0.25).unwrap(), 4.25);
        assert!(matches!(e.eval(0.0), Err(CoreError::EpsOutOfRange(_))));
        assert!(matches!(e.eval(1.5), Err(CoreError::EpsOutOfRange(_))));
        assert!(matches!(ScaleExpr::log_inv(-1, 1).eval(1.0), Err(CoreError::LogPole)));
    }

    #[test]
    fn terms_sorted_and_merged() {
        let e: ScaleExpr = "rho^(2) + 3*rho^(-1) + L^(2) + L^(-1) + 2*rho^(2)".parse().unwrap();
        let keys: Vec<_> = e.terms().iter().map(|t| (t.p, t.q, t.coeff)).collect();
        assert_eq!(
            keys,
            vec![(r(-1, 1), r(0, 1), 3.0), (r(0, 1), r(2, 1), 1.0), (r(0, 1), r(-1, 1), 1.0), (r(2, 1), r(0, 1), 3.0)]
        );
        assert!(ScaleExpr::rho(1, 1).sub(&ScaleExpr::rho(1, 1)).terms().is_empty());
    }

    #[test]
    fn compare_examples() {
        let rho = ScaleExpr::rho(1, 1);
        assert_eq!(rho.compare(&ScaleExpr::rho(2, 1)).unwrap(), ScaleOrdering::Gt);
        assert_eq!(rho.compare(&rho).unwrap(), ScaleOrdering::Eq);
        let a = ScaleExpr::log_inv(-1, 1);
        let b = ScaleExpr::rho(1, 10);
        assert_eq!(a.compare(&b).unwrap(), ScaleOrdering::Gt);
        assert_eq!(b.compare(&a).unwrap(), ScaleOrdering::Lt);
    }

    #[test]
    fn compare_log_vs_small_power_numerically() {
        // rho^0.1 L -> 0 only beyond eps ~ 3e-16, so the dyadic 4..14 ladder still
        // shows the pre-asymptotic order; check far down instead.
        for j in 4..=14 {
            let eps = 2f64.powi(-j);
            assert!(1.0 / (1.0 / eps).ln() < eps.powf(0.1), "j = {j}");
        }
        for eps in [1e-20f64, 1e-40, 1e-80, 1e-160] {
            assert!(1.0 / (1.0 / eps).ln() > eps.powf(0.1));
        }
    }

    #[test]
    fn classify_examples() {
        let f = ScaleExpr::rho(1, 2).classify().unwrap();
        assert_eq!((f.infinitesimal, f.fast_infinitesimal, f.slow_infinitesimal), (Yes, Yes, No));
        let f = ScaleExpr::log_inv(-1, 1).classify().unwrap();
        assert_eq!((f.infinitesimal, f.slow_infinitesimal, f.fast_infinitesimal), (Yes, Yes, No));
        let f: ScaleFlags = "3*rho^(-2)".parse::<ScaleExpr>().unwrap().classify().unwrap();
        assert_eq!((f.moderate, f.fast_scale, f.infinitesimal), (Yes, Yes, No));
        let z = ScaleExpr::zero().classify().unwrap();
        assert_eq!((z.negligible, z.moderate, z.infinitesimal, z.slow_infinitesimal), (Yes, Yes, Yes, No));
    }

    #[test]
    fn slow_infinitesimal_bounds() {
        // rho^a <= 1/L <= a eventually; a = 1 already holds on the ladder
        for j in 4..=14 {
            let eps = 2f64.powi(-j);
            let v = 1.0 / (1.0 / eps).ln();
            assert!(eps <= v && v <= 1.0, "j = {j}");
        }
        for eps in [1e-20f64, 1e-40, 1e-80] {
            let v = 1.0 / (1.0f64 / eps).ln();
            assert!(eps.powf(0.1) <= v && v <= 0.1);
        }
    }

    #[test]
    fn piecewise_rejected() {
        let e = ScaleExpr::rho(1, 1).with_glue(Idempotent::Ones, ScaleExpr::rho(2, 1));
        assert_eq!(e.classify(), Err(CoreError::Piecewise));
        assert_eq!(e.compare(&ScaleExpr::zero()), Err(CoreError::Piecewise));
        assert_eq!(e.eval(0.5).unwrap(), 0.75);
    }

    #[test]
    fn glue_resolves_threshold_idempotent() {
        let e = ScaleExpr::zero().with_glue(Idempotent::threshold(0.01), ScaleExpr::constant(1.0));
        assert_eq!(e.eval(0.5).unwrap(), 0.0);
        assert_eq!(e.eval(0.001).unwrap(), 1.0);
    }

    #[test]
    fn parse_and_display() {
        assert!("c".parse::<ScaleExpr>().is_err());
        let e: ScaleExpr = "2.5*rho^(1/2)*L^(-3) - rho".parse().unwrap();
        assert_eq!(e.terms()[0].p, r(1, 2));
        assert_eq!(e.terms()[0].q, r(-3, 1));
        assert_eq!(e.terms()[1].coeff, -1.0);
        let back: ScaleExpr = e.to_string().parse().unwrap();
        assert_eq!(back, e);
        let e: ScaleExpr = "rho^(0.5)".parse().unwrap();
        assert_eq!(e.terms()[0].p, r(1, 2));
        assert!("rho^(".parse::<ScaleExpr>().is_err());
        assert!("3*".parse::<ScaleExpr>().is_err());
        assert!("rho^(1/0)".parse::<ScaleExpr>().is_err());
        assert_eq!("0".parse::<ScaleExpr>().unwrap(), ScaleExpr::zero());
    }

    #[test]
    fn mul_adds_exponents() {
        let a: ScaleExpr = "2*rho^(1)*L^(1)".parse().unwrap();
        let b: ScaleExpr = "rho^(-1/2)".parse().unwrap();
        let p = a.mul(&b).unwrap();
        assert_eq!(p.terms(), &[Term::new(2.0, r(1, 2), r(1, 1))]);
    }
}
