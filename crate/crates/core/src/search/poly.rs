//! Dense univariate polynomials and rational functions over Q.

use std::fmt;

use rug::{Integer, Rational};

/// Coefficients in ascending degree, without trailing zeros.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Poly(Vec<Rational>);

impl Poly {
    pub fn zero() -> Self {
        Poly(Vec::new())
    }

    pub fn constant(c: Rational) -> Self {
        Poly(vec![c]).trimmed()
    }

    /// The variable `t`.
    pub fn t() -> Self {
        Poly(vec![Rational::new(), Rational::from(1)])
    }

    pub fn from_coeffs(c: Vec<Rational>) -> Self {
        Poly(c).trimmed()
    }

    pub fn from_ints(c: &[i64]) -> Self {
        Poly(c.iter().map(|&x| Rational::from(x)).collect()).trimmed()
    }

    fn trimmed(mut self) -> Self {
        while self.0.last().is_some_and(|c| *c == 0) {
            self.0.pop();
        }
        self
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.0.len().checked_sub(1)
    }

    pub fn leading(&self) -> Option<&Rational> {
        self.0.last()
    }

    pub fn is_constant(&self) -> bool {
        self.0.len() <= 1
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        let mut acc = Rational::new();
        for c in self.0.iter().rev() {
            acc *= x;
            acc += c;
        }
        acc
    }

    pub fn add(&self, o: &Poly) -> Poly {
        let n = self.0.len().max(o.0.len());
        let mut out = vec![Rational::new(); n];
        for (i, c) in self.0.iter().enumerate() {
            out[i] += c;
        }
        for (i, c) in o.0.iter().enumerate() {
            out[i] += c;
        }
        Poly(out).trimmed()
    }

    pub fn neg(&self) -> Poly {
        Poly(self.0.iter().map(|c| Rational::from(-c)).collect())
    }

    pub fn sub(&self, o: &Poly) -> Poly {
        self.add(&o.neg())
    }

    pub fn scale(&self, k: &Rational) -> Poly {
        Poly(self.0.iter().map(|c| Rational::from(c * k)).collect()).trimmed()
    }

    pub fn mul(&self, o: &Poly) -> Poly {
        if self.is_zero() || o.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![Rational::new(); self.0.len() + o.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            if *a == 0 {
                continue;
            }
            for (j, b) in o.0.iter().enumerate() {
                out[i + j] += Rational::from(a * b);
            }
        }
        Poly(out).trimmed()
    }

    pub fn pow(&self, e: u32) -> Poly {
        let mut out = Poly::constant(Rational::from(1));
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                out = out.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        out
    }

    /// Quotient and remainder.
    ///
    /// # Panics
    /// If `d` is zero.
    pub fn div_rem(&self, d: &Poly) -> (Poly, Poly) {
        let dl = d.leading().expect("division by the zero polynomial").clone();
        let dd = d.0.len() - 1;
        let mut r = self.0.clone();
        if r.len() <= dd {
            return (Poly::zero(), self.clone());
        }
        let mut q = vec![Rational::new(); r.len() - dd];
        for i in (0..q.len()).rev() {
            let c = Rational::from(&r[i + dd] / &dl);
            if c != 0 {
                for (j, b) in d.0.iter().enumerate() {
                    r[i + j] -= Rational::from(&c * b);
                }
            }
            q[i] = c;
        }
        r.truncate(dd);
        (Poly(q).trimmed(), Poly(r).trimmed())
    }

    pub fn monic(&self) -> Poly {
        match self.leading() {
            None => Poly::zero(),
            Some(l) => self.scale(&Rational::from(l.recip_ref())),
        }
    }

    /// Monic greatest common divisor.
    pub fn gcd(&self, o: &Poly) -> Poly {
        let (mut a, mut b) = (self.monic(), o.monic());
        while !b.is_zero() {
            let r = a.div_rem(&b).1;
            a = b;
            b = r.monic();
        }
        a
    }

    pub fn derivative(&self) -> Poly {
        Poly(
            self.0
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| Rational::from(c * i as u32))
                .collect(),
        )
        .trimmed()
    }

    /// Squarefree part, monic.
    pub fn squarefree(&self) -> Poly {
        if self.is_constant() {
            return self.monic();
        }
        let g = self.gcd(&self.derivative());
        self.div_rem(&g).0.monic()
    }

    /// Primitive integer multiple with positive leading coefficient.
    pub fn primitive_integer(&self) -> Vec<Integer> {
        let l = self.0.iter().fold(Integer::from(1), |acc, c| acc.lcm(c.denom()));
        let ints: Vec<Integer> = self
            .0
            .iter()
            .map(|c| c.numer() * Integer::from(&l / c.denom()))
            .collect();
        let mut g = ints.iter().fold(Integer::new(), |g, x| g.gcd(x));
        if g == 0 {
            return ints;
        }
        if ints.last().is_some_and(|x| *x < 0) {
            g = -g;
        }
        ints.into_iter().map(|x| x / &g).collect()
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.0.iter().enumerate().rev() {
            if *c == 0 {
                continue;
            }
            let neg = *c < 0;
            let abs = Rational::from(c.abs_ref());
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { '-' } else { '+' })?;
            }
            first = false;
            let coef = if abs.denom() == &1 { abs.to_string() } else { format!("({abs})") };
            match (i, abs == 1) {
                (0, _) => write!(f, "{coef}")?,
                (1, true) => write!(f, "t")?,
                (1, false) => write!(f, "{coef}*t")?,
                (_, true) => write!(f, "t^{i}")?,
                (_, false) => write!(f, "{coef}*t^{i}")?,
            }
        }
        Ok(())
    }
}

/// `num / den` in lowest terms with `den` monic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RatFunc {
    num: Poly,
    den: Poly,
}

impl RatFunc {
    /// `None` if `den` is zero.
    pub fn new(num: Poly, den: Poly) -> Option<Self> {
        if den.is_zero() {
            return None;
        }
        if num.is_zero() {
            return Some(Self::constant(Rational::new()));
        }
        let g = num.gcd(&den);
        let (mut n, mut d) = (num.div_rem(&g).0, den.div_rem(&g).0);
        let l = Rational::from(d.leading().expect("nonzero").recip_ref());
        n = n.scale(&l);
        d = d.scale(&l);
        Some(Self { num: n, den: d })
    }

    pub fn constant(c: Rational) -> Self {
        Self {
            num: Poly::constant(c),
            den: Poly::constant(Rational::from(1)),
        }
    }

    pub fn from_poly(p: Poly) -> Self {
        Self {
            num: p,
            den: Poly::constant(Rational::from(1)),
        }
    }

    pub fn t() -> Self {
        Self::from_poly(Poly::t())
    }

    pub fn num(&self) -> &Poly {
        &self.num
    }

    pub fn den(&self) -> &Poly {
        &self.den
    }

    pub fn is_constant(&self) -> bool {
        self.num.is_constant() && self.den.is_constant()
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// Degree as a map P^1 -> P^1: `max(deg num, deg den)`.
    pub fn map_degree(&self) -> usize {
        self.num.degree().unwrap_or(0).max(self.den.degree().unwrap_or(0))
    }

    /// `None` at a pole.
    pub fn eval(&self, x: &Rational) -> Option<Rational> {
        let d = self.den.eval(x);
        if d == 0 {
            return None;
        }
        Some(self.num.eval(x) / d)
    }

    pub fn add(&self, o: &RatFunc) -> RatFunc {
        let n = self.num.mul(&o.den).add(&o.num.mul(&self.den));
        RatFunc::new(n, self.den.mul(&o.den)).expect("nonzero denominator")
    }

    pub fn neg(&self) -> RatFunc {
        Self {
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }

    pub fn sub(&self, o: &RatFunc) -> RatFunc {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &RatFunc) -> RatFunc {
        RatFunc::new(self.num.mul(&o.num), self.den.mul(&o.den)).expect("nonzero denominator")
    }

    /// `None` when dividing by zero.
    pub fn div(&self, o: &RatFunc) -> Option<RatFunc> {
        if o.is_zero() {
            return None;
        }
        RatFunc::new(self.num.mul(&o.den), self.den.mul(&o.num))
    }

    /// `None` for a negative power of zero.
    pub fn pow(&self, e: i32) -> Option<RatFunc> {
        let base = if e < 0 {
            RatFunc::constant(Rational::from(1)).div(self)?
        } else {
            self.clone()
        };
        let k = e.unsigned_abs();
        Some(Self {
            num: base.num.pow(k),
            den: base.den.pow(k),
        })
    }

    /// `J(f) = 256 (f^2 - f + 1)^3 / (f^2 (f - 1)^2)`; `None` if `f` is constantly 0 or 1.
    pub fn j_compose(&self) -> Option<RatFunc> {
        // With f = n/d: 256 (n^2 - n d + d^2)^3 / (n^2 (n - d)^2 d^2).
        let (n, d) = (&self.num, &self.den);
        let inner = n.mul(n).sub(&n.mul(d)).add(&d.mul(d));
        let num = inner.pow(3).scale(&Rational::from(256));
        let nd = n.sub(d);
        let den = n.mul(n).mul(&nd.mul(&nd)).mul(&d.mul(d));
        RatFunc::new(num, den)
    }
}

impl fmt::Display for RatFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_constant() {
            write!(f, "{}", self.num)
        } else {
            write!(f, "({}) / ({})", self.num, self.den)
        }
    }
}
