//! Exact scalar arithmetic for cost values.
//!
//! Costs of the form `|x - y|^p` with rational coordinates and rational
//! `p` are sums of terms `coeff * base^(1/index)` with rational
//! coefficients and positive integer bases.  [`CostValue`] stores such
//! sums in a canonical form that makes equality and sign decidable:
//!
//! * every term is index-minimal: the base is not a perfect `q`-th power
//!   for any prime `q` dividing the index (otherwise the root folds away);
//! * obvious perfect-power content is moved into the coefficient
//!   (`8^(1/2)` is stored as `2 * 2^(1/2)`);
//! * two terms with the same index whose bases differ by a perfect
//!   `index`-th power ratio are merged into one.
//!
//! In this form distinct radicals lie in distinct rational cosets of the
//! positive reals and are therefore linearly independent over the
//! rationals, so a canonical value is zero exactly when it has no terms
//! and no rational part.  Signs of nonzero values are decided by interval
//! refinement with integer root bounds, which terminates because the
//! symbolic zero test has already ruled out zero.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::rational::{format_rational, Rational};

const SMALL_PRIMES: [u32; 25] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89,
    97,
];

/// Bases up to this bound are fully factored by trial division, so their
/// canonical form is unique and coset-equal radicals collide structurally.
const FULL_FACTOR_LIMIT: u64 = 10_000_000_000;

/// `index`-th root of `base`, with `base >= 2` not a perfect `q`-th power
/// for any prime `q` dividing `index >= 2`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
struct Radical {
    index: u32,
    base: BigUint,
}

/// Exact value `rat + sum(coeff * base^(1/index))`.
#[derive(Debug, Clone)]
pub struct CostValue {
    rat: Rational,
    terms: BTreeMap<Radical, Rational>,
}

fn exact_nth_root(n: &BigUint, k: u32) -> Option<BigUint> {
    let r = n.nth_root(k);
    if r.pow(k) == *n {
        Some(r)
    } else {
        None
    }
}

fn prime_factors(mut k: u32) -> Vec<u32> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= k {
        if k.is_multiple_of(p) {
            out.push(p);
            while k.is_multiple_of(p) {
                k /= p;
            }
        }
        p += 1;
    }
    if k > 1 {
        out.push(k);
    }
    out
}

/// Extracts `index`-th power content from a fully factorable base:
/// returns `(content, power_free)` with `base = content^index * power_free`
/// and no prime of `power_free` having multiplicity `>= index`.
fn factor_content(base: u64, index: u32) -> (u64, u64) {
    let mut content = 1u64;
    let mut power_free = 1u64;
    let mut rem = base;
    let mut d = 2u64;
    while d * d <= rem {
        if rem.is_multiple_of(d) {
            let mut mult = 0u32;
            while rem.is_multiple_of(d) {
                rem /= d;
                mult += 1;
            }
            content *= d.pow(mult / index);
            power_free *= d.pow(mult % index);
        }
        d += 1;
    }
    // Remaining prime factor has multiplicity one.
    power_free *= rem;
    (content, power_free)
}

/// Rewrites `base^(1/index)` as `factor * new_base^(1/new_index)` in
/// canonical form.  Returns `(factor, None)` when the root is rational.
///
/// For bases up to [`FULL_FACTOR_LIMIT`] the returned base is exactly
/// `index`-th-power-free, so equal cosets produce equal bases.  Larger
/// bases get best-effort small-prime extraction and rely on the ratio
/// test in `add_term` for coset merging.
fn reduce_radical(mut base: BigUint, mut index: u32) -> (Rational, Option<Radical>) {
    assert!(index >= 1, "radical index must be positive");
    assert!(!base.is_zero(), "radical base must be positive");
    let mut factor = Rational::one();
    loop {
        // Fold perfect prime-power content of the index.
        let mut folded = true;
        while folded && index > 1 {
            folded = false;
            for q in prime_factors(index) {
                if let Some(root) = exact_nth_root(&base, q) {
                    base = root;
                    index /= q;
                    folded = true;
                    break;
                }
            }
        }
        if index == 1 {
            factor *= Rational::from(BigInt::from(base));
            return (factor, None);
        }
        if let Some(small) = base.to_u64().filter(|&b| b <= FULL_FACTOR_LIMIT) {
            let (content, power_free) = factor_content(small, index);
            factor *= Rational::from(BigInt::from(content));
            // Power-free bases cannot fold further.
            return (factor, Some(Radical { index, base: BigUint::from(power_free) }));
        }
        // Pull small perfect `index`-th power divisors into the factor.
        let mut extracted = false;
        for p in SMALL_PRIMES {
            let p_big = BigUint::from(p);
            let mut mult = 0u32;
            let mut rest = base.clone();
            while (&rest % &p_big).is_zero() {
                rest /= &p_big;
                mult += 1;
            }
            let pulls = mult / index;
            if pulls > 0 {
                factor *= Rational::from(BigInt::from(p_big.pow(pulls)));
                base /= BigUint::from(p).pow(pulls * index);
                extracted = true;
            }
        }
        if !extracted {
            return (factor, Some(Radical { index, base }));
        }
        // Extraction can expose new perfect-power structure; loop again.
    }
}

thread_local! {
    /// Highest-precision floor roots computed so far, keyed by radical.
    /// Costs repeat the same handful of radicals, so sign refinement is
    /// usually a cache hit plus a shift.
    static ROOT_CACHE: std::cell::RefCell<std::collections::HashMap<(u32, BigUint), (u32, BigUint)>> =
        std::cell::RefCell::new(std::collections::HashMap::new());
}

/// `floor(base^(1/index) * 2^bits)`, memoized per radical.
fn root_floor(rad: &Radical, bits: u32) -> BigUint {
    ROOT_CACHE.with(|cache| {
        let mut map = cache.borrow_mut();
        let key = (rad.index, rad.base.clone());
        if let Some((have_bits, root)) = map.get(&key) {
            if *have_bits >= bits {
                // floor(floor(r * 2^B) / 2^(B - b)) = floor(r * 2^b).
                return root >> ((have_bits - bits) as usize);
            }
        }
        let shift = (rad.index as usize) * (bits as usize);
        let root = (&rad.base << shift).nth_root(rad.index);
        map.insert(key, (bits, root.clone()));
        root
    })
}

/// `Some(s)` when `b1^(1/k) == s * b2^(1/k)` with rational `s`.
fn coset_ratio(b1: &BigUint, b2: &BigUint, k: u32) -> Option<Rational> {
    if b1 == b2 {
        return Some(Rational::one());
    }
    let g = b1.gcd(b2);
    let u = b1 / &g;
    let v = b2 / &g;
    let ur = exact_nth_root(&u, k)?;
    let vr = exact_nth_root(&v, k)?;
    Some(Rational::new(BigInt::from(ur), BigInt::from(vr)))
}

impl CostValue {
    pub fn zero() -> Self {
        CostValue {
            rat: Rational::zero(),
            terms: BTreeMap::new(),
        }
    }

    pub fn from_rational(value: Rational) -> Self {
        CostValue {
            rat: value,
            terms: BTreeMap::new(),
        }
    }

    pub fn from_int(value: i64) -> Self {
        Self::from_rational(Rational::from(BigInt::from(value)))
    }

    /// `value^(1/index)` for `value >= 0`.
    pub fn nth_root(value: &Rational, index: u32) -> Result<Self> {
        if index == 0 {
            return Err(Error::InvalidP("root index must be positive".into()));
        }
        if value.is_negative() {
            return Err(Error::Validation(format!(
                "cannot take even or real root of negative value {}",
                format_rational(value)
            )));
        }
        if value.is_zero() {
            return Ok(Self::zero());
        }
        // n/d = n * d^(index-1) / d^index, so the root is an integer
        // radical divided by d.
        let numer = value.numer().to_biguint().expect("checked nonnegative");
        let denom = value.denom().to_biguint().expect("positive denominator");
        let scaled = numer * denom.pow(index - 1);
        let (factor, radical) = reduce_radical(scaled, index);
        let scale = factor / Rational::from(BigInt::from(denom));
        let mut out = Self::zero();
        match radical {
            None => out.rat = scale,
            Some(rad) => {
                out.terms.insert(rad, scale);
            }
        }
        Ok(out)
    }

    /// `base^p` for rational `base >= 0` and rational `p >= 0`.
    pub fn rational_power(base: &Rational, p: &Rational) -> Result<Self> {
        if p.is_negative() {
            return Err(Error::InvalidP("exponent must be nonnegative".into()));
        }
        if base.is_negative() {
            return Err(Error::Validation(
                "cannot raise a negative value to a fractional power".into(),
            ));
        }
        if base.is_zero() {
            return Ok(if p.is_zero() {
                Self::from_int(1)
            } else {
                Self::zero()
            });
        }
        let a = p
            .numer()
            .to_u32()
            .ok_or_else(|| Error::InvalidP("exponent numerator too large".into()))?;
        let b = p
            .denom()
            .to_u32()
            .ok_or_else(|| Error::InvalidP("exponent denominator too large".into()))?;
        let powered = Rational::new(base.numer().pow(a), base.denom().pow(a));
        Self::nth_root(&powered, b)
    }

    /// `self^p` for rational `p >= 0`.  Defined for every value when `p`
    /// is an integer, and for single-term values (a rational, or one
    /// radical term with nonnegative coefficient and no rational part)
    /// otherwise.
    pub fn pow(&self, p: &Rational) -> Result<Self> {
        if p.is_negative() {
            return Err(Error::InvalidP("exponent must be nonnegative".into()));
        }
        if p.denom().is_one() {
            let mut e = p.numer().to_u32().ok_or_else(|| {
                Error::InvalidP("exponent too large".into())
            })?;
            let mut out = Self::from_int(1);
            while e > 0 {
                out = &out * self;
                e -= 1;
            }
            return Ok(out);
        }
        if let Some(r) = self.as_rational() {
            return Self::rational_power(&r.clone(), p);
        }
        if self.rat.is_zero() && self.terms.len() == 1 {
            let (rad, coeff) = self.terms.iter().next().expect("one term");
            if coeff.is_negative() {
                return Err(Error::Validation(
                    "cannot raise a negative value to a fractional power".into(),
                ));
            }
            let a = p
                .numer()
                .to_u32()
                .ok_or_else(|| Error::InvalidP("exponent numerator too large".into()))?;
            let b = p
                .denom()
                .to_u32()
                .ok_or_else(|| Error::InvalidP("exponent denominator too large".into()))?;
            // (c * base^(1/k))^(a/b) = c^(a/b) * base^(a/(k*b))
            let coeff_pow = Self::rational_power(coeff, p)?;
            let index = rad
                .index
                .checked_mul(b)
                .ok_or_else(|| Error::InvalidP("combined root index too large".into()))?;
            let base_pow = Rational::from(BigInt::from(rad.base.pow(a)));
            let root = Self::nth_root(&base_pow, index)?;
            return Ok(&coeff_pow * &root);
        }
        Err(Error::Validation(
            "cannot take a fractional power of a sum of radicals".into(),
        ))
    }

    fn add_term(&mut self, coeff: Rational, base: BigUint, index: u32) {
        if coeff.is_zero() {
            return;
        }
        let (factor, radical) = reduce_radical(base, index);
        let coeff = coeff * factor;
        let rad = match radical {
            None => {
                self.rat += coeff;
                return;
            }
            Some(rad) => rad,
        };
        // Canonical bases make coset-equal terms structurally equal.
        if let Some(existing) = self.terms.get_mut(&rad) {
            *existing += &coeff;
            if existing.is_zero() {
                self.terms.remove(&rad);
            }
            return;
        }
        // Bases beyond the full-factoring limit may be non-canonical;
        // fall back to exact ratio tests against same-index terms.
        let large = |b: &BigUint| b.bits() > 33;
        let needs_scan = large(&rad.base)
            || self
                .terms
                .keys()
                .any(|k| k.index == rad.index && large(&k.base));
        if needs_scan {
            let mut merged = false;
            let mut remove = None;
            for (existing, existing_coeff) in self.terms.iter_mut() {
                if existing.index != rad.index {
                    continue;
                }
                if let Some(s) = coset_ratio(&rad.base, &existing.base, rad.index) {
                    *existing_coeff += &coeff * s;
                    if existing_coeff.is_zero() {
                        remove = Some(existing.clone());
                    }
                    merged = true;
                    break;
                }
            }
            if let Some(key) = remove {
                self.terms.remove(&key);
            }
            if merged {
                return;
            }
        }
        self.terms.insert(rad, coeff);
    }

    pub fn is_zero(&self) -> bool {
        self.rat.is_zero() && self.terms.is_empty()
    }

    pub fn is_negative(&self) -> bool {
        self.sign() == Ordering::Less
    }

    pub fn is_positive(&self) -> bool {
        self.sign() == Ordering::Greater
    }

    /// The exact rational value, if the value has no irrational part.
    pub fn as_rational(&self) -> Option<&Rational> {
        if self.terms.is_empty() {
            Some(&self.rat)
        } else {
            None
        }
    }

    pub fn scale(&self, factor: &Rational) -> Self {
        if factor.is_zero() {
            return Self::zero();
        }
        let mut out = Self::zero();
        out.rat = &self.rat * factor;
        for (rad, coeff) in &self.terms {
            out.terms.insert(rad.clone(), coeff * factor);
        }
        out
    }

    /// Lower and upper rational bounds with width at most
    /// `terms * 2^-bits` times the coefficient sizes.
    fn enclosure(&self, bits: u32) -> (Rational, Rational) {
        let mut lo = self.rat.clone();
        let mut hi = self.rat.clone();
        for (rad, coeff) in &self.terms {
            let root_lo = root_floor(rad, bits);
            let root_hi = &root_lo + 1u32;
            let denom = BigInt::from(BigUint::one() << (bits as usize));
            let r_lo = Rational::new(BigInt::from(root_lo), denom.clone());
            let r_hi = Rational::new(BigInt::from(root_hi), denom);
            if coeff.is_positive() {
                lo += coeff * &r_lo;
                hi += coeff * &r_hi;
            } else {
                lo += coeff * &r_hi;
                hi += coeff * &r_lo;
            }
        }
        (lo, hi)
    }

    /// Sign of the exact value: `Less`, `Equal`, or `Greater` than zero.
    pub fn sign(&self) -> Ordering {
        if self.terms.is_empty() {
            return self.rat.cmp(&Rational::zero());
        }
        if self.rat.is_zero() && self.terms.len() == 1 {
            let coeff = self.terms.values().next().expect("one term");
            return coeff.cmp(&Rational::zero());
        }
        // All radicals are positive: uniform coefficient signs decide.
        let rat_sign = self.rat.cmp(&Rational::zero());
        if self.terms.values().all(|c| c.is_positive()) && rat_sign != Ordering::Less {
            return Ordering::Greater;
        }
        if self.terms.values().all(|c| c.is_negative()) && rat_sign != Ordering::Greater {
            return Ordering::Less;
        }
        // Nonzero by linear independence of canonical radicals, so the
        // interval eventually excludes zero.
        let mut bits = 16;
        loop {
            let (lo, hi) = self.enclosure(bits);
            if lo.is_positive() {
                return Ordering::Greater;
            }
            if hi.is_negative() {
                return Ordering::Less;
            }
            bits *= 2;
        }
    }

    /// Nearest double, for reporting only.
    pub fn approx(&self) -> f64 {
        if let Some(r) = self.as_rational() {
            return r.to_f64().unwrap_or(f64::NAN);
        }
        let (lo, hi) = self.enclosure(96);
        let mid = (lo + hi) / Rational::from(BigInt::from(2));
        mid.to_f64().unwrap_or(f64::NAN)
    }
}

impl Add for &CostValue {
    type Output = CostValue;
    fn add(self, other: &CostValue) -> CostValue {
        let mut out = self.clone();
        out.rat += &other.rat;
        for (rad, coeff) in &other.terms {
            out.add_term(coeff.clone(), rad.base.clone(), rad.index);
        }
        out
    }
}

impl Sub for &CostValue {
    type Output = CostValue;
    fn sub(self, other: &CostValue) -> CostValue {
        self + &(-other)
    }
}

impl Neg for &CostValue {
    type Output = CostValue;
    fn neg(self) -> CostValue {
        self.scale(&-Rational::one())
    }
}

impl Mul for &CostValue {
    type Output = CostValue;
    fn mul(self, other: &CostValue) -> CostValue {
        let mut out = other.scale(&self.rat);
        for (rad, coeff) in &self.terms {
            out.add_term(coeff * &other.rat, rad.base.clone(), rad.index);
            for (rad2, coeff2) in &other.terms {
                // base1^(1/k1) * base2^(1/k2) = (base1^(l/k1) * base2^(l/k2))^(1/l)
                let l = rad.index.lcm(&rad2.index);
                let combined = rad.base.pow(l / rad.index) * rad2.base.pow(l / rad2.index);
                out.add_term(coeff * coeff2, combined, l);
            }
        }
        out
    }
}

impl PartialEq for CostValue {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for CostValue {}

impl PartialOrd for CostValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for CostValue {
    fn cmp(&self, other: &Self) -> Ordering {
        (self - other).sign()
    }
}

impl fmt::Display for CostValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        if !self.rat.is_zero() {
            write!(f, "{}", format_rational(&self.rat))?;
            first = false;
        }
        for (rad, coeff) in &self.terms {
            let negative = coeff.is_negative();
            let abs = coeff.abs();
            if first {
                if negative {
                    write!(f, "-")?;
                }
                first = false;
            } else if negative {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            if !abs.is_one() {
                if abs.denom().is_one() {
                    write!(f, "{}*", abs.numer())?;
                } else {
                    write!(f, "({})*", format_rational(&abs))?;
                }
            }
            write!(f, "{}^(1/{})", rad.base, rad.index)?;
        }
        Ok(())
    }
}
