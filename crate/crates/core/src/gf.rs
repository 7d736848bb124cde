//! Arithmetic in F_q, q = p^r <= 2^16, with a fixed primitive element α.
//!
//! Every element has two representations: a log index (`FieldElement::Pow(i)`
//! meaning α^i) and a packed coefficient vector, the base-p integer
//! `c_0 + c_1 p + ... + c_{r-1} p^{r-1}` of its polynomial in α. Multiplication
//! works on log indices, addition on packed vectors, and the exp/log tables
//! translate between the two.

use std::fmt;

use serde::Serialize;
use thiserror::Error;

/// Largest supported field order.
pub const MAX_ORDER: u32 = 1 << 16;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GfError {
    #[error("{0} is not prime")]
    NotPrime(u32),
    #[error("extension degree must be at least 1")]
    ZeroDegree,
    #[error("field order {p}^{r} exceeds 2^16")]
    TooLarge { p: u32, r: u32 },
    #[error("{0} is not a prime power")]
    NotPrimePower(u32),
    #[error("modulus needs {expected} coefficients, got {got}")]
    ModulusLength { expected: usize, got: usize },
    #[error("modulus must be monic")]
    NotMonic,
    #[error("modulus coefficient {0} is not reduced mod p")]
    CoefficientRange(u32),
    #[error("modulus is not primitive (root order {root_order:?}, expected {expected})")]
    NotPrimitivePolynomial {
        /// Multiplicative order of the root, `None` if the root is not a unit.
        root_order: Option<u32>,
        expected: u32,
    },
    #[error("no built-in primitive polynomial for q = {0}")]
    NoDefaultModulus(u32),
}

/// An element of F_q: zero, or α^i with i in [0, q-2].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FieldElement {
    Zero,
    Pow(u32),
}

impl FieldElement {
    pub const ONE: FieldElement = FieldElement::Pow(0);

    pub fn is_zero(self) -> bool {
        matches!(self, FieldElement::Zero)
    }

    /// Log index, `None` for zero.
    pub fn log(self) -> Option<u32> {
        match self {
            FieldElement::Zero => None,
            FieldElement::Pow(i) => Some(i),
        }
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldElement::Zero => write!(f, "0"),
            FieldElement::Pow(i) => write!(f, "a^{i}"),
        }
    }
}

impl Serialize for FieldElement {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        // zero as null, α^i as i
        match self {
            FieldElement::Zero => serializer.serialize_none(),
            FieldElement::Pow(i) => serializer.serialize_u32(*i),
        }
    }
}

/// Built-in primitive polynomials, coefficients listed from the constant term up.
const DEFAULT_MODULI: &[(u32, u32, &[u32])] = &[
    (2, 2, &[1, 1, 1]),
    (2, 3, &[1, 1, 0, 1]),
    (2, 4, &[1, 1, 0, 0, 1]),
    (2, 5, &[1, 0, 1, 0, 0, 1]),
    (2, 6, &[1, 1, 0, 0, 0, 0, 1]),
    (2, 7, &[1, 1, 0, 0, 0, 0, 0, 1]),
    (3, 2, &[2, 1, 1]),
    (3, 3, &[1, 2, 0, 1]),
    (3, 4, &[2, 0, 0, 2, 1]),
    (5, 2, &[2, 4, 1]),
];

/// Immutable description of F_q together with its exp/log tables.
#[derive(Clone, PartialEq, Eq)]
pub struct FieldSpec {
    p: u32,
    r: u32,
    q: u32,
    modulus: Vec<u32>,
    exp_table: Vec<u32>,
    log_table: Vec<u32>,
}

impl fmt::Debug for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FieldSpec")
            .field("p", &self.p)
            .field("r", &self.r)
            .field("q", &self.q)
            .field("modulus", &self.modulus)
            .finish_non_exhaustive()
    }
}

pub fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u32;
    while d.saturating_mul(d) <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Splits a prime power q into (p, r).
pub fn prime_power_parts(q: u32) -> Option<(u32, u32)> {
    if q < 2 {
        return None;
    }
    let p = (2..=q).find(|d| q % d == 0)?;
    let mut rest = q;
    let mut r = 0;
    while rest % p == 0 {
        rest /= p;
        r += 1;
    }
    (rest == 1).then_some((p, r))
}

/// Builds F_{p^r}. Without an explicit modulus the built-in table is used
/// (smallest primitive root for prime fields).
pub fn make_field(p: u32, r: u32, modulus: Option<&[u32]>) -> Result<FieldSpec, GfError> {
    if !is_prime(p) {
        return Err(GfError::NotPrime(p));
    }
    if r == 0 {
        return Err(GfError::ZeroDegree);
    }
    let q = p
        .checked_pow(r)
        .filter(|&q| q <= MAX_ORDER)
        .ok_or(GfError::TooLarge { p, r })?;

    let modulus = match modulus {
        Some(m) => m.to_vec(),
        None => default_modulus(p, r)?,
    };
    if modulus.len() != r as usize + 1 {
        return Err(GfError::ModulusLength {
            expected: r as usize + 1,
            got: modulus.len(),
        });
    }
    if let Some(&c) = modulus.iter().find(|&&c| c >= p) {
        return Err(GfError::CoefficientRange(c));
    }
    if modulus[r as usize] != 1 {
        return Err(GfError::NotMonic);
    }

    let (exp_table, log_table) = build_tables(p, r, q, &modulus)?;
    Ok(FieldSpec {
        p,
        r,
        q,
        modulus,
        exp_table,
        log_table,
    })
}

/// F_q from its order alone, using the default modulus.
pub fn field_for_order(q: u32) -> Result<FieldSpec, GfError> {
    let (p, r) = prime_power_parts(q).ok_or(GfError::NotPrimePower(q))?;
    make_field(p, r, None)
}

fn default_modulus(p: u32, r: u32) -> Result<Vec<u32>, GfError> {
    if r == 1 {
        let g = primitive_root(p);
        return Ok(vec![(p - g) % p, 1]);
    }
    DEFAULT_MODULI
        .iter()
        .find(|(dp, dr, _)| *dp == p && *dr == r)
        .map(|(_, _, m)| m.to_vec())
        .ok_or(GfError::NoDefaultModulus(p.pow(r)))
}

fn primitive_root(p: u32) -> u32 {
    if p == 2 {
        return 1;
    }
    let order = p - 1;
    let factors: Vec<u32> = (2..=order)
        .filter(|d| order % d == 0 && is_prime(*d))
        .collect();
    (2..p)
        .find(|&g| {
            factors
                .iter()
                .all(|&s| mod_pow(g as u64, (order / s) as u64, p as u64) != 1)
        })
        .expect("every prime has a primitive root")
}

fn mod_pow(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % m;
        }
        base = base * base % m;
        exp >>= 1;
    }
    acc
}

/// Walks the powers of the root u of `modulus`; the root is primitive exactly
/// when the first return to 1 happens at step q-1.
fn build_tables(p: u32, r: u32, q: u32, modulus: &[u32]) -> Result<(Vec<u32>, Vec<u32>), GfError> {
    let r = r as usize;
    let order = q - 1;
    let mut exp_table = Vec::with_capacity(order as usize);
    let mut log_table = vec![u32::MAX; q as usize];
    let mut coeffs = vec![0u32; r];
    coeffs[0] = 1;

    for i in 0..order {
        let packed = pack(&coeffs, p);
        if i > 0 && packed == 1 {
            return Err(GfError::NotPrimitivePolynomial {
                root_order: Some(i),
                expected: order,
            });
        }
        if packed == 0 || log_table[packed as usize] != u32::MAX {
            // the root's powers cycle without reaching 1: not a unit
            return Err(GfError::NotPrimitivePolynomial {
                root_order: None,
                expected: order,
            });
        }
        exp_table.push(packed);
        log_table[packed as usize] = i;

        // multiply by u, reducing u^r = -(c_0 + ... + c_{r-1} u^{r-1})
        let top = coeffs[r - 1];
        for j in (1..r).rev() {
            coeffs[j] = coeffs[j - 1];
        }
        coeffs[0] = 0;
        for j in 0..r {
            coeffs[j] = (coeffs[j] + (p - modulus[j]) * top) % p;
        }
    }
    if pack(&coeffs, p) != 1 {
        return Err(GfError::NotPrimitivePolynomial {
            root_order: None,
            expected: order,
        });
    }
    Ok((exp_table, log_table))
}

fn pack(coeffs: &[u32], p: u32) -> u32 {
    coeffs.iter().rev().fold(0, |acc, &c| acc * p + c)
}

impl FieldSpec {
    pub fn characteristic(&self) -> u32 {
        self.p
    }

    pub fn degree(&self) -> u32 {
        self.r
    }

    pub fn order(&self) -> u32 {
        self.q
    }

    /// q - 1, the order of the multiplicative group.
    pub fn group_order(&self) -> u32 {
        self.q - 1
    }

    /// Coefficients of the primitive polynomial, constant term first.
    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    /// `exp_table()[i]` is the packed coefficient vector of α^i.
    pub fn exp_table(&self) -> &[u32] {
        &self.exp_table
    }

    pub fn alpha(&self) -> FieldElement {
        self.reduce(1)
    }

    /// α^i for any integer i.
    pub fn reduce(&self, i: i64) -> FieldElement {
        FieldElement::Pow(i.rem_euclid(self.group_order() as i64) as u32)
    }

    /// All q elements: zero first, then α^0, α^1, ...
    pub fn elements(&self) -> impl Iterator<Item = FieldElement> + '_ {
        std::iter::once(FieldElement::Zero).chain((0..self.group_order()).map(FieldElement::Pow))
    }

    pub fn to_packed(&self, a: FieldElement) -> u32 {
        match a {
            FieldElement::Zero => 0,
            FieldElement::Pow(i) => self.exp_table[(i % self.group_order()) as usize],
        }
    }

    /// # Panics
    /// If `packed >= q`.
    pub fn from_packed(&self, packed: u32) -> FieldElement {
        assert!(packed < self.q, "packed value {packed} out of range for F_{}", self.q);
        match packed {
            0 => FieldElement::Zero,
            c => FieldElement::Pow(self.log_table[c as usize]),
        }
    }

    /// Polynomial coefficients of `a` in α, constant term first.
    pub fn coefficients(&self, a: FieldElement) -> Vec<u32> {
        let mut packed = self.to_packed(a);
        (0..self.r)
            .map(|_| {
                let c = packed % self.p;
                packed /= self.p;
                c
            })
            .collect()
    }

    /// Element with the given coefficients in α (reduced mod p, missing ones zero).
    pub fn from_coefficients(&self, coeffs: &[u32]) -> FieldElement {
        let mut digits: Vec<u32> = coeffs.iter().map(|c| c % self.p).collect();
        digits.resize(self.r as usize, 0);
        digits.truncate(self.r as usize);
        self.from_packed(pack(&digits, self.p))
    }

    /// The integer n viewed in the prime subfield.
    pub fn from_int(&self, n: i64) -> FieldElement {
        self.from_packed(n.rem_euclid(self.p as i64) as u32)
    }

    pub fn add_packed(&self, a: u32, b: u32) -> u32 {
        if self.p == 2 {
            return a ^ b;
        }
        if self.r == 1 {
            return (a + b) % self.p;
        }
        let (mut a, mut b) = (a, b);
        let mut out = 0;
        let mut place = 1;
        for _ in 0..self.r {
            out += (a % self.p + b % self.p) % self.p * place;
            a /= self.p;
            b /= self.p;
            place *= self.p;
        }
        out
    }

    pub fn neg_packed(&self, a: u32) -> u32 {
        if self.p == 2 {
            return a;
        }
        let mut a = a;
        let mut out = 0;
        let mut place = 1;
        for _ in 0..self.r {
            out += (self.p - a % self.p) % self.p * place;
            a /= self.p;
            place *= self.p;
        }
        out
    }

    pub fn add(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        self.from_packed(self.add_packed(self.to_packed(a), self.to_packed(b)))
    }

    pub fn neg(&self, a: FieldElement) -> FieldElement {
        self.from_packed(self.neg_packed(self.to_packed(a)))
    }

    pub fn sub(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        self.add(a, self.neg(b))
    }

    pub fn mul(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        match (a, b) {
            (FieldElement::Pow(i), FieldElement::Pow(j)) => {
                FieldElement::Pow(((i as u64 + j as u64) % self.group_order() as u64) as u32)
            }
            _ => FieldElement::Zero,
        }
    }

    /// `a^n`, with `Zero^0 = 1`.
    pub fn pow(&self, a: FieldElement, n: u64) -> FieldElement {
        match a {
            _ if n == 0 => FieldElement::ONE,
            FieldElement::Zero => FieldElement::Zero,
            FieldElement::Pow(i) => {
                let order = self.group_order() as u64;
                FieldElement::Pow(((i as u64 % order) * (n % order) % order) as u32)
            }
        }
    }

    pub fn inv(&self, a: FieldElement) -> Option<FieldElement> {
        a.log()
            .map(|i| FieldElement::Pow((self.group_order() - i) % self.group_order()))
    }

    /// Human-readable modulus, e.g. `u^2 + u + 2`.
    pub fn modulus_string(&self) -> String {
        let terms: Vec<String> = self
            .modulus
            .iter()
            .enumerate()
            .rev()
            .filter(|(_, &c)| c != 0)
            .map(|(i, &c)| match (i, c) {
                (0, c) => c.to_string(),
                (1, 1) => "u".to_string(),
                (1, c) => format!("{c}u"),
                (i, 1) => format!("u^{i}"),
                (i, c) => format!("{c}u^{i}"),
            })
            .collect();
        terms.join(" + ")
    }
}
