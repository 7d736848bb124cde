//! Generalized toric codes C_S(F_q): monomial evaluation on the torus and
//! exact parameter computation.
//!
//! Column `f = (f_1, ..., f_m)` of the generator matrix is the torus point
//! `(α^{f_1}, ..., α^{f_m})` and sits at index `Σ f_i (q-1)^{m-i}`; the entry in
//! row `e` is `α^{<f,e>}`.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use serde::Serialize;
use thiserror::Error;

use crate::gf::{FieldElement, FieldSpec};
use crate::ringgeo::RingPoint;

mod enumerate;

/// Default cap on symbol operations (codewords enumerated × n).
pub const DEFAULT_BUDGET: u64 = 10_000_000_000;

/// Largest block length the generator builder will materialize.
pub const MAX_LENGTH: u64 = 1 << 24;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CodeError {
    #[error("field order {0} is too small for a torus code")]
    InvalidOrder(u32),
    #[error("exponent vector has {got} coordinates, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("exponent set is for q = {set}, field has q = {field}")]
    FieldMismatch { set: u32, field: u32 },
    #[error("exponent set must not be empty")]
    Empty,
    #[error("exponent {0} appears twice after reduction mod q-1")]
    DuplicateExponent(RingPoint),
    #[error("negative exponent {0}")]
    NegativeExponent(i64),
    #[error("block length (q-1)^m = {0} is too large")]
    TooLong(u64),
    #[error("enumeration needs {required} symbol operations, budget is {budget}")]
    BudgetExceeded { required: u128, budget: u64 },
}

/// The set S of exponent vectors, reduced mod q-1, in input order.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ExponentSet {
    q: u32,
    m: usize,
    points: Vec<RingPoint>,
}

impl ExponentSet {
    pub fn new(q: u32, m: usize, raw: &[Vec<i64>]) -> Result<Self, CodeError> {
        if q < 3 {
            return Err(CodeError::InvalidOrder(q));
        }
        if raw.is_empty() {
            return Err(CodeError::Empty);
        }
        let mut points = Vec::with_capacity(raw.len());
        for coords in raw {
            if coords.len() != m {
                return Err(CodeError::DimensionMismatch {
                    expected: m,
                    got: coords.len(),
                });
            }
            if let Some(&c) = coords.iter().find(|&&c| c < 0) {
                return Err(CodeError::NegativeExponent(c));
            }
            let p = RingPoint::new(coords, q - 1).map_err(|_| CodeError::InvalidOrder(q))?;
            points.push(p);
        }
        Self::from_points(q, points)
    }

    /// From points already living in (Z/(q-1))^m.
    pub fn from_points(q: u32, points: Vec<RingPoint>) -> Result<Self, CodeError> {
        if q < 3 {
            return Err(CodeError::InvalidOrder(q));
        }
        let m = points.first().ok_or(CodeError::Empty)?.dim();
        let mut seen = std::collections::HashSet::new();
        for p in &points {
            if p.dim() != m {
                return Err(CodeError::DimensionMismatch { expected: m, got: p.dim() });
            }
            if p.modulus() != q - 1 {
                return Err(CodeError::InvalidOrder(q));
            }
            if !seen.insert(p) {
                return Err(CodeError::DuplicateExponent(p.clone()));
            }
        }
        Ok(ExponentSet { q, m, points })
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[RingPoint] {
        &self.points
    }

    /// Block length (q-1)^m.
    pub fn length(&self) -> u64 {
        ((self.q - 1) as u64).saturating_pow(self.m as u32)
    }

    /// Same set with points sorted lexicographically.
    pub fn sorted(&self) -> ExponentSet {
        let mut points = self.points.clone();
        points.sort();
        ExponentSet { points, ..self.clone() }
    }
}

/// The k × n matrix `(α^{<f,e>})`, stored as log indices (entries are never zero).
#[derive(Clone, Debug)]
pub struct GeneratorMatrix {
    q: u32,
    m: usize,
    n: usize,
    k: usize,
    logs: Vec<u32>,
}

/// Coordinates f of torus column `col` (most significant first).
pub fn torus_point(col: usize, q: u32, m: usize) -> Vec<u32> {
    let base = (q - 1) as usize;
    let mut f = vec![0u32; m];
    let mut rest = col;
    for slot in f.iter_mut().rev() {
        *slot = (rest % base) as u32;
        rest /= base;
    }
    f
}

pub fn build_generator(s: &ExponentSet, field: &FieldSpec) -> Result<GeneratorMatrix, CodeError> {
    if s.q != field.order() {
        return Err(CodeError::FieldMismatch {
            set: s.q,
            field: field.order(),
        });
    }
    let n = s.length();
    if n > MAX_LENGTH {
        return Err(CodeError::TooLong(n));
    }
    let (n, k, r) = (n as usize, s.len(), (s.q - 1) as u64);
    let mut logs = Vec::with_capacity(k * n);
    for e in &s.points {
        for col in 0..n {
            let f = torus_point(col, s.q, s.m);
            let dot = f
                .iter()
                .zip(e.coords())
                .map(|(&a, &b)| a as u64 * b as u64)
                .sum::<u64>()
                % r;
            logs.push(dot as u32);
        }
    }
    Ok(GeneratorMatrix {
        q: s.q,
        m: s.m,
        n,
        k,
        logs,
    })
}

impl GeneratorMatrix {
    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    /// Block length.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of rows.
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn entry(&self, row: usize, col: usize) -> FieldElement {
        FieldElement::Pow(self.logs[row * self.n + col])
    }

    pub fn row_logs(&self, row: usize) -> &[u32] {
        &self.logs[row * self.n..(row + 1) * self.n]
    }

    /// Codeword of the message `coeffs` (one coefficient per row).
    pub fn encode(&self, coeffs: &[FieldElement], field: &FieldSpec) -> Vec<FieldElement> {
        assert_eq!(coeffs.len(), self.k, "message length must equal k");
        (0..self.n)
            .map(|col| {
                coeffs
                    .iter()
                    .enumerate()
                    .fold(FieldElement::Zero, |acc, (row, &c)| {
                        field.add(acc, field.mul(c, self.entry(row, col)))
                    })
            })
            .collect()
    }

    /// Rank over F_q by row reduction.
    pub fn rank(&self, field: &FieldSpec) -> usize {
        let mut rows: Vec<Vec<FieldElement>> = (0..self.k)
            .map(|r| (0..self.n).map(|c| self.entry(r, c)).collect())
            .collect();
        let mut rank = 0;
        for col in 0..self.n {
            let Some(pivot) = (rank..rows.len()).find(|&r| !rows[r][col].is_zero()) else {
                continue;
            };
            rows.swap(rank, pivot);
            let inv = field.inv(rows[rank][col]).expect("pivot is nonzero");
            let pivot_row: Vec<FieldElement> = rows[rank].iter().map(|&x| field.mul(x, inv)).collect();
            for (r, row) in rows.iter_mut().enumerate() {
                if r != rank && !row[col].is_zero() {
                    let factor = row[col];
                    for (x, &p) in row.iter_mut().zip(&pivot_row) {
                        *x = field.sub(*x, field.mul(factor, p));
                    }
                }
            }
            rows[rank] = pivot_row;
            rank += 1;
            if rank == rows.len() {
                break;
            }
        }
        rank
    }
}

/// How the message space is enumerated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    /// Every message, q^k in total.
    Full,
    /// One message per scalar class (first nonzero coordinate 1).
    ScalarClass,
    /// Scalar classes split by message prefix across worker threads.
    Parallel,
}

impl Strategy {
    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::Full => "full",
            Strategy::ScalarClass => "scalar-class",
            Strategy::Parallel => "parallel",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "full" => Ok(Strategy::Full),
            "scalar-class" => Ok(Strategy::ScalarClass),
            "parallel" => Ok(Strategy::Parallel),
            other => Err(format!("unknown strategy {other:?}")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EnumOptions {
    pub strategy: Strategy,
    /// Maximum symbol operations (codewords × n).
    pub budget: u64,
    /// Worker count for `Parallel`.
    pub threads: usize,
}

impl Default for EnumOptions {
    fn default() -> Self {
        EnumOptions {
            strategy: Strategy::ScalarClass,
            budget: DEFAULT_BUDGET,
            threads: std::thread::available_parallelism().map_or(1, |n| n.get()),
        }
    }
}

impl EnumOptions {
    pub fn with_strategy(strategy: Strategy) -> Self {
        EnumOptions {
            strategy,
            ..Self::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CodeReport {
    pub n: usize,
    pub k: usize,
    pub d: usize,
    /// `A_0 .. A_n` when requested.
    pub weight_distribution: Option<Vec<u64>>,
    pub method: Strategy,
    /// A message of minimum weight, one coefficient per row of G.
    pub witness: Option<Vec<FieldElement>>,
    /// Codewords actually visited.
    pub codewords: u64,
    #[serde(skip)]
    pub elapsed: Duration,
}

/// Number of codewords a strategy visits.
pub fn codewords_visited(q: u32, k: usize, strategy: Strategy) -> u128 {
    let total = (q as u128).checked_pow(k as u32).unwrap_or(u128::MAX);
    match strategy {
        Strategy::Full => total,
        Strategy::ScalarClass | Strategy::Parallel => {
            if total == u128::MAX {
                u128::MAX
            } else {
                (total - 1) / (q as u128 - 1)
            }
        }
    }
}

/// Symbol operations a strategy needs on `g`.
pub fn required_operations(g: &GeneratorMatrix, strategy: Strategy) -> u128 {
    codewords_visited(g.q, g.k, strategy).saturating_mul(g.n as u128)
}

fn run(g: &GeneratorMatrix, field: &FieldSpec, opts: &EnumOptions, keep_distribution: bool) -> Result<CodeReport, CodeError> {
    if g.q != field.order() {
        return Err(CodeError::FieldMismatch {
            set: g.q,
            field: field.order(),
        });
    }
    let required = required_operations(g, opts.strategy);
    if required > opts.budget as u128 {
        return Err(CodeError::BudgetExceeded {
            required,
            budget: opts.budget,
        });
    }
    let start = Instant::now();
    let tally = enumerate::tally(g, field, opts.strategy, opts.threads.max(1));
    let d = tally
        .distribution
        .iter()
        .enumerate()
        .skip(1)
        .find(|(_, &count)| count > 0)
        .map(|(w, _)| w)
        .unwrap_or(0);
    Ok(CodeReport {
        n: g.n,
        k: g.k,
        d,
        weight_distribution: keep_distribution.then_some(tally.distribution),
        method: opts.strategy,
        witness: tally.witness,
        codewords: tally.visited,
        elapsed: start.elapsed(),
    })
}

/// Exact minimum distance.
pub fn min_distance(g: &GeneratorMatrix, field: &FieldSpec, opts: &EnumOptions) -> Result<CodeReport, CodeError> {
    run(g, field, opts, false)
}

/// Exact weight distribution `A_0 .. A_n` (and d).
pub fn weight_distribution(g: &GeneratorMatrix, field: &FieldSpec, opts: &EnumOptions) -> Result<CodeReport, CodeError> {
    run(g, field, opts, true)
}

/// A Laurent-free polynomial on the torus: a list of `(exponent, coefficient)`
/// terms. Exponents may exceed q-2; they act mod q-1.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TorusPolynomial {
    terms: Vec<(Vec<u64>, FieldElement)>,
}

impl TorusPolynomial {
    pub fn new(terms: Vec<(Vec<u64>, FieldElement)>) -> Self {
        TorusPolynomial { terms }
    }

    pub fn monomial(exponent: Vec<u64>, coeff: FieldElement) -> Self {
        TorusPolynomial {
            terms: vec![(exponent, coeff)],
        }
    }

    pub fn terms(&self) -> &[(Vec<u64>, FieldElement)] {
        &self.terms
    }

    pub fn plus(mut self, exponent: Vec<u64>, coeff: FieldElement) -> Self {
        self.terms.push((exponent, coeff));
        self
    }

    fn dim(&self) -> Option<usize> {
        self.terms.first().map(|(e, _)| e.len())
    }

    /// Value at the torus point `(α^{f_1}, ..., α^{f_m})`.
    pub fn eval(&self, f: &[u32], field: &FieldSpec) -> FieldElement {
        let r = field.group_order() as u64;
        self.terms.iter().fold(FieldElement::Zero, |acc, (e, c)| {
            assert_eq!(e.len(), f.len(), "exponent dimension must match the torus");
            let dot = e
                .iter()
                .zip(f)
                .map(|(&a, &b)| (a % r) * b as u64 % r)
                .sum::<u64>();
            field.add(acc, field.mul(*c, field.reduce((dot % r) as i64)))
        })
    }

    /// Values over the whole torus in generator column order.
    pub fn evaluate(&self, m: usize, field: &FieldSpec) -> Vec<FieldElement> {
        if let Some(dim) = self.dim() {
            assert_eq!(dim, m, "exponent dimension must match the torus");
        }
        let n = (field.group_order() as usize).pow(m as u32);
        (0..n)
            .map(|col| self.eval(&torus_point(col, field.order(), m), field))
            .collect()
    }
}

/// Σ_e c_e x^e evaluated at every torus point.
pub fn evaluate_combination(terms: &[(Vec<u64>, FieldElement)], m: usize, field: &FieldSpec) -> Vec<FieldElement> {
    TorusPolynomial::new(terms.to_vec()).evaluate(m, field)
}

pub fn zero_count(values: &[FieldElement]) -> usize {
    values.iter().filter(|v| v.is_zero()).count()
}
