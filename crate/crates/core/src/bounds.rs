//! Upper bounds on d(C_S) read off the ring geometry of S.
//!
//! Two exponents differing by `N·w` with `w ∈ B` and `N | q-1` give the
//! binomial `x^{N w} - 1 = Π_{ζ^N = 1} (x^w - ζ)`, which vanishes on exactly
//! `N(q-1)` torus points, so `d <= (q-1)^2 - N(q-1)`. A parallelogram
//! `P, P+e, P+f, P+e+f` with `e = N1 e'`, `f = N2 f'` and `e', f'` generating
//! the plane gives `d <= (q-1)^2 - (N1+N2)(q-1) + N1 N2`.
//!
//! Collinear subsets and Frobenius-type triples are reported as flags only.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use thiserror::Error;

use crate::gf::{prime_power_parts, FieldElement, FieldSpec};
use crate::ringgeo::{
    b_vectors, collinear_subsets, divisors, in_b, is_unit, Direction, Line, RingPoint,
};
use crate::torcode::{torus_point, ExponentSet, TorusPolynomial};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BoundsError {
    #[error("bounds are only defined for plane exponent sets, got dimension {0}")]
    UnsupportedDimension(usize),
    #[error("difference vector must be nonzero")]
    ZeroVector,
    #[error("({a},{b}) is not {n}·{w} with {n} | {r} and the direction in B")]
    BadDecomposition { a: i64, b: i64, n: u32, w: String, r: u32 },
}

/// `e = multiplier · direction` with `direction ∈ B` and `multiplier | r`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Decomposition {
    pub multiplier: u32,
    pub direction: Direction,
}

fn require_plane(e: &RingPoint) -> Result<(), BoundsError> {
    if e.dim() == 2 {
        Ok(())
    } else {
        Err(BoundsError::UnsupportedDimension(e.dim()))
    }
}

/// Every `(N, w)` with `N | r`, `w ∈ B` and `N·w = e`, by descending N then w.
pub fn all_decompositions(e: &RingPoint) -> Result<Vec<Decomposition>, BoundsError> {
    require_plane(e)?;
    if e.is_zero() {
        return Err(BoundsError::ZeroVector);
    }
    let r = e.modulus();
    let dirs = b_vectors(r);
    let mut out = Vec::new();
    for n in divisors(r).into_iter().rev() {
        for w in &dirs {
            if w.point().scale(n) == *e {
                out.push(Decomposition {
                    multiplier: n,
                    direction: w.clone(),
                });
            }
        }
    }
    Ok(out)
}

/// The decomposition with the largest N (lexicographically first w among ties).
pub fn decompose_difference(e: &RingPoint) -> Result<Option<Decomposition>, BoundsError> {
    require_plane(e)?;
    if e.is_zero() {
        return Err(BoundsError::ZeroVector);
    }
    let r = e.modulus();
    let dirs = b_vectors(r);
    for n in divisors(r).into_iter().rev() {
        if let Some(w) = dirs.iter().find(|w| w.point().scale(n) == *e) {
            return Ok(Some(Decomposition {
                multiplier: n,
                direction: w.clone(),
            }));
        }
    }
    Ok(None)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundKind {
    NeighborPair,
    Parallelogram,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum BoundWitness {
    NeighborPair {
        points: [RingPoint; 2],
        decomposition: Decomposition,
    },
    Parallelogram {
        vertices: [RingPoint; 4],
        first: Decomposition,
        second: Decomposition,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BoundReport {
    pub bound: u64,
    pub kind: BoundKind,
    pub witness: BoundWitness,
}

impl BoundReport {
    /// Re-checks the witness arithmetic against the stated bound.
    pub fn verify(&self) -> bool {
        let check = |d: &Decomposition, diff: &RingPoint| {
            let r = diff.modulus();
            r % d.multiplier == 0 && in_b(d.direction.point()) && d.direction.point().scale(d.multiplier) == *diff
        };
        match &self.witness {
            BoundWitness::NeighborPair { points, decomposition } => {
                let r = points[0].modulus() as u64;
                let n = decomposition.multiplier as u64;
                check(decomposition, &points[1].sub(&points[0])) && self.bound == r * r - n * r
            }
            BoundWitness::Parallelogram { vertices, first, second } => {
                let r = vertices[0].modulus() as u64;
                let (n1, n2) = (first.multiplier as u64, second.multiplier as u64);
                check(first, &vertices[1].sub(&vertices[0]))
                    && check(second, &vertices[2].sub(&vertices[0]))
                    && vertices[3] == vertices[1].add(&vertices[2]).sub(&vertices[0])
                    && generates(first.direction.point(), second.direction.point())
                    && self.bound == r * r - (n1 + n2) * r + n1 * n2
            }
        }
    }
}

fn plane_set(s: &ExponentSet) -> Result<(), BoundsError> {
    if s.dim() == 2 {
        Ok(())
    } else {
        Err(BoundsError::UnsupportedDimension(s.dim()))
    }
}

fn neighbor_bound_value(r: u32, n: u32) -> u64 {
    let (r, n) = (r as u64, n as u64);
    r * r - n * r
}

/// One report per pair of S, in pair order.
pub fn pair_reports(s: &ExponentSet) -> Result<Vec<BoundReport>, BoundsError> {
    plane_set(s)?;
    let r = s.q() - 1;
    let pts = s.points();
    let mut out = Vec::new();
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            if let Some(dec) = decompose_difference(&pts[j].sub(&pts[i]))? {
                out.push(BoundReport {
                    bound: neighbor_bound_value(r, dec.multiplier),
                    kind: BoundKind::NeighborPair,
                    witness: BoundWitness::NeighborPair {
                        points: [pts[i].clone(), pts[j].clone()],
                        decomposition: dec,
                    },
                });
            }
        }
    }
    Ok(out)
}

/// Best pair bound `(q-1)^2 - N(q-1)` over all pairs of S.
pub fn neighbor_bound(s: &ExponentSet) -> Result<Option<BoundReport>, BoundsError> {
    Ok(pair_reports(s)?.into_iter().min_by_key(|rep| rep.bound))
}

/// `e'` and `f'` generate (Z/r)^2 iff `det [e'; f']` is a unit.
pub fn generates(e: &RingPoint, f: &RingPoint) -> bool {
    let r = e.modulus() as u64;
    let (a, b) = (e.coords()[0] as u64, e.coords()[1] as u64);
    let (c, d) = (f.coords()[0] as u64, f.coords()[1] as u64);
    let det = (a * d % r + r - b * c % r) % r;
    is_unit(det as u32, r as u32)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Side {
    pub vector: RingPoint,
    pub decomposition: Decomposition,
}

/// A parallelogram `vertices = [P, P+e, P+f, P+e+f]` found in S.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Parallelogram {
    pub vertices: [RingPoint; 4],
    /// Maximal decompositions of the two sides.
    pub first: Side,
    pub second: Side,
    /// Whether some pair of side decompositions generates (Z/r)^2.
    pub generates: bool,
    /// Best bound over generating decompositions.
    pub bound: Option<u64>,
}

fn side_key(v: &RingPoint) -> RingPoint {
    std::cmp::min(v.clone(), v.neg())
}

/// Every parallelogram in S, each 4-set and side pair reported once.
pub fn find_parallelograms(s: &ExponentSet) -> Result<Vec<Parallelogram>, BoundsError> {
    plane_set(s)?;
    let r = (s.q() - 1) as u64;
    let pts = s.points();
    let members: BTreeSet<&RingPoint> = pts.iter().collect();
    let mut seen: BTreeMap<(Vec<RingPoint>, RingPoint, RingPoint), ()> = BTreeMap::new();
    let mut decomp_cache: BTreeMap<RingPoint, Vec<Decomposition>> = BTreeMap::new();
    let mut out = Vec::new();

    for p in pts {
        for a in pts {
            for c in pts {
                if a == p || c == p || a == c {
                    continue;
                }
                let e = a.sub(p);
                let f = c.sub(p);
                let top = a.add(&f);
                if top == *p || !members.contains(&top) {
                    continue;
                }
                let mut quad = vec![p.clone(), a.clone(), c.clone(), top.clone()];
                quad.sort();
                let (k1, k2) = (side_key(&e), side_key(&f));
                let key = (quad, k1.clone().min(k2.clone()), k1.max(k2));
                if seen.insert(key, ()).is_some() {
                    continue;
                }
                for v in [&e, &f] {
                    if !decomp_cache.contains_key(v) {
                        decomp_cache.insert(v.clone(), all_decompositions(v)?);
                    }
                }
                let (de, df) = (&decomp_cache[&e], &decomp_cache[&f]);
                let mut bound: Option<u64> = None;
                for x in de {
                    for y in df {
                        if generates(x.direction.point(), y.direction.point()) {
                            let (n1, n2) = (x.multiplier as u64, y.multiplier as u64);
                            let b = r * r - (n1 + n2) * r + n1 * n2;
                            bound = Some(bound.map_or(b, |cur| cur.min(b)));
                        }
                    }
                }
                out.push(Parallelogram {
                    vertices: [p.clone(), a.clone(), c.clone(), top],
                    first: Side { vector: e, decomposition: de[0].clone() },
                    second: Side { vector: f, decomposition: df[0].clone() },
                    generates: bound.is_some(),
                    bound,
                });
            }
        }
    }
    Ok(out)
}

/// Best parallelogram bound over parallelograms whose side directions generate.
pub fn parallelogram_bound(s: &ExponentSet) -> Result<Option<BoundReport>, BoundsError> {
    let r = (s.q() - 1) as u64;
    let mut best: Option<BoundReport> = None;
    for par in find_parallelograms(s)? {
        let Some(target) = par.bound else { continue };
        if best.as_ref().is_some_and(|b| b.bound <= target) {
            continue;
        }
        let first = all_decompositions(&par.first.vector)?;
        let second = all_decompositions(&par.second.vector)?;
        let witness = first
            .iter()
            .flat_map(|x| second.iter().map(move |y| (x, y)))
            .find(|(x, y)| {
                let (n1, n2) = (x.multiplier as u64, y.multiplier as u64);
                generates(x.direction.point(), y.direction.point()) && r * r - (n1 + n2) * r + n1 * n2 == target
            })
            .expect("bound came from a generating pair");
        best = Some(BoundReport {
            bound: target,
            kind: BoundKind::Parallelogram,
            witness: BoundWitness::Parallelogram {
                vertices: par.vertices.clone(),
                first: witness.0.clone(),
                second: witness.1.clone(),
            },
        });
    }
    Ok(best)
}

/// A maximal subset of S (size >= 3) on one line of the plane.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CollinearFlag {
    pub line: Line,
    pub points: Vec<RingPoint>,
}

/// A triple that is not collinear in Z^2 but whose image under the exponent
/// Frobenius `e ↦ p^{-j} e mod (q-1)` is.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FrobeniusFlag {
    pub points: [RingPoint; 3],
    pub power: u32,
    pub image: [RingPoint; 3],
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ConfigurationReport {
    /// Pair reports whose multiplier is at least 2 (actual neighbor pairs),
    /// followed by the best pair bound and the best parallelogram bound.
    pub reports: Vec<BoundReport>,
    pub parallelograms: Vec<Parallelogram>,
    pub collinear: Vec<CollinearFlag>,
    pub frobenius: Vec<FrobeniusFlag>,
}

impl ConfigurationReport {
    /// Tightest bound emitted.
    pub fn best_bound(&self) -> Option<u64> {
        self.reports.iter().map(|r| r.bound).min()
    }

    /// Neighbor pairs, parallelograms, collinear subsets and Frobenius triples.
    pub fn flag_count(&self) -> usize {
        let neighbor_pairs = self
            .reports
            .iter()
            .filter(|r| matches!(&r.witness, BoundWitness::NeighborPair { decomposition, .. } if decomposition.multiplier > 1))
            .count();
        neighbor_pairs + self.parallelograms.len() + self.collinear.len() + self.frobenius.len()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ScanOptions {
    pub frobenius: bool,
}

pub fn bad_configuration_scan(s: &ExponentSet, opts: ScanOptions) -> Result<ConfigurationReport, BoundsError> {
    plane_set(s)?;
    let pairs = pair_reports(s)?;
    let best_pair = pairs.iter().min_by_key(|r| r.bound).cloned();
    let mut reports: Vec<BoundReport> = pairs
        .into_iter()
        .filter(|r| matches!(&r.witness, BoundWitness::NeighborPair { decomposition, .. } if decomposition.multiplier > 1))
        .collect();
    if let Some(best) = best_pair {
        if !reports.contains(&best) {
            reports.push(best);
        }
    }
    reports.extend(parallelogram_bound(s)?);

    let collinear = maximal_collinear(s.points());
    let frobenius = if opts.frobenius { frobenius_triples(s) } else { Vec::new() };
    Ok(ConfigurationReport {
        reports,
        parallelograms: find_parallelograms(s)?,
        collinear,
        frobenius,
    })
}

fn maximal_collinear(points: &[RingPoint]) -> Vec<CollinearFlag> {
    let groups: Vec<(Line, Vec<RingPoint>)> = collinear_subsets(points)
        .into_iter()
        .filter(|(_, pts)| pts.len() >= 3)
        .collect();
    let mut flags: Vec<CollinearFlag> = Vec::new();
    for (i, (line, pts)) in groups.iter().enumerate() {
        let set: BTreeSet<&RingPoint> = pts.iter().collect();
        let dominated = groups.iter().enumerate().any(|(j, (_, other))| {
            let other_set: BTreeSet<&RingPoint> = other.iter().collect();
            j != i && set.is_subset(&other_set) && (set.len() < other_set.len() || j < i)
        });
        if !dominated {
            flags.push(CollinearFlag {
                line: line.clone(),
                points: pts.clone(),
            });
        }
    }
    flags
}

fn integer_collinear(pts: &[&RingPoint]) -> bool {
    let c = |p: &RingPoint, i: usize| p.coords()[i] as i64;
    let (ux, uy) = (c(pts[1], 0) - c(pts[0], 0), c(pts[1], 1) - c(pts[0], 1));
    let (vx, vy) = (c(pts[2], 0) - c(pts[0], 0), c(pts[2], 1) - c(pts[0], 1));
    ux * vy - uy * vx == 0
}

fn frobenius_triples(s: &ExponentSet) -> Vec<FrobeniusFlag> {
    let Some((p, degree)) = prime_power_parts(s.q()) else {
        return Vec::new();
    };
    let r = s.q() - 1;
    // p^{-j} = p^{degree - j} mod q-1, since p^degree = q ≡ 1
    let powers: Vec<(u32, u32)> = (1..degree)
        .map(|j| (j, (0..degree - j).fold(1u32, |acc, _| acc * p % r)))
        .collect();
    let pts = s.points();
    let mut out = Vec::new();
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            for k in j + 1..pts.len() {
                let tri = [&pts[i], &pts[j], &pts[k]];
                if integer_collinear(&tri) {
                    continue;
                }
                for &(power, factor) in &powers {
                    let image = tri.map(|x| x.scale(factor));
                    if integer_collinear(&[&image[0], &image[1], &image[2]]) {
                        out.push(FrobeniusFlag {
                            points: tri.map(|x| x.clone()),
                            power,
                            image,
                        });
                        break;
                    }
                }
            }
        }
    }
    out
}

/// Pointwise check of `lhs == Π factor_i^{power_i}` over the whole torus.
pub fn identity_holds(lhs: &TorusPolynomial, factors: &[(TorusPolynomial, u64)], m: usize, field: &FieldSpec) -> bool {
    let n = (field.group_order() as usize).pow(m as u32);
    (0..n).all(|col| {
        let f = torus_point(col, field.order(), m);
        let rhs = factors.iter().fold(FieldElement::ONE, |acc, (poly, power)| {
            field.mul(acc, field.pow(poly.eval(&f, field), *power))
        });
        lhs.eval(&f, field) == rhs
    })
}

/// Outcome of checking `x^a y^b - 1 = Π_{ζ^N=1} (x^u y^v - ζ)` on the torus.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BinomialCheck {
    pub identity: bool,
    pub zeros: usize,
    pub expected_zeros: usize,
    pub factor_zeros: Vec<usize>,
    pub disjoint: bool,
}

impl BinomialCheck {
    /// Identity, total zero count and disjointness, with `per_factor` zeros each.
    pub fn holds(&self, per_factor: usize) -> bool {
        self.identity
            && self.disjoint
            && self.zeros == self.expected_zeros
            && self.factor_zeros.iter().all(|&z| z == per_factor)
    }
}

/// Full pointwise check behind [`verify_binomfact`].
pub fn check_binomial_factorization(
    a: i64,
    b: i64,
    n: u32,
    w: &Direction,
    field: &FieldSpec,
) -> Result<BinomialCheck, BoundsError> {
    let r = field.group_order();
    let bad = || BoundsError::BadDecomposition {
        a,
        b,
        n,
        w: w.to_string(),
        r,
    };
    let target = RingPoint::xy(a, b, r).map_err(|_| bad())?;
    if w.point().modulus() != r || w.point().dim() != 2 || n == 0 || r % n != 0 || w.point().scale(n) != target {
        return Err(bad());
    }
    let (u, v) = (w.point().coords()[0] as u64, w.point().coords()[1] as u64);
    let cnt = (field.group_order() as usize).pow(2);
    let roots: Vec<FieldElement> = (0..r).filter(|j| (*j as u64 * n as u64) % r as u64 == 0).map(FieldElement::Pow).collect();

    let ea = a.rem_euclid(r as i64) as u64;
    let eb = b.rem_euclid(r as i64) as u64;
    let binomial = TorusPolynomial::monomial(vec![ea, eb], FieldElement::ONE).plus(vec![0, 0], field.neg(FieldElement::ONE));
    let factors: Vec<TorusPolynomial> = roots
        .iter()
        .map(|&z| TorusPolynomial::monomial(vec![u, v], FieldElement::ONE).plus(vec![0, 0], field.neg(z)))
        .collect();

    let mut identity = true;
    let mut zeros = 0;
    let mut factor_zeros = vec![0usize; factors.len()];
    let mut disjoint = true;
    for col in 0..cnt {
        let f = torus_point(col, field.order(), 2);
        let vals: Vec<FieldElement> = factors.iter().map(|p| p.eval(&f, field)).collect();
        let product = vals.iter().fold(FieldElement::ONE, |acc, &x| field.mul(acc, x));
        let lhs = binomial.eval(&f, field);
        identity &= lhs == product;
        zeros += lhs.is_zero() as usize;
        let hits = vals.iter().filter(|x| x.is_zero()).count();
        disjoint &= hits <= 1;
        for (slot, val) in factor_zeros.iter_mut().zip(&vals) {
            *slot += val.is_zero() as usize;
        }
    }
    Ok(BinomialCheck {
        identity,
        zeros,
        expected_zeros: n as usize * r as usize,
        factor_zeros,
        disjoint,
    })
}

/// True iff the factorization of `x^a y^b - 1` through `(a,b) = N·w` holds at
/// every torus point with exactly `N(q-1)` zeros, `q-1` per disjoint factor.
pub fn verify_binomfact(a: i64, b: i64, n: u32, w: &Direction, field: &FieldSpec) -> Result<bool, BoundsError> {
    let check = check_binomial_factorization(a, b, n, w, field)?;
    Ok(check.holds(field.group_order() as usize))
}
