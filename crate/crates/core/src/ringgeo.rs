//! The affine plane (and m-space) over Z/r.
//!
//! Points are residue vectors. B is the set of vectors that occur as a row of
//! an invertible matrix, which over Z/r means `gcd(coords, r) = 1`. Lines are
//! `base + R·dir` with `dir` in B and are compared by their point sets. Two
//! distinct points are neighbors when their difference is outside B.

use std::collections::{BTreeMap, BTreeSet};
#[cfg(test)]
use std::collections::HashSet;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

/// Largest modulus accepted by the exhaustive AGL scan.
pub const MAX_EQUIVALENCE_MODULUS: u32 = 16;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GeomError {
    #[error("modulus must be at least 2, got {0}")]
    InvalidModulus(u32),
    #[error("points must have at least one coordinate")]
    EmptyPoint,
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("modulus mismatch: {0} vs {1}")]
    ModulusMismatch(u32, u32),
    #[error("operation needs two distinct points")]
    EqualPoints,
    #[error("operation needs a nonzero vector")]
    ZeroVector,
    #[error("{0} is not in B")]
    NotInB(RingPoint),
    #[error("{0} is not a prime power")]
    NotPrimePower(u32),
    #[error("modulus {0} is too large for exhaustive AGL search (max {MAX_EQUIVALENCE_MODULUS})")]
    ModulusTooLarge(u32),
    #[error("matrix determinant {0} is not a unit")]
    SingularMatrix(u32),
    #[error("matrix must be {0}x{0}")]
    MatrixShape(usize),
    #[error("only supported in dimension 2, got {0}")]
    UnsupportedDimension(usize),
}

pub fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

pub fn is_unit(a: u32, r: u32) -> bool {
    gcd(a % r, r) == 1
}

/// Divisors of `r` in increasing order.
pub fn divisors(r: u32) -> Vec<u32> {
    (1..=r).filter(|d| r % d == 0).collect()
}

pub fn is_prime_power(r: u32) -> bool {
    if r < 2 {
        return false;
    }
    let p = (2..=r).find(|d| r % d == 0).unwrap();
    let mut rest = r;
    while rest % p == 0 {
        rest /= p;
    }
    rest == 1
}

/// A point of (Z/r)^m with every coordinate reduced into [0, r-1].
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RingPoint {
    coords: Vec<u32>,
    modulus: u32,
}

impl RingPoint {
    pub fn new(coords: &[i64], modulus: u32) -> Result<Self, GeomError> {
        if modulus < 2 {
            return Err(GeomError::InvalidModulus(modulus));
        }
        if coords.is_empty() {
            return Err(GeomError::EmptyPoint);
        }
        Ok(Self::from_iter_unchecked(
            coords.iter().map(|c| c.rem_euclid(modulus as i64) as u32),
            modulus,
        ))
    }

    /// The plane point (a, b) mod r.
    pub fn xy(a: i64, b: i64, modulus: u32) -> Result<Self, GeomError> {
        Self::new(&[a, b], modulus)
    }

    pub(crate) fn from_iter_unchecked(coords: impl IntoIterator<Item = u32>, modulus: u32) -> Self {
        RingPoint {
            coords: coords.into_iter().map(|c| c % modulus).collect(),
            modulus,
        }
    }

    pub fn zero(dim: usize, modulus: u32) -> Self {
        Self::from_iter_unchecked(std::iter::repeat_n(0, dim), modulus)
    }

    pub fn coords(&self) -> &[u32] {
        &self.coords
    }

    pub fn modulus(&self) -> u32 {
        self.modulus
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|&c| c == 0)
    }

    fn check_compatible(&self, other: &RingPoint) -> Result<(), GeomError> {
        if self.modulus != other.modulus {
            return Err(GeomError::ModulusMismatch(self.modulus, other.modulus));
        }
        if self.dim() != other.dim() {
            return Err(GeomError::DimensionMismatch(self.dim(), other.dim()));
        }
        Ok(())
    }

    /// # Panics
    /// If the points live in different spaces.
    pub fn add(&self, other: &RingPoint) -> RingPoint {
        self.check_compatible(other).expect("incompatible points");
        Self::from_iter_unchecked(
            self.coords.iter().zip(&other.coords).map(|(a, b)| a + b),
            self.modulus,
        )
    }

    /// # Panics
    /// If the points live in different spaces.
    pub fn sub(&self, other: &RingPoint) -> RingPoint {
        self.check_compatible(other).expect("incompatible points");
        Self::from_iter_unchecked(
            self.coords.iter().zip(&other.coords).map(|(a, b)| a + self.modulus - b),
            self.modulus,
        )
    }

    pub fn neg(&self) -> RingPoint {
        Self::from_iter_unchecked(self.coords.iter().map(|c| self.modulus - c), self.modulus)
    }

    pub fn scale(&self, l: u32) -> RingPoint {
        let r = self.modulus as u64;
        Self::from_iter_unchecked(
            self.coords.iter().map(|&c| (c as u64 * (l as u64 % r) % r) as u32),
            self.modulus,
        )
    }

    /// gcd of the coordinates together with r.
    pub fn content(&self) -> u32 {
        self.coords.iter().fold(self.modulus, |g, &c| gcd(g, c))
    }
}

impl fmt::Display for RingPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.coords.iter().map(u32::to_string).collect();
        write!(f, "({})", parts.join(","))
    }
}

impl fmt::Debug for RingPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self} mod {}", self.modulus)
    }
}

impl Serialize for RingPoint {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.coords.serialize(serializer)
    }
}

/// True iff `v` is a row of some invertible matrix over Z/r.
pub fn in_b(v: &RingPoint) -> bool {
    v.content() == 1
}

/// A vector certified to lie in B.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct Direction(RingPoint);

impl Direction {
    pub fn new(v: RingPoint) -> Result<Self, GeomError> {
        if in_b(&v) {
            Ok(Direction(v))
        } else {
            Err(GeomError::NotInB(v))
        }
    }

    pub fn point(&self) -> &RingPoint {
        &self.0
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// `P ∘ Q`: distinct points whose difference is outside B.
pub fn is_neighbor(p: &RingPoint, q: &RingPoint) -> Result<bool, GeomError> {
    p.check_compatible(q)?;
    if p == q {
        return Err(GeomError::EqualPoints);
    }
    Ok(!in_b(&p.sub(q)))
}

/// `{Q : P - Q ∉ B}`, which contains `p` itself.
pub fn neighbors_of(p: &RingPoint) -> Result<Vec<RingPoint>, GeomError> {
    require_plane(p)?;
    let r = p.modulus();
    let mut out = Vec::new();
    for a in 0..r {
        for b in 0..r {
            let other = RingPoint::from_iter_unchecked([a, b], r);
            if !in_b(&p.sub(&other)) {
                out.push(other);
            }
        }
    }
    Ok(out)
}

fn require_plane(p: &RingPoint) -> Result<(), GeomError> {
    if p.dim() == 2 {
        Ok(())
    } else {
        Err(GeomError::UnsupportedDimension(p.dim()))
    }
}

/// A line `base + R·dir`; equality and hashing use the point set only.
#[derive(Clone, Debug, Serialize)]
pub struct Line {
    base: RingPoint,
    dir: Direction,
    #[serde(skip)]
    points: Vec<RingPoint>,
}

impl Line {
    pub fn base(&self) -> &RingPoint {
        &self.base
    }

    pub fn direction(&self) -> &Direction {
        &self.dir
    }

    /// The r points of the line, sorted.
    pub fn points(&self) -> &[RingPoint] {
        &self.points
    }

    pub fn contains(&self, p: &RingPoint) -> bool {
        self.points.binary_search(p).is_ok()
    }
}

impl PartialEq for Line {
    fn eq(&self, other: &Self) -> bool {
        self.points == other.points
    }
}

impl Eq for Line {}

impl std::hash::Hash for Line {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.points.hash(state);
    }
}

impl PartialOrd for Line {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Line {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.points.cmp(&other.points)
    }
}

pub fn line_points(base: &RingPoint, dir: &Direction) -> Result<Line, GeomError> {
    require_plane(base)?;
    base.check_compatible(dir.point())?;
    let r = base.modulus();
    let points: BTreeSet<RingPoint> = (0..r).map(|l| base.add(&dir.point().scale(l))).collect();
    debug_assert_eq!(points.len(), r as usize);
    Ok(Line {
        base: base.clone(),
        dir: dir.clone(),
        points: points.into_iter().collect(),
    })
}

/// Every vector of B in the plane over Z/r, in lexicographic order.
pub fn b_vectors(r: u32) -> Vec<Direction> {
    let mut out = Vec::new();
    for u in 0..r {
        for v in 0..r {
            if gcd(gcd(r, u), v) == 1 {
                out.push(Direction(RingPoint::from_iter_unchecked([u, v], r)));
            }
        }
    }
    out
}

/// All distinct lines containing both points, sorted by point set.
///
/// Scans every direction in B: the `(1,t)`/`(s,1)` representatives only cover
/// B up to units when r is a prime power (mod 6, `(4,3)` is neither).
pub fn lines_through(p: &RingPoint, q: &RingPoint) -> Result<Vec<Line>, GeomError> {
    p.check_compatible(q)?;
    require_plane(p)?;
    if p == q {
        return Err(GeomError::EqualPoints);
    }
    let r = p.modulus();
    let diff = q.sub(p);
    let mut lines = BTreeSet::new();
    for dir in b_vectors(r) {
        if (1..r).any(|l| dir.point().scale(l) == diff) {
            lines.insert(line_points(p, &dir)?);
        }
    }
    Ok(lines.into_iter().collect())
}

/// Additive order of a nonzero vector: r / gcd(coords, r).
pub fn element_order(v: &RingPoint) -> Result<u32, GeomError> {
    if v.is_zero() {
        return Err(GeomError::ZeroVector);
    }
    Ok(v.modulus() / v.content())
}

/// Number of lines through two distinct points when r is a prime power.
pub fn count_lines_prime_power(p: &RingPoint, q: &RingPoint) -> Result<u32, GeomError> {
    p.check_compatible(q)?;
    require_plane(p)?;
    if p == q {
        return Err(GeomError::EqualPoints);
    }
    let r = p.modulus();
    if !is_prime_power(r) {
        return Err(GeomError::NotPrimePower(r));
    }
    Ok(r / element_order(&p.sub(q))?)
}

fn det_mod(matrix: &[u32], m: usize, r: u32) -> u32 {
    if m == 1 {
        return matrix[0] % r;
    }
    let r64 = r as u64;
    let mut total = 0u64;
    for col in 0..m {
        let minor: Vec<u32> = (1..m)
            .flat_map(|row| (0..m).filter(move |&c| c != col).map(move |c| (row, c)))
            .map(|(row, c)| matrix[row * m + c])
            .collect();
        let term = matrix[col] as u64 * det_mod(&minor, m - 1, r) as u64 % r64;
        total = if col % 2 == 0 {
            (total + term) % r64
        } else {
            (total + r64 - term) % r64
        };
    }
    total as u32
}

/// `w ↦ M w + v` with `det M` a unit mod r.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AglMap {
    /// Row-major m×m.
    matrix: Vec<u32>,
    translation: RingPoint,
}

impl AglMap {
    pub fn new(matrix: Vec<Vec<i64>>, translation: RingPoint) -> Result<Self, GeomError> {
        let m = translation.dim();
        let r = translation.modulus();
        if matrix.len() != m || matrix.iter().any(|row| row.len() != m) {
            return Err(GeomError::MatrixShape(m));
        }
        let flat: Vec<u32> = matrix
            .iter()
            .flatten()
            .map(|&x| x.rem_euclid(r as i64) as u32)
            .collect();
        Self::from_flat(flat, translation)
    }

    fn from_flat(matrix: Vec<u32>, translation: RingPoint) -> Result<Self, GeomError> {
        let m = translation.dim();
        let r = translation.modulus();
        let det = det_mod(&matrix, m, r);
        if !is_unit(det, r) {
            return Err(GeomError::SingularMatrix(det));
        }
        Ok(AglMap { matrix, translation })
    }

    pub fn identity(dim: usize, modulus: u32) -> Self {
        let matrix = (0..dim * dim)
            .map(|i| u32::from(i % (dim + 1) == 0))
            .collect();
        AglMap {
            matrix,
            translation: RingPoint::zero(dim, modulus),
        }
    }

    pub fn dim(&self) -> usize {
        self.translation.dim()
    }

    pub fn modulus(&self) -> u32 {
        self.translation.modulus()
    }

    pub fn matrix_entry(&self, row: usize, col: usize) -> u32 {
        self.matrix[row * self.dim() + col]
    }

    pub fn translation(&self) -> &RingPoint {
        &self.translation
    }

    pub fn determinant(&self) -> u32 {
        det_mod(&self.matrix, self.dim(), self.modulus())
    }

    /// Image of a point under the linear part only.
    fn linear(&self, p: &RingPoint) -> RingPoint {
        let m = self.dim();
        let r = self.modulus() as u64;
        RingPoint::from_iter_unchecked(
            (0..m).map(|row| {
                (0..m)
                    .map(|c| self.matrix[row * m + c] as u64 * p.coords[c] as u64 % r)
                    .sum::<u64>()
                    % r
            })
            .map(|x| x as u32),
            self.modulus(),
        )
    }

    pub fn apply(&self, p: &RingPoint) -> Result<RingPoint, GeomError> {
        p.check_compatible(&self.translation)?;
        Ok(self.linear(p).add(&self.translation))
    }
}

pub fn apply_agl(t: &AglMap, s: &[RingPoint]) -> Result<Vec<RingPoint>, GeomError> {
    s.iter().map(|p| t.apply(p)).collect()
}

/// Sorted multiset of additive orders of pairwise differences; AGL-invariant.
fn difference_profile(s: &[RingPoint]) -> Vec<u32> {
    let mut orders = Vec::new();
    for (i, a) in s.iter().enumerate() {
        for b in &s[i + 1..] {
            orders.push(element_order(&a.sub(b)).unwrap_or(1));
        }
    }
    orders.sort_unstable();
    orders
}

/// Some `T` in AGL(2, Z/r) with `T(s1) = s2` as sets, or `None`.
///
/// Scans every invertible matrix; for each, the translation is forced by
/// where the first point of `s1` lands, so only |s2| translations are tried.
pub fn are_agl_equivalent(s1: &[RingPoint], s2: &[RingPoint]) -> Result<Option<AglMap>, GeomError> {
    let Some(first) = s1.first().or(s2.first()) else {
        return Ok(None);
    };
    require_plane(first)?;
    for p in s1.iter().chain(s2) {
        p.check_compatible(first)?;
    }
    let r = first.modulus();
    if r > MAX_EQUIVALENCE_MODULUS {
        return Err(GeomError::ModulusTooLarge(r));
    }
    let source: Vec<RingPoint> = s1.iter().collect::<BTreeSet<_>>().into_iter().cloned().collect();
    let target: BTreeSet<&RingPoint> = s2.iter().collect();
    if source.len() != target.len() || source.is_empty() {
        return Ok(None);
    }
    let target_points: Vec<RingPoint> = target.iter().map(|p| (*p).clone()).collect();
    if difference_profile(&source) != difference_profile(&target_points) {
        return Ok(None);
    }

    for matrix in gl2(r) {
        let linear = AglMap {
            matrix: matrix.to_vec(),
            translation: RingPoint::zero(2, r),
        };
        let images: Vec<RingPoint> = source.iter().map(|p| linear.linear(p)).collect();
        for anchor in &target_points {
            let v = anchor.sub(&images[0]);
            if images.iter().all(|img| target.contains(&img.add(&v))) {
                return Ok(Some(AglMap {
                    matrix: matrix.to_vec(),
                    translation: v,
                }));
            }
        }
    }
    Ok(None)
}

/// All invertible 2×2 matrices over Z/r, row-major.
pub fn gl2(r: u32) -> Vec<[u32; 4]> {
    let mut out = Vec::new();
    for a in 0..r {
        for b in 0..r {
            for c in 0..r {
                for d in 0..r {
                    if is_unit(det_mod(&[a, b, c, d], 2, r), r) {
                        out.push([a, b, c, d]);
                    }
                }
            }
        }
    }
    out
}

impl AglMap {
    /// Plane map from a row-major 2×2 matrix and translation.
    pub fn plane(matrix: [u32; 4], translation: RingPoint) -> Result<Self, GeomError> {
        require_plane(&translation)?;
        Self::from_flat(matrix.iter().map(|x| x % translation.modulus()).collect(), translation)
    }
}

/// Groups points by the line through them; used by collinearity scans.
pub(crate) fn collinear_subsets(points: &[RingPoint]) -> Vec<(Line, Vec<RingPoint>)> {
    let mut by_line: BTreeMap<Line, BTreeSet<RingPoint>> = BTreeMap::new();
    for (i, a) in points.iter().enumerate() {
        for b in &points[i + 1..] {
            if a == b {
                continue;
            }
            for line in lines_through(a, b).unwrap_or_default() {
                let members: BTreeSet<RingPoint> =
                    points.iter().filter(|p| line.contains(p)).cloned().collect();
                by_line.entry(line).or_insert(members);
            }
        }
    }
    by_line.into_iter().map(|(l, s)| (l, s.into_iter().collect())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(a: i64, b: i64, r: u32) -> RingPoint {
        RingPoint::xy(a, b, r).unwrap()
    }

    fn dir(a: i64, b: i64, r: u32) -> Direction {
        Direction::new(pt(a, b, r)).unwrap()
    }

    /// B by definition: rows of invertible 2×2 matrices.
    fn in_b_brute(u: u32, v: u32, r: u32) -> bool {
        (0..r).any(|s| (0..r).any(|t| is_unit((u * t + r * r - v * s) % r, r)))
    }

    #[test]
    fn b_membership_examples() {
        assert!(in_b(&pt(1, 4, 8)));
        assert!(in_b(&pt(4, 3, 6)));
        assert!(!in_b(&pt(2, 4, 8)));
        assert!(!in_b_brute(2, 4, 8));
    }

    #[test]
    fn gcd_criterion_matches_definition() {
        for r in 2..=16u32 {
            for u in 0..r {
                for v in 0..r {
                    assert_eq!(in_b(&pt(u as i64, v as i64, r)), in_b_brute(u, v, r), "({u},{v}) mod {r}");
                }
            }
        }
    }

    #[test]
    fn barbilian_axioms_hold_for_b() {
        for r in 2..=16u32 {
            let b: Vec<Direction> = b_vectors(r);
            let bset: HashSet<&RingPoint> = b.iter().map(Direction::point).collect();
            // E1
            assert!(bset.contains(&pt(1, 0, r)) && bset.contains(&pt(0, 1, r)));
            let units: Vec<u32> = (1..r).filter(|&u| is_unit(u, r)).collect();
            for d in &b {
                let (u, v) = (d.point().coords()[0], d.point().coords()[1]);
                // E2
                for &k in &units {
                    assert!(bset.contains(&d.point().scale(k)));
                }
                // E3: some complementary B-row gives a unit determinant
                let complement = b.iter().find(|e| {
                    let (s, t) = (e.point().coords()[0], e.point().coords()[1]);
                    is_unit((u * t + r * r - v * s) % r, r)
                });
                let comp = complement.expect("E3");
                // E4
                for l in 0..r {
                    assert!(bset.contains(&d.point().add(&comp.point().scale(l))));
                }
            }
        }
    }

    #[test]
    fn neighbor_examples() {
        let o = pt(0, 0, 8);
        assert!(!is_neighbor(&o, &pt(1, 4, 8)).unwrap());
        assert!(is_neighbor(&o, &pt(2, 0, 8)).unwrap());
        assert!(is_neighbor(&o, &pt(4, 4, 8)).unwrap());
        assert_eq!(is_neighbor(&o, &o), Err(GeomError::EqualPoints));
    }

    #[test]
    fn neighbors_of_origin_mod_8() {
        let got: BTreeSet<RingPoint> = neighbors_of(&pt(0, 0, 8)).unwrap().into_iter().collect();
        let want: BTreeSet<RingPoint> = [0, 2, 4, 6]
            .iter()
            .flat_map(|&a| [0, 2, 4, 6].map(move |b| (a, b)))
            .map(|(a, b)| pt(a, b, 8))
            .collect();
        assert_eq!(got, want);
    }

    #[test]
    fn line_point_examples() {
        let line = line_points(&pt(0, 0, 8), &dir(1, 4, 8)).unwrap();
        let want: Vec<RingPoint> = [(0, 0), (1, 4), (2, 0), (3, 4), (4, 0), (5, 4), (6, 0), (7, 4)]
            .iter()
            .map(|&(a, b)| pt(a, b, 8))
            .collect();
        assert_eq!(line.points(), want.as_slice());

        let axis = line_points(&pt(0, 0, 5), &dir(1, 0, 5)).unwrap();
        assert_eq!(axis.points(), (0..5).map(|l| pt(l, 0, 5)).collect::<Vec<_>>().as_slice());

        let vertical = line_points(&pt(1, 1, 4), &dir(0, 1, 4)).unwrap();
        assert_eq!(vertical.points().len(), 4);
        assert!([(1, 1), (1, 2), (1, 3), (1, 0)].iter().all(|&(a, b)| vertical.contains(&pt(a, b, 4))));
    }

    #[test]
    fn lines_have_r_points_and_equal_by_set() {
        let a = line_points(&pt(0, 0, 8), &dir(1, 4, 8)).unwrap();
        let b = line_points(&pt(2, 0, 8), &dir(3, 4, 8)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn lines_through_examples() {
        let through = |a: (i64, i64), b: (i64, i64), r| lines_through(&pt(a.0, a.1, r), &pt(b.0, b.1, r)).unwrap();
        let four = through((0, 0), (4, 0), 8);
        assert_eq!(four.len(), 4);
        for t in [0, 2, 4, 6] {
            assert!(four.contains(&line_points(&pt(0, 0, 8), &dir(1, t, 8)).unwrap()));
        }
        let three = through((0, 0), (2, 0), 6);
        assert_eq!(three.len(), 3);
        for (u, v) in [(1, 0), (1, 3), (4, 3)] {
            assert!(three.contains(&line_points(&pt(0, 0, 6), &dir(u, v, 6)).unwrap()));
        }
        assert_eq!(through((0, 0), (1, 4), 8).len(), 1);
        assert_eq!(through((0, 0), (2, 0), 8).len(), 2);
    }

    #[test]
    fn element_order_examples() {
        assert_eq!(element_order(&pt(4, 0, 8)), Ok(2));
        assert_eq!(element_order(&pt(2, 4, 8)), Ok(4));
        assert_eq!(element_order(&pt(1, 4, 8)), Ok(8));
        assert_eq!(element_order(&pt(0, 0, 8)), Err(GeomError::ZeroVector));
    }

    #[test]
    fn prime_power_line_count() {
        let o = pt(0, 0, 8);
        assert_eq!(count_lines_prime_power(&o, &pt(4, 0, 8)), Ok(4));
        assert_eq!(count_lines_prime_power(&o, &pt(1, 4, 8)), Ok(1));
        assert_eq!(
            count_lines_prime_power(&pt(0, 0, 6), &pt(2, 0, 6)),
            Err(GeomError::NotPrimePower(6))
        );
    }

    #[test]
    fn formula_matches_enumeration_for_prime_powers() {
        for r in [2u32, 3, 4, 5, 7, 8, 9] {
            for a in 0..r as i64 {
                for b in 0..r as i64 {
                    let (p, q) = (pt(1, 2, r), pt(a, b, r));
                    if p == q {
                        continue;
                    }
                    assert_eq!(
                        count_lines_prime_power(&p, &q).unwrap() as usize,
                        lines_through(&p, &q).unwrap().len()
                    );
                }
            }
        }
    }

    #[test]
    fn prime_modulus_is_a_field_plane() {
        for r in [2u32, 3, 5, 7] {
            for a in 0..r as i64 {
                for b in 0..r as i64 {
                    let q = pt(a, b, r);
                    if q.is_zero() {
                        continue;
                    }
                    assert!(!is_neighbor(&pt(0, 0, r), &q).unwrap());
                    assert_eq!(lines_through(&pt(0, 0, r), &q).unwrap().len(), 1);
                }
            }
        }
    }

    #[test]
    fn reflexive_neighbor_relation_is_transitive_for_prime_powers() {
        let related = |x: &RingPoint, y: &RingPoint| x == y || is_neighbor(x, y).unwrap();
        for r in [4u32, 8, 9] {
            let all: Vec<RingPoint> = (0..r as i64).flat_map(|a| (0..r as i64).map(move |b| pt(a, b, r))).collect();
            for x in all.iter().step_by(3) {
                for y in all.iter().step_by(2) {
                    if !related(x, y) {
                        continue;
                    }
                    for z in &all {
                        if related(y, z) {
                            assert!(related(x, z), "{x:?} {y:?} {z:?}");
                        }
                    }
                }
            }
        }
        // not a local ring: (0,0)∘(2,0)∘(5,0) mod 6 but (0,0) and (5,0) are not neighbors
        let (x, y, z) = (pt(0, 0, 6), pt(2, 0, 6), pt(5, 3, 6));
        assert!(related(&x, &y) && related(&y, &z) && !related(&x, &z));
    }

    #[test]
    fn agl_examples() {
        let s = vec![pt(0, 0, 8), pt(3, 1, 8)];
        assert_eq!(apply_agl(&AglMap::identity(2, 8), &s).unwrap(), s);
        let shift = AglMap::new(vec![vec![1, 0], vec![0, 1]], pt(1, 1, 8)).unwrap();
        assert_eq!(apply_agl(&shift, &[pt(0, 0, 8)]).unwrap(), vec![pt(1, 1, 8)]);
        let stretch = AglMap::new(vec![vec![3, 0], vec![0, 1]], pt(0, 0, 8)).unwrap();
        assert_eq!(apply_agl(&stretch, &[pt(1, 0, 8)]).unwrap(), vec![pt(3, 0, 8)]);
        assert_eq!(
            AglMap::new(vec![vec![2, 0], vec![0, 1]], pt(0, 0, 8)),
            Err(GeomError::SingularMatrix(2))
        );
    }

    #[test]
    fn general_dimension_support() {
        let v = RingPoint::new(&[2, 4, 6], 8).unwrap();
        assert!(!in_b(&v));
        assert_eq!(element_order(&v), Ok(4));
        let t = AglMap::new(vec![vec![1, 1, 0], vec![0, 1, 0], vec![0, 0, 3]], RingPoint::new(&[1, 0, 0], 8).unwrap()).unwrap();
        assert_eq!(t.apply(&v).unwrap(), RingPoint::new(&[7, 4, 2], 8).unwrap());
        assert_eq!(lines_through(&v, &RingPoint::zero(3, 8)), Err(GeomError::UnsupportedDimension(3)));
    }

    #[test]
    fn agl_preserves_difference_structure() {
        let s = vec![pt(0, 0, 8), pt(3, 0, 8), pt(1, 4, 8), pt(2, 4, 8)];
        for m in gl2(8).into_iter().step_by(37) {
            let t = AglMap::plane(m, pt(5, 2, 8)).unwrap();
            let img = apply_agl(&t, &s).unwrap();
            assert_eq!(img.iter().collect::<BTreeSet<_>>().len(), s.len());
            for i in 0..s.len() {
                for j in i + 1..s.len() {
                    let (d, e) = (s[i].sub(&s[j]), img[i].sub(&img[j]));
                    assert_eq!(in_b(&d), in_b(&e));
                    assert_eq!(element_order(&d), element_order(&e));
                }
            }
        }
    }

    #[test]
    fn gl2_mod_8_size() {
        assert_eq!(gl2(8).len(), 1536);
    }

    #[test]
    fn equivalence_finds_witness() {
        let s = vec![pt(0, 0, 8), pt(3, 0, 8), pt(1, 4, 8), pt(2, 4, 8)];
        let t = AglMap::plane([3, 1, 2, 1], pt(4, 7, 8)).unwrap();
        let image = apply_agl(&t, &s).unwrap();
        let w = are_agl_equivalent(&s, &image).unwrap().expect("equivalent");
        let mut got = apply_agl(&w, &s).unwrap();
        let mut want = image.clone();
        got.sort();
        want.sort();
        assert_eq!(got, want);

        let same = are_agl_equivalent(&s, &s).unwrap().unwrap();
        assert_eq!(same, AglMap::identity(2, 8));
    }

    #[test]
    fn inequivalent_pair_has_no_witness() {
        let s1 = [pt(0, 0, 8), pt(1, 0, 8)];
        let s2 = [pt(0, 0, 8), pt(2, 0, 8)];
        // oracle: every (M, v) in AGL(2, Z/8)
        let target: BTreeSet<RingPoint> = s2.iter().cloned().collect();
        let mut maps = 0;
        for m in gl2(8) {
            for a in 0..8 {
                for b in 0..8 {
                    let t = AglMap::plane(m, pt(a, b, 8)).unwrap();
                    maps += 1;
                    let img: BTreeSet<RingPoint> = apply_agl(&t, &s1).unwrap().into_iter().collect();
                    assert_ne!(img, target);
                }
            }
        }
        assert_eq!(maps, 98304);
        assert_eq!(are_agl_equivalent(&s1, &s2), Ok(None));
        assert_eq!(
            are_agl_equivalent(&[pt(0, 0, 17)], &[pt(1, 0, 17)]),
            Err(GeomError::ModulusTooLarge(17))
        );
    }
}
