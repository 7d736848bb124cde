//! Seeded search for exponent sets with large minimum distance.
//!
//! Candidates come from a fixed generator so runs are reproducible in any
//! language:
//!
//! ```text
//! splitmix64(x): x += 0x9E3779B97F4A7C15
//!                z = x
//!                z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//!                z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//!                return z ^ (z >> 31)
//! state0 = splitmix64(seed), replaced by 0x9E3779B97F4A7C15 if zero
//! next:  s ^= s >> 12; s ^= s << 25; s ^= s >> 27
//!        return s * 0x2545F4914F6CDD1D            (all arithmetic mod 2^64)
//! below(n): t = (2^64 - n) mod n; draw x until x >= t; return x mod n
//! ```
//!
//! A random point of `(Z/r)^m` is `below(r^m)` read as base-r digits, most
//! significant first. A random k-set draws points until k distinct ones are
//! collected. A local swap draws the member index with `below(k)` and then a
//! replacement point, redrawing while it is already a member.

use std::collections::HashMap;
use std::io::Write;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use thiserror::Error;

use crate::bounds::{bad_configuration_scan, neighbor_bound, parallelogram_bound, BoundsError, ScanOptions};
use crate::gf::{field_for_order, FieldSpec, GfError};
use crate::ringgeo::RingPoint;
use crate::torcode::{build_generator, min_distance, CodeError, CodeReport, EnumOptions, ExponentSet};

#[derive(Debug, Error)]
pub enum SearchError {
    #[error("invalid search configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Field(#[from] GfError),
    #[error(transparent)]
    Code(#[from] CodeError),
    #[error(transparent)]
    Bounds(#[from] BoundsError),
    #[error("ledger write failed: {0}")]
    Io(#[from] std::io::Error),
}

/// xorshift64* seeded through splitmix64.
#[derive(Clone, Debug)]
pub struct Rng {
    state: u64,
}

pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl Rng {
    pub fn new(seed: u64) -> Self {
        let s = splitmix64(seed);
        Rng {
            state: if s == 0 { 0x9E37_79B9_7F4A_7C15 } else { s },
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        let mut s = self.state;
        s ^= s >> 12;
        s ^= s << 25;
        s ^= s >> 27;
        self.state = s;
        s.wrapping_mul(0x2545_F491_4F6C_DD1D)
    }

    /// Uniform in `0..n` by rejection.
    pub fn below(&mut self, n: u64) -> u64 {
        assert!(n > 0, "empty range");
        let threshold = n.wrapping_neg() % n;
        loop {
            let x = self.next_u64();
            if x >= threshold {
                return x % n;
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SearchStrategy {
    Random,
    LocalSwap,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EvalMode {
    Exact,
    BoundFirst,
}

#[derive(Clone, Debug)]
pub struct SearchConfig {
    pub q: u32,
    pub m: usize,
    pub k: usize,
    pub seed: u64,
    pub iterations: u64,
    pub strategy: SearchStrategy,
    pub eval_mode: EvalMode,
    /// In bound-first mode, skip candidates whose best bound is below the incumbent d.
    pub prune: bool,
    /// Evaluate pruned candidates anyway and check them against their bound.
    pub audit: bool,
    pub enumeration: EnumOptions,
    /// Sets evaluated before any random candidate (random search only).
    pub initial: Vec<ExponentSet>,
}

impl SearchConfig {
    pub fn new(q: u32, m: usize, k: usize, seed: u64, iterations: u64) -> Self {
        SearchConfig {
            q,
            m,
            k,
            seed,
            iterations,
            strategy: SearchStrategy::Random,
            eval_mode: EvalMode::BoundFirst,
            prune: true,
            audit: false,
            enumeration: EnumOptions::default(),
            initial: Vec::new(),
        }
    }

    fn validate(&self) -> Result<(), SearchError> {
        if self.m == 0 {
            return Err(SearchError::Config("m must be positive".into()));
        }
        if self.k == 0 {
            return Err(SearchError::Config("k must be positive".into()));
        }
        let cells = (self.q as u128 - 1).checked_pow(self.m as u32).unwrap_or(u128::MAX);
        if (self.k as u128) > cells {
            return Err(SearchError::Config(format!("k = {} exceeds the {cells} exponent classes", self.k)));
        }
        for s in &self.initial {
            if s.q() != self.q || s.dim() != self.m || s.len() != self.k {
                return Err(SearchError::Config("initial set does not match q, m, k".into()));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct RecordBounds {
    pub neighbor: Option<u64>,
    pub parallelogram: Option<u64>,
}

/// One exact evaluation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LedgerRecord {
    pub s: Vec<RingPoint>,
    pub q: u32,
    pub m: usize,
    pub d: usize,
    pub bounds: RecordBounds,
    pub seed: u64,
    pub iteration: u64,
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub pruned: bool,
    /// Milliseconds since the Unix epoch; not part of the determinism contract.
    pub timestamp: u64,
}

type LedgerKey = (u32, usize, Vec<RingPoint>);

/// Append-only record stream, optionally mirrored to a JSON Lines writer.
pub struct SearchLedger {
    records: Vec<LedgerRecord>,
    seen: HashMap<LedgerKey, (usize, usize)>,
    writer: Option<Box<dyn Write>>,
}

impl Default for SearchLedger {
    fn default() -> Self {
        Self::new()
    }
}

impl SearchLedger {
    pub fn new() -> Self {
        SearchLedger {
            records: Vec::new(),
            seen: HashMap::new(),
            writer: None,
        }
    }

    pub fn with_writer(writer: Box<dyn Write>) -> Self {
        SearchLedger {
            writer: Some(writer),
            ..Self::new()
        }
    }

    pub fn records(&self) -> &[LedgerRecord] {
        &self.records
    }

    fn lookup(&self, key: &LedgerKey) -> Option<(usize, usize)> {
        self.seen.get(key).copied()
    }

    fn append(&mut self, record: LedgerRecord, flags: usize) -> Result<(), SearchError> {
        if let Some(w) = self.writer.as_mut() {
            serde_json::to_writer(&mut *w, &record).map_err(std::io::Error::from)?;
            w.write_all(b"\n")?;
            w.flush()?;
        }
        if !record.pruned {
            self.seen.insert((record.q, record.m, record.s.clone()), (record.d, flags));
        }
        self.records.push(record);
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AuditViolation {
    pub s: Vec<RingPoint>,
    pub d: usize,
    pub bound: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SearchOutcome {
    pub best: Vec<RingPoint>,
    pub report: CodeReport,
    pub flags: usize,
    pub evaluations: usize,
    pub pruned: usize,
    pub duplicates: usize,
    /// Incumbent d after each iteration.
    pub history: Vec<usize>,
    pub audit_violations: Vec<AuditViolation>,
}

/// Ranking key: larger d, then fewer flags, then smaller sorted S.
fn better(a: (usize, usize, &[RingPoint]), b: (usize, usize, &[RingPoint])) -> bool {
    (b.0, a.1, a.2) < (a.0, b.1, b.2)
}

struct Evaluator<'a> {
    cfg: &'a SearchConfig,
    field: FieldSpec,
    ledger: &'a mut SearchLedger,
    evaluations: usize,
    pruned: usize,
    duplicates: usize,
    violations: Vec<AuditViolation>,
}

enum Verdict {
    Known { d: usize, flags: usize },
    Pruned,
    Evaluated { d: usize, flags: usize, report: CodeReport },
}

impl Evaluator<'_> {
    fn flags_and_bound(&self, s: &ExponentSet) -> Result<(usize, Option<u64>), SearchError> {
        if s.dim() != 2 {
            return Ok((0, None));
        }
        let rep = bad_configuration_scan(s, ScanOptions { frobenius: true })?;
        Ok((rep.flag_count(), rep.best_bound()))
    }

    fn record_bounds(&self, s: &ExponentSet) -> Result<RecordBounds, SearchError> {
        if s.dim() != 2 {
            return Ok(RecordBounds::default());
        }
        Ok(RecordBounds {
            neighbor: neighbor_bound(s)?.map(|r| r.bound),
            parallelogram: parallelogram_bound(s)?.map(|r| r.bound),
        })
    }

    fn exact(&mut self, s: &ExponentSet) -> Result<CodeReport, SearchError> {
        let g = build_generator(s, &self.field)?;
        Ok(min_distance(&g, &self.field, &self.cfg.enumeration)?)
    }

    fn evaluate(&mut self, s: &ExponentSet, iteration: u64, incumbent: Option<usize>) -> Result<Verdict, SearchError> {
        let sorted = s.sorted();
        let key = (self.cfg.q, self.cfg.m, sorted.points().to_vec());
        if let Some((d, flags)) = self.ledger.lookup(&key) {
            self.duplicates += 1;
            return Ok(Verdict::Known { d, flags });
        }
        let (flags, bound) = self.flags_and_bound(&sorted)?;
        let prunable = self.cfg.eval_mode == EvalMode::BoundFirst
            && self.cfg.prune
            && matches!((bound, incumbent), (Some(b), Some(d)) if b < d as u64);
        if prunable {
            self.pruned += 1;
            if self.cfg.audit {
                let report = self.exact(&sorted)?;
                let bound = bound.expect("prunable implies a bound");
                if report.d as u64 > bound {
                    self.violations.push(AuditViolation {
                        s: key.2.clone(),
                        d: report.d,
                        bound,
                    });
                }
                let record = self.record(&sorted, report.d, iteration, true)?;
                self.ledger.append(record, flags)?;
            }
            return Ok(Verdict::Pruned);
        }
        let report = self.exact(&sorted)?;
        self.evaluations += 1;
        let record = self.record(&sorted, report.d, iteration, false)?;
        self.ledger.append(record, flags)?;
        Ok(Verdict::Evaluated {
            d: report.d,
            flags,
            report,
        })
    }

    fn record(&self, s: &ExponentSet, d: usize, iteration: u64, pruned: bool) -> Result<LedgerRecord, SearchError> {
        Ok(LedgerRecord {
            s: s.points().to_vec(),
            q: self.cfg.q,
            m: self.cfg.m,
            d,
            bounds: self.record_bounds(s)?,
            seed: self.cfg.seed,
            iteration,
            pruned,
            timestamp: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|t| t.as_millis() as u64)
                .unwrap_or(0),
        })
    }
}

fn random_point(rng: &mut Rng, r: u32, m: usize) -> RingPoint {
    let mut idx = rng.below((r as u64).pow(m as u32));
    let mut coords = vec![0i64; m];
    for slot in coords.iter_mut().rev() {
        *slot = (idx % r as u64) as i64;
        idx /= r as u64;
    }
    RingPoint::new(&coords, r).expect("nonempty point")
}

fn random_set(rng: &mut Rng, q: u32, m: usize, k: usize) -> ExponentSet {
    let mut pts: Vec<RingPoint> = Vec::with_capacity(k);
    while pts.len() < k {
        let p = random_point(rng, q - 1, m);
        if !pts.contains(&p) {
            pts.push(p);
        }
    }
    ExponentSet::from_points(q, pts).expect("distinct points of the right shape")
}

struct Incumbent {
    set: ExponentSet,
    d: usize,
    flags: usize,
    report: Option<CodeReport>,
}

fn finish(
    best: Incumbent,
    ev: Evaluator<'_>,
    history: Vec<usize>,
) -> Result<SearchOutcome, SearchError> {
    let report = match best.report {
        Some(r) => r,
        None => {
            let g = build_generator(&best.set, &ev.field)?;
            min_distance(&g, &ev.field, &ev.cfg.enumeration)?
        }
    };
    Ok(SearchOutcome {
        best: best.set.points().to_vec(),
        report,
        flags: best.flags,
        evaluations: ev.evaluations,
        pruned: ev.pruned,
        duplicates: ev.duplicates,
        history,
        audit_violations: ev.violations,
    })
}

fn evaluator<'a>(cfg: &'a SearchConfig, ledger: &'a mut SearchLedger) -> Result<Evaluator<'a>, SearchError> {
    cfg.validate()?;
    Ok(Evaluator {
        cfg,
        field: field_for_order(cfg.q)?,
        ledger,
        evaluations: 0,
        pruned: 0,
        duplicates: 0,
        violations: Vec::new(),
    })
}

/// Evaluates `cfg.initial`, then `cfg.iterations` random k-sets.
pub fn random_search(cfg: &SearchConfig, ledger: &mut SearchLedger) -> Result<SearchOutcome, SearchError> {
    let mut ev = evaluator(cfg, ledger)?;
    let mut rng = Rng::new(cfg.seed);
    let mut best: Option<Incumbent> = None;
    let mut history = Vec::new();
    let total = cfg.initial.len() as u64 + cfg.iterations;
    for iteration in 0..total {
        let cand = match cfg.initial.get(iteration as usize) {
            Some(s) => s.sorted(),
            None => random_set(&mut rng, cfg.q, cfg.m, cfg.k).sorted(),
        };
        let verdict = ev.evaluate(&cand, iteration, best.as_ref().map(|b| b.d))?;
        let (d, flags, report) = match verdict {
            Verdict::Pruned => {
                history.push(best.as_ref().map_or(0, |b| b.d));
                continue;
            }
            Verdict::Known { d, flags } => (d, flags, None),
            Verdict::Evaluated { d, flags, report } => (d, flags, Some(report)),
        };
        let improves = best
            .as_ref()
            .is_none_or(|b| better((d, flags, cand.points()), (b.d, b.flags, b.set.points())));
        if improves {
            best = Some(Incumbent {
                set: cand,
                d,
                flags,
                report,
            });
        }
        history.push(best.as_ref().map_or(0, |b| b.d));
    }
    let best = best.ok_or_else(|| SearchError::Config("no candidates evaluated".into()))?;
    finish(best, ev, history)
}

/// Single-swap hill climbing from `start`.
pub fn local_swap_search(
    cfg: &SearchConfig,
    start: &ExponentSet,
    ledger: &mut SearchLedger,
) -> Result<SearchOutcome, SearchError> {
    if start.q() != cfg.q || start.dim() != cfg.m || start.len() != cfg.k {
        return Err(SearchError::Config("start set does not match q, m, k".into()));
    }
    let mut ev = evaluator(cfg, ledger)?;
    let mut rng = Rng::new(cfg.seed);
    let start = start.sorted();
    let mut current = match ev.evaluate(&start, 0, None)? {
        Verdict::Known { d, flags } => Incumbent { set: start, d, flags, report: None },
        Verdict::Evaluated { d, flags, report } => Incumbent { set: start, d, flags, report: Some(report) },
        Verdict::Pruned => unreachable!("nothing to prune against"),
    };
    let cells = (cfg.q as u64 - 1).pow(cfg.m as u32);
    let mut history = Vec::new();
    for iteration in 1..=cfg.iterations {
        if cells as usize <= cfg.k {
            history.push(current.d);
            continue;
        }
        let slot = rng.below(cfg.k as u64) as usize;
        let replacement = loop {
            let p = random_point(&mut rng, cfg.q - 1, cfg.m);
            if !current.set.points().contains(&p) {
                break p;
            }
        };
        let mut pts = current.set.points().to_vec();
        pts[slot] = replacement;
        let cand = ExponentSet::from_points(cfg.q, pts)?.sorted();
        let (d, flags, report) = match ev.evaluate(&cand, iteration, Some(current.d))? {
            Verdict::Pruned => {
                history.push(current.d);
                continue;
            }
            Verdict::Known { d, flags } => (d, flags, None),
            Verdict::Evaluated { d, flags, report } => (d, flags, Some(report)),
        };
        if better((d, flags, cand.points()), (current.d, current.flags, current.set.points())) {
            current = Incumbent {
                set: cand,
                d,
                flags,
                report,
            };
        }
        history.push(current.d);
    }
    finish(current, ev, history)
}
