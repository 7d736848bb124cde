//! Codeword enumeration by modular q-ary Gray code.
//!
//! Each message digit runs through the levels `0, 1, α, α^2, ..., α^{q-2}`.
//! Between consecutive Gray words exactly one digit moves to its next level,
//! so the cached codeword is updated by one scaled generator row.
//!
//! Codewords are kept in packed (additive) form; row entries stay as log
//! indices and are scaled through a doubled exp table.

use rayon::prelude::*;

use super::{GeneratorMatrix, Strategy};
use crate::gf::{FieldElement, FieldSpec};

pub(super) struct Tally {
    pub distribution: Vec<u64>,
    pub witness: Option<Vec<FieldElement>>,
    pub visited: u64,
}

trait PackedAdd: Sync {
    fn add(&self, a: u32, b: u32) -> u32;
}

struct Xor;

impl PackedAdd for Xor {
    #[inline(always)]
    fn add(&self, a: u32, b: u32) -> u32 {
        a ^ b
    }
}

struct ModP(u32);

impl PackedAdd for ModP {
    #[inline(always)]
    fn add(&self, a: u32, b: u32) -> u32 {
        let s = a + b;
        if s >= self.0 {
            s - self.0
        } else {
            s
        }
    }
}

struct Table {
    q: usize,
    sums: Vec<u16>,
}

impl Table {
    fn new(field: &FieldSpec) -> Self {
        let q = field.order() as usize;
        let mut sums = Vec::with_capacity(q * q);
        for a in 0..q as u32 {
            for b in 0..q as u32 {
                sums.push(field.add_packed(a, b) as u16);
            }
        }
        Table { q, sums }
    }
}

impl PackedAdd for Table {
    #[inline(always)]
    fn add(&self, a: u32, b: u32) -> u32 {
        self.sums[a as usize * self.q + b as usize] as u32
    }
}

struct Digits<'a>(&'a FieldSpec);

impl PackedAdd for Digits<'_> {
    fn add(&self, a: u32, b: u32) -> u32 {
        self.0.add_packed(a, b)
    }
}

#[derive(Clone)]
struct Acc {
    counts: Vec<u64>,
    best: usize,
    witness: Option<Vec<FieldElement>>,
    visited: u64,
}

impl Acc {
    fn new(n: usize) -> Self {
        Acc {
            counts: vec![0; n + 1],
            best: usize::MAX,
            witness: None,
            visited: 0,
        }
    }
}

struct Engine<'a, A> {
    g: &'a GeneratorMatrix,
    add: A,
    q: usize,
    /// exp table repeated twice so `log_a + log_b` needs no reduction.
    exp2: Vec<u32>,
    /// Log of `level(v+1) - level(v)`.
    step_log: Vec<u32>,
}

fn level(v: usize) -> FieldElement {
    if v == 0 {
        FieldElement::Zero
    } else {
        FieldElement::Pow(v as u32 - 1)
    }
}

impl<'a, A: PackedAdd> Engine<'a, A> {
    fn new(g: &'a GeneratorMatrix, field: &FieldSpec, add: A) -> Self {
        let q = field.order() as usize;
        let exp2: Vec<u32> = field.exp_table().iter().chain(field.exp_table()).copied().collect();
        let step_log = (0..q)
            .map(|v| {
                field
                    .sub(level((v + 1) % q), level(v))
                    .log()
                    .expect("consecutive levels differ")
            })
            .collect();
        Engine {
            g,
            add,
            q,
            exp2,
            step_log,
        }
    }

    /// `cw += α^{shift} · row`, returning the new weight.
    #[inline(always)]
    fn add_row(&self, cw: &mut [u32], row: usize, shift: u32) -> usize {
        let logs = self.g.row_logs(row);
        let exp = &self.exp2[shift as usize..];
        let mut weight = 0;
        for (x, &l) in cw.iter_mut().zip(logs) {
            let y = self.add.add(*x, exp[l as usize]);
            *x = y;
            weight += (y != 0) as usize;
        }
        weight
    }

    /// Visits every assignment of the `free` rows on top of `cw`.
    fn block(&self, mut cw: Vec<u32>, base: &[FieldElement], free: &[usize], acc: &mut Acc) {
        let t = free.len();
        let q = self.q;
        let mut counter = vec![0usize; t];
        let mut gray = vec![0usize; t];
        let mut weight = cw.iter().filter(|&&x| x != 0).count();
        loop {
            acc.counts[weight] += 1;
            acc.visited += 1;
            if weight > 0 && weight < acc.best {
                acc.best = weight;
                let mut msg = base.to_vec();
                for (&row, &v) in free.iter().zip(&gray) {
                    msg[row] = level(v);
                }
                acc.witness = Some(msg);
            }
            let mut pos = 0;
            while pos < t && counter[pos] == q - 1 {
                counter[pos] = 0;
                pos += 1;
            }
            if pos == t {
                break;
            }
            counter[pos] += 1;
            let v = gray[pos];
            weight = self.add_row(&mut cw, free[pos], self.step_log[v]);
            gray[pos] = (v + 1) % q;
        }
    }

    fn full(&self) -> Acc {
        let (n, k) = (self.g.n(), self.g.k());
        let mut acc = Acc::new(n);
        let free: Vec<usize> = (0..k).collect();
        self.block(vec![0; n], &vec![FieldElement::Zero; k], &free, &mut acc);
        acc
    }

    /// Start of a scalar-class block: row `lead` at coefficient 1 plus a fixed prefix.
    fn start(&self, lead: usize, prefix: &[(usize, usize)]) -> (Vec<u32>, Vec<FieldElement>) {
        let (n, k) = (self.g.n(), self.g.k());
        let mut cw = vec![0u32; n];
        let mut msg = vec![FieldElement::Zero; k];
        msg[lead] = FieldElement::ONE;
        self.add_row(&mut cw, lead, 0);
        for &(row, v) in prefix {
            msg[row] = level(v);
            if v > 0 {
                self.add_row(&mut cw, row, v as u32 - 1);
            }
        }
        (cw, msg)
    }

    fn scalar_classes(&self) -> Acc {
        let (n, k) = (self.g.n(), self.g.k());
        let mut acc = Acc::new(n);
        for lead in 0..k {
            let (cw, msg) = self.start(lead, &[]);
            let free: Vec<usize> = (lead + 1..k).collect();
            self.block(cw, &msg, &free, &mut acc);
        }
        acc
    }

    fn parallel(&self, threads: usize) -> Acc {
        let (n, k, q) = (self.g.n(), self.g.k(), self.q);
        let wanted = 8 * threads;
        // (lead, prefix assignment) with prefix rows lead+1 ..= lead+len
        let mut tasks: Vec<(usize, Vec<(usize, usize)>)> = Vec::new();
        for lead in 0..k {
            let free = k - lead - 1;
            let mut len = 0;
            let mut count = 1usize;
            while len < free && count < wanted {
                len += 1;
                count = count.saturating_mul(q);
            }
            for idx in 0..count {
                let mut rest = idx;
                let prefix = (0..len)
                    .map(|i| {
                        let v = rest % q;
                        rest /= q;
                        (lead + 1 + i, v)
                    })
                    .collect();
                tasks.push((lead, prefix));
            }
        }
        let run = |(lead, prefix): &(usize, Vec<(usize, usize)>)| {
            let mut acc = Acc::new(n);
            let (cw, msg) = self.start(*lead, prefix);
            let free: Vec<usize> = (lead + 1 + prefix.len()..k).collect();
            self.block(cw, &msg, &free, &mut acc);
            acc
        };
        let parts: Vec<Acc> = if threads <= 1 {
            tasks.iter().map(run).collect()
        } else {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .expect("thread pool");
            pool.install(|| tasks.par_iter().map(run).collect())
        };
        parts.into_iter().fold(Acc::new(n), |mut total, part| {
            for (t, c) in total.counts.iter_mut().zip(&part.counts) {
                *t += c;
            }
            total.visited += part.visited;
            if part.best < total.best {
                total.best = part.best;
                total.witness = part.witness;
            }
            total
        })
    }
}

fn tally_with<A: PackedAdd>(engine: Engine<'_, A>, strategy: Strategy, threads: usize, q: u64) -> Tally {
    let acc = match strategy {
        Strategy::Full => engine.full(),
        Strategy::ScalarClass => engine.scalar_classes(),
        Strategy::Parallel => engine.parallel(threads),
    };
    let distribution = match strategy {
        Strategy::Full => acc.counts,
        Strategy::ScalarClass | Strategy::Parallel => {
            let mut d: Vec<u64> = acc.counts.iter().map(|c| c * (q - 1)).collect();
            d[0] += 1;
            d
        }
    };
    Tally {
        distribution,
        witness: acc.witness,
        visited: acc.visited,
    }
}

pub(super) fn tally(g: &GeneratorMatrix, field: &FieldSpec, strategy: Strategy, threads: usize) -> Tally {
    let q = field.order() as u64;
    if field.characteristic() == 2 {
        tally_with(Engine::new(g, field, Xor), strategy, threads, q)
    } else if field.degree() == 1 {
        tally_with(Engine::new(g, field, ModP(field.characteristic())), strategy, threads, q)
    } else if q <= 256 {
        tally_with(Engine::new(g, field, Table::new(field)), strategy, threads, q)
    } else {
        tally_with(Engine::new(g, field, Digits(field)), strategy, threads, q)
    }
}
