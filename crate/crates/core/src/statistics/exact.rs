//! Exact law of the indicators by enumerating all `ℓ^m` equally likely label
//! sequences. Each indicator becomes a bitset over the sequences, so joint
//! counts are popcounts of intersections.

use std::fmt::Write as _;

use num_rational::Ratio;
use serde::Serialize;

use super::StatsError;
use crate::construction::pair_of_index;

/// Largest number of label sequences enumerated.
pub const ENUMERATION_LIMIT: u64 = 1_000_000;

/// Joint counts of `(D_a, D_b)`; `counts[2 d_a + d_b]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PairTable {
    pub a: usize,
    pub b: usize,
    pub counts: [u64; 4],
}

/// Joint counts of the triangle `(D_ij, D_ik, D_jk)` for labels `i < j < k`;
/// `counts[4 d_ij + 2 d_ik + d_jk]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TripleTable {
    pub labels: (usize, usize, usize),
    pub indices: [usize; 3],
    pub counts: [u64; 8],
}

#[derive(Clone, Debug, Serialize)]
pub struct ExactPairLaw {
    pub ell: u32,
    pub m: usize,
    /// `ℓ^m`, the common denominator.
    pub total: u64,
    /// `ones[a − 1] = #{D_a = 1}`.
    pub ones: Vec<u64>,
    pub pairs: Vec<PairTable>,
    pub triples: Vec<TripleTable>,
}

/// Outcome of the exact identities.
#[derive(Clone, Debug, Serialize)]
pub struct ExactCheck {
    pub marginals_hold: bool,
    pub pairs_factorize: bool,
    /// A triangle whose `(1, 1, 0)` cell is empty although the product of
    /// its marginals is not.
    pub triple_counterexample: Option<TripleTable>,
    pub violations: Vec<String>,
}

impl ExactCheck {
    pub fn passes(&self) -> bool {
        self.violations.is_empty() && self.triple_counterexample.is_some()
    }
}

struct Bits {
    words: Vec<u64>,
}

impl Bits {
    fn zeros(len: usize) -> Self {
        Self {
            words: vec![0; len.div_ceil(64)],
        }
    }
    fn set(&mut self, i: usize) {
        self.words[i / 64] |= 1 << (i % 64);
    }
    fn count(&self) -> u64 {
        self.words.iter().map(|w| w.count_ones() as u64).sum()
    }
    fn and_count(&self, other: &Bits) -> u64 {
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones() as u64)
            .sum()
    }
    fn and3_count(&self, b: &Bits, c: &Bits) -> u64 {
        self.words
            .iter()
            .zip(&b.words)
            .zip(&c.words)
            .map(|((x, y), z)| (x & y & z).count_ones() as u64)
            .sum()
    }
}

pub fn enumerate_exact(ell: u32, m: usize) -> Result<ExactPairLaw, StatsError> {
    if ell < 2 || m < 2 {
        return Err(StatsError::InvalidParameter(format!(
            "enumeration needs ell >= 2 and m >= 2, got ell={ell}, m={m}"
        )));
    }
    let too_large = StatsError::TooLarge {
        ell,
        m,
        limit: ENUMERATION_LIMIT,
    };
    let total = u32::try_from(m)
        .ok()
        .and_then(|e| (ell as u64).checked_pow(e))
        .filter(|&t| t <= ENUMERATION_LIMIT)
        .ok_or(too_large)?;
    let len = total as usize;
    let l = ell as usize;

    // by_label[i * ℓ + v]: sequences whose i-th label is v.
    let mut by_label: Vec<Bits> = (0..m * l).map(|_| Bits::zeros(len)).collect();
    let mut digits = vec![0usize; m];
    for s in 0..len {
        for (i, &d) in digits.iter().enumerate() {
            by_label[i * l + d].set(s);
        }
        for d in digits.iter_mut() {
            *d += 1;
            if *d < l {
                break;
            }
            *d = 0;
        }
    }

    let n = m * (m - 1) / 2;
    let mut columns = Vec::with_capacity(n);
    for i in 0..m {
        for j in i + 1..m {
            let mut col = Bits::zeros(len);
            for v in 0..l {
                let (a, b) = (&by_label[i * l + v], &by_label[j * l + v]);
                for (w, (x, y)) in col.words.iter_mut().zip(a.words.iter().zip(&b.words)) {
                    *w |= x & y;
                }
            }
            columns.push(col);
        }
    }

    let ones: Vec<u64> = columns.iter().map(Bits::count).collect();
    let mut pairs = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for a in 0..n {
        for b in a + 1..n {
            let both = columns[a].and_count(&columns[b]);
            let (oa, ob) = (ones[a], ones[b]);
            pairs.push(PairTable {
                a: a + 1,
                b: b + 1,
                counts: [total + both - oa - ob, ob - both, oa - both, both],
            });
        }
    }

    let index = |i: usize, j: usize| (i * (2 * m - 1) - i * i) / 2 + j - m;
    let both_of = |a: usize, b: usize| {
        let (a, b) = (a.min(b), a.max(b));
        // Position of (a, b) among pairs of n items, row by row.
        pairs[a * (2 * n - a - 1) / 2 + (b - a - 1)].counts[3]
    };
    let mut triples = Vec::new();
    for i in 1..=m {
        for j in i + 1..=m {
            for k in j + 1..=m {
                let idx = [index(i, j), index(i, k), index(j, k)];
                let [a, b, c] = idx.map(|x| x - 1);
                let all = columns[a].and3_count(&columns[b], &columns[c]);
                let (ab, ac, bc) = (both_of(a, b), both_of(a, c), both_of(b, c));
                let mut counts = [0u64; 8];
                counts[7] = all;
                counts[6] = ab - all;
                counts[5] = ac - all;
                counts[3] = bc - all;
                counts[4] = ones[a] + all - ab - ac;
                counts[2] = ones[b] + all - ab - bc;
                counts[1] = ones[c] + all - ac - bc;
                counts[0] = total - counts[1..].iter().sum::<u64>();
                triples.push(TripleTable {
                    labels: (i, j, k),
                    indices: idx,
                    counts,
                });
            }
        }
    }

    Ok(ExactPairLaw {
        ell,
        m,
        total,
        ones,
        pairs,
        triples,
    })
}

impl ExactPairLaw {
    pub fn n(&self) -> usize {
        self.ones.len()
    }

    /// Checks `#{D_a = 1} = ℓ^{m−1}`, `ℓ^m #{D_a = D_b = 1} = #{D_a = 1} #{D_b = 1}`
    /// and looks for a triangle that does not factorize.
    pub fn check(&self) -> ExactCheck {
        let total = self.total as u128;
        let mut violations = Vec::new();
        let expected = self.total / self.ell as u64;
        for (a, &o) in self.ones.iter().enumerate() {
            if o != expected {
                violations.push(format!("#{{D_{} = 1}} = {o}, expected {expected}", a + 1));
            }
        }
        let marginals_hold = violations.is_empty();
        let pair_start = violations.len();
        for p in &self.pairs {
            if p.counts.iter().sum::<u64>() != self.total {
                violations.push(format!("pair ({}, {}) table does not sum to {}", p.a, p.b, self.total));
            }
            let (oa, ob) = (self.ones[p.a - 1] as u128, self.ones[p.b - 1] as u128);
            if total * p.counts[3] as u128 != oa * ob {
                violations.push(format!("pair ({}, {}) does not factorize", p.a, p.b));
            }
        }
        let pairs_factorize = violations.len() == pair_start;
        for t in &self.triples {
            if t.counts.iter().sum::<u64>() != self.total {
                violations.push(format!("triple {:?} table does not sum to {}", t.labels, self.total));
            }
            for cell in [3usize, 5, 6] {
                if t.counts[cell] != 0 {
                    violations.push(format!(
                        "triple {:?} has {} sequences with two equalities but not the third",
                        t.labels, t.counts[cell]
                    ));
                }
            }
        }
        let triple_counterexample = self
            .triples
            .iter()
            .find(|t| {
                let [a, b, c] = t.indices.map(|x| self.ones[x - 1] as u128);
                total * total * t.counts[6] as u128 != a * b * (total - c)
            })
            .cloned();
        ExactCheck {
            marginals_hold,
            pairs_factorize,
            triple_counterexample,
            violations,
        }
    }

    /// `count/ℓ^m = reduced`.
    pub fn fraction(&self, count: u64) -> String {
        format!("{count}/{} = {}", self.total, Ratio::new(count, self.total))
    }

    /// Human-readable tables. With `full`, every marginal and pair is listed.
    pub fn render(&self, full: bool) -> String {
        let mut out = String::new();
        let check = self.check();
        let _ = writeln!(
            out,
            "ell = {}, m = {}, sequences = {}, indicators = {}, pairs = {}",
            self.ell,
            self.m,
            self.total,
            self.n(),
            self.pairs.len()
        );
        if full {
            for (a, &o) in self.ones.iter().enumerate() {
                let (i, j) = pair_of_index(a + 1, self.m).expect("valid index");
                let _ = writeln!(out, "P(D_{a} = 1) [labels {i},{j}] = {}", self.fraction(o), a = a + 1);
            }
            for p in &self.pairs {
                let _ = writeln!(
                    out,
                    "P(D_{} = 1, D_{} = 1) = {}",
                    p.a,
                    p.b,
                    self.fraction(p.counts[3])
                );
            }
        }
        let marg = Ratio::new(self.total / self.ell as u64, self.total);
        let _ = writeln!(
            out,
            "marginals: {} of {} indicators have P(D_a = 1) = {marg}",
            self.ones.iter().filter(|&&o| Ratio::new(o, self.total) == marg).count(),
            self.n()
        );
        let _ = writeln!(
            out,
            "pairs: {} of {} satisfy P(D_a = 1, D_b = 1) = P(D_a = 1) P(D_b = 1) = {}",
            self.pairs
                .iter()
                .filter(|p| {
                    self.total as u128 * p.counts[3] as u128
                        == self.ones[p.a - 1] as u128 * self.ones[p.b - 1] as u128
                })
                .count(),
            self.pairs.len(),
            marg * marg
        );
        match &check.triple_counterexample {
            Some(t) => {
                let (i, j, k) = t.labels;
                let _ = writeln!(
                    out,
                    "triple (D_{i}{j}, D_{i}{k}, D_{j}{k}) = indicators {:?}: P(1, 1, 0) = {} but product of marginals = {}",
                    t.indices,
                    self.fraction(t.counts[6]),
                    marg * marg * (Ratio::from_integer(1) - marg)
                );
                for (cell, &c) in t.counts.iter().enumerate() {
                    let _ = writeln!(
                        out,
                        "  ({}, {}, {}): {}",
                        cell >> 2,
                        (cell >> 1) & 1,
                        cell & 1,
                        self.fraction(c)
                    );
                }
            }
            None => {
                let _ = writeln!(out, "no triple fails factorization");
            }
        }
        for v in &check.violations {
            let _ = writeln!(out, "VIOLATION: {v}");
        }
        out
    }
}
