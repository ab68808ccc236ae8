//! The pairwise independent sequence: categorical labels `M_1..M_m`, the
//! indicators `D_{i,j} = 1{M_i = M_j}` and the values `X_k` drawn from `V`
//! when `D_k = 1` and from `U` otherwise.

use std::io::{self, Write};

use rand::Rng;
use thiserror::Error;

use crate::margins::{MomentBundle, SplitMargin};
use crate::scalar::Real;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConstructionError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("pair index needs 1 <= i < j <= m, got i={i}, j={j}, m={m}")]
    IndexOrder { i: usize, j: usize, m: usize },
    #[error("standardization needs sigma > 0")]
    ZeroVariance,
}

/// `m` labels in `{1, ..., ℓ}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabelSequence {
    ell: u32,
    labels: Vec<u32>,
}

impl LabelSequence {
    pub fn new(ell: u32, labels: Vec<u32>) -> Result<Self, ConstructionError> {
        check_sizes(ell, labels.len())?;
        if let Some(bad) = labels.iter().find(|&&l| l == 0 || l > ell) {
            return Err(ConstructionError::InvalidParameter(format!(
                "label {bad} outside 1..={ell}"
            )));
        }
        Ok(Self { ell, labels })
    }

    pub fn ell(&self) -> u32 {
        self.ell
    }
    pub fn m(&self) -> usize {
        self.labels.len()
    }
    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn counts(&self) -> CategoryCounts {
        let mut counts = vec![0u64; self.ell as usize];
        for &l in &self.labels {
            counts[l as usize - 1] += 1;
        }
        CategoryCounts { counts }
    }

    /// CSV with header `j,label`, `j` starting at 1.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "j,label")?;
        for (j, l) in self.labels.iter().enumerate() {
            writeln!(w, "{},{}", j + 1, l)?;
        }
        Ok(())
    }
}

/// The `n = m(m−1)/2` indicators in pair-index order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DependencySequence {
    m: usize,
    bits: Vec<bool>,
}

impl DependencySequence {
    pub fn m(&self) -> usize {
        self.m
    }
    pub fn n(&self) -> usize {
        self.bits.len()
    }
    /// `bits()[k − 1]` is `D_k`.
    pub fn bits(&self) -> &[bool] {
        &self.bits
    }
    pub fn ones(&self) -> u64 {
        self.bits.iter().filter(|&&b| b).count() as u64
    }
}

/// Number of labels in each category.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CategoryCounts {
    counts: Vec<u64>,
}

impl CategoryCounts {
    pub fn new(counts: Vec<u64>) -> Result<Self, ConstructionError> {
        if counts.len() < 2 {
            return Err(ConstructionError::InvalidParameter(format!(
                "need at least two categories, got {}",
                counts.len()
            )));
        }
        Ok(Self { counts })
    }
    pub fn counts(&self) -> &[u64] {
        &self.counts
    }
    pub fn ell(&self) -> u32 {
        self.counts.len() as u32
    }
    pub fn m(&self) -> u64 {
        self.counts.iter().sum()
    }
    pub fn n(&self) -> u64 {
        let m = self.m();
        m * m.saturating_sub(1) / 2
    }
}

/// The assembled `X_1..X_n` together with the indicators that chose their law.
#[derive(Clone, Debug)]
pub struct PairwiseSample<T> {
    m: usize,
    d: Vec<bool>,
    x: Vec<T>,
    moments: MomentBundle<T>,
}

impl<T: Real> PairwiseSample<T> {
    pub fn m(&self) -> usize {
        self.m
    }
    pub fn n(&self) -> usize {
        self.x.len()
    }
    pub fn ell(&self) -> u32 {
        self.moments.ell
    }
    pub fn x(&self) -> &[T] {
        &self.x
    }
    pub fn d(&self) -> &[bool] {
        &self.d
    }
    pub fn moments(&self) -> &MomentBundle<T> {
        &self.moments
    }

    /// CSV with header `k,d,x`; reals carry 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "k,d,x")?;
        for (k, (d, x)) in self.d.iter().zip(&self.x).enumerate() {
            writeln!(w, "{},{},{:.16e}", k + 1, u8::from(*d), x)?;
        }
        Ok(())
    }
}

fn check_sizes(ell: u32, m: usize) -> Result<(), ConstructionError> {
    if ell < 2 {
        return Err(ConstructionError::InvalidParameter(format!("ell must be >= 2, got {ell}")));
    }
    if m < 2 {
        return Err(ConstructionError::InvalidParameter(format!("m must be >= 2, got {m}")));
    }
    Ok(())
}

/// `m` independent uniform labels over `{1, ..., ℓ}`.
pub fn draw_labels<R: Rng + ?Sized>(ell: u32, m: usize, rng: &mut R) -> Result<LabelSequence, ConstructionError> {
    check_sizes(ell, m)?;
    let labels = (0..m).map(|_| rng.random_range(1..=ell)).collect();
    Ok(LabelSequence { ell, labels })
}

/// `k(i, j) = [i(2m − 1) − i²]/2 + j − m`, the 1-based position of the pair
/// `(i, j)` when pairs are listed row by row.
pub fn pair_index(i: usize, j: usize, m: usize) -> Result<usize, ConstructionError> {
    if i < 1 || i >= j || j > m {
        return Err(ConstructionError::IndexOrder { i, j, m });
    }
    Ok((i * (2 * m - 1) - i * i) / 2 + j - m)
}

/// Inverse of [`pair_index`].
pub fn pair_of_index(k: usize, m: usize) -> Option<(usize, usize)> {
    let n = m * m.saturating_sub(1) / 2;
    if k < 1 || k > n {
        return None;
    }
    let mut start = 1;
    for i in 1..m {
        let row = m - i;
        if k < start + row {
            return Some((i, i + 1 + (k - start)));
        }
        start += row;
    }
    None
}

pub fn build_d(labels: &LabelSequence) -> DependencySequence {
    let l = &labels.labels;
    let m = l.len();
    let mut bits = Vec::with_capacity(m * (m - 1) / 2);
    for i in 0..m {
        for j in i + 1..m {
            bits.push(l[i] == l[j]);
        }
    }
    DependencySequence { m, bits }
}

/// `p(N) = Σ C(N_i, 2)`, the number of ones among the indicators.
pub fn count_ones_closed_form(counts: &CategoryCounts) -> u64 {
    counts.counts.iter().map(|&c| c * c.saturating_sub(1) / 2).sum()
}

/// `(p(N) − n/ℓ) / √(n ℓ⁻¹ (1 − ℓ⁻¹))`.
pub fn standardized_count<T: Real>(counts: &CategoryCounts) -> Result<T, ConstructionError> {
    let n = counts.n();
    if n == 0 {
        return Err(ConstructionError::InvalidParameter("standardized count needs m >= 2".into()));
    }
    let n = T::from_u64(n).expect("n fits");
    let p = T::one() / T::from_u32(counts.ell()).expect("ell fits");
    let ones = T::from_u64(count_ones_closed_form(counts)).expect("count fits");
    Ok((ones - n * p) / (n * p * (T::one() - p)).sqrt())
}

/// One draw per index, in index order: `V` when `D_k = 1`, `U` otherwise.
pub fn build_x<T: Real, R: Rng>(d: &DependencySequence, split: &SplitMargin<T>, rng: &mut R) -> PairwiseSample<T> {
    let x = d
        .bits
        .iter()
        .map(|&b| if b { split.sample_v(rng) } else { split.sample_u(rng) })
        .collect();
    PairwiseSample {
        m: d.m,
        d: d.bits.clone(),
        x,
        moments: *split.moments(),
    }
}

/// `(Σ x_k − μ n) / (σ √n)`.
pub fn standardized_mean<T: Real>(sample: &PairwiseSample<T>) -> Result<T, ConstructionError> {
    standardize(sample.x.iter().copied().sum(), sample.n(), &sample.moments)
}

fn standardize<T: Real>(sum: T, n: usize, moments: &MomentBundle<T>) -> Result<T, ConstructionError> {
    if !(moments.sigma > T::zero()) || n == 0 {
        return Err(ConstructionError::ZeroVariance);
    }
    let n = T::from_usize(n).expect("n fits");
    Ok((sum - moments.mu * n) / (moments.sigma * n.sqrt()))
}

/// The standardized mean of a fresh sequence without materializing `D` or `X`.
///
/// Consumes the generator exactly as `draw_labels`, `build_d` and `build_x`
/// in sequence do, so both paths give bit-identical results.
pub fn simulate_standardized_mean<T: Real, R: Rng>(
    split: &SplitMargin<T>,
    m: usize,
    rng: &mut R,
) -> Result<T, ConstructionError> {
    let labels = draw_labels(split.ell(), m, rng)?;
    let l = &labels.labels;
    let mut sum = T::zero();
    for i in 0..m {
        let li = l[i];
        for &lj in &l[i + 1..] {
            sum = sum + if li == lj { split.sample_v(rng) } else { split.sample_u(rng) };
        }
    }
    standardize(sum, m * (m - 1) / 2, split.moments())
}

/// Standardized count of a fresh label sequence.
pub fn simulate_standardized_count<T: Real, R: Rng + ?Sized>(
    ell: u32,
    m: usize,
    rng: &mut R,
) -> Result<T, ConstructionError> {
    standardized_count(&draw_labels(ell, m, rng)?.counts())
}
