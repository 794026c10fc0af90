//! Empirical disjoint-block entropy rates.
//!
//! For strings `x`, `y` of length `n = k * l`, `N(u,x; v,y)` counts the
//! aligned blocks `i < k` with `x[il:(i+1)l] = u` and `y[il:(i+1)l] = v`.
//! The conditional rate is
//!
//! ```text
//! H_l(x|y) = -1/(l log|S1|) * sum_{u,v} P(u,x; v,y) log P(u,x | v,y)
//! ```
//!
//! summed over nonzero counts only. A trailing partial block is dropped.
//! Logarithms are base 2; the normalization makes every rate lie in `[0, 1]`.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::alphabet::{Alphabet, Symbol};
use crate::error::{Error, Result};
use crate::source::SequenceSource;
use crate::string::{encode_product, SymbolString};

const DENSE_CELLS: u128 = 1 << 22;

#[derive(Clone, Debug)]
enum Counts {
    Dense(Vec<u64>),
    Sparse(HashMap<u64, u64>),
}

/// Joint block counts `N(u,x; v,y)` over the aligned blocks of a pair of
/// strings, accumulated block by block.
///
/// Unconditional statistics use an oracle radix of 1 (every `v` is the
/// empty block). Accumulators over the same shape merge by adding counts.
#[derive(Clone, Debug)]
pub struct BlockStats {
    ell: usize,
    x_alphabet: Alphabet,
    x_radix: u64,
    y_radix: u64,
    blocks: u64,
    counts: Counts,
}

/// `radix^ell` as the number of distinct blocks, if it fits.
fn block_radix(radix: usize, ell: usize) -> Result<u64> {
    (radix as u64)
        .checked_pow(ell as u32)
        .ok_or(Error::TableTooLarge((radix as u128).saturating_pow(ell as u32)))
}

/// Big-endian code of a block.
#[inline]
pub fn block_code(block: &[Symbol], radix: usize) -> u64 {
    block.iter().fold(0u64, |acc, &s| acc * radix as u64 + s as u64)
}

impl BlockStats {
    /// Empty accumulator for `l`-blocks of `x_alphabet` paired with
    /// `l`-blocks of `y_alphabet` (`None` for unconditional counts).
    pub fn new(ell: usize, x_alphabet: &Alphabet, y_alphabet: Option<&Alphabet>) -> Result<Self> {
        if ell == 0 {
            return Err(Error::InvalidArgument("block length must be >= 1".into()));
        }
        let x_radix = block_radix(x_alphabet.size(), ell)?;
        let y_radix = match y_alphabet {
            Some(a) => block_radix(a.size(), ell)?,
            None => 1,
        };
        let cells = x_radix as u128 * y_radix as u128;
        if cells > u64::MAX as u128 {
            return Err(Error::TableTooLarge(cells));
        }
        let counts = if cells <= DENSE_CELLS {
            Counts::Dense(vec![0; cells as usize])
        } else {
            Counts::Sparse(HashMap::new())
        };
        Ok(Self {
            ell,
            x_alphabet: x_alphabet.clone(),
            x_radix,
            y_radix,
            blocks: 0,
            counts,
        })
    }

    /// Counts of the `floor(|x| / l)` complete aligned blocks of `x` and `y`.
    pub fn joint(x: &SymbolString, y: &SymbolString, ell: usize) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::LengthMismatch {
                left: x.len(),
                right: y.len(),
            });
        }
        let mut st = Self::new(ell, x.alphabet(), Some(y.alphabet()))?;
        st.require_block(x.len())?;
        let (xr, yr) = (x.alphabet().size(), y.alphabet().size());
        for (bx, by) in x.symbols().chunks_exact(ell).zip(y.symbols().chunks_exact(ell)) {
            st.push_block(block_code(bx, xr), block_code(by, yr));
        }
        Ok(st)
    }

    /// Unconditional counts of the complete aligned blocks of `x`.
    pub fn single(x: &SymbolString, ell: usize) -> Result<Self> {
        let mut st = Self::new(ell, x.alphabet(), None)?;
        st.require_block(x.len())?;
        let xr = x.alphabet().size();
        for bx in x.symbols().chunks_exact(ell) {
            st.push_block(block_code(bx, xr), 0);
        }
        Ok(st)
    }

    fn require_block(&self, len: usize) -> Result<()> {
        if len / self.ell == 0 {
            return Err(Error::NoCompleteBlock { ell: self.ell, len });
        }
        Ok(())
    }

    #[inline]
    pub fn push_block(&mut self, u: u64, v: u64) {
        debug_assert!(u < self.x_radix && v < self.y_radix);
        let key = u * self.y_radix + v;
        match &mut self.counts {
            Counts::Dense(c) => c[key as usize] += 1,
            Counts::Sparse(m) => *m.entry(key).or_insert(0) += 1,
        }
        self.blocks += 1;
    }

    /// Adds another accumulator of the same shape.
    pub fn merge(&mut self, other: &BlockStats) -> Result<()> {
        if self.ell != other.ell || self.x_radix != other.x_radix || self.y_radix != other.y_radix
        {
            return Err(Error::InvalidArgument("merging block stats of different shape".into()));
        }
        for (key, c) in other.nonzero() {
            match &mut self.counts {
                Counts::Dense(d) => d[key as usize] += c,
                Counts::Sparse(m) => *m.entry(key).or_insert(0) += c,
            }
        }
        self.blocks += other.blocks;
        Ok(())
    }

    pub fn ell(&self) -> usize {
        self.ell
    }

    /// `k`, the number of blocks counted.
    pub fn blocks(&self) -> u64 {
        self.blocks
    }

    pub fn x_radix(&self) -> u64 {
        self.x_radix
    }

    pub fn y_radix(&self) -> u64 {
        self.y_radix
    }

    /// `(u * y_radix + v, N(u,x; v,y))` for every nonzero count, in key order.
    pub fn nonzero(&self) -> Vec<(u64, u64)> {
        let mut out: Vec<(u64, u64)> = match &self.counts {
            Counts::Dense(c) => c
                .iter()
                .enumerate()
                .filter(|(_, &n)| n > 0)
                .map(|(k, &n)| (k as u64, n))
                .collect(),
            Counts::Sparse(m) => m.iter().map(|(&k, &n)| (k, n)).collect(),
        };
        if matches!(self.counts, Counts::Sparse(_)) {
            out.sort_unstable();
        }
        out
    }

    /// `N(u,x; v,y)`.
    pub fn count(&self, u: u64, v: u64) -> u64 {
        let key = u * self.y_radix + v;
        match &self.counts {
            Counts::Dense(c) => c.get(key as usize).copied().unwrap_or(0),
            Counts::Sparse(m) => m.get(&key).copied().unwrap_or(0),
        }
    }

    /// `N(v, y)`, keyed by `v`.
    pub fn oracle_marginal(&self) -> HashMap<u64, u64> {
        let mut m = HashMap::new();
        for (key, c) in self.nonzero() {
            *m.entry(key % self.y_radix).or_insert(0) += c;
        }
        m
    }

    fn norm(&self) -> f64 {
        self.x_alphabet.block_norm(self.ell)
    }

    /// `H_l(x | y)`. Zero when no block has been counted.
    pub fn cond_entropy(&self) -> f64 {
        if self.blocks == 0 {
            return 0.0;
        }
        if self.y_radix == 1 {
            return self.entropy_x();
        }
        let k = self.blocks as f64;
        let marg = self.oracle_marginal();
        let mut sum = 0.0;
        for (key, c) in self.nonzero() {
            let nv = marg[&(key % self.y_radix)];
            sum += (c as f64 / k) * (c as f64 / nv as f64).log2();
        }
        finish(-sum / self.norm())
    }

    /// `H_l(x)` from the `u`-marginal of the joint counts.
    pub fn entropy_x(&self) -> f64 {
        if self.blocks == 0 {
            return 0.0;
        }
        let mut marg: HashMap<u64, u64> = HashMap::new();
        for (key, c) in self.nonzero() {
            *marg.entry(key / self.y_radix).or_insert(0) += c;
        }
        finish(sorted_plugin_bits(marg.into_values().collect(), self.blocks) / self.norm())
    }

    /// Shannon entropy in bits of the joint block-pair distribution
    /// (not normalized).
    pub fn joint_bits(&self) -> f64 {
        if self.blocks == 0 {
            return 0.0;
        }
        sorted_plugin_bits(self.nonzero().into_iter().map(|(_, c)| c).collect(), self.blocks)
    }

    /// Shannon entropy in bits of the `v`-marginal (not normalized).
    pub fn oracle_bits(&self) -> f64 {
        if self.blocks == 0 {
            return 0.0;
        }
        sorted_plugin_bits(self.oracle_marginal().into_values().collect(), self.blocks)
    }

    /// Shannon entropy in bits of the `u`-marginal (not normalized).
    pub fn input_bits(&self) -> f64 {
        self.entropy_x() * self.norm()
    }
}

/// `-sum (c/k) log2(c/k)` with the counts summed in ascending order, so
/// equal count multisets give bit-identical results.
fn sorted_plugin_bits(mut counts: Vec<u64>, k: u64) -> f64 {
    counts.retain(|&c| c > 0);
    counts.sort_unstable();
    let k = k as f64;
    -counts
        .into_iter()
        .map(|c| {
            let p = c as f64 / k;
            p * p.log2()
        })
        .sum::<f64>()
}

fn finish(h: f64) -> f64 {
    h.clamp(0.0, 1.0) + 0.0
}

/// `H_l(x | y)`.
pub fn cond_block_entropy(x: &SymbolString, y: &SymbolString, ell: usize) -> Result<f64> {
    Ok(BlockStats::joint(x, y, ell)?.cond_entropy())
}

/// `H_l(x)`.
pub fn block_entropy(x: &SymbolString, ell: usize) -> Result<f64> {
    Ok(BlockStats::single(x, ell)?.entropy_x())
}

/// `H_l(x | y_1, ..., y_m)`: the conditioners are product-encoded into one
/// oracle over `S2^m`. An empty conditioner list gives `H_l(x)`.
pub fn cond_block_entropy_multi(
    x: &SymbolString,
    conditioners: &[SymbolString],
    ell: usize,
) -> Result<f64> {
    if conditioners.is_empty() {
        return block_entropy(x, ell);
    }
    let y = encode_product(conditioners)?;
    cond_block_entropy(x, &y, ell)
}

/// `I_l(x ; y) = H_l(x) - H_l(x | y)`. Not clamped: rounding can leave it a
/// hair below zero.
pub fn mutual_info_rate(x: &SymbolString, y: &SymbolString, ell: usize) -> Result<f64> {
    let st = BlockStats::joint(x, y, ell)?;
    Ok(st.entropy_x() - st.cond_entropy())
}

/// Result of splitting a product-string entropy with the chain rule.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainRule {
    /// `H_l` of the product string over `S^d` (normalized by `d l log|S|`).
    pub joint: f64,
    /// `terms[0] = H_l(parts[0])`,
    /// `terms[i] = H_l(parts[i] | parts[0], ..., parts[i-1])`.
    pub terms: Vec<f64>,
}

impl ChainRule {
    /// `|d * joint - sum(terms)|`; zero up to rounding.
    pub fn residual(&self) -> f64 {
        (self.terms.len() as f64 * self.joint - self.terms.iter().sum::<f64>()).abs()
    }
}

fn check_parts(parts: &[SymbolString], ell: usize) -> Result<usize> {
    let first = parts
        .first()
        .ok_or_else(|| Error::InvalidArgument("need at least one part".into()))?;
    let n = first.len();
    if let Some(p) = parts.iter().find(|p| p.len() != n) {
        return Err(Error::LengthMismatch {
            left: n,
            right: p.len(),
        });
    }
    if ell == 0 {
        return Err(Error::InvalidArgument("block length must be >= 1".into()));
    }
    if n / ell == 0 {
        return Err(Error::NoCompleteBlock { ell, len: n });
    }
    Ok(n)
}

/// Chain-rule split of `H_l(parts[0] x ... x parts[d-1])` into
/// successive conditional rates, so that
/// `d * joint == terms.iter().sum()` up to rounding.
pub fn chain_rule_decompose(parts: &[SymbolString], ell: usize) -> Result<ChainRule> {
    check_parts(parts, ell)?;
    let joint = block_entropy(&encode_product(parts)?, ell)?;
    let terms = (0..parts.len())
        .map(|i| cond_block_entropy_multi(&parts[i], &parts[..i], ell))
        .collect::<Result<Vec<_>>>()?;
    Ok(ChainRule { joint, terms })
}

/// `(H_{dl}(parts[0] ⊕ ... ⊕ parts[d-1]), H_l(parts[0] x ... x parts[d-1]))`.
///
/// The aligned `dl`-blocks of the interleave and the `l`-blocks of the
/// product are in bijection, so the two values are equal exactly.
pub fn interleave_product_entropy_equal(parts: &[SymbolString], ell: usize) -> Result<(f64, f64)> {
    check_parts(parts, ell)?;
    let d = parts.len();
    let inter = crate::ops::interleave_strings(parts)?;
    let a = block_entropy(&inter, d * ell)?;
    let b = block_entropy(&encode_product(parts)?, ell)?;
    Ok((a, b))
}

/// How the `k` grid of an [`EntropyProfile`] is laid out.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum KGrid {
    /// `k = 1, ceil(k r), ...` up to `k_max = floor(n / l)` (always
    /// included). The tail is the grid points with `k >= (1 - tail) k_max`.
    Geometric { ratio: f64, tail_fraction: f64 },
    /// Explicit prefix lengths; `k = floor(len / l)`. All points form the tail.
    Prefixes { lengths: Vec<usize> },
}

impl Default for KGrid {
    fn default() -> Self {
        KGrid::Geometric {
            ratio: 1.3,
            tail_fraction: 0.5,
        }
    }
}

impl KGrid {
    pub fn geometric(tail_fraction: f64) -> Self {
        KGrid::Geometric {
            ratio: 1.3,
            tail_fraction,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            KGrid::Geometric {
                ratio,
                tail_fraction,
            } => {
                if !(*ratio > 1.0) {
                    return Err(Error::InvalidArgument(format!("grid ratio {ratio} must be > 1")));
                }
                if !(*tail_fraction > 0.0 && *tail_fraction <= 1.0) {
                    return Err(Error::InvalidArgument(format!(
                        "tail fraction {tail_fraction} must be in (0, 1]"
                    )));
                }
                Ok(())
            }
            KGrid::Prefixes { lengths } if lengths.is_empty() => {
                Err(Error::InvalidArgument("empty prefix grid".into()))
            }
            KGrid::Prefixes { .. } => Ok(()),
        }
    }

    /// Block counts for block length `l` on a prefix of length `n`, plus the
    /// index where the tail starts.
    pub fn points(&self, n: usize, ell: usize) -> (Vec<usize>, usize) {
        let k_max = n / ell;
        match self {
            KGrid::Geometric {
                ratio,
                tail_fraction,
            } => {
                let mut ks = Vec::new();
                let mut k = 1usize;
                while k < k_max {
                    ks.push(k);
                    k = ((k as f64 * ratio).ceil() as usize).max(k + 1);
                }
                if k_max > 0 {
                    ks.push(k_max);
                }
                let cutoff = (1.0 - tail_fraction) * k_max as f64;
                let start = ks.iter().position(|&k| k as f64 >= cutoff).unwrap_or(0);
                (ks, start)
            }
            KGrid::Prefixes { lengths } => {
                let mut ks: Vec<usize> = lengths
                    .iter()
                    .map(|&len| len.min(n) / ell)
                    .filter(|&k| k > 0)
                    .collect();
                ks.sort_unstable();
                ks.dedup();
                (ks, 0)
            }
        }
    }
}

/// `H_l(x[:kl] | y[:kl])` at each `k` in `ks` (ascending), in one pass.
/// With `y = None` the series is unconditional.
pub fn entropy_series(
    x: &SymbolString,
    y: Option<&SymbolString>,
    ell: usize,
    ks: &[usize],
) -> Result<Vec<f64>> {
    if let Some(y) = y {
        if y.len() != x.len() {
            return Err(Error::LengthMismatch {
                left: x.len(),
                right: y.len(),
            });
        }
    }
    let mut st = BlockStats::new(ell, x.alphabet(), y.map(|y| y.alphabet()))?;
    let (xr, yr) = (x.alphabet().size(), y.map_or(1, |y| y.alphabet().size()));
    let mut out = Vec::with_capacity(ks.len());
    let mut done = 0usize;
    for &k in ks {
        if k * ell > x.len() {
            return Err(Error::NoCompleteBlock { ell, len: x.len() });
        }
        for b in done..k {
            let u = block_code(&x.symbols()[b * ell..(b + 1) * ell], xr);
            let v = y.map_or(0, |y| block_code(&y.symbols()[b * ell..(b + 1) * ell], yr));
            st.push_block(u, v);
        }
        done = done.max(k);
        out.push(st.cond_entropy());
    }
    Ok(out)
}

/// Min and max of `values[start..]`.
pub fn tail_extrema(values: &[f64], start: usize) -> (f64, f64) {
    values[start..]
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
}

/// Block entropy rates across block lengths and prefix lengths.
///
/// `tail_min[l]` and `tail_max[l]` stand in for the liminf and limsup over
/// `k`; the headline estimates are taken at the largest block length.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntropyProfile {
    pub ell: Vec<usize>,
    pub k: Vec<Vec<usize>>,
    #[serde(rename = "H")]
    pub h: Vec<Vec<f64>>,
    pub tail_start: Vec<usize>,
    pub tail_min: Vec<f64>,
    pub tail_max: Vec<f64>,
    pub dim_proxy: f64,
    pub strong_dim_proxy: f64,
}

impl EntropyProfile {
    /// Row index of block length `ell`.
    pub fn row(&self, ell: usize) -> Option<usize> {
        self.ell.iter().position(|&l| l == ell)
    }
}

/// Profile of `H_l(x | y)` for `l = 1..=ell_max` on the whole of `x`.
pub fn entropy_profile(
    x: &SymbolString,
    y: Option<&SymbolString>,
    ell_max: usize,
    grid: &KGrid,
) -> Result<EntropyProfile> {
    if ell_max == 0 {
        return Err(Error::InvalidArgument("ell_max must be >= 1".into()));
    }
    grid.validate()?;
    if x.len() < ell_max {
        return Err(Error::NoCompleteBlock {
            ell: ell_max,
            len: x.len(),
        });
    }
    let rows = (1..=ell_max)
        .into_par_iter()
        .map(|ell| {
            let (ks, start) = grid.points(x.len(), ell);
            if ks.is_empty() {
                return Err(Error::NoCompleteBlock { ell, len: x.len() });
            }
            let h = entropy_series(x, y, ell, &ks)?;
            Ok((ks, start, h))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut p = EntropyProfile {
        ell: (1..=ell_max).collect(),
        k: Vec::new(),
        h: Vec::new(),
        tail_start: Vec::new(),
        tail_min: Vec::new(),
        tail_max: Vec::new(),
        dim_proxy: 0.0,
        strong_dim_proxy: 0.0,
    };
    for (ks, start, h) in rows {
        let (lo, hi) = tail_extrema(&h, start);
        p.tail_min.push(lo);
        p.tail_max.push(hi);
        p.tail_start.push(start);
        p.k.push(ks);
        p.h.push(h);
    }
    p.dim_proxy = *p.tail_min.last().expect("ell_max >= 1");
    p.strong_dim_proxy = *p.tail_max.last().expect("ell_max >= 1");
    Ok(p)
}

/// [`entropy_profile`] on `n`-prefixes of two sources; `y = None` stands
/// for a constant oracle.
pub fn profile_sources(
    x: &SequenceSource,
    y: Option<&SequenceSource>,
    n: usize,
    ell_max: usize,
    grid: &KGrid,
) -> Result<EntropyProfile> {
    let xs = x.prefix(n)?;
    let ys = y.map(|y| y.prefix(n)).transpose()?;
    entropy_profile(&xs, ys.as_ref(), ell_max, grid)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bin(s: &str) -> SymbolString {
        SymbolString::parse(s, &Alphabet::binary()).unwrap()
    }

    #[test]
    fn conditional_examples() {
        let x = bin("0110");
        assert_eq!(cond_block_entropy(&x, &x, 1).unwrap(), 0.0);
        assert_eq!(cond_block_entropy(&x, &x, 2).unwrap(), 0.0);
        assert_eq!(cond_block_entropy(&x, &bin("0000"), 1).unwrap(), 1.0);
        assert_eq!(cond_block_entropy(&bin("0000"), &bin("0101"), 1).unwrap(), 0.0);
    }

    #[test]
    fn unconditional_examples() {
        assert_eq!(block_entropy(&bin("0000"), 1).unwrap(), 0.0);
        let alt = bin(&"01".repeat(32));
        assert_eq!(block_entropy(&alt, 1).unwrap(), 1.0);
        assert_eq!(block_entropy(&alt, 2).unwrap(), 0.0);
    }

    #[test]
    fn errors() {
        assert!(matches!(
            cond_block_entropy(&bin("01"), &bin("0"), 1),
            Err(Error::LengthMismatch { .. })
        ));
        assert!(matches!(
            block_entropy(&bin("010"), 4),
            Err(Error::NoCompleteBlock { .. })
        ));
        assert!(matches!(
            block_entropy(&bin(""), 1),
            Err(Error::NoCompleteBlock { .. })
        ));
    }

    #[test]
    fn trailing_partial_block_dropped() {
        assert_eq!(block_entropy(&bin("00011"), 2).unwrap(), 0.5);
    }

    #[test]
    fn mutual_info_examples() {
        let x = bin("0110100110010110");
        let h = block_entropy(&x, 2).unwrap();
        assert_eq!(mutual_info_rate(&x, &x, 2).unwrap(), h);
        assert_eq!(mutual_info_rate(&x, &bin(&"0".repeat(16)), 2).unwrap(), 0.0);
    }

    #[test]
    fn chain_rule_duplicate_column() {
        let x = bin("0110100110010111");
        let cr = chain_rule_decompose(&[x.clone(), x.clone()], 2).unwrap();
        assert_eq!(cr.terms[1], 0.0);
        assert!((cr.joint - cr.terms[0] / 2.0).abs() < 1e-15);
        let one = chain_rule_decompose(std::slice::from_ref(&x), 3).unwrap();
        assert_eq!(one.joint, one.terms[0]);
    }

    #[test]
    fn interleave_product_examples() {
        assert_eq!(interleave_product_entropy_equal(&[bin("00"), bin("11")], 1).unwrap(), (0.0, 0.0));
        let x = bin("011011100101");
        let (a, b) = interleave_product_entropy_equal(&[x.clone(), x.clone(), x.clone()], 2).unwrap();
        assert_eq!(a, b);
        assert!((a - block_entropy(&x, 2).unwrap() / 3.0).abs() < 1e-15);
    }

    #[test]
    fn merge_matches_single_pass() {
        let x = bin("0110100110010111");
        let mut a = BlockStats::single(&x.slice(0, 8), 2).unwrap();
        let b = BlockStats::single(&x.slice(8, 16), 2).unwrap();
        a.merge(&b).unwrap();
        assert_eq!(a.entropy_x(), block_entropy(&x, 2).unwrap());
    }

    #[test]
    fn geometric_grid_shape() {
        let (ks, start) = KGrid::default().points(100, 1);
        assert_eq!(ks.first(), Some(&1));
        assert_eq!(ks.last(), Some(&100));
        assert!(ks.windows(2).all(|w| w[0] < w[1]));
        assert!(ks[start] >= 50 && (start == 0 || ks[start - 1] < 50));
        let (ks, start) = KGrid::Prefixes { lengths: vec![10, 4, 10, 3] }.points(8, 2);
        assert_eq!((ks, start), (vec![1, 2, 4], 0));
    }

    #[test]
    fn series_matches_direct() {
        let x = bin("0110100110010111011101");
        let y = bin("0000111100001111000011");
        let s = entropy_series(&x, Some(&y), 2, &[1, 3, 11]).unwrap();
        for (k, h) in [1usize, 3, 11].iter().zip(s) {
            let d = cond_block_entropy(&x.prefix(2 * k), &y.prefix(2 * k), 2).unwrap();
            assert_eq!(h, d);
        }
    }

    #[test]
    fn constant_input_profile_is_zero() {
        let x = bin(&"1".repeat(64));
        let y = bin(&"01".repeat(32));
        let p = entropy_profile(&x, Some(&y), 4, &KGrid::default()).unwrap();
        assert!(p.h.iter().flatten().all(|&h| h == 0.0));
        assert_eq!((p.dim_proxy, p.strong_dim_proxy), (0.0, 0.0));
    }
}
