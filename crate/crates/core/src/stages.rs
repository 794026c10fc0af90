//! Stagewise builders for sequences whose A.P. halves behave very
//! differently from the whole.
//!
//! Both builders append, stage by stage, a prefix of a fixed source to the
//! string built so far, scanning forward until measured block entropies
//! meet the stage's conditions. The scan checks at aligned lengths spaced
//! geometrically, and every boundary is a multiple of `2 lcm(1..=L)` where
//! `L` is the largest block length measured at that stage, so the A.P.
//! halves stay block-aligned as well.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::alphabet::{Alphabet, Symbol};
use crate::entropy::{block_code, BlockStats};
use crate::error::{Error, Result};
use crate::ops::diluted;
use crate::source::SequenceSource;
use crate::string::SymbolString;

/// Limits on the threshold scans.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageCaps {
    /// Longest allowed single stage.
    pub max_stage_len: usize,
    /// Shortest allowed single stage.
    pub min_stage_len: usize,
    /// How far the `J` scans look ahead in a source.
    pub j_horizon: usize,
    /// Growth ratio between consecutive checks within a stage.
    pub check_ratio: f64,
    /// Largest block length ever measured.
    pub ell_cap: usize,
}

impl Default for StageCaps {
    fn default() -> Self {
        Self {
            max_stage_len: 1 << 26,
            min_stage_len: 1024,
            j_horizon: 1 << 16,
            check_ratio: 1.01,
            ell_cap: 4,
        }
    }
}

/// Block entropies of the built prefix and its halves at one block length.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryEntropy {
    pub ell: usize,
    /// `H_l(X[:b])`.
    pub prefix: f64,
    /// `H_l(A_{2,0})` of the prefix.
    pub a20: f64,
    /// `H_l(A_{2,1})` of the prefix.
    pub a21: f64,
    /// `H_l(A_{2,1} | A_{2,0})` of the prefix.
    pub a21_given_a20: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub stage: usize,
    /// Which source the stage appended: `"S0"`, `"S1"`, `"Y"` or `"zeros"`.
    pub source: String,
    /// `|w_n|`.
    pub appended: usize,
    /// `|w_0 ... w_n|`.
    pub boundary: usize,
    /// Boundaries are multiples of this.
    pub alignment: usize,
    /// Tolerances used, by condition name.
    pub tolerances: BTreeMap<String, f64>,
    /// Threshold values found by the scans, by name.
    pub thresholds: BTreeMap<String, usize>,
    /// Block lengths each condition was checked at, by condition name.
    pub checked_ells: BTreeMap<String, Vec<usize>>,
    /// Measured entropies at the boundary for `l = 1..=ell_cap`.
    pub entropies: Vec<BoundaryEntropy>,
}

impl StageRecord {
    pub fn entropy(&self, ell: usize) -> Option<&BoundaryEntropy> {
        self.entropies.iter().find(|e| e.ell == ell)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StageLog {
    pub construction: String,
    pub stages: Vec<StageRecord>,
}

impl StageLog {
    pub fn boundaries(&self) -> Vec<usize> {
        self.stages.iter().map(|s| s.boundary).collect()
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn lcm_upto(n: usize) -> usize {
    (1..=n.max(1)).fold(1, |acc, k| acc / gcd(acc, k) * k)
}

/// Incremental block counts of a growing string and of its two A.P. halves.
struct Tracker {
    x: Vec<Symbol>,
    radix: usize,
    prefix: Vec<BlockStats>,
    a20: Vec<BlockStats>,
    a21: Vec<BlockStats>,
    joint: Vec<BlockStats>,
    halves: bool,
}

impl Tracker {
    fn new(alphabet: &Alphabet, ell_cap: usize, halves: bool) -> Result<Self> {
        let make = |cond: bool| {
            (1..=ell_cap)
                .map(|l| BlockStats::new(l, alphabet, cond.then_some(alphabet)))
                .collect::<Result<Vec<_>>>()
        };
        Ok(Self {
            x: Vec::new(),
            radix: alphabet.size(),
            prefix: make(false)?,
            a20: make(false)?,
            a21: make(false)?,
            joint: make(true)?,
            halves,
        })
    }

    fn len(&self) -> usize {
        self.x.len()
    }

    fn push(&mut self, s: Symbol) -> Result<()> {
        if self.x.len() == self.x.capacity() {
            self.x
                .try_reserve(self.x.len().max(1024))
                .map_err(|e| Error::ResourceExhausted(format!("stage buffer: {e}")))?;
        }
        self.x.push(s);
        let p = self.x.len();
        let r = self.radix as u64;
        for (i, st) in self.prefix.iter_mut().enumerate() {
            let l = i + 1;
            if p % l == 0 {
                st.push_block(block_code(&self.x[p - l..], self.radix), 0);
            }
        }
        if self.halves && p % 2 == 0 {
            let half = p / 2;
            for i in 0..self.a20.len() {
                let l = i + 1;
                if half % l == 0 {
                    let (mut u0, mut u1) = (0u64, 0u64);
                    for j in half - l..half {
                        u0 = u0 * r + self.x[2 * j] as u64;
                        u1 = u1 * r + self.x[2 * j + 1] as u64;
                    }
                    self.a20[i].push_block(u0, 0);
                    self.a21[i].push_block(u1, 0);
                    self.joint[i].push_block(u1, u0);
                }
            }
        }
        Ok(())
    }

    fn h_prefix(&self, ell: usize) -> f64 {
        self.prefix[ell - 1].entropy_x()
    }

    fn h_a20(&self, ell: usize) -> f64 {
        self.a20[ell - 1].entropy_x()
    }

    fn h_a21(&self, ell: usize) -> f64 {
        self.a21[ell - 1].entropy_x()
    }

    fn h_a21_given_a20(&self, ell: usize) -> f64 {
        self.joint[ell - 1].cond_entropy()
    }

    fn entropies(&self) -> Vec<BoundaryEntropy> {
        (1..=self.prefix.len())
            .filter(|&l| self.len() >= 2 * l)
            .map(|l| BoundaryEntropy {
                ell: l,
                prefix: self.h_prefix(l),
                a20: self.h_a20(l),
                a21: self.h_a21(l),
                a21_given_a20: self.h_a21_given_a20(l),
            })
            .collect()
    }
}

/// Scans `src` from the start, appending to `t` until `done(t)` holds at a
/// check point. Check points are lengths `m >= m_lo` with `|t| + m` a
/// multiple of `align`, spaced by the ratio in `caps`. Returns `m`.
fn scan_stage(
    t: &mut Tracker,
    src: &SequenceSource,
    m_lo: usize,
    align: usize,
    caps: &StageCaps,
    mut done: impl FnMut(&Tracker) -> bool,
) -> Option<usize> {
    let base = t.len();
    let aligned = |m: usize| {
        let total = base + m;
        total.div_ceil(align) * align - base
    };
    let mut next_check = aligned(m_lo.max(1));
    let mut m = 0usize;
    let mut cursor = src.cursor();
    while next_check <= caps.max_stage_len {
        while m < next_check {
            let s = cursor.next().expect("sources are unbounded");
            if t.push(s).is_err() {
                return None;
            }
            m += 1;
        }
        if done(t) {
            return Some(m);
        }
        let grown = ((m as f64) * caps.check_ratio).ceil() as usize;
        next_check = aligned(grown.max(m + 1));
    }
    None
}

/// Smallest aligned `m` such that the checked entropies of `src[:m']` stay
/// at least `floor` for every aligned `m' >= m` up to the horizon.
fn j_threshold(
    src: &SequenceSource,
    ells: &[usize],
    floor: f64,
    caps: &StageCaps,
) -> Result<Option<usize>> {
    let l_max = *ells.iter().max().unwrap_or(&1);
    let mut t = Tracker::new(src.alphabet(), l_max, false)?;
    let align = lcm_upto(l_max);
    let mut last_bad = None;
    let mut last_ok = false;
    for (pos, s) in src.cursor().take(caps.j_horizon).enumerate() {
        t.push(s)?;
        let m = pos + 1;
        if m % align == 0 {
            last_ok = ells.iter().all(|&l| t.h_prefix(l) >= floor);
            if !last_ok {
                last_bad = Some(m);
            }
        }
    }
    if !last_ok {
        return Ok(None);
    }
    Ok(Some(last_bad.map_or(0, |b| b + 1)))
}

fn tol(n: usize) -> f64 {
    (-(n as f64)).exp2()
}

fn exhausted(stage: usize, cap: usize, log: StageLog) -> Error {
    Error::CapExhausted {
        stage,
        cap,
        log: Box::new(log),
    }
}

/// Builds the alternating `S0`/`S1` sequence.
///
/// `S0 = 0Y[0]0Y[1]...` and `S1 = Y[0]0Y[1]0...` are the two dilutions of
/// the normal source `Y`. Stage `n` appends `S_{n mod 2}[:m]` with `m` the
/// first aligned check point at or above
/// `max(min_stage_len, 2^{n+1} J)` where, at block lengths up to
/// `min(max(n, 1), ell_cap)`,
///
/// * `N`: the half that the appended source zeroes out has
///   `H_l <= 2^-n` (`A_{2,0}` for even stages, `A_{2,1}` for odd ones);
/// * `M`: `|H_l(prefix) - 1/2| <= 2^-(n+1)`;
///
/// and `J` is the least length from which `H_l(S_{(n+1) mod 2}[:m']) >=
/// 1/2 - 2^-(n+1)`, scanned up to the horizon. `M` and `J` are measured at
/// even block lengths only (2 and, from stage 4, 4): a dilution has
/// `H_l = 1/2` only when `l` is even.
pub fn build_oscillating_upper(
    normal: &SequenceSource,
    stages: usize,
    caps: &StageCaps,
) -> Result<(SymbolString, StageLog)> {
    check_caps(caps)?;
    let s = [diluted(normal, 0)?, diluted(normal, 1)?];
    let mut t = Tracker::new(normal.alphabet(), caps.ell_cap, true)?;
    let mut log = StageLog {
        construction: "oscillating_upper".into(),
        stages: Vec::new(),
    };
    for n in 0..stages {
        let i = n % 2;
        let n_ells: Vec<usize> = (1..=n.max(1).min(caps.ell_cap)).collect();
        let even_top = n.min(caps.ell_cap).max(2);
        let mj_ells: Vec<usize> = (2..=even_top).filter(|l| l % 2 == 0).collect();
        let align = 2 * lcm_upto(n_ells.len().max(even_top));
        let (n_tol, mj_tol) = (tol(n), tol(n + 1));

        let j = j_threshold(&s[1 - i], &mj_ells, 0.5 - mj_tol, caps)?
            .ok_or_else(|| exhausted(n, caps.j_horizon, log.clone()))?;
        let m_lo = caps.min_stage_len.max(j.saturating_mul(1 << (n + 1)));
        if m_lo > caps.max_stage_len {
            return Err(exhausted(n, caps.max_stage_len, log));
        }
        let m = scan_stage(&mut t, &s[i], m_lo, align, caps, |t| {
            let n_ok = n_ells.iter().all(|&l| {
                let h = if i == 0 { t.h_a20(l) } else { t.h_a21(l) };
                h <= n_tol
            });
            n_ok && mj_ells.iter().all(|&l| (t.h_prefix(l) - 0.5).abs() <= mj_tol)
        })
        .ok_or_else(|| exhausted(n, caps.max_stage_len, log.clone()))?;

        log.stages.push(StageRecord {
            stage: n,
            source: format!("S{i}"),
            appended: m,
            boundary: t.len(),
            alignment: align,
            tolerances: BTreeMap::from([
                ("N".into(), n_tol),
                ("M".into(), mj_tol),
                ("J".into(), mj_tol),
            ]),
            thresholds: BTreeMap::from([("J".into(), j), ("m_lower_bound".into(), m_lo)]),
            checked_ells: BTreeMap::from([
                ("N".into(), n_ells),
                ("M".into(), mj_ells.clone()),
                ("J".into(), mj_ells),
            ]),
            entropies: t.entropies(),
        });
    }
    let x = SymbolString::new(normal.alphabet().clone(), t.x)?;
    Ok((x, log))
}

/// Builds the alternating `Y` / `0^inf` sequence.
///
/// Even stages append a prefix of `Y` until, at block lengths up to
/// `min(max(n, 1), ell_cap)`, `H_l(prefix) >= 1 - tol` and
/// `H_l(A_{2,1} | A_{2,0}) >= 1 - tol`; odd stages append zeros until
/// `H_l(prefix)`, `H_l(A_{2,0})` and `H_l(A_{2,1} | A_{2,0})` are all
/// `<= tol`, where `tol = 2^-(n+1)`.
pub fn build_oscillating_lower(
    normal: &SequenceSource,
    stages: usize,
    caps: &StageCaps,
) -> Result<(SymbolString, StageLog)> {
    check_caps(caps)?;
    let zeros = SequenceSource::constant(normal.alphabet().clone(), '0').map_err(|_| {
        Error::AlphabetMismatch(format!("alphabet {} has no '0'", normal.alphabet()))
    })?;
    let mut t = Tracker::new(normal.alphabet(), caps.ell_cap, true)?;
    let mut log = StageLog {
        construction: "oscillating_lower".into(),
        stages: Vec::new(),
    };
    for n in 0..stages {
        let ells: Vec<usize> = (1..=n.max(1).min(caps.ell_cap)).collect();
        let align = 2 * lcm_upto(ells.len());
        let eps = tol(n + 1);
        let y_stage = n % 2 == 0;
        let src = if y_stage { normal } else { &zeros };
        let m = scan_stage(&mut t, src, caps.min_stage_len, align, caps, |t| {
            ells.iter().all(|&l| {
                if y_stage {
                    t.h_prefix(l) >= 1.0 - eps && t.h_a21_given_a20(l) >= 1.0 - eps
                } else {
                    t.h_prefix(l) <= eps && t.h_a20(l) <= eps && t.h_a21_given_a20(l) <= eps
                }
            })
        })
        .ok_or_else(|| exhausted(n, caps.max_stage_len, log.clone()))?;
        log.stages.push(StageRecord {
            stage: n,
            source: if y_stage { "Y" } else { "zeros" }.into(),
            appended: m,
            boundary: t.len(),
            alignment: align,
            tolerances: BTreeMap::from([("stage".into(), eps)]),
            thresholds: BTreeMap::new(),
            checked_ells: BTreeMap::from([("stage".into(), ells)]),
            entropies: t.entropies(),
        });
    }
    let x = SymbolString::new(normal.alphabet().clone(), t.x)?;
    Ok((x, log))
}

fn check_caps(caps: &StageCaps) -> Result<()> {
    if caps.ell_cap < 2 {
        return Err(Error::InvalidArgument("ell_cap must be >= 2".into()));
    }
    if !(caps.check_ratio >= 1.0) {
        return Err(Error::InvalidArgument("check_ratio must be >= 1".into()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entropy::{block_entropy, cond_block_entropy};
    use crate::ops::{champernowne, ApExtract};

    fn small_caps() -> StageCaps {
        StageCaps {
            min_stage_len: 256,
            ..StageCaps::default()
        }
    }

    #[test]
    fn zero_stages_is_empty() {
        let y = champernowne(&Alphabet::binary());
        let (x, log) = build_oscillating_upper(&y, 0, &small_caps()).unwrap();
        assert!(x.is_empty() && log.stages.is_empty());
    }

    #[test]
    fn lower_single_stage_is_prefix_of_source() {
        let y = champernowne(&Alphabet::binary());
        let (x, log) = build_oscillating_lower(&y, 1, &small_caps()).unwrap();
        assert_eq!(x, y.prefix(x.len()).unwrap());
        assert_eq!(log.stages[0].boundary, x.len());
    }

    #[test]
    fn logged_entropies_match_direct_measurement() {
        let y = champernowne(&Alphabet::binary());
        let (x, log) = build_oscillating_upper(&y, 3, &small_caps()).unwrap();
        for rec in &log.stages {
            let p = x.prefix(rec.boundary);
            let a0 = p.ap_extract(2, 0).unwrap();
            let a1 = p.ap_extract(2, 1).unwrap();
            for e in &rec.entropies {
                assert_eq!(e.prefix, block_entropy(&p, e.ell).unwrap());
                assert_eq!(e.a20, block_entropy(&a0, e.ell).unwrap());
                assert_eq!(e.a21, block_entropy(&a1, e.ell).unwrap());
                assert_eq!(e.a21_given_a20, cond_block_entropy(&a1, &a0, e.ell).unwrap());
            }
        }
    }

    #[test]
    fn boundaries_increase_and_align() {
        let y = champernowne(&Alphabet::binary());
        let (_, log) = build_oscillating_upper(&y, 4, &small_caps()).unwrap();
        let b = log.boundaries();
        assert!(b.windows(2).all(|w| w[0] < w[1]));
        for rec in &log.stages {
            assert_eq!(rec.boundary % rec.alignment, 0);
            for l in 1..=rec.stage.clamp(1, 4) {
                assert_eq!(rec.boundary % l, 0);
            }
        }
    }

    #[test]
    fn cap_exhaustion_keeps_partial_log() {
        let y = champernowne(&Alphabet::binary());
        let caps = StageCaps {
            max_stage_len: 4096,
            ..small_caps()
        };
        match build_oscillating_lower(&y, 6, &caps) {
            Err(Error::CapExhausted { stage, log, .. }) => {
                assert_eq!(log.stages.len(), stage);
                assert!(stage >= 1);
            }
            other => panic!("expected cap exhaustion, got {other:?}"),
        }
    }
}
