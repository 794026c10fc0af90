//! Finite joint distributions over block pairs, epsilon-smoothing, and
//! divergences.

use serde::{Deserialize, Serialize};

use crate::alphabet::{Alphabet, Symbol};
use crate::entropy::{block_code, BlockStats};
use crate::error::{Error, Result};
use crate::string::SymbolString;

const SUM_TOL: f64 = 1e-12;
const MAX_CELLS: u128 = 1 << 24;

/// A distribution `P(u, v)` over `S1^l x S2^l`, stored densely with key
/// `u * |S2|^l + v` (blocks encoded big-endian).
#[derive(Clone, Debug, PartialEq)]
pub struct JointDistribution {
    sigma1: Alphabet,
    sigma2: Alphabet,
    ell: usize,
    x_radix: usize,
    y_radix: usize,
    weights: Vec<f64>,
}

fn radix(a: &Alphabet, ell: usize) -> Result<usize> {
    (a.size() as u64)
        .checked_pow(ell as u32)
        .map(|r| r as usize)
        .ok_or(Error::TableTooLarge((a.size() as u128).saturating_pow(ell as u32)))
}

/// Checks that `p` is a probability vector: finite, nonnegative, summing to 1.
pub fn check_probability(p: &[f64]) -> Result<()> {
    if p.is_empty() {
        return Err(Error::InvalidDistribution("empty probability vector".into()));
    }
    if let Some(w) = p.iter().find(|w| !w.is_finite() || **w < 0.0) {
        return Err(Error::InvalidDistribution(format!("weight {w} is not a probability")));
    }
    let s: f64 = p.iter().sum();
    if (s - 1.0).abs() > SUM_TOL {
        return Err(Error::InvalidDistribution(format!("weights sum to {s}, not 1")));
    }
    Ok(())
}

impl JointDistribution {
    pub fn new(sigma1: Alphabet, sigma2: Alphabet, ell: usize, weights: Vec<f64>) -> Result<Self> {
        if ell == 0 {
            return Err(Error::InvalidArgument("block length must be >= 1".into()));
        }
        let x_radix = radix(&sigma1, ell)?;
        let y_radix = radix(&sigma2, ell)?;
        let cells = x_radix as u128 * y_radix as u128;
        if cells > MAX_CELLS {
            return Err(Error::TableTooLarge(cells));
        }
        if weights.len() as u128 != cells {
            return Err(Error::LengthMismatch {
                left: weights.len(),
                right: cells as usize,
            });
        }
        check_probability(&weights)?;
        Ok(Self {
            sigma1,
            sigma2,
            ell,
            x_radix,
            y_radix,
            weights,
        })
    }

    pub fn uniform(sigma1: Alphabet, sigma2: Alphabet, ell: usize) -> Result<Self> {
        let cells = radix(&sigma1, ell)? as u128 * radix(&sigma2, ell)? as u128;
        if cells > MAX_CELLS {
            return Err(Error::TableTooLarge(cells));
        }
        let w = vec![1.0 / cells as f64; cells as usize];
        Self::new(sigma1, sigma2, ell, w)
    }

    pub fn sigma1(&self) -> &Alphabet {
        &self.sigma1
    }

    pub fn sigma2(&self) -> &Alphabet {
        &self.sigma2
    }

    pub fn ell(&self) -> usize {
        self.ell
    }

    /// `|S1|^l`.
    pub fn x_radix(&self) -> usize {
        self.x_radix
    }

    /// `|S2|^l`.
    pub fn y_radix(&self) -> usize {
        self.y_radix
    }

    /// The dense weight vector, keyed by `u * |S2|^l + v`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, u: usize, v: usize) -> f64 {
        self.weights[u * self.y_radix + v]
    }

    /// `P(v) = sum_u P(u, v)`.
    pub fn marginal(&self, v: usize) -> f64 {
        (0..self.x_radix).map(|u| self.weight(u, v)).sum()
    }

    /// `P(u | v)`.
    pub fn conditional(&self, u: usize, v: usize) -> Result<f64> {
        let m = self.marginal(v);
        if m <= 0.0 {
            return Err(Error::ZeroMarginal(self.describe_oracle(v)));
        }
        Ok(self.weight(u, v) / m)
    }

    /// `P(w | v)` for a partial block `w` of length `0..=l`: the conditional
    /// mass of all `u` extending `w`.
    pub fn partial_conditional(&self, w: &[Symbol], v: usize) -> Result<f64> {
        if w.len() > self.ell {
            return Err(Error::InvalidArgument(format!(
                "partial block of length {} exceeds l = {}",
                w.len(),
                self.ell
            )));
        }
        let m = self.marginal(v);
        if m <= 0.0 {
            return Err(Error::ZeroMarginal(self.describe_oracle(v)));
        }
        let span = self.sigma1.size().pow((self.ell - w.len()) as u32);
        let lo = block_code(w, self.sigma1.size()) as usize * span;
        let mass: f64 = (lo..lo + span).map(|u| self.weight(u, v)).sum();
        Ok(mass / m)
    }

    /// The `eps`-smoothed distribution (see [`smooth`]).
    pub fn smoothed(&self, eps: f64) -> Result<Self> {
        Ok(Self {
            weights: smooth(&self.weights, eps)?,
            ..self.clone()
        })
    }

    pub fn min_weight(&self) -> f64 {
        self.weights.iter().copied().fold(f64::INFINITY, f64::min)
    }

    fn describe_oracle(&self, v: usize) -> String {
        self.block_text(&self.sigma2, v)
            .unwrap_or_else(|| format!("#{v}"))
    }

    fn block_text(&self, a: &Alphabet, code: usize) -> Option<String> {
        let chars = a.chars()?;
        let b = chars.len();
        let mut out = vec![' '; self.ell];
        let mut c = code;
        for slot in out.iter_mut().rev() {
            *slot = chars[c % b];
            c /= b;
        }
        Some(out.into_iter().collect())
    }

    fn parse_block(&self, a: &Alphabet, text: &str) -> Result<usize> {
        let s = SymbolString::parse(text, a)?;
        if s.len() != self.ell {
            return Err(Error::Parse(format!(
                "block {text:?} has length {}, expected {}",
                s.len(),
                self.ell
            )));
        }
        Ok(block_code(s.symbols(), a.size()) as usize)
    }
}

/// Empirical `P(u,x; v,y) = N(u,x; v,y) / k` over the `k = floor(|x| / l)`
/// complete aligned blocks.
pub fn empirical_joint(x: &SymbolString, y: &SymbolString, ell: usize) -> Result<JointDistribution> {
    let st = BlockStats::joint(x, y, ell)?;
    let cells = st.x_radix() as u128 * st.y_radix() as u128;
    if cells > MAX_CELLS {
        return Err(Error::TableTooLarge(cells));
    }
    let k = st.blocks() as f64;
    let mut w = vec![0.0; cells as usize];
    for (key, c) in st.nonzero() {
        w[key as usize] = c as f64 / k;
    }
    Ok(JointDistribution {
        sigma1: x.alphabet().clone(),
        sigma2: y.alphabet().clone(),
        ell,
        x_radix: st.x_radix() as usize,
        y_radix: st.y_radix() as usize,
        weights: w,
    })
}

/// Mass-shift smoothing: entries below `eps` are raised to `eps` and the
/// deficit is taken proportionally from the excess of the others:
///
/// ```text
/// Q(w) = eps                                    if P(w) < eps
/// Q(w) = eps + (P(w) - eps) (1 - deficit/surplus)  otherwise
/// ```
///
/// Requires `0 < eps < 1/|P|`.
pub fn smooth(p: &[f64], eps: f64) -> Result<Vec<f64>> {
    check_probability(p)?;
    let n = p.len() as f64;
    if !(eps > 0.0 && eps * n < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "eps = {eps} must lie in (0, 1/{})",
            p.len()
        )));
    }
    let deficit: f64 = p.iter().filter(|&&w| w < eps).map(|&w| eps - w).sum();
    let surplus: f64 = p.iter().filter(|&&w| w >= eps).map(|&w| w - eps).sum();
    let keep = 1.0 - deficit / surplus;
    Ok(p.iter()
        .map(|&w| if w < eps { eps } else { eps + (w - eps) * keep })
        .collect())
}

/// `KL(p || q) = sum p log2(p/q)` in bits, with `0 log 0 = 0`.
pub fn kl_divergence(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::LengthMismatch {
            left: p.len(),
            right: q.len(),
        });
    }
    let mut sum = 0.0;
    for (&a, &b) in p.iter().zip(q) {
        if a > 0.0 {
            if b <= 0.0 {
                return Err(Error::SupportViolation(a));
            }
            sum += a * (a / b).log2();
        }
    }
    Ok(sum.max(0.0))
}

/// `TV(p, q) = (1/2) sum |p - q|`.
pub fn total_variation(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::LengthMismatch {
            left: p.len(),
            right: q.len(),
        });
    }
    Ok(0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>())
}

/// `max |p - q|`.
pub fn max_abs_diff(p: &[f64], q: &[f64]) -> f64 {
    p.iter().zip(q).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
}

#[derive(Serialize, Deserialize)]
struct Wire {
    sigma1: String,
    sigma2: String,
    ell: usize,
    weights: Vec<(String, String, f64)>,
}

impl Serialize for JointDistribution {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::Error as _;
        let text = |a: &Alphabet| {
            a.chars()
                .map(|c| c.iter().collect::<String>())
                .ok_or_else(|| S::Error::custom("product alphabets have no text form"))
        };
        let mut weights = Vec::new();
        for u in 0..self.x_radix {
            for v in 0..self.y_radix {
                let w = self.weight(u, v);
                if w > 0.0 {
                    weights.push((
                        self.block_text(&self.sigma1, u).unwrap_or_default(),
                        self.block_text(&self.sigma2, v).unwrap_or_default(),
                        w,
                    ));
                }
            }
        }
        Wire {
            sigma1: text(&self.sigma1)?,
            sigma2: text(&self.sigma2)?,
            ell: self.ell,
            weights,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for JointDistribution {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let wire = Wire::deserialize(d)?;
        from_wire(wire).map_err(D::Error::custom)
    }
}

fn from_wire(wire: Wire) -> Result<JointDistribution> {
    let sigma1 = Alphabet::new(&wire.sigma1)?;
    let sigma2 = Alphabet::new(&wire.sigma2)?;
    let shell = JointDistribution {
        x_radix: radix(&sigma1, wire.ell)?,
        y_radix: radix(&sigma2, wire.ell)?,
        sigma1,
        sigma2,
        ell: wire.ell,
        weights: Vec::new(),
    };
    let cells = shell.x_radix as u128 * shell.y_radix as u128;
    if cells > MAX_CELLS {
        return Err(Error::TableTooLarge(cells));
    }
    let mut w = vec![0.0; cells as usize];
    for (u, v, p) in &wire.weights {
        let u = shell.parse_block(&shell.sigma1, u)?;
        let v = shell.parse_block(&shell.sigma2, v)?;
        w[u * shell.y_radix + v] += p;
    }
    JointDistribution::new(shell.sigma1, shell.sigma2, shell.ell, w)
}
