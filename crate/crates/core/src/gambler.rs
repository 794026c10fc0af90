//! Finite-state relative gamblers and their s-gales.
//!
//! At step `t` a gambler in state `q` reads the oracle window
//! `y = Y[t:t+l]` and the input symbol `a = X[t]`; account `i` multiplies
//! its capital by `|S1|^s * beta_i(q, y, a)` and the gambler moves to
//! `delta(q, y, a)`. After `n` steps the oracle has supplied `n + l - 1`
//! symbols. Capital is tracked as
//!
//! ```text
//! log2 d_i(X[:n]) = log2 c_i + n s log2|S1| + B_i(n),   B_i(n) = sum_{t<n} log2 beta_i
//! ```
//!
//! which is affine in `s`, so one run serves every exponent.

use num_rational::Ratio;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::alphabet::{Alphabet, Symbol};
use crate::distributions::JointDistribution;
use crate::entropy::block_code;
use crate::error::{Error, Result};
use crate::string::SymbolString;

const SUM_TOL: f64 = 1e-12;
const MAX_TABLE: u128 = 1 << 27;

/// Default cap on the number of accounts of a [`cover_gambler`].
pub const DEFAULT_COVER_CAP: usize = 4096;

/// A `k`-account finite-state relative gambler with window length `l`.
///
/// Tables are dense over `(state, window, symbol)`; windows are encoded
/// big-endian over the oracle alphabet.
#[derive(Clone, Debug, PartialEq)]
pub struct Fsrg {
    sigma1: Alphabet,
    sigma2: Alphabet,
    window: usize,
    accounts: usize,
    state_names: Vec<String>,
    start: usize,
    capital: Vec<f64>,
    windows: usize,
    delta: Vec<u32>,
    beta: Vec<f64>,
}

/// Raw tables for [`Fsrg::new`]. `delta[cell]` and
/// `beta[cell * accounts + i]` with `cell = (q * |S2|^l + y) * |S1| + a`.
#[derive(Clone, Debug)]
pub struct FsrgTables {
    pub sigma1: Alphabet,
    pub sigma2: Alphabet,
    pub window: usize,
    pub state_names: Vec<String>,
    pub start: usize,
    /// Initial capitals; `None` gives `1/k` each.
    pub capital: Option<Vec<f64>>,
    pub accounts: usize,
    pub delta: Vec<u32>,
    pub beta: Vec<f64>,
}

fn windows_of(sigma2: &Alphabet, window: usize) -> Result<usize> {
    (sigma2.size() as u64)
        .checked_pow(window as u32)
        .map(|w| w as usize)
        .ok_or(Error::TableTooLarge((sigma2.size() as u128).saturating_pow(window as u32)))
}

fn table_cells(states: usize, windows: usize, symbols: usize, accounts: usize) -> Result<usize> {
    let cells = states as u128 * windows as u128 * symbols as u128 * accounts as u128;
    if cells > MAX_TABLE {
        return Err(Error::TableTooLarge(cells));
    }
    Ok(cells as usize)
}

impl Fsrg {
    pub fn new(t: FsrgTables) -> Result<Self> {
        if t.window == 0 {
            return Err(Error::InvalidGambler("window length must be >= 1".into()));
        }
        if t.accounts == 0 {
            return Err(Error::InvalidGambler("need at least one account".into()));
        }
        let states = t.state_names.len();
        if states == 0 || t.start >= states {
            return Err(Error::InvalidGambler("start state out of range".into()));
        }
        let windows = windows_of(&t.sigma2, t.window)?;
        let a = t.sigma1.size();
        let cells = table_cells(states, windows, a, 1)?;
        table_cells(states, windows, a, t.accounts)?;
        if t.delta.len() != cells {
            return Err(Error::InvalidGambler(format!(
                "transition table has {} entries, expected {cells}",
                t.delta.len()
            )));
        }
        if t.beta.len() != cells * t.accounts {
            return Err(Error::InvalidGambler(format!(
                "betting table has {} entries, expected {}",
                t.beta.len(),
                cells * t.accounts
            )));
        }
        if let Some(&q) = t.delta.iter().find(|&&q| q as usize >= states) {
            return Err(Error::InvalidGambler(format!("transition to unknown state {q}")));
        }
        if let Some(b) = t.beta.iter().find(|b| !(0.0..=1.0).contains(*b)) {
            return Err(Error::InvalidGambler(format!("bet {b} outside [0, 1]")));
        }
        let k = t.accounts;
        for qy in 0..states * windows {
            for i in 0..k {
                let s: f64 = (0..a).map(|x| t.beta[(qy * a + x) * k + i]).sum();
                if (s - 1.0).abs() > SUM_TOL {
                    return Err(Error::InvalidGambler(format!(
                        "bets of account {i} in state {} sum to {s}",
                        t.state_names[qy / windows]
                    )));
                }
            }
        }
        let capital = match t.capital {
            Some(c) => c,
            None => vec![1.0 / k as f64; k],
        };
        if capital.len() != k {
            return Err(Error::InvalidGambler(format!(
                "{} initial capitals for {k} accounts",
                capital.len()
            )));
        }
        if capital.iter().any(|c| !(*c >= 0.0)) || (capital.iter().sum::<f64>() - 1.0).abs() > SUM_TOL
        {
            return Err(Error::InvalidGambler("initial capitals must be >= 0 and sum to 1".into()));
        }
        Ok(Self {
            sigma1: t.sigma1,
            sigma2: t.sigma2,
            window: t.window,
            accounts: k,
            state_names: t.state_names,
            start: t.start,
            capital,
            windows,
            delta: t.delta,
            beta: t.beta,
        })
    }

    pub fn sigma1(&self) -> &Alphabet {
        &self.sigma1
    }

    pub fn sigma2(&self) -> &Alphabet {
        &self.sigma2
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn accounts(&self) -> usize {
        self.accounts
    }

    pub fn states(&self) -> usize {
        self.state_names.len()
    }

    pub fn state_names(&self) -> &[String] {
        &self.state_names
    }

    pub fn start(&self) -> usize {
        self.start
    }

    pub fn capital(&self) -> &[f64] {
        &self.capital
    }

    /// `|S2|^l`, the number of distinct oracle windows.
    pub fn windows(&self) -> usize {
        self.windows
    }

    /// Same gambler with new initial capitals.
    pub fn with_capital(mut self, capital: Vec<f64>) -> Result<Self> {
        let t = FsrgTables {
            capital: Some(capital),
            ..self.tables()
        };
        self = Self::new(t)?;
        Ok(self)
    }

    /// The raw tables back.
    pub fn tables(&self) -> FsrgTables {
        FsrgTables {
            sigma1: self.sigma1.clone(),
            sigma2: self.sigma2.clone(),
            window: self.window,
            state_names: self.state_names.clone(),
            start: self.start,
            capital: Some(self.capital.clone()),
            accounts: self.accounts,
            delta: self.delta.clone(),
            beta: self.beta.clone(),
        }
    }

    #[inline]
    fn cell(&self, q: usize, y: usize, a: usize) -> usize {
        (q * self.windows + y) * self.sigma1.size() + a
    }

    /// `delta(q, y, a)`; `y` is a window code.
    pub fn delta(&self, q: usize, y: usize, a: Symbol) -> usize {
        self.delta[self.cell(q, y, a as usize)] as usize
    }

    /// `beta_i(q, y, a)`.
    pub fn beta(&self, q: usize, y: usize, a: Symbol, i: usize) -> f64 {
        self.beta[self.cell(q, y, a as usize) * self.accounts + i]
    }

    /// Runs on `x` with oracle `y`, recording every prefix.
    pub fn run(&self, x: &SymbolString, y: &SymbolString) -> Result<GaleTrajectory> {
        let all: Vec<usize> = (0..=x.len()).collect();
        self.run_at(x, y, &all)
    }

    /// Runs on `x` with oracle `y`, recording `B_i(n)` only at the given
    /// (ascending, `<= |x|`) prefix lengths.
    pub fn run_at(
        &self,
        x: &SymbolString,
        y: &SymbolString,
        checkpoints: &[usize],
    ) -> Result<GaleTrajectory> {
        if *x.alphabet() != self.sigma1 || *y.alphabet() != self.sigma2 {
            return Err(Error::AlphabetMismatch("gambler and string alphabets differ".into()));
        }
        let n = x.len();
        let needed = n + self.window - 1;
        if y.len() < needed {
            return Err(Error::OracleTooShort {
                needed,
                have: y.len(),
            });
        }
        if checkpoints.windows(2).any(|w| w[0] >= w[1]) || checkpoints.last().is_some_and(|&c| c > n)
        {
            return Err(Error::InvalidArgument(
                "checkpoints must be strictly increasing and <= |x|".into(),
            ));
        }
        let k = self.accounts;
        let (xs, ys) = (x.symbols(), y.symbols());
        let r2 = self.sigma2.size();
        let mut wcode = block_code(&ys[..self.window - 1], r2) as usize;
        let mut q = self.start;
        let mut b = vec![0.0f64; k];
        let mut dead_at = vec![None; k];
        let mut bet_log = Vec::with_capacity(checkpoints.len());
        let mut next = 0;
        for t in 0..=n {
            while next < checkpoints.len() && checkpoints[next] == t {
                bet_log.push(b.clone());
                next += 1;
            }
            if t == n {
                break;
            }
            wcode = (wcode * r2 + ys[t + self.window - 1] as usize) % self.windows;
            let cell = self.cell(q, wcode, xs[t] as usize);
            let bets = &self.beta[cell * k..(cell + 1) * k];
            for i in 0..k {
                if dead_at[i].is_none() {
                    if bets[i] == 0.0 {
                        dead_at[i] = Some(t);
                        b[i] = f64::NEG_INFINITY;
                    } else {
                        b[i] += bets[i].log2();
                    }
                }
            }
            q = self.delta[cell] as usize;
        }
        Ok(GaleTrajectory {
            steps: n,
            log2_sigma1: (self.sigma1.size() as f64).log2(),
            log2_capital: self.capital.iter().map(|c| c.log2()).collect(),
            checkpoints: checkpoints.to_vec(),
            bet_log,
            dead_at,
            final_state: q,
        })
    }

    /// The oracle-ignoring gambler that plays `g` regardless of the window.
    pub fn ignoring_oracle(g: &FsGambler, sigma2: &Alphabet, window: usize) -> Result<Self> {
        let windows = windows_of(sigma2, window)?;
        let a = g.sigma.size();
        let states = g.states();
        table_cells(states, windows, a, 1)?;
        let mut delta = Vec::with_capacity(states * windows * a);
        let mut beta = Vec::with_capacity(states * windows * a);
        for q in 0..states {
            for _ in 0..windows {
                for x in 0..a {
                    delta.push(g.delta[q * a + x]);
                    beta.push(g.beta[q * a + x]);
                }
            }
        }
        Self::new(FsrgTables {
            sigma1: g.sigma.clone(),
            sigma2: sigma2.clone(),
            window,
            state_names: (0..states).map(|q| format!("q{q}")).collect(),
            start: g.start,
            capital: None,
            accounts: 1,
            delta,
            beta,
        })
    }
}

/// Record of a run: `B_i(n)` at each checkpoint, plus death steps.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaleTrajectory {
    pub steps: usize,
    pub log2_sigma1: f64,
    /// `log2 c_i`.
    pub log2_capital: Vec<f64>,
    pub checkpoints: Vec<usize>,
    /// `bet_log[j][i] = B_i(checkpoints[j])`; `-inf` once account `i` is dead.
    pub bet_log: Vec<Vec<f64>>,
    /// Step at which each account placed a zero bet on the symbol that came.
    pub dead_at: Vec<Option<usize>>,
    pub final_state: usize,
}

impl GaleTrajectory {
    fn index(&self, n: usize) -> Result<usize> {
        self.checkpoints
            .binary_search(&n)
            .map_err(|_| Error::InvalidArgument(format!("prefix length {n} was not recorded")))
    }

    /// `B_i(n)` for every account.
    pub fn bet_sums(&self, n: usize) -> Result<&[f64]> {
        Ok(&self.bet_log[self.index(n)?])
    }

    /// `log2 d_i^(s)(X[:n])` per account.
    pub fn log2_account_capitals(&self, s: f64, n: usize) -> Result<Vec<f64>> {
        let slope = n as f64 * s * self.log2_sigma1;
        Ok(self
            .bet_sums(n)?
            .iter()
            .zip(&self.log2_capital)
            .map(|(b, c)| c + slope + b)
            .collect())
    }

    /// `log2 d^(s)(X[:n])`, summed over accounts; `-inf` if all are dead.
    pub fn log2_capital(&self, s: f64, n: usize) -> Result<f64> {
        Ok(log2_sum_exp2(&self.log2_account_capitals(s, n)?))
    }

    /// `d^(s)(X[:n])`. Overflows to `inf` for large positive log-capital.
    pub fn evaluate(&self, s: f64, n: usize) -> Result<f64> {
        Ok(self.log2_capital(s, n)?.exp2())
    }

    /// The `s` at which `d^(s)(X[:n]) = 1`.
    ///
    /// Every account's log-capital has the same slope `n log2|S1|` in `s`, so
    /// `s* = -log2(sum_i c_i 2^{B_i(n)}) / (n log2|S1|)`. All accounts dead
    /// gives `+inf`.
    pub fn break_even_exponent(&self, n: usize) -> Result<f64> {
        if n == 0 {
            return Err(Error::InvalidArgument(
                "break-even exponent needs at least one step".into(),
            ));
        }
        let at_zero = self.log2_capital(0.0, n)?;
        if at_zero == f64::NEG_INFINITY {
            return Ok(f64::INFINITY);
        }
        Ok(-at_zero / (n as f64 * self.log2_sigma1) + 0.0)
    }

    pub fn live_accounts(&self, n: usize) -> Result<usize> {
        Ok(self.bet_sums(n)?.iter().filter(|b| b.is_finite()).count())
    }
}

/// `log2(sum 2^v)`, stable; `-inf` for an empty or all-`-inf` input.
pub fn log2_sum_exp2(values: &[f64]) -> f64 {
    let m = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + values.iter().map(|v| (v - m).exp2()).sum::<f64>().log2()
}

/// A classic single-account finite-state gambler (no oracle).
#[derive(Clone, Debug, PartialEq)]
pub struct FsGambler {
    pub sigma: Alphabet,
    pub start: usize,
    /// `delta[q * |S| + a]`.
    pub delta: Vec<u32>,
    /// `beta[q * |S| + a]`.
    pub beta: Vec<f64>,
}

impl FsGambler {
    pub fn states(&self) -> usize {
        self.delta.len() / self.sigma.size()
    }

    /// `log2 d^(s)(x[:n])` for `n = 0..=|x|`, with initial capital 1.
    pub fn log2_gale(&self, x: &SymbolString, s: f64) -> Vec<f64> {
        let a = self.sigma.size();
        let step = s * (a as f64).log2();
        let mut out = Vec::with_capacity(x.len() + 1);
        let (mut q, mut acc) = (self.start, 0.0f64);
        out.push(acc);
        for &sym in x.symbols() {
            let c = q * a + sym as usize;
            acc += step + self.beta[c].log2();
            q = self.delta[c] as usize;
            out.push(acc);
        }
        out
    }

    /// Random gambler with strictly positive bets.
    pub fn random<R: Rng>(sigma: &Alphabet, states: usize, rng: &mut R) -> Self {
        let a = sigma.size();
        let delta = (0..states * a).map(|_| rng.gen_range(0..states) as u32).collect();
        let beta = (0..states).flat_map(|_| random_simplex(a, rng)).collect();
        Self {
            sigma: sigma.clone(),
            start: 0,
            delta,
            beta,
        }
    }
}

fn random_simplex<R: Rng>(n: usize, rng: &mut R) -> Vec<f64> {
    let w: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..1.0)).collect();
    let s: f64 = w.iter().sum();
    let mut p: Vec<f64> = w.iter().map(|x| x / s).collect();
    let head: f64 = p[..n - 1].iter().sum();
    p[n - 1] = 1.0 - head;
    p
}

/// Random gambler with `states` states, `accounts` accounts and strictly
/// positive bets.
pub fn random_gambler<R: Rng>(
    sigma1: &Alphabet,
    sigma2: &Alphabet,
    window: usize,
    states: usize,
    accounts: usize,
    rng: &mut R,
) -> Result<Fsrg> {
    let windows = windows_of(sigma2, window)?;
    let a = sigma1.size();
    let cells = table_cells(states, windows, a, 1)?;
    let delta = (0..cells).map(|_| rng.gen_range(0..states) as u32).collect();
    let mut beta = vec![0.0; cells * accounts];
    for qy in 0..states * windows {
        for i in 0..accounts {
            for (x, p) in random_simplex(a, rng).into_iter().enumerate() {
                beta[(qy * a + x) * accounts + i] = p;
            }
        }
    }
    let capital = if accounts == 1 {
        None
    } else {
        Some(random_simplex(accounts, rng))
    };
    Fsrg::new(FsrgTables {
        sigma1: sigma1.clone(),
        sigma2: sigma2.clone(),
        window,
        state_names: (0..states).map(|q| format!("q{q}")).collect(),
        start: 0,
        capital,
        accounts,
        delta,
        beta,
    })
}

/// One state, window 1; bets everything on the symbol the oracle shows.
pub fn copy_gambler(sigma: &Alphabet) -> Fsrg {
    let a = sigma.size();
    let beta = (0..a)
        .flat_map(|y| (0..a).map(move |x| if x == y { 1.0 } else { 0.0 }))
        .collect();
    Fsrg::new(FsrgTables {
        sigma1: sigma.clone(),
        sigma2: sigma.clone(),
        window: 1,
        state_names: vec!["q0".into()],
        start: 0,
        capital: None,
        accounts: 1,
        delta: vec![0; a * a],
        beta,
    })
    .expect("copy gambler tables are valid")
}

/// One state; bets `1/|S1|` on every symbol.
pub fn uniform_gambler(sigma1: &Alphabet, sigma2: &Alphabet, window: usize) -> Result<Fsrg> {
    let cells = windows_of(sigma2, window)? * sigma1.size();
    Fsrg::new(FsrgTables {
        sigma1: sigma1.clone(),
        sigma2: sigma2.clone(),
        window,
        state_names: vec!["q0".into()],
        start: 0,
        capital: None,
        accounts: 1,
        delta: vec![0; cells],
        beta: vec![1.0 / sigma1.size() as f64; cells],
    })
}

/// State layout of the block gambler: `q_lambda` at 0, then `(v, w)` for
/// each oracle block `v` and partial input block `w` with `1 <= |w| < l`.
struct BlockStates {
    a: usize,
    windows: usize,
    ell: usize,
    offsets: Vec<usize>,
    total: usize,
}

impl BlockStates {
    fn new(a: usize, windows: usize, ell: usize) -> Result<Self> {
        let mut offsets = vec![0usize; ell];
        let mut total: u128 = 1;
        for j in 1..ell {
            offsets[j] = total as usize;
            total += windows as u128 * (a as u128).pow(j as u32);
            if total > MAX_TABLE {
                return Err(Error::TableTooLarge(total));
            }
        }
        Ok(Self {
            a,
            windows,
            ell,
            offsets,
            total: total as usize,
        })
    }

    fn index(&self, v: usize, w_len: usize, w_code: usize) -> usize {
        if w_len == 0 {
            0
        } else {
            self.offsets[w_len] + v * self.a.pow(w_len as u32) + w_code
        }
    }

    fn names(&self, sigma1: &Alphabet, sigma2: &Alphabet) -> Vec<String> {
        let mut names = vec!["q_lambda".to_string()];
        for j in 1..self.ell {
            for v in 0..self.windows {
                for w in 0..self.a.pow(j as u32) {
                    names.push(format!(
                        "{}|{}",
                        block_label(sigma2, v, self.ell),
                        block_label(sigma1, w, j)
                    ));
                }
            }
        }
        names
    }
}

fn block_label(a: &Alphabet, code: usize, len: usize) -> String {
    let b = a.size();
    let mut digits = vec![0usize; len];
    let mut c = code;
    for d in digits.iter_mut().rev() {
        *d = c % b;
        c /= b;
    }
    match a.chars() {
        Some(chars) => digits.iter().map(|&d| chars[d]).collect(),
        None => digits.iter().map(|d| format!("<{d}>")).collect(),
    }
}

fn decode_block(code: usize, radix: usize, len: usize) -> Vec<Symbol> {
    let mut out = vec![0; len];
    let mut c = code;
    for s in out.iter_mut().rev() {
        *s = (c % radix) as Symbol;
        c /= radix;
    }
    out
}

/// The block gambler of a strictly positive joint distribution `P'` over
/// `S1^l x S2^l`: at the start of each `l`-block it remembers the oracle
/// window `v`, then bets `P'(wa | v) / P'(w | v)` on each extension of the
/// partial block `w`, returning to `q_lambda` after `l` symbols.
///
/// On `X[:kl]` its log-capital is
/// `kl s log2|S1| + sum_i log2 P'(x_i | y_i)` over the aligned block pairs
/// (see [`block_gambler_closed_form`]).
pub fn from_distribution(dist: &JointDistribution) -> Result<Fsrg> {
    from_distributions(std::slice::from_ref(dist), None)
}

/// One account per distribution, sharing the block-gambler transitions.
pub fn from_distributions(dists: &[JointDistribution], capital: Option<Vec<f64>>) -> Result<Fsrg> {
    let first = dists
        .first()
        .ok_or_else(|| Error::InvalidArgument("need at least one distribution".into()))?;
    let (sigma1, sigma2, ell) = (first.sigma1().clone(), first.sigma2().clone(), first.ell());
    for d in dists {
        if d.sigma1() != &sigma1 || d.sigma2() != &sigma2 || d.ell() != ell {
            return Err(Error::InvalidArgument("distributions of different shapes".into()));
        }
        if d.min_weight() <= 0.0 {
            return Err(Error::InvalidDistribution(
                "block gambler needs strictly positive weights; smooth first".into(),
            ));
        }
    }
    let a = sigma1.size();
    let windows = windows_of(&sigma2, ell)?;
    let layout = BlockStates::new(a, windows, ell)?;
    let k = dists.len();
    let cells = table_cells(layout.total, windows, a, 1)?;
    table_cells(layout.total, windows, a, k)?;
    let mut delta = vec![0u32; cells];
    let mut beta = vec![0.0f64; cells * k];
    let cell = |q: usize, y: usize, x: usize| (q * windows + y) * a + x;

    // Partial conditionals P'(w | v) for every |w| <= l, per account.
    let mut partial: Vec<Vec<Vec<f64>>> = Vec::with_capacity(k);
    for d in dists {
        let mut by_len = Vec::with_capacity(ell + 1);
        for j in 0..=ell {
            let span = a.pow((ell - j) as u32);
            let mut t = vec![0.0; windows * a.pow(j as u32)];
            for v in 0..windows {
                let m = d.marginal(v);
                for w in 0..a.pow(j as u32) {
                    let mass: f64 = (w * span..(w + 1) * span).map(|u| d.weight(u, v)).sum();
                    t[v * a.pow(j as u32) + w] = mass / m;
                }
            }
            by_len.push(t);
        }
        partial.push(by_len);
    }
    let pw = |i: usize, j: usize, v: usize, w: usize| partial[i][j][v * a.pow(j as u32) + w];

    for y in 0..windows {
        for x in 0..a {
            let c = cell(0, y, x);
            delta[c] = if ell == 1 { 0 } else { layout.index(y, 1, x) as u32 };
            for i in 0..k {
                beta[c * k + i] = pw(i, 1, y, x);
            }
        }
    }
    for j in 1..ell {
        for v in 0..windows {
            for w in 0..a.pow(j as u32) {
                let q = layout.index(v, j, w);
                for y in 0..windows {
                    for x in 0..a {
                        let c = cell(q, y, x);
                        let wx = w * a + x;
                        delta[c] = if j + 1 == ell { 0 } else { layout.index(v, j + 1, wx) as u32 };
                        for i in 0..k {
                            beta[c * k + i] = pw(i, j + 1, v, wx) / pw(i, j, v, w);
                        }
                    }
                }
            }
        }
    }
    for row in 0..layout.total * windows {
        for i in 0..k {
            let s: f64 = (0..a).map(|x| beta[(row * a + x) * k + i]).sum();
            for x in 0..a {
                beta[(row * a + x) * k + i] /= s;
            }
        }
    }
    Fsrg::new(FsrgTables {
        state_names: layout.names(&sigma1, &sigma2),
        sigma1,
        sigma2,
        window: ell,
        start: 0,
        capital,
        accounts: k,
        delta,
        beta,
    })
}

/// `log2 c + kl s log2|S1| + sum_{i<k} log2 P'(x_i | y_i)`, the block
/// gambler's log-capital on `X[:kl]` computed from block counts alone.
pub fn block_gambler_closed_form(
    dist: &JointDistribution,
    x: &SymbolString,
    y: &SymbolString,
    k: usize,
    s: f64,
    log2_capital: f64,
) -> Result<f64> {
    let ell = dist.ell();
    if x.len() < k * ell || y.len() < k * ell {
        return Err(Error::NoCompleteBlock {
            ell,
            len: x.len().min(y.len()),
        });
    }
    let (ra, rb) = (dist.sigma1().size(), dist.sigma2().size());
    let mut sum = 0.0;
    for i in 0..k {
        let u = block_code(&x.symbols()[i * ell..(i + 1) * ell], ra) as usize;
        let v = block_code(&y.symbols()[i * ell..(i + 1) * ell], rb) as usize;
        sum += dist.conditional(u, v)?.log2();
    }
    Ok(log2_capital + (k * ell) as f64 * s * (ra as f64).log2() + sum)
}

/// The `L`-length stretch of `g`: states `Q x [L]`, the phase advancing
/// mod `L`; bets follow `g` while the phase is at most `L - l` and are
/// uniform afterwards.
pub fn stretch(g: &Fsrg, len: usize) -> Result<Fsrg> {
    if len <= g.window {
        return Err(Error::InvalidArgument(format!(
            "stretch length {len} must exceed the window length {}",
            g.window
        )));
    }
    let (a, windows, k) = (g.sigma1.size(), g.windows, g.accounts);
    let states = g.states() * len;
    let cells = table_cells(states, windows, a, 1)?;
    table_cells(states, windows, a, k)?;
    let mut delta = vec![0u32; cells];
    let mut beta = vec![0.0f64; cells * k];
    let uniform = 1.0 / a as f64;
    for q in 0..g.states() {
        for p in 0..len {
            let qp = q * len + p;
            for y in 0..windows {
                for x in 0..a {
                    let src = g.cell(q, y, x);
                    let dst = (qp * windows + y) * a + x;
                    delta[dst] = (g.delta[src] as usize * len + (p + 1) % len) as u32;
                    for i in 0..k {
                        beta[dst * k + i] = if p <= len - g.window {
                            g.beta[src * k + i]
                        } else {
                            uniform
                        };
                    }
                }
            }
        }
    }
    let state_names = g
        .state_names
        .iter()
        .flat_map(|n| (0..len).map(move |p| format!("{n}@{p}")))
        .collect();
    Fsrg::new(FsrgTables {
        sigma1: g.sigma1.clone(),
        sigma2: g.sigma2.clone(),
        window: g.window,
        state_names,
        start: g.start * len,
        capital: Some(g.capital.clone()),
        accounts: k,
        delta,
        beta,
    })
}

/// A multi-account block gambler with one account per representative of a
/// finite grid over the smoothed distributions on `S1^l x S2^l`.
#[derive(Clone, Debug)]
pub struct CoverGambler {
    pub gambler: Fsrg,
    /// Representative weight vectors, keyed like [`JointDistribution::weights`].
    pub representatives: Vec<Vec<f64>>,
    pub eps: f64,
}

impl CoverGambler {
    /// Index of the representative closest to `p` in max norm, and that distance.
    pub fn closest(&self, p: &[f64]) -> (usize, f64) {
        self.representatives
            .iter()
            .enumerate()
            .map(|(i, q)| (i, crate::distributions::max_abs_diff(p, q)))
            .fold((0, f64::INFINITY), |best, c| if c.1 < best.1 { c } else { best })
    }
}

fn binomial(n: u128, k: u128) -> u128 {
    let k = k.min(n - k);
    let mut r: u128 = 1;
    for i in 0..k {
        r = r.saturating_mul(n - i) / (i + 1);
        if r == u128::MAX {
            break;
        }
    }
    r
}

/// Grid of representatives for the cover gambler over `|Omega|` cells.
///
/// With `2 |Omega| eps >= 1` the grid is the single uniform distribution.
/// Otherwise it is `Q = eps + (1 - |Omega| eps) R` for every `R` on the
/// lattice `{c / M : c a composition of M into |Omega| parts}`,
/// `M = ceil(1 / ((|Omega| + 1) eps))`; every distribution `P` has a
/// representative with `max |P - Q| < 2 |Omega| eps`, and every `Q >= eps`.
pub fn cover_grid(omega: usize, eps: f64, cap: usize) -> Result<Vec<Vec<f64>>> {
    let o = omega as f64;
    if !(eps > 0.0 && eps * o < 1.0) {
        return Err(Error::InvalidArgument(format!("eps = {eps} must lie in (0, 1/{omega})")));
    }
    if 2.0 * o * eps >= 1.0 {
        return Ok(vec![vec![1.0 / o; omega]]);
    }
    let m = (1.0 / ((o + 1.0) * eps)).ceil() as usize;
    let size = binomial((m + omega - 1) as u128, (omega - 1) as u128);
    if size > cap as u128 {
        return Err(Error::GridTooLarge { size, cap });
    }
    let scale = 1.0 - o * eps;
    let mut out = Vec::with_capacity(size as usize);
    let mut comp = vec![0usize; omega];
    compositions(m, 0, &mut comp, &mut |c| {
        out.push(c.iter().map(|&ci| eps + scale * ci as f64 / m as f64).collect());
    });
    Ok(out)
}

fn compositions(rest: usize, i: usize, comp: &mut [usize], emit: &mut impl FnMut(&[usize])) {
    if i + 1 == comp.len() {
        comp[i] = rest;
        emit(comp);
        return;
    }
    for c in 0..=rest {
        comp[i] = c;
        compositions(rest - c, i + 1, comp, emit);
    }
}

/// The cover gambler for block length `l`: one block-gambler account per
/// grid representative (see [`cover_grid`]), equal initial capitals.
pub fn cover_gambler(
    ell: usize,
    sigma1: &Alphabet,
    sigma2: &Alphabet,
    eps: f64,
    cap: usize,
) -> Result<CoverGambler> {
    let omega = (sigma1.size() as u128).saturating_pow(ell as u32)
        * (sigma2.size() as u128).saturating_pow(ell as u32);
    if omega > MAX_TABLE {
        return Err(Error::TableTooLarge(omega));
    }
    let representatives = cover_grid(omega as usize, eps, cap)?;
    let dists = representatives
        .iter()
        .map(|q| {
            let s: f64 = q.iter().sum();
            JointDistribution::new(sigma1.clone(), sigma2.clone(), ell, q.iter().map(|w| w / s).collect())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CoverGambler {
        gambler: from_distributions(&dists, None)?,
        representatives,
        eps,
    })
}

/// Formats a probability as a rational `"p/q"` that converts back to the
/// same `f64`, preferring the first continued-fraction convergent that does.
pub fn format_rational(x: f64) -> String {
    if x == 0.0 {
        return "0/1".into();
    }
    if x == 1.0 {
        return "1/1".into();
    }
    let bits = x.to_bits();
    let exp = ((bits >> 52) & 0x7ff) as i64;
    let frac = bits & ((1u64 << 52) - 1);
    let (mut m, mut e) = if exp == 0 {
        (frac, 1074i64)
    } else {
        (frac | (1u64 << 52), 1075 - exp)
    };
    while m % 2 == 0 && e > 0 {
        m /= 2;
        e -= 1;
    }
    if e > 126 {
        return format!("1/{}", (1.0 / x).min(u64::MAX as f64) as u64);
    }
    let (mut num, mut den) = (m as u128, 1u128 << e);
    let (mut p0, mut q0, mut p1, mut q1) = (0u128, 1u128, 1u128, 0u128);
    let mut fallback = None;
    while den != 0 {
        let a = num / den;
        let (p2, q2) = (a * p1 + p0, a * q1 + q0);
        if q2 > 1 << 62 {
            break;
        }
        (p0, q0, p1, q1) = (p1, q1, p2, q2);
        if p1 as f64 / q1 as f64 == x {
            return format!("{p1}/{q1}");
        }
        fallback = Some((p1, q1));
        (num, den) = (den, num - a * den);
    }
    match fallback {
        Some((p, q)) => format!("{p}/{q}"),
        None => format!("{x}"),
    }
}

/// Parses `"p/q"` or `"p"` into a probability.
pub fn parse_rational(s: &str) -> Result<f64> {
    let r: Ratio<u64> = s
        .trim()
        .parse()
        .map_err(|e| Error::Parse(format!("rational {s:?}: {e}")))?;
    Ok(*r.numer() as f64 / *r.denom() as f64)
}

/// Gambler spec file layout.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GamblerSpec {
    pub sigma1: String,
    pub sigma2: String,
    pub window: usize,
    pub accounts: usize,
    pub states: Vec<String>,
    pub start: String,
    pub capital: Vec<String>,
    /// `[state, window, symbol, next state]`.
    pub delta: Vec<(String, String, String, String)>,
    /// `[state, window, symbol, [bet per account]]`.
    pub beta: Vec<(String, String, String, Vec<String>)>,
}

fn plain_text(a: &Alphabet) -> Result<String> {
    a.chars()
        .map(|c| c.iter().collect())
        .ok_or_else(|| Error::AlphabetMismatch("gambler specs need printable alphabets".into()))
}

impl GamblerSpec {
    pub fn from_gambler(g: &Fsrg) -> Result<Self> {
        let sigma1 = plain_text(&g.sigma1)?;
        let sigma2 = plain_text(&g.sigma2)?;
        let a = g.sigma1.size();
        let mut delta = Vec::with_capacity(g.delta.len());
        let mut beta = Vec::with_capacity(g.delta.len());
        for q in 0..g.states() {
            for y in 0..g.windows {
                let wy = block_label(&g.sigma2, y, g.window);
                for x in 0..a {
                    let sx = block_label(&g.sigma1, x, 1);
                    let c = g.cell(q, y, x);
                    let name = g.state_names[q].clone();
                    delta.push((
                        name.clone(),
                        wy.clone(),
                        sx.clone(),
                        g.state_names[g.delta[c] as usize].clone(),
                    ));
                    let bets = (0..g.accounts)
                        .map(|i| format_rational(g.beta[c * g.accounts + i]))
                        .collect();
                    beta.push((name, wy.clone(), sx, bets));
                }
            }
        }
        Ok(Self {
            sigma1,
            sigma2,
            window: g.window,
            accounts: g.accounts,
            states: g.state_names.clone(),
            start: g.state_names[g.start].clone(),
            capital: g.capital.iter().map(|&c| format_rational(c)).collect(),
            delta,
            beta,
        })
    }

    pub fn to_gambler(&self) -> Result<Fsrg> {
        let sigma1 = Alphabet::new(&self.sigma1)?;
        let sigma2 = Alphabet::new(&self.sigma2)?;
        let windows = windows_of(&sigma2, self.window)?;
        let a = sigma1.size();
        let k = self.accounts;
        let states = self.states.len();
        let cells = table_cells(states, windows, a, 1)?;
        table_cells(states, windows, a, k)?;
        let index: std::collections::HashMap<&str, usize> =
            self.states.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
        if index.len() != states {
            return Err(Error::InvalidGambler("duplicate state names".into()));
        }
        let state = |s: &str| {
            index
                .get(s)
                .copied()
                .ok_or_else(|| Error::InvalidGambler(format!("unknown state {s:?}")))
        };
        let win = |s: &str| -> Result<usize> {
            let w = SymbolString::parse(s, &sigma2)?;
            if w.len() != self.window {
                return Err(Error::InvalidGambler(format!(
                    "window {s:?} has length {}, expected {}",
                    w.len(),
                    self.window
                )));
            }
            Ok(block_code(w.symbols(), sigma2.size()) as usize)
        };
        let sym = |s: &str| -> Result<usize> {
            let mut it = s.chars();
            match (it.next(), it.next()) {
                (Some(c), None) => Ok(sigma1.index_of(c)? as usize),
                _ => Err(Error::InvalidGambler(format!("{s:?} is not a single input symbol"))),
            }
        };
        let cell = |q: usize, y: usize, x: usize| (q * windows + y) * a + x;
        let mut delta = vec![u32::MAX; cells];
        for (q, y, x, to) in &self.delta {
            let c = cell(state(q)?, win(y)?, sym(x)?);
            if delta[c] != u32::MAX {
                return Err(Error::InvalidGambler(format!("duplicate transition for ({q}, {y}, {x})")));
            }
            delta[c] = state(to)? as u32;
        }
        if delta.contains(&u32::MAX) {
            return Err(Error::InvalidGambler("transition table is not total".into()));
        }
        let mut beta = vec![f64::NAN; cells * k];
        for (q, y, x, bets) in &self.beta {
            if bets.len() != k {
                return Err(Error::InvalidGambler(format!(
                    "{} bets for {k} accounts at ({q}, {y}, {x})",
                    bets.len()
                )));
            }
            let c = cell(state(q)?, win(y)?, sym(x)?);
            for (i, b) in bets.iter().enumerate() {
                beta[c * k + i] = parse_rational(b)?;
            }
        }
        if beta.iter().any(|b| b.is_nan()) {
            return Err(Error::InvalidGambler("betting table is not total".into()));
        }
        let capital = self
            .capital
            .iter()
            .map(|c| parse_rational(c))
            .collect::<Result<Vec<_>>>()?;
        Fsrg::new(FsrgTables {
            sigma1,
            sigma2,
            window: self.window,
            state_names: self.states.clone(),
            start: state(&self.start)?,
            capital: Some(capital),
            accounts: k,
            delta,
            beta,
        })
    }
}

/// Single block of length `len` decoded from its code (big-endian).
pub fn block_symbols(code: usize, radix: usize, len: usize) -> Vec<Symbol> {
    decode_block(code, radix, len)
}
