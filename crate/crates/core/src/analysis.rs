//! Finite-prefix experiments around A.P. subsequences, interleaving and
//! relative randomness.
//!
//! Each verifier measures entropy profiles, checks the identities and
//! array inequalities that hold exactly on finite data, and compares the
//! liminf / limsup proxies (tail min / max over the `k` grid) against the
//! declared tolerance.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::alphabet::Alphabet;
use crate::entropy::{
    block_code, chain_rule_decompose, cond_block_entropy, entropy_series, interleave_product_entropy_equal,
    mutual_info_rate, tail_extrema, BlockStats, EntropyProfile, KGrid,
};
use crate::error::{Error, Result};
use crate::ops::{interleave_strings, ApExtract};
use crate::source::SequenceSource;
use crate::string::{encode_product, SymbolString};

/// Slack for identities that hold exactly up to floating-point rounding.
pub const IDENTITY_TOL: f64 = 1e-9;
/// Slack for min/max inequalities on finite arrays.
pub const ARRAY_TOL: f64 = 1e-12;
/// Largest joint count table a verifier will build.
pub const MAX_CELLS: u128 = 1 << 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    /// A tolerance-based measurement missed its bound.
    MeasuredFail,
    /// An exact finite identity or array inequality failed.
    IdentityFail,
    /// A precondition of the experiment does not hold on the data.
    Inapplicable,
}

impl Status {
    /// Process exit code: 0 pass or inapplicable, 2 measured fail,
    /// 3 identity fail.
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Pass | Status::Inapplicable => 0,
            Status::MeasuredFail => 2,
            Status::IdentityFail => 3,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    Identity,
    Measurement,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub kind: CheckKind,
    pub value: f64,
    /// `"<="` or `">="`.
    pub relation: String,
    pub bound: f64,
    pub passed: bool,
}

impl Check {
    fn at_most(name: &str, kind: CheckKind, value: f64, bound: f64) -> Self {
        Self {
            name: name.into(),
            kind,
            value,
            relation: "<=".into(),
            bound,
            passed: value <= bound,
        }
    }

    fn at_least(name: &str, kind: CheckKind, value: f64, bound: f64) -> Self {
        Self {
            name: name.into(),
            kind,
            value,
            relation: ">=".into(),
            bound,
            passed: value >= bound,
        }
    }
}

/// Where a reported quantity came from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub quantity: String,
    pub input: String,
    pub prefix_len: usize,
    pub ell: Vec<usize>,
}

/// A labelled finite prefix under test.
#[derive(Clone, Debug)]
pub struct Subject {
    pub label: String,
    pub data: SymbolString,
}

impl Subject {
    pub fn new(label: impl Into<String>, data: SymbolString) -> Self {
        Self {
            label: label.into(),
            data,
        }
    }

    /// `src[:n]`, labelled with its generator descriptor.
    pub fn from_source(src: &SequenceSource, n: usize) -> Result<Self> {
        let label = format!(
            "{} over {}",
            serde_json::to_string(src.generator())?,
            src.alphabet()
        );
        Ok(Self::new(label, src.prefix(n)?))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub experiment: String,
    pub inputs: BTreeMap<String, String>,
    /// Block length of the headline proxies.
    pub ell: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub values: BTreeMap<String, f64>,
    pub residuals: BTreeMap<String, f64>,
    pub checks: Vec<Check>,
    pub provenance: Vec<Provenance>,
    pub profiles: BTreeMap<String, EntropyProfile>,
    pub status: Status,
}

impl InequalityReport {
    fn new(experiment: &str) -> Self {
        Self {
            experiment: experiment.into(),
            inputs: BTreeMap::new(),
            ell: 0,
            lhs: 0.0,
            rhs: 0.0,
            values: BTreeMap::new(),
            residuals: BTreeMap::new(),
            checks: Vec::new(),
            provenance: Vec::new(),
            profiles: BTreeMap::new(),
            status: Status::Pass,
        }
    }

    fn input(&mut self, key: &str, value: impl ToString) {
        self.inputs.insert(key.into(), value.to_string());
    }

    fn profile(&mut self, name: &str, input: &Subject, prefix_len: usize, p: EntropyProfile) {
        self.provenance.push(Provenance {
            quantity: name.into(),
            input: input.label.clone(),
            prefix_len,
            ell: p.ell.clone(),
        });
        self.profiles.insert(name.into(), p);
    }

    fn finish(mut self) -> Self {
        let failed = |k: CheckKind| self.checks.iter().any(|c| c.kind == k && !c.passed);
        if self.status != Status::Inapplicable {
            self.status = if failed(CheckKind::Identity) {
                Status::IdentityFail
            } else if failed(CheckKind::Measurement) {
                Status::MeasuredFail
            } else {
                Status::Pass
            };
        }
        self
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn value(&self, name: &str) -> Option<f64> {
        self.values.get(name).copied()
    }
}

/// Largest `l <= ell_max` with `|S|^(columns * l) <= 2^20`.
pub fn effective_ell_max(alphabet_size: usize, columns: usize, ell_max: usize) -> Result<usize> {
    let fits = |l: usize| (alphabet_size as u128).checked_pow((columns * l) as u32).is_some_and(|c| c <= MAX_CELLS);
    (1..=ell_max)
        .rev()
        .find(|&l| fits(l))
        .ok_or_else(|| Error::TableTooLarge((alphabet_size as u128).saturating_pow(columns as u32)))
}

fn scaled_grid(grid: &KGrid, d: usize) -> KGrid {
    match grid {
        KGrid::Prefixes { lengths } => KGrid::Prefixes {
            lengths: lengths.iter().map(|l| l / d).collect(),
        },
        g => g.clone(),
    }
}

/// Profile of `H_{block(l)}(x[: k block(l)] | cond)` over the `k` grid of a
/// part of length `part_len` at block length `l`.
fn profile_with(
    x: &SymbolString,
    cond: Option<&SymbolString>,
    ells: &[usize],
    block: impl Fn(usize) -> usize + Sync,
    grid: &KGrid,
    part_len: usize,
) -> Result<EntropyProfile> {
    let rows = ells
        .par_iter()
        .map(|&l| {
            let (ks, start) = grid.points(part_len, l);
            if ks.is_empty() {
                return Err(Error::NoCompleteBlock { ell: l, len: part_len });
            }
            let h = entropy_series(x, cond, block(l), &ks)?;
            Ok((ks, start, h))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(assemble(ells, rows))
}

fn assemble(ells: &[usize], rows: Vec<(Vec<usize>, usize, Vec<f64>)>) -> EntropyProfile {
    let mut p = EntropyProfile {
        ell: ells.to_vec(),
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
        p.k.push(ks);
        p.tail_start.push(start);
        p.h.push(h);
        p.tail_min.push(lo);
        p.tail_max.push(hi);
    }
    p.dim_proxy = p.tail_min.last().copied().unwrap_or(0.0);
    p.strong_dim_proxy = p.tail_max.last().copied().unwrap_or(0.0);
    p
}

fn check_permutation(sigma: &[usize], d: usize) -> Result<()> {
    let mut seen = vec![false; d];
    if sigma.len() != d {
        return Err(Error::InvalidArgument(format!("permutation of length {} for d = {d}", sigma.len())));
    }
    for &s in sigma {
        if s >= d || seen[s] {
            return Err(Error::InvalidArgument(format!("{sigma:?} is not a permutation of 0..{d}")));
        }
        seen[s] = true;
    }
    Ok(())
}

/// Profiles shared by the two A.P. verifiers: `X` at block `d l`, and the
/// chain-rule terms `H_l(A_{s(i)} | A_{s(0)}, ..., A_{s(i-1)})`.
struct ApData {
    ells: Vec<usize>,
    x: EntropyProfile,
    terms: Vec<EntropyProfile>,
}

fn ap_data(
    report: &mut InequalityReport,
    x: &Subject,
    d: usize,
    sigma: &[usize],
    ell_max: usize,
    grid: &KGrid,
) -> Result<ApData> {
    if d == 0 || ell_max == 0 {
        return Err(Error::InvalidArgument("d and ell_max must be >= 1".into()));
    }
    check_permutation(sigma, d)?;
    let n = x.data.len() - x.data.len() % d;
    if n < d * ell_max {
        return Err(Error::NoCompleteBlock {
            ell: d * ell_max,
            len: x.data.len(),
        });
    }
    grid.validate()?;
    let eff = effective_ell_max(x.data.alphabet().size(), d, ell_max)?;
    let ells: Vec<usize> = (1..=eff).collect();
    let data = x.data.prefix(n);
    let parts = data.ap_split(d)?;
    let ordered: Vec<SymbolString> = sigma.iter().map(|&s| parts[s].clone()).collect();
    let part_len = n / d;
    let pgrid = scaled_grid(grid, d);

    report.input("n", n);
    report.input("d", d);
    report.input("sigma", format!("{sigma:?}"));
    report.input("ell_max", ell_max);
    report.input("grid", serde_json::to_string(grid)?);
    report.ell = eff;

    let xp = profile_with(&data, None, &ells, |l| d * l, &pgrid, part_len)?;
    report.profile("X", x, n, xp.clone());
    let mut terms = Vec::with_capacity(d);
    for i in 0..d {
        let cond = if i == 0 { None } else { Some(encode_product(&ordered[..i])?) };
        let p = profile_with(&ordered[i], cond.as_ref(), &ells, |l| l, &pgrid, part_len)?;
        let name = if i == 0 {
            format!("A{}", sigma[0])
        } else {
            format!(
                "A{}|{}",
                sigma[i],
                sigma[..i].iter().map(|s| format!("A{s}")).collect::<Vec<_>>().join(",")
            )
        };
        report.profile(&name, x, n, p.clone());
        terms.push(p);
    }

    // Chain rule at every grid point: H_{dl}(X) = (1/d) sum_i terms_i.
    let mut residual = 0.0f64;
    for (r, _) in ells.iter().enumerate() {
        for j in 0..xp.h[r].len() {
            let mean = terms.iter().map(|t| t.h[r][j]).sum::<f64>() / d as f64;
            residual = residual.max((xp.h[r][j] - mean).abs());
        }
    }
    report.residuals.insert("chain_rule".into(), residual);
    report
        .checks
        .push(Check::at_most("chain_rule", CheckKind::Identity, residual, IDENTITY_TOL));
    Ok(ApData { ells, x: xp, terms })
}

fn mean_series(terms: &[EntropyProfile], row: usize) -> Vec<f64> {
    let d = terms.len() as f64;
    (0..terms[0].h[row].len())
        .map(|j| terms.iter().map(|t| t.h[row][j]).sum::<f64>() / d)
        .collect()
}

/// Lower bound through the chain rule: the dimension proxy of `X` against
/// `(1/d)(dim A_{s(0)} + sum_i dim^{A_{s(0)},...}(A_{s(i)}))` on tail minima.
pub fn verify_ap_lower(
    x: &Subject,
    d: usize,
    sigma: &[usize],
    ell_max: usize,
    grid: &KGrid,
) -> Result<InequalityReport> {
    let mut r = InequalityReport::new("ap_lower");
    let data = ap_data(&mut r, x, d, sigma, ell_max, grid)?;
    let mut worst = f64::INFINITY;
    for row in 0..data.ells.len() {
        let start = data.x.tail_start[row];
        let (min_sum, _) = tail_extrema(&mean_series(&data.terms, row), start);
        let sum_min = data.terms.iter().map(|t| t.tail_min[row]).sum::<f64>() / d as f64;
        worst = worst.min(min_sum - sum_min);
    }
    r.checks.push(Check::at_least("min_of_sum_ge_sum_of_mins", CheckKind::Identity, worst, -ARRAY_TOL));
    let last = data.ells.len() - 1;
    r.lhs = data.x.tail_min[last];
    r.rhs = data.terms.iter().map(|t| t.tail_min[last]).sum::<f64>() / d as f64;
    r.checks.push(Check::at_least("lhs_ge_rhs", CheckKind::Identity, r.lhs - r.rhs, -IDENTITY_TOL));
    for (i, t) in data.terms.iter().enumerate() {
        r.values.insert(format!("term{i}_tail_min"), t.tail_min[last]);
        r.values.insert(format!("term{i}_tail_max"), t.tail_max[last]);
    }
    Ok(r.finish())
}

/// Upper bound through the chain rule: the dimension proxy of `X` against
/// `min_m (1/d)(tail-min of term m + sum_{i != m} tail-max of term i)`.
/// With `m = Some(_)` only that index is used.
pub fn verify_ap_upper(
    x: &Subject,
    d: usize,
    sigma: &[usize],
    m: Option<usize>,
    ell_max: usize,
    grid: &KGrid,
) -> Result<InequalityReport> {
    let mut r = InequalityReport::new("ap_upper");
    if let Some(m) = m {
        if m >= d {
            return Err(Error::InvalidArgument(format!("distinguished index {m} >= d = {d}")));
        }
        r.input("m", m);
    }
    let data = ap_data(&mut r, x, d, sigma, ell_max, grid)?;
    let ms: Vec<usize> = m.map_or_else(|| (0..d).collect(), |m| vec![m]);
    let bound = |row: usize, m: usize| {
        let t = &data.terms;
        (t[m].tail_min[row] + (0..d).filter(|&i| i != m).map(|i| t[i].tail_max[row]).sum::<f64>())
            / d as f64
    };
    let mut worst = f64::INFINITY;
    for row in 0..data.ells.len() {
        let start = data.x.tail_start[row];
        let (min_sum, _) = tail_extrema(&mean_series(&data.terms, row), start);
        for &mm in &ms {
            worst = worst.min(bound(row, mm) - min_sum);
        }
    }
    r.checks.push(Check::at_least("min_of_sum_le_min_plus_maxes", CheckKind::Identity, worst, -ARRAY_TOL));
    let last = data.ells.len() - 1;
    r.lhs = data.x.tail_min[last];
    r.rhs = ms.iter().map(|&mm| bound(last, mm)).fold(f64::INFINITY, f64::min);
    for &mm in &ms {
        r.values.insert(format!("bound_m{mm}"), bound(last, mm));
    }
    r.values.insert("gap".into(), r.rhs - r.lhs);
    r.checks.push(Check::at_most("lhs_le_rhs", CheckKind::Identity, r.lhs - r.rhs, IDENTITY_TOL));
    Ok(r.finish())
}

/// Residues of `X` modulo `d`: the dimension proxy of each `A_{d,a}` and
/// its conditional proxy given all other residues; passes when all are at
/// least `1 - tol`.
pub fn verify_wall_strength(
    x: &Subject,
    d: usize,
    ell_max: usize,
    tol: f64,
    grid: &KGrid,
) -> Result<InequalityReport> {
    if d == 0 || ell_max == 0 {
        return Err(Error::InvalidArgument("d and ell_max must be >= 1".into()));
    }
    grid.validate()?;
    let mut r = InequalityReport::new("wall");
    let n = x.data.len() - x.data.len() % d;
    let data = x.data.prefix(n);
    let eff = effective_ell_max(data.alphabet().size(), d, ell_max)?;
    let ells: Vec<usize> = (1..=eff).collect();
    let parts = data.ap_split(d)?;
    let part_len = n / d;
    let pgrid = scaled_grid(grid, d);
    r.input("n", n);
    r.input("d", d);
    r.input("ell_max", ell_max);
    r.input("tol", tol);
    r.input("grid", serde_json::to_string(grid)?);
    r.ell = eff;
    let mut worst = f64::INFINITY;
    for a in 0..d {
        let un = profile_with(&parts[a], None, &ells, |l| l, &pgrid, part_len)?;
        let rest: Vec<SymbolString> = (0..d).filter(|&b| b != a).map(|b| parts[b].clone()).collect();
        let cond = if rest.is_empty() { None } else { Some(encode_product(&rest)?) };
        let cp = profile_with(&parts[a], cond.as_ref(), &ells, |l| l, &pgrid, part_len)?;
        r.values.insert(format!("dim_A{a}"), un.dim_proxy);
        r.values.insert(format!("dim_A{a}_given_rest"), cp.dim_proxy);
        r.checks.push(Check::at_least(&format!("A{a}"), CheckKind::Measurement, un.dim_proxy, 1.0 - tol));
        r.checks.push(Check::at_least(
            &format!("A{a}_given_rest"),
            CheckKind::Measurement,
            cp.dim_proxy,
            1.0 - tol,
        ));
        worst = worst.min(cp.dim_proxy).min(un.dim_proxy);
        r.profile(&format!("A{a}"), x, n, un);
        r.profile(&format!("A{a}|rest"), x, n, cp);
    }
    r.lhs = worst;
    r.rhs = 1.0 - tol;
    Ok(r.finish())
}

struct PairData {
    eff: usize,
    a: EntropyProfile,
    b_given_a: EntropyProfile,
    joined: EntropyProfile,
}

fn pair_data(
    r: &mut InequalityReport,
    a: &Subject,
    b: &Subject,
    ell_max: usize,
    grid: &KGrid,
) -> Result<PairData> {
    if a.data.len() != b.data.len() {
        return Err(Error::LengthMismatch {
            left: a.data.len(),
            right: b.data.len(),
        });
    }
    if ell_max == 0 {
        return Err(Error::InvalidArgument("ell_max must be >= 1".into()));
    }
    grid.validate()?;
    let n = a.data.len();
    let eff = effective_ell_max(a.data.alphabet().size(), 2, ell_max)?;
    let ells: Vec<usize> = (1..=eff).collect();
    let joined = interleave_strings(&[a.data.clone(), b.data.clone()])?;
    r.input("n", n);
    r.input("ell_max", ell_max);
    r.input("grid", serde_json::to_string(grid)?);
    r.ell = eff;
    let pa = profile_with(&a.data, None, &ells, |l| l, grid, n)?;
    let pb = profile_with(&b.data, Some(&a.data), &ells, |l| l, grid, n)?;
    let pj = profile_with(&joined, None, &ells, |l| 2 * l, grid, n)?;
    r.profile("A", a, n, pa.clone());
    r.profile("B|A", b, n, pb.clone());
    r.profile("A+B", a, 2 * n, pj.clone());
    r.values.insert("dim_A".into(), pa.dim_proxy);
    r.values.insert("dim_B_given_A".into(), pb.dim_proxy);
    r.values.insert("dim_interleave".into(), pj.dim_proxy);
    Ok(PairData {
        eff,
        a: pa,
        b_given_a: pb,
        joined: pj,
    })
}

/// Measured form of: `A` normal and `B` normal relative to `A` iff `A ⊕ B`
/// is normal. The interleave is measured at block length `2l`.
pub fn verify_van_lambalgen(
    a: &Subject,
    b: &Subject,
    ell_max: usize,
    tol: f64,
    grid: &KGrid,
) -> Result<InequalityReport> {
    let mut r = InequalityReport::new("van_lambalgen");
    r.input("tol", tol);
    let p = pair_data(&mut r, a, b, ell_max, grid)?;
    let left = p.a.dim_proxy >= 1.0 - tol && p.b_given_a.dim_proxy >= 1.0 - tol;
    let right = p.joined.dim_proxy >= 1.0 - tol;
    r.lhs = p.joined.dim_proxy;
    r.rhs = 0.5 * (p.a.dim_proxy + p.b_given_a.dim_proxy);
    r.values.insert("parts_normal".into(), left as u8 as f64);
    r.values.insert("interleave_normal".into(), right as u8 as f64);
    r.checks.push(Check {
        name: "equivalence".into(),
        kind: CheckKind::Measurement,
        value: (left == right) as u8 as f64,
        relation: ">=".into(),
        bound: 1.0,
        passed: left == right,
    });
    let _ = p.eff;
    Ok(r.finish())
}

/// For a regular `A` (tail min and max within `tol`):
/// `dim(A ⊕ B) = (dim A + dim^A B) / 2` within `tol`. A non-regular `A`
/// makes the report inapplicable.
pub fn verify_regular_equation(
    a: &Subject,
    b: &Subject,
    ell_max: usize,
    tol: f64,
    grid: &KGrid,
) -> Result<InequalityReport> {
    let mut r = InequalityReport::new("regular");
    r.input("tol", tol);
    let p = pair_data(&mut r, a, b, ell_max, grid)?;
    let last = p.eff - 1;
    let spread = p.a.tail_max[last] - p.a.tail_min[last];
    r.values.insert("regularity_spread".into(), spread);
    r.lhs = p.joined.dim_proxy;
    r.rhs = 0.5 * (p.a.dim_proxy + p.b_given_a.dim_proxy);
    r.residuals.insert("equation".into(), (r.lhs - r.rhs).abs());
    if spread > tol {
        r.status = Status::Inapplicable;
        return Ok(r.finish());
    }
    r.checks.push(Check::at_most("equation", CheckKind::Measurement, (r.lhs - r.rhs).abs(), tol));
    Ok(r.finish())
}

/// Per-grid-point `I_l(x ; y)` two ways: `H_l(x) - H_l(x|y)`, and
/// `(H(u) + H(v) - H(u, v)) / (l log|S1|)` from block-pair counts.
fn mutual_series(x: &SymbolString, y: &SymbolString, ell: usize, ks: &[usize]) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut st = BlockStats::new(ell, x.alphabet(), Some(y.alphabet()))?;
    let (xr, yr) = (x.alphabet().size(), y.alphabet().size());
    let norm = x.alphabet().block_norm(ell);
    let (mut via_cond, mut via_joint) = (Vec::new(), Vec::new());
    let mut done = 0;
    for &k in ks {
        for blk in done..k {
            let r = blk * ell..(blk + 1) * ell;
            st.push_block(block_code(&x.symbols()[r.clone()], xr), block_code(&y.symbols()[r], yr));
        }
        done = k;
        via_cond.push(st.entropy_x() - st.cond_entropy());
        via_joint.push((st.input_bits() + st.oracle_bits() - st.joint_bits()) / norm);
    }
    Ok((via_cond, via_joint))
}

/// Mutual-information rates of `x` and `y`, the identity
/// `I_l = H_l(x) - H_l(x|y)` at every grid point, and the sandwiches
/// `dim X - Dim^Y X <= mdim <= dim X - dim^Y X` and
/// `Dim X - Dim^Y X <= Mdim <= Dim X - dim^Y X` on tail proxies. With
/// `tol`, also checks that the first sandwich closes to within `tol`.
pub fn verify_mutual_dim_sandwich(
    x: &Subject,
    y: &Subject,
    ell_max: usize,
    grid: &KGrid,
    tol: Option<f64>,
) -> Result<InequalityReport> {
    if x.data.len() != y.data.len() {
        return Err(Error::LengthMismatch {
            left: x.data.len(),
            right: y.data.len(),
        });
    }
    grid.validate()?;
    let mut r = InequalityReport::new("mutual");
    let n = x.data.len();
    let cols = 1 + (y.data.alphabet().size() as f64).log(x.data.alphabet().size() as f64).ceil() as usize;
    let eff = effective_ell_max(x.data.alphabet().size(), cols, ell_max)?;
    let ells: Vec<usize> = (1..=eff).collect();
    r.input("n", n);
    r.input("ell_max", ell_max);
    r.input("grid", serde_json::to_string(grid)?);
    if let Some(t) = tol {
        r.input("tol", t);
    }
    r.ell = eff;
    let hx = profile_with(&x.data, None, &ells, |l| l, grid, n)?;
    let hxy = profile_with(&x.data, Some(&y.data), &ells, |l| l, grid, n)?;
    let rows = ells
        .par_iter()
        .map(|&l| {
            let (ks, start) = grid.points(n, l);
            mutual_series(&x.data, &y.data, l, &ks).map(|(a, b)| (ks, start, a, b))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut residual = 0.0f64;
    let mut sandwich = f64::INFINITY;
    let mut i_rows = Vec::with_capacity(rows.len());
    for (row, (ks, start, via_cond, via_joint)) in rows.into_iter().enumerate() {
        for j in 0..ks.len() {
            let direct = hx.h[row][j] - hxy.h[row][j];
            residual = residual.max((direct - via_joint[j]).abs()).max((via_cond[j] - direct).abs());
        }
        let (mdim, mdim_strong) = tail_extrema(&via_cond, start);
        let (dx, sx) = (hx.tail_min[row], hx.tail_max[row]);
        let (dxy, sxy) = (hxy.tail_min[row], hxy.tail_max[row]);
        for gap in [mdim - (dx - sxy), (dx - dxy) - mdim, mdim_strong - (sx - sxy), (sx - dxy) - mdim_strong] {
            sandwich = sandwich.min(gap);
        }
        i_rows.push((ks, start, via_cond));
    }
    let ip = assemble(&ells, i_rows);
    r.residuals.insert("mutual_identity".into(), residual);
    r.checks.push(Check::at_most("mutual_identity", CheckKind::Identity, residual, IDENTITY_TOL));
    r.checks.push(Check::at_least("sandwich", CheckKind::Identity, sandwich, -ARRAY_TOL));
    let last = eff - 1;
    let lower = hx.tail_min[last] - hxy.tail_max[last];
    let upper = hx.tail_min[last] - hxy.tail_min[last];
    r.lhs = ip.dim_proxy;
    r.rhs = upper;
    r.values.insert("mdim".into(), ip.dim_proxy);
    r.values.insert("Mdim".into(), ip.strong_dim_proxy);
    r.values.insert("sandwich_lower".into(), lower);
    r.values.insert("sandwich_upper".into(), upper);
    if let Some(t) = tol {
        r.checks.push(Check::at_most("sandwich_width", CheckKind::Measurement, upper - lower, t));
    }
    r.profile("X", x, n, hx);
    r.profile("X|Y", x, n, hxy);
    r.profile("I", x, n, ip);
    Ok(r.finish())
}

/// Brute-force residuals of the exact finite identities on random inputs:
/// chain rule, interleave/product equality, the mutual-information
/// identity, and `H_l(x|x) = 0`.
pub fn verify_identities_random(seed: u64, instances: usize, max_len: usize) -> Result<InequalityReport> {
    let mut r = InequalityReport::new("chainrule");
    r.input("seed", seed);
    r.input("instances", instances);
    r.input("max_len", max_len);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut chain, mut inter, mut mutual, mut selfc) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for _ in 0..instances {
        let d = rng.gen_range(1..=4usize);
        let ell = rng.gen_range(1..=3usize);
        let base = if rng.gen_bool(0.5) { 2 } else { 3 };
        let alphabet = Alphabet::digits(base)?;
        let k = rng.gen_range(1..=(max_len / ell).max(1));
        let n = k * ell;
        let parts: Vec<SymbolString> = (0..d)
            .map(|_| SequenceSource::random(alphabet.clone(), rng.gen()).prefix(n))
            .collect::<Result<_>>()?;
        let cr = chain_rule_decompose(&parts, ell)?;
        chain = chain.max(cr.residual() / d as f64);
        let (a, b) = interleave_product_entropy_equal(&parts, ell)?;
        inter = inter.max((a - b).abs());
        if d >= 2 {
            let (x, y) = (&parts[0], &parts[1]);
            let st = BlockStats::joint(x, y, ell)?;
            let via_joint =
                (st.input_bits() + st.oracle_bits() - st.joint_bits()) / alphabet.block_norm(ell);
            mutual = mutual.max((mutual_info_rate(x, y, ell)? - via_joint).abs());
        }
        selfc = selfc.max(cond_block_entropy(&parts[0], &parts[0], ell)?);
    }
    for (name, v, tol) in [
        ("chain_rule", chain, IDENTITY_TOL),
        ("interleave_product", inter, ARRAY_TOL),
        ("mutual_identity", mutual, IDENTITY_TOL),
        ("self_conditional", selfc, 0.0),
    ] {
        r.residuals.insert(name.into(), v);
        r.checks.push(Check::at_most(name, CheckKind::Identity, v, tol));
    }
    r.lhs = chain;
    r.rhs = IDENTITY_TOL;
    Ok(r.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ops::{champernowne, doubled};

    fn subj(src: &SequenceSource, n: usize) -> Subject {
        Subject::from_source(src, n).unwrap()
    }

    #[test]
    fn status_codes() {
        assert_eq!(Status::Pass.exit_code(), 0);
        assert_eq!(Status::Inapplicable.exit_code(), 0);
        assert_eq!(Status::MeasuredFail.exit_code(), 2);
        assert_eq!(Status::IdentityFail.exit_code(), 3);
    }

    #[test]
    fn effective_ell_shrinks_with_columns() {
        assert_eq!(effective_ell_max(2, 2, 4).unwrap(), 4);
        assert_eq!(effective_ell_max(2, 6, 4).unwrap(), 3);
        assert_eq!(effective_ell_max(10, 3, 4).unwrap(), 2);
    }

    #[test]
    fn ap_lower_duplicate_parts_have_zero_conditional_terms() {
        let x = doubled(&champernowne(&Alphabet::binary()));
        let r = verify_ap_lower(&subj(&x, 1 << 14), 2, &[0, 1], 2, &KGrid::default()).unwrap();
        assert_eq!(r.status, Status::Pass);
        assert!(r.profiles["A1|A0"].h.iter().flatten().all(|&h| h == 0.0));
    }

    #[test]
    fn ap_upper_degenerates_for_d1() {
        let x = champernowne(&Alphabet::binary());
        let r = verify_ap_upper(&subj(&x, 1 << 12), 1, &[0], None, 4, &KGrid::default()).unwrap();
        assert_eq!(r.status, Status::Pass);
        assert!((r.lhs - r.rhs).abs() < 1e-12);
    }

    #[test]
    fn bad_inputs() {
        let x = champernowne(&Alphabet::binary());
        assert!(verify_ap_lower(&subj(&x, 5), 2, &[0, 1], 4, &KGrid::default()).is_err());
        assert!(verify_ap_lower(&subj(&x, 1024), 2, &[1, 1], 2, &KGrid::default()).is_err());
        assert!(verify_ap_upper(&subj(&x, 1024), 2, &[0, 1], Some(2), 2, &KGrid::default()).is_err());
    }

    #[test]
    fn random_identities_hold() {
        let r = verify_identities_random(7, 20, 512).unwrap();
        assert_eq!(r.status, Status::Pass, "{:?}", r.residuals);
    }

    #[test]
    fn mutual_self_is_entropy() {
        let x = champernowne(&Alphabet::binary());
        let s = subj(&x, 1 << 12);
        let r = verify_mutual_dim_sandwich(&s, &s, 3, &KGrid::default(), None).unwrap();
        assert_eq!(r.status, Status::Pass);
        assert_eq!(r.profiles["I"].h, r.profiles["X"].h);
    }
}
