//! Sequence descriptors accepted on the command line.
//!
//! ```text
//! champernowne | zeros | ones | constant:C | periodic:PATTERN | random:SEED
//! doubled:DESC | diluted0:DESC | diluted1:DESC | skip:N:DESC | ap:D:I:DESC
//! upper:STAGES | lower:STAGES | file:PATH
//! ```
//!
//! `upper` and `lower` are the finite oscillating constructions built over
//! Champernowne; `file` reads a sequence file.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use fsdim::ops::{champernowne, diluted, doubled, skip, ApExtract};
use fsdim::stages::{build_oscillating_lower, build_oscillating_upper, StageCaps, StageLog};
use fsdim::{io, Alphabet, SequenceSource, SymbolString};

pub fn alphabet(base: usize, chars: Option<&str>) -> Result<Alphabet> {
    Ok(match chars {
        Some(c) => Alphabet::new(c)?,
        None => Alphabet::digits(base)?,
    })
}

pub enum Resolved {
    Source(SequenceSource),
    Finite(SymbolString, Option<StageLog>),
}

impl Resolved {
    /// `n` symbols (all of a finite string when `n` is `None`).
    pub fn take(&self, n: Option<usize>) -> Result<SymbolString> {
        match (self, n) {
            (Resolved::Source(s), Some(n)) => Ok(s.prefix(n)?),
            (Resolved::Source(_), None) => bail!("-n is required for unbounded generators"),
            (Resolved::Finite(s, _), None) => Ok(s.clone()),
            (Resolved::Finite(s, _), Some(n)) if n <= s.len() => Ok(s.prefix(n)),
            (Resolved::Finite(s, _), Some(n)) => bail!("requested {n} symbols but only {} are available", s.len()),
        }
    }

    pub fn stage_log(&self) -> Option<&StageLog> {
        match self {
            Resolved::Finite(_, log) => log.as_ref(),
            Resolved::Source(_) => None,
        }
    }
}

fn source(desc: &str, a: &Alphabet) -> Result<SequenceSource> {
    match resolve(desc, a)? {
        Resolved::Source(s) => Ok(s),
        Resolved::Finite(..) => bail!("'{desc}' is finite and cannot be transformed"),
    }
}

pub fn resolve(desc: &str, a: &Alphabet) -> Result<Resolved> {
    let (head, rest) = desc.split_once(':').unwrap_or((desc, ""));
    let num = |s: &str| -> Result<usize> { s.parse().with_context(|| format!("bad number '{s}' in '{desc}'")) };
    let src = match head {
        "champernowne" => champernowne(a),
        "zeros" => SequenceSource::constant(a.clone(), a.char_of(0)?)?,
        "ones" => SequenceSource::constant(a.clone(), a.char_of(1)?)?,
        "constant" => {
            let mut c = rest.chars();
            let sym = c.next().ok_or_else(|| anyhow!("constant needs a symbol"))?;
            SequenceSource::constant(a.clone(), sym)?
        }
        "periodic" => SequenceSource::periodic(a.clone(), rest)?,
        "random" => SequenceSource::random(a.clone(), num(rest)? as u64),
        "doubled" => doubled(&source(rest, a)?),
        "diluted0" => diluted(&source(rest, a)?, 0)?,
        "diluted1" => diluted(&source(rest, a)?, 1)?,
        "skip" => {
            let (n, inner) = rest.split_once(':').ok_or_else(|| anyhow!("usage: skip:N:DESC"))?;
            skip(&source(inner, a)?, num(n)?)
        }
        "ap" => {
            let mut it = rest.splitn(3, ':');
            let (d, i, inner) = match (it.next(), it.next(), it.next()) {
                (Some(d), Some(i), Some(inner)) => (num(d)?, num(i)?, inner),
                _ => bail!("usage: ap:D:I:DESC"),
            };
            source(inner, a)?.ap_extract(d, i)?
        }
        "upper" | "lower" => {
            let stages = num(rest)?;
            let build = if head == "upper" {
                build_oscillating_upper
            } else {
                build_oscillating_lower
            };
            let (s, log) = build(&champernowne(a), stages, &StageCaps::default())?;
            return Ok(Resolved::Finite(s, Some(log)));
        }
        "file" => return Ok(Resolved::Finite(read(Path::new(rest), Some(a))?, None)),
        _ => bail!("unknown generator '{desc}'"),
    };
    Ok(Resolved::Source(src))
}

/// Reads a file; an explicit alphabet overrides the sidecar.
pub fn read(path: &Path, a: Option<&Alphabet>) -> Result<SymbolString> {
    io::read_sequence(path, a).with_context(|| format!("reading {}", path.display()))
}

/// A sequence given either as a file or as a descriptor; `default_n`
/// applies to unbounded generators when `n` is absent.
pub fn load(
    path: Option<&PathBuf>,
    desc: Option<&str>,
    a: &Alphabet,
    explicit_alphabet: bool,
    n: Option<usize>,
    default_n: Option<usize>,
) -> Result<(SymbolString, Option<StageLog>)> {
    match (path, desc) {
        (Some(p), None) => {
            let s = read(p, explicit_alphabet.then_some(a))?;
            match n {
                Some(n) if n > s.len() => bail!("{} has {} symbols, {n} requested", p.display(), s.len()),
                Some(n) => Ok((s.prefix(n), None)),
                None => Ok((s, None)),
            }
        }
        (None, Some(d)) => {
            let r = resolve(d, a)?;
            let n = match r {
                Resolved::Source(_) => n.or(default_n),
                Resolved::Finite(..) => n,
            };
            Ok((r.take(n)?, r.stage_log().cloned()))
        }
        (Some(_), Some(_)) => bail!("give either a file or a generator, not both"),
        (None, None) => bail!("no input sequence given"),
    }
}
