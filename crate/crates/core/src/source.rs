//! Deterministic, restartable generators of unbounded symbol streams.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::alphabet::{Alphabet, Symbol};
use crate::error::{Error, Result};
use crate::string::SymbolString;

/// Description of an unbounded stream. Symbols are alphabet indices.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Generator {
    /// `s s s ...`
    Constant { symbol: Symbol },
    /// `pattern pattern pattern ...`
    Periodic { pattern: Vec<Symbol> },
    /// Base-`|alphabet|` numerals of 1, 2, 3, ... concatenated, most
    /// significant digit first. Symbol index `i` stands for digit `i`.
    Champernowne,
    /// Uniform i.i.d. symbols from a ChaCha8 stream; test harnesses only.
    Random { seed: u64 },
    /// `X[0] X[0] X[1] X[1] ...`
    Doubled { of: Box<Generator> },
    /// Slot 0: `z X[0] z X[1] ...`; slot 1: `X[0] z X[1] z ...`, where `z`
    /// is the symbol index of `'0'`.
    Diluted { of: Box<Generator>, slot: u8, zero: Symbol },
    /// Position `i` reads `parts[i mod d]` at `floor(i / d)`.
    Interleave { parts: Vec<Generator> },
    /// `S[i] S[i+d] S[i+2d] ...`
    ApExtract { of: Box<Generator>, d: usize, i: usize },
    /// Drops the first `offset` symbols.
    Skip { of: Box<Generator>, offset: usize },
}

/// A generator bound to its alphabet.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SequenceSource {
    alphabet: Alphabet,
    generator: Generator,
}

/// Single-owner position in a stream.
pub struct Cursor {
    inner: Box<dyn Iterator<Item = Symbol> + Send>,
}

impl Iterator for Cursor {
    type Item = Symbol;

    fn next(&mut self) -> Option<Symbol> {
        self.inner.next()
    }
}

impl SequenceSource {
    pub fn new(alphabet: Alphabet, generator: Generator) -> Result<Self> {
        validate(&alphabet, &generator)?;
        Ok(Self {
            alphabet,
            generator,
        })
    }

    pub fn constant(alphabet: Alphabet, symbol: char) -> Result<Self> {
        let symbol = alphabet.index_of(symbol)?;
        Self::new(alphabet, Generator::Constant { symbol })
    }

    pub fn periodic(alphabet: Alphabet, pattern: &str) -> Result<Self> {
        let pattern = SymbolString::parse(pattern, &alphabet)?.into_symbols();
        Self::new(alphabet, Generator::Periodic { pattern })
    }

    pub fn random(alphabet: Alphabet, seed: u64) -> Self {
        Self {
            alphabet,
            generator: Generator::Random { seed },
        }
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn generator(&self) -> &Generator {
        &self.generator
    }

    /// A fresh cursor at position 0.
    pub fn cursor(&self) -> Cursor {
        Cursor {
            inner: open(&self.generator, self.alphabet.size()),
        }
    }

    /// `X[:n]`.
    pub fn prefix(&self, n: usize) -> Result<SymbolString> {
        let mut data = Vec::new();
        data.try_reserve_exact(n)
            .map_err(|e| Error::ResourceExhausted(format!("prefix of {n} symbols: {e}")))?;
        data.extend(self.cursor().take(n));
        debug_assert_eq!(data.len(), n);
        Ok(SymbolString::from_raw(self.alphabet.clone(), data))
    }

    pub(crate) fn wrap(&self, generator: Generator) -> Self {
        Self {
            alphabet: self.alphabet.clone(),
            generator,
        }
    }
}

fn validate(alphabet: &Alphabet, g: &Generator) -> Result<()> {
    let size = alphabet.size();
    let check = |s: Symbol| {
        if (s as usize) < size {
            Ok(())
        } else {
            Err(Error::SymbolOutOfRange {
                index: s as usize,
                size,
            })
        }
    };
    match g {
        Generator::Constant { symbol } => check(*symbol),
        Generator::Periodic { pattern } => {
            if pattern.is_empty() {
                return Err(Error::InvalidArgument("empty periodic pattern".into()));
            }
            pattern.iter().try_for_each(|&s| check(s))
        }
        Generator::Champernowne | Generator::Random { .. } => Ok(()),
        Generator::Doubled { of } | Generator::Skip { of, .. } => validate(alphabet, of),
        Generator::Diluted { of, slot, zero } => {
            if *slot > 1 {
                return Err(Error::InvalidArgument(format!("slot must be 0 or 1, got {slot}")));
            }
            check(*zero)?;
            validate(alphabet, of)
        }
        Generator::Interleave { parts } => {
            if parts.is_empty() {
                return Err(Error::InvalidArgument("interleave of zero parts".into()));
            }
            parts.iter().try_for_each(|p| validate(alphabet, p))
        }
        Generator::ApExtract { of, d, i } => {
            if *d == 0 || i >= d {
                return Err(Error::InvalidArgument(format!(
                    "A.P. residue {i} invalid for difference {d}"
                )));
            }
            validate(alphabet, of)
        }
    }
}

fn open(g: &Generator, radix: usize) -> Box<dyn Iterator<Item = Symbol> + Send> {
    match g {
        Generator::Constant { symbol } => Box::new(std::iter::repeat(*symbol)),
        Generator::Periodic { pattern } => Box::new(pattern.clone().into_iter().cycle()),
        Generator::Champernowne => Box::new(Champernowne::new(radix)),
        Generator::Random { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            Box::new(std::iter::repeat_with(move || rng.gen_range(0..radix) as Symbol))
        }
        Generator::Doubled { of } => Box::new(open(of, radix).flat_map(|s| [s, s])),
        Generator::Diluted { of, slot, zero } => {
            let (z, slot) = (*zero, *slot);
            Box::new(open(of, radix).flat_map(move |s| if slot == 0 { [z, s] } else { [s, z] }))
        }
        Generator::Interleave { parts } => {
            let mut cursors: Vec<_> = parts.iter().map(|p| open(p, radix)).collect();
            let d = cursors.len();
            let mut i = 0usize;
            Box::new(std::iter::from_fn(move || {
                let s = cursors[i % d].next();
                i += 1;
                s
            }))
        }
        Generator::ApExtract { of, d, i } => Box::new(open(of, radix).skip(*i).step_by(*d)),
        Generator::Skip { of, offset } => Box::new(open(of, radix).skip(*offset)),
    }
}

struct Champernowne {
    radix: u64,
    next_number: u64,
    digits: Vec<Symbol>,
    pos: usize,
}

impl Champernowne {
    fn new(radix: usize) -> Self {
        Self {
            radix: radix as u64,
            next_number: 1,
            digits: Vec::with_capacity(64),
            pos: 0,
        }
    }

    fn refill(&mut self) {
        self.digits.clear();
        let mut n = self.next_number;
        while n > 0 {
            self.digits.push((n % self.radix) as Symbol);
            n /= self.radix;
        }
        self.digits.reverse();
        self.next_number += 1;
        self.pos = 0;
    }
}

impl Iterator for Champernowne {
    type Item = Symbol;

    fn next(&mut self) -> Option<Symbol> {
        if self.pos == self.digits.len() {
            self.refill();
        }
        let s = self.digits[self.pos];
        self.pos += 1;
        Some(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_prefix() {
        let s = SequenceSource::constant(Alphabet::binary(), '0').unwrap();
        assert_eq!(s.prefix(4).unwrap().to_text().unwrap(), "0000");
        assert!(s.prefix(0).unwrap().is_empty());
    }

    #[test]
    fn champernowne_small_prefixes() {
        let b2 = SequenceSource::new(Alphabet::binary(), Generator::Champernowne).unwrap();
        // "1" "10" "11" "100" "101"
        assert_eq!(b2.prefix(10).unwrap().to_text().unwrap(), "1101110010");
        let b10 =
            SequenceSource::new(Alphabet::digits(10).unwrap(), Generator::Champernowne).unwrap();
        assert_eq!(b10.prefix(15).unwrap().to_text().unwrap(), "123456789101112");
    }

    #[test]
    fn cursors_are_independent() {
        let s = SequenceSource::random(Alphabet::binary(), 3);
        let mut a = s.cursor();
        let _ = a.nth(100);
        assert_eq!(s.prefix(50).unwrap(), s.prefix(50).unwrap());
    }

    #[test]
    fn invalid_descriptors() {
        let g = Generator::ApExtract {
            of: Box::new(Generator::Champernowne),
            d: 2,
            i: 2,
        };
        assert!(SequenceSource::new(Alphabet::binary(), g).is_err());
        assert!(SequenceSource::new(Alphabet::binary(), Generator::Constant { symbol: 2 }).is_err());
    }
}
