//! Alphabets and the product-alphabet encoding used for tuple-valued
//! (multi-oracle) sequences.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Index of a symbol within its alphabet.
pub type Symbol = u16;

const MAX_ALPHABET: u64 = Symbol::MAX as u64 + 1;

/// A finite alphabet of size at least 2.
///
/// Plain alphabets carry printable characters and map them to indices
/// `0..size` in the order given. Product alphabets are the `d`-fold
/// cartesian power of a base alphabet; their symbols are tuples and have
/// no single-character form.
#[derive(Clone, PartialEq, Eq)]
pub struct Alphabet {
    repr: Arc<Repr>,
}

#[derive(PartialEq, Eq)]
enum Repr {
    Chars(Vec<char>),
    Product(ProductAlphabet),
}

impl Alphabet {
    /// Builds an alphabet from distinct printable characters.
    pub fn new(symbols: &str) -> Result<Self> {
        Self::from_chars(symbols.chars().collect())
    }

    pub fn from_chars(chars: Vec<char>) -> Result<Self> {
        if chars.len() < 2 {
            return Err(Error::AlphabetTooSmall(chars.len()));
        }
        if chars.len() as u64 > MAX_ALPHABET {
            return Err(Error::ProductTooLarge(chars.len() as u64));
        }
        for (i, c) in chars.iter().enumerate() {
            if chars[..i].contains(c) {
                return Err(Error::DuplicateSymbol(*c));
            }
        }
        Ok(Self {
            repr: Arc::new(Repr::Chars(chars)),
        })
    }

    /// `"01"`.
    pub fn binary() -> Self {
        Self::new("01").expect("binary alphabet")
    }

    /// Digits `0-9` then `a-z`, truncated to `base` symbols (2..=36).
    pub fn digits(base: usize) -> Result<Self> {
        if !(2..=36).contains(&base) {
            return Err(Error::InvalidArgument(format!(
                "base must be in 2..=36, got {base}"
            )));
        }
        Self::new(&"0123456789abcdefghijklmnopqrstuvwxyz"[..base])
    }

    pub fn size(&self) -> usize {
        match &*self.repr {
            Repr::Chars(c) => c.len(),
            Repr::Product(p) => p.size(),
        }
    }

    /// `log2(size)` split as `multiplier * log2(root size)`, where the root is
    /// the innermost plain alphabet. Block-entropy normalizations are built
    /// from the integer multiplier so that `H_{dl}` over `S` and `H_l` over
    /// `S^d` share bit-identical denominators.
    pub fn log2_size_parts(&self) -> (usize, f64) {
        match &*self.repr {
            Repr::Chars(c) => (1, (c.len() as f64).log2()),
            Repr::Product(p) => {
                let (m, base) = p.base.log2_size_parts();
                (m * p.arity, base)
            }
        }
    }

    /// The normalization `l * log2(size)` of an `l`-block entropy.
    pub fn block_norm(&self, ell: usize) -> f64 {
        let (mult, base) = self.log2_size_parts();
        (ell * mult) as f64 * base
    }

    pub fn index_of(&self, c: char) -> Result<Symbol> {
        match &*self.repr {
            Repr::Chars(chars) => chars
                .iter()
                .position(|&s| s == c)
                .map(|i| i as Symbol)
                .ok_or(Error::UnknownSymbol(c)),
            Repr::Product(_) => Err(Error::AlphabetMismatch(
                "product alphabets have no character symbols".into(),
            )),
        }
    }

    pub fn char_of(&self, index: Symbol) -> Result<char> {
        match &*self.repr {
            Repr::Chars(chars) => chars.get(index as usize).copied().ok_or(
                Error::SymbolOutOfRange {
                    index: index as usize,
                    size: chars.len(),
                },
            ),
            Repr::Product(_) => Err(Error::AlphabetMismatch(
                "product alphabets have no character symbols".into(),
            )),
        }
    }

    /// The characters of a plain alphabet, `None` for product alphabets.
    pub fn chars(&self) -> Option<&[char]> {
        match &*self.repr {
            Repr::Chars(c) => Some(c),
            Repr::Product(_) => None,
        }
    }

    pub fn as_product(&self) -> Option<&ProductAlphabet> {
        match &*self.repr {
            Repr::Chars(_) => None,
            Repr::Product(p) => Some(p),
        }
    }

    pub fn is_printable(&self) -> bool {
        self.chars().is_some()
    }
}

impl fmt::Debug for Alphabet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Alphabet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &*self.repr {
            Repr::Chars(c) => write!(f, "{}", c.iter().collect::<String>()),
            Repr::Product(p) => write!(f, "({})^{}", p.base, p.arity),
        }
    }
}

/// The `arity`-fold power of a base alphabet.
///
/// A tuple `(a_0, ..., a_{d-1})` is encoded big-endian:
/// `a_0 * b^{d-1} + ... + a_{d-1}`, so the first column is the most
/// significant digit.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ProductAlphabet {
    base: Alphabet,
    arity: usize,
}

impl ProductAlphabet {
    pub fn new(base: Alphabet, arity: usize) -> Result<Self> {
        if arity == 0 {
            return Err(Error::InvalidArgument("product arity must be >= 1".into()));
        }
        let size = (base.size() as u64)
            .checked_pow(arity as u32)
            .filter(|&s| s <= MAX_ALPHABET)
            .ok_or_else(|| {
                Error::ProductTooLarge((base.size() as u64).saturating_pow(arity as u32))
            })?;
        debug_assert!(size >= 2);
        Ok(Self { base, arity })
    }

    pub fn base(&self) -> &Alphabet {
        &self.base
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn size(&self) -> usize {
        self.base.size().pow(self.arity as u32)
    }

    pub fn encode(&self, tuple: &[Symbol]) -> Result<Symbol> {
        if tuple.len() != self.arity {
            return Err(Error::LengthMismatch {
                left: tuple.len(),
                right: self.arity,
            });
        }
        let b = self.base.size();
        let mut code = 0usize;
        for &s in tuple {
            if s as usize >= b {
                return Err(Error::SymbolOutOfRange {
                    index: s as usize,
                    size: b,
                });
            }
            code = code * b + s as usize;
        }
        Ok(code as Symbol)
    }

    pub fn decode(&self, code: Symbol) -> Vec<Symbol> {
        let b = self.base.size();
        let mut out = vec![0; self.arity];
        let mut c = code as usize;
        for slot in out.iter_mut().rev() {
            *slot = (c % b) as Symbol;
            c /= b;
        }
        out
    }

    /// Wraps this product as an [`Alphabet`].
    pub fn into_alphabet(self) -> Alphabet {
        Alphabet {
            repr: Arc::new(Repr::Product(self)),
        }
    }
}
