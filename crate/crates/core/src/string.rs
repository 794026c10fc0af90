use std::fmt;

use crate::alphabet::{Alphabet, ProductAlphabet, Symbol};
use crate::error::{Error, Result};

/// A finite string over an [`Alphabet`], stored as symbol indices.
#[derive(Clone, PartialEq, Eq)]
pub struct SymbolString {
    alphabet: Alphabet,
    data: Vec<Symbol>,
}

impl SymbolString {
    pub fn new(alphabet: Alphabet, data: Vec<Symbol>) -> Result<Self> {
        let size = alphabet.size();
        if let Some(&bad) = data.iter().find(|&&s| s as usize >= size) {
            return Err(Error::SymbolOutOfRange {
                index: bad as usize,
                size,
            });
        }
        Ok(Self { alphabet, data })
    }

    /// Caller guarantees every index is in range.
    pub(crate) fn from_raw(alphabet: Alphabet, data: Vec<Symbol>) -> Self {
        debug_assert!(data.iter().all(|&s| (s as usize) < alphabet.size()));
        Self { alphabet, data }
    }

    pub fn empty(alphabet: Alphabet) -> Self {
        Self {
            alphabet,
            data: Vec::new(),
        }
    }

    /// Parses text; every character must belong to `alphabet`.
    pub fn parse(text: &str, alphabet: &Alphabet) -> Result<Self> {
        let data = text
            .chars()
            .map(|c| alphabet.index_of(c))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            alphabet: alphabet.clone(),
            data,
        })
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.data
    }

    pub fn into_symbols(self) -> Vec<Symbol> {
        self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn get(&self, i: usize) -> Option<Symbol> {
        self.data.get(i).copied()
    }

    /// `x[i:j]`: positions `i` through `j - 1`.
    pub fn slice(&self, i: usize, j: usize) -> Self {
        Self {
            alphabet: self.alphabet.clone(),
            data: self.data[i..j].to_vec(),
        }
    }

    /// `x[:n]`, clamped to the string length.
    pub fn prefix(&self, n: usize) -> Self {
        self.slice(0, n.min(self.len()))
    }

    pub fn push(&mut self, s: Symbol) {
        debug_assert!((s as usize) < self.alphabet.size());
        self.data.push(s);
    }

    pub fn extend_from(&mut self, other: &[Symbol]) {
        self.data.extend_from_slice(other);
    }

    /// Renders a plain-alphabet string back to text.
    pub fn to_text(&self) -> Result<String> {
        let chars = self.alphabet.chars().ok_or_else(|| {
            Error::AlphabetMismatch("product-alphabet strings have no text form".into())
        })?;
        Ok(self.data.iter().map(|&s| chars[s as usize]).collect())
    }

    /// Re-encodes this string as tuples over the product of its alphabet
    /// with itself (`arity` 1 gives the same symbols under a product alphabet).
    pub fn as_product_column(&self) -> Result<SymbolString> {
        encode_product(std::slice::from_ref(self))
    }
}

impl fmt::Debug for SymbolString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.to_text() {
            Ok(t) if t.len() <= 64 => write!(f, "{t:?}"),
            Ok(t) => write!(f, "{:?}... ({} symbols)", &t[..64], t.len()),
            Err(_) => write!(f, "{:?} over {}", self.data, self.alphabet),
        }
    }
}

/// Position-wise tupling of equal-length columns over a shared alphabet.
pub fn encode_product(columns: &[SymbolString]) -> Result<SymbolString> {
    let first = columns
        .first()
        .ok_or_else(|| Error::InvalidArgument("product of zero columns".into()))?;
    for c in &columns[1..] {
        if c.alphabet != first.alphabet {
            return Err(Error::AlphabetMismatch(format!(
                "{} vs {}",
                c.alphabet, first.alphabet
            )));
        }
        if c.len() != first.len() {
            return Err(Error::LengthMismatch {
                left: first.len(),
                right: c.len(),
            });
        }
    }
    let product = ProductAlphabet::new(first.alphabet.clone(), columns.len())?;
    let b = first.alphabet.size();
    let mut data = vec![0 as Symbol; first.len()];
    for col in columns {
        for (acc, &s) in data.iter_mut().zip(&col.data) {
            *acc = (*acc as usize * b + s as usize) as Symbol;
        }
    }
    Ok(SymbolString::from_raw(product.into_alphabet(), data))
}

/// Inverse of [`encode_product`].
pub fn decode_product(s: &SymbolString) -> Result<Vec<SymbolString>> {
    let p = s
        .alphabet
        .as_product()
        .ok_or_else(|| Error::AlphabetMismatch("not a product alphabet".into()))?;
    let mut cols = vec![Vec::with_capacity(s.len()); p.arity()];
    for &code in &s.data {
        for (col, v) in cols.iter_mut().zip(p.decode(code)) {
            col.push(v);
        }
    }
    Ok(cols
        .into_iter()
        .map(|d| SymbolString::from_raw(p.base().clone(), d))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bin(s: &str) -> SymbolString {
        SymbolString::parse(s, &Alphabet::binary()).unwrap()
    }

    #[test]
    fn slice_convention() {
        let x = bin("011010");
        assert_eq!(x.slice(1, 4).to_text().unwrap(), "110");
        assert_eq!(x.prefix(2).to_text().unwrap(), "01");
        assert_eq!(x.prefix(100).len(), 6);
    }

    #[test]
    fn product_of_two_columns() {
        let p = encode_product(&[bin("00"), bin("11")]).unwrap();
        assert_eq!(p.len(), 2);
        let pa = p.alphabet().as_product().unwrap();
        assert_eq!(pa.decode(p.get(0).unwrap()), vec![0, 1]);
        assert_eq!(pa.decode(p.get(1).unwrap()), vec![0, 1]);
    }

    #[test]
    fn product_arity_one_and_three() {
        let p = encode_product(&[bin("010")]).unwrap();
        assert_eq!(p.symbols(), &[0, 1, 0]);
        assert_eq!(p.alphabet().size(), 2);
        let t = encode_product(&[bin("01"), bin("01"), bin("01")]).unwrap();
        let pa = t.alphabet().as_product().unwrap();
        assert_eq!(pa.decode(t.get(0).unwrap()), vec![0, 0, 0]);
        assert_eq!(pa.decode(t.get(1).unwrap()), vec![1, 1, 1]);
    }

    #[test]
    fn product_mismatch_errors() {
        assert!(matches!(
            encode_product(&[bin("00"), bin("1")]),
            Err(Error::LengthMismatch { .. })
        ));
        let dec = SymbolString::parse("00", &Alphabet::digits(10).unwrap()).unwrap();
        assert!(matches!(
            encode_product(&[bin("00"), dec]),
            Err(Error::AlphabetMismatch(_))
        ));
    }

    #[test]
    fn parse_rejects_foreign_symbol() {
        assert!(matches!(
            SymbolString::parse("012", &Alphabet::binary()),
            Err(Error::UnknownSymbol('2'))
        ));
    }
}
