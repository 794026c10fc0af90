//! Sequence transforms: interleaving, arithmetic-progression extraction,
//! and the classical normal / diluted / doubled constructions.

use crate::alphabet::Alphabet;
use crate::error::{Error, Result};
use crate::source::{Generator, SequenceSource};
use crate::string::SymbolString;

/// Extraction of the A.P. subsequence `S[i] S[i+d] S[i+2d] ...`.
pub trait ApExtract: Sized {
    fn ap_extract(&self, d: usize, i: usize) -> Result<Self>;

    /// All `d` residues in order.
    fn ap_split(&self, d: usize) -> Result<Vec<Self>> {
        (0..d).map(|i| self.ap_extract(d, i)).collect()
    }
}

fn check_residue(d: usize, i: usize) -> Result<()> {
    if d == 0 {
        return Err(Error::InvalidArgument("common difference must be >= 1".into()));
    }
    if i >= d {
        return Err(Error::InvalidArgument(format!(
            "residue {i} must be below the common difference {d}"
        )));
    }
    Ok(())
}

impl ApExtract for SymbolString {
    /// Output length is `ceil((n - i) / d)`, or 0 when `i >= n`.
    fn ap_extract(&self, d: usize, i: usize) -> Result<Self> {
        check_residue(d, i)?;
        let data = self.symbols().iter().skip(i).step_by(d).copied().collect();
        Ok(SymbolString::from_raw(self.alphabet().clone(), data))
    }
}

impl ApExtract for SequenceSource {
    fn ap_extract(&self, d: usize, i: usize) -> Result<Self> {
        check_residue(d, i)?;
        Ok(self.wrap(Generator::ApExtract {
            of: Box::new(self.generator().clone()),
            d,
            i,
        }))
    }
}

fn shared_alphabet<'a>(mut alphabets: impl Iterator<Item = &'a Alphabet>) -> Result<Alphabet> {
    let first = alphabets
        .next()
        .ok_or_else(|| Error::InvalidArgument("need at least one part".into()))?
        .clone();
    for a in alphabets {
        if *a != first {
            return Err(Error::AlphabetMismatch(format!("{a} vs {first}")));
        }
    }
    Ok(first)
}

/// `parts[0] ⊕ parts[1] ⊕ ... ⊕ parts[d-1]`.
pub fn interleave(parts: &[SequenceSource]) -> Result<SequenceSource> {
    let alphabet = shared_alphabet(parts.iter().map(|p| p.alphabet()))?;
    SequenceSource::new(
        alphabet,
        Generator::Interleave {
            parts: parts.iter().map(|p| p.generator().clone()).collect(),
        },
    )
}

/// Finite interleave of equal-length strings; the result has length `d * n`.
pub fn interleave_strings(parts: &[SymbolString]) -> Result<SymbolString> {
    let alphabet = shared_alphabet(parts.iter().map(|p| p.alphabet()))?;
    let n = parts[0].len();
    if let Some(p) = parts.iter().find(|p| p.len() != n) {
        return Err(Error::LengthMismatch {
            left: n,
            right: p.len(),
        });
    }
    let mut data = Vec::with_capacity(n * parts.len());
    for j in 0..n {
        data.extend(parts.iter().map(|p| p.symbols()[j]));
    }
    Ok(SymbolString::from_raw(alphabet, data))
}

/// Concatenated base-`|base|` numerals of 1, 2, 3, ...
pub fn champernowne(base: &Alphabet) -> SequenceSource {
    SequenceSource::new(base.clone(), Generator::Champernowne).expect("always valid")
}

/// `X[0] X[0] X[1] X[1] ...`
pub fn doubled(src: &SequenceSource) -> SequenceSource {
    src.wrap(Generator::Doubled {
        of: Box::new(src.generator().clone()),
    })
}

/// Slot 0 gives `0 Y[0] 0 Y[1] ...`, slot 1 gives `Y[0] 0 Y[1] 0 ...`.
pub fn diluted(src: &SequenceSource, slot: u8) -> Result<SequenceSource> {
    let zero = src.alphabet().index_of('0').map_err(|_| {
        Error::AlphabetMismatch(format!("alphabet {} has no '0' to dilute with", src.alphabet()))
    })?;
    SequenceSource::new(
        src.alphabet().clone(),
        Generator::Diluted {
            of: Box::new(src.generator().clone()),
            slot,
            zero,
        },
    )
}

/// Drops the first `offset` symbols of `src`.
pub fn skip(src: &SequenceSource, offset: usize) -> SequenceSource {
    src.wrap(Generator::Skip {
        of: Box::new(src.generator().clone()),
        offset,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn text(s: &SequenceSource, n: usize) -> String {
        s.prefix(n).unwrap().to_text().unwrap()
    }

    #[test]
    fn interleave_two_constants() {
        let b = Alphabet::binary();
        let z = SequenceSource::constant(b.clone(), '0').unwrap();
        let o = SequenceSource::constant(b, '1').unwrap();
        assert_eq!(text(&interleave(&[z.clone(), o]).unwrap(), 6), "010101");
        assert_eq!(text(&interleave(std::slice::from_ref(&z)).unwrap(), 3), "000");
    }

    #[test]
    fn interleave_three_periodic() {
        let a = Alphabet::new("abcdef").unwrap();
        let parts = ["ab", "cd", "ef"].map(|p| SequenceSource::periodic(a.clone(), p).unwrap());
        assert_eq!(text(&interleave(&parts).unwrap(), 6), "acebdf");
    }

    #[test]
    fn ap_extract_strings() {
        let a = Alphabet::new("abcdef").unwrap();
        let s = SymbolString::parse("abcdef", &a).unwrap();
        assert_eq!(s.ap_extract(2, 0).unwrap().to_text().unwrap(), "ace");
        assert_eq!(s.ap_extract(2, 1).unwrap().to_text().unwrap(), "bdf");
        assert_eq!(s.ap_extract(4, 3).unwrap().to_text().unwrap(), "d");
        assert!(s.ap_extract(2, 2).is_err());
        let short = SymbolString::parse("ab", &a).unwrap();
        assert!(short.ap_extract(5, 4).unwrap().is_empty());
    }

    #[test]
    fn ap_extract_inverts_interleave() {
        let b = Alphabet::binary();
        let a = champernowne(&b);
        let c = SequenceSource::random(b, 9);
        let x = interleave(&[a.clone(), c]).unwrap();
        assert_eq!(x.ap_extract(2, 0).unwrap().prefix(40).unwrap(), a.prefix(40).unwrap());
    }

    #[test]
    fn champernowne_prefixes() {
        assert_eq!(text(&champernowne(&Alphabet::digits(10).unwrap()), 15), "123456789101112");
        assert_eq!(text(&champernowne(&Alphabet::binary()), 5), "11011");
        assert_eq!(text(&champernowne(&Alphabet::digits(7).unwrap()), 1), "1");
    }

    #[test]
    fn doubled_and_diluted() {
        let b = Alphabet::binary();
        let x = SequenceSource::periodic(b.clone(), "011").unwrap();
        assert_eq!(text(&doubled(&x), 6), "001111");
        let ones = SequenceSource::constant(b.clone(), '1').unwrap();
        assert_eq!(text(&diluted(&ones, 0).unwrap(), 6), "010101");
        assert_eq!(text(&diluted(&ones, 1).unwrap(), 6), "101010");
        let no_zero = SequenceSource::constant(Alphabet::new("ab").unwrap(), 'a').unwrap();
        assert!(matches!(diluted(&no_zero, 0), Err(Error::AlphabetMismatch(_))));
    }

    #[test]
    fn doubled_residues_reproduce_source() {
        let x = champernowne(&Alphabet::binary());
        let dx = doubled(&x);
        for i in 0..2 {
            assert_eq!(dx.ap_extract(2, i).unwrap().prefix(64).unwrap(), x.prefix(64).unwrap());
        }
        assert_eq!(
            interleave(&[x.clone(), x]).unwrap().prefix(100).unwrap(),
            dx.prefix(100).unwrap()
        );
    }
}
