//! Text sequence files and their alphabet sidecars.
//!
//! A sequence file holds one character per symbol; a single trailing
//! newline is ignored. The alphabet travels separately, either on the
//! command line or in a sidecar `<file>.json` of the form
//! `{"alphabet":"01"}`.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::alphabet::Alphabet;
use crate::error::{Error, Result};
use crate::string::SymbolString;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sidecar {
    pub alphabet: String,
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

/// Parses file contents, dropping one trailing `\n` or `\r\n`.
pub fn parse_sequence_text(text: &str, alphabet: &Alphabet) -> Result<SymbolString> {
    let body = text
        .strip_suffix("\r\n")
        .or_else(|| text.strip_suffix('\n'))
        .unwrap_or(text);
    SymbolString::parse(body, alphabet)
}

pub fn read_sidecar(path: &Path) -> Result<Alphabet> {
    let sc: Sidecar = serde_json::from_str(&fs::read_to_string(sidecar_path(path))?)?;
    Alphabet::new(&sc.alphabet)
}

/// Reads a sequence file. Without an explicit alphabet, the sidecar must
/// exist.
pub fn read_sequence(path: &Path, alphabet: Option<&Alphabet>) -> Result<SymbolString> {
    let alphabet = match alphabet {
        Some(a) => a.clone(),
        None => read_sidecar(path).map_err(|e| match e {
            Error::Io(io) if io.kind() == std::io::ErrorKind::NotFound => Error::InvalidArgument(format!(
                "no alphabet given and no sidecar at {}",
                sidecar_path(path).display()
            )),
            e => e,
        })?,
    };
    parse_sequence_text(&fs::read_to_string(path)?, &alphabet)
}

/// Writes `s` followed by a newline, plus its sidecar.
pub fn write_sequence(path: &Path, s: &SymbolString) -> Result<()> {
    let chars = s
        .alphabet()
        .chars()
        .ok_or_else(|| Error::InvalidArgument("product alphabets have no text form".into()))?;
    let sc = Sidecar {
        alphabet: chars.iter().collect(),
    };
    let mut text = s.to_text()?;
    text.push('\n');
    fs::write(path, text)?;
    fs::write(sidecar_path(path), serde_json::to_string(&sc)? + "\n")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trailing_newline_is_optional() {
        let a = Alphabet::binary();
        for text in ["0110", "0110\n", "0110\r\n"] {
            assert_eq!(parse_sequence_text(text, &a).unwrap().to_text().unwrap(), "0110");
        }
        assert!(parse_sequence_text("0110\n\n", &a).is_err());
        assert!(parse_sequence_text("0120", &a).is_err());
    }

    #[test]
    fn sidecar_naming() {
        assert_eq!(sidecar_path(Path::new("dir/x.txt")), PathBuf::from("dir/x.txt.json"));
    }
}
