//! Text and JSON serialization of Hamiltonians, channels and spectra.
//!
//! The text format is line-oriented "PAULI_LABEL value" (e.g. "XIZ 0.25");
//! parsers reject non-finite values and duplicate labels. Writers emit terms
//! in label order so files are deterministic.

use crate::channel::PauliChannel;
use crate::error::{Error, Result};
use crate::hamiltonian::Hamiltonian;
use crate::pauli::PauliString;
use std::collections::BTreeMap;

pub fn hamiltonian_to_text(h: &Hamiltonian) -> String {
    let mut out = String::new();
    for (x, c) in h.terms() {
        out.push_str(&format!("{x} {c}\n"));
    }
    out
}

fn parse_lines(text: &str) -> Result<(u32, Vec<(PauliString, f64)>)> {
    let mut n: Option<u32> = None;
    let mut seen = std::collections::HashSet::new();
    let mut terms = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split_whitespace();
        let label = parts
            .next()
            .ok_or_else(|| Error::Parse(format!("line {}: missing label", lineno + 1)))?;
        let value = parts
            .next()
            .ok_or_else(|| Error::Parse(format!("line {}: missing value", lineno + 1)))?;
        if parts.next().is_some() {
            return Err(Error::Parse(format!(
                "line {}: expected 'LABEL value'",
                lineno + 1
            )));
        }
        let x: PauliString = label.parse()?;
        match n {
            None => n = Some(x.n()),
            Some(nn) if nn != x.n() => {
                return Err(Error::Parse(format!(
                    "line {}: label length {} differs from {}",
                    lineno + 1,
                    x.n(),
                    nn
                )))
            }
            _ => {}
        }
        if !seen.insert(x) {
            return Err(Error::Parse(format!(
                "line {}: duplicate label {label}",
                lineno + 1
            )));
        }
        let v: f64 = value
            .parse()
            .map_err(|e| Error::Parse(format!("line {}: bad value '{value}': {e}", lineno + 1)))?;
        if !v.is_finite() {
            return Err(Error::Parse(format!(
                "line {}: non-finite value {value}",
                lineno + 1
            )));
        }
        terms.push((x, v));
    }
    let n = n.ok_or_else(|| Error::Parse("no terms in file".into()))?;
    Ok((n, terms))
}

pub fn hamiltonian_from_text(text: &str) -> Result<Hamiltonian> {
    let (n, terms) = parse_lines(text)?;
    Hamiltonian::from_terms(n, terms)
}

#[derive(serde::Serialize, serde::Deserialize)]
struct HamiltonianJson {
    n: u32,
    terms: BTreeMap<String, f64>,
}

pub fn hamiltonian_to_json(h: &Hamiltonian) -> String {
    let doc = HamiltonianJson {
        n: h.n(),
        terms: h.terms().map(|(x, c)| (x.to_string(), c)).collect(),
    };
    serde_json::to_string_pretty(&doc).expect("serializable")
}

pub fn hamiltonian_from_json(text: &str) -> Result<Hamiltonian> {
    let doc: HamiltonianJson =
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("bad JSON: {e}")))?;
    let mut terms = Vec::with_capacity(doc.terms.len());
    for (label, v) in doc.terms {
        let x: PauliString = label.parse()?;
        if x.n() != doc.n {
            return Err(Error::Parse(format!(
                "label {label} has length {} but n = {}",
                x.n(),
                doc.n
            )));
        }
        if !v.is_finite() {
            return Err(Error::Parse(format!("non-finite coefficient for {label}")));
        }
        terms.push((x, v));
    }
    Hamiltonian::from_terms(doc.n, terms)
}

pub fn channel_to_text(ch: &PauliChannel) -> String {
    let mut out = String::new();
    for (x, p) in ch.rates() {
        out.push_str(&format!("{x} {p}\n"));
    }
    out
}

/// Load a channel, enforcing the simplex within 1e-6 and renormalizing.
/// The flag reports whether renormalization changed anything beyond 1e-12.
pub fn channel_from_text(text: &str) -> Result<(PauliChannel, bool)> {
    let (n, terms) = parse_lines(text)?;
    let mut total = 0.0;
    for (x, p) in &terms {
        if *p < 0.0 {
            return Err(Error::Parse(format!("negative rate {p} at {x}")));
        }
        total += p;
    }
    if (total - 1.0).abs() > 1e-6 {
        return Err(Error::Parse(format!(
            "error rates sum to {total}, outside the 1e-6 simplex tolerance"
        )));
    }
    let renormalized = (total - 1.0).abs() > 1e-12;
    let channel = PauliChannel::new(n, terms.into_iter().map(|(x, p)| (x, p / total)))?;
    Ok((channel, renormalized))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    #[test]
    fn hamiltonian_text_round_trip() {
        let h = Hamiltonian::from_terms(3, [(p("XIZ"), 0.25), (p("ZZI"), -0.5)]).unwrap();
        let text = hamiltonian_to_text(&h);
        let back = hamiltonian_from_text(&text).unwrap();
        assert_eq!(h, back);
    }

    #[test]
    fn hamiltonian_json_round_trip() {
        let h = Hamiltonian::from_terms(2, [(p("XZ"), 0.125)]).unwrap();
        let back = hamiltonian_from_json(&hamiltonian_to_json(&h)).unwrap();
        assert_eq!(h, back);
        // empty Hamiltonian survives the JSON route
        let z = Hamiltonian::zero(2);
        assert_eq!(hamiltonian_from_json(&hamiltonian_to_json(&z)).unwrap(), z);
    }

    #[test]
    fn parser_rejects_bad_input() {
        assert!(hamiltonian_from_text("XI 0.5\nXI 0.25\n").is_err()); // duplicate
        assert!(hamiltonian_from_text("XI nan\n").is_err());
        assert!(hamiltonian_from_text("XI 0.5\nXII 0.25\n").is_err()); // length
        assert!(hamiltonian_from_text("XQ 0.5\n").is_err());
        assert!(hamiltonian_from_text("").is_err());
        assert!(hamiltonian_from_text("XI 0.5 extra\n").is_err());
    }

    #[test]
    fn channel_simplex_enforcement() {
        let ok = "II 0.9\nXI 0.1\n";
        let (ch, renorm) = channel_from_text(ok).unwrap();
        assert!(!renorm);
        assert!((ch.rate(&p("II")) - 0.9).abs() < 1e-12);
        // slightly off: renormalized with flag
        let off = "II 0.9000002\nXI 0.1\n";
        let (ch, renorm) = channel_from_text(off).unwrap();
        assert!(renorm);
        let total: f64 = ch.rates().map(|(_, p)| p).sum();
        assert!((total - 1.0).abs() < 1e-12);
        // far off: rejected
        assert!(channel_from_text("II 0.5\n").is_err());
        assert!(channel_from_text("II 1.5\nXI -0.5\n").is_err());
    }
}
