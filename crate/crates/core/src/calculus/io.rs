//! JSON sequence and germ files.
//!
//! ```json
//! {"n": 2, "order": 2, "convention": "period-1", "kind": "ell", "ell": [[[{"k":[1],"alpha":[1],"re":0.5,"im":0.0}]], ...]}
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::germ::GermChange;
use super::sequence::{EllSequence, SSequence};
use crate::error::{Error, Result};
use crate::torus::{LSection, SectionRecords};

pub const CONVENTION: &str = "period-1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SequenceKind {
    Ell,
    S,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SequenceFile {
    pub n: usize,
    pub order: usize,
    pub convention: String,
    pub kind: SequenceKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ell: Option<Vec<SectionRecords>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<Vec<SectionRecords>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GermFile {
    pub n: usize,
    pub order: usize,
    pub convention: String,
    pub phi: Vec<SectionRecords>,
}

/// Either kind of sequence, as read from a file.
#[derive(Clone, Debug, PartialEq)]
pub enum AnySequence {
    Ell(EllSequence<f64>),
    S(SSequence<f64>),
}

fn sections(n: usize, order: usize, recs: &[SectionRecords]) -> Result<Vec<LSection<f64>>> {
    if recs.len() != order {
        return Err(Error::Format(format!("order {order} but {} sections", recs.len())));
    }
    recs.iter().map(|r| LSection::from_records(n, r)).collect()
}

fn check_convention(c: &str) -> Result<()> {
    if c != CONVENTION {
        return Err(Error::Format(format!("unknown angle convention '{c}'")));
    }
    Ok(())
}

impl SequenceFile {
    pub fn from_ell(ell: &EllSequence<f64>) -> Self {
        SequenceFile {
            n: ell.n(),
            order: ell.order(),
            convention: CONVENTION.into(),
            kind: SequenceKind::Ell,
            ell: Some(ell.sections().iter().map(LSection::to_records).collect()),
            s: None,
        }
    }

    pub fn from_s(s: &SSequence<f64>) -> Self {
        SequenceFile {
            n: s.n(),
            order: s.order(),
            convention: CONVENTION.into(),
            kind: SequenceKind::S,
            ell: None,
            s: Some(s.sections().iter().map(LSection::to_records).collect()),
        }
    }

    /// Decodes the payload. An `ell` payload that is not fibrewise closed is
    /// accepted with its closedness flag cleared.
    pub fn decode(&self) -> Result<AnySequence> {
        check_convention(&self.convention)?;
        match (self.kind, &self.ell, &self.s) {
            (SequenceKind::Ell, Some(e), None) => Ok(AnySequence::Ell(EllSequence::new_unverified(sections(
                self.n, self.order, e,
            )?)?)),
            (SequenceKind::S, None, Some(s)) => Ok(AnySequence::S(SSequence::new(sections(self.n, self.order, s)?)?)),
            _ => Err(Error::Format("payload field does not match 'kind'".into())),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let f: SequenceFile = serde_json::from_str(s)?;
        check_convention(&f.convention)?;
        Ok(f)
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }
}

impl GermFile {
    pub fn from_germ(g: &GermChange<f64>) -> Self {
        GermFile {
            n: g.n(),
            order: g.order(),
            convention: CONVENTION.into(),
            phi: g.sections().iter().map(LSection::to_records).collect(),
        }
    }

    pub fn decode(&self) -> Result<GermChange<f64>> {
        check_convention(&self.convention)?;
        GermChange::new(sections(self.n, self.order, &self.phi)?)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let f: GermFile = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        check_convention(&f.convention)?;
        Ok(f)
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::torus::TorusFn;

    #[test]
    fn rejects_unknown_convention() {
        let json = r#"{"n":2,"order":1,"convention":"period-2pi","kind":"ell","ell":[[[]]]}"#;
        assert!(matches!(SequenceFile::from_json(json), Err(Error::Format(_))));
    }

    #[test]
    fn round_trip_is_byte_identical() {
        let a = TorusFn::cos_term(2, &[1], &[1], 0.1).unwrap();
        let ell = EllSequence::new(vec![LSection::single(2, a).unwrap()]).unwrap();
        let text = SequenceFile::from_ell(&ell).to_json().unwrap();
        let back = SequenceFile::from_json(&text).unwrap();
        let AnySequence::Ell(e) = back.decode().unwrap() else { panic!() };
        assert_eq!(e, ell);
        assert_eq!(SequenceFile::from_ell(&e).to_json().unwrap(), text);
    }
}
