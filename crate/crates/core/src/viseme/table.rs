use std::collections::HashMap;
use std::path::Path;

use crate::error::{Error, Result};

const DEFAULT_TABLE: &str = include_str!("../../data/visemes.txt");

pub const VISEME_CLASS_COUNT: usize = 20;
pub const SILENCE_MARKER: &str = "sil";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VisemeClass {
    pub id: u8,
    pub is_labial: bool,
    pub members: Vec<String>,
}

/// Phoneme-to-viseme grouping.
#[derive(Debug, Clone)]
pub struct VisemeTable {
    classes: Vec<VisemeClass>,
    index: HashMap<String, u8>,
    silence: u8,
}

impl VisemeTable {
    /// Parses the `<id> <labial> <members...>` line format.
    pub fn parse(text: &str, source: &str) -> Result<Self> {
        let mut slots: Vec<Option<VisemeClass>> = vec![None; VISEME_CLASS_COUNT];
        let mut index = HashMap::new();

        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let lineno = lineno + 1;
            let mut fields = line.split_whitespace();
            let id: u8 = fields
                .next()
                .and_then(|f| f.parse().ok())
                .ok_or_else(|| Error::parse(source, lineno, "expected a class id"))?;
            if id as usize >= VISEME_CLASS_COUNT {
                return Err(Error::parse(
                    source,
                    lineno,
                    format!("class id {id} outside 0..{VISEME_CLASS_COUNT}"),
                ));
            }
            let is_labial = match fields.next() {
                Some("0") => false,
                Some("1") => true,
                _ => return Err(Error::parse(source, lineno, "labial flag must be 0 or 1")),
            };
            let members: Vec<String> = fields.map(str::to_string).collect();
            if members.is_empty() {
                return Err(Error::parse(source, lineno, format!("class {id} has no members")));
            }
            for m in &members {
                if index.insert(m.clone(), id).is_some() {
                    return Err(Error::parse(
                        source,
                        lineno,
                        format!("phoneme `{m}` belongs to more than one class"),
                    ));
                }
            }
            if slots[id as usize].is_some() {
                return Err(Error::parse(source, lineno, format!("class {id} defined twice")));
            }
            slots[id as usize] = Some(VisemeClass {
                id,
                is_labial,
                members,
            });
        }

        let classes = slots
            .into_iter()
            .enumerate()
            .map(|(id, c)| {
                c.ok_or_else(|| {
                    Error::InvalidVisemeTable(format!("{source}: class {id} is missing"))
                })
            })
            .collect::<Result<Vec<_>>>()?;

        let silence = *index.get(SILENCE_MARKER).ok_or_else(|| {
            Error::InvalidVisemeTable(format!("{source}: no class contains `{SILENCE_MARKER}`"))
        })?;
        if !classes.iter().any(|c| c.is_labial) {
            return Err(Error::InvalidVisemeTable(format!(
                "{source}: no class is flagged labial"
            )));
        }
        for p in ["b", "p", "m"] {
            if let Some(&id) = index.get(p) {
                if !classes[id as usize].is_labial {
                    return Err(Error::InvalidVisemeTable(format!(
                        "{source}: `{p}` sits in non-labial class {id}"
                    )));
                }
            }
        }
        Ok(VisemeTable {
            classes,
            index,
            silence,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        VisemeTable::parse(&text, &path.display().to_string())
    }

    /// The owning class of `phoneme`.
    pub fn lookup(&self, phoneme: &str) -> Result<&VisemeClass> {
        self.index
            .get(phoneme)
            .map(|&id| &self.classes[id as usize])
            .ok_or_else(|| Error::UnknownPhoneme(phoneme.to_string()))
    }

    pub fn classes(&self) -> &[VisemeClass] {
        &self.classes
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn silence_class(&self) -> &VisemeClass {
        &self.classes[self.silence as usize]
    }

    pub fn is_labial(&self, id: u8) -> bool {
        self.classes[id as usize].is_labial
    }
}

impl Default for VisemeTable {
    fn default() -> Self {
        VisemeTable::parse(DEFAULT_TABLE, "default viseme table").expect("shipped table is valid")
    }
}

/// Free-function form of [`VisemeTable::lookup`].
pub fn map_phoneme_to_viseme<'t>(phoneme: &str, table: &'t VisemeTable) -> Result<&'t VisemeClass> {
    table.lookup(phoneme)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_table_shape() {
        let t = VisemeTable::default();
        assert_eq!(t.len(), 20);
        let mut seen = std::collections::HashSet::new();
        for c in t.classes() {
            for m in &c.members {
                assert!(seen.insert(m.clone()), "{m} listed twice");
            }
        }
    }

    #[test]
    fn bilabials_share_the_labial_class() {
        let t = VisemeTable::default();
        let b = t.lookup("b").unwrap();
        assert!(b.is_labial);
        assert_eq!(t.lookup("p").unwrap().id, b.id);
        assert_eq!(t.lookup("m").unwrap().id, b.id);
    }

    #[test]
    fn silence_and_vowel_classes() {
        let t = VisemeTable::default();
        assert_eq!(t.lookup(SILENCE_MARKER).unwrap().id, t.silence_class().id);
        assert_ne!(t.lookup("a").unwrap().id, t.lookup("b").unwrap().id);
    }

    #[test]
    fn unknown_phoneme_names_symbol() {
        let err = VisemeTable::default().lookup("ʘ").unwrap_err();
        assert!(err.to_string().contains("ʘ"));
    }

    #[test]
    fn rejects_duplicates_and_gaps() {
        let dup = DEFAULT_TABLE.replace("2   0   f v", "2   0   f v b");
        assert!(VisemeTable::parse(&dup, "t").is_err());
        let gap = DEFAULT_TABLE.replace("19  0   aɪ aʊ ɔɪ", "");
        assert!(VisemeTable::parse(&gap, "t").is_err());
        let bad_labial = DEFAULT_TABLE.replace("1   1   p b m", "1   0   p b m");
        assert!(VisemeTable::parse(&bad_labial, "t").is_err());
    }
}
