use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

const BUILTIN_TSV: &str = include_str!("../../assets/nfbl_classes.tsv");

/// `N<k>` identifier of a body-language class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ClassId(pub u16);

impl fmt::Display for ClassId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "N{}", self.0)
    }
}

impl FromStr for ClassId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.strip_prefix('N')
            .filter(|d| !d.is_empty() && d.bytes().all(|b| b.is_ascii_digit()))
            .and_then(|d| d.parse().ok())
            .map(ClassId)
            .ok_or_else(|| Error::UnknownClass(s.to_string()))
    }
}

impl Serialize for ClassId {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ClassId {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NfblCategory {
    SelfManipulation,
    ObjectManipulation,
    SelfProtection,
}

impl NfblCategory {
    pub fn as_str(&self) -> &'static str {
        match self {
            NfblCategory::SelfManipulation => "self-manipulation",
            NfblCategory::ObjectManipulation => "object-manipulation",
            NfblCategory::SelfProtection => "self-protection",
        }
    }
}

impl FromStr for NfblCategory {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "self-manipulation" => Ok(NfblCategory::SelfManipulation),
            "object-manipulation" => Ok(NfblCategory::ObjectManipulation),
            "self-protection" => Ok(NfblCategory::SelfProtection),
            other => Err(Error::invalid(format!("unknown NFBL category `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NfblClass {
    pub id: ClassId,
    pub name: String,
    pub category: NfblCategory,
}

/// Lookup table of known classes, ordered by id.
#[derive(Debug, Clone)]
pub struct NfblRegistry {
    classes: Vec<NfblClass>,
    index: HashMap<ClassId, usize>,
}

impl NfblRegistry {
    /// The 37-class taxonomy shipped in `assets/nfbl_classes.tsv`.
    pub fn builtin() -> Self {
        Self::from_tsv(BUILTIN_TSV).expect("bundled taxonomy is valid")
    }

    /// Parses `id<TAB>category<TAB>name` rows; `#` lines are comments.
    pub fn from_tsv(text: &str) -> Result<Self> {
        let mut classes = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim_end();
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let ctx = || format!("taxonomy line {}", i + 1);
            let mut cols = line.splitn(3, '\t');
            let (Some(id), Some(cat), Some(name)) = (cols.next(), cols.next(), cols.next()) else {
                return Err(Error::parse(ctx(), "expected three tab-separated columns"));
            };
            classes.push(NfblClass {
                id: id
                    .parse()
                    .map_err(|_| Error::parse(ctx(), format!("bad class id `{id}`")))?,
                category: cat.parse().map_err(|e: Error| Error::parse(ctx(), e.to_string()))?,
                name: name.trim().to_string(),
            });
        }
        Self::new(classes)
    }

    pub fn new(mut classes: Vec<NfblClass>) -> Result<Self> {
        classes.sort_by_key(|c| c.id);
        if let Some(w) = classes.windows(2).find(|w| w[0].id == w[1].id) {
            return Err(Error::invalid(format!("class {} listed twice", w[0].id)));
        }
        let index = classes.iter().enumerate().map(|(i, c)| (c.id, i)).collect();
        Ok(Self { classes, index })
    }

    pub fn get(&self, id: ClassId) -> Option<&NfblClass> {
        self.index.get(&id).map(|&i| &self.classes[i])
    }

    pub fn resolve(&self, id: ClassId) -> Result<&NfblClass> {
        self.get(id).ok_or_else(|| Error::UnknownClass(id.to_string()))
    }

    pub fn contains(&self, id: ClassId) -> bool {
        self.index.contains_key(&id)
    }

    pub fn classes(&self) -> &[NfblClass] {
        &self.classes
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }
}

impl Default for NfblRegistry {
    fn default() -> Self {
        Self::builtin()
    }
}
