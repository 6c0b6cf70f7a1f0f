//! Entity catalog: cross-edition identity of universities plus their
//! country, language and foundation year.
//!
//! Catalog file (TOML), one `[[entity]]` table per university:
//!
//! ```toml
//! [[entity]]
//! id = "harvard_university"
//! name = "Harvard University"
//! country = "US"
//! founded = 1636
//! # language = "EN"   # optional, defaults to the country's language
//! [entity.titles]
//! EN = "Harvard University"
//! FR = "Université Harvard"
//! ```

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use serde::Deserialize;
use thiserror::Error;
use unicode_normalization::UnicodeNormalization;

/// One Wikipedia language edition: code, language, article count in the
/// February 2013 snapshot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Edition {
    pub code: &'static str,
    pub language: &'static str,
    pub articles: u64,
}

const fn ed(code: &'static str, language: &'static str, articles: u64) -> Edition {
    Edition {
        code,
        language,
        articles,
    }
}

pub const EDITIONS: [Edition; 24] = [
    ed("AR", "Arabic", 203_328),
    ed("DA", "Danish", 175_228),
    ed("DE", "German", 1_532_978),
    ed("EL", "Greek", 82_563),
    ed("EN", "English", 4_212_493),
    ed("ES", "Spanish", 974_025),
    ed("FA", "Persian", 295_696),
    ed("FR", "French", 1_352_825),
    ed("HE", "Hebrew", 144_959),
    ed("HI", "Hindi", 96_869),
    ed("HU", "Hungarian", 235_212),
    ed("IT", "Italian", 1_017_953),
    ed("JA", "Japanese", 852_087),
    ed("KO", "Korean", 231_959),
    ed("MS", "Malaysian", 180_886),
    ed("NL", "Dutch", 1_144_615),
    ed("PL", "Polish", 949_153),
    ed("PT", "Portuguese", 758_227),
    ed("RU", "Russian", 966_284),
    ed("SV", "Swedish", 780_872),
    ed("TH", "Thai", 78_953),
    ed("TR", "Turkish", 206_311),
    ed("VI", "Vietnamese", 594_089),
    ed("ZH", "Chinese", 663_485),
];

/// Culture code for every language outside the 24 editions.
pub const OTHER_LANGUAGES: &str = "WR";

pub fn edition(code: &str) -> Option<&'static Edition> {
    EDITIONS.iter().find(|e| e.code.eq_ignore_ascii_case(code))
}

pub fn is_edition_code(code: &str) -> bool {
    edition(code).is_some()
}

/// An edition code or `WR`.
pub fn is_culture_code(code: &str) -> bool {
    is_edition_code(code) || code == OTHER_LANGUAGES
}

/// `(country code, country, language code)`; the language is the most
/// spoken one in the country, `WR` when it is not one of the 24 editions.
/// Country codes are ISO 3166-1 alpha-2 except `UK` for the United Kingdom.
pub const COUNTRIES: &[(&str, &str, &str)] = &[
    ("AE", "United Arab Emirates", "AR"),
    ("AF", "Afghanistan", "FA"),
    ("AL", "Albania", "WR"),
    ("AM", "Armenia", "WR"),
    ("AO", "Angola", "PT"),
    ("AR", "Argentina", "ES"),
    ("AT", "Austria", "DE"),
    ("AU", "Australia", "EN"),
    ("AZ", "Azerbaijan", "TR"),
    ("BD", "Bangladesh", "WR"),
    ("BE", "Belgium", "NL"),
    ("BF", "Burkina Faso", "FR"),
    ("BG", "Bulgaria", "WR"),
    ("BH", "Bahrain", "AR"),
    ("BJ", "Benin", "FR"),
    ("BN", "Brunei", "MS"),
    ("BR", "Brazil", "PT"),
    ("BS", "Bahamas", "EN"),
    ("BT", "Bhutan", "WR"),
    ("BY", "Belarus", "RU"),
    ("CA", "Canada", "EN"),
    ("CF", "Central African Republic", "FR"),
    ("CH", "Switzerland", "DE"),
    ("CI", "Ivory Coast", "FR"),
    ("CL", "Chile", "ES"),
    ("CN", "China", "ZH"),
    ("CO", "Colombia", "ES"),
    ("CR", "Costa Rica", "ES"),
    ("CU", "Cuba", "ES"),
    ("CY", "Cyprus", "EL"),
    ("CZ", "Czech Republic", "WR"),
    ("DE", "Germany", "DE"),
    ("DK", "Denmark", "DA"),
    ("DO", "Dominican Republic", "ES"),
    ("DZ", "Algeria", "AR"),
    ("EC", "Ecuador", "ES"),
    ("EE", "Estonia", "WR"),
    ("EG", "Egypt", "AR"),
    ("ES", "Spain", "ES"),
    ("ET", "Ethiopia", "EN"),
    ("FI", "Finland", "WR"),
    ("FJ", "Fiji", "EN"),
    ("FO", "Faroe Islands", "DA"),
    ("FR", "France", "FR"),
    ("GE", "Georgia", "WR"),
    ("GH", "Ghana", "EN"),
    ("GL", "Greenland", "DA"),
    ("GR", "Greece", "EL"),
    ("GU", "Guam", "EN"),
    ("GY", "Guyana", "EN"),
    ("HK", "Hong Kong", "ZH"),
    ("HN", "Honduras", "ES"),
    ("HR", "Croatia", "WR"),
    ("HT", "Haiti", "FR"),
    ("HU", "Hungary", "HU"),
    ("ID", "Indonesia", "WR"),
    ("IE", "Ireland", "EN"),
    ("IL", "Israel", "HE"),
    ("IN", "India", "HI"),
    ("IQ", "Iraq", "AR"),
    ("IR", "Iran", "FA"),
    ("IS", "Iceland", "WR"),
    ("IT", "Italy", "IT"),
    ("JM", "Jamaica", "EN"),
    ("JO", "Jordan", "AR"),
    ("JP", "Japan", "JA"),
    ("KE", "Kenya", "EN"),
    ("KG", "Kyrgyzstan", "WR"),
    ("KH", "Cambodia", "WR"),
    ("KM", "Comoros", "FR"),
    ("KP", "North Korea", "KO"),
    ("KR", "South Korea", "KO"),
    ("KW", "Kuwait", "AR"),
    ("KZ", "Kazakhstan", "WR"),
    ("LA", "Laos", "WR"),
    ("LB", "Lebanon", "AR"),
    ("LK", "Sri Lanka", "WR"),
    ("LR", "Liberia", "EN"),
    ("LT", "Lithuania", "WR"),
    ("LV", "Latvia", "WR"),
    ("LY", "Libya", "AR"),
    ("MA", "Morocco", "AR"),
    ("MC", "Monaco", "FR"),
    ("MD", "Moldova", "WR"),
    ("MK", "Macedonia", "WR"),
    ("MM", "Myanmar", "WR"),
    ("MN", "Mongolia", "WR"),
    ("MT", "Malta", "EN"),
    ("MW", "Malawi", "EN"),
    ("MX", "Mexico", "ES"),
    ("MY", "Malaysia", "MS"),
    ("NG", "Nigeria", "EN"),
    ("NL", "Netherlands", "NL"),
    ("NO", "Norway", "WR"),
    ("NP", "Nepal", "WR"),
    ("NZ", "New Zealand", "EN"),
    ("OM", "Oman", "AR"),
    ("PA", "Panama", "ES"),
    ("PE", "Peru", "ES"),
    ("PG", "Papua New Guinea", "EN"),
    ("PH", "Philippines", "EN"),
    ("PK", "Pakistan", "HI"),
    ("PL", "Poland", "PL"),
    ("PR", "Puerto Rico", "ES"),
    ("PS", "State of Palestine", "AR"),
    ("PT", "Portugal", "PT"),
    ("PY", "Paraguay", "ES"),
    ("QA", "Qatar", "AR"),
    ("RO", "Romania", "WR"),
    ("RS", "Serbia", "WR"),
    ("RU", "Russia", "RU"),
    ("RW", "Rwanda", "EN"),
    ("SA", "Saudi Arabia", "AR"),
    ("SD", "Sudan", "AR"),
    ("SE", "Sweden", "SV"),
    ("SG", "Singapore", "ZH"),
    ("SI", "Slovenia", "WR"),
    ("SK", "Slovakia", "WR"),
    ("SO", "Somalia", "WR"),
    ("SR", "Suriname", "NL"),
    ("SV", "El Salvador", "ES"),
    ("SY", "Syria", "AR"),
    ("SZ", "Swaziland", "EN"),
    ("TH", "Thailand", "TH"),
    ("TJ", "Tajikistan", "WR"),
    ("TL", "Timor-Leste", "PT"),
    ("TN", "Tunisia", "AR"),
    ("TR", "Turkey", "TR"),
    ("TW", "Taiwan", "ZH"),
    ("TZ", "Tanzania", "WR"),
    ("UA", "Ukraine", "WR"),
    ("UG", "Uganda", "EN"),
    ("UK", "United Kingdom", "EN"),
    ("US", "United States", "EN"),
    ("UY", "Uruguay", "ES"),
    ("UZ", "Uzbekistan", "WR"),
    ("VA", "Holy See", "IT"),
    ("VE", "Venezuela", "ES"),
    ("VN", "Vietnam", "VI"),
    ("YE", "Yemen", "AR"),
    ("ZA", "South Africa", "WR"),
    ("ZW", "Zimbabwe", "EN"),
];

pub fn country(cc: &str) -> Option<(&'static str, &'static str, &'static str)> {
    COUNTRIES.iter().copied().find(|c| c.0 == cc)
}

pub fn country_language(cc: &str) -> Option<&'static str> {
    country(cc).map(|c| c.2)
}

/// NFC plus whitespace trimming; the form titles are compared in.
pub fn normalize_title(title: &str) -> String {
    title.trim().nfc().collect()
}

/// `⌈year / 100⌉`, so 1100 is in century 11 and 1101 in century 12.
pub fn century_of(year: i32) -> u32 {
    debug_assert!(year >= 1);
    (year as u32).div_ceil(100)
}

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("catalog syntax error: {0}")]
    Syntax(#[from] toml::de::Error),
    #[error("invalid catalog entity `{id}`: {message}")]
    Invalid { id: String, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Entity {
    pub canonical_id: String,
    pub display_name: String,
    /// Edition code → article title in that edition.
    pub titles: BTreeMap<String, String>,
    pub country: String,
    pub language: String,
    pub foundation_year: i32,
}

impl Entity {
    pub fn foundation_century(&self) -> u32 {
        century_of(self.foundation_year)
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEntity {
    id: String,
    name: String,
    country: String,
    founded: i32,
    #[serde(default)]
    language: Option<String>,
    #[serde(default)]
    titles: BTreeMap<String, String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCatalog {
    #[serde(default)]
    entity: Vec<RawEntity>,
}

/// Registry of universities keyed by canonical id, with per-edition title lookup.
#[derive(Debug, Clone, Default)]
pub struct EntityCatalog {
    entities: Vec<Entity>,
    by_id: HashMap<String, usize>,
    by_title: HashMap<(String, String), usize>,
}

impl EntityCatalog {
    pub fn from_entities(entities: Vec<Entity>) -> Result<Self, CatalogError> {
        let mut catalog = EntityCatalog::default();
        for entity in entities {
            catalog.push(entity)?;
        }
        Ok(catalog)
    }

    pub fn parse(text: &str) -> Result<Self, CatalogError> {
        let raw: RawCatalog = toml::from_str(text)?;
        let mut entities = Vec::with_capacity(raw.entity.len());
        for r in raw.entity {
            let country = r.country.trim().to_ascii_uppercase();
            let language = match r.language {
                Some(l) => l.trim().to_ascii_uppercase(),
                None => country_language(&country)
                    .ok_or_else(|| CatalogError::Invalid {
                        id: r.id.clone(),
                        message: format!("unknown country code `{country}`"),
                    })?
                    .to_string(),
            };
            let titles = r
                .titles
                .into_iter()
                .map(|(ed, title)| (ed.trim().to_ascii_uppercase(), normalize_title(&title)))
                .collect();
            entities.push(Entity {
                canonical_id: r.id.trim().to_string(),
                display_name: r.name,
                titles,
                country,
                language,
                foundation_year: r.founded,
            });
        }
        Self::from_entities(entities)
    }

    pub fn load(path: &Path) -> Result<Self, CatalogError> {
        let text = std::fs::read_to_string(path).map_err(|source| CatalogError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }

    fn push(&mut self, entity: Entity) -> Result<(), CatalogError> {
        let invalid = |message: String| CatalogError::Invalid {
            id: entity.canonical_id.clone(),
            message,
        };
        if entity.canonical_id.is_empty() {
            return Err(invalid("empty canonical id".into()));
        }
        if self.by_id.contains_key(&entity.canonical_id) {
            return Err(invalid("duplicate canonical id".into()));
        }
        if country(&entity.country).is_none() {
            return Err(invalid(format!("unknown country code `{}`", entity.country)));
        }
        if !is_culture_code(&entity.language) {
            return Err(invalid(format!("unknown language code `{}`", entity.language)));
        }
        if entity.foundation_year < 1 {
            return Err(invalid(format!(
                "foundation year {} is not a positive year",
                entity.foundation_year
            )));
        }
        let slot = self.entities.len();
        for (ed, title) in &entity.titles {
            if !is_edition_code(ed) {
                return Err(invalid(format!("unknown edition code `{ed}`")));
            }
            let key = (ed.clone(), normalize_title(title));
            if let Some(&other) = self.by_title.get(&key) {
                return Err(invalid(format!(
                    "title `{}` in {ed} already belongs to `{}`",
                    key.1, self.entities[other].canonical_id
                )));
            }
            self.by_title.insert(key, slot);
        }
        self.by_id.insert(entity.canonical_id.clone(), slot);
        self.entities.push(entity);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.entities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entities.is_empty()
    }

    pub fn entities(&self) -> &[Entity] {
        &self.entities
    }

    pub fn get(&self, canonical_id: &str) -> Option<&Entity> {
        self.by_id.get(canonical_id).map(|&i| &self.entities[i])
    }

    /// Exact lookup of an edition's article title, after NFC and trimming.
    pub fn resolve(&self, title: &str, edition: &str) -> Option<&Entity> {
        let key = (edition.to_ascii_uppercase(), normalize_title(title));
        self.by_title.get(&key).map(|&i| &self.entities[i])
    }
}

/// Canonical id of the entity whose `edition` title is `title`.
pub fn resolve_title<'c>(title: &str, edition: &str, catalog: &'c EntityCatalog) -> Option<&'c str> {
    catalog
        .resolve(title, edition)
        .map(|e| e.canonical_id.as_str())
}
