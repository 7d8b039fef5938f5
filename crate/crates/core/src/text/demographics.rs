//! Rule-based rewriting of patient age and gender mentions.
//!
//! `86 y/o m` becomes `elderly male`: the age is mapped onto a configurable
//! band label and an adjoining gender token onto `male` or `female`.

use std::collections::BTreeMap;
use std::fmt;

use regex::{Captures, Regex};

use crate::error::{Error, Result};

const BUNDLED_RULES: &str = "\
# exclusive upper age bound in years, then label; `*` is unbounded
2 infant
12 child
18 adolescent
40 adult
65 middle-aged
* elderly
gender m male
gender male male
gender man male
gender boy male
gender gentleman male
gender f female
gender female female
gender woman female
gender girl female
gender lady female
";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Gender {
    Male,
    Female,
}

impl Gender {
    pub fn word(self) -> &'static str {
        match self {
            Gender::Male => "male",
            Gender::Female => "female",
        }
    }
}

impl fmt::Display for Gender {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.word())
    }
}

/// Ages strictly below `max_age` (or any age when `None`) get `label`.
#[derive(Debug, Clone, PartialEq)]
pub struct AgeBand {
    pub max_age: Option<f64>,
    pub label: String,
}

#[derive(Debug, Clone)]
pub struct DemographicRules {
    age_bands: Vec<AgeBand>,
    gender_map: BTreeMap<String, Gender>,
    pattern: Regex,
}

impl Default for DemographicRules {
    fn default() -> Self {
        Self::parse(BUNDLED_RULES).expect("bundled demographic rules are valid")
    }
}

// Ordered: at any position the first alternative that matches wins.
const AGE_UNITS: &[&str] = &[
    r"years?\s*-?\s*old",
    r"yrs?\s*-?\s*old",
    r"y/o",
    r"y\.o\.",
    r"y\.o",
    r"yo",
    r"months?\s*-?\s*old",
    r"mos?\s*-?\s*old",
];

impl DemographicRules {
    pub fn new(age_bands: Vec<AgeBand>, gender_map: BTreeMap<String, Gender>) -> Result<Self> {
        if age_bands.is_empty() || age_bands.last().is_some_and(|b| b.max_age.is_some()) {
            return Err(Error::Config("age bands must end with an unbounded band".into()));
        }
        let bounded = &age_bands[..age_bands.len() - 1];
        if bounded.iter().any(|b| b.max_age.is_none()) {
            return Err(Error::Config("only the last age band may be unbounded".into()));
        }
        let bounds: Vec<f64> = bounded.iter().filter_map(|b| b.max_age).collect();
        if bounds.iter().any(|&b| b <= 0.0) || bounds.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("age bounds must be positive and increasing".into()));
        }
        if gender_map.is_empty() {
            return Err(Error::Config("gender map is empty".into()));
        }
        let mut tokens: Vec<&String> = gender_map.keys().collect();
        tokens.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
        let genders = tokens.iter().map(|t| regex::escape(t)).collect::<Vec<_>>().join("|");
        let units = AGE_UNITS.join("|");
        let pattern = format!(
            r"(?i)\b(?P<age>\d{{1,3}})(?:\s*-?\s*(?P<unit>{units})(?:[\s,-]+(?P<g1>{genders}))?|\s*(?P<g2>{genders}))(?P<end>\W|$)"
        );
        let pattern = Regex::new(&pattern).map_err(|e| Error::Config(e.to_string()))?;
        Ok(Self { age_bands, gender_map, pattern })
    }

    /// Parse `maxage label` lines and `gender token label` lines.
    pub fn parse(raw: &str) -> Result<Self> {
        let mut bands = Vec::new();
        let mut genders = BTreeMap::new();
        for (i, line) in raw.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            match fields.as_slice() {
                ["gender", token, label] => {
                    let gender = match label.to_ascii_lowercase().as_str() {
                        "male" => Gender::Male,
                        "female" => Gender::Female,
                        other => {
                            return Err(Error::format_at(i + 1, format!("unknown gender {other}")))
                        }
                    };
                    genders.insert(token.to_ascii_lowercase(), gender);
                }
                [max, label] => {
                    let max_age = match *max {
                        "*" => None,
                        n => Some(n.parse::<f64>().map_err(|_| {
                            Error::format_at(i + 1, format!("invalid age bound {n}"))
                        })?),
                    };
                    bands.push(AgeBand { max_age, label: label.to_string() });
                }
                _ => return Err(Error::format_at(i + 1, "expected `maxage label` or `gender token label`")),
            }
        }
        Self::new(bands, genders)
    }

    pub fn band_label(&self, age_years: f64) -> &str {
        self.age_bands
            .iter()
            .find(|b| b.max_age.is_none_or(|max| age_years < max))
            .map(|b| b.label.as_str())
            .expect("last band is unbounded")
    }

    pub fn gender(&self, token: &str) -> Option<Gender> {
        self.gender_map.get(&token.to_ascii_lowercase()).copied()
    }

    pub fn age_bands(&self) -> &[AgeBand] {
        &self.age_bands
    }
}

/// Rewrite every age expression to `<band> <gender>` (or `<band>` alone).
/// Text outside matched expressions is left byte-identical.
pub fn normalize_demographics(text: &str, rules: &DemographicRules) -> String {
    rules
        .pattern
        .replace_all(text, |caps: &Captures<'_>| {
            let mut age: f64 = caps["age"].parse().expect("digits");
            if caps.name("unit").is_some_and(|u| u.as_str().to_ascii_lowercase().starts_with('m')) {
                age /= 12.0;
            }
            let mut out = rules.band_label(age).to_string();
            let gender = caps.name("g1").or_else(|| caps.name("g2"));
            if let Some(g) = gender.and_then(|g| rules.gender(g.as_str())) {
                out.push(' ');
                out.push_str(g.word());
            }
            out.push_str(&caps["end"]);
            out
        })
        .into_owned()
}
