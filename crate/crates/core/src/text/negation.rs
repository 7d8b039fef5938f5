//! NegEx-style negation scoping with trigger and termination phrase lists.
//!
//! Text is split on whitespace; punctuation is stripped from each token and
//! `, ; : . ! ?` act as clause boundaries that close any open scope.

use std::ops::Range;

use crate::error::{Error, Result};

const BUNDLED_RULES: &str = "\
[pre]
no
not
without
denies
negative for
free of
[post]
ruled out
unlikely
[term]
but
however
although
except
";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NegationRules {
    pre_triggers: Vec<Vec<String>>,
    post_triggers: Vec<Vec<String>>,
    termination_terms: Vec<Vec<String>>,
    scope_window: usize,
}

impl Default for NegationRules {
    fn default() -> Self {
        Self::parse(BUNDLED_RULES).expect("bundled negation rules are valid")
    }
}

fn phrase(text: &str) -> Vec<String> {
    text.split_whitespace().map(str::to_ascii_lowercase).collect()
}

impl NegationRules {
    pub fn new(
        pre: &[&str],
        post: &[&str],
        termination: &[&str],
        scope_window: usize,
    ) -> Result<Self> {
        let collect = |list: &[&str]| list.iter().map(|p| phrase(p)).collect::<Vec<_>>();
        Self::validated(collect(pre), collect(post), collect(termination), scope_window)
    }

    fn validated(
        mut pre_triggers: Vec<Vec<String>>,
        mut post_triggers: Vec<Vec<String>>,
        mut termination_terms: Vec<Vec<String>>,
        scope_window: usize,
    ) -> Result<Self> {
        if pre_triggers.is_empty() || post_triggers.is_empty() {
            return Err(Error::Config("negation trigger lists must be nonempty".into()));
        }
        let all = pre_triggers.iter().chain(&post_triggers).chain(&termination_terms);
        if all.clone().any(Vec::is_empty) {
            return Err(Error::Config("empty negation phrase".into()));
        }
        if let Some(t) = pre_triggers
            .iter()
            .chain(&post_triggers)
            .find(|t| termination_terms.contains(t))
        {
            return Err(Error::Config(format!(
                "'{}' is both a trigger and a termination term",
                t.join(" ")
            )));
        }
        // Longest phrases are tried first.
        for list in [&mut pre_triggers, &mut post_triggers, &mut termination_terms] {
            list.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
            list.dedup();
        }
        Ok(Self { pre_triggers, post_triggers, termination_terms, scope_window })
    }

    /// Parse a rules file with `[pre]`, `[post]` and `[term]` sections.
    pub fn parse(raw: &str) -> Result<Self> {
        let (mut pre, mut post, mut term) = (Vec::new(), Vec::new(), Vec::new());
        let mut section: Option<&mut Vec<Vec<String>>> = None;
        for (i, line) in raw.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            match line {
                "[pre]" => section = Some(&mut pre),
                "[post]" => section = Some(&mut post),
                "[term]" => section = Some(&mut term),
                _ if line.starts_with('[') => {
                    return Err(Error::format_at(i + 1, format!("unknown section {line}")))
                }
                _ => match section.as_deref_mut() {
                    Some(list) => list.push(phrase(line)),
                    None => {
                        return Err(Error::format_at(i + 1, "phrase outside of a section"))
                    }
                },
            }
        }
        Self::validated(pre, post, term, 5)
    }

    pub fn with_scope_window(mut self, window: usize) -> Self {
        self.scope_window = window;
        self
    }

    pub fn scope_window(&self) -> usize {
        self.scope_window
    }
}

/// A trigger and the tokens it negates, as indices into the token sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NegationMatch {
    pub trigger: Range<usize>,
    pub negated: Range<usize>,
}

#[derive(Debug)]
struct Token<'a> {
    text: &'a str,
    lower: String,
    clause: usize,
}

fn is_boundary(c: char) -> bool {
    matches!(c, ',' | ';' | ':' | '.' | '!' | '?')
}

fn is_strippable(c: char) -> bool {
    is_boundary(c) || matches!(c, '(' | ')' | '[' | ']' | '"' | '\'')
}

fn tokens(text: &str) -> Vec<Token<'_>> {
    let mut out = Vec::new();
    let mut clause = 0;
    for chunk in text.split_whitespace() {
        let word = chunk.trim_matches(is_strippable);
        if word.is_empty() {
            if chunk.chars().any(is_boundary) {
                clause += 1;
            }
            continue;
        }
        let start = word.as_ptr() as usize - chunk.as_ptr() as usize;
        if chunk[..start].chars().any(is_boundary) {
            clause += 1;
        }
        out.push(Token { text: word, lower: word.to_ascii_lowercase(), clause });
        if chunk[start + word.len()..].chars().any(is_boundary) {
            clause += 1;
        }
    }
    out
}

fn match_at(tokens: &[Token<'_>], at: usize, phrases: &[Vec<String>]) -> Option<usize> {
    phrases.iter().find_map(|p| {
        let window = tokens.get(at..at + p.len())?;
        let same_clause = window.iter().all(|t| t.clause == window[0].clause);
        (same_clause && window.iter().zip(p).all(|(t, w)| &t.lower == w)).then_some(p.len())
    })
}

/// Find negation triggers and their scopes.
pub fn detect_negation(text: &str, rules: &NegationRules) -> Vec<NegationMatch> {
    let toks = tokens(text);
    let mut terminator = vec![false; toks.len()];
    let mut i = 0;
    while i < toks.len() {
        match match_at(&toks, i, &rules.termination_terms) {
            Some(len) => {
                terminator[i..i + len].iter_mut().for_each(|t| *t = true);
                i += len;
            }
            None => i += 1,
        }
    }

    let mut found = Vec::new();
    let mut i = 0;
    while i < toks.len() {
        let pre = match_at(&toks, i, &rules.pre_triggers);
        let post = match_at(&toks, i, &rules.post_triggers);
        let (len, forward) = match (pre, post) {
            (Some(a), Some(b)) if b > a => (b, false),
            (Some(a), _) => (a, true),
            (None, Some(b)) => (b, false),
            (None, None) => {
                i += 1;
                continue;
            }
        };
        let trigger = i..i + len;
        let clause = toks[i].clause;
        let in_scope = |j: usize| toks[j].clause == clause && !terminator[j];
        let negated = if forward {
            let end = (trigger.end..toks.len())
                .take(rules.scope_window)
                .take_while(|&j| in_scope(j))
                .last()
                .map_or(trigger.end, |j| j + 1);
            trigger.end..end
        } else {
            let start = (0..trigger.start)
                .rev()
                .take(rules.scope_window)
                .take_while(|&j| in_scope(j))
                .last()
                .unwrap_or(trigger.start);
            start..trigger.start
        };
        found.push(NegationMatch { trigger, negated });
        i += len;
    }
    found
}

/// Delete triggers and negated tokens, rejoining the rest with single spaces.
/// Text without any trigger is returned unchanged.
pub fn remove_negated(text: &str, rules: &NegationRules) -> String {
    let matches = detect_negation(text, rules);
    if matches.is_empty() {
        return text.to_string();
    }
    let toks = tokens(text);
    let mut drop = vec![false; toks.len()];
    for m in &matches {
        for j in m.trigger.clone().chain(m.negated.clone()) {
            drop[j] = true;
        }
    }
    toks.iter()
        .zip(drop)
        .filter(|(_, d)| !d)
        .map(|(t, _)| t.text)
        .collect::<Vec<_>>()
        .join(" ")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_trigger() {
        let rules = NegationRules::default();
        let m = detect_negation("no fever", &rules);
        assert_eq!(m, [NegationMatch { trigger: 0..1, negated: 1..2 }]);
    }

    #[test]
    fn termination_term_closes_scope() {
        let rules = NegationRules::default();
        let m = detect_negation("fever but no cough, however rash", &rules);
        assert_eq!(m, [NegationMatch { trigger: 2..3, negated: 3..4 }]);
    }

    #[test]
    fn empty_text() {
        assert!(detect_negation("", &NegationRules::default()).is_empty());
    }

    #[test]
    fn removal_examples() {
        let rules = NegationRules::default();
        assert_eq!(remove_negated("no pain", &rules), "");
        assert_eq!(remove_negated("denies chest pain, reports headache", &rules), "reports headache");
        assert_eq!(remove_negated("reports headache", &rules), "reports headache");
    }

    #[test]
    fn window_limits_scope() {
        let rules = NegationRules::default().with_scope_window(2);
        assert_eq!(remove_negated("no a b c d", &rules), "c d");
    }

    #[test]
    fn post_trigger_scopes_backwards() {
        let rules = NegationRules::default();
        let m = detect_negation("Fever. Pneumonia was ruled out", &rules);
        assert_eq!(m, [NegationMatch { trigger: 3..5, negated: 1..3 }]);
    }

    #[test]
    fn multiword_trigger() {
        let rules = NegationRules::default();
        assert_eq!(remove_negated("Negative for malignancy. Mild anemia", &rules), "Mild anemia");
    }

    #[test]
    fn parse_rejects_overlap_with_terminations() {
        let err = NegationRules::parse("[pre]\nno\n[post]\nunlikely\n[term]\nno\n");
        assert!(err.is_err());
        assert!(NegationRules::parse("[pre]\nno\n[post]\n[term]\nbut\n").is_err());
        assert!(NegationRules::parse("no\n").is_err());
    }
}
