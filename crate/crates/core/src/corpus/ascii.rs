//! Re-encoding text to 7-bit ASCII.

/// Transliteration for Latin-1 letters; `None` means drop the character.
fn latin1(c: char) -> Option<&'static str> {
    Some(match c {
        'À'..='Å' => "A",
        'Æ' => "AE",
        'Ç' => "C",
        'È'..='Ë' => "E",
        'Ì'..='Ï' => "I",
        'Ð' => "D",
        'Ñ' => "N",
        'Ò'..='Ö' | 'Ø' => "O",
        'Ù'..='Ü' => "U",
        'Ý' => "Y",
        'Þ' => "TH",
        'ß' => "ss",
        'à'..='å' => "a",
        'æ' => "ae",
        'ç' => "c",
        'è'..='ë' => "e",
        'ì'..='ï' => "i",
        'ð' => "d",
        'ñ' => "n",
        'ò'..='ö' | 'ø' => "o",
        'ù'..='ü' => "u",
        'ý' | 'ÿ' => "y",
        'þ' => "th",
        _ => return None,
    })
}

/// Keep ASCII, transliterate Latin-1 letters, drop everything else.
pub fn to_ascii(text: &str) -> String {
    if text.is_ascii() {
        return text.to_string();
    }
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        if c.is_ascii() {
            out.push(c);
        } else if let Some(s) = latin1(c) {
            out.push_str(s);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::to_ascii;

    #[test]
    fn transliterates_latin1_and_drops_rest() {
        assert_eq!(to_ascii("naïve analysis"), "naive analysis");
        assert_eq!(to_ascii("Ærø straße"), "AEro strasse");
        assert_eq!(to_ascii("β-blocker → dose ≥ 5"), "-blocker  dose  5");
    }
}
