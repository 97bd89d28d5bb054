use unicode_normalization::UnicodeNormalization;

/// Characters that join two alphanumeric runs into one token ("U-23", "1948–49").
pub fn is_connector(c: char) -> bool {
    matches!(c, '-' | '\u{2010}' | '\u{2011}' | '\u{2013}' | '/')
}

/// Lowercases and splits text on whitespace and punctuation.
///
/// Tokens are maximal alphanumeric runs; a connector between two
/// alphanumeric characters stays inside the token, so digit runs and
/// hyphenated ranges survive whole.
pub fn tokenize(text: &str) -> Vec<String> {
    let chars: Vec<char> = text.nfc().flat_map(char::to_lowercase).collect();
    let mut tokens = Vec::new();
    let mut current = String::new();
    for (i, &c) in chars.iter().enumerate() {
        let keep = c.is_alphanumeric()
            || (is_connector(c)
                && !current.is_empty()
                && chars.get(i + 1).is_some_and(|n| n.is_alphanumeric())
                && chars[i - 1].is_alphanumeric());
        if keep {
            current.push(c);
        } else if !current.is_empty() {
            tokens.push(std::mem::take(&mut current));
        }
    }
    if !current.is_empty() {
        tokens.push(current);
    }
    tokens
}
