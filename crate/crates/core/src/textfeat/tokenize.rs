use std::sync::OnceLock;

use regex::Regex;
use unicode_segmentation::UnicodeSegmentation;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenKind {
    Url,
    Number,
    Word,
    Punct,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub text: String,
    pub kind: TokenKind,
}

fn url_regex() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r#"(?i)\b(?:https?://|www\.)[^\s<>"]+"#).expect("valid url regex"))
}

const URL_TRAILING: &[char] = &['.', ',', ';', ':', '!', '?', ')', ']', '}', '\'', '”', '’'];

/// Byte ranges of URLs in `text`, trailing punctuation excluded.
pub fn url_spans(text: &str) -> Vec<(usize, usize)> {
    url_regex()
        .find_iter(text)
        .filter_map(|m| {
            let trimmed = m.as_str().trim_end_matches(URL_TRAILING);
            let end = m.start() + trimmed.len();
            // a bare scheme such as "http://" is not a link
            (trimmed.len() > 4 && !trimmed.ends_with("://")).then_some((m.start(), end))
        })
        .collect()
}

fn classify(token: &str) -> TokenKind {
    if token.chars().any(char::is_alphabetic) {
        TokenKind::Word
    } else if token.chars().any(|c| c.is_ascii_digit())
        && token.chars().all(|c| c.is_ascii_digit() || c == ',' || c == '.')
    {
        TokenKind::Number
    } else {
        TokenKind::Punct
    }
}

fn push_segments(text: &str, out: &mut Vec<Token>) {
    for seg in text.split_word_bounds() {
        if seg.chars().all(char::is_whitespace) {
            continue;
        }
        let lowered = seg.to_lowercase();
        let kind = classify(&lowered);
        out.push(Token { text: lowered, kind });
    }
}

/// Tokens with their kinds. Apostrophe variants are folded to `'` first.
pub fn tokenize_classified(text: &str) -> Vec<Token> {
    let text = normalize_apostrophes(text);
    let mut out = Vec::new();
    let mut pos = 0;
    for (start, end) in url_spans(&text) {
        push_segments(&text[pos..start], &mut out);
        out.push(Token {
            text: text[start..end].to_lowercase(),
            kind: TokenKind::Url,
        });
        pos = end;
    }
    push_segments(&text[pos..], &mut out);
    out
}

/// Lowercased tokens split on Unicode word boundaries. Punctuation marks are
/// separate tokens and URLs stay whole.
pub fn tokenize(text: &str) -> Vec<String> {
    tokenize_classified(text).into_iter().map(|t| t.text).collect()
}

pub(crate) fn normalize_apostrophes(text: &str) -> std::borrow::Cow<'_, str> {
    if text.contains(['\u{2019}', '\u{2018}']) {
        text.replace(['\u{2019}', '\u{2018}'], "'").into()
    } else {
        text.into()
    }
}
