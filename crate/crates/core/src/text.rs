//! Character-offset helpers and the gap-marker lexer shared by templates
//! and draft scanning.
//!
//! All offsets are counted in Unicode scalar values, end-exclusive.
//!
//! Marker grammar: an unescaped `[[` opens a marker that runs to the next
//! `]]`. A run of `n` backslashes directly before a `[` is an escape: an odd
//! run makes that `[` literal and stands for `(n - 1) / 2` backslashes; an
//! even run stands for `n / 2` backslashes and leaves the `[` active.
//! Backslashes anywhere else are ordinary text.

use alloc::string::String;
use alloc::vec::Vec;

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Token {
    Text(String),
    Marker { start: usize, end: usize, body: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Unterminated {
    pub offset: usize,
}

pub(crate) fn char_len(s: &str) -> usize {
    s.chars().count()
}

/// Byte index of the char at `offset`, or `s.len()` when `offset` is the end.
fn byte_index(s: &str, offset: usize) -> Option<usize> {
    if offset == 0 {
        return Some(0);
    }
    let mut count = 0;
    for (b, _) in s.char_indices() {
        if count == offset {
            return Some(b);
        }
        count += 1;
    }
    (count == offset).then_some(s.len())
}

/// Substring by char offsets.
pub(crate) fn char_slice(s: &str, start: usize, end: usize) -> Option<&str> {
    if start > end {
        return None;
    }
    let from = byte_index(s, start)?;
    let to = byte_index(s, end)?;
    Some(&s[from..to])
}

pub(crate) fn scan(s: &str) -> Result<Vec<Token>, Unterminated> {
    let chars: Vec<char> = s.chars().collect();
    let mut tokens = Vec::new();
    let mut text = String::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c == '\\' {
            let mut n = 0;
            while i + n < chars.len() && chars[i + n] == '\\' {
                n += 1;
            }
            if chars.get(i + n) == Some(&'[') {
                text.extend(core::iter::repeat_n('\\', n / 2));
                if n % 2 == 1 {
                    text.push('[');
                    i += n + 1;
                } else {
                    i += n;
                }
            } else {
                text.extend(core::iter::repeat_n('\\', n));
                i += n;
            }
            continue;
        }
        if c == '[' && chars.get(i + 1) == Some(&'[') {
            let start = i;
            let mut j = i + 2;
            let close = loop {
                if j + 1 >= chars.len() {
                    break None;
                }
                if chars[j] == ']' && chars[j + 1] == ']' {
                    break Some(j);
                }
                j += 1;
            };
            let Some(close) = close else {
                return Err(Unterminated { offset: start });
            };
            if !text.is_empty() {
                tokens.push(Token::Text(core::mem::take(&mut text)));
            }
            tokens.push(Token::Marker {
                start,
                end: close + 2,
                body: chars[start + 2..close].iter().collect(),
            });
            i = close + 2;
            continue;
        }
        text.push(c);
        i += 1;
    }
    if !text.is_empty() {
        tokens.push(Token::Text(text));
    }
    Ok(tokens)
}

/// Encodes literal text so that [`scan`] reads it back unchanged and finds no
/// marker in it. `before_marker` must be set when a marker follows directly.
pub(crate) fn escape_literal(s: &str, before_marker: bool) -> String {
    let chars: Vec<char> = s.chars().collect();
    let mut out = String::with_capacity(s.len());
    let mut pending = 0usize;
    for (i, &c) in chars.iter().enumerate() {
        if c == '\\' {
            pending += 1;
            continue;
        }
        if c == '[' {
            let opens = match chars.get(i + 1) {
                Some('[') => true,
                None => before_marker,
                Some(_) => false,
            };
            out.extend(core::iter::repeat_n('\\', pending * 2 + usize::from(opens)));
        } else {
            out.extend(core::iter::repeat_n('\\', pending));
        }
        pending = 0;
        out.push(c);
    }
    let trailing = if before_marker { pending * 2 } else { pending };
    out.extend(core::iter::repeat_n('\\', trailing));
    out
}

pub(crate) fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || c == '\'' || c == '_'
}

fn eq_ignore_case(a: char, b: char) -> bool {
    a == b || a.to_lowercase().eq(b.to_lowercase())
}

/// Case-insensitive phrase match at `at`, bounded by non-word characters on
/// both sides. A space in the phrase matches one or more whitespace chars.
/// Returns the end offset of the match.
pub(crate) fn match_phrase(text: &[char], at: usize, phrase: &[char]) -> Option<usize> {
    if at > 0 && is_word_char(text[at - 1]) && phrase.first().is_some_and(|&c| is_word_char(c))
    {
        return None;
    }
    let mut i = at;
    for &p in phrase {
        if p == ' ' {
            let from = i;
            while i < text.len() && text[i].is_whitespace() {
                i += 1;
            }
            if i == from {
                return None;
            }
        } else {
            if i >= text.len() || !eq_ignore_case(text[i], p) {
                return None;
            }
            i += 1;
        }
    }
    let ends_in_word = phrase.last().is_some_and(|&c| is_word_char(c));
    if ends_in_word && i < text.len() && is_word_char(text[i]) {
        return None;
    }
    Some(i)
}

/// Splits a phrase into chars with internal whitespace collapsed to one space.
pub(crate) fn phrase_chars(phrase: &str) -> Vec<char> {
    let mut out = Vec::new();
    for (n, word) in phrase.split_whitespace().enumerate() {
        if n > 0 {
            out.push(' ');
        }
        out.extend(word.chars());
    }
    out
}

/// Lower-cased word tokens of `s`.
pub(crate) fn words(s: &str) -> impl Iterator<Item = String> + '_ {
    s.split(|c: char| !is_word_char(c))
        .filter(|w| !w.is_empty())
        .map(|w| w.to_lowercase())
}

/// Sentence index for every char: boundaries are `.`, `!` or `?` followed by
/// whitespace.
pub(crate) fn sentence_ids(text: &[char]) -> Vec<usize> {
    let mut ids = Vec::with_capacity(text.len());
    let mut current = 0;
    for (i, &c) in text.iter().enumerate() {
        ids.push(current);
        if matches!(c, '.' | '!' | '?') && text.get(i + 1).is_some_and(|n| n.is_whitespace()) {
            current += 1;
        }
    }
    ids
}
