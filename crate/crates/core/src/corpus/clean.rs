//! The per-document cleaning transform and its four stages.

use super::{CleanDocument, CleaningStats, CorpusError, RawDocument};
use std::path::Path;

/// Default emoji code-point ranges removed from documents.
pub const DEFAULT_EMOJI_RANGES: &[(u32, u32)] = &[
    (0x1F300, 0x1FAFF), // pictographs, emoticons, symbols
    (0x2600, 0x27BF),   // misc symbols and dingbats
    (0xFE0F, 0xFE0F),   // variation selector-16
    (0x200D, 0x200D),   // zero-width joiner
    (0x1F1E6, 0x1F1FF), // regional indicators (flags)
];

/// Configurable table of emoji code-point ranges.
#[derive(Clone, Debug)]
pub struct EmojiRanges {
    ranges: Vec<(u32, u32)>,
}

impl Default for EmojiRanges {
    fn default() -> Self {
        EmojiRanges {
            ranges: DEFAULT_EMOJI_RANGES.to_vec(),
        }
    }
}

impl EmojiRanges {
    pub fn new(ranges: Vec<(u32, u32)>) -> Self {
        EmojiRanges { ranges }
    }

    /// Loads ranges from a file with one `START-END` or single code point
    /// per line, hex digits, `#` comments allowed.
    pub fn from_file(path: &Path) -> Result<Self, CorpusError> {
        let text = std::fs::read_to_string(path).map_err(|source| CorpusError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut ranges = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let parse_hex = |s: &str| -> Result<u32, CorpusError> {
                let s = s.trim().trim_start_matches("U+").trim_start_matches("0x");
                u32::from_str_radix(s, 16).map_err(|e| CorpusError::EmojiRangeParse {
                    line: i + 1,
                    message: format!("{s:?}: {e}"),
                })
            };
            let (lo, hi) = match line.split_once('-') {
                Some((a, b)) => (parse_hex(a)?, parse_hex(b)?),
                None => {
                    let v = parse_hex(line)?;
                    (v, v)
                }
            };
            if lo > hi {
                return Err(CorpusError::EmojiRangeParse {
                    line: i + 1,
                    message: format!("empty range {lo:X}-{hi:X}"),
                });
            }
            ranges.push((lo, hi));
        }
        Ok(EmojiRanges { ranges })
    }

    pub fn contains(&self, c: char) -> bool {
        let v = c as u32;
        self.ranges.iter().any(|&(lo, hi)| lo <= v && v <= hi)
    }
}

/// Per-stage counters accumulated while cleaning.
#[derive(Clone, Copy, Debug, Default)]
pub struct CleanCounters {
    pub tags_stripped: u64,
    pub escapes_decoded: u64,
    pub mojibake_fixed: u64,
    pub emoji_removed: u64,
}

impl CleanCounters {
    pub(crate) fn add_to(&self, stats: &mut CleaningStats) {
        stats.tags_stripped += self.tags_stripped;
        stats.escapes_decoded += self.escapes_decoded;
        stats.mojibake_fixed += self.mojibake_fixed;
        stats.emoji_removed += self.emoji_removed;
    }
}

/// Removes HTML tags and decodes the five named entities plus numeric
/// character references. A non-tag `<` is preserved.
pub fn strip_html(text: &str) -> String {
    strip_html_counted(text, &mut CleanCounters::default())
}

pub(crate) fn strip_html_counted(text: &str, counters: &mut CleanCounters) -> String {
    let chars: Vec<char> = text.chars().collect();
    let mut out = String::with_capacity(text.len());
    let mut i = 0;
    while i < chars.len() {
        if chars[i] == '<' {
            if let Some(end) = tag_end(&chars, i) {
                counters.tags_stripped += 1;
                i = end + 1;
                continue;
            }
        }
        out.push(chars[i]);
        i += 1;
    }
    decode_entities(&out)
}

/// Returns the index of the closing `>` when `chars[start..]` opens a tag.
fn tag_end(chars: &[char], start: usize) -> Option<usize> {
    let mut j = start + 1;
    if j < chars.len() && (chars[j] == '/' || chars[j] == '!') {
        j += 1;
    }
    if j >= chars.len() || !chars[j].is_ascii_alphabetic() {
        return None;
    }
    (j..chars.len()).find(|&k| chars[k] == '>')
}

fn decode_entities(text: &str) -> String {
    const NAMED: &[(&str, char)] = &[
        ("amp", '&'),
        ("lt", '<'),
        ("gt", '>'),
        ("quot", '"'),
        ("apos", '\''),
    ];
    let mut out = String::with_capacity(text.len());
    let mut rest = text;
    while let Some(pos) = rest.find('&') {
        out.push_str(&rest[..pos]);
        let tail = &rest[pos..];
        let mut replaced = None;
        if let Some(semi) = tail.find(';') {
            let body = &tail[1..semi];
            if let Some(&(_, c)) = NAMED.iter().find(|(n, _)| *n == body) {
                replaced = Some((c, semi + 1));
            } else if let Some(numeric) = body.strip_prefix('#') {
                let parsed = if let Some(hex) = numeric.strip_prefix('x').or_else(|| {
                    numeric.strip_prefix('X')
                }) {
                    u32::from_str_radix(hex, 16).ok()
                } else {
                    numeric.parse::<u32>().ok()
                };
                if let Some(c) = parsed.and_then(char::from_u32) {
                    replaced = Some((c, semi + 1));
                }
            }
        }
        match replaced {
            Some((c, len)) => {
                out.push(c);
                rest = &tail[len..];
            }
            None => {
                out.push('&');
                rest = &tail[1..];
            }
        }
    }
    out.push_str(rest);
    out
}

/// Replaces literal `\uXXXX` sequences with their code points; surrogate
/// pairs combine, anything malformed stays verbatim.
pub fn decode_unicode_escapes(text: &str) -> String {
    decode_unicode_escapes_counted(text, &mut CleanCounters::default())
}

pub(crate) fn decode_unicode_escapes_counted(text: &str, counters: &mut CleanCounters) -> String {
    let chars: Vec<char> = text.chars().collect();
    let mut out = String::with_capacity(text.len());
    let mut i = 0;
    while i < chars.len() {
        match parse_escape(&chars, i) {
            Some(code) => {
                if (0xD800..=0xDBFF).contains(&code) {
                    // high surrogate: valid only when a low surrogate follows
                    if let Some(low) = parse_escape(&chars, i + 6) {
                        if (0xDC00..=0xDFFF).contains(&low) {
                            let combined =
                                0x10000 + ((code - 0xD800) << 10) + (low - 0xDC00);
                            if let Some(c) = char::from_u32(combined) {
                                out.push(c);
                                counters.escapes_decoded += 2;
                                i += 12;
                                continue;
                            }
                        }
                    }
                } else if let Some(c) = char::from_u32(code) {
                    out.push(c);
                    counters.escapes_decoded += 1;
                    i += 6;
                    continue;
                }
                out.push(chars[i]);
                i += 1;
            }
            None => {
                out.push(chars[i]);
                i += 1;
            }
        }
    }
    out
}

/// Parses a 6-character `\uXXXX` block starting at `i`.
fn parse_escape(chars: &[char], i: usize) -> Option<u32> {
    if i + 6 > chars.len() || chars[i] != '\\' || chars[i + 1] != 'u' {
        return None;
    }
    let mut code = 0u32;
    for &c in &chars[i + 2..i + 6] {
        code = code * 16 + c.to_digit(16)?;
    }
    Some(code)
}

const MOJIBAKE_LEADS: [u32; 3] = [0xC3, 0xC2, 0xE2];

fn is_continuation(c: char) -> bool {
    (0x80..=0xBF).contains(&(c as u32))
}

fn suspicious_pairs(chars: &[char]) -> usize {
    chars
        .windows(2)
        .filter(|w| MOJIBAKE_LEADS.contains(&(w[0] as u32)) && is_continuation(w[1]))
        .count()
}

/// Repairs UTF-8-read-as-Latin-1 double encoding. A maximal run of
/// non-ASCII Latin-1 characters that contains a suspicious lead
/// (Ã, Â, â followed by a continuation-range character) is re-encoded as
/// Latin-1 bytes; when those bytes form valid UTF-8 with fewer suspicious
/// leads, the decoded text replaces the run. Single pass, no fixpoint.
pub fn fix_mojibake(text: &str) -> String {
    fix_mojibake_counted(text, &mut CleanCounters::default())
}

pub(crate) fn fix_mojibake_counted(text: &str, counters: &mut CleanCounters) -> String {
    let chars: Vec<char> = text.chars().collect();
    let mut out = String::with_capacity(text.len());
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if (0x80..=0xFF).contains(&(c as u32)) {
            let mut j = i;
            while j < chars.len() && (0x80..=0xFF).contains(&(chars[j] as u32)) {
                j += 1;
            }
            let span = &chars[i..j];
            match repair_span(span) {
                Some(fixed) => {
                    counters.mojibake_fixed += 1;
                    out.push_str(&fixed);
                }
                None => out.extend(span.iter()),
            }
            i = j;
        } else {
            out.push(c);
            i += 1;
        }
    }
    out
}

fn repair_span(span: &[char]) -> Option<String> {
    let before = suspicious_pairs(span);
    if before == 0 {
        return None;
    }
    let bytes: Vec<u8> = span.iter().map(|&c| c as u32 as u8).collect();
    let repaired = std::str::from_utf8(&bytes).ok()?;
    let after = suspicious_pairs(&repaired.chars().collect::<Vec<_>>());
    (after < before).then(|| repaired.to_string())
}

/// Removes code points in the configured emoji ranges.
pub fn remove_emoji(text: &str, ranges: &EmojiRanges) -> String {
    remove_emoji_counted(text, ranges, &mut CleanCounters::default())
}

pub(crate) fn remove_emoji_counted(
    text: &str,
    ranges: &EmojiRanges,
    counters: &mut CleanCounters,
) -> String {
    text.chars()
        .filter(|&c| {
            if ranges.contains(c) {
                counters.emoji_removed += 1;
                false
            } else {
                true
            }
        })
        .collect()
}

/// Collapses whitespace and control characters into single spaces and
/// trims the ends.
fn normalize_whitespace(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut pending_space = false;
    for c in text.chars() {
        if c.is_whitespace() || c.is_control() {
            pending_space = !out.is_empty();
        } else {
            if pending_space {
                out.push(' ');
                pending_space = false;
            }
            out.push(c);
        }
    }
    out
}

/// Runs the full cleaning transform on one text. Returns `None` when the
/// document is empty after cleaning.
pub fn clean_text(
    text: &str,
    ranges: &EmojiRanges,
    counters: &mut CleanCounters,
) -> Option<String> {
    let t = strip_html_counted(text, counters);
    let t = decode_unicode_escapes_counted(&t, counters);
    let t = fix_mojibake_counted(&t, counters);
    let t = remove_emoji_counted(&t, ranges, counters);
    let t = normalize_whitespace(&t);
    (!t.is_empty()).then_some(t)
}

/// Cleans one document; `None` means the document was dropped as empty.
pub fn clean_document(raw: &RawDocument, ranges: &EmojiRanges) -> Option<CleanDocument> {
    let mut counters = CleanCounters::default();
    clean_text(&raw.text, ranges, &mut counters).map(|text| CleanDocument { text })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strips_tags_and_named_entities() {
        assert_eq!(strip_html("<p>olá</p>"), "olá");
        assert_eq!(strip_html("a &amp; b"), "a & b");
        assert_eq!(strip_html("x <b>y</b> &lt;z&gt;"), "x y <z>");
    }

    #[test]
    fn decodes_numeric_entities() {
        // expected characters derived from the code-point table:
        // 231 = U+00E7 'ç', 227 = U+00E3 'ã'
        assert_eq!(char::from_u32(231).unwrap(), 'ç');
        assert_eq!(char::from_u32(227).unwrap(), 'ã');
        assert_eq!(strip_html("x &#231;&#227; <br/> y"), "x çã  y");
        assert_eq!(strip_html("&#xE7;"), "ç");
    }

    #[test]
    fn preserves_non_tag_angle_brackets() {
        assert_eq!(strip_html("2 < 3 and 5 > 4"), "2 < 3 and 5 > 4");
        assert_eq!(strip_html("a<b"), "a<b");
        assert_eq!(strip_html("< p>not a tag"), "< p>not a tag");
        // unterminated tag opener is preserved
        assert_eq!(strip_html("<b unterminated"), "<b unterminated");
    }

    #[test]
    fn invalid_entities_kept_verbatim() {
        assert_eq!(strip_html("&nope; &#xZZ; & alone"), "&nope; &#xZZ; & alone");
    }

    #[test]
    fn decodes_literal_escapes() {
        assert_eq!(decode_unicode_escapes(r"maçã"), "maçã");
        assert_eq!(decode_unicode_escapes("no escapes"), "no escapes");
        assert_eq!(decode_unicode_escapes(r"\u00zz"), r"\u00zz");
        assert_eq!(decode_unicode_escapes(r"tail \u004"), r"tail \u004");
    }

    #[test]
    fn decodes_surrogate_pairs_and_keeps_lone_surrogates() {
        assert_eq!(decode_unicode_escapes(r"😀"), "\u{1F600}");
        assert_eq!(decode_unicode_escapes(r"\ud83d x"), r"\ud83d x");
    }

    #[test]
    fn repairs_latin1_double_encoding() {
        // fixture construction: encode the clean text as UTF-8 and
        // reinterpret each byte as a Latin-1 character
        let as_latin1 = |s: &str| -> String {
            s.bytes().map(|b| b as char).collect::<String>()
        };
        assert_eq!(as_latin1("não"), "nÃ£o");
        assert_eq!(fix_mojibake(&as_latin1("não")), "não");
        assert_eq!(fix_mojibake(&as_latin1("coração")), "coração");
        assert_eq!(fix_mojibake(&as_latin1("já vão — sim")), "já vão — sim");
    }

    #[test]
    fn leaves_clean_accented_text_alone() {
        assert_eq!(fix_mojibake("ação"), "ação");
        assert_eq!(fix_mojibake("você é"), "você é");
        assert_eq!(fix_mojibake("Ã sozinho"), "Ã sozinho");
    }

    #[test]
    fn removes_emoji_in_default_ranges() {
        let ranges = EmojiRanges::default();
        assert_eq!(remove_emoji("bom dia ☀", &ranges), "bom dia ");
        assert_eq!(remove_emoji("texto puro", &ranges), "texto puro");
        // three flag pairs, built from the regional-indicator range
        let flags: String = [0x1F1E7, 0x1F1F7, 0x1F1F5, 0x1F1F9, 0x1F1E9, 0x1F1EA]
            .iter()
            .map(|&v| char::from_u32(v).unwrap())
            .collect();
        assert_eq!(remove_emoji(&flags, &ranges), "");
    }

    #[test]
    fn clean_document_composes_stages() {
        let ranges = EmojiRanges::default();
        let raw = RawDocument::new("d0", "<b>ol\\u00e1</b> \u{1F600}");
        assert_eq!(
            clean_document(&raw, &ranges).unwrap().text,
            "olá".to_string()
        );
        assert!(clean_document(&RawDocument::new("d1", "<br/>"), &ranges).is_none());
        assert_eq!(
            clean_document(&RawDocument::new("d2", "  a   b "), &ranges)
                .unwrap()
                .text,
            "a b"
        );
    }

    #[test]
    fn strips_control_characters() {
        let ranges = EmojiRanges::default();
        let raw = RawDocument::new("d", "a\u{0007}b\nc\t d");
        assert_eq!(clean_document(&raw, &ranges).unwrap().text, "a b c d");
    }

    #[test]
    fn cleaning_is_idempotent_on_samples() {
        let ranges = EmojiRanges::default();
        let mut c = CleanCounters::default();
        for s in [
            "<p>ol\\u00e1 mundo</p> ☀",
            "nÃ£o &amp; coraÃ§Ã£o",
            "   espaços \t em   branco ",
            "texto já limpo",
        ] {
            let once = clean_text(s, &ranges, &mut c);
            if let Some(ref t) = once {
                let twice = clean_text(t, &ranges, &mut c);
                assert_eq!(once, twice, "not idempotent on {s:?}");
            }
        }
    }

    #[test]
    fn emoji_ranges_parse_from_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ranges.txt");
        std::fs::write(&path, "# flags only\n1F1E6-1F1FF\nFE0F\n").unwrap();
        let ranges = EmojiRanges::from_file(&path).unwrap();
        assert!(ranges.contains('\u{1F1E6}'));
        assert!(ranges.contains('\u{FE0F}'));
        assert!(!ranges.contains('☀'));

        std::fs::write(&path, "oops\n").unwrap();
        assert!(EmojiRanges::from_file(&path).is_err());
    }
}
