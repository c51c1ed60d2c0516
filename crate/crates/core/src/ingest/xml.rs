// SPDX-License-Identifier: Apache-2.0

//! Minimal pull tokenizer for the XML used by OSM extracts.
//!
//! Understands start/end/empty elements with quoted attributes, the
//! predefined and numeric character entities, comments, processing
//! instructions, CDATA and DOCTYPE declarations. Text content is skipped.
//! Element nesting is checked; every error carries the byte offset where
//! the problem was found.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("malformed XML at byte {offset}: {message}")]
pub struct XmlError {
    pub offset: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum XmlEvent<'a> {
    Start { name: &'a str, attrs: Vec<(&'a str, String)>, offset: usize },
    /// Emitted for both `</name>` and the implicit close of `<name/>`.
    End { name: &'a str },
}

pub struct XmlReader<'a> {
    src: &'a [u8],
    pos: usize,
    stack: Vec<&'a str>,
    pending_end: Option<&'a str>,
    seen_root: bool,
}

fn err<T>(offset: usize, message: impl Into<String>) -> Result<T, XmlError> {
    Err(XmlError { offset, message: message.into() })
}

fn is_name_byte(b: u8) -> bool {
    b.is_ascii_alphanumeric() || matches!(b, b'_' | b'-' | b'.' | b':') || b >= 0x80
}

impl<'a> XmlReader<'a> {
    pub fn new(src: &'a [u8]) -> Self {
        let pos = if src.starts_with(b"\xEF\xBB\xBF") { 3 } else { 0 };
        XmlReader { src, pos, stack: Vec::new(), pending_end: None, seen_root: false }
    }

    fn starts_with(&self, pat: &[u8]) -> bool {
        self.src[self.pos..].starts_with(pat)
    }

    fn skip_past(&mut self, pat: &[u8], what: &str) -> Result<(), XmlError> {
        let start = self.pos;
        match self.src[self.pos..].windows(pat.len()).position(|w| w == pat) {
            Some(i) => {
                self.pos += i + pat.len();
                Ok(())
            }
            None => err(start, format!("unterminated {what}")),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn name(&mut self) -> Result<&'a str, XmlError> {
        let start = self.pos;
        while self.pos < self.src.len() && is_name_byte(self.src[self.pos]) {
            self.pos += 1;
        }
        if start == self.pos {
            return err(start, "expected a name");
        }
        std::str::from_utf8(&self.src[start..self.pos]).or_else(|_| err(start, "name is not valid UTF-8"))
    }

    fn skip_doctype(&mut self) -> Result<(), XmlError> {
        let start = self.pos;
        let mut depth = 0usize;
        while self.pos < self.src.len() {
            match self.src[self.pos] {
                b'[' => depth += 1,
                b']' => depth = depth.saturating_sub(1),
                b'>' if depth == 0 => {
                    self.pos += 1;
                    return Ok(());
                }
                _ => {}
            }
            self.pos += 1;
        }
        err(start, "unterminated DOCTYPE")
    }

    /// Next element event, or `None` at a well-formed end of document.
    pub fn next_event(&mut self) -> Result<Option<XmlEvent<'a>>, XmlError> {
        if let Some(name) = self.pending_end.take() {
            return Ok(Some(XmlEvent::End { name }));
        }
        loop {
            // text content
            while self.pos < self.src.len() && self.src[self.pos] != b'<' {
                let b = self.src[self.pos];
                if self.stack.is_empty() && !b.is_ascii_whitespace() {
                    return err(self.pos, "text outside the root element");
                }
                self.pos += 1;
            }
            if self.pos >= self.src.len() {
                if let Some(open) = self.stack.last() {
                    return err(self.src.len(), format!("unexpected end of input inside <{open}>"));
                }
                if !self.seen_root {
                    return err(self.src.len(), "document has no root element");
                }
                return Ok(None);
            }
            let tag_start = self.pos;
            if self.starts_with(b"<!--") {
                self.pos += 4;
                self.skip_past(b"-->", "comment")?;
            } else if self.starts_with(b"<?") {
                self.pos += 2;
                self.skip_past(b"?>", "processing instruction")?;
            } else if self.starts_with(b"<![CDATA[") {
                if self.stack.is_empty() {
                    return err(tag_start, "CDATA outside the root element");
                }
                self.pos += 9;
                self.skip_past(b"]]>", "CDATA section")?;
            } else if self.starts_with(b"<!") {
                self.pos += 2;
                self.skip_doctype()?;
            } else if self.starts_with(b"</") {
                self.pos += 2;
                let name = self.name()?;
                self.skip_ws();
                if self.src.get(self.pos) != Some(&b'>') {
                    return err(self.pos, format!("expected '>' to close </{name}"));
                }
                self.pos += 1;
                match self.stack.pop() {
                    Some(open) if open == name => return Ok(Some(XmlEvent::End { name })),
                    Some(open) => return err(tag_start, format!("closing tag </{name}> does not match <{open}>")),
                    None => return err(tag_start, format!("closing tag </{name}> without an open element")),
                }
            } else {
                self.pos += 1;
                return self.start_tag(tag_start).map(Some);
            }
        }
    }

    fn start_tag(&mut self, tag_start: usize) -> Result<XmlEvent<'a>, XmlError> {
        if self.stack.is_empty() && self.seen_root {
            return err(tag_start, "more than one root element");
        }
        let name = self.name()?;
        let mut attrs: Vec<(&'a str, String)> = Vec::new();
        loop {
            let before_ws = self.pos;
            self.skip_ws();
            match self.src.get(self.pos) {
                None => return err(tag_start, format!("unterminated tag <{name}")),
                Some(b'>') => {
                    self.pos += 1;
                    self.stack.push(name);
                    self.seen_root = true;
                    return Ok(XmlEvent::Start { name, attrs, offset: tag_start });
                }
                Some(b'/') => {
                    if self.src.get(self.pos + 1) != Some(&b'>') {
                        return err(self.pos, "expected '/>'");
                    }
                    self.pos += 2;
                    self.seen_root = true;
                    self.pending_end = Some(name);
                    return Ok(XmlEvent::Start { name, attrs, offset: tag_start });
                }
                Some(_) => {
                    if before_ws == self.pos {
                        return err(self.pos, "expected whitespace before attribute");
                    }
                    let attr_start = self.pos;
                    let key = self.name()?;
                    self.skip_ws();
                    if self.src.get(self.pos) != Some(&b'=') {
                        return err(self.pos, format!("expected '=' after attribute {key}"));
                    }
                    self.pos += 1;
                    self.skip_ws();
                    let quote = match self.src.get(self.pos) {
                        Some(&q @ (b'"' | b'\'')) => q,
                        _ => return err(self.pos, "expected quoted attribute value"),
                    };
                    self.pos += 1;
                    let value_start = self.pos;
                    while self.pos < self.src.len() && self.src[self.pos] != quote {
                        if self.src[self.pos] == b'<' {
                            return err(self.pos, "'<' inside attribute value");
                        }
                        self.pos += 1;
                    }
                    if self.pos >= self.src.len() {
                        return err(value_start, "unterminated attribute value");
                    }
                    let raw = &self.src[value_start..self.pos];
                    self.pos += 1;
                    if attrs.iter().any(|(k, _)| *k == key) {
                        return err(attr_start, format!("duplicate attribute {key}"));
                    }
                    attrs.push((key, decode_entities(raw, value_start)?));
                }
            }
        }
    }
}

fn decode_entities(raw: &[u8], offset: usize) -> Result<String, XmlError> {
    let text = std::str::from_utf8(raw).or_else(|e| err(offset + e.valid_up_to(), "attribute value is not valid UTF-8"))?;
    if !text.contains('&') {
        return Ok(text.to_string());
    }
    let mut out = String::with_capacity(text.len());
    let mut rest = text;
    let mut at = offset;
    while let Some(amp) = rest.find('&') {
        out.push_str(&rest[..amp]);
        let tail = &rest[amp..];
        let semi = tail.find(';').ok_or(XmlError { offset: at + amp, message: "unterminated entity".into() })?;
        let entity = &tail[1..semi];
        let decoded = match entity {
            "amp" => '&',
            "lt" => '<',
            "gt" => '>',
            "quot" => '"',
            "apos" => '\'',
            _ => {
                let code = if let Some(hex) = entity.strip_prefix("#x").or_else(|| entity.strip_prefix("#X")) {
                    u32::from_str_radix(hex, 16).ok()
                } else if let Some(dec) = entity.strip_prefix('#') {
                    dec.parse::<u32>().ok()
                } else {
                    None
                };
                code.and_then(char::from_u32).ok_or(XmlError { offset: at + amp, message: format!("unknown entity &{entity};") })?
            }
        };
        out.push(decoded);
        rest = &tail[semi + 1..];
        at += amp + semi + 1;
    }
    out.push_str(rest);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn events(src: &str) -> Result<Vec<String>, XmlError> {
        let mut r = XmlReader::new(src.as_bytes());
        let mut out = Vec::new();
        while let Some(ev) = r.next_event()? {
            out.push(match ev {
                XmlEvent::Start { name, attrs, .. } => {
                    let a: Vec<String> = attrs.into_iter().map(|(k, v)| format!("{k}={v}")).collect();
                    format!("+{name}[{}]", a.join(","))
                }
                XmlEvent::End { name } => format!("-{name}"),
            });
        }
        Ok(out)
    }

    #[test]
    fn tokenizes_nested_and_empty_elements() {
        let src = r#"<?xml version="1.0"?><!-- hi --><osm v='0.6'><node id="1" k="a &amp; b &#65;"/><way>txt</way></osm>"#;
        assert_eq!(events(src).unwrap(), vec!["+osm[v=0.6]", "+node[id=1,k=a & b A]", "-node", "+way[]", "-way", "-osm"]);
    }

    #[test]
    fn reports_offsets() {
        let e = events("<osm><node></osm>").unwrap_err();
        assert_eq!(e.offset, 11);
        let e = events("<osm a=\"1></osm>").unwrap_err();
        assert_eq!(e.offset, 10);
        assert!(events("<osm>").is_err());
        assert!(events("").is_err());
        assert!(events("<a/><b/>").is_err());
        assert!(events("<a x=\"&bogus;\"/>").is_err());
        assert!(events("<a x=\"1\" x=\"2\"/>").is_err());
    }

    proptest! {
        #[test]
        fn never_panics(bytes in prop::collection::vec(any::<u8>(), 0..200)) {
            let mut r = XmlReader::new(&bytes);
            for _ in 0..400 {
                match r.next_event() {
                    Ok(Some(_)) => {}
                    _ => break,
                }
            }
        }

        #[test]
        fn never_panics_on_xmlish_text(s in "[<>/=\"'a-z &#;!?\\[\\]-]{0,80}") {
            let _ = events(&s);
        }
    }
}
