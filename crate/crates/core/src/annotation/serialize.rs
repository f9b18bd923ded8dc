use std::fmt::Write as _;

use super::{AnnotatedDocument, Entity};

/// Emit the inline-XML wire form. Output depends only on the canonical order
/// of the document, so repeated calls are byte-identical.
pub fn serialize_document(doc: &AnnotatedDocument) -> String {
    let mut canonical;
    let doc = if is_canonical(doc) {
        doc
    } else {
        canonical = doc.clone();
        canonical.canonicalize();
        &canonical
    };

    let mut out = String::with_capacity(doc.text.len() + doc.entities.len() * 32);
    out.push_str("<doc");
    if !doc.doc_id.is_empty() {
        write_attr(&mut out, "id", &doc.doc_id);
    }
    write_attr(&mut out, "dct", &doc.dct.format("%Y-%m-%d").to_string());
    out.push('>');

    let mut next = 0;
    let mut open: Vec<&Entity> = Vec::new();
    let chars: Vec<char> = doc.text.chars().collect();
    for pos in 0..=chars.len() {
        while open.last().is_some_and(|e| e.span.end == pos) {
            let e = open.pop().expect("checked");
            let _ = write!(out, "</{}>", e.kind.tag());
        }
        while let Some(e) = doc.entities.get(next).filter(|e| e.span.start == pos) {
            open_tag(&mut out, doc, e);
            open.push(e);
            next += 1;
        }
        if let Some(&ch) = chars.get(pos) {
            escape_char(&mut out, ch);
        }
    }
    while let Some(e) = open.pop() {
        let _ = write!(out, "</{}>", e.kind.tag());
    }
    out.push_str("</doc>");
    out
}

fn is_canonical(doc: &AnnotatedDocument) -> bool {
    let mut copy = doc.clone();
    copy.canonicalize();
    copy.entities == doc.entities && copy.relations == doc.relations
}

fn open_tag(out: &mut String, doc: &AnnotatedDocument, e: &Entity) {
    out.push('<');
    out.push_str(e.kind.tag());
    write_attr(out, "id", &e.id);
    if let Some(c) = e.certainty {
        write_attr(out, "certainty", c.as_str());
    }
    if let Some(t) = e.timex_type {
        write_attr(out, "type", t.as_str());
    }
    if let Some(s) = e.state {
        write_attr(out, "state", s.as_str());
    }
    let rels: Vec<String> = doc
        .relations
        .iter()
        .filter(|r| r.source_id == e.id)
        .map(|r| format!("{}:{}", r.kind, r.target_id))
        .collect();
    if !rels.is_empty() {
        write_attr(out, "rel", &rels.join(";"));
    }
    out.push('>');
}

fn write_attr(out: &mut String, name: &str, value: &str) {
    let _ = write!(out, " {name}=\"");
    for ch in value.chars() {
        match ch {
            '"' => out.push_str("&quot;"),
            '\n' => out.push_str("&#10;"),
            '\r' => out.push_str("&#13;"),
            '\t' => out.push_str("&#9;"),
            _ => escape_char(out, ch),
        }
    }
    out.push('"');
}

fn escape_char(out: &mut String, ch: char) {
    match ch {
        '&' => out.push_str("&amp;"),
        '<' => out.push_str("&lt;"),
        '>' => out.push_str("&gt;"),
        '\r' => out.push_str("&#13;"),
        _ => out.push(ch),
    }
}
