use chrono::NaiveDate;
use quick_xml::escape::resolve_predefined_entity;
use quick_xml::events::{BytesStart, Event};
use quick_xml::Reader;

use super::{validate_document, AnnotatedDocument, Entity, EntityKind, Relation, RelationKind, Span};
use crate::diagnostic::{has_errors, Diagnostic};

const ROOT_TAG: &str = "doc";

struct OpenElement {
    kind: Option<EntityKind>,
    entity: Option<Entity>,
    rels: Vec<Relation>,
    start_byte: usize,
}

/// Parse the inline-XML annotation format.
///
/// Tags are stripped and entity spans index the remaining text in characters.
/// On any error diagnostic the whole document is rejected and every
/// diagnostic collected so far is returned.
pub fn parse_document(xml: &str, dct_override: Option<NaiveDate>) -> Result<AnnotatedDocument, Vec<Diagnostic>> {
    let mut reader = Reader::from_str(xml);
    let config = reader.config_mut();
    config.trim_text(false);
    config.expand_empty_elements = true;
    config.check_end_names = true;

    let mut diags = Vec::new();
    let mut text = String::new();
    let mut text_chars = 0usize;
    let mut stack: Vec<OpenElement> = Vec::new();
    let mut entities = Vec::new();
    let mut relations = Vec::new();
    let mut root_seen = false;
    let mut root_closed = false;
    let mut doc_id = String::new();
    let mut dct_attr: Option<(String, usize)> = None;

    loop {
        let at = char_offset(xml, reader.buffer_position() as usize);
        let event = match reader.read_event() {
            Ok(ev) => ev,
            Err(err) => {
                let loc = char_offset(xml, reader.error_position() as usize);
                diags.push(Diagnostic::error("xml.malformed", format!("malformed XML: {err}")).at(loc));
                return Err(diags);
            }
        };
        match event {
            Event::Start(start) => {
                let name = String::from_utf8_lossy(start.name().as_ref()).into_owned();
                if !root_seen {
                    root_seen = true;
                    if name != ROOT_TAG {
                        let msg = format!("root element must be <{ROOT_TAG}>, found <{name}>");
                        diags.push(Diagnostic::error("xml.root", msg).at(at));
                        return Err(diags);
                    }
                    read_root_attributes(&start, at, &mut doc_id, &mut dct_attr, &mut diags);
                    stack.push(OpenElement {
                        kind: None,
                        entity: None,
                        rels: Vec::new(),
                        start_byte: 0,
                    });
                    continue;
                }
                if root_closed {
                    diags.push(Diagnostic::error("xml.root", "content after the closing </doc>").at(at));
                    return Err(diags);
                }
                let Some(kind) = EntityKind::from_tag(&name) else {
                    diags.push(Diagnostic::error("tag.unknown", format!("unknown tag <{name}>")).at(at));
                    stack.push(OpenElement {
                        kind: None,
                        entity: None,
                        rels: Vec::new(),
                        start_byte: text.len(),
                    });
                    continue;
                };
                let (entity, rels) = read_entity_attributes(&start, kind, text_chars, at, &mut diags);
                stack.push(OpenElement {
                    kind: Some(kind),
                    entity: Some(entity),
                    rels,
                    start_byte: text.len(),
                });
            }
            Event::End(_) => {
                let Some(open) = stack.pop() else {
                    diags.push(Diagnostic::error("xml.malformed", "unexpected closing tag").at(at));
                    return Err(diags);
                };
                if stack.is_empty() {
                    root_closed = true;
                    continue;
                }
                if let (Some(_), Some(mut entity)) = (open.kind, open.entity) {
                    entity.span.end = text_chars;
                    entity.surface = text[open.start_byte..].to_string();
                    entities.push(entity);
                    relations.extend(open.rels);
                }
            }
            Event::Text(t) => {
                let content = match t.decode() {
                    Ok(c) => c,
                    Err(err) => {
                        diags.push(Diagnostic::error("xml.encoding", err.to_string()).at(at));
                        return Err(diags);
                    }
                };
                if stack.is_empty() {
                    if !content.trim().is_empty() {
                        diags.push(Diagnostic::error("xml.root", "text outside the <doc> element").at(at));
                        return Err(diags);
                    }
                    continue;
                }
                text_chars += content.chars().count();
                text.push_str(&content);
            }
            Event::CData(c) => {
                if stack.is_empty() {
                    diags.push(Diagnostic::error("xml.root", "CDATA outside the <doc> element").at(at));
                    return Err(diags);
                }
                let content = String::from_utf8_lossy(&c).into_owned();
                text_chars += content.chars().count();
                text.push_str(&content);
            }
            Event::GeneralRef(r) => {
                let resolved = match r.resolve_char_ref() {
                    Ok(Some(ch)) => Some(ch.to_string()),
                    Ok(None) => {
                        let name = String::from_utf8_lossy(&r).into_owned();
                        resolve_predefined_entity(&name).map(str::to_string)
                    }
                    Err(_) => None,
                };
                let Some(resolved) = resolved else {
                    let name = String::from_utf8_lossy(&r).into_owned();
                    diags.push(Diagnostic::error("xml.entity", format!("unknown entity reference &{name};")).at(at));
                    return Err(diags);
                };
                if stack.is_empty() {
                    diags.push(Diagnostic::error("xml.root", "text outside the <doc> element").at(at));
                    return Err(diags);
                }
                text_chars += resolved.chars().count();
                text.push_str(&resolved);
            }
            Event::Empty(_) => unreachable!("empty elements are expanded"),
            Event::Comment(_) | Event::Decl(_) | Event::PI(_) | Event::DocType(_) => {}
            Event::Eof => break,
        }
    }

    let end = xml.chars().count();
    if !root_seen {
        diags.push(Diagnostic::error("xml.root", format!("missing <{ROOT_TAG}> root element")).at(0));
    } else if !root_closed {
        diags.push(
            Diagnostic::error(
                "xml.unclosed",
                format!("unclosed element at end of input ({} open)", stack.len()),
            )
            .at(end),
        );
    }

    let dct = match (dct_override, dct_attr) {
        (Some(d), _) => Some(d),
        (None, Some((raw, at))) => match NaiveDate::parse_from_str(&raw, "%Y-%m-%d") {
            Ok(d) => Some(d),
            Err(_) => {
                let msg = format!("dct `{raw}` is not a YYYY-MM-DD date");
                diags.push(Diagnostic::error("dct.invalid", msg).at(at));
                None
            }
        },
        (None, None) => {
            if root_seen {
                let msg = "document has no `dct` attribute and no override was given";
                diags.push(Diagnostic::error("dct.missing", msg).at(0));
            }
            None
        }
    };

    let Some(dct) = dct.filter(|_| !has_errors(&diags)) else {
        return Err(diags);
    };
    let doc = AnnotatedDocument::new(doc_id, text, dct, entities, relations);
    diags.extend(validate_document(&doc));
    if has_errors(&diags) {
        return Err(diags);
    }
    Ok(doc)
}

fn read_root_attributes(
    start: &BytesStart<'_>,
    at: usize,
    doc_id: &mut String,
    dct: &mut Option<(String, usize)>,
    diags: &mut Vec<Diagnostic>,
) {
    for attr in start.attributes() {
        let attr = match attr {
            Ok(a) => a,
            Err(err) => {
                diags.push(Diagnostic::error("xml.attribute", format!("bad attribute on <doc>: {err}")).at(at));
                continue;
            }
        };
        let key = String::from_utf8_lossy(attr.key.as_ref()).into_owned();
        let value = match attr.unescape_value() {
            Ok(v) => v.into_owned(),
            Err(err) => {
                diags.push(Diagnostic::error("xml.attribute", format!("bad value for `{key}`: {err}")).at(at));
                continue;
            }
        };
        match key.as_str() {
            "id" => *doc_id = value,
            "dct" => *dct = Some((value, at)),
            _ => diags.push(Diagnostic::error("attr.unknown", format!("unknown attribute `{key}` on <doc>")).at(at)),
        }
    }
}

fn read_entity_attributes(
    start: &BytesStart<'_>,
    kind: EntityKind,
    text_pos: usize,
    at: usize,
    diags: &mut Vec<Diagnostic>,
) -> (Entity, Vec<Relation>) {
    let mut entity = Entity::new(String::new(), kind, Span::new(text_pos, text_pos), String::new());
    let mut rel_spec = None;
    let tag = kind.tag();
    for attr in start.attributes() {
        let attr = match attr {
            Ok(a) => a,
            Err(err) => {
                diags.push(Diagnostic::error("xml.attribute", format!("bad attribute on <{tag}>: {err}")).at(at));
                continue;
            }
        };
        let key = String::from_utf8_lossy(attr.key.as_ref()).into_owned();
        let value = match attr.unescape_value() {
            Ok(v) => v.into_owned(),
            Err(err) => {
                diags.push(Diagnostic::error("xml.attribute", format!("bad value for `{key}`: {err}")).at(at));
                continue;
            }
        };
        let bad_value = |diags: &mut Vec<Diagnostic>| {
            let msg = format!("invalid value `{value}` for `{key}` on <{tag}>");
            diags.push(Diagnostic::error("attr.value", msg).at(at));
        };
        match key.as_str() {
            "id" => entity.id = value.clone(),
            "certainty" => match value.parse() {
                Ok(c) => entity.certainty = Some(c),
                Err(()) => bad_value(diags),
            },
            "type" => match value.parse() {
                Ok(t) => entity.timex_type = Some(t),
                Err(()) => bad_value(diags),
            },
            "state" => match value.parse() {
                Ok(s) => entity.state = Some(s),
                Err(()) => bad_value(diags),
            },
            "rel" => rel_spec = Some(value.clone()),
            _ => diags.push(Diagnostic::error("attr.unknown", format!("unknown attribute `{key}` on <{tag}>")).at(at)),
        }
    }
    if entity.id.is_empty() {
        diags.push(Diagnostic::error("attr.missing", format!("<{tag}> element without `id`")).at(at));
    }
    let mut rels = Vec::new();
    if let Some(spec) = rel_spec {
        for item in spec.split(';').map(str::trim).filter(|s| !s.is_empty()) {
            let Some((kind, target)) = item.split_once(':') else {
                let msg = format!("relation `{item}` is not of the form kind:target");
                diags.push(Diagnostic::error("rel.syntax", msg).at(at));
                continue;
            };
            let (kind, target) = (kind.trim(), target.trim());
            match kind.parse::<RelationKind>() {
                Ok(k) if !target.is_empty() => rels.push(Relation::new(k, entity.id.clone(), target)),
                Ok(_) => {
                    let msg = format!("relation `{item}` has no target");
                    diags.push(Diagnostic::error("rel.syntax", msg).at(at));
                }
                Err(()) => {
                    let msg = format!("unknown relation kind `{kind}`");
                    diags.push(Diagnostic::error("rel.kind", msg).at(at));
                }
            }
        }
    }
    (entity, rels)
}

fn char_offset(source: &str, byte_pos: usize) -> usize {
    let end = byte_pos.min(source.len());
    source.as_bytes()[..end].iter().filter(|b| (**b & 0xC0) != 0x80).count()
}
