//! OBO 1.2 flat-file parser for `[Term]` stanzas.
//!
//! Recognized tags: `id`, `name`, `synonym`, `is_a`, `is_obsolete`, `xref`.
//! Everything else, including non-Term stanzas, is ignored.

use std::collections::HashSet;
use std::io::{BufRead, BufReader};
use std::path::Path;

use super::terms::{HierarchyEdge, OntologyParse, OntologyTerm, TermXref};
use crate::error::{Error, Result};

#[derive(Default)]
struct Stanza {
    id: Option<String>,
    name: Option<String>,
    synonyms: Vec<String>,
    parents: Vec<String>,
    xrefs: Vec<String>,
    obsolete: bool,
}

/// Drop an unescaped trailing `! comment`.
fn strip_comment(value: &str) -> &str {
    let bytes = value.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        match bytes[i] {
            b'\\' => i += 2,
            b'!' => return value[..i].trim_end(),
            _ => i += 1,
        }
    }
    value.trim_end()
}

/// First whitespace-delimited token of a reference value (`is_a`, `xref`).
fn reference(value: &str) -> Option<String> {
    strip_comment(value)
        .split_whitespace()
        .next()
        .map(str::to_string)
}

/// Contents of the leading quoted string, with OBO escapes resolved.
fn quoted(value: &str) -> Option<String> {
    let rest = value.trim_start().strip_prefix('"')?;
    let mut out = String::new();
    let mut chars = rest.chars();
    while let Some(c) = chars.next() {
        match c {
            '"' => return Some(out),
            '\\' => match chars.next()? {
                'n' => out.push('\n'),
                't' => out.push('\t'),
                other => out.push(other),
            },
            c => out.push(c),
        }
    }
    None
}

fn unescape(value: &str) -> String {
    let mut out = String::with_capacity(value.len());
    let mut chars = value.chars();
    while let Some(c) = chars.next() {
        if c == '\\' {
            if let Some(next) = chars.next() {
                out.push(next);
            }
        } else {
            out.push(c);
        }
    }
    out
}

fn flush(stanza: Stanza, ontology: &str, seen: &mut HashSet<String>, out: &mut OntologyParse) {
    let Some(id) = stanza.id.filter(|id| !id.is_empty()) else {
        out.reject("missing_id");
        return;
    };
    let label = stanza.name.unwrap_or_default();
    if label.is_empty() && !stanza.obsolete {
        out.reject("missing_name");
        return;
    }
    if !seen.insert(id.clone()) {
        out.reject("duplicate_id");
        return;
    }
    for parent in stanza.parents {
        if parent != id {
            out.edges.push(HierarchyEdge {
                child_id: id.clone(),
                parent_id: parent,
                relation: "is_a".into(),
            });
        }
    }
    for xref in stanza.xrefs {
        out.xrefs.push(TermXref {
            term_id: id.clone(),
            xref,
        });
    }
    out.terms.push(OntologyTerm {
        term_id: id,
        ontology: ontology.to_string(),
        label,
        synonyms: stanza.synonyms,
        obsolete: stanza.obsolete,
    });
}

/// Parse OBO text from any reader.
pub fn parse_obo_reader<R: BufRead>(reader: R, ontology: &str) -> std::io::Result<OntologyParse> {
    let mut out = OntologyParse::default();
    let mut seen = HashSet::new();
    let mut current: Option<Stanza> = None;

    for line in reader.lines() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('!') {
            continue;
        }
        if line.starts_with('[') && line.ends_with(']') {
            if let Some(stanza) = current.take() {
                flush(stanza, ontology, &mut seen, &mut out);
            }
            if line == "[Term]" {
                current = Some(Stanza::default());
            }
            continue;
        }
        let Some(stanza) = current.as_mut() else {
            continue;
        };
        let Some((tag, value)) = line.split_once(':') else {
            continue;
        };
        let value = value.trim();
        match tag.trim() {
            "id" => stanza.id = reference(value),
            "name" => stanza.name = Some(unescape(strip_comment(value))),
            "synonym" => {
                if let Some(s) = quoted(value).filter(|s| !s.is_empty()) {
                    stanza.synonyms.push(s);
                }
            }
            "is_a" => stanza.parents.extend(reference(value)),
            "xref" => stanza.xrefs.extend(reference(value)),
            "is_obsolete" => stanza.obsolete = strip_comment(value) == "true",
            _ => {}
        }
    }
    if let Some(stanza) = current.take() {
        flush(stanza, ontology, &mut seen, &mut out);
    }
    Ok(out)
}

/// Parse an OBO file. Stanzas without an `id:` are rejected and counted.
pub fn parse_obo(path: &Path, ontology: &str) -> Result<OntologyParse> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_obo_reader(BufReader::new(file), ontology).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> OntologyParse {
        parse_obo_reader(text.as_bytes(), "go").unwrap()
    }

    #[test]
    fn single_go_stanza() {
        let p = parse("[Term]\nid: GO:0008150\nname: biological_process\n");
        assert_eq!(
            p.terms,
            vec![OntologyTerm {
                term_id: "GO:0008150".into(),
                ontology: "go".into(),
                label: "biological_process".into(),
                synonyms: vec![],
                obsolete: false,
            }]
        );
        assert!(p.edges.is_empty());
    }

    #[test]
    fn is_a_comment_is_stripped() {
        let p = parse(
            "[Term]\nid: GO:0009987\nname: cellular process\nis_a: GO:0008150 ! biological_process\n",
        );
        assert_eq!(
            p.edges,
            vec![HierarchyEdge {
                child_id: "GO:0009987".into(),
                parent_id: "GO:0008150".into(),
                relation: "is_a".into(),
            }]
        );
    }

    #[test]
    fn obsolete_without_name_is_kept() {
        let p = parse("[Term]\nid: GO:0000001\nis_obsolete: true\n");
        assert_eq!(p.terms.len(), 1);
        assert!(p.terms[0].obsolete);
        assert_eq!(p.terms[0].label, "");
    }

    #[test]
    fn synonyms_take_the_quoted_text() {
        let p = parse(concat!(
            "format-version: 1.2\n\n",
            "[Term]\nid: GO:1\nname: a\n",
            "synonym: \"cell \\\"growth\\\"\" EXACT []\n",
            "synonym: \"x ! not a comment\" RELATED [GOC:x]\n",
            "xref: Wikipedia:Cell ! comment\n",
        ));
        assert_eq!(p.terms[0].synonyms, ["cell \"growth\"", "x ! not a comment"]);
        assert_eq!(p.xrefs[0].xref, "Wikipedia:Cell");
    }

    #[test]
    fn missing_id_and_typedef() {
        let p = parse(concat!(
            "[Term]\nname: nameless\n\n",
            "[Typedef]\nid: part_of\nname: part of\n\n",
            "[Term]\nid: GO:2\nname: b\nis_a: GO:2\n",
        ));
        assert_eq!(p.terms.len(), 1);
        assert_eq!(p.rejected["missing_id"], 1);
        // self loops are not edges
        assert!(p.edges.is_empty());
    }

    #[test]
    fn stanza_order_is_preserved() {
        let p = parse("[Term]\nid: B\nname: b\n[Term]\nid: A\nname: a\n[Term]\nid: B\nname: c\n");
        let ids: Vec<_> = p.terms.iter().map(|t| t.term_id.as_str()).collect();
        assert_eq!(ids, ["B", "A"]);
        assert_eq!(p.rejected["duplicate_id"], 1);
    }
}
