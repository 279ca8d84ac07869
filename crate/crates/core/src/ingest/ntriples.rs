//! Line-oriented N-Triples reader with a SKOS term extractor on top.

use std::collections::HashMap;
use std::io::{BufRead, BufReader};
use std::path::Path;

use super::terms::{HierarchyEdge, OntologyParse, OntologyTerm};
use crate::error::{Error, Result};

pub const SKOS_PREF_LABEL: &str = "http://www.w3.org/2004/02/skos/core#prefLabel";
pub const SKOS_ALT_LABEL: &str = "http://www.w3.org/2004/02/skos/core#altLabel";
pub const SKOS_BROADER: &str = "http://www.w3.org/2004/02/skos/core#broader";

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Node {
    Iri(String),
    Blank(String),
    Literal {
        value: String,
        lang: Option<String>,
        datatype: Option<String>,
    },
}

impl Node {
    fn resource_id(&self) -> Option<String> {
        match self {
            Node::Iri(iri) => Some(iri.clone()),
            Node::Blank(label) => Some(format!("_:{label}")),
            Node::Literal { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Triple {
    pub subject: Node,
    pub predicate: String,
    pub object: Node,
}

struct Cursor<'a> {
    s: &'a str,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn rest(&self) -> &'a str {
        &self.s[self.pos..]
    }

    fn skip_ws(&mut self) {
        let trimmed = self.rest().trim_start_matches([' ', '\t']);
        self.pos = self.s.len() - trimmed.len();
    }

    fn peek(&self) -> Option<char> {
        self.rest().chars().next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        Some(c)
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn hex(&mut self, n: usize) -> Option<char> {
        let digits = self.rest().get(..n)?;
        let code = u32::from_str_radix(digits, 16).ok()?;
        self.pos += n;
        char::from_u32(code)
    }

    fn iri(&mut self) -> Option<String> {
        if !self.eat('<') {
            return None;
        }
        let mut out = String::new();
        loop {
            match self.bump()? {
                '>' => return Some(out),
                '\\' => match self.bump()? {
                    'u' => out.push(self.hex(4)?),
                    'U' => out.push(self.hex(8)?),
                    _ => return None,
                },
                c if c.is_whitespace() || c == '<' || c == '"' => return None,
                c => out.push(c),
            }
        }
    }

    fn blank(&mut self) -> Option<String> {
        if !self.rest().starts_with("_:") {
            return None;
        }
        self.pos += 2;
        let start = self.pos;
        while let Some(c) = self.peek() {
            if c.is_whitespace() {
                break;
            }
            self.pos += c.len_utf8();
        }
        let label = self.s[start..self.pos].trim_end_matches('.');
        self.pos = start + label.len();
        (!label.is_empty()).then(|| label.to_string())
    }

    fn literal(&mut self) -> Option<Node> {
        if !self.eat('"') {
            return None;
        }
        let mut value = String::new();
        loop {
            match self.bump()? {
                '"' => break,
                '\\' => value.push(match self.bump()? {
                    't' => '\t',
                    'b' => '\u{8}',
                    'n' => '\n',
                    'r' => '\r',
                    'f' => '\u{c}',
                    '"' => '"',
                    '\'' => '\'',
                    '\\' => '\\',
                    'u' => self.hex(4)?,
                    'U' => self.hex(8)?,
                    _ => return None,
                }),
                c => value.push(c),
            }
        }
        let mut lang = None;
        let mut datatype = None;
        if self.eat('@') {
            let start = self.pos;
            while let Some(c) = self.peek() {
                if c.is_ascii_alphanumeric() || c == '-' {
                    self.pos += 1;
                } else {
                    break;
                }
            }
            if self.pos == start {
                return None;
            }
            lang = Some(self.s[start..self.pos].to_string());
        } else if self.rest().starts_with("^^") {
            self.pos += 2;
            datatype = Some(self.iri()?);
        }
        Some(Node::Literal {
            value,
            lang,
            datatype,
        })
    }
}

/// Parse one N-Triples line. `Ok(None)` for blank and comment lines.
pub fn parse_line(line: &str) -> std::result::Result<Option<Triple>, ()> {
    let mut c = Cursor { s: line, pos: 0 };
    c.skip_ws();
    match c.peek() {
        None | Some('#') => return Ok(None),
        _ => {}
    }
    let subject = if let Some(iri) = c.iri() {
        Node::Iri(iri)
    } else if let Some(b) = c.blank() {
        Node::Blank(b)
    } else {
        return Err(());
    };
    c.skip_ws();
    let predicate = c.iri().ok_or(())?;
    c.skip_ws();
    let object = match c.peek() {
        Some('<') => Node::Iri(c.iri().ok_or(())?),
        Some('_') => Node::Blank(c.blank().ok_or(())?),
        Some('"') => c.literal().ok_or(())?,
        _ => return Err(()),
    };
    c.skip_ws();
    if !c.eat('.') {
        return Err(());
    }
    c.skip_ws();
    match c.peek() {
        None | Some('#') => Ok(Some(Triple {
            subject,
            predicate,
            object,
        })),
        _ => Err(()),
    }
}

#[derive(Default)]
struct Concept {
    labels: Vec<(String, Option<String>)>,
    alt: Vec<String>,
}

fn is_english(lang: &Option<String>) -> bool {
    lang.as_deref().is_some_and(|l| {
        let l = l.to_ascii_lowercase();
        l == "en" || l.starts_with("en-")
    })
}

/// English label first, then untagged, then the first seen.
fn choose_label(labels: &[(String, Option<String>)]) -> String {
    labels
        .iter()
        .find(|(_, lang)| is_english(lang))
        .or_else(|| labels.iter().find(|(_, lang)| lang.is_none()))
        .or_else(|| labels.first())
        .map(|(v, _)| v.clone())
        .unwrap_or_default()
}

/// Extract SKOS concepts from N-Triples text.
pub fn parse_skos_reader<R: BufRead>(reader: R, ontology: &str) -> std::io::Result<OntologyParse> {
    let mut out = OntologyParse::default();
    let mut order: Vec<String> = Vec::new();
    let mut concepts: HashMap<String, Concept> = HashMap::new();

    fn concept<'m>(
        concepts: &'m mut HashMap<String, Concept>,
        order: &mut Vec<String>,
        id: String,
    ) -> &'m mut Concept {
        if !concepts.contains_key(&id) {
            order.push(id.clone());
        }
        concepts.entry(id).or_default()
    }

    let mut skos_edges = Vec::new();
    for line in reader.lines() {
        let line = line?;
        let triple = match parse_line(&line) {
            Ok(Some(t)) => t,
            Ok(None) => continue,
            Err(()) => {
                out.reject("invalid_line");
                continue;
            }
        };
        let Some(subject) = triple.subject.resource_id() else {
            continue;
        };
        match (triple.predicate.as_str(), triple.object) {
            (SKOS_PREF_LABEL, Node::Literal { value, lang, .. }) => {
                concept(&mut concepts, &mut order, subject).labels.push((value, lang));
            }
            (SKOS_ALT_LABEL, Node::Literal { value, .. }) => {
                let c = concept(&mut concepts, &mut order, subject);
                if !c.alt.contains(&value) {
                    c.alt.push(value);
                }
            }
            (SKOS_BROADER, obj @ (Node::Iri(_) | Node::Blank(_))) => {
                let parent = obj.resource_id().expect("resource object");
                concept(&mut concepts, &mut order, subject.clone());
                if parent != subject {
                    skos_edges.push(HierarchyEdge {
                        child_id: subject,
                        parent_id: parent,
                        relation: "broader".into(),
                    });
                }
            }
            _ => {}
        }
    }

    for id in order {
        let c = concepts.remove(&id).expect("ordered id present");
        out.terms.push(OntologyTerm {
            label: choose_label(&c.labels),
            synonyms: c.alt,
            term_id: id,
            ontology: ontology.to_string(),
            obsolete: false,
        });
    }
    out.edges = skos_edges;
    Ok(out)
}

/// Parse a SKOS vocabulary serialized as N-Triples.
pub fn parse_skos_ntriples(path: &Path, ontology: &str) -> Result<OntologyParse> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_skos_reader(BufReader::new(file), ontology).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pref(s: &str, label: &str) -> String {
        format!("<{s}> <{SKOS_PREF_LABEL}> {label} .\n")
    }

    #[test]
    fn single_pref_label() {
        let text = pref("http://x/c1", "\"Soil science\"@en");
        let p = parse_skos_reader(text.as_bytes(), "agrovoc").unwrap();
        assert_eq!(p.terms.len(), 1);
        assert_eq!(p.terms[0].term_id, "http://x/c1");
        assert_eq!(p.terms[0].label, "Soil science");
        assert!(p.terms[0].synonyms.is_empty());
    }

    #[test]
    fn english_label_preferred() {
        let text = pref("http://x/c1", "\"Science du sol\"@fr") + &pref("http://x/c1", "\"Soil science\"@en");
        let p = parse_skos_reader(text.as_bytes(), "agrovoc").unwrap();
        assert_eq!(p.terms[0].label, "Soil science");
    }

    #[test]
    fn untagged_beats_other_languages() {
        let text = pref("http://x/c1", "\"Bodenkunde\"@de") + &pref("http://x/c1", "\"soil\"");
        let p = parse_skos_reader(text.as_bytes(), "o").unwrap();
        assert_eq!(p.terms[0].label, "soil");
    }

    #[test]
    fn alt_labels_and_broader() {
        let text = format!(
            "{}<http://x/c2> <{SKOS_ALT_LABEL}> \"pedology\"@en .\n<http://x/c2> <{SKOS_BROADER}> <http://x/c1> .\n<http://x/c2> <http://example.org/other> \"ignored\" .\n",
            pref("http://x/c2", "\"Soil\"")
        );
        let p = parse_skos_reader(text.as_bytes(), "o").unwrap();
        assert_eq!(p.terms[0].synonyms, ["pedology"]);
        assert_eq!(
            p.edges,
            vec![HierarchyEdge {
                child_id: "http://x/c2".into(),
                parent_id: "http://x/c1".into(),
                relation: "broader".into()
            }]
        );
        assert!(p.rejected.is_empty());
    }

    #[test]
    fn invalid_lines_counted() {
        let text = format!("# comment\n\nnot a triple\n<a> <b> \"unterminated .\n{}", pref("http://x/1", "\"a\""));
        let p = parse_skos_reader(text.as_bytes(), "o").unwrap();
        assert_eq!(p.rejected["invalid_line"], 2);
        assert_eq!(p.terms.len(), 1);
    }

    #[test]
    fn literal_escapes_and_datatypes() {
        let t = parse_line(r#"_:b1 <http://p> "a\"bé"^^<http://www.w3.org/2001/XMLSchema#string> . # trailing"#)
            .unwrap()
            .unwrap();
        assert_eq!(t.subject, Node::Blank("b1".into()));
        assert_eq!(
            t.object,
            Node::Literal {
                value: "a\"bé".into(),
                lang: None,
                datatype: Some("http://www.w3.org/2001/XMLSchema#string".into())
            }
        );
        assert!(parse_line("<a> <b> <c>").is_err());
        assert!(parse_line("<a> <b> <c> . junk").is_err());
        assert_eq!(
            parse_line("<a> <b> _:x.").unwrap().unwrap().object,
            Node::Blank("x".into())
        );
    }
}
