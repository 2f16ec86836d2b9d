//! JSON file formats.
//!
//! Words are written as space-separated symbol names. When every symbol
//! name is a single character, a key without spaces is read character by
//! character.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::blockcode::SlidingBlockCode;
use crate::config::Limits;
use crate::decomp::{Decomposition, Decoration};
use crate::shiftspace::{Edge, Kind, Presentation, Symbol, Word};
use crate::thermo::{MarkovMeasure, Potential};
use crate::{Error, Result};

fn parse_err(m: impl Into<String>) -> Error {
    Error::Parse(m.into())
}

pub fn word_key(alphabet: &[String], w: &[Symbol]) -> String {
    w.iter().map(|&a| alphabet[a].as_str()).collect::<Vec<_>>().join(" ")
}

/// Reads a word written with [`word_key`].
pub fn parse_word(alphabet: &[String], key: &str) -> Result<Word> {
    let lookup = |n: &str| {
        alphabet
            .iter()
            .position(|a| a == n)
            .ok_or_else(|| parse_err(format!("unknown symbol {n:?} in word {key:?}")))
    };
    let key = key.trim();
    if key.is_empty() {
        return Ok(Vec::new());
    }
    if !key.contains(char::is_whitespace) && lookup(key).is_err() && alphabet.iter().all(|a| a.chars().count() == 1) {
        return key.chars().map(|c| lookup(&c.to_string())).collect();
    }
    key.split_whitespace().map(lookup).collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct PresentationFile {
    alphabet: Vec<String>,
    states: Vec<String>,
    edges: Vec<Value>,
    kind: Kind,
}

fn presentation_from_value(v: Value) -> Result<Presentation> {
    let f: PresentationFile = serde_json::from_value(v).map_err(|e| parse_err(format!("presentation: {e}")))?;
    let mut edges = Vec::with_capacity(f.edges.len());
    for (i, e) in f.edges.iter().enumerate() {
        let triple = e
            .as_array()
            .filter(|a| a.len() == 3)
            .and_then(|a| a.iter().map(|x| x.as_u64().map(|u| u as usize)).collect::<Option<Vec<_>>>())
            .ok_or_else(|| parse_err(format!("edge {i}: expected [src, dst, label] of non-negative integers, got {e}")))?;
        edges.push(Edge { src: triple[0], dst: triple[1], label: triple[2] });
    }
    Presentation::new(f.alphabet, f.states, edges, f.kind).map_err(|e| match e {
        Error::InvalidPresentation(m) => parse_err(m),
        other => other,
    })
}

pub fn presentation_from_json(text: &str) -> Result<Presentation> {
    presentation_from_value(serde_json::from_str(text)?)
}

pub fn presentation_to_value(p: &Presentation) -> Value {
    json!({
        "alphabet": p.alphabet(),
        "states": p.states(),
        "edges": p.edges().iter().map(|e| json!([e.src, e.dst, e.label])).collect::<Vec<_>>(),
        "kind": p.kind(),
    })
}

#[derive(Debug, Clone, Deserialize)]
struct CodeFile {
    domain: Value,
    codomain: Vec<String>,
    memory: usize,
    anticipation: usize,
    table: BTreeMap<String, Value>,
}

/// Reads a code. The domain is either an embedded presentation or a path,
/// resolved against `base` when relative.
pub fn code_from_json(text: &str, base: Option<&Path>, limits: &Limits) -> Result<SlidingBlockCode> {
    let f: CodeFile = serde_json::from_str(text).map_err(|e| parse_err(format!("code: {e}")))?;
    let domain = match &f.domain {
        Value::String(path) => {
            let mut p = PathBuf::from(path);
            if p.is_relative() {
                if let Some(b) = base {
                    p = b.join(p);
                }
            }
            presentation_from_json(&std::fs::read_to_string(&p)?)?
        }
        v => presentation_from_value(v.clone())?,
    };
    let mut table = BTreeMap::new();
    for (k, v) in &f.table {
        let w = parse_word(domain.alphabet(), k)?;
        let s = match v {
            Value::Number(n) => n.as_u64().map(|u| u as usize),
            Value::String(name) => f.codomain.iter().position(|c| c == name),
            _ => None,
        }
        .ok_or_else(|| parse_err(format!("table entry {k:?}: expected a codomain index or name, got {v}")))?;
        table.insert(w, s);
    }
    SlidingBlockCode::new(domain, f.codomain, f.memory, f.anticipation, table, limits)
}

pub fn code_to_value(c: &SlidingBlockCode) -> Value {
    let table: BTreeMap<String, Symbol> = c.table().iter().map(|(w, &s)| (word_key(c.domain().alphabet(), w), s)).collect();
    json!({
        "domain": presentation_to_value(c.domain()),
        "codomain": c.codomain(),
        "memory": c.memory(),
        "anticipation": c.anticipation(),
        "table": table,
    })
}

#[derive(Debug, Clone, Deserialize)]
struct PotentialFile {
    window: usize,
    table: BTreeMap<String, f64>,
}

pub fn potential_from_json(text: &str, x: &Presentation, limits: &Limits) -> Result<Potential> {
    let f: PotentialFile = serde_json::from_str(text).map_err(|e| parse_err(format!("potential: {e}")))?;
    let mut table = BTreeMap::new();
    for (k, v) in f.table {
        let w = parse_word(x.alphabet(), &k)?;
        if w.len() != f.window {
            return Err(parse_err(format!("potential entry {k:?} does not have length {}", f.window)));
        }
        table.insert(w, v);
    }
    Potential::new(x, f.window, table, limits)
}

pub fn potential_to_value(p: &Potential, x: &Presentation) -> Value {
    let table: BTreeMap<String, f64> = p.table.iter().map(|(w, &v)| (word_key(x.alphabet(), w), v)).collect();
    json!({ "window": p.window, "table": table })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct MeasureFile {
    order: usize,
    alphabet: Vec<String>,
    contexts: Vec<String>,
    transitions: Vec<Vec<f64>>,
    stationary: Vec<f64>,
}

pub fn measure_from_json(text: &str) -> Result<MarkovMeasure> {
    let f: MeasureFile = serde_json::from_str(text).map_err(|e| parse_err(format!("measure: {e}")))?;
    let contexts = f.contexts.iter().map(|c| parse_word(&f.alphabet, c)).collect::<Result<Vec<_>>>()?;
    MarkovMeasure::new(f.order, f.alphabet, contexts, f.transitions, f.stationary, 1e-9)
}

pub fn measure_to_value(mu: &MarkovMeasure) -> Value {
    serde_json::to_value(MeasureFile {
        order: mu.order,
        alphabet: mu.alphabet.clone(),
        contexts: mu.contexts.iter().map(|c| word_key(&mu.alphabet, c)).collect(),
        transitions: mu.transitions.clone(),
        stationary: mu.stationary.clone(),
    })
    .expect("plain data")
}

/// `Ỹ` with the decoration of each of its symbols.
pub fn ytilde_to_value(d: &Decomposition, y_names: &[String], x_names: &[String]) -> Value {
    let decorations: Vec<Value> = d
        .decorations
        .iter()
        .map(|dec: &Decoration| json!({ "y": y_names[dec.y], "mark": dec.mark.map(|a| x_names[a].clone()) }))
        .collect();
    let mut v = presentation_to_value(&d.ytilde);
    v["decorations"] = Value::Array(decorations);
    v
}

/// Reads the `ytilde.json` written by [`ytilde_to_value`] as a presentation.
pub fn ytilde_from_json(text: &str) -> Result<Presentation> {
    let mut v: Value = serde_json::from_str(text)?;
    if let Value::Object(m) = &mut v {
        m.remove("decorations");
    }
    presentation_from_value(v)
}

/// Transition block with symbols by index and by name.
pub fn transition_block_to_value(tb: &crate::classdeg::TransitionBlock, y_names: &[String], x_names: &[String]) -> Value {
    json!({
        "w": tb.w,
        "n": tb.n,
        "M": tb.m,
        "depth": tb.depth,
        "certified": tb.certified,
        "w_text": word_key(y_names, &tb.w),
        "M_text": tb.m.iter().map(|&a| x_names[a].clone()).collect::<Vec<_>>(),
    })
}

/// Byte-stable pretty JSON with a trailing newline.
pub fn to_pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}
