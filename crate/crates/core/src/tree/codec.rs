use std::collections::HashMap;
use std::io::Write;

use super::criterion::{ClassCounts, Criterion};
use super::model::{ClassLeaf, Node, Tree, TreeModel};
use crate::error::{Error, Result};
use crate::market_data::Label;

/// Text encoding of a leaf payload, written after `node <id> leaf`.
pub trait LeafCodec: Sized {
    fn encode(&self) -> String;
    fn decode(fields: &[&str]) -> std::result::Result<Self, String>;
}

impl LeafCodec for ClassLeaf {
    fn encode(&self) -> String {
        format!(
            "{} {} {}",
            self.label.signed(),
            self.counts.n_pos,
            self.counts.n_neg
        )
    }

    fn decode(fields: &[&str]) -> std::result::Result<Self, String> {
        let [label, n_pos, n_neg] = fields else {
            return Err(format!(
                "expected `<label> <n_pos> <n_neg>`, got {} fields",
                fields.len()
            ));
        };
        let label = label
            .parse::<i64>()
            .ok()
            .and_then(Label::from_signed)
            .ok_or_else(|| format!("bad leaf label `{label}`"))?;
        let n_pos = parse_field(n_pos, "n_pos")?;
        let n_neg = parse_field(n_neg, "n_neg")?;
        Ok(ClassLeaf {
            label,
            counts: ClassCounts::new(n_pos, n_neg),
        })
    }
}

pub(crate) fn parse_field<T: std::str::FromStr>(
    s: &str,
    what: &str,
) -> std::result::Result<T, String> {
    s.parse().map_err(|_| format!("bad {what} `{s}`"))
}

/// Line cursor over a model file. Blank lines are skipped; line numbers are
/// 1-based.
pub(crate) struct ModelLines<'a> {
    lines: std::iter::Peekable<std::iter::Enumerate<std::str::Lines<'a>>>,
}

impl<'a> ModelLines<'a> {
    pub(crate) fn new(text: &'a str) -> Self {
        ModelLines {
            lines: text.lines().enumerate().peekable(),
        }
    }

    fn skip_blank(&mut self) {
        while self.lines.peek().is_some_and(|(_, l)| l.trim().is_empty()) {
            self.lines.next();
        }
    }

    pub(crate) fn next_line(&mut self) -> Option<(usize, &'a str)> {
        self.skip_blank();
        self.lines.next().map(|(i, l)| (i + 1, l.trim()))
    }

    pub(crate) fn peek_line(&mut self) -> Option<&'a str> {
        self.skip_blank();
        self.lines.peek().map(|(_, l)| l.trim())
    }

    pub(crate) fn expect_end(&mut self) -> Result<()> {
        match self.next_line() {
            None => Ok(()),
            Some((line, text)) => Err(parse_error(
                line,
                format!("unexpected trailing line `{text}`"),
            )),
        }
    }
}

pub(crate) fn parse_error(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

/// Parses `<magic> v1 key=value ...`, requiring exactly the given keys.
pub(crate) fn parse_header(
    lines: &mut ModelLines<'_>,
    magic: &str,
    keys: &[&str],
) -> Result<(usize, HashMap<String, String>)> {
    let (line, text) = lines
        .next_line()
        .ok_or_else(|| parse_error(0, format!("missing `{magic}` header")))?;
    let mut parts = text.split_whitespace();
    if parts.next() != Some(magic) {
        return Err(parse_error(
            line,
            format!("expected `{magic}` header, got `{text}`"),
        ));
    }
    match parts.next() {
        Some("v1") => {}
        other => {
            return Err(parse_error(
                line,
                format!("unsupported {magic} format version {other:?}"),
            ))
        }
    }
    let mut map = HashMap::new();
    for part in parts {
        let (k, v) = part
            .split_once('=')
            .ok_or_else(|| parse_error(line, format!("expected key=value, got `{part}`")))?;
        if !keys.contains(&k) {
            return Err(parse_error(line, format!("unknown header key `{k}`")));
        }
        if map.insert(k.to_string(), v.to_string()).is_some() {
            return Err(parse_error(line, format!("duplicate header key `{k}`")));
        }
    }
    if let Some(missing) = keys.iter().find(|k| !map.contains_key(**k)) {
        return Err(parse_error(line, format!("header is missing `{missing}`")));
    }
    Ok((line, map))
}

pub(crate) fn header_value<T: std::str::FromStr>(
    map: &HashMap<String, String>,
    key: &str,
    line: usize,
) -> Result<T> {
    parse_field(&map[key], key).map_err(|m| parse_error(line, m))
}

impl<L: LeafCodec> Tree<L> {
    /// Writes the `node` lines; the caller writes the header.
    pub fn write_nodes<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        for (id, node) in self.nodes().iter().enumerate() {
            match node {
                Node::Internal {
                    feature,
                    threshold,
                    left,
                    right,
                } => writeln!(
                    out,
                    "node {id} internal {feature} {threshold:?} {left} {right}"
                )?,
                Node::Leaf(payload) => writeln!(out, "node {id} leaf {}", payload.encode())?,
            }
        }
        Ok(())
    }

    /// Reads consecutive `node` lines up to the next non-node line.
    pub(crate) fn read_nodes(lines: &mut ModelLines<'_>, n_features: usize) -> Result<Self> {
        let mut nodes = Vec::new();
        let mut first_line = 0;
        while lines.peek_line().is_some_and(|l| l.starts_with("node ")) {
            let (line, text) = lines.next_line().expect("peeked");
            if nodes.is_empty() {
                first_line = line;
            }
            nodes.push(parse_node(text, nodes.len()).map_err(|m| parse_error(line, m))?);
        }
        Tree::from_nodes(n_features, nodes).map_err(|e| parse_error(first_line, e.to_string()))
    }
}

fn parse_node<L: LeafCodec>(
    text: &str,
    expected_id: usize,
) -> std::result::Result<Node<L>, String> {
    let fields: Vec<&str> = text.split_whitespace().collect();
    if fields.len() < 3 {
        return Err(format!("truncated node line `{text}`"));
    }
    let id: usize = parse_field(fields[1], "node id")?;
    if id != expected_id {
        return Err(format!("expected node {expected_id}, found node {id}"));
    }
    match fields[2] {
        "internal" => {
            let [feature, threshold, left, right] = fields[3..] else {
                return Err("expected `internal <feature> <threshold> <left> <right>`".into());
            };
            Ok(Node::Internal {
                feature: parse_field(feature, "feature")?,
                threshold: parse_field(threshold, "threshold")?,
                left: parse_field(left, "left child")?,
                right: parse_field(right, "right child")?,
            })
        }
        "leaf" => L::decode(&fields[3..]).map(Node::Leaf),
        other => Err(format!("unknown node kind `{other}`")),
    }
}

impl TreeModel {
    pub fn write<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        writeln!(
            out,
            "tree v1 n_features={} criterion={}",
            self.tree.n_features(),
            self.criterion
        )?;
        self.tree.write_nodes(out)
    }

    pub fn to_text(&self) -> String {
        let mut buf = Vec::new();
        self.write(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("model text is ascii")
    }

    pub(crate) fn read_from(lines: &mut ModelLines<'_>) -> Result<Self> {
        let (line, header) = parse_header(lines, "tree", &["n_features", "criterion"])?;
        let n_features = header_value(&header, "n_features", line)?;
        let criterion: Criterion = header["criterion"]
            .parse()
            .map_err(|e: Error| parse_error(line, e.to_string()))?;
        let tree = Tree::read_nodes(lines, n_features)?;
        Ok(TreeModel { criterion, tree })
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = ModelLines::new(text);
        let model = Self::read_from(&mut lines)?;
        lines.expect_end()?;
        Ok(model)
    }
}
