//! Reader for the dense ARFF subset: numeric and nominal attributes, no
//! missing values.

use std::path::Path;

use mlseq_core::transform::Sequence;
use mlseq_core::{Dataset, FeatureKind, FeatureVector, Instance, LabelSchema, Value};

use crate::error::{read_to_string, IoError, IoResult};
use crate::SequenceData;

#[derive(Debug, Clone, PartialEq)]
pub enum AttributeKind {
    Numeric,
    /// Declared values; a value's code is its index here.
    Nominal(Vec<String>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Attribute {
    pub name: String,
    pub kind: AttributeKind,
}

impl Attribute {
    pub fn feature_kind(&self) -> FeatureKind {
        match &self.kind {
            AttributeKind::Numeric => FeatureKind::Numeric,
            AttributeKind::Nominal(values) => FeatureKind::Categorical {
                cardinality: values.len() as u32,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Arff {
    pub relation: String,
    pub attributes: Vec<Attribute>,
    pub rows: Vec<Vec<Value>>,
}

fn unquote(s: &str) -> &str {
    let s = s.trim();
    for q in ['\'', '"'] {
        if s.len() >= 2 && s.starts_with(q) && s.ends_with(q) {
            return &s[1..s.len() - 1];
        }
    }
    s
}

/// Splits `s` at the first whitespace outside quotes.
fn split_token(s: &str) -> (&str, &str) {
    let s = s.trim_start();
    let mut quote = None;
    for (i, c) in s.char_indices() {
        match quote {
            Some(q) if c == q => quote = None,
            Some(_) => {}
            None if c == '\'' || c == '"' => quote = Some(c),
            None if c.is_whitespace() => return (&s[..i], s[i..].trim()),
            None => {}
        }
    }
    (s, "")
}

/// Comma-separated fields, honouring single and double quotes.
fn split_fields(s: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut quote = None;
    for c in s.chars() {
        match quote {
            Some(q) if c == q => quote = None,
            Some(_) => cur.push(c),
            None if c == '\'' || c == '"' => quote = Some(c),
            None if c == ',' => out.push(std::mem::take(&mut cur).trim().to_string()),
            None => cur.push(c),
        }
    }
    out.push(cur.trim().to_string());
    out
}

fn parse_attribute(rest: &str, line: usize) -> IoResult<Attribute> {
    let (name, ty) = split_token(rest);
    if name.is_empty() || ty.is_empty() {
        return Err(IoError::parse(line, "attribute needs a name and a type"));
    }
    let kind = if let Some(body) = ty.strip_prefix('{') {
        let body = body
            .strip_suffix('}')
            .ok_or_else(|| IoError::parse(line, "unterminated nominal declaration"))?;
        let values = split_fields(body);
        if values.iter().any(String::is_empty) {
            return Err(IoError::parse(line, "empty nominal value"));
        }
        AttributeKind::Nominal(values)
    } else {
        match ty.to_ascii_lowercase().as_str() {
            "numeric" | "real" | "integer" => AttributeKind::Numeric,
            other => return Err(IoError::parse(line, format!("unsupported attribute type `{other}`"))),
        }
    };
    Ok(Attribute {
        name: unquote(name).to_string(),
        kind,
    })
}

fn parse_row(text: &str, attributes: &[Attribute], line: usize) -> IoResult<Vec<Value>> {
    if text.starts_with('{') {
        return Err(IoError::parse(line, "sparse rows are not supported"));
    }
    let fields = split_fields(text);
    if fields.len() != attributes.len() {
        return Err(IoError::parse(
            line,
            format!("expected {} values, found {}", attributes.len(), fields.len()),
        ));
    }
    fields
        .iter()
        .zip(attributes)
        .map(|(f, a)| {
            if f == "?" {
                return Err(IoError::parse(line, format!("missing value for `{}`", a.name)));
            }
            match &a.kind {
                AttributeKind::Numeric => f
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .map(Value::Num)
                    .ok_or_else(|| IoError::parse(line, format!("`{f}` is not a number ({})", a.name))),
                AttributeKind::Nominal(values) => values
                    .iter()
                    .position(|v| v == f)
                    .map(|c| Value::Cat(c as u32))
                    .ok_or_else(|| IoError::parse(line, format!("undeclared value `{f}` for `{}`", a.name))),
            }
        })
        .collect()
}

pub fn parse_arff(text: &str) -> IoResult<Arff> {
    let mut relation = String::new();
    let mut attributes = Vec::new();
    let mut rows = Vec::new();
    let mut in_data = false;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let s = raw.trim();
        if s.is_empty() || s.starts_with('%') {
            continue;
        }
        if in_data {
            rows.push(parse_row(s, &attributes, line)?);
            continue;
        }
        let (keyword, rest) = split_token(s);
        match keyword.to_ascii_lowercase().as_str() {
            "@relation" => relation = unquote(rest).to_string(),
            "@attribute" => attributes.push(parse_attribute(rest, line)?),
            "@data" => {
                if attributes.is_empty() {
                    return Err(IoError::parse(line, "@data before any @attribute"));
                }
                in_data = true;
            }
            other => return Err(IoError::parse(line, format!("unexpected `{other}` in header"))),
        }
    }
    if !in_data {
        return Err(IoError::Format("no @data section".into()));
    }
    Ok(Arff {
        relation,
        attributes,
        rows,
    })
}

pub fn load_arff(path: &Path) -> IoResult<Arff> {
    parse_arff(&read_to_string(path)?).map_err(|e| match e {
        IoError::Parse { line, reason } => IoError::Format(format!("{}:{line}: {reason}", path.display())),
        other => other,
    })
}

impl Arff {
    pub fn attribute_index(&self, name: &str) -> Option<usize> {
        self.attributes.iter().position(|a| a.name == name)
    }

    fn class_column(&self, class: Option<usize>) -> IoResult<(usize, &[String])> {
        let c = class.unwrap_or(self.attributes.len() - 1);
        let attr = self
            .attributes
            .get(c)
            .ok_or_else(|| IoError::Format(format!("class attribute {c} out of range")))?;
        match &attr.kind {
            AttributeKind::Nominal(values) if values.len() >= 2 => Ok((c, values)),
            _ => Err(IoError::Format(format!(
                "class attribute `{}` must be nominal with at least two values",
                attr.name
            ))),
        }
    }

    /// The whole file as one time-ordered stream: the class attribute is the
    /// state, every other attribute an emission feature.
    pub fn to_sequences(&self, class: Option<usize>) -> IoResult<SequenceData> {
        let (c, states) = self.class_column(class)?;
        let keep: Vec<usize> = (0..self.attributes.len()).filter(|&j| j != c).collect();
        let emissions = self
            .rows
            .iter()
            .map(|r| FeatureVector(keep.iter().map(|&j| r[j]).collect()))
            .collect();
        let labels = self.rows.iter().map(|r| r[c].as_cat().expect("nominal")).collect();
        let id = if self.relation.is_empty() {
            "arff"
        } else {
            &self.relation
        };
        Ok(SequenceData {
            feature_names: keep.iter().map(|&j| self.attributes[j].name.clone()).collect(),
            features: keep.iter().map(|&j| self.attributes[j].feature_kind()).collect(),
            state_names: states.to_vec(),
            sequences: vec![Sequence::new(id, emissions, labels)],
        })
    }

    /// One instance per row with the class as a single label.
    pub fn to_dataset(&self, class: Option<usize>) -> IoResult<Dataset> {
        let (c, states) = self.class_column(class)?;
        let keep: Vec<usize> = (0..self.attributes.len()).filter(|&j| j != c).collect();
        let instances = self
            .rows
            .iter()
            .map(|r| {
                Instance::new(
                    keep.iter().map(|&j| r[j]).collect::<Vec<_>>(),
                    vec![r[c].as_cat().expect("nominal")],
                )
            })
            .collect();
        Ok(Dataset::new(
            self.relation.clone(),
            LabelSchema::new(vec![states.len() as u32])?,
            keep.iter().map(|&j| self.attributes[j].feature_kind()).collect(),
            instances,
        ))
    }
}
