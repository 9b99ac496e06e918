//! CSV formats: raw sequence files, the canonical typed dataset file and
//! prediction files.
//!
//! Column types are written as header suffixes: `name:num`, `name:cat:K`
//! (codes `0..K`) and, in dataset files, `name:label:K`.

use std::collections::BTreeSet;
use std::io::{Read, Write};
use std::path::Path;

use mlseq_core::transform::Sequence;
use mlseq_core::{Dataset, FeatureKind, FeatureVector, Instance, LabelSchema, LabelVector, Value};

use crate::error::{IoError, IoResult};
use crate::SequenceData;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ColumnType {
    Untyped,
    Num,
    Cat(Option<u32>),
    Label(u32),
}

fn parse_header(h: &str) -> IoResult<(String, ColumnType)> {
    let mut parts = h.split(':');
    let name = parts.next().unwrap_or("").trim().to_string();
    let ty = match (parts.next(), parts.next(), parts.next()) {
        (None, _, _) => ColumnType::Untyped,
        (Some("num"), None, _) => ColumnType::Num,
        (Some("cat"), None, _) => ColumnType::Cat(None),
        (Some("cat"), Some(k), None) => ColumnType::Cat(Some(parse_card(h, k)?)),
        (Some("label"), Some(k), None) => ColumnType::Label(parse_card(h, k)?),
        _ => return Err(IoError::Format(format!("bad column header `{h}`"))),
    };
    Ok((name, ty))
}

fn parse_card(h: &str, k: &str) -> IoResult<u32> {
    k.parse::<u32>()
        .ok()
        .filter(|&k| k >= 1)
        .ok_or_else(|| IoError::Format(format!("bad cardinality in header `{h}`")))
}

fn reader<R: Read>(r: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(r)
}

/// A column decoded into values, plus its kind and (for symbols) the
/// alphabet in code order.
struct Decoded {
    kind: FeatureKind,
    values: Vec<Value>,
    symbols: Vec<String>,
}

fn decode_column(name: &str, ty: ColumnType, cells: &[&str], first_line: usize) -> IoResult<Decoded> {
    let bad = |i: usize, what: &str| IoError::parse(first_line + i, format!("column `{name}`: {what}"));
    let numeric = |cells: &[&str]| -> Option<Vec<Value>> {
        cells
            .iter()
            .map(|c| c.parse::<f64>().ok().filter(|v| v.is_finite()).map(Value::Num))
            .collect()
    };
    match ty {
        ColumnType::Num => {
            let values = cells
                .iter()
                .enumerate()
                .map(|(i, c)| {
                    c.parse::<f64>()
                        .ok()
                        .filter(|v| v.is_finite())
                        .map(Value::Num)
                        .ok_or_else(|| bad(i, &format!("`{c}` is not a finite number")))
                })
                .collect::<IoResult<_>>()?;
            Ok(Decoded {
                kind: FeatureKind::Numeric,
                values,
                symbols: Vec::new(),
            })
        }
        ColumnType::Cat(Some(k)) | ColumnType::Label(k) => {
            let values = cells
                .iter()
                .enumerate()
                .map(|(i, c)| match c.parse::<u32>() {
                    Ok(v) if v < k => Ok(Value::Cat(v)),
                    _ => Err(bad(i, &format!("`{c}` is not a code below {k}"))),
                })
                .collect::<IoResult<_>>()?;
            Ok(Decoded {
                kind: FeatureKind::Categorical { cardinality: k },
                values,
                symbols: (0..k).map(|v| v.to_string()).collect(),
            })
        }
        ColumnType::Untyped if numeric(cells).is_some() => Ok(Decoded {
            kind: FeatureKind::Numeric,
            values: numeric(cells).unwrap_or_default(),
            symbols: Vec::new(),
        }),
        ColumnType::Cat(None) | ColumnType::Untyped => {
            if let Some(i) = cells.iter().position(|c| c.is_empty()) {
                return Err(bad(i, "empty cell"));
            }
            let symbols: Vec<String> = cells
                .iter()
                .copied()
                .collect::<BTreeSet<_>>()
                .into_iter()
                .map(str::to_string)
                .collect();
            let values = cells
                .iter()
                .map(|c| Value::Cat(symbols.binary_search_by(|s| s.as_str().cmp(c)).unwrap_or(0) as u32))
                .collect();
            Ok(Decoded {
                kind: FeatureKind::Categorical {
                    cardinality: symbols.len() as u32,
                },
                values,
                symbols,
            })
        }
    }
}

/// Decodes the state column: non-negative integers are used as codes
/// directly (cardinality `max + 1`, at least 2, or the declared `:cat:K`);
/// anything else is a symbol coded in sorted order.
fn decode_states(name: &str, ty: ColumnType, cells: &[&str], first_line: usize) -> IoResult<(Vec<u32>, Vec<String>)> {
    let ints: Option<Vec<u32>> = cells.iter().map(|c| c.parse::<u32>().ok()).collect();
    let ty = match (ty, ints) {
        (ColumnType::Untyped, Some(ints)) => {
            let k = ints.iter().max().map_or(0, |m| m + 1).max(2);
            ColumnType::Cat(Some(k))
        }
        (ColumnType::Untyped, None) => ColumnType::Cat(None),
        (ColumnType::Num, _) => return Err(IoError::Format(format!("state column `{name}` cannot be numeric"))),
        (other, _) => other,
    };
    let d = decode_column(name, ty, cells, first_line)?;
    let mut symbols = d.symbols;
    if symbols.len() == 1 {
        // a single observed symbol still needs a two-state schema
        symbols.push(format!("{}'", symbols[0]));
    }
    let codes = d.values.iter().map(|v| v.as_cat().unwrap_or(0)).collect();
    Ok((codes, symbols))
}

/// Reads a sequence file: `seq_id`, feature columns, then the state column.
/// Rows of one sequence must be contiguous and time-ordered.
pub fn read_sequences<R: Read>(r: R) -> IoResult<SequenceData> {
    let mut rdr = reader(r);
    let headers = rdr.headers()?.clone();
    if headers.len() < 2 {
        return Err(IoError::Format("sequence file needs seq_id and state columns".into()));
    }
    let records: Vec<csv::StringRecord> = rdr.records().collect::<Result<_, _>>()?;
    if records.is_empty() {
        return Err(IoError::Format("sequence file has no rows".into()));
    }
    let first_line = 2;
    let n_cols = headers.len();
    let column = |j: usize| -> Vec<&str> { records.iter().map(|r| r.get(j).unwrap_or("")).collect() };

    let mut feature_names = Vec::new();
    let mut features = Vec::new();
    let mut columns = Vec::new();
    for j in 1..n_cols - 1 {
        let (name, ty) = parse_header(&headers[j])?;
        if matches!(ty, ColumnType::Label(_)) {
            return Err(IoError::Format(format!("label column `{name}` in a sequence file")));
        }
        let d = decode_column(&name, ty, &column(j), first_line)?;
        feature_names.push(name);
        features.push(d.kind);
        columns.push(d.values);
    }
    let (state_name, state_ty) = parse_header(&headers[n_cols - 1])?;
    let (states, state_names) = decode_states(&state_name, state_ty, &column(n_cols - 1), first_line)?;

    let mut sequences: Vec<Sequence> = Vec::new();
    let mut seen = BTreeSet::new();
    for (i, rec) in records.iter().enumerate() {
        let id = &rec[0];
        if sequences.last().map(|s| s.id.as_str()) != Some(id) {
            if !seen.insert(id.to_string()) {
                return Err(IoError::parse(
                    first_line + i,
                    format!("rows of sequence `{id}` are not contiguous"),
                ));
            }
            sequences.push(Sequence::new(id, Vec::new(), Vec::new()));
        }
        let s = sequences.last_mut().expect("pushed above");
        s.emissions.push(FeatureVector(columns.iter().map(|c| c[i]).collect()));
        s.states.push(states[i]);
    }
    Ok(SequenceData {
        feature_names,
        features,
        state_names,
        sequences,
    })
}

pub fn load_sequences(path: &Path) -> IoResult<SequenceData> {
    let f = std::fs::File::open(path).map_err(|e| IoError::file(path, e))?;
    read_sequences(f)
}

fn type_suffix(kind: &FeatureKind) -> String {
    match kind {
        FeatureKind::Numeric => "num".into(),
        FeatureKind::Categorical { cardinality } => format!("cat:{cardinality}"),
    }
}

fn cell(v: &Value) -> String {
    match v {
        Value::Num(x) => format!("{x}"),
        Value::Cat(c) => c.to_string(),
    }
}

/// Writes sequences with typed headers; states are written as codes.
pub fn write_sequences<W: Write>(w: W, data: &SequenceData) -> IoResult<()> {
    let mut wtr = csv::Writer::from_writer(w);
    let mut header = vec!["seq_id".to_string()];
    for (j, kind) in data.features.iter().enumerate() {
        let name = data.feature_names.get(j).cloned().unwrap_or_else(|| format!("x{j}"));
        header.push(format!("{name}:{}", type_suffix(kind)));
    }
    header.push(format!("state:cat:{}", data.n_states()));
    wtr.write_record(&header)?;
    for s in &data.sequences {
        for (x, y) in s.emissions.iter().zip(&s.states) {
            let mut row = vec![s.id.clone()];
            row.extend(x.values().iter().map(cell));
            row.push(y.to_string());
            wtr.write_record(&row)?;
        }
    }
    wtr.flush()?;
    Ok(())
}

/// Canonical dataset file: a `#dataset NAME` line, then typed columns
/// `x{j}:num|x{j}:cat:K` and `y{p}:label:L`.
pub fn write_dataset<W: Write>(mut w: W, d: &Dataset) -> IoResult<()> {
    writeln!(w, "#dataset {}", d.name)?;
    let mut wtr = csv::Writer::from_writer(w);
    let mut header: Vec<String> = d
        .features
        .iter()
        .enumerate()
        .map(|(j, k)| format!("x{j}:{}", type_suffix(k)))
        .collect();
    header.extend(
        d.schema
            .cardinalities()
            .iter()
            .enumerate()
            .map(|(p, l)| format!("y{p}:label:{l}")),
    );
    wtr.write_record(&header)?;
    for inst in &d.instances {
        let row: Vec<String> = inst
            .x
            .values()
            .iter()
            .map(cell)
            .chain(inst.y.values().iter().map(u32::to_string))
            .collect();
        wtr.write_record(&row)?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn read_dataset(text: &str, fallback_name: &str) -> IoResult<Dataset> {
    let name = text
        .lines()
        .next()
        .and_then(|l| l.strip_prefix("#dataset "))
        .map_or(fallback_name, str::trim)
        .to_string();
    let mut rdr = reader(text.as_bytes());
    let headers = rdr.headers()?.clone();
    let mut cols = Vec::new();
    for h in headers.iter() {
        cols.push(parse_header(h)?);
    }
    let first_label = cols
        .iter()
        .position(|(_, t)| matches!(t, ColumnType::Label(_)))
        .ok_or_else(|| IoError::Format("dataset file has no label columns".into()))?;
    if cols[first_label..]
        .iter()
        .any(|(_, t)| !matches!(t, ColumnType::Label(_)))
    {
        return Err(IoError::Format("label columns must come last".into()));
    }
    let features: Vec<FeatureKind> = cols[..first_label]
        .iter()
        .map(|(name, t)| match t {
            ColumnType::Num => Ok(FeatureKind::Numeric),
            ColumnType::Cat(Some(k)) => Ok(FeatureKind::Categorical { cardinality: *k }),
            _ => Err(IoError::Format(format!("column `{name}` needs a :num or :cat:K type"))),
        })
        .collect::<IoResult<_>>()?;
    let cards: Vec<u32> = cols[first_label..]
        .iter()
        .map(|(_, t)| match t {
            ColumnType::Label(k) => *k,
            _ => unreachable!(),
        })
        .collect();
    let schema = LabelSchema::new(cards)?;
    let mut instances = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = rec.position().map_or(i + 2, |p| p.line() as usize);
        if rec.len() != cols.len() {
            return Err(IoError::parse(
                line,
                format!("expected {} cells, found {}", cols.len(), rec.len()),
            ));
        }
        let x = features
            .iter()
            .zip(rec.iter())
            .map(|(k, c)| match k {
                FeatureKind::Numeric => c.parse::<f64>().ok().filter(|v| v.is_finite()).map(Value::Num),
                FeatureKind::Categorical { .. } => c.parse::<u32>().ok().map(Value::Cat),
            })
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| IoError::parse(line, "malformed feature cell"))?;
        let y = rec
            .iter()
            .skip(first_label)
            .map(|c| c.parse::<u32>().ok())
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| IoError::parse(line, "malformed label cell"))?;
        instances.push(Instance::new(x, y));
    }
    let d = Dataset::new(name, schema, features, instances);
    d.ensure_valid()?;
    Ok(d)
}

pub fn load_dataset(path: &Path) -> IoResult<Dataset> {
    let text = crate::error::read_to_string(path)?;
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("dataset");
    read_dataset(&text, stem)
}

pub fn save_dataset(path: &Path, d: &Dataset) -> IoResult<()> {
    let f = std::fs::File::create(path).map_err(|e| IoError::file(path, e))?;
    write_dataset(std::io::BufWriter::new(f), d)
}

/// One row per prediction: `index, y0, ..., y{T-1}`.
pub fn write_predictions<W: Write>(w: W, preds: &[LabelVector]) -> IoResult<()> {
    let mut wtr = csv::Writer::from_writer(w);
    let t = preds.first().map_or(0, LabelVector::len);
    let mut header = vec!["index".to_string()];
    header.extend((0..t).map(|p| format!("y{p}")));
    wtr.write_record(&header)?;
    for (i, y) in preds.iter().enumerate() {
        let mut row = vec![i.to_string()];
        row.extend(y.values().iter().map(u32::to_string));
        wtr.write_record(&row)?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn read_predictions<R: Read>(r: R) -> IoResult<Vec<LabelVector>> {
    let mut rdr = reader(r);
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let y = rec
            .iter()
            .skip(1)
            .map(|c| c.parse::<u32>().ok())
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| IoError::parse(i + 2, "malformed prediction cell"))?;
        out.push(LabelVector(y));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sequence_file_types() {
        let text = "seq_id,temp,day:cat:7,weather,state\n\
                    a,1.5,0,rain,home\n\
                    a,2,6,sun,work\n\
                    b,3,1,rain,home\n";
        let s = read_sequences(text.as_bytes()).unwrap();
        assert_eq!(
            s.features,
            vec![
                FeatureKind::Numeric,
                FeatureKind::Categorical { cardinality: 7 },
                FeatureKind::Categorical { cardinality: 2 }
            ]
        );
        assert_eq!(s.state_names, vec!["home", "work"]);
        assert_eq!(s.sequences.len(), 2);
        assert_eq!(s.sequences[0].states, vec![0, 1]);
        assert_eq!(s.sequences[0].emissions[1].0[2], Value::Cat(1));
    }

    #[test]
    fn split_sequence_rejected() {
        let text = "seq_id,x,state\na,1,0\nb,1,1\na,2,0\n";
        match read_sequences(text.as_bytes()).unwrap_err() {
            IoError::Parse { line, .. } => assert_eq!(line, 4),
            e => panic!("{e}"),
        }
    }

    #[test]
    fn integer_states_keep_their_codes() {
        let s = read_sequences("seq_id,x,state\na,1,3\na,2,0\n".as_bytes()).unwrap();
        assert_eq!(s.n_states(), 4);
        assert_eq!(s.sequences[0].states, vec![3, 0]);
        let s = read_sequences("seq_id,x,state\na,1,0\na,2,0\n".as_bytes()).unwrap();
        assert_eq!(s.n_states(), 2);
    }

    #[test]
    fn dataset_round_trip() {
        let d = Dataset::new(
            "rt",
            LabelSchema::new(vec![2, 3]).unwrap(),
            vec![FeatureKind::Numeric, FeatureKind::Categorical { cardinality: 4 }],
            vec![
                Instance::new(vec![Value::Num(0.1 + 0.2), Value::Cat(3)], vec![1, 2]),
                Instance::new(vec![Value::Num(-1e-300), Value::Cat(0)], vec![0, 0]),
            ],
        );
        let mut buf = Vec::new();
        write_dataset(&mut buf, &d).unwrap();
        let back = read_dataset(std::str::from_utf8(&buf).unwrap(), "x").unwrap();
        assert_eq!(back, d);
    }

    #[test]
    fn predictions_round_trip() {
        let p = vec![LabelVector(vec![1, 0]), LabelVector(vec![0, 2])];
        let mut buf = Vec::new();
        write_predictions(&mut buf, &p).unwrap();
        assert_eq!(read_predictions(buf.as_slice()).unwrap(), p);
    }
}
