//! JSONL readers and writers.
//!
//! Line formats:
//!
//! * labels: `{"id": "...", "labels": {"joy": 0, "fear": 1, ...}}` (MAP output lines, which
//!   carry `"map"` instead of `"labels"`, are accepted wherever labels are read)
//! * predictions: per label either `{"yes_logit": y, "no_logit": n}`, `{"p1": v, "p0": w}` or
//!   `{"p1": v}`; one encoding per file; optional `"confidence": {"joy": 4, ...}`
//! * annotations: `{"id": "...", "annotations": [{"joy": 1, ...}, ...]}`
//! * raw responses: `{"id": "...", "label": "joy", "text": "..."}`
//! * MAP output: `{"id": "...", "map": {...}, "baseline": {...}, "objective": v}`
//!
//! Blank lines are skipped. Line numbers in errors are 1-based.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde_json::{json, Map, Value};

use crate::annotation::AnnotationSet;
use crate::error::{Error, Result};
use crate::infer::MapResult;
use crate::label::{LabelSpace, LabelVector, LabeledDataset};
use crate::likelihood::{LikelihoodRecord, PairHandling};
use crate::response::RawResponse;

pub fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn read_to_string(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn io_err(source: std::io::Error) -> Error {
    Error::Io {
        path: Default::default(),
        source,
    }
}

/// Newline-separated label names; blank lines ignored.
pub fn read_label_space(path: &Path) -> Result<LabelSpace> {
    let text = read_to_string(path)?;
    LabelSpace::new(text.lines().map(str::trim).filter(|l| !l.is_empty()))
}

/// Calls `f` with each parsed non-blank line.
fn for_each_line<R, F>(reader: R, mut f: F) -> Result<()>
where
    R: BufRead,
    F: FnMut(Map<String, Value>) -> Result<()>,
{
    for (k, line) in reader.lines().enumerate() {
        let line_no = k + 1;
        let line = line.map_err(io_err)?;
        if line.trim().is_empty() {
            continue;
        }
        let value: Value = serde_json::from_str(&line).map_err(|e| Error::parse(line_no, e.to_string()))?;
        let Value::Object(obj) = value else {
            return Err(Error::parse(line_no, "expected a JSON object"));
        };
        // Field helpers report line 0; stamp the real line number here.
        f(obj).map_err(|e| match e {
            Error::Parse { message, .. } => Error::parse(line_no, message),
            other => Error::parse(line_no, other.to_string()),
        })?;
    }
    Ok(())
}

fn string_field(obj: &Map<String, Value>, key: &str) -> Result<String> {
    match obj.get(key) {
        Some(Value::String(s)) if !s.is_empty() => Ok(s.clone()),
        Some(_) => Err(Error::parse(0, format!("`{key}` must be a non-empty string"))),
        None => Err(Error::parse(0, format!("missing `{key}`"))),
    }
}

fn object_field<'a>(obj: &'a Map<String, Value>, key: &str) -> Result<&'a Map<String, Value>> {
    match obj.get(key) {
        Some(Value::Object(m)) => Ok(m),
        Some(_) => Err(Error::parse(0, format!("`{key}` must be an object"))),
        None => Err(Error::parse(0, format!("missing `{key}`"))),
    }
}

fn check_names<'a, I>(space: &LabelSpace, names: I) -> Result<()>
where
    I: IntoIterator<Item = &'a String>,
{
    for name in names {
        space.index_of(name)?;
    }
    Ok(())
}

/// Parses `{name: 0|1}` covering exactly the labels of `space`.
pub fn label_object(space: &LabelSpace, obj: &Map<String, Value>) -> Result<LabelVector> {
    check_names(space, obj.keys())?;
    let mut v = LabelVector::zeros(space.len());
    for (i, name) in space.names().iter().enumerate() {
        let bit = obj.get(name).ok_or_else(|| Error::MissingLabel(name.clone()))?;
        match bit.as_i64() {
            Some(0) => {}
            Some(1) => v.set(i, true),
            Some(other) => return Err(Error::InvalidBit(other)),
            None => return Err(Error::parse(0, format!("label `{name}` must be 0 or 1"))),
        }
    }
    Ok(v)
}

pub fn label_json(space: &LabelSpace, v: &LabelVector) -> Value {
    let mut m = Map::new();
    for (i, name) in space.names().iter().enumerate() {
        m.insert(name.clone(), json!(u8::from(v.get(i))));
    }
    Value::Object(m)
}

/// Reads gold labels (or MAP output) into a dataset.
pub fn read_labeled<R: BufRead>(reader: R, space: &LabelSpace) -> Result<LabeledDataset> {
    let mut data = LabeledDataset::new(space.clone());
    for_each_line(reader, |obj| {
        let id = string_field(&obj, "id")?;
        let key = if obj.contains_key("labels") { "labels" } else { "map" };
        let labels = label_object(space, object_field(&obj, key)?)?;
        data.push(id, labels)
    })?;
    Ok(data)
}

pub fn write_labeled<W: Write>(mut w: W, data: &LabeledDataset) -> Result<()> {
    for item in data.items() {
        let line = json!({"id": item.id, "labels": label_json(data.space(), &item.labels)});
        writeln!(w, "{line}").map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Encoding {
    Logits,
    Pairs,
    P1,
}

impl Encoding {
    fn of(obj: &Map<String, Value>) -> Result<Self> {
        let has = |k: &str| obj.contains_key(k);
        let enc = match (has("yes_logit"), has("no_logit"), has("p1"), has("p0")) {
            (true, true, false, false) => Encoding::Logits,
            (false, false, true, true) => Encoding::Pairs,
            (false, false, true, false) => Encoding::P1,
            _ => {
                return Err(Error::parse(
                    0,
                    "label scores need {yes_logit, no_logit}, {p1, p0} or {p1}",
                ))
            }
        };
        if obj.len() != 2 && enc != Encoding::P1 || obj.len() != 1 && enc == Encoding::P1 {
            return Err(Error::parse(0, "unexpected keys in label scores"));
        }
        Ok(enc)
    }
}

fn number(obj: &Map<String, Value>, key: &str) -> Result<f64> {
    obj.get(key)
        .and_then(Value::as_f64)
        .ok_or_else(|| Error::parse(0, format!("`{key}` must be a number")))
}

/// Reads prediction records; every line must use the same score encoding.
pub fn read_predictions<R: BufRead>(
    reader: R,
    space: &LabelSpace,
    handling: PairHandling,
) -> Result<Vec<LikelihoodRecord>> {
    let mut records: Vec<LikelihoodRecord> = Vec::new();
    let mut ids = std::collections::HashSet::new();
    let mut file_encoding: Option<Encoding> = None;
    for_each_line(reader, |obj| {
        let id = string_field(&obj, "id")?;
        if !ids.insert(id.clone()) {
            return Err(Error::DuplicateId(id));
        }
        let labels = object_field(&obj, "labels")?;
        check_names(space, labels.keys())?;
        let mut scores = Vec::with_capacity(space.len());
        for name in space.names() {
            let entry = match labels.get(name) {
                Some(Value::Object(m)) => m,
                Some(_) => return Err(Error::parse(0, format!("scores for `{name}` must be an object"))),
                None => return Err(Error::MissingLabel(name.clone())),
            };
            let enc = Encoding::of(entry)?;
            match file_encoding {
                None => file_encoding = Some(enc),
                Some(prev) if prev != enc => {
                    return Err(Error::parse(0, "mixed score encodings in one file"));
                }
                _ => {}
            }
            scores.push(entry);
        }
        let record = match file_encoding.expect("at least one label") {
            Encoding::Logits => {
                let logits: Vec<(f64, f64)> = scores
                    .iter()
                    .map(|m| Ok((number(m, "yes_logit")?, number(m, "no_logit")?)))
                    .collect::<Result<_>>()?;
                LikelihoodRecord::from_logits(id, space.clone(), &logits)?
            }
            Encoding::Pairs => {
                let pairs: Vec<(f64, f64)> = scores
                    .iter()
                    .map(|m| Ok((number(m, "p1")?, number(m, "p0")?)))
                    .collect::<Result<_>>()?;
                LikelihoodRecord::from_pairs(id, space.clone(), &pairs, handling)?
            }
            Encoding::P1 => {
                let p1: Vec<f64> = scores.iter().map(|m| number(m, "p1")).collect::<Result<_>>()?;
                LikelihoodRecord::from_p1(id, space.clone(), &p1)?
            }
        };
        let record = match obj.get("confidence") {
            None | Some(Value::Null) => record,
            Some(Value::Object(conf)) => {
                check_names(space, conf.keys())?;
                let levels = space
                    .names()
                    .iter()
                    .map(|name| match conf.get(name) {
                        None | Some(Value::Null) => Ok(None),
                        Some(v) => match v.as_u64() {
                            Some(n @ 1..=5) => Ok(Some(n as u8)),
                            _ => Err(Error::parse(0, format!("confidence for `{name}` must be 1-5"))),
                        },
                    })
                    .collect::<Result<Vec<_>>>()?;
                record.with_confidence(levels)
            }
            Some(_) => return Err(Error::parse(0, "`confidence` must be an object")),
        };
        records.push(record);
        Ok(())
    })?;
    Ok(records)
}

/// Writes records in the `{p1, p0}` encoding, with confidence when any is present.
pub fn write_predictions<W: Write>(mut w: W, records: &[LikelihoodRecord]) -> Result<()> {
    for rec in records {
        let mut labels = Map::new();
        for (i, name) in rec.space().names().iter().enumerate() {
            labels.insert(name.clone(), json!({"p1": rec.p1()[i], "p0": rec.p0()[i]}));
        }
        let mut line = Map::new();
        line.insert("id".into(), json!(rec.id));
        line.insert("labels".into(), Value::Object(labels));
        if rec.confidence.iter().any(Option::is_some) {
            let conf: Map<String, Value> = rec
                .space()
                .names()
                .iter()
                .zip(&rec.confidence)
                .map(|(name, c)| (name.clone(), json!(c)))
                .collect();
            line.insert("confidence".into(), Value::Object(conf));
        }
        writeln!(w, "{}", Value::Object(line)).map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}

pub fn read_annotations<R: BufRead>(reader: R, space: &LabelSpace) -> Result<AnnotationSet> {
    let mut set = AnnotationSet::new(space.clone());
    for_each_line(reader, |obj| {
        let id = string_field(&obj, "id")?;
        let Some(Value::Array(list)) = obj.get("annotations") else {
            return Err(Error::parse(0, "`annotations` must be an array"));
        };
        let vectors = list
            .iter()
            .map(|a| match a {
                Value::Object(m) => label_object(space, m),
                _ => Err(Error::parse(0, "each annotation must be an object")),
            })
            .collect::<Result<Vec<_>>>()?;
        set.push(id, vectors)
    })?;
    Ok(set)
}

pub fn read_responses<R: BufRead>(reader: R) -> Result<Vec<RawResponse>> {
    let mut out = Vec::new();
    for_each_line(reader, |obj| {
        let text = match obj.get("text") {
            Some(Value::String(s)) => s.clone(),
            _ => return Err(Error::parse(0, "`text` must be a string")),
        };
        out.push(RawResponse {
            id: string_field(&obj, "id")?,
            label: string_field(&obj, "label")?,
            text,
        });
        Ok(())
    })?;
    Ok(out)
}

pub fn write_responses<W: Write>(mut w: W, responses: &[RawResponse]) -> Result<()> {
    for r in responses {
        writeln!(w, "{}", serde_json::to_string(r)?).map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}

pub fn write_map_results<W: Write>(mut w: W, space: &LabelSpace, results: &[MapResult]) -> Result<()> {
    for r in results {
        let line = json!({
            "id": r.id,
            "map": label_json(space, &r.map_vector),
            "baseline": label_json(space, &r.baseline_vector),
            "objective": r.objective,
        });
        writeln!(w, "{line}").map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}

pub fn read_map_results<R: BufRead>(reader: R, space: &LabelSpace) -> Result<Vec<MapResult>> {
    let mut out = Vec::new();
    for_each_line(reader, |obj| {
        out.push(MapResult {
            id: string_field(&obj, "id")?,
            map_vector: label_object(space, object_field(&obj, "map")?)?,
            baseline_vector: label_object(space, object_field(&obj, "baseline")?)?,
            objective: number(&obj, "objective")?,
        });
        Ok(())
    })?;
    Ok(out)
}
