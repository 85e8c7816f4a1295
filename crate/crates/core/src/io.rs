//! File formats: instance CSVs, sample JSONL, query specs and the
//! `# config:` header carried by every CSV this crate writes.

use std::collections::BTreeMap;
use std::io::{BufRead, Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sampling::{InstanceTable, KeyedSample, SampleDesign, SampledEntry};

/// Parse `key,value` lines. Blank lines, `#` comments and a leading
/// `key,value` header are skipped; errors carry 1-based line numbers.
pub fn read_instance<R: Read>(r: R) -> Result<InstanceTable> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).comment(Some(b'#')).flexible(true).trim(csv::Trim::All).from_reader(r);
    let mut table = InstanceTable::new();
    let mut first = true;
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::Parse { line: e.position().map_or(0, |p| p.line() as usize), msg: e.to_string() })?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        let is_first = std::mem::replace(&mut first, false);
        if rec.len() == 1 && rec[0].is_empty() {
            continue;
        }
        if rec.len() != 2 {
            return Err(Error::Parse { line, msg: format!("expected `key,value`, found {} fields", rec.len()) });
        }
        if is_first && &rec[0] == "key" && &rec[1] == "value" {
            continue;
        }
        let value: f64 = rec[1].parse().map_err(|_| Error::Parse { line, msg: format!("`{}` is not a number", &rec[1]) })?;
        table.insert(&rec[0], value).map_err(|e| Error::Parse { line, msg: e.to_string() })?;
    }
    Ok(table)
}

pub fn read_instance_file(path: &std::path::Path) -> Result<InstanceTable> {
    let f = std::fs::File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    read_instance(std::io::BufReader::new(f)).map_err(|e| match e {
        Error::Parse { line, msg } => Error::Parse { line, msg: format!("{}: {msg}", path.display()) },
        e => e,
    })
}

pub fn write_instance<W: Write>(w: W, table: &InstanceTable) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    for (k, v) in table.iter() {
        wr.write_record([k, &v.to_string()]).map_err(|e| Error::Io(e.to_string()))?;
    }
    wr.flush()?;
    Ok(())
}

/// One line of a sample file. `threshold` is present for bottom-k samples
/// only and null when the sample holds every positive key.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub key: String,
    pub value: f64,
    pub seed: f64,
    pub salt: u64,
    #[serde(default, skip_serializing_if = "Option::is_none", with = "threshold")]
    pub threshold: Option<Option<f64>>,
}

mod threshold {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(t: &Option<Option<f64>>, s: S) -> Result<S::Ok, S::Error> {
        match t {
            Some(Some(x)) => s.serialize_f64(*x),
            _ => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Option<f64>>, D::Error> {
        Option::<f64>::deserialize(d).map(Some)
    }
}

pub fn write_sample_jsonl<W: Write>(mut w: W, s: &KeyedSample) -> Result<()> {
    let threshold = match s.design {
        SampleDesign::BottomK { threshold, .. } => Some(threshold.is_finite().then_some(threshold)),
        _ => None,
    };
    for (key, e) in &s.entries {
        let rec = SampleRecord { key: key.clone(), value: e.value, seed: e.seed, salt: s.salt, threshold };
        serde_json::to_writer(&mut w, &rec).map_err(|e| Error::Io(e.to_string()))?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

/// Read a sample file back. The design parameters are not stored per line
/// and come from the caller; a bottom-k threshold in the file overrides the
/// design's. `salt` is used when the file has no lines.
pub fn read_sample_jsonl<R: BufRead>(r: R, design: SampleDesign, salt: u64) -> Result<KeyedSample> {
    let mut entries = BTreeMap::new();
    let mut file_salt: Option<u64> = None;
    let mut design = design;
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        let n = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let rec: SampleRecord = serde_json::from_str(&line).map_err(|e| Error::Parse { line: n, msg: e.to_string() })?;
        if *file_salt.get_or_insert(rec.salt) != rec.salt {
            return Err(Error::Parse { line: n, msg: "sample lines disagree on the salt".into() });
        }
        if !(rec.seed >= 0.0 && rec.seed < 1.0) || !(rec.value >= 0.0 && rec.value.is_finite()) {
            return Err(Error::Parse { line: n, msg: "seed must lie in [0,1) and value be nonnegative".into() });
        }
        if let (SampleDesign::BottomK { threshold, .. }, Some(t)) = (&mut design, rec.threshold) {
            *threshold = t.unwrap_or(f64::INFINITY);
        }
        if entries.insert(rec.key.clone(), SampledEntry { value: rec.value, seed: rec.seed }).is_some() {
            return Err(Error::Parse { line: n, msg: format!("duplicate key `{}`", rec.key) });
        }
    }
    Ok(KeyedSample { salt: file_salt.unwrap_or(salt), design, entries })
}

/// Aggregate query: instance files, sampling scheme, estimator and key
/// selection.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QuerySpec {
    pub instances: Vec<std::path::PathBuf>,
    pub scheme: crate::model::SamplingSpec,
    pub estimator: String,
    #[serde(default)]
    pub selection: Option<String>,
    #[serde(default)]
    pub salt: Option<u64>,
}

impl QuerySpec {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse { line: e.line(), msg: e.to_string() })
    }
}

/// `# config: {...}` with keys in sorted order, so reruns are byte-identical.
pub fn write_config_header<W: Write>(mut w: W, config: &BTreeMap<String, serde_json::Value>) -> Result<()> {
    writeln!(w, "# config: {}", serde_json::to_string(config).map_err(|e| Error::Io(e.to_string()))?)?;
    Ok(())
}

/// Recover the config object from a CSV written with [`write_config_header`].
pub fn parse_config_header(text: &str) -> Option<BTreeMap<String, serde_json::Value>> {
    let first = text.lines().next()?;
    serde_json::from_str(first.strip_prefix("# config: ")?).ok()
}
