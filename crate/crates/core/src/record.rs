//! Flat key-value records, written as CSV rows or JSON lines.

use std::io::Write;

use serde_json::{Map, Number, Value};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub enum Field {
    Int(i64),
    Float(f64),
    Text(String),
}

impl Field {
    fn to_csv(&self) -> String {
        match self {
            Field::Int(v) => v.to_string(),
            Field::Float(v) => v.to_string(),
            Field::Text(v) => v.clone(),
        }
    }

    fn to_json(&self) -> Value {
        match self {
            Field::Int(v) => Value::from(*v),
            Field::Float(v) => Number::from_f64(*v)
                .map(Value::Number)
                .unwrap_or_else(|| Value::String(v.to_string())),
            Field::Text(v) => Value::String(v.clone()),
        }
    }
}

/// Ordered list of named fields.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Record {
    fields: Vec<(String, Field)>,
}

impl Record {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, key: impl Into<String>, value: Field) -> &mut Self {
        self.fields.push((key.into(), value));
        self
    }

    pub fn push_int(&mut self, key: impl Into<String>, value: i64) -> &mut Self {
        self.push(key, Field::Int(value))
    }

    pub fn push_float(&mut self, key: impl Into<String>, value: f64) -> &mut Self {
        self.push(key, Field::Float(value))
    }

    pub fn push_text(&mut self, key: impl Into<String>, value: impl Into<String>) -> &mut Self {
        self.push(key, Field::Text(value.into()))
    }

    pub fn extend(&mut self, other: Record) -> &mut Self {
        self.fields.extend(other.fields);
        self
    }

    pub fn get(&self, key: &str) -> Option<&Field> {
        self.fields.iter().find(|(k, _)| k == key).map(|(_, v)| v)
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.fields.iter().map(|(k, _)| k.as_str())
    }

    pub fn to_json(&self) -> Value {
        let map: Map<String, Value> = self
            .fields
            .iter()
            .map(|(k, v)| (k.clone(), v.to_json()))
            .collect();
        Value::Object(map)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Csv,
    JsonLines,
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Self::Csv),
            "json-lines" | "jsonl" => Ok(Self::JsonLines),
            other => Err(Error::Config(format!("unknown output format {other:?}"))),
        }
    }
}

/// Writes records sharing one schema. CSV takes its header from the first record.
pub fn write_records<W: Write>(out: W, records: &[Record], format: OutputFormat) -> Result<()> {
    match format {
        OutputFormat::Csv => {
            let mut writer = csv::Writer::from_writer(out);
            if let Some(first) = records.first() {
                writer
                    .write_record(first.keys())
                    .map_err(|e| Error::Io(e.into()))?;
            }
            for record in records {
                writer
                    .write_record(record.fields.iter().map(|(_, v)| v.to_csv()))
                    .map_err(|e| Error::Io(e.into()))?;
            }
            writer.flush()?;
        }
        OutputFormat::JsonLines => {
            let mut out = out;
            for record in records {
                serde_json::to_writer(&mut out, &record.to_json())
                    .map_err(|e| Error::Io(e.into()))?;
                out.write_all(b"\n")?;
            }
            out.flush()?;
        }
    }
    Ok(())
}
