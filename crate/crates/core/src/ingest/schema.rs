//! Schema discovery over JSON Lines samples.

use std::collections::HashMap;
use std::fmt;
use std::io::BufRead;
use std::path::Path;
use std::sync::Arc;

use arrow_schema::{DataType, Field, Schema};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};

/// Records sampled when no explicit size is configured.
pub const DEFAULT_SAMPLE_SIZE: usize = 10_000;

/// Field metadata marking a Utf8 column that holds canonical JSON.
pub const NESTED_MARKER: &str = "scilake.nested";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnType {
    Bool,
    Int64,
    Float64,
    String,
    ListString,
    Nested,
}

impl ColumnType {
    /// Narrowest type consistent with values of both types.
    pub fn merge(self, other: ColumnType) -> ColumnType {
        use ColumnType::*;
        match (self, other) {
            (a, b) if a == b => a,
            (Int64, Float64) | (Float64, Int64) => Float64,
            (ListString, Nested) | (Nested, ListString) => Nested,
            _ => String,
        }
    }

    /// Type of a single JSON value; `None` for null.
    pub fn of(value: &Value) -> Option<ColumnType> {
        Some(match value {
            Value::Null => return None,
            Value::Bool(_) => ColumnType::Bool,
            Value::Number(n) if n.is_i64() => ColumnType::Int64,
            // u64 beyond i64::MAX has no lossless numeric column here
            Value::Number(n) if n.is_u64() => ColumnType::String,
            Value::Number(_) => ColumnType::Float64,
            Value::String(_) => ColumnType::String,
            Value::Array(items) if items.iter().all(Value::is_string) => ColumnType::ListString,
            Value::Array(_) | Value::Object(_) => ColumnType::Nested,
        })
    }

    pub fn arrow_type(self) -> DataType {
        match self {
            ColumnType::Bool => DataType::Boolean,
            ColumnType::Int64 => DataType::Int64,
            ColumnType::Float64 => DataType::Float64,
            ColumnType::String | ColumnType::Nested => DataType::Utf8,
            ColumnType::ListString => {
                DataType::List(Arc::new(Field::new("item", DataType::Utf8, true)))
            }
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ColumnType::Bool => "bool",
            ColumnType::Int64 => "int64",
            ColumnType::Float64 => "float64",
            ColumnType::String => "string",
            ColumnType::ListString => "list<string>",
            ColumnType::Nested => "nested-struct",
        }
    }
}

impl fmt::Display for ColumnType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnDef {
    pub name: String,
    #[serde(rename = "type")]
    pub ty: ColumnType,
    pub nullable: bool,
}

impl ColumnDef {
    pub fn new(name: impl Into<String>, ty: ColumnType, nullable: bool) -> Self {
        Self {
            name: name.into(),
            ty,
            nullable,
        }
    }
}

/// Ordered, uniquely named columns.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct TableSchema {
    pub columns: Vec<ColumnDef>,
}

impl TableSchema {
    pub fn new(columns: Vec<ColumnDef>) -> Result<Self> {
        let mut seen = std::collections::HashSet::new();
        for c in &columns {
            if !seen.insert(c.name.as_str()) {
                return Err(Error::invalid(format!("duplicate column {}", c.name)));
            }
        }
        Ok(Self { columns })
    }

    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    pub fn column(&self, name: &str) -> Option<&ColumnDef> {
        self.columns.iter().find(|c| c.name == name)
    }

    pub fn to_arrow(&self) -> Schema {
        Schema::new(
            self.columns
                .iter()
                .map(|c| {
                    let field = Field::new(&c.name, c.ty.arrow_type(), c.nullable);
                    if c.ty == ColumnType::Nested {
                        field.with_metadata(
                            std::collections::HashMap::from([(
                                NESTED_MARKER.to_string(),
                                "true".to_string(),
                            )]),
                        )
                    } else {
                        field
                    }
                })
                .collect::<Vec<_>>(),
        )
    }
}

/// Result of a discovery pass.
#[derive(Debug, Clone, PartialEq)]
pub struct Discovery {
    pub schema: TableSchema,
    pub sampled: usize,
    /// Lines that were not JSON, or JSON but not an object.
    pub rejected: usize,
}

#[derive(Default)]
struct Accumulator {
    order: Vec<String>,
    slots: HashMap<String, Slot>,
    records: usize,
}

struct Slot {
    ty: Option<ColumnType>,
    present: usize,
    saw_null: bool,
}

impl Accumulator {
    fn observe(&mut self, record: &serde_json::Map<String, Value>) {
        self.records += 1;
        for (key, value) in record {
            let slot = match self.slots.get_mut(key) {
                Some(slot) => slot,
                None => {
                    self.order.push(key.clone());
                    self.slots.entry(key.clone()).or_insert(Slot {
                        ty: None,
                        present: 0,
                        saw_null: false,
                    })
                }
            };
            slot.present += 1;
            match ColumnType::of(value) {
                None => slot.saw_null = true,
                Some(t) => slot.ty = Some(slot.ty.map_or(t, |cur| cur.merge(t))),
            }
        }
    }

    fn finish(self) -> TableSchema {
        let columns = self
            .order
            .into_iter()
            .map(|name| {
                let slot = &self.slots[&name];
                let nullable = slot.saw_null || slot.present < self.records;
                ColumnDef {
                    ty: slot.ty.unwrap_or(ColumnType::String),
                    nullable,
                    name,
                }
            })
            .collect();
        TableSchema { columns }
    }
}

/// Infer a schema from the first `sample_size` parseable object records.
///
/// Blank lines are skipped; lines that fail to parse, or parse to something
/// other than an object, are counted as rejected and do not use up the sample.
pub fn discover_schema<I, S>(lines: I, sample_size: usize) -> Result<Discovery>
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    if sample_size == 0 {
        return Err(Error::invalid("sample_size must be at least 1"));
    }
    let mut acc = Accumulator::default();
    let mut rejected = 0;
    for line in lines {
        if acc.records == sample_size {
            break;
        }
        let line = line.as_ref().trim();
        if line.is_empty() {
            continue;
        }
        match serde_json::from_str::<Value>(line) {
            Ok(Value::Object(map)) => acc.observe(&map),
            _ => rejected += 1,
        }
    }
    if acc.records == 0 {
        return Err(Error::NoRecords);
    }
    let sampled = acc.records;
    Ok(Discovery {
        schema: acc.finish(),
        sampled,
        rejected,
    })
}

/// [`discover_schema`] over a JSON Lines file.
pub fn discover_schema_file(path: &Path, sample_size: usize) -> Result<Discovery> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = std::io::BufReader::new(file);
    let mut io_err = None;
    let lines = reader.lines().map_while(|l| match l {
        Ok(l) => Some(l),
        Err(e) => {
            io_err = Some(e);
            None
        }
    });
    let out = discover_schema(lines, sample_size);
    if let Some(e) = io_err {
        return Err(Error::io(path, e));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn col(name: &str, ty: ColumnType, nullable: bool) -> ColumnDef {
        ColumnDef::new(name, ty, nullable)
    }

    #[test]
    fn union_and_nullability() {
        let d = discover_schema([r#"{"a":1}"#, r#"{"a":2,"b":"x"}"#], 2).unwrap();
        assert_eq!(
            d.schema.columns,
            vec![
                col("a", ColumnType::Int64, false),
                col("b", ColumnType::String, true)
            ]
        );
    }

    #[test]
    fn conflicting_scalars_promote_to_string() {
        let d = discover_schema([r#"{"a":1}"#, r#"{"a":"x"}"#], 10).unwrap();
        assert_eq!(d.schema.columns, vec![col("a", ColumnType::String, false)]);
    }

    #[test]
    fn numeric_widening_and_lists() {
        let d = discover_schema(
            [
                r#"{"n":1,"l":["a"],"o":{"k":1},"z":null}"#,
                r#"{"n":1.5,"l":[],"o":[1],"z":null}"#,
            ],
            10,
        )
        .unwrap();
        assert_eq!(
            d.schema.columns,
            vec![
                col("n", ColumnType::Float64, false),
                col("l", ColumnType::ListString, false),
                col("o", ColumnType::Nested, false),
                col("z", ColumnType::String, true),
            ]
        );
    }

    #[test]
    fn list_and_nested_merge_to_nested() {
        let d = discover_schema([r#"{"l":["a"]}"#, r#"{"l":[1]}"#], 10).unwrap();
        assert_eq!(d.schema.columns[0].ty, ColumnType::Nested);
    }

    #[test]
    fn invalid_and_non_object_lines_are_counted() {
        let d = discover_schema(["{oops", "[1,2]", "", r#"{"a":true}"#], 10).unwrap();
        assert_eq!(d.rejected, 2);
        assert_eq!(d.sampled, 1);
        assert_eq!(d.schema.columns, vec![col("a", ColumnType::Bool, false)]);
    }

    #[test]
    fn sample_size_bounds_the_pass() {
        let d = discover_schema([r#"{"a":1}"#, r#"{"b":1}"#], 1).unwrap();
        assert_eq!(d.schema.columns, vec![col("a", ColumnType::Int64, false)]);
    }

    #[test]
    fn empty_stream_is_an_error() {
        assert!(matches!(
            discover_schema(Vec::<&str>::new(), 5),
            Err(Error::NoRecords)
        ));
        assert!(matches!(discover_schema(["nope"], 5), Err(Error::NoRecords)));
        assert!(discover_schema([r#"{"a":1}"#], 0).is_err());
    }

    #[test]
    fn duplicate_columns_rejected() {
        assert!(TableSchema::new(vec![
            col("a", ColumnType::Bool, false),
            col("a", ColumnType::Bool, false)
        ])
        .is_err());
    }

    #[test]
    fn nested_columns_carry_marker() {
        let schema = TableSchema::new(vec![col("o", ColumnType::Nested, true)]).unwrap();
        let arrow = schema.to_arrow();
        assert_eq!(arrow.field(0).data_type(), &DataType::Utf8);
        assert_eq!(arrow.field(0).metadata()[NESTED_MARKER], "true");
    }
}
