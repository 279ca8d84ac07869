//! SQL views over the lake's Parquet files.

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{Error, Result};

fn quote_ident(s: &str) -> String {
    format!("\"{}\"", s.replace('"', "\"\""))
}

/// One `CREATE VIEW` per Parquet table under `lake_root`, grouped by schema
/// directory. Paths are relative to the lake root; ordering is lexicographic.
pub fn views_ddl(lake_root: &Path) -> Result<String> {
    let mut schemas: BTreeMap<String, Vec<String>> = BTreeMap::new();
    let entries = std::fs::read_dir(lake_root).map_err(|e| Error::io(lake_root, e))?;
    for entry in entries {
        let entry = entry.map_err(|e| Error::io(lake_root, e))?;
        if !entry.path().is_dir() {
            continue;
        }
        let schema = entry.file_name().to_string_lossy().into_owned();
        let dir = entry.path();
        let mut tables = Vec::new();
        for f in std::fs::read_dir(&dir).map_err(|e| Error::io(&dir, e))? {
            let f = f.map_err(|e| Error::io(&dir, e))?;
            let name = f.file_name().to_string_lossy().into_owned();
            if let Some(stem) = name.strip_suffix(".parquet") {
                tables.push(stem.to_string());
            }
        }
        if !tables.is_empty() {
            tables.sort();
            schemas.insert(schema, tables);
        }
    }

    let mut out = String::from("-- generated by scilake; run from the lake root\n");
    for (schema, tables) in &schemas {
        out.push_str(&format!("\nCREATE SCHEMA IF NOT EXISTS {};\n", quote_ident(schema)));
        for t in tables {
            out.push_str(&format!(
                "CREATE OR REPLACE VIEW {}.{} AS SELECT * FROM read_parquet('{}/{}.parquet');\n",
                quote_ident(schema),
                quote_ident(t),
                schema.replace('\'', "''"),
                t.replace('\'', "''"),
            ));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_view_per_table() {
        let dir = tempfile::tempdir().unwrap();
        for p in ["xref/doi_map.parquet", "xref/unified_papers.parquet", "go/go_terms.parquet"] {
            let path = dir.path().join(p);
            std::fs::create_dir_all(path.parent().unwrap()).unwrap();
            std::fs::write(path, b"").unwrap();
        }
        std::fs::create_dir_all(dir.path().join("empty")).unwrap();
        let ddl = views_ddl(dir.path()).unwrap();
        assert_eq!(ddl.matches("CREATE OR REPLACE VIEW").count(), 3);
        assert!(ddl.contains("\"xref\".\"doi_map\" AS SELECT * FROM read_parquet('xref/doi_map.parquet')"));
        assert!(ddl.find("\"go\"").unwrap() < ddl.find("\"xref\"").unwrap());
        assert!(!ddl.contains("empty"));
    }
}
