//! Manifests, FD files and CSV data.
//!
//! A manifest is a TOML file:
//!
//! ```toml
//! fds = "trains.fds"
//!
//! [[relation]]
//! name = "Trains"
//! attributes = ["train", "departs", "arrives", "time", "duration"]
//! data = "trains.csv"
//! ```
//!
//! Paths are relative to the manifest's directory. A relation without
//! `data` is empty. FD files hold one dependency per line, as
//! `Relation: a b -> c`, with `_` for an empty lhs and `#` comments.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::relational::{AttrSet, Database, Fd, FdSet, Schema};

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq, Eq)]
pub struct RelationEntry {
    pub name: String,
    pub attributes: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub data: Option<PathBuf>,
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq, Eq)]
pub struct Manifest {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fds: Option<PathBuf>,
    #[serde(rename = "relation", default)]
    pub relations: Vec<RelationEntry>,
    #[serde(skip)]
    pub base_dir: PathBuf,
}

fn load_err(path: &Path, message: impl Into<String>) -> Error {
    Error::Load { path: path.to_path_buf(), message: message.into() }
}

impl Manifest {
    pub fn parse(text: &str, base_dir: &Path) -> Result<Self> {
        let mut m: Manifest = toml::from_str(text).map_err(|e| load_err(base_dir, format!("manifest: {e}")))?;
        m.base_dir = base_dir.to_path_buf();
        Ok(m)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| load_err(path, e.to_string()))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        let mut m: Manifest = toml::from_str(&text).map_err(|e| load_err(path, e.to_string()))?;
        m.base_dir = base;
        Ok(m)
    }

    pub fn schema(&self) -> Result<Schema> {
        Schema::new(self.relations.iter().map(|r| (r.name.clone(), r.attributes.clone())))
    }

    fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn load_database(&self) -> Result<Database> {
        let schema = self.schema()?;
        let mut rows = Vec::new();
        for entry in &self.relations {
            let data = match &entry.data {
                Some(p) => read_csv(&self.resolve(p), &entry.attributes)?,
                None => Vec::new(),
            };
            rows.push((entry.name.clone(), data));
        }
        Database::from_rows(schema, rows).map_err(|e| match e {
            Error::DuplicateFact { relation, first, second } => {
                let entry = self.relations.iter().find(|r| r.name == relation);
                let path = entry
                    .and_then(|r| r.data.as_deref())
                    .map(|p| self.resolve(p))
                    .unwrap_or_else(|| self.base_dir.clone());
                load_err(
                    &path,
                    format!(
                        "duplicate rows in relation `{relation}`: data rows {} and {} (lines {} and {}) are identical",
                        first + 1,
                        second + 1,
                        first + 2,
                        second + 2
                    ),
                )
            }
            other => other,
        })
    }

    pub fn load_fds(&self, schema: &Schema) -> Result<FdSet> {
        match &self.fds {
            None => Ok(FdSet::default()),
            Some(p) => {
                let path = self.resolve(p);
                let text = fs::read_to_string(&path).map_err(|e| load_err(&path, e.to_string()))?;
                parse_fd_file(&text, schema).map_err(|e| match e {
                    Error::Parse { line, message } => Error::Parse { line, message: format!("{message} (in {})", path.display()) },
                    other => other,
                })
            }
        }
    }
}

/// Loads the manifest at `path` with its database and FDs.
pub fn load(path: &Path) -> Result<(Manifest, Database, FdSet)> {
    let manifest = Manifest::load(path)?;
    let db = manifest.load_database()?;
    let fds = manifest.load_fds(db.schema())?;
    Ok((manifest, db, fds))
}

/// Reads a CSV file whose header must equal `attributes` exactly.
pub fn read_csv(path: &Path, attributes: &[String]) -> Result<Vec<Vec<String>>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_path(path)
        .map_err(|e| load_err(path, e.to_string()))?;
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| load_err(path, e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    if header != attributes {
        return Err(load_err(
            path,
            format!("header {:?} does not match the schema attributes {:?}", header, attributes),
        ));
    }
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| load_err(path, e.to_string()))?;
        if record.len() != attributes.len() {
            return Err(load_err(
                path,
                format!("line {}: {} values, expected {}", i + 2, record.len(), attributes.len()),
            ));
        }
        rows.push(record.iter().map(str::to_string).collect());
    }
    Ok(rows)
}

/// Parses an FD file against a schema. Duplicate lines collapse.
pub fn parse_fd_file(text: &str, schema: &Schema) -> Result<FdSet> {
    let mut fds = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let perr = |message: String| Error::Parse { line: line_no, message };
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (rel_name, body) = line
            .split_once(':')
            .ok_or_else(|| perr("expected `Relation: lhs -> rhs`".into()))?;
        let rel_name = rel_name.trim();
        let r = schema
            .relation_index(rel_name)
            .ok_or_else(|| perr(format!("unknown relation `{rel_name}`")))?;
        let parts: Vec<&str> = body.split("->").collect();
        if parts.len() != 2 {
            return Err(perr("expected exactly one `->`".into()));
        }
        let attrs = |side: &str, allow_empty: bool| -> Result<AttrSet> {
            let names: Vec<&str> = side.split_whitespace().collect();
            if names == ["_"] && allow_empty {
                return Ok(AttrSet::EMPTY);
            }
            if names.is_empty() {
                return Err(perr(if allow_empty {
                    "empty lhs must be written as `_`".into()
                } else {
                    "empty rhs".into()
                }));
            }
            let rel = schema.relation(r);
            let mut set = AttrSet::EMPTY;
            for n in names {
                let a = rel
                    .attribute_index(n)
                    .ok_or_else(|| perr(format!("unknown attribute `{n}` in relation `{}`", rel.name)))?;
                set = set.with(a);
            }
            Ok(set)
        };
        let lhs = attrs(parts[0], true)?;
        let rhs = attrs(parts[1], false)?;
        fds.push(Fd::new(r, lhs, rhs));
    }
    Ok(FdSet::new(fds))
}

/// Renders FDs in the FD-file format.
pub fn format_fd_file(fds: &FdSet, schema: &Schema) -> String {
    fds.fds().iter().map(|fd| format!("{}\n", fd.display(schema))).collect()
}

/// Writes one relation's facts as CSV with a header row.
pub fn write_relation_csv(db: &Database, relation: usize, path: &Path) -> Result<()> {
    let mut writer = csv::Writer::from_path(path).map_err(|e| load_err(path, e.to_string()))?;
    let io = |e: csv::Error| load_err(path, e.to_string());
    writer.write_record(&db.schema().relation(relation).attributes).map_err(io)?;
    for fact in db.relation_facts(relation) {
        writer.write_record(&fact.values).map_err(io)?;
    }
    writer.flush()?;
    Ok(())
}

/// Writes a manifest, an FD file and one CSV per relation into `dir`;
/// returns the manifest path.
pub fn write_database(db: &Database, fds: &FdSet, dir: &Path) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let mut relations = Vec::new();
    for (r, rel) in db.schema().relations().iter().enumerate() {
        let file = PathBuf::from(format!("{}.csv", rel.name));
        write_relation_csv(db, r, &dir.join(&file))?;
        relations.push(RelationEntry { name: rel.name.clone(), attributes: rel.attributes.clone(), data: Some(file) });
    }
    fs::write(dir.join("constraints.fds"), format_fd_file(fds, db.schema()))?;
    let manifest = Manifest { fds: Some(PathBuf::from("constraints.fds")), relations, base_dir: dir.to_path_buf() };
    let text = toml::to_string(&manifest).map_err(|e| load_err(dir, e.to_string()))?;
    let path = dir.join("manifest.toml");
    fs::write(&path, text)?;
    Ok(path)
}
