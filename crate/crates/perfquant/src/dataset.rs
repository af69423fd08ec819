//! Reading measurement hierarchies from CSV and JSON files.
//!
//! CSV files carry a header `level_<n+1>,…,level_2,value` and one row per
//! measurement. Level indices are 1-based and relative to the parent group;
//! measurements within a lowest-level group keep file order. JSON files hold
//! nested arrays of uniform length at each depth with numbers at the leaves.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use perfquant_core::MeasurementHierarchy;
use serde_json::Value;

#[derive(Debug, thiserror::Error)]
pub enum DatasetError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}: cannot tell the format from the extension; use .csv or .json")]
    UnknownFormat { path: String },
    #[error("line {line}: {message}")]
    Csv { line: u64, message: String },
    #[error("at {location}: {message}")]
    Json { location: String, message: String },
    #[error("unbalanced design: {0}")]
    Unbalanced(String),
    #[error(transparent)]
    Hierarchy(#[from] perfquant_core::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn from_path(path: &Path) -> Option<Format> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "csv" => Some(Format::Csv),
            "json" => Some(Format::Json),
            _ => None,
        }
    }
}

pub fn read_dataset(path: &Path) -> Result<MeasurementHierarchy, DatasetError> {
    let display = path.display().to_string();
    let format = Format::from_path(path).ok_or_else(|| DatasetError::UnknownFormat {
        path: display.clone(),
    })?;
    let text = fs::read_to_string(path).map_err(|source| DatasetError::Io {
        path: display,
        source,
    })?;
    match format {
        Format::Csv => parse_csv(&text),
        Format::Json => parse_json(&text),
    }
}

struct Group {
    first_line: u64,
    values: Vec<f64>,
}

pub fn parse_csv(text: &str) -> Result<MeasurementHierarchy, DatasetError> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header = reader.headers().map_err(|e| csv_error(&e, 1))?.clone();
    let columns: Vec<&str> = header.iter().collect();
    let depth = check_header(&columns)?;

    let mut groups: BTreeMap<Vec<usize>, Group> = BTreeMap::new();
    let mut record = csv::StringRecord::new();
    loop {
        let line = reader.position().line();
        match reader.read_record(&mut record) {
            Ok(false) => break,
            Ok(true) => {}
            Err(e) => return Err(csv_error(&e, line)),
        }
        let line = record.position().map_or(line, |p| p.line());
        let err = |message: String| DatasetError::Csv { line, message };
        let mut key = Vec::with_capacity(depth);
        for (col, field) in record.iter().take(depth).enumerate() {
            let index: usize = field.parse().map_err(|_| {
                err(format!(
                    "{}: '{field}' is not a positive integer",
                    columns[col]
                ))
            })?;
            if index == 0 {
                return Err(err(format!("{}: indices start at 1", columns[col])));
            }
            key.push(index);
        }
        let field = &record[depth];
        let value: f64 = field
            .parse()
            .map_err(|_| err(format!("value: '{field}' is not a number")))?;
        if !value.is_finite() {
            return Err(err(format!("value: '{field}' is not finite")));
        }
        groups
            .entry(key)
            .or_insert(Group {
                first_line: line,
                values: Vec::new(),
            })
            .values
            .push(value);
    }
    if groups.is_empty() {
        return Err(DatasetError::Csv {
            line: 2,
            message: "no data rows".into(),
        });
    }
    build_from_groups(depth, &groups)
}

fn csv_error(e: &csv::Error, fallback: u64) -> DatasetError {
    let line = e.position().map_or(fallback, |p| p.line());
    let message = match e.kind() {
        csv::ErrorKind::UnequalLengths {
            expected_len, len, ..
        } => format!("expected {expected_len} fields, found {len}"),
        _ => e.to_string(),
    };
    DatasetError::Csv { line, message }
}

/// Number of index columns implied by the header.
fn check_header(columns: &[&str]) -> Result<usize, DatasetError> {
    let err = |message: String| DatasetError::Csv { line: 1, message };
    let Some((&last, levels)) = columns.split_last() else {
        return Err(err("empty header".into()));
    };
    if last != "value" {
        return Err(err(format!("last column must be 'value', found '{last}'")));
    }
    let top = levels.len() + 1;
    for (i, &name) in levels.iter().enumerate() {
        let want = format!("level_{}", top - i);
        if name != want {
            return Err(err(format!(
                "column {}: expected '{want}', found '{name}'",
                i + 1
            )));
        }
    }
    Ok(levels.len())
}

fn build_from_groups(
    depth: usize,
    groups: &BTreeMap<Vec<usize>, Group>,
) -> Result<MeasurementHierarchy, DatasetError> {
    let mut shape: Vec<usize> = (0..depth)
        .map(|d| groups.keys().map(|k| k[d]).max().unwrap_or(1))
        .collect();
    let per_group = groups.values().next().map_or(0, |g| g.values.len());
    for (key, group) in groups {
        if group.values.len() != per_group {
            return Err(DatasetError::Unbalanced(format!(
                "group {} (first row at line {}) has {} measurements, expected {per_group}",
                describe(key),
                group.first_line,
                group.values.len()
            )));
        }
    }
    let expected: usize = shape.iter().product();
    if groups.len() != expected {
        let missing = first_missing(&shape, groups);
        return Err(DatasetError::Unbalanced(format!(
            "group {} is missing; the indices imply {expected} groups of shape {shape:?}",
            describe(&missing)
        )));
    }
    shape.push(per_group);
    // BTreeMap iteration is lexicographic, which is row-major order.
    let values: Vec<f64> = groups
        .values()
        .flat_map(|g| g.values.iter().copied())
        .collect();
    Ok(MeasurementHierarchy::new(&shape, &values, None)?)
}

fn first_missing(shape: &[usize], groups: &BTreeMap<Vec<usize>, Group>) -> Vec<usize> {
    let mut key = vec![1; shape.len()];
    loop {
        if !groups.contains_key(&key) {
            return key;
        }
        let mut d = shape.len();
        loop {
            d -= 1;
            key[d] += 1;
            if key[d] <= shape[d] {
                break;
            }
            key[d] = 1;
        }
    }
}

fn describe(key: &[usize]) -> String {
    let parts: Vec<String> = key.iter().map(usize::to_string).collect();
    format!("({})", parts.join(","))
}

pub fn parse_json(text: &str) -> Result<MeasurementHierarchy, DatasetError> {
    let root: Value = serde_json::from_str(text).map_err(|e| DatasetError::Json {
        location: format!("line {} column {}", e.line(), e.column()),
        message: e.to_string(),
    })?;
    let mut shape = Vec::new();
    let mut node = &root;
    while let Value::Array(items) = node {
        if items.is_empty() {
            return Err(DatasetError::Json {
                location: "root".into(),
                message: "empty array".into(),
            });
        }
        shape.push(items.len());
        node = &items[0];
    }
    if shape.is_empty() {
        return Err(DatasetError::Json {
            location: "root".into(),
            message: "expected an array".into(),
        });
    }
    let mut values = Vec::with_capacity(shape.iter().product());
    collect_json(&root, &shape, &mut String::new(), &mut values)?;
    Ok(MeasurementHierarchy::new(&shape, &values, None)?)
}

fn collect_json(
    node: &Value,
    shape: &[usize],
    path: &mut String,
    out: &mut Vec<f64>,
) -> Result<(), DatasetError> {
    let location = |path: &str| {
        if path.is_empty() {
            "root".to_string()
        } else {
            path.to_string()
        }
    };
    match (node, shape.split_first()) {
        (Value::Array(items), Some((&len, rest))) => {
            if items.len() != len {
                return Err(DatasetError::Json {
                    location: location(path),
                    message: format!("expected {len} elements, found {}", items.len()),
                });
            }
            for (i, item) in items.iter().enumerate() {
                let mark = path.len();
                path.push_str(&format!("[{i}]"));
                collect_json(item, rest, path, out)?;
                path.truncate(mark);
            }
            Ok(())
        }
        (Value::Number(n), None) => {
            out.push(n.as_f64().ok_or_else(|| DatasetError::Json {
                location: location(path),
                message: format!("{n} is not representable as a float"),
            })?);
            Ok(())
        }
        (_, Some(_)) => Err(DatasetError::Json {
            location: location(path),
            message: "expected an array".into(),
        }),
        (_, None) => Err(DatasetError::Json {
            location: location(path),
            message: "expected a number".into(),
        }),
    }
}

/// Drops the leading `⌊fraction · n₁⌋` measurements of every lowest-level
/// group.
pub fn drop_warmup(
    h: &MeasurementHierarchy,
    fraction: f64,
) -> Result<MeasurementHierarchy, perfquant_core::Error> {
    if !(0.0..1.0).contains(&fraction) {
        return Err(perfquant_core::Error::InvalidConfig(format!(
            "warm-up fraction must be in [0, 1), got {fraction}"
        )));
    }
    let k = (fraction * h.count(1) as f64).floor() as usize;
    if k == 0 {
        Ok(h.clone())
    } else {
        h.drop_leading(k)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_rows_in_any_order() {
        let text = "level_2,value\n2,3\n1,1\n2,4\n1,2\n";
        let h = parse_csv(text).unwrap();
        assert_eq!(h.shape(), &[2, 2]);
        assert_eq!(h.values(), &[1.0, 2.0, 3.0, 4.0]);
    }

    #[test]
    fn csv_single_level() {
        let h = parse_csv("value\n1.5\n2.5\n").unwrap();
        assert_eq!(h.shape(), &[2]);
    }

    #[test]
    fn csv_errors_name_the_line() {
        let e = parse_csv("level_2,value\n1,1\n1,x\n").unwrap_err();
        assert_eq!(e.to_string(), "line 3: value: 'x' is not a number");
        let e = parse_csv("level_2,value\n1,1\n0,2\n").unwrap_err();
        assert!(e.to_string().starts_with("line 3:"), "{e}");
        let e = parse_csv("level_2,value\n1,1,3\n").unwrap_err();
        assert!(e.to_string().starts_with("line 2:"), "{e}");
        let e = parse_csv("level_3,value\n1,1\n").unwrap_err();
        assert!(e.to_string().starts_with("line 1:"), "{e}");
    }

    #[test]
    fn csv_ragged_designs_rejected() {
        let e = parse_csv("level_2,value\n1,1\n1,2\n2,3\n").unwrap_err();
        assert!(e.to_string().contains("group (2)"), "{e}");
        let e = parse_csv("level_3,level_2,value\n1,1,1\n1,2,1\n2,1,1\n").unwrap_err();
        assert!(e.to_string().contains("group (2,2) is missing"), "{e}");
    }

    #[test]
    fn json_nested_arrays() {
        let h = parse_json("[[[1,2],[3,4]],[[5,6],[7,8]]]").unwrap();
        assert_eq!(h.shape(), &[2, 2, 2]);
        let e = parse_json("[[1,2],[3]]").unwrap_err();
        assert_eq!(e.to_string(), "at [1]: expected 2 elements, found 1");
        let e = parse_json("[[1,2],[3,\"a\"]]").unwrap_err();
        assert_eq!(e.to_string(), "at [1][1]: expected a number");
    }

    #[test]
    fn warmup_drop_rule() {
        let h = MeasurementHierarchy::new(&[1, 4], &[100.0, 1.0, 1.0, 1.0], None).unwrap();
        let d = drop_warmup(&h, 0.5).unwrap();
        assert_eq!(d.shape(), &[1, 2]);
        assert_eq!(d.values(), &[1.0, 1.0]);
        assert_eq!(drop_warmup(&h, 0.2).unwrap(), h);
        assert!(drop_warmup(&h, 1.0).is_err());
    }
}
