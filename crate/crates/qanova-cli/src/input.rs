//! Input parsing for grouped data files.
//!
//! The canonical format is long-format CSV with a `group,value` header: one
//! observation per row, group membership by label, groups ordered by first
//! appearance. A single-column file (header `value`, or bare numbers) is
//! accepted where a lone sample makes sense.

use std::path::Path;

/// Grouped observations in first-appearance order.
pub struct InputTable {
    pub labels: Vec<String>,
    pub groups: Vec<Vec<f64>>,
}

pub fn read_table(path: &Path) -> Result<InputTable, String> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .flexible(false)
        .from_path(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;

    let mut rows: Vec<csv::StringRecord> = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| format!("{}: {e}", path.display()))?;
        rows.push(rec);
    }
    if rows.is_empty() {
        return Err(format!("{}: empty file", path.display()));
    }

    match rows[0].len() {
        2 => read_long(path, &rows),
        1 => read_single_column(path, &rows),
        n => Err(format!(
            "{}: expected a `group,value` table or a single column, found {n} columns",
            path.display()
        )),
    }
}

fn read_long(path: &Path, rows: &[csv::StringRecord]) -> Result<InputTable, String> {
    let header = &rows[0];
    if !header[0].eq_ignore_ascii_case("group") || !header[1].eq_ignore_ascii_case("value") {
        return Err(format!(
            "{}: first line must be the header `group,value`, found `{},{}`",
            path.display(),
            &header[0],
            &header[1]
        ));
    }
    let mut labels: Vec<String> = Vec::new();
    let mut groups: Vec<Vec<f64>> = Vec::new();
    for (line, rec) in rows.iter().enumerate().skip(1) {
        let label = &rec[0];
        let value = parse_value(path, line + 1, &rec[1])?;
        match labels.iter().position(|l| l == label) {
            Some(idx) => groups[idx].push(value),
            None => {
                labels.push(label.to_string());
                groups.push(vec![value]);
            }
        }
    }
    if labels.is_empty() {
        return Err(format!("{}: no data rows", path.display()));
    }
    Ok(InputTable { labels, groups })
}

fn read_single_column(path: &Path, rows: &[csv::StringRecord]) -> Result<InputTable, String> {
    let start = if rows[0][0].parse::<f64>().is_ok() {
        0
    } else if rows[0][0].eq_ignore_ascii_case("value") {
        1
    } else {
        return Err(format!(
            "{}: single-column input must start with `value` or a number, found `{}`",
            path.display(),
            &rows[0][0]
        ));
    };
    let mut values = Vec::with_capacity(rows.len() - start);
    for (line, rec) in rows.iter().enumerate().skip(start) {
        values.push(parse_value(path, line + 1, &rec[0])?);
    }
    if values.is_empty() {
        return Err(format!("{}: no data rows", path.display()));
    }
    Ok(InputTable {
        labels: vec!["all".to_string()],
        groups: vec![values],
    })
}

fn parse_value(path: &Path, line: usize, text: &str) -> Result<f64, String> {
    let v: f64 = text
        .parse()
        .map_err(|_| format!("{}:{line}: `{text}` is not a number", path.display()))?;
    if !v.is_finite() {
        return Err(format!(
            "{}:{line}: values must be finite, found `{text}`",
            path.display()
        ));
    }
    Ok(v)
}
