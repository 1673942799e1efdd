// SPDX-License-Identifier: Apache-2.0

//! Readers and writers for rating files.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use super::table::{is_reserved, ExtraColumn};
use super::RatingTable;
use crate::error::{Error, Result};

/// Supported rating-file layouts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FileFormat {
    /// Comma-separated with a header row naming at least `user` and `item`.
    CsvHeader,
    /// Tab-separated `user, item, rating, timestamp` with no header (MovieLens 100K `u.data`).
    Ml100kTsv,
}

impl FromStr for FileFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" | "csv-header" => Ok(FileFormat::CsvHeader),
            "ml100k" | "ml100k-tsv" | "tsv" => Ok(FileFormat::Ml100kTsv),
            other => Err(Error::Parameter(format!("unknown file format {other:?}"))),
        }
    }
}

pub fn load_csv(path: impl AsRef<Path>, format: FileFormat) -> Result<RatingTable> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_ratings(file, format)
}

pub fn read_ratings(reader: impl Read, format: FileFormat) -> Result<RatingTable> {
    match format {
        FileFormat::CsvHeader => read_csv_header(reader),
        FileFormat::Ml100kTsv => read_ml100k(reader),
    }
}

fn parse_field<T: FromStr>(raw: &str, what: &str, line: u64) -> Result<T> {
    raw.trim().parse().map_err(|_| Error::Parse {
        line,
        message: format!("invalid {what} {raw:?}"),
    })
}

fn record_line(rec: &csv::StringRecord) -> u64 {
    rec.position().map(|p| p.line()).unwrap_or(0)
}

fn csv_error(err: csv::Error) -> Error {
    match err.position() {
        Some(pos) => Error::Parse {
            line: pos.line(),
            message: err.to_string(),
        },
        None => Error::Csv(err),
    }
}

fn read_ml100k(reader: impl Read) -> Result<RatingTable> {
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(b'\t')
        .has_headers(false)
        .flexible(true)
        .quoting(false)
        .from_reader(reader);
    let mut users = Vec::new();
    let mut items = Vec::new();
    let mut ratings = Vec::new();
    let mut times = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(csv_error)?;
        let line = record_line(&rec);
        if rec.len() != 4 {
            return Err(Error::Parse {
                line,
                message: format!("expected 4 tab-separated fields, found {}", rec.len()),
            });
        }
        users.push(rec[0].to_owned());
        items.push(rec[1].to_owned());
        ratings.push(parse_field(&rec[2], "rating", line)?);
        times.push(parse_field(&rec[3], "timestamp", line)?);
    }
    RatingTable::new(users, items, Some(ratings), Some(times))
}

fn read_csv_header(reader: impl Read) -> Result<RatingTable> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(reader);
    let header = rdr.headers().map_err(csv_error)?.clone();
    let find = |name: &str| header.iter().position(|h| h.trim() == name);
    let (Some(user_col), Some(item_col)) = (find("user"), find("item")) else {
        return Err(Error::Schema(format!(
            "header must name user and item columns, found {:?}",
            header.iter().collect::<Vec<_>>()
        )));
    };
    let rating_col = find("rating");
    let time_col = find("timestamp");
    let extra_cols: Vec<(usize, String)> = header
        .iter()
        .enumerate()
        .filter(|(_, h)| !is_reserved(h.trim()))
        .map(|(k, h)| (k, h.to_owned()))
        .collect();

    let mut users = Vec::new();
    let mut items = Vec::new();
    let mut ratings = rating_col.map(|_| Vec::new());
    let mut times = time_col.map(|_| Vec::new());
    let mut extras: Vec<Vec<String>> = vec![Vec::new(); extra_cols.len()];
    for rec in rdr.records() {
        let rec = rec.map_err(csv_error)?;
        let line = record_line(&rec);
        users.push(rec[user_col].to_owned());
        items.push(rec[item_col].to_owned());
        if let (Some(col), Some(out)) = (rating_col, ratings.as_mut()) {
            out.push(parse_field(&rec[col], "rating", line)?);
        }
        if let (Some(col), Some(out)) = (time_col, times.as_mut()) {
            out.push(parse_field(&rec[col], "timestamp", line)?);
        }
        for ((col, _), out) in extra_cols.iter().zip(extras.iter_mut()) {
            out.push(rec[*col].to_owned());
        }
    }
    let mut table = RatingTable::new(users, items, ratings, times)?;
    for ((_, name), values) in extra_cols.into_iter().zip(extras) {
        table = table.with_extra(name, values)?;
    }
    Ok(table)
}

/// Format an optional real for CSV output; missing values are empty fields.
pub fn format_real(value: Option<f64>) -> String {
    match value {
        Some(v) => v.to_string(),
        None => String::new(),
    }
}

/// Parse a CSV real field; empty means missing.
pub fn parse_real(raw: &str, line: u64) -> Result<Option<f64>> {
    let raw = raw.trim();
    if raw.is_empty() {
        Ok(None)
    } else {
        parse_field(raw, "number", line).map(Some)
    }
}

pub fn write_table(table: &RatingTable, writer: impl Write) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(table.column_names())?;
    let mut row = Vec::new();
    for k in 0..table.len() {
        row.clear();
        row.push(table.user(k).to_owned());
        row.push(table.item(k).to_owned());
        if table.has_ratings() {
            row.push(format_real(table.rating(k)));
        }
        if let Some(t) = table.timestamp(k) {
            row.push(t.to_string());
        }
        row.extend(table.extras().iter().map(|c: &ExtraColumn| c.values[k].clone()));
        wtr.write_record(&row)?;
    }
    wtr.flush().map_err(|e| Error::io("<csv output>", e))?;
    Ok(())
}

/// Write tab-separated `user item rating timestamp` rows with no header.
pub fn write_ml100k(table: &RatingTable, writer: impl Write) -> Result<()> {
    let (Some(r), Some(t)) = (table.ratings(), table.timestamps()) else {
        return Err(Error::Schema("ML-100K format needs rating and timestamp columns".into()));
    };
    let mut wtr = csv::WriterBuilder::new()
        .delimiter(b'\t')
        .has_headers(false)
        .from_writer(writer);
    for k in 0..table.len() {
        wtr.write_record([
            table.user(k),
            table.item(k),
            &format_real(Some(r[k])),
            &t[k].to_string(),
        ])?;
    }
    wtr.flush().map_err(|e| Error::io("<tsv output>", e))?;
    Ok(())
}

pub fn save_csv(table: &RatingTable, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_table(table, std::io::BufWriter::new(file))
}
