//! CSV and JSON emitters.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

pub const TRANSFORM_HEADER: [&str; 7] = ["k_re", "k_im", "plane", "q", "F_re", "F_im", "err"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    /// Explicit `--format`, else the extension of `--out`, else `default`.
    pub fn resolve(flag: Option<&str>, out: Option<&Path>, default: Format) -> Result<Format, String> {
        if let Some(f) = flag {
            return match f {
                "csv" => Ok(Format::Csv),
                "json" => Ok(Format::Json),
                other => Err(format!("unknown format '{other}' (expected csv or json)")),
            };
        }
        Ok(match out.and_then(|p| p.extension()).and_then(|e| e.to_str()) {
            Some("csv") => Format::Csv,
            Some("json") => Format::Json,
            _ => default,
        })
    }
}

/// Shortest decimal that parses back to the same `f64`.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

/// One cell of a transform surface.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransformRow {
    pub k_re: f64,
    pub k_im: f64,
    pub plane: String,
    pub q: f64,
    #[serde(rename = "F_re")]
    pub f_re: f64,
    #[serde(rename = "F_im")]
    pub f_im: f64,
    pub err: f64,
}

impl TransformRow {
    fn fields(&self) -> [String; 7] {
        [
            fmt_f64(self.k_re),
            fmt_f64(self.k_im),
            self.plane.clone(),
            fmt_f64(self.q),
            fmt_f64(self.f_re),
            fmt_f64(self.f_im),
            fmt_f64(self.err),
        ]
    }
}

fn csv_writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(w)
}

/// Generic CSV table with LF endings.
pub fn table_csv(header: &[&str], rows: &[Vec<String>]) -> Result<Vec<u8>, String> {
    let mut w = csv_writer(Vec::new());
    w.write_record(header).map_err(|e| e.to_string())?;
    for r in rows {
        w.write_record(r).map_err(|e| e.to_string())?;
    }
    w.into_inner().map_err(|e| e.to_string())
}

pub fn transform_csv(rows: &[TransformRow]) -> Result<Vec<u8>, String> {
    let body: Vec<Vec<String>> = rows.iter().map(|r| r.fields().to_vec()).collect();
    table_csv(&TRANSFORM_HEADER, &body)
}

/// Parse a file written by [`transform_csv`].
pub fn parse_transform_csv(data: &[u8]) -> Result<Vec<TransformRow>, String> {
    let mut rdr = csv::Reader::from_reader(data);
    let header = rdr.headers().map_err(|e| e.to_string())?;
    if header.iter().ne(TRANSFORM_HEADER.iter().copied()) {
        return Err(format!("unexpected header {:?}", header.iter().collect::<Vec<_>>()));
    }
    rdr.deserialize().map(|r| r.map_err(|e| e.to_string())).collect()
}

/// `{config, results, diagnostics}` in that key order.
#[derive(Serialize)]
pub struct Report<'a, C: Serialize, R: Serialize, D: Serialize> {
    pub config: &'a C,
    pub results: R,
    pub diagnostics: D,
}

pub fn to_json<T: Serialize>(v: &T) -> Result<Vec<u8>, String> {
    let mut out = serde_json::to_vec_pretty(v).map_err(|e| e.to_string())?;
    out.push(b'\n');
    Ok(out)
}

/// Write to `out`, or to standard output.
pub fn emit(out: Option<&Path>, bytes: &[u8]) -> io::Result<()> {
    match out {
        Some(p) => fs::write(p, bytes),
        None => {
            let mut stdout = io::stdout().lock();
            stdout.write_all(bytes)?;
            stdout.flush()
        }
    }
}
