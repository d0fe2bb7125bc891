//! Sweep records and their CSV / JSON-lines forms.

use std::io::{BufRead, Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One `(N, Jz, D)` point. Optional fields are empty when the point failed
/// (`status` then holds the error) or, for `f_ratio`, `b` and `fidelity`,
/// when the state has no Bell correlation to optimize.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub n: usize,
    pub jz: f64,
    pub d: f64,
    pub energy: Option<f64>,
    pub degenerate: Option<bool>,
    pub g1: Option<f64>,
    pub g2: Option<f64>,
    /// Optimal `f̃ = |f₂|/|f₁|`.
    pub f_ratio: Option<f64>,
    pub bell: Option<f64>,
    pub beta_lr: Option<f64>,
    pub ratio: Option<f64>,
    /// Half-chain entanglement entropy.
    pub entropy: Option<f64>,
    /// `|⟨ψ_max(f̃)|ψ_gs⟩|`.
    pub fidelity: Option<f64>,
    /// `b` of the ψ_max matched to `f_ratio`.
    pub b: Option<f64>,
    pub residual: Option<f64>,
    pub iterations: Option<usize>,
    pub status: String,
}

pub const STATUS_OK: &str = "ok";

/// CSV column order.
pub const CSV_HEADER: [&str; 17] = [
    "n", "jz", "d", "energy", "degenerate", "g1", "g2", "f_ratio", "bell", "beta_lr", "ratio", "entropy",
    "fidelity", "b", "residual", "iterations", "status",
];

impl SweepRecord {
    pub fn failed(n: usize, jz: f64, d: f64, err: &Error) -> Self {
        Self {
            n,
            jz,
            d,
            energy: None,
            degenerate: None,
            g1: None,
            g2: None,
            f_ratio: None,
            bell: None,
            beta_lr: None,
            ratio: None,
            entropy: None,
            fidelity: None,
            b: None,
            residual: None,
            iterations: None,
            status: err.to_string(),
        }
    }

    pub fn is_ok(&self) -> bool {
        self.status == STATUS_OK
    }

    fn to_row(&self) -> Vec<String> {
        let f = |x: Option<f64>| x.map_or(String::new(), fmt_f64);
        vec![
            self.n.to_string(),
            fmt_f64(self.jz),
            fmt_f64(self.d),
            f(self.energy),
            self.degenerate.map_or(String::new(), |b| b.to_string()),
            f(self.g1),
            f(self.g2),
            f(self.f_ratio),
            f(self.bell),
            f(self.beta_lr),
            f(self.ratio),
            f(self.entropy),
            f(self.fidelity),
            f(self.b),
            f(self.residual),
            self.iterations.map_or(String::new(), |i| i.to_string()),
            self.status.clone(),
        ]
    }

    fn from_row(row: &csv::StringRecord, line: usize) -> Result<Self> {
        if row.len() != CSV_HEADER.len() {
            return Err(Error::Config {
                line,
                msg: format!("expected {} columns, got {}", CSV_HEADER.len(), row.len()),
            });
        }
        let bad = |col: usize, v: &str| Error::Config {
            line,
            msg: format!("column {}: cannot parse '{v}'", CSV_HEADER[col]),
        };
        let req = |col: usize| -> Result<f64> { row[col].parse().map_err(|_| bad(col, &row[col])) };
        let opt = |col: usize| -> Result<Option<f64>> {
            match &row[col] {
                "" => Ok(None),
                v => v.parse().map(Some).map_err(|_| bad(col, v)),
            }
        };
        let opt_parse = |col: usize| -> Result<Option<usize>> {
            match &row[col] {
                "" => Ok(None),
                v => v.parse().map(Some).map_err(|_| bad(col, v)),
            }
        };
        Ok(Self {
            n: row[0].parse().map_err(|_| bad(0, &row[0]))?,
            jz: req(1)?,
            d: req(2)?,
            energy: opt(3)?,
            degenerate: match &row[4] {
                "" => None,
                v => Some(v.parse().map_err(|_| bad(4, v))?),
            },
            g1: opt(5)?,
            g2: opt(6)?,
            f_ratio: opt(7)?,
            bell: opt(8)?,
            beta_lr: opt(9)?,
            ratio: opt(10)?,
            entropy: opt(11)?,
            fidelity: opt(12)?,
            b: opt(13)?,
            residual: opt(14)?,
            iterations: opt_parse(15)?,
            status: row[16].to_string(),
        })
    }
}

/// 17 significant digits, enough to round-trip every `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_csv<W: Write>(out: W, records: &[SweepRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in records {
        w.write_record(r.to_row())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<SweepRecord>> {
    let mut rd = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let header = rd.headers()?.clone();
    if header.iter().ne(CSV_HEADER.iter().copied()) {
        return Err(Error::Config {
            line: 1,
            msg: "unexpected CSV header".into(),
        });
    }
    rd.records()
        .enumerate()
        .map(|(i, row)| SweepRecord::from_row(&row?, i + 2))
        .collect()
}

pub fn write_jsonl<W: Write>(mut out: W, records: &[SweepRecord]) -> Result<()> {
    for r in records {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_jsonl<R: BufRead>(input: R) -> Result<Vec<SweepRecord>> {
    let mut records = Vec::new();
    for line in input.lines() {
        let line = line?;
        if !line.trim().is_empty() {
            records.push(serde_json::from_str(&line)?);
        }
    }
    Ok(records)
}
