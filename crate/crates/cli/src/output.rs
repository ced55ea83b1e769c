//! Number formatting and file helpers shared by the subcommands.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::Path;

use anyhow::{Context, Result};
use misinfo_core::series::SirSeries;
use serde_json::Value;

/// Shortest representation that round-trips; exponent form for very small
/// or very large magnitudes.
pub fn num(x: f64) -> String {
    let a = x.abs();
    if a != 0.0 && a.is_finite() && !(1e-5..1e16).contains(&a) {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}

pub fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

/// JSON number, or `"inf"` / `"-inf"` / `null` for non-finite values.
pub fn json_num(x: f64) -> Value {
    if x.is_finite() {
        Value::from(x)
    } else if x.is_nan() {
        Value::Null
    } else if x > 0.0 {
        Value::from("inf")
    } else {
        Value::from("-inf")
    }
}

pub fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

pub fn create(path: &Path) -> Result<BufWriter<File>> {
    let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(f))
}

/// Opens `path`, or stdout when `None`.
pub fn sink(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(create(p)?),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

pub fn write_json(path: &Path, value: &Value) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

/// `t,S,I,R` followed by `S_m,I_m,R_m` for each community.
pub fn write_trajectory<W: Write>(
    out: W,
    aggregate: &SirSeries,
    communities: &[SirSeries],
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["t".to_string(), "S".into(), "I".into(), "R".into()];
    for m in 1..=communities.len() {
        header.extend([format!("S_{m}"), format!("I_{m}"), format!("R_{m}")]);
    }
    w.write_record(&header)?;
    for t in 0..aggregate.len() {
        let mut row = vec![
            t.to_string(),
            num(aggregate.s[t]),
            num(aggregate.i[t]),
            num(aggregate.r[t]),
        ];
        for c in communities {
            row.extend([num(c.s[t]), num(c.i[t]), num(c.r[t])]);
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}
