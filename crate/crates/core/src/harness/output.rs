use std::io::{self, Write};

use serde::Serialize;

use crate::metrics::MetricsRecord;

use super::SweepRow;

fn csv_error(e: csv::Error) -> io::Error {
    io::Error::other(e)
}

pub fn write_records_csv<'a, W: Write>(
    out: W,
    records: impl IntoIterator<Item = &'a MetricsRecord>,
) -> io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        w.serialize(r).map_err(csv_error)?;
    }
    w.flush()
}

pub fn write_sweep_csv<W: Write>(out: W, rows: &[SweepRow]) -> io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r).map_err(csv_error)?;
    }
    w.flush()
}

/// One JSON object per line.
pub fn write_jsonl<'a, T: Serialize + 'a, W: Write>(
    mut out: W,
    items: impl IntoIterator<Item = &'a T>,
) -> io::Result<()> {
    for item in items {
        serde_json::to_writer(&mut out, item)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}
