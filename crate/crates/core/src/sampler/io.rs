use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::SphereSliceFamily;

/// One line of the JSON-lines slice format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SliceRecord {
    pub r: f64,
    pub x: Vec<f64>,
    pub frame: Vec<Vec<f64>>,
    pub lambda: f64,
}

fn records(family: &SphereSliceFamily) -> impl Iterator<Item = SliceRecord> + '_ {
    family.samples().map(|s| SliceRecord {
        r: s.radius,
        x: s.point().to_vec(),
        frame: s.frame.basis().to_vec(),
        lambda: s.lambda,
    })
}

pub fn write_jsonl<W: Write>(family: &SphereSliceFamily, mut out: W) -> std::io::Result<()> {
    for rec in records(family) {
        serde_json::to_writer(&mut out, &rec)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_jsonl<R: BufRead>(input: R) -> Result<Vec<SliceRecord>, serde_json::Error> {
    input
        .lines()
        .filter(|l| l.as_ref().map_or(true, |l| !l.trim().is_empty()))
        .map(|l| serde_json::from_str(&l.map_err(serde_json::Error::io)?))
        .collect()
}

/// Flat table: `r, x1..xn, n1_1..n1_n, ..., lambda`.
pub fn write_csv<W: Write>(family: &SphereSliceFamily, out: W) -> csv::Result<()> {
    let n = family.map.arity();
    let p = family.map.codomain();
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["r".to_string()];
    header.extend((1..=n).map(|i| format!("x{i}")));
    for j in 1..=p {
        header.extend((1..=n).map(|i| format!("n{j}_{i}")));
    }
    header.push("lambda".into());
    w.write_record(&header)?;
    for rec in records(family) {
        let mut row = vec![rec.r.to_string()];
        row.extend(rec.x.iter().map(f64::to_string));
        row.extend(rec.frame.iter().flatten().map(f64::to_string));
        row.push(rec.lambda.to_string());
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}
