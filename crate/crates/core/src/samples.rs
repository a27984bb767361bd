//! Sample files: one CSV row per path, `path_id,z_1..z_n,y_1..y_n`.
//!
//! The header is mandatory and fixes `n`. Calendar dates are not part of the
//! file; callers pass the grid separately or fall back to an index grid.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::types::{EmpiricalMeasure, ExposureSample, Kind, ObservationGrid, SurvivalVector};

pub fn header(n: usize) -> Vec<String> {
    let mut cols = Vec::with_capacity(2 * n + 1);
    cols.push("path_id".to_string());
    cols.extend((1..=n).map(|k| format!("z_{k}")));
    cols.extend((1..=n).map(|k| format!("y_{k}")));
    cols
}

fn infer_n(headers: &csv::StringRecord) -> Result<usize> {
    let cols: Vec<&str> = headers.iter().map(str::trim).collect();
    if cols.first() != Some(&"path_id") {
        return Err(Error::validation(
            "sample file header must start with 'path_id'",
        ));
    }
    if cols.len() < 3 || (cols.len() - 1) % 2 != 0 {
        return Err(Error::validation(format!(
            "sample file header has {} columns; expected path_id plus n z and n y columns",
            cols.len()
        )));
    }
    let n = (cols.len() - 1) / 2;
    let expected = header(n);
    if let Some((got, want)) = cols.iter().zip(&expected).find(|(g, w)| *g != *w) {
        return Err(Error::validation(format!(
            "unexpected header column '{got}' (expected '{want}')"
        )));
    }
    Ok(n)
}

/// Parse samples of the given kind. `grid` defaults to the index grid
/// `0, 1, ..., n` when absent.
pub fn read_samples<R: Read>(
    reader: R,
    kind: Kind,
    grid: Option<ObservationGrid>,
) -> Result<EmpiricalMeasure> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let n = infer_n(rdr.headers()?)?;
    let grid = match grid {
        Some(g) if g.n() != n => {
            return Err(Error::validation(format!(
                "sample file has {n} dates but the grid has {}",
                g.n()
            )))
        }
        Some(g) => g,
        None => ObservationGrid::unit(n)?,
    };
    let mut samples = Vec::new();
    for (row, record) in rdr.records().enumerate() {
        let record = record?;
        let line = row + 2;
        let parse = |idx: usize| -> Result<f64> {
            let raw = record.get(idx).unwrap_or("");
            raw.parse::<f64>().map_err(|_| {
                Error::validation(format!("line {line}: cannot parse '{raw}' as a number"))
            })
        };
        let z = (1..=n).map(parse).collect::<Result<Vec<_>>>()?;
        let bits = (n + 1..=2 * n)
            .map(|idx| match record.get(idx).unwrap_or("") {
                "0" => Ok(0u8),
                "1" => Ok(1u8),
                raw => Err(Error::validation(format!(
                    "line {line}: survival entry '{raw}' is not 0 or 1"
                ))),
            })
            .collect::<Result<Vec<_>>>()?;
        let y = SurvivalVector::from_bits(&bits)
            .map_err(|e| Error::validation(format!("line {line}: {e}")))?;
        let sample = ExposureSample::new(kind, z, y)
            .map_err(|e| Error::validation(format!("line {line}: {e}")))?;
        samples.push(sample);
    }
    EmpiricalMeasure::new(kind, samples, grid)
}

pub fn read_samples_file(
    path: impl AsRef<Path>,
    kind: Kind,
    grid: Option<ObservationGrid>,
) -> Result<EmpiricalMeasure> {
    let file = std::fs::File::open(path.as_ref())?;
    read_samples(std::io::BufReader::new(file), kind, grid)
}

pub fn write_samples<W: Write>(writer: W, measure: &EmpiricalMeasure) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(header(measure.n()))?;
    for (i, s) in measure.samples().iter().enumerate() {
        let mut rec = Vec::with_capacity(2 * s.n() + 1);
        rec.push(i.to_string());
        // `{:?}` keeps the shortest round-tripping representation
        rec.extend(s.z().iter().map(|v| format!("{v:?}")));
        rec.extend(s.y().bits().iter().map(u8::to_string));
        wtr.write_record(&rec)?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn write_samples_file(path: impl AsRef<Path>, measure: &EmpiricalMeasure) -> Result<()> {
    let file = std::fs::File::create(path.as_ref())?;
    write_samples(std::io::BufWriter::new(file), measure)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn reads_minimal_file() {
        let data = "path_id,z_1,z_2,y_1,y_2\n0,1.5,0.25,1,0\n1,0,2,1,1\n";
        let m = read_samples(data.as_bytes(), Kind::Fca, None).unwrap();
        assert_eq!(m.len(), 2);
        assert_eq!(m.n(), 2);
        assert_eq!(m.samples()[0].z(), &[1.5, 0.25]);
        assert_eq!(m.samples()[1].y().alive(), 2);
        assert_eq!(m.grid().times(), &[0.0, 1.0, 2.0]);
    }

    #[test]
    fn rejects_bad_files() {
        let cases = [
            "id,z_1,y_1\n0,1,1\n",
            "path_id,z_1,z_2,y_1\n0,1,1,1\n",
            "path_id,z_1,y_2\n0,1,1\n",
            "path_id,z_1,y_1\n0,abc,1\n",
            "path_id,z_1,z_2,y_1,y_2\n0,1,1,0,1\n",
            "path_id,z_1,y_1\n0,1,2\n",
        ];
        for data in cases {
            assert!(read_samples(data.as_bytes(), Kind::Fca, None).is_err(), "{data}");
        }
        // sign contract
        let data = "path_id,z_1,y_1\n0,-1,1\n";
        let err = read_samples(data.as_bytes(), Kind::Fca, None).unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
        assert!(read_samples(data.as_bytes(), Kind::Fba, None).is_ok());
        // header only
        assert!(read_samples("path_id,z_1,y_1\n".as_bytes(), Kind::Fca, None).is_err());
    }

    #[test]
    fn grid_mismatch_is_rejected() {
        let data = "path_id,z_1,y_1\n0,1,1\n";
        let g = ObservationGrid::unit(2).unwrap();
        assert!(read_samples(data.as_bytes(), Kind::Fca, Some(g)).is_err());
    }

    proptest! {
        #[test]
        fn write_then_read_is_identity(
            rows in prop::collection::vec((prop::collection::vec(-1e6..1e6f64, 4), 0usize..=4), 1..6)
        ) {
            let samples: Vec<_> = rows.iter()
                .map(|(z, a)| ExposureSample::new(Kind::Fva, z.clone(), SurvivalVector::new(4, *a).unwrap()).unwrap())
                .collect();
            let m = EmpiricalMeasure::new(Kind::Fva, samples, ObservationGrid::unit(4).unwrap()).unwrap();
            let mut buf = Vec::new();
            write_samples(&mut buf, &m).unwrap();
            let back = read_samples(buf.as_slice(), Kind::Fva, None).unwrap();
            prop_assert_eq!(back, m);
        }
    }
}
