//! Dense exposure matrices as CSV: `N` header-less rows of `N`
//! comma-separated non-negative reals, row `i` holding what bank `i` lent.

use std::fs::File;
use std::io::{self, BufWriter, Read, Write};
use std::path::Path;

use banksim_core::ExposureMatrix;

use crate::error::CliError;

pub fn read_matrix<R: Read>(reader: R) -> Result<ExposureMatrix, CliError> {
    let mut csv = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut rows = Vec::new();
    for (i, record) in csv.records().enumerate() {
        let record = record.map_err(|e| CliError::Config(format!("row {i}: {e}")))?;
        let row = record
            .iter()
            .enumerate()
            .map(|(j, field)| {
                field
                    .parse::<f64>()
                    .map_err(|_| CliError::Config(format!("row {i}, column {j}: {field:?}")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        rows.push(row);
    }
    Ok(ExposureMatrix::from_rows(&rows)?)
}

pub fn write_matrix<W: Write>(mut out: W, matrix: &ExposureMatrix) -> io::Result<()> {
    for row in matrix.rows() {
        for (j, x) in row.iter().enumerate() {
            if j > 0 {
                out.write_all(b",")?;
            }
            write!(out, "{x}")?;
        }
        out.write_all(b"\n")?;
    }
    out.flush()
}

pub fn load_matrix(path: &Path) -> Result<ExposureMatrix, CliError> {
    let file = File::open(path).map_err(CliError::io(path))?;
    read_matrix(file).map_err(|e| match e {
        CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
        CliError::Sim(e) => CliError::Config(format!("{}: {e}", path.display())),
        other => other,
    })
}

pub fn save_matrix(path: &Path, matrix: &ExposureMatrix) -> Result<(), CliError> {
    let file = File::create(path).map_err(CliError::io(path))?;
    write_matrix(BufWriter::new(file), matrix).map_err(CliError::io(path))
}
