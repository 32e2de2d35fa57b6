use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use super::{AttributeSchema, Case, CaseBase, DatasetError};

fn parse_bit(cell: &str, line: u64, column: &str) -> Result<bool, DatasetError> {
    match cell {
        "0" => Ok(false),
        "1" => Ok(true),
        other => Err(DatasetError::NonBinary { line, column: column.to_string(), value: other.to_string() }),
    }
}

/// Reads a case base: `id,label,<attr>...` header, then one case per row.
/// An empty label cell marks an unlabeled case.
pub fn load_case_base<R: Read>(source: R) -> Result<CaseBase, DatasetError> {
    let mut reader = csv::ReaderBuilder::new().has_headers(false).flexible(true).from_reader(source);
    let mut records = reader.records();

    let header = match records.next() {
        Some(h) => h?,
        None => return Err(DatasetError::BadHeader(String::new())),
    };
    if header.len() < 2 || &header[0] != "id" || &header[1] != "label" {
        return Err(DatasetError::BadHeader(header.iter().collect::<Vec<_>>().join(",")));
    }
    let schema = AttributeSchema::from_names(&header.iter().skip(2).collect::<Vec<_>>())?;
    let width = header.len();

    let mut cases = Vec::new();
    for record in records {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != width {
            return Err(DatasetError::RowLength { line, expected: width, found: record.len() });
        }
        let label = match &record[1] {
            "" => None,
            cell => Some(parse_bit(cell, line, "label")?),
        };
        let values = record
            .iter()
            .skip(2)
            .zip(schema.names())
            .map(|(cell, column)| parse_bit(cell, line, column))
            .collect::<Result<Vec<_>, _>>()?;
        cases.push(Case::new(&record[0], values, label));
    }
    CaseBase::new(schema, cases)
}

pub fn read_case_base_file(path: &Path) -> Result<CaseBase, DatasetError> {
    let file = File::open(path).map_err(|e| DatasetError::Io(format!("{}: {e}", path.display())))?;
    load_case_base(std::io::BufReader::new(file))
}

pub fn write_case_base<W: Write>(cb: &CaseBase, sink: W) -> Result<(), DatasetError> {
    let mut writer = csv::Writer::from_writer(sink);
    let mut header = vec!["id", "label"];
    header.extend(cb.schema().names());
    writer.write_record(&header)?;
    let mut row: Vec<&str> = Vec::with_capacity(header.len());
    for case in cb.cases() {
        row.clear();
        row.push(&case.id);
        row.push(match case.label {
            None => "",
            Some(true) => "1",
            Some(false) => "0",
        });
        row.extend(case.values.iter().map(|&v| if v { "1" } else { "0" }));
        writer.write_record(&row)?;
    }
    writer.flush().map_err(|e| DatasetError::Io(e.to_string()))?;
    Ok(())
}
