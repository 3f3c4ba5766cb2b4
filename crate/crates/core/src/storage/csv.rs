use std::fs::File;
use std::path::Path;

use crate::error::{Error, Result};
use crate::learned::string_to_key;
use crate::object::SpatialObject;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CsvSchema {
    pub delimiter: u8,
    pub x_column: usize,
    pub y_column: usize,
    /// Integer payloads are kept as-is; other text is hashed to a key.
    pub payload_column: Option<usize>,
    pub has_header: bool,
}

impl Default for CsvSchema {
    fn default() -> Self {
        Self {
            delimiter: b',',
            x_column: 0,
            y_column: 1,
            payload_column: None,
            has_header: true,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Ingested {
    /// Objects with unset (zero) keys, in source row order.
    pub objects: Vec<SpatialObject>,
    pub skipped: usize,
}

fn parse_coord(field: Option<&str>) -> Option<f64> {
    let v: f64 = field?.trim().parse().ok()?;
    v.is_finite().then_some(v)
}

fn parse_payload(field: &str) -> u64 {
    let t = field.trim();
    t.parse::<u64>()
        .ok()
        .or_else(|| string_to_key(t).ok())
        .unwrap_or(0)
}

/// Reads points per `schema`. Rows with missing, unparseable or non-finite
/// coordinates are skipped and counted; the payload defaults to the data row
/// ordinal.
pub fn ingest_csv(path: impl AsRef<Path>, schema: &CsvSchema) -> Result<Ingested> {
    let path = path.as_ref();
    if schema.x_column == schema.y_column {
        return Err(Error::InvalidParameter(
            "x and y columns must differ".into(),
        ));
    }
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = ::csv::ReaderBuilder::new()
        .delimiter(schema.delimiter)
        .has_headers(schema.has_header)
        .flexible(true)
        .from_reader(std::io::BufReader::new(file));

    let mut objects = Vec::new();
    let mut skipped = 0usize;
    for (row, record) in reader.records().enumerate() {
        let Ok(record) = record else {
            skipped += 1;
            continue;
        };
        let x = parse_coord(record.get(schema.x_column));
        let y = parse_coord(record.get(schema.y_column));
        let (Some(x), Some(y)) = (x, y) else {
            skipped += 1;
            continue;
        };
        let payload = match schema.payload_column {
            Some(c) => record.get(c).map_or(row as u64, parse_payload),
            None => row as u64,
        };
        objects.push(SpatialObject::new(0.0, x, y, payload));
    }
    if objects.is_empty() {
        return Err(Error::NoValidRows {
            path: path.to_path_buf(),
            skipped,
        });
    }
    Ok(Ingested { objects, skipped })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    #[test]
    fn header_row_is_not_data() {
        let f = write("x,y\n1,2\n3,4\n");
        let got = ingest_csv(f.path(), &CsvSchema::default()).unwrap();
        assert_eq!(got.objects.len(), 2);
        assert_eq!(got.objects[1], SpatialObject::new(0.0, 3.0, 4.0, 1));
    }

    #[test]
    fn bad_rows_skipped_and_counted() {
        let f = write("x,y\nabc,4\n1,2\nNaN,1\n5\n7,8\n");
        let got = ingest_csv(f.path(), &CsvSchema::default()).unwrap();
        assert_eq!(got.skipped, 3);
        let payloads: Vec<_> = got.objects.iter().map(|o| o.payload).collect();
        assert_eq!(payloads, vec![1, 4]);
    }

    #[test]
    fn payload_column_and_delimiter() {
        let f = write("a;1.5;2.5\n17;0;0\n");
        let schema = CsvSchema {
            delimiter: b';',
            x_column: 1,
            y_column: 2,
            payload_column: Some(0),
            has_header: false,
        };
        let got = ingest_csv(f.path(), &schema).unwrap();
        assert_eq!(got.objects[0].payload, 97);
        assert_eq!(got.objects[1].payload, 17);
    }

    #[test]
    fn errors() {
        assert!(matches!(
            ingest_csv("/nonexistent/file.csv", &CsvSchema::default()),
            Err(Error::Io { .. })
        ));
        let f = write("x,y\nfoo,bar\n");
        assert!(matches!(
            ingest_csv(f.path(), &CsvSchema::default()),
            Err(Error::NoValidRows { skipped: 1, .. })
        ));
        let same = CsvSchema {
            y_column: 0,
            ..CsvSchema::default()
        };
        assert!(ingest_csv(f.path(), &same).is_err());
    }
}
