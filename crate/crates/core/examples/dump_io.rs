// Write a binary score dump, stream it back, and write the triples table.
//
// cargo run --example dump_io

use std::io::Cursor;

use gapcount::gap::{contact_triple, DEFAULT_EPS};
use gapcount::io::{read_triples, write_triples, DumpFormat, DumpReader, DumpWriter, Dtype};
use gapcount::row::{RowMeta, ScoreRow};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let rows = vec![
        ScoreRow::new(vec![0.0, -1.0, -2.0], RowMeta::new("demo", 0, 0, "a", 3, 2))?,
        ScoreRow::new(vec![1.0, 1.0, 0.5, 0.0], RowMeta::new("demo", 0, 1, "a", 4, 3))?,
    ];
    let mut writer = DumpWriter::new(Vec::new(), DumpFormat::Binary, Dtype::F32)?;
    for row in &rows {
        writer.write_row(row)?;
    }
    let bytes = writer.finish()?;
    println!("binary dump: {} bytes", bytes.len());

    let mut triples = Vec::new();
    for row in DumpReader::new(Box::new(Cursor::new(bytes)), false)? {
        let row = row?;
        triples.push((row.meta().clone(), contact_triple(&row, DEFAULT_EPS)?));
    }
    let csv = write_triples(Vec::new(), &triples)?;
    print!("{}", String::from_utf8(csv.clone())?);
    assert_eq!(read_triples(csv.as_slice())?, triples);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
