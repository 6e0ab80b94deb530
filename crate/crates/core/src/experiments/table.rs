use std::io::Write;
use std::path::Path;

use crate::error::Result;

/// One CSV file: `name.csv` with a header and string rows.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Table { name: name.to_string(), header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    /// Index of a header column.
    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    /// Values of a numeric column, in row order.
    pub fn floats(&self, name: &str) -> Option<Vec<f64>> {
        let c = self.column(name)?;
        self.rows.iter().map(|r| r[c].parse().ok()).collect()
    }

    /// Rows whose column `key` equals `value`.
    pub fn filter(&self, key: &str, value: &str) -> Option<Table> {
        let c = self.column(key)?;
        let mut t = Table { name: self.name.clone(), header: self.header.clone(), rows: Vec::new() };
        t.rows = self.rows.iter().filter(|r| r[c] == value).cloned().collect();
        Some(t)
    }

    /// Writes `comment`, the header and the rows.
    pub fn write<W: Write>(&self, mut w: W, comment: &str) -> Result<()> {
        writeln!(w, "{comment}")?;
        let mut csv = csv::Writer::from_writer(w);
        csv.write_record(&self.header)?;
        for r in &self.rows {
            csv.write_record(r)?;
        }
        csv.flush()?;
        Ok(())
    }

    pub fn save(&self, dir: &Path, comment: &str) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        self.write(std::io::BufWriter::new(std::fs::File::create(dir.join(format!("{}.csv", self.name)))?), comment)
    }

    /// Reads a CSV written by [`write`](Self::write); `#` lines are skipped.
    pub fn read(path: &Path) -> Result<Table> {
        let text = std::fs::read_to_string(path)?;
        let body: String = text.lines().filter(|l| !l.starts_with('#')).map(|l| format!("{l}\n")).collect();
        let mut r = csv::Reader::from_reader(body.as_bytes());
        let header = r.headers()?.iter().map(str::to_string).collect();
        let rows = r.records().map(|rec| rec.map(|rec| rec.iter().map(str::to_string).collect())).collect::<std::result::Result<_, _>>()?;
        let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        Ok(Table { name, header, rows })
    }
}

/// Formats a float with the shortest representation that round-trips.
pub fn fmt(x: f64) -> String {
    format!("{x:?}")
}
