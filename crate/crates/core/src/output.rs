//! CSV and binary PPM writers.
//!
//! Floats are written with Rust's shortest round-trip formatting, so every
//! value parses back to the identical `f64`.

use std::io::{self, Write};

use crate::stability::Grid;

pub struct CsvWriter<W: Write> {
    inner: W,
}

impl<W: Write> CsvWriter<W> {
    pub fn new(mut inner: W, header: &[&str]) -> io::Result<Self> {
        writeln!(inner, "{}", header.join(","))?;
        Ok(Self { inner })
    }

    pub fn row(&mut self, fields: &[Field]) -> io::Result<()> {
        let mut first = true;
        for f in fields {
            if !first {
                self.inner.write_all(b",")?;
            }
            first = false;
            match f {
                Field::F(v) => write!(self.inner, "{v}")?,
                Field::U(v) => write!(self.inner, "{v}")?,
                Field::S(v) => self.inner.write_all(v.as_bytes())?,
            }
        }
        self.inner.write_all(b"\n")
    }

    pub fn comment(&mut self, text: &str) -> io::Result<()> {
        writeln!(self.inner, "# {text}")
    }

    pub fn finish(mut self) -> io::Result<W> {
        self.inner.flush()?;
        Ok(self.inner)
    }
}

pub enum Field<'a> {
    F(f64),
    U(u64),
    S(&'a str),
}

/// Writes `grid` as a P6 pixmap, top row at the largest second coordinate.
pub fn write_ppm<T: Copy, W: Write>(
    mut w: W,
    grid: &Grid<T>,
    color: impl Fn(T) -> [u8; 3],
) -> io::Result<()> {
    let (rows, cols) = (grid.rows(), grid.cols());
    write!(w, "P6\n{cols} {rows}\n255\n")?;
    let mut buf = Vec::with_capacity(rows * cols * 3);
    for i in (0..rows).rev() {
        for j in 0..cols {
            buf.extend_from_slice(&color(grid.get(i, j)));
        }
    }
    w.write_all(&buf)?;
    w.flush()
}

/// Parsed P6 image: `(width, height, rgb bytes)`.
pub fn read_ppm(bytes: &[u8]) -> Option<(usize, usize, &[u8])> {
    let mut fields = Vec::new();
    let mut pos = 0;
    while fields.len() < 4 {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return None;
        }
        fields.push(std::str::from_utf8(&bytes[start..pos]).ok()?);
    }
    if fields[0] != "P6" || fields[3] != "255" {
        return None;
    }
    let (w, h): (usize, usize) = (fields[1].parse().ok()?, fields[2].parse().ok()?);
    let data = bytes.get(pos + 1..)?;
    (data.len() == w * h * 3).then_some((w, h, data))
}
