//! CSV input and output for point patterns, rasters and curves.
//!
//! Patterns use a `x,y,type` header with 1-based type labels. Rasters start
//! with the window line pair `x0,y0,x1,y1` and the grid line pair `nx,ny`,
//! followed by `ny` rows of `nx` values, bottom row first.

use std::io::{BufRead, BufReader, Read, Write};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::geometry::{Point, PointPattern, ScalarField, Window};
use crate::real::Real;

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

fn parse_num<T: Real>(s: &str, line: usize) -> Result<T> {
    f64::from_str(s.trim())
        .map(T::of)
        .map_err(|e| parse_err(line, format!("`{}`: {e}", s.trim())))
}

/// Reads a typed pattern. When `n_types` is `None` the largest label is used.
pub fn read_pattern<T: Real, R: Read>(reader: R, window: Window<T>, n_types: Option<usize>) -> Result<PointPattern<T>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h.eq_ignore_ascii_case(name))
            .ok_or_else(|| parse_err(1, format!("missing `{name}` column")))
    };
    let (cx, cy, ct) = (col("x")?, col("y")?, col("type")?);
    let mut points = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = k + 2;
        let field = |c: usize| rec.get(c).ok_or_else(|| parse_err(line, "short record"));
        let x = parse_num::<T>(field(cx)?, line)?;
        let y = parse_num::<T>(field(cy)?, line)?;
        let ty: usize = field(ct)?
            .parse()
            .map_err(|_| parse_err(line, "type must be a positive integer"))?;
        if ty == 0 {
            return Err(parse_err(line, "type labels start at 1"));
        }
        points.push(Point { x, y, ty: ty - 1 });
    }
    let p = n_types.unwrap_or_else(|| points.iter().map(|q| q.ty + 1).max().unwrap_or(1));
    PointPattern::new(window, p, points)
}

pub fn write_pattern<T: Real, W: Write>(writer: W, pattern: &PointPattern<T>) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["x", "y", "type"])?;
    for p in pattern.points() {
        w.write_record([p.x.to_string(), p.y.to_string(), (p.ty + 1).to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_raster<T: Real, W: Write>(mut writer: W, field: &ScalarField<T>) -> Result<()> {
    let win = field.window();
    writeln!(writer, "x0,y0,x1,y1")?;
    writeln!(writer, "{},{},{},{}", win.x0, win.y0, win.x1, win.y1)?;
    writeln!(writer, "nx,ny")?;
    writeln!(writer, "{},{}", field.nx(), field.ny())?;
    for row in field.values().chunks(field.nx()) {
        let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        writeln!(writer, "{}", line.join(","))?;
    }
    Ok(())
}

pub fn read_raster<T: Real, R: Read>(reader: R) -> Result<ScalarField<T>> {
    let mut lines = BufReader::new(reader).lines();
    let mut next = |n: usize| -> Result<String> {
        lines.next().ok_or_else(|| parse_err(n, "unexpected end of raster"))?.map_err(Error::from)
    };
    let split = |s: &str, n: usize, line: usize| -> Result<Vec<String>> {
        let parts: Vec<String> = s.split(',').map(|t| t.trim().to_string()).collect();
        if parts.len() != n {
            return Err(parse_err(line, format!("expected {n} values, found {}", parts.len())));
        }
        Ok(parts)
    };
    next(1)?;
    let w = split(&next(2)?, 4, 2)?;
    let w: Vec<T> = w.iter().map(|s| parse_num(s, 2)).collect::<Result<_>>()?;
    next(3)?;
    let g = split(&next(4)?, 2, 4)?;
    let dims: Vec<usize> = g
        .iter()
        .map(|s| s.parse().map_err(|_| parse_err(4, "grid sizes must be integers")))
        .collect::<Result<_>>()?;
    let (nx, ny) = (dims[0], dims[1]);
    let mut values = Vec::with_capacity(nx * ny);
    for iy in 0..ny {
        let line = 5 + iy;
        for s in split(&next(line)?, nx, line)? {
            values.push(parse_num(&s, line)?);
        }
    }
    ScalarField::new(Window::new(w[0], w[1], w[2], w[3])?, nx, ny, values)
}

/// Writes named columns of equal length as CSV.
pub fn write_columns<T: Real, W: Write>(writer: W, names: &[&str], columns: &[Vec<Option<T>>]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(names)?;
    let n = columns.first().map_or(0, Vec::len);
    for row in 0..n {
        w.write_record(columns.iter().map(|c| c[row].map_or_else(|| "NA".to_string(), |v| v.to_string())))?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pattern_round_trip() {
        let pts = vec![Point { x: 0.1, y: 0.25, ty: 0 }, Point { x: 0.9, y: 1.0 / 3.0, ty: 2 }];
        let p = PointPattern::new(Window::unit(), 4, pts).unwrap();
        let mut buf = Vec::new();
        write_pattern(&mut buf, &p).unwrap();
        assert!(String::from_utf8_lossy(&buf).starts_with("x,y,type\n0.1,0.25,1\n"));
        let q: PointPattern<f64> = read_pattern(&buf[..], Window::unit(), Some(4)).unwrap();
        assert_eq!(p, q);
        assert_eq!(read_pattern::<f64, _>(&buf[..], Window::unit(), None).unwrap().n_types(), 3);
    }

    #[test]
    fn pattern_errors_carry_line_numbers() {
        let bad = "x,y,type\n0.1,0.2,1\n0.3,abc,1\n";
        match read_pattern::<f64, _>(bad.as_bytes(), Window::unit(), None) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        let zero = "x,y,type\n0.1,0.2,0\n";
        assert!(read_pattern::<f64, _>(zero.as_bytes(), Window::unit(), None).is_err());
        let outside = "x,y,type\n1.5,0.2,1\n";
        assert!(read_pattern::<f64, _>(outside.as_bytes(), Window::unit(), None).is_err());
    }

    #[test]
    fn raster_round_trip() {
        let w = Window::new(0.0, -1.0, 2.0, 1.0).unwrap();
        let f = ScalarField::from_fn(w, 3, 2, |x, y| x * 0.1 + y).unwrap();
        let mut buf = Vec::new();
        write_raster(&mut buf, &f).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("x0,y0,x1,y1\n0,-1,2,1\nnx,ny\n3,2\n"));
        let g: ScalarField<f64> = read_raster(&buf[..]).unwrap();
        assert_eq!(f, g);
    }

    #[test]
    fn raster_rejects_ragged_rows() {
        let text = "x0,y0,x1,y1\n0,0,1,1\nnx,ny\n2,2\n1,2\n3\n";
        match read_raster::<f64, _>(text.as_bytes()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 6),
            other => panic!("unexpected {other:?}"),
        }
    }
}
