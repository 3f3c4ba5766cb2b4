//! Polygon files: one polygon per line, `id;x1,y1 x2,y2 ...`.
//! Blank lines and lines starting with `#` are ignored.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::{Point, Polygon};

#[derive(Debug, Clone)]
pub struct ParsedPolygons {
    pub polygons: Vec<Polygon>,
    /// 1-based line numbers of rejected lines.
    pub invalid_lines: Vec<usize>,
}

fn parse_line(line: &str) -> Option<Polygon> {
    let (id, coords) = line.split_once(';')?;
    let id = id.trim();
    if id.is_empty() {
        return None;
    }
    let vertices = coords
        .split_whitespace()
        .map(|pair| {
            let (x, y) = pair.split_once(',')?;
            Point::try_new(x.trim().parse().ok()?, y.trim().parse().ok()?).ok()
        })
        .collect::<Option<Vec<_>>>()?;
    Polygon::new(id, vertices).ok()
}

pub fn parse_polygons_str(text: &str) -> Result<ParsedPolygons> {
    let mut polygons = Vec::new();
    let mut invalid_lines = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        match parse_line(line) {
            Some(pg) => polygons.push(pg),
            None => invalid_lines.push(i + 1),
        }
    }
    if polygons.is_empty() {
        return Err(Error::InvalidParameter(format!(
            "no valid polygons ({} invalid lines)",
            invalid_lines.len()
        )));
    }
    Ok(ParsedPolygons {
        polygons,
        invalid_lines,
    })
}

pub fn parse_polygons(path: impl AsRef<Path>) -> Result<ParsedPolygons> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_polygons_str(&text)
}

/// Serializes polygons in the line format, with round-trip float precision.
pub fn write_polygons(polygons: &[Polygon]) -> String {
    let mut out = String::new();
    for pg in polygons {
        out.push_str(&pg.id);
        out.push(';');
        for (i, v) in pg.vertices().iter().enumerate() {
            if i > 0 {
                out.push(' ');
            }
            let _ = write!(out, "{:?},{:?}", v.x, v.y);
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Rect;
    use crate::storage::synthetic::gen_convex_polygons;

    #[test]
    fn unit_square_line() {
        let got = parse_polygons_str("p1;0,0 1,0 1,1 0,1\n").unwrap();
        assert_eq!(got.polygons.len(), 1);
        assert_eq!(got.polygons[0].id, "p1");
        assert_eq!(got.polygons[0].mbr(), Rect::new(0.0, 0.0, 1.0, 1.0));
    }

    #[test]
    fn short_and_malformed_lines_skipped() {
        let got = parse_polygons_str("p1;0,0 1,0 1,1\np2;0,0 1,1\n# note\nbogus\np3;0,0 1,x 2,2\n")
            .unwrap();
        assert_eq!(got.polygons.len(), 1);
        assert_eq!(got.invalid_lines, vec![2, 4, 5]);
        assert!(parse_polygons_str("p2;0,0 1,1\n").is_err());
    }

    #[test]
    fn generated_polygons_round_trip() {
        let polys = gen_convex_polygons(100, &Rect::new(0.0, 0.0, 10.0, 10.0), 0.5, 5);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("polys.txt");
        std::fs::write(&path, write_polygons(&polys)).unwrap();
        let got = parse_polygons(&path).unwrap();
        assert_eq!(got.polygons.len(), 100);
        for (a, b) in got.polygons.iter().zip(&polys) {
            assert_eq!(a.mbr(), b.mbr());
            assert_eq!(a, b);
        }
    }
}
