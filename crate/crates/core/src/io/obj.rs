use std::fs;
use std::path::Path;

use nalgebra::Point3;

use super::ply::PlyData;
use crate::error::{Error, Result};

/// Reads `v` and `f` records; faces may use `v/vt/vn` forms and negative indices.
pub fn read(path: &Path) -> Result<PlyData> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse(path, &text)
}

fn parse(path: &Path, text: &str) -> Result<PlyData> {
    let mut data = PlyData::default();
    let mut colors: Vec<[f64; 3]> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let mut toks = line.split_whitespace();
        match toks.next() {
            Some("v") => {
                let vals: Vec<f64> = toks
                    .map(|t| t.parse::<f64>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|_| Error::parse(path, i + 1, "bad vertex coordinate"))?;
                if vals.len() < 3 {
                    return Err(Error::parse(path, i + 1, "vertex needs 3 coordinates"));
                }
                data.vertices.push(Point3::new(vals[0], vals[1], vals[2]));
                if vals.len() >= 6 {
                    colors.push([vals[3], vals[4], vals[5]]);
                }
            }
            Some("f") => {
                let n = data.vertices.len() as i64;
                let mut face = Vec::new();
                for t in toks {
                    let raw: i64 = t
                        .split('/')
                        .next()
                        .unwrap_or("")
                        .parse()
                        .map_err(|_| Error::parse(path, i + 1, format!("bad face index `{t}`")))?;
                    let idx = if raw < 0 { n + raw } else { raw - 1 };
                    if idx < 0 || idx >= n {
                        return Err(Error::parse(path, i + 1, format!("face index {raw} out of range")));
                    }
                    face.push(idx as u32);
                }
                if face.len() < 3 {
                    return Err(Error::parse(path, i + 1, "face needs at least 3 vertices"));
                }
                data.faces.push(face);
            }
            _ => {}
        }
    }
    if !colors.is_empty() && colors.len() == data.vertices.len() {
        data.colors = Some(colors);
    }
    Ok(data)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_slashes_and_negative_indices() {
        let text = "# quad\nv 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nvn 0 0 1\nf 1/1/1 2/2/1 3/3/1 4/4/1\nf -4 -3 -2\n";
        let d = parse(Path::new("q.obj"), text).unwrap();
        assert_eq!(d.vertices.len(), 4);
        assert_eq!(d.faces, vec![vec![0, 1, 2, 3], vec![0, 1, 2]]);
    }

    #[test]
    fn out_of_range_index_is_an_error() {
        let text = "v 0 0 0\nf 1 2 3\n";
        assert!(matches!(parse(Path::new("bad.obj"), text), Err(Error::Parse { line: 2, .. })));
    }
}
