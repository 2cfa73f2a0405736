//! PLY reader (ASCII and binary little-endian) and writer.

use std::fs;
use std::io::Write;
use std::path::Path;

use nalgebra::Point3;

use crate::error::{Error, Result};
use crate::geometry::LabeledCloud;
use crate::stability::Mesh;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Encoding {
    Ascii,
    BinaryLittleEndian,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Scalar {
    I8,
    U8,
    I16,
    U16,
    I32,
    U32,
    F32,
    F64,
}

impl Scalar {
    fn parse(s: &str) -> Option<Scalar> {
        Some(match s {
            "char" | "int8" => Scalar::I8,
            "uchar" | "uint8" => Scalar::U8,
            "short" | "int16" => Scalar::I16,
            "ushort" | "uint16" => Scalar::U16,
            "int" | "int32" => Scalar::I32,
            "uint" | "uint32" => Scalar::U32,
            "float" | "float32" => Scalar::F32,
            "double" | "float64" => Scalar::F64,
            _ => return None,
        })
    }

    fn size(self) -> usize {
        match self {
            Scalar::I8 | Scalar::U8 => 1,
            Scalar::I16 | Scalar::U16 => 2,
            Scalar::I32 | Scalar::U32 | Scalar::F32 => 4,
            Scalar::F64 => 8,
        }
    }

    fn read_le(self, b: &[u8]) -> f64 {
        match self {
            Scalar::I8 => b[0] as i8 as f64,
            Scalar::U8 => b[0] as f64,
            Scalar::I16 => i16::from_le_bytes([b[0], b[1]]) as f64,
            Scalar::U16 => u16::from_le_bytes([b[0], b[1]]) as f64,
            Scalar::I32 => i32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64,
            Scalar::U32 => u32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64,
            Scalar::F32 => f32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64,
            Scalar::F64 => f64::from_le_bytes(b[..8].try_into().expect("8 bytes")),
        }
    }
}

#[derive(Debug, Clone)]
enum Property {
    Scalar { name: String, ty: Scalar },
    List { name: String, count: Scalar, item: Scalar },
}

#[derive(Debug, Clone)]
struct Element {
    name: String,
    count: usize,
    properties: Vec<Property>,
}

/// Contents of a PLY file relevant here.
#[derive(Debug, Clone, Default)]
pub struct PlyData {
    pub vertices: Vec<Point3<f64>>,
    /// RGB in `[0, 1]`.
    pub colors: Option<Vec<[f64; 3]>>,
    /// Polygon faces as vertex index lists.
    pub faces: Vec<Vec<u32>>,
}

pub fn read(path: &Path) -> Result<PlyData> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    parse(path, &bytes)
}

fn parse(path: &Path, bytes: &[u8]) -> Result<PlyData> {
    const END: &[u8] = b"end_header";
    let end = bytes
        .windows(END.len())
        .position(|w| w == END)
        .ok_or_else(|| Error::parse(path, 1, "missing end_header"))?;
    let mut body_start = end + END.len();
    while body_start < bytes.len() && bytes[body_start] != b'\n' {
        body_start += 1;
    }
    body_start += 1;
    let header = std::str::from_utf8(&bytes[..end]).map_err(|_| Error::parse(path, 1, "header is not text"))?;

    let mut lines = header.lines().enumerate();
    match lines.next() {
        Some((_, l)) if l.trim() == "ply" => {}
        _ => {
            return Err(Error::UnsupportedFormat {
                path: path.into(),
                reason: "missing `ply` magic".into(),
            })
        }
    }
    let mut encoding = None;
    let mut elements: Vec<Element> = Vec::new();
    for (i, line) in lines {
        let toks: Vec<&str> = line.split_whitespace().collect();
        match toks.as_slice() {
            [] | ["comment", ..] | ["obj_info", ..] => {}
            ["format", fmt, _version] => {
                encoding = Some(match *fmt {
                    "ascii" => Encoding::Ascii,
                    "binary_little_endian" => Encoding::BinaryLittleEndian,
                    other => {
                        return Err(Error::UnsupportedFormat {
                            path: path.into(),
                            reason: format!("PLY format `{other}`"),
                        })
                    }
                })
            }
            ["element", name, count] => elements.push(Element {
                name: name.to_string(),
                count: count.parse().map_err(|_| Error::parse(path, i + 1, "bad element count"))?,
                properties: Vec::new(),
            }),
            ["property", "list", count, item, name] => {
                let el = elements.last_mut().ok_or_else(|| Error::parse(path, i + 1, "property before element"))?;
                let (Some(count), Some(item)) = (Scalar::parse(count), Scalar::parse(item)) else {
                    return Err(Error::parse(path, i + 1, "unknown list property type"));
                };
                el.properties.push(Property::List {
                    name: name.to_string(),
                    count,
                    item,
                });
            }
            ["property", ty, name] => {
                let el = elements.last_mut().ok_or_else(|| Error::parse(path, i + 1, "property before element"))?;
                let ty = Scalar::parse(ty).ok_or_else(|| Error::parse(path, i + 1, format!("unknown type `{ty}`")))?;
                el.properties.push(Property::Scalar {
                    name: name.to_string(),
                    ty,
                });
            }
            _ => return Err(Error::parse(path, i + 1, format!("unrecognized header line `{line}`"))),
        }
    }
    let encoding = encoding.ok_or_else(|| Error::parse(path, 2, "missing format line"))?;
    let body = bytes.get(body_start..).unwrap_or(&[]);
    let mut reader: Box<dyn ValueReader> = match encoding {
        Encoding::Ascii => Box::new(AsciiReader::new(path, body)?),
        Encoding::BinaryLittleEndian => Box::new(BinaryReader { path, body, pos: 0 }),
    };

    let mut data = PlyData::default();
    for el in &elements {
        let is_vertex = el.name == "vertex";
        let is_face = el.name == "face";
        let names: Vec<&str> = el
            .properties
            .iter()
            .map(|p| match p {
                Property::Scalar { name, .. } | Property::List { name, .. } => name.as_str(),
            })
            .collect();
        let find = |n: &str| names.iter().position(|x| *x == n);
        let xyz = (find("x"), find("y"), find("z"));
        let rgb = (find("red"), find("green"), find("blue"));
        if is_vertex && (xyz.0.is_none() || xyz.1.is_none() || xyz.2.is_none()) {
            return Err(Error::parse(path, 1, "vertex element lacks x/y/z"));
        }
        let has_color = is_vertex && rgb.0.is_some() && rgb.1.is_some() && rgb.2.is_some();
        let mut colors = Vec::new();
        let mut scalars = vec![0.0; el.properties.len()];
        for _ in 0..el.count {
            let mut face: Option<Vec<u32>> = None;
            for (k, prop) in el.properties.iter().enumerate() {
                match prop {
                    Property::Scalar { ty, .. } => scalars[k] = reader.scalar(*ty)?,
                    Property::List { name, count, item } => {
                        let n = reader.scalar(*count)?;
                        if !(0.0..=1e6).contains(&n) {
                            return Err(Error::parse(path, 0, "implausible list length"));
                        }
                        let mut list = Vec::with_capacity(n as usize);
                        for _ in 0..n as usize {
                            list.push(reader.scalar(*item)?);
                        }
                        if is_face && (name == "vertex_indices" || name == "vertex_index") {
                            face = Some(list.into_iter().map(|v| v as u32).collect());
                        }
                    }
                }
            }
            if is_vertex {
                let (x, y, z) = (xyz.0.unwrap(), xyz.1.unwrap(), xyz.2.unwrap());
                data.vertices.push(Point3::new(scalars[x], scalars[y], scalars[z]));
                if has_color {
                    let (r, g, b) = (rgb.0.unwrap(), rgb.1.unwrap(), rgb.2.unwrap());
                    let norm = |k: usize| match &el.properties[k] {
                        Property::Scalar { ty: Scalar::U8, .. } => scalars[k] / 255.0,
                        _ => scalars[k],
                    };
                    colors.push([norm(r), norm(g), norm(b)]);
                }
            }
            if let Some(f) = face {
                data.faces.push(f);
            }
        }
        if has_color {
            data.colors = Some(colors);
        }
    }
    Ok(data)
}

trait ValueReader {
    fn scalar(&mut self, ty: Scalar) -> Result<f64>;
}

struct AsciiReader<'a> {
    path: &'a Path,
    tokens: std::str::SplitAsciiWhitespace<'a>,
}

impl<'a> AsciiReader<'a> {
    fn new(path: &'a Path, body: &'a [u8]) -> Result<Self> {
        let text = std::str::from_utf8(body).map_err(|_| Error::parse(path, 0, "ASCII body is not text"))?;
        Ok(AsciiReader {
            path,
            tokens: text.split_ascii_whitespace(),
        })
    }
}

impl ValueReader for AsciiReader<'_> {
    fn scalar(&mut self, _ty: Scalar) -> Result<f64> {
        let tok = self
            .tokens
            .next()
            .ok_or_else(|| Error::parse(self.path, 0, "unexpected end of ASCII body"))?;
        tok.parse()
            .map_err(|_| Error::parse(self.path, 0, format!("bad number `{tok}`")))
    }
}

struct BinaryReader<'a> {
    path: &'a Path,
    body: &'a [u8],
    pos: usize,
}

impl ValueReader for BinaryReader<'_> {
    fn scalar(&mut self, ty: Scalar) -> Result<f64> {
        let n = ty.size();
        let b = self
            .body
            .get(self.pos..self.pos + n)
            .ok_or_else(|| Error::parse(self.path, 0, "unexpected end of binary body"))?;
        self.pos += n;
        Ok(ty.read_le(b))
    }
}

fn header(out: &mut Vec<u8>, encoding: Encoding, n_vertices: usize, colors: bool, n_faces: Option<usize>) {
    let fmt = match encoding {
        Encoding::Ascii => "ascii",
        Encoding::BinaryLittleEndian => "binary_little_endian",
    };
    out.extend_from_slice(format!("ply\nformat {fmt} 1.0\nelement vertex {n_vertices}\n").as_bytes());
    out.extend_from_slice(b"property double x\nproperty double y\nproperty double z\n");
    if colors {
        out.extend_from_slice(b"property uchar red\nproperty uchar green\nproperty uchar blue\n");
    }
    if let Some(f) = n_faces {
        out.extend_from_slice(format!("element face {f}\nproperty list uchar int vertex_indices\n").as_bytes());
    }
    out.extend_from_slice(b"end_header\n");
}

fn color_byte(c: f64) -> u8 {
    (c.clamp(0.0, 1.0) * 255.0).round() as u8
}

fn encode(
    encoding: Encoding,
    vertices: &[Point3<f64>],
    colors: Option<&[[f64; 3]]>,
    faces: Option<&[[u32; 3]]>,
) -> Vec<u8> {
    let mut out = Vec::new();
    header(&mut out, encoding, vertices.len(), colors.is_some(), faces.map(|f| f.len()));
    for (i, p) in vertices.iter().enumerate() {
        match encoding {
            Encoding::Ascii => {
                // `{}` on f64 prints the shortest decimal that round-trips exactly.
                out.extend_from_slice(format!("{} {} {}", p.x, p.y, p.z).as_bytes());
                if let Some(c) = colors {
                    let c = c[i];
                    out.extend_from_slice(
                        format!(" {} {} {}", color_byte(c[0]), color_byte(c[1]), color_byte(c[2])).as_bytes(),
                    );
                }
                out.push(b'\n');
            }
            Encoding::BinaryLittleEndian => {
                for v in [p.x, p.y, p.z] {
                    out.extend_from_slice(&v.to_le_bytes());
                }
                if let Some(c) = colors {
                    out.extend(c[i].iter().map(|&v| color_byte(v)));
                }
            }
        }
    }
    for f in faces.unwrap_or(&[]) {
        match encoding {
            Encoding::Ascii => out.extend_from_slice(format!("3 {} {} {}\n", f[0], f[1], f[2]).as_bytes()),
            Encoding::BinaryLittleEndian => {
                out.push(3);
                for &v in f {
                    out.extend_from_slice(&(v as i32).to_le_bytes());
                }
            }
        }
    }
    out
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(bytes).map_err(|e| Error::io(path, e))
}

/// Writes points (and colors, when present). Labels go to a `.labels` sidecar.
pub fn write_cloud(path: &Path, cloud: &LabeledCloud, encoding: Encoding) -> Result<()> {
    write_bytes(path, &encode(encoding, cloud.points(), cloud.colors(), None))
}

pub fn write_mesh(path: &Path, mesh: &Mesh, encoding: Encoding) -> Result<()> {
    write_bytes(path, &encode(encoding, mesh.vertices(), None, Some(mesh.faces())))
}
