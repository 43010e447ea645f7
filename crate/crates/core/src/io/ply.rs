//! PLY vertex reader (ASCII 1.0 and binary little-endian) and writer.
//!
//! Only the `x`, `y`, `z` properties of the `vertex` element are kept. Other
//! properties and elements are parsed far enough to be skipped.

use std::fmt;
use std::fs;
use std::path::Path;

use thiserror::Error;

use crate::geometry::Point3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Position {
    Line(usize),
    Byte(usize),
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Position::Line(l) => write!(f, "line {l}"),
            Position::Byte(b) => write!(f, "byte {b}"),
        }
    }
}

#[derive(Debug, Error)]
pub enum PlyError {
    #[error("malformed PLY header at line {line}: {message}")]
    MalformedHeader { line: usize, message: String },
    #[error("unsupported PLY format at line {line}: {format}")]
    UnsupportedFormat { line: usize, format: String },
    #[error("element '{element}' declares {expected} entries but {found} were read (at {position})")]
    CountMismatch {
        element: String,
        expected: usize,
        found: usize,
        position: Position,
    },
    #[error("malformed PLY body at {position}: {message}")]
    MalformedBody { position: Position, message: String },
    #[error("reading {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlyFormat {
    Ascii,
    BinaryLittleEndian,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlyCloud {
    pub points: Vec<Point3>,
    /// Vertex count declared in the header; always equals `points.len()`.
    pub declared_vertex_count: usize,
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
    fn parse(name: &str) -> Option<Self> {
        Some(match name {
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

#[derive(Debug, Clone, PartialEq)]
enum Property {
    Scalar { name: String, ty: Scalar },
    List { count: Scalar, item: Scalar },
}

#[derive(Debug, Clone, PartialEq)]
struct Element {
    name: String,
    count: usize,
    properties: Vec<Property>,
}

impl Element {
    fn coordinate_slots(&self) -> Option<[usize; 3]> {
        let find = |axis: &str| {
            self.properties
                .iter()
                .position(|p| matches!(p, Property::Scalar { name, .. } if name == axis))
        };
        Some([find("x")?, find("y")?, find("z")?])
    }
}

struct Header {
    format: PlyFormat,
    elements: Vec<Element>,
    /// Byte offset of the body.
    body_start: usize,
    /// Line number of the first body line (1-based).
    body_line: usize,
}

fn parse_header(bytes: &[u8]) -> Result<Header, PlyError> {
    let malformed = |line: usize, message: &str| PlyError::MalformedHeader {
        line,
        message: message.to_string(),
    };
    let mut offset = 0;
    let mut line_no = 0;
    let mut format = None;
    let mut elements: Vec<Element> = Vec::new();
    loop {
        let rest = &bytes[offset..];
        let Some(end) = rest.iter().position(|&b| b == b'\n') else {
            return Err(malformed(line_no + 1, "missing end_header"));
        };
        line_no += 1;
        offset += end + 1;
        let line = std::str::from_utf8(&rest[..end])
            .map_err(|_| malformed(line_no, "header is not valid UTF-8"))?
            .trim_end_matches('\r')
            .trim();
        let mut words = line.split_whitespace();
        let keyword = words.next().unwrap_or("");
        if line_no == 1 {
            if line != "ply" {
                return Err(malformed(1, "file does not start with 'ply'"));
            }
            continue;
        }
        match keyword {
            "" | "comment" | "obj_info" => {}
            "format" => {
                let kind = words.next().unwrap_or("");
                let version = words.next().unwrap_or("");
                format = Some(match (kind, version) {
                    ("ascii", "1.0") => PlyFormat::Ascii,
                    ("binary_little_endian", "1.0") => PlyFormat::BinaryLittleEndian,
                    _ => {
                        return Err(PlyError::UnsupportedFormat {
                            line: line_no,
                            format: format!("{kind} {version}").trim().to_string(),
                        })
                    }
                });
            }
            "element" => {
                let name = words.next().ok_or_else(|| malformed(line_no, "element without a name"))?;
                let count = words
                    .next()
                    .and_then(|c| c.parse().ok())
                    .ok_or_else(|| malformed(line_no, "element count is not a non-negative integer"))?;
                elements.push(Element {
                    name: name.to_string(),
                    count,
                    properties: Vec::new(),
                });
            }
            "property" => {
                let element = elements
                    .last_mut()
                    .ok_or_else(|| malformed(line_no, "property before any element"))?;
                let parts: Vec<&str> = words.collect();
                let property = match parts.as_slice() {
                    ["list", count, item, _name] => Property::List {
                        count: Scalar::parse(count).ok_or_else(|| malformed(line_no, "unknown list count type"))?,
                        item: Scalar::parse(item).ok_or_else(|| malformed(line_no, "unknown list item type"))?,
                    },
                    [ty, name] => Property::Scalar {
                        name: name.to_string(),
                        ty: Scalar::parse(ty).ok_or_else(|| malformed(line_no, "unknown property type"))?,
                    },
                    _ => return Err(malformed(line_no, "property line needs a type and a name")),
                };
                element.properties.push(property);
            }
            "end_header" => break,
            other => return Err(malformed(line_no, &format!("unknown keyword '{other}'"))),
        }
    }
    let format = format.ok_or_else(|| malformed(2, "missing format line"))?;
    let vertex = elements
        .iter()
        .find(|e| e.name == "vertex")
        .ok_or_else(|| malformed(line_no, "no vertex element"))?;
    if vertex.coordinate_slots().is_none() {
        return Err(malformed(line_no, "vertex element lacks x, y, z properties"));
    }
    Ok(Header {
        format,
        elements,
        body_start: offset,
        body_line: line_no + 1,
    })
}

/// Parses a PLY file held in memory.
pub fn parse_ply(bytes: &[u8]) -> Result<PlyCloud, PlyError> {
    let header = parse_header(bytes)?;
    let body = &bytes[header.body_start..];
    let points = match header.format {
        PlyFormat::Ascii => parse_ascii_body(body, &header)?,
        PlyFormat::BinaryLittleEndian => parse_binary_body(body, &header)?,
    };
    let declared_vertex_count = points.len();
    Ok(PlyCloud {
        points,
        declared_vertex_count,
    })
}

fn parse_ascii_body(body: &[u8], header: &Header) -> Result<Vec<Point3>, PlyError> {
    let text = std::str::from_utf8(body).map_err(|e| PlyError::MalformedBody {
        position: Position::Byte(header.body_start + e.valid_up_to()),
        message: "ASCII body is not valid UTF-8".into(),
    })?;
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (header.body_line + i, l.trim()))
        .filter(|(_, l)| !l.is_empty());
    let mut last_line = header.body_line.saturating_sub(1);
    let mut points = Vec::new();
    for element in &header.elements {
        let slots = (element.name == "vertex").then(|| element.coordinate_slots()).flatten();
        for found in 0..element.count {
            let Some((line_no, line)) = lines.next() else {
                return Err(PlyError::CountMismatch {
                    element: element.name.clone(),
                    expected: element.count,
                    found,
                    position: Position::Line(last_line + 1),
                });
            };
            last_line = line_no;
            let bad = |message: String| PlyError::MalformedBody {
                position: Position::Line(line_no),
                message,
            };
            let mut tokens = line.split_whitespace();
            let mut next_value = || -> Result<f64, PlyError> {
                let tok = tokens.next().ok_or_else(|| bad("too few values".into()))?;
                tok.parse::<f64>().map_err(|_| bad(format!("'{tok}' is not a number")))
            };
            let mut coords = [0.0; 3];
            for (pi, property) in element.properties.iter().enumerate() {
                match property {
                    Property::Scalar { .. } => {
                        let v = next_value()?;
                        if let Some(axis) = slots.and_then(|s| s.iter().position(|&slot| slot == pi)) {
                            coords[axis] = v;
                        }
                    }
                    Property::List { .. } => {
                        let len = next_value()?;
                        if !(len >= 0.0 && len.fract() == 0.0) {
                            return Err(bad(format!("list length {len} is not a count")));
                        }
                        for _ in 0..len as usize {
                            next_value()?;
                        }
                    }
                }
            }
            if tokens.next().is_some() {
                return Err(bad("more values than declared properties".into()));
            }
            if slots.is_some() {
                points.push(Point3::from(coords));
            }
        }
    }
    if let Some((line_no, _)) = lines.next() {
        let last = header.elements.last().expect("vertex element exists");
        return Err(PlyError::CountMismatch {
            element: last.name.clone(),
            expected: last.count,
            found: last.count + 1 + lines.count(),
            position: Position::Line(line_no),
        });
    }
    Ok(points)
}

fn parse_binary_body(body: &[u8], header: &Header) -> Result<Vec<Point3>, PlyError> {
    let mut cursor = 0usize;
    let mut points = Vec::new();
    for element in &header.elements {
        let slots = (element.name == "vertex").then(|| element.coordinate_slots()).flatten();
        for found in 0..element.count {
            let truncated = || PlyError::CountMismatch {
                element: element.name.clone(),
                expected: element.count,
                found,
                position: Position::Byte(header.body_start + body.len()),
            };
            let mut take = |ty: Scalar| -> Option<f64> {
                let bytes = body.get(cursor..cursor + ty.size())?;
                cursor += ty.size();
                Some(ty.read_le(bytes))
            };
            let mut coords = [0.0; 3];
            for (pi, property) in element.properties.iter().enumerate() {
                match *property {
                    Property::Scalar { ty, .. } => {
                        let v = take(ty).ok_or_else(truncated)?;
                        if let Some(axis) = slots.and_then(|s| s.iter().position(|&slot| slot == pi)) {
                            coords[axis] = v;
                        }
                    }
                    Property::List { count, item } => {
                        let len = take(count).ok_or_else(truncated)?;
                        for _ in 0..len as usize {
                            take(item).ok_or_else(truncated)?;
                        }
                    }
                }
            }
            if slots.is_some() {
                points.push(Point3::from(coords));
            }
        }
    }
    if cursor != body.len() {
        return Err(PlyError::MalformedBody {
            position: Position::Byte(header.body_start + cursor),
            message: format!("{} trailing bytes after the last element", body.len() - cursor),
        });
    }
    Ok(points)
}

pub fn read_ply_file(path: &Path) -> Result<PlyCloud, PlyError> {
    let bytes = fs::read(path).map_err(|source| PlyError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_ply(&bytes)
}

/// Serializes points as a vertex-only PLY with `double` coordinates.
pub fn write_ply(points: &[Point3], format: PlyFormat) -> Vec<u8> {
    let name = match format {
        PlyFormat::Ascii => "ascii",
        PlyFormat::BinaryLittleEndian => "binary_little_endian",
    };
    let mut out = format!(
        "ply\nformat {name} 1.0\nelement vertex {}\nproperty double x\nproperty double y\nproperty double z\nend_header\n",
        points.len()
    )
    .into_bytes();
    for p in points {
        match format {
            PlyFormat::Ascii => out.extend(format!("{} {} {}\n", p.x, p.y, p.z).bytes()),
            PlyFormat::BinaryLittleEndian => {
                for v in [p.x, p.y, p.z] {
                    out.extend(v.to_le_bytes());
                }
            }
        }
    }
    out
}
