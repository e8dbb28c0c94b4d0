//! Gmsh MSH 2.2 (ASCII) import and export.
//!
//! Only what the solver consumes is supported: 6-node triangles (type 9)
//! for the flow domain and 3-node second-order lines (type 8) carrying the
//! boundary physical names `inflow`, `outflow`, `wall`, `cylinder`,
//! `symmetry` (case-insensitive). First-order meshes are rejected rather
//! than silently promoted — midside placement on curved boundaries is the
//! mesh's responsibility, not the reader's.

use std::collections::HashMap;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use super::{BoundaryEdge, BoundaryTag, Mesh, MeshError};
use crate::tensor2::Vec2;

/// Physical id used for the 2D fluid region in exported files.
const FLUID_PHYSICAL_ID: u32 = 100;

fn tag_physical_id(tag: BoundaryTag) -> u32 {
    BoundaryTag::ALL.iter().position(|&t| t == tag).unwrap() as u32 + 1
}

/// Write the mesh in MSH 2.2 ASCII. Coordinates are printed with Rust's
/// round-trip float formatting, so export → import is lossless.
pub fn export_gmsh<W: Write>(mesh: &Mesh, mut out: W) -> Result<(), MeshError> {
    writeln!(out, "$MeshFormat\n2.2 0 8\n$EndMeshFormat")?;

    writeln!(out, "$PhysicalNames\n{}", BoundaryTag::ALL.len() + 1)?;
    for tag in BoundaryTag::ALL {
        writeln!(out, "1 {} \"{}\"", tag_physical_id(tag), tag.name())?;
    }
    writeln!(out, "2 {FLUID_PHYSICAL_ID} \"fluid\"\n$EndPhysicalNames")?;

    writeln!(out, "$Nodes\n{}", mesh.n_nodes())?;
    for (i, c) in mesh.coords.iter().enumerate() {
        writeln!(out, "{} {} {} 0", i + 1, c.x, c.y)?;
    }
    writeln!(out, "$EndNodes")?;

    writeln!(out, "$Elements\n{}", mesh.boundary_edges.len() + mesh.n_elems())?;
    let mut id = 1;
    for be in &mesh.boundary_edges {
        let (a, b, m) = mesh.edge_nodes(be.elem, be.local_edge);
        let phys = tag_physical_id(be.tag);
        writeln!(out, "{id} 8 2 {phys} {phys} {} {} {}", a + 1, b + 1, m + 1)?;
        id += 1;
    }
    for el in &mesh.elems {
        write!(out, "{id} 9 2 {FLUID_PHYSICAL_ID} {FLUID_PHYSICAL_ID}")?;
        for &n in el {
            write!(out, " {}", n + 1)?;
        }
        writeln!(out)?;
        id += 1;
    }
    writeln!(out, "$EndElements")?;
    Ok(())
}

pub fn export_gmsh_file(mesh: &Mesh, path: &Path) -> Result<(), MeshError> {
    let file = std::fs::File::create(path)?;
    export_gmsh(mesh, std::io::BufWriter::new(file))
}

/// Read an MSH 2.2 ASCII mesh. Fails on other format versions, on element
/// types other than second-order lines/triangles (plus ignorable points),
/// on boundary lines without a recognized physical name, on inverted
/// triangles, and on boundary lines that match no triangle edge.
pub fn import_gmsh<R: Read>(input: R) -> Result<Mesh, MeshError> {
    let mut lines = Vec::new();
    for line in BufReader::new(input).lines() {
        lines.push(line?);
    }
    let mut cur = Cursor { lines: &lines, pos: 0 };

    let mut phys_names: HashMap<u32, String> = HashMap::new();
    let mut coords: Vec<Vec2> = Vec::new();
    let mut node_index: HashMap<u64, usize> = HashMap::new();
    let mut elems: Vec<[usize; 6]> = Vec::new();
    let mut raw_lines: Vec<([usize; 3], BoundaryTag)> = Vec::new();

    while let Some(header) = cur.next_nonempty() {
        match header.trim() {
            "$MeshFormat" => {
                let (ln, line) = cur.expect_line()?;
                let mut it = line.split_whitespace();
                let version = it.next().unwrap_or("").to_string();
                let file_type = it.next().unwrap_or("");
                if version != "2.2" || file_type != "0" {
                    return Err(MeshError::UnsupportedVersion {
                        found: format!("{version} (file-type {file_type})"),
                    });
                }
                let _ = ln;
                cur.skip_until("$EndMeshFormat")?;
            }
            "$PhysicalNames" => {
                let count: usize = cur.parse_count()?;
                for _ in 0..count {
                    let (ln, line) = cur.expect_line()?;
                    let mut it = line.split_whitespace();
                    let _dim: u32 = parse_tok(&mut it, ln, "physical dimension")?;
                    let id: u32 = parse_tok(&mut it, ln, "physical id")?;
                    let name = line
                        .splitn(3, char::is_whitespace)
                        .nth(2)
                        .unwrap_or("")
                        .trim()
                        .trim_matches('"')
                        .to_string();
                    phys_names.insert(id, name);
                }
                cur.skip_until("$EndPhysicalNames")?;
            }
            "$Nodes" => {
                let count: usize = cur.parse_count()?;
                for _ in 0..count {
                    let (ln, line) = cur.expect_line()?;
                    let mut it = line.split_whitespace();
                    let id: u64 = parse_tok(&mut it, ln, "node id")?;
                    let x: f64 = parse_tok(&mut it, ln, "x")?;
                    let y: f64 = parse_tok(&mut it, ln, "y")?;
                    node_index.insert(id, coords.len());
                    coords.push(Vec2::new(x, y));
                }
                cur.skip_until("$EndNodes")?;
            }
            "$Elements" => {
                let count: usize = cur.parse_count()?;
                for _ in 0..count {
                    let (ln, line) = cur.expect_line()?;
                    let mut it = line.split_whitespace();
                    let _id: u64 = parse_tok(&mut it, ln, "element id")?;
                    let type_id: u32 = parse_tok(&mut it, ln, "element type")?;
                    let ntags: usize = parse_tok(&mut it, ln, "tag count")?;
                    let mut tags = Vec::with_capacity(ntags);
                    for _ in 0..ntags {
                        tags.push(parse_tok::<u32>(&mut it, ln, "tag")?);
                    }
                    let mut node = |what| -> Result<usize, MeshError> {
                        let id: u64 = parse_tok(&mut it, ln, what)?;
                        node_index.get(&id).copied().ok_or(MeshError::NodeOutOfRange {
                            node: id as usize,
                            n_nodes: coords.len(),
                        })
                    };
                    match type_id {
                        8 => {
                            let nodes = [node("line node")?, node("line node")?, node("line node")?];
                            let phys = *tags.first().unwrap_or(&0);
                            let tag = phys_names
                                .get(&phys)
                                .and_then(|n| BoundaryTag::from_name(n))
                                .ok_or(MeshError::MissingPhysicalName { id: phys })?;
                            raw_lines.push((nodes, tag));
                        }
                        9 => {
                            let mut el = [0usize; 6];
                            for slot in &mut el {
                                *slot = node("triangle node")?;
                            }
                            elems.push(el);
                        }
                        15 => {
                            let _ = node("point node")?;
                        }
                        other => return Err(MeshError::UnsupportedElementType { type_id: other }),
                    }
                }
                cur.skip_until("$EndElements")?;
            }
            other if other.starts_with('$') && !other.starts_with("$End") => {
                // Unknown section: skip to its matching end marker.
                let end = format!("$End{}", &other[1..]);
                cur.skip_until(&end)?;
            }
            _ => {}
        }
    }

    // Match boundary lines to triangle edges.
    let mut edge_owner: HashMap<(usize, usize), (usize, u8)> = HashMap::new();
    for (e, el) in elems.iter().enumerate() {
        for k in 0..3u8 {
            let (a, b) = (el[k as usize], el[(k as usize + 1) % 3]);
            edge_owner.insert((a.min(b), a.max(b)), (e, k));
        }
    }
    let mut boundary_edges = Vec::with_capacity(raw_lines.len());
    for ([a, b, m], tag) in raw_lines {
        let &(e, k) = edge_owner
            .get(&(a.min(b), a.max(b)))
            .ok_or(MeshError::DanglingBoundaryLine { a, b })?;
        let mesh_mid = elems[e][3 + k as usize];
        if mesh_mid != m {
            return Err(MeshError::DanglingBoundaryLine { a, b });
        }
        boundary_edges.push(BoundaryEdge { elem: e, local_edge: k, tag });
    }

    let mesh = Mesh { coords, elems, boundary_edges };
    for e in 0..mesh.n_elems() {
        if mesh.vertex_area(e) <= 0.0 {
            return Err(MeshError::InvertedElement { elem: e });
        }
    }
    mesh.check()?;
    Ok(mesh)
}

pub fn import_gmsh_file(path: &Path) -> Result<Mesh, MeshError> {
    let file = std::fs::File::open(path)?;
    import_gmsh(BufReader::new(file))
}

struct Cursor<'a> {
    lines: &'a [String],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn next_nonempty(&mut self) -> Option<&'a str> {
        while self.pos < self.lines.len() {
            let line = self.lines[self.pos].trim();
            self.pos += 1;
            if !line.is_empty() {
                return Some(line);
            }
        }
        None
    }

    fn expect_line(&mut self) -> Result<(usize, &'a str), MeshError> {
        let at = self.pos;
        self.next_nonempty()
            .map(|l| (at + 1, l))
            .ok_or(MeshError::Parse { line: at + 1, msg: "unexpected end of file".into() })
    }

    fn parse_count(&mut self) -> Result<usize, MeshError> {
        let (ln, line) = self.expect_line()?;
        line.trim().parse().map_err(|_| MeshError::Parse {
            line: ln,
            msg: format!("expected a count, found {line:?}"),
        })
    }

    fn skip_until(&mut self, marker: &str) -> Result<(), MeshError> {
        let start = self.pos;
        while let Some(line) = self.next_nonempty() {
            if line == marker {
                return Ok(());
            }
        }
        Err(MeshError::Parse { line: start, msg: format!("missing {marker}") })
    }
}

fn parse_tok<T: std::str::FromStr>(
    it: &mut std::str::SplitWhitespace,
    line: usize,
    what: &str,
) -> Result<T, MeshError> {
    it.next()
        .ok_or_else(|| MeshError::Parse { line, msg: format!("missing {what}") })?
        .parse()
        .map_err(|_| MeshError::Parse { line, msg: format!("malformed {what}") })
}
