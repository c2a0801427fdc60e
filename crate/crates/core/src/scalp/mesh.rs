//! Import path for an externally UV-unwrapped scalp mesh (ASCII PLY with
//! per-vertex `u`/`v` properties). Chart lookups use barycentric
//! interpolation over the triangle containing the query UV.

use super::RootFrame;
use crate::{Error, Result, Vec3};

#[derive(Clone, Debug, PartialEq)]
pub struct ScalpMesh {
    pub vertices: Vec<Vec3>,
    pub uvs: Vec<[f64; 2]>,
    pub faces: Vec<[usize; 3]>,
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

impl ScalpMesh {
    pub fn from_ascii_ply(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
        match lines.next() {
            Some((_, "ply")) => {}
            _ => return Err(parse_err(1, "missing 'ply' magic")),
        }

        let mut vertex_count = None;
        let mut face_count = 0usize;
        let mut vertex_props: Vec<String> = Vec::new();
        let mut current = "";
        for (ln, line) in lines.by_ref() {
            let tokens: Vec<&str> = line.split_whitespace().collect();
            match tokens.as_slice() {
                ["format", "ascii", ..] => {}
                ["format", other, ..] => return Err(parse_err(ln, format!("unsupported PLY format {other}"))),
                ["comment", ..] | ["obj_info", ..] | [] => {}
                ["element", "vertex", n] => {
                    vertex_count = Some(n.parse().map_err(|_| parse_err(ln, "bad vertex count"))?);
                    current = "vertex";
                }
                ["element", "face", n] => {
                    face_count = n.parse().map_err(|_| parse_err(ln, "bad face count"))?;
                    current = "face";
                }
                ["element", ..] => current = "other",
                ["property", "list", ..] => {}
                ["property", _ty, name] if current == "vertex" => vertex_props.push(name.to_string()),
                ["property", ..] => {}
                ["end_header"] => break,
                _ => return Err(parse_err(ln, format!("unexpected header line '{line}'"))),
            }
        }
        let vertex_count = vertex_count.ok_or_else(|| parse_err(0, "no vertex element"))?;
        let find = |names: &[&str]| vertex_props.iter().position(|p| names.contains(&p.as_str()));
        let ix = find(&["x"]).ok_or_else(|| parse_err(0, "missing x property"))?;
        let iy = find(&["y"]).ok_or_else(|| parse_err(0, "missing y property"))?;
        let iz = find(&["z"]).ok_or_else(|| parse_err(0, "missing z property"))?;
        let iu = find(&["u", "s", "texture_u"]).ok_or_else(|| parse_err(0, "missing u property"))?;
        let iv = find(&["v", "t", "texture_v"]).ok_or_else(|| parse_err(0, "missing v property"))?;

        let mut vertices = Vec::with_capacity(vertex_count);
        let mut uvs = Vec::with_capacity(vertex_count);
        for _ in 0..vertex_count {
            let (ln, line) = lines.next().ok_or_else(|| parse_err(0, "truncated vertex list"))?;
            let vals: Vec<f64> = line
                .split_whitespace()
                .map(|t| t.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| parse_err(ln, "bad vertex value"))?;
            if vals.len() < vertex_props.len() {
                return Err(parse_err(ln, "too few vertex values"));
            }
            vertices.push(Vec3::new(vals[ix], vals[iy], vals[iz]));
            uvs.push([vals[iu], vals[iv]]);
        }
        let mut faces = Vec::with_capacity(face_count);
        for _ in 0..face_count {
            let (ln, line) = lines.next().ok_or_else(|| parse_err(0, "truncated face list"))?;
            let idx: Vec<usize> = line
                .split_whitespace()
                .map(|t| t.parse::<usize>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| parse_err(ln, "bad face index"))?;
            let (&n, rest) = idx.split_first().ok_or_else(|| parse_err(ln, "empty face"))?;
            if n < 3 || rest.len() != n {
                return Err(parse_err(ln, "malformed face"));
            }
            if rest.iter().any(|&i| i >= vertex_count) {
                return Err(parse_err(ln, "face index out of range"));
            }
            // Fan-triangulate polygons.
            for k in 1..n - 1 {
                faces.push([rest[0], rest[k], rest[k + 1]]);
            }
        }
        Ok(Self { vertices, uvs, faces })
    }

    fn barycentric(&self, face: &[usize; 3], uv: [f64; 2]) -> Option<[f64; 3]> {
        let [a, b, c] = face.map(|i| self.uvs[i]);
        let det = (b[1] - c[1]) * (a[0] - c[0]) + (c[0] - b[0]) * (a[1] - c[1]);
        if det.abs() < 1e-300 {
            return None;
        }
        let l0 = ((b[1] - c[1]) * (uv[0] - c[0]) + (c[0] - b[0]) * (uv[1] - c[1])) / det;
        let l1 = ((c[1] - a[1]) * (uv[0] - c[0]) + (a[0] - c[0]) * (uv[1] - c[1])) / det;
        let l2 = 1.0 - l0 - l1;
        const TOL: f64 = -1e-12;
        (l0 >= TOL && l1 >= TOL && l2 >= TOL).then_some([l0, l1, l2])
    }

    /// Surface frame at `uv`. The normal follows the face winding.
    pub fn uv_to_world(&self, uv: [f64; 2]) -> Result<RootFrame> {
        for face in &self.faces {
            if let Some(w) = self.barycentric(face, uv) {
                let [a, b, c] = face.map(|i| self.vertices[i]);
                let origin = a * w[0] + b * w[1] + c * w[2];
                let normal = (b - a).cross(&(c - a));
                if normal.norm() == 0.0 {
                    continue;
                }
                return Ok(RootFrame::from_normal(origin, normal, Vec3::x()));
            }
        }
        Err(Error::OutsideChart { u: uv[0], v: uv[1] })
    }
}
