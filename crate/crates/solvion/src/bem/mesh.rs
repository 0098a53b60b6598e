//! Triangulated closed surfaces: construction, OFF file I/O, and the
//! icosphere generator used for validation.

use nalgebra::Vector3;
use std::collections::HashMap;
use std::path::Path;

use crate::error::{Error, Result};

/// A triangulated surface with per-panel geometry precomputed.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceMesh {
    pub vertices: Vec<Vector3<f64>>,
    /// Outward-oriented index triples.
    pub triangles: Vec<[usize; 3]>,
    pub centroids: Vec<Vector3<f64>>,
    pub areas: Vec<f64>,
    /// Outward unit normals.
    pub normals: Vec<Vector3<f64>>,
    /// Longest edge per panel.
    pub diameters: Vec<f64>,
}

impl SurfaceMesh {
    pub fn new(vertices: Vec<Vector3<f64>>, triangles: Vec<[usize; 3]>) -> Result<Self> {
        let nv = vertices.len();
        let mut centroids = Vec::with_capacity(triangles.len());
        let mut areas = Vec::with_capacity(triangles.len());
        let mut normals = Vec::with_capacity(triangles.len());
        let mut diameters = Vec::with_capacity(triangles.len());
        for (i, tri) in triangles.iter().enumerate() {
            for &v in tri {
                if v >= nv {
                    return Err(Error::Validation(format!(
                        "triangle {i} references vertex {v} but the mesh has {nv} vertices"
                    )));
                }
            }
            let [a, b, c] = [vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]];
            let cross = (b - a).cross(&(c - a));
            let area = 0.5 * cross.norm();
            if !(area > 0.0) {
                return Err(Error::Validation(format!("triangle {i} is degenerate (area {area})")));
            }
            centroids.push((a + b + c) / 3.0);
            areas.push(area);
            normals.push(cross / (2.0 * area));
            diameters.push(
                (b - a).norm().max((c - b).norm()).max((a - c).norm()),
            );
        }
        Ok(Self {
            vertices,
            triangles,
            centroids,
            areas,
            normals,
            diameters,
        })
    }

    pub fn panel_count(&self) -> usize {
        self.triangles.len()
    }

    pub fn total_area(&self) -> f64 {
        self.areas.iter().sum()
    }

    /// |Σ area·normal|; zero (to rounding) for a closed oriented surface.
    pub fn closedness_defect(&self) -> f64 {
        let mut sum = Vector3::zeros();
        for (a, n) in self.areas.iter().zip(&self.normals) {
            sum += *a * n;
        }
        sum.norm()
    }

    pub fn is_closed(&self) -> bool {
        self.closedness_defect() <= 1e-8 * self.total_area()
    }

    /// Winding test by summed signed solid angles (Van Oosterom–Strackee).
    pub fn contains(&self, p: &Vector3<f64>) -> bool {
        let mut omega = 0.0;
        for tri in &self.triangles {
            let a = self.vertices[tri[0]] - p;
            let b = self.vertices[tri[1]] - p;
            let c = self.vertices[tri[2]] - p;
            let (la, lb, lc) = (a.norm(), b.norm(), c.norm());
            let num = a.dot(&b.cross(&c));
            let den = la * lb * lc + a.dot(&b) * lc + b.dot(&c) * la + c.dot(&a) * lb;
            omega += 2.0 * num.atan2(den);
        }
        omega.abs() > 2.0 * std::f64::consts::PI
    }

    /// Parse an ASCII OFF file.
    pub fn from_off(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse_off(&text, &path.display().to_string())
    }

    pub fn parse_off(text: &str, origin: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());
        let err = |line: usize, message: String| Error::Parse {
            path: origin.to_string(),
            line,
            message,
        };
        let (line, header) = lines
            .next()
            .ok_or_else(|| err(1, "empty file".into()))?;
        if header != "OFF" {
            return Err(err(line, format!("expected OFF header, got '{header}'")));
        }
        let (line, counts) = lines
            .next()
            .ok_or_else(|| err(line, "missing count line".into()))?;
        let counts: Vec<usize> = counts
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| err(line, format!("bad count '{t}'"))))
            .collect::<Result<_>>()?;
        if counts.len() < 2 {
            return Err(err(line, "count line needs at least vertex and face counts".into()));
        }
        let (nv, nf) = (counts[0], counts[1]);
        let mut vertices = Vec::with_capacity(nv);
        for _ in 0..nv {
            let (line, l) = lines
                .next()
                .ok_or_else(|| err(line, "unexpected end of file in vertex list".into()))?;
            let coords: Vec<f64> = l
                .split_whitespace()
                .map(|t| t.parse().map_err(|_| err(line, format!("bad coordinate '{t}'"))))
                .collect::<Result<_>>()?;
            if coords.len() != 3 {
                return Err(err(line, format!("expected 3 coordinates, got {}", coords.len())));
            }
            vertices.push(Vector3::new(coords[0], coords[1], coords[2]));
        }
        let mut triangles = Vec::with_capacity(nf);
        for _ in 0..nf {
            let (line, l) = lines
                .next()
                .ok_or_else(|| err(line, "unexpected end of file in face list".into()))?;
            let fields: Vec<usize> = l
                .split_whitespace()
                .map(|t| t.parse().map_err(|_| err(line, format!("bad face index '{t}'"))))
                .collect::<Result<_>>()?;
            if fields.first() != Some(&3) {
                return Err(err(line, "only triangular faces are supported".into()));
            }
            if fields.len() != 4 {
                return Err(err(line, format!("expected 3 indices, got {}", fields.len() - 1)));
            }
            triangles.push([fields[1], fields[2], fields[3]]);
        }
        Self::new(vertices, triangles)
    }

    /// Write the mesh as ASCII OFF.
    pub fn write_off(&self, path: &Path) -> Result<()> {
        use std::fmt::Write as _;
        let mut out = String::new();
        let _ = writeln!(out, "OFF");
        let _ = writeln!(out, "{} {} 0", self.vertices.len(), self.triangles.len());
        for v in &self.vertices {
            let _ = writeln!(out, "{:.17} {:.17} {:.17}", v.x, v.y, v.z);
        }
        for t in &self.triangles {
            let _ = writeln!(out, "3 {} {} {}", t[0], t[1], t[2]);
        }
        std::fs::write(path, out)?;
        Ok(())
    }
}

/// Icosphere of radius R by repeated midpoint subdivision of an icosahedron,
/// vertices projected to the sphere.
pub fn icosphere(radius: f64, subdivisions: u32) -> Result<SurfaceMesh> {
    if radius <= 0.0 {
        return Err(Error::Domain(format!("icosphere radius must be > 0, got {radius}")));
    }
    if subdivisions > 7 {
        return Err(Error::Domain(format!(
            "icosphere subdivisions must be in [0, 7], got {subdivisions}"
        )));
    }
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    let mut vertices: Vec<Vector3<f64>> = [
        (-1.0, phi, 0.0),
        (1.0, phi, 0.0),
        (-1.0, -phi, 0.0),
        (1.0, -phi, 0.0),
        (0.0, -1.0, phi),
        (0.0, 1.0, phi),
        (0.0, -1.0, -phi),
        (0.0, 1.0, -phi),
        (phi, 0.0, -1.0),
        (phi, 0.0, 1.0),
        (-phi, 0.0, -1.0),
        (-phi, 0.0, 1.0),
    ]
    .iter()
    .map(|&(x, y, z)| Vector3::new(x, y, z).normalize())
    .collect();
    let mut faces: Vec<[usize; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    for _ in 0..subdivisions {
        let mut midpoint: HashMap<(usize, usize), usize> = HashMap::new();
        let mut next = Vec::with_capacity(faces.len() * 4);
        for f in &faces {
            let mut mid = |a: usize, b: usize, vertices: &mut Vec<Vector3<f64>>| -> usize {
                let key = (a.min(b), a.max(b));
                *midpoint.entry(key).or_insert_with(|| {
                    let m = (vertices[a] + vertices[b]).normalize();
                    vertices.push(m);
                    vertices.len() - 1
                })
            };
            let [a, b, c] = *f;
            let ab = mid(a, b, &mut vertices);
            let bc = mid(b, c, &mut vertices);
            let ca = mid(c, a, &mut vertices);
            next.push([a, ab, ca]);
            next.push([b, bc, ab]);
            next.push([c, ca, bc]);
            next.push([ab, bc, ca]);
        }
        faces = next;
    }
    for v in &mut vertices {
        *v *= radius;
    }
    SurfaceMesh::new(vertices, faces)
}
