use std::io::{self, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::scalar::{Real, V3};

/// Vertices on a `nu × nv` lattice, station-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeshGrid {
    pub nu: usize,
    pub nv: usize,
    pub vertices: Vec<[f64; 3]>,
}

impl MeshGrid {
    pub fn build<T: Real, E: Send>(us: &[T], vs: &[T], f: impl Fn(T, T) -> Result<V3<T>, E> + Sync) -> Result<Self, E> {
        let rows: Vec<Vec<[f64; 3]>> = us
            .par_iter()
            .map(|&u| vs.iter().map(|&v| f(u, v).map(|p| p.to_f64())).collect::<Result<Vec<_>, E>>())
            .collect::<Result<_, E>>()?;
        Ok(MeshGrid {
            nu: us.len(),
            nv: vs.len(),
            vertices: rows.into_iter().flatten().collect(),
        })
    }

    /// Quads as zero-based vertex indices.
    pub fn quads(&self) -> Vec<[usize; 4]> {
        let mut q = Vec::new();
        for i in 0..self.nu.saturating_sub(1) {
            for j in 0..self.nv.saturating_sub(1) {
                let a = i * self.nv + j;
                q.push([a, a + self.nv, a + self.nv + 1, a + 1]);
            }
        }
        q
    }
}

/// `%.9g`-style formatting.
pub fn format_g9(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let e = x.abs().log10().floor() as i32;
    if (-5..9).contains(&e) {
        let s = format!("{:.*}", (8 - e).max(0) as usize, x);
        let s = if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        };
        if s == "-0" {
            "0".into()
        } else {
            s
        }
    } else {
        let s = format!("{:.8e}", x);
        let (m, ex) = s.split_once('e').unwrap();
        let m = if m.contains('.') { m.trim_end_matches('0').trim_end_matches('.') } else { m };
        format!("{m}e{ex}")
    }
}

/// Writes meshes as one Wavefront OBJ file, one object per mesh.
pub fn write_obj<W: Write>(mut w: W, meshes: &[(&str, &MeshGrid)]) -> io::Result<()> {
    let mut offset = 1;
    for (name, m) in meshes {
        writeln!(w, "o {name}")?;
        for v in &m.vertices {
            writeln!(w, "v {} {} {}", format_g9(v[0]), format_g9(v[1]), format_g9(v[2]))?;
        }
        for q in m.quads() {
            writeln!(w, "f {} {} {} {}", q[0] + offset, q[1] + offset, q[2] + offset, q[3] + offset)?;
        }
        offset += m.vertices.len();
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StripProfileRow {
    pub u: f64,
    pub alpha: f64,
    pub beta: f64,
    pub kappa: f64,
    pub tau: f64,
}

pub fn write_profiles_csv<W: Write>(w: W, rows: &[StripProfileRow]) -> Result<(), csv::Error> {
    let mut out = csv::Writer::from_writer(w);
    for r in rows {
        out.serialize(r)?;
    }
    out.flush()?;
    Ok(())
}
