//! Legacy VTK (ASCII) export of triangulations and nodal fields, for
//! external visualization of speed contours and streamlines.

use crate::mesh::{Region, TriMesh};
use std::io::{self, Write};

/// Scalar or 2D-vector point data sampled at mesh vertices.
pub enum PointData<'a> {
    Scalar(&'a str, &'a [f64]),
    Vector(&'a str, &'a [[f64; 2]]),
}

pub fn write_legacy_vtk<W: Write>(
    w: &mut W,
    mesh: &TriMesh,
    data: &[PointData<'_>],
) -> io::Result<()> {
    writeln!(w, "# vtk DataFile Version 3.0")?;
    writeln!(w, "sdflow field snapshot")?;
    writeln!(w, "ASCII")?;
    writeln!(w, "DATASET UNSTRUCTURED_GRID")?;
    writeln!(w, "POINTS {} double", mesh.vertices.len())?;
    for v in &mesh.vertices {
        writeln!(w, "{:.9e} {:.9e} 0.0", v[0], v[1])?;
    }
    writeln!(w, "CELLS {} {}", mesh.triangles.len(), 4 * mesh.triangles.len())?;
    for tri in &mesh.triangles {
        writeln!(w, "3 {} {} {}", tri[0], tri[1], tri[2])?;
    }
    writeln!(w, "CELL_TYPES {}", mesh.triangles.len())?;
    for _ in &mesh.triangles {
        writeln!(w, "5")?;
    }
    writeln!(w, "CELL_DATA {}", mesh.triangles.len())?;
    writeln!(w, "SCALARS region int 1")?;
    writeln!(w, "LOOKUP_TABLE default")?;
    for r in &mesh.region_of_triangle {
        writeln!(w, "{}", if *r == Region::Fluid { 0 } else { 1 })?;
    }
    if !data.is_empty() {
        writeln!(w, "POINT_DATA {}", mesh.vertices.len())?;
        for d in data {
            match d {
                PointData::Scalar(name, vals) => {
                    assert_eq!(vals.len(), mesh.vertices.len());
                    writeln!(w, "SCALARS {name} double 1")?;
                    writeln!(w, "LOOKUP_TABLE default")?;
                    for v in *vals {
                        writeln!(w, "{v:.9e}")?;
                    }
                }
                PointData::Vector(name, vals) => {
                    assert_eq!(vals.len(), mesh.vertices.len());
                    writeln!(w, "VECTORS {name} double")?;
                    for v in *vals {
                        writeln!(w, "{:.9e} {:.9e} 0.0", v[0], v[1])?;
                    }
                }
            }
        }
    }
    Ok(())
}
