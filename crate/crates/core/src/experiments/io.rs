//! Plain-text solution and basis files.
//!
//! Numbers are written in Rust's shortest round-trip form, so reading a
//! file back reproduces every value bit for bit.
//!
//! Solution file:
//!
//! ```text
//! # any comment lines
//! coarse 10
//! fine 10
//! method I          (or `fine` for the reference solution)
//! l_add 4           (or `-`)
//! block 0
//! <x> <y> <value>   one line per node, local node order
//! block 1
//! ...
//! ```
//!
//! Basis file: a header (`method`, `snapshot_mass`, `coarse`, `fine`,
//! `contrast`, `blocks`), then per block a `block <i> <l_small> <l_add>
//! <stored>` line, a `values ...` line with every eigenvalue, and one
//! `vector ...` line per stored eigenfunction (fine nodal coefficients).

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::EigenPairs;
use crate::mesh::PartitionedMesh;
use crate::spectral::{BlockSpectrum, CoarseSpace, Method, SnapshotMass};

/// Nodal values of a broken solution with enough metadata to plot it.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionDump {
    pub coarse: usize,
    pub fine: usize,
    /// `None` for the fine reference.
    pub method: Option<Method>,
    pub l_add: Option<usize>,
    pub points: Vec<[f64; 2]>,
    pub values: Vec<f64>,
}

impl SolutionDump {
    pub fn new(
        mesh: &PartitionedMesh,
        method: Option<Method>,
        l_add: Option<usize>,
        values: &[f64],
    ) -> Result<Self> {
        if values.len() != mesh.total_dofs() {
            return Err(Error::DimensionMismatch {
                expected: mesh.total_dofs(),
                got: values.len(),
            });
        }
        Ok(Self {
            coarse: mesh.coarse(),
            fine: mesh.fine(),
            method,
            l_add,
            points: mesh
                .blocks
                .iter()
                .flat_map(|b| b.vertices.iter().copied())
                .collect(),
            values: values.to_vec(),
        })
    }

    pub fn to_text(&self, header: &str) -> String {
        let mut s = header_block(header);
        let _ = writeln!(s, "coarse {}", self.coarse);
        let _ = writeln!(s, "fine {}", self.fine);
        let _ = writeln!(s, "method {}", self.method.map_or("fine", Method::as_str));
        match self.l_add {
            Some(l) => {
                let _ = writeln!(s, "l_add {l}");
            }
            None => s.push_str("l_add -\n"),
        }
        let per_block = (self.fine + 1) * (self.fine + 1);
        for (b, (pts, vals)) in self
            .points
            .chunks(per_block)
            .zip(self.values.chunks(per_block))
            .enumerate()
        {
            let _ = writeln!(s, "block {b}");
            for (p, v) in pts.iter().zip(vals) {
                let _ = writeln!(s, "{} {} {}", p[0], p[1], v);
            }
        }
        s
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = Lines::new(text);
        let coarse = lines.keyed("coarse")?.parse_usize(&lines)?;
        let fine = lines.keyed("fine")?.parse_usize(&lines)?;
        let method = match lines.keyed("method")?.0 {
            "fine" => None,
            m => Some(
                m.parse()
                    .map_err(|_| lines.error(format!("unknown method {m}")))?,
            ),
        };
        let l_add = match lines.keyed("l_add")?.0 {
            "-" => None,
            v => Some(
                v.parse()
                    .map_err(|_| lines.error(format!("bad l_add {v}")))?,
            ),
        };
        let n_blocks = coarse * coarse;
        let per_block = (fine + 1) * (fine + 1);
        let mut points = Vec::with_capacity(n_blocks * per_block);
        let mut values = Vec::with_capacity(n_blocks * per_block);
        for b in 0..n_blocks {
            let idx = lines.keyed("block")?.parse_usize(&lines)?;
            if idx != b {
                return Err(lines.error(format!("expected block {b}, found {idx}")));
            }
            for _ in 0..per_block {
                let nums = lines.numbers()?;
                if nums.len() != 3 {
                    return Err(lines.error("expected `x y value`".into()));
                }
                points.push([nums[0], nums[1]]);
                values.push(nums[2]);
            }
        }
        Ok(Self {
            coarse,
            fine,
            method,
            l_add,
            points,
            values,
        })
    }

    pub fn write(&self, path: &Path, header: &str) -> Result<()> {
        std::fs::write(path, self.to_text(header))?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }
}

/// Serialize the retained part of a coarse space (all eigenvalues, retained
/// eigenfunctions) for reuse in a later online solve.
pub fn basis_to_text(space: &CoarseSpace, mesh: &PartitionedMesh, header: &str) -> String {
    let mut s = header_block(header);
    let _ = writeln!(s, "method {}", space.method);
    let mass = match space.snapshot_mass {
        None => "-",
        Some(SnapshotMass::Boundary) => "boundary",
        Some(SnapshotMass::Full) => "full",
        Some(SnapshotMass::Volume) => "volume",
    };
    let _ = writeln!(s, "snapshot_mass {mass}");
    let _ = writeln!(s, "coarse {}", mesh.coarse());
    let _ = writeln!(s, "fine {}", mesh.fine());
    let _ = writeln!(s, "contrast {}", space.contrast());
    let _ = writeln!(s, "blocks {}", space.n_blocks());
    for (i, blk) in space.blocks.iter().enumerate() {
        let _ = writeln!(
            s,
            "block {i} {} {} {}",
            blk.l_small,
            blk.l_add,
            blk.retained()
        );
        s.push_str("values");
        for v in &blk.eigen.values {
            let _ = write!(s, " {v}");
        }
        s.push('\n');
        for col in blk.basis().column_iter() {
            s.push_str("vector");
            for v in col.iter() {
                let _ = write!(s, " {v}");
            }
            s.push('\n');
        }
    }
    s
}

pub fn write_basis(
    space: &CoarseSpace,
    mesh: &PartitionedMesh,
    path: &Path,
    header: &str,
) -> Result<()> {
    std::fs::write(path, basis_to_text(space, mesh, header))?;
    Ok(())
}

/// Read a basis file back. Only the stored (retained) eigenfunctions are
/// available afterwards, so the space can be shrunk but not enlarged.
pub fn basis_from_text(text: &str) -> Result<(CoarseSpace, usize, usize)> {
    let mut lines = Lines::new(text);
    let method: Method = {
        let v = lines.keyed("method")?.0;
        v.parse()
            .map_err(|_| lines.error(format!("unknown method {v}")))?
    };
    let snapshot_mass = match lines.keyed("snapshot_mass")?.0 {
        "-" => None,
        "boundary" => Some(SnapshotMass::Boundary),
        "full" => Some(SnapshotMass::Full),
        "volume" => Some(SnapshotMass::Volume),
        other => return Err(lines.error(format!("unknown snapshot mass {other}"))),
    };
    let coarse = lines.keyed("coarse")?.parse_usize(&lines)?;
    let fine = lines.keyed("fine")?.parse_usize(&lines)?;
    let contrast: f64 = {
        let v = lines.keyed("contrast")?.0;
        v.parse()
            .map_err(|_| lines.error(format!("bad contrast {v}")))?
    };
    let n_blocks = lines.keyed("blocks")?.parse_usize(&lines)?;
    if n_blocks != coarse * coarse {
        return Err(lines.error(format!(
            "{n_blocks} blocks for a {coarse}x{coarse} partition"
        )));
    }
    let n = (fine + 1) * (fine + 1);
    let mut blocks = Vec::with_capacity(n_blocks);
    for b in 0..n_blocks {
        let head = lines.keyed("block")?.0;
        let f: Vec<usize> = head
            .split_whitespace()
            .map(str::parse)
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| lines.error(format!("bad block line `{head}`")))?;
        if f.len() != 4 || f[0] != b {
            return Err(lines.error(format!("expected `block {b} l_small l_add stored`")));
        }
        let (l_small, l_add, stored) = (f[1], f[2], f[3]);
        let values = lines.tagged_numbers("values")?;
        if stored > values.len() {
            return Err(lines.error("more vectors than eigenvalues".into()));
        }
        let mut cols = Vec::with_capacity(stored * n);
        for _ in 0..stored {
            let v = lines.tagged_numbers("vector")?;
            if v.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: v.len(),
                });
            }
            cols.extend(v);
        }
        blocks.push(BlockSpectrum {
            eigen: EigenPairs {
                values,
                vectors: DMatrix::from_vec(n, stored, cols),
                b_orthonormal: true,
            },
            fine_vectors: None,
            l_small,
            l_add,
        });
    }
    Ok((
        CoarseSpace::from_parts(method, snapshot_mass, blocks, n, contrast),
        coarse,
        fine,
    ))
}

/// Read a basis file and check it against `mesh`.
pub fn read_basis(path: &Path, mesh: &PartitionedMesh) -> Result<CoarseSpace> {
    let (space, coarse, fine) = basis_from_text(&std::fs::read_to_string(path)?)?;
    if (coarse, fine) != (mesh.coarse(), mesh.fine()) {
        return Err(Error::InvalidArgument(format!(
            "basis was built for a {coarse}/{fine} mesh, not {}/{}",
            mesh.coarse(),
            mesh.fine()
        )));
    }
    Ok(space)
}

/// Header text as comment lines, newline terminated.
fn header_block(header: &str) -> String {
    let mut s = String::new();
    for line in header.lines() {
        if !line.starts_with('#') {
            s.push_str("# ");
        }
        s.push_str(line);
        s.push('\n');
    }
    s
}

/// Line cursor that skips blanks and `#` comments.
struct Lines<'a> {
    inner: std::iter::Peekable<std::iter::Enumerate<std::str::Lines<'a>>>,
    current: usize,
}

struct Value<'a>(&'a str);

impl Value<'_> {
    fn parse_usize(&self, lines: &Lines<'_>) -> Result<usize> {
        self.0
            .parse()
            .map_err(|_| lines.error(format!("expected an integer, found `{}`", self.0)))
    }
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        Self {
            inner: text.lines().enumerate().peekable(),
            current: 0,
        }
    }

    fn error(&self, message: String) -> Error {
        Error::Parse {
            line: self.current,
            message,
        }
    }

    fn next_line(&mut self) -> Result<&'a str> {
        for (n, line) in self.inner.by_ref() {
            let t = line.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            self.current = n + 1;
            return Ok(t);
        }
        Err(Error::Parse {
            line: self.current + 1,
            message: "unexpected end of file".into(),
        })
    }

    fn keyed(&mut self, key: &str) -> Result<Value<'a>> {
        let line = self.next_line()?;
        match line.split_once(char::is_whitespace) {
            Some((k, rest)) if k == key => Ok(Value(rest.trim())),
            _ => Err(self.error(format!("expected `{key} ...`, found `{line}`"))),
        }
    }

    fn numbers(&mut self) -> Result<Vec<f64>> {
        let line = self.next_line()?;
        parse_numbers(line).map_err(|tok| self.error(format!("not a number: `{tok}`")))
    }

    fn tagged_numbers(&mut self, tag: &str) -> Result<Vec<f64>> {
        let line = self.next_line()?;
        let rest = line
            .strip_prefix(tag)
            .ok_or_else(|| self.error(format!("expected `{tag} ...`")))?;
        parse_numbers(rest).map_err(|tok| self.error(format!("not a number: `{tok}`")))
    }
}

fn parse_numbers(s: &str) -> std::result::Result<Vec<f64>, String> {
    s.split_whitespace()
        .map(|t| t.parse::<f64>().map_err(|_| t.to_string()))
        .collect()
}
