//! Piecewise-constant permeability fields.
//!
//! Values live on the `Mm × Mm` lattice of fine square cells, indexed
//! row-major from the bottom-left corner (`cell = gx + gy·Mm`); both
//! triangles of a cell share its value.

use std::fmt::Write as _;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::PartitionedMesh;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Provenance {
    Uniform(f64),
    Raster(String),
    Synthetic {
        eta: f64,
        seed: u64,
        pattern: ChannelPattern,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientField {
    cells: usize,
    values: Vec<f64>,
    contrast: f64,
    provenance: Provenance,
}

impl CoefficientField {
    fn new(cells: usize, values: Vec<f64>, provenance: Provenance) -> Result<Self> {
        if values.len() != cells * cells {
            return Err(Error::DimensionMismatch {
                expected: cells * cells,
                got: values.len(),
            });
        }
        for (cell, &value) in values.iter().enumerate() {
            if !(value > 0.0) || !value.is_finite() {
                return Err(Error::NonPositiveCoefficient { cell, value });
            }
        }
        let max = values.iter().copied().fold(f64::MIN, f64::max);
        let min = values.iter().copied().fold(f64::MAX, f64::min);
        Ok(Self {
            cells,
            values,
            contrast: max / min,
            provenance,
        })
    }

    pub fn uniform(mesh: &PartitionedMesh, value: f64) -> Result<Self> {
        let n = mesh.cells_per_side();
        Self::new(n, vec![value; n * n], Provenance::Uniform(value))
    }

    /// Field from explicit per-cell values in lattice order.
    pub fn from_cells(mesh: &PartitionedMesh, values: Vec<f64>) -> Result<Self> {
        Self::new(
            mesh.cells_per_side(),
            values,
            Provenance::Raster("in-memory".into()),
        )
    }

    /// Ingest a raster whose row `r`, column `c` is the fine cell
    /// `(gx, gy) = (c, r)`; row 0 is the bottom row.
    pub fn from_raster(raster: &Raster, mesh: &PartitionedMesh) -> Result<Self> {
        let n = mesh.cells_per_side();
        if raster.rows != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: raster.rows,
            });
        }
        if raster.cols != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: raster.cols,
            });
        }
        let origin = raster.source.clone().unwrap_or_else(|| "in-memory".into());
        Self::new(n, raster.data.clone(), Provenance::Raster(origin))
    }

    /// Synthetic high-contrast field with the default channel/inclusion
    /// pattern.
    pub fn synth_channels_inclusions(mesh: &PartitionedMesh, eta: f64, seed: u64) -> Result<Self> {
        Self::synthesize(mesh, eta, seed, &ChannelPattern::default())
    }

    /// Background 1 with value `eta` on thin channels (one fine cell wide,
    /// spanning several blocks) and on square inclusions strictly inside the
    /// blocks that no channel crosses. Every block ends up holding at most
    /// one connected high-conductivity region. The geometry depends only on
    /// `(mesh, seed, pattern)`; `eta` only sets the value.
    pub fn synthesize(
        mesh: &PartitionedMesh,
        eta: f64,
        seed: u64,
        pattern: &ChannelPattern,
    ) -> Result<Self> {
        if !(eta >= 1.0) || !eta.is_finite() {
            return Err(Error::InvalidContrast(eta));
        }
        let mask = pattern.mask(mesh, seed);
        let values = mask.iter().map(|&hi| if hi { eta } else { 1.0 }).collect();
        Self::new(
            mesh.cells_per_side(),
            values,
            Provenance::Synthetic {
                eta,
                seed,
                pattern: pattern.clone(),
            },
        )
    }

    pub fn cells_per_side(&self) -> usize {
        self.cells
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn cell_value(&self, cell: usize) -> f64 {
        self.values[cell]
    }

    /// κ on local triangle `tri` of `block`.
    pub fn element_value(&self, mesh: &PartitionedMesh, block: usize, tri: usize) -> f64 {
        self.values[mesh.global_cell(block, tri)]
    }

    /// `η = max κ / min κ`.
    pub fn contrast(&self) -> f64 {
        self.contrast
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::MAX, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::MIN, f64::max)
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn to_raster(&self) -> Raster {
        Raster {
            rows: self.cells,
            cols: self.cells,
            data: self.values.clone(),
            source: None,
        }
    }
}

/// Layout knobs for the synthetic generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ChannelPattern {
    pub horizontal_channels: usize,
    pub vertical_channels: usize,
    /// When false each block's piece of a channel stops one cell short of
    /// the block boundary, so no high-conductivity cell touches a coarse edge.
    pub channels_touch_boundaries: bool,
    pub inclusions: bool,
    /// Inclusion side in fine cells; `0` picks `max(1, m/5)`.
    pub inclusion_size: usize,
}

impl Default for ChannelPattern {
    fn default() -> Self {
        Self {
            horizontal_channels: 2,
            vertical_channels: 2,
            channels_touch_boundaries: true,
            inclusions: true,
            inclusion_size: 0,
        }
    }
}

impl ChannelPattern {
    /// Boolean high-conductivity mask over the fine lattice.
    pub fn mask(&self, mesh: &PartitionedMesh, seed: u64) -> Vec<bool> {
        let (nb, m) = (mesh.coarse(), mesh.fine());
        let n = nb * m;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut mask = vec![false; n * n];
        let mut crossed = vec![false; nb * nb];

        let offset = |rng: &mut ChaCha8Rng| if m >= 3 { rng.gen_range(1..m - 1) } else { 0 };
        let (span_lo, span_hi) = if nb >= 3 { (1, nb - 2) } else { (0, nb - 1) };
        let (piece_lo, piece_hi) = if self.channels_touch_boundaries || m < 3 {
            (0, m - 1)
        } else {
            (1, m - 2)
        };

        for k in 0..self.horizontal_channels {
            let by = ((2 * k + 1) * nb) / (2 * self.horizontal_channels);
            let row = by * m + offset(&mut rng);
            for bx in span_lo..=span_hi {
                crossed[by * nb + bx] = true;
                for a in piece_lo..=piece_hi {
                    mask[bx * m + a + row * n] = true;
                }
            }
        }
        for k in 0..self.vertical_channels {
            // shifted by half a slot so vertical and horizontal channels
            // occupy different block columns/rows where possible
            let bx = ((2 * k + 1) * nb) / (2 * self.vertical_channels + 1);
            let col = bx * m + offset(&mut rng);
            for by in span_lo..=span_hi {
                crossed[by * nb + bx] = true;
                for b in piece_lo..=piece_hi {
                    mask[col + (by * m + b) * n] = true;
                }
            }
        }

        if self.inclusions {
            let s = if self.inclusion_size == 0 {
                (m / 5).max(1)
            } else {
                self.inclusion_size
            };
            if m >= s + 2 {
                for blk in 0..nb * nb {
                    if crossed[blk] {
                        continue;
                    }
                    let (bx, by) = (blk % nb, blk / nb);
                    let a0 = rng.gen_range(1..=m - 1 - s);
                    let b0 = rng.gen_range(1..=m - 1 - s);
                    for b in b0..b0 + s {
                        for a in a0..a0 + s {
                            mask[bx * m + a + (by * m + b) * n] = true;
                        }
                    }
                }
            }
        }
        mask
    }
}

/// Plain-text raster: a `rows cols` header line followed by `rows·cols`
/// whitespace-separated positive decimals in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct Raster {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
    pub source: Option<String>,
}

impl Raster {
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty());
        let (hl, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            message: "empty raster".into(),
        })?;
        let dims: Vec<usize> = header
            .split_whitespace()
            .map(|t| t.parse::<usize>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Parse {
                line: hl + 1,
                message: format!("bad header: {e}"),
            })?;
        if dims.len() != 2 {
            return Err(Error::Parse {
                line: hl + 1,
                message: "header must be `rows cols`".into(),
            });
        }
        let (rows, cols) = (dims[0], dims[1]);
        let mut data = Vec::with_capacity(rows * cols);
        for (ln, line) in lines {
            for tok in line.split_whitespace() {
                let v: f64 = tok.parse().map_err(|_| Error::Parse {
                    line: ln + 1,
                    message: format!("not a number: {tok:?}"),
                })?;
                if !(v > 0.0) || !v.is_finite() {
                    return Err(Error::Parse {
                        line: ln + 1,
                        message: format!("entries must be positive, got {v}"),
                    });
                }
                data.push(v);
            }
        }
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                got: data.len(),
            });
        }
        Ok(Self {
            rows,
            cols,
            data,
            source: None,
        })
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut r = Self::parse(&text)?;
        r.source = Some(path.display().to_string());
        Ok(r)
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("{} {}\n", self.rows, self.cols);
        for row in self.data.chunks(self.cols.max(1)) {
            let line: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
            let _ = writeln!(s, "{}", line.join(" "));
        }
        s
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }
}
