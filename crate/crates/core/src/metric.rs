//! Finite metric spaces: distance matrices, point clouds and evaluation subsets.
//!
//! A [`DistanceMatrix`] stores only the strict lower triangle, row-major, so
//! `d(i, j)` for `i > j` lives at `i * (i - 1) / 2 + j`. Everything downstream
//! only needs the [`Metric`] trait, which is also implemented by lazily
//! evaluated metrics over coordinates ([`CloudMetric`]).

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Relative asymmetry above which loading a full matrix logs a warning.
pub const ASYMMETRY_WARN_TOLERANCE: f64 = 1e-9;
/// Largest tolerated absolute diagonal entry when loading a full matrix.
pub const DIAGONAL_TOLERANCE: f64 = 1e-12;

const DMAT_MAGIC: &[u8; 4] = b"DMAT";
const DMAT_VERSION: u8 = 0x01;

/// Read access to pairwise distances of a finite metric space.
pub trait Metric: Sync {
    /// Number of points.
    fn len(&self) -> usize;

    /// Distance between points `i` and `j`. Panics when out of range.
    fn distance(&self, i: usize, j: usize) -> f64;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// All distances from `i`, including the zero self-distance.
    fn row(&self, i: usize) -> Vec<f64> {
        (0..self.len()).map(|j| self.distance(i, j)).collect()
    }
}

impl<M: Metric + ?Sized> Metric for &M {
    fn len(&self) -> usize {
        (**self).len()
    }

    fn distance(&self, i: usize, j: usize) -> f64 {
        (**self).distance(i, j)
    }

    fn row(&self, i: usize) -> Vec<f64> {
        (**self).row(i)
    }
}

/// Symmetric nonnegative distance matrix with implicit zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n_points: usize,
    entries: Vec<f64>,
}

#[inline]
fn tri_index(i: usize, j: usize) -> usize {
    debug_assert!(i > j);
    i * (i - 1) / 2 + j
}

fn tri_len(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

impl DistanceMatrix {
    /// Builds a matrix from its strict lower triangle (row-major).
    pub fn from_lower_triangle(n_points: usize, entries: Vec<f64>) -> Result<Self> {
        if n_points == 0 {
            return Err(Error::InvalidMatrix("matrix has no points".into()));
        }
        if entries.len() != tri_len(n_points) {
            return Err(Error::InvalidMatrix(format!(
                "expected {} lower-triangle entries for N = {}, got {}",
                tri_len(n_points),
                n_points,
                entries.len()
            )));
        }
        let m = DistanceMatrix { n_points, entries };
        m.validate_entries()?;
        m.warn_duplicates();
        Ok(m)
    }

    /// Builds a matrix by evaluating `f(i, j)` for every `i > j`.
    pub fn from_fn<F>(n_points: usize, mut f: F) -> Result<Self>
    where
        F: FnMut(usize, usize) -> f64,
    {
        let mut entries = Vec::with_capacity(tri_len(n_points));
        for i in 1..n_points {
            for j in 0..i {
                entries.push(f(i, j));
            }
        }
        Self::from_lower_triangle(n_points, entries)
    }

    /// Builds a matrix from a full square matrix.
    ///
    /// The result is symmetrized as `(d + dᵀ) / 2`; a warning is logged when
    /// the largest asymmetry exceeds `1e-9` times the largest entry.
    pub fn from_full(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::InvalidMatrix("matrix has no rows".into()));
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidMatrix(format!(
                    "row {} has {} entries, expected {}",
                    i,
                    row.len(),
                    n
                )));
            }
            for (j, &v) in row.iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::InvalidMatrix(format!("non-finite entry at ({i}, {j})")));
                }
                if v < 0.0 {
                    return Err(Error::InvalidMatrix(format!("negative entry {v} at ({i}, {j})")));
                }
            }
            if row[i].abs() > DIAGONAL_TOLERANCE {
                return Err(Error::InvalidMatrix(format!(
                    "nonzero diagonal entry {} at ({i}, {i})",
                    row[i]
                )));
            }
        }
        let mut max_entry = 0.0f64;
        let mut max_asym = 0.0f64;
        let mut entries = Vec::with_capacity(tri_len(n));
        for i in 1..n {
            for j in 0..i {
                let (a, b) = (rows[i][j], rows[j][i]);
                max_entry = max_entry.max(a).max(b);
                max_asym = max_asym.max((a - b).abs());
                entries.push(0.5 * (a + b));
            }
        }
        if max_asym > ASYMMETRY_WARN_TOLERANCE * max_entry {
            log::warn!(
                "distance matrix asymmetric (max |d(i,j) - d(j,i)| = {max_asym:e}); symmetrized by averaging"
            );
        }
        Self::from_lower_triangle(n, entries)
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    /// Strict lower triangle, row-major.
    pub fn lower_triangle(&self) -> &[f64] {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        assert!(
            i < self.n_points && j < self.n_points,
            "index ({i}, {j}) out of range for {} points",
            self.n_points
        );
        match i.cmp(&j) {
            std::cmp::Ordering::Equal => 0.0,
            std::cmp::Ordering::Greater => self.entries[tri_index(i, j)],
            std::cmp::Ordering::Less => self.entries[tri_index(j, i)],
        }
    }

    /// Largest entry of the matrix.
    pub fn max_entry(&self) -> f64 {
        self.entries.iter().copied().fold(0.0, f64::max)
    }

    /// Multiplies every distance by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::from_lower_triangle(
            self.n_points,
            self.entries.iter().map(|d| d * factor).collect(),
        )
    }

    /// Strict-mode triangle inequality check on `samples` random triples.
    ///
    /// Returns the first violating triple `(i, j, k)` with
    /// `d(i,k) > d(i,j) + d(j,k) + tol`.
    pub fn check_triangle_inequality(
        &self,
        samples: usize,
        seed: u64,
        tol: f64,
    ) -> std::result::Result<(), (usize, usize, usize)> {
        if self.n_points < 3 {
            return Ok(());
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..samples {
            let i = rng.random_range(0..self.n_points);
            let j = rng.random_range(0..self.n_points);
            let k = rng.random_range(0..self.n_points);
            if self.get(i, k) > self.get(i, j) + self.get(j, k) + tol {
                return Err((i, j, k));
            }
        }
        Ok(())
    }

    fn validate_entries(&self) -> Result<()> {
        for (idx, &v) in self.entries.iter().enumerate() {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidMatrix(format!(
                    "entry {idx} of the lower triangle is {v}; distances must be finite and nonnegative"
                )));
            }
        }
        Ok(())
    }

    fn warn_duplicates(&self) {
        let zeros = self.entries.iter().filter(|&&v| v == 0.0).count();
        if zeros > 0 {
            log::warn!("{zeros} pairs of points are at distance zero (duplicate points)");
        }
    }

    pub fn save_binary(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        self.write_binary(&mut w).map_err(|e| Error::io(path, e))?;
        w.flush().map_err(|e| Error::io(path, e))
    }

    pub fn write_binary<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        w.write_all(DMAT_MAGIC)?;
        w.write_all(&[DMAT_VERSION])?;
        w.write_all(&(self.n_points as u64).to_le_bytes())?;
        for v in &self.entries {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(r: &mut R) -> Result<Self> {
        let fmt = |e: std::io::Error| Error::Format(e.to_string());
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic).map_err(fmt)?;
        if &magic != DMAT_MAGIC {
            return Err(Error::Format(format!("bad magic bytes {magic:?}")));
        }
        let mut version = [0u8; 1];
        r.read_exact(&mut version).map_err(fmt)?;
        if version[0] != DMAT_VERSION {
            return Err(Error::Format(format!("unsupported version {}", version[0])));
        }
        let mut nbuf = [0u8; 8];
        r.read_exact(&mut nbuf).map_err(fmt)?;
        let n = usize::try_from(u64::from_le_bytes(nbuf))
            .map_err(|_| Error::Format("point count does not fit in memory".into()))?;
        let len = n
            .checked_mul(n.saturating_sub(1))
            .map(|v| v / 2)
            .ok_or_else(|| Error::Format("point count overflows".into()))?;
        let mut bytes = Vec::new();
        r.read_to_end(&mut bytes).map_err(fmt)?;
        if bytes.len() != len * 8 {
            return Err(Error::Format(format!(
                "expected {} payload bytes for N = {}, found {}",
                len * 8,
                n,
                bytes.len()
            )));
        }
        let entries = bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
            .collect();
        Self::from_lower_triangle(n, entries)
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        let write = |w: &mut BufWriter<File>| -> std::io::Result<()> {
            for i in 0..self.n_points {
                for j in 0..self.n_points {
                    if j > 0 {
                        w.write_all(b",")?;
                    }
                    write!(w, "{}", self.get(i, j))?;
                }
                w.write_all(b"\n")?;
            }
            w.flush()
        };
        write(&mut w).map_err(|e| Error::io(path, e))
    }

    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let mut rows = Vec::new();
        for (lineno, line) in r.lines().enumerate() {
            let line = line.map_err(|e| Error::Parse {
                line: lineno + 1,
                message: e.to_string(),
            })?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let row = line
                .split(',')
                .map(|tok| {
                    tok.trim().parse::<f64>().map_err(|e| Error::Parse {
                        line: lineno + 1,
                        message: format!("{tok:?}: {e}"),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            rows.push(row);
        }
        Self::from_full(&rows)
    }
}

impl Metric for DistanceMatrix {
    fn len(&self) -> usize {
        self.n_points
    }

    #[inline]
    fn distance(&self, i: usize, j: usize) -> f64 {
        self.get(i, j)
    }

    fn row(&self, i: usize) -> Vec<f64> {
        assert!(i < self.n_points, "index {i} out of range");
        let mut out = Vec::with_capacity(self.n_points);
        let base = tri_index(i.max(1), 0);
        out.extend_from_slice(&self.entries[base..base + i]);
        out.push(0.0);
        for j in i + 1..self.n_points {
            out.push(self.entries[tri_index(j, i)]);
        }
        out
    }
}

/// On-disk distance matrix encodings.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixFormat {
    Csv,
    Binary,
}

impl MatrixFormat {
    /// `.csv` is CSV, anything else is the binary format.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => MatrixFormat::Csv,
            _ => MatrixFormat::Binary,
        }
    }
}

/// Loads and validates a distance matrix. Requires at least two points.
pub fn load_distance_matrix(path: &Path, format: MatrixFormat) -> Result<DistanceMatrix> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let m = match format {
        MatrixFormat::Csv => DistanceMatrix::read_csv(BufReader::new(file))?,
        MatrixFormat::Binary => DistanceMatrix::read_binary(&mut BufReader::new(file))?,
    };
    if m.n_points() < 2 {
        return Err(Error::InvalidMatrix(format!(
            "need at least 2 points, found {}",
            m.n_points()
        )));
    }
    Ok(m)
}

/// `N(x, r)`: points other than `x` in the closed ball of radius `r`.
pub fn ball_count<M: Metric + ?Sized>(d: &M, x: usize, r: f64) -> Result<usize> {
    if x >= d.len() {
        return Err(Error::IndexOutOfRange {
            index: x,
            len: d.len(),
        });
    }
    if !(r >= 0.0) {
        return Err(Error::InvalidParameter(format!("radius must be nonnegative, got {r}")));
    }
    Ok((0..d.len())
        .filter(|&y| y != x && d.distance(x, y) <= r)
        .count())
}

/// N points in R^D, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    n_points: usize,
    ambient_dim: usize,
    coords: Vec<f64>,
}

impl PointCloud {
    pub fn new(ambient_dim: usize, coords: Vec<f64>) -> Result<Self> {
        if ambient_dim == 0 {
            return Err(Error::InvalidCloud("ambient dimension must be at least 1".into()));
        }
        if !coords.len().is_multiple_of(ambient_dim) {
            return Err(Error::InvalidCloud(format!(
                "{} coordinates is not a multiple of dimension {}",
                coords.len(),
                ambient_dim
            )));
        }
        if let Some(pos) = coords.iter().position(|c| !c.is_finite()) {
            return Err(Error::InvalidCloud(format!(
                "non-finite coordinate in point {}",
                pos / ambient_dim
            )));
        }
        Ok(PointCloud {
            n_points: coords.len() / ambient_dim,
            ambient_dim,
            coords,
        })
    }

    pub fn from_points(points: &[Vec<f64>]) -> Result<Self> {
        let dim = points.first().map_or(0, Vec::len);
        if points.iter().any(|p| p.len() != dim) {
            return Err(Error::InvalidCloud("points have differing dimensions".into()));
        }
        Self::new(dim, points.concat())
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub(crate) fn coords_mut(&mut self) -> &mut [f64] {
        &mut self.coords
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.ambient_dim..(i + 1) * self.ambient_dim]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.ambient_dim)
    }

    /// Reads `N` lines by `D` comma-separated decimals. A first line starting
    /// with `#` is treated as a header.
    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let mut dim = None;
        let mut coords = Vec::new();
        for (lineno, line) in r.lines().enumerate() {
            let line = line.map_err(|e| Error::Parse {
                line: lineno + 1,
                message: e.to_string(),
            })?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let before = coords.len();
            for tok in line.split(',') {
                coords.push(tok.trim().parse::<f64>().map_err(|e| Error::Parse {
                    line: lineno + 1,
                    message: format!("{tok:?}: {e}"),
                })?);
            }
            let width = coords.len() - before;
            match dim {
                None => dim = Some(width),
                Some(d) if d != width => {
                    return Err(Error::Parse {
                        line: lineno + 1,
                        message: format!("expected {d} columns, found {width}"),
                    })
                }
                _ => {}
            }
        }
        let dim = dim.ok_or_else(|| Error::InvalidCloud("point cloud file is empty".into()))?;
        Self::new(dim, coords)
    }

    pub fn load_csv(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_csv(BufReader::new(file))
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        let write = |w: &mut BufWriter<File>| -> std::io::Result<()> {
            for p in self.points() {
                for (k, c) in p.iter().enumerate() {
                    if k > 0 {
                        w.write_all(b",")?;
                    }
                    write!(w, "{c}")?;
                }
                w.write_all(b"\n")?;
            }
            w.flush()
        };
        write(&mut w).map_err(|e| Error::io(path, e))
    }
}

pub fn euclidean_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Full Euclidean distance matrix of a point cloud.
pub fn pairwise_euclidean(cloud: &PointCloud) -> Result<DistanceMatrix> {
    DistanceMatrix::from_fn(cloud.n_points(), |i, j| {
        euclidean_distance(cloud.point(i), cloud.point(j))
    })
}

/// Metric evaluated on demand from coordinates, without storing N² entries.
pub struct CloudMetric<'a, F> {
    cloud: &'a PointCloud,
    dist: F,
}

impl<'a> CloudMetric<'a, fn(&[f64], &[f64]) -> f64> {
    pub fn euclidean(cloud: &'a PointCloud) -> Self {
        CloudMetric {
            cloud,
            dist: euclidean_distance,
        }
    }
}

impl<'a, F> CloudMetric<'a, F>
where
    F: Fn(&[f64], &[f64]) -> f64 + Sync,
{
    pub fn new(cloud: &'a PointCloud, dist: F) -> Self {
        CloudMetric { cloud, dist }
    }

    /// Materializes the full matrix.
    pub fn to_matrix(&self) -> Result<DistanceMatrix> {
        DistanceMatrix::from_fn(self.cloud.n_points(), |i, j| self.distance(i, j))
    }
}

impl<F> Metric for CloudMetric<'_, F>
where
    F: Fn(&[f64], &[f64]) -> f64 + Sync,
{
    fn len(&self) -> usize {
        self.cloud.n_points()
    }

    fn distance(&self, i: usize, j: usize) -> f64 {
        if i == j {
            0.0
        } else {
            (self.dist)(self.cloud.point(i), self.cloud.point(j))
        }
    }
}

/// Distinct, sorted point indices at which curvature is evaluated.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvaluationSet {
    indices: Vec<usize>,
}

impl EvaluationSet {
    pub fn all(n_points: usize) -> Self {
        EvaluationSet {
            indices: (0..n_points).collect(),
        }
    }

    pub fn new(mut indices: Vec<usize>, n_points: usize) -> Result<Self> {
        if let Some(&bad) = indices.iter().find(|&&i| i >= n_points) {
            return Err(Error::IndexOutOfRange {
                index: bad,
                len: n_points,
            });
        }
        indices.sort_unstable();
        let before = indices.len();
        indices.dedup();
        if indices.len() != before {
            return Err(Error::InvalidParameter(
                "evaluation indices must be distinct".into(),
            ));
        }
        Ok(EvaluationSet { indices })
    }

    pub fn from_mask(mask: &[bool]) -> Self {
        EvaluationSet {
            indices: mask
                .iter()
                .enumerate()
                .filter_map(|(i, &m)| m.then_some(i))
                .collect(),
        }
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.indices.binary_search(&i).is_ok()
    }

    /// Mask of length `n_points`.
    pub fn to_mask(&self, n_points: usize) -> Vec<bool> {
        let mut mask = vec![false; n_points];
        for &i in &self.indices {
            mask[i] = true;
        }
        mask
    }

    /// Reads one index per line; blank lines and `#` comments are skipped.
    pub fn load(path: &Path, n_points: usize) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut indices = Vec::new();
        for (lineno, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|e| Error::io(path, e))?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            indices.push(line.parse::<usize>().map_err(|e| Error::Parse {
                line: lineno + 1,
                message: format!("{line:?}: {e}"),
            })?);
        }
        Self::new(indices, n_points)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn csv(s: &str) -> Result<DistanceMatrix> {
        DistanceMatrix::read_csv(s.as_bytes())
    }

    #[test]
    fn reads_csv_directly() {
        let m = csv("0,1,2\n1,0,1\n2,1,0\n").unwrap();
        assert_eq!(m.n_points(), 3);
        assert_eq!(m.get(0, 2), 2.0);
        assert_eq!(m.get(2, 0), 2.0);
        assert_eq!(m.get(1, 1), 0.0);
    }

    #[test]
    fn symmetrizes_small_asymmetry() {
        let m = csv("0,1\n1.000000001,0\n").unwrap();
        assert_eq!(m.get(0, 1), 0.5 * (1.0 + 1.000000001));
        assert!((m.get(0, 1) - 1.0000000005).abs() < 1e-15);
    }

    #[test]
    fn duplicate_points_load() {
        let m = csv("0,0,0\n0,0,0\n0,0,0\n").unwrap();
        assert_eq!(m.max_entry(), 0.0);
    }

    #[test]
    fn rejects_bad_matrices() {
        assert!(matches!(csv("0,-1\n-1,0\n"), Err(Error::InvalidMatrix(_))));
        assert!(matches!(csv("0.1,1\n1,0\n"), Err(Error::InvalidMatrix(_))));
        assert!(matches!(csv("0,1,2\n1,0\n"), Err(Error::InvalidMatrix(_))));
        assert!(matches!(csv("0,x\nx,0\n"), Err(Error::Parse { line: 1, .. })));
        // tiny diagonal noise is tolerated
        assert!(csv("1e-13,1\n1,0\n").is_ok());
    }

    #[test]
    fn load_requires_two_points() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("one.csv");
        std::fs::write(&path, "0\n").unwrap();
        let err = load_distance_matrix(&path, MatrixFormat::Csv).unwrap_err();
        assert!(matches!(err, Error::InvalidMatrix(_)));
    }

    #[test]
    fn binary_header_is_checked() {
        let m = csv("0,1,2\n1,0,1\n2,1,0\n").unwrap();
        let mut buf = Vec::new();
        m.write_binary(&mut buf).unwrap();
        assert_eq!(&buf[..4], b"DMAT");
        assert_eq!(buf[4], 1);
        assert_eq!(u64::from_le_bytes(buf[5..13].try_into().unwrap()), 3);
        assert_eq!(buf.len(), 13 + 3 * 8);
        assert_eq!(DistanceMatrix::read_binary(&mut buf.as_slice()).unwrap(), m);

        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(matches!(
            DistanceMatrix::read_binary(&mut bad.as_slice()),
            Err(Error::Format(_))
        ));
        let truncated = &buf[..buf.len() - 1];
        assert!(DistanceMatrix::read_binary(&mut &truncated[..]).is_err());
    }

    #[test]
    fn pairwise_euclidean_basic() {
        let cloud = PointCloud::from_points(&[vec![0.0, 0.0], vec![3.0, 4.0]]).unwrap();
        let d = pairwise_euclidean(&cloud).unwrap();
        assert_eq!(d.get(0, 1), 5.0);

        let same = PointCloud::from_points(&[vec![1.5, -2.0], vec![1.5, -2.0]]).unwrap();
        assert_eq!(pairwise_euclidean(&same).unwrap().get(1, 0), 0.0);
    }

    #[test]
    fn pairwise_euclidean_random_is_metric() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let pts: Vec<Vec<f64>> = (0..100)
            .map(|_| (0..3).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        let d = pairwise_euclidean(&PointCloud::from_points(&pts).unwrap()).unwrap();
        for i in 0..100 {
            for j in 0..100 {
                assert_eq!(d.get(i, j), d.get(j, i));
                for k in 0..100 {
                    assert!(d.get(i, k) <= d.get(i, j) + d.get(j, k) + 1e-12);
                }
            }
        }
        assert!(d.check_triangle_inequality(10_000, 1, 1e-12).is_ok());
    }

    #[test]
    fn ball_count_cases() {
        // row 0 = [0, 1, 2, 3]
        let d = DistanceMatrix::from_fn(4, |i, j| (i as f64 - j as f64).abs()).unwrap();
        assert_eq!(ball_count(&d, 0, 0.0).unwrap(), 0);
        assert_eq!(ball_count(&d, 0, 2.0).unwrap(), 2);
        assert_eq!(ball_count(&d, 0, 3.0).unwrap(), 3);
        assert_eq!(ball_count(&d, 0, 100.0).unwrap(), 3);
        assert!(matches!(
            ball_count(&d, 4, 1.0),
            Err(Error::IndexOutOfRange { index: 4, len: 4 })
        ));
        assert!(ball_count(&d, 0, -1.0).is_err());
    }

    #[test]
    fn row_matches_get() {
        let d = DistanceMatrix::from_fn(6, |i, j| (i * 10 + j) as f64).unwrap();
        for i in 0..6 {
            let row = d.row(i);
            for (j, &v) in row.iter().enumerate() {
                assert_eq!(v, d.get(i, j));
            }
        }
    }

    #[test]
    fn cloud_csv_with_header() {
        let cloud = PointCloud::read_csv("# x,y\n1,2\n3,4\n".as_bytes()).unwrap();
        assert_eq!(cloud.n_points(), 2);
        assert_eq!(cloud.point(1), &[3.0, 4.0]);
        assert!(PointCloud::read_csv("1,2\n3\n".as_bytes()).is_err());
        assert!(PointCloud::new(2, vec![f64::NAN, 0.0]).is_err());
    }

    #[test]
    fn evaluation_set_validation() {
        assert!(EvaluationSet::new(vec![0, 5], 5).is_err());
        assert!(EvaluationSet::new(vec![1, 1], 5).is_err());
        let s = EvaluationSet::new(vec![3, 1], 5).unwrap();
        assert_eq!(s.indices(), &[1, 3]);
        assert_eq!(EvaluationSet::from_mask(&s.to_mask(5)), s);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn binary_round_trip_is_bit_exact(
                n in 1usize..12,
                seed in any::<u64>(),
            ) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let entries: Vec<f64> = (0..n * (n - 1) / 2)
                    .map(|_| rng.random::<f64>() * 1e3)
                    .collect();
                let m = DistanceMatrix::from_lower_triangle(n, entries).unwrap();
                let mut buf = Vec::new();
                m.write_binary(&mut buf).unwrap();
                let back = DistanceMatrix::read_binary(&mut buf.as_slice()).unwrap();
                let bits = |m: &DistanceMatrix| m.lower_triangle().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
                prop_assert_eq!(bits(&back), bits(&m));
            }

            #[test]
            fn ball_count_monotone_in_radius(
                seed in any::<u64>(),
                r1 in 0.0f64..2.0,
                dr in 0.0f64..2.0,
            ) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let pts: Vec<Vec<f64>> = (0..30).map(|_| vec![rng.random::<f64>(), rng.random::<f64>()]).collect();
                let d = pairwise_euclidean(&PointCloud::from_points(&pts).unwrap()).unwrap();
                let a = ball_count(&d, 0, r1).unwrap();
                let b = ball_count(&d, 0, r1 + dr).unwrap();
                prop_assert!(a <= b);
                prop_assert!(b <= 29);
            }
        }
    }
}
