//! Dataset container I/O.
//!
//! `.tmds` layout (all integers little-endian):
//!
//! ```text
//! offset  size      field
//! 0       8         magic "PHPACKTM"
//! 8       2         version (u16, currently 1)
//! 10      4         m (u32, measurement count)
//! 14      4         n (u32, signal dimension)
//! 18      2         flags (u16): bit 0 = ground truth present,
//!                                bit 1 = matrix is complex
//! 20      ...       A, row-major: m·n complex64 pairs (f32 re, f32 im)
//!                   when bit 1 is set, m·n f32 otherwise
//! ...     4·m       b (f32, nonnegative)
//! ...     8·n       x_true (f32 pairs), present iff bit 0 is set
//! ```
//!
//! The matrix uses plain matvec semantics: detector i records (A·x)ᵢ =
//! Σⱼ Aᵢⱼ·xⱼ, and b = |A·x|. The loader conjugates rows into measurement
//! vectors to honor the crate-wide inner-product convention, which is
//! invisible for real-valued matrices.
//!
//! Image signals use binary 8-bit grayscale PGM (P5), pixels mapped to
//! [0, 1].

use std::fs;
use std::path::Path;
use std::sync::Arc;

use num_complex::Complex;
use thiserror::Error;

use crate::operators::{DenseOperator, Instance};
use crate::scalar::Real;

pub const TM_MAGIC: &[u8; 8] = b"PHPACKTM";
pub const TM_VERSION: u16 = 1;
pub const FLAG_GROUND_TRUTH: u16 = 1 << 0;
pub const FLAG_COMPLEX: u16 = 1 << 1;

const HEADER_LEN: usize = 20;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("bad magic: expected \"PHPACKTM\", found {found:?}")]
    BadMagic { found: Vec<u8> },

    #[error("unsupported version {found} (supported: {TM_VERSION})")]
    UnsupportedVersion { found: u16 },

    #[error("truncated payload: expected {expected} bytes, got {actual}")]
    Truncated { expected: usize, actual: usize },

    #[error("size mismatch: expected {expected} bytes, file has {actual}")]
    SizeMismatch { expected: usize, actual: usize },

    #[error("invalid data: {0}")]
    InvalidData(String),

    #[error("malformed image: {0}")]
    MalformedImage(String),

    #[error("dimension mismatch: expected {expected} values, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

fn io_err(path: &Path, source: std::io::Error) -> DatasetError {
    DatasetError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Transmission-matrix dataset in file layout: f32 storage, plain matvec
/// row convention.
#[derive(Clone, Debug, PartialEq)]
pub struct TmDataset {
    pub m: u32,
    pub n: u32,
    pub matrix: TmMatrix,
    pub b: Vec<f32>,
    pub x_true: Option<Vec<Complex<f32>>>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum TmMatrix {
    Real(Vec<f32>),
    Complex(Vec<Complex<f32>>),
}

impl TmDataset {
    pub fn is_complex(&self) -> bool {
        matches!(self.matrix, TmMatrix::Complex(_))
    }

    pub fn validate(&self) -> Result<(), DatasetError> {
        let mn = self.m as usize * self.n as usize;
        let len = match &self.matrix {
            TmMatrix::Real(v) => v.len(),
            TmMatrix::Complex(v) => v.len(),
        };
        if len != mn {
            return Err(DatasetError::DimensionMismatch {
                expected: mn,
                actual: len,
            });
        }
        if self.b.len() != self.m as usize {
            return Err(DatasetError::DimensionMismatch {
                expected: self.m as usize,
                actual: self.b.len(),
            });
        }
        if let Some(x) = &self.x_true {
            if x.len() != self.n as usize {
                return Err(DatasetError::DimensionMismatch {
                    expected: self.n as usize,
                    actual: x.len(),
                });
            }
        }
        if self.b.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
            return Err(DatasetError::InvalidData(
                "b entries must be finite and nonnegative".into(),
            ));
        }
        Ok(())
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>, DatasetError> {
        self.validate()?;
        let mut flags = 0u16;
        if self.x_true.is_some() {
            flags |= FLAG_GROUND_TRUTH;
        }
        if self.is_complex() {
            flags |= FLAG_COMPLEX;
        }
        let mut out = Vec::with_capacity(HEADER_LEN + 8 * self.m as usize * self.n as usize);
        out.extend_from_slice(TM_MAGIC);
        out.extend_from_slice(&TM_VERSION.to_le_bytes());
        out.extend_from_slice(&self.m.to_le_bytes());
        out.extend_from_slice(&self.n.to_le_bytes());
        out.extend_from_slice(&flags.to_le_bytes());
        match &self.matrix {
            TmMatrix::Real(v) => {
                for x in v {
                    out.extend_from_slice(&x.to_le_bytes());
                }
            }
            TmMatrix::Complex(v) => {
                for z in v {
                    out.extend_from_slice(&z.re.to_le_bytes());
                    out.extend_from_slice(&z.im.to_le_bytes());
                }
            }
        }
        for x in &self.b {
            out.extend_from_slice(&x.to_le_bytes());
        }
        if let Some(xs) = &self.x_true {
            for z in xs {
                out.extend_from_slice(&z.re.to_le_bytes());
                out.extend_from_slice(&z.im.to_le_bytes());
            }
        }
        Ok(out)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, DatasetError> {
        if bytes.len() < HEADER_LEN {
            return Err(DatasetError::Truncated {
                expected: HEADER_LEN,
                actual: bytes.len(),
            });
        }
        if &bytes[0..8] != TM_MAGIC {
            return Err(DatasetError::BadMagic {
                found: bytes[0..8].to_vec(),
            });
        }
        let version = u16::from_le_bytes([bytes[8], bytes[9]]);
        if version != TM_VERSION {
            return Err(DatasetError::UnsupportedVersion { found: version });
        }
        let m = u32::from_le_bytes(bytes[10..14].try_into().unwrap());
        let n = u32::from_le_bytes(bytes[14..18].try_into().unwrap());
        let flags = u16::from_le_bytes([bytes[18], bytes[19]]);
        let has_truth = flags & FLAG_GROUND_TRUTH != 0;
        let is_complex = flags & FLAG_COMPLEX != 0;

        let mn = (m as u64).checked_mul(n as u64).ok_or_else(|| {
            DatasetError::InvalidData("m·n overflows".into())
        })?;
        let matrix_bytes = mn
            .checked_mul(if is_complex { 8 } else { 4 })
            .ok_or_else(|| DatasetError::InvalidData("matrix size overflows".into()))?;
        let expected = HEADER_LEN as u64
            + matrix_bytes
            + 4 * m as u64
            + if has_truth { 8 * n as u64 } else { 0 };
        let expected = usize::try_from(expected)
            .map_err(|_| DatasetError::InvalidData("declared payload exceeds usize".into()))?;
        if bytes.len() < expected {
            return Err(DatasetError::Truncated {
                expected,
                actual: bytes.len(),
            });
        }
        if bytes.len() > expected {
            return Err(DatasetError::SizeMismatch {
                expected,
                actual: bytes.len(),
            });
        }

        let mut pos = HEADER_LEN;
        let read_f32 = |bytes: &[u8], pos: &mut usize| -> f32 {
            let v = f32::from_le_bytes(bytes[*pos..*pos + 4].try_into().unwrap());
            *pos += 4;
            v
        };

        let mn = mn as usize;
        let matrix = if is_complex {
            let mut v = Vec::with_capacity(mn);
            for _ in 0..mn {
                let re = read_f32(bytes, &mut pos);
                let im = read_f32(bytes, &mut pos);
                v.push(Complex::new(re, im));
            }
            TmMatrix::Complex(v)
        } else {
            let mut v = Vec::with_capacity(mn);
            for _ in 0..mn {
                v.push(read_f32(bytes, &mut pos));
            }
            TmMatrix::Real(v)
        };
        let mut b = Vec::with_capacity(m as usize);
        for _ in 0..m {
            b.push(read_f32(bytes, &mut pos));
        }
        let x_true = if has_truth {
            let mut xs = Vec::with_capacity(n as usize);
            for _ in 0..n {
                let re = read_f32(bytes, &mut pos);
                let im = read_f32(bytes, &mut pos);
                xs.push(Complex::new(re, im));
            }
            Some(xs)
        } else {
            None
        };

        let ds = TmDataset {
            m,
            n,
            matrix,
            b,
            x_true,
        };
        ds.validate()?;
        Ok(ds)
    }

    /// Converts into a solver-ready instance. Matrix rows are conjugated into
    /// measurement vectors so that forward(x)[i] = Σⱼ Aᵢⱼ·xⱼ.
    pub fn to_instance<T: Real>(&self, label: impl Into<String>) -> crate::Result<Instance<T>> {
        let mn = self.m as usize * self.n as usize;
        let mut rows = Vec::with_capacity(mn);
        match &self.matrix {
            TmMatrix::Real(v) => {
                rows.extend(v.iter().map(|&x| Complex::new(T::of(x as f64), T::zero())));
            }
            TmMatrix::Complex(v) => {
                // conj: ⟨a, x⟩ with a = conj(A row) equals the plain matvec.
                rows.extend(
                    v.iter()
                        .map(|z| Complex::new(T::of(z.re as f64), T::of(-z.im as f64))),
                );
            }
        }
        let op = DenseOperator::from_rows(self.m as usize, self.n as usize, rows)?;
        let b: Vec<T> = self.b.iter().map(|&v| T::of(v as f64)).collect();
        let x_true = self.x_true.as_ref().map(|xs| {
            xs.iter()
                .map(|z| Complex::new(T::of(z.re as f64), T::of(z.im as f64)))
                .collect()
        });
        Instance::new(Arc::new(op), b, x_true, label)
    }

    /// Builds a dataset from an instance with row access, inverting the
    /// conjugation applied by `to_instance`.
    pub fn from_instance<T: Real>(inst: &Instance<T>) -> crate::Result<Self> {
        use crate::error::Error;
        if !inst.op.has_rows() {
            return Err(Error::InvalidArgument(
                "dataset export requires an operator with row access".into(),
            ));
        }
        let m = inst.m();
        let n = inst.n();
        let mut matrix = Vec::with_capacity(m * n);
        for i in 0..m {
            let row = inst.op.row(i).expect("row access checked above");
            matrix.extend(row.iter().map(|z| {
                Complex::new(z.re.to_f64_lossy() as f32, -z.im.to_f64_lossy() as f32)
            }));
        }
        let ds = TmDataset {
            m: m as u32,
            n: n as u32,
            matrix: TmMatrix::Complex(matrix),
            b: inst.b.iter().map(|&v| v.to_f64_lossy() as f32).collect(),
            x_true: inst.x_true.as_ref().map(|xs| {
                xs.iter()
                    .map(|z| {
                        Complex::new(z.re.to_f64_lossy() as f32, z.im.to_f64_lossy() as f32)
                    })
                    .collect()
            }),
        };
        ds.validate()?;
        Ok(ds)
    }
}

pub fn save_tm(dataset: &TmDataset, path: impl AsRef<Path>) -> Result<(), DatasetError> {
    let path = path.as_ref();
    let bytes = dataset.to_bytes()?;
    fs::write(path, bytes).map_err(|e| io_err(path, e))
}

pub fn load_tm_dataset(path: impl AsRef<Path>) -> Result<TmDataset, DatasetError> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| io_err(path, e))?;
    TmDataset::from_bytes(&bytes)
}

/// Loads a dataset as a solver-ready instance; the operator is dense with
/// row access.
pub fn load_tm<T: Real>(path: impl AsRef<Path>) -> crate::Result<Instance<T>> {
    let path = path.as_ref();
    let ds = load_tm_dataset(path)?;
    let label = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "dataset".into());
    ds.to_instance(label)
}

/// Loads a binary 8-bit grayscale PGM (P5) image as a real signal in [0, 1],
/// row-major. Returns (signal, width, height).
pub fn load_image_signal<T: Real>(
    path: impl AsRef<Path>,
) -> Result<(Vec<T>, usize, usize), DatasetError> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| io_err(path, e))?;
    parse_pgm(&bytes)
}

pub(crate) fn parse_pgm<T: Real>(bytes: &[u8]) -> Result<(Vec<T>, usize, usize), DatasetError> {
    let mut pos = 0usize;

    let next_token = |pos: &mut usize| -> Result<String, DatasetError> {
        // Skip whitespace and '#' comment lines.
        loop {
            while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
                *pos += 1;
            }
            if *pos < bytes.len() && bytes[*pos] == b'#' {
                while *pos < bytes.len() && bytes[*pos] != b'\n' {
                    *pos += 1;
                }
                continue;
            }
            break;
        }
        let start = *pos;
        while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        if start == *pos {
            return Err(DatasetError::MalformedImage("unexpected end of header".into()));
        }
        Ok(String::from_utf8_lossy(&bytes[start..*pos]).into_owned())
    };

    let magic = next_token(&mut pos)?;
    if magic != "P5" {
        return Err(DatasetError::MalformedImage(format!(
            "expected P5 magic, found {magic:?}"
        )));
    }
    let parse_dim = |tok: String, what: &str| -> Result<usize, DatasetError> {
        tok.parse::<usize>()
            .map_err(|_| DatasetError::MalformedImage(format!("invalid {what}: {tok:?}")))
    };
    let width = parse_dim(next_token(&mut pos)?, "width")?;
    let height = parse_dim(next_token(&mut pos)?, "height")?;
    let maxval = parse_dim(next_token(&mut pos)?, "maxval")?;
    if width == 0 || height == 0 {
        return Err(DatasetError::MalformedImage(
            "image dimensions must be positive".into(),
        ));
    }
    if maxval == 0 || maxval > 255 {
        return Err(DatasetError::MalformedImage(format!(
            "only 8-bit images supported (maxval {maxval})"
        )));
    }
    // Exactly one whitespace byte separates the header from the raster.
    if pos >= bytes.len() || !bytes[pos].is_ascii_whitespace() {
        return Err(DatasetError::MalformedImage(
            "missing raster separator".into(),
        ));
    }
    pos += 1;

    let n = width
        .checked_mul(height)
        .ok_or_else(|| DatasetError::MalformedImage("width·height overflows".into()))?;
    let available = bytes.len() - pos;
    if available < n {
        return Err(DatasetError::Truncated {
            expected: pos + n,
            actual: bytes.len(),
        });
    }
    if available > n {
        return Err(DatasetError::SizeMismatch {
            expected: pos + n,
            actual: bytes.len(),
        });
    }
    let maxval = maxval as f64;
    let x = bytes[pos..pos + n]
        .iter()
        .map(|&p| T::of(p as f64 / maxval))
        .collect();
    Ok((x, width, height))
}

/// Saves a real signal as a binary 8-bit grayscale PGM. Values are clamped
/// to [0, 1] and rounded to the nearest of 256 levels.
pub fn save_image_signal<T: Real>(
    x: &[T],
    width: usize,
    height: usize,
    path: impl AsRef<Path>,
) -> Result<(), DatasetError> {
    let path = path.as_ref();
    if x.len() != width * height {
        return Err(DatasetError::DimensionMismatch {
            expected: width * height,
            actual: x.len(),
        });
    }
    let mut out = format!("P5\n{width} {height}\n255\n").into_bytes();
    out.extend(x.iter().map(|&v| {
        let clamped = v.to_f64_lossy().clamp(0.0, 1.0);
        (clamped * 255.0).round() as u8
    }));
    fs::write(path, out).map_err(|e| io_err(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha20Rng;

    fn sample_dataset(seed: u64, complex: bool, with_truth: bool) -> TmDataset {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let m = 8u32;
        let n = 4u32;
        let mn = (m * n) as usize;
        let matrix = if complex {
            TmMatrix::Complex(
                (0..mn)
                    .map(|_| Complex::new(rng.random::<f32>() - 0.5, rng.random::<f32>() - 0.5))
                    .collect(),
            )
        } else {
            TmMatrix::Real((0..mn).map(|_| rng.random::<f32>() - 0.5).collect())
        };
        TmDataset {
            m,
            n,
            matrix,
            b: (0..m).map(|_| rng.random::<f32>()).collect(),
            x_true: with_truth.then(|| {
                (0..n)
                    .map(|_| Complex::new(rng.random::<f32>(), rng.random::<f32>()))
                    .collect()
            }),
        }
    }

    #[test]
    fn tmds_round_trip_is_bit_exact() {
        for (complex, truth) in [(true, true), (true, false), (false, true), (false, false)] {
            let ds = sample_dataset(1, complex, truth);
            let bytes = ds.to_bytes().unwrap();
            let back = TmDataset::from_bytes(&bytes).unwrap();
            assert_eq!(ds, back);
            let bytes2 = back.to_bytes().unwrap();
            assert_eq!(bytes, bytes2, "re-save must be bit-identical");
        }
    }

    #[test]
    fn bad_magic_is_rejected() {
        let ds = sample_dataset(2, true, true);
        let mut bytes = ds.to_bytes().unwrap();
        bytes[0..8].copy_from_slice(b"XXXXXXXX");
        match TmDataset::from_bytes(&bytes) {
            Err(DatasetError::BadMagic { .. }) => {}
            other => panic!("expected BadMagic, got {other:?}"),
        }
    }

    #[test]
    fn version_mismatch_is_rejected() {
        let ds = sample_dataset(3, false, false);
        let mut bytes = ds.to_bytes().unwrap();
        bytes[8] = 9;
        match TmDataset::from_bytes(&bytes) {
            Err(DatasetError::UnsupportedVersion { found: 9 }) => {}
            other => panic!("expected UnsupportedVersion, got {other:?}"),
        }
    }

    #[test]
    fn truncation_names_expected_and_actual_bytes() {
        // Header claims m = 10 but the payload only covers m = 8.
        let ds = sample_dataset(4, true, false);
        let mut bytes = ds.to_bytes().unwrap();
        bytes[10..14].copy_from_slice(&10u32.to_le_bytes());
        match TmDataset::from_bytes(&bytes) {
            Err(DatasetError::Truncated { expected, actual }) => {
                assert!(expected > actual);
                assert_eq!(actual, bytes.len());
            }
            other => panic!("expected Truncated, got {other:?}"),
        }
    }

    #[test]
    fn trailing_bytes_are_rejected() {
        let ds = sample_dataset(5, false, true);
        let mut bytes = ds.to_bytes().unwrap();
        bytes.push(0);
        match TmDataset::from_bytes(&bytes) {
            Err(DatasetError::SizeMismatch { .. }) => {}
            other => panic!("expected SizeMismatch, got {other:?}"),
        }
    }

    #[test]
    fn negative_b_is_rejected() {
        let mut ds = sample_dataset(6, true, false);
        ds.b[0] = -1.0;
        assert!(matches!(
            ds.to_bytes(),
            Err(DatasetError::InvalidData(_))
        ));
        let mut ds = sample_dataset(6, true, false);
        let bytes = ds.to_bytes().unwrap();
        ds.b[0] = -1.0;
        // Patch the stored b entry to a negative value.
        let mut bytes = bytes;
        let b_offset = 20 + 8 * 8 * 4;
        bytes[b_offset..b_offset + 4].copy_from_slice(&(-1.0f32).to_le_bytes());
        assert!(matches!(
            TmDataset::from_bytes(&bytes),
            Err(DatasetError::InvalidData(_))
        ));
    }

    #[test]
    fn truncation_fuzz_never_panics_or_loads() {
        let ds = sample_dataset(7, true, true);
        let bytes = ds.to_bytes().unwrap();
        for len in 0..bytes.len() {
            assert!(
                TmDataset::from_bytes(&bytes[..len]).is_err(),
                "prefix of {len} bytes must not parse"
            );
        }
    }

    #[test]
    fn header_bitflip_fuzz_never_panics() {
        let ds = sample_dataset(8, true, true);
        let bytes = ds.to_bytes().unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(99);
        for _ in 0..300 {
            let mut corrupted = bytes.clone();
            let byte = rng.random_range(0..HEADER_LEN);
            let bit = rng.random_range(0..8);
            corrupted[byte] ^= 1 << bit;
            // Must either parse to a valid dataset (benign flip) or error
            // cleanly; in no case panic.
            let _ = TmDataset::from_bytes(&corrupted);
        }
    }

    #[test]
    fn instance_round_trip_preserves_operator_action() {
        let ds = sample_dataset(9, true, true);
        let inst: Instance<f64> = ds.to_instance("test").unwrap();
        // Forward must equal the plain matvec of the stored matrix.
        let x: Vec<Complex<f64>> = (0..4).map(|j| Complex::new(j as f64, -1.0)).collect();
        let fx = inst.op.forward(&x);
        if let TmMatrix::Complex(a) = &ds.matrix {
            for i in 0..8 {
                let mut acc = Complex::new(0.0, 0.0);
                for j in 0..4 {
                    let entry = Complex::new(a[i * 4 + j].re as f64, a[i * 4 + j].im as f64);
                    acc += entry * x[j];
                }
                assert!((fx[i] - acc).norm() <= 1e-6);
            }
        }
        // And exporting the instance reproduces the dataset bit-for-bit.
        let back = TmDataset::from_instance(&inst).unwrap();
        assert_eq!(ds, back);
    }

    #[test]
    fn adjoint_consistency_of_dataset_backed_operator() {
        let ds = sample_dataset(10, true, false);
        let inst: Instance<f64> = ds.to_instance("adj").unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        for _ in 0..100 {
            let x = linalg::complex_gaussian_vec::<f64, _>(&mut rng, 4, 1.0);
            let y = linalg::complex_gaussian_vec::<f64, _>(&mut rng, 8, 1.0);
            let lhs = linalg::dot(&inst.op.forward(&x), &y);
            let rhs = linalg::dot(&x, &inst.op.adjoint(&y));
            assert!((lhs - rhs).norm() <= 1e-10);
        }
    }

    #[test]
    fn pgm_black_image_loads_as_zeros() {
        let bytes = b"P5\n2 2\n255\n\0\0\0\0";
        let (x, w, h) = parse_pgm::<f64>(bytes).unwrap();
        assert_eq!((w, h), (2, 2));
        assert_eq!(x, vec![0.0; 4]);
    }

    #[test]
    fn pgm_pixel_mapping() {
        let bytes = b"P5\n2 1\n255\n\xff\x80";
        let (x, _, _) = parse_pgm::<f64>(bytes).unwrap();
        assert_eq!(x[0], 1.0);
        assert_eq!(x[1], 128.0 / 255.0);
    }

    #[test]
    fn pgm_round_trip_identity() {
        let dir = std::env::temp_dir().join(format!("phaserepo-pgm-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join("roundtrip.pgm");
        let mut rng = ChaCha20Rng::seed_from_u64(11);
        let raw: Vec<u8> = (0..6 * 4).map(|_| rng.random()).collect();
        let x: Vec<f64> = raw.iter().map(|&p| p as f64 / 255.0).collect();
        save_image_signal(&x, 6, 4, &path).unwrap();
        let (back, w, h) = load_image_signal::<f64>(&path).unwrap();
        assert_eq!((w, h), (6, 4));
        assert_eq!(back, x);
        fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn pgm_malformed_headers_are_rejected() {
        for bytes in [
            &b"P6\n2 2\n255\n\0\0\0\0"[..],     // wrong magic
            &b"P5\n2\n255\n\0\0"[..],           // missing height token count
            &b"P5\n2 2\n70000\n\0\0\0\0"[..],   // not 8-bit
            &b"P5\n0 2\n255\n"[..],             // zero dimension
            &b"P5\n2 2\n255\n\0\0\0"[..],       // truncated raster
            &b"P5\n2 2\n255\n\0\0\0\0\0"[..],   // trailing raster bytes
            &b"P5 # comment only"[..],          // header ends early
        ] {
            assert!(parse_pgm::<f64>(bytes).is_err());
        }
    }

    #[test]
    fn pgm_header_comments_are_skipped() {
        let bytes = b"P5\n# a comment line\n2 1\n# another\n255\n\x10\x20";
        let (x, w, h) = parse_pgm::<f64>(bytes).unwrap();
        assert_eq!((w, h), (2, 1));
        assert!((x[0] - 16.0 / 255.0).abs() < 1e-12);
        assert!((x[1] - 32.0 / 255.0).abs() < 1e-12);
    }

    #[test]
    fn save_rejects_dimension_mismatch() {
        let path = std::env::temp_dir().join("phaserepo-badsave.pgm");
        let err = save_image_signal(&[0.5f64; 3], 2, 2, &path);
        assert!(matches!(
            err,
            Err(DatasetError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn file_round_trip_through_disk() {
        let dir = std::env::temp_dir().join(format!("phaserepo-tmds-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join("sample.tmds");
        let ds = sample_dataset(12, true, true);
        save_tm(&ds, &path).unwrap();
        let inst: Instance<f64> = load_tm(&path).unwrap();
        assert_eq!(inst.m(), 8);
        assert_eq!(inst.n(), 4);
        assert_eq!(inst.label, "sample");
        assert!(inst.x_true.is_some());
        let missing = load_tm::<f64>(dir.join("missing.tmds"));
        assert!(missing.is_err());
        fs::remove_dir_all(&dir).ok();
    }
}
