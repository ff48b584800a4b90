//! Geometric multipath channel generation, persistence, and reload.
//!
//! Each user's channel is a sum of `L` planar-wave paths between uniform
//! linear arrays: `H = √(N·M/L) · Σ_ℓ α_ℓ · a_rx(φ_rx,ℓ) · a_tx(φ_tx,ℓ)ᴴ`,
//! with complex Gaussian path gains and angles uniform on `[0, 2π)`. The
//! normalization makes `E‖H‖_F² = N·M`.

use crate::hybrid::SystemConfig;
use crate::numerics::ComplexMatrix;
use crate::{Error, Result, Scalar};
use num_complex::Complex;
use rand::distr::uniform::SampleUniform;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use std::fs::File;
use std::io::{BufReader, BufWriter, Read as IoRead, Write as IoWrite};
use std::path::Path;

/// Uniform linear array: element count and spacing in wavelengths.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArrayGeometry<T> {
    pub elements: usize,
    /// Element spacing over wavelength (d̃/λ).
    pub spacing: T,
}

impl<T: Scalar> ArrayGeometry<T> {
    pub fn new(elements: usize, spacing: T) -> Self {
        assert!(elements >= 1, "array needs at least one element");
        assert!(spacing > T::zero(), "spacing must be positive");
        Self { elements, spacing }
    }

    /// Unit-norm steering vector: n-th entry `e^{j·2π·spacing·n·sin(φ)}/√N`.
    pub fn response(&self, phi: T) -> Vec<Complex<T>> {
        let n = self.elements;
        let norm = T::one() / T::lit(n as f64).sqrt();
        let step = T::TAU() * self.spacing * phi.sin();
        (0..n)
            .map(|idx| {
                let phase = step * T::lit(idx as f64);
                Complex::from_polar(norm, phase)
            })
            .collect()
    }
}

/// Gains and angle pairs for the scattering paths of one user's channel.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSet<T> {
    /// Complex path gains, CN(0,1) under the generator.
    pub gains: Vec<Complex<T>>,
    /// Angles of arrival in radians, `[0, 2π)`.
    pub aoa: Vec<T>,
    /// Angles of departure in radians, `[0, 2π)`.
    pub aod: Vec<T>,
}

impl<T: Scalar> PathSet<T> {
    /// Draws `count` paths: gains first, then arrival angles, then departure
    /// angles, so the RNG consumption order is fixed.
    pub fn draw<R>(rng: &mut R, count: usize) -> Self
    where
        T: SampleUniform,
        StandardNormal: Distribution<T>,
        R: Rng + ?Sized,
    {
        assert!(count >= 1, "at least one path required");
        let scale = T::lit(0.5).sqrt();
        let gains = (0..count)
            .map(|_| {
                let re: T = rng.sample(StandardNormal);
                let im: T = rng.sample(StandardNormal);
                Complex::new(re * scale, im * scale)
            })
            .collect();
        let aoa = (0..count)
            .map(|_| rng.random_range(T::zero()..T::TAU()))
            .collect();
        let aod = (0..count)
            .map(|_| rng.random_range(T::zero()..T::TAU()))
            .collect();
        Self { gains, aoa, aod }
    }

    pub fn len(&self) -> usize {
        self.gains.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gains.is_empty()
    }

    /// Index of the strongest path (largest |gain|; ties keep the first).
    pub fn strongest(&self) -> usize {
        let mut best = 0;
        for i in 1..self.gains.len() {
            if self.gains[i].norm() > self.gains[best].norm() {
                best = i;
            }
        }
        best
    }
}

/// One user's channel matrix together with the paths that generated it.
#[derive(Debug, Clone, PartialEq)]
pub struct UserChannel<T> {
    /// Channel matrix, receive antennas × transmit antennas.
    pub matrix: ComplexMatrix<T>,
    pub paths: PathSet<T>,
}

/// All per-user channels of one Monte Carlo trial.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization<T> {
    pub seed: u64,
    pub users: Vec<UserChannel<T>>,
}

/// Assembles the path-sum channel matrix for given arrays and paths.
pub fn assemble_channel<T: Scalar>(
    paths: &PathSet<T>,
    tx: &ArrayGeometry<T>,
    rx: &ArrayGeometry<T>,
) -> ComplexMatrix<T> {
    let n = tx.elements;
    let m = rx.elements;
    let l = paths.len();
    let gain_scale = T::lit((n * m) as f64 / l as f64).sqrt();
    let mut h = ComplexMatrix::zeros(m, n);
    for ell in 0..l {
        let a_rx = rx.response(paths.aoa[ell]);
        let a_tx = tx.response(paths.aod[ell]);
        let alpha = paths.gains[ell].scale(gain_scale);
        for (j, tx_phase) in a_tx.iter().enumerate() {
            let w = alpha * tx_phase.conj();
            let col = h.col_mut(j);
            for (value, rx_phase) in col.iter_mut().zip(&a_rx) {
                *value += rx_phase * w;
            }
        }
    }
    h
}

/// Draws one channel realization for every user in the configuration.
///
/// A dedicated ChaCha8 generator is seeded from `seed`, so identical seeds
/// reproduce identical realizations; users are drawn in index order.
pub fn draw_channel<T>(cfg: &SystemConfig<T>, seed: u64) -> ChannelRealization<T>
where
    T: Scalar + SampleUniform,
    StandardNormal: Distribution<T>,
{
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tx = ArrayGeometry::new(cfg.tx_antennas, cfg.spacing);
    let rx = ArrayGeometry::new(cfg.rx_antennas, cfg.spacing);
    let users = (0..cfg.users)
        .map(|_| {
            let paths = PathSet::draw(&mut rng, cfg.paths);
            let matrix = assemble_channel(&paths, &tx, &rx);
            UserChannel { matrix, paths }
        })
        .collect();
    ChannelRealization { seed, users }
}

// ── dataset persistence ──────────────────────────────────────────────────────

const DATASET_MAGIC: &[u8; 8] = b"CHDATA01";
/// Format version accepted by `save_dataset` and `load_dataset`.
pub const DATASET_VERSION: u32 = 1;

/// Self-describing dataset header stored as JSON after the magic bytes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetHeader {
    pub version: u32,
    pub count: usize,
    pub users: usize,
    pub rx_antennas: usize,
    pub tx_antennas: usize,
    pub paths: usize,
    pub spacing: f64,
    pub master_seed: u64,
}

fn write_f64_pair<W: IoWrite>(w: &mut W, re: f64, im: f64) -> Result<()> {
    w.write_all(&re.to_le_bytes())?;
    w.write_all(&im.to_le_bytes())?;
    Ok(())
}

fn to_f64<T: Scalar>(x: T) -> f64 {
    x.to_f64().expect("scalar convertible to f64")
}

/// Saves realizations as a versioned binary file: magic, JSON header, then
/// little-endian interleaved real/imag 64-bit floats in a fixed field order.
pub fn save_dataset<T: Scalar>(
    path: &Path,
    header: &DatasetHeader,
    realizations: &[ChannelRealization<T>],
) -> Result<()> {
    if header.version != DATASET_VERSION {
        return Err(Error::Dataset(format!(
            "unsupported version {} (expected {DATASET_VERSION})",
            header.version
        )));
    }
    if header.count != realizations.len() {
        return Err(Error::Dataset(format!(
            "header count {} does not match {} realizations",
            header.count,
            realizations.len()
        )));
    }
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(DATASET_MAGIC)?;
    let header_json = serde_json::to_vec(header).expect("header serializes");
    w.write_all(&(header_json.len() as u64).to_le_bytes())?;
    w.write_all(&header_json)?;

    for real in realizations {
        if real.users.len() != header.users {
            return Err(Error::Dataset("user count mismatch in realization".into()));
        }
        w.write_all(&real.seed.to_le_bytes())?;
        for user in &real.users {
            let (m, n, l) = (header.rx_antennas, header.tx_antennas, header.paths);
            if user.matrix.rows() != m || user.matrix.cols() != n || user.paths.len() != l {
                return Err(Error::Dataset("dimension mismatch in realization".into()));
            }
            for g in &user.paths.gains {
                write_f64_pair(&mut w, to_f64(g.re), to_f64(g.im))?;
            }
            for &a in &user.paths.aoa {
                w.write_all(&to_f64(a).to_le_bytes())?;
            }
            for &a in &user.paths.aod {
                w.write_all(&to_f64(a).to_le_bytes())?;
            }
            for j in 0..n {
                for z in user.matrix.col(j) {
                    write_f64_pair(&mut w, to_f64(z.re), to_f64(z.im))?;
                }
            }
        }
    }
    w.flush()?;
    Ok(())
}

fn read_exact_or_malformed<R: IoRead>(r: &mut R, buf: &mut [u8], what: &str) -> Result<()> {
    r.read_exact(buf)
        .map_err(|_| Error::Dataset(format!("truncated file while reading {what}")))
}

fn read_f64<R: IoRead>(r: &mut R, what: &str) -> Result<f64> {
    let mut buf = [0u8; 8];
    read_exact_or_malformed(r, &mut buf, what)?;
    Ok(f64::from_le_bytes(buf))
}

/// Loads a dataset written by [`save_dataset`]; truncation or a header
/// mismatch yields a malformed-dataset error.
pub fn load_dataset(path: &Path) -> Result<(DatasetHeader, Vec<ChannelRealization<f64>>)> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 8];
    read_exact_or_malformed(&mut r, &mut magic, "magic bytes")?;
    if &magic != DATASET_MAGIC {
        return Err(Error::Dataset("bad magic bytes".into()));
    }
    let mut len_buf = [0u8; 8];
    read_exact_or_malformed(&mut r, &mut len_buf, "header length")?;
    let header_len = u64::from_le_bytes(len_buf) as usize;
    if header_len > 1 << 20 {
        return Err(Error::Dataset("implausible header length".into()));
    }
    let mut header_json = vec![0u8; header_len];
    read_exact_or_malformed(&mut r, &mut header_json, "header")?;
    let header: DatasetHeader = serde_json::from_slice(&header_json)
        .map_err(|e| Error::Dataset(format!("header parse failure: {e}")))?;
    if header.version != DATASET_VERSION {
        return Err(Error::Dataset(format!(
            "unsupported version {} (expected {DATASET_VERSION})",
            header.version
        )));
    }

    let (m, n, l) = (header.rx_antennas, header.tx_antennas, header.paths);
    let mut realizations = Vec::with_capacity(header.count);
    for _ in 0..header.count {
        let mut seed_buf = [0u8; 8];
        read_exact_or_malformed(&mut r, &mut seed_buf, "realization seed")?;
        let seed = u64::from_le_bytes(seed_buf);
        let mut users = Vec::with_capacity(header.users);
        for _ in 0..header.users {
            let mut gains = Vec::with_capacity(l);
            for _ in 0..l {
                let re = read_f64(&mut r, "path gain")?;
                let im = read_f64(&mut r, "path gain")?;
                gains.push(Complex::new(re, im));
            }
            let mut aoa = Vec::with_capacity(l);
            for _ in 0..l {
                aoa.push(read_f64(&mut r, "arrival angle")?);
            }
            let mut aod = Vec::with_capacity(l);
            for _ in 0..l {
                aod.push(read_f64(&mut r, "departure angle")?);
            }
            let mut matrix = ComplexMatrix::zeros(m, n);
            for j in 0..n {
                for i in 0..m {
                    let re = read_f64(&mut r, "channel entry")?;
                    let im = read_f64(&mut r, "channel entry")?;
                    matrix[(i, j)] = Complex::new(re, im);
                }
            }
            users.push(UserChannel {
                matrix,
                paths: PathSet { gains, aoa, aod },
            });
        }
        realizations.push(ChannelRealization { seed, users });
    }
    let mut trailing = [0u8; 1];
    if r.read(&mut trailing)? != 0 {
        return Err(Error::Dataset("trailing bytes after last realization".into()));
    }
    Ok((header, realizations))
}
