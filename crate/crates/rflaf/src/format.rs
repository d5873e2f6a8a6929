//! On-disk formats.
//!
//! Binary files start with an 8-byte magic and a little-endian `u32` version;
//! all integers are `u64` and all reals `f64`, little-endian. Readers reject
//! truncated input, trailing bytes and inconsistent headers.
//!
//! Dataset (`RFLAFDS\0`, version 1):
//!
//! ```text
//! n d n_test seed | sigma spec_seed calib mc_samples b1[d] b2[d] | x[n·d] y[n] test_idx[n_test]
//! ```
//!
//! `sigma` is a `u8` tag (0..=2 for the built-in activations, 3 for a table
//! followed by its knot count and `(z, value)` pairs).
//!
//! Checkpoint (`RFLAFCK\0`, version 1):
//!
//! ```text
//! bank_seed d M N | support_lo support_hi width | w[M·d] a[N] v[M]
//! ```

use std::fs;
use std::path::Path;

use rflaf_core::basis::{build_grid, ActivationWeights};
use rflaf_core::data::{Dataset, PiecewiseLinear, Sigma, TargetSpec};
use rflaf_core::linalg::Matrix;
use rflaf_core::model::{FeatureBank, RflafModel};

use crate::error::{Error, Result};

pub const DATASET_MAGIC: [u8; 8] = *b"RFLAFDS\0";
pub const CHECKPOINT_MAGIC: [u8; 8] = *b"RFLAFCK\0";
pub const VERSION: u32 = 1;

#[derive(Default)]
struct Writer(Vec<u8>);

impl Writer {
    fn header(magic: [u8; 8]) -> Self {
        let mut w = Writer(magic.to_vec());
        w.0.extend_from_slice(&VERSION.to_le_bytes());
        w
    }

    fn u8(&mut self, v: u8) {
        self.0.push(v);
    }

    fn u64(&mut self, v: u64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }

    fn usize(&mut self, v: usize) {
        self.u64(v as u64);
    }

    fn f64(&mut self, v: f64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }

    fn f64s(&mut self, v: &[f64]) {
        v.iter().for_each(|&x| self.f64(x));
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn open(buf: &'a [u8], magic: [u8; 8], what: &str) -> Result<Self> {
        if buf.len() < 12 || buf[..8] != magic {
            return Err(Error::Format(format!("not a {what} file (bad magic)")));
        }
        let version = u32::from_le_bytes(buf[8..12].try_into().unwrap());
        if version != VERSION {
            return Err(Error::Format(format!("unsupported {what} version {version}")));
        }
        Ok(Reader { buf, pos: 12 })
    }

    fn take(&mut self, len: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(len)
            .filter(|&e| e <= self.buf.len())
            .ok_or_else(|| Error::Format(format!("truncated at byte {}", self.pos)))?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn usize(&mut self) -> Result<usize> {
        usize::try_from(self.u64()?).map_err(|_| Error::Format("count does not fit in memory".into()))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    /// Checks the remaining length before allocating so a corrupt count
    /// cannot trigger a huge allocation.
    fn f64s(&mut self, len: usize) -> Result<Vec<f64>> {
        let bytes = self.take(len.checked_mul(8).ok_or_else(|| Error::Format("length overflow".into()))?)?;
        Ok(bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect())
    }

    fn finish(self) -> Result<()> {
        if self.pos != self.buf.len() {
            return Err(Error::Format(format!("{} trailing bytes", self.buf.len() - self.pos)));
        }
        Ok(())
    }
}

fn checked_area(a: usize, b: usize) -> Result<usize> {
    a.checked_mul(b).ok_or_else(|| Error::Format("size overflow".into()))
}

fn write_sigma(w: &mut Writer, sigma: &Sigma) {
    match sigma {
        Sigma::S1 => w.u8(0),
        Sigma::S2 => w.u8(1),
        Sigma::S3 => w.u8(2),
        Sigma::Table(t) => {
            w.u8(3);
            w.usize(t.knots().len());
            for &(z, s) in t.knots() {
                w.f64(z);
                w.f64(s);
            }
        }
    }
}

fn read_sigma(r: &mut Reader) -> Result<Sigma> {
    Ok(match r.u8()? {
        0 => Sigma::S1,
        1 => Sigma::S2,
        2 => Sigma::S3,
        3 => {
            let k = r.usize()?;
            let flat = r.f64s(checked_area(k, 2)?)?;
            Sigma::Table(PiecewiseLinear::new(flat.chunks_exact(2).map(|c| (c[0], c[1])).collect())?)
        }
        tag => return Err(Error::Format(format!("unknown activation tag {tag}"))),
    })
}

pub fn encode_dataset(ds: &Dataset) -> Vec<u8> {
    let (n, d) = (ds.len(), ds.dim());
    let mut w = Writer::header(DATASET_MAGIC);
    w.usize(n);
    w.usize(d);
    w.usize(ds.test_idx.len());
    w.u64(ds.seed);
    write_sigma(&mut w, &ds.spec.sigma);
    w.u64(ds.spec.seed);
    w.f64(ds.spec.calib);
    w.usize(ds.spec.mc_samples);
    w.f64s(&ds.spec.b1);
    w.f64s(&ds.spec.b2);
    w.f64s(ds.x.as_slice());
    w.f64s(&ds.y);
    ds.test_idx.iter().for_each(|&i| w.usize(i));
    w.0
}

pub fn decode_dataset(buf: &[u8]) -> Result<Dataset> {
    let mut r = Reader::open(buf, DATASET_MAGIC, "dataset")?;
    let n = r.usize()?;
    let d = r.usize()?;
    let n_test = r.usize()?;
    if n_test > n {
        return Err(Error::Format(format!("test split {n_test} exceeds sample count {n}")));
    }
    let seed = r.u64()?;
    let sigma = read_sigma(&mut r)?;
    let spec_seed = r.u64()?;
    let calib = r.f64()?;
    let mc_samples = r.usize()?;
    let b1 = r.f64s(d)?;
    let b2 = r.f64s(d)?;
    let x = Matrix::from_vec(n, d, r.f64s(checked_area(n, d)?)?)?;
    let y = r.f64s(n)?;
    let mut test_idx = Vec::with_capacity(n_test);
    for _ in 0..n_test {
        test_idx.push(r.usize()?);
    }
    r.finish()?;

    let mut is_test = vec![false; n];
    for &i in &test_idx {
        if i >= n {
            return Err(Error::Format(format!("test index {i} out of range")));
        }
        is_test[i] = true;
    }
    let train_idx = (0..n).filter(|&i| !is_test[i]).collect();
    let spec = TargetSpec { sigma, b1, b2, calib, mc_samples, seed: spec_seed };
    Ok(Dataset::new(x, y, train_idx, test_idx, spec, seed)?)
}

pub fn save_dataset(ds: &Dataset, path: &Path) -> Result<()> {
    fs::write(path, encode_dataset(ds)).map_err(|e| Error::io(path, e))
}

pub fn load_dataset(path: &Path) -> Result<Dataset> {
    decode_dataset(&fs::read(path).map_err(|e| Error::io(path, e))?)
}

/// CSV with columns `x_1..x_d, y, split`, where `split` is `train` or `test`.
pub fn export_csv(ds: &Dataset, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header: Vec<String> = (1..=ds.dim()).map(|j| format!("x_{j}")).collect();
    header.push("y".into());
    header.push("split".into());
    w.write_record(&header)?;
    let mask = ds.test_mask();
    for (i, row) in ds.x.iter_rows().enumerate() {
        let mut rec: Vec<String> = row.iter().map(f64::to_string).collect();
        rec.push(ds.y[i].to_string());
        rec.push(if mask[i] { "test" } else { "train" }.into());
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn encode_checkpoint(model: &RflafModel) -> Vec<u8> {
    let bank = model.bank();
    let grid = model.grid();
    let (lo, hi) = grid.support();
    let mut w = Writer::header(CHECKPOINT_MAGIC);
    w.u64(bank.seed());
    w.usize(bank.dim());
    w.usize(bank.n_features());
    w.usize(grid.n_basis());
    w.f64(lo);
    w.f64(hi);
    w.f64(grid.width());
    w.f64s(bank.weights().as_slice());
    w.f64s(model.a().as_slice());
    w.f64s(model.v());
    w.0
}

pub fn decode_checkpoint(buf: &[u8]) -> Result<RflafModel> {
    let mut r = Reader::open(buf, CHECKPOINT_MAGIC, "checkpoint")?;
    let seed = r.u64()?;
    let d = r.usize()?;
    let m = r.usize()?;
    let n = r.usize()?;
    let lo = r.f64()?;
    let hi = r.f64()?;
    let width = r.f64()?;
    let weights = Matrix::from_vec(m, d, r.f64s(checked_area(m, d)?)?)?;
    let a = r.f64s(n)?;
    let v = r.f64s(m)?;
    r.finish()?;
    let bank = FeatureBank::from_weights(weights, seed)?;
    let grid = build_grid(lo, hi, n, width)?;
    Ok(RflafModel::new(bank, grid, ActivationWeights::new(a)?, v)?)
}

pub fn save_checkpoint(model: &RflafModel, path: &Path) -> Result<()> {
    fs::write(path, encode_checkpoint(model)).map_err(|e| Error::io(path, e))
}

pub fn load_checkpoint(path: &Path) -> Result<RflafModel> {
    decode_checkpoint(&fs::read(path).map_err(|e| Error::io(path, e))?)
}
