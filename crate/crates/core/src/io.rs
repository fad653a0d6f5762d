//! Binary plan and coefficient files.
//!
//! All integers and floats are little-endian. Plan files end with a CRC32 of every preceding
//! byte and carry a CRC32 after each node record.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::skeleton::{build_plan, BlockSize, CoefficientBlock, Layout, NodeData, TransformPlan};
use crate::special::GeometryKind;

pub const PLAN_MAGIC: &[u8; 8] = b"HPTPLAN1";
pub const PLAN_VERSION: u32 = 1;
pub const COEFF_MAGIC: &[u8; 4] = b"HPC1";
pub const COEFF_VERSION: u32 = 1;

const PAYLOAD_DENSE: u8 = 0;

#[derive(Default)]
struct Encoder {
    buf: Vec<u8>,
}

impl Encoder {
    fn bytes(&mut self, b: &[u8]) {
        self.buf.extend_from_slice(b);
    }
    fn u8(&mut self, v: u8) {
        self.buf.push(v);
    }
    fn u32(&mut self, v: u32) {
        self.bytes(&v.to_le_bytes());
    }
    fn u64(&mut self, v: u64) {
        self.bytes(&v.to_le_bytes());
    }
    fn f64s(&mut self, v: &[f64]) {
        self.buf.reserve(8 * v.len());
        for x in v {
            self.bytes(&x.to_le_bytes());
        }
    }
}

struct Decoder<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Decoder<'a> {
    fn new(buf: &'a [u8]) -> Self {
        Self { buf, pos: 0 }
    }

    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.buf.len()).ok_or_else(|| {
            Error::Corrupt(format!("truncated input while reading {what} at byte {}", self.pos))
        })?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u8(&mut self, what: &str) -> Result<u8> {
        Ok(self.take(1, what)?[0])
    }
    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }
    fn u64(&mut self, what: &str) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }
    fn usize(&mut self, what: &str) -> Result<usize> {
        let v = self.u64(what)?;
        usize::try_from(v).map_err(|_| Error::Corrupt(format!("{what} = {v} does not fit in memory")))
    }
    fn f64s(&mut self, n: usize, what: &str) -> Result<Vec<f64>> {
        let len = n.checked_mul(8).ok_or_else(|| Error::Corrupt(format!("{what} length overflows")))?;
        let raw = self.take(len, what)?;
        Ok(raw.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect())
    }
}

fn to_u32(v: usize, what: &str) -> Result<u32> {
    u32::try_from(v).map_err(|_| Error::InvalidParameter(format!("{what} = {v} exceeds the 32-bit field")))
}

/// Encodes a precomputed plan.
pub fn plan_to_bytes(plan: &TransformPlan<f64>) -> Result<Vec<u8>> {
    if !plan.is_precomputed() {
        return Err(Error::InvalidParameter("only precomputed plans can be serialized".into()));
    }
    let mut e = Encoder::default();
    e.bytes(PLAN_MAGIC);
    e.u32(PLAN_VERSION);
    e.u8(plan.layout().tag());
    e.bytes(&[0; 3]);
    e.u64(plan.degree() as u64);
    e.u64(plan.block() as u64);
    e.u64(plan.nodes().len() as u64);
    if let GeometryKind::Triangle { alpha, beta, gamma } = *plan.kind() {
        e.f64s(&[alpha, beta, gamma]);
    }
    for node in plan.nodes() {
        let start = e.buf.len();
        let data = node.data.as_ref().expect("precomputed");
        e.u32(node.level);
        e.u32(to_u32(node.source, "source order")?);
        e.u32(to_u32(node.target, "target order")?);
        e.u64(node.section as u64);
        e.u64(node.buffer as u64);
        e.u32(to_u32(data.eigenvalues.len(), "eigenvalue count")?);
        e.f64s(&data.eigenvalues);
        e.u8(PAYLOAD_DENSE);
        e.u32(to_u32(data.u.rows(), "payload rows")?);
        e.u32(to_u32(data.u.cols(), "payload columns")?);
        e.u32(to_u32(8 * data.u.as_slice().len(), "payload length")?);
        e.f64s(data.u.as_slice());
        let crc = crc32fast::hash(&e.buf[start..]);
        e.u32(crc);
    }
    let crc = crc32fast::hash(&e.buf);
    e.u32(crc);
    Ok(e.buf)
}

/// Decodes a plan; any inconsistency or checksum failure is an error.
pub fn plan_from_bytes(bytes: &[u8]) -> Result<TransformPlan<f64>> {
    if bytes.len() < PLAN_MAGIC.len() || &bytes[..PLAN_MAGIC.len()] != PLAN_MAGIC {
        return Err(Error::Corrupt("not a plan file (bad magic)".into()));
    }
    if bytes.len() < PLAN_MAGIC.len() + 4 {
        return Err(Error::Corrupt("truncated input while reading format version".into()));
    }
    let (body, trailer) = bytes.split_at(bytes.len() - 4);
    let mut d = Decoder::new(body);
    d.take(PLAN_MAGIC.len(), "magic")?;
    let version = d.u32("format version")?;
    if version != PLAN_VERSION {
        return Err(Error::Corrupt(format!("unsupported plan format version {version}")));
    }
    let stored = u32::from_le_bytes(trailer.try_into().unwrap());
    if crc32fast::hash(body) != stored {
        return Err(Error::Corrupt("plan file checksum mismatch".into()));
    }
    let layout = Layout::from_tag(d.u8("geometry kind")?)?;
    d.take(3, "reserved bytes")?;
    let degree = d.usize("degree")?;
    let block = d.usize("block size")?;
    let count = d.usize("node count")?;
    let kind = match layout {
        Layout::Sphere => GeometryKind::Sphere,
        Layout::Disk => GeometryKind::Disk,
        Layout::Triangle => {
            let p = d.f64s(3, "triangle parameters")?;
            GeometryKind::triangle(p[0], p[1], p[2])?
        }
    };
    let mut plan = build_plan(kind, degree, BlockSize::Fixed(block)).map_err(|e| Error::Corrupt(e.to_string()))?;
    if plan.nodes().len() != count {
        return Err(Error::Corrupt(format!("node count {count} disagrees with the plan structure ({})", plan.nodes().len())));
    }
    for index in 0..count {
        let start = d.pos;
        let level = d.u32("node level")?;
        let source = d.u32("node source")? as usize;
        let target = d.u32("node target")? as usize;
        let section = d.usize("node section")?;
        let buffer = d.usize("node buffer")?;
        let expected = &plan.nodes()[index];
        if (level, source, target, section) != (expected.level, expected.source, expected.target, expected.section) {
            return Err(Error::Corrupt(format!("node {index} header disagrees with the plan structure")));
        }
        let neig = d.u32("eigenvalue count")? as usize;
        let eigenvalues = d.f64s(neig, "eigenvalues")?;
        let tag = d.u8("payload tag")?;
        if tag != PAYLOAD_DENSE {
            return Err(Error::Corrupt(format!("node {index} has unknown payload tag {tag}")));
        }
        let rows = d.u32("payload rows")? as usize;
        let cols = d.u32("payload columns")? as usize;
        let len = d.u32("payload length")? as usize;
        if rows.checked_mul(cols).and_then(|x| x.checked_mul(8)) != Some(len) {
            return Err(Error::Corrupt(format!("node {index} payload length {len} does not match {rows}x{cols}")));
        }
        let values = d.f64s(rows * cols, "payload")?;
        let crc = crc32fast::hash(&body[start..d.pos]);
        if d.u32("node checksum")? != crc {
            return Err(Error::Corrupt(format!("node {index} checksum mismatch")));
        }
        let u = DenseMatrix::from_col_major(rows, cols, values)?;
        plan.set_node_data(index, buffer, NodeData { eigenvalues, u, diagnostics: None })?;
    }
    if d.pos != body.len() {
        return Err(Error::Corrupt(format!("{} trailing bytes after the last node", body.len() - d.pos)));
    }
    Ok(plan)
}

pub fn write_plan<W: Write>(plan: &TransformPlan<f64>, mut sink: W) -> Result<()> {
    sink.write_all(&plan_to_bytes(plan)?)?;
    sink.flush()?;
    Ok(())
}

pub fn read_plan<R: Read>(mut source: R) -> Result<TransformPlan<f64>> {
    let mut bytes = Vec::new();
    source.read_to_end(&mut bytes)?;
    plan_from_bytes(&bytes)
}

pub fn coefficients_to_bytes(block: &CoefficientBlock<f64>) -> Vec<u8> {
    let mut e = Encoder::default();
    e.bytes(COEFF_MAGIC);
    e.u32(COEFF_VERSION);
    e.u8(block.layout().tag());
    e.u64(block.degree() as u64);
    e.f64s(block.matrix().as_slice());
    e.buf
}

pub fn coefficients_from_bytes(bytes: &[u8]) -> Result<CoefficientBlock<f64>> {
    let mut d = Decoder::new(bytes);
    if d.take(COEFF_MAGIC.len(), "magic")? != COEFF_MAGIC {
        return Err(Error::Corrupt("not a coefficient file (bad magic)".into()));
    }
    let version = d.u32("format version")?;
    if version != COEFF_VERSION {
        return Err(Error::Corrupt(format!("unsupported coefficient format version {version}")));
    }
    let layout = Layout::from_tag(d.u8("geometry kind")?)?;
    let degree = d.usize("degree")?;
    let rows = degree.checked_add(1).ok_or_else(|| Error::Corrupt("degree overflows".into()))?;
    let cols = layout.columns(degree);
    let values = d.f64s(rows.saturating_mul(cols), "coefficients")?;
    if d.pos != bytes.len() {
        return Err(Error::Corrupt(format!("{} trailing bytes after the coefficients", bytes.len() - d.pos)));
    }
    CoefficientBlock::from_matrix(layout, degree, DenseMatrix::from_col_major(rows, cols, values)?)
}

pub fn write_coefficients<W: Write>(block: &CoefficientBlock<f64>, mut sink: W) -> Result<()> {
    sink.write_all(&coefficients_to_bytes(block))?;
    sink.flush()?;
    Ok(())
}

pub fn read_coefficients<R: Read>(mut source: R) -> Result<CoefficientBlock<f64>> {
    let mut bytes = Vec::new();
    source.read_to_end(&mut bytes)?;
    coefficients_from_bytes(&bytes)
}
