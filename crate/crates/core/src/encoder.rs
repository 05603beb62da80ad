//! Gray-coded uniformly-controlled-Ry data encoder and its decoder.
//!
//! Data layout is address-major: `data[i * n_data + j]` is the value stored
//! at address `i` on data qubit `j`. Address qubits come first
//! (`0..n_addr`, qubit 0 the most significant address bit), then the data
//! qubits.

use std::fmt::Write as _;

use log::warn;

use crate::circuit::{Circuit, CountsTable, Distribution, GateOp};
use crate::error::{Error, Result};

/// Classical data plus every intermediate angle needed to invert the
/// encoding.
#[derive(Debug, Clone, PartialEq)]
pub struct AnglePayload {
    pub data: Vec<f64>,
    pub n_addr: usize,
    pub n_data: usize,
    /// `arccos(data)`, same layout as `data`.
    pub raw_angles: Vec<f64>,
    /// Per data qubit, the rotation applied at each circuit step.
    pub final_angles: Vec<Vec<f64>>,
    /// How many inputs were clipped into `[-1, 1]`.
    pub clipped: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncoderLayout {
    pub address_qubits: Vec<usize>,
    pub data_qubits: Vec<usize>,
    pub gray_sequence: Vec<usize>,
    /// Control qubit of the CX closing step `k`.
    pub cx_control_schedule: Vec<usize>,
}

impl EncoderLayout {
    pub fn new(n_addr: usize, n_data: usize) -> Result<Self> {
        check_sizes(n_addr, n_data)?;
        let n = 1usize << n_addr;
        let gray_sequence: Vec<usize> = (0..n).map(gray_code).collect();
        let cx_control_schedule = (0..n)
            .map(|k| {
                let flip = gray_sequence[k] ^ gray_sequence[(k + 1) % n];
                n_addr - 1 - flip.trailing_zeros() as usize
            })
            .collect();
        Ok(EncoderLayout {
            address_qubits: (0..n_addr).collect(),
            data_qubits: (n_addr..n_addr + n_data).collect(),
            gray_sequence,
            cx_control_schedule,
        })
    }
}

fn check_sizes(n_addr: usize, n_data: usize) -> Result<()> {
    if n_addr == 0 || n_data == 0 {
        return Err(Error::Config(format!(
            "encoder needs at least one address and one data qubit (got {n_addr}, {n_data})"
        )));
    }
    if n_addr + n_data > 62 {
        return Err(Error::Config(format!(
            "{} qubits is beyond any encoder size",
            n_addr + n_data
        )));
    }
    Ok(())
}

fn butterfly(v: &mut [f64]) {
    let n = v.len();
    let mut h = 1;
    while h < n {
        for block in (0..n).step_by(2 * h) {
            for i in block..block + h {
                let (a, b) = (v[i], v[i + h]);
                v[i] = a + b;
                v[i + h] = a - b;
            }
        }
        h *= 2;
    }
}

fn check_pow2(n: usize) -> Result<()> {
    if n == 0 || !n.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(n));
    }
    Ok(())
}

/// Walsh-Hadamard transform carrying the full `1/N` factor.
pub fn fwht_scaled(v: &[f64]) -> Result<Vec<f64>> {
    check_pow2(v.len())?;
    let mut out = v.to_vec();
    butterfly(&mut out);
    let n = v.len() as f64;
    out.iter_mut().for_each(|x| *x /= n);
    Ok(out)
}

/// Unscaled butterfly; undoes [`fwht_scaled`].
pub fn fwht_inverse(v: &[f64]) -> Result<Vec<f64>> {
    check_pow2(v.len())?;
    let mut out = v.to_vec();
    butterfly(&mut out);
    Ok(out)
}

pub fn gray_code(i: usize) -> usize {
    i ^ (i >> 1)
}

/// Position of `i` in the gray sequence.
pub fn gray_inverse(g: usize) -> usize {
    let mut i = g;
    let mut shift = g >> 1;
    while shift != 0 {
        i ^= shift;
        shift >>= 1;
    }
    i
}

/// Gray code restricted to `n_addr` bits.
pub fn gray_code_checked(i: usize, n_addr: usize) -> Result<usize> {
    if i >> n_addr != 0 {
        return Err(Error::IndexOutOfRange {
            index: i,
            limit: 1 << n_addr,
        });
    }
    Ok(gray_code(i))
}

/// `out[k] = v[g(k)]`.
pub fn gray_permute(v: &[f64]) -> Result<Vec<f64>> {
    check_pow2(v.len())?;
    Ok((0..v.len()).map(|k| v[gray_code(k)]).collect())
}

/// `out[g(k)] = v[k]`.
pub fn gray_unpermute(v: &[f64]) -> Result<Vec<f64>> {
    check_pow2(v.len())?;
    let mut out = vec![0.0; v.len()];
    for (k, &x) in v.iter().enumerate() {
        out[gray_code(k)] = x;
    }
    Ok(out)
}

pub fn data_to_angles(data: &[f64], n_addr: usize, n_data: usize) -> Result<AnglePayload> {
    check_sizes(n_addr, n_data)?;
    let n = 1usize << n_addr;
    if data.len() != n * n_data {
        return Err(Error::DimensionMismatch {
            expected: n * n_data,
            found: data.len(),
        });
    }
    let mut clipped = 0;
    let mut clean = Vec::with_capacity(data.len());
    for &d in data {
        if !d.is_finite() {
            return Err(Error::Config(format!("non-finite data value {d}")));
        }
        if d.abs() > 1.0 {
            clipped += 1;
        }
        clean.push(d.clamp(-1.0, 1.0));
    }
    if clipped > 0 {
        warn!("clipped {clipped} data values into [-1, 1]");
    }
    let raw_angles: Vec<f64> = clean.iter().map(|d| d.acos()).collect();
    let final_angles = (0..n_data)
        .map(|j| {
            let column: Vec<f64> = (0..n).map(|i| raw_angles[i * n_data + j]).collect();
            gray_permute(&fwht_scaled(&column)?)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(AnglePayload {
        data: clean,
        n_addr,
        n_data,
        raw_angles,
        final_angles,
        clipped,
    })
}

/// Inverts the angle pipeline without any simulation.
pub fn angles_to_data(final_angles: &[Vec<f64>], n_addr: usize) -> Result<Vec<f64>> {
    let n = 1usize << n_addr;
    let n_data = final_angles.len();
    let mut data = vec![0.0; n * n_data];
    for (j, col) in final_angles.iter().enumerate() {
        if col.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: col.len(),
            });
        }
        let raw = fwht_inverse(&gray_unpermute(col)?)?;
        for (i, theta) in raw.into_iter().enumerate() {
            data[i * n_data + j] = theta.cos();
        }
    }
    Ok(data)
}

impl AnglePayload {
    fn validate(&self) -> Result<()> {
        check_sizes(self.n_addr, self.n_data)?;
        let n = 1usize << self.n_addr;
        if self.final_angles.len() != self.n_data || self.final_angles.iter().any(|c| c.len() != n)
        {
            return Err(Error::DimensionMismatch {
                expected: n * self.n_data,
                found: self.final_angles.iter().map(Vec::len).sum(),
            });
        }
        if self.final_angles.iter().flatten().any(|a| !a.is_finite()) {
            return Err(Error::Config("non-finite encoder angle".into()));
        }
        Ok(())
    }
}

/// Hadamards on the address register, then per data qubit the alternating
/// Ry / CX ladder, then terminal measurement of every qubit into the clbit
/// of the same index.
pub fn build_encoder_circuit(payload: &AnglePayload) -> Result<Circuit> {
    payload.validate()?;
    let layout = EncoderLayout::new(payload.n_addr, payload.n_data)?;
    let width = payload.n_addr + payload.n_data;
    let mut c = Circuit::new(width, width);
    for &q in &layout.address_qubits {
        c.push(GateOp::H(q))?;
    }
    for (j, &d) in layout.data_qubits.iter().enumerate() {
        for (k, &ctrl) in layout.cx_control_schedule.iter().enumerate() {
            c.push(GateOp::Ry(d, payload.final_angles[j][k]))?;
            c.push(GateOp::CX {
                control: ctrl,
                target: d,
            })?;
        }
    }
    c.measure_all(0)?;
    Ok(c)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Decoded {
    pub data: Vec<f64>,
    /// `(address, data qubit)` pairs with no `0` outcome; decoded as -1.
    pub saturated: Vec<(usize, usize)>,
}

/// Decodes integer counts (qubit 0 leftmost keys).
pub fn decode_counts(counts: &CountsTable, n_addr: usize, n_data: usize) -> Result<Decoded> {
    decode_weights(
        counts.counts.iter().map(|(k, &v)| (k.as_str(), v as f64)),
        n_addr,
        n_data,
    )
}

/// Decodes exact probabilities (qubit 0 leftmost keys).
pub fn decode_distribution(dist: &Distribution, n_addr: usize, n_data: usize) -> Result<Decoded> {
    decode_weights(dist.iter().map(|(k, &v)| (k.as_str(), v)), n_addr, n_data)
}

fn decode_weights<'a>(
    entries: impl Iterator<Item = (&'a str, f64)>,
    n_addr: usize,
    n_data: usize,
) -> Result<Decoded> {
    check_sizes(n_addr, n_data)?;
    let n = 1usize << n_addr;
    let width = n_addr + n_data;
    // Per address: total weight, and weight with each data bit set.
    let mut total = vec![0.0; n];
    let mut ones = vec![0.0; n * n_data];
    for (key, w) in entries {
        if key.len() != width || !key.bytes().all(|b| b == b'0' || b == b'1') {
            return Err(Error::MalformedBitstring(key.to_string()));
        }
        let w = w.max(0.0);
        let addr = usize::from_str_radix(&key[..n_addr], 2).expect("validated binary");
        total[addr] += w;
        for (j, b) in key[n_addr..].bytes().enumerate() {
            if b == b'1' {
                ones[addr * n_data + j] += w;
            }
        }
    }
    let mut data = vec![0.0; n * n_data];
    let mut saturated = Vec::new();
    for i in 0..n {
        if total[i] <= 0.0 {
            return Err(Error::EmptyAddress(i));
        }
        for j in 0..n_data {
            let p1 = (ones[i * n_data + j] / total[i]).clamp(0.0, 1.0);
            let p0 = 1.0 - p1;
            if p0 <= 0.0 {
                saturated.push((i, j));
            }
            let theta = 2.0 * p1.sqrt().atan2(p0.sqrt());
            data[i * n_data + j] = theta.cos();
        }
    }
    Ok(Decoded { data, saturated })
}

/// One value per line; blank lines and `#` comments are skipped.
pub fn parse_data_csv(text: &str) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let first = t.split(',').next().unwrap_or(t).trim();
        let v: f64 = first.parse().map_err(|_| Error::Parse {
            line: i + 1,
            msg: format!("not a number: `{first}`"),
        })?;
        out.push(v);
    }
    Ok(out)
}

pub fn data_to_csv(data: &[f64]) -> String {
    let mut out = String::new();
    for v in data {
        let _ = writeln!(out, "{v:.17e}");
    }
    out
}

/// `data_qubit,step,gray_index,angle`.
pub fn angles_to_csv(payload: &AnglePayload) -> String {
    let mut out = String::from("data_qubit,step,gray_index,angle\n");
    for (j, col) in payload.final_angles.iter().enumerate() {
        for (k, a) in col.iter().enumerate() {
            let _ = writeln!(out, "{j},{k},{},{a:.17e}", gray_code(k));
        }
    }
    out
}
