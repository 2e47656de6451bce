//! Binary realization dump.
//!
//! Layout, all integers and floats little-endian:
//!
//! ```text
//! magic   8 bytes  "CMFTREE\0"
//! version u32      1
//! base    u32      b
//! depth   u32      N
//! seed    u64
//! records          one per internal node (levels 0..N-1) in depth-first
//!                  preorder, children visited by increasing digit; each
//!                  record is b triples (re W_i, im W_i, L_i) of f64
//! ```

use std::io::{Read, Write};

use num_complex::Complex64;

use super::{cells, CascadeRealization};
use crate::error::{Error, Result};
use crate::weights::WeightModel;

pub const DUMP_MAGIC: &[u8; 8] = b"CMFTREE\0";
pub const DUMP_VERSION: u32 = 1;

pub fn write_dump<W: Write>(real: &CascadeRealization, out: &mut W) -> Result<()> {
    out.write_all(DUMP_MAGIC)?;
    out.write_all(&DUMP_VERSION.to_le_bytes())?;
    out.write_all(&(real.base() as u32).to_le_bytes())?;
    out.write_all(&(real.depth() as u32).to_le_bytes())?;
    out.write_all(&real.seed().to_le_bytes())?;
    let mut stack = vec![(0usize, 0u64)];
    let b = real.base() as u64;
    let mut buf = Vec::with_capacity(24 * real.base());
    while let Some((level, index)) = stack.pop() {
        let (w, l) = real.node_weights(level, index);
        buf.clear();
        for (z, x) in w.iter().zip(l) {
            buf.extend_from_slice(&z.re.to_le_bytes());
            buf.extend_from_slice(&z.im.to_le_bytes());
            buf.extend_from_slice(&x.to_le_bytes());
        }
        out.write_all(&buf)?;
        if level + 1 < real.depth() {
            for d in (0..b).rev() {
                stack.push((level + 1, index * b + d));
            }
        }
    }
    Ok(())
}

/// Read a dump; the weight law is not stored and must be supplied.
pub fn read_dump<R: Read>(input: &mut R, model: &WeightModel) -> Result<CascadeRealization> {
    let mut magic = [0u8; 8];
    input.read_exact(&mut magic)?;
    if &magic != DUMP_MAGIC {
        return Err(Error::Dump("bad magic".into()));
    }
    let version = read_u32(input)?;
    if version != DUMP_VERSION {
        return Err(Error::Dump(format!("unsupported version {version}")));
    }
    let b = read_u32(input)? as usize;
    let depth = read_u32(input)? as usize;
    let mut seed = [0u8; 8];
    input.read_exact(&mut seed)?;
    let seed = u64::from_le_bytes(seed);
    if b != model.base {
        return Err(Error::Dump(format!("dump base {b} differs from model base {}", model.base)));
    }
    if depth == 0 || cells(b, depth) > super::DEFAULT_NODE_BUDGET as u128 {
        return Err(Error::Dump(format!("depth {depth} out of range")));
    }
    let mut w: Vec<Vec<Complex64>> =
        (0..depth).map(|k| vec![Complex64::new(0.0, 0.0); cells(b, k + 1) as usize]).collect();
    let mut l: Vec<Vec<f64>> = (0..depth).map(|k| vec![0.0; cells(b, k + 1) as usize]).collect();
    let mut stack = vec![(0usize, 0u64)];
    let mut rec = vec![0u8; 24 * b];
    while let Some((level, index)) = stack.pop() {
        input.read_exact(&mut rec)?;
        for i in 0..b {
            let f = |k: usize| f64::from_le_bytes(rec[24 * i + 8 * k..24 * i + 8 * k + 8].try_into().unwrap());
            let pos = index as usize * b + i;
            w[level][pos] = Complex64::new(f(0), f(1));
            l[level][pos] = f(2);
        }
        if level + 1 < depth {
            for d in (0..b as u64).rev() {
                stack.push((level + 1, index * b as u64 + d));
            }
        }
    }
    CascadeRealization::from_parts(model.clone(), seed, w, l)
}

fn read_u32<R: Read>(input: &mut R) -> Result<u32> {
    let mut x = [0u8; 4];
    input.read_exact(&mut x)?;
    Ok(u32::from_le_bytes(x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cascade::sample_tree;
    use crate::weights::presets;

    #[test]
    fn round_trip() {
        let m = presets::uniform_phase();
        let r = sample_tree(&m, 6, 123).unwrap();
        let mut bytes = Vec::new();
        write_dump(&r, &mut bytes).unwrap();
        assert_eq!(bytes.len(), 28 + 63 * 2 * 24);
        let back = read_dump(&mut bytes.as_slice(), &m).unwrap();
        assert_eq!(back.seed(), 123);
        for k in 0..6 {
            assert_eq!(back.level_w(k), r.level_w(k));
            assert_eq!(back.level_l(k), r.level_l(k));
        }
    }

    #[test]
    fn depth_first_order() {
        // node "1" comes after the whole subtree of "0"
        let m = presets::beta_bell();
        let r = sample_tree(&m, 3, 5).unwrap();
        let mut bytes = Vec::new();
        write_dump(&r, &mut bytes).unwrap();
        let record = |k: usize| f64::from_le_bytes(bytes[28 + 48 * k..28 + 48 * k + 8].try_into().unwrap());
        // preorder: root, 0, 00, 01, 1, 10, 11
        assert_eq!(record(1), r.node_weights(1, 0).0[0].re);
        assert_eq!(record(3), r.node_weights(2, 1).0[0].re);
        assert_eq!(record(4), r.node_weights(1, 1).0[0].re);
    }

    #[test]
    fn rejects_bad_header() {
        let m = presets::beta_bell();
        assert!(read_dump(&mut &b"NOTADUMP0000"[..], &m).is_err());
        let r = sample_tree(&m, 2, 5).unwrap();
        let mut bytes = Vec::new();
        write_dump(&r, &mut bytes).unwrap();
        assert!(read_dump(&mut bytes.as_slice(), &presets::critical_ternary()).is_err());
        bytes.truncate(bytes.len() - 1);
        assert!(read_dump(&mut bytes.as_slice(), &m).is_err());
    }
}
