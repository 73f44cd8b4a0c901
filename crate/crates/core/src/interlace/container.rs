//! Binary sample container.
//!
//! Layout (little-endian):
//!
//! ```text
//! b"RILS"
//! u32          header length H
//! [u8; H]      JSON header
//! u64          occupancy byte length B
//! [u8; B]      occupancy bits, site i at byte i/8, bit i%8
//! u64          edge count E
//! E × (u32 a, u32 b)   site indices, a < b
//! ```

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::{EdgeSet, InterlacementSample};
use crate::bitset::Bitset;
use crate::error::{Error, Result};
use crate::lattice::BoxIndexer;

pub const MAGIC: &[u8; 4] = b"RILS";
pub const FORMAT_VERSION: u32 = 1;
/// Windows above this many sites are refused by [`dump_json`].
pub const DUMP_MAX_SITES: usize = 1 << 16;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleHeader {
    pub format_version: u32,
    pub d: usize,
    #[serde(rename = "N")]
    pub n: u32,
    pub u: f64,
    pub seed: u64,
    pub stream_index: u64,
    #[serde(rename = "N_K")]
    pub n_k: u64,
    pub bias_delta: f64,
}

/// Decoded container contents.
#[derive(Clone, Debug, PartialEq)]
pub struct StoredSample {
    pub header: SampleHeader,
    pub occupancy: Bitset,
    pub edges: EdgeSet,
}

impl StoredSample {
    pub fn from_sample(sample: &InterlacementSample, seed: u64, stream_index: u64) -> Self {
        StoredSample {
            header: SampleHeader {
                format_version: FORMAT_VERSION,
                d: sample.window.dim,
                n: sample.window.radius,
                u: sample.u,
                seed,
                stream_index,
                n_k: sample.n_k,
                bias_delta: sample.window.bias,
            },
            occupancy: sample.occupancy.clone(),
            edges: sample.edges.clone(),
        }
    }

    fn indexer(&self) -> BoxIndexer {
        BoxIndexer::new(self.header.d, self.header.n)
    }

    /// Edge list as `(a, b)` with `a < b`, sorted.
    pub fn edge_pairs(&self) -> Vec<(u32, u32)> {
        let ix = self.indexer();
        self.edges.iter().map(|(a, k)| (a as u32, (a + ix.strides()[k]) as u32)).collect()
    }
}

pub fn write_container<W: Write>(w: &mut W, s: &StoredSample) -> Result<()> {
    let header = serde_json::to_vec(&s.header)?;
    w.write_all(MAGIC)?;
    w.write_all(&(header.len() as u32).to_le_bytes())?;
    w.write_all(&header)?;
    let occ = s.occupancy.to_bytes();
    w.write_all(&(occ.len() as u64).to_le_bytes())?;
    w.write_all(&occ)?;
    let pairs = s.edge_pairs();
    w.write_all(&(pairs.len() as u64).to_le_bytes())?;
    for (a, b) in pairs {
        w.write_all(&a.to_le_bytes())?;
        w.write_all(&b.to_le_bytes())?;
    }
    Ok(())
}

fn read_exact<R: Read>(r: &mut R, n: usize) -> Result<Vec<u8>> {
    let mut buf = vec![0u8; n];
    r.read_exact(&mut buf).map_err(|e| Error::Format(format!("truncated container: {e}")))?;
    Ok(buf)
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    Ok(u32::from_le_bytes(read_exact(r, 4)?.try_into().expect("4 bytes")))
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    Ok(u64::from_le_bytes(read_exact(r, 8)?.try_into().expect("8 bytes")))
}

pub fn read_container<R: Read>(r: &mut R) -> Result<StoredSample> {
    if read_exact(r, 4)? != MAGIC {
        return Err(Error::Format("not a sample container (bad magic)".into()));
    }
    let hlen = read_u32(r)? as usize;
    let header: SampleHeader =
        serde_json::from_slice(&read_exact(r, hlen)?).map_err(|e| Error::Format(format!("container header: {e}")))?;
    if header.format_version != FORMAT_VERSION {
        return Err(Error::Format(format!("container format {} (expected {FORMAT_VERSION})", header.format_version)));
    }
    if header.d == 0 || header.d > 32 {
        return Err(Error::Format(format!("dimension {} out of range", header.d)));
    }
    let ix = BoxIndexer::new(header.d, header.n);
    let olen = read_u64(r)? as usize;
    if olen != ix.len().div_ceil(8) {
        return Err(Error::Format(format!("occupancy of {olen} bytes for {} sites", ix.len())));
    }
    let occupancy = Bitset::from_bytes(ix.len(), &read_exact(r, olen)?)?;
    let ne = read_u64(r)? as usize;
    let mut edges = EdgeSet::new(header.d, ix.len());
    for _ in 0..ne {
        let a = read_u32(r)? as usize;
        let b = read_u32(r)? as usize;
        if a >= b || b >= ix.len() {
            return Err(Error::Format(format!("bad edge ({a}, {b})")));
        }
        let axis = ix
            .strides()
            .iter()
            .position(|&s| s == b - a)
            .ok_or_else(|| Error::Format(format!("({a}, {b}) is not a lattice edge")))?;
        let mut ca = vec![0i32; header.d];
        let mut cb = vec![0i32; header.d];
        ix.coords_of(a, &mut ca);
        ix.coords_of(b, &mut cb);
        if (0..header.d).any(|k| k != axis && ca[k] != cb[k]) {
            return Err(Error::Format(format!("({a}, {b}) is not a lattice edge")));
        }
        edges.insert(a, axis);
    }
    Ok(StoredSample { header, occupancy, edges })
}

#[derive(Serialize)]
struct Dump {
    header: SampleHeader,
    occupied: Vec<Vec<i32>>,
    edges: Vec<[Vec<i32>; 2]>,
}

/// Plain JSON rendering of a stored sample.
pub fn dump_json(s: &StoredSample) -> Result<String> {
    let ix = s.indexer();
    if ix.len() > DUMP_MAX_SITES {
        return Err(Error::Guard(format!("window of {} sites too large to dump (limit {DUMP_MAX_SITES})", ix.len())));
    }
    let occupied = s.occupancy.iter_ones().map(|i| ix.point_of(i).into_coords()).collect();
    let edges = s
        .edge_pairs()
        .into_iter()
        .map(|(a, b)| [ix.point_of(a as usize).into_coords(), ix.point_of(b as usize).into_coords()])
        .collect();
    Ok(serde_json::to_string_pretty(&Dump { header: s.header.clone(), occupied, edges })?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interlace::{sample_interlacement, ForwardPolicy, SampleOptions, WindowKernel};
    use crate::rng::stream_rng;

    #[test]
    fn roundtrip() {
        let k = WindowKernel::new(3, 2, ForwardPolicy::Exact, 1e-10).unwrap();
        let s = sample_interlacement(&k, 2.0, &mut stream_rng(4, 9), SampleOptions::default()).unwrap();
        let stored = StoredSample::from_sample(&s, 4, 9);
        let mut buf = Vec::new();
        write_container(&mut buf, &stored).unwrap();
        let back = read_container(&mut buf.as_slice()).unwrap();
        assert_eq!(back, stored);
        assert_eq!(back.edges, s.edges);
        let json = dump_json(&back).unwrap();
        assert!(json.contains("\"N_K\""));
    }

    #[test]
    fn rejects_corruption() {
        assert!(matches!(read_container(&mut &b"XXXX"[..]), Err(Error::Format(_))));
        let k = WindowKernel::new(3, 1, ForwardPolicy::Exact, 1e-10).unwrap();
        let s = sample_interlacement(&k, 1.0, &mut stream_rng(1, 0), SampleOptions::default()).unwrap();
        let mut buf = Vec::new();
        write_container(&mut buf, &StoredSample::from_sample(&s, 1, 0)).unwrap();
        buf.truncate(buf.len() - 1);
        assert!(read_container(&mut buf.as_slice()).is_err());
    }
}
