//! Parameter checkpoints.
//!
//! Layout: ASCII magic `PFT1`, then for each tensor until end of file: name
//! length (`u32`), UTF-8 name, rank (`u32`), dims (`u32` each) and the
//! values as `f64`, all little-endian.

use std::fs::File;
use std::io::{BufReader, BufWriter, ErrorKind, Read, Write};
use std::path::Path;

use crate::error::{NnError, Result};
use crate::layers::ParamStore;
use crate::tensor::Tensor;

pub const CHECKPOINT_MAGIC: &[u8; 4] = b"PFT1";

fn bad(msg: impl Into<String>) -> NnError {
    NnError::Checkpoint(msg.into())
}

fn u32_of(n: usize) -> Result<[u8; 4]> {
    u32::try_from(n)
        .map(u32::to_le_bytes)
        .map_err(|_| bad(format!("{n} does not fit in u32")))
}

pub fn encode_params(store: &ParamStore, mut out: impl Write) -> Result<()> {
    out.write_all(CHECKPOINT_MAGIC)?;
    for (name, t) in store.iter() {
        out.write_all(&u32_of(name.len())?)?;
        out.write_all(name.as_bytes())?;
        out.write_all(&u32_of(t.shape().len())?)?;
        for &d in t.shape() {
            out.write_all(&u32_of(d)?)?;
        }
        for v in t.data() {
            out.write_all(&v.to_le_bytes())?;
        }
    }
    Ok(())
}

fn read_u32(input: &mut impl Read) -> Result<u32> {
    let mut b = [0u8; 4];
    input.read_exact(&mut b).map_err(|e| match e.kind() {
        ErrorKind::UnexpectedEof => bad("truncated checkpoint"),
        _ => e.into(),
    })?;
    Ok(u32::from_le_bytes(b))
}

pub fn decode_params(mut input: impl Read) -> Result<ParamStore> {
    let mut magic = [0u8; 4];
    input
        .read_exact(&mut magic)
        .map_err(|_| bad("missing magic"))?;
    if &magic != CHECKPOINT_MAGIC {
        return Err(bad(format!("bad magic {magic:?}")));
    }
    let mut store = ParamStore::new();
    loop {
        let mut first = [0u8; 4];
        match input.read(&mut first[..1])? {
            0 => break,
            _ => input
                .read_exact(&mut first[1..])
                .map_err(|_| bad("truncated checkpoint"))?,
        }
        let name_len = u32::from_le_bytes(first) as usize;
        let mut name = vec![0u8; name_len];
        input.read_exact(&mut name).map_err(|_| bad("truncated name"))?;
        let name = String::from_utf8(name).map_err(|_| bad("name is not UTF-8"))?;
        let rank = read_u32(&mut input)? as usize;
        if rank == 0 || rank > 8 {
            return Err(bad(format!("tensor {name:?} has unsupported rank {rank}")));
        }
        let dims = (0..rank)
            .map(|_| read_u32(&mut input).map(|d| d as usize))
            .collect::<Result<Vec<_>>>()?;
        let n: usize = dims.iter().product();
        let mut raw = vec![0u8; n * 8];
        input
            .read_exact(&mut raw)
            .map_err(|_| bad(format!("truncated data for {name:?}")))?;
        let data = raw
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect();
        store.add(name, Tensor::new(&dims, data)?);
    }
    Ok(store)
}

pub fn save_params(path: impl AsRef<Path>, store: &ParamStore) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    encode_params(store, &mut out)?;
    out.flush()?;
    Ok(())
}

pub fn load_params(path: impl AsRef<Path>) -> Result<ParamStore> {
    decode_params(BufReader::new(File::open(path)?))
}
