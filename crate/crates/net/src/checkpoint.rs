//! Versioned binary checkpoints: a header, then every named tensor as
//! (name, shape, little-endian 32-bit reals). Saving a loaded checkpoint
//! reproduces the file byte for byte.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::Path;

use ndarray::{ArrayD, IxDyn};

use crate::config::NetConfig;
use crate::elem::Elem;
use crate::network::Network;
use crate::optim::{OptState, OptimizerKind};
use crate::params::Params;
use crate::NetError;

pub const CHECKPOINT_VERSION: u32 = 1;
const MAGIC: &[u8; 4] = b"MPGO";

#[derive(Debug, Clone)]
pub struct Checkpoint<T: Elem> {
    pub iteration: u64,
    pub network: Network<T>,
    pub opt_state: OptState<T>,
}

fn write_tensor<T: Elem, W: Write>(w: &mut W, name: &str, tensor: &ArrayD<T>) -> io::Result<()> {
    let name_bytes = name.as_bytes();
    w.write_all(&(name_bytes.len() as u16).to_le_bytes())?;
    w.write_all(name_bytes)?;
    w.write_all(&[tensor.ndim() as u8])?;
    for &d in tensor.shape() {
        w.write_all(&(d as u32).to_le_bytes())?;
    }
    for v in tensor.iter() {
        w.write_all(&(v.as_f64() as f32).to_le_bytes())?;
    }
    Ok(())
}

fn read_tensor<T: Elem, R: Read>(r: &mut R) -> Result<(String, ArrayD<T>), NetError> {
    let mut len = [0u8; 2];
    read_all(r, &mut len)?;
    let mut name = vec![0u8; u16::from_le_bytes(len) as usize];
    read_all(r, &mut name)?;
    let name = String::from_utf8(name)
        .map_err(|_| NetError::CorruptCheckpoint("tensor name is not utf-8".into()))?;
    let mut ndim = [0u8; 1];
    read_all(r, &mut ndim)?;
    let mut shape = Vec::with_capacity(ndim[0] as usize);
    for _ in 0..ndim[0] {
        let mut d = [0u8; 4];
        read_all(r, &mut d)?;
        shape.push(u32::from_le_bytes(d) as usize);
    }
    let n: usize = shape.iter().product();
    let mut data = Vec::with_capacity(n);
    for _ in 0..n {
        let mut v = [0u8; 4];
        read_all(r, &mut v)?;
        data.push(T::from_f64(f32::from_le_bytes(v) as f64));
    }
    let tensor = ArrayD::from_shape_vec(IxDyn(&shape), data)
        .map_err(|e| NetError::CorruptCheckpoint(format!("tensor {name}: {e}")))?;
    Ok((name, tensor))
}

fn read_all<R: Read>(r: &mut R, buf: &mut [u8]) -> Result<(), NetError> {
    r.read_exact(buf).map_err(|e| {
        if e.kind() == io::ErrorKind::UnexpectedEof {
            NetError::CorruptCheckpoint("file truncated".into())
        } else {
            NetError::Io(e)
        }
    })
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32, NetError> {
    let mut b = [0u8; 4];
    read_all(r, &mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64, NetError> {
    let mut b = [0u8; 8];
    read_all(r, &mut b)?;
    Ok(u64::from_le_bytes(b))
}

pub fn save_checkpoint<T: Elem, P: AsRef<Path>>(
    path: P,
    checkpoint: &Checkpoint<T>,
) -> Result<(), NetError> {
    let mut w = BufWriter::new(File::create(path)?);
    let cfg = &checkpoint.network.config;
    w.write_all(MAGIC)?;
    w.write_all(&CHECKPOINT_VERSION.to_le_bytes())?;
    w.write_all(&checkpoint.iteration.to_le_bytes())?;
    for d in [cfg.size, cfg.players, cfg.blocks, cfg.filters, cfg.value_hidden] {
        w.write_all(&(d as u32).to_le_bytes())?;
    }
    w.write_all(&cfg.l2.to_le_bytes())?;
    let kind = match checkpoint.opt_state.kind {
        OptimizerKind::Sgd => 0u8,
        OptimizerKind::Adam => 1u8,
    };
    w.write_all(&[kind])?;
    w.write_all(&checkpoint.opt_state.step.to_le_bytes())?;

    let params = &checkpoint.network.params;
    w.write_all(&(params.len() as u32).to_le_bytes())?;
    for i in 0..params.len() {
        write_tensor(&mut w, &params.meta(i).name, params.tensor(i))?;
    }
    if checkpoint.opt_state.kind == OptimizerKind::Adam {
        for (slot, tensors) in [("m", &checkpoint.opt_state.m), ("v", &checkpoint.opt_state.v)] {
            for (i, t) in tensors.iter().enumerate() {
                write_tensor(&mut w, &format!("opt.{slot}.{}", params.meta(i).name), t)?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

pub fn load_checkpoint<T: Elem, P: AsRef<Path>>(path: P) -> Result<Checkpoint<T>, NetError> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 4];
    read_all(&mut r, &mut magic)?;
    if &magic != MAGIC {
        return Err(NetError::CorruptCheckpoint("bad magic".into()));
    }
    let version = read_u32(&mut r)?;
    if version != CHECKPOINT_VERSION {
        return Err(NetError::UnsupportedVersion {
            found: version,
            supported: CHECKPOINT_VERSION,
        });
    }
    let iteration = read_u64(&mut r)?;
    let config = NetConfig {
        size: read_u32(&mut r)? as usize,
        players: read_u32(&mut r)? as usize,
        blocks: read_u32(&mut r)? as usize,
        filters: read_u32(&mut r)? as usize,
        value_hidden: read_u32(&mut r)? as usize,
        l2: {
            let mut b = [0u8; 8];
            read_all(&mut r, &mut b)?;
            f64::from_le_bytes(b)
        },
    };
    let mut kind_byte = [0u8; 1];
    read_all(&mut r, &mut kind_byte)?;
    let kind = match kind_byte[0] {
        0 => OptimizerKind::Sgd,
        1 => OptimizerKind::Adam,
        k => return Err(NetError::CorruptCheckpoint(format!("optimizer kind {k}"))),
    };
    let step = read_u64(&mut r)?;

    let mut params: Params<T> = Params::zeros(&config);
    let n_tensors = read_u32(&mut r)? as usize;
    if n_tensors != params.len() {
        return Err(NetError::CorruptCheckpoint(format!(
            "{n_tensors} tensors, layout expects {}",
            params.len()
        )));
    }
    for _ in 0..n_tensors {
        let (name, tensor) = read_tensor::<T, _>(&mut r)?;
        let idx = params
            .index_of(&name)
            .ok_or_else(|| NetError::CorruptCheckpoint(format!("unknown tensor {name}")))?;
        if params.tensor(idx).shape() != tensor.shape() {
            return Err(NetError::CorruptCheckpoint(format!(
                "tensor {name} has shape {:?}, expected {:?}",
                tensor.shape(),
                params.tensor(idx).shape()
            )));
        }
        *params.tensor_mut(idx) = tensor;
    }
    let network = Network { config, params };
    let mut opt_state = OptState::new(&network, kind);
    opt_state.step = step;
    if kind == OptimizerKind::Adam {
        for slot in ["m", "v"] {
            for i in 0..network.params.len() {
                let (name, tensor) = read_tensor::<T, _>(&mut r)?;
                let expected = format!("opt.{slot}.{}", network.params.meta(i).name);
                if name != expected {
                    return Err(NetError::CorruptCheckpoint(format!(
                        "optimizer tensor {name}, expected {expected}"
                    )));
                }
                if slot == "m" {
                    opt_state.m[i] = tensor;
                } else {
                    opt_state.v[i] = tensor;
                }
            }
        }
    }
    // Trailing garbage would break byte-identical round trips.
    let mut trailing = [0u8; 1];
    match r.read(&mut trailing)? {
        0 => {}
        _ => return Err(NetError::CorruptCheckpoint("trailing bytes".into())),
    }
    Ok(Checkpoint {
        iteration,
        network,
        opt_state,
    })
}
