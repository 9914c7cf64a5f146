//! Network checkpoint file: a one-line JSON header describing the topology,
//! followed by the parameters as a little-endian 64-bit float blob, in tensor
//! order (weight row-major, then bias, per tensor).

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{Activation, Matrix};

use super::{CascadeBlock, CascadeNetwork, Layer, LayeredNetwork, Network};

pub const FORMAT_TAG: &str = "archforge-net-v1";

#[derive(Debug, Clone)]
pub enum AnyNetwork {
    Layered(LayeredNetwork),
    Cascade(CascadeNetwork),
}

#[derive(Serialize, Deserialize)]
struct Header {
    format: String,
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    seed_lineage: Option<Vec<u64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    layers: Option<Vec<LayerHeader>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    cascade: Option<CascadeHeader>,
}

#[derive(Serialize, Deserialize)]
struct LayerHeader {
    in_dim: usize,
    out_dim: usize,
    activation: Option<Activation>,
    frozen: bool,
}

#[derive(Serialize, Deserialize)]
struct CascadeHeader {
    input_dim: usize,
    output_dim: usize,
    blocks: Vec<BlockHeader>,
    output_frozen: bool,
}

#[derive(Serialize, Deserialize)]
struct BlockHeader {
    width: usize,
    activation: Activation,
    frozen: bool,
}

pub fn save_network(net: &AnyNetwork, seed_lineage: Option<Vec<u64>>, path: &Path) -> Result<()> {
    let header = match net {
        AnyNetwork::Layered(n) => Header {
            format: FORMAT_TAG.to_string(),
            kind: "layered".to_string(),
            seed_lineage,
            layers: Some(
                n.layers
                    .iter()
                    .map(|l| LayerHeader {
                        in_dim: l.in_dim(),
                        out_dim: l.out_dim(),
                        activation: l.activation,
                        frozen: l.frozen,
                    })
                    .collect(),
            ),
            cascade: None,
        },
        AnyNetwork::Cascade(n) => Header {
            format: FORMAT_TAG.to_string(),
            kind: "cascade".to_string(),
            seed_lineage,
            layers: None,
            cascade: Some(CascadeHeader {
                input_dim: n.input_dim,
                output_dim: n.output_dim(),
                blocks: n
                    .blocks
                    .iter()
                    .map(|b| BlockHeader {
                        width: b.width(),
                        activation: b.activation,
                        frozen: b.frozen,
                    })
                    .collect(),
                output_frozen: n.output_frozen,
            }),
        },
    };

    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer(&mut w, &header)?;
    w.write_all(b"\n")?;
    let tensors = match net {
        AnyNetwork::Layered(n) => n.tensors(),
        AnyNetwork::Cascade(n) => n.tensors(),
    };
    for t in tensors {
        for v in t.weight.as_slice() {
            w.write_all(&v.to_le_bytes())?;
        }
        for v in t.bias {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn load_network(path: &Path) -> Result<AnyNetwork> {
    let mut r = BufReader::new(File::open(path)?);
    let mut header_bytes = Vec::new();
    let mut byte = [0u8; 1];
    loop {
        let n = r.read(&mut byte)?;
        if n == 0 {
            return Err(Error::Checkpoint("missing header terminator".to_string()));
        }
        if byte[0] == b'\n' {
            break;
        }
        header_bytes.push(byte[0]);
    }
    let header: Header = serde_json::from_slice(&header_bytes)?;
    if header.format != FORMAT_TAG {
        return Err(Error::Checkpoint(format!(
            "unsupported format tag: {}",
            header.format
        )));
    }

    let mut net = match header.kind.as_str() {
        "layered" => {
            let layers = header
                .layers
                .ok_or_else(|| Error::Checkpoint("layered header missing layers".to_string()))?;
            AnyNetwork::Layered(LayeredNetwork {
                layers: layers
                    .into_iter()
                    .map(|h| {
                        let mut l = Layer::new(h.in_dim, h.out_dim, h.activation);
                        l.frozen = h.frozen;
                        l
                    })
                    .collect(),
            })
        }
        "cascade" => {
            let c = header
                .cascade
                .ok_or_else(|| Error::Checkpoint("cascade header missing topology".to_string()))?;
            let mut net = CascadeNetwork::new(c.input_dim, c.output_dim);
            let mut fan_in = c.input_dim;
            for b in c.blocks {
                net.blocks.push(CascadeBlock {
                    weight: Matrix::zeros(fan_in, b.width),
                    bias: vec![0.0; b.width],
                    activation: b.activation,
                    frozen: b.frozen,
                });
                fan_in += b.width;
            }
            net.output_weight = Matrix::zeros(fan_in, c.output_dim);
            net.output_frozen = c.output_frozen;
            AnyNetwork::Cascade(net)
        }
        other => return Err(Error::Checkpoint(format!("unknown network kind: {other}"))),
    };

    let mut blob = Vec::new();
    r.read_to_end(&mut blob)?;
    let expected = match &net {
        AnyNetwork::Layered(n) => n.param_count(),
        AnyNetwork::Cascade(n) => n.param_count(),
    };
    if blob.len() != expected * 8 {
        return Err(Error::Checkpoint(format!(
            "parameter blob has {} bytes, expected {}",
            blob.len(),
            expected * 8
        )));
    }
    let mut offset = 0usize;
    let read_f64 = |offset: &mut usize| {
        let v = f64::from_le_bytes(blob[*offset..*offset + 8].try_into().unwrap());
        *offset += 8;
        v
    };
    let tensors = match &mut net {
        AnyNetwork::Layered(n) => n.tensors_mut(),
        AnyNetwork::Cascade(n) => n.tensors_mut(),
    };
    for t in tensors {
        for v in t.weight.as_mut_slice() {
            *v = read_f64(&mut offset);
        }
        for v in t.bias.iter_mut() {
            *v = read_f64(&mut offset);
        }
    }
    Ok(net)
}
