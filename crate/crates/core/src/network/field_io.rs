//! Trained-field files: one JSON header line, then every parameter tensor as
//! little-endian `f32`, in the order listed in the header.

use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::model::Inr;
use super::spec::ModelSpec;
use super::train::{Telemetry, TrainedField};
use crate::error::{Error, Result};

pub const FORMAT: &str = "inr-field/1";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FieldHeader {
    pub format: String,
    pub spec: ModelSpec,
    pub height: usize,
    pub width: usize,
    pub seed: u64,
    pub telemetry: Telemetry,
    pub tensors: Vec<(String, Vec<usize>)>,
}

pub fn write_field<W: Write>(field: &TrainedField, mut out: W) -> Result<()> {
    let header = FieldHeader {
        format: FORMAT.into(),
        spec: field.model.spec.clone(),
        height: field.height,
        width: field.width,
        seed: field.seed,
        telemetry: field.telemetry.clone(),
        tensors: field.model.tensor_shapes(),
    };
    let mut bytes = serde_json::to_vec(&header)?;
    bytes.push(b'\n');
    for t in field.model.tensors() {
        for v in t {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
    }
    out.write_all(&bytes).map_err(|e| Error::io("<field stream>", e))
}

pub fn read_field<R: Read>(input: R) -> Result<TrainedField> {
    let mut reader = BufReader::new(input);
    let mut line = String::new();
    reader.read_line(&mut line).map_err(|e| Error::io("<field stream>", e))?;
    let header: FieldHeader = serde_json::from_str(line.trim_end())?;
    if header.format != FORMAT {
        return Err(Error::FieldFormat(format!("unsupported format `{}`", header.format)));
    }
    let mut model = Inr::<f32>::new(&header.spec, header.seed);
    if model.tensor_shapes() != header.tensors {
        return Err(Error::FieldFormat("tensor layout does not match the model spec".into()));
    }
    let mut blob = Vec::new();
    reader.read_to_end(&mut blob).map_err(|e| Error::io("<field stream>", e))?;
    let expected = 4 * model.parameter_count();
    if blob.len() != expected {
        return Err(Error::FieldFormat(format!("expected {expected} parameter bytes, found {}", blob.len())));
    }
    let mut words = blob.chunks_exact(4).map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]));
    for t in model.tensors_mut() {
        for (dst, src) in t.iter_mut().zip(&mut words) {
            *dst = src;
        }
    }
    Ok(TrainedField {
        model,
        height: header.height,
        width: header.width,
        seed: header.seed,
        telemetry: header.telemetry,
    })
}

pub fn save_field(field: &TrainedField, path: &Path) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_field(field, std::io::BufWriter::new(file))
}

pub fn load_field(path: &Path) -> Result<TrainedField> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_field(file)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::spec::ModelKind;
    use crate::network::train::render_field;

    #[test]
    fn round_trip_renders_identically() {
        for kind in ModelKind::ALL {
            let field = TrainedField {
                model: Inr::new(&ModelSpec::toy(kind), 11),
                height: 5,
                width: 7,
                seed: 11,
                telemetry: Telemetry {
                    epoch_losses: vec![0.5, 0.25],
                    steps: 2,
                    wall_seconds: 0.0,
                },
            };
            let mut buf = Vec::new();
            write_field(&field, &mut buf).unwrap();
            let back = read_field(buf.as_slice()).unwrap();
            assert_eq!(back.model, field.model);
            assert_eq!(render_field(&back.model, 5, 7).unwrap(), render_field(&field.model, 5, 7).unwrap());
        }
    }

    #[test]
    fn truncated_blob_rejected() {
        let field = TrainedField {
            model: Inr::new(&ModelSpec::toy(ModelKind::Haar), 1),
            height: 2,
            width: 2,
            seed: 1,
            telemetry: Telemetry {
                epoch_losses: vec![],
                steps: 0,
                wall_seconds: 0.0,
            },
        };
        let mut buf = Vec::new();
        write_field(&field, &mut buf).unwrap();
        buf.truncate(buf.len() - 3);
        assert!(matches!(read_field(buf.as_slice()), Err(Error::FieldFormat(_))));
    }
}
