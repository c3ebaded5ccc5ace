//! Parameter files.
//!
//! ```json
//! {"layers": [
//!   {"index": 0, "kind": "asf", "se": ["010", "1O1", "010"]},
//!   {"index": 1, "kind": "supgen", "intervals": [{"a": [...], "b": [...]}]},
//!   {"index": 2, "kind": "complement"}
//! ]}
//! ```
//!
//! Grids use the text form of [`crate::lattice::text`].

use serde::{Deserialize, Serialize};

use crate::lattice::text::{parse_set_rows, set_rows};
use crate::lattice::{Interval, LatticeError, Window};
use crate::mcg::StructOp;

use super::{ArchError, ArchitectureSpec, LayerParams, LayerSpec, ParamVector};

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ParamFile {
    layers: Vec<LayerEntry>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LayerEntry {
    index: usize,
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    se: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    intervals: Option<Vec<IntervalEntry>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct IntervalEntry {
    a: Vec<String>,
    b: Vec<String>,
}

pub fn serialize_params(arch: &ArchitectureSpec, params: &ParamVector) -> Result<String, ArchError> {
    params.check_shape(arch)?;
    let layers = arch
        .layers
        .iter()
        .zip(params.layers())
        .enumerate()
        .map(|(index, (spec, p))| {
            let mut e = LayerEntry {
                index,
                kind: spec.name().to_string(),
                se: None,
                intervals: None,
            };
            match p {
                LayerParams::Set(s) => e.se = Some(set_rows(s.se(), s.window())),
                LayerParams::Intervals(v) => {
                    e.intervals = Some(
                        v.iter()
                            .map(|i| IntervalEntry {
                                a: set_rows(i.left(), i.window()),
                                b: set_rows(i.right(), i.window()),
                            })
                            .collect(),
                    )
                }
                LayerParams::None => {}
            }
            e
        })
        .collect();
    let mut s = serde_json::to_string_pretty(&ParamFile { layers }).expect("plain data");
    s.push('\n');
    Ok(s)
}

pub fn deserialize_params(arch: &ArchitectureSpec, text: &str) -> Result<ParamVector, ArchError> {
    let file: ParamFile =
        serde_json::from_str(text).map_err(|e| ArchError::parse(None, e.to_string()))?;
    if file.layers.len() != arch.layers.len() {
        return Err(ArchError::parse(
            None,
            format!(
                "architecture has {} layers, file has {}",
                arch.layers.len(),
                file.layers.len()
            ),
        ));
    }
    let mut layers = Vec::with_capacity(file.layers.len());
    for (l, (spec, e)) in arch.layers.iter().zip(&file.layers).enumerate() {
        let fail = |m: String| ArchError::parse(Some(l), m);
        if e.index != l {
            return Err(fail(format!("entry at position {l} has index {}", e.index)));
        }
        if e.kind != spec.name() {
            return Err(fail(format!("expected kind '{}', found '{}'", spec.name(), e.kind)));
        }
        let w = spec.side().map(Window::square).unwrap_or_else(Window::empty);
        let lattice = |e: LatticeError| fail(e.to_string());
        let p = match spec {
            LayerSpec::Complement => {
                if e.se.is_some() || e.intervals.is_some() {
                    return Err(fail("complement layer takes no parameters".into()));
                }
                LayerParams::None
            }
            LayerSpec::SupGenSup { .. } | LayerSpec::InfGenInf { .. } => {
                let entries = e
                    .intervals
                    .as_ref()
                    .ok_or_else(|| fail("missing 'intervals'".into()))?;
                let mut v = Vec::with_capacity(entries.len());
                for (j, ie) in entries.iter().enumerate() {
                    let (wa, a) = parse_set_rows(&ie.a, 0).map_err(lattice)?;
                    let (wb, b) = parse_set_rows(&ie.b, 0).map_err(lattice)?;
                    if wa != wb || !wa.is_subset(&w) {
                        return Err(fail(format!("interval {j} is not drawn inside the layer window")));
                    }
                    v.push(
                        Interval::new(a, b, wa)
                            .map_err(|e| fail(format!("interval {j}: {e}")))?,
                    );
                }
                LayerParams::Intervals(v)
            }
            _ => {
                let rows = e.se.as_ref().ok_or_else(|| fail("missing 'se'".into()))?;
                let (ws, se) = parse_set_rows(rows, 0).map_err(lattice)?;
                if !ws.is_subset(&w) {
                    return Err(fail("structuring element is not drawn inside the layer window".into()));
                }
                LayerParams::Set(StructOp::new(se, ws).map_err(|e| fail(e.to_string()))?)
            }
        };
        layers.push(p);
    }
    let p = ParamVector::new(layers);
    p.check_shape(arch)?;
    Ok(p)
}
