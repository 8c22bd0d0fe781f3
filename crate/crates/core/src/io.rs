//! RTF1 / RTM1 binary codecs and small text list helpers.
//!
//! Both formats share one header: 4 magic bytes (`RTF1` tensors, `RTM1`
//! masks), three little-endian u32 bin counts (range, azimuth, elevation),
//! then six little-endian f64 bin-map fields (range start/step in m,
//! azimuth start/step in deg, elevation start/step in m). The payload is
//! one little-endian f32 power per cell for tensors and one byte (0 or 1)
//! per cell for masks, in layout order.
//!
//! Powers are stored at 32-bit width regardless of the in-memory scalar:
//! `save` narrows, `load` widens exactly. `load(save(t))` is therefore
//! bitwise identity exactly when the payload is f32-representable (always
//! true for loaded and f32 tensors); `save(load(bytes))` reproduces any
//! valid file byte for byte. Writes go through a sibling temp file plus
//! rename so readers never observe a partial file.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::tensor::{BoolMask, PolarGrid, RadarTensor};

pub const TENSOR_MAGIC: [u8; 4] = *b"RTF1";
pub const MASK_MAGIC: [u8; 4] = *b"RTM1";

const HEADER_LEN: usize = 4 + 3 * 4 + 6 * 8;

fn render_header(magic: [u8; 4], grid: &PolarGrid, out: &mut Vec<u8>) {
    out.extend_from_slice(&magic);
    for n in [grid.n_range, grid.n_azimuth, grid.n_elevation] {
        out.extend_from_slice(&(n as u32).to_le_bytes());
    }
    for v in [
        grid.range_start_m,
        grid.range_step_m,
        grid.azimuth_start_deg,
        grid.azimuth_step_deg,
        grid.elevation_start_m,
        grid.elevation_step_m,
    ] {
        out.extend_from_slice(&v.to_le_bytes());
    }
}

fn parse_header(magic: [u8; 4], bytes: &[u8]) -> Result<PolarGrid> {
    if bytes.len() < HEADER_LEN {
        return Err(Error::TruncatedFile {
            expected: HEADER_LEN as u64,
            got: bytes.len() as u64,
        });
    }
    let got: [u8; 4] = bytes[0..4].try_into().unwrap();
    if got != magic {
        return Err(Error::BadMagic { expected: magic, got });
    }
    let mut counts = [0usize; 3];
    for (k, n) in counts.iter_mut().enumerate() {
        let off = 4 + 4 * k;
        *n = u32::from_le_bytes(bytes[off..off + 4].try_into().unwrap()) as usize;
    }
    let mut maps = [0f64; 6];
    for (k, v) in maps.iter_mut().enumerate() {
        let off = 16 + 8 * k;
        *v = f64::from_le_bytes(bytes[off..off + 8].try_into().unwrap());
    }
    PolarGrid::new(
        counts[0], counts[1], counts[2], maps[0], maps[1], maps[2], maps[3], maps[4], maps[5],
    )
    .map_err(|e| Error::DimMismatch(format!("unusable header: {e}")))
}

/// Serializes a tensor to RTF1 bytes, narrowing powers to f32.
pub fn tensor_to_bytes<T: Real>(t: &RadarTensor<T>) -> Vec<u8> {
    let grid = t.grid();
    let mut out = Vec::with_capacity(HEADER_LEN + 4 * grid.cell_count());
    render_header(TENSOR_MAGIC, grid, &mut out);
    for v in t.values() {
        let f = v.to_f32().expect("finite power narrows to f32");
        out.extend_from_slice(&f.to_le_bytes());
    }
    out
}

/// Parses RTF1 bytes, widening powers exactly into `T`.
pub fn tensor_from_bytes<T: Real>(bytes: &[u8]) -> Result<RadarTensor<T>> {
    let grid = parse_header(TENSOR_MAGIC, bytes)?;
    let need = HEADER_LEN + 4 * grid.cell_count();
    if bytes.len() < need {
        return Err(Error::TruncatedFile {
            expected: need as u64,
            got: bytes.len() as u64,
        });
    }
    if bytes.len() > need {
        return Err(Error::DimMismatch(format!(
            "{} trailing bytes after declared payload",
            bytes.len() - need
        )));
    }
    let mut values = Vec::with_capacity(grid.cell_count());
    for chunk in bytes[HEADER_LEN..].chunks_exact(4) {
        let f = f32::from_le_bytes(chunk.try_into().unwrap());
        values.push(T::of(f as f64));
    }
    RadarTensor::from_values(grid, values)
}

/// Serializes a mask to RTM1 bytes.
pub fn mask_to_bytes(m: &BoolMask) -> Vec<u8> {
    let grid = m.grid();
    let mut out = Vec::with_capacity(HEADER_LEN + grid.cell_count());
    render_header(MASK_MAGIC, grid, &mut out);
    out.extend(m.bits().iter().map(|b| u8::from(*b)));
    out
}

/// Parses RTM1 bytes. Payload bytes other than 0 and 1 are rejected.
pub fn mask_from_bytes(bytes: &[u8]) -> Result<BoolMask> {
    let grid = parse_header(MASK_MAGIC, bytes)?;
    let need = HEADER_LEN + grid.cell_count();
    if bytes.len() < need {
        return Err(Error::TruncatedFile {
            expected: need as u64,
            got: bytes.len() as u64,
        });
    }
    if bytes.len() > need {
        return Err(Error::DimMismatch(format!(
            "{} trailing bytes after declared payload",
            bytes.len() - need
        )));
    }
    let mut bits = Vec::with_capacity(grid.cell_count());
    for (k, b) in bytes[HEADER_LEN..].iter().enumerate() {
        match b {
            0 => bits.push(false),
            1 => bits.push(true),
            _ => {
                return Err(Error::InvalidMask {
                    byte: *b,
                    offset: k as u64,
                })
            }
        }
    }
    BoolMask::from_bits(grid, bits)
}

/// Writes `bytes` to `path` atomically: temp file in the same directory,
/// then rename over the destination.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    let file_name = path
        .file_name()
        .ok_or_else(|| Error::domain(format!("not a file path: {}", path.display())))?;
    let mut tmp = file_name.to_os_string();
    tmp.push(".tmp");
    let tmp_path = match dir {
        Some(d) => d.join(&tmp),
        None => tmp.into(),
    };
    fs::write(&tmp_path, bytes)?;
    fs::rename(&tmp_path, path)?;
    Ok(())
}

pub fn save_tensor<T: Real>(t: &RadarTensor<T>, path: impl AsRef<Path>) -> Result<()> {
    atomic_write(path.as_ref(), &tensor_to_bytes(t))
}

pub fn load_tensor<T: Real>(path: impl AsRef<Path>) -> Result<RadarTensor<T>> {
    tensor_from_bytes(&fs::read(path.as_ref())?)
}

pub fn save_mask(m: &BoolMask, path: impl AsRef<Path>) -> Result<()> {
    atomic_write(path.as_ref(), &mask_to_bytes(m))
}

pub fn load_mask(path: impl AsRef<Path>) -> Result<BoolMask> {
    mask_from_bytes(&fs::read(path.as_ref())?)
}

/// Renders an ascending index list, one index per line.
pub fn index_list_to_string<'a>(indices: impl IntoIterator<Item = &'a usize>) -> String {
    let mut out = String::new();
    for i in indices {
        out.push_str(&i.to_string());
        out.push('\n');
    }
    out
}

pub fn save_index_list<'a>(
    indices: impl IntoIterator<Item = &'a usize>,
    path: impl AsRef<Path>,
) -> Result<()> {
    atomic_write(path.as_ref(), index_list_to_string(indices).as_bytes())
}

pub fn parse_index_list(text: &str) -> Result<Vec<usize>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(k, l)| {
            l.trim().parse::<usize>().map_err(|e| Error::Parse {
                line: k + 1,
                msg: format!("bad index '{}': {e}", l.trim()),
            })
        })
        .collect()
}
