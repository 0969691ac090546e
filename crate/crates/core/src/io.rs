//! Binary array files, 16-bit PGM images and run manifests.
//!
//! An array file starts with a 64-byte ASCII header
//! `SLRMARR1 dtype=<c128|u8> order=<k> layers=<L> n=<N1>x<N2> src=<tag>`,
//! padded with spaces and terminated by `\n`, followed by little-endian data in
//! centered storage order, one layer after another. Complex values are stored as
//! `(re, im)` pairs of `f64`.

use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Result, SlrmError};
use crate::field::{FieldSource, SampleField, SpatialImage};
use crate::grid::CenteredGrid;
use crate::sampling::SamplingMask;

pub const MAGIC: &str = "SLRMARR1";
pub const HEADER_LEN: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Dtype {
    C128,
    U8,
}

impl Dtype {
    fn tag(self) -> &'static str {
        match self {
            Dtype::C128 => "c128",
            Dtype::U8 => "u8",
        }
    }

    fn width(self) -> usize {
        match self {
            Dtype::C128 => 16,
            Dtype::U8 => 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ArrayHeader {
    pub dtype: Dtype,
    pub order: usize,
    pub layers: usize,
    pub n1: usize,
    pub n2: usize,
    pub src: String,
}

impl ArrayHeader {
    pub fn encode(&self) -> Result<[u8; HEADER_LEN]> {
        let text = format!(
            "{MAGIC} dtype={} order={} layers={} n={}x{} src={}",
            self.dtype.tag(),
            self.order,
            self.layers,
            self.n1,
            self.n2,
            self.src
        );
        if text.len() > HEADER_LEN - 1 || self.src.contains(char::is_whitespace) {
            return Err(SlrmError::Format(format!("header does not fit: {text}")));
        }
        let mut out = [b' '; HEADER_LEN];
        out[..text.len()].copy_from_slice(text.as_bytes());
        out[HEADER_LEN - 1] = b'\n';
        Ok(out)
    }

    pub fn decode(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < HEADER_LEN || bytes[HEADER_LEN - 1] != b'\n' {
            return Err(SlrmError::Format("truncated header".into()));
        }
        let text = std::str::from_utf8(&bytes[..HEADER_LEN - 1])
            .map_err(|_| SlrmError::Format("header is not ASCII".into()))?;
        let mut parts = text.split_whitespace();
        if parts.next() != Some(MAGIC) {
            return Err(SlrmError::Format("bad magic".into()));
        }
        let (mut dtype, mut order, mut layers, mut n, mut src) = (None, None, None, None, None);
        for p in parts {
            let (key, val) = p.split_once('=').ok_or_else(|| SlrmError::Format(format!("bad header token {p}")))?;
            let num = |v: &str| v.parse::<usize>().map_err(|_| SlrmError::Format(format!("bad number {v}")));
            match key {
                "dtype" => {
                    dtype = Some(match val {
                        "c128" => Dtype::C128,
                        "u8" => Dtype::U8,
                        _ => return Err(SlrmError::Format(format!("unknown dtype {val}"))),
                    })
                }
                "order" => order = Some(num(val)?),
                "layers" => layers = Some(num(val)?),
                "n" => {
                    let (a, b) = val.split_once('x').ok_or_else(|| SlrmError::Format(format!("bad extents {val}")))?;
                    n = Some((num(a)?, num(b)?));
                }
                "src" => src = Some(val.to_string()),
                _ => return Err(SlrmError::Format(format!("unknown header key {key}"))),
            }
        }
        let missing = |k: &str| SlrmError::Format(format!("header lacks {k}"));
        let (n1, n2) = n.ok_or_else(|| missing("n"))?;
        Ok(Self {
            dtype: dtype.ok_or_else(|| missing("dtype"))?,
            order: order.ok_or_else(|| missing("order"))?,
            layers: layers.ok_or_else(|| missing("layers"))?,
            n1,
            n2,
            src: src.ok_or_else(|| missing("src"))?,
        })
    }

    fn payload_len(&self) -> usize {
        self.layers * self.n1 * self.n2 * self.dtype.width()
    }
}

fn encode_complex(header: &ArrayHeader, layers: &[Vec<Complex64>]) -> Result<Vec<u8>> {
    let mut out = header.encode()?.to_vec();
    out.reserve(header.payload_len());
    for layer in layers {
        for z in layer {
            out.extend_from_slice(&z.re.to_le_bytes());
            out.extend_from_slice(&z.im.to_le_bytes());
        }
    }
    Ok(out)
}

fn decode_payload(bytes: &[u8], dtype: Dtype) -> Result<(ArrayHeader, &[u8])> {
    let header = ArrayHeader::decode(bytes)?;
    if header.dtype != dtype {
        return Err(SlrmError::Format(format!("expected dtype {}, found {}", dtype.tag(), header.dtype.tag())));
    }
    let body = &bytes[HEADER_LEN..];
    if body.len() != header.payload_len() {
        return Err(SlrmError::Format(format!(
            "payload of {} bytes, header implies {}",
            body.len(),
            header.payload_len()
        )));
    }
    Ok((header, body))
}

fn complex_layers(body: &[u8], layers: usize, len: usize) -> Vec<Vec<Complex64>> {
    let f = |i: usize| f64::from_le_bytes(body[i..i + 8].try_into().expect("8 bytes"));
    (0..layers)
        .map(|l| {
            (0..len)
                .map(|j| {
                    let at = (l * len + j) * 16;
                    Complex64::new(f(at), f(at + 8))
                })
                .collect()
        })
        .collect()
}

pub fn encode_field(field: &SampleField) -> Result<Vec<u8>> {
    let grid = field.grid();
    let header = ArrayHeader {
        dtype: Dtype::C128,
        order: field.order(),
        layers: field.num_components(),
        n1: grid.n1(),
        n2: grid.n2(),
        src: field.source.tag().to_string(),
    };
    encode_complex(&header, field.components())
}

pub fn decode_field(bytes: &[u8]) -> Result<SampleField> {
    let (h, body) = decode_payload(bytes, Dtype::C128)?;
    if h.layers != 1 << h.order || h.src == "image" {
        return Err(SlrmError::Format("not a sample field".into()));
    }
    let grid = CenteredGrid::new(h.n1, h.n2)?;
    let source = FieldSource::from_tag(&h.src).unwrap_or(FieldSource::Unknown);
    Ok(SampleField::from_components(h.order, grid, complex_layers(body, h.layers, grid.len()))?.with_source(source))
}

/// Images use `src=image` and pixel order.
pub fn encode_image(image: &SpatialImage) -> Result<Vec<u8>> {
    let grid = image.grid();
    let header =
        ArrayHeader { dtype: Dtype::C128, order: 0, layers: 1, n1: grid.n1(), n2: grid.n2(), src: "image".into() };
    encode_complex(&header, &[image.values().to_vec()])
}

pub fn decode_image(bytes: &[u8]) -> Result<SpatialImage> {
    let (h, body) = decode_payload(bytes, Dtype::C128)?;
    if h.src != "image" || h.layers != 1 {
        return Err(SlrmError::Format("not an image".into()));
    }
    let grid = CenteredGrid::new(h.n1, h.n2)?;
    SpatialImage::new(grid, complex_layers(body, 1, grid.len()).remove(0))
}

/// Masks store one 0/1 byte per frequency with `src=mask`. The seed does not fit the
/// header and is kept in the run manifest; decoded masks report seed 0.
pub fn encode_mask(mask: &SamplingMask) -> Result<Vec<u8>> {
    let grid = mask.grid();
    let header = ArrayHeader {
        dtype: Dtype::U8,
        order: 0,
        layers: 1,
        n1: grid.n1(),
        n2: grid.n2(),
        src: "mask".into(),
    };
    let mut out = header.encode()?.to_vec();
    out.extend(mask.kept().iter().map(|&b| b as u8));
    Ok(out)
}

pub fn decode_mask(bytes: &[u8]) -> Result<SamplingMask> {
    let (h, body) = decode_payload(bytes, Dtype::U8)?;
    if body.iter().any(|&b| b > 1) {
        return Err(SlrmError::Format("mask bytes must be 0 or 1".into()));
    }
    let grid = CenteredGrid::new(h.n1, h.n2)?;
    let kept: Vec<bool> = body.iter().map(|&b| b == 1).collect();
    let fraction = kept.iter().filter(|&&b| b).count() as f64 / grid.len() as f64;
    SamplingMask::from_kept(grid, kept, fraction, 0)
}

pub fn write_field(path: &Path, field: &SampleField) -> Result<()> {
    Ok(fs::write(path, encode_field(field)?)?)
}

pub fn read_field(path: &Path) -> Result<SampleField> {
    decode_field(&fs::read(path)?)
}

pub fn write_image(path: &Path, image: &SpatialImage) -> Result<()> {
    Ok(fs::write(path, encode_image(image)?)?)
}

pub fn read_image(path: &Path) -> Result<SpatialImage> {
    decode_image(&fs::read(path)?)
}

pub fn write_mask(path: &Path, mask: &SamplingMask) -> Result<()> {
    Ok(fs::write(path, encode_mask(mask)?)?)
}

pub fn read_mask(path: &Path) -> Result<SamplingMask> {
    decode_mask(&fs::read(path)?)
}

/// Binary 16-bit PGM of `values` (row-major, `n1` rows) mapped linearly from
/// `[lo, hi]` to `[0, 65535]` with clamping.
pub fn encode_pgm16(values: &[f64], n1: usize, n2: usize, lo: f64, hi: f64) -> Result<Vec<u8>> {
    if values.len() != n1 * n2 {
        return Err(SlrmError::ShapeMismatch(format!("{} values for {n1}x{n2} image", values.len())));
    }
    if !(hi > lo) {
        return Err(SlrmError::InvalidParameter("PGM range must be nonempty".into()));
    }
    let mut out = format!("P5\n{n2} {n1}\n65535\n").into_bytes();
    for &v in values {
        let t = ((v - lo) / (hi - lo)).clamp(0.0, 1.0);
        out.extend_from_slice(&((t * 65535.0).round() as u16).to_be_bytes());
    }
    Ok(out)
}

/// Reads a binary PGM (8 or 16 bit) into `(values in [0, 1], n1, n2)`.
pub fn decode_pgm(bytes: &[u8]) -> Result<(Vec<f64>, usize, usize)> {
    let mut fields = Vec::with_capacity(4);
    let mut pos = 0;
    while fields.len() < 4 {
        while pos < bytes.len() && (bytes[pos].is_ascii_whitespace() || bytes[pos] == b'#') {
            if bytes[pos] == b'#' {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
            } else {
                pos += 1;
            }
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(SlrmError::Format("truncated PGM header".into()));
        }
        fields.push(String::from_utf8_lossy(&bytes[start..pos]).into_owned());
    }
    pos += 1;
    if fields[0] != "P5" {
        return Err(SlrmError::Format("only binary PGM (P5) is supported".into()));
    }
    let num = |s: &str| s.parse::<usize>().map_err(|_| SlrmError::Format(format!("bad PGM number {s}")));
    let (n2, n1, maxval) = (num(&fields[1])?, num(&fields[2])?, num(&fields[3])?);
    if maxval == 0 || maxval > 65535 {
        return Err(SlrmError::Format(format!("bad PGM maxval {maxval}")));
    }
    let width = if maxval > 255 { 2 } else { 1 };
    let body = bytes.get(pos..).unwrap_or(&[]);
    if body.len() != n1 * n2 * width {
        return Err(SlrmError::Format("PGM payload length mismatch".into()));
    }
    let values = body
        .chunks(width)
        .map(|c| {
            let v = if width == 2 { u16::from_be_bytes([c[0], c[1]]) as f64 } else { c[0] as f64 };
            v / maxval as f64
        })
        .collect();
    Ok((values, n1, n2))
}

/// Run manifest written next to every artifact.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub config_sha256: String,
    pub seed: u64,
    pub version: String,
    pub command: String,
    pub outputs: Vec<String>,
}

impl Manifest {
    pub fn new(config_text: &str, seed: u64, command: &str) -> Self {
        Self {
            config_sha256: sha256_hex(config_text.as_bytes()),
            seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            outputs: Vec::new(),
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("manifest serializes")
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        Ok(fs::write(path, self.to_toml())?)
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}
