mod common;

use common::*;
use slrm_core::config::{parse_dyadic, parse_phantom, ExperimentConfig, PhantomKind};
use slrm_core::experiment::{analytic_spectrum, prepare};
use slrm_core::oracle::{PiecewiseLinear2D, Rect};
use slrm_core::grid::CenteredGrid;
use slrm_core::io::{
    decode_field, decode_image, decode_mask, decode_pgm, encode_field, encode_image, encode_mask, encode_pgm16,
    read_field, sha256_hex, write_field, ArrayHeader, Dtype, Manifest, HEADER_LEN, MAGIC,
};
use slrm_core::sampling::variable_density_mask;
use slrm_core::{FieldSource, SlrmError, SpatialImage};

#[test]
fn field_roundtrip_is_bit_exact() {
    let mut r = rng(1);
    for order in 0..3 {
        let g = CenteredGrid::new(9, 6).unwrap();
        let f = random_field(&mut r, order, g).with_source(FieldSource::Analytic);
        let bytes = encode_field(&f).unwrap();
        assert_eq!(&bytes[..8], MAGIC.as_bytes());
        assert_eq!(bytes.len(), HEADER_LEN + (16 * g.len() << order));
        let back = decode_field(&bytes).unwrap();
        assert_eq!(back.components(), f.components());
        assert_eq!(back.order(), order);
        assert_eq!(back.source, FieldSource::Analytic);
    }
}

#[test]
fn image_and_mask_roundtrip() {
    let g = CenteredGrid::square(12).unwrap();
    let mut r = rng(2);
    let img = SpatialImage::new(g, random_complex(&mut r, 144)).unwrap();
    let back = decode_image(&encode_image(&img).unwrap()).unwrap();
    assert_eq!(back.values(), img.values());
    assert!(decode_field(&encode_image(&img).unwrap()).is_err());

    let m = variable_density_mask(g, 0.4, 77, 3.0, 2.0).unwrap();
    let back = decode_mask(&encode_mask(&m).unwrap()).unwrap();
    assert_eq!(back.kept(), m.kept());
    assert_eq!(back.seed(), 0);
    let seeded = variable_density_mask(g, 0.4, u64::MAX, 3.0, 2.0).unwrap();
    assert!(encode_mask(&seeded).is_ok());
}

#[test]
fn header_roundtrip_and_rejections() {
    let h = ArrayHeader { dtype: Dtype::C128, order: 1, layers: 2, n1: 64, n2: 64, src: "solver".into() };
    let bytes = h.encode().unwrap();
    assert_eq!(bytes.len(), HEADER_LEN);
    assert_eq!(bytes[HEADER_LEN - 1], b'\n');
    assert_eq!(ArrayHeader::decode(&bytes).unwrap(), h);

    let mut bad = bytes;
    bad[0] = b'X';
    assert!(matches!(ArrayHeader::decode(&bad), Err(SlrmError::Format(_))));
    let g = CenteredGrid::square(4).unwrap();
    let f = random_field(&mut rng(3), 0, g);
    let bytes = encode_field(&f).unwrap();
    assert!(decode_field(&bytes[..bytes.len() - 1]).is_err());
    assert!(decode_mask(&bytes).is_err());
}

#[test]
fn field_files_roundtrip() {
    let dir = std::env::temp_dir().join(format!("slrm-io-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("v.bin");
    let f = random_field(&mut rng(4), 1, CenteredGrid::square(8).unwrap());
    write_field(&path, &f).unwrap();
    assert_eq!(read_field(&path).unwrap().components(), f.components());
    assert!(matches!(read_field(&dir.join("missing.bin")), Err(SlrmError::Io(_))));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn pgm16_roundtrip_within_quantization() {
    let vals: Vec<f64> = (0..30).map(|i| i as f64 / 29.0).collect();
    let bytes = encode_pgm16(&vals, 5, 6, 0.0, 1.0).unwrap();
    assert!(bytes.starts_with(b"P5\n6 5\n65535\n"));
    let (back, n1, n2) = decode_pgm(&bytes).unwrap();
    assert_eq!((n1, n2), (5, 6));
    assert!(back.iter().zip(&vals).all(|(a, b)| (a - b).abs() <= 0.5 / 65535.0 + 1e-15));
    let eight = [b"P5\n# c\n2 1\n255\n".as_slice(), &[0u8, 255]].concat();
    assert_eq!(decode_pgm(&eight).unwrap(), (vec![0.0, 1.0], 1, 2));
    assert!(decode_pgm(b"P2\n1 1\n255\n0").is_err());
    assert!(encode_pgm16(&vals, 5, 6, 1.0, 1.0).is_err());
}

#[test]
fn manifest_hashes_config_text() {
    assert_eq!(sha256_hex(b"abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    let mut m = Manifest::new("abc", 9, "restore");
    m.outputs.push("report.csv".into());
    let text = m.to_toml();
    assert!(text.contains("ba7816bf"));
    assert!(text.contains("seed = 9"));
    let back: Manifest = toml::from_str(&text).unwrap();
    assert_eq!(back, m);
}

const BASE: &str = r#"
seed = 4
output = "out"

[phantom]
kind = "rectangles"
count = 3

[grid]
n1 = 32
n2 = 32

[mask]
fraction = 0.3

[noise]
sigma = 0.5

[method]
names = ["proposed", "tgv"]
support = 5

[proposed]
beta = 0.02
"#;

#[test]
fn config_parses_with_defaults() {
    let cfg = ExperimentConfig::parse(BASE).unwrap();
    assert_eq!(cfg.seed, 4);
    assert_eq!(cfg.phantom.kind, PhantomKind::Rectangles);
    assert_eq!(cfg.method.names, vec!["proposed", "tgv"]);
    assert_eq!(cfg.solver_params().beta, 0.02);
    assert_eq!(cfg.proposed.nu1, 1e-5);
    assert_eq!(cfg.tgv.max_iter, 500);
}

fn line_of_error(text: &str) -> usize {
    match ExperimentConfig::parse(text) {
        Err(SlrmError::Config { line, .. }) => line,
        other => panic!("expected a config error, got {other:?}"),
    }
}

#[test]
fn config_errors_carry_line_numbers() {
    assert_eq!(line_of_error(&BASE.replace("support = 5", "support = 4")), 21);
    assert_eq!(line_of_error(&BASE.replace("fraction = 0.3", "fraction = 1.3")), 14);
    assert_eq!(line_of_error(&BASE.replace("\"tgv\"]", "\"magic\"]")), 20);
    assert_eq!(line_of_error(&BASE.replace("count = 3", "count = 3\ncolour = 1")), 8);
    assert_eq!(line_of_error(&BASE.replace("beta = 0.02", "beta = -1.0")), 24);
    assert_eq!(line_of_error(&BASE.replace("n1 = 32", "n1 = \"wide\"")), 10);
}

const PHANTOM: &str = r#"
[[region]]
lo = ["-1/4", "-3/8"]
hi = ["1/4", "0"]
alpha = [0.5, -1.0]
beta = 0.25

[[region]]
lo = ["-1/2", "1/8"]
hi = ["-5/16", "7/16"]
alpha = [0.0, 0.0]
beta = 1.0
"#;

#[test]
fn phantom_file_parses_exact_corners() {
    let model = parse_phantom(PHANTOM).unwrap();
    let expected = PiecewiseLinear2D::new(vec![
        Rect::new([-0.25, -0.375], [0.25, 0.0], [0.5, -1.0], 0.25),
        Rect::new([-0.5, 0.125], [-0.3125, 0.4375], [0.0, 0.0], 1.0),
    ])
    .unwrap();
    assert_eq!(model, expected);
    assert_eq!(parse_dyadic(" -3/64 "), Some(-3.0 / 64.0));
    assert_eq!(parse_dyadic("2"), Some(2.0));
    for bad in ["1/3", "0.25", "1/0", "a/2", ""] {
        assert_eq!(parse_dyadic(bad), None, "{bad:?}");
    }
    match parse_phantom(&PHANTOM.replace("\"-5/16\"", "\"-1/3\"")) {
        Err(SlrmError::Config { line, .. }) => assert_eq!(line, 10),
        other => panic!("expected a config error, got {other:?}"),
    }
    assert!(matches!(parse_phantom(&PHANTOM.replace("\"0\"", "\"-1/2\"")), Err(SlrmError::InvalidModel(_))));
}

#[test]
fn file_phantom_config_uses_the_analytic_spectrum() {
    let dir = std::env::temp_dir().join(format!("slrm-phantom-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("two.toml");
    std::fs::write(&path, PHANTOM).unwrap();
    let text = BASE.replace("kind = \"rectangles\"", &format!("kind = \"file\"\npath = {:?}", path.display().to_string()));
    let cfg = ExperimentConfig::parse(&text).unwrap();
    assert_eq!(cfg.phantom.kind, PhantomKind::File);
    let data = prepare(&cfg).unwrap();
    let expected = analytic_spectrum(&parse_phantom(PHANTOM).unwrap(), CenteredGrid::square(32).unwrap());
    assert_eq!(data.spectrum.components(), expected.components());
    std::fs::remove_dir_all(&dir).unwrap();
    assert_eq!(line_of_error(&BASE.replace("kind = \"rectangles\"", "kind = \"file\"")), 6);
}
