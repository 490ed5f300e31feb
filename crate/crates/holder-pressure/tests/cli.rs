use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use holder_pressure::fields::{synth_lacunary_divfree, LacunarySpec};
use holder_pressure::io::{read_field, write_field, FieldHeader};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_holder-pressure")).args(args).output().unwrap()
}

fn write_config(dir: &Path, body: &str) -> String {
    let p = dir.join("config.json");
    fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn field_files_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    let u = synth_lacunary_divfree(&LacunarySpec { gamma: 0.25, j: 3, seed: 1, amplitude: 1.0 }, 32).unwrap();
    let path = dir.path().join("fields/u");
    write_field(&path, &u).unwrap();
    assert_eq!(fs::metadata(dir.path().join("fields/u.bin")).unwrap().len(), 2 * 32 * 32 * 8);
    let header: FieldHeader = serde_json::from_str(&fs::read_to_string(dir.path().join("fields/u.json")).unwrap()).unwrap();
    assert_eq!(header, FieldHeader::of(&u));
    assert_eq!(read_field(&path.with_extension("json")).unwrap(), u);

    fs::write(dir.path().join("fields/u.bin"), [0u8; 12]).unwrap();
    assert!(read_field(&path).is_err());
}

#[test]
fn bad_gamma_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"gamma_list": [0.7]}"#);
    let out = run(&["--config", &cfg, "split"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("gamma_list[0]"));

    let cfg = write_config(dir.path(), r#"{"grid_n": "big"}"#);
    let out = run(&["--config", &cfg, "symbols"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("grid_n"));

    assert_eq!(run(&["--only", "nowhere", "verify-all"]).status.code(), Some(2));
}

#[test]
fn synth_then_norms() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let cfg = write_config(
        dir.path(),
        &format!(r#"{{"gamma_list": [0.4], "grid_n": 64, "J_max": 4, "output_dir": {:?}}}"#, out_dir),
    );
    let out = run(&["--config", &cfg, "--seed", "3", "synth"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let field = out_dir.join("fields/u_0.4_3.bin");
    assert!(field.exists());
    let out = run(&["norms", "--field", field.to_str().unwrap(), "--s", "0.4"]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.starts_with("zygmund_norm(s = 0.4) = "), "{text}");
}

#[test]
fn filtered_verify_all_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let cfg = write_config(dir.path(), &format!(r#"{{"quick": true, "output_dir": {:?}}}"#, out_dir));
    let out = run(&["--config", &cfg, "--only", "geometry", "verify-all"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.lines().any(|l| l.starts_with("A6 PASS")), "{text}");
    assert!(text.lines().any(|l| l.starts_with("A10 PASS")), "{text}");
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("report_disk.json")).unwrap()).unwrap();
    assert!(report["provenance"]["bump_fingerprint"].as_str().unwrap().len() == 64);
    assert!(out_dir.join("report_periodic.json").exists());
    assert!(out_dir.join("laplace_beltrami.csv").exists());
}
