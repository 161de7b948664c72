use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_phykey-lab"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn image(dir: &Path) {
    let mut img = b"P5\n# test\n5 3\n255\n".to_vec();
    img.extend(0..15u8);
    fs::write(dir.join("img.pgm"), img).unwrap();
}

const PIPELINE: &[&str] = &["pipeline", "--in", "img.pgm", "--modulus", "23", "--generator", "5", "--secret-a", "6", "--secret-b", "15"];

#[test]
fn keyexchange_small_example() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["keyexchange", "--modulus", "23", "--generator", "5", "--secret-a", "6", "--secret-b", "15"], dir.path());
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["share_a"], "8");
    assert_eq!(v["share_b"], "19");
    assert_eq!(v["shared_key"], "2");
    assert_eq!(v["prime_checked"], true);
}

#[test]
fn keyexchange_rejects_bad_generator() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["keyexchange", "--modulus", "23", "--generator", "23", "--secret-a", "1", "--secret-b", "2"], dir.path());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn encrypt_decrypt_roundtrip_and_wrong_key() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    image(d);
    assert!(run(&["encrypt", "--in", "img.pgm", "--k2", "12345", "--out", "c.phk"], d).status.success());
    let c = fs::read(d.join("c.phk")).unwrap();
    assert_eq!(&c[..4], b"PHK1");
    // 5x3 pads to 6x4.
    assert_eq!(u32::from_le_bytes(c[4..8].try_into().unwrap()), 4);
    assert_eq!(u32::from_le_bytes(c[8..12].try_into().unwrap()), 6);
    assert_eq!(c.len(), 14 + 24 * 8);

    assert!(run(&["decrypt", "--in", "c.phk", "--k2", "12345", "--out", "d.pgm"], d).status.success());
    let back = pgm_pixels(&fs::read(d.join("d.pgm")).unwrap());
    assert_eq!(back, (0..15u8).collect::<Vec<_>>());

    let wrong = run(&["decrypt", "--in", "c.phk", "--k2", "12346", "--out", "w.pgm"], d);
    if wrong.status.success() {
        assert_ne!(pgm_pixels(&fs::read(d.join("w.pgm")).unwrap()), back);
    } else {
        assert!(!d.join("w.pgm").exists());
    }
}

fn pgm_pixels(bytes: &[u8]) -> Vec<u8> {
    let header = b"P5\n5 3\n255\n";
    assert_eq!(&bytes[..header.len()], header);
    bytes[header.len()..].to_vec()
}

#[test]
fn raw_mode_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("m.bin"), b"abc").unwrap();
    assert!(run(&["encrypt", "--raw", "--in", "m.bin", "--k2", "3", "--out", "c"], d).status.success());
    assert!(run(&["decrypt", "--raw", "--in", "c", "--k2", "3", "--out", "m2.bin"], d).status.success());
    assert_eq!(fs::read(d.join("m2.bin")).unwrap(), b"abc");
}

#[test]
fn malformed_pgm_fails_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("bad.pgm"), b"P5\n4 4\n255\nshort").unwrap();
    let out = run(&["encrypt", "--in", "bad.pgm", "--k2", "3", "--out", "c.phk"], d);
    assert_eq!(out.status.code(), Some(1));
    assert!(!d.join("c.phk").exists());
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));
}

#[test]
fn pipeline_gates_set_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    image(d);

    let mut args = PIPELINE.to_vec();
    args.extend(["--out", "r.json"]);
    let ok = run(&args, d);
    assert!(ok.status.success(), "{}", String::from_utf8_lossy(&ok.stderr));
    let v: serde_json::Value = serde_json::from_slice(&fs::read(d.join("r.json")).unwrap()).unwrap();
    assert_eq!(v["shared_key"], "2");
    // The comment line is dropped on the way back, so only the pixels match.
    assert_eq!(v["roundtrip_ok"], false);
    assert_eq!(v["message_roundtrip_ok"], true);
    assert_ne!(v["input_sha256"], v["decrypted_sha256"]);
    assert_eq!(v["unexplained_paper_value"]["k1"], 21428);

    let mut args = PIPELINE.to_vec();
    args.extend(["--common-key", "3", "--out", "r2.json"]);
    let out = run(&args, d);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(String::from_utf8_lossy(&out.stderr).trim(), "wrong common key");
    assert!(!d.join("r2.json").exists());

    let mut args = PIPELINE.to_vec();
    args.extend(["--entered-k2", "5", "--cipher-out", "c.phk", "--out", "r3.json"]);
    let out = run(&args, d);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(String::from_utf8_lossy(&out.stderr).trim(), "wrong encryption key");
    assert!(!d.join("c.phk").exists());
    assert!(!d.join("r3.json").exists());
}

#[test]
fn pipeline_verbose_transcript() {
    let dir = tempfile::tempdir().unwrap();
    image(dir.path());
    let mut args = vec!["--verbose"];
    args.extend(PIPELINE);
    let out = run(&args, dir.path());
    let err = String::from_utf8(out.stderr).unwrap();
    let lines: Vec<&str> = err.lines().collect();
    assert_eq!(lines[0], "N =23");
    assert!(lines.contains(&"k1 =21428"));
    assert!(lines.contains(&"correct common key"));
    assert!(lines.last().unwrap().starts_with("The scalability factor is "));
}

#[test]
fn ber_and_report_csv() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let out = run(&["ber", "--bits", "20000", "--ebn0", "-2,0,inf", "--out", "b.csv"], d);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(d.join("b.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "ebn0_db,ber,bits,errors");
    assert_eq!(lines.len(), 4);
    assert!(lines[3].starts_with("inf,0,20000,0"));

    let out = run(&["report", "--ber-csv", "b.csv", "--symbol-rate", "1000", "--out", "cdf.csv"], d);
    assert!(out.status.success());
    let cdf = fs::read_to_string(d.join("cdf.csv")).unwrap();
    let lines: Vec<&str> = cdf.lines().collect();
    assert_eq!(lines[0], "bitrate,cdf");
    assert_eq!(lines.last().unwrap(), &"1000,1");
}

#[test]
fn report_rejects_wrong_header() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("x.csv"), "a,b\n1,2\n").unwrap();
    let out = run(&["report", "--ber-csv", "x.csv", "--out", "o.csv"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(!dir.path().join("o.csv").exists());
}

#[test]
fn phykey_csv_shape() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        &["phykey", "--probes", "1000", "--trials", "2", "--snr", "0,20", "--scheme", "phase", "--sectors", "8", "--q-minus", "-0.5"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "scheme,snr_db,kdp,kgr,monobit_p");
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("phase,0,"));
    // Eight sectors give three bits per probe.
    assert_eq!(lines[2].split(',').nth(3), Some("3"));
}

#[test]
fn phykey_rejects_bad_quantizer() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["phykey", "--probes", "100", "--trials", "1", "--sectors", "3"], dir.path());
    assert_eq!(out.status.code(), Some(1));
}
