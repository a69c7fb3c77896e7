use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_effdim"))
}

fn run(dir: &Path, args: &[&str]) -> Output {
    bin().current_dir(dir).args(args).output().expect("spawn effdim")
}

fn ok(dir: &Path, args: &[&str]) -> Output {
    let out = run(dir, args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn golden(name: &str) -> String {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name);
    fs::read_to_string(path).unwrap()
}

fn header(path: &Path) -> String {
    let text = fs::read_to_string(path).unwrap();
    format!("{}\n", text.lines().next().unwrap())
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_slice(&fs::read(path).unwrap()).unwrap()
}

fn rows(path: &Path) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_path(path).unwrap();
    r.records().map(|rec| rec.unwrap().iter().map(String::from).collect()).collect()
}

const TRAIN: &[&str] = &["train", "--dataset", "moons", "--hidden", "16,16", "--epochs", "50", "--lr", "0.05", "--seed", "1"];

#[test]
fn train_writes_checkpoint_log_and_manifest() {
    let dir = TempDir::new().unwrap();
    ok(dir.path(), &[TRAIN, &["--out", "m.json"]].concat());
    let ck = json(&dir.path().join("m.json"));
    assert_eq!(ck["params"].as_array().unwrap().len(), 354);
    assert_eq!(ck["arch"]["widths"], serde_json::json!([2, 16, 16, 2]));
    assert_eq!(ck["seed"], 1);
    assert_eq!(ck["manifest"], "m.json.manifest.json");
    assert_eq!(header(&dir.path().join("m.json.log.csv")), golden("train_log_header.csv"));
    let manifest = json(&dir.path().join("m.json.manifest.json"));
    assert_eq!(manifest["command"], "train");
    assert_eq!(manifest["resolved"]["batch_size"], 50);
    assert!(manifest["started"].as_str().unwrap() <= manifest["finished"].as_str().unwrap());
    assert_eq!(manifest["outputs"].as_array().unwrap().len(), 2);
}

#[test]
fn reruns_are_byte_identical() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    ok(a.path(), &[TRAIN, &["--out", "m.json"]].concat());
    let out = bin()
        .current_dir(b.path())
        .env("EFFDIM_THREADS", "1")
        .args([TRAIN, &["--out", "m.json"]].concat())
        .output()
        .unwrap();
    assert!(out.status.success());
    for f in ["m.json", "m.json.log.csv"] {
        assert_eq!(fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap(), "{f}");
    }
    for dir in [&a, &b] {
        ok(dir.path(), &["effdim", "--model", "m.json", "--mode", "mc", "--samples", "5", "--out", "r.json", "--csv", "r.csv"]);
    }
    assert_eq!(fs::read(a.path().join("r.csv")).unwrap(), fs::read(b.path().join("r.csv")).unwrap());
    assert_eq!(fs::read(a.path().join("r.json")).unwrap(), fs::read(b.path().join("r.json")).unwrap());
}

#[test]
fn usage_errors_exit_2() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    assert_eq!(code(&run(d, &["train", "--dataset", "moons", "--hidden", "4,4", "--batch", "0", "--out", "x.json"])), 2);
    assert_eq!(code(&run(d, &["train", "--dataset", "nowhere", "--hidden", "4,4", "--out", "x.json"])), 2);
    assert_eq!(code(&run(d, &["effdim", "--model", "missing.json", "--out", "r.json"])), 2);
    assert_eq!(code(&run(d, &["effdim", "--model", "gaussian", "--gamma", "1", "--n", "18", "--out", "g.json"])), 2);
    let out = run(d, &["effdim", "--model", "gaussian", "--gamma", "0.01", "--n", "100", "--out", "g.json"]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("admissible interval (0.289"));
    assert_eq!(code(&run(d, &["bound-table", "--n-list", "100,200", "--deff-list", "3", "--out", "b.csv"])), 2);
    assert_eq!(code(&run(d, &["sweep", "--kind", "size", "--out", "s.csv"])), 2);
    let bad_threads = bin().current_dir(d).env("EFFDIM_THREADS", "zero").args(["bound-table", "--out", "b.csv"]).output().unwrap();
    assert_eq!(code(&bad_threads), 2);
    assert!(!d.join("x.json").exists() && !d.join("g.json").exists());
}

#[test]
fn divergence_exits_3() {
    let dir = TempDir::new().unwrap();
    let out = run(dir.path(), &["train", "--dataset", "moons", "--hidden", "16,16", "--lr", "1e6", "--out", "x.json"]);
    assert_eq!(code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("diverged"));
}

#[test]
fn gaussian_toy_matches_closed_form() {
    let dir = TempDir::new().unwrap();
    for (mode, dim, n) in [("midpoint", "3", "1000"), ("mc", "5", "60000")] {
        ok(dir.path(), &["effdim", "--model", "gaussian", "--gaussian-dim", dim, "--n", n, "--mode", mode, "--samples", "7", "--out", "g.json", "--csv", "g.csv"]);
        let r = json(&dir.path().join("g.json"));
        let n: f64 = n.parse().unwrap();
        let k = n / (2.0 * std::f64::consts::PI * n.ln());
        let expected = k.ln_1p() / k.ln();
        let got = r["result"]["normalized_ed"].as_f64().unwrap();
        assert!((got - expected).abs() < 1e-10, "{mode}: {got} vs {expected}");
    }
    assert_eq!(header(&dir.path().join("g.csv")), golden("effdim_header.csv"));
    assert_eq!(rows(&dir.path().join("g.csv")).len(), 2);
}

#[test]
fn midpoint_and_mc_agree_on_trained_moons() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    ok(d, &["train", "--dataset", "moons", "--train-size", "20000", "--hidden", "16,16", "--epochs", "20", "--seed", "1", "--out", "m.json"]);
    let common = ["effdim", "--model", "m.json", "--kfac", "on", "--estimator", "empirical"];
    ok(d, &[&common[..], &["--out", "mid.json"]].concat());
    ok(d, &[&common[..], &["--mode", "mc", "--samples", "100", "--out", "mc.json"]].concat());
    let mid = json(&d.join("mid.json"))["result"]["ed"].as_f64().unwrap();
    let mc = json(&d.join("mc.json"))["result"]["ed"].as_f64().unwrap();
    assert!((mid - mc).abs() / mid < 1e-3, "{mid} vs {mc}");
    assert_eq!(json(&d.join("mc.json"))["result"]["sample_count"], 100);
}

#[test]
fn large_models_force_kfac() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    ok(d, &["train", "--dataset", "blobs", "--noise", "0.5", "--hidden", "64,64", "--epochs", "5", "--out", "m.json"]);
    let out = ok(d, &["effdim", "--model", "m.json", "--kfac", "off", "--out", "r.json"]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("K-FAC forced on"));
    let r = json(&d.join("r.json"));
    assert_eq!(r["d"], 4482);
    assert_eq!(r["fisher"]["method"]["method"], "kfac");
}

#[test]
fn bound_table_reference_rows() {
    let dir = TempDir::new().unwrap();
    ok(dir.path(), &["bound-table", "--table2", "--out", "t.csv"]);
    let path = dir.path().join("t.csv");
    assert_eq!(header(&path), golden("bound_table2_header.csv"));
    let printed = [0.00132, 0.00068, 0.00034, 0.00014, 0.00007];
    let table = rows(&path);
    assert_eq!(table.len(), 5);
    for (row, p) in table.iter().zip(printed) {
        let xi: f64 = row[2].parse().unwrap();
        assert!(xi >= p && xi - p < 1e-5, "{xi} vs {p}");
        assert_eq!(row[4], "true");
    }
    assert_eq!(table[1][5].parse::<f64>().unwrap(), -91345.0);
    assert!(dir.path().join("t.csv.manifest.json").exists());
}

#[test]
fn bound_table_lists() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    ok(d, &["bound-table", "--n-list", "", "--deff-list", "", "--out", "e.csv"]);
    assert_eq!(fs::read_to_string(d.join("e.csv")).unwrap(), golden("bound_table_header.csv"));
    ok(d, &["bound-table", "--n-list", "100", "--deff-list", "0", "--gamma", "1", "--epsilon", "1", "--cd", "1", "--d", "10", "--out", "b.csv"]);
    let r = rows(&d.join("b.csv"));
    let log_rhs: f64 = r[0][3].parse().unwrap();
    assert!((log_rhs + 16.0 * std::f64::consts::PI * 100f64.ln()).abs() < 1e-9);
    assert_eq!(code(&run(d, &["bound-table", "--n-list", "100", "--deff-list", "0", "--gamma", "1", "--variant", "loglip", "--out", "l.csv"])), 2);
    ok(d, &["bound-table", "--n-list", "100", "--deff-list", "0", "--gamma", "1", "--epsilon", "1", "--variant", "loglip", "--M2", "1", "--out", "l.csv"]);
    let xi: f64 = rows(&d.join("l.csv"))[0][2].parse().unwrap();
    assert!((xi - 1.636455323169235).abs() < 1e-12);
}

#[test]
fn numeric_fields_carry_17_significant_digits() {
    let dir = TempDir::new().unwrap();
    ok(dir.path(), &["bound-table", "--table2", "--out", "t.csv"]);
    for row in rows(&dir.path().join("t.csv")) {
        for field in &row[1..4] {
            let mantissa = field.split('e').next().unwrap().replace(['-', '.'], "");
            assert_eq!(mantissa.len(), 17, "{field}");
            let v: f64 = field.parse().unwrap();
            assert_eq!(effdim::format_float(v), *field);
        }
    }
}

#[test]
fn random_sweep_row_count_and_schema() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    ok(d, &["sweep", "--kind", "random", "--fractions", "0.2,0.4,0.6,0.8,1.0", "--repeats", "10", "--hidden", "4,4", "--epochs", "3", "--train-size", "60", "--test-size", "40", "--out", "s.csv"]);
    assert_eq!(header(&d.join("s.csv")), golden("sweep_header.csv"));
    assert_eq!(header(&d.join("s.csv.summary.csv")), golden("summary_header.csv"));
    let r = rows(&d.join("s.csv"));
    assert_eq!(r.len(), 50);
    assert!(r.iter().all(|row| row[0] == "random" && row[12] == "midpoint"));
    assert_eq!(rows(&d.join("s.csv.summary.csv")).len(), 5);
}

#[test]
fn size_sweep_structure() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    ok(d, &["sweep", "--kind", "size", "--sizes", "8,16,32,64", "--repeats", "1", "--dataset", "blobs", "--noise", "0.5", "--epochs", "5", "--out", "z.csv", "--summary", "zs.csv"]);
    let r = rows(&d.join("z.csv"));
    assert_eq!(r.len(), 4);
    let ds: Vec<usize> = r.iter().map(|row| row[1].parse().unwrap()).collect();
    assert!(ds.windows(2).all(|w| w[1] > w[0]));
    for g in rows(&d.join("zs.csv")) {
        assert_eq!(g[3], "1");
        assert_eq!(g[5].parse::<f64>().unwrap(), 0.0);
        assert_eq!(g[7].parse::<f64>().unwrap(), 0.0);
    }
}

fn idx(magic: u32, dims: &[u32], payload: &[u8]) -> Vec<u8> {
    let mut out = magic.to_be_bytes().to_vec();
    for d in dims {
        out.extend_from_slice(&d.to_be_bytes());
    }
    out.extend_from_slice(payload);
    out
}

fn write_mnist(dir: &Path, count: u32, label_override: Option<u8>) {
    let px: Vec<u8> = (0..count * 16).map(|i| (i * 37 % 256) as u8).collect();
    let mut labels: Vec<u8> = (0..count).map(|i| (i % 10) as u8).collect();
    if let Some(l) = label_override {
        labels[0] = l;
    }
    for prefix in ["train", "t10k"] {
        fs::write(dir.join(format!("{prefix}-images-idx3-ubyte")), idx(0x803, &[count, 4, 4], &px)).unwrap();
        fs::write(dir.join(format!("{prefix}-labels-idx1-ubyte")), idx(0x801, &[count], &labels)).unwrap();
    }
}

#[test]
fn mnist_directory_ingestion() {
    let dir = TempDir::new().unwrap();
    let data = dir.path().join("mnist");
    fs::create_dir(&data).unwrap();
    write_mnist(&data, 40, None);
    let ds = data.to_str().unwrap();
    ok(dir.path(), &["train", "--dataset", ds, "--hidden", "5,5", "--epochs", "2", "--batch", "10", "--out", "m.json"]);
    let ck = json(&dir.path().join("m.json"));
    assert_eq!(ck["arch"]["widths"], serde_json::json!([16, 5, 5, 10]));
    assert_eq!(ck["training"]["train_size"], 40);
    let manifest = json(&dir.path().join("m.json.manifest.json"));
    let inputs = manifest["inputs"].as_array().unwrap();
    assert_eq!(inputs.len(), 4);
    assert_eq!(inputs[0]["fnv1a64"].as_str().unwrap().len(), 16);

    write_mnist(&data, 40, Some(10));
    let out = run(dir.path(), &["train", "--dataset", ds, "--hidden", "5,5", "--batch", "10", "--out", "x.json"]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("label 10"));

    write_mnist(&data, 40, None);
    let img = data.join("train-images-idx3-ubyte");
    let bytes = fs::read(&img).unwrap();
    fs::write(&img, &bytes[..bytes.len() - 1]).unwrap();
    assert_eq!(code(&run(dir.path(), &["train", "--dataset", ds, "--hidden", "5,5", "--batch", "10", "--out", "x.json"])), 2);

    let mut swapped = bytes.clone();
    swapped[3] = 0x01;
    fs::write(&img, &swapped).unwrap();
    let out = run(dir.path(), &["train", "--dataset", ds, "--hidden", "5,5", "--batch", "10", "--out", "x.json"]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("0x00000803"));
}
