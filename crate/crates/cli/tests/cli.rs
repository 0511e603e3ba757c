use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use sha2::{Digest, Sha256};

fn cavsim(args: &[&str], env_out: Option<&Path>) -> Output {
    let mut c = Command::new(env!("CARGO_BIN_EXE_cavsim"));
    c.args(args).env_remove("CAVSIM_OUT");
    if let Some(d) = env_out {
        c.env("CAVSIM_OUT", d);
    }
    c.output().expect("spawn cavsim")
}

fn ok(args: &[&str]) -> Output {
    let o = cavsim(args, None);
    assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    o
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn files(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap())
        })
        .collect()
}

fn json(path: PathBuf) -> serde_json::Value {
    serde_json::from_slice(&fs::read(&path).unwrap()).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

fn csv_rows(path: PathBuf) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(&path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r.records().map(|x| x.unwrap().iter().map(String::from).collect()).collect();
    (header, rows)
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

/// Every file parses with its own format and the manifest hashes match.
fn check_outputs(dir: &Path) {
    let all = files(dir);
    let manifest: serde_json::Value = serde_json::from_slice(&all["manifest.json"]).unwrap();
    let listed = manifest["files"].as_array().unwrap();
    assert_eq!(listed.len() + 1, all.len());
    for entry in listed {
        let name = entry["path"].as_str().unwrap();
        let bytes = &all[name];
        let digest: String = Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect();
        assert_eq!(entry["sha256"].as_str().unwrap(), digest, "{name}");
        if name.ends_with(".json") {
            let v: serde_json::Value = serde_json::from_slice(bytes).unwrap();
            let mut again = serde_json::to_vec_pretty(&v).unwrap();
            again.push(b'\n');
            assert_eq!(&again, bytes, "{name} does not round-trip");
        } else {
            let mut r = csv::Reader::from_reader(bytes.as_slice());
            let width = r.headers().unwrap().len();
            assert!((2..=4).contains(&width), "{name}");
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(r.headers().unwrap()).unwrap();
            for rec in r.records() {
                let rec = rec.unwrap();
                assert_eq!(rec.len(), width);
                if name.contains("series") || name.contains("rates") {
                    for f in rec.iter() {
                        let v: f64 = f.parse().unwrap();
                        assert_eq!(format!("{v:?}"), f, "{name}");
                    }
                }
                w.write_record(&rec).unwrap();
            }
            assert_eq!(&w.into_inner().unwrap(), bytes, "{name} does not round-trip");
        }
    }
}

#[test]
fn loss_budget_table() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("t3");
    ok(&["--out", out.to_str().unwrap(), "reproduce", "table3"]);
    check_outputs(&out);
    let b = json(out.join("00_loss_budget_report.json"));
    let total = b["total_lifetime_s"].as_f64().unwrap();
    assert!((total / 0.120 - 1.0).abs() < 0.10, "{total}");
    let (header, rows) = csv_rows(out.join("00_loss_budget_table.csv"));
    assert_eq!(header[0], "channel");
    assert_eq!(rows.len(), 7);
}

#[test]
fn cooldown_table() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("t4");
    ok(&["--out", out.to_str().unwrap(), "reproduce", "table4"]);
    let r = json(out.join("00_cooldowns_report.json"));
    let rows = r["rows"].as_array().unwrap();
    let t2: Vec<f64> = rows.iter().map(|x| x["predicted_t2_s"].as_f64().unwrap()).collect();
    assert!((t2[0] / 1.2e-3 - 1.0).abs() < 0.15);
    assert!((t2[2] / 34e-3 - 1.0).abs() < 0.15);
    // the middle row overshoots its measured value; see the acceptance gate
    assert!((t2[1] - 1.433e-3).abs() < 0.01e-3, "{}", t2[1]);
}

#[test]
fn ringdown_report() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("f2");
    ok(&["--out", out.to_str().unwrap(), "reproduce", "fig2"]);
    check_outputs(&out);
    let r = json(out.join("00_ringdown_report.json"));
    let q = r["ringdown"]["q_loaded"].as_f64().unwrap();
    assert!((q / 3.0e9 - 1.0).abs() < 0.02);
    let tau_int = r["ringdown"]["tau_int"].as_f64().unwrap();
    assert!((tau_int / 0.14 - 1.0).abs() < 0.05);
}

#[test]
fn cat_decoherence_law() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("f5");
    ok(&["--out", out.to_str().unwrap(), "reproduce", "fig5"]);
    check_outputs(&out);
    let (header, rows) = csv_rows(out.join("00_cat_decoherence_rates.csv"));
    assert_eq!(header, vec!["size", "inv_t_d_per_s", "linear_law_per_s"]);
    let sizes: Vec<f64> = rows.iter().map(|r| r[0].parse().unwrap()).collect();
    assert_eq!(sizes, vec![4.0, 16.0, 36.0, 64.0]);
    for r in &rows {
        let (got, want): (f64, f64) = (r[1].parse().unwrap(), r[2].parse().unwrap());
        assert!((got / want - 1.0).abs() < 0.10);
    }
    let fit = json(out.join("00_cat_decoherence_fit.json"));
    let td = fit["extrapolated_t_d_s"].as_f64().unwrap();
    assert!((td / 50e-6 - 1.0).abs() < 0.10, "{td}");
}

#[test]
fn parity_calibration_period() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("h");
    ok(&["--out", out.to_str().unwrap(), "reproduce", "appendixH"]);
    check_outputs(&out);
    let fit = json(out.join("00_parity_calibration_fit.json"));
    assert!((fit["period_hz"].as_f64().unwrap() / 42e3 - 1.0).abs() < 0.01);
}

#[test]
fn reproduce_is_deterministic_across_thread_counts() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    ok(&["--out", a.to_str().unwrap(), "--threads", "1", "reproduce", "table1"]);
    ok(&["--out", b.to_str().unwrap(), "--threads", "3", "reproduce", "table1"]);
    assert_eq!(files(&a), files(&b));
    check_outputs(&a);
}

const NOISY_T1: &str = r#"{
  "name": "noisy_t1",
  "seed": 11,
  "experiments": [
    { "protocol": "t1", "delays_s": [0.0, 0.01, 0.02, 0.04], "shots": 500 },
    { "protocol": "kerr", "nbar": 256 }
  ]
}"#;

#[test]
fn seed_controls_only_shot_noise() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "t1.json", NOISY_T1);
    let run = |dir: &str, seed: Option<&str>| {
        let out = tmp.path().join(dir);
        let mut args = vec!["--out", out.to_str().unwrap()];
        if let Some(s) = seed {
            args.extend(["--seed", s]);
        }
        args.extend(["run", cfg.to_str().unwrap()]);
        ok(&args);
        out
    };
    let a = run("a", None);
    let b = run("b", None);
    let c = run("c", Some("12"));
    assert_eq!(files(&a), files(&b));
    check_outputs(&a);
    let (header, ra) = csv_rows(a.join("00_t1_series.csv"));
    let (_, rc) = csv_rows(c.join("00_t1_series.csv"));
    assert_eq!(header, vec!["delay_s", "p_f", "p_f_shots"]);
    for (x, y) in ra.iter().zip(&rc) {
        assert_eq!(x[1], y[1]);
    }
    assert_ne!(ra.iter().map(|r| &r[2]).collect::<Vec<_>>(), rc.iter().map(|r| &r[2]).collect::<Vec<_>>());
    let m = json(c.join("manifest.json"));
    assert_eq!(m["seed"].as_u64(), Some(12));
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("o");
    let o = out.to_str().unwrap();

    let bad = write_config(tmp.path(), "bad.json", "{ \"name\": ");
    assert_eq!(cavsim(&["--out", o, "run", bad.to_str().unwrap()], None).status.code(), Some(2));

    let missing = write_config(
        tmp.path(),
        "missing.json",
        r#"{ "name": "m", "experiments": [ { "protocol": "ringdown" } ] }"#,
    );
    let r = cavsim(&["--out", o, "run", missing.to_str().unwrap()], None);
    assert_eq!(r.status.code(), Some(3));
    assert!(stderr(&r).contains("experiments[0]") && stderr(&r).contains("tau_loaded_s"), "{}", stderr(&r));

    let device = write_config(tmp.path(), "device.json", r#"{ "name": "d", "device": { "t1_c_s": 0.0256 } }"#);
    let r = cavsim(&["--out", o, "run", device.to_str().unwrap()], None);
    assert_eq!(r.status.code(), Some(3));
    assert!(stderr(&r).contains("device"), "{}", stderr(&r));

    let unknown = write_config(tmp.path(), "unknown.json", r#"{ "name": "u", "experiments": [ { "protocol": "warp" } ] }"#);
    assert_eq!(cavsim(&["--out", o, "run", unknown.to_str().unwrap()], None).status.code(), Some(3));

    let unphysical = write_config(
        tmp.path(),
        "unphysical.json",
        r#"{ "name": "x", "experiments": [ { "protocol": "dephasing_budget",
             "t1_c_s": 0.0256, "t2_c_s": 0.040, "t_up_s": 0.092 } ] }"#,
    );
    let r = cavsim(&["--out", o, "run", unphysical.to_str().unwrap()], None);
    assert_eq!(r.status.code(), Some(4));
    assert!(stderr(&r).contains("unphysical"), "{}", stderr(&r));

    assert_eq!(cavsim(&["reproduce", "fig9"], None).status.code(), Some(2));
    assert_eq!(cavsim(&["--tolerance-scale", "-1", "reproduce", "table3"], None).status.code(), Some(2));
    let nofile = tmp.path().join("nope.json");
    assert_eq!(cavsim(&["--out", o, "run", nofile.to_str().unwrap()], None).status.code(), Some(4));
}

#[test]
fn output_directory_from_environment() {
    let tmp = tempfile::tempdir().unwrap();
    let o = cavsim(&["reproduce", "table3"], Some(tmp.path()));
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(tmp.path().join("table3").join("manifest.json").exists());
}

#[test]
fn budget_command() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "b.json",
        r#"{ "name": "welded", "loss": { "geometry": {
            "omega_c_over_2pi_hz": 4.301e9, "filling_factor": 1.4e-8, "geometry_factor_ohm": 210,
            "seam_admittance_per_ohm_m": 0, "p_bulk": 1e-4, "p_ma": 2.6134e-10, "p_ms": 2.6134e-10,
            "p_sa": 2.6134e-10, "external_kappa_over_2pi_hz": 0.096 } } }"#,
    );
    let out = tmp.path().join("b");
    ok(&["--out", out.to_str().unwrap(), "budget", cfg.to_str().unwrap()]);
    check_outputs(&out);
    let b = json(out.join("budget_report.json"));
    let seam = b["channels"].as_array().unwrap().iter().find(|c| c["name"] == "seam").unwrap();
    assert_eq!(seam["kappa_over_2pi_hz"].as_f64(), Some(0.0));
}

#[test]
fn fit_command() {
    let tmp = tempfile::tempdir().unwrap();
    let mut text = String::from("time_s,signal\n");
    for k in 0..30 {
        let t = 0.01 * k as f64;
        text.push_str(&format!("{t},{}\n", 0.9 * (-t / 0.110f64).exp() + 0.05));
    }
    let data = write_config(tmp.path(), "ring.csv", &text);
    let out = tmp.path().join("fit");
    let o = ok(&["--out", out.to_str().unwrap(), "fit", "exponential", data.to_str().unwrap()]);
    let stdout = String::from_utf8(o.stdout).unwrap();
    let printed: serde_json::Value = serde_json::from_str(stdout.split("\nwrote ").next().unwrap()).unwrap();
    let report = json(out.join("fit_exponential.json"));
    assert_eq!(printed, report);
    let tau = report["params"].as_array().unwrap().iter().find(|p| p["name"] == "tau").unwrap()["value"]
        .as_f64()
        .unwrap();
    assert!((tau / 0.110 - 1.0).abs() < 1e-6);
    check_outputs(&out);

    let headless = write_config(tmp.path(), "headless.csv", "0,1\n1,0.5\n2,0.25\n");
    assert_eq!(cavsim(&["--out", out.to_str().unwrap(), "fit", "exponential", headless.to_str().unwrap()], None).status.code(), Some(2));
    let flat = write_config(tmp.path(), "flat.csv", "x,y\n0,1\n1,1\n2,1\n3,1\n");
    assert_eq!(cavsim(&["--out", out.to_str().unwrap(), "fit", "exponential", flat.to_str().unwrap()], None).status.code(), Some(4));
}
