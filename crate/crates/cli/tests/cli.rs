use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn zeropoint(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_zeropoint"))
        .args(args)
        .current_dir(dir)
        .env_remove("ZEROPOINT_OUT")
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// Every file under `dir`, sorted by name, with contents.
fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect();
    files.sort();
    files
}

const PISTON: &str = "a = 1.0\nlength = 10.0\ncutoff = \"erfc\"\nmethods = [\"abel\", \"riesz:2\"]\n";

const SWEEP: &str = r#"
grid = { min = 20.0, max = 2000.0, points = 16 }
save_spectra = true

[spectrum]
kind = "interval"
lengths = [1.0, 2.5]
bc = "dirichlet"
omega_max = 12100.0
mass_squared = 0.5

[reference]
kind = "interval"
lengths = [1.75, 1.75]
bc = "dirichlet"
omega_max = 12100.0
mass_squared = 0.5
"#;

#[test]
fn piston_report_matches_the_zeta_oracle() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(tmp.path(), "piston.toml", PISTON);
    let o = zeropoint(&["piston", "--config", cfg.to_str().unwrap()], tmp.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("passed = true"), "{text}");
    let field = |k: &str| -> f64 {
        let line = text.lines().find(|l| l.starts_with(&format!("{k} = "))).unwrap();
        line.split(" = ").nth(1).unwrap().parse().unwrap()
    };
    let oracle = -std::f64::consts::PI / 24.0 * (1.0 + 1.0 / 9.0 - 4.0 / 10.0);
    assert_eq!(field("zeta_oracle"), oracle);
    assert!((field("energy_difference") / oracle - 1.0).abs() < 5e-3);
    assert!((field("energy[abel]") / oracle - 1.0).abs() < 1e-2);
}

#[test]
fn rigid_motion_certifies_and_writes_a_certificate() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(
        tmp.path(),
        "c.toml",
        r#"
rigid_motion_trials = 5
seed = 11
[a]
dimension = 3
ir_box = { shape = "box", lengths = [20.0, 20.0, 20.0] }
bodies = [{ shape = "sphere", radius = 1.5 }, { shape = "sphere", radius = 0.5, thin = true }]
[b]
dimension = 3
ir_box = { shape = "box", lengths = [20.0, 20.0, 20.0] }
bodies = [{ shape = "sphere", radius = 1.5, position = [4.0, 0.0, 0.0] }, { shape = "sphere", radius = 0.5, thin = true }]
"#,
    );
    let o = zeropoint(&["certify", "--config", "c.toml", "--out", "cert"], tmp.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(cfg.parent().unwrap().join("cert/report.txt")).unwrap();
    assert!(text.contains("certified = true"));
    assert!(text.contains("rigid_motion_certified = 5"));
    assert!(text.contains("rule: a_1/2: every integral cancels"));
}

#[test]
fn outputs_are_byte_identical_across_runs_and_thread_counts() {
    let tmp = TempDir::new().unwrap();
    write(tmp.path(), "sweep.toml", SWEEP);
    write(tmp.path(), "cert.toml", include_str!("../../../configs/certify.toml"));
    for (cmd, cfg) in [("sweep", "sweep.toml"), ("certify", "cert.toml")] {
        for format in ["text", "csv", "jsonl"] {
            let mut runs = Vec::new();
            for (i, jobs) in ["1", "4", "4"].iter().enumerate() {
                let out = format!("{cmd}-{format}-{i}");
                let o = zeropoint(
                    &[cmd, "--config", cfg, "--out", &out, "--format", format, "--jobs", jobs],
                    tmp.path(),
                );
                assert!(o.status.success(), "{}", stderr(&o));
                runs.push(snapshot(&tmp.path().join(out)));
            }
            assert!(!runs[0].is_empty());
            assert_eq!(runs[0], runs[1], "{cmd} {format}: --jobs changed the output");
            assert_eq!(runs[1], runs[2], "{cmd} {format}: reruns differ");
        }
    }
}

#[test]
fn csv_sweep_rows_round_trip_every_bit() {
    let tmp = TempDir::new().unwrap();
    write(tmp.path(), "sweep.toml", SWEEP);
    let o = zeropoint(&["sweep", "--config", "sweep.toml", "--out", "o", "--format", "csv"], tmp.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let files: Vec<String> = snapshot(&tmp.path().join("o")).into_iter().map(|(n, _)| n).collect();
    for f in ["summary.csv", "fit.csv", "sweep.csv", "spectrum.csv", "spectrum.meta.toml", "reference.csv"] {
        assert!(files.contains(&f.to_string()), "{files:?}");
    }
    let sweep = fs::read_to_string(tmp.path().join("o/sweep.csv")).unwrap();
    let mut lines = sweep.lines();
    assert_eq!(lines.next(), Some("omega_cutoff,value"));
    let mut rows = 0;
    for line in lines {
        for cell in line.split(',') {
            let x: f64 = cell.parse().unwrap();
            assert_eq!(format!("{x:.16e}"), cell);
        }
        rows += 1;
    }
    assert_eq!(rows, 16);
}

#[test]
fn jsonl_has_a_summary_then_one_record_per_row() {
    let tmp = TempDir::new().unwrap();
    write(
        tmp.path(),
        "h.toml",
        "[spectrum]\nkind = \"interval\"\nlengths = [1.0]\nbc = \"dirichlet\"\nomega_max = 4000.0\n",
    );
    let o = zeropoint(&["heat-fit", "--config", "h.toml", "--format", "jsonl"], tmp.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let text = String::from_utf8(o.stdout).unwrap();
    let records: Vec<serde_json::Value> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(records[0]["record"], "summary");
    let coeffs: Vec<_> = records.iter().filter(|r| r["record"] == "coefficients").collect();
    assert_eq!(coeffs.len(), 3);
    assert_eq!(coeffs[0]["index"], "a_0");
    assert!((coeffs[0]["coefficient"].as_f64().unwrap() - 1.0).abs() < 1e-4);
    assert!(coeffs[1]["standard_error"].is_number());
}

#[test]
fn output_directory_precedence() {
    let tmp = TempDir::new().unwrap();
    write(tmp.path(), "i.toml", "output = \"from-config\"\nomega_min = 0.1\nomega_max = 10.0\npoints = 3\n");
    let run = |env: Option<&str>, flag: Option<&str>| {
        let mut c = Command::new(env!("CARGO_BIN_EXE_zeropoint"));
        c.args(["identity-check", "--config", "i.toml"]).current_dir(tmp.path());
        c.env_remove("ZEROPOINT_OUT");
        if let Some(e) = env {
            c.env("ZEROPOINT_OUT", tmp.path().join(e));
        }
        if let Some(f) = flag {
            c.args(["--out", f]);
        }
        assert!(c.output().unwrap().status.success());
    };
    run(None, None);
    assert!(tmp.path().join("from-config/report.txt").exists());
    run(Some("from-env"), None);
    assert!(tmp.path().join("from-env/report.txt").exists());
    run(Some("env-ignored"), Some("from-flag"));
    assert!(tmp.path().join("from-flag/report.txt").exists());
    assert!(!tmp.path().join("env-ignored").exists());
}

struct Fault {
    name: &'static str,
    command: &'static str,
    config: &'static str,
    code: i32,
    message: &'static str,
}

const FAULTS: &[Fault] = &[
    Fault {
        name: "malformed toml",
        command: "piston",
        config: "a = 1.0\nlength = = 10\n",
        code: 1,
        message: "parse error",
    },
    Fault {
        name: "unknown key",
        command: "piston",
        config: "a = 1.0\nlength = 10.0\nwidth = 3.0\n",
        code: 1,
        message: "unknown field `width`",
    },
    Fault {
        name: "unknown cutoff",
        command: "piston",
        config: "a = 1.0\nlength = 10.0\ncutoff = \"lorentz\"\n",
        code: 1,
        message: "unsupported cutoff",
    },
    Fault {
        name: "wall outside the interval",
        command: "piston",
        config: "a = 12.0\nlength = 10.0\n",
        code: 1,
        message: "invalid argument",
    },
    Fault {
        name: "too many modes for the grid",
        command: "heat-fit",
        config: "[spectrum]\nkind = \"schrodinger\"\nlength = 1.0\nbc = \"dirichlet\"\ngrid_points = 64\ncount = 40\npotential = { kind = \"constant\", value = 0.0 }\n",
        code: 1,
        message: "uv validity",
    },
    Fault {
        name: "tachyonic mass",
        command: "heat-fit",
        config: "[spectrum]\nkind = \"interval\"\nlengths = [1.0]\nbc = \"dirichlet\"\nomega_max = 100.0\nmass_squared = -100.0\n",
        code: 2,
        message: "imaginary frequency",
    },
    Fault {
        name: "resummation does not settle",
        command: "piston",
        config: "a = 1.0\nlength = 10.0\nomega_top = 3.0\npoints = 8\nmethods = [\"abel\"]\noracle_tolerance = 10.0\n",
        code: 2,
        message: "non-convergence",
    },
    Fault {
        name: "spectrum too short for the cutoff",
        command: "div-fit",
        config: "cutoff = \"gauss\"\ngrid = { min = 20.0, max = 2000.0, points = 24 }\n[spectrum]\nkind = \"interval\"\nlengths = [1.0]\nbc = \"periodic\"\nomega_max = 12100.0\n",
        code: 3,
        message: "truncation",
    },
    Fault {
        name: "mode cap",
        command: "sweep",
        config: "grid = { min = 1.0, max = 10.0, points = 8 }\n[spectrum]\nkind = \"box\"\nlengths = [1.0, 1.0, 1.0]\nbc = \"dirichlet\"\nomega_max = 300.0\nmode_cap = 1000\n",
        code: 3,
        message: "mode cap",
    },
    Fault {
        name: "missing spectrum file",
        command: "heat-fit",
        config: "[spectrum]\nkind = \"file\"\npath = \"nowhere.csv\"\n",
        code: 3,
        message: "io error",
    },
];

#[test]
fn every_fault_exits_with_its_class_and_writes_nothing() {
    let tmp = TempDir::new().unwrap();
    for f in FAULTS {
        let cfg = write(tmp.path(), "fault.toml", f.config);
        let out = tmp.path().join("out");
        let o = zeropoint(
            &[f.command, "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()],
            tmp.path(),
        );
        assert_eq!(o.status.code(), Some(f.code), "{}: {}", f.name, stderr(&o));
        let err = stderr(&o);
        assert!(err.starts_with("error: ") && err.contains(f.message), "{}: {err}", f.name);
        assert!(o.stdout.is_empty(), "{}", f.name);
        assert!(!out.exists(), "{}: partial artifacts", f.name);
    }
}

#[test]
fn usage_errors_exit_1() {
    let tmp = TempDir::new().unwrap();
    write(tmp.path(), "i.toml", "omega_min = 0.1\nomega_max = 10.0\n");
    for args in [
        vec!["frobnicate"],
        vec!["identity-check"],
        vec!["identity-check", "--config", "i.toml", "--format", "xml"],
        vec!["identity-check", "--config", "i.toml", "--jobs", "0"],
    ] {
        let o = zeropoint(&args, tmp.path());
        assert_eq!(o.status.code(), Some(1), "{args:?}: {}", stderr(&o));
    }
}

#[test]
fn unwritable_output_is_a_resource_error() {
    let tmp = TempDir::new().unwrap();
    write(tmp.path(), "i.toml", "omega_min = 0.1\nomega_max = 10.0\npoints = 3\n");
    write(tmp.path(), "blocker", "");
    let o = zeropoint(&["identity-check", "--config", "i.toml", "--out", "blocker/sub"], tmp.path());
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    let o = zeropoint(&["identity-check", "--config", "absent.toml"], tmp.path());
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

#[test]
fn failed_checks_keep_their_artifacts_and_exit_2() {
    let tmp = TempDir::new().unwrap();
    write(tmp.path(), "i.toml", "omega_min = 0.1\nomega_max = 10.0\npoints = 4\ntolerance = 1e-300\n");
    let o = zeropoint(&["identity-check", "--config", "i.toml", "--out", "o"], tmp.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("check failed"));
    let text = fs::read_to_string(tmp.path().join("o/report.txt")).unwrap();
    assert!(text.contains("passed = false"));
}

#[test]
fn sample_configs_run() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let tmp = TempDir::new().unwrap();
    for (cmd, file) in [
        ("identity-check", "identity.toml"),
        ("sweep", "sweep.toml"),
        ("heat-fit", "heat_fit.toml"),
        ("div-fit", "div_fit.toml"),
        ("certify", "certify.toml"),
        ("certify", "certify_rigid.toml"),
        ("refmodel", "refmodel.toml"),
        ("cutoff-invert", "cutoff_invert.toml"),
        ("piston", "piston.toml"),
    ] {
        let cfg = root.join(file);
        let out = tmp.path().join(file);
        let o = zeropoint(&[cmd, "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()], tmp.path());
        assert!(o.status.success(), "{file}: {}", stderr(&o));
        assert!(out.join("report.txt").exists());
    }
}
