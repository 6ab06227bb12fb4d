use std::path::Path;
use std::process::{Command, Output};

use lapcg::io::{read_trace_csv, write_grid_csv};
use lapcg::rhs;
use serde_json::Value;

fn lapcg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lapcg"))
        .args(args)
        .output()
        .unwrap()
}

fn json(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).unwrap()
}

fn traces(dir: &Path) -> [Vec<lapcg::io::TraceRow>; 2] {
    ["cg", "newcg"].map(|a| {
        read_trace_csv(std::fs::File::open(dir.join(format!("trace_{a}.csv"))).unwrap()).unwrap()
    })
}

#[test]
fn fixed_point_curves_overlay() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let out = lapcg(&[
        "solve",
        "--n",
        "16",
        "--algo",
        "both",
        "--precision",
        "50,20",
        "--tol",
        "1e-6",
        "--trace-dir",
        d,
    ]);
    let v = json(&out);
    assert_eq!(v["results"].as_array().unwrap().len(), 2);
    let [cg, newcg] = traces(dir.path());
    assert_eq!(
        cg.len() as u64,
        v["results"][0]["iterations"].as_u64().unwrap()
    );
    for (a, b) in cg.iter().zip(&newcg) {
        assert_eq!(a.iter, b.iter);
        assert!(
            (a.relres.log10() - b.relres.log10()).abs() <= 0.5,
            "{a:?} {b:?}"
        );
    }
}

#[test]
fn one_by_one() {
    let v = json(&lapcg(&[
        "solve",
        "--n",
        "1",
        "--rhs",
        "ones",
        "--emit-solution",
    ]));
    for r in v["results"].as_array().unwrap() {
        assert_eq!(r["iterations"], 1);
        assert_eq!(r["solution"][0].as_f64(), Some(0.25));
    }
}

#[test]
fn manufactured_solution_is_recovered() {
    let v = json(&lapcg(&[
        "solve",
        "--n",
        "8",
        "--precision",
        "double",
        "--rhs",
        "manufactured",
        "--seed",
        "7",
        "--tol",
        "1e-12",
    ]));
    for r in v["results"].as_array().unwrap() {
        assert!(r["error_vs_exact"].as_f64().unwrap() < 1e-8, "{r}");
    }
}

#[test]
fn rhs_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("b.csv");
    write_grid_csv(
        std::fs::File::create(&path).unwrap(),
        &rhs::uniform_grid(4, 3).unwrap(),
    )
    .unwrap();
    let p = path.to_str().unwrap();
    let v = json(&lapcg(&[
        "solve",
        "--n",
        "4",
        "--precision",
        "double",
        "--rhs",
        "file",
        "--rhs-file",
        p,
    ]));
    assert_eq!(v["config"]["rhs_file"], p);
    assert_eq!(v["results"][0]["converged"], true);
    // Side mismatch is a usage error.
    assert_eq!(
        lapcg(&["solve", "--n", "5", "--rhs", "file", "--rhs-file", p])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn report_header_echoes_resolved_config() {
    let v = json(&lapcg(&[
        "solve",
        "--n",
        "8",
        "--v",
        "2",
        "--h",
        "2",
        "--decomp",
        "2d",
        "--max-iter",
        "5",
    ]));
    assert_eq!(v["tool"], "lapcg");
    assert_eq!(v["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(v["command"], "solve");
    let c = &v["config"];
    assert_eq!(
        (c["n"].as_u64(), c["v"].as_u64(), c["h"].as_u64()),
        (Some(8), Some(2), Some(2))
    );
    assert_eq!(c["decomp"], "2d");
    assert_eq!(c["precision"], "50,20");
    assert_eq!(c["max_iter"], 5);
    assert_eq!(c["tol"].as_f64(), Some(1e-6));

    let v = json(&lapcg(&[
        "latency",
        "--n",
        "16",
        "--factors",
        "1",
        "--a-mul",
        "5",
    ]));
    assert_eq!(v["config"]["a_mul"], 5);
    assert_eq!(v["config"]["b_add"], 2);
    assert_eq!(v["config"]["n"], serde_json::json!([16]));
}

#[test]
fn exit_codes() {
    assert_eq!(lapcg(&["solve"]).status.code(), Some(1));
    assert_eq!(lapcg(&["bogus"]).status.code(), Some(1));
    assert_eq!(
        lapcg(&["solve", "--n", "4", "--tol", "-1"]).status.code(),
        Some(1)
    );
    assert_eq!(lapcg(&["latency", "--a-mul", "0"]).status.code(), Some(1));
    let out = lapcg(&[
        "solve",
        "--n",
        "2",
        "--precision",
        "8,8",
        "--rhs",
        "manufactured",
        "--seed",
        "3",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("breakdown"));
    assert_eq!(
        lapcg(&["solve", "--n", "10", "--v", "4"]).status.code(),
        Some(3)
    );
    assert_eq!(
        lapcg(&["solve", "--n", "8", "--v", "3", "--h", "2", "--decomp", "2d"])
            .status
            .code(),
        Some(3)
    );
    assert_eq!(lapcg(&["sweep", "--cells", "2:16"]).status.code(), Some(3));
    assert_eq!(lapcg(&["--version"]).status.code(), Some(0));
}

#[test]
fn latency_table_shape() {
    let v = json(&lapcg(&[
        "latency",
        "--n",
        "40,3",
        "--factors",
        "1,2,4,8,16",
    ]));
    let rows = v["results"].as_array().unwrap();
    assert_eq!(rows.len(), 10);
    let cg: Vec<u64> = rows[..5]
        .iter()
        .map(|r| r["cg"]["per_iteration"].as_u64().unwrap())
        .collect();
    assert!(cg.windows(2).all(|w| w[1] < w[0]), "{cg:?}");
    for r in &rows[..5] {
        let ratio = r["ratio_newcg_cg"].as_f64().unwrap();
        assert!((0.40..=0.65).contains(&ratio));
    }
    assert_eq!(rows[0]["interfaces"], 0);
    // 16 lanes on a side of 3 is reported in the row, not fatal.
    assert!(rows[9]["error"].is_string());
    assert!(rows[9]["cg"].is_null());
}

#[test]
fn padding_table_shape() {
    let v = json(&lapcg(&[
        "padding",
        "--n",
        "16,100",
        "--factors",
        "2,4,8,16",
    ]));
    let rows = v["results"].as_array().unwrap();
    assert!(rows[0]["padding_2d"].is_null());
    assert!(rows[1]["padding_2d"].as_u64() < rows[1]["padding_1d"].as_u64());
    let last = &rows[7];
    assert_eq!(
        (last["n"].as_u64(), last["factor"].as_u64()),
        (Some(100), Some(16))
    );
    assert!(last["ratio"].as_f64().unwrap() <= 0.6);
}

#[test]
fn outputs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let run = |tag: &str| {
        let sub = dir.path().join(tag);
        let json = sub.join("s.json");
        std::fs::create_dir_all(&sub).unwrap();
        let out = lapcg(&[
            "solve",
            "--n",
            "8",
            "--rhs",
            "manufactured",
            "--seed",
            "5",
            "--trace-dir",
            sub.to_str().unwrap(),
            "--output",
            json.to_str().unwrap(),
        ]);
        assert!(out.status.success());
        assert!(out.stdout.is_empty());
        ["s.json", "trace_cg.csv", "trace_newcg.csv"].map(|f| std::fs::read(sub.join(f)).unwrap())
    };
    assert_eq!(run("a"), run("b"));
    let sweep = |jobs: &str| lapcg(&["sweep", "--cells", "16:1,4;32:1,8", "--jobs", jobs]).stdout;
    assert_eq!(sweep("1"), sweep("3"));
}
