use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_abcut"));
    c.env("ABCUT_THREADS", "2");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}): {}\nstderr: {}",
            String::from_utf8_lossy(&out.stdout),
            String::from_utf8_lossy(&out.stderr)
        )
    })
}

fn gen(dir: &Path, family: &str, file: &str) -> PathBuf {
    let p = dir.join(file);
    let out = run(&["gen", family, "-o", p.to_str().unwrap()]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn gen_round_trips_adjacency() {
    let dir = TempDir::new().unwrap();
    for (family, file) in [
        ("cycle:8", "c8.json"),
        ("hypercube:3", "q3.json"),
        ("random:24:4:7", "r.json"),
    ] {
        let p = gen(dir.path(), family, file);
        let spec: abcut::group::GraphSpec =
            serde_json::from_str(&std::fs::read_to_string(&p).unwrap()).unwrap();
        let g = spec.build().unwrap();
        let again = abcut::group::GraphSpec::build(&g.to_spec()).unwrap();
        for u in 0..g.n() {
            for v in 0..g.n() {
                assert_eq!(g.adjacency(u, v), again.adjacency(u, v));
            }
        }
        if family.starts_with("random") {
            let prov = g.provenance().unwrap();
            assert!(abcut::group::validate_generators(&prov.group, &prov.generators).is_ok());
            assert_eq!(g.regular_degree(), Some(4));
        }
    }
    let c8 = abcut::corpus::cycle(8).unwrap();
    let read: abcut::group::GraphSpec =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("c8.json")).unwrap())
            .unwrap();
    assert_eq!(read, c8.to_spec());
}

#[test]
fn gen_rejects_bad_families() {
    assert_eq!(run(&["gen", "cycle:2"]).status.code(), Some(2));
    assert_eq!(run(&["gen", "nonsense:3"]).status.code(), Some(2));
    assert_eq!(run(&["gen", "cycle:4..8"]).status.code(), Some(2));
}

#[test]
fn fiedler_on_q3_is_a_facet() {
    let dir = TempDir::new().unwrap();
    let p = gen(dir.path(), "hypercube:3", "q3.json");
    let out = run(&["cut", s(&p), "--algo", "fiedler"]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["row"]["phi"].as_f64().unwrap(), 1.0 / 3.0);
    assert_eq!(v["vertices"].as_array().unwrap().len(), 4);
}

#[test]
fn enum_on_c16_matches_brute_and_appends_csv() {
    let dir = TempDir::new().unwrap();
    let p = gen(dir.path(), "cycle:16", "c16.json");
    let csv = dir.path().join("rows.csv");
    for algo in ["brute", "enum"] {
        let out = run(&["cut", s(&p), "--algo", algo, "--csv", s(&csv)]);
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
        let v = json(&out);
        assert_eq!(v["row"]["ratio"].as_f64().unwrap(), 1.0);
        assert_eq!(v["row"]["phi"].as_f64().unwrap(), 0.125);
    }
    let text = std::fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(
        lines[0],
        "graph,n,d,algo,phi,psi,phi_opt,ratio,wall_ms,seed"
    );
    assert_eq!(lines.len(), 3);
    assert!(lines[2].starts_with("c16,16,2,enum,0.125,"));
}

#[test]
fn advice_uses_the_fiedler_cut_by_default() {
    let dir = TempDir::new().unwrap();
    let p = gen(dir.path(), "cycle:8", "c8.json");
    let out = run(&["cut", s(&p), "--algo", "advice"]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v = json(&out);
    assert_eq!(v["row"]["psi"].as_f64().unwrap(), 0.125);
    assert!(v["details"]["lower_bound"].as_f64().unwrap() <= 0.125 + 1e-6);
}

#[test]
fn zpn_cut_and_command() {
    let dir = TempDir::new().unwrap();
    let p = gen(dir.path(), "cycle:5", "z5.json");
    let out = run(&["cut", s(&p), "--algo", "zpn"]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v = json(&out);
    assert!(v["details"]["lower_holds"].as_bool().unwrap());
    assert!((v["details"]["lambda2_prime"].as_f64().unwrap() - 1.25).abs() < 1e-12);

    let out = run(&["zpn", "--p", "5", "--dim", "2", "--gens", "1,0;0,1"]);
    assert!(out.status.success());
    assert!(json(&out)["holds"].as_bool().unwrap());
    assert_eq!(run(&["zpn", "--p", "9"]).status.code(), Some(2));
    assert_eq!(run(&["zpn", "--p", "2"]).status.code(), Some(2));

    let c8 = gen(dir.path(), "cycle:8", "c8.json");
    assert_eq!(
        run(&["cut", s(&c8), "--algo", "zpn"]).status.code(),
        Some(2)
    );
}

#[test]
fn size_guards_exit_four() {
    let dir = TempDir::new().unwrap();
    let p = gen(dir.path(), "cycle:40", "c40.json");
    assert_eq!(
        run(&["cut", s(&p), "--algo", "brute"]).status.code(),
        Some(4)
    );
    assert_eq!(
        run(&["cut", s(&p), "--algo", "enum", "--kmax", "2"])
            .status
            .code(),
        Some(4)
    );
    assert_eq!(run(&["cutdim", s(&p)]).status.code(), Some(4));
}

#[test]
fn missing_or_malformed_inputs_exit_two() {
    let dir = TempDir::new().unwrap();
    assert_eq!(
        run(&["spectrum", "/definitely/not/here.json"])
            .status
            .code(),
        Some(2)
    );
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"n\": 3, \"edges\": [[0, 5, 1]]}").unwrap();
    assert_eq!(run(&["spectrum", s(&bad)]).status.code(), Some(2));
    let asym = dir.path().join("asym.json");
    std::fs::write(&asym, "{\"adjacency\": [[0, 1], [0, 0]]}").unwrap();
    assert_eq!(run(&["spectrum", s(&asym)]).status.code(), Some(2));
}

#[test]
fn spectrum_and_collision_reports() {
    let dir = TempDir::new().unwrap();
    let p = gen(dir.path(), "hypercube:3", "q3.json");
    let v = json(&run(&["spectrum", s(&p), "--tau", "0.7"]));
    assert_eq!(v["method"], "characters");
    assert_eq!(v["threshold_rank"], 4);
    let dense = json(&run(&["spectrum", s(&p), "--dense"]));
    let a: Vec<f64> = serde_json::from_value(v["eigenvalues"].clone()).unwrap();
    let b: Vec<f64> = serde_json::from_value(dense["eigenvalues"].clone()).unwrap();
    assert!(a.iter().zip(&b).all(|(x, y)| (x - y).abs() < 1e-8));

    let out = run(&[
        "collision",
        s(&p),
        "--t-max",
        "16",
        "--tau",
        "0.6666666666666666,1.3333333333333333",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let c = json(&out);
    assert!(c["holds"].as_bool().unwrap());
    assert_eq!(c["certificates"].as_array().unwrap().len(), 2);
}

#[test]
fn cutdim_of_small_graphs() {
    let dir = TempDir::new().unwrap();
    let c8 = gen(dir.path(), "cycle:8", "c8.json");
    let v = json(&run(&["cutdim", s(&c8), "--eps", "0.2"]));
    assert_eq!(v["result"]["k"], 3);
    let q3 = gen(dir.path(), "hypercube:3", "q3.json");
    let v = json(&run(&["cutdim", s(&q3), "--eps", "0"]));
    assert_eq!(v["result"]["k"], 2);
}

#[test]
fn codes_from_file_and_builtin() {
    let dir = TempDir::new().unwrap();
    let m = dir.path().join("h.txt");
    std::fs::write(&m, "# [7,4] Hamming\n1000110\n0100101\n0010011\n0001111\n").unwrap();
    let v = json(&run(&["codes", "--generator-matrix", s(&m)]));
    assert_eq!(
        (v["distance"].as_u64(), v["min_weight_count"].as_u64()),
        (Some(3), Some(7))
    );
    assert!(v["holds"].as_bool().unwrap());
    let v = json(&run(&["codes", "--builtin", "identity:3"]));
    assert_eq!(v["spectrum"]["lambda2"].as_f64().unwrap(), 2.0 / 3.0);
    let rank_deficient = dir.path().join("r.txt");
    std::fs::write(&rank_deficient, "110\n110\n").unwrap();
    assert_eq!(
        run(&["codes", "--generator-matrix", s(&rank_deficient)])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn verify_reports_corruption() {
    let dir = TempDir::new().unwrap();
    gen(dir.path(), "cycle:8", "c8.json");
    std::fs::write(
        dir.path().join("broken.json"),
        "{\"adjacency\": [[0,1,1,0],[1,0,1,0],[0,1,0,1],[1,0,1,0]]}",
    )
    .unwrap();
    let out = run(&["verify", "structure", "spectral", "--graphs", s(dir.path())]);
    assert_eq!(out.status.code(), Some(3));
    let v = json(&out);
    let broken: Vec<&serde_json::Value> = v["checks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["target"] == "broken" && c["suite"] == "structure")
        .collect();
    assert_eq!(broken[0]["status"], "fail");
    assert!(v["checks"]
        .as_array()
        .unwrap()
        .iter()
        .any(|c| c["target"] == "c8" && c["status"] == "pass"));
}

#[test]
fn verify_empty_corpus_warns() {
    let dir = TempDir::new().unwrap();
    let out = run(&["verify", "spectral", "--graphs", s(dir.path())]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning"));
    assert!(json(&out)["passed"].as_bool().unwrap());
}

#[test]
fn verify_small_graph_suites_pass() {
    let dir = TempDir::new().unwrap();
    gen(dir.path(), "cycle:8", "c8.json");
    gen(dir.path(), "torus:3x4", "t.json");
    let out = run(&[
        "verify",
        "--graphs",
        s(dir.path()),
        "--t-max",
        "16",
        "--random-cuts",
        "20",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

fn data_rows(path: &Path) -> Vec<String> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(String::from)
        .collect()
}

#[test]
fn experiment_rows_determinism_and_resume() {
    let dir = TempDir::new().unwrap();
    let out1 = dir.path().join("a.csv");
    let out2 = dir.path().join("b.csv");
    let args = |o: &Path| {
        vec![
            "experiment".to_string(),
            "--families".into(),
            "cycle:8..64:8".into(),
            "--algos".into(),
            "fiedler,enum".into(),
            "--seed".into(),
            "3".into(),
            "-o".into(),
            o.to_str().unwrap().to_string(),
        ]
    };
    let st = bin().args(args(&out1)).output().unwrap();
    assert!(
        st.status.success(),
        "{}",
        String::from_utf8_lossy(&st.stderr)
    );
    let rows = data_rows(&out1);
    assert_eq!(rows.len(), 1 + 2 * 8);
    assert!(rows[1..].iter().all(|r| r.ends_with(",ok")), "{rows:?}");
    assert!(bin().args(args(&out2)).output().unwrap().status.success());
    assert_eq!(rows, data_rows(&out2));

    // drop the last row and a header-corrupted tail; a rerun restores them
    let text = std::fs::read_to_string(&out1).unwrap();
    let kept: Vec<&str> = text.lines().take(text.lines().count() - 1).collect();
    std::fs::write(&out1, kept.join("\n") + "\nC_64,64,2,en").unwrap();
    let st = bin().args(args(&out1)).output().unwrap();
    assert!(st.status.success());
    let log = String::from_utf8_lossy(&st.stderr);
    assert!(log.contains("1 computed, 15 reused"), "{log}");
    assert_eq!(rows, data_rows(&out1));
    assert!(!dir.path().join(".a.csv.tmp").exists());
}

#[test]
fn experiment_torus_ratios_within_four() {
    let dir = TempDir::new().unwrap();
    let spec = dir.path().join("spec.json");
    let out = dir.path().join("t.csv");
    std::fs::write(
        &spec,
        serde_json::json!({
            "families": ["torus:3x3", "torus:4x4", "torus:2x6", "torus:3x5", "torus:8x8"],
            "algorithms": ["fiedler", "enum"],
            "seed": 1,
            "output": out,
        })
        .to_string(),
    )
    .unwrap();
    let st = bin()
        .args(["experiment", "--spec", s(&spec)])
        .output()
        .unwrap();
    assert!(
        st.status.success(),
        "{}",
        String::from_utf8_lossy(&st.stderr)
    );
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(&out)
        .unwrap();
    let mut n = 0;
    for rec in rdr.deserialize::<std::collections::HashMap<String, String>>() {
        let rec = rec.unwrap();
        assert_eq!(rec["status"], "ok");
        let ratio: f64 = rec["ratio"].parse().unwrap();
        assert!(ratio <= 4.0, "{rec:?}");
        n += 1;
    }
    assert_eq!(n, 10);
}

#[test]
fn experiment_spec_with_missing_file_is_rejected() {
    let dir = TempDir::new().unwrap();
    let spec = dir.path().join("spec.json");
    std::fs::write(
        &spec,
        serde_json::json!({
            "families": ["file:/no/such/graph.json"],
            "algorithms": ["fiedler"],
            "output": dir.path().join("x.csv"),
        })
        .to_string(),
    )
    .unwrap();
    let st = bin()
        .args(["experiment", "--spec", s(&spec)])
        .output()
        .unwrap();
    assert_eq!(st.status.code(), Some(2));
}
