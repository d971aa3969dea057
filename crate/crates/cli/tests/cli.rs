use std::path::PathBuf;
use std::process::{Command, Output};

fn case(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "cases", name].iter().collect();
    p.display().to_string()
}

fn pfkit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pfkit"))
        .args(args)
        .env_remove("PFKIT_SEED")
        .output()
        .expect("failed to launch pfkit")
}

fn stdout(o: &Output) -> String {
    assert!(
        o.status.success(),
        "exit {:?}\nstderr: {}",
        o.status.code(),
        String::from_utf8_lossy(&o.stderr)
    );
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn data_rows(csv: &str) -> Vec<&str> {
    csv.lines().filter(|l| !l.starts_with('#')).collect()
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_str(&stdout(o)).unwrap()
}

#[test]
fn bounds_of_three_bus_case() {
    let out = stdout(&pfkit(&["bounds", &case("case3.json")]));
    assert_eq!(out, "{\"cbb\":16,\"binomial\":6,\"seed\":0}\n");
}

#[test]
fn seed_is_echoed() {
    let v = json(&pfkit(&["--seed", "7", "validate", &case("case2.json")]));
    assert_eq!(v["seed"], 7);
    assert_eq!(v["valid"], true);
    assert_eq!(v["buses"], 2);

    let o = Command::new(env!("CARGO_BIN_EXE_pfkit"))
        .args(["bounds", &case("case2.json")])
        .env("PFKIT_SEED", "11")
        .output()
        .unwrap();
    assert_eq!(json(&o)["seed"], 11);

    let csv = stdout(&pfkit(&["solve", &case("case2.json"), "--seed", "3"]));
    assert_eq!(csv.lines().next(), Some("# seed=3"));
}

#[test]
fn real_solutions_do_not_depend_on_the_seed() {
    for name in ["case2.json", "case3.json"] {
        let a = stdout(&pfkit(&["solve-all", &case(name), "--csv", "--seed", "1"]));
        let b = stdout(&pfkit(&["solve-all", &case(name), "--csv", "--seed", "2"]));
        assert_eq!(data_rows(&a), data_rows(&b), "{name}");
        assert!(data_rows(&a).len() > 1, "{name}: no real solutions");
    }
}

#[test]
fn solve_all_csv_matches_closed_form() {
    // r = x = 1/4, P = Q = 1/4, V = 1: the load voltage is real and equal
    // to (1 ± 1/sqrt(2)) / 2.
    let csv = stdout(&pfkit(&["solve-all", &case("case2.json"), "--csv"]));
    let rows = data_rows(&csv);
    assert_eq!(rows[0], "solution,bus,V_d,V_q,|V|,angle");
    let load: Vec<f64> = rows[1..]
        .iter()
        .filter(|r| r.split(',').nth(1) == Some("2"))
        .map(|r| r.split(',').nth(2).unwrap().parse().unwrap())
        .collect();
    let h = 0.5 * std::f64::consts::FRAC_1_SQRT_2;
    assert_eq!(load.len(), 2);
    assert!((load[0] - (0.5 + h)).abs() < 1e-9);
    assert!((load[1] - (0.5 - h)).abs() < 1e-9);
}

#[test]
fn solve_all_json_reports_bounds() {
    let v = json(&pfkit(&["solve-all", &case("case3.json"), "--json", "--threads", "2"]));
    let b = &v["bounds"];
    assert_eq!(b["cbb"], 16);
    assert_eq!(b["binomial"], 6);
    assert_eq!(b["paths_tracked"], 16);
    let sols = v["solutions"].as_array().unwrap();
    assert_eq!(b["n_found"].as_u64().unwrap() as usize, sols.len());
    for s in sols {
        assert!(s["residual"].as_f64().unwrap() < 1e-8);
        assert_eq!(s["voltages"].as_array().unwrap().len(), 3);
    }
}

#[test]
fn loadability_rows_lie_on_the_boundary() {
    let csv = stdout(&pfkit(&["loadability", "--vset", "1.0"]));
    let rows = data_rows(&csv);
    assert_eq!(rows[0], "V,P_L,Q_L");
    assert!(rows.len() > 50);
    // Voltage collapse: the quadratic in |U|^2,
    //   |U|^4 + (2(rP + xQ) - V^2)|U|^2 + |Z|^2 (P^2 + Q^2) = 0,
    // has a double root.
    let (r, x) = (0.25, 0.25);
    for row in &rows[1..] {
        let f: Vec<f64> = row.split(',').map(|t| t.parse().unwrap()).collect();
        let (v, p, q) = (f[0], f[1], f[2]);
        let b = 2.0 * (r * p + x * q) - v * v;
        let disc = b * b - 4.0 * (r * r + x * x) * (p * p + q * q);
        assert!(disc.abs() < 1e-10, "{row}: {disc:e}");
    }
}

#[test]
fn loadability_with_other_line_writes_files() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("curve.csv");
    let py = dir.path().join("plot.py");
    let o = pfkit(&[
        "loadability",
        "--vset",
        "0.9,1.1",
        "--r",
        "0.1",
        "--x",
        "3/10",
        "--points",
        "21",
        "--output",
        csv.to_str().unwrap(),
        "--emit-plot-script",
        py.to_str().unwrap(),
    ]);
    assert_eq!(stdout(&o), "");
    let text = std::fs::read_to_string(&csv).unwrap();
    for row in &data_rows(&text)[1..] {
        let f: Vec<f64> = row.split(',').map(|t| t.parse().unwrap()).collect();
        let (v, p, q) = (f[0], f[1], f[2]);
        let b = 2.0 * (0.1 * p + 0.3 * q) - v * v;
        assert!((b * b - 4.0 * 0.1 * (p * p + q * q)).abs() < 1e-10, "{row}");
    }
    let script = std::fs::read_to_string(&py).unwrap();
    assert!(script.contains(csv.to_str().unwrap()));
    assert!(script.contains("read_csv"));
}

#[test]
fn load_equivalent_rows_satisfy_the_model() {
    let (pl, ql) = (0.2, 0.1);
    let csv = stdout(&pfkit(&["load-equivalent", "--pl", "0.2", "--ql", "0.1"]));
    let rows = data_rows(&csv);
    assert_eq!(rows[0], "V,P");
    assert!(rows.len() > 50);
    for row in &rows[1..] {
        let f: Vec<f64> = row.split(',').map(|t| t.parse().unwrap()).collect();
        let (v, p) = (f[0], f[1]);
        // Source-side active power of a line r = x = 1/4 feeding the load.
        let g = 2.0 * p * p - 2.0 * (2.0 * v * v + pl - ql) * p + 4.0 * v * v * pl + (pl - ql) * (pl - ql);
        assert!(g.abs() < 1e-10, "{row}: {g:e}");
    }
}

#[test]
fn groebner_of_a_system_file() {
    let dir = tempfile::tempdir().unwrap();
    let sys = dir.path().join("circle.sys");
    std::fs::write(&sys, "# circle and line\nx^2 + y^2 - 1\nx - y\n").unwrap();
    let out = stdout(&pfkit(&["groebner", sys.to_str().unwrap(), "--order", "x,y"]));
    assert_eq!(out, "# seed=0\ny^2 - 1/2\nx - y\n");
    let out = stdout(&pfkit(&["groebner", sys.to_str().unwrap(), "--order", "x,y", "--eliminate", "1"]));
    assert_eq!(out, "# seed=0\ny^2 - 1/2\n");
}

#[test]
fn newton_start_file_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let first = stdout(&pfkit(&["solve", &case("case3.json")]));
    let start = dir.path().join("start.csv");
    std::fs::write(&start, &first).unwrap();
    let again = stdout(&pfkit(&["solve", &case("case3.json"), "--start", start.to_str().unwrap()]));
    let values = |csv: &str| -> Vec<f64> {
        data_rows(csv)[1..]
            .iter()
            .flat_map(|r| r.split(',').map(|t| t.parse::<f64>().unwrap()).collect::<Vec<_>>())
            .collect()
    };
    let (a, b) = (values(&first), values(&again));
    assert_eq!(a.len(), b.len());
    for (x, y) in a.iter().zip(&b) {
        assert!((x - y).abs() < 1e-8, "{x} vs {y}");
    }
    assert!(again.contains("# iterations=0") || again.contains("# iterations=1"));
}

#[test]
fn moment_solve_and_export_agree() {
    let solved = stdout(&pfkit(&["moment", &case("case2_mixed.json"), "--gamma", "2"]));
    assert!(solved.contains("certified=true"));
    let bound: f64 = solved
        .lines()
        .find_map(|l| l.split_whitespace().find_map(|t| t.strip_prefix("bound=")))
        .unwrap()
        .parse()
        .unwrap();
    assert_eq!(data_rows(&solved).len(), 3);

    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("r2.dat-s");
    let exported = json(&pfkit(&[
        "moment",
        &case("case2_mixed.json"),
        "--gamma",
        "2",
        "--export",
        file.to_str().unwrap(),
    ]));
    assert_eq!(exported["moment_size"], 15);
    let solved = json(&pfkit(&["sdp-solve", file.to_str().unwrap()]));
    assert_eq!(solved["status"], "Optimal");
    assert!((solved["bound"].as_f64().unwrap() - bound).abs() < 1e-7);
}

#[test]
fn outputs_are_deterministic() {
    let runs: [&[&str]; 4] = [
        &["solve-all", &case("case3.json"), "--json"],
        &["solve-all", &case("case3.json"), "--csv", "--threads", "1"],
        &["moment", &case("case3.json"), "--gamma", "1"],
        &["loadability", "--vset", "0.95,1.05"],
    ];
    for args in runs {
        let a = pfkit(args);
        let b = pfkit(args);
        assert_eq!(stdout(&a), stdout(&b), "{args:?}");
    }
    let threaded = stdout(&pfkit(&["solve-all", &case("case3.json"), "--csv", "--threads", "4"]));
    let single = stdout(&pfkit(&["solve-all", &case("case3.json"), "--csv", "--threads", "1"]));
    assert_eq!(threaded, single);
}

#[test]
fn exit_codes() {
    assert_eq!(pfkit(&["--help"]).status.code(), Some(0));
    assert_eq!(pfkit(&["bounds", &case("case2.json"), "--bogus"]).status.code(), Some(1));
    assert_eq!(pfkit(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(pfkit(&["validate", "/nonexistent/case.json"]).status.code(), Some(1));
    assert_eq!(pfkit(&["loadability", "--vset", "1", "--r", "abc"]).status.code(), Some(1));
    assert_eq!(pfkit(&["moment", &case("case3.json"), "--gamma", "0"]).status.code(), Some(1));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"buses":[{"id":1,"kind":"pq"}],"lines":[]}"#).unwrap();
    let o = pfkit(&["validate", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(!o.stderr.is_empty());

    // Far beyond the nose of the PV curve: no power-flow solution exists.
    let heavy = dir.path().join("heavy.json");
    std::fs::write(
        &heavy,
        r#"{"buses":[{"id":1,"kind":"slack","v_set":1.0},{"id":2,"kind":"pq","p_load":5.0,"q_load":5.0}],
            "lines":[{"from":1,"to":2,"r":0.25,"x":0.25}]}"#,
    )
    .unwrap();
    let o = pfkit(&["solve", heavy.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(o.stdout.is_empty());
}

#[test]
fn two_bus_equivalencing_golden() {
    let sys = case("two_bus.sys");
    let out = stdout(&pfkit(&["groebner", &sys, "--order", "id,iq,Vd,Vq,Q,P,V,PL,QL", "--eliminate", "5"]));
    assert_eq!(
        out,
        "# seed=0\nP^2 - 2*P*V^2 - P*PL + P*QL + 2*V^2*PL + 1/2*PL^2 - PL*QL + 1/2*QL^2\nQ - P + PL - QL\n"
    );
}
