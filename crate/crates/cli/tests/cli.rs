use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const HEADER: &str =
    "policy,graph,n,param,trial,seed,rounds,terminated,total_beeps,beeps_per_node,mis_size";

fn beepmis(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_beepmis"))
        .args(args)
        .env_remove("BEEPMIS_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn run_and_verify_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let mis = dir.path().join("mis.txt");
    let out = beepmis(&[
        "run",
        "--graph",
        "path:3",
        "--policy",
        "sweep",
        "--seed",
        "1",
        "--dump-mis",
        mis.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(stdout(&out).contains("terminated=true"));

    let graph = write(dir.path(), "p3.el", "3 2\n0 1\n1 2\n");
    let out = beepmis(&["verify", "--graph", &graph, "--set", mis.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
}

#[test]
fn run_random_graph_terminates() {
    let out = beepmis(&[
        "run",
        "--graph",
        "er:100,0.5",
        "--policy",
        "feedback",
        "--seed",
        "7",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let line = stdout(&out);
    assert!(line.contains("terminated=true"), "{line}");
    assert!(line.contains("n=100"));
}

#[test]
fn run_trace_lists_rounds() {
    let out = beepmis(&[
        "run",
        "--graph",
        "clique:4",
        "--seed",
        "3",
        "--trace",
        "--dump-mis",
        "-",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let rounds: usize = text
        .split_whitespace()
        .find_map(|t| t.strip_prefix("rounds="))
        .unwrap()
        .parse()
        .unwrap();
    assert_eq!(
        text.lines().filter(|l| l.starts_with("round ")).count(),
        rounds
    );
    // One MIS node for a clique, printed after the trace.
    assert!(text.lines().last().unwrap().parse::<usize>().unwrap() < 4);
}

#[test]
fn degenerate_constant_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let graph = write(dir.path(), "g.el", "2 1\n0 1\n");
    let source = format!("file:{graph}");
    let out = beepmis(&["run", "--graph", &source, "--policy", "const:0.0"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(
        stderr(&out).contains("probability must be in (0, 1]"),
        "{}",
        stderr(&out)
    );
}

#[test]
fn round_cap_exit_code() {
    let out = beepmis(&[
        "run",
        "--graph",
        "clique:30",
        "--policy",
        "const:1.0",
        "--max-rounds",
        "5",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stdout(&out).contains("terminated=false"));
    assert!(stdout(&out).contains("rounds=5"));
}

#[test]
fn verify_witnesses() {
    let dir = tempfile::tempdir().unwrap();
    let path3 = write(dir.path(), "p3.el", "3 2\n0 1\n1 2\n");
    let tri = write(dir.path(), "k3.el", "3 3\n0 1\n0 2\n1 2\n");
    let s1 = write(dir.path(), "s1", "1\n");
    let s0 = write(dir.path(), "s0", "0\n");
    let s01 = write(dir.path(), "s01", "0\n1\n");

    assert_eq!(
        beepmis(&["verify", "--graph", &path3, "--set", &s1])
            .status
            .code(),
        Some(0)
    );

    let out = beepmis(&["verify", "--graph", &path3, "--set", &s0]);
    assert_eq!(out.status.code(), Some(3));
    assert!(
        stdout(&out).contains("vertex 2 addable"),
        "{}",
        stdout(&out)
    );

    let out = beepmis(&["verify", "--graph", &tri, "--set", &s01]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stdout(&out).contains("edge (0,1)"), "{}", stdout(&out));
}

#[test]
fn verify_parse_errors() {
    let dir = tempfile::tempdir().unwrap();
    let bad_graph = write(dir.path(), "bad.el", "2 1\n0 0\n");
    let set = write(dir.path(), "s", "0\n");
    let out = beepmis(&["verify", "--graph", &bad_graph, "--set", &set]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("line 2"), "{}", stderr(&out));

    let good = write(dir.path(), "g.el", "2 1\n0 1\n");
    let bad_set = write(dir.path(), "bad_set", "0\nzero\n");
    let out = beepmis(&["verify", "--graph", &good, "--set", &bad_set]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("line 2"), "{}", stderr(&out));

    let out_of_range = write(dir.path(), "oor", "5\n");
    let out = beepmis(&["verify", "--graph", &good, "--set", &out_of_range]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn experiment_csv_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, jobs: &str| {
        let path = dir.path().join(name);
        let out = beepmis(&[
            "experiment",
            "--family",
            "er:0.5",
            "--n",
            "16,32,64",
            "--trials",
            "10",
            "--seed",
            "42",
            "--jobs",
            jobs,
            "-o",
            path.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
        // Summary goes to stdout when the CSV goes to a file.
        assert!(stdout(&out).contains("n=64"));
        fs::read(path).unwrap()
    };
    let a = run("a.csv", "0");
    let b = run("b.csv", "0");
    let c = run("c.csv", "1");
    let d = run("d.csv", "3");
    assert_eq!(a, b);
    assert_eq!(a, c);
    assert_eq!(a, d);

    let text = String::from_utf8(a).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some(HEADER));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 30);
    for row in &rows {
        assert_eq!(row.len(), 11);
        assert_eq!(row[0], "feedback");
        assert_eq!(row[1], "er");
        assert_eq!(row[3], "0.5");
        assert!(row[7] == "true" || row[7] == "false");
        let n: f64 = row[2].parse().unwrap();
        let beeps: f64 = row[8].parse().unwrap();
        let per_node: f64 = row[9].parse().unwrap();
        assert!((per_node - beeps / n).abs() <= 5e-6 * (beeps / n).max(1.0));
    }
    // Sorted by (n, trial).
    let keys: Vec<(usize, u64)> = rows
        .iter()
        .map(|r| (r[2].parse().unwrap(), r[4].parse().unwrap()))
        .collect();
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(keys, sorted);
}

#[test]
fn seed_falls_back_to_environment() {
    let base = [
        "experiment",
        "--family",
        "clique",
        "--n",
        "5",
        "--trials",
        "4",
    ];
    let explicit = Command::new(env!("CARGO_BIN_EXE_beepmis"))
        .args(base)
        .args(["--seed", "99"])
        .env_remove("BEEPMIS_SEED")
        .output()
        .unwrap();
    let from_env = Command::new(env!("CARGO_BIN_EXE_beepmis"))
        .args(base)
        .env("BEEPMIS_SEED", "99")
        .output()
        .unwrap();
    let default = beepmis(&base);
    assert_eq!(explicit.stdout, from_env.stdout);
    assert_ne!(explicit.stdout, default.stdout);
}

#[test]
fn lowerbound_and_presets() {
    let out = beepmis(&["lowerbound", "--m", "2,3", "--trials", "5"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    assert_eq!(text.lines().next(), Some(HEADER));
    assert_eq!(text.lines().count(), 1 + 2 * 2 * 5);
    assert!(text.contains("sweep,cliquefam,18,3,"));

    let out = beepmis(&["lowerbound", "--m", "1"]);
    assert_eq!(out.status.code(), Some(1));

    let out = beepmis(&["reproduce-fig3", "--n", "16,32", "--trials", "3"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out).lines().count(), 1 + 2 * 2 * 3);

    let out = beepmis(&["reproduce-fig5", "--n", "16", "--trials", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 1 + 3 * 2);
    assert!(text.contains("feedback,grid,16,4x4,"));
}

#[test]
fn generate_then_run_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("grid.el");
    let out = beepmis(&[
        "generate",
        "--graph",
        "grid:3,4",
        "-o",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("12 17\n"));
    let source = format!("file:{}", path.display());
    let out = beepmis(&["run", "--graph", &source, "--seed", "5"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("n=12 edges=17"));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(beepmis(&[]).status.code(), Some(1));
    assert_eq!(beepmis(&["run"]).status.code(), Some(1));
    assert_eq!(
        beepmis(&["run", "--graph", "star:5"]).status.code(),
        Some(1)
    );
    assert_eq!(
        beepmis(&["run", "--graph", "path:3", "--policy", "luby"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        beepmis(&[
            "experiment",
            "--family",
            "er:0.5",
            "--n",
            "8",
            "--trials",
            "0"
        ])
        .status
        .code(),
        Some(1)
    );
    assert_eq!(beepmis(&["--help"]).status.code(), Some(0));
}

#[test]
fn unwritable_output_is_an_error() {
    let out = beepmis(&[
        "experiment",
        "--family",
        "clique",
        "--n",
        "3",
        "--trials",
        "1",
        "-o",
        "/nonexistent-dir/out.csv",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("cannot write"));
}
