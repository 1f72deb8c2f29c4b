use std::path::Path;
use std::process::Command;

use tincalc::cli::{run, EXIT_INVALID, EXIT_OK, EXIT_USAGE};

const DIAG_UP_X: &str = "TIN 1\ndomain 0 0 1 1\nvertices 4\n0 0 0\n1 0 1\n1 1 1\n0 1 0\ntriangles 2\n0 1 2\n0 2 3\n";
const DIAG_DOWN_Y: &str = "TIN 1\ndomain 0 0 1 1\nvertices 4\n0 0 0\n1 0 0\n1 1 1\n0 1 1\ntriangles 2\n0 1 3\n1 2 3\n";
// unit square fanned around its center, which lies on the other diagonal
const CENTER_FAN: &str = "TIN 1\ndomain 0 0 1 1\nvertices 5\n0 0 0\n1 0 0\n1 1 0\n0 1 0\n1/2 1/2 1\n\
triangles 4\n0 1 4\n1 2 4\n2 3 4\n3 0 4\n";

fn call(args: &[&str]) -> (i32, String, String) {
    let argv = std::iter::once("tincalc").chain(args.iter().copied());
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_owned()
}

#[test]
fn inner_both_methods_on_diagonals() {
    let dir = tempfile::tempdir().unwrap();
    let (f, g) = (write(dir.path(), "f.tin", DIAG_UP_X), write(dir.path(), "g.tin", DIAG_DOWN_Y));
    let (code, out, _) = call(&["inner", &f, &g, "--method", "both"]);
    assert_eq!(code, EXIT_OK);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines, ["naive: 1/4 0.25000000000000000", "fast: 1/4 0.25000000000000000", "MATCH"]);
}

#[test]
fn count_ops_reports_a_number() {
    let dir = tempfile::tempdir().unwrap();
    let (f, g) = (write(dir.path(), "f.tin", DIAG_UP_X), write(dir.path(), "g.tin", DIAG_DOWN_Y));
    let (code, out, _) = call(&["inner", &f, &g, "--count-ops", "--form", "literal"]);
    assert_eq!(code, EXIT_OK);
    let ops = out.lines().find_map(|l| l.strip_prefix("fast ops: ")).unwrap();
    assert!(ops.parse::<u64>().unwrap() > 0);
}

#[test]
fn distance_and_match() {
    let dir = tempfile::tempdir().unwrap();
    let (f, g) = (write(dir.path(), "f.tin", DIAG_UP_X), write(dir.path(), "g.tin", DIAG_DOWN_Y));
    let (code, out, _) = call(&["distance", &f, &g]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(out.trim(), "fast: squared=1/6 distance=0.40824829046386302");
    let (code, out, _) = call(&["match", &f, &f.clone()]);
    // f against itself shares its diagonal
    assert_eq!(code, EXIT_INVALID, "{out}");
    let (code, out, _) = call(&["match", &f, &g, "--method", "naive"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.starts_with("naive: s="), "{out}");
}

#[test]
fn vertex_on_edge_fails_validation() {
    let dir = tempfile::tempdir().unwrap();
    let (f, g) = (write(dir.path(), "f.tin", DIAG_UP_X), write(dir.path(), "g.tin", CENTER_FAN));
    let (code, out, _) = call(&["validate", &f, &g]);
    assert_eq!(code, EXIT_INVALID);
    assert!(out.contains("vertex-on-edge"), "{out}");
    let (code, _, err) = call(&["inner", &f, &g]);
    assert_eq!(code, EXIT_INVALID);
    assert!(err.contains("vertex-on-edge"), "{err}");
    let g = write(dir.path(), "h.tin", DIAG_DOWN_Y);
    let (code, out, _) = call(&["validate", &f, &g]);
    assert_eq!((code, out.trim()), (EXIT_OK, "ok"));
}

#[test]
fn usage_and_parse_errors() {
    assert_eq!(call(&["inner", "--bogus"]).0, EXIT_USAGE);
    assert_eq!(call(&[]).0, EXIT_USAGE);
    assert_eq!(call(&["inner", "/nonexistent/a", "/nonexistent/b"]).0, EXIT_USAGE);
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.tin", "TIN 1\ndomain 0 0 1 1\nvertices two\n");
    let (code, _, err) = call(&["inner", &bad, &bad]);
    assert_eq!(code, EXIT_USAGE);
    assert!(err.contains("line 3"), "{err}");
    assert_eq!(call(&["inner", &bad, &bad, "--prime-bits", "70"]).0, EXIT_USAGE);
}

#[test]
fn generate_plane_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("p.tin");
    let fs = f.to_str().unwrap();
    let (code, _, _) = call(&["generate", "--triangles", "30", "--seed", "4", "--surface", "plane:0,1,0", "-o", fs]);
    assert_eq!(code, EXIT_OK);
    let text = std::fs::read_to_string(&f).unwrap();
    let t = tincalc::geom::parse_tin(&text).unwrap();
    assert_eq!(t.num_triangles(), 30);
    assert_eq!(tincalc::geom::write_tin(&t).unwrap(), text);
    // plane f = x against the diagonal g = y
    let g = write(dir.path(), "g.tin", DIAG_DOWN_Y);
    let (code, out, _) = call(&["inner", fs, &g, "--method", "both"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.starts_with("naive: 1/4 "), "{out}");
    assert!(out.ends_with("MATCH\n"));
    let (code, out, _) = call(&["generate", "--triangles", "8", "--flips", "random:5", "--surface", "saddle"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.starts_with("TIN 1\n"));
    assert_eq!(call(&["generate", "--triangles", "8", "--surface", "cone"]).0, EXIT_USAGE);
}

#[test]
fn cliques_stats_verify() {
    let dir = tempfile::tempdir().unwrap();
    let (f, g) = (dir.path().join("f.tin"), dir.path().join("g.tin"));
    for (p, seed) in [(&f, "1"), (&g, "2")] {
        assert_eq!(call(&["generate", "--triangles", "60", "--seed", seed, "-o", p.to_str().unwrap()]).0, EXIT_OK);
    }
    let (code, out, _) = call(&["cliques", f.to_str().unwrap(), g.to_str().unwrap(), "--stats"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("verification: ok"), "{out}");
}

#[test]
fn bench_writes_csv_and_ratios() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("b.csv");
    let (code, out, _) = call(&["bench", "--sizes", "16,32", "--csv", csv.to_str().unwrap(), "--count-ops"]);
    assert_eq!(code, EXIT_OK);
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut rows = text.lines();
    assert_eq!(rows.next(), Some("n,method,field_ops,wall_ms,clique_cover_size,match"));
    let rows: Vec<Vec<&str>> = rows.map(|r| r.split(',').collect()).collect();
    assert_eq!(rows.len(), 4);
    for r in &rows {
        assert_eq!(r.len(), 6);
        assert!(r[2].parse::<u64>().unwrap() > 0);
        assert_eq!(r[5], "true");
    }
    assert!(out.contains("fast ops ratio n=16->32: "), "{out}");
    assert!(out.contains("naive ops ratio n=16->32: "), "{out}");
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_tincalc");
    let st = Command::new(bin).arg("--bogus").output().unwrap();
    assert_eq!(st.status.code(), Some(EXIT_USAGE));
    let dir = tempfile::tempdir().unwrap();
    let (f, g) = (write(dir.path(), "f.tin", DIAG_UP_X), write(dir.path(), "g.tin", DIAG_DOWN_Y));
    let st = Command::new(bin).args(["inner", &f, &g]).output().unwrap();
    assert_eq!(st.status.code(), Some(EXIT_OK));
    assert_eq!(String::from_utf8_lossy(&st.stdout), "fast: 1/4 0.25000000000000000\n");
}
