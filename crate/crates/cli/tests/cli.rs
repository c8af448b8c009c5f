use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn models() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("models")
}

fn ids() -> String {
    models().join("ids.qbn").display().to_string()
}

fn qbi(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qbi"))
        .args(args)
        .output()
        .expect("qbi runs")
}

fn stdout(args: &[&str]) -> String {
    let out = qbi(args);
    assert!(
        out.status.success(),
        "qbi {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

/// `(outcome, probability)` rows of a csv export or query block.
fn rows(text: &str, sep: char) -> Vec<(String, f64)> {
    text.lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with("outcome") && l.contains(sep))
        .filter(|l| !l.starts_with("max_abs_diff"))
        .map(|l| {
            let mut parts = l.split(sep);
            let o = parts.next().unwrap().to_string();
            (o, parts.next().unwrap().parse().unwrap())
        })
        .collect()
}

#[test]
fn query_both_engines_agree() {
    let text = stdout(&[
        "query",
        &ids(),
        "--target",
        "Y",
        "--evidence",
        "X=1",
        "--engine",
        "both",
    ]);
    assert!(text.contains("# P(Y | X=1) [quantum]"));
    assert!(text.contains("# P(Y | X=1) [classical]"));
    let diff: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("max_abs_diff="))
        .unwrap()
        .parse()
        .unwrap();
    assert!(diff < 1e-9);
    let r = rows(&text, ' ');
    assert_eq!(r.len(), 4);
    assert_eq!(r[0], r[2]);
}

#[test]
fn query_without_evidence_is_marginal() {
    let text = stdout(&["query", &ids(), "--target", "FA"]);
    let r = rows(&text, ' ');
    assert_eq!(r.len(), 2);
    // P(FA=1) = Σ_{x,y} P(y) P(x|y) P(FA=1|x,y)
    let expected = 0.15 * 0.9 * 0.75 + 0.85 * 0.63 * 0.99 + 0.15 * 0.1 * 0.40 + 0.85 * 0.37 * 0.95;
    assert!((r[1].1 - expected).abs() < 1e-12);
}

#[test]
fn query_target_bit_filters_rows() {
    let text = stdout(&["query", &ids(), "--target", "Y=1", "--evidence", "X=1"]);
    let r = rows(&text, ' ');
    assert_eq!(r.len(), 1);
    assert_eq!(r[0].0, "1");
}

#[test]
fn overlap_is_usage_error() {
    let out = qbi(&["query", &ids(), "--target", "X", "--evidence", "X=1"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("both a target and evidence"));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let certain = dir.path().join("certain.qbn");
    std::fs::write(
        &certain,
        "variables: [A, B]\nA:\n  cpt: {parents: [], rows: {\"\": 1.0}}\nB:\n  cpt: {parents: [], rows: {\"\": 0.5}}\n",
    )
    .unwrap();
    let certain = certain.display().to_string();
    let out = qbi(&["query", &certain, "--target", "B", "--evidence", "A=0"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("impossible evidence"));
    let out = qbi(&[
        "query",
        &certain,
        "--target",
        "B",
        "--evidence",
        "A=0",
        "--engine",
        "classical",
    ]);
    assert_eq!(out.status.code(), Some(2));

    let broken = dir.path().join("broken.qbn");
    std::fs::write(&broken, "variables: [A\n").unwrap();
    assert_eq!(
        qbi(&["circuit", &broken.display().to_string()])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(qbi(&["circuit", "/nonexistent.qbn"]).status.code(), Some(1));
    assert_eq!(
        qbi(&["query", &ids(), "--target", "Nope"]).status.code(),
        Some(1)
    );
    assert_eq!(
        qbi(&["query", &ids()]).status.code(),
        Some(1),
        "missing --target"
    );
    assert_eq!(
        qbi(&["dist", &ids()]).status.code(),
        Some(1),
        "missing selection"
    );
    assert_eq!(qbi(&["--help"]).status.code(), Some(0));
}

#[test]
fn dist_exports() {
    let joint = stdout(&["dist", &ids(), "--joint", "--format", "csv"]);
    assert!(joint.starts_with("outcome,probability\n"));
    let r = rows(&joint, ',');
    assert_eq!(r.len(), 8);
    let outcomes: Vec<&str> = r.iter().map(|(o, _)| o.as_str()).collect();
    assert_eq!(
        outcomes,
        ["000", "001", "010", "011", "100", "101", "110", "111"]
    );
    assert!((r.iter().map(|x| x.1).sum::<f64>() - 1.0).abs() < 1e-9);

    let m = rows(&stdout(&["dist", &ids(), "--marginal", "X"]), ',');
    assert_eq!(m.len(), 2);
    assert!((m[1].1 - 0.3295).abs() < 1e-12);

    let c = rows(
        &stdout(&["dist", &ids(), "--conditional", "Y,FA", "--evidence", "X=1"]),
        ',',
    );
    assert_eq!(c.len(), 4);
    // P(Y=1, FA=1 | X=1) = P(Y=1) P(X=1|Y=1) 0.95 / P(X=1)
    assert!((c[3].1 - 0.85 * 0.37 * 0.95 / 0.3295).abs() < 1e-12);
}

#[test]
fn dist_respects_display_order() {
    // marginal names are re-sorted into display order
    let a = stdout(&["dist", &ids(), "--marginal", "FA,X"]);
    let b = stdout(&["dist", &ids(), "--marginal", "X,FA"]);
    assert_eq!(a, b);
    let reordered = rows(
        &stdout(&["dist", &ids(), "--joint", "--order", "FA,Y,X"]),
        ',',
    );
    let natural = rows(&stdout(&["dist", &ids(), "--joint"]), ',');
    for (o, p) in &natural {
        let flipped: String = o.chars().rev().collect();
        let q = reordered.iter().find(|(r, _)| *r == flipped).unwrap().1;
        assert_eq!(*p, q);
    }
    assert_eq!(
        qbi(&["dist", &ids(), "--joint", "--order", "X,Y"])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn dist_json_and_output_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("joint.json");
    stdout(&[
        "dist",
        &ids(),
        "--joint",
        "--format",
        "json",
        "-o",
        path.to_str().unwrap(),
    ]);
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(doc["variables"], serde_json::json!(["X", "Y", "FA"]));
    assert_eq!(doc["outcomes"].as_array().unwrap().len(), 8);
    assert_eq!(doc["outcomes"][3]["outcome"], "011");
}

#[test]
fn heatmap_matrix() {
    let text = stdout(&["dist", &ids(), "--heatmap", "X,Y"]);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "X\\Y,Y=0,Y=1");
    assert_eq!(lines[1], "X=0,0.135000000000,0.535500000000");
    assert_eq!(lines[2], "X=1,0.015000000000,0.314500000000");
}

#[test]
fn metrics_entropy_matches_exported_marginal() {
    let text = stdout(&["metrics", &ids(), "--entropy", "FA"]);
    let h: f64 = text
        .trim()
        .strip_prefix("entropy(FA)=")
        .unwrap()
        .parse()
        .unwrap();
    let m = rows(&stdout(&["dist", &ids(), "--marginal", "FA"]), ',');
    let recomputed: f64 = m.iter().map(|(_, p)| -p * p.log2()).sum();
    assert!((h - recomputed).abs() < 1e-9);
}

#[test]
fn metrics_mi_of_independent_roots() {
    let model = models().join("independent.qbn").display().to_string();
    let text = stdout(&["metrics", &model, "--mi", "X,Y"]);
    assert_eq!(text, "mutual_information(X;Y)=0.000000000\n");
}

#[test]
fn metrics_fidelity() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let c = dir.path().join("c.csv");
    stdout(&["dist", &ids(), "--joint", "-o", a.to_str().unwrap()]);
    stdout(&[
        "dist",
        &ids(),
        "--conditional",
        "X,Y,FA",
        "-o",
        b.to_str().unwrap(),
    ]);
    stdout(&["dist", &ids(), "--marginal", "X", "-o", c.to_str().unwrap()]);
    let same = stdout(&[
        "metrics",
        &ids(),
        "--fidelity",
        a.to_str().unwrap(),
        a.to_str().unwrap(),
    ]);
    assert_eq!(same, "fidelity=1.000000000\n");
    let also = stdout(&[
        "metrics",
        &ids(),
        "--fidelity",
        a.to_str().unwrap(),
        b.to_str().unwrap(),
    ]);
    assert_eq!(also, "fidelity=1.000000000\n");
    let out = qbi(&[
        "metrics",
        &ids(),
        "--fidelity",
        a.to_str().unwrap(),
        c.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn metrics_cdf_and_top() {
    let cdf = stdout(&["metrics", &ids(), "--cdf"]);
    let lines: Vec<&str> = cdf.lines().collect();
    assert_eq!(lines[0], "outcome,probability,cumulative");
    assert_eq!(lines.len(), 9);
    assert!(lines[8].ends_with(",1.000000000000"));
    let top = stdout(&["metrics", &ids(), "--top", "2"]);
    assert_eq!(
        top,
        "outcome,probability,cumulative\n011,0.530145000000,0.530145000000\n111,0.298775000000,0.828920000000\n"
    );
    assert_eq!(
        qbi(&["metrics", &ids(), "--top", "0"]).status.code(),
        Some(1)
    );
    assert_eq!(qbi(&["metrics", &ids()]).status.code(), Some(1));
}

#[test]
fn circuit_line_counts() {
    let count = |model: &str| stdout(&["circuit", model]).lines().count();
    assert_eq!(count(&ids()), 7);
    assert_eq!(
        count(&models().join("ids_roots.qbn").display().to_string()),
        6
    );
    assert_eq!(count(&models().join("chain.qbn").display().to_string()), 5);
    let dir = tempfile::tempdir().unwrap();
    let single = dir.path().join("one.qbn");
    std::fs::write(
        &single,
        "variables: [A]\nA:\n  cpt: {parents: [], rows: {\"\": 0.4}}\n",
    )
    .unwrap();
    assert_eq!(count(single.to_str().unwrap()), 1);
}

#[test]
fn bundled_model_alias() {
    assert_eq!(stdout(&["circuit", "@ids"]), stdout(&["circuit", &ids()]));
}

#[test]
fn perturb_zero_noise_and_ranges() {
    let text = stdout(&[
        "perturb",
        &ids(),
        "--noise",
        "0",
        "--trials",
        "4",
        "--seed",
        "9",
    ]);
    assert!(text.contains("agreement=1.000000000"));
    let base = text
        .lines()
        .find_map(|l| l.strip_prefix("baseline_top3_mass="))
        .unwrap();
    assert!(text.contains(&format!("min_top3_mass={base}")));
    assert_eq!(
        qbi(&["perturb", &ids(), "--noise", "0.3"]).status.code(),
        Some(1)
    );
    assert_eq!(
        qbi(&["perturb", &ids(), "--noise", "0.1", "--trials", "0"])
            .status
            .code(),
        Some(1)
    );
    let a = stdout(&[
        "perturb",
        &ids(),
        "--noise",
        "0.1",
        "--trials",
        "10",
        "--seed",
        "18446744073709551615",
    ]);
    let b = stdout(&[
        "perturb",
        &ids(),
        "--noise",
        "0.1",
        "--trials",
        "10",
        "--seed",
        "18446744073709551615",
    ]);
    assert_eq!(a, b);
}

#[test]
fn engine_cross_check_on_bundled_models() {
    for model in ["ids.qbn", "ids_roots.qbn", "chain.qbn", "independent.qbn"] {
        let path = models().join(model).display().to_string();
        let text = stdout(&["dist", &path, "--joint"]);
        let first = rows(&text, ',');
        let n = first[0].0.len();
        let names: Vec<String> = std::fs::read_to_string(models().join(model))
            .unwrap()
            .lines()
            .find_map(|l| l.strip_prefix("variables: ["))
            .unwrap()
            .trim_end_matches(']')
            .split(", ")
            .map(str::to_string)
            .collect();
        assert_eq!(names.len(), n);
        for t in &names {
            let out = stdout(&["query", &path, "--target", t, "--engine", "both"]);
            let diff: f64 = out
                .lines()
                .find_map(|l| l.strip_prefix("max_abs_diff="))
                .unwrap()
                .parse()
                .unwrap();
            assert!(diff < 1e-9, "{model} {t}: {diff}");
        }
    }
}
