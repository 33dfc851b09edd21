use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_glottobpe");

const SUBCOMMANDS: &[&str] = &[
    "ingest",
    "glottoset",
    "merge-glottosets",
    "train",
    "encode",
    "tree",
    "graph",
    "diff",
    "rank-matrix",
    "identify",
    "distances",
    "mantel",
    "separation",
    "homographs",
    "boundary-eval",
    "stats",
];

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(BIN)
        .current_dir(dir)
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn help_on_every_subcommand() {
    let dir = tempfile::tempdir().unwrap();
    for sub in SUBCOMMANDS {
        let o = run(dir.path(), &[sub, "--help"]);
        assert_eq!(o.status.code(), Some(0), "{sub}");
        let text = stdout(&o);
        assert!(text.contains("Usage:"), "{sub}");
        assert!(
            text.contains("--config"),
            "{sub} must document the global flags"
        );
    }
    assert_eq!(run(dir.path(), &["--help"]).status.code(), Some(0));
}

#[test]
fn bad_arguments_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(dir.path(), &["frobnicate"]).status.code(), Some(1));
    assert_eq!(run(dir.path(), &["encode"]).status.code(), Some(1));
    assert_eq!(
        run(dir.path(), &["train", "--input", "x.tsv", "--mode", "huge"])
            .status
            .code(),
        Some(1)
    );
    fs::write(dir.path().join("run.conf"), "vocabulary=12\n").unwrap();
    let o = run(
        dir.path(),
        &[
            "--config", "run.conf", "encode", "--table", "t", "--word", "a",
        ],
    );
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown key"));
}

#[test]
fn malformed_input_exits_2_with_line() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("bad.tsv"),
        "word\ttf\tdf\ncasa\t3\t1\nperro\tmany\t1\n",
    )
    .unwrap();
    let o = run(dir.path(), &["train", "--input", "bad.tsv"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"));
    assert_eq!(
        run(dir.path(), &["stats", "--input", "missing.tsv"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn operation_errors_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("xx.tsv"), "word\ttf\tdf\nab\t5\t2\n").unwrap();
    let o = run(
        dir.path(),
        &["train", "--input", "xx.tsv", "--mode", "fixed:1"],
    );
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn encode_with_empty_table() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("empty.merges"),
        "lang=en\tmode=ultimate\tweighting=tf\nc\na\nt\n\n",
    )
    .unwrap();
    let o = run(
        dir.path(),
        &["encode", "--table", "empty.merges", "--word", "cat"],
    );
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "c a t\n");
}

#[test]
fn train_then_encode_cyrillic() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("uk.glottoset.tsv"),
        "word\ttf\tdf\nзаказала\t4\t2\nзаказ\t7\t3\nказала\t5\t2\nала\t2\t1\n",
    )
    .unwrap();
    let o = run(
        dir.path(),
        &[
            "train",
            "--input",
            "uk.glottoset.tsv",
            "--mode",
            "ultimate",
            "--out",
            "uk.merges",
        ],
    );
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    assert!(fs::read_to_string(dir.path().join("uk.merges"))
        .unwrap()
        .starts_with("lang=uk\t"));
    let o = run(
        dir.path(),
        &["encode", "--table", "uk.merges", "--word", "заказала"],
    );
    let out = stdout(&o);
    assert_eq!(out.lines().count(), 1);
    assert_eq!(out.trim_end().replace(' ', ""), "заказала");
}

#[test]
fn mantel_output_format() {
    let dir = tempfile::tempdir().unwrap();
    let a = ",a,b,c,d\na,0,1,2,3\nb,1,0,1,2\nc,2,1,0,1\nd,3,2,1,0\n";
    let b = ",a,b,c,d\na,0,2,4,7\nb,2,0,2,4\nc,4,2,0,2\nd,7,4,2,0\n";
    fs::write(dir.path().join("bpe.csv"), a).unwrap();
    fs::write(dir.path().join("phylo.csv"), b).unwrap();
    let o = run(
        dir.path(),
        &[
            "mantel",
            "--a",
            "bpe.csv",
            "--b",
            "phylo.csv",
            "--permutations",
            "999",
            "--seed",
            "7",
        ],
    );
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let fields: Vec<&str> = out.split_whitespace().collect();
    assert_eq!(fields.len(), 3);
    assert!(fields[0].starts_with("r=") && fields[1].starts_with("p="));
    assert_eq!(fields[2], "permutations=999");
    let o = run(
        dir.path(),
        &["mantel", "--a", "bpe.csv", "--b", "phylo.csv"],
    );
    assert!(stdout(&o).ends_with("permutations=999\n"));
}

#[test]
fn config_supplies_defaults_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(
        d.join("xx.tsv"),
        "word\ttf\tdf\nabab\t9\t3\nabc\t4\t2\nbcd\t3\t1\n",
    )
    .unwrap();
    fs::write(d.join("run.conf"), "mode=fixed:5\nweighting=types\n").unwrap();
    run(
        d,
        &[
            "--config", "run.conf", "train", "--input", "xx.tsv", "--out", "a.merges",
        ],
    );
    let a = fs::read_to_string(d.join("a.merges")).unwrap();
    assert!(a.starts_with("lang=xx\tmode=fixed:5\tweighting=types\n"));
    run(
        d,
        &[
            "--config", "run.conf", "train", "--input", "xx.tsv", "--mode", "ultimate", "--out",
            "b.merges",
        ],
    );
    let b = fs::read_to_string(d.join("b.merges")).unwrap();
    assert!(b.starts_with("lang=xx\tmode=ultimate\tweighting=types\n"));
}

#[test]
fn config_directories_resolve_relative_paths() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::create_dir_all(d.join("lex")).unwrap();
    fs::write(d.join("lex/xx.tsv"), "word\ttf\tdf\nabab\t9\t3\n").unwrap();
    fs::write(d.join("run.conf"), "glottoset_dir=lex\noutput_dir=out\n").unwrap();
    let o = run(
        d,
        &[
            "--config",
            "run.conf",
            "train",
            "--input",
            "xx.tsv",
            "--out",
            "xx.merges",
        ],
    );
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    assert!(d.join("out/xx.merges").exists());
}

#[test]
fn pretty_output_differs_from_tsv() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("t.merges"),
        "lang=xx\tmode=ultimate\tweighting=tf\na\nb\n\na\tb\n",
    )
    .unwrap();
    let plain = stdout(&run(
        dir.path(),
        &["encode", "--table", "t.merges", "--word", "abb"],
    ));
    let pretty = stdout(&run(
        dir.path(),
        &["--pretty", "encode", "--table", "t.merges", "--word", "abb"],
    ));
    assert_eq!(plain, "ab b\n");
    assert_eq!(pretty, "abb: ab | b\n");
}
