use std::path::Path;
use std::process::{Command, Output};

const SMALL: &str = "[mesh]\ncoarse = 3\nfine = 4\n\n[coefficient]\neta = [1e4]\n\n[solver]\nl_add = [0, 1, 2]\n\n[sweep]\nscalings = [12.0, 48.0]\n";

fn gmsdg(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gmsdg"))
        .args(args)
        .current_dir(dir)
        .env_remove("GMSDG_OUT_DIR")
        .output()
        .unwrap()
}

fn setup() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("small.toml"), SMALL).unwrap();
    dir
}

fn ok(out: &Output) {
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn table_is_byte_stable() {
    let dir = setup();
    let p = dir.path();
    ok(&gmsdg(
        &["table", "--config", "small.toml", "--out", "a"],
        p,
    ));
    ok(&gmsdg(
        &[
            "table",
            "--config",
            "small.toml",
            "--out",
            "b",
            "--threads",
            "1",
        ],
        p,
    ));
    let a = std::fs::read(p.join("a/table_I_eta-1e4.csv")).unwrap();
    let b = std::fs::read(p.join("b/table_I_eta-1e4.csv")).unwrap();
    assert_eq!(a, b);
    let text = String::from_utf8(a).unwrap();
    assert!(text.starts_with("# gmsdg "));
    assert!(text.contains("\nL_add,dim,interface,interior,total,energy,lambda_min\n"));
    assert!(p.join("a/table_I_eta-1e4.svg").exists());
}

#[test]
fn flags_override_config() {
    let dir = setup();
    let p = dir.path();
    let out = gmsdg(
        &[
            "table",
            "--config",
            "small.toml",
            "--out",
            "o",
            "--method",
            "III-m",
            "--eta",
            "100",
            "--l-add",
            "0,3",
            "--delta",
            "8",
        ],
        p,
    );
    ok(&out);
    let text = std::fs::read_to_string(p.join("o/table_III-m_eta-1e2.csv")).unwrap();
    assert!(text.contains("method III-m; delta 8"));
    let rows: Vec<&str> = text
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .collect();
    assert_eq!(rows.len(), 2);
    assert!(rows[1].starts_with("3,36,"));
    assert!(p.join("o/table_III-m_eta-1e2_snapshot.csv").exists());
}

#[test]
fn env_var_sets_output_dir() {
    let dir = setup();
    let p = dir.path();
    let out = Command::new(env!("CARGO_BIN_EXE_gmsdg"))
        .args(["penalty-sweep", "--config", "small.toml"])
        .current_dir(p)
        .env("GMSDG_OUT_DIR", "from_env")
        .output()
        .unwrap();
    ok(&out);
    assert!(p.join("from_env/sweep_I_eta-1e4.csv").exists());
    assert!(p.join("from_env/sweep_I_eta-1e4.svg").exists());
}

#[test]
fn remaining_subcommands() {
    let dir = setup();
    let p = dir.path();
    let out = gmsdg(
        &[
            "lambda-plot",
            "--config",
            "small.toml",
            "--out",
            "o",
            "--l-add",
            "1",
        ],
        p,
    );
    ok(&out);
    assert!(String::from_utf8_lossy(&out.stdout).contains("correlation undefined"));
    ok(&gmsdg(
        &[
            "solve",
            "--config",
            "small.toml",
            "--out",
            "o",
            "--l-add",
            "2",
        ],
        p,
    ));
    assert!(p.join("o/solution_fine_eta-1e4.txt").exists());
    assert!(p.join("o/solution_I_eta-1e4_L2.txt").exists());
    ok(&gmsdg(
        &[
            "dump-basis",
            "--config",
            "small.toml",
            "--out",
            "o",
            "--method",
            "II",
            "--l-add",
            "2",
        ],
        p,
    ));
    assert!(p.join("o/basis_II_eta-1e4_L2.txt").exists());
}

#[test]
fn bad_input_is_reported() {
    let dir = setup();
    let p = dir.path();
    std::fs::write(p.join("bad.toml"), "[mesh]\ncoarse = 3\nbogus = 1\n").unwrap();
    let out = gmsdg(&["table", "--config", "bad.toml"], p);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("bogus"));

    let out = gmsdg(&["table", "--config", "small.toml", "--method", "IV"], p);
    assert!(!out.status.success());
    let out = gmsdg(&["table", "--config", "small.toml", "--l-add", "40"], p);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("l_add"));
}
