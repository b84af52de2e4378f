use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

const EXAMPLE: &str = "* 1 * 4\n1 * 2 *\n* 2 * 3\n4 * 3 *\n";

fn nhsdp(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nhsdp")).current_dir(dir).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn construct_then_verify() {
    let dir = TempDir::new().unwrap();
    let o = nhsdp(dir.path(), &["construct-nhsdp", "--v", "125", "--m", "2,2,2", "--out", "d.json"]);
    assert_eq!(o.status.code(), Some(0));
    let o = nhsdp(dir.path(), &["verify-nhsdp", "d.json"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "(125,8,8) NHSDP: valid");
}

#[test]
fn broken_family_is_rejected() {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join("bad.json"), "{\"v\":7,\"blocks\":[[0,1,2]]}").unwrap();
    let o = nhsdp(dir.path(), &["verify-nhsdp", "bad.json"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("condition 2"), "{}", stdout(&o));
}

#[test]
fn flipped_star_names_c3b() {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join("ok.txt"), EXAMPLE).unwrap();
    assert_eq!(nhsdp(dir.path(), &["verify-pda", "ok.txt"]).status.code(), Some(0));
    fs::write(dir.path().join("bad.txt"), EXAMPLE.replacen('*', "3", 1)).unwrap();
    let o = nhsdp(dir.path(), &["verify-pda", "bad.txt"]);
    assert_eq!(o.status.code(), Some(1));
    let out = stdout(&o);
    assert!(out.contains("C3b: symbol 3 at (0, 0) and (2, 3) but cell (0, 3) is not a star"), "{out}");
}

#[test]
fn simulate_all_demands() {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join("pda.txt"), EXAMPLE).unwrap();
    let o = nhsdp(dir.path(), &["--format", "json", "mn-pda", "--K", "4", "--t", "1", "--out", "mn.json"]);
    assert_eq!(o.status.code(), Some(0));
    let o = nhsdp(dir.path(), &["verify-pda", "pda.txt"]);
    assert_eq!(o.status.code(), Some(0));
    let o = nhsdp(dir.path(), &["simulate", "pda.txt", "--N", "4", "--demands", "all"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "256/256 demands decoded, load = 1");
    let o = nhsdp(dir.path(), &["simulate", "mn.json", "--N", "3", "--demands", "sample:10"]);
    assert_eq!(stdout(&o).trim(), "13/13 demands decoded (sampled), load = 3/2");
}

#[test]
fn explicit_demands_write_a_transcript() {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join("pda.txt"), EXAMPLE).unwrap();
    let o = nhsdp(dir.path(), &["simulate", "pda.txt", "--N", "2", "--demands", "1,1,0,1", "--out", "t.json"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "4/4 users decoded, load = 1");
    let t = fs::read_to_string(dir.path().join("t.json")).unwrap();
    assert!(t.contains("\"demands\"") && t.contains("\"transmissions\""));
    let o = nhsdp(dir.path(), &["simulate", "pda.txt", "--N", "2", "--demands", "1,1,2,1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn pipelines_compose() {
    let dir = TempDir::new().unwrap();
    for (v, m) in [("3", "1"), ("9", "1,1"), ("11", "2"), ("15", "1,1"), ("19", "1,2"), ("21", "3")] {
        let o = nhsdp(dir.path(), &["construct-nhsdp", "--v", v, "--m", m, "--out", "d.json"]);
        assert_eq!(o.status.code(), Some(0), "v={v} m={m}");
        let o = nhsdp(dir.path(), &["build-pda", "d.json", "--out", "p.txt"]);
        assert_eq!(o.status.code(), Some(0), "v={v} m={m}");
        let o = nhsdp(dir.path(), &["simulate", "p.txt", "--N", "2", "--demands", "sample:64"]);
        assert_eq!(o.status.code(), Some(0), "v={v} m={m}: {}", stdout(&o));
        assert!(stdout(&o).contains("demands decoded"));
    }
}

#[test]
fn identical_invocations_give_identical_files() {
    let dir = TempDir::new().unwrap();
    let run = |name: &str| {
        let o = nhsdp(dir.path(), &["compare", "--schemes", "NHSDP,ZCW,YTCC,MN", "--K", "33", "--out", name]);
        assert_eq!(o.status.code(), Some(0));
        fs::read(dir.path().join(name)).unwrap()
    };
    let a = run("a.csv");
    assert_eq!(a, run("b.csv"));
    let text = String::from_utf8(a).unwrap();
    assert!(
        text.starts_with("scheme,params,K,memory_ratio_num,memory_ratio_den,load_num,load_den,F,gain_num,gain_den\n")
    );
    assert!(text.contains("ZCW,m=5;w=2,32,"));
    assert!(text.contains("NHSDP,m1=1;m2=1;m3=1;n=3;v=33,33,25,33,1,1,"));

    fs::write(dir.path().join("pda.txt"), EXAMPLE).unwrap();
    let sim = |name: &str| {
        nhsdp(dir.path(), &["--seed", "9", "simulate", "pda.txt", "--N", "3", "--demands", "0,1,2,0", "--out", name]);
        fs::read(dir.path().join(name)).unwrap()
    };
    assert_eq!(sim("t1.json"), sim("t2.json"));
}

#[test]
fn designs_and_searches() {
    let dir = TempDir::new().unwrap();
    let o = nhsdp(dir.path(), &["ntap", "--n", "2", "--out", "n.json"]);
    assert_eq!(stdout(&o).trim(), "4 elements over Z_9: progression-free");
    let o = nhsdp(dir.path(), &["phf", "n.json", "--out", "phf.json"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("(3; 36, 9, 3) PHF: valid"));
    let o = nhsdp(dir.path(), &["phf", "phf.json"]);
    assert_eq!(o.status.code(), Some(0));
    fs::write(dir.path().join("bad.json"), "{\"r\":1,\"m\":3,\"q\":2,\"t\":3,\"grid\":[[0,1,1]]}").unwrap();
    assert_eq!(nhsdp(dir.path(), &["phf", "bad.json"]).status.code(), Some(1));
    let o = nhsdp(dir.path(), &["ds-search", "--q", "2", "--out", "ds.json"]);
    assert_eq!(stdout(&o).trim(), "q = 2: difference set [0, 1, 3] mod 7");
    let o = nhsdp(dir.path(), &["verify-nhsdp", "ds.json"]);
    assert_eq!(stdout(&o).trim(), "(7,3,1) NHSDP: valid");
    let o = nhsdp(dir.path(), &["solve-params", "--v", "63", "--n", "2", "--exact"]);
    assert!(stdout(&o).contains("m = [3, 4]: b = 12"));
}

#[test]
fn conjugate_and_group() {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join("pda.txt"), EXAMPLE).unwrap();
    let o = nhsdp(dir.path(), &["conjugate", "pda.txt", "--out", "c.txt"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("-> (4,4,2,4) PDA"));
    let o = nhsdp(dir.path(), &["group", "pda.txt", "--K", "8", "--out", "g.txt"]);
    assert!(stdout(&o).contains("-> (8,4,2,8) PDA"), "{}", stdout(&o));
    assert_eq!(nhsdp(dir.path(), &["verify-pda", "g.txt"]).status.code(), Some(0));
}

#[test]
fn usage_errors_exit_2() {
    let dir = TempDir::new().unwrap();
    let o = nhsdp(dir.path(), &["no-such-command"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));
    assert_eq!(nhsdp(dir.path(), &["construct-nhsdp", "--v", "124", "--m", "2"]).status.code(), Some(2));
    assert_eq!(nhsdp(dir.path(), &["construct-nhsdp", "--v", "9", "--m", "5"]).status.code(), Some(2));
    assert_eq!(nhsdp(dir.path(), &["verify-pda", "missing.txt"]).status.code(), Some(2));
    assert_eq!(nhsdp(dir.path(), &["compare", "--schemes", "STD", "--K", "9"]).status.code(), Some(2));
    let o = nhsdp(dir.path(), &["--format", "csv", "construct-nhsdp", "--v", "9", "--m", "1", "--out", "x"]);
    assert_eq!(o.status.code(), Some(2));
}
