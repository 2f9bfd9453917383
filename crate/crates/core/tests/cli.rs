use std::process::Command;

fn hj(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_hj")).args(args).output().expect("run hj");
    let s = |b: Vec<u8>| String::from_utf8(b).unwrap();
    (out.status.code().unwrap(), s(out.stdout), s(out.stderr))
}

#[test]
fn exact_value_exits_zero() {
    let (code, out, _) = hj(&["exact", "--vocab", "id 1", "--alpha", "2", "--c", "2"]);
    assert_eq!((code, out.trim()), (0, "2"));
}

#[test]
fn lower_bound_exits_one() {
    let (code, out, _) = hj(&["exact", "--vocab", "canonical 2", "--alpha", "2", "--c", "2", "--k-max", "2"]);
    assert_eq!(code, 1);
    assert!(out.starts_with(">= "), "{out}");
}

#[test]
fn budget_exits_two() {
    let (code, out, _) = hj(&["exact", "--vocab", "id 1", "--alpha", "3", "--c", "2", "--budget", "10"]);
    assert_eq!(code, 2);
    assert!(out.starts_with("BUDGET"));
    let (code, out, _) = hj(&["bound", "--vocab", "canonical 2", "--alpha", "2", "--c", "2", "--trace"]);
    assert_eq!(code, 2);
    assert!(out.contains("OVER BUDGET"), "{out}");
}

#[test]
fn bad_input_exits_three_on_stderr() {
    for args in [
        vec!["bound", "--kind", "nope"],
        vec!["exact", "--vocab", "id one", "--alpha", "2", "--c", "2"],
        vec!["bound", "--kind", "f0", "--vocab", "id 1", "--alpha", "2", "--c", "2"],
        vec!["polyramsey", "--q", "1", "--polys", "/nonexistent", "--colour", "seed:2", "--r", "1", "--t", "1"],
    ] {
        let (code, out, err) = hj(&args);
        assert_eq!(code, 3, "{args:?}");
        assert!(out.is_empty() && !err.is_empty(), "{args:?}");
    }
}

#[test]
fn selftest_passes() {
    let (code, out, _) = hj(&["selftest"]);
    assert_eq!(code, 0);
    let last = out.lines().last().unwrap();
    let (got, total) = last.trim_start_matches("selftest: ").trim_end_matches(" passed").split_once('/').unwrap();
    assert_eq!(got, total);
}

#[test]
fn hj_bound_needs_no_vocabulary() {
    let (code, out, _) = hj(&["bound", "--kind", "hj", "--n", "2", "--c", "5"]);
    assert_eq!((code, out.trim()), (0, "5"));
}
