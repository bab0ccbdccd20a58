use assert_cmd::Command;

const TWO_POINTS: &str = r#"{"A":[[0,0],[10,0]],"B":[[0,0]]}"#;

fn rms() -> Command {
    Command::cargo_bin("rmsmatch").unwrap()
}

fn run(args: &[&str], stdin: &str) -> (i32, String) {
    let out = rms().args(args).write_stdin(stdin).output().unwrap();
    (out.status.code().unwrap(), String::from_utf8(out.stdout).unwrap())
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["pm", "local-min"], r#"{"A":[[0,0]],"B":[[0,0],[1,1]]}"#).0, 2);
    assert_eq!(run(&["pm", "local-min"], "{").0, 2);
    assert_eq!(run(&["pm", "trace", "--line", "0,0,1"], TWO_POINTS).0, 2);
    assert_eq!(run(&["haus", "local-min", "--dim", "3"], TWO_POINTS).0, 2);
    assert_eq!(run(&["gen", "lower-bound", "--l", "2", "--k", "4", "--dim", "2"], "").0, 0);
    let (_, inst) = run(&["gen", "lower-bound", "--l", "2", "--k", "4", "--dim", "2"], "");
    assert_eq!(run(&["pm", "subdivision", "--budget", "3"], &inst).0, 3);
    assert_eq!(run(&["oracle", "pm-minima", "--budget", "1"], TWO_POINTS).0, 3);
}

#[test]
fn trace_csv_rows() {
    let (code, out) = run(&["pm", "trace", "--line", "y=0", "--format", "csv"], TWO_POINTS);
    assert_eq!(code, 0);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "cell_index,param_start,param_end,matched_set,c,d_x,d_y");
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("0,,5,0,"));
}

#[test]
fn hausdorff_commands() {
    let (code, out) = run(&["haus", "local-min", "--dim", "2", "--variant", "uni"], TWO_POINTS);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["value"]["p"], "0");
    assert_eq!(v["value_decimal"], "0");
    let (code, out) = run(&["haus", "icp", "--dim", "1", "--start", "6"], TWO_POINTS);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["t_star"]["x"]["p"], "10");
    assert_eq!(v["iterations"], 1);
    let (code, out) = run(&["oracle", "h1-minima", "--format", "csv"], TWO_POINTS);
    assert_eq!(code, 0);
    assert_eq!(out.lines().count(), 3);
}

#[test]
fn outputs_are_deterministic() {
    let (_, inst) = run(&["gen", "random", "--n", "6", "--m", "3", "--seed", "5"], "");
    let (_, again) = run(&["gen", "random", "--n", "6", "--m", "3", "--seed", "5"], "");
    assert_eq!(inst, again);
    for args in [
        vec!["oracle", "h2-minima", "--variant", "l1"],
        vec!["pm", "global-min"],
        vec!["haus", "local-min", "--variant", "linf"],
    ] {
        let mut one = args.clone();
        one.extend(["--threads", "1"]);
        let mut four = args.clone();
        four.extend(["--threads", "4"]);
        let (c1, o1) = run(&one, &inst);
        let (c4, o4) = run(&four, &inst);
        assert_eq!((c1, c4), (0, 0));
        assert_eq!(o1, o4);
    }
}

#[test]
fn file_input_and_output() {
    let dir = std::env::temp_dir().join(format!("rmsmatch-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let input = dir.join("in.json");
    let output = dir.join("out.json");
    std::fs::write(&input, TWO_POINTS).unwrap();
    rms()
        .args(["oracle", "pm-minima", "--input", input.to_str().unwrap(), "--output", output.to_str().unwrap()])
        .assert()
        .success();
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&output).unwrap()).unwrap();
    assert_eq!(v["entries"].as_array().unwrap().len(), 2);
    std::fs::remove_dir_all(&dir).unwrap();
}
