//! End-to-end tests driving the compiled binary.

use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_basecrypt"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8(output.stdout.clone()).expect("utf-8 stdout")
}

fn stderr(output: &Output) -> String {
    String::from_utf8(output.stderr.clone()).expect("utf-8 stderr")
}

fn tmp(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR"));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn write_tmp(name: &str, content: &str) -> PathBuf {
    let path = tmp(name);
    std::fs::write(&path, content).unwrap();
    path
}

const PIPELINE: &str = r#"
precision 64
alphabet b10 builtin 10
alphabet b36 builtin 36
input b10
step convert b10 b36
step eval b36 "*4.5/6-33"
"#;

#[test]
fn convert_hex_to_decimal() {
    let out = run(&["convert", "--from", "builtin:16", "--to", "builtin:10", "f"]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(stdout(&out), "15\n");
}

#[test]
fn convert_to_same_alphabet_is_identity() {
    let out = run(&["convert", "--from", "builtin:10", "--to", "builtin:10", "7"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out), "7\n");
}

#[test]
fn convert_notes_nonterminating_expansions() {
    let out = run(&[
        "convert",
        "--from",
        "builtin:7",
        "--to",
        "builtin:10",
        "--precision",
        "12",
        "2.3",
    ]);
    assert!(out.status.success());
    assert_eq!(stdout(&out), "2.428571428571\n");
    assert!(stderr(&out).contains("repeating (preperiod 0, period 6)"));
}

#[test]
fn eval_is_left_to_right() {
    let out = run(&["eval", "--alphabet", "builtin:10", "--expr", "X+2*3", "4"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out), "18\n");
}

#[test]
fn remap_with_roster_files_and_rotation() {
    let source = write_tmp("roster_src.txt", "abcde\n");
    let target = write_tmp("roster_tgt.txt", "aebcd\n");
    let out = run(&[
        "remap",
        "--from",
        &format!("file:{}", source.display()),
        "--to",
        &format!("file:{}", target.display()),
        "deed",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(stdout(&out), "cddc\n");

    // rotating right by one sends values 0,1,2 to glyphs e,a,b
    let out = run(&[
        "remap",
        "--from",
        &format!("file:{}", source.display()),
        "--rot",
        "1",
        "abc",
    ]);
    assert!(out.status.success());
    assert_eq!(stdout(&out), "eab\n");
}

#[test]
fn encode_then_decode_is_identity_on_message_files() {
    let pipeline = write_tmp("affine.pipeline", PIPELINE);
    let messages = write_tmp("messages.txt", "0\n42\n90210\n123456789\n");
    let encode = run(&[
        "encode",
        "--pipeline",
        pipeline.to_str().unwrap(),
        "--file",
        messages.to_str().unwrap(),
    ]);
    assert!(encode.status.success(), "{}", stderr(&encode));
    let encrypted = write_tmp("encrypted.txt", &stdout(&encode));

    let decode = run(&[
        "decode",
        "--pipeline",
        pipeline.to_str().unwrap(),
        "--file",
        encrypted.to_str().unwrap(),
    ]);
    assert!(decode.status.success(), "{}", stderr(&decode));
    assert_eq!(stdout(&decode), "0\n42\n90210\n123456789\n");
}

#[test]
fn modes_agree_on_the_reference_pipeline() {
    let pipeline = write_tmp("modes.pipeline", PIPELINE);
    let exact = run(&[
        "encode",
        "--pipeline",
        pipeline.to_str().unwrap(),
        "--mode",
        "exact",
        "90210",
    ]);
    let rendered = run(&[
        "encode",
        "--pipeline",
        pipeline.to_str().unwrap(),
        "--mode",
        "rendered",
        "90210",
    ]);
    assert!(exact.status.success() && rendered.status.success());
    assert_eq!(stdout(&exact), stdout(&rendered));
}

#[test]
fn invert_prints_a_runnable_pipeline_file() {
    let pipeline = write_tmp("invertme.pipeline", PIPELINE);
    let inverted_text = run(&["invert", "--pipeline", pipeline.to_str().unwrap()]);
    assert!(inverted_text.status.success());
    let inverted = write_tmp("inverted.pipeline", &stdout(&inverted_text));

    let encode = run(&["encode", "--pipeline", pipeline.to_str().unwrap(), "777"]);
    let ciphertext = stdout(&encode);
    let decode = run(&[
        "encode",
        "--pipeline",
        inverted.to_str().unwrap(),
        ciphertext.trim(),
    ]);
    assert!(decode.status.success(), "{}", stderr(&decode));
    assert_eq!(stdout(&decode), "777\n");
}

#[test]
fn deterministic_output_across_runs() {
    let first = run(&[
        "convert",
        "--from",
        "builtin:10",
        "--to",
        "builtin:36",
        "12345678901234567890",
    ]);
    let second = run(&[
        "convert",
        "--from",
        "builtin:10",
        "--to",
        "builtin:36",
        "12345678901234567890",
    ]);
    assert_eq!(first.stdout, second.stdout);
    assert!(first.status.success());
}

const SCHEDULE: &str = r#"
precision 32
alphabet b10 builtin 10
alphabet b16 builtin 16
pipeline head
input b10
step convert b10 b16
pipeline tail
input b10
step eval b10 "X*7+11"
segment 5 head
segment 5 tail
"#;

#[test]
fn segment_roundtrips_via_envelope_file() {
    let schedule = write_tmp("sched.pipeline", SCHEDULE);
    let enc = run(&[
        "segment",
        "--schedule",
        schedule.to_str().unwrap(),
        "0304200567",
    ]);
    assert!(enc.status.success(), "{}", stderr(&enc));
    let envelope_text = stdout(&enc);
    assert!(envelope_text.starts_with("segments 2\n"));
    let envelope = write_tmp("out.envelope", &envelope_text);

    let dec = run(&[
        "segment",
        "--schedule",
        schedule.to_str().unwrap(),
        "--envelope",
        envelope.to_str().unwrap(),
    ]);
    assert!(dec.status.success(), "{}", stderr(&dec));
    assert_eq!(stdout(&dec), "0304200567\n");
}

#[test]
fn crack_reports_planted_match() {
    let space = write_tmp(
        "tiny.space",
        "radices 10\ntemplates affine\naffine-ops +\nconstants max-num 99 max-den 1\nmax-steps 1\n",
    );
    let out = run(&[
        "crack",
        "--space",
        space.to_str().unwrap(),
        "--plain",
        "5",
        "--plain-alphabet",
        "builtin:10",
        "--cipher",
        "12",
        "--cipher-alphabet",
        "builtin:10",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("tested 101 candidates"), "{text}");
    assert!(text.contains("match 8 builtin:10 | eval \"X+7\""), "{text}");
}

#[test]
fn crack_cost_only_prints_counts() {
    let space = write_tmp(
        "cost.space",
        "radices 10\ntemplates affine\nconstants max-num 9 max-den 1\nmax-steps 2\n",
    );
    let out = run(&[
        "crack",
        "--space",
        space.to_str().unwrap(),
        "--cost-only",
        "--plain",
        "0",
        "--plain-alphabet",
        "builtin:10",
        "--cipher",
        "0",
        "--cipher-alphabet",
        "builtin:10",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("steps 1: 38"), "{text}");
    assert!(text.contains("steps 2: 1444"), "{text}");
    assert!(text.contains("total: 1483"), "{text}");
}

#[test]
fn alphabets_lists_rosters() {
    let out = run(&["alphabets"]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("builtin:16 0123456789abcdef"));

    let out = run(&["alphabets", "--radix", "36"]);
    assert_eq!(
        stdout(&out),
        "builtin:36 0123456789abcdefghijklmnopqrstuvwxyz\n"
    );
}

#[test]
fn selftest_replays_the_fixture() {
    let out = run(&["selftest"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("recovered plaintext: "));
    assert!(text.ends_with("roundtrip OK\n"), "{text}");
}

#[test]
fn exit_codes_distinguish_usage_and_domain_errors() {
    // unknown flag: clap usage error
    let out = run(&["convert", "--bogus"]);
    assert_eq!(out.status.code(), Some(2));

    // ambiguous message sources: usage error
    let file = write_tmp("ambig.txt", "5\n");
    let out = run(&[
        "convert",
        "--from",
        "builtin:10",
        "--to",
        "builtin:16",
        "5",
        "--file",
        file.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));

    // domain error: glyph outside the alphabet
    let out = run(&[
        "convert",
        "--from",
        "builtin:10",
        "--to",
        "builtin:16",
        "xyz",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("not in the alphabet"));

    // domain error: non-invertible pipeline
    let pipeline = write_tmp(
        "power.pipeline",
        "alphabet b10 builtin 10\ninput b10\nstep eval b10 \"X^6\"\n",
    );
    let out = run(&["decode", "--pipeline", pipeline.to_str().unwrap(), "64"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("not invertible"), "{}", stderr(&out));
}

#[test]
fn power_pipelines_decode_through_root_inverses() {
    let pipeline = write_tmp(
        "root.pipeline",
        "alphabet b10 builtin 10\ninput b10\nstep eval b10 \"X^6\" inverse root\n",
    );
    let encode = run(&["encode", "--pipeline", pipeline.to_str().unwrap(), "4.3"]);
    assert!(encode.status.success(), "{}", stderr(&encode));
    assert_eq!(stdout(&encode), "6321.363049\n");
    let decode = run(&[
        "decode",
        "--pipeline",
        pipeline.to_str().unwrap(),
        "6321.363049",
    ]);
    assert!(decode.status.success(), "{}", stderr(&decode));
    assert_eq!(stdout(&decode), "4.3\n");
}
