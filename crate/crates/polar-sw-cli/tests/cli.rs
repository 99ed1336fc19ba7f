//! End-to-end tests of the `polar-sw` binary: exit codes, file formats,
//! and round trips through real temp files.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use polar_sw::code::CodeSpec;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_polar-sw"))
        .args(args)
        .output()
        .expect("binary should spawn")
}

fn assert_ok(out: &Output) {
    assert!(
        out.status.success(),
        "exit {:?}, stderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("process should exit normally")
}

fn stderr_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

/// N = 256, K = 128, 16-bit checksum: 30-byte block payloads.
fn construct_spec(dir: &Path) -> PathBuf {
    let path = dir.join("spec.txt");
    let out = run(&[
        "construct",
        "--n",
        "8",
        "--rate",
        "0.5",
        "--design-p",
        "0.06",
        "--fidelity",
        "32",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_ok(&out);
    path
}

const BLOCK_BYTES: usize = 30;

/// Deterministic pseudo-random bytes.
fn lcg_bytes(seed: u64, len: usize) -> Vec<u8> {
    let mut state = seed.wrapping_mul(2862933555777941757).wrapping_add(3037000493);
    (0..len)
        .map(|_| {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            (state >> 33) as u8
        })
        .collect()
}

/// A few isolated one-bits per block, far fewer than the decoder budget.
fn sparse_blocks(blocks: usize) -> Vec<u8> {
    let mut data = vec![0u8; blocks * BLOCK_BYTES];
    for b in 0..blocks {
        for j in 0..3 {
            let bit = (b * 97 + j * 61) % (BLOCK_BYTES * 8);
            data[b * BLOCK_BYTES + bit / 8] |= 0x80 >> (bit % 8);
        }
    }
    data
}

fn flip_bits(data: &[u8], positions: &[usize]) -> Vec<u8> {
    let mut out = data.to_vec();
    for &bit in positions {
        out[bit / 8] ^= 0x80 >> (bit % 8);
    }
    out
}

#[test]
fn construct_writes_a_loadable_spec() {
    let dir = tempfile::tempdir().unwrap();
    let path = construct_spec(dir.path());
    let spec = CodeSpec::load_from_path(&path).unwrap();
    assert_eq!(spec.block_len(), 256);
    assert_eq!(spec.dim(), 128);
    assert_eq!(spec.l_crc(), 16);

    let by_k = dir.path().join("by_k.txt");
    let out = run(&[
        "construct",
        "--n",
        "6",
        "--K",
        "20",
        "--design-p",
        "0.1",
        "--crc",
        "none",
        "--fidelity",
        "16",
        "--out",
        by_k.to_str().unwrap(),
    ]);
    assert_ok(&out);
    let spec = CodeSpec::load_from_path(&by_k).unwrap();
    assert_eq!(spec.dim(), 20);
    assert_eq!(spec.l_crc(), 0);
}

#[test]
fn construct_rejects_out_of_range_rate() {
    let out = run(&[
        "construct", "--n", "8", "--rate", "1.5", "--design-p", "0.06", "--out", "/dev/null",
    ]);
    assert_eq!(code(&out), 2, "stderr: {}", stderr_of(&out));
    let out = run(&[
        "construct", "--n", "8", "--design-p", "0.06", "--out", "/dev/null",
    ]);
    assert_eq!(code(&out), 2, "one of --K/--rate must be present");
}

#[test]
fn single_mode_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let spec = construct_spec(dir.path());
    let spec = spec.to_str().unwrap();
    let input = dir.path().join("x.bin");
    fs::write(&input, sparse_blocks(3)).unwrap();
    let compressed = dir.path().join("x.psw");
    let out = run(&[
        "compress", "--mode", "single", "--spec", spec,
        "--in", input.to_str().unwrap(),
        "--out", compressed.to_str().unwrap(),
    ]);
    assert_ok(&out);
    let restored = dir.path().join("x_hat.bin");
    let out = run(&[
        "decompress", "--mode", "single", "--spec", spec, "--p", "0.02",
        "--x", compressed.to_str().unwrap(),
        "--out", restored.to_str().unwrap(),
    ]);
    assert_ok(&out);
    assert_eq!(fs::read(&restored).unwrap(), fs::read(&input).unwrap());
}

#[test]
fn single_mode_zero_file_gives_zero_syndromes() {
    let dir = tempfile::tempdir().unwrap();
    let spec = construct_spec(dir.path());
    let input = dir.path().join("zeros.bin");
    fs::write(&input, vec![0u8; 2 * BLOCK_BYTES]).unwrap();
    let compressed = dir.path().join("zeros.psw");
    let out = run(&[
        "compress", "--mode", "single", "--spec", spec.to_str().unwrap(),
        "--in", input.to_str().unwrap(),
        "--out", compressed.to_str().unwrap(),
    ]);
    assert_ok(&out);
    let bytes = fs::read(&compressed).unwrap();
    assert_eq!(&bytes[..4], b"PSW1");
    assert!(bytes[21..].iter().all(|&b| b == 0), "syndromes must be zero");
}

#[test]
fn asym_round_trip_with_side_information() {
    let dir = tempfile::tempdir().unwrap();
    let spec = construct_spec(dir.path());
    let spec = spec.to_str().unwrap();
    let y = lcg_bytes(11, 2 * BLOCK_BYTES);
    let x = flip_bits(&y, &[13, 155, 201, 388, 412]);
    let y_path = dir.path().join("y.bin");
    let x_path = dir.path().join("x.bin");
    fs::write(&y_path, &y).unwrap();
    fs::write(&x_path, &x).unwrap();
    let compressed = dir.path().join("x.psw");
    let out = run(&[
        "compress", "--mode", "asym", "--spec", spec,
        "--in", x_path.to_str().unwrap(),
        "--out", compressed.to_str().unwrap(),
    ]);
    assert_ok(&out);
    let restored = dir.path().join("x_hat.bin");
    let out = run(&[
        "decompress", "--mode", "asym", "--spec", spec, "--p", "0.03",
        "--x", compressed.to_str().unwrap(),
        "--side-info", y_path.to_str().unwrap(),
        "--out", restored.to_str().unwrap(),
    ]);
    assert_ok(&out);
    assert_eq!(fs::read(&restored).unwrap(), x);
}

#[test]
fn nonasym_round_trip_recovers_both_sources() {
    let dir = tempfile::tempdir().unwrap();
    let spec = construct_spec(dir.path());
    let spec = spec.to_str().unwrap();
    let y = lcg_bytes(29, 2 * BLOCK_BYTES);
    let x = flip_bits(&y, &[3, 77, 240, 301, 440]);
    let y_path = dir.path().join("y.bin");
    let x_path = dir.path().join("x.bin");
    fs::write(&y_path, &y).unwrap();
    fs::write(&x_path, &x).unwrap();
    let cx = dir.path().join("x.psw");
    let cy = dir.path().join("y.psw");
    for (mode, input, outp) in [("nonasym-x", &x_path, &cx), ("nonasym-y", &y_path, &cy)] {
        let out = run(&[
            "compress", "--mode", mode, "--spec", spec, "--k1", "64",
            "--in", input.to_str().unwrap(),
            "--out", outp.to_str().unwrap(),
        ]);
        assert_ok(&out);
    }
    let rx = dir.path().join("x_hat.bin");
    let ry = dir.path().join("y_hat.bin");
    let out = run(&[
        "decompress", "--mode", "nonasym", "--spec", spec, "--p", "0.03",
        "--x", cx.to_str().unwrap(),
        "--y", cy.to_str().unwrap(),
        "--out", rx.to_str().unwrap(),
        "--out", ry.to_str().unwrap(),
    ]);
    assert_ok(&out);
    assert_eq!(fs::read(&rx).unwrap(), x);
    assert_eq!(fs::read(&ry).unwrap(), y);
}

#[test]
fn corrupted_stream_exits_three_but_still_writes_output() {
    let dir = tempfile::tempdir().unwrap();
    let spec = construct_spec(dir.path());
    let spec = spec.to_str().unwrap();
    let input = dir.path().join("x.bin");
    fs::write(&input, sparse_blocks(2)).unwrap();
    let compressed = dir.path().join("x.psw");
    let out = run(&[
        "compress", "--mode", "single", "--spec", spec,
        "--in", input.to_str().unwrap(),
        "--out", compressed.to_str().unwrap(),
    ]);
    assert_ok(&out);
    let mut bytes = fs::read(&compressed).unwrap();
    let last = bytes.len() - 1;
    bytes[last] ^= 0xFF;
    fs::write(&compressed, bytes).unwrap();
    let restored = dir.path().join("x_hat.bin");
    let out = run(&[
        "decompress", "--mode", "single", "--spec", spec, "--p", "0.02",
        "--x", compressed.to_str().unwrap(),
        "--out", restored.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 3, "stderr: {}", stderr_of(&out));
    assert_eq!(
        fs::read(&restored).unwrap().len(),
        2 * BLOCK_BYTES,
        "output must be written even when the checksum fails"
    );
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let spec = construct_spec(dir.path());
    let spec = spec.to_str().unwrap();
    let input = dir.path().join("x.bin");
    fs::write(&input, sparse_blocks(1)).unwrap();
    let cases: Vec<Vec<&str>> = vec![
        // --k1 outside the nonasym modes
        vec![
            "compress", "--mode", "single", "--spec", spec, "--k1", "4",
            "--in", input.to_str().unwrap(), "--out", "/dev/null",
        ],
        // missing --k1 in a nonasym mode
        vec![
            "compress", "--mode", "nonasym-x", "--spec", spec,
            "--in", input.to_str().unwrap(), "--out", "/dev/null",
        ],
        // nonasym decompress wants --out twice
        vec![
            "decompress", "--mode", "nonasym", "--spec", spec, "--p", "0.03",
            "--x", "a.psw", "--y", "b.psw", "--out", "/dev/null",
        ],
        // both sweep grids at once
        vec![
            "simulate", "--mode", "single", "--spec", spec,
            "--p-list", "0.02", "--h-list", "0.2",
        ],
        // unknown flag is rejected by the parser
        vec!["simulate", "--mode", "single", "--spec", spec, "--frobnicate"],
    ];
    for args in cases {
        let out = run(&args);
        assert_eq!(code(&out), 2, "args {args:?}, stderr: {}", stderr_of(&out));
    }
}

#[test]
fn wrong_input_size_exits_one_and_names_the_block_size() {
    let dir = tempfile::tempdir().unwrap();
    let spec = construct_spec(dir.path());
    let input = dir.path().join("short.bin");
    fs::write(&input, vec![0u8; 17]).unwrap();
    let out = run(&[
        "compress", "--mode", "single", "--spec", spec.to_str().unwrap(),
        "--in", input.to_str().unwrap(),
        "--out", "/dev/null",
    ]);
    assert_eq!(code(&out), 1);
    assert!(
        stderr_of(&out).contains("30-byte"),
        "stderr should name the expected block size: {}",
        stderr_of(&out)
    );
}

#[test]
fn spec_digest_mismatch_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let spec_a = construct_spec(dir.path());
    let spec_b = dir.path().join("other.txt");
    let out = run(&[
        "construct", "--n", "8", "--rate", "0.5", "--design-p", "0.09",
        "--fidelity", "32", "--out", spec_b.to_str().unwrap(),
    ]);
    assert_ok(&out);
    let input = dir.path().join("x.bin");
    fs::write(&input, sparse_blocks(1)).unwrap();
    let compressed = dir.path().join("x.psw");
    let out = run(&[
        "compress", "--mode", "single", "--spec", spec_a.to_str().unwrap(),
        "--in", input.to_str().unwrap(),
        "--out", compressed.to_str().unwrap(),
    ]);
    assert_ok(&out);
    let out = run(&[
        "decompress", "--mode", "single", "--spec", spec_b.to_str().unwrap(),
        "--p", "0.02",
        "--x", compressed.to_str().unwrap(),
        "--out", "/dev/null",
    ]);
    assert_eq!(code(&out), 1);
    assert!(stderr_of(&out).contains("digest"), "stderr: {}", stderr_of(&out));
}

#[test]
fn simulate_reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let spec = construct_spec(dir.path());
    let args = [
        "simulate", "--mode", "asym", "--spec", spec.to_str().unwrap(),
        "--p-list", "0.02,0.06", "--max-blocks", "12", "--seed", "7",
        "--threshold-ber", "1e-3",
    ];
    let first = run(&args);
    let second = run(&args);
    assert_ok(&first);
    assert_eq!(first.stdout, second.stdout);
    let text = String::from_utf8(first.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "mode,N,K,K1,p,h_cond,blocks,bit_errors_x,bit_errors_y,ber_avg,block_errors,crc_fails"
    );
    assert_eq!(text.lines().filter(|l| l.starts_with("asym,256,128,0,")).count(), 2);
    assert!(text.lines().any(|l| l.starts_with("# rng = chacha8, seed = 7")));
    assert!(text.lines().any(|l| l.starts_with("# threshold_h = ")));
}

#[test]
fn simulate_h_list_converts_entropies() {
    let dir = tempfile::tempdir().unwrap();
    let spec = construct_spec(dir.path());
    let csv_path = dir.path().join("sweep.csv");
    let out = run(&[
        "simulate", "--mode", "single", "--spec", spec.to_str().unwrap(),
        "--h-list", "0.2,0.3", "--max-blocks", "6", "--jobs", "1",
        "--out", csv_path.to_str().unwrap(),
    ]);
    assert_ok(&out);
    let text = fs::read_to_string(&csv_path).unwrap();
    let rows: Vec<&str> = text
        .lines()
        .filter(|l| l.starts_with("single,"))
        .collect();
    assert_eq!(rows.len(), 2);
    for (row, h_target) in rows.iter().zip([0.2f64, 0.3]) {
        let fields: Vec<&str> = row.split(',').collect();
        let p: f64 = fields[4].parse().unwrap();
        let h: f64 = fields[5].parse().unwrap();
        assert!(p > 0.0 && p < 0.5);
        assert!((h - h_target).abs() < 1e-9, "h column {h} vs target {h_target}");
    }
}
