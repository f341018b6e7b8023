//! End-to-end tests for the `ccsim` binary: replay goldens, CSV shape and
//! determinism, the allocation tables, and the documented exit codes.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
}

fn ccsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ccsim"))
        .args(args)
        .output()
        .expect("spawn ccsim")
}

fn stdout_of(out: &Output) -> String {
    assert!(
        out.status.success(),
        "expected success, got {:?}\nstderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).expect("utf-8 stdout")
}

fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

// ---- replay ----

#[test]
fn replay_matches_the_walkthrough_logs() {
    let ex1 = fixture("example1.fixture");
    let ex4 = fixture("example4.fixture");
    let cases: [(&Path, &str, &str); 5] = [
        (
            &ex1,
            "od",
            "1: b_1+0+0+0\n2: d_2+0+0+0\n3: a_1+b_2+0\n4: a_2+c_2+e_1\n5: d_1+0+0\n\
             6: c_1+0+0\n7: e_2+0+0\ntotal slots: 7\n",
        ),
        (
            &ex1,
            "sgd",
            "1: a_1+b_2+d_2\n2: a_2+c_2+e_1\n3: b_1+c_1\n4: d_1+e_2\ntotal slots: 4\n",
        ),
        (
            &ex1,
            "bgd",
            "1: b_1+e_2\n2: d_2+a_1+b_2\n3: a_2+c_2+e_1\n4: d_1\n5: c_1\ntotal slots: 5\n",
        ),
        (
            &ex4,
            "sgd",
            "1: a_1+b_2+d_2\n2: a_2+c_2+e_1\n3: b_1+c_1\n4: d_1\n5: e_2\ntotal slots: 5\n",
        ),
        (
            &ex4,
            "bgd",
            "1: b_1+e_2\n2: d_2+a_1+b_2\n3: d_1+c_1\n4: a_2+c_2+e_1\ntotal slots: 4\n",
        ),
    ];
    for (path, scheme, want) in cases {
        let out = ccsim(&["replay", path.to_str().unwrap(), scheme]);
        assert_eq!(stdout_of(&out), want, "replay {scheme}");
    }
}

#[test]
fn replay_rejects_bad_input_with_exit_two() {
    let out = ccsim(&["replay", "/no/such/file.fixture", "od"]);
    assert_eq!(exit_code(&out), 2);

    let ex1 = fixture("example1.fixture");
    let out = ccsim(&["replay", ex1.to_str().unwrap(), "warp"]);
    assert_eq!(exit_code(&out), 2);

    // Grouped delivery needs popularity context the fixture does not carry.
    let out = ccsim(&["replay", ex1.to_str().unwrap(), "grouped_od"]);
    assert_eq!(exit_code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("GROUPED_OD"));
}

// ---- run ----

#[test]
fn run_reports_the_uncached_rate_exactly() {
    let out = ccsim(&[
        "run", "--files", "4", "--users", "2", "--file-bits", "8", "--memory", "0",
        "--delivery", "uncoded", "--trials", "1", "--seed", "1",
    ]);
    let text = stdout_of(&out);
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("memory,scheme,mean_rate,std_error,trials,bound_rate")
    );
    // With empty caches every user needs its whole file, so the rate and the
    // analytic floor are both exactly the number of users.
    assert_eq!(lines.next(), Some("0,UNCODED,2.000000000,0,1,2.000000000"));
    assert_eq!(lines.next(), None);
}

#[test]
fn run_output_is_byte_stable() {
    let args = [
        "run", "--files", "6", "--users", "3", "--file-bits", "32", "--memory", "1",
        "--memory", "4", "--delivery", "sgd", "--trials", "15", "--seed", "9",
    ];
    let first = stdout_of(&ccsim(&args));
    let second = stdout_of(&ccsim(&args));
    assert_eq!(first, second);
    assert_eq!(first.lines().count(), 3, "header plus one row per grid point");
}

#[test]
fn run_merges_config_file_and_flag_overrides() {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR"));
    std::fs::create_dir_all(dir).unwrap();
    let config = dir.join("merge.toml");
    std::fs::write(
        &config,
        "n_files = 6\nn_users = 3\nfile_size_bits = 32\nzipf_alpha = 0.0\n\
         placement = \"UNIFORM\"\ndelivery = [\"OD\", \"SGD\"]\n\
         memory_grid = [1.0, 4.0]\ntrials = 15\nseed = 9\n",
    )
    .unwrap();

    let from_file = stdout_of(&ccsim(&["run", config.to_str().unwrap()]));
    let schemes: Vec<&str> = from_file
        .lines()
        .skip(1)
        .map(|line| line.split(',').nth(1).unwrap())
        .collect();
    assert_eq!(schemes, ["OD", "OD", "SGD", "SGD"]);

    // A delivery flag replaces the file's list; everything else carries over,
    // so the SGD rows must match the file-driven run byte for byte.
    let overridden = stdout_of(&ccsim(&["run", config.to_str().unwrap(), "--delivery", "sgd"]));
    let sgd_rows: Vec<&str> = from_file
        .lines()
        .filter(|line| line.contains(",SGD,"))
        .collect();
    let overridden_rows: Vec<&str> = overridden.lines().skip(1).collect();
    assert_eq!(overridden_rows, sgd_rows);
}

#[test]
fn run_writes_the_same_csv_to_a_file() {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR"));
    std::fs::create_dir_all(dir).unwrap();
    let path = dir.join("curve.csv");
    let args = [
        "run", "--files", "4", "--users", "2", "--file-bits", "8", "--memory", "2",
        "--delivery", "bgd", "--trials", "5", "--seed", "3",
    ];
    let on_stdout = stdout_of(&ccsim(&args));
    let mut with_out: Vec<&str> = args.to_vec();
    with_out.extend(["--out", path.to_str().unwrap()]);
    let out = ccsim(&with_out);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    assert_eq!(std::fs::read_to_string(&path).unwrap(), on_stdout);
}

#[test]
fn run_rejects_incomplete_or_unknown_input_with_exit_two() {
    // No config file and no flags for the required shape parameters.
    let out = ccsim(&["run", "--files", "4"]);
    assert_eq!(exit_code(&out), 2);

    let out = ccsim(&[
        "run", "--files", "4", "--users", "2", "--file-bits", "8", "--memory", "1",
        "--delivery", "warp", "--trials", "1",
    ]);
    assert_eq!(exit_code(&out), 2);

    let dir = Path::new(env!("CARGO_TARGET_TMPDIR"));
    std::fs::create_dir_all(dir).unwrap();
    let config = dir.join("unknown-key.toml");
    std::fs::write(&config, "n_files = 4\nwavelength = 3\n").unwrap();
    let out = ccsim(&["run", config.to_str().unwrap()]);
    assert_eq!(exit_code(&out), 2);
}

#[test]
fn run_rejects_constraint_violations_with_exit_three() {
    // Memory beyond the library's capacity.
    let out = ccsim(&[
        "run", "--files", "4", "--users", "2", "--file-bits", "8", "--memory", "9",
        "--delivery", "od", "--trials", "1",
    ]);
    assert_eq!(exit_code(&out), 3);

    // More users than files.
    let out = ccsim(&[
        "run", "--files", "2", "--users", "5", "--file-bits", "8", "--memory", "1",
        "--delivery", "od", "--trials", "1",
    ]);
    assert_eq!(exit_code(&out), 3);
}

// ---- allocate ----

#[test]
fn allocate_splits_a_half_budget_evenly() {
    let out = ccsim(&[
        "allocate", "--files", "5", "--users", "3", "--memory", "2.5", "--method", "exact",
    ]);
    let text = stdout_of(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("file,popularity,q,regime"));
    for (i, line) in lines.enumerate() {
        assert_eq!(
            line,
            format!("{},0.2000000000,0.5000000000,INTERIOR", i + 1)
        );
    }

    let out = ccsim(&[
        "allocate", "--files", "5", "--users", "3", "--memory", "2.5", "--method", "uniform",
    ]);
    for line in stdout_of(&out).lines().skip(1) {
        assert!(line.ends_with(",0.5000000000,"), "uniform row {line}");
    }
}

#[test]
fn allocate_saturates_every_file_at_full_memory() {
    let out = ccsim(&[
        "allocate", "--files", "5", "--users", "3", "--memory", "5", "--method", "exact",
    ]);
    for line in stdout_of(&out).lines().skip(1) {
        assert!(line.ends_with(",1.000000000,SATURATED"), "row {line}");
    }
}

#[test]
fn allocate_orders_fractions_by_popularity() {
    let out = ccsim(&[
        "allocate", "--files", "100", "--users", "16", "--memory", "20", "--alpha", "0.6",
        "--method", "exact",
    ]);
    let text = stdout_of(&out);
    let fractions: Vec<f64> = text
        .lines()
        .skip(1)
        .map(|line| line.split(',').nth(2).unwrap().parse().unwrap())
        .collect();
    assert_eq!(fractions.len(), 100);
    for pair in fractions.windows(2) {
        assert!(
            pair[0] >= pair[1] - 1e-12,
            "fractions must fall with rank: {} then {}",
            pair[0],
            pair[1]
        );
    }
}

#[test]
fn allocate_appends_a_group_summary_for_grouped_placement() {
    let out = ccsim(&[
        "allocate", "--files", "6", "--users", "3", "--memory", "2", "--alpha", "1.2",
        "--method", "grouped",
    ]);
    let text = stdout_of(&out);
    let mut sections = text.split("\n\n");
    let per_file = sections.next().unwrap();
    let summary = sections.next().expect("group summary table");
    assert!(per_file.starts_with("file,popularity,q,regime"));
    assert_eq!(per_file.lines().count(), 7);
    assert!(summary.starts_with("group,n_files,P_l,M_l"));

    // Group sizes must add back up to the file count.
    let total: usize = summary
        .lines()
        .skip(1)
        .map(|line| line.split(',').nth(1).unwrap().parse::<usize>().unwrap())
        .sum();
    assert_eq!(total, 6);
}
