//! Acceptance criterion 12: CLI determinism and CLI-level round trips.

use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_warpgeo"))
}

fn tmp(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR"));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

#[test]
fn acceptance_12_cli_determinism_and_round_trip() {
    // Fixtures: a flat polar seed, a null seed, and a restricted seed.
    let seeds = [
        (
            "acc12_polar.json",
            r#"{
  "schema": 1,
  "space": {"dim": 2, "index": 0},
  "base_point": [1.0, 0.0],
  "factors": [{"basis": [[1.0, 0.0]]}, {"basis": [[0.0, 1.0]]}],
  "a_vectors": [[1.0, 0.0]]
}"#,
            vec![vec![2.5, 0.0], vec![0.6, 0.8]],
        ),
        (
            "acc12_null.json",
            r#"{
  "schema": 1,
  "space": {"dim": 3, "index": 1},
  "base_point": [-0.5, 0.5, 0.0],
  "factors": [
    {"basis": [[1.0, 1.0, 0.0], [-0.5, 0.5, 0.0]]},
    {"basis": [[0.0, 0.0, 1.0]]}
  ],
  "a_vectors": [[1.0, 1.0, 0.0]],
  "b_vector": [-0.5, 0.5, 0.0]
}"#,
            // p_0 = b + 0.3 a, p_1 = graph point at t = 1: p_bar + e3 - a/2.
            vec![vec![-0.2, 0.8, 0.0], vec![-1.0, 0.0, 1.0]],
        ),
        (
            "acc12_sphere.json",
            r#"{
  "schema": 1,
  "space": {"dim": 3, "index": 0},
  "kappa": 1.0,
  "base_point": [1.0, 0.0, 0.0],
  "factors": [
    {"basis": [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]},
    {"basis": [[0.0, 0.0, 1.0]]}
  ],
  "a_vectors": [[1.0, 0.0, 0.0]]
}"#,
            vec![
                vec![0.6, 0.8, 0.0],
                vec![(0.4f64).cos(), 0.0, (0.4f64).sin()],
            ],
        ),
    ];

    let mut worst_round_trip = 0.0f64;
    for (name, body, point) in &seeds {
        let seed = tmp(name);
        std::fs::write(&seed, body).unwrap();

        // Byte-identical reports across two runs with a fixed seed.
        let (r1, r2) = (tmp(&format!("{name}.r1")), tmp(&format!("{name}.r2")));
        for r in [&r1, &r2] {
            let out = run(&[
                "validate",
                "--input",
                seed.to_str().unwrap(),
                "--samples",
                "150",
                "--seed",
                "7",
                "--report",
                r.to_str().unwrap(),
            ]);
            assert!(
                out.status.success(),
                "validate failed: {}",
                String::from_utf8_lossy(&out.stderr)
            );
        }
        assert_eq!(
            std::fs::read(&r1).unwrap(),
            std::fs::read(&r2).unwrap(),
            "reports differ for {name}"
        );

        // eval then invert recovers the input components.
        let point_json = serde_json::to_string(point).unwrap();
        let out = run(&[
            "eval",
            "--input",
            seed.to_str().unwrap(),
            "--point",
            &point_json,
        ]);
        assert!(
            out.status.success(),
            "eval failed: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        let q = String::from_utf8_lossy(&out.stdout).trim().to_string();
        let out = run(&[
            "invert",
            "--input",
            seed.to_str().unwrap(),
            "--ambient-point",
            &q,
        ]);
        assert!(
            out.status.success(),
            "invert failed: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        let back: Vec<Vec<f64>> =
            serde_json::from_str(String::from_utf8_lossy(&out.stdout).trim()).unwrap();
        for (orig, rec) in point.iter().zip(&back) {
            for (a, b) in orig.iter().zip(rec) {
                worst_round_trip = worst_round_trip.max((a - b).abs());
            }
        }
    }
    let pass = worst_round_trip <= 1e-9;
    println!(
        "[{}] criterion 12: cmd_validate reports byte-identical across runs; CLI eval/invert \
         round trip worst {worst_round_trip:.3e} (<= 1e-9)",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass);
}
