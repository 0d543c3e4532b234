//! End-to-end tests of the `feshlab` binary: exit codes, CSV contracts,
//! determinism, and the documented physics examples for each command.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_feshlab")
}

fn tmp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("feshlab-test-{tag}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let path = dir.join("run.cfg");
    std::fs::write(&path, body).unwrap();
    path
}

fn run(args: &[&str]) -> Output {
    Command::new(bin())
        .args(args)
        .output()
        .expect("failed to launch feshlab")
}

fn assert_exit(out: &Output, code: i32) {
    assert_eq!(
        out.status.code(),
        Some(code),
        "exit code mismatch\nstdout:\n{}\nstderr:\n{}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

/// Parses a CSV produced by the tool: returns (comment lines, header, rows).
fn read_csv(path: &Path) -> (Vec<String>, String, Vec<Vec<f64>>) {
    let text = std::fs::read_to_string(path)
        .unwrap_or_else(|e| panic!("cannot read {}: {e}", path.display()));
    let mut comments = Vec::new();
    let mut header = String::new();
    let mut rows = Vec::new();
    for line in text.lines() {
        if line.starts_with('#') {
            comments.push(line.to_string());
        } else if header.is_empty() {
            header = line.to_string();
        } else {
            rows.push(
                line.split(',')
                    .map(|f| f.parse::<f64>().expect("numeric CSV field"))
                    .collect(),
            );
        }
    }
    (comments, header, rows)
}

#[test]
fn config_errors_exit_2() {
    let dir = tmp_dir("cfg-errors");

    let cfg = write_config(&dir, "no_such_key = 1\n");
    let out = run(&["bound", "--config", cfg.to_str().unwrap()]);
    assert_exit(&out, 2);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("unknown key"), "stderr: {err}");
    assert!(err.contains("line 1"), "stderr: {err}");

    let cfg = write_config(&dir, "bound_window_lo_cm = -1\nbound_window_hi_cm = -5\n");
    let out = run(&["bound", "--config", cfg.to_str().unwrap()]);
    assert_exit(&out, 2);

    let cfg = write_config(&dir, "potential_file = missing.dat\n");
    let out = run(&["bound", "--config", cfg.to_str().unwrap()]);
    assert_exit(&out, 2);

    let out = run(&["bound", "--config", "/nonexistent/path.cfg"]);
    assert_exit(&out, 2);

    let cfg = write_config(&dir, "method = nope\n");
    let out = run(&["bound", "--config", cfg.to_str().unwrap()]);
    assert_exit(&out, 2);

    // Duplicate keys are rejected, with both line numbers reported.
    let cfg = write_config(&dir, "grid_density = 2\ngrid_density = 3\n");
    let out = run(&["bound", "--config", cfg.to_str().unwrap()]);
    assert_exit(&out, 2);
}

#[test]
fn phase_runs_are_byte_identical_and_carry_provenance() {
    let dir = tmp_dir("determinism");
    let cfg = write_config(
        &dir,
        "phase_window_lo_cm = 2.0\nphase_window_hi_cm = 8.0\nphase_step_cm = 0.1\n",
    );
    let out_a = dir.join("a");
    let out_b = dir.join("b");
    for out_dir in [&out_a, &out_b] {
        let out = run(&[
            "phase",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out_dir.to_str().unwrap(),
        ]);
        assert_exit(&out, 0);
    }
    for name in ["phase_adiabatic.csv", "phase_optimized.csv", "rotation.csv"] {
        let a = std::fs::read(out_a.join(name)).unwrap();
        let b = std::fs::read(out_b.join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between identical runs");
        assert!(!a.is_empty());
    }

    let (comments, header, rows) = read_csv(&out_a.join("phase_adiabatic.csv"));
    assert_eq!(comments[0], "# feshlab phase");
    assert!(
        comments.iter().any(|c| c.starts_with("# config phase_step_cm = ")),
        "resolved config must be embedded"
    );
    assert!(
        comments.iter().any(|c| c.contains("coupling_amplitude")),
        "model parameters must be embedded"
    );
    assert_eq!(header, "E_cm,sin2_deltaS,sin2_deltar,delta_bg");
    assert_eq!(rows.len(), 61);

    let (_, header, rot_rows) = read_csv(&out_a.join("rotation.csv"));
    assert_eq!(header, "E_cm,theta_c,theta_o,Y_oc_opt");
    assert_eq!(rot_rows.len(), 61);
    // The optimized off-diagonal stays below unity between the thresholds.
    assert!(rot_rows.iter().all(|r| r[3].abs() < 1.0));
}

#[test]
fn bound_empty_window_yields_empty_csv_exit_0() {
    let dir = tmp_dir("empty-bound");
    // A window far below the potential minimum cannot hold any level.
    let cfg = write_config(
        &dir,
        "bound_window_lo_cm = -6000.0\nbound_window_hi_cm = -5900.0\n",
    );
    let out = run(&[
        "bound",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.join("out").to_str().unwrap(),
    ]);
    assert_exit(&out, 0);
    for name in ["bound_mfgh.csv", "bound_qdt.csv"] {
        let (_, header, rows) = read_csv(&dir.join("out").join(name));
        assert!(!header.is_empty(), "{name} must keep its header");
        assert!(rows.is_empty(), "{name} must have no data rows");
    }
}

#[test]
fn method_flag_selects_engines() {
    let dir = tmp_dir("method-flag");
    let cfg = write_config(
        &dir,
        "bound_window_lo_cm = -6000.0\nbound_window_hi_cm = -5900.0\n",
    );
    let out_dir = dir.join("out");
    let out = run(&[
        "bound",
        "--config",
        cfg.to_str().unwrap(),
        "--method",
        "qdt",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_exit(&out, 0);
    assert!(out_dir.join("bound_qdt.csv").is_file());
    assert!(!out_dir.join("bound_mfgh.csv").exists());
    assert!(!out_dir.join("bound_compare.csv").exists());
}

/// With the interchannel coupling off and the spin-orbit term held constant,
/// the open channel is an exact Morse well whose spectrum is known in closed
/// form; the closed channel is the same well shifted up by the full
/// fine-structure split.  Both engines must reproduce that union.
#[test]
fn decoupled_bound_levels_match_morse_oracle() {
    let dir = tmp_dir("morse-oracle");
    let cfg = write_config(
        &dir,
        "coupling_amplitude = 0\nso_amplitude = 0\nc3 = 0\n\
         bound_window_lo_cm = -81.0\nbound_window_hi_cm = -1.0\n",
    );
    let out_dir = dir.join("out");
    let out = run(&[
        "bound",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_exit(&out, 0);

    // Closed-form Morse spectrum, in wavenumbers relative to the threshold.
    let cm = 219_474.631_370_54f64;
    let mu = 77_392.38f64;
    let depth_cm = 2000.0;
    let d = depth_cm / cm;
    let lambda = (2.0 * mu * d).sqrt() / 0.40;
    let morse = |v: usize| -d * (1.0 - (v as f64 + 0.5) / lambda).powi(2) * cm;
    let split = 237.6;
    let mut oracle: Vec<f64> = Vec::new();
    for v in 0..lambda as usize {
        for shift in [0.0, split] {
            let e = morse(v) + shift;
            if (-81.0..=-1.0).contains(&e) {
                oracle.push(e);
            }
        }
    }
    oracle.sort_by(|a, b| a.partial_cmp(b).unwrap());
    assert!(oracle.len() >= 20, "oracle window unexpectedly sparse");

    for name in ["bound_mfgh.csv", "bound_qdt.csv"] {
        let (_, _, rows) = read_csv(&out_dir.join(name));
        assert_eq!(
            rows.len(),
            oracle.len(),
            "{name}: level count vs oracle"
        );
        for (row, want) in rows.iter().zip(&oracle) {
            assert!(
                (row[0] - want).abs() <= 1.0e-3,
                "{name}: level {} vs oracle {} differs by {}",
                row[0],
                want,
                (row[0] - want).abs()
            );
        }
    }
}

/// Resonance positions are representation-independent; with weak coupling
/// the two conventions coincide far below the default tolerance, so the
/// rotated and non-rotated runs must produce the same position list.
#[test]
fn qdt_dual_run_positions_agree() {
    let dir = tmp_dir("dual-run");
    // -100 cm^-1 Gaussian coupling (atomic units).
    let cfg = write_config(
        &dir,
        "coupling_amplitude = -4.556335e-4\n\
         resonance_window_lo_cm = 2.0\nresonance_window_hi_cm = 40.0\n",
    );
    let out_rot = dir.join("rot");
    let out_plain = dir.join("plain");
    for (out_dir, rotated) in [(&out_rot, "true"), (&out_plain, "false")] {
        let out = run(&[
            "resonances",
            "--config",
            cfg.to_str().unwrap(),
            "--method",
            "qdt",
            "--rotated",
            rotated,
            "--out",
            out_dir.to_str().unwrap(),
        ]);
        assert_exit(&out, 0);
    }
    let (_, header, rot) = read_csv(&out_rot.join("resonances_qdt.csv"));
    assert_eq!(header, "E_cm,E0_cm,shift_cm,gamma_cm,isolated");
    let (_, _, plain) = read_csv(&out_plain.join("resonances_qdt.csv"));
    assert!(!rot.is_empty(), "no resonances in the window");
    assert_eq!(rot.len(), plain.len(), "resonance counts differ");
    for (a, b) in rot.iter().zip(&plain) {
        assert!(
            (a[0] - b[0]).abs() <= 1.0e-4,
            "positions differ: {} vs {}",
            a[0],
            b[0]
        );
    }
    // The optimized representation absorbs the level shift by construction.
    assert!(rot.iter().all(|r| r[2] == 0.0));
}

/// No closed-channel level sits below the first resonance; an early window
/// must come back empty with a clean exit.
#[test]
fn resonances_empty_window_exit_0() {
    let dir = tmp_dir("empty-res");
    let cfg = write_config(
        &dir,
        "resonance_window_lo_cm = 0.5\nresonance_window_hi_cm = 2.0\n",
    );
    let out_dir = dir.join("out");
    let out = run(&[
        "resonances",
        "--config",
        cfg.to_str().unwrap(),
        "--method",
        "qdt",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_exit(&out, 0);
    let (_, _, rows) = read_csv(&out_dir.join("resonances_qdt.csv"));
    assert!(rows.is_empty());
}

/// Decoupled model: the resonant part of the phase vanishes identically in
/// both representations.
#[test]
fn decoupled_resonant_phase_is_zero() {
    let dir = tmp_dir("phase-decoupled");
    let cfg = write_config(
        &dir,
        "coupling_amplitude = 0\nso_amplitude = 0\n\
         phase_window_lo_cm = 2.0\nphase_window_hi_cm = 10.0\nphase_step_cm = 0.1\n",
    );
    let out_dir = dir.join("out");
    let out = run(&[
        "phase",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_exit(&out, 0);
    for name in ["phase_adiabatic.csv", "phase_optimized.csv"] {
        let (_, _, rows) = read_csv(&out_dir.join(name));
        assert!(!rows.is_empty());
        for row in &rows {
            assert!(
                row[2].abs() <= 1.0e-20,
                "{name}: sin2_deltar = {} at E = {}",
                row[2],
                row[0]
            );
        }
    }
}

/// Through one isolated resonance the total phase rises by pi on top of the
/// smooth background; the command reports the background-corrected rise.
#[test]
fn phase_rises_by_pi_through_isolated_resonance() {
    let dir = tmp_dir("phase-pi");
    let cfg = write_config(
        &dir,
        "phase_window_lo_cm = 11.55\nphase_window_hi_cm = 13.35\nphase_step_cm = 0.005\n",
    );
    let out = run(&[
        "phase",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.join("out").to_str().unwrap(),
    ]);
    assert_exit(&out, 0);
    let stdout = String::from_utf8_lossy(&out.stdout);
    let excess_line = stdout
        .lines()
        .find(|l| l.contains("excess of edge-slope background"))
        .expect("summary line missing");
    let value: f64 = excess_line
        .split('=')
        .nth(1)
        .unwrap()
        .trim()
        .trim_end_matches(" rad")
        .parse()
        .unwrap();
    assert!(
        (value - std::f64::consts::PI).abs() <= 0.35,
        "excess rise {value} not within 0.35 of pi"
    );
}

/// A tabulated potential sampled from the built-in model at full precision
/// must drive the whole pipeline to the same answers as the built-in model
/// itself: identical data rows, only the provenance header differs.
#[test]
fn potential_file_reproduces_builtin_model() {
    use feshlab_core::potential::{synthetic_model, SyntheticModelParams};

    let dir = tmp_dir("potfile");
    let input = synthetic_model(&SyntheticModelParams::default());
    let mut table = String::new();
    table.push_str(&format!("# reduced_mass_me = {:.17e}\n", input.reduced_mass));
    table.push_str(&format!("# asymptote_hartree = {:.17e}\n", input.asymptote));
    for i in 0..input.r.len() {
        table.push_str(&format!(
            "{:.17e} {:.17e} {:.17e} {:.17e}\n",
            input.r[i], input.v_a[i], input.v_b[i], input.a_so[i]
        ));
    }
    std::fs::write(dir.join("curves.dat"), table).unwrap();

    let window = "bound_window_lo_cm = -16.0\nbound_window_hi_cm = -11.0\n";
    let cfg_file = write_config(&dir, &format!("potential_file = curves.dat\n{window}"));
    let cfg_builtin = dir.join("builtin.cfg");
    std::fs::write(&cfg_builtin, window).unwrap();

    let out_file = dir.join("from-file");
    let out_builtin = dir.join("builtin");
    for (cfg, out_dir) in [(&cfg_file, &out_file), (&cfg_builtin.clone(), &out_builtin)] {
        let out = run(&[
            "bound",
            "--config",
            cfg.to_str().unwrap(),
            "--method",
            "qdt",
            "--out",
            out_dir.to_str().unwrap(),
        ]);
        assert_exit(&out, 0);
    }
    let rows = |p: &Path| -> Vec<String> {
        std::fs::read_to_string(p)
            .unwrap()
            .lines()
            .filter(|l| !l.starts_with('#'))
            .map(str::to_string)
            .collect()
    };
    let a = rows(&out_file.join("bound_qdt.csv"));
    let b = rows(&out_builtin.join("bound_qdt.csv"));
    assert!(a.len() > 1, "no levels found");
    assert_eq!(a, b, "tabulated potential gave different levels");
}

/// Self-comparison of a single engine must report zero deltas everywhere.
#[test]
fn compare_single_method_is_all_zeros() {
    let dir = tmp_dir("compare-self");
    let cfg = write_config(
        &dir,
        "bound_window_lo_cm = -21.0\nbound_window_hi_cm = -11.0\n\
         resonance_window_lo_cm = 2.0\nresonance_window_hi_cm = 25.0\n",
    );
    let out_dir = dir.join("out");
    let out = run(&[
        "compare",
        "--config",
        cfg.to_str().unwrap(),
        "--method",
        "qdt",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_exit(&out, 0);

    let (_, _, bound) = read_csv(&out_dir.join("compare_bound.csv"));
    assert!(!bound.is_empty());
    assert!(bound.iter().all(|r| r[2] == 0.0), "bound deltas not zero");
    let (_, _, res) = read_csv(&out_dir.join("compare_resonances.csv"));
    assert!(!res.is_empty());
    assert!(res.iter().all(|r| r[2] == 0.0 && r[5] == 0.0));

    let report = std::fs::read_to_string(out_dir.join("compare_report.txt")).unwrap();
    assert!(report.contains("unmatched_mfgh 0"));
    assert!(report.contains("unmatched_qdt 0"));
}
