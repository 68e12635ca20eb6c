use std::path::Path;
use std::process::{Command, Output};

fn lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_streamk-lab"))
        .args(args)
        .env_remove("STREAMK_LAB_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn fixture(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name).display().to_string()
}

#[test]
fn schedule_reports_dp_utilization() {
    let out = lab(&["schedule", "--m", "384", "--n", "384", "--k", "128", "--blk", "128x128x128", "--strategy", "dp", "--p", "4"]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("utilization 0.75"), "{}", stdout(&out));
}

#[test]
fn schedule_reports_stream_k_share_and_writes_svg() {
    let dir = tempfile::tempdir().unwrap();
    let svg = dir.path().join("g.svg");
    let out = lab(&[
        "schedule", "--m", "384", "--n", "384", "--k", "128", "--blk", "128x128x4",
        "--strategy", "streamk", "--g", "4", "--svg", svg.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("72 iters/CTA"), "{text}");
    assert!(text.contains("utilization 1 "), "{text}");
    assert!(text.contains("[0, 32, 64, 96]"), "{text}");
    assert!(std::fs::read_to_string(svg).unwrap().contains("<svg xmlns"));
}

#[test]
fn schedule_without_m_is_a_usage_error() {
    let out = lab(&["schedule", "--n", "384", "--k", "128"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--m"));
}

#[test]
fn run_int64_is_exact() {
    let out = lab(&["run", "--m", "150", "--n", "90", "--k", "200", "--blk", "32x32x16", "--g", "5", "--dtype", "i64", "--threads", "3"]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("PASS exact"), "{}", stdout(&out));
}

#[test]
fn run_float32_passes_within_bound() {
    let out = lab(&["run", "--m", "130", "--n", "70", "--k", "300", "--blk", "32x32x16", "--strategy", "2sk-dp", "--dtype", "f32"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("PASS max_rel_err=") && text.contains("<= bound="), "{text}");
}

#[test]
fn run_with_corrupted_output_fails() {
    let out = lab(&["run", "--m", "40", "--n", "40", "--k", "40", "--dtype", "i64", "--corrupt"]);
    assert!(!out.status.success());
    assert!(stdout(&out).contains("FAIL"));
}

#[test]
fn thread_count_comes_from_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_streamk-lab"))
        .args(["run", "--m", "20", "--n", "20", "--k", "20", "--dtype", "i64"])
        .env("STREAMK_LAB_THREADS", "3")
        .output()
        .unwrap();
    assert!(stdout(&out).contains("threads=3"), "{}", stdout(&out));
}

#[test]
fn sweep_is_deterministic_for_a_seed() {
    let args = ["sweep", "--samples", "100", "--seed", "9", "--p", "16"];
    let first = lab(&args);
    assert!(first.status.success());
    assert_eq!(stdout(&first), stdout(&lab(&args)));
    assert_eq!(stdout(&first).lines().count(), 1 + 100 * 4);
    assert_ne!(stdout(&first), stdout(&lab(&["sweep", "--samples", "100", "--seed", "10", "--p", "16"])));
}

#[test]
fn sweep_stream_k_never_loses_to_dp_under_unit_cost() {
    let out = lab(&["sweep", "--samples", "60", "--strategies", "dp,streamk", "--p", "12", "--blk", "64x64x16"]);
    let text = stdout(&out);
    let rows: Vec<Vec<String>> = text.lines().skip(1).map(|l| l.split(',').map(String::from).collect()).collect();
    assert_eq!(rows.len(), 120);
    for pair in rows.chunks(2) {
        let (dp, sk) = (&pair[0], &pair[1]);
        assert_eq!((dp[6].as_str(), sk[6].as_str()), ("dp", "streamk"));
        let t: usize = dp[4].parse().unwrap();
        let (u_dp, u_sk): (f64, f64) = (dp[8].parse().unwrap(), sk[8].parse().unwrap());
        if t % 12 != 0 {
            assert!(u_sk >= u_dp, "{dp:?} vs {sk:?}");
        }
    }
}

#[test]
fn sweep_rejects_zero_samples_and_bad_output() {
    assert_eq!(lab(&["sweep", "--samples", "0"]).status.code(), Some(2));
    assert_eq!(lab(&["sweep", "--m-range", "0:10"]).status.code(), Some(2));
    let out = lab(&["sweep", "--samples", "2", "--out", "/nonexistent-dir/x.csv"]);
    assert!(!out.status.success());
}

#[test]
fn sweep_can_execute_and_records_measured_time() {
    let out = lab(&["sweep", "--samples", "2", "--m-range", "16:64", "--n-range", "16:64", "--k-range", "16:64", "--blk", "16x16x8", "--p", "4", "--execute"]);
    assert!(out.status.success());
    for line in stdout(&out).lines().skip(1) {
        let measured = line.rsplit(',').next().unwrap();
        assert!(measured.parse::<f64>().unwrap() >= 0.0);
    }
}

#[test]
fn model_small_g_optimum_for_a_single_deep_tile() {
    let out = lab(&["model", "--m", "128", "--n", "128", "--k", "16384", "--params", &fixture("regimes.params"), "--p", "108"]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("argmin g=8\n"), "{}", stdout(&out));
}

#[test]
fn model_minimum_at_tile_count() {
    let out = lab(&["model", "--m", "1024", "--n", "1024", "--k", "1024", "--params", &fixture("regimes.params"), "--p", "108"]);
    let text = stdout(&out);
    let line = text.lines().find(|l| l.starts_with("minimum at g=")).unwrap();
    assert!(line.trim_start_matches("minimum at g=").split(',').any(|g| g == "64"), "{line}");
}

#[test]
fn model_without_fixup_costs_picks_p() {
    let dir = tempfile::tempdir().unwrap();
    let params = dir.path().join("free.params");
    std::fs::write(&params, "a=5\nb=0\nc=1\nd=0\n").unwrap();
    let svg = dir.path().join("curve.svg");
    let out = lab(&[
        "model", "--m", "1000", "--n", "700", "--k", "3000", "--params", params.to_str().unwrap(),
        "--p", "40", "--svg", svg.to_str().unwrap(),
    ]);
    assert!(stdout(&out).contains("argmin g=40\n"), "{}", stdout(&out));
    assert!(std::fs::read_to_string(svg).unwrap().contains(r#"class="argmin""#));
}

#[test]
fn model_rejects_malformed_params() {
    let dir = tempfile::tempdir().unwrap();
    let params = dir.path().join("bad.params");
    std::fs::write(&params, "a=1\nb=oops\n").unwrap();
    let out = lab(&["model", "--m", "128", "--n", "128", "--k", "128", "--params", params.to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("malformed"));
}

#[test]
fn model_uses_bundled_params_by_default() {
    let out = lab(&["model", "--m", "512", "--n", "512", "--k", "512", "--p", "8"]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("selected g="));
}

#[test]
fn calibrate_replay_recovers_planted_constants() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fit.params");
    let out = lab(&["calibrate", "--synthetic", "30,12,2.5,4", "--out", path.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let fit: streamk_core::ParamsFile = std::fs::read_to_string(path).unwrap().parse().unwrap();
    let p = fit.params;
    for (got, want) in [(p.a, 30.0), (p.b, 12.0), (p.c, 2.5), (p.d, 4.0)] {
        assert!((got - want).abs() < 1e-9, "{got} vs {want}");
    }
    assert!(fit.fit_residual.unwrap() <= 1e-9);
}

#[test]
fn calibrate_on_host_yields_non_negative_constants() {
    let out = lab(&["calibrate", "--reps", "1"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    let body: String = text.lines().filter(|l| !l.starts_with("sample")).map(|l| format!("{l}\n")).collect();
    let fit: streamk_core::ParamsFile = body.parse().unwrap();
    let p = fit.params;
    assert!(p.a >= 0.0 && p.b >= 0.0 && p.c > 0.0 && p.d >= 0.0, "{p:?}");
}

#[test]
fn calibrate_single_shape_is_rank_deficient() {
    let out = lab(&["calibrate", "--shape", "64x64x2048", "--synthetic", "1,1,1,1"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("rank-deficient"));
}
