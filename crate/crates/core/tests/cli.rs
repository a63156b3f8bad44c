use std::path::Path;
use std::process::{Command, Output};

fn bench(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cams-bench"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn small_spec(dir: &Path, accuracies: &str) -> std::path::PathBuf {
    let path = dir.join("spec.toml");
    let text = format!(
        r#"c = 3
k = 2
T = 200
model_accuracies = {accuracies}
seed = 4

[[policies]]
kind = "normal"
sharpness = 20.0

[[policies]]
kind = "random"
"#
    );
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn gen_writes_reloadable_stream_and_prints_metadata() {
    let dir = tempfile::tempdir().unwrap();
    let spec = small_spec(dir.path(), "[0.9, 0.6]");
    let out = dir.path().join("s.jsonl");
    let res = bench(&["gen", "--spec", p(&spec), "--out", p(&out)]);
    assert_eq!(code(&res), 0, "{}", stderr(&res));
    let stdout = String::from_utf8(res.stdout).unwrap();
    assert!(stdout.contains("delta=") && stdout.contains("gamma=") && stdout.contains("best_policy="));
    let stream = cams::datagen::load_stream(&out).unwrap();
    assert_eq!(stream.records.len(), 200);
    assert_eq!(stream.meta.n, 2);
}

#[test]
fn gen_same_seed_same_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.jsonl"), dir.path().join("b.jsonl"));
    for out in [&a, &b] {
        let res = bench(&["gen", "--preset", "malicious", "--seed", "9", "--out", p(out)]);
        assert_eq!(code(&res), 0, "{}", stderr(&res));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let res = bench(&["gen", "--preset", "malicious", "--seed", "9", "--out", p(&a)]);
    assert_eq!(code(&res), 3);
    let res = bench(&["gen", "--preset", "malicious", "--seed", "9", "--out", p(&a), "--force"]);
    assert_eq!(code(&res), 0);
}

#[test]
fn gen_rejects_bad_accuracies_and_unknown_preset() {
    let dir = tempfile::tempdir().unwrap();
    let spec = small_spec(dir.path(), "[1.3, 0.6]");
    let res = bench(&["gen", "--spec", p(&spec), "--out", p(&dir.path().join("x.jsonl"))]);
    assert_eq!(code(&res), 2);
    assert!(stderr(&res).contains("model_accuracies"), "{}", stderr(&res));
    let res = bench(&["gen", "--preset", "nope", "--out", p(&dir.path().join("y.jsonl"))]);
    assert_eq!(code(&res), 2);

    let spec = small_spec(dir.path(), "[0.9, 0.6]");
    let mut text = std::fs::read_to_string(&spec).unwrap();
    text = text.replacen("seed = 4\n", "seed = 4\nlabel_distribution = [0.5, 0.6, 0.2]\n", 1);
    std::fs::write(&spec, text).unwrap();
    let out = dir.path().join("z.jsonl");
    let res = bench(&["gen", "--spec", p(&spec), "--out", p(&out)]);
    assert_eq!(code(&res), 2);
    assert!(stderr(&res).contains("label_distribution"), "{}", stderr(&res));
    assert!(!out.exists());
}

#[test]
fn bad_simplex_in_stream_file_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let stream = dir.path().join("bad.jsonl");
    std::fs::write(
        &stream,
        "{\"schema\":\"cams-stream/1\",\"c\":2,\"k\":2,\"n\":1,\"T\":1}\n\
         {\"t\":1,\"predictions\":[0,1],\"label\":0,\"advice\":[[0.7,0.7]]}\n",
    )
    .unwrap();
    let res = bench(&["run", "--stream", p(&stream), "--learners", "cams", "--out", p(&dir.path().join("o"))]);
    assert_eq!(code(&res), 2, "{}", stderr(&res));
    assert!(stderr(&res).contains("simplex"), "{}", stderr(&res));
}

#[test]
fn run_rejects_unknown_and_empty_learners() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let res = bench(&["run", "--preset", "standard", "--learners", "cams,nope", "--out", p(&out)]);
    assert_eq!(code(&res), 2);
    assert!(stderr(&res).contains("cams-random-policy"), "learner list missing: {}", stderr(&res));
    let res = bench(&["compare", "--preset", "standard", "--learners", "", "--out", p(&out)]);
    assert_eq!(code(&res), 2);
    assert!(!out.exists(), "nothing is written before validation");
}

#[test]
fn run_defaults_budget_to_stream_length() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let res = bench(&[
        "run", "--preset", "context-free", "--learners", "cams", "--rounds", "120", "--realizations", "2", "--out",
        p(&out),
    ]);
    assert_eq!(code(&res), 0, "{}", stderr(&res));
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert!(manifest["config"]["budget"].is_null());
    let summary = std::fs::read_to_string(out.join("summary.csv")).unwrap();
    assert!(summary.lines().nth(1).unwrap().ends_with(",120"), "{summary}");
    let traj = std::fs::read_to_string(out.join("trajectories.csv")).unwrap();
    assert_eq!(traj.lines().count(), 1 + 2 * 120);
}

#[test]
fn output_collision_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    std::fs::create_dir(&out).unwrap();
    std::fs::write(out.join("keep.txt"), "x").unwrap();
    let args = ["compare", "--preset", "standard", "--learners", "cams,rs", "--rounds", "100", "--realizations", "2"];
    let mut with_out: Vec<&str> = args.to_vec();
    with_out.extend(["--budgets", "10,50", "--out", p(&out)]);
    let res = bench(&with_out);
    assert_eq!(code(&res), 3);
    with_out.push("--force");
    let res = bench(&with_out);
    assert_eq!(code(&res), 0, "{}", stderr(&res));
    assert!(out.join("sweep.csv").exists());
}

#[test]
fn resume_reproduces_uninterrupted_run() {
    let dir = tempfile::tempdir().unwrap();
    let base = [
        "run", "--preset", "standard", "--learners", "cams,cams-max,cams-conventional", "--budget", "60", "--rounds",
        "500", "--realizations", "3", "--seed", "21",
    ];
    let with = |extra: &[&str]| {
        let mut v: Vec<&str> = base.to_vec();
        v.extend(extra);
        bench(&v)
    };
    let (full, ckpt, resumed) = (dir.path().join("full"), dir.path().join("ckpt"), dir.path().join("resumed"));
    assert_eq!(code(&with(&["--out", p(&full)])), 0);
    assert_eq!(code(&with(&["--out", p(&ckpt), "--stop-after", "137"])), 0);
    let checkpoint = ckpt.join("checkpoint.json");
    let res = with(&["--out", p(&resumed), "--resume", p(&checkpoint)]);
    assert_eq!(code(&res), 0, "{}", stderr(&res));
    for file in ["trajectories.csv", "cumulative_loss.csv", "queries.csv", "rcl.csv", "manifest.json"] {
        assert_eq!(std::fs::read(full.join(file)).unwrap(), std::fs::read(resumed.join(file)).unwrap(), "{file}");
    }

    // a checkpoint only resumes the configuration it was written with
    let mut other: Vec<&str> = base.to_vec();
    other[6] = "61";
    let x = dir.path().join("x");
    other.extend(["--out", p(&x), "--resume", p(&checkpoint)]);
    assert_eq!(code(&bench(&other)), 2);
}

#[test]
fn checkpointing_baselines_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let res = bench(&[
        "run", "--preset", "standard", "--learners", "cams,rs", "--rounds", "100", "--realizations", "1",
        "--stop-after", "10", "--out", p(&dir.path().join("o")),
    ]);
    assert_eq!(code(&res), 2);
    assert!(!dir.path().join("o").exists());
}

#[test]
fn config_file_with_cli_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    let out = dir.path().join("o");
    std::fs::write(
        &cfg,
        format!(
            "preset = \"context-free\"\nlearners = [\"cams\", \"mp\"]\nrounds = 80\nrealizations = 2\nbudget = 10\nout = \"{}\"\n",
            p(&out)
        ),
    )
    .unwrap();
    let res = bench(&["run", "--config", p(&cfg), "--budget", "30"]);
    assert_eq!(code(&res), 0, "{}", stderr(&res));
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["config"]["budget"], 30);
    assert_eq!(manifest["config"]["learners"].as_array().unwrap().len(), 2);

    std::fs::write(&cfg, "learners = \"cams\"\nbudgte = 3\n").unwrap();
    let res = bench(&["run", "--config", p(&cfg), "--preset", "standard", "--out", p(&dir.path().join("y"))]);
    assert_eq!(code(&res), 2);
    assert!(stderr(&res).contains("budgte"), "{}", stderr(&res));
}

#[test]
fn thread_count_does_not_change_output() {
    let dir = tempfile::tempdir().unwrap();
    let args = |out: &Path| {
        vec![
            "compare".to_string(),
            "--preset".into(),
            "standard".into(),
            "--learners".into(),
            "cams,qbc,cqbc".into(),
            "--rounds".into(),
            "300".into(),
            "--realizations".into(),
            "5".into(),
            "--budgets".into(),
            "20,60".into(),
            "--out".into(),
            p(out).to_string(),
        ]
    };
    let run = |threads: &str, out: &Path| {
        let res = Command::new(env!("CARGO_BIN_EXE_cams-bench"))
            .args(args(out))
            .env("CAMS_BENCH_THREADS", threads)
            .output()
            .unwrap();
        assert_eq!(code(&res), 0, "{}", stderr(&res));
    };
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    run("1", &a);
    run("4", &b);
    for file in ["cumulative_loss.csv", "queries.csv", "sweep.csv", "summary.csv", "manifest.json"] {
        assert_eq!(std::fs::read(a.join(file)).unwrap(), std::fs::read(b.join(file)).unwrap(), "{file}");
    }
    let res = Command::new(env!("CARGO_BIN_EXE_cams-bench"))
        .args(args(&dir.path().join("c")))
        .env("CAMS_BENCH_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(code(&res), 2);
}

#[test]
fn report_is_deterministic_and_validates_input() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing");
    assert_eq!(code(&bench(&["report", "--input", p(&missing)])), 2);

    let input = dir.path().join("in");
    let res = bench(&[
        "compare", "--preset", "malicious", "--learners", "cams,mp", "--rounds", "200", "--realizations", "3",
        "--budgets", "20,100", "--out", p(&input),
    ]);
    assert_eq!(code(&res), 0, "{}", stderr(&res));
    let (a, b) = (dir.path().join("pa"), dir.path().join("pb"));
    assert_eq!(code(&bench(&["report", "--input", p(&input), "--out", p(&a)])), 0);
    assert_eq!(code(&bench(&["report", "--input", p(&input), "--out", p(&b)])), 0);
    for file in ["plot_data.csv", "rcl.svg", "queries.svg", "sweep.svg"] {
        let bytes = std::fs::read(a.join(file)).unwrap();
        assert!(!bytes.is_empty());
        assert_eq!(bytes, std::fs::read(b.join(file)).unwrap(), "{file}");
    }
    let data = std::fs::read_to_string(a.join("plot_data.csv")).unwrap();
    assert!(data.starts_with("panel,learner,x,mean,lo,hi\n"));
    assert!(data.contains("\nsweep,mp,100,"));

    let empty = dir.path().join("empty");
    std::fs::create_dir(&empty).unwrap();
    assert_eq!(code(&bench(&["report", "--input", p(&empty)])), 2);
}

#[test]
fn missing_stream_file_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let res = bench(&[
        "run",
        "--stream",
        p(&dir.path().join("none.jsonl")),
        "--learners",
        "cams",
        "--out",
        p(&dir.path().join("o")),
    ]);
    assert_eq!(code(&res), 2);
}
