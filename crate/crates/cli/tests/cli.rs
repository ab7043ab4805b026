use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use qbayes::definetti::{GeneratingFunction, GeneratingFunctionJson, ParticleJson};
use qbayes::dutch_book::{BettingBook, BookJson, CoherenceVerdict, Witness};
use qbayes::iid::{FrequencyReport, OutcomeRecord};
use qbayes::operator::StateJson;
use qbayes::DensityOperator;
use tempfile::TempDir;

fn qbayes(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qbayes")).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn cfg(name: &str) -> String {
    configs().join(name).to_string_lossy().into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn incoherent_book_exits_2_with_verified_witness() {
    let tmp = TempDir::new().unwrap();
    let out = qbayes(&["audit", &cfg("incoherent-book.json"), "--out", s(tmp.path())]);
    assert_eq!(code(&out), 2, "{}", stderr(&out));
    let verdict: CoherenceVerdict = serde_json::from_str(&fs::read_to_string(tmp.path().join("verdict.json")).unwrap()).unwrap();
    assert!(!verdict.coherent && verdict.verification.verified);
    let Witness::SureLoss { payoffs } = verdict.witness else { panic!("expected a sure-loss witness") };
    let json: BookJson = serde_json::from_str(&fs::read_to_string(configs().join("incoherent-book.json")).unwrap()).unwrap();
    let (space, quotes) = json.quotes().unwrap();
    let book = BettingBook::from_quotes(space, &quotes, &payoffs).unwrap();
    assert!(book.returns().iter().all(|&r| r < 0.0));
}

#[test]
fn coherent_book_exits_0() {
    let tmp = TempDir::new().unwrap();
    let out = qbayes(&["audit", &cfg("coherent-book.json"), "--out", s(tmp.path()), "--verify"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
}

#[test]
fn undeclared_outcome_exits_1() {
    let tmp = TempDir::new().unwrap();
    let book = write(tmp.path(), "b.json", r#"{"outcomes":["a","b"],"bets":[{"event":["z"],"p":0.5}]}"#);
    let out = qbayes(&["audit", &book, "--out", s(tmp.path())]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains('z'), "{}", stderr(&out));
}

#[test]
fn malformed_json_reports_line_and_column() {
    let tmp = TempDir::new().unwrap();
    let book = write(tmp.path(), "b.json", "{\n  \"outcomes\": [\"a\",\n  \"bets\": ]\n}");
    let out = qbayes(&["audit", &book, "--out", s(tmp.path())]);
    assert_eq!(code(&out), 1);
    let err = stderr(&out);
    assert!(err.contains("line 3") && err.contains("column"), "{err}");
}

#[test]
fn unknown_config_key_is_rejected() {
    let tmp = TempDir::new().unwrap();
    let config = write(tmp.path(), "c.json", r#"{"seed": 1, "trails": 10}"#);
    let out = qbayes(&["tomography", "--config", &config, "--out", s(tmp.path())]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("trails"), "{}", stderr(&out));
}

#[test]
fn stochastic_commands_need_a_seed() {
    let tmp = TempDir::new().unwrap();
    for cmd in ["sample", "tomography", "demo-agreement"] {
        let out = qbayes(&[cmd, "--out", s(tmp.path())]);
        assert_eq!(code(&out), 1, "{cmd}");
        assert!(stderr(&out).contains("seed"));
    }
}

#[test]
fn usage_errors_exit_1() {
    assert_eq!(code(&qbayes(&["no-such-command"])), 1);
    assert_eq!(code(&qbayes(&["sample", "--seed", "x"])), 1);
    assert_eq!(code(&qbayes(&["--help"])), 0);
}

#[test]
fn flags_override_config() {
    let tmp = TempDir::new().unwrap();
    let out = qbayes(&["tomography", "--config", &cfg("quickstart.json"), "--trials", "30", "--out", s(tmp.path())]);
    assert_eq!(code(&out), 2, "30 trials should not converge: {}", stderr(&out));
    let trace = fs::read_to_string(tmp.path().join("trace.csv")).unwrap();
    assert_eq!(trace.lines().count(), 31);
}

#[test]
fn quickstart_converges() {
    let tmp = TempDir::new().unwrap();
    let out = qbayes(&["tomography", "--config", &cfg("quickstart.json"), "--out", s(tmp.path())]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let trace = fs::read_to_string(tmp.path().join("trace.csv")).unwrap();
    let mut lines = trace.lines();
    assert_eq!(lines.next(), Some("trial,outcome,distance_to_truth,interagent_distance"));
    let last: Vec<&str> = lines.last().unwrap().split(',').collect();
    assert_eq!(last[0], "999");
    assert!(last[2].parse::<f64>().unwrap() < 0.05);
    assert_eq!(last[3], "");
}

#[test]
fn zero_trials_leave_the_prior_unchanged() {
    let tmp = TempDir::new().unwrap();
    let first = tmp.path().join("first");
    let out = qbayes(&["tomography", "--seed", "5", "--particles", "20", "--trials", "0", "--out", s(&first)]);
    assert_ne!(code(&out), 1, "{}", stderr(&out));
    let prior = fs::read_to_string(first.join("prior.json")).unwrap();
    assert_eq!(prior, fs::read_to_string(first.join("posterior.json")).unwrap());
    assert_eq!(fs::read_to_string(first.join("trace.csv")).unwrap().lines().count(), 1);

    let second = tmp.path().join("second");
    let prior_path = first.join("prior.json");
    let out = qbayes(&["tomography", "--seed", "6", "--prior", s(&prior_path), "--trials", "0", "--out", s(&second)]);
    assert_ne!(code(&out), 1, "{}", stderr(&out));
    assert_eq!(prior, fs::read_to_string(second.join("posterior.json")).unwrap());
}

#[test]
fn emitted_files_round_trip() {
    let tmp = TempDir::new().unwrap();
    let out = qbayes(&["sample", "--seed", "3", "--trials", "200", "--out", s(tmp.path())]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let csv = fs::read_to_string(tmp.path().join("record.csv")).unwrap();
    let record = OutcomeRecord::from_csv(2, &csv).unwrap();
    assert_eq!(record.len(), 200);
    assert_eq!(record.to_csv(), csv);
    let report: FrequencyReport = serde_json::from_str(&fs::read_to_string(tmp.path().join("frequency.json")).unwrap()).unwrap();
    assert_eq!(report.deviations.len(), 2);

    let out = qbayes(&["tomography", "--seed", "3", "--particles", "10", "--trials", "50", "--out", s(tmp.path())]);
    assert_ne!(code(&out), 1, "{}", stderr(&out));
    let text = fs::read_to_string(tmp.path().join("posterior.json")).unwrap();
    let json: GeneratingFunctionJson = serde_json::from_str(&text).unwrap();
    let gen: GeneratingFunction = json.to_generator().unwrap();
    let again = serde_json::to_string_pretty(&GeneratingFunctionJson::from_generator(&gen)).unwrap() + "\n";
    assert_eq!(again, text);
}

fn prior_file(dir: &Path, name: &str, states: &[DensityOperator]) -> String {
    let gen = GeneratingFunction::uniform(states.to_vec()).unwrap();
    write(dir, name, &serde_json::to_string(&GeneratingFunctionJson::from_generator(&gen)).unwrap())
}

#[test]
fn identical_priors_never_disagree() {
    let tmp = TempDir::new().unwrap();
    let states = [
        DensityOperator::diagonal(&[0.9, 0.1]).unwrap(),
        DensityOperator::diagonal(&[0.3, 0.7]).unwrap(),
        DensityOperator::maximally_mixed(2).unwrap(),
    ];
    let prior = prior_file(tmp.path(), "p.json", &states);
    let out_dir = tmp.path().join("out");
    let out = qbayes(&["demo-agreement", "--seed", "2", "--prior-a", &prior, "--prior-b", &prior, "--out", s(&out_dir)]);
    assert_ne!(code(&out), 1, "{}", stderr(&out));
    let trace = fs::read_to_string(out_dir.join("agreement.csv")).unwrap();
    for line in trace.lines().skip(1) {
        assert_eq!(line.rsplit(',').next(), Some("0"), "{line}");
    }
}

#[test]
fn default_demo_agrees() {
    let tmp = TempDir::new().unwrap();
    let out = qbayes(&["demo-agreement", "--seed", "42", "--out", s(tmp.path())]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let summary: serde_json::Value = serde_json::from_str(&fs::read_to_string(tmp.path().join("summary.json")).unwrap()).unwrap();
    assert!(summary["final_interagent_distance"].as_f64().unwrap() < 0.05);
    assert_eq!(summary["converged"], true);
}

#[test]
fn adversarial_prior_is_flagged() {
    let tmp = TempDir::new().unwrap();
    // A point mass on I/2 explains any data but never learns.
    let stubborn = prior_file(tmp.path(), "a.json", &[DensityOperator::maximally_mixed(2).unwrap()]);
    let out = qbayes(&["demo-agreement", "--seed", "42", "--prior-a", &stubborn, "--out", s(tmp.path())]);
    assert_eq!(code(&out), 2, "{}", stderr(&out));
    let summary: serde_json::Value = serde_json::from_str(&fs::read_to_string(tmp.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["converged"], false);
    assert!(summary["final_interagent_distance"].as_f64().unwrap() > 0.4);
}

#[test]
fn impossible_data_reports_agent_and_trial() {
    let tmp = TempDir::new().unwrap();
    let zero = DensityOperator::diagonal(&[1.0, 0.0]).unwrap();
    let one = DensityOperator::diagonal(&[0.0, 1.0]).unwrap();
    let prior = prior_file(tmp.path(), "b.json", &[zero]);
    let truth = write(tmp.path(), "t.json", &serde_json::to_string(&StateJson::from_state(&one)).unwrap());
    let out = qbayes(&["demo-agreement", "--seed", "1", "--prior-b", &prior, "--truth", &truth, "--out", s(tmp.path())]);
    assert_eq!(code(&out), 2);
    let summary: serde_json::Value = serde_json::from_str(&fs::read_to_string(tmp.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["failure"]["agent"], "B");
    assert_eq!(summary["failure"]["trial"], 0);

    let out = qbayes(&["tomography", "--seed", "1", "--prior", &prior, "--truth", &truth, "--out", s(tmp.path())]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("trial 0"), "{}", stderr(&out));
}

#[test]
fn incomplete_schedule_is_refused() {
    let tmp = TempDir::new().unwrap();
    let config = write(
        tmp.path(),
        "c.json",
        r#"{"seed": 1, "schedule": [[[[1,0],[0,0]], [[0,0],[1,0]]]]}"#,
    );
    let out = qbayes(&["tomography", "--config", &config, "--out", s(tmp.path())]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("schedule refused"), "{}", stderr(&out));
    assert!(!tmp.path().join("trace.csv").exists());
}

#[test]
fn fit_recovers_frames() {
    let tmp = TempDir::new().unwrap();
    let out = qbayes(&["fit", &cfg("qubit-frames.json"), "--verify", "--out", s(tmp.path())]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let fit: serde_json::Value = serde_json::from_str(&fs::read_to_string(tmp.path().join("fit.json")).unwrap()).unwrap();
    assert_eq!(fit["spanning_rank"], 4);
    assert_eq!(fit["gleason_guarantee"], false);
    let state: StateJson = serde_json::from_value(serde_json::json!({"dim": 2, "matrix": fit["matrix"]})).unwrap();
    let rho: DensityOperator = state.to_state().unwrap();
    assert!((rho.matrix()[(0, 1)].re - 0.1).abs() < 1e-12);
}

#[test]
fn validate_checks_files() {
    let tmp = TempDir::new().unwrap();
    assert_eq!(code(&qbayes(&["validate", &cfg("truth.json"), "--kind", "state"])), 0);
    assert_eq!(code(&qbayes(&["validate", &cfg("incoherent-book.json"), "--kind", "book"])), 0);
    let bad = write(tmp.path(), "s.json", r#"{"dim":2,"matrix":[[[0.7,0],[0,0]],[[0,0],[0.7,0]]]}"#);
    let out = qbayes(&["validate", &bad, "--kind", "state"]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("trace"), "{}", stderr(&out));
}

#[test]
fn composite_cap_comes_from_the_environment() {
    let tmp = TempDir::new().unwrap();
    let rho = DensityOperator::diagonal(&[0.6, 0.4]).unwrap();
    let prior = prior_file(tmp.path(), "p.json", &[rho]);
    let run = |cap: Option<&str>| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_qbayes"));
        cmd.args(["validate", &prior, "--kind", "prior", "--copies", "5"]);
        match cap {
            Some(c) => cmd.env("QBAYES_COMPOSITE_CAP", c),
            None => cmd.env_remove("QBAYES_COMPOSITE_CAP"),
        };
        cmd.output().unwrap()
    };
    assert_eq!(code(&run(None)), 0);
    let capped = run(Some("16"));
    assert_eq!(code(&capped), 1);
    assert!(stderr(&capped).contains("32"), "{}", stderr(&capped));
    assert_eq!(code(&run(Some("lots"))), 1);
}

#[test]
fn non_exchangeable_weights_are_rejected() {
    let tmp = TempDir::new().unwrap();
    let rho = DensityOperator::maximally_mixed(2).unwrap();
    let json = GeneratingFunctionJson {
        dim: 2,
        particles: vec![ParticleJson {
            w: 0.5,
            state: StateJson::from_state(&rho),
        }],
    };
    let path = write(tmp.path(), "p.json", &serde_json::to_string(&json).unwrap());
    let out = qbayes(&["validate", &path, "--kind", "prior"]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("weights sum to one"), "{}", stderr(&out));
}
