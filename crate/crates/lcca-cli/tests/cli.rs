//! End-to-end pipeline tests driving the compiled binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_lcca")
}

fn run(args: &[&str]) -> Output {
    Command::new(bin())
        .args(args)
        .output()
        .expect("binary should launch")
}

fn assert_ok(out: &Output) {
    assert!(
        out.status.success(),
        "expected success, got {:?}\nstderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
}

fn assert_exit(out: &Output, code: i32) {
    assert_eq!(
        out.status.code(),
        Some(code),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

// Deterministic pseudo-random picker so fixture rows vary without a real RNG.
fn pick<'a>(choices: &[&'a str], state: &mut u64) -> &'a str {
    *state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
    choices[((*state >> 33) as usize) % choices.len()]
}

/// Write raw household/person/trip files in the bundled survey layout.
fn write_raw_fixture(dir: &Path) -> (PathBuf, PathBuf, PathBuf) {
    let hh_path = dir.join("household.csv");
    let per_path = dir.join("person.csv");
    let trip_path = dir.join("trip.csv");

    let mut hh = String::from("HOUSEID,HHVEHCNT,HHFAMINC,DBPPOPDN\n");
    let mut per = String::from("HOUSEID,PERSONID,R_AGE,R_SEX,R_RACE,WORKER,EDUC\n");
    let mut trips = String::from("HOUSEID,PERSONID,TRIPID,TRPTRANS,TRIPPURP,TRPMILES,WTTRDFIN\n");

    let mut state = 42u64;
    let mut trip_id = 0usize;
    for h in 0..15 {
        // household 14 owns a car and must be filtered out
        let veh = if h == 14 { "2" } else { "0" };
        let inc = pick(&["02", "05", "07", "10"], &mut state);
        let dens = pick(&["500", "3000", "15000"], &mut state);
        hh.push_str(&format!("H{h},{veh},{inc},{dens}\n"));
        for p in 0..2 {
            let age = pick(&["16", "25", "40", "55", "70"], &mut state);
            let sex = pick(&["01", "02"], &mut state);
            let race = pick(&["01", "02", "03", "05"], &mut state);
            let worker = pick(&["01", "02"], &mut state);
            let educ = pick(&["01", "03", "04", "05"], &mut state);
            per.push_str(&format!("H{h},P{p},{age},{sex},{race},{worker},{educ}\n"));
            for _ in 0..3 {
                let mode = pick(&["01", "02", "03", "11", "16"], &mut state);
                let purp = pick(&["HBW", "HBSHOP", "HBSOCREC", "HBO", "NHB"], &mut state);
                let miles = pick(&["0.4", "1.0", "2.5", "8.0", "25.0"], &mut state);
                trips.push_str(&format!(
                    "H{h},P{p},T{trip_id},{mode},{purp},{miles},{}\n",
                    100 + trip_id
                ));
                trip_id += 1;
            }
        }
    }
    std::fs::write(&hh_path, hh).unwrap();
    std::fs::write(&per_path, per).unwrap();
    std::fs::write(&trip_path, trips).unwrap();
    (hh_path, per_path, trip_path)
}

#[test]
fn full_pipeline_recode_select_fit_profile_simulate() {
    let tmp = tempfile::tempdir().unwrap();
    let (hh, per, trip) = write_raw_fixture(tmp.path());
    let recoded = tmp.path().join("recoded");
    let out = run(&[
        "recode",
        "--household",
        hh.to_str().unwrap(),
        "--person",
        per.to_str().unwrap(),
        "--trip",
        trip.to_str().unwrap(),
        "--out",
        recoded.to_str().unwrap(),
    ]);
    assert_ok(&out);
    for f in ["dataset.json", "dataset.csv", "drop_report.json", "manifest.json"] {
        assert!(recoded.join(f).exists(), "missing {f}");
    }
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(recoded.join("drop_report.json")).unwrap())
            .unwrap();
    assert_eq!(report["input_rows"], 90);
    // household 14's six trips are filtered out by the zero-vehicle filter
    assert_eq!(report["filtered_out"], 6);
    assert!(report["output_rows"].as_u64().unwrap() > 50);

    let selected = tmp.path().join("selected");
    let out = run(&[
        "select",
        "--data",
        recoded.to_str().unwrap(),
        "--kmin",
        "1",
        "--kmax",
        "2",
        "--restarts",
        "4",
        "--seed",
        "7",
        "--out",
        selected.to_str().unwrap(),
    ]);
    assert_ok(&out);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("best K by BIC:"), "stdout: {stdout}");
    let table = std::fs::read_to_string(selected.join("fit_statistics.csv")).unwrap();
    assert!(table.starts_with("Classes,AIC,BIC"));
    assert_eq!(table.lines().count(), 3);
    assert!(selected.join("selection.json").exists());

    let fitted = tmp.path().join("fitted");
    let out = run(&[
        "fit",
        "--data",
        recoded.to_str().unwrap(),
        "--k",
        "2",
        "--covariates",
        "--restarts",
        "4",
        "--seed",
        "7",
        "--out",
        fitted.to_str().unwrap(),
    ]);
    assert_ok(&out);
    let model_path = fitted.join("model.json");
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&model_path).unwrap()).unwrap();
    assert_eq!(doc["model"]["k"], 2);
    assert_eq!(doc["model"]["membership"]["kind"], "covariate");

    let profiled = tmp.path().join("profiled");
    let out = run(&[
        "profile",
        "--model",
        model_path.to_str().unwrap(),
        "--data",
        recoded.to_str().unwrap(),
        "--out",
        profiled.to_str().unwrap(),
    ]);
    assert_ok(&out);
    for f in [
        "conditional_probs.csv",
        "class_profiles.csv",
        "membership_coefs.csv",
        "class_assignments.csv",
        "class_shares.json",
        "manifest.json",
    ] {
        assert!(profiled.join(f).exists(), "missing {f}");
    }
    let assignments = std::fs::read_to_string(profiled.join("class_assignments.csv")).unwrap();
    assert!(assignments.starts_with("id,class\n"));
    let n_rows = report["output_rows"].as_u64().unwrap() as usize;
    assert_eq!(assignments.lines().count(), n_rows + 1);

    let simulated = tmp.path().join("simulated");
    let out = run(&[
        "simulate",
        "--model",
        model_path.to_str().unwrap(),
        "--n",
        "40",
        "--seed",
        "3",
        "--covariate-pool",
        recoded.to_str().unwrap(),
        "--out",
        simulated.to_str().unwrap(),
    ]);
    assert_ok(&out);
    let truth = std::fs::read_to_string(simulated.join("truth_labels.csv")).unwrap();
    assert_eq!(truth.lines().count(), 41);
    let sim_csv = std::fs::read_to_string(simulated.join("dataset.csv")).unwrap();
    assert_eq!(sim_csv.lines().count(), 41);
}

#[test]
fn markdown_format_renders_tables() {
    let tmp = tempfile::tempdir().unwrap();
    let (hh, per, trip) = write_raw_fixture(tmp.path());
    let recoded = tmp.path().join("recoded");
    assert_ok(&run(&[
        "recode",
        "--household",
        hh.to_str().unwrap(),
        "--person",
        per.to_str().unwrap(),
        "--trip",
        trip.to_str().unwrap(),
        "--out",
        recoded.to_str().unwrap(),
    ]));
    let selected = tmp.path().join("selected");
    assert_ok(&run(&[
        "select",
        "--data",
        recoded.to_str().unwrap(),
        "--kmin",
        "1",
        "--kmax",
        "1",
        "--restarts",
        "1",
        "--format",
        "markdown",
        "--out",
        selected.to_str().unwrap(),
    ]));
    let md = std::fs::read_to_string(selected.join("fit_statistics.md")).unwrap();
    assert!(md.starts_with("| Classes |"));
}

#[test]
fn missing_input_file_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(&[
        "recode",
        "--household",
        "/nonexistent/hh.csv",
        "--person",
        "/nonexistent/per.csv",
        "--trip",
        "/nonexistent/trip.csv",
        "--out",
        tmp.path().join("o").to_str().unwrap(),
    ]);
    assert_exit(&out, 2);
}

#[test]
fn invalid_k_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(&[
        "select",
        "--data",
        tmp.path().to_str().unwrap(),
        "--kmin",
        "3",
        "--kmax",
        "1",
        "--out",
        tmp.path().join("o").to_str().unwrap(),
    ]);
    assert_exit(&out, 2);
}

#[test]
fn schema_mismatch_exits_4() {
    let tmp = tempfile::tempdir().unwrap();
    let (hh, per, trip) = write_raw_fixture(tmp.path());
    let recoded = tmp.path().join("recoded");
    assert_ok(&run(&[
        "recode",
        "--household",
        hh.to_str().unwrap(),
        "--person",
        per.to_str().unwrap(),
        "--trip",
        trip.to_str().unwrap(),
        "--out",
        recoded.to_str().unwrap(),
    ]));
    let fitted = tmp.path().join("fitted");
    assert_ok(&run(&[
        "fit",
        "--data",
        recoded.to_str().unwrap(),
        "--k",
        "2",
        "--restarts",
        "2",
        "--out",
        fitted.to_str().unwrap(),
    ]));
    // simulate without a covariate pool: the output drops the covariates
    let simulated = tmp.path().join("simulated");
    assert_ok(&run(&[
        "simulate",
        "--model",
        fitted.join("model.json").to_str().unwrap(),
        "--n",
        "10",
        "--out",
        simulated.to_str().unwrap(),
    ]));
    // refit on the reduced schema, then profile against the original dataset
    let refit = tmp.path().join("refit");
    assert_ok(&run(&[
        "fit",
        "--data",
        simulated.to_str().unwrap(),
        "--k",
        "2",
        "--restarts",
        "2",
        "--out",
        refit.to_str().unwrap(),
    ]));
    // corrupt the indicator schema so the profile data no longer matches
    let model_path = refit.join("model.json");
    let mut doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&model_path).unwrap()).unwrap();
    doc["model"]["indicators"][0]["name"] = serde_json::Value::String("renamed".into());
    std::fs::write(&model_path, serde_json::to_string(&doc).unwrap()).unwrap();
    let out = run(&[
        "profile",
        "--model",
        model_path.to_str().unwrap(),
        "--data",
        recoded.to_str().unwrap(),
        "--out",
        tmp.path().join("p").to_str().unwrap(),
    ]);
    assert_exit(&out, 4);
}
