use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn gwchart(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gwchart"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write_subgroup(path: &Path, values: &[f64]) {
    let text: String = values.iter().map(|v| format!("{v}\n")).collect();
    fs::write(path, format!("time\n{text}")).unwrap();
}

#[test]
fn fit_complete_bundled_data() {
    let o = gwchart(&["fit", "--dataset", "bladder", "--censoring", "none"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!((v["theta"].as_f64().unwrap() - 0.470).abs() < 0.02);
    assert!((v["alpha"].as_f64().unwrap() - 6.941).abs() < 0.02);
    assert!((v["ks_statistic"].as_f64().unwrap() - 0.043).abs() < 0.005);
    assert_eq!(v["n"], 125);
    assert_eq!(v["converged"], true);
}

#[test]
fn fit_hybrid_from_file_with_trace() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("data.csv");
    let values: Vec<f64> = gwchart_values();
    write_subgroup(&path, &values);
    let o = gwchart(&[
        "fit",
        "--data",
        path.to_str().unwrap(),
        "--censoring",
        "hybrid",
        "--r",
        "75",
        "--x0",
        "7.6",
        "--estimator",
        "pseudo",
        "--trace",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!((v["theta"].as_f64().unwrap() - 0.632).abs() < 0.02);
    assert!((v["alpha"].as_f64().unwrap() - 8.946).abs() < 0.02);
    assert_eq!(v["estimator"], "pseudo-likelihood");
    assert!(v["trace"].as_array().unwrap().len() >= 2);
}

fn gwchart_values() -> Vec<f64> {
    gwchart::datasets::bladder_cancer_125()
}

#[test]
fn malformed_data_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.csv");
    fs::write(&path, "time\n1.5\nabc\n2.0\n").unwrap();
    let o = gwchart(&["fit", "--data", path.to_str().unwrap(), "--censoring", "none"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(o.stdout.is_empty());

    fs::write(&path, "1.5\n-2.0\n3.0\n").unwrap();
    assert_eq!(gwchart(&["fit", "--data", path.to_str().unwrap(), "--censoring", "none"]).status.code(), Some(1));
    assert_eq!(gwchart(&["fit", "--dataset", "nope", "--censoring", "none"]).status.code(), Some(1));
    assert_eq!(gwchart(&["fit", "--dataset", "bladder", "--censoring", "hybrid"]).status.code(), Some(1));
}

#[test]
fn chart_build_then_monitor() {
    let dir = tempfile::tempdir().unwrap();
    let chart = dir.path().join("chart.json");
    let o = gwchart(&[
        "chart", "build", "--dataset", "bladder", "--m", "25", "--r", "15", "--x0", "7.6", "--B", "300", "--seed", "4",
        "--estimator", "pseudo", "--out", chart.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(&chart).unwrap()).unwrap();
    assert_eq!(json["kind"], "BHC");
    assert_eq!(json["B"], 300);
    assert_eq!(json["k"], 5);
    let (lcl, ucl) = (json["lcl"].as_f64().unwrap(), json["ucl"].as_f64().unwrap());
    assert!(lcl < json["cl"].as_f64().unwrap() && json["cl"].as_f64().unwrap() < ucl);

    // the first phase-I subgroup sits inside its own chart
    let data = gwchart_values();
    let quiet = dir.path().join("g1.csv");
    write_subgroup(&quiet, &data[..25]);
    let report = dir.path().join("verdicts.csv");
    let o = gwchart(&["chart", "monitor", "--chart", chart.to_str().unwrap(), "--out", report.to_str().unwrap(), quiet.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(&report).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "index,statistic,lcl,cl,ucl,signal");
    assert!(lines.next().unwrap().ends_with("InControl"));

    // a subgroup with far longer lifetimes signals high
    let loud = dir.path().join("g2.csv");
    let long: Vec<f64> = data[..25].iter().map(|v| v * 4.0).collect();
    write_subgroup(&loud, &long);
    let o = gwchart(&["chart", "monitor", "--chart", chart.to_str().unwrap(), quiet.to_str().unwrap(), loud.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    let out = stdout(&o);
    assert_eq!(out.lines().count(), 3);
    assert!(out.lines().nth(2).unwrap().ends_with("OutOfControlHigh"));
}

#[test]
fn monitor_leaves_no_partial_report_on_bad_input() {
    let dir = tempfile::tempdir().unwrap();
    let chart = dir.path().join("chart.json");
    let o = gwchart(&[
        "chart", "build", "--dataset", "bladder", "--m", "25", "--r", "15", "--x0", "7.6", "--B", "100", "--out",
        chart.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let good = dir.path().join("good.csv");
    write_subgroup(&good, &gwchart_values()[..25]);
    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "1\n2\nthree\n").unwrap();
    let report = dir.path().join("verdicts.csv");
    let o = gwchart(&[
        "chart", "monitor", "--chart", chart.to_str().unwrap(), "--out", report.to_str().unwrap(),
        good.to_str().unwrap(), bad.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(!report.exists());
}

#[test]
fn scheme_catalog_preset() {
    let o = gwchart(&["simulate", "--preset", "schemes"]);
    assert!(o.status.success());
    let out = stdout(&o);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 9);
    assert_eq!(lines[1], "1,25,15,55");
    assert_eq!(lines[8], "8,40,35,70");
}

#[test]
fn tiny_simulation_report_and_design_echo() {
    let dir = tempfile::tempdir().unwrap();
    let design = dir.path().join("design.json");
    let args = [
        "simulate", "--scheme", "2", "--p", "0.5", "--nu", "0.1", "--reps", "3", "--B", "40", "--k", "5", "--seed", "8",
        "--delta-theta", "-0.08", "--design-out", design.to_str().unwrap(),
    ];
    let o = gwchart(&args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "scheme_id,m,r,x0,p,nu,delta_theta,delta_alpha,lcl,ucl,arl,sdrl,reps,capped");
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("2,25,20,55,0.5,0.1,0,0,"));
    let echoed: serde_json::Value = serde_json::from_str(&fs::read_to_string(&design).unwrap()).unwrap();
    assert_eq!(echoed["replications"], 3);

    let again = gwchart(&["simulate", "--design", design.to_str().unwrap(), "--sequential"]);
    assert!(again.status.success());
    assert_eq!(stdout(&again), out);

    let zero = gwchart(&[
        "simulate", "--scheme", "2", "--p", "0.5", "--nu", "0.1", "--reps", "2", "--B", "20", "--k", "5", "--delta-theta", "0",
    ]);
    assert_eq!(stdout(&zero).lines().count(), 2);
}
