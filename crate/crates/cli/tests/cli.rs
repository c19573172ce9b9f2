use std::process::{Command, Output};

use sturm_core::dump::BandRecord;

fn sturm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sturm"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn golden_order_two_has_eight_records() {
    let o = sturm(&["bands", "--alpha", "per:1", "--V", "24", "--order", "2"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let recs: Vec<BandRecord> = stdout(&o).lines().map(|l| BandRecord::from_line(l).unwrap()).collect();
    assert_eq!(recs.len(), 8);
    let per_order: Vec<usize> = (0..3).map(|k| recs.iter().filter(|r| r.order == k).count()).collect();
    assert_eq!(per_order, vec![2, 2, 4]);
    assert!(recs.iter().filter(|r| r.order > 0).all(|r| r.parent_path.is_some()));
}

#[test]
fn reruns_are_byte_identical() {
    let args = ["bands", "--alpha", "per:2", "--V", "30", "--order", "4", "--seed", "7"];
    let a = sturm(&args);
    let b = sturm(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let mut threaded = args.to_vec();
    threaded.extend(["--threads", "1"]);
    assert_eq!(sturm(&threaded).stdout, a.stdout);
}

#[test]
fn small_coupling_exits_two() {
    let o = sturm(&["bands", "--V", "20", "--order", "2"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("CouplingTooSmall"));
    let o = sturm(&["bands", "--alpha", "[0;1,(0)]"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn cache_resumes_and_rejects_foreign_hash() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("tree.cache");
    let cache = cache.to_str().unwrap();
    let base = ["bands", "--V", "24", "--precision-bits", "256", "--cache", cache];
    let fresh = sturm(&[&base[..], &["--order", "5"]].concat());
    let shallow = sturm(&[&base[..], &["--order", "3"]].concat());
    assert!(shallow.status.success());
    let resumed = sturm(&[&base[..], &["--order", "5"]].concat());
    assert_eq!(fresh.stdout, resumed.stdout);
    let shallow_again = sturm(&[&base[..], &["--order", "3"]].concat());
    assert_eq!(shallow.stdout, shallow_again.stdout);

    let foreign = sturm(&["bands", "--V", "25", "--precision-bits", "256", "--order", "3", "--cache", cache]);
    assert!(foreign.status.success());
    assert!(String::from_utf8_lossy(&foreign.stderr).contains("different config hash"));
    let direct = sturm(&["bands", "--V", "25", "--precision-bits", "256", "--order", "3"]);
    assert_eq!(foreign.stdout, direct.stdout);
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.conf");
    std::fs::write(&path, "alpha_spec = per:1\nV = 24\norder = 1\n").unwrap();
    let p = path.to_str().unwrap();
    let from_file = sturm(&["bands", "--config", p]);
    assert_eq!(stdout(&from_file).lines().count(), 4);
    let overridden = sturm(&["bands", "--config", p, "--order", "2"]);
    assert_eq!(stdout(&overridden).lines().count(), 8);
    std::fs::write(&path, "colour = red\n").unwrap();
    assert_eq!(sturm(&["bands", "--config", p]).status.code(), Some(2));
}

#[test]
fn dims_reports_bracket_and_residuals() {
    let o = sturm(&["dims", "--V", "24", "--order", "7"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let field = |key: &str| -> f64 {
        let line = text.lines().find(|l| l.starts_with(key)).unwrap();
        line.split_whitespace().nth(1).unwrap().parse().unwrap()
    };
    assert!((field("upper_bound:") - 0.656289).abs() < 5e-7);
    assert!(field("lower_bound:") < field("upper_bound:"));
    let residuals: Vec<f64> = text
        .lines()
        .skip_while(|l| !l.starts_with("order"))
        .skip(1)
        .map(|l| l.split('\t').nth(2).unwrap().parse().unwrap())
        .collect();
    assert_eq!(residuals.len(), 6);
    assert!(residuals.iter().all(|r| r.abs() <= 1e-12));
    let toy = stdout(&sturm(&["dims", "--inject-lengths", "3:0.1111111111111111"]));
    let s: f64 = toy.lines().next().unwrap().trim_start_matches("s: ").parse().unwrap();
    assert!((s - 0.5).abs() < 1e-12, "{s}");
}

#[test]
fn gibbs_weights_sum_to_one() {
    let o = sturm(&["gibbs", "--V", "24", "--order", "6", "--beta", "0.5"]);
    assert!(o.status.success());
    let weights: Vec<f64> = stdout(&o)
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.split('\t').nth(1).unwrap().parse().unwrap())
        .collect();
    let total: f64 = weights.iter().sum();
    assert!((total - 1.0).abs() < 1e-12);
    assert_eq!(sturm(&["gibbs", "--order", "3", "--beta", "1.5"]).status.code(), Some(2));
}

#[test]
fn asym_law_table() {
    let o = sturm(&["asym", "--alpha", "per:1", "--V-list", "100,1000,10000", "--order", "8"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("V,order,s,s_lnV,target,gap"));
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 3);
    let target = (1.0 + 2f64.sqrt()).ln();
    for (r, v) in rows.iter().zip([100.0, 1000.0, 10000.0]) {
        assert_eq!((r[0], r[1]), (v, 8.0));
        assert!((r[3] - r[2] * v.ln()).abs() < 1e-12);
        assert!((r[4] - target).abs() < 1e-9);
        assert!((r[5] - (r[3] - r[4]).abs()).abs() < 1e-12);
    }
    let o = sturm(&["asym", "--alpha", "trunc:1,1,1", "--V-list", "100"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn hard_audit_exits_zero() {
    let o = sturm(&["audit", "--suite", "hard", "--V", "24", "--order", "6"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("fricke_invariant"));
    assert_eq!(sturm(&["audit", "--suite", "nonsense", "--order", "2"]).status.code(), Some(2));
}
