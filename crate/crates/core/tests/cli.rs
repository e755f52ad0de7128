mod common;

use std::fs;

use common::*;
use voicebench::audio::read_wav;
use voicebench::manifest::load_manifest;
use voicebench::simulate::schroeder_rt60;

#[test]
fn help_for_every_subcommand() {
    for sub in ["score", "compare", "simulate", "rir", "srpairs", "loudness"] {
        let out = run(&[sub, "--help"]);
        assert_eq!(code(&out), 0, "{sub}");
        assert!(stdout(&out).contains("--"), "{sub}");
    }
    assert_eq!(code(&run(&["score", "--bogus"])), 1);
}

#[test]
fn score_identical_pair_is_capped() {
    let d = tempfile::tempdir().unwrap();
    let f = d.path().join("x.wav");
    put(&f, noise(16000, 1, 0.1), 16000);
    let f = f.to_str().unwrap();
    let out = run(&["score", "--ref", f, "--est", f, "--metrics", "snr"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert_eq!(
        stdout(&out),
        "metric,mean,std,median,count,capped_count\nsnr,100,0,100,1,1\n"
    );
}

#[test]
fn score_unknown_metric_is_usage_error() {
    let d = tempfile::tempdir().unwrap();
    let f = d.path().join("x.wav");
    put(&f, noise(1600, 1, 0.1), 16000);
    let f = f.to_str().unwrap();
    assert_eq!(
        code(&run(&[
            "score",
            "--ref",
            f,
            "--est",
            f,
            "--metrics",
            "pesq"
        ])),
        1
    );
}

#[test]
fn score_directories_without_matches() {
    let d = tempfile::tempdir().unwrap();
    put(&d.path().join("r/a.wav"), noise(1600, 1, 0.1), 16000);
    put(&d.path().join("e/b.wav"), noise(1600, 2, 0.1), 16000);
    let p = |s: &str| d.path().join(s).to_str().unwrap().to_string();
    assert_eq!(
        code(&run(&["score", "--ref", &p("r"), "--est", &p("e")])),
        2
    );
}

#[test]
fn score_partial_failure() {
    let d = tempfile::tempdir().unwrap();
    for i in 0..10 {
        let x = noise(16000, i, 0.1);
        let y: Vec<f64> = x
            .iter()
            .zip(noise(16000, 100 + i, 0.01))
            .map(|(a, b)| a + b)
            .collect();
        put(&d.path().join(format!("r/u{i}.wav")), x, 16000);
        put(&d.path().join(format!("e/u{i}.wav")), y, 16000);
    }
    fs::write(d.path().join("e/u3.wav"), b"not a wav").unwrap();
    let p = |s: &str| d.path().join(s).to_str().unwrap().to_string();
    let out = run(&[
        "score",
        "--ref",
        &p("r"),
        "--est",
        &p("e"),
        "--metrics",
        "snr,si_snr",
        "--workers",
        "4",
        "--out",
        &p("summary.json"),
        "--format",
        "json",
        "--utterances-csv",
        &p("utt.csv"),
    ]);
    assert_eq!(code(&out), 3, "{}", stderr(&out));
    let rows = fs::read_to_string(p("utt.csv")).unwrap();
    assert_eq!(rows.lines().count(), 1 + 9);
    assert!(!rows.contains("u3.wav"));
    let jsonl = fs::read_to_string(p("summary.utterances.jsonl")).unwrap();
    assert_eq!(jsonl.lines().count(), 9);
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(p("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["rows"]["snr"]["count"], 9);
    let snr = summary["rows"]["snr"]["mean"].as_f64().unwrap();
    assert!((snr - 20.0).abs() < 1.0, "{snr}");
}

#[test]
fn score_rate_mismatch_needs_flag() {
    let d = tempfile::tempdir().unwrap();
    let x = sine(440.0, 0.5, 16000, 1.0);
    put(&d.path().join("r.wav"), x, 16000);
    put(&d.path().join("e.wav"), sine(440.0, 0.5, 8000, 1.0), 8000);
    let p = |s: &str| d.path().join(s).to_str().unwrap().to_string();
    assert_eq!(
        code(&run(&["score", "--ref", &p("r.wav"), "--est", &p("e.wav")])),
        2
    );
    let out = run(&[
        "score",
        "--ref",
        &p("r.wav"),
        "--est",
        &p("e.wav"),
        "--allow-resample",
        "--metrics",
        "si_snr",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
}

fn separation_dirs(root: &std::path::Path, n: usize, utts: usize) {
    for u in 0..utts {
        let srcs: Vec<Vec<f64>> = (0..n)
            .map(|s| noise(8000, (u * 10 + s) as u64, 0.1))
            .collect();
        for (s, x) in srcs.iter().enumerate() {
            put(
                &root.join(format!("refs/s{}/m{u}.wav", s + 1)),
                x.clone(),
                8000,
            );
            // estimates rotated by one source
            put(
                &root.join(format!("ests/s{}/m{u}.wav", (s + 1) % n + 1)),
                x.clone(),
                8000,
            );
        }
        let mix: Vec<f64> = (0..8000).map(|i| srcs.iter().map(|x| x[i]).sum()).collect();
        put(&root.join(format!("mix/m{u}.wav")), mix, 8000);
    }
}

#[test]
fn compare_recovers_swaps() {
    let d = tempfile::tempdir().unwrap();
    separation_dirs(d.path(), 2, 3);
    let p = |s: &str| d.path().join(s).to_str().unwrap().to_string();
    let out = run(&[
        "compare",
        "--refs",
        &p("refs"),
        "--ests",
        &p("ests"),
        "--mix",
        &p("mix"),
        "--out",
        &p("s.csv"),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(stderr(&out).contains("m0.wav: permutation (1,0)"));
    let summary = fs::read_to_string(p("s.csv")).unwrap();
    assert!(summary.contains("\nsi_snr,100,0,100,3,3\n"), "{summary}");
    let si_snri: f64 = summary
        .lines()
        .find(|l| l.starts_with("si_snri,"))
        .and_then(|l| l.split(',').nth(1))
        .unwrap()
        .parse()
        .unwrap();
    assert!(si_snri.is_finite() && si_snri > 50.0, "{si_snri}");
    let first: serde_json::Value = serde_json::from_str(
        fs::read_to_string(p("s.utterances.jsonl"))
            .unwrap()
            .lines()
            .next()
            .unwrap(),
    )
    .unwrap();
    assert_eq!(first["permutation"], serde_json::json!([1, 0]));
}

#[test]
fn compare_three_sources_with_snr() {
    let d = tempfile::tempdir().unwrap();
    separation_dirs(d.path(), 3, 2);
    let p = |s: &str| d.path().join(s).to_str().unwrap().to_string();
    let out = run(&[
        "compare",
        "--refs",
        &p("refs"),
        "--ests",
        &p("ests"),
        "--metric",
        "snr",
        "--utterances",
        &p("u.jsonl"),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let line = fs::read_to_string(p("u.jsonl")).unwrap();
    let first: serde_json::Value = serde_json::from_str(line.lines().next().unwrap()).unwrap();
    // ests/s{(s+1)%3+1} holds source s, so reference i is matched to estimate (i+1)%3.
    assert_eq!(first["permutation"], serde_json::json!([1, 2, 0]));
}

fn write_recipe(path: &std::path::Path, body: &str) {
    fs::write(path, body).unwrap();
}

#[test]
fn simulate_dry_run_and_determinism() {
    let d = tempfile::tempdir().unwrap();
    corpus(d.path(), 3, 8000);
    let p = |s: &str| d.path().join(s).to_str().unwrap().to_string();
    write_recipe(
        &d.path().join("r.toml"),
        "name = \"t\"\ncount = 100\nseed = 5\nkind = \"enhancement\"\n",
    );
    let sim = |out: &str, extra: &[&str]| {
        let mut args = vec![
            "simulate".to_string(),
            "--recipe".into(),
            p("r.toml"),
            "--corpus".into(),
            format!("speech:{}", p("speech")),
            "--corpus".into(),
            format!("noise:{}", p("noise")),
            "--out".into(),
            p(out),
        ];
        args.extend(extra.iter().map(|s| s.to_string()));
        bin().args(&args).output().unwrap()
    };
    let o = sim("dry", &["--dry-run"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(
        fs::read_to_string(p("dry/manifest.jsonl"))
            .unwrap()
            .lines()
            .count(),
        100
    );
    assert!(!d.path().join("dry/noisy").exists());

    write_recipe(
        &d.path().join("r.toml"),
        "name = \"t\"\ncount = 6\nseed = 5\nkind = \"enhancement\"\nreverb_fraction = 0.5\n",
    );
    let (a, b) = (sim("a", &["--workers", "1"]), sim("b", &["--workers", "3"]));
    assert_eq!(code(&a), 0, "{}", stderr(&a));
    assert_eq!(code(&b), 0);
    assert_eq!(
        fs::read(p("a/manifest.jsonl")).unwrap(),
        fs::read(p("b/manifest.jsonl")).unwrap()
    );
    let specs = load_manifest(&d.path().join("a/manifest.jsonl")).unwrap();
    assert_eq!(specs.len(), 6);
    for s in &specs {
        for dir in ["noisy", "clean"] {
            let f = format!("{dir}/{}.wav", s.utterance_id);
            let (x, y) = (
                read_wav(p(&format!("a/{f}"))).unwrap(),
                read_wav(p(&format!("b/{f}"))).unwrap(),
            );
            assert_eq!(x.samples(), y.samples());
        }
    }
}

#[test]
fn simulate_separation_needs_two_speakers() {
    let d = tempfile::tempdir().unwrap();
    corpus(d.path(), 1, 8000);
    let p = |s: &str| d.path().join(s).to_str().unwrap().to_string();
    write_recipe(
        &d.path().join("r.json"),
        r#"{"name":"s","count":2,"seed":1,"kind":"separation"}"#,
    );
    let out = run(&[
        "simulate",
        "--recipe",
        &p("r.json"),
        "--corpus",
        &format!("speech:{}", p("speech")),
        "--corpus",
        &format!("noise:{}", p("noise")),
        "--out",
        &p("o"),
    ]);
    assert_eq!(code(&out), 2);
    assert!(
        stderr(&out).contains("insufficient assets"),
        "{}",
        stderr(&out)
    );

    corpus(d.path(), 3, 8000);
    let out = run(&[
        "simulate",
        "--recipe",
        &p("r.json"),
        "--corpus",
        &format!("speech:{}", p("speech")),
        "--corpus",
        &format!("noise:{}", p("noise")),
        "--out",
        &p("o"),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    for dir in ["mix", "s1", "s2"] {
        assert!(d.path().join(format!("o/{dir}/s_000001.wav")).exists());
    }
}

#[test]
fn rir_commands() {
    let d = tempfile::tempdir().unwrap();
    let p = |s: &str| d.path().join(s).to_str().unwrap().to_string();
    let out = run(&[
        "rir",
        "--anechoic",
        "--room",
        "10x10x10",
        "--src",
        "2,5,5",
        "--mic",
        "5.43,5,5",
        "--out",
        &p("a.wav"),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let h = read_wav(p("a.wav")).unwrap();
    let x = h.samples();
    let peak = (0..x.len())
        .max_by(|&i, &j| x[i].abs().total_cmp(&x[j].abs()))
        .unwrap();
    assert_eq!(peak, (16000.0f64 * 3.43 / 343.0).round() as usize);
    assert_eq!(
        code(&run(&["rir", "--src", "5,1,1", "--out", &p("x.wav")])),
        1
    );

    let out = run(&["rir", "--out", &p("r.wav")]);
    assert_eq!(code(&out), 0);
    let h = read_wav(p("r.wav")).unwrap();
    let rt = schroeder_rt60(h.samples(), 16000).unwrap();
    assert!((rt / 0.3 - 1.0).abs() <= 0.2, "{rt}");
}

#[test]
fn srpairs_commands() {
    let d = tempfile::tempdir().unwrap();
    let p = |s: &str| d.path().join(s).to_str().unwrap().to_string();
    for i in 0..3 {
        put(
            &d.path().join(format!("in/f{i}.wav")),
            noise(9600, i, 0.1),
            48000,
        );
    }
    let args = |out: &str| {
        run(&[
            "srpairs",
            "--in",
            &p("in"),
            "--cutoff-range",
            "8000,8000",
            "--seed",
            "3",
            "--out",
            &p(out),
        ])
    };
    assert_eq!(code(&args("a")), 0);
    assert_eq!(code(&args("b")), 0);
    for i in 0..3 {
        let f = format!("lr/f{i}.wav");
        let a = read_wav(p(&format!("a/{f}"))).unwrap();
        assert_eq!(
            a.samples(),
            read_wav(p(&format!("b/{f}"))).unwrap().samples()
        );
        assert_eq!(a.frames(), 9600);
    }
    let specs = load_manifest(&d.path().join("a/pairs.jsonl")).unwrap();
    assert!(specs.iter().all(|s| s.cutoff_hz == Some(8000.0)));

    put(&d.path().join("low/x.wav"), noise(1600, 1, 0.1), 16000);
    let out = run(&["srpairs", "--in", &p("low"), "--out", &p("c")]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("expected 48000 Hz"));
}

#[test]
fn loudness_commands() {
    let d = tempfile::tempdir().unwrap();
    let p = |s: &str| d.path().join(s).to_str().unwrap().to_string();
    put(
        &d.path().join("l/sine.wav"),
        sine(997.0, 1.0, 48000, 5.0),
        48000,
    );
    put(
        &d.path().join("l/quiet.wav"),
        sine(997.0, 0.1, 48000, 5.0),
        48000,
    );
    let out = run(&["loudness", "--in", &p("l/sine.wav")]);
    assert_eq!(code(&out), 0);
    let v: f64 = stdout(&out)
        .split('\t')
        .nth(1)
        .unwrap()
        .trim_end_matches(" LUFS\n")
        .parse()
        .unwrap();
    assert!((v + 3.01).abs() < 0.1, "{v}");

    let out = run(&["loudness", "--in", &p("l")]);
    assert_eq!(code(&out), 0);
    let lines: Vec<String> = stdout(&out).lines().map(String::from).collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[2].starts_with("mean\t-13.01"), "{lines:?}");

    put(&d.path().join("l/silent.wav"), vec![0.0; 48000], 48000);
    let out = run(&["loudness", "--in", &p("l")]);
    assert_eq!(code(&out), 3);
    assert!(stdout(&out).contains("silent.wav\tgated-out"));
}
