use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use prosody_core::audio::write_wav;
use prosody_core::document::{read_textgrid, write_lab, Interval};
use prosody_core::synth;
use prosody_core::Transcription;

fn prosody(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_prosody")).args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = prosody(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn transcription_text(t: &Transcription) -> String {
    t.words.iter().map(|w| format!("{}\t{}\n", w.text, w.phones.join(" "))).collect()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

/// Corpus, seed labels and inventory for a small synthetic training run.
fn write_corpus(root: &Path) {
    let corpus = root.join("corpus");
    let seeds = root.join("seeds");
    fs::create_dir_all(&corpus).unwrap();
    fs::create_dir_all(&seeds).unwrap();
    for u in synth::training_set(24, 2, 5) {
        write_wav(&u.audio, corpus.join(format!("{}.wav", u.id))).unwrap();
        fs::write(corpus.join(format!("{}.txt", u.id)), transcription_text(&u.transcription)).unwrap();
        if let Some(labels) = &u.seed_labels {
            write_lab(labels, seeds.join(format!("{}.lab", u.id))).unwrap();
        }
    }
    fs::write(root.join("inventory.tsv"), synth::inventory().to_tsv()).unwrap();
}

#[test]
fn train_annotate_evaluate_and_langid() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    write_corpus(root);
    let models = root.join("models");
    ok(&[
        "train", "--corpus", p(&root.join("corpus")), "--seed-labels", p(&root.join("seeds")),
        "--inventory", p(&root.join("inventory.tsv")), "--iterations", "2", "--out", p(&models),
    ]);
    assert!(models.join("models.json").is_file());
    let log: serde_json::Value = serde_json::from_str(&fs::read_to_string(models.join("training.json")).unwrap()).unwrap();
    assert_eq!(log["log_likelihoods"].as_array().unwrap().len(), 3);

    // Two held-out utterances with known segmentations.
    let (wavs, texts, refs) = (root.join("wav"), root.join("text"), root.join("ref"));
    for d in [&wavs, &texts, &refs] {
        fs::create_dir_all(d).unwrap();
    }
    let cases = [("one", ["kamal", "nila"], 0.4), ("two", ["malai", "punal"], 0.35)];
    for (name, words, pause) in cases {
        let (u, t) = synth::utterance(&words, &[pause], |_| 110.0, 9);
        write_wav(&u.audio, wavs.join(format!("{name}.wav"))).unwrap();
        fs::write(texts.join(format!("{name}.txt")), transcription_text(&t)).unwrap();
        let truth: Vec<Interval> = u.segments.iter().map(|(l, s, e)| Interval::new(*s, *e, l.as_str())).collect();
        write_lab(&truth, refs.join(format!("{name}.lab"))).unwrap();
    }
    let out = root.join("out");
    ok(&[
        "annotate", "--wav", p(&wavs), "--text", p(&texts), "--models", p(&models), "--out", p(&out),
        "--textgrid", "--lab", "--jobs", "2",
    ]);
    for (name, words, _) in cases {
        let doc = read_textgrid(out.join(format!("{name}.TextGrid"))).unwrap();
        assert_eq!(doc.audio, format!("{name}.wav"));
        assert_eq!(doc.words.iter().map(|w| w.text.as_str()).collect::<Vec<_>>(), words);
        assert_eq!(doc.breaks.len(), 2);
        assert!(out.join(format!("{name}.lab")).is_file());
    }

    let report = root.join("phones.json");
    let summary = ok(&["evaluate", "--tier", "phones", "--hyp", p(&out), "--ref", p(&refs), "--report", p(&report)]);
    assert!(summary.contains("segments"), "{summary}");
    let r: serde_json::Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(r["files"].as_array().unwrap().len(), 2);
    assert!(r["overall"]["boundary_within"]["30"].as_f64().unwrap() >= 80.0, "{r}");

    // A document evaluated against itself scores perfectly on every tier.
    for tier in ["breaks", "pitch"] {
        let report = root.join(format!("{tier}.json"));
        ok(&["evaluate", "--tier", tier, "--hyp", p(&out), "--ref", p(&out), "--report", p(&report)]);
        let r: serde_json::Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
        assert_eq!(r["overall"]["accuracy"].as_f64(), Some(100.0), "{tier}: {r}");
    }

    let tables = root.join("tables");
    fs::create_dir_all(&tables).unwrap();
    ok(&["langid", "build-table", "--corpus", p(&out), "--lang", "xx", "--out", p(&tables.join("xx.json"))]);
    let words = root.join("words.txt");
    fs::write(&words, "w1\tS-H B-L\nw2\tflat\n").unwrap();
    ok(&["langid", "build-table", "--corpus", p(root), "--lang", "yy", "--out", p(&tables.join("yy.json"))]);
    let table = ok(&["langid", "classify", "--tables", p(&tables), "--word-labels", p(&words)]);
    let lines: Vec<&str> = table.lines().collect();
    assert_eq!(lines[0], "word\tlanguage\ttie\txx\tyy");
    assert_eq!(lines.len(), 3);
}

#[test]
fn exit_codes() {
    assert!(prosody(&["--help"]).status.success());
    let usage = prosody(&["annotate", "--wav"]);
    assert_eq!(usage.status.code(), Some(1));
    assert!(!usage.stderr.is_empty());

    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing");
    let out = prosody(&[
        "annotate", "--wav", p(&missing.join("a.wav")), "--text", p(&missing.join("a.txt")),
        "--models", p(&missing), "--out", p(dir.path()),
    ]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.starts_with("error:") && err.contains("missing"), "{err}");
    assert!(out.stdout.is_empty());
}

#[test]
fn failing_recording_is_reported_and_others_still_written() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    write_corpus(root);
    let models = root.join("models");
    ok(&[
        "train", "--corpus", p(&root.join("corpus")), "--seed-labels", p(&root.join("seeds")),
        "--inventory", p(&root.join("inventory.tsv")), "--iterations", "1", "--out", p(&models),
    ]);
    let (wavs, texts, out) = (root.join("wav"), root.join("text"), root.join("out"));
    fs::create_dir_all(&wavs).unwrap();
    fs::create_dir_all(&texts).unwrap();
    let (u, t) = synth::utterance(&["amma"], &[], |_| 120.0, 1);
    write_wav(&u.audio, wavs.join("good.wav")).unwrap();
    fs::write(texts.join("good.txt"), transcription_text(&t)).unwrap();
    write_wav(&u.audio, wavs.join("bad.wav")).unwrap();
    fs::write(texts.join("bad.txt"), "amma\tq q q\n").unwrap();

    let res = prosody(&["annotate", "--wav", p(&wavs), "--text", p(&texts), "--models", p(&models), "--out", p(&out)]);
    assert_eq!(res.status.code(), Some(1));
    let err = String::from_utf8_lossy(&res.stderr);
    assert!(err.contains("bad.wav") && err.contains("1 of 2 recordings failed"), "{err}");
    assert!(out.join("good.TextGrid").is_file());
    assert!(!out.join("good.lab").exists());
}
