//! End-to-end checks of the `orthovar` binary: exit codes, output formats,
//! and reproducibility of the augment pipeline.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_orthovar"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

#[test]
fn transcribe_reports_lexicon_provenance() {
    let output = run(&["transcribe", "anything"]);
    assert!(output.status.success());
    assert_eq!(stdout(&output).trim(), "anything\tɛ n ɪ θ ɪ ŋ\tlexicon");
}

#[test]
fn transcribe_empty_word_is_usage_error() {
    let output = run(&["transcribe", ""]);
    assert_eq!(output.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&output.stderr).into_owned();
    assert!(stderr.contains("empty word"), "stderr: {stderr}");
}

#[test]
fn transcribe_file_keeps_order() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("words.txt");
    fs::write(&path, "see\nbikos\nthing\n").unwrap();
    let output = run(&["transcribe", "--file", path.to_str().unwrap()]);
    assert!(output.status.success());
    let lines: Vec<String> = stdout(&output).lines().map(str::to_string).collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[0].starts_with("see\t"));
    assert!(lines[1].starts_with("bikos\t"));
    assert!(lines[1].ends_with("fallback"));
    assert!(lines[2].starts_with("thing\t"));
}

#[test]
fn transcribe_prints_error_rows_and_keeps_going() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("words.txt");
    fs::write(&path, "see\n'''\nthing\n").unwrap();
    let output = run(&["transcribe", "--file", path.to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(1));
    let text = stdout(&output);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[0].starts_with("see\t"));
    assert!(lines[1].starts_with("'''\tERROR\t"), "{text}");
    assert!(lines[2].starts_with("thing\t"));
}

#[test]
fn transcribe_ascii_flag_uses_aliases() {
    let output = run(&["transcribe", "--ascii", "thing"]);
    assert!(output.status.success());
    assert_eq!(stdout(&output).trim(), "thing\tTH IH NG\tlexicon");
}

#[test]
fn variants_orders_reported_trio_and_normalizes() {
    let output = run(&["variants", "anything"]);
    assert!(output.status.success());
    let text = stdout(&output);
    let mut position = std::collections::HashMap::new();
    let mut probability_sum = 0.0f64;
    for (index, line) in text.lines().enumerate() {
        let fields: Vec<&str> = line.split('\t').collect();
        assert_eq!(fields.len(), 5, "row: {line}");
        position.insert(fields[0].to_string(), index);
        probability_sum += fields[4].parse::<f64>().unwrap();
    }
    assert!(
        (probability_sum - 1.0).abs() < 1e-6,
        "sum {probability_sum}"
    );
    for surface in ["anyting", "anitin", "onytin"] {
        assert!(position.contains_key(surface), "{surface} missing:\n{text}");
    }
    // Rows are sorted by probability, so the reported ordering follows
    // from the row positions.
    assert!(position["anyting"] < position["anitin"]);
    assert!(position["anitin"] < position["onytin"]);
}

#[test]
fn variants_without_applicable_rules_prints_nothing() {
    let output = run(&["variants", "drum"]);
    assert!(output.status.success());
    assert!(stdout(&output).is_empty());
}

#[test]
fn dist_prints_both_distances() {
    let output = run(&["dist", "because", "bikos"]);
    assert!(output.status.success());
    let text = stdout(&output);
    let fields: Vec<&str> = text.trim().split('\t').collect();
    assert_eq!(fields[0], "because");
    assert_eq!(fields[1], "bikos");
    assert_eq!(fields[2], "5");
    assert!(fields[3].parse::<f64>().is_ok());
}

#[test]
fn align_train_then_align_shows_links() {
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("model.tsv");
    let output = run(&["align-train", "--out", model.to_str().unwrap()]);
    assert!(output.status.success(), "{:?}", output);
    assert!(model.is_file());

    let output = run(&["align", "thing", "--model", model.to_str().unwrap()]);
    assert!(output.status.success());
    let text = stdout(&output);
    assert!(text.contains("th→θ"), "{text}");
    assert!(text.contains("i→ɪ"), "{text}");
    assert!(text.contains("ng→ŋ"), "{text}");

    let output = run(&["align", "come", "--model", model.to_str().unwrap()]);
    let text = stdout(&output);
    assert!(text.contains("e→∅"), "{text}");
}

#[test]
fn align_model_round_trips_bit_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("a.tsv");
    let second = dir.path().join("b.tsv");
    assert!(run(&["align-train", "--out", first.to_str().unwrap()])
        .status
        .success());
    assert!(run(&["align-train", "--out", second.to_str().unwrap()])
        .status
        .success());
    assert_eq!(fs::read(&first).unwrap(), fs::read(&second).unwrap());
}

#[test]
fn calibrate_reports_accuracies() {
    let dir = tempfile::tempdir().unwrap();
    let labels = dir.path().join("labels.tsv");
    fs::write(
        &labels,
        "thing\ttin\tgood\nthing\ttng\tbad\nsee\tsi\tgood\nsee\tzz\tbad\n",
    )
    .unwrap();
    let overrides = dir.path().join("overrides.tsv");
    let output = run(&[
        "calibrate",
        "--labels",
        labels.to_str().unwrap(),
        "--out",
        overrides.to_str().unwrap(),
    ]);
    assert!(output.status.success(), "{:?}", output);
    let text = stdout(&output);
    assert!(text.contains("baseline_accuracy"), "{text}");
    assert!(text.contains("calibrated_accuracy"), "{text}");
    assert!(text.contains("threshold"), "{text}");
    assert!(overrides.is_file());
}

#[test]
fn augment_k_zero_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("corpus.txt");
    fs::write(&input, "see di thing\n").unwrap();
    let output = run(&[
        "augment",
        "--input",
        input.to_str().unwrap(),
        "--k",
        "0",
        "--out",
        dir.path().join("out.txt").to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&output.stderr).into_owned();
    assert!(stderr.contains("K must be >= 1"), "stderr: {stderr}");
}

#[test]
fn augment_end_to_end_with_union_provenance_and_stats() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("corpus.txt");
    fs::write(
        &input,
        "We come later learn for our new place .\n\
         Di people dey teach di thing well .\n\
         E better to go area wey get another priest .\n\
         Make una carry di food come house .\n",
    )
    .unwrap();
    let out = dir.path().join("augmented.txt");
    let provenance = dir.path().join("prov.jsonl");
    let output = run(&[
        "augment",
        "--input",
        input.to_str().unwrap(),
        "--k",
        "3",
        "--seed",
        "7",
        "--out",
        out.to_str().unwrap(),
        "--emit-union",
        "--provenance",
        provenance.to_str().unwrap(),
    ]);
    assert!(output.status.success(), "{:?}", output);

    let augmented = fs::read_to_string(&out).unwrap();
    assert_eq!(augmented.lines().count(), 3);

    let union = fs::read_to_string(dir.path().join("augmented.txt.union")).unwrap();
    assert_eq!(union.lines().count(), 4 + 3);
    assert!(union.starts_with("We come later learn for our new place .\n"));

    // One JSON record per augmented sentence, each replayable.
    let sources: Vec<String> = fs::read_to_string(&input)
        .unwrap()
        .lines()
        .map(str::to_string)
        .collect();
    let mut augmented_lines = augmented.lines();
    for line in fs::read_to_string(&provenance).unwrap().lines() {
        let record: serde_json::Value = serde_json::from_str(line).unwrap();
        let source_index = record["source_index"].as_u64().unwrap() as usize;
        let mut rebuilt = sources[source_index].clone();
        for sub in record["substitutions"].as_array().unwrap().iter().rev() {
            let start = sub["source_span"][0].as_u64().unwrap() as usize;
            let end = sub["source_span"][1].as_u64().unwrap() as usize;
            rebuilt.replace_range(start..end, sub["variant"].as_str().unwrap());
        }
        assert_eq!(rebuilt, augmented_lines.next().unwrap());
    }

    // stats over the union vs the source corpus.
    let output = run(&[
        "stats",
        "--input",
        out.to_str().unwrap(),
        "--against",
        input.to_str().unwrap(),
        "--group",
        "come,kom,kome",
    ]);
    assert!(output.status.success(), "{:?}", output);
    let json: serde_json::Value = serde_json::from_str(&stdout(&output)).unwrap();
    assert!(json["new_variant_count"].as_u64().is_some());
    assert!(json["group_counts"]["come"].as_u64().is_some());
}

#[test]
fn augment_is_reproducible_and_thread_independent() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("corpus.txt");
    let lines: Vec<String> = (0..12)
        .map(|i| format!("Di people dey teach di thing number {i} well ."))
        .collect();
    fs::write(&input, lines.join("\n") + "\n").unwrap();

    let mut outputs = Vec::new();
    for (name, threads) in [("a.txt", "1"), ("b.txt", "1"), ("c.txt", "3")] {
        let out = dir.path().join(name);
        let output = run(&[
            "augment",
            "--input",
            input.to_str().unwrap(),
            "--k",
            "8",
            "--seed",
            "99",
            "--threads",
            threads,
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(output.status.success(), "{:?}", output);
        outputs.push(fs::read(&out).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
    assert_eq!(outputs[0], outputs[2]);
}

#[test]
fn augment_parallel_mode_keeps_line_counts_equal() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("pg.txt");
    let target = dir.path().join("en.txt");
    fs::write(&input, "Di people dey come .\nE go teach di thing .\n").unwrap();
    fs::write(
        &target,
        "The people are coming .\nHe will teach the thing .\n",
    )
    .unwrap();
    let out = dir.path().join("pg.aug.txt");
    let out_target = dir.path().join("en.aug.txt");
    let output = run(&[
        "augment",
        "--input",
        input.to_str().unwrap(),
        "--parallel-target",
        target.to_str().unwrap(),
        "--out-target",
        out_target.to_str().unwrap(),
        "--k",
        "2",
        "--seed",
        "5",
        "--out",
        out.to_str().unwrap(),
        "--emit-union",
    ]);
    assert!(output.status.success(), "{:?}", output);
    let source_union = fs::read_to_string(dir.path().join("pg.aug.txt.union")).unwrap();
    let target_union = fs::read_to_string(dir.path().join("en.aug.txt.union")).unwrap();
    assert_eq!(source_union.lines().count(), target_union.lines().count());
    // Target side of augmented rows repeats the original translation.
    assert_eq!(target_union.lines().count(), 4);
    assert!(
        target_union.ends_with("He will teach the thing .\n")
            || target_union.contains("The people are coming .")
    );
}

#[test]
fn config_file_sets_knobs_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("config.json");
    fs::write(&config, r#"{"indel_cost": 2.0}"#).unwrap();
    // Config alone: invalid indel cost is a validation error (exit 2).
    let output = run(&[
        "--config",
        config.to_str().unwrap(),
        "dist",
        "because",
        "bikos",
    ]);
    assert_eq!(output.status.code(), Some(2));
    // A flag overrides the config and makes it valid again.
    let output = run(&[
        "--config",
        config.to_str().unwrap(),
        "--indel-cost",
        "0.6",
        "dist",
        "because",
        "bikos",
    ]);
    assert!(output.status.success(), "{:?}", output);
}

#[test]
fn missing_table_file_is_usage_error() {
    let output = run(&["--rules", "/nonexistent/rules.tsv", "variants", "thing"]);
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn explicit_table_files_match_builtin_tables() {
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/data");
    let arg = |name: &str| data.join(name).to_str().unwrap().to_string();
    let output = bin()
        .args([
            "--inventory",
            &arg("inventory.tsv"),
            "--lexicon",
            &arg("lexicon.tsv"),
            "--fallback",
            &arg("fallback.tsv"),
            "--merge-table",
            &arg("merge_table.txt"),
            "transcribe",
            "anything",
        ])
        .output()
        .unwrap();
    assert!(output.status.success(), "{:?}", output);
    assert_eq!(stdout(&output).trim(), "anything\tɛ n ɪ θ ɪ ŋ\tlexicon");
}

#[test]
fn weight_overrides_change_distances() {
    let dir = tempfile::tempdir().unwrap();
    let overrides = dir.path().join("over.tsv");
    fs::write(&overrides, "!override\tz\ts\t0\n").unwrap();
    let base = run(&["dist", "because", "bikos"]);
    let adjusted = bin()
        .args([
            "--weight-overrides",
            overrides.to_str().unwrap(),
            "dist",
            "because",
            "bikos",
        ])
        .output()
        .unwrap();
    assert!(adjusted.status.success(), "{:?}", adjusted);
    let pwld_of = |o: &Output| {
        stdout(o)
            .trim()
            .rsplit('\t')
            .next()
            .unwrap()
            .parse::<f64>()
            .unwrap()
    };
    assert!(pwld_of(&adjusted) < pwld_of(&base));
}

#[test]
fn custom_rules_file_changes_candidates() {
    let dir = tempfile::tempdir().unwrap();
    let rules = dir.path().join("rules.tsv");
    fs::write(&rules, "conversion\tth\tt\tall\tθ\n").unwrap();
    let output = run(&["--rules", rules.to_str().unwrap(), "variants", "thing"]);
    assert!(output.status.success());
    let text = stdout(&output);
    assert_eq!(text.lines().count(), 1);
    assert!(text.starts_with("ting\t"), "{text}");

    let empty = dir.path().join("empty.tsv");
    fs::write(&empty, "").unwrap();
    let output = run(&["--rules", empty.to_str().unwrap(), "variants", "thing"]);
    assert!(output.status.success());
    assert!(stdout(&output).is_empty());
}
