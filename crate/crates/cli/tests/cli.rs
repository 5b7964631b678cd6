use std::borrow::Cow;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use flowkit::media::{netpbm, write_frame_dir};
use flowkit::synth::{translating_texture_clip, Texture};
use flowkit::warp::flo;
use flowkit::FlowField;
use serde_json::Value;
use tempfile::TempDir;

fn flowkit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_flowkit"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

/// Keys of a flat JSON object in the order they appear in `text`.
fn key_order(text: &str, keys: &[&str]) -> bool {
    let pos: Vec<usize> = keys
        .iter()
        .map(|k| text.find(&format!("\"{k}\":")).expect(k))
        .collect();
    pos.windows(2).all(|w| w[0] < w[1])
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn texture_corpus(root: &Path, clips: u64) -> PathBuf {
    let input = root.join("clips");
    let mut captions = String::new();
    for k in 0..clips {
        let id = format!("clip{k}");
        let seq = translating_texture_clip(&id, k, 7, 64, (1.0 + 0.5 * k as f64, 0.5));
        write_frame_dir(&seq, &input.join(&id)).unwrap();
        captions.push_str(&format!("{id}\ttexture number {k} drifts right\n"));
    }
    fs::write(root.join("captions.tsv"), captions).unwrap();
    input
}

#[test]
fn flow_of_identical_frames_is_zero() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a.ppm");
    netpbm::write_ppm(&a, &Texture::new(3).render_color(64, 64, 0.0, 0.0)).unwrap();
    let out = flowkit(&["flow", p(&a), p(&a)]);
    assert!(out.status.success(), "{}", stderr(&out));
    let json: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(json["magnitude"], 0.0);
    assert!(json["n_features_detected"].as_u64().unwrap() > 0);
    assert!(stderr(&out).contains("resolved config"));
}

#[test]
fn flow_reports_a_shift() {
    let dir = TempDir::new().unwrap();
    let (a, b) = (dir.path().join("a.ppm"), dir.path().join("b.ppm"));
    let tex = Texture::new(8);
    netpbm::write_ppm(&a, &tex.render_color(96, 96, 0.0, 0.0)).unwrap();
    netpbm::write_ppm(&b, &tex.render_color(96, 96, 3.0, 4.0)).unwrap();
    let out = flowkit(&["flow", p(&a), p(&b)]);
    assert!(out.status.success(), "{}", stderr(&out));
    let m = serde_json::from_slice::<Value>(&out.stdout).unwrap()["magnitude"]
        .as_f64()
        .unwrap();
    assert!((m - 5.0).abs() < 0.5, "{m}");
}

#[test]
fn flow_params_file_and_overrides() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a.ppm");
    netpbm::write_ppm(&a, &Texture::new(3).render_color(64, 64, 0.0, 0.0)).unwrap();
    let params = dir.path().join("flow.toml");
    fs::write(&params, "window = 9\nmax_corners = 50\n").unwrap();
    let out = flowkit(&[
        "flow",
        p(&a),
        p(&a),
        "--params",
        p(&params),
        "--max-corners",
        "20",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let err = stderr(&out);
    assert!(
        err.contains("\"window\":9") && err.contains("\"max_corners\":20"),
        "{err}"
    );

    fs::write(&params, "windw = 9\n").unwrap();
    let out = flowkit(&["flow", p(&a), p(&a), "--params", p(&params)]);
    assert_eq!(out.status.code(), Some(2));
    let out = flowkit(&["flow", p(&a), p(&a), "--window", "8"]);
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
}

#[test]
fn module_errors_exit_one() {
    let dir = TempDir::new().unwrap();
    let missing = dir.path().join("nope.ppm");
    let out = flowkit(&["flow", p(&missing), p(&missing)]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(
        stderr(&out)
            .lines()
            .filter(|l| l.starts_with("error:"))
            .count(),
        1
    );
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(flowkit(&["flow", "--bogus"]).status.code(), Some(2));
    assert_eq!(flowkit(&["frobnicate"]).status.code(), Some(2));
    let dir = TempDir::new().unwrap();
    let input = texture_corpus(dir.path(), 1);
    let captions = dir.path().join("captions.tsv");
    let out_file = dir.path().join("m.jsonl");
    for bad in [
        vec!["--lo", "20", "--hi", "2"],
        vec!["--quota", "0"],
        vec!["--pairing", "gap:0"],
        vec!["--pairing", "sometimes"],
    ] {
        let mut args = vec![
            "curate",
            "--input",
            p(&input),
            "--captions",
            p(&captions),
            "--out",
            p(&out_file),
        ];
        args.extend(bad.iter().copied());
        let out = flowkit(&args);
        assert_eq!(out.status.code(), Some(2), "{bad:?}: {}", stderr(&out));
    }
    assert!(!out_file.exists());
}

#[test]
fn curate_empty_input() {
    let dir = TempDir::new().unwrap();
    let input = dir.path().join("empty");
    fs::create_dir(&input).unwrap();
    let captions = dir.path().join("c.tsv");
    fs::write(&captions, "").unwrap();
    let out = flowkit(&[
        "curate",
        "--input",
        p(&input),
        "--captions",
        p(&captions),
        "--out",
        p(&dir.path().join("m.jsonl")),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("no clips found"), "{}", stderr(&out));
}

#[test]
fn curate_missing_caption() {
    let dir = TempDir::new().unwrap();
    let input = texture_corpus(dir.path(), 2);
    let captions = dir.path().join("partial.tsv");
    fs::write(&captions, "clip0\tonly one\n").unwrap();
    let out = flowkit(&[
        "curate",
        "--input",
        p(&input),
        "--captions",
        p(&captions),
        "--out",
        p(&dir.path().join("m.jsonl")),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("clip1"));
}

#[test]
fn curate_is_deterministic_across_job_counts() {
    let dir = TempDir::new().unwrap();
    let input = texture_corpus(dir.path(), 3);
    let captions = dir.path().join("captions.tsv");
    let run = |name: &str, jobs: &str, seed: &str| {
        let manifest = dir.path().join(format!("{name}.jsonl"));
        let stats = dir.path().join(format!("{name}.json"));
        let out = flowkit(&[
            "curate",
            "--input",
            p(&input),
            "--captions",
            p(&captions),
            "--out",
            p(&manifest),
            "--stats",
            p(&stats),
            "--seed",
            seed,
            "--quota",
            "4",
            "--jobs",
            jobs,
            "--pairing",
            "gap:4",
        ]);
        assert!(out.status.success(), "{}", stderr(&out));
        (
            fs::read(&manifest).unwrap(),
            serde_json::from_slice::<Value>(&fs::read(&stats).unwrap()).unwrap(),
        )
    };
    let (m1, s1) = run("a", "1", "5");
    let (m2, _) = run("b", "2", "5");
    assert_eq!(m1, m2);
    let text = String::from_utf8(m1).unwrap();
    let rows: Vec<Value> = text
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert!(!rows.is_empty());
    let keys = [
        "clip_id",
        "src_index",
        "tgt_index",
        "magnitude",
        "caption",
        "augmented_caption",
    ];
    for (line, r) in text.lines().zip(&rows) {
        assert!(key_order(line, &keys), "{line}");
        assert_eq!(r.as_object().unwrap().len(), keys.len());
        let m = r["magnitude"].as_f64().unwrap();
        assert!((2.0..=20.0).contains(&m));
        assert!(r["augmented_caption"]
            .as_str()
            .unwrap()
            .contains("The optical flow is "));
    }
    let summary = &s1["summary"];
    assert_eq!(summary["clips"], 3);
    assert_eq!(
        summary["total_emitted"].as_u64().unwrap() as usize,
        rows.len()
    );
    assert_eq!(summary["frames_mean"], 7.0);
    for clip in s1["clips"].as_array().unwrap() {
        let n = rows
            .iter()
            .filter(|r| r["clip_id"] == clip["clip_id"])
            .count() as u64;
        assert_eq!(n, clip["pair_count_in_range"].as_u64().unwrap().min(4));
    }
}

#[test]
fn stats_without_sampling() {
    let dir = TempDir::new().unwrap();
    let input = texture_corpus(dir.path(), 2);
    fs::write(input.join("broken.gif"), b"GIF89a\x01").unwrap();
    let out = flowkit(&["stats", "--input", p(&input), "--pairing", "gap:2"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let json: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(json["clips"].as_array().unwrap().len(), 2);
    assert_eq!(json["failures"][0]["clip_id"], "broken");
    // 7 frames, gaps 1 and 2: 6 + 5 pairs.
    assert_eq!(json["clips"][0]["pair_count_scored"], 11);
    let hist: u64 = json["summary"]["magnitude_histogram"]["counts"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_u64().unwrap())
        .sum();
    assert_eq!(hist, 22);
}

fn tiny_gif() -> Vec<u8> {
    let palette = [0u8, 0, 0, 255, 0, 0, 0, 255, 0, 0, 0, 255];
    let mut out = Vec::new();
    {
        let mut enc = gif::Encoder::new(&mut out, 8, 8, &palette).unwrap();
        for k in 0..5u16 {
            let (w, h) = if k == 0 { (8, 8) } else { (3, 2) };
            let frame = gif::Frame {
                left: k,
                top: k,
                width: w,
                height: h,
                buffer: Cow::Owned((0..w * h).map(|i| ((i + k) % 4) as u8).collect()),
                ..gif::Frame::default()
            };
            enc.write_frame(&frame).unwrap();
        }
    }
    out
}

#[test]
fn extract_writes_one_file_per_frame() {
    let dir = TempDir::new().unwrap();
    let gif_path = dir.path().join("anim.gif");
    fs::write(&gif_path, tiny_gif()).unwrap();
    let frames = dir.path().join("frames");
    let out = flowkit(&["extract", p(&gif_path), "--out", p(&frames)]);
    assert!(out.status.success(), "{}", stderr(&out));
    let mut names: Vec<String> = fs::read_dir(&frames)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    names.sort();
    assert_eq!(
        names,
        ["000.ppm", "001.ppm", "002.ppm", "003.ppm", "004.ppm"]
    );

    let mut truncated = tiny_gif();
    truncated.truncate(truncated.len() - 3);
    fs::write(&gif_path, truncated).unwrap();
    let out = flowkit(&[
        "extract",
        p(&gif_path),
        "--out",
        p(&dir.path().join("other")),
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn warp_by_integer_shift() {
    let dir = TempDir::new().unwrap();
    let img = Texture::new(4).render_color(20, 16, 0.0, 0.0);
    let (image, field, out_path) = (
        dir.path().join("i.ppm"),
        dir.path().join("f.flo"),
        dir.path().join("o.ppm"),
    );
    netpbm::write_ppm(&image, &img).unwrap();
    flo::write(&field, &FlowField::constant(20, 16, 2.0, -1.0)).unwrap();
    let out = flowkit(&[
        "warp",
        "--image",
        p(&image),
        "--flow",
        p(&field),
        "--out",
        p(&out_path),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let src = netpbm::read_color(&image).unwrap();
    let warped = netpbm::read_color(&out_path).unwrap();
    for y in 1..16 {
        for x in 0..18 {
            assert_eq!(warped.pixel(x, y), src.pixel(x + 2, y - 1));
        }
    }
    flo::write(&field, &FlowField::constant(4, 4, 0.0, 0.0)).unwrap();
    let out = flowkit(&[
        "warp",
        "--image",
        p(&image),
        "--flow",
        p(&field),
        "--out",
        p(&out_path),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

fn rollout(dir: &Path, shifts: &[f64]) -> (PathBuf, PathBuf) {
    let tex = Texture::new(12);
    let source = dir.join("source.ppm");
    netpbm::write_ppm(&source, &tex.render_color(128, 128, 0.0, 0.0)).unwrap();
    let frames = dir.join("gen");
    fs::create_dir(&frames).unwrap();
    for (k, s) in shifts.iter().enumerate() {
        netpbm::write_ppm(
            &frames.join(format!("{k}.ppm")),
            &tex.render_color(128, 128, *s, 0.0),
        )
        .unwrap();
    }
    (source, frames)
}

#[test]
fn eval_schedule_report() {
    let dir = TempDir::new().unwrap();
    let (source, frames) = rollout(dir.path(), &[2.0, 4.0, 6.0, 8.0, 11.0, 14.0, 17.0, 19.0]);
    let report = dir.path().join("report.json");
    let out = flowkit(&[
        "eval",
        "--source",
        p(&source),
        "--frames",
        p(&frames),
        "--cfg-label",
        "1.8",
        "--out",
        p(&report),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = fs::read_to_string(&report).unwrap();
    let json: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(json.as_object().unwrap().len(), 4);
    assert!(
        key_order(&text, &["commanded", "measured", "l2", "pcc"]),
        "{text}"
    );
    assert!(json["pcc"].as_f64().unwrap() > 0.99);
    assert!(json["l2"].as_f64().unwrap() < 0.5);
    assert!(stderr(&out).contains("1.8"));
}

#[test]
fn eval_count_mismatch() {
    let dir = TempDir::new().unwrap();
    let (source, frames) = rollout(dir.path(), &[2.0, 4.0, 6.0, 8.0]);
    let out = flowkit(&[
        "eval",
        "--source",
        p(&source),
        "--frames",
        p(&frames),
        "--motions",
        "2,4,6",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr(&out);
    assert!(err.contains('3') && err.contains('4'), "{err}");
    let out = flowkit(&[
        "eval",
        "--source",
        p(&source),
        "--frames",
        p(&frames),
        "--motions",
        "2,-4,6,8",
    ]);
    assert_eq!(out.status.code(), Some(2));
}
