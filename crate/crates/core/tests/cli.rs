use std::path::{Path, PathBuf};
use std::process::Command;

use pcbz::cli::{run, EXIT_CORRUPT, EXIT_IO, EXIT_OK, EXIT_USAGE};
use pcbz::container::read_container;
use pcbz::io::{read_raw_stack, sidecar_path, write_image, write_raw_stack};
use pcbz::{compress_stack, decompress_stack, generate, CompressOptions, PredictorSpec, SynthMode, SynthParams};

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn pcbz(args: &[&str]) -> Run {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("pcbz").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    Run { code, stdout: String::from_utf8(out).unwrap(), stderr: String::from_utf8(err).unwrap() }
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn sample(frames: usize) -> pcbz::FrameStack {
    generate(&SynthParams {
        width: 75,
        height: 60,
        frames,
        noise_sigma: 20.0,
        drift: 1.0,
        seed: 3,
        ..SynthParams::default()
    })
    .unwrap()
}

fn write_pgm(dir: &Path, name: &str, frames: usize) -> PathBuf {
    let path = dir.join(name);
    write_image(&path, &sample(frames)).unwrap();
    path
}

#[test]
fn pgm_round_trip_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_pgm(dir.path(), "in.pgm", 1);
    let packed = dir.path().join("out.pcbz");
    let back = dir.path().join("back.pgm");

    let r = pcbz(&["compress", "--pitch", "15x15", s(&input), "-o", s(&packed)]);
    assert_eq!(r.code, EXIT_OK, "{}", r.stderr);
    assert!(r.stdout.contains("bits_per_dim="), "{}", r.stdout);
    assert_eq!(r.stdout.lines().count(), 1);

    let r = pcbz(&["decompress", s(&packed), "-o", s(&back)]);
    assert_eq!(r.code, EXIT_OK, "{}", r.stderr);
    assert_eq!(std::fs::read(&input).unwrap(), std::fs::read(&back).unwrap());
}

#[test]
fn multi_frame_temporal_round_trip_with_flags() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_pgm(dir.path(), "stack.pgm", 4);
    let packed = dir.path().join("stack.pcbz");
    let back = dir.path().join("back.pgm");
    let r = pcbz(&[
        "compress",
        "-i",
        s(&input),
        "-o",
        s(&packed),
        "--pitch",
        "15x15",
        "--temporal",
        "on",
        "--threads",
        "2",
        "--block-size",
        "1000",
    ]);
    assert_eq!(r.code, EXIT_OK, "{}", r.stderr);
    assert_eq!(pcbz(&["decompress", "-i", s(&packed), "-o", s(&back)]).code, EXIT_OK);
    assert_eq!(std::fs::read(&input).unwrap(), std::fs::read(&back).unwrap());

    let data = std::fs::read(&packed).unwrap();
    let c = read_container(&data).unwrap();
    assert!(c.header.uses_temporal());
    assert_eq!(c.header.block_size, 1000);
    assert!(c.records.iter().all(|r| r.block_sizes.len() == 9));
}

#[test]
fn inspect_forced_identity() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_pgm(dir.path(), "in.pgm", 1);
    let packed = dir.path().join("id.pcbz");
    let r = pcbz(&["compress", s(&input), "-o", s(&packed), "--pitch", "15x15", "--predictor", "0"]);
    assert_eq!(r.code, EXIT_OK, "{}", r.stderr);

    let r = pcbz(&["inspect", s(&packed)]);
    assert_eq!(r.code, EXIT_OK);
    let line = r.stdout.lines().find(|l| l.starts_with("frame 0 predictor")).unwrap();
    assert!(line.contains("0x00"), "{line}");
    assert!(line.contains("identity"), "{line}");
    assert!(r.stdout.lines().any(|l| l == "pitch 15x15"));
    let total: u64 = line.rsplit(' ').next().unwrap().parse().unwrap();
    let block = r.stdout.lines().find_map(|l| l.strip_prefix("frame 0 block 0 bytes ")).unwrap();
    assert_eq!(block.parse::<u64>().unwrap(), total);
}

#[test]
fn cli_output_matches_library() {
    let dir = tempfile::tempdir().unwrap();
    let stack = sample(3);
    let raw = dir.path().join("in.raw");
    write_raw_stack(&raw, &stack).unwrap();
    for (flags, opts) in [
        (vec![], CompressOptions::default()),
        (vec!["--predictor", "6"], CompressOptions::forced(PredictorSpec::intra(6).unwrap())),
        (vec!["--predictor", "9,temporal"], CompressOptions::forced(PredictorSpec::new(9, true).unwrap())),
        (
            vec!["--temporal", "on", "--block-size", "4096"],
            CompressOptions::default().with_temporal(true).with_block_size(4096),
        ),
    ] {
        let packed = dir.path().join("out.pcbz");
        let mut args = vec!["compress", s(&raw), "-o", s(&packed)];
        args.extend(flags.iter().copied());
        let r = pcbz(&args);
        assert_eq!(r.code, EXIT_OK, "{flags:?}: {}", r.stderr);
        let expected = compress_stack(&stack, &opts).unwrap();
        assert_eq!(std::fs::read(&packed).unwrap(), expected, "{flags:?}");

        let back = dir.path().join("back.raw");
        assert_eq!(pcbz(&["decompress", s(&packed), "-o", s(&back)]).code, EXIT_OK);
        assert_eq!(read_raw_stack(&back).unwrap(), decompress_stack(&expected, 1).unwrap());
    }
}

#[test]
fn thread_count_never_changes_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_pgm(dir.path(), "in.pgm", 2);
    let mut outputs = Vec::new();
    for threads in ["1", "3", "8"] {
        let packed = dir.path().join(format!("t{threads}.pcbz"));
        let r = pcbz(&[
            "compress",
            s(&input),
            "-o",
            s(&packed),
            "--pitch",
            "15x15",
            "--threads",
            threads,
            "--block-size",
            "512",
        ]);
        assert_eq!(r.code, EXIT_OK, "{}", r.stderr);
        outputs.push(std::fs::read(&packed).unwrap());
    }
    assert!(outputs.windows(2).all(|w| w[0] == w[1]));
}

#[test]
fn gen_writes_what_the_generator_returns() {
    let dir = tempfile::tempdir().unwrap();
    let raw = dir.path().join("beads.raw");
    let r = pcbz(&[
        "gen",
        "-o",
        s(&raw),
        "--modes",
        "beads",
        "--seed",
        "7",
        "--size",
        "40x30",
        "--pitch",
        "5x6",
        "--frames",
        "2",
        "--noise-sigma",
        "50",
    ]);
    assert_eq!(r.code, EXIT_OK, "{}", r.stderr);
    let expected = generate(&SynthParams {
        mode: SynthMode::Beads,
        seed: 7,
        width: 40,
        height: 30,
        pitch_x: 5,
        pitch_y: 6,
        frames: 2,
        noise_sigma: 50.0,
        ..SynthParams::default()
    })
    .unwrap();
    assert_eq!(read_raw_stack(&raw).unwrap(), expected);
    assert!(sidecar_path(&raw).exists());
}

fn parse_csv(text: &str) -> Vec<Vec<String>> {
    text.lines().skip(1).map(|l| l.split(',').map(str::to_string).collect()).collect()
}

#[test]
fn bench_csv_trend_for_selected_predictor() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("sweep.csv");
    let r = pcbz(&[
        "bench",
        "--modes",
        "smooth_lenslet",
        "--sweep-noise",
        "0,50,200,800",
        "--size",
        "150x150",
        "--csv",
        s(&csv),
    ]);
    assert_eq!(r.code, EXIT_OK, "{}", r.stderr);
    assert_eq!(r.stdout.lines().count(), 4);

    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().next().unwrap(), pcbz::bench::CSV_HEADER);
    let rows = parse_csv(&text);
    assert_eq!(rows.len(), 4 * 13);
    let selected: Vec<(f64, f64)> =
        rows.iter().filter(|r| r[10] == "1").map(|r| (r[2].parse().unwrap(), r[6].parse().unwrap())).collect();
    assert_eq!(selected.len(), 4);
    for w in selected.windows(2) {
        assert!(w[0].0 < w[1].0);
        assert!(w[0].1 <= w[1].1, "bits/dim decreased: {selected:?}");
    }
}

#[test]
fn bench_without_csv_prints_csv() {
    let r = pcbz(&[
        "bench",
        "--modes",
        "beads",
        "--sweep-noise",
        "200",
        "--size",
        "40x40",
        "--pitch",
        "8x8",
        "--threads",
        "1",
    ]);
    assert_eq!(r.code, EXIT_OK, "{}", r.stderr);
    assert!(r.stdout.starts_with(pcbz::bench::CSV_HEADER));
    assert_eq!(parse_csv(&r.stdout).len(), 13);
}

#[test]
fn usage_errors_exit_1() {
    for args in [
        vec![],
        vec!["frobnicate"],
        vec!["compress", "a.pgm"],
        vec!["compress", "a.pgm", "-i", "b.pgm", "-o", "x.pcbz"],
        vec!["compress", "a.pgm", "-o", "x.pcbz", "--predictor", "13"],
        vec!["compress", "a.pgm", "-o", "x.pcbz", "--temporal", "maybe"],
        vec!["compress", "a.pgm", "-o", "x.pcbz", "--pitch", "0x4"],
        vec!["decompress", "a.pcbz", "-i", "b.pcbz", "-o", "x.pgm"],
    ] {
        let r = pcbz(&args);
        assert_eq!(r.code, EXIT_USAGE, "{args:?}");
        assert!(!r.stderr.is_empty(), "{args:?}");
        assert!(r.stdout.is_empty(), "{args:?}");
    }
}

#[test]
fn semantic_usage_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_pgm(dir.path(), "in.pgm", 1);
    let out = dir.path().join("x.pcbz");
    let cases: [&[&str]; 3] = [
        &["compress", s(&input), "-o", s(&out)],
        &["compress", s(&input), "-o", s(&out), "--pitch", "15x15", "--threads", "0"],
        &["compress", s(&input), "-o", s(&out), "--pitch", "15x15", "--predictor", "3,temporal", "--temporal", "off"],
    ];
    for args in cases {
        let r = pcbz(args);
        assert_eq!(r.code, EXIT_USAGE, "{args:?}: {}", r.stderr);
        assert!(r.stderr.starts_with("pcbz: "));
    }
    assert!(!out.exists());
}

#[test]
fn io_and_format_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.pcbz");

    let missing = dir.path().join("missing.pgm");
    assert_eq!(pcbz(&["compress", s(&missing), "-o", s(&out), "--pitch", "3x3"]).code, EXIT_IO);

    let eight_bit = dir.path().join("eight.pgm");
    std::fs::write(&eight_bit, b"P5\n2 2\n255\n\x01\x02\x03\x04").unwrap();
    let r = pcbz(&["compress", s(&eight_bit), "-o", s(&out), "--pitch", "1x1"]);
    assert_eq!(r.code, EXIT_IO);
    assert!(r.stderr.contains("65535"), "{}", r.stderr);

    let tiff = dir.path().join("frame.tif");
    std::fs::write(&tiff, b"II*\0").unwrap();
    assert_eq!(pcbz(&["compress", s(&tiff), "-o", s(&out)]).code, EXIT_IO);

    // Sidecar claims three frames, raw file holds two.
    let raw = dir.path().join("short.raw");
    write_raw_stack(&raw, &sample(2)).unwrap();
    let meta = std::fs::read_to_string(sidecar_path(&raw)).unwrap().replace("frames=2", "frames=3");
    std::fs::write(sidecar_path(&raw), meta).unwrap();
    let r = pcbz(&["compress", s(&raw), "-o", s(&out)]);
    assert_eq!(r.code, EXIT_IO, "{}", r.stderr);

    assert_eq!(pcbz(&["inspect", s(&missing)]).code, EXIT_IO);
}

#[test]
fn corruption_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_pgm(dir.path(), "in.pgm", 2);
    let packed = dir.path().join("ok.pcbz");
    assert_eq!(pcbz(&["compress", s(&input), "-o", s(&packed), "--pitch", "15x15"]).code, EXIT_OK);
    let good = std::fs::read(&packed).unwrap();
    let back = dir.path().join("back.pgm");

    let mut damaged: Vec<(String, Vec<u8>)> = Vec::new();
    damaged.push(("truncated".into(), good[..good.len() - 10].to_vec()));
    let mut flipped = good.clone();
    let last = flipped.len() - 40;
    flipped[last] ^= 0xff;
    damaged.push(("flipped payload byte".into(), flipped));
    let mut trailing = good.clone();
    trailing.extend_from_slice(b"junk");
    damaged.push(("trailing bytes".into(), trailing));

    for (what, bytes) in damaged {
        let bad = dir.path().join("bad.pcbz");
        std::fs::write(&bad, &bytes).unwrap();
        let r = pcbz(&["decompress", s(&bad), "-o", s(&back)]);
        assert_eq!(r.code, EXIT_CORRUPT, "{what}: {}", r.stderr);
        assert!(!r.stderr.is_empty());
    }
    // Block size field and the first record's block count.
    let mut header = good.clone();
    header[24] = 0xff;
    header[25] = 0xff;
    header[26] = 0xff;
    header[27] = 0xff;
    header[32] = 13;
    std::fs::write(dir.path().join("bad.pcbz"), &header).unwrap();
    assert_eq!(pcbz(&["inspect", s(&dir.path().join("bad.pcbz"))]).code, EXIT_CORRUPT);
}

#[test]
fn foreign_or_future_files_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let stack = sample(1);
    let good = compress_stack(&stack, &CompressOptions::default()).unwrap();
    let back = dir.path().join("back.pgm");
    let path = dir.path().join("x.pcbz");

    let mut magic = good.clone();
    magic[0] = b'X';
    std::fs::write(&path, &magic).unwrap();
    assert_eq!(pcbz(&["decompress", s(&path), "-o", s(&back)]).code, EXIT_IO);

    let mut version = good;
    version[4] = 9;
    std::fs::write(&path, &version).unwrap();
    let r = pcbz(&["inspect", s(&path)]);
    assert_eq!(r.code, EXIT_IO);
    assert!(r.stderr.contains('9'), "{}", r.stderr);
}

#[test]
fn payload_blocks_are_plain_bzip2_streams() {
    use std::io::Read;

    let stack = sample(2);
    let bytes =
        compress_stack(&stack, &CompressOptions::forced(PredictorSpec::IDENTITY).with_block_size(3000)).unwrap();
    let c = read_container(&bytes).unwrap();
    let mut joined = Vec::new();
    for blocks in &c.payloads {
        for block in blocks {
            assert_eq!(&block[..3], b"BZh");
            let mut out = Vec::new();
            bzip2::read::BzDecoder::new(*block).read_to_end(&mut out).unwrap();
            joined.extend(out);
        }
    }
    // Identity residual is the big-endian sample stream.
    let expected: Vec<u8> =
        stack.frames().iter().flat_map(|f| f.samples().iter().flat_map(|v| v.to_be_bytes())).collect();
    assert_eq!(joined, expected);

    // The reference bzip2 tool, when installed, agrees.
    let Ok(mut child) = Command::new("bzip2")
        .args(["-d", "-c"])
        .stdin(std::process::Stdio::piped())
        .stdout(std::process::Stdio::piped())
        .spawn()
    else {
        return;
    };
    let block = c.payloads[1][0].to_vec();
    let mut stdin = child.stdin.take().unwrap();
    let writer = std::thread::spawn(move || std::io::Write::write_all(&mut stdin, &block));
    let output = child.wait_with_output().unwrap();
    writer.join().unwrap().unwrap();
    assert!(output.status.success());
    let frame_bytes = stack.frames()[1].pixel_count() * 2;
    assert_eq!(output.stdout, expected[frame_bytes..frame_bytes + 3000]);
}
