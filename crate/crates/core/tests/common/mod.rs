#![allow(dead_code)]

use std::path::Path;
use std::process::{Command, Output};

use voicebench::audio::{write_wav, AudioBuffer, WavEncoding};
use voicebench::simulate::SimRng;

pub fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_voicebench"));
    c.env_remove("VOICEBENCH_WORKERS").env("RUST_LOG", "info");
    c
}

pub fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

pub fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

pub fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

pub fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

pub fn noise(n: usize, seed: u64, scale: f64) -> Vec<f64> {
    let mut r = SimRng::new(seed);
    (0..n).map(|_| scale * r.gaussian()).collect()
}

pub fn sine(freq: f64, amp: f64, fs: u32, seconds: f64) -> Vec<f64> {
    let n = (fs as f64 * seconds) as usize;
    (0..n)
        .map(|i| amp * (2.0 * std::f64::consts::PI * freq * i as f64 / fs as f64).sin())
        .collect()
}

pub fn put(path: &Path, samples: Vec<f64>, fs: u32) {
    std::fs::create_dir_all(path.parent().unwrap()).unwrap();
    write_wav(
        &AudioBuffer::mono(samples, fs).unwrap(),
        path,
        WavEncoding::Float32,
    )
    .unwrap();
}

/// Speech-like test signal: noise bursts under a slow envelope.
pub fn babble(n: usize, seed: u64, fs: u32) -> Vec<f64> {
    let env_hz = 3.0 + (seed % 5) as f64;
    noise(n, seed, 0.1)
        .into_iter()
        .enumerate()
        .map(|(i, v)| {
            v * (0.2
                + (2.0 * std::f64::consts::PI * env_hz * i as f64 / fs as f64)
                    .sin()
                    .abs())
        })
        .collect()
}

/// Corpus with `speakers` speaker directories of two utterances each, plus noise.
pub fn corpus(root: &Path, speakers: usize, fs: u32) {
    for s in 0..speakers {
        for u in 0..2 {
            let seed = (s * 10 + u) as u64;
            put(
                &root.join(format!("speech/spk{s}/utt{u}.wav")),
                babble(fs as usize + 800 * u, seed, fs),
                fs,
            );
        }
    }
    put(
        &root.join("noise/hum.wav"),
        noise(fs as usize / 2, 99, 0.05),
        fs,
    );
    put(
        &root.join("noise/hiss.wav"),
        noise(fs as usize * 2, 98, 0.02),
        fs,
    );
}
