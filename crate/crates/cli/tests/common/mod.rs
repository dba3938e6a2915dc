#![allow(dead_code)]

use std::path::PathBuf;

pub fn data(name: &str) -> String {
    path("data", name)
}

pub fn golden(name: &str) -> String {
    std::fs::read_to_string(path("golden", name)).expect("golden file")
}

fn path(dir: &str, name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "tests", dir, name].iter().collect();
    p.to_string_lossy().into_owned()
}

pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

pub fn superlin(args: &[&str]) -> Outcome {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("superlin").chain(args.iter().copied());
    let code = superlin_cli::run(argv, &mut out, &mut err);
    Outcome {
        code,
        stdout: String::from_utf8(out).expect("utf8 stdout"),
        stderr: String::from_utf8(err).expect("utf8 stderr"),
    }
}
