//! Helpers shared by the CLI test suites: binary invocation and CSV parsing.
//! Each suite compiles this module on its own, so not every helper is used
//! by every binary.
#![allow(dead_code)]

use std::process::{Command, Output};

pub struct RunResult {
    pub status: Option<i32>,
    pub stdout: Vec<u8>,
    pub stderr: String,
}

impl RunResult {
    pub fn stdout_text(&self) -> String {
        String::from_utf8(self.stdout.clone()).expect("stdout is UTF-8")
    }

    pub fn assert_success(&self) -> &Self {
        assert_eq!(
            self.status,
            Some(0),
            "command failed with {:?}: {}",
            self.status,
            self.stderr
        );
        self
    }
}

pub fn run_bloch(args: &[&str], envs: &[(&str, &str)]) -> RunResult {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_bloch"));
    cmd.args(args);
    for (k, v) in envs {
        cmd.env(k, v);
    }
    let Output {
        status,
        stdout,
        stderr,
    } = cmd.output().expect("binary runs");
    RunResult {
        status: status.code(),
        stdout,
        stderr: String::from_utf8_lossy(&stderr).into_owned(),
    }
}

pub struct Csv {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

pub fn parse_csv(text: &str) -> Csv {
    let mut lines = text.lines();
    let header = lines
        .next()
        .expect("csv has a header")
        .split(',')
        .map(str::to_owned)
        .collect();
    let rows = lines
        .filter(|l| !l.is_empty())
        .map(|l| {
            l.split(',')
                .map(|cell| cell.parse::<f64>().expect("numeric cell"))
                .collect()
        })
        .collect();
    Csv { header, rows }
}
