#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::Command;

use darksol::io::Table;
use serde_json::Value;

pub struct Output {
    pub code: i32,
    pub stderr: String,
    pub out: PathBuf,
}

/// Writes `config` next to `out` and runs one subcommand on it.
pub fn run(dir: &Path, name: &str, command: &str, config: &str, extra: &[&str]) -> Output {
    let cfg = dir.join(format!("{name}.toml"));
    std::fs::write(&cfg, config).unwrap();
    let out = dir.join(name);
    let o = Command::new(env!("CARGO_BIN_EXE_darksol"))
        .arg(command)
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .args(extra)
        .output()
        .unwrap();
    Output {
        code: o.status.code().unwrap_or(-1),
        stderr: String::from_utf8_lossy(&o.stderr).into_owned(),
        out,
    }
}

pub fn cubic(lambda: f64, n: usize, expr: &str, extra: &str) -> String {
    format!(
        "[model]\nkind = \"cubic\"\nlambda = {lambda:?}\nn_per_period = {n}\n\n[coefficient]\nexpr = \"{expr}\"\n{extra}\n"
    )
}

pub fn quintic(lambda: f64, g1: f64, n: usize, expr: &str, extra: &str) -> String {
    format!(
        "[model]\nkind = \"cubic-quintic\"\nlambda = {lambda:?}\ng1 = {g1:?}\nn_per_period = {n}\n\n[coefficient]\nexpr = \"{expr}\"\n{extra}\n"
    )
}

pub fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

pub fn table(path: &Path) -> Table {
    Table::read(path).unwrap()
}

pub fn f(v: &Value) -> f64 {
    v.as_f64().unwrap_or(f64::NAN)
}

/// Classical RK4 for a scalar autonomous ODE, sampled every `every` steps.
pub fn rk4(rhs: impl Fn(f64) -> f64, y0: f64, step: f64, steps: usize, every: usize) -> Vec<f64> {
    let mut out = vec![y0];
    let mut y = y0;
    for s in 1..=steps {
        let k1 = rhs(y);
        let k2 = rhs(y + 0.5 * step * k1);
        let k3 = rhs(y + 0.5 * step * k2);
        let k4 = rhs(y + step * k3);
        y += step / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if s % every == 0 {
            out.push(y);
        }
    }
    out
}
