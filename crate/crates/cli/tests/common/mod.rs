#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

/// Runs the built binary with `FUNROOT_OUT` cleared unless given.
pub fn funroot(args: &[&str], out_env: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_funroot"));
    cmd.args(args).env_remove("FUNROOT_OUT");
    if let Some(p) = out_env {
        cmd.env("FUNROOT_OUT", p);
    }
    cmd.output().expect("binary runs")
}

pub fn json(out: &Output) -> serde_json::Value {
    assert!(
        out.status.success(),
        "exit {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("report is JSON")
}

pub fn column(path: &Path) -> Vec<f64> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .filter(|l| !l.trim().is_empty())
        .map(|l| l.split(',').next().unwrap().trim().parse().unwrap())
        .collect()
}

/// Dickey–Fuller τ without deterministic terms from the normal equations
/// `XᵀX β = Xᵀy`, solved by Gauss–Jordan elimination with partial pivoting.
pub fn normal_equations_tau(y: &[f64], lags: usize) -> f64 {
    let dy: Vec<f64> = y.windows(2).map(|w| w[1] - w[0]).collect();
    let mut rows = Vec::new();
    let mut target = Vec::new();
    for t in lags..dy.len() {
        let mut r = vec![y[t]];
        for j in 1..=lags {
            r.push(dy[t - j]);
        }
        rows.push(r);
        target.push(dy[t]);
    }
    let k = rows[0].len();
    let n = rows.len();
    let mut m = vec![vec![0.0; 2 * k + 1]; k];
    for i in 0..k {
        for j in 0..k {
            m[i][j] = rows.iter().map(|r| r[i] * r[j]).sum();
        }
        m[i][k] = rows.iter().zip(&target).map(|(r, t)| r[i] * t).sum();
        m[i][k + 1 + i] = 1.0;
    }
    for c in 0..k {
        let p = (c..k).max_by(|&a, &b| m[a][c].abs().partial_cmp(&m[b][c].abs()).unwrap()).unwrap();
        m.swap(c, p);
        let piv = m[c][c];
        for v in m[c].iter_mut() {
            *v /= piv;
        }
        for r in 0..k {
            if r != c {
                let f = m[r][c];
                let pivot_row = m[c].clone();
                for (v, pv) in m[r].iter_mut().zip(pivot_row) {
                    *v -= f * pv;
                }
            }
        }
    }
    let beta: Vec<f64> = (0..k).map(|i| m[i][k]).collect();
    let rss: f64 = rows
        .iter()
        .zip(&target)
        .map(|(r, t)| {
            let fit: f64 = r.iter().zip(&beta).map(|(a, b)| a * b).sum();
            (t - fit).powi(2)
        })
        .sum();
    let s2 = rss / (n - k) as f64;
    beta[0] / (s2 * m[0][k + 1]).sqrt()
}
