//! Batch runs over a directory of problem files.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::Serialize;

use crate::pipeline::{run, GenStatus, Outcome, Settings, Status};
use crate::problem::load;

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct Row {
    pub name: String,
    pub mode: String,
    pub n: usize,
    pub m: usize,
    pub d: u32,
    #[serde(rename = "D")]
    pub big_d: u32,
    pub l: usize,
    pub gen_time: f64,
    pub gen_status: String,
    pub s: Option<usize>,
    pub finiteness: Option<String>,
    pub status: String,
    pub solver_time: Option<f64>,
    pub verdict: String,
    pub note: Option<String>,
}

impl Row {
    pub fn from_outcome(name: &str, o: &Outcome) -> Row {
        let (gen_status, gen_note) = match &o.gen_status {
            GenStatus::Ok => ("ok".to_string(), None),
            GenStatus::TimeLimit => ("TL".to_string(), None),
            GenStatus::Failed(e) => ("error".to_string(), Some(e.clone())),
        };
        Row {
            name: name.to_string(),
            mode: o.mode.to_string(),
            n: o.shape.n,
            m: o.shape.m,
            d: o.shape.d,
            big_d: o.shape.big_d,
            l: o.shape.l,
            gen_time: o.gen_time.as_secs_f64(),
            gen_status,
            s: o.system.as_ref().map(|s| s.len()),
            finiteness: o.finiteness.as_ref().map(|f| f.to_string()),
            status: o.status.map_or("-", Status::label).to_string(),
            solver_time: o.solver_time.map(|t| t.as_secs_f64()),
            verdict: o.verdict().to_string(),
            note: o.note.clone().or(gen_note),
        }
    }

    fn failed(name: &str, msg: String) -> Row {
        Row {
            name: name.to_string(),
            mode: "-".into(),
            n: 0,
            m: 0,
            d: 0,
            big_d: 0,
            l: 0,
            gen_time: 0.0,
            gen_status: "error".into(),
            s: None,
            finiteness: None,
            status: Status::Error.label().into(),
            solver_time: None,
            verdict: "-".into(),
            note: Some(msg),
        }
    }
}

/// `*.loop` files directly under `dir`, sorted by name.
pub fn problem_files(dir: &Path) -> std::io::Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "loop"))
        .collect();
    files.sort();
    Ok(files)
}

/// Runs every file on `jobs` worker threads; rows come back in file order.
pub fn run_all(files: &[PathBuf], settings: &Settings, jobs: usize) -> Vec<Row> {
    let next = AtomicUsize::new(0);
    let rows: Mutex<Vec<Option<Row>>> = Mutex::new(vec![None; files.len()]);
    std::thread::scope(|s| {
        for _ in 0..jobs.max(1).min(files.len().max(1)) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some(path) = files.get(i) else { break };
                let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
                let row = match load(path) {
                    Ok(p) => Row::from_outcome(&name, &run(&p, settings)),
                    Err(e) => Row::failed(&name, e.to_string()),
                };
                rows.lock().unwrap()[i] = Some(row);
            });
        }
    });
    rows.into_inner().unwrap().into_iter().flatten().collect()
}

pub fn write_jsonl(rows: &[Row], out: &mut impl Write) -> std::io::Result<()> {
    for r in rows {
        serde_json::to_writer(&mut *out, r)?;
        writeln!(out)?;
    }
    Ok(())
}

fn secs(t: Option<f64>) -> String {
    t.map_or("-".into(), |t| format!("{t:.2}"))
}

pub fn table(rows: &[Row]) -> String {
    let header = ["name", "mode", "n", "m", "d", "D", "l", "gen(s)", "s", "finite", "status", "solve(s)", "verify"];
    let mut cells: Vec<Vec<String>> = vec![header.iter().map(|h| h.to_string()).collect()];
    for r in rows {
        let gen = if r.gen_status == "ok" { secs(Some(r.gen_time)) } else { r.gen_status.clone() };
        cells.push(vec![
            r.name.clone(),
            r.mode.clone(),
            r.n.to_string(),
            r.m.to_string(),
            r.d.to_string(),
            r.big_d.to_string(),
            r.l.to_string(),
            gen,
            r.s.map_or("-".into(), |s| s.to_string()),
            r.finiteness.clone().unwrap_or("-".into()),
            r.status.clone(),
            secs(r.solver_time),
            r.verdict.clone(),
        ]);
    }
    let widths: Vec<usize> = (0..header.len()).map(|c| cells.iter().map(|r| r[c].len()).max().unwrap()).collect();
    let mut s = String::new();
    for row in &cells {
        let line: Vec<String> = row.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect();
        s.push_str(line.join("  ").trim_end());
        s.push('\n');
    }
    s
}
