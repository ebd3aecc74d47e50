//! Problem files: a line-oriented sectioned format.
//!
//! ```text
//! # comment
//! vars: x1 x2 x3
//! guard: none | <poly> | template: <poly>; <poly>
//! initial: none | <rat> <rat> ...
//! invariants:
//!   <poly>
//! branch:
//!   x1 <- { <poly>, <poly> }     (template)
//!   x1 := <poly>                 (concrete loop, for `check`)
//! mode: general | universal | universal-linear
//! ```

use std::fmt;
use std::path::Path;

use loopforge_core::ring::{parse_poly, PolyMap, Polynomial, Rational, VarContext};
use loopforge_core::synth::{ConcreteLoop, Guard, LoopTemplate, SynthesisProblem};
use thiserror::Error;

#[derive(Debug, Error)]
#[error("{path}:{line}: {msg}")]
pub struct ProblemError {
    pub path: String,
    pub line: usize,
    pub msg: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mode {
    #[default]
    General,
    Universal,
    UniversalLinear,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::General => "general",
            Mode::Universal => "universal",
            Mode::UniversalLinear => "universal-linear",
        })
    }
}

#[derive(Debug, Clone)]
pub enum Body {
    Template(LoopTemplate),
    Concrete(Vec<PolyMap>),
}

#[derive(Debug, Clone)]
pub struct Problem {
    pub name: String,
    pub ctx: VarContext,
    pub guard: Guard,
    pub initial: Option<Vec<Rational>>,
    pub invariants: Vec<Polynomial>,
    pub body: Body,
    pub mode: Mode,
}

/// `n, m, d, D, l` as in the benchmark tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Shape {
    pub n: usize,
    pub m: usize,
    pub d: u32,
    pub big_d: u32,
    pub l: usize,
}

impl Problem {
    pub fn template(&self) -> Option<&LoopTemplate> {
        match &self.body {
            Body::Template(t) => Some(t),
            Body::Concrete(_) => None,
        }
    }

    pub fn shape(&self) -> Shape {
        let (big_d, l) = match &self.body {
            Body::Template(t) => (t.degree(), t.generator_count()),
            Body::Concrete(maps) => (
                maps.iter().flat_map(|m| m.components()).filter_map(|c| c.total_degree()).max().unwrap_or(0),
                0,
            ),
        };
        Shape {
            n: self.ctx.len(),
            m: self.invariants.len(),
            d: self.invariants.iter().filter_map(|g| g.total_degree()).max().unwrap_or(0),
            big_d,
            l,
        }
    }

    pub fn synthesis_problem(&self) -> Result<SynthesisProblem, String> {
        let t = self.template().ok_or("the file gives a concrete loop, not a template")?;
        SynthesisProblem::new(self.invariants.clone(), t.clone(), self.guard.clone(), self.initial.clone())
            .map_err(|e| e.to_string())
    }

    pub fn concrete_loop(&self) -> Result<ConcreteLoop, String> {
        let Body::Concrete(maps) = &self.body else {
            return Err("the file gives a template, not a concrete loop".into());
        };
        let guard = match &self.guard {
            Guard::Always => Polynomial::one(&self.ctx),
            Guard::Poly(h) => h.clone(),
            Guard::Template(_) => return Err("a concrete loop needs a concrete guard".into()),
        };
        ConcreteLoop::new(&self.ctx, self.initial.clone(), guard, maps.clone()).map_err(|e| e.to_string())
    }
}

pub fn load(path: &Path) -> Result<Problem, ProblemError> {
    let text = std::fs::read_to_string(path).map_err(|e| ProblemError {
        path: path.display().to_string(),
        line: 0,
        msg: e.to_string(),
    })?;
    let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    parse(&text, &name, &path.display().to_string())
}

enum Section {
    None,
    Invariants,
    Branch,
}

enum Line {
    Template(Vec<Polynomial>),
    Assign(Polynomial),
}

pub fn parse(text: &str, name: &str, path: &str) -> Result<Problem, ProblemError> {
    let err = |line: usize, msg: String| ProblemError { path: path.to_string(), line, msg };
    let mut ctx: Option<VarContext> = None;
    let mut guard_text: Option<(usize, String)> = None;
    let mut initial_text: Option<(usize, String)> = None;
    let mut invariants = Vec::new();
    let mut branches: Vec<(usize, Vec<Option<Line>>)> = Vec::new();
    let mut mode = Mode::General;
    let mut section = Section::None;

    for (k, raw) in text.lines().enumerate() {
        let ln = k + 1;
        let line = raw.split('#').next().unwrap_or("");
        if line.trim().is_empty() {
            continue;
        }
        let indented = line.starts_with(' ') || line.starts_with('\t');
        let body = line.trim();
        if indented {
            let ctx = ctx.as_ref().ok_or_else(|| err(ln, "`vars:` must come first".into()))?;
            match section {
                Section::Invariants => {
                    invariants.push(parse_poly(body, ctx).map_err(|e| err(ln, e.to_string()))?);
                }
                Section::Branch => {
                    let (var, rhs, is_template) = if let Some((v, r)) = body.split_once("<-") {
                        (v.trim(), r.trim(), true)
                    } else if let Some((v, r)) = body.split_once(":=") {
                        (v.trim(), r.trim(), false)
                    } else {
                        return Err(err(ln, format!("expected `xj <- {{ … }}` or `xj := …`, found `{body}`")));
                    };
                    let j = ctx.index_of(var).ok_or_else(|| err(ln, format!("unknown variable `{var}`")))?;
                    let parsed = if is_template {
                        let inner = rhs
                            .strip_prefix('{')
                            .and_then(|r| r.strip_suffix('}'))
                            .ok_or_else(|| err(ln, "generators must be enclosed in `{ }`".into()))?;
                        let gens = inner
                            .split(',')
                            .map(str::trim)
                            .filter(|s| !s.is_empty())
                            .map(|s| parse_poly(s, ctx).map_err(|e| err(ln, e.to_string())))
                            .collect::<Result<Vec<_>, _>>()?;
                        Line::Template(gens)
                    } else {
                        Line::Assign(parse_poly(rhs, ctx).map_err(|e| err(ln, e.to_string()))?)
                    };
                    let (_, slots) = branches.last_mut().unwrap();
                    if slots[j].is_some() {
                        return Err(err(ln, format!("variable `{var}` updated twice in one branch")));
                    }
                    slots[j] = Some(parsed);
                }
                Section::None => return Err(err(ln, "indented line outside a section".into())),
            }
            continue;
        }
        let (key, value) = body.split_once(':').ok_or_else(|| err(ln, format!("expected `key: value`, found `{body}`")))?;
        let value = value.trim();
        section = Section::None;
        match key.trim() {
            "vars" => {
                if ctx.is_some() {
                    return Err(err(ln, "`vars:` given twice".into()));
                }
                let names: Vec<&str> = value.split_whitespace().collect();
                if names.is_empty() {
                    return Err(err(ln, "no variables".into()));
                }
                ctx = Some(VarContext::program(names).map_err(|e| err(ln, e.to_string()))?);
            }
            "guard" => guard_text = Some((ln, value.to_string())),
            "initial" => initial_text = Some((ln, value.to_string())),
            "invariants" => {
                section = Section::Invariants;
                if !value.is_empty() {
                    return Err(err(ln, "invariants go on the following indented lines".into()));
                }
            }
            "branch" => {
                let n = ctx.as_ref().ok_or_else(|| err(ln, "`vars:` must come first".into()))?.len();
                branches.push((ln, (0..n).map(|_| None).collect()));
                section = Section::Branch;
            }
            "mode" => {
                mode = match value {
                    "general" => Mode::General,
                    "universal" => Mode::Universal,
                    "universal-linear" => Mode::UniversalLinear,
                    other => return Err(err(ln, format!("unknown mode `{other}`"))),
                }
            }
            other => return Err(err(ln, format!("unknown key `{other}`"))),
        }
    }

    let ctx = ctx.ok_or_else(|| err(0, "missing `vars:`".into()))?;
    if invariants.is_empty() {
        return Err(err(0, "no invariants".into()));
    }
    if branches.is_empty() {
        return Err(err(0, "no `branch:` section".into()));
    }

    let guard = match guard_text {
        None => Guard::Always,
        Some((_, t)) if t == "none" => Guard::Always,
        Some((ln, t)) => match t.strip_prefix("template:") {
            Some(list) => Guard::Template(
                list.split(';')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(|s| parse_poly(s, &ctx).map_err(|e| err(ln, e.to_string())))
                    .collect::<Result<_, _>>()?,
            ),
            None => Guard::Poly(parse_poly(&t, &ctx).map_err(|e| err(ln, e.to_string()))?),
        },
    };

    let initial = match initial_text {
        None => None,
        Some((_, t)) if t == "none" => None,
        Some((ln, t)) => {
            let empty = VarContext::program(Vec::<String>::new()).map_err(|e| err(ln, e.to_string()))?;
            let vals = t
                .split_whitespace()
                .map(|s| {
                    parse_poly(s, &empty)
                        .map(|p| p.constant_term())
                        .map_err(|e| err(ln, format!("bad rational `{s}`: {e}")))
                })
                .collect::<Result<Vec<_>, _>>()?;
            if vals.len() != ctx.len() {
                return Err(err(ln, format!("{} initial values for {} variables", vals.len(), ctx.len())));
            }
            Some(vals)
        }
    };

    let concrete = branches.iter().flat_map(|(_, s)| s.iter().flatten()).any(|l| matches!(l, Line::Assign(_)));
    let body = if concrete {
        let mut maps = Vec::new();
        for (ln, slots) in branches {
            let mut comps = Vec::new();
            for (j, slot) in slots.into_iter().enumerate() {
                match slot {
                    Some(Line::Assign(p)) => comps.push(p),
                    None => comps.push(Polynomial::var(&ctx, j)),
                    Some(Line::Template(_)) => return Err(err(ln, "branch mixes `<-` and `:=`".into())),
                }
            }
            maps.push(PolyMap::new(&ctx, comps).map_err(|e| err(ln, e.to_string()))?);
        }
        Body::Concrete(maps)
    } else {
        let mut tb = Vec::new();
        let first = branches[0].0;
        for (ln, slots) in branches {
            let mut per_var = Vec::new();
            for (j, slot) in slots.into_iter().enumerate() {
                match slot {
                    Some(Line::Template(g)) => per_var.push(g),
                    _ => return Err(err(ln, format!("no template line for `{}`", ctx.name(j)))),
                }
            }
            tb.push(per_var);
        }
        Body::Template(LoopTemplate::new(&ctx, tb).map_err(|e| err(first, e.to_string()))?)
    };

    Ok(Problem { name: name.to_string(), ctx, guard, initial, invariants, body, mode })
}
