//! Plain-text epigraph SDP instances (`irs-sop-sdp v1`).
//!
//! ```text
//! irs-sop-sdp v1
//! dim <n>
//! constraints <K>
//! offsets <a_0> … <a_{K-1}>
//! constraint <k>
//! <n lines of 2n numbers: re im re im …>
//! ```
//!
//! One `constraint` block per `k` in order. Numbers are written in shortest
//! round-trip form, so dump then load is exact. `#` lines are comments.

use std::fmt::Write as _;
use std::path::Path;

use irs_sop::sdp::SdpInstance;
use irs_sop::{CMatrix, C64};

use crate::error::CliError;

pub const MAGIC: &str = "irs-sop-sdp v1";

pub fn to_text(inst: &SdpInstance) -> String {
    let (n, k) = (inst.dim(), inst.constraints());
    let mut s = String::new();
    let _ = writeln!(s, "{MAGIC}\ndim {n}\nconstraints {k}");
    let offsets: Vec<String> = (0..k).map(|j| format!("{:?}", inst.a(j))).collect();
    let _ = writeln!(s, "offsets {}", offsets.join(" "));
    for j in 0..k {
        let _ = writeln!(s, "constraint {j}");
        let c = inst.c(j);
        for r in 0..n {
            let row: Vec<String> = c
                .row(r)
                .iter()
                .flat_map(|z| [format!("{:?}", z.re), format!("{:?}", z.im)])
                .collect();
            let _ = writeln!(s, "{}", row.join(" "));
        }
    }
    s
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    path: &'a Path,
    line: usize,
}

impl<'a> Lines<'a> {
    fn err(&self, message: impl Into<String>) -> CliError {
        CliError::Parse {
            path: self.path.to_path_buf(),
            line: self.line,
            message: message.into(),
        }
    }

    fn next(&mut self) -> Result<&'a str, CliError> {
        for (i, raw) in self.inner.by_ref() {
            self.line = i + 1;
            let t = raw.trim();
            if !t.is_empty() && !t.starts_with('#') {
                return Ok(t);
            }
        }
        self.line += 1;
        Err(self.err("unexpected end of file"))
    }

    /// The numbers after `keyword` on the next line.
    fn keyed(&mut self, keyword: &str) -> Result<Vec<&'a str>, CliError> {
        let line = self.next()?;
        let mut parts = line.split_whitespace();
        if parts.next() != Some(keyword) {
            return Err(self.err(format!("expected `{keyword}`, got {line:?}")));
        }
        Ok(parts.collect())
    }

    fn count(&mut self, keyword: &str) -> Result<usize, CliError> {
        match self.keyed(keyword)?.as_slice() {
            [v] => v.parse().map_err(|_| self.err(format!("{keyword}: bad count {v:?}"))),
            other => Err(self.err(format!("{keyword}: expected one value, got {}", other.len()))),
        }
    }

    fn floats(&self, words: &[&str], want: usize) -> Result<Vec<f64>, CliError> {
        if words.len() != want {
            return Err(self.err(format!("expected {want} numbers, got {}", words.len())));
        }
        words
            .iter()
            .map(|w| w.parse::<f64>().map_err(|_| self.err(format!("bad number {w:?}"))))
            .collect()
    }
}

pub fn from_text(text: &str, path: &Path) -> Result<SdpInstance, CliError> {
    let mut lines = Lines {
        inner: text.lines().enumerate(),
        path,
        line: 0,
    };
    let magic = lines.next()?;
    if magic != MAGIC {
        return Err(lines.err(format!("expected header {MAGIC:?}, got {magic:?}")));
    }
    let n = lines.count("dim")?;
    let k = lines.count("constraints")?;
    let words = lines.keyed("offsets")?;
    let a = lines.floats(&words, k)?;
    let mut cs = Vec::with_capacity(k);
    for j in 0..k {
        let idx = lines.count("constraint")?;
        if idx != j {
            return Err(lines.err(format!("constraint {idx} out of order, expected {j}")));
        }
        let mut data = Vec::with_capacity(n * n);
        for _ in 0..n {
            let row = lines.next()?;
            let words: Vec<&str> = row.split_whitespace().collect();
            let v = lines.floats(&words, 2 * n)?;
            data.extend(v.chunks_exact(2).map(|p| C64::new(p[0], p[1])));
        }
        cs.push(CMatrix::new(n, n, data).map_err(|e| lines.err(e.to_string()))?);
    }
    if let Ok(extra) = lines.next() {
        return Err(lines.err(format!("trailing content {extra:?}")));
    }
    SdpInstance::new(n, cs, a).map_err(|e| CliError::Parse {
        path: path.to_path_buf(),
        line: 0,
        message: e.to_string(),
    })
}

pub fn load(path: &Path) -> Result<SdpInstance, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    from_text(&text, path)
}
