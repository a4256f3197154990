//! Text formats: model files, trajectory CSV and estimate CSV.
//!
//! Matrices are stored as labelled blocks. Each block starts with a header
//! line `# block: NAME rows cols` followed by `rows` lines of `cols`
//! comma-separated numbers. Blank lines and other `#` lines are ignored.
//! Numbers are written with 17 significant digits so that write then read is
//! bit-exact.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use sysid_core::ident::Estimate;
use sysid_core::{LtiSystem, Matrix, Trajectory};

use crate::{Error, Result};

const BLOCK_PREFIX: &str = "# block:";

/// Formats a float with 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Source name used in parse errors.
#[derive(Debug, Clone)]
pub(crate) struct Source(PathBuf);

impl Source {
    pub(crate) fn new(path: impl Into<PathBuf>) -> Self {
        Source(path.into())
    }

    pub(crate) fn err(&self, line: usize, column: usize, message: impl Into<String>) -> Error {
        Error::Parse {
            path: self.0.clone(),
            line,
            column,
            message: message.into(),
        }
    }
}

pub(crate) fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub(crate) fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Splits a line on commas, yielding each field with its 1-based column.
fn fields(line: &str) -> impl Iterator<Item = (usize, &str)> {
    let mut col = 1;
    line.split(',').map(move |f| {
        let start = col;
        col += f.chars().count() + 1;
        let lead = f.chars().take_while(|c| c.is_whitespace()).count();
        (start + lead, f.trim())
    })
}

fn parse_f64(src: &Source, line: usize, col: usize, field: &str) -> Result<f64> {
    field
        .parse::<f64>()
        .map_err(|_| src.err(line, col, format!("expected a number, found `{field}`")))
}

/// A named matrix read from a block file, with the line of its header.
#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    pub name: String,
    pub matrix: Matrix,
    pub line: usize,
}

fn parse_header(src: &Source, lineno: usize, line: &str) -> Result<(String, usize, usize)> {
    let rest = &line[BLOCK_PREFIX.len()..];
    let base = BLOCK_PREFIX.len() + 1;
    let mut parts = Vec::new();
    let mut offset = 0;
    for tok in rest.split_whitespace() {
        let at = rest[offset..].find(tok).unwrap() + offset;
        offset = at + tok.len();
        parts.push((base + at, tok));
    }
    if parts.len() != 3 {
        return Err(src.err(
            lineno,
            1,
            "block header must be `# block: NAME rows cols`",
        ));
    }
    let dim = |(col, tok): (usize, &str)| {
        tok.parse::<usize>()
            .map_err(|_| src.err(lineno, col, format!("expected a dimension, found `{tok}`")))
    };
    Ok((parts[0].1.to_string(), dim(parts[1])?, dim(parts[2])?))
}

fn parse_blocks(src: &Source, text: &str) -> Result<Vec<Block>> {
    let mut blocks = Vec::new();
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l)).peekable();
    while let Some((lineno, line)) = lines.next() {
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if !trimmed.starts_with('#') {
            return Err(src.err(lineno, 1, "data outside of a block (missing `# block:` header)"));
        }
        if !trimmed.starts_with(BLOCK_PREFIX) {
            continue;
        }
        let (name, rows, cols) = parse_header(src, lineno, trimmed)?;
        if blocks.iter().any(|b: &Block| b.name == name) {
            return Err(src.err(lineno, 1, format!("duplicate block `{name}`")));
        }
        let mut data = Vec::with_capacity(rows * cols);
        let mut last_line = lineno;
        // Blocks without columns carry no data lines.
        let data_rows = if cols == 0 { 0 } else { rows };
        for row in 0..data_rows {
            let Some((rl, rline)) = lines.next() else {
                return Err(src.err(
                    last_line + 1,
                    1,
                    format!("block `{name}` ends after {row} of {rows} rows"),
                ));
            };
            last_line = rl;
            if rline.trim().is_empty() || rline.trim_start().starts_with('#') {
                return Err(src.err(rl, 1, format!("block `{name}` ends after {row} of {rows} rows")));
            }
            let mut count = 0;
            for (col, field) in fields(rline) {
                count += 1;
                if count > cols {
                    return Err(src.err(rl, col, format!("expected {cols} values, found more")));
                }
                data.push(parse_f64(src, rl, col, field)?);
            }
            if count < cols {
                return Err(src.err(
                    rl,
                    rline.chars().count() + 1,
                    format!("expected {cols} values, found {count}"),
                ));
            }
        }
        blocks.push(Block {
            name,
            matrix: Matrix::from_row_slice(rows, cols, &data),
            line: lineno,
        });
    }
    Ok(blocks)
}

/// Appends one `# block:` section.
pub fn write_block(out: &mut String, name: &str, m: &Matrix) {
    writeln!(out, "{BLOCK_PREFIX} {name} {} {}", m.nrows(), m.ncols()).unwrap();
    if m.ncols() == 0 {
        return;
    }
    for i in 0..m.nrows() {
        let row: Vec<String> = m.row(i).iter().map(|&v| fmt_f64(v)).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
}

/// Serializes a system as blocks `A`, `B` (omitted when `p = 0`) and `H`.
pub fn model_to_string(sys: &LtiSystem) -> String {
    let mut out = String::new();
    write_block(&mut out, "A", sys.a());
    if sys.p() > 0 {
        write_block(&mut out, "B", sys.b());
    }
    write_block(&mut out, "H", sys.h());
    out
}

/// Parses a model file. `A` and `H` are required, `B` is optional; the result
/// is validated like any other system.
pub fn parse_model(text: &str, path: impl Into<PathBuf>) -> Result<LtiSystem> {
    let src = Source::new(path);
    let blocks = parse_blocks(&src, text)?;
    let mut a = None;
    let mut b = None;
    let mut h = None;
    for block in blocks {
        let slot = match block.name.as_str() {
            "A" => &mut a,
            "B" => &mut b,
            "H" => &mut h,
            other => {
                return Err(src.err(block.line, 1, format!("unknown block `{other}` (expected A, B or H)")));
            }
        };
        *slot = Some(block.matrix);
    }
    let last = text.lines().count().max(1);
    let a = a.ok_or_else(|| src.err(last, 1, "missing block `A`"))?;
    let h = h.ok_or_else(|| src.err(last, 1, "missing block `H`"))?;
    let b = b.unwrap_or_else(|| Matrix::zeros(a.nrows(), 0));
    Ok(LtiSystem::new(a, b, h)?)
}

pub fn read_model(path: &Path) -> Result<LtiSystem> {
    parse_model(&read_text(path)?, path)
}

pub fn write_model(path: &Path, sys: &LtiSystem) -> Result<()> {
    write_text(path, &model_to_string(sys))
}

/// Trajectory CSV: header `t,x1..xn,u1..up`, rows `t = 0..N`. The last row
/// has empty input fields because `u_N` is never applied.
pub fn trajectory_to_csv(traj: &Trajectory) -> String {
    let (n, p, horizon) = (traj.n(), traj.p(), traj.len());
    let mut header = vec!["t".to_string()];
    header.extend((1..=n).map(|i| format!("x{i}")));
    header.extend((1..=p).map(|i| format!("u{i}")));
    let mut out = header.join(",");
    out.push('\n');
    for t in 0..=horizon {
        let mut row = vec![t.to_string()];
        row.extend(traj.states().column(t).iter().map(|&v| fmt_f64(v)));
        if t < horizon {
            row.extend(traj.inputs().column(t).iter().map(|&v| fmt_f64(v)));
        } else {
            row.extend(std::iter::repeat_n(String::new(), p));
        }
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub fn parse_trajectory(text: &str, path: impl Into<PathBuf>) -> Result<Trajectory> {
    let src = Source::new(path);
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'));
    let (hl, header) = lines.next().ok_or_else(|| src.err(1, 1, "empty trajectory file"))?;

    let mut n = 0;
    let mut p = 0;
    for (idx, (col, name)) in fields(header).enumerate() {
        let expected = if idx == 0 {
            "t".to_string()
        } else if p == 0 && name == format!("x{idx}") {
            n += 1;
            continue;
        } else {
            p += 1;
            format!("u{p}")
        };
        if name != expected {
            return Err(src.err(hl, col, format!("expected column `{expected}`, found `{name}`")));
        }
    }
    if n == 0 {
        return Err(src.err(hl, 1, "header has no state columns"));
    }

    let mut states: Vec<f64> = Vec::new();
    let mut inputs: Vec<f64> = Vec::new();
    let mut open_row: Option<usize> = None;
    let mut rows = 0;
    for (ln, line) in lines {
        if let Some(prev) = open_row {
            return Err(src.err(ln, 1, format!("row after the final row on line {prev} (inputs were empty there)")));
        }
        let parts: Vec<(usize, &str)> = fields(line).collect();
        if parts.len() != 1 + n + p {
            return Err(src.err(ln, 1, format!("expected {} fields, found {}", 1 + n + p, parts.len())));
        }
        let (tc, tf) = parts[0];
        if tf.parse::<usize>().ok() != Some(rows) {
            return Err(src.err(ln, tc, format!("expected t = {rows}, found `{tf}`")));
        }
        for &(col, f) in &parts[1..=n] {
            states.push(parse_f64(&src, ln, col, f)?);
        }
        let input_fields = &parts[1 + n..];
        if p > 0 && input_fields.iter().all(|(_, f)| f.is_empty()) {
            open_row = Some(ln);
        } else {
            for &(col, f) in input_fields {
                inputs.push(parse_f64(&src, ln, col, f)?);
            }
        }
        rows += 1;
    }
    if rows < 2 {
        return Err(src.err(hl + 1, 1, "trajectory needs at least two rows"));
    }
    let horizon = rows - 1;
    if p > 0 && open_row.is_none() {
        return Err(src.err(hl, 1, "final row must leave the input fields empty"));
    }
    let states = Matrix::from_column_slice(n, rows, &states);
    let inputs = Matrix::from_column_slice(p, horizon, &inputs);
    Ok(Trajectory::from_parts(states, inputs, 0)?)
}

pub fn read_trajectory(path: &Path) -> Result<Trajectory> {
    parse_trajectory(&read_text(path)?, path)
}

/// Estimate CSV: block `A_hat` then block `B_hat`.
pub fn estimate_to_csv(est: &Estimate) -> String {
    let mut out = String::new();
    write_block(&mut out, "A_hat", &est.a_hat);
    write_block(&mut out, "B_hat", &est.b_hat);
    out
}

/// Reads the `A_hat` and `B_hat` blocks of an estimate file.
pub fn parse_estimate(text: &str, path: impl Into<PathBuf>) -> Result<(Matrix, Matrix)> {
    let src = Source::new(path);
    let mut blocks = parse_blocks(&src, text)?.into_iter();
    let last = text.lines().count().max(1);
    let mut take = |name: &str| match blocks.next() {
        Some(b) if b.name == name => Ok(b.matrix),
        Some(b) => Err(src.err(b.line, 1, format!("expected block `{name}`, found `{}`", b.name))),
        None => Err(src.err(last, 1, format!("missing block `{name}`"))),
    };
    let a = take("A_hat")?;
    let b = take("B_hat")?;
    if let Some(extra) = blocks.next() {
        return Err(src.err(extra.line, 1, format!("unexpected block `{}`", extra.name)));
    }
    if b.nrows() != a.nrows() {
        return Err(src.err(last, 1, "A_hat and B_hat have different row counts"));
    }
    Ok((a, b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use sysid_core::lti::simulate;
    use sysid_core::{zoo, NoiseSpec};

    #[test]
    fn model_round_trip_is_exact() {
        let sys = zoo::jordan_actuated(4, 0.7, 0.1, 5.0, zoo::InputPattern::Half).unwrap();
        let text = model_to_string(&sys);
        assert_eq!(parse_model(&text, "m").unwrap(), sys);
        let chain = zoo::hard_chain(3, 1.0 / 3.0).unwrap();
        let text = model_to_string(&chain);
        assert!(!text.contains("block: B"));
        assert_eq!(parse_model(&text, "m").unwrap(), chain);
    }

    #[test]
    fn model_errors_carry_positions() {
        let text = "# block: A 2 2\n1,0\n0,x\n# block: H 2 1\n1\n0\n";
        let err = parse_model(text, "sys.csv").unwrap_err().to_string();
        assert!(err.starts_with("sys.csv:3:3:"), "{err}");

        let short = "# block: A 2 2\n1,0\n";
        let err = parse_model(short, "s").unwrap_err().to_string();
        assert!(err.starts_with("s:3:1:"), "{err}");

        let header = "# block: A two 2\n";
        let err = parse_model(header, "s").unwrap_err().to_string();
        assert!(err.starts_with("s:1:12:"), "{err}");

        let missing = "# block: A 1 1\n0.5\n";
        assert!(parse_model(missing, "s").unwrap_err().to_string().contains("missing block `H`"));
    }

    #[test]
    fn invalid_system_is_a_numerical_error() {
        let text = "# block: A 1 1\n2\n# block: H 1 1\n1\n";
        let err = parse_model(text, "s").unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn trajectory_round_trip_is_exact() {
        let sys = zoo::scaled_jordan(3).unwrap();
        let traj = simulate(&sys, 7, &NoiseSpec::unit(), 5).unwrap();
        let csv = trajectory_to_csv(&traj);
        assert!(csv.starts_with("t,x1,x2,x3,u1\n0,"));
        assert!(csv.lines().last().unwrap().ends_with(','));
        let back = parse_trajectory(&csv, "t").unwrap();
        assert_eq!(back.states(), traj.states());
        assert_eq!(back.inputs(), traj.inputs());

        let auto = zoo::hard_chain(2, 0.25).unwrap();
        let traj = simulate(&auto, 3, &NoiseSpec::unit(), 5).unwrap();
        let back = parse_trajectory(&trajectory_to_csv(&traj), "t").unwrap();
        assert_eq!(back.states(), traj.states());
        assert_eq!(back.p(), 0);
    }

    #[test]
    fn trajectory_errors_carry_positions() {
        let err = parse_trajectory("t,x1,u1\n0,0,1\n2,1,\n", "d").unwrap_err().to_string();
        assert!(err.starts_with("d:3:1:"), "{err}");
        let err = parse_trajectory("t,x1,v1\n", "d").unwrap_err().to_string();
        assert!(err.starts_with("d:1:6:"), "{err}");
        let err = parse_trajectory("t,x1,u1\n0,0,1\n1,q,\n", "d").unwrap_err().to_string();
        assert!(err.starts_with("d:3:3:"), "{err}");
    }

    #[test]
    fn estimate_blocks_in_order() {
        let sys = zoo::scaled_jordan(2).unwrap();
        let traj = simulate(&sys, 20, &NoiseSpec::unit(), 1).unwrap();
        let est = sysid_core::ident::least_squares(&traj, 1e-3).unwrap();
        let (a, b) = parse_estimate(&estimate_to_csv(&est), "e").unwrap();
        assert_eq!(a, est.a_hat);
        assert_eq!(b, est.b_hat);
    }
}
