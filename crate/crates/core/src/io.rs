//! Text formats for sequences, spectra, weights, data, systems and signals.
//!
//! Floats are written with 17 significant digits so that a write/read cycle
//! is exact.

use num_complex::Complex64;

use crate::control::{ControlProblem, ControlSignal, DiagonalSystem, Horizon};
use crate::error::{Error, Result};
use crate::pwcore::PwFunction;
use crate::quad::PanelLayout;

/// `{:.16e}`: 17 significant digits, round-trip exact.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn number(line: usize, field: &str) -> Result<f64> {
    let v: f64 = field
        .trim()
        .parse()
        .map_err(|_| parse_err(line, format!("not a number: {field:?}")))?;
    if !v.is_finite() {
        return Err(parse_err(line, format!("not finite: {field:?}")));
    }
    Ok(v)
}

fn index(line: usize, field: &str) -> Result<usize> {
    field
        .trim()
        .parse()
        .map_err(|_| parse_err(line, format!("not an index: {field:?}")))
}

/// CSV rows after a required header; `#` lines are comments.
fn csv_rows(text: &str, header: &[&str]) -> Result<Vec<(usize, Vec<String>)>> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .has_headers(true)
        .from_reader(text.as_bytes());
    let found = rdr.headers().map_err(|e| parse_err(1, e.to_string()))?.clone();
    let names: Vec<String> = found.iter().map(|s| s.to_ascii_lowercase()).collect();
    if names != header {
        return Err(parse_err(
            1,
            format!("expected header {}, found {}", header.join(","), names.join(",")),
        ));
    }
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| parse_err(e.position().map_or(0, |p| p.line() as usize), e.to_string()))?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        if rec.len() != header.len() {
            return Err(parse_err(
                line,
                format!("expected {} fields, found {}", header.len(), rec.len()),
            ));
        }
        rows.push((line, rec.iter().map(str::to_string).collect()));
    }
    Ok(rows)
}

/// Comma-separated table with a header row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn render(&self) -> String {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        w.write_record(&self.header).expect("in-memory write");
        for r in &self.rows {
            w.write_record(r).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
    }
}

/// One point per line as `re im`; blank lines and `#` comments ignored.
pub fn parse_sequence(text: &str) -> Result<Vec<Complex64>> {
    let mut out = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let parts: Vec<&str> = line.split_whitespace().collect();
        if parts.len() != 2 {
            return Err(parse_err(k + 1, format!("expected \"re im\", found {line:?}")));
        }
        out.push(Complex64::new(number(k + 1, parts[0])?, number(k + 1, parts[1])?));
    }
    Ok(out)
}

pub fn format_sequence(points: &[Complex64]) -> String {
    let mut s = String::new();
    for z in points {
        s.push_str(&fmt_f64(z.re));
        s.push(' ');
        s.push_str(&fmt_f64(z.im));
        s.push('\n');
    }
    s
}

const SPECTRUM_HEADER: [&str; 3] = ["t", "re", "im"];

/// `# tau=<τ> order=<n> breakpoints=<b0;b1;…>` then `t,re,im` rows at the
/// Gauss nodes of that layout.
pub fn format_spectrum(f: &PwFunction) -> String {
    let l = f.layout();
    let bps: Vec<String> = l.breakpoints.iter().map(|&b| fmt_f64(b)).collect();
    let mut s = format!(
        "# tau={} order={} breakpoints={}\n",
        fmt_f64(f.bandwidth()),
        l.order,
        bps.join(";")
    );
    let mut t = Table::new(&SPECTRUM_HEADER);
    for (x, v) in f.nodes().iter().zip(f.samples()) {
        t.push(vec![fmt_f64(*x), fmt_f64(v.re), fmt_f64(v.im)]);
    }
    s.push_str(&t.render());
    s
}

pub fn parse_spectrum(text: &str, label: &str) -> Result<PwFunction> {
    let first = text.lines().next().unwrap_or("");
    let meta = first
        .strip_prefix('#')
        .ok_or_else(|| parse_err(1, "missing '# tau=… order=… breakpoints=…' header"))?;
    let (mut tau, mut order, mut bps) = (None, None, None);
    for item in meta.split_whitespace() {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| parse_err(1, format!("malformed header item {item:?}")))?;
        match k {
            "tau" => tau = Some(number(1, v)?),
            "order" => order = Some(index(1, v)?),
            "breakpoints" => bps = Some(v.split(';').map(|b| number(1, b)).collect::<Result<Vec<f64>>>()?),
            _ => return Err(parse_err(1, format!("unknown header key {k:?}"))),
        }
    }
    let tau = tau.ok_or_else(|| parse_err(1, "header lacks tau"))?;
    let layout = PanelLayout::new(
        bps.ok_or_else(|| parse_err(1, "header lacks breakpoints"))?,
        order.ok_or_else(|| parse_err(1, "header lacks order"))?,
    )?;
    let rule = layout.rule();
    let rows = csv_rows(text, &SPECTRUM_HEADER)?;
    if rows.len() != rule.len() {
        return Err(parse_err(
            1,
            format!("layout has {} nodes, file has {} rows", rule.len(), rows.len()),
        ));
    }
    let mut samples = Vec::with_capacity(rows.len());
    for ((line, r), &node) in rows.iter().zip(&rule.nodes) {
        let t = number(*line, &r[0])?;
        if (t - node).abs() > 1e-12 * tau.max(1.0) {
            return Err(parse_err(*line, format!("t = {t} is not the layout node {node}")));
        }
        samples.push(Complex64::new(number(*line, &r[1])?, number(*line, &r[2])?));
    }
    PwFunction::synthesize(tau, layout, samples, label)
}

const WEIGHT_HEADER: [&str; 2] = ["index", "omega"];

/// `index,omega` with every index `0..n` present once.
pub fn parse_weights(text: &str, n: usize) -> Result<Vec<f64>> {
    let mut w = vec![f64::NAN; n];
    for (line, r) in csv_rows(text, &WEIGHT_HEADER)? {
        let k = index(line, &r[0])?;
        if k >= n {
            return Err(parse_err(line, format!("index {k} outside 0..{n}")));
        }
        if !w[k].is_nan() {
            return Err(parse_err(line, format!("index {k} repeated")));
        }
        w[k] = number(line, &r[1])?;
    }
    if let Some(k) = w.iter().position(|v| v.is_nan()) {
        return Err(parse_err(0, format!("no weight for index {k}")));
    }
    Ok(w)
}

pub fn format_weights(w: &[f64]) -> String {
    let mut t = Table::new(&WEIGHT_HEADER);
    for (k, v) in w.iter().enumerate() {
        t.push(vec![k.to_string(), fmt_f64(*v)]);
    }
    t.render()
}

const DATA_HEADER: [&str; 3] = ["index", "re_a", "im_a"];

/// `index,re_a,im_a`: finitely supported interpolation data.
pub fn parse_data(text: &str) -> Result<Vec<(usize, Complex64)>> {
    csv_rows(text, &DATA_HEADER)?
        .into_iter()
        .map(|(line, r)| {
            Ok((
                index(line, &r[0])?,
                Complex64::new(number(line, &r[1])?, number(line, &r[2])?),
            ))
        })
        .collect()
}

pub fn format_data(data: &[(usize, Complex64)]) -> String {
    let mut t = Table::new(&DATA_HEADER);
    for (k, a) in data {
        t.push(vec![k.to_string(), fmt_f64(a.re), fmt_f64(a.im)]);
    }
    t.render()
}

const SYSTEM_HEADER: [&str; 5] = ["n", "re_lambda", "im_lambda", "re_b", "im_b"];

/// `n,re_lambda,im_lambda,re_b,im_b`, rows in mode order.
pub fn parse_system(text: &str) -> Result<DiagonalSystem> {
    let mut lam = Vec::new();
    let mut b = Vec::new();
    for (line, r) in csv_rows(text, &SYSTEM_HEADER)? {
        lam.push(Complex64::new(number(line, &r[1])?, number(line, &r[2])?));
        b.push(Complex64::new(number(line, &r[3])?, number(line, &r[4])?));
    }
    DiagonalSystem::new(lam, b)
}

pub fn format_system(sys: &DiagonalSystem) -> String {
    let mut t = Table::new(&SYSTEM_HEADER);
    for (k, (l, b)) in sys.eigenvalues().iter().zip(sys.control_coefficients()).enumerate() {
        t.push(vec![
            (k + 1).to_string(),
            fmt_f64(l.re),
            fmt_f64(l.im),
            fmt_f64(b.re),
            fmt_f64(b.im),
        ]);
    }
    t.render()
}

const PROBLEM_HEADER: [&str; 5] = ["n", "re_x0", "im_x0", "re_x1", "im_x1"];

/// First line `tau,<value>` (or `tau,inf`), then `n,re_x0,im_x0,re_x1,im_x1`.
pub fn parse_control_problem(text: &str) -> Result<ControlProblem> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| {
        let t = l.trim();
        !t.is_empty() && !t.starts_with('#')
    });
    let (k, first) = lines.next().ok_or_else(|| parse_err(1, "empty problem file"))?;
    let (key, value) = first
        .split_once(',')
        .ok_or_else(|| parse_err(k + 1, "expected 'tau,<value>'"))?;
    if key.trim() != "tau" {
        return Err(parse_err(k + 1, "expected 'tau,<value>'"));
    }
    let horizon = if value.trim() == "inf" {
        Horizon::Infinite
    } else {
        Horizon::Finite(number(k + 1, value)?)
    };
    let rest: String = text.lines().skip(k + 1).map(|l| format!("{l}\n")).collect();
    let mut x0 = Vec::new();
    let mut x1 = Vec::new();
    for (line, r) in csv_rows(&rest, &PROBLEM_HEADER)? {
        let line = line + k + 1;
        x0.push(Complex64::new(number(line, &r[1])?, number(line, &r[2])?));
        x1.push(Complex64::new(number(line, &r[3])?, number(line, &r[4])?));
    }
    ControlProblem::new(x0, x1, horizon)
}

pub fn format_control_problem(p: &ControlProblem) -> String {
    let tau = match p.horizon {
        Horizon::Finite(t) => fmt_f64(t),
        Horizon::Infinite => "inf".to_string(),
    };
    let mut t = Table::new(&PROBLEM_HEADER);
    for (k, (a, b)) in p.x0.iter().zip(&p.x1).enumerate() {
        t.push(vec![
            (k + 1).to_string(),
            fmt_f64(a.re),
            fmt_f64(a.im),
            fmt_f64(b.re),
            fmt_f64(b.im),
        ]);
    }
    format!("tau,{tau}\n{}", t.render())
}

const SIGNAL_HEADER: [&str; 3] = ["t", "re_u", "im_u"];

pub fn parse_signal(text: &str) -> Result<ControlSignal> {
    let mut grid = Vec::new();
    let mut values = Vec::new();
    for (line, r) in csv_rows(text, &SIGNAL_HEADER)? {
        grid.push(number(line, &r[0])?);
        values.push(Complex64::new(number(line, &r[1])?, number(line, &r[2])?));
    }
    ControlSignal::from_samples(grid, values)
}

pub fn format_signal(s: &ControlSignal) -> String {
    let mut t = Table::new(&SIGNAL_HEADER);
    for (x, v) in s.grid().iter().zip(s.values()) {
        t.push(vec![fmt_f64(*x), fmt_f64(v.re), fmt_f64(v.im)]);
    }
    t.render()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multiplier::build_multiplier;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn sequence_round_trip() {
        let pts = vec![c(0.1, -2.0), c(1.0 / 3.0, 1e-300), c(-7.25, 0.0)];
        let text = format!("# comment\n\n{}", format_sequence(&pts));
        assert_eq!(parse_sequence(&text).unwrap(), pts);
        let err = parse_sequence("1 2\n3\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
        assert!(parse_sequence("1 nan\n").is_err());
    }

    #[test]
    fn spectrum_round_trip() {
        let h = build_multiplier(0.5).unwrap();
        let text = format_spectrum(h.spectrum());
        let f = parse_spectrum(&text, "copy").unwrap();
        assert_eq!(f.samples(), h.spectrum().samples());
        let z = c(3.0, 0.5);
        assert_eq!(f.evaluate_fixed(z), h.spectrum().evaluate_fixed(z));
        assert!(parse_spectrum("t,re,im\n0,1,0\n", "x").is_err());
    }

    #[test]
    fn weights_and_data() {
        let w = vec![1.0, 0.5, 2.0];
        assert_eq!(parse_weights(&format_weights(&w), 3).unwrap(), w);
        assert!(parse_weights("index,omega\n0,1\n", 2).is_err());
        assert!(parse_weights("index,omega\n0,1\n0,2\n", 1).is_err());
        let d = vec![(0, c(1.0, 0.0)), (4, c(-0.5, 2.0))];
        assert_eq!(parse_data(&format_data(&d)).unwrap(), d);
        assert!(parse_data("idx,re_a,im_a\n").is_err());
    }

    #[test]
    fn system_problem_signal() {
        let sys = DiagonalSystem::new(vec![c(1.0, 0.5), c(2.0, 0.0)], vec![c(1.0, 0.0), c(0.0, -1.0)]).unwrap();
        assert_eq!(parse_system(&format_system(&sys)).unwrap(), sys);
        let p = ControlProblem::new(
            vec![c(1.0, 0.0), c(0.0, 0.0)],
            vec![c(0.0, 0.0), c(0.5, 0.5)],
            Horizon::Finite(1.5),
        )
        .unwrap();
        assert_eq!(parse_control_problem(&format_control_problem(&p)).unwrap(), p);
        let inf = ControlProblem::new(vec![c(1.0, 0.0)], vec![c(0.0, 0.0)], Horizon::Infinite).unwrap();
        assert_eq!(parse_control_problem(&format_control_problem(&inf)).unwrap(), inf);
        let s = ControlSignal::zero(2.0, 9).unwrap();
        let back = parse_signal(&format_signal(&s)).unwrap();
        assert_eq!(back.grid(), s.grid());
        assert!(matches!(
            parse_system("n,re_lambda,im_lambda,re_b,im_b\n1,-1,0,1,0\n"),
            Err(Error::UnstableEigenvalue { .. })
        ));
    }
}
