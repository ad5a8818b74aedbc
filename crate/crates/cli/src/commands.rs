//! One function per subcommand: read inputs, compute, collect artifacts.

use std::f64::consts::PI;
use std::fs;
use std::path::Path;

use num_complex::Complex64;
use pwinterp::biortho::{
    biorthogonal_from_s, weak_interpolation_report, BiorthogonalFamily, FamilyMode, GeneratingFunction,
};
use pwinterp::control::{
    controllability_report, free_decay_ratio, min_norm_control, simulate, ControlProblem, ControlSignal,
    DiagonalSystem, Horizon, DEFAULT_SAMPLES,
};
use pwinterp::interp::{norm_stability_study, solve_interpolation, InterpolationProblem, Weighting};
use pwinterp::io::{self, fmt_f64, Table};
use pwinterp::mcphail::{
    mcphail_measure, mq_check, pw_weight_adaptation, solvability_oracle, DEFAULT_MQ_THRESHOLD, ORACLE_MAX_NODES,
};
use pwinterp::multiplier::{build_multiplier, decay_certificate, RectGrid};
use pwinterp::pwcore::{LineOptions, PwFunction};
use pwinterp::seqlab::{
    blaschke_condition_sum, carleson_measure_constant, log_carleson_products, separation_report, upper_uniform_density,
    ComplexSequence, DiscreteMeasure, Generator, HalfPlane, Side,
};

use crate::config::Config;
use crate::error::CliError;
use crate::output::{with_provenance, Artifacts};

const SEQ_KEYS: &[&str] = &[
    "sequence",
    "nodes",
    "generator",
    "n_max",
    "shift_re",
    "shift_im",
    "from",
    "to",
    "base_re",
    "base_im",
    "ratio",
    "count",
    "strip",
];
const HP_KEYS: &[&str] = &["a", "side"];

pub struct Run<'a> {
    pub command: &'a str,
    pub cfg: &'a Config,
    pub seed: u64,
    pub art: Artifacts,
}

impl<'a> Run<'a> {
    fn allow(&self, groups: &[&[&str]]) -> Result<(), CliError> {
        let mut keys: Vec<&str> = vec!["seed"];
        for g in groups {
            keys.extend_from_slice(g);
        }
        self.cfg.check_keys(&keys)
    }

    fn read(&mut self, key: &str) -> Result<(String, String), CliError> {
        let path = self.cfg.require(key)?.to_string();
        let bytes = fs::read(&path).map_err(|e| CliError::Config(format!("cannot read {path}: {e}")))?;
        self.art.input(Path::new(&path), &bytes);
        let text = String::from_utf8(bytes).map_err(|_| CliError::Config(format!("{path} is not UTF-8")))?;
        Ok((path, text))
    }

    fn csv(&mut self, name: &str, table: &Table) {
        let text = with_provenance(self.command, self.seed, table.render());
        self.art.file(name, text);
    }
}

fn file_err(path: &str) -> impl Fn(pwinterp::Error) -> CliError + '_ {
    move |e| CliError::File {
        path: path.to_string(),
        source: e,
    }
}

fn exponent(cfg: &Config, key: &str, default: f64) -> Result<f64, CliError> {
    let v = cfg.parse_or(key, default)?;
    if !(v.is_finite() && v > 1.0) {
        return Err(CliError::Range(format!("{key} must lie in (1, inf), got {v}")));
    }
    Ok(v)
}

fn positive(cfg: &Config, key: &str, default: Option<f64>) -> Result<f64, CliError> {
    let v = match default {
        Some(d) => cfg.parse_or(key, d)?,
        None => cfg
            .parse(key)?
            .ok_or_else(|| CliError::Config(format!("missing required key {key:?}")))?,
    };
    if !(v.is_finite() && v > 0.0) {
        return Err(CliError::Range(format!("{key} must be positive, got {v}")));
    }
    Ok(v)
}

fn sequence(run: &mut Run, p: f64) -> Result<ComplexSequence, CliError> {
    let cfg = run.cfg;
    let key = if cfg.get("sequence").is_some() {
        Some("sequence")
    } else if cfg.get("nodes").is_some() {
        Some("nodes")
    } else {
        None
    };
    let seq = match key {
        Some(key) => {
            let (path, text) = run.read(key)?;
            let pts = io::parse_sequence(&text).map_err(file_err(&path))?;
            let strip = pts.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
            ComplexSequence::new(pts)?.with_strip_bound(strip)?
        }
        None => {
            let g = match cfg.require("generator")? {
                "perturbed-integers" => Generator::PerturbedIntegers {
                    p,
                    n_max: cfg
                        .parse("n_max")?
                        .ok_or_else(|| CliError::Config("missing n_max".into()))?,
                },
                "shifted-integers" => Generator::ShiftedIntegers {
                    shift: Complex64::new(cfg.parse_or("shift_re", 0.0)?, cfg.parse_or("shift_im", 0.0)?),
                    from: cfg
                        .parse("from")?
                        .ok_or_else(|| CliError::Config("missing from".into()))?,
                    to: cfg.parse("to")?.ok_or_else(|| CliError::Config("missing to".into()))?,
                },
                "geometric-ladder" => Generator::GeometricLadder {
                    base: Complex64::new(cfg.parse_or("base_re", 0.0)?, cfg.parse_or("base_im", 1.0)?),
                    ratio: cfg.parse_or("ratio", 2.0)?,
                    count: cfg
                        .parse("count")?
                        .ok_or_else(|| CliError::Config("missing count".into()))?,
                },
                other => return Err(CliError::Config(format!("unknown generator {other:?}"))),
            };
            ComplexSequence::generate(g)?
        }
    };
    match cfg.parse::<f64>("strip")? {
        Some(s) => Ok(seq.with_strip_bound(s)?),
        None => Ok(seq),
    }
}

/// Half-plane from `a` and `side`; by default one unit below (above) the
/// lowest (highest) node.
fn half_plane(cfg: &Config, seq: &ComplexSequence) -> Result<HalfPlane, CliError> {
    let side = match cfg.get("side").unwrap_or("upper") {
        "upper" => Side::Upper,
        "lower" => Side::Lower,
        other => return Err(CliError::Config(format!("side must be upper or lower, got {other:?}"))),
    };
    let a = match cfg.parse::<f64>("a")? {
        Some(a) => a,
        None => {
            let ims = seq.points().iter().map(|z| z.im);
            match side {
                Side::Upper => ims.fold(f64::INFINITY, f64::min) - 1.0,
                Side::Lower => ims.fold(f64::NEG_INFINITY, f64::max) + 1.0,
            }
        }
    };
    Ok(HalfPlane { offset: a, side })
}

fn c3(z: Complex64) -> [String; 2] {
    [fmt_f64(z.re), fmt_f64(z.im)]
}

pub fn analyze_sequence(run: &mut Run) -> Result<(), CliError> {
    run.allow(&[SEQ_KEYS, HP_KEYS, &["p", "r_grid"]])?;
    let p = exponent(run.cfg, "p", 2.0)?;
    let seq = sequence(run, p)?;
    let hp = half_plane(run.cfg, &seq)?;
    let r_grid = run
        .cfg
        .float_list("r_grid")?
        .unwrap_or_else(|| vec![1.0, 2.0, 4.0, 8.0, 16.0, 32.0]);
    let log_theta = log_carleson_products(&seq, hp)?;
    let sep = separation_report(&seq, Some(hp))?;
    let blaschke = blaschke_condition_sum(&seq, hp)?;
    let density = upper_uniform_density(&seq, &r_grid)?;
    let pts = seq.points();
    let mut t = Table::new(&["index", "re", "im", "theta", "log_theta", "nearest_distance"]);
    for (k, &z) in pts.iter().enumerate() {
        let nearest = pts
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != k)
            .map(|(_, &w)| (z - w).norm())
            .fold(f64::INFINITY, f64::min);
        let [re, im] = c3(z);
        t.push(vec![
            k.to_string(),
            re,
            im,
            fmt_f64(log_theta[k].exp()),
            fmt_f64(log_theta[k]),
            fmt_f64(nearest),
        ]);
    }
    run.csv("analysis.csv", &t);
    run.csv("density.csv", &density_table(&density));
    let (argmin, min) = log_theta
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::INFINITY), |b, (k, v)| if v < b.1 { (k, v) } else { b });
    let a = &mut run.art;
    a.result("points", pts.len());
    a.result("half_plane", format!("{:?} a={}", hp.side, fmt_f64(hp.offset)));
    a.result("theta_inf", fmt_f64(min.exp()));
    a.result("theta_argmin", argmin);
    a.result("psh_gap", fmt_f64(sep.psh_gap.unwrap_or(f64::NAN)));
    a.result("euclid_gap", fmt_f64(sep.euclid_gap));
    a.result("closest_pair", format!("{} {}", sep.closest_pair.0, sep.closest_pair.1));
    a.result("blaschke_sum", fmt_f64(blaschke.sum));
    Ok(())
}

fn density_table(d: &[(f64, f64)]) -> Table {
    let mut t = Table::new(&["r", "ratio"]);
    for &(r, v) in d {
        t.push(vec![fmt_f64(r), fmt_f64(v)]);
    }
    t
}

pub fn density(run: &mut Run) -> Result<(), CliError> {
    run.allow(&[SEQ_KEYS, &["p", "r_grid"]])?;
    let p = exponent(run.cfg, "p", 2.0)?;
    let seq = sequence(run, p)?;
    let r_grid = run
        .cfg
        .float_list("r_grid")?
        .unwrap_or_else(|| vec![1.0, 2.0, 4.0, 8.0, 16.0, 32.0]);
    let d = upper_uniform_density(&seq, &r_grid)?;
    run.csv("density.csv", &density_table(&d));
    if let Some(&(r, v)) = d.last() {
        run.art.result("largest_window", fmt_f64(r));
        run.art.result("ratio_at_largest_window", fmt_f64(v));
    }
    Ok(())
}

pub fn carleson_measure(run: &mut Run) -> Result<(), CliError> {
    run.allow(&[SEQ_KEYS, HP_KEYS, &["p", "mass_scale"]])?;
    let p = exponent(run.cfg, "p", 2.0)?;
    let seq = sequence(run, p)?;
    let hp = half_plane(run.cfg, &seq)?;
    let scale = positive(run.cfg, "mass_scale", Some(1.0))?;
    let m = DiscreteMeasure::from_sequence(&seq, hp)?.scaled(scale)?;
    let constant = carleson_measure_constant(&m, hp)?;
    let mut t = Table::new(&["index", "re", "im", "mass"]);
    for (k, &(z, w)) in m.atoms().iter().enumerate() {
        let [re, im] = c3(z);
        t.push(vec![k.to_string(), re, im, fmt_f64(w)]);
    }
    run.csv("measure.csv", &t);
    run.art.result("total_mass", fmt_f64(m.total_mass()));
    run.art.result("carleson_constant", fmt_f64(constant));
    Ok(())
}

pub fn build_multiplier_cmd(run: &mut Run) -> Result<(), CliError> {
    run.allow(&[&["epsilon"]])?;
    let eps = positive(run.cfg, "epsilon", None)?;
    let h = build_multiplier(eps)?;
    let text = io::format_spectrum(h.spectrum());
    // keep the layout header first; provenance follows it
    let (head, rest) = text.split_once('\n').unwrap_or((&text, ""));
    run.art.file(
        "spectrum.csv",
        format!("{head}\n# pwtool {} seed={}\n{rest}", run.command, run.seed),
    );
    run.art.result("epsilon", fmt_f64(eps));
    run.art.result("bump_integral", fmt_f64(h.bump_integral()));
    run.art.result("normalization", fmt_f64(h.normalization()));
    run.art
        .result("h_at_zero", fmt_f64(h.eval(Complex64::new(0.0, 0.0))?.re));
    run.art.result("exponential_type", fmt_f64(0.5 * eps));
    Ok(())
}

pub fn multiplier_probe(run: &mut Run) -> Result<(), CliError> {
    run.allow(&[&["epsilon", "x_max", "y_max", "nx", "ny"]])?;
    let eps = positive(run.cfg, "epsilon", None)?;
    let grid = RectGrid {
        x_max: positive(run.cfg, "x_max", Some(50.0))?,
        y_max: run.cfg.parse_or("y_max", 3.0)?,
        nx: run.cfg.parse_or("nx", 101)?,
        ny: run.cfg.parse_or("ny", 7)?,
    };
    if grid.y_max < 0.0 || grid.nx < 2 {
        return Err(CliError::Range("need y_max >= 0 and nx >= 2".into()));
    }
    let h = build_multiplier(eps)?;
    let mut t = Table::new(&["re_z", "im_z", "re_h", "im_h", "weighted"]);
    for z in grid.points() {
        let v = h.eval_any(z)?;
        let w = v.norm() * (1.0 + z.norm()) * (-eps * z.im.abs()).exp();
        let [zr, zi] = c3(z);
        let [vr, vi] = c3(v);
        t.push(vec![zr, zi, vr, vi, fmt_f64(w)]);
    }
    run.csv("probe.csv", &t);
    let c1 = decay_certificate(&h, &grid)?;
    let c2 = decay_certificate(&h, &grid.refined())?;
    run.art.result("certificate", fmt_f64(c1));
    run.art.result("certificate_refined", fmt_f64(c2));
    run.art.result("relative_change", fmt_f64(((c2 - c1) / c1).abs()));
    Ok(())
}

/// Generated family from symmetric real nodes, or `member.<k>` spectrum files.
fn family(run: &mut Run, seq: &ComplexSequence) -> Result<BiorthogonalFamily, CliError> {
    let members: Vec<String> = run
        .cfg
        .entries()
        .filter(|(k, _)| k.starts_with("member."))
        .map(|(k, _)| k.clone())
        .collect();
    if members.is_empty() {
        return Ok(biorthogonal_from_s(GeneratingFunction::for_sequence(seq.clone())?)?);
    }
    let mut functions: Vec<Option<PwFunction>> = vec![None; seq.len()];
    for key in members {
        let k: usize = key["member.".len()..]
            .parse()
            .map_err(|_| CliError::Config(format!("bad member key {key:?}")))?;
        if k >= seq.len() {
            return Err(CliError::Config(format!("{key} outside the node range")));
        }
        let (path, text) = run.read(&key)?;
        functions[k] = Some(io::parse_spectrum(&text, &key).map_err(file_err(&path))?);
    }
    let functions = functions
        .into_iter()
        .enumerate()
        .map(|(k, f)| f.ok_or_else(|| CliError::Config(format!("no member.{k} spectrum"))))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(BiorthogonalFamily::supplied(seq.clone(), functions)?)
}

pub fn build_family(run: &mut Run) -> Result<(), CliError> {
    run.allow(&[SEQ_KEYS, &["p", "tau", "manifest", "member.*"]])?;
    let p = exponent(run.cfg, "p", 2.0)?;
    if run.cfg.get("manifest").is_some() {
        let (path, _) = run.read("manifest")?;
        let mut cfg = run.cfg.clone();
        cfg.merge_defaults(Path::new(&path))?;
        let mut inner = Run {
            command: run.command,
            cfg: &cfg,
            seed: run.seed,
            art: std::mem::take(&mut run.art),
        };
        let r = build_family_inner(&mut inner, p);
        run.art = inner.art;
        return r;
    }
    build_family_inner(run, p)
}

fn build_family_inner(run: &mut Run, p: f64) -> Result<(), CliError> {
    let seq = sequence(run, p)?;
    let fam = family(run, &seq)?;
    let tau = positive(run.cfg, "tau", Some(fam.bandwidth()))?;
    let check = fam.check()?;
    let report = weak_interpolation_report(&fam, tau, p, &LineOptions::default())?;
    let norms = fam.line_norms(p, &LineOptions::default())?;
    let generated = fam.mode() == FamilyMode::Generated;
    let mut t = if generated {
        Table::new(&["index", "re", "im", "re_ds", "im_ds", "norm", "normalized_norm"])
    } else {
        Table::new(&["index", "re", "im", "norm", "normalized_norm"])
    };
    for (k, &z) in seq.points().iter().enumerate() {
        let [re, im] = c3(z);
        let mut row = vec![k.to_string(), re, im];
        if let Some(s) = fam.generating_function() {
            let [a, b] = c3(s.derivative_at_node(k)?);
            row.extend([a, b]);
        }
        row.push(fmt_f64(norms[k].norm()));
        row.push(fmt_f64(report.normalized_norms[k]));
        t.push(row);
    }
    run.csv("family.csv", &t);
    let a = &mut run.art;
    a.result("mode", if generated { "generated" } else { "supplied" });
    a.result("members", seq.len());
    a.result("bandwidth", fmt_f64(fam.bandwidth()));
    a.result("biorthogonality_error", fmt_f64(check.max_error));
    a.result("biorthogonality_worst", format!("{} {}", check.worst.0, check.worst.1));
    a.result("sup_normalized_norm", fmt_f64(report.sup));
    a.result("sup_argmax", report.argmax);
    Ok(())
}

pub fn solve_interpolation_cmd(run: &mut Run) -> Result<(), CliError> {
    run.allow(&[
        SEQ_KEYS,
        &[
            "problem",
            "data",
            "weights",
            "p",
            "tau",
            "epsilon",
            "member.*",
            "probe_step",
        ],
    ])?;
    if run.cfg.get("problem").is_some() {
        let (path, _) = run.read("problem")?;
        let mut cfg = run.cfg.clone();
        cfg.merge_defaults(Path::new(&path))?;
        cfg.check_keys(
            &[
                SEQ_KEYS,
                &[
                    "seed",
                    "problem",
                    "data",
                    "weights",
                    "p",
                    "tau",
                    "epsilon",
                    "member.*",
                    "probe_step",
                ],
            ]
            .concat(),
        )?;
        let mut inner = Run {
            command: run.command,
            cfg: &cfg,
            seed: run.seed,
            art: std::mem::take(&mut run.art),
        };
        let r = solve_inner(&mut inner);
        run.art = inner.art;
        return r;
    }
    solve_inner(run)
}

fn solve_inner(run: &mut Run) -> Result<(), CliError> {
    let p = exponent(run.cfg, "p", 2.0)?;
    let eps = positive(run.cfg, "epsilon", None)?;
    let tau = positive(run.cfg, "tau", Some(PI))?;
    let step = positive(run.cfg, "probe_step", Some(0.25))?;
    let seq = sequence(run, p)?;
    let (dpath, dtext) = run.read("data")?;
    let data = io::parse_data(&dtext).map_err(file_err(&dpath))?;
    let weighting = if run.cfg.get("weights").is_some() {
        let (wpath, wtext) = run.read("weights")?;
        Weighting::Explicit(io::parse_weights(&wtext, seq.len()).map_err(file_err(&wpath))?)
    } else {
        Weighting::Canonical
    };
    let prob = InterpolationProblem::new(seq.clone(), &data, p, weighting, tau, eps)?;
    let fam = family(run, &seq)?;
    let h = build_multiplier(eps)?;
    let (f, rep) = solve_interpolation(&prob, &fam, &h)?;
    let w = prob.weights();
    let mut t = Table::new(&[
        "index",
        "re_lambda",
        "im_lambda",
        "omega",
        "re_a",
        "im_a",
        "re_f",
        "im_f",
        "residual",
    ]);
    for (k, &z) in seq.points().iter().enumerate() {
        let [zr, zi] = c3(z);
        let [ar, ai] = c3(prob.data()[k]);
        let [fr, fi] = c3(f.eval(z)?);
        t.push(vec![
            k.to_string(),
            zr,
            zi,
            fmt_f64(w[k]),
            ar,
            ai,
            fr,
            fi,
            fmt_f64(rep.residuals[k]),
        ]);
    }
    run.csv("residuals.csv", &t);
    let reach = seq.points().iter().map(|z| z.re.abs()).fold(0.0, f64::max) + 10.0;
    let count = (2.0 * reach / step).round() as usize;
    let mut line = Table::new(&["x", "re_f", "im_f"]);
    for k in 0..=count {
        let x = -reach + k as f64 * step;
        let [fr, fi] = c3(f.eval(Complex64::new(x, 0.0))?);
        line.push(vec![fmt_f64(x), fr, fi]);
    }
    run.csv("interpolant.csv", &line);
    let a = &mut run.art;
    a.result("node_residual_max", fmt_f64(rep.node_residuals));
    a.result("norm_ratio", fmt_f64(rep.norm_ratio));
    a.result("data_norm", fmt_f64(rep.data_norm));
    a.result("interpolant_norm", fmt_f64(rep.line_norm.norm()));
    a.result("truncation_radius", fmt_f64(rep.line_norm.truncation_radius));
    a.result("achieved_bandwidth", fmt_f64(rep.achieved_bandwidth));
    Ok(())
}

pub fn norm_study(run: &mut Run) -> Result<(), CliError> {
    run.allow(&[SEQ_KEYS, &["p", "epsilon", "trials", "member.*"]])?;
    let p = exponent(run.cfg, "p", 2.0)?;
    let eps = positive(run.cfg, "epsilon", None)?;
    let trials: usize = run.cfg.parse_or("trials", 20)?;
    if trials < 10 {
        return Err(CliError::Range(format!("trials must be at least 10, got {trials}")));
    }
    let seq = sequence(run, p)?;
    let fam = family(run, &seq)?;
    let h = build_multiplier(eps)?;
    let s = norm_stability_study(&seq, &fam, &h, trials, p, run.seed)?;
    let mut t = Table::new(&["trial", "ratio"]);
    for (k, r) in s.ratios.iter().enumerate() {
        t.push(vec![k.to_string(), fmt_f64(*r)]);
    }
    run.csv("ratios.csv", &t);
    if let Some(v) = &s.extremal_data {
        let mut e = Table::new(&["index", "re_a", "im_a"]);
        for (k, a) in v.iter().enumerate() {
            let [re, im] = c3(*a);
            e.push(vec![k.to_string(), re, im]);
        }
        run.csv("extremal.csv", &e);
    }
    let a = &mut run.art;
    a.result("trials", trials);
    a.result("ratio_min", fmt_f64(s.min));
    a.result("ratio_median", fmt_f64(s.median));
    a.result("ratio_max", fmt_f64(s.max));
    a.result("max_over_median", fmt_f64(s.max / s.median));
    a.result("max_node_residual", fmt_f64(s.max_residual));
    if let Some(n) = s.operator_norm {
        a.result("operator_norm", fmt_f64(n));
    }
    a.result("truncation_radius", fmt_f64(s.truncation_radius));
    Ok(())
}

pub fn mcphail_check(run: &mut Run) -> Result<(), CliError> {
    run.allow(&[SEQ_KEYS, HP_KEYS, &["p", "q", "weights", "threshold", "tau"]])?;
    let q = exponent(run.cfg, "q", 2.0)?;
    let p = exponent(run.cfg, "p", 2.0)?;
    let threshold = positive(run.cfg, "threshold", Some(DEFAULT_MQ_THRESHOLD))?;
    let tau: f64 = run.cfg.parse_or("tau", 0.0)?;
    if !(tau.is_finite() && tau >= 0.0) {
        return Err(CliError::Range(format!("tau must be nonnegative, got {tau}")));
    }
    let seq = sequence(run, p)?;
    let weights = if run.cfg.get("weights").is_some() {
        let (path, text) = run.read("weights")?;
        io::parse_weights(&text, seq.len()).map_err(file_err(&path))?
    } else {
        vec![1.0; seq.len()]
    };
    let hp = half_plane(run.cfg, &seq)?;
    let adapted = pw_weight_adaptation(&seq, &weights, tau, hp.offset, hp.side, q)?;
    let pair = &adapted.pair;
    let nu = mcphail_measure(pair)?;
    let check = mq_check(pair, threshold)?;
    let log_theta = if pair.is_empty() {
        Vec::new()
    } else {
        log_carleson_products(pair.sequence(), hp)?
    };
    let mut t = Table::new(&["index", "re", "im", "omega", "theta", "mass"]);
    for (j, &k) in adapted.indices.iter().enumerate() {
        let [re, im] = c3(nu.atoms()[j].0);
        t.push(vec![
            k.to_string(),
            re,
            im,
            fmt_f64(pair.weights()[j]),
            fmt_f64(log_theta[j].exp()),
            fmt_f64(nu.atoms()[j].1),
        ]);
    }
    run.csv("measure.csv", &t);
    let a = &mut run.art;
    a.result("half_plane", format!("{:?} a={}", hp.side, fmt_f64(hp.offset)));
    a.result("nodes_used", adapted.indices.len());
    a.result("nodes_excluded", format!("{:?}", adapted.excluded));
    a.result("mq_constant", fmt_f64(check.constant));
    a.result("threshold", fmt_f64(check.threshold));
    a.result("satisfied", check.satisfied);
    if !pair.is_empty() && pair.len() <= ORACLE_MAX_NODES {
        let o = solvability_oracle(pair, 2.0)?;
        a.result("oracle_norm", fmt_f64(o.operator_norm));
        a.result("oracle_condition", fmt_f64(o.condition));
        a.result("oracle_regularized", o.regularized);
    }
    Ok(())
}

fn system(run: &mut Run) -> Result<DiagonalSystem, CliError> {
    let (path, text) = run.read("system")?;
    io::parse_system(&text).map_err(file_err(&path))
}

fn control_problem(run: &mut Run, sys: &DiagonalSystem) -> Result<Option<ControlProblem>, CliError> {
    if run.cfg.get("problem").is_none() {
        return Ok(None);
    }
    let (path, text) = run.read("problem")?;
    let p = io::parse_control_problem(&text).map_err(file_err(&path))?;
    if p.x0.len() != sys.len() {
        return Err(CliError::Config(format!(
            "problem has {} modes, system {}",
            p.x0.len(),
            sys.len()
        )));
    }
    Ok(Some(p))
}

fn state_table(sys_len: usize) -> Table {
    let mut header = vec!["t".to_string()];
    for k in 1..=sys_len {
        header.push(format!("re_x{k}"));
        header.push(format!("im_x{k}"));
    }
    Table {
        header,
        rows: Vec::new(),
    }
}

pub fn control_solve(run: &mut Run) -> Result<(), CliError> {
    run.allow(&[&["system", "problem", "tau", "target"]])?;
    let sys = system(run)?;
    let prob = match control_problem(run, &sys)? {
        Some(p) => p,
        None => {
            let tau = positive(run.cfg, "tau", None)?;
            let k: usize = run.cfg.parse_or("target", 1)?;
            if k == 0 || k > sys.len() {
                return Err(CliError::Range(format!("target mode must be in 1..={}", sys.len())));
            }
            let mut x1 = vec![Complex64::new(0.0, 0.0); sys.len()];
            x1[k - 1] = Complex64::new(1.0, 0.0);
            ControlProblem::new(vec![Complex64::new(0.0, 0.0); sys.len()], x1, Horizon::Finite(tau))?
        }
    };
    let sol = min_norm_control(&sys, &prob)?;
    let traj = simulate(&sys, &sol.signal, &prob.x0)?;
    let err = traj
        .endpoint
        .iter()
        .zip(&prob.x1)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    let signal = io::format_signal(&sol.signal);
    run.art
        .file("signal.csv", with_provenance(run.command, run.seed, signal));
    let mut m = Table::new(&["mode", "re_moment", "im_moment"]);
    let active: Vec<usize> = (0..sys.len()).filter(|k| !sol.skipped_modes.contains(k)).collect();
    for (j, &k) in active.iter().enumerate() {
        let [re, im] = c3(sol.moments[j]);
        m.push(vec![(k + 1).to_string(), re, im]);
    }
    run.csv("moments.csv", &m);
    let a = &mut run.art;
    a.result("modes", sys.len());
    a.result("samples", DEFAULT_SAMPLES);
    a.result("control_norm", fmt_f64(sol.signal.norm()));
    a.result("control_norm_sqr", fmt_f64(sol.signal.norm().powi(2)));
    a.result("gram_norm_sqr", fmt_f64(sol.gram_norm_sqr));
    a.result("gram_condition", fmt_f64(sol.condition));
    a.result("regularized", sol.regularized);
    a.result("moment_residual", fmt_f64(sol.moment_residual));
    a.result("simulated_endpoint_error", fmt_f64(err));
    Ok(())
}

pub fn control_simulate(run: &mut Run) -> Result<(), CliError> {
    run.allow(&[&["system", "problem", "signal", "tau", "samples"]])?;
    let sys = system(run)?;
    let prob = control_problem(run, &sys)?;
    let (u, zero_input) = if run.cfg.get("signal").is_some() {
        let (path, text) = run.read("signal")?;
        (io::parse_signal(&text).map_err(file_err(&path))?, false)
    } else {
        let tau = match prob.as_ref().map(|p| p.horizon) {
            Some(Horizon::Finite(t)) => run.cfg.parse_or("tau", t)?,
            _ => positive(run.cfg, "tau", None)?,
        };
        (ControlSignal::zero(tau, run.cfg.parse_or("samples", 65)?)?, true)
    };
    let x0 = prob
        .as_ref()
        .map(|p| p.x0.clone())
        .unwrap_or_else(|| vec![Complex64::new(0.0, 0.0); sys.len()]);
    let traj = simulate(&sys, &u, &x0)?;
    let mut t = state_table(sys.len());
    for (time, x) in traj.times.iter().zip(&traj.states) {
        let mut row = vec![fmt_f64(*time)];
        for v in x {
            row.extend(c3(*v));
        }
        t.push(row);
    }
    run.csv("trajectory.csv", &t);
    let a = &mut run.art;
    a.result("panels", traj.panels);
    a.result("endpoint_change", fmt_f64(traj.endpoint_change));
    for (k, v) in traj.endpoint.iter().enumerate() {
        a.result(
            &format!("endpoint.{}", k + 1),
            format!("{} {}", fmt_f64(v.re), fmt_f64(v.im)),
        );
    }
    if let Some(p) = &prob {
        let err = traj
            .endpoint
            .iter()
            .zip(&p.x1)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        a.result("endpoint_error", fmt_f64(err));
    }
    if zero_input {
        a.result("free_decay_ratio", fmt_f64(free_decay_ratio(&traj, sys.alpha())));
    }
    Ok(())
}

pub fn control_report(run: &mut Run) -> Result<(), CliError> {
    run.allow(&[&["system", "tau", "sweep", "threshold"]])?;
    let sys = system(run)?;
    let tau = positive(run.cfg, "tau", None)?;
    let threshold = positive(run.cfg, "threshold", Some(DEFAULT_MQ_THRESHOLD))?;
    let sweep = run.cfg.float_list("sweep")?.unwrap_or_else(|| vec![0.5, 1.0, 2.0, 4.0]);
    if sweep.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
        return Err(CliError::Range("sweep horizons must be positive".into()));
    }
    let r = controllability_report(&sys, tau, &sweep, threshold)?;
    let mut c = Table::new(&["tau", "condition"]);
    for &(t, k) in &r.condition_profile {
        c.push(vec![fmt_f64(t), fmt_f64(k)]);
    }
    run.csv("conditions.csv", &c);
    let mut o = Table::new(&["mode", "control_norm"]);
    for (k, n) in r.oscillation_norms.iter().enumerate() {
        o.push(vec![(k + 1).to_string(), fmt_f64(*n)]);
    }
    run.csv("oscillation.csv", &o);
    let nonincreasing = r.condition_profile.windows(2).all(|w| w[1].1 <= w[0].1);
    let a = &mut run.art;
    a.result("infinite_horizon_constant", fmt_f64(r.infinite_horizon.constant));
    a.result("infinite_horizon_satisfied", r.infinite_horizon.satisfied);
    a.result("finite_horizon_constant", fmt_f64(r.finite_horizon.constant));
    a.result("finite_horizon_satisfied", r.finite_horizon.satisfied);
    a.result("condition_nonincreasing", nonincreasing);
    a.result(
        "max_oscillation_norm",
        fmt_f64(r.oscillation_norms.iter().copied().fold(0.0, f64::max)),
    );
    Ok(())
}

pub fn dispatch(run: &mut Run) -> Result<(), CliError> {
    match run.command {
        "analyze-sequence" => analyze_sequence(run),
        "density" => density(run),
        "carleson-measure" => carleson_measure(run),
        "build-multiplier" => build_multiplier_cmd(run),
        "multiplier-probe" => multiplier_probe(run),
        "build-family" => build_family(run),
        "solve-interpolation" => solve_interpolation_cmd(run),
        "norm-study" => norm_study(run),
        "mcphail-check" => mcphail_check(run),
        "control-solve" => control_solve(run),
        "control-simulate" => control_simulate(run),
        "control-report" => control_report(run),
        other => Err(CliError::Usage(format!("unknown command {other:?}"))),
    }
}
