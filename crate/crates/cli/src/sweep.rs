use std::collections::BTreeMap;

use serde::Serialize;
use tractorforms::coeff::parse_rational;
use tractorforms::spectral::SpectralModel;
use tractorforms::verify::{run_sweep, verify_kernel_decomposition, Params, Status, SweepSpec, TheoremId, VerificationReport, Witness};
use tractorforms::{Half, Rational};

use crate::output::{Envelope, OutFile};
use crate::{CliError, Format, Result, VerifyArgs};

#[derive(Clone, Debug, Serialize)]
pub struct SweepConfig {
    #[serde(flatten)]
    pub spec: SweepSpec,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct Counts {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
    pub skipped: usize,
}

impl Counts {
    fn add(&mut self, s: Status) {
        self.total += 1;
        match s {
            Status::Pass => self.passed += 1,
            Status::Fail => self.failed += 1,
            Status::Skipped => self.skipped += 1,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Summary {
    #[serde(flatten)]
    pub all: Counts,
    pub by_theorem: BTreeMap<String, Counts>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepReport {
    pub config: SweepConfig,
    pub summary: Summary,
    pub results: Vec<VerificationReport>,
}

fn summarize(results: &[VerificationReport]) -> Summary {
    let mut all = Counts::default();
    let mut by_theorem: BTreeMap<String, Counts> = BTreeMap::new();
    for r in results {
        all.add(r.status);
        by_theorem.entry(r.theorem.name().to_string()).or_default().add(r.status);
    }
    Summary { all, by_theorem }
}

fn parse_half(s: &str, flag: &str) -> Result<Half> {
    s.parse().map_err(|e| CliError::Usage(format!("{flag}: {e}")))
}

pub fn config(a: &VerifyArgs) -> Result<SweepConfig> {
    if a.n_min < 3 || a.n_min > a.n_max {
        return Err(CliError::Usage(format!("need 3 ≤ n-min ≤ n-max, got {}..{}", a.n_min, a.n_max)));
    }
    if a.k_min < 1 || a.k_min > a.k_max {
        return Err(CliError::Usage(format!("need 1 ≤ k-min ≤ k-max, got {}..{}", a.k_min, a.k_max)));
    }
    if a.ell_min < 1 || a.ell_min > a.ell_max {
        return Err(CliError::Usage(format!("need 1 ≤ ell-min ≤ ell-max, got {}..{}", a.ell_min, a.ell_max)));
    }
    let mut theorems = Vec::new();
    for name in a.theorems.iter().map(|s| s.trim()).filter(|s| !s.is_empty()) {
        let t = TheoremId::parse(name).ok_or_else(|| {
            let known: Vec<_> = TheoremId::ALL.iter().map(|t| t.name()).collect();
            CliError::Usage(format!("unknown theorem `{name}`; known: {}", known.join(", ")))
        })?;
        if !theorems.contains(&t) {
            theorems.push(t);
        }
    }
    if theorems.is_empty() && a.model.is_none() {
        theorems = TheoremId::ALL.to_vec();
    }
    let j_value: Rational = parse_rational(&a.j_value).map_err(|e| CliError::Usage(format!("--j-value: {e}")))?;
    let w_min = parse_half(&a.w_min, "--w-min")?;
    let w_max = parse_half(&a.w_max, "--w-max")?;
    if w_min.twice() > w_max.twice() {
        return Err(CliError::Usage(format!("empty weight range {w_min}..{w_max}")));
    }
    let spec = SweepSpec {
        n_min: a.n_min,
        n_max: a.n_max,
        k_min: a.k_min,
        k_max: a.k_max,
        ell_min: a.ell_min,
        ell_max: a.ell_max,
        theorems,
        j_value,
        w_twice_min: w_min.twice(),
        w_twice_max: w_max.twice(),
    };
    Ok(SweepConfig { spec, model: a.model.as_ref().map(|p| p.display().to_string()) })
}

/// Kernel decomposition on a model file for every ℓ in range.
fn model_checks(model: &SpectralModel, spec: &SweepSpec) -> Vec<VerificationReport> {
    (spec.ell_min..=spec.ell_max)
        .map(|ell| {
            verify_kernel_decomposition(model.n, model.k, ell, model).unwrap_or_else(|e| VerificationReport {
                theorem: TheoremId::KernelDecomposition,
                params: Params { n: model.n, k: model.k, ell: Some(ell), ..Default::default() },
                status: Status::Fail,
                witness: Witness::Note { text: format!("error: {e}") },
            })
        })
        .collect()
}

pub fn report(cfg: &SweepConfig, model: Option<&SpectralModel>) -> SweepReport {
    let mut results = run_sweep(&cfg.spec);
    if let Some(m) = model {
        results.extend(model_checks(m, &cfg.spec));
    }
    SweepReport { config: cfg.clone(), summary: summarize(&results), results }
}

fn describe(p: &Params) -> String {
    let mut s = format!("n={} k={}", p.n, p.k);
    if let Some(l) = p.ell {
        s += &format!(" ell={l}");
    }
    if let Some(v) = p.p {
        s += &format!(" p={v}");
    }
    if let Some(w) = p.w {
        s += &format!(" w={w}");
    }
    if let Some((t, u)) = p.pair {
        s += &format!(" pair=({t},{u})");
    }
    s
}

fn witness_text(w: &Witness) -> String {
    match w {
        Witness::None => String::new(),
        Witness::Constant { value } => format!("c = {value}"),
        Witness::Bezout { phi_t, phi_u } => format!("φ_t = {phi_t}; φ_u = {phi_u}"),
        Witness::Counterexample { monomial, lhs, rhs } => format!("at {monomial}: {lhs} ≠ {rhs}"),
        Witness::Kernel { dim_kernel, dim_sum, mismatches } => {
            let mut s = format!("dim N = {dim_kernel}, Σ dim N(S_i) = {dim_sum}");
            if !mismatches.is_empty() {
                s += &format!("; {}", mismatches.join("; "));
            }
            s
        }
        Witness::Note { text } => text.clone(),
    }
}

fn status_word(s: Status) -> &'static str {
    match s {
        Status::Pass => "PASS",
        Status::Fail => "FAIL",
        Status::Skipped => "SKIP",
    }
}

pub fn render_text(r: &SweepReport) -> String {
    let mut out = String::new();
    for x in &r.results {
        out += &format!("{} {} {} {}\n", status_word(x.status), x.theorem.name(), describe(&x.params), witness_text(&x.witness))
            .replace(" \n", "\n");
    }
    let s = &r.summary.all;
    out += &format!("{} checks: {} passed, {} failed, {} skipped\n", s.total, s.passed, s.failed, s.skipped);
    out
}

fn latex_escape(s: &str) -> String {
    s.replace('\\', "\\textbackslash{}").replace('_', "\\_").replace('&', "\\&").replace('^', "\\^{}")
}

pub fn render_latex(r: &SweepReport) -> String {
    let mut out = String::from("\\begin{tabular}{llll}\n\\hline\nstatus & check & parameters & witness \\\\\n\\hline\n");
    for x in &r.results {
        out += &format!(
            "{} & {} & {} & {} \\\\\n",
            status_word(x.status),
            x.theorem.name(),
            latex_escape(&describe(&x.params)),
            latex_escape(&witness_text(&x.witness))
        );
    }
    out += "\\hline\n\\end{tabular}\n";
    out
}

pub fn run(a: &VerifyArgs) -> Result<()> {
    let cfg = config(a)?;
    let model = match &a.model {
        Some(p) => Some(SpectralModel::read(p).map_err(|e| CliError::Io(format!("cannot read model {}: {e}", p.display())))?),
        None => None,
    };
    let out = OutFile::create_opt(a.output.as_ref())?;
    let rep = report(&cfg, model.as_ref());
    let rendered = match a.format {
        Format::Json => Envelope::new(tractorforms::verify::REPORT_SCHEMA, &rep).to_json()?,
        Format::Text => render_text(&rep),
        Format::Latex => render_latex(&rep),
    };
    let s = &rep.summary.all;
    match out {
        Some(f) => {
            let path = f.path().display().to_string();
            f.write(&rendered)?;
            for x in rep.results.iter().filter(|x| x.status == Status::Fail) {
                eprintln!("FAIL {} {} {}", x.theorem.name(), describe(&x.params), witness_text(&x.witness));
            }
            println!("{} checks: {} passed, {} failed, {} skipped; report written to {path}", s.total, s.passed, s.failed, s.skipped);
        }
        None => print!("{rendered}"),
    }
    if s.failed > 0 {
        return Err(CliError::Failed(format!("{} of {} checks failed", s.failed, s.total)));
    }
    Ok(())
}
