use serde::Serialize;
use tractorforms::factory::{build_l_definition, closed_factors, FactorCase};
use tractorforms::{FormContext, Monomial, OperatorPoly, Proportionality, RatJ};

use crate::{CliError, ExpandArgs, Format, Result};

pub const EXPAND_SCHEMA: &str = "tractorforms.expand/1";

#[derive(Debug, Serialize)]
pub struct Expansion {
    pub schema: &'static str,
    pub n: u32,
    pub k: u32,
    pub ell: u32,
    pub w: String,
    pub case: FactorCase,
    pub definition: String,
    pub factors: Vec<String>,
    /// `c` with factored = c · definition.
    pub constant: String,
    pub shape: String,
}

/// The definition rescaled to a unit leading coefficient, written in `dδ`
/// and `δd`.
pub fn shape(def: &OperatorPoly, ell: u32) -> Result<String> {
    let lead = [Monomial::E(ell), Monomial::F(ell)]
        .into_iter()
        .map(|m| def.coefficient(m))
        .find(|c| !c.is_zero())
        .or_else(|| def.terms().into_iter().next().map(|t| t.1))
        .ok_or_else(|| CliError::Failed("definition vanishes".into()))?;
    let unit = def.scale(&lead.inv()?);
    let text = unit
        .to_text()
        .replace("E^", "(dδ)^")
        .replace("F^", "(δd)^")
        .replace('E', "dδ")
        .replace('F', "δd")
        .replace(" - ", " − ");
    let text = match text.strip_prefix('-') {
        Some(rest) => format!("−{rest}"),
        None => text,
    };
    Ok(format!("∼ {text}"))
}

pub fn expansion(n: u32, k: u32, ell: u32) -> Result<Expansion> {
    let ctx = FormContext::for_order(n, k, ell)?;
    let def = build_l_definition(n, k, ell)?;
    let factored = closed_factors(n, k, ell)?;
    let c = match factored.product()?.proportionality(&def)? {
        Proportionality::Scalar(c) => c,
        Proportionality::Zero => RatJ::zero(),
        Proportionality::NotProportional => {
            return Err(CliError::Failed(format!(
                "definition {} is not proportional to {}",
                def.to_text(),
                factored.to_text()
            )))
        }
    };
    Ok(Expansion {
        schema: EXPAND_SCHEMA,
        n,
        k,
        ell,
        w: ctx.w.to_string(),
        case: factored.case,
        definition: def.to_text(),
        factors: factored.factors.iter().map(|f| f.to_text()).collect(),
        constant: c.to_string(),
        shape: shape(&def, ell)?,
    })
}

pub fn run(a: &ExpandArgs) -> Result<()> {
    let x = expansion(a.n, a.k, a.ell)?;
    match a.format {
        Format::Json => {
            println!("{}", serde_json::to_string_pretty(&x).map_err(|e| CliError::Io(e.to_string()))?);
        }
        Format::Text => {
            println!("L_{}^{} on E^{}[{}], n = {}", x.k, x.ell, x.k, x.w, x.n);
            println!("definition: {}", x.definition);
            let factors: Vec<String> = x.factors.iter().map(|f| format!("[{f}]")).collect();
            println!("factored:   {}", factors.join(" "));
            println!("c = {}  (factored = c · definition)", x.constant);
            println!("shape:      {}", x.shape);
        }
        Format::Latex => {
            let def = build_l_definition(a.n, a.k, a.ell)?;
            let factored = closed_factors(a.n, a.k, a.ell)?;
            println!("L_{{{}}}^{{{}}} &= {} \\\\", a.k, a.ell, def.to_latex());
            let c: RatJ = x.constant.parse()?;
            let c = OperatorPoly::constant(def.context(), c).to_latex();
            println!("{} &= {c} \\, L_{{{}}}^{{{}}}", factored.to_latex(), a.k, a.ell);
        }
    }
    Ok(())
}
