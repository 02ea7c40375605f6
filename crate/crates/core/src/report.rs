//! Text renderings of ladder rows, census reports and limit sweeps.

use std::fmt::Write as _;

use num_bigint::BigUint;
use serde::Serializer;

use crate::approximations::RateLadder;
use crate::limits::OptimalRate;
use crate::types::CensusReport;

pub(crate) fn serialize_biguint<S: Serializer>(x: &BigUint, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&x.to_str_radix(10))
}

pub(crate) fn serialize_opt_biguint<S: Serializer>(
    x: &Option<BigUint>,
    s: S,
) -> Result<S::Ok, S::Error> {
    match x {
        Some(x) => serialize_biguint(x, s),
        None => s.serialize_none(),
    }
}

fn cell(x: Option<f64>) -> String {
    x.map(|v| format!("{v:.6}")).unwrap_or_default()
}

pub const LADDER_CSV_HEADER: &str = "n,epsilon,delta,exact,shannon,strassen,blahut,pragmatic";

pub fn ladder_csv(rows: &[RateLadder]) -> String {
    let mut out = String::from(LADDER_CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{:.6},{},{:.6},{:.6},{},{}",
            r.n,
            r.epsilon,
            r.delta,
            cell(r.exact),
            r.shannon,
            r.strassen,
            cell(r.blahut),
            cell(r.pragmatic)
        );
    }
    out
}

/// Markdown table with three decimals; missing cells print as a dash.
pub fn ladder_markdown(rows: &[RateLadder]) -> String {
    let md = |x: Option<f64>| x.map(|v| format!("{v:.3}")).unwrap_or_else(|| "—".into());
    let mut out = String::from(
        "| n | ε | Exact | Shannon | Strassen | Blahut | Pragmatic |\n\
         |---|---|---|---|---|---|---|\n",
    );
    for r in rows {
        let _ = writeln!(
            out,
            "| {} | {} | {} | {} | {} | {} | {} |",
            r.n,
            r.epsilon,
            md(r.exact),
            md(Some(r.shannon)),
            md(Some(r.strassen)),
            md(r.blahut),
            md(r.pragmatic)
        );
    }
    out
}

pub const CENSUS_CSV_HEADER: &str = "n,threshold_bits,log2_count,theta_ratio";

pub fn census_csv(rows: &[CensusReport]) -> String {
    let mut out = String::from(CENSUS_CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{:.9},{:.9},{:.9}",
            r.n, r.threshold_bits, r.log2_count, r.theta_ratio
        );
    }
    out
}

pub const LIMITS_CSV_HEADER: &str = "n,epsilon,L_star,rate";

pub fn limits_csv(rows: &[(f64, OptimalRate)]) -> String {
    let mut out = String::from(LIMITS_CSV_HEADER);
    out.push('\n');
    for (eps, r) in rows {
        let _ = writeln!(out, "{},{},{},{:.9}", r.n, eps, r.l_star, r.rate);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::approximations::{ladder_row, CodeMode};
    use crate::distributions::SourcePmf;

    #[test]
    fn ladder_renderings() {
        let p = SourcePmf::bernoulli(0.11).unwrap();
        let row = ladder_row(&p, 50, 1e-3, CodeMode::OneToOne, None, true).unwrap();
        let csv = ladder_csv(std::slice::from_ref(&row));
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some(LADDER_CSV_HEADER));
        assert_eq!(lines.next().unwrap().split(',').count(), 8);
        let md = ladder_markdown(&[row]);
        assert!(md.lines().nth(2).unwrap().starts_with("| 50 | 0.001 |"));
    }

    #[test]
    fn uniform_ladder_has_dashes() {
        let p = SourcePmf::uniform(2).unwrap();
        let row = ladder_row(&p, 20, 1e-2, CodeMode::OneToOne, None, false).unwrap();
        let md = ladder_markdown(&[row]);
        assert_eq!(md.matches('—').count(), 3);
    }

    #[test]
    fn biguint_serializes_as_string() {
        #[derive(serde::Serialize)]
        struct W {
            #[serde(serialize_with = "serialize_biguint")]
            x: BigUint,
        }
        let big = BigUint::from(2u32).pow(80);
        let s = serde_json::to_string(&W { x: big }).unwrap();
        assert_eq!(s, r#"{"x":"1208925819614629174706176"}"#);
    }
}
