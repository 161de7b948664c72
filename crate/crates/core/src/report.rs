//! CSV encodings shared by the command-line tool and the browser demo.

use serde::Deserialize;
use thiserror::Error;

use crate::channelsim::BerPoint;
use crate::metrics::CdfSeries;
use crate::phykeygen::SchemeRow;

pub const BER_HEADER: &str = "ebn0_db,ber,bits,errors";
pub const PHYKEY_HEADER: &str = "scheme,snr_db,kdp,kgr,monobit_p";
pub const CDF_HEADER: &str = "bitrate,cdf";

#[derive(Debug, Error)]
pub enum CsvError {
    #[error("expected header {expected:?}, found {found:?}")]
    Header { expected: &'static str, found: String },
    #[error(transparent)]
    Parse(#[from] csv::Error),
}

/// Formats with 10 significant digits, `%.10g` style: trailing zeros are
/// trimmed and scientific notation is used for exponents below -4 or above 9.
pub fn format_sig(x: f64) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.9e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..10).contains(&exp) {
        let mantissa = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (9 - exp) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn ber_csv(points: &[BerPoint]) -> String {
    let mut out = format!("{BER_HEADER}\n");
    for p in points {
        out.push_str(&format!(
            "{},{},{},{}\n",
            format_sig(p.ebn0_db),
            format_sig(p.ber),
            p.bits_simulated,
            p.errors
        ));
    }
    out
}

#[derive(Deserialize)]
struct BerRecord {
    ebn0_db: f64,
    ber: f64,
    bits: u64,
    errors: u64,
}

pub fn parse_ber_csv(text: &str) -> Result<Vec<BerPoint>, CsvError> {
    let first = text.lines().next().unwrap_or("").trim_end_matches('\r');
    if first != BER_HEADER {
        return Err(CsvError::Header {
            expected: BER_HEADER,
            found: first.to_string(),
        });
    }
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    reader
        .deserialize::<BerRecord>()
        .map(|r| {
            let r = r?;
            Ok(BerPoint {
                ebn0_db: r.ebn0_db,
                bits_simulated: r.bits,
                errors: r.errors,
                ber: r.ber,
            })
        })
        .collect()
}

pub fn phykey_csv(rows: &[SchemeRow]) -> String {
    let mut out = format!("{PHYKEY_HEADER}\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.scheme,
            format_sig(r.snr_db),
            format_sig(r.metrics.kdp),
            format_sig(r.metrics.kgr),
            format_sig(r.metrics.monobit_p)
        ));
    }
    out
}

pub fn cdf_csv(cdf: &CdfSeries) -> String {
    let mut out = format!("{CDF_HEADER}\n");
    for &(v, p) in &cdf.points {
        out.push_str(&format!("{},{}\n", format_sig(v), format_sig(p)));
    }
    out
}
