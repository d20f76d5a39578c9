use std::str::FromStr;

/// Inclusive integer range written as `a`, `a..b`, `a..b:step` or `a,b,c`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Span(pub Vec<u64>);

impl FromStr for Span {
    type Err = String;

    fn from_str(s: &str) -> Result<Span, String> {
        let num = |x: &str| x.trim().parse::<u64>().map_err(|e| format!("{x:?}: {e}"));
        if s.contains(',') {
            return s.split(',').map(num).collect::<Result<_, _>>().map(Span);
        }
        let Some((lo, rest)) = s.split_once("..") else {
            return Ok(Span(vec![num(s)?]));
        };
        let (hi, step) = match rest.split_once(':') {
            Some((hi, step)) => (hi, num(step)?),
            None => (rest, 1),
        };
        let (lo, hi) = (num(lo)?, num(hi.trim_start_matches('='))?);
        if step == 0 || hi < lo {
            return Err(format!("empty range {s:?}"));
        }
        Ok(Span((lo..=hi).step_by(step as usize).collect()))
    }
}
