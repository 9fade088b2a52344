//! Command-line function specs such as `poly:[0,1]` or `tab:@values.json`.

use std::fs;

use anyhow::{bail, Context, Result};
use opmeasure::json::{from_cx_vec, Cx};
use opmeasure::measurable::{AtomIds, FunctionSpec};

fn json<T: serde::de::DeserializeOwned>(text: &str, what: &str) -> Result<T> {
    serde_json::from_str(text.trim()).with_context(|| format!("cannot parse {what} `{text}`"))
}

fn scalars(text: &str) -> Result<Vec<opmeasure::linalg::C>> {
    Ok(from_cx_vec(&json::<Vec<Cx>>(text, "coefficient list")?))
}

/// Parses `poly:[c0,c1,…]`, `exp:a`, `const:c`, `indicator:[atoms]` or `indicator:a,b`,
/// `tab:[v0,…]`, `tab:@file`, `abs:<spec>`, `re:<spec>`, or a JSON function object.
pub fn parse(text: &str) -> Result<FunctionSpec> {
    let text = text.trim();
    if text.starts_with('{') {
        return json(text, "function object");
    }
    let Some((head, body)) = text.split_once(':') else {
        bail!("function spec `{text}` lacks a `kind:` prefix");
    };
    Ok(match head {
        "poly" => FunctionSpec::Poly(scalars(body)?),
        "exp" => FunctionSpec::Exp(json::<Cx>(body, "exponent")?.0),
        "const" => FunctionSpec::Constant(json::<Cx>(body, "constant")?.0),
        "indicator" => {
            let ids = if body.trim_start().starts_with('[') {
                json::<AtomIds>(body, "atom list")?.0
            } else {
                body.split(',').map(str::trim).filter(|s| !s.is_empty()).map(str::to_string).collect()
            };
            FunctionSpec::Indicator(ids)
        }
        "tab" => match body.strip_prefix('@') {
            Some(path) => {
                let content = fs::read_to_string(path).with_context(|| format!("cannot read {path}"))?;
                FunctionSpec::Tabulated(scalars(&content)?)
            }
            None => FunctionSpec::Tabulated(scalars(body)?),
        },
        "abs" => FunctionSpec::Modulus(Box::new(parse(body)?)),
        "re" => FunctionSpec::RealPart(Box::new(parse(body)?)),
        other => bail!("unknown function kind `{other}`"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use opmeasure::linalg::C;

    #[test]
    fn parses_every_form() {
        assert_eq!(parse("poly:[0,1]").unwrap(), FunctionSpec::Poly(vec![C::new(0.0, 0.0), C::new(1.0, 0.0)]));
        assert_eq!(parse("exp:[0,2]").unwrap(), FunctionSpec::Exp(C::new(0.0, 2.0)));
        assert_eq!(parse("const:3").unwrap(), FunctionSpec::Constant(C::new(3.0, 0.0)));
        assert_eq!(parse("indicator:a, b").unwrap(), FunctionSpec::Indicator(vec!["a".into(), "b".into()]));
        assert_eq!(parse("indicator:[0,\"x\"]").unwrap(), FunctionSpec::Indicator(vec!["0".into(), "x".into()]));
        assert_eq!(parse("tab:[1,[0,1]]").unwrap(), FunctionSpec::Tabulated(vec![C::new(1.0, 0.0), C::new(0.0, 1.0)]));
        assert_eq!(
            parse("abs:re:poly:[1]").unwrap(),
            FunctionSpec::Modulus(Box::new(FunctionSpec::RealPart(Box::new(FunctionSpec::Poly(vec![C::new(1.0, 0.0)])))))
        );
    }

    #[test]
    fn json_objects_round_trip() {
        let spec = parse("exp:0.5").unwrap();
        let text = serde_json::to_string(&spec).unwrap();
        assert_eq!(parse(&text).unwrap(), spec);
    }

    #[test]
    fn rejects_garbage() {
        for bad in ["poly", "poly:[a]", "sin:1", "tab:@/nonexistent/file", "exp:"] {
            assert!(parse(bad).is_err(), "{bad}");
        }
    }
}
