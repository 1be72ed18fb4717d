use evalexpr::{build_operator_tree, ContextWithMutableVariables, DefaultNumericTypes, HashMapContext, Node, Value};

use cursed_sig::spence::CostFunction;
use cursed_sig::Error;

/// Parses `linear`, `quadratic`, `power:K`, or an expression in `e` and
/// `theta` such as `e^2/theta + 0.5*e/theta`.
pub fn parse_cost(spec: &str) -> Result<CostFunction, Error> {
    let s = spec.trim();
    match s {
        "linear" => return Ok(CostFunction::Linear),
        "quadratic" => return Ok(CostFunction::Quadratic),
        _ => {}
    }
    if let Some(k) = s.strip_prefix("power:") {
        let k: f64 = k
            .trim()
            .parse()
            .map_err(|_| Error::InvalidInput(format!("bad exponent in cost {spec:?}")))?;
        return Ok(CostFunction::Power(k));
    }
    let tree: Node<DefaultNumericTypes> =
        build_operator_tree(s).map_err(|e| Error::InvalidInput(format!("cannot parse cost {spec:?}: {e}")))?;
    for name in tree.iter_variable_identifiers() {
        if name != "e" && name != "theta" {
            return Err(Error::InvalidInput(format!("cost {spec:?} uses unknown variable {name:?}; only e and theta are allowed")));
        }
    }
    probe(&tree, spec)?;
    Ok(CostFunction::custom(move |e, theta| eval(&tree, e, theta).unwrap_or(f64::NAN)))
}

fn eval(tree: &Node<DefaultNumericTypes>, e: f64, theta: f64) -> Option<f64> {
    let mut ctx = HashMapContext::<DefaultNumericTypes>::new();
    ctx.set_value("e".into(), Value::Float(e)).ok()?;
    ctx.set_value("theta".into(), Value::Float(theta)).ok()?;
    tree.eval_number_with_context(&ctx).ok()
}

fn probe(tree: &Node<DefaultNumericTypes>, spec: &str) -> Result<(), Error> {
    let mut ctx = HashMapContext::<DefaultNumericTypes>::new();
    ctx.set_value("e".into(), Value::Float(1.0)).expect("plain variable");
    ctx.set_value("theta".into(), Value::Float(1.0)).expect("plain variable");
    tree.eval_number_with_context(&ctx)
        .map(|_| ())
        .map_err(|err| Error::InvalidInput(format!("cost {spec:?} does not evaluate to a number: {err}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins_and_expressions() {
        assert!(matches!(parse_cost("linear").unwrap(), CostFunction::Linear));
        assert!(matches!(parse_cost("power:2.5").unwrap(), CostFunction::Power(k) if k == 2.5));
        let c = parse_cost("e^2/theta + e").unwrap();
        assert!((c.eval(2.0, 4.0) - 3.0).abs() < 1e-15);
        assert!(parse_cost("e * x").is_err());
        assert!(parse_cost("e +").is_err());
        assert!(parse_cost("power:abc").is_err());
    }
}
