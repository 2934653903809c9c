use std::fmt::Write as _;

use num_complex::Complex64;

use super::{NetworkSpec, Value};

fn real(x: f64) -> String {
    // `Display` gives the shortest text that parses back to the same f64.
    format!("{x}")
}

fn complex(z: Complex64) -> String {
    if z.im == 0.0 {
        real(z.re)
    } else {
        let sign = if z.im.is_sign_negative() { '-' } else { '+' };
        format!("{}{sign}{}i", real(z.re), real(z.im.abs()))
    }
}

fn value(v: &Value) -> String {
    match v {
        Value::Number(x) => real(*x),
        Value::Matrix(rows) => {
            let rows: Vec<String> = rows
                .iter()
                .map(|r| format!("[{}]", r.iter().map(|z| complex(*z)).collect::<Vec<_>>().join(", ")))
                .collect();
            format!("[{}]", rows.join(", "))
        }
    }
}

/// Canonical text of a spec: fields in a fixed order, one statement per line.
pub fn print(spec: &NetworkSpec) -> String {
    let mut out = String::new();
    for (i, c) in spec.components.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        let _ = writeln!(out, "component {} {{", c.name);
        for (key, field) in &c.fields {
            let _ = writeln!(out, "    {} = {};", key.name(), value(&field.value));
        }
        out.push_str("}\n");
    }
    if !spec.components.is_empty() && (!spec.connections.is_empty() || !spec.externals.is_empty()) {
        out.push('\n');
    }
    for c in &spec.connections {
        let _ = writeln!(out, "connect {} -> {};", c.from, c.to);
    }
    if !spec.externals.is_empty() {
        let ports: Vec<String> = spec.externals.iter().map(|p| p.to_string()).collect();
        let _ = writeln!(out, "external {};", ports.join(", "));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netdsl::parse;

    const SRC: &str = "# loop
component cav { Omega = 0; C = [[1.4142135623730951]]; oscillators = 1; S = [[0.7071067811865476+0.7071067811865475i]]; }
component bs { S = [[0.6, 0.8], [0.8, -0.6]]; inputs = 2; }
connect bs.out[1] -> cav.in[0];
connect cav.out[0] -> bs.in[1];
external bs.in[0], bs.out[0];
";

    #[test]
    fn canonical_form() {
        let text = print(&parse(SRC).unwrap());
        let expected = "component cav {
    oscillators = 1;
    S = [[0.7071067811865476+0.7071067811865475i]];
    C = [[1.4142135623730951]];
    Omega = 0;
}

component bs {
    inputs = 2;
    S = [[0.6, 0.8], [0.8, -0.6]];
}

connect bs.out[1] -> cav.in[0];
connect cav.out[0] -> bs.in[1];
external bs.in[0], bs.out[0];
";
        assert_eq!(text, expected);
    }

    #[test]
    fn print_parse_round_trip() {
        let spec = parse(SRC).unwrap();
        let text = print(&spec);
        let again = parse(&text).unwrap();
        assert_eq!(again, spec);
        assert_eq!(print(&again), text);
    }

    #[test]
    fn awkward_numbers_survive() {
        let src = "component a { S = [[-0.6-0.8i]]; L = [[1e-300+0.1i]]; H = [[123456789012345680000]]; }\n";
        let spec = parse(src).unwrap();
        assert_eq!(parse(&print(&spec)).unwrap(), spec);
    }

    #[test]
    fn empty_spec_prints_empty() {
        assert_eq!(print(&NetworkSpec::default()), "");
    }
}
