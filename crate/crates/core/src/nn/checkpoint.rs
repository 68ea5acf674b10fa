//! Text checkpoint container for a list of networks.
//!
//! ```text
//! MDAN-CHECKPOINT 1
//! networks <count>
//! network <role> <layers>
//! layer <in> <out> <activation>
//! <out lines of `in` weights, space separated>
//! <one line of `out` biases>
//! ...
//! ```
//!
//! Numbers use Rust's shortest round-trip exponent form, so a write/read
//! cycle reproduces every parameter bit for bit.

use std::fmt::Write as _;

use super::matrix::Matrix;
use super::mlp::{Activation, Dense, Mlp, Role};
use crate::error::{Error, Result};

pub const MAGIC: &str = "MDAN-CHECKPOINT";
pub const VERSION: u32 = 1;

pub fn write_networks(nets: &[&Mlp]) -> String {
    let mut out = String::new();
    writeln!(out, "{MAGIC} {VERSION}").unwrap();
    writeln!(out, "networks {}", nets.len()).unwrap();
    for net in nets {
        writeln!(out, "network {} {}", net.role().name(), net.layers().len()).unwrap();
        for layer in net.layers() {
            writeln!(
                out,
                "layer {} {} {}",
                layer.input_dim(),
                layer.output_dim(),
                layer.activation.name()
            )
            .unwrap();
            for row in layer.weights.iter_rows() {
                write_numbers(&mut out, row);
            }
            write_numbers(&mut out, &layer.bias);
        }
    }
    out
}

fn write_numbers(out: &mut String, values: &[f64]) {
    let mut first = true;
    for v in values {
        if !first {
            out.push(' ');
        }
        first = false;
        write!(out, "{v:e}").unwrap();
    }
    out.push('\n');
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    fn next(&mut self) -> Result<(usize, &'a str)> {
        self.inner
            .next()
            .map(|(i, l)| (i + 1, l))
            .ok_or_else(|| Error::Parse {
                line: 0,
                message: "unexpected end of checkpoint".into(),
            })
    }

    fn header(&mut self, keyword: &str, arity: usize) -> Result<(usize, Vec<&'a str>)> {
        let (line, text) = self.next()?;
        let parts: Vec<&str> = text.split_whitespace().collect();
        if parts.first() != Some(&keyword) || parts.len() != arity + 1 {
            return Err(Error::Parse {
                line,
                message: format!("expected `{keyword}` with {arity} fields, found `{text}`"),
            });
        }
        Ok((line, parts[1..].to_vec()))
    }

    fn numbers(&mut self, count: usize) -> Result<Vec<f64>> {
        let (line, text) = self.next()?;
        let values = text
            .split_whitespace()
            .map(|t| {
                t.parse::<f64>().map_err(|e| Error::Parse {
                    line,
                    message: format!("bad number `{t}`: {e}"),
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        if values.len() != count {
            return Err(Error::Parse {
                line,
                message: format!("expected {count} numbers, found {}", values.len()),
            });
        }
        Ok(values)
    }
}

fn parse_usize(line: usize, s: &str) -> Result<usize> {
    s.parse().map_err(|_| Error::Parse {
        line,
        message: format!("expected a count, found `{s}`"),
    })
}

pub fn read_networks(text: &str) -> Result<Vec<Mlp>> {
    let mut lines = Lines {
        inner: text.lines().enumerate(),
    };
    let (line, magic) = lines.next()?;
    if magic.trim() != format!("{MAGIC} {VERSION}") {
        return Err(Error::Parse {
            line,
            message: format!("not a version {VERSION} checkpoint: `{magic}`"),
        });
    }
    let (line, f) = lines.header("networks", 1)?;
    let count = parse_usize(line, f[0])?;
    let mut nets = Vec::with_capacity(count);
    for _ in 0..count {
        let (line, f) = lines.header("network", 2)?;
        let role = Role::from_name(f[0]).ok_or_else(|| Error::Parse {
            line,
            message: format!("unknown role `{}`", f[0]),
        })?;
        let depth = parse_usize(line, f[1])?;
        let mut layers = Vec::with_capacity(depth);
        for _ in 0..depth {
            let (line, f) = lines.header("layer", 3)?;
            let input = parse_usize(line, f[0])?;
            let output = parse_usize(line, f[1])?;
            let act = Activation::from_name(f[2]).ok_or_else(|| Error::Parse {
                line,
                message: format!("unknown activation `{}`", f[2]),
            })?;
            let mut data = Vec::with_capacity(input * output);
            for _ in 0..output {
                data.extend(lines.numbers(input)?);
            }
            let bias = lines.numbers(output)?;
            layers.push(Dense::new(Matrix::from_vec(output, input, data)?, bias, act)?);
        }
        nets.push(Mlp::new(role, layers)?);
    }
    Ok(nets)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn round_trip_is_bit_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let a = Mlp::glorot(Role::Extractor, &[3, 7, 5], Activation::Relu, &mut rng).unwrap();
        let mut b = Mlp::glorot(Role::Task, &[5, 2], Activation::Identity, &mut rng).unwrap();
        b.layers_mut()[0].bias[1] = -1.234_567_890_123e-200;
        let text = write_networks(&[&a, &b]);
        let back = read_networks(&text).unwrap();
        assert_eq!(back, vec![a, b]);
    }

    #[test]
    fn rejects_bad_magic_and_truncation() {
        assert!(matches!(read_networks("NOPE 1\n"), Err(Error::Parse { line: 1, .. })));
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = Mlp::glorot(Role::Task, &[2, 2], Activation::Identity, &mut rng).unwrap();
        let text = write_networks(&[&a]);
        let truncated: String = text.lines().take(4).collect::<Vec<_>>().join("\n");
        assert!(read_networks(&truncated).is_err());
    }
}
