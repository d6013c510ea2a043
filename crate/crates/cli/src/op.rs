use std::fmt;
use std::str::FromStr;

use witt_core::TruncationSet;

fn index(s: &str, what: &str) -> Result<u64, String> {
    match s.parse::<u64>() {
        Ok(n) if n > 0 => Ok(n),
        _ => Err(format!("bad index {s:?} in {what}")),
    }
}

/// `add`, `mul` or `frob:m`.
#[derive(Clone, Copy, Debug)]
pub enum Law {
    Add,
    Mul,
    Frob(u64),
}

impl FromStr for Law {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "add" => Ok(Law::Add),
            "mul" => Ok(Law::Mul),
            _ => match s.strip_prefix("frob:") {
                Some(m) => Ok(Law::Frob(index(m, s)?)),
                None => Err(format!("unknown law {s:?} (expected add, mul or frob:m)")),
            },
        }
    }
}

impl fmt::Display for Law {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Law::Add => write!(f, "add"),
            Law::Mul => write!(f, "mul"),
            Law::Frob(m) => write!(f, "frob:{m}"),
        }
    }
}

#[derive(Clone, Debug)]
pub enum Op {
    Add,
    Mul,
    Frob(u64),
    Ver(u64),
    Teich,
    Ghost,
    Unghost,
    Project(TruncationSet),
}

impl FromStr for Op {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "add" => Op::Add,
            "mul" => Op::Mul,
            "teich" => Op::Teich,
            "ghost" => Op::Ghost,
            "unghost" => Op::Unghost,
            _ => {
                if let Some(m) = s.strip_prefix("frob:") {
                    Op::Frob(index(m, s)?)
                } else if let Some(m) = s.strip_prefix("ver:") {
                    Op::Ver(index(m, s)?)
                } else if let Some(t) = s.strip_prefix("project:") {
                    Op::Project(t.parse().map_err(|e| format!("{e}"))?)
                } else {
                    return Err(format!(
                        "unknown op {s:?} (expected add, mul, frob:m, ver:m, teich, ghost, unghost or project:S)"
                    ));
                }
            }
        })
    }
}

#[derive(Clone, Copy, Debug)]
pub enum IndOp {
    Ghost,
    Add,
    Mul,
    Frob(u64),
    Ver(u64),
    DworkTest,
    Lambda,
}

impl FromStr for IndOp {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "ghost" => IndOp::Ghost,
            "add" => IndOp::Add,
            "mul" => IndOp::Mul,
            "dwork-test" => IndOp::DworkTest,
            "lambda" => IndOp::Lambda,
            _ => {
                if let Some(n) = s.strip_prefix("frob:") {
                    IndOp::Frob(index(n, s)?)
                } else if let Some(n) = s.strip_prefix("ver:") {
                    IndOp::Ver(index(n, s)?)
                } else {
                    return Err(format!(
                        "unknown op {s:?} (expected ghost, add, mul, frob:n, ver:n, dwork-test or lambda)"
                    ));
                }
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_ops() {
        assert!(matches!("frob:2".parse::<Op>(), Ok(Op::Frob(2))));
        assert!(matches!("project:1,2".parse::<Op>(), Ok(Op::Project(_))));
        assert!("frob:0".parse::<Op>().is_err());
        assert!("spin".parse::<Op>().is_err());
        assert!(matches!(
            "dwork-test".parse::<IndOp>(),
            Ok(IndOp::DworkTest)
        ));
        assert_eq!("frob:3".parse::<Law>().unwrap().to_string(), "frob:3");
    }
}
