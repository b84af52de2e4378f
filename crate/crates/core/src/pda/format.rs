use std::fmt::Write as _;

use serde_json::Value;

use crate::error::{Error, Result};

use super::{Cell, Pda};

fn parse_cell(token: &str) -> Result<Cell> {
    if token == "*" {
        return Ok(Cell::Star);
    }
    match token.parse::<u32>() {
        Ok(0) | Err(_) => Err(Error::Format(format!("expected '*' or a positive symbol, found {token:?}"))),
        Ok(x) => Ok(Cell::Symbol(x)),
    }
}

impl Pda {
    /// One row per line, cells separated by single spaces, `*` for stars.
    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity(self.f() * self.k() * 3);
        for r in 0..self.f() {
            for (c, cell) in self.row(r).enumerate() {
                if c > 0 {
                    out.push(' ');
                }
                match cell {
                    Cell::Star => out.push('*'),
                    Cell::Symbol(x) => write!(out, "{x}").expect("writing to a String"),
                }
            }
            out.push('\n');
        }
        out
    }

    /// Parses [`Pda::to_text`] output. `S` is taken as the largest symbol
    /// and `Z` as the star count of column 0.
    pub fn from_text(text: &str) -> Result<Self> {
        let grid = text
            .lines()
            .filter(|line| !line.trim().is_empty())
            .map(|line| line.split_whitespace().map(parse_cell).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        Self::infer(&grid)
    }

    /// `{"F":..,"K":..,"Z":..,"S":..,"grid":[[..],..]}` with one grid row
    /// per line.
    pub fn to_json(&self) -> String {
        let mut out =
            format!("{{\"F\":{},\"K\":{},\"Z\":{},\"S\":{},\"grid\":[\n", self.f(), self.k(), self.z(), self.s());
        for r in 0..self.f() {
            out.push('[');
            for (c, cell) in self.row(r).enumerate() {
                if c > 0 {
                    out.push(',');
                }
                match cell {
                    Cell::Star => out.push_str("\"*\""),
                    Cell::Symbol(x) => write!(out, "{x}").expect("writing to a String"),
                }
            }
            out.push(']');
            if r + 1 < self.f() {
                out.push(',');
            }
            out.push('\n');
        }
        out.push_str("]}\n");
        out
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let value: Value = serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
        let field = |name: &str| -> Result<usize> {
            value
                .get(name)
                .and_then(Value::as_u64)
                .map(|x| x as usize)
                .ok_or_else(|| Error::Format(format!("missing or non-integer field {name:?}")))
        };
        let (f, k, z, s) = (field("F")?, field("K")?, field("Z")?, field("S")?);
        let rows = value
            .get("grid")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Format("missing array field \"grid\"".into()))?;
        let grid = rows
            .iter()
            .map(|row| {
                row.as_array()
                    .ok_or_else(|| Error::Format("grid rows must be arrays".into()))?
                    .iter()
                    .map(|cell| match cell {
                        Value::String(s) => parse_cell(s),
                        Value::Number(n) => parse_cell(&n.to_string()),
                        other => Err(Error::Format(format!("unexpected cell {other}"))),
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let pda = Self::from_grid(&grid, z, s)?;
        if pda.f() != f || pda.k() != k {
            return Err(Error::Format(format!("declared F = {f}, K = {k} but the grid is {} x {}", pda.f(), pda.k())));
        }
        Ok(pda)
    }
}

#[cfg(test)]
mod tests {
    use super::super::tests::example_pda;
    use super::*;
    use crate::nhsdp::Nhsdp;

    #[test]
    fn text_round_trip() {
        let text = "* 1 * 4\n1 * 2 *\n* 2 * 3\n4 * 3 *\n";
        let p = Pda::from_text(text).unwrap();
        assert_eq!(p.to_text(), text);
        assert_eq!((p.z(), p.s()), (2, 4));
    }

    #[test]
    fn json_round_trip() {
        let p = example_pda();
        let json = p.to_json();
        assert_eq!(
            json,
            "{\"F\":4,\"K\":4,\"Z\":2,\"S\":4,\"grid\":[\n[\"*\",1,\"*\",4],\n[1,\"*\",2,\"*\"],\n[\"*\",2,\"*\",3],\n[4,\"*\",3,\"*\"]\n]}\n"
        );
        let back = Pda::from_json(&json).unwrap();
        assert_eq!(back, p);
        assert_eq!(back.to_json(), json);
    }

    #[test]
    fn example_two_first_row() {
        let d = Nhsdp::from_signed(15, &[vec![-1, 1, -2, 2], vec![-4, 4, -5, 5]]).unwrap();
        let p = Pda::from_nhsdp(&d).unwrap();
        let first = p.to_text().lines().next().unwrap().to_string();
        assert_eq!(first, "* 2 3 * 20 21 * * * * 26 27 * 14 15");
        assert_eq!(Pda::from_text(&p.to_text()).unwrap(), p);
        assert_eq!(Pda::from_json(&p.to_json()).unwrap(), p);
    }

    #[test]
    fn malformed_inputs() {
        assert!(Pda::from_text("* 0\n").is_err());
        assert!(Pda::from_text("* x\n").is_err());
        assert!(Pda::from_text("* 1\n1\n").is_err());
        assert!(Pda::from_json("{\"F\":1,\"K\":2,\"Z\":1,\"S\":1,\"grid\":[[\"*\"]]}").is_err());
        assert!(Pda::from_json("{\"grid\":[]}").is_err());
    }
}
