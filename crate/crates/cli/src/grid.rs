use std::fmt;
use std::str::FromStr;

/// Shift or scale grid: `all`, `a:b` or `a:b:step` (inclusive), or `a,b,c`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Grid {
    All,
    Range { start: usize, end: usize, step: usize },
    List(Vec<usize>),
}

impl Grid {
    pub const DEFAULT_SCALES: Grid = Grid::Range {
        start: 10,
        end: 90,
        step: 1,
    };

    /// Concrete values for a series of length `n`. `all` means every value
    /// from `min` up to `max`.
    pub fn values(&self, min: usize, max: usize) -> Vec<usize> {
        match self {
            Grid::All => (min..=max).collect(),
            Grid::Range { start, end, step } => (*start..=*end).step_by(*step).collect(),
            Grid::List(v) => v.clone(),
        }
    }
}

impl FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.trim();
        let num = |t: &str| {
            t.trim()
                .parse::<usize>()
                .map_err(|_| format!("bad grid value {t:?} in {s:?}"))
        };
        if s.eq_ignore_ascii_case("all") {
            return Ok(Grid::All);
        }
        if s.contains(':') {
            let parts: Vec<&str> = s.split(':').collect();
            let (start, end, step) = match parts[..] {
                [a, b] => (num(a)?, num(b)?, 1),
                [a, b, c] => (num(a)?, num(b)?, num(c)?),
                _ => return Err(format!("bad grid range {s:?}")),
            };
            if step == 0 || start > end {
                return Err(format!("bad grid range {s:?}"));
            }
            return Ok(Grid::Range { start, end, step });
        }
        let list = s.split(',').map(num).collect::<Result<Vec<_>, _>>()?;
        Ok(Grid::List(list))
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Grid::All => f.write_str("all"),
            Grid::Range { start, end, step: 1 } => write!(f, "{start}:{end}"),
            Grid::Range { start, end, step } => write!(f, "{start}:{end}:{step}"),
            Grid::List(v) => {
                let parts: Vec<String> = v.iter().map(usize::to_string).collect();
                f.write_str(&parts.join(","))
            }
        }
    }
}
