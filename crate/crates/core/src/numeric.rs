//! One-dimensional root finding and minimisation.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SearchError {
    #[error("f({lo}) = {f_lo} and f({hi}) = {f_hi} do not bracket a root")]
    NoSignChange { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },
    #[error("invalid interval [{0}, {1}]")]
    InvalidInterval(f64, f64),
}

/// Root of `f` in `[lo, hi]` by bisection down to `tol`, then a few secant
/// steps kept inside the final bracket.
pub fn bisect_secant<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, tol: f64) -> Result<f64, SearchError> {
    if !(lo < hi) {
        return Err(SearchError::InvalidInterval(lo, hi));
    }
    let (mut a, mut b) = (lo, hi);
    let (mut fa, fb) = (f(a), f(b));
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(SearchError::NoSignChange { lo, hi, f_lo: fa, f_hi: fb });
    }
    let mut fb = fb;
    while b - a > tol {
        let mid = 0.5 * (a + b);
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == fa.signum() {
            a = mid;
            fa = fm;
        } else {
            b = mid;
            fb = fm;
        }
    }
    // Secant polish within [a, b].
    let mut x = 0.5 * (a + b);
    for _ in 0..3 {
        if fb == fa {
            break;
        }
        let candidate = b - fb * (b - a) / (fb - fa);
        if !(candidate > a && candidate < b) {
            break;
        }
        let fc = f(candidate);
        x = candidate;
        if fc == 0.0 {
            break;
        }
        if fc.signum() == fa.signum() {
            a = candidate;
            fa = fc;
        } else {
            b = candidate;
            fb = fc;
        }
    }
    Ok(x)
}

/// Result of a golden-section search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Minimum {
    pub x: f64,
    pub value: f64,
    pub evaluations: usize,
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section search for a minimum of `f` on `[lo, hi]`, stopping when
/// the bracket is narrower than `tol`. Errors from `f` abort the search.
pub fn golden_section<F, E>(mut f: F, lo: f64, hi: f64, tol: f64) -> Result<Minimum, E>
where
    F: FnMut(f64) -> Result<f64, E>,
{
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    let mut evaluations = 2;
    while b - a > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d)?;
        }
        evaluations += 1;
    }
    let (x, value) = if fc <= fd { (c, fc) } else { (d, fd) };
    Ok(Minimum { x, value, evaluations })
}


/// Evenly spaced points `start, ..., end` (both included), written
/// `start:end:count` on the command line.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Grid {
    pub start: f64,
    pub end: f64,
    pub count: usize,
}

impl Grid {
    pub fn new(start: f64, end: f64, count: usize) -> Result<Self, SearchError> {
        let grid = Self { start, end, count };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<(), SearchError> {
        let ok = self.start.is_finite() && self.end.is_finite() && self.count >= 1 && (self.count == 1 || self.start < self.end);
        if !ok {
            return Err(SearchError::InvalidInterval(self.start, self.end));
        }
        Ok(())
    }

    pub fn point(&self, i: usize) -> f64 {
        if self.count == 1 {
            return self.start;
        }
        if i + 1 == self.count {
            return self.end;
        }
        self.start + (self.end - self.start) * i as f64 / (self.count - 1) as f64
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.count).map(|i| self.point(i)).collect()
    }
}

impl std::str::FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(format!("expected start:end:count, got `{s}`"));
        }
        let start = parts[0].trim().parse::<f64>().map_err(|e| format!("bad start in `{s}`: {e}"))?;
        let end = parts[1].trim().parse::<f64>().map_err(|e| format!("bad end in `{s}`: {e}"))?;
        let count = parts[2].trim().parse::<usize>().map_err(|e| format!("bad count in `{s}`: {e}"))?;
        Grid::new(start, end, count).map_err(|e| e.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_sqrt_two() {
        let root = bisect_secant(|x| x * x - 2.0, 0.0, 10.0, 1e-12).unwrap();
        assert!((root - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn reports_missing_sign_change() {
        assert!(matches!(bisect_secant(|x| x * x + 1.0, -1.0, 1.0, 1e-9), Err(SearchError::NoSignChange { .. })));
        assert!(matches!(bisect_secant(|x| x, 1.0, 1.0, 1e-9), Err(SearchError::InvalidInterval(..))));
    }

    #[test]
    fn golden_section_parabola() {
        let min = golden_section::<_, ()>(|x| Ok((x - 0.3).powi(2) + 1.0), -1.0, 2.0, 1e-6).unwrap();
        assert!((min.x - 0.3).abs() < 1e-6);
        assert!((min.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn grid_parsing_and_endpoints() {
        let g: Grid = "0:1.2:60".parse().unwrap();
        assert_eq!(g.count, 60);
        assert_eq!(g.point(0), 0.0);
        assert_eq!(g.point(59), 1.2);
        assert_eq!(g.points().len(), 60);
        assert!("1:0:5".parse::<Grid>().is_err());
        assert!("0:1".parse::<Grid>().is_err());
        assert_eq!("0.5:0.5:1".parse::<Grid>().unwrap().points(), vec![0.5]);
    }
}
