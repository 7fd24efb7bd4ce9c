//! Parsers for angles, setting pairs, grids and pair counts.

use std::f64::consts::PI;

use qsteer::quantum::{BlochVector, MeasurementSetting};

/// Radians, optionally as a multiple of π: "0.3272", "5pi/48", "-pi/8",
/// "2*pi/3", "pi".
pub fn angle(s: &str) -> Result<f64, String> {
    let t = s.trim().to_ascii_lowercase().replace(' ', "");
    let Some(pos) = t.find("pi") else {
        return number(&t);
    };
    let (head, tail) = (&t[..pos], &t[pos + 2..]);
    let head = head.strip_suffix('*').unwrap_or(head);
    let coef = match head {
        "" | "+" => 1.0,
        "-" => -1.0,
        h => number(h)?,
    };
    let den = match tail {
        "" => 1.0,
        d => number(d.strip_prefix('/').ok_or_else(|| format!("cannot parse angle {s:?}"))?)?,
    };
    if den == 0.0 {
        return Err(format!("zero denominator in angle {s:?}"));
    }
    Ok(coef * PI / den)
}

fn number(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("cannot parse number {s:?}"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("{s:?} is not finite"))
    }
}

/// Mean pair count; "inf" selects the exact assemblage.
pub fn pairs(s: &str) -> Result<f64, String> {
    match s.trim().to_ascii_lowercase().as_str() {
        "inf" | "infinity" => Ok(f64::INFINITY),
        t => {
            let v = number(t)?;
            if v > 0.0 {
                Ok(v)
            } else {
                Err(format!("pair count must be positive, got {s}"))
            }
        }
    }
}

/// "xz", "x,y", or two explicit directions "nx,ny,nz;mx,my,mz".
pub fn settings(s: &str) -> Result<[MeasurementSetting; 2], String> {
    let t = s.trim().to_ascii_lowercase();
    if let Some((a, b)) = t.split_once(';') {
        return Ok([direction("n1", a)?, direction("n2", b)?]);
    }
    let axes: Vec<char> = t.chars().filter(|c| *c != ',').collect();
    let [a, b] = axes.as_slice() else {
        return Err(format!(
            "settings must name two axes (e.g. xz) or two vectors, got {s:?}"
        ));
    };
    if a == b {
        return Err(format!("settings {s:?} repeat the same axis"));
    }
    Ok([axis(*a)?, axis(*b)?])
}

fn axis(c: char) -> Result<MeasurementSetting, String> {
    match c {
        'x' => Ok(MeasurementSetting::x()),
        'y' => Ok(MeasurementSetting::y()),
        'z' => Ok(MeasurementSetting::z()),
        _ => Err(format!("unknown axis {c:?}")),
    }
}

fn direction(label: &str, s: &str) -> Result<MeasurementSetting, String> {
    let parts: Vec<f64> = s.split(',').map(number).collect::<Result<_, _>>()?;
    let [x, y, z] = parts.as_slice() else {
        return Err(format!("direction {s:?} needs three components"));
    };
    MeasurementSetting::along(label, BlochVector::new(*x, *y, *z)).map_err(|e| e.to_string())
}

/// "start:stop:count", both ends included.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl Grid {
    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.start];
        }
        let step = (self.stop - self.start) / (self.count - 1) as f64;
        (0..self.count).map(|i| self.start + step * i as f64).collect()
    }
}

pub fn angle_grid(s: &str) -> Result<Grid, String> {
    grid(s, angle)
}

pub fn plain_grid(s: &str) -> Result<Grid, String> {
    grid(s, number)
}

fn grid(s: &str, value: fn(&str) -> Result<f64, String>) -> Result<Grid, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [a, b, n] = parts.as_slice() else {
        return Err(format!("grid must be start:stop:count, got {s:?}"));
    };
    let count: usize = n.trim().parse().map_err(|_| format!("bad grid count {n:?}"))?;
    if count == 0 {
        return Err("grid count must be at least 1".into());
    }
    Ok(Grid {
        start: value(a)?,
        stop: value(b)?,
        count,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pi_fractions() {
        assert!((angle("5pi/48").unwrap() - 5.0 * PI / 48.0).abs() < 1e-15);
        assert!((angle("-pi/8").unwrap() + PI / 8.0).abs() < 1e-15);
        assert!((angle("2*pi/3").unwrap() - 2.0 * PI / 3.0).abs() < 1e-15);
        assert_eq!(angle("pi").unwrap(), PI);
        assert_eq!(angle("0.3272").unwrap(), 0.3272);
        assert!(angle("pi/0").is_err());
        assert!(angle("5pix").is_err());
        assert!(angle("nan").is_err());
    }

    #[test]
    fn setting_pairs() {
        assert_eq!(settings("xz").unwrap()[1], MeasurementSetting::z());
        assert_eq!(settings("y,z").unwrap()[0], MeasurementSetting::y());
        let s = settings("1,0,1;0,0,1").unwrap();
        assert!((s[0].direction.x - 0.5f64.sqrt()).abs() < 1e-15);
        assert!(settings("xx").is_err());
        assert!(settings("xyz").is_err());
    }

    #[test]
    fn grids_and_pairs() {
        let g = angle_grid("0:pi/2:3").unwrap();
        assert_eq!(g.values().len(), 3);
        assert_eq!(g.values()[2], PI / 2.0);
        assert_eq!(plain_grid("0.5:0.5:1").unwrap().values(), vec![0.5]);
        assert!(pairs("inf").unwrap().is_infinite());
        assert_eq!(pairs("1e6").unwrap(), 1e6);
        assert!(pairs("-3").is_err());
    }
}
