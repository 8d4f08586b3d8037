//! "Nice" axis ticks: steps of 1, 2 or 5 times a power of ten.

#[derive(Debug, Clone, PartialEq)]
pub struct Ticks {
    pub values: Vec<f64>,
    pub step: f64,
}

impl Ticks {
    pub fn first(&self) -> f64 {
        self.values[0]
    }

    pub fn last(&self) -> f64 {
        *self.values.last().unwrap()
    }

    pub fn labels(&self) -> Vec<String> {
        self.values.iter().map(|&v| format_tick(v, self.step)).collect()
    }
}

/// Rounds away representation noise such as 0.30000000000000004.
fn snap(v: f64, step: f64) -> f64 {
    let digits = (-(step.log10().floor()) as i32 + 1).clamp(0, 15);
    let f = 10f64.powi(digits);
    (v * f).round() / f
}

/// Index of the first and last tick plus the count; the snapped end ticks
/// always enclose `[lo, hi]` exactly.
fn tick_span(lo: f64, hi: f64, step: f64) -> (f64, f64, usize) {
    let mut first = (lo / step + 1e-9).floor();
    if snap(first * step, step) > lo {
        first -= 1.0;
    }
    let mut last = (hi / step - 1e-9).ceil();
    if snap(last * step, step) < hi {
        last += 1.0;
    }
    (first, last, (last - first) as usize + 1)
}

/// Between 4 and 7 ticks covering `[lo, hi]`.
///
/// Candidate steps are tried from coarse to fine; the first one giving at
/// least four ticks is used. Because consecutive candidates differ by at
/// most 2.5x, that step never yields more than seven.
pub fn nice_ticks(lo: f64, hi: f64) -> Ticks {
    let (mut lo, mut hi) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    if hi - lo < 1e-12 * hi.abs().max(lo.abs()).max(1e-300) {
        let pad = if lo == 0.0 { 1.0 } else { lo.abs() * 0.5 };
        if lo >= 0.0 && lo - pad < 0.0 {
            hi += pad;
        } else {
            lo -= pad;
            hi += pad;
        }
    }
    let range = hi - lo;
    let mut exp = range.log10().ceil() as i32 + 1;
    loop {
        for m in [5.0, 2.0, 1.0] {
            let step = m * 10f64.powi(exp);
            let (first, _, count) = tick_span(lo, hi, step);
            if count >= 4 {
                let values = (0..count)
                    .map(|i| snap((first + i as f64) * step, step))
                    .collect();
                return Ticks { values, step };
            }
        }
        exp -= 1;
    }
}

/// Tick label: thousands and millions abbreviated when the step allows,
/// otherwise as many decimals as the step needs.
pub fn format_tick(v: f64, step: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if step >= 1e6 && (v / 1e6).fract().abs() < 1e-9 {
        return format!("{}M", (v / 1e6).round() as i64);
    }
    if step >= 1e3 && (v / 1e3).fract().abs() < 1e-9 && v.abs() >= 1e4 {
        return format!("{}k", (v / 1e3).round() as i64);
    }
    let decimals = if step >= 1.0 {
        0
    } else {
        (-step.log10().floor()) as usize
    };
    format!("{:.*}", decimals, v)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn is_nice(step: f64) -> bool {
        let e = step.log10().floor();
        let m = step / 10f64.powf(e);
        [1.0, 2.0, 5.0].iter().any(|n| (m - n).abs() < 1e-9)
    }

    #[test]
    fn basic_ranges() {
        let t = nice_ticks(0.0, 17.0);
        assert_eq!(t.values, vec![0.0, 5.0, 10.0, 15.0, 20.0]);
        let t = nice_ticks(2010.0, 2020.0);
        assert_eq!(t.values, vec![2010.0, 2012.0, 2014.0, 2016.0, 2018.0, 2020.0]);
        let t = nice_ticks(0.1, 0.3);
        assert_eq!(t.labels(), vec!["0.10", "0.15", "0.20", "0.25", "0.30"]);
    }

    #[test]
    fn degenerate_ranges() {
        let t = nice_ticks(5.0, 5.0);
        assert!(t.first() <= 5.0 && t.last() >= 5.0);
        let t = nice_ticks(0.0, 0.0);
        assert!(t.values.len() >= 4);
    }

    #[test]
    fn count_and_coverage_over_many_ranges() {
        let mut x = 0.37_f64;
        for i in 0..5000 {
            x = (x * 997.0 + 0.123).fract();
            let scale = 10f64.powi(i % 13 - 6);
            let lo = (x - 0.5) * scale * 7.0;
            let hi = lo + x * scale * 3.0 + scale * 1e-3;
            let t = nice_ticks(lo, hi);
            assert!((4..=7).contains(&t.values.len()), "{lo} {hi} {:?}", t.values);
            assert!(t.first() <= lo && t.last() >= hi);
            assert!(is_nice(t.step), "{}", t.step);
        }
    }

    #[test]
    fn labels_abbreviate() {
        assert_eq!(format_tick(20000.0, 5000.0), "20k");
        assert_eq!(format_tick(3_000_000.0, 1_000_000.0), "3M");
        assert_eq!(format_tick(2010.0, 2.0), "2010");
        assert_eq!(format_tick(2000.0, 1000.0), "2000");
    }
}
