//! Metrics and the benchmark CSV rows.

use std::fmt::Write as _;

pub const BENCH_HEADER: &str = "cut_count,rmse,rvf,wall_time_s,subexperiment_count,shots";

pub const ABLATION_HEADER: &str =
    "cut_count,seeds,uncut_rmse_mean,uncut_rmse_std,cut_rmse_mean,cut_rmse_std,\
relative_improvement,cut_wins,wall_time_s,subexperiment_count,shots";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchRecord {
    pub cut_count: usize,
    pub rmse: f64,
    pub rvf: f64,
    pub wall_time_s: f64,
    pub subexperiment_count: usize,
    /// Shots per subexperiment; 0 for analytic runs.
    pub shots: u64,
}

impl BenchRecord {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{:.9e},{:.9},{:.6},{},{}",
            self.cut_count,
            self.rmse,
            self.rvf,
            self.wall_time_s,
            self.subexperiment_count,
            self.shots
        )
    }
}

pub fn rmse(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len(), "rmse of unequal lengths");
    if a.is_empty() {
        return 0.0;
    }
    (a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>() / a.len() as f64).sqrt()
}

/// Pearson correlation. When either side is constant the correlation is
/// undefined; it is reported as 1 if the vectors agree to 1e-12 and 0
/// otherwise.
pub fn pearson(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len(), "pearson of unequal lengths");
    let n = a.len() as f64;
    let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma).powi(2);
        sbb += (y - mb).powi(2);
    }
    if saa < 1e-300 || sbb < 1e-300 {
        return if a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-12) {
            1.0
        } else {
            0.0
        };
    }
    (sab / (saa * sbb).sqrt()).clamp(-1.0, 1.0)
}

/// Mean and sample standard deviation.
pub fn mean_std(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    let var = if v.len() > 1 {
        v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    (m, var.sqrt())
}

#[derive(Debug, Clone, PartialEq)]
pub struct AblationRow {
    pub cut_count: usize,
    pub uncut_rmse: Vec<f64>,
    pub cut_rmse: Vec<f64>,
    /// `(uncut mean - cut mean) / uncut mean`; 0 without cuts.
    pub relative_improvement: f64,
    /// Seeds where the cut RMSE is at most the uncut RMSE.
    pub cut_wins: usize,
    pub wall_time_s: f64,
    pub subexperiment_count: usize,
    pub shots: u64,
}

impl AblationRow {
    pub fn new(
        cut_count: usize,
        uncut: &[f64],
        cut: &[f64],
        wall_time_s: f64,
        subs: usize,
        shots: u64,
    ) -> Self {
        let (mu, _) = mean_std(uncut);
        let (mc, _) = mean_std(cut);
        let relative_improvement = if cut_count == 0 || mu == 0.0 {
            0.0
        } else {
            (mu - mc) / mu
        };
        AblationRow {
            cut_count,
            uncut_rmse: uncut.to_vec(),
            cut_rmse: cut.to_vec(),
            relative_improvement,
            cut_wins: uncut.iter().zip(cut).filter(|(u, c)| c <= u).count(),
            wall_time_s,
            subexperiment_count: subs,
            shots,
        }
    }

    pub fn csv_row(&self) -> String {
        let (um, us) = mean_std(&self.uncut_rmse);
        let (cm, cs) = mean_std(&self.cut_rmse);
        format!(
            "{},{},{um:.9e},{us:.9e},{cm:.9e},{cs:.9e},{:.9},{},{:.6},{},{}",
            self.cut_count,
            self.uncut_rmse.len(),
            self.relative_improvement,
            self.cut_wins,
            self.wall_time_s,
            self.subexperiment_count,
            self.shots
        )
    }
}

pub fn ablation_csv(rows: &[AblationRow]) -> String {
    let mut out = format!("{ABLATION_HEADER}\n");
    for r in rows {
        let _ = writeln!(out, "{}", r.csv_row());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rmse_and_pearson_values() {
        assert!((rmse(&[0.0, 0.0], &[3.0, 4.0]) - 12.5f64.sqrt()).abs() < 1e-15);
        assert!((pearson(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]) - 1.0).abs() < 1e-15);
        assert!((pearson(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]) + 1.0).abs() < 1e-15);
        assert_eq!(pearson(&[0.5, 0.5], &[0.5, 0.5]), 1.0);
        assert_eq!(pearson(&[0.5, 0.5], &[0.5, 0.4]), 0.0);
    }

    #[test]
    fn zero_cuts_have_zero_improvement() {
        let r = AblationRow::new(0, &[0.1, 0.2], &[0.05, 0.05], 0.0, 1, 10);
        assert_eq!(r.relative_improvement, 0.0);
        assert_eq!(r.cut_wins, 2);
        assert_eq!(
            r.csv_row().split(',').count(),
            ABLATION_HEADER.split(',').count()
        );
    }

    proptest! {
        #[test]
        fn metric_ranges(v in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 2..40)) {
            let (a, b): (Vec<f64>, Vec<f64>) = v.into_iter().unzip();
            prop_assert!(rmse(&a, &b) >= 0.0);
            let r = pearson(&a, &b);
            prop_assert!((-1.0..=1.0).contains(&r));
        }
    }
}
