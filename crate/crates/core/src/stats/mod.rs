//! Significance analysis of individual measures across label groups:
//! pooled-variance two-sample t-test for the two-class problem, one-way
//! ANOVA for three classes. P-values are two-sided.

pub mod dist;

use crate::data::{LabeledDataset, StressLevel};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum DegreesOfFreedom {
    StudentT(f64),
    FisherF(f64, f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    /// t or F statistic depending on `dof`.
    pub statistic: f64,
    pub p_value: f64,
    pub dof: DegreesOfFreedom,
    pub group_means: Vec<f64>,
    /// Set when zero spread forced the p-value to a limit (0 with distinct
    /// means) instead of the distribution formula.
    pub degenerate: bool,
}

/// Which two-sample t statistic to use. The classic pooled-variance test is
/// the default; Welch's unequal-variance form is available behind this flag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum TTestKind {
    #[default]
    Pooled,
    Welch,
}

/// Two-sample Student's t-test with pooled variance.
pub fn t_test_two_sample(a: &[f64], b: &[f64]) -> Result<TestResult> {
    t_test(a, b, TTestKind::Pooled)
}

pub fn t_test(a: &[f64], b: &[f64], kind: TTestKind) -> Result<TestResult> {
    if a.len() < 2 || b.len() < 2 {
        return Err(Error::Stats(format!(
            "t-test needs at least 2 samples per group, got {} and {}",
            a.len(),
            b.len()
        )));
    }
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let ma = a.iter().sum::<f64>() / na;
    let mb = b.iter().sum::<f64>() / nb;
    // sample variances (n - 1)
    let va = a.iter().map(|x| (x - ma).powi(2)).sum::<f64>() / (na - 1.0);
    let vb = b.iter().map(|x| (x - mb).powi(2)).sum::<f64>() / (nb - 1.0);

    let (se, dof) = match kind {
        TTestKind::Pooled => {
            let pooled = ((na - 1.0) * va + (nb - 1.0) * vb) / (na + nb - 2.0);
            ((pooled * (1.0 / na + 1.0 / nb)).sqrt(), na + nb - 2.0)
        }
        TTestKind::Welch => {
            let sa = va / na;
            let sb = vb / nb;
            let dof = (sa + sb).powi(2)
                / (sa * sa / (na - 1.0) + sb * sb / (nb - 1.0));
            ((sa + sb).sqrt(), dof)
        }
    };

    if se == 0.0 {
        // No spread at all: identical means are a perfect null, distinct
        // means an (unquantifiable) certain difference.
        let equal = ma == mb;
        return Ok(TestResult {
            statistic: if equal { 0.0 } else { f64::INFINITY * (ma - mb).signum() },
            p_value: if equal { 1.0 } else { 0.0 },
            dof: DegreesOfFreedom::StudentT(dof),
            group_means: vec![ma, mb],
            degenerate: !equal,
        });
    }

    let t = (ma - mb) / se;
    Ok(TestResult {
        statistic: t,
        p_value: dist::t_two_sided_p(t, dof),
        dof: DegreesOfFreedom::StudentT(dof),
        group_means: vec![ma, mb],
        degenerate: false,
    })
}

/// One-way ANOVA across `groups`.
pub fn anova_oneway(groups: &[Vec<f64>]) -> Result<TestResult> {
    if groups.len() < 2 {
        return Err(Error::Stats(format!(
            "ANOVA needs at least 2 groups, got {}",
            groups.len()
        )));
    }
    for (i, g) in groups.iter().enumerate() {
        if g.len() < 2 {
            return Err(Error::Stats(format!(
                "ANOVA group {i} has {} samples, need at least 2",
                g.len()
            )));
        }
    }
    let k = groups.len() as f64;
    let n: f64 = groups.iter().map(|g| g.len() as f64).sum();
    let grand = groups.iter().flatten().sum::<f64>() / n;
    let means: Vec<f64> = groups
        .iter()
        .map(|g| g.iter().sum::<f64>() / g.len() as f64)
        .collect();

    let ss_between: f64 = groups
        .iter()
        .zip(&means)
        .map(|(g, m)| g.len() as f64 * (m - grand).powi(2))
        .sum();
    let ss_within: f64 = groups
        .iter()
        .zip(&means)
        .map(|(g, m)| g.iter().map(|x| (x - m).powi(2)).sum::<f64>())
        .sum();

    let d1 = k - 1.0;
    let d2 = n - k;
    let ms_between = ss_between / d1;
    let ms_within = ss_within / d2;

    if ms_within == 0.0 {
        let equal = ss_between == 0.0;
        return Ok(TestResult {
            statistic: if equal { 0.0 } else { f64::INFINITY },
            p_value: if equal { 1.0 } else { 0.0 },
            dof: DegreesOfFreedom::FisherF(d1, d2),
            group_means: means,
            degenerate: !equal,
        });
    }

    let f = ms_between / ms_within;
    Ok(TestResult {
        statistic: f,
        p_value: dist::f_upper_tail(f, d1, d2),
        dof: DegreesOfFreedom::FisherF(d1, d2),
        group_means: means,
        degenerate: false,
    })
}

/// One measure's significance across the dataset's label groups.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureSignificance {
    pub measure: String,
    pub result: TestResult,
    /// p < 0.05
    pub significant: bool,
}

/// Test every column of a measures dataset across its label groups and sort
/// the rows by ascending p-value. Two classes run the t-test, more run ANOVA.
pub fn significance_report(measures: &LabeledDataset) -> Result<Vec<MeasureSignificance>> {
    let classes: Vec<StressLevel> = measures.classes_present();
    if classes.len() < 2 {
        return Err(Error::Stats(
            "significance analysis needs at least 2 classes present".into(),
        ));
    }
    let mut rows = Vec::with_capacity(measures.n_features());
    for (ci, def) in measures.feature_defs.iter().enumerate() {
        let groups: Vec<Vec<f64>> = classes
            .iter()
            .map(|class| {
                measures
                    .rows
                    .iter()
                    .zip(&measures.labels)
                    .filter(|(_, l)| *l == class)
                    .map(|(r, _)| r[ci])
                    .collect()
            })
            .collect();
        let result = if classes.len() == 2 {
            t_test_two_sample(&groups[0], &groups[1])?
        } else {
            anova_oneway(&groups)?
        };
        rows.push(MeasureSignificance {
            measure: def.name.clone(),
            significant: result.p_value < 0.05,
            result,
        });
    }
    rows.sort_by(|a, b| {
        a.result
            .p_value
            .total_cmp(&b.result.p_value)
            .then_with(|| a.measure.cmp(&b.measure))
    });
    Ok(rows)
}

/// CSV rendering of a significance report (one row per measure, sorted).
pub fn significance_to_csv(rows: &[MeasureSignificance]) -> String {
    let mut out = String::from("measure,test,statistic,dof,p_value,significant,group_means\n");
    for r in rows {
        let (test, dof) = match r.result.dof {
            DegreesOfFreedom::StudentT(d) => ("t".to_string(), format!("{d}")),
            DegreesOfFreedom::FisherF(d1, d2) => ("F".to_string(), format!("{d1}/{d2}")),
        };
        let means = r
            .result
            .group_means
            .iter()
            .map(|m| format!("{m:.6}"))
            .collect::<Vec<_>>()
            .join(";");
        out.push_str(&format!(
            "{},{},{:.6},{},{:.6},{},{}\n",
            r.measure, test, r.result.statistic, dof, r.result.p_value, r.significant, means
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn identical_groups_give_t_zero_p_one() {
        let a = [1.0, 2.0, 3.0];
        let r = t_test_two_sample(&a, &a).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.p_value, 1.0);
        assert!(!r.degenerate);
    }

    #[test]
    fn shifted_sequence_example() {
        // Hand computation: means 3 and 4, both sample variances 2.5,
        // pooled SE = 1, t = -1, dof 8; two-sided p from the t CDF.
        let a = [1.0, 2.0, 3.0, 4.0, 5.0];
        let b = [2.0, 3.0, 4.0, 5.0, 6.0];
        let r = t_test_two_sample(&a, &b).unwrap();
        assert!((r.statistic + 1.0).abs() < 1e-12);
        assert!((r.p_value - 0.3466).abs() < 5e-4, "p {}", r.p_value);
        assert_eq!(r.dof, DegreesOfFreedom::StudentT(8.0));
    }

    #[test]
    fn constant_groups_with_distinct_means_are_degenerate() {
        let r = t_test_two_sample(&[1.0, 1.0], &[2.0, 2.0]).unwrap();
        assert_eq!(r.p_value, 0.0);
        assert!(r.degenerate);
    }

    #[test]
    fn too_small_groups_are_rejected() {
        assert!(t_test_two_sample(&[1.0], &[1.0, 2.0]).is_err());
        assert!(anova_oneway(&[vec![1.0, 2.0]]).is_err());
        assert!(anova_oneway(&[vec![1.0, 2.0], vec![3.0]]).is_err());
    }

    #[test]
    fn welch_equals_pooled_for_equal_sizes_and_variances() {
        let a = [1.0, 2.0, 3.0, 4.0, 5.0];
        let b = [2.0, 3.0, 4.0, 5.0, 6.0];
        let pooled = t_test(&a, &b, TTestKind::Pooled).unwrap();
        let welch = t_test(&a, &b, TTestKind::Welch).unwrap();
        assert!((pooled.statistic - welch.statistic).abs() < 1e-12);
    }

    #[test]
    fn two_group_anova_is_t_squared() {
        let a = vec![1.2, 3.4, 2.2, 5.0, 4.4];
        let b = vec![2.0, 6.1, 4.4, 7.3];
        let t = t_test_two_sample(&a, &b).unwrap();
        let f = anova_oneway(&[a, b]).unwrap();
        assert!(
            (f.statistic - t.statistic * t.statistic).abs() < 1e-9,
            "F {} vs t^2 {}",
            f.statistic,
            t.statistic * t.statistic
        );
        assert!((f.p_value - t.p_value).abs() < 1e-9);
    }

    #[test]
    fn three_identical_groups_give_f_zero() {
        let g = vec![1.0, 2.0, 3.0];
        let r = anova_oneway(&[g.clone(), g.clone(), g]).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.p_value, 1.0);
    }

    #[test]
    fn staircase_groups_example() {
        // MS_between = 3, MS_within = 1, F = 3 on (2, 6) dof; the d1 = 2
        // closed form gives p = (1 + 2*3/6)^-3 = 1/8.
        let r = anova_oneway(&[
            vec![1.0, 2.0, 3.0],
            vec![2.0, 3.0, 4.0],
            vec![3.0, 4.0, 5.0],
        ])
        .unwrap();
        assert!((r.statistic - 3.0).abs() < 1e-12);
        assert!((r.p_value - 0.125).abs() < 1e-9);
        assert_eq!(r.dof, DegreesOfFreedom::FisherF(2.0, 6.0));
    }

    #[test]
    fn all_identical_cohort_gives_p_one_everywhere() {
        use crate::data::{FeatureDef, LabelScheme, LabeledDataset, Modality, StressLevel};
        let labels: Vec<StressLevel> = (0..8)
            .map(|i| {
                if i < 4 {
                    StressLevel::NonStressed
                } else {
                    StressLevel::Stressed
                }
            })
            .collect();
        let measures = LabeledDataset::new(
            (0..8).map(|i| format!("s{i}")).collect(),
            vec![
                FeatureDef::new("m0", Modality::Eeg, None),
                FeatureDef::new("m1", Modality::Gsr, None),
            ],
            vec![vec![3.5, -1.0]; 8],
            labels,
            LabelScheme::TwoClass,
        )
        .unwrap();
        let report = significance_report(&measures).unwrap();
        assert_eq!(report.len(), 2);
        for row in report {
            assert_eq!(row.result.p_value, 1.0);
            assert!(!row.significant);
        }
    }

    proptest! {
        #[test]
        fn t_is_antisymmetric_p_symmetric(
            a in proptest::collection::vec(-10.0f64..10.0, 2..20),
            b in proptest::collection::vec(-10.0f64..10.0, 2..20),
        ) {
            let ab = t_test_two_sample(&a, &b).unwrap();
            let ba = t_test_two_sample(&b, &a).unwrap();
            prop_assert!((ab.statistic + ba.statistic).abs() < 1e-9);
            prop_assert!((ab.p_value - ba.p_value).abs() < 1e-9);
        }

        #[test]
        fn tests_invariant_under_common_shift_and_f_under_scale(
            a in proptest::collection::vec(-5.0f64..5.0, 3..12),
            b in proptest::collection::vec(-5.0f64..5.0, 3..12),
            c in proptest::collection::vec(-5.0f64..5.0, 3..12),
            shift in -100.0f64..100.0,
            scale in prop_oneof![(-20.0f64..-0.1), (0.1f64..20.0)],
        ) {
            let shifted = |g: &[f64]| g.iter().map(|x| x + shift).collect::<Vec<_>>();
            let scaled = |g: &[f64]| g.iter().map(|x| x * scale).collect::<Vec<_>>();

            let t0 = t_test_two_sample(&a, &b).unwrap();
            let t1 = t_test_two_sample(&shifted(&a), &shifted(&b)).unwrap();
            if !t0.degenerate {
                prop_assert!((t0.statistic - t1.statistic).abs() < 1e-6);
            }

            let f0 = anova_oneway(&[a.clone(), b.clone(), c.clone()]).unwrap();
            let f1 = anova_oneway(&[shifted(&a), shifted(&b), shifted(&c)]).unwrap();
            let f2 = anova_oneway(&[scaled(&a), scaled(&b), scaled(&c)]).unwrap();
            if !f0.degenerate {
                prop_assert!((f0.statistic - f1.statistic).abs() < 1e-6);
                prop_assert!((f0.statistic - f2.statistic).abs() / f0.statistic.max(1e-9) < 1e-6);
            }
        }
    }
}
