//! Evaluation report CSV: `class,examples,top1` rows for classes with
//! examples, then an `overall` row.

use std::fmt::Write as _;

use emonet_core::{EmotionLabel, EvalReport};

pub fn report_csv(report: &EvalReport) -> String {
    let mut s = String::from("class,examples,top1\n");
    for label in EmotionLabel::ALL {
        if let Some(acc) = report.per_class_top1[label.index()] {
            writeln!(s, "{label},{},{acc}", report.class_examples(label)).unwrap();
        }
    }
    writeln!(s, "overall,{},{}", report.n_examples, report.overall_top1).unwrap();
    s
}

/// Human-readable confusion matrix (rows true, columns predicted).
pub fn confusion_table(report: &EvalReport) -> String {
    let mut s = format!("{:>12}", "true\\pred");
    for l in EmotionLabel::ALL {
        write!(s, " {:>11}", l.as_str()).unwrap();
    }
    s.push('\n');
    for t in EmotionLabel::ALL {
        write!(s, "{:>12}", t.as_str()).unwrap();
        for p in EmotionLabel::ALL {
            write!(s, " {:>11}", report.confusion.get(t, p)).unwrap();
        }
        s.push('\n');
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use emonet_core::confusion_matrix;
    use EmotionLabel::*;

    #[test]
    fn rows_for_present_classes_only() {
        let cm = confusion_matrix(
            &[Neutral, Neutral, Positive],
            &[Neutral, Positive, Positive],
        )
        .unwrap();
        let r = EvalReport::from_confusion(cm).unwrap();
        let csv = report_csv(&r);
        assert_eq!(
            csv,
            "class,examples,top1\npositive,2,0.5\nneutral,1,1\noverall,3,0.6666666666666666\n"
        );
    }
}
