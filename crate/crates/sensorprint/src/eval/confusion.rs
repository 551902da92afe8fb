//! Classification bookkeeping for identification experiments.

/// Confusion counts plus the derived retrieval metrics.
///
/// Genuine attempts accepted are true positives, genuine attempts rejected
/// false negatives. Impostor attempts accepted split by provenance:
/// `fp_inter` (an instance of another model) and `fp_intra` (a sibling
/// instance of the same model); impostors rejected are true negatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConfusionCounts {
    pub true_pos: u64,
    pub fp_inter: u64,
    pub fp_intra: u64,
    pub false_neg: u64,
    pub true_neg: u64,
    /// `tp / (tp + fp)`, 0 when the denominator is 0.
    pub precision: f64,
    /// `tp / (tp + fn)`, 0 when the denominator is 0.
    pub recall: f64,
    /// Harmonic mean of precision and recall, 0 when both are 0.
    pub f1: f64,
}

impl ConfusionCounts {
    pub fn from_counts(
        true_pos: u64,
        fp_inter: u64,
        fp_intra: u64,
        false_neg: u64,
        true_neg: u64,
    ) -> Self {
        let fp = fp_inter + fp_intra;
        let precision = if true_pos + fp == 0 {
            0.0
        } else {
            true_pos as f64 / (true_pos + fp) as f64
        };
        let recall = if true_pos + false_neg == 0 {
            0.0
        } else {
            true_pos as f64 / (true_pos + false_neg) as f64
        };
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        Self {
            true_pos,
            fp_inter,
            fp_intra,
            false_neg,
            true_neg,
            precision,
            recall,
            f1,
        }
    }

    pub fn false_pos(&self) -> u64 {
        self.fp_inter + self.fp_intra
    }
}
