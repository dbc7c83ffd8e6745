//! JSON metrics report emitted by evaluation runs.

use serde::{Deserialize, Serialize};

use crate::eval::{Counts, Prf};

/// Stage timings in milliseconds.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub parse: f64,
    pub ccl: f64,
    pub dilate: f64,
    pub contour: f64,
    pub total: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImageMetrics {
    pub name: String,
    #[serde(flatten)]
    pub counts: Counts,
    #[serde(flatten)]
    pub prf: Prf,
}

impl ImageMetrics {
    pub fn new(name: impl Into<String>, counts: Counts) -> Self {
        Self {
            name: name.into(),
            prf: counts.prf(),
            counts,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport<P> {
    pub protocol: P,
    pub images: Vec<ImageMetrics>,
    pub aggregate: Prf,
    /// Absent when wall-clock fields are suppressed.
    #[serde(skip_serializing_if = "Option::is_none", rename = "timing_ms")]
    pub timing: Option<Timing>,
}

impl<P: Serialize> MetricsReport<P> {
    pub fn new(protocol: P, images: Vec<ImageMetrics>, timing: Option<Timing>) -> Self {
        let aggregate = images.iter().map(|i| i.counts).sum::<Counts>().prf();
        Self {
            protocol,
            images,
            aggregate,
            timing,
        }
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
