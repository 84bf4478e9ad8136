use serde::{Deserialize, Serialize};

/// One method on one cross-validation fold of a smart design instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignRow {
    pub instance_id: String,
    pub method: String,
    pub fold: usize,
    pub train_loss: Option<f64>,
    pub test_loss: Option<f64>,
    pub tightness: Option<f64>,
    pub nodes: usize,
    pub wall_ms: f64,
    pub completed: bool,
}

/// One search over a prior NMF instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NmfRow {
    pub instance_id: String,
    pub method: String,
    /// Selected database topics (0-based), `;`-separated.
    pub topics: String,
    pub best_loss: Option<f64>,
    pub planted_loss: Option<f64>,
    pub recovery: Option<f64>,
    pub nodes: usize,
    pub wall_ms: f64,
    pub completed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchDesignRow {
    pub cell: String,
    pub seed: u64,
    pub instance_id: String,
    pub method: String,
    pub fold: usize,
    pub train_loss: Option<f64>,
    pub test_loss: Option<f64>,
    pub tightness: Option<f64>,
    pub nodes: usize,
    pub wall_ms: f64,
    pub completed: bool,
    pub error: Option<String>,
}

impl BenchDesignRow {
    pub fn from_row(cell: &str, seed: u64, r: DesignRow) -> Self {
        BenchDesignRow {
            cell: cell.to_string(),
            seed,
            instance_id: r.instance_id,
            method: r.method,
            fold: r.fold,
            train_loss: r.train_loss,
            test_loss: r.test_loss,
            tightness: r.tightness,
            nodes: r.nodes,
            wall_ms: r.wall_ms,
            completed: r.completed,
            error: None,
        }
    }

    pub fn failed(cell: &str, seed: u64, message: String) -> Self {
        BenchDesignRow {
            cell: cell.to_string(),
            seed,
            instance_id: String::new(),
            method: String::new(),
            fold: 0,
            train_loss: None,
            test_loss: None,
            tightness: None,
            nodes: 0,
            wall_ms: 0.0,
            completed: false,
            error: Some(message),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchNmfRow {
    pub cell: String,
    pub seed: u64,
    pub instance_id: String,
    pub method: String,
    pub topics: String,
    pub best_loss: Option<f64>,
    pub planted_loss: Option<f64>,
    pub recovery: Option<f64>,
    pub nodes: usize,
    pub wall_ms: f64,
    pub completed: bool,
    pub error: Option<String>,
}

impl BenchNmfRow {
    pub fn from_row(cell: &str, seed: u64, r: NmfRow) -> Self {
        BenchNmfRow {
            cell: cell.to_string(),
            seed,
            instance_id: r.instance_id,
            method: r.method,
            topics: r.topics,
            best_loss: r.best_loss,
            planted_loss: r.planted_loss,
            recovery: r.recovery,
            nodes: r.nodes,
            wall_ms: r.wall_ms,
            completed: r.completed,
            error: None,
        }
    }

    pub fn failed(cell: &str, seed: u64, message: String) -> Self {
        BenchNmfRow {
            cell: cell.to_string(),
            seed,
            instance_id: String::new(),
            method: String::new(),
            topics: String::new(),
            best_loss: None,
            planted_loss: None,
            recovery: None,
            nodes: 0,
            wall_ms: 0.0,
            completed: false,
            error: Some(message),
        }
    }
}

/// Means over the successful rows of one (cell, method) group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignSummaryRow {
    pub cell: String,
    pub method: String,
    pub rows: usize,
    pub mean_train_loss: Option<f64>,
    pub mean_test_loss: Option<f64>,
    pub mean_tightness: Option<f64>,
    pub mean_nodes: f64,
    pub mean_wall_ms: f64,
    pub completed_share: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NmfSummaryRow {
    pub cell: String,
    pub method: String,
    pub rows: usize,
    pub mean_best_loss: Option<f64>,
    pub mean_planted_loss: Option<f64>,
    pub mean_recovery: Option<f64>,
    pub mean_nodes: f64,
    pub mean_wall_ms: f64,
    pub completed_share: f64,
}

/// Mean of the present values, `None` when there are none.
pub(crate) fn mean_present(values: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let (sum, n) = values
        .flatten()
        .fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

pub(crate) fn mean(values: impl Iterator<Item = f64>) -> f64 {
    mean_present(values.map(Some)).unwrap_or(0.0)
}
