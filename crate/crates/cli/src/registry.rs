//! The fixed set of runnable experiments.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    Propagate,
    Covernum,
    Suffsum,
    Maximal,
    Theorem3,
    Lemma3,
    Multiplier,
    Counterexample,
    Exponents,
}

pub struct Entry {
    pub experiment: Experiment,
    pub tests: &'static str,
    pub summary: &'static str,
}

pub const REGISTRY: [Entry; 9] = [
    Entry {
        experiment: Experiment::Propagate,
        tests: "definition of S_t",
        summary: "identity at t = 0, unitarity in every H_s norm, semigroup law",
    },
    Entry {
        experiment: Experiment::Covernum,
        tests: "covering numbers N_E(r)",
        summary: "greedy covering counts for sequences, intervals and Cantor sets",
    },
    Entry {
        experiment: Experiment::Suffsum,
        tests: "Corollary 5 / Theorem 6",
        summary: "convergence of sum_m N_E(2^-m) 2^(-2ms/a)",
    },
    Entry {
        experiment: Experiment::Maximal,
        tests: "Theorem 4",
        summary: "empirical constant of the maximal estimate over random f",
    },
    Entry {
        experiment: Experiment::Theorem3,
        tests: "Theorem 3",
        summary: "low/high frequency sums stay bounded as j_max grows",
    },
    Entry {
        experiment: Experiment::Lemma3,
        tests: "Lemma 3",
        summary: "interval oscillation bound and its composition over covers",
    },
    Entry {
        experiment: Experiment::Multiplier,
        tests: "Theorem 2",
        summary: "sup of (e^(i delta |xi|^a) - 1)/(1+|xi|^2)^(s/2) against delta^(s/a)",
    },
    Entry {
        experiment: Experiment::Counterexample,
        tests: "Theorem 7",
        summary: "growth of the maximal lower bound along t_k = 1/ln k",
    },
    Entry {
        experiment: Experiment::Exponents,
        tests: "Corollaries 1 and 7",
        summary: "derived exponents gamma, p0, the interval I and Cantor thresholds",
    },
];

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Propagate => "propagate",
            Experiment::Covernum => "covernum",
            Experiment::Suffsum => "suffsum",
            Experiment::Maximal => "maximal",
            Experiment::Theorem3 => "theorem3",
            Experiment::Lemma3 => "lemma3",
            Experiment::Multiplier => "multiplier",
            Experiment::Counterexample => "counterexample",
            Experiment::Exponents => "exponents",
        }
    }

    pub fn entry(self) -> &'static Entry {
        REGISTRY
            .iter()
            .find(|e| e.experiment == self)
            .expect("every experiment is registered")
    }
}

/// One line per experiment: `name → target: summary`.
pub fn list_experiments() -> Vec<String> {
    REGISTRY
        .iter()
        .map(|e| format!("{} → {}: {}", e.experiment.name(), e.tests, e.summary))
        .collect()
}
