use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::tensor::Mat;

/// Per-node residual values with `ncomp` components each.
#[derive(Debug, Clone, PartialEq)]
pub struct NodalField {
    pub ncomp: usize,
    pub values: Vec<f64>,
}

impl NodalField {
    pub fn zeros(n: usize, ncomp: usize) -> Self {
        NodalField { ncomp, values: vec![0.0; n * ncomp] }
    }

    pub fn from_rows(rows: Vec<Vec<f64>>, ncomp: usize) -> Self {
        let mut values = Vec::with_capacity(rows.len() * ncomp);
        for r in rows {
            debug_assert_eq!(r.len(), ncomp);
            values.extend(r);
        }
        NodalField { ncomp, values }
    }

    /// Row-major flattening of one matrix per node.
    pub fn from_mats(mats: &[Mat]) -> Self {
        let ncomp = mats.first().map(|m| m.nrows() * m.ncols()).unwrap_or(0);
        NodalField { ncomp, values: mats.iter().flat_map(crate::tensor::mat_to_vec).collect() }
    }

    pub fn len(&self) -> usize {
        if self.ncomp == 0 {
            0
        } else {
            self.values.len() / self.ncomp
        }
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn at(&self, node: usize) -> &[f64] {
        &self.values[node * self.ncomp..(node + 1) * self.ncomp]
    }

    pub fn at_mut(&mut self, node: usize) -> &mut [f64] {
        &mut self.values[node * self.ncomp..(node + 1) * self.ncomp]
    }

    /// Largest component magnitude over `nodes`.
    pub fn linf(&self, nodes: &[usize]) -> f64 {
        nodes.iter().flat_map(|&n| self.at(n).iter()).fold(0.0, |a, v| a.max(v.abs()))
    }

    /// Root mean square over `nodes` of the per-node Euclidean norm.
    pub fn l2(&self, nodes: &[usize]) -> f64 {
        if nodes.is_empty() {
            return 0.0;
        }
        let s: f64 = nodes.iter().map(|&n| self.at(n).iter().map(|v| v * v).sum::<f64>()).sum();
        (s / nodes.len() as f64).sqrt()
    }

    pub fn norms(&self, nodes: &[usize]) -> Norms {
        Norms { linf: self.linf(nodes), l2: self.l2(nodes) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Norms {
    pub linf: f64,
    pub l2: f64,
}

/// One named law in a [`BalanceReport`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LawResidual {
    pub law: String,
    pub linf: f64,
    pub l2: f64,
    pub tol: f64,
    pub pass: bool,
    /// Signed integral of the law's contribution over the subbody, when the
    /// report comes from an experiment.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub integral: Option<f64>,
}

/// Named residuals in a fixed order, plus scalar diagnostics.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct BalanceReport {
    pub regime: String,
    pub laws: Vec<LawResidual>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub total: Option<f64>,
    pub diagnostics: BTreeMap<String, f64>,
}

impl BalanceReport {
    pub fn new(regime: &str) -> Self {
        BalanceReport { regime: regime.to_string(), ..Default::default() }
    }

    /// Adds a law; a law that is already present is replaced in place.
    pub fn push(&mut self, law: &str, norms: Norms, tol: f64, integral: Option<f64>) {
        let entry = LawResidual {
            law: law.to_string(),
            linf: norms.linf,
            l2: norms.l2,
            tol,
            pass: norms.linf.is_finite() && norms.linf <= tol,
            integral,
        };
        match self.laws.iter_mut().find(|l| l.law == law) {
            Some(slot) => *slot = entry,
            None => self.laws.push(entry),
        }
    }

    pub fn push_field(&mut self, law: &str, field: &NodalField, nodes: &[usize], tol: f64) {
        self.push(law, field.norms(nodes), tol, None);
    }

    pub fn get(&self, law: &str) -> Option<&LawResidual> {
        self.laws.iter().find(|l| l.law == law)
    }

    pub fn passed(&self) -> bool {
        self.laws.iter().all(|l| l.pass)
    }

    pub fn failing(&self) -> Vec<&str> {
        self.laws.iter().filter(|l| !l.pass).map(|l| l.law.as_str()).collect()
    }
}
