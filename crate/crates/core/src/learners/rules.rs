//! Very fast decision rules: an ordered rule list grown with the same
//! Hoeffding test as the tree learner.

use std::fmt;

use super::hoeffding::Leaf;
use super::split::{entropy, SplitCandidate, SplitRecord, TreeParams};
use super::{check_batch, check_dim, Classifier};
use crate::data::LabeledBatch;
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Op {
    Le,
    Gt,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Condition {
    pub feature: usize,
    pub op: Op,
    pub threshold: f64,
}

impl Condition {
    pub fn holds(&self, features: &[f64]) -> bool {
        let x = features[self.feature];
        match self.op {
            Op::Le => x <= self.threshold,
            Op::Gt => x > self.threshold,
        }
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let op = match self.op {
            Op::Le => "<=",
            Op::Gt => ">",
        };
        write!(f, "x{} {op} {:.4}", self.feature, self.threshold)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Rule {
    pub conditions: Vec<Condition>,
    pub leaf: Leaf,
}

impl Rule {
    pub fn covers(&self, features: &[f64]) -> bool {
        self.conditions.iter().all(|c| c.holds(features))
    }

    pub fn majority(&self) -> u8 {
        self.leaf.stats.majority()
    }
}

/// Keeps the purer side of a binary split; ties keep the `>` side.
fn pick_side(candidate: &SplitCandidate) -> (Op, [f64; 2]) {
    if entropy(candidate.left) < entropy(candidate.right) {
        (Op::Le, candidate.left)
    } else {
        (Op::Gt, candidate.right)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RuleSet {
    params: TreeParams,
    n_features: usize,
    rules: Vec<Rule>,
    default: Leaf,
    split_log: Vec<SplitRecord>,
}

impl RuleSet {
    pub fn new(n_features: usize, params: TreeParams) -> Self {
        Self {
            params,
            n_features,
            rules: Vec::new(),
            default: Leaf::new(n_features),
            split_log: Vec::new(),
        }
    }

    /// Builds a rule set from explicit rules and default class weights.
    pub fn from_rules(n_features: usize, params: TreeParams, rules: Vec<(Vec<Condition>, [f64; 2])>, default: [f64; 2]) -> Self {
        Self {
            params,
            n_features,
            rules: rules
                .into_iter()
                .map(|(conditions, w)| Rule {
                    conditions,
                    leaf: Leaf::with_prior(n_features, w),
                })
                .collect(),
            default: Leaf::with_prior(n_features, default),
            split_log: Vec::new(),
        }
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn split_log(&self) -> &[SplitRecord] {
        &self.split_log
    }

    /// Rules plus conditions; never decreases while learning.
    pub fn size(&self) -> usize {
        self.rules.len() + self.rules.iter().map(|r| r.conditions.len()).sum::<usize>()
    }

    pub fn learn(&mut self, features: &[f64], label: u8) {
        match self.rules.iter().position(|r| r.covers(features)) {
            Some(i) => {
                let rule = &mut self.rules[i];
                let depth = rule.conditions.len();
                if let Some((candidate, record)) =
                    rule.leaf.learn(features, label, 1.0, depth, &self.params, None)
                {
                    let (op, weights) = pick_side(&candidate);
                    rule.conditions.push(Condition {
                        feature: candidate.feature,
                        op,
                        threshold: candidate.threshold,
                    });
                    rule.leaf = Leaf::with_prior(self.n_features, weights);
                    self.split_log.push(record);
                }
            }
            None => {
                if let Some((candidate, record)) =
                    self.default.learn(features, label, 1.0, 0, &self.params, None)
                {
                    let (op, weights) = pick_side(&candidate);
                    self.rules.push(Rule {
                        conditions: vec![Condition {
                            feature: candidate.feature,
                            op,
                            threshold: candidate.threshold,
                        }],
                        leaf: Leaf::with_prior(self.n_features, weights),
                    });
                    self.default = Leaf::new(self.n_features);
                    self.split_log.push(record);
                }
            }
        }
    }

    pub fn scores(&self, features: &[f64]) -> [f64; 2] {
        match self.rules.iter().find(|r| r.covers(features)) {
            Some(rule) => rule.leaf.scores(),
            None => self.default.scores(),
        }
    }

    pub fn predict(&self, features: &[f64]) -> u8 {
        super::vote_label(self.scores(features))
    }
}

impl Classifier for RuleSet {
    fn name(&self) -> &'static str {
        "vfdt"
    }

    fn n_features(&self) -> usize {
        self.n_features
    }

    fn learn_batch(&mut self, batch: &LabeledBatch) -> Result<()> {
        check_batch(self.n_features, &batch.instances)?;
        for inst in &batch.instances {
            self.learn(&inst.features, inst.label);
        }
        Ok(())
    }

    fn predict_scores(&self, features: &[f64]) -> Result<[f64; 2]> {
        check_dim(self.n_features, features.len())?;
        Ok(self.scores(features))
    }

    fn clone_for_run(&self) -> Box<dyn Classifier> {
        Box::new(self.clone())
    }
}
