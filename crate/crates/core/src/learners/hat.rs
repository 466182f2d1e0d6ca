//! Hoeffding adaptive tree: a Hoeffding tree whose internal nodes watch
//! their subtree's error with ADWIN, grow a background subtree on warning
//! and swap it in on drift.

use serde::{Deserialize, Serialize};

use super::hoeffding::Leaf;
use super::split::{SplitCandidate, SplitRecord, TreeParams};
use super::{check_batch, check_dim, Classifier};
use crate::data::LabeledBatch;
use crate::drift::{Adwin, AdwinParams};
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HatParams {
    pub tree: TreeParams,
    /// ADWIN confidence for node-level drift (subtree replacement).
    pub drift_delta: f64,
    /// ADWIN confidence for node-level warning (background growth).
    pub warning_delta: f64,
}

impl Default for HatParams {
    fn default() -> Self {
        Self {
            tree: TreeParams::default(),
            drift_delta: 0.002,
            warning_delta: 0.01,
        }
    }
}

impl HatParams {
    fn detector(delta: f64) -> Adwin {
        Adwin::new(AdwinParams {
            delta,
            ..AdwinParams::default()
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HatSplit {
    pub feature: usize,
    pub threshold: f64,
    pub left: HatNode,
    pub right: HatNode,
    warning: Adwin,
    drift: Adwin,
    pub background: Option<HatNode>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum HatNode {
    Leaf(Leaf),
    Split(Box<HatSplit>),
}

impl HatNode {
    fn split_from(candidate: &SplitCandidate, n_features: usize, params: &HatParams) -> Self {
        HatNode::Split(Box::new(HatSplit {
            feature: candidate.feature,
            threshold: candidate.threshold,
            left: HatNode::Leaf(Leaf::with_prior(n_features, candidate.left)),
            right: HatNode::Leaf(Leaf::with_prior(n_features, candidate.right)),
            warning: HatParams::detector(params.warning_delta),
            drift: HatParams::detector(params.drift_delta),
            background: None,
        }))
    }

    pub fn leaf_for(&self, features: &[f64]) -> &Leaf {
        let mut node = self;
        loop {
            match node {
                HatNode::Leaf(leaf) => return leaf,
                HatNode::Split(s) => {
                    node = if features[s.feature] <= s.threshold { &s.left } else { &s.right };
                }
            }
        }
    }

    pub fn node_count(&self) -> usize {
        match self {
            HatNode::Leaf(_) => 1,
            HatNode::Split(s) => 1 + s.left.node_count() + s.right.node_count(),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            HatNode::Leaf(_) => 0,
            HatNode::Split(s) => 1 + s.left.depth().max(s.right.depth()),
        }
    }

    /// Every node's error detector window width, for inspection.
    pub fn detector_widths(&self, out: &mut Vec<u64>) {
        if let HatNode::Split(s) = self {
            out.push(s.drift.width());
            s.left.detector_widths(out);
            s.right.detector_widths(out);
        }
    }
}

struct LearnCtx<'a> {
    params: &'a HatParams,
    n_features: usize,
    log: &'a mut Vec<SplitRecord>,
    replacements: &'a mut usize,
    backgrounds_started: &'a mut usize,
}

fn learn_node(node: &mut HatNode, features: &[f64], label: u8, depth: usize, ctx: &mut LearnCtx<'_>) {
    match node {
        HatNode::Leaf(leaf) => {
            if let Some((candidate, record)) =
                leaf.learn(features, label, 1.0, depth, &ctx.params.tree, None)
            {
                *node = HatNode::split_from(&candidate, ctx.n_features, ctx.params);
                ctx.log.push(record);
            }
        }
        HatNode::Split(s) => {
            let predicted = {
                let branch = if features[s.feature] <= s.threshold { &s.left } else { &s.right };
                branch.leaf_for(features).stats.majority()
            };
            let error = f64::from(u8::from(predicted != label));
            if s.warning.insert_detect_increase(error) {
                s.warning = HatParams::detector(ctx.params.warning_delta);
                if s.background.is_none() {
                    s.background = Some(HatNode::Leaf(Leaf::new(ctx.n_features)));
                    *ctx.backgrounds_started += 1;
                }
            }
            if s.drift.insert_detect_increase(error) {
                let replacement = s
                    .background
                    .take()
                    .unwrap_or_else(|| HatNode::Leaf(Leaf::new(ctx.n_features)));
                *node = replacement;
                *ctx.replacements += 1;
                learn_node(node, features, label, depth, ctx);
                return;
            }
            if let Some(bg) = s.background.as_mut() {
                learn_node(bg, features, label, depth, ctx);
            }
            let child = if features[s.feature] <= s.threshold { &mut s.left } else { &mut s.right };
            learn_node(child, features, label, depth + 1, ctx);
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HoeffdingAdaptiveTree {
    params: HatParams,
    n_features: usize,
    root: HatNode,
    split_log: Vec<SplitRecord>,
    replacements: usize,
    backgrounds_started: usize,
}

impl HoeffdingAdaptiveTree {
    pub fn new(n_features: usize, params: HatParams) -> Self {
        Self {
            params,
            n_features,
            root: HatNode::Leaf(Leaf::new(n_features)),
            split_log: Vec::new(),
            replacements: 0,
            backgrounds_started: 0,
        }
    }

    pub fn root(&self) -> &HatNode {
        &self.root
    }

    pub fn node_count(&self) -> usize {
        self.root.node_count()
    }

    pub fn depth(&self) -> usize {
        self.root.depth()
    }

    pub fn split_log(&self) -> &[SplitRecord] {
        &self.split_log
    }

    /// Subtrees swapped out after a node-level drift.
    pub fn replacements(&self) -> usize {
        self.replacements
    }

    pub fn backgrounds_started(&self) -> usize {
        self.backgrounds_started
    }

    pub fn learn(&mut self, features: &[f64], label: u8) {
        let mut ctx = LearnCtx {
            params: &self.params,
            n_features: self.n_features,
            log: &mut self.split_log,
            replacements: &mut self.replacements,
            backgrounds_started: &mut self.backgrounds_started,
        };
        learn_node(&mut self.root, features, label, 0, &mut ctx);
    }

    pub fn scores(&self, features: &[f64]) -> [f64; 2] {
        self.root.leaf_for(features).scores()
    }

    pub fn predict(&self, features: &[f64]) -> u8 {
        super::vote_label(self.scores(features))
    }
}

impl Classifier for HoeffdingAdaptiveTree {
    fn name(&self) -> &'static str {
        "hat"
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

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn correct_subtree_detectors_stay_quiet() {
        let mut t = HoeffdingAdaptiveTree::new(1, HatParams::default());
        for i in 0..6000 {
            let x = ((i * 7919) % 2000) as f64 / 1000.0 - 1.0;
            t.learn(&[x], u8::from(x > 0.0));
        }
        assert!(t.node_count() > 1);
        assert_eq!(t.replacements(), 0);
    }

    #[test]
    fn untrained_predicts_negative() {
        let t = HoeffdingAdaptiveTree::new(2, HatParams::default());
        assert_eq!(t.predict_one(&[0.0, 0.0]).unwrap(), 0);
    }
}
