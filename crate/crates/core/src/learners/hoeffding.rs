//! Hoeffding tree with Gaussian numeric split evaluation and majority-class
//! leaves.

use super::split::{SplitCandidate, SplitRecord, SplitStats, TreeParams};
use super::{check_batch, check_dim, normalize, Classifier};
use crate::data::LabeledBatch;
use crate::error::Result;

#[derive(Debug, Clone, PartialEq)]
pub struct Leaf {
    pub stats: SplitStats,
    weight_at_last_eval: f64,
}

impl Leaf {
    pub fn new(n_features: usize) -> Self {
        Self::with_prior(n_features, [0.0; 2])
    }

    pub fn with_prior(n_features: usize, class_weights: [f64; 2]) -> Self {
        Self {
            stats: SplitStats::with_prior(n_features, class_weights),
            weight_at_last_eval: class_weights[0] + class_weights[1],
        }
    }

    /// Absorbs one weighted instance and, once the grace period has elapsed,
    /// runs the Hoeffding test. Returns the winning split when it passes.
    pub fn learn(
        &mut self,
        features: &[f64],
        label: u8,
        weight: f64,
        depth: usize,
        params: &TreeParams,
        allowed: Option<&[usize]>,
    ) -> Option<(SplitCandidate, SplitRecord)> {
        self.stats.observe(features, label, weight);
        let seen = self.stats.total();
        if seen - self.weight_at_last_eval < params.grace || depth >= params.max_depth {
            return None;
        }
        self.weight_at_last_eval = seen;
        if self.stats.is_pure() {
            return None;
        }
        let decision = self.stats.evaluate(params, allowed);
        if !decision.split {
            return None;
        }
        let record = SplitRecord::from_decision(&self.stats, allowed, &decision, depth);
        Some((decision.best.expect("split implies a candidate"), record))
    }

    pub fn scores(&self) -> [f64; 2] {
        normalize(self.stats.class_weights)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Leaf(Leaf),
    Split {
        feature: usize,
        threshold: f64,
        left: Box<Node>,
        right: Box<Node>,
    },
}

impl Node {
    pub(crate) fn split_from(candidate: &SplitCandidate, n_features: usize) -> Node {
        Node::Split {
            feature: candidate.feature,
            threshold: candidate.threshold,
            left: Box::new(Node::Leaf(Leaf::with_prior(n_features, candidate.left))),
            right: Box::new(Node::Leaf(Leaf::with_prior(n_features, candidate.right))),
        }
    }

    pub fn leaf_for(&self, features: &[f64]) -> &Leaf {
        let mut node = self;
        loop {
            match node {
                Node::Leaf(leaf) => return leaf,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    node = if features[*feature] <= *threshold { left } else { right };
                }
            }
        }
    }

    pub fn node_count(&self) -> usize {
        match self {
            Node::Leaf(_) => 1,
            Node::Split { left, right, .. } => 1 + left.node_count() + right.node_count(),
        }
    }

    /// Edges on the longest root-to-leaf path.
    pub fn depth(&self) -> usize {
        match self {
            Node::Leaf(_) => 0,
            Node::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }

    /// Features used by internal nodes, pre-order.
    pub fn split_features(&self, out: &mut Vec<(usize, f64)>) {
        if let Node::Split {
            feature,
            threshold,
            left,
            right,
        } = self
        {
            out.push((*feature, *threshold));
            left.split_features(out);
            right.split_features(out);
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HoeffdingTree {
    params: TreeParams,
    n_features: usize,
    allowed: Option<Vec<usize>>,
    root: Node,
    split_log: Vec<SplitRecord>,
}

impl HoeffdingTree {
    pub fn new(n_features: usize, params: TreeParams) -> Self {
        Self {
            params,
            n_features,
            allowed: None,
            root: Node::Leaf(Leaf::new(n_features)),
            split_log: Vec::new(),
        }
    }

    /// Tree whose split decisions only consider `features`.
    pub fn with_feature_subset(n_features: usize, params: TreeParams, features: Vec<usize>) -> Self {
        Self {
            allowed: Some(features),
            ..Self::new(n_features, params)
        }
    }

    pub fn params(&self) -> &TreeParams {
        &self.params
    }

    pub fn feature_subset(&self) -> Option<&[usize]> {
        self.allowed.as_deref()
    }

    pub fn root(&self) -> &Node {
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

    pub fn learn_weighted(&mut self, features: &[f64], label: u8, weight: f64) {
        if weight <= 0.0 {
            return;
        }
        let mut node = &mut self.root;
        let mut depth = 0;
        while let Node::Split {
            feature,
            threshold,
            left,
            right,
        } = node
        {
            node = if features[*feature] <= *threshold { left } else { right };
            depth += 1;
        }
        let Node::Leaf(leaf) = node else { unreachable!() };
        if let Some((candidate, record)) =
            leaf.learn(features, label, weight, depth, &self.params, self.allowed.as_deref())
        {
            *node = Node::split_from(&candidate, self.n_features);
            self.split_log.push(record);
        }
    }

    pub fn learn(&mut self, features: &[f64], label: u8) {
        self.learn_weighted(features, label, 1.0);
    }

    pub fn learn_one(&mut self, features: &[f64], label: u8) -> Result<()> {
        check_dim(self.n_features, features.len())?;
        self.learn(features, label);
        Ok(())
    }

    /// Normalized class frequencies at the query's leaf.
    pub fn scores(&self, features: &[f64]) -> [f64; 2] {
        self.root.leaf_for(features).scores()
    }

    pub fn predict(&self, features: &[f64]) -> u8 {
        super::vote_label(self.scores(features))
    }
}

impl Classifier for HoeffdingTree {
    fn name(&self) -> &'static str {
        "ht"
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
    fn untrained_predicts_negative() {
        let t = HoeffdingTree::new(3, TreeParams::default());
        assert_eq!(t.predict_one(&[1.0, 2.0, 3.0]).unwrap(), 0);
    }

    #[test]
    fn grace_period_blocks_splits() {
        let mut t = HoeffdingTree::new(1, TreeParams::default());
        for i in 0..199 {
            let x = (i as f64 * 0.7).sin();
            t.learn(&[x], u8::from(x > 0.0));
        }
        assert_eq!(t.node_count(), 1);
        // leaf majority: more positives than negatives decides the label
        let positives = (0..199).filter(|&i| (i as f64 * 0.7).sin() > 0.0).count();
        let expect = u8::from(positives * 2 > 199);
        assert_eq!(t.predict(&[-5.0]), expect);
    }

    #[test]
    fn pure_stream_never_splits() {
        let mut t = HoeffdingTree::new(2, TreeParams::default());
        for i in 0..5000 {
            t.learn(&[i as f64, -(i as f64)], 1);
        }
        assert_eq!(t.node_count(), 1);
        assert_eq!(t.predict(&[0.0, 0.0]), 1);
    }

    #[test]
    fn max_depth_respected() {
        let params = TreeParams {
            max_depth: 2,
            grace: 20.0,
            ..TreeParams::default()
        };
        let mut t = HoeffdingTree::new(1, params);
        for i in 0..20_000 {
            let x = ((i * 7919) % 1000) as f64 / 1000.0;
            t.learn(&[x], u8::from((x * 8.0) as usize % 2 == 1));
        }
        assert!(t.depth() <= 2);
    }

    #[test]
    fn prediction_does_not_mutate() {
        let mut t = HoeffdingTree::new(1, TreeParams::default());
        for i in 0..1000 {
            let x = (i as f64 * 0.3).sin();
            t.learn(&[x], u8::from(x > 0.1));
        }
        let before = format!("{t:?}");
        let a = t.predict_one(&[0.5]).unwrap();
        let b = t.predict_one(&[0.5]).unwrap();
        assert_eq!(a, b);
        assert_eq!(before, format!("{t:?}"));
    }
}
