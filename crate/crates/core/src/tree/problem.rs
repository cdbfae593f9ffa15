//! Shared search state: rewards as gains, per-feature sort orders and
//! candidate thresholds, plus an owned tree form that is cheap to rewrite.

use std::cmp::Ordering;

use super::{FitConfig, PolicyTree, Thresholds, TreeNode};
use crate::rewards::RewardMatrix;

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum SNode {
    Leaf(usize),
    Split {
        feature: usize,
        threshold: f64,
        left: Box<SNode>,
        right: Box<SNode>,
    },
}

impl SNode {
    pub fn splits(&self) -> usize {
        match self {
            SNode::Leaf(_) => 0,
            SNode::Split { left, right, .. } => 1 + left.splits() + right.splits(),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            SNode::Leaf(_) => 0,
            SNode::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }

    pub fn cmp_structure(&self, other: &SNode) -> Ordering {
        match (self, other) {
            (SNode::Leaf(a), SNode::Leaf(b)) => a.cmp(b),
            (SNode::Leaf(_), SNode::Split { .. }) => Ordering::Less,
            (SNode::Split { .. }, SNode::Leaf(_)) => Ordering::Greater,
            (
                SNode::Split {
                    feature: f1,
                    threshold: t1,
                    left: l1,
                    right: r1,
                },
                SNode::Split {
                    feature: f2,
                    threshold: t2,
                    left: l2,
                    right: r2,
                },
            ) => f1
                .cmp(f2)
                .then(t1.total_cmp(t2))
                .then_with(|| l1.cmp_structure(l2))
                .then_with(|| r1.cmp_structure(r2)),
        }
    }

    pub fn at_path(&self, path: &[bool]) -> Option<&SNode> {
        let mut node = self;
        for &right in path {
            match node {
                SNode::Leaf(_) => return None,
                SNode::Split { left, right: r, .. } => node = if right { r } else { left },
            }
        }
        Some(node)
    }

    pub fn at_path_mut(&mut self, path: &[bool]) -> Option<&mut SNode> {
        let mut node = self;
        for &right in path {
            match node {
                SNode::Leaf(_) => return None,
                SNode::Split { left, right: r, .. } => node = if right { r } else { left },
            }
        }
        Some(node)
    }

    pub fn paths(&self) -> Vec<Vec<bool>> {
        fn walk(n: &SNode, prefix: &mut Vec<bool>, out: &mut Vec<Vec<bool>>) {
            out.push(prefix.clone());
            if let SNode::Split { left, right, .. } = n {
                prefix.push(false);
                walk(left, prefix, out);
                prefix.pop();
                prefix.push(true);
                walk(right, prefix, out);
                prefix.pop();
            }
        }
        let mut out = Vec::new();
        walk(self, &mut Vec::new(), &mut out);
        out
    }

    /// Merges splits whose subtree prescribes a single action everywhere.
    pub fn collapse_uniform(self) -> SNode {
        match self {
            SNode::Leaf(a) => SNode::Leaf(a),
            SNode::Split {
                feature,
                threshold,
                left,
                right,
            } => {
                let l = left.collapse_uniform();
                let r = right.collapse_uniform();
                match (&l, &r) {
                    (SNode::Leaf(a), SNode::Leaf(b)) if a == b => SNode::Leaf(*a),
                    _ => SNode::Split {
                        feature,
                        threshold,
                        left: Box::new(l),
                        right: Box::new(r),
                    },
                }
            }
        }
    }

    pub fn into_policy(self, action_names: Vec<String>, feature_names: Vec<String>) -> PolicyTree {
        fn walk(n: SNode, out: &mut Vec<TreeNode>) -> usize {
            let slot = out.len();
            out.push(TreeNode::Leaf { action: 0 });
            out[slot] = match n {
                SNode::Leaf(action) => TreeNode::Leaf { action },
                SNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    let l = walk(*left, out);
                    let r = walk(*right, out);
                    TreeNode::Split {
                        feature,
                        threshold,
                        left: l,
                        right: r,
                    }
                }
            };
            slot
        }
        let mut nodes = Vec::new();
        walk(self, &mut nodes);
        PolicyTree {
            nodes,
            root: 0,
            action_names,
            feature_names,
        }
    }

    pub fn from_policy(tree: &PolicyTree) -> SNode {
        fn walk(t: &PolicyTree, id: usize) -> SNode {
            match t.nodes[id] {
                TreeNode::Leaf { action } => SNode::Leaf(action),
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => SNode::Split {
                    feature,
                    threshold,
                    left: Box::new(walk(t, left)),
                    right: Box::new(walk(t, right)),
                },
            }
        }
        walk(tree, tree.root)
    }
}

/// Objective in gain units (larger is better) and split count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Score {
    pub obj: f64,
    pub splits: usize,
}

pub(crate) fn tolerance(obj: f64) -> f64 {
    1e-10 * obj.abs().max(1.0)
}

/// True when `a` is better than `b` beyond floating noise: a higher
/// objective, or an equal one with fewer splits.
pub(crate) fn improves(a: Score, b: Score) -> bool {
    let tol = tolerance(b.obj);
    a.obj > b.obj + tol || (a.obj >= b.obj - tol && a.splits < b.splits)
}

/// Candidate ranking: `improves`, then structural order among equals.
pub(crate) fn ranks_before(a: (&SNode, Score), b: (&SNode, Score)) -> bool {
    if improves(a.1, b.1) {
        return true;
    }
    if improves(b.1, a.1) {
        return false;
    }
    a.0.cmp_structure(b.0) == Ordering::Less
}

/// Template subtree flattened for fast routing during split sweeps.
struct Flat {
    // (feature, threshold, left, right) for splits; leaves have feature == usize::MAX
    // and store their leaf index in `left`.
    nodes: Vec<(usize, f64, usize, usize)>,
    leaves: usize,
}

impl Flat {
    fn new(node: &SNode) -> Flat {
        fn walk(n: &SNode, out: &mut Vec<(usize, f64, usize, usize)>, leaves: &mut usize) -> usize {
            let slot = out.len();
            out.push((usize::MAX, 0.0, 0, 0));
            out[slot] = match n {
                SNode::Leaf(_) => {
                    *leaves += 1;
                    (usize::MAX, 0.0, *leaves - 1, 0)
                }
                SNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    let l = walk(left, out, leaves);
                    let r = walk(right, out, leaves);
                    (*feature, *threshold, l, r)
                }
            };
            slot
        }
        let mut nodes = Vec::new();
        let mut leaves = 0;
        walk(node, &mut nodes, &mut leaves);
        Flat { nodes, leaves }
    }

    fn leaf(&self, cols: &[Vec<f64>], row: usize) -> usize {
        let mut id = 0;
        loop {
            let (f, t, l, r) = self.nodes[id];
            if f == usize::MAX {
                return l;
            }
            id = if cols[f][row] < t { l } else { r };
        }
    }
}

pub(crate) struct Problem {
    pub gains: Vec<f64>,
    pub n: usize,
    pub a: usize,
    pub d: usize,
    pub cols: Vec<Vec<f64>>,
    pub order: Vec<Vec<u32>>,
    pub thresholds: Vec<Vec<f64>>,
    pub max_depth: usize,
    pub min_leaf: usize,
    pub lambda: f64,
}

pub(crate) fn candidate_thresholds(values: &[f64], mode: Thresholds) -> Vec<f64> {
    let mut v: Vec<f64> = values.to_vec();
    v.sort_by(f64::total_cmp);
    v.dedup();
    let mids: Vec<f64> = v.windows(2).map(|w| w[0] + (w[1] - w[0]) / 2.0).collect();
    match mode {
        Thresholds::AllMidpoints => mids,
        Thresholds::Quantiles(q) if mids.len() <= q => mids,
        Thresholds::Quantiles(q) => {
            let m = mids.len();
            let mut out: Vec<f64> = (1..=q)
                .map(|i| mids[((i * m) / (q + 1)).min(m - 1)])
                .collect();
            out.dedup();
            out
        }
    }
}

impl Problem {
    pub fn new(rewards: &RewardMatrix, features: &[Vec<f64>], config: &FitConfig, lambda: f64) -> Problem {
        let n = rewards.n_rows();
        let a = rewards.n_actions();
        let d = features.first().map(Vec::len).unwrap_or(0);
        let sense = rewards.sense();
        let gains = rewards.values().iter().map(|&r| sense.gain(r)).collect();
        let cols: Vec<Vec<f64>> = (0..d).map(|j| features.iter().map(|r| r[j]).collect()).collect();
        let order = cols
            .iter()
            .map(|c| {
                let mut o: Vec<u32> = (0..n as u32).collect();
                o.sort_by(|&x, &y| c[x as usize].total_cmp(&c[y as usize]));
                o
            })
            .collect();
        let thresholds = cols.iter().map(|c| candidate_thresholds(c, config.thresholds)).collect();
        Problem {
            gains,
            n,
            a,
            d,
            cols,
            order,
            thresholds,
            max_depth: config.max_depth,
            min_leaf: config.min_leaf,
            lambda,
        }
    }

    #[inline]
    fn gain_row(&self, i: usize) -> &[f64] {
        &self.gains[i * self.a..(i + 1) * self.a]
    }

    /// Best action (lowest index on ties) and its summed gain.
    pub fn best_leaf(&self, rows: &[u32]) -> (usize, f64) {
        let mut sums = vec![0.0; self.a];
        for &i in rows {
            for (s, g) in sums.iter_mut().zip(self.gain_row(i as usize)) {
                *s += g;
            }
        }
        argmax(&sums)
    }

    pub fn partition(&self, rows: &[u32], feature: usize, threshold: f64) -> (Vec<u32>, Vec<u32>) {
        rows.iter()
            .partition(|&&i| self.cols[feature][i as usize] < threshold)
    }

    /// Reassigns every leaf to its best action over `rows`. Returns `None`
    /// when some leaf holds fewer than `min_leaf` rows.
    pub fn fit_leaves(&self, node: &mut SNode, rows: &[u32]) -> Option<Score> {
        match node {
            SNode::Leaf(action) => {
                if rows.len() < self.min_leaf {
                    return None;
                }
                let (best, gain) = self.best_leaf(rows);
                *action = best;
                Some(Score { obj: gain, splits: 0 })
            }
            SNode::Split {
                feature,
                threshold,
                left,
                right,
            } => {
                let (lr, rr) = self.partition(rows, *feature, *threshold);
                let l = self.fit_leaves(left, &lr)?;
                let r = self.fit_leaves(right, &rr)?;
                Some(Score {
                    obj: l.obj + r.obj - self.lambda,
                    splits: l.splits + r.splits + 1,
                })
            }
        }
    }

    /// Rows reaching the node at `path`.
    pub fn rows_at(&self, root: &SNode, path: &[bool]) -> Vec<u32> {
        let mut rows: Vec<u32> = (0..self.n as u32).collect();
        let mut node = root;
        for &go_right in path {
            match node {
                SNode::Leaf(_) => break,
                SNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    let (l, r) = self.partition(&rows, *feature, *threshold);
                    if go_right {
                        rows = r;
                        node = right;
                    } else {
                        rows = l;
                        node = left;
                    }
                }
            }
        }
        rows
    }

    pub fn membership(&self, rows: &[u32]) -> Vec<bool> {
        let mut mask = vec![false; self.n];
        for &i in rows {
            mask[i as usize] = true;
        }
        mask
    }

    /// Best subtree of depth at most two over `rows`: each child takes its
    /// best leaf or stump under every root split. Exact when no feature has
    /// more than [`LOOKAHEAD_ROOTS`] distinct root splits; otherwise that
    /// many evenly spaced ones are tried. Ties keep the lower feature and
    /// threshold.
    pub fn best_depth2(&self, rows: &[u32]) -> SNode {
        let mask = self.membership(rows);
        let orders: Vec<Vec<u32>> = (0..self.d)
            .map(|f| self.order[f].iter().copied().filter(|&i| mask[i as usize]).collect())
            .collect();
        let n = rows.len();
        let (action, leaf_gain) = self.best_leaf(rows);
        let mut best = (leaf_gain, SNode::Leaf(action));
        let mut left = vec![false; self.n];
        let mut scratch = Scratch::new(self.a, n);
        for (f, ord) in orders.iter().enumerate() {
            let col = &self.cols[f];
            let mut splits: Vec<(f64, usize)> = Vec::new();
            let mut pos = 0;
            for &theta in &self.thresholds[f] {
                let start = pos;
                while pos < n && col[ord[pos] as usize] < theta {
                    pos += 1;
                }
                if pos == n {
                    break;
                }
                if pos > start && pos >= self.min_leaf && n - pos >= self.min_leaf {
                    splits.push((theta, pos));
                }
            }
            if splits.len() > LOOKAHEAD_ROOTS {
                let m = splits.len();
                splits = (0..LOOKAHEAD_ROOTS).map(|k| splits[k * m / LOOKAHEAD_ROOTS]).collect();
            }
            let mut moved = 0;
            for (theta, pos) in splits {
                while moved < pos {
                    left[ord[moved] as usize] = true;
                    moved += 1;
                }
                let (lv, ln) = self.best_stump(&orders, &left, true, &mut scratch);
                let (rv, rn) = self.best_stump(&orders, &left, false, &mut scratch);
                let obj = lv + rv - self.lambda;
                if obj > best.0 + tolerance(best.0) {
                    best = (
                        obj,
                        SNode::Split {
                            feature: f,
                            threshold: theta,
                            left: Box::new(ln.node()),
                            right: Box::new(rn.node()),
                        },
                    );
                }
            }
            for &i in ord {
                left[i as usize] = false;
            }
        }
        best.1
    }

    /// Best leaf or stump over the rows of `orders` with `left[i] == side`,
    /// with its objective.
    fn best_stump(&self, orders: &[Vec<u32>], left: &[bool], side: bool, s: &mut Scratch) -> (f64, Stump) {
        let a = self.a;
        s.total.fill(0.0);
        let mut n = 0;
        for &i in orders[0].iter().filter(|&&i| left[i as usize] == side) {
            n += 1;
            for (t, g) in s.total.iter_mut().zip(self.gain_row(i as usize)) {
                *t += g;
            }
        }
        let (action, leaf_gain) = argmax(&s.total);
        let mut best = (leaf_gain, Stump::Leaf(action));
        if n < 2 * self.min_leaf {
            return best;
        }
        for (f, ord) in orders.iter().enumerate() {
            let col = &self.cols[f];
            s.rows.clear();
            s.rows.extend(ord.iter().copied().filter(|&i| left[i as usize] == side));
            s.below.fill(0.0);
            let mut pos = 0;
            for &theta in &self.thresholds[f] {
                let start = pos;
                while pos < n && col[s.rows[pos] as usize] < theta {
                    for (b, g) in s.below.iter_mut().zip(self.gain_row(s.rows[pos] as usize)) {
                        *b += g;
                    }
                    pos += 1;
                }
                if pos == n {
                    break;
                }
                if pos == start || pos < self.min_leaf || n - pos < self.min_leaf {
                    continue;
                }
                let (la, lg) = argmax(&s.below);
                let (mut ra, mut rg) = (0, f64::NEG_INFINITY);
                for k in 0..a {
                    let v = s.total[k] - s.below[k];
                    if v > rg {
                        (ra, rg) = (k, v);
                    }
                }
                let obj = lg + rg - self.lambda;
                if obj > best.0 + tolerance(best.0) {
                    best = (obj, Stump::Split(f, theta, la, ra));
                }
            }
        }
        best
    }

    /// Best threshold on `feature` for a split whose children keep the
    /// structures of `lt` and `rt` with re-optimized leaves. Returns the
    /// lowest threshold attaining the best feasible objective (gain units,
    /// penalty included).
    pub fn sweep(&self, feature: usize, mask: &[bool], lt: &SNode, rt: &SNode) -> Option<(f64, f64)> {
        let sorted: Vec<u32> = self.order[feature]
            .iter()
            .copied()
            .filter(|&i| mask[i as usize])
            .collect();
        let len = sorted.len();
        if len < 2 * self.min_leaf {
            return None;
        }
        let col = &self.cols[feature];
        let (fl, fr) = (Flat::new(lt), Flat::new(rt));
        let a = self.a;
        let li: Vec<usize> = sorted.iter().map(|&i| fl.leaf(&self.cols, i as usize)).collect();
        let ri: Vec<usize> = sorted.iter().map(|&i| fr.leaf(&self.cols, i as usize)).collect();
        let mut sums_l = vec![0.0; fl.leaves * a];
        let mut sums_r = vec![0.0; fr.leaves * a];
        let mut cnt_l = vec![0usize; fl.leaves];
        let mut cnt_r = vec![0usize; fr.leaves];
        for (k, &i) in sorted.iter().enumerate() {
            let p = ri[k];
            cnt_r[p] += 1;
            for (s, g) in sums_r[p * a..(p + 1) * a].iter_mut().zip(self.gain_row(i as usize)) {
                *s += g;
            }
        }
        let penalty = self.lambda * (1 + lt.splits() + rt.splits()) as f64;
        let mut best: Option<(f64, f64)> = None;
        let mut pos = 0;
        for &theta in &self.thresholds[feature] {
            let start = pos;
            while pos < len && col[sorted[pos] as usize] < theta {
                let i = sorted[pos] as usize;
                let (pl, pr) = (li[pos], ri[pos]);
                cnt_l[pl] += 1;
                cnt_r[pr] -= 1;
                let g = self.gain_row(i);
                for k in 0..a {
                    sums_l[pl * a + k] += g[k];
                    sums_r[pr * a + k] -= g[k];
                }
                pos += 1;
            }
            if pos == len {
                break;
            }
            if pos == start || pos == 0 {
                continue;
            }
            if pos < self.min_leaf || len - pos < self.min_leaf {
                continue;
            }
            if cnt_l.iter().chain(&cnt_r).any(|&c| c < self.min_leaf) {
                continue;
            }
            let total: f64 = sums_l
                .chunks(a)
                .chain(sums_r.chunks(a))
                .map(|s| s.iter().copied().fold(f64::NEG_INFINITY, f64::max))
                .sum();
            let obj = total - penalty;
            if best.map_or(true, |(_, b)| obj > b + tolerance(b)) {
                best = Some((theta, obj));
            }
        }
        best
    }
}

/// Root splits per feature tried by [`Problem::best_depth2`].
pub const LOOKAHEAD_ROOTS: usize = 256;

/// Reusable buffers for [`Problem::best_stump`].
struct Scratch {
    rows: Vec<u32>,
    total: Vec<f64>,
    below: Vec<f64>,
}

impl Scratch {
    fn new(a: usize, n: usize) -> Self {
        Scratch {
            rows: Vec::with_capacity(n),
            total: vec![0.0; a],
            below: vec![0.0; a],
        }
    }
}

#[derive(Clone, Copy)]
enum Stump {
    Leaf(usize),
    Split(usize, f64, usize, usize),
}

impl Stump {
    fn node(self) -> SNode {
        match self {
            Stump::Leaf(a) => SNode::Leaf(a),
            Stump::Split(feature, threshold, l, r) => SNode::Split {
                feature,
                threshold,
                left: Box::new(SNode::Leaf(l)),
                right: Box::new(SNode::Leaf(r)),
            },
        }
    }
}

/// Index of the largest entry, lowest index on ties.
pub(crate) fn argmax(v: &[f64]) -> (usize, f64) {
    let mut best = (0, v[0]);
    for (k, &x) in v.iter().enumerate().skip(1) {
        if x > best.1 {
            best = (k, x);
        }
    }
    best
}
