//! Direct recursive Newton boosting used as a reference for the trainer.
//! Every sum is taken afresh over the rows of a node; nothing is shared
//! with the library beyond the published formulas.

pub struct Params {
    pub rounds: usize,
    pub depth: usize,
    pub eta: f64,
    pub lambda: f64,
    pub gamma: f64,
    pub min_child_weight: f64,
}

pub enum OTree {
    Leaf(f64),
    Split { feature: usize, threshold: f64, left: Box<OTree>, right: Box<OTree> },
}

impl OTree {
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            OTree::Leaf(w) => *w,
            OTree::Split { feature, threshold, left, right } => {
                if x[*feature] < *threshold {
                    left.eval(x)
                } else {
                    right.eval(x)
                }
            }
        }
    }
}

pub struct OModel {
    pub base: f64,
    pub eta: f64,
    pub trees: Vec<OTree>,
}

impl OModel {
    pub fn proba(&self, x: &[f64]) -> f64 {
        let f = self.base + self.eta * self.trees.iter().map(|t| t.eval(x)).sum::<f64>();
        (1.0 / (1.0 + (-f).exp())).clamp(1e-15, 1.0 - 1e-15)
    }
}

fn sum(rows: &[usize], v: &[f64]) -> f64 {
    rows.iter().map(|&r| v[r]).sum()
}

fn grow(xs: &[Vec<f64>], rows: &[usize], g: &[f64], h: &[f64], depth: usize, p: &Params) -> OTree {
    let (gt, ht) = (sum(rows, g), sum(rows, h));
    let leaf = OTree::Leaf(-gt / (ht + p.lambda));
    if depth == 0 {
        return leaf;
    }
    let score = |gs: f64, hs: f64| gs * gs / (hs + p.lambda);
    // (gain, feature, threshold); candidates are visited in ascending
    // feature then threshold order, so a later one must win clearly
    let mut best: Option<(f64, usize, f64)> = None;
    let dim = xs[0].len();
    #[allow(clippy::needless_range_loop)]
    for f in 0..dim {
        let mut vals: Vec<f64> = rows.iter().map(|&r| xs[r][f]).collect();
        vals.sort_by(f64::total_cmp);
        vals.dedup();
        for w in vals.windows(2) {
            let t = (w[0] + w[1]) / 2.0;
            let left: Vec<usize> = rows.iter().copied().filter(|&r| xs[r][f] < t).collect();
            let right: Vec<usize> = rows.iter().copied().filter(|&r| xs[r][f] >= t).collect();
            let (gl, hl, gr, hr) = (sum(&left, g), sum(&left, h), sum(&right, g), sum(&right, h));
            if hl < p.min_child_weight || hr < p.min_child_weight {
                continue;
            }
            let gain = 0.5 * (score(gl, hl) + score(gr, hr) - score(gt, ht)) - p.gamma;
            if gain <= 0.0 {
                continue;
            }
            let wins = match best {
                None => true,
                Some((b, _, _)) => gain > b + 1e-12 * b.abs().max(1.0),
            };
            if wins {
                best = Some((gain, f, t));
            }
        }
    }
    match best {
        None => leaf,
        Some((_, feature, threshold)) => {
            let left: Vec<usize> = rows.iter().copied().filter(|&r| xs[r][feature] < threshold).collect();
            let right: Vec<usize> = rows.iter().copied().filter(|&r| xs[r][feature] >= threshold).collect();
            OTree::Split {
                feature,
                threshold,
                left: Box::new(grow(xs, &left, g, h, depth - 1, p)),
                right: Box::new(grow(xs, &right, g, h, depth - 1, p)),
            }
        }
    }
}

pub fn fit(xs: &[Vec<f64>], ys: &[u8], p: &Params) -> OModel {
    let n = xs.len();
    let mean = ys.iter().map(|&y| f64::from(y)).sum::<f64>() / n as f64;
    let rate = mean.clamp(1e-4, 1.0 - 1e-4);
    let base = (rate / (1.0 - rate)).ln();
    let mut model = OModel { base, eta: p.eta, trees: Vec::new() };
    let rows: Vec<usize> = (0..n).collect();
    for _ in 0..p.rounds {
        let mut g = vec![0.0; n];
        let mut h = vec![0.0; n];
        for i in 0..n {
            let q = model.proba(&xs[i]);
            g[i] = q - f64::from(ys[i]);
            h[i] = q * (1.0 - q);
        }
        let tree = grow(xs, &rows, &g, &h, p.depth, p);
        model.trees.push(tree);
    }
    model
}
