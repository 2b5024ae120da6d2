//! Minimal reverse-mode automatic differentiation over 2-D f64 tensors.
//!
//! A `Graph` records every operation eagerly; `backward` walks the tape in
//! reverse. Scalars are 1x1 tensors. A graph can be differentiated once per
//! forward pass.

use ndarray::{Array2, Axis};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TensorId(usize);

#[derive(Debug, Clone)]
enum Op {
    Leaf,
    MatMul(TensorId, TensorId),
    Add(TensorId, TensorId),
    /// matrix + broadcast 1xC row
    AddRow(TensorId, TensorId),
    Sub(TensorId, TensorId),
    Mul(TensorId, TensorId),
    /// matrix * broadcast Nx1 column
    MulCol(TensorId, TensorId),
    Tanh(TensorId),
    Scale(TensorId, f64),
    /// rows re-indexed by a gather table; backward scatter-adds
    GatherRows(TensorId, std::rc::Rc<Vec<usize>>),
    /// mean over groups of `k` consecutive rows
    SegmentMean(TensorId, usize),
    /// column-wise mean over all rows -> 1xC
    MeanRows(TensorId),
    Square(TensorId),
    /// sum of all entries -> 1x1
    SumAll(TensorId),
}

struct Node {
    value: Array2<f64>,
    grad: Option<Array2<f64>>,
    op: Op,
}

#[derive(Default)]
pub struct Graph {
    nodes: Vec<Node>,
    consumed: bool,
}

impl Graph {
    pub fn new() -> Self {
        Self::default()
    }

    fn push(&mut self, value: Array2<f64>, op: Op) -> TensorId {
        self.nodes.push(Node { value, grad: None, op });
        TensorId(self.nodes.len() - 1)
    }

    pub fn leaf(&mut self, value: Array2<f64>) -> TensorId {
        self.push(value, Op::Leaf)
    }

    pub fn value(&self, id: TensorId) -> &Array2<f64> {
        &self.nodes[id.0].value
    }

    pub fn grad(&self, id: TensorId) -> Option<&Array2<f64>> {
        self.nodes[id.0].grad.as_ref()
    }

    pub fn matmul(&mut self, a: TensorId, b: TensorId) -> TensorId {
        let v = self.nodes[a.0].value.dot(&self.nodes[b.0].value);
        self.push(v, Op::MatMul(a, b))
    }

    pub fn add(&mut self, a: TensorId, b: TensorId) -> TensorId {
        let v = &self.nodes[a.0].value + &self.nodes[b.0].value;
        self.push(v, Op::Add(a, b))
    }

    pub fn add_row(&mut self, a: TensorId, row: TensorId) -> TensorId {
        let v = &self.nodes[a.0].value + &self.nodes[row.0].value.row(0);
        self.push(v, Op::AddRow(a, row))
    }

    pub fn sub(&mut self, a: TensorId, b: TensorId) -> TensorId {
        let v = &self.nodes[a.0].value - &self.nodes[b.0].value;
        self.push(v, Op::Sub(a, b))
    }

    pub fn mul(&mut self, a: TensorId, b: TensorId) -> TensorId {
        let v = &self.nodes[a.0].value * &self.nodes[b.0].value;
        self.push(v, Op::Mul(a, b))
    }

    pub fn mul_col(&mut self, a: TensorId, col: TensorId) -> TensorId {
        let v = &self.nodes[a.0].value * &self.nodes[col.0].value;
        self.push(v, Op::MulCol(a, col))
    }

    pub fn tanh(&mut self, a: TensorId) -> TensorId {
        let v = self.nodes[a.0].value.mapv(f64::tanh);
        self.push(v, Op::Tanh(a))
    }

    pub fn scale(&mut self, a: TensorId, s: f64) -> TensorId {
        let v = &self.nodes[a.0].value * s;
        self.push(v, Op::Scale(a, s))
    }

    pub fn gather_rows(&mut self, a: TensorId, idx: std::rc::Rc<Vec<usize>>) -> TensorId {
        let src = &self.nodes[a.0].value;
        let mut v = Array2::zeros((idx.len(), src.ncols()));
        for (i, &j) in idx.iter().enumerate() {
            v.row_mut(i).assign(&src.row(j));
        }
        self.push(v, Op::GatherRows(a, idx))
    }

    pub fn segment_mean(&mut self, a: TensorId, k: usize) -> TensorId {
        let src = &self.nodes[a.0].value;
        debug_assert_eq!(src.nrows() % k, 0);
        let m = src.nrows() / k;
        let mut v = Array2::zeros((m, src.ncols()));
        for g in 0..m {
            let mut acc = src.row(g * k).to_owned();
            for r in 1..k {
                acc += &src.row(g * k + r);
            }
            acc /= k as f64;
            v.row_mut(g).assign(&acc);
        }
        self.push(v, Op::SegmentMean(a, k))
    }

    pub fn mean_rows(&mut self, a: TensorId) -> TensorId {
        let src = &self.nodes[a.0].value;
        let v = src.mean_axis(Axis(0)).unwrap().insert_axis(Axis(0));
        self.push(v, Op::MeanRows(a))
    }

    pub fn square(&mut self, a: TensorId) -> TensorId {
        let v = self.nodes[a.0].value.mapv(|x| x * x);
        self.push(v, Op::Square(a))
    }

    pub fn sum_all(&mut self, a: TensorId) -> TensorId {
        let v = Array2::from_elem((1, 1), self.nodes[a.0].value.sum());
        self.push(v, Op::SumAll(a))
    }

    fn accumulate(&mut self, id: TensorId, delta: Array2<f64>) {
        match &mut self.nodes[id.0].grad {
            Some(g) => *g += &delta,
            slot => *slot = Some(delta),
        }
    }

    /// Backpropagates from a scalar output node. Errors with `GraphConsumed`
    /// if called again without a fresh forward pass.
    pub fn backward(&mut self, output: TensorId) -> Result<()> {
        if self.consumed {
            return Err(Error::GraphConsumed);
        }
        self.consumed = true;
        let out = &self.nodes[output.0].value;
        if out.dim() != (1, 1) {
            return Err(Error::InvalidInput("backward requires a scalar (1x1) output".into()));
        }
        self.nodes[output.0].grad = Some(Array2::ones((1, 1)));
        for i in (0..=output.0).rev() {
            let g = match self.nodes[i].grad.clone() {
                Some(g) => g,
                None => continue,
            };
            match self.nodes[i].op.clone() {
                Op::Leaf => {}
                Op::MatMul(a, b) => {
                    let ga = g.dot(&self.nodes[b.0].value.t());
                    let gb = self.nodes[a.0].value.t().dot(&g);
                    self.accumulate(a, ga);
                    self.accumulate(b, gb);
                }
                Op::Add(a, b) => {
                    self.accumulate(a, g.clone());
                    self.accumulate(b, g);
                }
                Op::AddRow(a, row) => {
                    let grow = g.sum_axis(Axis(0)).insert_axis(Axis(0));
                    self.accumulate(a, g);
                    self.accumulate(row, grow);
                }
                Op::Sub(a, b) => {
                    self.accumulate(a, g.clone());
                    self.accumulate(b, -g);
                }
                Op::Mul(a, b) => {
                    let ga = &g * &self.nodes[b.0].value;
                    let gb = &g * &self.nodes[a.0].value;
                    self.accumulate(a, ga);
                    self.accumulate(b, gb);
                }
                Op::MulCol(a, col) => {
                    let ga = &g * &self.nodes[col.0].value;
                    let gcol = (&g * &self.nodes[a.0].value)
                        .sum_axis(Axis(1))
                        .insert_axis(Axis(1));
                    self.accumulate(a, ga);
                    self.accumulate(col, gcol);
                }
                Op::Tanh(a) => {
                    let y = &self.nodes[i].value;
                    let ga = &g * &y.mapv(|t| 1.0 - t * t);
                    self.accumulate(a, ga);
                }
                Op::Scale(a, s) => self.accumulate(a, g * s),
                Op::GatherRows(a, idx) => {
                    let mut ga = Array2::zeros(self.nodes[a.0].value.dim());
                    for (r, &j) in idx.iter().enumerate() {
                        let mut dst = ga.row_mut(j);
                        dst += &g.row(r);
                    }
                    self.accumulate(a, ga);
                }
                Op::SegmentMean(a, k) => {
                    let (m, c) = g.dim();
                    let mut ga = Array2::zeros((m * k, c));
                    for gi in 0..m {
                        let grow = g.row(gi).mapv(|x| x / k as f64);
                        for r in 0..k {
                            ga.row_mut(gi * k + r).assign(&grow);
                        }
                    }
                    self.accumulate(a, ga);
                }
                Op::MeanRows(a) => {
                    let n = self.nodes[a.0].value.nrows();
                    let row = g.row(0).mapv(|x| x / n as f64);
                    let ga = Array2::from_shape_fn((n, row.len()), |(_, j)| row[j]);
                    self.accumulate(a, ga);
                }
                Op::Square(a) => {
                    let ga = 2.0 * &g * &self.nodes[a.0].value;
                    self.accumulate(a, ga);
                }
                Op::SumAll(a) => {
                    let ga = Array2::from_elem(self.nodes[a.0].value.dim(), g[(0, 0)]);
                    self.accumulate(a, ga);
                }
            }
        }
        Ok(())
    }
}
