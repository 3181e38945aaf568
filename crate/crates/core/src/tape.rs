//! Reverse-mode automatic differentiation over [`Tensor`] values.
//!
//! A [`Tape`] records every operation of a forward pass as a node holding the
//! computed value and a closure that maps the node's output gradient to
//! gradient contributions for its parents. [`Tape::backward`] then walks the
//! nodes in reverse, accumulating gradients. One tape lives for exactly one
//! forward/backward pair; leaves are re-created from parameter values on the
//! next pass.
//!
//! The op set is the minimum the model needs: affine maps, the elementwise
//! gates, concatenation/stacking, embedding-style gathers, the log-sum-exp
//! reductions behind the CRF forward recursion, and inverted dropout.

use std::cell::RefCell;

use rand::Rng;

use crate::error::{Error, Result};
use crate::tensor::{same_shape, Tensor};

/// Handle to a node on a [`Tape`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NodeId(usize);

type BackwardFn = Box<dyn Fn(&Tensor) -> Vec<Tensor>>;

struct Node {
    value: Tensor,
    parents: Vec<NodeId>,
    /// Maps the output gradient to one gradient tensor per parent,
    /// in `parents` order. `None` for leaves.
    backward: Option<BackwardFn>,
}

/// Recorded computation graph for one forward pass.
#[derive(Default)]
pub struct Tape {
    nodes: RefCell<Vec<Node>>,
}

/// Gradients of one scalar output with respect to every tape node.
pub struct Gradients {
    grads: Vec<Option<Tensor>>,
}

impl Gradients {
    /// Gradient w.r.t. `id`, or `None` if the node does not influence the output.
    pub fn get(&self, id: NodeId) -> Option<&Tensor> {
        self.grads[id.0].as_ref()
    }

    /// Gradient w.r.t. `id`, zero-filled when the node has no influence.
    pub fn wrt(&self, id: NodeId, shape: &[usize]) -> Tensor {
        match &self.grads[id.0] {
            Some(g) => g.clone(),
            None => Tensor::zeros(shape),
        }
    }
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.borrow().len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.borrow().is_empty()
    }

    /// Copy of the value held at `id`.
    pub fn value(&self, id: NodeId) -> Tensor {
        self.nodes.borrow()[id.0].value.clone()
    }

    pub fn shape_of(&self, id: NodeId) -> Vec<usize> {
        self.nodes.borrow()[id.0].value.shape().to_vec()
    }

    /// The single value of a scalar node.
    pub fn item(&self, id: NodeId) -> f64 {
        self.nodes.borrow()[id.0].value.item()
    }

    /// Introduces an input (no gradient flows past it, but gradient
    /// *with respect to it* is recorded).
    pub fn leaf(&self, value: Tensor) -> NodeId {
        self.push(value, vec![], None)
    }

    fn push(&self, value: Tensor, parents: Vec<NodeId>, backward: Option<BackwardFn>) -> NodeId {
        let mut nodes = self.nodes.borrow_mut();
        nodes.push(Node {
            value,
            parents,
            backward,
        });
        NodeId(nodes.len() - 1)
    }

    /// Elementwise sum.
    pub fn add(&self, a: NodeId, b: NodeId) -> Result<NodeId> {
        let (va, vb) = (self.value(a), self.value(b));
        let out = va.add(&vb)?;
        Ok(self.push(
            out,
            vec![a, b],
            Some(Box::new(|g: &Tensor| vec![g.clone(), g.clone()])),
        ))
    }

    /// Elementwise difference `a − b`.
    pub fn sub(&self, a: NodeId, b: NodeId) -> Result<NodeId> {
        let (va, vb) = (self.value(a), self.value(b));
        same_shape(&va, &vb, "sub")?;
        let data = va.data().iter().zip(vb.data()).map(|(x, y)| x - y).collect();
        let out = Tensor::new(va.shape().to_vec(), data)?;
        Ok(self.push(
            out,
            vec![a, b],
            Some(Box::new(|g: &Tensor| vec![g.clone(), g.scale(-1.0)])),
        ))
    }

    /// Elementwise (Hadamard) product.
    pub fn hadamard(&self, a: NodeId, b: NodeId) -> Result<NodeId> {
        let (va, vb) = (self.value(a), self.value(b));
        same_shape(&va, &vb, "hadamard")?;
        let data = va.data().iter().zip(vb.data()).map(|(x, y)| x * y).collect();
        let out = Tensor::new(va.shape().to_vec(), data)?;
        Ok(self.push(
            out,
            vec![a, b],
            Some(Box::new(move |g: &Tensor| {
                let da = g
                    .data()
                    .iter()
                    .zip(vb.data())
                    .map(|(gi, bi)| gi * bi)
                    .collect();
                let db = g
                    .data()
                    .iter()
                    .zip(va.data())
                    .map(|(gi, ai)| gi * ai)
                    .collect();
                vec![
                    Tensor::new(va.shape().to_vec(), da).unwrap(),
                    Tensor::new(vb.shape().to_vec(), db).unwrap(),
                ]
            })),
        ))
    }

    /// Logistic sigmoid, elementwise.
    pub fn sigmoid(&self, x: NodeId) -> NodeId {
        let vx = self.value(x);
        let out_data: Vec<f64> = vx.data().iter().map(|v| sigmoid_scalar(*v)).collect();
        let out = Tensor::new(vx.shape().to_vec(), out_data.clone()).unwrap();
        self.push(
            out,
            vec![x],
            Some(Box::new(move |g: &Tensor| {
                let dx = g
                    .data()
                    .iter()
                    .zip(&out_data)
                    .map(|(gi, s)| gi * s * (1.0 - s))
                    .collect();
                vec![Tensor::new(g.shape().to_vec(), dx).unwrap()]
            })),
        )
    }

    /// Hyperbolic tangent, elementwise.
    pub fn tanh_op(&self, x: NodeId) -> NodeId {
        let vx = self.value(x);
        let out_data: Vec<f64> = vx.data().iter().map(|v| v.tanh()).collect();
        let out = Tensor::new(vx.shape().to_vec(), out_data.clone()).unwrap();
        self.push(
            out,
            vec![x],
            Some(Box::new(move |g: &Tensor| {
                let dx = g
                    .data()
                    .iter()
                    .zip(&out_data)
                    .map(|(gi, t)| gi * (1.0 - t * t))
                    .collect();
                vec![Tensor::new(g.shape().to_vec(), dx).unwrap()]
            })),
        )
    }

    /// `x · W` for a vector `x` (len a) and matrix `W` (a×b).
    pub fn vecmat(&self, x: NodeId, w: NodeId) -> Result<NodeId> {
        let (vx, vw) = (self.value(x), self.value(w));
        if vx.shape().len() != 1 || vw.shape().len() != 2 || vw.shape()[0] != vx.len() {
            return Err(Error::Shape(format!(
                "vecmat: {:?} vs {:?}",
                vx.shape(),
                vw.shape()
            )));
        }
        let out = Tensor::vector(crate::tensor::vec_mat(vx.data(), &vw)?);
        let (a, b) = (vw.shape()[0], vw.shape()[1]);
        Ok(self.push(
            out,
            vec![x, w],
            Some(Box::new(move |g: &Tensor| {
                let mut dx = vec![0.0; a];
                let mut dw = vec![0.0; a * b];
                for i in 0..a {
                    let wrow = &vw.data()[i * b..(i + 1) * b];
                    let mut acc = 0.0;
                    for j in 0..b {
                        acc += g.data()[j] * wrow[j];
                        dw[i * b + j] = vx.data()[i] * g.data()[j];
                    }
                    dx[i] = acc;
                }
                vec![
                    Tensor::vector(dx),
                    Tensor::matrix(a, b, dw).unwrap(),
                ]
            })),
        ))
    }

    /// `x·W + b`. Accepts `x` as a matrix (n×a, bias broadcast over rows)
    /// or a vector (len a).
    pub fn affine(&self, x: NodeId, w: NodeId, b: NodeId) -> Result<NodeId> {
        let (vx, vw, vb) = (self.value(x), self.value(w), self.value(b));
        if vw.shape().len() != 2 || vb.shape().len() != 1 || vb.len() != vw.shape()[1] {
            return Err(Error::Shape(format!(
                "affine: W {:?} with bias {:?}",
                vw.shape(),
                vb.shape()
            )));
        }
        match vx.shape().len() {
            1 => {
                let xw = self.vecmat(x, w)?;
                self.add(xw, b)
            }
            2 => {
                if vx.shape()[1] != vw.shape()[0] {
                    return Err(Error::Shape(format!(
                        "affine: x {:?} vs W {:?}",
                        vx.shape(),
                        vw.shape()
                    )));
                }
                let (n, a, m) = (vx.shape()[0], vw.shape()[0], vw.shape()[1]);
                let mut data = vec![0.0; n * m];
                for r in 0..n {
                    let xrow = vx.row(r);
                    let orow = &mut data[r * m..(r + 1) * m];
                    orow.copy_from_slice(vb.data());
                    for i in 0..a {
                        let xi = xrow[i];
                        if xi == 0.0 {
                            continue;
                        }
                        let wrow = &vw.data()[i * m..(i + 1) * m];
                        for j in 0..m {
                            orow[j] += xi * wrow[j];
                        }
                    }
                }
                let out = Tensor::matrix(n, m, data)?;
                Ok(self.push(
                    out,
                    vec![x, w, b],
                    Some(Box::new(move |g: &Tensor| {
                        let mut dx = vec![0.0; n * a];
                        let mut dw = vec![0.0; a * m];
                        let mut db = vec![0.0; m];
                        for r in 0..n {
                            let grow = g.row(r);
                            let xrow = vx.row(r);
                            for j in 0..m {
                                db[j] += grow[j];
                            }
                            for i in 0..a {
                                let wrow = &vw.data()[i * m..(i + 1) * m];
                                let mut acc = 0.0;
                                for j in 0..m {
                                    acc += grow[j] * wrow[j];
                                    dw[i * m + j] += xrow[i] * grow[j];
                                }
                                dx[r * a + i] = acc;
                            }
                        }
                        vec![
                            Tensor::matrix(n, a, dx).unwrap(),
                            Tensor::matrix(a, m, dw).unwrap(),
                            Tensor::vector(db),
                        ]
                    })),
                ))
            }
            other => Err(Error::Shape(format!("affine: x of rank {other}"))),
        }
    }

    /// Concatenates two tensors of equal rank along `axis`.
    /// Vectors support axis 0; matrices axes 0 and 1.
    pub fn concat(&self, a: NodeId, b: NodeId, axis: usize) -> Result<NodeId> {
        let (va, vb) = (self.value(a), self.value(b));
        match (va.shape().len(), vb.shape().len(), axis) {
            (1, 1, 0) => {
                let na = va.len();
                let mut data = va.data().to_vec();
                data.extend_from_slice(vb.data());
                let out = Tensor::vector(data);
                Ok(self.push(
                    out,
                    vec![a, b],
                    Some(Box::new(move |g: &Tensor| {
                        vec![
                            Tensor::vector(g.data()[..na].to_vec()),
                            Tensor::vector(g.data()[na..].to_vec()),
                        ]
                    })),
                ))
            }
            (2, 2, 0) => {
                if va.shape()[1] != vb.shape()[1] {
                    return Err(Error::Shape(format!(
                        "concat axis 0: {:?} vs {:?}",
                        va.shape(),
                        vb.shape()
                    )));
                }
                let (ra, cols) = (va.shape()[0], va.shape()[1]);
                let rb = vb.shape()[0];
                let mut data = va.data().to_vec();
                data.extend_from_slice(vb.data());
                let out = Tensor::matrix(ra + rb, cols, data)?;
                Ok(self.push(
                    out,
                    vec![a, b],
                    Some(Box::new(move |g: &Tensor| {
                        vec![
                            Tensor::matrix(ra, cols, g.data()[..ra * cols].to_vec()).unwrap(),
                            Tensor::matrix(rb, cols, g.data()[ra * cols..].to_vec()).unwrap(),
                        ]
                    })),
                ))
            }
            (2, 2, 1) => {
                if va.shape()[0] != vb.shape()[0] {
                    return Err(Error::Shape(format!(
                        "concat axis 1: {:?} vs {:?}",
                        va.shape(),
                        vb.shape()
                    )));
                }
                let (rows, ca, cb) = (va.shape()[0], va.shape()[1], vb.shape()[1]);
                let mut data = Vec::with_capacity(rows * (ca + cb));
                for r in 0..rows {
                    data.extend_from_slice(va.row(r));
                    data.extend_from_slice(vb.row(r));
                }
                let out = Tensor::matrix(rows, ca + cb, data)?;
                Ok(self.push(
                    out,
                    vec![a, b],
                    Some(Box::new(move |g: &Tensor| {
                        let mut da = Vec::with_capacity(rows * ca);
                        let mut db = Vec::with_capacity(rows * cb);
                        for r in 0..rows {
                            let grow = g.row(r);
                            da.extend_from_slice(&grow[..ca]);
                            db.extend_from_slice(&grow[ca..]);
                        }
                        vec![
                            Tensor::matrix(rows, ca, da).unwrap(),
                            Tensor::matrix(rows, cb, db).unwrap(),
                        ]
                    })),
                ))
            }
            _ => Err(Error::Shape(format!(
                "concat axis {axis}: {:?} vs {:?}",
                va.shape(),
                vb.shape()
            ))),
        }
    }

    /// Stacks n same-length vectors into an n×d matrix.
    pub fn stack_rows(&self, rows: &[NodeId]) -> Result<NodeId> {
        if rows.is_empty() {
            return Err(Error::Validation("stack_rows of empty sequence".into()));
        }
        let values: Vec<Tensor> = rows.iter().map(|id| self.value(*id)).collect();
        let d = values[0].len();
        let mut data = Vec::with_capacity(values.len() * d);
        for v in &values {
            if v.shape().len() != 1 || v.len() != d {
                return Err(Error::Shape(format!(
                    "stack_rows: expected vectors of {d}, got {:?}",
                    v.shape()
                )));
            }
            data.extend_from_slice(v.data());
        }
        let n = values.len();
        let out = Tensor::matrix(n, d, data)?;
        Ok(self.push(
            out,
            rows.to_vec(),
            Some(Box::new(move |g: &Tensor| {
                (0..n).map(|r| Tensor::vector(g.row(r).to_vec())).collect()
            })),
        ))
    }

    /// Extracts row `i` of a matrix as a vector.
    pub fn row(&self, m: NodeId, i: usize) -> Result<NodeId> {
        let vm = self.value(m);
        if vm.shape().len() != 2 || i >= vm.shape()[0] {
            return Err(Error::Index(format!(
                "row {i} of matrix {:?}",
                vm.shape()
            )));
        }
        let (rows, cols) = (vm.shape()[0], vm.shape()[1]);
        let out = Tensor::vector(vm.row(i).to_vec());
        Ok(self.push(
            out,
            vec![m],
            Some(Box::new(move |g: &Tensor| {
                let mut dm = Tensor::zeros(&[rows, cols]);
                dm.data_mut()[i * cols..(i + 1) * cols].copy_from_slice(g.data());
                vec![dm]
            })),
        ))
    }

    /// Embedding-style lookup: selects rows of `table` by id. The gradient
    /// scatters additively into the selected rows only.
    pub fn gather_rows(&self, table: NodeId, ids: &[usize]) -> Result<NodeId> {
        let vt = self.value(table);
        if vt.shape().len() != 2 {
            return Err(Error::Shape(format!(
                "gather_rows from tensor {:?}",
                vt.shape()
            )));
        }
        let (v, d) = (vt.shape()[0], vt.shape()[1]);
        let mut data = Vec::with_capacity(ids.len() * d);
        for &id in ids {
            if id >= v {
                return Err(Error::Index(format!("row id {id} in table of {v}")));
            }
            data.extend_from_slice(vt.row(id));
        }
        let out = Tensor::matrix(ids.len(), d, data)?;
        let ids = ids.to_vec();
        Ok(self.push(
            out,
            vec![table],
            Some(Box::new(move |g: &Tensor| {
                let mut dt = Tensor::zeros(&[v, d]);
                for (k, &id) in ids.iter().enumerate() {
                    let grow = g.row(k);
                    let drow = &mut dt.data_mut()[id * d..(id + 1) * d];
                    for (slot, gi) in drow.iter_mut().zip(grow) {
                        *slot += gi;
                    }
                }
                vec![dt]
            })),
        ))
    }

    /// Picks individual matrix entries; output is a vector of the picked values.
    pub fn gather_elems(&self, m: NodeId, coords: &[(usize, usize)]) -> Result<NodeId> {
        let vm = self.value(m);
        if vm.shape().len() != 2 {
            return Err(Error::Shape(format!(
                "gather_elems from tensor {:?}",
                vm.shape()
            )));
        }
        let (rows, cols) = (vm.shape()[0], vm.shape()[1]);
        let mut data = Vec::with_capacity(coords.len());
        for &(r, c) in coords {
            if r >= rows || c >= cols {
                return Err(Error::Index(format!(
                    "entry ({r},{c}) of matrix {rows}x{cols}"
                )));
            }
            data.push(vm.at(r, c));
        }
        let out = Tensor::vector(data);
        let coords = coords.to_vec();
        Ok(self.push(
            out,
            vec![m],
            Some(Box::new(move |g: &Tensor| {
                let mut dm = Tensor::zeros(&[rows, cols]);
                for (k, &(r, c)) in coords.iter().enumerate() {
                    let cur = dm.at(r, c);
                    dm.set(r, c, cur + g.data()[k]);
                }
                vec![dm]
            })),
        ))
    }

    /// Picks element `i` of a vector as a scalar node.
    pub fn elem(&self, v: NodeId, i: usize) -> Result<NodeId> {
        let vv = self.value(v);
        if vv.shape().len() != 1 || i >= vv.len() {
            return Err(Error::Index(format!("elem {i} of vector {:?}", vv.shape())));
        }
        let n = vv.len();
        let out = Tensor::scalar(vv.data()[i]);
        Ok(self.push(
            out,
            vec![v],
            Some(Box::new(move |g: &Tensor| {
                let mut dv = vec![0.0; n];
                dv[i] = g.item();
                vec![Tensor::vector(dv)]
            })),
        ))
    }

    /// Sum of all elements, as a scalar node.
    pub fn sum(&self, x: NodeId) -> NodeId {
        let vx = self.value(x);
        let out = Tensor::scalar(vx.data().iter().sum());
        let shape = vx.shape().to_vec();
        self.push(
            out,
            vec![x],
            Some(Box::new(move |g: &Tensor| {
                let n: usize = shape.iter().product();
                vec![Tensor::new(shape.clone(), vec![g.item(); n]).unwrap()]
            })),
        )
    }

    /// Multiplication by a constant.
    pub fn scale(&self, x: NodeId, factor: f64) -> NodeId {
        let out = self.value(x).scale(factor);
        self.push(
            out,
            vec![x],
            Some(Box::new(move |g: &Tensor| vec![g.scale(factor)])),
        )
    }

    /// `log Σ exp` of a vector, as a scalar node. Shift-invariant and
    /// overflow-free.
    pub fn log_sum_exp(&self, v: NodeId) -> Result<NodeId> {
        let vv = self.value(v);
        if vv.shape().len() != 1 || vv.is_empty() {
            return Err(Error::Validation(format!(
                "log_sum_exp of tensor {:?}",
                vv.shape()
            )));
        }
        let lse = crate::tensor::log_sum_exp(vv.data())?;
        let soft: Vec<f64> = vv.data().iter().map(|x| (x - lse).exp()).collect();
        let out = Tensor::scalar(lse);
        Ok(self.push(
            out,
            vec![v],
            Some(Box::new(move |g: &Tensor| {
                let gi = g.item();
                vec![Tensor::vector(soft.iter().map(|s| s * gi).collect())]
            })),
        ))
    }

    /// Column-wise `log Σ exp` of a matrix: reduces n×k over rows to a
    /// length-k vector.
    pub fn log_sum_exp_cols(&self, m: NodeId) -> Result<NodeId> {
        let vm = self.value(m);
        if vm.shape().len() != 2 {
            return Err(Error::Shape(format!(
                "log_sum_exp_cols of tensor {:?}",
                vm.shape()
            )));
        }
        let (rows, cols) = (vm.shape()[0], vm.shape()[1]);
        let mut lse = vec![0.0; cols];
        for (j, slot) in lse.iter_mut().enumerate() {
            let col: Vec<f64> = (0..rows).map(|i| vm.at(i, j)).collect();
            *slot = crate::tensor::log_sum_exp(&col)?;
        }
        let out = Tensor::vector(lse.clone());
        Ok(self.push(
            out,
            vec![m],
            Some(Box::new(move |g: &Tensor| {
                let mut dm = Tensor::zeros(&[rows, cols]);
                for j in 0..cols {
                    let gj = g.data()[j];
                    for i in 0..rows {
                        dm.set(i, j, (vm.at(i, j) - lse[j]).exp() * gj);
                    }
                }
                vec![dm]
            })),
        ))
    }

    /// Adds `v[i]` to every element of row `i` (column-vector broadcast).
    pub fn add_col(&self, m: NodeId, v: NodeId) -> Result<NodeId> {
        let (vm, vv) = (self.value(m), self.value(v));
        if vm.shape().len() != 2 || vv.shape().len() != 1 || vm.shape()[0] != vv.len() {
            return Err(Error::Shape(format!(
                "add_col: {:?} vs {:?}",
                vm.shape(),
                vv.shape()
            )));
        }
        let (rows, cols) = (vm.shape()[0], vm.shape()[1]);
        let mut data = vm.data().to_vec();
        for i in 0..rows {
            let vi = vv.data()[i];
            for x in &mut data[i * cols..(i + 1) * cols] {
                *x += vi;
            }
        }
        let out = Tensor::matrix(rows, cols, data)?;
        Ok(self.push(
            out,
            vec![m, v],
            Some(Box::new(move |g: &Tensor| {
                let dv: Vec<f64> = (0..rows).map(|i| g.row(i).iter().sum()).collect();
                vec![g.clone(), Tensor::vector(dv)]
            })),
        ))
    }

    /// Inverted dropout: in training mode each element is zeroed with
    /// probability `rate` and survivors are scaled by `1/(1−rate)`;
    /// in inference mode this is the identity and draws nothing from `rng`.
    pub fn dropout<R: Rng>(
        &self,
        x: NodeId,
        rate: f64,
        training: bool,
        rng: &mut R,
    ) -> Result<NodeId> {
        if !(0.0..1.0).contains(&rate) {
            return Err(Error::Validation(format!(
                "dropout rate {rate} outside [0, 1)"
            )));
        }
        if !training || rate == 0.0 {
            // Identity pass-through keeps the graph simple.
            let out = self.value(x);
            return Ok(self.push(
                out,
                vec![x],
                Some(Box::new(|g: &Tensor| vec![g.clone()])),
            ));
        }
        let vx = self.value(x);
        let keep = 1.0 - rate;
        let mask: Vec<f64> = (0..vx.len())
            .map(|_| {
                if rng.random::<f64>() < rate {
                    0.0
                } else {
                    1.0 / keep
                }
            })
            .collect();
        let data = vx.data().iter().zip(&mask).map(|(v, m)| v * m).collect();
        let out = Tensor::new(vx.shape().to_vec(), data)?;
        Ok(self.push(
            out,
            vec![x],
            Some(Box::new(move |g: &Tensor| {
                let dx = g.data().iter().zip(&mask).map(|(gi, m)| gi * m).collect();
                vec![Tensor::new(g.shape().to_vec(), dx).unwrap()]
            })),
        ))
    }

    /// Backpropagates from a scalar node, returning gradients for every node.
    pub fn backward(&self, root: NodeId) -> Result<Gradients> {
        let nodes = self.nodes.borrow();
        if nodes[root.0].value.len() != 1 {
            return Err(Error::Shape(format!(
                "backward from non-scalar node of shape {:?}",
                nodes[root.0].value.shape()
            )));
        }
        let mut grads: Vec<Option<Tensor>> = vec![None; nodes.len()];
        grads[root.0] = Some(Tensor::scalar(1.0));
        for idx in (0..=root.0).rev() {
            let Some(grad_out) = grads[idx].take() else {
                continue;
            };
            if let Some(backward) = &nodes[idx].backward {
                let contributions = backward(&grad_out);
                debug_assert_eq!(contributions.len(), nodes[idx].parents.len());
                for (parent, contribution) in nodes[idx].parents.iter().zip(contributions) {
                    match &mut grads[parent.0] {
                        Some(existing) => {
                            *existing = existing.add(&contribution)?;
                        }
                        slot @ None => *slot = Some(contribution),
                    }
                }
            }
            grads[idx] = Some(grad_out);
        }
        Ok(Gradients { grads })
    }
}

pub(crate) fn sigmoid_scalar(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}
