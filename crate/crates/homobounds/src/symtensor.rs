//! Small dense symmetric matrices: Jacobi eigensolver, spectral functions,
//! trace chains, rotations and the trace-pairing inequality.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub const MAX_DIM: usize = 8;

const TINY: f64 = 1e-300;

/// Dense square matrix, row-major. Used for products and frames.
#[derive(Clone, Debug, PartialEq)]
pub struct Mat {
    n: usize,
    data: Vec<f64>,
}

impl Mat {
    pub fn zeros(n: usize) -> Mat {
        Mat { n, data: vec![0.0; n * n] }
    }

    pub fn identity(n: usize) -> Mat {
        let mut m = Mat::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Mat> {
        let n = rows.len();
        let mut m = Mat::zeros(n);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != n {
                return Err(Error::DimensionMismatch(n, r.len()));
            }
            m.data[i * n..(i + 1) * n].copy_from_slice(r);
        }
        Ok(m)
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(cols: &[Vec<f64>]) -> Result<Mat> {
        let n = cols.len();
        let mut m = Mat::zeros(n);
        for (j, c) in cols.iter().enumerate() {
            if c.len() != n {
                return Err(Error::DimensionMismatch(n, c.len()));
            }
            for i in 0..n {
                m.data[i * n + j] = c[i];
            }
        }
        Ok(m)
    }

    /// Planar rotation by `angle` radians (N = 2).
    pub fn rotation2(angle: f64) -> Mat {
        let (s, c) = angle.sin_cos();
        Mat { n: 2, data: vec![c, -s, s, c] }
    }

    /// Givens rotation in the (i, j) plane of an n-dimensional space.
    pub fn givens(n: usize, i: usize, j: usize, angle: f64) -> Mat {
        let (s, c) = angle.sin_cos();
        let mut m = Mat::identity(n);
        m.data[i * n + i] = c;
        m.data[j * n + j] = c;
        m.data[i * n + j] = -s;
        m.data[j * n + i] = s;
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, j)).collect()
    }

    pub fn transpose(&self) -> Mat {
        let n = self.n;
        let mut t = Mat::zeros(n);
        for i in 0..n {
            for j in 0..n {
                t.data[j * n + i] = self.data[i * n + j];
            }
        }
        t
    }

    pub fn mul(&self, other: &Mat) -> Mat {
        let n = self.n;
        let mut out = Mat::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * other.data[k * n + j];
                }
            }
        }
        out
    }

    pub fn sub(&self, other: &Mat) -> Mat {
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Mat { n: self.n, data }
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    pub fn frob(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        let n = self.n;
        (0..n).map(|i| (0..n).map(|j| self.data[i * n + j] * v[j]).sum()).collect()
    }

    /// Largest entry of |QᵀQ − I|.
    pub fn orthonormality_defect(&self) -> f64 {
        let g = self.transpose().mul(self);
        let n = self.n;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((g.get(i, j) - target).abs());
            }
        }
        worst
    }
}

/// Symmetric matrix stored as its packed upper triangle.
#[derive(Clone, Debug, PartialEq)]
pub struct SymTensor {
    n: usize,
    upper: Vec<f64>,
}

fn packed_index(n: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    i * n - i * i.saturating_sub(1) / 2 + (j - i)
}

fn check_dim(n: usize) -> Result<()> {
    if n == 0 || n > MAX_DIM {
        Err(Error::BadDimension(n))
    } else {
        Ok(())
    }
}

impl SymTensor {
    pub fn zeros(n: usize) -> Result<SymTensor> {
        check_dim(n)?;
        Ok(SymTensor { n, upper: vec![0.0; n * (n + 1) / 2] })
    }

    pub fn scalar(n: usize, s: f64) -> Result<SymTensor> {
        let mut t = SymTensor::zeros(n)?;
        for i in 0..n {
            t.set(i, i, s);
        }
        Ok(t)
    }

    pub fn identity(n: usize) -> Result<SymTensor> {
        SymTensor::scalar(n, 1.0)
    }

    pub fn diag(d: &[f64]) -> Result<SymTensor> {
        let mut t = SymTensor::zeros(d.len())?;
        for (i, &v) in d.iter().enumerate() {
            t.set(i, i, v);
        }
        Ok(t)
    }

    /// Build from full rows; asymmetry beyond 1e-12 relative is rejected,
    /// smaller defects are averaged away.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<SymTensor> {
        let m = Mat::from_rows(rows)?;
        SymTensor::from_mat(&m, 1e-12)
    }

    pub fn from_mat(m: &Mat, rel_tol: f64) -> Result<SymTensor> {
        let n = m.dim();
        let mut t = SymTensor::zeros(n)?;
        let scale = m.frob().max(TINY);
        for i in 0..n {
            for j in i..n {
                let (a, b) = (m.get(i, j), m.get(j, i));
                if (a - b).abs() > rel_tol * scale.max(1.0) {
                    return Err(Error::NotSymmetric((a - b).abs()));
                }
                t.set(i, j, 0.5 * (a + b));
            }
        }
        Ok(t)
    }

    /// Q diag(values) Qᵀ for a frame whose columns are the eigenvectors.
    pub fn from_spectrum(values: &[f64], q: &Mat) -> Result<SymTensor> {
        let n = values.len();
        if q.dim() != n {
            return Err(Error::DimensionMismatch(n, q.dim()));
        }
        let mut t = SymTensor::zeros(n)?;
        for i in 0..n {
            for j in i..n {
                let v = (0..n).map(|k| q.get(i, k) * values[k] * q.get(j, k)).sum();
                t.set(i, j, v);
            }
        }
        Ok(t)
    }

    /// Σ wᵢ vᵢ⊗vᵢ.
    pub fn from_dyads(vectors: &[Vec<f64>], weights: &[f64]) -> Result<SymTensor> {
        let n = vectors.first().map(|v| v.len()).unwrap_or(0);
        let mut t = SymTensor::zeros(n)?;
        for (v, &w) in vectors.iter().zip(weights) {
            if v.len() != n {
                return Err(Error::DimensionMismatch(n, v.len()));
            }
            for i in 0..n {
                for j in i..n {
                    let x = t.get(i, j) + w * v[i] * v[j];
                    t.set(i, j, x);
                }
            }
        }
        Ok(t)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.upper[packed_index(self.n, i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let k = packed_index(self.n, i, j);
        self.upper[k] = v;
    }

    pub fn to_mat(&self) -> Mat {
        let n = self.n;
        let mut m = Mat::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m.set(i, j, self.get(i, j));
            }
        }
        m
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.n).map(|i| (0..self.n).map(|j| self.get(i, j)).collect()).collect()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn frob(&self) -> f64 {
        self.to_mat().frob()
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    fn zip_with(&self, other: &SymTensor, f: impl Fn(f64, f64) -> f64) -> Result<SymTensor> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch(self.n, other.n));
        }
        let upper = self.upper.iter().zip(&other.upper).map(|(&a, &b)| f(a, b)).collect();
        Ok(SymTensor { n: self.n, upper })
    }

    pub fn add(&self, other: &SymTensor) -> Result<SymTensor> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &SymTensor) -> Result<SymTensor> {
        self.zip_with(other, |a, b| a - b)
    }

    /// α·self + β·other
    pub fn lincomb(&self, alpha: f64, other: &SymTensor, beta: f64) -> Result<SymTensor> {
        self.zip_with(other, |a, b| alpha * a + beta * b)
    }

    pub fn scale(&self, s: f64) -> SymTensor {
        SymTensor { n: self.n, upper: self.upper.iter().map(|x| s * x).collect() }
    }

    /// self + s·I
    pub fn shift(&self, s: f64) -> SymTensor {
        let mut t = self.clone();
        for i in 0..self.n {
            let v = t.get(i, i) + s;
            t.set(i, i, v);
        }
        t
    }

    pub fn quad(&self, v: &[f64]) -> f64 {
        let n = self.n;
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                acc += v[i] * self.get(i, j) * v[j];
            }
        }
        acc
    }

    pub fn eig(&self) -> EigSystem {
        eig(self)
    }

    pub fn min_eig(&self) -> f64 {
        *eig(self).values.last().unwrap()
    }

    pub fn max_eig(&self) -> f64 {
        eig(self).values[0]
    }

    /// f(S) through the spectral decomposition.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> f64) -> SymTensor {
        let e = eig(self);
        let vals: Vec<f64> = e.values.iter().map(|&x| f(x)).collect();
        SymTensor::from_spectrum(&vals, &e.vectors).expect("same dimension")
    }

    /// Inverse of an SPD matrix; SingularFactor when the smallest eigenvalue
    /// is below 1e-14 of the spectral scale.
    pub fn inverse_spd(&self) -> Result<SymTensor> {
        let e = eig(self);
        let scale = e.values.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(TINY);
        let lo = *e.values.last().unwrap();
        if lo <= 1e-14 * scale {
            return Err(Error::SingularFactor { min_eig: lo });
        }
        let vals: Vec<f64> = e.values.iter().map(|x| 1.0 / x).collect();
        SymTensor::from_spectrum(&vals, &e.vectors)
    }

    /// Symmetrised product (ST + TS)/2; exact for commuting pairs.
    pub fn sym_product(&self, other: &SymTensor) -> Result<SymTensor> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch(self.n, other.n));
        }
        let a = self.to_mat().mul(&other.to_mat());
        let b = a.transpose();
        let mut t = SymTensor::zeros(self.n)?;
        for i in 0..self.n {
            for j in i..self.n {
                t.set(i, j, 0.5 * (a.get(i, j) + b.get(i, j)));
            }
        }
        Ok(t)
    }

    /// Loewner order check self ≥ 0 with tolerance, via smallest eigenvalue.
    pub fn is_psd(&self, tol: f64) -> bool {
        self.min_eig() >= -tol
    }
}

impl Serialize for SymTensor {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_rows().serialize(s)
    }
}

impl<'de> Deserialize<'de> for SymTensor {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(d)?;
        SymTensor::from_rows(&rows).map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EigSystem {
    /// descending
    pub values: Vec<f64>,
    /// eigenvectors as columns
    pub vectors: Mat,
}

impl EigSystem {
    pub fn reconstruct(&self) -> SymTensor {
        SymTensor::from_spectrum(&self.values, &self.vectors).expect("consistent eigensystem")
    }
}

/// Cyclic Jacobi with threshold sweeps.
pub fn eig(s: &SymTensor) -> EigSystem {
    let n = s.dim();
    let mut a = s.to_mat();
    let mut v = Mat::identity(n);
    let norm = a.frob().max(TINY);

    for sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a.get(i, j).powi(2))
            .sum::<f64>()
            .sqrt();
        if off <= 1e-14 * norm {
            break;
        }
        // skip tiny entries in the early sweeps only
        let thresh = if sweep < 3 { 0.2 * off / (n * n) as f64 } else { 0.0 };
        for p in 0..n {
            for q in p + 1..n {
                let apq = a.get(p, q);
                if apq.abs() <= thresh || apq == 0.0 {
                    continue;
                }
                let theta = (a.get(q, q) - a.get(p, p)) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * c;
                for k in 0..n {
                    let akp = a.get(k, p);
                    let akq = a.get(k, q);
                    a.set(k, p, c * akp - sn * akq);
                    a.set(k, q, sn * akp + c * akq);
                }
                for k in 0..n {
                    let apk = a.get(p, k);
                    let aqk = a.get(q, k);
                    a.set(p, k, c * apk - sn * aqk);
                    a.set(q, k, sn * apk + c * aqk);
                }
                for k in 0..n {
                    let vkp = v.get(k, p);
                    let vkq = v.get(k, q);
                    v.set(k, p, c * vkp - sn * vkq);
                    v.set(k, q, sn * vkp + c * vkq);
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a.get(j, j).partial_cmp(&a.get(i, i)).unwrap());
    let values: Vec<f64> = order.iter().map(|&i| a.get(i, i)).collect();
    let mut vectors = Mat::zeros(n);
    for (col, &src) in order.iter().enumerate() {
        let mut x = v.column(src);
        if let Some(first) = x.iter().find(|c| c.abs() > 1e-12) {
            if *first < 0.0 {
                x.iter_mut().for_each(|c| *c = -*c);
            }
        }
        for i in 0..n {
            vectors.set(i, col, x[i]);
        }
    }
    EigSystem { values, vectors }
}

/// One factor of a trace chain: a tensor or a scalar, raised to an integer power.
#[derive(Clone, Copy, Debug)]
pub enum Factor<'a> {
    Tensor(&'a SymTensor, i32),
    Scalar(f64, i32),
}

fn tensor_power(s: &SymTensor, p: i32) -> Result<Mat> {
    let base = if p < 0 { s.inverse_spd()?.to_mat() } else { s.to_mat() };
    let mut out = Mat::identity(s.dim());
    for _ in 0..p.unsigned_abs() {
        out = out.mul(&base);
    }
    Ok(out)
}

/// Trace of an ordered product of (possibly inverted) factors.
pub fn trace_chain(factors: &[Factor]) -> Result<f64> {
    let n = factors
        .iter()
        .find_map(|f| match f {
            Factor::Tensor(t, _) => Some(t.dim()),
            Factor::Scalar(..) => None,
        })
        .ok_or(Error::BadDimension(0))?;
    let mut prod = Mat::identity(n);
    let mut coef = 1.0;
    for f in factors {
        match *f {
            Factor::Tensor(t, p) => {
                if t.dim() != n {
                    return Err(Error::DimensionMismatch(n, t.dim()));
                }
                prod = prod.mul(&tensor_power(t, p)?);
            }
            Factor::Scalar(s, p) => {
                if p < 0 && s.abs() <= TINY {
                    return Err(Error::SingularFactor { min_eig: s });
                }
                coef *= s.powi(p);
            }
        }
    }
    Ok(coef * prod.trace())
}

/// ‖ST − TS‖_F
pub fn commutator_norm(s: &SymTensor, t: &SymTensor) -> Result<f64> {
    if s.dim() != t.dim() {
        return Err(Error::DimensionMismatch(s.dim(), t.dim()));
    }
    let st = s.to_mat().mul(&t.to_mat());
    Ok(st.sub(&st.transpose()).frob())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PairingBound {
    pub lower_bound: f64,
    pub gap: f64,
}

/// tr(EF) ≥ Σ σᵢ(E) σ_{N−i+1}(F), σ ascending; returns the bound and the gap.
pub fn trace_pairing_bound(e: &SymTensor, f: &SymTensor) -> Result<PairingBound> {
    if e.dim() != f.dim() {
        return Err(Error::DimensionMismatch(e.dim(), f.dim()));
    }
    // eig gives descending values: pairing descending E with ascending F
    let se = eig(e).values;
    let mut sf = eig(f).values;
    sf.reverse();
    let lower_bound: f64 = se.iter().zip(&sf).map(|(a, b)| a * b).sum();
    let tr = trace_chain(&[Factor::Tensor(e, 1), Factor::Tensor(f, 1)])?;
    Ok(PairingBound { lower_bound, gap: tr - lower_bound })
}

/// Q S Qᵀ
pub fn rotate(s: &SymTensor, q: &Mat) -> Result<SymTensor> {
    if q.dim() != s.dim() {
        return Err(Error::DimensionMismatch(s.dim(), q.dim()));
    }
    let defect = q.orthonormality_defect();
    if defect > 1e-12 {
        return Err(Error::NotOrthonormal(defect));
    }
    let m = q.mul(&s.to_mat()).mul(&q.transpose());
    SymTensor::from_mat(&m, 1e-10)
}
