//! Product-form basis inverse `B^-1 = E_k ... E_1`.

/// Elementary matrix equal to the identity except in column `row`, which holds
/// `1 / piv` on the diagonal and `-alpha_i / piv` off it.
#[derive(Clone, Debug)]
struct Eta {
    row: usize,
    piv: f64,
    idx: Vec<usize>,
    val: Vec<f64>,
}

#[derive(Clone, Debug, Default)]
pub(crate) struct Pfi {
    etas: Vec<Eta>,
}

impl Pfi {
    pub fn clear(&mut self) {
        self.etas.clear();
    }

    /// Records the pivot that replaces basis position `row` by a column whose
    /// transformed values are `alpha`.
    pub fn push(&mut self, row: usize, alpha: &[f64]) {
        let (idx, val): (Vec<usize>, Vec<f64>) =
            alpha.iter().enumerate().filter(|&(i, &a)| i != row && a != 0.0).map(|(i, &a)| (i, a)).unzip();
        let piv = alpha[row];
        if piv == 1.0 && idx.is_empty() {
            return;
        }
        self.etas.push(Eta { row, piv, idx, val });
    }

    /// Scales position `row` by `1 / piv`.
    pub fn push_unit(&mut self, row: usize, piv: f64) {
        self.etas.push(Eta { row, piv, idx: Vec::new(), val: Vec::new() });
    }

    /// `x <- B^-1 x`.
    pub fn ftran(&self, x: &mut [f64]) {
        for e in &self.etas {
            let xr = x[e.row];
            if xr == 0.0 {
                continue;
            }
            let xr = xr / e.piv;
            x[e.row] = xr;
            for (&i, &a) in e.idx.iter().zip(&e.val) {
                x[i] -= a * xr;
            }
        }
    }

    /// `v' <- v' B^-1`.
    pub fn btran(&self, v: &mut [f64]) {
        for e in self.etas.iter().rev() {
            let mut s = v[e.row];
            for (&i, &a) in e.idx.iter().zip(&e.val) {
                s -= v[i] * a;
            }
            v[e.row] = s / e.piv;
        }
    }
}
