use num_complex::Complex64 as C64;

use crate::algebra::{ChainLayout, LocalOperator};

/// Index bookkeeping for applying an operator on a fixed list of sites:
/// `bases` enumerates every full index whose target digits are zero and
/// `offsets[k]` is the displacement of local state `k`.
#[derive(Debug, Clone)]
pub struct SitePlan {
    bases: Vec<usize>,
    offsets: Vec<usize>,
}

impl SitePlan {
    pub fn new(layout: &ChainLayout, sites: &[usize]) -> Self {
        let d = layout.local_dim();
        let k = sites.len();
        let mut offsets = vec![0usize; d.pow(k as u32)];
        for (local, off) in offsets.iter_mut().enumerate() {
            let mut rem = local;
            for &s in sites.iter().rev() {
                *off += (rem % d) * layout.stride(s);
                rem /= d;
            }
        }
        let others: Vec<usize> = (0..layout.n_sites()).filter(|s| !sites.contains(s)).collect();
        let n_bases = d.pow(others.len() as u32);
        let mut bases = Vec::with_capacity(n_bases);
        for idx in 0..n_bases {
            let mut rem = idx;
            let mut base = 0;
            for &s in others.iter().rev() {
                base += (rem % d) * layout.stride(s);
                rem /= d;
            }
            bases.push(base);
        }
        bases.sort_unstable();
        SitePlan { bases, offsets }
    }

    pub fn bases(&self) -> &[usize] {
        &self.bases
    }

    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    /// `y += op · x` restricted to the planned sites.
    pub fn apply_add(&self, op: &LocalOperator, x: &[C64], y: &mut [C64]) {
        let nz = op.nonzeros();
        let n = self.offsets.len();
        let mut local = [C64::new(0.0, 0.0); 27];
        let mut out = [C64::new(0.0, 0.0); 27];
        for &b in &self.bases {
            let mut any = false;
            for k in 0..n {
                local[k] = x[b + self.offsets[k]];
                any |= local[k] != C64::new(0.0, 0.0);
            }
            if !any {
                continue;
            }
            out[..n].fill(C64::new(0.0, 0.0));
            for &(r, c, v) in nz {
                out[r] += v * local[c];
            }
            for k in 0..n {
                y[b + self.offsets[k]] += out[k];
            }
        }
    }
}
