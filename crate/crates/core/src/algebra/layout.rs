use crate::error::{Result, SteerError};

/// Largest supported Hilbert-space dimension (13 qutrits).
pub const MAX_DIM: usize = 1_594_323;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SiteRole {
    System(usize),
    Ancilla(usize),
}

/// Geometry of an interleaved chain `s₁ a₁ s₂ a₂ …`.
///
/// Site 0 is the most significant digit of the product-basis index.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ChainLayout {
    local_dim: usize,
    roles: Vec<SiteRole>,
    system_sites: Vec<usize>,
    ancilla_sites: Vec<usize>,
}

impl ChainLayout {
    fn from_roles(local_dim: usize, roles: Vec<SiteRole>) -> Result<Self> {
        let dim = (local_dim as f64).powi(roles.len() as i32);
        if dim > MAX_DIM as f64 {
            return Err(SteerError::EngineLimit {
                qutrits: roles.len(),
                local_dim,
                limit: MAX_DIM,
            });
        }
        let system_sites = roles
            .iter()
            .enumerate()
            .filter(|(_, r)| matches!(r, SiteRole::System(_)))
            .map(|(i, _)| i)
            .collect();
        let ancilla_sites = roles
            .iter()
            .enumerate()
            .filter(|(_, r)| matches!(r, SiteRole::Ancilla(_)))
            .map(|(i, _)| i)
            .collect();
        Ok(ChainLayout {
            local_dim,
            roles,
            system_sites,
            ancilla_sites,
        })
    }

    /// `L_s` spin-1 system sites with one ancilla qutrit on every bond,
    /// `L = 2 L_s − 1` sites in total.
    pub fn spin_one(ls: usize) -> Result<Self> {
        if ls < 2 {
            return Err(SteerError::InvalidArgument(format!(
                "need at least two system sites, got {ls}"
            )));
        }
        let mut roles = Vec::with_capacity(2 * ls - 1);
        for l in 0..ls {
            roles.push(SiteRole::System(l));
            if l + 1 < ls {
                roles.push(SiteRole::Ancilla(l));
            }
        }
        Self::from_roles(3, roles)
    }

    /// System sites only, no ancillas.
    pub fn system_only(ls: usize, local_dim: usize) -> Result<Self> {
        Self::from_roles(local_dim, (0..ls).map(SiteRole::System).collect())
    }

    /// `n` qubit pairs `s₁ a₁ … s_n a_n`, each system qubit with its own ancilla.
    pub fn qubit_pairs(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(SteerError::InvalidArgument("need at least one pair".into()));
        }
        let mut roles = Vec::with_capacity(2 * n);
        for l in 0..n {
            roles.push(SiteRole::System(l));
            roles.push(SiteRole::Ancilla(l));
        }
        Self::from_roles(2, roles)
    }

    /// Inverse of [`describe`](Self::describe).
    pub fn from_description(desc: &str, local_dim: usize) -> Result<Self> {
        let roles = desc
            .split(',')
            .map(|tok| {
                let (kind, idx) = tok.split_at(1.min(tok.len()));
                let l: usize = idx
                    .parse()
                    .ok()
                    .filter(|&l| l >= 1)
                    .ok_or_else(|| SteerError::InvalidArgument(format!("bad site label '{tok}'")))?;
                match kind {
                    "s" => Ok(SiteRole::System(l - 1)),
                    "a" => Ok(SiteRole::Ancilla(l - 1)),
                    _ => Err(SteerError::InvalidArgument(format!("bad site label '{tok}'"))),
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_roles(local_dim, roles)
    }

    pub fn local_dim(&self) -> usize {
        self.local_dim
    }

    pub fn n_sites(&self) -> usize {
        self.roles.len()
    }

    pub fn n_system(&self) -> usize {
        self.system_sites.len()
    }

    pub fn n_ancilla(&self) -> usize {
        self.ancilla_sites.len()
    }

    pub fn dim(&self) -> usize {
        self.local_dim.pow(self.roles.len() as u32)
    }

    pub fn system_dim(&self) -> usize {
        self.local_dim.pow(self.n_system() as u32)
    }

    pub fn ancilla_dim(&self) -> usize {
        self.local_dim.pow(self.n_ancilla() as u32)
    }

    pub fn role(&self, site: usize) -> Option<SiteRole> {
        self.roles.get(site).copied()
    }

    pub fn roles(&self) -> &[SiteRole] {
        &self.roles
    }

    pub fn system_site(&self, l: usize) -> usize {
        self.system_sites[l]
    }

    pub fn ancilla_site(&self, l: usize) -> usize {
        self.ancilla_sites[l]
    }

    pub fn system_sites(&self) -> &[usize] {
        &self.system_sites
    }

    pub fn ancilla_sites(&self) -> &[usize] {
        &self.ancilla_sites
    }

    /// Index stride of `site` in the product basis.
    pub fn stride(&self, site: usize) -> usize {
        self.local_dim.pow((self.n_sites() - 1 - site) as u32)
    }

    /// Split a full-chain index into (system index, ancilla index), each
    /// ordered left to right.
    pub fn split_index(&self, index: usize) -> (usize, usize) {
        let d = self.local_dim;
        let (mut s, mut a) = (0, 0);
        for site in 0..self.n_sites() {
            let digit = (index / self.stride(site)) % d;
            match self.roles[site] {
                SiteRole::System(_) => s = s * d + digit,
                SiteRole::Ancilla(_) => a = a * d + digit,
            }
        }
        (s, a)
    }

    /// Inverse of [`split_index`](Self::split_index).
    pub fn join_index(&self, system: usize, ancilla: usize) -> usize {
        let d = self.local_dim;
        let mut s_digits = Vec::with_capacity(self.n_system());
        let mut a_digits = Vec::with_capacity(self.n_ancilla());
        let (mut s, mut a) = (system, ancilla);
        for _ in 0..self.n_system() {
            s_digits.push(s % d);
            s /= d;
        }
        for _ in 0..self.n_ancilla() {
            a_digits.push(a % d);
            a /= d;
        }
        let mut index = 0;
        for role in &self.roles {
            let digit = match role {
                SiteRole::System(_) => s_digits.pop().unwrap(),
                SiteRole::Ancilla(_) => a_digits.pop().unwrap(),
            };
            index = index * d + digit;
        }
        index
    }

    pub fn describe(&self) -> String {
        self.roles
            .iter()
            .map(|r| match r {
                SiteRole::System(l) => format!("s{}", l + 1),
                SiteRole::Ancilla(l) => format!("a{}", l + 1),
            })
            .collect::<Vec<_>>()
            .join(",")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interleaving() {
        let l = ChainLayout::spin_one(4).unwrap();
        assert_eq!(l.n_sites(), 7);
        assert_eq!(l.n_system(), 4);
        assert_eq!(l.n_ancilla(), 3);
        for k in 0..3 {
            assert_eq!(l.ancilla_site(k), l.system_site(k) + 1);
            assert_eq!(l.system_site(k + 1), l.ancilla_site(k) + 1);
        }
        assert_eq!(l.describe(), "s1,a1,s2,a2,s3,a3,s4");
    }

    #[test]
    fn split_join_inverse() {
        let l = ChainLayout::spin_one(3).unwrap();
        for i in 0..l.dim() {
            let (s, a) = l.split_index(i);
            assert!(s < l.system_dim() && a < l.ancilla_dim());
            assert_eq!(l.join_index(s, a), i);
        }
    }

    #[test]
    fn limits() {
        assert!(ChainLayout::spin_one(1).is_err());
        assert!(ChainLayout::spin_one(7).is_ok());
        assert!(matches!(
            ChainLayout::spin_one(8),
            Err(SteerError::EngineLimit { .. })
        ));
    }
}
