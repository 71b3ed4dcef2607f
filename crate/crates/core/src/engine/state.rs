use nalgebra::DVector;
use num_complex::Complex64 as C64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{evolve, ChainOperator, KrylovOptions, LinearOperator, PropagationReport};
use crate::algebra::{ChainLayout, SiteRole};
use crate::error::{Result, SteerError};
use crate::linalg::norm;

/// Initial system configurations; ancillas always start in `|↑⟩`.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialState {
    AllUp,
    AllZero,
    /// `↑ ↓ ↑ ↓ …` on the system sites.
    Alternating,
    /// Independent Haar-like random single-site states.
    RandomProduct(u64),
    /// Gaussian random system vector (normalized).
    RandomState(u64),
    /// Explicit system-register amplitudes (normalized on use).
    System(Vec<C64>),
}

impl InitialState {
    pub fn label(&self) -> String {
        match self {
            InitialState::AllUp => "all_up".into(),
            InitialState::AllZero => "all_zero".into(),
            InitialState::Alternating => "alternating".into(),
            InitialState::RandomProduct(s) => format!("random_product({s})"),
            InitialState::RandomState(s) => format!("random_state({s})"),
            InitialState::System(_) => "system_vector".into(),
        }
    }
}

/// Dense normalized amplitude vector on a chain layout.
#[derive(Debug, Clone)]
pub struct PureState {
    layout: ChainLayout,
    amps: Vec<C64>,
    time: f64,
}

fn gaussian_c64(rng: &mut ChaCha8Rng) -> C64 {
    C64::new(StandardNormal.sample(rng), StandardNormal.sample(rng))
}

impl PureState {
    pub fn new(layout: &ChainLayout, kind: &InitialState) -> Result<Self> {
        let d = layout.local_dim();
        let ns = layout.n_system();
        let system: Vec<C64> = match kind {
            InitialState::System(v) => {
                if v.len() != layout.system_dim() {
                    return Err(SteerError::InvalidArgument(format!(
                        "system vector has length {}, expected {}",
                        v.len(),
                        layout.system_dim()
                    )));
                }
                v.clone()
            }
            InitialState::RandomState(seed) => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                (0..layout.system_dim()).map(|_| gaussian_c64(&mut rng)).collect()
            }
            _ => {
                let site_states: Vec<Vec<C64>> = match kind {
                    InitialState::RandomProduct(seed) => {
                        let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                        (0..ns).map(|_| (0..d).map(|_| gaussian_c64(&mut rng)).collect()).collect()
                    }
                    _ => (0..ns)
                        .map(|l| {
                            let k = match kind {
                                InitialState::AllUp => 0,
                                InitialState::AllZero => 1.min(d - 1),
                                _ => {
                                    if l % 2 == 0 {
                                        0
                                    } else {
                                        d - 1
                                    }
                                }
                            };
                            let mut v = vec![C64::new(0.0, 0.0); d];
                            v[k] = C64::new(1.0, 0.0);
                            v
                        })
                        .collect(),
                };
                let mut sys = vec![C64::new(1.0, 0.0)];
                for site in &site_states {
                    sys = sys.iter().flat_map(|a| site.iter().map(move |b| a * b)).collect();
                }
                sys
            }
        };
        let nrm = norm(&system);
        if nrm == 0.0 || !nrm.is_finite() {
            return Err(SteerError::InvalidArgument("initial system vector has zero norm".into()));
        }
        let mut amps = vec![C64::new(0.0, 0.0); layout.dim()];
        for (s, &a) in system.iter().enumerate() {
            amps[layout.join_index(s, 0)] = a / nrm;
        }
        Ok(PureState {
            layout: layout.clone(),
            amps,
            time: 0.0,
        })
    }

    /// Wrap raw amplitudes; they must be normalized to `1e-10`.
    pub fn from_amplitudes(layout: &ChainLayout, amps: Vec<C64>) -> Result<Self> {
        if amps.len() != layout.dim() {
            return Err(SteerError::InvalidArgument(format!(
                "amplitude vector has length {}, expected {}",
                amps.len(),
                layout.dim()
            )));
        }
        let n = norm(&amps);
        if (n - 1.0).abs() > 1e-10 {
            return Err(SteerError::StateCorruption(format!("state norm {n} differs from 1")));
        }
        Ok(PureState {
            layout: layout.clone(),
            amps,
            time: 0.0,
        })
    }

    pub fn layout(&self) -> &ChainLayout {
        &self.layout
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn as_dvector(&self) -> DVector<C64> {
        DVector::from_column_slice(&self.amps)
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn set_time(&mut self, t: f64) {
        self.time = t;
    }

    pub fn norm(&self) -> f64 {
        norm(&self.amps)
    }

    /// Born probabilities of the local basis states on `site`.
    pub fn site_probabilities(&self, site: usize) -> Result<Vec<f64>> {
        self.check_site(site)?;
        let d = self.layout.local_dim();
        let stride = self.layout.stride(site);
        let mut p = vec![0.0; d];
        for (i, z) in self.amps.iter().enumerate() {
            p[(i / stride) % d] += z.norm_sqr();
        }
        Ok(p)
    }

    fn check_site(&self, site: usize) -> Result<()> {
        if site >= self.layout.n_sites() {
            return Err(SteerError::InvalidArgument(format!(
                "site {site} outside a chain of {} sites",
                self.layout.n_sites()
            )));
        }
        Ok(())
    }

    /// Project `site` onto basis state `outcome` and renormalize.
    /// Returns the probability of that outcome before projection.
    pub fn project_site(&mut self, site: usize, outcome: usize) -> Result<f64> {
        let p = self.site_probabilities(site)?;
        let prob = *p.get(outcome).ok_or_else(|| {
            SteerError::InvalidArgument(format!("outcome {outcome} outside the local dimension"))
        })?;
        if prob <= 0.0 {
            return Err(SteerError::StateCorruption(format!(
                "projection of site {site} onto outcome {outcome} has zero weight"
            )));
        }
        let d = self.layout.local_dim();
        let stride = self.layout.stride(site);
        let scale = 1.0 / prob.sqrt();
        for (i, z) in self.amps.iter_mut().enumerate() {
            if (i / stride) % d == outcome {
                *z *= scale;
            } else {
                *z = C64::new(0.0, 0.0);
            }
        }
        Ok(prob)
    }

    /// Born-sampled projective measurement of `site` in the local basis.
    pub fn measure_site<R: Rng + ?Sized>(&mut self, site: usize, rng: &mut R) -> Result<usize> {
        let p = self.site_probabilities(site)?;
        let total: f64 = p.iter().sum();
        if (total - 1.0).abs() > 1e-8 {
            return Err(SteerError::StateCorruption(format!(
                "measurement probabilities of site {site} sum to {total}"
            )));
        }
        let r: f64 = rng.random::<f64>() * total;
        let mut acc = 0.0;
        let mut outcome = p.len() - 1;
        for (k, &pk) in p.iter().enumerate() {
            acc += pk;
            if r < acc && pk > 0.0 {
                outcome = k;
                break;
            }
        }
        while p[outcome] <= 0.0 {
            outcome -= 1;
        }
        self.project_site(site, outcome)?;
        Ok(outcome)
    }

    /// Swap `|outcome⟩ ↔ |↑⟩` on a site that is in the eigenstate `outcome`.
    pub fn reset_site(&mut self, site: usize, outcome: usize) -> Result<()> {
        let p = self.site_probabilities(site)?;
        let off: f64 = p.iter().enumerate().filter(|&(k, _)| k != outcome).map(|(_, v)| v).sum();
        if outcome >= p.len() || off > 1e-12 {
            return Err(SteerError::Contract(format!(
                "reset of site {site}: not in eigenstate {outcome} (off-weight {off:.3e})"
            )));
        }
        if outcome == 0 {
            return Ok(());
        }
        let d = self.layout.local_dim();
        let stride = self.layout.stride(site);
        for i in 0..self.amps.len() {
            if (i / stride) % d == outcome {
                self.amps.swap(i, i - outcome * stride);
            }
        }
        Ok(())
    }

    /// `⟨ψ|O|ψ⟩`, with a check on the imaginary residue.
    pub fn expectation(&self, op: &ChainOperator) -> Result<f64> {
        let v = op.expectation(&self.amps);
        if v.im.abs() > 1e-10 * (1.0 + v.re.abs()) {
            return Err(SteerError::Numerical(format!(
                "expectation of a Hermitian operator has imaginary part {:.3e}",
                v.im
            )));
        }
        Ok(v.re)
    }

    pub fn evolve<H: LinearOperator + ?Sized>(
        &mut self,
        h: &H,
        tau: f64,
        opts: &KrylovOptions,
    ) -> Result<PropagationReport> {
        let rep = evolve(h, &mut self.amps, tau, opts)?;
        self.time += tau;
        Ok(rep)
    }

    /// Renormalize to unit norm; returns the removed drift `|‖ψ‖ − 1|`.
    pub fn renormalize(&mut self) -> f64 {
        let n = self.norm();
        let s = 1.0 / n;
        self.amps.iter_mut().for_each(|z| *z *= s);
        (n - 1.0).abs()
    }

    /// System amplitudes for a fixed ancilla configuration `ancilla`.
    pub fn system_slice(&self, split: &RegisterSplit, ancilla: usize) -> Vec<C64> {
        split.system_block(ancilla).iter().map(|&i| self.amps[i]).collect()
    }
}

/// Precomputed full-chain index for every (system, ancilla) index pair.
#[derive(Debug, Clone)]
pub struct RegisterSplit {
    system_dim: usize,
    ancilla_dim: usize,
    /// `full[a * system_dim + s]`.
    full: Vec<usize>,
}

impl RegisterSplit {
    pub fn new(layout: &ChainLayout) -> Self {
        let (sd, ad) = (layout.system_dim(), layout.ancilla_dim());
        let mut full = vec![0; layout.dim()];
        let d = layout.local_dim();
        for index in 0..layout.dim() {
            let (mut s, mut a) = (0, 0);
            let mut rest = index;
            let mut place = layout.dim();
            for role in layout.roles() {
                place /= d;
                let digit = rest / place;
                rest %= place;
                match role {
                    SiteRole::System(_) => s = s * d + digit,
                    SiteRole::Ancilla(_) => a = a * d + digit,
                }
            }
            full[a * sd + s] = index;
        }
        RegisterSplit {
            system_dim: sd,
            ancilla_dim: ad,
            full,
        }
    }

    pub fn system_dim(&self) -> usize {
        self.system_dim
    }

    pub fn ancilla_dim(&self) -> usize {
        self.ancilla_dim
    }

    /// Full indices of `|s⟩ ⊗ |ancilla⟩` for `s = 0..system_dim`.
    pub fn system_block(&self, ancilla: usize) -> &[usize] {
        &self.full[ancilla * self.system_dim..(ancilla + 1) * self.system_dim]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{aklt_hamiltonian, AkltHamiltonian};
    use rand::SeedableRng;

    #[test]
    fn all_up_is_a_single_basis_state() {
        let layout = ChainLayout::spin_one(2).unwrap();
        let s = PureState::new(&layout, &InitialState::AllUp).unwrap();
        assert_eq!(s.amplitudes()[0], C64::new(1.0, 0.0));
        assert!(s.amplitudes()[1..].iter().all(|z| *z == C64::new(0.0, 0.0)));
        let h = AkltHamiltonian::on_layout(&layout).unwrap();
        assert!((h.energy_per_bond(s.amplitudes()) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn ancillas_start_up_for_every_kind() {
        let layout = ChainLayout::spin_one(3).unwrap();
        let split = RegisterSplit::new(&layout);
        for kind in [
            InitialState::AllZero,
            InitialState::Alternating,
            InitialState::RandomProduct(3),
            InitialState::RandomState(4),
        ] {
            let s = PureState::new(&layout, &kind).unwrap();
            assert!((s.norm() - 1.0).abs() < 1e-12);
            let w: f64 = s.system_slice(&split, 0).iter().map(|z| z.norm_sqr()).sum();
            assert!((w - 1.0).abs() < 1e-12, "{kind:?}");
        }
    }

    #[test]
    fn alternating_energy_matches_direct_count() {
        // |↑↓⟩ has weight 1/6 on |2,0⟩
        let layout = ChainLayout::system_only(3, 3).unwrap();
        let s = PureState::new(&layout, &InitialState::Alternating).unwrap();
        let h = aklt_hamiltonian(3).unwrap();
        assert!((h.energy_per_bond(s.amplitudes()) - 1.0 / 6.0).abs() < 1e-14);
    }

    #[test]
    fn measurement_and_reset_are_consistent() {
        let layout = ChainLayout::spin_one(2).unwrap();
        let mut amps = vec![C64::new(0.0, 0.0); 27];
        let h = std::f64::consts::FRAC_1_SQRT_2;
        amps[0] = C64::new(h, 0.0);
        amps[3] = C64::new(0.0, h); // ancilla |0⟩
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut zeros = 0;
        for _ in 0..2000 {
            let mut s = PureState::from_amplitudes(&layout, amps.clone()).unwrap();
            let o = s.measure_site(1, &mut rng).unwrap();
            if o == 1 {
                zeros += 1;
            }
            s.reset_site(1, o).unwrap();
            assert_eq!(s.site_probabilities(1).unwrap()[0], 1.0);
        }
        assert!((zeros as f64 - 1000.0).abs() < 3.0 * (500.0f64).sqrt());
    }

    #[test]
    fn reset_requires_an_eigenstate() {
        let layout = ChainLayout::spin_one(2).unwrap();
        let s = PureState::new(&layout, &InitialState::RandomState(1)).unwrap();
        let mut a = s.clone();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        // system site 0 is in a superposition
        assert!(matches!(a.reset_site(0, 1), Err(SteerError::Contract(_))));
        let o = a.measure_site(0, &mut rng).unwrap();
        a.reset_site(0, o).unwrap();
    }

    #[test]
    fn register_split_inverts_join() {
        let layout = ChainLayout::spin_one(3).unwrap();
        let split = RegisterSplit::new(&layout);
        for a in 0..layout.ancilla_dim() {
            for (s, &i) in split.system_block(a).iter().enumerate() {
                assert_eq!(layout.join_index(s, a), i);
            }
        }
    }
}
