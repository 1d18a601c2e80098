//! Reflecting-element partitioning, per-AC phase synthesis and the effective
//! receive gain `G_r = E_s H2 diag(e^{j phi}) H1`.

use std::ops::Range;

use num_complex::Complex64;

use crate::channel::{wrap_phase, ChannelRealization};
use crate::error::{invalid_config, Result};
use crate::mapping::{AcTable, AntennaCombination};

/// Splits `n_res` elements into `|ac|` contiguous parts. Part `z` serves the
/// `z`-th antenna of the combination. Sizes are `floor(n_res / N_a)` with the
/// remainder spread one-by-one over the leading parts.
pub fn partition_elements(n_res: usize, ac: &AntennaCombination) -> Result<Vec<Range<usize>>> {
    let n_a = ac.size();
    if n_res < n_a {
        return Err(invalid_config(format!(
            "{n_res} reflecting elements cannot serve {n_a} antennas"
        )));
    }
    let base = n_res / n_a;
    let extra = n_res % n_a;
    let mut parts = Vec::with_capacity(n_a);
    let mut start = 0;
    for z in 0..n_a {
        let len = base + usize::from(z < extra);
        parts.push(start..start + len);
        start += len;
    }
    Ok(parts)
}

/// Receive antenna served by each element under `ac`.
pub fn element_assignment(n_res: usize, ac: &AntennaCombination) -> Result<Vec<usize>> {
    let parts = partition_elements(n_res, ac)?;
    let mut out = vec![0; n_res];
    for (part, &antenna) in parts.iter().zip(ac.antennas()) {
        out[part.clone()].fill(antenna);
    }
    Ok(out)
}

/// Phase configuration of the RIS for one antenna combination.
#[derive(Debug, Clone, PartialEq)]
pub struct RisPhaseProfile {
    phases: Vec<f64>,
    ac: AntennaCombination,
    parts: Vec<Range<usize>>,
}

impl RisPhaseProfile {
    /// Builds a profile from explicit phases.
    pub fn with_phases(
        phases: Vec<f64>,
        ac: AntennaCombination,
        parts: Vec<Range<usize>>,
    ) -> Result<Self> {
        let mut covered = vec![false; phases.len()];
        for p in &parts {
            for i in p.clone() {
                if i >= covered.len() || covered[i] {
                    return Err(invalid_config("element parts must be disjoint and in range"));
                }
                covered[i] = true;
            }
        }
        if parts.len() != ac.size() || covered.iter().any(|c| !c) {
            return Err(invalid_config("element parts must cover every element, one per antenna"));
        }
        Ok(Self { phases, ac, parts })
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    pub fn ac(&self) -> &AntennaCombination {
        &self.ac
    }

    pub fn parts(&self) -> &[Range<usize>] {
        &self.parts
    }

    /// Diagonal of `Phi_r`.
    pub fn reflection(&self) -> Vec<Complex64> {
        self.phases
            .iter()
            .map(|&p| Complex64::from_polar(1.0, p))
            .collect()
    }

    /// Part index serving element `i`.
    pub fn part_of(&self, i: usize) -> usize {
        self.parts
            .iter()
            .position(|p| p.contains(&i))
            .expect("parts cover every element")
    }
}

/// Aligns every part to its antenna: `phi_i = omega(i, l) + theta(i)`.
pub fn configure_phases(ch: &ChannelRealization, ac: &AntennaCombination) -> Result<RisPhaseProfile> {
    if ac.antennas().last().is_some_and(|&a| a >= ch.n_rx()) {
        return Err(invalid_config(format!(
            "combination ({ac}) exceeds {} receive antennas",
            ch.n_rx()
        )));
    }
    let parts = partition_elements(ch.n_res(), ac)?;
    let mut phases = vec![0.0; ch.n_res()];
    for (part, &l) in parts.iter().zip(ac.antennas()) {
        for i in part.clone() {
            phases[i] = wrap_phase(ch.omega(i, l) + ch.theta(i));
        }
    }
    Ok(RisPhaseProfile {
        phases,
        ac: ac.clone(),
        parts,
    })
}

/// Effective gain at every receive antenna, `G_r / x_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveGain {
    g: Vec<Complex64>,
    symbol_energy: f64,
}

impl EffectiveGain {
    pub fn new(g: Vec<Complex64>, symbol_energy: f64) -> Self {
        Self { g, symbol_energy }
    }

    pub fn values(&self) -> &[Complex64] {
        &self.g
    }

    pub fn symbol_energy(&self) -> f64 {
        self.symbol_energy
    }
}

fn check_dims(ch: &ChannelRealization, profile: &RisPhaseProfile) -> Result<()> {
    if profile.phases.len() != ch.n_res() {
        return Err(invalid_config(format!(
            "profile has {} phases for {} elements",
            profile.phases.len(),
            ch.n_res()
        )));
    }
    Ok(())
}

/// Matrix-product form `E_s H2 diag(e^{j phi}) H1`.
pub fn effective_gain(
    ch: &ChannelRealization,
    profile: &RisPhaseProfile,
    es: f64,
) -> Result<EffectiveGain> {
    check_dims(ch, profile)?;
    let reflected: Vec<Complex64> = profile
        .reflection()
        .iter()
        .zip(ch.h1())
        .map(|(phi, h)| phi * h)
        .collect();
    let g = (0..ch.n_rx())
        .map(|m| {
            ch.h2_row(m)
                .iter()
                .zip(&reflected)
                .map(|(a, b)| a * b)
                .sum::<Complex64>()
                * es
        })
        .collect();
    Ok(EffectiveGain::new(g, es))
}

/// Per-antenna split of the gain into the part aligned to that antenna and
/// the residual from every other element. Unselected antennas have a zero
/// constructive part.
#[derive(Debug, Clone, PartialEq)]
pub struct GainDecomposition {
    pub constructive: Vec<Complex64>,
    pub residual: Vec<Complex64>,
    pub symbol_energy: f64,
}

impl GainDecomposition {
    pub fn total(&self, n: usize) -> Complex64 {
        (self.constructive[n] + self.residual[n]) * self.symbol_energy
    }
}

/// Builds the gain from polar channel factors,
/// `beta_{i,n} alpha_i e^{j(phi_i - omega_{i,n} - theta_i)}`, summed per part.
pub fn decompose_gain(
    ch: &ChannelRealization,
    profile: &RisPhaseProfile,
    es: f64,
) -> Result<GainDecomposition> {
    check_dims(ch, profile)?;
    let n_rx = ch.n_rx();
    let mut constructive = vec![Complex64::new(0.0, 0.0); n_rx];
    let mut residual = vec![Complex64::new(0.0, 0.0); n_rx];
    for n in 0..n_rx {
        let own = profile.ac.position(n).map(|z| profile.parts[z].clone());
        for i in 0..ch.n_res() {
            let psi = profile.phases[i] - ch.omega(i, n) - ch.theta(i);
            let term = Complex64::from_polar(ch.beta(i, n) * ch.alpha(i), psi);
            match &own {
                Some(part) if part.contains(&i) => constructive[n] += term,
                _ => residual[n] += term,
            }
        }
    }
    Ok(GainDecomposition {
        constructive,
        residual,
        symbol_energy: es,
    })
}

/// `|g_n x|^2 / N0`.
pub fn snr_at_antenna(gain: &EffectiveGain, n: usize, symbol: Complex64, n0: f64) -> Result<f64> {
    if !(n0 > 0.0) {
        return Err(invalid_config(format!("noise power must be positive, got {n0}")));
    }
    let g = gain
        .g
        .get(n)
        .ok_or_else(|| invalid_config(format!("antenna {n} out of range")))?;
    Ok((g * symbol).norm_sqr() / n0)
}

/// Element-to-antenna assignments for every entry of a table, computed once
/// per configuration.
#[derive(Debug, Clone)]
pub struct TableLayout {
    n_res: usize,
    n_rx: usize,
    assignment: Vec<Vec<usize>>,
}

impl TableLayout {
    pub fn new(table: &AcTable, n_res: usize) -> Result<Self> {
        let assignment = table
            .entries()
            .iter()
            .map(|ac| element_assignment(n_res, ac))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            n_res,
            n_rx: table.n_rx(),
            assignment,
        })
    }

    pub fn assignment(&self, r: usize) -> &[usize] {
        &self.assignment[r]
    }

    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.is_empty()
    }

    pub fn n_res(&self) -> usize {
        self.n_res
    }

    pub fn n_rx(&self) -> usize {
        self.n_rx
    }
}

/// The D candidate gain vectors for one channel realization, row-major
/// `D x N_r`.
///
/// Built without trigonometry: the aligned reflection for antenna `l` at
/// element `i` is the conjugate phase of `h2[l][i] h1[i]`.
#[derive(Debug, Clone)]
pub struct GainBank {
    n_rx: usize,
    gains: Vec<Complex64>,
    cascade: Vec<Complex64>,
    aligned: Vec<Complex64>,
}

impl GainBank {
    pub fn new(layout: &TableLayout) -> Self {
        let cells = layout.n_rx * layout.n_res;
        Self {
            n_rx: layout.n_rx,
            gains: vec![Complex64::new(0.0, 0.0); layout.len() * layout.n_rx],
            cascade: vec![Complex64::new(0.0, 0.0); cells],
            aligned: vec![Complex64::new(0.0, 0.0); cells],
        }
    }

    pub fn update(&mut self, ch: &ChannelRealization, layout: &TableLayout, es: f64) {
        let n = layout.n_res;
        debug_assert_eq!(ch.n_res(), n);
        debug_assert_eq!(ch.n_rx(), self.n_rx);
        for m in 0..self.n_rx {
            for i in 0..n {
                let c = ch.h2_at(m, i) * ch.h1()[i];
                self.cascade[m * n + i] = c;
                let mag = c.norm();
                self.aligned[m * n + i] = if mag > 0.0 {
                    c.conj() / mag
                } else {
                    Complex64::new(1.0, 0.0)
                };
            }
        }
        for r in 0..layout.len() {
            let assign = layout.assignment(r);
            for m in 0..self.n_rx {
                let row = &self.cascade[m * n..(m + 1) * n];
                let mut acc = Complex64::new(0.0, 0.0);
                for (i, (c, &l)) in row.iter().zip(assign).enumerate() {
                    acc += c * self.aligned[l * n + i];
                }
                self.gains[r * self.n_rx + m] = acc * es;
            }
        }
    }

    pub fn gain(&self, r: usize) -> &[Complex64] {
        &self.gains[r * self.n_rx..(r + 1) * self.n_rx]
    }

    pub fn len(&self) -> usize {
        self.gains.len() / self.n_rx
    }

    pub fn is_empty(&self) -> bool {
        self.gains.is_empty()
    }

    pub fn n_rx(&self) -> usize {
        self.n_rx
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::draw_channels;
    use crate::mapping::select_acs;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn ac(v: &[usize], n_rx: usize) -> AntennaCombination {
        AntennaCombination::new(v.to_vec(), n_rx).unwrap()
    }

    #[test]
    fn partition_shapes() {
        assert_eq!(partition_elements(8, &ac(&[0, 2], 4)).unwrap(), vec![0..4, 4..8]);
        let sizes: Vec<usize> = partition_elements(8, &ac(&[0, 1, 3], 4))
            .unwrap()
            .iter()
            .map(|p| p.len())
            .collect();
        assert_eq!(sizes, vec![3, 3, 2]);
        assert_eq!(partition_elements(16, &ac(&[1], 4)).unwrap(), vec![0..16]);
        assert!(partition_elements(2, &ac(&[0, 1, 2], 4)).is_err());
    }

    #[test]
    fn aligned_parts_add_coherently() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let ch = draw_channels(8, 4, &mut rng).unwrap();
        let combo = ac(&[0, 3], 4);
        let profile = configure_phases(&ch, &combo).unwrap();
        assert!(profile.reflection().iter().all(|c| (c.norm() - 1.0).abs() < 1e-15));
        for (part, &l) in profile.parts().iter().zip(combo.antennas()) {
            let mut sum = Complex64::new(0.0, 0.0);
            let mut mags = 0.0;
            for i in part.clone() {
                sum += ch.h2_at(l, i) * Complex64::from_polar(1.0, profile.phases()[i]) * ch.h1()[i];
                mags += ch.beta(i, l) * ch.alpha(i);
            }
            assert!(sum.im.abs() < 1e-12);
            assert!((sum.re - mags).abs() < 1e-12);
            assert!(sum.re >= 0.0);

            // any other phase choice does no better on this antenna
            for _ in 0..100 {
                let mut other = Complex64::new(0.0, 0.0);
                for i in part.clone() {
                    let psi: f64 = rng.random_range(-std::f64::consts::PI..std::f64::consts::PI);
                    other += Complex64::from_polar(ch.beta(i, l) * ch.alpha(i), psi);
                }
                assert!(other.norm() <= sum.norm() + 1e-12);
            }
        }
    }

    #[test]
    fn single_element_gain() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let ch = draw_channels(1, 1, &mut rng).unwrap();
        let profile = configure_phases(&ch, &ac(&[0], 1)).unwrap();
        let g = effective_gain(&ch, &profile, 1.0).unwrap();
        assert!((g.values()[0].norm() - ch.alpha(0) * ch.beta(0, 0)).abs() < 1e-12);
    }

    #[test]
    fn zero_source_link_gives_zero_gain() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let ch = draw_channels(8, 4, &mut rng).unwrap();
        let profile = configure_phases(&ch, &ac(&[1, 2], 4)).unwrap();
        let silent =
            ChannelRealization::from_parts(vec![Complex64::new(0.0, 0.0); 8], ch.h2().to_vec(), 4)
                .unwrap();
        let g = effective_gain(&silent, &profile, 1.0).unwrap();
        assert!(g.values().iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn decomposition_matches_matrix_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..50 {
            let ch = draw_channels(8, 4, &mut rng).unwrap();
            let combo = ac(&[1, 3], 4);
            let profile = configure_phases(&ch, &combo).unwrap();
            let g = effective_gain(&ch, &profile, 1.0).unwrap();
            let dec = decompose_gain(&ch, &profile, 1.0).unwrap();
            for n in 0..4 {
                assert!((g.values()[n] - dec.total(n)).norm() < 1e-10);
                if combo.contains(n) {
                    let c = dec.constructive[n];
                    assert!(c.im.abs() < 1e-10 && c.re >= 0.0);
                    assert!(g.values()[n].norm() >= c.norm() - dec.residual[n].norm() - 1e-12);
                } else {
                    assert_eq!(dec.constructive[n], Complex64::new(0.0, 0.0));
                    let snr = snr_at_antenna(&g, n, Complex64::new(1.0, 0.0), 0.5).unwrap();
                    assert!((snr - dec.residual[n].norm_sqr() / 0.5).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn aligned_constructive_snr_is_maximal() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let ch = draw_channels(8, 4, &mut rng).unwrap();
        let combo = ac(&[0], 4);
        let aligned = configure_phases(&ch, &combo).unwrap();
        let best = snr_at_antenna(&effective_gain(&ch, &aligned, 1.0).unwrap(), 0, Complex64::new(1.0, 0.0), 1.0)
            .unwrap();
        for _ in 0..100 {
            let phases = (0..8)
                .map(|_| rng.random_range(-std::f64::consts::PI..std::f64::consts::PI))
                .collect();
            let random =
                RisPhaseProfile::with_phases(phases, combo.clone(), aligned.parts().to_vec()).unwrap();
            let snr = snr_at_antenna(&effective_gain(&ch, &random, 1.0).unwrap(), 0, Complex64::new(1.0, 0.0), 1.0)
                .unwrap();
            assert!(snr <= best + 1e-9);
        }
    }

    #[test]
    fn snr_definition_and_errors() {
        let g = EffectiveGain::new(vec![Complex64::new(2.0, 0.0)], 1.0);
        assert_eq!(snr_at_antenna(&g, 0, Complex64::new(1.0, 0.0), 1.0).unwrap(), 4.0);
        assert!(snr_at_antenna(&g, 0, Complex64::new(1.0, 0.0), 0.0).is_err());
        assert!(snr_at_antenna(&g, 3, Complex64::new(1.0, 0.0), 1.0).is_err());
    }

    #[test]
    fn gain_bank_agrees_with_profiles() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let table = select_acs(4, 17).unwrap();
        let layout = TableLayout::new(&table, 11).unwrap();
        let mut bank = GainBank::new(&layout);
        for _ in 0..20 {
            let ch = draw_channels(11, 4, &mut rng).unwrap();
            bank.update(&ch, &layout, 1.0);
            for (r, combo) in table.entries().iter().enumerate() {
                let profile = configure_phases(&ch, combo).unwrap();
                let g = effective_gain(&ch, &profile, 1.0).unwrap();
                for (a, b) in g.values().iter().zip(bank.gain(r)) {
                    assert!((a - b).norm() < 1e-10);
                }
            }
        }
    }
}
