//! Finite-order measures `μ_{β,m}(B_ω) = |B_ω|^β / Σ_{Ω_m} |B|^β` and
//! empirical Gibbs ratios.

use crate::bandtree::{BandTree, CharPath};
use crate::dimension::{ln_lengths, LengthMode};
use crate::error::{Error, Result};
use crate::numerics::{compensated_sum, log_sum_exp};

#[derive(Debug, Clone)]
pub struct GibbsMeasure {
    pub beta: f64,
    pub m: u32,
    /// `ln b_m = ln Σ_{Ω_m} |B_ω|^β`.
    pub ln_b_m: f64,
    /// `masses[k][i]`: mass of band `i` of `𝒢_k`, as the sum over its
    /// order-`m` descendants.
    masses: Vec<Vec<f64>>,
    paths: Vec<CharPath>,
}

impl GibbsMeasure {
    /// Mass of band `index` of generation `order ≤ m`.
    pub fn mass(&self, order: u32, index: usize) -> f64 {
        self.masses[order as usize][index]
    }

    pub fn generation_masses(&self, order: u32) -> &[f64] {
        &self.masses[order as usize]
    }

    /// `(path, weight)` for every band of `𝒢_m`.
    pub fn weights(&self) -> impl Iterator<Item = (&CharPath, f64)> {
        self.paths.iter().zip(self.masses[self.m as usize].iter().copied())
    }

    pub fn total_mass(&self) -> f64 {
        compensated_sum(self.masses[self.m as usize].iter().copied())
    }

    /// `path weight` lines with weights printed to round-trip precision.
    pub fn to_table(&self) -> String {
        self.weights().map(|(p, w)| format!("{p}\t{w:e}\n")).collect()
    }
}

fn check_beta(beta: f64) -> Result<()> {
    if beta > 0.0 && beta < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("beta must lie in (0,1), got {beta}")))
    }
}

pub fn build_measure(tree: &BandTree, beta: f64, m: u32) -> Result<GibbsMeasure> {
    check_beta(beta)?;
    let leaves = tree.generation(m)?;
    let scaled: Vec<f64> = ln_lengths(tree, m, LengthMode::Endpoints)?
        .into_iter()
        .map(|l| beta * l)
        .collect();
    let ln_b_m = log_sum_exp(&scaled);
    let mut masses = vec![Vec::new(); m as usize + 1];
    masses[m as usize] = scaled.iter().map(|x| (x - ln_b_m).exp()).collect();
    for k in (0..m as usize).rev() {
        let parents = tree.generation(k as u32)?.len();
        let children = tree.generation(k as u32 + 1)?;
        let mut parts: Vec<Vec<f64>> = vec![Vec::new(); parents];
        for (child, w) in children.iter().zip(&masses[k + 1]) {
            let p = child.parent.expect("bands above order 0 have parents");
            parts[p].push(*w);
        }
        masses[k] = parts.into_iter().map(compensated_sum).collect();
    }
    Ok(GibbsMeasure {
        beta,
        m,
        ln_b_m,
        masses,
        paths: leaves.iter().map(|b| b.path.clone()).collect(),
    })
}

/// Extremes of `ρ(B) = μ_{β,m}(B) · Σ_{𝒢_k}|·|^β / |B|^β` over `𝒢_k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GibbsRow {
    pub k: u32,
    pub m: u32,
    pub min_ratio: f64,
    pub max_ratio: f64,
}

impl GibbsRow {
    /// `ζ̂ = max(ρ_max, 1/ρ_min)`.
    pub fn zeta(&self) -> f64 {
        self.max_ratio.max(1.0 / self.min_ratio)
    }
}

pub fn gibbs_ratio_report(tree: &BandTree, beta: f64, k_max: u32, m: u32) -> Result<Vec<GibbsRow>> {
    let measure = build_measure(tree, beta, m)?;
    (0..=k_max.min(m))
        .map(|k| {
            let scaled: Vec<f64> = ln_lengths(tree, k, LengthMode::Endpoints)?
                .into_iter()
                .map(|l| beta * l)
                .collect();
            let ln_b_k = log_sum_exp(&scaled);
            let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
            for (i, x) in scaled.iter().enumerate() {
                let rho = measure.mass(k, i) * (ln_b_k - x).exp();
                lo = lo.min(rho);
                hi = hi.max(rho);
            }
            Ok(GibbsRow {
                k,
                m,
                min_ratio: lo,
                max_ratio: hi,
            })
        })
        .collect()
}

/// `max_B max(μ_{β,k}(B)/μ_{β,k+3}(B), inverse)` over `𝒢_k`.
pub fn progib_constant(tree: &BandTree, beta: f64, k: u32) -> Result<f64> {
    let shallow = build_measure(tree, beta, k)?;
    let deep = build_measure(tree, beta, k + 3)?;
    Ok(shallow
        .generation_masses(k)
        .iter()
        .zip(deep.generation_masses(k))
        .map(|(a, b)| (a / b).max(b / a))
        .fold(1.0, f64::max))
}
