//! Physical constants in eV-based units.
//!
//! Frequencies and energies are carried in eV throughout the crate, lengths
//! in nm, so a wave number `xi / HBAR_C_EV_NM` comes out in nm⁻¹.

/// ħc in eV·nm.
pub const HBAR_C_EV_NM: f64 = 197.326_980_4;

/// Boltzmann constant in eV/K.
pub const K_B_EV_PER_K: f64 = 8.617_333_262e-5;

/// ħ in eV·s.
pub const HBAR_EV_S: f64 = 6.582_119_569e-16;

/// 1 eV/nm³ expressed in pascal.
pub const EV_PER_NM3_IN_PA: f64 = 1.602_176_634e8;

/// ħc in J·m, for the analytic ideal-metal formulas.
pub const HBAR_C_J_M: f64 = 3.161_526_773e-26;

/// Matsubara frequency ξ_l = 2π k_B T l in eV.
pub fn matsubara_frequency(temperature_k: f64, l: u32) -> f64 {
    2.0 * std::f64::consts::PI * K_B_EV_PER_K * temperature_k * f64::from(l)
}

/// Converts an angular frequency given in rad/s to eV.
pub fn rad_per_s_to_ev(omega: f64) -> f64 {
    omega * HBAR_EV_S
}

/// Zero-temperature Casimir pressure between ideal metal plates, in Pa
/// (negative = attractive). `a_nm` is the plate separation.
pub fn ideal_metal_pressure(a_nm: f64) -> f64 {
    let a = a_nm * 1e-9;
    -std::f64::consts::PI.powi(2) * HBAR_C_J_M / (240.0 * a.powi(4))
}

/// PFA force gradient for ideal metals in μN/m.
pub fn ideal_metal_gradient(radius_um: f64, a_nm: f64) -> f64 {
    2.0 * std::f64::consts::PI * radius_um * 1e-6 * ideal_metal_pressure(a_nm).abs() * 1e6
}
