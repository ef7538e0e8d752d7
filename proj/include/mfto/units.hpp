#ifndef MFTO_UNITS_HPP
#define MFTO_UNITS_HPP

namespace mfto::units {

// Internal unit system for molecular models:
//   energy   J/mol
//   mass     kg/mol
//   length   m
//   time     s
//   angle    rad
// Potentials quoted in kJ/mol are converted on construction; beta is in
// mol/J so that beta*H is dimensionless. The 2D double-well model uses
// dimensionless "model units" throughout and never touches these constants.
inline constexpr double gas_constant = 8.314462618;  // J/(mol K)
inline constexpr double avogadro = 6.02214076e23;    // 1/mol
inline constexpr double joule_per_kilojoule = 1.0e3;
inline constexpr double metre_per_nanometre = 1.0e-9;

// 1/(R T), in mol/J.
inline constexpr double beta_from_temperature(double kelvin) {
    return 1.0 / (gas_constant * kelvin);
}

// Per-mole mass in kg/mol from a single-particle mass in grams.
inline constexpr double molar_mass_from_grams(double grams) {
    return grams * 1.0e-3 * avogadro;
}

}  // namespace mfto::units

#endif
