#ifndef POUCHSIM_MATERIAL_HPP
#define POUCHSIM_MATERIAL_HPP

#include <stdexcept>

namespace pouchsim {

/// Mechanical and thermal properties of the coated fabric the pouches are cut from.
struct FabricMaterial {
    double elastic_modulus;       // Pa
    double poisson_ratio;
    double shear_modulus;         // Pa
    double mass_density;          // kg/m^3
    double tensile_strength;      // Pa
    double compressive_strength;  // Pa
    double yield_strength;        // Pa
    double thermal_expansion;     // 1/K
    double thermal_conductivity;  // W/(m K)
    double specific_heat;         // J/(kg K)
    double wall_thickness;        // m

    void validate() const {
        const double positives[] = {elastic_modulus, poisson_ratio, shear_modulus, mass_density,
                                    tensile_strength, compressive_strength, yield_strength,
                                    thermal_expansion, thermal_conductivity, specific_heat,
                                    wall_thickness};
        for (double v : positives) {
            if (!(v > 0.0)) throw std::invalid_argument("FabricMaterial: all properties must be positive");
        }
        if (!(poisson_ratio < 0.5)) throw std::invalid_argument("FabricMaterial: poisson_ratio must be < 0.5");
        if (yield_strength > compressive_strength) {
            throw std::invalid_argument("FabricMaterial: yield_strength exceeds compressive_strength");
        }
    }
};

/// Oxford 200D nylon with heat-sealable coating.
///
/// The wall thickness is not part of the published property table; 0.4 mm makes the
/// strip mass of the widest and narrowest actuators land on 7.8 g and 3.9 g, inside the
/// reported 3.8-8.2 g weight range.
inline FabricMaterial nylon_oxford() {
    return FabricMaterial{
        .elastic_modulus = 498000000.0,
        .poisson_ratio = 0.35,
        .shear_modulus = 184400000.0,
        .mass_density = 757.58,
        .tensile_strength = 17520.0,
        .compressive_strength = 103421000.0,
        .yield_strength = 58605000.0,
        .thermal_expansion = 1.0e-6,
        .thermal_conductivity = 0.53,
        .specific_heat = 1386.0,
        .wall_thickness = 0.4e-3,
    };
}

} // namespace pouchsim

#endif // POUCHSIM_MATERIAL_HPP
