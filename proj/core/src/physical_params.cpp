#include "holemem/physical_params.hpp"

#include <cmath>

#include "holemem/errors.hpp"

namespace holemem {

void PhysicalParams::validate() const {
    if (!(optical_depth >= 0.0) || !std::isfinite(optical_depth))
        throw ValidationError("physical params: optical depth must be >= 0");
    if (!(crystal_length_mm > 0.0)) throw ValidationError("physical params: length must be > 0");
    if (!(feature_width_mhz > 0.0)) throw ValidationError("physical params: feature width must be > 0");
    if (!(light_speed_m_per_s > 0.0)) throw ValidationError("physical params: light speed must be > 0");
}

double PhysicalParams::transit_time_us() const noexcept {
    return crystal_length_mm * 1e-3 / light_speed_m_per_s * 1e6;
}

}  // namespace holemem
