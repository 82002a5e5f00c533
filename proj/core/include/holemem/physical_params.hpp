#pragma once

namespace holemem {

/// Crystal-level parameters. The light speed only enters the transit-time
/// estimate used to justify the retarded-frame propagation.
struct PhysicalParams {
    double crystal_length_mm = 5.0;
    double optical_depth = 8.7;
    double feature_width_mhz = 2.1;
    double light_speed_m_per_s = 299792458.0;

    void validate() const;
    /// Vacuum transit time through the crystal, in us.
    double transit_time_us() const noexcept;
};

}  // namespace holemem
