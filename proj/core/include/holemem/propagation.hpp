#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "holemem/atomic_dynamics.hpp"
#include "holemem/envelope.hpp"
#include "holemem/grid.hpp"
#include "holemem/hole_profile.hpp"

namespace holemem {

/// Spatial and spectral discretization. The time grid is the input's.
struct PropagationGrids {
    DetuningGrid detuning = DetuningGrid::from_span_mhz(6.0, 1200);
    std::size_t n_z = 100;
};

struct PropagationOptions {
    Mode mode = Mode::perturbative;
    bool snapshots = false;  ///< keep the full (t, z) field map
    unsigned threads = 1;
};

/// Amplitudes for every (z-slice, detuning bin) cell. Only bins where the
/// hole profile is non-zero carry atoms and are stored.
class AtomicEnsembleState {
public:
    AtomicEnsembleState(std::size_t n_z, std::vector<double> detunings, std::vector<double> weights);

    std::size_t n_z() const noexcept { return n_z_; }
    std::size_t n_bins() const noexcept { return detunings_.size(); }
    std::span<const double> detunings() const noexcept { return detunings_; }
    /// Quadrature weight times g(Delta) per bin.
    std::span<const double> weights() const noexcept { return weights_; }

    AtomicState at(std::size_t j, std::size_t k) const noexcept {
        const std::size_t i = j * n_bins() + k;
        return {cg_[i], ce_[i], cs_[i]};
    }

private:
    friend class Propagator;
    std::size_t n_z_;
    std::vector<double> detunings_;
    std::vector<double> weights_;
    std::vector<complex> cg_;
    std::vector<complex> ce_;
    std::vector<complex> cs_;
};

/// Field on the (time, z-node) lattice, row-major in time. Node j sits at
/// z = j / n_z, node 0 is the entrance face.
struct FieldSnapshots {
    std::size_t n_t = 0;
    std::size_t n_nodes = 0;
    std::vector<complex> values;

    const complex& at(std::size_t t_index, std::size_t node) const {
        return values[t_index * n_nodes + node];
    }
};

struct PropagationResult {
    ComplexEnvelope output;  ///< field at z = 1, same grid as the input
    std::optional<FieldSnapshots> snapshots;
    AtomicEnsembleState final_ensemble;
    /// Excitation stored in the medium per time sample, in the same units as
    /// pulse_energy(): 2 kappa * sum_z sum_k w_k g_k |c|^2 dz.
    std::vector<double> optical_excitation;
    std::vector<double> spin_excitation;
};

/// Coupling constant kappa = d / pi in dE/dz = -i kappa sum_k w_k g_k rho_k.
/// With it, a weak cw probe at detuning D is attenuated to exp(-d g(D)) in
/// intensity.
double coupling_constant(const HoleProfile& profile) noexcept;

/// Propagates `input` (field entering at z = 0) through the medium driven by
/// the z-independent Raman envelope `raman`. Per time step and per slice the
/// slice-centre atoms are advanced by one RK4 step and the field is marched
/// across the slice with the implicit midpoint rule, so atoms and field are
/// updated consistently at the end of the step. Second order in z and dt.
/// The 1/c term is dropped (retarded time).
///
/// Throws ValidationError on grid mismatch or resolution violation and
/// DivergenceError on a non-finite field.
PropagationResult propagate(const ComplexEnvelope& input, const ComplexEnvelope& raman,
                            const HoleProfile& profile, const PropagationGrids& grids,
                            const PropagationOptions& options = {});

/// Largest rate the time step must resolve: max(|Delta| over populated
/// bins, max|Omega|, max|E|).
double max_rate(const ComplexEnvelope& input, const ComplexEnvelope& raman,
                const HoleProfile& profile, const DetuningGrid& detuning);

}  // namespace holemem
