#include "holemem/propagation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

#include "holemem/errors.hpp"
#include "holemem/units.hpp"

namespace holemem {

AtomicEnsembleState::AtomicEnsembleState(std::size_t n_z, std::vector<double> detunings,
                                         std::vector<double> weights)
    : n_z_(n_z),
      detunings_(std::move(detunings)),
      weights_(std::move(weights)),
      cg_(n_z_ * detunings_.size(), complex{1.0, 0.0}),
      ce_(n_z_ * detunings_.size()),
      cs_(n_z_ * detunings_.size()) {}

double coupling_constant(const HoleProfile& profile) noexcept { return profile.d / units::pi; }

namespace {

struct PopulatedBins {
    std::vector<double> detunings;
    std::vector<double> weights;  // w_k * g(Delta_k)
};

PopulatedBins populated_bins(const HoleProfile& profile, const DetuningGrid& grid) {
    PopulatedBins out;
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const double gk = g_angular(grid.detunings()[k], profile);
        if (gk > 0.0) {
            out.detunings.push_back(grid.detunings()[k]);
            out.weights.push_back(grid.weights()[k] * gk);
        }
    }
    return out;
}

inline bool finite(const complex& c) noexcept {
    return std::isfinite(c.real()) && std::isfinite(c.imag());
}

}  // namespace

double max_rate(const ComplexEnvelope& input, const ComplexEnvelope& raman,
                const HoleProfile& profile, const DetuningGrid& detuning) {
    double rate = std::max(input.peak_magnitude(), raman.peak_magnitude());
    for (double dk : populated_bins(profile, detuning).detunings) rate = std::max(rate, std::abs(dk));
    return rate;
}

class Propagator {
public:
    Propagator(const ComplexEnvelope& input, const ComplexEnvelope& raman,
               const HoleProfile& profile, const PropagationGrids& grids,
               const PropagationOptions& options, PopulatedBins bins)
        : input_(input),
          raman_(raman),
          options_(options),
          n_t_(input.grid().count()),
          n_z_(grids.n_z),
          dz_(1.0 / static_cast<double>(grids.n_z)),
          kappa_(coupling_constant(profile)),
          ensemble_(grids.n_z, std::move(bins.detunings), std::move(bins.weights)),
          output_(n_t_),
          slice_optical_(n_z_ * n_t_, 0.0),
          slice_spin_(n_z_ * n_t_, 0.0),
          field_prev_(n_z_, input[0]),
          polarization_(n_z_) {
        if (options_.snapshots) {
            snapshots_.emplace();
            snapshots_->n_t = n_t_;
            snapshots_->n_nodes = n_z_ + 1;
            snapshots_->values.assign(n_t_ * (n_z_ + 1), complex{});
            for (std::size_t j = 0; j <= n_z_; ++j) snapshots_->values[j] = input[0];
        }
        output_[0] = input[0];
    }

    PropagationResult run() {
        const unsigned blocks =
            std::clamp<unsigned>(options_.threads, 1u, static_cast<unsigned>(n_z_));
        boundaries_.assign(blocks, std::vector<complex>());
        for (unsigned b = 1; b < blocks; ++b) boundaries_[b].assign(n_t_, complex{});
        progress_ = std::vector<std::atomic<long>>(blocks);
        for (auto& p : progress_) p.store(0);

        std::vector<std::size_t> starts(blocks + 1);
        for (unsigned b = 0; b <= blocks; ++b) starts[b] = n_z_ * b / blocks;

        if (blocks == 1) {
            run_block(0, starts[0], starts[1]);
        } else {
            std::vector<std::jthread> workers;
            workers.reserve(blocks);
            for (unsigned b = 0; b < blocks; ++b)
                workers.emplace_back([this, b, &starts] { run_block(b, starts[b], starts[b + 1]); });
        }
        if (failed_.load()) {
            const long first_bad = fail_index_.load();
            throw DivergenceError("propagation diverged at time index " + std::to_string(first_bad),
                                  first_bad - 1);
        }

        PropagationResult result{ComplexEnvelope(input_.grid(), std::move(output_)),
                                 std::move(snapshots_), std::move(ensemble_),
                                 std::vector<double>(n_t_, 0.0), std::vector<double>(n_t_, 0.0)};
        std::vector<double> column(n_z_);
        const double scale = 2.0 * kappa_ * dz_;
        for (std::size_t n = 0; n < n_t_; ++n) {
            for (std::size_t j = 0; j < n_z_; ++j) column[j] = slice_optical_[j * n_t_ + n];
            result.optical_excitation[n] = scale * pairwise_sum(column);
            for (std::size_t j = 0; j < n_z_; ++j) column[j] = slice_spin_[j * n_t_ + n];
            result.spin_excitation[n] = scale * pairwise_sum(column);
        }
        return result;
    }

private:
    void record_failure(long index) {
        long cur = fail_index_.load();
        while (index < cur && !fail_index_.compare_exchange_weak(cur, index)) {
        }
        failed_.store(true);
    }

    void publish(unsigned b, long value) {
        progress_[b].store(value, std::memory_order_release);
        progress_[b].notify_all();
    }

    // Atoms of slice j sit at its centre and see the mean of the node fields
    // E_j and E_{j+1}. The march E_{j+1} = E_j - i kappa dz P_j(E_{j+1}) is
    // implicit (midpoint rule, second order in z). In perturbative mode the
    // RK4 update is affine in the end-of-step drive, so the solve is a
    // scalar division; full mode uses fixed-point passes.
    void run_block(unsigned b, std::size_t j_begin, std::size_t j_end) {
        const std::size_t nb = ensemble_.n_bins();
        const double dt = input_.grid().dt();
        const auto det = ensemble_.detunings();
        const auto wts = ensemble_.weights();
        const bool last = j_end == n_z_;
        const bool full = options_.mode == Mode::full;
        std::vector<complex> coh(nb), resp_e(nb), resp_s(nb);
        std::vector<double> pop_e(nb), pop_s(nb);
        std::vector<complex> save_g, save_e, save_s;
        if (full) {
            save_g.resize(nb);
            save_e.resize(nb);
            save_s.resize(nb);
        }
        complex* cg = ensemble_.cg_.data();
        complex* ce = ensemble_.ce_.data();
        complex* cs = ensemble_.cs_.data();
        const complex i_kdz{0.0, kappa_ * dz_};

        for (std::size_t n = 0; n + 1 < n_t_; ++n) {
            const long step = static_cast<long>(n + 1);
            complex node;
            if (b == 0) {
                node = input_[n + 1];
            } else {
                long seen = progress_[b - 1].load(std::memory_order_acquire);
                while (seen < step) {
                    progress_[b - 1].wait(seen, std::memory_order_acquire);
                    seen = progress_[b - 1].load(std::memory_order_acquire);
                }
                if (failed_.load()) break;
                node = boundaries_[b][n + 1];
            }
            const complex o0 = raman_[n];
            const complex o1 = raman_[n + 1];
            const complex om = 0.5 * (o0 + o1);

            complex pb{};
            if (!full) {
                // response of (ce, cs) to a unit end-of-step drive
                for (std::size_t k = 0; k < nb; ++k) {
                    resp_e[k] = 0.0;
                    resp_s[k] = 0.0;
                    detail::rk4_perturbative(resp_e[k], resp_s[k], 0.0, 0.5, 1.0, o0, om, o1,
                                             det[k], dt);
                    coh[k] = wts[k] * resp_e[k];
                }
                pb = pairwise_sum(coh);
            }

            for (std::size_t j = j_begin; j < j_end; ++j) {
                const complex e0 = field_prev_[j];
                const std::size_t base = j * nb;
                complex next;
                complex e1;
                if (full) {
                    std::copy_n(cg + base, nb, save_g.begin());
                    std::copy_n(ce + base, nb, save_e.begin());
                    std::copy_n(cs + base, nb, save_s.begin());
                    next = node - i_kdz * polarization_[j];
                    for (int pass = 0; pass < full_passes; ++pass) {
                        if (pass > 0) {
                            std::copy_n(save_g.begin(), nb, cg + base);
                            std::copy_n(save_e.begin(), nb, ce + base);
                            std::copy_n(save_s.begin(), nb, cs + base);
                        }
                        e1 = 0.5 * (node + next);
                        const complex em = 0.5 * (e0 + e1);
                        for (std::size_t k = 0; k < nb; ++k) {
                            detail::rk4_full(cg[base + k], ce[base + k], cs[base + k], e0, em, e1,
                                             o0, om, o1, det[k], dt);
                            coh[k] = wts[k] * (ce[base + k] * std::conj(cg[base + k]));
                        }
                        polarization_[j] = pairwise_sum(coh);
                        next = node - i_kdz * polarization_[j];
                    }
                    e1 = 0.5 * (node + next);
                } else {
                    const complex half_e0 = 0.5 * e0;
                    for (std::size_t k = 0; k < nb; ++k) {
                        detail::rk4_perturbative(ce[base + k], cs[base + k], e0, half_e0, 0.0, o0,
                                                 om, o1, det[k], dt);
                        coh[k] = wts[k] * ce[base + k];
                    }
                    const complex pa = pairwise_sum(coh);
                    next = (node - i_kdz * (pa + 0.5 * pb * node)) / (1.0 + 0.5 * i_kdz * pb);
                    e1 = 0.5 * (node + next);
                    for (std::size_t k = 0; k < nb; ++k) {
                        ce[base + k] += e1 * resp_e[k];
                        cs[base + k] += e1 * resp_s[k];
                    }
                }
                for (std::size_t k = 0; k < nb; ++k) {
                    pop_e[k] = wts[k] * std::norm(ce[base + k]);
                    pop_s[k] = wts[k] * std::norm(cs[base + k]);
                }
                slice_optical_[j * n_t_ + n + 1] = pairwise_sum(pop_e);
                slice_spin_[j * n_t_ + n + 1] = pairwise_sum(pop_s);
                field_prev_[j] = e1;
                if (snapshots_) snapshots_->values[(n + 1) * (n_z_ + 1) + j] = node;
                node = next;
            }

            if (!finite(node)) {
                record_failure(step);
                publish(b, std::numeric_limits<long>::max());
                return;
            }
            if (last) {
                output_[n + 1] = node;
                if (snapshots_) snapshots_->values[(n + 1) * (n_z_ + 1) + n_z_] = node;
            } else {
                boundaries_[b + 1][n + 1] = node;
                publish(b, step);
            }
        }
        if (!last) publish(b, std::numeric_limits<long>::max());
    }

    static constexpr int full_passes = 2;

    const ComplexEnvelope& input_;
    const ComplexEnvelope& raman_;
    PropagationOptions options_;
    std::size_t n_t_;
    std::size_t n_z_;
    double dz_;
    double kappa_;
    AtomicEnsembleState ensemble_;
    std::vector<complex> output_;
    std::vector<double> slice_optical_;
    std::vector<double> slice_spin_;
    std::vector<complex> field_prev_;  // slice-centre field at the previous step
    std::vector<complex> polarization_;
    std::optional<FieldSnapshots> snapshots_;
    std::vector<std::vector<complex>> boundaries_;
    std::vector<std::atomic<long>> progress_;
    std::atomic<bool> failed_{false};
    std::atomic<long> fail_index_{std::numeric_limits<long>::max()};
};

PropagationResult propagate(const ComplexEnvelope& input, const ComplexEnvelope& raman,
                            const HoleProfile& profile, const PropagationGrids& grids,
                            const PropagationOptions& options) {
    profile.validate();
    if (!(input.grid() == raman.grid()))
        throw ValidationError("propagate: input and Raman envelopes use different time grids");
    if (grids.n_z < 1) throw ValidationError("propagate: need at least one z slice");
    input.grid().check_resolution(max_rate(input, raman, profile, grids.detuning));
    Propagator prop(input, raman, profile, grids, options, populated_bins(profile, grids.detuning));
    return prop.run();
}

}  // namespace holemem
