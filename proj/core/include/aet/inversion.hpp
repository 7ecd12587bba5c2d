#pragma once

#include "aet/fem.hpp"
#include "aet/forward.hpp"
#include "aet/sensitivity.hpp"

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace aet {

struct NoisyData {
    DataField data;
    /// delta_rel * |E| in the stacked mass-weighted norm.
    double delta_abs = 0.0;
};

/// E + delta_rel |E| e / |e| with e standard normal over all stacked coefficients.
/// Deterministic for a fixed seed.
NoisyData add_noise(const FemSpace& space, const DataField& exact, double delta_rel,
                    std::uint64_t seed);

enum class StopReason { Discrepancy, MaxIter, ZeroGradient, Stagnation };

std::string to_string(StopReason reason);

struct ReconstructionConfig {
    double tau = 1.0;
    /// Constant initial guess; ignored when initial_field is set.
    double sigma0 = 1.5;
    std::optional<NodalField> initial_field;
    int max_iter = 1000;
    InnerProductSpec spec = InnerProductSpec::h2_beta();
    double sigma_floor = 0.1;
    /// Halve the stepsize (up to max_halvings times) when a step increases the residual.
    bool safeguard = true;
    int max_halvings = 20;

    void validate() const;
};

struct IterationRecord {
    int k = 0;
    /// |E_delta - F(sigma_k)| in the stacked data norm.
    double residual = 0.0;
    /// Stepsize used to move from sigma_k to sigma_{k+1}; zero on the final row.
    double omega = 0.0;
    /// |sigma_k - sigma_true| / |sigma_true| (L2), NaN without a reference.
    double rel_error = 0.0;
};

struct IterationLog {
    std::vector<IterationRecord> records;
    StopReason stop = StopReason::MaxIter;

    int stopping_index() const { return records.empty() ? 0 : records.back().k; }
    double final_residual() const { return records.empty() ? 0.0 : records.back().residual; }
};

/// CSV with header "k,residual,omega,rel_error".
void write_iteration_log(std::ostream& out, const IterationLog& log);

struct DescentDirection {
    NodalField direction;
    double omega = 0.0;
    /// False when |s| = 0 or |F' s| = 0.
    bool valid = false;
};

/// s = F'(sigma)* r and the steepest-descent stepsize |s|_G^2 / |F' s|_data^2.
DescentDirection descent_direction(const ForwardState& state, const DataField& residual,
                                   const EmbeddingAdjoint& riesz);

struct StepResult {
    NodalField sigma_next;
    double omega = 0.0;
    /// Residual norm at the input conductivity.
    double residual = 0.0;
    bool zero_gradient = false;
};

/// Landweber iteration with steepest-descent stepsize on a fixed mesh and measurement set.
class Landweber {
public:
    Landweber(std::shared_ptr<const FemSpace> space, MeasurementSet measurements,
              ReconstructionConfig config);

    const ForwardModel& model() const noexcept { return model_; }
    const EmbeddingAdjoint& riesz() const noexcept { return *riesz_; }
    const ReconstructionConfig& config() const noexcept { return config_; }

    /// One unsafeguarded step sigma_{k+1} = max(sigma_k + omega s, floor).
    StepResult step(const NodalField& sigma, const DataField& data) const;

    struct Result {
        NodalField sigma;
        IterationLog log;
    };

    /// Iterates until |E_delta - F(sigma_k)| <= tau * delta_abs, max_iter steps, or a
    /// vanishing gradient. delta_abs = 0 disables the discrepancy test.
    Result run(const DataField& data, double delta_abs,
               const std::optional<NodalField>& truth = std::nullopt) const;

private:
    ReconstructionConfig config_;
    ForwardModel model_;
    std::shared_ptr<const EmbeddingAdjoint> riesz_;
};

NodalField clamp_below(const NodalField& sigma, double floor);

}  // namespace aet
