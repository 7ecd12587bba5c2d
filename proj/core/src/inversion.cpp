#include "aet/inversion.hpp"

#include "aet/error.hpp"

#include <cmath>
#include <limits>
#include <ostream>
#include <random>

namespace aet {

NoisyData add_noise(const FemSpace& space, const DataField& exact, double delta_rel,
                    std::uint64_t seed) {
    if (!(delta_rel >= 0.0)) throw InvalidArgument("relative noise level must be >= 0");
    NoisyData out{exact, 0.0};
    if (delta_rel == 0.0) return out;

    std::mt19937_64 engine(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    DataField noise;
    for (const auto& block : exact) {
        Vector e(block.values.size());
        for (Eigen::Index i = 0; i < e.size(); ++i) e(i) = normal(engine);
        noise.emplace_back(block.mesh, std::move(e));
    }
    const double noise_norm = data_norm(space, noise);
    out.delta_abs = delta_rel * data_norm(space, exact);
    for (std::size_t j = 0; j < exact.size(); ++j) {
        out.data[j].values += (out.delta_abs / noise_norm) * noise[j].values;
    }
    return out;
}

std::string to_string(StopReason reason) {
    switch (reason) {
        case StopReason::Discrepancy:
            return "discrepancy";
        case StopReason::MaxIter:
            return "max_iter";
        case StopReason::ZeroGradient:
            return "zero_gradient";
        case StopReason::Stagnation:
            return "stagnation";
    }
    return "unknown";
}

void ReconstructionConfig::validate() const {
    if (!(tau >= 1.0)) throw InvalidArgument("tau must be >= 1");
    if (!(sigma_floor > 0.0)) throw InvalidArgument("conductivity floor must be positive");
    if (max_iter < 1) throw InvalidArgument("max_iter must be >= 1");
    if (max_halvings < 0) throw InvalidArgument("max_halvings must be >= 0");
    if (!initial_field && sigma0 < sigma_floor) {
        throw AdmissibilityError("initial guess is below the admissibility floor");
    }
    spec.validate();
}

void write_iteration_log(std::ostream& out, const IterationLog& log) {
    const auto old_precision = out.precision(17);
    out << "k,residual,omega,rel_error\n";
    for (const auto& r : log.records) {
        out << r.k << ',' << r.residual << ',' << r.omega << ',';
        if (std::isnan(r.rel_error)) {
            out << "nan";
        } else {
            out << r.rel_error;
        }
        out << '\n';
    }
    out.precision(old_precision);
}

NodalField clamp_below(const NodalField& sigma, double floor) {
    return NodalField(sigma.mesh, sigma.values.cwiseMax(floor));
}

DescentDirection descent_direction(const ForwardState& state, const DataField& residual,
                                   const EmbeddingAdjoint& riesz) {
    DescentDirection out;
    out.direction = adjoint_apply(state, residual, riesz);
    const double numerator = riesz.norm_squared(out.direction.values);
    if (!(numerator > 0.0)) return out;
    const double denominator =
        std::pow(data_norm(*state.space, derivative_apply(state, out.direction)), 2);
    if (!(denominator > 0.0)) return out;
    out.omega = numerator / denominator;
    out.valid = std::isfinite(out.omega);
    return out;
}

// ---------------------------------------------------------------------------

Landweber::Landweber(std::shared_ptr<const FemSpace> space, MeasurementSet measurements,
                     ReconstructionConfig config)
    : config_(std::move(config)),
      model_(space, std::move(measurements), config_.sigma_floor),
      riesz_(std::make_shared<EmbeddingAdjoint>(space, config_.spec)) {
    config_.validate();
}

StepResult Landweber::step(const NodalField& sigma, const DataField& data) const {
    const ForwardState state = model_.solve(sigma);
    const DataField residual = data_difference(data, state.power_densities);
    StepResult result;
    result.residual = data_norm(model_.space(), residual);
    const DescentDirection dir = descent_direction(state, residual, *riesz_);
    if (!dir.valid) {
        result.sigma_next = sigma;
        result.zero_gradient = true;
        return result;
    }
    result.omega = dir.omega;
    result.sigma_next = clamp_below(
        NodalField(sigma.mesh, sigma.values + dir.omega * dir.direction.values), config_.sigma_floor);
    return result;
}

Landweber::Result Landweber::run(const DataField& data, double delta_abs,
                                 const std::optional<NodalField>& truth) const {
    if (data.size() != model_.measurements().size()) {
        throw InvalidArgument("data has " + std::to_string(data.size()) + " blocks for " +
                              std::to_string(model_.measurements().size()) + " measurements");
    }
    if (!(delta_abs >= 0.0)) throw InvalidArgument("noise level must be >= 0");
    const FemSpace& space = model_.space();

    auto l2_norm = [&space](const Vector& v) {
        return std::sqrt(std::max(0.0, v.dot(space.mass() * v)));
    };
    const double truth_norm = truth ? l2_norm(truth->values) : 0.0;
    auto rel_error = [&](const NodalField& s) {
        if (!truth) return std::numeric_limits<double>::quiet_NaN();
        return l2_norm(s.values - truth->values) / truth_norm;
    };

    NodalField sigma = config_.initial_field
                           ? clamp_below(*config_.initial_field, config_.sigma_floor)
                           : NodalField::constant(space.mesh_ptr(), config_.sigma0);
    ForwardState state = model_.solve(sigma);
    DataField residual = data_difference(data, state.power_densities);
    double residual_norm = data_norm(space, residual);

    Result result;
    IterationLog& log = result.log;
    const double threshold = config_.tau * delta_abs;

    for (int k = 0;; ++k) {
        log.records.push_back({k, residual_norm, 0.0, rel_error(sigma)});

        if (delta_abs > 0.0 && residual_norm <= threshold) {
            log.stop = StopReason::Discrepancy;
            break;
        }
        if (k >= config_.max_iter) {
            log.stop = StopReason::MaxIter;
            break;
        }

        const DescentDirection dir = descent_direction(state, residual, *riesz_);
        if (!dir.valid) {
            log.stop = StopReason::ZeroGradient;
            break;
        }

        double omega = dir.omega;
        bool accepted = false;
        for (int halving = 0; halving <= config_.max_halvings; ++halving) {
            NodalField trial = clamp_below(
                NodalField(sigma.mesh, sigma.values + omega * dir.direction.values),
                config_.sigma_floor);
            ForwardState trial_state = model_.solve(trial);
            DataField trial_residual = data_difference(data, trial_state.power_densities);
            const double trial_norm = data_norm(space, trial_residual);
            if (!config_.safeguard || trial_norm <= residual_norm) {
                sigma = std::move(trial);
                state = std::move(trial_state);
                residual = std::move(trial_residual);
                residual_norm = trial_norm;
                accepted = true;
                break;
            }
            omega *= 0.5;
        }
        if (!accepted) {
            log.stop = StopReason::Stagnation;
            break;
        }
        log.records.back().omega = omega;
    }

    result.sigma = std::move(sigma);
    return result;
}

}  // namespace aet
