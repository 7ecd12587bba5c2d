#pragma once

#include "aet/fem.hpp"
#include "aet/forward.hpp"

#include <Eigen/Dense>

#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace aet {

/// Discretized F'(sigma_true): entry (j-block row k, column i) = <F'(sigma) phi_i, psi_k>_L2
/// for measurement j. Rows are the stacked data basis, columns the domain hat functions.
struct TransferMatrix {
    Eigen::MatrixXd matrix;
    double alpha = 0.0;
    std::vector<int> current_indices;
    CurrentFamily family = CurrentFamily::TrigLimited;

    std::size_t measurement_count() const noexcept { return current_indices.size(); }
    std::size_t vertex_count() const noexcept { return static_cast<std::size_t>(matrix.cols()); }

    /// Sub-matrix with the row blocks of the given measurement positions (0-based).
    TransferMatrix select_blocks(const std::vector<std::size_t>& positions) const;
};

/// Column-by-column assembly via derivative_apply on each hat function; columns are
/// independent and built in parallel.
TransferMatrix assemble_transfer_matrix(const ForwardState& state_at_truth,
                                        const MeasurementSet& measurements);
TransferMatrix assemble_transfer_matrix(const NodalField& sigma_truth,
                                        const MeasurementSet& measurements,
                                        double sigma_floor = 0.1);

struct SvdOptions {
    bool right_vectors = false;
    /// Keep only the largest `truncate` singular values for the condition number (0 = all).
    std::size_t truncate = 0;
};

struct SvdReport {
    /// Nonincreasing, nonnegative.
    Eigen::VectorXd singular_values;
    /// s_max / s_min over the retained values; infinity when s_min is zero.
    double condition = 0.0;
    /// Column k is the (k+1)-th right singular vector; empty unless requested.
    Eigen::MatrixXd right_vectors;
};

/// Full SVD. Tall matrices are reduced by a Householder QR first (same singular values and
/// right singular vectors). Throws SolverError if the SVD does not converge.
SvdReport svd_analyze(const Eigen::MatrixXd& matrix, const SvdOptions& options = {});

/// Right singular vector `index` (1-based) as a field; nullopt when index exceeds the count.
std::optional<NodalField> singular_vector_field(const SvdReport& report, std::size_t index,
                                                std::shared_ptr<const Mesh> mesh);

struct ConditionScenario {
    std::vector<int> current_indices;
    double alpha = 0.0;
};

struct ConditionEntry {
    ConditionScenario scenario;
    double condition = 0.0;
};

/// Rows of the reference grid: {1,2,3}, {1,2}, {2,3}, {1,3}, {1}, {2}, {3}.
std::vector<std::vector<int>> default_condition_rows();

/// Condition numbers for every scenario, trig family. Measurements sharing an angle reuse
/// one transfer matrix assembled for the union of their indices.
std::vector<ConditionEntry> condition_table(const NodalField& sigma_truth,
                                            const std::vector<ConditionScenario>& scenarios,
                                            double sigma_floor = 0.1, std::size_t truncate = 0);

/// CSV "measurements,functions,alpha,condition".
void write_condition_table(std::ostream& out, const std::vector<ConditionEntry>& entries);

/// CSV "k,sigma_k" with k starting at 1.
void write_singular_values(std::ostream& out, const Eigen::VectorXd& values);

}  // namespace aet
