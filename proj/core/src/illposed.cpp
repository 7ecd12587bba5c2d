#include "aet/illposed.hpp"

#include "aet/error.hpp"
#include "aet/parallel.hpp"
#include "aet/sensitivity.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>

#include <algorithm>
#include <limits>
#include <map>
#include <ostream>
#include <set>

namespace aet {

TransferMatrix TransferMatrix::select_blocks(const std::vector<std::size_t>& positions) const {
    const Eigen::Index n = matrix.cols();
    TransferMatrix out;
    out.alpha = alpha;
    out.family = family;
    out.matrix.resize(static_cast<Eigen::Index>(positions.size()) * n, n);
    for (std::size_t b = 0; b < positions.size(); ++b) {
        const auto p = positions[b];
        if (p >= current_indices.size()) throw InvalidArgument("row block out of range");
        out.matrix.middleRows(static_cast<Eigen::Index>(b) * n, n) =
            matrix.middleRows(static_cast<Eigen::Index>(p) * n, n);
        out.current_indices.push_back(current_indices[p]);
    }
    return out;
}

TransferMatrix assemble_transfer_matrix(const ForwardState& state,
                                        const MeasurementSet& measurements) {
    const FemSpace& space = *state.space;
    const auto n = static_cast<Eigen::Index>(space.vertex_count());
    const auto m = static_cast<Eigen::Index>(state.measurement_count());
    if (static_cast<std::size_t>(m) != measurements.size()) {
        throw InvalidArgument("forward state and measurement set disagree");
    }

    TransferMatrix t;
    t.alpha = measurements.arc().alpha();
    t.family = measurements[0].family();
    for (const auto& c : measurements.currents()) t.current_indices.push_back(c.index());
    t.matrix.resize(m * n, n);

    parallel_for(static_cast<std::size_t>(n), [&](std::size_t i) {
        Vector hat = Vector::Zero(n);
        hat(static_cast<Eigen::Index>(i)) = 1.0;
        DataField column;
        try {
            column = derivative_apply(state, NodalField(space.mesh_ptr(), std::move(hat)));
        } catch (const SolverError& e) {
            throw SolverError("transfer matrix column " + std::to_string(i) + ": " + e.what(),
                              e.residual());
        }
        for (Eigen::Index j = 0; j < m; ++j) {
            t.matrix.block(j * n, static_cast<Eigen::Index>(i), n, 1) =
                space.mass() * column[static_cast<std::size_t>(j)].values;
        }
    });
    return t;
}

TransferMatrix assemble_transfer_matrix(const NodalField& sigma_truth,
                                        const MeasurementSet& measurements, double sigma_floor) {
    ForwardModel model(std::make_shared<FemSpace>(sigma_truth.mesh), measurements, sigma_floor);
    return assemble_transfer_matrix(model.solve(sigma_truth), measurements);
}

SvdReport svd_analyze(const Eigen::MatrixXd& matrix, const SvdOptions& options) {
    if (matrix.size() == 0) throw InvalidArgument("cannot analyse an empty matrix");
    if (!matrix.allFinite()) throw InvalidArgument("matrix has non-finite entries");

    const unsigned int flags = options.right_vectors ? static_cast<unsigned int>(Eigen::ComputeThinV) : 0u;
    Eigen::MatrixXd reduced;
    const Eigen::MatrixXd* target = &matrix;
    if (matrix.rows() > matrix.cols()) {
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(matrix);
        reduced = qr.matrixQR().topRows(matrix.cols()).triangularView<Eigen::Upper>();
        target = &reduced;
    }
    Eigen::BDCSVD<Eigen::MatrixXd> svd(*target, flags);
    if (svd.info() != Eigen::Success) {
        throw SolverError("singular value decomposition did not converge",
                          std::numeric_limits<double>::infinity());
    }

    SvdReport report;
    report.singular_values = svd.singularValues();
    if (options.right_vectors) report.right_vectors = svd.matrixV();

    const auto count = report.singular_values.size();
    Eigen::Index kept = count;
    if (options.truncate > 0) {
        kept = std::min<Eigen::Index>(count, static_cast<Eigen::Index>(options.truncate));
    }
    const double smallest = report.singular_values(kept - 1);
    report.condition = smallest > 0.0 ? report.singular_values(0) / smallest
                                      : std::numeric_limits<double>::infinity();
    return report;
}

std::optional<NodalField> singular_vector_field(const SvdReport& report, std::size_t index,
                                                std::shared_ptr<const Mesh> mesh) {
    if (index == 0 || index > static_cast<std::size_t>(report.right_vectors.cols())) {
        return std::nullopt;
    }
    return NodalField(std::move(mesh),
                      report.right_vectors.col(static_cast<Eigen::Index>(index - 1)));
}

std::vector<std::vector<int>> default_condition_rows() {
    return {{1, 2, 3}, {1, 2}, {2, 3}, {1, 3}, {1}, {2}, {3}};
}

std::vector<ConditionEntry> condition_table(const NodalField& sigma_truth,
                                            const std::vector<ConditionScenario>& scenarios,
                                            double sigma_floor, std::size_t truncate) {
    std::map<double, std::set<int>> by_angle;
    for (const auto& s : scenarios) {
        if (s.current_indices.empty()) throw InvalidArgument("scenario without measurements");
        by_angle[s.alpha].insert(s.current_indices.begin(), s.current_indices.end());
    }

    auto space = std::make_shared<FemSpace>(sigma_truth.mesh);
    std::map<double, TransferMatrix> matrices;
    for (const auto& [alpha, index_set] : by_angle) {
        const std::vector<int> indices(index_set.begin(), index_set.end());
        const auto measurements = MeasurementSet::trig(indices, BoundaryArc(alpha));
        ForwardModel model(space, measurements, sigma_floor);
        matrices.emplace(alpha, assemble_transfer_matrix(model.solve(sigma_truth), measurements));
    }

    std::vector<ConditionEntry> entries;
    for (const auto& s : scenarios) {
        const TransferMatrix& full = matrices.at(s.alpha);
        std::vector<std::size_t> positions;
        for (int idx : s.current_indices) {
            const auto it =
                std::find(full.current_indices.begin(), full.current_indices.end(), idx);
            positions.push_back(static_cast<std::size_t>(it - full.current_indices.begin()));
        }
        SvdOptions options;
        options.truncate = truncate;
        entries.push_back({s, svd_analyze(full.select_blocks(positions).matrix, options).condition});
    }
    return entries;
}

void write_condition_table(std::ostream& out, const std::vector<ConditionEntry>& entries) {
    const auto old_precision = out.precision(17);
    out << "measurements,functions,alpha,condition\n";
    for (const auto& e : entries) {
        out << e.scenario.current_indices.size() << ',';
        for (std::size_t i = 0; i < e.scenario.current_indices.size(); ++i) {
            if (i) out << ' ';
            out << 'g' << e.scenario.current_indices[i];
        }
        out << ',' << e.scenario.alpha << ',' << e.condition << '\n';
    }
    out.precision(old_precision);
}

void write_singular_values(std::ostream& out, const Eigen::VectorXd& values) {
    const auto old_precision = out.precision(17);
    out << "k,sigma_k\n";
    for (Eigen::Index k = 0; k < values.size(); ++k) out << k + 1 << ',' << values(k) << '\n';
    out.precision(old_precision);
}

}  // namespace aet
