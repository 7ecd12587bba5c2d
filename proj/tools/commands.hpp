#pragma once

#include "aet/fem.hpp"
#include "aet/forward.hpp"
#include "aet/phantom.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace aet::cli {

struct RunConfig {
    int mesh_vertices = 2000;
    /// Mesh for synthetic data; finer than the reconstruction mesh.
    int data_mesh_vertices = 40000;
    double alpha = 6.283185307179586;
    /// Angles swept by condition-table.
    std::vector<double> angles;
    int measurements = 3;
    /// Explicit current indices; overrides `measurements` when non-empty.
    std::vector<int> currents;
    CurrentFamily family = CurrentFamily::TrigLimited;
    InnerProductSpec spec = InnerProductSpec::h2_beta();
    double tau = 1.0;
    double noise = 0.0;
    std::uint64_t seed = 1;
    int max_iter = 1000;
    double sigma0 = 1.5;
    double sigma_floor = 0.1;
    bool safeguard = true;
    std::size_t truncate = 0;
    std::vector<std::size_t> singular_vectors;
    PhantomSpec phantom = default_phantom();
    std::filesystem::path data_dir;
    std::filesystem::path out = ".";

    MeasurementSet measurement_set() const;
};

/// "2pi", "3pi/2", "pi/2", "0.75pi" or a plain number of radians.
double parse_angle(const std::string& text);
InnerProductSpec parse_adjoint(const std::string& name);
/// "disc cx cy r plateau [ramp]" or "crescent cx cy r ix iy ir plateau [ramp]".
Inclusion parse_inclusion(const std::string& text);

void cmd_phantom(const RunConfig& config, std::ostream& out);
void cmd_simulate(const RunConfig& config, std::ostream& out);
void cmd_reconstruct(const RunConfig& config, std::ostream& out);
void cmd_svd(const RunConfig& config, std::ostream& out);
void cmd_condition_table(const RunConfig& config, std::ostream& out);

/// Full command line: parses flags and the optional config file, runs one command, and
/// maps failures to a single "error: kind=... message=..." line on `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace aet::cli
