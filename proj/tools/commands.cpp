#include "commands.hpp"

#include "aet/error.hpp"
#include "aet/field_io.hpp"
#include "aet/illposed.hpp"
#include "aet/inversion.hpp"
#include "aet/mesh.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>

namespace aet::cli {

namespace fs = std::filesystem;

namespace {

constexpr double pi = std::numbers::pi;

std::ofstream open_output(const fs::path& path) {
    std::error_code ec;
    if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << std::setprecision(17);
    return out;
}

std::string join(const std::vector<int>& values, char sep) {
    std::string s;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) s += sep;
        s += std::to_string(values[i]);
    }
    return s;
}

std::vector<int> current_indices(const MeasurementSet& ms) {
    std::vector<int> out;
    for (const auto& g : ms.currents()) out.push_back(g.index());
    return out;
}

std::string field_name(const char* stem, std::size_t j) {
    return std::string(stem) + "_" + std::to_string(j + 1);
}

std::shared_ptr<const Mesh> make_mesh(int vertices) {
    return std::make_shared<const Mesh>(generate_disk_mesh(vertices));
}

struct Synthetic {
    std::shared_ptr<const Mesh> mesh;
    std::shared_ptr<FemSpace> space;
    MeasurementSet measurements;
    NodalField truth;
    DataField exact;
    NoisyData noisy;
    std::optional<double> det_min;
};

// Fine-mesh forward solve, interpolation onto the reconstruction mesh, noise.
Synthetic synthesize(const RunConfig& config) {
    config.phantom.validate(config.sigma_floor);
    if (config.data_mesh_vertices < config.mesh_vertices) {
        throw InvalidArgument("data mesh (" + std::to_string(config.data_mesh_vertices) +
                              " vertices) must not be coarser than the reconstruction mesh (" +
                              std::to_string(config.mesh_vertices) + ")");
    }
    Synthetic s{make_mesh(config.mesh_vertices), nullptr, config.measurement_set(), {}, {}, {}, {}};
    s.space = std::make_shared<FemSpace>(s.mesh);
    s.truth = sample_phantom(config.phantom, s.mesh);

    auto fine_mesh = make_mesh(config.data_mesh_vertices);
    const ForwardState fine = solve_measurement_set(sample_phantom(config.phantom, fine_mesh),
                                                    s.measurements, config.sigma_floor);
    for (const auto& e : fine.power_densities) s.exact.push_back(interpolate_field(e, s.mesh));
    if (fine.potentials.size() >= 2) {
        s.det_min = determinant_diagnostic(*fine.space, fine.potentials[0], fine.potentials[1]).min_abs;
    }
    s.noisy = add_noise(*s.space, s.exact, config.noise, config.seed);
    return s;
}

std::map<std::string, std::string> read_key_values(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read " + path.string());
    std::map<std::string, std::string> out;
    std::string line;
    while (std::getline(in, line)) {
        const auto eq = line.find('=');
        if (eq == std::string::npos || line.starts_with('#')) continue;
        auto trim = [](std::string v) {
            const auto b = v.find_first_not_of(" \t");
            const auto e = v.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : v.substr(b, e - b + 1);
        };
        out[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return out;
}

const std::string& require_key(const std::map<std::string, std::string>& kv, const std::string& key,
                               const fs::path& file) {
    const auto it = kv.find(key);
    if (it == kv.end()) throw IoError(file.string() + " lacks key '" + key + "'");
    return it->second;
}

double to_double(const std::string& text, const std::string& what) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(text, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != text.size()) throw InvalidArgument("cannot parse " + what + " '" + text + "'");
    return v;
}

void print_stop_summary(std::ostream& out, const IterationLog& log, double delta_abs) {
    out << "stop=" << to_string(log.stop) << " k=" << log.stopping_index()
        << " residual=" << log.final_residual() << " delta_abs=" << delta_abs;
    const double err = log.records.empty() ? std::nan("") : log.records.back().rel_error;
    if (!std::isnan(err)) {
        out << " rel_error0=" << log.records.front().rel_error << " rel_error=" << err;
    }
    out << '\n';
}

}  // namespace

MeasurementSet RunConfig::measurement_set() const {
    std::vector<int> indices = currents;
    if (indices.empty()) {
        if (measurements < 1) throw InvalidArgument("measurements must be >= 1");
        for (int j = 1; j <= measurements; ++j) indices.push_back(j);
    }
    if (family == CurrentFamily::SpecialFull) return MeasurementSet::special(indices);
    return MeasurementSet::trig(indices, BoundaryArc(alpha));
}

double parse_angle(const std::string& text) {
    std::string s;
    for (char c : text) {
        if (c != ' ') s += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    const auto at = s.find("pi");
    if (at == std::string::npos) return to_double(s, "angle");
    std::string coeff = s.substr(0, at);
    if (!coeff.empty() && coeff.back() == '*') coeff.pop_back();
    double value = (coeff.empty() ? 1.0 : to_double(coeff, "angle")) * pi;
    const std::string rest = s.substr(at + 2);
    if (!rest.empty()) {
        if (rest.front() != '/') throw InvalidArgument("cannot parse angle '" + text + "'");
        value /= to_double(rest.substr(1), "angle");
    }
    return value;
}

InnerProductSpec parse_adjoint(const std::string& name) {
    if (name == "l2") return InnerProductSpec::l2();
    if (name == "h2") return InnerProductSpec::h2();
    if (name == "h2beta") return InnerProductSpec::h2_beta();
    throw InvalidArgument("unknown adjoint '" + name + "' (expected l2, h2 or h2beta)");
}

Inclusion parse_inclusion(const std::string& text) {
    std::istringstream in(text);
    std::string kind;
    in >> kind;
    std::vector<double> v;
    for (std::string tok; in >> tok;) v.push_back(to_double(tok, "inclusion parameter"));
    Inclusion inc;
    if (kind == "disc" && (v.size() == 4 || v.size() == 5)) {
        inc.shape = Disc{{v[0], v[1]}, v[2]};
        inc.plateau = v[3];
        if (v.size() == 5) inc.ramp_width = v[4];
    } else if (kind == "crescent" && (v.size() == 7 || v.size() == 8)) {
        inc.shape = Crescent{Disc{{v[0], v[1]}, v[2]}, Disc{{v[3], v[4]}, v[5]}};
        inc.plateau = v[6];
        if (v.size() == 8) inc.ramp_width = v[7];
    } else {
        throw InvalidArgument("cannot parse inclusion '" + text + "'");
    }
    return inc;
}

void cmd_phantom(const RunConfig& config, std::ostream& out) {
    config.phantom.validate(config.sigma_floor);
    auto mesh = make_mesh(config.mesh_vertices);
    const NodalField sigma = sample_phantom(config.phantom, mesh);
    save_mesh(config.out / "mesh.txt", *mesh);
    save_field_csv(config.out / "phantom.csv", sigma);
    save_vtk(config.out / "phantom.vtk", *mesh, {{"sigma", sigma.values}});

    out << "vertices=" << mesh->vertex_count() << " min=" << sigma.values.minCoeff()
        << " max=" << sigma.values.maxCoeff() << " background=" << config.phantom.background
        << " plateaus=";
    for (std::size_t i = 0; i < config.phantom.inclusions.size(); ++i) {
        out << (i ? "," : "") << config.phantom.inclusions[i].plateau;
    }
    out << '\n';
}

void cmd_simulate(const RunConfig& config, std::ostream& out) {
    const Synthetic s = synthesize(config);
    const fs::path& dir = config.out;
    save_mesh(dir / "mesh.txt", *s.mesh);
    save_field_csv(dir / "truth.csv", s.truth);
    std::vector<NamedField> vtk{{"sigma", s.truth.values}};
    for (std::size_t j = 0; j < s.exact.size(); ++j) {
        save_field_csv(dir / (field_name("E", j) + ".csv"), s.exact[j]);
        save_field_csv(dir / (field_name("E_delta", j) + ".csv"), s.noisy.data[j]);
        vtk.push_back({field_name("E", j), s.exact[j].values});
        vtk.push_back({field_name("E_delta", j), s.noisy.data[j].values});
    }
    save_vtk(dir / "data.vtk", *s.mesh, vtk);

    auto summary = open_output(dir / "simulate.txt");
    summary << "alpha = " << config.alpha << '\n'
            << "family = " << to_string(config.family) << '\n'
            << "currents = " << join(current_indices(s.measurements), ' ') << '\n'
            << "noise = " << config.noise << '\n'
            << "seed = " << config.seed << '\n'
            << "delta_abs = " << s.noisy.delta_abs << '\n';
    if (s.det_min) summary << "det_min = " << *s.det_min << '\n';

    out << "measurements=" << s.exact.size() << " delta_abs=" << s.noisy.delta_abs;
    if (s.det_min) out << " det_min=" << *s.det_min;
    out << '\n';
}

void cmd_reconstruct(const RunConfig& config, std::ostream& out) {
    std::shared_ptr<const Mesh> mesh;
    std::shared_ptr<FemSpace> space;
    std::optional<MeasurementSet> measurements;
    DataField data;
    double delta_abs = 0.0;
    std::optional<NodalField> truth;

    if (!config.data_dir.empty()) {
        const fs::path& dir = config.data_dir;
        const fs::path info = dir / "simulate.txt";
        const auto kv = read_key_values(info);
        RunConfig recorded = config;
        recorded.alpha = to_double(require_key(kv, "alpha", info), "alpha");
        recorded.family = parse_current_family(require_key(kv, "family", info));
        recorded.currents.clear();
        std::istringstream idx(require_key(kv, "currents", info));
        for (int j; idx >> j;) recorded.currents.push_back(j);
        delta_abs = to_double(require_key(kv, "delta_abs", info), "delta_abs");
        measurements = recorded.measurement_set();

        mesh = std::make_shared<const Mesh>(load_mesh(dir / "mesh.txt"));
        space = std::make_shared<FemSpace>(mesh);
        for (std::size_t j = 0; j < measurements->size(); ++j) {
            data.push_back(load_field_csv(dir / (field_name("E_delta", j) + ".csv"), mesh));
        }
        if (fs::exists(dir / "truth.csv")) truth = load_field_csv(dir / "truth.csv", mesh);
    } else {
        Synthetic s = synthesize(config);
        mesh = s.mesh;
        space = s.space;
        measurements = s.measurements;
        data = std::move(s.noisy.data);
        delta_abs = s.noisy.delta_abs;
        truth = std::move(s.truth);
    }

    ReconstructionConfig rc;
    rc.tau = config.tau;
    rc.sigma0 = config.sigma0;
    rc.max_iter = config.max_iter;
    rc.spec = config.spec;
    rc.sigma_floor = config.sigma_floor;
    rc.safeguard = config.safeguard;
    const Landweber landweber(space, *measurements, rc);
    const auto result = landweber.run(data, delta_abs, truth);

    const fs::path& dir = config.out;
    save_field_csv(dir / "sigma.csv", result.sigma);
    std::vector<NamedField> vtk{{"sigma", result.sigma.values}};
    if (truth) vtk.push_back({"sigma_true", truth->values});
    save_vtk(dir / "sigma.vtk", *mesh, vtk);
    {
        auto log = open_output(dir / "log.csv");
        write_iteration_log(log, result.log);
    }
    std::ostringstream line;
    line << std::setprecision(10);
    print_stop_summary(line, result.log, delta_abs);
    auto summary = open_output(dir / "summary.txt");
    summary << line.str();
    out << line.str();
}

void cmd_svd(const RunConfig& config, std::ostream& out) {
    config.phantom.validate(config.sigma_floor);
    auto mesh = make_mesh(config.mesh_vertices);
    const MeasurementSet ms = config.measurement_set();
    const TransferMatrix t = assemble_transfer_matrix(sample_phantom(config.phantom, mesh), ms,
                                                      config.sigma_floor);
    SvdOptions options;
    options.truncate = config.truncate;
    options.right_vectors = !config.singular_vectors.empty();
    const SvdReport report = svd_analyze(t.matrix, options);

    const fs::path& dir = config.out;
    {
        auto csv = open_output(dir / "singular_values.csv");
        write_singular_values(csv, report.singular_values);
    }
    {
        auto csv = open_output(dir / "condition.csv");
        write_condition_table(csv, {{{t.current_indices, t.alpha}, report.condition}});
    }
    for (std::size_t k : config.singular_vectors) {
        const auto field = singular_vector_field(report, k, mesh);
        if (!field) {
            warn("singular vector " + std::to_string(k) + " requested but only " +
                 std::to_string(report.singular_values.size()) + " exist");
            continue;
        }
        const std::string stem = "singular_vector_" + std::to_string(k);
        save_field_csv(dir / (stem + ".csv"), *field);
        save_vtk(dir / (stem + ".vtk"), *mesh, {{stem, field->values}});
    }
    out << "alpha=" << t.alpha << " currents=" << join(t.current_indices, ',')
        << " rows=" << t.matrix.rows() << " cols=" << t.matrix.cols()
        << " sigma_max=" << report.singular_values(0)
        << " sigma_min=" << report.singular_values(report.singular_values.size() - 1)
        << " condition=" << report.condition << '\n';
}

void cmd_condition_table(const RunConfig& config, std::ostream& out) {
    config.phantom.validate(config.sigma_floor);
    if (config.family != CurrentFamily::TrigLimited) {
        throw InvalidArgument("condition-table uses the trig family only");
    }
    auto mesh = make_mesh(config.mesh_vertices);
    const std::vector<double> angles =
        config.angles.empty() ? std::vector<double>{2.0 * pi, 1.5 * pi, pi, 0.5 * pi} : config.angles;
    std::vector<ConditionScenario> scenarios;
    for (double a : angles) {
        for (const auto& rows : default_condition_rows()) scenarios.push_back({rows, a});
    }
    const auto table = condition_table(sample_phantom(config.phantom, mesh), scenarios,
                                       config.sigma_floor, config.truncate);
    {
        auto csv = open_output(config.out / "condition_table.csv");
        write_condition_table(csv, table);
    }
    write_condition_table(out, table);
}

namespace {

// Flag values as typed; converted once parsing is complete.
struct RawFlags {
    std::string alpha;
    std::vector<std::string> angles;
    std::string family = "trig";
    std::string adjoint = "h2beta";
    std::vector<double> beta;
    std::vector<std::string> inclusions;
    bool no_safeguard = false;
};

void add_phantom_options(CLI::App* cmd, RunConfig& c, RawFlags& raw) {
    cmd->add_option("--mesh-vertices", c.mesh_vertices, "Approximate vertex count of the mesh")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--sigma-floor", c.sigma_floor, "Admissibility floor for the conductivity");
    cmd->add_option("--background", c.phantom.background, "Phantom background conductivity");
    cmd->add_option("--inclusion", raw.inclusions,
                    "Replace the default inclusions: 'disc cx cy r plateau [ramp]' or "
                    "'crescent cx cy r ix iy ir plateau [ramp]'");
    cmd->add_option("--out", c.out, "Output directory");
}

void add_measurement_options(CLI::App* cmd, RunConfig& c, RawFlags& raw) {
    cmd->add_option("--alpha", raw.alpha, "Accessible boundary angle, e.g. 2pi, 3pi/2, 1.2");
    cmd->add_option("--measurements", c.measurements, "Number of boundary currents M")
        ->check(CLI::Range(1, 64));
    cmd->add_option("--currents", c.currents, "Explicit current indices (overrides --measurements)")
        ->delimiter(',');
    cmd->add_option("--family", raw.family, "Boundary current family")
        ->check(CLI::IsMember({"trig", "special"}));
}

void add_data_options(CLI::App* cmd, RunConfig& c) {
    cmd->add_option("--data-mesh-vertices", c.data_mesh_vertices, "Vertex count of the data mesh")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--noise", c.noise, "Relative noise level delta_rel")->check(CLI::NonNegativeNumber);
    cmd->add_option("--seed", c.seed, "Noise seed");
}

std::string one_line(std::string s) {
    std::replace(s.begin(), s.end(), '\n', ' ');
    std::string out;
    for (char ch : s) {
        if (ch == '"' || ch == '\\') out += '\\';
        out += ch;
    }
    return out;
}

int report(std::ostream& err, const char* kind, const std::string& message, int code) {
    err << "error: kind=" << kind << " message=\"" << one_line(message) << "\"\n";
    return code;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    RunConfig c;
    RawFlags raw;

    CLI::App app{"Acousto-electrical tomography: simulation, Landweber reconstruction and SVD analysis",
                 "aet"};
    app.set_config("--config", "", "INI file with one [command] section of key = value lines");
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all");

    auto* phantom = app.add_subcommand("phantom", "Sample the test phantom and write CSV + VTK");
    add_phantom_options(phantom, c, raw);

    auto* simulate = app.add_subcommand("simulate", "Synthesize power-density data on a finer mesh");
    add_phantom_options(simulate, c, raw);
    add_measurement_options(simulate, c, raw);
    add_data_options(simulate, c);

    auto* reconstruct = app.add_subcommand("reconstruct", "Landweber reconstruction");
    add_phantom_options(reconstruct, c, raw);
    add_measurement_options(reconstruct, c, raw);
    add_data_options(reconstruct, c);
    reconstruct->add_option("--data", c.data_dir, "Directory written by 'simulate'")->check(CLI::ExistingDirectory);
    reconstruct->add_option("--adjoint", raw.adjoint, "Domain inner product")
        ->check(CLI::IsMember({"l2", "h2", "h2beta"}));
    reconstruct->add_option("--beta", raw.beta, "Weights beta0 beta1 beta2 for h2beta")->expected(3);
    reconstruct->add_option("--tau", c.tau, "Discrepancy factor (>= 1)");
    reconstruct->add_option("--max-iter", c.max_iter, "Iteration cap");
    reconstruct->add_option("--sigma0", c.sigma0, "Constant initial guess");
    reconstruct->add_flag("--no-safeguard", raw.no_safeguard, "Take full steepest-descent steps");

    auto* svd = app.add_subcommand("svd", "Transfer matrix SVD at the true conductivity");
    add_phantom_options(svd, c, raw);
    add_measurement_options(svd, c, raw);
    svd->add_option("--truncate", c.truncate, "Condition number over the K largest singular values");
    svd->add_option("--vectors", c.singular_vectors, "1-based right singular vectors to export")
        ->delimiter(',');

    auto* table = app.add_subcommand("condition-table", "Condition numbers over angles and current sets");
    add_phantom_options(table, c, raw);
    table->add_option("--angles", raw.angles, "Angles to sweep (default 2pi 3pi/2 pi pi/2)")
        ->delimiter(',');
    table->add_option("--truncate", c.truncate, "Condition number over the K largest singular values");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp& e) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        return report(err, "usage", e.what(), 2);
    }

    try {
        if (!raw.alpha.empty()) c.alpha = parse_angle(raw.alpha);
        for (const auto& a : raw.angles) c.angles.push_back(parse_angle(a));
        c.family = parse_current_family(raw.family);
        c.spec = parse_adjoint(raw.adjoint);
        if (!raw.beta.empty()) {
            if (c.spec.mode != InnerProductMode::H2Beta) throw InvalidArgument("--beta requires --adjoint h2beta");
            c.spec = InnerProductSpec::h2_beta(raw.beta[0], raw.beta[1], raw.beta[2]);
        }
        c.safeguard = !raw.no_safeguard;
        if (!raw.inclusions.empty()) {
            c.phantom.inclusions.clear();
            for (const auto& text : raw.inclusions) c.phantom.inclusions.push_back(parse_inclusion(text));
        }

        out << std::setprecision(10);
        if (phantom->parsed()) cmd_phantom(c, out);
        else if (simulate->parsed()) cmd_simulate(c, out);
        else if (reconstruct->parsed()) cmd_reconstruct(c, out);
        else if (svd->parsed()) cmd_svd(c, out);
        else if (table->parsed()) cmd_condition_table(c, out);
        return 0;
    } catch (const AdmissibilityError& e) {
        return report(err, "admissibility", e.what(), 4);
    } catch (const InvalidArgument& e) {
        return report(err, "invalid_argument", e.what(), 3);
    } catch (const SolverError& e) {
        return report(err, "solver", e.what(), 5);
    } catch (const IoError& e) {
        return report(err, "io", e.what(), 6);
    } catch (const std::exception& e) {
        return report(err, "internal", e.what(), 1);
    }
}

}  // namespace aet::cli
