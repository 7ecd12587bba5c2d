#include "aet/field_io.hpp"

#include "aet/error.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace aet {

void write_field_csv(std::ostream& out, const NodalField& field) {
    const auto old_precision = out.precision(17);
    out << "x,y,value\n";
    const auto& pts = field.mesh->vertices();
    for (std::size_t i = 0; i < pts.size(); ++i) {
        out << pts[i].x << ',' << pts[i].y << ',' << field.values(static_cast<Eigen::Index>(i))
            << '\n';
    }
    out.precision(old_precision);
}

NodalField read_field_csv(std::istream& in, std::shared_ptr<const Mesh> mesh) {
    std::string line;
    if (!std::getline(in, line) || line.rfind("x,y,value", 0) != 0) {
        throw IoError("field file lacks the 'x,y,value' header");
    }
    const auto& pts = mesh->vertices();
    Vector values(static_cast<Eigen::Index>(pts.size()));
    for (std::size_t i = 0; i < pts.size(); ++i) {
        if (!std::getline(in, line)) throw IoError("field file has fewer rows than the mesh");
        std::istringstream row(line);
        double x, y, v;
        char c1, c2;
        if (!(row >> x >> c1 >> y >> c2 >> v) || c1 != ',' || c2 != ',') {
            throw IoError("malformed field row " + std::to_string(i + 1));
        }
        if (std::abs(x - pts[i].x) > 1e-12 || std::abs(y - pts[i].y) > 1e-12) {
            throw IoError("field row " + std::to_string(i + 1) + " does not match mesh vertex");
        }
        values(static_cast<Eigen::Index>(i)) = v;
    }
    return NodalField(std::move(mesh), std::move(values));
}

void write_vtk(std::ostream& out, const Mesh& mesh, const std::vector<NamedField>& point_data,
               const std::vector<NamedField>& cell_data, const std::string& title) {
    const auto old_precision = out.precision(17);
    out << "# vtk DataFile Version 3.0\n" << title << "\nASCII\nDATASET UNSTRUCTURED_GRID\n";
    out << "POINTS " << mesh.vertex_count() << " double\n";
    for (const auto& p : mesh.vertices()) out << p.x << ' ' << p.y << " 0\n";
    out << "CELLS " << mesh.triangle_count() << ' ' << 4 * mesh.triangle_count() << '\n';
    for (const auto& t : mesh.triangles()) out << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
    out << "CELL_TYPES " << mesh.triangle_count() << '\n';
    for (std::size_t t = 0; t < mesh.triangle_count(); ++t) out << "5\n";  // VTK_TRIANGLE

    auto write_block = [&out](const NamedField& f) {
        out << "SCALARS " << f.name << " double 1\nLOOKUP_TABLE default\n";
        for (Eigen::Index i = 0; i < f.values.size(); ++i) out << f.values(i) << '\n';
    };
    if (!point_data.empty()) {
        out << "POINT_DATA " << mesh.vertex_count() << '\n';
        for (const auto& f : point_data) {
            if (static_cast<std::size_t>(f.values.size()) != mesh.vertex_count()) {
                throw InvalidArgument("point field '" + f.name + "' has the wrong length");
            }
            write_block(f);
        }
    }
    if (!cell_data.empty()) {
        out << "CELL_DATA " << mesh.triangle_count() << '\n';
        for (const auto& f : cell_data) {
            if (static_cast<std::size_t>(f.values.size()) != mesh.triangle_count()) {
                throw InvalidArgument("cell field '" + f.name + "' has the wrong length");
            }
            write_block(f);
        }
    }
    out.precision(old_precision);
}

namespace {

std::ofstream open_for_write(const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    return out;
}

std::ifstream open_for_read(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    return in;
}

}  // namespace

void save_field_csv(const std::filesystem::path& path, const NodalField& field) {
    auto out = open_for_write(path);
    write_field_csv(out, field);
    if (!out) throw IoError("write to " + path.string() + " failed");
}

NodalField load_field_csv(const std::filesystem::path& path, std::shared_ptr<const Mesh> mesh) {
    auto in = open_for_read(path);
    return read_field_csv(in, std::move(mesh));
}

void save_vtk(const std::filesystem::path& path, const Mesh& mesh,
              const std::vector<NamedField>& point_data,
              const std::vector<NamedField>& cell_data) {
    auto out = open_for_write(path);
    write_vtk(out, mesh, point_data, cell_data, path.stem().string());
    if (!out) throw IoError("write to " + path.string() + " failed");
}

void save_mesh(const std::filesystem::path& path, const Mesh& mesh) {
    auto out = open_for_write(path);
    write_mesh(out, mesh);
    if (!out) throw IoError("write to " + path.string() + " failed");
}

Mesh load_mesh(const std::filesystem::path& path) {
    auto in = open_for_read(path);
    return read_mesh(in);
}

}  // namespace aet
