#pragma once

#include "aet/fem.hpp"
#include "aet/mesh.hpp"

#include <filesystem>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

namespace aet {

/// CSV with header "x,y,value", one row per vertex in mesh order, 17 significant digits.
void write_field_csv(std::ostream& out, const NodalField& field);

/// Reads a field written by write_field_csv. The coordinates must match the mesh vertices.
NodalField read_field_csv(std::istream& in, std::shared_ptr<const Mesh> mesh);

struct NamedField {
    std::string name;
    Vector values;
};

/// Legacy ASCII VTK unstructured grid with point data (one value per vertex) and optional
/// cell data (one value per triangle).
void write_vtk(std::ostream& out, const Mesh& mesh, const std::vector<NamedField>& point_data,
               const std::vector<NamedField>& cell_data = {},
               const std::string& title = "aet field");

void save_field_csv(const std::filesystem::path& path, const NodalField& field);
NodalField load_field_csv(const std::filesystem::path& path, std::shared_ptr<const Mesh> mesh);
void save_vtk(const std::filesystem::path& path, const Mesh& mesh,
              const std::vector<NamedField>& point_data,
              const std::vector<NamedField>& cell_data = {});
void save_mesh(const std::filesystem::path& path, const Mesh& mesh);
Mesh load_mesh(const std::filesystem::path& path);

}  // namespace aet
