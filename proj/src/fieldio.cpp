#include "sd/fieldio.hpp"

#include <cerrno>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace sd {

namespace fs = std::filesystem;

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

void write_file_atomic(const std::string& path, const std::string& content) {
  const fs::path target(path);
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      const std::string why = std::strerror(errno);
      throw std::runtime_error("cannot open " + tmp.string() + " for writing: " + why);
    }
    out << content;
    out.flush();
    if (!out)
      throw std::runtime_error("write failed for " + tmp.string() + ": " +
                               std::strerror(errno));
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec)
    throw std::runtime_error("cannot move " + tmp.string() + " into place: " +
                             ec.message());
}

namespace {

// P1 pressure evaluated at the P2 support points: nodal values directly,
// edge midpoints as endpoint means.
double pressure_at_scalar_dof(const FeSpace& pressure, const Mesh& mesh,
                              std::span<const double> p, int scalar_dof) {
  const int n_nodes = static_cast<int>(mesh.nodes.size());
  if (scalar_dof < n_nodes) return p[scalar_dof];
  const MeshEdge& e = mesh.edges[scalar_dof - n_nodes];
  return 0.5 * (p[e.a] + p[e.b]);
}

std::string vtk_unstructured(const Mesh& mesh) {
  std::ostringstream out;
  out << "# vtk DataFile Version 3.0\n"
      << "triangulation\nASCII\nDATASET UNSTRUCTURED_GRID\n"
      << "POINTS " << mesh.nodes.size() << " double\n";
  for (const auto& n : mesh.nodes)
    out << format_double(n[0]) << ' ' << format_double(n[1]) << " 0\n";
  out << "CELLS " << mesh.triangles.size() << ' ' << mesh.triangles.size() * 4
      << '\n';
  for (const auto& t : mesh.triangles)
    out << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  out << "CELL_TYPES " << mesh.triangles.size() << '\n';
  for (size_t i = 0; i < mesh.triangles.size(); ++i) out << "5\n";
  return out.str();
}

}  // namespace

void export_fields(const State& state, const FeSpace& velocity,
                   const FeSpace& pressure, const FeSpace& head,
                   const std::string& directory) {
  const fs::path dir(directory);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec && !fs::is_directory(dir))
    throw std::runtime_error("cannot create output directory " + dir.string() +
                             ": " + ec.message());

  std::string fluid = "x,y,u1,u2,p\n";
  for (int s = 0; s < velocity.scalar_count; ++s) {
    const Point& xy = velocity.dof_coords[s];
    fluid += format_double(xy[0]) + ',' + format_double(xy[1]) + ',' +
             format_double(state.u[velocity.global_of(s, 0)]) + ',' +
             format_double(state.u[velocity.global_of(s, 1)]) + ',' +
             format_double(pressure_at_scalar_dof(pressure, *velocity.mesh,
                                                  state.p, s)) +
             '\n';
  }
  write_file_atomic((dir / "fluid.csv").string(), fluid);

  std::string porous = "x,y,phi\n";
  for (int s = 0; s < head.scalar_count; ++s) {
    const Point& xy = head.dof_coords[s];
    porous += format_double(xy[0]) + ',' + format_double(xy[1]) + ',' +
              format_double(state.phi[s]) + '\n';
  }
  write_file_atomic((dir / "porous.csv").string(), porous);

  write_file_atomic((dir / "fluid.vtk").string(), vtk_unstructured(*velocity.mesh));
  write_file_atomic((dir / "porous.vtk").string(), vtk_unstructured(*head.mesh));
}

std::map<std::string, std::string> parse_config_text(const std::string& text) {
  std::map<std::string, std::string> out;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  auto trim = [](std::string s) {
    const auto a = s.find_first_not_of(" \t\r");
    const auto b = s.find_last_not_of(" \t\r");
    return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
  };
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": empty key");
    out[key] = value;
  }
  return out;
}

std::map<std::string, std::string> parse_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw std::invalid_argument("cannot read config file " + path + ": " +
                                std::strerror(errno));
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

}  // namespace sd
