#pragma once

#include <map>
#include <string>

#include "sd/benchmarks.hpp"

namespace sd {

/// Writes the final fields of a run for external visualization:
///   fluid.csv   x,y,u1,u2,p        (one row per P2 node of the fluid mesh)
///   porous.csv  x,y,phi            (one row per P2 node of the porous mesh)
///   fluid.vtk / porous.vtk         legacy ASCII unstructured-grid files
/// Files are written atomically (temp file + rename). Throws on I/O errors
/// with the OS message included.
void export_fields(const State& state, const FeSpace& velocity,
                   const FeSpace& pressure, const FeSpace& head,
                   const std::string& directory);

/// Atomic text-file write used by all emitters.
void write_file_atomic(const std::string& path, const std::string& content);

/// Flat `key = value` configuration file; '#' starts a comment. Unknown keys
/// are kept (callers validate). Malformed lines raise std::invalid_argument
/// naming the line number.
std::map<std::string, std::string> parse_config_file(const std::string& path);
std::map<std::string, std::string> parse_config_text(const std::string& text);

std::string format_double(double v);  // shortest round-trip-ish fixed format

}  // namespace sd
