#pragma once
#include <json.hpp>

#include <string>

#include "fracvirial/grid.hpp"

namespace fracvirial {

// Shortest round-trippable decimal for CSV cells (RFC 4180 rows, CRLF).
std::string csv_num(double v);

// Flat binary field container: header of five little-endian 64-bit values
// (dim, M as int64; L, s, sigma as f64) followed by interleaved re/im f64
// row-major.
void write_field_binary(const std::string& path, const FieldOnGrid& u,
                        double s, double sigma);
FieldOnGrid read_field_binary(const std::string& path, double* s_out = nullptr,
                              double* sigma_out = nullptr);

// CSV export (x..., re, im) for plotting.
std::string field_csv(const FieldOnGrid& u);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

// Every run writes a manifest echoing the resolved config and version.
extern const char* kArtifactVersion;
nlohmann::json make_manifest(const nlohmann::json& resolved_config);

}  // namespace fracvirial
