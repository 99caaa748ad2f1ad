#include "fracvirial/io.hpp"

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace fracvirial {

const char* kArtifactVersion = "fracvirial 0.1.0";

std::string csv_num(double v) {
  char buf[40];
  // %.17g round-trips; trim to the shortest representation that still does
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) return buf;
  }
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {
void put64(std::ofstream& out, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = (v >> (8 * i)) & 0xff;  // little endian
  out.write(reinterpret_cast<char*>(b), 8);
}
std::uint64_t get64(std::ifstream& in) {
  unsigned char b[8];
  in.read(reinterpret_cast<char*>(b), 8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}
std::uint64_t f2u(double d) {
  std::uint64_t v;
  std::memcpy(&v, &d, 8);
  return v;
}
double u2f(std::uint64_t v) {
  double d;
  std::memcpy(&d, &v, 8);
  return d;
}
}  // namespace

void write_field_binary(const std::string& path, const FieldOnGrid& u,
                        double s, double sigma) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw invalid_input("cannot open for writing: " + path);
  put64(out, static_cast<std::uint64_t>(u.grid.dim));
  put64(out, static_cast<std::uint64_t>(u.grid.points_per_dim));
  put64(out, f2u(u.grid.half_length));
  put64(out, f2u(s));
  put64(out, f2u(sigma));
  for (const cplx& z : u.values) {
    put64(out, f2u(z.real()));
    put64(out, f2u(z.imag()));
  }
}

FieldOnGrid read_field_binary(const std::string& path, double* s_out,
                              double* sigma_out) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw invalid_input("cannot open for reading: " + path);
  int dim = static_cast<int>(get64(in));
  int M = static_cast<int>(get64(in));
  double L = u2f(get64(in));
  double s = u2f(get64(in));
  double sigma = u2f(get64(in));
  if (s_out) *s_out = s;
  if (sigma_out) *sigma_out = sigma;
  Grid g(dim, L, M);
  FieldOnGrid u(g);
  for (cplx& z : u.values) {
    double re = u2f(get64(in));
    double im = u2f(get64(in));
    z = cplx(re, im);
  }
  if (!in) throw invalid_input("truncated field file: " + path);
  return u;
}

std::string field_csv(const FieldOnGrid& u) {
  std::ostringstream out;
  const Grid& g = u.grid;
  const int M = g.points_per_dim;
  if (g.dim == 1) {
    out << "x,re,im\r\n";
    for (int i = 0; i < M; ++i)
      out << csv_num(g.coord(i)) << ',' << csv_num(u.values[i].real()) << ','
          << csv_num(u.values[i].imag()) << "\r\n";
  } else {
    out << "x,y,re,im\r\n";
    for (int i = 0; i < M; ++i)
      for (int j = 0; j < M; ++j) {
        const cplx& z = u.values[static_cast<std::size_t>(i) * M + j];
        out << csv_num(g.coord(i)) << ',' << csv_num(g.coord(j)) << ','
            << csv_num(z.real()) << ',' << csv_num(z.imag()) << "\r\n";
      }
  }
  return out.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw invalid_input("cannot open for writing: " + path);
  out << content;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw invalid_input("cannot open for reading: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

nlohmann::json make_manifest(const nlohmann::json& resolved_config) {
  nlohmann::json m;
  m["artifact"] = kArtifactVersion;
  m["config"] = resolved_config;
  return m;
}

}  // namespace fracvirial
