#pragma once

// JSON file formats.
//
// POVM file:
//   {"d": 2, "elements": [[[re, im], [re, im]], ...]}
// m rows of d [re, im] pairs; field order irrelevant.
//
// Extension file:
//   {"d": 2, "e": 2, "m": 3, "rows": [[[re, im], ...], ...],
//    "a0": [[re, im], ...]}            // optional, defaults to |a_0⟩ = e_0
// de rows of de pairs in the ancilla-major layout.

#include "naimark_lab/naimark.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <sstream>

namespace naimark_lab::io {

using nlohmann::json;

/// Unreadable file or malformed content.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline json complex_to_json(Complex z) { return json::array({z.real(), z.imag()}); }

inline Complex complex_from_json(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw ParseError(where + ": expected [re, im] pair");
  }
  const Complex z(j[0].get<double>(), j[1].get<double>());
  if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) throw ParseError(where + ": non-finite value");
  return z;
}

inline json vector_to_json(const ComplexVector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(complex_to_json(v(i)));
  return out;
}

inline ComplexVector vector_from_json(const json& j, Eigen::Index expected, const std::string& where) {
  if (!j.is_array()) throw ParseError(where + ": expected an array of pairs");
  if (static_cast<Eigen::Index>(j.size()) != expected) {
    throw ParseError(where + ": expected " + std::to_string(expected) + " entries, got " +
                     std::to_string(j.size()));
  }
  ComplexVector v(expected);
  for (Eigen::Index i = 0; i < expected; ++i) {
    v(i) = complex_from_json(j[static_cast<size_t>(i)], where + "[" + std::to_string(i) + "]");
  }
  return v;
}

inline int positive_int_field(const json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_number_integer() || j[key].get<long long>() < 1) {
    throw ParseError(std::string("missing or invalid positive integer field \"") + key + "\"");
  }
  return j[key].get<int>();
}

inline json povm_to_json(const Povm& p) {
  json elements = json::array();
  for (int mu = 0; mu < p.size(); ++mu) elements.push_back(vector_to_json(p.element(mu)));
  return json{{"d", p.dim()}, {"elements", elements}};
}

inline Povm povm_from_json(const json& j) {
  if (!j.is_object()) throw ParseError("POVM file: top level must be an object");
  const int d = positive_int_field(j, "d");
  if (!j.contains("elements") || !j["elements"].is_array() || j["elements"].empty()) {
    throw ParseError("POVM file: \"elements\" must be a non-empty array");
  }
  std::vector<ComplexVector> elements;
  for (size_t mu = 0; mu < j["elements"].size(); ++mu) {
    elements.push_back(vector_from_json(j["elements"][mu], d, "elements[" + std::to_string(mu) + "]"));
  }
  return Povm(d, elements);
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& ex) {
    throw ParseError(path + ": " + ex.what());
  }
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write " + path);
  out << text;
  if (!out) throw ParseError("write failed: " + path);
}

inline Povm read_povm(const std::string& path) { return povm_from_json(read_json_file(path)); }

inline void write_povm(const std::string& path, const Povm& p) {
  write_text_file(path, povm_to_json(p).dump(2) + "\n");
}

inline json extension_to_json(const NaimarkExtension& n) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < n.basis().rows(); ++r) rows.push_back(vector_to_json(n.basis().row(r).transpose()));
  return json{{"d", n.d()}, {"e", n.e()}, {"m", n.m()}, {"rows", rows}};
}

/// Reads an extension; an "a0" field is rotated onto ancilla basis state 0.
inline NaimarkExtension extension_from_json(const json& j) {
  if (!j.is_object()) throw ParseError("extension file: top level must be an object");
  const int d = positive_int_field(j, "d");
  const int e = positive_int_field(j, "e");
  const int m = positive_int_field(j, "m");
  const Eigen::Index de = static_cast<Eigen::Index>(d) * e;
  if (!j.contains("rows") || !j["rows"].is_array() || static_cast<Eigen::Index>(j["rows"].size()) != de) {
    throw ParseError("extension file: \"rows\" must hold d*e rows");
  }
  if (m > de) throw ParseError("extension file: m exceeds d*e");
  ComplexMatrix basis(de, de);
  for (Eigen::Index r = 0; r < de; ++r) {
    basis.row(r) = vector_from_json(j["rows"][static_cast<size_t>(r)], de, "rows[" + std::to_string(r) + "]").transpose();
  }
  if (!j.contains("a0")) return NaimarkExtension(d, e, m, basis);
  const ComplexVector a0 = vector_from_json(j["a0"], e, "a0");
  if (!(std::abs(a0.squaredNorm() - 1.0) <= 1e-10)) throw ParseError("extension file: a0 not normalized");
  return extension_from_external(basis, d, e, m, a0);
}

}  // namespace naimark_lab::io
