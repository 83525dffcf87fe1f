#ifndef NONCLASS_IO_HPP
#define NONCLASS_IO_HPP

// JSON encodings of polynomials, states, moment tables, observables,
// certificates and detection results. Readers validate shapes and throw
// nonclass::Error with the offending field.

#include <json.hpp>

#include <fstream>
#include <sstream>
#include <string>

#include "nonclass/certify.hpp"
#include "nonclass/detect.hpp"
#include "nonclass/polyalg.hpp"
#include "nonclass/quantum.hpp"
#include "nonclass/spinmap.hpp"

namespace nonclass::io {

using json = nlohmann::json;

namespace detail {

inline const json& field(const json& j, const char* key, const std::string& what) {
  if (!j.is_object() || !j.contains(key)) throw Error(what + ": missing field '" + key + "'");
  return j.at(key);
}

inline double number(const json& j, const std::string& what) {
  if (!j.is_number()) throw Error(what + ": expected a number");
  return j.get<double>();
}

inline int integer(const json& j, const std::string& what) {
  if (!j.is_number_integer()) throw Error(what + ": expected an integer");
  return j.get<int>();
}

inline std::string text(const json& j, const std::string& what) {
  if (!j.is_string()) throw Error(what + ": expected a string");
  return j.get<std::string>();
}

inline json rows(const Eigen::MatrixXd& m) {
  json out = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    out.push_back(std::move(row));
  }
  return out;
}

inline Eigen::MatrixXd read_rows(const json& j, const std::string& what) {
  if (!j.is_array() || j.empty()) throw Error(what + ": expected a nonempty matrix");
  const auto n = static_cast<Eigen::Index>(j.size());
  if (!j[0].is_array()) throw Error(what + ": expected rows");
  const auto cols = static_cast<Eigen::Index>(j[0].size());
  Eigen::MatrixXd m(n, cols);
  for (Eigen::Index r = 0; r < n; ++r) {
    if (!j[r].is_array() || static_cast<Eigen::Index>(j[r].size()) != cols) throw Error(what + ": ragged matrix");
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = number(j[r][c], what);
  }
  return m;
}

inline json complex_matrix(const CMatrix& m) { return {{"re", rows(m.real())}, {"im", rows(m.imag())}}; }

inline CMatrix read_complex_matrix(const json& j, const std::string& what) {
  const Eigen::MatrixXd re = read_rows(field(j, "re", what), what);
  Eigen::MatrixXd im = Eigen::MatrixXd::Zero(re.rows(), re.cols());
  if (j.contains("im")) im = read_rows(j.at("im"), what);
  if (im.rows() != re.rows() || im.cols() != re.cols()) throw Error(what + ": re/im shapes differ");
  CMatrix out(re.rows(), re.cols());
  out.real() = re;
  out.imag() = im;
  return out;
}

inline json exponent_terms(const std::map<Exponent, cplx, GradedLex>& terms) {
  json out = json::array();
  for (const auto& [e, v] : terms)
    if (e.first >= e.second) out.push_back({{"k", e.first}, {"l", e.second}, {"re", v.real()}, {"im", v.imag()}});
  return out;
}

}  // namespace detail

inline json parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error("'" + path + "' is not valid JSON: " + e.what());
  }
}

inline void write_file(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path + "'");
  out << j.dump(2) << '\n';
}

// ---------------------------------------------------------------------------
// Polynomials

inline json to_json(const HermBivarPoly& p) {
  return {{"kind", "hermitian-polynomial"},
          {"support", to_string(p.mode())},
          {"degree", p.degree_bound()},
          {"terms", detail::exponent_terms(p.terms())}};
}

/// Real polynomial in (x, y): {"kind": "real-polynomial", "terms": [{"i", "j", "c"}]}.
inline json to_json(const RealBivarPoly& f) {
  json terms = json::array();
  for (const auto& [e, v] : f.terms())
    if (v != 0.0) terms.push_back({{"i", e.first}, {"j", e.second}, {"c", v}});
  return {{"kind", "real-polynomial"}, {"terms", terms}};
}

inline RealBivarPoly real_polynomial_from_json(const json& j) {
  const std::string what = "real polynomial";
  const json& terms = detail::field(j, "terms", what);
  if (!terms.is_array()) throw Error(what + ": terms must be an array");
  RealBivarPoly f;
  for (const auto& t : terms) {
    const int i = detail::integer(detail::field(t, "i", what), what + ".i");
    const int k = detail::integer(detail::field(t, "j", what), what + ".j");
    if (i < 0 || k < 0) throw Error(what + ": negative exponent");
    f.add(i, k, detail::number(detail::field(t, "c", what), what + ".c"));
  }
  return f;
}

inline HermBivarPoly polynomial_from_json(const json& j) {
  const std::string what = "polynomial";
  const std::string support = detail::text(detail::field(j, "support", what), what + ".support");
  SupportMode mode;
  if (support == "total") mode = SupportMode::total;
  else if (support == "box") mode = SupportMode::box;
  else throw Error(what + ": support must be 'total' or 'box'");
  const int degree = detail::integer(detail::field(j, "degree", what), what + ".degree");
  if (degree < 0) throw Error(what + ": negative degree");
  HermBivarPoly p(degree, mode);
  const json& terms = detail::field(j, "terms", what);
  if (!terms.is_array()) throw Error(what + ": terms must be an array");
  for (const auto& t : terms) {
    const int k = detail::integer(detail::field(t, "k", what), what + ".k");
    const int l = detail::integer(detail::field(t, "l", what), what + ".l");
    const double re = detail::number(detail::field(t, "re", what), what + ".re");
    const double im = t.contains("im") ? detail::number(t.at("im"), what + ".im") : 0.0;
    if (k < 0 || l < 0) throw Error(what + ": negative exponent");
    if (!p.admits(k, l)) throw Error(what + ": term (" + std::to_string(k) + "," + std::to_string(l) + ") outside support");
    if (k == l && im != 0.0) throw Error(what + ": diagonal coefficient must be real");
    // the writer emits k >= l; accept either triangle and mirror
    p.set(k, l, cplx(re, im));
  }
  return p;
}

inline bool is_real_polynomial(const json& j) {
  return j.is_object() && j.contains("kind") && j.at("kind") == "real-polynomial";
}

/// Either polynomial schema, read as a real polynomial in (x, y) = (Re a, Im a).
inline RealBivarPoly any_polynomial_as_real(const json& j) {
  return is_real_polynomial(j) ? real_polynomial_from_json(j) : ladder_to_real(polynomial_from_json(j));
}

/// Either polynomial schema, read as a Hermitian polynomial in (conj a, a).
inline HermBivarPoly any_polynomial_as_hermitian(const json& j) {
  return is_real_polynomial(j) ? hermitian_from_real(real_polynomial_from_json(j)) : polynomial_from_json(j);
}

// ---------------------------------------------------------------------------
// States, observables and moments

inline json to_json(const FockState& s) {
  json j = detail::complex_matrix(s.rho());
  j["kind"] = "fock";
  j["dim_param"] = s.n_max();
  return j;
}

inline json to_json(const DickeState& s) {
  json j = detail::complex_matrix(s.rho());
  j["kind"] = "dicke";
  j["dim_param"] = s.m();
  return j;
}

inline json to_json(const SpinObservable& v) {
  json j = detail::complex_matrix(v.matrix());
  j["kind"] = "dicke-observable";
  j["dim_param"] = v.m();
  return j;
}

inline std::string kind_of(const json& j) {
  return detail::text(detail::field(j, "kind", "document"), "document.kind");
}

namespace detail {

inline CMatrix read_square(const json& j, const std::string& what) {
  const int dim_param = integer(field(j, "dim_param", what), what + ".dim_param");
  CMatrix m = read_complex_matrix(j, what);
  if (m.rows() != m.cols() || m.rows() != dim_param + 1)
    throw Error(what + ": matrix must be " + std::to_string(dim_param + 1) + "x" + std::to_string(dim_param + 1));
  return m;
}

}  // namespace detail

inline FockState fock_state_from_json(const json& j) {
  if (kind_of(j) != "fock") throw Error("state: expected kind 'fock'");
  return FockState(detail::read_square(j, "fock state"));
}

inline DickeState dicke_state_from_json(const json& j) {
  if (kind_of(j) != "dicke") throw Error("state: expected kind 'dicke'");
  return DickeState(detail::read_square(j, "dicke state"));
}

inline SpinObservable spin_observable_from_json(const json& j) {
  if (kind_of(j) != "dicke-observable") throw Error("observable: expected kind 'dicke-observable'");
  return SpinObservable(detail::read_square(j, "dicke observable"));
}

inline json to_json(const MomentTable& t) {
  return {{"kind", "moments"}, {"D", t.degree()}, {"entries", detail::exponent_terms(t.entries())}};
}

inline MomentTable moment_table_from_json(const json& j) {
  const std::string what = "moment table";
  const int d = detail::integer(detail::field(j, "D", what), what + ".D");
  if (d < 0) throw Error(what + ": negative degree");
  MomentTable t(d);
  const json& entries = detail::field(j, "entries", what);
  if (!entries.is_array()) throw Error(what + ": entries must be an array");
  for (const auto& e : entries) {
    const int k = detail::integer(detail::field(e, "k", what), what + ".k");
    const int l = detail::integer(detail::field(e, "l", what), what + ".l");
    const double re = detail::number(detail::field(e, "re", what), what + ".re");
    const double im = e.contains("im") ? detail::number(e.at("im"), what + ".im") : 0.0;
    if (!t.has(k, l)) throw Error(what + ": entry (" + std::to_string(k) + "," + std::to_string(l) + ") outside degree");
    if (k == 0 && l == 0 && (re != 1.0 || im != 0.0)) throw Error(what + ": <1> must equal 1");
    t.set(k, l, cplx(re, im));
  }
  return t;
}

// ---------------------------------------------------------------------------
// Certificates and results

inline json to_json(const Certificate& c) {
  json mats = json::array();
  for (const auto& m : c.matrices) mats.push_back(detail::complex_matrix(m));
  json j = {{"kind", to_string(c.kind)}, {"level", c.level}, {"matrices", mats}};
  if (!c.block_index.empty()) j["block_index"] = c.block_index;
  if (!c.block_scale.empty()) j["block_scale"] = c.block_scale;
  if (!c.angles.empty()) j["angles"] = c.angles;
  return j;
}

inline Certificate certificate_from_json(const json& j) {
  const std::string what = "certificate";
  Certificate c;
  c.kind = certificate_kind_from_string(detail::text(detail::field(j, "kind", what), what + ".kind"));
  c.level = detail::integer(detail::field(j, "level", what), what + ".level");
  const json& mats = detail::field(j, "matrices", what);
  if (!mats.is_array() || mats.empty()) throw Error(what + ": matrices must be a nonempty array");
  for (const auto& m : mats) {
    CMatrix x = detail::read_complex_matrix(m, what + ".matrices");
    if (x.rows() != x.cols()) throw Error(what + ": blocks must be square");
    c.matrices.push_back(std::move(x));
  }
  if (j.contains("block_index"))
    for (const auto& v : j.at("block_index")) c.block_index.push_back(detail::integer(v, what + ".block_index"));
  if (j.contains("block_scale"))
    for (const auto& v : j.at("block_scale")) c.block_scale.push_back(detail::number(v, what + ".block_scale"));
  if (j.contains("angles"))
    for (const auto& v : j.at("angles")) c.angles.push_back(detail::number(v, what + ".angles"));
  return c;
}

inline json to_json(const DetectionResult& r) {
  json j = {{"value", r.optimal() ? json(r.value) : json(nullptr)},
            {"level", r.level},
            {"method", r.method},
            {"normalization", r.normalization},
            {"status", sdp::to_string(r.status)},
            {"detected", r.detected()},
            {"message", r.message}};
  if (r.optimal()) j["witness"] = to_json(r.witness);
  if (r.spin_witness) {
    json v = detail::complex_matrix(*r.spin_witness);
    v["kind"] = "dicke-observable";
    v["dim_param"] = static_cast<int>(r.spin_witness->rows()) - 1;
    j["spin_witness"] = v;
  }
  if (r.certificate) j["certificate"] = to_json(*r.certificate);
  return j;
}

}  // namespace nonclass::io

#endif  // NONCLASS_IO_HPP
