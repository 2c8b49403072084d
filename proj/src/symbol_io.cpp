#include "superopt/symbol_io.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "superopt/error.hpp"

namespace superopt {

namespace {

using nlohmann::json;

// Shape of a JSON matrix (list of equal-length rows of numbers), or {-1,-1}.
std::pair<int, int> matrix_shape(const json& m) {
  if (!m.is_array()) return {-1, -1};
  const int r = static_cast<int>(m.size());
  int c = -1;
  for (const auto& row : m) {
    if (!row.is_array()) return {-1, -1};
    const int len = static_cast<int>(row.size());
    if (c >= 0 && len != c) return {-1, -1};
    c = len;
    for (const auto& x : row) {
      if (!x.is_number()) return {-1, -1};
    }
  }
  return {r, c < 0 ? 0 : c};
}

std::string shape_text(int r, int c) {
  std::ostringstream os;
  os << r << "x" << c;
  return os.str();
}

}  // namespace

std::vector<Violation> validate_symbol_json(const json& doc) {
  std::vector<Violation> out;
  if (!doc.is_object()) {
    out.push_back({"", "document must be an object"});
    return out;
  }
  BlockPartition p{0, 0, 0, 0};
  bool have_partition = false;
  if (!doc.contains("partition") || !doc["partition"].is_object()) {
    out.push_back({"partition", "missing partition object"});
  } else {
    const auto& jp = doc["partition"];
    bool ok = true;
    int* fields[] = {&p.m1, &p.m2, &p.n1, &p.n2};
    const char* names[] = {"m1", "m2", "n1", "n2"};
    for (int i = 0; i < 4; ++i) {
      if (!jp.contains(names[i]) || !jp[names[i]].is_number_integer()) {
        out.push_back({std::string("partition.") + names[i], "missing integer"});
        ok = false;
        continue;
      }
      *fields[i] = jp[names[i]].get<int>();
      if (*fields[i] < 0) {
        out.push_back({std::string("partition.") + names[i], "negative block size"});
        ok = false;
      }
    }
    if (ok) {
      if (p.m1 == 0 || p.n1 == 0) {
        out.push_back({"partition", "empty corrected block"});
      }
      have_partition = true;
    }
  }
  if (!doc.contains("coeffs") || !doc["coeffs"].is_array()) {
    out.push_back({"coeffs", "missing coeffs array"});
    return out;
  }
  std::set<int> seen;
  int idx = 0;
  for (const auto& c : doc["coeffs"]) {
    const std::string base = "coeffs[" + std::to_string(idx++) + "]";
    if (!c.is_object() || !c.contains("k") || !c["k"].is_number_integer()) {
      out.push_back({base + ".k", "missing integer frequency"});
      continue;
    }
    const int k = c["k"].get<int>();
    if (!seen.insert(k).second) out.push_back({base + ".k", "duplicate k=" + std::to_string(k)});
    for (const char* part : {"re", "im"}) {
      if (!c.contains(part)) {
        if (std::string(part) == "re") out.push_back({base + ".re", "missing real part"});
        continue;
      }
      const auto [r, cc] = matrix_shape(c[part]);
      if (r < 0) {
        out.push_back({base + "." + part, "not a rectangular numeric matrix"});
      } else if (have_partition && (r != p.rows() || cc != p.cols())) {
        out.push_back({base + "." + part, "k=" + std::to_string(k) + ": expected shape " +
                                              shape_text(p.rows(), p.cols()) + ", got " +
                                              shape_text(r, cc)});
      }
    }
  }
  return out;
}

MatrixSymbol symbol_from_json(const json& doc) {
  const auto violations = validate_symbol_json(doc);
  if (!violations.empty()) {
    throw Error("parse", violations.front().path + ": " + violations.front().message);
  }
  const auto& jp = doc["partition"];
  BlockPartition p{jp["m1"].get<int>(), jp["m2"].get<int>(), jp["n1"].get<int>(),
                   jp["n2"].get<int>()};
  std::map<int, CMatrix> coeffs;
  for (const auto& c : doc["coeffs"]) {
    CMatrix m = CMatrix::Zero(p.rows(), p.cols());
    for (int i = 0; i < p.rows(); ++i) {
      for (int j = 0; j < p.cols(); ++j) {
        const double re = c["re"][i][j].get<double>();
        const double im = c.contains("im") ? c["im"][i][j].get<double>() : 0.0;
        m(i, j) = {re, im};
      }
    }
    coeffs[c["k"].get<int>()] = std::move(m);
  }
  return MatrixSymbol(p, std::move(coeffs));
}

json symbol_to_json(const MatrixSymbol& sym) {
  const auto& p = sym.partition();
  json doc;
  doc["partition"] = {{"m1", p.m1}, {"m2", p.m2}, {"n1", p.n1}, {"n2", p.n2}};
  doc["coeffs"] = json::array();
  for (const auto& [k, c] : sym.coeffs()) {
    json re = json::array();
    json im = json::array();
    for (int i = 0; i < c.rows(); ++i) {
      json rr = json::array();
      json ii = json::array();
      for (int j = 0; j < c.cols(); ++j) {
        rr.push_back(c(i, j).real());
        ii.push_back(c(i, j).imag());
      }
      re.push_back(std::move(rr));
      im.push_back(std::move(ii));
    }
    doc["coeffs"].push_back({{"k", k}, {"re", std::move(re)}, {"im", std::move(im)}});
  }
  return doc;
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("parse", "cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error("parse", path + ": " + e.what());
  }
}

}  // namespace superopt
