#include "ewire/serialize.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>

namespace ewire {

double round12(double x) {
  if (!std::isfinite(x)) return x;
  if (std::abs(x) < 1e-12) return 0.0;  // float noise
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  const double r = std::strtod(buf, nullptr);
  return r == 0.0 ? 0.0 : r;  // no negative zero
}

std::string format_number(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", round12(x));
  return buf;
}

Json span_to_json(const Span& s) { return Json{{"line", s.line}, {"col", s.col}}; }

Json superop_to_json(const SuperOp& f, double tol) {
  Json m = Json::array();
  for (Eigen::Index r = 0; r < f.matrix.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < f.matrix.cols(); ++c)
      row.push_back(Json::array({round12(f.matrix(r, c).real()), round12(f.matrix(r, c).imag())}));
    m.push_back(std::move(row));
  }
  Json j;
  j["source_blocks"] = f.source.blocks();
  j["target_blocks"] = f.target.blocks();
  j["rows"] = f.matrix.rows();
  j["cols"] = f.matrix.cols();
  j["matrix"] = std::move(m);
  j["cp"] = is_cp(f, tol);
  j["unital"] = is_unital(f, tol);
  j["subunital"] = is_subunital(f, tol);
  return j;
}

Json distribution_to_json(const Distribution& d,
                          const std::vector<std::pair<std::string, std::int64_t>>* counts) {
  Json out;
  Json o = Json::object();
  for (const auto& [v, w] : d.outcomes) o[format_value(v)] = round12(w);
  out["outcomes"] = std::move(o);
  out["diverge_mass"] = round12(d.diverge_mass());
  if (counts) {
    Json c = Json::object();
    for (const auto& [k, n] : *counts) c[k] = n;
    out["counts"] = std::move(c);
  }
  return out;
}

Json trace_entry_to_json(const TraceEntry& e) {
  return Json{{"step", e.step}, {"rule", to_string(e.rule)}, {"span", span_to_json(e.span)}};
}

std::string error_kind(const std::exception& e) {
  if (auto* t = dynamic_cast<const TypeError*>(&e)) return to_string(t->kind);
  if (dynamic_cast<const ParseError*>(&e)) return "ParseError";
  if (dynamic_cast<const ResourceError*>(&e)) return "ResourceError";
  if (dynamic_cast<const EvalError*>(&e)) return "EvalError";
  return "Error";
}

Json error_to_json(const std::exception& e) {
  Json j;
  j["kind"] = error_kind(e);
  if (auto* t = dynamic_cast<const TypeError*>(&e)) {
    j["span"] = span_to_json(t->span);
    j["message"] = t->message;
  } else if (auto* p = dynamic_cast<const ParseError*>(&e)) {
    j["span"] = span_to_json(p->span);
    j["message"] = p->message;
    if (!p->expected.empty()) j["expected"] = p->expected;
  } else {
    j["span"] = nullptr;
    j["message"] = e.what();
  }
  return j;
}

}  // namespace ewire
