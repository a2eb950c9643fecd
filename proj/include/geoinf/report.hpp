#pragma once

// JSON serialization of every result type. Floats are written with 17
// significant digits; non-finite values become null.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <string_view>

#include <json.hpp>

#include "geoinf/asymptotics.hpp"
#include "geoinf/classify.hpp"
#include "geoinf/cones.hpp"
#include "geoinf/metric.hpp"
#include "geoinf/multiplicity.hpp"
#include "geoinf/oracles.hpp"
#include "geoinf/scene.hpp"

namespace geoinf {

using json = nlohmann::ordered_json;

inline constexpr const char* kVersion = "0.1.0";

/// 64-bit FNV-1a, printed as 16 hex digits.
inline std::string fnv1a64(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace detail {

inline void dump_to(const json& j, std::string& out, int indent, int depth) {
  const auto newline = [&](int d) {
    if (indent < 0) return;
    out += '\n';
    out.append(static_cast<std::size_t>(d * indent), ' ');
  };
  switch (j.type()) {
    case json::value_t::number_float: {
      const double v = j.get<double>();
      if (!std::isfinite(v)) {
        out += "null";
        break;
      }
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.17g", v);
      out += buf;
      // Keep floats recognisable as floats.
      if (std::string_view(buf).find_first_of(".eEn") == std::string_view::npos) out += ".0";
      break;
    }
    case json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        break;
      }
      out += '{';
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ',';
        first = false;
        newline(depth + 1);
        out += json(it.key()).dump();
        out += indent < 0 ? ":" : ": ";
        dump_to(it.value(), out, indent, depth + 1);
      }
      newline(depth);
      out += '}';
      break;
    }
    case json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        break;
      }
      // Numeric arrays stay on one line.
      bool flat = true;
      for (const auto& e : j) flat = flat && e.is_number();
      out += '[';
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) out += flat && indent >= 0 ? ", " : ",";
        if (!flat) newline(depth + 1);
        dump_to(j[i], out, indent, depth + 1);
      }
      if (!flat) newline(depth);
      out += ']';
      break;
    }
    default: out += j.dump();
  }
}

}  // namespace detail

inline std::string dump(const json& j, int indent = 2) {
  std::string out;
  detail::dump_to(j, out, indent, 0);
  return out;
}

inline json to_json(const Vec& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

/// Columns of an ambient x d matrix as a list of vectors.
inline json columns_to_json(const Eigen::MatrixXd& B) {
  json a = json::array();
  for (Eigen::Index c = 0; c < B.cols(); ++c) a.push_back(to_json(Vec(B.col(c))));
  return a;
}

inline json to_json(const std::vector<double>& v) { return json(v); }

inline json scene_echo(const Scene& s) {
  json m;
  m["definable"] = s.meta.definable;
  m["minimal"] = s.meta.minimal;
  m["cone_vertex"] = s.meta.cone_vertex ? to_json(*s.meta.cone_vertex) : json(nullptr);
  m["monotone_at"] = s.meta.monotone_at ? to_json(*s.meta.monotone_at) : json(nullptr);
  json j;
  j["name"] = s.name;
  j["ambient"] = s.ambient;
  j["dim"] = s.dim;
  j["meta"] = m;
  j["hash"] = "fnv1a64:" + fnv1a64(s.source);
  return j;
}

inline json to_json(const DensityProfile& p) {
  json j;
  j["center"] = to_json(p.center);
  j["n"] = p.n;
  j["r"] = to_json(p.radii);
  j["theta"] = to_json(p.theta);
  j["err"] = to_json(p.err);
  return j;
}

inline json to_json(const Band& b) { return json{{"lo", b.lo}, {"hi", b.hi}}; }

inline json to_json(const LimitVerdict& v) {
  json j;
  j["kind"] = to_string(v.kind);
  switch (v.kind) {
    case LimitVerdict::Kind::Converges:
      j["value"] = v.value;
      j["err"] = v.err;
      break;
    case LimitVerdict::Kind::Diverges: j["rate"] = v.rate; break;
    case LimitVerdict::Kind::NoLimit:
      j["liminf_band"] = to_json(v.liminf_band);
      j["limsup_band"] = to_json(v.limsup_band);
      break;
    case LimitVerdict::Kind::Inconclusive: j["reason"] = v.reason; break;
  }
  j["fit_residual"] = v.fit_residual;
  j["thresholds"] = json{{"converge_band", v.thresholds.converge_band},
                         {"no_limit_separation", v.thresholds.no_limit_separation},
                         {"diverge_factor", v.thresholds.diverge_factor}};
  j["profile"] = to_json(v.profile);
  return j;
}

inline json to_json(const MonotonicityReport& m) {
  json j;
  j["nondecreasing"] = m.nondecreasing;
  j["max_violation"] = m.max_violation;
  j["constant"] = m.constant;
  j["cone_consistent"] = m.cone_consistent;
  j["violation_factor"] = m.violation_factor;
  j["profile"] = to_json(m.profile);
  return j;
}

inline json to_json(const ConeEstimate& c) {
  json j;
  j["is_linear_subspace"] = c.is_linear_subspace;
  j["two_sided"] = c.two_sided;
  j["fitted_dim"] = c.fitted_dim;
  j["basis"] = columns_to_json(c.basis);
  j["max_residual"] = c.max_residual;
  j["extrapolation_residual"] = c.extrapolation_residual;
  j["tol"] = c.tol;
  j["levels"] = to_json(c.levels);
  j["samples"] = c.samples;
  json d = json::array();
  for (const auto& u : c.directions) d.push_back(to_json(u));
  j["directions"] = d;
  return j;
}

inline json to_json(const PlaneLimitEstimate& p) {
  json j;
  j["is_single_plane"] = p.is_single_plane;
  j["basis"] = columns_to_json(p.basis);
  j["max_pairwise_sine"] = p.max_pairwise;
  j["limit_gap"] = p.limit_gap;
  j["clusters"] = p.clusters.size();
  j["skipped"] = p.skipped;
  j["tol"] = p.tol;
  j["levels"] = to_json(p.levels);
  return j;
}

inline json to_json(const ShellTrial& t) {
  json j;
  j["eta"] = t.eta;
  j["R"] = t.R;
  j["R_used"] = t.R_used;
  j["empty"] = t.empty;
  j["band_radius"] = to_json(t.band_radius);
  j["eps"] = to_json(t.eps);
  j["components"] = t.components;
  j["samples"] = t.samples;
  j["discarded"] = t.discarded;
  return j;
}

inline json to_json(const MultiplicityReport& m) {
  json j;
  j["direction"] = to_json(m.direction);
  j["k"] = m.k;
  j["stable"] = m.stable;
  json t = json::array();
  for (const auto& tr : m.trials) t.push_back(to_json(tr));
  j["trials"] = t;
  return j;
}

inline json to_json(const KRReport& r) {
  json j;
  j["lhs"] = to_json(r.lhs);
  json comps = json::array();
  for (const auto& c : r.components)
    comps.push_back(json{{"id", c.id},
                         {"k", c.k},
                         {"k_samples", c.k_samples},
                         {"stable", c.stable},
                         {"directions", c.directions},
                         {"representative", to_json(c.representative)},
                         {"slice_measure", c.slice_measure},
                         {"slice_err", c.slice_err}});
  j["components"] = comps;
  j["rhs"] = r.rhs;
  j["rhs_err"] = r.rhs_err;
  j["agree"] = r.agree;
  j["partial"] = !r.failure.empty();
  if (!r.failure.empty()) j["failure"] = r.failure;
  return j;
}

inline json to_json(const DegreeReport& d) {
  json j;
  j["declared_degree"] = d.declared_degree;
  j["theta_inf"] = d.theta_inf;
  j["matches_degree"] = d.matches_degree;
  j["verdict"] = to_json(d.verdict);
  return j;
}

inline json to_json(const LNEReport& r) {
  json j;
  j["verdict"] = to_string(r.verdict);
  j["C_bound"] = r.C_bound;
  j["growth"] = to_json(r.growth);
  json lv = json::array();
  for (const auto& l : r.levels)
    lv.push_back(json{{"R", l.R},
                      {"h", l.h},
                      {"vertices", l.vertices},
                      {"pairs", l.pairs},
                      {"connected", l.connected},
                      {"C_hat", l.C_hat},
                      {"witness", json{{"x", to_json(l.witness.x)},
                                       {"y", to_json(l.witness.y)},
                                       {"graph_distance", l.witness.graph_distance},
                                       {"euclidean", l.witness.euclidean}}}});
  j["levels"] = lv;
  if (!r.reason.empty()) j["reason"] = r.reason;
  return j;
}

inline json to_json(const MoserReport& m) {
  json j;
  j["radii"] = to_json(m.radii);
  j["sup_derivative"] = to_json(m.sup_derivative);
  j["bounded_derivative"] = m.bounded_derivative;
  j["normal_single_plane"] = m.normal_single_plane;
  j["monotone"] = m.monotone;
  j["closed"] = m.closed;
  j["implies_affine"] = m.implies_affine;
  return j;
}

inline json to_json(const Classification& c) {
  json j;
  j["scene"] = c.scene;
  j["verdict"] = to_string(c.verdict);
  j["statement"] = c.statement;
  j["failed"] = c.failed;
  j["missing"] = c.missing;
  j["definable_asserted"] = c.definable;
  j["closed"] = json{{"closed", c.closed.closed}, {"reason", c.closed.reason}};
  j["routes"] = json{{"density", to_string(c.density_route)},
                     {"lne", to_string(c.lne_route)},
                     {"multiplicity_proxy", to_string(c.multiplicity_proxy)},
                     {"agree", c.routes_agree}};
  json ev;
  ev["theta_inf"] = to_json(c.theta_inf);
  json mono{{"asserted", c.monotone.asserted}, {"checked", c.monotone.checked}, {"holds", c.monotone.holds}};
  mono["point"] = c.monotone.point.size() ? to_json(c.monotone.point) : json(nullptr);
  if (c.monotone.report) mono["report"] = to_json(*c.monotone.report);
  ev["monotone"] = mono;
  ev["cone"] = c.cone ? to_json(*c.cone) : json(nullptr);
  ev["normal_planes"] = c.normal_planes ? to_json(*c.normal_planes) : json(nullptr);
  ev["lne"] = c.lne ? to_json(*c.lne) : json(nullptr);
  ev["kr"] = c.kr ? to_json(*c.kr) : json(nullptr);
  ev["moser"] = c.moser ? to_json(*c.moser) : json(nullptr);
  j["evidence"] = ev;
  if (c.fit)
    j["fit"] = json{{"offset", to_json(c.fit->offset)},
                    {"basis", columns_to_json(c.fit->basis)},
                    {"max_residual", c.fit->max_residual}};
  return j;
}

inline json to_json(const std::vector<OracleValue>& vals) {
  json a = json::array();
  for (const auto& v : vals) a.push_back(json{{"label", v.label}, {"value", v.value}});
  return a;
}

}  // namespace geoinf
