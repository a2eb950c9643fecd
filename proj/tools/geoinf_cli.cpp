#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "geoinf/builtins.hpp"
#include "geoinf/report.hpp"

namespace {

using namespace geoinf;

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitInconclusive = 2;
constexpr int kExitUsage = 64;

struct Loaded {
  Scene scene;
  std::string origin;  // file path or builtin name
};

Loaded load_scene(const std::string& arg) {
  std::string text, origin = arg;
  if (std::filesystem::is_regular_file(arg)) {
    std::ifstream in(arg, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    text = ss.str();
  } else {
    text = builtin_text(arg);
    origin = "builtin:" + arg;
  }
  try {
    return {parse_scene(text), origin};
  } catch (const ParseError& e) {
    const auto [line, col] = line_col(text, e.offset());
    throw Error(origin + ":" + std::to_string(line) + ":" + std::to_string(col) + ": " + e.what());
  }
}

Vec parse_point(const std::string& s, int ambient, const char* what) {
  std::string body;
  for (char c : s)
    if (c != '(' && c != ')' && c != ' ') body += c;
  std::vector<double> xs;
  std::stringstream ss(body);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size()) throw CLI::ValidationError(what, "'" + s + "' is not a point");
    xs.push_back(v);
  }
  if (static_cast<int>(xs.size()) != ambient)
    throw DimensionMismatchError(std::string(what) + " has " + std::to_string(xs.size()) + " coordinates, scene ambient " +
                                 std::to_string(ambient));
  Vec p(ambient);
  for (int i = 0; i < ambient; ++i) p[i] = xs[i];
  return p;
}

void write_csv(const std::string& path, const DensityProfile& pr) {
  if (path.empty()) return;
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  write_profile_csv(pr, out);
}

int verdict_exit(const LimitVerdict& v) {
  return v.kind == LimitVerdict::Kind::Converges ? kExitOk : kExitInconclusive;
}

struct Output {
  json parameters;
  std::optional<json> scene;
  json results;
  int code = kExitOk;
};

struct Common {
  std::uint64_t seed = 1;
  unsigned threads = 0;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Densities, tangent cones, multiplicities and metric regularity of unbounded sets"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  app.fallthrough();

  Common common;
  app.add_option("--seed", common.seed, "Seed for every stochastic step");
  app.add_option("--threads", common.threads, "Worker cap (0: available parallelism)");

  // Each subcommand owns its variables: CLI11 writes defaults eagerly.
  struct Args {
    std::string scene, csv, point, dir;
    double tol = 0, rmin = 0, rmax = 0, eta = 0.2, R = 10;
    bool at_infinity = false, normals = false;
    int k = 24, degree = 0;
    std::vector<double> levels{4, 8, 16};
    std::size_t max_vertices = 100000;
  };
  std::map<std::string, Args> args;
  std::string oracle_name;

  auto sub = [&](const char* name, const char* help) {
    CLI::App* c = app.add_subcommand(name, help);
    c->add_option("scene", args[name].scene, "Built-in name or path to a .scene file")->required();
    return std::pair<CLI::App*, Args*>(c, &args[name]);
  };

  {
    auto [c, a] = sub("density", "Density at infinity or at a point");
    auto* at_point = c->add_option("--at-point", a->point, "Point of the set, e.g. 1,0,0");
    auto* at_inf = c->add_flag("--at-infinity", a->at_infinity, "Density at infinity (default)");
    at_point->excludes(at_inf);
    c->add_option("--tol", a->tol, "Relative measure tolerance")->default_val(1e-3);
    c->add_option("--rmin", a->rmin, "Smallest radius of the grid");
    c->add_option("--rmax", a->rmax, "Largest radius of the grid");
    c->add_option("--k", a->k, "Grid points")->default_val(24);
    c->add_option("--csv", a->csv, "Write the profile as CSV");
  }
  {
    auto [c, a] = sub("profile", "Density ratio over a log-spaced radius grid");
    c->add_option("--center", a->point, "Ball center (default: origin)");
    c->add_option("--rmin", a->rmin, "Smallest radius")->default_val(1.0);
    c->add_option("--rmax", a->rmax, "Largest radius")->default_val(100.0);
    c->add_option("--k", a->k, "Grid points")->default_val(24);
    c->add_option("--tol", a->tol, "Relative measure tolerance")->default_val(1e-3);
    c->add_option("--csv", a->csv, "Write the profile as CSV");
  }
  {
    auto [c, a] = sub("cone", "Tangent cone at infinity or at a point");
    c->add_option("--at-point", a->point, "Point of the set");
    c->add_option("--tol", a->tol, "Direction and subspace tolerance")->default_val(1e-2);
    c->add_flag("--normals", a->normals, "Also estimate the limit tangent planes");
  }
  {
    auto [c, a] = sub("mult", "Relative multiplicity along a cone direction");
    c->add_option("--dir", a->dir, "Unit direction")->required();
    c->add_option("--eta", a->eta, "Shell half-width")->default_val(0.2);
    c->add_option("--R", a->R, "Inner shell radius (at a point: outer radius)")->default_val(10.0);
    c->add_option("--at-point", a->point, "Multiplicity at a point instead of at infinity");
  }
  {
    auto [c, a] = sub("kr-check", "Compare the density with the multiplicity-weighted cone density");
    c->add_option("--tol", a->tol, "Relative measure tolerance")->default_val(1e-3);
    c->add_option("--eta", a->eta, "Shell half-width")->default_val(0.2);
    c->add_option("--R", a->R, "Inner shell radius")->default_val(10.0);
  }
  {
    auto [c, a] = sub("degree", "Density at infinity of a complex graph against its degree");
    c->add_option("--degree", a->degree, "Declared degree")->required()->check(CLI::PositiveNumber);
    c->add_option("--tol", a->tol, "Relative measure tolerance")->default_val(1e-3);
  }
  {
    auto [c, a] = sub("lne", "Lipschitz normal embedding at infinity");
    c->add_option("--levels", a->levels, "Radius levels (at least three, increasing)")->default_str("4 8 16");
    c->add_option("--max-vertices", a->max_vertices, "Vertex budget per level")->default_val(100000);
  }
  {
    auto [c, a] = sub("classify", "Bernstein-type classification");
    c->add_option("--tol", a->tol, "Density tolerance")->default_val(1e-2);
  }
  {
    auto [c, a] = sub("moser", "Bounded-slope graph check");
    c->add_option("--tol", a->tol, "Slope stability tolerance")->default_val(1e-2);
  }
  auto* orc = app.add_subcommand("oracle", "Closed-form reference values");
  orc->add_option("name", oracle_name, "Oracle family")->required()->check(CLI::IsMember(oracle_names()));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  const auto t0 = std::chrono::steady_clock::now();
  Output out;
  std::string command;
  try {
    command = app.get_subcommands().front()->get_name();
    out.parameters["seed"] = common.seed;
    out.parameters["threads"] = common.threads;
    if (command == "oracle") {
      out.parameters["name"] = oracle_name;
      out.results["oracle"] = to_json(run_oracle(oracle_name));
    } else {
      const Args& a = args.at(command);
      const std::string &point_arg = a.point, &csv_path = a.csv, &dir_arg = a.dir;
      const double tol = a.tol, rmin = a.rmin, rmax = a.rmax, eta = a.eta, R = a.R;
      const int k = a.k, degree = a.degree;
      const std::vector<double>& levels = a.levels;
      const std::size_t max_vertices = a.max_vertices;
      const bool with_normals = a.normals;
      const Loaded L = load_scene(a.scene);
      const Scene& s = L.scene;
      out.scene = scene_echo(s);
      (*out.scene)["origin"] = L.origin;

      if (command == "density") {
        LimitOptions lo;
        lo.profile.seed = common.seed;
        lo.profile.threads = common.threads;
        lo.k = k;
        LimitVerdict v;
        out.parameters["tol"] = tol;
        out.parameters["k"] = k;
        out.parameters["max_cells"] = lo.profile.max_cells;
        if (!point_arg.empty()) {
          const Vec p = parse_point(point_arg, s.ambient, "--at-point");
          out.parameters["at"] = to_json(p);
          v = density_at_point(s, p, tol, lo);
        } else {
          if (rmin > 0) lo.r_lo = rmin;
          if (rmax > 0) lo.r_hi = rmax;
          out.parameters["at"] = "infinity";
          out.parameters["rmin"] = lo.r_lo;
          out.parameters["rmax"] = lo.r_hi;
          v = density_at_infinity(s, tol, lo);
        }
        out.results["verdict"] = to_json(v);
        write_csv(csv_path, v.profile);
        out.code = verdict_exit(v);
      } else if (command == "profile") {
        const Vec c = point_arg.empty() ? Vec(Vec::Zero(s.ambient)) : parse_point(point_arg, s.ambient, "--center");
        ProfileOptions po;
        po.seed = common.seed;
        po.threads = common.threads;
        out.parameters["center"] = to_json(c);
        out.parameters["rmin"] = rmin;
        out.parameters["rmax"] = rmax;
        out.parameters["k"] = k;
        out.parameters["tol"] = tol;
        out.parameters["max_cells"] = po.max_cells;
        const DensityProfile pr = profile(s, c, rmin, rmax, k, tol, po);
        out.results["profile"] = to_json(pr);
        write_csv(csv_path, pr);
      } else if (command == "cone") {
        ConeOptions co;
        co.tol = tol;
        co.seed = common.seed;
        co.threads = common.threads;
        out.parameters["tol"] = tol;
        if (!point_arg.empty()) {
          const Vec p = parse_point(point_arg, s.ambient, "--at-point");
          out.parameters["at"] = to_json(p);
          out.results["cone"] = to_json(tangent_cone_at_point(s, p, co));
        } else {
          out.parameters["at"] = "infinity";
          out.results["cone"] = to_json(tangent_cone_infinity(s, co));
          if (with_normals) out.results["normal_planes"] = to_json(normal_set_infinity(s, co));
        }
        out.parameters["per_level"] = co.per_level ? co.per_level : default_per_level(s.dim);
      } else if (command == "mult") {
        const Vec v = parse_point(dir_arg, s.ambient, "--dir");
        if (std::fabs(v.norm() - 1) > 1e-9) throw Error("--dir must be a unit vector");
        MultiplicityOptions mo;
        out.parameters["dir"] = to_json(v);
        out.parameters["eta"] = eta;
        out.parameters["R"] = R;
        out.parameters["per_band"] = mo.per_band;
        out.parameters["max_doublings"] = mo.max_doublings;
        out.parameters["noise_fraction"] = mo.noise_fraction;
        if (!point_arg.empty()) {
          const Vec p = parse_point(point_arg, s.ambient, "--at-point");
          out.parameters["at"] = to_json(p);
          out.results["multiplicity"] = to_json(relative_multiplicity_at(s, p, v, eta, R, common.seed, mo));
        } else {
          out.parameters["at"] = "infinity";
          out.results["multiplicity"] = to_json(relative_multiplicity(s, v, eta, R, common.seed, mo));
        }
      } else if (command == "kr-check") {
        KROptions ko;
        ko.eta = eta;
        ko.R = R;
        ko.threads = common.threads;
        out.parameters["tol"] = tol;
        out.parameters["eta"] = eta;
        out.parameters["R"] = R;
        out.parameters["directions_per_component"] = ko.directions_per_component;
        out.parameters["agree_factor"] = 3.0;
        const KRReport rep = kr_check(s, tol, common.seed, ko);
        out.results["kr"] = to_json(rep);
        if (!rep.failure.empty()) out.code = kExitInconclusive;
      } else if (command == "degree") {
        out.parameters["degree"] = degree;
        out.parameters["tol"] = tol;
        out.results["degree"] = to_json(degree_density_check(s, degree, tol, common.seed));
      } else if (command == "lne") {
        LNEOptions lno;
        lno.levels = levels;
        lno.max_vertices = max_vertices;
        lno.seed = common.seed;
        lno.threads = common.threads;
        out.parameters["levels"] = to_json(levels);
        out.parameters["sources"] = lno.sources;
        out.parameters["base_vertices"] = lno.base_vertices;
        out.parameters["max_vertices"] = lno.max_vertices;
        out.parameters["min_separation"] = lno.min_separation;
        out.parameters["max_h_growth"] = lno.max_h_growth;
        const LNEReport rep = lne_at_infinity(s, lno);
        out.results["lne"] = to_json(rep);
        if (rep.verdict == LNEReport::Kind::Inconclusive) out.code = kExitInconclusive;
      } else if (command == "classify") {
        ClassifyOptions co;
        co.threads = common.threads;
        out.parameters["tol"] = tol;
        out.parameters["monotone_check_tol"] = co.monotone_check_tol;
        const Classification c = classify(s, tol, common.seed, co);
        out.results["classification"] = to_json(c);
        if (c.verdict == Classification::Verdict::Inconclusive) out.code = kExitInconclusive;
      } else if (command == "moser") {
        out.parameters["tol"] = tol;
        out.results["moser"] = to_json(moser_graph_check(s, tol, common.seed));
      }
    }
  } catch (const CLI::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }

  json report;
  report["tool"] = json{{"name", "geoinf"}, {"version", kVersion}};
  report["command"] = json{{"name", command}, {"parameters", out.parameters}};
  report["scene"] = out.scene ? *out.scene : json(nullptr);
  report["results"] = out.results;
  report["exit_code"] = out.code;
  report["wall_time_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::cout << dump(report) << "\n";
  return out.code;
}
