// nodeembed: command-line front end over the C interface.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <regex>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "nodeembed/nodeembed.h"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Exit codes
constexpr int kOk = 0;
constexpr int kFail = 2;
constexpr int kInput = 3;
constexpr int kNumeric = 4;
constexpr int kInternal = 5;

int exit_code(ne_status s) {
  switch (s) {
    case NE_OK: return kOk;
    case NE_FAIL: return kFail;
    case NE_EINPUT: return kInput;
    case NE_ENUMERIC: return kNumeric;
    default: return kInternal;
  }
}

// A failed library call, carrying the status and its message.
struct CallError : std::runtime_error {
  ne_status status;
  CallError(ne_status s, const std::string& what) : std::runtime_error(what), status(s) {}
};

struct InputProblem : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void check(ne_status s) {
  if (s != NE_OK) throw CallError(s, ne_last_error());
}

struct StrFree {
  void operator()(char* p) const { ne_string_free(p); }
};
using Owned = std::unique_ptr<char, StrFree>;

struct MapFree {
  void operator()(ne_funcspec* p) const { ne_funcspec_free(p); }
};
struct ArchFree {
  void operator()(ne_arch* p) const { ne_arch_free(p); }
};
struct TorusFree {
  void operator()(ne_torus* p) const { ne_torus_free(p); }
};
using MapPtr = std::unique_ptr<ne_funcspec, MapFree>;
using ArchPtr = std::unique_ptr<ne_arch, ArchFree>;
using TorusPtr = std::unique_ptr<ne_torus, TorusFree>;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + num(v[i]);
  return s;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputProblem("cannot read file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Globals {
  double rtol = 1e-10;
  double atol = 1e-12;
  int grid = 64;
  std::string out = ".";
  std::uint64_t seed = 0;
  bool cite = false;
  bool rtol_set = false, atol_set = false;
};

fs::path write_output(const Globals& g, const std::string& name, const std::string& text) {
  fs::create_directories(g.out);
  const fs::path p = fs::path(g.out) / name;
  std::ofstream o(p, std::ios::binary);
  if (!o) throw InputProblem("cannot write '" + p.string() + "'");
  o << text;
  if (!text.empty() && text.back() != '\n') o << '\n';
  return p;
}

void cite(const Globals& g, const std::string& text) {
  if (g.cite) std::cout << "cite: " << text << "\n";
}

// "[-1,1]", "(0,2]x[-1,1]"; an empty or "*" bound is unbounded.
json parse_domain(const std::string& text) {
  static const std::regex iv(R"(\s*([\[\(])\s*([^,\]\)]*)\s*,\s*([^,\]\)]*)\s*([\]\)])\s*)");
  json out = json::array();
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t cut = text.find('x', start);
    const std::string part = text.substr(start, cut == std::string::npos ? std::string::npos : cut - start);
    std::smatch m;
    if (!std::regex_match(part, m, iv)) throw InputProblem("bad interval '" + part + "' in --domain");
    json e;
    auto bound = [&](const std::string& s) -> json {
      if (s.empty() || s == "*" || s == "-inf" || s == "inf") return nullptr;
      try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
      } catch (const std::exception&) {
        throw InputProblem("bad bound '" + s + "' in --domain");
      }
    };
    e["lo"] = bound(m[2]);
    e["hi"] = bound(m[3]);
    e["lo_open"] = m[1] == "(" || e["lo"].is_null();
    e["hi_open"] = m[4] == ")" || e["hi"].is_null();
    out.push_back(e);
    if (cut == std::string::npos) break;
    start = cut + 1;
  }
  return out;
}

std::string grid_json(const Globals& g, const std::string& domain) {
  json j = {{"count", g.grid}};
  if (!domain.empty()) j["domain"] = parse_domain(domain);
  return j.dump();
}

// A map given as a JSON file, or inline as expressions separated by ';'.
MapPtr load_map(const std::string& arg, int dim, const std::string& domain = "") {
  ne_funcspec* f = nullptr;
  if (fs::exists(arg)) {
    json j = json::parse(read_file(arg), nullptr, false);
    if (j.is_discarded()) throw InputProblem("'" + arg + "' is not valid JSON");
    if (!domain.empty()) j["domain"] = parse_domain(domain);
    check(ne_funcspec_from_json(j.dump().c_str(), &f));
    return MapPtr(f);
  }
  if (arg.size() > 5 && arg.ends_with(".json")) throw InputProblem("file '" + arg + "' does not exist");
  std::vector<std::string> parts;
  std::stringstream ss(arg);
  for (std::string p; std::getline(ss, p, ';');) parts.push_back(p);
  json j = {{"name", "f"}, {"n_in", dim}, {"components", parts}};
  if (!domain.empty()) j["domain"] = parse_domain(domain);
  check(ne_funcspec_from_json(j.dump().c_str(), &f));
  return MapPtr(f);
}

ArchPtr load_arch(const Globals& g, const std::string& path) {
  ne_arch* a = nullptr;
  check(ne_arch_from_json(read_file(path).c_str(), &a));
  ArchPtr arch(a);
  if (g.rtol_set || g.atol_set) check(ne_arch_set_tolerances(a, g.rtol, g.atol));
  return arch;
}

const std::map<std::string, std::string> kCite = {
    {"verify",
     "the output of a neural ODE is its time-T map x -> h_x(T), computed here by adaptive Runge-Kutta "
     "integration; an embedding means exact equality with the target on the whole input domain"},
    {"diagnose",
     "time-T maps of 1-D fields are strictly increasing and cannot carry a point across a fixed point; "
     "a map with a component that is a topological Morse function with a critical point cannot be embedded "
     "in a basic neural ODE, one followed by a linear layer, or an augmented one, while an augmented neural "
     "ODE with a linear layer embeds any continuous map"},
    {"series",
     "for Phi = x + b_m x^m + ... the formal solutions of Julia's equation Phi' f = f o Phi are the multiples "
     "of the iterative logarithm b_m x^m + sum c_n x^n; for Phi = c x^alpha, alpha >= 2, only f = 0 solves it"},
    {"flow",
     "autonomous solutions satisfy the translation equation h(x, s+t) = h(h(x, s), t); a field of constant "
     "sign in 1-D has the flow r^-1(r(x) + t) with r' = 1/f"},
    {"suspend",
     "suspension flow on the mapping torus of a diffeomorphism Phi: unit-speed flow in the fiber time with "
     "(x, T) identified with (Phi(x), 0), so the time-T return map is Phi"},
    {"trajectory", "the state h_x(t) of the architecture's ODE on [0, T], the curve whose endpoint is the output"},
};

// ------------------------------------------------------------------ commands

struct EmbedOpts {
  std::string id;
  std::optional<double> c, alpha, T;
  std::vector<double> coeffs;
  std::string phi;
  int dim = 1;
  std::string domain;
  std::string file = "architecture.json";
};

int cmd_embed(const Globals& g, const EmbedOpts& o) {
  json params = json::object();
  if (o.c) params["c"] = *o.c;
  if (o.alpha) params["alpha"] = *o.alpha;
  if (o.T) params["T"] = *o.T;
  if (!o.coeffs.empty()) params["coeffs"] = o.coeffs;
  if (!o.phi.empty()) {
    MapPtr phi = load_map(o.phi, o.dim, o.domain);
    char* text = nullptr;
    check(ne_funcspec_to_json(phi.get(), &text));
    params["phi"] = json::parse(Owned(text).get());
  }
  ne_arch* a = nullptr;
  char* citation = nullptr;
  check(ne_arch_construct(o.id.c_str(), params.dump().c_str(), &a, &citation));
  ArchPtr arch(a);
  Owned cit(citation);
  if (g.rtol_set || g.atol_set) check(ne_arch_set_tolerances(a, g.rtol, g.atol));
  char* text = nullptr;
  check(ne_arch_to_json(a, &text));
  const fs::path p = write_output(g, o.file, Owned(text).get());
  std::cout << "wrote " << p.string() << "\n";
  std::cout << "construction: " << cit.get() << "\n";
  return kOk;
}

struct VerifyOpts {
  std::string arch, target, domain;
  int dim = 1;
  double tol = 1e-6;
};

int cmd_verify(const Globals& g, const VerifyOpts& o) {
  ArchPtr arch = load_arch(g, o.arch);
  MapPtr target = load_map(o.target, ne_arch_n_in(arch.get()));
  char *report = nullptr, *table = nullptr;
  const ne_status s = ne_verify(arch.get(), target.get(), grid_json(g, o.domain).c_str(), o.tol, &report, &table);
  Owned r(report), t(table);
  if (s != NE_OK && s != NE_FAIL) throw CallError(s, ne_last_error());
  write_output(g, "verify_report.json", r.get());
  write_output(g, "verify_table.csv", t.get());
  const json j = json::parse(r.get());
  std::cout << (s == NE_OK ? "PASS" : "FAIL") << " max_err=" << num(j.at("max_err").get<double>())
            << " tol=" << num(o.tol) << "\n";
  cite(g, kCite.at("verify"));
  return exit_code(s);
}

struct DiagnoseOpts {
  std::string phi, domain;
  int dim = 1;
  std::optional<double> perturb;
};

int cmd_diagnose(const Globals& g, const DiagnoseOpts& o) {
  MapPtr phi = load_map(o.phi, o.dim, o.domain);
  const std::string grid = grid_json(g, "");
  char* report = nullptr;
  check(ne_diagnose(phi.get(), grid.c_str(), &report));
  Owned r(report);
  write_output(g, "diagnosis.json", r.get());
  const json j = json::parse(r.get());
  for (const auto& [k, v] : j.at("verdicts").items()) std::cout << k << ": " << v.get<std::string>() << "\n";
  for (const auto& reason : j.at("reasons")) std::cout << "reason: " << reason.get<std::string>() << "\n";
  if (j.contains("witnesses") && j["witnesses"].contains("separation")) {
    const json& w = j["witnesses"]["separation"]["witness"];
    if (!w.is_null()) {
      std::cout << "separation witness: fixed point z=" << num(w["z"]) << ", x*=" << num(w["x_star"])
                << " maps to " << num(w["image"]) << "\n";
    }
  }
  if (!j.at("recommendation").is_null()) {
    const json& rec = j["recommendation"];
    std::cout << "recommendation: " << rec["architecture"].get<std::string>() << " ("
              << rec["variant"].get<std::string>() << "), construction "
              << rec["construction"].get<std::string>() << "\n";
  }
  if (o.perturb) {
    if (ne_funcspec_n_out(phi.get()) != 1) throw InputProblem("--perturb needs a scalar map");
    char* m = nullptr;
    check(ne_morseify(phi.get(), *o.perturb, g.seed, grid.c_str(), &m));
    Owned mo(m);
    write_output(g, "morseify.json", mo.get());
    const json mj = json::parse(mo.get());
    std::cout << "perturbation a=[" << join(mj.at("a").get<std::vector<double>>())
              << "] morse=" << (mj.at("morse").get<bool>() ? "true" : "false") << "\n";
  }
  cite(g, kCite.at("diagnose"));
  return kOk;
}

struct SeriesOpts {
  std::string phi;
  std::vector<double> coeffs;
  std::optional<double> c;
  std::optional<int> alpha;
  int N = 8;
};

int cmd_series(const Globals& g, const SeriesOpts& o) {
  char* out = nullptr;
  if (o.alpha) {
    check(ne_series_monomial(o.c.value_or(1.0), *o.alpha, o.N, &out));
  } else {
    std::vector<double> coeffs = o.coeffs;
    if (!o.phi.empty()) {
      const json j = json::parse(read_file(o.phi), nullptr, false);
      if (j.is_discarded() || !j.contains("coeffs")) {
        throw InputProblem("'" + o.phi + "' must be JSON with a \"coeffs\" array");
      }
      coeffs = j.at("coeffs").get<std::vector<double>>();
    }
    if (coeffs.empty()) throw InputProblem("series needs --phi, --coeffs or --alpha");
    check(ne_series_iterative_logarithm(coeffs.data(), static_cast<int>(coeffs.size()), o.N, &out));
  }
  Owned s(out);
  write_output(g, "series.json", s.get());
  const auto c = json::parse(s.get()).at("coeffs").get<std::vector<double>>();
  std::string csv = "n,coeff\n";
  for (std::size_t n = 0; n < c.size(); ++n) csv += std::to_string(n) + "," + num(c[n]) + "\n";
  write_output(g, "series.csv", csv);
  std::cout << "coeffs: [" << join(c) << "]\n";
  cite(g, kCite.at("series"));
  return kOk;
}

struct FlowOpts {
  std::string field;
  std::vector<double> x;
  double t = 1;
};

int cmd_flow(const Globals& g, const FlowOpts& o) {
  MapPtr f = load_map(o.field, static_cast<int>(o.x.size()));
  if (ne_funcspec_n_out(f.get()) != ne_funcspec_n_in(f.get())) throw InputProblem("a field maps R^n to R^n");
  if (static_cast<int>(o.x.size()) != ne_funcspec_n_in(f.get())) {
    throw InputProblem("--x needs " + std::to_string(ne_funcspec_n_in(f.get())) + " values");
  }
  std::vector<double> h(o.x.size());
  char* csv = nullptr;
  const ne_status s = ne_flow(f.get(), o.x.data(), o.t, g.rtol, g.atol, h.data(), &csv);
  Owned c(csv);
  const std::string msg = s == NE_OK ? "" : ne_last_error();
  if (c) write_output(g, "flow.csv", c.get());
  if (s != NE_OK) throw CallError(s, msg);
  std::cout << "h(t): [" << join(h) << "]\n";
  cite(g, kCite.at("flow"));
  return kOk;
}

struct SuspendOpts {
  std::string torus;
  std::vector<double> x;
  double r = 0, s = 1;
  long long k = 0;
  int samples = 101;
};

int cmd_suspend(const Globals& g, const SuspendOpts& o) {
  ne_torus* m = nullptr;
  check(ne_torus_from_json(read_file(o.torus).c_str(), &m));
  TorusPtr torus(m);
  if (static_cast<int>(o.x.size()) != ne_torus_dim(m)) {
    throw InputProblem("--x needs " + std::to_string(ne_torus_dim(m)) + " values");
  }
  std::vector<double> x(o.x.size());
  double r = 0;
  long long k = 0;
  check(ne_torus_flow(m, o.x.data(), o.r, o.k, o.s, x.data(), &r, &k));
  char* csv = nullptr;
  check(ne_torus_csv(m, o.x.data(), o.r, o.s, o.samples, &csv));
  write_output(g, "suspension.csv", Owned(csv).get());
  std::cout << "x: [" << join(x) << "] r: " << num(r) << " k: " << k << "\n";
  cite(g, kCite.at("suspend"));
  return kOk;
}

struct TrajectoryOpts {
  std::string arch;
  std::vector<double> x;
};

int cmd_trajectory(const Globals& g, const TrajectoryOpts& o) {
  ArchPtr arch = load_arch(g, o.arch);
  if (static_cast<int>(o.x.size()) != ne_arch_n_in(arch.get())) {
    throw InputProblem("--x needs " + std::to_string(ne_arch_n_in(arch.get())) + " values");
  }
  char* csv = nullptr;
  const ne_status s = ne_arch_trajectory_csv(arch.get(), o.x.data(), &csv);
  Owned c(csv);
  const std::string msg = s == NE_OK ? "" : ne_last_error();
  if (c) std::cout << "wrote " << write_output(g, "trajectory.csv", c.get()).string() << "\n";
  if (s != NE_OK) throw CallError(s, msg);
  cite(g, kCite.at("trajectory"));
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Construct, verify and diagnose neural ODE embeddings of maps"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", std::string(ne_version()));

  Globals g;
  auto* rtol = app.add_option("--rtol", g.rtol, "relative integration tolerance")->check(CLI::PositiveNumber);
  auto* atol = app.add_option("--atol", g.atol, "absolute integration tolerance")->check(CLI::PositiveNumber);
  app.add_option("--grid", g.grid, "grid points per dimension")->check(CLI::PositiveNumber);
  app.add_option("--out", g.out, "output directory");
  app.add_option("--seed", g.seed, "random seed");
  app.add_flag("--cite", g.cite, "print the result each output relies on");

  EmbedOpts eo;
  auto* embed = app.add_subcommand("embed", "construct an architecture embedding a map");
  embed->add_option("id", eo.id, "linear, monomial, moebius, negation, polynomial or universal")->required();
  embed->add_option("--c", eo.c);
  embed->add_option("--alpha", eo.alpha);
  embed->add_option("--T", eo.T, "end time");
  embed->add_option("--coeffs", eo.coeffs, "coefficients of x, x^2, ...")->delimiter(',');
  embed->add_option("--phi", eo.phi, "target map: JSON file or expressions separated by ';'");
  embed->add_option("--dim", eo.dim, "input dimension of an inline map");
  embed->add_option("--domain", eo.domain, "input domain such as [-1,1]x(0,2]");
  embed->add_option("--file", eo.file, "output file name");

  VerifyOpts vo;
  auto* verify = app.add_subcommand("verify", "check an architecture against a target map");
  verify->add_option("--arch", vo.arch, "architecture JSON")->required()->check(CLI::ExistingFile);
  verify->add_option("--target", vo.target, "target map")->required();
  verify->add_option("--tol", vo.tol, "maximum error")->check(CLI::PositiveNumber);
  verify->add_option("--domain", vo.domain, "grid domain, defaults to the target's");

  DiagnoseOpts dopt;
  auto* diag = app.add_subcommand("diagnose", "look for obstructions to embedding a map");
  diag->add_option("--phi", dopt.phi, "map")->required();
  diag->add_option("--dim", dopt.dim, "input dimension of an inline map");
  diag->add_option("--domain", dopt.domain, "domain, needed when the map has none");
  diag->add_option("--perturb", dopt.perturb, "also add a seeded linear perturbation of this size")
      ->check(CLI::PositiveNumber);

  SeriesOpts so;
  auto* series = app.add_subcommand("series", "formal power-series solution of Julia's equation");
  series->add_option("--phi", so.phi, "JSON file with \"coeffs\"")->check(CLI::ExistingFile);
  series->add_option("--coeffs", so.coeffs, "coefficients of Phi from x^0")->delimiter(',');
  series->add_option("--c", so.c, "coefficient of c x^alpha");
  series->add_option("--alpha", so.alpha, "exponent of c x^alpha");
  series->add_option("--N", so.N, "truncation order")->check(CLI::NonNegativeNumber);

  FlowOpts fo;
  auto* flow = app.add_subcommand("flow", "integrate an autonomous field");
  flow->add_option("--field", fo.field, "field: JSON file or expressions separated by ';'")->required();
  flow->add_option("--x", fo.x, "initial state")->required()->delimiter(',');
  flow->add_option("--t", fo.t, "time");

  SuspendOpts su;
  auto* suspend = app.add_subcommand("suspend", "suspension flow on a mapping torus");
  suspend->add_option("--torus", su.torus, "torus JSON")->required()->check(CLI::ExistingFile);
  suspend->add_option("--x", su.x, "fiber point")->required()->delimiter(',');
  suspend->add_option("--r", su.r, "fiber time in [0, T)");
  suspend->add_option("--k", su.k, "winding count");
  suspend->add_option("--s", su.s, "duration");
  suspend->add_option("--samples", su.samples, "CSV rows")->check(CLI::PositiveNumber);

  TrajectoryOpts to;
  auto* traj = app.add_subcommand("trajectory", "ODE trajectory of an architecture as CSV");
  traj->add_option("--arch", to.arch, "architecture JSON")->required()->check(CLI::ExistingFile);
  traj->add_option("--x", to.x, "input")->required()->delimiter(',');

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
    return kInput;
  }
  g.rtol_set = rtol->count() > 0;
  g.atol_set = atol->count() > 0;

  try {
    if (*embed) return cmd_embed(g, eo);
    if (*verify) return cmd_verify(g, vo);
    if (*diag) return cmd_diagnose(g, dopt);
    if (*series) return cmd_series(g, so);
    if (*flow) return cmd_flow(g, fo);
    if (*suspend) return cmd_suspend(g, su);
    if (*traj) return cmd_trajectory(g, to);
  } catch (const CallError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e.status);
  } catch (const InputProblem& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInput;
  } catch (const json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInput;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInput;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kInternal;
  }
  return kInternal;
}
