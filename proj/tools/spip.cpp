// spip: command-line front end for the lattice dynamics workbench.
//
// Exit codes: 0 success, 1 usage or input error, 2 resource cap reached.

#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include "spip/errors.hpp"
#include "spip/experiments.hpp"
#include "spip/instance_io.hpp"
#include "spip/inversion.hpp"
#include "spip/reductions.hpp"

using namespace spip;
using nlohmann::json;

namespace {

struct Common {
  std::string instance;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::string cap;
  unsigned threads = 1;
};

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, sep)) parts.push_back(part);
  if (!text.empty() && text.back() == sep) parts.emplace_back();
  return parts;
}

std::int64_t parse_int(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw ParseError(what, "expected an integer, got '" + s + "'");
}

SymbolicCode parse_code(const std::string& text) {
  SymbolicCode code;
  if (text.empty()) return code;
  for (const auto& s : split(text, ',')) code.push_back(static_cast<int>(parse_int(s, "--code")));
  return code;
}

/// "dx,dy;dx,dy;..." with rational components; pairs may also be separated by spaces.
std::vector<Vector2q> parse_deltas(std::string text) {
  std::vector<Vector2q> out;
  std::replace(text.begin(), text.end(), ';', ' ');
  std::istringstream in(text);
  for (std::string pair; in >> pair;) {
    const auto xy = split(pair, ',');
    if (xy.size() != 2) throw ParseError("--deltas", "expected 'dx,dy' pairs separated by ';', got '" + pair + "'");
    try {
      out.emplace_back(parse_rational(xy[0]), parse_rational(xy[1]));
    } catch (const std::invalid_argument& e) {
      throw ParseError("--deltas", e.what());
    }
  }
  return out;
}

LatticePoint parse_point(const std::string& text, const std::string& what) {
  const auto xy = split(text, ',');
  if (xy.size() != 2) throw ParseError(what, "expected 'x,y'");
  return {parse_int(xy[0], what), parse_int(xy[1], what)};
}

/// "a..b" or a comma-separated list.
std::vector<int> parse_steps(const std::string& text) {
  std::vector<int> out;
  if (const auto dots = text.find(".."); dots != std::string::npos) {
    const auto lo = parse_int(text.substr(0, dots), "--steps"), hi = parse_int(text.substr(dots + 2), "--steps");
    if (lo < 0 || hi < lo) throw ParseError("--steps", "empty range '" + text + "'");
    for (auto n = lo; n <= hi; ++n) out.push_back(static_cast<int>(n));
    return out;
  }
  for (const auto& s : split(text, ',')) out.push_back(static_cast<int>(parse_int(s, "--steps")));
  return out;
}

/// "lo..hi:count" evenly spaced (exact), or a comma-separated list.
std::vector<Rational> parse_epsilons(const std::string& text) {
  std::vector<Rational> out;
  try {
    if (const auto dots = text.find(".."); dots != std::string::npos) {
      const auto colon = text.find(':', dots);
      const Rational lo = parse_rational(text.substr(0, dots));
      const Rational hi = parse_rational(text.substr(dots + 2, colon == std::string::npos ? std::string::npos : colon - dots - 2));
      const std::int64_t count = colon == std::string::npos ? 2 : parse_int(text.substr(colon + 1), "--epsilon");
      if (count < 1) throw ParseError("--epsilon", "count must be positive");
      for (std::int64_t i = 0; i < count; ++i)
        out.push_back(count == 1 ? lo : lo + (hi - lo) * Rational(i, count - 1));
      return out;
    }
    for (const auto& s : split(text, ',')) out.push_back(parse_rational(s));
  } catch (const std::invalid_argument& e) {
    throw ParseError("--epsilon", e.what());
  }
  return out;
}

BigInt parse_cap(const std::string& text, const BigInt& fallback) {
  if (text.empty()) return fallback;
  try {
    return parse_bigint(text);
  } catch (const std::invalid_argument& e) {
    throw ParseError("--cap", e.what());
  }
}

/// --seed wins, then the instance file's seed; otherwise a fresh seed is drawn and
/// reported on stderr so the run can be replayed.
std::uint64_t resolve_seed(const Common& c, std::optional<std::uint64_t> from_file = std::nullopt) {
  if (c.seed) return *c.seed;
  if (from_file) return *from_file;
  std::random_device rd;
  const std::uint64_t s = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
  std::cerr << "seed: " << s << '\n';
  return s;
}

class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty()) {
      file_.open(path);
      if (!file_) throw InputError("cannot open output file '" + path + "'");
    }
  }
  std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

 private:
  std::ofstream file_;
};

InstanceFile require_instance(const Common& c) {
  if (c.instance.empty()) throw InputError("--instance is required");
  return load_instance(c.instance);
}

json trajectory_json(const SymbolicCode& code, const Trajectory& t) {
  json states = json::array();
  for (const auto& p : t.states) states.push_back(json::array({p.x, p.y}));
  json doc = {{"code", code}, {"states", std::move(states)}};
  if (t.noises) {
    json deltas = json::array();
    for (const auto& d : *t.noises) deltas.push_back(json::array({to_string(d(0)), to_string(d(1))}));
    doc["deltas"] = std::move(deltas);
  }
  return doc;
}

void add_common(CLI::App* cmd, Common& c, bool instance, bool seed, bool cap, bool threads) {
  if (instance) cmd->add_option("--instance", c.instance, "instance file (JSON)");
  if (seed) cmd->add_option("--seed", c.seed, "random seed");
  if (cap) cmd->add_option("--cap", c.cap, "resource cap (integer)");
  if (threads) cmd->add_option("--threads", c.threads, "worker threads")->check(CLI::Range(1u, 1024u));
  cmd->add_option("--out", c.out, "write output to FILE instead of stdout");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact workbench for noisy contractive lattice maps"};
  app.require_subcommand(1);

  Common c;
  std::string code_text, deltas_text, target_text, method = "dfs", pruning = "reach_box", dag_path;
  std::string steps_text = "1..20", eps_text = "0.05..1:20", epsilon_text = "1/4";
  std::uint64_t trials = 1, invert_trials = 10'000, stats_trials = 1000;
  std::size_t max_solutions = std::numeric_limits<std::size_t>::max();
  std::size_t retain = 0;
  int transforms = 10, replicates = 1, max_rounds = 3;

  auto* simulate = app.add_subcommand("simulate", "sample or replay trajectories as JSON lines");
  add_common(simulate, c, true, true, false, false);
  simulate->add_option("--code", code_text, "fixed symbolic code, e.g. 1,2,1");
  simulate->add_option("--deltas", deltas_text, "fixed noise, e.g. 3/10,-2/5;-1/5,1/5 (needs --code)");
  simulate->add_option("--trials", trials, "number of trajectories");

  auto* enumerate = app.add_subcommand("enumerate", "exhaustive census of the path space (JSON)");
  add_common(enumerate, c, true, false, true, true);
  enumerate->add_option("--retain", retain, "also list up to K paths");

  auto* count = app.add_subcommand("count", "exact number of paths ending at the target");
  add_common(count, c, true, false, true, false);
  count->add_option("--target", target_text, "override the target, e.g. 1,0");

  auto* invert = app.add_subcommand("invert", "find paths from x0 to the target (JSON lines)");
  add_common(invert, c, true, true, true, true);
  invert->add_option("--method", method, "dfs, mitm or random")->check(CLI::IsMember({"dfs", "mitm", "random"}));
  invert->add_option("--pruning", pruning, "dfs pruning")->check(CLI::IsMember({"none", "reach_box", "layered"}));
  invert->add_option("--max-solutions", max_solutions, "stop after K solutions (dfs)");
  invert->add_option("--trials", invert_trials, "samples for the random method");
  invert->add_option("--target", target_text, "override the target, e.g. 1,0");

  auto* stats = app.add_subcommand("stats", "run the simulation suite (CSV)");
  add_common(stats, c, false, true, false, true);
  stats->add_option("--trials", stats_trials, "trajectories per run");
  stats->add_option("--replicates", replicates, "seed replicates of the suite")->check(CLI::PositiveNumber);

  auto* sweep = app.add_subcommand("sweep", "log2 path-space surface over (n, epsilon) (CSV)");
  add_common(sweep, c, false, false, false, false);
  sweep->add_option("--steps", steps_text, "a..b or a list");
  sweep->add_option("--epsilon", eps_text, "lo..hi:count or a list");
  sweep->add_option("--transforms", transforms, "alphabet size m")->check(CLI::PositiveNumber);

  auto* reduce = app.add_subcommand("reduce", "embed a DAG and certify path counts");
  add_common(reduce, c, false, true, false, false);
  reduce->add_option("--dag", dag_path, "edge list file: 'V E', 's t', then E lines 'u v'")->required();
  reduce->add_option("--epsilon", epsilon_text, "noise bound, below 1/2");
  reduce->add_option("--max-rounds", max_rounds, "resampling rounds")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (*simulate) {
      const auto file = require_instance(c);
      const auto& inst = file.instance;
      const auto code = parse_code(code_text);
      const auto deltas = parse_deltas(deltas_text);
      if (!deltas.empty() && code.empty()) throw InputError("--deltas needs --code");
      if (!code.empty()) validate_code(inst.maps, code);
      Output out(c.out);
      if (!deltas.empty()) {
        if (deltas.size() != code.size()) throw LengthMismatch("--deltas has " + std::to_string(deltas.size()) +
                                                               " entries for a code of length " + std::to_string(code.size()));
        for (const auto& d : deltas)
          if (abs(d(0)) > inst.noise.epsilon() || abs(d(1)) > inst.noise.epsilon())
            throw InputError("noise component outside [-epsilon, epsilon]");
        out.stream() << trajectory_json(code, replay_trajectory(inst.maps, code, inst.x0, deltas)).dump() << '\n';
        return 0;
      }
      const auto seed = resolve_seed(c, file.noise_seed);
      for (std::uint64_t t = 0; t < trials; ++t) {
        auto rng = RandomStream::derive(seed, t);
        SymbolicCode cur = code;
        if (cur.empty()) {
          cur.resize(static_cast<std::size_t>(inst.steps));
          for (auto& s : cur) s = static_cast<int>(rng.uniform_int(1, static_cast<std::int64_t>(inst.maps.size())));
        }
        out.stream() << trajectory_json(cur, sample_trajectory(inst.maps, cur, inst.x0, inst.noise, rng)).dump() << '\n';
      }
    } else if (*enumerate) {
      const auto inst = require_instance(c).instance;
      EnumerateOptions opt;
      opt.cap = parse_cap(c.cap, opt.cap);
      opt.retain_paths = retain;
      opt.threads = c.threads;
      const auto census = enumerate_paths(inst, opt);
      json doc = census_to_json(census);
      if (retain > 0) {
        json paths = json::array();
        for (const auto& p : census.paths) paths.push_back(json::parse(solution_json_line(p)));
        doc["paths"] = std::move(paths);
        doc["paths_truncated"] = census.paths_truncated;
      }
      Output(c.out).stream() << doc.dump() << '\n';
    } else if (*count) {
      auto inst = require_instance(c).instance;
      if (!target_text.empty()) inst.target = parse_point(target_text, "--target");
      if (!inst.target) throw InputError("count needs a target (in the file or via --target)");
      Output(c.out).stream() << to_string(count_paths_to(inst, parse_cap(c.cap, BigInt(100'000'000)))) << '\n';
    } else if (*invert) {
      const auto file = require_instance(c);
      auto inst = file.instance;
      if (!target_text.empty()) inst.target = parse_point(target_text, "--target");
      if (!inst.target) throw InputError("invert needs a target (in the file or via --target)");
      InversionResult r;
      if (method == "dfs") {
        DfsOptions opt;
        opt.cap = parse_cap(c.cap, opt.cap);
        opt.max_solutions = max_solutions;
        opt.threads = c.threads;
        opt.pruning = pruning == "none" ? Pruning::none : pruning == "layered" ? Pruning::layered : Pruning::reach_box;
        r = invert_dfs(inst, opt);
      } else if (method == "mitm") {
        MitmOptions opt;
        opt.cap = parse_cap(c.cap, opt.cap);
        r = invert_mitm(inst, opt);
      } else {
        RandomStream rng(resolve_seed(c, file.noise_seed));
        r = invert_random(inst, invert_trials, rng);
      }
      Output out(c.out);
      for (const auto& s : r.solutions) out.stream() << solution_json_line(s) << '\n';
      std::cerr << "solutions=" << r.solutions.size() << " exhausted=" << (r.exhausted ? "true" : "false")
                << " nodes=" << r.nodes_expanded;
      if (method == "random") std::cerr << " trials=" << r.trials << " hits=" << r.hits;
      std::cerr << '\n';
    } else if (*stats) {
      const auto seed = resolve_seed(c);
      std::vector<RunConfig> cfgs;
      for (int r = 0; r < replicates; ++r) {
        auto suite = default_suite(seed + 1000 * static_cast<std::uint64_t>(r),
                                   seed + 1000 * static_cast<std::uint64_t>(r) + 1, stats_trials);
        for (auto& cfg : suite) {
          if (replicates > 1) cfg.label += " rep " + std::to_string(r + 1);
          cfgs.push_back(std::move(cfg));
        }
      }
      const auto metrics = run_suite(cfgs, c.threads);
      Output(c.out).stream() << suite_csv(cfgs, metrics);
    } else if (*sweep) {
      const auto steps = parse_steps(steps_text);
      const auto eps = parse_epsilons(eps_text);
      Output(c.out).stream() << surface_csv(sweep_surface(steps, eps, transforms));
    } else if (*reduce) {
      std::ifstream in(dag_path);
      if (!in) throw ParseError(dag_path, "cannot open file");
      Dag dag;
      try {
        dag = parse_dag(in);
      } catch (const ParseError& e) {
        throw ParseError(dag_path + ": " + e.where(), std::string(e.what()).substr(e.where().size() + 2));
      }
      Rational eps;
      try {
        eps = parse_rational(epsilon_text);
      } catch (const std::invalid_argument& e) {
        throw ParseError("--epsilon", e.what());
      }
      const auto cert = certify_dag_reduction(dag, eps, resolve_seed(c), 4, max_rounds);
      Output out(c.out);
      out.stream() << "PASS total=" << to_string(cert.report.spip_total()) << '\n';
      std::cerr << "rounds=" << cert.rounds << " spacing=" << cert.embedding.spacing << '\n';
      std::cerr << report_to_json(cert.report).dump() << '\n';
    }
  } catch (const ResourceError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
