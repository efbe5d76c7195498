#include "spip/reductions.hpp"

#include <algorithm>
#include <deque>
#include <set>
#include <sstream>
#include <string>

#include "spip/errors.hpp"

namespace spip {
namespace {

void check_vertex(int v, int vertices, const char* what) {
  if (v < 0 || v >= vertices)
    throw InputError(std::string(what) + " " + std::to_string(v) + " outside 0.." + std::to_string(vertices - 1));
}

void check_graph(int vertices, const std::vector<std::pair<int, int>>& edges, int from, int to) {
  if (vertices < 1) throw InputError("graph needs at least one vertex");
  check_vertex(from, vertices, "start vertex");
  check_vertex(to, vertices, "end vertex");
  for (auto [u, v] : edges) {
    check_vertex(u, vertices, "edge tail");
    check_vertex(v, vertices, "edge head");
  }
}

std::int64_t chebyshev(LatticePoint a, LatticePoint b) { return std::max(std::abs(a.x - b.x), std::abs(a.y - b.y)); }

void check_embedding(const VertexEmbedding& e, int vertices) {
  if (static_cast<int>(e.phi.size()) != vertices)
    throw SpacingTooSmall("embedding places " + std::to_string(e.phi.size()) + " of " + std::to_string(vertices) +
                          " vertices");
  if (e.spacing < 1) throw SpacingTooSmall("spacing must be positive");
  for (std::size_t i = 0; i < e.phi.size(); ++i)
    for (std::size_t j = i + 1; j < e.phi.size(); ++j)
      if (chebyshev(e.phi[i], e.phi[j]) < e.spacing)
        throw SpacingTooSmall("vertices " + std::to_string(i) + " and " + std::to_string(j) + " closer than spacing " +
                              std::to_string(e.spacing));
}

SpipInstance edge_instance(const EdgeEncoding& enc, int source, int target, int length) {
  return SpipInstance{enc.maps, enc.noise, length, enc.embedding.phi[static_cast<std::size_t>(source)],
                      enc.embedding.phi[static_cast<std::size_t>(target)]};
}

std::vector<AffineMap> edge_maps(const VertexEmbedding& embedding, const std::vector<std::pair<int, int>>& edges) {
  const Rational half(1, 2);
  std::vector<AffineMap> maps;
  maps.reserve(edges.size());
  for (auto [u, v] : edges) {
    const LatticePoint pu = embedding.phi[static_cast<std::size_t>(u)];
    const LatticePoint pv = embedding.phi[static_cast<std::size_t>(v)];
    maps.push_back(make_affine_map(half, 0, 0, half, Rational(pv.x) + half - half * pu.x,
                                   Rational(pv.y) + half - half * pu.y));
  }
  return maps;
}

}  // namespace

Dag parse_dag(std::istream& in) {
  std::vector<std::pair<long long, int>> tokens;  // value, line
  std::string line;
  for (int line_no = 1; std::getline(in, line); ++line_no) {
    std::istringstream ls(line);
    std::string tok;
    while (ls >> tok) {
      try {
        std::size_t used = 0;
        long long v = std::stoll(tok, &used);
        if (used != tok.size()) throw std::invalid_argument(tok);
        tokens.emplace_back(v, line_no);
      } catch (const std::exception&) {
        throw ParseError("line " + std::to_string(line_no), "expected an integer, got '" + tok + "'");
      }
    }
  }
  auto at = [&](std::size_t i, const char* what, long long limit = 1'000'000) -> int {
    if (i >= tokens.size())
      throw ParseError("end of input", std::string("missing ") + what);
    if (tokens[i].first < 0 || tokens[i].first > limit)
      throw ParseError("line " + std::to_string(tokens[i].second), std::string(what) + " out of range");
    return static_cast<int>(tokens[i].first);
  };
  Dag dag;
  dag.vertices = at(0, "vertex count");
  const int edge_count = at(1, "edge count");
  const long long last = dag.vertices - 1;
  dag.source = at(2, "source", last);
  dag.sink = at(3, "sink", last);
  for (int e = 0; e < edge_count; ++e) {
    const std::size_t base = 4 + 2 * static_cast<std::size_t>(e);
    const int u = at(base, "edge tail", last);
    dag.edges.emplace_back(u, at(base + 1, "edge head", last));
  }
  if (tokens.size() != 4 + 2 * static_cast<std::size_t>(edge_count))
    throw ParseError("line " + std::to_string(tokens.back().second), "trailing tokens after the declared edges");
  try {
    check_graph(dag.vertices, dag.edges, dag.source, dag.sink);
  } catch (const InputError& e) {
    throw ParseError("graph", e.what());
  }
  return dag;
}

std::vector<int> topological_order(const Dag& dag) {
  check_graph(dag.vertices, dag.edges, dag.source, dag.sink);
  const auto v = static_cast<std::size_t>(dag.vertices);
  std::vector<std::vector<int>> out(v);
  std::vector<int> indegree(v, 0);
  for (auto [a, b] : dag.edges) {
    out[static_cast<std::size_t>(a)].push_back(b);
    ++indegree[static_cast<std::size_t>(b)];
  }
  std::deque<int> ready;
  for (std::size_t i = 0; i < v; ++i)
    if (indegree[i] == 0) ready.push_back(static_cast<int>(i));
  std::vector<int> order;
  while (!ready.empty()) {
    const int a = ready.front();
    ready.pop_front();
    order.push_back(a);
    for (int b : out[static_cast<std::size_t>(a)])
      if (--indegree[static_cast<std::size_t>(b)] == 0) ready.push_back(b);
  }
  if (order.size() != v) throw NotAcyclic("graph has a cycle");
  return order;
}

std::map<int, BigInt> dag_path_count_oracle(const Dag& dag) {
  const auto order = topological_order(dag);
  std::vector<std::map<int, BigInt>> counts(static_cast<std::size_t>(dag.vertices));
  counts[static_cast<std::size_t>(dag.source)][0] = 1;
  std::vector<std::vector<int>> out(static_cast<std::size_t>(dag.vertices));
  for (auto [a, b] : dag.edges) out[static_cast<std::size_t>(a)].push_back(b);
  for (int a : order)
    for (int b : out[static_cast<std::size_t>(a)])
      for (const auto& [len, c] : counts[static_cast<std::size_t>(a)]) counts[static_cast<std::size_t>(b)][len + 1] += c;
  return counts[static_cast<std::size_t>(dag.sink)];
}

std::int64_t spacing_for_length(int max_length, std::int64_t requested) {
  std::int64_t d = 1;
  const std::int64_t floor_value = std::int64_t{1} << std::clamp(max_length + 1, 0, 40);
  while (d < requested || d < floor_value) d <<= 1;
  return d;
}

VertexEmbedding random_embedding(int vertices, std::int64_t spacing, RandomStream& rng) {
  if (vertices < 0) throw InputError("vertex count must be non-negative");
  const std::int64_t side = std::max<std::int64_t>(16, 8 * static_cast<std::int64_t>(vertices));
  std::set<LatticePoint> used;
  VertexEmbedding e;
  e.spacing = spacing;
  while (static_cast<int>(e.phi.size()) < vertices) {
    const LatticePoint grid{rng.uniform_int(0, side - 1), rng.uniform_int(0, side - 1)};
    if (!used.insert(grid).second) continue;
    e.phi.push_back({grid.x * spacing, grid.y * spacing});
  }
  return e;
}

Dag random_dag(int vertices, double edge_probability, RandomStream& rng) {
  if (vertices < 2) throw InputError("random DAG needs at least two vertices");
  Dag dag;
  dag.vertices = vertices;
  dag.source = 0;
  dag.sink = vertices - 1;
  for (int i = 0; i < vertices; ++i)
    for (int j = i + 1; j < vertices; ++j)
      if (rng.uniform_real() < edge_probability) dag.edges.emplace_back(i, j);
  return dag;
}

EdgeEncoding encode_edges(const VertexEmbedding& embedding, const std::vector<std::pair<int, int>>& edges,
                          const Rational& epsilon) {
  if (epsilon < 0 || epsilon >= Rational(1, 2)) throw InputError("edge encoding needs 0 ≤ ε < 1/2");
  if (edges.empty()) throw InputError("graph has no edges to encode");
  check_embedding(embedding, static_cast<int>(embedding.phi.size()));
  for (auto [u, v] : edges) {
    check_vertex(u, static_cast<int>(embedding.phi.size()), "edge tail");
    check_vertex(v, static_cast<int>(embedding.phi.size()), "edge head");
  }
  return EdgeEncoding{embedding, edges, TransformSet(edge_maps(embedding, edges)), NoiseBound(epsilon)};
}

bool edge_consistent(const EdgeEncoding& enc, const Path& path) {
  for (std::size_t i = 0; i < path.code.size(); ++i) {
    const auto [u, v] = enc.edges.at(static_cast<std::size_t>(path.code[i] - 1));
    if (path.states[i] != enc.embedding.phi[static_cast<std::size_t>(u)]) return false;
    if (path.states[i + 1] != enc.embedding.phi[static_cast<std::size_t>(v)]) return false;
  }
  return true;
}

DagEncoding embed_dag(const Dag& dag, const VertexEmbedding& embedding, const Rational& epsilon) {
  if (dag.source == dag.sink) throw InputError("source and sink must differ");
  const auto oracle = dag_path_count_oracle(dag);  // validates and rejects cycles
  check_embedding(embedding, dag.vertices);
  DagEncoding out{encode_edges(embedding, dag.edges, epsilon), {}};
  if (!oracle.empty())
    for (int len = oracle.begin()->first; len <= oracle.rbegin()->first; ++len)
      out.instances.push_back(edge_instance(out.encoding, dag.source, dag.sink, len));
  return out;
}

BigInt EmbeddingReport::spip_total() const {
  BigInt total = 0;
  for (const auto& [len, c] : spip_counts) total += c;
  return total;
}

BigInt EmbeddingReport::oracle_total() const {
  BigInt total = 0;
  for (const auto& [len, c] : oracle_counts) total += c;
  return total;
}

EmbeddingReport verify_dag_embedding(const Dag& dag, const DagEncoding& encoding) {
  EmbeddingReport report;
  report.oracle_counts = dag_path_count_oracle(dag);
  const EdgeEncoding& enc = encoding.encoding;
  for (std::size_t i = 0; i < enc.edges.size(); ++i) {
    const auto [u, v] = enc.edges[i];
    const Box box = branch_box(enc.maps[i], enc.embedding.phi[static_cast<std::size_t>(u)], enc.noise);
    if (box != Box::point(enc.embedding.phi[static_cast<std::size_t>(v)])) report.faulty_edges.emplace_back(u, v);
  }
  for (const SpipInstance& inst : encoding.instances) {
    BigInt c = count_paths_to(inst);
    if (c != 0) report.spip_counts[inst.steps] = c;
  }
  for (const SpipInstance& inst : encoding.instances) {
    const auto spip = report.spip_counts.find(inst.steps);
    const auto oracle = report.oracle_counts.find(inst.steps);
    const BigInt have = spip == report.spip_counts.end() ? BigInt(0) : spip->second;
    const BigInt want = oracle == report.oracle_counts.end() ? BigInt(0) : oracle->second;
    if (have == want || report.counterexamples.size() >= 5) continue;
    DfsOptions options;
    options.pruning = Pruning::layered;
    options.max_solutions = want.convert_to<std::size_t>() + 8;
    for (Solution& s : invert_dfs(inst, options).solutions)
      if (!edge_consistent(enc, s) && report.counterexamples.size() < 5) report.counterexamples.push_back(std::move(s));
  }
  report.pass = report.faulty_edges.empty() && report.spip_counts == report.oracle_counts;
  return report;
}

nlohmann::json report_to_json(const EmbeddingReport& report) {
  auto counts = [](const std::map<int, BigInt>& m) {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [len, c] : m) j[std::to_string(len)] = to_string(c);
    return j;
  };
  nlohmann::json faulty = nlohmann::json::array();
  for (auto [u, v] : report.faulty_edges) faulty.push_back({u, v});
  nlohmann::json cex = nlohmann::json::array();
  for (const auto& p : report.counterexamples) cex.push_back(nlohmann::json::parse(solution_json_line(p)));
  return {{"pass", report.pass},
          {"total", to_string(report.spip_total())},
          {"oracle_total", to_string(report.oracle_total())},
          {"spip_counts", counts(report.spip_counts)},
          {"oracle_counts", counts(report.oracle_counts)},
          {"faulty_edges", std::move(faulty)},
          {"counterexamples", std::move(cex)}};
}

DagCertificate certify_dag_reduction(const Dag& dag, const Rational& epsilon, std::uint64_t seed,
                                     std::int64_t initial_spacing, int max_rounds) {
  const auto oracle = dag_path_count_oracle(dag);
  const int longest = oracle.empty() ? 0 : oracle.rbegin()->first;
  std::int64_t spacing = spacing_for_length(longest, initial_spacing);
  RandomStream rng(seed);
  DagCertificate cert;
  for (cert.rounds = 1; cert.rounds <= max_rounds; ++cert.rounds, spacing *= 2) {
    cert.embedding = random_embedding(dag.vertices, spacing, rng);
    cert.report = verify_dag_embedding(dag, embed_dag(dag, cert.embedding, epsilon));
    if (cert.report.pass) return cert;
  }
  throw SpacingTooSmall("no embedding passed verification after " + std::to_string(max_rounds) + " rounds");
}

TransitionSystem random_transition_system(int states, int transitions, int horizon, RandomStream& rng) {
  if (states < 2) throw InputError("transition system needs at least two states");
  TransitionSystem ts;
  ts.states = states;
  ts.horizon = horizon;
  ts.start = 0;
  ts.goal = static_cast<int>(rng.uniform_int(1, states - 1));
  std::set<std::pair<int, int>> seen;
  const int possible = states * states;
  while (static_cast<int>(ts.transitions.size()) < std::min(transitions, possible)) {
    std::pair<int, int> t{static_cast<int>(rng.uniform_int(0, states - 1)), static_cast<int>(rng.uniform_int(0, states - 1))};
    if (seen.insert(t).second) ts.transitions.push_back(t);
  }
  return ts;
}

bool reachability_oracle(const TransitionSystem& ts) {
  check_graph(ts.states, ts.transitions, ts.start, ts.goal);
  if (ts.horizon < 0) return false;
  std::vector<int> depth(static_cast<std::size_t>(ts.states), -1);
  std::deque<int> queue{ts.start};
  depth[static_cast<std::size_t>(ts.start)] = 0;
  while (!queue.empty()) {
    const int a = queue.front();
    queue.pop_front();
    if (a == ts.goal) return true;
    if (depth[static_cast<std::size_t>(a)] == ts.horizon) continue;
    for (auto [u, v] : ts.transitions)
      if (u == a && depth[static_cast<std::size_t>(v)] < 0) {
        depth[static_cast<std::size_t>(v)] = depth[static_cast<std::size_t>(a)] + 1;
        queue.push_back(v);
      }
  }
  return false;
}

TransitionEncoding embed_transition_system(const TransitionSystem& ts, const VertexEmbedding& embedding,
                                           const Rational& epsilon) {
  check_graph(ts.states, ts.transitions, ts.start, ts.goal);
  check_embedding(embedding, ts.states);
  EdgeEncoding enc = encode_edges(embedding, ts.transitions, epsilon);
  SpipInstance inst = edge_instance(enc, ts.start, ts.goal, std::max(ts.horizon, 0));
  return {std::move(enc), std::move(inst)};
}

ReachabilityAnswer decide_reachability(const TransitionSystem& ts, const Rational& epsilon, std::uint64_t seed,
                                       std::int64_t initial_spacing, int max_rounds) {
  check_graph(ts.states, ts.transitions, ts.start, ts.goal);
  ReachabilityAnswer answer;
  if (ts.horizon < 0) return answer;
  if (ts.start == ts.goal) {
    answer.reachable = true;
    answer.witness = Path{{}, {}};
    return answer;
  }
  if (ts.transitions.empty()) return answer;

  std::int64_t spacing = spacing_for_length(ts.horizon, initial_spacing);
  RandomStream rng(seed);
  for (answer.rounds = 1; answer.rounds <= max_rounds; ++answer.rounds, spacing *= 2) {
    const TransitionEncoding enc =
        embed_transition_system(ts, random_embedding(ts.states, spacing, rng), epsilon);
    bool crosstalk = false;
    for (int len = 1; len <= ts.horizon && !crosstalk; ++len) {
      SpipInstance inst = enc.instance;
      inst.steps = len;
      DfsOptions options;
      options.max_solutions = 1;
      options.pruning = Pruning::layered;
      InversionResult r = invert_dfs(inst, options);
      if (r.solutions.empty()) continue;
      if (!edge_consistent(enc.encoding, r.solutions.front())) {
        crosstalk = true;
        break;
      }
      answer.reachable = true;
      answer.witness = std::move(r.solutions.front());
      return answer;
    }
    if (!crosstalk) return answer;
  }
  throw SpacingTooSmall("cross-talk persisted after " + std::to_string(max_rounds) + " rounds");
}

}  // namespace spip
