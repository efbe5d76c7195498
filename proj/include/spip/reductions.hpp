#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <utility>
#include <vector>

#include <json.hpp>

#include "spip/inversion.hpp"

namespace spip {

/// Directed graph with a distinguished source and sink; vertices are 0..V-1.
struct Dag {
  int vertices = 0;
  std::vector<std::pair<int, int>> edges;
  int source = 0;
  int sink = 0;
};

/// Reads "V E\ns t\nu v\n..." (0-indexed, whitespace separated). Throws ParseError.
Dag parse_dag(std::istream& in);

/// Kahn order; throws NotAcyclic.
std::vector<int> topological_order(const Dag& dag);

/// Number of source→sink paths keyed by path length (edges). Lengths with zero paths are omitted.
std::map<int, BigInt> dag_path_count_oracle(const Dag& dag);

/// Injective placement of vertices with pairwise L∞ distance ≥ spacing.
struct VertexEmbedding {
  std::vector<LatticePoint> phi;
  std::int64_t spacing = 1;
};

/// φ = spacing·ψ with ψ distinct points drawn uniformly from a square grid of
/// side max(16, 8·vertices). When spacing is a power of two ≥ 2^(L+1), every
/// off-edge error along a path of length ≤ L stays an even dyadic multiple, so
/// rounding never branches and cross-talk needs an exact lattice coincidence.
VertexEmbedding random_embedding(int vertices, std::int64_t spacing, RandomStream& rng);

/// Smallest power of two ≥ max(requested, 2^(max_length+1)).
std::int64_t spacing_for_length(int max_length, std::int64_t requested);

/// Random DAG on `vertices` vertices: each pair i < j gets an edge with probability
/// `edge_probability`; source 0, sink vertices-1.
Dag random_dag(int vertices, double edge_probability, RandomStream& rng);

/// Edge-per-map encoding of a graph. Map i+1 sends φ(u) to φ(v) for edge i = (u, v).
struct EdgeEncoding {
  VertexEmbedding embedding;
  std::vector<std::pair<int, int>> edges;
  TransformSet maps;
  NoiseBound noise;
};

/// A = ½I, b = φ(v) + (½, ½) − ½φ(u): the landing sits at a cell centre, so
/// with ε < ½ the branch set of φ(u) is exactly {φ(v)}.
/// Throws InputError when ε ≥ ½ and SpacingTooSmall when φ violates its spacing.
EdgeEncoding encode_edges(const VertexEmbedding& embedding, const std::vector<std::pair<int, int>>& edges,
                          const Rational& epsilon);

/// True iff every step of `path` follows the edge named by its symbol, starting at φ(tail).
bool edge_consistent(const EdgeEncoding& enc, const Path& path);

struct DagEncoding {
  EdgeEncoding encoding;
  /// One instance per source→sink path length in [shortest, longest].
  std::vector<SpipInstance> instances;
};

/// Throws NotAcyclic, or SpacingTooSmall when the embedding is not valid.
DagEncoding embed_dag(const Dag& dag, const VertexEmbedding& embedding, const Rational& epsilon);

struct EmbeddingReport {
  bool pass = false;
  std::map<int, BigInt> spip_counts;
  std::map<int, BigInt> oracle_counts;
  /// Edges whose branch set is not the singleton {φ(v)}.
  std::vector<std::pair<int, int>> faulty_edges;
  /// Valid SPIP paths to φ(t) that do not follow graph edges.
  std::vector<Path> counterexamples;

  BigInt spip_total() const;
  BigInt oracle_total() const;
};

EmbeddingReport verify_dag_embedding(const Dag& dag, const DagEncoding& encoding);

nlohmann::json report_to_json(const EmbeddingReport& report);

struct DagCertificate {
  EmbeddingReport report;
  VertexEmbedding embedding;
  /// Embeddings tried, including the accepted one.
  int rounds = 0;
};

/// Embed, verify, and on cross-talk resample φ with doubled spacing, at most
/// `max_rounds` times. Throws SpacingTooSmall if no round passes.
DagCertificate certify_dag_reduction(const Dag& dag, const Rational& epsilon, std::uint64_t seed,
                                     std::int64_t initial_spacing = 4, int max_rounds = 3);

/// Finite transition system with start, goal, and step horizon.
struct TransitionSystem {
  int states = 0;
  std::vector<std::pair<int, int>> transitions;
  int start = 0;
  int goal = 0;
  int horizon = 0;
};

TransitionSystem random_transition_system(int states, int transitions, int horizon, RandomStream& rng);

/// BFS with depth bound: is the goal reachable in at most `horizon` transitions?
bool reachability_oracle(const TransitionSystem& ts);

/// The reachability question as an SPIP instance with n = horizon and target φ(goal).
struct TransitionEncoding {
  EdgeEncoding encoding;
  SpipInstance instance;
};

TransitionEncoding embed_transition_system(const TransitionSystem& ts, const VertexEmbedding& embedding,
                                           const Rational& epsilon);

struct ReachabilityAnswer {
  bool reachable = false;
  /// Witness path when reachable.
  std::optional<Path> witness;
  int rounds = 0;
};

/// Runs invert_dfs with max_solutions = 1 for every length ≤ horizon. A witness that
/// does not follow transitions is cross-talk and triggers resampling with doubled spacing.
ReachabilityAnswer decide_reachability(const TransitionSystem& ts, const Rational& epsilon, std::uint64_t seed,
                                       std::int64_t initial_spacing = 4, int max_rounds = 3);

}  // namespace spip
