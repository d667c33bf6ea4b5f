#ifndef TANGLE_GRAPH_HPP
#define TANGLE_GRAPH_HPP

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace tangle {

// Symbols in {0,1,2,3}^n packed base 4 with s_1 as the most significant digit,
// so numeric order is lexicographic order.
using Vertex = std::uint32_t;

enum class EdgeLabel { L, R };
inline char label_char(EdgeLabel l) { return l == EdgeLabel::R ? 'R' : 'L'; }

int cycle_distance(int a, int b);

std::string vertex_string(Vertex v, int n);
Vertex parse_vertex(const std::string& s);
Vertex vertex_from_digits(const std::vector<int>& digits);
std::vector<int> vertex_digits(Vertex v, int n);
Vertex constant_vertex(int digit, int n);

struct TransitionGraph {
  int n = 0;
  std::vector<std::vector<std::pair<Vertex, EdgeLabel>>> adjacency;  // sorted by neighbour

  std::size_t vertex_count() const { return adjacency.size(); }
  std::optional<EdgeLabel> label(Vertex a, Vertex b) const;
  std::size_t edge_count(EdgeLabel l) const;  // undirected edges
};

// Label of the transition s -> t per the graph rules, if any.
std::optional<EdgeLabel> transition_label(const std::vector<int>& s, const std::vector<int>& t);

TransitionGraph build_graph(int n, int max_n = 8);

// labels[i] is the label of vertices[i] -> vertices[(i+1) % size]
struct LRCycle {
  std::vector<Vertex> vertices;
  std::vector<EdgeLabel> labels;
  std::size_t length() const { return vertices.size(); }
  bool operator==(const LRCycle&) const = default;
  bool operator<(const LRCycle& o) const { return vertices < o.vertices; }
};

struct CyclePartition {
  std::vector<LRCycle> cycles;
  bool operator==(const CyclePartition&) const = default;
};

// Start at the smallest vertex, run in the direction whose first label is R.
LRCycle canonical(const LRCycle& c);
CyclePartition canonical(const CyclePartition& p);

struct Validation {
  bool ok = true;
  std::string diagnostic;
};
Validation validate_cycle(const TransitionGraph& g, const LRCycle& c);
Validation validate_partition(const TransitionGraph& g, const CyclePartition& p);

// A cover by LR-cycles gives every vertex exactly one L and one R partner, so covers
// correspond to pairs (perfect matching of the L-edges, perfect matching of the R-edges).
// Matchings are produced by backtracking from the smallest unmatched vertex.
using Matching = std::vector<Vertex>;  // mate of each vertex
std::vector<Matching> perfect_matchings(const TransitionGraph& g, EdgeLabel l, std::uint64_t budget,
                                        bool* exceeded = nullptr);

CyclePartition partition_from_matchings(const TransitionGraph& g, const Matching& mate_l, const Matching& mate_r);

struct EnumerationStats {
  std::uint64_t visited = 0;
  std::uint64_t l_matchings = 0;
  std::uint64_t r_matchings = 0;
  bool budget_exceeded = false;
};

// Streams every cover to `visit` (return false to stop). Order: L matchings outer, R inner.
EnumerationStats for_each_partition(const TransitionGraph& g, std::uint64_t budget,
                                    const std::function<bool(const Matching&, const Matching&)>& visit);

struct PartitionEnumeration {
  std::vector<CyclePartition> partitions;
  std::uint64_t total = 0;
  bool budget_exceeded = false;
};
PartitionEnumeration enumerate_partitions(const TransitionGraph& g, std::uint64_t budget = 1000000);

// Position of the partition in the enumeration order, if it is one of the covers.
std::optional<std::uint64_t> find_partition(const TransitionGraph& g, const CyclePartition& p,
                                            std::uint64_t budget = 100000000);

// The explicit cycle of length 4n through (0...0) and (2...2).
LRCycle explicit_long_cycle(int n);

struct P1Report {
  int n = 0;
  std::uint64_t partitions_checked = 0;
  bool budget_exceeded = false;
  bool lengths_mod4 = true;
  bool s0_s2_same_cycle = true;
  bool long_enough = true;
  std::optional<std::string> violation;
  std::map<std::size_t, std::uint64_t> length_histogram;  // over all cycles of all partitions
  std::size_t min_s0_cycle_length = 0;
  bool explicit_cycle_valid = false;
  std::size_t explicit_cycle_length = 0;

  bool ok() const { return lengths_mod4 && s0_s2_same_cycle && long_enough && explicit_cycle_valid; }
};

P1Report theorem_p1_report(const TransitionGraph& g, std::uint64_t budget = 100000000);
P1Report theorem_p1_report(const TransitionGraph& g, const std::vector<CyclePartition>& partitions);

std::string edge_list(const TransitionGraph& g);

}  // namespace tangle

#endif
